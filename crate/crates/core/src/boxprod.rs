//! Cartier modules on finitely generated free abelian groups with an
//! integer-matrix endomorphism, and the box tensor product in the free case:
//! `X[V] box Y[V] = (X tensor Y)[V]` with the (F,V)-bilinear pairing
//! `beta(V^i x, V^j y) = p^j V^i(x tensor phi^(i-j)(y))` for `i >= j`.

use num_bigint::BigInt;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::prng::SplitMix64;

/// A finitely generated free Z-module with an endomorphism given by an
/// integer matrix (row i of `matrix` produces output coordinate i).
#[derive(Debug, Clone, PartialEq)]
pub struct ModulePhi {
    pub rank: usize,
    pub matrix: Vec<Vec<BigInt>>,
}

impl ModulePhi {
    pub fn new(rank: usize, matrix: Vec<Vec<BigInt>>) -> Result<Self> {
        if rank == 0 || matrix.len() != rank || matrix.iter().any(|row| row.len() != rank) {
            return Err(Error::NotFree);
        }
        Ok(ModulePhi { rank, matrix })
    }

    pub fn identity(rank: usize) -> Result<Self> {
        let matrix = (0..rank)
            .map(|i| {
                (0..rank)
                    .map(|j| if i == j { BigInt::from(1) } else { BigInt::zero() })
                    .collect()
            })
            .collect();
        Self::new(rank, matrix)
    }

    pub fn from_i64(rank: usize, entries: &[&[i64]]) -> Result<Self> {
        let matrix = entries
            .iter()
            .map(|row| row.iter().map(|&e| BigInt::from(e)).collect())
            .collect();
        Self::new(rank, matrix)
    }

    pub fn zero_vec(&self) -> Vec<BigInt> {
        vec![BigInt::zero(); self.rank]
    }

    pub fn apply(&self, x: &[BigInt]) -> Result<Vec<BigInt>> {
        if x.len() != self.rank {
            return Err(Error::Mismatch);
        }
        Ok(self
            .matrix
            .iter()
            .map(|row| row.iter().zip(x).map(|(m, v)| m * v).sum())
            .collect())
    }

    pub fn apply_iter(&self, x: &[BigInt], times: usize) -> Result<Vec<BigInt>> {
        let mut out = x.to_vec();
        for _ in 0..times {
            out = self.apply(&out)?;
        }
        Ok(out)
    }

    pub fn sample_vec(&self, rng: &mut SplitMix64) -> Vec<BigInt> {
        (0..self.rank).map(|_| BigInt::from(rng.signed(9))).collect()
    }

    /// The Kronecker product endomorphism on `X tensor Y` (basis ordered
    /// with the right factor fastest).
    pub fn tensor(&self, other: &ModulePhi) -> Result<ModulePhi> {
        let rank = self.rank * other.rank;
        let mut matrix = vec![vec![BigInt::zero(); rank]; rank];
        for (i1, row1) in self.matrix.iter().enumerate() {
            for (j1, a) in row1.iter().enumerate() {
                for (i2, row2) in other.matrix.iter().enumerate() {
                    for (j2, b) in row2.iter().enumerate() {
                        matrix[i1 * other.rank + i2][j1 * other.rank + j2] = a * b;
                    }
                }
            }
        }
        ModulePhi::new(rank, matrix)
    }
}

pub fn tensor_vec(x: &[BigInt], y: &[BigInt]) -> Vec<BigInt> {
    let mut out = Vec::with_capacity(x.len() * y.len());
    for a in x {
        for b in y {
            out.push(a * b);
        }
    }
    out
}

pub fn add_vec(x: &[BigInt], y: &[BigInt]) -> Vec<BigInt> {
    x.iter().zip(y).map(|(a, b)| a + b).collect()
}

pub fn scale_vec(x: &[BigInt], k: &BigInt) -> Vec<BigInt> {
    x.iter().map(|a| a * k).collect()
}

/// An element of `X[V]` at finite precision: `coeffs[i]` is the coefficient
/// of `V^i`, a vector in X.
#[derive(Debug, Clone, PartialEq)]
pub struct ModCartierElt {
    pub coeffs: Vec<Vec<BigInt>>,
}

impl ModCartierElt {
    pub fn v_support(&self) -> Option<usize> {
        self.coeffs
            .iter()
            .rposition(|c| c.iter().any(|x| !x.is_zero()))
    }

    pub fn is_zero(&self) -> bool {
        self.v_support().is_none()
    }
}

/// The space `X[V]` truncated at `precision`, for a free module with
/// endomorphism.
#[derive(Debug, Clone)]
pub struct ModCartierSpace {
    pub module: ModulePhi,
    pub p: u64,
    pub precision: usize,
}

impl ModCartierSpace {
    pub fn new(module: ModulePhi, p: u64, precision: usize) -> Result<Self> {
        if precision == 0 {
            return Err(Error::InvalidInput("precision must be at least 1".into()));
        }
        Ok(ModCartierSpace {
            module,
            p,
            precision,
        })
    }

    fn check(&self, u: &ModCartierElt) -> Result<()> {
        if u.coeffs.len() != self.precision
            || u.coeffs.iter().any(|c| c.len() != self.module.rank)
        {
            return Err(Error::Mismatch);
        }
        Ok(())
    }

    pub fn zero(&self) -> ModCartierElt {
        ModCartierElt {
            coeffs: vec![self.module.zero_vec(); self.precision],
        }
    }

    pub fn v_term(&self, x: &[BigInt], i: usize) -> Result<ModCartierElt> {
        if x.len() != self.module.rank {
            return Err(Error::Mismatch);
        }
        if i >= self.precision {
            return Err(Error::PrecisionOverflow(self.precision));
        }
        let mut u = self.zero();
        u.coeffs[i] = x.to_vec();
        Ok(u)
    }

    pub fn add(&self, u: &ModCartierElt, v: &ModCartierElt) -> Result<ModCartierElt> {
        self.check(u)?;
        self.check(v)?;
        Ok(ModCartierElt {
            coeffs: u
                .coeffs
                .iter()
                .zip(&v.coeffs)
                .map(|(a, b)| add_vec(a, b))
                .collect(),
        })
    }

    pub fn neg(&self, u: &ModCartierElt) -> Result<ModCartierElt> {
        self.check(u)?;
        Ok(ModCartierElt {
            coeffs: u
                .coeffs
                .iter()
                .map(|c| c.iter().map(|x| -x).collect())
                .collect(),
        })
    }

    pub fn scale(&self, u: &ModCartierElt, k: &BigInt) -> Result<ModCartierElt> {
        self.check(u)?;
        Ok(ModCartierElt {
            coeffs: u.coeffs.iter().map(|c| scale_vec(c, k)).collect(),
        })
    }

    /// `F(sum V^i x_i) = phi(x_0) + p sum V^i x_{i+1}`.
    pub fn frobenius(&self, u: &ModCartierElt) -> Result<ModCartierElt> {
        self.check(u)?;
        let p_int = BigInt::from(self.p);
        let mut coeffs = Vec::with_capacity(self.precision);
        let mut head = self.module.apply(&u.coeffs[0])?;
        if self.precision > 1 {
            head = add_vec(&head, &scale_vec(&u.coeffs[1], &p_int));
        }
        coeffs.push(head);
        for i in 1..self.precision {
            if i + 1 < self.precision {
                coeffs.push(scale_vec(&u.coeffs[i + 1], &p_int));
            } else {
                coeffs.push(self.module.zero_vec());
            }
        }
        Ok(ModCartierElt { coeffs })
    }

    /// The shift; the top coefficient must vanish (exact semantics).
    pub fn verschiebung(&self, u: &ModCartierElt) -> Result<ModCartierElt> {
        self.check(u)?;
        if u.coeffs[self.precision - 1].iter().any(|x| !x.is_zero()) {
            return Err(Error::PrecisionOverflow(self.precision));
        }
        let mut coeffs = Vec::with_capacity(self.precision);
        coeffs.push(self.module.zero_vec());
        coeffs.extend_from_slice(&u.coeffs[..self.precision - 1]);
        Ok(ModCartierElt { coeffs })
    }

    pub fn sample(&self, rng: &mut SplitMix64) -> ModCartierElt {
        ModCartierElt {
            coeffs: (0..self.precision)
                .map(|_| self.module.sample_vec(rng))
                .collect(),
        }
    }

    /// Sample with V-support strictly below `limit`, so one Verschiebung
    /// stays exact.
    pub fn sample_supported(&self, limit: usize, rng: &mut SplitMix64) -> ModCartierElt {
        let mut u = self.zero();
        for i in 0..limit.min(self.precision) {
            u.coeffs[i] = self.module.sample_vec(rng);
        }
        u
    }
}

/// The box product of two free-module Cartier spaces: the target space over
/// `X tensor Y` together with the canonical (F,V)-bilinear pairing.
#[derive(Debug, Clone)]
pub struct BoxProduct {
    pub left: ModCartierSpace,
    pub right: ModCartierSpace,
    pub target: ModCartierSpace,
}

pub fn box_free(left: &ModCartierSpace, right: &ModCartierSpace) -> Result<BoxProduct> {
    if left.p != right.p || left.precision != right.precision {
        return Err(Error::Mismatch);
    }
    let tensor = left.module.tensor(&right.module)?;
    Ok(BoxProduct {
        left: left.clone(),
        right: right.clone(),
        target: ModCartierSpace::new(tensor, left.p, left.precision)?,
    })
}

impl BoxProduct {
    /// The universal (F,V)-bilinear pairing
    /// `beta(V^i x, V^j y) = p^j V^i(x tensor phi_Y^(i-j)(y))` for `i >= j`
    /// (and symmetrically for `i < j`), extended bilinearly.
    pub fn pairing(&self, u: &ModCartierElt, v: &ModCartierElt) -> Result<ModCartierElt> {
        let mut out = self.target.zero();
        let p_int = BigInt::from(self.left.p);
        for (i, x) in u.coeffs.iter().enumerate() {
            if x.iter().all(|c| c.is_zero()) {
                continue;
            }
            for (j, y) in v.coeffs.iter().enumerate() {
                if y.iter().all(|c| c.is_zero()) {
                    continue;
                }
                let (depth, p_exp) = (i.max(j), i.min(j));
                let tensor = if i >= j {
                    tensor_vec(x, &self.right.module.apply_iter(y, i - j)?)
                } else {
                    tensor_vec(&self.left.module.apply_iter(x, j - i)?, y)
                };
                let scaled = scale_vec(&tensor, &p_int.pow(p_exp as u32));
                out.coeffs[depth] = add_vec(&out.coeffs[depth], &scaled);
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn space(rank: usize, p: u64, precision: usize, seed: u64) -> ModCartierSpace {
        let mut rng = SplitMix64::new(seed);
        let matrix = (0..rank)
            .map(|_| (0..rank).map(|_| BigInt::from(rng.signed(4))).collect())
            .collect();
        ModCartierSpace::new(ModulePhi::new(rank, matrix).unwrap(), p, precision).unwrap()
    }

    #[test]
    fn malformed_matrix_is_not_free() {
        assert!(matches!(
            ModulePhi::new(2, vec![vec![BigInt::zero()]]),
            Err(Error::NotFree)
        ));
    }

    #[test]
    fn fv_is_p() {
        let s = space(2, 3, 4, 9);
        let mut rng = SplitMix64::new(10);
        for _ in 0..20 {
            let u = s.sample_supported(3, &mut rng);
            let fv = s.frobenius(&s.verschiebung(&u).unwrap()).unwrap();
            assert_eq!(fv, s.scale(&u, &BigInt::from(3)).unwrap());
        }
    }

    #[test]
    fn pairing_peels_one_v() {
        // beta(V x, y) = V(x tensor phi(y)).
        let x_space = space(2, 2, 4, 1);
        let y_space = space(2, 2, 4, 2);
        let bp = box_free(&x_space, &y_space).unwrap();
        let mut rng = SplitMix64::new(3);
        let x = x_space.module.sample_vec(&mut rng);
        let y = y_space.module.sample_vec(&mut rng);
        let lhs = bp
            .pairing(
                &x_space.v_term(&x, 1).unwrap(),
                &y_space.v_term(&y, 0).unwrap(),
            )
            .unwrap();
        let expected = bp
            .target
            .v_term(&tensor_vec(&x, &y_space.module.apply(&y).unwrap()), 1)
            .unwrap();
        assert_eq!(lhs, expected);
    }

    #[test]
    fn pairing_of_two_vs_gains_p() {
        // beta(V x, V y) = p V(x tensor y).
        let x_space = space(1, 3, 4, 4);
        let y_space = space(1, 3, 4, 5);
        let bp = box_free(&x_space, &y_space).unwrap();
        let mut rng = SplitMix64::new(6);
        let x = x_space.module.sample_vec(&mut rng);
        let y = y_space.module.sample_vec(&mut rng);
        let lhs = bp
            .pairing(
                &x_space.v_term(&x, 1).unwrap(),
                &y_space.v_term(&y, 1).unwrap(),
            )
            .unwrap();
        let expected = bp
            .target
            .v_term(&scale_vec(&tensor_vec(&x, &y), &BigInt::from(3)), 1)
            .unwrap();
        assert_eq!(lhs, expected);
    }

    #[test]
    fn bilinearity_axioms_on_samples() {
        let x_space = space(2, 2, 5, 7);
        let y_space = space(2, 2, 5, 8);
        let bp = box_free(&x_space, &y_space).unwrap();
        let mut rng = SplitMix64::new(11);
        for _ in 0..40 {
            let u = x_space.sample_supported(4, &mut rng);
            let v = y_space.sample_supported(4, &mut rng);
            // F-axiom: beta(Fu, Fv) = F(beta(u, v)).
            let lhs = bp
                .pairing(&x_space.frobenius(&u).unwrap(), &y_space.frobenius(&v).unwrap())
                .unwrap();
            let rhs = bp.target.frobenius(&bp.pairing(&u, &v).unwrap()).unwrap();
            assert_eq!(lhs, rhs);
            // V(beta(Fu, v)) = beta(u, Vv).
            let lhs = bp
                .target
                .verschiebung(&bp.pairing(&x_space.frobenius(&u).unwrap(), &v).unwrap())
                .unwrap();
            let rhs = bp.pairing(&u, &y_space.verschiebung(&v).unwrap()).unwrap();
            assert_eq!(lhs, rhs);
            // V(beta(u, Fv)) = beta(Vu, v).
            let lhs = bp
                .target
                .verschiebung(&bp.pairing(&u, &y_space.frobenius(&v).unwrap()).unwrap())
                .unwrap();
            let rhs = bp.pairing(&x_space.verschiebung(&u).unwrap(), &v).unwrap();
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn unit_law() {
        // (Z, id)[V] box X[V] = X[V]: beta([1], u) recovers u under the
        // canonical identification Z tensor X = X.
        let unit = ModCartierSpace::new(ModulePhi::identity(1).unwrap(), 2, 4).unwrap();
        let x_space = space(3, 2, 4, 12);
        let bp = box_free(&unit, &x_space).unwrap();
        let one = unit.v_term(&[BigInt::from(1)], 0).unwrap();
        let mut rng = SplitMix64::new(13);
        for _ in 0..10 {
            let u = x_space.sample(&mut rng);
            let paired = bp.pairing(&one, &u).unwrap();
            // Rank of the tensor target is 1 * rank(X) = rank(X).
            assert_eq!(paired.coeffs, u.coeffs);
        }
    }
}
