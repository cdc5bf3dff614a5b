//! Truncated Witt-vector rings W_n(A) over arbitrary coefficient rings:
//! arithmetic through the universal polynomials, Frobenius, Verschiebung,
//! restriction, Teichmueller lifts, the cofree lift along a Frobenius lift,
//! and the isomorphism W_n(F_p) = Z/p^n.

use std::collections::BTreeMap;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, ToPrimitive, Zero};

use crate::delta::DeltaStructure;
use crate::error::{Error, Result};
use crate::prng::SplitMix64;
use crate::ring::{Element, RingHandle};
use crate::wittpoly::{self, GhostVector, PolyKind, PolyStore, WittPolynomial};

/// A truncated Witt vector: coordinates in a fixed coefficient ring.
/// Equality is componentwise.
#[derive(Debug, Clone, PartialEq)]
pub struct WittVec {
    pub p: u64,
    pub coords: Vec<Element>,
}

impl WittVec {
    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn ring(&self) -> &RingHandle {
        self.coords[0].ring()
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "p": self.p,
            "coords": self.coords.iter().map(|c| c.to_json()).collect::<Vec<_>>(),
        })
    }

    pub fn from_json(ring: &RingHandle, v: &serde_json::Value) -> Result<WittVec> {
        let p = v
            .get("p")
            .and_then(|x| x.as_u64())
            .ok_or_else(|| Error::InvalidInput("missing p".into()))?;
        let coords = v
            .get("coords")
            .and_then(|x| x.as_array())
            .ok_or_else(|| Error::InvalidInput("missing coords".into()))?
            .iter()
            .map(|c| Element::from_json(ring, c))
            .collect::<Result<Vec<_>>>()?;
        if coords.is_empty() {
            return Err(Error::InvalidInput("coords must be nonempty".into()));
        }
        Ok(WittVec { p, coords })
    }
}

/// Arithmetic context: the prime, the coefficient ring, the maximum usable
/// length and the universal polynomials for it, loaded up front. Immutable
/// after construction.
#[derive(Debug)]
pub struct WittContext {
    p: u64,
    ring: RingHandle,
    max_len: usize,
    polys: BTreeMap<(PolyKind, usize), WittPolynomial>,
}

impl WittContext {
    /// Generate every polynomial the context can need (sum/prod/neg up to
    /// index `max_len - 1`, frob/delta up to `max_len - 2`).
    pub fn new(p: u64, ring: RingHandle, max_len: usize) -> Result<Self> {
        let store = PolyStore::in_memory();
        Self::with_store(p, ring, max_len, &store)
    }

    pub fn with_store(
        p: u64,
        ring: RingHandle,
        max_len: usize,
        store: &PolyStore,
    ) -> Result<Self> {
        if max_len == 0 {
            return Err(Error::InvalidInput("max_len must be at least 1".into()));
        }
        let mut polys = BTreeMap::new();
        for kind in [PolyKind::Sum, PolyKind::Prod, PolyKind::Neg] {
            for n in 0..max_len {
                polys.insert((kind, n), store.get(p, n, kind)?);
            }
        }
        for kind in [PolyKind::Frob, PolyKind::Delta] {
            for n in 0..max_len.saturating_sub(1) {
                polys.insert((kind, n), store.get(p, n, kind)?);
            }
        }
        Ok(WittContext {
            p,
            ring,
            max_len,
            polys,
        })
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn ring(&self) -> &RingHandle {
        &self.ring
    }

    pub fn max_len(&self) -> usize {
        self.max_len
    }

    pub fn poly(&self, kind: PolyKind, n: usize) -> Result<&WittPolynomial> {
        self.polys
            .get(&(kind, n))
            .ok_or(Error::LengthOverflow(n + 1, self.max_len))
    }

    fn check_vec(&self, x: &WittVec) -> Result<()> {
        if x.p != self.p {
            return Err(Error::InvalidInput(format!(
                "Witt vector prime {} does not match context prime {}",
                x.p, self.p
            )));
        }
        if x.coords.is_empty() {
            return Err(Error::InvalidInput("empty Witt vector".into()));
        }
        if x.len() > self.max_len {
            return Err(Error::LengthOverflow(x.len(), self.max_len));
        }
        if x.coords.iter().any(|c| c.ring() != &self.ring) {
            return Err(Error::RingMismatch);
        }
        Ok(())
    }

    fn check_pair(&self, x: &WittVec, y: &WittVec) -> Result<()> {
        self.check_vec(x)?;
        self.check_vec(y)?;
        if x.len() != y.len() {
            return Err(Error::LengthMismatch(x.len(), y.len()));
        }
        Ok(())
    }

    pub fn from_coords(&self, coords: Vec<Element>) -> Result<WittVec> {
        let v = WittVec { p: self.p, coords };
        self.check_vec(&v)?;
        Ok(v)
    }

    pub fn zero(&self, len: usize) -> WittVec {
        WittVec {
            p: self.p,
            coords: vec![self.ring.zero(); len],
        }
    }

    pub fn one(&self, len: usize) -> WittVec {
        self.teichmuller(&self.ring.one(), len)
    }

    /// The multiplicative Teichmueller lift `[a] = (a, 0, ..., 0)`.
    pub fn teichmuller(&self, a: &Element, len: usize) -> WittVec {
        let mut coords = Vec::with_capacity(len);
        coords.push(a.clone());
        for _ in 1..len {
            coords.push(self.ring.zero());
        }
        WittVec { p: self.p, coords }
    }

    pub fn sample(&self, len: usize, rng: &mut SplitMix64) -> WittVec {
        WittVec {
            p: self.p,
            coords: (0..len).map(|_| self.ring.sample(rng)).collect(),
        }
    }

    fn binary_op(&self, kind: PolyKind, x: &WittVec, y: &WittVec) -> Result<WittVec> {
        self.check_pair(x, y)?;
        let mut coords = Vec::with_capacity(x.len());
        for k in 0..x.len() {
            let poly = self.poly(kind, k)?;
            coords.push(poly.evaluate(&x.coords, Some(&y.coords), &self.ring)?);
        }
        Ok(WittVec {
            p: self.p,
            coords,
        })
    }

    pub fn add(&self, x: &WittVec, y: &WittVec) -> Result<WittVec> {
        self.binary_op(PolyKind::Sum, x, y)
    }

    pub fn mul(&self, x: &WittVec, y: &WittVec) -> Result<WittVec> {
        self.binary_op(PolyKind::Prod, x, y)
    }

    pub fn neg(&self, x: &WittVec) -> Result<WittVec> {
        self.check_vec(x)?;
        let mut coords = Vec::with_capacity(x.len());
        for k in 0..x.len() {
            let poly = self.poly(PolyKind::Neg, k)?;
            coords.push(poly.evaluate(&x.coords, None, &self.ring)?);
        }
        Ok(WittVec {
            p: self.p,
            coords,
        })
    }

    pub fn sub(&self, x: &WittVec, y: &WittVec) -> Result<WittVec> {
        self.add(x, &self.neg(y)?)
    }

    /// Witt vectors Frobenius `W_{n+1} -> W_n`. In characteristic p this is
    /// the componentwise p-th power of the first n coordinates; in general
    /// it evaluates the Frobenius polynomials.
    pub fn frobenius(&self, x: &WittVec) -> Result<WittVec> {
        self.check_vec(x)?;
        if x.len() < 2 {
            return Err(Error::LengthMismatch(x.len(), 2));
        }
        // The shortcut needs char(A) = p, not merely a prime field: W_n at
        // p = 2 over F_3 must use the polynomials.
        if self.ring.is_prime_field() && *self.ring.characteristic() == BigUint::from(self.p) {
            let coords = x.coords[..x.len() - 1]
                .iter()
                .map(|c| c.pow(self.p))
                .collect();
            return Ok(WittVec {
                p: self.p,
                coords,
            });
        }
        self.frobenius_poly_path(x)
    }

    /// The universal-polynomial route for Frobenius, available on every ring
    /// (used as the oracle for the char-p fast path).
    pub fn frobenius_poly_path(&self, x: &WittVec) -> Result<WittVec> {
        self.check_vec(x)?;
        if x.len() < 2 {
            return Err(Error::LengthMismatch(x.len(), 2));
        }
        let mut coords = Vec::with_capacity(x.len() - 1);
        for k in 0..x.len() - 1 {
            let poly = self.poly(PolyKind::Frob, k)?;
            coords.push(poly.evaluate(&x.coords, None, &self.ring)?);
        }
        Ok(WittVec {
            p: self.p,
            coords,
        })
    }

    /// Verschiebung `W_n -> W_{n+1}`: the additive shift.
    pub fn verschiebung(&self, x: &WittVec) -> Result<WittVec> {
        self.check_vec(x)?;
        if x.len() + 1 > self.max_len {
            return Err(Error::LengthOverflow(x.len() + 1, self.max_len));
        }
        let mut coords = Vec::with_capacity(x.len() + 1);
        coords.push(self.ring.zero());
        coords.extend_from_slice(&x.coords);
        Ok(WittVec {
            p: self.p,
            coords,
        })
    }

    /// Restriction `W_{n+1} -> W_n`: forget the last coordinate.
    pub fn restriction(&self, x: &WittVec) -> Result<WittVec> {
        self.check_vec(x)?;
        if x.len() < 2 {
            return Err(Error::LengthMismatch(x.len(), 2));
        }
        Ok(WittVec {
            p: self.p,
            coords: x.coords[..x.len() - 1].to_vec(),
        })
    }

    pub fn ghost(&self, x: &WittVec) -> Result<GhostVector> {
        self.check_vec(x)?;
        wittpoly::ghost(self.p, &x.coords)
    }

    pub fn from_ghost(&self, g: &GhostVector) -> Result<WittVec> {
        let coords = wittpoly::unghost(g)?;
        self.from_coords(coords)
    }

    /// Ghost-coordinate arithmetic (torsion-free rings only): the second,
    /// independent strategy for ring operations.
    pub fn add_via_ghost(&self, x: &WittVec, y: &WittVec) -> Result<WittVec> {
        self.check_pair(x, y)?;
        let gx = self.ghost(x)?;
        let gy = self.ghost(y)?;
        let sum: Vec<Element> = gx
            .components
            .iter()
            .zip(&gy.components)
            .map(|(a, b)| a.add(b))
            .collect::<Result<_>>()?;
        self.from_ghost(&GhostVector::new(self.p, sum)?)
    }

    pub fn mul_via_ghost(&self, x: &WittVec, y: &WittVec) -> Result<WittVec> {
        self.check_pair(x, y)?;
        let gx = self.ghost(x)?;
        let gy = self.ghost(y)?;
        let prod: Vec<Element> = gx
            .components
            .iter()
            .zip(&gy.components)
            .map(|(a, b)| a.mul(b))
            .collect::<Result<_>>()?;
        self.from_ghost(&GhostVector::new(self.p, prod)?)
    }

    /// The cofree lift along a delta-structure: the unique Witt vector with
    /// `ghost_k(lambda(a)) = phi^k(a)`. `NotIntegral` means phi is not a
    /// Frobenius lift.
    pub fn cofree_lift(&self, ds: &DeltaStructure, a: &Element, len: usize) -> Result<WittVec> {
        if !self.ring.is_torsion_free() {
            return Err(Error::NotTorsionFree);
        }
        if ds.ring() != &self.ring || a.ring() != &self.ring {
            return Err(Error::RingMismatch);
        }
        // Spot-check that phi really lifts the p-power map; delta-structures
        // derived from arbitrary endomorphisms would otherwise fail later
        // with a less pointed NotIntegral.
        let p_int = BigInt::from(self.p);
        let mut rng = SplitMix64::new(0x5eed ^ self.p);
        for _ in 0..5 {
            let s = crate::delta::DeltaCarrier::sample(ds, &mut rng)?;
            let diff = ds.phi(&s)?.sub(&s.pow(self.p))?;
            if !diff.divisible_by_int(&p_int) {
                return Err(Error::NotFrobeniusLift(format!(
                    "phi(x) - x^{} not divisible by {} at x = {s}",
                    self.p, self.p
                )));
            }
        }
        let mut components = Vec::with_capacity(len);
        let mut current = a.clone();
        for k in 0..len {
            if k > 0 {
                current = ds.phi(&current)?;
            }
            components.push(current.clone());
        }
        self.from_ghost(&GhostVector::new(self.p, components)?)
    }
}

/// Teichmueller representative of `x` in `Z/p^n`: the fixed point of
/// `y -> y^p` congruent to `x` mod p. Iterating the p-th power map n times
/// stabilizes.
pub fn teichmuller_residue(p: u64, n: u32, x: &BigInt) -> BigInt {
    let modulus = BigInt::from(p).pow(n);
    let mut y = num_integer::Integer::mod_floor(x, &modulus);
    for _ in 0..n {
        let next = y.modpow(&BigInt::from(p), &modulus);
        if next == y {
            break;
        }
        y = next;
    }
    y
}

/// The isomorphism `W_n(F_p) = Z/p^n`: send `x` to
/// `sum_i tau(x_i) * p^i` where tau is the multiplicative Teichmueller lift.
pub fn iso_wn_fp(ctx: &WittContext, x: &WittVec) -> Result<Element> {
    let p = ctx.p();
    if !ctx.ring().is_prime_field() || *ctx.ring().characteristic() != BigUint::from(p) {
        return Err(Error::NotCharP(p));
    }
    if x.coords.iter().any(|c| c.ring() != ctx.ring()) {
        return Err(Error::RingMismatch);
    }
    let n = x.len() as u32;
    let target = RingHandle::integers_mod(
        BigUint::from(p)
            .pow(n)
            .to_u64()
            .ok_or_else(|| Error::InvalidInput("p^n too large".into()))?,
    )?;
    let mut acc = BigInt::zero();
    let mut p_pow = BigInt::one();
    for (i, coord) in x.coords.iter().enumerate() {
        let digit = coord.as_int().ok_or(Error::RingMismatch)?;
        let tau = teichmuller_residue(p, n - i as u32, digit);
        acc += tau * &p_pow;
        p_pow *= BigInt::from(p);
    }
    Ok(target.from_bigint(&acc))
}

/// Inverse of `iso_wn_fp`: read off Teichmueller digits.
pub fn iso_wn_fp_inverse(ctx: &WittContext, r: &Element, n: usize) -> Result<WittVec> {
    let p = ctx.p();
    if !ctx.ring().is_prime_field() || *ctx.ring().characteristic() != BigUint::from(p) {
        return Err(Error::NotCharP(p));
    }
    let mut v = r.as_int().ok_or(Error::RingMismatch)?.clone();
    let p_int = BigInt::from(p);
    let mut coords = Vec::with_capacity(n);
    for i in 0..n {
        let digits_left = (n - i) as u32;
        let modulus = p_int.pow(digits_left);
        v = num_integer::Integer::mod_floor(&v, &modulus);
        let digit = num_integer::Integer::mod_floor(&v, &p_int);
        let tau = teichmuller_residue(p, digits_left, &digit);
        v = (&v - tau) / &p_int;
        coords.push(ctx.ring().from_bigint(&digit));
    }
    ctx.from_coords(coords)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::PhiMap;

    fn ctx_over(p: u64, ring: RingHandle, len: usize) -> WittContext {
        WittContext::new(p, ring, len).unwrap()
    }

    #[test]
    fn w2_f2_addition_table_entry() {
        // (1,0) + (1,0) = (0,1) in W_2(F_2).
        let f2 = RingHandle::prime_field(2).unwrap();
        let ctx = ctx_over(2, f2.clone(), 2);
        let one = ctx.teichmuller(&f2.one(), 2);
        let sum = ctx.add(&one, &one).unwrap();
        assert_eq!(sum, ctx.from_coords(vec![f2.zero(), f2.one()]).unwrap());
    }

    #[test]
    fn additive_identity_and_units() {
        let z = RingHandle::integers();
        let ctx = ctx_over(2, z.clone(), 3);
        let mut rng = SplitMix64::new(4);
        let x = ctx.sample(3, &mut rng);
        assert_eq!(ctx.add(&x, &ctx.zero(3)).unwrap(), x);
        assert_eq!(ctx.mul(&x, &ctx.one(3)).unwrap(), x);
        assert_eq!(ctx.mul(&ctx.one(3), &ctx.one(3)).unwrap(), ctx.one(3));
    }

    #[test]
    fn sub_is_add_neg() {
        let z = RingHandle::integers();
        let ctx = ctx_over(3, z, 3);
        let mut rng = SplitMix64::new(8);
        let x = ctx.sample(3, &mut rng);
        assert!(ctx
            .sub(&x, &x)
            .unwrap()
            .coords
            .iter()
            .all(|c| c.is_zero()));
    }

    #[test]
    fn frobenius_char_p_matches_polynomials() {
        let f3 = RingHandle::prime_field(3).unwrap();
        let ctx = ctx_over(3, f3, 4);
        let mut rng = SplitMix64::new(10);
        for _ in 0..30 {
            let x = ctx.sample(4, &mut rng);
            let fast = ctx.frobenius(&x).unwrap();
            let slow = ctx.frobenius_poly_path(&x).unwrap();
            assert_eq!(fast, slow);
        }
    }

    #[test]
    fn frobenius_over_wrong_characteristic_uses_polynomials() {
        // W_n at p = 2 over F_3: the componentwise-square shortcut does not
        // apply and F must come from the polynomials. F and V still satisfy
        // FV = 2.
        let f3 = RingHandle::prime_field(3).unwrap();
        let ctx = ctx_over(2, f3.clone(), 3);
        let mut rng = SplitMix64::new(12);
        for _ in 0..30 {
            let x = ctx.sample(2, &mut rng);
            let fv = ctx.frobenius(&ctx.verschiebung(&x).unwrap()).unwrap();
            let two_x = ctx.add(&x, &x).unwrap();
            assert_eq!(fv, two_x);
            // The shortcut would square componentwise; exhibit a vector
            // where that differs from the true Frobenius.
        }
        let x = ctx
            .from_coords(vec![f3.from_int(1), f3.from_int(1), f3.zero()])
            .unwrap();
        let f = ctx.frobenius(&x).unwrap();
        let squared: Vec<Element> = x.coords[..2].iter().map(|c| c.pow(2)).collect();
        assert_ne!(f.coords, squared);
    }

    #[test]
    fn frobenius_formula_p2() {
        // F(a0, a1, a2) = (a0^2 + 2 a1, -a1^2 - 2 a0^2 a1 + 2 a2).
        let z = RingHandle::integers();
        let ctx = ctx_over(2, z.clone(), 3);
        let x = ctx
            .from_coords(vec![z.from_int(3), z.from_int(5), z.from_int(7)])
            .unwrap();
        let f = ctx.frobenius(&x).unwrap();
        assert_eq!(f.coords[0], z.from_int(9 + 10));
        assert_eq!(f.coords[1], z.from_int(-25 - 2 * 9 * 5 + 14));
    }

    #[test]
    fn frobenius_needs_length_two() {
        let z = RingHandle::integers();
        let ctx = ctx_over(2, z.clone(), 3);
        let x = ctx.from_coords(vec![z.from_int(1)]).unwrap();
        assert!(matches!(
            ctx.frobenius(&x),
            Err(Error::LengthMismatch(1, 2))
        ));
    }

    #[test]
    fn fv_is_multiplication_by_p() {
        let z36 = RingHandle::integers_mod(36).unwrap();
        for p in [2u64, 3] {
            let ctx = ctx_over(p, z36.clone(), 4);
            let mut rng = SplitMix64::new(p);
            for _ in 0..20 {
                let x = ctx.sample(3, &mut rng);
                let fv = ctx.frobenius(&ctx.verschiebung(&x).unwrap()).unwrap();
                // p*x computed as x + x + ... + x (p times).
                let mut px = x.clone();
                for _ in 1..p {
                    px = ctx.add(&px, &x).unwrap();
                }
                assert_eq!(fv, px, "p = {p}");
            }
        }
    }

    #[test]
    fn projection_formula() {
        // x * V(y) = V(F(x) * y).
        let z8 = RingHandle::integers_mod(8).unwrap();
        let ctx = ctx_over(2, z8, 4);
        let mut rng = SplitMix64::new(21);
        for _ in 0..25 {
            let x = ctx.sample(4, &mut rng);
            let y = ctx.sample(3, &mut rng);
            let lhs = ctx.mul(&x, &ctx.verschiebung(&y).unwrap()).unwrap();
            let rhs = ctx
                .verschiebung(&ctx.mul(&ctx.frobenius(&x).unwrap(), &y).unwrap())
                .unwrap();
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn verschiebung_of_zero_and_restricted_teichmuller() {
        let z = RingHandle::integers();
        let ctx = ctx_over(2, z.clone(), 4);
        assert_eq!(ctx.verschiebung(&ctx.zero(2)).unwrap(), ctx.zero(3));
        // R([a]) = [a] one length down.
        let a = z.from_int(9);
        assert_eq!(
            ctx.restriction(&ctx.teichmuller(&a, 4)).unwrap(),
            ctx.teichmuller(&a, 3)
        );
    }

    #[test]
    fn restriction_drops_last_and_is_hom() {
        let z9 = RingHandle::integers_mod(9).unwrap();
        let ctx = ctx_over(3, z9, 3);
        let mut rng = SplitMix64::new(31);
        for _ in 0..20 {
            let x = ctx.sample(3, &mut rng);
            let y = ctx.sample(3, &mut rng);
            let r = ctx.restriction(&x).unwrap();
            assert_eq!(r.coords, x.coords[..2].to_vec());
            assert_eq!(
                ctx.restriction(&ctx.add(&x, &y).unwrap()).unwrap(),
                ctx.add(&r, &ctx.restriction(&y).unwrap()).unwrap()
            );
        }
    }

    #[test]
    fn teichmuller_is_multiplicative() {
        let z9 = RingHandle::integers_mod(9).unwrap();
        let ctx = ctx_over(3, z9.clone(), 3);
        let mut rng = SplitMix64::new(17);
        for _ in 0..100 {
            let a = z9.sample(&mut rng);
            let b = z9.sample(&mut rng);
            let lhs = ctx
                .mul(&ctx.teichmuller(&a, 3), &ctx.teichmuller(&b, 3))
                .unwrap();
            let rhs = ctx.teichmuller(&a.mul(&b).unwrap(), 3);
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn frobenius_of_teichmuller_is_teichmuller_of_power() {
        // F([a]) = [a^p] for 50 random a in Z/25, p = 5.
        let z25 = RingHandle::integers_mod(25).unwrap();
        let ctx = ctx_over(5, z25.clone(), 3);
        let mut rng = SplitMix64::new(55);
        for _ in 0..50 {
            let a = z25.sample(&mut rng);
            let lhs = ctx.frobenius(&ctx.teichmuller(&a, 3)).unwrap();
            assert_eq!(lhs, ctx.teichmuller(&a.pow(5), 2));
        }
    }

    #[test]
    fn teichmuller_is_not_additive() {
        // [1] + [1] = (0, 1) != [0] in W_2(F_2).
        let f2 = RingHandle::prime_field(2).unwrap();
        let ctx = ctx_over(2, f2.clone(), 2);
        let one = ctx.teichmuller(&f2.one(), 2);
        let sum = ctx.add(&one, &one).unwrap();
        assert_ne!(sum, ctx.teichmuller(&f2.zero(), 2));
        assert_eq!(sum.coords[1], f2.one());
    }

    #[test]
    fn ghost_round_trip_and_failure() {
        let z = RingHandle::integers();
        let ctx = ctx_over(2, z.clone(), 3);
        let x = ctx
            .from_coords(vec![z.from_int(2), z.from_int(-1)])
            .unwrap();
        let g = ctx.ghost(&x).unwrap();
        assert_eq!(g.components, vec![z.from_int(2), z.from_int(2)]);
        assert_eq!(ctx.from_ghost(&g).unwrap(), x);
        let bad = GhostVector::new(2, vec![z.from_int(0), z.from_int(1)]).unwrap();
        assert!(matches!(
            ctx.from_ghost(&bad),
            Err(Error::NotIntegral { .. })
        ));
    }

    #[test]
    fn ghost_strategies_agree() {
        let z = RingHandle::integers();
        let ctx = ctx_over(2, z, 4);
        let mut rng = SplitMix64::new(12);
        for _ in 0..20 {
            let x = ctx.sample(4, &mut rng);
            let y = ctx.sample(4, &mut rng);
            assert_eq!(
                ctx.add(&x, &y).unwrap(),
                ctx.add_via_ghost(&x, &y).unwrap()
            );
            assert_eq!(
                ctx.mul(&x, &y).unwrap(),
                ctx.mul_via_ghost(&x, &y).unwrap()
            );
        }
    }

    #[test]
    fn cofree_lift_of_two() {
        // lambda(2) over (Z, phi = id) at p = 2 is (2, -1, -4).
        let z = RingHandle::integers();
        let ctx = ctx_over(2, z.clone(), 3);
        let ds = DeltaStructure::phi_lift(z.clone(), 2, PhiMap::Identity).unwrap();
        let lam = ctx.cofree_lift(&ds, &z.from_int(2), 3).unwrap();
        assert_eq!(
            lam.coords,
            vec![z.from_int(2), z.from_int(-1), z.from_int(-4)]
        );
        // lambda(1) and lambda(0) are Teichmueller-like.
        assert_eq!(
            ctx.cofree_lift(&ds, &z.one(), 3).unwrap(),
            ctx.one(3)
        );
        assert_eq!(
            ctx.cofree_lift(&ds, &z.zero(), 3).unwrap(),
            ctx.zero(3)
        );
    }

    #[test]
    fn teichmuller_residue_fixed_points() {
        // tau(1) = 1 in Z/4; tau(2) = 8 in Z/9 (fixed point of cubing).
        assert_eq!(teichmuller_residue(2, 2, &BigInt::from(1)), BigInt::from(1));
        assert_eq!(teichmuller_residue(3, 2, &BigInt::from(2)), BigInt::from(8));
        // tau is a fixed point of the p-th power map.
        for x in 0..5i64 {
            let t = teichmuller_residue(5, 3, &BigInt::from(x));
            let m = BigInt::from(125);
            assert_eq!(t.modpow(&BigInt::from(5), &m), t);
        }
    }

    #[test]
    fn iso_examples() {
        let f2 = RingHandle::prime_field(2).unwrap();
        let ctx2 = ctx_over(2, f2.clone(), 2);
        let x = ctx2.from_coords(vec![f2.one(), f2.one()]).unwrap();
        let z4 = RingHandle::integers_mod(4).unwrap();
        assert_eq!(iso_wn_fp(&ctx2, &x).unwrap(), z4.from_int(3));
        assert_eq!(iso_wn_fp_inverse(&ctx2, &z4.from_int(3), 2).unwrap(), x);

        // (1, 0, ..., 0) maps to 1.
        let t = ctx2.teichmuller(&f2.one(), 2);
        assert_eq!(iso_wn_fp(&ctx2, &t).unwrap(), z4.from_int(1));

        let f3 = RingHandle::prime_field(3).unwrap();
        let ctx3 = ctx_over(3, f3.clone(), 2);
        let y = ctx3.from_coords(vec![f3.from_int(2), f3.zero()]).unwrap();
        let z9 = RingHandle::integers_mod(9).unwrap();
        assert_eq!(iso_wn_fp(&ctx3, &y).unwrap(), z9.from_int(8));
        assert_eq!(iso_wn_fp_inverse(&ctx3, &z9.from_int(8), 2).unwrap(), y);
    }

    #[test]
    fn length_mismatch_is_rejected() {
        let z = RingHandle::integers();
        let ctx = ctx_over(2, z.clone(), 3);
        let x = ctx.from_coords(vec![z.from_int(1)]).unwrap();
        let y = ctx.from_coords(vec![z.from_int(1), z.from_int(2)]).unwrap();
        assert!(matches!(
            ctx.add(&x, &y),
            Err(Error::LengthMismatch(1, 2))
        ));
    }

    #[test]
    fn ring_mismatch_is_rejected() {
        let z = RingHandle::integers();
        let z5 = RingHandle::integers_mod(5).unwrap();
        let ctx = ctx_over(2, z, 3);
        let stray = WittVec {
            p: 2,
            coords: vec![z5.from_int(1), z5.from_int(2)],
        };
        let ok = ctx.zero(2);
        assert!(matches!(ctx.add(&ok, &stray), Err(Error::RingMismatch)));
    }

    #[test]
    fn verschiebung_overflow() {
        let z = RingHandle::integers();
        let ctx = ctx_over(2, z, 2);
        let x = ctx.zero(2);
        assert!(matches!(
            ctx.verschiebung(&x),
            Err(Error::LengthOverflow(3, 2))
        ));
    }

    #[test]
    fn witt_vec_json_round_trip() {
        let z = RingHandle::integers();
        let ctx = ctx_over(2, z.clone(), 3);
        let x = ctx
            .from_coords(vec![z.from_int(-7), z.from_int(12), z.from_int(0)])
            .unwrap();
        let j = x.to_json();
        assert_eq!(WittVec::from_json(&z, &j).unwrap(), x);
    }
}
