//! The pullback tower W_n(X) for a module or ring X with endomorphism phi:
//! level n+1 is the pullback of `phi_n: W_n(X) -> X/p^n` against the
//! reduction `X -> X/p^n`, with restriction, splitting, Frobenius and
//! Verschiebung realized as explicit coordinate maps. Concretely a level-n
//! element is its vector of structure-map values `(g_0, ..., g_{n-1})`
//! subject to `g_k = phi(g_{k-1}) mod p^k`, and the splittings identify the
//! level with the direct sum `X + XV + ... + XV^(n-1)`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

use crate::boxprod::ModulePhi;
use crate::error::{Error, Result};
use crate::prng::SplitMix64;
use crate::report::CheckLine;
use crate::ring::{Element, PhiMap, RingHandle};
use crate::witt::WittContext;
use crate::wittpoly::{self, GhostVector};

/// The underlying phi-object: a free Z-module with an integer matrix, or a
/// torsion-free ring with a Frobenius lift.
#[derive(Debug, Clone)]
pub enum TowerBase {
    Module(ModulePhi),
    Ring { ring: RingHandle, phi: PhiMap },
}

/// A scalar of the base: a vector or a ring element.
#[derive(Debug, Clone, PartialEq)]
pub enum TScalar {
    Vec(Vec<BigInt>),
    Elt(Element),
}

impl TowerBase {
    fn zero(&self) -> TScalar {
        match self {
            TowerBase::Module(m) => TScalar::Vec(m.zero_vec()),
            TowerBase::Ring { ring, .. } => TScalar::Elt(ring.zero()),
        }
    }

    fn one(&self) -> Result<TScalar> {
        match self {
            TowerBase::Module(_) => Err(Error::InvalidInput(
                "module-mode tower has no unit".into(),
            )),
            TowerBase::Ring { ring, .. } => Ok(TScalar::Elt(ring.one())),
        }
    }

    fn add(&self, a: &TScalar, b: &TScalar) -> Result<TScalar> {
        match (a, b) {
            (TScalar::Vec(x), TScalar::Vec(y)) if x.len() == y.len() => {
                Ok(TScalar::Vec(crate::boxprod::add_vec(x, y)))
            }
            (TScalar::Elt(x), TScalar::Elt(y)) => Ok(TScalar::Elt(x.add(y)?)),
            _ => Err(Error::Mismatch),
        }
    }

    fn neg(&self, a: &TScalar) -> TScalar {
        match a {
            TScalar::Vec(x) => TScalar::Vec(x.iter().map(|v| -v).collect()),
            TScalar::Elt(x) => TScalar::Elt(x.neg()),
        }
    }

    fn sub(&self, a: &TScalar, b: &TScalar) -> Result<TScalar> {
        self.add(a, &self.neg(b))
    }

    fn mul(&self, a: &TScalar, b: &TScalar) -> Result<TScalar> {
        match (a, b) {
            (TScalar::Elt(x), TScalar::Elt(y)) => Ok(TScalar::Elt(x.mul(y)?)),
            _ => Err(Error::InvalidInput(
                "componentwise product requires ring mode".into(),
            )),
        }
    }

    fn phi(&self, a: &TScalar) -> Result<TScalar> {
        match (self, a) {
            (TowerBase::Module(m), TScalar::Vec(x)) => Ok(TScalar::Vec(m.apply(x)?)),
            (TowerBase::Ring { phi, .. }, TScalar::Elt(x)) => Ok(TScalar::Elt(phi.apply(x)?)),
            _ => Err(Error::Mismatch),
        }
    }

    fn scale(&self, a: &TScalar, k: &BigInt) -> TScalar {
        match a {
            TScalar::Vec(x) => TScalar::Vec(crate::boxprod::scale_vec(x, k)),
            TScalar::Elt(x) => TScalar::Elt(x.scale(k)),
        }
    }

    fn divisible(&self, a: &TScalar, k: &BigInt) -> bool {
        match a {
            TScalar::Vec(x) => x.iter().all(|v| v.is_multiple_of(k)),
            TScalar::Elt(x) => x.divisible_by_int(k),
        }
    }

    fn exact_div(&self, a: &TScalar, k: &BigInt) -> Result<TScalar> {
        match a {
            TScalar::Vec(x) => {
                let mut out = Vec::with_capacity(x.len());
                for v in x {
                    let (q, r) = v.div_rem(k);
                    if !r.is_zero() {
                        return Err(Error::NotDivisible(v.to_string(), k.to_string()));
                    }
                    out.push(q);
                }
                Ok(TScalar::Vec(out))
            }
            TScalar::Elt(x) => Ok(TScalar::Elt(crate::ring::exact_div_int(x, k)?)),
        }
    }

    fn sample(&self, rng: &mut SplitMix64) -> TScalar {
        match self {
            TowerBase::Module(m) => TScalar::Vec(m.sample_vec(rng)),
            TowerBase::Ring { ring, .. } => TScalar::Elt(ring.sample(rng)),
        }
    }

    fn render(&self, a: &TScalar) -> String {
        match a {
            TScalar::Vec(x) => format!(
                "({})",
                x.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(", ")
            ),
            TScalar::Elt(x) => x.to_string(),
        }
    }
}

/// A tower element: the vector of structure-map values `g_0..g_{n-1}` of one
/// level. `g_{k}` is the image under the level-(k+1) structure map `w_{k+1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct TowerElem {
    pub ghosts: Vec<TScalar>,
}

impl TowerElem {
    pub fn level(&self) -> usize {
        self.ghosts.len()
    }
}

/// The tower up to a fixed number of levels.
#[derive(Debug, Clone)]
pub struct TowerModel {
    base: TowerBase,
    p: u64,
    levels: usize,
}

pub fn tower_build(base: TowerBase, p: u64, levels: usize) -> Result<TowerModel> {
    if levels == 0 {
        return Err(Error::InvalidInput("need at least one level".into()));
    }
    if let TowerBase::Ring { ring, .. } = &base {
        if !ring.is_torsion_free() {
            return Err(Error::NotTorsionFree);
        }
    }
    Ok(TowerModel { base, p, levels })
}

impl TowerModel {
    pub fn base(&self) -> &TowerBase {
        &self.base
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    fn check(&self, x: &TowerElem) -> Result<()> {
        if x.ghosts.is_empty() || x.level() > self.levels {
            return Err(Error::Mismatch);
        }
        Ok(())
    }

    /// The pullback condition at every stage: `g_k = phi(g_{k-1}) mod p^k`.
    pub fn admissible(&self, x: &TowerElem) -> Result<bool> {
        self.check(x)?;
        let p_int = BigInt::from(self.p);
        let mut p_pow = BigInt::one();
        for k in 1..x.level() {
            p_pow *= &p_int;
            let expected = self.base.phi(&x.ghosts[k - 1])?;
            let diff = self.base.sub(&x.ghosts[k], &expected)?;
            if !self.base.divisible(&diff, &p_pow) {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Assemble a level element from direct-sum coordinates
    /// `x_0 + V(x_1) + ... + V^(n-1)(x_{n-1})`:
    /// `g_0 = x_0`, `g_k = phi(g_{k-1}) + p^k x_k`.
    pub fn from_sum_coords(&self, coords: &[TScalar]) -> Result<TowerElem> {
        if coords.is_empty() || coords.len() > self.levels {
            return Err(Error::Mismatch);
        }
        let p_int = BigInt::from(self.p);
        let mut ghosts = Vec::with_capacity(coords.len());
        let mut p_pow = BigInt::one();
        for (k, x) in coords.iter().enumerate() {
            let g = if k == 0 {
                x.clone()
            } else {
                p_pow *= &p_int;
                let prev = self.base.phi(&ghosts[k - 1])?;
                self.base.add(&prev, &self.base.scale(x, &p_pow))?
            };
            ghosts.push(g);
        }
        Ok(TowerElem { ghosts })
    }

    /// Recover direct-sum coordinates: `x_0 = g_0`,
    /// `x_k = (g_k - phi(g_{k-1})) / p^k`. Fails precisely on inadmissible
    /// vectors.
    pub fn to_sum_coords(&self, x: &TowerElem) -> Result<Vec<TScalar>> {
        self.check(x)?;
        let p_int = BigInt::from(self.p);
        let mut out = Vec::with_capacity(x.level());
        let mut p_pow = BigInt::one();
        for k in 0..x.level() {
            if k == 0 {
                out.push(x.ghosts[0].clone());
            } else {
                p_pow *= &p_int;
                let prev = self.base.phi(&x.ghosts[k - 1])?;
                let diff = self.base.sub(&x.ghosts[k], &prev)?;
                out.push(self.base.exact_div(&diff, &p_pow)?);
            }
        }
        Ok(out)
    }

    /// Restriction `W_{n+1} -> W_n`: forget the last structure value.
    pub fn restrict(&self, x: &TowerElem) -> Result<TowerElem> {
        self.check(x)?;
        if x.level() < 2 {
            return Err(Error::Mismatch);
        }
        Ok(TowerElem {
            ghosts: x.ghosts[..x.level() - 1].to_vec(),
        })
    }

    /// The splitting `s_n: W_n -> W_{n+1}` induced by phi: append
    /// `phi(g_{n-1})`.
    pub fn split(&self, x: &TowerElem) -> Result<TowerElem> {
        self.check(x)?;
        if x.level() + 1 > self.levels {
            return Err(Error::LengthOverflow(x.level() + 1, self.levels));
        }
        let mut ghosts = x.ghosts.clone();
        ghosts.push(self.base.phi(&x.ghosts[x.level() - 1])?);
        Ok(TowerElem { ghosts })
    }

    /// Verschiebung `W_n -> W_{n+1}`: `(0, p g_0, ..., p g_{n-1})`.
    pub fn versch(&self, x: &TowerElem) -> Result<TowerElem> {
        self.check(x)?;
        if x.level() + 1 > self.levels {
            return Err(Error::LengthOverflow(x.level() + 1, self.levels));
        }
        let p_int = BigInt::from(self.p);
        let mut ghosts = Vec::with_capacity(x.level() + 1);
        ghosts.push(self.base.zero());
        for g in &x.ghosts {
            ghosts.push(self.base.scale(g, &p_int));
        }
        Ok(TowerElem { ghosts })
    }

    /// Frobenius `W_{n+1} -> W_n`: drop the first structure value.
    pub fn frob(&self, x: &TowerElem) -> Result<TowerElem> {
        self.check(x)?;
        if x.level() < 2 {
            return Err(Error::Mismatch);
        }
        Ok(TowerElem {
            ghosts: x.ghosts[1..].to_vec(),
        })
    }

    /// The structure map `w_n: W_n -> X`: the last value.
    pub fn w_map(&self, x: &TowerElem) -> Result<TScalar> {
        self.check(x)?;
        Ok(x.ghosts[x.level() - 1].clone())
    }

    /// `phi_n: W_n -> X/p^n` represented by a lift; callers compare mod p^n.
    pub fn phi_level(&self, x: &TowerElem) -> Result<TScalar> {
        self.check(x)?;
        self.base.phi(&x.ghosts[x.level() - 1])
    }

    pub fn add(&self, x: &TowerElem, y: &TowerElem) -> Result<TowerElem> {
        self.check(x)?;
        self.check(y)?;
        if x.level() != y.level() {
            return Err(Error::LengthMismatch(x.level(), y.level()));
        }
        let ghosts = x
            .ghosts
            .iter()
            .zip(&y.ghosts)
            .map(|(a, b)| self.base.add(a, b))
            .collect::<Result<_>>()?;
        Ok(TowerElem { ghosts })
    }

    pub fn neg(&self, x: &TowerElem) -> Result<TowerElem> {
        self.check(x)?;
        Ok(TowerElem {
            ghosts: x.ghosts.iter().map(|g| self.base.neg(g)).collect(),
        })
    }

    /// Componentwise product (ring mode): the pullback levels are subrings.
    pub fn mul(&self, x: &TowerElem, y: &TowerElem) -> Result<TowerElem> {
        self.check(x)?;
        self.check(y)?;
        if x.level() != y.level() {
            return Err(Error::LengthMismatch(x.level(), y.level()));
        }
        let ghosts = x
            .ghosts
            .iter()
            .zip(&y.ghosts)
            .map(|(a, b)| self.base.mul(a, b))
            .collect::<Result<_>>()?;
        Ok(TowerElem { ghosts })
    }

    pub fn one(&self, level: usize) -> Result<TowerElem> {
        let one = self.base.one()?;
        Ok(TowerElem {
            ghosts: vec![one; level],
        })
    }

    pub fn sample(&self, level: usize, rng: &mut SplitMix64) -> Result<TowerElem> {
        let coords: Vec<TScalar> = (0..level).map(|_| self.base.sample(rng)).collect();
        self.from_sum_coords(&coords)
    }

    pub fn render(&self, x: &TowerElem) -> String {
        format!(
            "[{}]",
            x.ghosts
                .iter()
                .map(|g| self.base.render(g))
                .collect::<Vec<_>>()
                .join("; ")
        )
    }
}

// ---------------------------------------------------------------------------
// Tower-level invariants and the comparison with Witt vectors
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, serde::Serialize)]
pub struct TowerReport {
    pub levels: usize,
    pub checks: Vec<CheckLine>,
}

impl TowerReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

/// Verify the defining diagrams on samples, one report line per level:
/// `R . s = id`, `F . V = p`, the pullback condition, V additivity, and
/// (ring mode) closure of the level under products with multiplicativity of
/// the level map `phi_n` modulo p^n.
pub fn tower_self_check(model: &TowerModel, samples: usize, seed: u64) -> Result<TowerReport> {
    let mut rng = SplitMix64::new(seed);
    let p_int = BigInt::from(model.p());
    let ring_mode = matches!(model.base(), TowerBase::Ring { .. });
    let mut checks = Vec::new();
    for level in 1..model.levels() {
        let mut witness: Option<String> = None;
        for _ in 0..samples {
            let x = model.sample(level, &mut rng)?;
            let y = model.sample(level, &mut rng)?;
            if !model.admissible(&x)? {
                witness.get_or_insert(format!("sample {} inadmissible", model.render(&x)));
                break;
            }
            let s = model.split(&x)?;
            if !model.admissible(&s)? {
                witness.get_or_insert(format!("split of {} inadmissible", model.render(&x)));
                break;
            }
            if model.restrict(&s)? != x {
                witness.get_or_insert(format!("R(s(x)) != x at {}", model.render(&x)));
                break;
            }
            let v = model.versch(&x)?;
            if !model.admissible(&v)? {
                witness.get_or_insert(format!("V of {} inadmissible", model.render(&x)));
                break;
            }
            let fv = model.frob(&v)?;
            let px = TowerElem {
                ghosts: x.ghosts.iter().map(|g| model.base.scale(g, &p_int)).collect(),
            };
            if fv != px {
                witness.get_or_insert(format!("F(V(x)) != p x at {}", model.render(&x)));
                break;
            }
            let v_sum = model.versch(&model.add(&x, &y)?)?;
            let sum_v = model.add(&model.versch(&x)?, &model.versch(&y)?)?;
            if v_sum != sum_v {
                witness.get_or_insert(format!(
                    "V not additive at {}, {}",
                    model.render(&x),
                    model.render(&y)
                ));
                break;
            }
            if ring_mode {
                let xy = model.mul(&x, &y)?;
                if !model.admissible(&xy)? {
                    witness.get_or_insert(format!(
                        "product of admissibles inadmissible at {}, {}",
                        model.render(&x),
                        model.render(&y)
                    ));
                    break;
                }
                // phi_n is multiplicative modulo p^n.
                let p_pow = p_int.pow(level as u32);
                let lhs = model.phi_level(&xy)?;
                let rhs = model
                    .base
                    .mul(&model.phi_level(&x)?, &model.phi_level(&y)?)?;
                if !model.base.divisible(&model.base.sub(&lhs, &rhs)?, &p_pow) {
                    witness.get_or_insert(format!(
                        "phi_{level} not multiplicative mod p^{level} at {}",
                        model.render(&x)
                    ));
                    break;
                }
            }
        }
        checks.push(CheckLine {
            name: format!("level_{}_diagrams", level + 1),
            pass: witness.is_none(),
            witness,
        });
    }
    Ok(TowerReport {
        levels: model.levels(),
        checks,
    })
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct TowerWittReport {
    pub p: u64,
    pub levels: usize,
    pub checks: Vec<CheckLine>,
}

impl TowerWittReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn into_result(self) -> Result<TowerWittReport> {
        if let Some(bad) = self.checks.iter().find(|c| !c.pass) {
            return Err(Error::IsoFailure(format!(
                "{}: {}",
                bad.name,
                bad.witness.clone().unwrap_or_default()
            )));
        }
        Ok(self)
    }
}

/// Compare the tower with genuine Witt vectors over a torsion-free ring with
/// Frobenius lift: both ghost images are exactly the Dwork-admissible
/// vectors, and the ring operations correspond componentwise in ghost
/// coordinates.
pub fn tower_vs_witt(
    ctx: &WittContext,
    phi: &PhiMap,
    n: usize,
    samples: usize,
    seed: u64,
) -> Result<TowerWittReport> {
    let ring = ctx.ring().clone();
    if !ring.is_torsion_free() {
        return Err(Error::NotTorsionFree);
    }
    let p = ctx.p();
    let mut rng = SplitMix64::new(seed);
    let model = tower_build(
        TowerBase::Ring {
            ring: ring.clone(),
            phi: phi.clone(),
        },
        p,
        n,
    )?;
    let mut checks = Vec::new();

    // 1. Symbolically, the ghost vector of generic Witt coordinates passes
    //    the Dwork congruence; hence the Witt ghost image is admissible over
    //    every coefficient ring.
    {
        let names: Vec<String> = (0..n).map(|i| format!("a{i}")).collect();
        let sym_ring = RingHandle::poly_over_named(RingHandle::integers(), names)?;
        let coords: Vec<Element> = (0..n)
            .map(|i| sym_ring.var_by_index(i))
            .collect::<Result<_>>()?;
        let g = wittpoly::ghost(p, &coords)?;
        let sym_phi = PhiMap::power_lift(&sym_ring, p)?;
        let pass = wittpoly::dwork_check(&g, &sym_phi, &mut rng)?;
        checks.push(CheckLine {
            name: "witt_ghosts_symbolically_admissible".into(),
            pass,
            witness: (!pass).then(|| "symbolic Dwork congruence failed".into()),
        });
    }

    // 2. Every admissible vector is a Witt ghost image: tower elements (which
    //    realize admissibility by construction) unghost integrally.
    {
        let mut witness = None;
        for _ in 0..samples {
            for level in 1..=n {
                let t = model.sample(level, &mut rng)?;
                let components: Vec<Element> = t
                    .ghosts
                    .iter()
                    .map(|g| match g {
                        TScalar::Elt(e) => e.clone(),
                        TScalar::Vec(_) => unreachable!("ring mode"),
                    })
                    .collect();
                let gv = GhostVector::new(p, components)?;
                match ctx.from_ghost(&gv) {
                    Ok(w) => {
                        if ctx.ghost(&w)?.components != gv.components {
                            witness.get_or_insert(format!(
                                "ghost(unghost) differs at {}",
                                model.render(&t)
                            ));
                        }
                    }
                    Err(e) => {
                        witness.get_or_insert(format!(
                            "tower element {} does not unghost: {e}",
                            model.render(&t)
                        ));
                    }
                }
            }
        }
        checks.push(CheckLine {
            name: "admissible_vectors_unghost_integrally".into(),
            pass: witness.is_none(),
            witness,
        });
    }

    // 3. Ring operations correspond: the ghost map takes Witt operations to
    //    the tower's componentwise operations.
    {
        let mut witness = None;
        for _ in 0..samples {
            let x = ctx.sample(n, &mut rng);
            let y = ctx.sample(n, &mut rng);
            let gx = TowerElem {
                ghosts: ctx.ghost(&x)?.components.into_iter().map(TScalar::Elt).collect(),
            };
            let gy = TowerElem {
                ghosts: ctx.ghost(&y)?.components.into_iter().map(TScalar::Elt).collect(),
            };
            let sum_ghost = TowerElem {
                ghosts: ctx
                    .ghost(&ctx.add(&x, &y)?)?
                    .components
                    .into_iter()
                    .map(TScalar::Elt)
                    .collect(),
            };
            let prod_ghost = TowerElem {
                ghosts: ctx
                    .ghost(&ctx.mul(&x, &y)?)?
                    .components
                    .into_iter()
                    .map(TScalar::Elt)
                    .collect(),
            };
            if model.add(&gx, &gy)? != sum_ghost {
                witness.get_or_insert("ghost of sum is not componentwise sum".to_string());
            }
            if model.mul(&gx, &gy)? != prod_ghost {
                witness.get_or_insert("ghost of product is not componentwise product".to_string());
            }
        }
        checks.push(CheckLine {
            name: "operations_correspond_under_ghost".into(),
            pass: witness.is_none(),
            witness,
        });
    }

    // 4. For the integers, exhaust the Dwork set modulo p^n: every
    //    admissible residue tuple lifts to a genuine Witt vector.
    if ring == RingHandle::integers() && matches!(phi, PhiMap::Identity) {
        let mut witness = None;
        let p_big = BigInt::from(p);
        let modulus = p_big.pow(n as u32);
        let mut stack: Vec<Vec<BigInt>> = (0..p.pow(n as u32))
            .map(|g0| vec![BigInt::from(g0)])
            .collect();
        while let Some(tuple) = stack.pop() {
            let k = tuple.len();
            if k == n {
                let coords: Vec<Element> = tuple
                    .iter()
                    .map(|g| ring.from_bigint(g))
                    .collect();
                let gv = GhostVector::new(p, coords)?;
                if let Err(e) = ctx.from_ghost(&gv) {
                    witness.get_or_insert(format!("admissible tuple {tuple:?} rejected: {e}"));
                    break;
                }
                continue;
            }
            // g_k = g_{k-1} mod p^k, lifted freely modulo p^n.
            let p_k = p_big.pow(k as u32);
            let step_count = (&modulus / &p_k)
                .to_string()
                .parse::<u64>()
                .expect("small");
            let base_val = tuple[k - 1].mod_floor(&p_k);
            for t in 0..step_count {
                let mut next = tuple.clone();
                next.push(&base_val + &p_k * BigInt::from(t));
                stack.push(next);
            }
        }
        checks.push(CheckLine {
            name: "dwork_set_enumeration_mod_p_n".into(),
            pass: witness.is_none(),
            witness,
        });
    }

    TowerWittReport {
        p,
        levels: n,
        checks,
    }
    .into_result()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z_tower(p: u64, levels: usize) -> TowerModel {
        tower_build(
            TowerBase::Ring {
                ring: RingHandle::integers(),
                phi: PhiMap::Identity,
            },
            p,
            levels,
        )
        .unwrap()
    }

    #[test]
    fn level_two_over_z_at_p2() {
        // Level 2 = {(x, w) : x = w mod 2}; V(1) has (x, w) = (2, 0) and
        // s(1) = (1, 1).
        let model = z_tower(2, 3);
        let z = RingHandle::integers();
        let one = TowerElem {
            ghosts: vec![TScalar::Elt(z.one())],
        };
        let v1 = model.versch(&one).unwrap();
        assert_eq!(
            v1.ghosts,
            vec![TScalar::Elt(z.zero()), TScalar::Elt(z.from_int(2))]
        );
        assert!(model.admissible(&v1).unwrap());
        let s1 = model.split(&one).unwrap();
        assert_eq!(
            s1.ghosts,
            vec![TScalar::Elt(z.one()), TScalar::Elt(z.one())]
        );
        // (x, w) = (3, 0) violates x = w mod 2.
        let bad = TowerElem {
            ghosts: vec![TScalar::Elt(z.zero()), TScalar::Elt(z.from_int(3))],
        };
        assert!(!model.admissible(&bad).unwrap());
    }

    #[test]
    fn self_check_ring_mode() {
        for p in [2u64, 3] {
            let model = z_tower(p, 4);
            let report = tower_self_check(&model, 10, 77).unwrap();
            assert!(report.all_pass(), "{report:?}");
        }
    }

    #[test]
    fn self_check_module_mode() {
        let mut rng = SplitMix64::new(5);
        for _ in 0..3 {
            let matrix: Vec<Vec<BigInt>> = (0..2)
                .map(|_| (0..2).map(|_| BigInt::from(rng.signed(5))).collect())
                .collect();
            let model = tower_build(
                TowerBase::Module(ModulePhi::new(2, matrix).unwrap()),
                2,
                4,
            )
            .unwrap();
            let report = tower_self_check(&model, 8, 78).unwrap();
            assert!(report.all_pass(), "{report:?}");
        }
    }

    #[test]
    fn sum_coords_round_trip() {
        let model = z_tower(2, 4);
        let mut rng = SplitMix64::new(6);
        for _ in 0..20 {
            let x = model.sample(4, &mut rng).unwrap();
            let coords = model.to_sum_coords(&x).unwrap();
            assert_eq!(model.from_sum_coords(&coords).unwrap(), x);
        }
    }

    #[test]
    fn w_map_factors_through_frobenii() {
        // w_{n} = F_1 . ... . F_{n-1} composed with w_1 = id.
        let model = z_tower(3, 4);
        let mut rng = SplitMix64::new(7);
        let x = model.sample(4, &mut rng).unwrap();
        let mut y = x.clone();
        while y.level() > 1 {
            y = model.frob(&y).unwrap();
        }
        assert_eq!(vec![model.w_map(&x).unwrap()], y.ghosts);
    }

    #[test]
    fn module_mode_rejects_products() {
        let model = tower_build(
            TowerBase::Module(ModulePhi::identity(2).unwrap()),
            2,
            3,
        )
        .unwrap();
        let mut rng = SplitMix64::new(8);
        let x = model.sample(2, &mut rng).unwrap();
        assert!(model.mul(&x, &x).is_err());
    }

    #[test]
    fn tower_vs_witt_over_z() {
        let ctx = WittContext::new(2, RingHandle::integers(), 3).unwrap();
        let report = tower_vs_witt(&ctx, &PhiMap::Identity, 3, 10, 99).unwrap();
        assert!(report.all_pass());
    }

    #[test]
    fn tower_vs_witt_at_level_one_is_trivial() {
        // Both sides are A itself.
        let ctx = WittContext::new(2, RingHandle::integers(), 1).unwrap();
        let report = tower_vs_witt(&ctx, &PhiMap::Identity, 1, 5, 3).unwrap();
        assert!(report.all_pass());
    }

    #[test]
    fn tower_vs_witt_over_poly() {
        let ring = RingHandle::poly_over(RingHandle::integers(), &["x"]).unwrap();
        let phi = PhiMap::power_lift(&ring, 2).unwrap();
        let ctx = WittContext::new(2, ring, 2).unwrap();
        let report = tower_vs_witt(&ctx, &phi, 2, 10, 100).unwrap();
        assert!(report.all_pass());
    }
}
