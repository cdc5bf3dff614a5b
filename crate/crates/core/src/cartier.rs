//! The free Cartier ring A[V] on a ring with endomorphism, at finite
//! V-precision: elements are sums `sum_{i<N} V^i(a_i)` with the shift
//! Verschiebung, the Frobenius `F(sum V^n a_n) = phi(a_0) + p sum V^n a_{n+1}`,
//! the multiplication law `V^i(x) V^j(y) = p^j V^i(x phi^(i-j)(y))` for
//! `i >= j`, and the delta-operation `delta(V^n a) = V^(n-1) a -
//! p^((p-1)n-1) V^n(a^p)` on torsion-free delta-ring coefficients.

use num_bigint::{BigInt, BigUint};

use crate::delta::{sum_rule_coefficients, DeltaCarrier, DeltaStructure};
use crate::error::{Error, Result};
use crate::prng::SplitMix64;
use crate::ring::{Element, PhiMap, RingHandle};

/// The fixed associative presentation every structure in this module is a
/// module over: two generators F and V subject to the single relation
/// `F V = p`. Instances never materialize the ring; the relation is
/// enforced by construction and certified by the suites.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CartierPresentation {
    pub p: u64,
}

impl CartierPresentation {
    pub const GENERATORS: [&'static str; 2] = ["F", "V"];

    pub fn relation(&self) -> String {
        format!("F*V = {}", self.p)
    }
}

/// A ring together with a validated endomorphism.
#[derive(Debug, Clone)]
pub struct PhiRing {
    ring: RingHandle,
    phi: PhiMap,
}

impl PhiRing {
    /// Wrap a ring with an endomorphism, spot-checking that `phi` fixes one
    /// and respects addition and multiplication on samples.
    pub fn new(ring: RingHandle, phi: PhiMap) -> Result<Self> {
        let mut rng = SplitMix64::new(0x9_e3779b9);
        if phi.apply(&ring.one())? != ring.one() {
            return Err(Error::NotRingHom("phi(1) != 1".into()));
        }
        // Delta-derived maps are only total below the truncation order, so
        // sample through the structure's own sampler.
        let draw = |rng: &mut SplitMix64| -> Result<Element> {
            match &phi {
                PhiMap::FromDelta(ds) => DeltaCarrier::sample(ds.as_ref(), rng),
                _ => Ok(ring.sample(rng)),
            }
        };
        for _ in 0..12 {
            let x = draw(&mut rng)?;
            let y = draw(&mut rng)?;
            let fx = phi.apply(&x)?;
            let fy = phi.apply(&y)?;
            if phi.apply(&x.add(&y)?)? != fx.add(&fy)? {
                return Err(Error::NotRingHom(format!("additivity fails at {x}, {y}")));
            }
            if phi.apply(&x.mul(&y)?)? != fx.mul(&fy)? {
                return Err(Error::NotRingHom(format!(
                    "multiplicativity fails at {x}, {y}"
                )));
            }
        }
        Ok(PhiRing { ring, phi })
    }

    pub fn ring(&self) -> &RingHandle {
        &self.ring
    }

    pub fn phi(&self) -> &PhiMap {
        &self.phi
    }

    pub fn apply(&self, x: &Element) -> Result<Element> {
        self.phi.apply(x)
    }

    pub fn apply_iter(&self, x: &Element, times: usize) -> Result<Element> {
        self.phi.apply_iter(x, times)
    }
}

/// How to treat coefficients pushed past the precision window.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    /// Losing a nonzero coefficient is an error. Needed for the delta-Cartier
    /// identities, which are exact statements.
    Exact,
    /// Coefficients beyond `V^(N-1)` are dropped: the quotient `A[[V]]/V^N`.
    Complete,
}

impl Mode {
    pub fn as_str(&self) -> &'static str {
        match self {
            Mode::Exact => "exact",
            Mode::Complete => "complete",
        }
    }

    pub fn parse(s: &str) -> Result<Mode> {
        match s {
            "exact" => Ok(Mode::Exact),
            "complete" => Ok(Mode::Complete),
            _ => Err(Error::InvalidInput(format!("unknown mode `{s}`"))),
        }
    }
}

/// A V-truncated element `sum_{i<N} V^i(a_i)`; equality is componentwise.
#[derive(Debug, Clone, PartialEq)]
pub struct CartierElt {
    pub coeffs: Vec<Element>,
}

impl CartierElt {
    /// Highest index with a nonzero coefficient.
    pub fn v_support(&self) -> Option<usize> {
        self.coeffs.iter().rposition(|c| !c.is_zero())
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| c.is_zero())
    }

    /// `true` when the element lies in `A` (no V-part).
    pub fn in_base(&self) -> bool {
        self.v_support().is_none_or(|s| s == 0)
    }
}

/// The ambient space `A[V]` at a fixed precision and overflow mode;
/// optionally carries a delta-structure on A for the delta-Cartier
/// operation.
#[derive(Debug, Clone)]
pub struct CartierSpace {
    phi_ring: PhiRing,
    p: u64,
    precision: usize,
    mode: Mode,
    delta: Option<DeltaStructure>,
}

impl CartierSpace {
    pub fn new(phi_ring: PhiRing, p: u64, precision: usize, mode: Mode) -> Result<Self> {
        if precision == 0 {
            return Err(Error::InvalidInput("precision must be at least 1".into()));
        }
        Ok(CartierSpace {
            phi_ring,
            p,
            precision,
            mode,
            delta: None,
        })
    }

    /// Attach a delta-structure whose ring and phi agree with the space's.
    pub fn with_delta(mut self, delta: DeltaStructure) -> Result<Self> {
        if delta.ring() != self.ring() || delta.prime() != self.p {
            return Err(Error::RingMismatch);
        }
        self.delta = Some(delta);
        Ok(self)
    }

    pub fn phi_ring(&self) -> &PhiRing {
        &self.phi_ring
    }

    pub fn ring(&self) -> &RingHandle {
        self.phi_ring.ring()
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn precision(&self) -> usize {
        self.precision
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn delta_structure(&self) -> Option<&DeltaStructure> {
        self.delta.as_ref()
    }

    fn check(&self, u: &CartierElt) -> Result<()> {
        if u.coeffs.len() != self.precision {
            return Err(Error::Mismatch);
        }
        if u.coeffs.iter().any(|c| c.ring() != self.ring()) {
            return Err(Error::Mismatch);
        }
        Ok(())
    }

    pub fn zero(&self) -> CartierElt {
        CartierElt {
            coeffs: vec![self.ring().zero(); self.precision],
        }
    }

    pub fn one(&self) -> CartierElt {
        self.embed(&self.ring().one()).expect("one embeds")
    }

    /// `a` as the V^0 term.
    pub fn embed(&self, a: &Element) -> Result<CartierElt> {
        self.v_term(a, 0)
    }

    /// `V^i(a)`.
    pub fn v_term(&self, a: &Element, i: usize) -> Result<CartierElt> {
        if a.ring() != self.ring() {
            return Err(Error::Mismatch);
        }
        if i >= self.precision {
            return Err(Error::PrecisionOverflow(self.precision));
        }
        let mut u = self.zero();
        u.coeffs[i] = a.clone();
        Ok(u)
    }

    pub fn from_coeffs(&self, coeffs: Vec<Element>) -> Result<CartierElt> {
        let u = CartierElt { coeffs };
        self.check(&u)?;
        Ok(u)
    }

    pub fn add(&self, u: &CartierElt, v: &CartierElt) -> Result<CartierElt> {
        self.check(u)?;
        self.check(v)?;
        let coeffs = u
            .coeffs
            .iter()
            .zip(&v.coeffs)
            .map(|(a, b)| a.add(b))
            .collect::<Result<_>>()?;
        Ok(CartierElt { coeffs })
    }

    pub fn neg(&self, u: &CartierElt) -> Result<CartierElt> {
        self.check(u)?;
        Ok(CartierElt {
            coeffs: u.coeffs.iter().map(|c| c.neg()).collect(),
        })
    }

    pub fn sub(&self, u: &CartierElt, v: &CartierElt) -> Result<CartierElt> {
        self.add(u, &self.neg(v)?)
    }

    pub fn scale_int(&self, u: &CartierElt, k: &BigInt) -> Result<CartierElt> {
        self.check(u)?;
        Ok(CartierElt {
            coeffs: u.coeffs.iter().map(|c| c.scale(k)).collect(),
        })
    }

    /// Table of iterated phi values: `row[i][t] = phi^t(coeffs[i])` for
    /// every twist `t` the multiplication law can demand of slot i.
    fn phi_table(&self, u: &CartierElt) -> Result<Vec<Vec<Element>>> {
        u.coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let max_t = self.precision - 1 - i;
                let mut row = Vec::with_capacity(max_t + 1);
                row.push(c.clone());
                if !c.is_zero() {
                    for t in 0..max_t {
                        let next = self.phi_ring.apply(&row[t])?;
                        row.push(next);
                    }
                }
                Ok(row)
            })
            .collect()
    }

    /// The multiplication law, extended bilinearly:
    /// `V^i(x) V^j(y) = p^j V^i(x phi^(i-j)(y))` for `i >= j`, symmetric
    /// otherwise. Product terms stay within the precision window.
    pub fn mul(&self, u: &CartierElt, v: &CartierElt) -> Result<CartierElt> {
        self.check(u)?;
        self.check(v)?;
        let u_twists = self.phi_table(u)?;
        let v_twists = self.phi_table(v)?;
        let mut out = self.zero();
        for (i, x) in u.coeffs.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in v.coeffs.iter().enumerate() {
                if y.is_zero() {
                    continue;
                }
                let twisted = if i >= j {
                    x.mul(&v_twists[j][i - j])?
                } else {
                    u_twists[i][j - i].mul(y)?
                };
                let p_pow = BigInt::from(self.p).pow(i.min(j) as u32);
                out.coeffs[i.max(j)] = out.coeffs[i.max(j)].add(&twisted.scale(&p_pow))?;
            }
        }
        Ok(out)
    }

    pub fn pow(&self, u: &CartierElt, e: u64) -> Result<CartierElt> {
        if e == 0 {
            return Ok(self.one());
        }
        let mut acc = u.clone();
        for _ in 1..e {
            acc = self.mul(&acc, u)?;
        }
        Ok(acc)
    }

    /// `F(sum V^n a_n) = phi(a_0) + p * sum_n V^n(a_{n+1})`.
    pub fn frobenius(&self, u: &CartierElt) -> Result<CartierElt> {
        self.check(u)?;
        let p_int = BigInt::from(self.p);
        let mut coeffs = Vec::with_capacity(self.precision);
        let mut head = self.phi_ring.apply(&u.coeffs[0])?;
        if self.precision > 1 {
            head = head.add(&u.coeffs[1].scale(&p_int))?;
        }
        coeffs.push(head);
        for n in 1..self.precision {
            if n + 1 < self.precision {
                coeffs.push(u.coeffs[n + 1].scale(&p_int));
            } else {
                coeffs.push(self.ring().zero());
            }
        }
        Ok(CartierElt { coeffs })
    }

    /// The shift. In exact mode, losing a nonzero top coefficient is an
    /// error; in complete mode it is dropped.
    pub fn verschiebung(&self, u: &CartierElt) -> Result<CartierElt> {
        self.check(u)?;
        let top = &u.coeffs[self.precision - 1];
        if !top.is_zero() && self.mode == Mode::Exact {
            return Err(Error::PrecisionOverflow(self.precision));
        }
        let mut coeffs = Vec::with_capacity(self.precision);
        coeffs.push(self.ring().zero());
        coeffs.extend_from_slice(&u.coeffs[..self.precision - 1]);
        Ok(CartierElt { coeffs })
    }

    /// The quotient map `A[V] -> A`, a ring homomorphism.
    pub fn mod_v(&self, u: &CartierElt) -> Result<Element> {
        self.check(u)?;
        Ok(u.coeffs[0].clone())
    }

    /// The delta-Cartier operation: on a single term,
    /// `delta(V^n(a)) = V^(n-1)(a) - p^((p-1)n - 1) V^n(a^p)` for `n >= 1`
    /// and the base delta for `n = 0`; extended to sums by the delta-ring
    /// sum rule (left fold, order-independent).
    pub fn delta(&self, u: &CartierElt) -> Result<CartierElt> {
        self.check(u)?;
        let ds = self
            .delta
            .as_ref()
            .ok_or_else(|| Error::InvalidInput("no delta-structure attached".into()))?;
        if self.mode != Mode::Exact {
            // The delta-Cartier identities are exact statements; silently
            // truncated coefficients would falsify them.
            return Err(Error::InvalidInput(
                "the delta-operation requires exact mode".into(),
            ));
        }
        if !self.ring().is_torsion_free() {
            return Err(Error::NotTorsionFree);
        }
        let coeffs = sum_rule_coefficients(self.p);
        let mut acc: Option<(CartierElt, CartierElt)> = None; // (partial sum, its delta)
        for (n, a) in u.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            let term = self.v_term(a, n)?;
            let delta_term = self.delta_of_term(ds, a, n)?;
            acc = Some(match acc {
                None => (term, delta_term),
                Some((s, d_s)) => {
                    let mix = self.sum_rule_mix(&s, &term, &coeffs)?;
                    let d_new = self.add(&self.add(&d_s, &delta_term)?, &mix)?;
                    (self.add(&s, &term)?, d_new)
                }
            });
        }
        Ok(acc.map(|(_, d)| d).unwrap_or_else(|| self.zero()))
    }

    fn delta_of_term(&self, ds: &DeltaStructure, a: &Element, n: usize) -> Result<CartierElt> {
        if n == 0 {
            return self.embed(&ds.delta(a)?);
        }
        let lower = self.v_term(a, n - 1)?;
        let exp = (self.p - 1) * n as u64 - 1;
        let p_pow = BigInt::from(self.p).pow(exp as u32);
        let upper = self.v_term(&a.pow(self.p), n)?;
        self.sub(&lower, &self.scale_int(&upper, &p_pow)?)
    }

    /// `(x^p + y^p - (x+y)^p)/p` inside A[V], via its integer coefficients.
    fn sum_rule_mix(
        &self,
        x: &CartierElt,
        y: &CartierElt,
        coeffs: &[BigInt],
    ) -> Result<CartierElt> {
        let mut acc = self.zero();
        let p = self.p;
        for (i, c) in coeffs.iter().enumerate() {
            let xi = self.pow(x, i as u64 + 1)?;
            let ypi = self.pow(y, p - 1 - i as u64)?;
            acc = self.add(&acc, &self.scale_int(&self.mul(&xi, &ypi)?, c)?)?;
        }
        Ok(acc)
    }

    pub fn sample(&self, rng: &mut SplitMix64) -> Result<CartierElt> {
        let draw = |rng: &mut SplitMix64| match &self.delta {
            Some(ds) => DeltaCarrier::sample(ds, rng),
            None => Ok(self.ring().sample(rng)),
        };
        if self.ring().vars().is_empty() {
            let coeffs = (0..self.precision)
                .map(|_| draw(rng))
                .collect::<Result<_>>()?;
            return Ok(CartierElt { coeffs });
        }
        // Polynomial coefficients: keep the V-support sparse, since the
        // multiplication law iterates phi once per unit of support spread
        // and each iterate raises polynomial sizes to the p-th power.
        let mut u = self.zero();
        let slots = 1 + rng.below(3.min(self.precision as u64)) as usize;
        for _ in 0..slots {
            let i = rng.below(self.precision as u64) as usize;
            u.coeffs[i] = draw(rng)?;
        }
        Ok(u)
    }

    pub fn elt_to_json(&self, u: &CartierElt) -> serde_json::Value {
        serde_json::json!({
            "p": self.p,
            "precision": self.precision,
            "mode": self.mode.as_str(),
            "coeffs": u.coeffs.iter().map(|c| c.to_json()).collect::<Vec<_>>(),
        })
    }

    pub fn elt_from_json(&self, v: &serde_json::Value) -> Result<CartierElt> {
        let p = v.get("p").and_then(|x| x.as_u64());
        let precision = v.get("precision").and_then(|x| x.as_u64());
        if p != Some(self.p) || precision != Some(self.precision as u64) {
            return Err(Error::Mismatch);
        }
        let coeffs = v
            .get("coeffs")
            .and_then(|x| x.as_array())
            .ok_or_else(|| Error::InvalidInput("missing coeffs".into()))?
            .iter()
            .map(|c| Element::from_json(self.ring(), c))
            .collect::<Result<Vec<_>>>()?;
        self.from_coeffs(coeffs)
    }

    pub fn render(&self, u: &CartierElt) -> String {
        let mut parts = Vec::new();
        for (i, c) in u.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if i == 0 {
                parts.push(format!("{c}"));
            } else if i == 1 {
                parts.push(format!("V({c})"));
            } else {
                parts.push(format!("V^{i}({c})"));
            }
        }
        if parts.is_empty() {
            "0".to_string()
        } else {
            parts.join(" + ")
        }
    }
}

/// Delta-carrier over `A[V]` so the generic axiom checker applies verbatim.
pub struct CartierDeltaCarrier<'a> {
    pub space: &'a CartierSpace,
}

impl DeltaCarrier for CartierDeltaCarrier<'_> {
    type Item = CartierElt;

    fn prime(&self) -> u64 {
        self.space.p()
    }
    fn zero(&self) -> CartierElt {
        self.space.zero()
    }
    fn one(&self) -> CartierElt {
        self.space.one()
    }
    fn add(&self, a: &CartierElt, b: &CartierElt) -> Result<CartierElt> {
        self.space.add(a, b)
    }
    fn mul(&self, a: &CartierElt, b: &CartierElt) -> Result<CartierElt> {
        self.space.mul(a, b)
    }
    fn scale_int(&self, a: &CartierElt, k: &BigInt) -> Result<CartierElt> {
        self.space.scale_int(a, k)
    }
    fn delta(&self, a: &CartierElt) -> Result<CartierElt> {
        self.space.delta(a)
    }
    fn sample(&self, rng: &mut SplitMix64) -> Result<CartierElt> {
        self.space.sample(rng)
    }
    fn render(&self, a: &CartierElt) -> String {
        self.space.render(a)
    }
}

// ---------------------------------------------------------------------------
// Perfection in characteristic p
// ---------------------------------------------------------------------------

/// A colimit-stage representative of the perfection
/// `A_perf = colim(A -> A -> ...)` along phi: the pair `(element, stage)`,
/// with `(a, k) ~ (phi(a), k+1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PerfectionStage {
    pub elt: Element,
    pub stage: u32,
}

/// Wrap an element of a characteristic-p ring as a colimit-stage
/// representative.
pub fn perfection_stage(phi_ring: &PhiRing, p: u64, elt: Element, stage: u32) -> Result<PerfectionStage> {
    if *phi_ring.ring().characteristic() != BigUint::from(p) {
        return Err(Error::NotCharP(p));
    }
    if elt.ring() != phi_ring.ring() {
        return Err(Error::RingMismatch);
    }
    Ok(PerfectionStage { elt, stage })
}

impl PerfectionStage {
    /// Move one colimit stage up along the transition map.
    pub fn transition(&self, phi_ring: &PhiRing) -> Result<PerfectionStage> {
        Ok(PerfectionStage {
            elt: phi_ring.apply(&self.elt)?,
            stage: self.stage + 1,
        })
    }

    /// Two representatives are the same colimit element iff they agree after
    /// moving to a common stage.
    pub fn same_colimit_elt(&self, other: &PerfectionStage, phi_ring: &PhiRing) -> Result<bool> {
        let target = self.stage.max(other.stage);
        let a = phi_ring.apply_iter(&self.elt, (target - self.stage) as usize)?;
        let b = phi_ring.apply_iter(&other.elt, (target - other.stage) as usize)?;
        Ok(a == b)
    }
}

/// Is Frobenius bijective here? Any endomorphism of F_p fixes it pointwise,
/// so prime fields (with the p-power or identity map) are perfect;
/// polynomial rings in characteristic p are not.
pub fn is_perfect(phi_ring: &PhiRing, p: u64) -> bool {
    *phi_ring.ring().characteristic() == BigUint::from(p) && phi_ring.ring().is_prime_field()
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct PerfectionReport {
    pub p: u64,
    pub samples: usize,
    pub max_support: usize,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
}

/// The char-p collapse: over a perfect ring, every `A[V]` element with
/// V-support at most k lands in `A` after k Frobenius steps, so
/// `A[V]_perf = A`. Verified on samples.
pub fn cartier_perfection_check(
    space: &CartierSpace,
    samples: usize,
    seed: u64,
) -> Result<PerfectionReport> {
    let p = space.p();
    if *space.ring().characteristic() != BigUint::from(p) {
        return Err(Error::NotCharP(p));
    }
    if !is_perfect(space.phi_ring(), p) {
        return Err(Error::NotPerfect);
    }
    let mut rng = SplitMix64::new(seed);
    let max_support = space.precision() - 1;
    let mut witness = None;
    for _ in 0..samples {
        let u = space.sample(&mut rng)?;
        let k = u.v_support().unwrap_or(0);
        let mut v = u.clone();
        for _ in 0..k {
            v = space.frobenius(&v)?;
        }
        if !v.in_base() {
            witness = Some(format!(
                "{} does not collapse into the base after {k} Frobenius steps: {}",
                space.render(&u),
                space.render(&v)
            ));
            break;
        }
    }
    Ok(PerfectionReport {
        p,
        samples,
        max_support,
        pass: witness.is_none(),
        witness,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z_space(p: u64, precision: usize, mode: Mode) -> CartierSpace {
        let z = RingHandle::integers();
        let pr = PhiRing::new(z, PhiMap::Identity).unwrap();
        CartierSpace::new(pr, p, precision, mode).unwrap()
    }

    #[test]
    fn presentation_metadata() {
        let pres = CartierPresentation { p: 3 };
        assert_eq!(CartierPresentation::GENERATORS, ["F", "V"]);
        assert_eq!(pres.relation(), "F*V = 3");
    }

    #[test]
    fn v_squared_is_twice_v_at_p2() {
        // V(1) * V(1) = 2 V(1) over (Z, id), p = 2.
        let s = z_space(2, 4, Mode::Exact);
        let v1 = s.v_term(&s.ring().one(), 1).unwrap();
        let prod = s.mul(&v1, &v1).unwrap();
        let expected = s.scale_int(&v1, &BigInt::from(2)).unwrap();
        assert_eq!(prod, expected);
    }

    #[test]
    fn addition_is_componentwise_and_shift_linear() {
        let s = z_space(2, 4, Mode::Exact);
        let mut rng = SplitMix64::new(2);
        let u = s.sample(&mut rng).unwrap();
        assert_eq!(s.add(&u, &s.zero()).unwrap(), u);
        let x = s
            .from_coeffs(vec![
                s.ring().from_int(1),
                s.ring().from_int(2),
                s.ring().zero(),
                s.ring().zero(),
            ])
            .unwrap();
        let y = s
            .from_coeffs(vec![
                s.ring().from_int(5),
                s.ring().from_int(-2),
                s.ring().from_int(7),
                s.ring().zero(),
            ])
            .unwrap();
        // V(x) + V(y) = V(x + y).
        assert_eq!(
            s.add(&s.verschiebung(&x).unwrap(), &s.verschiebung(&y).unwrap())
                .unwrap(),
            s.verschiebung(&s.add(&x, &y).unwrap()).unwrap()
        );
    }

    #[test]
    fn projection_formula_in_av() {
        // x * V(y) = V(phi(x) * y) for x, y in A.
        let z = RingHandle::poly_over(RingHandle::integers(), &["t"]).unwrap();
        let phi = PhiMap::power_lift(&z, 2).unwrap();
        let pr = PhiRing::new(z.clone(), phi).unwrap();
        let s = CartierSpace::new(pr, 2, 4, Mode::Exact).unwrap();
        let mut rng = SplitMix64::new(3);
        for _ in 0..20 {
            let x = z.sample(&mut rng);
            let y = z.sample(&mut rng);
            let lhs = s
                .mul(&s.embed(&x).unwrap(), &s.v_term(&y, 1).unwrap())
                .unwrap();
            let rhs = s
                .v_term(&s.phi_ring().apply(&x).unwrap().mul(&y).unwrap(), 1)
                .unwrap();
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn binomial_product_example() {
        // (a + V(b)) (c + V(d)) = ac + V(ad + bc + 2bd) over (Z, id), p = 2.
        let s = z_space(2, 3, Mode::Exact);
        let z = s.ring().clone();
        let (a, b, c, d) = (z.from_int(3), z.from_int(5), z.from_int(7), z.from_int(11));
        let u = s
            .add(&s.embed(&a).unwrap(), &s.v_term(&b, 1).unwrap())
            .unwrap();
        let v = s
            .add(&s.embed(&c).unwrap(), &s.v_term(&d, 1).unwrap())
            .unwrap();
        let prod = s.mul(&u, &v).unwrap();
        assert_eq!(prod.coeffs[0], z.from_int(21));
        assert_eq!(prod.coeffs[1], z.from_int(3 * 11 + 5 * 7 + 2 * 5 * 11));
        assert!(prod.coeffs[2].is_zero());
    }

    #[test]
    fn frobenius_formulas() {
        let s = z_space(2, 4, Mode::Exact);
        let z = s.ring().clone();
        // F(V(a)) = p a.
        let va = s.v_term(&z.from_int(9), 1).unwrap();
        assert_eq!(
            s.frobenius(&va).unwrap(),
            s.embed(&z.from_int(18)).unwrap()
        );
        // F(a) = phi(a) for a in A.
        let a = s.embed(&z.from_int(5)).unwrap();
        assert_eq!(s.frobenius(&a).unwrap(), a);
        // F(a + V(b)) = phi(a) + p b.
        let u = s
            .add(&a, &s.v_term(&z.from_int(4), 1).unwrap())
            .unwrap();
        assert_eq!(
            s.frobenius(&u).unwrap(),
            s.embed(&z.from_int(5 + 8)).unwrap()
        );
    }

    #[test]
    fn frobenius_is_ring_hom() {
        let s = z_space(3, 5, Mode::Exact);
        let mut rng = SplitMix64::new(14);
        for _ in 0..25 {
            let u = s.sample(&mut rng).unwrap();
            let v = s.sample(&mut rng).unwrap();
            assert_eq!(
                s.frobenius(&s.mul(&u, &v).unwrap()).unwrap(),
                s.mul(&s.frobenius(&u).unwrap(), &s.frobenius(&v).unwrap())
                    .unwrap()
            );
            assert_eq!(
                s.frobenius(&s.add(&u, &v).unwrap()).unwrap(),
                s.add(&s.frobenius(&u).unwrap(), &s.frobenius(&v).unwrap())
                    .unwrap()
            );
        }
    }

    #[test]
    fn verschiebung_modes() {
        let exact = z_space(2, 3, Mode::Exact);
        let complete = z_space(2, 3, Mode::Complete);
        let z = exact.ring().clone();
        let full = exact
            .from_coeffs(vec![z.from_int(1), z.from_int(2), z.from_int(3)])
            .unwrap();
        assert!(matches!(
            exact.verschiebung(&full),
            Err(Error::PrecisionOverflow(3))
        ));
        let shifted = complete.verschiebung(&full).unwrap();
        assert_eq!(
            shifted.coeffs,
            vec![z.zero(), z.from_int(1), z.from_int(2)]
        );
        // V(0) = 0 and mod_v(V(u)) = 0.
        assert!(exact.verschiebung(&exact.zero()).unwrap().is_zero());
        let u = exact
            .from_coeffs(vec![z.from_int(5), z.from_int(1), z.zero()])
            .unwrap();
        assert!(exact
            .mod_v(&exact.verschiebung(&u).unwrap())
            .unwrap()
            .is_zero());
    }

    #[test]
    fn mod_v_is_ring_hom() {
        let s = z_space(2, 4, Mode::Exact);
        let mut rng = SplitMix64::new(25);
        for _ in 0..30 {
            let u = s.sample(&mut rng).unwrap();
            let v = s.sample(&mut rng).unwrap();
            assert_eq!(
                s.mod_v(&s.mul(&u, &v).unwrap()).unwrap(),
                s.mod_v(&u).unwrap().mul(&s.mod_v(&v).unwrap()).unwrap()
            );
        }
        assert!(s.mod_v(&s.one()).unwrap().is_one());
    }

    fn z_delta_space(p: u64, precision: usize) -> CartierSpace {
        let z = RingHandle::integers();
        let pr = PhiRing::new(z.clone(), PhiMap::Identity).unwrap();
        let ds = DeltaStructure::phi_lift(z, p, PhiMap::Identity).unwrap();
        CartierSpace::new(pr, p, precision, Mode::Exact)
            .unwrap()
            .with_delta(ds)
            .unwrap()
    }

    #[test]
    fn delta_of_v_one_at_p2() {
        // delta(V(1)) = 1 - V(1).
        let s = z_delta_space(2, 4);
        let z = s.ring().clone();
        let v1 = s.v_term(&z.one(), 1).unwrap();
        let d = s.delta(&v1).unwrap();
        let expected = s.sub(&s.one(), &v1).unwrap();
        assert_eq!(d, expected);
        // Check: V(1)^2 + 2 delta(V(1)) = 2 = F(V(1)).
        let lhs = s
            .add(
                &s.pow(&v1, 2).unwrap(),
                &s.scale_int(&d, &BigInt::from(2)).unwrap(),
            )
            .unwrap();
        assert_eq!(lhs, s.frobenius(&v1).unwrap());
    }

    #[test]
    fn delta_requires_exact_mode() {
        let z = RingHandle::integers();
        let pr = PhiRing::new(z.clone(), PhiMap::Identity).unwrap();
        let ds = DeltaStructure::phi_lift(z, 2, PhiMap::Identity).unwrap();
        let s = CartierSpace::new(pr, 2, 3, Mode::Complete)
            .unwrap()
            .with_delta(ds)
            .unwrap();
        let u = s.one();
        assert!(s.delta(&u).is_err());
    }

    #[test]
    fn delta_on_base_elements_is_base_delta() {
        let s = z_delta_space(2, 3);
        let z = s.ring().clone();
        let a = s.embed(&z.from_int(3)).unwrap();
        // delta(3) = (3 - 9)/2 = -3 for phi = id at p = 2.
        assert_eq!(s.delta(&a).unwrap(), s.embed(&z.from_int(-3)).unwrap());
    }

    #[test]
    fn master_identity_on_samples() {
        // phi_C(u) = u^p + p delta_C(u).
        for p in [2u64, 3] {
            let s = z_delta_space(p, 5);
            let mut rng = SplitMix64::new(100 + p);
            for _ in 0..15 {
                let u = s.sample(&mut rng).unwrap();
                let lhs = s.frobenius(&u).unwrap();
                let rhs = s
                    .add(
                        &s.pow(&u, p).unwrap(),
                        &s.scale_int(&s.delta(&u).unwrap(), &BigInt::from(p)).unwrap(),
                    )
                    .unwrap();
                assert_eq!(lhs, rhs, "p = {p}");
            }
        }
    }

    #[test]
    fn char_p_collapse() {
        // Over F_2: F(1 + V(1)) = 1.
        let f2 = RingHandle::prime_field(2).unwrap();
        let pr = PhiRing::new(f2.clone(), PhiMap::CharPPower(2)).unwrap();
        let s = CartierSpace::new(pr, 2, 3, Mode::Complete).unwrap();
        let u = s
            .add(
                &s.one(),
                &s.v_term(&f2.one(), 1).unwrap(),
            )
            .unwrap();
        assert_eq!(s.frobenius(&u).unwrap(), s.one());
        let report = cartier_perfection_check(&s, 50, 5).unwrap();
        assert!(report.pass, "{report:?}");
    }

    #[test]
    fn perfection_requires_char_p() {
        let s = z_space(2, 3, Mode::Complete);
        assert!(matches!(
            cartier_perfection_check(&s, 5, 1),
            Err(Error::NotCharP(2))
        ));
    }

    #[test]
    fn perfection_requires_perfect_ring() {
        let f2x = RingHandle::poly_over(RingHandle::prime_field(2).unwrap(), &["x"]).unwrap();
        let pr = PhiRing::new(f2x, PhiMap::CharPPower(2)).unwrap();
        let s = CartierSpace::new(pr, 2, 3, Mode::Complete).unwrap();
        assert!(matches!(
            cartier_perfection_check(&s, 5, 1),
            Err(Error::NotPerfect)
        ));
    }

    #[test]
    fn perfection_stages_compare() {
        let f2 = RingHandle::prime_field(2).unwrap();
        let pr = PhiRing::new(f2.clone(), PhiMap::CharPPower(2)).unwrap();
        let a = perfection_stage(&pr, 2, f2.one(), 0).unwrap();
        let b = a.transition(&pr).unwrap();
        assert_eq!(b.stage, 1);
        assert!(a.same_colimit_elt(&b, &pr).unwrap());
    }

    #[test]
    fn json_round_trip() {
        let s = z_space(2, 3, Mode::Exact);
        let mut rng = SplitMix64::new(33);
        let u = s.sample(&mut rng).unwrap();
        let j = s.elt_to_json(&u);
        assert_eq!(s.elt_from_json(&j).unwrap(), u);
        assert_eq!(j["mode"], "exact");
    }
}
