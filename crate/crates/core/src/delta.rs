//! Delta-ring structures: the phi/delta dictionary on torsion-free rings,
//! truncated free delta-rings, and a sampled axiom checker that works over
//! any carrier (plain rings, Witt vectors, Cartier elements).

use num_bigint::BigInt;
use num_traits::One;

use crate::error::{Error, Result};
use crate::prng::SplitMix64;
use crate::ring::{exact_div_int, Element, PhiMap, RingHandle};

/// Integer coefficients of `(x^p + y^p - (x+y)^p)/p` as a polynomial in x, y:
/// the coefficient of `x^i y^(p-i)` is `-binom(p,i)/p` for `0 < i < p`.
pub fn sum_rule_coefficients(p: u64) -> Vec<BigInt> {
    let p_int = BigInt::from(p);
    let mut binom = BigInt::one();
    let mut out = Vec::with_capacity(p as usize - 1);
    for i in 1..p {
        // binom(p, i) computed incrementally.
        binom = binom * BigInt::from(p - i + 1) / BigInt::from(i);
        out.push(-(&binom / &p_int));
    }
    out
}

/// `(c - c^p)/p` for an integer constant; exact for every integer.
pub fn integer_delta(c: &BigInt, p: u64) -> BigInt {
    let cp = num_traits::Pow::pow(c, p as u32);
    (c - cp) / BigInt::from(p)
}

/// A ring together with a delta-operation.
#[derive(Debug, Clone)]
pub struct DeltaStructure {
    ring: RingHandle,
    p: u64,
    kind: DeltaKind,
}

#[derive(Debug, Clone)]
pub enum DeltaKind {
    /// Torsion-free ring with a Frobenius lift: `delta(a) = (phi(a) - a^p)/p`.
    PhiLift(PhiMap),
    /// Truncated free delta-ring: delta acts on generators by shifting the
    /// order index, extended by the sum and product rules.
    Free(FreeDeltaRing),
    /// The constant-zero map. Not a delta-structure unless p divides
    /// everything; kept so the axiom checker can exhibit failures.
    Zero,
}

impl DeltaStructure {
    pub fn phi_lift(ring: RingHandle, p: u64, phi: PhiMap) -> Result<Self> {
        if !ring.is_torsion_free() {
            return Err(Error::NotTorsionFree);
        }
        Ok(DeltaStructure {
            ring,
            p,
            kind: DeltaKind::PhiLift(phi),
        })
    }

    pub fn zero_delta(ring: RingHandle, p: u64) -> Self {
        DeltaStructure {
            ring,
            p,
            kind: DeltaKind::Zero,
        }
    }

    pub fn free(free: FreeDeltaRing) -> Self {
        DeltaStructure {
            ring: free.ring().clone(),
            p: free.p,
            kind: DeltaKind::Free(free),
        }
    }

    pub fn ring(&self) -> &RingHandle {
        &self.ring
    }

    pub fn prime(&self) -> u64 {
        self.p
    }

    pub fn kind(&self) -> &DeltaKind {
        &self.kind
    }

    /// Truncation order, present only for free delta-rings.
    pub fn truncation_order(&self) -> Option<usize> {
        match &self.kind {
            DeltaKind::Free(f) => Some(f.order),
            _ => None,
        }
    }

    pub fn delta(&self, a: &Element) -> Result<Element> {
        if a.ring() != &self.ring {
            return Err(Error::RingMismatch);
        }
        match &self.kind {
            DeltaKind::PhiLift(phi) => delta_from_phi(phi, self.p, a),
            DeltaKind::Free(f) => f.delta(a),
            DeltaKind::Zero => Ok(self.ring.zero()),
        }
    }

    /// The associated lift of Frobenius `phi(a) = a^p + p*delta(a)`.
    pub fn phi(&self, a: &Element) -> Result<Element> {
        if a.ring() != &self.ring {
            return Err(Error::RingMismatch);
        }
        match &self.kind {
            DeltaKind::PhiLift(phi) => phi.apply(a),
            DeltaKind::Free(f) => f.phi(a),
            DeltaKind::Zero => phi_from_delta(self, a),
        }
    }
}

/// `delta(a) = (phi(a) - a^p) / p`; fails with `NotDivisible` exactly when
/// `phi` is not a Frobenius lift at `a`.
pub fn delta_from_phi(phi: &PhiMap, p: u64, a: &Element) -> Result<Element> {
    let numerator = phi.apply(a)?.sub(&a.pow(p))?;
    exact_div_int(&numerator, &BigInt::from(p))
}

/// `phi(a) = a^p + p*delta(a)`.
pub fn phi_from_delta(ds: &DeltaStructure, a: &Element) -> Result<Element> {
    let p_int = BigInt::from(ds.p);
    a.pow(ds.p).add(&ds.delta(a)?.scale(&p_int))
}

// ---------------------------------------------------------------------------
// Truncated free delta-ring
// ---------------------------------------------------------------------------

/// The free delta-ring on `gens` generators, truncated at delta-order
/// `order`: the polynomial ring on variables `x{i}_{k}` for `0 <= k <= order`
/// with `delta(x{i}_{k}) = x{i}_{k+1}` while `k < order`.
#[derive(Debug, Clone)]
pub struct FreeDeltaRing {
    p: u64,
    gens: usize,
    order: usize,
    ring: RingHandle,
}

pub fn free_delta_ring(gens: usize, order: usize, p: u64) -> Result<FreeDeltaRing> {
    if gens == 0 || order == 0 {
        return Err(Error::InvalidInput(
            "free delta-ring needs at least one generator and order >= 1".into(),
        ));
    }
    let mut vars = Vec::with_capacity(gens * (order + 1));
    for i in 1..=gens {
        for k in 0..=order {
            vars.push(format!("x{i}_{k}"));
        }
    }
    let ring = RingHandle::poly_over_named(RingHandle::integers(), vars)?;
    Ok(FreeDeltaRing {
        p,
        gens,
        order,
        ring,
    })
}

impl FreeDeltaRing {
    pub fn ring(&self) -> &RingHandle {
        &self.ring
    }

    pub fn prime(&self) -> u64 {
        self.p
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn gens(&self) -> usize {
        self.gens
    }

    fn var_slot(&self, gen: usize, k: usize) -> usize {
        (gen - 1) * (self.order + 1) + k
    }

    /// The generator `x{i}` itself (delta-order zero). Generators are
    /// 1-indexed.
    pub fn generator(&self, gen: usize) -> Result<Element> {
        if gen == 0 || gen > self.gens {
            return Err(Error::InvalidInput(format!("no generator #{gen}")));
        }
        self.ring.var_by_index(self.var_slot(gen, 0))
    }

    /// The k-th delta-iterate variable of a generator.
    pub fn delta_var(&self, gen: usize, k: usize) -> Result<Element> {
        if gen == 0 || gen > self.gens || k > self.order {
            return Err(Error::InvalidInput(format!("no variable x{gen}_{k}")));
        }
        self.ring.var_by_index(self.var_slot(gen, k))
    }

    fn delta_of_var(&self, idx: usize) -> Result<Element> {
        let k = idx % (self.order + 1);
        if k == self.order {
            return Err(Error::TruncationExceeded(self.order));
        }
        self.ring.var_by_index(idx + 1)
    }

    /// The Frobenius lift as the ring-homomorphism substitution
    /// `x_{i,k} -> x_{i,k}^p + p x_{i,k+1}`; agrees with
    /// `f^p + p delta(f)` but does not expand the delta fold.
    pub fn phi(&self, f: &Element) -> Result<Element> {
        if f.ring() != &self.ring {
            return Err(Error::RingMismatch);
        }
        let poly = f.as_poly().expect("poly ring element");
        let p_int = BigInt::from(self.p);
        let mut images: Vec<Option<Element>> = vec![None; self.ring.vars().len()];
        let mut acc = self.ring.zero();
        for (mono, c) in poly.terms() {
            let mut term = self.ring.from_bigint(c);
            for (idx, &e) in mono.0.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                if images[idx].is_none() {
                    let k = idx % (self.order + 1);
                    if k == self.order {
                        return Err(Error::TruncationExceeded(self.order));
                    }
                    let img = self
                        .ring
                        .var_by_index(idx)?
                        .pow(self.p)
                        .add(&self.ring.var_by_index(idx + 1)?.scale(&p_int))?;
                    images[idx] = Some(img);
                }
                term = term.mul(&images[idx].as_ref().expect("filled").pow(e as u64))?;
            }
            acc = acc.add(&term)?;
        }
        Ok(acc)
    }

    /// Delta of an arbitrary polynomial, extended from the generators by a
    /// left fold of the sum and product rules over terms in graded-lex
    /// order. The result does not depend on the fold order.
    pub fn delta(&self, f: &Element) -> Result<Element> {
        if f.ring() != &self.ring {
            return Err(Error::RingMismatch);
        }
        let poly = f.as_poly().expect("poly ring element");
        let p_int = BigInt::from(self.p);
        let sum_coeffs = sum_rule_coefficients(self.p);

        let mut acc: Option<(Element, Element)> = None; // (sum so far, delta of it)
        for (mono, c) in poly.terms() {
            // delta of one term via the product rule, folding over factors:
            // the constant first, then each variable with multiplicity.
            let mut term = self.ring.from_bigint(c);
            let mut delta_term = self.ring.from_bigint(&integer_delta(c, self.p));
            for (idx, &e) in mono.0.iter().enumerate() {
                for _ in 0..e {
                    let v = self.ring.var_by_index(idx)?;
                    let dv = self.delta_of_var(idx)?;
                    delta_term = product_rule(&term, &delta_term, &v, &dv, self.p, &p_int)?;
                    term = term.mul(&v)?;
                }
            }
            acc = Some(match acc {
                None => (term, delta_term),
                Some((s, ds)) => {
                    let mix = sum_rule_term(&s, &term, &sum_coeffs)?;
                    let new_ds = ds.add(&delta_term)?.add(&mix)?;
                    (s.add(&term)?, new_ds)
                }
            });
        }
        Ok(acc.map(|(_, ds)| ds).unwrap_or_else(|| self.ring.zero()))
    }
}

/// `delta(u*v) = u^p delta(v) + delta(u) v^p + p delta(u) delta(v)`.
fn product_rule(
    u: &Element,
    du: &Element,
    v: &Element,
    dv: &Element,
    p: u64,
    p_int: &BigInt,
) -> Result<Element> {
    u.pow(p)
        .mul(dv)?
        .add(&du.mul(&v.pow(p))?)?
        .add(&du.mul(dv)?.scale(p_int))
}

/// `(x^p + y^p - (x+y)^p)/p` evaluated through its precomputed integer
/// coefficients.
pub fn sum_rule_term(x: &Element, y: &Element, coeffs: &[BigInt]) -> Result<Element> {
    let ring = x.ring();
    let p = coeffs.len() as u64 + 1;
    let mut acc = ring.zero();
    for (i, c) in coeffs.iter().enumerate() {
        let xi = x.pow(i as u64 + 1);
        let ypi = y.pow(p - 1 - i as u64);
        acc = acc.add(&xi.mul(&ypi)?.scale(c))?;
    }
    Ok(acc)
}

// ---------------------------------------------------------------------------
// Sampled axiom checking over a generic carrier
// ---------------------------------------------------------------------------

/// Anything that looks like a delta-ring for the purpose of sampled axiom
/// checking. `project` maps the full space into the space where delta-values
/// live (the restriction for truncated Witt vectors; identity elsewhere).
pub trait DeltaCarrier {
    type Item: Clone + PartialEq;

    fn prime(&self) -> u64;
    fn zero(&self) -> Self::Item;
    fn one(&self) -> Self::Item;
    fn add(&self, a: &Self::Item, b: &Self::Item) -> Result<Self::Item>;
    fn mul(&self, a: &Self::Item, b: &Self::Item) -> Result<Self::Item>;
    fn scale_int(&self, a: &Self::Item, k: &BigInt) -> Result<Self::Item>;
    fn delta(&self, a: &Self::Item) -> Result<Self::Item>;
    fn sample(&self, rng: &mut SplitMix64) -> Result<Self::Item>;
    fn render(&self, a: &Self::Item) -> String;

    fn project(&self, a: &Self::Item) -> Result<Self::Item> {
        Ok(a.clone())
    }

    fn pow(&self, a: &Self::Item, e: u64) -> Result<Self::Item> {
        debug_assert!(e >= 1);
        let mut acc = a.clone();
        for _ in 1..e {
            acc = self.mul(&acc, a)?;
        }
        Ok(acc)
    }

    /// `phi(a) = project(a)^p + p*delta(a)`.
    fn phi(&self, a: &Self::Item) -> Result<Self::Item> {
        let p = self.prime();
        let pa = self.pow(&self.project(a)?, p)?;
        let pd = self.scale_int(&self.delta(a)?, &BigInt::from(p))?;
        self.add(&pa, &pd)
    }
}

impl DeltaCarrier for DeltaStructure {
    type Item = Element;

    fn prime(&self) -> u64 {
        self.p
    }
    fn zero(&self) -> Element {
        self.ring.zero()
    }
    fn one(&self) -> Element {
        self.ring.one()
    }
    fn add(&self, a: &Element, b: &Element) -> Result<Element> {
        a.add(b)
    }
    fn mul(&self, a: &Element, b: &Element) -> Result<Element> {
        a.mul(b)
    }
    fn scale_int(&self, a: &Element, k: &BigInt) -> Result<Element> {
        Ok(a.scale(k))
    }
    fn delta(&self, a: &Element) -> Result<Element> {
        DeltaStructure::delta(self, a)
    }
    fn sample(&self, rng: &mut SplitMix64) -> Result<Element> {
        match &self.kind {
            // Keep free-ring samples small and of low delta-order: callers
            // iterate phi, and each application climbs one order while
            // raising polynomial sizes to the p-th power.
            DeltaKind::Free(f) => {
                let c = f.ring().from_int(rng.signed(3));
                if rng.below(2) == 0 {
                    Ok(c)
                } else {
                    let gen = 1 + rng.below(f.gens as u64) as usize;
                    let k = rng.below(2.min(f.order as u64)) as usize;
                    c.add(&f.delta_var(gen, k)?)
                }
            }
            _ => Ok(self.ring.sample(rng)),
        }
    }
    fn render(&self, a: &Element) -> String {
        a.to_string()
    }
}

// ---------------------------------------------------------------------------
// The cofree delta-operation on truncated Witt vectors
// ---------------------------------------------------------------------------

/// The delta-operation on Witt vectors, `W_{n+1}(A) -> W_n(A)`: coordinate k
/// is the k-th delta polynomial evaluated at the coordinates, so that
/// `F(x) = R(x)^p + p*delta(x)` holds in `W_n(A)`.
pub fn delta_witt(
    ctx: &crate::witt::WittContext,
    x: &crate::witt::WittVec,
) -> Result<crate::witt::WittVec> {
    if x.len() < 2 {
        return Err(Error::LengthMismatch(x.len(), 2));
    }
    let mut coords = Vec::with_capacity(x.len() - 1);
    for k in 0..x.len() - 1 {
        let poly = ctx.poly(crate::wittpoly::PolyKind::Delta, k)?;
        coords.push(poly.evaluate(&x.coords, None, ctx.ring())?);
    }
    ctx.from_coords(coords)
}

/// Delta-carrier over `W_{len}(A)`: items have the full length, delta and
/// `project` (the restriction) land one coordinate shorter.
pub struct WittDeltaCarrier<'a> {
    pub ctx: &'a crate::witt::WittContext,
    pub len: usize,
}

impl DeltaCarrier for WittDeltaCarrier<'_> {
    type Item = crate::witt::WittVec;

    fn prime(&self) -> u64 {
        self.ctx.p()
    }
    fn zero(&self) -> Self::Item {
        self.ctx.zero(self.len)
    }
    fn one(&self) -> Self::Item {
        self.ctx.one(self.len)
    }
    fn add(&self, a: &Self::Item, b: &Self::Item) -> Result<Self::Item> {
        self.ctx.add(a, b)
    }
    fn mul(&self, a: &Self::Item, b: &Self::Item) -> Result<Self::Item> {
        self.ctx.mul(a, b)
    }
    fn scale_int(&self, a: &Self::Item, k: &BigInt) -> Result<Self::Item> {
        // k*a by double-and-add; the Teichmueller lift of k is not k*1 in
        // W_n, so scaling cannot go through coordinatewise multiplication.
        let len = a.len();
        let mut acc = self.ctx.zero(len);
        let mut remaining = k.clone();
        let neg = remaining < BigInt::from(0);
        if neg {
            remaining = -remaining;
        }
        let mut base = a.clone();
        while remaining > BigInt::from(0) {
            if num_integer::Integer::is_odd(&remaining) {
                acc = self.ctx.add(&acc, &base)?;
            }
            remaining >>= 1;
            if remaining > BigInt::from(0) {
                base = self.ctx.add(&base, &base)?;
            }
        }
        if neg {
            acc = self.ctx.neg(&acc)?;
        }
        Ok(acc)
    }
    fn delta(&self, a: &Self::Item) -> Result<Self::Item> {
        delta_witt(self.ctx, a)
    }
    fn sample(&self, rng: &mut SplitMix64) -> Result<Self::Item> {
        Ok(self.ctx.sample(self.len, rng))
    }
    fn render(&self, a: &Self::Item) -> String {
        format!(
            "({})",
            a.coords
                .iter()
                .map(|c| c.to_string())
                .collect::<Vec<_>>()
                .join(", ")
        )
    }
    fn project(&self, a: &Self::Item) -> Result<Self::Item> {
        self.ctx.restriction(a)
    }
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct AxiomCheck {
    pub name: String,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
}

#[derive(Debug, Clone, serde::Serialize)]
pub struct DeltaAxiomReport {
    pub samples: usize,
    pub checks: Vec<AxiomCheck>,
}

impl DeltaAxiomReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

/// Check all delta-ring axioms on `samples` random pairs; deterministic for
/// a fixed seed. Failures carry a witness instead of aborting the run.
pub fn check_delta_axioms_on<C: DeltaCarrier>(
    carrier: &C,
    samples: usize,
    seed: u64,
) -> Result<DeltaAxiomReport> {
    let mut rng = SplitMix64::new(seed);
    let p = carrier.prime();
    let p_int = BigInt::from(p);
    let coeffs = sum_rule_coefficients(p);

    let mut checks = Vec::new();
    let mut record = |name: &str, witness: Option<String>| {
        checks.push(AxiomCheck {
            name: name.to_string(),
            pass: witness.is_none(),
            witness,
        });
    };

    // delta(0) = 0 and delta(1) = 0.
    let zero_proj = carrier.project(&carrier.zero())?;
    let one_proj = carrier.project(&carrier.one())?;
    record(
        "delta_zero",
        (carrier.delta(&carrier.zero())? != zero_proj)
            .then(|| "delta(0) != 0".to_string()),
    );
    record(
        "delta_one",
        (carrier.delta(&carrier.one())? != zero_proj).then(|| "delta(1) != 0".to_string()),
    );

    let mut product_witness = None;
    let mut sum_witness = None;
    let mut hom_witness = None;
    for _ in 0..samples {
        let x = carrier.sample(&mut rng)?;
        let y = carrier.sample(&mut rng)?;
        let dx = carrier.delta(&x)?;
        let dy = carrier.delta(&y)?;
        let xp = carrier.pow(&carrier.project(&x)?, p)?;
        let yp = carrier.pow(&carrier.project(&y)?, p)?;

        if product_witness.is_none() {
            let lhs = carrier.delta(&carrier.mul(&x, &y)?)?;
            let rhs = carrier.add(
                &carrier.add(&carrier.mul(&xp, &dy)?, &carrier.mul(&dx, &yp)?)?,
                &carrier.scale_int(&carrier.mul(&dx, &dy)?, &p_int)?,
            )?;
            if lhs != rhs {
                product_witness = Some(format!(
                    "x = {}, y = {}: delta(xy) = {} but rule gives {}",
                    carrier.render(&x),
                    carrier.render(&y),
                    carrier.render(&lhs),
                    carrier.render(&rhs)
                ));
            }
        }
        if sum_witness.is_none() {
            let lhs = carrier.delta(&carrier.add(&x, &y)?)?;
            let mut mix = carrier.project(&carrier.zero())?;
            for (i, c) in coeffs.iter().enumerate() {
                let xi = carrier.pow(&carrier.project(&x)?, i as u64 + 1)?;
                let ypi = carrier.pow(&carrier.project(&y)?, p - 1 - i as u64)?;
                mix = carrier.add(&mix, &carrier.scale_int(&carrier.mul(&xi, &ypi)?, c)?)?;
            }
            let rhs = carrier.add(&carrier.add(&dx, &dy)?, &mix)?;
            if lhs != rhs {
                sum_witness = Some(format!(
                    "x = {}, y = {}: delta(x+y) = {} but rule gives {}",
                    carrier.render(&x),
                    carrier.render(&y),
                    carrier.render(&lhs),
                    carrier.render(&rhs)
                ));
            }
        }
        if hom_witness.is_none() {
            let fx = carrier.phi(&x)?;
            let fy = carrier.phi(&y)?;
            let add_ok = carrier.phi(&carrier.add(&x, &y)?)? == carrier.add(&fx, &fy)?;
            let mul_ok = carrier.phi(&carrier.mul(&x, &y)?)? == carrier.mul(&fx, &fy)?;
            if !add_ok || !mul_ok {
                hom_witness = Some(format!(
                    "phi is not a ring homomorphism at x = {}, y = {}",
                    carrier.render(&x),
                    carrier.render(&y)
                ));
            }
        }
    }
    if hom_witness.is_none() && carrier.phi(&carrier.one())? != one_proj {
        hom_witness = Some("phi(1) != 1".to_string());
    }
    record("product_rule", product_witness);
    record("sum_rule", sum_witness);
    record("phi_ring_hom", hom_witness);

    Ok(DeltaAxiomReport {
        samples,
        checks,
    })
}

/// Convenience wrapper for the common case of a plain `DeltaStructure`.
pub fn check_delta_axioms(
    ds: &DeltaStructure,
    samples: usize,
    seed: u64,
) -> Result<DeltaAxiomReport> {
    check_delta_axioms_on(ds, samples, seed)
}
