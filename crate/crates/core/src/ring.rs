//! Coefficient rings with exact arithmetic: the integers, integers mod m,
//! prime fields, and sparse polynomial rings over a scalar base. Every value
//! is immutable and every operation is a pure function, so handles and
//! elements can be shared freely across threads.

use std::fmt;
use std::sync::Arc;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::poly::SparsePoly;
use crate::prng::SplitMix64;

/// What kind of ring a handle describes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RingDescriptor {
    Integers,
    IntegersMod(BigUint),
    PrimeField(BigUint),
    PolyRing {
        base: RingHandle,
        vars: Vec<String>,
    },
}

#[derive(Debug)]
struct RingInner {
    descriptor: RingDescriptor,
    characteristic: BigUint,
    torsion_free: bool,
}

/// A coefficient ring. Cloning is cheap (shared pointer); two handles are
/// equal iff they describe the same ring.
#[derive(Debug, Clone)]
pub struct RingHandle(Arc<RingInner>);

impl PartialEq for RingHandle {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || self.0.descriptor == other.0.descriptor
    }
}

impl Eq for RingHandle {}

/// Deterministic Miller-Rabin, valid for all inputs below 3.3e24.
pub fn is_prime(n: &BigUint) -> bool {
    let two = BigUint::from(2u32);
    if *n < two {
        return false;
    }
    for small in [2u32, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let s = BigUint::from(small);
        if *n == s {
            return true;
        }
        if (n % &s).is_zero() {
            return false;
        }
    }
    let n_minus_one = n - BigUint::one();
    let r = n_minus_one.trailing_zeros().unwrap_or(0);
    let d = &n_minus_one >> r;
    'witness: for a in [2u32, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = BigUint::from(a).modpow(&d, n);
        if x.is_one() || x == n_minus_one {
            continue;
        }
        for _ in 1..r {
            x = (&x * &x) % n;
            if x == n_minus_one {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Create a ring from a descriptor, validating its preconditions.
pub fn make_ring(descriptor: RingDescriptor) -> Result<RingHandle> {
    let (characteristic, torsion_free) = match &descriptor {
        RingDescriptor::Integers => (BigUint::zero(), true),
        RingDescriptor::IntegersMod(m) => {
            if *m < BigUint::from(2u32) {
                return Err(Error::ModulusTooSmall(m.to_string()));
            }
            (m.clone(), false)
        }
        RingDescriptor::PrimeField(p) => {
            if !is_prime(p) {
                return Err(Error::NonPrimeModulus(p.to_string()));
            }
            (p.clone(), false)
        }
        RingDescriptor::PolyRing { base, vars } => {
            if vars.is_empty() {
                return Err(Error::EmptyVariableList);
            }
            let mut seen = std::collections::BTreeSet::new();
            for v in vars {
                if !seen.insert(v.clone()) {
                    return Err(Error::DuplicateVariable(v.clone()));
                }
            }
            if matches!(base.descriptor(), RingDescriptor::PolyRing { .. }) {
                return Err(Error::NestedPolyRing);
            }
            (base.characteristic().clone(), base.is_torsion_free())
        }
    };
    Ok(RingHandle(Arc::new(RingInner {
        descriptor,
        characteristic,
        torsion_free,
    })))
}

impl RingHandle {
    pub fn integers() -> RingHandle {
        make_ring(RingDescriptor::Integers).expect("Z always exists")
    }

    pub fn integers_mod(m: u64) -> Result<RingHandle> {
        make_ring(RingDescriptor::IntegersMod(BigUint::from(m)))
    }

    pub fn prime_field(p: u64) -> Result<RingHandle> {
        make_ring(RingDescriptor::PrimeField(BigUint::from(p)))
    }

    pub fn poly_over(base: RingHandle, vars: &[&str]) -> Result<RingHandle> {
        make_ring(RingDescriptor::PolyRing {
            base,
            vars: vars.iter().map(|s| s.to_string()).collect(),
        })
    }

    pub fn poly_over_named(base: RingHandle, vars: Vec<String>) -> Result<RingHandle> {
        make_ring(RingDescriptor::PolyRing { base, vars })
    }

    pub fn descriptor(&self) -> &RingDescriptor {
        &self.0.descriptor
    }

    pub fn characteristic(&self) -> &BigUint {
        &self.0.characteristic
    }

    pub fn is_torsion_free(&self) -> bool {
        self.0.torsion_free
    }

    pub fn is_prime_field(&self) -> bool {
        matches!(self.0.descriptor, RingDescriptor::PrimeField(_))
    }

    /// For scalar rings and poly rings over scalars: the modulus, if any.
    fn modulus(&self) -> Option<BigInt> {
        match &self.0.descriptor {
            RingDescriptor::Integers => None,
            RingDescriptor::IntegersMod(m) | RingDescriptor::PrimeField(m) => {
                Some(BigInt::from(m.clone()))
            }
            RingDescriptor::PolyRing { base, .. } => base.modulus(),
        }
    }

    pub fn vars(&self) -> &[String] {
        match &self.0.descriptor {
            RingDescriptor::PolyRing { vars, .. } => vars,
            _ => &[],
        }
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.vars().iter().position(|v| v == name)
    }

    pub fn zero(&self) -> Element {
        match &self.0.descriptor {
            RingDescriptor::PolyRing { vars, .. } => Element {
                ring: self.clone(),
                value: Value::Poly(SparsePoly::zero(vars.len())),
            },
            _ => Element {
                ring: self.clone(),
                value: Value::Int(BigInt::zero()),
            },
        }
    }

    pub fn one(&self) -> Element {
        self.from_bigint(&BigInt::one())
    }

    /// Embed an integer as `n * 1`. Callers never need the characteristic;
    /// the handle normalizes into its own canonical form.
    pub fn from_bigint(&self, n: &BigInt) -> Element {
        let value = match &self.0.descriptor {
            RingDescriptor::PolyRing { vars, .. } => {
                Value::Poly(self.normalize_poly(SparsePoly::constant(vars.len(), n.clone())))
            }
            _ => Value::Int(self.normalize_int(n.clone())),
        };
        Element {
            ring: self.clone(),
            value,
        }
    }

    pub fn from_int(&self, n: i64) -> Element {
        self.from_bigint(&BigInt::from(n))
    }

    /// The generator with the given name (poly rings only).
    pub fn var(&self, name: &str) -> Result<Element> {
        let idx = self
            .var_index(name)
            .ok_or_else(|| Error::MissingVariable(name.to_string()))?;
        self.var_by_index(idx)
    }

    pub fn var_by_index(&self, idx: usize) -> Result<Element> {
        match &self.0.descriptor {
            RingDescriptor::PolyRing { vars, .. } if idx < vars.len() => Ok(Element {
                ring: self.clone(),
                value: Value::Poly(SparsePoly::var(vars.len(), idx)),
            }),
            _ => Err(Error::MissingVariable(format!("#{idx}"))),
        }
    }

    fn normalize_int(&self, n: BigInt) -> BigInt {
        match self.modulus() {
            None => n,
            Some(m) => n.mod_floor(&m),
        }
    }

    fn normalize_poly(&self, p: SparsePoly) -> SparsePoly {
        match self.modulus() {
            None => p,
            Some(m) => p.reduce_mod(&m),
        }
    }

    /// Draw a pseudo-random element: small integers for Z, uniform residues
    /// mod m, and short low-degree polynomials for poly rings.
    pub fn sample(&self, rng: &mut SplitMix64) -> Element {
        match &self.0.descriptor {
            RingDescriptor::Integers => self.from_bigint(&BigInt::from(rng.signed(50))),
            RingDescriptor::IntegersMod(m) | RingDescriptor::PrimeField(m) => {
                let m64 = m.to_u64().unwrap_or(u64::MAX);
                self.from_bigint(&BigInt::from(rng.below(m64)))
            }
            RingDescriptor::PolyRing { vars, .. } => {
                let n_vars = vars.len();
                let mut poly = SparsePoly::zero(n_vars);
                let n_terms = 1 + rng.below(3) as usize;
                for _ in 0..n_terms {
                    let mut exps = vec![0u32; n_vars];
                    for e in exps.iter_mut() {
                        *e = rng.below(3) as u32;
                    }
                    poly.add_term(crate::poly::Monomial(exps), BigInt::from(rng.signed(9)));
                }
                Element {
                    ring: self.clone(),
                    value: Value::Poly(self.normalize_poly(poly)),
                }
            }
        }
    }

    /// Wrap a raw polynomial as an element of this poly ring.
    pub fn element_from_poly(&self, p: SparsePoly) -> Result<Element> {
        match &self.0.descriptor {
            RingDescriptor::PolyRing { vars, .. } if vars.len() == p.n_vars() => Ok(Element {
                ring: self.clone(),
                value: Value::Poly(self.normalize_poly(p)),
            }),
            _ => Err(Error::RingMismatch),
        }
    }
}

/// The payload of an element.
#[derive(Debug, Clone, PartialEq, Eq)]
enum Value {
    Int(BigInt),
    Poly(SparsePoly),
}

/// An element belonging to exactly one ring. Binary operations verify that
/// both operands share the ring and fail with `RingMismatch` otherwise.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Element {
    ring: RingHandle,
    value: Value,
}

impl Element {
    pub fn ring(&self) -> &RingHandle {
        &self.ring
    }

    pub fn is_zero(&self) -> bool {
        match &self.value {
            Value::Int(n) => n.is_zero(),
            Value::Poly(p) => p.is_zero(),
        }
    }

    pub fn is_one(&self) -> bool {
        *self == self.ring.one()
    }

    fn check_same_ring(&self, other: &Element) -> Result<()> {
        if self.ring == other.ring {
            Ok(())
        } else {
            Err(Error::RingMismatch)
        }
    }

    pub fn add(&self, other: &Element) -> Result<Element> {
        self.check_same_ring(other)?;
        let value = match (&self.value, &other.value) {
            (Value::Int(a), Value::Int(b)) => Value::Int(self.ring.normalize_int(a + b)),
            (Value::Poly(a), Value::Poly(b)) => Value::Poly(self.ring.normalize_poly(a.add(b))),
            _ => return Err(Error::RingMismatch),
        };
        Ok(Element {
            ring: self.ring.clone(),
            value,
        })
    }

    pub fn neg(&self) -> Element {
        let value = match &self.value {
            Value::Int(a) => Value::Int(self.ring.normalize_int(-a)),
            Value::Poly(a) => Value::Poly(self.ring.normalize_poly(a.neg())),
        };
        Element {
            ring: self.ring.clone(),
            value,
        }
    }

    pub fn sub(&self, other: &Element) -> Result<Element> {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &Element) -> Result<Element> {
        self.check_same_ring(other)?;
        let value = match (&self.value, &other.value) {
            (Value::Int(a), Value::Int(b)) => Value::Int(self.ring.normalize_int(a * b)),
            (Value::Poly(a), Value::Poly(b)) => Value::Poly(self.ring.normalize_poly(a.mul(b))),
            _ => return Err(Error::RingMismatch),
        };
        Ok(Element {
            ring: self.ring.clone(),
            value,
        })
    }

    pub fn pow(&self, e: u64) -> Element {
        if e == 0 {
            return self.ring.one();
        }
        let mut result = self.clone();
        let mut base = self.clone();
        let mut exp = e - 1;
        while exp > 0 {
            if exp & 1 == 1 {
                result = result.mul(&base).expect("same ring");
            }
            exp >>= 1;
            if exp > 0 {
                base = base.mul(&base).expect("same ring");
            }
        }
        result
    }

    /// Multiply by a plain integer.
    pub fn scale(&self, k: &BigInt) -> Element {
        self.mul(&self.ring.from_bigint(k)).expect("same ring")
    }

    /// The underlying integer for scalar-ring elements.
    pub fn as_int(&self) -> Option<&BigInt> {
        match &self.value {
            Value::Int(n) => Some(n),
            Value::Poly(_) => None,
        }
    }

    pub fn as_poly(&self) -> Option<&SparsePoly> {
        match &self.value {
            Value::Poly(p) => Some(p),
            Value::Int(_) => None,
        }
    }

    /// `true` when `k` divides this element exactly (every coefficient for
    /// polynomials). Scalar values are canonical residues, so over `Z/m`
    /// this tests the representative in `[0, m)`.
    pub fn divisible_by_int(&self, k: &BigInt) -> bool {
        match &self.value {
            Value::Int(n) => !k.is_zero() && n.is_multiple_of(k),
            Value::Poly(p) => p.divisible_by(k),
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        match &self.value {
            Value::Int(n) => serde_json::Value::String(n.to_string()),
            Value::Poly(p) => p.to_json(self.ring.vars()),
        }
    }

    pub fn from_json(ring: &RingHandle, v: &serde_json::Value) -> Result<Element> {
        match (ring.descriptor(), v) {
            (RingDescriptor::PolyRing { vars, .. }, serde_json::Value::Object(_)) => {
                let (file_vars, poly) = SparsePoly::from_json(v)?;
                if file_vars != *vars {
                    return Err(Error::InvalidInput(format!(
                        "variable list {file_vars:?} does not match ring {vars:?}"
                    )));
                }
                ring.element_from_poly(poly)
            }
            (RingDescriptor::PolyRing { .. }, serde_json::Value::String(s)) => {
                let n: BigInt = s
                    .parse()
                    .map_err(|e| Error::InvalidInput(format!("bad integer: {e}")))?;
                Ok(ring.from_bigint(&n))
            }
            (_, serde_json::Value::String(s)) => {
                let n: BigInt = s
                    .parse()
                    .map_err(|e| Error::InvalidInput(format!("bad integer: {e}")))?;
                Ok(ring.from_bigint(&n))
            }
            _ => Err(Error::InvalidInput("unsupported element encoding".into())),
        }
    }
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.value {
            Value::Int(n) => write!(f, "{n}"),
            Value::Poly(p) => write!(f, "{}", p.display(self.ring.vars())),
        }
    }
}

/// Exact division of `x` by a nonzero integer `k`: returns `y` with
/// `k*y = x`, or explains why no unique such `y` exists.
pub fn exact_div_int(x: &Element, k: &BigInt) -> Result<Element> {
    if k.is_zero() {
        return Err(Error::DivisionByZero);
    }
    let ring = x.ring();
    match (&x.value, ring.modulus()) {
        (Value::Int(n), None) => {
            let (q, r) = n.div_rem(k);
            if r.is_zero() {
                Ok(ring.from_bigint(&q))
            } else {
                Err(Error::NotDivisible(n.to_string(), k.to_string()))
            }
        }
        (Value::Int(n), Some(m)) => {
            let q = modular_div(n, k, &m)?;
            Ok(ring.from_bigint(&q))
        }
        (Value::Poly(p), None) => {
            let q = p.exact_div(k)?;
            ring.element_from_poly(q)
        }
        (Value::Poly(p), Some(m)) => {
            let mut out = SparsePoly::zero(p.n_vars());
            for (mono, c) in p.terms() {
                out.add_term(mono.clone(), modular_div(c, k, &m)?);
            }
            ring.element_from_poly(out)
        }
    }
}

/// Solve `k*y = n` in `Z/m`. Unique solutions need `gcd(k, m) = 1`; with
/// `g = gcd(k, m) > 1` a solution (if any) is one of `g` equally valid ones.
fn modular_div(n: &BigInt, k: &BigInt, m: &BigInt) -> Result<BigInt> {
    let k_red = k.mod_floor(m);
    let g = k_red.gcd(m);
    if g.is_one() {
        let inv = mod_inverse(&k_red, m).expect("coprime");
        Ok((n * inv).mod_floor(m))
    } else if n.mod_floor(&g).is_zero() {
        Err(Error::TorsionAmbiguity(k.to_string()))
    } else {
        Err(Error::NotDivisible(n.to_string(), k.to_string()))
    }
}

pub fn mod_inverse(a: &BigInt, m: &BigInt) -> Option<BigInt> {
    let e = a.extended_gcd(m);
    if e.gcd.is_one() {
        Some(e.x.mod_floor(m))
    } else {
        None
    }
}

/// A ring endomorphism, applied to elements of its ring.
#[derive(Debug, Clone)]
pub enum PhiMap {
    /// The identity map (a Frobenius lift on Z for every p).
    Identity,
    /// For polynomial rings: each generator maps to the given image, with
    /// base-ring constants fixed.
    Generators(Vec<Element>),
    /// The p-th power map; a ring endomorphism exactly in characteristic p.
    CharPPower(u64),
    /// phi derived from a delta-structure: `phi(a) = a^p + p*delta(a)`.
    FromDelta(Arc<crate::delta::DeltaStructure>),
}

impl PhiMap {
    /// The map `x -> x^p` on each generator of a poly ring.
    pub fn power_lift(ring: &RingHandle, p: u64) -> Result<PhiMap> {
        let images = (0..ring.vars().len())
            .map(|i| ring.var_by_index(i).map(|v| v.pow(p)))
            .collect::<Result<Vec<_>>>()?;
        Ok(PhiMap::Generators(images))
    }

    pub fn apply(&self, x: &Element) -> Result<Element> {
        match self {
            PhiMap::Identity => Ok(x.clone()),
            PhiMap::CharPPower(p) => Ok(x.pow(*p)),
            PhiMap::Generators(images) => {
                let ring = x.ring();
                let poly = x.as_poly().ok_or(Error::RingMismatch)?;
                if images.len() != ring.vars().len() {
                    return Err(Error::RingMismatch);
                }
                // Substitute generator images monomial by monomial.
                let mut acc = ring.zero();
                for (mono, c) in poly.terms() {
                    let mut term = ring.from_bigint(c);
                    for (i, &e) in mono.0.iter().enumerate() {
                        if e > 0 {
                            term = term.mul(&images[i].pow(e as u64))?;
                        }
                    }
                    acc = acc.add(&term)?;
                }
                Ok(acc)
            }
            PhiMap::FromDelta(ds) => ds.phi(x),
        }
    }

    pub fn apply_iter(&self, x: &Element, times: usize) -> Result<Element> {
        let mut out = x.clone();
        for _ in 0..times {
            out = self.apply(&out)?;
        }
        Ok(out)
    }

    /// Spot-check that this map is a ring homomorphism congruent to the
    /// p-power map mod p.
    pub fn check_frobenius_lift(
        &self,
        ring: &RingHandle,
        p: u64,
        samples: usize,
        rng: &mut SplitMix64,
    ) -> Result<()> {
        let p_int = BigInt::from(p);
        for _ in 0..samples {
            let x = ring.sample(rng);
            let y = ring.sample(rng);
            let fx = self.apply(&x)?;
            let fy = self.apply(&y)?;
            if self.apply(&x.add(&y)?)? != fx.add(&fy)? || self.apply(&x.mul(&y)?)? != fx.mul(&fy)?
            {
                return Err(Error::NotRingHom(format!("at x={x}, y={y}")));
            }
            let diff = fx.sub(&x.pow(p))?;
            let divisible = if ring.is_torsion_free() {
                diff.divisible_by_int(&p_int)
            } else {
                // The subgroup p*(Z/m) is generated by gcd(p, m), and
                // canonical residues lie in [0, m), so membership is
                // residue divisibility by the gcd. Char p gives gcd = p;
                // p invertible mod m gives gcd = 1 and a vacuous condition.
                let m = BigInt::from(ring.characteristic().clone());
                let g = p_int.gcd(&m);
                diff.divisible_by_int(&g)
            };
            if !divisible {
                return Err(Error::NotFrobeniusLift(format!(
                    "phi(x) - x^{p} = {diff} is not divisible by {p} at x={x}"
                )));
            }
        }
        if self.apply(&ring.one())? != ring.one() {
            return Err(Error::NotRingHom("phi(1) != 1".into()));
        }
        Ok(())
    }
}

/// Evaluate an integer polynomial at the assignment `vars[i] -> points[i]`
/// inside `target`. Integer coefficients embed through the target's one.
pub fn poly_eval(poly: &SparsePoly, points: &[Element], target: &RingHandle) -> Result<Element> {
    if points.len() < poly.n_vars() {
        // Every variable that actually occurs must be covered.
        for (mono, _) in poly.terms() {
            for (i, &e) in mono.0.iter().enumerate() {
                if e > 0 && i >= points.len() {
                    return Err(Error::MissingVariable(format!("#{i}")));
                }
            }
        }
    }
    for pt in points {
        if pt.ring() != target {
            return Err(Error::RingMismatch);
        }
    }
    // Cache powers per variable: max exponent seen per variable.
    let mut max_exp = vec![0u32; poly.n_vars()];
    for (mono, _) in poly.terms() {
        for (i, &e) in mono.0.iter().enumerate() {
            if e > max_exp[i] {
                max_exp[i] = e;
            }
        }
    }
    let mut powers: Vec<Vec<Element>> = Vec::with_capacity(poly.n_vars());
    for (i, &me) in max_exp.iter().enumerate() {
        let mut row = vec![target.one()];
        if me > 0 {
            let base = &points[i];
            for e in 1..=me {
                let prev = &row[(e - 1) as usize];
                row.push(prev.mul(base)?);
            }
        }
        powers.push(row);
    }
    let mut acc = target.zero();
    for (mono, c) in poly.terms() {
        let mut term = target.from_bigint(c);
        for (i, &e) in mono.0.iter().enumerate() {
            if e > 0 {
                term = term.mul(&powers[i][e as usize])?;
            }
        }
        acc = acc.add(&term)?;
    }
    Ok(acc)
}

/// Evaluate with a named assignment, verifying coverage of occurring
/// variables.
pub fn poly_eval_named(
    poly: &SparsePoly,
    poly_vars: &[String],
    assignment: &std::collections::BTreeMap<String, Element>,
    target: &RingHandle,
) -> Result<Element> {
    let mut points = Vec::with_capacity(poly_vars.len());
    for (i, name) in poly_vars.iter().enumerate() {
        match assignment.get(name) {
            Some(e) => points.push(e.clone()),
            None => {
                let occurs = poly.terms().any(|(m, _)| m.0[i] > 0);
                if occurs {
                    return Err(Error::MissingVariable(name.clone()));
                }
                points.push(target.zero());
            }
        }
    }
    poly_eval(poly, &points, target)
}
