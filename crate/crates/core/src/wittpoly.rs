//! Universal p-typical Witt polynomials: generation by symbolic unghosting
//! over exact rationals, certification through the Dwork congruence, and a
//! deterministic JSON cache.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::poly::{Monomial, SparsePoly};
use crate::prng::SplitMix64;
use crate::ring::{Element, PhiMap, RingHandle};

pub const SCHEMA_VERSION: u32 = 1;
/// Default cap on the monomial count of any intermediate polynomial.
pub const DEFAULT_TERM_CAP: usize = 2_000_000;

// ---------------------------------------------------------------------------
// Ghost vectors over a concrete ring
// ---------------------------------------------------------------------------

/// The ghost components of a Witt vector: `w_k = sum_{i<=k} p^i a_i^(p^(k-i))`.
#[derive(Debug, Clone, PartialEq)]
pub struct GhostVector {
    pub p: u64,
    pub components: Vec<Element>,
}

impl GhostVector {
    pub fn new(p: u64, components: Vec<Element>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::InvalidInput("ghost vector must be nonempty".into()));
        }
        let ring = components[0].ring().clone();
        if components.iter().any(|c| *c.ring() != ring) {
            return Err(Error::RingMismatch);
        }
        Ok(GhostVector { p, components })
    }

    pub fn ring(&self) -> &RingHandle {
        self.components[0].ring()
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }
}

/// Ghost map: coordinates to ghost components, computed left to right.
pub fn ghost(p: u64, coords: &[Element]) -> Result<GhostVector> {
    if coords.is_empty() {
        return Err(Error::InvalidInput("coordinates must be nonempty".into()));
    }
    let ring = coords[0].ring().clone();
    if coords.iter().any(|c| *c.ring() != ring) {
        return Err(Error::RingMismatch);
    }
    let p_int = BigInt::from(p);
    let mut components = Vec::with_capacity(coords.len());
    for k in 0..coords.len() {
        let mut w = ring.zero();
        let mut p_pow = BigInt::one();
        for (i, coord) in coords.iter().enumerate().take(k + 1) {
            let e = p.pow((k - i) as u32);
            w = w.add(&coord.pow(e).scale(&p_pow))?;
            p_pow *= &p_int;
        }
        components.push(w);
    }
    GhostVector::new(p, components)
}

/// Invert the ghost map over a torsion-free ring:
/// `a_k = (w_k - sum_{i<k} p^i a_i^(p^(k-i))) / p^k`.
pub fn unghost(g: &GhostVector) -> Result<Vec<Element>> {
    let ring = g.ring().clone();
    if !ring.is_torsion_free() {
        return Err(Error::NotTorsionFree);
    }
    let p = g.p;
    let p_int = BigInt::from(p);
    let mut coords: Vec<Element> = Vec::with_capacity(g.len());
    for k in 0..g.len() {
        let mut rest = ring.zero();
        let mut p_pow = BigInt::one();
        for (i, coord) in coords.iter().enumerate() {
            let e = p.pow((k - i) as u32);
            rest = rest.add(&coord.pow(e).scale(&p_pow))?;
            p_pow *= &p_int;
        }
        let numerator = g.components[k].sub(&rest)?;
        let coord = crate::ring::exact_div_int(&numerator, &p_pow).map_err(|e| match e {
            Error::NotDivisible(x, d) => Error::NotIntegral {
                index: k,
                detail: format!("{x} not divisible by {d}"),
            },
            other => other,
        })?;
        coords.push(coord);
    }
    Ok(coords)
}

/// Dwork's integrality criterion: a ghost vector lies in the image of the
/// ghost map iff `g_k = phi(g_{k-1}) mod p^k` for a Frobenius lift `phi` on
/// the coefficients. Serves as an oracle independent of `unghost`.
pub fn dwork_check(g: &GhostVector, phi: &PhiMap, rng: &mut SplitMix64) -> Result<bool> {
    let ring = g.ring().clone();
    if !ring.is_torsion_free() {
        return Err(Error::NotTorsionFree);
    }
    phi.check_frobenius_lift(&ring, g.p, 20, rng)?;
    let p_int = BigInt::from(g.p);
    let mut p_pow = BigInt::one();
    for k in 1..g.len() {
        p_pow *= &p_int;
        let prev = phi.apply(&g.components[k - 1])?;
        let diff = g.components[k].sub(&prev)?;
        if !diff.divisible_by_int(&p_pow) {
            return Ok(false);
        }
    }
    Ok(true)
}

// ---------------------------------------------------------------------------
// Rational sparse polynomials (internal to generation)
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
struct RatPoly {
    n_vars: usize,
    terms: BTreeMap<Monomial, BigRational>,
}

impl RatPoly {
    fn zero(n_vars: usize) -> Self {
        RatPoly {
            n_vars,
            terms: BTreeMap::new(),
        }
    }

    fn var(n_vars: usize, idx: usize) -> Self {
        let mut p = Self::zero(n_vars);
        p.terms
            .insert(Monomial::var(n_vars, idx), BigRational::one());
        p
    }

    fn add_term(&mut self, m: Monomial, c: BigRational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    fn add(&self, other: &RatPoly) -> RatPoly {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    fn sub(&self, other: &RatPoly) -> RatPoly {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), -c.clone());
        }
        out
    }

    fn neg(&self) -> RatPoly {
        RatPoly {
            n_vars: self.n_vars,
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }

    fn mul(&self, other: &RatPoly, cap: usize) -> Result<RatPoly> {
        let mut out = RatPoly::zero(self.n_vars);
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                out.add_term(m1.mul(m2), c1 * c2);
            }
            if out.terms.len() > cap {
                return Err(Error::ResourceLimit(out.terms.len(), cap));
            }
        }
        Ok(out)
    }

    fn pow(&self, e: u64, cap: usize) -> Result<RatPoly> {
        if e == 0 {
            let mut one = RatPoly::zero(self.n_vars);
            one.add_term(Monomial::constant(self.n_vars), BigRational::one());
            return Ok(one);
        }
        let mut result = self.clone();
        let mut base = self.clone();
        let mut exp = e - 1;
        while exp > 0 {
            if exp & 1 == 1 {
                result = result.mul(&base, cap)?;
            }
            exp >>= 1;
            if exp > 0 {
                base = base.mul(&base, cap)?;
            }
        }
        Ok(result)
    }

    fn scale_int(&self, k: &BigInt) -> RatPoly {
        let kr = BigRational::from(k.clone());
        RatPoly {
            n_vars: self.n_vars,
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (m.clone(), c * &kr))
                .collect(),
        }
    }

    fn div_int(&self, k: &BigInt) -> RatPoly {
        let kr = BigRational::from(k.clone());
        RatPoly {
            n_vars: self.n_vars,
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (m.clone(), c / &kr))
                .collect(),
        }
    }

    /// Convert to an integer polynomial; every denominator must be one.
    fn to_int_poly(&self) -> Option<SparsePoly> {
        let mut out = SparsePoly::zero(self.n_vars);
        for (m, c) in &self.terms {
            if !c.denom().is_one() {
                return None;
            }
            out.add_term(m.clone(), c.numer().clone());
        }
        Some(out)
    }
}

// ---------------------------------------------------------------------------
// Universal Witt polynomials
// ---------------------------------------------------------------------------

/// Which arithmetic law a universal polynomial encodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PolyKind {
    Sum,
    Prod,
    Neg,
    Frob,
    Delta,
}

impl PolyKind {
    pub const ALL: [PolyKind; 5] = [
        PolyKind::Sum,
        PolyKind::Prod,
        PolyKind::Neg,
        PolyKind::Frob,
        PolyKind::Delta,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            PolyKind::Sum => "sum",
            PolyKind::Prod => "prod",
            PolyKind::Neg => "neg",
            PolyKind::Frob => "frob",
            PolyKind::Delta => "delta",
        }
    }

    pub fn parse(s: &str) -> Result<PolyKind> {
        match s {
            "sum" => Ok(PolyKind::Sum),
            "prod" => Ok(PolyKind::Prod),
            "neg" => Ok(PolyKind::Neg),
            "frob" => Ok(PolyKind::Frob),
            "delta" => Ok(PolyKind::Delta),
            _ => Err(Error::InvalidInput(format!("unknown kind `{s}`"))),
        }
    }

    /// Sum and prod laws are binary (they use b-variables as well).
    pub fn is_binary(&self) -> bool {
        matches!(self, PolyKind::Sum | PolyKind::Prod)
    }

    /// Highest a-variable index appearing in the `n`-th polynomial.
    pub fn max_var_index(&self, n: usize) -> usize {
        match self {
            PolyKind::Sum | PolyKind::Prod | PolyKind::Neg => n,
            PolyKind::Frob | PolyKind::Delta => n + 1,
        }
    }
}

impl fmt::Display for PolyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

pub fn canonical_vars(kind: PolyKind, n: usize) -> Vec<String> {
    let d = kind.max_var_index(n);
    let mut vars: Vec<String> = (0..=d).map(|i| format!("a{i}")).collect();
    if kind.is_binary() {
        vars.extend((0..=d).map(|i| format!("b{i}")));
    }
    vars
}

/// One universal polynomial with certified integer coefficients: the `n`-th
/// coordinate law for its kind at the prime `p`.
#[derive(Debug, Clone, PartialEq)]
pub struct WittPolynomial {
    pub p: u64,
    pub n: usize,
    pub kind: PolyKind,
    /// Canonical variable names: the a-block, then (for binary kinds) the
    /// b-block.
    pub vars: Vec<String>,
    pub body: SparsePoly,
}

impl WittPolynomial {
    /// Highest variable index used (`d` of the a-block).
    pub fn max_var_index(&self) -> usize {
        self.kind.max_var_index(self.n)
    }

    /// Evaluate at Witt coordinates: `x` covers the a-block, `y` the b-block
    /// for binary kinds. Coordinates beyond the supplied slices default to
    /// zero, which is only correct when the polynomial cannot use them, so
    /// we require full coverage.
    pub fn evaluate(
        &self,
        x: &[Element],
        y: Option<&[Element]>,
        target: &RingHandle,
    ) -> Result<Element> {
        let d = self.max_var_index();
        if x.len() < d + 1 {
            return Err(Error::MissingVariable(format!("a{d}")));
        }
        let mut points: Vec<Element> = x[..=d].to_vec();
        if self.kind.is_binary() {
            let y = y.ok_or_else(|| Error::MissingVariable("b0".into()))?;
            if y.len() < d + 1 {
                return Err(Error::MissingVariable(format!("b{d}")));
            }
            points.extend_from_slice(&y[..=d]);
        }
        crate::ring::poly_eval(&self.body, &points, target)
    }

    fn canonical_record(&self) -> serde_json::Value {
        serde_json::json!({
            "p": self.p,
            "n": self.n,
            "kind": self.kind.as_str(),
            "vars": self.vars,
            "terms": self.body.to_json_terms(),
            "schema_version": SCHEMA_VERSION,
        })
    }

    pub fn checksum(&self) -> String {
        let payload = serde_json::to_string(&self.canonical_record()).expect("serializable");
        format!("{:016x}", fnv1a64(payload.as_bytes()))
    }

    pub fn to_json(&self) -> serde_json::Value {
        let mut record = self.canonical_record();
        record["checksum"] = serde_json::Value::String(self.checksum());
        record
    }

    pub fn from_json(value: &serde_json::Value) -> Result<WittPolynomial> {
        let schema = value
            .get("schema_version")
            .and_then(|v| v.as_u64())
            .ok_or_else(|| Error::CorruptCache("missing schema_version".into()))?;
        if schema != SCHEMA_VERSION as u64 {
            return Err(Error::CorruptCache(format!(
                "schema version {schema} != {SCHEMA_VERSION}"
            )));
        }
        let p = value
            .get("p")
            .and_then(|v| v.as_u64())
            .ok_or_else(|| Error::CorruptCache("missing p".into()))?;
        let n = value
            .get("n")
            .and_then(|v| v.as_u64())
            .ok_or_else(|| Error::CorruptCache("missing n".into()))? as usize;
        let kind = PolyKind::parse(
            value
                .get("kind")
                .and_then(|v| v.as_str())
                .ok_or_else(|| Error::CorruptCache("missing kind".into()))?,
        )
        .map_err(|_| Error::CorruptCache("unknown kind".into()))?;
        let vars: Vec<String> = value
            .get("vars")
            .and_then(|v| v.as_array())
            .ok_or_else(|| Error::CorruptCache("missing vars".into()))?
            .iter()
            .map(|v| {
                v.as_str()
                    .map(str::to_owned)
                    .ok_or_else(|| Error::CorruptCache("bad variable".into()))
            })
            .collect::<Result<_>>()?;
        let terms = value
            .get("terms")
            .and_then(|v| v.as_array())
            .ok_or_else(|| Error::CorruptCache("missing terms".into()))?;
        let body = SparsePoly::terms_from_json(terms, vars.len())
            .map_err(|e| Error::CorruptCache(format!("bad terms: {e}")))?;
        let poly = WittPolynomial {
            p,
            n,
            kind,
            vars,
            body,
        };
        if let Some(stored) = value.get("checksum").and_then(|v| v.as_str()) {
            let fresh = poly.checksum();
            if stored != fresh {
                return Err(Error::CorruptCache(format!(
                    "checksum mismatch: stored {stored}, computed {fresh}"
                )));
            }
        } else {
            return Err(Error::CorruptCache("missing checksum".into()));
        }
        Ok(poly)
    }
}

fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

// ---------------------------------------------------------------------------
// Generation by symbolic unghosting over the rationals
// ---------------------------------------------------------------------------

/// Symbolic ghost polynomial `w_k` in the a-block (or b-block with
/// `offset`): `sum_{i<=k} p^i x_{offset+i}^(p^(k-i))`.
fn ghost_poly(n_vars: usize, offset: usize, p: u64, k: usize, cap: usize) -> Result<RatPoly> {
    let p_int = BigInt::from(p);
    let mut acc = RatPoly::zero(n_vars);
    let mut p_pow = BigInt::one();
    for i in 0..=k {
        let e = p.pow((k - i) as u32);
        let term = RatPoly::var(n_vars, offset + i).pow(e, cap)?.scale_int(&p_pow);
        acc = acc.add(&term);
        p_pow *= &p_int;
    }
    Ok(acc)
}

/// The ghost-side targets `G_0..G_n` that define each polynomial family.
fn ghost_targets(p: u64, n: usize, kind: PolyKind, cap: usize) -> Result<Vec<RatPoly>> {
    let d = kind.max_var_index(n);
    let n_vars = if kind.is_binary() { 2 * (d + 1) } else { d + 1 };
    let p_int = BigInt::from(p);
    let mut targets = Vec::with_capacity(n + 1);
    for k in 0..=n {
        let t = match kind {
            PolyKind::Sum => {
                let wa = ghost_poly(n_vars, 0, p, k, cap)?;
                let wb = ghost_poly(n_vars, d + 1, p, k, cap)?;
                wa.add(&wb)
            }
            PolyKind::Prod => {
                let wa = ghost_poly(n_vars, 0, p, k, cap)?;
                let wb = ghost_poly(n_vars, d + 1, p, k, cap)?;
                wa.mul(&wb, cap)?
            }
            PolyKind::Neg => ghost_poly(n_vars, 0, p, k, cap)?.neg(),
            PolyKind::Frob => ghost_poly(n_vars, 0, p, k + 1, cap)?,
            PolyKind::Delta => {
                let w_next = ghost_poly(n_vars, 0, p, k + 1, cap)?;
                let w_k = ghost_poly(n_vars, 0, p, k, cap)?;
                w_next.sub(&w_k.pow(p, cap)?).div_int(&p_int)
            }
        };
        targets.push(t);
    }
    Ok(targets)
}

/// Generate the whole family `0..=n` for one kind: unghost the ghost-side
/// targets over exact rationals and certify integrality.
pub fn gen_witt_family(
    p: u64,
    n: usize,
    kind: PolyKind,
    cap: usize,
) -> Result<Vec<WittPolynomial>> {
    if !crate::ring::is_prime(&num_bigint::BigUint::from(p)) {
        return Err(Error::NonPrimeModulus(p.to_string()));
    }
    let targets = ghost_targets(p, n, kind, cap)?;
    let n_vars = targets[0].n_vars;
    let p_int = BigInt::from(p);

    // Independent integrality oracle before unghosting: the Dwork congruence
    // on the symbolic targets, with the p-power substitution as the
    // Frobenius lift on coefficients.
    if !dwork_check_rat(&targets, p, cap)? {
        panic!(
            "internal error: ghost targets for ({p}, {n}, {kind}) fail the Dwork congruence; \
             the theory guarantees integrality"
        );
    }

    let mut family: Vec<SparsePoly> = Vec::with_capacity(n + 1);
    // pow_cache[i] holds S_i^(p^(k-i)) at the top of round k.
    let mut pow_cache: Vec<RatPoly> = Vec::with_capacity(n + 1);
    let mut p_pow_k = BigInt::one();
    for (k, target) in targets.iter().enumerate() {
        for cached in pow_cache.iter_mut() {
            *cached = cached.pow(p, cap)?;
        }
        let mut rest = RatPoly::zero(n_vars);
        let mut p_pow = BigInt::one();
        for cached in &pow_cache {
            rest = rest.add(&cached.scale_int(&p_pow));
            p_pow *= &p_int;
        }
        let s_k = target.sub(&rest).div_int(&p_pow_k);
        let body = s_k.to_int_poly().unwrap_or_else(|| {
            panic!(
                "internal error: coordinate {k} of ({p}, {n}, {kind}) is not integral; \
                 the theory guarantees integrality"
            )
        });
        pow_cache.push(s_k);
        family.push(body);
        p_pow_k *= &p_int;
    }

    // For the Frobenius family, certify f_k = a_k^p as polynomials over F_p.
    if kind == PolyKind::Frob {
        for (k, body) in family.iter().enumerate() {
            let ak_p = SparsePoly::var(n_vars, k).pow(p as u32);
            assert!(
                body.sub(&ak_p).divisible_by(&p_int),
                "internal error: f_{k} is not congruent to a_{k}^{p} mod {p}"
            );
        }
    }

    // Re-index each member onto its own canonical variable block, so the
    // serialized member is identical no matter which family produced it.
    family
        .into_iter()
        .enumerate()
        .map(|(k, body)| {
            let vars = canonical_vars(kind, k);
            let body = narrow_to_member(&body, kind, n, k)?;
            Ok(WittPolynomial {
                p,
                n: k,
                kind,
                vars,
                body,
            })
        })
        .collect()
}

/// Move a member body from the family-wide variable layout
/// `[a0..a_D, b0..b_D]` (D for the family's top index) down to the member's
/// own layout `[a0..a_d, b0..b_d]`.
fn narrow_to_member(
    body: &SparsePoly,
    kind: PolyKind,
    family_n: usize,
    k: usize,
) -> Result<SparsePoly> {
    let big_d = kind.max_var_index(family_n);
    let small_d = kind.max_var_index(k);
    let out_vars = if kind.is_binary() {
        2 * (small_d + 1)
    } else {
        small_d + 1
    };
    let mut out = SparsePoly::zero(out_vars);
    for (m, c) in body.terms() {
        let mut e = vec![0u32; out_vars];
        for (j, &exp) in m.0.iter().enumerate() {
            if exp == 0 {
                continue;
            }
            let new_idx = if j <= small_d {
                j
            } else if j > big_d && j - (big_d + 1) <= small_d {
                (j - (big_d + 1)) + (small_d + 1)
            } else {
                panic!(
                    "internal error: member {k} of a family up to {family_n} uses variable #{j} \
                     beyond its own block"
                );
            };
            e[new_idx] = exp;
        }
        out.add_term(Monomial(e), c.clone());
    }
    Ok(out)
}

/// Dwork congruence on rational ghost targets: `G_k = phi(G_{k-1}) mod p^k`
/// where `phi` substitutes each variable by its p-th power.
fn dwork_check_rat(targets: &[RatPoly], p: u64, cap: usize) -> Result<bool> {
    let p_int = BigInt::from(p);
    let mut modulus = BigInt::one();
    for k in 1..targets.len() {
        modulus *= &p_int;
        let prev = substitute_p_power(&targets[k - 1], p, cap)?;
        let diff = targets[k].sub(&prev);
        for c in diff.terms.values() {
            if !c.denom().is_one() {
                return Ok(false);
            }
            if !num_integer::Integer::is_multiple_of(c.numer(), &modulus) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

fn substitute_p_power(poly: &RatPoly, p: u64, cap: usize) -> Result<RatPoly> {
    let mut out = RatPoly::zero(poly.n_vars);
    for (m, c) in &poly.terms {
        let e: Vec<u32> = m
            .0
            .iter()
            .map(|&x| x.checked_mul(p as u32).expect("exponent overflow"))
            .collect();
        out.add_term(Monomial(e), c.clone());
    }
    if out.terms.len() > cap {
        return Err(Error::ResourceLimit(out.terms.len(), cap));
    }
    Ok(out)
}

/// Generate the single polynomial of index `n` (computing the family it
/// depends on).
pub fn gen_witt_poly(p: u64, n: usize, kind: PolyKind) -> Result<WittPolynomial> {
    gen_witt_poly_capped(p, n, kind, DEFAULT_TERM_CAP)
}

pub fn gen_witt_poly_capped(
    p: u64,
    n: usize,
    kind: PolyKind,
    cap: usize,
) -> Result<WittPolynomial> {
    let mut family = gen_witt_family(p, n, kind, cap)?;
    Ok(family.pop().expect("family is nonempty"))
}

// ---------------------------------------------------------------------------
// Cache
// ---------------------------------------------------------------------------

/// Directory used by `PolyStore` when none is given: `$WITTKIT_CACHE` or
/// `./witt-cache`.
pub fn default_cache_dir() -> PathBuf {
    std::env::var_os("WITTKIT_CACHE")
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("./witt-cache"))
}

/// Serialize a set of polynomials as a JSON array of records.
pub fn save_polys(path: &Path, polys: &[WittPolynomial]) -> Result<()> {
    let records: Vec<serde_json::Value> = polys.iter().map(|p| p.to_json()).collect();
    let body = serde_json::to_string(&records)?;
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    // Write-then-rename so concurrent writers of identical content are safe.
    let tmp = path.with_extension(format!("tmp.{}", std::process::id()));
    std::fs::write(&tmp, body)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

pub fn load_polys(path: &Path) -> Result<Vec<WittPolynomial>> {
    let body = std::fs::read_to_string(path)?;
    let records: serde_json::Value =
        serde_json::from_str(&body).map_err(|e| Error::CorruptCache(e.to_string()))?;
    let array = records
        .as_array()
        .ok_or_else(|| Error::CorruptCache("expected a JSON array".into()))?;
    array.iter().map(WittPolynomial::from_json).collect()
}

/// An in-memory set of generated polynomials, optionally mirrored to a cache
/// directory keyed by `(p, n, kind, schema)`.
#[derive(Debug)]
pub struct PolyStore {
    cache_dir: Option<PathBuf>,
    cap: usize,
    polys: std::sync::Mutex<BTreeMap<(u64, usize, PolyKind), WittPolynomial>>,
}

impl PolyStore {
    pub fn in_memory() -> Self {
        PolyStore {
            cache_dir: None,
            cap: DEFAULT_TERM_CAP,
            polys: std::sync::Mutex::new(BTreeMap::new()),
        }
    }

    pub fn with_cache_dir(dir: PathBuf) -> Self {
        PolyStore {
            cache_dir: Some(dir),
            cap: DEFAULT_TERM_CAP,
            polys: std::sync::Mutex::new(BTreeMap::new()),
        }
    }

    pub fn with_cap(mut self, cap: usize) -> Self {
        self.cap = cap;
        self
    }

    fn cache_path(&self, p: u64, n: usize, kind: PolyKind) -> Option<PathBuf> {
        self.cache_dir.as_ref().map(|dir| {
            dir.join(format!(
                "witt_p{p}_{kind}_{n}_v{SCHEMA_VERSION}.json",
                kind = kind.as_str()
            ))
        })
    }

    /// Fetch one polynomial, generating (and caching) the family on demand.
    pub fn get(&self, p: u64, n: usize, kind: PolyKind) -> Result<WittPolynomial> {
        if let Some(found) = self.polys.lock().unwrap().get(&(p, n, kind)) {
            return Ok(found.clone());
        }
        if let Some(path) = self.cache_path(p, n, kind) {
            if path.exists() {
                match load_polys(&path) {
                    Ok(polys) => {
                        if let Some(found) = polys
                            .into_iter()
                            .find(|q| q.p == p && q.n == n && q.kind == kind)
                        {
                            self.polys
                                .lock()
                                .unwrap()
                                .insert((p, n, kind), found.clone());
                            return Ok(found);
                        }
                    }
                    Err(Error::CorruptCache(_)) => {
                        // Regenerate below; a fresh write repairs the entry.
                    }
                    Err(e) => return Err(e),
                }
            }
        }
        let family = gen_witt_family(p, n, kind, self.cap)?;
        let mut polys = self.polys.lock().unwrap();
        for member in &family {
            polys.insert((p, member.n, kind), member.clone());
        }
        drop(polys);
        for member in &family {
            if let Some(path) = self.cache_path(p, member.n, kind) {
                save_polys(&path, std::slice::from_ref(member))?;
            }
        }
        Ok(family.into_iter().last().expect("nonempty family"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z() -> RingHandle {
        RingHandle::integers()
    }

    fn ints(ns: &[i64]) -> Vec<Element> {
        let ring = z();
        ns.iter().map(|&n| ring.from_int(n)).collect()
    }

    #[test]
    fn ghost_direct_evaluation() {
        // p = 2, (2, -1): w_1 = 2^2 + 2*(-1) = 2.
        let g = ghost(2, &ints(&[2, -1])).unwrap();
        assert_eq!(g.components, ints(&[2, 2]));
        // Teichmueller of 1 has constant ghost vector.
        let g1 = ghost(5, &ints(&[1, 0, 0])).unwrap();
        assert_eq!(g1.components, ints(&[1, 1, 1]));
        // Zero maps to zero.
        let g0 = ghost(3, &ints(&[0, 0, 0])).unwrap();
        assert_eq!(g0.components, ints(&[0, 0, 0]));
    }

    #[test]
    fn unghost_inverts_ghost() {
        let g = GhostVector::new(2, ints(&[2, 2])).unwrap();
        assert_eq!(unghost(&g).unwrap(), ints(&[2, -1]));
        let g1 = GhostVector::new(7, ints(&[1, 1, 1])).unwrap();
        assert_eq!(unghost(&g1).unwrap(), ints(&[1, 0, 0]));
    }

    #[test]
    fn unghost_rejects_non_integral() {
        let g = GhostVector::new(2, ints(&[0, 1])).unwrap();
        assert!(matches!(
            unghost(&g),
            Err(Error::NotIntegral { index: 1, .. })
        ));
    }

    #[test]
    fn dwork_matches_unghost_verdict() {
        let mut rng = SplitMix64::new(1);
        let good = GhostVector::new(2, ints(&[2, 2])).unwrap();
        assert!(dwork_check(&good, &PhiMap::Identity, &mut rng).unwrap());
        let bad = GhostVector::new(2, ints(&[0, 1])).unwrap();
        assert!(!dwork_check(&bad, &PhiMap::Identity, &mut rng).unwrap());
        // A single component has no congruences to check.
        let single = GhostVector::new(2, ints(&[17])).unwrap();
        assert!(dwork_check(&single, &PhiMap::Identity, &mut rng).unwrap());
    }

    /// Build the expected polynomial from ring operations, as an independent
    /// construction path.
    fn poly_ring(vars: &[&str]) -> RingHandle {
        RingHandle::poly_over(z(), vars).unwrap()
    }

    #[test]
    fn s0_is_a0_plus_b0_for_every_p() {
        for p in [2u64, 3, 5] {
            let s0 = gen_witt_poly(p, 0, PolyKind::Sum).unwrap();
            let ring = poly_ring(&["a0", "b0"]);
            let expected = ring.var("a0").unwrap().add(&ring.var("b0").unwrap()).unwrap();
            assert_eq!(&s0.body, expected.as_poly().unwrap(), "p = {p}");
        }
    }

    #[test]
    fn p1_matches_closed_form() {
        // P_1 = a0^p b1 + a1 b0^p + p a1 b1, the unique symmetric solution
        // of w_1(P_0, P_1) = w_1(a) w_1(b).
        for p in [2u64, 3, 5] {
            let p1 = gen_witt_poly(p, 1, PolyKind::Prod).unwrap();
            let ring = poly_ring(&["a0", "a1", "b0", "b1"]);
            let a0 = ring.var("a0").unwrap();
            let a1 = ring.var("a1").unwrap();
            let b0 = ring.var("b0").unwrap();
            let b1 = ring.var("b1").unwrap();
            let expected = a0
                .pow(p)
                .mul(&b1)
                .unwrap()
                .add(&a1.mul(&b0.pow(p)).unwrap())
                .unwrap()
                .add(&a1.mul(&b1).unwrap().scale(&BigInt::from(p)))
                .unwrap();
            assert_eq!(&p1.body, expected.as_poly().unwrap(), "p = {p}");
        }
    }

    #[test]
    fn s1_at_p2_is_a1_plus_b1_minus_a0b0() {
        let s1 = gen_witt_poly(2, 1, PolyKind::Sum).unwrap();
        let ring = poly_ring(&["a0", "a1", "b0", "b1"]);
        let expected = ring
            .var("a1")
            .unwrap()
            .add(&ring.var("b1").unwrap())
            .unwrap()
            .sub(&ring.var("a0").unwrap().mul(&ring.var("b0").unwrap()).unwrap())
            .unwrap();
        assert_eq!(&s1.body, expected.as_poly().unwrap());
    }

    #[test]
    fn s1_at_p3_expands_the_cube_carry() {
        // S_1 = a1 + b1 + (a0^3 + b0^3 - (a0+b0)^3)/3 = a1 + b1 - a0^2 b0 - a0 b0^2.
        let s1 = gen_witt_poly(3, 1, PolyKind::Sum).unwrap();
        let ring = poly_ring(&["a0", "a1", "b0", "b1"]);
        let a0 = ring.var("a0").unwrap();
        let a1 = ring.var("a1").unwrap();
        let b0 = ring.var("b0").unwrap();
        let b1 = ring.var("b1").unwrap();
        let expected = a1
            .add(&b1)
            .unwrap()
            .sub(&a0.pow(2).mul(&b0).unwrap())
            .unwrap()
            .sub(&a0.mul(&b0.pow(2)).unwrap())
            .unwrap();
        assert_eq!(&s1.body, expected.as_poly().unwrap());
    }

    #[test]
    fn corrupted_coefficient_is_detected() {
        // Content corruption with intact structure: a flipped coefficient
        // changes the canonical checksum.
        let poly = gen_witt_poly(2, 1, PolyKind::Sum).unwrap();
        let mut record = poly.to_json();
        record["terms"][0]["c"] = serde_json::json!("7");
        assert!(matches!(
            WittPolynomial::from_json(&record),
            Err(Error::CorruptCache(_))
        ));
        // A file that merely re-encodes the same polynomial (an extra zero
        // term) still loads: the checksum covers the normal form.
        let mut record2 = poly.to_json();
        let terms = record2["terms"].as_array_mut().unwrap();
        let mut zero_term = terms[0].clone();
        zero_term["c"] = serde_json::json!("0");
        terms.push(zero_term);
        assert_eq!(WittPolynomial::from_json(&record2).unwrap(), poly);
    }

    #[test]
    fn s1_evaluates_in_f2() {
        // S_1 at a = (1,0), b = (1,0) over F_2 is 1: the carry of 1 + 1.
        let s1 = gen_witt_poly(2, 1, PolyKind::Sum).unwrap();
        let f2 = RingHandle::prime_field(2).unwrap();
        let x = vec![f2.one(), f2.zero()];
        let v = s1.evaluate(&x, Some(&x), &f2).unwrap();
        assert_eq!(v, f2.one());
    }

    #[test]
    fn frob_at_p2_n1() {
        // f_1 = -a1^2 - 2 a0^2 a1 + 2 a2, and f_0 = a0^2 + 2 a1.
        let f = gen_witt_family(2, 1, PolyKind::Frob, DEFAULT_TERM_CAP).unwrap();
        // f_0 lives on [a0, a1].
        let r0 = poly_ring(&["a0", "a1"]);
        let f0_expected = r0
            .var("a0")
            .unwrap()
            .pow(2)
            .add(&r0.var("a1").unwrap().scale(&BigInt::from(2)))
            .unwrap();
        assert_eq!(&f[0].body, f0_expected.as_poly().unwrap());
        let ring = poly_ring(&["a0", "a1", "a2"]);
        let a0 = ring.var("a0").unwrap();
        let a1 = ring.var("a1").unwrap();
        let a2 = ring.var("a2").unwrap();
        let f1_expected = a1
            .pow(2)
            .neg()
            .sub(&a0.pow(2).mul(&a1).unwrap().scale(&BigInt::from(2)))
            .unwrap()
            .add(&a2.scale(&BigInt::from(2)))
            .unwrap();
        assert_eq!(&f[1].body, f1_expected.as_poly().unwrap());
    }

    #[test]
    fn delta_at_p2_n0_is_a1() {
        let d = gen_witt_poly(2, 0, PolyKind::Delta).unwrap();
        let ring = poly_ring(&["a0", "a1"]);
        assert_eq!(&d.body, ring.var("a1").unwrap().as_poly().unwrap());
    }

    #[test]
    fn neg_at_p2_n1() {
        let family = gen_witt_family(2, 1, PolyKind::Neg, DEFAULT_TERM_CAP).unwrap();
        // Member 0 lives on its own one-variable block.
        let r0 = poly_ring(&["a0"]);
        assert_eq!(&family[0].body, r0.var("a0").unwrap().neg().as_poly().unwrap());
        let ring = poly_ring(&["a0", "a1"]);
        let a0 = ring.var("a0").unwrap();
        let a1 = ring.var("a1").unwrap();
        let expected1 = a1.neg().sub(&a0.pow(2)).unwrap();
        assert_eq!(&family[1].body, expected1.as_poly().unwrap());
    }

    #[test]
    fn sum_and_prod_bodies_are_symmetric() {
        for p in [2u64, 3] {
            for n in 0..=2usize {
                for kind in [PolyKind::Sum, PolyKind::Prod] {
                    let w = gen_witt_poly(p, n, kind).unwrap();
                    let half = w.vars.len() / 2;
                    let perm: Vec<usize> = (half..2 * half).chain(0..half).collect();
                    assert_eq!(
                        w.body,
                        w.body.permute_vars(&perm),
                        "{kind} p={p} n={n} not symmetric"
                    );
                }
            }
        }
    }

    #[test]
    fn resource_limit_fires() {
        assert!(matches!(
            gen_witt_poly_capped(2, 3, PolyKind::Prod, 10),
            Err(Error::ResourceLimit(..))
        ));
    }

    #[test]
    fn composite_p_is_rejected() {
        assert!(matches!(
            gen_witt_poly(4, 0, PolyKind::Sum),
            Err(Error::NonPrimeModulus(_))
        ));
    }

    #[test]
    fn cache_round_trip() {
        let dir = std::env::temp_dir().join(format!("wittkit-test-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("set.json");
        let mut polys = Vec::new();
        for kind in PolyKind::ALL {
            for n in 0..=3usize {
                polys.push(gen_witt_poly(2, n, kind).unwrap());
            }
        }
        save_polys(&path, &polys).unwrap();
        let loaded = load_polys(&path).unwrap();
        assert_eq!(polys.len(), loaded.len());
        for (a, b) in polys.iter().zip(&loaded) {
            assert_eq!(a, b);
        }
        std::fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn wrong_schema_version_is_corrupt() {
        let poly = gen_witt_poly(2, 1, PolyKind::Sum).unwrap();
        let mut record = poly.to_json();
        record["schema_version"] = serde_json::json!(999);
        assert!(matches!(
            WittPolynomial::from_json(&record),
            Err(Error::CorruptCache(_))
        ));
    }

    #[test]
    fn tampered_checksum_is_corrupt() {
        let poly = gen_witt_poly(2, 1, PolyKind::Sum).unwrap();
        let mut record = poly.to_json();
        record["checksum"] = serde_json::json!("0000000000000000");
        assert!(matches!(
            WittPolynomial::from_json(&record),
            Err(Error::CorruptCache(_))
        ));
    }

    #[test]
    fn loaded_poly_evaluates_like_fresh_one() {
        let dir = std::env::temp_dir().join(format!("wittkit-test-eval-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("s1.json");
        let fresh = gen_witt_poly(3, 1, PolyKind::Sum).unwrap();
        save_polys(&path, std::slice::from_ref(&fresh)).unwrap();
        let loaded = load_polys(&path).unwrap().pop().unwrap();
        let z9 = RingHandle::integers_mod(9).unwrap();
        let mut rng = SplitMix64::new(77);
        for _ in 0..100 {
            let x: Vec<Element> = (0..2).map(|_| z9.sample(&mut rng)).collect();
            let y: Vec<Element> = (0..2).map(|_| z9.sample(&mut rng)).collect();
            assert_eq!(
                fresh.evaluate(&x, Some(&y), &z9).unwrap(),
                loaded.evaluate(&x, Some(&y), &z9).unwrap()
            );
        }
        std::fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn store_generates_and_reuses() {
        let store = PolyStore::in_memory();
        let a = store.get(2, 2, PolyKind::Sum).unwrap();
        let b = store.get(2, 2, PolyKind::Sum).unwrap();
        assert_eq!(a, b);
        // Lower members of the family were cached too.
        let s0 = store.get(2, 0, PolyKind::Sum).unwrap();
        assert_eq!(s0.n, 0);
    }

    #[test]
    fn store_cache_dir_round_trip_and_corruption_recovery() {
        let dir = std::env::temp_dir().join(format!("wittkit-store-{}", std::process::id()));
        std::fs::remove_dir_all(&dir).ok();
        {
            let store = PolyStore::with_cache_dir(dir.clone());
            store.get(2, 2, PolyKind::Prod).unwrap();
        }
        let key_file = dir.join(format!("witt_p2_prod_2_v{SCHEMA_VERSION}.json"));
        assert!(key_file.exists());
        // A fresh store reads the cached file back.
        {
            let store = PolyStore::with_cache_dir(dir.clone());
            let cached = store.get(2, 2, PolyKind::Prod).unwrap();
            assert_eq!(cached, gen_witt_poly(2, 2, PolyKind::Prod).unwrap());
        }
        // Corrupt bytes are detected and regenerated in place.
        std::fs::write(&key_file, "[{\"schema_version\": 999}]").unwrap();
        {
            let store = PolyStore::with_cache_dir(dir.clone());
            let regenerated = store.get(2, 2, PolyKind::Prod).unwrap();
            assert_eq!(regenerated, gen_witt_poly(2, 2, PolyKind::Prod).unwrap());
        }
        let repaired = load_polys(&key_file).unwrap();
        assert_eq!(repaired[0], gen_witt_poly(2, 2, PolyKind::Prod).unwrap());
        std::fs::remove_dir_all(&dir).ok();
    }
}
