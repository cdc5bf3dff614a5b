//! Sparse multivariate polynomials with arbitrary-precision integer
//! coefficients, kept in a unique normal form (graded-lex term order, no
//! zero coefficients) so equality and serialization are canonical.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// Exponent vector in the owning ring's variable order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Monomial(pub Vec<u32>);

impl Monomial {
    pub fn constant(n_vars: usize) -> Self {
        Monomial(vec![0; n_vars])
    }

    pub fn var(n_vars: usize, idx: usize) -> Self {
        let mut e = vec![0; n_vars];
        e[idx] = 1;
        Monomial(e)
    }

    pub fn total_degree(&self) -> u64 {
        self.0.iter().map(|&e| e as u64).sum()
    }

    pub fn is_constant(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        debug_assert_eq!(self.0.len(), other.0.len());
        Monomial(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(&a, &b)| a.checked_add(b).expect("exponent overflow"))
                .collect(),
        )
    }
}

/// Graded-lex: compare total degree first, then exponents left to right.
impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.total_degree()
            .cmp(&other.total_degree())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Sparse polynomial: monomial -> nonzero integer coefficient. The map never
/// stores a zero coefficient, so `terms` is itself the normal form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SparsePoly {
    n_vars: usize,
    terms: BTreeMap<Monomial, BigInt>,
}

impl SparsePoly {
    pub fn zero(n_vars: usize) -> Self {
        SparsePoly {
            n_vars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(n_vars: usize, c: BigInt) -> Self {
        let mut p = Self::zero(n_vars);
        if !c.is_zero() {
            p.terms.insert(Monomial::constant(n_vars), c);
        }
        p
    }

    pub fn var(n_vars: usize, idx: usize) -> Self {
        let mut p = Self::zero(n_vars);
        p.terms.insert(Monomial::var(n_vars, idx), BigInt::one());
        p
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn total_degree(&self) -> u64 {
        self.terms.keys().map(|m| m.total_degree()).max().unwrap_or(0)
    }

    /// Constant term (zero if absent).
    pub fn constant_term(&self) -> BigInt {
        self.terms
            .get(&Monomial::constant(self.n_vars))
            .cloned()
            .unwrap_or_else(BigInt::zero)
    }

    /// Iterate terms in ascending graded-lex order.
    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &BigInt)> {
        self.terms.iter()
    }

    pub fn max_abs_coeff(&self) -> BigInt {
        self.terms
            .values()
            .map(|c| c.abs())
            .max()
            .unwrap_or_else(BigInt::zero)
    }

    pub fn add_term(&mut self, m: Monomial, c: BigInt) {
        debug_assert_eq!(m.0.len(), self.n_vars);
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

    pub fn add(&self, other: &SparsePoly) -> SparsePoly {
        debug_assert_eq!(self.n_vars, other.n_vars);
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn neg(&self) -> SparsePoly {
        SparsePoly {
            n_vars: self.n_vars,
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }

    pub fn sub(&self, other: &SparsePoly) -> SparsePoly {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &SparsePoly) -> SparsePoly {
        debug_assert_eq!(self.n_vars, other.n_vars);
        let mut out = SparsePoly::zero(self.n_vars);
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                out.add_term(m1.mul(m2), c1 * c2);
            }
        }
        out
    }

    pub fn scale(&self, k: &BigInt) -> SparsePoly {
        if k.is_zero() {
            return SparsePoly::zero(self.n_vars);
        }
        SparsePoly {
            n_vars: self.n_vars,
            terms: self.terms.iter().map(|(m, c)| (m.clone(), c * k)).collect(),
        }
    }

    pub fn pow(&self, e: u32) -> SparsePoly {
        if e == 0 {
            return SparsePoly::constant(self.n_vars, BigInt::one());
        }
        let mut result = self.clone();
        let mut base = self.clone();
        let mut exp = e - 1;
        while exp > 0 {
            if exp & 1 == 1 {
                result = result.mul(&base);
            }
            exp >>= 1;
            if exp > 0 {
                base = base.mul(&base);
            }
        }
        result
    }

    /// Reduce every coefficient into `[0, m)`. Used by polynomial rings over
    /// `Z/m` bases.
    pub fn reduce_mod(&self, m: &BigInt) -> SparsePoly {
        let mut out = SparsePoly::zero(self.n_vars);
        for (mono, c) in &self.terms {
            let mut r = c % m;
            if r.is_negative() {
                r += m;
            }
            out.add_term(mono.clone(), r);
        }
        out
    }

    /// Divide every coefficient exactly by `k`, or report the first term that
    /// fails.
    pub fn exact_div(&self, k: &BigInt) -> Result<SparsePoly> {
        if k.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let mut out = SparsePoly::zero(self.n_vars);
        for (m, c) in &self.terms {
            let (q, r) = num_integer::Integer::div_rem(c, k);
            if !r.is_zero() {
                return Err(Error::NotDivisible(c.to_string(), k.to_string()));
            }
            out.add_term(m.clone(), q);
        }
        Ok(out)
    }

    /// `true` when every coefficient is divisible by `k`.
    pub fn divisible_by(&self, k: &BigInt) -> bool {
        !k.is_zero()
            && self
                .terms
                .values()
                .all(|c| num_integer::Integer::is_multiple_of(c, k))
    }

    /// Swap variables according to `perm` (new exponent `i` reads old
    /// exponent `perm[i]`). Used for the a<->b symmetry checks.
    pub fn permute_vars(&self, perm: &[usize]) -> SparsePoly {
        debug_assert_eq!(perm.len(), self.n_vars);
        let mut out = SparsePoly::zero(self.n_vars);
        for (m, c) in &self.terms {
            let e: Vec<u32> = perm.iter().map(|&j| m.0[j]).collect();
            out.add_term(Monomial(e), c.clone());
        }
        out
    }

    /// Serialize terms in descending graded-lex order (leading term first),
    /// matching the on-disk format.
    pub fn to_json_terms(&self) -> Vec<serde_json::Value> {
        self.terms
            .iter()
            .rev()
            .map(|(m, c)| {
                serde_json::json!({
                    "c": c.to_string(),
                    "e": m.0.clone(),
                })
            })
            .collect()
    }

    pub fn to_json(&self, vars: &[String]) -> serde_json::Value {
        serde_json::json!({
            "vars": vars,
            "terms": self.to_json_terms(),
        })
    }

    pub fn from_json(value: &serde_json::Value) -> Result<(Vec<String>, SparsePoly)> {
        let vars: Vec<String> = value
            .get("vars")
            .and_then(|v| v.as_array())
            .ok_or_else(|| Error::InvalidInput("missing `vars`".into()))?
            .iter()
            .map(|v| {
                v.as_str()
                    .map(str::to_owned)
                    .ok_or_else(|| Error::InvalidInput("variable is not a string".into()))
            })
            .collect::<Result<_>>()?;
        let poly = Self::terms_from_json(
            value
                .get("terms")
                .and_then(|v| v.as_array())
                .ok_or_else(|| Error::InvalidInput("missing `terms`".into()))?,
            vars.len(),
        )?;
        Ok((vars, poly))
    }

    pub fn terms_from_json(terms: &[serde_json::Value], n_vars: usize) -> Result<SparsePoly> {
        let mut poly = SparsePoly::zero(n_vars);
        for t in terms {
            let c: BigInt = t
                .get("c")
                .and_then(|v| v.as_str())
                .ok_or_else(|| Error::InvalidInput("term missing `c`".into()))?
                .parse()
                .map_err(|e| Error::InvalidInput(format!("bad coefficient: {e}")))?;
            let e: Vec<u32> = t
                .get("e")
                .and_then(|v| v.as_array())
                .ok_or_else(|| Error::InvalidInput("term missing `e`".into()))?
                .iter()
                .map(|x| {
                    x.as_u64()
                        .and_then(|u| u32::try_from(u).ok())
                        .ok_or_else(|| Error::InvalidInput("bad exponent".into()))
                })
                .collect::<Result<_>>()?;
            if e.len() != n_vars {
                return Err(Error::InvalidInput(format!(
                    "exponent vector length {} does not match {} variables",
                    e.len(),
                    n_vars
                )));
            }
            poly.add_term(Monomial(e), c);
        }
        Ok(poly)
    }

    /// Human-readable rendering with the given variable names.
    pub fn display<'a>(&'a self, vars: &'a [String]) -> PolyDisplay<'a> {
        PolyDisplay { poly: self, vars }
    }
}

pub struct PolyDisplay<'a> {
    poly: &'a SparsePoly,
    vars: &'a [String],
}

impl fmt::Display for PolyDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.poly.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (m, c) in self.poly.terms.iter().rev() {
            let neg = c.is_negative();
            let abs = c.abs();
            if first {
                if neg {
                    write!(f, "-")?;
                }
                first = false;
            } else if neg {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            let mut wrote = false;
            if !abs.is_one() || m.is_constant() {
                write!(f, "{abs}")?;
                wrote = true;
            }
            for (i, &e) in m.0.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                if wrote {
                    write!(f, "*")?;
                }
                write!(f, "{}", self.vars[i])?;
                if e > 1 {
                    write!(f, "^{e}")?;
                }
                wrote = true;
            }
        }
        Ok(())
    }
}
