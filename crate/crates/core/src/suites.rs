//! Named invariant suites. Each suite pins its sample counts and grids and
//! reports one line per check; every suite is deterministic for a fixed
//! seed. The CLI `check` subcommand and the acceptance tests are thin
//! wrappers around these.

use std::time::Instant;

use num_bigint::BigInt;

use crate::boxprod::{box_free, ModCartierSpace, ModulePhi};
use crate::cartier::{
    cartier_perfection_check, CartierDeltaCarrier, CartierSpace, Mode, PhiRing,
};
use crate::delta::{
    check_delta_axioms_on, delta_witt, free_delta_ring, sum_rule_term, DeltaStructure,
    WittDeltaCarrier,
};
use crate::error::{Error, Result};
use crate::prng::SplitMix64;
use crate::report::{CheckLine, SuiteReport};
use crate::ring::{PhiMap, RingHandle};
use crate::squarezero::square_zero_check;
use crate::tower::{tower_build, tower_self_check, tower_vs_witt, TScalar, TowerBase};
use crate::witt::{iso_wn_fp, iso_wn_fp_inverse, WittContext, WittVec};
use crate::wittpoly::{gen_witt_poly, PolyKind};

pub const ALL_SUITES: &[&str] = &[
    "polys",
    "ghosthom",
    "wittfp",
    "structural",
    "wittaxioms",
    "cofree",
    "deltaaxioms",
    "deltacartier",
    "squarezero",
    "tower",
    "boxprod",
    "perfection",
    "naturality",
];

/// Narrow a suite's built-in grid to chosen primes and (where a suite has
/// an index grid) one index.
#[derive(Debug, Clone, Default)]
pub struct SuiteFilter {
    pub ps: Option<Vec<u64>>,
    pub n: Option<usize>,
}

impl SuiteFilter {
    pub fn keep_p(&self, p: u64) -> bool {
        self.ps.as_ref().is_none_or(|ps| ps.contains(&p))
    }

    pub fn keep_n(&self, n: usize) -> bool {
        self.n.is_none_or(|want| want == n)
    }
}

/// Run one suite by name over its full built-in grid.
pub fn run_suite(name: &str, seed: u64) -> Result<SuiteReport> {
    run_suite_filtered(name, seed, &SuiteFilter::default())
}

pub fn run_suite_filtered(name: &str, seed: u64, filter: &SuiteFilter) -> Result<SuiteReport> {
    let report = match name {
        "polys" => suite_polys(seed, filter),
        "ghosthom" => suite_ghosthom(seed, filter),
        "wittfp" => suite_wittfp(seed, filter),
        "structural" => suite_structural(seed, filter),
        "wittaxioms" => suite_wittaxioms(seed, filter),
        "cofree" => suite_cofree(seed),
        "deltaaxioms" => suite_deltaaxioms(seed, filter),
        "deltacartier" => suite_deltacartier(seed, filter),
        "squarezero" => suite_squarezero(seed, filter),
        "tower" => suite_tower(seed, filter),
        "boxprod" => suite_boxprod(seed, filter),
        "perfection" => suite_perfection(seed, filter),
        "naturality" => suite_naturality(seed, filter),
        _ => return Err(Error::InvalidInput(format!("unknown suite `{name}`"))),
    }?;
    if report.checks.is_empty() {
        return Err(Error::InvalidInput(format!(
            "the requested filter selects nothing from suite `{name}`"
        )));
    }
    Ok(report)
}

fn poly_ring_ab(d: usize) -> Result<RingHandle> {
    let mut names: Vec<String> = (0..=d).map(|i| format!("a{i}")).collect();
    names.extend((0..=d).map(|i| format!("b{i}")));
    RingHandle::poly_over_named(RingHandle::integers(), names)
}

/// The generated S_0, S_1, P_0, P_1 match their closed forms, built here
/// through independent ring operations.
pub fn suite_polys(seed: u64, filter: &SuiteFilter) -> Result<SuiteReport> {
    let mut checks = Vec::new();
    for p in [2u64, 3, 5].into_iter().filter(|&p| filter.keep_p(p)) {
        let ring = poly_ring_ab(1)?;
        let a0 = ring.var("a0")?;
        let a1 = ring.var("a1")?;
        let b0 = ring.var("b0")?;
        let b1 = ring.var("b1")?;

        // S_0 = a0 + b0 lives on the two-variable block (a0, b0).
        let s0 = gen_witt_poly(p, 0, PolyKind::Sum)?;
        let small = poly_ring_ab(0)?;
        let s0_got = small.element_from_poly(s0.body.clone())?;
        let s0_want = small.var("a0")?.add(&small.var("b0")?)?;
        checks.push(CheckLine::from_witness(
            &format!("s0_matches_closed_form_p{p}"),
            (s0_got != s0_want).then(|| format!("S_0 = {s0_got}")),
        ));

        // S_1 = a1 + b1 + (a0^p + b0^p - (a0+b0)^p)/p.
        let s1 = gen_witt_poly(p, 1, PolyKind::Sum)?;
        let coeffs = crate::delta::sum_rule_coefficients(p);
        let s1_want = a1.add(&b1)?.add(&sum_rule_term(&a0, &b0, &coeffs)?)?;
        let s1_got = ring.element_from_poly(s1.body.clone())?;
        checks.push(CheckLine::from_witness(
            &format!("s1_matches_closed_form_p{p}"),
            (s1_got != s1_want).then(|| format!("S_1 = {s1_got}, expected {s1_want}")),
        ));

        // P_0 = a0 b0.
        let p0 = gen_witt_poly(p, 0, PolyKind::Prod)?;
        let p0_got = small.element_from_poly(p0.body.clone())?;
        let p0_want = small.var("a0")?.mul(&small.var("b0")?)?;
        checks.push(CheckLine::from_witness(
            &format!("p0_matches_closed_form_p{p}"),
            (p0_got != p0_want).then(|| format!("P_0 = {p0_got}")),
        ));

        // P_1 = a0^p b1 + a1 b0^p + p a1 b1: the unique symmetric solution
        // of w_1(P_0, P_1) = w_1(a) w_1(b).
        let p1 = gen_witt_poly(p, 1, PolyKind::Prod)?;
        let p1_want = a0
            .pow(p)
            .mul(&b1)?
            .add(&a1.mul(&b0.pow(p))?)?
            .add(&a1.mul(&b1)?.scale(&BigInt::from(p)))?;
        let p1_got = ring.element_from_poly(p1.body.clone())?;
        checks.push(CheckLine::from_witness(
            &format!("p1_matches_closed_form_p{p}"),
            (p1_got != p1_want).then(|| format!("P_1 = {p1_got}, expected {p1_want}")),
        ));
    }
    Ok(SuiteReport::new("polys", seed, checks))
}

/// Symbolic ghost-homomorphism certification: in Z[a_0..a_3, b_0..b_3],
/// applying the sum (resp. product) polynomials and taking ghosts equals the
/// componentwise sum (resp. product) of the ghost vectors, exactly.
pub fn suite_ghosthom(seed: u64, filter: &SuiteFilter) -> Result<SuiteReport> {
    let mut checks = Vec::new();
    for p in [2u64, 3].into_iter().filter(|&p| filter.keep_p(p)) {
        let n = 3usize;
        let ring = poly_ring_ab(n)?;
        let ctx = WittContext::new(p, ring.clone(), n + 1)?;
        let x = ctx.from_coords(
            (0..=n)
                .map(|i| ring.var(&format!("a{i}")))
                .collect::<Result<_>>()?,
        )?;
        let y = ctx.from_coords(
            (0..=n)
                .map(|i| ring.var(&format!("b{i}")))
                .collect::<Result<_>>()?,
        )?;
        let gx = ctx.ghost(&x)?;
        let gy = ctx.ghost(&y)?;

        let sum_ghost = ctx.ghost(&ctx.add(&x, &y)?)?;
        let mut sum_witness = None;
        for k in 0..=n {
            let expected = gx.components[k].add(&gy.components[k])?;
            if sum_ghost.components[k] != expected {
                sum_witness.get_or_insert(format!("sum ghost component {k} differs"));
            }
        }
        checks.push(CheckLine::from_witness(
            &format!("ghost_of_sum_polys_p{p}_n{n}"),
            sum_witness,
        ));

        let prod_ghost = ctx.ghost(&ctx.mul(&x, &y)?)?;
        let mut prod_witness = None;
        for k in 0..=n {
            let expected = gx.components[k].mul(&gy.components[k])?;
            if prod_ghost.components[k] != expected {
                prod_witness.get_or_insert(format!("product ghost component {k} differs"));
            }
        }
        checks.push(CheckLine::from_witness(
            &format!("ghost_of_prod_polys_p{p}_n{n}"),
            prod_witness,
        ));
    }
    Ok(SuiteReport::new("ghosthom", seed, checks))
}

fn enumerate_witt_vecs(ctx: &WittContext, len: usize) -> Vec<WittVec> {
    let p = ctx.p();
    let count = p.pow(len as u32);
    (0..count)
        .map(|mut idx| {
            let coords = (0..len)
                .map(|_| {
                    let digit = idx % p;
                    idx /= p;
                    ctx.ring().from_bigint(&BigInt::from(digit))
                })
                .collect();
            WittVec {
                p,
                coords,
            }
        })
        .collect()
}

/// Exhaustive table comparison of `W_n(F_p)` with `Z/p^n` under the
/// Teichmueller-digit isomorphism.
pub fn suite_wittfp(seed: u64, filter: &SuiteFilter) -> Result<SuiteReport> {
    let mut checks = Vec::new();
    for (p, n) in [(2u64, 2usize), (2, 3), (2, 4), (3, 2), (3, 3)]
        .into_iter()
        .filter(|&(p, n)| filter.keep_p(p) && filter.keep_n(n))
    {
        let field = RingHandle::prime_field(p)?;
        let ctx = WittContext::new(p, field, n)?;
        let all = enumerate_witt_vecs(&ctx, n);
        let mut witness = None;

        // Bijectivity with round trip.
        let mut images = std::collections::BTreeSet::new();
        for x in &all {
            let r = iso_wn_fp(&ctx, x)?;
            images.insert(r.to_string());
            if iso_wn_fp_inverse(&ctx, &r, n)? != *x {
                witness.get_or_insert(format!("round trip fails at image {r}"));
            }
        }
        if images.len() != all.len() {
            witness.get_or_insert(format!(
                "iso not injective: {} images from {} elements",
                images.len(),
                all.len()
            ));
        }

        // Unit goes to unit.
        let one_img = iso_wn_fp(&ctx, &ctx.one(n))?;
        if !one_img.is_one() {
            witness.get_or_insert(format!("iso(1) = {one_img}"));
        }

        // Full addition and multiplication tables.
        'outer: for x in &all {
            for y in &all {
                let ix = iso_wn_fp(&ctx, x)?;
                let iy = iso_wn_fp(&ctx, y)?;
                if iso_wn_fp(&ctx, &ctx.add(x, y)?)? != ix.add(&iy)? {
                    witness.get_or_insert("addition table mismatch".to_string());
                    break 'outer;
                }
                if iso_wn_fp(&ctx, &ctx.mul(x, y)?)? != ix.mul(&iy)? {
                    witness.get_or_insert("multiplication table mismatch".to_string());
                    break 'outer;
                }
            }
        }
        checks.push(CheckLine::from_witness(
            &format!("w{n}_f{p}_is_z_mod_p{n}"),
            witness,
        ));
    }
    Ok(SuiteReport::new("wittfp", seed, checks))
}

/// Structural identity suite at >= 300 samples per (p, ring): Frobenius is
/// a ring homomorphism, V is additive, FV = p, the projection formula,
/// restriction is a ring homomorphism, the Teichmueller map is
/// multiplicative.
pub fn suite_structural(seed: u64, filter: &SuiteFilter) -> Result<SuiteReport> {
    const SAMPLES: usize = 300;
    let mut checks = Vec::new();
    let z36 = RingHandle::integers_mod(36)?;
    let z = RingHandle::integers();
    for p in [2u64, 3].into_iter().filter(|&p| filter.keep_p(p)) {
        for (ring_name, ring) in [("z", z.clone()), ("z36", z36.clone())] {
            let ctx = WittContext::new(p, ring.clone(), 4)?;
            let mut rng = SplitMix64::new(seed ^ (p << 8) ^ ring_name.len() as u64);
            let mut witness: Option<String> = None;
            'lengths: for len in [2usize, 3, 4] {
                for _ in 0..SAMPLES {
                    let x = ctx.sample(len, &mut rng);
                    let y = ctx.sample(len, &mut rng);
                    let xr = ctx.restriction(&x)?;
                    let yr = ctx.restriction(&y)?;

                    // F is a ring homomorphism.
                    let fx = ctx.frobenius(&x)?;
                    let fy = ctx.frobenius(&y)?;
                    if ctx.frobenius(&ctx.add(&x, &y)?)? != ctx.add(&fx, &fy)?
                        || ctx.frobenius(&ctx.mul(&x, &y)?)? != ctx.mul(&fx, &fy)?
                    {
                        witness.get_or_insert("F is not a ring homomorphism".to_string());
                        break 'lengths;
                    }
                    // V additive.
                    if ctx.verschiebung(&ctx.add(&xr, &yr)?)?
                        != ctx.add(&ctx.verschiebung(&xr)?, &ctx.verschiebung(&yr)?)?
                    {
                        witness.get_or_insert("V is not additive".to_string());
                        break 'lengths;
                    }
                    // FV = p.
                    let fv = ctx.frobenius(&ctx.verschiebung(&xr)?)?;
                    let mut px = ctx.zero(len - 1);
                    for _ in 0..p {
                        px = ctx.add(&px, &xr)?;
                    }
                    if fv != px {
                        witness.get_or_insert("FV != p".to_string());
                        break 'lengths;
                    }
                    // Projection formula x V(y) = V(F(x) y).
                    if ctx.mul(&x, &ctx.verschiebung(&yr)?)?
                        != ctx.verschiebung(&ctx.mul(&fx, &yr)?)?
                    {
                        witness.get_or_insert("projection formula fails".to_string());
                        break 'lengths;
                    }
                    // R is a ring homomorphism.
                    if ctx.restriction(&ctx.add(&x, &y)?)? != ctx.add(&xr, &yr)?
                        || ctx.restriction(&ctx.mul(&x, &y)?)? != ctx.mul(&xr, &yr)?
                    {
                        witness.get_or_insert("R is not a ring homomorphism".to_string());
                        break 'lengths;
                    }
                    // Teichmueller multiplicativity.
                    let a = ring.sample(&mut rng);
                    let b = ring.sample(&mut rng);
                    if ctx.mul(&ctx.teichmuller(&a, len), &ctx.teichmuller(&b, len))?
                        != ctx.teichmuller(&a.mul(&b)?, len)
                    {
                        witness.get_or_insert("[a][b] != [ab]".to_string());
                        break 'lengths;
                    }
                }
            }
            checks.push(CheckLine::from_witness(
                &format!("structural_p{p}_{ring_name}"),
                witness,
            ));
        }
    }
    Ok(SuiteReport::new("structural", seed, checks))
}

/// Randomized ring-axiom checks for W_n(A) across the full coefficient
/// grid.
pub fn suite_wittaxioms(seed: u64, filter: &SuiteFilter) -> Result<SuiteReport> {
    const SAMPLES: usize = 300;
    let mut checks = Vec::new();
    let rings: Vec<(&str, RingHandle)> = vec![
        ("z", RingHandle::integers()),
        ("z8", RingHandle::integers_mod(8)?),
        ("z9", RingHandle::integers_mod(9)?),
        ("z36", RingHandle::integers_mod(36)?),
        ("f2", RingHandle::prime_field(2)?),
        ("f3", RingHandle::prime_field(3)?),
    ];
    for p in [2u64, 3].into_iter().filter(|&p| filter.keep_p(p)) {
        for (ring_name, ring) in &rings {
            let ctx = WittContext::new(p, ring.clone(), 4)?;
            let mut rng = SplitMix64::new(seed ^ (p << 16) ^ ring_name.len() as u64);
            let mut witness: Option<String> = None;
            'lengths: for len in [2usize, 3, 4] {
                for _ in 0..SAMPLES {
                    let x = ctx.sample(len, &mut rng);
                    let y = ctx.sample(len, &mut rng);
                    let zv = ctx.sample(len, &mut rng);
                    let assoc_add =
                        ctx.add(&ctx.add(&x, &y)?, &zv)? == ctx.add(&x, &ctx.add(&y, &zv)?)?;
                    let assoc_mul =
                        ctx.mul(&ctx.mul(&x, &y)?, &zv)? == ctx.mul(&x, &ctx.mul(&y, &zv)?)?;
                    let comm = ctx.mul(&x, &y)? == ctx.mul(&y, &x)?;
                    let dist = ctx.mul(&x, &ctx.add(&y, &zv)?)?
                        == ctx.add(&ctx.mul(&x, &y)?, &ctx.mul(&x, &zv)?)?;
                    let inv = ctx.add(&x, &ctx.neg(&x)?)? == ctx.zero(len);
                    if !(assoc_add && assoc_mul && comm && dist && inv) {
                        witness.get_or_insert(format!("axiom failure at length {len}"));
                        break 'lengths;
                    }
                }
            }
            checks.push(CheckLine::from_witness(
                &format!("ring_axioms_p{p}_{ring_name}"),
                witness,
            ));
        }
    }
    Ok(SuiteReport::new("wittaxioms", seed, checks))
}

/// The cofree lift: frozen value lambda(2) = (2, -1, -4) and the ghost
/// identity `ghost_k(lambda(a)) = phi^k(a)` on samples.
pub fn suite_cofree(seed: u64) -> Result<SuiteReport> {
    let mut checks = Vec::new();
    let z = RingHandle::integers();
    let ctx = WittContext::new(2, z.clone(), 4)?;
    let ds = DeltaStructure::phi_lift(z.clone(), 2, PhiMap::Identity)?;

    let lam2 = ctx.cofree_lift(&ds, &z.from_int(2), 3)?;
    let expected = vec![z.from_int(2), z.from_int(-1), z.from_int(-4)];
    checks.push(CheckLine::from_witness(
        "lambda_of_two_is_frozen_value",
        (lam2.coords != expected).then(|| format!("{:?}", lam2.coords)),
    ));

    let mut rng = SplitMix64::new(seed);
    let mut witness = None;
    for _ in 0..100 {
        let a = z.sample(&mut rng);
        let lam = ctx.cofree_lift(&ds, &a, 4)?;
        // phi = id on Z, so every ghost component equals a; w_0 = a.
        let g = ctx.ghost(&lam)?;
        if g.components.iter().any(|c| *c != a) {
            witness.get_or_insert(format!("ghost of lambda({a}) is not constant"));
            break;
        }
        if lam.coords[0] != a {
            witness.get_or_insert(format!("w_0(lambda({a})) != {a}"));
            break;
        }
    }
    checks.push(CheckLine::from_witness("ghost_of_lambda_is_phi_orbit", witness));

    // Over Z[x] with phi(x) = x^2 the ghost components are the phi-orbit.
    let ring = RingHandle::poly_over(RingHandle::integers(), &["x"])?;
    let phi = PhiMap::power_lift(&ring, 2)?;
    let ctx_poly = WittContext::new(2, ring.clone(), 3)?;
    let ds_poly = DeltaStructure::phi_lift(ring.clone(), 2, phi.clone())?;
    let mut witness = None;
    for _ in 0..20 {
        let a = ring.sample(&mut rng);
        let lam = ctx_poly.cofree_lift(&ds_poly, &a, 3)?;
        let g = ctx_poly.ghost(&lam)?;
        let mut orbit = a.clone();
        for (k, comp) in g.components.iter().enumerate() {
            if k > 0 {
                orbit = phi.apply(&orbit)?;
            }
            if *comp != orbit {
                witness.get_or_insert(format!("ghost_{k} differs from phi^{k}"));
            }
        }
    }
    checks.push(CheckLine::from_witness(
        "ghost_of_lambda_is_phi_orbit_poly",
        witness,
    ));

    Ok(SuiteReport::new("cofree", seed, checks))
}

/// Delta-ring axioms across every built-in structure (plain rings, free
/// delta-rings, Witt vectors with the cofree delta).
pub fn suite_deltaaxioms(seed: u64, filter: &SuiteFilter) -> Result<SuiteReport> {
    let mut checks = Vec::new();

    let z = RingHandle::integers();
    for p in [2u64, 3].into_iter().filter(|&p| filter.keep_p(p)) {
        let ds = DeltaStructure::phi_lift(z.clone(), p, PhiMap::Identity)?;
        let report = check_delta_axioms_on(&ds, 300, seed ^ p)?;
        checks.push(CheckLine::from_witness(
            &format!("z_canonical_delta_p{p}"),
            (!report.all_pass()).then(|| format!("{report:?}")),
        ));
    }

    if filter.keep_p(2) {
        let ring = RingHandle::poly_over(RingHandle::integers(), &["x"])?;
        let ds = DeltaStructure::phi_lift(ring.clone(), 2, PhiMap::power_lift(&ring, 2)?)?;
        let report = check_delta_axioms_on(&ds, 120, seed ^ 99)?;
        checks.push(CheckLine::from_witness(
            "zx_power_lift_p2",
            (!report.all_pass()).then(|| format!("{report:?}")),
        ));

        let free = free_delta_ring(1, 3, 2)?;
        let ds = DeltaStructure::free(free);
        let report = check_delta_axioms_on(&ds, 60, seed ^ 7)?;
        checks.push(CheckLine::from_witness(
            "free_delta_ring_p2",
            (!report.all_pass()).then(|| format!("{report:?}")),
        ));
    }

    // The cofree delta on Witt vectors, over torsion and torsion-free
    // coefficients.
    for p in [2u64, 3].into_iter().filter(|&p| filter.keep_p(p)) {
        for (ring_name, ring) in [
            ("z", RingHandle::integers()),
            ("z36", RingHandle::integers_mod(36)?),
        ] {
            let ctx = WittContext::new(p, ring, 4)?;
            let carrier = WittDeltaCarrier { ctx: &ctx, len: 4 };
            let report = check_delta_axioms_on(&carrier, 60, seed ^ (p << 4))?;
            checks.push(CheckLine::from_witness(
                &format!("witt_delta_p{p}_{ring_name}"),
                (!report.all_pass()).then(|| format!("{report:?}")),
            ));
        }
    }

    if !filter.keep_p(2) {
        return Ok(SuiteReport::new("deltaaxioms", seed, checks));
    }
    // delta on Witt vectors is frozen in low coordinates:
    // delta(x)_0 = x_1 and (p = 2) delta(x)_1 = -x_1^2 - x_0^2 x_1 + x_2,
    // checked symbolically.
    let names: Vec<String> = (0..3).map(|i| format!("x{i}")).collect();
    let sym = RingHandle::poly_over_named(RingHandle::integers(), names)?;
    let ctx = WittContext::new(2, sym.clone(), 3)?;
    let x = ctx.from_coords((0..3).map(|i| sym.var_by_index(i)).collect::<Result<_>>()?)?;
    let d = delta_witt(&ctx, &x)?;
    let x0 = sym.var_by_index(0)?;
    let x1 = sym.var_by_index(1)?;
    let x2 = sym.var_by_index(2)?;
    let expected1 = x1
        .pow(2)
        .neg()
        .sub(&x0.pow(2).mul(&x1)?)?
        .add(&x2)?;
    let mut witness = None;
    if d.coords[0] != x1 {
        witness = Some(format!("delta(x)_0 = {}", d.coords[0]));
    }
    if d.coords[1] != expected1 {
        witness.get_or_insert(format!("delta(x)_1 = {}", d.coords[1]));
    }
    // delta kills Teichmueller lifts.
    let teich = ctx.teichmuller(&x0, 3);
    if !delta_witt(&ctx, &teich)?.coords.iter().all(|c| c.is_zero()) {
        witness.get_or_insert("delta([a]) != 0".to_string());
    }
    checks.push(CheckLine::from_witness("witt_delta_symbolic_values", witness));

    Ok(SuiteReport::new("deltaaxioms", seed, checks))
}

fn z_delta_space(p: u64, precision: usize) -> Result<CartierSpace> {
    let z = RingHandle::integers();
    let pr = PhiRing::new(z.clone(), PhiMap::Identity)?;
    let ds = DeltaStructure::phi_lift(z, p, PhiMap::Identity)?;
    CartierSpace::new(pr, p, precision, Mode::Exact)?.with_delta(ds)
}

fn free_delta_space(p: u64, precision: usize) -> Result<CartierSpace> {
    // Sampled coefficients sit at delta-order <= 1 and every phi-iterate in
    // a precision-5 product climbs at most precision - 1 orders, plus one
    // more for the delta itself, so order 7 never truncates.
    let free = free_delta_ring(1, precision + 2, p)?;
    let ring = free.ring().clone();
    let ds = DeltaStructure::free(free);
    let phi = PhiMap::FromDelta(std::sync::Arc::new(ds.clone()));
    let pr = PhiRing::new(ring, phi)?;
    CartierSpace::new(pr, p, precision, Mode::Exact)?.with_delta(ds)
}

/// The delta-Cartier master identity `F(u) = u^p + p delta(u)` in A[V] at
/// precision 5 over Z and over a free delta-ring truncation, 200 samples
/// each; plus the delta-ring axioms of delta_C itself.
pub fn suite_deltacartier(seed: u64, filter: &SuiteFilter) -> Result<SuiteReport> {
    const SAMPLES: usize = 200;
    let mut checks = Vec::new();
    for p in [2u64, 3].into_iter().filter(|&p| filter.keep_p(p)) {
        for (name, space) in [
            ("z", z_delta_space(p, 5)?),
            ("free_delta", free_delta_space(p, 5)?),
        ] {
            let mut rng = SplitMix64::new(seed ^ (p << 24) ^ name.len() as u64);
            let mut witness = None;
            for _ in 0..SAMPLES {
                let u = space.sample(&mut rng)?;
                let lhs = space.frobenius(&u)?;
                let rhs = space.add(
                    &space.pow(&u, p)?,
                    &space.scale_int(&space.delta(&u)?, &BigInt::from(p))?,
                )?;
                if lhs != rhs {
                    witness.get_or_insert(format!(
                        "F(u) != u^p + p delta(u) at u = {}",
                        space.render(&u)
                    ));
                    break;
                }
            }
            checks.push(CheckLine::from_witness(
                &format!("master_identity_p{p}_{name}"),
                witness,
            ));
        }
    }

    // delta_C satisfies the delta-ring axioms inside A[V].
    for p in [2u64, 3].into_iter().filter(|&p| filter.keep_p(p)) {
        let space = z_delta_space(p, 5)?;
        let carrier = CartierDeltaCarrier { space: &space };
        let report = check_delta_axioms_on(&carrier, 60, seed ^ (p << 3))?;
        checks.push(CheckLine::from_witness(
            &format!("delta_cartier_axioms_p{p}"),
            (!report.all_pass()).then(|| format!("{report:?}")),
        ));
    }

    // The A[V] ring axioms at precision 6 (300 samples per coefficient
    // ring).
    let zt = RingHandle::poly_over(RingHandle::integers(), &["t"])?;
    let mut spaces: Vec<(String, CartierSpace)> = Vec::new();
    if filter.keep_p(2) {
        spaces.push((
            "z_id_p2".into(),
            CartierSpace::new(
                PhiRing::new(RingHandle::integers(), PhiMap::Identity)?,
                2,
                6,
                Mode::Exact,
            )?,
        ));
        spaces.push((
            "zt_pow_p2".into(),
            CartierSpace::new(
                PhiRing::new(zt.clone(), PhiMap::power_lift(&zt, 2)?)?,
                2,
                6,
                Mode::Exact,
            )?,
        ));
    }
    if filter.keep_p(3) {
        spaces.push((
            "z_id_p3".into(),
            CartierSpace::new(
                PhiRing::new(RingHandle::integers(), PhiMap::Identity)?,
                3,
                6,
                Mode::Exact,
            )?,
        ));
    }
    for (name, space) in &spaces {
        let mut rng = SplitMix64::new(seed ^ name.len() as u64);
        let mut witness = None;
        for _ in 0..300 {
            let u = space.sample(&mut rng)?;
            let v = space.sample(&mut rng)?;
            let w = space.sample(&mut rng)?;
            let assoc = space.mul(&space.mul(&u, &v)?, &w)? == space.mul(&u, &space.mul(&v, &w)?)?;
            let comm = space.mul(&u, &v)? == space.mul(&v, &u)?;
            let dist = space.mul(&u, &space.add(&v, &w)?)?
                == space.add(&space.mul(&u, &v)?, &space.mul(&u, &w)?)?;
            let unit = space.mul(&u, &space.one())? == u;
            if !(assoc && comm && dist && unit) {
                witness.get_or_insert(format!("ring axiom failure at {}", space.render(&u)));
                break;
            }
            // F is a ring homomorphism.
            let fu = space.frobenius(&u)?;
            let fv = space.frobenius(&v)?;
            let f_hom = space.frobenius(&space.mul(&u, &v)?)? == space.mul(&fu, &fv)?
                && space.frobenius(&space.add(&u, &v)?)? == space.add(&fu, &fv)?;
            // V is additive, FV = p, and the projection formula holds; keep
            // the samples' top coefficient clear so the shift stays exact.
            let mut u_low = u.clone();
            let mut v_low = v.clone();
            u_low.coeffs[space.precision() - 1] = space.ring().zero();
            v_low.coeffs[space.precision() - 1] = space.ring().zero();
            let v_additive = space.verschiebung(&space.add(&u_low, &v_low)?)?
                == space.add(&space.verschiebung(&u_low)?, &space.verschiebung(&v_low)?)?;
            let p_int = BigInt::from(space.p());
            let fv_is_p = space.frobenius(&space.verschiebung(&u_low)?)?
                == space.scale_int(&u_low, &p_int)?;
            let proj = space.mul(&u, &space.verschiebung(&v_low)?)?
                == space.verschiebung(&space.mul(&space.frobenius(&u)?, &v_low)?)?;
            if !(f_hom && v_additive && fv_is_p && proj) {
                witness.get_or_insert(format!(
                    "F/V structure failure at {}",
                    space.render(&u)
                ));
                break;
            }
        }
        checks.push(CheckLine::from_witness(
            &format!("av_ring_axioms_{name}"),
            witness,
        ));
    }

    Ok(SuiteReport::new("deltacartier", seed, checks))
}

/// The square-zero counterexample: the structure is a pre-delta-Cartier
/// ring, and the delta-V compatibility fails at nonzero I, as it must.
pub fn suite_squarezero(seed: u64, filter: &SuiteFilter) -> Result<SuiteReport> {
    let mut checks = Vec::new();
    for p in [2u64, 3].into_iter().filter(|&p| filter.keep_p(p)) {
        let report = square_zero_check(p, 2, 40, seed ^ p)?;
        checks.push(CheckLine::from_witness(
            &format!("structure_is_pre_delta_cartier_p{p}"),
            (!report.structure_pass).then(|| report.structure_witness.clone().unwrap_or_default()),
        ));
        checks.push(CheckLine::from_witness(
            &format!("delta_v_fails_on_nonzero_ideal_p{p}"),
            (!report.failure_observed).then(|| "expected failure was not observed".to_string()),
        ));
    }
    Ok(SuiteReport::new("squarezero", seed, checks))
}

/// Tower-vs-Witt comparison plus the tower's own diagram checks and the
/// transport of A[V] arithmetic through the direct-sum coordinates.
pub fn suite_tower(seed: u64, filter: &SuiteFilter) -> Result<SuiteReport> {
    let mut checks = Vec::new();

    // Ghost-image and operation comparison (Z, id) for p in {2, 3} up to
    // four levels; includes the exhaustive Dwork-set enumeration mod p^n.
    for p in [2u64, 3].into_iter().filter(|&p| filter.keep_p(p)) {
        let ctx = WittContext::new(p, RingHandle::integers(), 4)?;
        match tower_vs_witt(&ctx, &PhiMap::Identity, 4, 25, seed ^ p) {
            Ok(report) => {
                for line in report.checks {
                    checks.push(CheckLine {
                        name: format!("z_p{p}_{}", line.name),
                        pass: line.pass,
                        witness: line.witness,
                    });
                }
            }
            Err(e) => checks.push(CheckLine::from_witness(
                &format!("z_p{p}_tower_vs_witt"),
                Some(e.to_string()),
            )),
        }
    }

    // (Z[x], x -> x^p), p = 2, n = 2, sampled.
    if filter.keep_p(2) {
        let ring = RingHandle::poly_over(RingHandle::integers(), &["x"])?;
        let phi = PhiMap::power_lift(&ring, 2)?;
        let ctx = WittContext::new(2, ring, 2)?;
        match tower_vs_witt(&ctx, &phi, 2, 50, seed ^ 1000) {
            Ok(report) => {
                for line in report.checks {
                    checks.push(CheckLine {
                        name: format!("zx_p2_{}", line.name),
                        pass: line.pass,
                        witness: line.witness,
                    });
                }
            }
            Err(e) => checks.push(CheckLine::from_witness(
                "zx_p2_tower_vs_witt",
                Some(e.to_string()),
            )),
        }
    }

    // The tower's internal diagrams in ring mode and in module mode with
    // three seeded random matrices on Z^2.
    for p in [2u64, 3].into_iter().filter(|&p| filter.keep_p(p)) {
        let model = tower_build(
            TowerBase::Ring {
                ring: RingHandle::integers(),
                phi: PhiMap::Identity,
            },
            p,
            4,
        )?;
        let report = tower_self_check(&model, 12, seed ^ (p << 2))?;
        checks.push(CheckLine::from_witness(
            &format!("tower_diagrams_ring_z_p{p}"),
            (!report.all_pass()).then(|| format!("{report:?}")),
        ));
    }
    if filter.keep_p(2) {
        let mut rng = SplitMix64::new(seed ^ 0xabcd);
        for idx in 0..3 {
            let matrix: Vec<Vec<BigInt>> = (0..2)
                .map(|_| (0..2).map(|_| BigInt::from(rng.signed(5))).collect())
                .collect();
            let module = ModulePhi::new(2, matrix)?;
            let model = tower_build(TowerBase::Module(module.clone()), 2, 4)?;
            let report = tower_self_check(&model, 10, seed ^ idx)?;
            checks.push(CheckLine::from_witness(
                &format!("tower_diagrams_module_z2_m{idx}"),
                (!report.all_pass()).then(|| format!("{report:?}")),
            ));

            // Transport of the X[V] module operations through the
            // direct-sum coordinates.
            let space = ModCartierSpace::new(module, 2, 4)?;
            let mut witness = None;
            for _ in 0..15 {
                let u = space.sample_supported(3, &mut rng);
                let v = space.sample_supported(3, &mut rng);
                let coords = |w: &crate::boxprod::ModCartierElt, take: usize| -> Vec<TScalar> {
                    w.coeffs[..take].iter().map(|c| TScalar::Vec(c.clone())).collect()
                };
                let tu = model.from_sum_coords(&coords(&u, 4))?;
                let tv = model.from_sum_coords(&coords(&v, 4))?;
                // Addition transports.
                let sum = space.add(&u, &v)?;
                if model.add(&tu, &tv)? != model.from_sum_coords(&coords(&sum, 4))? {
                    witness.get_or_insert("addition does not transport".to_string());
                }
                // Verschiebung transports (level 3 -> 4 against the shift).
                let tu3 = model.from_sum_coords(&coords(&u, 3))?;
                let vu = space.verschiebung(&u)?;
                if model.versch(&tu3)? != model.from_sum_coords(&coords(&vu, 4))? {
                    witness.get_or_insert("verschiebung does not transport".to_string());
                }
                // Frobenius transports (level 4 -> 3 against F).
                let fu = space.frobenius(&u)?;
                if model.frob(&tu)? != model.from_sum_coords(&coords(&fu, 3))? {
                    witness.get_or_insert("frobenius does not transport".to_string());
                }
                // The splitting appends a zero direct-sum coordinate.
                let mut padded = coords(&u, 3);
                padded.push(TScalar::Vec(space.module.zero_vec()));
                if model.split(&tu3)? != model.from_sum_coords(&padded)? {
                    witness.get_or_insert("splitting does not transport".to_string());
                }
            }
            checks.push(CheckLine::from_witness(
                &format!("module_transport_z2_m{idx}"),
                witness,
            ));
        }
    }

    // Ring-mode transport: A[V] multiplication through the direct-sum
    // coordinates equals the componentwise pullback product.
    {
        let zt = RingHandle::poly_over(RingHandle::integers(), &["t"])?;
        let setups: Vec<(String, RingHandle, PhiMap, u64)> = vec![
            ("z_p2".into(), RingHandle::integers(), PhiMap::Identity, 2),
            ("z_p3".into(), RingHandle::integers(), PhiMap::Identity, 3),
            (
                "zt_p2".into(),
                zt.clone(),
                PhiMap::power_lift(&zt, 2)?,
                2,
            ),
        ];
        for (name, ring, phi, p) in setups
            .into_iter()
            .filter(|(_, _, _, p)| filter.keep_p(*p))
        {
            let pr = PhiRing::new(ring.clone(), phi.clone())?;
            let space = CartierSpace::new(pr, p, 4, Mode::Exact)?;
            let model = tower_build(TowerBase::Ring { ring, phi }, p, 4)?;
            let mut rng = SplitMix64::new(seed ^ name.len() as u64 ^ (p << 5));
            let mut witness = None;
            for _ in 0..20 {
                let u = space.sample(&mut rng)?;
                let v = space.sample(&mut rng)?;
                let as_coords = |w: &crate::cartier::CartierElt| -> Vec<TScalar> {
                    w.coeffs.iter().map(|c| TScalar::Elt(c.clone())).collect()
                };
                let tu = model.from_sum_coords(&as_coords(&u))?;
                let tv = model.from_sum_coords(&as_coords(&v))?;
                let prod = space.mul(&u, &v)?;
                if model.mul(&tu, &tv)? != model.from_sum_coords(&as_coords(&prod))? {
                    witness.get_or_insert(format!(
                        "product transport fails at u = {}, v = {}",
                        space.render(&u),
                        space.render(&v)
                    ));
                    break;
                }
            }
            checks.push(CheckLine::from_witness(
                &format!("ring_transport_{name}"),
                witness,
            ));
        }
    }

    Ok(SuiteReport::new("tower", seed, checks))
}

/// The (F,V)-bilinearity of the box pairing on 200 samples, plus the unit
/// law.
pub fn suite_boxprod(seed: u64, filter: &SuiteFilter) -> Result<SuiteReport> {
    const SAMPLES: usize = 200;
    let mut rng = SplitMix64::new(seed);
    let mut checks = Vec::new();
    for p in [2u64, 3].into_iter().filter(|&p| filter.keep_p(p)) {
        let mk = |rng: &mut SplitMix64| -> Result<ModCartierSpace> {
            let matrix: Vec<Vec<BigInt>> = (0..2)
                .map(|_| (0..2).map(|_| BigInt::from(rng.signed(4))).collect())
                .collect();
            ModCartierSpace::new(ModulePhi::new(2, matrix)?, p, 5)
        };
        let x_space = mk(&mut rng)?;
        let y_space = mk(&mut rng)?;
        let bp = box_free(&x_space, &y_space)?;
        let mut witness = None;
        for _ in 0..SAMPLES {
            let u = x_space.sample_supported(4, &mut rng);
            let v = y_space.sample_supported(4, &mut rng);
            let f_axiom = bp.pairing(&x_space.frobenius(&u)?, &y_space.frobenius(&v)?)?
                == bp.target.frobenius(&bp.pairing(&u, &v)?)?;
            let v_left = bp
                .target
                .verschiebung(&bp.pairing(&x_space.frobenius(&u)?, &v)?)?
                == bp.pairing(&u, &y_space.verschiebung(&v)?)?;
            let v_right = bp
                .target
                .verschiebung(&bp.pairing(&u, &y_space.frobenius(&v)?)?)?
                == bp.pairing(&x_space.verschiebung(&u)?, &v)?;
            if !(f_axiom && v_left && v_right) {
                witness.get_or_insert("bilinearity axiom failure".to_string());
                break;
            }
        }
        checks.push(CheckLine::from_witness(
            &format!("fv_bilinearity_p{p}"),
            witness,
        ));

        // Unit law: (Z, id)[V] box X[V] = X[V].
        let unit = ModCartierSpace::new(ModulePhi::identity(1)?, p, 5)?;
        let bp_unit = box_free(&unit, &x_space)?;
        let one = unit.v_term(&[BigInt::from(1)], 0)?;
        let mut witness = None;
        for _ in 0..20 {
            let u = x_space.sample(&mut rng);
            if bp_unit.pairing(&one, &u)?.coeffs != u.coeffs {
                witness.get_or_insert("unit pairing is not the identity".to_string());
                break;
            }
        }
        checks.push(CheckLine::from_witness(&format!("unit_law_p{p}"), witness));
    }
    Ok(SuiteReport::new("boxprod", seed, checks))
}

/// Char-p perfection collapse over F_p for p in {2, 3, 5}.
pub fn suite_perfection(seed: u64, filter: &SuiteFilter) -> Result<SuiteReport> {
    let mut checks = Vec::new();
    for p in [2u64, 3, 5].into_iter().filter(|&p| filter.keep_p(p)) {
        let field = RingHandle::prime_field(p)?;
        let pr = PhiRing::new(field.clone(), PhiMap::CharPPower(p))?;
        let space = CartierSpace::new(pr, p, 5, Mode::Complete)?;
        let report = cartier_perfection_check(&space, 100, seed ^ p)?;
        checks.push(CheckLine::from_witness(
            &format!("collapse_f{p}"),
            (!report.pass).then(|| report.witness.clone().unwrap_or_default()),
        ));
    }
    if !filter.keep_p(2) {
        return Ok(SuiteReport::new("perfection", seed, checks));
    }
    // The frozen two-term example over F_2: F(1 + V(1)) = 1.
    let f2 = RingHandle::prime_field(2)?;
    let pr = PhiRing::new(f2.clone(), PhiMap::CharPPower(2))?;
    let space = CartierSpace::new(pr, 2, 3, Mode::Complete)?;
    let u = space.add(&space.one(), &space.v_term(&f2.one(), 1)?)?;
    let collapsed = space.frobenius(&u)?;
    checks.push(CheckLine::from_witness(
        "f2_one_plus_v_one_collapses_in_one_step",
        (collapsed != space.one()).then(|| space.render(&collapsed)),
    ));
    Ok(SuiteReport::new("perfection", seed, checks))
}

/// Naturality of W_n in the coefficient ring: reduction Z -> Z/m commutes
/// with the Witt operations.
pub fn suite_naturality(seed: u64, filter: &SuiteFilter) -> Result<SuiteReport> {
    let mut checks = Vec::new();
    for (p, m) in [(2u64, 36u64), (3, 36), (2, 8), (3, 9)]
        .into_iter()
        .filter(|&(p, _)| filter.keep_p(p))
    {
        let z = RingHandle::integers();
        let zm = RingHandle::integers_mod(m)?;
        let ctx_z = WittContext::new(p, z, 4)?;
        let ctx_m = WittContext::new(p, zm.clone(), 4)?;
        let reduce = |x: &WittVec| -> Result<WittVec> {
            ctx_m.from_coords(
                x.coords
                    .iter()
                    .map(|c| zm.from_bigint(c.as_int().expect("integer coordinate")))
                    .collect(),
            )
        };
        let mut rng = SplitMix64::new(seed ^ (p << 6) ^ m);
        let mut witness = None;
        for _ in 0..50 {
            let x = ctx_z.sample(4, &mut rng);
            let y = ctx_z.sample(4, &mut rng);
            let add_ok =
                reduce(&ctx_z.add(&x, &y)?)? == ctx_m.add(&reduce(&x)?, &reduce(&y)?)?;
            let mul_ok =
                reduce(&ctx_z.mul(&x, &y)?)? == ctx_m.mul(&reduce(&x)?, &reduce(&y)?)?;
            let frob_ok =
                reduce(&ctx_z.frobenius(&x)?)? == ctx_m.frobenius(&reduce(&x)?)?;
            if !(add_ok && mul_ok && frob_ok) {
                witness.get_or_insert("reduction does not commute".to_string());
                break;
            }
        }
        checks.push(CheckLine::from_witness(
            &format!("naturality_p{p}_mod{m}"),
            witness,
        ));
    }
    Ok(SuiteReport::new("naturality", seed, checks))
}

// ---------------------------------------------------------------------------
// Cross-strategy benchmark
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, serde::Serialize)]
pub struct BenchReport {
    pub p: u64,
    pub length: usize,
    pub count: usize,
    pub poly_nanos: u128,
    pub ghost_nanos: u128,
    /// Term counts of the product polynomials P_0..P_{n-1} in use.
    pub prod_poly_terms: Vec<usize>,
    pub agree: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mismatch: Option<String>,
}

/// Multiply `count` random pairs in W_len(Z) by universal-polynomial
/// evaluation and by ghost-coordinate arithmetic, timing both; the results
/// must agree pair by pair.
pub fn bench_strategies(p: u64, length: usize, count: usize, seed: u64) -> Result<BenchReport> {
    let z = RingHandle::integers();
    let ctx = WittContext::new(p, z, length)?;
    let mut rng = SplitMix64::new(seed);
    let pairs: Vec<(WittVec, WittVec)> = (0..count)
        .map(|_| (ctx.sample(length, &mut rng), ctx.sample(length, &mut rng)))
        .collect();

    let start = Instant::now();
    let via_polys: Vec<WittVec> = pairs
        .iter()
        .map(|(x, y)| ctx.mul(x, y))
        .collect::<Result<_>>()?;
    let poly_nanos = start.elapsed().as_nanos();

    let start = Instant::now();
    let via_ghost: Vec<WittVec> = pairs
        .iter()
        .map(|(x, y)| ctx.mul_via_ghost(x, y))
        .collect::<Result<_>>()?;
    let ghost_nanos = start.elapsed().as_nanos();

    let mut mismatch = None;
    for (i, (a, b)) in via_polys.iter().zip(&via_ghost).enumerate() {
        if a != b {
            mismatch = Some(format!("strategies disagree on pair {i}"));
            break;
        }
    }

    let prod_poly_terms = (0..length)
        .map(|k| ctx.poly(PolyKind::Prod, k).map(|q| q.body.num_terms()))
        .collect::<Result<_>>()?;

    Ok(BenchReport {
        p,
        length,
        count,
        poly_nanos,
        ghost_nanos,
        prod_poly_terms,
        agree: mismatch.is_none(),
        mismatch,
    })
}
