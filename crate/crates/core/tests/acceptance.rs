//! Acceptance suite: one test per criterion, each printing a pass/fail line
//! and enforcing its runtime budget. Exact arithmetic means every
//! comparison below is required to hold with zero tolerance.

use std::time::{Duration, Instant};

use wittkit_core::suites;

fn run_criterion(
    number: usize,
    description: &str,
    budget: Duration,
    body: impl FnOnce() -> Result<(), String>,
) {
    let start = Instant::now();
    let outcome = body();
    let elapsed = start.elapsed();
    match &outcome {
        Ok(()) => println!("PASS criterion {number}: {description} ({elapsed:.2?})"),
        Err(e) => println!("FAIL criterion {number}: {description} ({elapsed:.2?}): {e}"),
    }
    if let Err(e) = outcome {
        panic!("criterion {number} failed: {e}");
    }
    assert!(
        elapsed <= budget,
        "criterion {number} exceeded its {budget:?} budget: {elapsed:?}"
    );
}

fn suite_to_result(report: wittkit_core::report::SuiteReport) -> Result<(), String> {
    if report.pass {
        Ok(())
    } else {
        let failed: Vec<String> = report
            .checks
            .iter()
            .filter(|c| !c.pass)
            .map(|c| format!("{}: {}", c.name, c.witness.clone().unwrap_or_default()))
            .collect();
        Err(failed.join("; "))
    }
}

#[test]
fn criterion_01_closed_forms() {
    run_criterion(
        1,
        "generated S_0, S_1, P_0, P_1 match their closed forms for p in {2,3,5}",
        Duration::from_secs(5),
        || suite_to_result(suites::run_suite("polys", 42).map_err(|e| e.to_string())?),
    );
}

#[test]
fn criterion_02_ghost_homomorphism() {
    run_criterion(
        2,
        "symbolic ghost-homomorphism certification in Z[a_0..a_3, b_0..b_3], p in {2,3}",
        Duration::from_secs(60),
        || suite_to_result(suites::run_suite("ghosthom", 42).map_err(|e| e.to_string())?),
    );
}

#[test]
fn criterion_03_wn_fp_tables() {
    run_criterion(
        3,
        "W_n(F_p) = Z/p^n by exhaustive tables for (p,n) in {(2,2),(2,3),(2,4),(3,2),(3,3)}",
        Duration::from_secs(10),
        || suite_to_result(suites::run_suite("wittfp", 42).map_err(|e| e.to_string())?),
    );
}

#[test]
fn criterion_04_structural_identities() {
    run_criterion(
        4,
        "F ring-hom, V additive, FV = p, projection formula, R ring-hom, [a][b] = [ab] \
         on W_4(Z) and W_4(Z/36), >= 300 samples each",
        Duration::from_secs(60),
        || suite_to_result(suites::run_suite("structural", 42).map_err(|e| e.to_string())?),
    );
}

#[test]
fn criterion_05_cofree_lift() {
    run_criterion(
        5,
        "cofree lift: lambda(2) = (2,-1,-4) over (Z, id) at p = 2, ghost_k(lambda) = phi^k \
         on 100 samples",
        Duration::from_secs(5),
        || suite_to_result(suites::run_suite("cofree", 42).map_err(|e| e.to_string())?),
    );
}

#[test]
fn criterion_06_delta_cartier_master_identity() {
    run_criterion(
        6,
        "delta-Cartier master identity F(u) = u^p + p delta(u) in A[V], A in \
         {Z, free delta-ring}, p in {2,3}, precision 5, 200 samples",
        Duration::from_secs(60),
        || suite_to_result(suites::run_suite("deltacartier", 42).map_err(|e| e.to_string())?),
    );
}

#[test]
fn criterion_07_square_zero_counterexample() {
    run_criterion(
        7,
        "square-zero pre-delta-Cartier ring: delta(V a) = a - p^(p-2) V(a^p) fails on \
         nonzero ideal elements",
        Duration::from_secs(1),
        || suite_to_result(suites::run_suite("squarezero", 42).map_err(|e| e.to_string())?),
    );
}

#[test]
fn criterion_08_tower_vs_witt() {
    run_criterion(
        8,
        "tower-vs-Witt: ghost images and sampled operations agree for (Z, id) p in {2,3} \
         n <= 4 and (Z[x], x -> x^2) p = 2 n = 2",
        Duration::from_secs(60),
        || suite_to_result(suites::run_suite("tower", 42).map_err(|e| e.to_string())?),
    );
}

#[test]
fn criterion_09_perfection_collapse() {
    run_criterion(
        9,
        "char-p collapse: A[V] elements over F_p with V-support <= k land in A after k \
         Frobenius steps",
        Duration::from_secs(5),
        || suite_to_result(suites::run_suite("perfection", 42).map_err(|e| e.to_string())?),
    );
}

#[test]
fn criterion_10_cross_strategy_benchmark() {
    run_criterion(
        10,
        "10^4 random products in W_4(Z) at p = 2: polynomial evaluation and \
         ghost-coordinate arithmetic agree, both timed",
        Duration::from_secs(120),
        || {
            let report = suites::bench_strategies(2, 4, 10_000, 42).map_err(|e| e.to_string())?;
            println!(
                "  polynomial strategy: {:.3}s, ghost strategy: {:.3}s, P_k term counts {:?}",
                report.poly_nanos as f64 / 1e9,
                report.ghost_nanos as f64 / 1e9,
                report.prod_poly_terms
            );
            if report.agree {
                Ok(())
            } else {
                Err(report.mismatch.unwrap_or_default())
            }
        },
    );
}
