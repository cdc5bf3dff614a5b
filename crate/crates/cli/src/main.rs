//! wittkit: generate and certify universal Witt polynomials, run the
//! identity suites, evaluate Witt/ghost operations on elements, and compare
//! the two multiplication strategies.
//!
//! Exit codes: 0 success, 1 usage error, 2 resource limit, 3 mathematical
//! failure (a suite found a counterexample or the strategies disagree).

use std::io::Read;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use wittkit_core::delta::{delta_witt, DeltaStructure};
use wittkit_core::ring::{Element, PhiMap, RingHandle};
use wittkit_core::suites;
use wittkit_core::witt::{WittContext, WittVec};
use wittkit_core::wittpoly::{
    default_cache_dir, gen_witt_family, save_polys, GhostVector, PolyKind, DEFAULT_TERM_CAP,
};
use wittkit_core::{unghost, Error};

const EXIT_USAGE: i32 = 1;
const EXIT_RESOURCE: i32 = 2;
const EXIT_MATH: i32 = 3;

#[derive(Parser)]
#[command(name = "wittkit", version, about = "Exact p-typical Witt vector kernel")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate universal Witt polynomials and write them as JSON.
    Gen(GenArgs),
    /// Run named identity suites and emit a JSON report.
    Check(CheckArgs),
    /// Apply one operation to an element read from stdin as JSON.
    Eval(EvalArgs),
    /// Time polynomial-evaluation against ghost-coordinate multiplication.
    Bench(BenchArgs),
}

#[derive(Args)]
struct GenArgs {
    /// Primes, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    p: Vec<u64>,
    /// Highest polynomial index to generate.
    #[arg(long)]
    n: usize,
    /// Kinds (sum, prod, neg, frob, delta), comma separated.
    #[arg(long, value_delimiter = ',', default_value = "sum,prod,neg,frob,delta")]
    kind: Vec<String>,
    /// Write all generated polynomials into this single JSON file
    /// (default: one keyed file per polynomial in the cache directory).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Cache directory (default: $WITTKIT_CACHE or ./witt-cache).
    #[arg(long)]
    cache_dir: Option<PathBuf>,
    /// Cap on intermediate monomial counts.
    #[arg(long, default_value_t = DEFAULT_TERM_CAP)]
    term_cap: usize,
    /// Pretty-print JSON output.
    #[arg(long)]
    pretty: bool,
}

#[derive(Args)]
struct CheckArgs {
    /// Suite name, or `all`; comma separated for several.
    #[arg(long, value_delimiter = ',', required = true)]
    suite: Vec<String>,
    /// PRNG seed; reports are byte-identical for a fixed seed.
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Restrict suites to these primes (default: each suite's full grid).
    #[arg(long, value_delimiter = ',')]
    p: Vec<u64>,
    /// Restrict index-grid suites (wittfp) to this index.
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    pretty: bool,
}

#[derive(Args)]
struct EvalArgs {
    /// Operation: add, mul, sub, neg, frob, versch, restrict, teich, ghost,
    /// unghost, lambda, delta.
    #[arg(long)]
    op: String,
    /// Coefficient ring: Z | Zmod:<m> | Fp:<p> | polyZ:<v1,v2,...>.
    #[arg(long, default_value = "Z")]
    ring: String,
    /// The prime; may also come from the input JSON.
    #[arg(long)]
    p: Option<u64>,
    /// Target length for teich/lambda.
    #[arg(long)]
    len: Option<usize>,
    #[arg(long)]
    pretty: bool,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, default_value_t = 2)]
    p: u64,
    /// Witt vector length.
    #[arg(long, default_value_t = 4)]
    n: usize,
    #[arg(long, default_value_t = 10_000)]
    count: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long)]
    pretty: bool,
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => EXIT_USAGE,
            };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    let code = match cli.command {
        Command::Gen(args) => cmd_gen(args),
        Command::Check(args) => cmd_check(args),
        Command::Eval(args) => cmd_eval(args),
        Command::Bench(args) => cmd_bench(args),
    };
    std::process::exit(code);
}

fn exit_code_for(e: &Error) -> i32 {
    match e {
        Error::ResourceLimit(..) => EXIT_RESOURCE,
        Error::IsoFailure(..) => EXIT_MATH,
        _ => EXIT_USAGE,
    }
}

fn fail(e: &Error) -> i32 {
    eprintln!("error: {e}");
    exit_code_for(e)
}

fn emit(value: &serde_json::Value, pretty: bool) {
    if pretty {
        println!("{}", serde_json::to_string_pretty(value).expect("serializable"));
    } else {
        println!("{}", serde_json::to_string(value).expect("serializable"));
    }
}

fn cmd_gen(args: GenArgs) -> i32 {
    let cache_dir = args.cache_dir.unwrap_or_else(default_cache_dir);
    let mut kinds = Vec::new();
    for k in &args.kind {
        match PolyKind::parse(k) {
            Ok(kind) => kinds.push(kind),
            Err(e) => return fail(&e),
        }
    }
    let mut all = Vec::new();
    let mut summary = Vec::new();
    for &p in &args.p {
        for &kind in &kinds {
            let family = match gen_witt_family(p, args.n, kind, args.term_cap) {
                Ok(f) => f,
                Err(e) => return fail(&e),
            };
            for poly in family {
                summary.push(serde_json::json!({
                    "p": poly.p,
                    "n": poly.n,
                    "kind": poly.kind.as_str(),
                    "terms": poly.body.num_terms(),
                    "max_abs_coeff": poly.body.max_abs_coeff().to_string(),
                }));
                all.push(poly);
            }
        }
    }
    let written: Vec<String> = if let Some(out) = &args.out {
        if let Err(e) = save_polys(out, &all) {
            return fail(&e);
        }
        vec![out.display().to_string()]
    } else {
        let mut files = Vec::new();
        for poly in &all {
            let path = cache_dir.join(format!(
                "witt_p{}_{}_{}_v{}.json",
                poly.p,
                poly.kind.as_str(),
                poly.n,
                wittkit_core::wittpoly::SCHEMA_VERSION
            ));
            if let Err(e) = save_polys(&path, std::slice::from_ref(poly)) {
                return fail(&e);
            }
            files.push(path.display().to_string());
        }
        files
    };
    emit(
        &serde_json::json!({
            "generated": summary,
            "files": written,
        }),
        args.pretty,
    );
    0
}

fn cmd_check(args: CheckArgs) -> i32 {
    let names: Vec<String> = if args.suite.iter().any(|s| s == "all") {
        suites::ALL_SUITES.iter().map(|s| s.to_string()).collect()
    } else {
        args.suite.clone()
    };
    let filter = suites::SuiteFilter {
        ps: (!args.p.is_empty()).then(|| args.p.clone()),
        n: args.n,
    };
    let mut reports = Vec::new();
    let mut all_pass = true;
    for name in &names {
        match suites::run_suite_filtered(name, args.seed, &filter) {
            Ok(report) => {
                all_pass &= report.pass;
                reports.push(serde_json::to_value(&report).expect("serializable"));
            }
            Err(e) => return fail(&e),
        }
    }
    emit(
        &serde_json::json!({
            "seed": args.seed,
            "pass": all_pass,
            "suites": reports,
        }),
        args.pretty,
    );
    if all_pass {
        0
    } else {
        EXIT_MATH
    }
}

fn parse_ring(spec: &str) -> Result<RingHandle, Error> {
    if spec == "Z" {
        return Ok(RingHandle::integers());
    }
    if let Some(m) = spec.strip_prefix("Zmod:") {
        let m: u64 = m
            .parse()
            .map_err(|_| Error::InvalidInput(format!("bad modulus in `{spec}`")))?;
        return RingHandle::integers_mod(m);
    }
    if let Some(p) = spec.strip_prefix("Fp:") {
        let p: u64 = p
            .parse()
            .map_err(|_| Error::InvalidInput(format!("bad prime in `{spec}`")))?;
        return RingHandle::prime_field(p);
    }
    if let Some(vars) = spec.strip_prefix("polyZ:") {
        let names: Vec<String> = vars.split(',').map(str::to_string).collect();
        return RingHandle::poly_over_named(RingHandle::integers(), names);
    }
    Err(Error::InvalidInput(format!(
        "unknown ring spec `{spec}` (expected Z, Zmod:<m>, Fp:<p> or polyZ:<vars>)"
    )))
}

fn read_stdin_json() -> Result<serde_json::Value, Error> {
    let mut buf = String::new();
    std::io::stdin().read_to_string(&mut buf)?;
    Ok(serde_json::from_str(buf.trim())?)
}

fn parse_coords(
    ring: &RingHandle,
    input: &serde_json::Value,
    key: &str,
) -> Result<Vec<Element>, Error> {
    input
        .get(key)
        .and_then(|v| v.as_array())
        .ok_or_else(|| Error::InvalidInput(format!("missing `{key}`")))?
        .iter()
        .map(|c| Element::from_json(ring, c))
        .collect()
}

fn cmd_eval(args: EvalArgs) -> i32 {
    match eval_inner(&args) {
        Ok(value) => {
            emit(&value, args.pretty);
            0
        }
        Err(e) => fail(&e),
    }
}

fn eval_inner(args: &EvalArgs) -> Result<serde_json::Value, Error> {
    let ring = parse_ring(&args.ring)?;
    let input = read_stdin_json()?;
    let p = args
        .p
        .or_else(|| input.get("p").and_then(|v| v.as_u64()))
        .ok_or_else(|| Error::InvalidInput("the prime p is required".into()))?;

    let coords_json = |v: &WittVec| -> serde_json::Value { v.to_json() };

    match args.op.as_str() {
        "add" | "mul" | "sub" => {
            let x = parse_coords(&ring, &input, "coords")?;
            let y = parse_coords(&ring, &input, "rhs")?;
            let ctx = WittContext::new(p, ring.clone(), x.len().max(y.len()))?;
            let a = ctx.from_coords(x)?;
            let b = ctx.from_coords(y)?;
            let out = match args.op.as_str() {
                "add" => ctx.add(&a, &b)?,
                "mul" => ctx.mul(&a, &b)?,
                _ => ctx.sub(&a, &b)?,
            };
            Ok(coords_json(&out))
        }
        "neg" => {
            let x = parse_coords(&ring, &input, "coords")?;
            let ctx = WittContext::new(p, ring.clone(), x.len())?;
            Ok(coords_json(&ctx.neg(&ctx.from_coords(x)?)?))
        }
        "frob" | "F" => {
            let x = parse_coords(&ring, &input, "coords")?;
            let ctx = WittContext::new(p, ring.clone(), x.len())?;
            Ok(coords_json(&ctx.frobenius(&ctx.from_coords(x)?)?))
        }
        "versch" | "V" => {
            let x = parse_coords(&ring, &input, "coords")?;
            let ctx = WittContext::new(p, ring.clone(), x.len() + 1)?;
            Ok(coords_json(&ctx.verschiebung(&ctx.from_coords(x)?)?))
        }
        "restrict" => {
            let x = parse_coords(&ring, &input, "coords")?;
            let ctx = WittContext::new(p, ring.clone(), x.len())?;
            Ok(coords_json(&ctx.restriction(&ctx.from_coords(x)?)?))
        }
        "delta" => {
            let x = parse_coords(&ring, &input, "coords")?;
            let ctx = WittContext::new(p, ring.clone(), x.len())?;
            Ok(coords_json(&delta_witt(&ctx, &ctx.from_coords(x)?)?))
        }
        "teich" => {
            let a = input
                .get("a")
                .ok_or_else(|| Error::InvalidInput("missing `a`".into()))
                .and_then(|v| Element::from_json(&ring, v))?;
            let len = args
                .len
                .ok_or_else(|| Error::InvalidInput("--len is required for teich".into()))?;
            let ctx = WittContext::new(p, ring.clone(), len)?;
            Ok(coords_json(&ctx.teichmuller(&a, len)))
        }
        "ghost" => {
            let x = parse_coords(&ring, &input, "coords")?;
            let g = wittkit_core::ghost(p, &x)?;
            Ok(serde_json::json!({
                "p": p,
                "ghost": g.components.iter().map(|c| c.to_json()).collect::<Vec<_>>(),
            }))
        }
        "unghost" => {
            let g = parse_coords(&ring, &input, "ghost")?;
            let coords = unghost(&GhostVector::new(p, g)?)?;
            Ok(serde_json::json!({
                "p": p,
                "coords": coords.iter().map(|c| c.to_json()).collect::<Vec<_>>(),
            }))
        }
        "lambda" => {
            let a = input
                .get("a")
                .ok_or_else(|| Error::InvalidInput("missing `a`".into()))
                .and_then(|v| Element::from_json(&ring, v))?;
            let len = args
                .len
                .ok_or_else(|| Error::InvalidInput("--len is required for lambda".into()))?;
            let ctx = WittContext::new(p, ring.clone(), len)?;
            // The canonical Frobenius lift: identity on Z, the p-power lift
            // on polynomial rings.
            let phi = if ring.vars().is_empty() {
                PhiMap::Identity
            } else {
                PhiMap::power_lift(&ring, p)?
            };
            let ds = DeltaStructure::phi_lift(ring.clone(), p, phi)?;
            Ok(coords_json(&ctx.cofree_lift(&ds, &a, len)?))
        }
        other => Err(Error::InvalidInput(format!("unknown op `{other}`"))),
    }
}

fn cmd_bench(args: BenchArgs) -> i32 {
    match suites::bench_strategies(args.p, args.n, args.count, args.seed) {
        Ok(report) => {
            let agree = report.agree;
            emit(
                &serde_json::to_value(&report).expect("serializable"),
                args.pretty,
            );
            if agree {
                0
            } else {
                EXIT_MATH
            }
        }
        Err(e) => fail(&e),
    }
}
