//! Command-line surface for the qcalc toolkit: scalar evaluation, tree
//! enumeration, CSV grids for the density/CDF figures, lattice sampling,
//! and the identity-verification suites.
//!
//! Exit codes: 0 success, 1 verification failure, 2 usage error,
//! 3 non-convergence, 4 enumeration budget exceeded.

use std::fmt::Write as _;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};

use qcalc::qcore::{QParams, SeriesControl};
use qcalc::qdist::{CdfMethod, KBetaDist, KGammaDist};
use qcalc::qspecial::{beta_qk, gamma_q, gamma_qk, BetaMethod, GammaMethod};
use qcalc::qtrees::{
    compose, enumerate, weight, weighted_cardinality, weighted_cardinality_enumerated,
    GraftingSequence, TreeShapeParams, DEFAULT_ENUMERATION_BUDGET,
};
use qcalc::verify::{run_suite, Suite};
use qcalc::Error;

#[derive(Parser)]
#[command(
    name = "qcalc",
    about = "q-calculus toolkit: q-gamma/q-beta special functions, q-distributions, \
             and the weighted planar-tree model behind them",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a special function or distribution at a point.
    Eval {
        #[command(subcommand)]
        target: EvalTarget,
    },
    /// Weighted tree combinatorics: polynomials, enumeration, weights.
    Trees {
        #[command(subcommand)]
        target: TreesTarget,
    },
    /// Emit CSV value grids (density and CDF curves).
    Grid {
        #[command(subcommand)]
        target: GridTarget,
    },
    /// Draw from a q-distribution via its lattice measure.
    Sample {
        #[command(subcommand)]
        target: SampleTarget,
    },
    /// Run an identity-verification suite.
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum GammaMethodArg {
    Closed,
    Product,
    Series,
    Integral,
}

impl From<GammaMethodArg> for GammaMethod {
    fn from(m: GammaMethodArg) -> GammaMethod {
        match m {
            GammaMethodArg::Closed => GammaMethod::ClosedForm,
            GammaMethodArg::Product => GammaMethod::InfiniteProduct,
            GammaMethodArg::Series => GammaMethod::Series,
            GammaMethodArg::Integral => GammaMethod::QIntegral,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum BetaMethodArg {
    Ratio,
    Closed,
    Integral,
}

impl From<BetaMethodArg> for BetaMethod {
    fn from(m: BetaMethodArg) -> BetaMethod {
        match m {
            BetaMethodArg::Ratio => BetaMethod::GammaRatio,
            BetaMethodArg::Closed => BetaMethod::ClosedForm,
            BetaMethodArg::Integral => BetaMethod::QIntegral,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum CdfMethodArg {
    Series,
    Jackson,
}

impl From<CdfMethodArg> for CdfMethod {
    fn from(m: CdfMethodArg) -> CdfMethod {
        match m {
            CdfMethodArg::Series => CdfMethod::Series,
            CdfMethodArg::Jackson => CdfMethod::Jackson,
        }
    }
}

#[derive(Subcommand)]
enum EvalTarget {
    /// Gamma_{q,k}(t).
    Gamma {
        #[arg(long)]
        t: f64,
        #[arg(long)]
        q: f64,
        #[arg(long)]
        k: f64,
        #[arg(long, value_enum, default_value = "closed")]
        method: GammaMethodArg,
    },
    /// The plain q-gamma Gamma_q(t).
    GammaQ {
        #[arg(long)]
        t: f64,
        #[arg(long)]
        q: f64,
    },
    /// B_{q,k}(t, s).
    Beta {
        #[arg(long)]
        t: f64,
        #[arg(long)]
        s: f64,
        #[arg(long)]
        q: f64,
        #[arg(long)]
        k: f64,
        #[arg(long, value_enum, default_value = "closed")]
        method: BetaMethodArg,
    },
    /// k-gamma q-density at x.
    DensityGamma {
        #[arg(long)]
        x: f64,
        #[arg(long)]
        t: f64,
        #[arg(long)]
        q: f64,
        #[arg(long)]
        k: f64,
    },
    /// k-gamma cumulative distribution at x.
    CdfGamma {
        #[arg(long)]
        x: f64,
        #[arg(long)]
        t: f64,
        #[arg(long)]
        q: f64,
        #[arg(long)]
        k: f64,
        #[arg(long, value_enum, default_value = "series")]
        method: CdfMethodArg,
    },
    /// k-beta q-density at x.
    DensityBeta {
        #[arg(long)]
        x: f64,
        #[arg(long)]
        t: f64,
        #[arg(long)]
        s: f64,
        #[arg(long)]
        q: f64,
        #[arg(long)]
        k: f64,
    },
    /// k-beta cumulative distribution at x.
    CdfBeta {
        #[arg(long)]
        x: f64,
        #[arg(long)]
        t: f64,
        #[arg(long)]
        s: f64,
        #[arg(long)]
        q: f64,
        #[arg(long)]
        k: f64,
        #[arg(long, value_enum, default_value = "series")]
        method: CdfMethodArg,
    },
}

#[derive(Subcommand)]
enum TreesTarget {
    /// Weighted cardinality polynomial of the shape (t, n, k).
    Poly {
        #[arg(long)]
        t: u32,
        #[arg(long)]
        n: u32,
        #[arg(long)]
        k: u32,
        /// Sum weights by brute-force enumeration instead of the closed
        /// bracket-polynomial product.
        #[arg(long)]
        brute: bool,
        #[arg(long, default_value_t = DEFAULT_ENUMERATION_BUDGET)]
        budget: u64,
    },
    /// List every tree of the shape: CSV "sequence",weight_exponent, or
    /// one JSON object per line with --format json.
    Enumerate {
        #[arg(long)]
        t: u32,
        #[arg(long)]
        n: u32,
        #[arg(long)]
        k: u32,
        #[arg(long, value_enum, default_value = "csv")]
        format: ListFormat,
        #[arg(long, default_value_t = DEFAULT_ENUMERATION_BUDGET)]
        budget: u64,
    },
    /// Weight monomial of a grafting sequence.
    Weight {
        /// Comma-separated grafting indices, e.g. 1,3,6,7.
        #[arg(long)]
        seq: String,
        #[arg(long)]
        t: u32,
        #[arg(long)]
        k: u32,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ListFormat {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum GridTarget {
    /// k-gamma density curves.
    DensityGamma(GammaGridArgs),
    /// k-gamma CDF curves.
    CdfGamma(GammaGridArgs),
    /// k-beta density curves.
    DensityBeta(BetaGridArgs),
    /// k-beta CDF curves.
    CdfBeta(BetaGridArgs),
}

#[derive(Args)]
struct GammaGridArgs {
    /// Deformation: a value or a sweep (lo..hi, lo..hi:N).
    #[arg(long)]
    q: Sweep,
    /// Shape k: a value or a sweep.
    #[arg(long)]
    k: Sweep,
    #[arg(long)]
    t: f64,
    /// Number of x samples per curve, from 0 to the support endpoint.
    #[arg(long, default_value_t = 200)]
    points: usize,
}

#[derive(Args)]
struct BetaGridArgs {
    #[arg(long)]
    q: Sweep,
    #[arg(long)]
    k: Sweep,
    #[arg(long)]
    t: f64,
    #[arg(long)]
    s: f64,
    #[arg(long, default_value_t = 200)]
    points: usize,
}

#[derive(Subcommand)]
enum SampleTarget {
    /// Draw from the k-gamma q-distribution.
    Gamma {
        #[arg(long)]
        t: f64,
        #[arg(long)]
        q: f64,
        #[arg(long)]
        k: f64,
        #[arg(long, default_value_t = 1)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1e-9)]
        tail_tol: f64,
        /// Print the lattice measure as JSON instead of drawing.
        #[arg(long)]
        measure: bool,
    },
    /// Draw from the k-beta q-distribution.
    Beta {
        #[arg(long)]
        t: f64,
        #[arg(long)]
        s: f64,
        #[arg(long)]
        q: f64,
        #[arg(long)]
        k: f64,
        #[arg(long, default_value_t = 1)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1e-9)]
        tail_tol: f64,
        #[arg(long)]
        measure: bool,
    },
}

#[derive(Args)]
struct VerifyArgs {
    /// Suite: all, qcore, trees, gamma, beta, moments.
    #[arg(long, default_value = "all")]
    suite: String,
    /// Loosen per-case tolerances to at least this value.
    #[arg(long)]
    tol: Option<f64>,
    /// Also write the JSON report to this path.
    #[arg(long)]
    json: Option<String>,
}

/// A parameter value or an inclusive sweep.
///
/// `lo..hi` steps by 1 when the span is a whole number and falls back to
/// 11 evenly spaced values otherwise; `lo..hi:N` forces N evenly spaced
/// values.
#[derive(Clone, Debug)]
struct Sweep {
    values: Vec<f64>,
}

impl FromStr for Sweep {
    type Err = String;

    fn from_str(s: &str) -> Result<Sweep, String> {
        if let Some((range, count)) = s.split_once(':') {
            let (lo, hi) = parse_range(range)?;
            let n: usize = count
                .parse()
                .map_err(|_| format!("bad sweep count {count:?}"))?;
            if n < 2 {
                return Err("sweep count must be >= 2".to_string());
            }
            return Ok(Sweep {
                values: linspace(lo, hi, n),
            });
        }
        if s.contains("..") {
            let (lo, hi) = parse_range(s)?;
            let span = hi - lo;
            if (span - span.round()).abs() < 1e-9 && span.round() >= 1.0 {
                let steps = span.round() as usize;
                return Ok(Sweep {
                    values: (0..=steps).map(|i| lo + i as f64).collect(),
                });
            }
            return Ok(Sweep {
                values: linspace(lo, hi, 11),
            });
        }
        let v: f64 = s.parse().map_err(|_| format!("bad number {s:?}"))?;
        Ok(Sweep { values: vec![v] })
    }
}

fn parse_range(s: &str) -> Result<(f64, f64), String> {
    let (lo, hi) = s
        .split_once("..")
        .ok_or_else(|| format!("bad sweep {s:?}"))?;
    let lo: f64 = lo.parse().map_err(|_| format!("bad number {lo:?}"))?;
    let hi: f64 = hi.parse().map_err(|_| format!("bad number {hi:?}"))?;
    if hi <= lo {
        return Err(format!("sweep requires hi > lo, got {lo}..{hi}"));
    }
    Ok((lo, hi))
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| {
            // Pin the endpoints: the scaled form can round one ulp past hi.
            if i == 0 {
                lo
            } else if i == n - 1 {
                hi
            } else {
                lo + (hi - lo) * i as f64 / (n - 1) as f64
            }
        })
        .collect()
}

/// 17 significant digits: lossless round-trip in CSV output.
fn csv_num(v: f64) -> String {
    format!("{v:.16e}")
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            let code = match e {
                Error::InvalidParameter(_) | Error::Domain(_) => 2,
                Error::NonConvergence { .. } => 3,
                Error::BudgetExceeded { .. } => 4,
            };
            ExitCode::from(code)
        }
    }
}

fn run(command: Command) -> Result<ExitCode, Error> {
    let ctl = SeriesControl::default();
    match command {
        Command::Eval { target } => {
            let value = eval_value(target, &ctl)?;
            println!("{value}");
            Ok(ExitCode::SUCCESS)
        }
        Command::Trees { target } => run_trees(target),
        Command::Grid { target } => run_grid(target, &ctl),
        Command::Sample { target } => run_sample(target, &ctl),
        Command::Verify(args) => run_verify(args),
    }
}

fn eval_value(target: EvalTarget, ctl: &SeriesControl) -> Result<f64, Error> {
    match target {
        EvalTarget::Gamma { t, q, k, method } => {
            gamma_qk(t, &QParams::new(q, k)?, method.into(), ctl)
        }
        EvalTarget::GammaQ { t, q } => {
            // Route q validation through the common constructor.
            QParams::new(q, 1.0)?;
            gamma_q(t, q, ctl)
        }
        EvalTarget::Beta { t, s, q, k, method } => {
            beta_qk(t, s, &QParams::new(q, k)?, method.into(), ctl)
        }
        EvalTarget::DensityGamma { x, t, q, k } => {
            KGammaDist::new(QParams::new(q, k)?, t)?.density(x, ctl)
        }
        EvalTarget::CdfGamma { x, t, q, k, method } => {
            KGammaDist::new(QParams::new(q, k)?, t)?.cdf(x, method.into(), ctl)
        }
        EvalTarget::DensityBeta { x, t, s, q, k } => {
            KBetaDist::new(QParams::new(q, k)?, t, s)?.density(x, ctl)
        }
        EvalTarget::CdfBeta {
            x,
            t,
            s,
            q,
            k,
            method,
        } => KBetaDist::new(QParams::new(q, k)?, t, s)?.cdf(x, method.into(), ctl),
    }
}

fn run_trees(target: TreesTarget) -> Result<ExitCode, Error> {
    match target {
        TreesTarget::Poly {
            t,
            n,
            k,
            brute,
            budget,
        } => {
            let shape = TreeShapeParams::new(t, n, k)?;
            let poly = if brute {
                weighted_cardinality_enumerated(&shape, budget)?
            } else {
                weighted_cardinality(&shape)
            };
            println!("{poly}");
            Ok(ExitCode::SUCCESS)
        }
        TreesTarget::Enumerate {
            t,
            n,
            k,
            format,
            budget,
        } => {
            let shape = TreeShapeParams::new(t, n, k)?;
            let mut out = String::new();
            for item in enumerate(&shape, budget)? {
                let seq: Vec<String> = item.sequence.indices().iter().map(u32::to_string).collect();
                match format {
                    ListFormat::Csv => {
                        let _ = writeln!(out, "\"{}\",{}", seq.join(","), item.weight_exponent);
                    }
                    ListFormat::Json => {
                        let line = serde_json::json!({
                            "sequence": item.sequence.indices(),
                            "weight_exponent": item.weight_exponent,
                            "weight": item.weight().to_string(),
                            "tree": item.tree,
                        });
                        let _ = writeln!(out, "{line}");
                    }
                }
            }
            print!("{out}");
            Ok(ExitCode::SUCCESS)
        }
        TreesTarget::Weight { seq, t, k } => {
            let indices: Result<Vec<u32>, _> = seq
                .split(',')
                .filter(|s| !s.is_empty())
                .map(str::parse)
                .collect();
            let indices =
                indices.map_err(|e| Error::InvalidParameter(format!("bad --seq: {e}")))?;
            let shape = TreeShapeParams::new(t, indices.len() as u32, k)?;
            let code = GraftingSequence::new(indices, &shape)?;
            // Materialize the tree too: an out-of-range code must fail here.
            let _tree = compose(&code, &shape)?;
            println!("{}", weight(&code));
            Ok(ExitCode::SUCCESS)
        }
    }
}

enum GridKind {
    DensityGamma,
    CdfGamma,
    DensityBeta,
    CdfBeta,
}

type GridEval = Box<dyn Fn(f64) -> Result<f64, Error>>;

fn run_grid(target: GridTarget, ctl: &SeriesControl) -> Result<ExitCode, Error> {
    let (kind, q, k, t, s, points) = match target {
        GridTarget::DensityGamma(a) => (GridKind::DensityGamma, a.q, a.k, a.t, 0.0, a.points),
        GridTarget::CdfGamma(a) => (GridKind::CdfGamma, a.q, a.k, a.t, 0.0, a.points),
        GridTarget::DensityBeta(a) => (GridKind::DensityBeta, a.q, a.k, a.t, a.s, a.points),
        GridTarget::CdfBeta(a) => (GridKind::CdfBeta, a.q, a.k, a.t, a.s, a.points),
    };
    if points < 2 {
        return Err(Error::InvalidParameter("--points must be >= 2".into()));
    }
    let (sweep_name, combos): (Option<&str>, Vec<(f64, f64)>) =
        match (q.values.len() > 1, k.values.len() > 1) {
            (true, true) => {
                return Err(Error::InvalidParameter(
                    "at most one of --q/--k may sweep".into(),
                ))
            }
            (true, false) => (
                Some("q"),
                q.values.iter().map(|&qv| (qv, k.values[0])).collect(),
            ),
            (false, true) => (
                Some("k"),
                k.values.iter().map(|&kv| (q.values[0], kv)).collect(),
            ),
            (false, false) => (None, vec![(q.values[0], k.values[0])]),
        };

    let mut out = String::new();
    match sweep_name {
        Some(name) => {
            let _ = writeln!(out, "{name},x,value");
        }
        None => {
            let _ = writeln!(out, "x,value");
        }
    }
    for &(qv, kv) in &combos {
        let params = QParams::new(qv, kv)?;
        let sweep_value = match sweep_name {
            Some("q") => Some(qv),
            Some(_) => Some(kv),
            None => None,
        };
        let (upper, eval): (f64, GridEval) = match kind {
            GridKind::DensityGamma => {
                let d = KGammaDist::new(params, t)?;
                let c = *ctl;
                (d.upper(), Box::new(move |x| d.density(x, &c)))
            }
            GridKind::CdfGamma => {
                let d = KGammaDist::new(params, t)?;
                let c = *ctl;
                (
                    d.upper(),
                    Box::new(move |x| d.cdf(x, CdfMethod::Series, &c)),
                )
            }
            GridKind::DensityBeta => {
                let d = KBetaDist::new(params, t, s)?;
                let c = *ctl;
                (d.upper(), Box::new(move |x| d.density(x, &c)))
            }
            GridKind::CdfBeta => {
                let d = KBetaDist::new(params, t, s)?;
                let c = *ctl;
                (
                    d.upper(),
                    Box::new(move |x| d.cdf(x, CdfMethod::Series, &c)),
                )
            }
        };
        let density_kind = matches!(kind, GridKind::DensityGamma | GridKind::DensityBeta);
        for x in linspace(0.0, upper, points) {
            // The density diverges at 0 for t < 1; skip that grid point.
            if density_kind && t < 1.0 && x == 0.0 {
                continue;
            }
            let value = eval(x)?;
            match sweep_value {
                Some(sv) => {
                    let _ = writeln!(out, "{},{},{}", csv_num(sv), csv_num(x), csv_num(value));
                }
                None => {
                    let _ = writeln!(out, "{},{}", csv_num(x), csv_num(value));
                }
            }
        }
    }
    print!("{out}");
    Ok(ExitCode::SUCCESS)
}

fn run_sample(target: SampleTarget, ctl: &SeriesControl) -> Result<ExitCode, Error> {
    let (measure, count, seed, print_measure) = match target {
        SampleTarget::Gamma {
            t,
            q,
            k,
            count,
            seed,
            tail_tol,
            measure,
        } => {
            let dist = KGammaDist::new(QParams::new(q, k)?, t)?;
            (dist.lattice_measure(tail_tol, ctl)?, count, seed, measure)
        }
        SampleTarget::Beta {
            t,
            s,
            q,
            k,
            count,
            seed,
            tail_tol,
            measure,
        } => {
            let dist = KBetaDist::new(QParams::new(q, k)?, t, s)?;
            (dist.lattice_measure(tail_tol, ctl)?, count, seed, measure)
        }
    };
    if print_measure {
        println!(
            "{}",
            serde_json::to_string(&measure).expect("measure serializes")
        );
        return Ok(ExitCode::SUCCESS);
    }
    if count < 1 {
        return Err(Error::InvalidParameter("--count must be >= 1".into()));
    }
    let mut out = String::new();
    for draw in measure.sample(count, seed) {
        let _ = writeln!(out, "{draw}");
    }
    print!("{out}");
    Ok(ExitCode::SUCCESS)
}

fn run_verify(args: VerifyArgs) -> Result<ExitCode, Error> {
    let suite = Suite::from_name(&args.suite).ok_or_else(|| {
        Error::InvalidParameter(format!(
            "unknown suite {:?}; expected all, qcore, trees, gamma, beta, or moments",
            args.suite
        ))
    })?;
    if let Some(tol) = args.tol {
        if !(tol.is_finite() && tol > 0.0) {
            return Err(Error::InvalidParameter("--tol must be > 0".into()));
        }
    }
    let report = run_suite(suite, args.tol);
    let mut out = String::new();
    for case in &report.cases {
        let _ = writeln!(
            out,
            "{} {} [{}] lhs={:e} rhs={:e} rel_err={:e} tol={:e}",
            if case.pass { "PASS" } else { "FAIL" },
            case.id,
            case.params,
            case.lhs,
            case.rhs,
            case.rel_err,
            case.tol
        );
    }
    let passed = report.cases.iter().filter(|c| c.pass).count();
    let _ = writeln!(
        out,
        "suite {}: {passed}/{} cases passed",
        report.suite,
        report.cases.len()
    );
    print!("{out}");
    if let Some(path) = &args.json {
        let json = serde_json::to_string_pretty(&report).expect("report serializes");
        std::fs::write(path, json)
            .map_err(|e| Error::InvalidParameter(format!("cannot write {path}: {e}")))?;
    }
    if report.pass {
        Ok(ExitCode::SUCCESS)
    } else if report.cases.iter().any(|c| !c.pass && c.nonconvergent) {
        Ok(ExitCode::from(3))
    } else {
        Ok(ExitCode::from(1))
    }
}
