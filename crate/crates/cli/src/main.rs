//! `jsr`: bracket, decide and certify the joint spectral radius of a
//! matrix family stored as JSON.

mod report;

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use jsr_core::bounds::{
    bracket, certified_candidates, decide_stability, smp_candidates, BoundsOptions, CertifyOptions, DecideOptions,
    SmpCandidate, SmpValidation, StabilityVerdict, DEFAULT_BUDGET, DEFAULT_K_MAX,
};
use jsr_core::family::{MatrixFamily, Word};
use jsr_core::gallery::{self, GalleryParams};
use jsr_core::inclusion::{robustness_search, simulate_trajectory, uas_probe, Policy, RobustnessOptions, Sampling, UasOptions};
use jsr_core::io::{bounds_csv, emit_family, emit_system, parse_family, parse_system};
use jsr_core::linalg::{EllipsoidalShape, NormKind};
use jsr_core::special::{try_closed_form, ClosedFormOptions};
use jsr_core::structure::{defectivity_probe, DefectivityOptions};
use jsr_core::JsrError;
use nalgebra::DVector;
use num_complex::Complex64;
use serde_json::{json, Value};

use report::RunReport;

const EXIT_STABLE: u8 = 0;
const EXIT_UNSTABLE: u8 = 1;
const EXIT_UNDECIDED: u8 = 2;
const EXIT_NO_RULE: u8 = 3;
const EXIT_USAGE: u8 = 64;
const EXIT_FAILURE: u8 = 65;

#[derive(Parser, Debug)]
#[command(name = "jsr", version, about = "Joint spectral radius bounds, stability decisions and certificates")]
struct Cli {
    /// Write a JSON run report to this path.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Root seed for every randomized step.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Bounds table per product length, as CSV on stdout.
    Bounds {
        file: PathBuf,
        #[arg(long, default_value_t = DEFAULT_K_MAX)]
        kmax: usize,
        /// Comma-separated norms: row, spectral, col.
        #[arg(long, default_value = "row,spectral,col")]
        norms: String,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: u64,
    },
    /// Stability of the switched system: exit 0 stable, 1 unstable, 2 undecided.
    Decide {
        file: PathBuf,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: u64,
        /// Stop after this product length even with budget left.
        #[arg(long)]
        kmax: Option<usize>,
    },
    /// Closed-form value when a structural rule applies; exit 3 otherwise.
    Special { file: PathBuf },
    /// Spectrum-maximizing product candidates, optionally certified.
    Smp {
        file: PathBuf,
        #[arg(long, default_value_t = 8)]
        kmax: usize,
        #[arg(long)]
        certify: bool,
    },
    /// Largest uncertainty level keeping a perturbed system stable.
    Robustness {
        system: PathBuf,
        #[arg(long, default_value_t = 1.0)]
        alpha_hi: f64,
        #[arg(long, default_value_t = 0.01)]
        tol: f64,
        /// Work budget per probed level.
        #[arg(long, default_value_t = 1_000_000)]
        budget: u64,
        /// Sample each uncertainty coordinate on LEVELS+1 points instead of
        /// using the box vertices (required for the 2-norm ball).
        #[arg(long, value_name = "LEVELS")]
        grid: Option<usize>,
    },
    /// Trajectory of the switched system, as CSV on stdout.
    Simulate {
        file: PathBuf,
        #[arg(long, default_value_t = 50)]
        steps: usize,
        /// greedy, random, or a dash-separated cyclic word such as 0-1-1.
        #[arg(long, default_value = "greedy")]
        policy: String,
        /// Comma-separated real initial state; defaults to all ones.
        #[arg(long)]
        x0: Option<String>,
    },
    /// Trajectory growth rate and boundedness of normalized products.
    Probe {
        file: PathBuf,
        #[arg(long, default_value_t = 16)]
        trials: usize,
        #[arg(long, default_value_t = 64)]
        steps: usize,
        /// Growth normalization; defaults to the best lower bound up to length 6.
        #[arg(long)]
        rho: Option<f64>,
    },
    /// Reference family (or system) file on stdout.
    Gallery(GalleryArgs),
}

#[derive(Args, Debug)]
struct GalleryArgs {
    /// blondel, berger-wang, stochastic, sign-flip (alias thm4), swap (alias thm5),
    /// conjugate-pair or swap-system.
    name: String,
    #[arg(long, default_value_t = 1.0)]
    alpha: f64,
    #[arg(long, default_value_t = 3)]
    k: u32,
    #[arg(long, default_value_t = 2.0, allow_hyphen_values = true)]
    a: f64,
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    b: f64,
    #[arg(long, default_value_t = -1.0, allow_hyphen_values = true)]
    c: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    d: f64,
}

/// Failure with its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self { code: EXIT_USAGE, message: message.into() }
    }
}

impl From<JsrError> for Failure {
    fn from(e: JsrError) -> Self {
        let code = match e {
            JsrError::Parse { .. } => EXIT_USAGE,
            _ => EXIT_FAILURE,
        };
        Self { code, message: e.to_string() }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Self::usage(e.to_string())
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))
}

fn load_family(path: &Path, report: &mut RunReport) -> Result<MatrixFamily, Failure> {
    let text = read(path)?;
    report.set_input(path, &text);
    parse_family(&text).map_err(|e| Failure { message: format!("{}: {e}", path.display()), ..e.into() })
}

fn parse_norms(list: &str) -> Result<Vec<NormKind>, Failure> {
    let norms: Vec<NormKind> = list
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| NormKind::parse_standard(s).ok_or_else(|| Failure::usage(format!("unknown norm {s:?}"))))
        .collect::<Result<_, _>>()?;
    if norms.is_empty() {
        return Err(Failure::usage("at least one norm is required"));
    }
    Ok(norms)
}

fn shape_json(shape: &EllipsoidalShape) -> Value {
    let rows: Vec<Vec<[f64; 2]>> = shape.p().rows().iter().map(|r| r.iter().map(|z| [z.re, z.im]).collect()).collect();
    json!({ "p": rows })
}

fn candidate_json(c: &SmpCandidate, validation: Option<&SmpValidation>) -> Value {
    let mut v = json!({
        "word": c.word,
        "compact": c.word.compact(),
        "value": c.value,
        "minimal": c.minimal,
    });
    match validation {
        None => {}
        Some(SmpValidation::Certified(shape)) => {
            v["status"] = json!("certified");
            v["certificate"] = shape_json(shape);
        }
        Some(SmpValidation::NotCertified(r)) => {
            v["status"] = json!("not_certified");
            v["best_ratio"] = json!(r.best_ratio);
            v["attempts"] = r.attempts.iter().map(|a| json!({ "start": a.start, "ratio": a.ratio })).collect();
            v["best_shape"] = shape_json(&r.best_shape);
        }
    }
    v
}

fn parse_policy(s: &str, seed: u64, m: usize) -> Result<Policy, Failure> {
    match s {
        "greedy" => Ok(Policy::GreedyNormMax),
        "random" => Ok(Policy::RandomSeeded(seed)),
        word => {
            let indices = word
                .split('-')
                .map(|t| t.trim().parse::<usize>().map_err(|_| Failure::usage(format!("bad policy {s:?}"))))
                .collect::<Result<Vec<_>, _>>()?;
            Ok(Policy::FixedWordCyclic(Word::for_alphabet(indices, m)?))
        }
    }
}

fn parse_state(s: Option<&str>, n: usize) -> Result<DVector<Complex64>, Failure> {
    let Some(s) = s else {
        return Ok(DVector::from_element(n, Complex64::new(1.0, 0.0)));
    };
    let values = s
        .split(',')
        .map(|t| t.trim().parse::<f64>().map_err(|_| Failure::usage(format!("bad initial state {s:?}"))))
        .collect::<Result<Vec<_>, _>>()?;
    if values.len() != n {
        return Err(Failure::usage(format!("initial state has {} entries, expected {n}", values.len())));
    }
    Ok(DVector::from_iterator(n, values.into_iter().map(|x| Complex64::new(x, 0.0))))
}

fn verdict_code(v: &StabilityVerdict) -> u8 {
    match v {
        StabilityVerdict::Stable { .. } => EXIT_STABLE,
        StabilityVerdict::Unstable { .. } => EXIT_UNSTABLE,
        StabilityVerdict::Undecided { .. } => EXIT_UNDECIDED,
    }
}

/// Writes to stdout, ignoring a closed pipe.
fn emit(text: &str) {
    let _ = std::io::stdout().lock().write_all(text.as_bytes());
}

fn pretty(v: &impl serde::Serialize) -> String {
    serde_json::to_string_pretty(v).expect("report data serializes")
}

fn run(cli: &Cli, report: &mut RunReport) -> Result<u8, Failure> {
    match &cli.command {
        Command::Bounds { file, kmax, norms, budget } => {
            if *kmax == 0 {
                return Err(Failure::usage("--kmax must be at least 1"));
            }
            let family = load_family(file, report)?;
            let norms = parse_norms(norms)?;
            report.option("kmax", kmax).option("norms", norms.iter().map(NormKind::label).collect::<Vec<_>>());
            report.option("budget", budget);
            let result = bracket(&family, &BoundsOptions { k_max: *kmax, norms, budget: *budget })?;
            emit(&bounds_csv(&result.records));
            report.section("bracket", &result.bracket).section("records", &result.records);
            report.counter("multiplications", result.bracket.multiplications);
            Ok(0)
        }
        Command::Decide { file, budget, kmax } => {
            let family = load_family(file, report)?;
            report.option("budget", budget).option("kmax", kmax);
            let opts = DecideOptions { k_max: *kmax, ..DecideOptions::with_budget(*budget) };
            let verdict = decide_stability(&family, &opts)?;
            emit(&format!("{}\n", pretty(&verdict)));
            report.section("verdict", &verdict);
            Ok(verdict_code(&verdict))
        }
        Command::Special { file } => {
            let family = load_family(file, report)?;
            match try_closed_form(&family, &ClosedFormOptions::default())? {
                Some(result) => {
                    emit(&format!("{}\n", pretty(&result)));
                    report.section("closed_form", &result);
                    Ok(0)
                }
                None => {
                    emit("no rule\n");
                    report.section("closed_form", &Value::Null);
                    Ok(EXIT_NO_RULE)
                }
            }
        }
        Command::Smp { file, kmax, certify } => {
            if *kmax == 0 {
                return Err(Failure::usage("--kmax must be at least 1"));
            }
            let family = load_family(file, report)?;
            report.option("kmax", kmax).option("certify", certify);
            let list: Vec<Value> = if *certify {
                let opts = CertifyOptions::default();
                report.option("certify_iters", opts.iters).option("certify_tol", opts.tol);
                certified_candidates(&family, *kmax, &opts)?.iter().map(|(c, v)| candidate_json(c, Some(v))).collect()
            } else {
                smp_candidates(&family, *kmax, DEFAULT_BUDGET)?.iter().map(|c| candidate_json(c, None)).collect()
            };
            emit(&format!("{}\n", pretty(&list)));
            report.section("smp_candidates", &list);
            Ok(0)
        }
        Command::Robustness { system, alpha_hi, tol, budget, grid } => {
            let text = read(system)?;
            report.set_input(system, &text);
            let sys = parse_system(&text)?.system;
            let sampling = grid.map_or(Sampling::VerticesOnly, Sampling::Grid);
            report.option("alpha_hi", alpha_hi).option("tol", tol).option("budget", budget).option("sampling", sampling);
            let opts = RobustnessOptions { alpha_hi: *alpha_hi, tol_alpha: *tol, per_alpha_budget: *budget, sampling };
            let result = robustness_search(&sys, &opts)?;
            let summary = json!({
                "alpha_star_lo": result.alpha_star_lo,
                "alpha_star_hi": result.alpha_star_hi,
                "exact_uncertainty_set": result.exact_uncertainty_set,
                "probes": result.probes.len(),
            });
            emit(&format!("{}\n", pretty(&summary)));
            report.section("robustness", &result);
            Ok(0)
        }
        Command::Simulate { file, steps, policy, x0 } => {
            let family = load_family(file, report)?;
            let policy_value = parse_policy(policy, cli.seed, family.len())?;
            let x0 = parse_state(x0.as_deref(), family.dim())?;
            report.option("steps", steps).option("policy", policy);
            let traj = simulate_trajectory(&family, &x0, &policy_value, *steps)?;
            emit(&traj.to_csv());
            report.section("word_applied", &traj.word_applied).section("growth_log", &traj.growth_log);
            report.section("truncated", traj.truncated);
            Ok(0)
        }
        Command::Probe { file, trials, steps, rho } => {
            let family = load_family(file, report)?;
            report.option("trials", trials).option("steps", steps);
            let uas = uas_probe(&family, *trials, *steps, &UasOptions { seed: cli.seed, initial_states: None })?;
            let rho = match rho {
                Some(r) => *r,
                None => bracket(&family, &BoundsOptions { k_max: 6, ..Default::default() })?.bracket.best_lower,
            };
            report.option("rho", rho);
            let uas_json = json!({
                "growth_rate_estimate": uas.growth_rate_estimate,
                "norm": uas.norm,
                "trajectories_run": uas.trajectories_run,
                "worst_word": uas.worst_trajectory.word_applied,
            });
            let defect = if rho > 0.0 {
                let opts = DefectivityOptions { horizon: *steps, seed: cli.seed, ..Default::default() };
                serde_json::to_value(defectivity_probe(&family, rho, &opts)?).expect("report data serializes")
            } else {
                Value::Null
            };
            emit(&format!("{}\n", pretty(&json!({ "uas": uas_json, "defectivity": defect }))));
            report.section("uas", &uas_json).section("defectivity", &defect);
            Ok(0)
        }
        Command::Gallery(args) => {
            report.option("name", &args.name);
            if args.name == "swap-system" {
                let sys = gallery::swap_system().with_alpha(args.alpha);
                emit(&format!("{}\n", emit_system("swap-system", &sys)));
                return Ok(0);
            }
            let params = GalleryParams { alpha: args.alpha, k: args.k, abcd: [args.a, args.b, args.c, args.d] };
            let family = gallery::by_name(&args.name, &params).map_err(|e| Failure::usage(e.to_string()))?;
            emit(&format!("{}\n", emit_family(&family)));
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let started = Instant::now();
    let mut report = RunReport::new(cli.seed);
    let code = match run(&cli, &mut report) {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {}", f.message);
            report.error(&f.message);
            f.code
        }
    };
    if let Some(path) = &cli.out {
        report.finish(code, started.elapsed());
        if let Err(e) = std::fs::write(path, report.to_json()) {
            eprintln!("error: cannot write {}: {e}", path.display());
            return ExitCode::from(EXIT_USAGE);
        }
    }
    ExitCode::from(code)
}
