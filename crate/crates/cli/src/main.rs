//! `maxrand`: family construction, certification, figure sweeps, numeric
//! verification and robustness queries from the command line.
//!
//! Exit codes: 0 success, 1 usage or internal error, 2 infeasible
//! parameters, 3 invalid behavior, 4 I/O failure, 5 verification failure.

mod output;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use maxrand::analytic::{construct_bipartite_family, construct_tripartite_family, AnalyticError};
use maxrand::figures::{self, FigureError};
use maxrand::incompat::{analytic_robustness, sdp_robustness, IncompatError};
use maxrand::npa::{certify, Level, MembershipStatus, NpaError};
use maxrand::numverify::{verify_family, MinimizeOptions, NumVerifyError, RESIDUAL_GATE};
use maxrand::scenario::{parse_one_based, Behavior, ScenarioError};
use maxrand::FamilyKind;

use output::{Output, RunManifest};

#[derive(Parser, Debug)]
#[command(
    name = "maxrand",
    version,
    about = "Certify device-independent maximal randomness"
)]
struct Cli {
    /// Seed of the numeric verification search (other commands are deterministic).
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Kind {
    Bipartite,
    Tripartite,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Figure {
    Fig2,
    Fig3,
    Fig4,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build the family realization at (x, z) and write its behavior.
    Family {
        kind: Kind,
        #[arg(long)]
        x: f64,
        #[arg(long)]
        z: f64,
        /// Output directory, or `-` for a single JSON document on stdout.
        #[arg(long, default_value = ".")]
        out: String,
    },
    /// Bound the guessing probability of a behavior file.
    Certify {
        behavior: PathBuf,
        /// Target inputs, 1-based and comma separated.
        #[arg(long, default_value = "1,1")]
        settings: String,
        /// Relaxation level: 1, 1ab or 2.
        #[arg(long, default_value = "2")]
        level: String,
        /// Report path, or `-` for stdout.
        #[arg(long, default_value = "-")]
        out: String,
    },
    /// Emit figure data as CSV.
    Sweep {
        figure: Figure,
        #[arg(long, default_value_t = 101)]
        grid: usize,
        /// CSV path, or `-` for stdout.
        #[arg(long, default_value = "-")]
        out: String,
        /// Frontier CSV of fig4; defaults to `<out stem>_frontier.csv`.
        #[arg(long)]
        frontier: Option<PathBuf>,
    },
    /// Minimize the tripartite objective numerically and compare with the bound.
    VerifyTripartite {
        #[arg(long)]
        x: f64,
        #[arg(long)]
        z: f64,
        #[arg(long, default_value_t = 32)]
        restarts: usize,
        /// Largest accepted relative error.
        #[arg(long, default_value_t = 1e-5)]
        tol: f64,
        #[arg(long, default_value = "-")]
        out: String,
    },
    /// Incompatibility robustness of two unbiased qubit measurements.
    Robustness {
        /// Bloch vector of the first measurement, `x,y,z`.
        #[arg(long, allow_hyphen_values = true)]
        n1: String,
        #[arg(long, allow_hyphen_values = true)]
        n2: String,
        /// Also run the SDP bisection with this tolerance.
        #[arg(long)]
        sdp_tol: Option<f64>,
        #[arg(long, default_value = "-")]
        out: String,
    },
}

/// Failure classes with their exit codes.
#[derive(Debug)]
enum Failure {
    Usage(String),
    Infeasible(String),
    InvalidBehavior(String),
    Io(String),
    Verification(String),
    Internal(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) | Failure::Internal(_) => 1,
            Failure::Infeasible(_) => 2,
            Failure::InvalidBehavior(_) => 3,
            Failure::Io(_) => 4,
            Failure::Verification(_) => 5,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m)
            | Failure::Infeasible(m)
            | Failure::InvalidBehavior(m)
            | Failure::Io(m)
            | Failure::Verification(m)
            | Failure::Internal(m) => m,
        }
    }
}

impl From<AnalyticError> for Failure {
    fn from(e: AnalyticError) -> Self {
        match e {
            AnalyticError::Infeasible { g } => {
                Failure::Infeasible(format!("no family at these parameters: g = {g}"))
            }
            other => Failure::Usage(other.to_string()),
        }
    }
}

impl From<NumVerifyError> for Failure {
    fn from(e: NumVerifyError) -> Self {
        match e {
            NumVerifyError::Analytic(a) => a.into(),
            e @ (NumVerifyError::ResidualGate { .. } | NumVerifyError::Regeneration(_)) => {
                Failure::Verification(e.to_string())
            }
            other => Failure::Usage(other.to_string()),
        }
    }
}

impl From<FigureError> for Failure {
    fn from(e: FigureError) -> Self {
        match e {
            FigureError::Grid(_) => Failure::Usage(e.to_string()),
            other => Failure::Internal(other.to_string()),
        }
    }
}

impl From<IncompatError> for Failure {
    fn from(e: IncompatError) -> Self {
        Failure::Usage(e.to_string())
    }
}

impl From<NpaError> for Failure {
    fn from(e: NpaError) -> Self {
        match e {
            NpaError::Indeterminate { .. } | NpaError::Sdp(_) => Failure::Internal(e.to_string()),
            other => Failure::Usage(other.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Err(f) = configure_threads() {
        eprintln!("error: {}", f.message());
        return ExitCode::from(f.code());
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}

/// Honors `MAXRAND_THREADS` (0 or unset: one thread per core).
fn configure_threads() -> Result<(), Failure> {
    let Ok(v) = std::env::var("MAXRAND_THREADS") else {
        return Ok(());
    };
    let n: usize = v.trim().parse().map_err(|_| {
        Failure::Usage(format!(
            "MAXRAND_THREADS must be a non-negative integer, got {v:?}"
        ))
    })?;
    if n > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::Internal(e.to_string()))?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    let start = Instant::now();
    let seed = cli.seed;
    match cli.command {
        Command::Family { kind, x, z, out } => family(kind, x, z, &out, seed, start),
        Command::Certify {
            behavior,
            settings,
            level,
            out,
        } => certify_cmd(&behavior, &settings, &level, &out, seed, start),
        Command::Sweep {
            figure,
            grid,
            out,
            frontier,
        } => sweep(figure, grid, &out, frontier, seed, start),
        Command::VerifyTripartite {
            x,
            z,
            restarts,
            tol,
            out,
        } => verify(x, z, restarts, tol, &out, seed, start),
        Command::Robustness {
            n1,
            n2,
            sdp_tol,
            out,
        } => robustness(&n1, &n2, sdp_tol, &out, seed, start),
    }
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values serialize");
    s.push('\n');
    s
}

fn family(kind: Kind, x: f64, z: f64, out: &str, seed: u64, start: Instant) -> Result<(), Failure> {
    let fam = match kind {
        Kind::Bipartite => construct_bipartite_family(x, z)?,
        Kind::Tripartite => construct_tripartite_family(x, z)?,
    };
    let behavior = fam.behavior();
    let mut summary = fam.metadata();
    summary["objective_born"] = json!(fam.objective());
    if let Ok(chsh) = behavior.chsh_value() {
        summary["chsh"] = json!(chsh);
    }
    let realization =
        serde_json::to_value(fam.to_file()).map_err(|e| Failure::Internal(e.to_string()))?;
    let params = json!({ "kind": fam.kind, "x": x, "z": z });
    if out == "-" {
        let doc = json!({ "summary": summary, "realization": realization, "behavior": behavior.to_json() });
        Output::Stdout.write(&pretty(&doc))?;
        eprintln!("{summary}");
        return Ok(());
    }
    let dir = PathBuf::from(out);
    std::fs::create_dir_all(&dir).map_err(|e| Failure::Io(format!("{}: {e}", dir.display())))?;
    let behavior_path = dir.join("behavior.json");
    let realization_path = dir.join("realization.json");
    Output::File(behavior_path.clone()).write(&pretty(&behavior.to_json()))?;
    Output::File(realization_path.clone()).write(&pretty(&realization))?;
    let manifest = RunManifest::new(
        "family",
        params,
        seed,
        vec![behavior_path, realization_path],
        start,
    );
    manifest.write(&dir.join("manifest.json"))?;
    println!("{summary}");
    Ok(())
}

fn certify_cmd(
    path: &PathBuf,
    settings: &str,
    level: &str,
    out: &str,
    seed: u64,
    start: Instant,
) -> Result<(), Failure> {
    let level: Level = level.parse()?;
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
    let behavior = Behavior::from_json_str(&text)
        .map_err(|e: ScenarioError| Failure::InvalidBehavior(format!("{}: {e}", path.display())))?;
    let validation = behavior.validate();
    if !validation.is_valid() {
        let report = json!({ "validation": validation.to_json() });
        // the report is the payload even on failure
        Output::parse(out).write(&pretty(&report))?;
        return Err(Failure::InvalidBehavior(
            "behavior failed validation".into(),
        ));
    }
    let settings = parse_one_based(settings).ok_or_else(|| {
        Failure::Usage(format!(
            "cannot parse settings {settings:?}; expected e.g. 1,1"
        ))
    })?;
    let cert = certify(&behavior, &settings, level)?;
    let mut report = json!({ "validation": validation.to_json() });
    if let Ok(chsh) = behavior.chsh_value() {
        report["chsh"] = json!(chsh);
    }
    let cert_json = cert.to_json();
    for (k, v) in cert_json.as_object().expect("report is an object") {
        report[k] = v.clone();
    }
    let sink = Output::parse(out);
    sink.write(&pretty(&report))?;
    if let Output::File(p) = &sink {
        let params = json!({ "behavior": path, "settings": cert.settings, "level": level });
        RunManifest::new("certify", params, seed, vec![p.clone()], start)
            .write(&output::manifest_path(p))?;
    }
    if cert.membership_status == MembershipStatus::Infeasible {
        return Err(Failure::Infeasible(format!(
            "behavior lies outside the level-{level} relaxation (margin {:e})",
            cert.membership_margin
        )));
    }
    Ok(())
}

fn sweep(
    figure: Figure,
    grid: usize,
    out: &str,
    frontier: Option<PathBuf>,
    seed: u64,
    start: Instant,
) -> Result<(), Failure> {
    let sink = Output::parse(out);
    let mut outputs = Vec::new();
    let name = match figure {
        Figure::Fig2 => {
            sink.write(&figures::fig2_csv(&figures::fig2(grid)?))?;
            "fig2"
        }
        Figure::Fig3 => {
            sink.write(&figures::fig3_csv(&figures::fig3(grid)?))?;
            "fig3"
        }
        Figure::Fig4 => {
            let curve = figures::fig4(grid)?;
            let (points, front) = figures::fig4_csv(&curve);
            sink.write(&points)?;
            let front_path = frontier.or_else(|| match &sink {
                Output::File(p) => Some(output::sibling(p, "_frontier")),
                Output::Stdout => None,
            });
            match front_path {
                Some(p) => {
                    Output::File(p.clone()).write(&front)?;
                    outputs.push(p);
                }
                None => eprintln!("note: frontier not written; pass --frontier PATH"),
            }
            eprintln!(
                "{} feasible cells, {} skipped, {} on the frontier",
                curve.points.len(),
                curve.skipped,
                curve.frontier.len()
            );
            "fig4"
        }
    };
    if let Output::File(p) = &sink {
        outputs.insert(0, p.clone());
        let params = json!({ "figure": name, "grid": grid });
        RunManifest::new("sweep", params, seed, outputs, start).write(&output::manifest_path(p))?;
    }
    Ok(())
}

fn verify(
    x: f64,
    z: f64,
    restarts: usize,
    tol: f64,
    out: &str,
    seed: u64,
    start: Instant,
) -> Result<(), Failure> {
    if restarts == 0 {
        return Err(Failure::Usage("--restarts must be at least 1".into()));
    }
    if !(tol > 0.0) {
        return Err(Failure::Usage(format!("--tol must be positive, got {tol}")));
    }
    let opts = MinimizeOptions {
        restarts,
        seed,
        ..Default::default()
    };
    let report = verify_family(FamilyKind::Tripartite, x, z, &opts)?;
    // a vanishing prediction is judged on the absolute error
    let passed = report.relative_error <= tol
        || (report.prediction < 1e-6 && report.absolute_error <= RESIDUAL_GATE);
    let mut doc = report.to_json();
    doc["tolerance"] = json!(tol);
    doc["passed"] = json!(passed);
    let sink = Output::parse(out);
    sink.write(&pretty(&doc))?;
    if let Output::File(p) = &sink {
        let params = json!({ "x": x, "z": z, "restarts": restarts, "tol": tol });
        RunManifest::new("verify-tripartite", params, seed, vec![p.clone()], start)
            .write(&output::manifest_path(p))?;
    }
    if !passed {
        return Err(Failure::Verification(format!(
            "numeric minimum {} vs prediction {}: relative error {:e} exceeds {tol:e}",
            report.numeric_minimum, report.prediction, report.relative_error
        )));
    }
    Ok(())
}

fn parse_bloch(s: &str) -> Result<[f64; 3], Failure> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| Failure::Usage(format!("cannot parse Bloch vector {s:?}")))?;
    <[f64; 3]>::try_from(parts)
        .map_err(|_| Failure::Usage(format!("Bloch vector {s:?} needs three components")))
}

fn robustness(
    n1: &str,
    n2: &str,
    sdp_tol: Option<f64>,
    out: &str,
    seed: u64,
    start: Instant,
) -> Result<(), Failure> {
    let (a, b) = (parse_bloch(n1)?, parse_bloch(n2)?);
    let analytic = analytic_robustness(a, b)?;
    let mut doc = json!({ "n1": a, "n2": b, "eta_analytic": analytic.eta });
    if let Some(tol) = sdp_tol {
        let r = sdp_robustness(a, b, tol)?;
        doc["eta_sdp"] = json!(r.eta);
        doc["sdp_tol"] = json!(tol);
    }
    let sink = Output::parse(out);
    sink.write(&pretty(&doc))?;
    if let Output::File(p) = &sink {
        let params = json!({ "n1": a, "n2": b, "sdp_tol": sdp_tol });
        RunManifest::new("robustness", params, seed, vec![p.clone()], start)
            .write(&output::manifest_path(p))?;
    }
    Ok(())
}
