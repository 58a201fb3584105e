//! Command-line frontend for the qudit magic-simplex toolkit.
//!
//! Exit codes: 0 on success, 1 on domain errors (such as a parameter point
//! outside the state space), 2 on usage errors (flag parsing and invalid
//! flag combinations).

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use qsimplex_core::criteria::{all_cut_verdicts, ppt_verdict, Bipartition};
use qsimplex_core::distill::{iterate, ProtocolConfig};
use qsimplex_core::linalg::hermitian_spectrum;
use qsimplex_core::scan::{
    export_csv, export_json, run_scan, AxisSpec, Checks, GridSpec, DEFAULT_BUDGET,
};
use qsimplex_core::simplex::{mixedness, simplex_state, to_simplex_point, vertex_state};
use qsimplex_core::witness::{detect, optimality, validity, Detection, OptimizerConfig};
use qsimplex_core::{Family, FamilyParams, WeylIndex};

/// Environment variable supplying the default `--jobs` value.
const JOBS_ENV: &str = "QSIMPLEX_JOBS";

#[derive(Parser)]
#[command(
    name = "qsimplex",
    version,
    about = "Construct, classify and distill qudit magic-simplex states",
    propagate_version = true
)]
struct Cli {
    /// Config file (key = value lines or a JSON object) supplying defaults
    /// for jobs, seed and format when the flags are absent.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Print a vertex state of the simplex.
    Vertex {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        l: usize,
        /// Also print the eigenvalue multiset.
        #[arg(long)]
        spectrum: bool,
    },
    /// Evaluate a family state and run checks on it.
    State {
        #[command(flatten)]
        point: PointArgs,
        /// Which check to run; omitting it prints a summary of all of them.
        #[arg(long, value_enum)]
        check: Option<CheckKind>,
    },
    /// Search for an entanglement witness detecting a family state.
    Witness {
        #[command(flatten)]
        point: PointArgs,
        /// Multi-starts of the validity optimizer.
        #[arg(long, default_value_t = 64)]
        starts: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Iterate the two-copy distillation protocol on a d=3 line state.
    Distill {
        #[arg(long, default_value_t = 3)]
        d: usize,
        #[arg(long, default_value_t = 1)]
        n: usize,
        #[arg(long, allow_hyphen_values = true)]
        alpha: f64,
        #[arg(long, allow_hyphen_values = true)]
        beta: f64,
        #[arg(long, allow_hyphen_values = true)]
        gamma: f64,
        /// Target basis index of the protocol gate; the trace is the same
        /// for every m (a verified protocol property).
        #[arg(long, default_value_t = 2)]
        m: usize,
        #[arg(long, default_value_t = 50)]
        max_iter: usize,
        /// Write the full iteration trace as JSON.
        #[arg(long, value_name = "FILE")]
        trace_out: Option<PathBuf>,
    },
    /// Run a parameter-grid scan and export the records.
    Scan {
        /// JSON file holding the full grid spec; mutually exclusive with the
        /// individual grid flags.
        #[arg(long, value_name = "FILE")]
        spec: Option<PathBuf>,
        #[arg(long, value_enum)]
        family: Option<FamilyArg>,
        #[arg(long)]
        d: Option<usize>,
        #[arg(long)]
        n: Option<usize>,
        /// Alpha axis as start:stop:steps.
        #[arg(long, allow_hyphen_values = true)]
        alpha: Option<String>,
        /// Beta axis as start:stop:steps.
        #[arg(long, allow_hyphen_values = true)]
        beta: Option<String>,
        /// Gamma axis as start:stop:steps (line family only).
        #[arg(long, allow_hyphen_values = true)]
        gamma: Option<String>,
        /// Comma-separated checks: ppt, all-cuts, witness, distill.
        #[arg(long)]
        checks: Option<String>,
        /// Work-unit budget guarding against oversized scans.
        #[arg(long)]
        budget: Option<u64>,
        #[arg(long, value_name = "FILE")]
        out: PathBuf,
        #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
        format: FormatArg,
        /// Worker threads; defaults to the config file, then the
        /// QSIMPLEX_JOBS environment variable, then all processors.
        #[arg(long)]
        jobs: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Regenerate a reference dataset (preset scan) as CSV.
    Figure {
        /// 1a: d=2 slice, 1b: d=3 slice with witness detection,
        /// 1c: d=4 slice, 2: d=3 line-state tetrahedron with distillation.
        #[arg(long, value_enum)]
        which: FigureArg,
        #[arg(long, value_name = "FILE")]
        out: PathBuf,
        #[arg(long)]
        jobs: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
    },
}

#[derive(Args)]
struct PointArgs {
    #[arg(long, value_enum)]
    family: FamilyArg,
    #[arg(long)]
    d: usize,
    #[arg(long)]
    n: usize,
    #[arg(long, allow_hyphen_values = true)]
    alpha: f64,
    #[arg(long, allow_hyphen_values = true)]
    beta: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    gamma: f64,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FamilyArg {
    TwoVertex,
    Line,
}

impl From<FamilyArg> for Family {
    fn from(f: FamilyArg) -> Family {
        match f {
            FamilyArg::TwoVertex => Family::TwoVertex,
            FamilyArg::Line => Family::Line,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum CheckKind {
    Positivity,
    Ppt,
    AllCuts,
    Mixedness,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum FigureArg {
    #[value(name = "1a")]
    Fig1a,
    #[value(name = "1b")]
    Fig1b,
    #[value(name = "1c")]
    Fig1c,
    #[value(name = "2")]
    Fig2,
}

/// Domain failure: message plus exit code 1.
struct DomainError(String);

type CmdResult = Result<(), DomainError>;

fn domain<T>(msg: impl Into<String>) -> Result<T, DomainError> {
    Err(DomainError(msg.into()))
}

/// Usage errors detected after flag parsing exit with the same code clap
/// uses for parse failures.
fn usage_error(msg: &str) -> ! {
    eprintln!("error: {msg}");
    std::process::exit(2);
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let config = cli
        .config
        .as_deref()
        .map(load_config)
        .unwrap_or_else(|| Ok(BTreeMap::new()))
        .unwrap_or_else(|e| usage_error(&e));
    let result = match cli.cmd {
        Cmd::Vertex { d, n, k, l, spectrum } => cmd_vertex(d, n, k, l, spectrum),
        Cmd::State { point, check } => cmd_state(&point, check),
        Cmd::Witness { point, starts, seed } => cmd_witness(&point, starts, seed),
        Cmd::Distill { d, n, alpha, beta, gamma, m, max_iter, trace_out } => {
            cmd_distill(d, n, alpha, beta, gamma, m, max_iter, trace_out.as_deref())
        }
        Cmd::Scan {
            spec, family, d, n, alpha, beta, gamma, checks, budget, out, format, jobs, seed,
        } => {
            let grid = match spec {
                Some(path) => {
                    if family.is_some() || d.is_some() || n.is_some() || alpha.is_some()
                        || beta.is_some() || gamma.is_some() || checks.is_some()
                    {
                        usage_error("--spec conflicts with the individual grid flags");
                    }
                    load_spec(&path).unwrap_or_else(|e| usage_error(&e))
                }
                None => build_spec(family, d, n, alpha, beta, gamma, checks, budget),
            };
            install_jobs(jobs, &config);
            cmd_scan(&grid, &out, format, resolve_seed(seed, &config))
        }
        Cmd::Figure { which, out, jobs, seed } => {
            install_jobs(jobs, &config);
            let (grid, note) = figure_spec(which);
            eprintln!("{note}");
            cmd_scan(&grid, &out, FormatArg::Csv, resolve_seed(seed, &config))
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(DomainError(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::FAILURE
        }
    }
}

/// key = value lines or a JSON object; later flags override these values.
fn load_config(path: &Path) -> Result<BTreeMap<String, String>, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
    let trimmed = text.trim_start();
    let mut map = BTreeMap::new();
    if trimmed.starts_with('{') {
        let parsed: serde_json::Value =
            serde_json::from_str(trimmed).map_err(|e| format!("invalid JSON config: {e}"))?;
        let obj = parsed
            .as_object()
            .ok_or_else(|| "config JSON must be an object".to_string())?;
        for (k, v) in obj {
            let value = match v {
                serde_json::Value::String(s) => s.clone(),
                other => other.to_string(),
            };
            map.insert(k.clone(), value);
        }
    } else {
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| format!("config line is not key = value: {line}"))?;
            map.insert(k.trim().to_string(), v.trim().to_string());
        }
    }
    Ok(map)
}

fn resolve_seed(flag: Option<u64>, config: &BTreeMap<String, String>) -> u64 {
    flag.or_else(|| config.get("seed").and_then(|s| s.parse().ok()))
        .unwrap_or(0)
}

/// Thread count priority: flag, config file, environment, all processors.
fn install_jobs(flag: Option<usize>, config: &BTreeMap<String, String>) {
    let jobs = flag
        .or_else(|| config.get("jobs").and_then(|s| s.parse().ok()))
        .or_else(|| std::env::var(JOBS_ENV).ok().and_then(|s| s.parse().ok()));
    if let Some(jobs) = jobs {
        if jobs == 0 {
            usage_error("--jobs must be at least 1");
        }
        // ignore failure if a global pool already exists
        let _ = rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global();
    }
}

/// Shortest clean decimal for report output (12 significant digits).
fn fmt_num(v: f64) -> String {
    let rounded = (v * 1e12).round() / 1e12;
    if rounded == 0.0 {
        "0".to_string() // avoid -0
    } else {
        format!("{rounded}")
    }
}

fn cmd_vertex(d: usize, n: usize, k: usize, l: usize, spectrum: bool) -> CmdResult {
    if d < 2 {
        usage_error("--d must be at least 2");
    }
    if n < 1 {
        usage_error("--n must be at least 1");
    }
    if k >= d || l >= d {
        usage_error("--k and --l must lie in 0..d");
    }
    let rho = vertex_state(d, n, WeylIndex::new(k as i64, l as i64, d));
    println!("vertex ({k},{l}) of the d={d}, n={n} simplex");
    println!("dimension: {}", rho.matrix().nrows());
    println!("purity: {}", fmt_num(rho.purity()));
    println!("mixedness: {}", fmt_num(mixedness(&rho)));
    if spectrum {
        let eigs = hermitian_spectrum(rho.matrix()).map_err(|e| DomainError(e.to_string()))?;
        let mut groups: Vec<(f64, usize)> = Vec::new();
        for &e in eigs.iter().rev() {
            match groups.last_mut() {
                Some((v, c)) if (*v - e).abs() < 1e-9 => *c += 1,
                _ => groups.push((e, 1)),
            }
        }
        let mut s = String::new();
        for (i, (v, c)) in groups.iter().enumerate() {
            if i > 0 {
                s.push_str(", ");
            }
            let _ = write!(s, "{} x{c}", fmt_num(*v));
        }
        println!("spectrum: {{{s}}}");
    }
    Ok(())
}

fn family_point(args: &PointArgs) -> Result<qsimplex_core::SimplexPoint, DomainError> {
    if args.family == FamilyArg::TwoVertex && args.gamma != 0.0 {
        usage_error("--gamma applies to the line family only");
    }
    let fp = FamilyParams {
        d: args.d,
        n: args.n,
        alpha: args.alpha,
        beta: args.beta,
        gamma: args.gamma,
    };
    match to_simplex_point(&fp, args.family.into()) {
        Ok(p) => Ok(p),
        Err(qsimplex_core::Error::OutsideStateSpace { .. }) => {
            domain("outside state space (positivity violated)")
        }
        Err(qsimplex_core::Error::LineFamilyDimension(d)) => {
            usage_error(&format!("the line family requires --d 3, got {d}"))
        }
        Err(e) => domain(e.to_string()),
    }
}

fn cmd_state(args: &PointArgs, check: Option<CheckKind>) -> CmdResult {
    let point = family_point(args)?;
    let rho = simplex_state(&point);
    println!(
        "state: family {}, d={}, n={}, alpha={}, beta={}, gamma={}",
        if args.family == FamilyArg::TwoVertex { "two_vertex" } else { "line" },
        args.d, args.n, fmt_num(args.alpha), fmt_num(args.beta), fmt_num(args.gamma),
    );
    let run_positivity = || {
        let (k, l, c) = point.min_coeff();
        println!("in state space: true");
        println!("min coefficient: {} at ({k},{l})", fmt_num(c));
    };
    let run_ppt = || {
        let cut = Bipartition::last_b_cut(2 * args.n);
        let v = ppt_verdict(&rho, &cut).expect("canonical cut is valid");
        println!("pair cut {}: {} (min PT eigenvalue {})", v.bipartition, v.verdict, fmt_num(v.min_pt_eigenvalue));
    };
    let run_all_cuts = || {
        for v in all_cut_verdicts(&rho).expect("party count within bound") {
            println!(
                "cut {}: {} (min PT eigenvalue {}{})",
                v.bipartition,
                v.verdict,
                fmt_num(v.min_pt_eigenvalue),
                if v.pair_respecting { ", pair-respecting" } else { "" }
            );
        }
    };
    match check {
        Some(CheckKind::Positivity) => run_positivity(),
        Some(CheckKind::Ppt) => run_ppt(),
        Some(CheckKind::AllCuts) => run_all_cuts(),
        Some(CheckKind::Mixedness) => println!("mixedness: {}", fmt_num(mixedness(&rho))),
        None => {
            run_positivity();
            run_ppt();
            println!("purity: {}", fmt_num(rho.purity()));
            println!("mixedness: {}", fmt_num(mixedness(&rho)));
        }
    }
    Ok(())
}

fn cmd_witness(args: &PointArgs, starts: usize, seed: u64) -> CmdResult {
    let point = family_point(args)?;
    let opt = OptimizerConfig {
        n_starts: starts.max(1),
        seed,
        ..OptimizerConfig::default()
    };
    match detect(&point, &opt) {
        Detection::Detected { kappa, margin, validity: report } => {
            println!("detected: true");
            println!("margin: {}", fmt_num(margin));
            println!("validity min over phi: {}", fmt_num(report.min_over_phi));
            println!("optimal (tangential): {}", optimality(&kappa, &report));
            for k in 0..args.d {
                let row: Vec<String> = (0..args.d).map(|l| fmt_num(kappa.coeff(k, l))).collect();
                println!("kappa[{k}]: [{}]", row.join(", "));
            }
        }
        Detection::NotDetected => {
            println!("detected: false");
            // report the validity of the trivial uniform witness as context
            let uniform = qsimplex_core::witness::WitnessCoefficients::new(
                args.d,
                vec![1.0; args.d * args.d],
            )
            .expect("uniform grid is nonzero");
            let report = validity(&uniform, &opt);
            println!("uniform-witness validity (sanity): {}", fmt_num(report.min_over_phi));
        }
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_distill(
    d: usize,
    n: usize,
    alpha: f64,
    beta: f64,
    gamma: f64,
    m: usize,
    max_iter: usize,
    trace_out: Option<&Path>,
) -> CmdResult {
    if d != 3 || n != 1 {
        usage_error("distillation is implemented for --d 3 --n 1");
    }
    if m >= d {
        usage_error("--m must lie in 0..d");
    }
    let fp = FamilyParams { d, n, alpha, beta, gamma };
    let point = match to_simplex_point(&fp, Family::Line) {
        Ok(p) => p,
        Err(qsimplex_core::Error::OutsideStateSpace { .. }) => {
            return domain("outside state space (positivity violated)");
        }
        Err(e) => return domain(e.to_string()),
    };
    let cfg = ProtocolConfig {
        max_iterations: max_iter,
        ..ProtocolConfig::default()
    };
    let trace = iterate(&point, &cfg).map_err(|e| DomainError(e.to_string()))?;
    println!("iterations: {}", trace.iterations());
    println!("reached fidelity target: {}", trace.reached_target);
    println!("final fidelity: {}", fmt_num(trace.final_fidelity()));
    for r in &trace.records {
        println!(
            "iter {:>3}: fidelity {}, success probability {}, change {}",
            r.iteration,
            fmt_num(r.fidelity),
            fmt_num(r.success_probability),
            fmt_num(r.coefficient_change),
        );
    }
    if let Some(path) = trace_out {
        let file = std::fs::File::create(path)
            .map_err(|e| DomainError(format!("cannot write {}: {e}", path.display())))?;
        serde_json::to_writer_pretty(file, &trace)
            .map_err(|e| DomainError(format!("cannot serialize trace: {e}")))?;
        println!("trace written to {}", path.display());
    }
    Ok(())
}

fn parse_axis(text: &str, name: &str) -> AxisSpec {
    let parts: Vec<&str> = text.split(':').collect();
    let err = || usage_error(&format!("--{name} must be start:stop:steps, got {text}"));
    if parts.len() != 3 {
        err();
    }
    let (Ok(start), Ok(stop), Ok(steps)) = (
        parts[0].parse::<f64>(),
        parts[1].parse::<f64>(),
        parts[2].parse::<usize>(),
    ) else {
        err()
    };
    if steps == 0 || (steps == 1 && start != stop) {
        err();
    }
    AxisSpec { start, stop, steps }
}

fn parse_checks(text: &str) -> Checks {
    let mut checks = Checks { ppt: false, ppt_all_cuts: false, witness: false, distill: false };
    for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        match item {
            "ppt" => checks.ppt = true,
            "all-cuts" => checks.ppt_all_cuts = true,
            "witness" => checks.witness = true,
            "distill" => checks.distill = true,
            other => usage_error(&format!("unknown check: {other}")),
        }
    }
    checks
}

#[allow(clippy::too_many_arguments)]
fn build_spec(
    family: Option<FamilyArg>,
    d: Option<usize>,
    n: Option<usize>,
    alpha: Option<String>,
    beta: Option<String>,
    gamma: Option<String>,
    checks: Option<String>,
    budget: Option<u64>,
) -> GridSpec {
    let missing = || usage_error("scan needs either --spec or --family/--d/--n/--alpha/--beta");
    let (Some(family), Some(d), Some(n), Some(alpha), Some(beta)) = (family, d, n, alpha, beta)
    else {
        missing()
    };
    GridSpec {
        family: family.into(),
        d,
        n,
        alpha: parse_axis(&alpha, "alpha"),
        beta: parse_axis(&beta, "beta"),
        gamma: gamma.map(|g| parse_axis(&g, "gamma")),
        checks: checks.map(|c| parse_checks(&c)).unwrap_or_default(),
        budget: budget.unwrap_or(DEFAULT_BUDGET),
    }
}

fn load_spec(path: &Path) -> Result<GridSpec, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read spec {}: {e}", path.display()))?;
    serde_json::from_str(&text).map_err(|e| format!("invalid scan spec: {e}"))
}

fn figure_spec(which: FigureArg) -> (GridSpec, &'static str) {
    let slice = |d: usize, steps: usize, checks: Checks, budget: u64| GridSpec {
        family: Family::TwoVertex,
        d,
        n: 1,
        alpha: AxisSpec { start: -0.6, stop: 1.1, steps },
        beta: AxisSpec { start: -0.6, stop: 1.1, steps },
        gamma: None,
        checks,
        budget,
    };
    let ppt_only = Checks { ppt: true, ppt_all_cuts: false, witness: false, distill: false };
    match which {
        FigureArg::Fig1a => (
            slice(2, 201, ppt_only, DEFAULT_BUDGET),
            "figure 1a: d=2 two-vertex slice, 201x201, positivity + pair-cut PPT",
        ),
        FigureArg::Fig1b => (
            GridSpec {
                family: Family::TwoVertex,
                d: 3,
                n: 1,
                alpha: AxisSpec { start: -1.0 / 7.0, stop: 0.3, steps: 90 },
                beta: AxisSpec { start: -1.0 / 7.0, stop: 0.3, steps: 90 },
                gamma: None,
                checks: Checks { ppt: true, ppt_all_cuts: false, witness: true, distill: false },
                budget: 8_000_000,
            },
            "figure 1b: d=3 two-vertex slice around the PPT region, 90x90, \
             witness detection included (roughly half an hour on one core)",
        ),
        FigureArg::Fig1c => (
            slice(4, 201, ppt_only, DEFAULT_BUDGET),
            "figure 1c: d=4 two-vertex slice, 201x201, positivity + pair-cut PPT",
        ),
        FigureArg::Fig2 => (
            GridSpec {
                family: Family::Line,
                d: 3,
                n: 1,
                alpha: AxisSpec { start: -1.0 / 6.0, stop: 1.0, steps: 21 },
                beta: AxisSpec { start: -1.0 / 6.0, stop: 1.0, steps: 21 },
                gamma: Some(AxisSpec { start: -1.0 / 6.0, stop: 1.0, steps: 21 }),
                checks: Checks { ppt: true, ppt_all_cuts: false, witness: false, distill: true },
                budget: DEFAULT_BUDGET,
            },
            "figure 2: d=3 line-state tetrahedron, 21x21x21, PPT + distillability",
        ),
    }
}

fn cmd_scan(grid: &GridSpec, out: &Path, format: FormatArg, seed: u64) -> CmdResult {
    let opt = OptimizerConfig { seed, ..OptimizerConfig::default() };
    let records = run_scan(grid, &opt, &ProtocolConfig::default())
        .map_err(|e| DomainError(e.to_string()))?;
    let file = std::fs::File::create(out)
        .map_err(|e| DomainError(format!("cannot write {}: {e}", out.display())))?;
    let buffered = std::io::BufWriter::new(file);
    match format {
        FormatArg::Csv => export_csv(&records, buffered),
        FormatArg::Json => export_json(&records, buffered),
    }
    .map_err(|e| DomainError(e.to_string()))?;
    println!("{} records written to {}", records.len(), out.display());
    Ok(())
}
