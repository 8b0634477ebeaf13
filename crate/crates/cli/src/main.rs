use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use lpdl_cli::config::{parse_p_list, ExperimentConfig, Tolerances};
use lpdl_cli::duality_report::{duality_report, norm_table_csv};
use lpdl_cli::report::{emit_report, render_md, write_cases, Format};
use lpdl_cli::{replay, run_suites, ReplayCase, SUITES};
use lpdl_core::algebra::core_compute;
use lpdl_core::crossed::crossed_product_basis;
use lpdl_core::duality::{core_dimensions, DualityChain};
use lpdl_core::io::read_operator;
use lpdl_core::pnorm::{
    estimate_norm, grid_upper, riesz_thorin, BoundMethod, EstimateOptions, PExponent, PowerOptions, GRID_MAX_DIM,
};
use serde::Serialize;

#[derive(Parser)]
#[command(name = "lpdl", version, about = "Duality checks for crossed products of L^p-operator algebras")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run verification suites and write reports; exits 1 if any check fails.
    Verify(VerifyArgs),
    /// Bracket the p -> p norm of a matrix read from JSON.
    Pnorm(PnormArgs),
    /// Norm tables, verdicts, residuals and ranks of the duality chain.
    DualityReport(DualityArgs),
    /// Dimensions of C*-cores along the chain.
    Core(CoreArgs),
    /// Rerun a failing case written by `verify`.
    Replay(ReplayArgs),
}

#[derive(Args, Clone)]
struct ConfigArgs {
    /// JSON experiment configuration; flags below override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Group literal such as Z4, Z2xZ2 or Z1.
    #[arg(long)]
    group: Option<String>,
    #[arg(long)]
    n: Option<usize>,
    /// Action literal, e.g. `trivial` or `perm:(0 1)`.
    #[arg(long)]
    action: Option<String>,
    /// Comma-separated exponents.
    #[arg(long)]
    p: Option<String>,
    #[arg(long)]
    tests: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Relative margin for norm verdicts.
    #[arg(long)]
    margin: Option<f64>,
}

impl ConfigArgs {
    fn resolve(&self) -> Result<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => ExperimentConfig {
                group: self.group.clone().context("pass --group (or --config)")?,
                n: self.n.unwrap_or(1),
                action: "trivial".into(),
                p: vec![1.5, 2.0, 3.0],
                tests: 8,
                seed: 0,
                tolerances: Tolerances::default(),
                outputs: Default::default(),
            },
        };
        if let Some(g) = &self.group {
            cfg.group = g.clone();
        }
        if let Some(n) = self.n {
            cfg.n = n;
        }
        if let Some(a) = &self.action {
            cfg.action = a.clone();
        }
        if let Some(p) = &self.p {
            cfg.p = parse_p_list(p)?;
        }
        if let Some(t) = self.tests {
            cfg.tests = t;
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(m) = self.margin {
            cfg.tolerances.margin = m;
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    cfg: ConfigArgs,
    /// Suites to run (default: all).
    #[arg(long, value_delimiter = ',')]
    suite: Vec<String>,
    #[arg(long)]
    json: Option<PathBuf>,
    #[arg(long)]
    csv: Option<PathBuf>,
    #[arg(long)]
    md: Option<PathBuf>,
    /// Directory for replayable failure cases.
    #[arg(long)]
    cases: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    /// Power iteration, the exact values where available, and the grid bound when it applies.
    Auto,
    Power,
    Grid,
    Rt,
}

#[derive(Args)]
struct PnormArgs {
    /// Matrix JSON file.
    #[arg(long = "in")]
    input: PathBuf,
    /// Override the exponent stored in the file.
    #[arg(long)]
    p: Option<f64>,
    #[arg(long, value_enum, default_value = "auto")]
    method: Method,
    #[arg(long, default_value_t = 20)]
    restarts: usize,
    #[arg(long, default_value_t = 24)]
    depth: usize,
}

#[derive(Args)]
struct DualityArgs {
    #[command(flatten)]
    cfg: ConfigArgs,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Norm table; defaults to the JSON path with a .csv extension.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Include core dimensions.
    #[arg(long)]
    core: bool,
}

#[derive(Args)]
struct CoreArgs {
    #[command(flatten)]
    cfg: ConfigArgs,
}

#[derive(Args)]
struct ReplayArgs {
    #[arg(long)]
    case: PathBuf,
}

#[derive(Serialize)]
struct PnormOutput {
    p: f64,
    dim: usize,
    lower: f64,
    lower_method: BoundMethod,
    upper: Option<f64>,
    upper_method: Option<BoundMethod>,
    witness: Vec<[f64; 2]>,
}

#[derive(Serialize)]
struct CoreOutput {
    p: f64,
    core_a: usize,
    core_crossed: usize,
    core_double: usize,
    core_target: usize,
}

fn print_json(v: &impl Serialize) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(v)?);
    Ok(())
}

fn verify(args: VerifyArgs) -> Result<bool> {
    let cfg = args.cfg.resolve()?;
    let suites: Vec<String> = if args.suite.is_empty() {
        SUITES.iter().map(|s| s.to_string()).collect()
    } else {
        args.suite
    };
    let report = run_suites(&cfg, &suites)?;
    let json = args.json.or(cfg.outputs.json.clone());
    let csv = args.csv.or(cfg.outputs.csv.clone());
    let md = args.md.or(cfg.outputs.md.clone());
    let cases = args.cases.or(cfg.outputs.cases.clone());
    if let Some(p) = &json {
        emit_report(&report, Format::Json, p)?;
    }
    if let Some(p) = &csv {
        emit_report(&report, Format::Csv, p)?;
    }
    if let Some(p) = &md {
        emit_report(&report, Format::Md, p)?;
    }
    if let Some(dir) = &cases {
        for path in write_cases(&report, dir)? {
            eprintln!("failure case written to {}", path.display());
        }
    }
    if json.is_none() && csv.is_none() && md.is_none() {
        print!("{}", render_md(&report));
    }
    eprintln!(
        "{} of {} suites passed",
        report.suites - report.failed_suites,
        report.suites
    );
    Ok(report.passed)
}

fn pnorm(args: PnormArgs) -> Result<bool> {
    let mut op = read_operator(&args.input)?;
    if let Some(p) = args.p {
        op = op.with_p(PExponent::new(p)?);
    }
    if !op.is_square() {
        bail!("the p -> p norm needs a square matrix, got {}x{}", op.matrix.nrows(), op.matrix.ncols());
    }
    let p = op.p;
    let power = PowerOptions {
        restarts: args.restarts,
        ..PowerOptions::default()
    };
    let fast = EstimateOptions {
        power: power.clone(),
        grid_depth: None,
    };
    let mut est = match args.method {
        Method::Auto => estimate_norm(
            &op.matrix,
            p,
            &EstimateOptions {
                power,
                grid_depth: Some(args.depth),
            },
        ),
        Method::Power | Method::Rt => estimate_norm(&op.matrix, p, &fast),
        Method::Grid => {
            if op.dim() > GRID_MAX_DIM {
                bail!(
                    "the grid bound supports dimension at most {GRID_MAX_DIM}, got {}; use --method power or rt",
                    op.dim()
                );
            }
            let g = grid_upper(&op.matrix, p, args.depth)?;
            let mut e = estimate_norm(&op.matrix, p, &fast);
            e.upper = g.upper.max(e.lower);
            e.upper_method = Some(BoundMethod::GridRefine);
            e
        }
    };
    if matches!(args.method, Method::Rt) {
        est.upper = riesz_thorin(&op.matrix, p).max(est.lower);
        est.upper_method = Some(BoundMethod::RieszThorin);
    }
    print_json(&PnormOutput {
        p: p.p(),
        dim: op.dim(),
        lower: est.lower,
        lower_method: est.lower_method,
        upper: est.upper.is_finite().then_some(est.upper),
        upper_method: est.upper_method,
        witness: est.witness.iter().map(|z| [z.re, z.im]).collect(),
    })?;
    Ok(true)
}

fn duality(args: DualityArgs) -> Result<bool> {
    let cfg = args.cfg.resolve()?;
    let report = duality_report(&cfg, args.core)?;
    let json = serde_json::to_string_pretty(&report)? + "\n";
    let table = norm_table_csv(&report)?;
    match &args.out {
        Some(out) => {
            std::fs::write(out, json).with_context(|| format!("cannot write {}", out.display()))?;
            let csv = args.csv.clone().unwrap_or_else(|| out.with_extension("csv"));
            std::fs::write(&csv, table).with_context(|| format!("cannot write {}", csv.display()))?;
            eprintln!("wrote {} and {}", out.display(), csv.display());
        }
        None => {
            print!("{json}");
            if let Some(csv) = &args.csv {
                std::fs::write(csv, table).with_context(|| format!("cannot write {}", csv.display()))?;
            }
        }
    }
    Ok(true)
}

fn core(args: CoreArgs) -> Result<bool> {
    let cfg = args.cfg.resolve()?;
    let action = cfg.action()?;
    let mut out = Vec::new();
    for &p in &cfg.p {
        let pe = PExponent::new(p)?;
        let chain = DualityChain::new(action.clone(), pe)?;
        let dims = core_dimensions(&chain)?;
        out.push(CoreOutput {
            p,
            core_a: dims.core_a,
            core_crossed: core_compute(&crossed_product_basis(action.clone(), pe))?.len(),
            core_double: dims.core_double,
            core_target: dims.core_target,
        });
    }
    print_json(&out)?;
    Ok(true)
}

fn replay_case(args: ReplayArgs) -> Result<bool> {
    let text = std::fs::read_to_string(&args.case).with_context(|| format!("reading {}", args.case.display()))?;
    let case: ReplayCase = serde_json::from_str(&text)
        .with_context(|| format!("{} is not a replay case written by `verify --cases`", args.case.display()))?;
    let result = replay(&case)?;
    print_json(&result)?;
    eprintln!("{}: {}", case.suite, if result.passed { "PASS" } else { "FAIL" });
    Ok(result.passed)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Verify(a) => verify(a),
        Command::Pnorm(a) => pnorm(a),
        Command::DualityReport(a) => duality(a),
        Command::Core(a) => core(a),
        Command::Replay(a) => replay_case(a),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
