use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use curveflow::{
    analyze_curve, convergence_report, curvegen, fit_series, io, simulate, verify_corpus, CurveSpec, Error, FlowConfig,
    FlowKind, Shape, TraceSidecar,
};

#[derive(Parser)]
#[command(name = "curveflow", version, about = "Curvature functionals, isoperimetric checks and curve flows")]
struct Cli {
    #[command(flatten)]
    common: CommonArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Default)]
struct CommonArgs {
    /// Samples on the arc-length grid
    #[arg(long, global = true)]
    n: Option<usize>,
    #[arg(long, global = true)]
    ell_max: Option<usize>,
    /// dt = dt_safety * (L/N)^2
    #[arg(long, global = true)]
    dt_safety: Option<f64>,
    #[arg(long, global = true)]
    t_end: Option<f64>,
    /// Accepted steps between trace rows
    #[arg(long, global = true)]
    record_interval: Option<usize>,
    /// Stop once I_{-1} falls below this
    #[arg(long, global = true)]
    stop_tol: Option<f64>,
    #[arg(long, global = true, value_enum)]
    flow: Option<FlowArg>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Flat JSON config; flags take precedence
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (a file path for `gen`)
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
enum FlowArg {
    JiangPan,
    AreaPreserving,
}

impl From<FlowArg> for FlowKind {
    fn from(f: FlowArg) -> Self {
        match f {
            FlowArg::JiangPan => FlowKind::NonlocalCurvature,
            FlowArg::AreaPreserving => FlowKind::AreaPreserving,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate a curve file
    Gen(ShapeArgs),
    /// Diagnostics and identity residuals of one curve
    Analyze { input: PathBuf },
    /// Run a flow and write the trace and convergence report
    Flow {
        /// Initial curve file; otherwise the shape flags or the config's `curve`
        #[arg(long)]
        input: Option<PathBuf>,
        #[command(flatten)]
        shape: ShapeArgs,
    },
    /// Check inequalities and identities across a corpus
    Verify {
        #[arg(long, value_enum, default_value = "standard")]
        corpus: CorpusArg,
        /// Size of the perturbed corpus
        #[arg(long, default_value_t = 1000)]
        count: usize,
    },
    /// Exponential decay fit of one trace column
    Fit {
        trace: PathBuf,
        /// Column name, or iso_gap, center_gap, radius_gap
        #[arg(long, default_value = "I_m1")]
        quantity: String,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum CorpusArg {
    Standard,
    Perturbed,
    Empty,
}

#[derive(Clone, Copy, ValueEnum)]
enum Variant {
    Circle,
    Ellipse,
    PolarCosine,
    PerturbedCircle,
}

#[derive(Args)]
struct ShapeArgs {
    #[arg(long, value_enum)]
    variant: Option<Variant>,
    #[arg(long, default_value_t = 1.0)]
    radius: f64,
    #[arg(long, default_value_t = 0.0)]
    cx: f64,
    #[arg(long, default_value_t = 0.0)]
    cy: f64,
    #[arg(long, default_value_t = 0.0)]
    phase: f64,
    #[arg(long, default_value_t = 2.0)]
    a: f64,
    #[arg(long, default_value_t = 1.0)]
    b: f64,
    #[arg(long, default_value_t = 1.0)]
    base_radius: f64,
    #[arg(long, default_value_t = 0.5)]
    eps: f64,
    #[arg(long, default_value_t = 3)]
    mode: u32,
    #[arg(long, default_value_t = 8)]
    max_mode: u32,
    #[arg(long, default_value_t = 0.3)]
    decay: f64,
}

impl ShapeArgs {
    fn spec(&self, n: usize, seed: u64) -> Option<CurveSpec> {
        let center = [self.cx, self.cy];
        let shape = match self.variant? {
            Variant::Circle => Shape::Circle { radius: self.radius, center, phase: self.phase },
            Variant::Ellipse => Shape::Ellipse { a: self.a, b: self.b, center },
            Variant::PolarCosine => {
                Shape::PolarCosine { base_radius: self.base_radius, amplitude: self.eps, mode: self.mode }
            }
            Variant::PerturbedCircle => Shape::FourierPerturbedCircle {
                radius: self.radius,
                seed,
                max_mode: self.max_mode,
                amplitude_decay: self.decay,
            },
        };
        Some(CurveSpec::new(shape, n))
    }
}

/// Config file contents; every key is optional and mirrors a flag.
#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct FileConfig {
    n: Option<usize>,
    ell_max: Option<usize>,
    dt_safety: Option<f64>,
    t_end: Option<f64>,
    record_interval: Option<usize>,
    stop_tol: Option<f64>,
    flow: Option<FlowArg>,
    seed: Option<u64>,
    out: Option<PathBuf>,
    input: Option<PathBuf>,
    curve: Option<CurveSpec>,
    corpus: Option<Vec<CurveSpec>>,
}

#[derive(Debug, Clone, Serialize)]
struct RunConfig {
    n: usize,
    ell_max: usize,
    dt_safety: f64,
    t_end: f64,
    record_interval: usize,
    stop_tol: f64,
    flow: FlowKind,
    seed: u64,
    out: Option<PathBuf>,
    input: Option<PathBuf>,
    curve: Option<CurveSpec>,
    corpus: Option<Vec<CurveSpec>>,
}

impl RunConfig {
    fn resolve(flags: &CommonArgs) -> Result<Self> {
        let file: FileConfig = match &flags.config {
            Some(p) => {
                let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
                serde_json::from_str(&text).map_err(|e| Error::Malformed(format!("{}: {e}", p.display())))?
            }
            None => FileConfig::default(),
        };
        let d = FlowConfig::default();
        let cfg = Self {
            n: flags.n.or(file.n).unwrap_or(d.n),
            ell_max: flags.ell_max.or(file.ell_max).unwrap_or(d.ell_max),
            dt_safety: flags.dt_safety.or(file.dt_safety).unwrap_or(d.dt_safety),
            t_end: flags.t_end.or(file.t_end).unwrap_or(d.t_end),
            record_interval: flags.record_interval.or(file.record_interval).unwrap_or(d.record_interval),
            stop_tol: flags.stop_tol.or(file.stop_tol).unwrap_or(d.stop_tolerance),
            flow: flags.flow.or(file.flow).map(FlowKind::from).unwrap_or(FlowKind::NonlocalCurvature),
            seed: flags.seed.or(file.seed).unwrap_or(0),
            out: flags.out.clone().or(file.out),
            input: file.input,
            curve: file.curve,
            corpus: file.corpus,
        };
        cfg.flow_config().validate()?;
        Ok(cfg)
    }

    fn flow_config(&self) -> FlowConfig {
        FlowConfig {
            n: self.n,
            ell_max: self.ell_max,
            dt_safety: self.dt_safety,
            t_end: self.t_end,
            record_interval: self.record_interval,
            stop_tolerance: self.stop_tol,
            ..FlowConfig::default()
        }
    }

    fn out_dir(&self) -> Result<PathBuf> {
        let dir = self.out.clone().unwrap_or_else(|| PathBuf::from("."));
        std::fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
        Ok(dir)
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn cmd_gen(cfg: &RunConfig, shape: &ShapeArgs) -> Result<ExitCode> {
    let spec = shape
        .spec(cfg.n, cfg.seed)
        .or_else(|| cfg.curve.clone())
        .ok_or_else(|| Error::SpecInvalid("no --variant given and no `curve` in the config".into()))?;
    let samples = curvegen::generate(&spec)?;
    match &cfg.out {
        Some(path) => io::write_curve(path, &samples)?,
        None => println!("{}", io::curve_to_json(&samples)?),
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_analyze(cfg: &RunConfig, input: &Path) -> Result<ExitCode> {
    let raw = io::read_curve(input)?;
    let report = analyze_curve(&raw, cfg.n, cfg.ell_max)?;
    println!("{}", serde_json::to_string_pretty(&report)?);
    if let Some(dir) = &cfg.out {
        std::fs::create_dir_all(dir)?;
        write_json(&dir.join("diagnostics.json"), &report.diagnostics)?;
        write_json(&dir.join("identities.json"), &report.identities)?;
    }
    if report.passed() {
        Ok(ExitCode::SUCCESS)
    } else {
        eprintln!("failed checks: {}", report.failures.join(", "));
        Ok(ExitCode::from(3))
    }
}

fn cmd_flow(cfg: &RunConfig, input: Option<&Path>, shape: &ShapeArgs) -> Result<ExitCode> {
    let raw = if let Some(path) = input.or(cfg.input.as_deref()) {
        io::read_curve(path)?
    } else {
        let spec = shape
            .spec(cfg.n, cfg.seed)
            .or_else(|| cfg.curve.clone())
            .ok_or_else(|| Error::SpecInvalid("flow needs --input, --variant or a `curve` in the config".into()))?;
        curvegen::generate(&spec)?
    };
    let flow_config = cfg.flow_config();
    let dir = cfg.out_dir()?;
    let trace = match simulate(&raw, cfg.flow, &flow_config) {
        Ok(trace) => trace,
        Err(Error::StiffnessFailure { t, reason, partial }) => {
            partial.write_csv(&dir.join("trace.csv"))?;
            write_json(&dir.join("trace.json"), &TraceSidecar::new(&partial, &flow_config))?;
            eprintln!("stiffness failure at t = {t:e}: {reason}; partial trace kept");
            return Ok(ExitCode::from(5));
        }
        Err(e) => return Err(e.into()),
    };
    trace.write_csv(&dir.join("trace.csv"))?;
    write_json(&dir.join("trace.json"), &TraceSidecar::new(&trace, &flow_config))?;
    let report = convergence_report(&trace)?;
    write_json(&dir.join("report.json"), &report)?;
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(ExitCode::SUCCESS)
}

fn cmd_verify(cfg: &RunConfig, corpus: CorpusArg, count: usize) -> Result<ExitCode> {
    let specs = match (&cfg.corpus, corpus) {
        (Some(list), _) => list.clone(),
        (None, CorpusArg::Standard) => curvegen::standard_corpus(),
        (None, CorpusArg::Perturbed) => curvegen::perturbed_corpus(count, cfg.seed, cfg.n),
        (None, CorpusArg::Empty) => Vec::new(),
    };
    let summary = verify_corpus(&specs, cfg.ell_max)?;
    println!("{}", serde_json::to_string_pretty(&summary)?);
    if let Some(dir) = &cfg.out {
        std::fs::create_dir_all(dir)?;
        write_json(&dir.join("verify.json"), &summary)?;
    }
    Ok(if summary.violations == 0 && summary.errors == 0 { ExitCode::SUCCESS } else { ExitCode::from(3) })
}

fn cmd_fit(trace: &Path, quantity: &str) -> Result<ExitCode> {
    let text = std::fs::read_to_string(trace).with_context(|| format!("reading {}", trace.display()))?;
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().ok_or_else(|| Error::Malformed("empty trace".into()))?.split(',').collect();
    let rows: Vec<Vec<f64>> = lines
        .filter(|l| !l.trim().is_empty())
        .map(|l| l.split(',').map(|v| v.trim().parse::<f64>()).collect::<std::result::Result<Vec<_>, _>>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| Error::Malformed(format!("trace value: {e}")))?;
    let col = |name: &str| -> Result<Vec<f64>> {
        let i =
            header.iter().position(|h| *h == name).ok_or_else(|| Error::Malformed(format!("no column {name:?}")))?;
        rows.iter().map(|r| r.get(i).copied().ok_or_else(|| Error::Malformed("short row".into()).into())).collect()
    };
    let t = col("t")?;
    let series = match quantity {
        "iso_gap" => col("L")?.iter().zip(col("I_m1")?).map(|(l, d)| l * l * d).collect(),
        "center_gap" => {
            let (x, y) = (col("cx")?, col("cy")?);
            let (xe, ye) = (*x.last().unwrap_or(&0.0), *y.last().unwrap_or(&0.0));
            x.iter().zip(&y).map(|(a, b)| (a - xe).hypot(b - ye)).collect()
        }
        "radius_gap" => {
            let r = col("r_fit")?;
            let end = *r.last().unwrap_or(&0.0);
            r.iter().map(|v| (v - end).abs()).collect()
        }
        name => col(name)?,
    };
    let fit = fit_series(&t, &series)?;
    println!("{}", serde_json::to_string_pretty(&fit)?);
    Ok(ExitCode::SUCCESS)
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(Error::RotationNumberMismatch { .. }) => 4,
        Some(Error::StiffnessFailure { .. }) => 5,
        Some(
            Error::SpecInvalid(_)
            | Error::Malformed(_)
            | Error::InvalidSamples(_)
            | Error::NonFinite(_)
            | Error::DegenerateCurve { .. }
            | Error::DerivativeCapExceeded { .. }
            | Error::InsufficientData(_)
            | Error::Json(_),
        ) => 2,
        _ => 1,
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    let cfg = RunConfig::resolve(&cli.common)?;
    match &cli.command {
        Command::Gen(shape) => cmd_gen(&cfg, shape),
        Command::Analyze { input } => cmd_analyze(&cfg, input),
        Command::Flow { input, shape } => cmd_flow(&cfg, input.as_deref(), shape),
        Command::Verify { corpus, count } => cmd_verify(&cfg, *corpus, *count),
        Command::Fit { trace, quantity } => cmd_fit(trace, quantity),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
