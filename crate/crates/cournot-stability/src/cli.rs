//! Command-line front end: `analyze`, `density`, `lyapunov`, `sweep`,
//! `simulate`.
//!
//! Output contract:
//! * CSV uses ',' separators, '.' decimals, '#'-prefixed metadata lines
//!   (the fully resolved configuration, replayable), fixed headers.
//! * JSON documents carry explicit `config` and `tolerances` objects.
//! * Every float is serialized with 17 significant digits, so identical
//!   invocations produce byte-identical outputs.
//! * Exit codes: 0 success, 2 invalid parameters or usage, 3 numerical
//!   failure.
//! * `COURNOT_STABILITY_THREADS` caps worker parallelism (absent = auto);
//!   results are identical at any thread count.
//!
//! Flags override entries of the optional `--config key=value` file, which
//! overrides the built-in defaults documented on each flag.

use crate::config::{
    self, DEFAULT_BD_N, DEFAULT_HIST_BURN_IN, DEFAULT_HIST_STEP, DEFAULT_MC_HORIZON,
    DEFAULT_MC_PATHS, DEFAULT_MC_STEP, DEFAULT_N_GRID, DEFAULT_SEED, DEFAULT_SWEEP_POINTS,
    THREADS_ENV_VAR,
};
use crate::density::{
    density_backward_difference, density_closed_form, fpe_residual_profile, mc_angle_histogram,
};
use crate::error::{Error, Result};
use crate::game::{characteristic_roots, gamma_offsets, linearize, stationary_state, GameParams};
use crate::linalg::{Mat2, Vec2};
use crate::lyapunov::{
    lambda_discrete, lambda_monte_carlo, lambda_quadrature, lambda_quadrature_for_game,
    lambda_sweep, LambdaMethod, LyapunovEstimate, McConfig, SweepSettings, SweepVar,
};
use crate::meansquare::{mc_second_moment_check, mean_square_report, MeanSquareReport};
use crate::sim::{euler_maruyama, paper_taylor2, SdePath, WienerSpec, Wiring};
use crate::system::{LinearSystem, NoiseWiring};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

/// 17 significant digits; the serialization used everywhere.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        "null".to_string()
    }
}

// ---------------------------------------------------------------------------
// JSON with fixed-precision floats

struct SciFormatter {
    pretty: serde_json::ser::PrettyFormatter<'static>,
}

impl SciFormatter {
    fn new() -> Self {
        SciFormatter {
            pretty: serde_json::ser::PrettyFormatter::new(),
        }
    }
}

impl serde_json::ser::Formatter for SciFormatter {
    fn write_f64<W: ?Sized + std::io::Write>(
        &mut self,
        w: &mut W,
        value: f64,
    ) -> std::io::Result<()> {
        w.write_all(fmt_f64(value).as_bytes())
    }
    fn begin_array<W: ?Sized + std::io::Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        serde_json::ser::Formatter::begin_array(&mut self.pretty, w)
    }
    fn end_array<W: ?Sized + std::io::Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        serde_json::ser::Formatter::end_array(&mut self.pretty, w)
    }
    fn begin_array_value<W: ?Sized + std::io::Write>(
        &mut self,
        w: &mut W,
        first: bool,
    ) -> std::io::Result<()> {
        serde_json::ser::Formatter::begin_array_value(&mut self.pretty, w, first)
    }
    fn end_array_value<W: ?Sized + std::io::Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        serde_json::ser::Formatter::end_array_value(&mut self.pretty, w)
    }
    fn begin_object<W: ?Sized + std::io::Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        serde_json::ser::Formatter::begin_object(&mut self.pretty, w)
    }
    fn end_object<W: ?Sized + std::io::Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        serde_json::ser::Formatter::end_object(&mut self.pretty, w)
    }
    fn begin_object_key<W: ?Sized + std::io::Write>(
        &mut self,
        w: &mut W,
        first: bool,
    ) -> std::io::Result<()> {
        serde_json::ser::Formatter::begin_object_key(&mut self.pretty, w, first)
    }
    fn begin_object_value<W: ?Sized + std::io::Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        serde_json::ser::Formatter::begin_object_value(&mut self.pretty, w)
    }
    fn end_object_value<W: ?Sized + std::io::Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        serde_json::ser::Formatter::end_object_value(&mut self.pretty, w)
    }
}

fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, SciFormatter::new());
    value
        .serialize(&mut ser)
        .map_err(|e| Error::InvalidParams(format!("serialization failed: {e}")))?;
    out.push(b'\n');
    String::from_utf8(out).map_err(|e| Error::InvalidParams(e.to_string()))
}

// ---------------------------------------------------------------------------
// key=value defaults file

#[derive(Default)]
struct FileCfg(BTreeMap<String, String>);

impl FileCfg {
    fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(FileCfg::default());
        };
        let text = fs::read_to_string(path)
            .map_err(|e| Error::InvalidParams(format!("cannot read config file {path:?}: {e}")))?;
        let mut map = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return Err(Error::InvalidParams(format!(
                    "config file {path:?} line {}: expected key=value, got {line:?}",
                    lineno + 1
                )));
            };
            map.insert(k.trim().replace('-', "_"), v.trim().to_string());
        }
        Ok(FileCfg(map))
    }

    fn get_f64(&self, key: &str) -> Result<Option<f64>> {
        self.0
            .get(key)
            .map(|s| {
                s.parse::<f64>().map_err(|_| {
                    Error::InvalidParams(format!("config key {key}: bad number {s:?}"))
                })
            })
            .transpose()
    }

    fn get_usize(&self, key: &str) -> Result<Option<usize>> {
        self.0
            .get(key)
            .map(|s| {
                s.parse::<usize>().map_err(|_| {
                    Error::InvalidParams(format!("config key {key}: bad integer {s:?}"))
                })
            })
            .transpose()
    }

    fn get_u64(&self, key: &str) -> Result<Option<u64>> {
        self.0
            .get(key)
            .map(|s| {
                s.parse::<u64>().map_err(|_| {
                    Error::InvalidParams(format!("config key {key}: bad integer {s:?}"))
                })
            })
            .transpose()
    }
}

fn res_f64(flag: Option<f64>, file: &FileCfg, key: &str, default: f64) -> Result<f64> {
    Ok(flag.or(file.get_f64(key)?).unwrap_or(default))
}

fn res_usize(flag: Option<usize>, file: &FileCfg, key: &str, default: usize) -> Result<usize> {
    Ok(flag.or(file.get_usize(key)?).unwrap_or(default))
}

fn res_u64(flag: Option<u64>, file: &FileCfg, key: &str, default: u64) -> Result<u64> {
    Ok(flag.or(file.get_u64(key)?).unwrap_or(default))
}

// ---------------------------------------------------------------------------
// argument structures

#[derive(Parser)]
#[command(
    name = "cournot-stability",
    version,
    about = "Stochastic stability analysis of the Cournot duopoly SDE and 2-D linear SDEs"
)]
struct Cli {
    /// Optional key=value defaults file; flags override its entries.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Output path (stdout when omitted). `sweep` also writes a
    /// `<output>.signs.json` sidecar when this is set.
    #[arg(long, global = true, value_name = "FILE")]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Stationary state, linearization, eigenvalues and mean-square report (JSON).
    #[command(allow_negative_numbers = true)]
    Analyze(AnalyzeArgs),
    /// Stationary phase density by all three methods (CSV).
    #[command(allow_negative_numbers = true)]
    Density(DensityArgs),
    /// Top Lyapunov exponent by the requested methods (JSON).
    #[command(allow_negative_numbers = true)]
    Lyapunov(LyapunovArgs),
    /// λ over a noise-parameter range with bisected sign changes (CSV + JSON sidecar).
    #[command(allow_negative_numbers = true)]
    Sweep(SweepArgs),
    /// Simulated orbit of the nonlinear game SDE (CSV).
    #[command(allow_negative_numbers = true)]
    Simulate(SimulateArgs),
}

/// Four comma-separated entries "m11,m12,m21,m22".
#[derive(Clone, Copy)]
struct MatrixArg(Mat2);

fn parse_matrix(s: &str) -> std::result::Result<MatrixArg, String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 4 {
        return Err(format!(
            "expected 4 comma-separated entries, got {}",
            parts.len()
        ));
    }
    let vals: Vec<f64> = parts
        .iter()
        .map(|p| p.trim().parse::<f64>().map_err(|e| e.to_string()))
        .collect::<std::result::Result<_, _>>()?;
    Ok(MatrixArg(Mat2::new(vals[0], vals[1], vals[2], vals[3])))
}

/// Model parameters shared by every command. The defaults are the
/// reference setting: c1=0.2, c2=2, k1=0.2, k2=0.4, rotation-scale noise
/// with α=2, β=2.
#[derive(Args, Clone)]
struct ModelArgs {
    /// Marginal cost of firm 1 [default 0.2]
    #[arg(long)]
    c1: Option<f64>,
    /// Marginal cost of firm 2 [default 2]
    #[arg(long)]
    c2: Option<f64>,
    /// Adjustment speed of firm 1 [default 0.2]
    #[arg(long)]
    k1: Option<f64>,
    /// Adjustment speed of firm 2 [default 0.4]
    #[arg(long)]
    k2: Option<f64>,
    /// Rotation-scale noise strength α (b = αI + βJ) [default 2]
    #[arg(long)]
    alpha: Option<f64>,
    /// Rotation-scale noise strength β [default 2]
    #[arg(long)]
    beta: Option<f64>,
    /// Full noise matrix "b11,b12,b21,b22"; overrides --alpha/--beta.
    #[arg(long, value_parser = parse_matrix)]
    b: Option<MatrixArg>,
    /// Raw drift matrix "a11,a12,a21,a22" for a non-game linear system
    /// (requires --b-matrix; game flags are then ignored).
    #[arg(long, value_parser = parse_matrix)]
    a_matrix: Option<MatrixArg>,
    /// Raw diffusion matrix "b11,b12,b21,b22" accompanying --a-matrix.
    #[arg(long, value_parser = parse_matrix)]
    b_matrix: Option<MatrixArg>,
}

#[derive(Clone, Serialize)]
struct ResolvedModel {
    #[serde(skip_serializing_if = "Option::is_none")]
    game: Option<GameParams>,
    a: Mat2,
    b: Mat2,
}

impl ModelArgs {
    fn resolve(&self, file: &FileCfg) -> Result<ResolvedModel> {
        let raw_a = self
            .a_matrix
            .or_else(|| file.0.get("a_matrix").and_then(|s| parse_matrix(s).ok()));
        if let Some(MatrixArg(a)) = raw_a {
            let MatrixArg(b) = self
                .b_matrix
                .or_else(|| file.0.get("b_matrix").and_then(|s| parse_matrix(s).ok()))
                .ok_or_else(|| Error::InvalidParams("--a-matrix requires --b-matrix".into()))?;
            if !a.is_finite() || !b.is_finite() {
                return Err(Error::InvalidParams("raw matrices must be finite".into()));
            }
            return Ok(ResolvedModel { game: None, a, b });
        }
        let c1 = res_f64(self.c1, file, "c1", 0.2)?;
        let c2 = res_f64(self.c2, file, "c2", 2.0)?;
        let k1 = res_f64(self.k1, file, "k1", 0.2)?;
        let k2 = res_f64(self.k2, file, "k2", 0.4)?;
        let b = if let Some(MatrixArg(b)) = self
            .b
            .or_else(|| file.0.get("b").and_then(|s| parse_matrix(s).ok()))
        {
            b
        } else {
            let alpha = res_f64(self.alpha, file, "alpha", 2.0)?;
            let beta = res_f64(self.beta, file, "beta", 2.0)?;
            Mat2::rotation_scale(alpha, beta)
        };
        let game = GameParams::new(c1, c2, k1, k2, b)?;
        let lin = linearize(&game)?;
        Ok(ResolvedModel {
            game: Some(game),
            a: lin.system.a,
            b,
        })
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum WiringArg {
    Shared,
    Independent,
}

impl From<WiringArg> for NoiseWiring {
    fn from(w: WiringArg) -> Self {
        match w {
            WiringArg::Shared => NoiseWiring::SharedWiener,
            WiringArg::Independent => NoiseWiring::IndependentWieners,
        }
    }
}

#[derive(Args)]
struct AnalyzeArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Also run the Monte-Carlo second-moment check (500 paths, T=20, h=1e-3).
    #[arg(long)]
    mc_check: bool,
    /// Seed for the optional Monte-Carlo check [default 1]
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct DensityArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Grid intervals over [0, 2π]; the discrete scheme runs at N = n-grid/2
    /// so all methods share rows [default 2048]
    #[arg(long)]
    n_grid: Option<usize>,
    /// Seed for the histogram trajectory [default 1]
    #[arg(long)]
    seed: Option<u64>,
    /// Retained histogram samples [default 4000000]
    #[arg(long)]
    mc_samples: Option<usize>,
    /// Histogram integrator step [default 0.01]
    #[arg(long)]
    mc_step: Option<f64>,
    /// Histogram burn-in time [default 10]
    #[arg(long)]
    burn_in: Option<f64>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum MethodArg {
    Quadrature,
    Discrete,
    Mc,
}

#[derive(Args)]
struct LyapunovArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Methods to run [default: all three]
    #[arg(long, value_delimiter = ',')]
    methods: Vec<MethodArg>,
    /// Quadrature grid intervals [default 2048]
    #[arg(long)]
    n_grid: Option<usize>,
    /// Backward-difference nodes on [0, π] [default 2000]
    #[arg(long)]
    bd_nodes: Option<usize>,
    /// Monte-Carlo path count [default 200]
    #[arg(long)]
    mc_paths: Option<usize>,
    /// Monte-Carlo horizon T [default 200]
    #[arg(long)]
    mc_horizon: Option<f64>,
    /// Monte-Carlo step h [default 0.001]
    #[arg(long)]
    mc_step: Option<f64>,
    /// Noise wiring for the Monte-Carlo path SDE [default shared]
    #[arg(long, value_enum)]
    wiring: Option<WiringArg>,
    /// Base seed [default 1]
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Which rotation-scale parameter to vary
    #[arg(long, value_enum)]
    vary: SweepVarArg,
    /// Range start [default: -3 for alpha, -4 for beta]
    #[arg(long)]
    from: Option<f64>,
    /// Range end [default: 3 for alpha, 4 for beta]
    #[arg(long)]
    to: Option<f64>,
    /// Number of sweep points [default 61]
    #[arg(long)]
    points: Option<usize>,
    /// λ method for the sweep values [default quadrature]
    #[arg(long, value_enum)]
    method: Option<MethodArg>,
    /// Quadrature grid intervals [default 2048]
    #[arg(long)]
    n_grid: Option<usize>,
    /// Backward-difference nodes [default 2000]
    #[arg(long)]
    bd_nodes: Option<usize>,
    /// Monte-Carlo path count [default 200]
    #[arg(long)]
    mc_paths: Option<usize>,
    /// Monte-Carlo horizon [default 200]
    #[arg(long)]
    mc_horizon: Option<f64>,
    /// Monte-Carlo step [default 0.001]
    #[arg(long)]
    mc_step: Option<f64>,
    /// Base seed [default 1]
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum SweepVarArg {
    Alpha,
    Beta,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
enum SchemeArg {
    Em,
    Taylor2,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Integration scheme [default taylor2]
    #[arg(long, value_enum)]
    scheme: Option<SchemeArg>,
    /// Initial x1 [default 1.05 · x10]
    #[arg(long)]
    x1: Option<f64>,
    /// Initial x2 [default 1.05 · x20]
    #[arg(long)]
    x2: Option<f64>,
    /// Horizon T [default 50]
    #[arg(long)]
    t: Option<f64>,
    /// Step h [default 0.001]
    #[arg(long)]
    h: Option<f64>,
    /// Noise wiring [default shared]
    #[arg(long, value_enum)]
    wiring: Option<WiringArg>,
    /// Seed [default 1]
    #[arg(long)]
    seed: Option<u64>,
    /// Also emit the deterministic b=0 path on the same grid.
    #[arg(long)]
    with_ode: bool,
}

// ---------------------------------------------------------------------------
// entry point

/// Parses std::env arguments, runs the command, and returns the process exit
/// code (0 success, 2 invalid parameters, 3 numerical failure).
pub fn run() -> i32 {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(cli: Cli) -> Result<()> {
    let file = FileCfg::load(cli.config.as_deref())?;
    let out = collect_output(&cli, &file)?;
    match cli.output {
        Some(path) => {
            fs::write(&path, out.main)
                .map_err(|e| Error::InvalidParams(format!("cannot write {path:?}: {e}")))?;
            if let Some(sidecar) = out.sidecar {
                let side_path = sidecar_path(&path);
                fs::write(&side_path, sidecar).map_err(|e| {
                    Error::InvalidParams(format!("cannot write {side_path:?}: {e}"))
                })?;
            }
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(out.main.as_bytes())
                .map_err(|e| Error::InvalidParams(format!("cannot write stdout: {e}")))?;
        }
    }
    Ok(())
}

fn sidecar_path(main: &Path) -> PathBuf {
    let mut s = main.as_os_str().to_owned();
    s.push(".signs.json");
    PathBuf::from(s)
}

struct CommandOutput {
    main: String,
    sidecar: Option<String>,
}

fn collect_output(cli: &Cli, file: &FileCfg) -> Result<CommandOutput> {
    let work = || -> Result<CommandOutput> {
        match &cli.command {
            Command::Analyze(args) => cmd_analyze(args, file),
            Command::Density(args) => cmd_density(args, file),
            Command::Lyapunov(args) => cmd_lyapunov(args, file),
            Command::Sweep(args) => cmd_sweep(args, file),
            Command::Simulate(args) => cmd_simulate(args, file),
        }
    };
    match std::env::var(THREADS_ENV_VAR) {
        Ok(raw) => {
            let n: usize = raw.parse().map_err(|_| {
                Error::InvalidParams(format!(
                    "{THREADS_ENV_VAR} must be a positive integer, got {raw:?}"
                ))
            })?;
            if n == 0 {
                return Err(Error::InvalidParams(format!(
                    "{THREADS_ENV_VAR} must be >= 1"
                )));
            }
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::InvalidParams(format!("cannot build worker pool: {e}")))?;
            pool.install(work)
        }
        Err(_) => work(),
    }
}

// ---------------------------------------------------------------------------
// analyze

#[derive(Serialize)]
struct ComplexOut {
    re: f64,
    im: f64,
}

#[derive(Serialize)]
struct PairOut {
    x1: f64,
    x2: f64,
}

#[derive(Serialize)]
struct AnalyzeConfig {
    model: ResolvedModel,
    mc_check: bool,
    seed: u64,
    mean_square_wiring: &'static str,
}

#[derive(Serialize)]
struct AnalyzeDoc {
    command: &'static str,
    config: AnalyzeConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    stationary_state: Option<PairOut>,
    #[serde(skip_serializing_if = "Option::is_none")]
    gamma: Option<PairOut>,
    a: Mat2,
    b: Mat2,
    #[serde(skip_serializing_if = "Option::is_none")]
    jacobian_fd_max_deviation: Option<f64>,
    eigenvalues: [ComplexOut; 2],
    half_trace: f64,
    discriminant: f64,
    mean_square: MeanSquareReport,
    tolerances: Tolerances,
}

#[derive(Serialize)]
struct Tolerances {
    stationary_drift_rel: f64,
    jacobian_fd_abs: f64,
    normalization_abs: f64,
    fpe_residual_abs: f64,
    pi_shift_abs: f64,
    closed_form_agreement_abs: f64,
    lambda_cross_method_floor: f64,
}

impl Tolerances {
    fn table() -> Self {
        Tolerances {
            stationary_drift_rel: config::TOL_STATIONARY_DRIFT,
            jacobian_fd_abs: config::TOL_JACOBIAN_FD,
            normalization_abs: config::TOL_NORMALIZATION,
            fpe_residual_abs: config::TOL_FPE_RESIDUAL,
            pi_shift_abs: config::TOL_PI_SHIFT,
            closed_form_agreement_abs: config::TOL_CLOSED_FORM_AGREEMENT,
            lambda_cross_method_floor: config::TOL_LAMBDA_CROSS_METHOD,
        }
    }
}

fn cmd_analyze(args: &AnalyzeArgs, file: &FileCfg) -> Result<CommandOutput> {
    let model = args.model.resolve(file)?;
    let seed = res_u64(args.seed, file, "seed", DEFAULT_SEED)?;

    // the quadratic-form derivation corresponds to independent noises
    let ms_system = LinearSystem::new(model.a, model.b, NoiseWiring::IndependentWieners);
    let mc = if args.mc_check {
        Some(mc_second_moment_check(&ms_system, seed, 500, 20.0, 1e-3)?)
    } else {
        None
    };
    let mean_square = mean_square_report(&ms_system, mc);

    let (stationary, gamma, fd_dev) = match &model.game {
        Some(game) => {
            let lin = linearize(game)?;
            let g = gamma_offsets(game)?;
            (
                Some(PairOut {
                    x1: lin.stationary.x10,
                    x2: lin.stationary.x20,
                }),
                Some(PairOut { x1: g.x, x2: g.y }),
                Some(lin.fd_max_deviation),
            )
        }
        None => (None, None, None),
    };
    let roots = characteristic_roots(&LinearSystem::new(
        model.a,
        model.b,
        NoiseWiring::SharedWiener,
    ));

    let doc = AnalyzeDoc {
        command: "analyze",
        config: AnalyzeConfig {
            model: model.clone(),
            mc_check: args.mc_check,
            seed,
            mean_square_wiring: "independent",
        },
        stationary_state: stationary,
        gamma,
        a: model.a,
        b: model.b,
        jacobian_fd_max_deviation: fd_dev,
        eigenvalues: [
            ComplexOut {
                re: roots.mu1.re,
                im: roots.mu1.im,
            },
            ComplexOut {
                re: roots.mu2.re,
                im: roots.mu2.im,
            },
        ],
        half_trace: roots.half_trace,
        discriminant: roots.discriminant,
        mean_square,
        tolerances: Tolerances::table(),
    };
    Ok(CommandOutput {
        main: to_json(&doc)?,
        sidecar: None,
    })
}

// ---------------------------------------------------------------------------
// density

fn push_config_comments<T: Serialize>(out: &mut String, cfg: &T) {
    // one "# key=value" line per flat config entry
    let value = serde_json::to_value(cfg).expect("config serializes");
    if let serde_json::Value::Object(map) = value {
        for (k, v) in map {
            let rendered = match v {
                serde_json::Value::Number(n) => match n.as_f64() {
                    Some(f) if n.is_f64() => fmt_f64(f),
                    _ => n.to_string(),
                },
                serde_json::Value::String(s) => s,
                other => other.to_string(),
            };
            out.push_str(&format!("# {k}={rendered}\n"));
        }
    }
}

#[derive(Serialize)]
struct DensityConfig {
    command: &'static str,
    c1: Option<f64>,
    c2: Option<f64>,
    k1: Option<f64>,
    k2: Option<f64>,
    /// "b11,b12,b21,b22" in the same form the `b` config key accepts.
    b: String,
    n_grid: usize,
    bd_nodes: usize,
    seed: u64,
    mc_samples: usize,
    mc_step: f64,
    burn_in: f64,
}

fn matrix_key(m: Mat2) -> String {
    format!(
        "{},{},{},{}",
        fmt_f64(m.m11),
        fmt_f64(m.m12),
        fmt_f64(m.m21),
        fmt_f64(m.m22)
    )
}

fn cmd_density(args: &DensityArgs, file: &FileCfg) -> Result<CommandOutput> {
    let model = args.model.resolve(file)?;
    let n_grid = res_usize(args.n_grid, file, "n_grid", DEFAULT_N_GRID)?;
    if n_grid < 64 || n_grid % 2 != 0 {
        return Err(Error::InvalidParams(format!(
            "n-grid must be even and >= 64, got {n_grid}"
        )));
    }
    let seed = res_u64(args.seed, file, "seed", DEFAULT_SEED)?;
    let mc_samples = res_usize(args.mc_samples, file, "mc_samples", 4_000_000)?;
    let mc_step = res_f64(args.mc_step, file, "mc_step", DEFAULT_HIST_STEP)?;
    let burn_in = res_f64(args.burn_in, file, "burn_in", DEFAULT_HIST_BURN_IN)?;
    let bd_nodes = n_grid / 2;

    let sys = LinearSystem::new(model.a, model.b, NoiseWiring::SharedWiener);
    let closed = density_closed_form(&sys, n_grid)?;
    let discrete = density_backward_difference(&sys, bd_nodes)?;
    let mc = mc_angle_histogram(&sys, seed, mc_samples, burn_in, mc_step, n_grid)?;
    let residuals = fpe_residual_profile(&sys, &closed);

    let cfg = DensityConfig {
        command: "density",
        c1: model.game.as_ref().map(|g| g.c1),
        c2: model.game.as_ref().map(|g| g.c2),
        k1: model.game.as_ref().map(|g| g.k1),
        k2: model.game.as_ref().map(|g| g.k2),
        b: matrix_key(model.b),
        n_grid,
        bd_nodes,
        seed,
        mc_samples,
        mc_step,
        burn_in,
    };
    let mut out = String::new();
    push_config_comments(&mut out, &cfg);
    out.push_str(&format!(
        "# closed_form_variant={:?} normalization_error={} fpe_residual={}\n",
        closed
            .closed_form_variant
            .expect("closed form records its variant"),
        fmt_f64(closed.normalization_error),
        fmt_f64(closed.fpe_residual),
    ));
    out.push_str(&format!(
        "# discrete_normalization_error={} discrete_fpe_residual={} periodicity_fallback={}\n",
        fmt_f64(discrete.normalization_error),
        fmt_f64(discrete.fpe_residual),
        discrete.periodicity_fallback,
    ));
    out.push_str(&format!("# mc_fpe_residual={}\n", fmt_f64(mc.fpe_residual)));
    out.push_str("theta,p_closed,p_discrete,p_mc,fpe_residual\n");
    let n = closed.n_intervals();
    for j in 0..=n {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            fmt_f64(closed.grid[j]),
            fmt_f64(closed.values[j]),
            fmt_f64(discrete.values[j]),
            fmt_f64(mc.values[j]),
            fmt_f64(residuals[j % n]),
        ));
    }
    Ok(CommandOutput {
        main: out,
        sidecar: None,
    })
}

// ---------------------------------------------------------------------------
// lyapunov

#[derive(Serialize)]
struct LyapunovConfig {
    model: ResolvedModel,
    methods: Vec<MethodArg>,
    n_grid: usize,
    bd_nodes: usize,
    mc_paths: usize,
    mc_horizon: f64,
    mc_step: f64,
    wiring: WiringArg,
    seed: u64,
}

#[derive(Serialize)]
struct Agreement {
    first: &'static str,
    second: &'static str,
    difference: f64,
    tolerance: f64,
    agree: bool,
}

#[derive(Serialize)]
struct LyapunovDoc {
    command: &'static str,
    config: LyapunovConfig,
    estimates: Vec<LyapunovEstimate>,
    agreement: Vec<Agreement>,
    all_agree: bool,
    tolerances: Tolerances,
}

fn cmd_lyapunov(args: &LyapunovArgs, file: &FileCfg) -> Result<CommandOutput> {
    let model = args.model.resolve(file)?;
    let methods = if args.methods.is_empty() {
        vec![MethodArg::Quadrature, MethodArg::Discrete, MethodArg::Mc]
    } else {
        args.methods.clone()
    };
    let n_grid = res_usize(args.n_grid, file, "n_grid", DEFAULT_N_GRID)?;
    let bd_nodes = res_usize(args.bd_nodes, file, "bd_nodes", DEFAULT_BD_N)?;
    let mc_paths = res_usize(args.mc_paths, file, "mc_paths", DEFAULT_MC_PATHS)?;
    let mc_horizon = res_f64(args.mc_horizon, file, "mc_horizon", DEFAULT_MC_HORIZON)?;
    let mc_step = res_f64(args.mc_step, file, "mc_step", DEFAULT_MC_STEP)?;
    let seed = res_u64(args.seed, file, "seed", DEFAULT_SEED)?;
    let wiring = args.wiring.unwrap_or(WiringArg::Shared);

    let sys = LinearSystem::new(model.a, model.b, wiring.into());
    let mut estimates = Vec::new();
    for m in &methods {
        let est = match m {
            MethodArg::Quadrature => {
                let d = density_closed_form(&sys, n_grid)?;
                match &model.game {
                    Some(game) if sys.b.as_rotation_scale().is_some() => {
                        lambda_quadrature_for_game(game, &d)?
                    }
                    _ => lambda_quadrature(&sys, &d)?,
                }
            }
            MethodArg::Discrete => lambda_discrete(&sys, bd_nodes)?,
            MethodArg::Mc => lambda_monte_carlo(
                &sys,
                &McConfig {
                    seed,
                    n_paths: mc_paths,
                    horizon: mc_horizon,
                    step: mc_step,
                    renormalize: true,
                },
            )?,
        };
        estimates.push(est);
    }

    let mut agreement = Vec::new();
    let name = |m: LambdaMethod| match m {
        LambdaMethod::Quadrature => "quadrature",
        LambdaMethod::DiscreteScheme => "discrete",
        LambdaMethod::MonteCarlo => "monte-carlo",
    };
    for i in 0..estimates.len() {
        for j in i + 1..estimates.len() {
            let (a, b) = (&estimates[i], &estimates[j]);
            let tol = config::TOL_LAMBDA_CROSS_METHOD
                .max(3.0 * a.std_error)
                .max(3.0 * b.std_error);
            let difference = (a.value - b.value).abs();
            agreement.push(Agreement {
                first: name(a.method),
                second: name(b.method),
                difference,
                tolerance: tol,
                agree: difference <= tol,
            });
        }
    }
    let all_agree = agreement.iter().all(|a| a.agree);

    let doc = LyapunovDoc {
        command: "lyapunov",
        config: LyapunovConfig {
            model,
            methods,
            n_grid,
            bd_nodes,
            mc_paths,
            mc_horizon,
            mc_step,
            wiring,
            seed,
        },
        estimates,
        agreement,
        all_agree,
        tolerances: Tolerances::table(),
    };
    Ok(CommandOutput {
        main: to_json(&doc)?,
        sidecar: None,
    })
}

// ---------------------------------------------------------------------------
// sweep

#[derive(Serialize)]
struct SweepConfig {
    command: &'static str,
    c1: f64,
    c2: f64,
    k1: f64,
    k2: f64,
    alpha: f64,
    beta: f64,
    vary: SweepVarArg,
    from: f64,
    to: f64,
    points: usize,
    method: MethodArg,
    n_grid: usize,
    bd_nodes: usize,
    mc_paths: usize,
    mc_horizon: f64,
    mc_step: f64,
    seed: u64,
    bracket_width: f64,
}

#[derive(Serialize)]
struct SweepSidecar<'a> {
    command: &'static str,
    config: &'a SweepConfig,
    sign_changes: Vec<crate::lyapunov::SignChange>,
}

fn cmd_sweep(args: &SweepArgs, file: &FileCfg) -> Result<CommandOutput> {
    let model = args.model.resolve(file)?;
    let game = model.game.ok_or_else(|| {
        Error::InvalidParams("sweep needs game parameters, not raw matrices".into())
    })?;
    let (alpha, beta) = game.b.as_rotation_scale().ok_or_else(|| {
        Error::InvalidParams("sweep needs rotation-scale noise b = αI + βJ".into())
    })?;
    let vary = match args.vary {
        SweepVarArg::Alpha => SweepVar::Alpha,
        SweepVarArg::Beta => SweepVar::Beta,
    };
    let (def_from, def_to) = match vary {
        SweepVar::Alpha => (-3.0, 3.0),
        SweepVar::Beta => (-4.0, 4.0),
    };
    let from = res_f64(args.from, file, "from", def_from)?;
    let to = res_f64(args.to, file, "to", def_to)?;
    let points = res_usize(args.points, file, "points", DEFAULT_SWEEP_POINTS)?;
    let method_arg = args.method.unwrap_or(MethodArg::Quadrature);
    let method = match method_arg {
        MethodArg::Quadrature => LambdaMethod::Quadrature,
        MethodArg::Discrete => LambdaMethod::DiscreteScheme,
        MethodArg::Mc => LambdaMethod::MonteCarlo,
    };
    let seed = res_u64(args.seed, file, "seed", DEFAULT_SEED)?;
    let settings = SweepSettings {
        n_grid: res_usize(args.n_grid, file, "n_grid", DEFAULT_N_GRID)?,
        bd_nodes: res_usize(args.bd_nodes, file, "bd_nodes", DEFAULT_BD_N)?,
        mc: McConfig {
            seed,
            n_paths: res_usize(args.mc_paths, file, "mc_paths", DEFAULT_MC_PATHS)?,
            horizon: res_f64(args.mc_horizon, file, "mc_horizon", DEFAULT_MC_HORIZON)?,
            step: res_f64(args.mc_step, file, "mc_step", DEFAULT_MC_STEP)?,
            renormalize: true,
        },
        bracket_width: config::SIGN_CHANGE_BRACKET_WIDTH,
    };

    let table = lambda_sweep(&game, vary, (from, to), points, method, &settings)?;
    let succeeded = table.points.iter().filter(|p| !p.skipped).count();
    let cfg = SweepConfig {
        command: "sweep",
        c1: game.c1,
        c2: game.c2,
        k1: game.k1,
        k2: game.k2,
        alpha,
        beta,
        vary: args.vary,
        from,
        to,
        points,
        method: method_arg,
        n_grid: settings.n_grid,
        bd_nodes: settings.bd_nodes,
        mc_paths: settings.mc.n_paths,
        mc_horizon: settings.mc.horizon,
        mc_step: settings.mc.step,
        seed,
        bracket_width: settings.bracket_width,
    };

    let mut out = String::new();
    push_config_comments(&mut out, &cfg);
    for sc in &table.sign_changes {
        out.push_str(&format!(
            "# sign_change lower={} upper={} root={}\n",
            fmt_f64(sc.lower),
            fmt_f64(sc.upper),
            fmt_f64(sc.root)
        ));
    }
    out.push_str("param,lambda,std_error,flag\n");
    for p in &table.points {
        let lambda = p.lambda.map(fmt_f64).unwrap_or_default();
        let se = p.std_error.map(fmt_f64).unwrap_or_default();
        let flag = if p.skipped { "degenerate-noise" } else { "" };
        out.push_str(&format!("{},{lambda},{se},{flag}\n", fmt_f64(p.param)));
    }

    let sidecar = to_json(&SweepSidecar {
        command: "sweep-sign-changes",
        config: &cfg,
        sign_changes: table.sign_changes.clone(),
    })?;

    if (succeeded as f64) < 0.9 * table.points.len() as f64 {
        // the partial table is still written before failing the run
        eprintln!(
            "sweep: only {succeeded} of {} points succeeded",
            table.points.len()
        );
        return Err(Error::DegenerateNoise {
            min_abs_q4: 0.0,
            bound: config::EPS_Q4,
        });
    }
    Ok(CommandOutput {
        main: out,
        sidecar: Some(sidecar),
    })
}

// ---------------------------------------------------------------------------
// simulate

#[derive(Serialize)]
struct SimulateConfig {
    command: &'static str,
    c1: f64,
    c2: f64,
    k1: f64,
    k2: f64,
    b: String,
    scheme: SchemeArg,
    x1: f64,
    x2: f64,
    t: f64,
    h: f64,
    wiring: WiringArg,
    seed: u64,
    with_ode: bool,
}

fn cmd_simulate(args: &SimulateArgs, file: &FileCfg) -> Result<CommandOutput> {
    let model = args.model.resolve(file)?;
    let game = model.game.ok_or_else(|| {
        Error::InvalidParams("simulate needs game parameters, not raw matrices".into())
    })?;
    let scheme = args.scheme.unwrap_or(SchemeArg::Taylor2);
    let x0 = stationary_state(&game)?;
    let x1_init = res_f64(args.x1, file, "x1", 1.05 * x0.x10)?;
    let x2_init = res_f64(args.x2, file, "x2", 1.05 * x0.x20)?;
    let horizon = res_f64(args.t, file, "t", 50.0)?;
    let step = res_f64(args.h, file, "h", DEFAULT_MC_STEP)?;
    if step.is_nan() || step <= 0.0 || horizon < step {
        return Err(Error::InvalidParams("simulate needs t >= h > 0".into()));
    }
    let wiring = args.wiring.unwrap_or(WiringArg::Shared);
    let seed = res_u64(args.seed, file, "seed", DEFAULT_SEED)?;

    let spec = WienerSpec {
        seed,
        step_h: step,
        n_steps: (horizon / step).round() as usize,
        wiring: match wiring {
            WiringArg::Shared => Wiring::SharedWiener,
            WiringArg::Independent => Wiring::IndependentWieners,
        },
    };
    let x_init = Vec2::new(x1_init, x2_init);
    let integrate = |p: &GameParams| -> Result<SdePath> {
        match scheme {
            SchemeArg::Em => euler_maruyama(p, x_init, &spec),
            SchemeArg::Taylor2 => paper_taylor2(p, x_init, &spec),
        }
    };
    let path = integrate(&game)?;
    let ode_path = if args.with_ode {
        let quiet = GameParams::new(game.c1, game.c2, game.k1, game.k2, Mat2::ZERO)?;
        Some(integrate(&quiet)?)
    } else {
        None
    };

    let cfg = SimulateConfig {
        command: "simulate",
        c1: game.c1,
        c2: game.c2,
        k1: game.k1,
        k2: game.k2,
        b: matrix_key(game.b),
        scheme,
        x1: x1_init,
        x2: x2_init,
        t: horizon,
        h: step,
        wiring,
        seed,
        with_ode: args.with_ode,
    };
    let mut out = String::new();
    push_config_comments(&mut out, &cfg);
    out.push_str(&format!(
        "# stationary_x1={} stationary_x2={}\n",
        fmt_f64(x0.x10),
        fmt_f64(x0.x20)
    ));
    if args.with_ode {
        out.push_str("n,t,x1,x2,ode_x1,ode_x2,flag\n");
    } else {
        out.push_str("n,t,x1,x2,flag\n");
    }
    let rows = path
        .states
        .len()
        .max(ode_path.as_ref().map_or(0, |p| p.states.len()));
    for j in 0..rows {
        let t = j as f64 * step;
        let (x1s, x2s) = match path.states.get(j) {
            Some(s) => (fmt_f64(s.x), fmt_f64(s.y)),
            None => (String::new(), String::new()),
        };
        out.push_str(&format!("{j},{},{x1s},{x2s}", fmt_f64(t)));
        if let Some(ode) = &ode_path {
            match ode.states.get(j) {
                Some(s) => out.push_str(&format!(",{},{}", fmt_f64(s.x), fmt_f64(s.y))),
                None => out.push_str(",,"),
            }
        }
        out.push_str(",\n");
    }
    if let Some(trunc) = path.truncation {
        let ode_cols = if args.with_ode { ",," } else { "" };
        out.push_str(&format!(
            "{},{},,{ode_cols},truncated:{:?}\n",
            trunc.step,
            fmt_f64(trunc.step as f64 * step),
            trunc.reason
        ));
    }
    Ok(CommandOutput {
        main: out,
        sidecar: None,
    })
}
