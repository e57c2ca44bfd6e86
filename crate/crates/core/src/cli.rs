//! Command-line front end: point evaluation, field export, engine comparison
//! and the Figure 1 dataset.
//!
//! Exit codes: 0 success, 2 invalid arguments, 3 numerical failure, 4 I/O.

use std::ffi::OsString;
use std::fmt;
use std::fs::File;
use std::io::{self, BufWriter, IsTerminal, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{Error, Result};
use crate::field::{eval_field, sig17, Engine, EngineConfig, Field, McSettings, PdeSettings};
use crate::initialdata::InitialDatum;
use crate::kernels::Problem;
use crate::quadrature::QuadratureSpec;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;
pub const EXIT_IO: i32 = 4;

/// Drift, boundary coefficient and datum of the Figure 1 experiment.
pub const FIGURE1_MU: f64 = 1.0;
pub const FIGURE1_NU: f64 = -0.5;
pub const FIGURE1_DATUM: &str = "gaussian:center=2.5,width=1";
pub const FIGURE1_T_GRID: GridSpec = GridSpec {
    start: 0.02,
    stop: 3.0,
    count: 150,
};
pub const FIGURE1_X_GRID: GridSpec = GridSpec {
    start: 0.0,
    stop: 6.0,
    count: 121,
};

/// Evenly spaced grid `start:stop:count`, endpoints included.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl GridSpec {
    pub fn points(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.start];
        }
        let last = (self.count - 1) as f64;
        (0..self.count)
            .map(|i| {
                if i + 1 == self.count {
                    self.stop
                } else {
                    self.start + (self.stop - self.start) * (i as f64 / last)
                }
            })
            .collect()
    }

    fn validate(&self, name: &str) -> Result<()> {
        if !(self.start.is_finite() && self.stop.is_finite()) {
            return Err(Error::InvalidGrid(format!("{name} has a non-finite endpoint")));
        }
        if self.count == 0 {
            return Err(Error::InvalidGrid(format!("{name} needs at least one point")));
        }
        if self.count > 1 && self.stop <= self.start {
            return Err(Error::InvalidGrid(format!("{name} must have stop > start")));
        }
        Ok(())
    }
}

impl fmt::Display for GridSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.start, self.stop, self.count)
    }
}

impl FromStr for GridSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("grid `{s}` is not of the form start:stop:count"));
        let parts: Vec<&str> = s.split(':').collect();
        let [start, stop, count] = parts.as_slice() else {
            return Err(bad());
        };
        let grid = GridSpec {
            start: start.trim().parse().map_err(|_| bad())?,
            stop: stop.trim().parse().map_err(|_| bad())?,
            count: count.trim().parse().map_err(|_| bad())?,
        };
        grid.validate("grid")?;
        Ok(grid)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSpec {
    pub path: Option<PathBuf>,
    pub format: Format,
}

/// Everything a run needs. Its JSON form is the `--config` file schema.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub mu: f64,
    pub nu: f64,
    pub f: String,
    #[serde(default = "default_engine")]
    pub engine: Engine,
    #[serde(default)]
    pub t_grid: Option<GridSpec>,
    #[serde(default)]
    pub x_grid: Option<GridSpec>,
    #[serde(default)]
    pub quadrature: QuadratureSpec,
    #[serde(default)]
    pub mc: McSettings,
    #[serde(default)]
    pub pde: PdeSettings,
    #[serde(default)]
    pub output: OutputSpec,
}

fn default_engine() -> Engine {
    Engine::ClosedSmooth
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse(format!("config: {e}")))
    }

    /// Pretty JSON with fixed key order; parsing it back gives the same text.
    pub fn to_canonical_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn problem(&self) -> Result<Problem> {
        Problem::new(self.mu, self.nu)
    }

    pub fn datum(&self) -> Result<InitialDatum> {
        self.f.parse()
    }

    pub fn engine_config(&self, engine: Engine) -> Result<EngineConfig> {
        self.quadrature.validate()?;
        if engine == Engine::MonteCarlo && self.mc.n < 2 {
            return Err(Error::InvalidArgument("--n must be at least 2".into()));
        }
        Ok(EngineConfig::from_parts(engine, self.quadrature, self.mc, self.pde))
    }
}

/// A config file with every key optional, merged under the flags.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct PartialConfig {
    mu: Option<f64>,
    nu: Option<f64>,
    f: Option<String>,
    engine: Option<Engine>,
    t_grid: Option<GridSpec>,
    x_grid: Option<GridSpec>,
    quadrature: Option<QuadratureSpec>,
    mc: Option<McSettings>,
    pde: Option<PdeSettings>,
    output: Option<OutputSpec>,
}

fn read_partial(path: &Path) -> Result<PartialConfig> {
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| Error::Parse(format!("config {}: {e}", path.display())))
}

#[derive(Debug, Parser)]
#[command(
    name = "swlab",
    version,
    about = "Half-line drift-diffusion with a Wentzell boundary condition"
)]
pub struct Cli {
    /// Worker threads for parallel evaluation (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate u(t, x) at one point and print `t,x,u[,stderr]`.
    Eval(EvalArgs),
    /// Evaluate u on a rectangular grid and write CSV or JSON.
    Field(FieldArgs),
    /// Evaluate two engines on a shared grid and report their difference.
    Compare(CompareArgs),
    /// Write the Figure 1 field (mu = 1, nu = -1/2, Gaussian bump at 2.5).
    Figure1(Figure1Args),
}

#[derive(Debug, Args)]
pub struct ProblemArgs {
    /// JSON run configuration; flags given on the command line take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, allow_hyphen_values = true)]
    pub mu: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub nu: Option<f64>,
    /// Initial datum: gaussian:center=C,width=W | expdecay:rate=R | table:PATH
    #[arg(long = "f")]
    pub datum: Option<String>,
}

#[derive(Debug, Args)]
pub struct EngineArgs {
    /// closed | nonsmooth | mc | pde | oracle
    #[arg(long)]
    pub engine: Option<Engine>,
    /// Monte Carlo sample count.
    #[arg(long)]
    pub n: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub dx: Option<f64>,
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long)]
    pub nx: Option<usize>,
    #[arg(long)]
    pub nt: Option<usize>,
    #[arg(long)]
    pub x_max: Option<f64>,
    /// Theta of the time stepping: 0 explicit, 0.5 Crank-Nicolson, 1 implicit.
    #[arg(long)]
    pub theta: Option<f64>,
    #[arg(long)]
    pub abs_tol: Option<f64>,
    #[arg(long)]
    pub rel_tol: Option<f64>,
    #[arg(long)]
    pub max_subdivisions: Option<usize>,
}

#[derive(Debug, Args)]
pub struct GridArgs {
    /// start:stop:count
    #[arg(long)]
    pub t_grid: Option<GridSpec>,
    /// start:stop:count
    #[arg(long)]
    pub x_grid: Option<GridSpec>,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Output file; standard output when absent.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[command(flatten)]
    pub engine: EngineArgs,
    #[arg(long)]
    pub t: f64,
    #[arg(long)]
    pub x: f64,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Args)]
pub struct FieldArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[command(flatten)]
    pub engine: EngineArgs,
    #[command(flatten)]
    pub grid: GridArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub problem: ProblemArgs,
    #[command(flatten)]
    pub engine: EngineArgs,
    /// Second engine, evaluated with the same settings and grid.
    #[arg(long)]
    pub against: Engine,
    #[command(flatten)]
    pub grid: GridArgs,
    /// Passes when max_abs_diff is at most this value.
    #[arg(long)]
    pub tolerance: Option<f64>,
    /// Report file; standard output when absent.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct Figure1Args {
    #[command(flatten)]
    pub engine: EngineArgs,
    #[command(flatten)]
    pub grid: GridArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

impl EngineArgs {
    fn apply(&self, cfg: &mut RunConfig) {
        if let Some(e) = self.engine {
            cfg.engine = e;
        }
        let mc = &mut cfg.mc;
        set(&mut mc.n, self.n);
        set(&mut mc.seed, self.seed);
        let pde = &mut cfg.pde;
        set(&mut pde.dx, self.dx);
        set(&mut pde.dt, self.dt);
        set(&mut pde.theta, self.theta);
        if self.nx.is_some() {
            pde.nx = self.nx;
        }
        if self.nt.is_some() {
            pde.nt = self.nt;
        }
        if self.x_max.is_some() {
            pde.x_max = self.x_max;
        }
        let q = &mut cfg.quadrature;
        set(&mut q.abs_tol, self.abs_tol);
        set(&mut q.rel_tol, self.rel_tol);
        set(&mut q.max_subdivisions, self.max_subdivisions);
    }
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

impl GridArgs {
    fn apply(&self, cfg: &mut RunConfig) {
        if self.t_grid.is_some() {
            cfg.t_grid = self.t_grid;
        }
        if self.x_grid.is_some() {
            cfg.x_grid = self.x_grid;
        }
    }
}

impl OutputArgs {
    fn apply(&self, cfg: &mut RunConfig) {
        if self.output.is_some() {
            cfg.output.path = self.output.clone();
            if self.format.is_none() && has_json_extension(self.output.as_deref()) {
                cfg.output.format = Format::Json;
            }
        }
        set(&mut cfg.output.format, self.format);
    }
}

fn has_json_extension(path: Option<&Path>) -> bool {
    path.and_then(Path::extension)
        .is_some_and(|e| e.eq_ignore_ascii_case("json"))
}

/// Merges the optional config file with the problem flags.
fn base_config(args: &ProblemArgs) -> Result<RunConfig> {
    let file = match &args.config {
        Some(path) => read_partial(path)?,
        None => PartialConfig::default(),
    };
    let missing = |flag: &str| Error::InvalidArgument(format!("--{flag} is required (flag or config key)"));
    Ok(RunConfig {
        mu: args.mu.or(file.mu).ok_or_else(|| missing("mu"))?,
        nu: args.nu.or(file.nu).ok_or_else(|| missing("nu"))?,
        f: args.datum.clone().or(file.f).ok_or_else(|| missing("f"))?,
        engine: file.engine.unwrap_or_else(default_engine),
        t_grid: file.t_grid,
        x_grid: file.x_grid,
        quadrature: file.quadrature.unwrap_or_default(),
        mc: file.mc.unwrap_or_default(),
        pde: file.pde.unwrap_or_default(),
        output: file.output.unwrap_or_default(),
    })
}

fn grids(cfg: &RunConfig) -> Result<(Vec<f64>, Vec<f64>)> {
    let t = cfg
        .t_grid
        .ok_or_else(|| Error::InvalidArgument("--t-grid is required".into()))?;
    let x = cfg
        .x_grid
        .ok_or_else(|| Error::InvalidArgument("--x-grid is required".into()))?;
    t.validate("t grid")?;
    x.validate("x grid")?;
    Ok((t.points(), x.points()))
}

fn field_for(cfg: &RunConfig, engine: Engine, t: &[f64], x: &[f64]) -> Result<Field> {
    let p = cfg.problem()?;
    let d = cfg.datum()?;
    eval_field(&p, &d, t, x, &cfg.engine_config(engine)?)
}

/// Opens the destination, or standard output when `path` is `None`.
fn with_output<F>(path: Option<&Path>, out: &mut (dyn Write + Send), body: F) -> Result<()>
where
    F: FnOnce(&mut (dyn Write + Send)) -> Result<()>,
{
    match path {
        Some(p) => {
            let mut w = BufWriter::new(File::create(p)?);
            body(&mut w)?;
            w.flush()?;
            Ok(())
        }
        None => {
            body(out)?;
            out.flush()?;
            Ok(())
        }
    }
}

fn write_field(field: &Field, spec: &OutputSpec, out: &mut (dyn Write + Send)) -> Result<()> {
    with_output(spec.path.as_deref(), out, |w| match spec.format {
        Format::Csv => field.write_csv(w),
        Format::Json => {
            serde_json::to_writer_pretty(&mut *w, &field.to_json())?;
            writeln!(w)?;
            Ok(())
        }
    })
}

pub fn cmd_eval(args: &EvalArgs, out: &mut (dyn Write + Send)) -> Result<()> {
    let mut cfg = base_config(&args.problem)?;
    args.engine.apply(&mut cfg);
    set(&mut cfg.output.format, args.format);
    let (t, x) = (args.t, args.x);
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::InvalidPoint(format!("t = {t} must be finite and non-negative")));
    }
    let d = cfg.datum()?;
    let (u, se) = if t == 0.0 {
        cfg.problem()?;
        cfg.engine_config(cfg.engine)?;
        (d.eval_f(x)?, (cfg.engine == Engine::MonteCarlo).then_some(0.0))
    } else {
        let field = field_for(&cfg, cfg.engine, &[t], &[x])?;
        (field.value(0, 0), field.std_errors().map(|s| s[0]))
    };
    match cfg.output.format {
        Format::Csv => {
            let mut record = vec![sig17(t), sig17(x), sig17(u)];
            record.extend(se.map(sig17));
            writeln!(out, "{}", record.join(","))?;
        }
        Format::Json => {
            let mut v = json!({ "t": t, "x": x, "u": u });
            if let Some(se) = se {
                v["std_error"] = json!(se);
            }
            writeln!(out, "{v}")?;
        }
    }
    out.flush()?;
    Ok(())
}

pub fn cmd_field(args: &FieldArgs, out: &mut (dyn Write + Send)) -> Result<()> {
    let mut cfg = base_config(&args.problem)?;
    args.engine.apply(&mut cfg);
    args.grid.apply(&mut cfg);
    args.output.apply(&mut cfg);
    let (t, x) = grids(&cfg)?;
    let field = field_for(&cfg, cfg.engine, &t, &x)?;
    write_field(&field, &cfg.output, out)
}

/// Pointwise comparison of two fields on the same grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompareReport {
    pub engines: [Engine; 2],
    pub max_abs_diff: f64,
    pub argmax: ArgMax,
    pub timings: Vec<Timing>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub z_score: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pass: Option<bool>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ArgMax {
    pub t: f64,
    pub x: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Timing {
    pub engine: Engine,
    pub seconds: f64,
}

/// Maximum z-score accepted when a Monte Carlo engine takes part.
pub const MC_Z_LIMIT: f64 = 3.0;

pub fn compare_fields(a: &Field, b: &Field, tolerance: Option<f64>) -> CompareReport {
    let nx = a.x_grid().len();
    let mut max_abs_diff = 0.0;
    let mut arg = 0;
    let mut z_max: Option<f64> = None;
    for (k, (&ua, &ub)) in a.values().iter().zip(b.values()).enumerate() {
        let diff = (ua - ub).abs();
        if diff > max_abs_diff {
            max_abs_diff = diff;
            arg = k;
        }
        let var = a.std_errors().map_or(0.0, |s| s[k] * s[k]) + b.std_errors().map_or(0.0, |s| s[k] * s[k]);
        if a.std_errors().is_some() || b.std_errors().is_some() {
            let z = if diff == 0.0 { 0.0 } else { diff / var.sqrt() };
            z_max = Some(z_max.map_or(z, |m| m.max(z)));
        }
    }
    let pass = match (z_max, tolerance) {
        (None, None) => None,
        (z, tol) => Some(z.is_none_or(|z| z <= MC_Z_LIMIT) && tol.is_none_or(|tol| max_abs_diff <= tol)),
    };
    CompareReport {
        engines: [a.engine(), b.engine()],
        max_abs_diff,
        argmax: ArgMax {
            t: a.t_grid()[arg / nx],
            x: a.x_grid()[arg % nx],
        },
        timings: Vec::new(),
        z_score: z_max,
        tolerance,
        pass,
    }
}

pub fn cmd_compare(args: &CompareArgs, out: &mut (dyn Write + Send)) -> Result<()> {
    let mut cfg = base_config(&args.problem)?;
    args.engine.apply(&mut cfg);
    args.grid.apply(&mut cfg);
    let (t, x) = grids(&cfg)?;
    let timed = |engine| -> Result<(Field, Timing)> {
        let start = Instant::now();
        let field = field_for(&cfg, engine, &t, &x)?;
        Ok((
            field,
            Timing {
                engine,
                seconds: start.elapsed().as_secs_f64(),
            },
        ))
    };
    let (a, ta) = timed(cfg.engine)?;
    let (b, tb) = timed(args.against)?;
    let mut report = compare_fields(&a, &b, args.tolerance);
    report.timings = vec![ta, tb];
    with_output(args.output.as_deref(), out, |w| {
        serde_json::to_writer_pretty(&mut *w, &report)?;
        writeln!(w)?;
        Ok(())
    })
}

/// The pinned Figure 1 configuration with its default grid.
pub fn figure1_config() -> RunConfig {
    RunConfig {
        mu: FIGURE1_MU,
        nu: FIGURE1_NU,
        f: FIGURE1_DATUM.to_string(),
        engine: Engine::ClosedSmooth,
        t_grid: Some(FIGURE1_T_GRID),
        x_grid: Some(FIGURE1_X_GRID),
        quadrature: QuadratureSpec::default(),
        mc: McSettings::default(),
        pde: PdeSettings::default(),
        output: OutputSpec::default(),
    }
}

pub fn cmd_figure1(args: &Figure1Args, out: &mut (dyn Write + Send), err: &mut (dyn Write + Send)) -> Result<()> {
    let mut cfg = figure1_config();
    args.engine.apply(&mut cfg);
    args.grid.apply(&mut cfg);
    args.output.apply(&mut cfg);
    let (t, x) = grids(&cfg)?;
    let field = field_for(&cfg, cfg.engine, &t, &x)?;
    write_field(&field, &cfg.output, out)?;
    let (u, tm, xm) = field.min();
    writeln!(err, "minimum u = {} at t = {}, x = {}", sig17(u), sig17(tm), sig17(xm))?;
    Ok(())
}

/// Maps an error onto the exit-code contract.
pub fn exit_code(e: &Error) -> i32 {
    if e.is_usage() {
        EXIT_USAGE
    } else if e.is_io() {
        EXIT_IO
    } else {
        EXIT_NUMERIC
    }
}

fn dispatch(cli: &Cli, out: &mut (dyn Write + Send), err: &mut (dyn Write + Send)) -> Result<()> {
    match &cli.command {
        Command::Eval(a) => cmd_eval(a, out),
        Command::Field(a) => cmd_field(a, out),
        Command::Compare(a) => cmd_compare(a, out),
        Command::Figure1(a) => cmd_figure1(a, out, err),
    }
}

/// Parses `args` (including the program name), runs the command and returns
/// the exit code. Diagnostics go to `err` as a single line.
pub fn run<I, T>(args: I, out: &mut (dyn Write + Send), err: &mut (dyn Write + Send), color: bool) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = if color {
                e.render().ansi().to_string()
            } else {
                e.render().to_string()
            };
            if e.use_stderr() {
                let _ = write!(err, "{text}");
            } else {
                let _ = write!(out, "{text}");
            }
            return code;
        }
    };
    let result = match cli.threads {
        Some(0) => Err(Error::InvalidArgument("--threads must be positive".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::InvalidArgument(e.to_string()))
            .and_then(|pool| pool.install(|| dispatch(&cli, out, err))),
        None => dispatch(&cli, out, err),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let label = if color { "\x1b[1;31merror:\x1b[0m" } else { "error:" };
            let line = e.to_string().replace('\n', " ");
            let _ = writeln!(err, "swlab: {label} {line}");
            exit_code(&e)
        }
    }
}

/// Entry point for the binary: real arguments and streams, colour only on a
/// terminal and only when `NO_COLOR` is unset or empty.
pub fn main() -> ExitCode {
    let no_color = std::env::var_os("NO_COLOR").is_some_and(|v| !v.is_empty());
    let color = !no_color && io::stderr().is_terminal();
    let stdout = io::stdout();
    let mut out = stdout;
    let mut err = io::stderr();
    let code = run(std::env::args_os(), &mut out, &mut err, color);
    ExitCode::from(code as u8)
}
