//! Rectangular `(t, x)` fields of `u` and the engine dispatch that fills them.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{Error, Result};
use crate::initialdata::InitialDatum;
use crate::kernels::Problem;
use crate::montecarlo::estimate_u;
use crate::pdesolver::{solve_pde_on, PdeGrid};
use crate::quadrature::{eval_u_density_oracle, eval_u_nonsmooth, eval_u_smooth, QuadratureSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Engine {
    ClosedSmooth,
    ClosedNonsmooth,
    MonteCarlo,
    Pde,
    DensityOracle,
}

impl Engine {
    /// Short name used on the command line.
    pub fn cli_name(self) -> &'static str {
        match self {
            Engine::ClosedSmooth => "closed",
            Engine::ClosedNonsmooth => "nonsmooth",
            Engine::MonteCarlo => "mc",
            Engine::Pde => "pde",
            Engine::DensityOracle => "oracle",
        }
    }

    pub fn is_deterministic(self) -> bool {
        self != Engine::MonteCarlo
    }
}

impl fmt::Display for Engine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.cli_name())
    }
}

impl FromStr for Engine {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "closed" | "closed_smooth" => Ok(Engine::ClosedSmooth),
            "nonsmooth" | "closed_nonsmooth" => Ok(Engine::ClosedNonsmooth),
            "mc" | "monte_carlo" => Ok(Engine::MonteCarlo),
            "pde" => Ok(Engine::Pde),
            "oracle" | "density_oracle" => Ok(Engine::DensityOracle),
            other => Err(Error::Parse(format!("unknown engine `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct McSettings {
    pub n: u64,
    pub seed: u64,
}

impl Default for McSettings {
    fn default() -> Self {
        Self { n: 1_000_000, seed: 42 }
    }
}

/// How the finite-difference grid is chosen for a run ending at `t_end`.
///
/// `nx` and `nt`, when set, override the spacings `dx` and `dt`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PdeSettings {
    pub dx: f64,
    pub dt: f64,
    pub theta: f64,
    pub x_max: Option<f64>,
    pub nx: Option<usize>,
    pub nt: Option<usize>,
}

impl Default for PdeSettings {
    fn default() -> Self {
        Self {
            dx: 0.01,
            dt: 0.001,
            theta: 0.5,
            x_max: None,
            nx: None,
            nt: None,
        }
    }
}

impl PdeSettings {
    pub fn grid_for(&self, p: &Problem, d: &InitialDatum, t_end: f64) -> PdeGrid {
        let mut grid = PdeGrid::with_steps(p, d, t_end, self.dx, self.dt);
        if let Some(x_max) = self.x_max {
            grid.x_max = x_max;
            grid.nx = (x_max / self.dx).round().max(1.0) as usize;
        }
        if let Some(nx) = self.nx {
            grid.nx = nx;
        }
        if let Some(nt) = self.nt {
            grid.nt = nt;
        }
        grid.theta = self.theta;
        grid
    }
}

/// Engine together with its numerical settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EngineConfig {
    ClosedSmooth(QuadratureSpec),
    ClosedNonsmooth(QuadratureSpec),
    DensityOracle(QuadratureSpec),
    MonteCarlo(McSettings),
    Pde(PdeSettings),
}

impl EngineConfig {
    pub fn engine(&self) -> Engine {
        match self {
            EngineConfig::ClosedSmooth(_) => Engine::ClosedSmooth,
            EngineConfig::ClosedNonsmooth(_) => Engine::ClosedNonsmooth,
            EngineConfig::DensityOracle(_) => Engine::DensityOracle,
            EngineConfig::MonteCarlo(_) => Engine::MonteCarlo,
            EngineConfig::Pde(_) => Engine::Pde,
        }
    }

    pub fn from_parts(engine: Engine, quad: QuadratureSpec, mc: McSettings, pde: PdeSettings) -> Self {
        match engine {
            Engine::ClosedSmooth => EngineConfig::ClosedSmooth(quad),
            Engine::ClosedNonsmooth => EngineConfig::ClosedNonsmooth(quad),
            Engine::DensityOracle => EngineConfig::DensityOracle(quad),
            Engine::MonteCarlo => EngineConfig::MonteCarlo(mc),
            Engine::Pde => EngineConfig::Pde(pde),
        }
    }
}

/// `u` on a `t_grid x x_grid` lattice, stored row-major in `t` then `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    t_grid: Vec<f64>,
    x_grid: Vec<f64>,
    values: Vec<f64>,
    std_errors: Option<Vec<f64>>,
    engine: Engine,
    problem: Problem,
    datum: InitialDatum,
}

impl Field {
    pub fn new(
        t_grid: Vec<f64>,
        x_grid: Vec<f64>,
        values: Vec<f64>,
        engine: Engine,
        problem: Problem,
        datum: InitialDatum,
    ) -> Result<Self> {
        if values.len() != t_grid.len() * x_grid.len() {
            return Err(Error::InvalidGrid(format!(
                "{} values for a {}x{} grid",
                values.len(),
                t_grid.len(),
                x_grid.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::InvalidGrid(format!("non-finite field value {v}")));
        }
        Ok(Self {
            t_grid,
            x_grid,
            values,
            std_errors: None,
            engine,
            problem,
            datum,
        })
    }

    pub fn with_std_errors(mut self, std_errors: Vec<f64>) -> Result<Self> {
        if std_errors.len() != self.values.len() {
            return Err(Error::InvalidGrid("standard errors do not match the grid".into()));
        }
        self.std_errors = Some(std_errors);
        Ok(self)
    }

    pub fn t_grid(&self) -> &[f64] {
        &self.t_grid
    }

    pub fn x_grid(&self) -> &[f64] {
        &self.x_grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn std_errors(&self) -> Option<&[f64]> {
        self.std_errors.as_deref()
    }

    pub fn engine(&self) -> Engine {
        self.engine
    }

    pub fn problem(&self) -> &Problem {
        &self.problem
    }

    pub fn datum(&self) -> &InitialDatum {
        &self.datum
    }

    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.x_grid.len() + j]
    }

    /// Smallest value and its `(t, x)` location.
    pub fn min(&self) -> (f64, f64, f64) {
        let (k, &v) = self
            .values
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .expect("field is never empty");
        let nx = self.x_grid.len();
        (v, self.t_grid[k / nx], self.x_grid[k % nx])
    }

    /// CSV with header `t,x,u` (plus `stderr` for Monte Carlo), one row per
    /// grid point in `t`-major order, 17 significant digits.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        if self.std_errors.is_some() {
            w.write_record(["t", "x", "u", "stderr"])?;
        } else {
            w.write_record(["t", "x", "u"])?;
        }
        let nx = self.x_grid.len();
        for (k, &u) in self.values.iter().enumerate() {
            let t = sig17(self.t_grid[k / nx]);
            let x = sig17(self.x_grid[k % nx]);
            match &self.std_errors {
                Some(se) => w.write_record([t, x, sig17(u), sig17(se[k])])?,
                None => w.write_record([t, x, sig17(u)])?,
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_json(&self) -> serde_json::Value {
        let nx = self.x_grid.len();
        let rows: Vec<&[f64]> = self.values.chunks(nx).collect();
        let mut v = json!({
            "engine": self.engine,
            "mu": self.problem.mu(),
            "nu": self.problem.nu(),
            "f": self.datum.to_string(),
            "t_grid": self.t_grid,
            "x_grid": self.x_grid,
            "values": rows,
        });
        if let Some(se) = &self.std_errors {
            let se_rows: Vec<&[f64]> = se.chunks(nx).collect();
            v["std_errors"] = json!(se_rows);
        }
        v
    }
}

/// A number with 17 significant digits, enough to round-trip an `f64`.
pub fn sig17(v: f64) -> String {
    format!("{v:.16e}")
}

fn check_grid(name: &str, grid: &[f64], strictly_positive: bool) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::InvalidGrid(format!("{name} is empty")));
    }
    if grid.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidGrid(format!("{name} holds a non-finite value")));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidGrid(format!("{name} must be strictly increasing")));
    }
    let first = grid[0];
    if (strictly_positive && first <= 0.0) || first < 0.0 {
        return Err(Error::InvalidGrid(format!("{name} starts at {first}")));
    }
    Ok(())
}

/// Fills a field with the selected engine. Grid points are evaluated in
/// parallel; every engine gives the same result for any thread count.
/// Monte Carlo points share the seed (common random numbers).
pub fn eval_field(
    p: &Problem,
    d: &InitialDatum,
    t_grid: &[f64],
    x_grid: &[f64],
    config: &EngineConfig,
) -> Result<Field> {
    check_grid("t grid", t_grid, true)?;
    check_grid("x grid", x_grid, false)?;
    let points: Vec<(f64, f64)> = t_grid
        .iter()
        .flat_map(|&t| x_grid.iter().map(move |&x| (t, x)))
        .collect();
    let engine = config.engine();
    let pointwise = |eval: &(dyn Fn(f64, f64) -> Result<f64> + Sync)| -> Result<Vec<f64>> {
        points.par_iter().map(|&(t, x)| eval(t, x)).collect()
    };
    match *config {
        EngineConfig::ClosedSmooth(spec) => {
            let values = pointwise(&|t, x| eval_u_smooth(p, d, t, x, &spec))?;
            Field::new(t_grid.to_vec(), x_grid.to_vec(), values, engine, *p, d.clone())
        }
        EngineConfig::ClosedNonsmooth(spec) => {
            let values = pointwise(&|t, x| eval_u_nonsmooth(p, d, t, x, &spec))?;
            Field::new(t_grid.to_vec(), x_grid.to_vec(), values, engine, *p, d.clone())
        }
        EngineConfig::DensityOracle(spec) => {
            let values = pointwise(&|t, x| eval_u_density_oracle(p, d, t, x, &spec))?;
            Field::new(t_grid.to_vec(), x_grid.to_vec(), values, engine, *p, d.clone())
        }
        EngineConfig::MonteCarlo(mc) => {
            // each estimate is already parallel over sample blocks
            let estimates = points
                .iter()
                .map(|&(t, x)| estimate_u(p, d, t, x, mc.n, mc.seed))
                .collect::<Result<Vec<_>>>()?;
            let values = estimates.iter().map(|e| e.mean).collect();
            let errors = estimates.iter().map(|e| e.std_error).collect();
            Field::new(t_grid.to_vec(), x_grid.to_vec(), values, engine, *p, d.clone())?.with_std_errors(errors)
        }
        EngineConfig::Pde(settings) => {
            let t_end = *t_grid.last().expect("checked non-empty");
            let grid = settings.grid_for(p, d, t_end);
            solve_pde_on(p, d, &grid, t_grid, x_grid)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn setup() -> (Problem, InitialDatum) {
        (
            Problem::new(1.0, -0.5).unwrap(),
            InitialDatum::gaussian_bump(2.5, 1.0).unwrap(),
        )
    }

    #[test]
    fn single_point_field_matches_pointwise() {
        let (p, d) = setup();
        let spec = QuadratureSpec::default();
        let f = eval_field(&p, &d, &[1.0], &[0.0], &EngineConfig::ClosedSmooth(spec)).unwrap();
        assert_eq!(f.value(0, 0), eval_u_smooth(&p, &d, 1.0, 0.0, &spec).unwrap());
        let g = eval_field(&p, &d, &[1.0], &[0.0], &EngineConfig::ClosedNonsmooth(spec)).unwrap();
        assert_eq!(g.value(0, 0), eval_u_nonsmooth(&p, &d, 1.0, 0.0, &spec).unwrap());
    }

    #[test]
    fn grid_checks() {
        let (p, d) = setup();
        let cfg = EngineConfig::ClosedSmooth(QuadratureSpec::default());
        assert!(eval_field(&p, &d, &[], &[0.0], &cfg).is_err());
        assert!(eval_field(&p, &d, &[0.0], &[0.0], &cfg).is_err());
        assert!(eval_field(&p, &d, &[1.0, 0.5], &[0.0], &cfg).is_err());
        assert!(eval_field(&p, &d, &[1.0], &[-1.0], &cfg).is_err());
    }

    #[test]
    fn csv_layout() {
        let (p, d) = setup();
        let f = Field::new(
            vec![0.5, 1.0],
            vec![0.0, 2.0],
            vec![1.0, -0.25, 0.1, 3.0],
            Engine::Pde,
            p,
            d,
        )
        .unwrap();
        let mut buf = Vec::new();
        f.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "t,x,u");
        assert_eq!(lines.len(), 5);
        assert_eq!(
            lines[2],
            "5.0000000000000000e-1,2.0000000000000000e0,-2.5000000000000000e-1"
        );
        let back: f64 = lines[4].split(',').nth(2).unwrap().parse().unwrap();
        assert_eq!(back, 3.0);
    }

    #[test]
    fn seventeen_digits_round_trip() {
        for v in [0.1, 1.0 / 3.0, -std::f64::consts::E, 1e-300, 6.02214076e23] {
            assert_eq!(sig17(v).parse::<f64>().unwrap().to_bits(), v.to_bits());
        }
    }

    #[test]
    fn min_locates_the_argmin() {
        let (p, d) = setup();
        let f = Field::new(
            vec![0.5, 1.0],
            vec![0.0, 2.0],
            vec![1.0, -0.25, 0.1, 3.0],
            Engine::Pde,
            p,
            d,
        )
        .unwrap();
        assert_eq!(f.min(), (-0.25, 0.5, 2.0));
    }

    #[test]
    fn engine_names_parse() {
        for e in [
            Engine::ClosedSmooth,
            Engine::ClosedNonsmooth,
            Engine::MonteCarlo,
            Engine::Pde,
            Engine::DensityOracle,
        ] {
            assert_eq!(e.cli_name().parse::<Engine>().unwrap(), e);
        }
        assert!("spectral".parse::<Engine>().is_err());
    }

    #[test]
    fn rejects_non_finite_values() {
        let (p, d) = setup();
        assert!(Field::new(vec![1.0], vec![0.0], vec![f64::NAN], Engine::Pde, p, d).is_err());
    }
}
