//! Finite-difference solver for the half-line problem, used as an oracle
//! independent of the kernels and of the probabilistic representation.
//!
//! Nodes `x_j = j dx`, `j = 0..=nx`, with `u_nx = 0`. Interior rows use
//! central differences; the boundary row is the condition itself read as an
//! evolution equation for `u_0`:
//!
//! ```text
//! du_0/dt = nu (-3 u_0 + 4 u_1 - u_2) / (2 dx)
//! ```
//!
//! Time stepping is the theta scheme `(I - theta dt L) u' = (I + (1-theta) dt L) u`.
//! Row 0 of the implicit matrix touches `u_2`; that entry is removed by
//! subtracting a multiple of row 1 before the tridiagonal sweep.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Engine, Field};
use crate::initialdata::InitialDatum;
use crate::kernels::Problem;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PdeGrid {
    pub x_max: f64,
    pub nx: usize,
    pub t_end: f64,
    pub nt: usize,
    pub theta: f64,
}

impl PdeGrid {
    /// Smallest admissible truncation point for the problem and datum.
    pub fn min_x_max(p: &Problem, d: &InitialDatum, t_end: f64) -> f64 {
        d.cutoff() + p.mu().abs() * t_end + 12.0 * t_end.sqrt()
    }

    /// Grid with spacing `dx` and step `dt`, truncated at the smallest
    /// admissible `x_max` rounded up to a whole number of cells.
    pub fn with_steps(p: &Problem, d: &InitialDatum, t_end: f64, dx: f64, dt: f64) -> Self {
        let nx = (Self::min_x_max(p, d, t_end) / dx).ceil().max(16.0) as usize;
        let nt = (t_end / dt).round().max(1.0) as usize;
        Self {
            x_max: nx as f64 * dx,
            nx,
            t_end,
            nt,
            theta: 0.5,
        }
    }

    pub fn dx(&self) -> f64 {
        self.x_max / self.nx as f64
    }

    pub fn dt(&self) -> f64 {
        self.t_end / self.nt as f64
    }

    pub fn validate(&self, p: &Problem, d: &InitialDatum) -> Result<()> {
        if self.nx < 16 {
            return Err(Error::InvalidGrid(format!("nx = {} must be at least 16", self.nx)));
        }
        if self.nt < 1 {
            return Err(Error::InvalidGrid("nt must be at least 1".into()));
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return Err(Error::InvalidGrid(format!("t_end = {} must be positive", self.t_end)));
        }
        if !(0.0..=1.0).contains(&self.theta) {
            return Err(Error::InvalidGrid(format!("theta = {} must lie in [0, 1]", self.theta)));
        }
        let need = Self::min_x_max(p, d, self.t_end);
        if self.x_max.is_nan() || self.x_max < need {
            return Err(Error::InvalidGrid(format!(
                "x_max = {} is below the truncation bound {need:.6}",
                self.x_max
            )));
        }
        if self.theta < 0.5 {
            let dx = self.dx();
            let bound = dx * dx / (1.0 + p.mu().abs() * dx);
            if self.dt() > bound {
                return Err(Error::StabilityViolation { dt: self.dt(), bound });
            }
        }
        Ok(())
    }

    pub fn nodes(&self) -> Vec<f64> {
        let dx = self.dx();
        (0..=self.nx).map(|j| j as f64 * dx).collect()
    }
}

/// Spatial operator on the unknowns `u_0..u_{nx-1}`.
struct Operator {
    n: usize,
    /// boundary row coefficients on `u_0, u_1, u_2`
    edge: [f64; 3],
    lower: f64,
    diag: f64,
    upper: f64,
}

impl Operator {
    fn new(p: &Problem, grid: &PdeGrid) -> Self {
        let dx = grid.dx();
        let nu = p.nu();
        let mu = p.mu();
        Self {
            n: grid.nx,
            edge: [-3.0 * nu / (2.0 * dx), 4.0 * nu / (2.0 * dx), -nu / (2.0 * dx)],
            lower: 0.5 / (dx * dx) - mu / (2.0 * dx),
            diag: -1.0 / (dx * dx),
            upper: 0.5 / (dx * dx) + mu / (2.0 * dx),
        }
    }

    /// `out = u + scale * L u`.
    fn apply(&self, u: &[f64], scale: f64, out: &mut [f64]) {
        let n = self.n;
        out[0] = u[0] + scale * (self.edge[0] * u[0] + self.edge[1] * u[1] + self.edge[2] * u[2]);
        for j in 1..n {
            let right = if j + 1 < n { u[j + 1] } else { 0.0 };
            out[j] = u[j] + scale * (self.lower * u[j - 1] + self.diag * u[j] + self.upper * right);
        }
    }
}

/// Thomas factorization of `I - scale * L` after the row-0 pre-reduction.
struct Factorized {
    /// modified super-diagonal
    c: Vec<f64>,
    /// pivots
    m: Vec<f64>,
    /// sub-diagonal (constant below row 0)
    a: f64,
    /// multiple of row 1 subtracted from row 0
    row0_factor: f64,
}

impl Factorized {
    fn new(op: &Operator, scale: f64) -> Result<Self> {
        let n = op.n;
        let a = -scale * op.lower;
        let b = 1.0 - scale * op.diag;
        let c_int = -scale * op.upper;

        let mut r0 = [1.0 - scale * op.edge[0], -scale * op.edge[1], -scale * op.edge[2]];
        let row0_factor = if r0[2] == 0.0 {
            0.0
        } else if c_int == 0.0 {
            return Err(Error::SingularSystem(0));
        } else {
            r0[2] / c_int
        };
        r0[0] -= row0_factor * a;
        r0[1] -= row0_factor * b;

        let mut c = vec![0.0; n];
        let mut m = vec![0.0; n];
        m[0] = r0[0];
        if m[0].abs() < f64::MIN_POSITIVE {
            return Err(Error::SingularSystem(0));
        }
        c[0] = r0[1] / m[0];
        for j in 1..n {
            m[j] = b - a * c[j - 1];
            if m[j].abs() < f64::MIN_POSITIVE {
                return Err(Error::SingularSystem(j));
            }
            c[j] = if j + 1 < n { c_int / m[j] } else { 0.0 };
        }
        Ok(Self { c, m, a, row0_factor })
    }

    /// Solves in place; `rhs` is the unreduced right-hand side.
    fn solve(&self, rhs: &mut [f64]) {
        let n = rhs.len();
        rhs[0] -= self.row0_factor * rhs[1];
        rhs[0] /= self.m[0];
        for j in 1..n {
            rhs[j] = (rhs[j] - self.a * rhs[j - 1]) / self.m[j];
        }
        for j in (0..n - 1).rev() {
            rhs[j] -= self.c[j] * rhs[j + 1];
        }
    }
}

struct Stepper {
    op: Operator,
    theta: f64,
}

impl Stepper {
    fn step(&self, fact: &Factorized, dt: f64, u: &[f64], out: &mut [f64]) {
        self.op.apply(u, (1.0 - self.theta) * dt, out);
        fact.solve(out);
    }

    fn factor(&self, dt: f64) -> Result<Factorized> {
        Factorized::new(&self.op, self.theta * dt)
    }
}

fn initial_profile(d: &InitialDatum, grid: &PdeGrid) -> Vec<f64> {
    let dx = grid.dx();
    (0..grid.nx).map(|j| d.f(j as f64 * dx)).collect()
}

/// Marches to `grid.t_end` and returns the final profile on all nodes
/// (including `u(x_max) = 0`) as a one-row field.
pub fn solve_pde(p: &Problem, d: &InitialDatum, grid: &PdeGrid) -> Result<Field> {
    grid.validate(p, d)?;
    let mut snaps = march(p, d, grid, &[grid.t_end])?;
    let mut values = snaps.pop().expect("one snapshot");
    values.push(0.0);
    Field::new(vec![grid.t_end], grid.nodes(), values, Engine::Pde, *p, d.clone())
}

/// Solution sampled at arbitrary `(t, x)` with `0 < t <= t_end` and
/// `0 <= x <= x_max`. Times between steps get a partial step from the
/// preceding level; positions are interpolated by four-point Lagrange.
pub fn solve_pde_on(p: &Problem, d: &InitialDatum, grid: &PdeGrid, t_grid: &[f64], x_grid: &[f64]) -> Result<Field> {
    grid.validate(p, d)?;
    if let Some(&x) = x_grid.iter().find(|&&x| x > grid.x_max) {
        return Err(Error::InvalidGrid(format!(
            "x = {x} lies beyond x_max = {}",
            grid.x_max
        )));
    }
    if let Some(&t) = t_grid.iter().find(|&&t| t > grid.t_end * (1.0 + 1e-12)) {
        return Err(Error::InvalidGrid(format!(
            "t = {t} lies beyond t_end = {}",
            grid.t_end
        )));
    }
    let snaps = march(p, d, grid, t_grid)?;
    let mut values = Vec::with_capacity(t_grid.len() * x_grid.len());
    for profile in &snaps {
        values.extend(x_grid.iter().map(|&x| interpolate(profile, grid.dx(), x)));
    }
    Field::new(t_grid.to_vec(), x_grid.to_vec(), values, Engine::Pde, *p, d.clone())
}

/// Profiles `u_0..u_{nx-1}` at each requested time (ascending).
fn march(p: &Problem, d: &InitialDatum, grid: &PdeGrid, times: &[f64]) -> Result<Vec<Vec<f64>>> {
    if times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidGrid("times must be strictly increasing".into()));
    }
    if times.first().is_some_and(|&t| t <= 0.0) {
        return Err(Error::InvalidGrid("times must be positive".into()));
    }
    let stepper = Stepper {
        op: Operator::new(p, grid),
        theta: grid.theta,
    };
    let dt = grid.dt();
    let fact = stepper.factor(dt)?;
    let mut u = initial_profile(d, grid);
    let mut next = vec![0.0; u.len()];
    let mut snaps = Vec::with_capacity(times.len());
    let mut pending = times.iter().copied().peekable();
    let tol = 1e-9 * dt;

    for k in 0..grid.nt {
        let t0 = k as f64 * dt;
        let t1 = (k + 1) as f64 * dt;
        while let Some(&target) = pending.peek() {
            if target >= t1 - tol {
                break;
            }
            let partial = target - t0;
            if partial <= tol {
                snaps.push(u.clone());
            } else {
                let mut tmp = vec![0.0; u.len()];
                stepper.step(&stepper.factor(partial)?, partial, &u, &mut tmp);
                snaps.push(tmp);
            }
            pending.next();
        }
        if pending.peek().is_none() {
            break;
        }
        stepper.step(&fact, dt, &u, &mut next);
        std::mem::swap(&mut u, &mut next);
        while pending.peek().is_some_and(|&target| (target - t1).abs() <= tol) {
            snaps.push(u.clone());
            pending.next();
        }
    }
    if pending.peek().is_some() {
        snaps.push(u.clone());
    }
    Ok(snaps)
}

/// Four-point Lagrange interpolation; `profile` excludes the zero at `x_max`.
fn interpolate(profile: &[f64], dx: f64, x: f64) -> f64 {
    let n = profile.len();
    let at = |j: usize| if j < n { profile[j] } else { 0.0 };
    let pos = x / dx;
    let j = pos.floor() as usize;
    if (pos - j as f64).abs() < 1e-12 {
        return at(j);
    }
    let base = j.saturating_sub(1).min(n.saturating_sub(3));
    let nodes = [base, base + 1, base + 2, base + 3];
    let mut sum = 0.0;
    for (i, &ni) in nodes.iter().enumerate() {
        let mut w = 1.0;
        for (k, &nk) in nodes.iter().enumerate() {
            if k != i {
                w *= (pos - nk as f64) / (ni as f64 - nk as f64);
            }
        }
        sum += w * at(ni);
    }
    sum
}
