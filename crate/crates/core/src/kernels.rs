//! Closed-form kernels of the half-line problem
//!
//! ```text
//! u_t = mu u_x + u_xx / 2     (t > 0, x >= 0)
//! u(0, x) = f(x)
//! u_t(t, 0) = nu u_x(t, 0)
//! ```
//!
//! `G` is the transition density of reflecting Brownian motion with drift
//! `mu`; `H` carries the local-time weighting that produces the boundary
//! condition. With `A = (x+y+mu t)/sqrt t`, `B = (x-y+mu t)/sqrt t` and
//! `C = (x+y+(2nu-mu)t)/sqrt t`:
//!
//! ```text
//! G = [e^{2 mu y} phi(A) + phi(B)] / sqrt t - 2 mu e^{2 mu y} Psi(A)
//! H = e^{2 mu y} [(2nu-mu) e^{2(nu-mu)(x+y+nu t)} Psi(C) - mu Psi(A)] / (nu-mu)
//! ```
//!
//! and `u = int f G dy - int f' H dy`. Products of exponentials with
//! Gaussian factors never form the exponential on its own: `e^{2 mu y} phi(A)`
//! equals `phi(B) e^{-2xy/t}` exactly, and every `e^a Psi(z)` goes through
//! [`exp_psi`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::specialfn::{exp_phi, exp_psi, phi, psi, SQRT_2_OVER_PI};

/// Below `NU_EQ_MU_THRESHOLD * max(1, |mu|)` the `nu = mu` closed forms are
/// used in place of the `1/(nu - mu)` ones.
pub const NU_EQ_MU_THRESHOLD: f64 = 1e-9;

/// Coefficients `(mu, nu)` of the drift and of the boundary condition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Problem {
    mu: f64,
    nu: f64,
}

impl Problem {
    pub fn new(mu: f64, nu: f64) -> Result<Self> {
        if !mu.is_finite() || !nu.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "mu and nu must be finite (got mu = {mu}, nu = {nu})"
            )));
        }
        Ok(Self { mu, nu })
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    /// Elastic coefficient of the derivative problem, `2 (nu - mu)`.
    pub fn lambda(&self) -> f64 {
        2.0 * (self.nu - self.mu)
    }

    /// Whether the `nu = mu` branch of the kernels applies.
    pub fn is_reflecting(&self) -> bool {
        (self.nu - self.mu).abs() < NU_EQ_MU_THRESHOLD * self.mu.abs().max(1.0)
    }
}

/// Kernel arguments `(t; x, y)` with `t > 0` and `x, y >= 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelPoint {
    pub t: f64,
    pub x: f64,
    pub y: f64,
}

impl KernelPoint {
    pub fn new(t: f64, x: f64, y: f64) -> Result<Self> {
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::InvalidPoint(format!("t = {t} must be positive")));
        }
        if !(x >= 0.0 && x.is_finite()) {
            return Err(Error::InvalidPoint(format!("x = {x} must be >= 0")));
        }
        if !(y >= 0.0 && y.is_finite()) {
            return Err(Error::InvalidPoint(format!("y = {y} must be >= 0")));
        }
        Ok(Self { t, x, y })
    }
}

/// Quantities shared by all kernels at one point.
struct Args {
    sqrt_t: f64,
    b: f64,
    /// `e^{2 mu y} phi(A)`, i.e. `phi(B) e^{-2xy/t}`.
    image_phi: f64,
    /// `e^{2 mu y} Psi(A)`.
    image_psi: f64,
}

impl Args {
    #[inline]
    fn new(p: &Problem, t: f64, x: f64, y: f64) -> Self {
        let sqrt_t = t.sqrt();
        let a = (x + y + p.mu * t) / sqrt_t;
        let b = (x - y + p.mu * t) / sqrt_t;
        Self {
            sqrt_t,
            b,
            image_phi: exp_phi(-2.0 * x * y / t, b),
            image_psi: exp_psi(2.0 * p.mu * y, a),
        }
    }

    /// `e^{2 mu y} e^{2(nu-mu)(x+y+nu t)} Psi(C)`.
    #[inline]
    fn elastic_psi(&self, p: &Problem, t: f64, x: f64, y: f64) -> f64 {
        let c = (x + y + (2.0 * p.nu - p.mu) * t) / self.sqrt_t;
        exp_psi(2.0 * p.mu * y + 2.0 * (p.nu - p.mu) * (x + y + p.nu * t), c)
    }
}

#[inline]
pub(crate) fn g_raw(p: &Problem, t: f64, x: f64, y: f64) -> f64 {
    let k = Args::new(p, t, x, y);
    (k.image_phi + phi(k.b)) / k.sqrt_t - 2.0 * p.mu * k.image_psi
}

#[inline]
pub(crate) fn h_raw(p: &Problem, t: f64, x: f64, y: f64) -> f64 {
    let k = Args::new(p, t, x, y);
    let mu = p.mu;
    if p.is_reflecting() {
        2.0 * ((1.0 + mu * (x + y + mu * t)) * k.image_psi - mu * k.sqrt_t * k.image_phi)
    } else {
        let d = p.nu - p.mu;
        ((2.0 * p.nu - mu) * k.elastic_psi(p, t, x, y) - mu * k.image_psi) / d
    }
}

#[inline]
pub(crate) fn g_plus_hy_raw(p: &Problem, t: f64, x: f64, y: f64) -> f64 {
    let k = Args::new(p, t, x, y);
    let (mu, nu) = (p.mu, p.nu);
    if p.is_reflecting() {
        let bracket = (1.0 + 4.0 * mu * mu * t) * k.image_phi
            - 4.0 * mu * (1.0 + mu * (x + y) + mu * mu * t) * k.sqrt_t * k.image_psi;
        (phi(k.b) - bracket) / k.sqrt_t
    } else {
        let d = nu - mu;
        (phi(k.b) - k.image_phi) / k.sqrt_t
            - 2.0 * nu / d * (mu * k.image_psi + (mu - 2.0 * nu) * k.elastic_psi(p, t, x, y))
    }
}

#[inline]
pub(crate) fn h0_raw(p: &Problem, t: f64, x: f64) -> f64 {
    let (mu, nu) = (p.mu, p.nu);
    let sqrt_t = t.sqrt();
    let a = (x + mu * t) / sqrt_t;
    if p.is_reflecting() {
        2.0 * ((1.0 + mu * (x + mu * t)) * psi(a) - mu * sqrt_t * phi(a))
    } else {
        let d = nu - mu;
        let c = (x + (2.0 * nu - mu) * t) / sqrt_t;
        ((2.0 * nu - mu) * exp_psi(2.0 * d * (x + nu * t), c) - mu * psi(a)) / d
    }
}

#[inline]
pub(crate) fn density_raw(p: &Problem, t: f64, b: f64, s: f64) -> f64 {
    if s < 0.0 || b > s {
        return 0.0;
    }
    let w = 2.0 * s - b;
    SQRT_2_OVER_PI / (t * t.sqrt()) * w * (-w * w / (2.0 * t) - p.mu * (b + 0.5 * p.mu * t)).exp()
}

/// `int_0^l e^{-lambda r} dr`, the local-time weight multiplying `f'`.
///
/// Uses `expm1` so that small `|lambda l|` keeps full precision.
#[inline]
pub fn creation_integral(lambda: f64, l: f64) -> f64 {
    if lambda == 0.0 {
        l
    } else {
        -(-lambda * l).exp_m1() / lambda
    }
}

/// Transition density `G(t; x, y)` of reflecting Brownian motion with drift `mu`.
pub fn kernel_g(p: &Problem, pt: KernelPoint) -> f64 {
    g_raw(p, pt.t, pt.x, pt.y)
}

/// Local-time kernel `H(t; x, y)`.
pub fn kernel_h(p: &Problem, pt: KernelPoint) -> f64 {
    h_raw(p, pt.t, pt.x, pt.y)
}

/// `(G + dH/dy)(t; x, y)`, the kernel acting on `f` once `f'` has been
/// integrated away by parts.
pub fn kernel_g_plus_hy(p: &Problem, pt: KernelPoint) -> f64 {
    g_plus_hy_raw(p, pt.t, pt.x, pt.y)
}

/// `H(t; x, 0)`, the weight of the boundary value `f(0)`.
pub fn kernel_h0(p: &Problem, t: f64, x: f64) -> Result<f64> {
    let pt = KernelPoint::new(t, x, 0.0)?;
    Ok(h0_raw(p, pt.t, pt.x))
}

/// Joint density of `(B_t - mu t, max_{r <= t} (B_r - mu r))` at `(b, s)`.
///
/// Zero off the support `{s >= 0, b <= s}`.
pub fn joint_density_g(p: &Problem, t: f64, b: f64, s: f64) -> Result<f64> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::InvalidPoint(format!("t = {t} must be positive")));
    }
    Ok(density_raw(p, t, b, s))
}
