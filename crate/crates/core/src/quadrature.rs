//! Adaptive Gauss-Kronrod integration and the closed-form evaluators of `u`.
//!
//! Three routes to the same `u(t, x)`:
//!
//! * [`eval_u_smooth`]: `int f G dy - int f' H dy`;
//! * [`eval_u_nonsmooth`]: `int f (G + H_y) dy + f(0) H(t; x, 0)`, which
//!   needs no derivative of `f`;
//! * [`eval_u_density_oracle`]: double integrals of the path functionals
//!   against the joint density of the drifted endpoint and its maximum.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::initialdata::InitialDatum;
use crate::kernels::{self, Problem};

/// Tolerances and truncation for the semi-infinite integrals.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuadratureSpec {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
    /// Standard deviations `sqrt(t)` added past the drifted peak when
    /// choosing the upper limit.
    pub tail_sigmas: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            abs_tol: 1e-9,
            rel_tol: 1e-9,
            max_subdivisions: 2000,
            tail_sigmas: 12.0,
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0 && self.rel_tol > 0.0) {
            return Err(Error::InvalidArgument("quadrature tolerances must be positive".into()));
        }
        if self.max_subdivisions == 0 {
            return Err(Error::InvalidArgument("max_subdivisions must be positive".into()));
        }
        if self.tail_sigmas.is_nan() || self.tail_sigmas < 12.0 {
            return Err(Error::InvalidArgument("tail_sigmas must be at least 12".into()));
        }
        Ok(())
    }

    /// Finite upper limit `Y = x + |mu| t + k sqrt(t) + cutoff(f)` for the
    /// `y` integrals; beyond it both the kernels and the datum are below
    /// Gaussian tails of `k` standard deviations.
    pub fn upper_limit(&self, p: &Problem, t: f64, x: f64, d: &InitialDatum) -> f64 {
        x + p.mu().abs() * t + self.tail_sigmas * t.sqrt() + d.cutoff()
    }

    fn tighter(&self, factor: f64) -> Self {
        Self {
            abs_tol: self.abs_tol * factor,
            rel_tol: self.rel_tol * factor,
            ..*self
        }
    }
}

// 21-point Kronrod extension of the 10-point Gauss rule (QUADPACK qk21).
#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_600_525_532_188,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];
// Gauss weights for the odd-indexed nodes XGK[1], XGK[3], ..., XGK[9].
#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gauss_kronrod<F: Fn(f64) -> f64>(h: &F, a: f64, b: f64) -> Segment {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = h(center);
    let mut kronrod = fc * WGK[10];
    let mut gauss = 0.0;
    let mut abs_sum = kronrod.abs();
    let mut fv = [0.0; 21];
    fv[10] = fc;
    for j in 0..10 {
        let dx = half * XGK[j];
        let f1 = h(center - dx);
        let f2 = h(center + dx);
        fv[j] = f1;
        fv[20 - j] = f2;
        kronrod += WGK[j] * (f1 + f2);
        abs_sum += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * kronrod;
    let mut asc = WGK[10] * (fc - mean).abs();
    for j in 0..10 {
        asc += WGK[j] * ((fv[j] - mean).abs() + (fv[20 - j] - mean).abs());
    }
    let value = kronrod * half;
    let res_abs = abs_sum * half.abs();
    let res_asc = asc * half.abs();
    let mut error = ((kronrod - gauss) * half).abs();
    if res_asc != 0.0 && error != 0.0 {
        error = res_asc * (200.0 * error / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        error = error.max(50.0 * f64::EPSILON * res_abs);
    }
    if !value.is_finite() {
        error = f64::INFINITY;
    }
    Segment { a, b, value, error }
}

/// Globally adaptive 21-point Gauss-Kronrod integration of `h` over `[a, b]`.
///
/// `breakpoints` inside `(a, b)` seed the initial partition. The segment with
/// the largest error estimate is bisected until the summed estimate is below
/// `max(abs_tol, rel_tol |I|)`.
pub fn integrate<F>(h: F, a: f64, b: f64, breakpoints: &[f64], spec: &QuadratureSpec) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    if b <= a {
        return Ok(0.0);
    }
    let mut cuts: Vec<f64> = breakpoints
        .iter()
        .copied()
        .filter(|&c| c > a && c < b && c.is_finite())
        .collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup_by(|x, y| (*x - *y).abs() <= 1e-12 * (b - a));

    let mut heap = BinaryHeap::new();
    let mut left = a;
    for c in cuts.into_iter().chain(std::iter::once(b)) {
        heap.push(gauss_kronrod(&h, left, c));
        left = c;
    }

    let mut subdivisions = heap.len();
    loop {
        let (total, error) = heap.iter().fold((0.0, 0.0), |(v, e), s| (v + s.value, e + s.error));
        let budget = spec.abs_tol.max(spec.rel_tol * total.abs());
        if error <= budget {
            return Ok(total);
        }
        let worst = heap.pop().expect("at least one segment");
        let mid = 0.5 * (worst.a + worst.b);
        let too_narrow = mid <= worst.a || mid >= worst.b;
        if subdivisions >= spec.max_subdivisions || too_narrow || !error.is_finite() {
            return Err(Error::NoConvergence {
                estimate: error,
                budget,
                subdivisions,
            });
        }
        heap.push(gauss_kronrod(&h, worst.a, mid));
        heap.push(gauss_kronrod(&h, mid, worst.b));
        subdivisions += 1;
    }
}

/// Integral over `[0, upper]` of an integrand with a Gaussian-dominated tail
/// beyond `upper`. The size of the integrand at `upper` stands in for the
/// neglected tail and must fit in the error budget.
pub fn integrate_semiinf<F>(h: F, upper: f64, breakpoints: &[f64], spec: &QuadratureSpec) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    let tail = h(upper).abs();
    let inner = spec.tighter(0.5);
    let value = integrate(h, 0.0, upper, breakpoints, &inner)?;
    let budget = spec.abs_tol.max(spec.rel_tol * value.abs());
    if tail > 0.5 * budget {
        return Err(Error::NoConvergence {
            estimate: tail,
            budget,
            subdivisions: 0,
        });
    }
    Ok(value)
}

/// The two parts `u = u1 - u2` of the smooth representation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmoothComponents {
    /// `E_x f(X_t) = int f G dy`.
    pub u1: f64,
    /// `E_x [f'(X_t) int_0^{l_t} e^{-lambda s} ds] = int f' H dy`.
    pub u2: f64,
}

impl SmoothComponents {
    pub fn u(&self) -> f64 {
        self.u1 - self.u2
    }
}

fn check_tx(t: f64, x: f64) -> Result<()> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::InvalidPoint(format!("t = {t} must be >= 0")));
    }
    if !(x >= 0.0 && x.is_finite()) {
        return Err(Error::InvalidPoint(format!("x = {x} must be >= 0")));
    }
    Ok(())
}

fn y_breakpoints(p: &Problem, d: &InitialDatum, t: f64, x: f64) -> Vec<f64> {
    let sd = t.sqrt();
    let mut pts = vec![x, x + p.mu() * t, p.mu() * t - x];
    for k in [2.0, 5.0, 8.0] {
        pts.push(x - k * sd);
        pts.push(x + k * sd);
    }
    pts.extend(d.features());
    pts
}

/// `u1` and `u2` at `(t, x)` for `t > 0`.
pub fn smooth_components(
    p: &Problem,
    d: &InitialDatum,
    t: f64,
    x: f64,
    spec: &QuadratureSpec,
) -> Result<SmoothComponents> {
    if !d.is_smooth() {
        return Err(Error::NotSmooth);
    }
    check_tx(t, x)?;
    if t == 0.0 {
        return Err(Error::InvalidPoint("components need t > 0".into()));
    }
    spec.validate()?;
    let upper = spec.upper_limit(p, t, x, d);
    let cuts = y_breakpoints(p, d, t, x);
    let u1 = integrate_semiinf(|y| d.f(y) * kernels::g_raw(p, t, x, y), upper, &cuts, spec)?;
    let u2 = integrate_semiinf(|y| d.fprime(y) * kernels::h_raw(p, t, x, y), upper, &cuts, spec)?;
    Ok(SmoothComponents { u1, u2 })
}

/// `u(t, x) = int f G dy - int f' H dy`, and `f(x)` at `t = 0`.
pub fn eval_u_smooth(p: &Problem, d: &InitialDatum, t: f64, x: f64, spec: &QuadratureSpec) -> Result<f64> {
    if !d.is_smooth() {
        return Err(Error::NotSmooth);
    }
    check_tx(t, x)?;
    if t == 0.0 {
        return Ok(d.f(x));
    }
    smooth_components(p, d, t, x, spec).map(|c| c.u())
}

/// `u(t, x) = int f (G + H_y) dy + f(0) H(t; x, 0)`; valid for merely
/// continuous `f`. Returns `f(x)` at `t = 0`.
pub fn eval_u_nonsmooth(p: &Problem, d: &InitialDatum, t: f64, x: f64, spec: &QuadratureSpec) -> Result<f64> {
    check_tx(t, x)?;
    if t == 0.0 {
        return Ok(d.f(x));
    }
    spec.validate()?;
    let upper = spec.upper_limit(p, t, x, d);
    let cuts = y_breakpoints(p, d, t, x);
    let bulk = integrate_semiinf(|y| d.f(y) * kernels::g_plus_hy_raw(p, t, x, y), upper, &cuts, spec)?;
    Ok(bulk + d.f(0.0) * kernels::h0_raw(p, t, x))
}

/// `u1` and `u2` by two-dimensional quadrature against the joint density of
/// `(B_t - mu t, S_t)`, using `X_t = max(x, s) - b` and `l_t = max(x, s) - x`.
pub fn density_oracle_components(
    p: &Problem,
    d: &InitialDatum,
    t: f64,
    x: f64,
    spec: &QuadratureSpec,
) -> Result<SmoothComponents> {
    if !d.is_smooth() {
        return Err(Error::NotSmooth);
    }
    check_tx(t, x)?;
    if t == 0.0 {
        return Err(Error::InvalidPoint("the density oracle needs t > 0".into()));
    }
    spec.validate()?;
    let sd = t.sqrt();
    let depth = spec.tail_sigmas * sd + p.mu().abs() * t;
    let s_max = p.mu().abs() * t + spec.tail_sigmas * sd;
    let lambda = p.lambda();
    let inner_spec = spec.tighter(1e-2);
    let outer_spec = spec.tighter(0.5);
    let features = d.features();

    // b-integral at fixed s; the datum argument is max(x, s) - b.
    let inner = |s: f64, weighted: bool| -> Result<f64> {
        let top = x.max(s);
        let cuts: Vec<f64> = features.iter().map(|c| top - c).collect();
        if weighted {
            let weight = kernels::creation_integral(lambda, top - x);
            let v = integrate(
                |b| d.fprime(top - b) * kernels::density_raw(p, t, b, s),
                s - depth,
                s,
                &cuts,
                &inner_spec,
            )?;
            Ok(weight * v)
        } else {
            integrate(
                |b| d.f(top - b) * kernels::density_raw(p, t, b, s),
                s - depth,
                s,
                &cuts,
                &inner_spec,
            )
        }
    };

    let outer = |weighted: bool, lo: f64| -> Result<f64> {
        let failure = std::cell::RefCell::new(None);
        let v = integrate(
            |s| match inner(s, weighted) {
                Ok(v) => v,
                Err(e) => {
                    failure.borrow_mut().get_or_insert(e);
                    0.0
                }
            },
            lo,
            s_max,
            &[x, -p.mu() * t],
            &outer_spec,
        );
        match failure.into_inner() {
            Some(e) => Err(e),
            None => v,
        }
    };

    let u1 = outer(false, 0.0)?;
    let u2 = if x >= s_max { 0.0 } else { outer(true, x)? };
    Ok(SmoothComponents { u1, u2 })
}

/// `u = u1 - u2` from the joint-density double integrals.
pub fn eval_u_density_oracle(p: &Problem, d: &InitialDatum, t: f64, x: f64, spec: &QuadratureSpec) -> Result<f64> {
    density_oracle_components(p, d, t, x, spec).map(|c| c.u())
}
