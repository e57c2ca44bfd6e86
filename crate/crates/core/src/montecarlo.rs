//! Exact Monte Carlo for the reflecting-Brownian-motion representations.
//!
//! Only the terminal pair `(b, s) = (B_t - mu t, max_{r <= t} (B_r - mu r))`
//! is needed: the reflected path started at `x` and its local time at zero
//! are `X_t = max(x, s) - b` and `l_t = max(x, s) - x`. The pair is drawn
//! exactly. `b` is Gaussian with mean `-mu t` and variance `t`; given `b`,
//! the maximum is a Brownian-bridge functional that does not depend on the
//! drift, with `P(S >= s | b) = exp(-2 s (s - b) / t)` for `s >= max(b, 0)`,
//! inverted in closed form.
//!
//! Randomness comes from ChaCha8 with one stream per block of
//! [`BLOCK_SIZE`] samples, all keyed by the same seed, so the estimate does
//! not depend on how blocks are scheduled across threads.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::initialdata::InitialDatum;
use crate::kernels::{creation_integral, Problem};

/// Samples per RNG stream.
pub const BLOCK_SIZE: u64 = 1 << 16;

/// One exact draw of the drifted endpoint and its running maximum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaxEndpointSample {
    pub b: f64,
    pub s: f64,
}

/// Reflected position and local time at zero for a path started at `x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathFunctionals {
    pub position: f64,
    pub local_time: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub n_samples: u64,
    pub seed: u64,
}

/// Running maximum given the endpoint `b` and a uniform `u` in `(0, 1]`.
#[inline]
pub fn max_given_endpoint(b: f64, t: f64, u: f64) -> f64 {
    0.5 * (b + (b * b - 2.0 * t * u.ln()).sqrt())
}

pub fn sample_max_endpoint<R: Rng + ?Sized>(p: &Problem, t: f64, rng: &mut R) -> MaxEndpointSample {
    let z: f64 = rng.sample(StandardNormal);
    let b = -p.mu() * t + t.sqrt() * z;
    let u = 1.0 - rng.random::<f64>();
    MaxEndpointSample {
        b,
        s: max_given_endpoint(b, t, u),
    }
}

#[inline]
pub fn path_functionals(x: f64, smp: MaxEndpointSample) -> PathFunctionals {
    let top = x.max(smp.s);
    PathFunctionals {
        position: top - smp.b,
        local_time: top - x,
    }
}

/// RNG for block `block` of the run keyed by `seed`.
pub fn block_rng(seed: u64, block: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(block);
    rng
}

/// `n` draws in the same order the estimators consume them.
pub fn draw_samples(p: &Problem, t: f64, n: u64, seed: u64) -> Vec<MaxEndpointSample> {
    let blocks = n.div_ceil(BLOCK_SIZE);
    (0..blocks)
        .into_par_iter()
        .flat_map_iter(|block| {
            let mut rng = block_rng(seed, block);
            let len = BLOCK_SIZE.min(n - block * BLOCK_SIZE);
            (0..len)
                .map(|_| sample_max_endpoint(p, t, &mut rng))
                .collect::<Vec<_>>()
        })
        .collect()
}

/// Welford accumulator, merged with Chan's pairwise update.
#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    count: u64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, v: f64) {
        self.count += 1;
        let delta = v - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (v - self.mean);
    }

    fn merge(self, other: Self) -> Self {
        if self.count == 0 {
            return other;
        }
        if other.count == 0 {
            return self;
        }
        let count = self.count + other.count;
        let delta = other.mean - self.mean;
        let mean = self.mean + delta * other.count as f64 / count as f64;
        let m2 = self.m2 + other.m2 + delta * delta * (self.count as f64 * other.count as f64) / count as f64;
        Self { count, mean, m2 }
    }
}

fn check(t: f64, x: f64, n: u64) -> Result<()> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::InvalidPoint(format!("t = {t} must be positive")));
    }
    if !(x >= 0.0 && x.is_finite()) {
        return Err(Error::InvalidPoint(format!("x = {x} must be >= 0")));
    }
    if n < 2 {
        return Err(Error::InvalidArgument(format!("need at least two samples, got {n}")));
    }
    Ok(())
}

/// Mean of `payoff(X_t, l_t)` over `n` exact draws.
pub fn estimate_functional<F>(p: &Problem, t: f64, x: f64, n: u64, seed: u64, payoff: F) -> Result<McEstimate>
where
    F: Fn(PathFunctionals) -> f64 + Sync,
{
    check(t, x, n)?;
    let blocks = n.div_ceil(BLOCK_SIZE);
    let partial: Vec<Moments> = (0..blocks)
        .into_par_iter()
        .map(|block| {
            let mut rng = block_rng(seed, block);
            let len = BLOCK_SIZE.min(n - block * BLOCK_SIZE);
            let mut m = Moments::default();
            for _ in 0..len {
                let smp = sample_max_endpoint(p, t, &mut rng);
                m.push(payoff(path_functionals(x, smp)));
            }
            m
        })
        .collect();
    let total = partial.into_iter().fold(Moments::default(), Moments::merge);
    let variance = total.m2 / (total.count - 1) as f64;
    Ok(McEstimate {
        mean: total.mean,
        std_error: (variance / total.count as f64).sqrt(),
        n_samples: total.count,
        seed,
    })
}

/// `u(t, x) = E[f(X_t) - f'(X_t) int_0^{l_t} e^{-lambda r} dr]`.
pub fn estimate_u(p: &Problem, d: &InitialDatum, t: f64, x: f64, n: u64, seed: u64) -> Result<McEstimate> {
    if !d.is_smooth() {
        return Err(Error::NotSmooth);
    }
    let lambda = p.lambda();
    estimate_functional(p, t, x, n, seed, |pf| {
        d.f(pf.position) - d.fprime(pf.position) * creation_integral(lambda, pf.local_time)
    })
}

/// `u_x(t, x) = E[e^{-lambda l_t} f'(X_t)]`, the elastic representation of
/// the derivative.
pub fn estimate_v(p: &Problem, d: &InitialDatum, t: f64, x: f64, n: u64, seed: u64) -> Result<McEstimate> {
    if !d.is_smooth() {
        return Err(Error::NotSmooth);
    }
    let lambda = p.lambda();
    estimate_functional(p, t, x, n, seed, |pf| {
        (-lambda * pf.local_time).exp() * d.fprime(pf.position)
    })
}
