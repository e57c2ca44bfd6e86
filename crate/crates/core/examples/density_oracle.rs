//! Three closed-form routes to the same solution: the kernel formula for
//! smooth data, the integrated-by-parts formula for continuous data, and
//! direct two-dimensional quadrature against the joint density of endpoint
//! and maximum.
//!
//! ```text
//! cargo run --release --example density_oracle
//! ```

use std::time::Instant;

use swlab::quadrature::{density_oracle_components, eval_u_nonsmooth, smooth_components};
use swlab::{InitialDatum, Problem, QuadratureSpec};

fn main() -> swlab::Result<()> {
    let d = InitialDatum::gaussian_bump(2.5, 1.0)?;
    let spec = QuadratureSpec::default();
    println!(
        "{:>5} {:>5} {:>4} {:>4} {:>14} {:>10} {:>10} {:>10}",
        "mu", "nu", "t", "x", "u", "smooth-bp", "smooth-2d", "2d time"
    );
    for (mu, nu) in [(1.0, -0.5), (-0.5, 0.5), (1.0, 1.0)] {
        let p = Problem::new(mu, nu)?;
        for (t, x) in [(0.5, 0.0), (1.5, 1.0)] {
            let smooth = smooth_components(&p, &d, t, x, &spec)?;
            let by_parts = eval_u_nonsmooth(&p, &d, t, x, &spec)?;
            let start = Instant::now();
            let oracle = density_oracle_components(&p, &d, t, x, &spec)?;
            let elapsed = start.elapsed();
            println!(
                "{mu:>5} {nu:>5} {t:>4} {x:>4} {:>14.10} {:>10.1e} {:>10.1e} {:>9.1?}",
                smooth.u(),
                smooth.u() - by_parts,
                smooth.u() - oracle.u(),
                elapsed
            );
        }
    }
    Ok(())
}
