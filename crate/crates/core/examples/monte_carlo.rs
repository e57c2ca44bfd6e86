//! Exact simulation of the endpoint and running maximum, and the
//! Monte Carlo estimators of `u` and of its spatial derivative. Each
//! estimate is compared with the closed form; results do not depend on the
//! number of threads.
//!
//! ```text
//! cargo run --release --example monte_carlo
//! ```

use swlab::montecarlo::{draw_samples, estimate_u, estimate_v, path_functionals};
use swlab::quadrature::eval_u_smooth;
use swlab::{InitialDatum, Problem, QuadratureSpec};

fn main() -> swlab::Result<()> {
    let d = InitialDatum::gaussian_bump(2.5, 1.0)?;
    let spec = QuadratureSpec::default();
    let n = 4_000_000;
    let seed = 42;

    let p = Problem::new(1.0, 0.5)?;
    let samples = draw_samples(&p, 1.0, 5, seed);
    println!("first draws (endpoint b, maximum s) and path functionals from x = 0.3:");
    for smp in &samples {
        let f = path_functionals(0.3, *smp);
        println!(
            "  b = {:>8.4}  s = {:>7.4}  X = {:>7.4}  local time = {:>7.4}",
            smp.b, smp.s, f.position, f.local_time
        );
    }

    println!(
        "\n{:>5} {:>5} {:>4} {:>4} {:>12} {:>10} {:>12} {:>6}",
        "mu", "nu", "t", "x", "mc", "stderr", "closed", "z"
    );
    for (mu, nu, t, x) in [
        (1.0, -0.5, 0.5, 1.5),
        (1.0, 0.5, 1.0, 0.0),
        (1.0, 1.0, 1.0, 0.5),
        (0.0, 0.5, 1.0, 0.0),
    ] {
        let p = Problem::new(mu, nu)?;
        let est = estimate_u(&p, &d, t, x, n, seed)?;
        let exact = eval_u_smooth(&p, &d, t, x, &spec)?;
        let z = (est.mean - exact) / est.std_error;
        println!(
            "{mu:>5} {nu:>5} {t:>4} {x:>4} {:>12.6} {:>10.2e} {exact:>12.6} {z:>6.2}",
            est.mean, est.std_error
        );
    }

    let p = Problem::new(1.0, -0.5)?;
    let (t, x, h) = (1.0, 0.5, 1e-4);
    let v = estimate_v(&p, &d, t, x, n, seed)?;
    let fd = (eval_u_smooth(&p, &d, t, x + h, &spec)? - eval_u_smooth(&p, &d, t, x - h, &spec)?) / (2.0 * h);
    println!(
        "\nu_x(1, 0.5) with creation (lambda = -3): mc {:.5} +- {:.5}, finite difference {fd:.5}",
        v.mean, v.std_error
    );
    Ok(())
}
