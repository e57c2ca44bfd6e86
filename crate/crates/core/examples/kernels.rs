//! The transition kernels: the reflecting-Brownian-motion density `G`, the
//! local-time kernel `H`, their combination `G + H_y`, and the joint density
//! of endpoint and running maximum. Checks total mass and the
//! Chapman-Kolmogorov relation numerically.
//!
//! ```text
//! cargo run --release --example kernels
//! ```

use swlab::kernels::{joint_density_g, kernel_g, kernel_g_plus_hy, kernel_h, kernel_h0};
use swlab::quadrature::integrate;
use swlab::{KernelPoint, Problem, QuadratureSpec};

fn main() -> swlab::Result<()> {
    let spec = QuadratureSpec::default();
    let p = Problem::new(1.0, -0.5)?;
    println!("mu = {}, nu = {}, lambda = {}", p.mu(), p.nu(), p.lambda());

    println!(
        "\n{:>5} {:>5} {:>5} {:>12} {:>12} {:>12}",
        "t", "x", "y", "G", "H", "G + H_y"
    );
    for (t, x, y) in [(0.25, 0.0, 0.3), (1.0, 0.5, 2.0), (4.0, 2.0, 0.1)] {
        let pt = KernelPoint::new(t, x, y)?;
        println!(
            "{t:>5} {x:>5} {y:>5} {:>12.8} {:>12.8} {:>12.8}",
            kernel_g(&p, pt),
            kernel_h(&p, pt),
            kernel_g_plus_hy(&p, pt)
        );
    }
    println!("boundary weight H(1; 0.5, 0) = {:.10}", kernel_h0(&p, 1.0, 0.5)?);

    let (t, x) = (1.0, 0.5);
    let g = |t: f64, x: f64, y: f64| kernel_g(&p, KernelPoint::new(t, x, y).unwrap());
    let mass = integrate(|y| g(t, x, y), 0.0, 20.0, &[x, x + t], &spec)?;
    println!("\nint G(1; 0.5, y) dy = {mass:.15}");

    let (s, y) = (0.4, 1.2);
    let composed = integrate(|z| g(s, x, z) * g(t, z, y), 0.0, 20.0, &[x, y], &spec)?;
    println!(
        "Chapman-Kolmogorov: composed {composed:.15}, direct {:.15}",
        g(s + t, x, y)
    );

    let density_mass = integrate(
        |b| {
            integrate(
                |sv| joint_density_g(&p, t, b, sv).unwrap(),
                b.max(0.0),
                15.0,
                &[],
                &spec,
            )
            .unwrap()
        },
        -15.0,
        15.0,
        &[0.0],
        &spec,
    )?;
    println!("joint density of (endpoint, maximum) integrates to {density_mass:.12}");
    Ok(())
}
