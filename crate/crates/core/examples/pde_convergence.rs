//! Grid-refinement study of the finite-difference solver against the
//! closed-form solution on the negative-boundary-coefficient configuration.
//!
//! ```text
//! cargo run --release --example pde_convergence
//! ```

use swlab::pdesolver::solve_pde_on;
use swlab::quadrature::eval_u_smooth;
use swlab::{InitialDatum, PdeGrid, Problem, QuadratureSpec};

fn main() -> swlab::Result<()> {
    let p = Problem::new(1.0, -0.5)?;
    let d = InitialDatum::gaussian_bump(2.5, 1.0)?;
    let spec = QuadratureSpec::default();

    let t_grid = [0.5, 1.0, 2.0, 3.0];
    let x_grid: Vec<f64> = (0..=24).map(|j| j as f64 * 0.25).collect();
    let mut exact = Vec::new();
    for &t in &t_grid {
        for &x in &x_grid {
            exact.push(eval_u_smooth(&p, &d, t, x, &spec)?);
        }
    }

    let mut previous: Option<f64> = None;
    println!("{:>8} {:>8} {:>14} {:>8}", "dx", "dt", "sup error", "order");
    for level in 0..3 {
        let dx = 0.04 / f64::powi(2.0, level);
        let dt = 0.004 / f64::powi(2.0, level);
        let grid = PdeGrid::with_steps(&p, &d, 3.0, dx, dt);
        let field = solve_pde_on(&p, &d, &grid, &t_grid, &x_grid)?;
        let err = field
            .values()
            .iter()
            .zip(&exact)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        let order = previous.map(|e| (e / err).log2());
        println!(
            "{dx:>8.4} {dt:>8.5} {err:>14.6e} {:>8}",
            order.map_or("-".to_string(), |o| format!("{o:.3}"))
        );
        previous = Some(err);
    }
    Ok(())
}
