//! The Figure 1 experiment: with drift `mu = 1`, boundary coefficient
//! `nu = -1/2` and a positive Gaussian bump at 2.5 as initial datum, the
//! solution turns negative near the boundary. Writes the field as CSV and
//! reports its minimum.
//!
//! ```text
//! cargo run --release --example figure1 [output.csv]
//! ```

use std::fs::File;
use std::io::BufWriter;

use swlab::cli::{figure1_config, FIGURE1_T_GRID, FIGURE1_X_GRID};
use swlab::{eval_field, Engine};

fn main() -> swlab::Result<()> {
    let path = std::env::args().nth(1).unwrap_or_else(|| "figure1.csv".into());
    let cfg = figure1_config();
    let engine = cfg.engine_config(Engine::ClosedSmooth)?;
    let field = eval_field(
        &cfg.problem()?,
        &cfg.datum()?,
        &FIGURE1_T_GRID.points(),
        &FIGURE1_X_GRID.points(),
        &engine,
    )?;
    field.write_csv(BufWriter::new(File::create(&path)?))?;

    let (u, t, x) = field.min();
    println!("wrote {} points to {path}", field.values().len());
    println!("minimum u = {u:.10} at t = {t}, x = {x}");

    println!("\nboundary profile u(t, 0):");
    for (i, &t) in field.t_grid().iter().enumerate().step_by(15) {
        println!("  t = {t:5.2}  u = {:>12.6}", field.value(i, 0));
    }
    Ok(())
}
