//! A tabulated initial datum with a kink, loaded from CSV. Tables have no
//! derivative, so only the integrated-by-parts formula and the
//! finite-difference solver apply; the two are compared on a small grid.
//!
//! ```text
//! cargo run --release --example nonsmooth_table
//! ```

use swlab::{eval_field, EngineConfig, InitialDatum, PdeSettings, Problem, QuadratureSpec};

fn main() -> swlab::Result<()> {
    let dir = std::env::temp_dir().join("swlab-nonsmooth-table");
    std::fs::create_dir_all(&dir)?;
    let path = dir.join("tent.csv");
    // tent: rises on [1, 2], falls on [2, 3]
    std::fs::write(&path, "x,f\n0,0\n1,0\n2,1\n3,0\n6,0\n")?;
    let d: InitialDatum = format!("table:{}", path.display()).parse()?;
    println!("datum {d} is smooth: {}", d.is_smooth());

    let p = Problem::new(1.0, -0.5)?;
    let t_grid = [0.25, 0.5, 1.0];
    let x_grid = [0.0, 0.5, 1.0, 2.0, 3.0];
    let closed = eval_field(
        &p,
        &d,
        &t_grid,
        &x_grid,
        &EngineConfig::ClosedNonsmooth(QuadratureSpec::default()),
    )?;
    let pde_settings = PdeSettings {
        dx: 0.0025,
        dt: 0.0005,
        ..PdeSettings::default()
    };
    let pde = eval_field(&p, &d, &t_grid, &x_grid, &EngineConfig::Pde(pde_settings))?;

    println!(
        "\n{:>5} {:>5} {:>12} {:>12} {:>10}",
        "t", "x", "by parts", "pde", "diff"
    );
    for (i, &t) in t_grid.iter().enumerate() {
        for (j, &x) in x_grid.iter().enumerate() {
            let (a, b) = (closed.value(i, j), pde.value(i, j));
            println!("{t:>5} {x:>5} {a:>12.7} {b:>12.7} {:>10.1e}", a - b);
        }
    }
    println!(
        "\nsmooth-kernel engine on a table: {:?}",
        eval_field(
            &p,
            &d,
            &[1.0],
            &[0.0],
            &EngineConfig::ClosedSmooth(QuadratureSpec::default())
        )
        .err()
    );
    Ok(())
}
