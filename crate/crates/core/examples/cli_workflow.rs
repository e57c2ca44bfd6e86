//! Drives the command-line interface in-process: a point evaluation, a
//! field export, and an engine comparison report.
//!
//! ```text
//! cargo run --release --example cli_workflow
//! ```

use std::io::{stderr, stdout};

fn run(args: &[&str]) -> i32 {
    println!("$ swlab {}", args.join(" "));
    let argv = std::iter::once("swlab").chain(args.iter().copied());
    let code = swlab::cli::run(argv, &mut stdout(), &mut stderr(), false);
    println!("(exit {code})\n");
    code
}

fn main() {
    let problem = ["--mu", "1", "--nu", "-0.5", "--f", "gaussian:center=2.5,width=1"];
    let with = |cmd: &[&'static str]| -> Vec<&'static str> { cmd.iter().chain(&problem).copied().collect() };

    run(&with(&["eval", "--t", "1", "--x", "0", "--engine", "closed"]));
    run(&with(&[
        "eval", "--t", "1", "--x", "0", "--engine", "mc", "--n", "1000000", "--seed", "42",
    ]));
    run(&with(&[
        "field",
        "--t-grid",
        "0.5:1.5:3",
        "--x-grid",
        "0:2:3",
        "--engine",
        "pde",
    ]));
    run(&with(&[
        "compare",
        "--engine",
        "closed",
        "--against",
        "oracle",
        "--t-grid",
        "0.5:1:2",
        "--x-grid",
        "0:1:2",
        "--tolerance",
        "1e-6",
    ]));
    run(&with(&["eval", "--t", "1", "--x", "-1"]));
}
