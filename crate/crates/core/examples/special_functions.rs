//! Stable Gaussian-tail products. `e^a Psi(z)` is needed with `a` in the
//! hundreds and `z` deep in the tail, where the naive product overflows or
//! loses every digit.
//!
//! ```text
//! cargo run --release --example special_functions
//! ```

use swlab::specialfn::{exp_psi, psi, scaled_tail};

fn main() {
    println!(
        "{:>8} {:>8} {:>24} {:>24}",
        "a", "z", "naive e^a Psi(z)", "exp_psi(a, z)"
    );
    for (a, z) in [(0.0, 1.0), (50.0, 10.0), (200.0, 20.0), (800.0, 40.0), (-700.0, -30.0)] {
        let naive = f64::exp(a) * psi(z);
        println!("{a:>8} {z:>8} {naive:>24.16e} {:>24.16e}", exp_psi(a, z));
    }
    println!("\nscaled tail e^(z^2/2) Psi(z) across the continued-fraction switch:");
    for z in [5.9, 5.99, 6.0, 6.01, 6.1] {
        println!("  z = {z:<5} {:.17}", scaled_tail(z));
    }
}
