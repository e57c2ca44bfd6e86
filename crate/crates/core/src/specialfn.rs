//! Gaussian density and tail, and overflow-safe products `e^a * Psi(z)`.
//!
//! Every kernel term has the shape `exp(big) * Psi(big)`. The primitive that
//! keeps those finite is the scaled tail `M(z) = e^{z^2/2} Psi(z)` for
//! `z >= 0`, which is bounded by `1/2` and decays like `1/(z sqrt(2 pi))`.

use std::f64::consts::FRAC_1_SQRT_2;

/// `1 / sqrt(2 pi)`.
pub const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Above this the continued fraction for the Mills ratio is used directly.
const MILLS_CF_THRESHOLD: f64 = 6.0;

/// Standard normal density.
pub fn phi(x: f64) -> f64 {
    INV_SQRT_2PI * (-0.5 * x * x).exp()
}

/// Upper standard normal tail `Psi(x) = 1 - Phi(x)`.
pub fn psi(x: f64) -> f64 {
    0.5 * libm::erfc(x * FRAC_1_SQRT_2)
}

/// Scaled tail `e^{z^2/2} Psi(z)` for `z >= 0`.
///
/// Below the threshold the product `exp(z^2/2) * Psi(z)` is formed with the
/// square split into an exact head and tail; above it the Mills ratio
/// `Psi(z)/phi(z)` comes from its continued fraction (modified Lentz).
pub fn scaled_tail(z: f64) -> f64 {
    debug_assert!(z >= 0.0);
    if z < MILLS_CF_THRESHOLD {
        let (hi, lo) = half_square(z);
        psi(z) * hi.exp() * lo.exp()
    } else {
        INV_SQRT_2PI * mills_ratio_cf(z)
    }
}

/// `Psi(z) / phi(z)` by the continued fraction
/// `1/(z + 1/(z + 2/(z + 3/(z + ...))))`, good for `z` well above 1.
fn mills_ratio_cf(z: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut f = z;
    let mut c = z;
    let mut d = 0.0;
    for k in 1..500 {
        let a = k as f64;
        d = z + a * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = z + a / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            break;
        }
    }
    1.0 / f
}

/// `z^2/2` as an unevaluated sum `hi + lo`.
fn half_square(z: f64) -> (f64, f64) {
    let sq = z * z;
    let err = z.mul_add(z, -sq);
    (0.5 * sq, 0.5 * err)
}

/// `e^a * Psi(z)` without forming `e^a` on its own.
///
/// For `z >= 0` this is `exp(a - z^2/2) * M(z)`. For `z < 0`, where
/// `Psi(z) = 1 - Psi(-z)` lies in `[1/2, 1)`, the product is taken directly
/// when `e^a` is representable and otherwise as `exp(a + ln(1 - Psi(-z)))`.
pub fn exp_psi(a: f64, z: f64) -> f64 {
    if z >= 0.0 {
        let (hi, lo) = half_square(z);
        ((a - hi) - lo).exp() * scaled_tail(z)
    } else {
        let ea = a.exp();
        if ea.is_finite() && ea > f64::MIN_POSITIVE {
            ea * psi(z)
        } else {
            (a + (-psi(-z)).ln_1p()).exp()
        }
    }
}

/// `e^a * phi(z)` with the exponent combined before exponentiation.
pub fn exp_phi(a: f64, z: f64) -> f64 {
    let (hi, lo) = half_square(z);
    INV_SQRT_2PI * ((a - hi) - lo).exp()
}

/// `sqrt(2 / pi)`.
pub const SQRT_2_OVER_PI: f64 = 0.797_884_560_802_865_4;

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn phi_values() {
        assert_eq!(phi(0.0), 0.398_942_280_401_432_7);
        assert!(rel(phi(1.0), 0.241_970_724_519_143_37) < 1e-15);
        assert!(rel(INV_SQRT_2PI, 1.0 / (2.0 * PI).sqrt()) < 1e-16);
        assert!(rel(SQRT_2_OVER_PI, (2.0 / PI).sqrt()) < 1e-16);
    }

    #[test]
    fn psi_values() {
        assert_eq!(psi(0.0), 0.5);
        assert!(rel(psi(1.0), 0.158_655_253_931_457_07) < 1e-15);
        let far = psi(40.0);
        assert!((0.0..1e-300).contains(&far));
    }

    #[test]
    fn psi_reflection() {
        let mut x = -8.0;
        while x <= 8.0 {
            assert!((psi(x) + psi(-x) - 1.0).abs() <= 1e-15, "x = {x}");
            x += 0.01;
        }
    }

    #[test]
    fn psi_derivative_is_minus_phi() {
        let h = 1e-5;
        let mut x = -6.0;
        while x <= 6.0 {
            let fd = (psi(x + h) - psi(x - h)) / (2.0 * h);
            assert!((fd + phi(x)).abs() < 1e-8, "x = {x}");
            x += 0.05;
        }
    }

    #[test]
    fn scaled_tail_is_continuous_at_threshold() {
        let below = scaled_tail(MILLS_CF_THRESHOLD - 1e-12);
        let above = scaled_tail(MILLS_CF_THRESHOLD);
        assert!(rel(below, above) < 1e-12);
    }

    #[test]
    fn exp_psi_trivial_cases() {
        for z in [-3.0, -0.5, 0.0, 0.7, 5.0, 12.0] {
            assert!(rel(exp_psi(0.0, z), psi(z)) < 1e-13, "z = {z}");
        }
        // tail near one
        assert!(rel(exp_psi(3.0, -40.0), 3f64.exp()) < 1e-15);
        assert!(rel(exp_psi(709.0, -40.0), 709f64.exp()) < 1e-12);
    }

    #[test]
    fn exp_psi_large_exponent_stays_finite() {
        assert!(800f64.exp().is_infinite());
        let v = exp_psi(800.0, 40.0);
        assert!(v.is_finite() && v > 0.0);
        // e^{709.9} overflows but e^{709.9} Psi(-1) does not
        let w = exp_psi(709.9, -1.0);
        assert!(w.is_finite());
        assert!(rel(w, (709.9 + (1.0 - psi(1.0)).ln()).exp()) < 1e-12);
    }

    #[test]
    fn exp_phi_matches_naive() {
        for (a, z) in [(0.0f64, 0.0), (1.5, 2.0), (-3.0, 0.3), (20.0, 7.0)] {
            let naive = a.exp() * phi(z);
            assert!(rel(exp_phi(a, z), naive) < 1e-13);
        }
    }

    proptest! {
        #[test]
        fn exp_psi_agrees_with_naive_product(a in -200.0f64..200.0, z in -10.0f64..10.0) {
            let naive = a.exp() * psi(z);
            prop_assume!(naive.is_normal());
            prop_assert!(rel(exp_psi(a, z), naive) < 1e-12);
        }

        #[test]
        fn exp_psi_decreasing_in_z(a in -700.0f64..700.0, z in -40.0f64..39.9, dz in 0.01f64..0.1) {
            let lo = exp_psi(a, z);
            let hi = exp_psi(a, z + dz);
            prop_assume!(lo > 0.0 && lo.is_finite());
            // Psi rounds to exactly 1 left of about -8.3
            if z < -8.0 {
                prop_assert!(hi <= lo);
            } else {
                prop_assert!(hi < lo);
            }
        }

        #[test]
        fn phi_symmetric(x in -50.0f64..50.0) {
            prop_assert_eq!(phi(x), phi(-x));
        }
    }
}
