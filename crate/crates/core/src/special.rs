//! Bessel functions of the first kind for integer order.

use std::f64::consts::PI;

/// `J_n(z)` from Bessel's integral `(1/2π) ∫ cos(nτ − z sin τ) dτ` over one
/// period. The integrand is smooth and periodic, so the trapezoid rule
/// converges geometrically once the node count exceeds `|z| + n`.
pub fn bessel_j(n: u32, z: f64) -> f64 {
    let nodes = 64 + 2 * (z.abs().ceil() as usize + n as usize);
    let step = 2.0 * PI / nodes as f64;
    let sum: f64 = (0..nodes)
        .map(|k| {
            let tau = k as f64 * step;
            (n as f64 * tau - z * tau.sin()).cos()
        })
        .sum();
    sum / nodes as f64
}

/// `2·J1(z)/z`, the large-signal gain of a sinusoidal nonlinearity driven
/// with phase amplitude `z`. Equals 1 at `z = 0`.
pub fn describing_gain(z: f64) -> f64 {
    if z.abs() < 1e-6 {
        1.0 - z * z / 8.0
    } else {
        2.0 * bessel_j(1, z) / z
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // Power-series oracle, fine for moderate arguments.
    fn series(n: u32, z: f64) -> f64 {
        let mut sum = 0.0;
        let half = z / 2.0;
        let mut fact_k = 1.0;
        for k in 0..40u32 {
            if k > 0 {
                fact_k *= k as f64;
            }
            let fact_nk: f64 = (1..=(n + k)).map(|i| i as f64).product();
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            sum += sign * half.powi((2 * k + n) as i32) / (fact_k * fact_nk);
        }
        sum
    }

    #[test]
    fn matches_series() {
        for &z in &[0.0, 0.3, 1.0, std::f64::consts::FRAC_PI_2, 3.0, 5.5, 8.0] {
            for n in 0..4 {
                let a = bessel_j(n, z);
                let b = series(n, z);
                assert!((a - b).abs() < 1e-13, "n={n} z={z}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn known_values() {
        assert!((bessel_j(0, 0.0) - 1.0).abs() < 1e-15);
        assert!((bessel_j(1, 1.0) - 0.440_050_585_744_933_5).abs() < 1e-14);
        // first zero of J1
        assert!(bessel_j(1, 3.831_705_970_207_512).abs() < 1e-13);
    }

    #[test]
    fn describing_gain_limits() {
        assert_eq!(describing_gain(0.0), 1.0);
        assert!((describing_gain(1e-3) - 2.0 * bessel_j(1, 1e-3) / 1e-3).abs() < 1e-12);
        let g = describing_gain(std::f64::consts::FRAC_PI_2);
        assert!((g - 0.721_7).abs() < 1e-3);
    }
}
