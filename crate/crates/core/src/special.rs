//! Special functions needed by the closed-form Fourier evaluators.

use std::f64::consts::{FRAC_PI_4, PI};

/// Switch-over point between the periodic-trapezoid Bessel integral and the
/// Hankel expansion.
const BESSEL_ASYMPTOTIC_FROM: f64 = 25.0;

/// `J_1(z)`. For `|z| <= 25` the Bessel integral
/// `(1/2pi) \int_{-pi}^{pi} cos(tau - z sin tau) d tau` is summed with the
/// trapezoid rule (spectrally accurate for periodic integrands); beyond that
/// the Hankel asymptotic expansion is used.
pub fn bessel_j1(z: f64) -> f64 {
    if z < 0.0 {
        return -bessel_j1(-z);
    }
    if z <= BESSEL_ASYMPTOTIC_FROM {
        bessel_j1_integral(z)
    } else {
        bessel_j1_asymptotic(z)
    }
}

pub(crate) fn bessel_j1_integral(z: f64) -> f64 {
    const M: usize = 128;
    let s: f64 = (0..M)
        .map(|k| {
            let tau = 2.0 * PI * k as f64 / M as f64;
            (tau - z * tau.sin()).cos()
        })
        .sum();
    s / M as f64
}

pub(crate) fn bessel_j1_asymptotic(z: f64) -> f64 {
    // a_k(1) = prod_{i=1..k} (4 - (2i-1)^2) / (k! 8^k)
    let mut p = 0.0;
    let mut q = 0.0;
    let mut term = 1.0;
    let mut prev = f64::INFINITY;
    for k in 0..60 {
        if k > 0 {
            let odd = (2 * k - 1) as f64;
            term *= (4.0 - odd * odd) / (k as f64 * 8.0 * z);
        }
        if term.abs() > prev {
            break;
        }
        prev = term.abs();
        match k % 4 {
            0 => p += term,
            1 => q += term,
            2 => p -= term,
            _ => q -= term,
        }
        if term.abs() < 1e-17 {
            break;
        }
    }
    let chi = z - 3.0 * FRAC_PI_4;
    (2.0 / (PI * z)).sqrt() * (p * chi.cos() - q * chi.sin())
}

/// `1 - sin(z)/z`, accurate near zero.
pub fn sinc_complement(z: f64) -> f64 {
    if z.abs() < 0.5 {
        let z2 = z * z;
        // z^2/3! - z^4/5! + z^6/7! - ...
        let mut term = z2 / 6.0;
        let mut sum: f64 = 0.0;
        let mut k = 1.0;
        while term.abs() > 1e-18 * sum.abs().max(1e-300) {
            sum += term;
            term *= -z2 / ((2.0 * k + 2.0) * (2.0 * k + 3.0));
            k += 1.0;
        }
        sum
    } else {
        1.0 - z.sin() / z
    }
}

/// `2 J_1(z) / z`, the Fourier profile of the normalized unit disk.
pub fn jinc(z: f64) -> f64 {
    if z.abs() < 2.0 {
        1.0 - jinc_complement(z)
    } else {
        2.0 * bessel_j1(z) / z
    }
}

/// `1 - 2 J_1(z) / z`, accurate near zero.
pub fn jinc_complement(z: f64) -> f64 {
    if z.abs() < 2.0 {
        // sum_{k>=1} (-1)^{k+1} (z/2)^{2k} / (k! (k+1)!)
        let w = 0.25 * z * z;
        let mut term = w / 2.0;
        let mut sum: f64 = 0.0;
        let mut k = 1.0;
        while term.abs() > 1e-18 * sum.abs().max(1e-300) {
            sum += term;
            term *= -w / ((k + 1.0) * (k + 2.0));
            k += 1.0;
        }
        sum
    } else {
        1.0 - 2.0 * bessel_j1(z) / z
    }
}

pub fn gamma(x: f64) -> f64 {
    statrs::function::gamma::gamma(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn j1_reference_values() {
        // Abramowitz & Stegun table 9.1
        assert!((bessel_j1(1.0) - 0.440_050_585_744_933_5).abs() < 1e-14);
        assert!((bessel_j1(5.0) - (-0.327_579_137_591_465_2)).abs() < 1e-14);
        assert!((bessel_j1(10.0) - 0.043_472_746_168_861_44).abs() < 1e-14);
    }

    #[test]
    fn j1_routes_agree_in_overlap() {
        for i in 0..40 {
            let z = 20.0 + 0.37 * i as f64;
            let a = bessel_j1_integral(z);
            let b = bessel_j1_asymptotic(z);
            assert!((a - b).abs() < 1e-13, "z = {z}: {a} vs {b}");
        }
    }

    #[test]
    fn complements_are_continuous_at_switch() {
        for z in [0.4999, 0.5001, 1.9999, 2.0001] {
            assert!((sinc_complement(z) - (1.0 - z.sin() / z)).abs() < 1e-14);
            let direct = 1.0 - 2.0 * bessel_j1_integral(z) / z;
            assert!((jinc_complement(z) - direct).abs() < 1e-14);
        }
        assert_eq!(sinc_complement(0.0), 0.0);
        assert_eq!(jinc(0.0), 1.0);
    }

    #[test]
    fn gamma_values() {
        assert!((gamma(0.5) - PI.sqrt()).abs() < 1e-14);
        assert!((gamma(5.0) - 24.0).abs() < 1e-12);
    }
}
