//! Gamma-family special functions: log-gamma and the lower incomplete
//! gamma function γ(a, x).
//!
//! Everything downstream evaluates gamma ratios in log space, so `ln_gamma`
//! is the primitive and Γ(a) = exp(ln_gamma(a)) is only formed when the
//! magnitude is known to be safe.

use crate::error::{Error, Result};

/// Maximum iterations for the series / continued-fraction evaluation.
const MAX_ITER: usize = 400;

/// Lanczos approximation (g = 7, 9 terms) of ln Γ(x) for x > 0.
///
/// Accurate to ~1e-14 relative over the range used here.
pub fn ln_gamma(x: f64) -> f64 {
    const COEFFS: [f64; 8] = [
        676.5203681218851,
        -1259.1392167224028,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507343278686905,
        -0.13857109526572012,
        9.984_369_578_019_572e-6,
        1.5056327351493116e-7,
    ];
    debug_assert!(x > 0.0, "ln_gamma requires x > 0, got {x}");
    if x < 0.5 {
        // Reflection: Γ(x)Γ(1−x) = π / sin(πx)
        return std::f64::consts::PI.ln()
            - (std::f64::consts::PI * x).sin().ln()
            - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = 0.999_999_999_999_809_9_f64;
    for (i, c) in COEFFS.iter().enumerate() {
        acc += c / (x + (i + 1) as f64);
    }
    let t = x + 7.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

/// Γ(a) for moderate arguments.
pub fn gamma(a: f64) -> f64 {
    ln_gamma(a).exp()
}

/// Regularized lower incomplete gamma P(a, x) = γ(a, x) / Γ(a).
///
/// Series expansion for x < a + 1, Lentz continued fraction otherwise;
/// relative error well below 1e-12 for the arguments used in this crate.
pub fn reg_lower_gamma(a: f64, x: f64) -> Result<f64> {
    if a <= 0.0 || x < 0.0 || !a.is_finite() {
        return Err(Error::DomainError(format!(
            "reg_lower_gamma requires a > 0 and x >= 0, got a={a}, x={x}"
        )));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    if !x.is_finite() {
        return Ok(1.0);
    }
    let log_prefactor = a * x.ln() - x - ln_gamma(a);
    if x < a + 1.0 {
        // P(a,x) = prefactor * Σ x^n / (a (a+1) ... (a+n))
        let mut term = 1.0 / a;
        let mut sum = term;
        let mut ap = a;
        for _ in 0..MAX_ITER {
            ap += 1.0;
            term *= x / ap;
            sum += term;
            if term.abs() < sum.abs() * 1e-17 {
                break;
            }
        }
        Ok((log_prefactor.exp() * sum).min(1.0))
    } else {
        // Q(a,x) by modified Lentz; P = 1 − Q.
        let tiny = 1e-300;
        let mut b = x + 1.0 - a;
        let mut c = 1.0 / tiny;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..=MAX_ITER {
            let an = -(i as f64) * (i as f64 - a);
            b += 2.0;
            d = an * d + b;
            if d.abs() < tiny {
                d = tiny;
            }
            c = b + an / c;
            if c.abs() < tiny {
                c = tiny;
            }
            d = 1.0 / d;
            let delta = d * c;
            h *= delta;
            if (delta - 1.0).abs() < 1e-16 {
                break;
            }
        }
        Ok(1.0 - (log_prefactor.exp() * h).clamp(0.0, 1.0))
    }
}

/// Lower incomplete gamma γ(a, x) = ∫₀ˣ t^{a−1} e^{−t} dt.
///
/// `x = f64::INFINITY` short-circuits to Γ(a).
pub fn lower_incomplete_gamma(a: f64, x: f64) -> Result<f64> {
    Ok(reg_lower_gamma(a, x)? * gamma(a))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    #[test]
    fn ln_gamma_known_values() {
        assert!(ln_gamma(1.0).abs() < 1e-13);
        assert!(ln_gamma(2.0).abs() < 1e-13);
        assert!(rel(ln_gamma(0.5), std::f64::consts::PI.sqrt().ln()) < 1e-13);
        assert!(rel(ln_gamma(5.0), 24.0_f64.ln()) < 1e-13);
        assert!(rel(gamma(2.5), 1.329_340_388_179_137) < 1e-12);
    }

    #[test]
    fn gamma_one_x_closed_form() {
        for &x in &[0.1f64, 0.7, 1.0, 3.0, 9.5] {
            let want = 1.0 - (-x).exp();
            assert!(rel(lower_incomplete_gamma(1.0, x).unwrap(), want) < 1e-12);
        }
    }

    #[test]
    fn gamma_at_zero_and_infinity() {
        assert_eq!(lower_incomplete_gamma(3.7, 0.0).unwrap(), 0.0);
        let a = 4.2;
        assert!(rel(lower_incomplete_gamma(a, f64::INFINITY).unwrap(), gamma(a)) < 1e-13);
    }

    // Expected values computed by adaptive quadrature of the defining
    // integral, independently of the series/continued-fraction code path.
    #[test]
    fn gamma_vs_quadrature_oracle() {
        let cases = [
            (2.0, 1.0, 0.264_241_117_657_115_4),
            (2.5, 3.7, 1.073_375_320_725_312_2),
            (0.5, 2.0, 1.691_806_732_945_198_3),
            (7.0, 0.3, 2.404_304_957_875_451e-5),
        ];
        for (a, x, want) in cases {
            assert!(
                rel(lower_incomplete_gamma(a, x).unwrap(), want) < 1e-12,
                "gamma({a},{x})"
            );
        }
    }

    // Simpson-rule oracle evaluated in-test; independent route for random args.
    #[test]
    fn gamma_vs_simpson() {
        let simpson = |a: f64, x: f64| {
            let n = 40_000;
            let h = x / n as f64;
            let f = |t: f64| {
                if t == 0.0 {
                    0.0
                } else {
                    t.powf(a - 1.0) * (-t).exp()
                }
            };
            let mut s = f(0.0) + f(x);
            for i in 1..n {
                s += f(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
            }
            s * h / 3.0
        };
        for (a, x) in [(3.0, 2.2), (5.5, 8.0), (2.25, 0.9)] {
            let got = lower_incomplete_gamma(a, x).unwrap();
            assert!(rel(got, simpson(a, x)) < 1e-9, "gamma({a},{x}) vs simpson");
        }
    }

    #[test]
    fn domain_errors() {
        assert!(lower_incomplete_gamma(0.0, 1.0).is_err());
        assert!(lower_incomplete_gamma(-1.0, 1.0).is_err());
        assert!(lower_incomplete_gamma(1.0, -0.5).is_err());
    }
}
