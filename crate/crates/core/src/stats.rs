//! Standard normal distribution helpers.
//!
//! The CDF uses the Abramowitz and Stegun 26.2.17 rational approximation
//! (absolute error below 7.5e-8) so results do not depend on the platform's
//! `erf`. The quantile inverts that CDF by bisection.

const P: f64 = 0.231_641_9;
const B: [f64; 5] = [
    0.319_381_530,
    -0.356_563_782,
    1.781_477_937,
    -1.821_255_978,
    1.330_274_429,
];

/// Standard normal density.
pub fn normal_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Standard normal CDF.
pub fn normal_cdf(z: f64) -> f64 {
    if z.is_nan() {
        return f64::NAN;
    }
    if z == f64::INFINITY {
        return 1.0;
    }
    if z == f64::NEG_INFINITY {
        return 0.0;
    }
    let x = z.abs();
    let t = 1.0 / (1.0 + P * x);
    let poly = t * (B[0] + t * (B[1] + t * (B[2] + t * (B[3] + t * B[4]))));
    let upper = normal_pdf(x) * poly;
    if z >= 0.0 {
        1.0 - upper
    } else {
        upper
    }
}

/// Two-sided p-value `2 * (1 - Phi(|z|))`, clamped to [0, 1].
pub fn two_sided_p(z: f64) -> f64 {
    if z.is_infinite() {
        return 0.0;
    }
    (2.0 * normal_cdf(-z.abs())).clamp(0.0, 1.0)
}

/// `z` with `normal_cdf(z) = p`, for `p` in (0, 1).
pub fn normal_quantile(p: f64) -> f64 {
    assert!(p > 0.0 && p < 1.0, "quantile of {p}");
    let (mut lo, mut hi) = (-40.0f64, 40.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if normal_cdf(mid) < p {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-15 {
            break;
        }
    }
    0.5 * (lo + hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_values() {
        assert!((normal_cdf(0.0) - 0.5).abs() < 1e-9);
        assert!((normal_cdf(1.959_963_985) - 0.975).abs() < 1e-7);
        assert!((normal_cdf(-1.0) - 0.158_655_253_9).abs() < 1e-7);
        assert!((normal_cdf(3.0) - 0.998_650_102).abs() < 1e-7);
        assert!((normal_quantile(0.75) - 0.674_489_750).abs() < 1e-6);
        assert!((two_sided_p(1.959_963_985) - 0.05).abs() < 1e-6);
        assert_eq!(two_sided_p(0.0), 1.0);
    }

    #[test]
    fn symmetric() {
        for i in 1..100 {
            let z = i as f64 * 0.07;
            assert!((normal_cdf(z) + normal_cdf(-z) - 1.0).abs() < 1e-15);
        }
    }
}
