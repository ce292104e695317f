/// Error function via Abramowitz & Stegun 7.1.26, extended to negative
/// arguments by oddness. Absolute error is below 1.5e-7.
pub fn erf_approx(t: f64) -> f64 {
    const P: f64 = 0.327_591_1;
    const A1: f64 = 0.254_829_592;
    const A2: f64 = -0.284_496_736;
    const A3: f64 = 1.421_413_741;
    const A4: f64 = -1.453_152_027;
    const A5: f64 = 1.061_405_429;

    if t == 0.0 {
        return t;
    }
    let x = t.abs();
    let k = 1.0 / (1.0 + P * x);
    let poly = ((((A5 * k + A4) * k + A3) * k + A2) * k + A1) * k;
    let y = 1.0 - poly * (-x * x).exp();
    y.copysign(t)
}

/// `1 + erf(t)` evaluated without cancellation for negative `t`.
#[inline]
pub(crate) fn one_plus_erf(t: f64) -> f64 {
    libm::erfc(-t)
}

#[cfg(test)]
mod tests {
    use super::*;

    // Maclaurin series of erf, summed until terms vanish; exact enough for |t| <= 3.
    fn erf_series(t: f64) -> f64 {
        let mut sum = 0.0;
        let mut term = t;
        let mut n = 0.0;
        loop {
            let c = term / (2.0 * n + 1.0);
            sum += c;
            if c.abs() < 1e-18 {
                break;
            }
            n += 1.0;
            term *= -t * t / n;
        }
        sum * 2.0 / std::f64::consts::PI.sqrt()
    }

    #[test]
    fn zero_and_saturation() {
        assert_eq!(erf_approx(0.0), 0.0);
        assert!((erf_approx(10.0) - 1.0).abs() < 1e-7);
        assert!((erf_approx(-10.0) + 1.0).abs() < 1e-7);
    }

    #[test]
    fn half_matches_series() {
        let reference = erf_series(0.5);
        assert!((reference - 0.520_499_877_813_046_5).abs() < 1e-15);
        assert!((erf_approx(0.5) - reference).abs() < 2e-7);
    }

    #[test]
    fn max_error_over_grid() {
        let mut worst: f64 = 0.0;
        for i in 0..=6000 {
            let t = -3.0 + i as f64 * 1e-3;
            worst = worst.max((erf_approx(t) - erf_series(t)).abs());
        }
        assert!(worst <= 2e-7, "worst error {worst}");
    }

    #[test]
    fn odd_and_bounded() {
        for i in 0..200 {
            let t = i as f64 * 0.037;
            assert_eq!(erf_approx(-t), -erf_approx(t));
            assert!(erf_approx(t).abs() <= 1.0);
        }
    }

    #[test]
    fn one_plus_erf_tail() {
        assert!((one_plus_erf(0.5) - (1.0 + erf_series(0.5))).abs() < 1e-15);
        // erfc(10) = 2.088487583762545e-45
        let v = one_plus_erf(-10.0);
        assert!(((v - 2.088_487_583_762_545e-45) / v).abs() < 1e-12);
    }
}
