//! The placement law and the closed forms available on `[0, 3]`.

use crate::error::{ParkError, Result};

/// `1 - e^{-y}` without cancellation for small `y`.
#[inline]
pub(crate) fn one_minus_exp_neg(y: f64) -> f64 {
    -(-y).exp_m1()
}

/// Density of the left endpoint of a car parked in a gap of length `x`.
///
/// Truncated exponential with rate `lambda` on `(0, x - 1)`.
pub fn trunc_exp_pdf(t: f64, lambda: f64, x: f64) -> Result<f64> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(ParkError::Domain(format!("lambda must be positive, got {lambda}")));
    }
    if !(x > 1.0 && x.is_finite()) {
        return Err(ParkError::Domain(format!("interval length must exceed 1, got {x}")));
    }
    if t <= 0.0 || t >= x - 1.0 {
        return Ok(0.0);
    }
    Ok(lambda * (-lambda * t).exp() / one_minus_exp_neg(lambda * (x - 1.0)))
}

/// Expected car count on `[0, 3]`.
pub fn closed_m(x: f64, lambda: f64) -> Result<f64> {
    if !(0.0..=3.0).contains(&x) {
        return Err(ParkError::Domain(format!("closed form for M holds on [0,3], got x={x}")));
    }
    Ok(if x <= 1.0 {
        0.0
    } else if x <= 2.0 {
        1.0
    } else if x == 3.0 {
        // (1+e^{−λ})(1−e^{−λ}) = 1−e^{−2λ}; exact instead of rounded
        2.0
    } else {
        1.0 + (1.0 + (-lambda).exp()) * one_minus_exp_neg(lambda * (x - 2.0))
            / one_minus_exp_neg(lambda * (x - 1.0))
    })
}

/// Derivative of the expected count on `(0, 3]`.
///
/// The jump points `x = 1` and `x = 2` are only accepted with
/// `right_limit = true`, in which case the right-hand limit is returned.
pub fn closed_mprime(x: f64, lambda: f64, right_limit: bool) -> Result<f64> {
    if !(x > 0.0 && x <= 3.0) {
        return Err(ParkError::Domain(format!("closed form for M' holds on (0,3], got x={x}")));
    }
    if (x == 1.0 || x == 2.0) && !right_limit {
        return Err(ParkError::Domain(format!(
            "M' jumps at x={x}; request the right limit explicitly"
        )));
    }
    if x < 2.0 {
        return Ok(0.0);
    }
    Ok(mprime_first_step(x - 1.0, lambda))
}

/// `lambda sinh(lambda) / (cosh(lambda y) - 1)` for `y` in `[1, 2]`, rescaled
/// so that neither numerator nor denominator overflows or cancels.
pub(crate) fn mprime_first_step(y: f64, lambda: f64) -> f64 {
    let d = one_minus_exp_neg(lambda * y);
    lambda * (-lambda * (y - 1.0)).exp() * one_minus_exp_neg(2.0 * lambda) / (d * d)
}

/// Uniform-placement derivative on `(2, 3]`: `2 / (x - 1)^2`.
pub fn closed_uniform_mprime(x: f64) -> Result<f64> {
    if !(x > 0.0 && x <= 3.0) {
        return Err(ParkError::Domain(format!("closed form holds on (0,3], got x={x}")));
    }
    Ok(if x < 2.0 { 0.0 } else { 2.0 / ((x - 1.0) * (x - 1.0)) })
}

/// Upper count bound `floor(x)`.
pub fn bound_floor(x: f64) -> u64 {
    x.max(0.0).floor() as u64
}

/// Lower count bound `ceil((x - 1) / 2)`, clamped at zero below `x = 1`.
pub fn bound_ceil_half(x: f64) -> u64 {
    ((x - 1.0) / 2.0).ceil().max(0.0) as u64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
        let h = (b - a) / panels as f64;
        let mut s = f(a) + f(b);
        for i in 1..panels {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            s += w * f(a + i as f64 * h);
        }
        s * h / 3.0
    }

    #[test]
    fn pdf_at_left_edge() {
        let v = trunc_exp_pdf(1e-15, 1.0, 2.0).unwrap();
        assert!((v - 1.0 / (1.0 - (-1.0f64).exp())).abs() < 1e-12);
        assert!((v - 1.581_976_706_869_326_4).abs() < 1e-12);
    }

    #[test]
    fn pdf_is_normalised() {
        for &lambda in &[0.01, 1.0, 10.0] {
            for &x in &[2.0, 5.0, 20.0] {
                let total = simpson(|t| trunc_exp_pdf(t, lambda, x).unwrap(), 1e-300, x - 1.0 - 1e-12, 20_000);
                assert!((total - 1.0).abs() < 1e-8, "lambda={lambda} x={x}: {total}");
            }
        }
    }

    #[test]
    fn pdf_uniform_limit() {
        let v = trunc_exp_pdf(1.3, 1e-12, 5.0).unwrap();
        assert!((v - 0.25).abs() < 1e-9);
    }

    #[test]
    fn pdf_outside_support_is_zero_and_bad_args_error() {
        assert_eq!(trunc_exp_pdf(1.5, 1.0, 2.0).unwrap(), 0.0);
        assert_eq!(trunc_exp_pdf(-0.1, 1.0, 2.0).unwrap(), 0.0);
        assert!(trunc_exp_pdf(0.1, 1.0, 1.0).is_err());
        assert!(trunc_exp_pdf(0.1, 0.0, 3.0).is_err());
    }

    #[test]
    fn closed_m_pieces() {
        assert_eq!(closed_m(0.7, 3.0).unwrap(), 0.0);
        assert_eq!(closed_m(1.5, 0.2).unwrap(), 1.0);
        for &lambda in &[1e-9, 0.1, 1.0, 7.0, 40.0] {
            assert!((closed_m(3.0, lambda).unwrap() - 2.0).abs() < 1e-14);
            // continuity at 2 from the right
            assert!((closed_m(2.0 + 1e-12, lambda).unwrap() - 1.0).abs() < 1e-9);
        }
        assert!(closed_m(3.1, 1.0).is_err());
        assert!(closed_m(-0.1, 1.0).is_err());
    }

    #[test]
    fn closed_m_is_continuous_and_increasing_on_two_three() {
        for &lambda in &[0.05, 1.0, 6.0] {
            let mut prev = closed_m(2.0, lambda).unwrap();
            for i in 1..=1000 {
                let x = 2.0 + i as f64 / 1000.0;
                let v = closed_m(x, lambda).unwrap();
                assert!(v >= prev - 1e-15);
                assert!(v - prev < 0.01);
                prev = v;
            }
        }
    }

    #[test]
    fn closed_mprime_values() {
        let v = closed_mprime(2.0, 1.0, true).unwrap();
        let expect = 1f64.sinh() / (1f64.cosh() - 1.0);
        assert!((v - expect).abs() < 1e-13);
        assert!((v - 2.163_953_413_738_653).abs() < 1e-12);
        assert_eq!(closed_mprime(1.5, 2.0, false).unwrap(), 0.0);
        assert_eq!(closed_mprime(1.0, 2.0, true).unwrap(), 0.0);
        assert!(closed_mprime(2.0, 1.0, false).is_err());
        assert!(closed_mprime(1.0, 1.0, false).is_err());
        // uniform limit at 2+
        assert!((closed_mprime(2.0, 1e-7, true).unwrap() - 2.0).abs() < 1e-9);
    }

    #[test]
    fn closed_mprime_matches_derivative_of_closed_m() {
        for &lambda in &[0.3, 1.0, 4.0] {
            for i in 1..20 {
                let x = 2.0 + i as f64 / 20.0;
                let h = 1e-5;
                let fd = (closed_m(x + h, lambda).unwrap() - closed_m(x - h, lambda).unwrap()) / (2.0 * h);
                let d = closed_mprime(x, lambda, false).unwrap();
                assert!((fd - d).abs() < 1e-7 * d.max(1.0), "lambda={lambda} x={x}");
                assert!(d >= 0.0);
            }
        }
    }

    #[test]
    fn floor_and_ceil_half() {
        assert_eq!((bound_floor(5.3), bound_ceil_half(5.3)), (5, 3));
        assert_eq!((bound_floor(1.0), bound_ceil_half(1.0)), (1, 0));
        assert_eq!(bound_ceil_half(0.2), 0);
        assert_eq!(bound_ceil_half(3.0), 1);
        assert_eq!(bound_ceil_half(3.01), 2);
    }
}
