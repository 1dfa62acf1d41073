//! The logarithmic weights X1(t) = 1/(1 - log t) and X2 = X1 ∘ X1, with
//! their derivatives. Both map [0,1] onto [0,1], are nondecreasing, and
//! X1(0) = X2(0) = 0 by continuity.
//!
//! Identities used throughout the crate:
//!   -log X1 = (1 - X2)/X2,
//!   X2 * log(1/X1) = 1 - X2 = log(1/X1) / (1 + log(1/X1)),
//!   X1' = X1^2 / t,   X2' = X1 X2^2 / t.
//!
//! For quadrature in the substituted variable s = -log t the stable forms
//! `x1_from_s` and `x2_from_s` avoid ever forming t = e^{-s}.

/// X1(t) = 1/(1 - log t) on (0,1], with X1(0) := 0.
pub fn x1(t: f64) -> f64 {
    assert!((0.0..=1.0).contains(&t), "x1: argument {t} outside [0,1]");
    if t == 0.0 {
        return 0.0;
    }
    1.0 / (1.0 - t.ln())
}

/// X2(t) = X1(X1(t)).
pub fn x2(t: f64) -> f64 {
    x1(x1(t))
}

/// d/dt X1(t) = X1(t)^2 / t, for t in (0,1].
pub fn dx1(t: f64) -> f64 {
    assert!(t > 0.0 && t <= 1.0, "dx1: argument {t} outside (0,1]");
    let v = x1(t);
    v * v / t
}

/// d/dt X2(t) = X1(t) X2(t)^2 / t, for t in (0,1].
pub fn dx2(t: f64) -> f64 {
    assert!(t > 0.0 && t <= 1.0, "dx2: argument {t} outside (0,1]");
    let v1 = x1(t);
    let v2 = x1(v1);
    v1 * v2 * v2 / t
}

/// X1(e^{-s}) = 1/(1+s) for s >= 0. Stable for arbitrarily large s.
pub fn x1_from_s(s: f64) -> f64 {
    debug_assert!(s >= 0.0);
    1.0 / (1.0 + s)
}

/// X2(e^{-s}) = 1/(1 + ln(1+s)) for s >= 0.
pub fn x2_from_s(s: f64) -> f64 {
    debug_assert!(s >= 0.0);
    1.0 / (1.0 + s.ln_1p())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn endpoint_values() {
        assert_eq!(x1(0.0), 0.0);
        assert_eq!(x1(1.0), 1.0);
        assert_eq!(x2(1.0), 1.0);
        assert_eq!(x2(0.0), 0.0);
    }

    #[test]
    fn closed_form_points() {
        let e = std::f64::consts::E;
        assert!((x1(1.0 / e) - 0.5).abs() < 1e-15);
        assert!((x2(1.0 / e) - 1.0 / (1.0 + 2f64.ln())).abs() < 1e-15);
        assert!((x1((-9.0f64).exp()) - 0.1).abs() < 1e-15);
        assert!((dx1(1.0) - 1.0).abs() < 1e-15);
        assert!((dx2(1.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn s_forms_agree() {
        for &s in &[0.0f64, 0.5, 3.0, 40.0, 700.0] {
            let t = (-s).exp();
            assert!((x1_from_s(s) - x1(t)).abs() < 1e-14, "s={s}");
            assert!((x2_from_s(s) - x2(t)).abs() < 1e-13, "s={s}");
        }
        // far below underflow of t itself
        assert!(x1_from_s(1e12) > 0.0);
        assert!(x2_from_s(1e12) > 0.0);
    }

    #[test]
    fn tiny_arguments_clamp_cleanly() {
        assert_eq!(x1(f64::MIN_POSITIVE) > 0.0, true);
        assert!(x1(1e-300) < 2e-3);
    }

    #[test]
    #[should_panic]
    fn out_of_range_rejected() {
        let _ = x1(1.5);
    }

    #[test]
    #[should_panic]
    fn derivative_rejects_zero() {
        let _ = dx1(0.0);
    }
}
