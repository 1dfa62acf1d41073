//! Radial profiles f on [0,1] with f(1) = 0, the 1-D carriers of the
//! admissible test functions. Piecewise-C^1 with explicit breakpoints so
//! quadrature panels can split there.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::logweight::x1;
use crate::quad::{integrate_interval, QuadResult};

type Scalar = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
pub struct RadialProfile {
    label: String,
    f: Scalar,
    df: Scalar,
    breaks: Vec<f64>,
    log_growth: bool,
}

impl RadialProfile {
    pub fn new(
        label: impl Into<String>,
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
        df: impl Fn(f64) -> f64 + Send + Sync + 'static,
        breaks: Vec<f64>,
        log_growth: bool,
    ) -> RadialProfile {
        RadialProfile {
            label: label.into(),
            f: Arc::new(f),
            df: Arc::new(df),
            breaks,
            log_growth,
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn value(&self, t: f64) -> f64 {
        debug_assert!((0.0..=1.0).contains(&t));
        (self.f)(t)
    }

    /// One-sided derivative; defined by its limit at t = 0.
    pub fn derivative(&self, t: f64) -> f64 {
        debug_assert!((0.0..=1.0).contains(&t));
        (self.df)(t)
    }

    pub fn breaks(&self) -> &[f64] {
        &self.breaks
    }

    pub fn log_growth(&self) -> bool {
        self.log_growth
    }

    /// Profiles must vanish at the boundary.
    pub fn vanishes_at_one(&self) -> bool {
        self.value(1.0).abs() < 1e-12
    }

    pub fn scaled(&self, c: f64) -> RadialProfile {
        let f = self.f.clone();
        let df = self.df.clone();
        RadialProfile {
            label: format!("{}*{c:.6e}", self.label),
            f: Arc::new(move |t| c * f(t)),
            df: Arc::new(move |t| c * df(t)),
            breaks: self.breaks.clone(),
            log_growth: self.log_growth,
        }
    }

    /// f(t) = 1 - t.
    pub fn affine() -> RadialProfile {
        RadialProfile::new("affine", |t| 1.0 - t, |_| -1.0, vec![], false)
    }

    /// f(t) = (1 - t)^2.
    pub fn quadratic() -> RadialProfile {
        RadialProfile::new(
            "quadratic",
            |t| (1.0 - t) * (1.0 - t),
            |t| -2.0 * (1.0 - t),
            vec![],
            false,
        )
    }

    /// Truncated logarithm: f = min(1, log(1/t) / k_log), constant 1 on
    /// [0, e^{-k_log}]; the classical near-extremal family.
    pub fn moser(k_log: f64) -> RadialProfile {
        assert!(k_log > 0.0, "moser profile needs k_log > 0");
        let cut = (-k_log).exp();
        RadialProfile::new(
            format!("moser[{k_log}]"),
            move |t| {
                if t <= cut {
                    1.0
                } else {
                    -t.ln() / k_log
                }
            },
            move |t| if t <= cut { 0.0 } else { -1.0 / (t * k_log) },
            vec![cut],
            false,
        )
    }

    /// log(1/t) truncated at r0: bounded, with the logarithmic shape on
    /// (r0, 1].
    pub fn log_cut(r0: f64) -> RadialProfile {
        assert!(r0 > 0.0 && r0 < 1.0);
        RadialProfile::new(
            format!("log_cut[{r0:e}]"),
            move |t| -(t.max(r0)).ln(),
            move |t| if t > r0 { -1.0 / t } else { 0.0 },
            vec![r0],
            true,
        )
    }

    /// (1 - t) * (c0 + c1 t + c2 t^2 + ...): a polynomial family vanishing
    /// at the boundary, used for randomized cross-checks.
    pub fn poly(coeffs: &[f64]) -> RadialProfile {
        let c: Vec<f64> = coeffs.to_vec();
        let c2 = c.clone();
        let label = format!(
            "poly[{}]",
            c.iter().map(|v| format!("{v:.3}")).collect::<Vec<_>>().join(",")
        );
        RadialProfile::new(
            label,
            move |t| {
                let p: f64 = c.iter().rev().fold(0.0, |acc, ci| acc * t + ci);
                (1.0 - t) * p
            },
            move |t| {
                let p: f64 = c2.iter().rev().fold(0.0, |acc, ci| acc * t + ci);
                let dp: f64 = c2
                    .iter()
                    .enumerate()
                    .skip(1)
                    .rev()
                    .fold(0.0, |acc, (i, ci)| acc * t + i as f64 * ci);
                -p + (1.0 - t) * dp
            },
            vec![],
            false,
        )
    }

    pub fn zero() -> RadialProfile {
        RadialProfile::new("zero", |_| 0.0, |_| 0.0, vec![], false)
    }

    /// |f(b) - f(a) - ∫_a^b f'| for 0 < a < b <= 1: absolute-continuity
    /// residual on the piecewise-C^1 class.
    pub fn absolute_continuity_residual(&self, a: f64, b: f64, tol: f64) -> Result<f64> {
        if !(0.0 < a && a < b && b <= 1.0) {
            return Err(Error::Precondition(format!(
                "need 0 < a < b <= 1, got a={a}, b={b}"
            )));
        }
        let mut pts = vec![a, b];
        pts.extend(self.breaks.iter().copied().filter(|t| *t > a && *t < b));
        pts.sort_by(f64::total_cmp);
        let mut integral = 0.0;
        let mut err = 0.0;
        for w in pts.windows(2) {
            let q: QuadResult =
                integrate_interval(&|t| self.derivative(t), w[0], w[1], tol, 200_000)?;
            integral += q.value;
            err += q.error_estimate;
        }
        Ok(((self.value(b) - self.value(a)) - integral).abs().max(err))
    }

    /// The transformed profile X1^{1-1/n}(t) f(t) together with its
    /// derivative, carrying the breakpoints of f.
    pub fn v_profile(&self, n: u32) -> RadialProfile {
        let e = 1.0 - 1.0 / n as f64;
        let f = self.f.clone();
        let f2 = self.f.clone();
        let df = self.df.clone();
        RadialProfile {
            label: format!("v[{}]", self.label),
            f: Arc::new(move |t| x1(t).powf(e) * f(t)),
            df: Arc::new(move |t| {
                if t == 0.0 {
                    return 0.0;
                }
                let w = x1(t);
                w.powf(e) * (df(t) + e * w * f2(t) / t)
            }),
            breaks: self.breaks.clone(),
            log_growth: self.log_growth,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn moser_values() {
        let e = std::f64::consts::E;
        let p = RadialProfile::moser(1.0);
        assert!((p.value(1.0 / e) - 1.0).abs() < 1e-15);
        assert!(p.value(1.0).abs() < 1e-15);
        let p2 = RadialProfile::moser(2.0);
        assert!((p2.value(1.0 / e) - 0.5).abs() < 1e-15);
        assert!(p2.vanishes_at_one());
    }

    #[test]
    fn absolute_continuity_of_families() {
        for p in [
            RadialProfile::affine(),
            RadialProfile::quadratic(),
            RadialProfile::moser(2.0),
            RadialProfile::log_cut(1e-6),
            RadialProfile::poly(&[0.5, -0.2, 1.0]),
        ] {
            let res = p.absolute_continuity_residual(1e-4, 1.0, 1e-11).unwrap();
            assert!(res < 1e-9, "{}: {res}", p.label());
        }
    }

    #[test]
    fn poly_derivative_consistency() {
        let p = RadialProfile::poly(&[1.0, 2.0, -0.7]);
        let h = 1e-6;
        for &t in &[0.2, 0.5, 0.9] {
            let fd = (p.value(t + h) - p.value(t - h)) / (2.0 * h);
            assert!((fd - p.derivative(t)).abs() < 1e-8);
        }
    }

    #[test]
    fn v_profile_value_and_slope() {
        // v = X1^{1/2} (1-t) at t = 1/e is sqrt(1/2)(1 - 1/e)
        let p = RadialProfile::affine().v_profile(2);
        let e = std::f64::consts::E;
        let expect = 0.5f64.sqrt() * (1.0 - 1.0 / e);
        assert!((p.value(1.0 / e) - expect).abs() < 1e-14);
        let h = 1e-6;
        let fd = (p.value(0.5 + h) - p.value(0.5 - h)) / (2.0 * h);
        assert!((fd - p.derivative(0.5)).abs() < 1e-8);
    }
}
