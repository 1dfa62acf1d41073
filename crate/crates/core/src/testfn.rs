//! Admissible test functions: compactly supported u with exact gradients.
//!
//! The workhorse is the F°-radial family u(x) = f(F°(x)/R_Ω) on a Wulff
//! ball, whose gradient is f'(t) ∇F°(x) / R_Ω; since F(∇F°) = 1 this gives
//! the pointwise identity F(∇u) = |f'|/R_Ω and makes the radial-derivative
//! energy equal to the full gradient energy. A modulated non-radial family
//! multiplies a radial profile by 1 + cos(θ)/2 for a smooth angle surrogate
//! θ whose pole sits outside the domain.

use std::sync::Arc;

use crate::domain::DomainSpec;
use crate::error::{Error, Result};
use crate::logweight::x1;
use crate::profile::RadialProfile;
use crate::sampling::dot;

type PointFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
type GradFn = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;

#[derive(Clone)]
pub struct TestFunction {
    label: String,
    pub domain: Arc<DomainSpec>,
    value: PointFn,
    grad: GradFn,
    profile: Option<RadialProfile>,
}

impl TestFunction {
    /// u(x) = f(F°(x)/R_Ω) on a Wulff ball.
    pub fn make_radial(profile: RadialProfile, domain: Arc<DomainSpec>) -> Result<TestFunction> {
        if !domain.is_wulff_ball() {
            return Err(Error::Precondition(
                "radial test functions need a Wulff-ball domain so the profile vanishes on the boundary"
                    .into(),
            ));
        }
        if !profile.vanishes_at_one() {
            return Err(Error::Precondition(format!(
                "profile {} does not vanish at t = 1",
                profile.label()
            )));
        }
        let r = domain.r_omega();
        let d_value = domain.clone();
        let d_grad = domain.clone();
        let p_value = profile.clone();
        let p_grad = profile.clone();
        Ok(TestFunction {
            label: format!("radial[{}]", profile.label()),
            domain,
            value: Arc::new(move |x| {
                let t = (d_value.pair.polar(x) / r).min(1.0);
                p_value.value(t)
            }),
            grad: Arc::new(move |x| {
                let fp = d_grad.pair.polar(x);
                if fp == 0.0 {
                    return vec![0.0; x.len()];
                }
                let t = (fp / r).min(1.0);
                let slope = p_grad.derivative(t) / r;
                d_grad
                    .pair
                    .polar_gradient(x)
                    .into_iter()
                    .map(|g| slope * g)
                    .collect()
            }),
            profile: Some(profile),
        })
    }

    /// Radial profile times 1 + cos(θ)/2, with θ = atan2(x2, x1 + shift)
    /// and the shift chosen so the angle surrogate is smooth on the domain.
    pub fn modulated(profile: RadialProfile, domain: Arc<DomainSpec>) -> Result<TestFunction> {
        if !domain.is_wulff_ball() {
            return Err(Error::Precondition(
                "modulated test functions need a Wulff-ball domain".into(),
            ));
        }
        if !profile.vanishes_at_one() {
            return Err(Error::Precondition(format!(
                "profile {} does not vanish at t = 1",
                profile.label()
            )));
        }
        let (lo, hi) = domain.bounding_box();
        let shift = 2.0
            * lo.iter()
                .chain(hi.iter())
                .fold(0.0f64, |m, v| m.max(v.abs()));
        let r = domain.r_omega();
        let d_value = domain.clone();
        let d_grad = domain.clone();
        let p_value = profile.clone();
        let p_grad = profile.clone();
        let modulation = move |x: &[f64]| -> f64 {
            let th = x[1].atan2(x[0] + shift);
            1.0 + 0.5 * th.cos()
        };
        let m_value = modulation.clone();
        Ok(TestFunction {
            label: format!("modulated[{}]", profile.label()),
            domain,
            value: Arc::new(move |x| {
                let t = (d_value.pair.polar(x) / r).min(1.0);
                p_value.value(t) * m_value(x)
            }),
            grad: Arc::new(move |x| {
                let fp = d_grad.pair.polar(x);
                if fp == 0.0 {
                    return vec![0.0; x.len()];
                }
                let t = (fp / r).min(1.0);
                let th = x[1].atan2(x[0] + shift);
                let m = 1.0 + 0.5 * th.cos();
                let slope = p_grad.derivative(t) / r;
                let mut g: Vec<f64> = d_grad
                    .pair
                    .polar_gradient(x)
                    .into_iter()
                    .map(|gi| slope * gi * m)
                    .collect();
                // gradient of the angle surrogate
                let a = x[0] + shift;
                let den = a * a + x[1] * x[1];
                let f_val = p_grad.value(t);
                g[0] += f_val * (-0.5) * th.sin() * (-x[1] / den);
                g[1] += f_val * (-0.5) * th.sin() * (a / den);
                g
            }),
            profile: None,
        })
    }

    pub fn zero(domain: Arc<DomainSpec>) -> TestFunction {
        TestFunction::make_radial(RadialProfile::zero(), domain)
            .expect("zero profile is always admissible")
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        (self.value)(x)
    }

    pub fn gradient(&self, x: &[f64]) -> Vec<f64> {
        (self.grad)(x)
    }

    /// Radial derivative component ∇u · x / F°(x).
    pub fn radial_derivative(&self, x: &[f64]) -> f64 {
        let fp = self.domain.pair.polar(x);
        if fp == 0.0 {
            return 0.0;
        }
        dot(&self.gradient(x), x) / fp
    }

    pub fn profile(&self) -> Option<&RadialProfile> {
        self.profile.as_ref()
    }

    pub fn is_radial(&self) -> bool {
        self.profile.is_some()
    }

    pub fn rescaled(&self, c: f64) -> TestFunction {
        let value = self.value.clone();
        let grad = self.grad.clone();
        TestFunction {
            label: format!("{}*{c:.6e}", self.label),
            domain: self.domain.clone(),
            value: Arc::new(move |x| c * value(x)),
            grad: Arc::new(move |x| grad(x).into_iter().map(|g| c * g).collect()),
            profile: self.profile.as_ref().map(|p| p.scaled(c)),
        }
    }

    /// u(-x) with gradient -∇u(-x); by evenness of the norms this relabels
    /// the same admissible class.
    pub fn reflected(&self) -> TestFunction {
        let value = self.value.clone();
        let grad = self.grad.clone();
        TestFunction {
            label: format!("reflected[{}]", self.label),
            domain: self.domain.clone(),
            value: Arc::new(move |x| {
                let neg: Vec<f64> = x.iter().map(|v| -v).collect();
                value(&neg)
            }),
            grad: Arc::new(move |x| {
                let neg: Vec<f64> = x.iter().map(|v| -v).collect();
                grad(&neg).into_iter().map(|g| -g).collect()
            }),
            profile: self.profile.clone(),
        }
    }

    /// v = X1^{1-1/n}(F°/R_Ω) u, with the product-rule gradient
    /// ∇v = X1^{1-1/n} ∇u + (1-1/n) X1^{2-1/n} (u/F°) ∇F°.
    /// v(0) = 0 since X1(0) = 0 and the exponent is positive.
    pub fn v_transform(&self) -> TestFunction {
        let n = self.domain.dim() as f64;
        let e = 1.0 - 1.0 / n;
        let r = self.domain.r_omega();
        let d_value = self.domain.clone();
        let d_grad = self.domain.clone();
        let value = self.value.clone();
        let value2 = self.value.clone();
        let grad = self.grad.clone();
        TestFunction {
            label: format!("v[{}]", self.label),
            domain: self.domain.clone(),
            value: Arc::new(move |x| {
                let t = (d_value.pair.polar(x) / r).min(1.0);
                if t == 0.0 {
                    return 0.0;
                }
                x1(t).powf(e) * value(x)
            }),
            grad: Arc::new(move |x| {
                let fp = d_grad.pair.polar(x);
                if fp == 0.0 {
                    return vec![0.0; x.len()];
                }
                let t = (fp / r).min(1.0);
                let w = x1(t);
                let we = w.powf(e);
                let u_val = value2(x);
                let gu = grad(x);
                let gp = d_grad.pair.polar_gradient(x);
                gu.iter()
                    .zip(&gp)
                    .map(|(du, dfp)| we * du + e * we * w * (u_val / fp) * dfp)
                    .collect()
            }),
            profile: self
                .profile
                .as_ref()
                .map(|p| p.v_profile(self.domain.dim() as u32)),
        }
    }

    /// Inverse of `v_transform` away from the origin.
    pub fn v_inverse(&self) -> TestFunction {
        let n = self.domain.dim() as f64;
        let e = 1.0 - 1.0 / n;
        let r = self.domain.r_omega();
        let d_value = self.domain.clone();
        let value = self.value.clone();
        TestFunction {
            label: format!("vinv[{}]", self.label),
            domain: self.domain.clone(),
            value: Arc::new(move |x| {
                let t = (d_value.pair.polar(x) / r).min(1.0);
                if t == 0.0 {
                    return 0.0;
                }
                value(x) / x1(t).powf(e)
            }),
            grad: Arc::new(move |_| unimplemented!("inverse transform exposes values only")),
            profile: None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::norm::{Norm, PolarPair};
    use crate::sampling::{rng_from_seed, unit_vector};
    use rand::Rng;

    fn disk() -> Arc<DomainSpec> {
        let pair = Arc::new(PolarPair::new(Norm::euclidean(2)).unwrap());
        Arc::new(DomainSpec::wulff_ball(pair, 1.0).unwrap())
    }

    fn ellipse_domain() -> Arc<DomainSpec> {
        let pair =
            Arc::new(PolarPair::new(Norm::ellipsoid(2, &[4.0, 0.0, 0.0, 1.0]).unwrap()).unwrap());
        Arc::new(DomainSpec::wulff_ball(pair, 1.0).unwrap())
    }

    #[test]
    fn radial_affine_on_disk() {
        let u = TestFunction::make_radial(RadialProfile::affine(), disk()).unwrap();
        assert!((u.value(&[0.3, 0.4]) - 0.5).abs() < 1e-14);
        let g = u.gradient(&[0.3, 0.4]);
        // F(∇u) = |f'| = 1 for the Euclidean norm
        assert!((g[0].hypot(g[1]) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn gradient_norm_identity_anisotropic() {
        // F(∇u) = |f'(t)| / R for radial u regardless of the norm
        let dom = ellipse_domain();
        let u = TestFunction::make_radial(RadialProfile::affine(), dom.clone()).unwrap();
        let mut rng = rng_from_seed(4);
        for _ in 0..200 {
            let dir = unit_vector(&mut rng, 2);
            let r: f64 = rng.gen_range(0.05..0.95);
            // map to a point with F° = r
            let fp = dom.pair.polar(&dir);
            let x: Vec<f64> = dir.iter().map(|v| v * r / fp).collect();
            let g = u.gradient(&x);
            assert!(
                (dom.pair.primal(&g) - 1.0).abs() < 1e-10,
                "F(grad u) != |f'| at {x:?}"
            );
            // radial derivative identity |∇u·x/F°| = F(∇u) for radial u
            assert!((u.radial_derivative(&x).abs() - dom.pair.primal(&g)).abs() < 1e-10);
        }
    }

    #[test]
    fn profile_with_boundary_value_rejected() {
        let bad = RadialProfile::new("one", |_| 1.0, |_| 0.0, vec![], false);
        assert!(TestFunction::make_radial(bad, disk()).is_err());
    }

    #[test]
    fn v_transform_round_trip_and_values() {
        let u = TestFunction::make_radial(RadialProfile::affine(), disk()).unwrap();
        let v = u.v_transform();
        let e = std::f64::consts::E;
        // at |x| = 1/e the factor is X1^{1/2} = sqrt(1/2)
        let x = [1.0 / e, 0.0];
        let expect = 0.5f64.sqrt() * (1.0 - 1.0 / e);
        assert!((v.value(&x) - expect).abs() < 1e-14);
        assert_eq!(v.value(&[0.0, 0.0]), 0.0);
        let back = v.v_inverse();
        let mut rng = rng_from_seed(11);
        for _ in 0..100 {
            let dir = unit_vector(&mut rng, 2);
            let r: f64 = rng.gen_range(1e-3..0.999);
            let x: Vec<f64> = dir.iter().map(|v| v * r).collect();
            assert!((back.value(&x) - u.value(&x)).abs() < 1e-12);
        }
        // v of a radial function stays radial with the transformed profile
        assert!(v.is_radial());
    }

    #[test]
    fn gradients_match_finite_differences() {
        let dom = ellipse_domain();
        for u in [
            TestFunction::make_radial(RadialProfile::quadratic(), dom.clone()).unwrap(),
            TestFunction::modulated(RadialProfile::affine(), dom.clone()).unwrap(),
            TestFunction::make_radial(RadialProfile::affine(), dom.clone())
                .unwrap()
                .v_transform(),
        ] {
            let mut rng = rng_from_seed(17);
            let h = 1e-6;
            for _ in 0..50 {
                let dir = unit_vector(&mut rng, 2);
                let r: f64 = rng.gen_range(0.1..0.9);
                let fp = dom.pair.polar(&dir);
                let x: Vec<f64> = dir.iter().map(|v| v * r / fp).collect();
                let g = u.gradient(&x);
                for i in 0..2 {
                    let mut xp = x.clone();
                    xp[i] += h;
                    let mut xm = x.clone();
                    xm[i] -= h;
                    let fd = (u.value(&xp) - u.value(&xm)) / (2.0 * h);
                    assert!(
                        (fd - g[i]).abs() < 1e-6,
                        "{}: fd {fd} vs {g:?} at {x:?}",
                        u.label()
                    );
                }
            }
        }
    }

    #[test]
    fn compact_support_collar() {
        let u = TestFunction::make_radial(RadialProfile::affine(), disk()).unwrap();
        let mut rng = rng_from_seed(23);
        for _ in 0..200 {
            let dir = unit_vector(&mut rng, 2);
            let r: f64 = rng.gen_range(0.999..1.0);
            let x: Vec<f64> = dir.iter().map(|v| v * r).collect();
            // modulus-of-continuity bound for f(1) = 0 profiles
            assert!(u.value(&x).abs() <= 1e-3);
        }
    }
}
