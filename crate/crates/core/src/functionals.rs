//! The weighted functionals and explicit constants: Hardy differences with
//! the X1^n borderline correction, double-log weighted L^q norms, the
//! exponential integrals with their 1-D tail analysis, and the constants
//! kappa_n, C_{n,F}, gamma_bar and the sampled vectorial constant sigma_F.


use rand::Rng;

use crate::error::{Error, Result};
use crate::logweight::{x1, x1_from_s, x2, x2_from_s};
use crate::norm::PolarPair;
use crate::quad::{
    integrate_domain, integrate_interval, integrate_radial, OriginFlag, QuadResult,
    RadialIntegrand,
};
use crate::sampling::{derive_seed, dot, euclid_norm, rng_from_seed, unit_vector};
use crate::special::unit_ball_volume;
use crate::testfn::TestFunction;

/// The two built-in measures: Lebesgue and the |∇F°| dx density. Both make
/// the field x/F°^n divergence-free, which is what the lower estimates
/// need.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeasureTag {
    Lebesgue,
    GradPolar,
}

impl MeasureTag {
    pub fn label(&self) -> &'static str {
        match self {
            MeasureTag::Lebesgue => "lebesgue",
            MeasureTag::GradPolar => "grad_polar",
        }
    }

    pub fn density(&self, pair: &PolarPair, x: &[f64]) -> f64 {
        match self {
            MeasureTag::Lebesgue => 1.0,
            MeasureTag::GradPolar => euclid_norm(&pair.polar_gradient(x)),
        }
    }
}

/// Which gradient term enters the Hardy difference: the full F(∇u) or only
/// the radial component |∇u·x/F°|.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HardyKind {
    FullGradient,
    RadialComponent,
}

/// kappa_n = (2/n)(n/(n-1))^{n-2}; equals 1 for n = 2 and 3.
pub fn kappa(n: u32) -> f64 {
    assert!(n >= 2, "dimension must be at least 2");
    let nf = n as f64;
    (2.0 / nf) * (nf / (nf - 1.0)).powi(n as i32 - 2)
}

/// Sharp radial exponential constant: n (4 ω_F / (n kappa_n J))^{1/(n-1)}.
pub fn gamma_bar(n: u32, omega_nf: f64, j: f64) -> Result<f64> {
    if !(j > 0.0) {
        return Err(Error::Precondition(format!(
            "gamma_bar needs a positive Hardy difference, got {j}"
        )));
    }
    let nf = n as f64;
    Ok(nf * (4.0 * omega_nf / (nf * kappa(n) * j)).powf(1.0 / (nf - 1.0)))
}

/// The L^q-estimate constant assembled from the norm-equivalence constants,
/// the sampled sigma and kappa_n:
/// (1/n) ω_n^{-1/n} [ α^{-1} 2^{(n-1)/n} σ + β̃ ((n+1)/n) n^{2/n} κ_n^{1/n} ].
pub fn c_nf(n: u32, alpha: f64, beta_tilde: f64, sigma: f64) -> f64 {
    assert!(alpha > 0.0 && beta_tilde > 0.0 && sigma >= 1.0);
    let nf = n as f64;
    let omega_n = unit_ball_volume(n);
    (1.0 / nf)
        * omega_n.powf(-1.0 / nf)
        * (2f64.powf((nf - 1.0) / nf) * sigma / alpha
            + beta_tilde * ((nf + 1.0) / nf) * nf.powf(2.0 / nf) * kappa(n).powf(1.0 / nf))
}

/// Euclidean surface measure of the unit Wulff sphere {F° = 1}. In the
/// plane this is the arc length of the boundary curve, computed by
/// adaptive quadrature; in higher dimensions it is n ω_F times the
/// cone-measure average of |∇F°|.
pub fn boundary_area(pair: &PolarPair) -> Result<QuadResult> {
    let dim = pair.dim();
    if dim == 2 {
        let f = |phi: f64| {
            let e = [phi.cos(), phi.sin()];
            let fp = pair.polar(&e);
            let rho = 1.0 / fp;
            let g = pair.polar_gradient(&e);
            // rho'(phi) = -∇F°(e)·e' / F°(e)^2
            let ep = [-phi.sin(), phi.cos()];
            let drho = -dot(&g, &ep) / (fp * fp);
            rho.hypot(drho)
        };
        let quarters: Vec<f64> = (0..=8)
            .map(|i| i as f64 * std::f64::consts::PI / 4.0)
            .collect();
        let mut value = 0.0;
        let mut err = 0.0;
        let mut evals = 0;
        for w in quarters.windows(2) {
            let q = integrate_interval(&f, w[0], w[1], 2e-11, 400_000)?;
            value += q.value;
            err += q.error_estimate;
            evals += q.evaluations;
        }
        Ok(QuadResult {
            value,
            error_estimate: err,
            evaluations: evals,
            converged: true,
        })
    } else {
        let omega = pair.wulff_volume(200_000)?;
        let half = pair.euclidean_outer_radius(1.0);
        let mut rng = rng_from_seed(derive_seed(0xb0a2, &["boundary-area", pair.label()]));
        let n = 200_000u64;
        let mut mean = 0.0;
        let mut m2 = 0.0;
        let mut accepted = 0u64;
        while accepted < n {
            let z: Vec<f64> = (0..dim).map(|_| rng.gen_range(-half..half)).collect();
            let fp = pair.polar(&z);
            if fp > 1e-9 && fp <= 1.0 {
                accepted += 1;
                let theta: Vec<f64> = z.iter().map(|v| v / fp).collect();
                let v = euclid_norm(&pair.polar_gradient(&theta));
                let delta = v - mean;
                mean += delta / accepted as f64;
                m2 += delta * (v - mean);
            }
        }
        let nf = dim as f64;
        let var = m2 / (n as f64 - 1.0);
        Ok(QuadResult {
            value: nf * omega.value * mean,
            error_estimate: nf * (omega.value * (var / n as f64).sqrt() + omega.error_estimate * mean),
            evaluations: n,
            converged: true,
        })
    }
}

/// Co-area factor for an F°-radial integrand: the reduction
/// ∫ h(F°/R) dμ = factor · R^n ∫_0^1 h(t) t^{n-1} dt
/// holds with factor = n ω_F for Lebesgue measure and the Euclidean
/// boundary area of the unit Wulff sphere for μ = |∇F°| dx.
pub fn measure_factor(pair: &PolarPair, mu: MeasureTag) -> Result<f64> {
    match mu {
        MeasureTag::Lebesgue => Ok(pair.dim() as f64 * pair.wulff_volume(200_000)?.value),
        MeasureTag::GradPolar => Ok(boundary_area(pair)?.value),
    }
}

/// Sampled bracket for the vectorial-inequality constant sigma_F >= 1:
/// the smallest sigma making
/// F^n(ξ2-ξ1) - F^n(ξ1) >= 2^{1-n} σ^{-n} F^n(ξ2) - n F^{n-1}(ξ1) F_ξ(ξ1)·ξ2
/// hold on all sampled pairs. `hi` is the certified-on-samples value, `lo`
/// the same over the first half of the sample stream.
#[derive(Debug, Clone, Copy, serde::Serialize, serde::Deserialize)]
pub struct SigmaBracket {
    pub lo: f64,
    pub hi: f64,
    pub samples: u64,
    /// worst (most negative) normalized inequality residual at sigma = hi
    pub min_residual: f64,
}

pub fn estimate_sigma_f(pair: &PolarPair, budget: u64, seed: u64) -> Result<SigmaBracket> {
    let dim = pair.dim();
    let n = dim as u32;
    let nf = dim as f64;
    let budget = budget.max(10_000);
    let mut rng = rng_from_seed(derive_seed(seed, &["sigma-f", pair.label()]));

    let requirement = |xi1: &[f64], xi2: &[f64]| -> Option<f64> {
        let f2 = pair.primal(xi2);
        if f2 == 0.0 {
            return None; // inequality reads 0 >= 0 for any sigma
        }
        let f1 = pair.primal(xi1);
        let diff: Vec<f64> = xi2.iter().zip(xi1).map(|(a, b)| a - b).collect();
        let grad_term = if f1 == 0.0 {
            0.0
        } else {
            nf * f1.powi(n as i32 - 1) * dot(&pair.primal_gradient(xi1), xi2)
        };
        let d = pair.primal(&diff).powi(n as i32) - f1.powi(n as i32) + grad_term;
        if d <= 0.0 {
            // convexity makes d >= 0; tiny negatives are cancellation noise
            let scale = f1.powi(n as i32) + f2.powi(n as i32);
            if d > -1e-11 * scale {
                return None;
            }
            return Some(f64::INFINITY);
        }
        Some((2f64.powi(1 - n as i32) * f2.powi(n as i32) / d).powf(1.0 / nf))
    };

    let mut hi = 1.0f64;
    let mut lo = 1.0f64;
    let mut worst_pair: Option<(Vec<f64>, Vec<f64>)> = None;
    for i in 0..budget {
        let d1 = unit_vector(&mut rng, dim);
        let d2 = unit_vector(&mut rng, dim);
        let r1 = 10f64.powf(rng.gen_range(-3.0..3.0));
        let r2 = 10f64.powf(rng.gen_range(-3.0..3.0));
        let xi1: Vec<f64> = d1.iter().map(|v| v * r1).collect();
        let xi2: Vec<f64> = d2.iter().map(|v| v * r2).collect();
        if let Some(req) = requirement(&xi1, &xi2) {
            if req > hi {
                hi = req;
                worst_pair = Some((xi1, xi2));
            }
            if i < budget / 2 {
                lo = lo.max(req);
            }
        }
    }
    if hi > 1e3 {
        return Err(Error::InvalidNorm(format!(
            "no admissible sigma below 1e3 on samples (worst requirement {hi:.3e}); \
             the norm is effectively not strongly convex"
        )));
    }
    let _ = worst_pair;

    // residual audit at sigma = hi over a fresh sample stream
    let mut min_residual = f64::INFINITY;
    let mut audit = rng_from_seed(derive_seed(seed, &["sigma-f-audit", pair.label()]));
    for _ in 0..budget.min(20_000) {
        let d1 = unit_vector(&mut audit, dim);
        let d2 = unit_vector(&mut audit, dim);
        let r1 = 10f64.powf(audit.gen_range(-3.0..3.0));
        let r2 = 10f64.powf(audit.gen_range(-3.0..3.0));
        let xi1: Vec<f64> = d1.iter().map(|v| v * r1).collect();
        let xi2: Vec<f64> = d2.iter().map(|v| v * r2).collect();
        let f1 = pair.primal(&xi1);
        let f2 = pair.primal(&xi2);
        let diff: Vec<f64> = xi2.iter().zip(&xi1).map(|(a, b)| a - b).collect();
        let grad_term = nf * f1.powi(n as i32 - 1) * dot(&pair.primal_gradient(&xi1), &xi2);
        let lhs = pair.primal(&diff).powi(n as i32) - f1.powi(n as i32);
        let rhs = 2f64.powi(1 - n as i32) / hi.powi(n as i32) * f2.powi(n as i32) - grad_term;
        let scale = f1.powi(n as i32) + f2.powi(n as i32);
        min_residual = min_residual.min((lhs - rhs) / scale);
    }
    Ok(SigmaBracket {
        lo,
        hi,
        samples: budget,
        min_residual,
    })
}

/// Every explicit constant attached to a norm, embedded into reports.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
pub struct ConstantsBundle {
    pub n: u32,
    pub kappa_n: f64,
    pub alpha: f64,
    pub beta: f64,
    pub alpha_polar: f64,
    pub beta_polar: f64,
    pub beta_tilde: f64,
    pub sigma_lo: f64,
    pub sigma_hi: f64,
    pub omega_nf: f64,
    /// Euclidean surface measure of the unit Wulff sphere
    pub boundary_area: f64,
    pub c_nf: f64,
    /// gamma_bar at the reference normalization J = 1
    pub gamma_bar_unit: f64,
}

pub fn constants_bundle(
    pair: &PolarPair,
    eq_samples: usize,
    sigma_budget: u64,
    seed: u64,
) -> Result<ConstantsBundle> {
    let n = pair.dim() as u32;
    let eq = pair.equivalence_constants(eq_samples);
    let sigma = estimate_sigma_f(pair, sigma_budget, seed)?;
    let omega = pair.wulff_volume(200_000)?.value;
    let area = boundary_area(pair)?.value;
    Ok(ConstantsBundle {
        n,
        kappa_n: kappa(n),
        alpha: eq.alpha,
        beta: eq.beta,
        alpha_polar: eq.alpha_polar,
        beta_polar: eq.beta_polar,
        beta_tilde: eq.beta_tilde,
        sigma_lo: sigma.lo,
        sigma_hi: sigma.hi,
        omega_nf: omega,
        boundary_area: area,
        c_nf: c_nf(n, eq.alpha, eq.beta_tilde, sigma.hi),
        gamma_bar_unit: gamma_bar(n, omega, 1.0)?,
    })
}

/// The Hardy difference
///   ∫ F(∇u)^n dμ - ((n-1)/n)^n ∫ |u|^n / F°^n · X1^n(F°/R) dμ
/// (or with |∇u·x/F°| in place of F(∇u) for the radial kind). Radial test
/// functions on Wulff balls reduce to 1-D quadrature through the co-area
/// factor; otherwise the two terms are sampled over the domain, sharing a
/// seed so the radial kind never exceeds the full kind on samples.
pub fn hardy_difference(
    u: &TestFunction,
    mu: MeasureTag,
    kind: HardyKind,
    tol: f64,
    budget: u64,
    seed: u64,
) -> Result<QuadResult> {
    let domain = &u.domain;
    if !domain.contains_origin() {
        return Err(Error::Precondition(
            "the Hardy difference needs the origin inside the domain".into(),
        ));
    }
    let pair = &domain.pair;
    let n = domain.dim() as u32;
    let nf = n as f64;
    let hardy_coef = ((nf - 1.0) / nf).powi(n as i32);

    if let Some(profile) = u.profile() {
        // co-area route; R cancels in both terms
        let factor = measure_factor(pair, mu)?;
        let p1 = profile.clone();
        let grad_term = RadialIntegrand::plain_with_breaks(
            move |t| p1.derivative(t).abs().powi(n as i32),
            profile.breaks().to_vec(),
        )
        .times_power(nf - 1.0);
        let q1 = integrate_radial(&grad_term, tol / factor.max(1.0), 2_000_000)?;
        let p2 = profile.clone();
        let hardy_term = RadialIntegrand::log_singular_with_breaks(
            move |s| p2.value((-s).exp()).abs().powi(n as i32) * x1_from_s(s).powi(n as i32),
            nf,
            profile.breaks().to_vec(),
        );
        let q2 = integrate_radial(&hardy_term, tol / (factor * hardy_coef).max(1.0), 2_000_000)?;
        return Ok(QuadResult {
            value: factor * (q1.value - hardy_coef * q2.value),
            error_estimate: factor * (q1.error_estimate + hardy_coef * q2.error_estimate),
            evaluations: q1.evaluations + q2.evaluations,
            converged: q1.converged && q2.converged,
        });
    }

    // sampled route for non-radial functions
    let r = domain.r_omega();
    let g1 = |x: &[f64]| {
        let d = mu.density(pair, x);
        let g = u.gradient(x);
        match kind {
            HardyKind::FullGradient => pair.primal(&g).powi(n as i32) * d,
            HardyKind::RadialComponent => {
                let fp = pair.polar(x);
                if fp == 0.0 {
                    0.0
                } else {
                    (dot(&g, x) / fp).abs().powi(n as i32) * d
                }
            }
        }
    };
    let q1 = integrate_domain(&g1, OriginFlag::Bounded, domain, budget, seed)?;
    let g2 = |x: &[f64]| {
        let fp = pair.polar(x);
        if fp == 0.0 {
            return 0.0;
        }
        let t = (fp / r).min(1.0);
        let w = x1(t);
        mu.density(pair, x) * u.value(x).abs().powi(n as i32) * w.powi(n as i32)
            / fp.powi(n as i32)
    };
    let q2 = integrate_domain(
        &g2,
        OriginFlag::HardyWeight {
            x1_power: nf,
            x2_power: 0.0,
        },
        domain,
        budget,
        seed,
    )?;
    Ok(QuadResult {
        value: q1.value - hardy_coef * q2.value,
        error_estimate: q1.error_estimate + hardy_coef * q2.error_estimate,
        evaluations: q1.evaluations + q2.evaluations,
        converged: q1.converged && q2.converged,
    })
}

/// ||u X2^{2/n}(F°/R)||_{L^q(Ω)} for q > n.
pub fn weighted_lq_norm(
    u: &TestFunction,
    q: f64,
    tol: f64,
    budget: u64,
    seed: u64,
) -> Result<QuadResult> {
    let domain = &u.domain;
    let n = domain.dim() as f64;
    if !(q > n) {
        return Err(Error::Precondition(format!(
            "the weighted norm estimate needs q > n (dimension), got q = {q}, n = {n}"
        )));
    }
    let p = 2.0 / n;
    let integral = if let Some(profile) = u.profile() {
        let pr = profile.clone();
        let integrand = RadialIntegrand::plain_with_breaks(
            move |t| (pr.value(t).abs() * x2(t).powf(p)).powf(q),
            profile.breaks().to_vec(),
        );
        let factor =
            measure_factor(&domain.pair, MeasureTag::Lebesgue)? * domain.r_omega().powf(n);
        let folded = integrand.times_power(n - 1.0);
        let inner = integrate_radial(&folded, tol / factor.max(1.0), 2_000_000)?;
        QuadResult {
            value: factor * inner.value,
            error_estimate: factor * inner.error_estimate,
            evaluations: inner.evaluations,
            converged: inner.converged,
        }
    } else {
        let r = domain.r_omega();
        let pair = domain.pair.clone();
        let g = move |x: &[f64]| {
            let t = (pair.polar(x) / r).min(1.0);
            (u.value(x).abs() * x2(t).powf(p)).powf(q)
        };
        integrate_domain(&g, OriginFlag::Bounded, domain, budget, seed)?
    };
    let value = integral.value.max(0.0).powf(1.0 / q);
    let err = if integral.value > 0.0 {
        integral.error_estimate * value / (q * integral.value)
    } else {
        integral.error_estimate.powf(1.0 / q)
    };
    Ok(QuadResult {
        value,
        error_estimate: err,
        evaluations: integral.evaluations,
        converged: integral.converged,
    })
}

/// ∫ |u|^n / F°^n · X1^n X2^2 dx, the double-log improved Hardy term.
pub fn improved_lhs(u: &TestFunction, tol: f64, budget: u64, seed: u64) -> Result<QuadResult> {
    let domain = &u.domain;
    let pair = &domain.pair;
    let n = domain.dim() as u32;
    let nf = n as f64;
    if let Some(profile) = u.profile() {
        let factor = measure_factor(pair, MeasureTag::Lebesgue)?;
        let pr = profile.clone();
        let integrand = RadialIntegrand::log_singular_with_breaks(
            move |s| {
                pr.value((-s).exp()).abs().powi(n as i32)
                    * x1_from_s(s).powi(n as i32)
                    * x2_from_s(s).powi(2)
            },
            nf,
            profile.breaks().to_vec(),
        );
        let inner = integrate_radial(&integrand, tol / factor.max(1.0), 2_000_000)?;
        return Ok(QuadResult {
            value: factor * inner.value,
            error_estimate: factor * inner.error_estimate,
            evaluations: inner.evaluations,
            converged: inner.converged,
        });
    }
    let r = domain.r_omega();
    let g = |x: &[f64]| {
        let fp = pair.polar(x);
        if fp == 0.0 {
            return 0.0;
        }
        let t = (fp / r).min(1.0);
        u.value(x).abs().powi(n as i32) * x1(t).powi(n as i32) * x2(t).powi(2)
            / fp.powi(n as i32)
    };
    integrate_domain(
        &g,
        OriginFlag::HardyWeight {
            x1_power: nf,
            x2_power: 2.0,
        },
        domain,
        budget,
        seed,
    )
}

/// Which X2 power multiplies |u| inside the exponential.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum X2Power {
    /// X2^{2/n}, the general-function exponent
    TwoOverN,
    /// X2^{1/n}, the sharper radial exponent
    OneOverN,
}

impl X2Power {
    pub fn exponent(&self, n: u32) -> f64 {
        match self {
            X2Power::TwoOverN => 2.0 / n as f64,
            X2Power::OneOverN => 1.0 / n as f64,
        }
    }
}

/// 1-D tail analysis of the radial exponential integral after the change
/// of variable s = 1/X1: the substituted integrand is
/// exp(γ c^{1/(n-1)} (log s / (1+log s))^{1/(n-1)} s - n s) with
/// c = n κ_n J_F[u] / (4 ω_F). The integral converges exactly when the
/// asymptotic linear rate γ c^{1/(n-1)} - n is negative.
#[derive(Debug, Clone, Copy)]
pub struct TailDiagnosis {
    /// c = n κ_n J / (4 ω_F)
    pub coefficient: f64,
    /// asymptotic exponent rate per unit s
    pub rate: f64,
    pub converges: bool,
    /// largest scanned s with a positive exponent, if any
    pub last_positive_s: Option<f64>,
    /// exponent value at the scan cutoff
    pub exponent_at_cutoff: f64,
}

#[derive(Debug, Clone)]
pub struct ExpIntegral {
    /// the n-D integral; None when the integrand overflowed
    pub integral: Option<QuadResult>,
    /// abscissa t = F°/R at which exp overflowed, when it did
    pub overflow_at: Option<f64>,
    /// radial-only tail analysis (None for non-radial u or J <= 0)
    pub tail: Option<TailDiagnosis>,
}

/// ∫_Ω exp(γ [|u| X2^p(F°/R)]^{n/(n-1)}) dx plus, for radial u, the 1-D
/// convergence diagnosis of the tail. Overflow in exp is reported as
/// divergence evidence at the offending abscissa, not an error.
pub fn exp_integral(
    u: &TestFunction,
    gamma: f64,
    power: X2Power,
    tol: f64,
    cutoff: f64,
    budget: u64,
    seed: u64,
) -> Result<ExpIntegral> {
    if !(gamma > 0.0) {
        return Err(Error::Precondition(format!(
            "exponential integral needs gamma > 0, got {gamma}"
        )));
    }
    let domain = &u.domain;
    let pair = &domain.pair;
    let n = domain.dim() as u32;
    let nf = n as f64;
    let p = power.exponent(n);
    let exp_power = nf / (nf - 1.0);

    let (integral, overflow_at) = if let Some(profile) = u.profile() {
        let pr = profile.clone();
        let integrand = RadialIntegrand::plain_with_breaks(
            move |t| (gamma * (pr.value(t).abs() * x2(t).powf(p)).powf(exp_power)).exp(),
            profile.breaks().to_vec(),
        )
        .times_power(nf - 1.0);
        let factor =
            measure_factor(pair, MeasureTag::Lebesgue)? * domain.r_omega().powf(nf);
        match integrate_radial(&integrand, tol / factor.max(1.0), 2_000_000) {
            Ok(inner) => (
                Some(QuadResult {
                    value: factor * inner.value,
                    error_estimate: factor * inner.error_estimate,
                    evaluations: inner.evaluations,
                    converged: inner.converged,
                }),
                None,
            ),
            Err(Error::NonFiniteSample { abscissa }) => (None, Some(abscissa)),
            Err(e) => return Err(e),
        }
    } else {
        let r = domain.r_omega();
        let g = |x: &[f64]| {
            let t = (pair.polar(x) / r).min(1.0);
            (gamma * (u.value(x).abs() * x2(t).powf(p)).powf(exp_power)).exp()
        };
        match integrate_domain(&g, OriginFlag::Bounded, domain, budget, seed) {
            Ok(q) => (Some(q), None),
            Err(Error::NonFiniteSample { abscissa }) => (None, Some(abscissa)),
            Err(e) => return Err(e),
        }
    };

    let tail = if u.is_radial() {
        let j = hardy_difference(
            u,
            MeasureTag::GradPolar,
            HardyKind::RadialComponent,
            tol,
            budget,
            seed,
        )?;
        if j.value > 0.0 {
            Some(tail_diagnosis(pair, gamma, j.value, cutoff)?)
        } else {
            None
        }
    } else {
        None
    };

    Ok(ExpIntegral {
        integral,
        overflow_at,
        tail,
    })
}

/// Tail diagnosis for a given Hardy difference J (with μ = |∇F°| dx).
pub fn tail_diagnosis(
    pair: &PolarPair,
    gamma: f64,
    j: f64,
    cutoff: f64,
) -> Result<TailDiagnosis> {
    let n = pair.dim() as u32;
    let nf = n as f64;
    let omega = pair.wulff_volume(200_000)?.value;
    let c = nf * kappa(n) * j / (4.0 * omega);
    let amp = gamma * c.powf(1.0 / (nf - 1.0));
    let rate = amp - nf;
    let cutoff = cutoff.max(100.0);
    let exponent = |s: f64| amp * (s.ln() / (1.0 + s.ln())).powf(1.0 / (nf - 1.0)) * s - nf * s;
    let mut last_positive = None;
    let mut s = 1.0f64;
    while s < cutoff {
        if exponent(s) > 0.0 {
            last_positive = Some(s);
        }
        s *= 1.25;
    }
    Ok(TailDiagnosis {
        coefficient: c,
        rate,
        converges: rate <= 0.0,
        last_positive_s: last_positive,
        exponent_at_cutoff: exponent(cutoff),
    })
}

/// Locate the exponential threshold for a radial u by bisection on the sign
/// of the asymptotic tail rate, refined to 0.1% of the analytic value.
pub fn locate_exp_threshold(u: &TestFunction, tol: f64, budget: u64, seed: u64) -> Result<f64> {
    if !u.is_radial() {
        return Err(Error::Precondition(
            "threshold location applies to radial test functions".into(),
        ));
    }
    let pair = &u.domain.pair;
    let n = pair.dim() as u32;
    let j = hardy_difference(
        u,
        MeasureTag::GradPolar,
        HardyKind::RadialComponent,
        tol,
        budget,
        seed,
    )?;
    if !(j.value > 0.0) {
        return Err(Error::Precondition(
            "threshold location needs a positive Hardy difference".into(),
        ));
    }
    let reference = gamma_bar(n, pair.wulff_volume(200_000)?.value, j.value)?;
    let rate_sign = |gamma: f64| -> Result<f64> {
        Ok(tail_diagnosis(pair, gamma, j.value, 1e6)?.rate)
    };
    let mut lo = reference / 4.0;
    let mut hi = reference * 4.0;
    if rate_sign(lo)? > 0.0 || rate_sign(hi)? < 0.0 {
        return Err(Error::QuadratureFailure(
            "tail rate does not bracket a sign change".into(),
        ));
    }
    while hi - lo > 1e-3 * reference {
        let mid = 0.5 * (lo + hi);
        if rate_sign(mid)? <= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Rescale a radial test function so its Hardy difference J (μ = |∇F°| dx)
/// equals 1; the difference is n-homogeneous so the factor is J^{-1/n}.
pub fn normalize_to_unit_j(u: &TestFunction, tol: f64) -> Result<TestFunction> {
    let n = u.domain.dim() as f64;
    let j = hardy_difference(
        u,
        MeasureTag::GradPolar,
        HardyKind::RadialComponent,
        tol,
        200_000,
        1,
    )?;
    if !(j.value > 0.0) {
        return Err(Error::Precondition(format!(
            "cannot normalize: Hardy difference is {:.3e}",
            j.value
        )));
    }
    Ok(u.rescaled(j.value.powf(-1.0 / n)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::DomainSpec;
    use crate::norm::Norm;
    use crate::profile::RadialProfile;
    use std::sync::Arc;

    fn disk() -> Arc<DomainSpec> {
        let pair = Arc::new(PolarPair::new(Norm::euclidean(2)).unwrap());
        Arc::new(DomainSpec::wulff_ball(pair, 1.0).unwrap())
    }

    #[test]
    fn kappa_values() {
        assert!((kappa(2) - 1.0).abs() < 1e-15);
        assert!((kappa(3) - 1.0).abs() < 1e-15);
        assert!((kappa(4) - 8.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn gamma_bar_values() {
        let pi = std::f64::consts::PI;
        assert!((gamma_bar(2, pi, 1.0).unwrap() - 4.0 * pi).abs() / (4.0 * pi) < 1e-15);
        assert!(
            (gamma_bar(2, 2.0 * pi, 1.0).unwrap() - 8.0 * pi).abs() / (8.0 * pi) < 1e-15
        );
        let expect = 3.0 * (16.0 * pi / 9.0).sqrt();
        assert!((gamma_bar(3, 4.0 * pi / 3.0, 1.0).unwrap() - expect).abs() < 1e-13);
        assert!(gamma_bar(2, pi, 0.0).is_err());
    }

    #[test]
    fn c_nf_values() {
        let pi = std::f64::consts::PI;
        let expect = (2f64.sqrt() + 3.0) / (2.0 * pi.sqrt());
        assert!((c_nf(2, 1.0, 1.0, 1.0) - expect).abs() < 1e-14);
        let expect2 = (2.0 * 2f64.sqrt() + 3.0) / (2.0 * pi.sqrt());
        assert!((c_nf(2, 1.0, 1.0, 2.0) - expect2).abs() < 1e-14);
        let expect3 = (1.0 / 3.0)
            * (4.0 * pi / 3.0).powf(-1.0 / 3.0)
            * (2f64.powf(2.0 / 3.0) + (4.0 / 3.0) * 3f64.powf(2.0 / 3.0));
        assert!((c_nf(3, 1.0, 1.0, 1.0) - expect3).abs() < 1e-14);
    }

    #[test]
    fn boundary_area_euclidean() {
        let pair = PolarPair::new(Norm::euclidean(2)).unwrap();
        let q = boundary_area(&pair).unwrap();
        assert!((q.value - 2.0 * std::f64::consts::PI).abs() < 1e-9);
    }

    #[test]
    fn sigma_euclidean_is_one() {
        let pair = PolarPair::new(Norm::euclidean(2)).unwrap();
        let s = estimate_sigma_f(&pair, 20_000, 3).unwrap();
        assert_eq!(s.hi, 1.0);
        assert_eq!(s.lo, 1.0);
        assert!(s.min_residual >= -1e-12);
        // ellipsoids share the parallelogram identity, so sigma = 1 as well
        let ell = PolarPair::new(Norm::ellipsoid(2, &[4.0, 0.0, 0.0, 1.0]).unwrap()).unwrap();
        let s = estimate_sigma_f(&ell, 20_000, 3).unwrap();
        assert_eq!(s.hi, 1.0);
    }

    #[test]
    fn hardy_difference_affine_disk() {
        // I = pi (1 - c0/4) with c0 = 2 ∫ (1-t)^2 X1^2 / t dt
        let u = TestFunction::make_radial(RadialProfile::affine(), disk()).unwrap();
        let i = hardy_difference(&u, MeasureTag::Lebesgue, HardyKind::FullGradient, 1e-10, 0, 0)
            .unwrap();
        let c0 = 0.940_074_981_739_7; // frozen from the 1-D oracle
        let expect = std::f64::consts::PI * (1.0 - c0 / 4.0);
        assert!((i.value - expect).abs() < 1e-9, "I = {}, expect {expect}", i.value);
        // radial kind agrees pointwise for radial u
        let j = hardy_difference(
            &u,
            MeasureTag::Lebesgue,
            HardyKind::RadialComponent,
            1e-10,
            0,
            0,
        )
        .unwrap();
        assert!((i.value - j.value).abs() < 1e-9);
        // zero function gives zero
        let z = TestFunction::zero(disk());
        let q = hardy_difference(&z, MeasureTag::Lebesgue, HardyKind::FullGradient, 1e-10, 0, 0)
            .unwrap();
        assert_eq!(q.value, 0.0);
    }

    #[test]
    fn moser_gradient_energy() {
        // ∫ F(∇u_k)^2 dx = 2π / log k for the Euclidean disk
        for k_log in [2.0, 4.0] {
            let u =
                TestFunction::make_radial(RadialProfile::moser(k_log), disk()).unwrap();
            let factor = measure_factor(&u.domain.pair, MeasureTag::Lebesgue).unwrap();
            let pr = u.profile().unwrap().clone();
            let grad = RadialIntegrand::plain_with_breaks(
                move |t| pr.derivative(t).powi(2),
                u.profile().unwrap().breaks().to_vec(),
            )
            .times_power(1.0);
            let q = integrate_radial(&grad, 1e-11, 1_000_000).unwrap();
            let expect = 2.0 * std::f64::consts::PI / k_log;
            assert!(
                (factor * q.value - expect).abs() < 1e-9,
                "k_log {k_log}: {} vs {expect}",
                factor * q.value
            );
        }
    }

    #[test]
    fn weighted_norm_scaling_and_zero() {
        let u = TestFunction::make_radial(RadialProfile::affine(), disk()).unwrap();
        let a = weighted_lq_norm(&u, 4.0, 1e-10, 0, 0).unwrap();
        let b = weighted_lq_norm(&u.rescaled(2.0), 4.0, 1e-10, 0, 0).unwrap();
        assert!((b.value - 2.0 * a.value).abs() < 1e-9);
        let z = TestFunction::zero(disk());
        assert_eq!(weighted_lq_norm(&z, 4.0, 1e-10, 0, 0).unwrap().value, 0.0);
        assert!(weighted_lq_norm(&u, 2.0, 1e-10, 0, 0).is_err());
    }

    #[test]
    fn improved_lhs_scaling() {
        let u = TestFunction::make_radial(RadialProfile::affine(), disk()).unwrap();
        let a = improved_lhs(&u, 1e-10, 0, 0).unwrap();
        let b = improved_lhs(&u.rescaled(2.0), 1e-10, 0, 0).unwrap();
        assert!((b.value - 4.0 * a.value).abs() < 1e-8, "{} vs {}", b.value, 4.0 * a.value);
        assert!(a.value > 0.0);
    }

    #[test]
    fn exp_integral_zero_function_gives_volume() {
        let z = TestFunction::zero(disk());
        let q = exp_integral(&z, 1.0, X2Power::TwoOverN, 1e-10, 1e6, 0, 0).unwrap();
        let vol = std::f64::consts::PI;
        assert!((q.integral.unwrap().value - vol).abs() < 1e-9);
    }

    #[test]
    fn normalization_and_threshold_location() {
        let u = TestFunction::make_radial(RadialProfile::affine(), disk()).unwrap();
        let un = normalize_to_unit_j(&u, 1e-11).unwrap();
        let j = hardy_difference(
            &un,
            MeasureTag::GradPolar,
            HardyKind::RadialComponent,
            1e-11,
            0,
            0,
        )
        .unwrap();
        assert!((j.value - 1.0).abs() < 1e-8);
        let located = locate_exp_threshold(&un, 1e-11, 0, 0).unwrap();
        let expect = 4.0 * std::f64::consts::PI;
        assert!(
            (located - expect).abs() / expect < 0.01,
            "located {located} vs {expect}"
        );
    }
}
