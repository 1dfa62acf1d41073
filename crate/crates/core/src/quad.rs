//! Adaptive quadrature for the weighted radial integrals, Monte Carlo
//! integration over domains, and the Riesz-kernel integral h_r.
//!
//! Every origin-singular weight used here is a product of powers of
//! X1(t) = 1/(1 - log t), X2 = X1∘X1 and 1/t. The substitution s = -log t
//! turns all of them into rational-in-(1+s) integrands on [0, ∞), which are
//! integrated panel-adaptively with a Gauss-Kronrod 15(7) rule and a
//! truncation point chosen from the (1+s)^{-k} tail envelope so the
//! discarded tail stays below a tenth of the requested tolerance.

use std::collections::BinaryHeap;

use rand::Rng;

use crate::domain::DomainSpec;
use crate::error::{Error, Result};
use crate::logweight::{x1_from_s, x2_from_s};
use crate::sampling::{derive_seed, rng_from_seed, unit_vector};
use crate::special::unit_ball_volume;

/// Outcome of a quadrature: value, error estimate from the adaptive
/// refinement differences (plus statistical error for sampling methods),
/// evaluation count and whether the requested tolerance was met.
#[derive(Debug, Clone, Copy)]
pub struct QuadResult {
    pub value: f64,
    pub error_estimate: f64,
    pub evaluations: u64,
    pub converged: bool,
}

impl QuadResult {
    pub fn exact(value: f64) -> QuadResult {
        QuadResult {
            value,
            error_estimate: 0.0,
            evaluations: 0,
            converged: true,
        }
    }
}

// Gauss-Kronrod 15(7) nodes and weights (positive half).
const XGK: [f64; 8] = [
    0.991455371120813,
    0.949107912342759,
    0.864864423359769,
    0.741531185599394,
    0.586087235467691,
    0.405845151377397,
    0.207784955007898,
    0.0,
];
const WGK: [f64; 8] = [
    0.022935322010529,
    0.063092092629979,
    0.104790010322250,
    0.140653259715525,
    0.169004726639267,
    0.190350578064785,
    0.204432940075298,
    0.209482141084728,
];
const WG: [f64; 4] = [
    0.129484966168870,
    0.279705391489277,
    0.381830050505119,
    0.417959183673469,
];

fn gk15(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> Result<(f64, f64)> {
    let c = 0.5 * (a + b);
    let hw = 0.5 * (b - a);
    let fc = f(c);
    if !fc.is_finite() {
        return Err(Error::NonFiniteSample { abscissa: c });
    }
    let mut resk = WGK[7] * fc;
    let mut resg = WG[3] * fc;
    for i in 0..7 {
        let dx = hw * XGK[i];
        let f1 = f(c - dx);
        if !f1.is_finite() {
            return Err(Error::NonFiniteSample { abscissa: c - dx });
        }
        let f2 = f(c + dx);
        if !f2.is_finite() {
            return Err(Error::NonFiniteSample { abscissa: c + dx });
        }
        let s = f1 + f2;
        resk += WGK[i] * s;
        if i % 2 == 1 {
            resg += WG[i / 2] * s;
        }
    }
    Ok((resk * hw, ((resk - resg) * hw).abs()))
}

#[derive(Debug)]
struct Panel {
    err: f64,
    a: f64,
    b: f64,
    value: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.err.total_cmp(&other.err)
    }
}

/// Panel-adaptive integration of `f` over the union of [pts[i], pts[i+1]].
fn integrate_panels(
    f: &dyn Fn(f64) -> f64,
    pts: &[f64],
    tol: f64,
    max_evals: u64,
) -> Result<QuadResult> {
    let mut heap = BinaryHeap::new();
    let mut evals = 0u64;
    for w in pts.windows(2) {
        if w[1] <= w[0] {
            continue;
        }
        let (v, e) = gk15(f, w[0], w[1])?;
        evals += 15;
        heap.push(Panel {
            err: e,
            a: w[0],
            b: w[1],
            value: v,
        });
    }
    loop {
        let total_err: f64 = heap.iter().map(|p| p.err).sum();
        if total_err <= tol {
            break;
        }
        if evals + 30 > max_evals {
            let value = heap.iter().map(|p| p.value).sum();
            return Ok(QuadResult {
                value,
                error_estimate: total_err,
                evaluations: evals,
                converged: false,
            });
        }
        let worst = heap.pop().expect("non-empty panel heap");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // panel at float resolution; accept its estimate as final
            let mut rest: Vec<Panel> = heap.into_vec();
            rest.push(Panel { err: 0.0, ..worst });
            heap = rest.into();
            continue;
        }
        let (v1, e1) = gk15(f, worst.a, mid)?;
        let (v2, e2) = gk15(f, mid, worst.b)?;
        evals += 30;
        heap.push(Panel {
            err: e1,
            a: worst.a,
            b: mid,
            value: v1,
        });
        heap.push(Panel {
            err: e2,
            a: mid,
            b: worst.b,
            value: v2,
        });
    }
    let value = heap.iter().map(|p| p.value).sum();
    let err = heap.iter().map(|p| p.err).sum();
    Ok(QuadResult {
        value,
        error_estimate: err,
        evaluations: evals,
        converged: true,
    })
}

/// Adaptive integration over a single interval.
pub fn integrate_interval(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    tol: f64,
    max_evals: u64,
) -> Result<QuadResult> {
    integrate_panels(f, &[a, b], tol, max_evals)
}

/// A 1-D integrand on (0,1], tagged by how it behaves at the origin.
pub enum RadialIntegrand {
    /// finite on all of [0,1]
    Plain {
        eval: Box<dyn Fn(f64) -> f64 + Send + Sync>,
        breaks: Vec<f64>,
    },
    /// integrand with a logarithmic origin weight; supplied directly in the
    /// substituted variable s = -log t as G(s) = g(e^{-s}) e^{-s}, together
    /// with a tail power k > 1 such that |G(s)| = O((1+s)^{-k})
    LogSingular {
        eval_s: Box<dyn Fn(f64) -> f64 + Send + Sync>,
        tail_power: f64,
        breaks: Vec<f64>,
    },
    /// integrand smooth(t) * t^exponent with exponent > -1
    PowerSingular {
        smooth: Box<dyn Fn(f64) -> f64 + Send + Sync>,
        exponent: f64,
        breaks: Vec<f64>,
    },
}

impl RadialIntegrand {
    pub fn plain(eval: impl Fn(f64) -> f64 + Send + Sync + 'static) -> RadialIntegrand {
        RadialIntegrand::Plain {
            eval: Box::new(eval),
            breaks: Vec::new(),
        }
    }

    pub fn plain_with_breaks(
        eval: impl Fn(f64) -> f64 + Send + Sync + 'static,
        breaks: Vec<f64>,
    ) -> RadialIntegrand {
        RadialIntegrand::Plain {
            eval: Box::new(eval),
            breaks,
        }
    }

    pub fn log_singular(
        eval_s: impl Fn(f64) -> f64 + Send + Sync + 'static,
        tail_power: f64,
    ) -> RadialIntegrand {
        RadialIntegrand::LogSingular {
            eval_s: Box::new(eval_s),
            tail_power,
            breaks: Vec::new(),
        }
    }

    pub fn log_singular_with_breaks(
        eval_s: impl Fn(f64) -> f64 + Send + Sync + 'static,
        tail_power: f64,
        breaks: Vec<f64>,
    ) -> RadialIntegrand {
        RadialIntegrand::LogSingular {
            eval_s: Box::new(eval_s),
            tail_power,
            breaks,
        }
    }

    /// Convenience constructor for the recurring pattern
    /// bounded(t) * X1(t)^k * X2(t)^m / t.
    pub fn hardy_weighted(
        bounded: impl Fn(f64) -> f64 + Send + Sync + 'static,
        x1_power: f64,
        x2_power: f64,
        breaks: Vec<f64>,
    ) -> RadialIntegrand {
        RadialIntegrand::LogSingular {
            eval_s: Box::new(move |s| {
                bounded((-s).exp()) * x1_from_s(s).powf(x1_power) * x2_from_s(s).powf(x2_power)
            }),
            tail_power: x1_power,
            breaks,
        }
    }

    pub fn power_singular(
        smooth: impl Fn(f64) -> f64 + Send + Sync + 'static,
        exponent: f64,
    ) -> RadialIntegrand {
        RadialIntegrand::PowerSingular {
            smooth: Box::new(smooth),
            exponent,
            breaks: Vec::new(),
        }
    }

    /// The same integrand multiplied by t^extra (co-area Jacobian folding).
    pub fn times_power(self, extra: f64) -> RadialIntegrand {
        match self {
            RadialIntegrand::Plain { eval, breaks } => RadialIntegrand::PowerSingular {
                smooth: eval,
                exponent: extra,
                breaks,
            },
            RadialIntegrand::LogSingular {
                eval_s,
                tail_power,
                breaks,
            } => RadialIntegrand::LogSingular {
                eval_s: Box::new(move |s| eval_s(s) * (-extra * s).exp()),
                tail_power,
                breaks,
            },
            RadialIntegrand::PowerSingular {
                smooth,
                exponent,
                breaks,
            } => RadialIntegrand::PowerSingular {
                smooth,
                exponent: exponent + extra,
                breaks,
            },
        }
    }
}

/// ∫_0^1 f(t) dt for a tagged radial integrand.
pub fn integrate_radial(
    f: &RadialIntegrand,
    tol: f64,
    max_evals: u64,
) -> Result<QuadResult> {
    if !(tol > 0.0) {
        return Err(Error::Precondition("quadrature tolerance must be positive".into()));
    }
    match f {
        RadialIntegrand::Plain { eval, breaks } => {
            let mut pts = vec![0.0, 1.0];
            pts.extend(breaks.iter().copied().filter(|t| *t > 0.0 && *t < 1.0));
            pts.sort_by(f64::total_cmp);
            pts.dedup();
            integrate_panels(&**eval, &pts, tol, max_evals)
        }
        RadialIntegrand::PowerSingular {
            smooth,
            exponent,
            breaks,
        } => {
            let a = *exponent;
            if !(a > -1.0) {
                return Err(Error::Domain(format!(
                    "power-singular exponent {a} is not integrable"
                )));
            }
            // t = tau^{1/(1+a)} turns t^a dt into dtau/(1+a) exactly
            let mexp = 1.0 / (1.0 + a);
            let g = move |tau: f64| smooth(tau.powf(mexp)) * mexp;
            let mut pts = vec![0.0, 1.0];
            pts.extend(
                breaks
                    .iter()
                    .copied()
                    .filter(|t| *t > 0.0 && *t < 1.0)
                    .map(|t| t.powf(1.0 + a)),
            );
            pts.sort_by(f64::total_cmp);
            pts.dedup();
            integrate_panels(&g, &pts, tol, max_evals)
        }
        RadialIntegrand::LogSingular {
            eval_s,
            tail_power,
            breaks,
        } => {
            let k = *tail_power;
            if !(k > 1.0) {
                return Err(Error::Domain(format!(
                    "log-singular tail power {k} must exceed 1 for integrability"
                )));
            }
            let s_breaks: Vec<f64> = breaks
                .iter()
                .copied()
                .filter(|t| *t > 0.0 && *t < 1.0)
                .map(|t| -t.ln())
                .collect();
            integrate_log_substituted(&**eval_s, k, 0.0, &s_breaks, tol, max_evals)
        }
    }
}

/// Integrate G over [s_from, ∞) given the envelope |G(s)| <= C (1+s)^{-k};
/// C is measured on a geometric scan and the truncation point chosen so the
/// discarded tail is below tol/10.
fn integrate_log_substituted(
    g: &dyn Fn(f64) -> f64,
    k: f64,
    s_from: f64,
    s_breaks: &[f64],
    tol: f64,
    max_evals: u64,
) -> Result<QuadResult> {
    const S_CAP: f64 = 1e15;
    // envelope scan
    let mut c_env = 0.0f64;
    let mut s = s_from.max(1e-3);
    let mut scan = vec![s_from];
    while s < S_CAP {
        scan.push(s);
        s *= 1.45;
    }
    for &sv in &scan {
        let gv = g(sv);
        if !gv.is_finite() {
            return Err(Error::NonFiniteSample { abscissa: (-sv).exp() });
        }
        c_env = c_env.max(gv.abs() * (1.0 + sv).powf(k));
    }
    if c_env == 0.0 {
        // integrand vanishes on the scan; still integrate a token range
        c_env = f64::MIN_POSITIVE;
    }
    let tail_target = tol / 10.0;
    let s_star = ((10.0 * c_env / ((k - 1.0) * tol)).powf(1.0 / (k - 1.0)) - 1.0)
        .clamp(s_from + 8.0, S_CAP);
    let tail_bound = c_env * (1.0 + s_star).powf(1.0 - k) / (k - 1.0);

    let mut pts: Vec<f64> = vec![s_from];
    pts.extend(s_breaks.iter().copied().filter(|s| *s > s_from && *s < s_star));
    // geometric seed points avoid one giant initial panel
    let mut sp = (s_from + 1.0).max(1.0);
    while sp < s_star {
        pts.push(sp);
        sp *= 2.0;
    }
    pts.push(s_star);
    pts.sort_by(f64::total_cmp);
    pts.dedup();

    let inner_tol = (tol - tail_target).max(tol / 2.0);
    let mut out = integrate_panels(g, &pts, inner_tol, max_evals)?;
    out.error_estimate += tail_bound.min(tail_target);
    out.converged = out.converged && out.error_estimate <= tol;
    Ok(out)
}

/// ∫_{s_from}^∞ (1+s)^{-k} (1 + ln(1+s))^{-m} ds, used for the analytic
/// origin-core of domain integrals.
pub(crate) fn log_weight_tail(k: f64, m: f64, s_from: f64, tol: f64) -> Result<QuadResult> {
    let g = move |s: f64| x1_from_s(s).powf(k) * x2_from_s(s).powf(m);
    integrate_log_substituted(&g, k, s_from, &[], tol, 400_000)
}

/// Integral over the Wulff ball {F° < r} of an F°-radial integrand
/// phi(F°/r): n ω_F r^n ∫_0^1 t^{n-1} phi(t) dt.
pub fn integrate_wulff_radial(
    pair: &crate::norm::PolarPair,
    r: f64,
    profile: RadialIntegrand,
    tol: f64,
) -> Result<QuadResult> {
    let n = pair.dim() as f64;
    let omega = pair.wulff_volume(200_000)?;
    let scale = n * omega.value * r.powf(n);
    let folded = profile.times_power(n - 1.0);
    let inner_tol = (tol / scale.max(1e-300)).max(1e-15);
    let inner = integrate_radial(&folded, inner_tol, 2_000_000)?;
    Ok(QuadResult {
        value: scale * inner.value,
        error_estimate: scale * inner.error_estimate + omega.error_estimate * inner.value.abs() * n * r.powf(n),
        evaluations: inner.evaluations + omega.evaluations,
        converged: inner.converged && omega.converged,
    })
}

/// How an integrand behaves at the origin, for domain integration.
#[derive(Debug, Clone, Copy)]
pub enum OriginFlag {
    /// bounded on the domain
    Bounded,
    /// g(x) = bounded(x) * X1^k(F°/R) * X2^m(F°/R) / F°^n
    HardyWeight { x1_power: f64, x2_power: f64 },
}

/// Integral of a point evaluator over a bounded domain.
///
/// Bounded integrands use plain seeded rejection sampling over the bounding
/// box (this is the independent cross-check oracle for the co-area route).
/// Hardy-weighted integrands on Wulff balls are integrated in polar form:
/// uniform-in-s shells (log-spaced radial shells) with cone-measure
/// directions, plus an analytic core below t = e^{-80} where the bounded
/// factor is frozen at its innermost sampled mean.
pub fn integrate_domain(
    g: &dyn Fn(&[f64]) -> f64,
    flag: OriginFlag,
    domain: &DomainSpec,
    budget: u64,
    seed: u64,
) -> Result<QuadResult> {
    match flag {
        OriginFlag::Bounded => integrate_domain_rejection(g, domain, budget, seed),
        OriginFlag::HardyWeight { x1_power, x2_power } => {
            if !domain.is_wulff_ball() {
                return Err(Error::Unsupported(
                    "origin-singular weights are only integrated over Wulff balls".into(),
                ));
            }
            integrate_domain_polar(g, x1_power, x2_power, domain, budget, seed)
        }
    }
}

fn integrate_domain_rejection(
    g: &dyn Fn(&[f64]) -> f64,
    domain: &DomainSpec,
    budget: u64,
    seed: u64,
) -> Result<QuadResult> {
    let (lo, hi) = domain.bounding_box();
    let vol_box: f64 = lo.iter().zip(&hi).map(|(a, b)| b - a).product();
    let n = budget.max(1_000);
    let mut rng = rng_from_seed(derive_seed(seed, &["domain-mc", domain.label()]));
    let mut mean = 0.0f64;
    let mut m2 = 0.0f64;
    let mut hits = 0u64;
    for i in 0..n {
        let x: Vec<f64> = lo
            .iter()
            .zip(&hi)
            .map(|(a, b)| rng.gen_range(*a..*b))
            .collect();
        let v = if domain.contains(&x) {
            hits += 1;
            let gv = g(&x);
            if !gv.is_finite() {
                return Err(Error::NonFiniteSample {
                    abscissa: domain.pair.polar(&x),
                });
            }
            gv
        } else {
            0.0
        };
        let delta = v - mean;
        mean += delta / (i + 1) as f64;
        m2 += delta * (v - mean);
    }
    if hits == 0 {
        return Err(Error::Domain("zero acceptance rate over the bounding box".into()));
    }
    let var = m2 / (n as f64 - 1.0);
    Ok(QuadResult {
        value: vol_box * mean,
        error_estimate: vol_box * (var / n as f64).sqrt(),
        evaluations: n,
        converged: true,
    })
}

fn integrate_domain_polar(
    g: &dyn Fn(&[f64]) -> f64,
    x1_power: f64,
    x2_power: f64,
    domain: &DomainSpec,
    budget: u64,
    seed: u64,
) -> Result<QuadResult> {
    let pair = &domain.pair;
    let dim = pair.dim();
    let nf = dim as f64;
    let r = domain.r_omega();
    let omega = pair.wulff_volume(200_000)?.value;

    const S_MAX: f64 = 80.0;
    const SHELL_WIDTH: f64 = 1.0;
    let shells = (S_MAX / SHELL_WIDTH) as usize;
    let per_shell = ((budget / shells as u64).max(64)) as usize;

    let mut rng = rng_from_seed(derive_seed(seed, &["domain-polar", domain.label()]));
    let half = pair.euclidean_outer_radius(1.0);

    let cone_dir = |rng: &mut rand_chacha::ChaCha8Rng| -> Vec<f64> {
        loop {
            let z: Vec<f64> = (0..dim).map(|_| rng.gen_range(-half..half)).collect();
            let fp = pair.polar(&z);
            if fp > 1e-9 && fp <= 1.0 {
                return z.iter().map(|v| v / fp).collect();
            }
        }
    };

    let mut total = 0.0f64;
    let mut var_total = 0.0f64;
    let mut evals = 0u64;
    // bounded-factor statistics over the innermost shell, for the core
    let mut b_mean = 0.0f64;
    let mut b_min = f64::INFINITY;
    let mut b_max = f64::NEG_INFINITY;

    for j in 0..shells {
        let s_lo = j as f64 * SHELL_WIDTH;
        let s_hi = s_lo + SHELL_WIDTH;
        let mut mean = 0.0f64;
        let mut m2 = 0.0f64;
        let innermost = j == shells - 1;
        for i in 0..per_shell {
            let s: f64 = rng.gen_range(s_lo..s_hi);
            let theta = cone_dir(&mut rng);
            let t = (-s).exp();
            let x: Vec<f64> = theta.iter().map(|v| v * r * t).collect();
            let gv = g(&x);
            if !gv.is_finite() {
                return Err(Error::NonFiniteSample { abscissa: t });
            }
            let w = (-nf * s).exp() * gv;
            let delta = w - mean;
            mean += delta / (i + 1) as f64;
            m2 += delta * (w - mean);
            if innermost {
                // strip the singular weight to recover the bounded factor
                let b = gv * (r * t).powf(nf)
                    / (x1_from_s(s).powf(x1_power) * x2_from_s(s).powf(x2_power));
                b_mean += (b - b_mean) / (i + 1) as f64;
                b_min = b_min.min(b);
                b_max = b_max.max(b);
            }
            evals += 1;
        }
        let scale = nf * omega * r.powf(nf) * SHELL_WIDTH;
        total += scale * mean;
        let var = m2 / (per_shell as f64 - 1.0).max(1.0);
        var_total += (scale * scale) * var / per_shell as f64;
    }

    // analytic core below t = e^{-S_MAX}: bounded factor frozen at its
    // innermost mean; the leftover 1-D weight integral is done exactly
    let core_weight = log_weight_tail(x1_power, x2_power, S_MAX, 1e-12)?;
    let core = nf * omega * b_mean * core_weight.value;
    let core_err = nf
        * omega
        * ((b_max - b_min).abs() * 0.5 * core_weight.value + b_mean.abs() * core_weight.error_estimate);

    Ok(QuadResult {
        value: total + core,
        error_estimate: var_total.sqrt() + core_err,
        evaluations: evals,
        converged: true,
    })
}

/// ∫_Ω |x - y|^{-(n-1)r} dy for an interior point x.
///
/// The kernel is handled exactly in the radial direction: along each ray
/// from x the boundary crossing is located by bisection and the radial
/// integral contributes rho_b(θ)^c / c with c = n - (n-1)r > 0. The
/// remaining angular integral is adaptive quadrature in the plane and
/// seeded Monte Carlo over the sphere in higher dimensions. The domain is
/// assumed star-shaped with respect to x (true for the Wulff balls and
/// convex domains used here).
pub fn compute_hr(
    x: &[f64],
    domain: &DomainSpec,
    r: f64,
    budget: u64,
    seed: u64,
) -> Result<QuadResult> {
    let dim = domain.dim();
    let nf = dim as f64;
    let kernel_pow = (nf - 1.0) * r;
    let c = nf - kernel_pow;
    if !(c > 0.0) {
        return Err(Error::Domain(format!(
            "kernel exponent (n-1)r = {kernel_pow} is not integrable in dimension {dim}"
        )));
    }
    if !domain.contains(x) {
        return Err(Error::Precondition(
            "kernel integral is evaluated at interior points only".into(),
        ));
    }
    let (lo, hi) = domain.bounding_box();
    let mut rho_max = 0.0f64;
    for corner in 0..(1usize << dim) {
        let mut d2 = 0.0;
        for i in 0..dim {
            let ci = if corner >> i & 1 == 1 { hi[i] } else { lo[i] };
            d2 += (ci - x[i]).powi(2);
        }
        rho_max = rho_max.max(d2.sqrt());
    }
    if rho_max == 0.0 {
        return Err(Error::Domain("degenerate domain for the kernel integral".into()));
    }

    // boundary crossing along x + rho * dir; any point at distance rho_max
    // lies outside the bounding box, so [0, rho_max] brackets it
    let boundary = |dir: &[f64]| -> f64 {
        let mut a = 0.0f64;
        let mut b = rho_max;
        for _ in 0..70 {
            let mid = 0.5 * (a + b);
            let y: Vec<f64> = x.iter().zip(dir).map(|(xi, d)| xi + mid * d).collect();
            if domain.contains(&y) {
                a = mid;
            } else {
                b = mid;
            }
        }
        0.5 * (a + b)
    };

    if dim == 2 {
        let f = |th: f64| boundary(&[th.cos(), th.sin()]).powf(c) / c;
        let q = integrate_interval(&f, 0.0, 2.0 * std::f64::consts::PI, 1e-9, budget.max(40_000))?;
        Ok(q)
    } else {
        let sphere_area = nf * unit_ball_volume(dim as u32);
        let n = budget.max(2_000);
        let mut rng = rng_from_seed(derive_seed(seed, &["hr", domain.label()]));
        let mut mean = 0.0f64;
        let mut m2 = 0.0f64;
        for i in 0..n {
            let dir = unit_vector(&mut rng, dim);
            let v = boundary(&dir).powf(c) / c;
            let delta = v - mean;
            mean += delta / (i + 1) as f64;
            m2 += delta * (v - mean);
        }
        let var = m2 / (n as f64 - 1.0);
        Ok(QuadResult {
            value: sphere_area * mean,
            error_estimate: sphere_area * (var / n as f64).sqrt(),
            evaluations: n,
            converged: true,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::norm::{Norm, PolarPair};
    use std::sync::Arc;

    #[test]
    fn plain_polynomial() {
        let f = RadialIntegrand::plain(|t| t);
        let q = integrate_radial(&f, 1e-10, 100_000).unwrap();
        assert!((q.value - 0.5).abs() < 1e-12);
        assert!(q.converged);
    }

    #[test]
    fn dx1_integrates_to_one() {
        // 1/(t (1 - log t)^2) dt becomes (1+s)^{-2} ds
        let f = RadialIntegrand::log_singular(|s| x1_from_s(s).powi(2), 2.0);
        let q = integrate_radial(&f, 1e-10, 400_000).unwrap();
        assert!((q.value - 1.0).abs() < 1e-10, "got {}", q.value);
    }

    #[test]
    fn hardy_weighted_constructor_matches() {
        // 2 (1-t)^2 X1^2 / t
        let f = RadialIntegrand::hardy_weighted(|t| 2.0 * (1.0 - t) * (1.0 - t), 2.0, 0.0, vec![]);
        let q = integrate_radial(&f, 1e-11, 600_000).unwrap();
        // frozen from the brute-force oracle in tests/quadrature.rs
        assert!((q.value - 0.940_074_981_7).abs() < 1e-9, "got {}", q.value);
    }

    #[test]
    fn power_singular_exact() {
        // ∫ t^{-1/3} dt = 3/2
        let f = RadialIntegrand::power_singular(|_| 1.0, -1.0 / 3.0);
        let q = integrate_radial(&f, 1e-12, 100_000).unwrap();
        assert!((q.value - 1.5).abs() < 1e-12);
    }

    #[test]
    fn non_integrable_rejected() {
        let f = RadialIntegrand::power_singular(|_| 1.0, -1.0);
        assert!(integrate_radial(&f, 1e-9, 10_000).is_err());
        let f = RadialIntegrand::log_singular(|s| x1_from_s(s), 1.0);
        assert!(integrate_radial(&f, 1e-9, 10_000).is_err());
    }

    #[test]
    fn non_finite_sample_reported() {
        let f = RadialIntegrand::plain(|t| 1.0 / (t - 0.5));
        let err = integrate_radial(&f, 1e-9, 10_000).unwrap_err();
        assert!(matches!(err, Error::NonFiniteSample { .. }));
    }

    #[test]
    fn budget_exhaustion_flags_not_converged() {
        let f = RadialIntegrand::plain(|t| (1.0 / (1e-6 + t)).sin());
        let q = integrate_radial(&f, 1e-13, 200).unwrap();
        assert!(!q.converged);
    }

    #[test]
    fn wulff_radial_volume_recovery() {
        let pair = PolarPair::new(Norm::euclidean(2)).unwrap();
        let one = RadialIntegrand::plain(|_| 1.0);
        let q = integrate_wulff_radial(&pair, 1.0, one, 1e-10).unwrap();
        assert!((q.value - std::f64::consts::PI).abs() < 1e-10);
        let tee = RadialIntegrand::plain(|t| t);
        let q = integrate_wulff_radial(&pair, 1.0, tee, 1e-10).unwrap();
        assert!((q.value - 2.0 * std::f64::consts::PI / 3.0).abs() < 1e-10);
        let ell = PolarPair::new(Norm::ellipsoid(2, &[4.0, 0.0, 0.0, 1.0]).unwrap()).unwrap();
        let one = RadialIntegrand::plain(|_| 1.0);
        let q = integrate_wulff_radial(&ell, 1.0, one, 1e-10).unwrap();
        assert!((q.value - 2.0 * std::f64::consts::PI).abs() < 1e-10);
    }

    #[test]
    fn domain_mc_disk_area() {
        let pair = Arc::new(PolarPair::new(Norm::euclidean(2)).unwrap());
        let d = DomainSpec::wulff_ball(pair, 1.0).unwrap();
        let q = integrate_domain(&|_: &[f64]| 1.0, OriginFlag::Bounded, &d, 1_000_000, 7).unwrap();
        assert!(
            (q.value - std::f64::consts::PI).abs() < 3.0 * q.error_estimate.max(1e-4),
            "value {} err {}",
            q.value,
            q.error_estimate
        );
    }

    #[test]
    fn polar_route_matches_radial_weighted() {
        // ∫_disk X1^2(|x|)/|x|^2 dx = 2π ∫ X1^2/t dt = 2π X1(1) = 2π... the
        // 1-D reduction is nω ∫ X1^2/t dt with n=2, ω=π
        let pair = Arc::new(PolarPair::new(Norm::euclidean(2)).unwrap());
        let d = DomainSpec::wulff_ball(pair.clone(), 1.0).unwrap();
        let g = {
            let pair = pair.clone();
            move |x: &[f64]| {
                let fp = pair.polar(x);
                let v = crate::logweight::x1(fp.min(1.0));
                v * v / (fp * fp)
            }
        };
        let q = integrate_domain(
            &g,
            OriginFlag::HardyWeight {
                x1_power: 2.0,
                x2_power: 0.0,
            },
            &d,
            400_000,
            11,
        )
        .unwrap();
        let expect = 2.0 * std::f64::consts::PI; // 2π ∫ dX1 = 2π
        assert!(
            (q.value - expect).abs() < 3.0 * q.error_estimate + 1e-3,
            "value {} expect {} err {}",
            q.value,
            expect,
            q.error_estimate
        );
    }

    #[test]
    fn hr_centered_disk_closed_form() {
        let pair = Arc::new(PolarPair::new(Norm::euclidean(2)).unwrap());
        let d = DomainSpec::wulff_ball(pair, 1.0).unwrap();
        let q = compute_hr(&[0.0, 0.0], &d, 4.0 / 3.0, 600_000, 5).unwrap();
        let expect = 3.0 * std::f64::consts::PI;
        assert!(
            (q.value - expect).abs() / expect < 1e-6,
            "value {} expect {expect}",
            q.value
        );
        // off-centre values decrease
        let q_off = compute_hr(&[0.5, 0.0], &d, 4.0 / 3.0, 600_000, 5).unwrap();
        assert!(q_off.value < q.value);
    }

    #[test]
    fn hr_non_integrable_exponent_rejected() {
        let pair = Arc::new(PolarPair::new(Norm::euclidean(2)).unwrap());
        let d = DomainSpec::wulff_ball(pair, 1.0).unwrap();
        assert!(compute_hr(&[0.0, 0.0], &d, 2.0, 1000, 5).is_err());
    }
}
