//! Strongly convex Finsler norms and their polars.
//!
//! A norm here is an even, positively 1-homogeneous `F: R^n -> [0, inf)`
//! that is smooth and strongly convex away from the origin. The polar
//! `F°(x) = sup { x·ξ : F(ξ) <= 1 }` measures positions, `F` measures
//! gradients. Built-in variants carry closed-form polars and gradients;
//! custom norms need only an evaluator, with the polar obtained by
//! maximization over the unit ball and derivatives by central finite
//! differences.

use std::sync::Arc;

use nalgebra::DMatrix;
use rand::Rng;

use crate::error::{Error, Result};
use crate::quad::QuadResult;
use crate::sampling::{
    derive_seed, dot, euclid_norm, golden_max, rng_from_seed, sphere_ascent, spread_directions,
    unit_vector,
};
use crate::special::{lq_ball_volume, unit_ball_volume};

pub type Evaluator = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
pub type GradientEvaluator = Arc<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>;

/// Default relative step for finite-difference derivatives of custom norms.
pub const DEFAULT_FD_STEP: f64 = 1e-5;

/// Number of deterministic starts used by the polar maximizer, per spatial
/// dimension.
pub const POLAR_STARTS_PER_DIM: usize = 8;

#[derive(Clone)]
pub enum NormKind {
    Euclidean,
    /// F(ξ) = sqrt(ξ·Aξ) with A symmetric positive definite.
    Ellipsoid { a: DMatrix<f64> },
    /// F(ξ) = ||ξ||_p with p > 1.
    PNorm { p: f64 },
    /// Black-box evaluator; gradient optional.
    Custom {
        eval: Evaluator,
        gradient: Option<GradientEvaluator>,
    },
}

#[derive(Clone)]
pub struct Norm {
    dim: usize,
    kind: NormKind,
    label: String,
}

impl Norm {
    pub fn euclidean(dim: usize) -> Norm {
        Norm {
            dim,
            kind: NormKind::Euclidean,
            label: "euclidean".into(),
        }
    }

    /// Row-major entries of a symmetric positive definite matrix.
    pub fn ellipsoid(dim: usize, entries: &[f64]) -> Result<Norm> {
        if entries.len() != dim * dim {
            return Err(Error::InvalidNorm(format!(
                "ellipsoid matrix needs {} entries, got {}",
                dim * dim,
                entries.len()
            )));
        }
        let a = DMatrix::from_row_slice(dim, dim, entries);
        if (&a - a.transpose()).abs().max() > 1e-12 * a.abs().max() {
            return Err(Error::InvalidNorm("ellipsoid matrix not symmetric".into()));
        }
        if a.clone().cholesky().is_none() {
            return Err(Error::InvalidNorm(
                "ellipsoid matrix not positive definite".into(),
            ));
        }
        let label = format!(
            "ellipsoid[{}]",
            entries
                .iter()
                .map(|v| format!("{v}"))
                .collect::<Vec<_>>()
                .join(",")
        );
        Ok(Norm {
            dim,
            kind: NormKind::Ellipsoid { a },
            label,
        })
    }

    pub fn p_norm(dim: usize, p: f64) -> Result<Norm> {
        if !(p > 1.0) || !p.is_finite() {
            return Err(Error::InvalidNorm(format!(
                "p-norm requires finite p > 1, got {p}"
            )));
        }
        Ok(Norm {
            dim,
            kind: NormKind::PNorm { p },
            label: format!("p_norm[{p}]"),
        })
    }

    pub fn custom(
        dim: usize,
        label: impl Into<String>,
        eval: Evaluator,
        gradient: Option<GradientEvaluator>,
    ) -> Norm {
        Norm {
            dim,
            kind: NormKind::Custom { eval, gradient },
            label: label.into(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn kind(&self) -> &NormKind {
        &self.kind
    }

    pub fn has_analytic_gradient(&self) -> bool {
        !matches!(
            self.kind,
            NormKind::Custom { gradient: None, .. }
        )
    }

    pub fn eval(&self, xi: &[f64]) -> f64 {
        debug_assert_eq!(xi.len(), self.dim);
        match &self.kind {
            NormKind::Euclidean => euclid_norm(xi),
            NormKind::Ellipsoid { a } => {
                let v = DMatrix::from_column_slice(self.dim, 1, xi);
                ((&v.transpose() * a * &v)[(0, 0)]).max(0.0).sqrt()
            }
            NormKind::PNorm { p } => lp_norm(xi, *p),
            NormKind::Custom { eval, .. } => eval(xi),
        }
    }

    /// Gradient of F at ξ != 0; finite differences for custom norms without
    /// a supplied gradient.
    pub fn gradient(&self, xi: &[f64]) -> Vec<f64> {
        debug_assert!(euclid_norm(xi) > 0.0, "norm gradient at the origin");
        match &self.kind {
            NormKind::Euclidean => {
                let n = euclid_norm(xi);
                xi.iter().map(|v| v / n).collect()
            }
            NormKind::Ellipsoid { a } => {
                let f = self.eval(xi);
                let v = DMatrix::from_column_slice(self.dim, 1, xi);
                let av = a * v;
                av.column(0).iter().map(|y| y / f).collect()
            }
            NormKind::PNorm { p } => lp_gradient(xi, *p),
            NormKind::Custom { eval, gradient } => match gradient {
                Some(g) => g(xi),
                None => fd_gradient(&**eval, xi, DEFAULT_FD_STEP),
            },
        }
    }
}

/// 5-point central finite-difference gradient with a step scaled by |x|.
pub fn fd_gradient(f: &dyn Fn(&[f64]) -> f64, x: &[f64], rel_step: f64) -> Vec<f64> {
    let h = rel_step * euclid_norm(x).max(1e-8);
    let mut g = vec![0.0; x.len()];
    let mut y = x.to_vec();
    for i in 0..x.len() {
        let xi = x[i];
        y[i] = xi + 2.0 * h;
        let f2p = f(&y);
        y[i] = xi + h;
        let f1p = f(&y);
        y[i] = xi - h;
        let f1m = f(&y);
        y[i] = xi - 2.0 * h;
        let f2m = f(&y);
        y[i] = xi;
        g[i] = (-f2p + 8.0 * f1p - 8.0 * f1m + f2m) / (12.0 * h);
    }
    g
}

/// Two-sided Euclidean comparison constants for a norm and its polar, plus
/// the sup of |∇F°| on the Euclidean unit sphere.
#[derive(Debug, Clone, Copy, serde::Serialize, serde::Deserialize)]
pub struct EquivalenceConstants {
    pub alpha: f64,
    pub beta: f64,
    pub alpha_polar: f64,
    pub beta_polar: f64,
    pub beta_tilde: f64,
}

/// Maximum residuals of the pointwise norm identities over a sample set.
#[derive(Debug, Clone, Copy)]
pub struct IdentityReport {
    /// ∇F°(x)·x - F°(x), relative to F°(x)
    pub euler: f64,
    /// |∇²F°(x) x|
    pub hessian_action: f64,
    /// div(x/F°) - (n-1)/F°
    pub div_ratio: f64,
    /// div(x/F°^n)
    pub div_power: f64,
    /// div(x |∇F°| / F°^n)
    pub div_grad_weighted: f64,
    /// |F_ξ(∇F°(x)) - x/F°(x)|
    pub dual_unit_map: f64,
    pub samples: usize,
    pub fd_step: f64,
}

impl IdentityReport {
    pub fn residuals(&self) -> [(&'static str, f64); 6] {
        [
            ("euler", self.euler),
            ("hessian_action", self.hessian_action),
            ("div_ratio", self.div_ratio),
            ("div_power", self.div_power),
            ("div_grad_weighted", self.div_grad_weighted),
            ("dual_unit_map", self.dual_unit_map),
        ]
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals()
            .iter()
            .map(|(_, r)| *r)
            .fold(0.0, f64::max)
    }
}

/// A validated norm together with its polar.
pub struct PolarPair {
    norm: Norm,
    a_inv: Option<DMatrix<f64>>,
    dual_p: Option<f64>,
    duality_residual: f64,
    min_hessian_eig: f64,
    /// lower bound for min F° on the unit sphere, used for bounding boxes
    sphere_alpha_polar: f64,
}

impl PolarPair {
    pub fn new(norm: Norm) -> Result<PolarPair> {
        Self::with_options(norm, 64, 0x0face)
    }

    pub fn with_options(norm: Norm, validation_samples: usize, seed: u64) -> Result<PolarPair> {
        if norm.dim < 2 {
            return Err(Error::InvalidNorm("dimension must be at least 2".into()));
        }
        let a_inv = match &norm.kind {
            NormKind::Ellipsoid { a } => Some(a.clone().try_inverse().ok_or_else(|| {
                Error::InvalidNorm("ellipsoid matrix not invertible".into())
            })?),
            _ => None,
        };
        let dual_p = match &norm.kind {
            NormKind::PNorm { p } => Some(p / (p - 1.0)),
            _ => None,
        };
        let mut pair = PolarPair {
            norm,
            a_inv,
            dual_p,
            duality_residual: 0.0,
            min_hessian_eig: f64::NAN,
            sphere_alpha_polar: 1.0,
        };
        pair.validate(validation_samples, seed)?;
        Ok(pair)
    }

    fn validate(&mut self, samples: usize, seed: u64) -> Result<()> {
        let dim = self.norm.dim;
        let mut rng = rng_from_seed(derive_seed(seed, &["norm-validation", self.label()]));
        let analytic = self.norm.has_analytic_gradient()
            && !matches!(self.norm.kind, NormKind::Custom { .. });
        let tol = if analytic { 1e-10 } else { 1e-6 };

        // positivity, evenness, homogeneity
        for _ in 0..samples {
            let u = unit_vector(&mut rng, dim);
            let r: f64 = rng.gen_range(0.5..2.0);
            let x: Vec<f64> = u.iter().map(|v| v * r).collect();
            let fx = self.norm.eval(&x);
            if !(fx > 0.0) || !fx.is_finite() {
                return Err(Error::InvalidNorm(format!(
                    "F not positive at a nonzero sample (value {fx})"
                )));
            }
            let neg: Vec<f64> = x.iter().map(|v| -v).collect();
            if (self.norm.eval(&neg) - fx).abs() > tol * fx {
                return Err(Error::InvalidNorm("F is not even on samples".into()));
            }
            let t: f64 = rng.gen_range(0.1..10.0);
            let tx: Vec<f64> = x.iter().map(|v| v * t).collect();
            if (self.norm.eval(&tx) - t * fx).abs() > tol * t * fx {
                return Err(Error::InvalidNorm(
                    "F is not positively 1-homogeneous on samples".into(),
                ));
            }
        }
        let zero = vec![0.0; dim];
        if self.norm.eval(&zero).abs() > 1e-12 {
            return Err(Error::InvalidNorm("F(0) != 0".into()));
        }

        // strong convexity probe: smallest eigenvalue of the finite-difference
        // Hessian of F^2 on unit samples
        let mut min_eig = f64::INFINITY;
        for _ in 0..samples.min(32) {
            let u = unit_vector(&mut rng, dim);
            let eig = self.hessian_f2_min_eig(&u);
            min_eig = min_eig.min(eig);
        }
        if !(min_eig > 0.0) {
            return Err(Error::InvalidNorm(format!(
                "Hessian of F^2 not positive definite on samples (min eigenvalue {min_eig})"
            )));
        }
        self.min_hessian_eig = min_eig;

        // cache a safe lower bound for min F° on the sphere (bounding boxes)
        let mut min_polar = f64::INFINITY;
        let probe = spread_directions(dim, 256.max(8 * dim));
        for u in &probe {
            min_polar = min_polar.min(self.polar(u));
        }
        self.sphere_alpha_polar = 0.98 * min_polar;

        // duality residual: closed-form (or production) polar against the
        // independent maximization route
        let mut residual = 0.0f64;
        let mut dual_unit_dev = 0.0f64;
        for _ in 0..samples {
            let x = unit_vector(&mut rng, dim);
            let closed = self.polar(&x);
            let numeric = self.polar_via_maximization(&x, 1);
            residual = residual.max((closed - numeric).abs() / closed.max(1e-300));
            let g = self.polar_gradient(&x);
            dual_unit_dev = dual_unit_dev.max((self.norm.eval(&g) - 1.0).abs());
        }
        self.duality_residual = residual;
        let unit_tol = if analytic { 1e-6 } else { 1e-3 };
        if dual_unit_dev > unit_tol {
            return Err(Error::InvalidNorm(format!(
                "F(∇F°) deviates from 1 by {dual_unit_dev} on samples"
            )));
        }
        Ok(())
    }

    fn hessian_f2_min_eig(&self, x: &[f64]) -> f64 {
        let dim = self.norm.dim;
        let f2 = |y: &[f64]| {
            let v = self.norm.eval(y);
            v * v
        };
        let h = 1e-4;
        let mut m = DMatrix::zeros(dim, dim);
        let mut y = x.to_vec();
        let f0 = f2(&y);
        for i in 0..dim {
            // diagonal
            y[i] = x[i] + h;
            let fp = f2(&y);
            y[i] = x[i] - h;
            let fm = f2(&y);
            y[i] = x[i];
            m[(i, i)] = (fp - 2.0 * f0 + fm) / (h * h);
            for j in (i + 1)..dim {
                y[i] = x[i] + h;
                y[j] = x[j] + h;
                let fpp = f2(&y);
                y[j] = x[j] - h;
                let fpm = f2(&y);
                y[i] = x[i] - h;
                let fmm = f2(&y);
                y[j] = x[j] + h;
                let fmp = f2(&y);
                y[i] = x[i];
                y[j] = x[j];
                let v = (fpp - fpm - fmp + fmm) / (4.0 * h * h);
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        let eig = m.symmetric_eigen();
        eig.eigenvalues.iter().fold(f64::INFINITY, |a, &b| a.min(b))
    }

    pub fn dim(&self) -> usize {
        self.norm.dim
    }

    pub fn label(&self) -> &str {
        self.norm.label()
    }

    pub fn norm(&self) -> &Norm {
        &self.norm
    }

    pub fn duality_residual(&self) -> f64 {
        self.duality_residual
    }

    pub fn min_hessian_eigenvalue(&self) -> f64 {
        self.min_hessian_eig
    }

    pub fn primal(&self, xi: &[f64]) -> f64 {
        self.norm.eval(xi)
    }

    pub fn primal_gradient(&self, xi: &[f64]) -> Vec<f64> {
        self.norm.gradient(xi)
    }

    /// F°(x). Closed form for the built-in variants, numeric maximization
    /// for custom norms. F°(0) = 0.
    pub fn polar(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.norm.dim);
        if x.iter().any(|v| !v.is_finite()) {
            panic!("polar evaluated at a non-finite point");
        }
        if euclid_norm(x) == 0.0 {
            return 0.0;
        }
        match &self.norm.kind {
            NormKind::Euclidean => euclid_norm(x),
            NormKind::Ellipsoid { .. } => {
                let ai = self.a_inv.as_ref().unwrap();
                let v = DMatrix::from_column_slice(self.norm.dim, 1, x);
                ((&v.transpose() * ai * &v)[(0, 0)]).max(0.0).sqrt()
            }
            NormKind::PNorm { .. } => lp_norm(x, self.dual_p.unwrap()),
            NormKind::Custom { .. } => self.polar_via_maximization(x, 0),
        }
    }

    /// Polar via direct maximization of x·ξ over {F(ξ) <= 1}, independent of
    /// any closed form. `level` >= 1 doubles the direction grid and start
    /// count (used for validation and oracle comparisons).
    pub fn polar_via_maximization(&self, x: &[f64], level: u32) -> f64 {
        let dim = self.norm.dim;
        let scale = euclid_norm(x);
        if scale == 0.0 {
            return 0.0;
        }
        let xs: Vec<f64> = x.iter().map(|v| v / scale).collect();
        let obj = |w: &[f64]| dot(&xs, w).abs() / self.norm.eval(w);
        let value = if dim == 2 {
            let cells = 128usize << level;
            let mut best_i = 0;
            let mut best = f64::NEG_INFINITY;
            for i in 0..cells {
                let th = std::f64::consts::PI * (i as f64 + 0.5) / cells as f64;
                let v = obj(&[th.cos(), th.sin()]);
                if v > best {
                    best = v;
                    best_i = i;
                }
            }
            let width = std::f64::consts::PI / cells as f64;
            let centre = std::f64::consts::PI * (best_i as f64 + 0.5) / cells as f64;
            let (_, v) = golden_max(
                |th| obj(&[th.cos(), th.sin()]),
                centre - 1.5 * width,
                centre + 1.5 * width,
                80,
            );
            v.max(best)
        } else {
            let starts = POLAR_STARTS_PER_DIM * dim * (1 << level);
            let dirs = spread_directions(dim, starts);
            let mut ranked: Vec<(f64, &Vec<f64>)> =
                dirs.iter().map(|d| (obj(d), d)).collect();
            ranked.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
            let mut best = ranked[0].0;
            for (_, d) in ranked.iter().take(3) {
                let (_, v) = sphere_ascent(&obj, d, 10, 70);
                best = best.max(v);
            }
            best
        };
        scale * value
    }

    /// ∇F°(x) for x != 0; finite differences when no closed form exists.
    pub fn polar_gradient(&self, x: &[f64]) -> Vec<f64> {
        debug_assert!(euclid_norm(x) > 0.0, "polar gradient at the origin");
        match &self.norm.kind {
            NormKind::Euclidean => {
                let n = euclid_norm(x);
                x.iter().map(|v| v / n).collect()
            }
            NormKind::Ellipsoid { .. } => {
                let ai = self.a_inv.as_ref().unwrap();
                let fp = self.polar(x);
                let v = DMatrix::from_column_slice(self.norm.dim, 1, x);
                let aiv = ai * v;
                aiv.column(0).iter().map(|y| y / fp).collect()
            }
            NormKind::PNorm { .. } => lp_gradient(x, self.dual_p.unwrap()),
            NormKind::Custom { .. } => {
                fd_gradient(&|y: &[f64]| self.polar(y), x, DEFAULT_FD_STEP)
            }
        }
    }

    /// Whether the polar (and its gradient) come from a closed form.
    pub fn has_closed_form_polar(&self) -> bool {
        !matches!(self.norm.kind, NormKind::Custom { .. })
    }

    /// Volume of the Wulff ball {F° < 1}. Closed form where available,
    /// deterministic boundary quadrature in the plane, Monte Carlo rejection
    /// otherwise.
    pub fn wulff_volume(&self, budget: u64) -> Result<QuadResult> {
        let n = self.norm.dim as u32;
        match &self.norm.kind {
            NormKind::Euclidean => Ok(QuadResult::exact(unit_ball_volume(n))),
            NormKind::Ellipsoid { a } => {
                let det = a.determinant();
                Ok(QuadResult::exact(unit_ball_volume(n) * det.sqrt()))
            }
            NormKind::PNorm { .. } => {
                Ok(QuadResult::exact(lq_ball_volume(n, self.dual_p.unwrap())))
            }
            NormKind::Custom { .. } => {
                if self.norm.dim == 2 {
                    // (1/n) ∮ rho(phi)^n dphi with rho = 1/F°(e(phi))
                    let f = |phi: f64| {
                        let e = [phi.cos(), phi.sin()];
                        let rho = 1.0 / self.polar(&e);
                        0.5 * rho * rho
                    };
                    let q = crate::quad::integrate_interval(
                        &f,
                        0.0,
                        2.0 * std::f64::consts::PI,
                        1e-10,
                        budget.max(20_000),
                    )?;
                    Ok(q)
                } else {
                    self.wulff_volume_monte_carlo(budget.max(100_000), 0x77ff)
                }
            }
        }
    }

    fn wulff_volume_monte_carlo(&self, budget: u64, seed: u64) -> Result<QuadResult> {
        let dim = self.norm.dim;
        let half = self.euclidean_outer_radius(1.0);
        let vol_box = (2.0 * half).powi(dim as i32);
        let mut rng = rng_from_seed(derive_seed(seed, &["wulff-mc", self.label()]));
        let mut hits = 0u64;
        for _ in 0..budget {
            let x: Vec<f64> = (0..dim).map(|_| rng.gen_range(-half..half)).collect();
            if self.polar(&x) < 1.0 {
                hits += 1;
            }
        }
        let p = hits as f64 / budget as f64;
        let err = vol_box * (p * (1.0 - p) / budget as f64).sqrt();
        Ok(QuadResult {
            value: vol_box * p,
            error_estimate: err,
            evaluations: budget,
            converged: true,
        })
    }

    /// Euclidean radius of a box guaranteed to contain {F° <= r}.
    pub fn euclidean_outer_radius(&self, r: f64) -> f64 {
        match &self.norm.kind {
            NormKind::Euclidean => r,
            NormKind::Ellipsoid { a } => {
                // max |x| over x·A^{-1}x <= r^2 is r * sqrt(lambda_max(A))
                let eig = a.clone().symmetric_eigen();
                let lmax = eig.eigenvalues.iter().fold(0.0f64, |m, &v| m.max(v));
                r * lmax.sqrt()
            }
            NormKind::PNorm { .. } => {
                let q = self.dual_p.unwrap();
                // ||x||_2 <= n^{max(0, 1/2 - 1/q)} ||x||_q
                let nf = self.norm.dim as f64;
                r * nf.powf((0.5 - 1.0 / q).max(0.0))
            }
            NormKind::Custom { .. } => r / self.sphere_alpha_polar,
        }
    }

    /// Extremes of F, F° and |∇F°| over the Euclidean unit sphere by dense
    /// sampling with golden-section (plane) or coordinate ascent (higher
    /// dimensions) refinement.
    pub fn equivalence_constants(&self, samples: usize) -> EquivalenceConstants {
        let samples = samples.max(1024);
        let f_primal = |u: &[f64]| self.norm.eval(u);
        let f_polar = |u: &[f64]| self.polar(u);
        let f_grad = |u: &[f64]| euclid_norm(&self.polar_gradient(u));
        let (alpha, beta) = self.sphere_range(&f_primal, samples);
        let (alpha_polar, beta_polar) = self.sphere_range(&f_polar, samples);
        let (_, beta_tilde) = self.sphere_range(&f_grad, samples);
        EquivalenceConstants {
            alpha,
            beta,
            alpha_polar,
            beta_polar,
            beta_tilde,
        }
    }

    fn sphere_range<F: Fn(&[f64]) -> f64>(&self, f: &F, samples: usize) -> (f64, f64) {
        let dim = self.norm.dim;
        if dim == 2 {
            let cells = samples.max(1024);
            let mut best_min = (f64::INFINITY, 0usize);
            let mut best_max = (f64::NEG_INFINITY, 0usize);
            for i in 0..cells {
                let th = std::f64::consts::PI * (i as f64 + 0.5) / cells as f64;
                let v = f(&[th.cos(), th.sin()]);
                if v < best_min.0 {
                    best_min = (v, i);
                }
                if v > best_max.0 {
                    best_max = (v, i);
                }
            }
            let width = std::f64::consts::PI / cells as f64;
            let refine = |i: usize, sign: f64| {
                let centre = std::f64::consts::PI * (i as f64 + 0.5) / cells as f64;
                let (_, v) = golden_max(
                    |th| sign * f(&[th.cos(), th.sin()]),
                    centre - 1.5 * width,
                    centre + 1.5 * width,
                    80,
                );
                sign * v
            };
            (
                refine(best_min.1, -1.0).min(best_min.0),
                refine(best_max.1, 1.0).max(best_max.0),
            )
        } else {
            let dirs = spread_directions(dim, samples);
            let mut best_min = (f64::INFINITY, 0usize);
            let mut best_max = (f64::NEG_INFINITY, 0usize);
            for (i, d) in dirs.iter().enumerate() {
                let v = f(d);
                if v < best_min.0 {
                    best_min = (v, i);
                }
                if v > best_max.0 {
                    best_max = (v, i);
                }
            }
            let neg = |u: &[f64]| -f(u);
            let (_, vmin) = sphere_ascent(&neg, &dirs[best_min.1], 8, 60);
            let (_, vmax) = sphere_ascent(f, &dirs[best_max.1], 8, 60);
            ((-vmin).min(best_min.0), vmax.max(best_max.0))
        }
    }

    /// Minimum relative slack of |ξ·x| <= F(ξ) F°(x) over random sample
    /// pairs; negative values signal a violation.
    pub fn cauchy_schwarz_slack(&self, samples: usize, seed: u64) -> f64 {
        let dim = self.norm.dim;
        let mut rng = rng_from_seed(derive_seed(seed, &["cauchy-schwarz", self.label()]));
        let mut min_slack = f64::INFINITY;
        for _ in 0..samples {
            let xi: Vec<f64> = unit_vector(&mut rng, dim)
                .iter()
                .map(|v| v * rng.gen_range(0.1..10.0f64))
                .collect();
            let x: Vec<f64> = unit_vector(&mut rng, dim)
                .iter()
                .map(|v| v * rng.gen_range(0.1..10.0f64))
                .collect();
            let bound = self.norm.eval(&xi) * self.polar(&x);
            let slack = (bound - dot(&xi, &x).abs()) / bound;
            min_slack = min_slack.min(slack);
        }
        min_slack
    }

    /// Polar of the polar against the original norm on random directions.
    pub fn bipolar_residual(&self, samples: usize, seed: u64) -> f64 {
        let dim = self.norm.dim;
        // evaluate F° as a norm in its own right
        let polar_norm = |y: &[f64]| self.polar(y);
        let mut rng = rng_from_seed(derive_seed(seed, &["bipolar", self.label()]));
        let mut worst = 0.0f64;
        for _ in 0..samples {
            let xi = unit_vector(&mut rng, dim);
            // (F°)°(ξ) by direct maximization of ξ·y / F°(y)
            let obj = |w: &[f64]| dot(&xi, w).abs() / polar_norm(w);
            let bipolar = if dim == 2 {
                let cells = 256;
                let mut best = f64::NEG_INFINITY;
                let mut best_i = 0;
                for i in 0..cells {
                    let th = std::f64::consts::PI * (i as f64 + 0.5) / cells as f64;
                    let v = obj(&[th.cos(), th.sin()]);
                    if v > best {
                        best = v;
                        best_i = i;
                    }
                }
                let width = std::f64::consts::PI / cells as f64;
                let centre = std::f64::consts::PI * (best_i as f64 + 0.5) / cells as f64;
                golden_max(
                    |th| obj(&[th.cos(), th.sin()]),
                    centre - 1.5 * width,
                    centre + 1.5 * width,
                    80,
                )
                .1
                .max(best)
            } else {
                let dirs = spread_directions(dim, 16 * dim);
                let mut best = f64::NEG_INFINITY;
                let mut arg = &dirs[0];
                for d in &dirs {
                    let v = obj(d);
                    if v > best {
                        best = v;
                        arg = d;
                    }
                }
                sphere_ascent(&obj, arg, 8, 60).1.max(best)
            };
            let f = self.norm.eval(&xi);
            worst = worst.max((bipolar - f).abs() / f);
        }
        worst
    }
}

/// Maximum residuals of the six pointwise identities tying a norm to its
/// polar, over `samples` points drawn from the annulus 0.5 <= |x| <= 2.
/// Divergences are formed by central differences of the exact (or
/// numerically polared) fields with step `fd_step * |x|`.
pub fn check_identities(
    pair: &PolarPair,
    samples: usize,
    fd_step: f64,
    seed: u64,
) -> Result<IdentityReport> {
    if !(fd_step > 0.0) {
        return Err(Error::Precondition("fd_step must be positive".into()));
    }
    let dim = pair.dim();
    let nf = dim as f64;
    let mut rng = rng_from_seed(derive_seed(seed, &["identities", pair.label()]));
    let mut rep = IdentityReport {
        euler: 0.0,
        hessian_action: 0.0,
        div_ratio: 0.0,
        div_power: 0.0,
        div_grad_weighted: 0.0,
        dual_unit_map: 0.0,
        samples,
        fd_step,
    };

    let divergence = |field: &dyn Fn(&[f64]) -> Vec<f64>, x: &[f64], h: f64| -> f64 {
        let mut acc = 0.0;
        let mut y = x.to_vec();
        for i in 0..x.len() {
            y[i] = x[i] + h;
            let vp = field(&y)[i];
            y[i] = x[i] - h;
            let vm = field(&y)[i];
            y[i] = x[i];
            acc += (vp - vm) / (2.0 * h);
        }
        acc
    };

    for _ in 0..samples {
        let u = unit_vector(&mut rng, dim);
        let r: f64 = rng.gen_range(0.5..2.0);
        let x: Vec<f64> = u.iter().map(|v| v * r).collect();
        let h = fd_step * r;
        let fp = pair.polar(&x);
        let g = pair.polar_gradient(&x);

        // Euler: ∇F°(x)·x = F°(x)
        rep.euler = rep.euler.max((dot(&g, &x) - fp).abs() / fp);

        // Hessian action on x vanishes by zero-homogeneity of ∇F°
        let mut hess_x = vec![0.0; dim];
        let mut y = x.clone();
        for j in 0..dim {
            y[j] = x[j] + h;
            let gp = pair.polar_gradient(&y);
            y[j] = x[j] - h;
            let gm = pair.polar_gradient(&y);
            y[j] = x[j];
            for (i, hx) in hess_x.iter_mut().enumerate() {
                *hx += (gp[i] - gm[i]) / (2.0 * h) * x[j];
            }
        }
        rep.hessian_action = rep.hessian_action.max(euclid_norm(&hess_x));

        // div(x / F°) = (n-1)/F°
        let field_ratio = |y: &[f64]| -> Vec<f64> {
            let f = pair.polar(y);
            y.iter().map(|v| v / f).collect()
        };
        let d1 = divergence(&field_ratio, &x, h);
        rep.div_ratio = rep.div_ratio.max((d1 - (nf - 1.0) / fp).abs());

        // div(x / F°^n) = 0
        let field_power = |y: &[f64]| -> Vec<f64> {
            let f = pair.polar(y).powi(dim as i32);
            y.iter().map(|v| v / f).collect()
        };
        rep.div_power = rep.div_power.max(divergence(&field_power, &x, h).abs());

        // div(x |∇F°| / F°^n) = 0
        let field_weighted = |y: &[f64]| -> Vec<f64> {
            let f = pair.polar(y).powi(dim as i32);
            let gn = euclid_norm(&pair.polar_gradient(y));
            y.iter().map(|v| v * gn / f).collect()
        };
        rep.div_grad_weighted = rep
            .div_grad_weighted
            .max(divergence(&field_weighted, &x, h).abs());

        // F_ξ(∇F°(x)) = x / F°(x)
        let fx = pair.primal_gradient(&g);
        let mut dev = 0.0;
        for i in 0..dim {
            dev += (fx[i] - x[i] / fp).powi(2);
        }
        rep.dual_unit_map = rep.dual_unit_map.max(dev.sqrt());
    }
    Ok(rep)
}

fn lp_norm(x: &[f64], p: f64) -> f64 {
    // rescale by the max to avoid overflow for large exponents
    let m = x.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if m == 0.0 {
        return 0.0;
    }
    let s: f64 = x.iter().map(|v| (v.abs() / m).powf(p)).sum();
    m * s.powf(1.0 / p)
}

fn lp_gradient(x: &[f64], p: f64) -> Vec<f64> {
    let n = lp_norm(x, p);
    x.iter()
        .map(|v| v.signum() * (v.abs() / n).powf(p - 1.0))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn euclid2() -> PolarPair {
        PolarPair::new(Norm::euclidean(2)).unwrap()
    }

    fn ellipse41() -> PolarPair {
        PolarPair::new(Norm::ellipsoid(2, &[4.0, 0.0, 0.0, 1.0]).unwrap()).unwrap()
    }

    fn l4() -> PolarPair {
        PolarPair::new(Norm::p_norm(2, 4.0).unwrap()).unwrap()
    }

    #[test]
    fn polar_closed_forms() {
        assert!((euclid2().polar(&[3.0, 4.0]) - 5.0).abs() < 1e-14);
        // polar of the l4 norm is the l4/3 norm
        let expect = 2f64.powf(0.75);
        assert!((l4().polar(&[1.0, 1.0]) - expect).abs() < 1e-14);
        assert!((ellipse41().polar(&[2.0, 0.0]) - 1.0).abs() < 1e-14);
        assert_eq!(euclid2().polar(&[0.0, 0.0]), 0.0);
    }

    #[test]
    fn custom_polar_matches_ellipsoid_closed_form() {
        let eval: Evaluator = Arc::new(|xi: &[f64]| {
            (4.0 * xi[0] * xi[0] + xi[1] * xi[1]).sqrt()
        });
        let pair = PolarPair::new(Norm::custom(2, "custom-ellipse", eval, None)).unwrap();
        let expect = (0.25f64 + 1.0).sqrt();
        assert!(
            (pair.polar(&[1.0, 1.0]) - expect).abs() < 1e-8,
            "got {}",
            pair.polar(&[1.0, 1.0])
        );
    }

    #[test]
    fn wulff_volumes() {
        assert!((euclid2().wulff_volume(0).unwrap().value - std::f64::consts::PI).abs() < 1e-12);
        assert!(
            (ellipse41().wulff_volume(0).unwrap().value - 2.0 * std::f64::consts::PI).abs()
                < 1e-12
        );
        // Wulff ball of the l4 norm is the l4/3 ball
        let expect = lq_ball_volume(2, 4.0 / 3.0);
        assert!((l4().wulff_volume(0).unwrap().value - expect).abs() < 1e-12);
    }

    #[test]
    fn equivalence_constants_euclidean_and_ellipsoid() {
        let e = euclid2().equivalence_constants(2048);
        for v in [e.alpha, e.beta, e.alpha_polar, e.beta_polar, e.beta_tilde] {
            assert!((v - 1.0).abs() < 1e-9, "euclidean constant {v}");
        }
        let c = ellipse41().equivalence_constants(4096);
        assert!((c.alpha - 1.0).abs() < 1e-7);
        assert!((c.beta - 2.0).abs() < 1e-7);
        assert!((c.alpha_polar - 0.5).abs() < 1e-7);
        assert!((c.beta_polar - 1.0).abs() < 1e-7);
        assert!((c.beta_tilde - 1.0).abs() < 1e-6);
        assert!(c.beta_tilde >= c.alpha_polar);
    }

    #[test]
    fn equivalence_constants_l4() {
        // min of ||.||_4 on the circle is 2^{-1/4} (diagonal), max is 1;
        // the polar l4/3 swaps: min 1, max 2^{1/4}
        let c = l4().equivalence_constants(4096);
        assert!((c.alpha - 2f64.powf(-0.25)).abs() < 1e-8, "alpha {}", c.alpha);
        assert!((c.beta - 1.0).abs() < 1e-8);
        assert!((c.alpha_polar - 1.0).abs() < 1e-8);
        assert!((c.beta_polar - 2f64.powf(0.25)).abs() < 1e-8);
    }

    #[test]
    fn identities_analytic_path() {
        for pair in [euclid2(), ellipse41(), l4()] {
            let rep = check_identities(&pair, 100, 1e-5, 42).unwrap();
            assert!(
                rep.max_residual() < 1e-6,
                "{}: {:?}",
                pair.label(),
                rep.residuals()
            );
        }
    }

    #[test]
    fn identities_custom_fd_path() {
        let eval: Evaluator = Arc::new(|xi: &[f64]| euclid_norm(xi));
        let pair = PolarPair::new(Norm::custom(2, "custom-euclid", eval, None)).unwrap();
        let rep = check_identities(&pair, 60, 1e-5, 42).unwrap();
        assert!(
            rep.max_residual() < 1e-4,
            "custom residuals {:?}",
            rep.residuals()
        );
    }

    #[test]
    fn invalid_norms_rejected() {
        assert!(Norm::p_norm(2, 1.0).is_err());
        assert!(Norm::ellipsoid(2, &[1.0, 0.0, 0.0, -1.0]).is_err());
        // an odd "norm" fails evenness validation
        let eval: Evaluator = Arc::new(|xi: &[f64]| (xi[0].abs() + xi[1].abs()) * (1.1 + 0.2 * xi[0].signum()));
        assert!(PolarPair::new(Norm::custom(2, "odd", eval, None)).is_err());
    }

    #[test]
    fn cauchy_schwarz_and_bipolar() {
        for pair in [euclid2(), ellipse41(), l4()] {
            assert!(pair.cauchy_schwarz_slack(1000, 3) >= -1e-10);
            assert!(pair.bipolar_residual(32, 3) < 1e-7, "{}", pair.label());
        }
    }
}
