//! Bounded domains measured by the polar norm.
//!
//! The anisotropic inner radius `R_Ω = sup_Ω F°` scales every weight
//! argument, so a domain is always bound to the norm pair it is measured
//! against. All theorems need the origin inside the domain.

use std::sync::Arc;

use rand::Rng;

use crate::error::{Error, Result};
use crate::norm::PolarPair;
use crate::sampling::{derive_seed, rng_from_seed};

pub type Membership = Arc<dyn Fn(&[f64]) -> bool + Send + Sync>;

#[derive(Clone)]
pub enum DomainKind {
    /// {F° < radius}
    WulffBall { radius: f64 },
    /// arbitrary bounded region given by a membership predicate and a
    /// Euclidean bounding box
    Custom {
        member: Membership,
        lo: Vec<f64>,
        hi: Vec<f64>,
    },
}

#[derive(Clone)]
pub struct DomainSpec {
    pub pair: Arc<PolarPair>,
    kind: DomainKind,
    r_omega: f64,
    contains_origin: bool,
    label: String,
}

impl DomainSpec {
    pub fn wulff_ball(pair: Arc<PolarPair>, radius: f64) -> Result<DomainSpec> {
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::Domain(format!(
                "wulff ball radius must be positive and finite, got {radius}"
            )));
        }
        let label = format!("wulff_ball[{radius}]");
        Ok(DomainSpec {
            pair,
            kind: DomainKind::WulffBall { radius },
            r_omega: radius,
            contains_origin: true,
            label,
        })
    }

    /// Custom bounded domain. `R_Ω` is estimated by seeded sampling of the
    /// bounding box followed by a short refinement along the best ray.
    pub fn custom(
        pair: Arc<PolarPair>,
        label: impl Into<String>,
        member: Membership,
        lo: Vec<f64>,
        hi: Vec<f64>,
        samples: usize,
        seed: u64,
    ) -> Result<DomainSpec> {
        let dim = pair.dim();
        if lo.len() != dim || hi.len() != dim {
            return Err(Error::Domain("bounding box dimension mismatch".into()));
        }
        if lo.iter().zip(&hi).any(|(a, b)| !(a < b) || !a.is_finite() || !b.is_finite()) {
            return Err(Error::Domain("degenerate bounding box".into()));
        }
        let origin = vec![0.0; dim];
        let contains_origin = member(&origin);
        let mut rng = rng_from_seed(derive_seed(seed, &["domain-r-omega"]));
        let mut best = 0.0f64;
        let mut best_x: Option<Vec<f64>> = None;
        let mut hits = 0usize;
        for _ in 0..samples.max(4096) {
            let x: Vec<f64> = lo
                .iter()
                .zip(&hi)
                .map(|(a, b)| rng.gen_range(*a..*b))
                .collect();
            if member(&x) {
                hits += 1;
                let v = pair.polar(&x);
                if v > best {
                    best = v;
                    best_x = Some(x);
                }
            }
        }
        if hits == 0 {
            return Err(Error::Domain(
                "membership predicate rejected every bounding-box sample".into(),
            ));
        }
        // coordinate pattern search from the best sample toward sup F°
        if let Some(mut x) = best_x {
            let mut step: f64 = lo
                .iter()
                .zip(&hi)
                .map(|(a, b)| b - a)
                .fold(0.0, f64::max)
                * 0.05;
            for _ in 0..80 {
                let mut improved = false;
                for i in 0..dim {
                    for sign in [1.0, -1.0] {
                        let mut y = x.clone();
                        y[i] += sign * step;
                        if member(&y) && pair.polar(&y) > best {
                            best = pair.polar(&y);
                            x = y;
                            improved = true;
                        }
                    }
                }
                if !improved {
                    step *= 0.5;
                    if step < 1e-12 {
                        break;
                    }
                }
            }
        }
        Ok(DomainSpec {
            pair,
            kind: DomainKind::Custom { member, lo, hi },
            r_omega: best,
            contains_origin,
            label: label.into(),
        })
    }

    pub fn dim(&self) -> usize {
        self.pair.dim()
    }

    pub fn kind(&self) -> &DomainKind {
        &self.kind
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Anisotropic inner radius sup_Ω F°.
    pub fn r_omega(&self) -> f64 {
        self.r_omega
    }

    pub fn contains_origin(&self) -> bool {
        self.contains_origin
    }

    pub fn is_wulff_ball(&self) -> bool {
        matches!(self.kind, DomainKind::WulffBall { .. })
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        match &self.kind {
            DomainKind::WulffBall { radius } => self.pair.polar(x) < *radius,
            DomainKind::Custom { member, .. } => member(x),
        }
    }

    /// Euclidean bounding box, guaranteed to contain the domain.
    pub fn bounding_box(&self) -> (Vec<f64>, Vec<f64>) {
        match &self.kind {
            DomainKind::WulffBall { radius } => {
                let half = self.pair.euclidean_outer_radius(*radius);
                (vec![-half; self.dim()], vec![half; self.dim()])
            }
            DomainKind::Custom { lo, hi, .. } => (lo.clone(), hi.clone()),
        }
    }

    /// Lebesgue volume. Exact for Wulff balls, Monte Carlo otherwise.
    pub fn volume(&self, budget: u64, seed: u64) -> Result<crate::quad::QuadResult> {
        match &self.kind {
            DomainKind::WulffBall { radius } => {
                let w = self.pair.wulff_volume(budget)?;
                let n = self.dim() as i32;
                Ok(crate::quad::QuadResult {
                    value: w.value * radius.powi(n),
                    error_estimate: w.error_estimate * radius.powi(n),
                    evaluations: w.evaluations,
                    converged: w.converged,
                })
            }
            DomainKind::Custom { member, lo, hi } => {
                let mut rng = rng_from_seed(derive_seed(seed, &["domain-volume"]));
                let vol_box: f64 = lo.iter().zip(hi).map(|(a, b)| b - a).product();
                let n = budget.max(10_000);
                let mut hits = 0u64;
                for _ in 0..n {
                    let x: Vec<f64> = lo
                        .iter()
                        .zip(hi)
                        .map(|(a, b)| rng.gen_range(*a..*b))
                        .collect();
                    if member(&x) {
                        hits += 1;
                    }
                }
                let p = hits as f64 / n as f64;
                Ok(crate::quad::QuadResult {
                    value: vol_box * p,
                    error_estimate: vol_box * (p * (1.0 - p) / n as f64).sqrt(),
                    evaluations: n,
                    converged: true,
                })
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::norm::Norm;

    #[test]
    fn wulff_ball_basics() {
        let pair = Arc::new(PolarPair::new(Norm::euclidean(2)).unwrap());
        let d = DomainSpec::wulff_ball(pair, 2.0).unwrap();
        assert_eq!(d.r_omega(), 2.0);
        assert!(d.contains(&[1.9, 0.0]));
        assert!(!d.contains(&[2.1, 0.0]));
        assert!(d.contains_origin());
        let v = d.volume(0, 0).unwrap();
        assert!((v.value - 4.0 * std::f64::consts::PI).abs() < 1e-12);
    }

    #[test]
    fn custom_domain_r_omega() {
        let pair = Arc::new(PolarPair::new(Norm::euclidean(2)).unwrap());
        // unit square centred at the origin: sup |x| attained at a corner
        let member: Membership =
            Arc::new(|x: &[f64]| x[0].abs() < 0.5 && x[1].abs() < 0.5);
        let d = DomainSpec::custom(
            pair,
            "square",
            member,
            vec![-0.5, -0.5],
            vec![0.5, 0.5],
            20_000,
            9,
        )
        .unwrap();
        let expect = 0.5f64.hypot(0.5);
        assert!((d.r_omega() - expect).abs() < 2e-3, "got {}", d.r_omega());
        assert!(d.contains_origin());
    }

    #[test]
    fn degenerate_domains_rejected() {
        let pair = Arc::new(PolarPair::new(Norm::euclidean(2)).unwrap());
        assert!(DomainSpec::wulff_ball(pair.clone(), -1.0).is_err());
        let member: Membership = Arc::new(|_: &[f64]| false);
        assert!(DomainSpec::custom(
            pair,
            "empty",
            member,
            vec![-1.0, -1.0],
            vec![1.0, 1.0],
            5000,
            1
        )
        .is_err());
    }
}
