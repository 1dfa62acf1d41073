//! Numerical calculus for strongly convex Finsler norms: polar norms and
//! Wulff geometry, logarithmically weighted Hardy differences, and
//! machine-checking of the associated sharp-constant inequalities over
//! families of norms and test functions.

pub mod campaign;
pub mod domain;
pub mod error;
pub mod functionals;
pub mod logweight;
pub mod norm;
pub mod profile;
pub mod quad;
pub mod sampling;
pub mod special;
pub mod testfn;
pub mod verify;

pub use domain::DomainSpec;
pub use error::{Error, Result};
pub use functionals::{ConstantsBundle, HardyKind, MeasureTag, X2Power};
pub use norm::{check_identities, EquivalenceConstants, Norm, PolarPair};
pub use profile::RadialProfile;
pub use quad::{
    compute_hr, integrate_domain, integrate_radial, integrate_wulff_radial, OriginFlag,
    QuadResult, RadialIntegrand,
};
pub use testfn::TestFunction;
pub use verify::CheckReport;
