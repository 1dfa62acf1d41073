//! Campaign configuration: which norms, profiles and checks to run, with
//! explicit seeds and budgets. The file format is TOML restricted to
//! sections, scalars and flat lists; `parse_config` reports every problem
//! it finds, not just the first.

use std::collections::BTreeSet;
use std::io::Write;

use crate::error::{Error, Result};
use crate::functionals::MeasureTag;
use crate::norm::{Norm, PolarPair};
use crate::verify::CheckReport;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub enum NormConfig {
    Euclidean { dim: usize },
    Ellipsoid { dim: usize, matrix: Vec<f64> },
    PNorm { dim: usize, p: f64 },
}

impl NormConfig {
    pub fn build(&self) -> Result<PolarPair> {
        match self {
            NormConfig::Euclidean { dim } => PolarPair::new(Norm::euclidean(*dim)),
            NormConfig::Ellipsoid { dim, matrix } => {
                PolarPair::new(Norm::ellipsoid(*dim, matrix)?)
            }
            NormConfig::PNorm { dim, p } => PolarPair::new(Norm::p_norm(*dim, *p)?),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            NormConfig::Euclidean { dim }
            | NormConfig::Ellipsoid { dim, .. }
            | NormConfig::PNorm { dim, .. } => *dim,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ProfileConfig {
    Affine,
    Quadratic,
    Moser { k_log: f64 },
    LogCut { r0: f64 },
    Poly { coeffs: Vec<f64> },
    Zero,
    /// non-radial: radial base times an angular modulation
    Modulated { base: Box<ProfileConfig> },
}

impl ProfileConfig {
    pub fn label(&self) -> String {
        match self {
            ProfileConfig::Affine => "affine".into(),
            ProfileConfig::Quadratic => "quadratic".into(),
            ProfileConfig::Moser { k_log } => format!("moser[{k_log}]"),
            ProfileConfig::LogCut { r0 } => format!("log_cut[{r0:e}]"),
            ProfileConfig::Poly { coeffs } => format!(
                "poly[{}]",
                coeffs
                    .iter()
                    .map(|c| format!("{c:.3}"))
                    .collect::<Vec<_>>()
                    .join(",")
            ),
            ProfileConfig::Zero => "zero".into(),
            ProfileConfig::Modulated { base } => format!("modulated[{}]", base.label()),
        }
    }

    pub fn base_profile(&self) -> crate::profile::RadialProfile {
        match self {
            ProfileConfig::Affine => crate::profile::RadialProfile::affine(),
            ProfileConfig::Quadratic => crate::profile::RadialProfile::quadratic(),
            ProfileConfig::Moser { k_log } => crate::profile::RadialProfile::moser(*k_log),
            ProfileConfig::LogCut { r0 } => crate::profile::RadialProfile::log_cut(*r0),
            ProfileConfig::Poly { coeffs } => crate::profile::RadialProfile::poly(coeffs),
            ProfileConfig::Zero => crate::profile::RadialProfile::zero(),
            ProfileConfig::Modulated { base } => base.base_profile(),
        }
    }

    pub fn is_modulated(&self) -> bool {
        matches!(self, ProfileConfig::Modulated { .. })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum CheckConfig {
    ProfileBound1d,
    VRadialEnergy { measure: MeasureTag },
    VGradientEnergy { measure: MeasureTag },
    HardyWeightImproved,
    LqGrowth { q: f64 },
    RieszKernelSup { q: f64 },
    RadialSharpExponent,
}

impl CheckConfig {
    pub fn id(&self) -> &'static str {
        match self {
            CheckConfig::ProfileBound1d => "profile_bound_1d",
            CheckConfig::VRadialEnergy { .. } => "v_radial_energy",
            CheckConfig::VGradientEnergy { .. } => "v_gradient_energy",
            CheckConfig::HardyWeightImproved => "hardy_weight_improved",
            CheckConfig::LqGrowth { .. } => "lq_growth",
            CheckConfig::RieszKernelSup { .. } => "riesz_kernel_sup",
            CheckConfig::RadialSharpExponent => "radial_sharp_exponent",
        }
    }

    /// Domain-level checks run once per norm instead of per profile.
    pub fn per_profile(&self) -> bool {
        !matches!(self, CheckConfig::RieszKernelSup { .. })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CampaignConfig {
    pub seed: u64,
    pub tolerance: f64,
    pub budget: u64,
    pub jobs: usize,
    pub output: Option<String>,
    pub format: ReportFormat,
    pub norms: Vec<NormConfig>,
    pub profiles: Vec<ProfileConfig>,
    pub checks: Vec<CheckConfig>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Csv,
}

/// The built-in campaign: three norms, four profiles, six checks.
pub fn default_campaign() -> CampaignConfig {
    CampaignConfig {
        seed: 7,
        tolerance: 1e-9,
        budget: 150_000,
        jobs: 1,
        output: None,
        format: ReportFormat::Json,
        norms: vec![
            NormConfig::Euclidean { dim: 2 },
            NormConfig::Ellipsoid {
                dim: 2,
                matrix: vec![4.0, 0.0, 0.0, 1.0],
            },
            NormConfig::PNorm { dim: 2, p: 4.0 },
        ],
        profiles: vec![
            ProfileConfig::Affine,
            ProfileConfig::Quadratic,
            ProfileConfig::Moser { k_log: 2.0 },
            ProfileConfig::Modulated {
                base: Box::new(ProfileConfig::Affine),
            },
        ],
        checks: vec![
            CheckConfig::ProfileBound1d,
            CheckConfig::VRadialEnergy {
                measure: MeasureTag::Lebesgue,
            },
            CheckConfig::VGradientEnergy {
                measure: MeasureTag::Lebesgue,
            },
            CheckConfig::HardyWeightImproved,
            CheckConfig::LqGrowth { q: 4.0 },
            CheckConfig::RadialSharpExponent,
        ],
    }
}

struct Parser {
    errors: Vec<String>,
}

impl Parser {
    fn err(&mut self, msg: impl Into<String>) {
        self.errors.push(msg.into());
    }

    fn float(&mut self, table: &toml::Table, key: &str, context: &str) -> Option<f64> {
        match table.get(key) {
            Some(toml::Value::Float(v)) => Some(*v),
            Some(toml::Value::Integer(v)) => Some(*v as f64),
            Some(_) => {
                self.err(format!("{context}: `{key}` must be a number"));
                None
            }
            None => {
                self.err(format!("{context}: missing key `{key}`"));
                None
            }
        }
    }

    fn uint(&mut self, table: &toml::Table, key: &str, context: &str) -> Option<u64> {
        match table.get(key) {
            Some(toml::Value::Integer(v)) if *v >= 0 => Some(*v as u64),
            Some(_) => {
                self.err(format!("{context}: `{key}` must be a nonnegative integer"));
                None
            }
            None => {
                self.err(format!("{context}: missing key `{key}`"));
                None
            }
        }
    }

    fn string<'a>(&mut self, table: &'a toml::Table, key: &str, context: &str) -> Option<&'a str> {
        match table.get(key) {
            Some(toml::Value::String(v)) => Some(v.as_str()),
            Some(_) => {
                self.err(format!("{context}: `{key}` must be a string"));
                None
            }
            None => {
                self.err(format!("{context}: missing key `{key}`"));
                None
            }
        }
    }

    fn float_list(&mut self, table: &toml::Table, key: &str, context: &str) -> Option<Vec<f64>> {
        match table.get(key) {
            Some(toml::Value::Array(items)) => {
                let mut out = Vec::with_capacity(items.len());
                for item in items {
                    match item {
                        toml::Value::Float(v) => out.push(*v),
                        toml::Value::Integer(v) => out.push(*v as f64),
                        _ => {
                            self.err(format!("{context}: `{key}` must contain numbers only"));
                            return None;
                        }
                    }
                }
                Some(out)
            }
            Some(_) => {
                self.err(format!("{context}: `{key}` must be a list of numbers"));
                None
            }
            None => {
                self.err(format!("{context}: missing key `{key}`"));
                None
            }
        }
    }

    fn check_known_keys(&mut self, table: &toml::Table, allowed: &[&str], context: &str) {
        let allowed: BTreeSet<&str> = allowed.iter().copied().collect();
        for key in table.keys() {
            if !allowed.contains(key.as_str()) {
                self.err(format!("{context}: unknown key `{key}`"));
            }
        }
    }
}

fn parse_profile(p: &mut Parser, table: &toml::Table, context: &str) -> Option<ProfileConfig> {
    let variant = p.string(table, "variant", context)?.to_string();
    match variant.as_str() {
        "affine" => {
            p.check_known_keys(table, &["variant"], context);
            Some(ProfileConfig::Affine)
        }
        "quadratic" => {
            p.check_known_keys(table, &["variant"], context);
            Some(ProfileConfig::Quadratic)
        }
        "zero" => {
            p.check_known_keys(table, &["variant"], context);
            Some(ProfileConfig::Zero)
        }
        "moser" => {
            p.check_known_keys(table, &["variant", "k_log"], context);
            let k_log = p.float(table, "k_log", context)?;
            if !(k_log > 0.0) {
                p.err(format!("{context}: moser profile needs k_log > 0"));
                return None;
            }
            Some(ProfileConfig::Moser { k_log })
        }
        "log_cut" => {
            p.check_known_keys(table, &["variant", "r0"], context);
            let r0 = p.float(table, "r0", context)?;
            if !(r0 > 0.0 && r0 < 1.0) {
                p.err(format!("{context}: log_cut needs 0 < r0 < 1"));
                return None;
            }
            Some(ProfileConfig::LogCut { r0 })
        }
        "poly" => {
            p.check_known_keys(table, &["variant", "coeffs"], context);
            let coeffs = p.float_list(table, "coeffs", context)?;
            Some(ProfileConfig::Poly { coeffs })
        }
        "modulated" => {
            p.check_known_keys(table, &["variant", "base"], context);
            let base = p.string(table, "base", context)?.to_string();
            let inner = match base.as_str() {
                "affine" => ProfileConfig::Affine,
                "quadratic" => ProfileConfig::Quadratic,
                other => {
                    p.err(format!(
                        "{context}: modulated base must be `affine` or `quadratic`, got `{other}`"
                    ));
                    return None;
                }
            };
            Some(ProfileConfig::Modulated {
                base: Box::new(inner),
            })
        }
        other => {
            p.err(format!("{context}: unknown profile variant `{other}`"));
            None
        }
    }
}

fn parse_measure(p: &mut Parser, table: &toml::Table, context: &str) -> MeasureTag {
    match table.get("measure") {
        Some(toml::Value::String(s)) => match s.as_str() {
            "lebesgue" => MeasureTag::Lebesgue,
            "grad_polar" => MeasureTag::GradPolar,
            other => {
                p.err(format!(
                    "{context}: measure must be `lebesgue` or `grad_polar`, got `{other}`"
                ));
                MeasureTag::Lebesgue
            }
        },
        Some(_) => {
            p.err(format!("{context}: `measure` must be a string"));
            MeasureTag::Lebesgue
        }
        None => MeasureTag::Lebesgue,
    }
}

/// Parse and validate a campaign configuration, accumulating every error.
pub fn parse_config(text: &str) -> Result<CampaignConfig> {
    let value: toml::Value = toml::from_str(text)
        .map_err(|e| Error::Config(vec![format!("TOML syntax: {e}")]))?;
    let root = match value.as_table() {
        Some(t) => t,
        None => return Err(Error::Config(vec!["top level must be a table".into()])),
    };
    let mut p = Parser { errors: Vec::new() };
    p.check_known_keys(
        root,
        &["schema_version", "campaign", "norms", "profiles", "checks"],
        "top level",
    );

    if let Some(v) = root.get("schema_version") {
        match v {
            toml::Value::Integer(1) => {}
            _ => p.err("schema_version must be 1".to_string()),
        }
    }

    let mut cfg = default_campaign();
    cfg.norms.clear();
    cfg.profiles.clear();
    cfg.checks.clear();

    if let Some(c) = root.get("campaign") {
        match c.as_table() {
            Some(t) => {
                p.check_known_keys(
                    t,
                    &["seed", "tolerance", "budget", "jobs", "output", "format"],
                    "[campaign]",
                );
                if t.contains_key("seed") {
                    if let Some(seed) = p.uint(t, "seed", "[campaign]") {
                        cfg.seed = seed;
                    }
                } else {
                    p.err("[campaign]: `seed` is required (no wall-clock defaults)");
                }
                if t.contains_key("tolerance") {
                    if let Some(tol) = p.float(t, "tolerance", "[campaign]") {
                        if tol > 0.0 {
                            cfg.tolerance = tol;
                        } else {
                            p.err("[campaign]: tolerance must be positive");
                        }
                    }
                }
                if t.contains_key("budget") {
                    if let Some(b) = p.uint(t, "budget", "[campaign]") {
                        cfg.budget = b;
                    }
                }
                if t.contains_key("jobs") {
                    if let Some(j) = p.uint(t, "jobs", "[campaign]") {
                        cfg.jobs = (j as usize).max(1);
                    }
                }
                if t.contains_key("output") {
                    if let Some(o) = p.string(t, "output", "[campaign]") {
                        cfg.output = Some(o.to_string());
                    }
                }
                if t.contains_key("format") {
                    match p.string(t, "format", "[campaign]") {
                        Some("json") => cfg.format = ReportFormat::Json,
                        Some("csv") => cfg.format = ReportFormat::Csv,
                        Some(other) => {
                            p.err(format!("[campaign]: format must be json or csv, got `{other}`"))
                        }
                        None => {}
                    }
                }
            }
            None => p.err("[campaign] must be a table"),
        }
    } else {
        p.err("missing [campaign] section");
    }

    match root.get("norms").and_then(|v| v.as_array()) {
        Some(norms) if !norms.is_empty() => {
            for (i, nv) in norms.iter().enumerate() {
                let context = format!("[[norms]] #{}", i + 1);
                let Some(t) = nv.as_table() else {
                    p.err(format!("{context}: must be a table"));
                    continue;
                };
                let Some(variant) = p.string(t, "variant", &context).map(str::to_string) else {
                    continue;
                };
                let dim = p.uint(t, "dim", &context).unwrap_or(2) as usize;
                if dim < 2 {
                    p.err(format!("{context}: dim must be at least 2"));
                    continue;
                }
                match variant.as_str() {
                    "euclidean" => {
                        p.check_known_keys(t, &["variant", "dim"], &context);
                        cfg.norms.push(NormConfig::Euclidean { dim });
                    }
                    "ellipsoid" => {
                        p.check_known_keys(t, &["variant", "dim", "matrix"], &context);
                        if let Some(matrix) = p.float_list(t, "matrix", &context) {
                            if matrix.len() != dim * dim {
                                p.err(format!(
                                    "{context}: matrix needs {} row-major entries, got {}",
                                    dim * dim,
                                    matrix.len()
                                ));
                            } else {
                                cfg.norms.push(NormConfig::Ellipsoid { dim, matrix });
                            }
                        }
                    }
                    "p_norm" => {
                        p.check_known_keys(t, &["variant", "dim", "p"], &context);
                        if let Some(pv) = p.float(t, "p", &context) {
                            if pv > 1.0 {
                                cfg.norms.push(NormConfig::PNorm { dim, p: pv });
                            } else {
                                p.err(format!(
                                    "{context}: p_norm needs p > 1 (smooth strongly convex regime), got {pv}"
                                ));
                            }
                        }
                    }
                    other => p.err(format!("{context}: unknown norm variant `{other}`")),
                }
            }
        }
        _ => p.err("at least one [[norms]] entry is required"),
    }

    match root.get("profiles").and_then(|v| v.as_array()) {
        Some(profiles) if !profiles.is_empty() => {
            for (i, pv) in profiles.iter().enumerate() {
                let context = format!("[[profiles]] #{}", i + 1);
                match pv.as_table() {
                    Some(t) => {
                        if let Some(profile) = parse_profile(&mut p, t, &context) {
                            cfg.profiles.push(profile);
                        }
                    }
                    None => p.err(format!("{context}: must be a table")),
                }
            }
        }
        _ => p.err("at least one [[profiles]] entry is required"),
    }

    match root.get("checks").and_then(|v| v.as_array()) {
        Some(checks) if !checks.is_empty() => {
            for (i, cv) in checks.iter().enumerate() {
                let context = format!("[[checks]] #{}", i + 1);
                let Some(t) = cv.as_table() else {
                    p.err(format!("{context}: must be a table"));
                    continue;
                };
                let Some(id) = p.string(t, "id", &context).map(str::to_string) else {
                    continue;
                };
                match id.as_str() {
                    "profile_bound_1d" => {
                        p.check_known_keys(t, &["id"], &context);
                        cfg.checks.push(CheckConfig::ProfileBound1d);
                    }
                    "v_radial_energy" => {
                        p.check_known_keys(t, &["id", "measure"], &context);
                        let measure = parse_measure(&mut p, t, &context);
                        cfg.checks.push(CheckConfig::VRadialEnergy { measure });
                    }
                    "v_gradient_energy" => {
                        p.check_known_keys(t, &["id", "measure"], &context);
                        let measure = parse_measure(&mut p, t, &context);
                        cfg.checks.push(CheckConfig::VGradientEnergy { measure });
                    }
                    "hardy_weight_improved" => {
                        p.check_known_keys(t, &["id"], &context);
                        cfg.checks.push(CheckConfig::HardyWeightImproved);
                    }
                    "lq_growth" => {
                        p.check_known_keys(t, &["id", "q"], &context);
                        if let Some(q) = p.float(t, "q", &context) {
                            cfg.checks.push(CheckConfig::LqGrowth { q });
                        }
                    }
                    "riesz_kernel_sup" => {
                        p.check_known_keys(t, &["id", "q"], &context);
                        if let Some(q) = p.float(t, "q", &context) {
                            cfg.checks.push(CheckConfig::RieszKernelSup { q });
                        }
                    }
                    "radial_sharp_exponent" => {
                        p.check_known_keys(t, &["id"], &context);
                        cfg.checks.push(CheckConfig::RadialSharpExponent);
                    }
                    other => p.err(format!("{context}: unknown check id `{other}`")),
                }
            }
        }
        _ => p.err("at least one [[checks]] entry is required"),
    }

    // cross-validation: the weighted-norm growth estimate needs q strictly
    // above the dimension
    for check in &cfg.checks {
        let q = match check {
            CheckConfig::LqGrowth { q } | CheckConfig::RieszKernelSup { q } => *q,
            _ => continue,
        };
        for norm in &cfg.norms {
            if q <= norm.dim() as f64 {
                p.err(format!(
                    "check `{}` requires q > n: q = {q} is not admissible in dimension {}",
                    check.id(),
                    norm.dim()
                ));
            }
        }
    }

    if p.errors.is_empty() {
        Ok(cfg)
    } else {
        Err(Error::Config(p.errors))
    }
}

fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

/// Write reports as JSON (full fidelity, shortest round-trip floats) or CSV
/// (flat table, 17 significant digits).
pub fn emit_reports(
    reports: &[CheckReport],
    format: ReportFormat,
    out: &mut dyn Write,
) -> Result<()> {
    match format {
        ReportFormat::Json => {
            let text = serde_json::to_string_pretty(reports)
                .map_err(|e| Error::Unsupported(format!("JSON serialization: {e}")))?;
            out.write_all(text.as_bytes())?;
            out.write_all(b"\n")?;
        }
        ReportFormat::Csv => {
            writeln!(
                out,
                "check_id,norm,profile,q_or_gamma,lhs,rhs,margin,error_estimate,pass"
            )?;
            for r in reports {
                let q_or_gamma = r
                    .params
                    .get("q")
                    .or_else(|| r.params.get("gamma"))
                    .map(|v| fmt17(*v))
                    .unwrap_or_default();
                writeln!(
                    out,
                    "{},{},{},{},{},{},{},{},{}",
                    r.check_id,
                    r.norm,
                    r.profile,
                    q_or_gamma,
                    fmt17(r.lhs),
                    fmt17(r.rhs),
                    fmt17(r.margin),
                    fmt17(r.error_estimate),
                    r.pass
                )?;
            }
        }
    }
    Ok(())
}

pub fn reports_to_json(reports: &[CheckReport]) -> Result<String> {
    let mut buf = Vec::new();
    emit_reports(reports, ReportFormat::Json, &mut buf)?;
    Ok(String::from_utf8(buf).expect("JSON is UTF-8"))
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
schema_version = 1
[campaign]
seed = 7

[[norms]]
variant = "euclidean"
dim = 2

[[profiles]]
variant = "affine"

[[checks]]
id = "hardy_weight_improved"
"#;

    #[test]
    fn minimal_config_parses_with_defaults() {
        let cfg = parse_config(MINIMAL).unwrap();
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.norms.len(), 1);
        assert_eq!(cfg.profiles.len(), 1);
        assert_eq!(cfg.checks.len(), 1);
        assert!(cfg.tolerance > 0.0);
    }

    #[test]
    fn p_one_rejected() {
        let text = MINIMAL.replace(
            "variant = \"euclidean\"\ndim = 2",
            "variant = \"p_norm\"\ndim = 2\np = 1.0",
        );
        let err = parse_config(&text).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("p > 1"), "{msg}");
    }

    #[test]
    fn all_errors_reported_in_one_pass() {
        let text = r#"
[campaign]
seed = 7
[[norms]]
variant = "nope"
dim = 2
[[profiles]]
variant = "affine"
[[checks]]
id = "wrong"
"#;
        match parse_config(text) {
            Err(Error::Config(errs)) => {
                assert!(errs.len() >= 2, "expected both errors, got {errs:?}");
            }
            other => panic!("expected config error, got {other:?}"),
        }
    }

    #[test]
    fn q_at_dimension_rejected() {
        let text = MINIMAL.replace(
            "id = \"hardy_weight_improved\"",
            "id = \"lq_growth\"\nq = 2.0",
        );
        let err = parse_config(&text).unwrap_err();
        assert!(err.to_string().contains("q > n"), "{err}");
    }

    #[test]
    fn unknown_keys_rejected() {
        let text = MINIMAL.replace("seed = 7", "seed = 7\nwalltime = 3");
        assert!(parse_config(&text).is_err());
    }

    #[test]
    fn empty_reports_serialize_to_empty_array() {
        let mut buf = Vec::new();
        emit_reports(&[], ReportFormat::Json, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().trim(), "[]");
        let mut buf = Vec::new();
        emit_reports(&[], ReportFormat::Csv, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 1); // header only
    }
}
