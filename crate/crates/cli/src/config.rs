//! Run configuration: a JSON document with `medium`, `numerics` and `task`
//! sections. Unknown keys are rejected; every validation problem is reported.

use std::path::Path;

use pillar_core::assembly::Grading;
use pillar_core::harmonics::BlochParams;
use pillar_core::medium::{MediumSpec, Shell, ZProfile};
use pillar_core::PillarError;
use serde::Deserialize;
use sha2::{Digest, Sha256};

/// Cap applied to the automatic `m_max`, `ℓ_max` to keep dense systems
/// tractable.
pub const AUTO_TRUNCATION_CAP: i64 = 8;
/// Target `|η_{m_max}| R` of the automatic `m_max`.
pub const AUTO_DECAY_EXPONENT: f64 = 30.0;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub medium: MediumConfig,
    #[serde(default)]
    pub numerics: NumericsConfig,
    #[serde(default)]
    pub task: TaskConfig,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MediumConfig {
    pub eps0: f64,
    pub mu0: f64,
    pub radius: f64,
    #[serde(default = "one_i64")]
    pub period_divisor: i64,
    #[serde(default)]
    pub shells: Vec<ShellConfig>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShellConfig {
    pub outer: f64,
    pub eps: ProfileConfig,
    /// Defaults to the exterior `μ₀`.
    #[serde(default)]
    pub mu: Option<ProfileConfig>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged, expecting = "a number, {\"cells\": {\"breaks\", \"values\"}} or {\"harmonic\": {\"mean\", \"terms\"}}")]
pub enum ProfileConfig {
    Constant(f64),
    Cells(CellsWrap),
    Harmonic(HarmonicWrap),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CellsWrap {
    pub cells: CellsConfig,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CellsConfig {
    pub breaks: Vec<f64>,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HarmonicWrap {
    pub harmonic: HarmonicConfig,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HarmonicConfig {
    pub mean: f64,
    /// `[q, cos coefficient, sin coefficient]`.
    #[serde(default)]
    pub terms: Vec<(i64, f64, f64)>,
}

impl ProfileConfig {
    fn to_profile(&self) -> ZProfile {
        match self {
            ProfileConfig::Constant(v) => ZProfile::Constant(*v),
            ProfileConfig::Cells(c) => ZProfile::Cells { breaks: c.cells.breaks.clone(), values: c.cells.values.clone() },
            ProfileConfig::Harmonic(h) => ZProfile::Harmonic { mean: h.harmonic.mean, terms: h.harmonic.terms.clone() },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GradingConfig {
    Uniform,
    Graded,
}

impl GradingConfig {
    pub fn as_str(self) -> &'static str {
        match self {
            GradingConfig::Uniform => "uniform",
            GradingConfig::Graded => "graded",
        }
    }

    pub fn grading(self) -> Grading {
        match self {
            GradingConfig::Uniform => Grading::Uniform,
            GradingConfig::Graded => Grading::GradedToInterfaces,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NumericsConfig {
    #[serde(default = "default_n_radial")]
    pub n_radial: usize,
    #[serde(default = "default_grading")]
    pub grading: GradingConfig,
    /// Fourier truncation `|m| <= m_max`; automatic when absent.
    #[serde(default)]
    pub m_max: Option<i64>,
    /// Azimuthal truncation `|ℓ| <= ℓ_max`; automatic when absent.
    #[serde(default)]
    pub l_max: Option<i64>,
    #[serde(default = "default_guided_tolerance")]
    pub guided_tolerance: f64,
}

impl Default for NumericsConfig {
    fn default() -> Self {
        Self {
            n_radial: default_n_radial(),
            grading: default_grading(),
            m_max: None,
            l_max: None,
            guided_tolerance: default_guided_tolerance(),
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskConfig {
    pub classify: Option<ClassifyTask>,
    pub scatter: Option<ScatterTask>,
    pub dispersion: Option<DispersionTask>,
    pub embedded: Option<EmbeddedTask>,
    pub certify: Option<CertifyTask>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassifyTask {
    pub kappa: f64,
    pub omega: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScatterTask {
    pub kappa: f64,
    pub omega: f64,
    #[serde(default)]
    pub incident: IncidentConfig,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IncidentConfig {
    #[serde(default)]
    pub m: i64,
    #[serde(default)]
    pub theta0: f64,
    /// `[re, im]`.
    #[serde(default = "unit_amplitude")]
    pub amplitude: [f64; 2],
}

impl Default for IncidentConfig {
    fn default() -> Self {
        Self { m: 0, theta0: 0.0, amplitude: unit_amplitude() }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DispersionTask {
    pub kappas: Vec<f64>,
    #[serde(default)]
    pub l: i64,
    #[serde(default)]
    pub branch: usize,
    /// `[ω_lo, ω_hi]`; the below-cutoff interval of each κ when absent.
    #[serde(default)]
    pub bracket: Option<[f64; 2]>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EmbeddedTask {
    #[serde(rename = "M")]
    pub m: i64,
    #[serde(rename = "N", default)]
    pub n: i64,
    pub kappa: f64,
    #[serde(default)]
    pub l: i64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CertifyKind {
    Radius,
    Monotone,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertifyTask {
    pub kind: CertifyKind,
    /// Required for `radius`.
    #[serde(default)]
    pub kappa: Option<f64>,
    #[serde(default)]
    pub omega: Option<f64>,
    /// Falsification sweep of `monotone`; standard grid when absent.
    #[serde(default)]
    pub grid: Option<GridConfig>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub kappas: Vec<f64>,
    pub ls: Vec<i64>,
    pub omega_max: f64,
    pub omega_samples: usize,
    #[serde(default = "default_grid_branches")]
    pub branches: usize,
}

fn one_i64() -> i64 {
    1
}
fn default_n_radial() -> usize {
    100
}
fn default_grading() -> GradingConfig {
    GradingConfig::Uniform
}
fn default_guided_tolerance() -> f64 {
    1e-8
}
fn unit_amplitude() -> [f64; 2] {
    [1.0, 0.0]
}
fn default_grid_branches() -> usize {
    4
}

/// A validated configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub raw: RawConfig,
    pub spec: MediumSpec,
    /// Hex SHA-256 of the config bytes.
    pub input_sha256: String,
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read config: {0}")]
    Io(#[from] std::io::Error),
    #[error("config parse error: {0}")]
    Parse(String),
    #[error("config validation failed:\n  {}", .0.join("\n  "))]
    Invalid(Vec<String>),
}

impl ConfigError {
    pub fn messages(&self) -> Vec<String> {
        match self {
            ConfigError::Invalid(v) => v.clone(),
            e => vec![e.to_string()],
        }
    }
}

pub fn load_config(path: &Path) -> Result<RunConfig, ConfigError> {
    let bytes = std::fs::read(path)?;
    parse_config(&bytes)
}

pub fn parse_config(bytes: &[u8]) -> Result<RunConfig, ConfigError> {
    let input_sha256 = hex::encode(Sha256::digest(bytes));
    let raw: RawConfig = serde_json::from_slice(bytes).map_err(|e| ConfigError::Parse(e.to_string()))?;
    let mut errors = Vec::new();
    let spec = build_spec(&raw.medium, &mut errors);
    validate_numerics(&raw.numerics, &mut errors);
    validate_tasks(&raw, &mut errors);
    match spec {
        Some(spec) if errors.is_empty() => Ok(RunConfig { raw, spec, input_sha256 }),
        _ => Err(ConfigError::Invalid(errors)),
    }
}

fn build_spec(m: &MediumConfig, errors: &mut Vec<String>) -> Option<MediumSpec> {
    let shells = m
        .shells
        .iter()
        .map(|s| Shell {
            outer: s.outer,
            eps: s.eps.to_profile(),
            mu: s.mu.as_ref().map_or(ZProfile::Constant(m.mu0), ProfileConfig::to_profile),
        })
        .collect();
    match MediumSpec::new(shells, m.eps0, m.mu0, m.radius, m.period_divisor) {
        Ok(spec) => Some(spec),
        Err(PillarError::InvalidMedium(problems)) => {
            errors.extend(problems.into_iter().map(|p| format!("medium: {p}")));
            None
        }
        Err(e) => {
            errors.push(format!("medium: {e}"));
            None
        }
    }
}

fn validate_numerics(n: &NumericsConfig, errors: &mut Vec<String>) {
    if n.n_radial < 4 {
        errors.push(format!("numerics.n_radial: {} is below the minimum 4", n.n_radial));
    }
    if n.m_max.is_some_and(|m| m < 0) {
        errors.push("numerics.m_max: must be >= 0".into());
    }
    if n.l_max.is_some_and(|l| l < 0) {
        errors.push("numerics.l_max: must be >= 0".into());
    }
    if !(n.guided_tolerance > 0.0 && n.guided_tolerance < 1.0) {
        errors.push(format!("numerics.guided_tolerance: {} must lie in (0, 1)", n.guided_tolerance));
    }
}

fn check_params(field: &str, kappa: f64, omega: f64, m: &MediumConfig, errors: &mut Vec<String>) {
    if let Err(e) = BlochParams::new(kappa, omega, m.eps0, m.mu0) {
        errors.push(format!("{field}: {e}"));
    }
}

fn check_kappa(field: &str, kappa: f64, errors: &mut Vec<String>) {
    if !(-0.5..0.5).contains(&kappa) {
        errors.push(format!("{field}: kappa = {kappa} outside the Brillouin zone [-1/2, 1/2)"));
    }
}

fn validate_tasks(raw: &RawConfig, errors: &mut Vec<String>) {
    let t = &raw.task;
    let m = &raw.medium;
    if let Some(c) = &t.classify {
        check_params("task.classify", c.kappa, c.omega, m, errors);
    }
    if let Some(s) = &t.scatter {
        check_params("task.scatter", s.kappa, s.omega, m, errors);
        if !s.incident.theta0.is_finite() || s.incident.amplitude.iter().any(|a| !a.is_finite()) {
            errors.push("task.scatter.incident: theta0 and amplitude must be finite".into());
        }
    }
    if let Some(d) = &t.dispersion {
        if d.kappas.is_empty() {
            errors.push("task.dispersion.kappas: must not be empty".into());
        }
        for (i, &k) in d.kappas.iter().enumerate() {
            check_kappa(&format!("task.dispersion.kappas[{i}]"), k, errors);
        }
        if let Some([lo, hi]) = d.bracket {
            if !(lo > 0.0 && hi > lo && hi.is_finite()) {
                errors.push(format!("task.dispersion.bracket: [{lo}, {hi}] must satisfy 0 < lo < hi"));
            }
        }
    }
    if let Some(e) = &t.embedded {
        if e.m < 0 || e.n < 0 {
            errors.push("task.embedded: M and N must be >= 0".into());
        } else if 2 * e.m + e.n + 2 != m.period_divisor {
            errors.push(format!(
                "task.embedded: L = 2M + N + 2 = {} differs from medium.period_divisor = {}",
                2 * e.m + e.n + 2,
                m.period_divisor
            ));
        }
        check_kappa("task.embedded.kappa", e.kappa, errors);
    }
    if let Some(c) = &t.certify {
        match (c.kind, c.kappa, c.omega) {
            (CertifyKind::Radius, Some(k), Some(w)) => check_params("task.certify", k, w, m, errors),
            (CertifyKind::Radius, _, _) => errors.push("task.certify: kind \"radius\" needs kappa and omega".into()),
            (CertifyKind::Monotone, _, _) => {}
        }
        if let Some(g) = &c.grid {
            for (i, &k) in g.kappas.iter().enumerate() {
                check_kappa(&format!("task.certify.grid.kappas[{i}]"), k, errors);
            }
            if !(g.omega_max > 0.0) || g.omega_samples < 2 || g.branches == 0 {
                errors.push("task.certify.grid: need omega_max > 0, omega_samples >= 2, branches >= 1".into());
            }
        }
    }
}

/// `m_max` from the config, or the smallest `m` with `|η_m| R >= 30` for
/// both signs, capped at [`AUTO_TRUNCATION_CAP`].
pub fn resolve_m_max(cfg: &RunConfig, p: &BlochParams<f64>) -> i64 {
    cfg.raw.numerics.m_max.unwrap_or_else(|| {
        let target = AUTO_DECAY_EXPONENT / cfg.spec.radius;
        let needed = (target * target + p.k0_sq()).sqrt() + p.kappa.abs();
        (needed.ceil() as i64).min(AUTO_TRUNCATION_CAP)
    })
}

/// `ℓ_max` from the config, or `⌈max η R⌉ + 4` capped at
/// [`AUTO_TRUNCATION_CAP`].
pub fn resolve_l_max(cfg: &RunConfig, p: &BlochParams<f64>) -> i64 {
    cfg.raw.numerics.l_max.unwrap_or_else(|| {
        let eta_r = p.k0_sq().sqrt() * cfg.spec.radius;
        ((eta_r.ceil() as i64) + 4).min(AUTO_TRUNCATION_CAP)
    })
}
