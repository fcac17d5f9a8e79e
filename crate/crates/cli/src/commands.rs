//! The five batch commands.

use pillar_core::assembly::{build_mesh, RadialMesh};
use pillar_core::certify::{
    certify_monotone, certify_radius_with, Certificate, Evidence, FalsificationGrid, Verdict, ALPHA_TOLERANCE,
};
use pillar_core::harmonics::{classify_harmonics, dtn_table, BlochParams, IncidentWave, TraceExpansion};
use pillar_core::modes::{embedded_mode_search, EmbeddedSearch, ModeSolver, SubspaceSpec};
use pillar_core::scatter::{energy_fluxes, Scatterer};
use pillar_core::{PillarError, C64};
use serde_json::{json, Map, Value};

use crate::config::{resolve_l_max, resolve_m_max, CertifyKind, RunConfig};
use crate::output::{num, Outputs, Table};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Command {
    Classify,
    Scatter,
    Dispersion,
    Embedded,
    Certify,
}

impl Command {
    pub fn as_str(self) -> &'static str {
        match self {
            Command::Classify => "classify",
            Command::Scatter => "scatter",
            Command::Dispersion => "dispersion",
            Command::Embedded => "embedded",
            Command::Certify => "certify",
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CommandError {
    #[error("validation failed: {}", .0.join("; "))]
    Validation(Vec<String>),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("i/o failure: {0}")]
    Io(#[from] std::io::Error),
}

impl CommandError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CommandError::Validation(_) => 2,
            CommandError::Numerical(_) => 3,
            CommandError::Io(_) => 1,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            CommandError::Validation(_) => "validation",
            CommandError::Numerical(_) => "numerical",
            CommandError::Io(_) => "io",
        }
    }

    pub fn messages(&self) -> Vec<String> {
        match self {
            CommandError::Validation(v) => v.clone(),
            e => vec![e.to_string()],
        }
    }
}

impl From<PillarError> for CommandError {
    fn from(e: PillarError) -> Self {
        match e {
            PillarError::InvalidMedium(v) => CommandError::Validation(v),
            PillarError::Domain { .. }
            | PillarError::InvalidIncident { .. }
            | PillarError::InvalidMesh(_)
            | PillarError::EmptySubspace
            | PillarError::WindowEmpty(_) => CommandError::Validation(vec![e.to_string()]),
            e => CommandError::Numerical(e.to_string()),
        }
    }
}

fn missing(section: &str) -> CommandError {
    CommandError::Validation(vec![format!("task.{section}: section required by this command is absent")])
}

/// Discretization recorded in the manifest.
#[derive(Debug, Clone, Default)]
pub struct Discretization {
    pub m_max: Option<i64>,
    pub l_max: Option<i64>,
}

pub fn run_command(cmd: Command, cfg: &RunConfig, disc: &mut Discretization) -> Result<Outputs, CommandError> {
    match cmd {
        Command::Classify => classify(cfg, disc),
        Command::Scatter => scatter(cfg, disc),
        Command::Dispersion => dispersion(cfg, disc),
        Command::Embedded => embedded(cfg, disc),
        Command::Certify => certify(cfg, disc),
    }
}

fn params(cfg: &RunConfig, kappa: f64, omega: f64) -> Result<BlochParams<f64>, CommandError> {
    Ok(BlochParams::new(kappa, omega, cfg.spec.eps0, cfg.spec.mu0)?)
}

fn mesh(cfg: &RunConfig) -> Result<RadialMesh, CommandError> {
    let n = &cfg.raw.numerics;
    Ok(build_mesh(cfg.spec.radius, n.n_radial, n.grading.grading(), &cfg.spec.radial_breakpoints())?)
}

fn trace_table(name: &str, trace: &TraceExpansion<f64>) -> Table {
    let mut t = Table::new(name, &["m", "l", "re", "im"]);
    for (&(m, l), c) in &trace.coefficients {
        t.push(vec![m.to_string(), l.to_string(), num(c.re), num(c.im)]);
    }
    t
}

fn classify(cfg: &RunConfig, disc: &mut Discretization) -> Result<Outputs, CommandError> {
    let task = cfg.raw.task.classify.as_ref().ok_or_else(|| missing("classify"))?;
    let p = params(cfg, task.kappa, task.omega)?;
    let (m_max, l_max) = (resolve_m_max(cfg, &p), resolve_l_max(cfg, &p));
    *disc = Discretization { m_max: Some(m_max), l_max: Some(l_max) };
    let mut harmonics = Table::new("harmonics.csv", &["m", "eta_sq", "class"]);
    for h in classify_harmonics(&p, m_max) {
        harmonics.push(vec![h.m.to_string(), num(h.eta_sq), h.class.as_str().to_string()]);
    }
    let mut dtn = Table::new("dtn.csv", &["m", "l", "class", "gamma_re", "gamma_im"]);
    for e in dtn_table(&p, cfg.spec.radius, m_max, l_max)? {
        dtn.push(vec![e.m.to_string(), e.l.to_string(), e.class.as_str().to_string(), num(e.gamma.re), num(e.gamma.im)]);
    }
    let mut results = Map::new();
    results.insert("propagating".into(), json!(p.propagating_indices()));
    results.insert("below_cutoff".into(), json!(p.is_below_cutoff()));
    Ok(Outputs { tables: vec![harmonics, dtn], results, ..Default::default() })
}

fn scatter(cfg: &RunConfig, disc: &mut Discretization) -> Result<Outputs, CommandError> {
    let task = cfg.raw.task.scatter.as_ref().ok_or_else(|| missing("scatter"))?;
    let p = params(cfg, task.kappa, task.omega)?;
    let (m_max, l_max) = (resolve_m_max(cfg, &p), resolve_l_max(cfg, &p));
    *disc = Discretization { m_max: Some(m_max), l_max: Some(l_max) };
    let wave = IncidentWave {
        m: task.incident.m,
        theta0: task.incident.theta0,
        amplitude: C64::new(task.incident.amplitude[0], task.incident.amplitude[1]),
    };
    let sol = Scatterer::new(&cfg.spec, &mesh(cfg)?, m_max, l_max)?.solve(&p, &wave)?;
    let mut far = Table::new("far_field.csv", &["m", "l", "re", "im", "abs"]);
    for (&(m, l), a) in &sol.far_field {
        far.push(vec![m.to_string(), l.to_string(), num(a.re), num(a.im), num(a.norm())]);
    }
    let e = energy_fluxes(&sol);
    let condition = sol.azimuthal.iter().map(|a| a.condition).fold(0.0, f64::max);
    let mut results = Map::new();
    results.insert("energy_outgoing".into(), json!(e.outgoing));
    results.insert("energy_delivered".into(), json!(e.delivered));
    results.insert("energy_incident".into(), json!(e.incident));
    results.insert("energy_residual".into(), json!(e.residual()));
    results.insert("solve_residual".into(), json!(sol.residual));
    results.insert("max_condition_estimate".into(), json!(condition));
    Ok(Outputs { tables: vec![far, trace_table("trace.csv", &sol.trace)], results, ..Default::default() })
}

fn dispersion(cfg: &RunConfig, disc: &mut Discretization) -> Result<Outputs, CommandError> {
    let task = cfg.raw.task.dispersion.as_ref().ok_or_else(|| missing("dispersion"))?;
    let m_max = cfg.raw.numerics.m_max.unwrap_or(2.min(crate::config::AUTO_TRUNCATION_CAP));
    *disc = Discretization { m_max: Some(m_max), l_max: None };
    let solver = ModeSolver::new(&cfg.spec, &mesh(cfg)?, 2 * m_max)?;
    let m_set: Vec<i64> = (-m_max..=m_max).collect();
    let fixed = task.bracket.map(|[a, b]| (a, b));
    let curve = solver.dispersion_curve(&task.kappas, task.l, &m_set, task.branch, |k| {
        fixed.or_else(|| solver.below_cutoff_bracket(k))
    })?;
    let mut t = Table::new("dispersion.csv", &["kappa", "omega", "branch_index", "propagating_trace_norm"]);
    for s in &curve.samples {
        t.push(vec![num(s.kappa), num(s.omega), s.index.to_string(), num(s.propagating_trace_norm)]);
    }
    let mut results = Map::new();
    results.insert("requested_kappas".into(), json!(task.kappas.len()));
    results.insert("roots_found".into(), json!(curve.samples.len()));
    results.insert("l".into(), json!(task.l));
    results.insert("branch".into(), json!(task.branch));
    Ok(Outputs { tables: vec![t], results, ..Default::default() })
}

fn embedded(cfg: &RunConfig, disc: &mut Discretization) -> Result<Outputs, CommandError> {
    let task = cfg.raw.task.embedded.as_ref().ok_or_else(|| missing("embedded"))?;
    let sub = SubspaceSpec::new(task.m, task.n)?;
    let m_max = cfg.raw.numerics.m_max.unwrap_or(4 * task.m + 5);
    *disc = Discretization { m_max: Some(m_max), l_max: None };
    let tol = cfg.raw.numerics.guided_tolerance;
    let search = EmbeddedSearch { sub, kappa: task.kappa, l: task.l, m_max, mesh: mesh(cfg)?, tolerance: tol };
    let em = embedded_mode_search(&cfg.spec, &search)?;
    if !em.report.passes(tol) {
        return Err(CommandError::Numerical(format!(
            "embedded mode failed verification: residual {:e}, propagating trace {:e}, tolerance {tol:e}",
            em.report.residual, em.report.propagating_trace_norm
        )));
    }
    let mut t = Table::new(
        "embedded.csv",
        &[
            "kappa",
            "omega",
            "window_lo",
            "window_hi",
            "contrast_scale",
            "core_eps",
            "residual",
            "propagating_trace_norm",
            "off_lattice_content",
        ],
    );
    t.push(vec![
        num(em.mode.kappa),
        num(em.mode.omega),
        num(em.window.0),
        num(em.window.1),
        num(em.contrast_scale),
        num(em.core_eps),
        num(em.report.residual),
        num(em.report.propagating_trace_norm),
        num(em.off_lattice_content),
    ]);
    let mut results = Map::new();
    results.insert("omega".into(), json!(em.mode.omega));
    results.insert("propagating_set".into(), json!(em.report.propagating_set));
    results.insert("retained_m".into(), json!(em.mode.layout.m_set));
    Ok(Outputs { tables: vec![t, trace_table("embedded_trace.csv", &em.mode.trace)], results, ..Default::default() })
}

fn opt(x: Option<f64>) -> String {
    x.map_or_else(|| "none".to_string(), num)
}

fn certify(cfg: &RunConfig, disc: &mut Discretization) -> Result<Outputs, CommandError> {
    let task = cfg.raw.task.certify.as_ref().ok_or_else(|| missing("certify"))?;
    let mut out = Outputs::default();
    let mut report = Vec::new();
    let cert: Certificate = match task.kind {
        CertifyKind::Radius => {
            let (kappa, omega) = task.kappa.zip(task.omega).ok_or_else(|| missing("certify.kappa/omega"))?;
            let p = params(cfg, kappa, omega)?;
            let l_max = cfg.raw.numerics.l_max.unwrap_or(pillar_core::certify::DEFAULT_ALPHA_L_MAX);
            let m_max = cfg.raw.numerics.m_max.unwrap_or(p.k0_sq().sqrt().ceil() as i64 + 2);
            *disc = Discretization { m_max: Some(m_max), l_max: Some(l_max) };
            report.push(format!("kappa: {}", num(kappa)));
            report.push(format!("omega: {}", num(omega)));
            certify_radius_with(&cfg.spec, &p, l_max, m_max)?
        }
        CertifyKind::Monotone => {
            let mut grid = FalsificationGrid::standard();
            if let Some(g) = &task.grid {
                grid.kappas = g.kappas.clone();
                grid.ls = g.ls.clone();
                grid.omega_max = g.omega_max;
                grid.omega_samples = g.omega_samples;
                grid.branches = g.branches;
            }
            if let Some(m) = cfg.raw.numerics.m_max {
                grid.m_max = m;
            }
            grid.elements = cfg.raw.numerics.n_radial;
            *disc = Discretization { m_max: Some(grid.m_max), l_max: None };
            certify_monotone(&cfg.spec, &grid)?
        }
    };
    report.insert(0, format!("kind: {}", cert.kind.as_str()));
    report.insert(1, format!("verdict: {}", cert.verdict.as_str()));
    report.insert(2, format!("failed_premise: {}", cert.failed_premise.as_deref().unwrap_or("none")));
    let mut results = Map::new();
    results.insert("kind".into(), json!(cert.kind.as_str()));
    results.insert("verdict".into(), json!(cert.verdict.as_str()));
    results.insert("failed_premise".into(), json!(cert.failed_premise));
    match &cert.evidence {
        Evidence::RadiusBound { radius, bound, alpha } => {
            report.push(format!("radius: {}", num(*radius)));
            report.push(format!("radius_bound: {}", opt(*bound)));
            results.insert("radius_bound".into(), json!(bound));
            if let Some(a) = alpha {
                report.push(format!("min_alpha: {}", opt(a.min_alpha)));
                if let Some(w) = a.witness_case() {
                    report.push(format!("witness: m={} l={} case={}", w.m, w.l, w.case.as_str()));
                }
                results.insert("min_alpha".into(), json!(a.min_alpha));
                let mut t = Table::new("alpha_cases.csv", &["m", "l", "case", "zeta_sq", "alpha", "reason"]);
                for c in &a.cases {
                    t.push(vec![
                        c.m.to_string(),
                        c.l.to_string(),
                        c.case.as_str().to_string(),
                        opt(c.zeta_sq),
                        opt(c.alpha),
                        c.reason.unwrap_or("").to_string(),
                    ]);
                }
                out.tables.push(t);
            }
        }
        Evidence::Rellich { monotone, lhs, rhs, search } => {
            report.push(format!("radially_monotone: {monotone}"));
            report.push(format!("rellich_lhs: {}", opt(*lhs)));
            report.push(format!("rellich_rhs: {}", opt(*rhs)));
            if let Some(s) = search {
                report.push(format!("falsification_candidates: {}", s.candidates));
                report.push(format!("falsification_verified: {}", s.verified.len()));
                results.insert("falsification_candidates".into(), json!(s.candidates));
                let mut t = Table::new("verified_modes.csv", &["kappa", "l", "omega"]);
                for &(k, l, w) in &s.verified {
                    t.push(vec![num(k), l.to_string(), num(w)]);
                }
                out.tables.push(t);
            }
        }
    }
    report.push(format!("tolerance.alpha: {ALPHA_TOLERANCE:e}"));
    report.push(format!("tolerance.guided: {:e}", cfg.raw.numerics.guided_tolerance));
    report.push(format!("input_sha256: {}", cfg.input_sha256));
    let mut text = report.join("\n");
    text.push('\n');
    out.texts.push(("certificate.txt".into(), text));
    out.inconclusive = cert.verdict == Verdict::Inconclusive;
    out.results = results;
    Ok(out)
}

pub fn tolerances(cfg: &RunConfig) -> Value {
    json!({
        "algebraic_class": pillar_core::harmonics::ALGEBRAIC_TOLERANCE,
        "alpha_margin": ALPHA_TOLERANCE,
        "dispersion_root": pillar_core::modes::ROOT_TOLERANCE,
        "guided_verification": cfg.raw.numerics.guided_tolerance,
        "near_singular_condition": pillar_core::scatter::NEAR_SINGULAR_CONDITION,
        "overlap_tracking": pillar_core::modes::OVERLAP_THRESHOLD,
    })
}
