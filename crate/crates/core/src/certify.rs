//! Nonexistence certificates: the radius bound with its α-eigenvalue case
//! analysis for inverse structures, and the Rellich identity for radially
//! nondecreasing media. Verdicts never claim existence.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::assembly::{build_mesh, DofLayout, Grading, RadialMesh};
use crate::error::{PillarError, Result};
use crate::harmonics::{gamma_coefficient, BlochParams, HarmonicClass, HarmonicData};
use crate::medium::{z_fourier, MediumSpec, ZProfile};
use crate::modes::{ModeResult, ModeSolver, GUIDED_TOLERANCE};
use crate::quadrature::GaussRule;
use crate::specfun::{bessel_i_pair, bessel_j_pair, j_zeros};
use crate::C64;

/// `min α` must exceed `1 + ALPHA_TOLERANCE`.
pub const ALPHA_TOLERANCE: f64 = 1e-9;
/// Azimuthal orders inspected by [`certify_radius`].
pub const DEFAULT_ALPHA_L_MAX: i64 = 8;
const ROBIN_GRID: usize = 400;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CertificateKind {
    RadiusBound,
    AlphaCases,
    RellichResidual,
}

impl CertificateKind {
    pub fn as_str(self) -> &'static str {
        match self {
            CertificateKind::RadiusBound => "radius-bound",
            CertificateKind::AlphaCases => "alpha-cases",
            CertificateKind::RellichResidual => "rellich-residual",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    NoGuidedModes,
    Inconclusive,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::NoGuidedModes => "no-guided-modes",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum CaseTag {
    /// `m ∈ Z_p`: zero trace.
    I,
    /// `m ∈ Z_e`: Robin condition with `γ_{mℓ} > 0`.
    II,
    /// `m ∈ Z_a`, `ℓ ≠ 0`: Robin condition with `γ = |ℓ|/R`.
    III,
    /// `m ∈ Z_a`, `ℓ = 0`: zero trace.
    IV,
}

impl CaseTag {
    pub fn as_str(self) -> &'static str {
        match self {
            CaseTag::I => "I",
            CaseTag::II => "II",
            CaseTag::III => "III",
            CaseTag::IV => "IV",
        }
    }
}

/// Smallest admissible `α` for one `(m, ℓ)` of the homogeneous reference
/// problem, with `ζ_m² = αε₀μ₀ω² − (m+κ)²`.
#[derive(Debug, Clone, PartialEq)]
pub struct AlphaCase {
    pub m: i64,
    pub l: i64,
    pub case: CaseTag,
    pub zeta_sq: Option<f64>,
    pub alpha: Option<f64>,
    /// Why no `α` exists, when `alpha` is `None`.
    pub reason: Option<&'static str>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlphaAnalysis {
    pub cases: Vec<AlphaCase>,
    pub min_alpha: Option<f64>,
    /// Index into `cases` of the minimizer.
    pub witness: Option<usize>,
}

impl AlphaAnalysis {
    pub fn witness_case(&self) -> Option<&AlphaCase> {
        self.witness.map(|i| &self.cases[i])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Evidence {
    RadiusBound {
        radius: f64,
        bound: Option<f64>,
        alpha: Option<AlphaAnalysis>,
    },
    Rellich {
        monotone: bool,
        /// Identity sides of the first candidate met by the falsification
        /// search, if any.
        lhs: Option<f64>,
        rhs: Option<f64>,
        search: Option<FalsificationReport>,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Certificate {
    pub kind: CertificateKind,
    pub verdict: Verdict,
    pub evidence: Evidence,
    /// First premise that failed, for inconclusive verdicts.
    pub failed_premise: Option<String>,
}

/// `1/√(ε₀μ₀ω² − κ²)`, or `None` at or below cutoff.
pub fn radius_bound(p: &BlochParams<f64>) -> Option<f64> {
    let d = p.k0_sq() - p.kappa * p.kappa;
    (d > 0.0).then(|| 1.0 / d.sqrt())
}

fn zero(order: u32) -> Result<f64> {
    Ok(j_zeros::<f64>(order, 1)?.zeros[0])
}

/// Smallest `x > 0` with `x J′_ℓ(x) + g J_ℓ(x) = 0` for `g > 0`; it lies
/// below `j_{ℓ,1}`.
fn robin_root(l: u32, g: f64) -> Result<f64> {
    let f = |x: f64| -> Result<f64> {
        let (j, dj) = bessel_j_pair(l as i32, x)?;
        Ok(x * dj + g * j)
    };
    let hi = zero(l)?;
    let mut prev = (hi * 1e-6, f(hi * 1e-6)?);
    for i in 1..=ROBIN_GRID {
        let x = hi * i as f64 / ROBIN_GRID as f64;
        let v = f(x)?;
        if v == 0.0 {
            return Ok(x);
        }
        if v.signum() != prev.1.signum() {
            let (mut a, mut b, mut fa) = (prev.0, x, prev.1);
            for _ in 0..200 {
                let mid = 0.5 * (a + b);
                if mid <= a || mid >= b {
                    break;
                }
                let fm = f(mid)?;
                if fm.signum() == fa.signum() {
                    a = mid;
                    fa = fm;
                } else {
                    b = mid;
                }
            }
            return Ok(0.5 * (a + b));
        }
        prev = (x, v);
    }
    Err(PillarError::Linalg(format!("no Robin root of order {l} below j_{l},1 = {hi}")))
}

/// `|ζ| I′_ℓ(|ζ|R) + γ I_ℓ(|ζ|R) > 0` on a grid of `x = |ζ|R ∈ (0, x_max]`.
fn modified_robin_positive(l: u32, g: f64, x_max: f64) -> Result<bool> {
    for i in 1..=ROBIN_GRID {
        let x = x_max * i as f64 / ROBIN_GRID as f64;
        let (v, dv) = bessel_i_pair(l as i32, x)?;
        if x * dv + g * v <= 0.0 {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Case I–IV enumeration of the homogeneous reference problem on `Ω_R` for
/// `|m| <= m_max`, `0 <= ℓ <= l_max` (`±ℓ` give identical values).
pub fn alpha_cases(p: &BlochParams<f64>, radius: f64, l_max: i64, m_max: i64) -> Result<AlphaAnalysis> {
    if !(radius > 0.0) || l_max < 0 || m_max < 0 {
        return Err(PillarError::domain("alpha_cases", "need R > 0, l_max >= 0, m_max >= 0"));
    }
    let k0 = p.k0_sq();
    let mut cases = Vec::new();
    for m in -m_max..=m_max {
        let h = HarmonicData::new(m, p);
        let mk2 = (m as f64 + p.kappa).powi(2);
        for l in 0..=l_max {
            let lu = l as u32;
            let from_zeta = |x: f64| {
                let zeta_sq = (x / radius).powi(2);
                (Some(zeta_sq), Some((zeta_sq + mk2) / k0))
            };
            let (case, (zeta_sq, alpha), reason) = match (h.class, l) {
                (HarmonicClass::Propagating, _) => (CaseTag::I, from_zeta(zero(lu)?), None),
                (HarmonicClass::Algebraic, 0) => (CaseTag::IV, from_zeta(zero(0)?), None),
                (HarmonicClass::Algebraic, _) => (CaseTag::III, from_zeta(zero(lu - 1)?), None),
                (HarmonicClass::Evanescent, _) => {
                    let g = gamma_coefficient(&h, l, radius)?.re * radius;
                    let x = robin_root(lu, g)?;
                    if !modified_robin_positive(lu, g, 4.0 * x.max(radius))? {
                        return Err(PillarError::Contradiction(format!(
                            "modified Robin form vanished for m = {m}, l = {l}"
                        )));
                    }
                    (CaseTag::II, from_zeta(x), None)
                }
            };
            cases.push(AlphaCase { m, l, case, zeta_sq, alpha, reason });
            // the branches ζ² = 0 and ζ² < 0 admit no α
            cases.push(AlphaCase {
                m,
                l,
                case,
                zeta_sq: None,
                alpha: None,
                reason: Some(match case {
                    CaseTag::I | CaseTag::IV => "I_l has no positive zero; r^l and log r cannot vanish at R",
                    CaseTag::II | CaseTag::III => "every term of the Robin form is positive",
                }),
            });
        }
    }
    let witness = cases
        .iter()
        .enumerate()
        .filter_map(|(i, c)| c.alpha.map(|a| (i, a)))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .map(|x| x.0);
    Ok(AlphaAnalysis { min_alpha: witness.and_then(|i| cases[i].alpha), witness, cases })
}

fn default_m_max(p: &BlochParams<f64>) -> i64 {
    p.k0_sq().sqrt().ceil() as i64 + 2
}

/// Radius-bound certificate at `(κ, ω)` using the truncation radius `R`.
pub fn certify_radius(spec: &MediumSpec, p: &BlochParams<f64>) -> Result<Certificate> {
    certify_radius_with(spec, p, DEFAULT_ALPHA_L_MAX, default_m_max(p))
}

pub fn certify_radius_with(spec: &MediumSpec, p: &BlochParams<f64>, l_max: i64, m_max: i64) -> Result<Certificate> {
    let bound = radius_bound(p);
    let radius = spec.radius;
    let mut failed = None;
    if !spec.is_inverse_structure() {
        failed = Some("inverse-structure: eps <= eps0 and mu <= mu0 do not hold in the pillar".to_string());
    } else if bound.is_none() {
        failed = Some("radius: eps0 mu0 omega^2 <= kappa^2, no radius bound".to_string());
    } else if let Some(b) = bound.filter(|&b| radius >= b) {
        failed = Some(format!("radius: R = {radius} is not below the bound {b}"));
    }
    let alpha = if failed.is_none() { Some(alpha_cases(p, radius, l_max, m_max)?) } else { None };
    if let Some(a) = &alpha {
        match a.min_alpha {
            Some(min) if min > 1.0 + ALPHA_TOLERANCE => {}
            Some(min) => failed = Some(format!("alpha: minimum alpha {min} is not above 1 + {ALPHA_TOLERANCE:e}")),
            None => failed = Some("alpha: no admissible alpha was found".to_string()),
        }
    }
    Ok(Certificate {
        kind: CertificateKind::RadiusBound,
        verdict: if failed.is_none() { Verdict::NoGuidedModes } else { Verdict::Inconclusive },
        evidence: Evidence::RadiusBound { radius, bound, alpha },
        failed_premise: failed,
    })
}

/// Per-harmonic radial field `u(r, θ, z) = Σ_m u_m(r) e^{iℓθ} e^{i(m+κ)z}`.
pub trait RadialField {
    fn m_set(&self) -> &[i64];
    fn value(&self, m: i64, r: f64) -> C64;
    /// `u_m′(r)`; at an interface, the limit from the inside.
    fn derivative(&self, m: i64, r: f64) -> C64;
    /// `u_m′(R⁺)` on the exterior side of `Γ_R`.
    fn boundary_derivative(&self, m: i64) -> C64;
}

/// P1 coefficient field of a discrete system.
#[derive(Debug, Clone)]
pub struct DiscreteField<'a> {
    pub layout: &'a DofLayout,
    pub mesh: &'a RadialMesh,
    pub vector: &'a [C64],
    /// `u_m′(R⁺)` per block.
    pub boundary_derivatives: Vec<C64>,
}

impl<'a> DiscreteField<'a> {
    /// Boundary derivatives from the DtN relation `u_m′ = −γ_{mℓ} u_m`.
    pub fn with_dtn(layout: &'a DofLayout, mesh: &'a RadialMesh, vector: &'a [C64], p: &BlochParams<f64>, l: i64) -> Result<Self> {
        let radius = mesh.radius();
        let boundary_derivatives = layout
            .m_set
            .iter()
            .enumerate()
            .map(|(b, &m)| {
                let u = layout.boundary_index(b).map_or(C64::new(0.0, 0.0), |i| vector[i]);
                Ok(-gamma_coefficient(&HarmonicData::new(m, p), l, radius)? * u)
            })
            .collect::<Result<_>>()?;
        Ok(Self { layout, mesh, vector, boundary_derivatives })
    }

    fn nodal(&self, m: i64, node: usize) -> C64 {
        let b = self.layout.block_of(m).expect("m in layout");
        self.layout.index(b, node).map_or(C64::new(0.0, 0.0), |i| self.vector[i])
    }

    fn element(&self, r: f64) -> usize {
        let nodes = self.mesh.nodes();
        let e = nodes.partition_point(|&x| x < r);
        e.clamp(1, nodes.len() - 1) - 1
    }
}

impl RadialField for DiscreteField<'_> {
    fn m_set(&self) -> &[i64] {
        &self.layout.m_set
    }

    fn value(&self, m: i64, r: f64) -> C64 {
        let e = self.element(r);
        let (a, b) = (self.mesh.nodes()[e], self.mesh.nodes()[e + 1]);
        let t = (r - a) / (b - a);
        self.nodal(m, e) * (1.0 - t) + self.nodal(m, e + 1) * t
    }

    fn derivative(&self, m: i64, r: f64) -> C64 {
        let e = self.element(r);
        let (a, b) = (self.mesh.nodes()[e], self.mesh.nodes()[e + 1]);
        (self.nodal(m, e + 1) - self.nodal(m, e)) / (b - a)
    }

    fn boundary_derivative(&self, m: i64) -> C64 {
        self.boundary_derivatives[self.layout.block_of(m).expect("m in layout")]
    }
}

/// Both sides of the Rellich identity
/// `2∫μ⁻¹|∇⊥u|² + Σ_ρ ρ²∮(ω²[ε]|u|² + [μ]|μ₋⁻¹u_r⁻|² − [μ⁻¹]|∇_t u|²)
///  − 2Rμ₀⁻¹ Re Σ ū_m u_m′(R) = R² Σ_m (μ₀⁻¹|u_m′|² + (ω²ε₀ − μ₀⁻¹(ℓ²/R² + (m+κ)²))|u_m|²)`,
/// normalized by `(2π)²`. Volume integrals use `gauss_points` per element of
/// `mesh`. For a radially nondecreasing medium every left-hand term is
/// nonnegative.
pub fn rellich_identity(
    field: &impl RadialField,
    spec: &MediumSpec,
    p: &BlochParams<f64>,
    l: i64,
    mesh: &RadialMesh,
    gauss_points: usize,
) -> Result<(f64, f64)> {
    let m_set = field.m_set().to_vec();
    let span = m_set.iter().max().copied().unwrap_or(0) - m_set.iter().min().copied().unwrap_or(0);
    let table = z_fourier(spec, span.max(1));
    let rule = GaussRule::new(gauss_points);
    let l2 = (l * l) as f64;
    let w2 = p.omega * p.omega;
    let nodes = mesh.nodes();

    let mut volume = 0.0;
    for e in 0..mesh.elements() {
        let (ra, rb) = (nodes[e], nodes[e + 1]);
        let region = table.region_of(0.5 * (ra + rb));
        for (r, w) in rule.points(ra, rb) {
            let u: Vec<C64> = m_set.iter().map(|&m| field.value(m, r)).collect();
            let du: Vec<C64> = m_set.iter().map(|&m| field.derivative(m, r)).collect();
            let mut s = C64::new(0.0, 0.0);
            for (i, &m) in m_set.iter().enumerate() {
                for (j, &mp) in m_set.iter().enumerate() {
                    let c = table.inv_mu(region, m - mp);
                    if c.norm() == 0.0 {
                        continue;
                    }
                    s += c * (du[j] * du[i].conj() * r + u[j] * u[i].conj() * (l2 / r));
                }
            }
            volume += 2.0 * w * s.re;
        }
    }

    let mut interfaces = 0.0;
    let shells = &spec.shells;
    for (k, shell) in shells.iter().enumerate() {
        let rho = shell.outer;
        let (eps_out, mu_out) = match shells.get(k + 1) {
            Some(s) => (s.eps.clone(), s.mu.clone()),
            None => (ZProfile::Constant(spec.eps0), ZProfile::Constant(spec.mu0)),
        };
        let at_boundary = rho >= spec.radius;
        let u: Vec<C64> = m_set.iter().map(|&m| field.value(m, rho)).collect();
        // flux μ⁻¹u_r is continuous; take it from the side where it is known
        let flux_inner = !at_boundary;
        let du: Vec<C64> = m_set
            .iter()
            .map(|&m| if flux_inner { field.derivative(m, rho) } else { field.boundary_derivative(m) })
            .collect();
        let profiles = [&shell.eps, &shell.mu, &eps_out, &mu_out];
        let integrand = |z: f64| {
            let synth = |c: &[C64], shift: bool| -> C64 {
                m_set
                    .iter()
                    .zip(c)
                    .map(|(&m, &a)| {
                        let k = m as f64 + p.kappa;
                        let f = if shift { C64::new(0.0, k) } else { C64::new(1.0, 0.0) };
                        a * f * C64::from_polar(1.0, k * z)
                    })
                    .sum()
            };
            let uz = synth(&u, false).norm_sqr();
            let dz = synth(&u, true).norm_sqr();
            let q_raw = synth(&du, false);
            let (e_in, m_in, e_out, m_out) = (
                shell.eps.evaluate(z),
                shell.mu.evaluate(z),
                eps_out.evaluate(z),
                mu_out.evaluate(z),
            );
            let q = if flux_inner { q_raw / m_in } else { q_raw / m_out };
            w2 * (e_out - e_in) * uz + (m_out - m_in) * q.norm_sqr() - (1.0 / m_out - 1.0 / m_in) * (l2 / (rho * rho) * uz + dz)
        };
        interfaces += rho * rho * z_integral(&profiles, &integrand) / (2.0 * PI);
    }

    let (radius, mu0) = (spec.radius, spec.mu0);
    let mut boundary = 0.0;
    let mut rhs = 0.0;
    for &m in &m_set {
        let u = field.value(m, radius);
        let du = field.boundary_derivative(m);
        boundary -= 2.0 * radius / mu0 * (u.conj() * du).re;
        let k = m as f64 + p.kappa;
        rhs += radius * radius * (du.norm_sqr() / mu0 + (w2 * spec.eps0 - (l2 / (radius * radius) + k * k) / mu0) * u.norm_sqr());
    }
    Ok((volume + interfaces + boundary, rhs))
}

/// `∫_{−π}^{π} f(z) dz` with Gauss panels split at every profile break.
fn z_integral(profiles: &[&ZProfile], f: &impl Fn(f64) -> f64) -> f64 {
    let mut breaks = vec![-PI, PI];
    let mut smooth = false;
    for p in profiles {
        breaks.extend_from_slice(p.breakpoints());
        smooth |= matches!(p, ZProfile::Harmonic { .. });
    }
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    let sub = if smooth { 64 } else { 16 };
    let rule = GaussRule::new(8);
    let mut s = 0.0;
    for w in breaks.windows(2) {
        let h = (w[1] - w[0]) / sub as f64;
        for i in 0..sub {
            let a = w[0] + h * i as f64;
            s += rule.integrate(a, a + h, f);
        }
    }
    s
}

/// The Rellich identity for a computed mode, with `u_m′(R) = −γ u_m(R)`.
pub fn rellich_residual(mode: &ModeResult, spec: &MediumSpec, mesh: &RadialMesh) -> Result<(f64, f64)> {
    let p = BlochParams::new(mode.kappa, mode.omega, spec.eps0, spec.mu0)?;
    let field = DiscreteField::with_dtn(&mode.layout, mesh, &mode.vector, &p, mode.l)?;
    rellich_identity(&field, spec, &p, mode.l, mesh, 12)
}

/// `(κ, ω)` grid swept when trying to falsify a certificate.
#[derive(Debug, Clone, PartialEq)]
pub struct FalsificationGrid {
    pub kappas: Vec<f64>,
    pub ls: Vec<i64>,
    /// Upper end of the above-cutoff sweep.
    pub omega_max: f64,
    /// Sweep points above cutoff per `(κ, ℓ)`.
    pub omega_samples: usize,
    pub m_max: i64,
    pub elements: usize,
    /// Branches examined per sweep.
    pub branches: usize,
}

impl FalsificationGrid {
    pub fn standard() -> Self {
        Self {
            kappas: vec![0.1, 0.25, 0.4],
            ls: vec![0, 1],
            omega_max: 1.5,
            omega_samples: 16,
            m_max: 2,
            elements: 40,
            branches: 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FalsificationReport {
    /// Dispersion roots found (verified or not).
    pub candidates: usize,
    /// `(κ, ℓ, ω)` of roots that passed guided-mode verification.
    pub verified: Vec<(f64, i64, f64)>,
    /// Rellich sides `(lhs, rhs)` of the first candidate.
    pub first_identity: Option<(f64, f64)>,
}

/// Dispersion search over `grid`: every root of `λ_j(ω) = ω²` below cutoff
/// and along an above-cutoff `ω` sweep, each checked with `verify_guided`.
pub fn falsification_search(spec: &MediumSpec, grid: &FalsificationGrid) -> Result<FalsificationReport> {
    let mesh = build_mesh(spec.radius, grid.elements, Grading::Uniform, &spec.radial_breakpoints())?;
    let solver = ModeSolver::new(spec, &mesh, 2 * grid.m_max)?;
    let m_set: Vec<i64> = (-grid.m_max..=grid.m_max).collect();
    let jobs: Vec<(f64, i64)> = grid.kappas.iter().flat_map(|&k| grid.ls.iter().map(move |&l| (k, l))).collect();
    let found: Vec<Vec<ModeResult>> = jobs
        .par_iter()
        .map(|&(kappa, l)| sweep(&solver, grid, kappa, l, &m_set))
        .collect::<Result<_>>()?;
    let modes: Vec<ModeResult> = found.into_iter().flatten().collect();
    let mut verified = Vec::new();
    for mode in &modes {
        if solver.verify_guided(mode, &m_set)?.passes(GUIDED_TOLERANCE) {
            verified.push((mode.kappa, mode.l, mode.omega));
        }
    }
    let first_identity = modes.first().map(|m| rellich_residual(m, spec, &mesh)).transpose()?;
    Ok(FalsificationReport { candidates: modes.len(), verified, first_identity })
}

fn sweep(solver: &ModeSolver, grid: &FalsificationGrid, kappa: f64, l: i64, m_set: &[i64]) -> Result<Vec<ModeResult>> {
    let mut out = Vec::new();
    if kappa != 0.0 {
        out.extend(solver.below_cutoff_spectrum(kappa, l, m_set, grid.branches)?);
    }
    let c = (solver.spec().eps0 * solver.spec().mu0).sqrt();
    let lo = (kappa.abs() / c).max(1e-3) * (1.0 + 1e-6);
    if grid.omega_max <= lo || grid.omega_samples < 2 {
        return Ok(out);
    }
    let omegas: Vec<f64> =
        (0..grid.omega_samples).map(|i| lo + (grid.omega_max - lo) * i as f64 / (grid.omega_samples - 1) as f64).collect();
    for j in 0..grid.branches {
        let g: Vec<f64> = omegas.iter().map(|&w| solver.g(kappa, w, l, m_set, j)).collect::<Result<_>>()?;
        for k in 1..omegas.len() {
            if g[k].signum() != g[k - 1].signum() {
                if let Some(mode) = solver.solve_dispersion(kappa, l, m_set, j, (omegas[k - 1], omegas[k]))? {
                    out.push(mode);
                }
            }
        }
    }
    Ok(out)
}

/// Monotone-media certificate at `(κ, ω)`: `NoGuidedModes` iff `ε`, `μ` are
/// radially nondecreasing. The falsification search runs either way; a
/// verified mode under a `NoGuidedModes` verdict is a contradiction.
pub fn certify_monotone(spec: &MediumSpec, grid: &FalsificationGrid) -> Result<Certificate> {
    let monotone = spec.is_radially_monotone();
    let search = falsification_search(spec, grid)?;
    if monotone && !search.verified.is_empty() {
        return Err(PillarError::Contradiction(format!(
            "radially monotone medium has verified guided modes at (kappa, l, omega) = {:?}",
            search.verified
        )));
    }
    let (lhs, rhs) = search.first_identity.map_or((None, None), |(a, b)| (Some(a), Some(b)));
    Ok(Certificate {
        kind: CertificateKind::RellichResidual,
        verdict: if monotone { Verdict::NoGuidedModes } else { Verdict::Inconclusive },
        evidence: Evidence::Rellich { monotone, lhs, rhs, search: Some(search) },
        failed_premise: (!monotone).then(|| "monotone: eps or mu decreases in r somewhere".to_string()),
    })
}
