//! Guided modes: min-max eigenvalues `λ_j(ω)` of `(A_e(ω), B)`, dispersion
//! roots `ω² = λ_j(ω)`, the below-cutoff spectrum and embedded modes on the
//! invariant subspace `V`.

use std::collections::HashMap;
use std::sync::{Arc, RwLock};

use faer::Mat;
use rayon::prelude::*;

use crate::assembly::{Assembler, BoundaryMode, DofLayout, RadialMesh};
use crate::error::{PillarError, Result};
use crate::harmonics::{gamma_coefficient, BlochParams, HarmonicClass, HarmonicData, TraceExpansion};
use crate::linalg::{matvec, norm2, CholeskyPencil};
use crate::medium::MediumSpec;
use crate::C64;

/// Iteration cap of the bisection on `g_j`.
pub const BISECTION_CAP: usize = 80;
/// Accepted fixed-point mismatch `|λ_j(ω) − ω²| / ω²`.
pub const ROOT_TOLERANCE: f64 = 1e-10;
/// Default threshold of the guided-mode verification.
pub const GUIDED_TOLERANCE: f64 = 1e-8;
/// Minimum `|⟨x, B y⟩|` for two eigenvectors to count as the same branch.
pub const OVERLAP_THRESHOLD: f64 = 0.7;
/// Multiplicative step of the contrast continuation.
pub const CONTINUATION_STEP: f64 = 1.25;
const CONTINUATION_STEPS: usize = 60;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// The §4.1 subspace: Fourier indices within `M` of a multiple of
/// `L = 2M + N + 2` are banned.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SubspaceSpec {
    pub m: i64,
    pub n: i64,
}

impl SubspaceSpec {
    pub fn new(m: i64, n: i64) -> Result<Self> {
        if m < 0 || n < 0 {
            return Err(PillarError::domain("SubspaceSpec", format!("M = {m}, N = {n} must be >= 0")));
        }
        Ok(Self { m, n })
    }

    pub fn period_divisor(&self) -> i64 {
        2 * self.m + self.n + 2
    }

    pub fn is_banned(&self, m: i64) -> bool {
        let l = self.period_divisor();
        let r = m.rem_euclid(l);
        r <= self.m || l - r <= self.m
    }

    /// Strengthened window `(M + |κ|)² < ε₀μ₀ω² < (M + 1 − |κ|)²`, as
    /// bounds on `ω`.
    pub fn window(&self, p: &BlochParams<f64>) -> Result<(f64, f64)> {
        let c = (p.eps0 * p.mu0).sqrt();
        let k = p.kappa.abs();
        let lo = (self.m as f64 + k) / c;
        let hi = (self.m as f64 + 1.0 - k) / c;
        if lo < hi {
            Ok((lo, hi))
        } else {
            Err(PillarError::WindowEmpty(format!(
                "(M + |kappa|)^2 = {} is not below (M + 1 - |kappa|)^2 = {} for kappa = {}",
                (self.m as f64 + k).powi(2),
                (self.m as f64 + 1.0 - k).powi(2),
                p.kappa
            )))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModeKind {
    BelowCutoff,
    Embedded,
}

impl ModeKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ModeKind::BelowCutoff => "below-cutoff",
            ModeKind::Embedded => "embedded",
        }
    }
}

/// A dispersion root with its eigenvector.
#[derive(Debug, Clone)]
pub struct ModeResult {
    pub omega: f64,
    pub kappa: f64,
    pub l: i64,
    /// Index `j` (0-based) of `λ_j` at the root.
    pub branch: usize,
    pub layout: DofLayout,
    /// `B`-normalized coefficient vector in `layout`.
    pub vector: Vec<C64>,
    pub trace: TraceExpansion<f64>,
    /// Radiating part of the trace relative to the whole trace; see
    /// [`radiating`].
    pub propagating_trace_norm: f64,
    /// `|λ_j(ω) − ω²| / ω²` at the returned frequency.
    pub fixed_point_residual: f64,
    pub kind: ModeKind,
}

impl ModeResult {
    /// Largest block norm over `m ∉ Lℤ`, relative to the largest block norm.
    pub fn off_lattice_content(&self, l_div: i64) -> f64 {
        let norms: Vec<(i64, f64)> = self
            .layout
            .m_set
            .iter()
            .map(|&m| (m, norm2(&self.layout.radial_profile(&self.vector, m))))
            .collect();
        let max = norms.iter().map(|x| x.1).fold(0.0, f64::max);
        if max == 0.0 {
            return 0.0;
        }
        norms.iter().filter(|(m, _)| m.rem_euclid(l_div) != 0).map(|x| x.1).fold(0.0, f64::max) / max
    }
}

/// `(κ, ω_j(κ))` samples of one branch.
#[derive(Debug, Clone)]
pub struct DispersionCurve {
    pub l: i64,
    pub branch: usize,
    /// `(κ, ω, branch index used, propagating trace norm)`, sorted by κ.
    pub samples: Vec<DispersionSample>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DispersionSample {
    pub kappa: f64,
    pub omega: f64,
    pub index: usize,
    pub propagating_trace_norm: f64,
}

/// Cholesky-reduced pencil of one coupling class, `C(ω) = C_int + W D(ω) Wᴴ`.
struct Pencil {
    layout: DofLayout,
    chol: CholeskyPencil,
    c_int: Mat<C64>,
    /// `L⁻¹ e_i` for each boundary dof, with its block.
    boundary: Vec<(usize, Vec<C64>)>,
}

/// Eigen-solver front end for one medium and mesh.
pub struct ModeSolver {
    asm: Assembler,
    pencils: RwLock<HashMap<(i64, u64, Vec<i64>), Arc<Pencil>>>,
}

impl std::fmt::Debug for ModeSolver {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ModeSolver").field("asm", &self.asm).finish()
    }
}

/// Splits `m_set` into classes that the medium never couples.
pub fn coupling_classes(m_set: &[i64], support: &[i64]) -> Vec<Vec<i64>> {
    let g = support.iter().fold(0i64, |g, &q| gcd(g, q.abs()));
    if g == 0 {
        return m_set.iter().map(|&m| vec![m]).collect();
    }
    let mut classes: Vec<Vec<i64>> = Vec::new();
    for &m in m_set {
        match classes.iter_mut().find(|c| (c[0] - m).rem_euclid(g) == 0) {
            Some(c) => c.push(m),
            None => classes.push(vec![m]),
        }
    }
    classes
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Eigenvalues with their class and local index, merged and sorted.
struct Spectrum {
    values: Vec<f64>,
}

impl ModeSolver {
    /// `q_max` must cover the largest `|m − m′|` used later.
    pub fn new(spec: &MediumSpec, mesh: &RadialMesh, q_max: i64) -> Result<Self> {
        Ok(Self::from_assembler(Assembler::new(spec, mesh, q_max)?))
    }

    pub fn from_assembler(asm: Assembler) -> Self {
        Self { asm, pencils: RwLock::new(HashMap::new()) }
    }

    /// Solver closed by a Dirichlet wall at `R` (validation only).
    pub fn dirichlet(spec: &MediumSpec, mesh: &RadialMesh, q_max: i64) -> Result<Self> {
        Ok(Self::from_assembler(Assembler::new(spec, mesh, q_max)?.with_boundary(BoundaryMode::Dirichlet)))
    }

    pub fn assembler(&self) -> &Assembler {
        &self.asm
    }

    pub fn spec(&self) -> &MediumSpec {
        self.asm.spec()
    }

    fn classes(&self, m_set: &[i64]) -> Vec<Vec<i64>> {
        coupling_classes(m_set, &self.asm.fourier().support())
    }

    fn pencil(&self, l: i64, kappa: f64, class: &[i64]) -> Result<Arc<Pencil>> {
        let key = (l, kappa.to_bits(), class.to_vec());
        if let Some(p) = self.pencils.read().expect("pencil lock").get(&key) {
            return Ok(Arc::clone(p));
        }
        let interior = self.asm.interior(l, kappa, class)?;
        let chol = CholeskyPencil::new(interior.mass.as_ref())?;
        let c_int = chol.reduce(interior.stiffness.as_ref());
        let layout = interior.layout.clone();
        let mut boundary = Vec::new();
        for b in 0..class.len() {
            if let Some(i) = layout.boundary_index(b) {
                let e = Mat::from_fn(layout.dim(), 1, |r, _| if r == i { C64::new(1.0, 0.0) } else { ZERO });
                let w = chol.left_solve(e.as_ref());
                boundary.push((b, (0..layout.dim()).map(|r| w[(r, 0)]).collect()));
            }
        }
        let pencil = Arc::new(Pencil { layout, chol, c_int, boundary });
        let mut w = self.pencils.write().expect("pencil lock");
        Ok(Arc::clone(w.entry(key).or_insert(pencil)))
    }

    /// `C(ω)` of one class: interior plus the `T_e` boundary terms.
    fn reduced(&self, pencil: &Pencil, p: &BlochParams<f64>, l: i64) -> Result<Mat<C64>> {
        let mut c = pencil.c_int.clone();
        let radius = self.spec().radius;
        let mu0 = self.spec().mu0;
        for (b, w) in &pencil.boundary {
            let h = HarmonicData::new(pencil.layout.m_set[*b], p);
            if h.class == HarmonicClass::Propagating {
                continue;
            }
            let d = gamma_coefficient(&h, l, radius)?.re * radius / mu0;
            if d == 0.0 {
                continue;
            }
            for j in 0..w.len() {
                let wj = w[j].conj() * d;
                if wj == ZERO {
                    continue;
                }
                for i in 0..w.len() {
                    c[(i, j)] += w[i] * wj;
                }
            }
        }
        Ok(c)
    }

    fn spectrum(&self, p: &BlochParams<f64>, l: i64, m_set: &[i64]) -> Result<Spectrum> {
        let mut values = Vec::new();
        for class in self.classes(m_set) {
            let pencil = self.pencil(l, p.kappa, &class)?;
            let c = self.reduced(&pencil, p, l)?;
            values.extend(pencil.chol.eigenvalues_of_reduced(c.as_ref())?);
        }
        values.sort_by(f64::total_cmp);
        Ok(Spectrum { values })
    }

    /// The `count` smallest `λ_j(ω)` of `(A_e(ω), B)` over `m_set`.
    pub fn eigen_sequence(&self, p: &BlochParams<f64>, l: i64, m_set: &[i64], count: usize) -> Result<Vec<f64>> {
        if count == 0 {
            return Err(PillarError::domain("eigen_sequence", "count must be at least 1"));
        }
        let mut v = self.spectrum(p, l, m_set)?.values;
        v.truncate(count);
        Ok(v)
    }

    /// Eigenpairs (ascending) with vectors in the layout of `m_set`.
    pub fn eigenpairs(&self, p: &BlochParams<f64>, l: i64, m_set: &[i64]) -> Result<(Vec<f64>, Vec<Vec<C64>>, DofLayout)> {
        let full = self.asm.interior(l, p.kappa, m_set)?.layout.clone();
        let mut pairs: Vec<(f64, Vec<C64>)> = Vec::new();
        for class in self.classes(m_set) {
            let pencil = self.pencil(l, p.kappa, &class)?;
            let c = self.reduced(&pencil, p, l)?;
            let ge = pencil.chol.eigen_of_reduced(c.as_ref())?;
            for k in 0..ge.values.len() {
                let x: Vec<C64> = (0..pencil.layout.dim()).map(|i| ge.vectors[(i, k)]).collect();
                pairs.push((ge.values[k], pencil.layout.embed_into(&x, &full)));
            }
        }
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let (values, vectors) = pairs.into_iter().unzip();
        Ok((values, vectors, full))
    }

    /// `g_j(ω) = λ_j(ω) − ω²`.
    pub fn g(&self, kappa: f64, omega: f64, l: i64, m_set: &[i64], branch: usize) -> Result<f64> {
        let p = self.params(kappa, omega)?;
        let s = self.spectrum(&p, l, m_set)?;
        s.values
            .get(branch)
            .map(|v| v - omega * omega)
            .ok_or_else(|| PillarError::domain("g", format!("branch {branch} exceeds the discrete dimension")))
    }

    fn params(&self, kappa: f64, omega: f64) -> Result<BlochParams<f64>> {
        BlochParams::new(kappa, omega, self.spec().eps0, self.spec().mu0)
    }

    /// Bisection root of `g_j` on `[lo, hi]`; `None` without a sign change,
    /// or when the sign change is a jump rather than a root.
    pub fn solve_dispersion(
        &self,
        kappa: f64,
        l: i64,
        m_set: &[i64],
        branch: usize,
        bracket: (f64, f64),
    ) -> Result<Option<ModeResult>> {
        let (mut lo, mut hi) = bracket;
        if !(lo > 0.0 && hi > lo) {
            return Err(PillarError::domain("solve_dispersion", format!("invalid bracket [{lo}, {hi}]")));
        }
        let mut g_lo = self.g(kappa, lo, l, m_set, branch)?;
        let g_hi = self.g(kappa, hi, l, m_set, branch)?;
        if g_lo == 0.0 {
            return self.mode_at(kappa, lo, l, m_set, branch).map(Some);
        }
        if g_hi == 0.0 {
            return self.mode_at(kappa, hi, l, m_set, branch).map(Some);
        }
        if g_lo.signum() == g_hi.signum() {
            return Ok(None);
        }
        let mut best = (f64::INFINITY, lo);
        for _ in 0..BISECTION_CAP {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            let gm = self.g(kappa, mid, l, m_set, branch)?;
            let rel = gm.abs() / (mid * mid);
            if rel < best.0 {
                best = (rel, mid);
            }
            if gm == 0.0 {
                break;
            }
            if gm.signum() == g_lo.signum() {
                lo = mid;
                g_lo = gm;
            } else {
                hi = mid;
            }
        }
        if best.0 >= ROOT_TOLERANCE {
            return Ok(None);
        }
        self.mode_at(kappa, best.1, l, m_set, branch).map(Some)
    }

    /// Packages the `branch`-th eigenpair at `(κ, ω)` as a mode.
    pub fn mode_at(&self, kappa: f64, omega: f64, l: i64, m_set: &[i64], branch: usize) -> Result<ModeResult> {
        let p = self.params(kappa, omega)?;
        let (values, vectors, layout) = self.eigenpairs(&p, l, m_set)?;
        let lambda = values[branch];
        let vector = vectors[branch].clone();
        let trace = trace_of(&layout, &vector, l, self.spec().radius);
        let propagating_trace_norm = relative_propagating_norm(&trace, &p);
        Ok(ModeResult {
            omega,
            kappa,
            l,
            branch,
            layout,
            vector,
            trace,
            propagating_trace_norm,
            fixed_point_residual: (lambda - omega * omega).abs() / (omega * omega),
            kind: if p.is_below_cutoff() { ModeKind::BelowCutoff } else { ModeKind::Embedded },
        })
    }

    /// Frequencies strictly below the light line where guided modes can
    /// live: `[|κ|/√(μ₊ε₊), |κ|/√(μ₀ε₀))`.
    pub fn below_cutoff_bracket(&self, kappa: f64) -> Option<(f64, f64)> {
        let b = self.spec().bounds();
        let lo = kappa.abs() / (b.mu_max * b.eps_max).sqrt();
        let hi = kappa.abs() / (self.spec().mu0 * self.spec().eps0).sqrt();
        (lo < hi && lo > 0.0).then_some((lo, hi * (1.0 - 1e-9)))
    }

    /// All dispersion roots below cutoff for azimuthal index `l`, ascending in
    /// `ω` (and therefore in branch index), at most `count`.
    pub fn below_cutoff_spectrum(&self, kappa: f64, l: i64, m_set: &[i64], count: usize) -> Result<Vec<ModeResult>> {
        if kappa == 0.0 {
            return Err(PillarError::domain("below_cutoff_spectrum", "kappa = 0 has no region below cutoff"));
        }
        let Some(bracket) = self.below_cutoff_bracket(kappa) else {
            return Ok(Vec::new());
        };
        let mut out = Vec::new();
        for branch in 0..count {
            // g_j decreases in ω and is nonnegative at the lower bound, so a
            // root exists iff g_j < 0 just below cutoff
            if self.g(kappa, bracket.1, l, m_set, branch)? >= 0.0 {
                break;
            }
            match self.solve_dispersion(kappa, l, m_set, branch, bracket)? {
                Some(mode) => out.push(mode),
                None => break,
            }
        }
        Ok(out)
    }

    /// Weak-form residual and trace diagnostics of `vector` (laid out over
    /// `layout`) against the unrestricted system over `full_m_set`.
    pub fn verify_field(
        &self,
        p: &BlochParams<f64>,
        l: i64,
        layout: &DofLayout,
        vector: &[C64],
        full_m_set: &[i64],
    ) -> Result<GuidedReport> {
        let sys = self.asm.assemble(p, l, full_m_set)?;
        let x = layout.embed_into(vector, &sys.layout);
        let w2 = p.omega * p.omega;
        let ax = matvec(sys.a_e.as_ref(), &x);
        let apx = matvec(sys.a_p.as_ref(), &x);
        let bx = matvec(sys.b.as_ref(), &x);
        let r: Vec<C64> = (0..x.len()).map(|i| ax[i] + apx[i] - bx[i] * w2).collect();
        let scale = norm2(&ax) + w2 * norm2(&bx);
        let residual = if scale > 0.0 { norm2(&r) / scale } else { 0.0 };
        let trace = sys.trace(&x);
        let propagating_trace_norm = relative_propagating_norm(&trace, p);
        Ok(GuidedReport {
            propagating_trace_norm,
            residual,
            decay_rate: evanescent_decay_rate(&trace, p),
            propagating_set: p.propagating_indices(),
        })
    }

    pub fn verify_guided(&self, mode: &ModeResult, full_m_set: &[i64]) -> Result<GuidedReport> {
        let p = self.params(mode.kappa, mode.omega)?;
        self.verify_field(&p, mode.l, &mode.layout, &mode.vector, full_m_set)
    }

    /// Branch `branch` at each κ, following eigenvector overlap between
    /// neighbouring samples. Samples without a root are skipped.
    pub fn dispersion_curve(
        &self,
        kappas: &[f64],
        l: i64,
        m_set: &[i64],
        branch: usize,
        bracket: impl Fn(f64) -> Option<(f64, f64)>,
    ) -> Result<DispersionCurve> {
        let mut sorted = kappas.to_vec();
        sorted.sort_by(f64::total_cmp);
        let mut samples = Vec::new();
        let mut prev: Option<ModeResult> = None;
        for &kappa in &sorted {
            let Some(br) = bracket(kappa) else { continue };
            let index = match &prev {
                Some(pm) => self.track(pm, kappa, l, m_set)?.unwrap_or(pm.branch),
                None => branch,
            };
            if let Some(mode) = self.solve_dispersion(kappa, l, m_set, index, br)? {
                samples.push(DispersionSample {
                    kappa,
                    omega: mode.omega,
                    index: mode.branch,
                    propagating_trace_norm: mode.propagating_trace_norm,
                });
                prev = Some(mode);
            }
        }
        Ok(DispersionCurve { l, branch, samples })
    }

    /// Index at `kappa` (same ω) whose eigenvector overlaps the previous
    /// mode by more than [`OVERLAP_THRESHOLD`].
    fn track(&self, prev: &ModeResult, kappa: f64, l: i64, m_set: &[i64]) -> Result<Option<usize>> {
        let p = self.params(kappa, prev.omega)?;
        let (_, vectors, _) = self.eigenpairs(&p, l, m_set)?;
        let mass = self.asm.interior(l, kappa, m_set)?;
        let bx = matvec(mass.mass.as_ref(), &prev.vector);
        let best = vectors
            .iter()
            .enumerate()
            .map(|(k, v)| (k, v.iter().zip(&bx).map(|(a, b)| a.conj() * b).sum::<C64>().norm()))
            .fold((0, 0.0), |a, b| if b.1 > a.1 { b } else { a });
        Ok((best.1 > OVERLAP_THRESHOLD).then_some(best.0))
    }
}

/// Diagnostics of a candidate guided mode.
#[derive(Debug, Clone, PartialEq)]
pub struct GuidedReport {
    /// Radiating part of the trace ([`radiating`]) relative to the whole
    /// trace.
    pub propagating_trace_norm: f64,
    /// `‖(A_e + A_p − ω²B) x‖ / (‖A_e x‖ + ω²‖B x‖)` on the full system.
    pub residual: f64,
    /// Least-squares slope of `ln|û_m|` against `|m + κ|` over evanescent
    /// `m` (negative when the trace decays), if at least two are nonzero.
    pub decay_rate: Option<f64>,
    pub propagating_set: Vec<i64>,
}

impl GuidedReport {
    pub fn passes(&self, tol: f64) -> bool {
        self.propagating_trace_norm < tol && self.residual < tol
    }
}

fn trace_of(layout: &DofLayout, x: &[C64], l: i64, radius: f64) -> TraceExpansion<f64> {
    let mut t = TraceExpansion::new(radius);
    for (b, &m) in layout.m_set.iter().enumerate() {
        t.coefficients.insert((m, l), layout.boundary_index(b).map_or(ZERO, |i| x[i]));
    }
    t
}

/// Harmonics whose trace a guided mode must cancel: `m ∈ Z_p`, and
/// `m ∈ Z_a` with `ℓ = 0` (whose exterior solution `C₁ + C₂ ln r` does not
/// decay).
pub fn radiating(m: i64, l: i64, p: &BlochParams<f64>) -> bool {
    match HarmonicData::new(m, p).class {
        HarmonicClass::Propagating => true,
        HarmonicClass::Algebraic => l == 0,
        HarmonicClass::Evanescent => false,
    }
}

fn relative_propagating_norm(trace: &TraceExpansion<f64>, p: &BlochParams<f64>) -> f64 {
    let total = trace.norm();
    if total == 0.0 {
        return 0.0;
    }
    trace.norm_where(|m, l| radiating(m, l, p)) / total
}

fn evanescent_decay_rate(trace: &TraceExpansion<f64>, p: &BlochParams<f64>) -> Option<f64> {
    let pts: Vec<(f64, f64)> = trace
        .coefficients
        .iter()
        .filter(|((m, _), c)| HarmonicData::new(*m, p).class == HarmonicClass::Evanescent && c.norm() > 0.0)
        .map(|((m, _), c)| ((*m as f64 + p.kappa).abs(), c.norm().ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Outcome of the embedded-mode construction.
#[derive(Debug, Clone)]
pub struct EmbeddedMode {
    pub mode: ModeResult,
    /// Medium after continuation.
    pub spec: MediumSpec,
    /// Factor applied to the permittivity contrast of the input medium.
    pub contrast_scale: f64,
    /// Largest permittivity of the tuned medium.
    pub core_eps: f64,
    pub window: (f64, f64),
    pub report: GuidedReport,
    /// [`ModeResult::off_lattice_content`] for `L`.
    pub off_lattice_content: f64,
}

/// Settings of [`embedded_mode_search`].
#[derive(Debug, Clone)]
pub struct EmbeddedSearch {
    pub sub: SubspaceSpec,
    pub kappa: f64,
    pub l: i64,
    /// Full truncation `|m| <= m_max`; `V` keeps the non-banned part.
    pub m_max: i64,
    pub mesh: RadialMesh,
    pub tolerance: f64,
}

fn check_divisor(spec: &MediumSpec, sub: &SubspaceSpec) -> Result<()> {
    if spec.period_divisor != sub.period_divisor() {
        return Err(PillarError::InvalidMedium(vec![format!(
            "embedded construction with M = {}, N = {} needs period divisor L = {}, medium has {}",
            sub.m,
            sub.n,
            sub.period_divisor(),
            spec.period_divisor
        )]));
    }
    Ok(())
}

/// The lowest `V`-branch root inside the window for a fixed medium.
pub fn embedded_mode_fixed(spec: &MediumSpec, search: &EmbeddedSearch) -> Result<Option<(ModeResult, GuidedReport)>> {
    check_divisor(spec, &search.sub)?;
    let p = BlochParams::new(search.kappa, 1.0, spec.eps0, spec.mu0)?;
    let window = search.sub.window(&p)?;
    let full: Vec<i64> = (-search.m_max..=search.m_max).collect();
    let v = crate::assembly::restrict_to_subspace(&full, |m| search.sub.is_banned(m))?;
    let solver = ModeSolver::new(spec, &search.mesh, 2 * search.m_max)?;
    let Some(mode) = solver.solve_dispersion(search.kappa, search.l, &v, 0, window)? else {
        return Ok(None);
    };
    let report = solver.verify_guided(&mode, &full)?;
    Ok(Some((mode, report)))
}

/// §4.1 construction: scale the permittivity contrast until the lowest
/// `V`-branch root sits at the centre of the strengthened window, then verify
/// the mode on the unrestricted system.
pub fn embedded_mode_search(spec: &MediumSpec, search: &EmbeddedSearch) -> Result<EmbeddedMode> {
    check_divisor(spec, &search.sub)?;
    let p = BlochParams::new(search.kappa, 1.0, spec.eps0, spec.mu0)?;
    let window = search.sub.window(&p)?;
    let target = 0.5 * (window.0 + window.1);
    let full: Vec<i64> = (-search.m_max..=search.m_max).collect();
    let v = crate::assembly::restrict_to_subspace(&full, |m| search.sub.is_banned(m))?;

    // h(t) = λ_0^V(ω_mid; t) − ω_mid², decreasing in the contrast scale t
    let h = |t: f64| -> Result<(f64, ModeSolver)> {
        let scaled = spec.scale_eps_contrast(t)?;
        let solver = ModeSolver::new(&scaled, &search.mesh, 2 * search.m_max)?;
        let g = solver.g(search.kappa, target, search.l, &v, 0)?;
        Ok((g, solver))
    };
    let mut t = 1.0;
    let (mut g, _) = h(t)?;
    let upward = g > 0.0;
    let (mut t_pos, mut t_neg) = if upward { (t, f64::NAN) } else { (f64::NAN, t) };
    for step in 0.. {
        if step == CONTINUATION_STEPS {
            return Err(PillarError::ContinuationExhausted(format!(
                "no sign change of lambda_0 - omega^2 at omega = {target} after {CONTINUATION_STEPS} contrast steps"
            )));
        }
        t = if upward { t * CONTINUATION_STEP } else { t / CONTINUATION_STEP };
        g = match h(t) {
            Ok((g, _)) => g,
            Err(PillarError::InvalidMedium(v)) => {
                return Err(PillarError::ContinuationExhausted(format!("contrast scale {t} invalid: {}", v.join("; "))))
            }
            Err(e) => return Err(e),
        };
        if g > 0.0 {
            t_pos = t;
        } else {
            t_neg = t;
        }
        if t_pos.is_finite() && t_neg.is_finite() {
            break;
        }
    }
    let mut best: Option<(f64, f64, ModeSolver)> = None;
    for _ in 0..BISECTION_CAP {
        let mid = 0.5 * (t_pos + t_neg);
        if mid == t_pos || mid == t_neg {
            break;
        }
        let (gm, solver) = h(mid)?;
        let rel = gm.abs() / (target * target);
        if best.as_ref().is_none_or(|b| rel < b.0) {
            best = Some((rel, mid, solver));
        }
        if rel < ROOT_TOLERANCE * 1e-2 {
            break;
        }
        if gm > 0.0 {
            t_pos = mid;
        } else {
            t_neg = mid;
        }
    }
    let (rel, t_star, solver) = best.expect("at least one bisection step");
    if rel >= ROOT_TOLERANCE {
        return Err(PillarError::ContinuationExhausted(format!(
            "contrast bisection stalled at relative mismatch {rel:e}"
        )));
    }
    let mode = solver.mode_at(search.kappa, target, search.l, &v, 0)?;
    let report = solver.verify_guided(&mode, &full)?;
    let tuned = solver.spec().clone();
    let off = mode.off_lattice_content(search.sub.period_divisor());
    Ok(EmbeddedMode {
        core_eps: tuned.bounds().eps_max,
        spec: tuned,
        contrast_scale: t_star,
        window,
        off_lattice_content: off,
        report,
        mode: ModeResult { kind: ModeKind::Embedded, ..mode },
    })
}

/// Runs [`ModeSolver::below_cutoff_spectrum`] for several `ℓ` in parallel
/// and returns all modes sorted by `(ℓ, ω)`.
pub fn below_cutoff_modes(solver: &ModeSolver, kappa: f64, ls: &[i64], m_set: &[i64], count: usize) -> Result<Vec<ModeResult>> {
    let per_l: Vec<Vec<ModeResult>> = ls
        .par_iter()
        .map(|&l| solver.below_cutoff_spectrum(kappa, l, m_set, count))
        .collect::<Result<_>>()?;
    Ok(per_l.into_iter().flatten().collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::{build_mesh, Grading};

    #[test]
    fn banned_sets() {
        let s = SubspaceSpec::new(0, 0).unwrap();
        assert_eq!(s.period_divisor(), 2);
        let kept: Vec<i64> = (-3..=3).filter(|&m| !s.is_banned(m)).collect();
        assert_eq!(kept, vec![-3, -1, 1, 3]);
        let s = SubspaceSpec::new(1, 0).unwrap();
        assert_eq!(s.period_divisor(), 4);
        let banned: Vec<i64> = (-5..=5).filter(|&m| s.is_banned(m)).collect();
        assert_eq!(banned, vec![-5, -4, -3, -1, 0, 1, 3, 4, 5]);
    }

    #[test]
    fn window_bounds() {
        let s = SubspaceSpec::new(0, 0).unwrap();
        let p = BlochParams::new(0.2, 1.0, 1.0, 1.0).unwrap();
        let (lo, hi) = s.window(&p).unwrap();
        assert!((lo - 0.2).abs() < 1e-15 && (hi - 0.8).abs() < 1e-15);
        let p = BlochParams::new(-0.5, 1.0, 1.0, 1.0).unwrap();
        assert!(matches!(s.window(&p), Err(PillarError::WindowEmpty(_))));
    }

    #[test]
    fn classes_follow_support() {
        assert_eq!(coupling_classes(&[-2, -1, 0, 1, 2], &[0]), vec![vec![-2], vec![-1], vec![0], vec![1], vec![2]]);
        assert_eq!(coupling_classes(&[-2, -1, 0, 1, 2], &[-2, 0, 2]), vec![vec![-2, 0, 2], vec![-1, 1]]);
        assert_eq!(coupling_classes(&[-1, 0, 1], &[-1, 0, 1]), vec![vec![-1, 0, 1]]);
    }

    #[test]
    fn split_spectrum_matches_coupled_solve() {
        let spec = MediumSpec::step_core(4.0, 1.0, 0.5, 1.0, 1.0, 1.0).unwrap();
        let mesh = build_mesh(1.0, 20, Grading::Uniform, &[0.5]).unwrap();
        let solver = ModeSolver::new(&spec, &mesh, 4).unwrap();
        let p = BlochParams::new(0.3, 0.2, 1.0, 1.0).unwrap();
        let m_set = [-2, -1, 0, 1, 2];
        let split = solver.eigen_sequence(&p, 1, &m_set, 30).unwrap();
        let sys = solver.assembler().assemble(&p, 1, &m_set).unwrap();
        let full = crate::linalg::generalized_eigenvalues(sys.a_e.as_ref(), sys.b.as_ref()).unwrap();
        for (a, b) in split.iter().zip(&full) {
            assert!((a - b).abs() < 1e-9 * b.abs().max(1.0), "{a} vs {b}");
        }
    }

    #[test]
    fn homogeneous_has_no_trapped_modes() {
        let spec = MediumSpec::homogeneous(1.0, 1.0, 1.0).unwrap();
        let mesh = build_mesh(1.0, 20, Grading::Uniform, &[]).unwrap();
        let solver = ModeSolver::new(&spec, &mesh, 2).unwrap();
        assert!(solver.below_cutoff_bracket(0.4).is_none());
        assert!(solver.solve_dispersion(0.4, 0, &[-1, 0, 1], 0, (0.05, 0.399)).unwrap().is_none());
    }
}
