//! Radial P1 finite elements × Fourier–Galerkin in `z`, one azimuthal index
//! `ℓ` at a time.
//!
//! Unknowns are the nodal values of `u_m(r)` for each retained `m`, stored
//! block-major (all nodes of the first `m`, then the next). The common
//! `4π²` factor of the `θ`, `z` integrals is dropped from every form.

use std::collections::HashMap;
use std::sync::{Arc, RwLock};

use faer::Mat;

use crate::error::{PillarError, Result};
use crate::harmonics::{gamma_coefficient, BlochParams, DtnEntry, HarmonicClass, HarmonicData, TraceExpansion};
use crate::linalg::hermitian_part;
use crate::medium::{z_fourier, MediumSpec, ZFourierTable};
use crate::quadrature::GaussRule;
use crate::C64;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// Node placement inside each segment between material interfaces.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Grading {
    Uniform,
    /// Cosine clustering toward both ends of every segment.
    GradedToInterfaces,
}

/// `0 = r₀ < r₁ < … < r_n = R`.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialMesh {
    nodes: Vec<f64>,
}

impl RadialMesh {
    pub fn from_nodes(nodes: Vec<f64>) -> Result<Self> {
        if nodes.len() < 2 || nodes[0] != 0.0 {
            return Err(PillarError::InvalidMesh("mesh must start at r = 0 and have an element".into()));
        }
        if nodes.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(PillarError::InvalidMesh("mesh nodes must be strictly increasing".into()));
        }
        Ok(Self { nodes })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn radius(&self) -> f64 {
        self.nodes[self.nodes.len() - 1]
    }

    pub fn elements(&self) -> usize {
        self.nodes.len() - 1
    }
}

/// `n` elements on `[0, radius]` with every breakpoint placed on a node.
/// Elements are shared among segments in proportion to their length.
pub fn build_mesh(radius: f64, n: usize, grading: Grading, breakpoints: &[f64]) -> Result<RadialMesh> {
    if n < 4 {
        return Err(PillarError::InvalidMesh(format!("need at least 4 elements, got {n}")));
    }
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(PillarError::InvalidMesh(format!("radius {radius} must be positive")));
    }
    let mut cuts = vec![0.0];
    let mut sorted: Vec<f64> = breakpoints.to_vec();
    sorted.sort_by(f64::total_cmp);
    for &b in &sorted {
        if !(0.0..=radius).contains(&b) {
            return Err(PillarError::InvalidMesh(format!("breakpoint {b} outside [0, {radius}]")));
        }
        if b > 0.0 && b < radius && b > cuts[cuts.len() - 1] {
            cuts.push(b);
        }
    }
    cuts.push(radius);
    let segments = cuts.len() - 1;
    if n < segments {
        return Err(PillarError::InvalidMesh(format!("{n} elements cannot resolve {segments} material segments")));
    }
    // largest-remainder apportionment with at least one element per segment
    let ideal: Vec<f64> = cuts.windows(2).map(|w| (w[1] - w[0]) / radius * n as f64).collect();
    let mut counts: Vec<usize> = ideal.iter().map(|x| (x.floor() as usize).max(1)).collect();
    while counts.iter().sum::<usize>() < n {
        let k = (0..segments)
            .max_by(|&a, &b| (ideal[a] - counts[a] as f64).total_cmp(&(ideal[b] - counts[b] as f64)).then(b.cmp(&a)))
            .unwrap();
        counts[k] += 1;
    }
    while counts.iter().sum::<usize>() > n {
        let k = (0..segments)
            .filter(|&k| counts[k] > 1)
            .min_by(|&a, &b| (ideal[a] - counts[a] as f64).total_cmp(&(ideal[b] - counts[b] as f64)))
            .unwrap();
        counts[k] -= 1;
    }
    let mut nodes = vec![0.0];
    for (w, &c) in cuts.windows(2).zip(&counts) {
        let (a, b) = (w[0], w[1]);
        for k in 1..c {
            let t = k as f64 / c as f64;
            let s = match grading {
                Grading::Uniform => t,
                Grading::GradedToInterfaces => 0.5 * (1.0 - (std::f64::consts::PI * t).cos()),
            };
            nodes.push(a + (b - a) * s);
        }
        nodes.push(b);
    }
    RadialMesh::from_nodes(nodes)
}

/// How the outer boundary `r = R` is closed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundaryMode {
    /// Transparent DtN condition (the physical problem).
    Dtn,
    /// Homogeneous Dirichlet condition, for validation against disk
    /// eigenvalues.
    Dirichlet,
}

/// Exact P1 element integrals on `[r_a, r_b]`.
#[derive(Debug, Clone, Copy)]
struct ElementMatrices {
    /// `∫ φ_i′ φ_j′ r dr`
    stiff: [[f64; 2]; 2],
    /// `∫ φ_i φ_j r dr`
    mass: [[f64; 2]; 2],
    /// `∫ φ_i φ_j / r dr`; only meaningful away from the axis or with the
    /// axis node eliminated.
    inv_r: [[f64; 2]; 2],
}

fn element_matrices(ra: f64, rb: f64, rule: &GaussRule) -> ElementMatrices {
    let h = rb - ra;
    let s = (ra + rb) / (2.0 * h);
    let stiff = [[s, -s], [-s, s]];
    let maa = h * (3.0 * ra + rb) / 12.0;
    let mbb = h * (ra + 3.0 * rb) / 12.0;
    let mab = h * (ra + rb) / 12.0;
    let mass = [[maa, mab], [mab, mbb]];
    let inv_r = if ra == 0.0 {
        // only φ_b survives (u(0) = 0 for ℓ ≠ 0): ∫ (r/h)² / r dr = 1/2
        [[f64::NAN, f64::NAN], [f64::NAN, 0.5]]
    } else if ra < h {
        let ln = (rb / ra).ln();
        let d = (rb * rb - ra * ra) / 2.0;
        let h2 = h * h;
        let waa = (rb * rb * ln - 2.0 * rb * h + d) / h2;
        let wbb = (ra * ra * ln - 2.0 * ra * h + d) / h2;
        let wab = ((ra + rb) * h - d - ra * rb * ln) / h2;
        [[waa, wab], [wab, wbb]]
    } else {
        // the log form cancels badly for thin elements far from the axis
        let mut w = [[0.0; 2]; 2];
        for (r, wt) in rule.points(ra, rb) {
            let pa = (rb - r) / h;
            let pb = (r - ra) / h;
            w[0][0] += wt * pa * pa / r;
            w[0][1] += wt * pa * pb / r;
            w[1][1] += wt * pb * pb / r;
        }
        w[1][0] = w[0][1];
        w
    };
    ElementMatrices { stiff, mass, inv_r }
}

/// Degree-of-freedom layout of one assembled system.
#[derive(Debug, Clone, PartialEq)]
pub struct DofLayout {
    pub m_set: Vec<i64>,
    /// First mesh node carrying an unknown (1 when `u(0) = 0` is imposed).
    pub first_node: usize,
    /// One past the last mesh node carrying an unknown.
    pub end_node: usize,
    pub mesh_nodes: usize,
}

impl DofLayout {
    pub fn block_size(&self) -> usize {
        self.end_node - self.first_node
    }

    pub fn dim(&self) -> usize {
        self.block_size() * self.m_set.len()
    }

    pub fn block_of(&self, m: i64) -> Option<usize> {
        self.m_set.iter().position(|&x| x == m)
    }

    /// Global index of mesh node `node` in block `block`.
    pub fn index(&self, block: usize, node: usize) -> Option<usize> {
        (node >= self.first_node && node < self.end_node)
            .then(|| block * self.block_size() + node - self.first_node)
    }

    /// Global index of the `r = R` value of block `block`, if it is free.
    pub fn boundary_index(&self, block: usize) -> Option<usize> {
        self.index(block, self.mesh_nodes - 1)
    }

    /// Nodal values of `u_m` on the full mesh, eliminated nodes set to zero.
    pub fn radial_profile(&self, x: &[C64], m: i64) -> Vec<C64> {
        let mut out = vec![ZERO; self.mesh_nodes];
        if let Some(b) = self.block_of(m) {
            for (node, v) in out.iter_mut().enumerate() {
                if let Some(i) = self.index(b, node) {
                    *v = x[i];
                }
            }
        }
        out
    }

    /// Scatters `x` (laid out by `self`) into a layout over a superset of m.
    pub fn embed_into(&self, x: &[C64], target: &DofLayout) -> Vec<C64> {
        let mut out = vec![ZERO; target.dim()];
        for (b, &m) in self.m_set.iter().enumerate() {
            let tb = target.block_of(m).expect("target layout must contain every m");
            for node in self.first_node..self.end_node {
                out[target.index(tb, node).unwrap()] = x[self.index(b, node).unwrap()];
            }
        }
        out
    }
}

/// Interior (ω-independent) matrices of one `(ℓ, κ, m_set)` configuration.
#[derive(Debug)]
pub struct InteriorBlocks {
    pub layout: DofLayout,
    /// `Σ (1/μ)_{m−m′}[S + ℓ²W + (m′+κ)(m+κ)M]`.
    pub stiffness: Mat<C64>,
    /// `Σ (ε)_{m−m′} M`.
    pub mass: Mat<C64>,
}

/// Discretized forms `a_e^ω`, `a_p^ω`, `b` for one `ℓ`.
#[derive(Debug, Clone)]
pub struct AssembledSystem {
    pub l: i64,
    pub params: BlochParams<f64>,
    pub radius: f64,
    pub mu0: f64,
    pub layout: DofLayout,
    pub a_e: Mat<C64>,
    pub a_p: Mat<C64>,
    pub b: Mat<C64>,
    /// `γ_{mℓ}` for each retained `m`, in `layout.m_set` order.
    pub dtn: Vec<DtnEntry<f64>>,
    pub boundary: BoundaryMode,
}

impl AssembledSystem {
    /// `A_e + A_p − ω² B`, the full operator of `a − ω² b`.
    pub fn operator(&self) -> Mat<C64> {
        let w2 = self.params.omega * self.params.omega;
        Mat::from_fn(self.a_e.nrows(), self.a_e.ncols(), |i, j| {
            self.a_e[(i, j)] + self.a_p[(i, j)] - self.b[(i, j)] * w2
        })
    }

    /// `û_{mℓ}(R)` for every retained `m`.
    pub fn trace(&self, x: &[C64]) -> TraceExpansion<f64> {
        let mut t = TraceExpansion::new(self.radius);
        for (b, &m) in self.layout.m_set.iter().enumerate() {
            let v = self.layout.boundary_index(b).map_or(ZERO, |i| x[i]);
            t.coefficients.insert((m, self.l), v);
        }
        t
    }

    pub fn dim(&self) -> usize {
        self.layout.dim()
    }
}

type InteriorKey = (i64, u64, Vec<i64>);

/// Assembles systems for one medium and mesh, caching the ω-independent
/// interior blocks. Safe to share across threads.
pub struct Assembler {
    spec: MediumSpec,
    mesh: RadialMesh,
    fourier: ZFourierTable,
    boundary: BoundaryMode,
    rule: GaussRule,
    cache: RwLock<HashMap<InteriorKey, Arc<InteriorBlocks>>>,
}

impl std::fmt::Debug for Assembler {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Assembler")
            .field("elements", &self.mesh.elements())
            .field("q_max", &self.fourier.q_max)
            .field("boundary", &self.boundary)
            .finish()
    }
}

impl Assembler {
    /// `q_max` bounds `|m − m′|` over every `m_set` assembled later.
    pub fn new(spec: &MediumSpec, mesh: &RadialMesh, q_max: i64) -> Result<Self> {
        spec.validate()?;
        if (mesh.radius() - spec.radius).abs() > 1e-12 * spec.radius {
            return Err(PillarError::InvalidMesh(format!(
                "mesh ends at {} but the truncation radius is {}",
                mesh.radius(),
                spec.radius
            )));
        }
        for b in spec.radial_breakpoints() {
            if !mesh.nodes().iter().any(|&r| (r - b).abs() <= 1e-12 * spec.radius) {
                return Err(PillarError::InvalidMesh(format!("material interface r = {b} is not a mesh node")));
            }
        }
        Ok(Self {
            spec: spec.clone(),
            mesh: mesh.clone(),
            fourier: z_fourier(spec, q_max.max(0)),
            boundary: BoundaryMode::Dtn,
            rule: GaussRule::new(12),
            cache: RwLock::new(HashMap::new()),
        })
    }

    pub fn with_boundary(mut self, boundary: BoundaryMode) -> Self {
        self.boundary = boundary;
        self.cache = RwLock::new(HashMap::new());
        self
    }

    pub fn spec(&self) -> &MediumSpec {
        &self.spec
    }

    pub fn mesh(&self) -> &RadialMesh {
        &self.mesh
    }

    pub fn fourier(&self) -> &ZFourierTable {
        &self.fourier
    }

    pub fn boundary(&self) -> BoundaryMode {
        self.boundary
    }

    fn layout(&self, l: i64, m_set: &[i64]) -> DofLayout {
        let n = self.mesh.nodes().len();
        DofLayout {
            m_set: m_set.to_vec(),
            first_node: usize::from(l != 0),
            end_node: if self.boundary == BoundaryMode::Dirichlet { n - 1 } else { n },
            mesh_nodes: n,
        }
    }

    fn check_m_set(&self, m_set: &[i64]) -> Result<()> {
        if m_set.is_empty() {
            return Err(PillarError::EmptySubspace);
        }
        let mut sorted = m_set.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != m_set.len() {
            return Err(PillarError::InvalidMesh("Fourier index list has duplicates".into()));
        }
        let span = sorted[sorted.len() - 1] - sorted[0];
        if span > self.fourier.q_max {
            return Err(PillarError::InvalidMesh(format!(
                "Fourier indices span {span} but coefficients were prepared up to |q| = {}",
                self.fourier.q_max
            )));
        }
        Ok(())
    }

    /// Cached interior matrices for `(ℓ, κ, m_set)`.
    pub fn interior(&self, l: i64, kappa: f64, m_set: &[i64]) -> Result<Arc<InteriorBlocks>> {
        self.check_m_set(m_set)?;
        let key = (l, kappa.to_bits(), m_set.to_vec());
        if let Some(hit) = self.cache.read().expect("cache lock").get(&key) {
            return Ok(Arc::clone(hit));
        }
        let blocks = Arc::new(self.build_interior(l, kappa, m_set));
        let mut w = self.cache.write().expect("cache lock");
        Ok(Arc::clone(w.entry(key).or_insert(blocks)))
    }

    fn build_interior(&self, l: i64, kappa: f64, m_set: &[i64]) -> InteriorBlocks {
        let layout = self.layout(l, m_set);
        let dim = layout.dim();
        let mut stiffness = Mat::<C64>::zeros(dim, dim);
        let mut mass = Mat::<C64>::zeros(dim, dim);
        let l2 = (l * l) as f64;
        let nodes = self.mesh.nodes();
        for e in 0..self.mesh.elements() {
            let (ra, rb) = (nodes[e], nodes[e + 1]);
            let region = self.fourier.region_of(0.5 * (ra + rb));
            let em = element_matrices(ra, rb, &self.rule);
            for (bi, &m) in m_set.iter().enumerate() {
                for (bj, &mp) in m_set.iter().enumerate() {
                    let c_mu = self.fourier.inv_mu(region, m - mp);
                    let c_eps = self.fourier.eps(region, m - mp);
                    if c_mu == ZERO && c_eps == ZERO {
                        continue;
                    }
                    let zz = (mp as f64 + kappa) * (m as f64 + kappa);
                    for a in 0..2 {
                        let Some(i) = layout.index(bi, e + a) else { continue };
                        for b in 0..2 {
                            let Some(j) = layout.index(bj, e + b) else { continue };
                            let w = if l2 == 0.0 { 0.0 } else { l2 * em.inv_r[a][b] };
                            let k = em.stiff[a][b] + w + zz * em.mass[a][b];
                            stiffness[(i, j)] += c_mu * k;
                            mass[(i, j)] += c_eps * em.mass[a][b];
                        }
                    }
                }
            }
        }
        InteriorBlocks { layout, stiffness, mass }
    }

    /// Full system at `p` for azimuthal index `l` over `m_set`.
    pub fn assemble(&self, p: &BlochParams<f64>, l: i64, m_set: &[i64]) -> Result<AssembledSystem> {
        self.assemble_with(p, l, m_set, |h, l, r| gamma_coefficient(h, l, r))
    }

    /// As [`Self::assemble`] but with caller-supplied `γ_{mℓ}`.
    pub fn assemble_with(
        &self,
        p: &BlochParams<f64>,
        l: i64,
        m_set: &[i64],
        gamma: impl Fn(&HarmonicData<f64>, i64, f64) -> Result<C64>,
    ) -> Result<AssembledSystem> {
        if (p.eps0 - self.spec.eps0).abs() > 0.0 || (p.mu0 - self.spec.mu0).abs() > 0.0 {
            return Err(PillarError::domain(
                "assemble",
                "Bloch parameters carry exterior constants different from the medium",
            ));
        }
        let interior = self.interior(l, p.kappa, m_set)?;
        let layout = interior.layout.clone();
        let dim = layout.dim();
        let mut a_e = interior.stiffness.clone();
        let mut a_p = Mat::<C64>::zeros(dim, dim);
        let radius = self.spec.radius;
        let mut dtn = Vec::with_capacity(m_set.len());
        for (b, &m) in m_set.iter().enumerate() {
            let h = HarmonicData::new(m, p);
            let g = gamma(&h, l, radius)?;
            dtn.push(DtnEntry { m, l, class: h.class, gamma: g });
            let Some(i) = layout.boundary_index(b) else { continue };
            let term = g * (radius / self.spec.mu0);
            if h.class == HarmonicClass::Propagating {
                a_p[(i, i)] += term;
            } else {
                a_e[(i, i)] += term;
            }
        }
        let a_e = hermitian_part(a_e.as_ref());
        Ok(AssembledSystem {
            l,
            params: *p,
            radius,
            mu0: self.spec.mu0,
            layout,
            a_e,
            a_p,
            b: interior.mass.clone(),
            dtn,
            boundary: self.boundary,
        })
    }

    /// Assembles over the `m` of `m_set` not rejected by `banned`.
    pub fn assemble_restricted(
        &self,
        p: &BlochParams<f64>,
        l: i64,
        m_set: &[i64],
        banned: impl Fn(i64) -> bool,
    ) -> Result<AssembledSystem> {
        let kept = restrict_to_subspace(m_set, banned)?;
        self.assemble(p, l, &kept)
    }
}

/// `m_set` without the banned indices; empty results are an error.
pub fn restrict_to_subspace(m_set: &[i64], banned: impl Fn(i64) -> bool) -> Result<Vec<i64>> {
    let kept: Vec<i64> = m_set.iter().copied().filter(|&m| !banned(m)).collect();
    if kept.is_empty() {
        Err(PillarError::EmptySubspace)
    } else {
        Ok(kept)
    }
}

/// One-shot assembly with the DtN boundary.
pub fn assemble(
    spec: &MediumSpec,
    p: &BlochParams<f64>,
    l: i64,
    m_set: &[i64],
    mesh: &RadialMesh,
) -> Result<AssembledSystem> {
    let span = m_set.iter().max().copied().unwrap_or(0) - m_set.iter().min().copied().unwrap_or(0);
    Assembler::new(spec, mesh, span)?.assemble(p, l, m_set)
}
