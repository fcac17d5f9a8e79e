//! Axisymmetric material model `ε(r, z)`, `μ(r, z)`.
//!
//! The pillar is a stack of radial shells `0 = ρ₀ < ρ₁ < … < ρ_K`; inside a
//! shell the parameters depend on `z` only. Beyond `ρ_K` the medium is the
//! exterior `(ε₀, μ₀)` out to the truncation radius `R`. Material period in
//! `z` is `2π/L`.

use std::f64::consts::PI;

use crate::error::{PillarError, Result};
use crate::C64;

/// Coefficients with `q ∉ Lℤ` below this (relative to the profile scale) are
/// treated as roundoff and set to zero; anything larger is a period error.
pub const SUPPORT_TOLERANCE: f64 = 1e-12;

/// Samples used for the reciprocal of a harmonic profile and for extrema.
const HARMONIC_SAMPLES: usize = 1024;

/// Highest `|q|` inspected when validating the period divisor.
const SUPPORT_CHECK_MAX: i64 = 64;

/// A real, positive function of `z` on one period `[−π, π)`.
#[derive(Debug, Clone, PartialEq)]
pub enum ZProfile {
    Constant(f64),
    /// Piecewise constant: `values[k]` on `[breaks[k], breaks[k+1])`, with
    /// `breaks` running from `−π` to `π`.
    Cells { breaks: Vec<f64>, values: Vec<f64> },
    /// `mean + Σ (c cos(qz) + s sin(qz))` over `(q, c, s)` with `q >= 1`.
    Harmonic { mean: f64, terms: Vec<(i64, f64, f64)> },
}

impl ZProfile {
    pub fn evaluate(&self, z: f64) -> f64 {
        match self {
            ZProfile::Constant(v) => *v,
            ZProfile::Cells { breaks, values } => {
                let z = wrap(z);
                let k = breaks[1..].partition_point(|&b| b <= z).min(values.len() - 1);
                values[k]
            }
            ZProfile::Harmonic { mean, terms } => {
                terms.iter().fold(*mean, |acc, &(q, c, s)| {
                    let a = q as f64 * z;
                    acc + c * a.cos() + s * a.sin()
                })
            }
        }
    }

    fn validate(&self, what: &str, problems: &mut Vec<String>) {
        match self {
            ZProfile::Constant(v) => {
                if !(v.is_finite() && *v > 0.0) {
                    problems.push(format!("{what}: value {v} must be positive and finite"));
                }
            }
            ZProfile::Cells { breaks, values } => {
                if breaks.len() < 2 || values.len() + 1 != breaks.len() {
                    problems.push(format!(
                        "{what}: need one more z-breakpoint than values (got {} and {})",
                        breaks.len(),
                        values.len()
                    ));
                    return;
                }
                let tol = 1e-12;
                if (breaks[0] + PI).abs() > tol || (breaks[breaks.len() - 1] - PI).abs() > tol {
                    problems.push(format!("{what}: z-breakpoints must start at -pi and end at pi"));
                }
                if breaks.windows(2).any(|w| !(w[1] > w[0])) {
                    problems.push(format!("{what}: z-breakpoints must be strictly increasing"));
                }
                for v in values {
                    if !(v.is_finite() && *v > 0.0) {
                        problems.push(format!("{what}: value {v} must be positive and finite"));
                    }
                }
            }
            ZProfile::Harmonic { mean, terms } => {
                if !mean.is_finite() || terms.iter().any(|t| !(t.1.is_finite() && t.2.is_finite())) {
                    problems.push(format!("{what}: harmonic coefficients must be finite"));
                    return;
                }
                if terms.iter().any(|t| t.0 < 1) {
                    problems.push(format!("{what}: harmonic wavenumbers must be >= 1"));
                }
                let (lo, _) = self.extrema();
                if !(lo > 0.0) {
                    problems.push(format!("{what}: harmonic profile reaches {lo}, must stay positive"));
                }
            }
        }
    }

    /// `(min, max)`; exact for cells, sampled for harmonic profiles.
    pub fn extrema(&self) -> (f64, f64) {
        match self {
            ZProfile::Constant(v) => (*v, *v),
            ZProfile::Cells { values, .. } => values
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v))),
            ZProfile::Harmonic { .. } => sample_grid(4 * HARMONIC_SAMPLES)
                .map(|z| self.evaluate(z))
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v))),
        }
    }

    /// `(1/2π) ∫ f(z) e^{−iqz} dz`, exact for constant, cell and harmonic
    /// profiles.
    pub fn fourier(&self, q: i64) -> C64 {
        match self {
            ZProfile::Constant(v) => {
                if q == 0 {
                    C64::new(*v, 0.0)
                } else {
                    C64::new(0.0, 0.0)
                }
            }
            ZProfile::Cells { breaks, values } => cell_fourier(breaks, values.iter().copied(), q),
            ZProfile::Harmonic { mean, terms } => {
                if q == 0 {
                    return C64::new(*mean, 0.0);
                }
                // c cos + s sin = ((c − is)/2) e^{iqz} + ((c + is)/2) e^{−iqz}
                terms.iter().fold(C64::new(0.0, 0.0), |acc, &(k, c, s)| {
                    if k == q {
                        acc + C64::new(c, -s) / 2.0
                    } else if k == -q {
                        acc + C64::new(c, s) / 2.0
                    } else {
                        acc
                    }
                })
            }
        }
    }

    /// Fourier coefficient of `1/f`.
    pub fn reciprocal_fourier(&self, q: i64) -> C64 {
        match self {
            ZProfile::Constant(v) => ZProfile::Constant(1.0 / v).fourier(q),
            ZProfile::Cells { breaks, values } => cell_fourier(breaks, values.iter().map(|v| 1.0 / v), q),
            ZProfile::Harmonic { .. } => {
                // periodic trapezoid rule: spectrally accurate for smooth profiles
                let n = HARMONIC_SAMPLES;
                let sum = sample_grid(n).fold(C64::new(0.0, 0.0), |acc, z| {
                    let a = -(q as f64) * z;
                    acc + C64::new(a.cos(), a.sin()) / self.evaluate(z)
                });
                sum / n as f64
            }
        }
    }

    pub(crate) fn breakpoints(&self) -> &[f64] {
        match self {
            ZProfile::Cells { breaks, .. } => breaks,
            _ => &[],
        }
    }

    fn scale_deviation(&self, reference: f64, t: f64) -> ZProfile {
        let f = |v: f64| reference + t * (v - reference);
        match self {
            ZProfile::Constant(v) => ZProfile::Constant(f(*v)),
            ZProfile::Cells { breaks, values } => ZProfile::Cells {
                breaks: breaks.clone(),
                values: values.iter().map(|&v| f(v)).collect(),
            },
            ZProfile::Harmonic { mean, terms } => ZProfile::Harmonic {
                mean: f(*mean),
                terms: terms.iter().map(|&(q, c, s)| (q, t * c, t * s)).collect(),
            },
        }
    }
}

fn wrap(z: f64) -> f64 {
    (z + PI).rem_euclid(2.0 * PI) - PI
}

fn sample_grid(n: usize) -> impl Iterator<Item = f64> {
    (0..n).map(move |k| -PI + 2.0 * PI * k as f64 / n as f64)
}

fn cell_fourier(breaks: &[f64], values: impl Iterator<Item = f64>, q: i64) -> C64 {
    let qf = q as f64;
    let mut acc = C64::new(0.0, 0.0);
    for (w, v) in breaks.windows(2).zip(values) {
        let integral = if q == 0 {
            C64::new(w[1] - w[0], 0.0)
        } else {
            // ∫ e^{−iqz} dz = (e^{−iqb} − e^{−iqa}) / (−iq)
            let eb = C64::new((qf * w[1]).cos(), -(qf * w[1]).sin());
            let ea = C64::new((qf * w[0]).cos(), -(qf * w[0]).sin());
            (eb - ea) / C64::new(0.0, -qf)
        };
        acc += integral * v;
    }
    acc / (2.0 * PI)
}

/// One radial shell `ρ_{k−1} < r < ρ_k` of the pillar.
#[derive(Debug, Clone, PartialEq)]
pub struct Shell {
    pub outer: f64,
    pub eps: ZProfile,
    pub mu: ZProfile,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MediumSpec {
    pub shells: Vec<Shell>,
    pub eps0: f64,
    pub mu0: f64,
    /// Truncation radius `R` where the DtN condition is imposed.
    pub radius: f64,
    /// Period divisor `L`: the material has `z`-period `2π/L`.
    pub period_divisor: i64,
}

/// Recorded bounds `ε₋ ≤ ε ≤ ε₊`, `μ₋ ≤ μ ≤ μ₊` over the truncated domain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaterialBounds {
    pub eps_min: f64,
    pub eps_max: f64,
    pub mu_min: f64,
    pub mu_max: f64,
}

impl MediumSpec {
    /// Validates every invariant and reports all violations together.
    pub fn new(shells: Vec<Shell>, eps0: f64, mu0: f64, radius: f64, period_divisor: i64) -> Result<Self> {
        let spec = Self { shells, eps0, mu0, radius, period_divisor };
        spec.validate()?;
        Ok(spec)
    }

    /// `ε ≡ ε₀`, `μ ≡ μ₀` everywhere.
    pub fn homogeneous(eps0: f64, mu0: f64, radius: f64) -> Result<Self> {
        Self::new(Vec::new(), eps0, mu0, radius, 1)
    }

    /// z-constant core of radius `rho` with `(eps1, mu1)`.
    pub fn step_core(eps1: f64, mu1: f64, rho: f64, eps0: f64, mu0: f64, radius: f64) -> Result<Self> {
        let shell = Shell { outer: rho, eps: ZProfile::Constant(eps1), mu: ZProfile::Constant(mu1) };
        Self::new(vec![shell], eps0, mu0, radius, 1)
    }

    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        if !(self.eps0.is_finite() && self.eps0 > 0.0) {
            problems.push(format!("eps0 = {} must be positive", self.eps0));
        }
        if !(self.mu0.is_finite() && self.mu0 > 0.0) {
            problems.push(format!("mu0 = {} must be positive", self.mu0));
        }
        if !(self.radius.is_finite() && self.radius > 0.0) {
            problems.push(format!("radius = {} must be positive", self.radius));
        }
        if self.period_divisor < 1 {
            problems.push(format!("period divisor L = {} must be >= 1", self.period_divisor));
        }
        let mut inner = 0.0;
        for (k, s) in self.shells.iter().enumerate() {
            if !(s.outer > inner) {
                problems.push(format!("shell {k}: outer radius {} must exceed {inner}", s.outer));
            }
            if s.outer > self.radius {
                problems.push(format!(
                    "shell {k}: outer radius {} lies beyond the truncation radius {}",
                    s.outer, self.radius
                ));
            }
            inner = s.outer;
            s.eps.validate(&format!("shell {k} eps"), &mut problems);
            s.mu.validate(&format!("shell {k} mu"), &mut problems);
        }
        if problems.is_empty() && self.period_divisor >= 1 {
            for (k, s) in self.shells.iter().enumerate() {
                for (name, p) in [("eps", &s.eps), ("mu", &s.mu)] {
                    if let Some(q) = off_lattice_support(p, self.period_divisor) {
                        problems.push(format!(
                            "shell {k} {name}: z-profile has Fourier content at q = {q}, \
                             inconsistent with period 2pi/{}",
                            self.period_divisor
                        ));
                    }
                }
            }
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(PillarError::InvalidMedium(problems))
        }
    }

    /// Outer radius of the material region (`0` when homogeneous).
    pub fn material_radius(&self) -> f64 {
        self.shells.last().map_or(0.0, |s| s.outer)
    }

    /// Radial interfaces strictly inside `(0, R)`.
    pub fn radial_breakpoints(&self) -> Vec<f64> {
        self.shells.iter().map(|s| s.outer).filter(|&r| r < self.radius).collect()
    }

    pub fn is_z_constant(&self) -> bool {
        self.shells
            .iter()
            .all(|s| matches!(s.eps, ZProfile::Constant(_)) && matches!(s.mu, ZProfile::Constant(_)))
    }

    /// `(ε, μ)` at `(r, z)`; shells are closed on the outside.
    pub fn evaluate(&self, r: f64, z: f64) -> (f64, f64) {
        match self.shells.iter().find(|s| r <= s.outer) {
            Some(s) => (s.eps.evaluate(z), s.mu.evaluate(z)),
            None => (self.eps0, self.mu0),
        }
    }

    pub fn bounds(&self) -> MaterialBounds {
        let mut b = MaterialBounds { eps_min: self.eps0, eps_max: self.eps0, mu_min: self.mu0, mu_max: self.mu0 };
        for s in &self.shells {
            let (e0, e1) = s.eps.extrema();
            let (m0, m1) = s.mu.extrema();
            b.eps_min = b.eps_min.min(e0);
            b.eps_max = b.eps_max.max(e1);
            b.mu_min = b.mu_min.min(m0);
            b.mu_max = b.mu_max.max(m1);
        }
        b
    }

    /// `ε ≤ ε₀` and `μ ≤ μ₀` on every cell.
    pub fn is_inverse_structure(&self) -> bool {
        let b = self.bounds();
        b.eps_max <= self.eps0 && b.mu_max <= self.mu0
    }

    /// For every `z`, `ε` and `μ` are nondecreasing in `r`, ending at `(ε₀, μ₀)`.
    pub fn is_radially_monotone(&self) -> bool {
        // every z-cell of the common refinement, plus a dense grid for smooth profiles
        let mut breaks: Vec<f64> = vec![-PI, PI];
        let mut zs: Vec<f64> = Vec::new();
        for p in self.shells.iter().flat_map(|s| [&s.eps, &s.mu]) {
            breaks.extend_from_slice(p.breakpoints());
            if matches!(p, ZProfile::Harmonic { .. }) {
                zs.extend(sample_grid(512));
            }
        }
        breaks.sort_by(f64::total_cmp);
        breaks.dedup();
        zs.extend(breaks.windows(2).map(|w| 0.5 * (w[0] + w[1])));
        zs.iter().all(|&z| {
            let mut prev = (0.0, 0.0);
            for s in &self.shells {
                let cur = (s.eps.evaluate(z), s.mu.evaluate(z));
                if cur.0 < prev.0 || cur.1 < prev.1 {
                    return false;
                }
                prev = cur;
            }
            prev.0 <= self.eps0 && prev.1 <= self.mu0
        })
    }

    /// Medium whose deviation from the exterior is scaled by `t`:
    /// `ε ↦ ε₀ + t(ε − ε₀)`, `μ` unchanged. Fails if `ε` turns nonpositive.
    pub fn scale_eps_contrast(&self, t: f64) -> Result<Self> {
        let shells = self
            .shells
            .iter()
            .map(|s| Shell { outer: s.outer, eps: s.eps.scale_deviation(self.eps0, t), mu: s.mu.clone() })
            .collect();
        Self::new(shells, self.eps0, self.mu0, self.radius, self.period_divisor)
    }
}

fn off_lattice_support(p: &ZProfile, l: i64) -> Option<i64> {
    let (_, scale) = p.extrema();
    let tol = SUPPORT_TOLERANCE * scale.abs().max(1.0);
    (1..=SUPPORT_CHECK_MAX.max(4 * l)).filter(|q| q % l != 0).find(|&q| p.fourier(q).norm() > tol)
}

/// One radial region of the truncated domain with its z-Fourier data.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierRegion {
    pub inner: f64,
    pub outer: f64,
    /// `(ε)_q` for `q = −q_max ..= q_max`.
    pub eps: Vec<C64>,
    /// `(1/μ)_q` for `q = −q_max ..= q_max`.
    pub inv_mu: Vec<C64>,
}

/// z-Fourier coefficients of `ε` and `1/μ`, piecewise constant in `r`.
#[derive(Debug, Clone, PartialEq)]
pub struct ZFourierTable {
    pub q_max: i64,
    pub period_divisor: i64,
    /// Regions covering `[0, R]`, ending with the exterior layer if the
    /// material stops short of `R`.
    pub regions: Vec<FourierRegion>,
}

impl ZFourierTable {
    fn index(&self, q: i64) -> Option<usize> {
        (q.abs() <= self.q_max).then(|| (q + self.q_max) as usize)
    }

    /// `(ε)_q` on region `k`; zero beyond `q_max`.
    pub fn eps(&self, k: usize, q: i64) -> C64 {
        self.index(q).map_or(C64::new(0.0, 0.0), |i| self.regions[k].eps[i])
    }

    pub fn inv_mu(&self, k: usize, q: i64) -> C64 {
        self.index(q).map_or(C64::new(0.0, 0.0), |i| self.regions[k].inv_mu[i])
    }

    /// Region containing `r` (interfaces belong to the inner region).
    pub fn region_of(&self, r: f64) -> usize {
        self.regions.iter().position(|g| r <= g.outer).unwrap_or(self.regions.len() - 1)
    }

    /// Nonzero `q` values over all regions, ascending.
    pub fn support(&self) -> Vec<i64> {
        (-self.q_max..=self.q_max)
            .filter(|&q| {
                self.regions.iter().any(|g| {
                    let i = (q + self.q_max) as usize;
                    g.eps[i].norm() > 0.0 || g.inv_mu[i].norm() > 0.0
                })
            })
            .collect()
    }
}

/// Exact z-Fourier coefficients up to `|q| <= q_max`. Entries with
/// `q ∉ Lℤ` are exactly zero.
pub fn z_fourier(spec: &MediumSpec, q_max: i64) -> ZFourierTable {
    let l = spec.period_divisor.max(1);
    let coeffs = |f: &dyn Fn(i64) -> C64| -> Vec<C64> {
        (-q_max..=q_max)
            .map(|q| if q % l == 0 { f(q) } else { C64::new(0.0, 0.0) })
            .collect()
    };
    let mut regions = Vec::with_capacity(spec.shells.len() + 1);
    let mut inner = 0.0;
    for s in &spec.shells {
        regions.push(FourierRegion {
            inner,
            outer: s.outer,
            eps: coeffs(&|q| s.eps.fourier(q)),
            inv_mu: coeffs(&|q| s.mu.reciprocal_fourier(q)),
        });
        inner = s.outer;
    }
    if inner < spec.radius {
        let ext_eps = ZProfile::Constant(spec.eps0);
        let ext_mu = ZProfile::Constant(spec.mu0);
        regions.push(FourierRegion {
            inner,
            outer: spec.radius,
            eps: coeffs(&|q| ext_eps.fourier(q)),
            inv_mu: coeffs(&|q| ext_mu.reciprocal_fourier(q)),
        });
    }
    ZFourierTable { q_max, period_divisor: l, regions }
}
