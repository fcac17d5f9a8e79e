//! Fourier-harmonic bookkeeping on the truncation circle `r = R`.
//!
//! A field is expanded as `Σ u_{mℓ}(r) e^{iℓθ} e^{i(m+κ)z}`. Outside the
//! pillar each `(m, ℓ)` term solves a Bessel equation with transverse
//! wavenumber `η_m² = ε₀μ₀ω² − (m+κ)²`, which decides whether it radiates
//! (propagating), decays (evanescent) or sits exactly on the cutoff
//! (algebraic).

use std::collections::BTreeMap;

use num_complex::Complex;

use crate::error::{PillarError, Result};
use crate::scalar::Real;
use crate::specfun::{bessel_j_pair, bessel_k_pair, hankel1_pair};

/// Relative band around `η² = 0` that is classified as algebraic.
pub const ALGEBRAIC_TOLERANCE: f64 = 1e-12;

/// Bloch wavenumber, frequency and exterior material constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochParams<T> {
    pub kappa: T,
    pub omega: T,
    pub eps0: T,
    pub mu0: T,
}

impl<T: Real> BlochParams<T> {
    pub fn new(kappa: T, omega: T, eps0: T, mu0: T) -> Result<Self> {
        let half = T::lit(0.5);
        let mut problems = Vec::new();
        if !(kappa >= -half && kappa < half) {
            problems.push(format!("kappa = {kappa} outside the Brillouin zone [-1/2, 1/2)"));
        }
        if !(omega > T::zero() && omega.is_finite()) {
            problems.push(format!("omega = {omega} must be positive and finite"));
        }
        if !(eps0 > T::zero() && eps0.is_finite()) {
            problems.push(format!("eps0 = {eps0} must be positive"));
        }
        if !(mu0 > T::zero() && mu0.is_finite()) {
            problems.push(format!("mu0 = {mu0} must be positive"));
        }
        if problems.is_empty() {
            Ok(Self { kappa, omega, eps0, mu0 })
        } else {
            Err(PillarError::domain("BlochParams", problems.join("; ")))
        }
    }

    /// Same parameters at another frequency.
    pub fn with_omega(self, omega: T) -> Self {
        Self { omega, ..self }
    }

    /// `ε₀μ₀ω²`, the squared exterior wavenumber.
    pub fn k0_sq(&self) -> T {
        self.eps0 * self.mu0 * self.omega * self.omega
    }

    /// Strictly below the light line: `ε₀μ₀ω² < κ²`, so no harmonic propagates.
    pub fn is_below_cutoff(&self) -> bool {
        self.k0_sq() < self.kappa * self.kappa
    }

    /// Every `m` with `η_m² > 0` (after the algebraic band), ascending.
    pub fn propagating_indices(&self) -> Vec<i64> {
        let k = self.k0_sq().sqrt();
        let lo = (-self.kappa - k).floor().to_f64_lossy() as i64 - 1;
        let hi = (-self.kappa + k).ceil().to_f64_lossy() as i64 + 1;
        (lo..=hi)
            .filter(|&m| classify(eta_sq(m, self), self) == HarmonicClass::Propagating)
            .collect()
    }
}

/// `η_m² = ε₀μ₀ω² − (m+κ)²`.
pub fn eta_sq<T: Real>(m: i64, p: &BlochParams<T>) -> T {
    let q = T::from_int(m) + p.kappa;
    p.k0_sq() - q * q
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum HarmonicClass {
    Propagating,
    Algebraic,
    Evanescent,
}

impl HarmonicClass {
    pub fn as_str(self) -> &'static str {
        match self {
            HarmonicClass::Propagating => "propagating",
            HarmonicClass::Algebraic => "algebraic",
            HarmonicClass::Evanescent => "evanescent",
        }
    }
}

/// Classifies `η²`, treating `|η²| <= 1e-12 · max(1, ε₀μ₀ω²)` as zero.
pub fn classify<T: Real>(eta_sq: T, p: &BlochParams<T>) -> HarmonicClass {
    let band = T::lit(ALGEBRAIC_TOLERANCE) * p.k0_sq().max(T::one());
    if eta_sq.abs() <= band {
        HarmonicClass::Algebraic
    } else if eta_sq > T::zero() {
        HarmonicClass::Propagating
    } else {
        HarmonicClass::Evanescent
    }
}

/// One Fourier index `m` with its transverse wavenumber and class.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HarmonicData<T> {
    pub m: i64,
    pub eta_sq: T,
    pub class: HarmonicClass,
}

impl<T: Real> HarmonicData<T> {
    pub fn new(m: i64, p: &BlochParams<T>) -> Self {
        let e = eta_sq(m, p);
        Self { m, eta_sq: e, class: classify(e, p) }
    }

    /// `η_m` on the branch used by the radiation condition: positive real for
    /// propagating, `i|η_m|` for evanescent, zero for algebraic.
    pub fn eta(&self) -> Complex<T> {
        match self.class {
            HarmonicClass::Propagating => Complex::new(self.eta_sq.sqrt(), T::zero()),
            HarmonicClass::Evanescent => Complex::new(T::zero(), (-self.eta_sq).sqrt()),
            HarmonicClass::Algebraic => Complex::new(T::zero(), T::zero()),
        }
    }
}

/// One entry per `m ∈ [−m_max, m_max]`, ascending.
pub fn classify_harmonics<T: Real>(p: &BlochParams<T>, m_max: i64) -> Vec<HarmonicData<T>> {
    (-m_max..=m_max).map(|m| HarmonicData::new(m, p)).collect()
}

/// DtN coefficient `γ_{mℓ}` on the circle of radius `radius`.
///
/// Propagating: `−η H¹′_ℓ(ηR)/H¹_ℓ(ηR)`. Evanescent: `−|η| K′_ℓ(|η|R)/K_ℓ(|η|R)`,
/// the same expression after `H¹_ℓ(iy) ∝ K_ℓ(y)`. Algebraic: `|ℓ|/R`.
pub fn gamma_coefficient<T: Real>(h: &HarmonicData<T>, l: i64, radius: T) -> Result<Complex<T>> {
    if !(radius > T::zero()) {
        return Err(PillarError::domain("gamma_coefficient", format!("radius {radius} must be positive")));
    }
    let order = l as i32;
    match h.class {
        HarmonicClass::Algebraic => Ok(Complex::new(T::from_int(l.abs()) / radius, T::zero())),
        HarmonicClass::Evanescent => {
            let a = (-h.eta_sq).sqrt();
            let (k, dk) = bessel_k_pair(order, a * radius)?;
            if k == T::zero() {
                return Err(PillarError::Singularity {
                    function: "gamma_coefficient",
                    argument: format!("K_{l}({})", a * radius),
                });
            }
            Ok(Complex::new(-a * dk / k, T::zero()))
        }
        HarmonicClass::Propagating => {
            let eta = h.eta_sq.sqrt();
            let (hv, dh) = hankel1_pair(order, Complex::new(eta * radius, T::zero()))?;
            if hv.norm() == T::zero() {
                return Err(PillarError::Singularity {
                    function: "gamma_coefficient",
                    argument: format!("H1_{l}({})", eta * radius),
                });
            }
            Ok(-(dh / hv) * eta)
        }
    }
}

/// `γ_{mℓ}` with its indices and class.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DtnEntry<T> {
    pub m: i64,
    pub l: i64,
    pub class: HarmonicClass,
    pub gamma: Complex<T>,
}

/// The DtN table for `|m| <= m_max`, `|ℓ| <= l_max`, m-major.
pub fn dtn_table<T: Real>(p: &BlochParams<T>, radius: T, m_max: i64, l_max: i64) -> Result<Vec<DtnEntry<T>>> {
    let mut out = Vec::with_capacity(((2 * m_max + 1) * (2 * l_max + 1)) as usize);
    for h in classify_harmonics(p, m_max) {
        for l in -l_max..=l_max {
            out.push(DtnEntry { m: h.m, l, class: h.class, gamma: gamma_coefficient(&h, l, radius)? });
        }
    }
    Ok(out)
}

/// Splits `T` into its evanescent part `T_e` (evanescent and algebraic rows)
/// and propagating part `T_p`. Both keep every `(m, ℓ)`; rows belonging to
/// the other part are zero, so `T_e + T_p = T` entrywise.
pub fn split_dtn<T: Real>(table: &[DtnEntry<T>]) -> (Vec<DtnEntry<T>>, Vec<DtnEntry<T>>) {
    let zero = Complex::new(T::zero(), T::zero());
    table
        .iter()
        .map(|e| {
            if e.class == HarmonicClass::Propagating {
                (DtnEntry { gamma: zero, ..*e }, *e)
            } else {
                (*e, DtnEntry { gamma: zero, ..*e })
            }
        })
        .unzip()
}

/// Coefficients `û_{mℓ}` of a function on the cylinder `r = R`.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceExpansion<T> {
    pub radius: T,
    pub coefficients: BTreeMap<(i64, i64), Complex<T>>,
}

impl<T: Real> TraceExpansion<T> {
    pub fn new(radius: T) -> Self {
        Self { radius, coefficients: BTreeMap::new() }
    }

    /// Coefficient at `(m, ℓ)`, zero outside the stored support.
    pub fn get(&self, m: i64, l: i64) -> Complex<T> {
        self.coefficients.get(&(m, l)).copied().unwrap_or_else(|| Complex::new(T::zero(), T::zero()))
    }

    /// `(Σ |û_{mℓ}|²)^{1/2}` over the entries selected by `keep`.
    pub fn norm_where(&self, keep: impl Fn(i64, i64) -> bool) -> T {
        self.coefficients
            .iter()
            .filter(|((m, l), _)| keep(*m, *l))
            .fold(T::zero(), |acc, (_, c)| acc + c.norm_sqr())
            .sqrt()
    }

    pub fn norm(&self) -> T {
        self.norm_where(|_, _| true)
    }

    /// Evaluates `Σ û_{mℓ} e^{iℓθ} e^{i(m+κ)z}`.
    pub fn synthesize(&self, kappa: T, theta: T, z: T) -> Complex<T> {
        self.coefficients.iter().fold(Complex::new(T::zero(), T::zero()), |acc, (&(m, l), c)| {
            let phase = T::from_int(l) * theta + (T::from_int(m) + kappa) * z;
            acc + c * Complex::new(phase.cos(), phase.sin())
        })
    }
}

/// Plane wave `A e^{i(κ₁x + κ₂y + (m+κ)z)}` with `(κ₁, κ₂) = η_m (sin θ₀, cos θ₀)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IncidentWave<T> {
    pub m: i64,
    pub theta0: T,
    pub amplitude: Complex<T>,
}

impl<T: Real> IncidentWave<T> {
    /// Transverse wave vector `(κ₁, κ₂)`; fails unless `m` propagates.
    pub fn wave_vector(&self, p: &BlochParams<T>) -> Result<(T, T)> {
        let h = HarmonicData::new(self.m, p);
        if h.class != HarmonicClass::Propagating {
            return Err(PillarError::InvalidIncident { m: self.m, eta_sq: h.eta_sq.to_f64_lossy() });
        }
        let eta = h.eta_sq.sqrt();
        Ok((eta * self.theta0.sin(), eta * self.theta0.cos()))
    }

    /// Direct evaluation at Cartesian `(x, y, z)`.
    pub fn evaluate(&self, p: &BlochParams<T>, x: T, y: T, z: T) -> Result<Complex<T>> {
        let (k1, k2) = self.wave_vector(p)?;
        let phase = k1 * x + k2 * y + (T::from_int(self.m) + p.kappa) * z;
        Ok(self.amplitude * Complex::new(phase.cos(), phase.sin()))
    }
}

/// Traces of `u^inc` and `∂_r u^inc` on `r = R` via Jacobi–Anger:
/// `û_{mℓ} = A J_ℓ(η_m R) e^{iℓθ₀}` and `η_m J′_ℓ(η_m R)` in place of `J_ℓ`.
pub fn incident_trace<T: Real>(
    w: &IncidentWave<T>,
    p: &BlochParams<T>,
    radius: T,
    l_max: i64,
) -> Result<(TraceExpansion<T>, TraceExpansion<T>)> {
    w.wave_vector(p)?;
    let eta = eta_sq(w.m, p).sqrt();
    let mut value = TraceExpansion::new(radius);
    let mut normal = TraceExpansion::new(radius);
    for l in -l_max..=l_max {
        let (j, dj) = bessel_j_pair(l as i32, eta * radius)?;
        let ph = T::from_int(l) * w.theta0;
        let c = w.amplitude * Complex::new(ph.cos(), ph.sin());
        value.coefficients.insert((w.m, l), c * j);
        normal.coefficients.insert((w.m, l), c * (eta * dj));
    }
    Ok((value, normal))
}
