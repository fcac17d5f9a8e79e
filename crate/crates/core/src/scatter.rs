//! Plane-wave scattering on the truncated domain.
//!
//! For each `ℓ` the total field solves `(A_e + A_p − ω²B) u = F`, where `F`
//! carries `(R/μ₀)(∂_n u^inc + T u^inc)` on the boundary row of the incident
//! harmonic. Internally the unknown is `u^sc = u − ũ^inc`, with `ũ^inc` the
//! discrete incident field (the same forcing applied to the homogeneous
//! medium). Its right-hand side `−(A − A_hom) ũ^inc` vanishes identically
//! without contrast, so the null test is exact.

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::assembly::{Assembler, DofLayout, RadialMesh};
use crate::error::{PillarError, Result};
use crate::harmonics::{incident_trace, BlochParams, DtnEntry, HarmonicClass, IncidentWave, TraceExpansion};
use crate::linalg::{matvec, norm2, LuSystem};
use crate::medium::MediumSpec;
use crate::specfun::hankel1;
use crate::C64;

/// Condition estimates above this are reported as a possible guided mode.
pub const NEAR_SINGULAR_CONDITION: f64 = 1e12;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// Solution of one azimuthal index.
#[derive(Debug, Clone)]
pub struct AzimuthalSolution {
    pub l: i64,
    pub layout: DofLayout,
    pub total: Vec<C64>,
    pub scattered: Vec<C64>,
    pub forcing: Vec<C64>,
    pub dtn: Vec<DtnEntry<f64>>,
    /// `‖A u − F‖ / ‖F‖` for the total field.
    pub residual: f64,
    pub condition: f64,
}

#[derive(Debug, Clone)]
pub struct ScatterSolution {
    pub params: BlochParams<f64>,
    pub incident: IncidentWave<f64>,
    pub radius: f64,
    pub mu0: f64,
    pub mesh: Vec<f64>,
    pub azimuthal: Vec<AzimuthalSolution>,
    /// Trace of the total field at `R`.
    pub trace: TraceExpansion<f64>,
    pub scattered_trace: TraceExpansion<f64>,
    /// Outgoing amplitudes `a_{mℓ}` of the scattered field.
    pub far_field: BTreeMap<(i64, i64), C64>,
    /// Largest relative residual over all `ℓ`.
    pub residual: f64,
}

impl ScatterSolution {
    /// `u(r, θ, z)` for `r <= R`, from the nodal values.
    pub fn field_inside(&self, r: f64, theta: f64, z: f64) -> C64 {
        let k = self.mesh.partition_point(|&x| x <= r).clamp(1, self.mesh.len() - 1);
        let (ra, rb) = (self.mesh[k - 1], self.mesh[k]);
        let t = ((r - ra) / (rb - ra)).clamp(0.0, 1.0);
        let mut sum = ZERO;
        for az in &self.azimuthal {
            for &m in &az.layout.m_set {
                let prof = az.layout.radial_profile(&az.total, m);
                let v = prof[k - 1] * (1.0 - t) + prof[k] * t;
                let ph = az.l as f64 * theta + (m as f64 + self.params.kappa) * z;
                sum += v * C64::new(ph.cos(), ph.sin());
            }
        }
        sum
    }

    /// Scattered field for `r >= R` from the far-field amplitudes.
    pub fn scattered_outside(&self, r: f64, theta: f64, z: f64) -> Result<C64> {
        let mut sum = ZERO;
        for (&(m, l), &a) in &self.far_field {
            let radial = radial_outgoing(m, l, r, &self.params)?;
            let ph = l as f64 * theta + (m as f64 + self.params.kappa) * z;
            sum += a * radial * C64::new(ph.cos(), ph.sin());
        }
        Ok(sum)
    }

    /// Total field anywhere: nodal interpolation inside, incident plus
    /// outgoing expansion outside.
    pub fn field(&self, r: f64, theta: f64, z: f64) -> Result<C64> {
        if r <= self.radius {
            return Ok(self.field_inside(r, theta, z));
        }
        let inc = self.incident.evaluate(&self.params, r * theta.cos(), r * theta.sin(), z)?;
        Ok(inc + self.scattered_outside(r, theta, z)?)
    }
}

/// Radial factor of the outgoing exterior solution: `H¹_ℓ(η_m r)`, or
/// `r^{−|ℓ|}` for algebraic harmonics.
pub fn radial_outgoing(m: i64, l: i64, r: f64, p: &BlochParams<f64>) -> Result<C64> {
    let h = crate::harmonics::HarmonicData::new(m, p);
    match h.class {
        HarmonicClass::Algebraic => Ok(C64::new(r.powi(-(l.abs() as i32)), 0.0)),
        _ => hankel1(l as i32, h.eta() * r),
    }
}

/// Scattering solver for one medium, mesh and truncation.
#[derive(Debug)]
pub struct Scatterer {
    medium: Assembler,
    reference: Assembler,
    m_set: Vec<i64>,
    l_max: i64,
}

impl Scatterer {
    pub fn new(spec: &MediumSpec, mesh: &RadialMesh, m_max: i64, l_max: i64) -> Result<Self> {
        let homogeneous = MediumSpec::homogeneous(spec.eps0, spec.mu0, spec.radius)?;
        Ok(Self {
            medium: Assembler::new(spec, mesh, 2 * m_max)?,
            reference: Assembler::new(&homogeneous, mesh, 2 * m_max)?,
            m_set: (-m_max..=m_max).collect(),
            l_max,
        })
    }

    pub fn m_set(&self) -> &[i64] {
        &self.m_set
    }

    pub fn assembler(&self) -> &Assembler {
        &self.medium
    }

    fn check_incident(&self, p: &BlochParams<f64>, w: &IncidentWave<f64>) -> Result<()> {
        w.wave_vector(p)?;
        if !self.m_set.contains(&w.m) {
            return Err(PillarError::domain(
                "solve_scattering",
                format!("incident index m = {} outside the Fourier truncation", w.m),
            ));
        }
        Ok(())
    }

    /// Boundary forcing `(R/μ₀)(∂_n û + γ û)` for one `ℓ`.
    fn forcing(
        &self,
        layout: &DofLayout,
        dtn: &[DtnEntry<f64>],
        w: &IncidentWave<f64>,
        value: &TraceExpansion<f64>,
        normal: &TraceExpansion<f64>,
        l: i64,
    ) -> Vec<C64> {
        let mut f = vec![ZERO; layout.dim()];
        let b = layout.block_of(w.m).expect("incident m is retained");
        if let Some(i) = layout.boundary_index(b) {
            let g = dtn[b].gamma;
            let radius = value.radius;
            f[i] = (normal.get(w.m, l) + g * value.get(w.m, l)) * (radius / self.medium.spec().mu0);
        }
        f
    }

    fn solve_l(&self, p: &BlochParams<f64>, w: &IncidentWave<f64>, l: i64, traces: &(TraceExpansion<f64>, TraceExpansion<f64>)) -> Result<AzimuthalSolution> {
        let sys = self.medium.assemble(p, l, &self.m_set)?;
        let hom = self.reference.assemble(p, l, &self.m_set)?;
        let a = sys.operator();
        let a_hom = hom.operator();
        let forcing = self.forcing(&sys.layout, &sys.dtn, w, &traces.0, &traces.1, l);
        let incident = LuSystem::new(a_hom.as_ref()).solve(&forcing);
        let lu = LuSystem::new(a.as_ref());
        let condition = lu.condition_estimate();
        if !(condition <= NEAR_SINGULAR_CONDITION) {
            return Err(PillarError::NearSingular { omega: p.omega, kappa: p.kappa, condition });
        }
        let au = matvec(a.as_ref(), &incident);
        let ahu = matvec(a_hom.as_ref(), &incident);
        let rhs: Vec<C64> = ahu.iter().zip(&au).map(|(x, y)| x - y).collect();
        let scattered = lu.solve(&rhs);
        let total: Vec<C64> = incident.iter().zip(&scattered).map(|(x, y)| x + y).collect();
        let r = matvec(a.as_ref(), &total);
        let res: Vec<C64> = r.iter().zip(&forcing).map(|(x, y)| x - y).collect();
        let fnorm = norm2(&forcing);
        let residual = if fnorm > 0.0 { norm2(&res) / fnorm } else { norm2(&res) };
        Ok(AzimuthalSolution { l, layout: sys.layout, total, scattered, forcing, dtn: sys.dtn, residual, condition })
    }

    /// Solves every `|ℓ| <= l_max` (in parallel) and collects traces and
    /// far-field amplitudes.
    pub fn solve(&self, p: &BlochParams<f64>, w: &IncidentWave<f64>) -> Result<ScatterSolution> {
        self.check_incident(p, w)?;
        let radius = self.medium.spec().radius;
        let traces = incident_trace(w, p, radius, self.l_max)?;
        let azimuthal: Vec<AzimuthalSolution> = (-self.l_max..=self.l_max)
            .into_par_iter()
            .map(|l| self.solve_l(p, w, l, &traces))
            .collect::<Result<_>>()?;
        let mut trace = TraceExpansion::new(radius);
        let mut scattered_trace = TraceExpansion::new(radius);
        let mut far_field = BTreeMap::new();
        for az in &azimuthal {
            for (b, &m) in az.layout.m_set.iter().enumerate() {
                let i = az.layout.boundary_index(b);
                let u = i.map_or(ZERO, |i| az.total[i]);
                let s = i.map_or(ZERO, |i| az.scattered[i]);
                trace.coefficients.insert((m, az.l), u);
                scattered_trace.coefficients.insert((m, az.l), s);
                far_field.insert((m, az.l), s / radial_outgoing(m, az.l, radius, p)?);
            }
        }
        let residual = azimuthal.iter().map(|a| a.residual).fold(0.0, f64::max);
        Ok(ScatterSolution {
            params: *p,
            incident: *w,
            radius,
            mu0: self.medium.spec().mu0,
            mesh: self.medium.mesh().nodes().to_vec(),
            azimuthal,
            trace,
            scattered_trace,
            far_field,
            residual,
        })
    }

    /// Total field from the direct formulation `(A − ω²B) u = F`, one vector
    /// per `ℓ`, for cross-checking [`Self::solve`].
    pub fn solve_total_field(&self, p: &BlochParams<f64>, w: &IncidentWave<f64>) -> Result<Vec<(i64, Vec<C64>)>> {
        self.check_incident(p, w)?;
        let radius = self.medium.spec().radius;
        let (value, normal) = incident_trace(w, p, radius, self.l_max)?;
        (-self.l_max..=self.l_max)
            .map(|l| {
                let sys = self.medium.assemble(p, l, &self.m_set)?;
                let f = self.forcing(&sys.layout, &sys.dtn, w, &value, &normal, l);
                Ok((l, LuSystem::new(sys.operator().as_ref()).solve(&f)))
            })
            .collect()
    }

    /// 1-norm condition estimate of the total-field system for one `ℓ`.
    pub fn system_condition(&self, p: &BlochParams<f64>, l: i64) -> Result<f64> {
        let sys = self.medium.assemble(p, l, &self.m_set)?;
        Ok(LuSystem::new(sys.operator().as_ref()).condition_estimate())
    }
}

/// One-shot scattering solve with `|m| <= m_max`, `|ℓ| <= l_max`.
pub fn solve_scattering(
    spec: &MediumSpec,
    p: &BlochParams<f64>,
    w: &IncidentWave<f64>,
    mesh: &RadialMesh,
    m_max: i64,
    l_max: i64,
) -> Result<ScatterSolution> {
    Scatterer::new(spec, mesh, m_max, l_max)?.solve(p, w)
}

/// The outgoing amplitudes `a_{mℓ}`.
pub fn far_field(sol: &ScatterSolution) -> &BTreeMap<(i64, i64), C64> {
    &sol.far_field
}

/// Power bookkeeping of a solution, all in the units of the discrete forms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyBalance {
    /// `Σ_{m∈Z_p} (R/μ₀)(−Im γ_{mℓ}) |û_{mℓ}|²` of the total field.
    pub outgoing: f64,
    /// `−Im Σ conj(û) F`: power delivered by the boundary forcing.
    pub delivered: f64,
    /// The same sum for the bare incident trace, used as normalization.
    pub incident: f64,
}

impl EnergyBalance {
    pub fn residual(&self) -> f64 {
        if self.incident == 0.0 {
            (self.outgoing - self.delivered).abs()
        } else {
            (self.outgoing - self.delivered).abs() / self.incident
        }
    }
}

pub fn energy_fluxes(sol: &ScatterSolution) -> EnergyBalance {
    let scale = sol.radius / sol.mu0;
    let mut outgoing = 0.0;
    let mut delivered = 0.0;
    let mut incident = 0.0;
    for az in &sol.azimuthal {
        for (b, e) in az.dtn.iter().enumerate() {
            let Some(i) = az.layout.boundary_index(b) else { continue };
            if e.class == HarmonicClass::Propagating {
                outgoing += scale * (-e.gamma.im) * az.total[i].norm_sqr();
            }
            delivered -= (az.total[i].conj() * az.forcing[i]).im;
        }
        if let Some(e) = az.dtn.iter().find(|e| e.m == sol.incident.m) {
            // bare incident power: |J_ℓ(ηR) A|² with the same weights
            let h = crate::harmonics::HarmonicData::new(sol.incident.m, &sol.params);
            let eta = h.eta_sq.sqrt();
            if let Ok(j) = crate::specfun::bessel_j(az.l as i32, eta * sol.radius) {
                incident += scale * (-e.gamma.im) * (j * sol.incident.amplitude.norm()).powi(2);
            }
        }
    }
    EnergyBalance { outgoing, delivered, incident }
}

/// Relative mismatch between outgoing propagating flux and the power routed
/// in through the boundary forcing.
pub fn energy_balance(sol: &ScatterSolution) -> f64 {
    energy_fluxes(sol).residual()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::{build_mesh, Grading};

    fn setup(eps1: f64) -> (MediumSpec, RadialMesh) {
        let spec = MediumSpec::step_core(eps1, 1.0, 0.5, 1.0, 1.0, 1.0).unwrap();
        let mesh = build_mesh(1.0, 40, Grading::Uniform, &[0.5]).unwrap();
        (spec, mesh)
    }

    #[test]
    fn zero_contrast_is_exact_null() {
        let (spec, mesh) = setup(1.0);
        let p = BlochParams::new(0.1, 1.2, 1.0, 1.0).unwrap();
        let w = IncidentWave { m: 0, theta0: 0.4, amplitude: C64::new(1.0, 0.5) };
        let sol = solve_scattering(&spec, &p, &w, &mesh, 2, 4).unwrap();
        assert!(sol.far_field.values().all(|a| a.norm() == 0.0));
        assert!(energy_balance(&sol) < 1e-8);
    }

    #[test]
    fn evanescent_incident_rejected() {
        let (spec, mesh) = setup(2.0);
        let p = BlochParams::new(0.0, 0.5, 1.0, 1.0).unwrap();
        let w = IncidentWave { m: 1, theta0: 0.0, amplitude: C64::new(1.0, 0.0) };
        assert!(matches!(solve_scattering(&spec, &p, &w, &mesh, 2, 2), Err(PillarError::InvalidIncident { .. })));
    }

    #[test]
    fn linear_in_amplitude() {
        let (spec, mesh) = setup(2.5);
        let s = Scatterer::new(&spec, &mesh, 1, 3).unwrap();
        let p = BlochParams::new(0.0, 1.1, 1.0, 1.0).unwrap();
        let w = IncidentWave { m: 0, theta0: 0.2, amplitude: C64::new(0.7, -0.1) };
        let a = s.solve(&p, &w).unwrap();
        let b = s.solve(&p, &IncidentWave { amplitude: w.amplitude * 2.0, ..w }).unwrap();
        for (x, y) in a.azimuthal.iter().zip(&b.azimuthal) {
            let scale = norm2(&x.total);
            for (u, v) in x.total.iter().zip(&y.total) {
                assert!((u * 2.0 - v).norm() <= 1e-12 * scale);
            }
        }
    }
}
