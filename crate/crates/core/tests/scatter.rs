mod common;

use std::f64::consts::PI;

use common::{integrate, oracle_j};
use pillar_core::assembly::{build_mesh, Grading};
use pillar_core::harmonics::{BlochParams, IncidentWave};
use pillar_core::linalg::norm2;
use pillar_core::medium::{MediumSpec, Shell, ZProfile};
use pillar_core::scatter::*;
use pillar_core::specfun::hankel1;
use pillar_core::{PillarError, C64};

fn unit(kappa: f64, omega: f64) -> BlochParams<f64> {
    BlochParams::new(kappa, omega, 1.0, 1.0).unwrap()
}

fn core(eps1: f64, rho: f64, radius: f64) -> MediumSpec {
    MediumSpec::step_core(eps1, 1.0, rho, 1.0, 1.0, radius).unwrap()
}

fn plane(m: i64, theta0: f64) -> IncidentWave<f64> {
    IncidentWave { m, theta0, amplitude: C64::new(1.0, 0.0) }
}

#[test]
fn zero_contrast_null() {
    let spec = MediumSpec::homogeneous(1.0, 1.0, 1.0).unwrap();
    let mesh = build_mesh(1.0, 60, Grading::Uniform, &[]).unwrap();
    let sol = solve_scattering(&spec, &unit(0.2, 1.7), &plane(-1, 0.9), &mesh, 3, 6).unwrap();
    for az in &sol.azimuthal {
        assert!(norm2(&az.scattered) <= 1e-8 * norm2(&az.total).max(1e-300));
    }
    assert!(sol.far_field.values().all(|a| a.norm() < 1e-8));
    assert!(energy_balance(&sol) < 1e-8);
}

#[test]
fn born_approximation_low_contrast() {
    let (rho, omega, d_eps) = (0.5, 0.8, 0.1);
    let spec = core(1.0 + d_eps, rho, 1.0);
    let mesh = build_mesh(1.0, 200, Grading::Uniform, &[rho]).unwrap();
    let sol = solve_scattering(&spec, &unit(0.0, omega), &plane(0, 0.0), &mesh, 0, 4).unwrap();
    // a_00 = (iπ/2) μ₀ ω² Δε ∫_0^ρ J_0(ηr)² r dr, η = ω
    let integral = integrate(|r| oracle_j(0, omega * r).powi(2) * r, 0.0, rho, 8, 20);
    let born = C64::new(0.0, PI / 2.0 * omega * omega * d_eps * integral);
    let a00 = sol.far_field[&(0, 0)];
    assert!((a00 - born).norm() < 0.1 * born.norm(), "{a00} vs {born}");
    assert!(energy_balance(&sol) < 1e-6);
    assert!(sol.residual < 1e-10);
}

#[test]
fn energy_balance_phase_invariant() {
    let spec = core(3.0, 0.6, 1.0);
    let mesh = build_mesh(1.0, 80, Grading::Uniform, &[0.6]).unwrap();
    let s = Scatterer::new(&spec, &mesh, 2, 5).unwrap();
    let p = unit(0.1, 1.6);
    let w = plane(0, 0.3);
    let a = energy_balance(&s.solve(&p, &w).unwrap());
    let rotated = IncidentWave { amplitude: C64::from_polar(1.0, 1.234), ..w };
    let b = energy_balance(&s.solve(&p, &rotated).unwrap());
    assert!(a < 1e-6 && b < 1e-6);
    assert!((a - b).abs() < 1e-10);
}

fn wavy_even() -> MediumSpec {
    // even in z, so the Fourier coefficients are real
    let eps = ZProfile::Cells { breaks: vec![-PI, -1.0, 1.0, PI], values: vec![1.5, 3.0, 1.5] };
    MediumSpec::new(vec![Shell { outer: 0.6, eps, mu: ZProfile::Constant(1.0) }], 1.0, 1.0, 1.0, 1).unwrap()
}

#[test]
fn scattered_and_total_formulations_agree() {
    let spec = wavy_even();
    let mesh = build_mesh(1.0, 60, Grading::Uniform, &[0.6]).unwrap();
    let s = Scatterer::new(&spec, &mesh, 3, 4).unwrap();
    let p = unit(0.15, 1.4);
    let w = IncidentWave { m: -1, theta0: 0.5, amplitude: C64::new(0.3, 0.8) };
    let sol = s.solve(&p, &w).unwrap();
    let direct = s.solve_total_field(&p, &w).unwrap();
    for (az, (l, u)) in sol.azimuthal.iter().zip(&direct) {
        assert_eq!(az.l, *l);
        let diff: Vec<C64> = az.total.iter().zip(u).map(|(a, b)| a - b).collect();
        assert!(norm2(&diff) <= 1e-10 * norm2(u), "l = {l}");
    }
}

#[test]
fn reciprocity_of_cross_amplitudes() {
    let spec = wavy_even();
    let mesh = build_mesh(1.0, 60, Grading::Uniform, &[0.6]).unwrap();
    let s = Scatterer::new(&spec, &mesh, 3, 3).unwrap();
    let p = unit(0.2, 1.6);
    // m = 0 and m = -1 both propagate
    let a1 = s.solve(&p, &plane(0, 0.0)).unwrap();
    let a2 = s.solve(&p, &plane(-1, 0.0)).unwrap();
    for l in -3..=3 {
        let x = a1.far_field[&(-1, l)];
        let y = a2.far_field[&(0, l)];
        assert!((x - y).norm() <= 1e-8 * x.norm().max(y.norm()), "l = {l}: {x} vs {y}");
    }
}

#[test]
fn mirror_symmetry_of_amplitudes() {
    // real, z-even medium, κ = 0, real amplitude, θ₀ = 0: mirror images in x
    // and z give û_{−m,−ℓ} = (−1)^ℓ û_{m,ℓ}; with H_{−ℓ} = (−1)^ℓ H_ℓ the
    // amplitudes satisfy a_{−m,−ℓ} = a_{m,ℓ}
    let spec = wavy_even();
    let mesh = build_mesh(1.0, 60, Grading::Uniform, &[0.6]).unwrap();
    let sol = solve_scattering(&spec, &unit(0.0, 1.3), &plane(0, 0.0), &mesh, 3, 4).unwrap();
    for (&(m, l), &a) in &sol.far_field {
        let b = sol.far_field[&(-m, -l)];
        assert!((b - a).norm() <= 1e-10 * a.norm().max(1e-12), "({m},{l}) {a} {b}");
    }
}

#[test]
fn far_field_reconstructs_larger_domain() {
    let (rho, omega) = (0.5, 1.3);
    let p = unit(0.0, omega);
    let w = plane(0, 0.4);
    let small = solve_scattering(&core(2.0, rho, 1.0), &p, &w, &build_mesh(1.0, 1000, Grading::Uniform, &[rho]).unwrap(), 0, 2).unwrap();
    let big = solve_scattering(&core(2.0, rho, 2.0), &p, &w, &build_mesh(2.0, 2000, Grading::Uniform, &[rho]).unwrap(), 0, 2).unwrap();
    let node = big.mesh.iter().position(|&r| (r - 1.5).abs() < 1e-12).unwrap();
    for az in &big.azimuthal {
        let prof = az.layout.radial_profile(&az.scattered, 0);
        let a = small.far_field[&(0, az.l)];
        let synth = a * hankel1(az.l as i32, C64::new(omega * 1.5, 0.0)).unwrap();
        assert!((prof[node] - synth).norm() < 1e-6, "l = {}: {} vs {}", az.l, prof[node], synth);
    }
}

#[test]
fn bitwise_deterministic() {
    let spec = wavy_even();
    let mesh = build_mesh(1.0, 40, Grading::Uniform, &[0.6]).unwrap();
    let run = || solve_scattering(&spec, &unit(0.1, 1.2), &plane(0, 0.7), &mesh, 2, 3).unwrap();
    let (a, b) = (run(), run());
    for (x, y) in a.far_field.values().zip(b.far_field.values()) {
        assert_eq!(x.re.to_bits(), y.re.to_bits());
        assert_eq!(x.im.to_bits(), y.im.to_bits());
    }
}

#[test]
fn field_inside_matches_trace() {
    let spec = core(2.0, 0.5, 1.0);
    let mesh = build_mesh(1.0, 60, Grading::Uniform, &[0.5]).unwrap();
    let p = unit(0.0, 1.1);
    let sol = solve_scattering(&spec, &p, &plane(0, 0.0), &mesh, 1, 8).unwrap();
    let (theta, z) = (0.8, 0.3);
    let inside = sol.field(1.0, theta, z).unwrap();
    let from_trace = sol.trace.synthesize(0.0, theta, z);
    assert!((inside - from_trace).norm() < 1e-12);
    // just outside: incident plus outgoing expansion continues the trace
    let outside = sol.field(1.0 + 1e-9, theta, z).unwrap();
    assert!((outside - inside).norm() < 1e-4);
}

#[test]
fn near_singular_is_reported() {
    let spec = core(12.0, 0.5, 1.0);
    let mesh = build_mesh(1.0, 40, Grading::Uniform, &[0.5]).unwrap();
    let s = Scatterer::new(&spec, &mesh, 1, 1).unwrap();
    let p = unit(0.4, 0.3);
    assert!(s.system_condition(&p, 0).unwrap().is_finite());
    let err = PillarError::NearSingular { omega: 0.3, kappa: 0.4, condition: 1e13 };
    assert!(err.to_string().contains("guided-mode"));
}
