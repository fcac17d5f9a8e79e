mod common;

use std::f64::consts::PI;

use common::{first_sign_change, j_prime, k_prime, oracle_j, oracle_k, FiberMode};
use pillar_core::assembly::{build_mesh, Grading, RadialMesh};
use pillar_core::certify::{
    alpha_cases, certify_monotone, certify_radius, falsification_search, radius_bound, rellich_identity,
    rellich_residual, CaseTag, DiscreteField, FalsificationGrid, Verdict, ALPHA_TOLERANCE,
};
use pillar_core::harmonics::BlochParams;
use pillar_core::medium::{MediumSpec, Shell, ZProfile};
use pillar_core::modes::ModeSolver;
use pillar_core::C64;
use proptest::prelude::*;

#[test]
fn case_one_alpha_example() {
    let p = BlochParams::new(0.0, 1.0, 1.0, 1.0).unwrap();
    let a = alpha_cases(&p, 0.9, 0, 0).unwrap();
    let j01 = first_sign_change(|x| oracle_j(0, x), 1.0, 3.0, 20);
    let expect = (j01 / 0.9).powi(2);
    let c = a.cases.iter().find(|c| c.alpha.is_some()).unwrap();
    assert_eq!((c.m, c.l, c.case), (0, 0, CaseTag::I));
    assert!((c.alpha.unwrap() - expect).abs() < 1e-10, "{} vs {expect}", c.alpha.unwrap());
}

#[test]
fn case_one_chain_and_minimizer() {
    for (kappa, omega) in [(0.0, 1.0), (0.3, 2.0), (-0.45, 1.3)] {
        let p = BlochParams::new(kappa, omega, 1.0, 1.0).unwrap();
        let r = 0.9 * radius_bound(&p).unwrap();
        let a = alpha_cases(&p, r, 6, 4).unwrap();
        let floor = (1.0 / (r * r) + kappa * kappa) / p.k0_sq();
        assert!(floor > 1.0);
        let case_one: Vec<_> = a.cases.iter().filter(|c| c.case == CaseTag::I && c.alpha.is_some()).collect();
        assert!(!case_one.is_empty());
        for c in &case_one {
            assert!(c.alpha.unwrap() >= floor * (1.0 - 1e-14), "{c:?}");
        }
        let min = case_one.iter().min_by(|a, b| a.alpha.unwrap().total_cmp(&b.alpha.unwrap())).unwrap();
        let m_star = (-kappa).round() as i64;
        assert_eq!((min.m, min.l), (m_star, 0));
        assert!(a.min_alpha.unwrap() > 1.0 + ALPHA_TOLERANCE);
    }
}

#[test]
fn case_two_and_three_roots_match_oracles() {
    let p = BlochParams::new(0.0, 1.0, 1.0, 1.0).unwrap();
    let r = 0.6;
    let a = alpha_cases(&p, r, 2, 2).unwrap();
    for c in a.cases.iter().filter(|c| c.alpha.is_some()) {
        let l = c.l as i32;
        let g = match c.case {
            CaseTag::II => {
                let e = ((c.m as f64).powi(2) - 1.0).sqrt();
                -e * k_prime(l, e * r) / oracle_k(l, e * r)
            }
            CaseTag::III => l as f64 / r,
            _ => continue,
        };
        let x = first_sign_change(|x| x * j_prime(l, x) + g * r * oracle_j(l, x), 1e-3, 8.0, 800);
        let expect = ((x / r).powi(2) + (c.m as f64).powi(2)) / p.k0_sq();
        assert!((c.alpha.unwrap() - expect).abs() < 1e-9 * expect, "{c:?} vs {expect}");
        assert!(c.alpha.unwrap() > 1.0);
    }
}

#[test]
fn radius_certificate_premises() {
    let p = BlochParams::new(0.2, 1.0, 1.0, 1.0).unwrap();
    let bound = radius_bound(&p).unwrap();
    let inverse = MediumSpec::step_core(0.5, 0.8, 0.25 * bound, 1.0, 1.0, 0.5 * bound).unwrap();
    let cert = certify_radius(&inverse, &p).unwrap();
    assert_eq!(cert.verdict, Verdict::NoGuidedModes, "{cert:?}");

    let dense = MediumSpec::step_core(2.0, 1.0, 0.25 * bound, 1.0, 1.0, 0.5 * bound).unwrap();
    let cert = certify_radius(&dense, &p).unwrap();
    assert_eq!(cert.verdict, Verdict::Inconclusive);
    assert!(cert.failed_premise.unwrap().starts_with("inverse-structure"));

    let wide = MediumSpec::step_core(0.5, 0.8, 0.5 * bound, 1.0, 1.0, 1.5 * bound).unwrap();
    let cert = certify_radius(&wide, &p).unwrap();
    assert_eq!(cert.verdict, Verdict::Inconclusive);
    assert!(cert.failed_premise.unwrap().starts_with("radius"));
}

fn relative_gap(lhs: f64, rhs: f64) -> f64 {
    (lhs - rhs).abs() / lhs.abs().max(rhs.abs()).max(1e-12)
}

#[test]
fn rellich_identity_holds_for_exact_fiber_mode() {
    let (eps1, rho, radius, kappa) = (60.0, 0.8, 1.0, 0.45);
    let spec = MediumSpec::step_core(eps1, 1.0, rho, 1.0, 1.0, radius).unwrap();
    for l in [0, 1] {
        let (field, omega) = FiberMode::new(l, kappa, eps1, rho, radius);
        let p = BlochParams::new(kappa, omega, 1.0, 1.0).unwrap();
        let gap = |n: usize| {
            let mesh = build_mesh(radius, n, Grading::Uniform, &[rho]).unwrap();
            let (lhs, rhs) = rellich_identity(&field, &spec, &p, l as i64, &mesh, 2).unwrap();
            relative_gap(lhs, rhs)
        };
        let (g25, g50, g400) = (gap(25), gap(50), gap(400));
        assert!(g400 < 1e-6, "l = {l}: {g400:e}");
        assert!(g50 <= 0.5 * g25, "l = {l}: {g25:e} -> {g50:e}");
    }
}

#[test]
fn rellich_identity_of_discrete_mode_converges() {
    let spec = MediumSpec::step_core(60.0, 1.0, 0.8, 1.0, 1.0, 1.0).unwrap();
    let gap = |n: usize| {
        let mesh = build_mesh(1.0, n, Grading::Uniform, &[0.8]).unwrap();
        let solver = ModeSolver::new(&spec, &mesh, 2).unwrap();
        let mode = solver.below_cutoff_spectrum(0.45, 1, &[-1, 0, 1], 1).unwrap().remove(0);
        let (lhs, rhs) = rellich_residual(&mode, &spec, &mesh).unwrap();
        relative_gap(lhs, rhs)
    };
    let (g100, g200) = (gap(100), gap(200));
    assert!(g200 < 2e-2, "{g200:e}");
    assert!(g200 < g100, "{g100:e} -> {g200:e}");
}

#[test]
fn zero_field_gives_zero_identity() {
    let spec = MediumSpec::step_core(0.5, 1.0, 0.5, 1.0, 1.0, 1.0).unwrap();
    let mesh = build_mesh(1.0, 20, Grading::Uniform, &[0.5]).unwrap();
    let solver = ModeSolver::new(&spec, &mesh, 2).unwrap();
    let p = BlochParams::new(0.3, 0.7, 1.0, 1.0).unwrap();
    let layout = solver.assembler().interior(1, 0.3, &[-1, 0, 1]).unwrap().layout.clone();
    let x = vec![C64::new(0.0, 0.0); layout.dim()];
    let field = DiscreteField::with_dtn(&layout, &mesh, &x, &p, 1).unwrap();
    assert_eq!(rellich_identity(&field, &spec, &p, 1, &mesh, 12).unwrap(), (0.0, 0.0));
}

fn staircase() -> MediumSpec {
    let cells = |a: f64, b: f64| ZProfile::Cells { breaks: vec![-PI, 0.0, PI], values: vec![a, b] };
    let shells = vec![
        Shell { outer: 0.3, eps: cells(0.4, 0.5), mu: ZProfile::Constant(0.7) },
        Shell { outer: 0.6, eps: cells(0.6, 0.8), mu: cells(0.8, 0.9) },
        Shell { outer: 0.8, eps: ZProfile::Constant(0.9), mu: ZProfile::Constant(1.0) },
    ];
    MediumSpec::new(shells, 1.0, 1.0, 1.0, 1).unwrap()
}

fn monotone_mesh() -> RadialMesh {
    build_mesh(1.0, 24, Grading::Uniform, &[0.3, 0.6, 0.8]).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]
    #[test]
    fn monotone_lhs_is_nonnegative(
        kappa in -0.5f64..0.5,
        omega in 0.05f64..2.0,
        l in -2i64..=2,
        seed in proptest::collection::vec(-1.0f64..1.0, 200),
    ) {
        let spec = staircase();
        prop_assume!(spec.is_radially_monotone());
        let mesh = monotone_mesh();
        let solver = ModeSolver::new(&spec, &mesh, 4).unwrap();
        let p = BlochParams::new(kappa, omega, 1.0, 1.0).unwrap();
        let layout = solver.assembler().interior(l, kappa, &[-2, -1, 0, 1, 2]).unwrap().layout.clone();
        let x: Vec<C64> = (0..layout.dim()).map(|i| C64::new(seed[i % 200], seed[(7 * i + 3) % 200])).collect();
        let field = DiscreteField::with_dtn(&layout, &mesh, &x, &p, l).unwrap();
        let (lhs, _) = rellich_identity(&field, &spec, &p, l, &mesh, 12).unwrap();
        prop_assert!(lhs >= -1e-8, "lhs = {lhs}");
    }
}

#[test]
fn monotone_certificate_survives_falsification() {
    let grid = FalsificationGrid::standard();
    let cert = certify_monotone(&staircase(), &grid).unwrap();
    assert_eq!(cert.verdict, Verdict::NoGuidedModes);
    let hom = MediumSpec::homogeneous(1.0, 1.0, 1.0).unwrap();
    assert_eq!(certify_monotone(&hom, &grid).unwrap().verdict, Verdict::NoGuidedModes);

    let core = MediumSpec::step_core(12.0, 1.0, 0.5, 1.0, 1.0, 1.0).unwrap();
    let cert = certify_monotone(&core, &grid).unwrap();
    assert_eq!(cert.verdict, Verdict::Inconclusive);
    match cert.evidence {
        pillar_core::certify::Evidence::Rellich { search: Some(s), .. } => assert!(!s.verified.is_empty()),
        e => panic!("unexpected evidence {e:?}"),
    }
}

#[test]
fn inverse_structure_has_no_mode_on_grid() {
    let p = BlochParams::new(0.0, 1.0, 1.0, 1.0).unwrap();
    let bound = radius_bound(&p).unwrap();
    let r = 0.5 * bound;
    let inverse = MediumSpec::step_core(0.5, 0.8, 0.5 * r, 1.0, 1.0, r).unwrap();
    let grid = FalsificationGrid::standard();
    assert!(falsification_search(&inverse, &grid).unwrap().verified.is_empty());
    let dense = MediumSpec::step_core(12.0, 1.0, 0.5 * r, 1.0, 1.0, r).unwrap();
    assert!(!falsification_search(&dense, &grid).unwrap().verified.is_empty());
}
