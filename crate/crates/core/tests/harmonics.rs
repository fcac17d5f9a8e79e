mod common;

use std::f64::consts::PI;

use common::oracle_k;
use num_complex::Complex;
use pillar_core::harmonics::*;
use proptest::prelude::*;

fn unit(kappa: f64, omega: f64) -> BlochParams<f64> {
    BlochParams::new(kappa, omega, 1.0, 1.0).unwrap()
}

#[test]
fn evanescent_gamma_from_k_oracle() {
    // m = 1 at negligible frequency gives eta = i to machine precision
    let p = unit(0.0, 1e-9);
    let h = HarmonicData::new(1, &p);
    assert_eq!(h.class, HarmonicClass::Evanescent);
    let g = gamma_coefficient(&h, 0, 1.0).unwrap();
    let want = oracle_k(1, 1.0) / oracle_k(0, 1.0);
    assert!((g.re - want).abs() < 1e-12, "{g} vs {want}");
    assert_eq!(g.im, 0.0);
    assert!((g.re - 1.429_625).abs() < 1e-6);
}

#[test]
fn evanescent_entries_positive_real() {
    let p = unit(0.3, 1.7);
    let table = dtn_table(&p, 0.8, 6, 5).unwrap();
    let (te, _) = split_dtn(&table);
    for e in te.iter().filter(|e| e.class == HarmonicClass::Evanescent) {
        let a = (-eta_sq(e.m, &p)).sqrt();
        let k = oracle_k(e.l as i32, a * 0.8);
        let dk = -0.5 * (oracle_k(e.l as i32 - 1, a * 0.8) + oracle_k(e.l as i32 + 1, a * 0.8));
        let want = -a * dk / k;
        assert!(e.gamma.re > 0.0 && e.gamma.im.abs() < 1e-12);
        assert!((e.gamma.re - want).abs() < 1e-10 * want, "m={} l={}", e.m, e.l);
    }
}

#[test]
fn algebraic_entries_exact() {
    let p = unit(0.25, 1.25);
    let table = dtn_table(&p, 0.5, 2, 4).unwrap();
    for e in table.iter().filter(|e| e.class == HarmonicClass::Algebraic) {
        assert_eq!(e.gamma, Complex::new(e.l.abs() as f64 / 0.5, 0.0));
    }
    assert!(table.iter().any(|e| e.class == HarmonicClass::Algebraic));
}

#[test]
fn incident_trace_round_trip() {
    let p = unit(0.2, 1.9);
    let radius = 1.3;
    let w = IncidentWave { m: -1, theta0: 0.7, amplitude: Complex::new(0.6, -0.8) };
    let (trace, _) = incident_trace(&w, &p, radius, 30).unwrap();
    let mut worst = 0.0f64;
    for i in 0..64 {
        for k in 0..64 {
            let theta = 2.0 * PI * i as f64 / 64.0;
            let z = -PI + 2.0 * PI * k as f64 / 64.0;
            let got = trace.synthesize(p.kappa, theta, z);
            let want = w.evaluate(&p, radius * theta.cos(), radius * theta.sin(), z).unwrap();
            worst = worst.max((got - want).norm());
        }
    }
    assert!(worst < 1e-8, "max error {worst}");
}

#[test]
fn incident_normal_trace_matches_finite_difference() {
    let p = unit(0.0, 1.4);
    let w = IncidentWave { m: 0, theta0: 0.3, amplitude: Complex::new(1.0, 0.0) };
    let (_, d) = incident_trace(&w, &p, 1.0, 30).unwrap();
    let h = 1e-5;
    for theta in [0.0f64, 1.1, 2.9] {
        let f = |r: f64| w.evaluate(&p, r * theta.cos(), r * theta.sin(), 0.2).unwrap();
        let fd = (f(1.0 + h) - f(1.0 - h)) / (2.0 * h);
        assert!((d.synthesize(0.0, theta, 0.2) - fd).norm() < 1e-8);
    }
}

#[test]
fn jacobi_anger_parseval() {
    let p = unit(0.0, 2.0);
    let w = IncidentWave { m: 0, theta0: 0.0, amplitude: Complex::new(1.0, 0.0) };
    let (trace, _) = incident_trace(&w, &p, 3.0, 40).unwrap();
    let s: f64 = trace.coefficients.values().map(|c| c.norm_sqr()).sum();
    assert!((s - 1.0).abs() < 1e-12);
}

proptest! {
    #[test]
    fn evanescent_gamma_is_positive(kappa in -0.5f64..0.5, omega in 0.05f64..3.0, radius in 0.2f64..3.0, l in -8i64..=8) {
        let p = unit(kappa, omega);
        for h in classify_harmonics(&p, 8).into_iter().filter(|h| h.class == HarmonicClass::Evanescent) {
            let g = gamma_coefficient(&h, l, radius).unwrap();
            prop_assert!(g.re > 0.0);
            prop_assert!(g.im.abs() < 1e-12);
        }
    }

    #[test]
    fn trichotomy(kappa in -0.5f64..0.5, omega in 0.01f64..4.0, m in -20i64..20) {
        let p = unit(kappa, omega);
        let h = HarmonicData::new(m, &p);
        let e = h.eta_sq;
        match h.class {
            HarmonicClass::Propagating => prop_assert!(e > 0.0),
            HarmonicClass::Evanescent => prop_assert!(e < 0.0),
            HarmonicClass::Algebraic => prop_assert!(e.abs() <= 1e-12 * p.k0_sq().max(1.0)),
        }
        if (m as f64 + kappa).abs() > omega {
            prop_assert_eq!(h.class, HarmonicClass::Evanescent);
        }
    }

    #[test]
    fn propagating_gamma_has_imaginary_part(kappa in -0.5f64..0.5, omega in 0.6f64..3.0, l in -6i64..=6) {
        let p = unit(kappa, omega);
        for m in p.propagating_indices() {
            let g = gamma_coefficient(&HarmonicData::new(m, &p), l, 1.0).unwrap();
            prop_assert!(g.im != 0.0);
        }
    }
}
