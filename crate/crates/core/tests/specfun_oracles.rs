mod common;

use common::*;
use num_complex::Complex;
use pillar_core::specfun::*;
use proptest::prelude::*;

const GRID: [f64; 9] = [0.3, 1.0, 2.5, 4.9, 5.1, 9.7, 15.0, 22.2, 30.0];

#[test]
fn j_matches_integral_oracle() {
    for n in 0..=10 {
        for &x in &GRID {
            let got = bessel_j(n, x).unwrap();
            let want = oracle_j(n, x);
            assert!((got - want).abs() < 1e-12, "J_{n}({x}): {got} vs {want}");
        }
    }
}

#[test]
fn j0_power_series_value() {
    let want = series_j0(1.0);
    assert!((want - 0.765_197_686_557_966).abs() < 1e-15);
    assert!((bessel_j(0, 1.0f64).unwrap() - want).abs() < 1e-15);
}

#[test]
fn y_matches_integral_oracle() {
    for n in 0..=10 {
        for &x in &GRID {
            let got = bessel_y(n, x).unwrap();
            let want = oracle_y(n, x);
            assert!(close(got, want, 1e-11), "Y_{n}({x}): {got} vs {want}");
        }
    }
}

#[test]
fn i_and_k_match_integral_oracles() {
    for n in 0..=10 {
        for &x in &GRID {
            let i = bessel_i(n, x).unwrap();
            assert!(close(i, oracle_i(n, x), 1e-12), "I_{n}({x})");
            let k = bessel_k(n, x).unwrap();
            let want = oracle_k(n, x);
            assert!(close(k, want, 1e-11), "K_{n}({x}): {k} vs {want}");
        }
    }
}

#[test]
fn modified_values_from_series() {
    assert!((bessel_i(0, 1.0f64).unwrap() - 1.266_065_877_752_008).abs() < 1e-14);
    // K1(1)/K0(1)
    let ratio = bessel_k(1, 1.0f64).unwrap() / bessel_k(0, 1.0f64).unwrap();
    assert!((ratio - oracle_k(1, 1.0) / oracle_k(0, 1.0)).abs() < 1e-12);
    assert!((ratio - 1.429_625).abs() < 1e-6);
}

#[test]
fn hankel_matches_oracles() {
    let h = hankel1(0, Complex::new(1.0f64, 0.0)).unwrap();
    assert!((h.re - 0.765_197_686_557_966).abs() < 1e-14);
    assert!((h.im - 0.088_256_964_215_677).abs() < 1e-14);
    // imaginary branch against K: H1_n(iy) = (2/(iπ)) i^{-n} K_n(y)
    for n in 0..5 {
        for &y in &[0.5, 2.0, 10.0] {
            let h = hankel1(n, Complex::new(0.0, y)).unwrap();
            let k = oracle_k(n, y);
            let expected = Complex::new(0.0, -2.0 / std::f64::consts::PI)
                * Complex::new(0.0, -1.0).powi(n)
                * k;
            assert!((h - expected).norm() < 1e-11 * expected.norm().max(1.0));
        }
    }
}

#[test]
fn wronskian_at_two_point_five() {
    let x = 2.5;
    let res = oracle_j(1, x) * oracle_y(0, x) - oracle_j(0, x) * oracle_y(1, x)
        - 2.0 / (std::f64::consts::PI * x);
    assert!(res.abs() < 1e-12);
    let res = bessel_j(1, x).unwrap() * bessel_y(0, x).unwrap()
        - bessel_j(0, x).unwrap() * bessel_y(1, x).unwrap()
        - 2.0 / (std::f64::consts::PI * x);
    assert!(res.abs() < 1e-10);
}

#[test]
fn zeros_match_bisection_oracle() {
    let z0 = bisect(|x| oracle_j(0, x), 2.0, 3.0);
    let z1 = bisect(|x| oracle_j(1, x), 3.0, 4.0);
    assert!((z0 - 2.404_825_557_695_773).abs() < 1e-12);
    assert!((z1 - 3.831_705_970_207_512).abs() < 1e-12);
    let t = j_zeros::<f64>(0, 3).unwrap();
    assert!((t.zeros[0] - z0).abs() < 1e-12);
    for l in 0..8u32 {
        let t = j_zeros::<f64>(l, 6).unwrap();
        for w in t.zeros.windows(2) {
            assert!(w[0] < w[1]);
        }
        for &z in &t.zeros {
            assert!(bessel_j(l as i32, z).unwrap().abs() < 1e-10);
            let a = bessel_j(l as i32, z - 1e-6).unwrap();
            let b = bessel_j(l as i32, z + 1e-6).unwrap();
            assert!(a * b < 0.0);
        }
    }
}

#[test]
fn modified_positivity_and_monotonicity() {
    for n in 0..=10 {
        let mut prev = 0.0;
        for k in 1..=300 {
            let x = k as f64 * 0.1;
            let (i, di) = bessel_i_pair(n, x).unwrap();
            assert!(i > 0.0 && di > 0.0);
            assert!(i > prev);
            prev = i;
        }
    }
}

proptest! {
    #[test]
    fn recurrence_residual(l in 1i32..=10, x in 0.1f64..30.0) {
        let lhs = bessel_j(l - 1, x).unwrap() + bessel_j(l + 1, x).unwrap();
        let rhs = 2.0 * l as f64 / x * bessel_j(l, x).unwrap();
        prop_assert!((lhs - rhs).abs() < 1e-9);
    }

    #[test]
    fn wronskian_residual(l in 0i32..=10, x in 0.1f64..30.0) {
        let w = bessel_j(l + 1, x).unwrap() * bessel_y(l, x).unwrap()
            - bessel_j(l, x).unwrap() * bessel_y(l + 1, x).unwrap();
        let target = 2.0 / (std::f64::consts::PI * x);
        prop_assert!((w - target).abs() < 1e-9 * target.max(1.0));
    }
}
