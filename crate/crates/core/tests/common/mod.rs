//! Test-only oracles, independent of the library's evaluation paths.
#![allow(dead_code)]

use std::f64::consts::PI;

use pillar_core::certify::RadialField;
use pillar_core::C64;

/// Gauss–Legendre nodes and weights on [-1, 1] (Newton on P_n).
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { z } else { p1 };
            let pnm1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (z * pn - pnm1) / (z * z - 1.0);
            let dz = pn / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    (x, w)
}

/// Composite Gauss–Legendre quadrature.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize, order: usize) -> f64 {
    let (x, w) = gauss_legendre(order);
    let h = (b - a) / panels as f64;
    let mut s = 0.0;
    for p in 0..panels {
        let c = a + (p as f64 + 0.5) * h;
        for (xi, wi) in x.iter().zip(&w) {
            s += wi * f(c + 0.5 * h * xi);
        }
    }
    0.5 * h * s
}

/// `J_n(x) = (1/2π) ∫_{-π}^{π} cos(nτ - x sin τ) dτ`, periodic trapezoid rule.
pub fn oracle_j(n: i32, x: f64) -> f64 {
    let m = 512;
    let h = 2.0 * PI / m as f64;
    (0..m)
        .map(|k| {
            let t = -PI + k as f64 * h;
            (n as f64 * t - x * t.sin()).cos()
        })
        .sum::<f64>()
        / m as f64
}

/// `I_n(x) = (1/2π) ∫_{-π}^{π} e^{x cos τ} cos(nτ) dτ`.
pub fn oracle_i(n: i32, x: f64) -> f64 {
    let m = 1024;
    let h = 2.0 * PI / m as f64;
    (0..m)
        .map(|k| {
            let t = -PI + k as f64 * h;
            (x * t.cos()).exp() * (n as f64 * t).cos()
        })
        .sum::<f64>()
        / m as f64
}

/// Largest exponent of `e^{n t - x sinh t}`-type integrands and a cut-off
/// beyond which they are negligible.
fn tail_cut(n: f64, x: f64, growth: impl Fn(f64) -> f64) -> f64 {
    let mut peak = f64::NEG_INFINITY;
    let mut t = 0.0;
    loop {
        let e = n * t - x * growth(t);
        peak = peak.max(e);
        if t > 1.0 && e < peak - 50.0 {
            return t;
        }
        t += 0.05;
    }
}

/// `K_n(x) = ∫_0^∞ e^{-x cosh t} cosh(n t) dt` (trapezoid on a doubly
/// exponentially decaying integrand).
pub fn oracle_k(n: i32, x: f64) -> f64 {
    let nf = n.unsigned_abs() as f64;
    let t_max = tail_cut(nf, x, f64::cosh);
    let h = 1e-3;
    let steps = (t_max / h).ceil() as usize;
    let f = |t: f64| (-x * t.cosh() + nf * t).exp() * 0.5 * (1.0 + (-2.0 * nf * t).exp());
    let mut s = 0.5 * f(0.0);
    for k in 1..=steps {
        s += f(k as f64 * h);
    }
    s * h
}

/// `Y_n(x) = (1/π)∫_0^π sin(x sin τ - nτ) dτ - (1/π)∫_0^∞ (e^{nt} + (-1)^n e^{-nt}) e^{-x sinh t} dt`.
pub fn oracle_y(n: i32, x: f64) -> f64 {
    let nf = n as f64;
    let first = integrate(|t| (x * t.sin() - nf * t).sin(), 0.0, PI, 64, 20);
    let t_max = tail_cut(nf, x, f64::sinh);
    let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
    let second = integrate(
        |t| ((nf * t - x * t.sinh()).exp()) + sign * (-nf * t - x * t.sinh()).exp(),
        0.0,
        t_max,
        400,
        20,
    );
    (first - second) / PI
}

/// Truncated power series of `J_0` summed until terms drop below 1e-18.
pub fn series_j0(x: f64) -> f64 {
    let q = -x * x / 4.0;
    let mut term = 1.0f64;
    let mut sum = 1.0;
    let mut k = 0.0;
    while term.abs() > 1e-18 {
        k += 1.0;
        term *= q / (k * k);
        sum += term;
    }
    sum
}

/// Bisection for a sign change of `f` on `[a, b]`.
pub fn bisect(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let fa = f(a);
    assert!(fa * f(b) < 0.0, "no sign change on [{a}, {b}]");
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if f(m) * fa > 0.0 {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// Absolute tolerance for values of order one, relative for large ones.
pub fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * b.abs().max(1.0)
}

pub fn j_prime(l: i32, x: f64) -> f64 {
    0.5 * (oracle_j(l - 1, x) - oracle_j(l + 1, x))
}

pub fn k_prime(l: i32, x: f64) -> f64 {
    -0.5 * (oracle_k(l - 1, x) + oracle_k(l + 1, x))
}

pub fn first_sign_change(f: impl Fn(f64) -> f64, lo: f64, hi: f64, n: usize) -> f64 {
    let mut prev = (lo, f(lo));
    for i in 1..=n {
        let x = lo + (hi - lo) * i as f64 / n as f64;
        let v = f(x);
        if v.signum() != prev.1.signum() {
            return bisect(&f, prev.0, x);
        }
        prev = (x, v);
    }
    panic!("no sign change on [{lo}, {hi}]");
}

/// Exact guided mode of the step-index fiber, one harmonic.
pub struct FiberMode {
    m_set: Vec<i64>,
    l: i32,
    k1: f64,
    beta: f64,
    rho: f64,
    radius: f64,
}

impl FiberMode {
    pub fn new(l: i32, kappa: f64, eps1: f64, rho: f64, radius: f64) -> (Self, f64) {
        let f = |w: f64| {
            let k1 = (eps1 * w * w - kappa * kappa).sqrt();
            let b = (kappa * kappa - w * w).sqrt();
            k1 * j_prime(l, k1 * rho) * oracle_k(l, b * rho) - b * k_prime(l, b * rho) * oracle_j(l, k1 * rho)
        };
        let w = first_sign_change(f, kappa / eps1.sqrt() * (1.0 + 1e-9), kappa * (1.0 - 1e-6), 400);
        let k1 = (eps1 * w * w - kappa * kappa).sqrt();
        let beta = (kappa * kappa - w * w).sqrt();
        (Self { m_set: vec![0], l, k1, beta, rho, radius }, w)
    }
}

impl RadialField for FiberMode {
    fn m_set(&self) -> &[i64] {
        &self.m_set
    }

    fn value(&self, _m: i64, r: f64) -> C64 {
        let v = if r <= self.rho {
            oracle_j(self.l, self.k1 * r) / oracle_j(self.l, self.k1 * self.rho)
        } else {
            oracle_k(self.l, self.beta * r) / oracle_k(self.l, self.beta * self.rho)
        };
        C64::new(v, 0.0)
    }

    fn derivative(&self, _m: i64, r: f64) -> C64 {
        let v = if r <= self.rho {
            self.k1 * j_prime(self.l, self.k1 * r) / oracle_j(self.l, self.k1 * self.rho)
        } else {
            self.beta * k_prime(self.l, self.beta * r) / oracle_k(self.l, self.beta * self.rho)
        };
        C64::new(v, 0.0)
    }

    fn boundary_derivative(&self, m: i64) -> C64 {
        self.derivative(m, self.radius)
    }
}
