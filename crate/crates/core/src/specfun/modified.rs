//! Modified Bessel functions `I_n`, `K_n` for integer order.

use crate::error::{PillarError, Result};
use crate::scalar::Real;

/// Crossover between the small-argument series for `K` and Steed's
/// continued fraction.
const K_SERIES_CUTOFF: f64 = 2.0;

fn i_series<T: Real>(n: u32, x: T) -> T {
    let half = x / T::lit(2.0);
    let mut term = T::one();
    for k in 1..=n {
        term = term * half / T::from_int(k as i64);
    }
    let q = half * half;
    let mut sum = term;
    let mut k = 0i64;
    loop {
        k += 1;
        term = term * q / (T::from_int(k) * T::from_int(k + n as i64));
        sum = sum + term;
        if term <= T::epsilon() * sum * T::lit(0.25) || k > 4000 {
            break;
        }
    }
    sum
}

/// Modified Bessel function of the first kind `I_n(x)`, `x >= 0`.
pub fn bessel_i<T: Real>(order: i32, x: T) -> Result<T> {
    if !x.is_finite() || x < T::zero() {
        return Err(PillarError::domain(
            "bessel_i",
            format!("argument must be finite and non-negative, got {x}"),
        ));
    }
    let n = order.unsigned_abs();
    if x == T::zero() {
        return Ok(if n == 0 { T::one() } else { T::zero() });
    }
    Ok(i_series(n, x))
}

/// `(I_n(x), I_n'(x))`.
pub fn bessel_i_pair<T: Real>(order: i32, x: T) -> Result<(T, T)> {
    let i = bessel_i(order, x)?;
    let im1 = bessel_i(order - 1, x)?;
    let ip1 = bessel_i(order + 1, x)?;
    Ok((i, (im1 + ip1) / T::lit(2.0)))
}

/// `(K_0(x), K_1(x))` for `x > 0`.
fn k01<T: Real>(x: T) -> (T, T) {
    if x <= T::lit(K_SERIES_CUTOFF) {
        k01_series(x)
    } else {
        k01_steed(x)
    }
}

fn k01_series<T: Real>(x: T) -> (T, T) {
    let half = x / T::lit(2.0);
    let q = half * half;
    let ln_half = half.ln();
    let gamma = T::lit(T::EULER_GAMMA);
    let i0 = i_series(0, x);
    let i1 = i_series(1, x);

    // K0 = -ln(x/2) I0 + Σ ψ(k+1) q^k / (k!)^2
    // K1 = 1/x + ln(x/2) I1 - (x/4) Σ [ψ(k+1) + ψ(k+2)] q^k / (k! (k+1)!)
    let mut psi_k1 = -gamma; // ψ(k+1)
    let mut t0 = T::one(); // q^k / (k!)^2
    let mut t1 = T::one(); // q^k / (k! (k+1)!)
    let mut s0 = psi_k1 * t0;
    let mut s1 = (psi_k1 + psi_k1 + T::one()) * t1;
    let mut k = 0i64;
    loop {
        k += 1;
        let kf = T::from_int(k);
        psi_k1 = psi_k1 + T::one() / kf;
        t0 = t0 * q / (kf * kf);
        t1 = t1 * q / (kf * (kf + T::one()));
        let psi_k2 = psi_k1 + T::one() / (kf + T::one());
        let d0 = psi_k1 * t0;
        let d1 = (psi_k1 + psi_k2) * t1;
        s0 = s0 + d0;
        s1 = s1 + d1;
        if (d0.abs() <= T::epsilon() * s0.abs() && d1.abs() <= T::epsilon() * s1.abs()) || k > 200 {
            break;
        }
    }
    let k0 = -ln_half * i0 + s0;
    let k1 = T::one() / x + ln_half * i1 - x / T::lit(4.0) * s1;
    (k0, k1)
}

/// Steed's continued fraction (CF2) for order zero, yielding `K_0` and `K_1`.
fn k01_steed<T: Real>(x: T) -> (T, T) {
    let two = T::lit(2.0);
    let a1 = T::lit(0.25);
    let mut b = two * (T::one() + x);
    let mut d = T::one() / b;
    let mut delh = d;
    let mut h = d;
    let mut q1 = T::zero();
    let mut q2 = T::one();
    let mut q = a1;
    let mut c = a1;
    let mut a = -a1;
    let mut s = T::one() + q * delh;
    for i in 2..20_000i64 {
        a = a - T::from_int(2 * (i - 1));
        c = -a * c / T::from_int(i);
        let qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q = q + c * qnew;
        b = b + two;
        d = T::one() / (b + a * d);
        delh = (b * d - T::one()) * delh;
        h = h + delh;
        let dels = q * delh;
        s = s + dels;
        if (dels / s).abs() < T::epsilon() {
            break;
        }
    }
    h = a1 * h;
    let k0 = (T::PI() / (two * x)).sqrt() * (-x).exp() / s;
    let k1 = k0 * (x + T::lit(0.5) - h) / x;
    (k0, k1)
}

/// `K_0(x) ..= K_nmax(x)` by upward recurrence, stable for `K`.
pub(crate) fn k_sequence<T: Real>(nmax: usize, x: T) -> Vec<T> {
    let (k0, k1) = k01(x);
    let mut ks = Vec::with_capacity(nmax + 2);
    ks.push(k0);
    ks.push(k1);
    for k in 1..nmax {
        let next = ks[k - 1] + T::from_int(2 * k as i64) / x * ks[k];
        ks.push(next);
    }
    ks.truncate(nmax + 1);
    ks
}

/// Modified Bessel function of the second kind `K_n(x)`, `x > 0`.
pub fn bessel_k<T: Real>(order: i32, x: T) -> Result<T> {
    if !x.is_finite() || x <= T::zero() {
        return Err(PillarError::domain(
            "bessel_k",
            format!("argument must be finite and positive, got {x}"),
        ));
    }
    let n = order.unsigned_abs() as usize;
    Ok(k_sequence(n, x)[n])
}

/// `(K_n(x), K_n'(x))`.
pub fn bessel_k_pair<T: Real>(order: i32, x: T) -> Result<(T, T)> {
    let n = order.unsigned_abs() as usize;
    if !x.is_finite() || x <= T::zero() {
        return Err(PillarError::domain(
            "bessel_k",
            format!("argument must be finite and positive, got {x}"),
        ));
    }
    let ks = k_sequence(n + 1, x);
    let dk = if n == 0 {
        -ks[1]
    } else {
        -(ks[n - 1] + ks[n + 1]) / T::lit(2.0)
    };
    Ok((ks[n], dk))
}
