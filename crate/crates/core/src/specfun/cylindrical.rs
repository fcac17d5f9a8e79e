//! Bessel functions of the first and second kind and the Hankel function
//! `H¹ = J + iY`, integer orders only.

use num_complex::Complex;

use crate::error::{PillarError, Result};
use crate::scalar::Real;
use crate::specfun::modified::bessel_k_pair;

/// Below this argument the power series is summed directly; above it the
/// sequence comes from normalized backward recurrence.
const SERIES_CUTOFF: f64 = 5.0;

fn check_finite<T: Real>(function: &'static str, x: T) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(PillarError::domain(function, format!("non-finite argument {x}")))
    }
}

#[inline]
fn parity_sign<T: Real>(n: i32) -> T {
    if n % 2 == 0 {
        T::one()
    } else {
        -T::one()
    }
}

/// Power series for `J_n(x)`, `n >= 0`.
fn j_series<T: Real>(n: u32, x: T) -> T {
    let half = x / T::lit(2.0);
    let mut term = T::one();
    for k in 1..=n {
        term = term * half / T::from_int(k as i64);
    }
    let q = -half * half;
    let mut sum = term;
    let mut k = 0i64;
    loop {
        k += 1;
        term = term * q / (T::from_int(k) * T::from_int(k + n as i64));
        sum = sum + term;
        if term.abs() <= T::epsilon() * sum.abs() * T::lit(0.25) || term == T::zero() {
            break;
        }
        if k > 500 {
            break;
        }
    }
    sum
}

/// `J_0(x) ..= J_nmax(x)` for `x > 0`.
///
/// Uses the series below [`SERIES_CUTOFF`] and Miller's backward recurrence
/// normalized by `J_0 + 2 Σ J_{2k} = 1` above it.
pub(crate) fn j_sequence<T: Real>(nmax: usize, x: T) -> Vec<T> {
    debug_assert!(x > T::zero());
    if x < T::lit(SERIES_CUTOFF) {
        return (0..=nmax).map(|n| j_series(n as u32, x)).collect();
    }
    let xf = x.to_f64_lossy();
    let top = (nmax as f64).max(xf.ceil());
    let mut start = (top + (160.0 * top).sqrt() + 20.0) as usize;
    start += start % 2;
    let mut seq = vec![T::zero(); start + 2];
    let two_over_x = T::lit(2.0) / x;
    let big = T::rescale_threshold();
    let mut next = T::zero();
    let mut cur = T::lit(1e-30);
    seq[start] = cur;
    for k in (1..=start).rev() {
        let prev = T::from_int(k as i64) * two_over_x * cur - next;
        next = cur;
        cur = prev;
        seq[k - 1] = cur;
        if cur.abs() > big {
            let inv = T::one() / big;
            for v in seq[k - 1..=start].iter_mut() {
                *v = *v * inv;
            }
            cur = cur * inv;
            next = next * inv;
        }
    }
    let mut norm = seq[0];
    let mut k = 2;
    while k <= start {
        norm = norm + T::lit(2.0) * seq[k];
        k += 2;
    }
    seq.truncate(nmax + 1);
    for v in seq.iter_mut() {
        *v = *v / norm;
    }
    seq
}

/// Bessel function of the first kind `J_n(x)`.
pub fn bessel_j<T: Real>(order: i32, x: T) -> Result<T> {
    check_finite("bessel_j", x)?;
    let n = order.unsigned_abs();
    if x == T::zero() {
        return Ok(if n == 0 { T::one() } else { T::zero() });
    }
    let mut value = if x.abs() < T::lit(SERIES_CUTOFF) {
        j_series(n, x.abs())
    } else {
        j_sequence(n as usize, x.abs())[n as usize]
    };
    if order < 0 {
        value = value * parity_sign::<T>(order);
    }
    if x < T::zero() {
        value = value * parity_sign::<T>(n as i32);
    }
    Ok(value)
}

/// `(J_n(x), J_n'(x))`.
pub fn bessel_j_pair<T: Real>(order: i32, x: T) -> Result<(T, T)> {
    let jm1 = bessel_j(order - 1, x)?;
    let jp1 = bessel_j(order + 1, x)?;
    let j = bessel_j(order, x)?;
    Ok((j, (jm1 - jp1) / T::lit(2.0)))
}

/// `Y_0(x) ..= Y_nmax(x)` for `x > 0`, from the Neumann expansions of `Y_0`
/// and `Y_1` in even/odd `J_k` followed by upward recurrence.
fn y_sequence<T: Real>(nmax: usize, x: T) -> Vec<T> {
    let xf = x.to_f64_lossy();
    let kmax = (xf + 40.0 + 8.0 * xf.cbrt()).ceil() as usize;
    let js = j_sequence(2 * kmax + 2, x);
    let log_term = (x / T::lit(2.0)).ln() + T::lit(T::EULER_GAMMA);
    let two_over_pi = T::lit(2.0) / T::PI();

    let mut s0 = T::zero();
    let mut s1 = T::zero();
    for k in (1..=kmax).rev() {
        let kf = T::from_int(k as i64);
        let sign = parity_sign::<T>(k as i32);
        // Y0: + 2 Σ (-1)^{k+1} J_{2k} / k
        s0 = s0 - sign * js[2 * k] / kf;
        // Y1: Σ (-1)^k (J_{2k-1} - J_{2k+1}) / k
        s1 = s1 + sign * (js[2 * k - 1] - js[2 * k + 1]) / kf;
    }
    let y0 = two_over_pi * (log_term * js[0] + T::lit(2.0) * s0);
    let y1 = two_over_pi * (log_term * js[1] - js[0] / x + s1);

    let mut ys = Vec::with_capacity(nmax + 1);
    ys.push(y0);
    if nmax >= 1 {
        ys.push(y1);
    }
    for k in 1..nmax {
        let next = T::from_int(2 * k as i64) / x * ys[k] - ys[k - 1];
        ys.push(next);
    }
    ys
}

/// Bessel function of the second kind `Y_n(x)`, `x > 0`.
pub fn bessel_y<T: Real>(order: i32, x: T) -> Result<T> {
    check_finite("bessel_y", x)?;
    if x <= T::zero() {
        return Err(PillarError::domain(
            "bessel_y",
            format!("argument must be positive, got {x}"),
        ));
    }
    let n = order.unsigned_abs() as usize;
    let v = y_sequence(n, x)[n];
    Ok(if order < 0 { v * parity_sign::<T>(order) } else { v })
}

/// `(Y_n(x), Y_n'(x))`.
pub fn bessel_y_pair<T: Real>(order: i32, x: T) -> Result<(T, T)> {
    let ym1 = bessel_y(order - 1, x)?;
    let yp1 = bessel_y(order + 1, x)?;
    let y = bessel_y(order, x)?;
    Ok((y, (ym1 - yp1) / T::lit(2.0)))
}

/// `i^{-n}` for integer `n`.
fn i_pow_neg<T: Real>(n: i32) -> Complex<T> {
    match n.rem_euclid(4) {
        0 => Complex::new(T::one(), T::zero()),
        1 => Complex::new(T::zero(), -T::one()),
        2 => Complex::new(-T::one(), T::zero()),
        _ => Complex::new(T::zero(), T::one()),
    }
}

/// Hankel function of the first kind and its derivative, `(H¹_n(z), H¹_n'(z))`.
///
/// Only the arguments the solver produces are accepted: `z` real positive,
/// or purely imaginary with positive imaginary part. The latter goes through
/// `H¹_n(iy) = (2 / iπ) i^{-n} K_n(y)`, which keeps the decaying branch free
/// of cancellation.
pub fn hankel1_pair<T: Real>(order: i32, z: Complex<T>) -> Result<(Complex<T>, Complex<T>)> {
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(PillarError::domain("hankel1", format!("non-finite argument {z}")));
    }
    if z.re == T::zero() && z.im == T::zero() {
        return Err(PillarError::Singularity {
            function: "hankel1",
            argument: format!("{z}"),
        });
    }
    if z.im == T::zero() && z.re > T::zero() {
        let x = z.re;
        let (j, dj) = bessel_j_pair(order, x)?;
        let (y, dy) = bessel_y_pair(order, x)?;
        return Ok((Complex::new(j, y), Complex::new(dj, dy)));
    }
    if z.re == T::zero() && z.im > T::zero() {
        let y = z.im;
        let (k, dk) = bessel_k_pair(order, y)?;
        let phase = i_pow_neg::<T>(order);
        let two_over_pi = T::lit(2.0) / T::PI();
        // 2/(iπ) = -2i/π
        let h = phase * Complex::new(T::zero(), -two_over_pi) * k;
        let dh = phase * Complex::new(-two_over_pi, T::zero()) * dk;
        return Ok((h, dh));
    }
    Err(PillarError::domain(
        "hankel1",
        format!("argument {z} is neither positive real nor positive imaginary"),
    ))
}

/// Hankel function of the first kind `H¹_n(z)`.
pub fn hankel1<T: Real>(order: i32, z: Complex<T>) -> Result<Complex<T>> {
    Ok(hankel1_pair(order, z)?.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn origin_values() {
        assert_eq!(bessel_j(0, 0.0f64).unwrap(), 1.0);
        assert_eq!(bessel_j(1, 0.0f64).unwrap(), 0.0);
        assert_eq!(bessel_j(-3, 0.0f64).unwrap(), 0.0);
    }

    #[test]
    fn j0_at_one() {
        let v = bessel_j(0, 1.0f64).unwrap();
        assert!((v - 0.765_197_686_557_966_6).abs() < 1e-15);
    }

    #[test]
    fn negative_order_and_argument() {
        for n in 0..6 {
            let p = bessel_j(n, 3.7f64).unwrap();
            let m = bessel_j(-n, 3.7f64).unwrap();
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            assert!((m - sign * p).abs() < 1e-15);
            let neg = bessel_j(n, -3.7f64).unwrap();
            assert!((neg - sign * p).abs() < 1e-15);
        }
    }

    #[test]
    fn series_and_recurrence_agree_at_cutoff() {
        for n in 0..12u32 {
            let a = j_series(n, 5.0f64);
            let b = j_sequence(n as usize, 5.0f64)[n as usize];
            assert!((a - b).abs() < 1e-14, "n = {n}: {a} vs {b}");
        }
    }

    #[test]
    fn non_finite_is_domain_error() {
        assert!(matches!(
            bessel_j(0, f64::NAN),
            Err(PillarError::Domain { .. })
        ));
        assert!(bessel_y(0, 0.0f64).is_err());
    }

    #[test]
    fn hankel_at_one() {
        let h = hankel1(0, Complex::new(1.0f64, 0.0)).unwrap();
        assert!((h.re - 0.765_197_686_557_966_6).abs() < 1e-14);
        assert!((h.im - 0.088_256_964_215_676_96).abs() < 1e-14);
    }

    #[test]
    fn hankel_zero_is_singular() {
        assert!(matches!(
            hankel1(0, Complex::new(0.0f64, 0.0)),
            Err(PillarError::Singularity { .. })
        ));
        assert!(hankel1(0, Complex::new(-1.0f64, 0.0)).is_err());
    }

    #[test]
    fn imaginary_branch_decays() {
        let a = hankel1(0, Complex::new(0.0f64, 5.0)).unwrap().norm();
        let b = hankel1(0, Complex::new(0.0f64, 10.0)).unwrap().norm();
        assert!(b < a);
    }

    #[test]
    fn single_precision_smoke() {
        let v = bessel_j(0, 1.0f32).unwrap();
        assert!((v - 0.765_197_7).abs() < 1e-6);
    }
}
