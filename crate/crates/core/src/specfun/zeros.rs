use crate::error::{PillarError, Result};
use crate::scalar::Real;
use crate::specfun::cylindrical::{bessel_j, bessel_j_pair};

/// The first positive zeros `j_{ℓ,1} < j_{ℓ,2} < …` of `J_ℓ`.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderedZeroTable<T> {
    pub order: u32,
    pub zeros: Vec<T>,
}

impl<T: Real> OrderedZeroTable<T> {
    pub fn len(&self) -> usize {
        self.zeros.len()
    }

    pub fn is_empty(&self) -> bool {
        self.zeros.is_empty()
    }

    /// The k-th zero, 1-based as in `j_{ℓ,k}`.
    pub fn get(&self, k: usize) -> Option<T> {
        k.checked_sub(1).and_then(|i| self.zeros.get(i).copied())
    }
}

const SCAN_STEP: f64 = 0.25;

/// First `count` positive zeros of `J_order`, each bracketed by a sign change
/// on a fixed scan grid and refined by bisection with a Newton polish.
pub fn j_zeros<T: Real>(order: u32, count: usize) -> Result<OrderedZeroTable<T>> {
    if count == 0 {
        return Err(PillarError::domain("j_zeros", "count must be at least 1"));
    }
    let n = order as i32;
    let step = T::lit(SCAN_STEP);
    // zeros of J_ℓ lie beyond ℓ; J_ℓ(ℓ) > 0
    let mut a = T::from_int(order as i64).max(T::lit(0.5));
    let mut fa = bessel_j(n, a)?;
    let mut zeros = Vec::with_capacity(count);
    while zeros.len() < count {
        let b = a + step;
        let fb = bessel_j(n, b)?;
        if fb == T::zero() {
            zeros.push(b);
            a = b + step * T::lit(0.5);
            fa = bessel_j(n, a)?;
            continue;
        }
        if fa.signum() != fb.signum() {
            zeros.push(refine(n, a, b, fa)?);
        }
        a = b;
        fa = fb;
    }
    Ok(OrderedZeroTable { order, zeros })
}

fn refine<T: Real>(n: i32, mut lo: T, mut hi: T, flo: T) -> Result<T> {
    let sign_lo = flo.signum();
    for _ in 0..200 {
        let mid = (lo + hi) / T::lit(2.0);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = bessel_j(n, mid)?;
        if fm == T::zero() {
            return Ok(mid);
        }
        if fm.signum() == sign_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut x = (lo + hi) / T::lit(2.0);
    for _ in 0..2 {
        let (f, df) = bessel_j_pair(n, x)?;
        if df == T::zero() {
            break;
        }
        let next = x - f / df;
        if next > lo - (hi - lo) && next < hi + (hi - lo) {
            x = next;
        }
    }
    Ok(x)
}
