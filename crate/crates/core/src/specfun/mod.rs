//! Bessel-family special functions for integer orders.
//!
//! Everything here is a pure function of its arguments and generic over
//! [`Real`](crate::Real). Accuracy targets are absolute `1e-10` or better on
//! `|x| <= 50`, orders up to 20, in `f64`.

mod cylindrical;
mod modified;
mod zeros;

pub use cylindrical::{bessel_j, bessel_j_pair, bessel_y, bessel_y_pair, hankel1, hankel1_pair};
pub use modified::{bessel_i, bessel_i_pair, bessel_k, bessel_k_pair};
pub use zeros::{j_zeros, OrderedZeroTable};
