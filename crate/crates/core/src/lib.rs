pub mod assembly;
pub mod certify;
pub mod error;
pub mod harmonics;
pub mod linalg;
pub mod medium;
pub mod modes;
pub mod quadrature;
pub mod scatter;
pub mod scalar;
pub mod specfun;

pub use error::{PillarError, Result};
pub use scalar::Real;

/// Working precision of the solver layers.
pub type Real64 = f64;
/// Complex scalar of the assembled systems.
pub type C64 = num_complex::Complex<f64>;
