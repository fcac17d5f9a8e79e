//! Dense complex linear algebra on top of `faer`, run sequentially so that
//! results are bit-reproducible.

use faer::linalg::solvers::{PartialPivLu, Solve};
use faer::{Mat, MatRef, Side};

use crate::error::{PillarError, Result};
use crate::C64;

/// Eigenpairs of `A x = λ B x` with `A` Hermitian and `B` Hermitian positive
/// definite. Values ascend; vector columns are `B`-orthonormal.
#[derive(Debug, Clone)]
pub struct GeneralizedEigen {
    pub values: Vec<f64>,
    pub vectors: Mat<C64>,
}

/// Cholesky factor of `B` reused across pencils `(A(ω), B)`.
#[derive(Debug, Clone)]
pub struct CholeskyPencil {
    l: Mat<C64>,
}

impl CholeskyPencil {
    pub fn new(b: MatRef<'_, C64>) -> Result<Self> {
        let llt = b
            .llt(Side::Lower)
            .map_err(|e| PillarError::Linalg(format!("mass matrix is not positive definite: {e:?}")))?;
        Ok(Self { l: llt.L().to_owned() })
    }

    pub fn dim(&self) -> usize {
        self.l.nrows()
    }

    /// `L⁻¹ M`.
    pub fn left_solve(&self, m: MatRef<'_, C64>) -> Mat<C64> {
        let mut x = m.to_owned();
        self.l.as_ref().solve_lower_triangular_in_place(x.as_mut());
        x
    }

    /// `L⁻ᴴ M`.
    pub fn left_adjoint_solve(&self, m: MatRef<'_, C64>) -> Mat<C64> {
        let mut x = m.to_owned();
        self.l.as_ref().adjoint().solve_upper_triangular_in_place(x.as_mut());
        x
    }

    /// The standard-form matrix `C = L⁻¹ A L⁻ᴴ`, symmetrized.
    pub fn reduce(&self, a: MatRef<'_, C64>) -> Mat<C64> {
        let x = self.left_solve(a);
        let xh = x.adjoint().to_owned();
        let c = self.left_solve(xh.as_ref());
        hermitian_part(c.as_ref())
    }

    pub fn eigenvalues_of_reduced(&self, c: MatRef<'_, C64>) -> Result<Vec<f64>> {
        c.self_adjoint_eigenvalues(Side::Lower)
            .map_err(|e| PillarError::Linalg(format!("eigenvalue iteration failed: {e:?}")))
    }

    pub fn eigen_of_reduced(&self, c: MatRef<'_, C64>) -> Result<GeneralizedEigen> {
        let evd = c
            .self_adjoint_eigen(Side::Lower)
            .map_err(|e| PillarError::Linalg(format!("eigen decomposition failed: {e:?}")))?;
        let values = (0..c.nrows()).map(|i| evd.S()[i].re).collect();
        let vectors = self.left_adjoint_solve(evd.U());
        Ok(GeneralizedEigen { values, vectors })
    }
}

/// `(M + Mᴴ)/2`.
pub fn hermitian_part(m: MatRef<'_, C64>) -> Mat<C64> {
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| (m[(i, j)] + m[(j, i)].conj()) * 0.5)
}

pub fn generalized_eigen(a: MatRef<'_, C64>, b: MatRef<'_, C64>) -> Result<GeneralizedEigen> {
    let p = CholeskyPencil::new(b)?;
    let c = p.reduce(a);
    p.eigen_of_reduced(c.as_ref())
}

pub fn generalized_eigenvalues(a: MatRef<'_, C64>, b: MatRef<'_, C64>) -> Result<Vec<f64>> {
    let p = CholeskyPencil::new(b)?;
    let c = p.reduce(a);
    p.eigenvalues_of_reduced(c.as_ref())
}

/// `‖M‖_F`.
pub fn frobenius(m: MatRef<'_, C64>) -> f64 {
    let mut s = 0.0;
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            s += m[(i, j)].norm_sqr();
        }
    }
    s.sqrt()
}

pub fn matvec(m: MatRef<'_, C64>, x: &[C64]) -> Vec<C64> {
    assert_eq!(m.ncols(), x.len());
    let mut y = vec![C64::new(0.0, 0.0); m.nrows()];
    for (j, xj) in x.iter().enumerate() {
        if *xj == C64::new(0.0, 0.0) {
            continue;
        }
        for (i, yi) in y.iter_mut().enumerate() {
            *yi += m[(i, j)] * xj;
        }
    }
    y
}

pub fn norm2(x: &[C64]) -> f64 {
    x.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

fn column(x: &[C64]) -> Mat<C64> {
    Mat::from_fn(x.len(), 1, |i, _| x[i])
}

fn to_vec(m: MatRef<'_, C64>) -> Vec<C64> {
    (0..m.nrows()).map(|i| m[(i, 0)]).collect()
}

/// LU factorization with partial pivoting and a 1-norm condition estimate.
pub struct LuSystem {
    lu: PartialPivLu<C64>,
    norm1: f64,
    n: usize,
}

impl LuSystem {
    pub fn new(a: MatRef<'_, C64>) -> Self {
        let norm1 = (0..a.ncols())
            .map(|j| (0..a.nrows()).map(|i| a[(i, j)].norm()).sum::<f64>())
            .fold(0.0, f64::max);
        Self { lu: a.partial_piv_lu(), norm1, n: a.nrows() }
    }

    pub fn solve(&self, b: &[C64]) -> Vec<C64> {
        to_vec(self.lu.solve(column(b).as_ref()).as_ref())
    }

    pub fn solve_adjoint(&self, b: &[C64]) -> Vec<C64> {
        to_vec(self.lu.solve_adjoint(column(b).as_ref()).as_ref())
    }

    /// Estimate of `‖A‖₁ ‖A⁻¹‖₁` (Hager's method with Higham's refinements).
    /// Returns infinity when the factorization produced non-finite values.
    pub fn condition_estimate(&self) -> f64 {
        let n = self.n;
        if n == 0 {
            return 1.0;
        }
        let l1 = |v: &[C64]| v.iter().map(|c| c.norm()).sum::<f64>();
        let mut x = vec![C64::new(1.0 / n as f64, 0.0); n];
        let mut est = 0.0;
        let mut last_j = usize::MAX;
        for iter in 0..5 {
            let y = self.solve(&x);
            let ny = l1(&y);
            if !ny.is_finite() {
                return f64::INFINITY;
            }
            if iter > 0 && ny <= est {
                est = est.max(ny);
                break;
            }
            est = ny;
            let xi: Vec<C64> = y
                .iter()
                .map(|c| if c.norm() > 0.0 { c / c.norm() } else { C64::new(1.0, 0.0) })
                .collect();
            let z = self.solve_adjoint(&xi);
            let (j, zmax) = z
                .iter()
                .enumerate()
                .map(|(i, c)| (i, c.norm()))
                .fold((0, f64::NEG_INFINITY), |a, b| if b.1 > a.1 { b } else { a });
            let ztx: C64 = z.iter().zip(&x).map(|(a, b)| a.conj() * b).sum();
            if zmax <= ztx.re || j == last_j {
                break;
            }
            last_j = j;
            x = vec![C64::new(0.0, 0.0); n];
            x[j] = C64::new(1.0, 0.0);
        }
        // alternating test vector guards against the classic failure cases
        let alt: Vec<C64> = (0..n)
            .map(|i| {
                let s = if i % 2 == 0 { 1.0 } else { -1.0 };
                C64::new(s * (1.0 + i as f64 / (n.max(2) - 1) as f64), 0.0)
            })
            .collect();
        let alt_est = 2.0 * l1(&self.solve(&alt)) / (3.0 * n as f64);
        let est = est.max(alt_est);
        if est.is_finite() {
            self.norm1 * est
        } else {
            f64::INFINITY
        }
    }
}
