use nalgebra::{DMatrix, DVector, QR};

use super::SolveReport;
use crate::error::{Error, Result};
use crate::scalar::prelude::*;

/// Numerical rank cut: singular values below `RANK_TOL * sigma_max` count as zero.
pub const RANK_TOL: f64 = 1e-10;

/// Householder QR factorization of a tall matrix with full column rank.
#[derive(Debug, Clone)]
pub struct LeastSquares<S: Scalar> {
    qr: QR<S, nalgebra::Dyn, nalgebra::Dyn>,
    r: DMatrix<S>,
    rows: usize,
    cols: usize,
}

impl<S: Scalar> LeastSquares<S> {
    /// Factorizes `m`; fails with [`Error::Singular`] when its numerical rank is
    /// below its column count.
    pub fn new(m: &DMatrix<S>) -> Result<Self> {
        let (rows, cols) = m.shape();
        if cols > rows {
            return Err(Error::Singular(format!(
                "{cols} columns cannot be independent in dimension {rows}"
            )));
        }
        let qr = m.clone().qr();
        let r = qr.r();
        if cols > 0 {
            let sv = r.singular_values();
            let smax = sv.max();
            let smin = sv.min();
            if !(smin > lit::<RealOf<S>>(RANK_TOL) * smax) {
                return Err(Error::Singular(format!(
                    "smallest singular value {smin:e} vs largest {smax:e}"
                )));
            }
        }
        Ok(Self { qr, r, rows, cols })
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Minimizer of `||M s - z||_2`.
    pub fn solve(&self, z: &DVector<S>) -> Result<DVector<S>> {
        if z.len() != self.rows {
            return Err(Error::Dimension(format!(
                "right-hand side of length {} for {} rows",
                z.len(),
                self.rows
            )));
        }
        if self.cols == 0 {
            return Ok(DVector::zeros(0));
        }
        let mut y = z.clone();
        self.qr.q_tr_mul(&mut y);
        let head = y.rows(0, self.cols).into_owned();
        self.r
            .solve_upper_triangular(&head)
            .ok_or_else(|| Error::Singular("zero pivot in back-substitution".into()))
    }

    /// Minimum-norm solution `y` of the underdetermined system `M^H y = s`.
    pub fn solve_adjoint(&self, s: &DVector<S>) -> Result<DVector<S>> {
        if s.len() != self.cols {
            return Err(Error::Dimension(format!(
                "right-hand side of length {} for {} columns",
                s.len(),
                self.cols
            )));
        }
        // M = Q R, so M^H y = R^H Q^H y = s; take y = Q R^{-H} s.
        let w = self
            .r
            .ad_solve_upper_triangular(s)
            .ok_or_else(|| Error::Singular("zero pivot in back-substitution".into()))?;
        Ok(self.qr.q() * w)
    }
}

/// Least-squares solution `D^+ z` for a matrix with full column rank.
pub fn pinv_solve<S: Scalar>(d: &DMatrix<S>, z: &DVector<S>) -> Result<SolveReport<S>> {
    let ls = LeastSquares::new(d)?;
    let solution = ls.solve(z)?;
    let residual_norm = (d * &solution - z).norm();
    Ok(SolveReport {
        solution,
        residual_norm,
        iterations: 1,
        converged: true,
        duality_gap: None,
    })
}
