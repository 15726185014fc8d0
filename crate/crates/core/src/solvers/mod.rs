//! Least squares, greedy and convex sparse solvers, and exhaustive search.

mod bp;
mod lstsq;
mod omp;
mod p0;

pub use bp::{
    basis_pursuit, solve_bp, AffineConstraint, BpOptions, DenseConstraint, TightConstraint,
};
pub use lstsq::{pinv_solve, LeastSquares, RANK_TOL};
pub use omp::{omp, omp_path, OMP_STOP_TOL, OMP_TIE_TOL};
pub use p0::{
    binomial, brute_force_p0, brute_force_p0_ne, P0Solution, P0neSolution, SEARCH_LIMIT,
};

use nalgebra::DVector;

use crate::scalar::RealOf;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport<S: Scalar> {
    pub solution: DVector<S>,
    /// `||D s - z||_2` for the returned solution.
    pub residual_norm: RealOf<S>,
    pub iterations: usize,
    pub converged: bool,
    /// Relative duality gap of the returned point, for solvers that certify optimality.
    pub duality_gap: Option<RealOf<S>>,
}
