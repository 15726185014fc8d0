//! Dictionaries (matrices with unit-norm columns) and their coherence parameters.

mod builders;
mod etf;
mod io;

pub use builders::{build_dct2d, build_dft, build_haar2d, build_hadamard, build_identity};
pub use etf::{build_etf_approx, welch_bound, EtfOptions};
pub use io::{read_matrix, read_matrix_file, write_matrix, write_matrix_file};

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::scalar::prelude::*;

/// Columns whose Euclidean norm falls below this cannot be renormalized.
pub const ZERO_COLUMN_TOL: f64 = 1e-14;

/// A dense `M x N` dictionary whose columns have unit Euclidean norm.
///
/// Columns are renormalized on construction. A dictionary may carry a frame
/// bound `c` recording that `D D^H = c I` holds by construction (orthonormal
/// bases have `c = 1`); solvers use it to avoid factorizing `D D^H`.
#[derive(Debug, Clone)]
pub struct Dictionary<S: Scalar> {
    entries: DMatrix<S>,
    label: String,
    frame_bound: Option<RealOf<S>>,
}

impl<S: Scalar> Dictionary<S> {
    pub fn new(mut entries: DMatrix<S>, label: impl Into<String>) -> Result<Self> {
        let (rows, cols) = entries.shape();
        if rows == 0 || cols == 0 {
            return Err(Error::Dimension(format!(
                "dictionary must be at least 1x1, got {rows}x{cols}"
            )));
        }
        for col in 0..cols {
            for row in 0..rows {
                if !entries[(row, col)].is_finite() {
                    return Err(Error::NonFinite { row, col });
                }
            }
        }
        let zero_tol: RealOf<S> = lit(ZERO_COLUMN_TOL);
        for (j, mut column) in entries.column_iter_mut().enumerate() {
            let norm = column.norm();
            if norm < zero_tol {
                return Err(Error::ZeroColumn { column: j });
            }
            if norm != RealOf::<S>::one() {
                column.unscale_mut(norm);
            }
        }
        Ok(Self {
            entries,
            label: label.into(),
            frame_bound: None,
        })
    }

    /// Marks the dictionary as satisfying `D D^H = c I`. Only builders that
    /// guarantee this by construction call it.
    pub(crate) fn with_frame_bound(mut self, c: RealOf<S>) -> Self {
        self.frame_bound = Some(c);
        self
    }

    pub fn rows(&self) -> usize {
        self.entries.nrows()
    }

    pub fn cols(&self) -> usize {
        self.entries.ncols()
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn matrix(&self) -> &DMatrix<S> {
        &self.entries
    }

    pub fn into_matrix(self) -> DMatrix<S> {
        self.entries
    }

    /// `Some(c)` when `D D^H = c I` is known to hold exactly.
    pub fn frame_bound(&self) -> Option<RealOf<S>> {
        self.frame_bound
    }

    /// True when the dictionary is a square orthonormal basis by construction.
    pub fn is_orthonormal_basis(&self) -> bool {
        self.rows() == self.cols() && self.frame_bound == Some(RealOf::<S>::one())
    }

    pub fn column(&self, j: usize) -> DVector<S> {
        self.entries.column(j).into_owned()
    }

    /// Sub-matrix made of the listed columns, in the given order.
    pub fn select_columns(&self, indices: &[usize]) -> DMatrix<S> {
        self.entries.select_columns(indices)
    }

    /// Computes `D x`.
    pub fn apply(&self, x: &DVector<S>) -> Result<DVector<S>> {
        if x.len() != self.cols() {
            return Err(Error::Dimension(format!(
                "vector of length {} applied to a dictionary with {} columns",
                x.len(),
                self.cols()
            )));
        }
        Ok(&self.entries * x)
    }

    /// Computes `D^H y`.
    pub fn apply_adjoint(&self, y: &DVector<S>) -> Result<DVector<S>> {
        if y.len() != self.rows() {
            return Err(Error::Dimension(format!(
                "vector of length {} applied to the adjoint of a dictionary with {} rows",
                y.len(),
                self.rows()
            )));
        }
        Ok(self.entries.ad_mul(y))
    }

    pub fn gram(&self) -> DMatrix<S> {
        self.entries.ad_mul(&self.entries)
    }

    /// Largest deviation of a column norm from one.
    pub fn max_column_norm_deviation(&self) -> RealOf<S> {
        self.entries
            .column_iter()
            .map(|c| (c.norm() - RealOf::<S>::one()).abs())
            .fold(RealOf::<S>::zero(), |a, b| a.max(b))
    }
}

/// Coherence parameters of a dictionary pair `(A, B)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoherenceProfile<T> {
    /// Coherence of `A`.
    pub mu_a: T,
    /// Coherence of `B`.
    pub mu_b: T,
    /// Mutual coherence between `A` and `B`.
    pub mu_m: T,
    /// Coherence of the concatenation `[A B]`.
    pub mu_d: T,
}

impl<T: Real> CoherenceProfile<T> {
    /// Profile with `mu_d = max(mu_a, mu_b, mu_m)`, the value obtained for a concatenation.
    pub fn new(mu_a: T, mu_b: T, mu_m: T) -> Result<Self> {
        let mu_d = mu_a.max(mu_b).max(mu_m);
        Self::with_mu_d(mu_a, mu_b, mu_m, mu_d)
    }

    pub fn with_mu_d(mu_a: T, mu_b: T, mu_m: T, mu_d: T) -> Result<Self> {
        let slack: T = lit(1e-12);
        for (name, v) in [("mu_a", mu_a), ("mu_b", mu_b), ("mu_m", mu_m), ("mu_d", mu_d)] {
            if !(v >= T::zero() && v <= T::one() + slack) {
                return Err(Error::InvalidArgument(format!(
                    "{name} = {v} is outside [0, 1]"
                )));
            }
        }
        if mu_d < mu_a.max(mu_b).max(mu_m) - slack {
            return Err(Error::InvalidArgument(format!(
                "mu_d = {mu_d} is smaller than max(mu_a, mu_b, mu_m)"
            )));
        }
        Ok(Self {
            mu_a,
            mu_b,
            mu_m,
            mu_d,
        })
    }

    /// The same profile with the roles of `A` and `B` exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            mu_a: self.mu_b,
            mu_b: self.mu_a,
            mu_m: self.mu_m,
            mu_d: self.mu_d,
        }
    }
}

/// `|a_k^H b_l|` accumulated in a fixed order, so that every coherence routine
/// sees bit-identical values for the same pair of columns.
fn inner_modulus<S: Scalar>(a: &DMatrix<S>, k: usize, b: &DMatrix<S>, l: usize) -> RealOf<S> {
    let ca = a.column(k);
    let cb = b.column(l);
    let mut acc = S::zero();
    for i in 0..ca.len() {
        acc += ca[i].conjugate() * cb[i];
    }
    acc.modulus()
}

fn max_off_diagonal<S: Scalar>(m: &DMatrix<S>) -> RealOf<S> {
    let n = m.ncols();
    let mut best = RealOf::<S>::zero();
    for k in 0..n {
        for l in (k + 1)..n {
            best = best.max(inner_modulus(m, k, m, l));
        }
    }
    best
}

/// Largest `|a_k^H a_l|` over distinct columns; zero for a single column.
pub fn coherence<S: Scalar>(a: &Dictionary<S>) -> RealOf<S> {
    max_off_diagonal(a.matrix())
}

/// Largest `|a_k^H b_l|` over all column pairs.
pub fn mutual_coherence<S: Scalar>(a: &Dictionary<S>, b: &Dictionary<S>) -> Result<RealOf<S>> {
    check_rows(a, b)?;
    let mut best = RealOf::<S>::zero();
    for k in 0..a.cols() {
        for l in 0..b.cols() {
            best = best.max(inner_modulus(a.matrix(), k, b.matrix(), l));
        }
    }
    Ok(best)
}

pub fn profile<S: Scalar>(
    a: &Dictionary<S>,
    b: &Dictionary<S>,
) -> Result<CoherenceProfile<RealOf<S>>> {
    let mu_m = mutual_coherence(a, b)?;
    CoherenceProfile::new(coherence(a), coherence(b), mu_m)
}

/// The concatenated dictionary `[A B]`.
pub fn concat<S: Scalar>(a: &Dictionary<S>, b: &Dictionary<S>) -> Result<Dictionary<S>> {
    check_rows(a, b)?;
    let (m, na, nb) = (a.rows(), a.cols(), b.cols());
    let mut entries = DMatrix::<S>::zeros(m, na + nb);
    entries.columns_mut(0, na).copy_from(a.matrix());
    entries.columns_mut(na, nb).copy_from(b.matrix());
    let frame_bound = match (a.frame_bound(), b.frame_bound()) {
        (Some(ca), Some(cb)) => Some(ca + cb),
        _ => None,
    };
    Ok(Dictionary {
        entries,
        label: format!("[{} {}]", a.label(), b.label()),
        frame_bound,
    })
}

fn check_rows<S: Scalar>(a: &Dictionary<S>, b: &Dictionary<S>) -> Result<()> {
    if a.rows() != b.rows() {
        return Err(Error::Dimension(format!(
            "dictionaries have {} and {} rows",
            a.rows(),
            b.rows()
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    #[test]
    fn zero_column_is_rejected() {
        let m = DMatrix::<f64>::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]);
        assert!(matches!(
            Dictionary::new(m, "z"),
            Err(Error::ZeroColumn { column: 1 })
        ));
    }

    #[test]
    fn columns_are_renormalized() {
        let m = DMatrix::<f64>::from_row_slice(2, 2, &[3.0, 1.0, 4.0, 1.0]);
        let d = Dictionary::new(m, "r").unwrap();
        assert!(d.max_column_norm_deviation() < 1e-12);
        assert!((d.matrix()[(0, 0)] - 0.6).abs() < 1e-15);
    }

    #[test]
    fn non_finite_is_rejected() {
        let m = DMatrix::<f64>::from_row_slice(1, 2, &[1.0, f64::NAN]);
        assert!(matches!(
            Dictionary::new(m, "n"),
            Err(Error::NonFinite { row: 0, col: 1 })
        ));
    }

    #[test]
    fn duplicated_column_has_unit_coherence() {
        let m = DMatrix::<Complex64>::from_fn(3, 2, |i, _| Complex64::new(i as f64 + 1.0, 0.5));
        let d = Dictionary::new(m, "dup").unwrap();
        assert!((coherence(&d) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn single_column_has_zero_coherence() {
        let m = DMatrix::<f64>::from_element(4, 1, 1.0);
        assert_eq!(coherence(&Dictionary::new(m, "one").unwrap()), 0.0);
    }

    #[test]
    fn row_mismatch_is_an_error() {
        let a = build_identity::<f64>(3).unwrap();
        let b = build_identity::<f64>(4).unwrap();
        assert!(matches!(mutual_coherence(&a, &b), Err(Error::Dimension(_))));
        assert!(concat(&a, &b).is_err());
        assert!(profile(&a, &b).is_err());
    }

    #[test]
    fn identity_pair_profile() {
        let a = build_identity::<Complex64>(4).unwrap();
        let p = profile(&a, &a).unwrap();
        assert_eq!((p.mu_a, p.mu_b, p.mu_m, p.mu_d), (0.0, 0.0, 1.0, 1.0));
    }

    #[test]
    fn concat_shapes_and_order() {
        let i2 = build_identity::<f64>(2).unwrap();
        let d = concat(&i2, &i2).unwrap();
        assert_eq!((d.rows(), d.cols()), (2, 4));
        assert_eq!(d.matrix()[(0, 2)], 1.0);
        assert_eq!(d.frame_bound(), Some(2.0));
        let f4 = build_dft::<Complex64>(4).unwrap();
        let i4 = build_identity::<Complex64>(4).unwrap();
        assert_eq!(concat(&f4, &i4).unwrap().cols(), 8);
    }

    #[test]
    fn profile_rejects_out_of_range_values() {
        assert!(CoherenceProfile::new(-0.1, 0.0, 0.1).is_err());
        assert!(CoherenceProfile::new(0.0, 0.0, 1.5).is_err());
        assert!(CoherenceProfile::with_mu_d(0.2, 0.0, 0.1, 0.1).is_err());
    }
}
