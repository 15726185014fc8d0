use nalgebra::{DMatrix, DVector};

use crate::dictionaries::Dictionary;
use crate::error::{Error, Result};
use crate::scalar::prelude::*;
use crate::solvers::LeastSquares;

/// Projected columns with norm at or below this are treated as annihilated.
pub const DEGENERATE_TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
enum Basis<S: Scalar> {
    /// The known columns are distinct unit coordinate vectors (up to a phase);
    /// the projector zeroes these rows.
    Coordinates(Vec<usize>),
    /// Orthonormal basis of the span of the known columns.
    Dense(DMatrix<S>),
}

/// Orthogonal projector `R = I - B_E B_E^+` onto the complement of the span of some columns.
#[derive(Debug, Clone)]
pub struct ComplementProjector<S: Scalar> {
    dim: usize,
    basis: Basis<S>,
}

impl<S: Scalar> ComplementProjector<S> {
    /// Fails with [`Error::DependentSupport`] when the columns are linearly dependent.
    pub fn new(columns: &DMatrix<S>) -> Result<Self> {
        let (dim, k) = columns.shape();
        if let Some(rows) = coordinate_rows(columns) {
            return Ok(Self {
                dim,
                basis: Basis::Coordinates(rows),
            });
        }
        if k > dim || LeastSquares::new(columns).is_err() {
            return Err(Error::DependentSupport);
        }
        Ok(Self {
            dim,
            basis: Basis::Dense(columns.clone().qr().q()),
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Dimension of the annihilated subspace.
    pub fn rank(&self) -> usize {
        match &self.basis {
            Basis::Coordinates(rows) => rows.len(),
            Basis::Dense(q) => q.ncols(),
        }
    }

    /// Orthonormal basis of the annihilated subspace.
    pub fn basis(&self) -> DMatrix<S> {
        match &self.basis {
            Basis::Coordinates(rows) => {
                let mut q = DMatrix::zeros(self.dim, rows.len());
                for (j, &r) in rows.iter().enumerate() {
                    q[(r, j)] = S::one();
                }
                q
            }
            Basis::Dense(q) => q.clone(),
        }
    }

    pub fn apply(&self, v: &DVector<S>) -> DVector<S> {
        let mut out = v.clone();
        self.apply_in_place(&mut out);
        out
    }

    pub fn apply_in_place(&self, v: &mut DVector<S>) {
        match &self.basis {
            Basis::Coordinates(rows) => {
                for &r in rows {
                    v[r] = S::zero();
                }
            }
            Basis::Dense(q) => {
                let c = q.ad_mul(v);
                v.gemv(-S::one(), q, &c, S::one());
            }
        }
    }

    pub fn apply_matrix(&self, m: &DMatrix<S>) -> DMatrix<S> {
        let mut out = m.clone();
        match &self.basis {
            Basis::Coordinates(rows) => {
                for &r in rows {
                    out.row_mut(r).fill(S::zero());
                }
            }
            Basis::Dense(q) => {
                let h = q.ad_mul(m);
                out.gemm(-S::one(), q, &h, S::one());
            }
        }
        out
    }

    /// `||R m_j||_2` for every column of `m`.
    pub fn column_norms(&self, m: &DMatrix<S>) -> Vec<RealOf<S>> {
        match &self.basis {
            Basis::Coordinates(rows) => {
                let mut skip = vec![false; self.dim];
                for &r in rows {
                    skip[r] = true;
                }
                m.column_iter()
                    .map(|c| {
                        c.iter()
                            .zip(&skip)
                            .filter(|(_, s)| !**s)
                            .fold(RealOf::<S>::zero(), |acc, (v, _)| acc + v.modulus_squared())
                            .sqrt()
                    })
                    .collect()
            }
            Basis::Dense(_) => self
                .apply_matrix(m)
                .column_iter()
                .map(|c| c.norm())
                .collect(),
        }
    }

    /// The projector as an explicit `M x M` matrix.
    pub fn matrix(&self) -> DMatrix<S> {
        self.apply_matrix(&DMatrix::identity(self.dim, self.dim))
    }
}

fn coordinate_rows<S: Scalar>(columns: &DMatrix<S>) -> Option<Vec<usize>> {
    let mut used = vec![false; columns.nrows()];
    let mut rows = Vec::with_capacity(columns.ncols());
    for c in columns.column_iter() {
        let mut hit = None;
        for (i, v) in c.iter().enumerate() {
            if *v != S::zero() {
                if hit.is_some() {
                    return None;
                }
                hit = Some(i);
            }
        }
        let i = hit?;
        if c[i].modulus() != RealOf::<S>::one() || used[i] {
            return None;
        }
        used[i] = true;
        rows.push(i);
    }
    Some(rows)
}

/// How annihilated columns are handled when building a [`ProjectedSystem`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DegeneratePolicy {
    /// Report them as [`Error::DegenerateColumns`].
    #[default]
    Reject,
    /// Remove them from the modified dictionary; their coefficients are fixed to zero.
    Drop,
}

/// Projection of `A` onto the complement of the known columns of `B`, with
/// column renormalization: the modified dictionary is `R A Delta`.
#[derive(Debug, Clone)]
pub struct ProjectedSystem<S: Scalar> {
    projector: ComplementProjector<S>,
    /// `||R a_l||_2` for every column of `A`.
    projected_norms: Vec<RealOf<S>>,
    active: Vec<usize>,
    dropped: Vec<usize>,
    known_support: Vec<usize>,
}

impl<S: Scalar> ProjectedSystem<S> {
    pub fn build(a: &Dictionary<S>, b: &Dictionary<S>, known: &[usize]) -> Result<Self> {
        Self::build_with(a, b, known, DegeneratePolicy::Reject)
    }

    pub fn build_with(
        a: &Dictionary<S>,
        b: &Dictionary<S>,
        known: &[usize],
        policy: DegeneratePolicy,
    ) -> Result<Self> {
        if a.rows() != b.rows() {
            return Err(Error::Dimension(format!(
                "dictionaries have {} and {} rows",
                a.rows(),
                b.rows()
            )));
        }
        let mut known = known.to_vec();
        known.sort_unstable();
        known.dedup();
        if let Some(&bad) = known.iter().find(|&&i| i >= b.cols()) {
            return Err(Error::Dimension(format!(
                "support index {bad} out of range for {} columns",
                b.cols()
            )));
        }
        let projector = ComplementProjector::new(&b.select_columns(&known))?;
        let projected_norms = projector.column_norms(a.matrix());
        let tol: RealOf<S> = lit(DEGENERATE_TOL);
        let (active, dropped): (Vec<usize>, Vec<usize>) =
            (0..a.cols()).partition(|&l| projected_norms[l] > tol);
        if !dropped.is_empty() && policy == DegeneratePolicy::Reject {
            return Err(Error::DegenerateColumns { columns: dropped });
        }
        Ok(Self {
            projector,
            projected_norms,
            active,
            dropped,
            known_support: known,
        })
    }

    pub fn projector(&self) -> &ComplementProjector<S> {
        &self.projector
    }

    /// The projector as an explicit matrix.
    pub fn projector_matrix(&self) -> DMatrix<S> {
        self.projector.matrix()
    }

    pub fn known_support(&self) -> &[usize] {
        &self.known_support
    }

    /// Columns of `A` kept in the modified dictionary.
    pub fn active(&self) -> &[usize] {
        &self.active
    }

    /// Columns of `A` annihilated by the projection.
    pub fn dropped(&self) -> &[usize] {
        &self.dropped
    }

    /// `||R a_l||_2` for every column of `A`.
    pub fn projected_norms(&self) -> &[RealOf<S>] {
        &self.projected_norms
    }

    /// Diagonal of `Delta`, `1 / ||R a_l||_2`, for the active columns.
    pub fn normalizer(&self) -> DVector<RealOf<S>> {
        DVector::from_iterator(
            self.active.len(),
            self.active
                .iter()
                .map(|&l| RealOf::<S>::one() / self.projected_norms[l]),
        )
    }

    /// The modified dictionary `R A Delta` restricted to the active columns.
    pub fn modified_dict(&self, a: &Dictionary<S>) -> Result<Dictionary<S>> {
        let mut m = self.projector.apply_matrix(&a.select_columns(&self.active));
        for (k, mut col) in m.column_iter_mut().enumerate() {
            col.unscale_mut(self.projected_norms[self.active[k]]);
        }
        Dictionary::new(m, format!("R{}D", a.label()))
    }

    /// Maps coefficients of the modified dictionary back to `x = Delta x_hat`
    /// (length `Na`, dropped columns set to zero).
    pub fn expand(&self, x_hat: &DVector<S>, na: usize) -> DVector<S> {
        let mut x = DVector::zeros(na);
        for (k, &l) in self.active.iter().enumerate() {
            x[l] = x_hat[k].unscale(self.projected_norms[l]);
        }
        x
    }
}
