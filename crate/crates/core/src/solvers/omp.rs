use nalgebra::{DMatrix, DVector};

use super::SolveReport;
use crate::error::{Error, Result};
use crate::scalar::prelude::*;

/// Correlations within this relative distance of the maximum count as ties;
/// the lowest column index wins.
pub const OMP_TIE_TOL: f64 = 1e-12;
/// Iteration stops once `||r|| < OMP_STOP_TOL * ||z||`.
pub const OMP_STOP_TOL: f64 = 1e-12;

/// Orthogonal matching pursuit with at most `k` iterations.
pub fn omp<S: Scalar>(d: &DMatrix<S>, z: &DVector<S>, k: usize) -> Result<SolveReport<S>> {
    omp_path(d, z, k).map(|(report, _)| report)
}

/// Like [`omp`], also returning the residual norm before the first and after each iteration.
pub fn omp_path<S: Scalar>(
    d: &DMatrix<S>,
    z: &DVector<S>,
    k: usize,
) -> Result<(SolveReport<S>, Vec<RealOf<S>>)> {
    let (m, n) = d.shape();
    if z.len() != m {
        return Err(Error::Dimension(format!(
            "measurement of length {} for {m} rows",
            z.len()
        )));
    }
    if k > m.min(n) {
        return Err(Error::InvalidArgument(format!(
            "{k} iterations exceed min(M, N) = {}",
            m.min(n)
        )));
    }
    let znorm = z.norm();
    let stop = lit::<RealOf<S>>(OMP_STOP_TOL) * znorm;
    let tie = lit::<RealOf<S>>(OMP_TIE_TOL);

    // Orthonormal basis of the selected columns and the triangular factor
    // linking it to them: d_S = Q R.
    let mut q: Vec<DVector<S>> = Vec::with_capacity(k);
    let mut r = DMatrix::<S>::zeros(k, k);
    let mut selected: Vec<usize> = Vec::with_capacity(k);
    let mut chosen = vec![false; n];
    let mut residual = z.clone();
    let mut history = vec![residual.norm()];

    while selected.len() < k {
        if znorm == RealOf::<S>::zero() || residual.norm() < stop {
            break;
        }
        let corr = d.ad_mul(&residual);
        let best = (0..n)
            .filter(|&j| !chosen[j])
            .map(|j| corr[j].modulus())
            .fold(RealOf::<S>::zero(), |a, b| a.max(b));
        if best == RealOf::<S>::zero() {
            break;
        }
        let j = (0..n)
            .find(|&j| !chosen[j] && corr[j].modulus() >= best - tie * best)
            .expect("a maximizer exists");

        let col = d.column(j).into_owned();
        let mut v = col.clone();
        let t = selected.len();
        // classical Gram-Schmidt, applied twice
        for _ in 0..2 {
            for (i, qi) in q.iter().enumerate() {
                let h = qi.dotc(&v);
                r[(i, t)] += h;
                v.axpy(-h, qi, S::one());
            }
        }
        let nu = v.norm();
        if nu <= lit::<RealOf<S>>(1e-12) * col.norm() {
            // the column lies in the span of the selected ones; nothing left to add
            for i in 0..t {
                r[(i, t)] = S::zero();
            }
            break;
        }
        v.unscale_mut(nu);
        r[(t, t)] = S::from_real(nu);
        let proj = v.dotc(&residual);
        residual.axpy(-proj, &v, S::one());
        q.push(v);
        selected.push(j);
        chosen[j] = true;
        history.push(residual.norm());
    }

    let t = selected.len();
    let mut solution = DVector::<S>::zeros(n);
    if t > 0 {
        let rhs = DVector::from_iterator(t, q.iter().map(|qi| qi.dotc(z)));
        let coeffs = r
            .view((0, 0), (t, t))
            .solve_upper_triangular(&rhs)
            .ok_or_else(|| Error::Singular("zero pivot in the OMP factor".into()))?;
        for (i, &j) in selected.iter().enumerate() {
            solution[j] = coeffs[i];
        }
    }
    let residual_norm = (d * &solution - z).norm();
    Ok((
        SolveReport {
            solution,
            residual_norm,
            iterations: t,
            converged: true,
            duality_gap: None,
        },
        history,
    ))
}
