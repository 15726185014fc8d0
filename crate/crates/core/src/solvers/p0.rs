//! Exhaustive search for the sparsest exact representation.

use std::ops::ControlFlow;

use nalgebra::{DMatrix, DVector};

use super::lstsq::LeastSquares;
use crate::error::{Error, Result};
use crate::scalar::prelude::*;

/// Largest number of candidate supports an exhaustive search may visit.
pub const SEARCH_LIMIT: u128 = 1_000_000;
/// A support represents `z` when the least-squares residual is at most this times `||z||`.
const EXACT_TOL: f64 = 1e-9;

/// Binomial coefficient, saturating at `u128::MAX`.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = match acc.checked_mul((n - i) as u128) {
            Some(v) => v / (i as u128 + 1),
            None => return u128::MAX,
        };
    }
    acc
}

/// Calls `f` on every `k`-subset of `0..n` in lexicographic order.
fn for_each_subset<F>(n: usize, k: usize, mut f: F) -> ControlFlow<()>
where
    F: FnMut(&[usize]) -> ControlFlow<()>,
{
    if k > n {
        return ControlFlow::Continue(());
    }
    let mut idx: Vec<usize> = (0..k).collect();
    'outer: loop {
        f(&idx)?;
        let mut i = k;
        while i > 0 {
            i -= 1;
            if idx[i] < n - k + i {
                idx[i] += 1;
                for j in i + 1..k {
                    idx[j] = idx[j - 1] + 1;
                }
                continue 'outer;
            }
        }
        return ControlFlow::Continue(());
    }
}

/// Coefficients of an exact representation of `target` on the columns `support` of `d`, if any.
fn exact_fit<S: Scalar>(
    d: &DMatrix<S>,
    support: &[usize],
    target: &DVector<S>,
    tol: RealOf<S>,
) -> Option<DVector<S>> {
    let cols = d.select_columns(support);
    // Dependent columns are skipped: a representation on them implies a sparser one.
    let ls = LeastSquares::new(&cols).ok()?;
    let coeffs = ls.solve(target).ok()?;
    ((&cols * &coeffs - target).norm() <= tol).then_some(coeffs)
}

fn check_guard(count: u128) -> Result<()> {
    if count > SEARCH_LIMIT {
        return Err(Error::GuardExceeded {
            count,
            limit: SEARCH_LIMIT,
        });
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct P0Solution<S: Scalar> {
    pub solution: DVector<S>,
    pub sparsity: usize,
    /// No other support of the same size represents the measurement.
    pub unique: bool,
}

/// Sparsest `x` with `D x = z`, searching supports of size `0..=max_k` in lexicographic order.
pub fn brute_force_p0<S: Scalar>(
    d: &DMatrix<S>,
    z: &DVector<S>,
    max_k: usize,
) -> Result<P0Solution<S>> {
    let (m, n) = d.shape();
    if z.len() != m {
        return Err(Error::Dimension(format!(
            "measurement of length {} for {m} rows",
            z.len()
        )));
    }
    check_guard(binomial(n, max_k.min(n)))?;
    let tol = lit::<RealOf<S>>(EXACT_TOL) * z.norm();
    for k in 0..=max_k.min(n).min(m) {
        let mut first: Option<DVector<S>> = None;
        let mut found = 0usize;
        let _ = for_each_subset(n, k, |s| {
            if let Some(c) = exact_fit(d, s, z, tol) {
                found += 1;
                if first.is_none() {
                    let mut x = DVector::zeros(n);
                    for (i, &j) in s.iter().enumerate() {
                        x[j] = c[i];
                    }
                    first = Some(x);
                }
            }
            ControlFlow::Continue(())
        });
        if let Some(solution) = first {
            return Ok(P0Solution {
                solution,
                sparsity: k,
                unique: found == 1,
            });
        }
    }
    Err(Error::NotFound { max_k })
}

#[derive(Debug, Clone, PartialEq)]
pub struct P0neSolution<S: Scalar> {
    pub solution_x: DVector<S>,
    /// Error estimate supported on `error_support`, with `A x + B e = z`.
    pub solution_e: DVector<S>,
    /// The smallest error support (first in size-then-lexicographic order) that admits the solution.
    pub error_support: Vec<usize>,
    pub sparsity: usize,
    /// No other vector of the same sparsity is admissible for any error support of size `<= ne`.
    pub unique: bool,
}

/// Sparsest `x` such that `A x - z` lies in the span of at most `ne` columns of `B`.
pub fn brute_force_p0_ne<S: Scalar>(
    a: &DMatrix<S>,
    b: &DMatrix<S>,
    z: &DVector<S>,
    ne: usize,
    max_nx: usize,
) -> Result<P0neSolution<S>> {
    let (m, na) = a.shape();
    let nb = b.ncols();
    if b.nrows() != m || z.len() != m {
        return Err(Error::Dimension(format!(
            "A has {m} rows, B has {}, z has length {}",
            b.nrows(),
            z.len()
        )));
    }
    let ne = ne.min(nb);
    let max_nx = max_nx.min(na);
    check_guard(binomial(nb, ne).saturating_mul(binomial(na, max_nx)))?;
    let tol = lit::<RealOf<S>>(EXACT_TOL) * z.norm();
    let dedupe_tol = lit::<RealOf<S>>(1e-9) * z.norm().max(RealOf::<S>::one());

    let mut best_k = max_nx;
    let mut winners: Vec<(DVector<S>, Vec<usize>)> = Vec::new();
    for size in 0..=ne {
        let _ = for_each_subset(nb, size, |e_set| {
            let be = b.select_columns(e_set);
            let q = match LeastSquares::new(&be) {
                Ok(_) if size > 0 => be.clone().qr().q(),
                Ok(_) => DMatrix::zeros(m, 0),
                Err(_) => return ControlFlow::Continue(()),
            };
            let project = |v: &DMatrix<S>| -> DMatrix<S> {
                if q.ncols() == 0 {
                    v.clone()
                } else {
                    v - &q * q.ad_mul(v)
                }
            };
            let ra = project(a);
            let rz = if q.ncols() == 0 {
                z.clone()
            } else {
                z - &q * q.ad_mul(z)
            };
            for k in 0..=best_k.min(m) {
                let mut hit = false;
                let _ = for_each_subset(na, k, |s| {
                    if let Some(c) = exact_fit(&ra, s, &rz, tol) {
                        let mut x = DVector::zeros(na);
                        for (i, &j) in s.iter().enumerate() {
                            x[j] = c[i];
                        }
                        if k < best_k || winners.is_empty() {
                            winners.clear();
                        }
                        best_k = k;
                        if !winners.iter().any(|(w, _)| (w - &x).norm() <= dedupe_tol) {
                            winners.push((x, e_set.to_vec()));
                        }
                        hit = true;
                    }
                    ControlFlow::Continue(())
                });
                if hit {
                    break;
                }
            }
            ControlFlow::Continue(())
        });
    }
    let (x, e_set) = winners
        .first()
        .cloned()
        .ok_or(Error::NotFound { max_k: max_nx })?;
    let mut e = DVector::zeros(nb);
    if !e_set.is_empty() {
        let be = b.select_columns(&e_set);
        let coeffs = LeastSquares::new(&be)?.solve(&(z - a * &x))?;
        for (i, &j) in e_set.iter().enumerate() {
            e[j] = coeffs[i];
        }
    }
    Ok(P0neSolution {
        solution_x: x,
        solution_e: e,
        error_support: e_set,
        sparsity: best_k,
        unique: winners.len() == 1,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomials() {
        assert_eq!(binomial(5, 2), 10);
        assert_eq!(binomial(64, 0), 1);
        assert_eq!(binomial(3, 4), 0);
        assert_eq!(binomial(200, 100), u128::MAX);
    }

    #[test]
    fn subsets_in_lexicographic_order() {
        let mut seen = Vec::new();
        let _ = for_each_subset(4, 2, |s| {
            seen.push(s.to_vec());
            ControlFlow::Continue(())
        });
        assert_eq!(
            seen,
            vec![vec![0, 1], vec![0, 2], vec![0, 3], vec![1, 2], vec![1, 3], vec![2, 3]]
        );
        let mut empty = 0;
        let _ = for_each_subset(3, 0, |_| {
            empty += 1;
            ControlFlow::Continue(())
        });
        assert_eq!(empty, 1);
    }

    #[test]
    fn zero_measurement_has_empty_support() {
        let r = brute_force_p0(&DMatrix::<f64>::identity(3, 3), &DVector::zeros(3), 2).unwrap();
        assert_eq!(r.sparsity, 0);
        assert!(r.unique);
    }

    #[test]
    fn duplicated_columns_are_not_unique() {
        let d = DMatrix::<f64>::from_row_slice(2, 4, &[1.0, 0.0, 1.0, 0.0, 0.0, 1.0, 0.0, 1.0]);
        let r = brute_force_p0(&d, &DVector::from_vec(vec![1.0, 0.0]), 2).unwrap();
        assert_eq!(r.sparsity, 1);
        assert!(!r.unique);
    }

    #[test]
    fn guard_and_not_found() {
        let d = DMatrix::<f64>::identity(64, 64);
        assert!(matches!(
            brute_force_p0(&d, &DVector::zeros(64), 10),
            Err(Error::GuardExceeded { .. })
        ));
        let z = DVector::from_element(3, 1.0);
        assert!(matches!(
            brute_force_p0(&DMatrix::<f64>::identity(3, 3), &z, 2),
            Err(Error::NotFound { max_k: 2 })
        ));
    }

    #[test]
    fn p0_ne_without_errors_matches_p0() {
        let d = DMatrix::<f64>::from_fn(4, 6, |i, j| ((i * 7 + j * 3) % 5) as f64 - 2.0 + (j as f64) * 0.1);
        let mut x = DVector::zeros(6);
        x[4] = 1.5;
        let z = &d * &x;
        let b = DMatrix::<f64>::identity(4, 4);
        let one = brute_force_p0(&d, &z, 2).unwrap();
        let two = brute_force_p0_ne(&d, &b, &z, 0, 2).unwrap();
        assert_eq!(one.sparsity, two.sparsity);
        assert!((one.solution - two.solution_x).norm() < 1e-12);
    }
}
