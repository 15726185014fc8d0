use nalgebra::{DMatrix, DVector};

use super::projection::{DegeneratePolicy, ProjectedSystem};
use crate::dictionaries::{concat, Dictionary};
use crate::error::{Error, Result};
use crate::scalar::prelude::*;
use crate::solvers::{
    brute_force_p0, brute_force_p0_ne, omp, pinv_solve, solve_bp, BpOptions, DenseConstraint,
    LeastSquares, SolveReport, TightConstraint,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Bp,
    Omp,
}

impl std::str::FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "bp" => Ok(Method::Bp),
            "omp" => Ok(Method::Omp),
            _ => Err(Error::InvalidArgument(format!("unknown method `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RecoveryOptions {
    pub bp: BpOptions,
    pub degenerate: DegeneratePolicy,
    /// Cross-check the solution against exhaustive search when that is small enough.
    pub check_uniqueness: bool,
}

#[derive(Debug, Clone)]
pub struct Recovered<S: Scalar> {
    pub x: DVector<S>,
    pub e: DVector<S>,
    /// Report of the solver that produced the estimate.
    pub report: SolveReport<S>,
    /// Columns of the unknown-support dictionary removed by the projection.
    pub dropped_columns: Vec<usize>,
    /// Result of the opt-in uniqueness check; `None` when it was not run.
    pub unique: Option<bool>,
}

fn check_measurement<S: Scalar>(a: &Dictionary<S>, b: &Dictionary<S>, z: &DVector<S>) -> Result<()> {
    if a.rows() != b.rows() || z.len() != a.rows() {
        return Err(Error::Dimension(format!(
            "A has {} rows, B has {}, z has length {}",
            a.rows(),
            b.rows(),
            z.len()
        )));
    }
    Ok(())
}

fn check_indices(support: &[usize], n: usize) -> Result<()> {
    match support.iter().find(|&&i| i >= n) {
        Some(i) => Err(Error::Dimension(format!(
            "support index {i} out of range for {n} columns"
        ))),
        None => Ok(()),
    }
}

fn scatter<S: Scalar>(n: usize, support: &[usize], values: &[S]) -> DVector<S> {
    let mut v = DVector::zeros(n);
    for (&i, &c) in support.iter().zip(values) {
        v[i] = c;
    }
    v
}

/// Least-squares coefficients on `support` of `d` for `target`.
fn fit_on<S: Scalar>(d: &Dictionary<S>, support: &[usize], target: &DVector<S>) -> Result<DVector<S>> {
    if support.is_empty() {
        return Ok(DVector::zeros(d.cols()));
    }
    let c = LeastSquares::new(&d.select_columns(support))?.solve(target)?;
    Ok(scatter(d.cols(), support, c.as_slice()))
}

/// Both supports known: least squares on `[A_X B_E]`.
///
/// Fails with [`Error::Singular`] when `[A_X B_E]` does not have full column rank.
pub fn recover_case_i<S: Scalar>(
    a: &Dictionary<S>,
    b: &Dictionary<S>,
    z: &DVector<S>,
    x_support: &[usize],
    e_support: &[usize],
) -> Result<Recovered<S>> {
    check_measurement(a, b, z)?;
    check_indices(x_support, a.cols())?;
    check_indices(e_support, b.cols())?;
    let (nx, ne) = (x_support.len(), e_support.len());
    let mut d = DMatrix::<S>::zeros(a.rows(), nx + ne);
    d.columns_mut(0, nx).copy_from(&a.select_columns(x_support));
    d.columns_mut(nx, ne).copy_from(&b.select_columns(e_support));
    let report = pinv_solve(&d, z)?;
    let s = report.solution.as_slice();
    Ok(Recovered {
        x: scatter(a.cols(), x_support, &s[..nx]),
        e: scatter(b.cols(), e_support, &s[nx..]),
        report,
        dropped_columns: Vec::new(),
        unique: None,
    })
}

/// Recovers the coefficients on `primary` after projecting out the known
/// columns `known` of `other`.
fn solve_projected<S: Scalar>(
    primary: &Dictionary<S>,
    other: &Dictionary<S>,
    z: &DVector<S>,
    known: &[usize],
    method: Method,
    sparsity: Option<usize>,
    opts: &RecoveryOptions,
) -> Result<(DVector<S>, SolveReport<S>, Vec<usize>, Option<bool>)> {
    let sys = ProjectedSystem::build_with(primary, other, known, opts.degenerate)?;
    let rz = sys.projector().apply(z);
    let n = primary.cols();
    let (coeffs, report, x_hat, modified) = match method {
        Method::Omp => {
            let k = sparsity.ok_or_else(|| {
                Error::InvalidArgument("OMP needs the number of nonzero coefficients".into())
            })?;
            let md = sys.modified_dict(primary)?;
            let report = omp(md.matrix(), &rz, k)?;
            let x = sys.expand(&report.solution, n);
            let x_hat = report.solution.clone();
            (x, report, x_hat, Some(md))
        }
        Method::Bp => match primary.frame_bound() {
            Some(c) => {
                let q = sys.projector().basis();
                let tight = TightConstraint::new(primary.matrix(), c, Some(&q))?;
                let norms = sys.projected_norms();
                let mut weights = DVector::from_element(n, RealOf::<S>::one());
                for &l in sys.active() {
                    weights[l] = norms[l];
                }
                let report = solve_bp(&tight, &rz, Some(&weights), &opts.bp)?;
                let mut x = report.solution.clone();
                for &l in sys.dropped() {
                    x[l] = S::zero();
                }
                let x_hat = DVector::from_iterator(
                    sys.active().len(),
                    sys.active().iter().map(|&l| x[l].scale(norms[l])),
                );
                (x, report, x_hat, None)
            }
            None => {
                let md = sys.modified_dict(primary)?;
                let report = solve_bp(&DenseConstraint::new(md.matrix().clone()), &rz, None, &opts.bp)?;
                let x = sys.expand(&report.solution, n);
                let x_hat = report.solution.clone();
                (x, report, x_hat, Some(md))
            }
        },
    };
    let unique = if opts.check_uniqueness {
        let md = match modified {
            Some(md) => md,
            None => sys.modified_dict(primary)?,
        };
        uniqueness(md.matrix(), &rz, &x_hat)
    } else {
        None
    };
    Ok((coeffs, report, sys.dropped().to_vec(), unique))
}

/// Whether `x` is the unique sparsest representation of `z`; `None` if the
/// search is too large.
fn uniqueness<S: Scalar>(d: &DMatrix<S>, z: &DVector<S>, x: &DVector<S>) -> Option<bool> {
    let scale = x.camax();
    let k = x
        .iter()
        .filter(|v| v.modulus() > lit::<RealOf<S>>(1e-9) * scale)
        .count();
    let p0 = brute_force_p0(d, z, k).ok()?;
    let close = (&p0.solution - x).norm() <= lit::<RealOf<S>>(1e-6) * x.norm().max(RealOf::<S>::one());
    Some(p0.unique && close)
}

/// Error support known: project it out, solve for `x`, then fit `e` on the support.
pub fn recover_case_ii_e<S: Scalar>(
    a: &Dictionary<S>,
    b: &Dictionary<S>,
    z: &DVector<S>,
    e_support: &[usize],
    method: Method,
    nx_for_omp: Option<usize>,
    opts: &RecoveryOptions,
) -> Result<Recovered<S>> {
    check_measurement(a, b, z)?;
    let (x, report, dropped, unique) =
        solve_projected(a, b, z, e_support, method, nx_for_omp, opts)?;
    let e = fit_on(b, e_support, &(z - a.matrix() * &x))?;
    Ok(Recovered {
        x,
        e,
        report,
        dropped_columns: dropped,
        unique,
    })
}

/// Signal support known: the mirror image of [`recover_case_ii_e`].
pub fn recover_case_ii_x<S: Scalar>(
    a: &Dictionary<S>,
    b: &Dictionary<S>,
    z: &DVector<S>,
    x_support: &[usize],
    method: Method,
    ne_for_omp: Option<usize>,
    opts: &RecoveryOptions,
) -> Result<Recovered<S>> {
    check_measurement(a, b, z)?;
    let (e, report, dropped, unique) =
        solve_projected(b, a, z, x_support, method, ne_for_omp, opts)?;
    let x = fit_on(a, x_support, &(z - b.matrix() * &e))?;
    Ok(Recovered {
        x,
        e,
        report,
        dropped_columns: dropped,
        unique,
    })
}

/// Only the error sparsity known: exhaustive search (toy sizes only).
pub fn recover_case_iii<S: Scalar>(
    a: &Dictionary<S>,
    b: &Dictionary<S>,
    z: &DVector<S>,
    ne: usize,
    max_nx: usize,
) -> Result<Recovered<S>> {
    check_measurement(a, b, z)?;
    let sol = brute_force_p0_ne(a.matrix(), b.matrix(), z, ne, max_nx)?;
    let residual_norm = (a.matrix() * &sol.solution_x + b.matrix() * &sol.solution_e - z).norm();
    let mut w = DVector::zeros(a.cols() + b.cols());
    w.rows_mut(0, a.cols()).copy_from(&sol.solution_x);
    w.rows_mut(a.cols(), b.cols()).copy_from(&sol.solution_e);
    Ok(Recovered {
        x: sol.solution_x,
        e: sol.solution_e,
        report: SolveReport {
            solution: w,
            residual_norm,
            iterations: 1,
            converged: true,
            duality_gap: None,
        },
        dropped_columns: Vec::new(),
        unique: Some(sol.unique),
    })
}

/// Nothing known: solve on the concatenation `[A B]` and split the result.
pub fn recover_case_iv<S: Scalar>(
    a: &Dictionary<S>,
    b: &Dictionary<S>,
    z: &DVector<S>,
    method: Method,
    k_for_omp: Option<usize>,
    opts: &RecoveryOptions,
) -> Result<Recovered<S>> {
    check_measurement(a, b, z)?;
    let d = concat(a, b)?;
    let report = match method {
        Method::Omp => {
            let k = k_for_omp.ok_or_else(|| {
                Error::InvalidArgument("OMP needs the total number of nonzero coefficients".into())
            })?;
            omp(d.matrix(), z, k)?
        }
        Method::Bp => match d.frame_bound() {
            Some(c) => solve_bp(&TightConstraint::new(d.matrix(), c, None)?, z, None, &opts.bp)?,
            None => solve_bp(&DenseConstraint::new(d.matrix().clone()), z, None, &opts.bp)?,
        },
    };
    let unique = if opts.check_uniqueness {
        uniqueness(d.matrix(), z, &report.solution)
    } else {
        None
    };
    let w = &report.solution;
    Ok(Recovered {
        x: w.rows(0, a.cols()).into_owned(),
        e: w.rows(a.cols(), b.cols()).into_owned(),
        report,
        dropped_columns: Vec::new(),
        unique,
    })
}
