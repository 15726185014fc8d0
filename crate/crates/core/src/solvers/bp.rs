//! Weighted basis pursuit `min sum_i w_i |x_i|  s.t.  D x = z` by ADMM.
//!
//! The x-update is the exact Euclidean projection onto the affine set
//! `{x : D x = z}`, which needs `(D D^H)^+`; [`AffineConstraint`]
//! abstracts how that is obtained. Optimality is certified by a dual point
//! `y` with `|(D^H y)_i| <= w_i`, and the returned relative duality gap is
//! `(sum_i w_i |x_i| - Re<y, z>) / sum_i w_i |x_i|`. Whenever the iterates
//! identify a support, a least-squares refit on that support is tried
//! together with the minimum-norm dual certificate for it.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use super::lstsq::LeastSquares;
use super::SolveReport;
use crate::error::{Error, Result};
use crate::scalar::prelude::*;

/// A linear map `D` together with the pseudo-inverse of `D D^H`.
pub trait AffineConstraint<S: Scalar> {
    fn shape(&self) -> (usize, usize);
    fn apply(&self, x: &DVector<S>) -> DVector<S>;
    fn adjoint(&self, y: &DVector<S>) -> DVector<S>;
    /// `(D D^H)^+ y`
    fn gram_pinv(&self, y: &DVector<S>) -> DVector<S>;
    /// The listed columns of `D`.
    fn columns(&self, idx: &[usize]) -> DMatrix<S>;
}

/// Eigenvalues of `D D^H` below this fraction of the largest count as zero.
const GRAM_TOL: f64 = 1e-12;

/// Explicit matrix; `(D D^H)^+` from the eigendecomposition of `D D^H`.
#[derive(Debug, Clone)]
pub struct DenseConstraint<S: Scalar> {
    d: DMatrix<S>,
    v: DMatrix<S>,
    inv: DVector<RealOf<S>>,
}

impl<S: Scalar> DenseConstraint<S> {
    pub fn new(d: DMatrix<S>) -> Self {
        let eig = SymmetricEigen::new(&d * d.adjoint());
        let lmax = eig.eigenvalues.max();
        let keep: Vec<usize> = (0..eig.eigenvalues.len())
            .filter(|&i| eig.eigenvalues[i] > lit::<RealOf<S>>(GRAM_TOL) * lmax)
            .collect();
        let v = eig.eigenvectors.select_columns(&keep);
        let inv = DVector::from_iterator(
            keep.len(),
            keep.iter().map(|&i| RealOf::<S>::one() / eig.eigenvalues[i]),
        );
        Self { d, v, inv }
    }

    pub fn matrix(&self) -> &DMatrix<S> {
        &self.d
    }
}

impl<S: Scalar> AffineConstraint<S> for DenseConstraint<S> {
    fn shape(&self) -> (usize, usize) {
        self.d.shape()
    }
    fn apply(&self, x: &DVector<S>) -> DVector<S> {
        &self.d * x
    }
    fn adjoint(&self, y: &DVector<S>) -> DVector<S> {
        self.d.ad_mul(y)
    }
    fn gram_pinv(&self, y: &DVector<S>) -> DVector<S> {
        let mut c = self.v.ad_mul(y);
        for (ci, &w) in c.iter_mut().zip(self.inv.iter()) {
            *ci = ci.scale(w);
        }
        &self.v * c
    }
    fn columns(&self, idx: &[usize]) -> DMatrix<S> {
        self.d.select_columns(idx)
    }
}

/// `D = R A` where `A A^H = c I` and `R = I - Q Q^H` for orthonormal `Q`
/// (or `R = I` without `Q`). Then `(D D^H)^+ = R / c`.
#[derive(Debug, Clone, Copy)]
pub struct TightConstraint<'a, S: Scalar> {
    a: &'a DMatrix<S>,
    frame_bound: RealOf<S>,
    q: Option<&'a DMatrix<S>>,
}

impl<'a, S: Scalar> TightConstraint<'a, S> {
    /// `q`, if given, must have orthonormal columns; `a` must satisfy `A A^H = frame_bound I`.
    pub fn new(a: &'a DMatrix<S>, frame_bound: RealOf<S>, q: Option<&'a DMatrix<S>>) -> Result<Self> {
        if let Some(q) = q {
            if q.nrows() != a.nrows() {
                return Err(Error::Dimension(format!(
                    "projector basis has {} rows, dictionary has {}",
                    q.nrows(),
                    a.nrows()
                )));
            }
        }
        if !(frame_bound > RealOf::<S>::zero()) {
            return Err(Error::InvalidArgument("frame bound must be positive".into()));
        }
        Ok(Self { a, frame_bound, q })
    }

    fn project(&self, v: &mut DVector<S>) {
        if let Some(q) = self.q {
            if q.ncols() > 0 {
                let c = q.ad_mul(v);
                v.gemv(-S::one(), q, &c, S::one());
            }
        }
    }
}

impl<S: Scalar> AffineConstraint<S> for TightConstraint<'_, S> {
    fn shape(&self) -> (usize, usize) {
        self.a.shape()
    }
    fn apply(&self, x: &DVector<S>) -> DVector<S> {
        let mut v = self.a * x;
        self.project(&mut v);
        v
    }
    fn adjoint(&self, y: &DVector<S>) -> DVector<S> {
        let mut v = y.clone();
        self.project(&mut v);
        self.a.ad_mul(&v)
    }
    fn gram_pinv(&self, y: &DVector<S>) -> DVector<S> {
        let mut v = y.clone();
        self.project(&mut v);
        v.unscale_mut(self.frame_bound);
        v
    }
    fn columns(&self, idx: &[usize]) -> DMatrix<S> {
        let mut c = self.a.select_columns(idx);
        if let Some(q) = self.q {
            if q.ncols() > 0 {
                let h = q.ad_mul(&c);
                c.gemm(-S::one(), q, &h, S::one());
            }
        }
        c
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BpOptions {
    /// Accept `||D x - z|| <= feas_tol * max(1, ||z||)`.
    pub feas_tol: f64,
    /// Target relative duality gap.
    pub gap_tol: f64,
    pub max_iter: usize,
    /// Certificates, penalty updates and refits are attempted every this many iterations.
    pub check_every: usize,
}

impl Default for BpOptions {
    fn default() -> Self {
        Self {
            feas_tol: 1e-9,
            gap_tol: 1e-7,
            max_iter: 20_000,
            check_every: 10,
        }
    }
}

/// Unweighted basis pursuit on an explicit matrix.
pub fn basis_pursuit<S: Scalar>(
    d: &DMatrix<S>,
    z: &DVector<S>,
    opts: &BpOptions,
) -> Result<SolveReport<S>> {
    solve_bp(&DenseConstraint::new(d.clone()), z, None, opts)
}

fn weighted_l1<S: Scalar>(x: &DVector<S>, w: &DVector<RealOf<S>>) -> RealOf<S> {
    x.iter()
        .zip(w.iter())
        .fold(RealOf::<S>::zero(), |acc, (xi, wi)| acc + xi.modulus() * *wi)
}

fn real_inner<S: Scalar>(y: &DVector<S>, b: &DVector<S>) -> RealOf<S> {
    y.dotc(b).real()
}

/// Dual objective of `y` after scaling it into the feasible set `|D^H y| <= w`.
fn dual_value<S: Scalar, C: AffineConstraint<S>>(
    c: &C,
    mut y: DVector<S>,
    w: &DVector<RealOf<S>>,
    b: &DVector<S>,
) -> RealOf<S> {
    let g = c.adjoint(&y);
    let worst = g
        .iter()
        .zip(w.iter())
        .fold(RealOf::<S>::zero(), |acc, (gi, wi)| acc.max(gi.modulus() / *wi));
    if worst > RealOf::<S>::one() {
        y.unscale_mut(worst);
    }
    real_inner(&y, b)
}

struct Polished<S: Scalar> {
    x: DVector<S>,
    primal: RealOf<S>,
    /// Dual value of the minimum-norm certificate, if it is feasible.
    certified_dual: Option<RealOf<S>>,
}

/// Least-squares refit on `support` and the minimum-norm dual certificate for it.
fn polish<S: Scalar, C: AffineConstraint<S>>(
    c: &C,
    support: &[usize],
    b: &DVector<S>,
    w: &DVector<RealOf<S>>,
    feas: RealOf<S>,
) -> Option<Polished<S>> {
    let n = c.shape().1;
    let cols = c.columns(support);
    let ls = LeastSquares::new(&cols).ok()?;
    let xs = ls.solve(b).ok()?;
    if (&cols * &xs - b).norm() > feas {
        return None;
    }
    let mut x = DVector::<S>::zeros(n);
    let mut signs = DVector::<S>::zeros(support.len());
    for (k, &i) in support.iter().enumerate() {
        let modulus = xs[k].modulus();
        if modulus == RealOf::<S>::zero() {
            return None;
        }
        x[i] = xs[k];
        signs[k] = xs[k].scale(w[i] / modulus);
    }
    let primal = weighted_l1(&x, w);
    let certified_dual = ls.solve_adjoint(&signs).ok().and_then(|y| {
        let g = c.adjoint(&y);
        let slack = RealOf::<S>::one() + lit::<RealOf<S>>(1e-9);
        let mut on_support = vec![false; n];
        for &i in support {
            on_support[i] = true;
        }
        let ok = (0..n).all(|i| on_support[i] || g[i].modulus() <= w[i] * slack);
        ok.then(|| real_inner(&y, b))
    });
    Some(Polished {
        x,
        primal,
        certified_dual,
    })
}

fn soft_threshold<S: Scalar>(v: &DVector<S>, w: &DVector<RealOf<S>>, rho: RealOf<S>) -> DVector<S> {
    DVector::from_iterator(
        v.len(),
        v.iter().zip(w.iter()).map(|(vi, wi)| {
            let m = vi.modulus();
            let t = *wi / rho;
            if m <= t {
                S::zero()
            } else {
                vi.scale((m - t) / m)
            }
        }),
    )
}

/// Weighted basis pursuit. `weights` default to all ones and must be positive.
pub fn solve_bp<S: Scalar, C: AffineConstraint<S>>(
    c: &C,
    z: &DVector<S>,
    weights: Option<&DVector<RealOf<S>>>,
    opts: &BpOptions,
) -> Result<SolveReport<S>> {
    let (m, n) = c.shape();
    if z.len() != m {
        return Err(Error::Dimension(format!(
            "measurement of length {} for {m} rows",
            z.len()
        )));
    }
    let w = match weights {
        Some(w) => {
            if w.len() != n || w.iter().any(|wi| !(*wi > RealOf::<S>::zero() && wi.is_finite())) {
                return Err(Error::InvalidArgument(
                    "weights must be positive and finite, one per column".into(),
                ));
            }
            w.clone()
        }
        None => DVector::from_element(n, RealOf::<S>::one()),
    };
    let one = RealOf::<S>::one();
    let znorm = z.norm();
    if znorm == RealOf::<S>::zero() {
        return Ok(SolveReport {
            solution: DVector::zeros(n),
            residual_norm: RealOf::<S>::zero(),
            iterations: 0,
            converged: true,
            duality_gap: Some(RealOf::<S>::zero()),
        });
    }
    // Work with a unit-norm measurement.
    let b = z.unscale(znorm);
    let feas = lit::<RealOf<S>>(opts.feas_tol) * znorm.max(one) / znorm;
    let gap_tol: RealOf<S> = lit(opts.gap_tol);

    let project = |v: &DVector<S>| -> DVector<S> {
        let r = c.apply(v) - &b;
        v - c.adjoint(&c.gram_pinv(&r))
    };
    let x0 = c.adjoint(&c.gram_pinv(&b));
    let infeasibility = (c.apply(&x0) - &b).norm();
    if infeasibility > feas {
        return Err(Error::Infeasible {
            residual: to_f64(infeasibility),
        });
    }

    let finish = |x: DVector<S>, iterations: usize, converged: bool, gap: RealOf<S>| {
        let residual_norm = (c.apply(&x) - &b).norm() * znorm;
        SolveReport {
            solution: x * S::from_real(znorm),
            residual_norm,
            iterations,
            converged,
            duality_gap: Some(gap),
        }
    };

    let mut u = x0.clone();
    let mut lam = DVector::<S>::zeros(n);
    let mut rho = one;
    let mut x = x0;
    let mut last_support: Vec<usize> = Vec::new();
    let mut tried_support: Vec<usize> = vec![usize::MAX];
    let mut gap = RealOf::<S>::max_value().unwrap_or(one);
    let every = opts.check_every.max(1);

    for it in 1..=opts.max_iter {
        x = project(&(&u - &lam));
        let u_old = std::mem::replace(&mut u, soft_threshold(&(&x + &lam), &w, rho));
        lam += &x - &u;

        if it % every != 0 && it != opts.max_iter {
            continue;
        }
        let primal = weighted_l1(&x, &w);
        let y = c.gram_pinv(&c.apply(&lam.scale(rho)));
        let dual = dual_value(c, y.clone(), &w, &b);
        gap = (primal - dual) / primal;

        let support: Vec<usize> = (0..n).filter(|&i| u[i] != S::zero()).collect();
        if support.len() <= m && support == last_support && support != tried_support {
            tried_support = support.clone();
            if let Some(p) = polish(c, &support, &b, &w, feas) {
                let best_dual = match p.certified_dual {
                    Some(d) => d.max(dual),
                    None => dual,
                };
                let pgap = (p.primal - best_dual) / p.primal;
                if pgap <= gap_tol {
                    return Ok(finish(p.x, it, true, pgap.max(RealOf::<S>::zero())));
                }
            }
        }
        last_support = support;
        if gap <= gap_tol {
            return Ok(finish(x, it, true, gap.max(RealOf::<S>::zero())));
        }

        let r_primal = (&x - &u).norm();
        let r_dual = (&u - &u_old).norm() * rho;
        let ten: RealOf<S> = lit(10.0);
        let two: RealOf<S> = lit(2.0);
        if r_primal > ten * r_dual {
            rho *= two;
            lam.unscale_mut(two);
        } else if r_dual > ten * r_primal {
            rho /= two;
            lam *= S::from_real(two);
        }
    }
    Ok(finish(x, opts.max_iter, false, gap))
}
