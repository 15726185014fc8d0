//! The uncertainty relation for pairs of dictionaries.

use nalgebra::DVector;

use crate::dictionaries::{CoherenceProfile, Dictionary};
use crate::error::{Error, Result};
use crate::scalar::prelude::*;
use crate::signals::concentration;

/// Relative slack used to classify `lhs >= rhs` in floating point.
pub const EQUALITY_TOL: f64 = 1e-9;

fn pos<T: Real>(x: T) -> T {
    x.max(T::zero())
}

/// `f(u, v) = [1 - mu_a (u - 1)]^+ [1 - mu_b (v - 1)]^+ / mu_m^2`.
pub fn f_bound<T: Real>(u: T, v: T, prof: &CoherenceProfile<T>) -> Result<T> {
    if prof.mu_m <= T::zero() {
        return Err(Error::InvalidArgument(
            "the bound needs a positive mutual coherence".into(),
        ));
    }
    let one = T::one();
    Ok(pos(one - prof.mu_a * (u - one)) * pos(one - prof.mu_b * (v - one))
        / (prof.mu_m * prof.mu_m))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UncertaintyCheck<T> {
    /// `|P| |Q|`
    pub lhs: T,
    pub rhs: T,
    pub holds: bool,
    pub eps_p: T,
    pub eps_q: T,
}

/// Evaluates both sides of the uncertainty relation for `p` concentrated on
/// `set_p` and `q` concentrated on `set_q`.
///
/// Does not check that `A p = B q`; see [`verify_common_signal`]. If exactly
/// one of the vectors is zero its concentration is taken to be 0.
pub fn check_uncertainty<S: Scalar>(
    p: &DVector<S>,
    q: &DVector<S>,
    set_p: &[usize],
    set_q: &[usize],
    prof: &CoherenceProfile<RealOf<S>>,
) -> Result<UncertaintyCheck<RealOf<S>>> {
    let eps_of = |v: &DVector<S>, set: &[usize]| match concentration(v, set) {
        Err(Error::ZeroVector) => Ok(RealOf::<S>::zero()),
        other => other,
    };
    if p.iter().all(|v| *v == S::zero()) && q.iter().all(|v| *v == S::zero()) {
        return Err(Error::ZeroVector);
    }
    if prof.mu_m <= RealOf::<S>::zero() {
        return Err(Error::InvalidArgument(
            "the uncertainty relation needs a positive mutual coherence".into(),
        ));
    }
    let eps_p = eps_of(p, set_p)?;
    let eps_q = eps_of(q, set_q)?;
    let one = RealOf::<S>::one();
    let np: RealOf<S> = count(distinct(set_p));
    let nq: RealOf<S> = count(distinct(set_q));
    let lhs = np * nq;
    let rhs = pos((one + prof.mu_a) * (one - eps_p) - np * prof.mu_a)
        * pos((one + prof.mu_b) * (one - eps_q) - nq * prof.mu_b)
        / (prof.mu_m * prof.mu_m);
    let slack = lit::<RealOf<S>>(EQUALITY_TOL) * rhs.max(one);
    Ok(UncertaintyCheck {
        lhs,
        rhs,
        holds: lhs >= rhs - slack,
        eps_p,
        eps_q,
    })
}

fn distinct(set: &[usize]) -> usize {
    let mut s = set.to_vec();
    s.sort_unstable();
    s.dedup();
    s.len()
}

/// True when `||A p - B q||_2 <= tol * max(||A p||_2, 1)`.
pub fn verify_common_signal<S: Scalar>(
    a: &Dictionary<S>,
    p: &DVector<S>,
    b: &Dictionary<S>,
    q: &DVector<S>,
    tol: RealOf<S>,
) -> Result<bool> {
    let ap = a.apply(p)?;
    let bq = b.apply(q)?;
    if ap.len() != bq.len() {
        return Err(Error::Dimension(format!(
            "A p has length {} but B q has length {}",
            ap.len(),
            bq.len()
        )));
    }
    Ok((&ap - &bq).norm() <= tol * ap.norm().max(RealOf::<S>::one()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn prof(a: f64, b: f64, m: f64) -> CoherenceProfile<f64> {
        CoherenceProfile::new(a, b, m).unwrap()
    }

    #[test]
    fn f_bound_examples() {
        let p = prof(0.0, 0.0, 0.125);
        for (u, v) in [(0.0, 0.0), (3.0, 17.0), (64.0, 1.0)] {
            assert!((f_bound(u, v, &p).unwrap() - 64.0).abs() < 1e-12);
        }
        assert!((f_bound(1.0, 1.0, &prof(0.1, 0.1, 0.1)).unwrap() - 100.0).abs() < 1e-9);
        assert_eq!(f_bound(12.0, 1.0, &prof(0.1, 0.1, 0.1)).unwrap(), 0.0);
        let orthogonal = CoherenceProfile::with_mu_d(0.0, 0.0, 0.0, 0.0).unwrap();
        assert!(f_bound(1.0, 1.0, &orthogonal).is_err());
    }

    #[test]
    fn disjoint_set_clips_the_bound() {
        let p = DVector::from_vec(vec![1.0, 0.0]);
        let q = DVector::from_vec(vec![0.0, 1.0]);
        let c = check_uncertainty(&p, &q, &[1], &[1], &prof(0.0, 0.0, 0.5)).unwrap();
        assert_eq!(c.eps_p, 1.0);
        assert_eq!(c.rhs, 0.0);
        assert!(c.holds);
    }

    #[test]
    fn both_zero_is_rejected() {
        let z = DVector::<f64>::zeros(2);
        assert!(check_uncertainty(&z, &z, &[], &[], &prof(0.0, 0.0, 0.5)).is_err());
    }
}
