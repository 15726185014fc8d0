use nalgebra::SymmetricEigen;

use super::projection::ProjectedSystem;
use crate::dictionaries::{coherence, profile, Dictionary};
use crate::error::Result;
use crate::scalar::prelude::*;

/// Quantities controlled by the projection analysis, next to their analytical bounds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProjectionBounds<T> {
    /// Smallest eigenvalue of `B_E^H B_E`.
    pub lambda_min: T,
    /// `[1 - mu_b (ne - 1)]^+`.
    pub gersgorin_lb: T,
    /// `min_l ||R_E a_l||^2`.
    pub min_colnorm_sq: T,
    /// `1 - ne mu_m^2 / [1 - mu_b (ne - 1)]^+`; `-inf` when the bracket vanishes.
    pub colnorm_lb: T,
    /// Coherence of `R_E A Delta`.
    pub eff_coherence: T,
    /// `(mu_a C + ne mu_m^2) / (C - ne mu_m^2)` with `C = [1 - mu_b (ne - 1)]^+`;
    /// `+inf` when the denominator is not positive.
    pub eff_coherence_ub: T,
}

impl<T: Real> ProjectionBounds<T> {
    /// All three inequalities hold up to `tol`.
    pub fn hold(&self, tol: T) -> bool {
        self.lambda_min >= self.gersgorin_lb - tol
            && self.min_colnorm_sq >= self.colnorm_lb - tol
            && self.eff_coherence <= self.eff_coherence_ub + tol
    }
}

/// Evaluates the eigenvalue, projected-norm and effective-coherence bounds for
/// the known error support `e_support`.
pub fn check_projection_bounds<S: Scalar>(
    a: &Dictionary<S>,
    b: &Dictionary<S>,
    e_support: &[usize],
) -> Result<ProjectionBounds<RealOf<S>>> {
    let sys = ProjectedSystem::build(a, b, e_support)?;
    let prof = profile(a, b)?;
    let ne = sys.known_support().len();
    let one = RealOf::<S>::one();
    let zero = RealOf::<S>::zero();
    let inf = one / zero;

    let be = b.select_columns(sys.known_support());
    let lambda_min = if ne == 0 {
        one
    } else {
        SymmetricEigen::new(be.ad_mul(&be)).eigenvalues.min()
    };
    let c_b = (one - prof.mu_b * (count::<RealOf<S>>(ne) - one)).max(zero);
    let gersgorin_lb = if ne == 0 { one } else { c_b };
    let ne_mu = count::<RealOf<S>>(ne) * prof.mu_m * prof.mu_m;

    let min_colnorm_sq = sys
        .projected_norms()
        .iter()
        .map(|n| *n * *n)
        .fold(inf, |acc, v| acc.min(v));
    let colnorm_lb = if c_b > zero { one - ne_mu / c_b } else { -inf };

    let eff_coherence = coherence(&sys.modified_dict(a)?);
    let denom = c_b - ne_mu;
    let eff_coherence_ub = if denom > zero {
        (prof.mu_a * c_b + ne_mu) / denom
    } else {
        inf
    };
    Ok(ProjectionBounds {
        lambda_min,
        gersgorin_lb,
        min_colnorm_sq,
        colnorm_lb,
        eff_coherence,
        eff_coherence_ub,
    })
}
