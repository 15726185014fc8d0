//! Coherence-based recovery thresholds as predicates and contour generators.
//!
//! Every threshold is a strict inequality `lhs < rhs`. Verdicts carry the
//! signed margin `lhs - rhs`; a margin within [`BOUNDARY_TOL`] (relative) of
//! zero is snapped to zero and counts as not satisfied.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use crate::dictionaries::CoherenceProfile;
use crate::error::{Error, Result};
use crate::scalar::prelude::*;
use crate::uncertainty::f_bound;

pub const BOUNDARY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CaseId {
    /// Single dictionary, no corruption.
    Classical,
    /// Concatenated dictionary treated as one, with its coherence only.
    NaiveConcat,
    /// Both supports known.
    CaseI,
    /// Error support known.
    CaseIIE,
    /// Signal support known.
    CaseIIX,
    /// Only the error sparsity known.
    CaseIII,
    /// Nothing known, exhaustive search.
    CaseIVP0,
    /// Nothing known, BP or OMP on the concatenation.
    CaseIVBP,
}

impl CaseId {
    pub const ALL: [CaseId; 8] = [
        CaseId::Classical,
        CaseId::NaiveConcat,
        CaseId::CaseI,
        CaseId::CaseIIE,
        CaseId::CaseIIX,
        CaseId::CaseIII,
        CaseId::CaseIVP0,
        CaseId::CaseIVBP,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            CaseId::Classical => "classical",
            CaseId::NaiveConcat => "naive_concat",
            CaseId::CaseI => "caseI",
            CaseId::CaseIIE => "caseII_E",
            CaseId::CaseIIX => "caseII_X",
            CaseId::CaseIII => "caseIII",
            CaseId::CaseIVP0 => "caseIV_P0",
            CaseId::CaseIVBP => "caseIV_BP",
        }
    }
}

impl fmt::Display for CaseId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CaseId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        CaseId::ALL
            .into_iter()
            .find(|c| c.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidArgument(format!("unknown case `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdVerdict<T> {
    pub case_id: CaseId,
    pub satisfied: bool,
    /// `lhs - rhs`; negative when satisfied, `-inf` for vacuous thresholds.
    pub margin: T,
    pub lhs: T,
    pub rhs: T,
    /// The roles of the two dictionaries were exchanged to meet `mu_a <= mu_b`.
    pub swapped: bool,
}

fn verdict<T: Real>(case_id: CaseId, lhs: T, rhs: T, swapped: bool) -> ThresholdVerdict<T> {
    let mut margin = lhs - rhs;
    let scale = rhs.abs().max(T::one());
    if rhs.is_finite() && margin.abs() <= lit::<T>(BOUNDARY_TOL) * scale {
        margin = T::zero();
    }
    if !rhs.is_finite() && rhs > T::zero() {
        margin = -T::one() / T::zero();
    }
    ThresholdVerdict {
        case_id,
        satisfied: margin < T::zero(),
        margin,
        lhs,
        rhs,
        swapped,
    }
}

fn half_one_plus_inverse<T: Real>(mu: T) -> T {
    if mu <= T::zero() {
        T::one() / T::zero()
    } else {
        lit::<T>(0.5) * (T::one() + T::one() / mu)
    }
}

/// `nx < (1 + 1/mu_a) / 2`.
pub fn classical<T: Real>(nx: usize, mu_a: T) -> ThresholdVerdict<T> {
    verdict(CaseId::Classical, count(nx), half_one_plus_inverse(mu_a), false)
}

/// `nx + ne < (1 + 1/mu_d) / 2`.
pub fn naive_concat<T: Real>(nx: usize, ne: usize, mu_d: T) -> ThresholdVerdict<T> {
    verdict(
        CaseId::NaiveConcat,
        count(nx + ne),
        half_one_plus_inverse(mu_d),
        false,
    )
}

fn product_rule<T: Real>(
    case_id: CaseId,
    factor: usize,
    nx: usize,
    ne: usize,
    u: usize,
    v: usize,
    prof: &CoherenceProfile<T>,
) -> Result<ThresholdVerdict<T>> {
    let rhs = f_bound(count(u), count(v), prof)?;
    Ok(verdict(case_id, count(factor * nx * ne), rhs, false))
}

/// Both supports known: `nx ne < f(nx, ne)`.
pub fn case_i<T: Real>(nx: usize, ne: usize, prof: &CoherenceProfile<T>) -> Result<ThresholdVerdict<T>> {
    product_rule(CaseId::CaseI, 1, nx, ne, nx, ne, prof)
}

/// Error support known: `2 nx ne < f(2 nx, ne)`.
pub fn case_ii_e<T: Real>(nx: usize, ne: usize, prof: &CoherenceProfile<T>) -> Result<ThresholdVerdict<T>> {
    product_rule(CaseId::CaseIIE, 2, nx, ne, 2 * nx, ne, prof)
}

/// Signal support known: `2 nx ne < f(nx, 2 ne)`.
pub fn case_ii_x<T: Real>(nx: usize, ne: usize, prof: &CoherenceProfile<T>) -> Result<ThresholdVerdict<T>> {
    product_rule(CaseId::CaseIIX, 2, nx, ne, nx, 2 * ne, prof)
}

/// Error sparsity known: `4 nx ne < f(2 nx, 2 ne)`.
pub fn case_iii<T: Real>(nx: usize, ne: usize, prof: &CoherenceProfile<T>) -> Result<ThresholdVerdict<T>> {
    product_rule(CaseId::CaseIII, 4, nx, ne, 2 * nx, 2 * ne, prof)
}

/// Returns the profile with `mu_a <= mu_b` and whether a swap happened.
fn ordered<T: Real>(prof: &CoherenceProfile<T>) -> Result<(CoherenceProfile<T>, bool)> {
    if prof.mu_m <= T::zero() {
        return Err(Error::InvalidArgument(
            "thresholds need a positive mutual coherence".into(),
        ));
    }
    Ok(if prof.mu_a > prof.mu_b {
        (prof.swapped(), true)
    } else {
        (*prof, false)
    })
}

/// The function `f(x)` of the exhaustive-search threshold for the concatenation.
pub fn case_iv_f<T: Real>(x: T, prof: &CoherenceProfile<T>) -> T {
    let (a, b, d) = (prof.mu_a, prof.mu_b, prof.mu_d);
    let one = T::one();
    ((one + a) * (one + b) - x * b * (one + a)) / (x * (d * d - a * b) + a * (one + b))
}

/// Threshold value `(f(x*) + x*) / 2` on `nx + ne` for exhaustive search.
pub fn case_iv_p0_threshold<T: Real>(prof: &CoherenceProfile<T>) -> Result<(T, bool)> {
    let (p, swapped) = ordered(prof)?;
    let (a, b, d) = (p.mu_a, p.mu_b, p.mu_d);
    let one = T::one();
    let x_bord = (one + b) / (b + d * d);
    let x_stat = if a == b && b == d {
        one / d
    } else {
        let denom = d * d - a * b;
        if denom == T::zero() {
            return Err(Error::UnsupportedParameters(format!(
                "mu_d^2 = mu_a mu_b = {} makes the threshold undefined",
                denom + a * b
            )));
        }
        (d * ((one + a) * (one + b)).sqrt() - a - a * b) / denom
    };
    let x = x_bord.min(x_stat);
    let denom = x * (d * d - a * b) + a * (one + b);
    if denom == T::zero() {
        return Err(Error::UnsupportedParameters(
            "the threshold function has a zero denominator".into(),
        ));
    }
    Ok(((case_iv_f(x, &p) + x) * lit(0.5), swapped))
}

/// Nothing known, exhaustive search on `[A B]`: `nx + ne < (f(x*) + x*) / 2`.
pub fn case_iv_p0<T: Real>(nx: usize, ne: usize, prof: &CoherenceProfile<T>) -> Result<ThresholdVerdict<T>> {
    let (rhs, swapped) = case_iv_p0_threshold(prof)?;
    Ok(verdict(CaseId::CaseIVP0, count(nx + ne), rhs, swapped))
}

/// Threshold value on `nx + ne` for BP and OMP on `[A B]`.
pub fn case_iv_bp_threshold<T: Real>(prof: &CoherenceProfile<T>) -> Result<(T, bool)> {
    let (p, swapped) = ordered(prof)?;
    let (b, d) = (p.mu_b, p.mu_d);
    let one = T::one();
    let two: T = lit(2.0);
    let alpha = one + b;
    let beta = two * two.sqrt() * (d * (b + d)).sqrt();
    let first_branch = b < d && {
        let tau = (alpha * (two * d * (b + lit::<T>(3.0) * d + beta)).sqrt()
            - two * d
            - two * b * (alpha + d))
            / (two * (d * d - b * b));
        tau > one
    };
    let value = if first_branch {
        alpha * (beta - (d + lit::<T>(3.0) * b)) / (two * (d * d - b * b))
    } else {
        (one + two * d * d + lit::<T>(3.0) * b - d * alpha) / (two * (d * d + b))
    };
    Ok((value, swapped))
}

/// Nothing known, BP or OMP on `[A B]`.
pub fn case_iv_bp<T: Real>(nx: usize, ne: usize, prof: &CoherenceProfile<T>) -> Result<ThresholdVerdict<T>> {
    let (rhs, swapped) = case_iv_bp_threshold(prof)?;
    Ok(verdict(CaseId::CaseIVBP, count(nx + ne), rhs, swapped))
}

/// Evaluates the threshold of `case` at `(nx, ne)`.
pub fn evaluate<T: Real>(
    case: CaseId,
    nx: usize,
    ne: usize,
    prof: &CoherenceProfile<T>,
) -> Result<ThresholdVerdict<T>> {
    match case {
        CaseId::Classical => Ok(classical(nx, prof.mu_a)),
        CaseId::NaiveConcat => Ok(naive_concat(nx, ne, prof.mu_d)),
        CaseId::CaseI => case_i(nx, ne, prof),
        CaseId::CaseIIE => case_ii_e(nx, ne, prof),
        CaseId::CaseIIX => case_ii_x(nx, ne, prof),
        CaseId::CaseIII => case_iii(nx, ne, prof),
        CaseId::CaseIVP0 => case_iv_p0(nx, ne, prof),
        CaseId::CaseIVBP => case_iv_bp(nx, ne, prof),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ContourPoint {
    pub ne: usize,
    /// Largest `nx <= nx_limit` with a satisfied verdict, 0 if there is none.
    pub max_nx: usize,
}

/// For each `ne`, the largest `nx` in `0..=nx_limit` satisfying the threshold.
pub fn contour<T: Real>(
    case: CaseId,
    prof: &CoherenceProfile<T>,
    ne_values: impl IntoIterator<Item = usize>,
    nx_limit: usize,
) -> Result<Vec<ContourPoint>> {
    let mut out = Vec::new();
    for ne in ne_values {
        let mut max_nx = 0;
        for nx in 0..=nx_limit {
            if evaluate(case, nx, ne, prof)?.satisfied {
                max_nx = nx;
            }
        }
        out.push(ContourPoint { ne, max_nx });
    }
    Ok(out)
}

/// Writes `case_id,mu_a,mu_b,mu_m,mu_d,ne,max_nx` rows with a header.
pub fn write_contour_csv<T: Real, W: Write>(
    out: W,
    case: CaseId,
    prof: &CoherenceProfile<T>,
    points: &[ContourPoint],
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["case_id", "mu_a", "mu_b", "mu_m", "mu_d", "ne", "max_nx"])?;
    for p in points {
        w.write_record([
            case.as_str().to_string(),
            format!("{}", to_f64(prof.mu_a)),
            format!("{}", to_f64(prof.mu_b)),
            format!("{}", to_f64(prof.mu_m)),
            format!("{}", to_f64(prof.mu_d)),
            p.ne.to_string(),
            p.max_nx.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
