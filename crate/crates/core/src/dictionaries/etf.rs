use nalgebra::{DMatrix, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::Dictionary;
use crate::error::{Error, Result};
use crate::scalar::prelude::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EtfOptions {
    pub iterations: usize,
    pub seed: u64,
}

impl Default for EtfOptions {
    fn default() -> Self {
        Self {
            iterations: 5000,
            seed: 0,
        }
    }
}

/// Lower bound `sqrt((N - M) / (M (N - 1)))` on the coherence of any `M x N` unit-norm frame.
pub fn welch_bound<T: Real>(m: usize, n: usize) -> T {
    if n <= 1 || n <= m {
        return T::zero();
    }
    (count::<T>(n - m) / (count::<T>(m) * count::<T>(n - 1))).sqrt()
}

/// Approximate equiangular tight frame by alternating projections on the Gram matrix.
///
/// Starts from a seeded Gaussian matrix and alternates between clipping the
/// off-diagonal Gram entries to the Welch bound and projecting onto Gram
/// matrices of unit-norm tight frames (rank `M`, eigenvalues `N / M`).
pub fn build_etf_approx<S: Scalar>(m: usize, n: usize, opts: EtfOptions) -> Result<Dictionary<S>> {
    if m == 0 || n < m {
        return Err(Error::Dimension(format!(
            "approximate ETF needs 1 <= M <= N, got M = {m}, N = {n}"
        )));
    }
    if opts.iterations == 0 {
        return Err(Error::InvalidArgument("iteration count must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let init = DMatrix::<S>::from_fn(m, n, |_, _| gaussian::<S>(&mut rng));
    let mut x = Dictionary::new(init, "etf-init")?.into_matrix();

    let welch = welch_bound::<RealOf<S>>(m, n);
    let alpha = count::<RealOf<S>>(n) / count(m);
    let mut gram = x.ad_mul(&x);
    for _ in 0..opts.iterations {
        clip_gram(&mut gram, welch);
        let top = top_eigenvectors(gram, m);
        gram = top.ad_mul(&top) * S::from_real(alpha);
        x = top;
    }
    x *= S::from_real(alpha.sqrt());
    Ok(Dictionary::new(x, format!("etf{m}x{n}"))?)
}

fn gaussian<S: Scalar>(rng: &mut ChaCha8Rng) -> S {
    let re: f64 = StandardNormal.sample(rng);
    if S::IS_COMPLEX {
        let im: f64 = StandardNormal.sample(rng);
        S::from_parts(lit(re), lit(im)).expect("complex scalar")
    } else {
        S::from_real(lit(re))
    }
}

fn clip_gram<S: Scalar>(gram: &mut DMatrix<S>, bound: RealOf<S>) {
    let n = gram.nrows();
    for j in 0..n {
        for i in 0..n {
            if i == j {
                gram[(i, j)] = S::one();
                continue;
            }
            let g = gram[(i, j)];
            let modulus = g.modulus();
            if modulus > bound {
                gram[(i, j)] = g * S::from_real(bound / modulus);
            }
        }
    }
}

/// Rows are the conjugated leading eigenvectors, so `top^H top` is the rank-`m` spectral projector.
fn top_eigenvectors<S: Scalar>(gram: DMatrix<S>, m: usize) -> DMatrix<S> {
    let eig = SymmetricEigen::new(gram);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .partial_cmp(&eig.eigenvalues[a])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    let n = eig.eigenvectors.nrows();
    DMatrix::from_fn(m, n, |r, c| eig.eigenvectors[(c, order[r])].conjugate())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dictionaries::coherence;

    #[test]
    fn welch_bound_values() {
        assert_eq!(welch_bound::<f64>(4, 4), 0.0);
        assert!((welch_bound::<f64>(2, 3) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn square_case_is_orthonormal() {
        let d = build_etf_approx::<f64>(6, 6, EtfOptions { iterations: 20, seed: 3 }).unwrap();
        assert!(coherence(&d) < 1e-10);
    }

    #[test]
    fn deterministic_per_seed() {
        let opts = EtfOptions { iterations: 50, seed: 11 };
        let a = build_etf_approx::<f64>(3, 4, opts).unwrap();
        let b = build_etf_approx::<f64>(3, 4, opts).unwrap();
        assert_eq!(a.matrix(), b.matrix());
        let c = build_etf_approx::<f64>(3, 4, EtfOptions { seed: 12, ..opts }).unwrap();
        assert_ne!(a.matrix(), c.matrix());
    }

    #[test]
    fn three_vectors_in_the_plane_reach_the_welch_bound() {
        // The Mercedes-Benz frame is a real ETF with coherence 1/2.
        let d = build_etf_approx::<f64>(2, 3, EtfOptions { iterations: 500, seed: 0 }).unwrap();
        assert!((coherence(&d) - 0.5).abs() < 1e-6);
    }

    #[test]
    fn rejects_wide_inputs() {
        assert!(build_etf_approx::<f64>(5, 4, EtfOptions::default()).is_err());
    }
}
