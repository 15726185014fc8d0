use nalgebra::DMatrix;

use super::Dictionary;
use crate::error::{Error, Result};
use crate::scalar::prelude::*;

/// Unitary DFT matrix `[F]_{k,l} = exp(-2 pi i k l / M) / sqrt(M)` (0-based indices).
///
/// Needs complex scalars for `M > 2`.
pub fn build_dft<S: Scalar>(m: usize) -> Result<Dictionary<S>> {
    positive(m, "DFT size")?;
    let scale = RealOf::<S>::one() / count::<RealOf<S>>(m).sqrt();
    let mut entries = DMatrix::<S>::zeros(m, m);
    for k in 0..m {
        for l in 0..m {
            // Reduce the phase index first to keep the angle small.
            let phase = (k * l) % m;
            let angle = -RealOf::<S>::two_pi() * count::<RealOf<S>>(phase) / count(m);
            let (sin, cos) = angle.sin_cos();
            entries[(k, l)] =
                S::from_parts(cos * scale, clean(sin) * scale).ok_or(Error::ComplexRequired)?;
        }
    }
    Ok(Dictionary::new(entries, format!("dft{m}"))?.with_frame_bound(RealOf::<S>::one()))
}

// sin(-pi) and friends are ~1e-16 rather than zero; real-valued DFTs (M <= 2) need exact zeros.
fn clean<T: Real>(x: T) -> T {
    if x.abs() < lit(1e-15) {
        T::zero()
    } else {
        x
    }
}

pub fn build_identity<S: Scalar>(m: usize) -> Result<Dictionary<S>> {
    positive(m, "identity size")?;
    Ok(Dictionary::new(DMatrix::<S>::identity(m, m), format!("identity{m}"))?
        .with_frame_bound(RealOf::<S>::one()))
}

/// Normalized Sylvester-Hadamard basis, `H[i][j] = (-1)^{popcount(i & j)} / sqrt(M)`.
pub fn build_hadamard<S: Scalar>(m: usize) -> Result<Dictionary<S>> {
    power_of_two(m, "Hadamard size")?;
    let scale = RealOf::<S>::one() / count::<RealOf<S>>(m).sqrt();
    let entries = DMatrix::<S>::from_fn(m, m, |i, j| {
        let v = if (i & j).count_ones() % 2 == 0 {
            scale
        } else {
            -scale
        };
        S::from_real(v)
    });
    Ok(Dictionary::new(entries, format!("hadamard{m}"))?.with_frame_bound(RealOf::<S>::one()))
}

/// Orthonormal DCT-II analysis matrix `C[k][n] = a_k cos(pi (2n+1) k / 2N)`.
pub(crate) fn dct_matrix<T: Real>(n: usize) -> DMatrix<T> {
    let nn = count::<T>(n);
    DMatrix::from_fn(n, n, |k, i| {
        let a = if k == 0 {
            (T::one() / nn).sqrt()
        } else {
            (lit::<T>(2.0) / nn).sqrt()
        };
        let arg = T::pi() * count::<T>((2 * i + 1) * k) / (lit::<T>(2.0) * nn);
        a * arg.cos()
    })
}

/// Orthonormal multi-level Haar analysis matrix; rows are the analysis atoms.
pub(crate) fn haar_matrix<T: Real>(n: usize, octaves: usize) -> DMatrix<T> {
    let mut w = DMatrix::<T>::zeros(n, n);
    let inv_sqrt2 = T::one() / lit::<T>(2.0).sqrt();
    let mut buf = vec![T::zero(); n];
    for j in 0..n {
        let mut v = vec![T::zero(); n];
        v[j] = T::one();
        let mut len = n;
        for _ in 0..octaves {
            let half = len / 2;
            for i in 0..half {
                buf[i] = (v[2 * i] + v[2 * i + 1]) * inv_sqrt2;
                buf[half + i] = (v[2 * i] - v[2 * i + 1]) * inv_sqrt2;
            }
            v[..len].copy_from_slice(&buf[..len]);
            len = half;
        }
        for i in 0..n {
            w[(i, j)] = v[i];
        }
    }
    w
}

/// Synthesis dictionary of a separable 2-D transform `X = W Y W^T` acting on
/// row-major vectorized `side x side` images: atom `(k1, k2)` sits in column
/// `k1 * side + k2` and has entries `W[k1][n1] W[k2][n2]`.
fn separable_2d<S: Scalar>(w: &DMatrix<RealOf<S>>) -> DMatrix<S> {
    let side = w.nrows();
    let m = side * side;
    DMatrix::<S>::from_fn(m, m, |row, col| {
        let (n1, n2) = (row / side, row % side);
        let (k1, k2) = (col / side, col % side);
        S::from_real(w[(k1, n1)] * w[(k2, n2)])
    })
}

/// 2-D DCT basis for `side x side` images, as a `side^2 x side^2` dictionary.
pub fn build_dct2d<S: Scalar>(side: usize) -> Result<Dictionary<S>> {
    power_of_two(side, "DCT side")?;
    let entries = separable_2d::<S>(&dct_matrix::<RealOf<S>>(side));
    Ok(Dictionary::new(entries, format!("dct2d{side}"))?.with_frame_bound(RealOf::<S>::one()))
}

/// Separable 2-D Haar wavelet basis with `octaves` decomposition levels.
pub fn build_haar2d<S: Scalar>(side: usize, octaves: usize) -> Result<Dictionary<S>> {
    power_of_two(side, "Haar side")?;
    if octaves == 0 || (1usize << octaves) > side {
        return Err(Error::InvalidArgument(format!(
            "{octaves} octaves do not fit a side of {side}"
        )));
    }
    let entries = separable_2d::<S>(&haar_matrix::<RealOf<S>>(side, octaves));
    Ok(Dictionary::new(entries, format!("haar2d{side}"))?.with_frame_bound(RealOf::<S>::one()))
}

fn positive(n: usize, what: &str) -> Result<()> {
    if n == 0 {
        return Err(Error::Dimension(format!("{what} must be positive")));
    }
    Ok(())
}

fn power_of_two(n: usize, what: &str) -> Result<()> {
    if !n.is_power_of_two() {
        return Err(Error::Dimension(format!(
            "{what} must be a power of two, got {n}"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dictionaries::{coherence, concat, mutual_coherence, profile};
    use num_complex::Complex64;

    fn gram_error<S: Scalar>(d: &Dictionary<S>) -> f64 {
        let g = d.gram();
        let n = g.nrows();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                let target = if i == j { S::one() } else { S::zero() };
                worst = worst.max(crate::scalar::to_f64((g[(i, j)] - target).modulus()));
            }
        }
        worst
    }

    #[test]
    fn dft_small_cases() {
        let f1 = build_dft::<Complex64>(1).unwrap();
        assert_eq!(f1.matrix()[(0, 0)], Complex64::new(1.0, 0.0));
        let f2 = build_dft::<f64>(2).unwrap();
        let h = 1.0 / 2f64.sqrt();
        assert!((f2.matrix()[(1, 1)] + h).abs() < 1e-15);
        assert!((f2.matrix()[(0, 1)] - h).abs() < 1e-15);
        assert!(matches!(build_dft::<f64>(4), Err(Error::ComplexRequired)));
    }

    #[test]
    fn dft64_is_unitary() {
        let f = build_dft::<Complex64>(64).unwrap();
        assert!(gram_error(&f) < 1e-10);
        assert!(f.max_column_norm_deviation() < 1e-12);
    }

    #[test]
    fn identity_and_hadamard() {
        let i4 = build_identity::<f64>(4).unwrap();
        assert_eq!(coherence(&i4), 0.0);
        let h2 = build_hadamard::<f64>(2).unwrap();
        let s = 1.0 / 2f64.sqrt();
        assert!((h2.matrix()[(1, 1)] + s).abs() < 1e-15);
        assert!(coherence(&h2) < 1e-15);
        assert!(build_hadamard::<f64>(6).is_err());
        assert!(gram_error(&build_hadamard::<f64>(64).unwrap()) < 1e-10);
    }

    #[test]
    fn two_dimensional_bases_are_orthonormal() {
        assert!(gram_error(&build_haar2d::<f64>(8, 3).unwrap()) < 1e-10);
        assert!(gram_error(&build_dct2d::<f64>(8).unwrap()) < 1e-10);
        assert!(build_haar2d::<f64>(6, 1).is_err());
        assert!(build_haar2d::<f64>(4, 3).is_err());
        assert!(build_dct2d::<f64>(12).is_err());
    }

    #[test]
    fn haar_fine_scale_atoms_have_four_entries() {
        let h = build_haar2d::<f64>(8, 3).unwrap();
        let i = build_identity::<f64>(64).unwrap();
        assert!((mutual_coherence(&h, &i).unwrap() - 0.5).abs() < 1e-12);
        // atom (7, 7) is the product of two finest-scale 1-D details
        let col = h.column(7 * 8 + 7);
        assert_eq!(col.iter().filter(|v| v.abs() > 1e-12).count(), 4);
    }

    #[test]
    fn fourier_identity_coherences() {
        let f = build_dft::<Complex64>(64).unwrap();
        let i = build_identity::<Complex64>(64).unwrap();
        let p = profile(&f, &i).unwrap();
        assert!(p.mu_a < 1e-12 && p.mu_b == 0.0);
        assert!((p.mu_m - 0.125).abs() < 1e-12);
        assert!((coherence(&concat(&f, &i).unwrap()) - 0.125).abs() < 1e-12);
        let h = build_hadamard::<Complex64>(64).unwrap();
        assert_eq!(mutual_coherence(&h, &i).unwrap(), 0.125);
    }
}
