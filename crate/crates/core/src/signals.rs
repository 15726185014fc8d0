//! Sparse vectors, support sets and seeded random instances.

use std::io::{Read, Write};

use nalgebra::DVector;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::scalar::prelude::*;

/// A dense coefficient vector together with its support (0-based, sorted).
///
/// Entries outside the support are exactly zero, and every support entry is nonzero.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseVector<S: Scalar> {
    values: DVector<S>,
    support: Vec<usize>,
}

impl<S: Scalar> SparseVector<S> {
    pub fn zeros(len: usize) -> Self {
        Self {
            values: DVector::zeros(len),
            support: Vec::new(),
        }
    }

    /// Wraps a dense vector; the support is the set of exactly nonzero entries.
    pub fn from_dense(values: DVector<S>) -> Self {
        let support = (0..values.len())
            .filter(|&i| values[i] != S::zero())
            .collect();
        Self { values, support }
    }

    /// Builds a vector of length `len` from `(index, value)` pairs. Zero values are dropped.
    pub fn from_entries(len: usize, entries: &[(usize, S)]) -> Result<Self> {
        let mut values = DVector::zeros(len);
        for &(i, v) in entries {
            if i >= len {
                return Err(Error::Dimension(format!(
                    "index {i} out of range for length {len}"
                )));
            }
            values[i] = v;
        }
        Ok(Self::from_dense(values))
    }

    /// Zeroes every entry outside `keep`.
    pub fn restricted(values: &DVector<S>, keep: &[usize]) -> Self {
        let mut out = DVector::zeros(values.len());
        for &i in keep {
            out[i] = values[i];
        }
        Self::from_dense(out)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn support(&self) -> &[usize] {
        &self.support
    }

    /// Number of nonzero entries.
    pub fn nnz(&self) -> usize {
        self.support.len()
    }

    pub fn values(&self) -> &DVector<S> {
        &self.values
    }

    pub fn into_dense(self) -> DVector<S> {
        self.values
    }

    pub fn scaled(&self, a: S) -> Self {
        Self::from_dense(&self.values * a)
    }

    /// Sum of the entry moduli.
    pub fn l1_norm(&self) -> RealOf<S> {
        l1_norm(&self.values)
    }

    /// Writes `index,re,im` rows (header included) for the nonzero entries.
    /// The first line records the length as a comment.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "# length={}", self.len())?;
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["index", "re", "im"])?;
        for &i in &self.support {
            let v = self.values[i];
            w.write_record([
                i.to_string(),
                format!("{:e}", to_f64(v.real())),
                format!("{:e}", to_f64(v.imaginary())),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads the format produced by [`SparseVector::write_csv`]. Lines after the
    /// first that start with `#` are ignored.
    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut text = String::new();
        let mut input = input;
        input.read_to_string(&mut text)?;
        let first = text.lines().next().unwrap_or_default();
        let len: usize = first
            .strip_prefix("# length=")
            .and_then(|s| s.trim().parse().ok())
            .ok_or_else(|| Error::Parse {
                line: 1,
                msg: "expected `# length=<n>`".into(),
            })?;
        let body = text.split_once('\n').map(|(_, rest)| rest).unwrap_or("");
        let mut reader = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .from_reader(body.as_bytes());
        let mut entries = Vec::new();
        for (row, record) in reader.records().enumerate() {
            let record = record?;
            let line = row + 3;
            let field = |k: usize| -> Result<&str> {
                record.get(k).ok_or_else(|| Error::Parse {
                    line,
                    msg: "expected index,re,im".into(),
                })
            };
            let bad = |msg: String| Error::Parse { line, msg };
            let i: usize = field(0)?.trim().parse().map_err(|e| bad(format!("{e}")))?;
            let re: f64 = field(1)?.trim().parse().map_err(|e| bad(format!("{e}")))?;
            let im: f64 = field(2)?.trim().parse().map_err(|e| bad(format!("{e}")))?;
            let v = S::from_parts(lit(re), lit(im)).ok_or(Error::ComplexRequired)?;
            entries.push((i, v));
        }
        Self::from_entries(len, &entries)
    }
}

pub fn l1_norm<S: Scalar>(v: &DVector<S>) -> RealOf<S> {
    v.iter()
        .fold(RealOf::<S>::zero(), |acc, x| acc + x.modulus())
}

/// What the decoder knows about the signal and the corruption.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct KnowledgeDescriptor {
    pub x_support: Option<Vec<usize>>,
    pub e_support: Option<Vec<usize>>,
    pub nx_known: Option<usize>,
    pub ne_known: Option<usize>,
}

impl KnowledgeDescriptor {
    pub fn validate(&self) -> Result<()> {
        for (name, set, n) in [
            ("x", &self.x_support, self.nx_known),
            ("e", &self.e_support, self.ne_known),
        ] {
            if let (Some(set), Some(n)) = (set, n) {
                if set.len() != n {
                    return Err(Error::InvalidArgument(format!(
                        "{name} support has {} entries but its count is given as {n}",
                        set.len()
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Comb signal of length `m` with unit spikes at every multiple of `t` (0-based).
pub fn comb<S: Scalar>(m: usize, t: usize) -> Result<SparseVector<S>> {
    if m == 0 || t == 0 || m % t != 0 {
        return Err(Error::InvalidArgument(format!(
            "comb spacing {t} must divide the length {m}"
        )));
    }
    let values = DVector::from_fn(m, |k, _| if k % t == 0 { S::one() } else { S::zero() });
    Ok(SparseVector::from_dense(values))
}

/// `1 - ||P_S r||_1 / ||r||_1`: the fraction of l1 mass of `r` outside `set`.
pub fn concentration<S: Scalar>(r: &DVector<S>, set: &[usize]) -> Result<RealOf<S>> {
    let total = l1_norm(r);
    if total == RealOf::<S>::zero() {
        return Err(Error::ZeroVector);
    }
    let mut inside = RealOf::<S>::zero();
    let mut seen = vec![false; r.len()];
    for &i in set {
        if i >= r.len() {
            return Err(Error::Dimension(format!(
                "index {i} out of range for length {}",
                r.len()
            )));
        }
        if !seen[i] {
            seen[i] = true;
            inside += r[i].modulus();
        }
    }
    let eps = RealOf::<S>::one() - inside / total;
    Ok(eps.max(RealOf::<S>::zero()))
}

/// Distribution of the nonzero entries of random instances.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Amplitudes {
    /// Real standard Gaussian.
    #[default]
    RealGaussian,
    /// Circularly-symmetric complex Gaussian with unit variance.
    ComplexGaussian,
}

/// Mixes a master seed with a list of integers into an independent stream seed.
pub fn derive_seed(master: u64, parts: &[u64]) -> u64 {
    let mut h = splitmix(master ^ 0x5eed_0f5e_ed5e_ed00);
    for &p in parts {
        h = splitmix(h ^ splitmix(p.wrapping_add(0x9e37_79b9_7f4a_7c15)));
    }
    h
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniformly random support of size `k` in `0..n`, sorted.
pub fn random_support<R: Rng + ?Sized>(rng: &mut R, n: usize, k: usize) -> Result<Vec<usize>> {
    if k > n {
        return Err(Error::InvalidArgument(format!(
            "cannot choose {k} indices out of {n}"
        )));
    }
    let mut s = sample(rng, n, k).into_vec();
    s.sort_unstable();
    Ok(s)
}

/// Random sparse vector with a uniform support of size `k`.
pub fn random_sparse<S: Scalar, R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
    k: usize,
    amplitudes: Amplitudes,
) -> Result<SparseVector<S>> {
    if amplitudes == Amplitudes::ComplexGaussian && !S::IS_COMPLEX {
        return Err(Error::ComplexRequired);
    }
    let support = random_support(rng, n, k)?;
    let mut values = DVector::zeros(n);
    for &i in &support {
        values[i] = loop {
            // a Gaussian draw is zero with probability zero, but the support invariant must hold
            let v = draw::<S, R>(rng, amplitudes);
            if v != S::zero() {
                break v;
            }
        };
    }
    Ok(SparseVector { values, support })
}

fn draw<S: Scalar, R: Rng + ?Sized>(rng: &mut R, amplitudes: Amplitudes) -> S {
    match amplitudes {
        Amplitudes::RealGaussian => {
            let re: f64 = StandardNormal.sample(rng);
            S::from_real(lit(re))
        }
        Amplitudes::ComplexGaussian => {
            let h = std::f64::consts::FRAC_1_SQRT_2;
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            S::from_parts(lit(re * h), lit(im * h)).expect("complex scalar")
        }
    }
}

/// Random `(x, e)` pair with `nx` and `ne` nonzeros, deterministic in `seed`.
pub fn random_instance<S: Scalar>(
    na: usize,
    nb: usize,
    nx: usize,
    ne: usize,
    seed: u64,
    amplitudes: Amplitudes,
) -> Result<(SparseVector<S>, SparseVector<S>)> {
    if nx > na || ne > nb {
        return Err(Error::InvalidArgument(format!(
            "sparsity ({nx}, {ne}) exceeds dimensions ({na}, {nb})"
        )));
    }
    let mut rng = rng_from_seed(seed);
    let x = random_sparse(&mut rng, na, nx, amplitudes)?;
    let e = random_sparse(&mut rng, nb, ne, amplitudes)?;
    Ok((x, e))
}
