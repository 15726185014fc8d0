//! Dictionary and range mini-languages.

use sparsecorr::dictionaries::*;
use sparsecorr::{Dictionary64, Error, Result, C64};

#[derive(Debug, Clone, PartialEq)]
pub enum DictSpec {
    Dft(usize),
    Identity(usize),
    Hadamard(usize),
    Dct2d(usize),
    Haar2d { side: usize, octaves: usize },
    Etf { m: usize, n: usize, seed: u64, iterations: usize },
    /// Second half of an `M x 2N` frame whose first half is the other dictionary.
    EtfPartner,
    File(String),
}

fn bad(spec: &str, why: &str) -> Error {
    Error::InvalidArgument(format!("dictionary spec `{spec}`: {why}"))
}

fn num<T: std::str::FromStr>(spec: &str, s: &str) -> Result<T> {
    s.trim().parse().map_err(|_| bad(spec, &format!("`{s}` is not a number")))
}

impl std::str::FromStr for DictSpec {
    type Err = Error;

    fn from_str(spec: &str) -> Result<Self> {
        if spec == "etf-partner" {
            return Ok(DictSpec::EtfPartner);
        }
        let (name, rest) = spec.split_once(':').ok_or_else(|| bad(spec, "expected name:size"))?;
        match name {
            "file" => Ok(DictSpec::File(rest.to_string())),
            "dft" => Ok(DictSpec::Dft(num(spec, rest)?)),
            "identity" => Ok(DictSpec::Identity(num(spec, rest)?)),
            "hadamard" => Ok(DictSpec::Hadamard(num(spec, rest)?)),
            "dct2d" => Ok(DictSpec::Dct2d(num(spec, rest)?)),
            "haar2d" => {
                let mut parts = rest.split(':');
                let side = num(spec, parts.next().unwrap_or_default())?;
                let octaves = match parts.next() {
                    Some(o) => num(spec, o)?,
                    None => 3,
                };
                if parts.next().is_some() {
                    return Err(bad(spec, "expected haar2d:side[:octaves]"));
                }
                Ok(DictSpec::Haar2d { side, octaves })
            }
            "etf" => {
                let mut parts = rest.split(':');
                let size = parts.next().unwrap_or_default();
                let (m, n) = size.split_once('x').ok_or_else(|| bad(spec, "expected etf:MxN"))?;
                let defaults = EtfOptions::default();
                let (mut seed, mut iterations) = (defaults.seed, defaults.iterations);
                for p in parts {
                    match p.split_once('=') {
                        Some(("seed", v)) => seed = num(spec, v)?,
                        Some(("iter", v)) => iterations = num(spec, v)?,
                        _ => return Err(bad(spec, &format!("unknown parameter `{p}`"))),
                    }
                }
                Ok(DictSpec::Etf {
                    m: num(spec, m)?,
                    n: num(spec, n)?,
                    seed,
                    iterations,
                })
            }
            _ => Err(bad(spec, &format!("unknown dictionary `{name}`"))),
        }
    }
}

impl DictSpec {
    fn build(&self) -> Result<Dictionary64> {
        match *self {
            DictSpec::Dft(m) => build_dft(m),
            DictSpec::Identity(m) => build_identity(m),
            DictSpec::Hadamard(m) => build_hadamard(m),
            DictSpec::Dct2d(side) => build_dct2d(side),
            DictSpec::Haar2d { side, octaves } => build_haar2d(side, octaves),
            DictSpec::Etf { m, n, seed, iterations } => {
                build_etf_approx(m, n, EtfOptions { iterations, seed })
            }
            DictSpec::EtfPartner => Err(Error::InvalidArgument(
                "etf-partner is only valid for --b with an etf spec for --a".into(),
            )),
            DictSpec::File(ref path) => {
                Dictionary64::new(read_matrix_file::<C64>(path)?, format!("file:{path}"))
            }
        }
    }
}

/// Builds the pair `(A, B)`.
pub fn build_pair(a: &str, b: &str) -> Result<(Dictionary64, Dictionary64)> {
    let sa: DictSpec = a.parse()?;
    let sb: DictSpec = b.parse()?;
    match (&sa, &sb) {
        (DictSpec::Etf { m, n, seed, iterations }, DictSpec::EtfPartner) => {
            let full = build_etf_approx::<C64>(*m, 2 * n, EtfOptions { iterations: *iterations, seed: *seed })?;
            let da = Dictionary64::new(full.matrix().columns(0, *n).into_owned(), a)?;
            let db = Dictionary64::new(full.matrix().columns(*n, *n).into_owned(), "etf-partner")?;
            Ok((da, db))
        }
        _ => Ok((sa.build()?.with_label(a), sb.build()?.with_label(b))),
    }
}

/// Parses `k`, `lo..hi` (exclusive), `lo..=hi`, or a comma-separated list.
pub fn parse_range(s: &str) -> Result<Vec<usize>> {
    let bad = || Error::InvalidArgument(format!("range `{s}`: expected k, lo..hi, lo..=hi or a,b,c"));
    let n = |t: &str| t.trim().parse::<usize>().map_err(|_| bad());
    if let Some((lo, hi)) = s.split_once("..=") {
        return Ok((n(lo)?..=n(hi)?).collect());
    }
    if let Some((lo, hi)) = s.split_once("..") {
        return Ok((n(lo)?..n(hi)?).collect());
    }
    s.split(',').map(n).collect()
}
