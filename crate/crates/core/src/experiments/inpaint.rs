use std::path::Path;

use image::codecs::pnm::{PnmEncoder, PnmSubtype, SampleEncoding};
use image::{GrayImage, ImageEncoder};
use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::Rng;

use crate::dictionaries::{build_dct2d, build_haar2d, build_identity, Dictionary};
use crate::error::{Error, Result};
use crate::recovery::{
    recover_case_i, recover_case_ii_e, recover_case_iv, DegeneratePolicy, Method, RecoveryOptions,
};
use crate::signals::rng_from_seed;
use crate::solvers::BpOptions;

/// Gray value written over masked pixels.
pub const MAX_GRAY: f64 = 255.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Transform {
    Dct,
    /// Separable Haar wavelet over the given number of octaves.
    Haar { octaves: usize },
}

impl Transform {
    pub fn dictionary(self, side: usize) -> Result<Dictionary<f64>> {
        match self {
            Transform::Dct => build_dct2d(side),
            Transform::Haar { octaves } => build_haar2d(side, octaves),
        }
    }
}

impl std::str::FromStr for Transform {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "dct" => Ok(Transform::Dct),
            "haar" => Ok(Transform::Haar { octaves: 3 }),
            _ => Err(Error::InvalidArgument(format!("unknown transform `{s}`"))),
        }
    }
}

/// What the recovery is told about the corruption.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InpaintKnowledge {
    /// Image support and mask known.
    CaseI,
    /// Mask known.
    CaseIIE,
    /// Nothing known.
    CaseIV,
}

impl std::str::FromStr for InpaintKnowledge {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "caseI" | "casei" | "I" => Ok(InpaintKnowledge::CaseI),
            "caseII_E" | "caseii_e" | "II_E" => Ok(InpaintKnowledge::CaseIIE),
            "caseIV" | "caseiv" | "IV" => Ok(InpaintKnowledge::CaseIV),
            _ => Err(Error::InvalidArgument(format!(
                "inpainting supports caseI, caseII_E and caseIV, got `{s}`"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InpaintOptions {
    pub transform: Transform,
    pub keep_fraction: f64,
    pub knowledge: InpaintKnowledge,
    pub method: Method,
    pub degenerate: DegeneratePolicy,
    pub bp: BpOptions,
}

impl Default for InpaintOptions {
    fn default() -> Self {
        Self {
            transform: Transform::Dct,
            keep_fraction: 0.15,
            knowledge: InpaintKnowledge::CaseIIE,
            method: Method::Bp,
            degenerate: DegeneratePolicy::Drop,
            bp: BpOptions {
                max_iter: 4000,
                ..BpOptions::default()
            },
        }
    }
}

#[derive(Debug, Clone)]
pub struct InpaintResult {
    pub sparsified: DMatrix<f64>,
    pub corrupted: DMatrix<f64>,
    pub restored: DMatrix<f64>,
    /// Error of `restored` relative to `sparsified`, in dB.
    pub mse_db: f64,
    /// Error of `corrupted` relative to `sparsified`, in dB.
    pub corrupted_mse_db: f64,
    /// Number of transform coefficients kept.
    pub nx: usize,
    /// Number of masked pixels.
    pub ne: usize,
    /// Transform atoms annihilated by the mask projection.
    pub dropped_columns: Vec<usize>,
    pub converged: bool,
}

/// `10 log10(||r - t||^2 / ||t||^2)`.
pub fn mse_db(restored: &DMatrix<f64>, truth: &DMatrix<f64>) -> f64 {
    let num = (restored - truth).norm_squared();
    let den = truth.norm_squared();
    10.0 * (num / den).log10()
}

fn vectorize(img: &DMatrix<f64>) -> DVector<f64> {
    let side = img.ncols();
    DVector::from_fn(img.nrows() * side, |i, _| img[(i / side, i % side)])
}

fn unvectorize(v: &DVector<f64>, rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |r, c| v[r * cols + c])
}

/// Indices of the `k` largest magnitudes, ties broken towards lower indices.
fn largest(v: &DVector<f64>, k: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&i, &j| v[j].abs().total_cmp(&v[i].abs()).then(i.cmp(&j)));
    idx.truncate(k);
    idx.sort_unstable();
    idx
}

/// Sparsify `image` in the transform, overwrite `mask` with [`MAX_GRAY`] and
/// restore it. Pixels are indexed row-major.
pub fn inpaint_experiment(image: &DMatrix<f64>, mask: &[usize], opts: &InpaintOptions) -> Result<InpaintResult> {
    let side = image.nrows();
    if image.ncols() != side || !side.is_power_of_two() {
        return Err(Error::Dimension(format!(
            "inpainting needs a square power-of-two image, got {}x{}",
            image.nrows(),
            image.ncols()
        )));
    }
    if !(0.0..=1.0).contains(&opts.keep_fraction) {
        return Err(Error::InvalidArgument("keep fraction must lie in [0, 1]".into()));
    }
    let m = side * side;
    let mut mask = mask.to_vec();
    mask.sort_unstable();
    mask.dedup();
    if let Some(&i) = mask.iter().find(|&&i| i >= m) {
        return Err(Error::Dimension(format!("mask pixel {i} outside a {side}x{side} image")));
    }

    let a = opts.transform.dictionary(side)?;
    let b = build_identity::<f64>(m)?;
    let coeffs = a.apply_adjoint(&vectorize(image))?;
    let keep = largest(&coeffs, (opts.keep_fraction * m as f64).round() as usize);
    let mut x = DVector::zeros(m);
    for &k in &keep {
        x[k] = coeffs[k];
    }
    let s = a.apply(&x)?;
    let mut z = s.clone();
    for &i in &mask {
        z[i] = MAX_GRAY;
    }

    let ropts = RecoveryOptions {
        bp: opts.bp,
        degenerate: opts.degenerate,
        check_uniqueness: false,
    };
    let rec = match opts.knowledge {
        InpaintKnowledge::CaseI => recover_case_i(&a, &b, &z, &keep, &mask)?,
        InpaintKnowledge::CaseIIE => recover_case_ii_e(&a, &b, &z, &mask, opts.method, Some(keep.len()), &ropts)?,
        InpaintKnowledge::CaseIV => {
            recover_case_iv(&a, &b, &z, opts.method, Some(keep.len() + mask.len()), &ropts)?
        }
    };
    let restored = a.apply(&rec.x)?;

    let sparsified = unvectorize(&s, side, side);
    let corrupted = unvectorize(&z, side, side);
    let restored = unvectorize(&restored, side, side);
    Ok(InpaintResult {
        mse_db: mse_db(&restored, &sparsified),
        corrupted_mse_db: mse_db(&corrupted, &sparsified),
        sparsified,
        corrupted,
        restored,
        nx: keep.len(),
        ne: mask.len(),
        dropped_columns: rec.dropped_columns,
        converged: rec.report.converged,
    })
}

/// Smooth shading with a few hard-edged shapes, values within `[16, 224]`.
pub fn synthetic_image(side: usize) -> DMatrix<f64> {
    let s = side as f64;
    DMatrix::from_fn(side, side, |r, c| {
        let (y, x) = (r as f64 / s, c as f64 / s);
        let mut v = 60.0 + 50.0 * x + 30.0 * (std::f64::consts::PI * y).sin();
        let (dy, dx) = (y - 0.35, x - 0.62);
        if dx * dx + dy * dy < 0.04 {
            v = 190.0 - 60.0 * (dx * dx + dy * dy) / 0.04;
        }
        if (0.55..0.85).contains(&y) && (0.12..0.45).contains(&x) {
            v = 40.0 + 40.0 * y;
        }
        if y > 0.7 + 0.2 * x {
            v += 25.0;
        }
        v.clamp(16.0, 224.0)
    })
}

/// Seeded mask that looks like lines of block letters and covers exactly
/// `round(fraction * side^2)` pixels.
///
/// Glyph strokes are 2x2 blocks on even coordinates.
pub fn text_mask(side: usize, fraction: f64, seed: u64) -> Result<Vec<usize>> {
    if !(0.0..=1.0).contains(&fraction) {
        return Err(Error::InvalidArgument("mask fraction must lie in [0, 1]".into()));
    }
    if side < 2 || side % 2 != 0 {
        return Err(Error::Dimension("text mask needs an even side length".into()));
    }
    let target = (fraction * (side * side) as f64).round() as usize;
    let mut rng = rng_from_seed(seed);
    let blocks = side / 2;
    // Text lines are 5 block rows tall with 2 blank block rows between them;
    // glyphs are 3 block columns wide with 1 blank column.
    let mut strokes = Vec::new();
    let mut spare = Vec::new();
    for by in 0..blocks {
        let in_line = by % 7 >= 1 && by % 7 <= 5;
        for bx in 0..blocks {
            let in_glyph = bx % 4 != 3;
            let block = (by, bx);
            if in_line && in_glyph && rng.random_bool(0.55) {
                strokes.push(block);
            } else {
                spare.push(block);
            }
        }
    }
    spare.shuffle(&mut rng);
    let mut mask = Vec::with_capacity(target);
    for (by, bx) in strokes.into_iter().chain(spare) {
        for (dy, dx) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
            if mask.len() < target {
                mask.push((2 * by + dy) * side + 2 * bx + dx);
            }
        }
    }
    mask.sort_unstable();
    Ok(mask)
}

/// Reads an 8-bit grayscale image (any format the decoder recognises, including PGM).
pub fn read_pgm<P: AsRef<Path>>(path: P) -> Result<DMatrix<f64>> {
    let img = image::open(path)?.into_luma8();
    let (w, h) = img.dimensions();
    Ok(DMatrix::from_fn(h as usize, w as usize, |r, c| {
        f64::from(img.get_pixel(c as u32, r as u32)[0])
    }))
}

/// Writes a binary (P5) PGM, rounding and clamping to `[0, 255]`.
pub fn write_pgm<P: AsRef<Path>>(path: P, img: &DMatrix<f64>) -> Result<()> {
    let (h, w) = (img.nrows() as u32, img.ncols() as u32);
    let gray = GrayImage::from_fn(w, h, |c, r| {
        image::Luma([img[(r as usize, c as usize)].round().clamp(0.0, 255.0) as u8])
    });
    let file = std::io::BufWriter::new(std::fs::File::create(path)?);
    PnmEncoder::new(file)
        .with_subtype(PnmSubtype::Graymap(SampleEncoding::Binary))
        .write_image(gray.as_raw(), w, h, image::ExtendedColorType::L8)?;
    Ok(())
}
