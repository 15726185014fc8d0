use std::fs;
use std::path::{Path, PathBuf};

use clap::Args;
use nalgebra::{DMatrix, DVector};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use sparsecorr::dictionaries::{profile, read_matrix_file, write_matrix};
use sparsecorr::experiments::*;
use sparsecorr::guarantees::{self, CaseId};
use sparsecorr::recovery::*;
use sparsecorr::signals::{random_instance, Amplitudes, SparseVector};
use sparsecorr::solvers::BpOptions;
use sparsecorr::{CoherenceProfile64, Error, C64};

use crate::config::{header, load_section, merge};
use crate::specs::{build_pair, parse_range};
use crate::CliError;

pub struct Context {
    pub config: Option<String>,
    pub out_dir: Option<PathBuf>,
}

impl Context {
    fn resolve<F: Serialize, R: DeserializeOwned>(&self, section: &str, flags: &F) -> Result<R, CliError> {
        let file = match &self.config {
            Some(text) => load_section(text, section)?,
            None => toml::Table::new(),
        };
        merge(flags, file)
    }

    /// Output directory, created on demand; `.` when none was given.
    fn dir(&self) -> Result<PathBuf, CliError> {
        let d = self.out_dir.clone().unwrap_or_else(|| PathBuf::from("."));
        fs::create_dir_all(&d)?;
        Ok(d)
    }

    /// Writes `header + body` to `name` in the output directory, or to stdout
    /// when no directory was given.
    fn emit(&self, name: &str, header: &str, body: &str) -> Result<(), CliError> {
        match &self.out_dir {
            Some(_) => {
                let path = self.dir()?.join(name);
                fs::write(&path, format!("{header}{body}"))?;
                println!("wrote {}", path.display());
            }
            None => print!("{header}{body}"),
        }
        Ok(())
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn required<'a>(v: &'a str, flag: &str) -> Result<&'a str, CliError> {
    if v.is_empty() {
        Err(usage(format!("missing {flag}")))
    } else {
        Ok(v)
    }
}

fn parse<T: std::str::FromStr<Err = Error>>(s: &str) -> Result<T, CliError> {
    Ok(s.parse()?)
}

fn amplitudes(s: &str) -> Result<Amplitudes, CliError> {
    match s {
        "real" => Ok(Amplitudes::RealGaussian),
        "complex" => Ok(Amplitudes::ComplexGaussian),
        _ => Err(usage(format!("amplitudes must be real or complex, got `{s}`"))),
    }
}

fn degenerate(s: &str) -> Result<DegeneratePolicy, CliError> {
    match s {
        "reject" => Ok(DegeneratePolicy::Reject),
        "drop" => Ok(DegeneratePolicy::Drop),
        _ => Err(usage(format!("degenerate must be reject or drop, got `{s}`"))),
    }
}

fn case_id(s: &str) -> Result<CaseId, CliError> {
    if s.eq_ignore_ascii_case("caseIV") {
        return Ok(CaseId::CaseIVBP);
    }
    parse(s)
}

/// Inserts the comment lines `header` after the first line of `text`.
fn after_first_line(text: &[u8], header: &str) -> Vec<u8> {
    let cut = text.iter().position(|&b| b == b'\n').map_or(text.len(), |i| i + 1);
    let mut out = text[..cut].to_vec();
    out.extend_from_slice(header.as_bytes());
    out.extend_from_slice(&text[cut..]);
    out
}

fn write_sparse(path: &Path, v: &SparseVector<C64>, header: &str) -> Result<(), CliError> {
    let mut buf = Vec::new();
    v.write_csv(&mut buf)?;
    fs::write(path, after_first_line(&buf, header))?;
    Ok(())
}

fn read_sparse(path: &str) -> Result<SparseVector<C64>, CliError> {
    Ok(SparseVector::read_csv(fs::File::open(path)?)?)
}

fn write_image(path: &Path, img: &DMatrix<f64>, header: &str) -> Result<(), CliError> {
    write_pgm(path, img)?;
    let bytes = fs::read(path)?;
    fs::write(path, after_first_line(&bytes, header))?;
    Ok(())
}

// ---------------------------------------------------------------- coherence

#[derive(Debug, Args, Serialize)]
pub struct CoherenceFlags {
    /// Dictionary A, e.g. `dft:64`, `etf:16x32:seed=3`, `file:a.txt`.
    #[arg(long)]
    a: Option<String>,
    /// Dictionary B; `etf-partner` takes the second half of the frame named by --a.
    #[arg(long)]
    b: Option<String>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct CoherenceConfig {
    a: String,
    b: String,
}

pub fn coherence(ctx: &Context, flags: CoherenceFlags) -> Result<(), CliError> {
    let cfg: CoherenceConfig = ctx.resolve("coherence", &flags)?;
    let (a, b) = build_pair(required(&cfg.a, "--a")?, required(&cfg.b, "--b")?)?;
    let p = profile(&a, &b)?;
    let body = format!(
        "mu_a = {:.12}\nmu_b = {:.12}\nmu_m = {:.12}\nmu_d = {:.12}\n",
        p.mu_a, p.mu_b, p.mu_m, p.mu_d
    );
    ctx.emit("coherence.txt", &header("coherence", &cfg)?, &body)
}

// ---------------------------------------------------------------- threshold

#[derive(Debug, Args, Serialize)]
pub struct ThresholdFlags {
    /// caseI, caseII_E, caseII_X, caseIII, caseIV_P0, caseIV_BP, classical or naive_concat.
    #[arg(long)]
    case: Option<String>,
    #[arg(long)]
    a: Option<String>,
    #[arg(long)]
    b: Option<String>,
    /// Coherence values `mu_a,mu_b,mu_m[,mu_d]` instead of dictionaries.
    #[arg(long)]
    profile: Option<String>,
    /// Error sparsities, e.g. `8`, `1..=64` or `1,2,4`.
    #[arg(long)]
    ne: Option<String>,
    /// Largest signal sparsity searched (default: columns of A).
    #[arg(long)]
    nx_limit: Option<usize>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct ThresholdConfig {
    case: String,
    a: Option<String>,
    b: Option<String>,
    profile: Option<String>,
    ne: Option<String>,
    nx_limit: Option<usize>,
}

impl Default for ThresholdConfig {
    fn default() -> Self {
        Self {
            case: CaseId::CaseI.as_str().into(),
            a: None,
            b: None,
            profile: None,
            ne: None,
            nx_limit: None,
        }
    }
}

fn parse_profile(s: &str) -> Result<CoherenceProfile64, CliError> {
    let v: Vec<f64> = s
        .split(',')
        .map(|t| t.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| usage(format!("--profile: {e}")))?;
    Ok(match v[..] {
        [a, b, m] => CoherenceProfile64::new(a, b, m)?,
        [a, b, m, d] => CoherenceProfile64::with_mu_d(a, b, m, d)?,
        _ => return Err(usage("--profile expects mu_a,mu_b,mu_m[,mu_d]")),
    })
}

pub fn threshold(ctx: &Context, flags: ThresholdFlags) -> Result<(), CliError> {
    let cfg: ThresholdConfig = ctx.resolve("threshold", &flags)?;
    let case = case_id(&cfg.case)?;
    let (prof, dims) = match (&cfg.a, &cfg.b, &cfg.profile) {
        (Some(a), Some(b), None) => {
            let (a, b) = build_pair(a, b)?;
            (profile(&a, &b)?, Some((a.cols(), b.cols())))
        }
        (None, None, Some(p)) => (parse_profile(p)?, None),
        _ => return Err(usage("give either --a and --b, or --profile")),
    };
    let ne = match (&cfg.ne, dims) {
        (Some(r), _) => parse_range(r)?,
        (None, Some((_, nb))) => (1..=nb).collect(),
        (None, None) => return Err(usage("--ne is needed with --profile")),
    };
    let nx_limit = match (cfg.nx_limit, dims) {
        (Some(n), _) => n,
        (None, Some((na, _))) => na,
        (None, None) => return Err(usage("--nx-limit is needed with --profile")),
    };
    let points = guarantees::contour(case, &prof, ne, nx_limit)?;
    let mut body = Vec::new();
    guarantees::write_contour_csv(&mut body, case, &prof, &points)?;
    let name = format!("threshold_{}.csv", case.as_str());
    ctx.emit(&name, &header("threshold", &cfg)?, &String::from_utf8_lossy(&body))
}

// ---------------------------------------------------------------- generate

#[derive(Debug, Args, Serialize)]
pub struct GenerateFlags {
    #[arg(long)]
    a: Option<String>,
    #[arg(long)]
    b: Option<String>,
    /// Nonzeros in the signal.
    #[arg(long)]
    nx: Option<usize>,
    /// Nonzeros in the error.
    #[arg(long)]
    ne: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// `real` or `complex` Gaussian amplitudes.
    #[arg(long)]
    amplitudes: Option<String>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct GenerateConfig {
    a: String,
    b: String,
    nx: usize,
    ne: usize,
    seed: u64,
    amplitudes: String,
}

impl Default for GenerateConfig {
    fn default() -> Self {
        Self {
            a: String::new(),
            b: String::new(),
            nx: 1,
            ne: 1,
            seed: 0,
            amplitudes: "complex".into(),
        }
    }
}

/// Writes `x.csv`, `e.csv` and the measurement `z.txt`.
pub fn generate(ctx: &Context, flags: GenerateFlags) -> Result<(), CliError> {
    let cfg: GenerateConfig = ctx.resolve("generate", &flags)?;
    let (a, b) = build_pair(required(&cfg.a, "--a")?, required(&cfg.b, "--b")?)?;
    let (x, e) = random_instance::<C64>(a.cols(), b.cols(), cfg.nx, cfg.ne, cfg.seed, amplitudes(&cfg.amplitudes)?)?;
    let z = a.apply(x.values())? + b.apply(e.values())?;
    let h = header("generate", &cfg)?;
    let dir = ctx.dir()?;
    write_sparse(&dir.join("x.csv"), &x, &h)?;
    write_sparse(&dir.join("e.csv"), &e, &h)?;
    let mut zbuf = h.clone().into_bytes();
    write_matrix(&DMatrix::from_column_slice(z.len(), 1, z.as_slice()), &mut zbuf)?;
    fs::write(dir.join("z.txt"), zbuf)?;
    println!("wrote x.csv, e.csv and z.txt to {}", dir.display());
    Ok(())
}

// ---------------------------------------------------------------- recover

#[derive(Debug, Args, Serialize)]
pub struct RecoverFlags {
    #[arg(long)]
    a: Option<String>,
    #[arg(long)]
    b: Option<String>,
    /// Measurement file (an M x 1 matrix).
    #[arg(long)]
    z: Option<String>,
    /// caseI, caseII_E, caseII_X, caseIII or caseIV.
    #[arg(long)]
    case: Option<String>,
    /// `bp` or `omp`.
    #[arg(long)]
    method: Option<String>,
    /// Sparse-vector file whose support is the known signal support.
    #[arg(long)]
    x_known: Option<String>,
    /// Sparse-vector file whose support is the known error support.
    #[arg(long)]
    e_known: Option<String>,
    /// Signal sparsity (OMP; bound on the search in caseIII).
    #[arg(long)]
    nx: Option<usize>,
    /// Error sparsity (OMP, caseIII).
    #[arg(long)]
    ne: Option<usize>,
    /// What to do with columns annihilated by the projection: `reject` or `drop`.
    #[arg(long)]
    degenerate: Option<String>,
    /// Basis pursuit iteration cap.
    #[arg(long)]
    max_iter: Option<usize>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct RecoverConfig {
    a: String,
    b: String,
    z: String,
    case: String,
    method: String,
    x_known: Option<String>,
    e_known: Option<String>,
    nx: Option<usize>,
    ne: Option<usize>,
    degenerate: String,
    max_iter: usize,
}

impl Default for RecoverConfig {
    fn default() -> Self {
        Self {
            a: String::new(),
            b: String::new(),
            z: String::new(),
            case: CaseId::CaseIIE.as_str().into(),
            method: "bp".into(),
            x_known: None,
            e_known: None,
            nx: None,
            ne: None,
            degenerate: "reject".into(),
            max_iter: BpOptions::default().max_iter,
        }
    }
}

fn known_support(path: &Option<String>, flag: &str) -> Result<Vec<usize>, CliError> {
    let p = path.as_deref().ok_or_else(|| usage(format!("this case needs {flag}")))?;
    Ok(read_sparse(p)?.support().to_vec())
}

fn need(v: Option<usize>, flag: &str) -> Result<usize, CliError> {
    v.ok_or_else(|| usage(format!("this case needs {flag}")))
}

/// Writes `x_hat.csv`, `e_hat.csv` and `report.txt`.
pub fn recover(ctx: &Context, flags: RecoverFlags) -> Result<(), CliError> {
    let cfg: RecoverConfig = ctx.resolve("recover", &flags)?;
    let (a, b) = build_pair(required(&cfg.a, "--a")?, required(&cfg.b, "--b")?)?;
    let zm = read_matrix_file::<C64>(required(&cfg.z, "--z")?)?;
    if zm.ncols() != 1 {
        return Err(Error::Dimension(format!("measurement file has {} columns, expected 1", zm.ncols())).into());
    }
    let z: DVector<C64> = zm.column(0).into_owned();
    let method: Method = parse(&cfg.method)?;
    let opts = RecoveryOptions {
        bp: BpOptions {
            max_iter: cfg.max_iter,
            ..BpOptions::default()
        },
        degenerate: degenerate(&cfg.degenerate)?,
        check_uniqueness: false,
    };
    let omp_k = |v: Option<usize>, flag: &str| -> Result<Option<usize>, CliError> {
        match method {
            Method::Omp => Ok(Some(need(v, flag)?)),
            Method::Bp => Ok(None),
        }
    };
    let r = match case_id(&cfg.case)? {
        CaseId::CaseI => recover_case_i(
            &a,
            &b,
            &z,
            &known_support(&cfg.x_known, "--x-known")?,
            &known_support(&cfg.e_known, "--e-known")?,
        )?,
        CaseId::CaseIIE => {
            let k = omp_k(cfg.nx, "--nx")?;
            recover_case_ii_e(&a, &b, &z, &known_support(&cfg.e_known, "--e-known")?, method, k, &opts)?
        }
        CaseId::CaseIIX => {
            let k = omp_k(cfg.ne, "--ne")?;
            recover_case_ii_x(&a, &b, &z, &known_support(&cfg.x_known, "--x-known")?, method, k, &opts)?
        }
        CaseId::CaseIII => recover_case_iii(&a, &b, &z, need(cfg.ne, "--ne")?, need(cfg.nx, "--nx")?)?,
        CaseId::CaseIVBP => {
            let k = match method {
                Method::Omp => Some(need(cfg.nx, "--nx")? + need(cfg.ne, "--ne")?),
                Method::Bp => None,
            };
            recover_case_iv(&a, &b, &z, method, k, &opts)?
        }
        other => return Err(usage(format!("recover does not support {other}"))),
    };
    let h = header("recover", &cfg)?;
    let dir = ctx.dir()?;
    write_sparse(&dir.join("x_hat.csv"), &SparseVector::from_dense(r.x.clone()), &h)?;
    write_sparse(&dir.join("e_hat.csv"), &SparseVector::from_dense(r.e.clone()), &h)?;
    let mut report = format!(
        "residual_norm = {:e}\niterations = {}\nconverged = {}\ndropped_columns = {:?}\n",
        r.report.residual_norm, r.report.iterations, r.report.converged, r.dropped_columns
    );
    if let Some(g) = r.report.duality_gap {
        report.push_str(&format!("duality_gap = {g:e}\n"));
    }
    if let Some(u) = r.unique {
        report.push_str(&format!("unique = {u}\n"));
    }
    fs::write(dir.join("report.txt"), format!("{h}{report}"))?;
    print!("{report}");
    Ok(())
}

// ---------------------------------------------------------------- phase

#[derive(Debug, Args, Serialize)]
pub struct PhaseFlags {
    #[arg(long)]
    a: Option<String>,
    #[arg(long)]
    b: Option<String>,
    /// caseI, caseII_E, caseII_X, caseIII or caseIV.
    #[arg(long)]
    case: Option<String>,
    #[arg(long)]
    method: Option<String>,
    /// Signal sparsities, e.g. `1..=32`.
    #[arg(long)]
    nx: Option<String>,
    /// Error sparsities.
    #[arg(long)]
    ne: Option<String>,
    /// Only run cells with nx = ne.
    #[arg(long)]
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    diagonal: bool,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Relative error below which a trial counts as a success.
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    amplitudes: Option<String>,
    /// Success rate traced by the contour.
    #[arg(long)]
    level: Option<f64>,
    #[arg(long)]
    max_iter: Option<usize>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct PhaseConfig {
    a: String,
    b: String,
    case: String,
    method: String,
    nx: Option<String>,
    ne: Option<String>,
    diagonal: bool,
    trials: usize,
    seed: u64,
    tol: f64,
    amplitudes: String,
    level: f64,
    max_iter: usize,
}

impl Default for PhaseConfig {
    fn default() -> Self {
        Self {
            a: String::new(),
            b: String::new(),
            case: CaseId::CaseIIE.as_str().into(),
            method: "omp".into(),
            nx: None,
            ne: None,
            diagonal: false,
            trials: 200,
            seed: 0,
            tol: 1e-3,
            amplitudes: "real".into(),
            level: 0.5,
            max_iter: BpOptions::default().max_iter,
        }
    }
}

/// Writes `phase_cells.csv` and `phase_contour.csv`.
pub fn phase(ctx: &Context, flags: PhaseFlags) -> Result<(), CliError> {
    let cfg: PhaseConfig = ctx.resolve("phase", &flags)?;
    let (a, b) = build_pair(required(&cfg.a, "--a")?, required(&cfg.b, "--b")?)?;
    let mut grid = ExperimentGrid::new(a, b, case_id(&cfg.case)?, parse(&cfg.method)?);
    if let Some(r) = &cfg.nx {
        grid.nx_values = parse_range(r)?;
    }
    if let Some(r) = &cfg.ne {
        grid.ne_values = parse_range(r)?;
    }
    grid.diagonal_only = cfg.diagonal;
    grid.trials = cfg.trials;
    grid.master_seed = cfg.seed;
    grid.success_tol = cfg.tol;
    grid.amplitudes = amplitudes(&cfg.amplitudes)?;
    grid.recovery.bp.max_iter = cfg.max_iter;
    let results = run_grid(&grid)?;

    let h = header("phase", &cfg)?;
    let dir = ctx.dir()?;
    let mut cells = h.clone().into_bytes();
    write_cells_csv(&mut cells, &results)?;
    fs::write(dir.join("phase_cells.csv"), cells)?;
    let contour = success_contour(&results, cfg.level);
    let mut cbuf = h.into_bytes();
    write_contour_csv(&mut cbuf, &contour)?;
    fs::write(dir.join("phase_contour.csv"), cbuf)?;
    println!("{} cells written to {}", results.len(), dir.display());
    if contour.non_monotone {
        println!("warning: success rate is not monotone in nx for some ne");
    }
    if cfg.diagonal {
        match diagonal_crossing(&results, cfg.level) {
            Some(n) => println!("diagonal crossing at nx = ne = {n:.2}"),
            None => println!("no diagonal crossing at level {}", cfg.level),
        }
    }
    Ok(())
}

// ---------------------------------------------------------------- inpaint

#[derive(Debug, Args, Serialize)]
pub struct InpaintFlags {
    /// Input PGM; without it a synthetic test image is used.
    #[arg(long)]
    image: Option<String>,
    /// Side of the synthetic image.
    #[arg(long)]
    synthetic: Option<usize>,
    /// `dct`, `haar` or `haar:<octaves>`.
    #[arg(long)]
    transform: Option<String>,
    /// Fraction of transform coefficients kept.
    #[arg(long)]
    keep: Option<f64>,
    /// Fraction of pixels covered by the generated text mask.
    #[arg(long)]
    fraction: Option<f64>,
    /// Mask PGM; pixels brighter than mid-gray are overwritten.
    #[arg(long)]
    mask: Option<String>,
    /// Seed of the generated mask.
    #[arg(long)]
    seed: Option<u64>,
    /// caseI, caseII_E or caseIV.
    #[arg(long)]
    case: Option<String>,
    #[arg(long)]
    method: Option<String>,
    #[arg(long)]
    degenerate: Option<String>,
    #[arg(long)]
    max_iter: Option<usize>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct InpaintConfig {
    image: Option<String>,
    synthetic: usize,
    transform: String,
    keep: f64,
    fraction: f64,
    mask: Option<String>,
    seed: u64,
    case: String,
    method: String,
    degenerate: String,
    max_iter: usize,
}

impl Default for InpaintConfig {
    fn default() -> Self {
        let d = InpaintOptions::default();
        Self {
            image: None,
            synthetic: 64,
            transform: "dct".into(),
            keep: d.keep_fraction,
            fraction: 0.188,
            mask: None,
            seed: 0,
            case: "caseII_E".into(),
            method: "bp".into(),
            degenerate: "drop".into(),
            max_iter: d.bp.max_iter,
        }
    }
}

fn transform(s: &str) -> Result<Transform, CliError> {
    match s.split_once(':') {
        Some(("haar", o)) => Ok(Transform::Haar {
            octaves: o.parse().map_err(|_| usage(format!("transform `{s}`: bad octave count")))?,
        }),
        _ => parse(s),
    }
}

/// Writes the sparsified, corrupted and restored images and `report.txt`.
pub fn inpaint(ctx: &Context, flags: InpaintFlags) -> Result<(), CliError> {
    let cfg: InpaintConfig = ctx.resolve("inpaint", &flags)?;
    let image = match &cfg.image {
        Some(p) => read_pgm(p)?,
        None => synthetic_image(cfg.synthetic),
    };
    if image.nrows() != image.ncols() {
        return Err(Error::InvalidArgument(format!(
            "image is {}x{}, a square image is required",
            image.nrows(),
            image.ncols()
        ))
        .into());
    }
    let side = image.nrows();
    let mask = match &cfg.mask {
        Some(p) => {
            let m = read_pgm(p)?;
            if m.shape() != image.shape() {
                return Err(Error::Dimension("mask and image sizes differ".into()).into());
            }
            // row-major, like the image vectorization
            (0..side * side).filter(|&k| m[(k / side, k % side)] > 127.0).collect()
        }
        None => text_mask(side, cfg.fraction, cfg.seed)?,
    };
    let opts = InpaintOptions {
        transform: transform(&cfg.transform)?,
        keep_fraction: cfg.keep,
        knowledge: parse(&cfg.case)?,
        method: parse(&cfg.method)?,
        degenerate: degenerate(&cfg.degenerate)?,
        bp: BpOptions {
            max_iter: cfg.max_iter,
            ..BpOptions::default()
        },
    };
    let r = inpaint_experiment(&image, &mask, &opts)?;
    let h = header("inpaint", &cfg)?;
    let dir = ctx.dir()?;
    write_image(&dir.join("sparsified.pgm"), &r.sparsified, &h)?;
    write_image(&dir.join("corrupted.pgm"), &r.corrupted, &h)?;
    write_image(&dir.join("restored.pgm"), &r.restored, &h)?;
    let report = format!(
        "mse_db = {:.2}\ncorrupted_mse_db = {:.2}\nnx = {}\nne = {}\ndropped_columns = {}\nconverged = {}\n",
        r.mse_db,
        r.corrupted_mse_db,
        r.nx,
        r.ne,
        r.dropped_columns.len(),
        r.converged
    );
    fs::write(dir.join("report.txt"), format!("{h}{report}"))?;
    print!("{report}");
    Ok(())
}
