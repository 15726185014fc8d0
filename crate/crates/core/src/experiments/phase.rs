use std::collections::BTreeMap;
use std::io::Write;

use nalgebra::DVector;
use rayon::prelude::*;

use crate::dictionaries::Dictionary;
use crate::error::{Error, Result};
use crate::guarantees::CaseId;
use crate::recovery::{
    recover_case_i, recover_case_ii_e, recover_case_ii_x, recover_case_iii, recover_case_iv,
    Method, RecoveryOptions,
};
use crate::scalar::prelude::*;
use crate::signals::{derive_seed, random_instance, Amplitudes};

/// `||x|| = 0` counts as recovered when `||x_hat||` is at most this.
pub const ZERO_SIGNAL_TOL: f64 = 1e-12;

/// Monte-Carlo sweep over sparsity pairs `(nx, ne)` for one recovery pipeline.
#[derive(Debug, Clone)]
pub struct ExperimentGrid<S: Scalar> {
    pub a: Dictionary<S>,
    pub b: Dictionary<S>,
    /// One of `caseI`, `caseII_E`, `caseII_X`, `caseIII`, `caseIV_BP`.
    pub case: CaseId,
    pub method: Method,
    pub nx_values: Vec<usize>,
    pub ne_values: Vec<usize>,
    /// Only visit cells with `nx == ne`.
    pub diagonal_only: bool,
    pub trials: usize,
    pub master_seed: u64,
    /// Success when `||x_hat - x|| < success_tol * ||x||`.
    pub success_tol: f64,
    pub amplitudes: Amplitudes,
    pub recovery: RecoveryOptions,
}

impl<S: Scalar> ExperimentGrid<S> {
    pub fn new(a: Dictionary<S>, b: Dictionary<S>, case: CaseId, method: Method) -> Self {
        let na = a.cols();
        let nb = b.cols();
        Self {
            a,
            b,
            case,
            method,
            nx_values: (0..=na).collect(),
            ne_values: (0..=nb).collect(),
            diagonal_only: false,
            trials: 200,
            master_seed: 0,
            success_tol: 1e-3,
            amplitudes: Amplitudes::default(),
            recovery: RecoveryOptions::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidArgument("trials per cell must be positive".into()));
        }
        if !(self.success_tol > 0.0) {
            return Err(Error::InvalidArgument("success tolerance must be positive".into()));
        }
        if self.a.rows() != self.b.rows() {
            return Err(Error::Dimension("dictionaries differ in row count".into()));
        }
        match self.case {
            CaseId::CaseI | CaseId::CaseIIE | CaseId::CaseIIX | CaseId::CaseIII | CaseId::CaseIVBP => {}
            other => {
                return Err(Error::InvalidArgument(format!(
                    "no recovery pipeline is associated with `{other}`"
                )))
            }
        }
        if let Some(nx) = self.nx_values.iter().find(|&&v| v > self.a.cols()) {
            return Err(Error::InvalidArgument(format!("nx = {nx} exceeds Na")));
        }
        if let Some(ne) = self.ne_values.iter().find(|&&v| v > self.b.cols()) {
            return Err(Error::InvalidArgument(format!("ne = {ne} exceeds Nb")));
        }
        Ok(())
    }

    /// The `(nx, ne)` cells visited by [`run_grid`], ordered by `ne` then `nx`.
    pub fn cells(&self) -> Vec<(usize, usize)> {
        let mut cells = Vec::new();
        for &ne in &self.ne_values {
            for &nx in &self.nx_values {
                if !self.diagonal_only || nx == ne {
                    cells.push((nx, ne));
                }
            }
        }
        cells
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellResult {
    pub nx: usize,
    pub ne: usize,
    pub successes: usize,
    pub trials: usize,
    pub rate: f64,
}

/// Outcome of a single trial.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialOutcome {
    pub success: bool,
    /// `||x_hat - x|| / ||x||` (absolute error when `x = 0`); infinite when the pipeline failed.
    pub x_error: f64,
    /// The same for `e`.
    pub e_error: f64,
}

fn relative_error<S: Scalar>(est: &DVector<S>, truth: &DVector<S>) -> f64 {
    let diff = to_f64((est - truth).norm());
    let norm = to_f64(truth.norm());
    if norm == 0.0 {
        diff
    } else {
        diff / norm
    }
}

/// Runs one seeded trial of cell `(nx, ne)`. Pipeline errors are failures.
pub fn run_trial<S: Scalar>(grid: &ExperimentGrid<S>, nx: usize, ne: usize, trial: usize) -> TrialOutcome {
    let seed = derive_seed(grid.master_seed, &[nx as u64, ne as u64, trial as u64]);
    let failed = TrialOutcome {
        success: false,
        x_error: f64::INFINITY,
        e_error: f64::INFINITY,
    };
    let (x, e) = match random_instance::<S>(grid.a.cols(), grid.b.cols(), nx, ne, seed, grid.amplitudes) {
        Ok(pair) => pair,
        Err(_) => return failed,
    };
    let z = grid.a.matrix() * x.values() + grid.b.matrix() * e.values();
    let (a, b, opts) = (&grid.a, &grid.b, &grid.recovery);
    let result = match grid.case {
        CaseId::CaseI => recover_case_i(a, b, &z, x.support(), e.support()),
        CaseId::CaseIIE => recover_case_ii_e(a, b, &z, e.support(), grid.method, Some(nx), opts),
        CaseId::CaseIIX => recover_case_ii_x(a, b, &z, x.support(), grid.method, Some(ne), opts),
        CaseId::CaseIII => recover_case_iii(a, b, &z, ne, nx),
        CaseId::CaseIVBP => recover_case_iv(a, b, &z, grid.method, Some(nx + ne), opts),
        _ => return failed,
    };
    let rec = match result {
        Ok(r) => r,
        Err(_) => return failed,
    };
    let x_error = relative_error(&rec.x, x.values());
    let e_error = relative_error(&rec.e, e.values());
    let success = if to_f64(x.values().norm()) == 0.0 {
        to_f64(rec.x.norm()) <= ZERO_SIGNAL_TOL
    } else {
        x_error < grid.success_tol
    };
    TrialOutcome {
        success,
        x_error,
        e_error,
    }
}

pub fn run_cell<S: Scalar>(grid: &ExperimentGrid<S>, nx: usize, ne: usize) -> CellResult {
    let successes = (0..grid.trials)
        .filter(|&t| run_trial(grid, nx, ne, t).success)
        .count();
    CellResult {
        nx,
        ne,
        successes,
        trials: grid.trials,
        rate: successes as f64 / grid.trials as f64,
    }
}

/// Runs every cell of the grid in parallel; results follow [`ExperimentGrid::cells`].
pub fn run_grid<S: Scalar>(grid: &ExperimentGrid<S>) -> Result<Vec<CellResult>> {
    grid.validate()?;
    let cells = grid.cells();
    Ok(cells
        .par_iter()
        .map(|&(nx, ne)| run_cell(grid, nx, ne))
        .collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuccessContour {
    /// `(ne, largest nx with rate >= level)`, `None` when no cell reaches the level.
    pub points: Vec<(usize, Option<usize>)>,
    /// Some column had a cell below the level under a cell at or above it.
    pub non_monotone: bool,
}

/// For every `ne`, the largest `nx` whose success rate reaches `level`.
pub fn success_contour(results: &[CellResult], level: f64) -> SuccessContour {
    let mut columns: BTreeMap<usize, Vec<(usize, f64)>> = BTreeMap::new();
    for r in results {
        columns.entry(r.ne).or_default().push((r.nx, r.rate));
    }
    let mut non_monotone = false;
    let points = columns
        .into_iter()
        .map(|(ne, mut cells)| {
            cells.sort_by_key(|c| c.0);
            let top = cells.iter().rev().find(|c| c.1 >= level).map(|c| c.0);
            if let Some(top) = top {
                if cells.iter().any(|c| c.0 < top && c.1 < level) {
                    non_monotone = true;
                }
            }
            (ne, top)
        })
        .collect();
    SuccessContour {
        points,
        non_monotone,
    }
}

/// Where the success rate along `nx = ne` first drops below `level`, linearly
/// interpolated between neighbouring diagonal cells.
pub fn diagonal_crossing(results: &[CellResult], level: f64) -> Option<f64> {
    let mut diag: Vec<(usize, f64)> = results
        .iter()
        .filter(|r| r.nx == r.ne)
        .map(|r| (r.nx, r.rate))
        .collect();
    diag.sort_by_key(|d| d.0);
    for w in diag.windows(2) {
        let ((n0, r0), (n1, r1)) = (w[0], w[1]);
        if r0 >= level && r1 < level {
            let t = (r0 - level) / (r0 - r1);
            return Some(n0 as f64 + t * (n1 as f64 - n0 as f64));
        }
    }
    None
}

/// Writes `nx,ne,trials,successes,rate` rows.
pub fn write_cells_csv<W: Write>(out: W, results: &[CellResult]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["nx", "ne", "trials", "successes", "rate"])?;
    for r in results {
        w.write_record([
            r.nx.to_string(),
            r.ne.to_string(),
            r.trials.to_string(),
            r.successes.to_string(),
            format!("{}", r.rate),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Writes `ne,nx_at_level` rows; cells that never reach the level are left empty.
pub fn write_contour_csv<W: Write>(out: W, contour: &SuccessContour) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["ne", "nx_at_level"])?;
    for (ne, nx) in &contour.points {
        w.write_record([ne.to_string(), nx.map(|v| v.to_string()).unwrap_or_default()])?;
    }
    w.flush()?;
    Ok(())
}
