//! Monte-Carlo phase transitions and the inpainting experiment.

mod inpaint;
mod phase;

pub use inpaint::{
    inpaint_experiment, mse_db, read_pgm, synthetic_image, text_mask, write_pgm, InpaintKnowledge,
    InpaintOptions, InpaintResult, Transform, MAX_GRAY,
};
pub use phase::{
    diagonal_crossing, run_cell, run_grid, run_trial, success_contour, write_cells_csv,
    write_contour_csv, CellResult, ExperimentGrid, SuccessContour, TrialOutcome, ZERO_SIGNAL_TOL,
};
