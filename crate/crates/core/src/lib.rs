//! Dwell-time certification for switched systems that switch among distinct
//! globally stable equilibria.
//!
//! The crate is organised around the objects the analysis manipulates:
//!
//! - [`planar`]: planar affine modes `x' = Ax + B`, their diagonal quadratic
//!   Lyapunov functions, enclosing levels of tangent ellipses and the
//!   closed-form dwell times built from them.
//! - [`sim`]: exact (matrix exponential) simulation under a switching signal,
//!   threshold/reset handling and trapping-region verification.
//! - [`neuron`]: the two-mode linear neuron with a square-wave input current and
//!   its non-spiking certificate.
//! - [`nonlinear`]: ball-sandwich dwell times for arbitrary Lyapunov functions
//!   in `R^n`, plus a fixed-step RK4 integrator.
//! - [`oracle`]: brute-force checkers used to validate the closed forms.
//! - [`cli`]: the command surface behind the `dwell` binary.
//!
//! Runnable walkthroughs live in `examples/`:
//!
//! ```bash
//! cargo run -p dwell --example neuron_certificate
//! ```

// `!(x > y)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod config;
pub mod error;
pub mod neuron;
pub mod nonlinear;
pub mod numfmt;
pub mod optim;
pub mod oracle;
pub mod planar;
pub mod sim;
pub mod svg;

pub use error::{Error, Result};
pub use neuron::{certify, neuron_modes, square_wave_signal, Certificate, NeuronParams};
pub use planar::{
    dwell_time, dwell_time_weak, enclosing_level, enclosing_level_general,
    enclosing_level_shared, min_dwell_schedule, touching_level_inner, DwellStep, Mat2, ModeId,
    ModeTable, PlanarAffineMode, QuadraticLyapunov, SublevelSet, Vec2,
};
pub use sim::{
    affine_flow, detect_crossing, matrix_exp_2x2, simulate, verify_trapping, ResetRule,
    SwitchingSignal, Trajectory, TrapReport,
};
