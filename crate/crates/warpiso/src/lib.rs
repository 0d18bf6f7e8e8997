//! Numerical toolkit for warped products `ℝ ×_f N` with log-convex warping
//! functions.
//!
//! Given a parsed warping function `f` with exact derivatives, the crate
//! verifies that the constant-height ceiling minimizes the vertical area
//! among all ceilings trapping the same volume over a floor, runs the
//! divergence-theorem calibration of that inequality, computes the
//! isoperimetric profile `𝓘(h) = f(h)^k / ∫₀ʰ f^k` with its critical points
//! and positive lower bound `ω`, checks the volume bound
//! `Vol(R) ≤ Vol(C)/ω`, and solves the fixed-area maximum-volume problem.
//! The `warpiso` binary exposes all of it behind config-driven subcommands
//! emitting reproducible key=value reports and CSV profiles.
//!
//! ```
//! use warpiso::{Ceiling, Floor, MuIntegral, WarpingFunction};
//!
//! // Hyperbolic plane sliced along a geodesic: f = cosh over a 1-d fiber.
//! let wf = WarpingFunction::parse("cosh(t)", 10.0)?;
//! assert!(wf.certify_default()?.strictly_log_convex);
//!
//! let m = MuIntegral::new(wf, 1)?;
//! let floor = Floor::weighted_cells(vec![1.0, 1.0], 1, 0.0)?;
//! let ceiling = Ceiling::step(vec![0.0, 1.0])?;
//!
//! let report = warpiso::verify(&floor, &ceiling, &m)?;
//! let expected_h = (1.0f64.sinh() / 2.0).asinh();
//! assert!((report.constant_height - expected_h).abs() < 1e-8);
//! assert!(report.margin > 0.0, "non-constant ceilings cost vertical area");
//! # Ok::<(), warpiso::Error>(())
//! ```

pub mod cli;
pub mod config;
pub mod dido;
pub mod error;
pub mod geom;
pub mod isoperimetric;
pub mod numeric;
pub mod quad;
pub mod report;
pub mod warpfn;

pub use error::{Error, Result};
pub use geom::{ceiling_area, room_volume, AreaMode, Ceiling, Floor, FloorKind, Room};
pub use isoperimetric::{
    calibration_check, diagnose_equality, solve_constant_height, verify, Equality,
    IsoperimetricReport,
};
pub use quad::MuIntegral;
pub use warpfn::{CertificationReport, WarpingFunction};
