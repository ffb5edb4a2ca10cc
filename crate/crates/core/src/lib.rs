//! Emulated-LES post-processing for turbulent premixed hydrogen flames.
//!
//! Resolved snapshots are Gaussian-filtered and downsampled into coarse LES
//! fields, reduced to the filtered progress variable, equivalence ratio and
//! burning rate, cut into training cubes, and scored against a tabulated
//! flamelet closure.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bundle;
pub mod cli;
pub mod error;
pub mod field;
pub mod filter;
pub mod flamelet;
pub mod io;
pub mod metrics;
pub mod pipeline;
pub mod sample;
pub mod synth;
pub mod thermo;

pub use bundle::{DerivedBundle, SnapshotBundle, ThicknessPair};
pub use error::{Error, Result};
pub use field::{Boundary, GridSpec, ScalarField3D};
pub use filter::{emulate_les, favre_filter, filter_field, GaussianKernel1D, LesParams};
pub use flamelet::{baseline_omega, build_table, FlameletLibrary, FlameletProfile, FlameletTable, PhiSource, Wrinkling};
pub use metrics::{nmae, rmse, EvalPair, Hist2D};
pub use sample::{CubeSample, Split};
pub use synth::{make_planar_flame, make_wrinkled_flame, SyntheticFlameSpec};
pub use thermo::{ElementTable, MixtureConstants};
