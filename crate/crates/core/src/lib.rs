//! Biharmonic scattering by clamped obstacles and sampling-type shape
//! reconstruction from far-field data.

// `!(x > 0.0)` is used on purpose throughout: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// Index loops mirror the matrix formulas in the dense kernels.
#![allow(clippy::needless_range_loop)]

pub mod error;
pub mod experiment;
pub mod formats;
pub mod forward;
pub mod geometry;
pub mod indicators;
pub mod kernels;
pub mod linalg;
pub mod specfun;

pub use error::{Error, Result};
pub use experiment::{
    add_noise, builtin_example, make_grid, run_experiment, run_experiment_with, ExperimentConfig,
    Grid, Residuals, RunOutcome,
};
pub use forward::{
    assemble, directions, disk_series_far_field, far_field_matrix, far_field_vector,
    solve_plane_wave, BoundarySystem, DensityPair, FarFieldMatrix,
};
pub use geometry::{
    make_shape, ObstacleScene, ParametricCurve, QuadratureLayout, Shape, ShapeKind, ShapeParams,
    Vec2,
};
pub use indicators::{
    fm_field, fsharp, mm_field, probe_gram, test_vector, BoundaryCondition, Convention, FmVariant,
    IndicatorField, Method, ProbeMatrix, TestVector,
};
pub use kernels::{KernelBlock, SplitKernelBlock};
pub use linalg::{CMatrix, EigenSystem, SingularSystem};
