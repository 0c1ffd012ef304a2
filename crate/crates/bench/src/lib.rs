//! Shared fixtures for the benchmarks.

use std::f64::consts::PI;

use biharm_core::{far_field_matrix, make_grid, make_shape, FarFieldMatrix, Grid, ObstacleScene, ShapeKind, ShapeParams};

pub const KAPPA: f64 = 2.0 * PI;

pub fn scene(kind: ShapeKind) -> ObstacleScene {
    ObstacleScene::single(make_shape(kind, &ShapeParams::default()).expect("default shape"))
}

/// Far-field matrix of the default kite with `n` directions.
pub fn kite_far_field(n: usize) -> FarFieldMatrix {
    far_field_matrix(&scene(ShapeKind::Kite), KAPPA, n, 64).expect("kite far field")
}

/// `n × n` grid on a square of half-width 2 around the default kite.
pub fn grid_around_kite(n: usize) -> Grid {
    make_grid([1.0, 5.0, 2.0, 6.0], n, n).expect("grid")
}
