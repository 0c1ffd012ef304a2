//! Declarative experiments: configuration, sampling grids, the noise model
//! and the end-to-end simulate → reconstruct pipeline.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forward::{far_field_matrix, FarFieldMatrix};
use crate::geometry::{make_shape, ObstacleScene, ShapeKind, ShapeParams, Vec2};
use crate::indicators::{
    fm_field, fsharp, mm_field, monotonicity_matrix, BoundaryCondition, Convention, FmVariant,
    IndicatorField, Method,
};
use crate::linalg::{herm_eigvals, singular_system};

/// Uniform sampling grid including both endpoints in each direction.
/// Points are enumerated row by row: `y` outer, `x` inner.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    pub xmin: f64,
    pub xmax: f64,
    pub ymin: f64,
    pub ymax: f64,
    pub nx: usize,
    pub ny: usize,
}

/// Grid over `[xmin, xmax] × [ymin, ymax]` given as `[xmin, xmax, ymin, ymax]`.
pub fn make_grid(bounds: [f64; 4], nx: usize, ny: usize) -> Result<Grid> {
    let [xmin, xmax, ymin, ymax] = bounds;
    let g = Grid {
        xmin,
        xmax,
        ymin,
        ymax,
        nx,
        ny,
    };
    g.validate()?;
    Ok(g)
}

fn axis(lo: f64, hi: f64, n: usize, k: usize) -> f64 {
    if k + 1 == n {
        hi
    } else {
        lo + (hi - lo) * k as f64 / (n - 1) as f64
    }
}

impl Grid {
    pub fn validate(&self) -> Result<()> {
        let finite = [self.xmin, self.xmax, self.ymin, self.ymax].iter().all(|v| v.is_finite());
        if !finite || !(self.xmax > self.xmin) || !(self.ymax > self.ymin) {
            return Err(Error::Degenerate(format!(
                "grid bounds [{}, {}] x [{}, {}]",
                self.xmin, self.xmax, self.ymin, self.ymax
            )));
        }
        if self.nx < 2 || self.ny < 2 {
            return Err(Error::Degenerate(format!(
                "grid resolution {}x{} (need at least 2x2)",
                self.nx, self.ny
            )));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dx(&self) -> f64 {
        (self.xmax - self.xmin) / (self.nx - 1) as f64
    }

    pub fn dy(&self) -> f64 {
        (self.ymax - self.ymin) / (self.ny - 1) as f64
    }

    pub fn x(&self, ix: usize) -> f64 {
        axis(self.xmin, self.xmax, self.nx, ix)
    }

    pub fn y(&self, iy: usize) -> f64 {
        axis(self.ymin, self.ymax, self.ny, iy)
    }

    pub fn point(&self, ix: usize, iy: usize) -> Vec2 {
        Vec2::new(self.x(ix), self.y(iy))
    }

    pub fn points(&self) -> impl Iterator<Item = Vec2> + '_ {
        (0..self.ny).flat_map(move |iy| (0..self.nx).map(move |ix| self.point(ix, iy)))
    }

    /// The grid shifted by `t`.
    pub fn translated(&self, t: Vec2) -> Grid {
        Grid {
            xmin: self.xmin + t.x,
            xmax: self.xmax + t.x,
            ymin: self.ymin + t.y,
            ymax: self.ymax + t.y,
            ..*self
        }
    }

    pub fn center(&self) -> Vec2 {
        Vec2::new(0.5 * (self.xmin + self.xmax), 0.5 * (self.ymin + self.ymax))
    }
}

/// `F_δ,ij = F_ij (1 + δ ξ_ij)` with `ξ = ξ₁ + iξ₂` standard normal entries
/// (ξ₁ drawn first, then ξ₂, each row-major) scaled to unit Frobenius norm.
pub fn add_noise(f: &FarFieldMatrix, delta: f64, seed: u64) -> Result<FarFieldMatrix> {
    if !(delta >= 0.0 && delta.is_finite()) {
        return Err(Error::domain("add_noise", format!("noise level δ = {delta}")));
    }
    if delta == 0.0 {
        return Ok(f.clone());
    }
    let n = f.n();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let re: Vec<f64> = (0..n * n).map(|_| StandardNormal.sample(&mut rng)).collect();
    let im: Vec<f64> = (0..n * n).map(|_| StandardNormal.sample(&mut rng)).collect();
    let norm = re.iter().chain(&im).map(|v| v * v).sum::<f64>().sqrt();
    let mut entries = f.entries.clone();
    for (k, e) in entries.iter_mut().enumerate() {
        let xi = Complex64::new(re[k], im[k]) / norm;
        *e *= Complex64::new(1.0, 0.0) + delta * xi;
    }
    FarFieldMatrix::new(entries, f.kappa)
}

/// One obstacle of the scene; absent parameters take the family defaults.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneEntry {
    pub kind: ShapeKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub center: Option<Vec2>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scale: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amplitude: Option<f64>,
}

impl SceneEntry {
    pub fn new(kind: ShapeKind) -> Self {
        SceneEntry {
            kind,
            center: None,
            radius: None,
            a: None,
            b: None,
            scale: None,
            amplitude: None,
        }
    }

    pub fn params(&self) -> ShapeParams {
        ShapeParams {
            center: self.center,
            radius: self.radius,
            a: self.a,
            b: self.b,
            scale: self.scale,
            amplitude: self.amplitude,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Physics {
    pub kappa: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Discretization {
    /// Number of incident/observation directions `N`.
    #[serde(default = "default_directions")]
    pub directions: usize,
    /// Quadrature half node count `M̃` per curve.
    #[serde(default = "default_m_half")]
    pub m_half: usize,
}

fn default_directions() -> usize {
    64
}

fn default_m_half() -> usize {
    128
}

impl Default for Discretization {
    fn default() -> Self {
        Discretization {
            directions: default_directions(),
            m_half: default_m_half(),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Noise {
    #[serde(default)]
    pub delta: f64,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Reconstruct {
    pub method: Method,
    /// Regularization `α` of the factorization indicators.
    #[serde(default)]
    pub alpha: f64,
    /// Eigenvalue threshold `δ̃` of the monotonicity indicators.
    #[serde(default)]
    pub threshold: f64,
    /// Probe ball diameter.
    #[serde(default = "default_h")]
    pub h: f64,
    #[serde(default)]
    pub convention: Convention,
    pub grid: Grid,
}

fn default_h() -> f64 {
    0.1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Output {
    #[serde(default = "default_dir")]
    pub dir: PathBuf,
    #[serde(default = "default_farfield")]
    pub farfield: String,
    #[serde(default = "default_field")]
    pub field: String,
    #[serde(default = "default_heatmap")]
    pub heatmap: String,
    #[serde(default = "default_spectrum")]
    pub spectrum: String,
    #[serde(default = "default_manifest")]
    pub manifest: String,
}

fn default_dir() -> PathBuf {
    PathBuf::from("out")
}
fn default_farfield() -> String {
    "farfield.txt".into()
}
fn default_field() -> String {
    "field.csv".into()
}
fn default_heatmap() -> String {
    "field.pgm".into()
}
fn default_spectrum() -> String {
    "spectrum.csv".into()
}
fn default_manifest() -> String {
    "manifest.json".into()
}

impl Default for Output {
    fn default() -> Self {
        Output {
            dir: default_dir(),
            farfield: default_farfield(),
            field: default_field(),
            heatmap: default_heatmap(),
            spectrum: default_spectrum(),
            manifest: default_manifest(),
        }
    }
}

/// Full description of one experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Obstacles keyed `1`, `2`, …; ordered numerically.
    pub scene: BTreeMap<String, SceneEntry>,
    pub physics: Physics,
    #[serde(default)]
    pub discretization: Discretization,
    #[serde(default)]
    pub noise: Noise,
    pub reconstruct: Reconstruct,
    #[serde(default)]
    pub output: Output,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig =
            toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::from(e).context(format!("reading {}", path.display())))?;
        Self::from_toml(&text).map_err(|e| e.context(format!("config {}", path.display())))
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    /// Scene entries in numeric key order.
    pub fn scene_entries(&self) -> Result<Vec<&SceneEntry>> {
        let mut keyed = Vec::with_capacity(self.scene.len());
        for (k, v) in &self.scene {
            let idx: u32 = k
                .parse()
                .map_err(|_| Error::Config(format!("scene key `{k}` is not a positive integer")))?;
            keyed.push((idx, v));
        }
        keyed.sort_by_key(|&(i, _)| i);
        Ok(keyed.into_iter().map(|(_, v)| v).collect())
    }

    pub fn build_scene(&self) -> Result<ObstacleScene> {
        let curves = self
            .scene_entries()?
            .into_iter()
            .map(|e| make_shape(e.kind, &e.params()))
            .collect::<Result<Vec<_>>>()?;
        ObstacleScene::new(curves)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.scene.is_empty() {
            return bad("scene has no obstacles".into());
        }
        self.scene_entries()?;
        let k = self.physics.kappa;
        if !(k > 0.0 && k.is_finite()) {
            return bad(format!("kappa must be positive, got {k}"));
        }
        let d = &self.discretization;
        if d.directions < 8 || !d.directions.is_multiple_of(2) {
            return bad(format!("directions must be even and at least 8, got {}", d.directions));
        }
        if d.m_half < 8 {
            return bad(format!("m_half must be at least 8, got {}", d.m_half));
        }
        let delta = self.noise.delta;
        if !(0.0..1.0).contains(&delta) {
            return bad(format!("noise delta must lie in [0, 1), got {delta}"));
        }
        let r = &self.reconstruct;
        if !(r.alpha >= 0.0 && r.alpha.is_finite()) {
            return bad(format!("alpha must be nonnegative, got {}", r.alpha));
        }
        if !(r.threshold >= 0.0 && r.threshold.is_finite()) {
            return bad(format!("threshold must be nonnegative, got {}", r.threshold));
        }
        if r.method.is_count() && !(r.h > 0.0 && r.h.is_finite()) {
            return bad(format!("probe diameter h must be positive, got {}", r.h));
        }
        r.grid.validate().map_err(|e| e.context("reconstruct.grid"))
    }
}

/// The parameter sets of the four reference experiments.
pub fn builtin_example(n: u32) -> Result<ExperimentConfig> {
    let grid4 = Grid {
        xmin: -4.0,
        xmax: 4.0,
        ymin: -4.0,
        ymax: 4.0,
        nx: 81,
        ny: 81,
    };
    let mut scene = BTreeMap::new();
    let (kappa, noise, alpha, threshold, grid) = match n {
        1 => {
            scene.insert("1".into(), SceneEntry {
                center: Some(Vec2::ZERO),
                radius: Some(0.4),
                ..SceneEntry::new(ShapeKind::Circle)
            });
            (2.0 * PI, Noise::default(), 0.0, 0.0, grid4)
        }
        2 => {
            scene.insert("1".into(), SceneEntry {
                center: Some(Vec2::ZERO),
                a: Some(1.0),
                b: Some(0.5),
                ..SceneEntry::new(ShapeKind::Ellipse)
            });
            (5.36324, Noise::default(), 0.0, 0.0, grid4)
        }
        3 => {
            scene.insert("1".into(), SceneEntry {
                center: Some(Vec2::ZERO),
                scale: Some(0.25),
                ..SceneEntry::new(ShapeKind::RoundedSquare)
            });
            (2.0 * PI, Noise { delta: 0.05, seed: 7 }, 1e-6, 1e-14, grid4)
        }
        4 => {
            scene.insert("1".into(), SceneEntry {
                center: Some(Vec2::new(-4.0, -3.0)),
                radius: Some(0.8),
                amplitude: Some(0.12),
                ..SceneEntry::new(ShapeKind::RoundedTriangle)
            });
            scene.insert("2".into(), SceneEntry {
                center: Some(Vec2::new(3.0, 4.0)),
                scale: Some(0.5),
                ..SceneEntry::new(ShapeKind::Kite)
            });
            let grid = Grid {
                xmin: -10.0,
                xmax: 10.0,
                ymin: -10.0,
                ymax: 10.0,
                nx: 201,
                ny: 201,
            };
            (2.0 * PI, Noise { delta: 0.05, seed: 7 }, 1e-6, 1e-14, grid)
        }
        _ => return Err(Error::Config(format!("no builtin example {n} (1-4)"))),
    };
    Ok(ExperimentConfig {
        scene,
        physics: Physics { kappa },
        discretization: Discretization::default(),
        noise,
        reconstruct: Reconstruct {
            method: Method::W1,
            alpha,
            threshold,
            h: 0.1,
            convention: Convention::Theorem,
            grid,
        },
        output: Output {
            dir: PathBuf::from(format!("out/example{n}")),
            ..Output::default()
        },
    })
}

/// Invariant residuals of a far-field matrix.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Residuals {
    pub unitarity: f64,
    pub far_identity: f64,
}

impl Residuals {
    pub fn of(f: &FarFieldMatrix) -> Self {
        Residuals {
            unitarity: f.unitarity_residual(),
            far_identity: f.far_identity_residual(),
        }
    }
}

/// Everything produced by one experiment run.
#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub config: ExperimentConfig,
    /// Noise-free matrix, when it was simulated in this run.
    pub clean: Option<FarFieldMatrix>,
    /// The matrix the indicator was computed from.
    pub data: FarFieldMatrix,
    pub field: IndicatorField,
    /// Spectrum used by the method (see [`spectrum_label`]).
    pub spectrum: Vec<f64>,
}

/// What [`RunOutcome::spectrum`] holds for a method.
pub fn spectrum_label(method: Method) -> &'static str {
    match method {
        Method::W1 => "singular values of F",
        Method::W2 => "eigenvalues of F_sharp",
        Method::W3 => "eigenvalues of Re F + T_B at the grid center",
        Method::W4 => "eigenvalues of -Re F + T_B at the grid center",
    }
}

/// Simulates the far-field data of the configured scene (noise-free).
pub fn simulate(config: &ExperimentConfig) -> Result<FarFieldMatrix> {
    config.validate()?;
    let scene = config.build_scene()?;
    let d = &config.discretization;
    far_field_matrix(&scene, config.physics.kappa, d.directions, d.m_half)
        .map_err(|e| e.context("simulating far-field data"))
}

/// Indicator field and spectrum of `data` for the configured method.
pub fn reconstruct(config: &ExperimentConfig, data: &FarFieldMatrix) -> Result<(IndicatorField, Vec<f64>)> {
    let r = &config.reconstruct;
    if data.n() != config.discretization.directions {
        return Err(Error::Dimension(format!(
            "far-field data has N = {}, config expects {}",
            data.n(),
            config.discretization.directions
        )));
    }
    let k = config.physics.kappa;
    if (data.kappa - k).abs() > 1e-12 * k {
        return Err(Error::Dimension(format!(
            "far-field data has kappa = {}, config expects {k}",
            data.kappa
        )));
    }
    let result = match r.method {
        Method::W1 => {
            let field = fm_field(data, &r.grid, r.alpha, FmVariant::W1, r.convention)?;
            (field, singular_system(&data.entries)?.values)
        }
        Method::W2 => {
            let field = fm_field(data, &r.grid, r.alpha, FmVariant::W2, r.convention)?;
            let mut ev = herm_eigvals(&fsharp(&data.entries)?)?;
            ev.reverse();
            (field, ev)
        }
        Method::W3 | Method::W4 => {
            let bc = if r.method == Method::W3 {
                BoundaryCondition::Dirichlet
            } else {
                BoundaryCondition::Neumann
            };
            let field = mm_field(data, &r.grid, r.h, r.threshold, bc)?;
            let mut ev = herm_eigvals(&monotonicity_matrix(data, r.grid.center(), r.h, bc)?)?;
            ev.reverse();
            (field, ev)
        }
    };
    Ok(result)
}

/// Runs the full pipeline; when `data` is given it replaces simulation and
/// noise (it is used as is).
pub fn run_experiment_with(config: &ExperimentConfig, data: Option<FarFieldMatrix>) -> Result<RunOutcome> {
    config.validate()?;
    let (clean, data) = match data {
        Some(d) => (None, d),
        None => {
            let clean = simulate(config)?;
            let noisy = add_noise(&clean, config.noise.delta, config.noise.seed)?;
            (Some(clean), noisy)
        }
    };
    let (field, spectrum) =
        reconstruct(config, &data).map_err(|e| e.context(format!("computing {}", config.reconstruct.method)))?;
    Ok(RunOutcome {
        config: config.clone(),
        clean,
        data,
        field,
        spectrum,
    })
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<RunOutcome> {
    run_experiment_with(config, None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{frobenius, CMatrix};

    #[test]
    fn grid_examples() {
        let g = make_grid([-4.0, 4.0, -4.0, 4.0], 81, 81).unwrap();
        assert!((g.dx() - 0.1).abs() < 1e-15);
        assert_eq!(g.points().next().unwrap(), Vec2::new(-4.0, -4.0));
        assert_eq!(g.points().count(), 6561);
        let g = make_grid([-10.0, 10.0, -10.0, 10.0], 201, 201).unwrap();
        assert!((g.dy() - 0.1).abs() < 1e-15);
        let g = make_grid([0.0, 1.0, 0.0, 1.0], 2, 2).unwrap();
        let pts: Vec<Vec2> = g.points().collect();
        assert_eq!(
            pts,
            vec![Vec2::new(0.0, 0.0), Vec2::new(1.0, 0.0), Vec2::new(0.0, 1.0), Vec2::new(1.0, 1.0)]
        );
    }

    #[test]
    fn degenerate_grids() {
        assert!(matches!(make_grid([0.0, 0.0, 0.0, 1.0], 3, 3), Err(Error::Degenerate(_))));
        assert!(matches!(make_grid([0.0, 1.0, 0.0, 1.0], 1, 3), Err(Error::Degenerate(_))));
    }

    fn sample_matrix() -> FarFieldMatrix {
        let e = CMatrix::from_shape_fn((8, 8), |(i, j)| Complex64::new(1.0 + i as f64, j as f64 - 3.0));
        FarFieldMatrix::new(e, 2.0).unwrap()
    }

    #[test]
    fn noise_contract() {
        let f = sample_matrix();
        assert_eq!(add_noise(&f, 0.0, 3).unwrap(), f);
        let a = add_noise(&f, 0.05, 3).unwrap();
        let b = add_noise(&f, 0.05, 3).unwrap();
        let c = add_noise(&f, 0.05, 4).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
        let fmax = f.entries.iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(frobenius(&(&a.entries - &f.entries)) <= 0.05 * fmax * (1.0 + 1e-12));
        // Perturbation is linear in δ for a fixed seed.
        let a2 = add_noise(&f, 0.1, 3).unwrap();
        let d1 = frobenius(&(&a.entries - &f.entries));
        let d2 = frobenius(&(&a2.entries - &f.entries));
        assert!((d2 / d1 - 2.0).abs() < 1e-12);
    }

    #[test]
    fn builtin_examples() {
        let e1 = builtin_example(1).unwrap();
        assert_eq!(e1.physics.kappa, 2.0 * PI);
        assert_eq!((e1.reconstruct.grid.nx, e1.reconstruct.grid.ny), (81, 81));
        assert_eq!(e1.reconstruct.grid.xmin, -4.0);
        assert_eq!(builtin_example(2).unwrap().physics.kappa, 5.36324);
        let e4 = builtin_example(4).unwrap();
        let scene = e4.build_scene().unwrap();
        assert_eq!(scene.len(), 2);
        let centers: Vec<Vec2> = scene.curves().iter().map(|c| c.shape().center()).collect();
        assert_eq!(centers, vec![Vec2::new(-4.0, -3.0), Vec2::new(3.0, 4.0)]);
        assert!(builtin_example(5).is_err());
        for n in 1..=4 {
            builtin_example(n).unwrap().validate().unwrap();
        }
    }

    #[test]
    fn toml_round_trip() {
        for n in 1..=4 {
            let cfg = builtin_example(n).unwrap();
            let text = cfg.to_toml().unwrap();
            assert_eq!(ExperimentConfig::from_toml(&text).unwrap(), cfg);
        }
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let mut text = builtin_example(1).unwrap().to_toml().unwrap();
        text = text.replace("[physics]", "[physics]\nwavelength = 1.0");
        let err = ExperimentConfig::from_toml(&text).unwrap_err();
        assert!(err.to_string().contains("wavelength"), "{err}");

        let text = builtin_example(1).unwrap().to_toml().unwrap().replace("[noise]", "[noize]");
        assert!(ExperimentConfig::from_toml(&text).is_err());
    }

    #[test]
    fn invalid_values_are_rejected() {
        let mut cfg = builtin_example(1).unwrap();
        cfg.physics.kappa = -1.0;
        assert!(cfg.validate().is_err());
        let mut cfg = builtin_example(1).unwrap();
        cfg.discretization.directions = 63;
        assert!(cfg.validate().is_err());
        let mut cfg = builtin_example(1).unwrap();
        cfg.reconstruct.method = Method::W3;
        cfg.reconstruct.h = 0.0;
        assert!(cfg.validate().is_err());
        let mut cfg = builtin_example(1).unwrap();
        cfg.scene.insert("x".into(), SceneEntry::new(ShapeKind::Kite));
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn mismatched_data_is_rejected() {
        let cfg = builtin_example(1).unwrap();
        let f = sample_matrix();
        assert!(matches!(reconstruct(&cfg, &f), Err(Error::Dimension(_))));
    }
}
