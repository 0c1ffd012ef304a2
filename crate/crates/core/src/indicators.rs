//! Sampling indicators for obstacle reconstruction from a far-field matrix.
//!
//! * `W1`, `W2`: factorization-method indicators built on the spectra of
//!   `(F*F)^{1/4}` and `F_#^{1/2}`; large values mark the obstacle.
//! * `W3`, `W4`: monotonicity indicators counting eigenvalues of
//!   `±Re F + T_B` above a threshold; small counts mark the obstacle.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use ndarray::Array2;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::experiment::Grid;
use crate::forward::FarFieldMatrix;
use crate::geometry::Vec2;
use crate::linalg::{herm_abs, herm_eig, herm_eigvals, hermitian_part, singular_system, skew_part, CMatrix};
use crate::specfun;

/// Relative cutoff below which spectral terms are dropped when `α = 0`.
pub const SPECTRAL_CUTOFF: f64 = 1e-14;

/// Eigenvalues of an `n × n` Hermitian matrix below `n·ε·max|λ|` cannot be
/// told apart from zero, so the monotonicity counts never include them.
pub fn numerical_floor(eigenvalues: &[f64]) -> f64 {
    let lmax = eigenvalues.iter().fold(0.0_f64, |m, l| m.max(l.abs()));
    eigenvalues.len() as f64 * f64::EPSILON * lmax
}

/// Sign of the phase in the test vector `φ_z`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Convention {
    /// `φ_z(d) = e^{−iκ d·z}`
    #[default]
    Theorem,
    /// `φ_z(d) = e^{+iκ d·z}`
    Section5,
}

impl Convention {
    fn sign(self) -> f64 {
        match self {
            Convention::Theorem => -1.0,
            Convention::Section5 => 1.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Convention::Theorem => "theorem",
            Convention::Section5 => "section5",
        }
    }
}

impl fmt::Display for Convention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Convention {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "theorem" => Ok(Convention::Theorem),
            "section5" => Ok(Convention::Section5),
            _ => Err(Error::Parse(format!("unknown convention `{s}` (theorem | section5)"))),
        }
    }
}

/// Reconstruction method.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Method {
    W1,
    W2,
    W3,
    W4,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::W1, Method::W2, Method::W3, Method::W4];

    /// Whether the field holds eigenvalue counts.
    pub fn is_count(self) -> bool {
        matches!(self, Method::W3 | Method::W4)
    }

    pub fn name(self) -> &'static str {
        match self {
            Method::W1 => "W1",
            Method::W2 => "W2",
            Method::W3 => "W3",
            Method::W4 => "W4",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "W1" => Ok(Method::W1),
            "W2" => Ok(Method::W2),
            "W3" => Ok(Method::W3),
            "W4" => Ok(Method::W4),
            _ => Err(Error::Parse(format!("unknown method `{s}` (W1 | W2 | W3 | W4)"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FmVariant {
    W1,
    W2,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryCondition {
    Dirichlet,
    Neumann,
}

/// `φ_z` sampled at the directions.
#[derive(Clone, Debug, PartialEq)]
pub struct TestVector {
    pub values: Vec<Complex64>,
    pub convention: Convention,
}

pub fn test_vector(z: Vec2, kappa: f64, dirs: &[Vec2], convention: Convention) -> TestVector {
    let s = convention.sign() * kappa;
    TestVector {
        values: dirs.iter().map(|d| Complex64::from_polar(1.0, s * d.dot(z))).collect(),
        convention,
    }
}

/// Parameters recorded with an indicator field.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IndicatorMeta {
    pub method: Method,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub h: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub convention: Option<Convention>,
}

/// One indicator value per grid point, in grid enumeration order. Counts
/// (`W3`, `W4`) are stored as exact small integers.
#[derive(Clone, Debug, PartialEq)]
pub struct IndicatorField {
    pub grid: Grid,
    pub values: Vec<f64>,
    pub meta: IndicatorMeta,
}

impl IndicatorField {
    /// Values at points satisfying `pred`.
    pub fn select(&self, pred: impl Fn(Vec2) -> bool) -> Vec<f64> {
        self.grid
            .points()
            .zip(&self.values)
            .filter(|(p, _)| pred(*p))
            .map(|(_, &v)| v)
            .collect()
    }
}

/// `F_# = |Re F| + |Im F|` with `Re F = (F+F*)/2`, `Im F = (F−F*)/(2i)`.
pub fn fsharp(f: &CMatrix) -> Result<CMatrix> {
    Ok(herm_abs(&hermitian_part(f))? + herm_abs(&skew_part(f))?)
}

/// Spectral data `(λ_j, ψ_j)` of the operator whose range is tested.
#[derive(Clone, Debug)]
pub struct FmSpectrum {
    pub lambda: Vec<f64>,
    pub vectors: CMatrix,
}

impl FmSpectrum {
    pub fn new(f: &FarFieldMatrix, variant: FmVariant) -> Result<Self> {
        match variant {
            FmVariant::W1 => {
                let s = singular_system(&f.entries)?;
                Ok(FmSpectrum {
                    lambda: s.values.iter().map(|v| v.sqrt()).collect(),
                    vectors: s.vectors,
                })
            }
            FmVariant::W2 => {
                let e = herm_eig(&fsharp(&f.entries)?)?;
                Ok(FmSpectrum {
                    lambda: e.values.iter().map(|v| v.max(0.0).sqrt()).collect(),
                    vectors: e.vectors,
                })
            }
        }
    }

    /// Picard weights `|λ|/(α + |λ|²)`, zero for dropped terms.
    fn weights(&self, alpha: f64) -> Result<Vec<f64>> {
        let lmax = self.lambda.iter().fold(0.0_f64, |m, l| m.max(l.abs()));
        let cut = if alpha == 0.0 { SPECTRAL_CUTOFF * lmax } else { 0.0 };
        let w: Vec<f64> = self
            .lambda
            .iter()
            .map(|l| {
                let a = l.abs();
                if a < cut || a == 0.0 {
                    0.0
                } else {
                    a / (alpha + a * a)
                }
            })
            .collect();
        if w.iter().all(|&x| x == 0.0) {
            return Err(Error::Degenerate(
                "all spectral values are below the cutoff (far-field matrix is ≈ 0)".into(),
            ));
        }
        Ok(w)
    }
}

/// Factorization-method indicator `W(z) = [Σ_j |λ_j|/(α+|λ_j|²) |(φ_z, ψ_j)|²]^{−1}`.
pub fn fm_field(
    f: &FarFieldMatrix,
    grid: &Grid,
    alpha: f64,
    variant: FmVariant,
    convention: Convention,
) -> Result<IndicatorField> {
    if !(alpha >= 0.0) {
        return Err(Error::domain("fm_field", format!("regularization α = {alpha}")));
    }
    let spec = FmSpectrum::new(f, variant)?;
    let weights = spec.weights(alpha)?;
    let dirs = f.directions();
    let kappa = f.kappa;
    let psi = &spec.vectors;
    let points: Vec<Vec2> = grid.points().collect();
    let values = points
        .par_iter()
        .map(|&z| {
            let phi = test_vector(z, kappa, &dirs, convention).values;
            let mut total = 0.0;
            for (j, &w) in weights.iter().enumerate() {
                if w == 0.0 {
                    continue;
                }
                // (φ, ψ_j) = Σ_k φ_k conj(ψ_kj)
                let c: Complex64 = psi.column(j).iter().zip(&phi).map(|(p, f)| f * p.conj()).sum();
                total += w * c.norm_sqr();
            }
            1.0 / total
        })
        .collect();
    Ok(IndicatorField {
        grid: grid.clone(),
        values,
        meta: IndicatorMeta {
            method: match variant {
                FmVariant::W1 => Method::W1,
                FmVariant::W2 => Method::W2,
            },
            alpha: Some(alpha),
            threshold: None,
            h: None,
            convention: Some(convention),
        },
    })
}

/// Probing Gram matrix of plane waves on the circle `|x − z| = h/2`.
#[derive(Clone, Debug)]
pub struct ProbeMatrix {
    pub matrix: CMatrix,
    pub z: Vec2,
    pub h: f64,
    pub kappa: f64,
}

/// Real symmetric probing matrix at `z = 0`:
/// `(2π/N) πh J₀((κh/2)|d_i − d_j|)`; its entries depend on `(i − j) mod N`.
fn probe_base(h: f64, kappa: f64, dirs: &[Vec2]) -> Result<CMatrix> {
    let n = dirs.len();
    let scale = 2.0 * PI / n as f64 * PI * h;
    let row: Vec<f64> = (0..n)
        .map(|k| specfun::bessel_j(0, 0.5 * kappa * h * (dirs[k] - dirs[0]).norm()).map(|j| scale * j))
        .collect::<Result<_>>()?;
    Ok(Array2::from_shape_fn((n, n), |(i, j)| {
        // |d_i − d_j| = |d_{(i−j) mod N} − d_0| on an equispaced circle grid.
        Complex64::new(row[(i + n - j) % n], 0.0)
    }))
}

fn conjugate_by_phases(base: &CMatrix, z: Vec2, kappa: f64, dirs: &[Vec2]) -> CMatrix {
    let p: Vec<Complex64> = dirs.iter().map(|d| Complex64::from_polar(1.0, kappa * z.dot(*d))).collect();
    let mut m = base.clone();
    for ((i, j), e) in m.indexed_iter_mut() {
        *e *= p[i].conj() * p[j];
    }
    m
}

/// `T_B[i][j] = (2π/N) πh e^{iκz·(d_j−d_i)} J₀((κh/2)|d_i − d_j|)` for the
/// ball `B = B_{h/2}(z)`.
pub fn probe_gram(z: Vec2, h: f64, kappa: f64, dirs: &[Vec2]) -> Result<ProbeMatrix> {
    if !(h > 0.0) {
        return Err(Error::domain("probe_gram", format!("probe diameter h = {h}")));
    }
    let base = probe_base(h, kappa, dirs)?;
    Ok(ProbeMatrix {
        matrix: conjugate_by_phases(&base, z, kappa, dirs),
        z,
        h,
        kappa,
    })
}

/// `±Re F + T_B` at `z`.
pub fn monotonicity_matrix(
    f: &FarFieldMatrix,
    z: Vec2,
    h: f64,
    bc: BoundaryCondition,
) -> Result<CMatrix> {
    let re = hermitian_part(&f.entries);
    let sign = match bc {
        BoundaryCondition::Dirichlet => 1.0,
        BoundaryCondition::Neumann => -1.0,
    };
    Ok(re.mapv(|x| x * sign) + probe_gram(z, h, f.kappa, &f.directions())?.matrix)
}

/// Monotonicity indicator: the number of eigenvalues of `±Re F + T_B`
/// greater than `threshold` (`+` Dirichlet / `W3`, `−` Neumann / `W4`), never
/// counting eigenvalues under [`numerical_floor`].
pub fn mm_field(
    f: &FarFieldMatrix,
    grid: &Grid,
    h: f64,
    threshold: f64,
    bc: BoundaryCondition,
) -> Result<IndicatorField> {
    if !(h > 0.0) {
        return Err(Error::domain("mm_field", format!("probe diameter h = {h}")));
    }
    if !(threshold >= 0.0) {
        return Err(Error::domain("mm_field", format!("threshold {threshold}")));
    }
    let dirs = f.directions();
    let kappa = f.kappa;
    let sign = match bc {
        BoundaryCondition::Dirichlet => 1.0,
        BoundaryCondition::Neumann => -1.0,
    };
    let re = hermitian_part(&f.entries).mapv(|x| x * sign);
    let base = probe_base(h, kappa, &dirs)?;
    let points: Vec<Vec2> = grid.points().collect();
    let values = points
        .par_iter()
        .map(|&z| {
            let a = &re + &conjugate_by_phases(&base, z, kappa, &dirs);
            let ev = herm_eigvals(&a)?;
            let cut = threshold.max(numerical_floor(&ev));
            Ok(ev.iter().filter(|&&l| l > cut).count() as f64)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(IndicatorField {
        grid: grid.clone(),
        values,
        meta: IndicatorMeta {
            method: match bc {
                BoundaryCondition::Dirichlet => Method::W3,
                BoundaryCondition::Neumann => Method::W4,
            },
            alpha: None,
            threshold: Some(threshold),
            h: Some(h),
            convention: None,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiment::make_grid;
    use crate::forward::directions;
    use crate::linalg::{frobenius, identity};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn small_grid() -> Grid {
        make_grid([-1.0, 1.0, -1.0, 1.0], 5, 4).unwrap()
    }

    fn random_matrix(n: usize, seed: u64) -> CMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        CMatrix::from_shape_fn((n, n), |_| {
            Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        })
    }

    #[test]
    fn test_vector_properties() {
        let dirs = directions(16);
        let one = test_vector(Vec2::ZERO, 3.0, &dirs, Convention::Theorem);
        assert!(one.values.iter().all(|v| *v == Complex64::new(1.0, 0.0)));
        let z = Vec2::new(0.3, -1.2);
        let a = test_vector(z, 3.0, &dirs, Convention::Theorem);
        let b = test_vector(z, 3.0, &dirs, Convention::Section5);
        for (x, y) in a.values.iter().zip(&b.values) {
            assert!((x.norm() - 1.0).abs() < 1e-15);
            assert_eq!(*x, y.conj());
        }
    }

    #[test]
    fn identity_far_field_gives_inverse_n() {
        let n = 16;
        let f = FarFieldMatrix::new(identity(n), 2.0).unwrap();
        let field = fm_field(&f, &small_grid(), 0.0, FmVariant::W1, Convention::Theorem).unwrap();
        for v in &field.values {
            assert!((v - 1.0 / n as f64).abs() < 1e-14);
        }
    }

    #[test]
    fn zero_far_field_is_degenerate() {
        let f = FarFieldMatrix::new(CMatrix::zeros((8, 8)), 2.0).unwrap();
        let r = fm_field(&f, &small_grid(), 0.0, FmVariant::W1, Convention::Theorem);
        assert!(matches!(r, Err(Error::Degenerate(_))));
    }

    #[test]
    fn fsharp_cases() {
        let b = random_matrix(12, 1);
        let psd = crate::linalg::adjoint(&b).dot(&b);
        assert!(frobenius(&(fsharp(&psd).unwrap() - &psd)) <= 1e-11 * frobenius(&psd));
        let ii = identity(6).mapv(|z| z * Complex64::new(0.0, 1.0));
        assert!(frobenius(&(fsharp(&ii).unwrap() - identity(6))) < 1e-14);
    }

    #[test]
    fn fsharp_dominates_real_part() {
        let f = random_matrix(30, 2);
        let fs = herm_eigvals(&fsharp(&f).unwrap()).unwrap();
        let mut re: Vec<f64> = herm_eigvals(&hermitian_part(&f)).unwrap().iter().map(|l| l.abs()).collect();
        re.sort_by(f64::total_cmp);
        for (a, b) in fs.iter().zip(&re) {
            assert!(*a >= b - 1e-10);
        }
    }

    #[test]
    fn probe_gram_closed_form() {
        let dirs = directions(64);
        let (kappa, h) = (2.0 * PI, 0.1);
        let z = Vec2::new(1.0, 2.0);
        let t = probe_gram(z, h, kappa, &dirs).unwrap().matrix;
        let n = dirs.len() as f64;
        for i in 0..dirs.len() {
            assert!((t[[i, i]] - 2.0 * PI / n * PI * h).norm() < 1e-15);
            for j in 0..dirs.len() {
                // Direct formula evaluation.
                let arg = 0.5 * kappa * h * (dirs[i] - dirs[j]).norm();
                let direct = 2.0 * PI / n * PI * h
                    * Complex64::from_polar(1.0, kappa * z.dot(dirs[j] - dirs[i]))
                    * specfun::bessel_j(0, arg).unwrap();
                assert!((t[[i, j]] - direct).norm() < 1e-15);
                assert!((t[[i, j]] - t[[j, i]].conj()).norm() < 1e-13);
            }
        }
        let tr: f64 = (0..64).map(|i| t[[i, i]].re).sum();
        let ev = herm_eigvals(&t).unwrap();
        assert!(ev[0] >= -1e-12 * tr);

        let t0 = probe_gram(Vec2::ZERO, h, kappa, &dirs).unwrap().matrix;
        assert!(t0.iter().all(|z| z.im == 0.0));
    }

    #[test]
    fn zero_far_field_counts_are_position_independent() {
        let dirs_n = 32;
        let f = FarFieldMatrix::new(CMatrix::zeros((dirs_n, dirs_n)), 2.0 * PI).unwrap();
        let grid = small_grid();
        let h = 0.5;
        let field = mm_field(&f, &grid, h, 1e-3, BoundaryCondition::Dirichlet).unwrap();
        let t = probe_gram(Vec2::ZERO, h, 2.0 * PI, &directions(dirs_n)).unwrap();
        let expected = herm_eigvals(&t.matrix).unwrap().iter().filter(|&&l| l > 1e-3).count() as f64;
        assert!(field.values.iter().all(|&v| v == expected));
    }

    #[test]
    fn counts_decrease_with_threshold() {
        let n = 16;
        let f = FarFieldMatrix::new(random_matrix(n, 3).mapv(|z| z * 0.05), 2.0 * PI).unwrap();
        let grid = small_grid();
        let mut prev: Option<Vec<f64>> = None;
        for th in [0.0, 1e-6, 1e-3, 1e-2, 0.1] {
            let field = mm_field(&f, &grid, 0.3, th, BoundaryCondition::Neumann).unwrap();
            assert!(field.values.iter().all(|&v| v >= 0.0 && v <= n as f64));
            if let Some(p) = &prev {
                assert!(field.values.iter().zip(p).all(|(a, b)| a <= b));
            }
            prev = Some(field.values);
        }
    }

    #[test]
    fn method_parsing() {
        assert_eq!("w3".parse::<Method>().unwrap(), Method::W3);
        assert!("W5".parse::<Method>().is_err());
        assert_eq!("section5".parse::<Convention>().unwrap(), Convention::Section5);
    }
}
