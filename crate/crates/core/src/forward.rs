//! Direct scattering by clamped obstacles.
//!
//! The scattered field is represented as
//! `v(x) = ∮ G(x,y) τ(y) + ∂_{n(y)} G(x,y) σ(y) ds(y)` and the densities are
//! found from the boundary system `S(τ, σ) = −(u^in, ∂_n u^in)`, discretized
//! with a Nyström scheme: Kress product quadrature for the logarithmic part
//! of self-interactions and the plain trapezoid rule elsewhere.

use std::f64::consts::PI;

use ndarray::{Array1, Array2};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{quadrature_layout, ObstacleScene, QuadratureLayout, Vec2};
use crate::kernels::{block_at, farfield_row_at, sdir_selfsplit};
use crate::linalg::{adjoint, frobenius, identity, lu_factor, CMatrix, LuFactors};
use crate::specfun;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Systems whose reciprocal condition estimate falls below this are
/// rejected; it signals a wavenumber at (or extremely near) an interior
/// eigenvalue of a scene component.
pub const MIN_RCOND: f64 = 1e-13;

/// The `N` equispaced unit directions `d_j = (cos 2πj/N, sin 2πj/N)`,
/// `j = 0, …, N−1`.
pub fn directions(n: usize) -> Vec<Vec2> {
    (0..n)
        .map(|j| Vec2::polar(2.0 * PI * j as f64 / n as f64))
        .collect()
}

/// Layer densities at the quadrature nodes, in global node order.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityPair {
    pub tau: Vec<Complex64>,
    pub sigma: Vec<Complex64>,
}

impl DensityPair {
    pub fn zeros(n: usize) -> Self {
        let z = Complex64::new(0.0, 0.0);
        DensityPair {
            tau: vec![z; n],
            sigma: vec![z; n],
        }
    }

    pub fn len(&self) -> usize {
        self.tau.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tau.is_empty()
    }

    /// Interleaved `[τ_0, σ_0, τ_1, σ_1, …]`.
    pub fn interleaved(&self) -> Vec<Complex64> {
        self.tau
            .iter()
            .zip(&self.sigma)
            .flat_map(|(&t, &s)| [t, s])
            .collect()
    }

    pub fn from_interleaved(v: &[Complex64]) -> Self {
        DensityPair {
            tau: v.iter().step_by(2).copied().collect(),
            sigma: v.iter().skip(1).step_by(2).copied().collect(),
        }
    }
}

/// Discrete far-field operator: entry `(i, j) = (2π/N) u∞(d_i; d_j)`, with
/// observation index `i` and incidence index `j` on the same direction grid.
#[derive(Clone, Debug, PartialEq)]
pub struct FarFieldMatrix {
    pub entries: CMatrix,
    pub kappa: f64,
}

impl FarFieldMatrix {
    pub fn new(entries: CMatrix, kappa: f64) -> Result<Self> {
        let (r, c) = entries.dim();
        if r != c {
            return Err(Error::Dimension(format!("far-field matrix is {r}x{c}")));
        }
        if r < 2 || r % 2 != 0 {
            return Err(Error::Dimension(format!(
                "direction count must be even and positive, got {r}"
            )));
        }
        if !(kappa > 0.0 && kappa.is_finite()) {
            return Err(Error::domain("FarFieldMatrix", format!("wavenumber {kappa}")));
        }
        if entries.iter().any(|z| !z.is_finite()) {
            return Err(Error::domain("FarFieldMatrix", "non-finite entry"));
        }
        Ok(FarFieldMatrix { entries, kappa })
    }

    pub fn n(&self) -> usize {
        self.entries.nrows()
    }

    pub fn directions(&self) -> Vec<Vec2> {
        directions(self.n())
    }

    /// `‖(I + (i/4π)F)(I + (i/4π)F)* − I‖_F`
    pub fn unitarity_residual(&self) -> f64 {
        let n = self.n();
        let l = identity(n) + self.entries.mapv(|z| z * I / (4.0 * PI));
        frobenius(&(l.dot(&adjoint(&l)) - identity(n)))
    }

    /// `‖F − F* − (i/4π)F*F‖_F / ‖F‖_F`
    pub fn far_identity_residual(&self) -> f64 {
        let f = &self.entries;
        let fa = adjoint(f);
        let g = fa.dot(f).mapv(|z| z * I / (4.0 * PI));
        frobenius(&(f - &fa - g)) / frobenius(f)
    }

    /// `D* F D` with `D = diag(e^{iκ d_j·t})`: the matrix of the scene
    /// translated by `t`.
    pub fn translated(&self, t: Vec2) -> FarFieldMatrix {
        let phases: Vec<Complex64> = self
            .directions()
            .iter()
            .map(|d| Complex64::from_polar(1.0, self.kappa * d.dot(t)))
            .collect();
        let mut entries = self.entries.clone();
        for ((i, j), z) in entries.indexed_iter_mut() {
            *z *= phases[i].conj() * phases[j];
        }
        FarFieldMatrix {
            entries,
            kappa: self.kappa,
        }
    }
}

/// Kress weights `R(kπ/M̃)`, `k = 0, …, 2M̃−1`, for the product rule
/// `∫₀^{2π} ln(4 sin²((t−s)/2)) f(s) ds ≈ Σ_j R(t − t_j) f(t_j)`.
pub fn kress_weights(m_half: usize) -> Vec<f64> {
    let m = m_half as f64;
    (0..2 * m_half)
        .map(|k| {
            let h = k as f64 * PI / m;
            let sum: f64 = (1..m_half).map(|j| (j as f64 * h).cos() / j as f64).sum();
            -2.0 * PI / m * sum - PI / (m * m) * (m * h).cos()
        })
        .collect()
}

/// Dense Nyström matrix of the boundary system with its LU factors.
///
/// Unknowns and equations are indexed `2·node + component`, where component
/// 0 is the trace (density `τ`) and 1 the normal derivative (density `σ`).
#[derive(Debug)]
pub struct BoundarySystem {
    kappa: f64,
    layout: QuadratureLayout,
    matrix: CMatrix,
    lu: LuFactors,
}

/// Builds and factors the Nyström matrix for `scene` with `2M̃` nodes per
/// curve.
pub fn assemble(scene: &ObstacleScene, kappa: f64, m_half: usize) -> Result<BoundarySystem> {
    if !(kappa > 0.0 && kappa.is_finite()) {
        return Err(Error::domain("assemble", format!("wavenumber {kappa}")));
    }
    let layout = quadrature_layout(scene, m_half)?;
    let matrix = assemble_matrix(scene, &layout, kappa);
    let lu = lu_factor(&matrix).map_err(|e| e.context("factoring the boundary system"))?;
    log::debug!(
        "boundary system: {} unknowns, rcond ≈ {:.3e}",
        matrix.nrows(),
        lu.rcond()
    );
    if lu.rcond() < MIN_RCOND {
        return Err(Error::IllConditioned { rcond: lu.rcond() });
    }
    Ok(BoundarySystem {
        kappa,
        layout,
        matrix,
        lu,
    })
}

fn assemble_matrix(scene: &ObstacleScene, layout: &QuadratureLayout, kappa: f64) -> CMatrix {
    let total = layout.total_nodes();
    let m_half = layout.m_half();
    let w = PI / m_half as f64;
    let kress = kress_weights(m_half);
    let nodes = layout.curves();
    let curves = scene.curves();

    // Each task fills the two equation rows of one node.
    let rows: Vec<[Vec<Complex64>; 2]> = (0..total)
        .into_par_iter()
        .map(|gi| {
            let ci = (0..nodes.len())
                .rev()
                .find(|&c| layout.offset(c) <= gi)
                .expect("node belongs to a curve");
            let i = gi - layout.offset(ci);
            let ni = &nodes[ci];
            let mut row = [
                vec![Complex64::new(0.0, 0.0); 2 * total],
                vec![Complex64::new(0.0, 0.0); 2 * total],
            ];
            for (cj, nj) in nodes.iter().enumerate() {
                let off = layout.offset(cj);
                for j in 0..nj.len() {
                    let col = 2 * (off + j);
                    if cj == ci {
                        let split = sdir_selfsplit(kappa, &curves[ci], ni.t[i], nj.t[j]);
                        let r = kress[(i + nj.len() - j) % nj.len()];
                        for a in 0..2 {
                            for b in 0..2 {
                                row[a][col + b] =
                                    (r * split.k1[a][b] + w * split.k2[a][b]) * nj.speed[j];
                            }
                        }
                    } else {
                        let k = block_at(kappa, ni.x[i], ni.normal[i], nj.x[j], nj.normal[j]);
                        for a in 0..2 {
                            for b in 0..2 {
                                row[a][col + b] = w * nj.speed[j] * k.0[a][b];
                            }
                        }
                    }
                }
            }
            row
        })
        .collect();

    let mut a = CMatrix::zeros((2 * total, 2 * total));
    for (gi, [r0, r1]) in rows.into_iter().enumerate() {
        a.row_mut(2 * gi).assign(&Array1::from(r0));
        a.row_mut(2 * gi + 1).assign(&Array1::from(r1));
    }
    a
}

impl BoundarySystem {
    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn layout(&self) -> &QuadratureLayout {
        &self.layout
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn rcond(&self) -> f64 {
        self.lu.rcond()
    }

    /// Applies the discrete operator to a density pair.
    pub fn apply(&self, w: &DensityPair) -> Result<DensityPair> {
        self.check_len(w)?;
        let v = self.matrix.dot(&Array1::from(w.interleaved()));
        Ok(DensityPair::from_interleaved(v.as_slice().expect("contiguous")))
    }

    /// Discrete `⟨w, S w⟩ = Σ_i |x′_i|(π/M̃) [τ_i conj((Sw)_{i,0}) + σ_i conj((Sw)_{i,1})]`.
    pub fn quadratic_form(&self, w: &DensityPair) -> Result<Complex64> {
        let sw = self.apply(w)?;
        let weights = self.layout.arc_weights();
        Ok(weights
            .iter()
            .enumerate()
            .map(|(i, &wt)| wt * (w.tau[i] * sw.tau[i].conj() + w.sigma[i] * sw.sigma[i].conj()))
            .sum())
    }

    /// Right-hand side `−(u^in, ∂_n u^in)` at the nodes for `u^in = e^{iκx·d}`.
    pub fn plane_wave_rhs(&self, d: Vec2) -> Vec<Complex64> {
        let k = self.kappa;
        self.layout
            .curves()
            .iter()
            .flat_map(|c| c.x.iter().zip(&c.normal))
            .flat_map(|(x, n)| {
                let u = Complex64::from_polar(1.0, k * x.dot(d));
                [-u, -I * k * n.dot(d) * u]
            })
            .collect()
    }

    /// Densities for a general right-hand side (interleaved ordering).
    pub fn solve_rhs(&self, rhs: &[Complex64]) -> Result<DensityPair> {
        if rhs.len() != self.matrix.nrows() {
            return Err(Error::Dimension(format!(
                "right-hand side has {} entries, system has {}",
                rhs.len(),
                self.matrix.nrows()
            )));
        }
        let mut x = rhs.to_vec();
        self.lu.solve_vec(&mut x);
        Ok(DensityPair::from_interleaved(&x))
    }

    fn check_len(&self, w: &DensityPair) -> Result<()> {
        let n = self.layout.total_nodes();
        if w.tau.len() != n || w.sigma.len() != n {
            return Err(Error::Dimension(format!(
                "densities have {}/{} entries, layout has {n} nodes",
                w.tau.len(),
                w.sigma.len()
            )));
        }
        Ok(())
    }
}

/// Densities of the scattered field for the incident plane wave `e^{iκx·d}`.
pub fn solve_plane_wave(system: &BoundarySystem, d: Vec2) -> Result<DensityPair> {
    system.solve_rhs(&system.plane_wave_rhs(d))
}

/// Row `i` holds `−(1/2κ²)(π/M̃)|x′_j|·(e^{−iκx̂_i·y_j}, ∂_{n(y)} e^{−iκx̂_i·y_j})`
/// interleaved over the nodes `j`.
fn far_field_operator(layout: &QuadratureLayout, kappa: f64, dirs: &[Vec2]) -> CMatrix {
    let weights = layout.arc_weights();
    let ys: Vec<(Vec2, Vec2)> = layout
        .curves()
        .iter()
        .flat_map(|c| c.x.iter().copied().zip(c.normal.iter().copied()))
        .collect();
    let scale = -1.0 / (2.0 * kappa * kappa);
    let mut e = CMatrix::zeros((dirs.len(), 2 * ys.len()));
    let width = 2 * ys.len();
    e.as_slice_mut()
        .expect("standard layout")
        .par_chunks_mut(width.max(1))
        .zip(dirs.par_iter())
        .for_each(|(row, &xhat)| {
            for (j, &(y, ny)) in ys.iter().enumerate() {
                let [a, b] = farfield_row_at(kappa, xhat, y, ny);
                let s = scale * weights[j];
                row[2 * j] = s * a;
                row[2 * j + 1] = s * b;
            }
        });
    e
}

/// Far-field pattern `u∞(x̂)` of the given densities at each direction.
pub fn far_field_vector(
    densities: &DensityPair,
    layout: &QuadratureLayout,
    kappa: f64,
    dirs: &[Vec2],
) -> Result<Vec<Complex64>> {
    let n = layout.total_nodes();
    if densities.tau.len() != n || densities.sigma.len() != n {
        return Err(Error::Dimension(format!(
            "densities have {} entries, layout has {n} nodes",
            densities.tau.len()
        )));
    }
    let e = far_field_operator(layout, kappa, dirs);
    Ok(e.dot(&Array1::from(densities.interleaved())).to_vec())
}

/// Far-field matrix of `scene` from an already assembled system.
pub fn far_field_matrix_from(system: &BoundarySystem, n: usize) -> Result<FarFieldMatrix> {
    let dirs = directions(n);
    let kappa = system.kappa();
    let mut rhs = CMatrix::zeros((system.matrix.nrows(), n));
    for (j, d) in dirs.iter().enumerate() {
        rhs.column_mut(j).assign(&Array1::from(system.plane_wave_rhs(*d)));
    }
    let x = system.lu.solve(&rhs)?;
    let e = far_field_operator(system.layout(), kappa, &dirs);
    let f = e.dot(&x).mapv(|z| z * (2.0 * PI / n as f64));
    FarFieldMatrix::new(f, kappa)
}

/// Discrete far-field operator of `scene` with `N` directions and `2M̃`
/// nodes per curve.
pub fn far_field_matrix(
    scene: &ObstacleScene,
    kappa: f64,
    n: usize,
    m_half: usize,
) -> Result<FarFieldMatrix> {
    if n < 8 || !n.is_multiple_of(2) {
        return Err(Error::Dimension(format!(
            "direction count must be even and at least 8, got {n}"
        )));
    }
    let system = assemble(scene, kappa, m_half)?;
    far_field_matrix_from(&system, n)
}

/// Mode coefficients `(ã_n, b̃_n)`, `n = 0, …, n_max`, of a clamped disk of
/// radius `a`: `ã H_n + b̃ K_n = J_n`, `ã H_n′ + b̃ K_n′ = J_n′` at `κa`.
/// The physical coefficients are `−iⁿ` times these.
pub fn disk_mode_coefficients(
    radius: f64,
    kappa: f64,
    n_max: u32,
) -> Result<Vec<(Complex64, Complex64)>> {
    if !(radius > 0.0) || !(kappa > 0.0) {
        return Err(Error::domain(
            "disk_mode_coefficients",
            format!("radius {radius}, wavenumber {kappa}"),
        ));
    }
    let z = kappa * radius;
    let j = specfun::bessel_j_seq(n_max, z)?;
    let y = specfun::bessel_y_seq(n_max, z)?;
    // The exponential scaling of K cancels in K′/K.
    let k = specfun::bessel_k_scaled_seq(n_max, z)?;
    let h: Vec<Complex64> = j.iter().zip(&y).map(|(&a, &b)| Complex64::new(a, b)).collect();

    let mut out = Vec::with_capacity(n_max as usize + 1);
    for n in 0..=n_max as usize {
        let nf = n as f64;
        let (jp, hp, kp) = if n == 0 {
            (-j[1], -h[1], -k[1])
        } else {
            (
                j[n - 1] - nf / z * j[n],
                h[n - 1] - nf / z * h[n],
                -k[n - 1] - nf / z * k[n],
            )
        };
        let ratio = kp / k[n];
        let den = h[n] * ratio - hp;
        if den.norm() < 1e-300 {
            return Err(Error::Singular {
                column: n,
                pivot: den.norm(),
                threshold: 1e-300,
            });
        }
        let a = (j[n] * ratio - jp) / den;
        // b̃ = (J_n − ã H_n)/K_n, reported relative to the scaled K so that it
        // stays representable; only its decay relative to ã is of interest.
        let b = (j[n] - a * h[n]) / (k[n] * (-z).exp());
        out.push((a, b));
    }
    Ok(out)
}

/// Far-field matrix of a clamped disk by separation of variables.
pub fn disk_series_far_field(
    center: Vec2,
    radius: f64,
    kappa: f64,
    n: usize,
    n_max: u32,
) -> Result<FarFieldMatrix> {
    let coef = disk_mode_coefficients(radius, kappa, n_max)?;
    let amax = coef.iter().map(|c| c.0.norm()).fold(0.0, f64::max);
    let tail = coef.last().map_or(0.0, |c| c.0.norm());
    if tail > 1e-14 * amax {
        log::warn!("disk series truncated at n = {n_max}: last coefficient {:.2e} of max", tail / amax);
    }
    let dirs = directions(n);
    // Rotational symmetry: the pattern depends only on (i − j) mod N.
    let profile: Vec<Complex64> = (0..n)
        .map(|k| {
            let theta = 2.0 * PI * k as f64 / n as f64;
            let s: Complex64 = coef
                .iter()
                .enumerate()
                .skip(1)
                .map(|(m, c)| c.0 * (m as f64 * theta).cos())
                .sum();
            4.0 * I * (coef[0].0 + 2.0 * s)
        })
        .collect();
    let scale = 2.0 * PI / n as f64;
    let f = Array2::from_shape_fn((n, n), |(i, j)| {
        let shift = Complex64::from_polar(1.0, kappa * (dirs[j] - dirs[i]).dot(center));
        scale * profile[(i + n - j) % n] * shift
    });
    FarFieldMatrix::new(f, kappa)
}
