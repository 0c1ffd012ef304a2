//! Dense complex linear algebra: Hermitian eigensystems, Gram-matrix
//! singular systems, spectral functions of Hermitian matrices, and LU solves.
//!
//! The Hermitian eigensolver reduces to a complex tridiagonal matrix with
//! Householder reflectors, rotates the off-diagonal to be real with a
//! diagonal phase matrix, and finishes with implicit-shift QL.

use ndarray::{s, Array1, Array2, ArrayView2, Axis};
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};

pub type CMatrix = Array2<Complex64>;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };
const QL_MAX_SWEEPS: usize = 60;

/// Eigenvalues in ascending order with orthonormal eigenvector columns.
///
/// Each eigenvector is phase-normalized: its first entry of largest modulus
/// is real and nonnegative.
#[derive(Clone, Debug)]
pub struct EigenSystem {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

/// Singular values in descending order with right singular vectors.
#[derive(Clone, Debug)]
pub struct SingularSystem {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

/// Conjugate transpose.
pub fn adjoint(a: &CMatrix) -> CMatrix {
    a.t().mapv(|z| z.conj())
}

pub fn frobenius(a: &CMatrix) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn identity(n: usize) -> CMatrix {
    Array2::from_diag_elem(n, ONE)
}

/// `(A + A*)/2`
pub fn hermitian_part(a: &CMatrix) -> CMatrix {
    let mut h = a.clone();
    h.zip_mut_with(&a.t(), |x, y| *x = 0.5 * (*x + y.conj()));
    h
}

/// `(A − A*)/(2i)`
pub fn skew_part(a: &CMatrix) -> CMatrix {
    let mut h = a.clone();
    let two_i = Complex64::new(0.0, 2.0);
    h.zip_mut_with(&a.t(), |x, y| *x = (*x - y.conj()) / two_i);
    h
}

fn check_square(a: &CMatrix, what: &str) -> Result<usize> {
    let (r, c) = a.dim();
    if r != c {
        return Err(Error::Dimension(format!("{what}: matrix is {r}x{c}, expected square")));
    }
    Ok(r)
}

/// Householder reduction of a Hermitian matrix to real symmetric
/// tridiagonal form. Returns `(d, e, Z)` with `A = Z S Z*`, `S` having
/// diagonal `d` and off-diagonal `e` (`e[n−1]` unused). `Z` is only formed
/// when requested.
fn tridiagonalize(a: &CMatrix, want_z: bool) -> (Vec<f64>, Vec<f64>, Option<CMatrix>) {
    let n = a.nrows();
    let mut b = a.to_owned();
    let mut reflectors: Vec<(Array1<Complex64>, f64)> = Vec::with_capacity(n.saturating_sub(2));
    let mut sub = vec![ZERO; n];

    for k in 0..n.saturating_sub(1) {
        let x = b.slice(s![k + 1.., k]).to_owned();
        let xnorm = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let x0 = x[0];
        if k + 2 == n || xnorm == 0.0 || xnorm == x0.norm() && x.iter().skip(1).all(|z| *z == ZERO) {
            sub[k] = x0;
            if want_z {
                reflectors.push((Array1::zeros(0), 0.0));
            }
            continue;
        }
        let phase = if x0 == ZERO { ONE } else { x0 / x0.norm() };
        let alpha = -phase * xnorm;
        let mut u = x;
        u[0] -= alpha;
        let unorm2 = u.iter().map(|z| z.norm_sqr()).sum::<f64>();
        let tau = 2.0 / unorm2;
        sub[k] = alpha;

        // Trailing update B ← B − u q* − q u*.
        let mut tr = b.slice_mut(s![k + 1.., k + 1..]);
        let m = u.len();
        let mut p = Array1::<Complex64>::zeros(m);
        for i in 0..m {
            let row = tr.row(i);
            let mut acc = ZERO;
            for j in 0..m {
                acc += row[j] * u[j];
            }
            p[i] = tau * acc;
        }
        let upu: Complex64 = u.iter().zip(p.iter()).map(|(ui, pi)| ui.conj() * pi).sum();
        let kk = 0.5 * tau * upu.re;
        let q: Array1<Complex64> = &p - &u.mapv(|z| z * kk);
        for i in 0..m {
            let (ui, qi) = (u[i], q[i]);
            let mut row = tr.row_mut(i);
            for j in 0..m {
                row[j] -= ui * q[j].conj() + qi * u[j].conj();
            }
        }
        if want_z {
            reflectors.push((u, tau));
        }
    }

    let d: Vec<f64> = (0..n).map(|i| b[[i, i]].re).collect();
    let mut e = vec![0.0; n];
    let mut delta = vec![ONE; n];
    for k in 0..n.saturating_sub(1) {
        let a = sub[k].norm();
        e[k] = a;
        delta[k + 1] = if a == 0.0 { delta[k] } else { delta[k] * sub[k] / a };
    }

    let z = want_z.then(|| {
        let mut q = identity(n);
        for (k, (u, tau)) in reflectors.iter().enumerate().rev() {
            if u.is_empty() {
                continue;
            }
            // Q[k+1.., k+1..] ← H_k Q[k+1.., k+1..]
            let mut blk = q.slice_mut(s![k + 1.., k + 1..]);
            let cols = blk.ncols();
            for j in 0..cols {
                let col = blk.column(j);
                let w: Complex64 = u.iter().zip(col.iter()).map(|(ui, c)| ui.conj() * c).sum();
                let w = *tau * w;
                let mut col = blk.column_mut(j);
                for (c, ui) in col.iter_mut().zip(u.iter()) {
                    *c -= ui * w;
                }
            }
        }
        // Z = Q D
        for (j, mut col) in q.axis_iter_mut(Axis(1)).enumerate() {
            col.mapv_inplace(|c| c * delta[j]);
        }
        q
    });
    (d, e, z)
}

/// Implicit-shift QL on a real symmetric tridiagonal matrix; rotations are
/// applied to the columns of `z` when given.
fn tridiagonal_ql(d: &mut [f64], e: &mut [f64], mut z: Option<&mut CMatrix>) -> Result<()> {
    let n = d.len();
    // Deflate off-diagonals that are negligible relative to the whole matrix;
    // a purely local test stalls on clusters of near-zero eigenvalues.
    let tnorm = (0..n)
        .map(|i| d[i].abs() + e[i].abs() + if i > 0 { e[i - 1].abs() } else { 0.0 })
        .fold(0.0, f64::max);
    let tol = f64::EPSILON * tnorm;
    for l in 0..n {
        let mut sweeps = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                if e[m].abs() <= tol {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            sweeps += 1;
            if sweeps > QL_MAX_SWEEPS {
                let residual = e.iter().map(|v| v * v).sum::<f64>().sqrt();
                return Err(Error::NoConvergence { n, residual });
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut deflated = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                if let Some(z) = z.as_deref_mut() {
                    for k in 0..z.nrows() {
                        let f = z[[k, i + 1]];
                        z[[k, i + 1]] = s * z[[k, i]] + c * f;
                        z[[k, i]] = c * z[[k, i]] - s * f;
                    }
                }
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

fn hermitize_checked(a: &CMatrix, what: &str) -> Result<CMatrix> {
    check_square(a, what)?;
    let h = hermitian_part(a);
    let norm = frobenius(a);
    let asym = frobenius(&(a - &h));
    if asym > 1e-10 * norm {
        log::warn!("{what}: input is not Hermitian (‖A − A*‖/2 = {asym:e}, ‖A‖ = {norm:e})");
    }
    Ok(h)
}

/// Eigenvalues and eigenvectors of a Hermitian matrix (the input is
/// Hermitized as `(A + A*)/2` first).
pub fn herm_eig(a: &CMatrix) -> Result<EigenSystem> {
    let h = hermitize_checked(a, "herm_eig")?;
    let n = h.nrows();
    let (mut d, mut e, z) = tridiagonalize(&h, true);
    let mut z = z.expect("requested");
    tridiagonal_ql(&mut d, &mut e, Some(&mut z))?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[i].total_cmp(&d[j]));
    let values = order.iter().map(|&i| d[i]).collect();
    let mut vectors = CMatrix::zeros((n, n));
    for (dst, &src) in order.iter().enumerate() {
        let col = z.column(src);
        let mut best = 0;
        let mut best_mod = -1.0;
        for (k, v) in col.iter().enumerate() {
            let m = v.norm();
            if m > best_mod {
                best_mod = m;
                best = k;
            }
        }
        let pivot = col[best];
        let rot = if best_mod > 0.0 { pivot.conj() / best_mod } else { ONE };
        let mut out = vectors.column_mut(dst);
        for (o, v) in out.iter_mut().zip(col.iter()) {
            *o = v * rot;
        }
        out[best] = Complex64::new(out[best].norm(), 0.0);
    }
    Ok(EigenSystem { values, vectors })
}

/// Eigenvalues only, ascending.
pub fn herm_eigvals(a: &CMatrix) -> Result<Vec<f64>> {
    let h = hermitize_checked(a, "herm_eigvals")?;
    let (mut d, mut e, _) = tridiagonalize(&h, false);
    tridiagonal_ql(&mut d, &mut e, None)?;
    d.sort_by(f64::total_cmp);
    Ok(d)
}

/// Singular values (descending) and right singular vectors of `F`, from the
/// eigensystem of `F*F`.
pub fn singular_system(f: &CMatrix) -> Result<SingularSystem> {
    check_square(f, "singular_system")?;
    let gram = adjoint(f).dot(f);
    let eig = herm_eig(&gram)?;
    let n = eig.values.len();
    let values = eig.values.iter().rev().map(|&l| l.max(0.0).sqrt()).collect();
    let mut vectors = CMatrix::zeros((n, n));
    for j in 0..n {
        vectors.column_mut(j).assign(&eig.vectors.column(n - 1 - j));
    }
    Ok(SingularSystem { values, vectors })
}

/// `V diag(g(λ)) V*`
pub fn spectral_map(eig: &EigenSystem, g: impl Fn(f64) -> f64) -> CMatrix {
    let mut scaled = eig.vectors.clone();
    for (j, mut col) in scaled.axis_iter_mut(Axis(1)).enumerate() {
        let w = g(eig.values[j]);
        col.mapv_inplace(|c| c * w);
    }
    let out = scaled.dot(&adjoint(&eig.vectors));
    hermitian_part(&out)
}

/// `|A| = V |Λ| V*`
pub fn herm_abs(a: &CMatrix) -> Result<CMatrix> {
    Ok(spectral_map(&herm_eig(a)?, f64::abs))
}

/// Square root of a positive semidefinite Hermitian matrix; eigenvalues
/// down to `−1e−10‖A‖_F` are treated as rounding and clamped to zero.
pub fn herm_sqrt_psd(a: &CMatrix) -> Result<CMatrix> {
    let eig = herm_eig(a)?;
    let tol = 1e-10 * frobenius(a);
    if let Some(&min) = eig.values.first() {
        if min < -tol {
            log::warn!("herm_sqrt_psd: eigenvalue {min:e} below tolerance {:e}; clamped", -tol);
        }
    }
    Ok(spectral_map(&eig, |l| l.max(0.0).sqrt()))
}

/// LU factorization with partial pivoting, `P A = L U`.
#[derive(Clone, Debug)]
pub struct LuFactors {
    lu: CMatrix,
    perm: Vec<usize>,
    rcond: f64,
}

/// Reciprocal condition estimate below which solves are flagged.
pub const RCOND_WARN: f64 = 1e-13;

impl LuFactors {
    pub fn dim(&self) -> usize {
        self.perm.len()
    }

    /// Estimated reciprocal 1-norm condition number.
    pub fn rcond(&self) -> f64 {
        self.rcond
    }

    /// Solves `A x = b` in place.
    pub fn solve_vec(&self, b: &mut [Complex64]) {
        let n = self.dim();
        let permuted: Vec<Complex64> = self.perm.iter().map(|&p| b[p]).collect();
        b.copy_from_slice(&permuted);
        for i in 0..n {
            let row = self.lu.row(i);
            let mut acc = b[i];
            for j in 0..i {
                acc -= row[j] * b[j];
            }
            b[i] = acc;
        }
        for i in (0..n).rev() {
            let row = self.lu.row(i);
            let mut acc = b[i];
            for j in i + 1..n {
                acc -= row[j] * b[j];
            }
            b[i] = acc / row[i];
        }
    }

    /// Solves `A* x = b` in place.
    pub fn solve_adjoint_vec(&self, b: &mut [Complex64]) {
        let n = self.dim();
        // U* w = b
        for i in 0..n {
            let mut acc = b[i];
            for j in 0..i {
                acc -= self.lu[[j, i]].conj() * b[j];
            }
            b[i] = acc / self.lu[[i, i]].conj();
        }
        // L* v = w
        for i in (0..n).rev() {
            let mut acc = b[i];
            for j in i + 1..n {
                acc -= self.lu[[j, i]].conj() * b[j];
            }
            b[i] = acc;
        }
        let mut x = vec![ZERO; n];
        for (i, &p) in self.perm.iter().enumerate() {
            x[p] = b[i];
        }
        b.copy_from_slice(&x);
    }

    /// Solves `A X = B` column by column (in parallel).
    pub fn solve(&self, b: &CMatrix) -> Result<CMatrix> {
        if b.nrows() != self.dim() {
            return Err(Error::Dimension(format!(
                "right-hand side has {} rows, matrix has {}",
                b.nrows(),
                self.dim()
            )));
        }
        let cols: Vec<Vec<Complex64>> = (0..b.ncols())
            .into_par_iter()
            .map(|j| {
                let mut v = b.column(j).to_vec();
                self.solve_vec(&mut v);
                v
            })
            .collect();
        let mut x = CMatrix::zeros(b.dim());
        for (j, v) in cols.into_iter().enumerate() {
            x.column_mut(j).assign(&Array1::from(v));
        }
        Ok(x)
    }
}

fn norm1(a: ArrayView2<Complex64>) -> f64 {
    a.axis_iter(Axis(1))
        .map(|c| c.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Factors `A`; fails when a pivot falls below `1e−14 · max|A_ij|`.
pub fn lu_factor(a: &CMatrix) -> Result<LuFactors> {
    let n = check_square(a, "lu_factor")?;
    let amax = a.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let anorm = norm1(a.view());
    let threshold = 1e-14 * amax;
    let mut lu = a.as_standard_layout().to_owned();
    let mut perm: Vec<usize> = (0..n).collect();
    for k in 0..n {
        let (p, pmod) = (k..n)
            .map(|i| (i, lu[[i, k]].norm()))
            .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if !(pmod >= threshold) || pmod == 0.0 {
            return Err(Error::Singular {
                column: k,
                pivot: pmod,
                threshold,
            });
        }
        if p != k {
            perm.swap(p, k);
            for j in 0..n {
                lu.swap([p, j], [k, j]);
            }
        }
        let pivot_row: Vec<Complex64> = lu.row(k).iter().copied().collect();
        let inv = ONE / pivot_row[k];
        let data = lu.as_slice_mut().expect("standard layout");
        let (_, rest) = data.split_at_mut((k + 1) * n);
        let update = |row: &mut [Complex64]| {
            let l = row[k] * inv;
            row[k] = l;
            if l != ZERO {
                for j in k + 1..n {
                    row[j] -= l * pivot_row[j];
                }
            }
        };
        if (n - k) * (n - k) > 64 * 64 {
            rest.par_chunks_mut(n).for_each(update);
        } else {
            rest.chunks_mut(n).for_each(update);
        }
    }
    let mut f = LuFactors {
        lu,
        perm,
        rcond: 0.0,
    };
    let inv_norm = estimate_inverse_norm1(&f);
    f.rcond = if anorm == 0.0 || inv_norm == 0.0 {
        0.0
    } else {
        1.0 / (anorm * inv_norm)
    };
    Ok(f)
}

/// Hager–Higham estimate of `‖A⁻¹‖₁`.
fn estimate_inverse_norm1(f: &LuFactors) -> f64 {
    let n = f.dim();
    if n == 0 {
        return 0.0;
    }
    let mut x = vec![Complex64::new(1.0 / n as f64, 0.0); n];
    let mut est = 0.0;
    for iter in 0..5 {
        let mut y = x.clone();
        f.solve_vec(&mut y);
        let ny: f64 = y.iter().map(|z| z.norm()).sum();
        if iter > 0 && ny <= est {
            break;
        }
        est = ny;
        let mut z: Vec<Complex64> = y
            .iter()
            .map(|v| if v.norm() > 0.0 { v / v.norm() } else { ONE })
            .collect();
        f.solve_adjoint_vec(&mut z);
        let (j, zj) = z
            .iter()
            .enumerate()
            .map(|(i, v)| (i, v.norm()))
            .fold((0, -1.0), |b, c| if c.1 > b.1 { c } else { b });
        let ztx: f64 = z.iter().zip(&x).map(|(a, b)| (a.conj() * b).re).sum();
        if iter > 0 && zj <= ztx {
            break;
        }
        x = vec![ZERO; n];
        x[j] = ONE;
    }
    // Higham's alternative vector guards against unlucky starts.
    let mut alt: Vec<Complex64> = (0..n)
        .map(|i| {
            let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
            let denom = if n > 1 { (n - 1) as f64 } else { 1.0 };
            Complex64::new(sign * (1.0 + i as f64 / denom), 0.0)
        })
        .collect();
    f.solve_vec(&mut alt);
    let alt_est = 2.0 * alt.iter().map(|z| z.norm()).sum::<f64>() / (3.0 * n as f64);
    est.max(alt_est)
}

/// Solves `A X = B`; warns when the reciprocal condition estimate is below
/// [`RCOND_WARN`].
pub fn lu_solve(a: &CMatrix, b: &CMatrix) -> Result<CMatrix> {
    let f = lu_factor(a)?;
    if f.rcond() < RCOND_WARN {
        log::warn!("lu_solve: reciprocal condition estimate {:e}", f.rcond());
    }
    f.solve(b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_matrix(n: usize, seed: u64) -> CMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        CMatrix::from_shape_fn((n, n), |_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
    }

    fn random_hermitian(n: usize, seed: u64) -> CMatrix {
        hermitian_part(&random_matrix(n, seed))
    }

    fn check_eigensystem(a: &CMatrix, e: &EigenSystem) {
        let n = a.nrows();
        let an = frobenius(a);
        for w in e.values.windows(2) {
            assert!(w[0] <= w[1]);
        }
        for j in 0..n {
            let v = e.vectors.column(j).to_owned();
            let r = a.dot(&v) - v.mapv(|z| z * e.values[j]);
            let rn = r.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            assert!(rn <= 1e-12 * an.max(1.0), "residual {rn:e}");
            let (best, _) = v
                .iter()
                .enumerate()
                .fold((0, -1.0), |b, (i, z)| if z.norm() > b.1 { (i, z.norm()) } else { b });
            assert!(v[best].im == 0.0 && v[best].re >= 0.0);
        }
        let g = adjoint(&e.vectors).dot(&e.vectors) - identity(n);
        assert!(frobenius(&g) <= 1e-12 * (n as f64).sqrt());
    }

    #[test]
    fn diagonal_matrix() {
        let a = CMatrix::from_diag(&Array1::from(vec![c(3.0, 0.0), c(1.0, 0.0), c(2.0, 0.0)]));
        let e = herm_eig(&a).unwrap();
        assert_eq!(e.values, vec![1.0, 2.0, 3.0]);
        for (j, row) in [1, 2, 0].into_iter().enumerate() {
            assert_eq!(e.vectors[[row, j]], ONE);
        }
    }

    #[test]
    fn pauli_y() {
        let a = ndarray::array![[ZERO, c(0.0, -1.0)], [c(0.0, 1.0), ZERO]];
        let e = herm_eig(&a).unwrap();
        assert!((e.values[0] + 1.0).abs() < 1e-15 && (e.values[1] - 1.0).abs() < 1e-15);
        check_eigensystem(&a, &e);
    }

    #[test]
    fn random_hermitian_reconstruction() {
        for (n, seed) in [(1, 1), (2, 2), (3, 3), (40, 4), (64, 5), (97, 6)] {
            let a = random_hermitian(n, seed);
            let e = herm_eig(&a).unwrap();
            check_eigensystem(&a, &e);
            let rec = spectral_map(&e, |l| l);
            assert!(frobenius(&(rec - &a)) <= 1e-12 * frobenius(&a));
            let vals = herm_eigvals(&a).unwrap();
            for (x, y) in vals.iter().zip(&e.values) {
                assert!((x - y).abs() <= 1e-13 * frobenius(&a));
            }
        }
    }

    #[test]
    fn degenerate_spectrum() {
        // Rank-one plus identity: an eigenvalue of multiplicity n − 1.
        let n = 30;
        let v = random_matrix(n, 11).column(0).to_owned();
        let mut a = identity(n);
        for i in 0..n {
            for j in 0..n {
                a[[i, j]] += v[i] * v[j].conj();
            }
        }
        let e = herm_eig(&a).unwrap();
        check_eigensystem(&a, &e);
        assert!(e.values[..n - 1].iter().all(|l| (l - 1.0).abs() < 1e-13));
    }

    #[test]
    fn graded_spectrum_converges() {
        // Eigenvalues spanning 1 … 1e−40, like Gram matrices of smooth kernels.
        let n = 48;
        let q = herm_eig(&random_hermitian(n, 13)).unwrap().vectors;
        let lam: Vec<f64> = (0..n).map(|k| 10f64.powf(-(k as f64) * 40.0 / n as f64)).collect();
        let mut a = q.clone();
        for (j, mut col) in a.axis_iter_mut(Axis(1)).enumerate() {
            col.mapv_inplace(|c| c * lam[j]);
        }
        let a = hermitian_part(&a.dot(&adjoint(&q)));
        let e = herm_eig(&a).unwrap();
        check_eigensystem(&a, &e);
        assert!((e.values[n - 1] - 1.0).abs() < 1e-13);
    }

    #[test]
    fn trace_is_preserved() {
        for seed in 0..50 {
            let a = random_hermitian(12 + seed as usize % 7, 100 + seed);
            let tr: f64 = (0..a.nrows()).map(|i| a[[i, i]].re).sum();
            let sum: f64 = herm_eigvals(&a).unwrap().iter().sum();
            assert!((tr - sum).abs() <= 1e-11 * frobenius(&a));
        }
    }

    #[test]
    fn unitary_conjugation_equivariance() {
        let n = 24;
        let a = random_hermitian(n, 9);
        let d: Vec<Complex64> = (0..n).map(|j| Complex64::from_polar(1.0, 0.7 * j as f64)).collect();
        let mut b = a.clone();
        for i in 0..n {
            for j in 0..n {
                b[[i, j]] = d[i].conj() * a[[i, j]] * d[j];
            }
        }
        let ea = herm_eig(&a).unwrap();
        let eb = herm_eig(&b).unwrap();
        for j in 0..n {
            assert!((ea.values[j] - eb.values[j]).abs() < 1e-11);
            // D* v_j, re-normalized by the phase convention, equals w_j.
            let mut v: Vec<Complex64> = (0..n).map(|i| d[i].conj() * ea.vectors[[i, j]]).collect();
            let (best, m) = v
                .iter()
                .enumerate()
                .fold((0, -1.0), |acc, (i, z)| if z.norm() > acc.1 { (i, z.norm()) } else { acc });
            let rot = v[best].conj() / m;
            v.iter_mut().for_each(|z| *z *= rot);
            let diff: f64 = v
                .iter()
                .zip(eb.vectors.column(j).iter())
                .map(|(x, y)| (x - y).norm_sqr())
                .sum::<f64>()
                .sqrt();
            assert!(diff < 1e-9, "vector {j}: {diff:e}");
        }
    }

    #[test]
    fn singular_values_basic() {
        let s = singular_system(&identity(4).mapv(|z| z * 2.0)).unwrap();
        assert!(s.values.iter().all(|v| (v - 2.0).abs() < 1e-15));
        let s = singular_system(&CMatrix::zeros((4, 4))).unwrap();
        assert!(s.values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn singular_values_match_nalgebra_svd() {
        let f = random_matrix(20, 21);
        let s = singular_system(&f).unwrap();
        let m = nalgebra::DMatrix::from_fn(20, 20, |i, j| f[[i, j]]);
        let mut want: Vec<f64> = m.svd(false, false).singular_values.iter().copied().collect();
        want.sort_by(|a, b| b.total_cmp(a));
        let smax = want[0];
        for (a, b) in s.values.iter().zip(&want) {
            assert!((a - b).abs() <= 1e-9 * smax);
        }
        // σ² are the eigenvalues of F*F.
        let gram = adjoint(&f).dot(&f);
        let ev = herm_eigvals(&gram).unwrap();
        let gn = frobenius(&f).powi(2);
        for (sv, l) in s.values.iter().rev().zip(&ev) {
            assert!((sv * sv - l).abs() <= 1e-10 * gn);
        }
    }

    #[test]
    fn singular_values_scale() {
        let f = random_matrix(16, 31);
        let s1 = singular_system(&f).unwrap();
        let s2 = singular_system(&f.mapv(|z| z * c(-1.5, 2.0))).unwrap();
        for (a, b) in s1.values.iter().zip(&s2.values) {
            assert!((2.5 * a - b).abs() <= 1e-12 * s2.values[0]);
        }
    }

    #[test]
    fn absolute_value() {
        let a = CMatrix::from_diag(&Array1::from(vec![c(-2.0, 0.0), c(3.0, 0.0)]));
        let abs = herm_abs(&a).unwrap();
        assert!((abs[[0, 0]] - 2.0).norm() < 1e-15 && (abs[[1, 1]] - 3.0).norm() < 1e-15);
        assert!(abs[[0, 1]].norm() < 1e-15);

        let b = random_matrix(10, 41);
        let psd = adjoint(&b).dot(&b);
        assert!(frobenius(&(herm_abs(&psd).unwrap() - &psd)) <= 1e-12 * frobenius(&psd));

        let h = random_hermitian(30, 42);
        let mut want: Vec<f64> = herm_eigvals(&h).unwrap().iter().map(|l| l.abs()).collect();
        want.sort_by(f64::total_cmp);
        let got = herm_eigvals(&herm_abs(&h).unwrap()).unwrap();
        for (a, b) in got.iter().zip(&want) {
            assert!((a - b).abs() < 1e-11);
        }
    }

    #[test]
    fn square_root() {
        let i4 = identity(4);
        assert!(frobenius(&(herm_sqrt_psd(&i4).unwrap() - &i4)) < 1e-15);
        let d = CMatrix::from_diag(&Array1::from(vec![c(4.0, 0.0), c(9.0, 0.0)]));
        let r = herm_sqrt_psd(&d).unwrap();
        assert!((r[[0, 0]] - 2.0).norm() < 1e-15 && (r[[1, 1]] - 3.0).norm() < 1e-15);
        let b = random_matrix(25, 51);
        let g = adjoint(&b).dot(&b);
        let r = herm_sqrt_psd(&g).unwrap();
        assert!(frobenius(&(r.dot(&r) - &g)) <= 1e-10 * frobenius(&g));
    }

    #[test]
    fn lu_basics() {
        let b = random_matrix(5, 61);
        let x = lu_solve(&identity(5), &b).unwrap();
        assert_eq!(x, b);
        // Permutation matrix: X = Pᵀ B.
        let perm = [2usize, 0, 4, 1, 3];
        let mut p = CMatrix::zeros((5, 5));
        for (i, &j) in perm.iter().enumerate() {
            p[[i, j]] = ONE;
        }
        let x = lu_solve(&p, &b).unwrap();
        assert!(frobenius(&(x - p.t().dot(&b))) < 1e-15);
    }

    #[test]
    fn lu_residual_and_condition() {
        let a = random_matrix(50, 71);
        let b = random_matrix(50, 72).slice(s![.., ..7]).to_owned();
        let f = lu_factor(&a).unwrap();
        let x = f.solve(&b).unwrap();
        let res = frobenius(&(a.dot(&x) - &b));
        assert!(res <= 1e-10 * frobenius(&a) * frobenius(&x));
        // The estimate is within a modest factor of the true 1-norm condition.
        let inv = f.solve(&identity(50)).unwrap();
        let true_rcond = 1.0 / (norm1(a.view()) * norm1(inv.view()));
        assert!(f.rcond() <= 1.0001 * true_rcond && f.rcond() >= true_rcond / 10.0);
        // Adjoint solve.
        let mut v: Vec<Complex64> = b.column(0).to_vec();
        f.solve_adjoint_vec(&mut v);
        let back = adjoint(&a).dot(&Array1::from(v));
        let d: f64 = back.iter().zip(b.column(0)).map(|(x, y)| (x - y).norm()).sum();
        assert!(d < 1e-11);
    }

    #[test]
    fn lu_singular() {
        let mut a = random_matrix(6, 81);
        let r0 = a.row(0).to_owned();
        a.row_mut(3).assign(&r0);
        assert!(matches!(lu_factor(&a), Err(Error::Singular { .. })));
        assert!(matches!(lu_factor(&CMatrix::zeros((3, 3))), Err(Error::Singular { .. })));
    }

    #[test]
    fn non_square_rejected() {
        assert!(matches!(herm_eig(&CMatrix::zeros((2, 3))), Err(Error::Dimension(_))));
        assert!(lu_factor(&CMatrix::zeros((2, 3))).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn eigensystem_invariants(seed in 0u64..10_000, n in 1usize..20) {
            let a = random_hermitian(n, seed);
            let e = herm_eig(&a).unwrap();
            check_eigensystem(&a, &e);
        }
    }
}
