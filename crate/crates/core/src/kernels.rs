//! The biharmonic fundamental solution and the boundary kernels of the
//! clamped-obstacle system.
//!
//! With `F(r) = K₀(κr)/(2π) − (i/4)H₀⁽¹⁾(κr)` the fundamental solution is
//! `G = F/(2κ²)`. Writing `g(r) = G`, the three radial profiles
//!
//! ```text
//! f0 = g,   f1 = g′/r,   f2 = g″ − g′/r
//! ```
//!
//! give every entry of the 2×2 block (`R = x − y`):
//!
//! ```text
//! [ f0                 −f1 (R·n_y)                              ]
//! [ f1 (R·n_x)         −f2 (R·n_x)(R·n_y)/r² − f1 (n_x·n_y)     ]
//! ```
//!
//! Each profile is `A(r) ln r + B(r)` with real analytic `A` and complex
//! analytic `B`; the split form feeds the Kress quadrature. For `κr < 2` the
//! pieces come from the ascending series, above that from Bessel functions.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::{ParametricCurve, Vec2};
use crate::specfun::{self, EULER_GAMMA};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };
const SERIES_MAX_Z: f64 = 2.0;
/// Chords shorter than this (in parameter) use Taylor expansions.
const TAYLOR_MAX_H: f64 = 1e-2;
const TAYLOR_ORDER: u32 = 9;
const COINCIDENT: f64 = 1e-14;

/// `Φ_κ(r) = (i/4) H₀⁽¹⁾(κr)`, the radiating Helmholtz fundamental solution.
pub fn phi_helmholtz(kappa: f64, r: f64) -> Result<Complex64> {
    if !(r > 0.0) {
        return Err(Error::domain("phi_helmholtz", format!("r = {r} must be positive")));
    }
    Ok(0.25 * I * specfun::hankel1(0, kappa * r)?)
}

/// `Φ_{iκ}(r) = K₀(κr)/(2π)`, the decaying modified-Helmholtz fundamental
/// solution.
pub fn phi_modified(kappa: f64, r: f64) -> Result<f64> {
    if !(r > 0.0) {
        return Err(Error::domain("phi_modified", format!("r = {r} must be positive")));
    }
    Ok(specfun::bessel_k(0, kappa * r)? / (2.0 * PI))
}

/// `G(x, y) = (Φ_{iκ} − Φ_κ)/(2κ²)`.
///
/// The continuous extension to `x = y` is `−i/(8κ²)`; coincident points are
/// rejected so that callers use that limit explicitly.
pub fn green_biharm(kappa: f64, x: Vec2, y: Vec2) -> Result<Complex64> {
    let r = (x - y).norm();
    if r < COINCIDENT {
        return Err(Error::Coincident { distance: r });
    }
    Ok(profiles(kappa, r)[0])
}

/// Limit of [`green_biharm`] at coincident points.
pub fn green_biharm_diagonal(kappa: f64) -> Complex64 {
    Complex64::new(0.0, -1.0 / (8.0 * kappa * kappa))
}

/// Log-split radial profiles: `f_i(r) = a[i] ln r + b[i]`, already scaled by
/// `1/(2κ²)`. Valid at `r = 0`, where it returns the limits of `a` and `b`.
#[derive(Clone, Copy, Debug)]
pub(crate) struct SplitRadial {
    pub a: [f64; 3],
    pub b: [Complex64; 3],
}

pub(crate) fn split_radial(kappa: f64, r: f64) -> SplitRadial {
    let z = kappa * r;
    let scale = 1.0 / (2.0 * kappa * kappa);
    let (a, b) = if z < SERIES_MAX_Z {
        split_series(kappa, r)
    } else {
        let c = specfun::cylinder01(z);
        let h0 = Complex64::new(c.j0, c.y0);
        let h1 = Complex64::new(c.j1, c.y1);
        let k2 = kappa * kappa;
        let f = [
            c.k0 / (2.0 * PI) - 0.25 * I * h0,
            k2 * (-c.k1 / (2.0 * PI) + 0.25 * I * h1) / z,
            k2 * ((c.k0 + 2.0 * c.k1 / z) / (2.0 * PI) + 0.25 * I * (h0 - 2.0 * h1 / z)),
        ];
        let a = [
            -(c.i0 - c.j0) / (2.0 * PI),
            -k2 * (c.i1 + c.j1) / (2.0 * PI * z),
            -k2 / (2.0 * PI) * (c.i0 + c.j0 - 2.0 * (c.i1 + c.j1) / z),
        ];
        let lr = r.ln();
        (a, [f[0] - a[0] * lr, f[1] - a[1] * lr, f[2] - a[2] * lr])
    };
    SplitRadial {
        a: a.map(|v| v * scale),
        b: b.map(|v| v * scale),
    }
}

/// Ascending series of `F = Σ r^{2k}(α_k ln r + β_k)` and the derived
/// profiles, unscaled.
fn split_series(kappa: f64, r: f64) -> ([f64; 3], [Complex64; 3]) {
    let half = 0.5 * kappa;
    let lk = half.ln() + EULER_GAMMA;
    let q = (half * r) * (half * r);
    let r2 = r * r;
    let mut a = [0.0; 3];
    let mut b = [Complex64::new(0.0, 0.0); 3];
    // k = 0: α₀ = 0, β₀ = −i/4; contributes to f0 only.
    b[0] += Complex64::new(0.0, -0.25);
    // v_k = c_k r^{2k−2} with c_k = (κ/2)^{2k}/(k!)².
    let mut v = half * half;
    let mut harmonic = 0.0;
    for k in 1..40u32 {
        let kf = f64::from(k);
        if k > 1 {
            v *= q / (kf * kf);
        }
        harmonic += 1.0 / kf;
        let (alpha, beta) = if k % 2 == 1 {
            (
                -v / PI,
                Complex64::new(v / PI * (harmonic - lk), 0.25 * v),
            )
        } else {
            (0.0, Complex64::new(0.0, -0.25 * v))
        };
        // alpha, beta here carry the factor r^{2k−2}.
        a[0] += alpha * r2;
        b[0] += beta * r2;
        a[1] += 2.0 * kf * alpha;
        b[1] += 2.0 * kf * beta + alpha;
        let m = 2.0 * kf * (2.0 * kf - 2.0);
        a[2] += m * alpha;
        b[2] += m * beta + (4.0 * kf - 2.0) * alpha;
        if v * (1.0 + harmonic + lk.abs()) * kf * kf < 1e-18 * (half * half) {
            break;
        }
    }
    (a, b)
}

/// Full radial profiles `[f0, f1, f2]` at `r > 0`.
pub(crate) fn profiles(kappa: f64, r: f64) -> [Complex64; 3] {
    let z = kappa * r;
    if z < SERIES_MAX_Z {
        let s = split_radial(kappa, r);
        let lr = r.ln();
        return [0, 1, 2].map(|i| s.b[i] + s.a[i] * lr);
    }
    let (j0, j1, y0, y1) = specfun::jy01(z);
    let (k0, k1) = specfun::k01(z);
    let h0 = Complex64::new(j0, y0);
    let h1 = Complex64::new(j1, y1);
    let k2 = kappa * kappa;
    let scale = 1.0 / (2.0 * k2);
    [
        (k0 / (2.0 * PI) - 0.25 * I * h0) * scale,
        k2 * (-k1 / (2.0 * PI) + 0.25 * I * h1) / z * scale,
        k2 * ((k0 + 2.0 * k1 / z) / (2.0 * PI) + 0.25 * I * (h0 - 2.0 * h1 / z)) * scale,
    ]
}

/// 2×2 kernel `[[G, ∂_{n(y)}G], [∂_{n(x)}G, ∂_{n(x)}∂_{n(y)}G]]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KernelBlock(pub [[Complex64; 2]; 2]);

impl KernelBlock {
    pub fn entry(&self, row: usize, col: usize) -> Complex64 {
        self.0[row][col]
    }
}

/// Kress splitting `K(t, s) = K1(t, s) ln(4 sin²((t−s)/2)) + K2(t, s)`.
/// `K1` is real.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SplitKernelBlock {
    pub k1: [[f64; 2]; 2],
    pub k2: [[Complex64; 2]; 2],
}

impl SplitKernelBlock {
    /// Recombines the split kernel at parameter offset `t − s ≠ 0`.
    pub fn reconstruct(&self, t: f64, s: f64) -> KernelBlock {
        let l = kress_log(t - s);
        let mut m = [[Complex64::new(0.0, 0.0); 2]; 2];
        for (i, row) in m.iter_mut().enumerate() {
            for (j, e) in row.iter_mut().enumerate() {
                *e = self.k1[i][j] * l + self.k2[i][j];
            }
        }
        KernelBlock(m)
    }
}

/// `ln(4 sin²(h/2))`
pub fn kress_log(h: f64) -> f64 {
    (4.0 * (0.5 * h).sin().powi(2)).ln()
}

/// `h` reduced to `(−π, π]`.
fn wrap(h: f64) -> f64 {
    let w = (h + PI).rem_euclid(2.0 * PI) - PI;
    if w == -PI {
        PI
    } else {
        w
    }
}

/// Chord `R = x − y` between two boundary points together with the normal
/// projections, accurate even when the points nearly coincide.
#[derive(Clone, Copy, Debug)]
struct Chord {
    r: f64,
    rnx: f64,
    rny: f64,
    nxny: f64,
}

fn chord_between(x: Vec2, nx: Vec2, y: Vec2, ny: Vec2) -> Chord {
    let rv = x - y;
    Chord {
        r: rv.norm(),
        rnx: rv.dot(nx),
        rny: rv.dot(ny),
        nxny: nx.dot(ny),
    }
}

/// Chord on one curve between parameters `t` and `s`, with `h = t − s`
/// already wrapped.
fn chord_same(curve: &ParametricCurve, t: f64, s: f64, h: f64) -> Chord {
    let nx = curve.normal(t);
    let ny = curve.normal(s);
    if h.abs() >= TAYLOR_MAX_H {
        return chord_between(curve.position(t), nx, curve.position(s), ny);
    }
    // R = Σ_p x^{(p)}(s) h^p/p!   and   R = −Σ_p x^{(p)}(t) (−h)^p/p!.
    // The p = 1 terms are tangential and drop out of the normal projections.
    let mut rv = Vec2::ZERO;
    let mut rny = 0.0;
    let mut rnx = 0.0;
    let mut coef = 1.0;
    for p in 1..=TAYLOR_ORDER {
        coef *= h / f64::from(p);
        let ds = curve.derivative(p, s);
        rv += coef * ds;
        if p >= 2 {
            rny += coef * ds.dot(ny);
            let sign = if p % 2 == 0 { 1.0 } else { -1.0 };
            rnx -= sign * coef * curve.derivative(p, t).dot(nx);
        }
    }
    Chord {
        r: rv.norm(),
        rnx,
        rny,
        nxny: nx.dot(ny),
    }
}

fn assemble_block(f: [Complex64; 3], c: &Chord) -> KernelBlock {
    KernelBlock([
        [f[0], -f[1] * c.rny],
        [
            f[1] * c.rnx,
            -(f[2] * (c.rnx * c.rny / (c.r * c.r)) + f[1] * c.nxny),
        ],
    ])
}

/// Kernel block between `x_curve(t)` and `y_curve(s)`.
///
/// When both points lie on the same curve (`std::ptr::eq`) nearby parameters
/// are handled with Taylor-expanded chords to avoid cancellation.
pub fn sdir_block(
    kappa: f64,
    x_curve: &ParametricCurve,
    t: f64,
    y_curve: &ParametricCurve,
    s: f64,
) -> Result<KernelBlock> {
    let chord = if std::ptr::eq(x_curve, y_curve) {
        chord_same(x_curve, t, s, wrap(t - s))
    } else {
        chord_between(
            x_curve.position(t),
            x_curve.normal(t),
            y_curve.position(s),
            y_curve.normal(s),
        )
    };
    if chord.r < COINCIDENT {
        return Err(Error::Coincident { distance: chord.r });
    }
    Ok(assemble_block(profiles(kappa, chord.r), &chord))
}

/// Kernel block between explicit points and normals (cross-curve use).
pub(crate) fn block_at(kappa: f64, x: Vec2, nx: Vec2, y: Vec2, ny: Vec2) -> KernelBlock {
    let c = chord_between(x, nx, y, ny);
    assemble_block(profiles(kappa, c.r), &c)
}

/// Kress splitting of the self-interaction kernel on `curve`.
pub fn sdir_selfsplit(kappa: f64, curve: &ParametricCurve, t: f64, s: f64) -> SplitKernelBlock {
    let h = wrap(t - s);
    if h == 0.0 {
        return selfsplit_diagonal(kappa, curve, t);
    }
    let c = chord_same(curve, t, s, h);
    let sr = split_radial(kappa, c.r);
    let [a0, a1, a2] = sr.a;
    let [b0, b1, b2] = sr.b;
    let q = c.rnx * c.rny / (c.r * c.r);
    // Log coefficients L (of ln r) and smooth parts B of each entry.
    let l = [
        [a0, -a1 * c.rny],
        [a1 * c.rnx, -(a2 * q + a1 * c.nxny)],
    ];
    let b = [
        [b0, -b1 * c.rny],
        [b1 * c.rnx, -(b2 * q + b1 * c.nxny)],
    ];
    // ln r − ½ ln(4 sin²(h/2)), evaluated as one logarithm.
    let lam = (c.r / (2.0 * (0.5 * h).sin().abs())).ln();
    let mut k1 = [[0.0; 2]; 2];
    let mut k2 = [[Complex64::new(0.0, 0.0); 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            k1[i][j] = 0.5 * l[i][j];
            k2[i][j] = b[i][j] + l[i][j] * lam;
        }
    }
    SplitKernelBlock { k1, k2 }
}

/// Diagonal limits `K1(t, t)`, `K2(t, t)`.
fn selfsplit_diagonal(kappa: f64, curve: &ParametricCurve, t: f64) -> SplitKernelBlock {
    let sr = split_radial(kappa, 0.0);
    let ls = curve.speed(t).ln();
    let zero = Complex64::new(0.0, 0.0);
    SplitKernelBlock {
        k1: [[0.5 * sr.a[0], 0.0], [0.0, -0.5 * sr.a[1]]],
        k2: [
            [sr.b[0] + sr.a[0] * ls, zero],
            [zero, -(sr.b[1] + sr.a[1] * ls)],
        ],
    }
}

/// Far-field integrand `(e^{−iκx̂·y}, ∂_{n(y)} e^{−iκx̂·y})` at `y = curve(s)`.
pub fn farfield_kernel_row(
    kappa: f64,
    xhat: Vec2,
    curve: &ParametricCurve,
    s: f64,
) -> [Complex64; 2] {
    farfield_row_at(kappa, xhat, curve.position(s), curve.normal(s))
}

pub(crate) fn farfield_row_at(kappa: f64, xhat: Vec2, y: Vec2, ny: Vec2) -> [Complex64; 2] {
    let e = Complex64::from_polar(1.0, -kappa * xhat.dot(y));
    [e, -I * kappa * xhat.dot(ny) * e]
}
