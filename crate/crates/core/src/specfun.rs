//! Cylinder functions J, Y, I, K and H⁽¹⁾ of integer order `0..=60` for real
//! arguments. Accuracy is verified on `[1e-8, 500]`; larger arguments are
//! accepted (the kernels need them for far-away points) but `I_n` overflows
//! beyond roughly 700 and `K_n` underflows to zero there.
//!
//! Three regimes are combined:
//!
//! * Miller backward recurrence for `J_n`, normalized with
//!   `J_0 + 2 Σ J_{2k} = 1`. The Neumann series for `Y_0` and `Y_1` are
//!   accumulated in the same sweep, so below the asymptotic crossover the
//!   second-kind functions come for free.
//! * Hankel asymptotic expansions for `J_0, J_1, Y_0, Y_1` when `x ≥ 20`,
//!   where the optimally truncated series is below `1e-17`.
//! * Miller recurrence normalized by `I_0 + 2 Σ I_k = e^x` for `I_n`, and
//!   the ascending series (`x ≤ 2`) or Steed's continued fraction (`x > 2`)
//!   for `K_0, K_1`.
//!
//! Higher orders of `Y` and `K` come from forward recurrence, which is stable
//! for the dominant solutions.

use std::f64::consts::{FRAC_1_SQRT_2, FRAC_2_PI, PI};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Largest supported order.
pub const MAX_ORDER: u32 = 60;
/// Upper end of the argument range covered by the accuracy tests.
pub const MAX_ARG: f64 = 500.0;
/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

const ASYMPTOTIC_MIN: f64 = 20.0;
const K_SERIES_MAX: f64 = 2.0;
const RESCALE_ABOVE: f64 = 1e250;
const RESCALE_BY: f64 = 1e-250;
const REPRESENTABLE: f64 = 1e300;

fn check_order(func: &'static str, n: u32) -> Result<()> {
    if n > MAX_ORDER {
        return Err(Error::domain(
            func,
            format!("order {n} exceeds {MAX_ORDER}"),
        ));
    }
    Ok(())
}

fn check_arg(func: &'static str, x: f64, allow_zero: bool) -> Result<()> {
    let ok = x.is_finite() && if allow_zero { x >= 0.0 } else { x > 0.0 };
    if !ok {
        let range = if allow_zero { "x >= 0" } else { "x > 0" };
        return Err(Error::domain(func, format!("x = {x} violates {range}")));
    }
    Ok(())
}

fn alternating(k: usize) -> f64 {
    if k.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// Tracks how many rescalings happened after each order was stored, so that
/// tiny high-order values are not flushed to zero before normalization.
struct RescaleLog {
    stored_at: Vec<u32>,
    total: u32,
}

impl RescaleLog {
    fn new(nmax: usize) -> Self {
        Self {
            stored_at: vec![0; nmax + 1],
            total: 0,
        }
    }

    fn mark(&mut self, m: usize) {
        self.stored_at[m] = self.total;
    }

    fn bump(&mut self) {
        self.total += 1;
    }

    fn normalize(&self, values: &mut [f64], norm: f64) {
        for (v, &at) in values.iter_mut().zip(&self.stored_at) {
            *v /= norm;
            for _ in at..self.total {
                *v *= RESCALE_BY;
            }
        }
    }
}

/// Normalized output of one Miller sweep for `J`.
struct MillerJ {
    values: Vec<f64>,
    /// `Σ_{k≥1} (-1)^k J_{2k}(x) / k`
    neumann_y0: f64,
    /// `Σ_{k≥1} (-1)^k (J_{2k-1}(x) - J_{2k+1}(x)) / k`
    neumann_y1: f64,
}

fn miller_j(nmax: usize, x: f64) -> MillerJ {
    debug_assert!(x > 0.0);
    let base = nmax.max(x.ceil() as usize);
    let start = base + 40 + (10.0 * x.cbrt()).ceil() as usize;

    let mut values = vec![0.0; nmax + 1];
    let mut scale = RescaleLog::new(nmax);
    let mut above = 0.0;
    let mut cur = 1.0;
    let mut norm = 0.0;
    let mut s0 = 0.0;
    let mut s1 = 0.0;
    for k in (1..=start).rev() {
        let below = (2.0 * k as f64 / x) * cur - above;
        above = cur;
        cur = below;
        let m = k - 1;
        if m <= nmax {
            values[m] = cur;
            scale.mark(m);
        }
        if m == 0 {
            norm += cur;
        } else if m % 2 == 0 {
            let h = m / 2;
            norm += 2.0 * cur;
            s0 += alternating(h) * cur / h as f64;
        } else {
            let k1 = m.div_ceil(2);
            let mut c = alternating(k1) / k1 as f64;
            if m >= 3 {
                let k2 = (m - 1) / 2;
                c -= alternating(k2) / k2 as f64;
            }
            s1 += c * cur;
        }
        if cur.abs() > RESCALE_ABOVE {
            cur *= RESCALE_BY;
            above *= RESCALE_BY;
            norm *= RESCALE_BY;
            s0 *= RESCALE_BY;
            s1 *= RESCALE_BY;
            scale.bump();
        }
    }
    scale.normalize(&mut values, norm);
    MillerJ {
        values,
        neumann_y0: s0 / norm,
        neumann_y1: s1 / norm,
    }
}

/// Hankel's asymptotic expansion; returns `(J_ν(x), Y_ν(x))` for ν ∈ {0, 1}.
fn hankel_asymptotic(nu: u32, x: f64) -> (f64, f64) {
    debug_assert!(nu <= 1);
    let mu = 4.0 * f64::from(nu * nu);
    let z8 = 8.0 * x;
    let mut p = 1.0;
    let mut q = 0.0;
    let mut term: f64 = 1.0;
    for k in 1..200usize {
        let odd = (2 * k - 1) as f64;
        let next = term * (mu - odd * odd) / (k as f64 * z8);
        if next.abs() > term.abs() {
            break;
        }
        term = next;
        match k % 4 {
            1 => q += term,
            2 => p -= term,
            3 => q -= term,
            _ => p += term,
        }
        if term.abs() < 1e-18 {
            break;
        }
    }
    let (s, c) = x.sin_cos();
    let (cos_chi, sin_chi) = if nu == 0 {
        ((c + s) * FRAC_1_SQRT_2, (s - c) * FRAC_1_SQRT_2)
    } else {
        ((s - c) * FRAC_1_SQRT_2, -(s + c) * FRAC_1_SQRT_2)
    };
    let amp = (FRAC_2_PI / x).sqrt();
    (
        amp * (p * cos_chi - q * sin_chi),
        amp * (p * sin_chi + q * cos_chi),
    )
}

/// `(J_0, J_1, Y_0, Y_1)` at `x > 0`, unchecked.
pub(crate) fn jy01(x: f64) -> (f64, f64, f64, f64) {
    if x >= ASYMPTOTIC_MIN {
        let (j0, y0) = hankel_asymptotic(0, x);
        let (j1, y1) = hankel_asymptotic(1, x);
        return (j0, j1, y0, y1);
    }
    let m = miller_j(1, x);
    let (j0, j1) = (m.values[0], m.values[1]);
    let l = (0.5 * x).ln() + EULER_GAMMA;
    let y0 = FRAC_2_PI * (l * j0 - 2.0 * m.neumann_y0);
    let y1 = FRAC_2_PI * (l * j1 - j0 / x + m.neumann_y1);
    (j0, j1, y0, y1)
}

/// `e^{-x} I_k(x)` for `k = 0..=nmax`, `x > 0`.
fn miller_i_scaled(nmax: usize, x: f64) -> Vec<f64> {
    debug_assert!(x > 0.0);
    let start = nmax + 30 + (80.0 * x).sqrt().ceil() as usize;
    let mut values = vec![0.0; nmax + 1];
    let mut scale = RescaleLog::new(nmax);
    let mut above = 0.0;
    let mut cur = 1.0;
    let mut norm = 0.0;
    for k in (1..=start).rev() {
        let below = (2.0 * k as f64 / x) * cur + above;
        above = cur;
        cur = below;
        let m = k - 1;
        if m <= nmax {
            values[m] = cur;
            scale.mark(m);
        }
        norm += if m == 0 { cur } else { 2.0 * cur };
        if cur > RESCALE_ABOVE {
            cur *= RESCALE_BY;
            above *= RESCALE_BY;
            norm *= RESCALE_BY;
            scale.bump();
        }
    }
    scale.normalize(&mut values, norm);
    values
}

/// `(e^x K_0(x), e^x K_1(x))` for `x > 0`.
fn k01_scaled(x: f64) -> (f64, f64) {
    if x <= K_SERIES_MAX {
        let (k0, k1) = k01_series(x);
        let e = x.exp();
        return (k0 * e, k1 * e);
    }
    k01_cf2_scaled(x)
}

/// Steed's evaluation of CF2; scaled `(e^x K_0, e^x K_1)`, accurate for `x ≳ 1`.
fn k01_cf2_scaled(x: f64) -> (f64, f64) {
    // Steed's algorithm for the continued fraction CF2 (Temme), order 0.
    let a1 = 0.25;
    let mut b = 2.0 * (1.0 + x);
    let mut d = 1.0 / b;
    let mut h = d;
    let mut delh = d;
    let mut q1 = 0.0;
    let mut q2 = 1.0;
    let mut q = a1;
    let mut c = a1;
    let mut a = -a1;
    let mut s = 1.0 + q * delh;
    for i in 2..10_000usize {
        a -= 2.0 * (i - 1) as f64;
        c = -a * c / i as f64;
        let qnew = (q1 - b * q2) / a;
        q1 = q2;
        q2 = qnew;
        q += c * qnew;
        b += 2.0;
        d = 1.0 / (b + a * d);
        delh *= b * d - 1.0;
        h += delh;
        let dels = q * delh;
        s += dels;
        if (dels / s).abs() < 1e-17 {
            break;
        }
    }
    h *= a1;
    let k0 = (PI / (2.0 * x)).sqrt() / s;
    let k1 = k0 * (x + 0.5 - h) / x;
    (k0, k1)
}

/// `(K_0, K_1)` at `x > 0`, unchecked.
pub(crate) fn k01(x: f64) -> (f64, f64) {
    if x <= K_SERIES_MAX {
        return k01_series(x);
    }
    let (k0, k1) = k01_cf2_scaled(x);
    let e = (-x).exp();
    (k0 * e, k1 * e)
}

/// Ascending series for `(K_0, K_1)`, accurate for `0 < x ≤ 2`.
fn k01_series(x: f64) -> (f64, f64) {
    let q = 0.25 * x * x;
    let half_log = (0.5 * x).ln();
    let l = half_log + EULER_GAMMA;

    // K0 = -(ln(x/2)+γ) I0 + Σ_{k≥1} q^k/(k!)² H_k
    let mut term = 1.0;
    let mut harmonic = 0.0;
    let mut i0 = 1.0;
    let mut tail0 = 0.0;
    for k in 1..60 {
        let kf = k as f64;
        term *= q / (kf * kf);
        harmonic += 1.0 / kf;
        i0 += term;
        tail0 += term * harmonic;
        if term < 1e-18 * i0 {
            break;
        }
    }
    let k0 = -l * i0 + tail0;

    // K1 = 1/x + ln(x/2) I1 - (x/4) Σ_{k≥0} [ψ(k+1)+ψ(k+2)] q^k/(k!(k+1)!)
    let mut t = 1.0;
    let mut h_k = 0.0;
    let mut sum_i1 = 0.0;
    let mut sum_psi = 0.0;
    for k in 0..60 {
        let kf = k as f64;
        let h_k1 = h_k + 1.0 / (kf + 1.0);
        sum_i1 += t;
        sum_psi += (h_k + h_k1 - 2.0 * EULER_GAMMA) * t;
        t *= q / ((kf + 1.0) * (kf + 2.0));
        h_k = h_k1;
        if t < 1e-18 * sum_i1 {
            break;
        }
    }
    let i1 = 0.5 * x * sum_i1;
    let k1 = 1.0 / x + half_log * i1 - 0.25 * x * sum_psi;
    (k0, k1)
}

/// Bessel function of the first kind `J_n(x)`.
pub fn bessel_j(n: u32, x: f64) -> Result<f64> {
    Ok(bessel_j_seq(n, x)?[n as usize])
}

/// `J_0(x), …, J_nmax(x)`.
pub fn bessel_j_seq(nmax: u32, x: f64) -> Result<Vec<f64>> {
    check_order("bessel_j", nmax)?;
    check_arg("bessel_j", x, true)?;
    let len = nmax as usize + 1;
    if x == 0.0 {
        let mut v = vec![0.0; len];
        v[0] = 1.0;
        return Ok(v);
    }
    let mut v = miller_j(nmax as usize, x).values;
    if x >= ASYMPTOTIC_MIN {
        let (j0, j1, _, _) = jy01(x);
        v[0] = j0;
        if len > 1 {
            v[1] = j1;
        }
    }
    Ok(v)
}

/// Bessel function of the second kind `Y_n(x)`, `x > 0`.
pub fn bessel_y(n: u32, x: f64) -> Result<f64> {
    Ok(bessel_y_seq(n, x)?[n as usize])
}

/// `Y_0(x), …, Y_nmax(x)` by forward recurrence.
pub fn bessel_y_seq(nmax: u32, x: f64) -> Result<Vec<f64>> {
    check_order("bessel_y", nmax)?;
    check_arg("bessel_y", x, false)?;
    let (_, _, y0, y1) = jy01(x);
    let mut v = Vec::with_capacity(nmax as usize + 1);
    v.push(y0);
    if nmax >= 1 {
        v.push(y1);
    }
    for k in 1..nmax as usize {
        let next = (2.0 * k as f64 / x) * v[k] - v[k - 1];
        if !next.is_finite() || next.abs() > REPRESENTABLE {
            return Err(Error::Overflow {
                func: "bessel_y",
                order: k as u32 + 1,
                arg: x,
            });
        }
        v.push(next);
    }
    Ok(v)
}

/// Hankel function of the first kind, `H⁽¹⁾_n(x) = J_n(x) + i Y_n(x)`.
pub fn hankel1(n: u32, x: f64) -> Result<Complex64> {
    let y = bessel_y(n, x)?;
    let j = bessel_j(n, x)?;
    Ok(Complex64::new(j, y))
}

/// `H⁽¹⁾_0(x), …, H⁽¹⁾_nmax(x)`.
pub fn hankel1_seq(nmax: u32, x: f64) -> Result<Vec<Complex64>> {
    let y = bessel_y_seq(nmax, x)?;
    let j = bessel_j_seq(nmax, x)?;
    Ok(j.into_iter()
        .zip(y)
        .map(|(j, y)| Complex64::new(j, y))
        .collect())
}

/// Exponentially scaled modified Bessel function `e^{-x} I_n(x)`.
pub fn bessel_i_scaled(n: u32, x: f64) -> Result<f64> {
    Ok(bessel_i_scaled_seq(n, x)?[n as usize])
}

/// `e^{-x} I_k(x)` for `k = 0..=nmax`.
pub fn bessel_i_scaled_seq(nmax: u32, x: f64) -> Result<Vec<f64>> {
    check_order("bessel_i", nmax)?;
    check_arg("bessel_i", x, true)?;
    if x == 0.0 {
        let mut v = vec![0.0; nmax as usize + 1];
        v[0] = 1.0;
        return Ok(v);
    }
    Ok(miller_i_scaled(nmax as usize, x))
}

/// Modified Bessel function of the first kind `I_n(x)`.
///
/// Values below the smallest normal double underflow to zero.
pub fn bessel_i(n: u32, x: f64) -> Result<f64> {
    Ok(bessel_i_seq(n, x)?[n as usize])
}

/// `I_0(x), …, I_nmax(x)`.
pub fn bessel_i_seq(nmax: u32, x: f64) -> Result<Vec<f64>> {
    let scale = x.exp();
    let v: Vec<f64> = bessel_i_scaled_seq(nmax, x)?
        .into_iter()
        .map(|s| s * scale)
        .collect();
    if let Some(k) = v.iter().position(|s| !s.is_finite() || *s > REPRESENTABLE) {
        return Err(Error::Overflow {
            func: "bessel_i",
            order: k as u32,
            arg: x,
        });
    }
    Ok(v)
}

/// Exponentially scaled modified Bessel function `e^{x} K_n(x)`, `x > 0`.
pub fn bessel_k_scaled(n: u32, x: f64) -> Result<f64> {
    Ok(bessel_k_scaled_seq(n, x)?[n as usize])
}

/// `e^{x} K_k(x)` for `k = 0..=nmax`.
pub fn bessel_k_scaled_seq(nmax: u32, x: f64) -> Result<Vec<f64>> {
    check_order("bessel_k", nmax)?;
    check_arg("bessel_k", x, false)?;
    let (k0, k1) = k01_scaled(x);
    let mut v = Vec::with_capacity(nmax as usize + 1);
    v.push(k0);
    if nmax >= 1 {
        v.push(k1);
    }
    for k in 1..nmax as usize {
        let next = v[k - 1] + (2.0 * k as f64 / x) * v[k];
        if !next.is_finite() || next > REPRESENTABLE {
            return Err(Error::Overflow {
                func: "bessel_k",
                order: k as u32 + 1,
                arg: x,
            });
        }
        v.push(next);
    }
    Ok(v)
}

/// Modified Bessel function of the second kind `K_n(x)`, `x > 0`.
pub fn bessel_k(n: u32, x: f64) -> Result<f64> {
    Ok(bessel_k_seq(n, x)?[n as usize])
}

/// `K_0(x), …, K_nmax(x)`.
pub fn bessel_k_seq(nmax: u32, x: f64) -> Result<Vec<f64>> {
    let scale = (-x).exp();
    let v: Vec<f64> = bessel_k_scaled_seq(nmax, x)?
        .into_iter()
        .map(|s| s * scale)
        .collect();
    if let Some(k) = v.iter().position(|s| !s.is_finite() || *s > REPRESENTABLE) {
        return Err(Error::Overflow {
            func: "bessel_k",
            order: k as u32,
            arg: x,
        });
    }
    Ok(v)
}

/// All order-0 and order-1 cylinder functions at one argument, as needed by
/// the boundary kernels.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Cylinder01 {
    pub j0: f64,
    pub j1: f64,
    pub y0: f64,
    pub y1: f64,
    pub i0: f64,
    pub i1: f64,
    pub k0: f64,
    pub k1: f64,
}

/// Unchecked evaluation for `x > 0`; the argument cap does not apply.
pub(crate) fn cylinder01(x: f64) -> Cylinder01 {
    let (j0, j1, y0, y1) = jy01(x);
    let is = miller_i_scaled(1, x);
    let (k0s, k1s) = k01_scaled(x);
    let ep = x.exp();
    let em = (-x).exp();
    Cylinder01 {
        j0,
        j1,
        y0,
        y1,
        i0: is[0] * ep,
        i1: is[1] * ep,
        k0: k0s * em,
        k1: k1s * em,
    }
}
