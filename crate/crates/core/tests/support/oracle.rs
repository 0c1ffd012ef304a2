//! Slow reference evaluations of cylinder functions, independent of the
//! library algorithms: ascending series in double-double arithmetic, and
//! quadrature of integral representations.

#![allow(dead_code)]

use std::f64::consts::PI;

use twofloat::TwoFloat;

fn dd(x: f64) -> TwoFloat {
    TwoFloat::from(x)
}

fn euler_gamma() -> TwoFloat {
    TwoFloat::new_add(0.577_215_664_901_532_9, -4.942_915_152_430_645e-18)
}

/// Reciprocal refined by Newton steps; `TwoFloat` division by a `TwoFloat`
/// is only accurate to about double precision.
fn recip_dd(v: TwoFloat) -> TwoFloat {
    let mut r = TwoFloat::from(1.0 / v.hi());
    for _ in 0..2 {
        r = r + r * (TwoFloat::from(1.0) - v * r);
    }
    r
}

/// Natural logarithm in double-double via `2 atanh((m−1)/(m+1))` after
/// binary range reduction.
fn ln_dd(v: TwoFloat) -> TwoFloat {
    let ln2 = TwoFloat::new_add(std::f64::consts::LN_2, 2.319_046_813_846_299_6e-17);
    let mut m = v;
    let mut e = 0i32;
    while m.hi() > std::f64::consts::SQRT_2 {
        m /= 2.0;
        e += 1;
    }
    while m.hi() < std::f64::consts::FRAC_1_SQRT_2 {
        m *= 2.0;
        e -= 1;
    }
    let s = (m - 1.0) * recip_dd(m + 1.0);
    let s2 = s * s;
    let mut p = s;
    let mut sum = s;
    for k in 1..200 {
        p *= s2;
        let t = p / f64::from(2 * k + 1);
        sum += t;
        if t.hi().abs() < 1e-34 {
            break;
        }
    }
    sum * 2.0 + ln2 * f64::from(e)
}

fn pi_dd() -> TwoFloat {
    TwoFloat::new_add(PI, 1.224_646_799_147_353_2e-16)
}

/// `Σ (-1)^k (x/2)^{2k+n} / (k!(k+n)!)` in double-double; also returns the
/// sum of absolute terms so that callers can bound cancellation.
fn j_series(n: u32, x: f64) -> (TwoFloat, f64) {
    let h = dd(x) / 2.0;
    let mut t = TwoFloat::from(1.0);
    for k in 1..=n {
        t = t * h / f64::from(k);
    }
    let q = h * h;
    let mut sum = t;
    let mut abs = t.hi().abs();
    for k in 1..2000u32 {
        t = -t * q / (f64::from(k) * f64::from(k + n));
        sum += t;
        abs += t.hi().abs();
        if t.hi().abs() < 1e-34 * abs && f64::from(k) > h.hi() {
            break;
        }
    }
    (sum, abs)
}

/// Gauss–Legendre nodes and weights on [-1, 1].
pub fn gauss_legendre(m: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(m);
    for i in 0..m {
        let mut z = (PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=m {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            if m == 1 {
                p0 = 1.0;
                p1 = z;
            }
            dp = m as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        out.push((z, 2.0 / ((1.0 - z * z) * dp * dp)));
    }
    out
}

fn composite<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize, rule: &[(f64, f64)]) -> f64 {
    let w = (b - a) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let mid = a + (p as f64 + 0.5) * w;
        let mut s = 0.0;
        for &(z, wt) in rule {
            s += wt * f(mid + 0.5 * w * z);
        }
        total += 0.5 * w * s;
    }
    total
}

/// `J_n(x)`: double-double series while the cancellation is affordable,
/// otherwise the periodic trapezoid rule on `(1/2π)∫ cos(nθ − x sin θ) dθ`.
pub fn bessel_j(n: u32, x: f64) -> f64 {
    if x == 0.0 {
        return if n == 0 { 1.0 } else { 0.0 };
    }
    if x <= 30.0_f64.max(f64::from(n)) {
        let (s, _) = j_series(n, x);
        return s.hi() + s.lo();
    }
    let m = 2 * (x.ceil() as usize + n as usize) + 256;
    let nf = f64::from(n);
    let mut sum = 0.0;
    for k in 0..m {
        let th = 2.0 * PI * k as f64 / m as f64;
        sum += (nf * th - x * th.sin()).cos();
    }
    sum / m as f64
}

/// `Y_n(x)`: double-double ascending series for `x ≤ 30`, otherwise Gauss–
/// Legendre quadrature of the Schläfli-type integral representation.
pub fn bessel_y(n: u32, x: f64) -> f64 {
    if x <= 30.0 {
        return y_series(n, x);
    }
    let nf = f64::from(n);
    let rule = gauss_legendre(20);
    let first = composite(
        |th| (x * th.sin() - nf * th).sin(),
        0.0,
        PI,
        64 + x.ceil() as usize,
        &rule,
    ) / PI;
    // (e^{nt} + (-1)^n e^{-nt}) e^{-x sinh t} on [0, T]
    let sign = if n.is_multiple_of(2) { 1.0 } else { -1.0 };
    let mut t_end = 1.0;
    while x * f64::sinh(t_end) - nf * t_end < 800.0 {
        t_end *= 1.2;
    }
    let second = composite(
        |t| ((nf * t - x * t.sinh()).exp()) + sign * ((-nf * t - x * t.sinh()).exp()),
        0.0,
        t_end,
        4000,
        &rule,
    ) / PI;
    first - second
}

fn y_series(n: u32, x: f64) -> f64 {
    let h = dd(x) / 2.0;
    let pi = pi_dd();
    let log_term = ln_dd(h) + euler_gamma();

    // Finite sum −(1/π) Σ_{k<n} (n−k−1)!/k! (x/2)^{2k−n}
    let mut finite = TwoFloat::from(0.0);
    if n > 0 {
        // k = 0 term: (n−1)! (x/2)^{−n}
        let mut t = TwoFloat::from(1.0);
        for k in 1..n {
            t *= f64::from(k);
        }
        let inv_h = recip_dd(h);
        for _ in 0..n {
            t *= inv_h;
        }
        if !t.hi().is_finite() {
            return f64::NAN;
        }
        finite = t;
        let q = h * h;
        for k in 1..n {
            // ratio t_k / t_{k-1} = q / (k (n−k))
            t = t * q / (f64::from(k) * f64::from(n - k));
            finite += t;
        }
    }

    // Σ_{k≥0} [ψ(k+1)+ψ(n+k+1)] (−x²/4)^k (x/2)^n / (k!(n+k)!)
    // with ψ(m+1) = H_m − γ; the γ parts combine with ln(x/2) below.
    let mut t = TwoFloat::from(1.0);
    for k in 1..=n {
        t = t * h / f64::from(k);
    }
    let mut hk = TwoFloat::from(0.0);
    let mut hnk = TwoFloat::from(0.0);
    for m in 1..=n {
        hnk += recip_dd(TwoFloat::from(f64::from(m)));
    }
    let q = h * h;
    let mut jn = TwoFloat::from(0.0);
    let mut psi_sum = TwoFloat::from(0.0);
    let mut abs = 0.0;
    for k in 0..3000u32 {
        jn += t;
        psi_sum += (hk + hnk) * t;
        abs += t.hi().abs();
        let kf = f64::from(k + 1);
        hk += recip_dd(TwoFloat::from(kf));
        hnk += recip_dd(TwoFloat::from(f64::from(n + k + 1)));
        t = -t * q / (kf * f64::from(n + k + 1));
        if t.hi().abs() < 1e-34 * abs && kf > h.hi() {
            break;
        }
    }
    // Y = (2/π)(ln(x/2)+γ) J_n − (1/π)Σ(H_k + H_{n+k}) t_k − (1/π) finite
    let y = (log_term * jn * 2.0 - psi_sum - finite) * recip_dd(pi);
    y.hi() + y.lo()
}

/// `I_n(x)` by its ascending series in double-double (no cancellation).
pub fn bessel_i(n: u32, x: f64) -> f64 {
    if x == 0.0 {
        return if n == 0 { 1.0 } else { 0.0 };
    }
    let h = dd(x) / 2.0;
    let mut t = TwoFloat::from(1.0);
    for k in 1..=n {
        t = t * h / f64::from(k);
    }
    let q = h * h;
    let mut sum = t;
    for k in 1..5000u32 {
        t = t * q / (f64::from(k) * f64::from(k + n));
        sum += t;
        if t.hi() < 1e-34 * sum.hi() {
            break;
        }
    }
    sum.hi() + sum.lo()
}

/// `K_n(x) = ∫_0^∞ e^{−x cosh t} cosh(nt) dt` by the trapezoid rule, which is
/// spectrally accurate for this doubly-exponentially decaying integrand.
/// Accumulated in log-space to reach large values at small `x`.
pub fn bessel_k(n: u32, x: f64) -> f64 {
    let nf = f64::from(n);
    let step = 0.005;
    let log_f = |t: f64| -> f64 {
        // ln(e^{−x cosh t} cosh(n t))
        let c = if nf * t > 30.0 {
            nf * t - std::f64::consts::LN_2
        } else {
            (nf * t).cosh().ln()
        };
        -x * t.cosh() + c
    };
    let mut logs = Vec::new();
    let mut t: f64 = 0.0;
    let mut peak = f64::NEG_INFINITY;
    loop {
        let v = log_f(t);
        peak = peak.max(v);
        logs.push(v);
        if v < peak - 60.0 && x * t.sinh() > nf {
            break;
        }
        t += step;
    }
    let mut sum = 0.0;
    for (i, &v) in logs.iter().enumerate() {
        let w = if i == 0 { 0.5 } else { 1.0 };
        sum += w * (v - peak).exp();
    }
    let out = peak + (sum * step).ln();
    out.exp()
}
