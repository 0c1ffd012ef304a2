//! Grid comparison of the library cylinder functions against `oracle`.

#![allow(dead_code)]

use biharm_core::specfun;
use biharm_core::Error;

use super::oracle;

pub const ORDERS: [u32; 10] = [0, 1, 2, 3, 5, 10, 20, 30, 45, 60];

/// 200 log-spaced arguments in `[1e-8, 500]`.
pub fn grid() -> Vec<f64> {
    let (lo, hi) = (1e-8_f64.ln(), 500_f64.ln());
    (0..200)
        .map(|i| (lo + (hi - lo) * i as f64 / 199.0).exp())
        .map(|x: f64| x.min(500.0))
        .collect()
}

#[derive(Debug, Default, Clone)]
pub struct FunctionReport {
    pub name: &'static str,
    pub checked: usize,
    pub skipped: usize,
    pub max_err: f64,
    pub worst: (u32, f64),
}

impl FunctionReport {
    fn new(name: &'static str) -> Self {
        Self {
            name,
            ..Default::default()
        }
    }

    fn record(&mut self, n: u32, x: f64, err: f64) {
        self.checked += 1;
        if err > self.max_err || err.is_nan() {
            self.max_err = if err.is_nan() { f64::INFINITY } else { err };
            self.worst = (n, x);
        }
    }
}

/// Values outside this magnitude window are not representable with full
/// relative precision and are excluded from the comparison.
fn representable(v: f64) -> bool {
    v.is_finite() && v.abs() < 1e300 && (v == 0.0 || v.abs() > 1e-290)
}

fn compare(
    rep: &mut FunctionReport,
    n: u32,
    x: f64,
    got: Result<f64, Error>,
    want: f64,
    scale: f64,
) {
    if !representable(want) {
        rep.skipped += 1;
        return;
    }
    match got {
        Ok(v) => rep.record(n, x, (v - want).abs() / scale.abs().max(f64::MIN_POSITIVE)),
        Err(_) => rep.record(n, x, f64::INFINITY),
    }
}

/// Errors are relative to the value itself, except for J and Y in the
/// oscillatory region `x > n`, where they are measured against the local
/// amplitude `sqrt(J² + Y²)` (relative error is meaningless at zeros).
pub fn run() -> Vec<FunctionReport> {
    let xs = grid();
    let mut j = FunctionReport::new("bessel_j");
    let mut y = FunctionReport::new("bessel_y");
    let mut i = FunctionReport::new("bessel_i");
    let mut k = FunctionReport::new("bessel_k");
    let mut h = FunctionReport::new("hankel1");
    for &x in &xs {
        for &n in &ORDERS {
            let jw = oracle::bessel_j(n, x);
            let yw = oracle::bessel_y(n, x);
            let oscillatory = x > f64::from(n);
            let envelope = if oscillatory { jw.hypot(yw) } else { f64::NAN };
            compare(&mut j, n, x, specfun::bessel_j(n, x), jw, if oscillatory { envelope } else { jw });
            if yw.is_finite() && yw.abs() < 1e300 {
                compare(&mut y, n, x, specfun::bessel_y(n, x), yw, if oscillatory { envelope } else { yw });
                match specfun::hankel1(n, x) {
                    Ok(hv) => {
                        let err = (hv.re - jw).hypot(hv.im - yw) / jw.hypot(yw);
                        h.record(n, x, err);
                    }
                    Err(_) => h.record(n, x, f64::INFINITY),
                }
            } else {
                y.skipped += 1;
                h.skipped += 1;
            }
            let iw = oracle::bessel_i(n, x);
            compare(&mut i, n, x, specfun::bessel_i(n, x), iw, iw);
            let kw = oracle::bessel_k(n, x);
            compare(&mut k, n, x, specfun::bessel_k(n, x), kw, kw);
        }
    }
    vec![j, y, i, k, h]
}
