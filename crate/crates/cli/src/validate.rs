//! Self-checks run by `biharm validate`.

use std::f64::consts::PI;
use std::time::Instant;

use anyhow::Result;
use biharm_core::forward::far_field_vector;
use biharm_core::geometry::QuadratureLayout;
use biharm_core::kernels::{sdir_block, sdir_selfsplit};
use biharm_core::linalg::herm_eigvals;
use biharm_core::specfun::{bessel_i_scaled, bessel_j, bessel_k_scaled, bessel_y};
use biharm_core::{
    assemble, builtin_example, directions, disk_series_far_field, far_field_matrix, fm_field,
    make_shape, mm_field, probe_gram, run_experiment, BoundaryCondition, Convention, DensityPair,
    Error, FmVariant, ObstacleScene, ShapeKind, ShapeParams, Vec2,
};
use num_complex::Complex64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Level {
    Quick,
    Full,
}

/// One line of the report.
#[derive(Debug)]
pub struct Check {
    pub name: String,
    pub residual: f64,
    pub tolerance: f64,
    /// Residuals are upper bounds unless this is set.
    pub lower_bound: bool,
}

impl Check {
    fn at_most(name: impl Into<String>, residual: f64, tolerance: f64) -> Self {
        Check { name: name.into(), residual, tolerance, lower_bound: false }
    }

    fn at_least(name: impl Into<String>, residual: f64, tolerance: f64) -> Self {
        Check { name: name.into(), residual, tolerance, lower_bound: true }
    }

    pub fn passed(&self) -> bool {
        if self.lower_bound {
            self.residual >= self.tolerance
        } else {
            self.residual <= self.tolerance
        }
    }
}

impl std::fmt::Display for Check {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let verdict = if self.passed() { "PASS" } else { "FAIL" };
        let rel = if self.lower_bound { ">=" } else { "<=" };
        write!(f, "{verdict} {:<40} {:.3e} ({rel} {:.1e})", self.name, self.residual, self.tolerance)
    }
}

struct Sizes {
    n: usize,
    m_half: usize,
}

const KAPPA: f64 = 2.0 * PI;

fn disk(r: f64) -> Result<ObstacleScene> {
    let p = ShapeParams { radius: Some(r), ..Default::default() };
    Ok(ObstacleScene::single(make_shape(ShapeKind::Circle, &p)?))
}

/// Wronskian identities of J/Y and I/K, relative to the size of the terms.
fn wronskians() -> Result<f64> {
    let mut worst = 0.0_f64;
    for &x in &[0.05, 0.7, 3.0, 12.5, 60.0, 250.0, 500.0] {
        for n in 0..60 {
            let jy = (bessel_j(n + 1, x), bessel_y(n, x), bessel_j(n, x), bessel_y(n + 1, x));
            if let (Ok(a), Ok(b), Ok(c), Ok(d)) = jy {
                let lhs = a * b - c * d;
                let scale = (a * b).abs() + (c * d).abs();
                let want = 2.0 / (PI * x);
                if scale.is_finite() && scale < 1e250 {
                    worst = worst.max((lhs - want).abs() / scale.max(want));
                }
            }
            // I_n K_{n+1} + I_{n+1} K_n = 1/x; the exponential scalings cancel.
            let ik = (bessel_i_scaled(n, x), bessel_k_scaled(n + 1, x), bessel_i_scaled(n + 1, x), bessel_k_scaled(n, x));
            match ik {
                (Ok(a), Ok(b), Ok(c), Ok(d)) if (a * b).is_finite() && a * b > 0.0 => {
                    worst = worst.max(((a * b + c * d) * x - 1.0).abs());
                }
                (_, Err(Error::Overflow { .. }), _, _) | (_, _, _, Err(Error::Overflow { .. })) => {}
                (Err(e), ..) | (_, Err(e), ..) | (_, _, Err(e), _) | (.., Err(e)) => return Err(e.into()),
                _ => {}
            }
        }
    }
    Ok(worst)
}

/// The split kernel recombined off the diagonal against the direct block.
fn kernel_split() -> Result<f64> {
    let kite = make_shape(ShapeKind::Kite, &ShapeParams::default())?;
    let mut worst = 0.0_f64;
    for i in 0..24 {
        for j in 0..24 {
            if i == j {
                continue;
            }
            let (t, s) = (0.26 * i as f64 + 0.01, 0.26 * j as f64 + 0.03);
            let direct = sdir_block(KAPPA, &kite, t, &kite, s)?;
            let split = sdir_selfsplit(KAPPA, &kite, t, s).reconstruct(t, s);
            for r in 0..2 {
                for c in 0..2 {
                    let d = direct.entry(r, c);
                    worst = worst.max((split.entry(r, c) - d).norm() / d.norm().max(1e-3));
                }
            }
        }
    }
    Ok(worst)
}

fn pseudo_density(layout: &QuadratureLayout) -> DensityPair {
    let n = layout.total_nodes();
    let f = |k: usize, a: f64| Complex64::new((a * k as f64 + 0.3).sin(), (1.7 * a * k as f64).cos());
    DensityPair { tau: (0..n).map(|k| f(k, 0.37)).collect(), sigma: (0..n).map(|k| f(k, 0.91)).collect() }
}

fn energy_identity(sizes: &Sizes) -> Result<f64> {
    let scene = ObstacleScene::single(make_shape(ShapeKind::Kite, &ShapeParams::default())?);
    let sys = assemble(&scene, KAPPA, sizes.m_half)?;
    let w = pseudo_density(sys.layout());
    let lhs = sys.quadratic_form(&w)?.im;
    let v = far_field_vector(&w, sys.layout(), KAPPA, &directions(sizes.n))?;
    let rhs = KAPPA * KAPPA / (4.0 * PI) * (2.0 * PI / sizes.n as f64)
        * v.iter().map(|z| z.norm_sqr()).sum::<f64>();
    Ok((lhs - rhs).abs() / rhs.abs())
}

fn probe_psd(n: usize) -> Result<f64> {
    let dirs = directions(n);
    let mut worst = f64::INFINITY;
    for k in 0..20 {
        let z = Vec2::new(2.9 * (1.3 * k as f64).sin(), 2.9 * (0.7 * k as f64).cos());
        let h = 0.05 + 0.45 * (k as f64 / 19.0);
        let t = probe_gram(z, h, KAPPA, &dirs)?.matrix;
        let trace: f64 = t.diag().iter().map(|c| c.re).sum();
        let min = herm_eigvals(&t)?.into_iter().fold(f64::INFINITY, f64::min);
        worst = worst.min(min / trace);
    }
    Ok(-worst)
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 { v[n / 2] } else { 0.5 * (v[n / 2 - 1] + v[n / 2]) }
}

fn example1(checks: &mut Vec<Check>) -> Result<()> {
    let mut cfg = builtin_example(1)?;
    cfg.reconstruct.grid.nx = 41;
    cfg.reconstruct.grid.ny = 41;
    let f = run_experiment(&cfg)?.data;
    let grid = &cfg.reconstruct.grid;
    for (name, variant) in [("W1", FmVariant::W1), ("W2", FmVariant::W2)] {
        let field = fm_field(&f, grid, 0.0, variant, Convention::Theorem)?;
        let ratio = median(field.select(|z| z.norm() <= 0.3)) / median(field.select(|z| z.norm() >= 1.5));
        checks.push(Check::at_least(format!("example 1 {name} median ratio"), ratio, 10.0));
    }
    let scene = cfg.build_scene()?;
    let field = mm_field(&f, grid, 0.1, 0.0, BoundaryCondition::Dirichlet)?;
    let inside = field.select(|z| scene.contains(z)).into_iter().fold(f64::MIN, f64::max);
    let outside = field.select(|z| z.norm() >= 1.5).into_iter().fold(f64::MAX, f64::min);
    checks.push(Check::at_least("example 1 W3 exterior min - interior max", outside - inside, 1.0));
    Ok(())
}

/// Runs the suites for `level`, printing each check as it completes.
pub fn run(level: Level) -> Result<Vec<Check>> {
    let sizes = match level {
        Level::Quick => Sizes { n: 32, m_half: 64 },
        Level::Full => Sizes { n: 64, m_half: 128 },
    };
    let start = Instant::now();
    let mut checks = Vec::new();
    let push = |c: Check, checks: &mut Vec<Check>| {
        println!("{c}");
        checks.push(c);
    };

    push(Check::at_most("special functions: Wronskians", wronskians()?, 1e-12), &mut checks);
    push(Check::at_most("kernel splitting recombination", kernel_split()?, 1e-10), &mut checks);

    let d = disk(0.4)?;
    let f = far_field_matrix(&d, KAPPA, sizes.n, sizes.m_half)?;
    push(Check::at_most("far-field unitarity", f.unitarity_residual(), 1e-6), &mut checks);
    push(Check::at_most("far-field identity", f.far_identity_residual(), 1e-6), &mut checks);
    push(Check::at_most("energy identity (kite)", energy_identity(&sizes)?, 1e-5), &mut checks);

    let series = disk_series_far_field(Vec2::ZERO, 0.4, KAPPA, sizes.n, 60)?;
    let diff = f.entries.iter().zip(series.entries.iter()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    push(Check::at_most("Nystrom vs disk series", diff, 1e-6), &mut checks);

    let t = Vec2::new(0.7, -0.3);
    let p = ShapeParams { center: Some(t), radius: Some(0.4), ..Default::default() };
    let moved = far_field_matrix(&ObstacleScene::single(make_shape(ShapeKind::Circle, &p)?), KAPPA, sizes.n, sizes.m_half)?;
    let shifted = f.translated(t);
    let diff = moved.entries.iter().zip(shifted.entries.iter()).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    push(Check::at_most("translation covariance of far field", diff, 1e-8), &mut checks);

    push(Check::at_most("probe matrix PSD (-min eig / trace)", probe_psd(sizes.n)?, 1e-10), &mut checks);

    if level == Level::Full {
        let before = checks.len();
        example1(&mut checks)?;
        for c in &checks[before..] {
            println!("{c}");
        }
    }
    log::info!("validation finished in {:.2} s", start.elapsed().as_secs_f64());
    Ok(checks)
}
