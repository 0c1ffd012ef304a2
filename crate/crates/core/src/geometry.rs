//! Closed parametric boundary curves, multi-obstacle scenes and the node
//! layouts used by the boundary solver.
//!
//! Every built-in shape is a trigonometric polynomial in the parameter, so
//! positions and all derivatives are evaluated exactly from Fourier
//! coefficients and the curves are exactly 2π-periodic.

use std::f64::consts::PI;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A point or vector in the plane.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    /// Unit vector at angle `theta`.
    pub fn polar(theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Self::new(c, s)
    }

    pub fn dot(self, o: Vec2) -> f64 {
        self.x * o.x + self.y * o.y
    }

    pub fn cross(self, o: Vec2) -> f64 {
        self.x * o.y - self.y * o.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn norm_sq(self) -> f64 {
        self.dot(self)
    }
}

impl From<[f64; 2]> for Vec2 {
    fn from(v: [f64; 2]) -> Self {
        Self::new(v[0], v[1])
    }
}

impl From<Vec2> for [f64; 2] {
    fn from(v: Vec2) -> Self {
        [v.x, v.y]
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x + o.x, self.y + o.y)
    }
}

impl AddAssign for Vec2 {
    fn add_assign(&mut self, o: Vec2) {
        self.x += o.x;
        self.y += o.y;
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, o: Vec2) -> Vec2 {
        Vec2::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<Vec2> for f64 {
    type Output = Vec2;
    fn mul(self, v: Vec2) -> Vec2 {
        Vec2::new(self * v.x, self * v.y)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

/// Shape families with their defining parameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Shape {
    /// `center + r (cos t, sin t)`
    Circle { center: Vec2, radius: f64 },
    /// `center + (a cos t, b sin t)`
    Ellipse { center: Vec2, a: f64, b: f64 },
    /// `center + s (cos³t + cos t, sin³t + sin t)`
    RoundedSquare { center: Vec2, scale: f64 },
    /// `center + (r + a cos 3t)(cos t, sin t)`
    RoundedTriangle {
        center: Vec2,
        radius: f64,
        amplitude: f64,
    },
    /// `center + s (0.65 cos 2t + cos t − 0.65, 1.5 sin t)`
    Kite { center: Vec2, scale: f64 },
}

/// Shape family selector, used by configuration files and the CLI.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShapeKind {
    Circle,
    Ellipse,
    RoundedSquare,
    RoundedTriangle,
    Kite,
}

impl ShapeKind {
    pub const ALL: [ShapeKind; 5] = [
        ShapeKind::Circle,
        ShapeKind::Ellipse,
        ShapeKind::RoundedSquare,
        ShapeKind::RoundedTriangle,
        ShapeKind::Kite,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ShapeKind::Circle => "circle",
            ShapeKind::Ellipse => "ellipse",
            ShapeKind::RoundedSquare => "rounded_square",
            ShapeKind::RoundedTriangle => "rounded_triangle",
            ShapeKind::Kite => "kite",
        }
    }

    /// Human-readable parameterization with default parameters.
    pub fn formula(self) -> &'static str {
        match self {
            ShapeKind::Circle => "c + r(cos t, sin t); default r = 0.4",
            ShapeKind::Ellipse => "c + (a cos t, b sin t); default a = 1, b = 0.5",
            ShapeKind::RoundedSquare => {
                "c + s(cos^3 t + cos t, sin^3 t + sin t); default s = 0.25"
            }
            ShapeKind::RoundedTriangle => {
                "c + (r + a cos 3t)(cos t, sin t); default r = 0.8, a = 0.12, c = (-4, -3)"
            }
            ShapeKind::Kite => {
                "c + s(0.65 cos 2t + cos t - 0.65, 1.5 sin t); default s = 0.5, c = (3, 4)"
            }
        }
    }
}

impl std::str::FromStr for ShapeKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        ShapeKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::Shape(format!("unknown shape kind '{s}'")))
    }
}

impl fmt::Display for ShapeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Optional shape parameters; absent entries take the defaults listed in
/// [`ShapeKind::formula`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShapeParams {
    pub center: Option<Vec2>,
    pub radius: Option<f64>,
    pub a: Option<f64>,
    pub b: Option<f64>,
    pub scale: Option<f64>,
    pub amplitude: Option<f64>,
}

impl Shape {
    pub fn kind(&self) -> ShapeKind {
        match self {
            Shape::Circle { .. } => ShapeKind::Circle,
            Shape::Ellipse { .. } => ShapeKind::Ellipse,
            Shape::RoundedSquare { .. } => ShapeKind::RoundedSquare,
            Shape::RoundedTriangle { .. } => ShapeKind::RoundedTriangle,
            Shape::Kite { .. } => ShapeKind::Kite,
        }
    }

    pub fn center(&self) -> Vec2 {
        match *self {
            Shape::Circle { center, .. }
            | Shape::Ellipse { center, .. }
            | Shape::RoundedSquare { center, .. }
            | Shape::RoundedTriangle { center, .. }
            | Shape::Kite { center, .. } => center,
        }
    }

    /// The same shape moved by `shift`.
    pub fn translated(&self, shift: Vec2) -> Shape {
        let mut s = *self;
        match &mut s {
            Shape::Circle { center, .. }
            | Shape::Ellipse { center, .. }
            | Shape::RoundedSquare { center, .. }
            | Shape::RoundedTriangle { center, .. }
            | Shape::Kite { center, .. } => *center += shift,
        }
        s
    }

    fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::Shape(format!(
                    "{}: parameter {name} must be positive, got {v}",
                    self.kind()
                )))
            }
        };
        let c = self.center();
        if !(c.x.is_finite() && c.y.is_finite()) {
            return Err(Error::Shape("center must be finite".into()));
        }
        match *self {
            Shape::Circle { radius, .. } => positive("radius", radius),
            Shape::Ellipse { a, b, .. } => positive("a", a).and(positive("b", b)),
            Shape::RoundedSquare { scale, .. } | Shape::Kite { scale, .. } => {
                positive("scale", scale)
            }
            Shape::RoundedTriangle {
                radius, amplitude, ..
            } => {
                positive("radius", radius)?;
                if !(amplitude.is_finite() && amplitude >= 0.0 && amplitude < radius) {
                    return Err(Error::Shape(format!(
                        "rounded_triangle: amplitude must lie in [0, radius), got {amplitude}"
                    )));
                }
                Ok(())
            }
        }
    }

    /// Fourier coefficients `(k, cos-coef, sin-coef)` of each component,
    /// without the center.
    fn fourier(&self) -> (Vec<TrigTerm>, Vec<TrigTerm>) {
        let t = |k, c, s| TrigTerm { k, c, s };
        match *self {
            Shape::Circle { radius: r, .. } => (vec![t(1, r, 0.0)], vec![t(1, 0.0, r)]),
            Shape::Ellipse { a, b, .. } => (vec![t(1, a, 0.0)], vec![t(1, 0.0, b)]),
            Shape::RoundedSquare { scale: s, .. } => (
                // cos³t = (3 cos t + cos 3t)/4, sin³t = (3 sin t − sin 3t)/4
                vec![t(1, 1.75 * s, 0.0), t(3, 0.25 * s, 0.0)],
                vec![t(1, 0.0, 1.75 * s), t(3, 0.0, -0.25 * s)],
            ),
            Shape::RoundedTriangle {
                radius: r,
                amplitude: a,
                ..
            } => (
                vec![t(1, r, 0.0), t(2, 0.5 * a, 0.0), t(4, 0.5 * a, 0.0)],
                vec![t(1, 0.0, r), t(2, 0.0, -0.5 * a), t(4, 0.0, 0.5 * a)],
            ),
            Shape::Kite { scale: s, .. } => (
                vec![t(0, -0.65 * s, 0.0), t(1, s, 0.0), t(2, 0.65 * s, 0.0)],
                vec![t(1, 0.0, 1.5 * s)],
            ),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
struct TrigTerm {
    k: u32,
    c: f64,
    s: f64,
}

/// `p`-th derivative of `Σ c_k cos kt + s_k sin kt`.
fn trig_eval(terms: &[TrigTerm], p: u32, t: f64) -> f64 {
    let mut acc = 0.0;
    for term in terms {
        if term.k == 0 {
            if p == 0 {
                acc += term.c;
            }
            continue;
        }
        let kf = f64::from(term.k);
        let (sn, cs) = (kf * t).sin_cos();
        let scale = kf.powi(p as i32);
        // d^p/dt^p of cos and sin cycle with period four.
        let (dc, ds) = match p % 4 {
            0 => (cs, sn),
            1 => (-sn, cs),
            2 => (-cs, -sn),
            _ => (sn, -cs),
        };
        acc += scale * (term.c * dc + term.s * ds);
    }
    acc
}

/// A closed, regular, counterclockwise boundary curve on `t ∈ [0, 2π)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ParametricCurve {
    shape: Shape,
    label: String,
    fx: Vec<TrigTerm>,
    fy: Vec<TrigTerm>,
}

impl ParametricCurve {
    /// Builds and validates a curve.
    pub fn new(shape: Shape) -> Result<Self> {
        shape.validate()?;
        let (fx, fy) = shape.fourier();
        let curve = Self {
            shape,
            label: shape.kind().name().to_string(),
            fx,
            fy,
        };
        curve.check_regular()?;
        Ok(curve)
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// `d^p x / dt^p` for `p ≤ 3`.
    pub fn derivative(&self, p: u32, t: f64) -> Vec2 {
        let base = if p == 0 { self.shape.center() } else { Vec2::ZERO };
        base + Vec2::new(trig_eval(&self.fx, p, t), trig_eval(&self.fy, p, t))
    }

    pub fn position(&self, t: f64) -> Vec2 {
        self.derivative(0, t)
    }

    pub fn d1(&self, t: f64) -> Vec2 {
        self.derivative(1, t)
    }

    pub fn d2(&self, t: f64) -> Vec2 {
        self.derivative(2, t)
    }

    pub fn d3(&self, t: f64) -> Vec2 {
        self.derivative(3, t)
    }

    /// `|x′(t)|`
    pub fn speed(&self, t: f64) -> f64 {
        self.d1(t).norm()
    }

    /// Outward unit normal `(x₂′, −x₁′)/|x′|`.
    pub fn normal(&self, t: f64) -> Vec2 {
        let d = self.d1(t);
        (1.0 / d.norm()) * Vec2::new(d.y, -d.x)
    }

    /// The same curve moved by `shift`.
    pub fn translated(&self, shift: Vec2) -> ParametricCurve {
        let mut c = self.clone();
        c.shape = self.shape.translated(shift);
        c
    }

    fn check_regular(&self) -> Result<()> {
        let n = 1024;
        let scale = self.bounding_radius();
        for j in 0..n {
            let t = 2.0 * PI * j as f64 / n as f64;
            if self.speed(t) <= 1e-12 * scale {
                return Err(Error::Shape(format!(
                    "{} is not regular at t = {t}",
                    self.label
                )));
            }
        }
        // Counterclockwise orientation: positive signed area.
        let area = self.signed_area(n);
        if area <= 0.0 {
            return Err(Error::Shape(format!(
                "{} is not counterclockwise (signed area {area})",
                self.label
            )));
        }
        Ok(())
    }

    /// Enclosed signed area via `½∮ x dy − y dx` with the trapezoid rule.
    pub fn signed_area(&self, n: usize) -> f64 {
        let h = 2.0 * PI / n as f64;
        (0..n)
            .map(|j| {
                let t = j as f64 * h;
                self.position(t).cross(self.d1(t))
            })
            .sum::<f64>()
            * 0.5
            * h
    }

    /// Upper bound on the distance from the center to the curve.
    pub fn bounding_radius(&self) -> f64 {
        let sum = |ts: &[TrigTerm]| ts.iter().map(|t| t.c.abs() + t.s.abs()).sum::<f64>();
        sum(&self.fx).hypot(sum(&self.fy))
    }

    /// Equispaced samples `x(2πj/n)`.
    pub fn polygon(&self, n: usize) -> Vec<Vec2> {
        (0..n)
            .map(|j| self.position(2.0 * PI * j as f64 / n as f64))
            .collect()
    }

    /// Closest boundary parameter and distance to `z`.
    pub fn closest_point(&self, z: Vec2) -> (f64, f64) {
        let n = 512;
        let h = 2.0 * PI / n as f64;
        let (mut best_t, mut best_d) = (0.0, f64::INFINITY);
        for j in 0..n {
            let t = j as f64 * h;
            let d = (self.position(t) - z).norm_sq();
            if d < best_d {
                best_d = d;
                best_t = t;
            }
        }
        // Newton on g(t) = (x(t) − z)·x′(t), safeguarded to the bracket.
        let (lo, hi) = (best_t - h, best_t + h);
        let mut t = best_t;
        for _ in 0..50 {
            let r = self.position(t) - z;
            let d1 = self.d1(t);
            let g = r.dot(d1);
            let dg = d1.norm_sq() + r.dot(self.d2(t));
            if dg <= 0.0 {
                break;
            }
            let next = (t - g / dg).clamp(lo, hi);
            let done = (next - t).abs() < 1e-15;
            t = next;
            if done {
                break;
            }
        }
        let d = (self.position(t) - z).norm();
        if d <= best_d.sqrt() {
            (t.rem_euclid(2.0 * PI), d)
        } else {
            (best_t, best_d.sqrt())
        }
    }

    /// Membership in the closed region bounded by the curve.
    pub fn contains(&self, z: Vec2) -> bool {
        let (t, d) = self.closest_point(z);
        if d <= BOUNDARY_TOLERANCE {
            return true;
        }
        if d < 1e-3 * self.bounding_radius().max(1.0) {
            // Too close for the polygonal winding number; the closest-point
            // normal decides the side.
            return (z - self.position(t)).dot(self.normal(t)) < 0.0;
        }
        winding_number(&self.polygon(WINDING_POLYGON), z) != 0
    }
}

/// Points closer than this to a boundary count as inside.
pub const BOUNDARY_TOLERANCE: f64 = 1e-9;
const WINDING_POLYGON: usize = 4096;

fn winding_number(poly: &[Vec2], z: Vec2) -> i32 {
    let mut w = 0;
    for i in 0..poly.len() {
        let a = poly[i];
        let b = poly[(i + 1) % poly.len()];
        let side = (b - a).cross(z - a);
        if a.y <= z.y {
            if b.y > z.y && side > 0.0 {
                w += 1;
            }
        } else if b.y <= z.y && side < 0.0 {
            w -= 1;
        }
    }
    w
}

/// Builds a curve of the given family, filling unspecified parameters with
/// the defaults of the reference experiments.
pub fn make_shape(kind: ShapeKind, params: &ShapeParams) -> Result<ParametricCurve> {
    let center = |default: Vec2| params.center.unwrap_or(default);
    let shape = match kind {
        ShapeKind::Circle => Shape::Circle {
            center: center(Vec2::ZERO),
            radius: params.radius.unwrap_or(0.4),
        },
        ShapeKind::Ellipse => Shape::Ellipse {
            center: center(Vec2::ZERO),
            a: params.a.unwrap_or(1.0),
            b: params.b.unwrap_or(0.5),
        },
        ShapeKind::RoundedSquare => Shape::RoundedSquare {
            center: center(Vec2::ZERO),
            scale: params.scale.unwrap_or(0.25),
        },
        ShapeKind::RoundedTriangle => Shape::RoundedTriangle {
            center: center(Vec2::new(-4.0, -3.0)),
            radius: params.radius.unwrap_or(0.8),
            amplitude: params.amplitude.unwrap_or(0.12),
        },
        ShapeKind::Kite => Shape::Kite {
            center: center(Vec2::new(3.0, 4.0)),
            scale: params.scale.unwrap_or(0.5),
        },
    };
    let unused: Vec<&str> = [
        ("radius", params.radius.is_some(), matches!(kind, ShapeKind::Circle | ShapeKind::RoundedTriangle)),
        ("a", params.a.is_some(), kind == ShapeKind::Ellipse),
        ("b", params.b.is_some(), kind == ShapeKind::Ellipse),
        ("scale", params.scale.is_some(), matches!(kind, ShapeKind::RoundedSquare | ShapeKind::Kite)),
        ("amplitude", params.amplitude.is_some(), kind == ShapeKind::RoundedTriangle),
    ]
    .into_iter()
    .filter(|&(_, given, used)| given && !used)
    .map(|(name, _, _)| name)
    .collect();
    if !unused.is_empty() {
        return Err(Error::Shape(format!(
            "{kind}: parameters {unused:?} do not apply to this shape"
        )));
    }
    ParametricCurve::new(shape)
}

/// Outward unit normal of `curve` at `t`.
pub fn outward_normal(curve: &ParametricCurve, t: f64) -> Vec2 {
    curve.normal(t)
}

/// A union of pairwise disjoint obstacles.
#[derive(Clone, Debug, PartialEq)]
pub struct ObstacleScene {
    curves: Vec<ParametricCurve>,
}

impl ObstacleScene {
    pub fn new(curves: Vec<ParametricCurve>) -> Result<Self> {
        if curves.is_empty() {
            return Err(Error::Scene("a scene needs at least one curve".into()));
        }
        let polys: Vec<Vec<Vec2>> = curves.iter().map(|c| c.polygon(512)).collect();
        for i in 0..curves.len() {
            for j in i + 1..curves.len() {
                let min = polys[i]
                    .iter()
                    .flat_map(|a| polys[j].iter().map(move |b| (*a - *b).norm()))
                    .fold(f64::INFINITY, f64::min);
                let nested = curves[i].contains(polys[j][0]) || curves[j].contains(polys[i][0]);
                let spacing = curves[i]
                    .bounding_radius()
                    .max(curves[j].bounding_radius())
                    * 2.0
                    * PI
                    / 512.0;
                if nested || min <= spacing {
                    return Err(Error::Scene(format!(
                        "curves {i} ({}) and {j} ({}) overlap or touch (sampled distance {min:.3e})",
                        curves[i].label(),
                        curves[j].label()
                    )));
                }
            }
        }
        Ok(Self { curves })
    }

    pub fn single(curve: ParametricCurve) -> Self {
        Self {
            curves: vec![curve],
        }
    }

    pub fn curves(&self) -> &[ParametricCurve] {
        &self.curves
    }

    pub fn len(&self) -> usize {
        self.curves.len()
    }

    pub fn is_empty(&self) -> bool {
        self.curves.is_empty()
    }

    pub fn translated(&self, shift: Vec2) -> ObstacleScene {
        Self {
            curves: self.curves.iter().map(|c| c.translated(shift)).collect(),
        }
    }

    /// True iff `z` lies in the closure of some obstacle.
    pub fn contains(&self, z: Vec2) -> bool {
        self.curves.iter().any(|c| c.contains(z))
    }
}

/// Membership test against the closure of the scene.
pub fn contains(scene: &ObstacleScene, z: Vec2) -> bool {
    scene.contains(z)
}

/// Cached node geometry of one curve: `2M̃` equispaced parameters.
#[derive(Clone, Debug)]
pub struct CurveNodes {
    pub t: Vec<f64>,
    pub x: Vec<Vec2>,
    pub dx: Vec<Vec2>,
    pub normal: Vec<Vec2>,
    pub speed: Vec<f64>,
}

impl CurveNodes {
    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }
}

/// Node layout of a scene for Nyström discretization.
#[derive(Clone, Debug)]
pub struct QuadratureLayout {
    m_half: usize,
    curves: Vec<CurveNodes>,
    offsets: Vec<usize>,
}

impl QuadratureLayout {
    /// Half node count `M̃`; each curve carries `2M̃` nodes.
    pub fn m_half(&self) -> usize {
        self.m_half
    }

    pub fn curves(&self) -> &[CurveNodes] {
        &self.curves
    }

    /// Index of the first node of curve `c` in the global node numbering.
    pub fn offset(&self, c: usize) -> usize {
        self.offsets[c]
    }

    pub fn total_nodes(&self) -> usize {
        self.curves.iter().map(CurveNodes::len).sum()
    }

    /// Trapezoid arc-length weight `(π/M̃)|x′(t_j)|` for every node, in
    /// global order.
    pub fn arc_weights(&self) -> Vec<f64> {
        let w = PI / self.m_half as f64;
        self.curves
            .iter()
            .flat_map(|c| c.speed.iter().map(move |s| w * s))
            .collect()
    }
}

/// Caches `2M̃` nodes `t_j = jπ/M̃` per curve.
pub fn quadrature_layout(scene: &ObstacleScene, m_half: usize) -> Result<QuadratureLayout> {
    if m_half < 2 {
        return Err(Error::domain(
            "quadrature_layout",
            format!("half node count must be at least 2, got {m_half}"),
        ));
    }
    let mut offsets = Vec::with_capacity(scene.len());
    let mut next = 0;
    let curves = scene
        .curves()
        .iter()
        .map(|c| {
            offsets.push(next);
            next += 2 * m_half;
            let t: Vec<f64> = (0..2 * m_half)
                .map(|j| j as f64 * PI / m_half as f64)
                .collect();
            let dx: Vec<Vec2> = t.iter().map(|&s| c.d1(s)).collect();
            CurveNodes {
                x: t.iter().map(|&s| c.position(s)).collect(),
                normal: dx
                    .iter()
                    .map(|d| (1.0 / d.norm()) * Vec2::new(d.y, -d.x))
                    .collect(),
                speed: dx.iter().map(|d| d.norm()).collect(),
                dx,
                t,
            }
        })
        .collect();
    Ok(QuadratureLayout {
        m_half,
        curves,
        offsets,
    })
}
