//! The triangle `T = {0 <= theta2 <= theta1 <= 2 pi}` of angle pairs, the
//! unfolded trace `T -> Delta` and the wall segments pulled back from tangent lines.
//!
//! Exact coordinates are rational multiples of `pi` stored as [`Q`].

use std::f64::consts::{PI, TAU};

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::isometry::{boundary_band, deltoid_f, double_eigenvalue_of_trace};
use crate::linalg::{arg_pos, cubic_roots, wrap};
use crate::{Error, Result, C64};

/// Rational multiple of `pi`.
pub type Q = Ratio<i64>;

pub fn q(n: i64, d: i64) -> Q {
    Ratio::new(n, d)
}

/// Angle pair in radians.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrianglePoint {
    pub theta1: f64,
    pub theta2: f64,
}

impl TrianglePoint {
    pub fn new(theta1: f64, theta2: f64) -> Self {
        TrianglePoint { theta1, theta2 }
    }

    pub fn in_triangle(&self, tol: f64) -> bool {
        self.theta2 >= -tol && self.theta2 <= self.theta1 + tol && self.theta1 <= TAU + tol
    }
}

/// Exact point of `T` in units of `pi`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct QPoint {
    pub x: Q,
    pub y: Q,
}

impl QPoint {
    pub fn new(x: Q, y: Q) -> Self {
        QPoint { x, y }
    }

    pub fn to_radians(&self) -> TrianglePoint {
        TrianglePoint::new(qf(self.x) * PI, qf(self.y) * PI)
    }

    pub fn in_triangle(&self) -> bool {
        let z = Q::from_integer(0);
        self.y >= z && self.y <= self.x && self.x <= Q::from_integer(2)
    }
}

pub(crate) fn qf(r: Q) -> f64 {
    *r.numer() as f64 / *r.denom() as f64
}

/// Slope of a wall segment in the `(theta1, theta2)` chart.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Slope {
    #[serde(rename = "-1")]
    MinusOne,
    #[serde(rename = "1/2")]
    Half,
    #[serde(rename = "2")]
    Two,
}

/// Piece of the preimage of the tangent line `l_{w^label e^{i pi a}}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WallSegment {
    pub p: QPoint,
    pub q: QPoint,
    pub slope: Slope,
    pub label: usize,
}

pub fn unfolded_trace(p: TrianglePoint) -> Result<C64> {
    if !p.in_triangle(1e-12) {
        return Err(Error::OutOfTriangle);
    }
    Ok(unfolded_trace_unchecked(p.theta1, p.theta2))
}

pub(crate) fn unfolded_trace_unchecked(t1: f64, t2: f64) -> C64 {
    let e = |x: f64| C64::from_polar(1.0, x);
    e((2.0 * t1 - t2) / 3.0) + e((2.0 * t2 - t1) / 3.0) + e(-(t1 + t2) / 3.0)
}

/// The point of `T` (sides not identified) whose unfolded trace is `tau`.
pub fn unfolded_inverse(tau: C64) -> Result<TrianglePoint> {
    let f = deltoid_f(tau);
    if f > boundary_band(tau) {
        return Err(Error::OutsideDeltoid);
    }
    let w = crate::omega_powers();
    if (tau - 3.0).norm() < 1e-12 {
        return Ok(TrianglePoint::new(0.0, 0.0));
    }
    if (tau - 3.0 * w[2]).norm() < 1e-12 {
        return Ok(TrianglePoint::new(TAU, 0.0));
    }
    if (tau - 3.0 * w[1]).norm() < 1e-12 {
        return Ok(TrianglePoint::new(TAU, TAU));
    }
    let roots = cubic_roots(-tau, tau.conj(), C64::new(-1.0, 0.0));
    let phis: Vec<f64> = roots.iter().map(|z| z.arg()).collect();
    let perms = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    let mut best: Option<(f64, TrianglePoint)> = None;
    for pm in perms {
        let base = [phis[pm[0]], phis[pm[1]], phis[pm[2]]];
        let s = base.iter().sum::<f64>();
        let m = (s / TAU).round();
        for shift in 0..3 {
            let mut v = base;
            v[shift] -= m * TAU;
            let (t1, t2) = (v[0] - v[2], v[1] - v[2]);
            let viol = (-t2).max(t2 - t1).max(t1 - TAU).max(0.0);
            if best.as_ref().map_or(true, |b| viol < b.0) {
                best = Some((viol, TrianglePoint::new(t1, t2)));
            }
        }
    }
    let (_, p) = best.expect("six permutations tried");
    let t2 = p.theta2.max(0.0);
    let t1 = p.theta1.min(TAU).max(t2);
    let general = polish(tau, TrianglePoint::new(t1, t2));
    if f.abs() <= 1e-9 * (1.0 + tau.norm().powi(4)) {
        let side = on_side(tau);
        let res = |p: TrianglePoint| (unfolded_trace_unchecked(p.theta1, p.theta2) - tau).norm();
        if res(side) <= res(general).max(1e-12 * (1.0 + tau.norm())) {
            return Ok(side);
        }
    }
    Ok(general)
}

/// Closed-form preimage of a boundary trace.
fn on_side(tau: C64) -> TrianglePoint {
    let phi = arg_pos(double_eigenvalue_of_trace(tau));
    if phi <= TAU / 3.0 {
        let th = 3.0 * phi;
        TrianglePoint::new(th, th)
    } else if phi >= 2.0 * TAU / 3.0 {
        TrianglePoint::new(3.0 * (TAU - phi), 0.0)
    } else {
        TrianglePoint::new(TAU, 2.0 * TAU - 3.0 * phi)
    }
}

/// Newton steps on the unfolded trace, kept only while they reduce the residual.
fn polish(tau: C64, mut p: TrianglePoint) -> TrianglePoint {
    for _ in 0..3 {
        let r = unfolded_trace_unchecked(p.theta1, p.theta2) - tau;
        if r.norm() < 1e-15 {
            break;
        }
        let h = 1e-7;
        let d1 = (unfolded_trace_unchecked(p.theta1 + h, p.theta2)
            - unfolded_trace_unchecked(p.theta1 - h, p.theta2))
            / (2.0 * h);
        let d2 = (unfolded_trace_unchecked(p.theta1, p.theta2 + h)
            - unfolded_trace_unchecked(p.theta1, p.theta2 - h))
            / (2.0 * h);
        let det = d1.re * d2.im - d1.im * d2.re;
        if det.abs() < 1e-3 {
            break;
        }
        let dx = (r.re * d2.im - r.im * d2.re) / det;
        let dy = (d1.re * r.im - d1.im * r.re) / det;
        let cand = TrianglePoint::new(p.theta1 - dx, p.theta2 - dy);
        let rn = unfolded_trace_unchecked(cand.theta1, cand.theta2) - tau;
        if rn.norm() < r.norm() && cand.in_triangle(0.0) {
            p = cand;
        } else {
            break;
        }
    }
    p
}

/// Canonical representative in `T` of the unordered pair `{x, y}` mod `2 pi`,
/// preferring `(theta, 0)` over `(2 pi, theta)`.
pub fn canonicalize(x: f64, y: f64) -> TrianglePoint {
    let snap = |v: f64| {
        let w = wrap(v);
        if TAU - w < 1e-12 {
            0.0
        } else {
            w
        }
    };
    let (a, b) = (snap(x), snap(y));
    if a >= b {
        TrianglePoint::new(a, b)
    } else {
        TrianglePoint::new(b, a)
    }
}

/// Exact version of [`canonicalize`] in units of `pi`.
pub fn canonicalize_q(x: Q, y: Q) -> QPoint {
    let two = Q::from_integer(2);
    let red = |v: Q| {
        let mut r = v % two;
        if r < Q::from_integer(0) {
            r += two;
        }
        r
    };
    let (a, b) = (red(x), red(y));
    if a >= b {
        QPoint::new(a, b)
    } else {
        QPoint::new(b, a)
    }
}

/// The two segments of the preimage of `l_{e^{i pi a}}`, `a` in `[0, 2)`.
fn chain(a: Q, label: usize) -> Result<Vec<WallSegment>> {
    let z = Q::from_integer(0);
    let one = Q::from_integer(1);
    let two = Q::from_integer(2);
    let three = Q::from_integer(3);
    let h = q(3, 2) * a;
    let p = |x: Q, y: Q| QPoint::new(x, y);
    let seg = |a: QPoint, b: QPoint, slope| WallSegment {
        p: a,
        q: b,
        slope,
        label,
    };
    if a == z || a == q(2, 3) || a == q(4, 3) {
        return Err(Error::DegenerateInput(format!(
            "wall label angle {a} pi is a cube root of unity (median case)"
        )));
    }
    Ok(if a < q(2, 3) {
        vec![
            seg(p(h, z), p(three * a, three * a), Slope::Two),
            seg(p(three * a, three * a), p(two, one + h), Slope::Half),
        ]
    } else if a < q(4, 3) {
        vec![
            seg(p(three - h, three - h), p(two, Q::from_integer(4) - three * a), Slope::MinusOne),
            seg(p(two, Q::from_integer(4) - three * a), p(h, z), Slope::Two),
        ]
    } else {
        vec![
            seg(p(two, h - two), p(Q::from_integer(6) - three * a, z), Slope::Half),
            seg(p(Q::from_integer(6) - three * a, z), p(three - h, three - h), Slope::MinusOne),
        ]
    })
}

/// Walls pulled back from `l_b`, `l_{wb}`, `l_{w^2 b}` for `b = e^{i pi a}`.
///
/// Callers wanting the chamber walls of a parameter `alpha = e^{i pi a}` pass `3a`.
pub fn walls(a: Q) -> Result<Vec<WallSegment>> {
    let two = Q::from_integer(2);
    let mut base = a % two;
    if base < Q::from_integer(0) {
        base += two;
    }
    let mut out = Vec::with_capacity(6);
    for j in 0..3usize {
        let mut b = base + q(2 * j as i64, 3);
        if b >= two {
            b -= two;
        }
        out.extend(chain(b, j)?);
    }
    Ok(out)
}

/// Unit label `w^j e^{i pi a}` of a wall computed from `walls(a)`.
pub fn wall_label(a: Q, j: usize) -> C64 {
    C64::from_polar(1.0, qf(a) * PI + j as f64 * TAU / 3.0)
}
