//! Tangent lines to the deltoid and traces of products of two complex reflections.

use crate::isometry::{boundary_band, deltoid_f, double_eigenvalue_of_trace, Parameter};
use crate::linalg::{c, cubic_roots};
use crate::{Result, C64};

/// Trace of `R_{a2}^{p2} R_{a1}^{p1}` when `tance(p1, p2) = t`.
pub fn tau_param(a1: C64, a2: C64, t: f64) -> C64 {
    a1 * a2 + a1.powi(-2) * a2 + a1 * a2.powi(-2) + (a1.powi(-2) - a1) * (a2.powi(-2) - a2) * t
}

/// The real `t` whose `tau_param` is closest to `tau`.
pub fn t_on_line(a1: C64, a2: C64, tau: C64) -> f64 {
    let base = tau_param(a1, a2, 0.0);
    let k = (a1.powi(-2) - a1) * (a2.powi(-2) - a2);
    ((tau - base) * k.conj()).re / k.norm_sqr()
}

/// The line `l_alpha` of traces having `alpha` as an eigenvalue.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TangentLine {
    pub alpha: C64,
    pub tangency: C64,
}

impl TangentLine {
    pub fn new(alpha: C64) -> Self {
        let alpha = alpha / alpha.norm();
        TangentLine {
            alpha,
            tangency: 2.0 * alpha + alpha.powi(-2),
        }
    }

    /// Unit direction, a real multiple of `alpha^{-1/2}`.
    pub fn direction(&self) -> C64 {
        C64::from_polar(1.0, -self.alpha.arg() / 2.0)
    }

    pub fn distance(&self, tau: C64) -> f64 {
        ((tau - self.tangency) * self.direction().conj()).im.abs()
    }

    pub fn contains(&self, tau: C64) -> bool {
        self.distance(tau) <= LINE_TOL * (1.0 + tau.norm())
    }

    /// Intersection with another tangent line, if not parallel.
    pub fn intersect(&self, other: &TangentLine) -> Option<C64> {
        let d1 = self.direction();
        let d2 = other.direction();
        let den = (d2.conj() * d1).im;
        if den.abs() < 1e-14 {
            return None;
        }
        let s = (d2.conj() * (other.tangency - self.tangency)).im;
        Some(self.tangency + d1 * (s / den))
    }
}

/// Distance band used for line membership.
pub const LINE_TOL: f64 = 1e-8;

pub fn line_contains(tau: C64, alpha: C64) -> bool {
    TangentLine::new(alpha).contains(tau)
}

/// Labels of the tangent lines through `tau`: unit roots of
/// `x^3 - tau x^2 + conj(tau) x - 1`.
pub fn lines_through(tau: C64) -> Vec<C64> {
    let f = deltoid_f(tau);
    for w in crate::omega_powers() {
        if (tau - 3.0 * w).norm() <= 1e-9 {
            return vec![w];
        }
    }
    if f.abs() <= boundary_band(tau) {
        let l = double_eigenvalue_of_trace(tau);
        return vec![l, l.powi(-2)];
    }
    let r = cubic_roots(-tau, tau.conj(), c(-1.0, 0.0));
    if f < 0.0 {
        r.iter().map(|z| z / z.norm()).collect()
    } else {
        let best = r
            .iter()
            .min_by(|a, b| {
                (a.norm() - 1.0)
                    .abs()
                    .partial_cmp(&(b.norm() - 1.0).abs())
                    .unwrap()
            })
            .unwrap();
        vec![best / best.norm()]
    }
}

/// `(tau - 3) / (alpha^{-2} - alpha)^3`.
pub fn kappa(alpha: &Parameter, tau: C64) -> C64 {
    let a = alpha.value();
    (tau - 3.0) / (a.powi(-2) - a).powi(3)
}

/// `Im(alpha / (alpha^{-2} - alpha))`.
pub fn chi(alpha: C64) -> f64 {
    (alpha / (alpha.powi(-2) - alpha)).im
}

/// Endpoints `t-` and `t+` of the parameter range reaching the deltoid.
pub fn t_plus_minus(a1: C64, a2: C64) -> (f64, f64) {
    let x1 = chi(a1);
    let x2 = chi(a2);
    let r = ((1.0 + 4.0 * x1 * x1) * (1.0 + 4.0 * x2 * x2)).sqrt();
    (
        (1.0 + 4.0 * x1 * x2 - r) / 2.0,
        (1.0 + 4.0 * x1 * x2 + r) / 2.0,
    )
}

/// Traces at `t-`, `0`, `1` and `t+`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryTraces {
    pub a: C64,
    pub b: C64,
    pub c: C64,
    pub d: C64,
}

/// Closed forms of the traces at `t-, 0, 1, t+` for angles `a1, a2` of `alpha1, alpha2`.
pub fn boundary_traces(a1: f64, a2: f64) -> Result<BoundaryTraces> {
    let s = a1 + a2;
    let e = |x: f64| C64::from_polar(1.0, x);
    Ok(BoundaryTraces {
        a: 2.0 * e(-s / 2.0) + e(s),
        b: e(s) + e(-2.0 * a1 + a2) + e(a1 - 2.0 * a2),
        c: 2.0 * e(s) + e(-2.0 * s),
        d: -2.0 * e(-s / 2.0) + e(s),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn tau_examples() {
        let i = c(0.0, 1.0);
        let t = tau_param(i, i, 1.0);
        assert!((t - c(-1.0, 0.0)).norm() < 1e-14);
        assert!(deltoid_f(t).abs() < 1e-12);
        let a = C64::from_polar(1.0, 0.7);
        assert!((tau_param(a, a, 0.0) - (a * a + 2.0 / a)).norm() < 1e-14);
        let b = C64::from_polar(1.0, 1.9);
        let k = (a.powi(-2) - a) * (b.powi(-2) - b);
        let d = tau_param(a, b, 2.5) - tau_param(a, b, 0.0);
        assert!((d - k * 2.5).norm() < 1e-13);
    }

    #[test]
    fn membership() {
        let a = C64::from_polar(1.0, 0.9);
        assert!(line_contains(2.0 * a + a.powi(-2), a));
        // the lines through 0 are labeled by the cube roots of unity
        let mut hits = 0;
        for k in 0..3600 {
            let al = C64::from_polar(1.0, k as f64 * PI / 1800.0);
            if line_contains(c(0.0, 0.0), al) {
                hits += 1;
                assert!((al.powi(3) - 1.0).norm() < 1e-6);
            }
        }
        assert_eq!(hits, 3);
        assert!(!line_contains(c(0.0, 0.0), C64::from_polar(1.0, PI / 3.0)));
    }

    #[test]
    fn lines_through_examples() {
        let l = lines_through(c(0.0, 0.0));
        assert_eq!(l.len(), 3);
        for z in &l {
            assert!((z.powi(3) - 1.0).norm() < 1e-12);
        }
        assert_eq!(lines_through(c(3.0, 0.0)), vec![c(1.0, 0.0)]);
        let a = C64::from_polar(1.0, PI / 5.0);
        let l = lines_through(2.0 * a + a.powi(-2));
        assert_eq!(l.len(), 2);
        assert!(l.iter().any(|z| (z - a).norm() < 1e-7));
        assert!(l.iter().any(|z| (z - a.powi(-2)).norm() < 1e-7));
        assert_eq!(lines_through(c(4.0, 0.0)).len(), 1);
    }

    #[test]
    fn kappa_examples() {
        let al = Parameter::from_angle(0.8).unwrap();
        assert_eq!(kappa(&al, c(3.0, 0.0)), c(0.0, 0.0));
        let a = al.value();
        for t in [-3.0, -0.2, 0.4, 5.0] {
            let k = kappa(&al, tau_param(a * a, a, t));
            assert!((2.0 * k.re + 1.0).abs() < 1e-12);
        }
        // e^{i pi/3} cubes to -1, and 0 does not lie on l_{-1}
        let al = Parameter::from_angle(PI / 3.0).unwrap();
        let k = kappa(&al, c(0.0, 0.0));
        assert!((k - c(-3.0 / 8.0, 0.0)).norm() < 1e-12);
        assert!((2.0 * k.re + 1.0 - 0.25).abs() < 1e-12);
        assert!(!line_contains(c(0.0, 0.0), c(-1.0, 0.0)));
    }

    #[test]
    fn endpoints() {
        let a = C64::from_polar(1.0, 1.1);
        let (tm, tp) = t_plus_minus(a, a);
        assert!(tm.abs() < 1e-12 && tp >= 1.0);
        assert!((chi(c(0.0, 1.0)) + 0.5).abs() < 1e-15);
        let b = C64::from_polar(1.0, 0.3);
        let (tm, tp) = t_plus_minus(a, b);
        assert!(tm <= 0.0 && tp >= 1.0);
        assert!(deltoid_f(tau_param(a, b, tp)).abs() < 1e-8);
        assert!(deltoid_f(tau_param(a, b, tm)).abs() < 1e-8);
    }

    #[test]
    fn boundary_trace_values() {
        for (x, y) in [(0.3, 1.1), (0.5, 0.5), (0.2, 1.9), (1.0, 1.5)] {
            let (a1, a2) = (C64::from_polar(1.0, x), C64::from_polar(1.0, y));
            let bt = boundary_traces(x, y).unwrap();
            let (tm, tp) = t_plus_minus(a1, a2);
            assert!((bt.a - tau_param(a1, a2, tm)).norm() < 1e-9, "A {x} {y}");
            assert!((bt.b - tau_param(a1, a2, 0.0)).norm() < 1e-9);
            assert!((bt.c - tau_param(a1, a2, 1.0)).norm() < 1e-9);
            assert!((bt.d - tau_param(a1, a2, tp)).norm() < 1e-9, "D {x} {y}");
            assert!((bt.c - TangentLine::new(a1 * a2).tangency).norm() < 1e-12);
            assert!(deltoid_f(bt.d).abs() < 1e-9);
        }
        let bt = boundary_traces(0.5, 0.5).unwrap();
        assert!((bt.a - bt.b).norm() < 1e-12);
    }
}
