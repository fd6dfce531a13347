//! The Hermitian form `<x, y> = x1 conj(y1) + x2 conj(y2) - x3 conj(y3)`,
//! projective points, tance and complex lines.

use nalgebra::Matrix3;
use serde::{Deserialize, Serialize};

use crate::linalg::{cross, max_abs};
use crate::{Error, Mat3, Result, Vec3, C64};

/// Relative band inside which a point counts as isotropic.
pub const ISOTROPY_TOL: f64 = 1e-9;

/// The form matrix `diag(1, 1, -1)`.
pub fn form_matrix() -> Mat3 {
    Matrix3::from_diagonal(&Vec3::new(
        C64::new(1.0, 0.0),
        C64::new(1.0, 0.0),
        C64::new(-1.0, 0.0),
    ))
}

/// Form evaluated on raw vectors.
pub fn form(x: &Vec3, y: &Vec3) -> C64 {
    x[0] * y[0].conj() + x[1] * y[1].conj() - x[2] * y[2].conj()
}

/// Requested signature of a nonisotropic point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sign {
    Pos,
    Neg,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Pos => 1.0,
            Sign::Neg => -1.0,
        }
    }

    pub fn flip(self) -> Sign {
        match self {
            Sign::Pos => Sign::Neg,
            Sign::Neg => Sign::Pos,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Sign::Pos => '+',
            Sign::Neg => '-',
        }
    }
}

/// Point of `P(C^3)` with its signature tag (`-1`, `0` or `+1`).
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectivePoint {
    pub coords: Vec3,
    pub sig: i8,
}

impl ProjectivePoint {
    pub fn new(coords: Vec3) -> Result<Self> {
        let m = max_abs(&coords);
        if m == 0.0 || !m.is_finite() {
            return Err(Error::ZeroVector);
        }
        let n = form(&coords, &coords).re;
        let sig = if n.abs() <= ISOTROPY_TOL * m * m {
            0
        } else if n > 0.0 {
            1
        } else {
            -1
        };
        Ok(ProjectivePoint { coords, sig })
    }

    pub fn from_reals(x: [f64; 3]) -> Result<Self> {
        Self::new(Vec3::new(x[0].into(), x[1].into(), x[2].into()))
    }

    pub fn basis(k: usize) -> Self {
        let mut v = Vec3::zeros();
        v[k] = C64::new(1.0, 0.0);
        Self::new(v).expect("basis vector")
    }

    pub fn sign(&self) -> Option<Sign> {
        match self.sig {
            1 => Some(Sign::Pos),
            -1 => Some(Sign::Neg),
            _ => None,
        }
    }

    pub fn norm(&self) -> f64 {
        form(&self.coords, &self.coords).re
    }

    /// Representative rescaled so that the largest coordinate is real positive and 1.
    pub fn normalized(&self) -> Vec3 {
        let mut k = 0;
        for i in 1..3 {
            if self.coords[i].norm() > self.coords[k].norm() {
                k = i;
            }
        }
        self.coords / self.coords[k]
    }

    /// Projective equality within `tol`.
    pub fn same_point(&self, other: &ProjectivePoint, tol: f64) -> bool {
        let a = self.coords.unscale(crate::linalg::vnorm(&self.coords));
        let b = other.coords.unscale(crate::linalg::vnorm(&other.coords));
        crate::linalg::vnorm(&cross(&a, &b)) <= tol
    }
}

/// `<x, y>` on the stored representatives.
pub fn herm(x: &ProjectivePoint, y: &ProjectivePoint) -> C64 {
    form(&x.coords, &y.coords)
}

/// `<p1,p2><p2,p1> / (<p1,p1><p2,p2>)`.
pub fn tance(p1: &ProjectivePoint, p2: &ProjectivePoint) -> Result<f64> {
    if p1.sig == 0 || p2.sig == 0 {
        return Err(Error::IsotropicPoint);
    }
    let g = herm(p1, p2);
    Ok(g.norm_sqr() / (p1.norm() * p2.norm()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LineKind {
    Hyperbolic,
    Spherical,
    Euclidean,
}

/// Complex line `P(c^perp)` given by its polar point `c`.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexLine {
    pub polar: ProjectivePoint,
    pub kind: LineKind,
}

impl ComplexLine {
    pub fn from_polar(polar: ProjectivePoint) -> Self {
        let kind = match polar.sig {
            1 => LineKind::Hyperbolic,
            -1 => LineKind::Spherical,
            _ => LineKind::Euclidean,
        };
        ComplexLine { polar, kind }
    }

    pub fn contains(&self, p: &ProjectivePoint) -> bool {
        let c = &self.polar.coords;
        let s = crate::linalg::vnorm(c) * crate::linalg::vnorm(&p.coords);
        form(&p.coords, c).norm() <= 1e-9 * s
    }
}

/// Kind predicted from the tance thresholds.
pub fn kind_from_tance(t: f64, tol: f64) -> LineKind {
    if (t - 1.0).abs() <= tol {
        LineKind::Euclidean
    } else if t > 1.0 || t < 0.0 {
        LineKind::Hyperbolic
    } else {
        LineKind::Spherical
    }
}

/// Point orthogonal to both `x` and `y`.
pub fn polar_of(x: &Vec3, y: &Vec3) -> Vec3 {
    let w = cross(x, y);
    Vec3::new(w[0].conj(), w[1].conj(), -w[2].conj())
}

pub fn line_through(p1: &ProjectivePoint, p2: &ProjectivePoint) -> Result<ComplexLine> {
    if p1.same_point(p2, 1e-12) {
        return Err(Error::CoincidentPoints);
    }
    let c = polar_of(&p1.coords, &p2.coords);
    Ok(ComplexLine::from_polar(ProjectivePoint::new(c)?))
}

/// The point of `line` orthogonal to `p`.
pub fn orthogonal_in_line(line: &ComplexLine, p: &ProjectivePoint) -> Result<ProjectivePoint> {
    if !line.contains(p) {
        return Err(Error::PointNotOnLine);
    }
    let q = ProjectivePoint::new(polar_of(&p.coords, &line.polar.coords))
        .map_err(|_| Error::DegenerateOrthogonal)?;
    if q.sig == 0 {
        return Err(Error::DegenerateOrthogonal);
    }
    Ok(q)
}

/// Two points with signatures `(s1, s2)` and tance `t`.
///
/// Feasible data: `(+,+)` for `t >= 0`, `(-,-)` for `t > 1`, mixed signs for `t <= 0`.
pub fn pair_with_tance(t: f64, s1: Sign, s2: Sign) -> Result<(ProjectivePoint, ProjectivePoint)> {
    const EPS: f64 = 1e-12;
    let r = |x: f64| C64::new(x.max(0.0).sqrt(), 0.0);
    let z = C64::new(0.0, 0.0);
    let v = |a: C64, b: C64, c: C64| ProjectivePoint::new(Vec3::new(a, b, c));
    let one = C64::new(1.0, 0.0);
    match (s1, s2) {
        (Sign::Pos, Sign::Pos) => {
            if t < -EPS {
                return Err(Error::Unrealizable(format!("(+,+) needs t >= 0, got {t}")));
            }
            let p1 = v(one, z, z)?;
            let p2 = if (t - 1.0).abs() <= EPS {
                v(one, one, one)?
            } else if t < 1.0 {
                v(r(t), r(1.0 - t), z)?
            } else {
                v(r(t), z, r(t - 1.0))?
            };
            Ok((p1, p2))
        }
        (Sign::Neg, Sign::Neg) => {
            if t <= 1.0 + EPS {
                return Err(Error::Unrealizable(format!("(-,-) needs t > 1, got {t}")));
            }
            Ok((v(z, z, one)?, v(r(t - 1.0), z, r(t))?))
        }
        (Sign::Pos, Sign::Neg) => {
            if t > EPS {
                return Err(Error::Unrealizable(format!("(+,-) needs t <= 0, got {t}")));
            }
            Ok((v(one, z, z)?, v(r(-t), z, r(1.0 - t))?))
        }
        (Sign::Neg, Sign::Pos) => {
            if t > EPS {
                return Err(Error::Unrealizable(format!("(-,+) needs t <= 0, got {t}")));
            }
            Ok((v(z, z, one)?, v(r(1.0 - t), z, r(-t))?))
        }
    }
}

/// Three points with `tance(p1,p2) = t1`, `tance(p2,p3) = t2` and normalized
/// triple product `t + i im`.
///
/// The Gram entries are `g12 = sqrt(s1 s2 t1)`, `g23 = sqrt(s2 s3 t2)` and `g13`
/// is fixed by the triple product. When `g12 g23 = 0` the triple product must
/// vanish and `g13` is set to zero.
pub fn triple_from_gram(
    t1: f64,
    t2: f64,
    t: f64,
    s: [Sign; 3],
    im: f64,
) -> Result<[ProjectivePoint; 3]> {
    let sv = [s[0].value(), s[1].value(), s[2].value()];
    let a12 = sv[0] * sv[1] * t1;
    let a23 = sv[1] * sv[2] * t2;
    let tol = 1e-12 * (1.0 + t1.abs() + t2.abs());
    if a12 < -tol || a23 < -tol {
        return Err(Error::Unrealizable(
            "off-diagonal moduli would be imaginary".into(),
        ));
    }
    let g12 = a12.max(0.0).sqrt();
    let g23 = a23.max(0.0).sqrt();
    let tt = C64::new(t, im);
    let g31 = if g12 * g23 > 1e-300 {
        tt * (sv[0] * sv[1] * sv[2]) / (g12 * g23)
    } else if tt.norm() <= 1e-12 {
        C64::new(0.0, 0.0)
    } else {
        return Err(Error::Unrealizable(
            "vanishing tance with nonzero triple product".into(),
        ));
    };
    // g[i][j] = <p_i, p_j>
    let mut g = Mat3::zeros();
    for i in 0..3 {
        g[(i, i)] = C64::new(sv[i], 0.0);
    }
    g[(0, 1)] = C64::new(g12, 0.0);
    g[(1, 0)] = C64::new(g12, 0.0);
    g[(1, 2)] = C64::new(g23, 0.0);
    g[(2, 1)] = C64::new(g23, 0.0);
    g[(2, 0)] = g31;
    g[(0, 2)] = g31.conj();
    let cols = factor_gram(&g.transpose())?;
    Ok([
        ProjectivePoint::new(cols.column(0).into_owned())?,
        ProjectivePoint::new(cols.column(1).into_owned())?,
        ProjectivePoint::new(cols.column(2).into_owned())?,
    ])
}

/// Matrix `P` with `P* J P = m` for a Hermitian `m` of signature at most `(2,1)`.
pub(crate) fn factor_gram(m: &Mat3) -> Result<Mat3> {
    let h = (m + m.adjoint()) * C64::new(0.5, 0.0);
    let eig = h.symmetric_eigen();
    let scale = eig.eigenvalues.iter().fold(1.0f64, |a, &b| a.max(b.abs()));
    let tol = 1e-12 * scale;
    let mut pos = Vec::new();
    let mut neg = Vec::new();
    for k in 0..3 {
        let l = eig.eigenvalues[k];
        if l > tol {
            pos.push(k);
        } else if l < -tol {
            neg.push(k);
        }
    }
    if pos.len() > 2 || neg.len() > 1 {
        return Err(Error::Unrealizable(format!(
            "Gram signature ({}, {}) does not embed in (2, 1)",
            pos.len(),
            neg.len()
        )));
    }
    // slot assignment: positive directions to e1, e2; negative to e3
    let mut slot = [usize::MAX; 3];
    let mut free: Vec<usize> = Vec::new();
    let mut next_pos = 0;
    for &k in &pos {
        slot[k] = next_pos;
        next_pos += 1;
    }
    for &k in &neg {
        slot[k] = 2;
    }
    for s in 0..3 {
        if !slot.contains(&s) {
            free.push(s);
        }
    }
    let mut fi = 0;
    for k in 0..3 {
        if slot[k] == usize::MAX {
            slot[k] = free[fi];
            fi += 1;
        }
    }
    // P = X S U^*, where X sends eigen-index k to slot[k]
    let mut xs = Mat3::zeros();
    for k in 0..3 {
        let l = eig.eigenvalues[k];
        let s = if l.abs() > tol { l.abs().sqrt() } else { 0.0 };
        xs[(slot[k], k)] = C64::new(s, 0.0);
    }
    Ok(xs * eig.eigenvectors.adjoint())
}
