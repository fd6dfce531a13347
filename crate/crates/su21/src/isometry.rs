//! Elements of `SU(2,1)`, complex reflections, classification and conjugators.

use std::f64::consts::{PI, TAU};
use std::sync::OnceLock;

use nalgebra::Matrix3;
use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::hermitian::{form, form_matrix, polar_of, ProjectivePoint};
use crate::linalg::{
    arg_pos, c, circ_dist, eigenpair, eigenvalues, frob, null_vector, singular_values, vnorm, widest_column,
};
use crate::unfolded::canonicalize;
use crate::{omega_powers, Error, Mat3, Result, Vec3, C64};

/// Unit complex parameter `alpha = e^{ia}` that is not a cube root of unity.
///
/// When built from a rational multiple of `pi` the exact angle is retained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Parameter {
    value: C64,
    angle: f64,
    frac: Option<Ratio<i64>>,
}

impl Parameter {
    pub fn from_angle(a: f64) -> Result<Self> {
        let angle = crate::linalg::wrap(a);
        for k in 0..3 {
            if circ_dist(angle, k as f64 * TAU / 3.0) <= 1e-9 {
                return Err(Error::InvalidParameter);
            }
        }
        Ok(Parameter {
            value: C64::from_polar(1.0, angle),
            angle,
            frac: None,
        })
    }

    /// `alpha = e^{i pi p/q}`.
    pub fn from_pi_fraction(p: i64, q: i64) -> Result<Self> {
        if q == 0 {
            return Err(Error::InvalidParameter);
        }
        let mut r = Ratio::new(p, q) % Ratio::from_integer(2);
        if r < Ratio::from_integer(0) {
            r += Ratio::from_integer(2);
        }
        if (r * Ratio::from_integer(3)).is_integer() && (r * 3).to_integer() % 2 == 0 {
            return Err(Error::InvalidParameter);
        }
        let mut out = Self::from_angle(*r.numer() as f64 / *r.denom() as f64 * PI)?;
        out.frac = Some(r);
        Ok(out)
    }

    pub fn from_complex(z: C64) -> Result<Self> {
        if (z.norm() - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter);
        }
        Self::from_angle(z.arg())
    }

    pub fn value(&self) -> C64 {
        self.value
    }

    /// Angle in `[0, 2 pi)`.
    pub fn angle(&self) -> f64 {
        self.angle
    }

    /// Exact angle as a multiple of `pi`, when known.
    pub fn pi_fraction(&self) -> Option<Ratio<i64>> {
        self.frac
    }

    pub fn conj(&self) -> Parameter {
        match self.frac {
            Some(r) => Self::from_pi_fraction(-*r.numer(), *r.denom()).expect("valid"),
            None => Self::from_angle(-self.angle).expect("valid"),
        }
    }

    /// `w^k alpha`.
    pub fn rotate(&self, k: usize) -> Parameter {
        match self.frac {
            Some(r) => {
                let s = r + Ratio::new(2 * k as i64, 3);
                Self::from_pi_fraction(*s.numer(), *s.denom()).expect("valid")
            }
            None => Self::from_angle(self.angle + k as f64 * TAU / 3.0).expect("valid"),
        }
    }

    /// `(beta, k)` with `alpha = w^k beta` and `beta` of angle in `(0, 2 pi / 3)`.
    pub fn normalized(&self) -> (Parameter, usize) {
        let k = (self.angle / (TAU / 3.0)).floor() as usize % 3;
        (self.rotate((3 - k) % 3), k)
    }

    pub fn powi(&self, n: i32) -> C64 {
        self.value.powi(n)
    }
}

/// Conjugacy-class kinds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Kind {
    #[serde(rename = "identity")]
    Identity,
    #[serde(rename = "regular-elliptic")]
    RegularElliptic,
    #[serde(rename = "special-elliptic-neg-center")]
    SpecialEllipticNeg,
    #[serde(rename = "special-elliptic-pos-center")]
    SpecialEllipticPos,
    #[serde(rename = "ellipto-parabolic")]
    EllipticoParabolic,
    #[serde(rename = "2-step-unipotent-A")]
    TwoStepA,
    #[serde(rename = "2-step-unipotent-B")]
    TwoStepB,
    #[serde(rename = "3-step-unipotent")]
    ThreeStep,
    #[serde(rename = "loxodromic")]
    Loxodromic,
}

impl Kind {
    pub fn name(self) -> &'static str {
        match self {
            Kind::Identity => "identity",
            Kind::RegularElliptic => "regular-elliptic",
            Kind::SpecialEllipticNeg => "special-elliptic-neg-center",
            Kind::SpecialEllipticPos => "special-elliptic-pos-center",
            Kind::EllipticoParabolic => "ellipto-parabolic",
            Kind::TwoStepA => "2-step-unipotent-A",
            Kind::TwoStepB => "2-step-unipotent-B",
            Kind::ThreeStep => "3-step-unipotent",
            Kind::Loxodromic => "loxodromic",
        }
    }

    pub fn is_elliptic(self) -> bool {
        matches!(
            self,
            Kind::Identity | Kind::RegularElliptic | Kind::SpecialEllipticNeg | Kind::SpecialEllipticPos
        )
    }

    pub fn is_two_step(self) -> bool {
        matches!(self, Kind::TwoStepA | Kind::TwoStepB)
    }

    /// Loxodromic, ellipto-parabolic or 3-step unipotent.
    pub fn is_regular_nonelliptic(self) -> bool {
        matches!(self, Kind::Loxodromic | Kind::EllipticoParabolic | Kind::ThreeStep)
    }
}

/// Canonical descriptor of a `PU(2,1)` conjugacy class.
///
/// `orientation` is the sign of the imaginary translation part for
/// ellipto-parabolic and 2-step unipotent classes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassKey {
    pub kind: Kind,
    pub angle_pair: Option<(f64, f64)>,
    pub trace_rep: Option<(f64, f64)>,
    pub orientation: Option<i8>,
}

impl ClassKey {
    fn bare(kind: Kind) -> Self {
        ClassKey {
            kind,
            angle_pair: None,
            trace_rep: None,
            orientation: None,
        }
    }

    /// Class equality within `tol`.
    pub fn matches(&self, other: &ClassKey, tol: f64) -> bool {
        if self.kind != other.kind || self.orientation != other.orientation {
            return false;
        }
        if let (Some(a), Some(b)) = (self.angle_pair, other.angle_pair) {
            if angle_pair_distance(a, b) > tol {
                return false;
            }
        }
        if let (Some(a), Some(b)) = (self.trace_rep, other.trace_rep) {
            let a = c(a.0, a.1);
            let b = c(b.0, b.1);
            let d = omega_powers()
                .iter()
                .map(|w| (a - w * b).norm())
                .fold(f64::INFINITY, f64::min);
            if d > tol * (1.0 + a.norm()) {
                return false;
            }
        }
        true
    }

    pub fn trace_rep_complex(&self) -> Option<C64> {
        self.trace_rep.map(|(x, y)| c(x, y))
    }
}

/// Distance between unordered angle pairs on the torus.
pub fn angle_pair_distance(a: (f64, f64), b: (f64, f64)) -> f64 {
    let d1 = circ_dist(a.0, b.0) + circ_dist(a.1, b.1);
    let d2 = circ_dist(a.0, b.1) + circ_dist(a.1, b.0);
    d1.min(d2)
}

/// Element of `SU(2,1)` with a lazily computed class key.
#[derive(Debug, Clone)]
pub struct Isometry {
    m: Mat3,
    key: OnceLock<Result<ClassKey>>,
}

impl Isometry {
    /// Validates `m* J m = J` and `det m = 1`.
    pub fn new(m: Mat3) -> Result<Self> {
        let j = form_matrix();
        let scale = frob(&m).max(1.0);
        let dev = frob(&(m.adjoint() * j * m - j));
        if dev > 1e-9 * scale * scale {
            return Err(Error::NotUnitary(format!("|M*JM - J| = {dev:e}")));
        }
        let d = m.determinant();
        if (d - 1.0).norm() > 1e-9 * scale.powi(3) {
            return Err(Error::NotUnitary(format!("det = {d}")));
        }
        Ok(Self::raw(m))
    }

    pub(crate) fn raw(m: Mat3) -> Self {
        Isometry {
            m,
            key: OnceLock::new(),
        }
    }

    pub fn identity() -> Self {
        Self::raw(Mat3::identity())
    }

    pub fn matrix(&self) -> &Mat3 {
        &self.m
    }

    pub fn trace(&self) -> C64 {
        self.m.trace()
    }

    pub fn eigenvalues(&self) -> [C64; 3] {
        eigenvalues(&self.m)
    }

    /// `self * other`.
    pub fn compose(&self, other: &Isometry) -> Isometry {
        Self::raw(self.m * other.m)
    }

    pub fn scaled(&self, delta: C64) -> Isometry {
        Self::raw(self.m * delta)
    }

    pub fn inverse(&self) -> Isometry {
        let j = form_matrix();
        Self::raw(j * self.m.adjoint() * j)
    }

    /// `C self C^{-1}`.
    pub fn conjugated_by(&self, cm: &Isometry) -> Isometry {
        cm.compose(self).compose(&cm.inverse())
    }

    pub fn apply(&self, p: &ProjectivePoint) -> Result<ProjectivePoint> {
        ProjectivePoint::new(self.m * p.coords)
    }

    pub fn classify(&self) -> Result<ClassKey> {
        self.key.get_or_init(|| classify_matrix(&self.m)).clone()
    }

    /// The three lifts `w^k F`.
    pub fn lifts(&self) -> [Isometry; 3] {
        let w = omega_powers();
        [self.scaled(w[0]), self.scaled(w[1]), self.scaled(w[2])]
    }

    /// Minimum over `Omega` of the Frobenius distance to `other`, with the minimizing index.
    pub fn distance_mod_omega(&self, other: &Isometry) -> (f64, usize) {
        let mut best = (f64::INFINITY, 0);
        for (k, w) in omega_powers().iter().enumerate() {
            let d = frob(&(self.m - other.m * *w));
            if d < best.0 {
                best = (d, k);
            }
        }
        best
    }
}

/// `x -> alpha x + (alpha^{-2} - alpha) <x,p>/<p,p> p`.
pub fn special_elliptic(alpha: &Parameter, p: &ProjectivePoint) -> Result<Isometry> {
    special_elliptic_raw(alpha.value(), p)
}

pub(crate) fn special_elliptic_raw(a: C64, p: &ProjectivePoint) -> Result<Isometry> {
    if p.sig == 0 {
        return Err(Error::IsotropicCenter);
    }
    let n = p.norm();
    let k = (a.powi(-2) - a) / n;
    let pj = Vec3::new(p.coords[0].conj(), p.coords[1].conj(), -p.coords[2].conj());
    let m = Mat3::identity() * a + p.coords * pj.transpose() * k;
    Ok(Isometry::raw(m))
}

/// `|z|^4 - 8 Re(z^3) + 18 |z|^2 - 27`.
pub fn deltoid_f(z: C64) -> f64 {
    let n = z.norm_sqr();
    n * n - 8.0 * (z * z * z).re + 18.0 * n - 27.0
}

/// Relative width of the band treated as the deltoid boundary.
pub fn boundary_band(z: C64) -> f64 {
    1e-7 * (1.0 + z.norm().powi(4))
}

fn classify_matrix(m: &Mat3) -> Result<ClassKey> {
    let j = form_matrix();
    let scale = frob(m).max(1.0);
    let dev = frob(&(m.adjoint() * j * m - j));
    if dev > 1e-9 * scale * scale || (m.determinant() - 1.0).norm() > 1e-9 * scale.powi(3) {
        return Err(Error::NotUnitary(format!("form deviation {dev:e}")));
    }
    let tr = m.trace();
    let f = deltoid_f(tr);
    let sv_tol = 1e-6 * scale;

    for (k, d) in omega_powers().iter().enumerate() {
        if (tr - 3.0 * d).norm() <= 1e-8 * scale {
            let n = m * d.conj() - Mat3::identity();
            let s = singular_values(&n);
            let _ = k;
            if s[0] <= sv_tol {
                return Ok(ClassKey {
                    angle_pair: Some((0.0, 0.0)),
                    ..ClassKey::bare(Kind::Identity)
                });
            }
            if s[1] <= sv_tol {
                let (_, o) = two_step_frame(m, *d)?;
                let kind = if o > 0 { Kind::TwoStepA } else { Kind::TwoStepB };
                return Ok(ClassKey {
                    orientation: Some(o),
                    ..ClassKey::bare(kind)
                });
            }
            return Ok(ClassKey::bare(Kind::ThreeStep));
        }
    }

    if f.abs() <= boundary_band(tr) {
        if let Some(key) = classify_boundary(m, tr, sv_tol)? {
            if frame_consistent(m, &key) {
                return Ok(key);
            }
        }
    }
    if f < 0.0 {
        let (_, lam) = elliptic_frame(m)?;
        let pair = canonicalize(arg_pos(lam[0] / lam[2]), arg_pos(lam[1] / lam[2]));
        Ok(ClassKey {
            angle_pair: Some((pair.theta1, pair.theta2)),
            ..ClassKey::bare(Kind::RegularElliptic)
        })
    } else {
        let rep = trace_mod_omega(tr);
        Ok(ClassKey {
            trace_rep: Some((rep.re, rep.im)),
            ..ClassKey::bare(Kind::Loxodromic)
        })
    }
}

/// Representative of `{tr, w tr, w^2 tr}` with argument in `[0, 2 pi / 3)`.
pub fn trace_mod_omega(tr: C64) -> C64 {
    if tr.norm() < 1e-14 {
        return tr;
    }
    let k = (arg_pos(tr) / (TAU / 3.0)).floor() as usize % 3;
    let w = omega_powers();
    let r = tr * w[(3 - k) % 3];
    if arg_pos(r) >= TAU / 3.0 {
        r * w[2]
    } else {
        r
    }
}

/// Repeated eigenvalue of a matrix whose trace lies on the deltoid.
pub fn double_eigenvalue_of_trace(tr: C64) -> C64 {
    // roots of p'(x) = 3x^2 - 2 tr x + conj(tr)
    let a = c(3.0, 0.0);
    let b = -2.0 * tr;
    let cc = tr.conj();
    let disc = (b * b - 4.0 * a * cc).sqrt();
    let r1 = (-b + disc) / (2.0 * a);
    let r2 = (-b - disc) / (2.0 * a);
    let p = |x: C64| ((x - tr) * x + tr.conj()) * x - 1.0;
    let l = if p(r1).norm() <= p(r2).norm() { r1 } else { r2 };
    l / l.norm()
}

fn classify_boundary(m: &Mat3, tr: C64, sv_tol: f64) -> Result<Option<ClassKey>> {
    let lam = double_eigenvalue_of_trace(tr);
    let mu = lam.powi(-2);
    let s = singular_values(&(m - Mat3::identity() * lam));
    if s[1] <= sv_tol {
        let p = null_vector(&(m - Mat3::identity() * mu));
        let n = form(&p, &p).re / vnorm(&p).powi(2);
        if n.abs() < 1e-6 {
            return Err(Error::NumericallyAmbiguous("isotropic center".into()));
        }
        let (kind, pair) = if n < 0.0 {
            (Kind::SpecialEllipticNeg, canonicalize(arg_pos(lam / mu), arg_pos(lam / mu)))
        } else {
            (Kind::SpecialEllipticPos, canonicalize(arg_pos(mu / lam), 0.0))
        };
        return Ok(Some(ClassKey {
            angle_pair: Some((pair.theta1, pair.theta2)),
            ..ClassKey::bare(kind)
        }));
    }
    let v = null_vector(&(m - Mat3::identity() * lam));
    if form(&v, &v).norm() / vnorm(&v).powi(2) > 1e-4 {
        return Ok(None);
    }
    let (_, o) = ellipto_parabolic_frame(m, lam)?;
    let pair = canonicalize(arg_pos(mu / lam), 0.0);
    Ok(Some(ClassKey {
        angle_pair: Some((pair.theta1, pair.theta2)),
        orientation: Some(o),
        ..ClassKey::bare(Kind::EllipticoParabolic)
    }))
}

/// Whether the normal frame of `key` reproduces `m`.
fn frame_consistent(m: &Mat3, key: &ClassKey) -> bool {
    let Ok((b, n)) = normal_frame(m, key) else {
        return false;
    };
    match b.try_inverse() {
        Some(bi) => frob(&(b * n * bi - m)) <= 1e-6 * frob(m).max(1.0),
        None => false,
    }
}

pub fn is_regular(f: &Isometry) -> bool {
    match f.classify() {
        Ok(k) => !matches!(
            k.kind,
            Kind::Identity | Kind::SpecialEllipticNeg | Kind::SpecialEllipticPos | Kind::TwoStepA | Kind::TwoStepB
        ),
        Err(_) => {
            let e = f.eigenvalues();
            (e[0] - e[1]).norm() > 1e-6 && (e[1] - e[2]).norm() > 1e-6 && (e[0] - e[2]).norm() > 1e-6
        }
    }
}

/// Canonical angle pair of an elliptic or ellipto-parabolic isometry.
pub fn angle_pair(f: &Isometry) -> Result<(f64, f64)> {
    let k = f.classify()?;
    match k.kind {
        Kind::Identity
        | Kind::RegularElliptic
        | Kind::SpecialEllipticNeg
        | Kind::SpecialEllipticPos
        | Kind::EllipticoParabolic => Ok(k.angle_pair.expect("elliptic key carries a pair")),
        _ => Err(Error::NotElliptic),
    }
}

/// Rescale `m` (with `m* J m = l J`, `l > 0`) into `SU(2,1)`; returns the lift
/// whose trace argument lies in `[0, 2 pi / 3)` and the index `k` of the
/// factor `w^k` applied after the real cube-root normalization.
pub fn normalize_lift(m: &Mat3) -> Result<(Isometry, usize)> {
    let j = form_matrix();
    let g = m.adjoint() * j * m;
    let l = g[(0, 0)].re;
    if !(l > 0.0) || frob(&(g - j.scale(l))) > 1e-9 * l.max(1.0) * 3.0 {
        return Err(Error::NotFormPreserving);
    }
    let d = m.determinant();
    if d.norm() == 0.0 {
        return Err(Error::NotFormPreserving);
    }
    let base = m / d.powf(1.0 / 3.0);
    let tr = base.trace();
    let w = omega_powers();
    let k = if tr.norm() < 1e-12 {
        0
    } else {
        (0..3)
            .find(|&k| { let a = arg_pos(tr * w[k]); a < TAU / 3.0 - 1e-15 || a > TAU - 1e-12 })
            .unwrap_or(0)
    };
    Ok((Isometry::new(base * w[k])?, k))
}

type Frame = (Mat3, [C64; 3]);

/// Eigen-frame of a diagonalizable `m`: columns normalized, positive ones
/// first (sorted by eigenvalue argument), negative last; Gram `diag(1,1,-1)`.
pub(crate) fn elliptic_frame(m: &Mat3) -> Result<(Mat3, [C64; 3])> {
    let ev = eigenvalues(m);
    let mut pos: Vec<(C64, Vec3)> = Vec::new();
    let mut neg: Vec<(C64, Vec3)> = Vec::new();
    for l0 in ev {
        let (l, v) = eigenpair(m, l0);
        let n = form(&v, &v).re;
        if n > 0.0 {
            pos.push((l, v.unscale(n.sqrt())));
        } else {
            neg.push((l, v.unscale((-n).sqrt())));
        }
    }
    if pos.len() != 2 || neg.len() != 1 {
        return Err(Error::NumericallyAmbiguous(
            "eigenvector signatures inconsistent".into(),
        ));
    }
    pos.sort_by(|a, b| arg_pos(a.0).partial_cmp(&arg_pos(b.0)).unwrap());
    let b = Mat3::from_columns(&[pos[0].1, pos[1].1, neg[0].1]);
    Ok((b, [pos[0].0, pos[1].0, neg[0].0]))
}

pub(crate) fn special_frame(m: &Mat3, lam: C64, neg: bool) -> Result<Frame> {
    let mu = lam.powi(-2);
    let (_, p) = eigenpair(m, mu);
    let np = form(&p, &p).re;
    let proj = |x: Vec3| x - p * (form(&x, &p) / np);
    let e = |k: usize| {
        let mut v = Vec3::zeros();
        v[k] = c(1.0, 0.0);
        v
    };
    if neg {
        let a1 = proj(e(0));
        let a2 = proj(e(1));
        let a = if form(&a1, &a1).re >= form(&a2, &a2).re { a1 } else { a2 };
        let a = a.unscale(form(&a, &a).re.sqrt());
        let b = polar_of(&p, &a);
        let b = b.unscale(form(&b, &b).re.sqrt());
        let p = p.unscale((-np).sqrt());
        Ok((Mat3::from_columns(&[a, b, p]), [lam, lam, mu]))
    } else {
        let b = proj(e(2));
        let b = b.unscale((-form(&b, &b).re).sqrt());
        let a = polar_of(&p, &b);
        let a = a.unscale(form(&a, &a).re.sqrt());
        let p = p.unscale(np.sqrt());
        Ok((Mat3::from_columns(&[p, a, b]), [mu, lam, lam]))
    }
}

/// Isotropic `w` with `<v, w> = 1`, orthogonal to `u` when given.
fn isotropic_partner(v: &Vec3, u: Option<&Vec3>) -> Vec3 {
    let mut best = Vec3::zeros();
    let mut best_val = -1.0;
    for k in 0..3 {
        let mut x = Vec3::zeros();
        x[k] = c(1.0, 0.0);
        if let Some(u) = u {
            x -= u * (form(&x, u) / form(u, u).re);
        }
        let val = form(v, &x).norm() / vnorm(&x).max(1e-300);
        if val > best_val {
            best_val = val;
            best = x;
        }
    }
    let x = best / form(v, &best).conj();
    let h = form(&x, &x).re / 2.0;
    x - v.scale(h)
}

/// Frame `(v, u, w)` with Gram `[[0,0,1],[0,1,0],[1,0,0]]` in which
/// `m/lam` is `[[1,0,+-i],[0,lam^-3,0],[0,0,1]]`; returns the sign.
pub(crate) fn ellipto_parabolic_frame(m: &Mat3, lam: C64) -> Result<(Mat3, i8)> {
    let mu = lam.powi(-2);
    let (_, u) = eigenpair(m, mu);
    let nu = form(&u, &u).re;
    if nu <= 0.0 {
        return Err(Error::NumericallyAmbiguous("ellipto-parabolic axis not positive".into()));
    }
    let u = u.unscale(nu.sqrt());
    let v = null_vector(&(m - Mat3::identity() * lam));
    let w = isotropic_partner(&v, Some(&u));
    let s = form(&(m * w / lam - w), &w);
    let sigma = s.im;
    if sigma.abs() < 1e-12 {
        return Err(Error::NumericallyAmbiguous("vanishing parabolic translation".into()));
    }
    let r = sigma.abs().sqrt();
    let b = Mat3::from_columns(&[v.scale(r), u, w.unscale(r)]);
    Ok((b, if sigma > 0.0 { 1 } else { -1 }))
}

/// Frame for a 2-step unipotent `m = d U`, same layout as the ellipto-parabolic one.
pub(crate) fn two_step_frame(m: &Mat3, d: C64) -> Result<(Mat3, i8)> {
    let um = m * d.conj();
    let n = um - Mat3::identity();
    let v = widest_column(&n);
    let w = isotropic_partner(&v, None);
    let u = polar_of(&v, &w);
    let nu = form(&u, &u).re;
    let u = u.unscale(nu.sqrt());
    let s = form(&(um * w - w), &w);
    let sigma = s.im;
    if sigma.abs() < 1e-14 {
        return Err(Error::NumericallyAmbiguous("vanishing 2-step translation".into()));
    }
    let r = sigma.abs().sqrt();
    let b = Mat3::from_columns(&[v.scale(r), u, w.unscale(r)]);
    Ok((b, if sigma > 0.0 { 1 } else { -1 }))
}

/// Frame in which `m/d` is the Heisenberg translation `[[1,-1,-1/2],[0,1,1],[0,0,1]]`.
pub(crate) fn three_step_frame(m: &Mat3, d: C64) -> Result<Mat3> {
    let um = m * d.conj();
    let n = um - Mat3::identity();
    let v = widest_column(&(n * n));
    let w0 = isotropic_partner(&v, None);
    let u0 = polar_of(&v, &w0);
    let u0 = u0.unscale(form(&u0, &u0).re.sqrt());
    let b0 = Mat3::from_columns(&[v, u0, w0]);
    let inv = b0
        .try_inverse()
        .ok_or_else(|| Error::NumericallyAmbiguous("singular 3-step frame".into()))?;
    let t = inv * um * b0;
    let b = t[(1, 2)];
    let cc = t[(0, 2)];
    let r = b.norm();
    if r < 1e-12 {
        return Err(Error::NumericallyAmbiguous("degenerate 3-step translation".into()));
    }
    let u1 = u0 * (b / r);
    let tt = (cc / (r * r)).im;
    let b2 = Mat3::from_columns(&[v.scale(r), u1, w0.unscale(r)]);
    let h = c(0.0, tt / 2.0);
    let g = Matrix3::new(
        c(1.0, 0.0),
        -h.conj(),
        c(-h.norm_sqr() / 2.0, 0.0),
        c(0.0, 0.0),
        c(1.0, 0.0),
        h,
        c(0.0, 0.0),
        c(0.0, 0.0),
        c(1.0, 0.0),
    );
    Ok(b2 * g)
}

/// Frame `B` and normal form `N` with `m B = B N`.
pub(crate) fn normal_frame(m: &Mat3, key: &ClassKey) -> Result<(Mat3, Mat3)> {
    let id = Mat3::identity();
    let tr = m.trace();
    let cusp = || {
        omega_powers()
            .into_iter()
            .min_by(|a, b| {
                (tr - 3.0 * a)
                    .norm()
                    .partial_cmp(&(tr - 3.0 * b).norm())
                    .unwrap()
            })
            .unwrap()
    };
    let diag = |l: [C64; 3]| Mat3::from_diagonal(&Vec3::new(l[0], l[1], l[2]));
    match key.kind {
        Kind::Identity => Ok((id, id * cusp())),
        Kind::RegularElliptic => {
            let (b, l) = elliptic_frame(m)?;
            Ok((b, diag(l)))
        }
        Kind::SpecialEllipticNeg | Kind::SpecialEllipticPos => {
            let lam = double_eigenvalue_of_trace(tr);
            let (b, l) = special_frame(m, lam, key.kind == Kind::SpecialEllipticNeg)?;
            Ok((b, diag(l)))
        }
        Kind::Loxodromic => {
            let mut ev = eigenvalues(m);
            ev.sort_by(|a, b| b.norm().partial_cmp(&a.norm()).unwrap());
            let (lr, vr) = eigenpair(m, ev[0]);
            let (lu, u) = eigenpair(m, ev[1]);
            let (ls, vs) = eigenpair(m, ev[2]);
            let u = u.unscale(form(&u, &u).re.sqrt());
            let vs = vs / form(&vr, &vs).conj();
            let k = (vnorm(&vs) / vnorm(&vr)).sqrt();
            let (vr, vs) = (vr.scale(k), vs.unscale(k));
            Ok((Mat3::from_columns(&[vr, vs, u]), diag([lr, ls, lu])))
        }
        Kind::EllipticoParabolic => {
            let lam = double_eigenvalue_of_trace(tr);
            let (b, o) = ellipto_parabolic_frame(m, lam)?;
            let mut nf = diag([lam, lam.powi(-2), lam]);
            nf[(0, 2)] = lam * c(0.0, o as f64);
            Ok((b, nf))
        }
        Kind::TwoStepA | Kind::TwoStepB => {
            let d = cusp();
            let (b, o) = two_step_frame(m, d)?;
            let mut nf = id;
            nf[(0, 2)] = c(0.0, o as f64);
            Ok((b, nf * d))
        }
        Kind::ThreeStep => {
            let d = cusp();
            let b = three_step_frame(m, d)?;
            let mut nf = id;
            nf[(0, 1)] = c(-1.0, 0.0);
            nf[(0, 2)] = c(-0.5, 0.0);
            nf[(1, 2)] = c(1.0, 0.0);
            Ok((b, nf * d))
        }
    }
}

/// Nearest form-preserving matrix via `C <- (C + J C^{-*} J) / 2`.
pub(crate) fn unitarize(m: &Mat3) -> Option<Mat3> {
    let j = form_matrix();
    let mut cm = *m;
    for _ in 0..6 {
        let inv = cm.adjoint().try_inverse()?;
        let next = (cm + j * inv * j) * c(0.5, 0.0);
        let step = frob(&(next - cm));
        cm = next;
        if step <= 1e-16 * frob(&cm) {
            break;
        }
    }
    Some(cm)
}

/// Relative tolerance used when matching class keys.
pub const KEY_TOL: f64 = 1e-6;

/// `C` in `SU(2,1)` with `C F1 C^{-1} = d F2` for some `d` in `Omega`.
pub fn conjugator(f1: &Isometry, f2: &Isometry) -> Result<Isometry> {
    let (c, res) = conjugator_best(f1, f2)?;
    if res <= 1e-8 {
        Ok(c)
    } else {
        Err(Error::IllConditioned(res))
    }
}

/// Best conjugator candidate with its relative residual.
pub(crate) fn conjugator_best(f1: &Isometry, f2: &Isometry) -> Result<(Isometry, f64)> {
    let k1 = f1.classify()?;
    let k2 = f2.classify()?;
    if !k1.matches(&k2, KEY_TOL) {
        return Err(Error::NotConjugate);
    }
    let (b1, n1) = normal_frame(f1.matrix(), &k1)?;
    let b1inv = b1
        .try_inverse()
        .ok_or(Error::IllConditioned(f64::INFINITY))?;
    let mut best: Option<(Isometry, f64)> = None;
    let scale = frob(f2.matrix()).max(1.0);
    for w in omega_powers() {
        let g = f2.matrix() * w;
        let Ok((b2, n2)) = normal_frame(&g, &k2) else {
            continue;
        };
        if frob(&(n1 - n2)) > 1e-5 * frob(&n1).max(1.0) {
            continue;
        }
        let Some(mut cm) = unitarize(&(b2 * b1inv)) else {
            continue;
        };
        let det = cm.determinant();
        cm /= det.powf(1.0 / 3.0);
        let ci = Isometry::raw(cm);
        let res = frob(&(ci.matrix() * f1.matrix() * ci.inverse().matrix() - g)) / scale;
        if res <= 1e-8 {
            return Ok((ci, res));
        }
        if best.as_ref().map_or(true, |b| res < b.1) {
            best = Some((ci, res));
        }
    }
    best.ok_or(Error::IllConditioned(f64::INFINITY))
}

/// Eigenvalue of negative type for elliptic or boundary-elliptic isometries.
pub fn negative_type_eigenvalue(f: &Isometry) -> Option<C64> {
    let key = f.classify().ok()?;
    let m = f.matrix();
    match key.kind {
        Kind::RegularElliptic => elliptic_frame(m).ok().map(|(_, l)| l[2]),
        Kind::SpecialEllipticNeg => Some(double_eigenvalue_of_trace(f.trace()).powi(-2)),
        Kind::SpecialEllipticPos => Some(double_eigenvalue_of_trace(f.trace())),
        Kind::Identity => Some(f.trace() / 3.0),
        _ => None,
    }
}
