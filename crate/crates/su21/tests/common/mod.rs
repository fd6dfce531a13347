#![allow(dead_code)]

use std::f64::consts::PI;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use su21::atlas::{elliptic_with_pair, is_transition};
use su21::hermitian::ProjectivePoint;
use su21::isometry::{special_elliptic, Isometry, Kind, Parameter};
use su21::unfolded::{q, Q};
use su21::{Mat3, Vec3, C64};

pub use rand::SeedableRng;
pub type Rng64 = ChaCha8Rng;

pub fn rng(seed: u64) -> Rng64 {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn c(x: f64, y: f64) -> C64 {
    C64::new(x, y)
}

fn rc(r: &mut Rng64) -> C64 {
    c(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0))
}

/// Nonisotropic point with `|<p,p>|` bounded away from zero.
pub fn point(r: &mut Rng64) -> ProjectivePoint {
    loop {
        let v = Vec3::new(rc(r), rc(r), rc(r));
        let p = ProjectivePoint::new(v).unwrap();
        if p.norm().abs() > 0.1 * v.norm_squared() {
            return p;
        }
    }
}

pub fn signed_point(r: &mut Rng64, sig: i8) -> ProjectivePoint {
    loop {
        let p = point(r);
        if p.sig == sig {
            return p;
        }
    }
}

/// Parameter away from the cube roots of unity.
pub fn parameter(r: &mut Rng64) -> Parameter {
    loop {
        if let Ok(p) = Parameter::from_angle(r.gen_range(0.0..2.0 * PI)) {
            let d = (p.angle() / (2.0 * PI / 3.0)).fract();
            if d > 0.02 && d < 0.98 {
                return p;
            }
        }
    }
}

/// Exact parameter `e^{i pi a}` with `a` in `(0, 2/3)` off the transition grid.
pub fn exact_parameter(r: &mut Rng64) -> (Q, Parameter) {
    loop {
        let d = r.gen_range(7..60i64);
        let n = r.gen_range(1..(2 * d) / 3 + 1);
        let a = q(n, d);
        if a > q(0, 1) && a < q(2, 3) && !is_transition(a) {
            return (a, Parameter::from_pi_fraction(n, d).unwrap());
        }
    }
}

fn boost(s: f64) -> Isometry {
    let (ch, sh) = (s.cosh(), s.sinh());
    let z = c(0.0, 0.0);
    Isometry::new(Mat3::new(
        c(ch, 0.0), z, c(sh, 0.0),
        z, c(1.0, 0.0), z,
        c(sh, 0.0), z, c(ch, 0.0),
    ))
    .unwrap()
}

fn sturdy_point(r: &mut Rng64, sig: i8) -> ProjectivePoint {
    loop {
        let p = signed_point(r, sig);
        if p.norm().abs() > 0.3 * p.coords.norm_squared() {
            return p;
        }
    }
}

/// Random element of `SU(2,1)` of moderate norm.
pub fn conjugator(r: &mut Rng64) -> Isometry {
    let a = special_elliptic(&parameter(r), &sturdy_point(r, 1)).unwrap();
    let b = special_elliptic(&parameter(r), &sturdy_point(r, -1)).unwrap();
    a.compose(&boost(r.gen_range(-0.8..0.8))).compose(&b)
}

pub fn conj(f: &Isometry, r: &mut Rng64) -> Isometry {
    f.conjugated_by(&conjugator(r))
}

/// Columns `u, e2, v` with Gram matrix antidiagonal `(1, 1, 1)`.
fn null_frame() -> Mat3 {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let z = c(0.0, 0.0);
    Mat3::new(
        c(s, 0.0), z, c(s, 0.0),
        z, c(1.0, 0.0), z,
        c(s, 0.0), z, c(-s, 0.0),
    )
}

fn from_null_frame(n: Mat3) -> Isometry {
    let b = null_frame();
    Isometry::new(b * n * b.try_inverse().unwrap()).unwrap()
}

pub fn ellipto_parabolic(r: &mut Rng64) -> Isometry {
    loop {
        let lam = C64::from_polar(1.0, r.gen_range(0.0..2.0 * PI));
        let rho = lam.powi(-3);
        if (rho - 1.0).norm() < 0.05 {
            continue;
        }
        let o = if r.gen_bool(0.5) { 1.0 } else { -1.0 } * r.gen_range(0.3..2.0);
        let z = c(0.0, 0.0);
        let n = Mat3::new(lam, z, lam * c(0.0, o), z, lam * rho, z, z, z, lam);
        return conj(&from_null_frame(n), r);
    }
}

pub fn two_step(r: &mut Rng64) -> Isometry {
    let o = if r.gen_bool(0.5) { 1.0 } else { -1.0 } * r.gen_range(0.3..2.0);
    let z = c(0.0, 0.0);
    let one = c(1.0, 0.0);
    let n = Mat3::new(one, z, c(0.0, o), z, one, z, z, z, one);
    conj(&from_null_frame(n), r)
}

pub fn three_step(r: &mut Rng64) -> Isometry {
    let z = c(0.0, 0.0);
    let one = c(1.0, 0.0);
    let n = Mat3::new(one, -one, c(-0.5, 0.0), z, one, one, z, z, one);
    conj(&from_null_frame(n), r)
}

pub fn loxodromic(r: &mut Rng64) -> Isometry {
    let l: f64 = r.gen_range(0.2..2.0);
    let th = r.gen_range(0.0..2.0 * PI);
    loxodromic_at(r, l, th)
}

/// Conjugate of `diag(u e^l, u^-2, u e^-l)` in a null frame, `u = e^{i th}`.
pub fn loxodromic_at(r: &mut Rng64, l: f64, th: f64) -> Isometry {
    let z = c(0.0, 0.0);
    let u = C64::from_polar(1.0, th);
    let n = Mat3::new(u * l.exp(), z, z, z, u.powi(-2), z, z, z, u * (-l).exp());
    conj(&from_null_frame(n), r)
}

pub fn regular_elliptic_at(r: &mut Rng64, t1: f64, t2: f64) -> Isometry {
    conj(&elliptic_with_pair(t1, t2), r)
}

pub fn regular_elliptic(r: &mut Rng64) -> Isometry {
    loop {
        let t1 = r.gen_range(0.05..2.0 * PI - 0.05);
        let t2 = r.gen_range(0.05..t1);
        if t1 - t2 > 0.05 {
            return regular_elliptic_at(r, t1, t2);
        }
    }
}

pub fn special_elliptic_kind(r: &mut Rng64, sig: i8) -> Isometry {
    let p = signed_point(r, sig);
    special_elliptic(&parameter(r), &p).unwrap()
}

pub fn random_of(kind: Kind, r: &mut Rng64) -> Isometry {
    match kind {
        Kind::Identity => Isometry::identity(),
        Kind::RegularElliptic => regular_elliptic(r),
        Kind::SpecialEllipticNeg => special_elliptic_kind(r, -1),
        Kind::SpecialEllipticPos => special_elliptic_kind(r, 1),
        Kind::EllipticoParabolic => ellipto_parabolic(r),
        Kind::TwoStepA | Kind::TwoStepB => two_step(r),
        Kind::ThreeStep => three_step(r),
        Kind::Loxodromic => loxodromic(r),
    }
}

pub const KINDS: [Kind; 7] = [
    Kind::RegularElliptic,
    Kind::SpecialEllipticNeg,
    Kind::SpecialEllipticPos,
    Kind::EllipticoParabolic,
    Kind::TwoStepA,
    Kind::ThreeStep,
    Kind::Loxodromic,
];
