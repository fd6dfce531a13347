//! Small dense helpers shared by the numeric modules.

use crate::{Mat3, Vec3, C64};

pub(crate) fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub(crate) fn frob(m: &Mat3) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub(crate) fn vnorm(v: &Vec3) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub(crate) fn max_abs(v: &Vec3) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Bilinear cross product.
pub(crate) fn cross(a: &Vec3, b: &Vec3) -> Vec3 {
    Vec3::new(
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    )
}

/// Roots of the monic cubic `x^3 + a x^2 + b x + c`, Newton polished.
pub(crate) fn cubic_roots(a: C64, b: C64, cc: C64) -> [C64; 3] {
    let p = b - a * a / 3.0;
    let q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + cc;
    let disc = (q * q / 4.0 + p * p * p / 27.0).sqrt();
    let u3a = -q / 2.0 + disc;
    let u3b = -q / 2.0 - disc;
    let u3 = if u3a.norm() >= u3b.norm() { u3a } else { u3b };
    let w = crate::omega();
    let mut ys = [C64::new(0.0, 0.0); 3];
    if u3.norm() < 1e-300 {
        // p = q = 0: triple root
    } else {
        let u = u3.powf(1.0 / 3.0);
        let mut uk = u;
        for y in ys.iter_mut() {
            *y = uk - p / (3.0 * uk);
            uk *= w;
        }
    }
    let f = |x: C64| ((x + a) * x + b) * x + cc;
    let df = |x: C64| (3.0 * x + 2.0 * a) * x + b;
    let mut out = [C64::new(0.0, 0.0); 3];
    for k in 0..3 {
        let mut x = ys[k] - a / 3.0;
        for _ in 0..4 {
            let d = df(x);
            if d.norm() < 1e-14 {
                break;
            }
            let step = f(x) / d;
            let nx = x - step;
            if f(nx).norm() <= f(x).norm() {
                x = nx;
            } else {
                break;
            }
        }
        out[k] = x;
    }
    out
}

/// Eigenvalues of `m` through its characteristic cubic.
pub(crate) fn eigenvalues(m: &Mat3) -> [C64; 3] {
    let tr = m.trace();
    let minors = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)] + m[(0, 0)] * m[(2, 2)]
        - m[(0, 2)] * m[(2, 0)]
        + m[(1, 1)] * m[(2, 2)]
        - m[(1, 2)] * m[(2, 1)];
    let det = m.determinant();
    cubic_roots(-tr, minors, -det)
}

/// Singular values sorted descending.
pub(crate) fn singular_values(m: &Mat3) -> [f64; 3] {
    let sv = m.svd(false, false).singular_values;
    let mut s = [sv[0], sv[1], sv[2]];
    s.sort_by(|x, y| y.partial_cmp(x).unwrap());
    s
}

/// Right singular vector for the smallest singular value.
pub(crate) fn null_vector(m: &Mat3) -> Vec3 {
    let svd = m.svd(false, true);
    let vt = svd.v_t.expect("v_t requested");
    let mut k = 0;
    for i in 1..3 {
        if svd.singular_values[i] < svd.singular_values[k] {
            k = i;
        }
    }
    vt.row(k).adjoint()
}

/// Column of largest Euclidean norm.
pub(crate) fn widest_column(m: &Mat3) -> Vec3 {
    let mut best = m.column(0).into_owned();
    for j in 1..3 {
        let col = m.column(j).into_owned();
        if vnorm(&col) > vnorm(&best) {
            best = col;
        }
    }
    best
}

/// Principal argument mapped into `[0, 2 pi)`.
pub(crate) fn arg_pos(z: C64) -> f64 {
    let a = z.arg();
    if a < 0.0 {
        a + std::f64::consts::TAU
    } else {
        a
    }
}

/// Reduce an angle into `[0, 2 pi)`.
pub(crate) fn wrap(x: f64) -> f64 {
    let t = std::f64::consts::TAU;
    let r = x.rem_euclid(t);
    if r >= t {
        0.0
    } else {
        r
    }
}

/// Circular distance between angles.
pub(crate) fn circ_dist(a: f64, b: f64) -> f64 {
    let d = wrap(a - b);
    d.min(std::f64::consts::TAU - d)
}

/// Simple eigenpair near `lam`, refined by two-sided Rayleigh quotients.
pub(crate) fn eigenpair(m: &Mat3, lam: C64) -> (C64, Vec3) {
    let id = Mat3::identity();
    let mut l = lam;
    let mut v = null_vector(&(m - id * l));
    for _ in 0..2 {
        let a = m - id * l;
        let u = null_vector(&a.adjoint());
        let den = u.dotc(&v);
        if den.norm() < 1e-12 * vnorm(&u) * vnorm(&v) {
            break;
        }
        let nl = u.dotc(&(m * v)) / den;
        if (nl - l).norm() < 1e-17 * (1.0 + l.norm()) {
            break;
        }
        l = nl;
        v = null_vector(&(m - id * l));
    }
    (l, v)
}
