//! Products of complex reflections reproducing a given isometry.
//!
//! A decomposition `F = delta R_{a_n}^{c_n} ... R_{a_1}^{c_1}` lists its
//! centers in application order (`c_1` acts first).

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use nalgebra::{DMatrix, DVector, Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::atlas::{chambers, e_sigma_segments, feasible_sigmas, SIGMA_PAIRS, length2_test, pair_product, snap_t, Status};
use crate::hermitian::{form, line_through, orthogonal_in_line, triple_from_gram, LineKind, ProjectivePoint, Sign};
use crate::isometry::{
    conjugator, conjugator_best, deltoid_f, double_eigenvalue_of_trace, elliptic_frame, normal_frame, special_elliptic_raw,
    special_frame, ClassKey, Isometry, Kind, Parameter, KEY_TOL,
};
use crate::linalg::{c, eigenpair, frob};
use crate::trace_geometry::{chi, kappa, t_on_line, t_plus_minus, tau_param, TangentLine};
use crate::{omega_powers, Error, Mat3, Result, Vec3, C64};

/// Residual bound for every returned decomposition.
pub const RESIDUAL_TOL: f64 = 1e-8;
/// Default number of samples for bounded searches.
pub const DEFAULT_BUDGET: usize = 10_000;

#[derive(Debug, Clone, PartialEq)]
pub struct Decomposition {
    /// Index `k` of `delta = w^k`.
    pub delta: usize,
    pub params: Vec<Parameter>,
    pub centers: Vec<ProjectivePoint>,
    /// `min_k |F - w^k prod|` in the Frobenius norm.
    pub residual: f64,
}

impl Decomposition {
    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    pub fn delta_value(&self) -> C64 {
        omega_powers()[self.delta]
    }

    /// `R_{a_n}^{c_n} ... R_{a_1}^{c_1}` without the scalar.
    pub fn product(&self) -> Result<Isometry> {
        product(&self.params, &self.centers)
    }

    /// The product including `delta`.
    pub fn rebuild(&self) -> Result<Isometry> {
        Ok(self.product()?.scaled(self.delta_value()))
    }
}

pub fn product(params: &[Parameter], centers: &[ProjectivePoint]) -> Result<Isometry> {
    let mut m = Isometry::identity();
    for (a, p) in params.iter().zip(centers) {
        m = special_elliptic_raw(a.value(), p)?.compose(&m);
    }
    Ok(m)
}

/// Builds the decomposition and checks the residual, polishing the centers
/// when the first product is close but not within tolerance.
pub fn certify(target: &Isometry, params: Vec<Parameter>, centers: Vec<ProjectivePoint>) -> Result<Decomposition> {
    certify_within(target, params, centers, RESIDUAL_TOL)
}

fn certify_within(target: &Isometry, params: Vec<Parameter>, centers: Vec<ProjectivePoint>, tol: f64) -> Result<Decomposition> {
    let prod = product(&params, &centers)?;
    let (mut residual, mut delta) = target.distance_mod_omega(&prod);
    let mut centers = centers;
    if !(residual <= tol) && residual <= POLISH_RANGE * (1.0 + frob(target.matrix())) {
        if let Some(better) = polish(target, &params, &centers, delta, 40) {
            let (r, d) = target.distance_mod_omega(&product(&params, &better)?);
            if r < residual {
                residual = r;
                delta = d;
                centers = better;
            }
        }
    }
    if !(residual <= tol) {
        return Err(Error::ConjugationFailed(format!("residual {residual:e}")));
    }
    Ok(Decomposition {
        delta,
        params,
        centers,
        residual,
    })
}

const POLISH_RANGE: f64 = 1e-3;
const LOOSE_TOL: f64 = 1e-4;
/// Budget units charged per direct-search start.
const DIRECT_COST: usize = 50;

fn raw_product(params: &[Parameter], vs: &[Vec3]) -> Option<Mat3> {
    let mut m = Mat3::identity();
    for (a, v) in params.iter().zip(vs) {
        let p = ProjectivePoint::new(*v).ok()?;
        if p.norm().abs() < 1e-14 * v.norm_squared() {
            return None;
        }
        m = special_elliptic_raw(a.value(), &p).ok()?.matrix() * m;
    }
    Some(m)
}

/// Gauss-Newton on the center coordinates for `target = w^delta prod`.
fn polish(
    target: &Isometry,
    params: &[Parameter],
    centers: &[ProjectivePoint],
    delta: usize,
    iters: usize,
) -> Option<Vec<ProjectivePoint>> {
    let w = omega_powers()[delta];
    let mut vs: Vec<Vec3> = centers.iter().map(|p| p.coords / C64::new(p.coords.norm(), 0.0)).collect();
    let n = 6 * vs.len();
    let resid = |vs: &[Vec3]| -> Option<DVector<f64>> {
        let d = target.matrix() - raw_product(params, vs)? * w;
        Some(DVector::from_iterator(18, d.iter().flat_map(|z| [z.re, z.im])))
    };
    let mut r = resid(&vs)?;
    let mut mu = 0.0;
    for _ in 0..iters {
        if r.norm() < 1e-14 {
            break;
        }
        let h = 1e-7 * vs.iter().map(|v| v.norm()).fold(1.0, f64::max);
        let mut jac = DMatrix::<f64>::zeros(18, n);
        for j in 0..n {
            let (i, c0, im) = (j / 6, (j % 6) / 2, j % 2 == 1);
            let step = if im { C64::new(0.0, h) } else { C64::new(h, 0.0) };
            let mut up = vs.clone();
            up[i][c0] += step;
            let mut dn = vs.clone();
            dn[i][c0] -= step;
            let col = (resid(&up)? - resid(&dn)?) / (2.0 * h);
            jac.set_column(j, &col);
        }
        let svd = jac.svd(true, true);
        let (u, v_t) = (svd.u.as_ref()?, svd.v_t.as_ref()?);
        let smax = svd.singular_values.max();
        let ur = u.transpose() * &r;
        let mut improved = false;
        for _ in 0..12 {
            let damp = mu * smax * smax;
            let scaled = DVector::from_iterator(
                ur.len(),
                svd.singular_values.iter().zip(ur.iter()).map(|(s, x)| {
                    if *s <= 1e-9 * smax {
                        0.0
                    } else {
                        s * x / (s * s + damp)
                    }
                }),
            );
            let dx = v_t.transpose() * scaled;
            let mut next = vs.clone();
            for j in 0..n {
                let (i, c0, im) = (j / 6, (j % 6) / 2, j % 2 == 1);
                let step = if im { C64::new(0.0, dx[j]) } else { C64::new(dx[j], 0.0) };
                next[i][c0] -= step;
            }
            if let Some(rn) = resid(&next) {
                if rn.norm() < r.norm() {
                    vs = next;
                    r = rn;
                    mu *= 0.1;
                    improved = true;
                    break;
                }
            }
            mu = if mu == 0.0 { 1e-8 } else { mu * 10.0 };
        }
        if !improved {
            break;
        }
    }
    vs.into_iter().map(|v| ProjectivePoint::new(v).ok()).collect()
}

/// Damped least squares over all centers from pseudo-random starts.
fn direct_search(f: &Isometry, params: &[Parameter], starts: usize) -> Option<Decomposition> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    for start in 0..starts {
        let centers: Vec<ProjectivePoint> = (0..params.len())
            .map(|i| {
                let want = if (start >> i) & 1 == 0 { Sign::Pos } else { Sign::Neg };
                loop {
                    let v = Vec3::from_fn(|_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
                    let n = v.norm_squared();
                    if let Ok(p) = ProjectivePoint::new(v) {
                        if p.sign() == Some(want) && p.norm().abs() > 0.2 * n {
                            break p;
                        }
                    }
                }
            })
            .collect();
        for delta in 0..3 {
            let Some(better) = polish(f, params, &centers, delta, 60) else { continue };
            if let Ok(d) = certify(f, params.to_vec(), better) {
                return Some(d);
            }
        }
    }
    None
}

fn move_centers(cm: &Isometry, pts: &[ProjectivePoint]) -> Result<Vec<ProjectivePoint>> {
    pts.iter().map(|p| cm.apply(p)).collect()
}

/// Eigenvector for the simple eigenvalue of a special elliptic isometry.
fn special_center(f: &Isometry) -> Result<ProjectivePoint> {
    let lam = double_eigenvalue_of_trace(f.trace());
    let (_, v) = eigenpair(f.matrix(), lam.powi(-2));
    ProjectivePoint::new(v)
}

/// `F = delta R_alpha^p`.
pub fn decompose1(f: &Isometry, alpha: &Parameter) -> Result<Decomposition> {
    let key = f.classify()?;
    if !matches!(key.kind, Kind::SpecialEllipticNeg | Kind::SpecialEllipticPos) {
        return Err(Error::NotDecomposable);
    }
    let p = special_center(f)?;
    certify(f, vec![*alpha], vec![p]).map_err(|_| Error::NotDecomposable)
}

/// `F = delta R_{a2}^{p2} R_{a1}^{p1}`.
pub fn decompose2(f: &Isometry, a1: &Parameter, a2: &Parameter) -> Result<Decomposition> {
    match decompose2_within(f, a1, a2, RESIDUAL_TOL) {
        Err(Error::NotDecomposable) => Err(Error::NotDecomposable),
        Err(e) => direct_search(f, &[*a1, *a2], 40).ok_or(e),
        ok => ok,
    }
}

fn decompose2_within(f: &Isometry, a1: &Parameter, a2: &Parameter, tol: f64) -> Result<Decomposition> {
    let key = f.classify()?;
    if key.kind.is_two_step() {
        return Err(Error::NotDecomposable);
    }
    // repeated center
    let shared = match key.kind {
        Kind::Identity => Some(ProjectivePoint::basis(0)),
        Kind::SpecialEllipticNeg | Kind::SpecialEllipticPos => special_center(f).ok(),
        _ => None,
    };
    if let Some(p) = shared {
        if let Ok(d) = certify_within(f, vec![*a1, *a2], vec![p.clone(), p], tol) {
            return Ok(d);
        }
    }
    let Some(wit) = length2_test(&key, a1, a2) else {
        return Err(Error::NotDecomposable);
    };
    let line = TangentLine::new(a1.value() * a2.value());
    let tr = f.trace();
    let mut last_err = Error::NotDecomposable;
    for w in omega_powers() {
        let tau = tr * w;
        if line.distance(tau) > 1e-7 * (1.0 + tau.norm()) {
            continue;
        }
        let t = snap_t(t_on_line(a1.value(), a2.value(), tau));
        let mut sigmas = feasible_sigmas(t);
        if let Some(i) = sigmas.iter().position(|s| *s == wit.sigma) {
            sigmas.swap(0, i);
        }
        for sigma in sigmas {
            let Ok((p1, p2, prod)) = pair_product(a1, a2, t, sigma) else {
                continue;
            };
            if !prod.classify().is_ok_and(|pk| pk.matches(&key, KEY_TOL)) {
                continue;
            }
            match conjugator_best(&prod, f) {
                Ok((cm, _)) => {
                    let centers = move_centers(&cm, &[p1, p2])?;
                    match certify_within(f, vec![*a1, *a2], centers, tol) {
                        Ok(d) => return Ok(d),
                        Err(e) => last_err = e,
                    }
                }
                Err(e) => last_err = Error::ConjugationFailed(e.to_string()),
            }
        }
    }
    Err(last_err)
}

// ---------------------------------------------------------------------------
// surface of triples

/// Data of the trace equation for triples of centers with signs `sigma`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfaceInstance {
    pub alpha: Parameter,
    pub tau: C64,
    pub sigma: [Sign; 3],
    pub kappa: C64,
    pub chi: f64,
    pub d1: f64,
    pub d2: f64,
    pub d3: f64,
}

impl SurfaceInstance {
    pub fn new(alpha: &Parameter, tau: C64, sigma: [Sign; 3]) -> Self {
        let k = kappa(alpha, tau);
        let x = chi(alpha.value());
        let e = 2.0 * x * k.re + k.im;
        SurfaceInstance {
            alpha: *alpha,
            tau,
            sigma,
            kappa: k,
            chi: x,
            d1: 1.0 + 4.0 * x * x,
            d2: -4.0 * x * e,
            d3: e * e,
        }
    }

    /// Determinant of the normalized Gram matrix of a realizing triple.
    pub fn gram_sign(&self) -> f64 {
        let s: f64 = self.sigma.iter().map(|x| x.value()).product();
        s * (2.0 * self.kappa.re + 1.0)
    }

    /// Left-hand side of the surface equation.
    pub fn equation(&self, t1: f64, t2: f64, t: f64) -> f64 {
        t1 * t1 * t2 + t1 * t2 * t2 - 2.0 * t1 * t2 * t
            + 2.0 * t1 * t2 * self.kappa.re
            + self.d1 * t * t
            + self.d2 * t
            + self.d3
    }

    /// Discriminant of the equation as a quadratic in `t`.
    pub fn discriminant(&self, t1: f64, t2: f64) -> f64 {
        let b = self.d2 - 2.0 * t1 * t2;
        let c0 = t1 * t1 * t2 + t1 * t2 * t2 + 2.0 * t1 * t2 * self.kappa.re + self.d3;
        b * b - 4.0 * self.d1 * c0
    }

    /// Imaginary part of the normalized triple product at real part `t`.
    pub fn imaginary_part(&self, t: f64) -> f64 {
        self.kappa.im - 2.0 * self.chi * (t - self.kappa.re)
    }

    fn tance_ok(&self, i: usize, t: f64) -> bool {
        if self.sigma[i].value() * self.sigma[i + 1].value() > 0.0 {
            t > 1.0
        } else {
            t < 0.0
        }
    }

    /// Centers `(p1, p2, p3)` realizing a solution.
    pub fn points(&self, sol: (f64, f64, f64)) -> Result<[ProjectivePoint; 3]> {
        triple_from_gram(sol.0, sol.1, sol.2, self.sigma, self.imaginary_part(sol.2))
    }
}

const SURFACE_BOX: f64 = 1e3;

fn quadrant_values(same_sign: bool, bound: f64) -> Vec<f64> {
    let mut mags = Vec::new();
    let mut m = 0.25;
    while m <= bound {
        mags.push(m);
        m *= 2.0;
    }
    mags.into_iter()
        .map(|m| if same_sign { 1.0 + m } else { -m })
        .collect()
}

/// Solutions of the surface equation with the sign constraints, ordered by size.
pub(crate) fn surface_solutions(inst: &SurfaceInstance, relax_last: bool, limit: usize) -> Result<Vec<(f64, f64, f64)>> {
    let g = inst.gram_sign();
    if (relax_last && g > 1e-12) || (!relax_last && g >= -1e-12) {
        return Err(Error::NoSolution { bound: 0.0 });
    }
    let s = inst.sigma.map(|x| x.value());
    let mut bound = SURFACE_BOX;
    let mut out = Vec::new();
    while bound <= 1e9 {
        let v1 = quadrant_values(s[0] * s[1] > 0.0, bound);
        let v2 = quadrant_values(s[1] * s[2] > 0.0, bound);
        let mut pairs: Vec<(f64, f64)> = v1.iter().flat_map(|&a| v2.iter().map(move |&b| (a, b))).collect();
        pairs.sort_by(|x, y| {
            let kx = x.0.abs().max(x.1.abs());
            let ky = y.0.abs().max(y.1.abs());
            kx.partial_cmp(&ky).unwrap().then(x.0.abs().partial_cmp(&y.0.abs()).unwrap())
        });
        for (t1, t2) in pairs {
            let d = inst.discriminant(t1, t2);
            if d < 0.0 {
                continue;
            }
            let b = inst.d2 - 2.0 * t1 * t2;
            let sq = d.sqrt();
            let q = -0.5 * (b + b.signum() * sq);
            let mut roots = vec![q / inst.d1];
            if q != 0.0 {
                roots.push((t1 * t1 * t2 + t1 * t2 * t2 + 2.0 * t1 * t2 * inst.kappa.re + inst.d3) / q);
            }
            for mut t in roots {
                // one Newton step against cancellation
                let dt = 2.0 * inst.d1 * t + b;
                if dt.abs() > 1e-12 {
                    t -= inst.equation(t1, t2, t) / dt;
                }
                let scale = 1.0 + (t1 * t1 * t2).abs() + (t1 * t2 * t2).abs() + inst.d1 * t * t + inst.d3;
                if inst.equation(t1, t2, t).abs() <= 1e-10 * scale
                    && inst.tance_ok(0, t1)
                    && inst.tance_ok(1, t2)
                    && !out.contains(&(t1, t2, t))
                {
                    out.push((t1, t2, t));
                    if out.len() >= limit {
                        return Ok(out);
                    }
                }
            }
        }
        if !out.is_empty() {
            return Ok(out);
        }
        bound *= 8.0;
    }
    Err(Error::NoSolution { bound: bound / 8.0 })
}

/// A point of the surface `{(t1, t2, t)}` obeying the sign inequalities.
///
/// `relax_last` accepts a vanishing Gram determinant.
pub fn surface_solve(inst: &SurfaceInstance, relax_last: bool) -> Result<(f64, f64, f64)> {
    surface_solutions(inst, relax_last, 1).map(|v| v[0])
}

const SIGN_TRIPLES: [[Sign; 3]; 4] = [
    [Sign::Neg, Sign::Pos, Sign::Neg],
    [Sign::Pos, Sign::Neg, Sign::Neg],
    [Sign::Pos, Sign::Neg, Sign::Pos],
    [Sign::Neg, Sign::Pos, Sign::Pos],
];

fn surface_route(f: &Isometry, key: &ClassKey, alpha: &Parameter, limit: usize) -> Result<Decomposition> {
    let tr = f.trace();
    let params = vec![*alpha; 3];
    let mut last = Error::SearchExhausted {
        samples: 0,
        detail: "no surface solution matched the class".into(),
    };
    let mut tried = 0;
    for w in omega_powers() {
        let tau = tr * w;
        for sigma in SIGN_TRIPLES {
            let inst = SurfaceInstance::new(alpha, tau, sigma);
            let Ok(sols) = surface_solutions(&inst, false, limit) else {
                continue;
            };
            for sol in sols {
                tried += 1;
                let Ok(pts) = inst.points(sol) else { continue };
                let Ok(prod) = product(&params, &pts) else { continue };
                if !prod.classify().is_ok_and(|pk| pk.matches(key, KEY_TOL)) {
                    continue;
                }
                let cm = match conjugator_best(&prod, f) {
                    Ok((cm, _)) => cm,
                    Err(e) => {
                        last = Error::ConjugationFailed(e.to_string());
                        continue;
                    }
                };
                match certify(f, params.clone(), move_centers(&cm, &pts)?) {
                    Ok(d) => return Ok(d),
                    Err(e) => last = e,
                }
            }
        }
    }
    if let Error::SearchExhausted { detail, .. } = last {
        return Err(Error::SearchExhausted { samples: tried, detail });
    }
    Err(last)
}

// ---------------------------------------------------------------------------
// last-factor search: F = R_alpha^q G with G of length 2

/// Frame of `F` in which the values `<Fq,q>/<q,q>` are explicit.
enum WFrame {
    Regular { b: Mat3, l: [C64; 3] },
    Special { b: Mat3, lam: C64, mu: C64, pos: bool },
    /// `N = lam [[1,0,i o],[0,rho,0],[0,0,1]]`, Gram antidiagonal.
    Parabolic { b: Mat3, lam: C64, rho: C64, o: f64 },
    /// `N = d [[1,-1,-1/2],[0,1,1],[0,0,1]]`, Gram antidiagonal.
    ThreeStep { b: Mat3, d: C64 },
    /// Columns `(v_r, v_s, u)`: null eigenvectors with `<v_r, v_s> = g`, then the polar one.
    Lox { b: Mat3, l: [C64; 3], g: C64 },
}

/// Constraint values at `w`: an equality that must vanish, and alternative
/// families of quantities that must all be nonnegative.
struct WConstraints {
    eq: Option<f64>,
    alts: Vec<Vec<f64>>,
}

fn col(v: [C64; 3]) -> Vec3 {
    Vec3::new(v[0], v[1], v[2])
}

impl WFrame {
    fn new(f: &Isometry, key: &ClassKey) -> Result<Self> {
        let m = f.matrix();
        match key.kind {
            Kind::RegularElliptic => {
                let (b, l) = elliptic_frame(m)?;
                Ok(WFrame::Regular { b, l })
            }
            Kind::SpecialEllipticNeg | Kind::SpecialEllipticPos => {
                let lam = double_eigenvalue_of_trace(f.trace());
                let pos = key.kind == Kind::SpecialEllipticPos;
                let (b, _) = special_frame(m, lam, !pos)?;
                Ok(WFrame::Special {
                    b,
                    lam,
                    mu: lam.powi(-2),
                    pos,
                })
            }
            Kind::EllipticoParabolic | Kind::TwoStepA | Kind::TwoStepB => {
                let (b, n) = normal_frame(m, key)?;
                let lam = n[(0, 0)];
                Ok(WFrame::Parabolic {
                    b,
                    lam,
                    rho: n[(1, 1)] / lam,
                    o: (n[(0, 2)] / lam).im,
                })
            }
            Kind::ThreeStep => {
                let (b, n) = normal_frame(m, key)?;
                Ok(WFrame::ThreeStep { b, d: n[(0, 0)] })
            }
            Kind::Loxodromic => {
                let (b, n) = normal_frame(m, key)?;
                let g = form(&b.column(0).into_owned(), &b.column(1).into_owned());
                Ok(WFrame::Lox {
                    b,
                    l: [n[(0, 0)], n[(1, 1)], n[(2, 2)]],
                    g,
                })
            }
            _ => Err(Error::InvalidInput(format!("no last-factor frame for {}", key.kind.name()))),
        }
    }

    fn regular_coords(l: &[C64; 3], w: C64) -> Option<Vector3<f64>> {
        let a = Matrix3::new(1.0, 1.0, 1.0, l[0].re, l[1].re, l[2].re, l[0].im, l[1].im, l[2].im);
        a.try_inverse().map(|ai| ai * Vector3::new(1.0, w.re, w.im))
    }

    /// `(Re P, Im P)` for `<q,q> = 1`, where `P = x conj(z) g`.
    fn lox_coords(l: &[C64; 3], w: C64) -> Option<(f64, f64)> {
        let a = l[0] + l[1] - 2.0 * l[2];
        let bb = C64::new(0.0, 1.0) * (l[0] - l[1]);
        let r = w - l[2];
        let det = a.re * bb.im - bb.re * a.im;
        if det.abs() < 1e-14 {
            return None;
        }
        Some(((r.re * bb.im - bb.re * r.im) / det, (a.re * r.im - a.im * r.re) / det))
    }

    fn constraints(&self, w: C64) -> Option<WConstraints> {
        match self {
            WFrame::Lox { l, .. } => {
                let (p, _) = Self::lox_coords(l, w)?;
                Some(WConstraints {
                    eq: None,
                    alts: vec![vec![1.0 - 2.0 * p], vec![2.0 * p - 1.0]],
                })
            }
            WFrame::Regular { l, .. } => {
                let x = Self::regular_coords(l, w)?;
                Some(WConstraints {
                    eq: None,
                    alts: vec![vec![x[0], x[1], -x[2]], vec![-x[0], -x[1], x[2]]],
                })
            }
            WFrame::Special { lam, mu, pos, .. } => {
                let x = (w - lam) / (mu - lam);
                let alts = if *pos {
                    vec![vec![]]
                } else {
                    vec![vec![-x.re], vec![x.re - 1.0]]
                };
                Some(WConstraints { eq: Some(x.im), alts })
            }
            WFrame::Parabolic { lam, rho, o, .. } => {
                let z = w / lam - 1.0;
                let cc = rho - 1.0;
                if cc.norm() < 1e-9 {
                    return Some(WConstraints {
                        eq: Some(z.re),
                        alts: vec![vec![]],
                    });
                }
                let a = z.re / cc.re;
                let bb = (z.im - a * cc.im) / o;
                Some(WConstraints {
                    eq: None,
                    alts: vec![vec![a, bb], vec![-a, -bb]],
                })
            }
            WFrame::ThreeStep { d, .. } => {
                let z = w / d - 1.0;
                Some(WConstraints {
                    eq: None,
                    alts: vec![vec![-z.re], vec![z.re]],
                })
            }
        }
    }

    /// A nonisotropic `q` with `<Fq,q>/<q,q> = w`, if one exists.
    fn point(&self, w: C64) -> Option<ProjectivePoint> {
        let r = |x: f64| c(x.max(0.0).sqrt(), 0.0);
        let z0 = c(0.0, 0.0);
        let v = match self {
            WFrame::Lox { b, l, g } => {
                let (p, sp) = Self::lox_coords(l, w)?;
                let y = 1.0 - 2.0 * p;
                let n = if y >= 0.0 { 1.0 } else { -1.0 };
                let pp = C64::new(n * p, n * sp);
                b * col([pp / g, c(1.0, 0.0), r(n * y)])
            }
            WFrame::Regular { b, l } => {
                let x = Self::regular_coords(l, w)?;
                let tol = -1e-12;
                let ok = (x[0] >= tol && x[1] >= tol && x[2] <= -tol) || (x[0] <= -tol && x[1] <= -tol && x[2] >= tol);
                if !ok {
                    return None;
                }
                b * col([r(x[0].abs()), r(x[1].abs()), r(x[2].abs())])
            }
            WFrame::Special { b, lam, mu, pos } => {
                let x = ((w - lam) / (mu - lam)).re;
                if *pos {
                    // columns (p, a, b): p the center
                    if x >= 0.0 {
                        b * col([r(x), r(1.0 - x), r(x - 1.0)])
                    } else {
                        b * col([r(-x), z0, r(1.0 - x)])
                    }
                } else if x <= 0.0 {
                    // columns (a, b, p)
                    b * col([r(1.0 - x), z0, r(-x)])
                } else if x >= 1.0 {
                    b * col([r(x - 1.0), z0, r(x)])
                } else {
                    return None;
                }
            }
            WFrame::Parabolic { b, lam, rho, o } => {
                let z = w / lam - 1.0;
                let cc = rho - 1.0;
                if cc.norm() < 1e-9 {
                    let bb = z.im * o;
                    if bb.abs() < 1e-14 {
                        b * col([z0, c(1.0, 0.0), z0])
                    } else {
                        let n = 1.0 / bb;
                        b * col([c(n / 2.0, 0.0), z0, c(1.0, 0.0)])
                    }
                } else {
                    let a = z.re / cc.re;
                    let bb = (z.im - a * cc.im) / o;
                    let n = if a >= 0.0 && bb >= 0.0 {
                        1.0
                    } else if a <= 0.0 && bb <= 0.0 {
                        -1.0
                    } else {
                        return None;
                    };
                    let zz = (bb * n).max(0.0).sqrt();
                    if zz < 1e-12 {
                        return None;
                    }
                    let x = (n - a * n) / (2.0 * zz);
                    b * col([c(x, 0.0), r(a * n), c(zz, 0.0)])
                }
            }
            WFrame::ThreeStep { b, d } => {
                let z = w / d - 1.0;
                if z.re.abs() < 1e-14 {
                    return None;
                }
                let n = -z.re.signum();
                let zz = (2.0 * z.re.abs()).sqrt();
                let yi = -z.im * n / (2.0 * zz);
                let x = (n - yi * yi) / (2.0 * zz);
                b * col([c(x, 0.0), c(0.0, yi), c(zz, 0.0)])
            }
        };
        ProjectivePoint::new(v).ok().filter(|p| p.sig != 0)
    }

    /// Points `q` with `R_{conj alpha}^q F` loxodromic, scaled by `k`.
    fn far_points(&self, k: f64) -> Vec<ProjectivePoint> {
        let r = |x: f64| c(x.max(0.0).sqrt(), 0.0);
        let z0 = c(0.0, 0.0);
        let vs: Vec<Vec3> = match self {
            WFrame::Regular { b, .. } => vec![
                b * col([r(k), z0, r(k - 1.0)]),
                b * col([z0, r(k), r(k - 1.0)]),
                b * col([r(k - 1.0), z0, r(k)]),
                b * col([z0, r(k - 1.0), r(k)]),
            ],
            WFrame::Special { b, pos, .. } => {
                if *pos {
                    vec![b * col([r(k), z0, r(k - 1.0)]), b * col([r(k), z0, r(k + 1.0)])]
                } else {
                    vec![b * col([r(1.0 + k), z0, r(k)]), b * col([r(k - 1.0), z0, r(k)])]
                }
            }
            WFrame::Lox { .. } => vec![],
            WFrame::Parabolic { b, .. } | WFrame::ThreeStep { b, .. } => vec![
                b * col([c(0.5 / k, 0.0), z0, c(1.0, 0.0)]),
                b * col([c(-0.5 / k, 0.0), z0, c(1.0, 0.0)]),
                b * col([c(0.5 / k, 0.0), c(1.0, 0.0), c(1.0, 0.0)]),
            ],
        };
        vs.into_iter()
            .filter_map(|v| ProjectivePoint::new(v).ok())
            .filter(|p| p.sig != 0)
            .collect()
    }
}

#[derive(Clone, Copy, Debug)]
struct Aff {
    a: f64,
    b: f64,
}

impl Aff {
    fn at(&self, t: f64) -> f64 {
        self.a + self.b * t
    }
}

/// `{t : g(t) >= 0 for all g}` as `(lo, hi)`.
fn interval(gs: &[Aff]) -> Option<(f64, f64)> {
    let mut lo = f64::NEG_INFINITY;
    let mut hi = f64::INFINITY;
    for g in gs {
        let scale = 1e-12 * (1.0 + g.a.abs());
        if g.b.abs() <= 1e-14 * (1.0 + g.a.abs()) {
            if g.a < -scale {
                return None;
            }
        } else if g.b > 0.0 {
            lo = lo.max(-g.a / g.b);
        } else {
            hi = hi.min(-g.a / g.b);
        }
    }
    (lo < hi).then_some((lo, hi))
}

fn pick(lo: f64, hi: f64) -> f64 {
    match (lo.is_finite(), hi.is_finite()) {
        (true, true) => 0.5 * (lo + hi),
        (false, true) => hi - 1.0_f64.max(hi.abs()),
        (true, false) => lo + 1.0_f64.max(lo.abs()),
        (false, false) => 0.0,
    }
}

/// Segments of the length-2 sets for `(alpha, alpha)`, in units of `pi`.
fn alpha_alpha_segments(alpha: &Parameter) -> Vec<((f64, f64), (f64, f64))> {
    let (n, _) = alpha.normalized();
    let mut out = Vec::new();
    for sigma in SIGMA_PAIRS {
        if let Ok(set) = e_sigma_segments(&n, &n, sigma) {
            for sg in set.segments.iter().filter(|s| !s.is_point()) {
                out.push((
                    (sg.p.theta1 / PI, sg.p.theta2 / PI),
                    (sg.q.theta1 / PI, sg.q.theta2 / PI),
                ));
            }
        }
    }
    out
}

fn signed_dist(sg: &((f64, f64), (f64, f64)), x: (f64, f64)) -> f64 {
    let (p, q) = *sg;
    let d = (q.0 - p.0, q.1 - p.1);
    (d.0 * (x.1 - p.1) - d.1 * (x.0 - p.0)) / (d.0 * d.0 + d.1 * d.1).sqrt()
}

/// Searches `q` with `F = R_alpha^q G` and `G` an `(alpha, alpha)` product.
///
/// Each candidate line parameter `t` fixes the trace of `G`; the search first
/// tries loxodromic `G`, then samples the elliptic range.
pub fn last_factor_search(f: &Isometry, alpha: &Parameter, budget: usize) -> Result<Decomposition> {
    let key = f.classify()?;
    let frame = WFrame::new(f, &key)?;
    let a = alpha.value();
    let ac = alpha.conj();
    let den = a * a - a.conj();
    let trf = f.trace();
    let (_, tp) = t_plus_minus(a, a);
    let margin = 1e-3 * (1.0 + tp);
    let mut samples = 0usize;
    let mut lox: Vec<(usize, f64)> = Vec::new();
    let mut ell: Vec<(usize, f64, f64)> = Vec::new();
    let wt = |k: usize, t: f64| (omega_powers()[k] * tau_param(a, a, t) - a.conj() * trf) / den;
    for k in 0..3 {
        let (Some(c0), Some(c1)) = (frame.constraints(wt(k, 0.0)), frame.constraints(wt(k, 1.0))) else {
            continue;
        };
        let affs = |i: usize| -> Vec<Aff> {
            c0.alts[i]
                .iter()
                .zip(&c1.alts[i])
                .map(|(x, y)| Aff { a: *x, b: y - x })
                .collect()
        };
        if let (Some(e0), Some(e1)) = (c0.eq, c1.eq) {
            let h = Aff { a: e0, b: e1 - e0 };
            if h.b.abs() < 1e-14 {
                continue;
            }
            let t = -h.a / h.b;
            let ok = (0..c0.alts.len()).any(|i| affs(i).iter().all(|g| g.at(t) >= -1e-9));
            if ok {
                if t < -margin || t > tp + margin {
                    lox.push((k, t));
                } else {
                    ell.push((k, t, t));
                }
            }
            continue;
        }
        for i in 0..c0.alts.len() {
            let Some((lo, hi)) = interval(&affs(i)) else { continue };
            if lo < -margin {
                lox.push((k, pick(lo, hi.min(-margin))));
            }
            if hi > tp + margin {
                lox.push((k, pick(lo.max(tp + margin), hi)));
            }
            let (el, eh) = (lo.max(0.0), hi.min(tp));
            if el < eh {
                ell.push((k, el, eh));
            }
        }
    }
    let params = vec![*alpha; 3];
    let try_t = |k: usize, t: f64, need_lox: bool| -> Option<Decomposition> {
        let q = frame.point(wt(k, t))?;
        let g = special_elliptic_raw(ac.value(), &q).ok()?.compose(f);
        let gk = g.classify().ok()?;
        if need_lox && gk.kind != Kind::Loxodromic {
            return None;
        }
        if !need_lox && length2_test(&gk, alpha, alpha).is_none() {
            return None;
        }
        // G may be length 2 only up to the search precision; the three
        // centers are polished together against F afterwards.
        let d2 = decompose2_within(&g, alpha, alpha, LOOSE_TOL).ok()?;
        let mut centers = d2.centers;
        centers.push(q);
        certify(f, params.clone(), centers).ok()
    };
    for &(k, t) in &lox {
        samples += 1;
        if let Some(d) = try_t(k, t, true) {
            return Ok(d);
        }
    }
    // Elliptic G: its angle pair moves along a curve as t varies, and the
    // length-2 segments are met at isolated t; locate sign changes of the
    // signed distance to each segment line and bisect.
    let segs = alpha_alpha_segments(alpha);
    let pair_at = |k: usize, t: f64| -> Option<(f64, f64)> {
        let q = frame.point(wt(k, t))?;
        let g = special_elliptic_raw(ac.value(), &q).ok()?.compose(f);
        let gk = g.classify().ok()?;
        if gk.kind != Kind::RegularElliptic {
            return None;
        }
        gk.angle_pair.map(|p| (p.0 / PI, p.1 / PI))
    };
    let per = (budget.saturating_sub(samples) / (2 * ell.len()).max(1)).clamp(1, 2000);
    for &(k, lo, hi) in &ell {
        if lo == hi {
            samples += 1;
            if let Some(d) = try_t(k, lo, false) {
                return Ok(d);
            }
            continue;
        }
        let ts: Vec<f64> = (0..=per).map(|j| lo + (hi - lo) * j as f64 / per as f64).collect();
        let pairs: Vec<Option<(f64, f64)>> = ts.iter().map(|&t| pair_at(k, t)).collect();
        samples += ts.len();
        for j in 0..per {
            if samples > budget {
                break;
            }
            let (Some(x0), Some(x1)) = (pairs[j], pairs[j + 1]) else { continue };
            if (x0.0 - x1.0).abs() + (x0.1 - x1.1).abs() > 0.25 {
                continue;
            }
            for sg in &segs {
                let (d0, d1) = (signed_dist(sg, x0), signed_dist(sg, x1));
                if d0 * d1 > 0.0 {
                    continue;
                }
                let (mut a, mut b, mut da) = (ts[j], ts[j + 1], d0);
                for _ in 0..40 {
                    let m = 0.5 * (a + b);
                    let Some(xm) = pair_at(k, m) else { break };
                    let dm = signed_dist(sg, xm);
                    samples += 1;
                    if dm * da <= 0.0 {
                        b = m;
                    } else {
                        a = m;
                        da = dm;
                    }
                }
                if let Some(d) = try_t(k, 0.5 * (a + b), false) {
                    return Ok(d);
                }
            }
        }
    }
    Err(Error::SearchExhausted {
        samples,
        detail: format!(
            "{} loxodromic and {} elliptic candidate ranges for {}",
            lox.len(),
            ell.len(),
            key.kind.name()
        ),
    })
}

/// Length-3 synthesis for an elliptic target.
pub fn synthesize_elliptic(f: &Isometry, alpha: &Parameter, budget: usize) -> Result<Decomposition> {
    if f.classify()?.kind == Kind::Identity {
        return identity_triple(f, alpha);
    }
    last_factor_search(f, alpha, budget)
}

fn identity_triple(f: &Isometry, alpha: &Parameter) -> Result<Decomposition> {
    let e = |k| ProjectivePoint::basis(k);
    certify(f, vec![*alpha; 3], vec![e(0), e(1), e(2)])
}

/// Chamber status at an elliptic class, when it can be read off exactly.
pub fn chamber_status(f: &Isometry, alpha: &Parameter) -> Option<Status> {
    let key = f.classify().ok()?;
    let pair = key.angle_pair?;
    if !key.kind.is_elliptic() {
        return None;
    }
    let atlas = chambers(alpha).ok()?;
    let x = (pair.0 / PI, pair.1 / PI);
    let tol = 1e-7;
    let mut found: Option<Status> = None;
    for ch in &atlas.chambers {
        let n = ch.polygon.len();
        let mut inside = true;
        for i in 0..n {
            let p = ch.polygon[i];
            let r = ch.polygon[(i + 1) % n];
            let (px, py) = (crate::unfolded::qf(p.x), crate::unfolded::qf(p.y));
            let (rx, ry) = (crate::unfolded::qf(r.x), crate::unfolded::qf(r.y));
            let len = ((rx - px).powi(2) + (ry - py).powi(2)).sqrt();
            let sd = ((rx - px) * (x.1 - py) - (ry - py) * (x.0 - px)) / len;
            let side = (p.y == r.y && p.y.numer() == &0)
                || (p.x == r.x && p.x == crate::unfolded::q(2, 1))
                || (p.x == p.y && r.x == r.y);
            if !(sd >= tol || (side && sd >= -tol)) {
                inside = false;
                break;
            }
        }
        if inside {
            found = match (found, ch.status) {
                (Some(Status::Full), _) | (_, Status::Full) => Some(Status::Full),
                (_, s) => Some(s),
            };
        }
    }
    found
}

/// `F = delta R R R` with three factors of parameter `alpha`.
pub fn decompose3(f: &Isometry, alpha: &Parameter) -> Result<Decomposition> {
    decompose3_with(f, alpha, DEFAULT_BUDGET)
}

pub fn decompose3_with(f: &Isometry, alpha: &Parameter, budget: usize) -> Result<Decomposition> {
    let key = f.classify()?;
    let params = [*alpha; 3];
    let starts = (budget / DIRECT_COST).max(1);
    let search = |surface: usize| {
        surface_route(f, &key, alpha, surface)
            .or_else(|_| last_factor_search(f, alpha, budget / 10))
            .or_else(|e| direct_search(f, &params, starts).ok_or(e))
            .or_else(|_| last_factor_search(f, alpha, budget))
    };
    match key.kind {
        Kind::Identity => identity_triple(f, alpha),
        Kind::Loxodromic => search(8),
        Kind::EllipticoParabolic | Kind::ThreeStep => search(40),
        Kind::TwoStepA | Kind::TwoStepB => {
            // Away from the cube roots of +-1 a small residual cannot tell a
            // 2-step class from nearby 3-step classes.
            let a3 = alpha.value().powi(3);
            let covered = omega_powers().iter().any(|w| (a3 - w).norm() < 1e-9 || (a3 + w).norm() < 1e-9);
            if !covered {
                return Err(Error::Unknown("2-step unipotent with alpha^3 outside the cube roots of +-1".into()));
            }
            last_factor_search(f, alpha, budget / 10).or_else(|e| direct_search(f, &params, starts).ok_or(e))
        }
        _ => {
            let status = chamber_status(f, alpha);
            if status == Some(Status::Empty) {
                return Err(Error::NotDecomposable);
            }
            match search(40) {
                Ok(d) => Ok(d),
                Err(e) if status == Some(Status::Full) => Err(e),
                Err(Error::SearchExhausted { .. }) => Err(Error::NotDecomposable),
                Err(e) => Err(e),
            }
        }
    }
}

/// At most four factors for any isometry.
pub fn decompose4(f: &Isometry, alpha: &Parameter) -> Result<Decomposition> {
    let key = f.classify()?;
    if key.kind == Kind::Identity || key.kind.is_regular_nonelliptic() {
        return decompose3(f, alpha);
    }
    if let Some(d) = direct_search(f, &[*alpha; 4], DEFAULT_BUDGET / DIRECT_COST) {
        return Ok(d);
    }
    let frame = WFrame::new(f, &key)?;
    let ac = alpha.conj();
    let mut tried = 0;
    let mut k = 2.0;
    while k <= 1e3 {
        for q in frame.far_points(k) {
            tried += 1;
            let Ok(r) = special_elliptic_raw(ac.value(), &q) else { continue };
            let g = r.compose(f);
            if deltoid_f(g.trace()) <= 1.0 || !g.classify().is_ok_and(|gk| gk.kind == Kind::Loxodromic) {
                continue;
            }
            if let Ok(d3) = decompose3(&g, alpha) {
                let mut centers = d3.centers;
                centers.push(q);
                if let Ok(d) = certify(f, vec![*alpha; 4], centers) {
                    return Ok(d);
                }
            }
        }
        k *= 2.0;
    }
    Err(Error::SearchExhausted {
        samples: tried,
        detail: "no loxodromic reduction found".into(),
    })
}

/// Length of an isometry in reflections of parameter `alpha`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Length {
    Exact(usize),
    /// Either 3 or 4 (2-step unipotent, `alpha^3` outside the cube roots of `+-1`).
    Unknown,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlphaLength {
    pub length: Length,
    pub decomposition: Decomposition,
}

/// Smallest number of factors, with a certificate; identity counts as 3.
pub fn alpha_length(f: &Isometry, alpha: &Parameter) -> Result<AlphaLength> {
    shortest(f, alpha, 4, DEFAULT_BUDGET)
}

/// Shortest decomposition with at most `max_len` factors.
///
/// Fails with `NotDecomposable` when every length up to `max_len` is ruled
/// out, and with `Unknown` when the answer at length 3 is open.
pub fn shortest(f: &Isometry, alpha: &Parameter, max_len: usize, budget: usize) -> Result<AlphaLength> {
    let exact = |n, d| Ok(AlphaLength { length: Length::Exact(n), decomposition: d });
    if max_len == 0 {
        return Err(Error::NotDecomposable);
    }
    if let Ok(d) = decompose1(f, alpha) {
        return exact(1, d);
    }
    if max_len < 2 {
        return Err(Error::NotDecomposable);
    }
    match decompose2(f, alpha, alpha) {
        Ok(d) => return exact(2, d),
        Err(Error::NotDecomposable) => {}
        Err(e) => return Err(e),
    }
    if max_len < 3 {
        return Err(Error::NotDecomposable);
    }
    match decompose3_with(f, alpha, budget) {
        Ok(d) => exact(3, d),
        Err(Error::NotDecomposable) if max_len >= 4 => exact(4, decompose4(f, alpha)?),
        Err(Error::Unknown(_) | Error::SearchExhausted { .. }) if max_len >= 4 => Ok(AlphaLength {
            length: Length::Unknown,
            decomposition: decompose4(f, alpha)?,
        }),
        Err(e) => Err(e),
    }
}

/// Result of replacing both centers by their orthogonal points in the line.
#[derive(Debug, Clone, PartialEq)]
pub struct ChangeOfSigns {
    pub q1: ProjectivePoint,
    pub q2: ProjectivePoint,
    /// Whether the new product is conjugate to the old one (not just of equal trace).
    pub same_class: bool,
}

pub fn change_signs(
    p1: &ProjectivePoint,
    p2: &ProjectivePoint,
    a1: &Parameter,
    a2: &Parameter,
) -> Result<ChangeOfSigns> {
    let line = line_through(p1, p2)?;
    if line.kind != LineKind::Hyperbolic {
        return Err(Error::NotHyperbolicLine);
    }
    let q1 = orthogonal_in_line(&line, p1)?;
    let q2 = orthogonal_in_line(&line, p2)?;
    let r = special_elliptic_raw(a2.value(), p2)?.compose(&special_elliptic_raw(a1.value(), p1)?);
    let rt = special_elliptic_raw(a2.value(), &q2)?.compose(&special_elliptic_raw(a1.value(), &q1)?);
    let same_class = match (r.classify(), rt.classify()) {
        (Ok(x), Ok(y)) => x.matches(&y, KEY_TOL) && conjugator(&r, &rt).is_ok(),
        _ => false,
    };
    Ok(ChangeOfSigns { q1, q2, same_class })
}
