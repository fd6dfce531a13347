//! Length-2 class sets `E^{s1 s2}`, length-2 membership tests, and the chamber
//! atlas of the triangle `T` for a parameter `alpha`.
//!
//! Triangle coordinates here are multiples of `pi`: `T = {0 <= y <= x <= 2}`
//! with `(x, 0)` identified with `(2, x)`.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::f64::consts::PI;
use std::ops::{Add, Div, Mul, Sub};
use std::sync::{Mutex, OnceLock};

use serde::{Deserialize, Serialize};

use crate::hermitian::{pair_with_tance, ProjectivePoint, Sign};
use crate::isometry::{special_elliptic_raw, ClassKey, Isometry, Kind, Parameter, KEY_TOL};
use crate::trace_geometry::{t_on_line, TangentLine};
use crate::unfolded::{q, qf, unfolded_trace_unchecked, walls, QPoint, TrianglePoint, WallSegment, Q};
use crate::{omega_powers, Error, Mat3, Result, Vec3, C64};

trait Coord:
    Copy + PartialOrd + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Div<Output = Self>
{
    fn frac(n: i64, d: i64) -> Self;
}

impl Coord for Q {
    fn frac(n: i64, d: i64) -> Self {
        q(n, d)
    }
}

impl Coord for f64 {
    fn frac(n: i64, d: i64) -> Self {
        n as f64 / d as f64
    }
}

#[derive(Debug, Clone)]
struct RawSeg<S> {
    p: (S, S),
    q: (S, S),
    pk: Vec<Kind>,
    qk: Vec<Kind>,
}

fn raw_segments<S: Coord>(a1: S, a2: S, s1: Sign, s2: Sign) -> Vec<RawSeg<S>> {
    use Kind::*;
    let n = |k: i64| S::frac(k, 1);
    let (zero, one, two, three, four) = (n(0), n(1), n(2), n(3), n(4));
    let s = a1 + a2;
    let crit = S::frac(2, 3);
    let seg = |p: (S, S), q: (S, S), pk: &[Kind], qk: &[Kind]| RawSeg {
        p,
        q,
        pk: pk.to_vec(),
        qk: qk.to_vec(),
    };
    match (s1, s2) {
        (Sign::Neg, Sign::Neg) => {
            if s == crit {
                vec![seg((two, two), (two, two), &[Identity], &[Identity])]
            } else if s < crit {
                vec![seg(
                    (three * s, three * s),
                    (two, one + three * s / two),
                    &[SpecialEllipticNeg],
                    &[EllipticoParabolic],
                )]
            } else {
                vec![seg(
                    (three * s - two, three * s - two),
                    (three * s / two - one, zero),
                    &[SpecialEllipticNeg],
                    &[EllipticoParabolic],
                )]
            }
        }
        (Sign::Pos, Sign::Pos) => {
            let far = if a1 <= a2 {
                (two - three * a1, two - three * a2)
            } else {
                (two - three * a2, two - three * a1)
            };
            let far_k = if a1 == a2 { SpecialEllipticNeg } else { RegularElliptic };
            let joint = [SpecialEllipticPos, EllipticoParabolic];
            if s == crit {
                let corner = (two, zero);
                let id = [Identity, ThreeStep];
                vec![seg(far, corner, &[far_k], &id), seg(corner, corner, &id, &id)]
            } else if s < crit {
                let common = (two, two - three * s);
                vec![
                    seg(far, common, &[far_k], &joint),
                    seg(common, (one + three * s / two, zero), &joint, &[EllipticoParabolic]),
                ]
            } else {
                let common = (four - three * s, zero);
                vec![
                    seg((two, three * s / two - one), common, &[EllipticoParabolic], &joint),
                    seg(common, far, &joint, &[far_k]),
                ]
            }
        }
        (Sign::Pos, Sign::Neg) | (Sign::Neg, Sign::Pos) => {
            // E^{-+}_{a1,a2} = E^{+-}_{a2,a1}
            let (b1, b2) = if s1 == Sign::Pos { (a1, a2) } else { (a2, a1) };
            if b1 == b2 {
                let p = (three * b1, zero);
                vec![seg(p, p, &[SpecialEllipticPos], &[SpecialEllipticPos])]
            } else if b1 < b2 {
                vec![seg(
                    (three * b2, three * b2 - three * b1),
                    (three * s / two, zero),
                    &[RegularElliptic],
                    &[EllipticoParabolic],
                )]
            } else {
                vec![seg(
                    (two + three * b2 - three * b1, three * b2),
                    (two, three * s / two),
                    &[RegularElliptic],
                    &[EllipticoParabolic],
                )]
            }
        }
    }
}

/// One closed segment of an `E^{s1 s2}` set, possibly a single point.
#[derive(Debug, Clone, PartialEq)]
pub struct ESegment {
    /// Endpoints in radians.
    pub p: TrianglePoint,
    pub q: TrianglePoint,
    /// Class kinds realized at each endpoint.
    pub p_kinds: Vec<Kind>,
    pub q_kinds: Vec<Kind>,
    /// Endpoints in units of `pi` when both parameters are exact.
    pub exact: Option<(QPoint, QPoint)>,
}

impl ESegment {
    pub fn is_point(&self) -> bool {
        self.p == self.q
    }
}

/// The set `E^{s1 s2}_{alpha1, alpha2}` of `PU(2,1)` elliptic classes
/// realized as `R_{alpha2}^{p2} R_{alpha1}^{p1}` with `sign(p_i) = s_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct ESigmaSet {
    pub sigma: (Sign, Sign),
    pub segments: Vec<ESegment>,
}

fn check_range(a: &Parameter) -> Result<()> {
    let x = a.angle();
    if x <= 0.0 || x >= 2.0 * PI / 3.0 {
        return Err(Error::ParameterOutOfRange(format!(
            "angle {x} outside (0, 2pi/3); normalize by a cube root of unity first"
        )));
    }
    Ok(())
}

pub fn e_sigma_segments(a1: &Parameter, a2: &Parameter, sigma: (Sign, Sign)) -> Result<ESigmaSet> {
    check_range(a1)?;
    check_range(a2)?;
    let segments = match (a1.pi_fraction(), a2.pi_fraction()) {
        (Some(x), Some(y)) => raw_segments(x, y, sigma.0, sigma.1)
            .into_iter()
            .map(|r| {
                let p = QPoint::new(r.p.0, r.p.1);
                let q = QPoint::new(r.q.0, r.q.1);
                ESegment {
                    p: p.to_radians(),
                    q: q.to_radians(),
                    p_kinds: r.pk,
                    q_kinds: r.qk,
                    exact: Some((p, q)),
                }
            })
            .collect(),
        _ => raw_segments(a1.angle() / PI, a2.angle() / PI, sigma.0, sigma.1)
            .into_iter()
            .map(|r| ESegment {
                p: TrianglePoint::new(r.p.0 * PI, r.p.1 * PI),
                q: TrianglePoint::new(r.q.0 * PI, r.q.1 * PI),
                p_kinds: r.pk,
                q_kinds: r.qk,
                exact: None,
            })
            .collect(),
    };
    Ok(ESigmaSet { sigma, segments })
}

pub const SIGMA_PAIRS: [(Sign, Sign); 4] = [
    (Sign::Neg, Sign::Neg),
    (Sign::Pos, Sign::Pos),
    (Sign::Pos, Sign::Neg),
    (Sign::Neg, Sign::Pos),
];

/// Realizing data of a length-2 decomposition: signs, tance, and the index
/// `k` with `w^k trace(F)` on the line `l_{alpha1 alpha2}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Length2Witness {
    pub sigma: (Sign, Sign),
    pub t: f64,
    pub lift: usize,
}

/// Sign pairs for which `pair_with_tance(t, ..)` is realizable.
pub(crate) fn feasible_sigmas(t: f64) -> Vec<(Sign, Sign)> {
    let eps = 1e-12;
    let mut out = Vec::new();
    if t >= -eps {
        out.push((Sign::Pos, Sign::Pos));
    }
    if t > 1.0 + eps {
        out.push((Sign::Neg, Sign::Neg));
    }
    if t <= eps {
        out.push((Sign::Pos, Sign::Neg));
        out.push((Sign::Neg, Sign::Pos));
    }
    out
}

pub(crate) fn snap_t(t: f64) -> f64 {
    if t.abs() < 1e-9 {
        0.0
    } else if (t - 1.0).abs() < 1e-9 {
        1.0
    } else {
        t
    }
}

/// Centers and product `R_{a2}^{p2} R_{a1}^{p1}` for tance `t` and signs `sigma`.
pub(crate) fn pair_product(
    a1: &Parameter,
    a2: &Parameter,
    t: f64,
    sigma: (Sign, Sign),
) -> Result<(ProjectivePoint, ProjectivePoint, Isometry)> {
    let (p1, p2) = pair_with_tance(t, sigma.0, sigma.1)?;
    let r1 = special_elliptic_raw(a1.value(), &p1)?;
    let r2 = special_elliptic_raw(a2.value(), &p2)?;
    Ok((p1, p2, r2.compose(&r1)))
}

/// Lifts `k` (with line parameters) for which `w^k tau` lies on `l_{a1 a2}`.
fn line_lifts(tau: C64, a1: &Parameter, a2: &Parameter) -> Vec<(usize, f64)> {
    let line = TangentLine::new(a1.value() * a2.value());
    omega_powers()
        .iter()
        .enumerate()
        .filter(|(_, w)| line.distance(tau * **w) <= 1e-7 * (1.0 + tau.norm()))
        .map(|(k, w)| (k, snap_t(t_on_line(a1.value(), a2.value(), tau * *w))))
        .collect()
}

fn canon_f(p: (f64, f64), tol: f64) -> (f64, f64) {
    let mut p = p;
    if (p.0 - 2.0).abs() <= tol {
        p = (p.1, 0.0);
    }
    if (p.0 - 2.0).abs() <= tol && p.1.abs() <= tol {
        p = (0.0, 0.0);
    }
    p
}

fn seg_dist(x: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    let d = (b.0 - a.0, b.1 - a.1);
    let l2 = d.0 * d.0 + d.1 * d.1;
    let s = if l2 == 0.0 {
        0.0
    } else {
        (((x.0 - a.0) * d.0 + (x.1 - a.1) * d.1) / l2).clamp(0.0, 1.0)
    };
    ((x.0 - a.0 - s * d.0).powi(2) + (x.1 - a.1 - s * d.1).powi(2)).sqrt()
}

/// Whether an elliptic class at `pt` (units of `pi`) of kind `kind` lies in the segment.
fn segment_admits(seg: &RawSeg<f64>, pt: (f64, f64), kind: Kind, tol: f64) -> bool {
    let c = canon_f(pt, tol);
    for (e, ks) in [(seg.p, &seg.pk), (seg.q, &seg.qk)] {
        let ce = canon_f(e, tol);
        if (ce.0 - c.0).abs() <= tol && (ce.1 - c.1).abs() <= tol && ks.contains(&kind) {
            return true;
        }
    }
    if kind != Kind::RegularElliptic {
        return false;
    }
    let twin = if pt.1.abs() <= tol { Some((2.0, pt.0)) } else { None };
    seg_dist(pt, seg.p, seg.q) <= tol || twin.is_some_and(|t| seg_dist(t, seg.p, seg.q) <= tol)
}

/// Length-2 decomposability of the class `key` with parameters `(a1, a2)`.
///
/// Elliptic classes are tested against the segment sets; loxodromic classes by
/// line membership; parabolic classes by building the candidate products.
pub fn length2_test(key: &ClassKey, a1: &Parameter, a2: &Parameter) -> Option<Length2Witness> {
    let (n1, _) = a1.normalized();
    let (n2, _) = a2.normalized();
    match key.kind {
        Kind::TwoStepA | Kind::TwoStepB => None,
        // R_{a2}^p R_{a1}^p is scalar iff a1 a2 is a cube root of unity
        Kind::Identity => {
            let s = a1.value() * a2.value();
            omega_powers()
                .iter()
                .position(|w| (s - w).norm() < 1e-9)
                .map(|k| Length2Witness { sigma: (Sign::Pos, Sign::Pos), t: 1.0, lift: k })
        }
        Kind::Loxodromic => {
            let tau = key.trace_rep_complex()?;
            line_lifts(tau, a1, a2).into_iter().find_map(|(k, t)| {
                feasible_sigmas(t).first().map(|&sigma| Length2Witness { sigma, t, lift: k })
            })
        }
        Kind::EllipticoParabolic | Kind::ThreeStep => {
            let tau = match key.angle_pair {
                Some(p) => unfolded_trace_unchecked(p.0, p.1),
                None => C64::new(3.0, 0.0),
            };
            for (k, t) in line_lifts(tau, a1, a2) {
                for sigma in feasible_sigmas(t) {
                    let Ok((_, _, prod)) = pair_product(a1, a2, t, sigma) else {
                        continue;
                    };
                    if prod.classify().is_ok_and(|pk| pk.matches(key, KEY_TOL)) {
                        return Some(Length2Witness { sigma, t, lift: k });
                    }
                }
            }
            None
        }
        _ => {
            let pair = key.angle_pair?;
            let pt = (pair.0 / PI, pair.1 / PI);
            let tau = unfolded_trace_unchecked(pair.0, pair.1);
            let lifts = line_lifts(tau, a1, a2);
            for sigma in SIGMA_PAIRS {
                let segs = raw_segments(n1.angle() / PI, n2.angle() / PI, sigma.0, sigma.1);
                if segs.iter().any(|s| segment_admits(s, pt, key.kind, 1e-6)) {
                    let (k, t) = lifts.first().copied().unwrap_or((0, f64::NAN));
                    return Some(Length2Witness { sigma, t, lift: k });
                }
            }
            None
        }
    }
}

// ---------------------------------------------------------------------------
// exact planar geometry

fn sub(a: QPoint, b: QPoint) -> (Q, Q) {
    (a.x - b.x, a.y - b.y)
}

fn cross(u: (Q, Q), v: (Q, Q)) -> Q {
    u.0 * v.1 - u.1 * v.0
}

fn orient(o: QPoint, a: QPoint, b: QPoint) -> Q {
    cross(sub(a, o), sub(b, o))
}

/// Intersection points of two closed segments (endpoints of the overlap when collinear).
fn seg_intersections(p: QPoint, r: QPoint, a: QPoint, b: QPoint) -> Vec<QPoint> {
    let z = Q::from_integer(0);
    let one = Q::from_integer(1);
    let d1 = sub(r, p);
    let d2 = sub(b, a);
    let den = cross(d1, d2);
    let w = sub(a, p);
    if den != z {
        let t = cross(w, d2) / den;
        let u = cross(w, d1) / den;
        if t >= z && t <= one && u >= z && u <= one {
            return vec![QPoint::new(p.x + t * d1.0, p.y + t * d1.1)];
        }
        return vec![];
    }
    if cross(d1, w) != z {
        return vec![];
    }
    let mut out = Vec::new();
    let on = |x: QPoint, s: QPoint, e: QPoint| {
        orient(s, e, x) == z
            && x.x >= s.x.min(e.x)
            && x.x <= s.x.max(e.x)
            && x.y >= s.y.min(e.y)
            && x.y <= s.y.max(e.y)
    };
    for x in [a, b] {
        if on(x, p, r) {
            out.push(x);
        }
    }
    for x in [p, r] {
        if on(x, a, b) {
            out.push(x);
        }
    }
    out
}

fn half(v: (Q, Q)) -> u8 {
    let z = Q::from_integer(0);
    if v.1 > z || (v.1 == z && v.0 > z) {
        0
    } else {
        1
    }
}

fn angle_cmp(u: (Q, Q), v: (Q, Q)) -> std::cmp::Ordering {
    half(u)
        .cmp(&half(v))
        .then_with(|| Q::from_integer(0).cmp(&cross(u, v)))
}

fn area2(poly: &[QPoint]) -> Q {
    let n = poly.len();
    (0..n).fold(Q::from_integer(0), |acc, i| {
        let a = poly[i];
        let b = poly[(i + 1) % n];
        acc + a.x * b.y - a.y * b.x
    })
}

/// Bounded faces (counterclockwise, collinear vertices removed) of the
/// subdivision cut out by closed segments.
fn faces(segs: &[(QPoint, QPoint)]) -> Vec<Vec<QPoint>> {
    let mut edges: BTreeSet<(QPoint, QPoint)> = BTreeSet::new();
    for (i, &(p, r)) in segs.iter().enumerate() {
        let mut pts = vec![p, r];
        for (j, &(a, b)) in segs.iter().enumerate() {
            if i != j {
                pts.extend(seg_intersections(p, r, a, b));
            }
        }
        let d = sub(r, p);
        pts.sort_by_key(|x| {
            let w = sub(*x, p);
            w.0 * d.0 + w.1 * d.1
        });
        pts.dedup();
        for w in pts.windows(2) {
            let (a, b) = if w[0] < w[1] { (w[0], w[1]) } else { (w[1], w[0]) };
            edges.insert((a, b));
        }
    }
    let mut adj: BTreeMap<QPoint, Vec<QPoint>> = BTreeMap::new();
    for &(a, b) in &edges {
        adj.entry(a).or_default().push(b);
        adj.entry(b).or_default().push(a);
    }
    for (v, ns) in adj.iter_mut() {
        let v = *v;
        ns.sort_by(|x, y| angle_cmp(sub(*x, v), sub(*y, v)));
    }
    let mut seen: BTreeSet<(QPoint, QPoint)> = BTreeSet::new();
    let mut out = Vec::new();
    for &(a, b) in &edges {
        for start in [(a, b), (b, a)] {
            if seen.contains(&start) {
                continue;
            }
            let mut poly = Vec::new();
            let (mut u, mut v) = start;
            while seen.insert((u, v)) {
                poly.push(u);
                let ns = &adj[&v];
                let i = ns.iter().position(|x| *x == u).expect("twin edge");
                let w = ns[(i + ns.len() - 1) % ns.len()];
                u = v;
                v = w;
            }
            if area2(&poly) > Q::from_integer(0) {
                out.push(simplify(poly));
            }
        }
    }
    out
}

fn simplify(poly: Vec<QPoint>) -> Vec<QPoint> {
    let n = poly.len();
    let keep: Vec<QPoint> = (0..n)
        .filter(|&i| orient(poly[(i + n - 1) % n], poly[i], poly[(i + 1) % n]) != Q::from_integer(0))
        .map(|i| poly[i])
        .collect();
    // start at the lexicographically smallest vertex for a stable listing
    let k = (0..keep.len()).min_by_key(|&i| keep[i]).unwrap_or(0);
    keep[k..].iter().chain(keep[..k].iter()).copied().collect()
}

fn on_segment(x: QPoint, a: QPoint, b: QPoint) -> bool {
    !seg_intersections(x, x, a, b).is_empty()
}

// ---------------------------------------------------------------------------
// chambers

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Full,
    Empty,
    Unknown,
}

/// Which rule decided a chamber's status.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Basis {
    NondiagonalSide,
    TraceZero,
    DiagonalCriterion,
    Synthesized,
    Undecided,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Chamber {
    /// Vertices in units of `pi`, counterclockwise.
    pub polygon: Vec<QPoint>,
    pub status: Status,
    pub basis: Basis,
    /// Point whose decomposability (or the diagonal criterion) fixed the status.
    pub witness: Option<QPoint>,
}

impl Chamber {
    /// Twice the area, in units of `pi^2`.
    pub fn area2(&self) -> Q {
        area2(&self.polygon)
    }

    pub fn centroid(&self) -> QPoint {
        let n = Q::from_integer(self.polygon.len() as i64);
        let (sx, sy) = self
            .polygon
            .iter()
            .fold((Q::from_integer(0), Q::from_integer(0)), |(x, y), p| (x + p.x, y + p.y));
        QPoint::new(sx / n, sy / n)
    }

    /// Whether `x` lies in the closed chamber.
    pub fn contains(&self, x: QPoint) -> bool {
        let n = self.polygon.len();
        (0..n).all(|i| orient(self.polygon[i], self.polygon[(i + 1) % n], x) >= Q::from_integer(0))
    }

    pub fn contains_interior(&self, x: QPoint) -> bool {
        let n = self.polygon.len();
        (0..n).all(|i| orient(self.polygon[i], self.polygon[(i + 1) % n], x) > Q::from_integer(0))
    }

    fn edges(&self) -> impl Iterator<Item = (QPoint, QPoint)> + '_ {
        let n = self.polygon.len();
        (0..n).map(move |i| (self.polygon[i], self.polygon[(i + 1) % n]))
    }
}

/// Chambers of `T` for a parameter, with their walls.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Atlas {
    /// Angle of the normalized parameter, in units of `pi`.
    pub a: Q,
    pub chambers: Vec<Chamber>,
    pub walls: Vec<WallSegment>,
}

impl Atlas {
    pub fn parameter(&self) -> Parameter {
        Parameter::from_pi_fraction(*self.a.numer(), *self.a.denom()).expect("valid parameter")
    }

    pub fn count(&self, s: Status) -> usize {
        self.chambers.iter().filter(|c| c.status == s).count()
    }

    /// Chamber whose closure contains `x`, preferring one containing it in the interior.
    pub fn locate(&self, x: QPoint) -> Option<&Chamber> {
        self.chambers
            .iter()
            .find(|c| c.contains_interior(x))
            .or_else(|| self.chambers.iter().find(|c| c.contains(x)))
    }

    pub fn summary(&self) -> AtlasSummary {
        AtlasSummary {
            a: self.a,
            chambers: self.chambers.len(),
            full: self.count(Status::Full),
            empty: self.count(Status::Empty),
            unknown: self.count(Status::Unknown),
        }
    }
}

/// Counts of chambers by status.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AtlasSummary {
    pub a: Q,
    pub chambers: usize,
    pub full: usize,
    pub empty: usize,
    pub unknown: usize,
}

impl AtlasSummary {
    pub fn fingerprint(&self) -> (usize, usize, usize, usize) {
        (self.chambers, self.full, self.empty, self.unknown)
    }
}

/// Normalized exact angle of `alpha` in units of `pi`.
fn exact_angle(alpha: &Parameter) -> Result<Q> {
    let (n, _) = alpha.normalized();
    n.pi_fraction().ok_or_else(|| {
        Error::InvalidInput("chamber computations need alpha = e^{i pi p/q}".into())
    })
}

/// Whether `a` (units of `pi`) is a multiple of `2/27`.
pub fn is_transition(a: Q) -> bool {
    (a / q(2, 27)).is_integer()
}

/// The closed chambers of `T` cut out by the walls of `alpha^3`, with status.
pub fn chambers(alpha: &Parameter) -> Result<Atlas> {
    let a = exact_angle(alpha)?;
    if is_transition(a) {
        return Err(Error::TransitionParameter(format!(
            "a = {a} pi is a multiple of 2pi/27; perturb the parameter"
        )));
    }
    static CACHE: OnceLock<Mutex<HashMap<Q, Atlas>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(at) = cache.lock().expect("atlas cache").get(&a) {
        return Ok(at.clone());
    }
    let at = build_atlas(a)?;
    cache.lock().expect("atlas cache").insert(a, at.clone());
    Ok(at)
}

fn triangle_sides() -> [(QPoint, QPoint); 3] {
    let z = Q::from_integer(0);
    let two = Q::from_integer(2);
    [
        (QPoint::new(z, z), QPoint::new(two, z)),
        (QPoint::new(two, z), QPoint::new(two, two)),
        (QPoint::new(z, z), QPoint::new(two, two)),
    ]
}

fn build_atlas(a: Q) -> Result<Atlas> {
    let ws = walls(a * 3).map_err(|e| Error::TransitionParameter(e.to_string()))?;
    let mut segs: Vec<(QPoint, QPoint)> = triangle_sides().to_vec();
    segs.extend(ws.iter().map(|w| (w.p, w.q)));
    let polys = faces(&segs);
    let alpha = Parameter::from_pi_fraction(*a.numer(), *a.denom())?;
    let trace_zero = QPoint::new(q(4, 3), q(2, 3));
    let z = Q::from_integer(0);
    let two = Q::from_integer(2);
    let mut chambers = Vec::with_capacity(polys.len());
    for polygon in polys {
        let mut ch = Chamber {
            polygon,
            status: Status::Unknown,
            basis: Basis::Undecided,
            witness: None,
        };
        let nondiag = ch
            .edges()
            .find(|(p, r)| (p.y == z && r.y == z) || (p.x == two && r.x == two));
        let diag = ch.edges().find(|(p, r)| p.x == p.y && r.x == r.y);
        if let Some((p, r)) = nondiag {
            ch.status = Status::Full;
            ch.basis = Basis::NondiagonalSide;
            ch.witness = Some(QPoint::new((p.x + r.x) / 2, (p.y + r.y) / 2));
        } else if ch.contains_interior(trace_zero) {
            ch.status = Status::Full;
            ch.basis = Basis::TraceZero;
            ch.witness = Some(trace_zero);
        } else if let Some((p, r)) = diag {
            let theta = (p.x + r.x) / 2;
            let full = diag_chamber_full(theta, &alpha)?;
            ch.status = if full { Status::Full } else { Status::Empty };
            ch.basis = Basis::DiagonalCriterion;
            ch.witness = Some(QPoint::new(theta, theta));
        } else {
            let c = ch.centroid();
            let f = elliptic_with_pair(qf(c.x) * PI, qf(c.y) * PI);
            if crate::decomposer::synthesize_elliptic(&f, &alpha, crate::decomposer::DEFAULT_BUDGET).is_ok() {
                ch.status = Status::Full;
                ch.basis = Basis::Synthesized;
                ch.witness = Some(c);
            }
        }
        chambers.push(ch);
    }
    chambers.sort_by(|x, y| x.polygon.cmp(&y.polygon));
    Ok(Atlas { a, chambers, walls: ws })
}

/// Diagonal representative `diag(e^{i t1} v, e^{i t2} v, v)` of an angle pair.
pub fn elliptic_with_pair(theta1: f64, theta2: f64) -> Isometry {
    let v = C64::from_polar(1.0, -(theta1 + theta2) / 3.0);
    let m = Mat3::from_diagonal(&Vec3::new(
        v * C64::from_polar(1.0, theta1),
        v * C64::from_polar(1.0, theta2),
        v,
    ));
    Isometry::new(m).expect("diagonal unitary")
}

fn canon_q(p: (Q, Q)) -> (Q, Q) {
    let z = Q::from_integer(0);
    let two = Q::from_integer(2);
    let mut p = p;
    if p.0 == two {
        p = (p.1, z);
    }
    if p == (two, z) {
        p = (z, z);
    }
    p
}

fn on_boundary(p: (Q, Q)) -> bool {
    let z = Q::from_integer(0);
    p.1 == z || p.0 == Q::from_integer(2) || p.0 == p.1
}

fn kinds_at(seg: &RawSeg<Q>, x: (Q, Q)) -> Vec<Kind> {
    let mut out = Vec::new();
    if canon_q(seg.p) == canon_q(x) {
        out.extend(seg.pk.iter().copied());
    }
    if canon_q(seg.q) == canon_q(x) {
        out.extend(seg.qk.iter().copied());
    }
    out
}

fn sets_meet(u: &[RawSeg<Q>], v: &[RawSeg<Q>]) -> bool {
    let pt = |p: (Q, Q)| QPoint::new(p.0, p.1);
    for s in u {
        for r in v {
            for x in seg_intersections(pt(s.p), pt(s.q), pt(r.p), pt(r.q)) {
                let xp = (x.x, x.y);
                if !on_boundary(xp) {
                    return true;
                }
                let ks = kinds_at(s, xp);
                if kinds_at(r, xp).iter().any(|k| ks.contains(k)) {
                    return true;
                }
            }
            // boundary endpoints meeting through the side identification
            for (e, ek) in [(s.p, &s.pk), (s.q, &s.qk)] {
                if !on_boundary(e) {
                    continue;
                }
                for (f, fk) in [(r.p, &r.pk), (r.q, &r.qk)] {
                    if canon_q(e) == canon_q(f) && ek.iter().any(|k| fk.contains(k)) {
                        return true;
                    }
                }
            }
        }
    }
    false
}

/// Diagonal criterion: the chamber containing `(theta, theta)` (units of `pi`)
/// in its closure is full iff `E^{--}_{a,a} + E^{++}_{a,a}` meets
/// `E^{--}_{b,conj a} + E^{-+}_{b,conj a}` with `b = theta / 3`.
pub fn diag_chamber_full(theta: Q, alpha: &Parameter) -> Result<bool> {
    let a = exact_angle(alpha)?;
    let z = Q::from_integer(0);
    let two = Q::from_integer(2);
    if theta <= z || theta >= two {
        return Err(Error::OutOfTriangle);
    }
    let x = QPoint::new(theta, theta);
    if walls(a * 3)?.iter().any(|w| on_segment(x, w.p, w.q)) {
        return Err(Error::OnWall);
    }
    let b = theta / 3;
    let ac = q(2, 3) - a;
    use Sign::*;
    let mut u = raw_segments(a, a, Neg, Neg);
    u.extend(raw_segments(a, a, Pos, Pos));
    let mut v = raw_segments(b, ac, Neg, Neg);
    v.extend(raw_segments(b, ac, Neg, Pos));
    Ok(sets_meet(&u, &v))
}

/// One grid point of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub a: Q,
    /// `None` at transition parameters.
    pub summary: Option<AtlasSummary>,
}

/// A status-pattern change between consecutive evaluated grid points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Transition {
    pub from: Q,
    pub to: Q,
    /// Nearest multiple of `2/27`.
    pub nearest: Q,
    /// Distance from the bracket to `nearest`, in grid steps.
    pub steps_away: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sweep {
    pub step: Q,
    pub points: Vec<SweepPoint>,
    pub transitions: Vec<Transition>,
}

impl Sweep {
    /// Grid points whose atlas has an empty chamber.
    pub fn with_empty(&self) -> Vec<Q> {
        self.points
            .iter()
            .filter(|p| p.summary.is_some_and(|s| s.empty > 0))
            .map(|p| p.a)
            .collect()
    }
}

/// Atlases on `steps` equally spaced angles from `a_from` to `a_to` (units of `pi`).
pub fn sweep(a_from: Q, a_to: Q, steps: usize) -> Result<Sweep> {
    let z = Q::from_integer(0);
    if a_from <= z || a_to >= q(2, 3) || a_from > a_to || steps == 0 {
        return Err(Error::ParameterOutOfRange(format!(
            "sweep range [{a_from}, {a_to}] with {steps} steps"
        )));
    }
    let step = if steps > 1 {
        (a_to - a_from) / Q::from_integer(steps as i64 - 1)
    } else {
        z
    };
    let grid: Vec<Q> = (0..steps).map(|k| a_from + step * Q::from_integer(k as i64)).collect();
    let threads = std::thread::available_parallelism().map_or(1, |n| n.get()).min(8);
    let chunk = grid.len().div_ceil(threads);
    let mut points: Vec<SweepPoint> = Vec::with_capacity(grid.len());
    let results: Vec<Result<Vec<SweepPoint>>> = std::thread::scope(|sc| {
        let handles: Vec<_> = grid
            .chunks(chunk.max(1))
            .map(|part| {
                sc.spawn(move || {
                    part.iter()
                        .map(|&a| {
                            if is_transition(a) {
                                return Ok(SweepPoint { a, summary: None });
                            }
                            let p = Parameter::from_pi_fraction(*a.numer(), *a.denom())?;
                            Ok(SweepPoint {
                                a,
                                summary: Some(chambers(&p)?.summary()),
                            })
                        })
                        .collect()
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("sweep worker")).collect()
    });
    for r in results {
        points.extend(r?);
    }
    let mut transitions = Vec::new();
    let evaluated: Vec<(Q, AtlasSummary)> =
        points.iter().filter_map(|p| p.summary.map(|s| (p.a, s))).collect();
    for w in evaluated.windows(2) {
        if w[0].1.fingerprint() != w[1].1.fingerprint() {
            let mid = (w[0].0 + w[1].0) / 2;
            let unit = q(2, 27);
            let nearest = (mid / unit).round() * unit;
            let dist = if nearest < w[0].0 {
                w[0].0 - nearest
            } else if nearest > w[1].0 {
                nearest - w[1].0
            } else {
                z
            };
            let steps_away = if step == z { 0.0 } else { qf(dist / step) };
            transitions.push(Transition {
                from: w[0].0,
                to: w[1].0,
                nearest,
                steps_away,
            });
        }
    }
    Ok(Sweep {
        step,
        points,
        transitions,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(n: i64, d: i64) -> Parameter {
        Parameter::from_pi_fraction(n, d).unwrap()
    }

    #[test]
    fn corollary_sets() {
        let a = p(1, 9);
        let s = e_sigma_segments(&a, &a, (Sign::Neg, Sign::Neg)).unwrap();
        let (x, y) = s.segments[0].exact.unwrap();
        assert_eq!(x, QPoint::new(q(2, 3), q(2, 3)));
        assert_eq!(y, QPoint::new(q(2, 1), q(4, 3)));
        for sg in [(Sign::Pos, Sign::Neg), (Sign::Neg, Sign::Pos)] {
            let s = e_sigma_segments(&a, &a, sg).unwrap();
            assert_eq!(s.segments.len(), 1);
            assert!(s.segments[0].is_point());
            assert_eq!(s.segments[0].exact.unwrap().0, QPoint::new(q(1, 3), q(0, 1)));
        }
        let b = p(1, 5);
        let s = e_sigma_segments(&a, &b, (Sign::Pos, Sign::Neg)).unwrap();
        assert!(!s.segments[0].is_point());
    }

    #[test]
    fn out_of_range() {
        let a = p(5, 6);
        assert!(matches!(
            e_sigma_segments(&a, &a, (Sign::Pos, Sign::Pos)),
            Err(Error::ParameterOutOfRange(_))
        ));
    }

    #[test]
    fn arrangement_of_square() {
        let z = Q::from_integer(0);
        let o = Q::from_integer(1);
        let pt = QPoint::new;
        let segs = vec![
            (pt(z, z), pt(o, z)),
            (pt(o, z), pt(o, o)),
            (pt(o, o), pt(z, o)),
            (pt(z, o), pt(z, z)),
            (pt(z, z), pt(o, o)),
        ];
        let fs = faces(&segs);
        assert_eq!(fs.len(), 2);
        for f in &fs {
            assert_eq!(f.len(), 3);
            assert_eq!(area2(f), o);
        }
    }

    #[test]
    fn diagonal_examples() {
        let th = [q(3, 4), q(5, 4)];
        for t in th {
            assert!(diag_chamber_full(t, &p(1, 9)).unwrap());
            assert!(!diag_chamber_full(t, &p(1, 3)).unwrap());
        }
    }
}
