mod common;

use std::f64::consts::PI;

use common::*;
use rand::Rng;
use su21::atlas::*;
use su21::decomposer::{decompose3, synthesize_elliptic};
use su21::hermitian::Sign;
use su21::isometry::*;
use su21::trace_geometry::boundary_traces;
use su21::unfolded::*;
use su21::{omega_powers, Error};

fn p(n: i64, d: i64) -> Parameter {
    Parameter::from_pi_fraction(n, d).unwrap()
}

use Sign::{Neg, Pos};

#[test]
fn corollary_sets() {
    for (n, d) in [(1, 9), (1, 5), (2, 7), (1, 3)] {
        let a = q(n, d);
        let al = p(n, d);
        let s = e_sigma_segments(&al, &al, (Neg, Neg)).unwrap();
        assert_eq!(s.segments.len(), 1);
        let (x, y) = s.segments[0].exact.unwrap();
        assert_eq!(x, QPoint::new(a * 6, a * 6));
        assert_eq!(y, QPoint::new(q(2, 1), q(1, 1) + a * 3));
        for sg in [(Pos, Neg), (Neg, Pos)] {
            let s = e_sigma_segments(&al, &al, sg).unwrap();
            assert_eq!(s.segments.len(), 1);
            assert!(s.segments[0].is_point());
            let (x, _) = s.segments[0].exact.unwrap();
            let twin = QPoint::new(q(2, 1), a * 3);
            assert!(x == QPoint::new(a * 3, q(0, 1)) || x == twin, "{x:?}");
        }
    }
}

#[test]
fn mixed_sets_degenerate_only_on_the_diagonal() {
    let mut r = rng(20);
    for _ in 0..200 {
        let (_, a1) = exact_parameter(&mut r);
        let (_, a2) = exact_parameter(&mut r);
        let (a1, a2) = (a1.normalized().0, a2.normalized().0);
        for sg in [(Pos, Neg), (Neg, Pos)] {
            let s = e_sigma_segments(&a1, &a2, sg).unwrap();
            let point = s.segments.iter().all(|x| x.is_point());
            assert_eq!(point, a1 == a2, "{:?} {:?}", a1.pi_fraction(), a2.pi_fraction());
        }
    }
}

#[test]
fn out_of_range_parameters() {
    for (n, d) in [(5, 6), (3, 4), (3, 2)] {
        let a = p(n, d);
        assert!(matches!(
            e_sigma_segments(&a, &p(1, 9), (Pos, Pos)),
            Err(Error::ParameterOutOfRange(_))
        ));
    }
}

fn slope_m1(s: &ESegment) -> bool {
    let dx = s.q.theta1 - s.p.theta1;
    let dy = s.q.theta2 - s.p.theta2;
    dx.abs() > 1e-12 && (dy + dx).abs() < 1e-9
}

#[test]
fn only_plus_plus_has_slope_minus_one() {
    let mut r = rng(21);
    for _ in 0..100 {
        let a1 = parameter(&mut r).normalized().0;
        let a2 = parameter(&mut r).normalized().0;
        for sg in SIGMA_PAIRS {
            let s = e_sigma_segments(&a1, &a2, sg).unwrap();
            if sg != (Pos, Pos) {
                assert!(!s.segments.iter().any(slope_m1), "{sg:?}");
            }
        }
    }
}

fn same_segments(a: &ESigmaSet, b: &ESigmaSet) -> bool {
    let key = |s: &ESegment| {
        let c = |t: TrianglePoint| canonicalize(t.theta1, t.theta2);
        let (x, y) = (c(s.p), c(s.q));
        let (x, y) = if (x.theta1, x.theta2) <= (y.theta1, y.theta2) { (x, y) } else { (y, x) };
        [x.theta1, x.theta2, y.theta1, y.theta2]
    };
    let mut u: Vec<_> = a.segments.iter().map(key).collect();
    let mut v: Vec<_> = b.segments.iter().map(key).collect();
    u.sort_by(|x, y| x.partial_cmp(y).unwrap());
    v.sort_by(|x, y| x.partial_cmp(y).unwrap());
    u.len() == v.len() && u.iter().zip(&v).all(|(x, y)| x.iter().zip(y).all(|(s, t)| (s - t).abs() < 1e-9))
}

#[test]
fn swapping_factors_swaps_signs() {
    let mut r = rng(22);
    for _ in 0..200 {
        let a1 = parameter(&mut r).normalized().0;
        let a2 = parameter(&mut r).normalized().0;
        for (s1, s2) in SIGMA_PAIRS {
            let x = e_sigma_segments(&a1, &a2, (s1, s2)).unwrap();
            let y = e_sigma_segments(&a2, &a1, (s2, s1)).unwrap();
            assert!(same_segments(&x, &y), "{a1:?} {a2:?} {s1:?}{s2:?}\n{x:?}\n{y:?}");
        }
    }
}

#[test]
fn endpoints_map_to_boundary_or_boundary_traces() {
    let mut r = rng(23);
    let w = omega_powers();
    for _ in 0..100 {
        let a1 = parameter(&mut r).normalized().0;
        let a2 = parameter(&mut r).normalized().0;
        let b = boundary_traces(a1.angle(), a2.angle()).unwrap();
        for sg in SIGMA_PAIRS {
            for s in e_sigma_segments(&a1, &a2, sg).unwrap().segments {
                for e in [s.p, s.q] {
                    let z = unfolded_trace(e).unwrap();
                    let on_edge = deltoid_f(z).abs() < 1e-8 * (1.0 + z.norm_sqr());
                    let special = [b.a, b.b, b.c, b.d]
                        .iter()
                        .any(|v| w.iter().any(|k| (k * v - z).norm() < 1e-8));
                    assert!(on_edge || special, "{e:?} {z}");
                }
            }
        }
    }
}

#[test]
fn length2_examples() {
    let a = p(1, 9);
    let id = Isometry::identity().classify().unwrap();
    assert!(length2_test(&id, &a, &a.conj()).is_some());
    assert!(length2_test(&id, &a, &a).is_none());

    // trace 4: eigenvalues r, 1, 1/r with r + 1/r = 3
    let r = (3.0 + 5f64.sqrt()) / 2.0;
    let lox = loxodromic_at(&mut rng(24), r.ln(), 0.0);
    assert!((lox.trace() - 4.0).norm() < 1e-9);
    let key = lox.classify().unwrap();
    assert_eq!(key.kind, Kind::Loxodromic);
    assert!(length2_test(&key, &a, &a.conj()).is_some());
    assert!(length2_test(&key, &p(1, 3), &p(1, 3)).is_some());
    assert!(length2_test(&key, &a, &a).is_none());

    // E^{--}_{a,a} endpoint (6a, 6a) is a special elliptic class with negative center
    // at a = pi/3 the endpoint is the cusp (2 pi, 2 pi)
    for (n, d) in [(1, 9), (1, 4), (2, 7)] {
        let x = 6.0 * PI * n as f64 / d as f64;
        let f = conj(&elliptic_with_pair(x, x), &mut rng(25));
        let key = f.classify().unwrap();
        assert_eq!(key.kind, Kind::SpecialEllipticNeg, "{n}/{d}");
        let al = p(n, d);
        let wit = length2_test(&key, &al, &al).unwrap();
        assert_eq!(wit.sigma, (Neg, Neg));
    }
}

#[test]
fn length2_agrees_with_products() {
    let mut r = rng(26);
    for _ in 0..200 {
        let a1 = parameter(&mut r);
        let a2 = parameter(&mut r);
        let (x, y) = (point(&mut r), point(&mut r));
        let f = special_elliptic(&a2, &y).unwrap().compose(&special_elliptic(&a1, &x).unwrap());
        let Ok(key) = f.classify() else { continue };
        if key.kind.is_two_step() || key.kind == Kind::Identity {
            continue;
        }
        assert!(length2_test(&key, &a1, &a2).is_some(), "{key:?}");
    }
}

#[test]
fn diagonal_criterion_examples() {
    for t in [q(3, 4), q(5, 4)] {
        assert!(diag_chamber_full(t, &p(1, 9)).unwrap());
        assert!(!diag_chamber_full(t, &p(1, 3)).unwrap());
    }
    assert_eq!(diag_chamber_full(q(1, 1), &p(1, 9)), Err(Error::OnWall));
    assert_eq!(diag_chamber_full(q(0, 1), &p(1, 9)), Err(Error::OutOfTriangle));
}

#[test]
fn chambers_at_pi_over_nine_and_pi_over_three() {
    let a = chambers(&p(1, 9)).unwrap();
    assert!(!a.chambers.is_empty());
    assert_eq!(a.count(Status::Empty), 0);
    assert_eq!(a.count(Status::Unknown), 0);

    let b = chambers(&p(1, 3)).unwrap();
    assert_eq!(b.count(Status::Empty), 2);
    assert_eq!(b.count(Status::Unknown), 0);
    for c in b.chambers.iter().filter(|c| c.status == Status::Empty) {
        // empty chambers sit on the diagonal and nowhere on the other sides
        assert!(c.polygon.iter().any(|v| v.x == v.y));
        let zero = q(0, 1);
        let two = q(2, 1);
        let n = c.polygon.len();
        for i in 0..n {
            let (u, v) = (c.polygon[i], c.polygon[(i + 1) % n]);
            assert!(!(u.y == zero && v.y == zero) && !(u.x == two && v.x == two));
        }
    }
}

#[test]
fn gallery_fixtures() {
    let want: [(i64, usize, usize); 9] = [
        (1, 10, 0),
        (3, 10, 0),
        (5, 9, 1),
        (7, 9, 1),
        (9, 8, 2),
        (11, 9, 1),
        (13, 9, 1),
        (15, 10, 0),
        (17, 10, 0),
    ];
    for (k, full, empty) in want {
        let s = chambers(&p(k, 27)).unwrap().summary();
        assert_eq!((s.chambers, s.full, s.empty, s.unknown), (10, full, empty, 0), "k={k}");
    }
    for k in (2..=16).step_by(2) {
        assert!(matches!(chambers(&p(k, 27)), Err(Error::TransitionParameter(_))), "k={k}");
    }
}

#[test]
fn chambers_cover_the_triangle() {
    for (n, d) in [(1, 9), (1, 3), (5, 27), (13, 27), (1, 7), (3, 11), (7, 12)] {
        let a = chambers(&p(n, d)).unwrap();
        let total: Q = a.chambers.iter().map(|c| c.area2()).sum();
        // T has area 2 pi^2
        assert_eq!(total, q(4, 1), "{n}/{d}");
        for c in &a.chambers {
            assert!(c.area2() > q(0, 1));
            assert!(c.polygon.iter().all(|v| v.in_triangle()));
        }
        for (i, c) in a.chambers.iter().enumerate() {
            let x = c.centroid();
            assert!(c.contains_interior(x));
            for (j, e) in a.chambers.iter().enumerate() {
                if i != j {
                    assert!(!e.contains_interior(x));
                }
            }
        }
    }
}

#[test]
fn sweep_examples() {
    let s = sweep(q(1, 216), q(143, 216), 143).unwrap();
    assert_eq!(s.points.len(), 143);
    for t in &s.transitions {
        assert!(t.steps_away <= 1.0, "{t:?}");
        assert!(is_transition(t.nearest));
    }
    let hits: Vec<Q> = s.transitions.iter().map(|t| t.nearest).collect();
    for k in [4, 8, 10, 14] {
        assert!(hits.contains(&q(k, 27)), "{k}/27 missing: {hits:?}");
    }
    for a in s.with_empty() {
        assert!(a > q(4, 27) && a < q(14, 27), "{a}");
    }
    let step = q(1, 216);
    let lo = s.with_empty().into_iter().min().unwrap();
    let hi = s.with_empty().into_iter().max().unwrap();
    assert!(lo - q(4, 27) <= step && q(14, 27) - hi <= step, "{lo} {hi}");
    assert!(sweep(q(0, 1), q(1, 3), 5).is_err());
}

fn interior_samples(c: &Chamber, r: &mut Rng64, n: usize) -> Vec<TrianglePoint> {
    let poly: Vec<TrianglePoint> = c.polygon.iter().map(|v| v.to_radians()).collect();
    let mut out = Vec::new();
    while out.len() < n {
        let k = r.gen_range(1..poly.len() - 1);
        let (mut u, mut v) = (r.gen_range(0.05..0.9), r.gen_range(0.05..0.9));
        if u + v > 0.95 {
            u = 0.95 - u;
            v = 0.95 - v;
        }
        let (a, b, cc) = (poly[0], poly[k], poly[k + 1]);
        let x = TrianglePoint::new(
            a.theta1 + u * (b.theta1 - a.theta1) + v * (cc.theta1 - a.theta1),
            a.theta2 + u * (b.theta2 - a.theta2) + v * (cc.theta2 - a.theta2),
        );
        if x.theta2 > 1e-3 && x.theta1 - x.theta2 > 1e-3 && x.theta1 < 2.0 * PI - 1e-3 {
            out.push(x);
        }
    }
    out
}

#[test]
fn full_chambers_decompose() {
    let mut r = rng(27);
    for (n, d) in [(1, 9), (1, 3), (7, 27)] {
        let al = p(n, d);
        let atlas = chambers(&al).unwrap();
        for c in atlas.chambers.iter().filter(|c| c.status == Status::Full) {
            for x in interior_samples(c, &mut r, 20) {
                let f = regular_elliptic_at(&mut r, x.theta1, x.theta2);
                let dec = decompose3(&f, &al).unwrap_or_else(|e| panic!("{n}/{d} {x:?}: {e}"));
                assert!(dec.residual <= 1e-8);
                assert_eq!(dec.len(), 3);
            }
        }
    }
}

#[test]
fn empty_chambers_resist_search() {
    let mut r = rng(28);
    let al = p(1, 3);
    let atlas = chambers(&al).unwrap();
    for c in atlas.chambers.iter().filter(|c| c.status == Status::Empty) {
        for x in interior_samples(c, &mut r, 3) {
            let f = regular_elliptic_at(&mut r, x.theta1, x.theta2);
            assert!(synthesize_elliptic(&f, &al, 300).is_err());
            assert!(matches!(decompose3(&f, &al), Err(Error::NotDecomposable)));
        }
        let diag: Vec<Q> = c.polygon.iter().filter(|v| v.x == v.y).map(|v| v.x).collect();
        if diag.len() >= 2 {
            let mid = (diag[0] + diag[1]) / 2;
            assert!(!diag_chamber_full(mid, &al).unwrap());
        }
    }
}
