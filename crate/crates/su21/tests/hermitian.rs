mod common;

use common::*;
use proptest::prelude::*;
use su21::hermitian::*;
use su21::{Error, Vec3, C64};

fn pt(x: [f64; 3]) -> ProjectivePoint {
    ProjectivePoint::from_reals(x).unwrap()
}

fn e(k: usize) -> ProjectivePoint {
    ProjectivePoint::basis(k)
}

#[test]
fn herm_examples() {
    assert_eq!(herm(&pt([1.0, 0.0, 0.0]), &pt([0.0, 0.0, 1.0])), c(0.0, 0.0));
    assert_eq!(herm(&pt([0.0, 0.0, 1.0]), &pt([0.0, 0.0, 1.0])), c(-1.0, 0.0));
    assert_eq!(herm(&pt([2.0, 0.0, 1.0]), &pt([2.0, 0.0, 1.0])), c(3.0, 0.0));
}

#[test]
fn tance_examples() {
    let p = pt([0.3, -1.0, 0.2]);
    assert!((tance(&p, &p).unwrap() - 1.0).abs() < 1e-15);
    assert_eq!(tance(&e(0), &e(2)).unwrap(), 0.0);
    assert!((tance(&e(0), &pt([2.0, 0.0, 1.0])).unwrap() - 4.0 / 3.0).abs() < 1e-15);
    assert_eq!(tance(&e(0), &pt([1.0, 0.0, 1.0])), Err(Error::IsotropicPoint));
}

#[test]
fn line_examples() {
    let l = line_through(&e(0), &e(1)).unwrap();
    assert_eq!(l.kind, LineKind::Spherical);
    assert!(l.polar.same_point(&e(2), 1e-12));

    let l = line_through(&e(0), &pt([2.0, 0.0, 1.0])).unwrap();
    assert_eq!(l.kind, LineKind::Hyperbolic);
    assert!(l.polar.same_point(&e(1), 1e-12));

    let l = line_through(&pt([1.0, 0.0, 1.0]), &e(1)).unwrap();
    assert_eq!(l.kind, LineKind::Euclidean);
    assert!(l.polar.same_point(&pt([1.0, 0.0, 1.0]), 1e-12));

    assert_eq!(line_through(&e(0), &pt([-3.0, 0.0, 0.0])), Err(Error::CoincidentPoints));
}

#[test]
fn orthogonal_examples() {
    let l = line_through(&e(0), &e(2)).unwrap();
    assert!(orthogonal_in_line(&l, &e(0)).unwrap().same_point(&e(2), 1e-12));

    let l = line_through(&e(0), &pt([2.0, 0.0, 1.0])).unwrap();
    assert!(orthogonal_in_line(&l, &e(0)).unwrap().same_point(&e(2), 1e-12));

    // Euclidean line through its own polar direction.
    let iso = pt([1.0, 0.0, 1.0]);
    let l = line_through(&iso, &e(1)).unwrap();
    assert_eq!(orthogonal_in_line(&l, &e(1)), Err(Error::DegenerateOrthogonal));
    assert_eq!(orthogonal_in_line(&l, &e(0)), Err(Error::PointNotOnLine));
}

#[test]
fn pair_examples() {
    let (p, q) = pair_with_tance(0.0, Sign::Pos, Sign::Pos).unwrap();
    assert_eq!(tance(&p, &q).unwrap(), 0.0);
    assert_eq!((p.sig, q.sig), (1, 1));

    let (p, q) = pair_with_tance(4.0 / 3.0, Sign::Pos, Sign::Pos).unwrap();
    assert!((tance(&p, &q).unwrap() - 4.0 / 3.0).abs() < 1e-14);

    let (p, q) = pair_with_tance(1.0, Sign::Pos, Sign::Pos).unwrap();
    assert_eq!(line_through(&p, &q).unwrap().kind, LineKind::Euclidean);
}

#[test]
fn pair_feasibility_table() {
    use Sign::*;
    let cases = [
        (0.5, Pos, Pos, true),
        (-0.5, Pos, Pos, false),
        (2.0, Pos, Pos, true),
        (2.0, Neg, Neg, true),
        (0.5, Neg, Neg, false),
        (-0.5, Neg, Neg, false),
        (-0.5, Pos, Neg, true),
        (0.5, Pos, Neg, false),
        (-3.0, Neg, Pos, true),
        (3.0, Neg, Pos, false),
    ];
    for (t, s1, s2, ok) in cases {
        let r = pair_with_tance(t, s1, s2);
        assert_eq!(r.is_ok(), ok, "{t} {s1:?} {s2:?}");
        if let Ok((p, q)) = r {
            assert_eq!((p.sign(), q.sign()), (Some(s1), Some(s2)));
            assert!((tance(&p, &q).unwrap() - t).abs() < 1e-12);
        }
    }
}

#[test]
fn triple_examples() {
    use Sign::*;
    let [p1, p2, p3] = triple_from_gram(0.0, 0.0, 0.0, [Pos, Pos, Neg], 0.0).unwrap();
    assert_eq!(tance(&p1, &p2).unwrap(), 0.0);
    assert_eq!(tance(&p2, &p3).unwrap(), 0.0);
    assert_eq!(tance(&p1, &p3).unwrap(), 0.0);

    let [p1, p2, p3] = triple_from_gram(4.0 / 3.0, 0.0, 0.0, [Pos, Pos, Pos], 0.0).unwrap();
    assert!((tance(&p1, &p2).unwrap() - 4.0 / 3.0).abs() < 1e-12);
    assert!(tance(&p2, &p3).unwrap().abs() < 1e-12);
    assert!(herm(&p2, &p3).norm() < 1e-12);

    // Three mutually orthogonal positive points would need signature +++.
    assert!(matches!(
        triple_from_gram(0.0, 0.0, 0.0, [Pos, Pos, Pos], 0.0),
        Err(Error::Unrealizable(_))
    ));
}

fn arb_point() -> impl Strategy<Value = ProjectivePoint> {
    prop::array::uniform6(-1.0f64..1.0).prop_filter_map("isotropic", |x| {
        let v = Vec3::new(c(x[0], x[1]), c(x[2], x[3]), c(x[4], x[5]));
        let p = ProjectivePoint::new(v).ok()?;
        (p.norm().abs() > 0.05 * v.norm_squared()).then_some(p)
    })
}

fn arb_scalar() -> impl Strategy<Value = C64> {
    (0.1f64..10.0, 0.0f64..std::f64::consts::TAU).prop_map(|(r, a)| C64::from_polar(r, a))
}

fn triple_product(p: &[ProjectivePoint; 3]) -> C64 {
    herm(&p[0], &p[1]) * herm(&p[1], &p[2]) * herm(&p[2], &p[0]) / (p[0].norm() * p[1].norm() * p[2].norm())
}

proptest! {
    #[test]
    fn tance_is_scale_invariant(p in arb_point(), q in arb_point(), l in arb_scalar(), m in arb_scalar()) {
        let t = tance(&p, &q).unwrap();
        let lp = ProjectivePoint::new(p.coords * l).unwrap();
        let mq = ProjectivePoint::new(q.coords * m).unwrap();
        prop_assert_eq!(lp.sig, p.sig);
        let t2 = tance(&lp, &mq).unwrap();
        prop_assert!((t - t2).abs() <= 1e-12 * t.abs().max(1.0));
    }

    #[test]
    fn sylvester_consistency(p in arb_point(), q in arb_point()) {
        prop_assume!(!p.same_point(&q, 1e-6));
        let t = tance(&p, &q).unwrap();
        prop_assume!((t - 1.0).abs() > 1e-6 && t.abs() > 1e-9);
        let l = line_through(&p, &q).unwrap();
        prop_assert_eq!(l.kind, kind_from_tance(t, 1e-9));
    }

    #[test]
    fn orthogonal_round_trip(p in arb_point(), q in arb_point()) {
        prop_assume!(!p.same_point(&q, 1e-6));
        let l = line_through(&p, &q).unwrap();
        prop_assume!(l.kind == LineKind::Hyperbolic);
        let o = orthogonal_in_line(&l, &p).unwrap();
        let s = p.coords.norm() * o.coords.norm();
        prop_assert!(herm(&o, &p).norm() <= 1e-10 * s);
        prop_assert!(orthogonal_in_line(&l, &o).unwrap().same_point(&p, 1e-8));
        prop_assert_eq!(o.sig, -p.sig);
    }

    #[test]
    fn triple_round_trip(p1 in arb_point(), p2 in arb_point(), p3 in arb_point()) {
        let pts = [p1, p2, p3];
        let t1 = tance(&pts[0], &pts[1]).unwrap();
        let t2 = tance(&pts[1], &pts[2]).unwrap();
        let tp = triple_product(&pts);
        let signs = [pts[0].sign().unwrap(), pts[1].sign().unwrap(), pts[2].sign().unwrap()];
        let built = triple_from_gram(t1, t2, tp.re, signs, tp.im).unwrap();
        let rel = |a: f64, b: f64| (a - b).abs() <= 1e-9 * a.abs().max(1.0);
        prop_assert!(rel(tance(&built[0], &built[1]).unwrap(), t1));
        prop_assert!(rel(tance(&built[1], &built[2]).unwrap(), t2));
        let bp = triple_product(&built);
        prop_assert!(rel(bp.re, tp.re) && rel(bp.im, tp.im));
        for (b, s) in built.iter().zip(signs) {
            prop_assert_eq!(b.sign(), Some(s));
        }
    }
}

#[test]
fn random_points_have_consistent_signs() {
    let mut r = rng(5);
    for _ in 0..200 {
        let p = point(&mut r);
        assert_eq!(p.sig as f64, p.norm().signum());
    }
}
