use epoch_gda::vecspace::{project, project_intersection};
use epoch_gda::{ConvexSet, Point};
use proptest::prelude::*;

fn coords(d: usize, s: f64) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-s..s, d)
}

fn any_set() -> impl Strategy<Value = ConvexSet> {
    (1usize..6).prop_flat_map(|d| {
        prop_oneof![
            Just(ConvexSet::whole_space(d).unwrap()),
            (coords(d, 2.0), prop::collection::vec(0.0..2.0f64, d)).prop_map(|(lo, w)| {
                let hi: Vec<f64> = lo.iter().zip(&w).map(|(l, w)| l + w).collect();
                ConvexSet::boxed(lo.into(), hi.into()).unwrap()
            }),
            (coords(d, 1.0), 0.05..3.0f64).prop_map(|(c, r)| ConvexSet::ball(c.into(), r).unwrap()),
            Just(ConvexSet::simplex(d).unwrap()),
        ]
    })
}

fn set_and_points() -> impl Strategy<Value = (ConvexSet, Point, Point)> {
    any_set().prop_flat_map(|s| {
        let d = s.dim();
        (Just(s), coords(d, 5.0), coords(d, 5.0)).prop_map(|(s, p, q)| (s, p.into(), q.into()))
    })
}

proptest! {
    #[test]
    fn projection_lands_in_set((set, p, _q) in set_and_points()) {
        let pp = project(&set, &p).unwrap();
        prop_assert!(set.contains(&pp, 1e-12));
    }

    #[test]
    fn projection_is_idempotent((set, p, _q) in set_and_points()) {
        let pp = project(&set, &p).unwrap();
        prop_assert!(project(&set, &pp).unwrap().dist(&pp) <= 1e-12);
    }

    #[test]
    fn projection_is_nonexpansive((set, p, q) in set_and_points()) {
        let pp = project(&set, &p).unwrap();
        let qq = project(&set, &q).unwrap();
        prop_assert!(pp.dist(&qq) <= p.dist(&q) + 1e-12);
    }

    /// `<p - Πp, z - Πp> <= 0` for members `z`; here `z` is the projection of
    /// another point.
    #[test]
    fn projection_satisfies_variational_inequality((set, p, q) in set_and_points()) {
        let pp = project(&set, &p).unwrap();
        let z = project(&set, &q).unwrap();
        prop_assert!(p.sub(&pp).dot(&z.sub(&pp)) <= 1e-9);
    }

    #[test]
    fn intersection_projection_is_feasible((set, p, q) in set_and_points(), radius in 0.05..2.0f64) {
        let center = project(&set, &q).unwrap();
        let out = project_intersection(&set, &center, radius, &p).unwrap();
        prop_assert!(set.contains(&out, 1e-8));
        prop_assert!(out.dist(&center) <= radius + 1e-8);
    }

    /// Members of the intersection are produced by projecting `q`.
    #[test]
    fn intersection_projection_is_optimal((set, p, q) in set_and_points(), radius in 0.05..2.0f64) {
        let center = project(&set, &Point::zeros(set.dim())).unwrap();
        let out = project_intersection(&set, &center, radius, &p).unwrap();
        let z = project_intersection(&set, &center, radius, &q).unwrap();
        prop_assert!(p.sub(&out).dot(&z.sub(&out)) <= 1e-7);
    }
}

#[test]
fn simplex_projection_examples() {
    let s = ConvexSet::simplex(3).unwrap();
    let p = project(&s, &Point::new(vec![0.5, 0.5, 0.5])).unwrap();
    for v in p.iter() {
        assert!((v - 1.0 / 3.0).abs() < 1e-15);
    }
    let p = project(&s, &Point::new(vec![2.0, 0.0, -1.0])).unwrap();
    assert_eq!(p.as_slice(), &[1.0, 0.0, 0.0]);
}

#[test]
fn intersection_of_box_corner_and_ball() {
    // The ball centered at the origin with radius 1 meets [0.5, 2]^2 in a
    // lens; (2, 2) projects to its tip on the diagonal.
    let b = ConvexSet::cube(2, 2.0).unwrap();
    let set = ConvexSet::boxed(Point::filled(2, 0.5), Point::filled(2, 2.0)).unwrap();
    let out = project_intersection(&set, &Point::zeros(2), 1.0, &Point::filled(2, 2.0)).unwrap();
    let tip = 0.5f64.sqrt();
    assert!((out[0] - tip).abs() < 1e-7 && (out[1] - tip).abs() < 1e-7, "{out:?}");
    let whole = project_intersection(&b, &Point::zeros(2), 1.0, &Point::new(vec![3.0, 4.0])).unwrap();
    assert!((whole[0] - 0.6).abs() < 1e-12 && (whole[1] - 0.8).abs() < 1e-12);
}

#[test]
fn projection_rejects_mismatched_dimensions() {
    let s = ConvexSet::cube(3, 1.0).unwrap();
    assert!(project(&s, &Point::zeros(2)).is_err());
    assert!(project_intersection(&s, &Point::zeros(3), 0.0, &Point::zeros(3)).is_err());
}
