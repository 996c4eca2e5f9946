mod common;

use common::{gaussian_vector, random_body, random_sample, random_weights, rng};
use lift_core::identify::{
    is_comonotonic_endpoints, is_comonotonic_under_signs, marginal_oracle, reconstruct_comonotonic,
    reconstruct_distinct_probs,
};
use lift_core::lift::{
    hoeffding_support, lift_support, polygon_1d, stop_loss_curve, BodySample,
};
use lift_core::order::{angle_path, lift_included, same_lift, DirectionGrid};
use lift_core::tuples::{tuple_lift_support, zonoid_support, CoupledTupleSample, VectorSample};
use lift_core::{ConvexBody, Vector};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig::with_cases(cases)
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / (1.0 + a.abs().max(b.abs()))
}

proptest! {
    #![proptest_config(config(256))]

    #[test]
    fn support_is_sublinear(seed in any::<u64>(), dim in 1usize..=4, lambda in 0.01f64..100.0) {
        let mut r = rng(seed);
        let body = random_body(&mut r, dim);
        let (u, v) = (gaussian_vector(&mut r, dim), gaussian_vector(&mut r, dim));
        let hu = body.support(&u).unwrap();
        prop_assert!(rel(body.support(&u.scale(lambda)).unwrap(), lambda * hu) <= 1e-12);
        let huv = body.support(&u.add(&v)).unwrap();
        prop_assert!(huv <= hu + body.support(&v).unwrap() + 1e-12 * (1.0 + huv.abs()));
    }

    #[test]
    fn support_point_attains_support(seed in any::<u64>(), dim in 1usize..=4) {
        let mut r = rng(seed);
        let body = random_body(&mut r, dim);
        let u = gaussian_vector(&mut r, dim);
        match body.support_point(&u) {
            Ok(p) => prop_assert!(rel(p.dot(&u), body.support(&u).unwrap()) <= 1e-12),
            // flat ellipsoids have no support point along their null space
            Err(e) => prop_assert_eq!(e, lift_core::Error::DegenerateDirection),
        }
    }

    #[test]
    fn minkowski_sum_adds_supports_exactly(seed in any::<u64>(), dim in 1usize..=4) {
        let mut r = rng(seed);
        let (a, b) = (random_body(&mut r, dim), random_body(&mut r, dim));
        let sum = ConvexBody::minkowski(vec![(1.0, a.clone()), (1.0, b.clone())]).unwrap();
        let u = gaussian_vector(&mut r, dim);
        prop_assert_eq!(sum.support(&u).unwrap(), a.support(&u).unwrap() + b.support(&u).unwrap());
    }

    #[test]
    fn stop_loss_curve_shape(seed in any::<u64>(), dim in 1usize..=3, t in -20.0f64..20.0) {
        let mut r = rng(seed);
        let s = random_sample(&mut r, dim, 8);
        let u = gaussian_vector(&mut r, dim);
        let c = stop_loss_curve(&s, &u).unwrap();
        let slopes = c.slopes();
        prop_assert!(slopes.windows(2).all(|w| w[0] <= w[1]));
        prop_assert!(slopes.iter().all(|&k| (0.0..=1.0).contains(&k)));
        let floor = (t + c.mean()).max(0.0);
        prop_assert!(c.eval(t) >= floor - 1e-12 * (1.0 + t.abs()));
        let first = c.breakpoints()[0];
        let last = *c.breakpoints().last().unwrap();
        prop_assert_eq!(c.eval(first - t.abs() - 1.0), 0.0);
        prop_assert_eq!(c.eval(last + t.abs() + 1.0), last + t.abs() + 1.0 + c.mean());
    }

    #[test]
    fn zero_direction_lift_is_positive_part(seed in any::<u64>(), dim in 1usize..=3, u0 in -10.0f64..10.0) {
        let mut r = rng(seed);
        let s = random_sample(&mut r, dim, 8);
        prop_assert_eq!(lift_support(&s, u0, &Vector::zeros(dim)).unwrap(), u0.max(0.0));
    }

    #[test]
    fn polygon_matches_lift_support(seed in any::<u64>()) {
        let mut r = rng(seed);
        let n = r.random_range(1..=8);
        let pairs = common::lattice_intervals(&mut r, n, 0.25, 10.0);
        let pairs: Vec<(f64, f64)> = pairs.into_iter().map(|(a, b)| (a - 5.0, b - 5.0)).collect();
        let s = BodySample::intervals(&pairs, random_weights(&mut r, n)).unwrap();
        let poly = polygon_1d(&s).unwrap();
        prop_assert!(poly.is_convex(1e-12));
        for (a, b) in poly.edge_normals().into_iter().chain((0..36).map(|k| {
            let th = std::f64::consts::TAU * k as f64 / 36.0;
            (th.cos(), th.sin())
        })) {
            let want = lift_support(&s, a, &Vector::scalar(b)).unwrap();
            prop_assert!((poly.support(a, b) - want).abs() <= 1e-9);
        }
    }

    #[test]
    fn hoeffding_grows_with_n(seed in any::<u64>(), dim in 1usize..=3) {
        let mut r = rng(seed);
        let s = random_sample(&mut r, dim, 6);
        let u = gaussian_vector(&mut r, dim);
        let vals: Vec<f64> = (1..=6).map(|n| hoeffding_support(&s, n, &u).unwrap()).collect();
        prop_assert!(vals.windows(2).all(|w| w[0] <= w[1] + 1e-12));
    }

    #[test]
    fn coupled_inclusion_implies_lift_inclusion(seed in any::<u64>(), dim in 1usize..=3) {
        let mut r = rng(seed);
        let a = random_sample(&mut r, dim, 5);
        // b_i = a_i + K_i with K_i containing the origin, so h_b >= h_a everywhere
        let bodies = a
            .bodies()
            .iter()
            .map(|x| {
                let k = ConvexBody::ball(Vector::zeros(dim), r.random_range(0.0..1.0)).unwrap();
                ConvexBody::minkowski(vec![(1.0, x.clone()), (1.0, k)]).unwrap()
            })
            .collect();
        let b = BodySample::new(bodies, a.weights().to_vec()).unwrap();
        let grid = DirectionGrid::for_dim(dim, 72, seed).unwrap();
        prop_assert!(lift_included(&a, &b, &grid).unwrap());
    }

    #[test]
    fn same_lift_symmetric_and_order_free(seed in any::<u64>(), dim in 1usize..=3) {
        let mut r = rng(seed);
        let a = random_sample(&mut r, dim, 6);
        let b = if r.random_bool(0.5) { random_sample(&mut r, dim, 6) } else { a.clone() };
        let grid = DirectionGrid::for_dim(dim, 72, seed).unwrap();
        let ab = same_lift(&a, &b, &grid, 1e-12).unwrap();
        prop_assert_eq!(ab, same_lift(&b, &a, &grid, 1e-12).unwrap());
        let mut idx: Vec<usize> = (0..a.len()).collect();
        idx.shuffle(&mut r);
        let shuffled = BodySample::new(
            idx.iter().map(|&i| a.bodies()[i].clone()).collect(),
            idx.iter().map(|&i| a.weights()[i]).collect(),
        )
        .unwrap();
        prop_assert!(same_lift(&a, &shuffled, &grid, 1e-12).unwrap());
        prop_assert_eq!(ab, same_lift(&shuffled, &b, &grid, 1e-12).unwrap());
        if lift_included(&a, &b, &grid).unwrap() && lift_included(&b, &a, &grid).unwrap() {
            prop_assert!(same_lift(&a, &b, &grid, 1e-9).unwrap());
        }
    }
}

proptest! {
    #![proptest_config(config(64))]

    #[test]
    fn distinct_weights_round_trip(seed in any::<u64>(), dim in 1usize..=3) {
        let mut r = rng(seed);
        let n = r.random_range(1..=5);
        let bodies: Vec<ConvexBody<f64>> = (0..n).map(|_| random_body(&mut r, dim)).collect();
        let mut raw: Vec<f64> = (1..=n).map(|k| k as f64 + r.random_range(0.0..0.5)).collect();
        raw.shuffle(&mut r);
        let s = BodySample::normalized(bodies, raw).unwrap();
        let path = match dim {
            1 => vec![Vector::scalar(1.0), Vector::scalar(-1.0)],
            2 => angle_path(90),
            _ => DirectionGrid::for_dim(dim, 90, seed).unwrap().vectors().to_vec(),
        };
        let res = reconstruct_distinct_probs(&marginal_oracle(&s, &path).unwrap()).unwrap();
        prop_assert_eq!(res.realizations.len(), n);
        for (body, w) in s.iter() {
            let rec = res.realizations.iter().find(|x| (x.prob - w).abs() <= 1e-9);
            prop_assert!(rec.is_some());
            for (u, v) in path.iter().zip(&rec.unwrap().support_values) {
                prop_assert!((body.support(u).unwrap() - v).abs() <= 1e-9);
            }
        }
    }

    #[test]
    fn comonotonic_pairs_share_joint_law(seed in any::<u64>()) {
        // comonotonic interval samples are fixed by their endpoint marginals:
        // pairing sorted lower ends with sorted upper ends reproduces them
        let mut r = rng(seed);
        let n = r.random_range(1..=6);
        let mut los: Vec<f64> = (0..n).map(|_| r.random_range(-5.0..5.0)).collect();
        los.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let mut widths = 0.0;
        let pairs: Vec<(f64, f64)> = los
            .iter()
            .map(|&lo| {
                widths += r.random_range(0.0..1.0);
                (lo, lo + widths)
            })
            .collect();
        let w = vec![1.0 / n as f64; n];
        prop_assert!(is_comonotonic_endpoints(&pairs, &w).unwrap());
        let mut shuffled = pairs.clone();
        shuffled.shuffle(&mut r);
        let a = BodySample::intervals(&pairs, w.clone()).unwrap();
        let b = BodySample::intervals(&shuffled, w.clone()).unwrap();
        let signs = [Vector::scalar(1.0), Vector::scalar(-1.0)];
        let oa = marginal_oracle(&a, &signs).unwrap();
        let ob = marginal_oracle(&b, &signs).unwrap();
        prop_assert_eq!(oa.dists(), ob.dists());
        // the comonotonic coupling of those marginals is the sample itself
        let rec = reconstruct_comonotonic(&oa, &[1, -1]).unwrap();
        let mut got: Vec<(f64, f64, f64)> = rec
            .realizations
            .iter()
            .map(|x| (-x.support_values[1], x.support_values[0], x.prob))
            .collect();
        got.sort_by(|x, y| x.partial_cmp(y).unwrap());
        let mut want: Vec<(f64, f64, f64)> = Vec::new();
        for &(lo, hi) in &pairs {
            match want.last_mut() {
                Some(last) if (last.0 - lo).abs() <= 1e-9 && (last.1 - hi).abs() <= 1e-9 => last.2 += 1.0 / n as f64,
                _ => want.push((lo, hi, 1.0 / n as f64)),
            }
        }
        prop_assert_eq!(got.len(), want.len());
        for (g, w) in got.iter().zip(&want) {
            prop_assert!((g.0 - w.0).abs() <= 1e-9 && (g.1 - w.1).abs() <= 1e-9 && (g.2 - w.2).abs() <= 1e-9);
        }
    }

    #[test]
    fn strongly_comonotonic_samples_reconstruct(seed in any::<u64>()) {
        // h(u) = <c, u> + eta * g(u) with g >= 0 sublinear: discs or squares
        // of random size around a common center
        let mut r = rng(seed);
        let n = r.random_range(1..=5);
        let center = gaussian_vector(&mut r, 2);
        let square = r.random_bool(0.5);
        let mut sizes: Vec<f64> = (0..n).map(|_| r.random_range(0.1..3.0)).collect();
        sizes.sort_by(|a, b| a.partial_cmp(b).unwrap());
        sizes.dedup_by(|a, b| (*a - *b).abs() < 1e-6);
        let bodies: Vec<ConvexBody<f64>> = sizes
            .iter()
            .map(|&eta| {
                if square {
                    let c = center.coords();
                    ConvexBody::polytope(
                        [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)]
                            .iter()
                            .map(|&(x, y)| Vector::new(vec![c[0] + eta * x, c[1] + eta * y]).unwrap())
                            .collect(),
                    )
                    .unwrap()
                } else {
                    ConvexBody::ball(center.clone(), eta).unwrap()
                }
            })
            .collect();
        let s = BodySample::new(bodies, random_weights(&mut r, sizes.len())).unwrap();
        let path = angle_path::<f64>(24);
        let plus = vec![1i8; path.len()];
        prop_assert!(is_comonotonic_under_signs(&s, &path, &plus).unwrap());
        let rec = reconstruct_comonotonic(&marginal_oracle(&s, &path).unwrap(), &plus).unwrap();
        prop_assert_eq!(rec.realizations.len(), s.len());
        for (body, w) in s.iter() {
            let hit = rec.realizations.iter().any(|x| {
                (x.prob - w).abs() <= 1e-9
                    && path
                        .iter()
                        .zip(&x.support_values)
                        .all(|(u, v)| (body.support(u).unwrap() - v).abs() <= 1e-9)
            });
            prop_assert!(hit);
        }
    }

    #[test]
    fn self_tuples_ignore_slot_order(seed in any::<u64>(), dim in 1usize..=3, arity in 1usize..=4) {
        let mut r = rng(seed);
        let s = random_sample(&mut r, dim, 5);
        let t = CoupledTupleSample::self_tuple(&s, arity).unwrap();
        let mut us: Vec<Vector<f64>> = (0..arity).map(|_| gaussian_vector(&mut r, dim)).collect();
        let u0 = r.random_range(-5.0..5.0);
        let before = tuple_lift_support(&t, u0, &us).unwrap();
        us.shuffle(&mut r);
        prop_assert!(rel(before, tuple_lift_support(&t, u0, &us).unwrap()) <= 1e-12);
    }

    #[test]
    fn zonoid_ignores_mean_one_scale_mixtures(seed in any::<u64>(), dim in 1usize..=3, p in 0.05f64..0.95) {
        // multiply xi by an independent factor: 0 w.p. 1 - p, 1/p w.p. p
        let mut r = rng(seed);
        let n = r.random_range(1..=5);
        let points: Vec<Vector<f64>> = (0..n).map(|_| gaussian_vector(&mut r, dim)).collect();
        let w = random_weights(&mut r, n);
        let base = VectorSample::new(points.clone(), w.clone()).unwrap();
        let mut mixed_points: Vec<Vector<f64>> = points.iter().map(|x| x.scale(1.0 / p)).collect();
        let mut mixed_w: Vec<f64> = w.iter().map(|&wi| wi * p).collect();
        mixed_points.push(Vector::zeros(dim));
        mixed_w.push(1.0 - p);
        let mixed = VectorSample::new(mixed_points, mixed_w).unwrap();
        let u = gaussian_vector(&mut r, dim);
        let (a, b) = (zonoid_support(&base, &u).unwrap(), zonoid_support(&mixed, &u).unwrap());
        prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()));
    }
}
