use medianwall::cylinders::{CylinderConfig, CylinderSpace};
use medianwall::dual::{ClosureConfig, DualModel};
use medianwall::generators::{path, random_tree};
use medianwall::geometry::{enumerate_rough_geodesics, gromov_product, is_rough_geodesic};
use medianwall::quasitree::{build_walls, WallOptions};
use medianwall::ultrafilter::enumerate_ultrafilters;
use medianwall::{FiniteMetric, Half, Ultrafilter};
use proptest::prelude::*;

fn config() -> ProptestConfig {
    ProptestConfig {
        cases: 24,
        ..ProptestConfig::default()
    }
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn gromov_products_split_distances(n in 2usize..40, seed in any::<u64>(), a in 0usize..40, b in 0usize..40, c in 0usize..40) {
        let g = random_tree(n, seed).unwrap();
        let d = g.dist_table();
        let (x, y, z) = (a % n, b % n, c % n);
        let sum = gromov_product(d, x, y, z) + gromov_product(d, y, x, z);
        prop_assert_eq!(sum, Half::from_int(d.dist(x, y) as i64));
        prop_assert!(gromov_product(d, x, y, z) >= Half::ZERO);
    }

    #[test]
    fn dual_distances_are_metrics(n in 6usize..30, seed in any::<u64>()) {
        let q = build_walls(random_tree(n, seed).unwrap(), 1, WallOptions::default());
        // Trees of radius 1 have no walls.
        prop_assume!(q.is_ok());
        let q = q.unwrap();
        let model = DualModel::build(&q.system, ClosureConfig { cap: 400, ..ClosureConfig::default() }).unwrap();
        prop_assert_eq!(model.dist.metric_violation(), None);
        for (s, &p) in model.ground_point.iter().enumerate() {
            prop_assert_eq!(model.points[p].clone(), Ultrafilter::point(q.walls.as_ref(), s).unwrap());
        }
    }

    #[test]
    fn ultrafilter_medians_are_medians(n in 6usize..25, seed in any::<u64>(), picks in proptest::collection::vec(any::<prop::sample::Index>(), 3)) {
        let q = build_walls(random_tree(n, seed).unwrap(), 1, WallOptions::default());
        prop_assume!(q.is_ok());
        let q = q.unwrap();
        let Some(all) = enumerate_ultrafilters(&q.walls, 4096) else { return Ok(()) };
        let [a, b, c] = [&all[picks[0].index(all.len())], &all[picks[1].index(all.len())], &all[picks[2].index(all.len())]];
        let m = Ultrafilter::median(a, b, c);
        prop_assert!(m.is_consistent(&q.walls));
        prop_assert_eq!(Ultrafilter::median(a, a, c), a.clone());
        prop_assert_eq!(Ultrafilter::median(c, a, b), m.clone());
        prop_assert_eq!(Ultrafilter::median(&m, a, b), m);
    }

    #[test]
    fn enumerated_rough_geodesics_recheck(n in 2usize..12, seed in any::<u64>(), k in 0u32..3, a in 0usize..12, b in 0usize..12) {
        let g = random_tree(n, seed).unwrap();
        let found = enumerate_rough_geodesics(g.dist_table(), a % n, b % n, k, 200).unwrap();
        prop_assert!(!found.paths.is_empty());
        for p in &found.paths {
            prop_assert_eq!(p.points.first(), Some(&(a % n)));
            prop_assert_eq!(p.points.last(), Some(&(b % n)));
            prop_assert!(is_rough_geodesic(g.dist_table(), &p.points, k));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 6, ..ProptestConfig::default() })]

    #[test]
    fn path_cylinders_are_stable_with_no_balls(n in 4usize..30) {
        let q = build_walls(path(n).unwrap(), 1, WallOptions::default()).unwrap();
        let model = DualModel::build(&q.system, ClosureConfig::default()).unwrap();
        let colors = vec![0; q.walls.len()];
        let (space, rep) = CylinderSpace::build(&model, &q.system, &colors, CylinderConfig::new(1, 1)).unwrap();
        prop_assert!(rep.lemmas_hold() && rep.axioms_hold());
        let cert = space.certify();
        prop_assert_eq!(cert.k, 0);
        prop_assert!(cert.recheck.holds);
        prop_assert!(model.dist.diameter() as usize <= n);
    }
}
