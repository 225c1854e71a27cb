mod common;

use civd::aggregation::{AggregationTree, CoverQuery};
use civd::artifact::Artifact;
use civd::civd::{BuildOptions, Civd};
use civd::distance_tree::DistanceTree;
use civd::hyperplane::max_resultant;
use civd::influence::{delta_capital, delta_capital_inverse, eval_density, eval_vector};
use civd::oracle::{density_scan_max, sample_queries};
use civd::wspd::{build_spanner, build_wspd};
use civd::{AxisBox, InfluenceModel, ModelKind, Point, WeightedSite};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn points(seed: u64, n: usize, dim: usize) -> Vec<Point> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| Point::from_fn(dim, |_| rng.gen_range(-4.0..4.0))).collect()
}

/// Ball around the axis-aligned bounding box of a subset.
fn bbox_ball(pts: &[Point], ids: &[usize]) -> (Point, f64) {
    let dim = pts[0].dim();
    let lo = Point::from_fn(dim, |k| ids.iter().map(|&i| pts[i].get(k)).fold(f64::INFINITY, f64::min));
    let hi = Point::from_fn(dim, |k| ids.iter().map(|&i| pts[i].get(k)).fold(f64::NEG_INFINITY, f64::max));
    (lo.add(&hi).scale(0.5), hi.dist(&lo) / 2.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn split_children_tile_the_parent(seed: u64, dim in 1usize..=4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let parent = AxisBox::new(Point::from_fn(dim, |_| rng.gen_range(-5.0..5.0)), rng.gen_range(0.1..3.0));
        let kids = parent.split().unwrap();
        prop_assert_eq!(kids.len(), 1 << dim);
        for _ in 0..500 {
            let q = Point::from_fn(dim, |k| rng.gen_range(parent.lo(k) - 0.5..parent.hi(k) + 0.5));
            let inside = kids.iter().filter(|c| c.contains(&q)).count();
            prop_assert_eq!(inside, usize::from(parent.contains(&q)));
            if parent.contains(&q) {
                prop_assert!(kids[parent.orthant_of(&q)].contains(&q));
            }
        }
    }

    #[test]
    fn wspd_covers_each_pair_once(seed: u64, n in 2usize..30, dim in 1usize..=3) {
        let pts = points(seed, n, dim);
        let w = build_wspd(&pts).unwrap();
        let mut seen = vec![vec![0u32; n]; n];
        for pair in &w.pairs {
            let (a, b) = (w.points_of(pair.a), w.points_of(pair.b));
            let (ca, ra) = bbox_ball(&pts, a);
            let (cb, rb) = bbox_ball(&pts, b);
            let r = ra.max(rb);
            prop_assert!(ca.dist(&cb) - 2.0 * r >= 12.0 * r - 1e-9);
            for &i in a {
                for &j in b {
                    seen[i.min(j)][i.max(j)] += 1;
                }
            }
        }
        for i in 0..n {
            for j in i + 1..n {
                prop_assert_eq!(seen[i][j], 1);
            }
        }
    }

    #[test]
    fn spanner_stretch_at_most_two(seed: u64, n in 2usize..25, dim in 1usize..=3) {
        let pts = points(seed, n, dim);
        let edges = build_spanner(&pts, &build_wspd(&pts).unwrap());
        let mut g = vec![vec![f64::INFINITY; n]; n];
        for (i, row) in g.iter_mut().enumerate() {
            row[i] = 0.0;
        }
        for e in &edges {
            g[e.u][e.v] = g[e.u][e.v].min(e.weight);
            g[e.v][e.u] = g[e.u][e.v];
        }
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    g[i][j] = g[i][j].min(g[i][k] + g[k][j]);
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                prop_assert!(g[i][j] <= 2.0 * pts[i].dist(&pts[j]) * (1.0 + 1e-12));
            }
        }
    }

    #[test]
    fn distance_tree_node_invariants(seed: u64, n in 1usize..40, dim in 1usize..=3) {
        let pts = points(seed, n, dim);
        let tree = DistanceTree::build(&pts, 0.25).unwrap();
        prop_assert_eq!(tree.nodes.len(), 2 * n - 1);
        prop_assert_eq!(tree.points_of(tree.root()).len(), n);
        for v in 0..tree.nodes.len() {
            let nd = tree.node(v);
            let own = tree.points_of(v);
            prop_assert_eq!(nd.is_leaf(), nd.s == 0.0 && own.len() == 1);
            prop_assert!(own.contains(&nd.l));
            for &i in own {
                for &j in own {
                    prop_assert!(pts[i].dist(&pts[j]) <= nd.s * (1.0 + 1e-12));
                }
            }
            if let Some([a, b]) = nd.children {
                prop_assert!(nd.s >= tree.node(a).s + tree.node(b).s);
                prop_assert_eq!(tree.node(a).size() + tree.node(b).size(), nd.size());
            }
        }
    }

    #[test]
    fn delta_inverse_round_trips(eps in 1e-6f64..0.3, dim in 1usize..=3, t in 1.0f64..3.0) {
        for kind in [ModelKind::Density, ModelKind::Vector { t }] {
            let x = delta_capital_inverse(kind, dim, eps).unwrap();
            prop_assert!((delta_capital(kind, dim, x).unwrap() - eps).abs() <= 1e-10);
        }
    }

    #[test]
    fn influence_translation_invariant(seed: u64, dim in 1usize..=3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let q = Point::from_fn(dim, |_| rng.gen_range(-1.0..1.0));
        let shift = Point::from_fn(dim, |_| rng.gen_range(-100.0..100.0));
        let sites: Vec<WeightedSite> = points(seed ^ 1, 6, dim).into_iter().map(WeightedSite::single).collect();
        prop_assume!(sites.iter().all(|s| s.location.dist(&q) > 1e-3));
        let moved: Vec<WeightedSite> = sites.iter().map(|s| WeightedSite::single(s.location.add(&shift))).collect();
        let q2 = q.add(&shift);
        let (a, b) = (eval_density(&sites, &q, dim).unwrap(), eval_density(&moved, &q2, dim).unwrap());
        prop_assert!((a.magnitude / b.magnitude - 1.0).abs() < 1e-9);
        let (a, b) = (eval_vector(&sites, &q, 1.5).unwrap(), eval_vector(&moved, &q2, 1.5).unwrap());
        prop_assert!((a.magnitude - b.magnitude).abs() <= 1e-9 * a.magnitude.max(1e-300));
    }

    #[test]
    fn hyperplane_side_attains_subset_maximum(seed: u64, m in 1usize..9, dim in 1usize..=3) {
        let vs = points(seed, m, dim);
        prop_assume!(vs.iter().all(|v| v.norm() > 1e-6));
        let (side, best) = max_resultant(&vs).unwrap();
        let mut brute: f64 = 0.0;
        for mask in 1u32..(1 << m) {
            let sum = (0..m).filter(|i| mask >> i & 1 == 1).fold(Point::origin(dim), |acc, i| acc.add(&vs[i]));
            brute = brute.max(sum.norm());
        }
        let chosen = (0..m).filter(|&i| side[i]).fold(Point::origin(dim), |acc, i| acc.add(&vs[i]));
        prop_assert!((best - brute).abs() <= 1e-9 * brute.max(1.0));
        prop_assert!((chosen.norm() - best).abs() <= 1e-9 * brute.max(1.0));
    }

    #[test]
    fn density_scan_beats_every_subset(seed: u64, n in 1usize..9, dim in 1usize..=3) {
        let pts = points(seed, n, dim);
        let q = points(seed ^ 7, 1, dim)[0];
        prop_assume!(pts.iter().all(|p| p.dist(&q) > 1e-6));
        let (_, best) = density_scan_max(&pts, &q, dim).unwrap();
        for mask in 1u32..(1 << n) {
            let sub: Vec<WeightedSite> =
                (0..n).filter(|i| mask >> i & 1 == 1).map(|i| WeightedSite::single(pts[i])).collect();
            prop_assert!(eval_density(&sub, &q, dim).unwrap().magnitude <= best * (1.0 + 1e-12));
        }
    }

    #[test]
    fn find_agrees_with_slow_find(seed: u64, n in 1usize..200, dim in 1usize..=3) {
        let pts = points(seed, n, dim);
        let tree = AggregationTree::build(&pts).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 3);
        for _ in 0..10 {
            let q_c = Point::from_fn(dim, |_| rng.gen_range(-6.0..6.0));
            let q = CoverQuery::new(q_c, 10f64.powf(rng.gen_range(-2.0..1.3)), rng.gen_range(0.01..0.45));
            let mut slow = tree.slow_find(&q);
            let (mut fast, _) = tree.find(&q);
            slow.sort_unstable();
            fast.sort_unstable();
            prop_assert_eq!(&fast, &slow);
            prop_assert!(tree.check_cover(&slow, &q).is_ok());
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn lazy_and_materialized_queries_agree(seed: u64, n in 1usize..7, vector: bool) {
        let pts = points(seed, n, 2);
        let model = if vector {
            InfluenceModel::vector(1.0, 2, 0.2).unwrap()
        } else {
            InfluenceModel::density(2, 0.2).unwrap()
        };
        let civd = Civd::build(&pts, model, BuildOptions { beta: Some(0.35), domination: None }).unwrap();
        let boxes = civd.box_tree(Some(3_000_000)).unwrap();
        let sites = civd.assign_all(&boxes).unwrap();
        for q in sample_queries(&pts, 60, seed).unwrap() {
            let lazy = civd.query(&q).unwrap();
            let mat = civd.query_materialized(&boxes, &sites, &q).unwrap();
            prop_assert_eq!(lazy.points, mat.points);
        }
    }

    #[test]
    fn artifact_round_trip_is_bit_stable(seed: u64, n in 1usize..8, vector: bool) {
        let pts = points(seed, n, 2);
        let model = if vector {
            InfluenceModel::vector(2.0, 2, 0.2).unwrap()
        } else {
            InfluenceModel::density(2, 0.2).unwrap()
        };
        let opts = BuildOptions { beta: Some(0.4), domination: None };
        let art = Artifact::build(&pts, model, opts, 2_000_000, Some(seed)).unwrap();
        let json = art.to_json().unwrap();
        let back = Artifact::from_json(&json).unwrap();
        prop_assert_eq!(&back, &art);
        prop_assert_eq!(back.to_json().unwrap(), json);
        let (c1, c2) = (art.civd(), back.civd());
        for q in sample_queries(&pts, 40, seed).unwrap() {
            let (a, b) = (art.query(&c1, &q).unwrap(), back.query(&c2, &q).unwrap());
            prop_assert_eq!(a.value.to_bits(), b.value.to_bits());
            prop_assert_eq!(a.site, b.site);
        }
    }
}

#[test]
fn unmaterialized_artifact_answers_lazily() {
    let pts = common::uniform_points(40, 2, 5);
    let model = InfluenceModel::density(2, 0.2).unwrap();
    let opts = BuildOptions { beta: Some(0.3), domination: None };
    let small = Artifact::build(&pts, model, opts, 10, None).unwrap();
    assert!(!small.meta.materialized && small.box_tree.is_none());
    let full = Artifact::build(&pts, model, opts, 5_000_000, None).unwrap();
    assert!(full.meta.materialized);
    assert_eq!(small.meta.stats, full.meta.stats);
    let round = Artifact::from_json(&small.to_json().unwrap()).unwrap();
    let (cs, cf) = (round.civd(), full.civd());
    for q in sample_queries(&pts, 200, 1).unwrap() {
        assert_eq!(round.query(&cs, &q).unwrap().points, full.query(&cf, &q).unwrap().points);
    }
}
