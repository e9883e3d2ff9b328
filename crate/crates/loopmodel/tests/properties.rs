//! Randomized structural invariants over the public API.

use loopmodel::config::log_weight;
use loopmodel::domination::{delta, DeltaVariant};
use loopmodel::loops::{count_loops, decompose};
use loopmodel::oracle::naive_trace;
use loopmodel::{Graph, LinkConfig, Params, Sign};
use proptest::prelude::*;

fn arb_graph() -> impl Strategy<Value = Graph> {
    (2usize..=7)
        .prop_flat_map(|nv| {
            let all: Vec<(usize, usize)> = (0..nv)
                .flat_map(|a| ((a + 1)..nv).map(move |b| (a, b)))
                .collect();
            let k = all.len();
            (Just(all), proptest::collection::vec(any::<bool>(), k))
        })
        .prop_filter_map("needs one edge", |(all, keep)| {
            let pairs: Vec<_> = all
                .into_iter()
                .zip(keep)
                .filter_map(|(e, k)| k.then_some(e))
                .collect();
            if pairs.is_empty() {
                None
            } else {
                Graph::from_edge_list(&pairs).ok()
            }
        })
}

fn arb_config(edge_count: usize) -> impl Strategy<Value = LinkConfig> {
    proptest::collection::vec(
        (0..edge_count, any::<bool>()),
        0..=9,
    )
    .prop_map(|raw| {
        LinkConfig::from_links(
            raw.into_iter()
                .map(|(e, b)| (e, if b { Sign::Cross } else { Sign::Bar }))
                .collect(),
        )
    })
}

fn arb_graph_config() -> impl Strategy<Value = (Graph, LinkConfig)> {
    arb_graph().prop_flat_map(|g| {
        let m = g.edge_count();
        (Just(g), arb_config(m))
    })
}

proptest! {
    #[test]
    fn edge_distance_symmetric_and_triangular((g, _) in arb_graph_config()) {
        let m = g.edge_count();
        let dist: Vec<Vec<usize>> = (0..m)
            .map(|e| g.edge_distances_from(e).unwrap())
            .collect();
        for a in 0..m {
            prop_assert_eq!(dist[a][a], 0);
            for b in 0..m {
                prop_assert_eq!(dist[a][b], dist[b][a]);
                for c in 0..m {
                    if dist[a][b] != loopmodel::graph::INFINITY
                        && dist[b][c] != loopmodel::graph::INFINITY
                    {
                        prop_assert!(dist[a][c] <= dist[a][b] + dist[b][c]);
                    }
                }
            }
        }
    }

    #[test]
    fn sign_counts_partition_length((g, c) in arb_graph_config()) {
        prop_assert_eq!(c.cross_count() + c.bar_count(), c.len());
        let per_edge: usize = c.edge_counts(&g).iter().sum();
        prop_assert_eq!(per_edge, c.len());
    }

    #[test]
    fn full_restriction_is_identity((g, c) in arb_graph_config()) {
        let all = vec![true; g.edge_count()];
        prop_assert_eq!(c.restrict_mask(&all), c.clone());
        let none = vec![false; g.edge_count()];
        prop_assert!(c.restrict_mask(&none).is_empty());
    }

    #[test]
    fn decomposition_engines_always_agree((g, c) in arb_graph_config()) {
        let dec = decompose(&g, &c);
        prop_assert_eq!(&dec, &naive_trace(&g, &c));
        prop_assert_eq!(dec.total_loops, count_loops(&g, &c));
        // the level-1 loops jointly cover every vertex
        let mut covered = vec![false; g.vertex_count()];
        for set in dec.level_one() {
            for &v in set {
                covered[v] = true;
            }
        }
        prop_assert!(covered.iter().all(|&b| b));
    }

    #[test]
    fn weight_invariant_under_path_reversal(c in arb_config(3), beta in 0.1f64..2.0, u in 0.0f64..=1.0, theta in 0.25f64..4.0) {
        // reversing a path graph maps edge e -> m-1-e and preserves weights
        let g = Graph::from_edge_list(&[(0, 1), (1, 2), (2, 3)]).unwrap();
        let p = Params::new(beta, u, theta).unwrap();
        let mirrored = LinkConfig::from_links(
            c.links().iter().map(|&(e, s)| (2 - e, s)).collect(),
        );
        let w1 = log_weight(&c, &p, count_loops(&g, &c));
        let w2 = log_weight(&mirrored, &p, count_loops(&g, &mirrored));
        prop_assert!((w1 - w2).abs() < 1e-9 || (w1.is_infinite() && w2.is_infinite()));
    }

    #[test]
    fn bound_is_a_probability_and_monotone_in_u(
        beta in 0.05f64..1.5,
        u in 0.05f64..=1.0,
        theta in 0.25f64..4.0,
        k in 1usize..8,
    ) {
        let d = delta(beta, u, theta, k, DeltaVariant::Conservative).unwrap();
        prop_assert!(d > 0.0 && d < 1.0);
        let d_smaller = delta(beta, u * 0.5, theta, k, DeltaVariant::Conservative).unwrap();
        prop_assert!(d_smaller <= d);
        let d_thm = delta(beta, u, theta, k, DeltaVariant::Optimistic).unwrap();
        prop_assert!(d <= d_thm * (1.0 + 1e-12));
    }
}
