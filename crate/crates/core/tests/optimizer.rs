mod support;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use strutpath::graph::{build_graph, LatticeGraph};
use strutpath::lattice::{layer_from_json, Contour, Tiling, DEFAULT_WELD_TOL};
use strutpath::optimizer::{
    build_solution, classify_paths, iteration_rng, lts_percent, oe_percent, optimize, optimize_with_threads,
    path_score, GrowthMode, OptimizerConfig, OptimizerError,
};

use support::*;

fn mode_strategy() -> impl Strategy<Value = GrowthMode> {
    prop_oneof![Just(GrowthMode::Max), Just(GrowthMode::Min)]
}

fn graph_strategy() -> impl Strategy<Value = LatticeGraph> {
    (any::<u64>(), 1usize..120)
        .prop_map(|(seed, edges)| random_geometric_graph(&mut ChaCha8Rng::seed_from_u64(seed), edges))
}

fn edge_pairs(graph: &LatticeGraph) -> Vec<(usize, usize)> {
    graph.edges().iter().map(|e| (e.u, e.v)).collect()
}

#[test]
fn imported_fixtures_are_covered_exactly() {
    for name in ["voronoi.json", "penrose.json"] {
        let layer = layer_from_json(&read_fixture(name), DEFAULT_WELD_TOL).unwrap();
        let g = build_graph(&layer).unwrap();
        let run = optimize(&g, &OptimizerConfig { iterations: 40, master_seed: 9, ..Default::default() }).unwrap();
        check_edge_cover(&g, &run.best).unwrap();
        check_edge_cover(&g, &run.worst).unwrap();
        assert!(run.best.total_paths >= trail_lower_bound(g.node_count(), &edge_pairs(&g)), "{name}");
        assert_eq!(run.path_lower_bound, trail_lower_bound(g.node_count(), &edge_pairs(&g)), "{name}");
    }
}

#[test]
fn report_summaries_agree_with_best_solution() {
    let layer = Tiling::SnubSquare { cell_size: 1.0 }.generate(&Contour::rectangle(8.0, 8.0)).unwrap();
    let g = build_graph(&layer).unwrap();
    let config = OptimizerConfig { iterations: 60, master_seed: 4, ..Default::default() };
    let run = optimize(&g, &config).unwrap();
    let max = run.per_iteration_scores.iter().cloned().fold(f64::MIN, f64::max);
    let min = run.per_iteration_scores.iter().cloned().fold(f64::MAX, f64::min);
    assert_eq!(run.per_iteration_scores.len(), 60);
    assert_eq!(run.best.score, max);
    assert_eq!(run.worst.score, min);
    assert_eq!(run.per_iteration_scores.iter().position(|&s| s == max), Some(run.best_iteration));
    assert_eq!(run.per_iteration_scores.iter().position(|&s| s == min), Some(run.worst_iteration));
    assert_eq!(run.lts_percent, lts_percent(&run.best, 5));
    assert_eq!(run.oe_best_percent, oe_percent(&run.best, 5));
    assert_eq!(run.oe_worst_percent, oe_percent(&run.worst, 5));
    let c = classify_paths(&run.best, &config);
    assert_eq!(run.classification, c);
    assert_eq!(c.long + c.medium + c.short, run.best.total_paths);
    for w in run.best.paths.windows(2) {
        assert!(w[0].num_edges >= w[1].num_edges);
    }
}

#[test]
fn seeds_change_the_run() {
    let layer = Tiling::Honeycomb { hex_radius: 0.75 }.generate(&Contour::rectangle(10.0, 10.0)).unwrap();
    let g = build_graph(&layer).unwrap();
    let a = optimize(&g, &OptimizerConfig { iterations: 30, master_seed: 1, ..Default::default() }).unwrap();
    let b = optimize(&g, &OptimizerConfig { iterations: 30, master_seed: 2, ..Default::default() }).unwrap();
    assert_ne!(a.per_iteration_scores, b.per_iteration_scores);
}

#[test]
fn invalid_config_is_rejected() {
    let g = LatticeGraph::with_weights(2, &[(0, 1, 1.0)]).unwrap();
    for config in [
        OptimizerConfig { iterations: 0, ..Default::default() },
        OptimizerConfig { classify_long_min_nodes: 5, classify_medium_min_nodes: 5, ..Default::default() },
    ] {
        assert!(matches!(optimize(&g, &config), Err(OptimizerError::InvalidConfig(_))));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn every_edge_is_printed_once(graph in graph_strategy(), mode in mode_strategy(), seed in any::<u64>()) {
        let s = build_solution(&graph, mode, &mut iteration_rng(seed, 0)).unwrap();
        prop_assert_eq!(check_edge_cover(&graph, &s), Ok(()));
        prop_assert!(s.total_paths >= trail_lower_bound(graph.node_count(), &edge_pairs(&graph)));
        prop_assert!(s.score <= graph.edge_count() as f64 + 1e-9);
        prop_assert!(s.score > 0.0);
        for p in &s.paths {
            let mut seen = std::collections::HashSet::new();
            prop_assert!(p.edge_ids.iter().all(|e| seen.insert(*e)));
        }
    }

    #[test]
    fn scaling_weights_keeps_every_edge_sequence(graph in graph_strategy(), mode in mode_strategy(), seed in any::<u64>(), factor in 0.01f64..100.0) {
        let a = build_solution(&graph, mode, &mut iteration_rng(seed, 5)).unwrap();
        let b = build_solution(&graph.scaled(factor), mode, &mut iteration_rng(seed, 5)).unwrap();
        let edges = |s: &strutpath::optimizer::Solution| s.paths.iter().map(|p| p.edge_ids.clone()).collect::<Vec<_>>();
        prop_assert_eq!(edges(&a), edges(&b));
        let nodes = |s: &strutpath::optimizer::Solution| s.paths.iter().map(|p| p.nodes.clone()).collect::<Vec<_>>();
        prop_assert_eq!(nodes(&a), nodes(&b));
    }

    #[test]
    fn splitting_a_path_lowers_the_score(
        parts in prop::collection::vec((0.01f64..50.0, 1usize..40), 1..12),
        pick in any::<prop::sample::Index>(),
        cut in 0.01f64..0.99,
    ) {
        let multi: Vec<usize> = (0..parts.len()).filter(|&i| parts[i].1 >= 2).collect();
        prop_assume!(!multi.is_empty());
        let i = multi[pick.index(multi.len())];
        let (len, edges) = parts[i];
        let left_edges = ((edges as f64 * cut) as usize).clamp(1, edges - 1);
        let mut split = parts.clone();
        split[i] = (len * cut, left_edges);
        split.push((len * (1.0 - cut), edges - left_edges));
        let before = path_score(parts.iter().copied()).unwrap();
        let after = path_score(split.iter().copied()).unwrap();
        prop_assert!(after < before, "{} -> {}", before, after);
    }

    #[test]
    fn run_is_independent_of_worker_count(graph in graph_strategy(), seed in any::<u64>(), threads in 2usize..6) {
        let config = OptimizerConfig { iterations: 24, master_seed: seed, ..Default::default() };
        let one = optimize_with_threads(&graph, &config, 1).unwrap();
        let many = optimize_with_threads(&graph, &config, threads).unwrap();
        prop_assert_eq!(&one, &many);
        prop_assert!(one.best.score >= one.worst.score);
        prop_assert_eq!(check_edge_cover(&graph, &one.best), Ok(()));
    }
}
