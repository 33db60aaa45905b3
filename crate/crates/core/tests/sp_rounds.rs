//! Shortest-path instances long enough that the selection rounds actually run.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use robustnet::lp::LpConfig;
use robustnet::{evaluate, oracle, sp, Cost, Instance, Kind};

/// Chain of `segments` hubs joined by `width` parallel arcs each. Every
/// scenario charges one random arc per segment, so any single route is
/// expensive in some scenario while the relaxation spreads flow evenly.
fn braided_chain(segments: usize, width: usize, k: usize, seed: u64) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for i in 0..segments {
        for _ in 0..width {
            edges.push((i, i + 1));
        }
    }
    let scenarios = (0..k)
        .map(|_| {
            let mut row = vec![Cost::from_integer(0); edges.len()];
            for i in 0..segments {
                row[i * width + rng.gen_range(0..width)] = Cost::from_integer(1);
            }
            row
        })
        .collect();
    Instance::new(
        format!("braid_{segments}x{width}_K{k}_s{seed}"),
        Kind::ShortestPath {
            source: 0,
            target: segments,
        },
        segments + 1,
        edges,
        scenarios,
    )
    .unwrap()
}

#[test]
fn rounds_run_and_output_is_a_path() {
    for seed in 0..6 {
        let instance = braided_chain(30, 2, 60 + 4 * seed as usize, seed);
        let (sol, report) = sp::solve_sp(&instance, &LpConfig::default()).unwrap();
        assert!(report.rounds >= 1, "{}: no rounds", instance.name());
        assert_eq!(evaluate(&instance, &sol.edges).unwrap(), sol);
        let n = instance.num_nodes();
        let l_hat = sp::threshold(n, instance.num_scenarios());
        assert!(report.rounds <= n.div_ceil(l_hat));
        assert!(sol.max_cost >= report.l_star);
        for round in &report.sp_rounds {
            assert!(round.forest, "{}: selected arcs closed a cycle", instance.name());
            assert!(round.cutset_mass.iter().all(|&m| m >= 1.0 - 1e-9));
            assert_eq!(round.cutset_mass.len(), round.path_length);
        }
    }
}

#[test]
fn components_drop_by_path_length_on_braids() {
    let instance = braided_chain(30, 3, 90, 11);
    let (_, report) = sp::solve_sp(&instance, &LpConfig::default()).unwrap();
    assert!(!report.sp_rounds.is_empty());
    for round in &report.sp_rounds {
        assert_eq!(
            round.components_before - round.components_after,
            round.path_length
        );
    }
}

#[test]
fn long_braid_stays_within_bound_of_optimum() {
    // Two arcs per segment: 2^12 paths, small enough to enumerate.
    let instance = braided_chain(12, 2, 24, 5);
    let (sol, report) = sp::solve_sp(&instance, &LpConfig::default()).unwrap();
    let best = oracle::brute_force_opt(&instance, oracle::DEFAULT_LIMIT).unwrap();
    assert!(sol.max_cost >= best.max_cost);
    let bound = best.max_cost_f64() * sp::ratio_bound(instance.num_nodes(), instance.num_scenarios());
    assert!(sol.max_cost_f64() <= bound);
    assert!(report.ratio >= 1.0 - 1e-9);
}

#[test]
fn skip_arcs_keep_forest_and_component_drop() {
    let mut rounds = 0;
    for seed in 0..20u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let segments = 30;
        let mut edges = Vec::new();
        for i in 0..segments {
            edges.push((i, i + 1));
            edges.push((i, i + 1));
        }
        for i in 0..segments {
            for j in i + 2..=segments.min(i + 3) {
                if rng.gen_bool(0.3) {
                    edges.push((i, j));
                }
            }
        }
        // A skip arc costs as much as the segments it jumps, when charged.
        let scenarios = (0..80)
            .map(|_| {
                edges
                    .iter()
                    .map(|&(a, b)| Cost::from_integer(if rng.gen_bool(0.5) { (b - a) as i64 } else { 0 }))
                    .collect()
            })
            .collect();
        let kind = Kind::ShortestPath {
            source: 0,
            target: segments,
        };
        let instance = Instance::new("skips", kind, segments + 1, edges, scenarios).unwrap();
        let (sol, report) = sp::solve_sp(&instance, &LpConfig::default()).unwrap();
        assert_eq!(evaluate(&instance, &sol.edges).unwrap(), sol);
        for round in &report.sp_rounds {
            assert!(round.forest);
            assert_eq!(
                round.components_before - round.components_after,
                round.path_length
            );
        }
        rounds += report.rounds;
    }
    assert!(rounds >= 10, "only {rounds} rounds ran");
}
