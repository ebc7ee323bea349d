use hedonic::metrics::ari_labels;
use hedonic::partition::community_stats;
use hedonic::potential::community_units;
use hedonic::robustness::{is_balanced, robust_nodes};
use hedonic::synthgen::selected_count;
use hedonic::{
    apply_move, build_metagraph, classify_move, degrees_in, equilibrium_gamma_range, familiarity, generate,
    is_equilibrium, move_gain, node_is_robust, node_potential, orient, pair_value, partition_potential, perturb,
    run_dynamics, sinks, DynamicsConfig, Familiarity, Graph, MoveClass, NodeRule, NoiseSpec, Partition, QueueInit,
    Resolution, SappmSpec, Selection, TieBreak,
};
use num_rational::Ratio;
use proptest::prelude::*;

#[derive(Clone, Debug)]
struct Instance {
    graph: Graph,
    part: Partition,
    gamma: Resolution,
}

fn graph_strategy(max_n: usize) -> impl Strategy<Value = Graph> {
    (1..=max_n).prop_flat_map(|n| {
        let pairs = n * (n - 1) / 2;
        proptest::collection::vec(any::<bool>(), pairs).prop_map(move |bits| {
            let mut edges = Vec::new();
            let mut it = bits.into_iter();
            for u in 0..n {
                for v in u + 1..n {
                    if it.next().unwrap() {
                        edges.push((u, v));
                    }
                }
            }
            Graph::from_edges(n, edges).unwrap()
        })
    })
}

fn gamma_strategy() -> impl Strategy<Value = Resolution> {
    (1u64..=40).prop_flat_map(|c| (0..=c).prop_map(move |b| Resolution::new(b, c).unwrap()))
}

fn instance(max_n: usize) -> impl Strategy<Value = Instance> {
    (graph_strategy(max_n), 1usize..=5, gamma_strategy()).prop_flat_map(|(graph, k, gamma)| {
        let n = graph.node_count();
        proptest::collection::vec(0..k, n).prop_map(move |labels| Instance {
            graph: graph.clone(),
            part: Partition::new(labels, k).unwrap(),
            gamma,
        })
    })
}

/// Brute-force `c·Φ` from all node pairs.
fn pair_sum_units(inst: &Instance) -> i128 {
    let (g, p, gamma) = (&inst.graph, &inst.part, inst.gamma);
    let n = g.node_count();
    let mut total = 0i128;
    for i in 0..n {
        for j in i + 1..n {
            let same = p.community_of(i) == p.community_of(j);
            let v = pair_value(g.has_edge(i, j), same, gamma);
            if same {
                total += v.units;
            }
        }
    }
    total
}

/// Moves the node to the target slot and returns the new partition.
fn moved(part: &Partition, i: usize, target: usize) -> Partition {
    let mut labels = part.membership().to_vec();
    labels[i] = target;
    Partition::new(labels, part.slot_count()).unwrap()
}

fn any_move(inst: &Instance, seed: usize) -> Option<(usize, usize)> {
    let n = inst.part.node_count();
    let k = inst.part.slot_count();
    if n == 0 || k < 2 {
        return None;
    }
    let i = seed % n;
    let offset = 1 + (seed / n) % (k - 1);
    Some((i, (inst.part.community_of(i) + offset) % k))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn potential_is_sum_of_pair_values(inst in instance(12)) {
        let phi = partition_potential(&inst.graph, &inst.part, inst.gamma).unwrap();
        prop_assert_eq!(phi.units, pair_sum_units(&inst));
    }

    #[test]
    fn potential_is_sum_of_community_potentials(inst in instance(12)) {
        let phi = partition_potential(&inst.graph, &inst.part, inst.gamma).unwrap();
        let stats = community_stats(&inst.graph, &inst.part).unwrap();
        let sum: i128 = stats.iter().map(|s| community_units(s.size, s.internal_edges, inst.gamma)).sum();
        prop_assert_eq!(phi.units, sum);
    }

    #[test]
    fn potential_is_half_the_node_potentials(inst in instance(12)) {
        let phi = partition_potential(&inst.graph, &inst.part, inst.gamma).unwrap();
        let twice: i128 = (0..inst.graph.node_count())
            .map(|i| node_potential(&inst.graph, &inst.part, i, inst.part.community_of(i), inst.gamma).unwrap().units)
            .sum();
        prop_assert_eq!(2 * phi.units, twice);
    }

    #[test]
    fn potential_bounds_and_linearity(inst in instance(12)) {
        let g = &inst.graph;
        let phi = partition_potential(g, &inst.part, inst.gamma).unwrap();
        let at0 = partition_potential(g, &inst.part, Resolution::new(0, 1).unwrap()).unwrap();
        let at1 = partition_potential(g, &inst.part, Resolution::new(1, 1).unwrap()).unwrap();
        let (b, c) = (inst.gamma.numer() as i128, inst.gamma.denom() as i128);
        prop_assert_eq!(phi.units, (c - b) * at0.units + b * at1.units);
        prop_assert!(at0.units >= 0 && at0.units <= g.edge_count() as i128);
        prop_assert!(at1.units <= 0);
    }

    #[test]
    fn degree_pairs_exhaust_the_graph(inst in instance(12)) {
        let (g, p) = (&inst.graph, &inst.part);
        for i in 0..g.node_count() {
            let mut d_total = 0;
            let mut others = 0;
            for k in 0..p.slot_count() {
                let pair = degrees_in(g, p, i, k).unwrap();
                d_total += pair.d;
                others += pair.d + pair.dhat;
            }
            prop_assert_eq!(d_total, g.degree(i));
            prop_assert_eq!(others, g.node_count() - 1);
        }
    }

    #[test]
    fn handshake(g in graph_strategy(15)) {
        let total: usize = (0..g.node_count()).map(|i| g.degree(i)).sum();
        prop_assert_eq!(total, 2 * g.edge_count());
    }

    #[test]
    fn edge_list_order_and_direction_do_not_matter(g in graph_strategy(10), flip in any::<u64>()) {
        let mut edges: Vec<(usize, usize)> = g.edges().collect();
        edges.reverse();
        let text: String = edges
            .iter()
            .enumerate()
            .map(|(e, &(u, v))| if flip >> (e % 64) & 1 == 1 { format!("{v} {u}\n") } else { format!("{u} {v}\n") })
            .collect();
        let parsed = Graph::parse_edge_list(&text, Some(g.node_count())).unwrap();
        prop_assert_eq!(parsed.edge_set(), g.edge_set());
    }

    #[test]
    fn move_gain_equals_potential_change(inst in instance(12), seed in any::<usize>()) {
        if let Some((i, t)) = any_move(&inst, seed) {
            let before = partition_potential(&inst.graph, &inst.part, inst.gamma).unwrap();
            let after = partition_potential(&inst.graph, &moved(&inst.part, i, t), inst.gamma).unwrap();
            let gain = move_gain(&inst.graph, &inst.part, i, t, inst.gamma).unwrap();
            prop_assert_eq!(gain.gain_units, after.units - before.units);
            let mut p = inst.part.clone();
            prop_assert_eq!(apply_move(&inst.graph, &mut p, i, t, inst.gamma).unwrap(), gain);
            prop_assert_eq!(p, moved(&inst.part, i, t));
        }
    }

    #[test]
    fn move_gain_equals_node_potential_change(inst in instance(12), seed in any::<usize>()) {
        if let Some((i, t)) = any_move(&inst, seed) {
            let g = &inst.graph;
            let from = inst.part.community_of(i);
            let here = node_potential(g, &inst.part, i, from, inst.gamma).unwrap();
            let there = node_potential(g, &inst.part, i, t, inst.gamma).unwrap();
            let gain = move_gain(g, &inst.part, i, t, inst.gamma).unwrap();
            prop_assert_eq!(gain.gain_units, there.units - here.units);
        }
    }

    #[test]
    fn classification_predicts_gain_sign(inst in instance(10), seed in any::<usize>()) {
        if let Some((i, t)) = any_move(&inst, seed) {
            let m = move_gain(&inst.graph, &inst.part, i, t, inst.gamma).unwrap().deltas();
            let class = classify_move(m);
            for c in 1..=12u64 {
                for b in 0..=c {
                    let gamma = Resolution::new(b, c).unwrap();
                    let x = Ratio::new(b as i64, c as i64);
                    let gain = m.gain_units(gamma);
                    match class {
                        MoveClass::AlwaysPreferred => prop_assert!(gain >= 0),
                        MoveClass::NeverPreferred => prop_assert!(gain <= 0),
                        MoveClass::Neutral => prop_assert_eq!(gain, 0),
                        MoveClass::FrustratedGainBelow(t) => prop_assert_eq!(gain > 0, x < t),
                        MoveClass::FrustratedGainAbove(t) => prop_assert_eq!(gain > 0, x > t),
                    }
                }
            }
        }
    }

    #[test]
    fn familiarity_inside_unit_interval_iff_frustrated(inst in instance(10), seed in any::<usize>()) {
        if let Some((i, t)) = any_move(&inst, seed) {
            let f = familiarity(&inst.graph, &inst.part, i, t).unwrap();
            let m = move_gain(&inst.graph, &inst.part, i, t, inst.gamma).unwrap();
            let inside = match f {
                Familiarity::Finite(r) => r > Ratio::from_integer(0) && r < Ratio::from_integer(1),
                Familiarity::Undefined => false,
            };
            prop_assert_eq!(inside, m.classify().is_frustrated());
        }
    }

    #[test]
    fn robust_iff_stable_at_both_extremes(inst in instance(10)) {
        let g = &inst.graph;
        let zero = Resolution::new(0, 1).unwrap();
        let one = Resolution::new(1, 1).unwrap();
        for i in 0..g.node_count() {
            let stable = |gamma| (0..inst.part.slot_count())
                .all(|k| k == inst.part.community_of(i) || move_gain(g, &inst.part, i, k, gamma).unwrap().gain_units <= 0);
            prop_assert_eq!(node_is_robust(g, &inst.part, i).unwrap(), stable(zero) && stable(one));
        }
    }

    #[test]
    fn gamma_range_matches_equilibrium_checks(inst in instance(9)) {
        let range = equilibrium_gamma_range(&inst.graph, &inst.part).unwrap();
        for c in 1..=10u64 {
            for b in 0..=c {
                let gamma = Resolution::new(b, c).unwrap();
                let eq = is_equilibrium(&inst.graph, &inst.part, gamma).unwrap().is_equilibrium();
                prop_assert_eq!(eq, range.contains(gamma), "gamma {} range {}", gamma, range);
            }
        }
        if let Some(mid) = range.midpoint() {
            prop_assert!(is_equilibrium(&inst.graph, &inst.part, mid).unwrap().is_equilibrium());
        }
    }

    #[test]
    fn fully_robust_partitions_have_full_range(inst in instance(9)) {
        let robust = robust_nodes(&inst.graph, &inst.part).unwrap();
        if robust.iter().all(|&r| r) {
            prop_assert_eq!(equilibrium_gamma_range(&inst.graph, &inst.part).unwrap().to_string(), "0/1 .. 1/1");
        }
    }

    #[test]
    fn balanced_equilibria_at_zero_are_fully_robust(inst in instance(9)) {
        let zero = Resolution::new(0, 1).unwrap();
        if is_balanced(&inst.part) && is_equilibrium(&inst.graph, &inst.part, zero).unwrap().is_equilibrium() {
            prop_assert!(robust_nodes(&inst.graph, &inst.part).unwrap().into_iter().all(|r| r));
        }
    }
}

fn config_strategy() -> impl Strategy<Value = DynamicsConfig> {
    (0u8..5, any::<bool>(), any::<bool>(), any::<u64>()).prop_map(|(kind, shuffled, empty, seed)| {
        let base = match kind {
            0 => DynamicsConfig::default(),
            1 => DynamicsConfig { node_rule: NodeRule::Better, ..Default::default() },
            2 => DynamicsConfig { node_rule: NodeRule::Better, tie_break: TieBreak::Seeded, ..Default::default() },
            3 => DynamicsConfig { selection: Selection::GlobalBest, ..Default::default() },
            _ => DynamicsConfig { tie_break: TieBreak::Seeded, ..Default::default() },
        };
        DynamicsConfig {
            queue_init: if shuffled { QueueInit::Shuffled } else { QueueInit::IdOrder },
            allow_empty_target: empty || base.selection == Selection::GlobalBest,
            seed,
            record_trajectory: true,
            ..base
        }
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn dynamics_reach_equilibria_within_bound(inst in instance(60), config in config_strategy()) {
        let g = &inst.graph;
        let (end, stats) = run_dynamics(g, &inst.part, inst.gamma, &config).unwrap();
        let n = g.node_count() as u64;
        prop_assert!(stats.moves <= 2 * inst.gamma.denom() * n * n);
        let trajectory = stats.trajectory.unwrap();
        prop_assert_eq!(trajectory.len() as u64, stats.moves);
        prop_assert!(trajectory.iter().all(|s| s.gain_units >= 1));
        let start = partition_potential(g, &inst.part, inst.gamma).unwrap().units;
        let total: i128 = trajectory.iter().map(|s| s.gain_units).sum();
        prop_assert_eq!(stats.final_potential.units, start + total);
        if config.allow_empty_target {
            prop_assert!(is_equilibrium(g, &end, inst.gamma).unwrap().is_equilibrium());
        }
    }

    #[test]
    fn extreme_resolutions_converge_in_n_squared(inst in instance(40), one in any::<bool>()) {
        let gamma = Resolution::new(u64::from(one), 1).unwrap();
        let (_, stats) = run_dynamics(&inst.graph, &inst.part, gamma, &DynamicsConfig::default()).unwrap();
        let n = inst.graph.node_count() as u64;
        prop_assert!(stats.moves <= n * n);
    }

    #[test]
    fn ari_is_symmetric_and_label_invariant(
        x in proptest::collection::vec(0usize..6, 2..40),
        seed in proptest::collection::vec(0usize..6, 40),
        perm in Just([3usize, 5, 0, 1, 4, 2]),
    ) {
        let y: Vec<usize> = seed[..x.len()].to_vec();
        let xy = ari_labels(&x, &y).unwrap();
        prop_assert!((xy - ari_labels(&y, &x).unwrap()).abs() < 1e-12);
        let relabeled: Vec<usize> = x.iter().map(|&l| perm[l]).collect();
        prop_assert!((xy - ari_labels(&relabeled, &y).unwrap()).abs() < 1e-12);
        prop_assert!((ari_labels(&x, &relabeled).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn perturb_preserves_sizes(k in 1usize..6, per in 1usize..20, eta in 0.0f64..=1.0, seed in any::<u64>()) {
        let spec = SappmSpec { k, n_per_community: per, p: 0.5, lambda: 0.5, seed };
        let (_, truth) = generate(&spec).unwrap();
        let noisy = perturb(&truth, &NoiseSpec { eta, seed }).unwrap();
        prop_assert_eq!(noisy.sizes(), truth.sizes());
        let changed = (0..truth.node_count()).filter(|&i| noisy.community_of(i) != truth.community_of(i)).count();
        prop_assert!(changed <= selected_count(eta, truth.node_count()));
    }

    #[test]
    fn generator_is_deterministic(k in 1usize..5, per in 1usize..15, seed in any::<u64>()) {
        let spec = SappmSpec { k, n_per_community: per, p: 0.3, lambda: 0.4, seed };
        let (g1, t1) = generate(&spec).unwrap();
        let (g2, t2) = generate(&spec).unwrap();
        prop_assert_eq!(g1.edge_set(), g2.edge_set());
        prop_assert_eq!(t1, t2);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn metagraph_edges_are_single_moves(g in graph_strategy(6)) {
        let meta = build_metagraph(&g).unwrap();
        for edge in &meta.edges {
            let a = meta.partitions[edge.a].to_partition();
            let b = meta.partitions[edge.b].to_partition();
            let movers = edge.movers();
            prop_assert!(!movers.is_empty());
            for &i in &movers {
                let target = (0..g.node_count())
                    .find(|&k| moved(&a, i, k).same_grouping(&b))
                    .expect("mover reaches the other partition");
                let gain = move_gain(&g, &a, i, target, Resolution::new(0, 1).unwrap()).unwrap();
                prop_assert_eq!(gain.deltas(), edge.deltas);
            }
        }
        let dist = meta.distances_from(0);
        prop_assert!(dist.iter().all(|&d| d <= g.node_count()));
    }

    #[test]
    fn metagraph_sinks_are_equilibria(g in graph_strategy(6), gamma in gamma_strategy()) {
        let meta = build_metagraph(&g).unwrap();
        let oriented = orient(&meta, gamma);
        prop_assert!(oriented.is_acyclic());
        let sink_ids = sinks(&oriented);
        for (id, sp) in meta.partitions.iter().enumerate() {
            let eq = is_equilibrium(&g, &sp.to_partition(), gamma).unwrap().is_equilibrium();
            prop_assert_eq!(eq, sink_ids.contains(&id));
        }
    }
}

#[test]
fn generator_edge_counts_stay_within_four_sigma() {
    let spec = SappmSpec { k: 3, n_per_community: 40, p: 0.2, lambda: 0.5, seed: 7 };
    let (g, truth) = generate(&spec).unwrap();
    let n = g.node_count();
    let (mut within, mut across) = (0f64, 0f64);
    for (u, v) in g.edges() {
        if truth.community_of(u) == truth.community_of(v) {
            within += 1.0;
        } else {
            across += 1.0;
        }
    }
    let pairs_within = (3 * 40 * 39 / 2) as f64;
    let pairs_across = (n * (n - 1) / 2) as f64 - pairs_within;
    for (count, pairs, prob) in [(within, pairs_within, spec.p), (across, pairs_across, spec.q())] {
        let mean = pairs * prob;
        let sd = (pairs * prob * (1.0 - prob)).sqrt();
        assert!((count - mean).abs() <= 4.0 * sd, "{count} vs {mean} ± {sd}");
    }
}
