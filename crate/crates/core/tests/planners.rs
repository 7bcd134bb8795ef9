use kinoplan::dynamics::{propagate, ControlSegment};
use kinoplan::planners::*;
use kinoplan::systems::{builtin_environment, make_system, Environment, Interval, StateBound};
use kinoplan::{ControlInput, Error, StateVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

fn point() -> kinoplan::SystemModel {
    make_system("point2d").unwrap()
}

fn sv(v: &[f64]) -> StateVector {
    StateVector::from(v)
}

fn edge(duration: f64) -> ControlSegment {
    ControlSegment {
        control: ControlInput::new(vec![1.0, 0.0]),
        duration,
    }
}

fn open_point_env(start: [f64; 2], goal: [f64; 2]) -> Environment {
    Environment::open(&point(), sv(&start), sv(&goal), 0.5).unwrap()
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[test]
fn zero_iterations_leave_only_the_root() {
    let (system, env) = builtin_environment("point_maze").unwrap();
    for kind in PlannerKind::ALL {
        let mut config = PlannerConfig::for_system(&system);
        config.sststar = Some(SstStarParams { xi: 0.9, n0: 10 });
        let planner = Planner::new(kind, &system, &env, config).unwrap();
        assert_eq!(planner.tree().len(), 1, "{kind}");
        assert_eq!(planner.tree().root().state, env.start);
    }
}

#[test]
fn monte_carlo_prop_is_deterministic() {
    let system = point();
    let x = sv(&[0.0, 0.0]);
    let a = monte_carlo_prop(&system, &x, 0.5, &mut rng(3)).unwrap();
    let b = monte_carlo_prop(&system, &x, 0.5, &mut rng(3)).unwrap();
    assert_eq!(a.control, b.control);
    assert_eq!(a.states().collect::<Vec<_>>(), b.states().collect::<Vec<_>>());
}

#[test]
fn degenerate_control_box_only_varies_duration() {
    let system = point().with_control_bounds(vec![Interval::new(5.0, 5.0), Interval::new(0.3, 0.3)]);
    let x = sv(&[0.0, 0.0]);
    let mut r = rng(5);
    let mut durations = Vec::new();
    for _ in 0..50 {
        let traj = monte_carlo_prop(&system, &x, 0.5, &mut r).unwrap();
        let seg = &traj.control.segments()[0];
        assert_eq!(&*seg.control, &[5.0, 0.3]);
        durations.push(seg.duration);
    }
    durations.sort_by(f64::total_cmp);
    durations.dedup();
    assert!(durations.len() > 5);
}

#[test]
fn durations_are_quantized_and_uniform() {
    let system = point();
    let x = sv(&[0.0, 0.0]);
    let (t_prop, dt) = (0.5, system.dt);
    let bins = (t_prop / dt).round() as usize;
    let mut counts = vec![0u64; bins];
    let mut r = rng(11);
    let draws = 100_000;
    for _ in 0..draws {
        let d = monte_carlo_prop(&system, &x, t_prop, &mut r).unwrap().duration;
        let steps = (d / dt).round();
        assert!((d - steps * dt).abs() < 1e-12 && d > 0.0 && d <= t_prop + 1e-12);
        counts[steps as usize - 1] += 1;
    }
    let expected = draws as f64 / bins as f64;
    let stat: f64 = counts
        .iter()
        .map(|&c| (c as f64 - expected).powi(2) / expected)
        .sum();
    let critical = ChiSquared::new((bins - 1) as f64).unwrap().inverse_cdf(0.99);
    assert!(stat < critical, "chi-square {stat} >= {critical}");
}

/// A point system whose samples always land on `at`.
fn pinned_sampler(at: [f64; 2]) -> kinoplan::SystemModel {
    point().with_state_bounds(vec![StateBound::new(at[0], at[0]), StateBound::new(at[1], at[1])])
}

#[test]
fn selection_with_single_node_returns_it() {
    let system = point();
    let mut tree = PlannerTree::new(&system, sv(&[0.0, 0.0]), 0);
    let mut r = rng(0);
    for _ in 0..20 {
        assert_eq!(best_first_selection_sst(&mut tree, &system, 1.0, &mut r), 0);
    }
}

#[test]
fn selection_prefers_cheapest_within_radius() {
    let system = point();
    let mut tree = PlannerTree::new(&system, sv(&[9.0, 9.0]), 0);
    let expensive = tree.add_child(0, sv(&[0.3, 0.0]), edge(5.0));
    let cheap = tree.add_child(0, sv(&[-0.3, 0.0]), edge(3.0));
    let sampler = pinned_sampler([0.0, 0.0]);
    let chosen = best_first_selection_sst(&mut tree, &sampler, 1.0, &mut rng(1));
    assert_eq!(chosen, cheap);
    assert_ne!(chosen, expensive);
}

#[test]
fn selection_falls_back_to_nearest() {
    let system = point();
    let mut tree = PlannerTree::new(&system, sv(&[9.0, 9.0]), 0);
    let near = tree.add_child(0, sv(&[3.0, 0.0]), edge(5.0));
    let sampler = pinned_sampler([0.0, 0.0]);
    assert_eq!(best_first_selection_sst(&mut tree, &sampler, 1.0, &mut rng(1)), near);
}

/// Root at the origin with a witness it represents.
fn sparse_tree() -> PlannerTree {
    let mut tree = PlannerTree::new(&point(), sv(&[0.0, 0.0]), 0);
    let w = tree.add_witness(sv(&[0.0, 0.0]));
    prune_dominated_nodes_sst(&mut tree, 0, w);
    tree
}

#[test]
fn far_state_creates_witness() {
    let mut tree = sparse_tree();
    let (best, w) = is_node_locally_best_sst(&mut tree, &sv(&[0.6, 0.0]), 1.0, 0.5);
    assert!(best);
    assert_eq!(w, 1);
    assert_eq!(tree.witnesses().len(), 2);
    assert_eq!(tree.witness(w).unwrap().rep, None);
}

#[test]
fn local_best_comparison_is_strict() {
    let mut tree = sparse_tree();
    let rep = tree.add_child(0, sv(&[3.0, 0.0]), edge(5.0));
    let w = tree.add_witness(sv(&[3.0, 0.0]));
    prune_dominated_nodes_sst(&mut tree, rep, w);

    assert_eq!(is_node_locally_best_sst(&mut tree, &sv(&[3.1, 0.0]), 4.0, 0.5), (true, w));
    assert_eq!(is_node_locally_best_sst(&mut tree, &sv(&[3.1, 0.0]), 5.0, 0.5), (false, w));
    assert_eq!(tree.witnesses().len(), 2);
}

#[test]
fn pruning_without_previous_rep_only_assigns() {
    let mut tree = sparse_tree();
    let n = tree.add_child(0, sv(&[2.0, 0.0]), edge(1.0));
    let w = tree.add_witness(sv(&[2.0, 0.0]));
    prune_dominated_nodes_sst(&mut tree, n, w);
    assert_eq!(tree.witness(w).unwrap().rep, Some(n));
    assert_eq!(tree.len(), 2);
    assert!(tree.check_invariants(0.5).is_empty());
}

#[test]
fn pruning_cascades_through_inactive_chain() {
    let mut tree = sparse_tree();
    let mut chain = Vec::new();
    let mut witnesses = Vec::new();
    let mut parent = 0;
    for i in 1..=3 {
        let n = tree.add_child(parent, sv(&[i as f64, 0.0]), edge(1.0));
        let w = tree.add_witness(sv(&[i as f64, 0.0]));
        prune_dominated_nodes_sst(&mut tree, n, w);
        chain.push(n);
        witnesses.push(w);
        parent = n;
    }

    // Dominate the two interior nodes: they lose their witnesses but keep
    // an active descendant, so they stay as inactive.
    for i in 0..2 {
        let better = tree.add_child(0, sv(&[i as f64 + 1.1, 0.0]), edge(0.5));
        prune_dominated_nodes_sst(&mut tree, better, witnesses[i]);
        let node = tree.node(chain[i]).expect("kept");
        assert!(!node.active);
    }
    assert_eq!(tree.len(), 6);
    assert!(tree.check_invariants(0.5).is_empty());

    // Dominating the leaf removes it and both inactive ancestors.
    let better = tree.add_child(0, sv(&[3.1, 0.0]), edge(0.5));
    prune_dominated_nodes_sst(&mut tree, better, witnesses[2]);
    for &n in &chain {
        assert!(tree.node(n).is_none());
    }
    assert_eq!(tree.len(), 4);
    assert!(tree.root().active);
    assert_eq!(tree.active_count(), tree.witnesses().len());
    assert!(tree.check_invariants(0.5).is_empty());
}

#[test]
fn pruning_stops_at_branching_ancestor() {
    let mut tree = sparse_tree();
    let a = tree.add_child(0, sv(&[1.0, 0.0]), edge(1.0));
    let wa = tree.add_witness(sv(&[1.0, 0.0]));
    prune_dominated_nodes_sst(&mut tree, a, wa);
    let b = tree.add_child(a, sv(&[2.0, 0.0]), edge(1.0));
    let wb = tree.add_witness(sv(&[2.0, 0.0]));
    prune_dominated_nodes_sst(&mut tree, b, wb);
    let c = tree.add_child(a, sv(&[1.0, 1.0]), edge(1.0));
    let wc = tree.add_witness(sv(&[1.0, 1.0]));
    prune_dominated_nodes_sst(&mut tree, c, wc);

    let a2 = tree.add_child(0, sv(&[1.1, 0.0]), edge(0.5));
    prune_dominated_nodes_sst(&mut tree, a2, wa);
    let b2 = tree.add_child(0, sv(&[2.1, 0.0]), edge(1.5));
    prune_dominated_nodes_sst(&mut tree, b2, wb);

    assert!(tree.node(b).is_none());
    let a_node = tree.node(a).expect("still has an active child");
    assert!(!a_node.active);
    assert_eq!(a_node.children, vec![c]);
    assert!(tree.check_invariants(0.5).is_empty());
}

fn assert_sst_invariants(env_name: &str, collision_first: bool) {
    let (system, env) = builtin_environment(env_name).unwrap();
    for seed in 0..3 {
        let mut config = PlannerConfig::for_system(&system).with_seed(seed);
        config.collision_first = collision_first;
        let mut planner = Planner::new(PlannerKind::Sst, &system, &env, config.clone()).unwrap();
        let mut best = f64::INFINITY;
        for _ in 0..10 {
            planner.run(500);
            let errors = planner.tree().check_invariants(config.delta_s);
            assert!(errors.is_empty(), "{env_name} seed {seed}: {errors:?}");
            let cost = planner.tree().best_cost().unwrap_or(f64::INFINITY);
            assert!(cost <= best);
            best = cost;
        }
    }
}

#[test]
fn sst_invariants_hold_on_point() {
    assert_sst_invariants("point_maze", false);
}

#[test]
fn sst_invariants_hold_on_pendulum() {
    assert_sst_invariants("pendulum_free", false);
}

#[test]
fn sst_invariants_hold_with_literal_check_order() {
    assert_sst_invariants("point_maze", true);
}

#[test]
fn sst_without_iterations_keeps_existing_tree() {
    let (system, env) = builtin_environment("point_maze").unwrap();
    let config = PlannerConfig::for_system(&system).with_iterations(2_000);
    let tree = sst(&system, &env, &config, &mut rng(4), None).unwrap();
    let nodes = tree.len();
    let again = sst(&system, &env, &config.clone().with_iterations(0), &mut rng(5), Some(tree)).unwrap();
    assert_eq!(again.len(), nodes);
    let grown = sst(&system, &env, &config, &mut rng(6), Some(again)).unwrap();
    assert!(grown.check_invariants(config.delta_s).is_empty());
}

#[test]
fn sprint_lengths_follow_schedule() {
    let xi: f64 = 0.9;
    assert_eq!(sprint_length(0, xi, 1000, 2, 2), 1000);
    assert_eq!(
        sprint_length(1, xi, 1000, 2, 2),
        (xi.powf(-5.0) * 1000.0).ceil() as u64
    );
    assert_eq!(sprint_length(2, xi, 1000, 2, 2), 4856);
    let schedule = sst_star_schedule(0.5, 1.0, xi, 1000, 2, 2, 6);
    for s in &schedule {
        let scale = xi.powi(s.index as i32);
        assert!((s.delta_s - 0.5 * scale).abs() < 1e-12);
        assert!((s.delta_bn - 1.0 * scale).abs() < 1e-12);
    }
}

#[test]
fn sst_star_shrinks_radii_between_sprints() {
    let (system, env) = builtin_environment("point_maze").unwrap();
    let mut config = PlannerConfig::for_system(&system);
    config.sststar = Some(SstStarParams { xi: 0.5, n0: 5 });
    let mut planner = Planner::new(PlannerKind::SstStar, &system, &env, config.clone()).unwrap();
    planner.run(5);
    assert_eq!(planner.sprint_index(), Some(0));
    assert_eq!(planner.radii(), (config.delta_s, config.delta_bn));
    planner.run(1);
    assert_eq!(planner.sprint_index(), Some(1));
    assert_eq!(planner.radii(), (config.delta_s * 0.5, config.delta_bn * 0.5));
    // Sprint 1 lasts ceil(0.5^-5 * 5) = 160 iterations.
    planner.run(159);
    assert_eq!(planner.sprint_index(), Some(1));
    planner.run(1);
    assert_eq!(planner.sprint_index(), Some(2));
    let (ds, _) = planner.radii();
    assert!(planner.tree().check_invariants(ds).is_empty());
}

#[test]
fn unpruned_planners_keep_every_propagation_in_open_space() {
    let wide = point().with_state_bounds(vec![StateBound::new(-1e4, 1e4); 2]);
    let env = Environment::open(&wide, sv(&[0.0, 0.0]), sv(&[9e3, 9e3]), 0.5).unwrap();
    for kind in [PlannerKind::NaiveRandomTree, PlannerKind::Rrt, PlannerKind::RrtBestNear] {
        let config = PlannerConfig::for_system(&wide).with_iterations(3_000);
        let mut planner = Planner::new(kind, &wide, &env, config).unwrap();
        planner.run(3_000);
        assert_eq!(planner.tree().len(), 3_001, "{kind}");
        assert!(planner.tree().check_invariants(0.5).is_empty());
    }
}

#[test]
fn rrt_extends_toward_repeated_sample() {
    let system = point();
    let env = open_point_env([-9.0, 0.0], [9.0, 9.0]);
    let sampler = pinned_sampler([9.0, 0.0]);
    let config = PlannerConfig::for_system(&system);
    let mut planner = Planner::new(PlannerKind::Rrt, &sampler, &env, config).unwrap();
    let mut frontier = -9.0;
    for _ in 0..300 {
        planner.step();
        let x = planner
            .tree()
            .nodes()
            .map(|n| n.state[0])
            .fold(f64::NEG_INFINITY, f64::max);
        assert!(x >= frontier);
        frontier = x;
    }
    assert!(frontier > 5.0, "frontier {frontier}");
}

#[test]
fn rrt_star_rejects_dynamic_systems() {
    let (system, env) = builtin_environment("pendulum_free").unwrap();
    let config = PlannerConfig::for_system(&system).with_iterations(10);
    assert!(matches!(
        rrt_star_point(&system, &env, &config, &mut rng(0)),
        Err(Error::InvalidConfig(_))
    ));
}

#[test]
fn rrt_star_rewiring_never_increases_cost() {
    let (system, env) = builtin_environment("point_maze").unwrap();
    let config = PlannerConfig::for_system(&system).with_seed(2);
    let mut planner = Planner::new(PlannerKind::RrtStar, &system, &env, config).unwrap();
    let mut costs: Vec<f64> = Vec::new();
    for _ in 0..3_000 {
        planner.step();
        for node in planner.tree().nodes() {
            if let Some(&c) = costs.get(node.id) {
                assert!(node.cost_from_root <= c + 1e-12);
            }
        }
        costs = (0..planner.tree().id_bound())
            .map(|id| planner.tree().node(id).map_or(f64::NAN, |n| n.cost_from_root))
            .collect();
    }
    assert!(planner.tree().check_invariants(0.5).is_empty());
    assert!(planner.tree().best_cost().is_some());
}

#[test]
fn no_solution_before_reaching_goal() {
    let (system, env) = builtin_environment("point_maze").unwrap();
    let config = PlannerConfig::for_system(&system).with_iterations(10);
    let tree = rrt(&system, &env, &config, &mut rng(0)).unwrap();
    assert!(solution_query(&tree, &system, &env).unwrap().is_none());
}

#[test]
fn cheapest_goal_node_wins() {
    let system = point();
    let mut tree = PlannerTree::new(&system, sv(&[0.0, 0.0]), 0);
    let control = ControlInput::new(vec![10.0, 0.0]);
    let seven = tree.add_child(0, sv(&[3.0, 0.0]), ControlSegment { control: control.clone(), duration: 7.0 });
    assert!(tree.offer_solution(seven));
    let five = tree.add_child(0, sv(&[3.0, 0.1]), ControlSegment { control, duration: 5.0 });
    assert!(tree.offer_solution(five));
    assert!(!tree.offer_solution(seven));
    assert_eq!(tree.best_solution().unwrap().node, five);
    assert_eq!(tree.best_cost(), Some(5.0));
}

#[test]
fn solution_replays_to_stored_goal_state() {
    for name in ["point_maze", "pendulum_free"] {
        let (system, env) = builtin_environment(name).unwrap();
        let config = PlannerConfig::for_system(&system).with_iterations(20_000);
        let tree = sst(&system, &env, &config, &mut rng(8), None).unwrap();
        let best = tree.best_solution().expect("solved");
        let traj = solution_query(&tree, &system, &env).unwrap().unwrap();
        let goal_state = best.waypoints.last().unwrap();
        let gap = system.distance(traj.final_state(), goal_state);
        assert!(gap < 1e-9, "{name}: {gap}");
        assert!((traj.cost - best.cost).abs() < 1e-9);
        assert!(env.collision_free(&traj));
        let replay = propagate(&system, &tree.root().state, &traj.control, system.dt).unwrap();
        assert!(system.distance(replay.final_state(), goal_state) < 1e-9);
    }
}

#[test]
fn every_planner_is_deterministic() {
    let (system, env) = builtin_environment("point_maze").unwrap();
    for kind in PlannerKind::ALL {
        let mut config = PlannerConfig::for_system(&system).with_seed(21);
        config.sststar = Some(SstStarParams { xi: 0.9, n0: 100 });
        let run = || {
            let mut p = Planner::new(kind, &system, &env, config.clone()).unwrap();
            p.run(2_000);
            p.into_tree()
                .nodes()
                .map(|n| (n.id, n.state.clone(), n.cost_from_root.to_bits(), n.parent))
                .collect::<Vec<_>>()
        };
        assert_eq!(run(), run(), "{kind}");
    }
}

#[test]
fn best_cost_never_increases() {
    let (system, env) = builtin_environment("point_maze").unwrap();
    for kind in PlannerKind::ALL {
        let mut config = PlannerConfig::for_system(&system).with_seed(1);
        config.sststar = Some(SstStarParams { xi: 0.9, n0: 500 });
        let mut p = Planner::new(kind, &system, &env, config).unwrap();
        let mut best = f64::INFINITY;
        for _ in 0..40 {
            p.run(100);
            let c = p.tree().best_cost().unwrap_or(f64::INFINITY);
            assert!(c <= best, "{kind}");
            best = c;
        }
    }
}

#[test]
fn config_validation() {
    let system = point();
    let env = open_point_env([0.0, 0.0], [5.0, 5.0]);
    let base = PlannerConfig::for_system(&system);
    let bad = [
        base.clone().with_radii(0.0, 1.0),
        base.clone().with_radii(1.0, 0.5),
        PlannerConfig { t_prop: system.dt, ..base.clone() },
        PlannerConfig { sststar: Some(SstStarParams { xi: 1.0, n0: 10 }), ..base.clone() },
        PlannerConfig { sststar: Some(SstStarParams { xi: 0.5, n0: 0 }), ..base.clone() },
    ];
    for config in bad {
        assert!(matches!(
            Planner::new(PlannerKind::Sst, &system, &env, config.clone()),
            Err(Error::InvalidConfig(_))
        ), "{config:?}");
    }
    assert!(Planner::new(PlannerKind::Sst, &system, &env, base.clone().with_radii(1.0, 1.0)).is_ok());
    assert!(Planner::new(PlannerKind::SstStar, &system, &env, base).is_err());
}

#[test]
fn planner_names_round_trip() {
    for kind in PlannerKind::ALL {
        assert_eq!(kind.name().parse::<PlannerKind>().unwrap(), kind);
    }
    assert_eq!("SST*".parse::<PlannerKind>().unwrap(), PlannerKind::SstStar);
    assert!(matches!("prm".parse::<PlannerKind>(), Err(Error::UnknownPlanner(_))));
}
