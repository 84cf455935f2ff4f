mod common;

use std::sync::Arc;

use prodform::equilibria::*;
use prodform::finite::{FactorKind, FiniteFactor, Partition, ProductSpace};
use prodform::normal_form::{normal_form_matrix, Evaluator, SolveOptions};
use prodform::preferences::{apply_risk, approx_eq, Belief, RiskMeasure, Sense};
use prodform::wmodel::{
    AgentId, AgentSpec, InfoSpec, PlayabilityOptions, ProfileSelection, WModel,
};
use proptest::prelude::*;
use rand::Rng;

fn space(sizes: &[usize]) -> Arc<ProductSpace> {
    Arc::new(
        ProductSpace::new(
            sizes
                .iter()
                .enumerate()
                .map(|(i, &n)| {
                    FiniteFactor::new(
                        &format!("f{i}"),
                        FactorKind::NatureExogenous,
                        (0..n).map(|k| k.to_string()),
                    )
                })
                .collect(),
        )
        .unwrap(),
    )
}

/// Factor sizes with at most 64 points, plus three labelings of them.
fn partitions() -> impl Strategy<Value = (Vec<usize>, Vec<u8>, Vec<u8>, Vec<u8>)> {
    prop::collection::vec(1usize..=4, 1..=3).prop_flat_map(|sizes| {
        let n: usize = sizes.iter().product();
        let labels = || prop::collection::vec(0u8..4, n);
        (Just(sizes), labels(), labels(), labels())
    })
}

fn values_and_masses() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (1usize..8).prop_flat_map(|n| {
        (
            prop::collection::vec(-50.0f64..50.0, n),
            prop::collection::vec(0u32..5, n)
                .prop_filter("some mass", |w| w.iter().any(|&x| x > 0)),
        )
            .prop_map(|(v, w)| {
                let s: u32 = w.iter().sum();
                (v, w.iter().map(|&x| x as f64 / s as f64).collect())
            })
    })
}

fn nature_of(n: usize) -> ProductSpace {
    ProductSpace::new(vec![FiniteFactor::new(
        "w",
        FactorKind::NatureExogenous,
        (0..n).map(|k| k.to_string()),
    )])
    .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn refinement_is_a_partial_order((sizes, a, b, c) in partitions()) {
        let s = space(&sizes);
        let p = Partition::from_labels(s.clone(), &a).unwrap();
        let q = Partition::from_labels(s.clone(), &b).unwrap();
        let r = Partition::from_labels(s, &c).unwrap();
        prop_assert!(p.refines(&p).unwrap());
        if p.refines(&q).unwrap() && q.refines(&r).unwrap() {
            prop_assert!(p.refines(&r).unwrap());
        }
        if p.refines(&q).unwrap() && q.refines(&p).unwrap() {
            prop_assert_eq!(&p, &q);
        }
        // transitivity through the meet, which always refines both
        let m = p.common_refinement(&q).unwrap();
        prop_assert!(m.refines(&p).unwrap() && m.refines(&q).unwrap());
    }

    #[test]
    fn meet_is_the_coarsest_common_refinement((sizes, a, b, c) in partitions()) {
        let s = space(&sizes);
        let p = Partition::from_labels(s.clone(), &a).unwrap();
        let q = Partition::from_labels(s.clone(), &b).unwrap();
        let r = Partition::from_labels(s, &c).unwrap();
        let m = p.common_refinement(&q).unwrap();
        if r.refines(&p).unwrap() && r.refines(&q).unwrap() {
            prop_assert!(r.refines(&m).unwrap());
        }
        let rp = r.common_refinement(&p).unwrap().common_refinement(&q).unwrap();
        prop_assert!(rp.refines(&m).unwrap());
    }

    #[test]
    fn cylinders_are_monotone(sizes in prop::collection::vec(1usize..=4, 1..=3), mask_a in 0u8..8, mask_b in 0u8..8) {
        let s = space(&sizes);
        let ids = |mask: u8| (0..sizes.len()).filter(|i| mask & (1 << i) != 0).map(|i| format!("f{i}")).collect::<Vec<_>>();
        let small = ids(mask_a & mask_b);
        let big = ids(mask_a);
        let cs = Partition::cylinder(s.clone(), &small).unwrap();
        let cb = Partition::cylinder(s, &big).unwrap();
        prop_assert!(cb.refines(&cs).unwrap());
    }

    #[test]
    fn measurability_passes_to_refinements((sizes, a, b, map) in partitions()) {
        let s = space(&sizes);
        let p = Partition::from_labels(s.clone(), &a).unwrap();
        let q = Partition::from_labels(s, &b).unwrap();
        // a map measurable w.r.t. p by construction
        let f: Vec<u8> = p.labels().iter().map(|&l| map[l as usize % map.len()]).collect();
        prop_assert!(p.is_measurable(&f).unwrap());
        let fine = q.common_refinement(&p).unwrap();
        prop_assert!(fine.is_measurable(&f).unwrap());
        if q.refines(&p).unwrap() {
            prop_assert!(q.is_measurable(&f).unwrap());
        }
    }

    #[test]
    fn coarsening_preserves_absence_of_self_information(seed in any::<u64>()) {
        let mut r = common::rng(seed);
        // agents observe anything but their own action, cycles allowed
        let n_agents = r.gen_range(1..=3);
        let nature = vec![FiniteFactor::new("n", FactorKind::NatureExogenous, ["0", "1"])];
        let mut specs: Vec<AgentSpec> = (0..n_agents)
            .map(|k| {
                let mut visible: Vec<String> = Vec::new();
                if r.gen_bool(0.5) { visible.push("n".into()); }
                for j in 0..n_agents {
                    if j != k && r.gen_bool(0.5) { visible.push(format!("u{j}")); }
                }
                AgentSpec::new(
                    AgentId::new(&format!("a{k}")),
                    FiniteFactor::new(&format!("u{k}"), FactorKind::Action, ["0", "1"]),
                    InfoSpec::Cylinder(visible),
                )
            })
            .collect();
        let model = WModel::new(nature.clone(), specs.clone()).unwrap();
        for (k, spec) in specs.iter_mut().enumerate() {
            let p = model.info(k);
            let merge: Vec<usize> = (0..p.atom_count()).map(|_| r.gen_range(0..3)).collect();
            spec.info = InfoSpec::Explicit(p.labels().iter().map(|&l| merge[l as usize]).collect());
        }
        prop_assert!(WModel::new(nature, specs).is_ok());
    }

    #[test]
    fn solution_maps_agree_and_solve_the_closed_loop(seed in any::<u64>()) {
        let mut r = common::rng(seed);
        let model = common::random_sequential_model(&mut r);
        prop_assert!(model.check_sequential().is_some());
        for _ in 0..4 {
            let prof = common::random_profile(&mut r, &model);
            let fwd = model.solution_map(&prof).unwrap();
            let brute = model.solution_map_brute_force(&prof).unwrap();
            prop_assert_eq!(&fwd, &brute);
            let lambdas: Vec<Vec<usize>> = prof.strategies.iter().map(|s| s.on_configurations(&model)).collect();
            for (w, &h) in fwd.outcomes.iter().enumerate() {
                let acts = fwd.actions(&model, w);
                for a in 0..model.agent_count() {
                    prop_assert_eq!(lambdas[a][h], acts[a]);
                }
            }
        }
    }

    #[test]
    fn sequential_models_are_playable_by_enumeration(seed in any::<u64>()) {
        let mut r = common::rng(seed);
        let model = common::random_sequential_model(&mut r);
        let opts = PlayabilityOptions { sequential_shortcut: false, ..Default::default() };
        // exhaustive when small enough, sampled otherwise
        let selection = match model.count_profiles() {
            Some(c) if c <= 5000 => ProfileSelection::All,
            _ => ProfileSelection::Sample { n: 300, seed },
        };
        let report = model.check_playability(&selection, &opts).unwrap();
        prop_assert!(report.playable);
        prop_assert!(report.witnesses.is_empty());
    }

    #[test]
    fn strategy_count_is_actions_to_the_atoms(seed in any::<u64>()) {
        let mut r = common::rng(seed);
        let model = common::random_sequential_model(&mut r);
        for a in 0..model.agent_count() {
            let expected = (model.action_size(a) as u128).pow(model.info(a).atom_count() as u32);
            prop_assert_eq!(model.count_strategies(a), Some(expected));
            if expected <= 100_000 {
                prop_assert_eq!(model.enumerate_strategies(a, 100_000).unwrap().count() as u128, expected);
            } else {
                let capped = model.enumerate_strategies(a, 100_000).map(|_| ());
                let hit = matches!(capped, Err(prodform::Error::CapacityExceeded { count, .. }) if count == expected);
                prop_assert!(hit);
            }
        }
    }

    #[test]
    fn belief_masses_sum_to_one(ws in prop::collection::vec(prop::collection::vec(1u32..5, 1..4), 1..4)) {
        let factors: Vec<Vec<f64>> = ws.iter().map(|w| {
            let s: u32 = w.iter().sum();
            w.iter().map(|&x| x as f64 / s as f64).collect()
        }).collect();
        let nature = ProductSpace::new(
            factors.iter().enumerate().map(|(i, v)| FiniteFactor::new(&format!("f{i}"), FactorKind::NatureType, (0..v.len()).map(|k| k.to_string()))).collect()
        ).unwrap();
        let b = Belief::Product(factors);
        let masses = b.masses(&nature);
        prop_assert!((masses.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        let j = Belief::Joint(masses.clone());
        prop_assert!(j.validate(&nature).is_ok());
        prop_assert!((j.masses(&nature).iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn expectation_is_linear((v, m) in values_and_masses(), shift in -10.0f64..10.0, a in 0.0f64..5.0, b in 0.0f64..5.0) {
        let n = v.len();
        let nature = nature_of(n);
        let w: Vec<f64> = v.iter().map(|x| x * 0.5 + shift).collect();
        let risk = RiskMeasure::Expectation(Belief::Joint(m));
        let e = |t: &[f64]| apply_risk(&risk, &nature, t, Sense::Cost).unwrap();
        let combo: Vec<f64> = (0..n).map(|i| a * v[i] + b * w[i]).collect();
        prop_assert!((e(&combo) - (a * e(&v) + b * e(&w))).abs() < 1e-9 * (1.0 + e(&combo).abs()));
    }

    #[test]
    fn cvar_moves_toward_expectation((v, m) in values_and_masses(), a1 in 0.01f64..1.0, a2 in 0.01f64..1.0) {
        let nature = nature_of(v.len());
        let b = Belief::Joint(m);
        let cvar = |alpha: f64| apply_risk(&RiskMeasure::CVaR { alpha, belief: b.clone() }, &nature, &v, Sense::Cost).unwrap();
        let e = apply_risk(&RiskMeasure::Expectation(b.clone()), &nature, &v, Sense::Cost).unwrap();
        let wc = apply_risk(&RiskMeasure::WorstCase(Some(b.clone())), &nature, &v, Sense::Cost).unwrap();
        let (lo, hi) = if a1 <= a2 { (a1, a2) } else { (a2, a1) };
        prop_assert!(cvar(hi) <= cvar(lo) + 1e-9);
        prop_assert!((cvar(1.0) - e).abs() < 1e-9);
        prop_assert!(wc + 1e-9 >= cvar(lo) && cvar(lo) + 1e-9 >= e);
    }

    #[test]
    fn dirac_games_value_the_single_outcome(seed in any::<u64>()) {
        let mut r = common::rng(seed);
        let g = common::random_leader_follower(&mut r);
        let nature = g.model.nature().clone();
        let w = r.gen_range(0..nature.len());
        let point = nature.point(w);
        let belief = Belief::Product(nature.sizes().iter().zip(&point).map(|(&n, &k)| {
            let mut v = vec![0.0; n]; v[k] = 1.0; v
        }).collect());
        let mut g = g;
        for d in &mut g.data { d.risk = RiskMeasure::Expectation(belief.clone()); }
        let g = prodform::WGame::new(g.model.clone(), g.players.clone(), g.data.clone()).unwrap();
        let ev = Evaluator::new(&g, SolveOptions::default()).unwrap();
        for i in 0..ev.strategy_count(0) {
            for j in 0..ev.strategy_count(1) {
                let map = g.model.solution_map(&ev.strategy_profile(&[i, j])).unwrap();
                let h = map.outcomes[w];
                for p in 0..2 {
                    prop_assert_eq!(ev.value(p, &[i, j]).unwrap(), g.data[p].objective.values[h]);
                }
            }
        }
    }

    #[test]
    fn zero_mass_rows_do_not_matter(seed in any::<u64>()) {
        let mut r = common::rng(seed);
        let g = common::random_leader_follower(&mut r);
        let ev = Evaluator::new(&g, SolveOptions::default()).unwrap();
        let space = g.model.configuration().clone();
        let nature_len = g.model.nature().len();
        let mut h = g.clone();
        for p in 0..2 {
            let masses = g.masses(p).to_vec();
            for c in 0..space.len() {
                let w = c / (space.len() / nature_len);
                if masses[w] == 0.0 {
                    h.data[p].objective.values[c] += 1000.0 + c as f64;
                }
            }
        }
        let ev2 = Evaluator::new(&h, SolveOptions::default()).unwrap();
        let m1 = normal_form_matrix(&ev).unwrap();
        let m2 = normal_form_matrix(&ev2).unwrap();
        prop_assert_eq!(m1, m2);
    }

    #[test]
    fn matrix_cells_are_pointwise_values(seed in any::<u64>()) {
        let mut r = common::rng(seed);
        let g = common::random_leader_follower(&mut r);
        let m = normal_form_matrix(&Evaluator::new(&g, SolveOptions::default()).unwrap()).unwrap();
        for _ in 0..5 {
            let i = r.gen_range(0..m.row_labels.len());
            let j = r.gen_range(0..m.col_labels.len());
            prop_assert_eq!(m.cells[i][j].0, prodform::normal_form::normal_form_value(&g, 0, &[i as u64, j as u64]).unwrap());
            prop_assert_eq!(m.cells[i][j].1, prodform::normal_form::normal_form_value(&g, 1, &[i as u64, j as u64]).unwrap());
        }
    }

    #[test]
    fn theta_interpolates_between_pessimistic_and_optimistic(seed in any::<u64>(), t1 in 0.0f64..=1.0, t2 in 0.0f64..=1.0) {
        let mut r = common::rng(seed);
        let g = common::random_leader_follower(&mut r);
        let ev = Evaluator::new(&g, SolveOptions::default()).unwrap();
        let sense = g.sense(0);
        let (lo, hi) = if t1 <= t2 { (t1, t2) } else { (t2, t1) };
        for l in 0..ev.strategy_count(0) {
            let v = |m| leader_value(&ev, 0, &[l], m).unwrap();
            let (opt, pess) = (v(StackelbergMode::Optimistic), v(StackelbergMode::Pessimistic));
            let (a, b) = (v(StackelbergMode::Theta(lo)), v(StackelbergMode::Theta(hi)));
            // "better for the leader" order
            let le = |x: f64, y: f64| !sense.strictly_better(x, y) || approx_eq(x, y);
            prop_assert!(le(pess, a) && le(a, b) && le(b, opt));
            prop_assert!((a - (lo * opt + (1.0 - lo) * pess)).abs() < 1e-9 * (1.0 + opt.abs()));
        }
    }

    #[test]
    fn affine_rescaling_keeps_argsets(seed in any::<u64>(), scale in 0.1f64..10.0, shift in -20.0f64..20.0) {
        let mut r = common::rng(seed);
        let g = common::random_leader_follower(&mut r);
        let p = r.gen_range(0..2);
        let h = g.map_objective(p, |v| scale * v + shift);
        let (e1, e2) = (Evaluator::new(&g, SolveOptions::default()).unwrap(), Evaluator::new(&h, SolveOptions::default()).unwrap());
        let strat = |r: &EquilibriumReport| r.profiles.iter().map(|p| p.strategies.clone()).collect::<Vec<_>>();
        prop_assert_eq!(strat(&nash_equilibria(&e1).unwrap()), strat(&nash_equilibria(&e2).unwrap()));
        for l in 0..e1.strategy_count(0) {
            prop_assert_eq!(best_responses(&e1, 1, &[l, 0]).unwrap().strategies, best_responses(&e2, 1, &[l, 0]).unwrap().strategies);
        }
        for mode in [StackelbergMode::Optimistic, StackelbergMode::Pessimistic] {
            prop_assert_eq!(
                stackelberg_strategies(&e1, mode).unwrap().leader_profiles(),
                stackelberg_strategies(&e2, mode).unwrap().leader_profiles()
            );
        }
    }

    #[test]
    fn single_follower_nash_is_best_response(seed in any::<u64>()) {
        let mut r = common::rng(seed);
        let g = common::random_leader_follower(&mut r);
        let ev = Evaluator::new(&g, SolveOptions::default()).unwrap();
        for l in 0..ev.strategy_count(0) {
            let fnash: Vec<u64> = followers_nash(&ev, &[l]).unwrap().into_iter().map(|v| v[0]).collect();
            prop_assert_eq!(fnash, best_responses(&ev, 1, &[l, 0]).unwrap().strategies);
        }
    }
}
