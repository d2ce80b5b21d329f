mod common;

use common::{random_case, Case, PLANS};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use tabprob::engines::{pcfg_prefix_engine, plcg_prefix_engine};
use tabprob::eqsolve::{
    assemble, check_linearity, decompose_scc, solve_fixpoint, solve_stratified, FixpointOptions,
};
use tabprob::explgraph::{build_graph, BuildConfig, ExplanationGraph};
use tabprob::model::{
    detect_useless, first_sets, left_corner_closure, make_plcg, parse_markov_chain, parse_plan_model,
    Pcfg,
};
use tabprob::oracle::{oracle_prefix_pcfg, oracle_reach, oracle_sentence_pcfg};
use tabprob::queries::{
    conditional_next, prefix_probability, reach_probability, recognize_plan, sentence_probability,
    SolveOptions,
};

fn case(seed: u64) -> Case {
    random_case(&mut ChaCha8Rng::seed_from_u64(seed))
}

fn prefix_graph(pcfg: &Pcfg<f64>, words: &[String]) -> Option<ExplanationGraph<tabprob::engines::ParseGoal, f64>> {
    build_graph(&pcfg_prefix_engine(pcfg, words, None).unwrap(), &BuildConfig::default()).unwrap()
}

fn tight() -> FixpointOptions {
    FixpointOptions {
        tol: 1e-12,
        max_iter: 1_000_000,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn model_invariants(seed in any::<u64>()) {
        let c = case(seed);
        let g = c.pcfg.grammar();
        for a in g.nonterminals() {
            let sum: f64 = g.rules_for(a).iter().map(|&r| c.pcfg.prob(r)).sum();
            prop_assert!((sum - 1.0).abs() <= 1e-9);
        }
        prop_assert!(detect_useless(g).is_empty());
        let lc = left_corner_closure(g);
        prop_assert_eq!(lc.compose(&lc).pairs().is_subset(lc.pairs()), true);
        let first = first_sets(g);
        for x in g.nonterminals() {
            for t in g.terminals() {
                let in_first = first.get(&x).is_some_and(|f| f.contains(&t));
                prop_assert_eq!(in_first, lc.contains(x, t));
            }
            if let Some(f) = first.get(&x) {
                prop_assert!(f.iter().all(|&t| !g.is_nonterminal(t)));
            }
        }
        let plcg = make_plcg::<f64>(c.pcfg.cfg(), None).unwrap();
        for x in g.nonterminals() {
            let dist = plcg.first_dist(x);
            let support: Vec<_> = dist.iter().map(|&(t, _)| t).collect();
            let expected: Vec<_> = first.get(&x).map(|f| f.iter().copied().collect()).unwrap_or_default();
            prop_assert_eq!(support, expected);
            for &(_, p) in dist {
                prop_assert!((p - 1.0 / dist.len() as f64).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn prefix_graphs_are_linear_closed_and_sound(seed in any::<u64>()) {
        let c = case(seed);
        for words in &c.prefixes {
            let Some(graph) = prefix_graph(&c.pcfg, words) else { continue };
            // closure: every referenced goal has a formula
            for id in graph.ids() {
                for alt in graph.formula(id) {
                    prop_assert!(alt.subgoals.iter().all(|g| g.0 < graph.len()));
                }
            }
            // soundness: recomputed provability holds everywhere
            let mut proved = vec![false; graph.len()];
            loop {
                let mut changed = false;
                for id in graph.ids() {
                    if !proved[id.0] && graph.formula(id).iter().any(|a| a.subgoals.iter().all(|g| proved[g.0])) {
                        proved[id.0] = true;
                        changed = true;
                    }
                }
                if !changed { break; }
            }
            prop_assert!(proved.iter().all(|&p| p));
            let sys = assemble(&graph);
            let d = decompose_scc(&sys);
            prop_assert!(check_linearity(&sys, &d).is_empty(), "{}\n{:?}", c.text, words);
            if !c.lc_cyclic {
                prop_assert!(!graph.is_cyclic(), "{}\n{:?}", c.text, words);
            }
            // strata partition the goals in dependency order
            let mut seen = vec![0usize; sys.len()];
            for s in &d.strata {
                for &v in &s.vars { seen[v] += 1; }
            }
            prop_assert!(seen.iter().all(|&n| n == 1));
            for v in 0..sys.len() {
                for t in sys.equation(v) {
                    prop_assert!(t.vars.iter().all(|&w| d.component_of[w] <= d.component_of[v]));
                }
            }
        }
    }

    #[test]
    fn solvers_agree_and_iterates_are_monotone(seed in any::<u64>()) {
        let c = case(seed);
        for words in &c.prefixes {
            let Some(graph) = prefix_graph(&c.pcfg, words) else { continue };
            let sys = assemble(&graph);
            let d = decompose_scc(&sys);
            let linear = solve_stratified(&sys, &d).unwrap();
            prop_assert!(linear.spectral.iter().all(|&rho| rho < 1.0), "{:?}", linear.spectral);
            let fix = solve_fixpoint(&sys, tight());
            prop_assert!(fix.converged && fix.monotone && fix.bounded);
            for (a, b) in linear.values.iter().zip(&fix.values) {
                prop_assert!((a - b).abs() <= 1e-8, "{} vs {}", a, b);
                prop_assert!((-1e-9..=1.0 + 1e-9).contains(a));
            }
            for id in graph.ids().filter(|&id| graph.is_fact(id)) {
                prop_assert_eq!(linear.values[id.0], 1.0);
            }
        }
    }

    #[test]
    fn oracle_is_a_monotone_lower_bound(seed in any::<u64>()) {
        let c = case(seed);
        let o = SolveOptions::default();
        for words in c.prefixes.iter().take(2) {
            let p = prefix_probability(&c.pcfg, words, None, &o).unwrap().probability;
            let s = sentence_probability(&c.pcfg, words, None, &o).unwrap().probability;
            prop_assert!(s <= p + 1e-12);
            let mut last = (0.0, 0.0);
            for budget in 0..=10 {
                let lp = oracle_prefix_pcfg(&c.pcfg, words, None, budget).unwrap().lower_bound;
                let ls = oracle_sentence_pcfg(&c.pcfg, words, None, budget).unwrap().lower_bound;
                prop_assert!(lp >= last.0 && ls >= last.1);
                prop_assert!(lp <= p + 1e-9 && ls <= s + 1e-9);
                last = (lp, ls);
            }
        }
    }

    #[test]
    fn one_symbol_decomposition(seed in any::<u64>()) {
        let c = case(seed);
        let o = SolveOptions::default();
        let words = &c.prefixes[0];
        let p = prefix_probability(&c.pcfg, words, None, &o).unwrap().probability;
        prop_assume!(p > 1e-9);
        let s = sentence_probability(&c.pcfg, words, None, &o).unwrap().probability;
        let mut total = s;
        for t in c.pcfg.grammar().terminal_names() {
            let mut w = words.clone();
            w.push(t.to_string());
            total += prefix_probability(&c.pcfg, &w, None, &o).unwrap().probability;
        }
        prop_assert!((total - p).abs() <= 1e-6, "{} vs {}", total, p);
        let next: f64 = conditional_next(&c.pcfg, words, None, &o).unwrap().iter().map(|(_, q)| q).sum();
        prop_assert!((next + s / p - 1.0).abs() <= 1e-6);
    }

    #[test]
    fn plcg_prefix_graphs_are_linear(seed in any::<u64>()) {
        let c = case(seed);
        let m = make_plcg::<f64>(c.pcfg.cfg(), None).unwrap();
        for words in &c.prefixes {
            let graph = build_graph(&plcg_prefix_engine(&m, words).unwrap(), &BuildConfig::default()).unwrap();
            let Some(graph) = graph else { continue };
            let sys = assemble(&graph);
            let d = decompose_scc(&sys);
            prop_assert!(check_linearity(&sys, &d).is_empty(), "{}\n{:?}", c.text, words);
            let linear = solve_stratified(&sys, &d).unwrap();
            let fix = solve_fixpoint(&sys, tight());
            prop_assert!((linear.values[0] - fix.values[0]).abs() <= 1e-8);
        }
    }

    #[test]
    fn plan_joints_sum_to_start_prefix(actions in proptest::collection::vec(
        prop::sample::select(vec!["play", "study", "clean", "mow"]), 1..4)
    ) {
        let model = parse_plan_model::<f64>(PLANS).unwrap();
        let o = SolveOptions::default();
        let scores = recognize_plan(&model, &actions, &o).unwrap();
        let sum: f64 = scores.iter().map(|s| s.joint).sum();
        let whole = prefix_probability(model.pcfg(), &actions, None, &o).unwrap().probability;
        prop_assert!((sum - whole).abs() <= 1e-9);
        prop_assert!(scores.windows(2).all(|w| w[0].joint >= w[1].joint));
    }

    #[test]
    fn random_chain_reachability(
        weights in proptest::collection::vec(proptest::collection::vec(1u32..10, 3), 3),
        target in 0usize..3,
    ) {
        let mut text = String::new();
        for (i, row) in weights.iter().enumerate() {
            let total: u32 = row.iter().sum();
            for (j, w) in row.iter().enumerate() {
                text.push_str(&format!("trans q{i} q{j} {}\n", f64::from(*w) / f64::from(total)));
            }
        }
        text.push_str("trans q3 q3 1\n");
        let chain = match parse_markov_chain::<f64>(&text) {
            Ok(c) => c,
            Err(_) => return Ok(()),
        };
        let o = SolveOptions::default();
        let to = format!("q{target}");
        for from in ["q0", "q1", "q2", "q3"] {
            let r = reach_probability(&chain, from, &to, &o).unwrap().probability;
            prop_assert!((0.0..=1.0).contains(&r));
            if from == to {
                prop_assert_eq!(r, 1.0);
            }
            let bound = oracle_reach(&chain, from, &to, 12).unwrap().lower_bound;
            prop_assert!(bound <= r + 1e-9);
        }
    }
}
