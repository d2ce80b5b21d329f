mod common;

use common::{structure, G0, G0_CFG, PLCG_AB_EQUATION_LINES, PLCG_AB_GRAPH, PREFIX_A_GRAPH};
use tabprob::engines::{pcfg_prefix_engine, plcg_prefix_engine};
use tabprob::eqsolve::{assemble, check_linearity, decompose_scc, dump_equations};
use tabprob::explgraph::{build_graph, dump_graph, BuildConfig};
use tabprob::model::{make_plcg, parse_cfg, parse_pcfg};

#[test]
fn prefix_a_graph_matches_reference() {
    let g = parse_pcfg::<f64>(G0).unwrap();
    let graph = build_graph(&pcfg_prefix_engine(&g, &["a"], None).unwrap(), &BuildConfig::default())
        .unwrap()
        .unwrap();
    assert_eq!(graph.len(), 4);
    assert!(graph.is_cyclic());
    assert_eq!(structure(&dump_graph(&graph)), structure(PREFIX_A_GRAPH));
}

#[test]
fn plcg_ab_graph_matches_reference() {
    let m = make_plcg::<f64>(&parse_cfg(G0_CFG).unwrap(), None).unwrap();
    let graph = build_graph(&plcg_prefix_engine(&m, &["a", "b"]).unwrap(), &BuildConfig::default())
        .unwrap()
        .unwrap();
    assert_eq!(graph.len(), 10);
    assert_eq!(structure(&dump_graph(&graph)), structure(PLCG_AB_GRAPH));
}

#[test]
fn plcg_ab_equations() {
    let m = make_plcg::<f64>(&parse_cfg(G0_CFG).unwrap(), None).unwrap();
    let graph = build_graph(&plcg_prefix_engine(&m, &["a", "b"]).unwrap(), &BuildConfig::default())
        .unwrap()
        .unwrap();
    let sys = assemble(&graph);
    let text = dump_equations(&sys);
    assert_eq!(text.lines().count(), 10);
    for line in PLCG_AB_EQUATION_LINES {
        assert!(text.lines().any(|l| l == line), "missing {line}\n{text}");
    }
    let d = decompose_scc(&sys);
    assert!(check_linearity(&sys, &d).is_empty());
    // the self-looping lc_call(s,s,[],[]) is solved before its callers
    let self_loop = sys.var_of("lc_call(s,s,[],[])").unwrap();
    let after_b = sys.var_of("lc_call(s,b,[],[])").unwrap();
    let before_b = sys.var_of("lc_call(s,s,[b],[])").unwrap();
    let stratum = |v: usize| d.component_of[v];
    assert!(d.strata[stratum(self_loop)].recursive);
    assert!(stratum(self_loop) < stratum(after_b) && stratum(self_loop) < stratum(before_b));
}

#[test]
fn prefix_a_strata() {
    let g = parse_pcfg::<f64>(G0).unwrap();
    let graph = build_graph(&pcfg_prefix_engine(&g, &["a"], None).unwrap(), &BuildConfig::default())
        .unwrap()
        .unwrap();
    let sys = assemble(&graph);
    let d = decompose_scc(&sys);
    assert_eq!(d.strata.len(), 4);
    let loops: Vec<_> = d.strata.iter().filter(|s| s.recursive).collect();
    assert_eq!(loops.len(), 1);
    assert_eq!(sys.label(loops[0].vars[0]), "pre_pcfg([s,s],[a],[])");
}

#[test]
fn dumps_are_deterministic() {
    let m = make_plcg::<f64>(&parse_cfg(G0_CFG).unwrap(), None).unwrap();
    let dump = || {
        let graph = build_graph(&plcg_prefix_engine(&m, &["a", "b", "a"]).unwrap(), &BuildConfig::default())
            .unwrap()
            .unwrap();
        (dump_graph(&graph), dump_equations(&assemble(&graph)))
    };
    assert_eq!(dump(), dump());
}

#[test]
fn goal_budget_is_enforced() {
    let g = parse_pcfg::<f64>(G0).unwrap();
    let engine = pcfg_prefix_engine(&g, &["a", "b", "a", "b"], None).unwrap();
    let err = build_graph(&engine, &BuildConfig { max_goals: 5 }).unwrap_err();
    assert_eq!(err, tabprob::BuildError::GoalBudgetExceeded { limit: 5 });
}

#[test]
fn unknown_word_gives_no_graph() {
    let g = parse_pcfg::<f64>(G0).unwrap();
    let engine = pcfg_prefix_engine(&g, &["a", "zzz"], None).unwrap();
    assert!(build_graph(&engine, &BuildConfig::default()).unwrap().is_none());
}
