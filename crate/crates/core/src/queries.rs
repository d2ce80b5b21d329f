//! Query layer: engine, explanation graph, equations and solver composed
//! into prefix, sentence, plan and reachability probabilities.

use std::cmp::Ordering;

use num_traits::{One, Zero};

use crate::engines::{
    markov_reach_engine, pcfg_prefix_engine, pcfg_sentence_engine, plcg_prefix_engine,
};
use crate::eqsolve::{
    assemble, check_linearity, decompose_scc, dump_equations, solve_fixpoint, solve_stratified,
    FixpointOptions, SolverKind, VALUE_SLACK,
};
use crate::error::{QueryError, SolveError};
use crate::explgraph::{build_graph, dump_graph, BuildConfig, DerivationEngine};
use crate::model::{MarkovChain, Pcfg, PlanModel, PlcgModel};
use crate::scalar::Scalar;

#[derive(Debug, Clone)]
pub struct SolveOptions {
    /// Preferred solver. Nonlinear systems always go to the fixpoint solver.
    pub solver: SolverKind,
    pub fixpoint: FixpointOptions,
    pub build: BuildConfig,
    /// Keep graph and equation dumps in the result.
    pub keep_dumps: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            solver: SolverKind::StratifiedLinear,
            fixpoint: FixpointOptions::default(),
            build: BuildConfig::default(),
            keep_dumps: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QueryResult<T> {
    /// Printable form of the root goal.
    pub query: String,
    pub probability: T,
    pub cyclic: bool,
    pub scc_count: usize,
    /// Solver actually used.
    pub solver: SolverKind,
    pub iterations: Option<usize>,
    pub converged: bool,
    pub linear: bool,
    pub goal_count: usize,
    /// Per recursive stratum, stratified solver only.
    pub spectral: Vec<f64>,
    pub graph_dump: Option<String>,
    pub equations_dump: Option<String>,
}

fn evaluate<E: DerivationEngine>(engine: &E, options: &SolveOptions) -> Result<QueryResult<E::Scalar>, QueryError> {
    let query = engine.render(&engine.root());
    let Some(graph) = build_graph(engine, &options.build)? else {
        return Ok(QueryResult {
            query,
            probability: E::Scalar::zero(),
            cyclic: false,
            scc_count: 0,
            solver: options.solver,
            iterations: None,
            converged: true,
            linear: true,
            goal_count: 0,
            spectral: Vec::new(),
            graph_dump: options.keep_dumps.then(String::new),
            equations_dump: options.keep_dumps.then(String::new),
        });
    };
    let system = assemble(&graph);
    let decomposition = decompose_scc(&system);
    let linear = check_linearity(&system, &decomposition).is_empty();
    let solution = if options.solver == SolverKind::StratifiedLinear && linear {
        solve_stratified(&system, &decomposition)?
    } else if E::Scalar::is_exact() {
        // fixed-width rationals overflow within a few iterations
        return Err(SolveError::FixpointNeedsFloat.into());
    } else {
        solve_fixpoint(&system, options.fixpoint)
    };
    let mut probability = solution.value(system.root());
    let one = E::Scalar::one();
    if probability > one + E::Scalar::tolerance(VALUE_SLACK) {
        return Err(SolveError::OutOfRange {
            goal: query,
            value: probability.to_f64_lossy(),
        }
        .into());
    }
    if probability > one {
        probability = one;
    }
    Ok(QueryResult {
        query,
        probability,
        cyclic: graph.is_cyclic(),
        scc_count: decomposition.strata.len(),
        solver: solution.method,
        iterations: solution.iterations,
        converged: solution.converged,
        linear,
        goal_count: graph.len(),
        spectral: solution.spectral,
        graph_dump: options.keep_dumps.then(|| dump_graph(&graph)),
        equations_dump: options.keep_dumps.then(|| dump_equations(&system)),
    })
}

/// Total probability of the sentences that begin with `words`.
pub fn prefix_probability<T: Scalar, S: AsRef<str>>(
    pcfg: &Pcfg<T>,
    words: &[S],
    start: Option<&str>,
    options: &SolveOptions,
) -> Result<QueryResult<T>, QueryError> {
    evaluate(&pcfg_prefix_engine(pcfg, words, start)?, options)
}

pub fn sentence_probability<T: Scalar, S: AsRef<str>>(
    pcfg: &Pcfg<T>,
    words: &[S],
    start: Option<&str>,
    options: &SolveOptions,
) -> Result<QueryResult<T>, QueryError> {
    evaluate(&pcfg_sentence_engine(pcfg, words, start)?, options)
}

pub fn plcg_prefix_probability<T: Scalar, S: AsRef<str>>(
    model: &PlcgModel<T>,
    words: &[S],
    options: &SolveOptions,
) -> Result<QueryResult<T>, QueryError> {
    evaluate(&plcg_prefix_engine(model, words)?, options)
}

pub fn reach_probability<T: Scalar>(
    chain: &MarkovChain<T>,
    from: &str,
    to: &str,
    options: &SolveOptions,
) -> Result<QueryResult<T>, QueryError> {
    evaluate(&markov_reach_engine(chain, from, to)?, options)
}

/// Descending by value, then by name.
fn by_score<T: Scalar>(a_name: &str, a: T, b_name: &str, b: T) -> Ordering {
    b.partial_cmp(&a)
        .unwrap_or(Ordering::Equal)
        .then_with(|| a_name.cmp(b_name))
}

/// `P_prefix(u w) / P_prefix(u)` for every terminal `w` that can follow,
/// most likely first. Terminals with probability zero are left out.
pub fn conditional_next<T: Scalar, S: AsRef<str>>(
    pcfg: &Pcfg<T>,
    words: &[S],
    start: Option<&str>,
    options: &SolveOptions,
) -> Result<Vec<(String, T)>, QueryError> {
    let base = prefix_probability(pcfg, words, start, options)?.probability;
    if base.is_zero() {
        return Err(QueryError::ZeroPrefix);
    }
    let mut extended: Vec<String> = words.iter().map(|w| w.as_ref().to_string()).collect();
    let mut out = Vec::new();
    for name in pcfg.grammar().terminal_names() {
        extended.push(name.to_string());
        let p = prefix_probability(pcfg, &extended, start, options)?.probability;
        extended.pop();
        if !p.is_zero() {
            out.push((name.to_string(), p / base));
        }
    }
    out.sort_by(|a, b| by_score(&a.0, a.1, &b.0, b.1));
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlanScore<T> {
    pub plan: String,
    /// `theta(S -> plan)`
    pub theta: T,
    /// `theta * P_prefix(actions | plan)`
    pub joint: T,
    /// The prefix query started at the plan nonterminal.
    pub prefix: QueryResult<T>,
}

/// Joint probability `theta(S -> y) * P_prefix(actions | y)` per plan `y`,
/// most likely first, ties by name. Not normalized.
pub fn recognize_plan<T: Scalar, S: AsRef<str>>(
    model: &PlanModel<T>,
    actions: &[S],
    options: &SolveOptions,
) -> Result<Vec<PlanScore<T>>, QueryError> {
    let pcfg = model.pcfg();
    let mut out = Vec::new();
    for &(plan, theta) in model.plans() {
        let name = pcfg.grammar().name(plan);
        let prefix = prefix_probability(pcfg, actions, Some(name), options)?;
        out.push(PlanScore {
            plan: name.to_string(),
            theta,
            joint: theta * prefix.probability,
            prefix,
        });
    }
    out.sort_by(|a, b| by_score(&a.plan, a.joint, &b.plan, b.joint));
    Ok(out)
}

/// Divides every score by their sum; all-zero input is returned unchanged.
pub fn normalize<T: Scalar>(scores: &[(String, T)]) -> Vec<(String, T)> {
    let total = scores.iter().fold(T::zero(), |acc, (_, p)| acc + *p);
    if total.is_zero() {
        return scores.to_vec();
    }
    scores.iter().map(|(n, p)| (n.clone(), *p / total)).collect()
}
