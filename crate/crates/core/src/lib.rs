//! Probabilities of prefixes, plans and reachability computed from cyclic
//! explanation graphs.
//!
//! A query runs an engine over a model to build an explanation graph,
//! turns the graph into probability equations and solves them stratum by
//! stratum. The core is generic over the scalar type; `f64`, `f32` and
//! exact rationals are supported.
//!
//! ```
//! use tabprob::{parse_pcfg, prefix_probability, SolveOptions};
//!
//! let g0 = parse_pcfg::<f64>("s -> s s : 0.4\ns -> a : 0.3\ns -> b : 0.3\n").unwrap();
//! let r = prefix_probability(&g0, &["a"], None, &SolveOptions::default()).unwrap();
//! assert!((r.probability - 0.5).abs() < 1e-12);
//! assert!(r.cyclic);
//! ```

pub mod cli;
pub mod engines;
pub mod eqsolve;
pub mod error;
pub mod explgraph;
pub mod model;
pub mod oracle;
pub mod queries;
pub mod scalar;
pub mod scc;

pub use engines::{markov_reach_engine, pcfg_prefix_engine, pcfg_sentence_engine, plcg_prefix_engine};
pub use eqsolve::{
    assemble, check_linearity, decompose_scc, dump_equations, solve_fixpoint, solve_stratified,
    spectral_radius_estimate, EquationSystem, FixpointOptions, Solution, SolverKind,
};
pub use error::{BuildError, ModelError, QueryError, SolveError};
pub use explgraph::{build_graph, dump_graph, BuildConfig, DerivationEngine, ExplanationGraph, GoalId};
pub use model::{
    left_corner_closure, make_plcg, parse_cfg, parse_markov_chain, parse_pcfg, parse_plan_model, Cfg,
    Grammar, MarkovChain, Pcfg, PlanModel, PlcgModel, Sym,
};
pub use oracle::{oracle_plcg_prefix, oracle_prefix_pcfg, oracle_reach, oracle_sentence_pcfg, MassEstimate};
pub use queries::{
    conditional_next, normalize, plcg_prefix_probability, prefix_probability, reach_probability, recognize_plan,
    sentence_probability, PlanScore, QueryResult, SolveOptions,
};
pub use scalar::{Rational, Scalar};

pub type Pcfg64 = Pcfg<f64>;
pub type Pcfg32 = Pcfg<f32>;
pub type PcfgExact = Pcfg<Rational>;
pub type PlcgModel64 = PlcgModel<f64>;
pub type PlanModel64 = PlanModel<f64>;
pub type MarkovChain64 = MarkovChain<f64>;
pub type QueryResult64 = QueryResult<f64>;
