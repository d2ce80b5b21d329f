//! Probabilistic models read from text files: PCFGs, PLCGs, Markov chains
//! and plan-recognition grammars.
//!
//! Grammar files are line oriented; `#` starts a comment:
//!
//! ```text
//! start s                 # optional, default `s`
//! s -> s s : 0.4
//! s -> a : 0.3
//! s -> b : 0.3
//! plan Pl                 # plan-model files only
//! ```
//!
//! A symbol is a nonterminal iff it occurs on some left-hand side.

mod grammar;
mod markov;
mod plan;
mod plcg;

pub use grammar::{
    detect_useless, first_sets, left_corner_closure, parse_cfg, parse_cfg_with_start, parse_pcfg,
    parse_pcfg_with_start, Cfg, Grammar, LeftCornerRelation, Pcfg, Rule, Sym, DEFAULT_START,
};
pub use markov::{parse_markov_chain, MarkovChain};
pub use plan::{parse_plan_model, parse_plan_model_with_start, PlanModel};
pub use plcg::{make_plcg, AttachOp, PlcgModel};
