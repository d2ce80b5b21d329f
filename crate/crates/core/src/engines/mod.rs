//! Derivation engines: the clause semantics of the prefix/sentence PCFG
//! parser, the prefix PLCG parser and Markov-chain reachability.
//!
//! Positions are word indices; goals carry both their start and their end,
//! so every goal is ground. Printable forms use difference lists of the
//! remaining words, e.g. `pre_pcfg([s,s],[a],[])`.

mod pcfg;
mod plcg;
mod reach;

pub use pcfg::{pcfg_prefix_engine, pcfg_sentence_engine, ParseGoal, PcfgEngine};
pub use plcg::{plcg_prefix_engine, PlcgEngine, PlcgGoal};
pub use reach::{markov_reach_engine, ReachEngine, ReachGoal};

use crate::error::QueryError;
use crate::model::{Grammar, Sym};

/// Maps words to terminals. Unknown words stay `None`; they make every
/// parse fail rather than raising an error.
pub(crate) fn resolve_words<S: AsRef<str>>(
    grammar: &Grammar,
    words: &[S],
) -> Result<(Vec<Option<Sym>>, Vec<String>), QueryError> {
    if words.is_empty() {
        return Err(QueryError::EmptyPrefix);
    }
    let names: Vec<String> = words.iter().map(|w| w.as_ref().to_string()).collect();
    let syms = names.iter().map(|w| grammar.terminal(w)).collect();
    Ok((syms, names))
}

pub(crate) fn resolve_start(grammar: &Grammar, start: Option<&str>) -> Result<Sym, QueryError> {
    match start {
        None => Ok(grammar.start()),
        Some(name) => grammar
            .nonterminal(name)
            .ok_or_else(|| QueryError::UnknownNonterminal(name.to_string())),
    }
}

pub(crate) fn dlist(words: &[String], from: usize) -> String {
    format!("[{}]", words[from..].join(","))
}
