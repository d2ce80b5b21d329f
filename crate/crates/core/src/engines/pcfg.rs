use super::{dlist, resolve_start, resolve_words};
use crate::error::QueryError;
use crate::explgraph::{Alternative, DerivationEngine, SwitchChoice};
use crate::model::{Pcfg, Sym};
use crate::scalar::Scalar;

/// Goal of the top-down PCFG parser: the remaining stack `symbols` spans
/// words `start..end`. `Top` is the query wrapper `pre_pcfg(words)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ParseGoal {
    Top,
    Span {
        symbols: Vec<Sym>,
        start: usize,
        end: usize,
    },
}

/// Top-down parser over a PCFG. In prefix mode a parse succeeds as soon as
/// the last word is consumed, leaving the rest of the stack unexpanded.
#[derive(Debug, Clone)]
pub struct PcfgEngine<'a, T> {
    pcfg: &'a Pcfg<T>,
    words: Vec<Option<Sym>>,
    names: Vec<String>,
    start: Sym,
    prefix: bool,
}

pub fn pcfg_prefix_engine<'a, T: Scalar, S: AsRef<str>>(
    pcfg: &'a Pcfg<T>,
    words: &[S],
    start: Option<&str>,
) -> Result<PcfgEngine<'a, T>, QueryError> {
    PcfgEngine::new(pcfg, words, start, true)
}

pub fn pcfg_sentence_engine<'a, T: Scalar, S: AsRef<str>>(
    pcfg: &'a Pcfg<T>,
    words: &[S],
    start: Option<&str>,
) -> Result<PcfgEngine<'a, T>, QueryError> {
    PcfgEngine::new(pcfg, words, start, false)
}

impl<'a, T: Scalar> PcfgEngine<'a, T> {
    fn new<S: AsRef<str>>(
        pcfg: &'a Pcfg<T>,
        words: &[S],
        start: Option<&str>,
        prefix: bool,
    ) -> Result<Self, QueryError> {
        let g = pcfg.grammar();
        let (words, names) = resolve_words(g, words)?;
        Ok(PcfgEngine {
            pcfg,
            words,
            names,
            start: resolve_start(g, start)?,
            prefix,
        })
    }

    pub fn is_prefix(&self) -> bool {
        self.prefix
    }

    fn n(&self) -> usize {
        self.words.len()
    }

    /// Closes an alternative after the first stack symbol consumed words up to
    /// `k`: pseudo success at the end of a prefix, otherwise parse the rest.
    fn continue_with(
        &self,
        k: usize,
        rest: &[Sym],
        end: usize,
        mut subgoals: Vec<ParseGoal>,
        choices: Vec<SwitchChoice<T>>,
        out: &mut Vec<Alternative<ParseGoal, T>>,
    ) {
        if self.prefix && k == self.n() {
            if end != self.n() {
                return;
            }
        } else {
            if rest.is_empty() && k != end {
                return;
            }
            subgoals.push(ParseGoal::Span {
                symbols: rest.to_vec(),
                start: k,
                end,
            });
        }
        out.push(Alternative { subgoals, choices });
    }
}

impl<T: Scalar> DerivationEngine for PcfgEngine<'_, T> {
    type Goal = ParseGoal;
    type Scalar = T;

    fn root(&self) -> ParseGoal {
        ParseGoal::Top
    }

    fn expand(&self, goal: &ParseGoal) -> Vec<Alternative<ParseGoal, T>> {
        let (symbols, i, j) = match goal {
            ParseGoal::Top => {
                return vec![Alternative {
                    subgoals: vec![ParseGoal::Span {
                        symbols: vec![self.start],
                        start: 0,
                        end: self.n(),
                    }],
                    choices: vec![],
                }]
            }
            ParseGoal::Span {
                symbols,
                start,
                end,
            } => (symbols, *start, *end),
        };
        let mut out = Vec::new();
        let Some((&first, rest)) = symbols.split_first() else {
            if i == j {
                out.push(Alternative::fact());
            }
            return out;
        };
        if i >= self.n() || j < i {
            return out;
        }
        let g = self.pcfg.grammar();
        if !g.is_nonterminal(first) {
            if self.words[i] == Some(first) {
                self.continue_with(i + 1, rest, j, vec![], vec![], &mut out);
            }
            return out;
        }
        for &rule in g.rules_for(first) {
            let rhs = &g.rule(rule).rhs;
            for k in i + 1..=j {
                let choice = SwitchChoice::new(g.name(first), g.render_list(rhs), self.pcfg.prob(rule));
                let head = ParseGoal::Span {
                    symbols: rhs.clone(),
                    start: i,
                    end: k,
                };
                self.continue_with(k, rest, j, vec![head], vec![choice], &mut out);
            }
        }
        out
    }

    fn render(&self, goal: &ParseGoal) -> String {
        let functor = if self.prefix { "pre_pcfg" } else { "pcfg" };
        match goal {
            ParseGoal::Top => format!("{functor}({})", dlist(&self.names, 0)),
            ParseGoal::Span {
                symbols,
                start,
                end,
            } => format!(
                "{functor}({},{},{})",
                self.pcfg.grammar().render_list(symbols),
                dlist(&self.names, *start),
                dlist(&self.names, *end)
            ),
        }
    }
}
