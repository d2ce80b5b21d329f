use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;
use std::ops::Deref;

use crate::error::ModelError;
use crate::scalar::Scalar;

pub const DEFAULT_START: &str = "s";

/// Interned grammar symbol.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Sym(u32);

impl Sym {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Rule {
    pub lhs: Sym,
    pub rhs: Vec<Sym>,
}

/// One line of a grammar file after tokenization.
#[derive(Debug, Clone)]
pub(crate) struct RawRule {
    pub line: usize,
    pub lhs: String,
    pub rhs: Vec<String>,
    pub prob: Option<String>,
}

#[derive(Debug, Clone, Default)]
pub(crate) struct RawGrammar {
    pub start: Option<String>,
    pub rules: Vec<RawRule>,
    pub plans: Vec<(usize, String)>,
}

pub(crate) fn strip_comment(line: &str) -> &str {
    match line.find('#') {
        Some(pos) => &line[..pos],
        None => line,
    }
    .trim()
}

impl RawGrammar {
    pub fn parse(text: &str) -> Result<Self, ModelError> {
        let mut raw = RawGrammar::default();
        for (idx, line) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = strip_comment(line);
            if line.is_empty() {
                continue;
            }
            let syntax = |message: &str| ModelError::Syntax {
                line: line_no,
                message: message.to_string(),
            };
            let tokens: Vec<&str> = line.split_whitespace().collect();
            match tokens[0] {
                "start" if !line.contains("->") => {
                    if tokens.len() != 2 {
                        return Err(syntax("expected `start <nonterminal>`"));
                    }
                    if raw.start.is_some() {
                        return Err(ModelError::Duplicate {
                            line: line_no,
                            what: "start declaration".into(),
                        });
                    }
                    raw.start = Some(tokens[1].to_string());
                }
                "plan" if !line.contains("->") => {
                    if tokens.len() != 2 {
                        return Err(syntax("expected `plan <nonterminal>`"));
                    }
                    raw.plans.push((line_no, tokens[1].to_string()));
                }
                _ => {
                    let (body, prob) = match line.rsplit_once(':') {
                        Some((body, prob)) => {
                            let prob = prob.trim();
                            if prob.is_empty() || prob.contains(char::is_whitespace) {
                                return Err(syntax("expected a single probability after `:`"));
                            }
                            (body, Some(prob.to_string()))
                        }
                        None => (line, None),
                    };
                    let (lhs, rhs) = body
                        .split_once("->")
                        .ok_or_else(|| syntax("expected `<lhs> -> <symbols> : <prob>`"))?;
                    let lhs: Vec<&str> = lhs.split_whitespace().collect();
                    if lhs.len() != 1 {
                        return Err(syntax("left-hand side must be a single symbol"));
                    }
                    let rhs: Vec<String> = rhs.split_whitespace().map(str::to_string).collect();
                    if rhs.iter().any(|s| s == "->") {
                        return Err(syntax("unexpected `->`"));
                    }
                    raw.rules.push(RawRule {
                        line: line_no,
                        lhs: lhs[0].to_string(),
                        rhs,
                        prob,
                    });
                }
            }
        }
        Ok(raw)
    }
}

/// A context-free grammar with interned symbols. Structurally checked (no
/// epsilon rules, no duplicates, start is a nonterminal) but not yet checked
/// for useless nonterminals; see [`Cfg`].
#[derive(Debug, Clone)]
pub struct Grammar {
    names: Vec<String>,
    index: HashMap<String, Sym>,
    nonterminal: Vec<bool>,
    rules: Vec<Rule>,
    by_lhs: Vec<Vec<usize>>,
    start: Sym,
    rule_lines: Vec<usize>,
}

impl Grammar {
    /// Parses grammar text; probabilities, if present, are ignored.
    pub fn parse(text: &str) -> Result<Self, ModelError> {
        Self::from_raw(&RawGrammar::parse(text)?, None)
    }

    pub(crate) fn from_raw(raw: &RawGrammar, start_override: Option<&str>) -> Result<Self, ModelError> {
        if raw.rules.is_empty() {
            return Err(ModelError::Empty);
        }
        let mut names = Vec::new();
        let mut index = HashMap::new();
        let mut intern = |name: &str| -> Sym {
            *index.entry(name.to_string()).or_insert_with(|| {
                names.push(name.to_string());
                Sym((names.len() - 1) as u32)
            })
        };
        let mut rules = Vec::with_capacity(raw.rules.len());
        let mut rule_lines = Vec::with_capacity(raw.rules.len());
        for r in &raw.rules {
            if r.rhs.is_empty() {
                return Err(ModelError::EpsilonRule {
                    line: r.line,
                    lhs: r.lhs.clone(),
                });
            }
            let lhs = intern(&r.lhs);
            let rhs = r.rhs.iter().map(|s| intern(s)).collect();
            rules.push(Rule { lhs, rhs });
            rule_lines.push(r.line);
        }
        let mut nonterminal = vec![false; names.len()];
        let mut by_lhs = vec![Vec::new(); names.len()];
        let mut seen = HashSet::new();
        for (id, rule) in rules.iter().enumerate() {
            if !seen.insert(rule) {
                return Err(ModelError::Duplicate {
                    line: rule_lines[id],
                    what: format!("rule for `{}`", names[rule.lhs.index()]),
                });
            }
            nonterminal[rule.lhs.index()] = true;
            by_lhs[rule.lhs.index()].push(id);
        }
        let start_name = start_override
            .or(raw.start.as_deref())
            .unwrap_or(DEFAULT_START);
        let start = match index.get(start_name) {
            Some(&s) if nonterminal[s.index()] => s,
            _ => return Err(ModelError::UnknownStart(start_name.to_string())),
        };
        Ok(Grammar {
            names,
            index,
            nonterminal,
            rules,
            by_lhs,
            start,
            rule_lines,
        })
    }

    pub fn symbol(&self, name: &str) -> Option<Sym> {
        self.index.get(name).copied()
    }

    pub fn name(&self, sym: Sym) -> &str {
        &self.names[sym.index()]
    }

    pub fn symbol_count(&self) -> usize {
        self.names.len()
    }

    pub fn is_nonterminal(&self, sym: Sym) -> bool {
        self.nonterminal[sym.index()]
    }

    pub fn symbols(&self) -> impl Iterator<Item = Sym> + '_ {
        (0..self.names.len() as u32).map(Sym)
    }

    pub fn nonterminals(&self) -> impl Iterator<Item = Sym> + '_ {
        self.symbols().filter(|&s| self.is_nonterminal(s))
    }

    pub fn terminals(&self) -> impl Iterator<Item = Sym> + '_ {
        self.symbols().filter(|&s| !self.is_nonterminal(s))
    }

    /// Terminal names in lexicographic order.
    pub fn terminal_names(&self) -> Vec<&str> {
        let mut names: Vec<&str> = self.terminals().map(|s| self.name(s)).collect();
        names.sort_unstable();
        names
    }

    /// Looks a word up as a terminal; nonterminal names never match.
    pub fn terminal(&self, name: &str) -> Option<Sym> {
        self.symbol(name).filter(|&s| !self.is_nonterminal(s))
    }

    pub fn nonterminal(&self, name: &str) -> Option<Sym> {
        self.symbol(name).filter(|&s| self.is_nonterminal(s))
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn rule(&self, id: usize) -> &Rule {
        &self.rules[id]
    }

    /// Rule ids with the given left-hand side, in file order.
    pub fn rules_for(&self, lhs: Sym) -> &[usize] {
        &self.by_lhs[lhs.index()]
    }

    pub fn rule_line(&self, id: usize) -> usize {
        self.rule_lines[id]
    }

    pub fn start(&self) -> Sym {
        self.start
    }

    /// `[s,s]`-style list of symbol names.
    pub fn render_list(&self, syms: &[Sym]) -> String {
        let names: Vec<&str> = syms.iter().map(|&s| self.name(s)).collect();
        format!("[{}]", names.join(","))
    }

    /// `A -> b c` for messages and parameter files.
    pub fn render_rule(&self, id: usize) -> String {
        let rule = &self.rules[id];
        let rhs: Vec<&str> = rule.rhs.iter().map(|&s| self.name(s)).collect();
        format!("{} -> {}", self.name(rule.lhs), rhs.join(" "))
    }

    /// Finds the rule `lhs -> rhs` by names.
    pub fn find_rule(&self, lhs: &str, rhs: &[&str]) -> Option<usize> {
        let lhs = self.nonterminal(lhs)?;
        self.rules_for(lhs).iter().copied().find(|&id| {
            let r = &self.rules[id].rhs;
            r.len() == rhs.len() && r.iter().zip(rhs).all(|(&s, n)| self.name(s) == *n)
        })
    }
}

/// Nonterminals that derive no terminal string or are unreachable from the
/// start symbol.
pub fn detect_useless(grammar: &Grammar) -> BTreeSet<Sym> {
    let n = grammar.symbol_count();
    let mut productive: Vec<bool> = (0..n).map(|i| !grammar.nonterminal[i]).collect();
    let mut changed = true;
    while changed {
        changed = false;
        for rule in grammar.rules() {
            if !productive[rule.lhs.index()] && rule.rhs.iter().all(|s| productive[s.index()]) {
                productive[rule.lhs.index()] = true;
                changed = true;
            }
        }
    }

    let mut reachable = vec![false; n];
    reachable[grammar.start.index()] = true;
    let mut stack = vec![grammar.start];
    while let Some(x) = stack.pop() {
        for &id in grammar.rules_for(x) {
            for &y in &grammar.rules[id].rhs {
                if !reachable[y.index()] {
                    reachable[y.index()] = true;
                    stack.push(y);
                }
            }
        }
    }

    grammar
        .nonterminals()
        .filter(|s| !productive[s.index()] || !reachable[s.index()])
        .collect()
}

/// A grammar that passed every ingestion check: no epsilon rules, no useless
/// nonterminals, existing start symbol.
#[derive(Debug, Clone)]
pub struct Cfg(Grammar);

impl Cfg {
    pub fn new(grammar: Grammar) -> Result<Self, ModelError> {
        let useless = detect_useless(&grammar);
        if !useless.is_empty() {
            return Err(ModelError::UselessNonterminals(
                useless.iter().map(|&s| grammar.name(s).to_string()).collect(),
            ));
        }
        Ok(Cfg(grammar))
    }

    pub fn grammar(&self) -> &Grammar {
        &self.0
    }
}

impl Deref for Cfg {
    type Target = Grammar;

    fn deref(&self) -> &Grammar {
        &self.0
    }
}

/// Parses and validates an unweighted grammar (probabilities are ignored).
pub fn parse_cfg(text: &str) -> Result<Cfg, ModelError> {
    parse_cfg_with_start(text, None)
}

pub fn parse_cfg_with_start(text: &str, start: Option<&str>) -> Result<Cfg, ModelError> {
    Cfg::new(Grammar::from_raw(&RawGrammar::parse(text)?, start)?)
}

/// Probabilistic context-free grammar; `probs[i]` is the selection
/// probability of rule `i`.
#[derive(Debug, Clone)]
pub struct Pcfg<T> {
    cfg: Cfg,
    probs: Vec<T>,
}

impl<T: Scalar> Pcfg<T> {
    pub(crate) fn from_raw(raw: &RawGrammar, start: Option<&str>) -> Result<Self, ModelError> {
        let grammar = Grammar::from_raw(raw, start)?;
        let mut probs = Vec::with_capacity(raw.rules.len());
        for r in &raw.rules {
            let text = r.prob.as_deref().ok_or_else(|| ModelError::Syntax {
                line: r.line,
                message: "missing rule probability".into(),
            })?;
            let p = T::parse_decimal(text).ok_or_else(|| ModelError::Syntax {
                line: r.line,
                message: format!("bad probability `{text}`"),
            })?;
            if p <= T::zero() || p > T::one() {
                return Err(ModelError::BadProbability {
                    line: r.line,
                    prob: text.to_string(),
                });
            }
            probs.push(p);
        }
        let tol = T::tolerance(1e-9);
        for lhs in grammar.nonterminals() {
            let sum = grammar
                .rules_for(lhs)
                .iter()
                .fold(T::zero(), |acc, &id| acc + probs[id]);
            if (sum - T::one()).abs() > tol {
                return Err(ModelError::BadRuleSum {
                    lhs: grammar.name(lhs).to_string(),
                    sum: sum.to_f64_lossy(),
                });
            }
        }
        Ok(Pcfg {
            cfg: Cfg::new(grammar)?,
            probs,
        })
    }

    pub fn cfg(&self) -> &Cfg {
        &self.cfg
    }

    pub fn grammar(&self) -> &Grammar {
        &self.cfg
    }

    pub fn prob(&self, rule: usize) -> T {
        self.probs[rule]
    }

    pub fn probs(&self) -> &[T] {
        &self.probs
    }
}

/// Parses and validates a PCFG whose start symbol is taken from the file
/// (default `s`).
pub fn parse_pcfg<T: Scalar>(text: &str) -> Result<Pcfg<T>, ModelError> {
    parse_pcfg_with_start(text, None)
}

pub fn parse_pcfg_with_start<T: Scalar>(text: &str, start: Option<&str>) -> Result<Pcfg<T>, ModelError> {
    Pcfg::from_raw(&RawGrammar::parse(text)?, start)
}

/// Transitive closure of the direct left-corner relation `X -> Y ...`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct LeftCornerRelation {
    pairs: BTreeSet<(Sym, Sym)>,
}

impl LeftCornerRelation {
    pub fn contains(&self, x: Sym, y: Sym) -> bool {
        self.pairs.contains(&(x, y))
    }

    pub fn pairs(&self) -> &BTreeSet<(Sym, Sym)> {
        &self.pairs
    }

    /// Symbols `y` with `(x, y)` in the relation.
    pub fn corners_of(&self, x: Sym) -> impl Iterator<Item = Sym> + '_ {
        self.pairs
            .range((x, Sym(0))..=(x, Sym(u32::MAX)))
            .map(|&(_, y)| y)
    }

    /// True iff some nonterminal is a left corner of itself.
    pub fn is_cyclic(&self) -> bool {
        self.pairs.iter().any(|(x, y)| x == y)
    }

    pub fn compose(&self, other: &LeftCornerRelation) -> LeftCornerRelation {
        let mut pairs = BTreeSet::new();
        for &(x, y) in &self.pairs {
            for z in other.corners_of(y) {
                pairs.insert((x, z));
            }
        }
        LeftCornerRelation { pairs }
    }

    pub fn first_sets(&self, grammar: &Grammar) -> BTreeMap<Sym, BTreeSet<Sym>> {
        grammar
            .nonterminals()
            .map(|x| {
                let first = self
                    .corners_of(x)
                    .filter(|&y| !grammar.is_nonterminal(y))
                    .collect();
                (x, first)
            })
            .collect()
    }
}

pub fn left_corner_closure(grammar: &Grammar) -> LeftCornerRelation {
    let mut pairs = BTreeSet::new();
    for x in grammar.nonterminals() {
        let mut seen = vec![false; grammar.symbol_count()];
        let mut stack = vec![x];
        while let Some(a) = stack.pop() {
            for &id in grammar.rules_for(a) {
                let y = grammar.rule(id).rhs[0];
                if !seen[y.index()] {
                    seen[y.index()] = true;
                    pairs.insert((x, y));
                    if grammar.is_nonterminal(y) {
                        stack.push(y);
                    }
                }
            }
        }
    }
    LeftCornerRelation { pairs }
}

/// `first(G)`: terminals `t` with `G ->_L t`, for every nonterminal `G`.
pub fn first_sets(grammar: &Grammar) -> BTreeMap<Sym, BTreeSet<Sym>> {
    left_corner_closure(grammar).first_sets(grammar)
}

impl fmt::Display for Grammar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "start {}", self.name(self.start))?;
        for id in 0..self.rules.len() {
            writeln!(f, "{}", self.render_rule(id))?;
        }
        Ok(())
    }
}
