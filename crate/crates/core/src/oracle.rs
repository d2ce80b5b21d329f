//! Brute-force lower bounds on query probabilities, computed by enumerating
//! derivations with a bounded number of switch draws. Nothing here touches
//! explanation graphs or equation solvers.

use std::collections::HashMap;

use crate::engines::{resolve_start, resolve_words};
use crate::error::QueryError;
use crate::model::{MarkovChain, Pcfg, PlcgModel, Sym};
use crate::scalar::Scalar;

/// Total probability of the derivations found within `budget` draws.
#[derive(Debug, Clone, PartialEq)]
pub struct MassEstimate<T> {
    pub lower_bound: T,
    pub budget: usize,
    /// Number of successful derivations summed (saturating).
    pub runs_counted: u64,
}

/// Mass and derivation count, indexed by end position.
type Ends<T> = Vec<(T, u64)>;

/// Leftmost derivations of a PCFG, tabulated by exact rule-application
/// count. Position `n` doubles as "input exhausted": in prefix mode the
/// derivation stops there with whatever is left on the stack.
struct PcfgCounter<'a, T> {
    pcfg: &'a Pcfg<T>,
    words: Vec<Option<Sym>>,
    prefix: bool,
    syms: HashMap<(Sym, usize, usize), Ends<T>>,
    seqs: HashMap<(usize, usize, usize, usize), Ends<T>>,
}

impl<T: Scalar> PcfgCounter<'_, T> {
    fn n(&self) -> usize {
        self.words.len()
    }

    fn zero(&self) -> Ends<T> {
        vec![(T::zero(), 0); self.n() + 1]
    }

    fn sym(&mut self, x: Sym, i: usize, d: usize) -> Ends<T> {
        if let Some(hit) = self.syms.get(&(x, i, d)) {
            return hit.clone();
        }
        let mut out = self.zero();
        let g = self.pcfg.grammar();
        if i < self.n() {
            if g.is_nonterminal(x) {
                if d > 0 {
                    for &rule in g.rules_for(x) {
                        let p = self.pcfg.prob(rule);
                        let sub = self.seq(rule, 0, i, d - 1);
                        for (o, s) in out.iter_mut().zip(sub) {
                            o.0 = o.0 + p * s.0;
                            o.1 = o.1.saturating_add(s.1);
                        }
                    }
                }
            } else if d == 0 && self.words[i] == Some(x) {
                out[i + 1] = (T::one(), 1);
            }
        }
        self.syms.insert((x, i, d), out.clone());
        out
    }

    fn seq(&mut self, rule: usize, off: usize, i: usize, d: usize) -> Ends<T> {
        if let Some(hit) = self.seqs.get(&(rule, off, i, d)) {
            return hit.clone();
        }
        let n = self.n();
        let mut out = self.zero();
        let len = self.pcfg.grammar().rule(rule).rhs.len();
        if off == len {
            if d == 0 {
                out[i] = (T::one(), 1);
            }
        } else {
            let x = self.pcfg.grammar().rule(rule).rhs[off];
            for d1 in 0..=d {
                let head = self.sym(x, i, d1);
                for (j, &(p, c)) in head.iter().enumerate() {
                    if c == 0 {
                        continue;
                    }
                    if j == n && off + 1 < len {
                        if self.prefix && d1 == d {
                            out[n].0 = out[n].0 + p;
                            out[n].1 = out[n].1.saturating_add(c);
                        }
                        continue;
                    }
                    let rest = self.seq(rule, off + 1, j, d - d1);
                    for (o, r) in out.iter_mut().zip(rest) {
                        o.0 = o.0 + p * r.0;
                        o.1 = o.1.saturating_add(c.saturating_mul(r.1));
                    }
                }
            }
        }
        self.seqs.insert((rule, off, i, d), out.clone());
        out
    }
}

fn pcfg_mass<T: Scalar, S: AsRef<str>>(
    pcfg: &Pcfg<T>,
    words: &[S],
    start: Option<&str>,
    budget: usize,
    prefix: bool,
) -> Result<MassEstimate<T>, QueryError> {
    let g = pcfg.grammar();
    let (words, _) = resolve_words(g, words)?;
    let start = resolve_start(g, start)?;
    let n = words.len();
    let mut counter = PcfgCounter {
        pcfg,
        words,
        prefix,
        syms: HashMap::new(),
        seqs: HashMap::new(),
    };
    let mut total = T::zero();
    let mut runs = 0u64;
    for d in 0..=budget {
        let (p, c) = counter.sym(start, 0, d)[n];
        total = total + p;
        runs = runs.saturating_add(c);
    }
    Ok(MassEstimate {
        lower_bound: total,
        budget,
        runs_counted: runs,
    })
}

/// Leftmost derivations that stop as soon as the last word is consumed,
/// using at most `budget` rule applications.
pub fn oracle_prefix_pcfg<T: Scalar, S: AsRef<str>>(
    pcfg: &Pcfg<T>,
    words: &[S],
    start: Option<&str>,
    budget: usize,
) -> Result<MassEstimate<T>, QueryError> {
    pcfg_mass(pcfg, words, start, budget, true)
}

/// Complete derivations of exactly `words` with at most `budget` rule
/// applications.
pub fn oracle_sentence_pcfg<T: Scalar, S: AsRef<str>>(
    pcfg: &Pcfg<T>,
    words: &[S],
    start: Option<&str>,
    budget: usize,
) -> Result<MassEstimate<T>, QueryError> {
    pcfg_mass(pcfg, words, start, budget, false)
}

#[derive(Debug, Clone)]
enum Frame {
    /// Build trees for the stack from the current position.
    GCall(Vec<Sym>),
    /// Remaining stack after a head: stop if the input is exhausted.
    GCallRest(Vec<Sym>),
    LcCall(Sym, Sym),
    /// After the right siblings of a rule `A -> B ...` under goal `G`.
    AfterSiblings(Sym, Sym),
}

struct PlcgRunner<'a, T> {
    model: &'a PlcgModel<T>,
    words: Vec<Option<Sym>>,
    total: T,
    runs: u64,
}

impl<T: Scalar> PlcgRunner<'_, T> {
    fn run(&mut self, mut cont: Vec<Frame>, pos: usize, left: usize, p: T) {
        let n = self.words.len();
        let Some(frame) = cont.pop() else {
            if pos == n {
                self.total = self.total + p;
                self.runs = self.runs.saturating_add(1);
            }
            return;
        };
        match frame {
            Frame::GCall(stack) => {
                let Some((&g, rest)) = stack.split_first() else {
                    return self.run(cont, pos, left, p);
                };
                if pos >= n {
                    return;
                }
                let Some(word) = self.words[pos] else {
                    return;
                };
                cont.push(Frame::GCallRest(rest.to_vec()));
                if g == word {
                    return self.run(cont, pos + 1, left, p);
                }
                if left == 0 {
                    return;
                }
                for &(t, q) in self.model.first_dist(g) {
                    if t == word {
                        let mut next = cont.clone();
                        next.push(Frame::LcCall(g, word));
                        self.run(next, pos + 1, left - 1, p * q);
                    }
                }
            }
            Frame::GCallRest(rest) => {
                if pos < n {
                    cont.push(Frame::GCall(rest));
                }
                self.run(cont, pos, left, p);
            }
            Frame::LcCall(g, b) => {
                if left == 0 {
                    return;
                }
                let cfg = self.model.cfg();
                for &(rule, q) in self.model.lc_dist(g, b) {
                    let a = cfg.rule(rule).lhs;
                    if a != g && !self.model.left_corner().contains(g, a) {
                        continue;
                    }
                    let mut next = cont.clone();
                    next.push(Frame::AfterSiblings(g, a));
                    if pos < n {
                        next.push(Frame::GCall(cfg.rule(rule).rhs[1..].to_vec()));
                    }
                    self.run(next, pos, left - 1, p * q);
                }
            }
            Frame::AfterSiblings(g, a) => {
                if g != a {
                    cont.push(Frame::LcCall(g, a));
                    return self.run(cont, pos, left, p);
                }
                match self.model.att_dist(a) {
                    None => self.run(cont, pos, left, p),
                    Some([att, pro]) => {
                        if left == 0 {
                            return;
                        }
                        self.run(cont.clone(), pos, left - 1, p * att);
                        cont.push(Frame::LcCall(g, a));
                        self.run(cont, pos, left - 1, p * pro);
                    }
                }
            }
        }
    }
}

/// Runs of the left-corner prefix parser that consume all of `words` with
/// at most `budget` switch draws.
pub fn oracle_plcg_prefix<T: Scalar, S: AsRef<str>>(
    model: &PlcgModel<T>,
    words: &[S],
    budget: usize,
) -> Result<MassEstimate<T>, QueryError> {
    let (words, _) = resolve_words(model.cfg(), words)?;
    let mut runner = PlcgRunner {
        model,
        words,
        total: T::zero(),
        runs: 0,
    };
    runner.run(vec![Frame::GCall(vec![model.cfg().start()])], 0, budget, T::one());
    Ok(MassEstimate {
        lower_bound: runner.total,
        budget,
        runs_counted: runner.runs,
    })
}

/// Paths from `from` that first hit `to` within `budget` transitions.
pub fn oracle_reach<T: Scalar>(
    chain: &MarkovChain<T>,
    from: &str,
    to: &str,
    budget: usize,
) -> Result<MassEstimate<T>, QueryError> {
    let s = chain
        .state(from)
        .ok_or_else(|| QueryError::UnknownState(from.to_string()))?;
    let t = chain
        .state(to)
        .ok_or_else(|| QueryError::UnknownState(to.to_string()))?;
    if s == t {
        return Ok(MassEstimate {
            lower_bound: T::one(),
            budget,
            runs_counted: 1,
        });
    }
    let mut frontier: Vec<(T, u64)> = vec![(T::zero(), 0); chain.state_count()];
    frontier[s] = (T::one(), 1);
    let mut total = T::zero();
    let mut runs = 0u64;
    for _ in 0..budget {
        let mut next = vec![(T::zero(), 0u64); chain.state_count()];
        for (state, &(p, c)) in frontier.iter().enumerate() {
            if c == 0 {
                continue;
            }
            for &(dest, q) in chain.transitions(state) {
                if dest == t {
                    total = total + p * q;
                    runs = runs.saturating_add(c);
                } else {
                    next[dest].0 = next[dest].0 + p * q;
                    next[dest].1 = next[dest].1.saturating_add(c);
                }
            }
        }
        frontier = next;
    }
    Ok(MassEstimate {
        lower_bound: total,
        budget,
        runs_counted: runs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{make_plcg, parse_cfg, parse_markov_chain, parse_pcfg};
    use crate::scalar::Rational;

    const G0: &str = "s -> s s : 0.4\ns -> a : 0.3\ns -> b : 0.3\n";

    #[test]
    fn prefix_budgets() {
        let g = parse_pcfg::<f64>(G0).unwrap();
        assert_eq!(oracle_prefix_pcfg(&g, &["a"], None, 0).unwrap().lower_bound, 0.0);
        let one = oracle_prefix_pcfg(&g, &["a"], None, 1).unwrap();
        assert!((one.lower_bound - 0.3).abs() < 1e-15);
        assert_eq!(one.runs_counted, 1);
        let twenty = oracle_prefix_pcfg(&g, &["a"], None, 20).unwrap();
        assert!((twenty.lower_bound - 0.5).abs() < 1e-4);
    }

    #[test]
    fn prefix_series_is_geometric() {
        // derivations of prefix "a": k applications of s -> s s then s -> a
        let g = parse_pcfg::<Rational>(G0).unwrap();
        let r = |n, d| Rational::new(n, d);
        let est = oracle_prefix_pcfg(&g, &["a"], None, 3).unwrap();
        assert_eq!(est.lower_bound, r(3, 10) + r(12, 100) + r(48, 1000));
        assert_eq!(est.runs_counted, 3);
    }

    #[test]
    fn sentence_is_exact() {
        let g = parse_pcfg::<Rational>(G0).unwrap();
        let r = |n, d| Rational::new(n, d);
        assert_eq!(oracle_sentence_pcfg(&g, &["a"], None, 1).unwrap().lower_bound, r(3, 10));
        assert_eq!(oracle_sentence_pcfg(&g, &["a"], None, 9).unwrap().lower_bound, r(3, 10));
        assert_eq!(oracle_sentence_pcfg(&g, &["a", "b"], None, 3).unwrap().lower_bound, r(36, 1000));
        assert_eq!(oracle_sentence_pcfg(&g, &["a"], None, 0).unwrap().lower_bound, r(0, 1));
    }

    #[test]
    fn plcg_budgets() {
        let cfg = parse_cfg(G0).unwrap();
        let m = make_plcg::<f64>(&cfg, None).unwrap();
        assert_eq!(oracle_plcg_prefix(&m, &["a", "b"], 0).unwrap().lower_bound, 0.0);
        // every draw counts, including the single-outcome lc(s,s), so each
        // extra projection costs two draws for a factor of 1/2
        let est = oracle_plcg_prefix(&m, &["a", "b"], 30).unwrap();
        assert!((est.lower_bound - 0.125).abs() < 1e-3, "{}", est.lower_bound);
        let est = oracle_plcg_prefix(&m, &["a", "b"], 34).unwrap();
        assert!((est.lower_bound - 0.125).abs() < 1e-4, "{}", est.lower_bound);
        let small = oracle_plcg_prefix(&m, &["a", "b"], 10).unwrap();
        assert!(small.lower_bound <= est.lower_bound);
    }

    #[test]
    fn plcg_forced_run() {
        let cfg = parse_cfg("s -> a\n").unwrap();
        let m = make_plcg::<f64>(&cfg, None).unwrap();
        let est = oracle_plcg_prefix(&m, &["a"], 3).unwrap();
        assert_eq!((est.lower_bound, est.runs_counted), (1.0, 1));
    }

    #[test]
    fn reach_paths() {
        let c = parse_markov_chain::<f64>("trans s0 s0 0.5\ntrans s0 s3 0.3\ntrans s0 s4 0.2\n").unwrap();
        assert!((oracle_reach(&c, "s0", "s3", 1).unwrap().lower_bound - 0.3).abs() < 1e-15);
        assert!((oracle_reach(&c, "s0", "s3", 30).unwrap().lower_bound - 0.6).abs() < 1e-6);
        assert_eq!(oracle_reach(&c, "s3", "s3", 0).unwrap().lower_bound, 1.0);
        assert!(oracle_reach(&c, "s0", "s9", 3).is_err());
    }
}
