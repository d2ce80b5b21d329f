use std::collections::{BTreeMap, BTreeSet};

use super::grammar::{left_corner_closure, strip_comment, Cfg, LeftCornerRelation, Sym};
use crate::error::ModelError;
use crate::scalar::Scalar;

/// Attach or project, the two outcomes of an `att(A)` switch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum AttachOp {
    Attach,
    Project,
}

impl AttachOp {
    pub fn as_str(self) -> &'static str {
        match self {
            AttachOp::Attach => "att",
            AttachOp::Project => "pro",
        }
    }
}

/// Probabilistic left-corner grammar: distributions over shift (`first`),
/// projection rule (`lc`) and attach/project (`att`) choices on top of a CFG.
#[derive(Debug, Clone)]
pub struct PlcgModel<T> {
    cfg: Cfg,
    left_corner: LeftCornerRelation,
    first: BTreeMap<Sym, Vec<(Sym, T)>>,
    lc: BTreeMap<(Sym, Sym), Vec<(usize, T)>>,
    att: BTreeMap<Sym, [T; 2]>,
}

impl<T: Scalar> PlcgModel<T> {
    pub fn cfg(&self) -> &Cfg {
        &self.cfg
    }

    pub fn left_corner(&self) -> &LeftCornerRelation {
        &self.left_corner
    }

    /// `first(G)` distribution; empty for terminals.
    pub fn first_dist(&self, g: Sym) -> &[(Sym, T)] {
        self.first.get(&g).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn first_prob(&self, g: Sym, t: Sym) -> Option<T> {
        self.first_dist(g).iter().find(|(s, _)| *s == t).map(|&(_, p)| p)
    }

    /// Rules `A -> b ...` selectable under goal `g` with left corner `b`.
    pub fn lc_dist(&self, g: Sym, b: Sym) -> &[(usize, T)] {
        self.lc.get(&(g, b)).map(Vec::as_slice).unwrap_or(&[])
    }

    /// `Some([att, pro])` when `A` is its own left corner; `None` means
    /// attach is forced.
    pub fn att_dist(&self, a: Sym) -> Option<[T; 2]> {
        self.att.get(&a).copied()
    }

    pub fn att_prob(&self, a: Sym, op: AttachOp) -> Option<T> {
        self.att_dist(a).map(|[att, pro]| match op {
            AttachOp::Attach => att,
            AttachOp::Project => pro,
        })
    }

    pub fn lc_keys(&self) -> impl Iterator<Item = (Sym, Sym)> + '_ {
        self.lc.keys().copied()
    }

    pub fn render_rule_outcome(&self, rule: usize) -> String {
        let r = self.cfg.rule(rule);
        format!("rule({},{})", self.cfg.name(r.lhs), self.cfg.render_list(&r.rhs))
    }
}

fn uniform<T: Scalar, K: Copy>(keys: impl IntoIterator<Item = K>) -> Vec<(K, T)> {
    let keys: Vec<K> = keys.into_iter().collect();
    let p = T::one() / T::from_usize(keys.len()).expect("count fits scalar");
    keys.into_iter().map(|k| (k, p)).collect()
}

/// Builds equiprobable PLCG distributions over `cfg`, then applies the
/// optional parameter-file overrides. Overridden switches must sum to one;
/// nothing is renormalized.
pub fn make_plcg<T: Scalar>(cfg: &Cfg, overrides: Option<&str>) -> Result<PlcgModel<T>, ModelError> {
    let left_corner = left_corner_closure(cfg);
    let first = left_corner
        .first_sets(cfg)
        .into_iter()
        .map(|(g, ts)| (g, uniform(ts)))
        .collect();
    let mut lc = BTreeMap::new();
    for &(g, b) in left_corner.pairs() {
        let rules = cfg.rules().iter().enumerate().filter(|(_, r)| {
            r.rhs[0] == b && (r.lhs == g || left_corner.contains(g, r.lhs))
        });
        lc.insert((g, b), uniform(rules.map(|(id, _)| id)));
    }
    let half = T::one() / (T::one() + T::one());
    let att = cfg
        .nonterminals()
        .filter(|&a| left_corner.contains(a, a))
        .map(|a| (a, [half, half]))
        .collect();
    let mut model = PlcgModel {
        cfg: cfg.clone(),
        left_corner,
        first,
        lc,
        att,
    };
    if let Some(text) = overrides {
        apply_overrides(&mut model, text)?;
    }
    Ok(model)
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
enum SwitchKey {
    First(Sym),
    Lc(Sym, Sym),
    Att(Sym),
}

fn apply_overrides<T: Scalar>(model: &mut PlcgModel<T>, text: &str) -> Result<(), ModelError> {
    let mut touched: BTreeSet<SwitchKey> = BTreeSet::new();
    let mut assigned: BTreeSet<(SwitchKey, String)> = BTreeSet::new();
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
        let cfg = &model.cfg;
        let unknown_switch = |switch: String| ModelError::UnknownSwitch {
            line: line_no,
            switch,
        };
        let (key, outcome, prob_text) = match tokens[0] {
            "first" => {
                let [_, g, t, p] = tokens[..] else {
                    return Err(syntax("expected `first <G> <terminal> <prob>`"));
                };
                let switch = format!("first({g})");
                let g = cfg.nonterminal(g).ok_or_else(|| unknown_switch(switch.clone()))?;
                let t_sym = cfg.terminal(t).filter(|&t| model.first_prob(g, t).is_some());
                let t_sym = t_sym.ok_or_else(|| ModelError::UnknownOutcome {
                    line: line_no,
                    switch,
                    outcome: t.to_string(),
                })?;
                (SwitchKey::First(g), t_sym.index().to_string(), p)
            }
            "att" => {
                let [_, a, op, p] = tokens[..] else {
                    return Err(syntax("expected `att <G> att|pro <prob>`"));
                };
                let switch = format!("att({a})");
                let a = cfg
                    .nonterminal(a)
                    .filter(|&a| model.att.contains_key(&a))
                    .ok_or_else(|| unknown_switch(switch.clone()))?;
                if op != "att" && op != "pro" {
                    return Err(ModelError::UnknownOutcome {
                        line: line_no,
                        switch,
                        outcome: op.to_string(),
                    });
                }
                (SwitchKey::Att(a), op.to_string(), p)
            }
            "lc" => {
                let (head, p) = line
                    .rsplit_once(':')
                    .ok_or_else(|| syntax("expected `lc <G> <b> <A> -> <sym> ... : <prob>`"))?;
                let (left, rhs) = head
                    .split_once("->")
                    .ok_or_else(|| syntax("expected `lc <G> <b> <A> -> <sym> ... : <prob>`"))?;
                let left: Vec<&str> = left.split_whitespace().collect();
                let [_, g, b, a] = left[..] else {
                    return Err(syntax("expected `lc <G> <b> <A> -> ...`"));
                };
                let switch = format!("lc({g},{b})");
                let key = match (cfg.nonterminal(g), cfg.symbol(b)) {
                    (Some(g), Some(b)) if model.lc.contains_key(&(g, b)) => (g, b),
                    _ => return Err(unknown_switch(switch)),
                };
                let rhs: Vec<&str> = rhs.split_whitespace().collect();
                let rule = cfg
                    .find_rule(a, &rhs)
                    .filter(|&id| model.lc[&key].iter().any(|&(r, _)| r == id));
                let rule = rule.ok_or_else(|| ModelError::UnknownOutcome {
                    line: line_no,
                    switch,
                    outcome: format!("{a} -> {}", rhs.join(" ")),
                })?;
                (SwitchKey::Lc(key.0, key.1), rule.to_string(), p.trim())
            }
            _ => return Err(syntax("expected `first`, `lc` or `att`")),
        };
        let prob = T::parse_decimal(prob_text).ok_or_else(|| syntax("bad probability"))?;
        if prob <= T::zero() || prob > T::one() {
            return Err(ModelError::BadProbability {
                line: line_no,
                prob: prob_text.to_string(),
            });
        }
        if !assigned.insert((key.clone(), outcome.clone())) {
            return Err(ModelError::Duplicate {
                line: line_no,
                what: "parameter".into(),
            });
        }
        match &key {
            SwitchKey::First(g) => {
                let t: usize = outcome.parse().expect("interned index");
                for entry in model.first.get_mut(g).expect("checked above") {
                    if entry.0.index() == t {
                        entry.1 = prob;
                    }
                }
            }
            SwitchKey::Lc(g, b) => {
                let rule: usize = outcome.parse().expect("rule id");
                for entry in model.lc.get_mut(&(*g, *b)).expect("checked above") {
                    if entry.0 == rule {
                        entry.1 = prob;
                    }
                }
            }
            SwitchKey::Att(a) => {
                let slot = if outcome == "att" { 0 } else { 1 };
                model.att.get_mut(a).expect("checked above")[slot] = prob;
            }
        }
        touched.insert(key);
    }

    let tol = T::tolerance(1e-9);
    for key in touched {
        let (switch, sum) = match key {
            SwitchKey::First(g) => (
                format!("first({})", model.cfg.name(g)),
                model.first[&g].iter().fold(T::zero(), |acc, &(_, p)| acc + p),
            ),
            SwitchKey::Lc(g, b) => (
                format!("lc({},{})", model.cfg.name(g), model.cfg.name(b)),
                model.lc[&(g, b)].iter().fold(T::zero(), |acc, &(_, p)| acc + p),
            ),
            SwitchKey::Att(a) => (
                format!("att({})", model.cfg.name(a)),
                model.att[&a][0] + model.att[&a][1],
            ),
        };
        if (sum - T::one()).abs() > tol {
            return Err(ModelError::BadSwitchSum {
                switch,
                sum: sum.to_f64_lossy(),
            });
        }
    }
    Ok(())
}
