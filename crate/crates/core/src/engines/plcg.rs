use super::{dlist, resolve_words};
use crate::error::QueryError;
use crate::explgraph::{Alternative, DerivationEngine, SwitchChoice};
use crate::model::{AttachOp, PlcgModel, Sym};
use crate::scalar::Scalar;

/// Goals of the left-corner prefix parser.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum PlcgGoal {
    /// `pre_plcg(words)`
    Top,
    /// Shift: build trees for `stack` over words `start..end`.
    GCall {
        stack: Vec<Sym>,
        start: usize,
        end: usize,
    },
    /// Grow a `corner`-tree into a `goal`-tree by attach/project.
    LcCall {
        goal: Sym,
        corner: Sym,
        start: usize,
        end: usize,
    },
    AttOrPro { nonterminal: Sym, op: AttachOp },
}

#[derive(Debug, Clone)]
pub struct PlcgEngine<'a, T> {
    model: &'a PlcgModel<T>,
    words: Vec<Option<Sym>>,
    names: Vec<String>,
}

pub fn plcg_prefix_engine<'a, T: Scalar, S: AsRef<str>>(
    model: &'a PlcgModel<T>,
    words: &[S],
) -> Result<PlcgEngine<'a, T>, QueryError> {
    let (words, names) = resolve_words(model.cfg(), words)?;
    Ok(PlcgEngine { model, words, names })
}

impl<T: Scalar> PlcgEngine<'_, T> {
    fn n(&self) -> usize {
        self.words.len()
    }

    fn expand_g_call(&self, stack: &[Sym], i: usize, j: usize) -> Vec<Alternative<PlcgGoal, T>> {
        let mut out = Vec::new();
        let Some((&first, rest)) = stack.split_first() else {
            if i == j {
                out.push(Alternative::fact());
            }
            return out;
        };
        if i >= self.n() || j <= i {
            return out;
        }
        let Some(word) = self.words[i] else {
            return out;
        };
        let mut heads: Vec<(usize, Vec<PlcgGoal>, Vec<SwitchChoice<T>>)> = Vec::new();
        if first == word {
            heads.push((i + 1, vec![], vec![]));
        } else if let Some(p) = self.model.first_prob(first, word) {
            let cfg = self.model.cfg();
            for k in i + 1..=j {
                heads.push((
                    k,
                    vec![PlcgGoal::LcCall {
                        goal: first,
                        corner: word,
                        start: i + 1,
                        end: k,
                    }],
                    vec![SwitchChoice::new(
                        format!("first({})", cfg.name(first)),
                        cfg.name(word),
                        p,
                    )],
                ));
            }
        }
        for (k, mut subgoals, choices) in heads {
            if k == self.n() {
                if j != self.n() {
                    continue;
                }
            } else {
                if rest.is_empty() && k != j {
                    continue;
                }
                subgoals.push(PlcgGoal::GCall {
                    stack: rest.to_vec(),
                    start: k,
                    end: j,
                });
            }
            out.push(Alternative { subgoals, choices });
        }
        out
    }

    fn expand_lc_call(&self, goal: Sym, corner: Sym, i: usize, j: usize) -> Vec<Alternative<PlcgGoal, T>> {
        let mut out = Vec::new();
        if j < i {
            return out;
        }
        let cfg = self.model.cfg();
        for &(rule, p) in self.model.lc_dist(goal, corner) {
            let lhs = cfg.rule(rule).lhs;
            if lhs != goal && !self.model.left_corner().contains(goal, lhs) {
                continue;
            }
            let gamma = &cfg.rule(rule).rhs[1..];
            let choice = SwitchChoice::new(
                format!("lc({},{})", cfg.name(goal), cfg.name(corner)),
                self.model.render_rule_outcome(rule),
                p,
            );
            let mut splits: Vec<(usize, Option<PlcgGoal>)> = Vec::new();
            if i == self.n() {
                splits.push((i, None));
            } else {
                for k in i..=j {
                    if gamma.is_empty() && k != i {
                        break;
                    }
                    splits.push((
                        k,
                        Some(PlcgGoal::GCall {
                            stack: gamma.to_vec(),
                            start: i,
                            end: k,
                        }),
                    ));
                }
            }
            for (k, shift) in splits {
                let base: Vec<PlcgGoal> = shift.into_iter().collect();
                let climb = PlcgGoal::LcCall {
                    goal,
                    corner: lhs,
                    start: k,
                    end: j,
                };
                if lhs == goal {
                    if k == j {
                        let mut subgoals = base.clone();
                        subgoals.push(PlcgGoal::AttOrPro {
                            nonterminal: lhs,
                            op: AttachOp::Attach,
                        });
                        out.push(Alternative {
                            subgoals,
                            choices: vec![choice.clone()],
                        });
                    }
                    if self.model.att_dist(lhs).is_some() {
                        let mut subgoals = base;
                        subgoals.push(PlcgGoal::AttOrPro {
                            nonterminal: lhs,
                            op: AttachOp::Project,
                        });
                        subgoals.push(climb);
                        out.push(Alternative {
                            subgoals,
                            choices: vec![choice.clone()],
                        });
                    }
                } else {
                    let mut subgoals = base;
                    subgoals.push(climb);
                    out.push(Alternative {
                        subgoals,
                        choices: vec![choice.clone()],
                    });
                }
            }
        }
        out
    }
}

impl<T: Scalar> DerivationEngine for PlcgEngine<'_, T> {
    type Goal = PlcgGoal;
    type Scalar = T;

    fn root(&self) -> PlcgGoal {
        PlcgGoal::Top
    }

    fn expand(&self, goal: &PlcgGoal) -> Vec<Alternative<PlcgGoal, T>> {
        match goal {
            PlcgGoal::Top => vec![Alternative {
                subgoals: vec![PlcgGoal::GCall {
                    stack: vec![self.model.cfg().start()],
                    start: 0,
                    end: self.n(),
                }],
                choices: vec![],
            }],
            PlcgGoal::GCall { stack, start, end } => self.expand_g_call(stack, *start, *end),
            PlcgGoal::LcCall {
                goal,
                corner,
                start,
                end,
            } => self.expand_lc_call(*goal, *corner, *start, *end),
            PlcgGoal::AttOrPro { nonterminal, op } => match self.model.att_prob(*nonterminal, *op) {
                Some(p) => vec![Alternative {
                    subgoals: vec![],
                    choices: vec![SwitchChoice::new(
                        format!("att({})", self.model.cfg().name(*nonterminal)),
                        op.as_str(),
                        p,
                    )],
                }],
                None if *op == AttachOp::Attach => vec![Alternative::fact()],
                None => vec![],
            },
        }
    }

    fn render(&self, goal: &PlcgGoal) -> String {
        let cfg = self.model.cfg();
        match goal {
            PlcgGoal::Top => format!("pre_plcg({})", dlist(&self.names, 0)),
            PlcgGoal::GCall { stack, start, end } => format!(
                "g_call({},{},{})",
                cfg.render_list(stack),
                dlist(&self.names, *start),
                dlist(&self.names, *end)
            ),
            PlcgGoal::LcCall {
                goal,
                corner,
                start,
                end,
            } => format!(
                "lc_call({},{},{},{})",
                cfg.name(*goal),
                cfg.name(*corner),
                dlist(&self.names, *start),
                dlist(&self.names, *end)
            ),
            PlcgGoal::AttOrPro { nonterminal, op } => {
                format!("att_or_pro({},{})", cfg.name(*nonterminal), op.as_str())
            }
        }
    }
}
