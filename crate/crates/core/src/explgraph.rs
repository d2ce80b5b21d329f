//! Explanation graphs: every provable ground goal reachable from a query,
//! each with a defining formula `H <=> a1 v ... v aM` whose disjuncts are
//! conjunctions of subgoals and switch choices. Graphs may be cyclic.

use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt::Write as _;
use std::hash::Hash;

use crate::error::BuildError;
use crate::scalar::Scalar;
use crate::scc;

/// A probabilistic choice `msw(switch, outcome)` with its model probability.
#[derive(Debug, Clone, PartialEq)]
pub struct SwitchChoice<T> {
    pub switch: String,
    pub outcome: String,
    pub prob: T,
}

impl<T> SwitchChoice<T> {
    pub fn new(switch: impl Into<String>, outcome: impl Into<String>, prob: T) -> Self {
        SwitchChoice {
            switch: switch.into(),
            outcome: outcome.into(),
            prob,
        }
    }
}

/// One candidate disjunct produced by an engine.
#[derive(Debug, Clone, PartialEq)]
pub struct Alternative<G, T> {
    pub subgoals: Vec<G>,
    pub choices: Vec<SwitchChoice<T>>,
}

impl<G, T> Alternative<G, T> {
    pub fn fact() -> Self {
        Alternative {
            subgoals: Vec::new(),
            choices: Vec::new(),
        }
    }
}

/// Clause-body semantics for one kind of query.
///
/// `expand` must be pure, and the set of goals reachable from the root must
/// be finite.
pub trait DerivationEngine {
    type Goal: Clone + Eq + Hash;
    type Scalar: Scalar;

    fn root(&self) -> Self::Goal;

    /// Every ground instantiation of a defining clause with head `goal`.
    fn expand(&self, goal: &Self::Goal) -> Vec<Alternative<Self::Goal, Self::Scalar>>;

    /// Canonical printable form, e.g. `pre_pcfg([s,s],[a],[])`.
    fn render(&self, goal: &Self::Goal) -> String;
}

/// Index of a goal inside an [`ExplanationGraph`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GoalId(pub usize);

#[derive(Debug, Clone, PartialEq)]
pub struct GraphAlternative<T> {
    pub subgoals: Vec<GoalId>,
    pub choices: Vec<SwitchChoice<T>>,
}

impl<T> GraphAlternative<T> {
    pub fn is_empty(&self) -> bool {
        self.subgoals.is_empty() && self.choices.is_empty()
    }
}

/// A pruned, closed explanation graph. Goal 0 is the root; goals are numbered
/// in breadth-first discovery order and alternatives keep expansion order.
#[derive(Debug, Clone)]
pub struct ExplanationGraph<G, T> {
    goals: Vec<G>,
    labels: Vec<String>,
    formulas: Vec<Vec<GraphAlternative<T>>>,
    index: HashMap<G, GoalId>,
}

impl<G: Clone + Eq + Hash, T: Scalar> ExplanationGraph<G, T> {
    pub fn root(&self) -> GoalId {
        GoalId(0)
    }

    pub fn len(&self) -> usize {
        self.goals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.goals.is_empty()
    }

    pub fn goal(&self, id: GoalId) -> &G {
        &self.goals[id.0]
    }

    pub fn label(&self, id: GoalId) -> &str {
        &self.labels[id.0]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn id_of(&self, goal: &G) -> Option<GoalId> {
        self.index.get(goal).copied()
    }

    pub fn id_of_label(&self, label: &str) -> Option<GoalId> {
        self.labels.iter().position(|l| l == label).map(GoalId)
    }

    /// Disjuncts of the defining formula of `id`.
    pub fn formula(&self, id: GoalId) -> &[GraphAlternative<T>] {
        &self.formulas[id.0]
    }

    pub fn ids(&self) -> impl Iterator<Item = GoalId> {
        (0..self.goals.len()).map(GoalId)
    }

    /// Subgoal edges, one list per goal (duplicates kept).
    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        self.formulas
            .iter()
            .map(|alts| {
                alts.iter()
                    .flat_map(|a| a.subgoals.iter().map(|g| g.0))
                    .collect()
            })
            .collect()
    }

    /// True iff some goal is its own ancestor.
    pub fn is_cyclic(&self) -> bool {
        scc::has_cycle(&self.adjacency())
    }

    /// True iff the goal is a fact: a single empty disjunct.
    pub fn is_fact(&self, id: GoalId) -> bool {
        matches!(self.formula(id), [only] if only.is_empty())
    }
}

/// Limits for [`build_graph`].
#[derive(Debug, Clone, Copy)]
pub struct BuildConfig {
    pub max_goals: usize,
}

impl Default for BuildConfig {
    fn default() -> Self {
        BuildConfig {
            max_goals: 10_000_000,
        }
    }
}

/// Builds the explanation graph of the engine's root goal.
///
/// Explores every goal reachable under `expand`, computes provability as a
/// least fixpoint, drops unprovable goals and the alternatives that mention
/// them, and keeps only what is still reachable from the root. Returns
/// `Ok(None)` when the root itself is unprovable.
pub fn build_graph<E: DerivationEngine>(
    engine: &E,
    config: &BuildConfig,
) -> Result<Option<ExplanationGraph<E::Goal, E::Scalar>>, BuildError> {
    build_graph_from(engine, engine.root(), config)
}

pub fn build_graph_from<E: DerivationEngine>(
    engine: &E,
    root: E::Goal,
    config: &BuildConfig,
) -> Result<Option<ExplanationGraph<E::Goal, E::Scalar>>, BuildError> {
    // explore
    let mut goals: Vec<E::Goal> = vec![root.clone()];
    let mut index: HashMap<E::Goal, usize> = HashMap::from([(root, 0)]);
    let mut formulas: Vec<Vec<GraphAlternative<E::Scalar>>> = Vec::new();
    let mut next = 0;
    while next < goals.len() {
        let alternatives = engine.expand(&goals[next]);
        let mut seen: HashSet<(Vec<usize>, Vec<(String, String)>)> = HashSet::new();
        let mut formula = Vec::with_capacity(alternatives.len());
        for alt in alternatives {
            let mut subgoals = Vec::with_capacity(alt.subgoals.len());
            for g in alt.subgoals {
                let id = match index.get(&g) {
                    Some(&id) => id,
                    None => {
                        if goals.len() >= config.max_goals {
                            return Err(BuildError::GoalBudgetExceeded {
                                limit: config.max_goals,
                            });
                        }
                        goals.push(g.clone());
                        index.insert(g, goals.len() - 1);
                        goals.len() - 1
                    }
                };
                subgoals.push(GoalId(id));
            }
            let key = (
                subgoals.iter().map(|g| g.0).collect(),
                alt.choices
                    .iter()
                    .map(|c| (c.switch.clone(), c.outcome.clone()))
                    .collect(),
            );
            if seen.insert(key) {
                formula.push(GraphAlternative {
                    subgoals,
                    choices: alt.choices,
                });
            }
        }
        formulas.push(formula);
        next += 1;
    }

    // prune: least fixpoint of provability
    let n = goals.len();
    let mut proved = vec![false; n];
    let mut pending: Vec<Vec<usize>> = Vec::with_capacity(n);
    let mut watchers: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    let mut queue = VecDeque::new();
    for (h, formula) in formulas.iter().enumerate() {
        let mut counts = Vec::with_capacity(formula.len());
        for (a, alt) in formula.iter().enumerate() {
            let distinct: HashSet<usize> = alt.subgoals.iter().map(|g| g.0).collect();
            for &g in &distinct {
                watchers[g].push((h, a));
            }
            counts.push(distinct.len());
            if distinct.is_empty() && !proved[h] {
                proved[h] = true;
                queue.push_back(h);
            }
        }
        pending.push(counts);
    }
    while let Some(g) = queue.pop_front() {
        for &(h, a) in &watchers[g] {
            pending[h][a] -= 1;
            if pending[h][a] == 0 && !proved[h] {
                proved[h] = true;
                queue.push_back(h);
            }
        }
    }
    if !proved[0] {
        return Ok(None);
    }

    // keep what is reachable from the root through surviving alternatives
    let mut remap = vec![usize::MAX; n];
    let mut order = vec![0];
    remap[0] = 0;
    let mut head = 0;
    while head < order.len() {
        let old = order[head];
        head += 1;
        for alt in &formulas[old] {
            if alt.subgoals.iter().all(|g| proved[g.0]) {
                for g in &alt.subgoals {
                    if remap[g.0] == usize::MAX {
                        remap[g.0] = order.len();
                        order.push(g.0);
                    }
                }
            }
        }
    }

    let mut slots: Vec<Option<E::Goal>> = goals.into_iter().map(Some).collect();
    let mut graph = ExplanationGraph {
        goals: Vec::with_capacity(order.len()),
        labels: Vec::with_capacity(order.len()),
        formulas: Vec::with_capacity(order.len()),
        index: HashMap::with_capacity(order.len()),
    };
    for (new, &old) in order.iter().enumerate() {
        let goal = slots[old].take().expect("each goal kept once");
        let formula = std::mem::take(&mut formulas[old])
            .into_iter()
            .filter(|alt| alt.subgoals.iter().all(|g| proved[g.0]))
            .map(|alt| GraphAlternative {
                subgoals: alt.subgoals.iter().map(|g| GoalId(remap[g.0])).collect(),
                choices: alt.choices,
            })
            .collect();
        graph.labels.push(engine.render(&goal));
        graph.index.insert(goal.clone(), GoalId(new));
        graph.goals.push(goal);
        graph.formulas.push(formula);
    }
    Ok(Some(graph))
}

/// Renders the graph one line per goal:
/// `H <=> g1 & msw(sw,v) v g2 & ...`; facts print as the bare head.
pub fn dump_graph<G: Clone + Eq + Hash, T: Scalar>(graph: &ExplanationGraph<G, T>) -> String {
    let mut out = String::new();
    for id in graph.ids() {
        out.push_str(graph.label(id));
        if !graph.is_fact(id) {
            let alts: Vec<String> = graph
                .formula(id)
                .iter()
                .map(|alt| {
                    let mut parts: Vec<String> =
                        alt.subgoals.iter().map(|&g| graph.label(g).to_string()).collect();
                    parts.extend(
                        alt.choices
                            .iter()
                            .map(|c| format!("msw({},{})", c.switch, c.outcome)),
                    );
                    if parts.is_empty() {
                        "true".to_string()
                    } else {
                        parts.join(" & ")
                    }
                })
                .collect();
            let _ = write!(out, " <=> {}", alts.join(" v "));
        }
        out.push('\n');
    }
    out
}
