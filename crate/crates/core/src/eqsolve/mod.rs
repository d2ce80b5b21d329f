//! Probability equations of an explanation graph and their solution.
//!
//! Each goal `H` gets a variable `X(H)` and the equation
//! `X(H) = sum over disjuncts of (product of choice probabilities) *
//! (product of subgoal variables)`. Strongly connected components of the
//! variable dependency graph are solved bottom-up; a linear component is a
//! system `X = M X + Y` solved as `(I - M) X = Y`.

mod linalg;
mod solve;

pub use linalg::{gaussian_solve, spectral_radius_estimate};
pub use solve::{
    solve_fixpoint, solve_stratified, stratum_system, FixpointOptions, Solution, SolverKind,
    StratumSystem, PIVOT_TOLERANCE, VALUE_SLACK,
};

use std::fmt::Write as _;
use std::hash::Hash;

use crate::explgraph::ExplanationGraph;
use crate::scalar::Scalar;
use crate::scc;

/// `coef * X(vars[0]) * X(vars[1]) * ...`
#[derive(Debug, Clone, PartialEq)]
pub struct Term<T> {
    pub coef: T,
    pub vars: Vec<usize>,
}

#[derive(Debug, Clone)]
pub struct EquationSystem<T> {
    labels: Vec<String>,
    equations: Vec<Vec<Term<T>>>,
    root: usize,
}

impl<T: Scalar> EquationSystem<T> {
    /// Panics if a term references a variable without an equation.
    pub fn new(labels: Vec<String>, equations: Vec<Vec<Term<T>>>, root: usize) -> Self {
        assert_eq!(labels.len(), equations.len(), "one label per equation");
        assert!(root < equations.len(), "root out of range");
        for eq in &equations {
            for term in eq {
                assert!(term.vars.iter().all(|&v| v < equations.len()), "dangling variable");
            }
        }
        EquationSystem {
            labels,
            equations,
            root,
        }
    }

    pub fn len(&self) -> usize {
        self.equations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.equations.is_empty()
    }

    pub fn root(&self) -> usize {
        self.root
    }

    pub fn label(&self, var: usize) -> &str {
        &self.labels[var]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn var_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn equation(&self, var: usize) -> &[Term<T>] {
        &self.equations[var]
    }

    /// Right-hand side of one equation at `x`.
    pub fn eval_equation(&self, var: usize, x: &[T]) -> T {
        self.equations[var].iter().fold(T::zero(), |acc, term| {
            acc + term.vars.iter().fold(term.coef, |p, &v| p * x[v])
        })
    }

    /// The operator `T(x)`.
    pub fn apply(&self, x: &[T]) -> Vec<T> {
        (0..self.len()).map(|v| self.eval_equation(v, x)).collect()
    }

    pub(crate) fn adjacency(&self) -> Vec<Vec<usize>> {
        self.equations
            .iter()
            .map(|eq| eq.iter().flat_map(|t| t.vars.iter().copied()).collect())
            .collect()
    }
}

/// One equation per goal; facts become `X = 1`.
pub fn assemble<G: Clone + Eq + Hash, T: Scalar>(graph: &ExplanationGraph<G, T>) -> EquationSystem<T> {
    let equations = graph
        .ids()
        .map(|id| {
            graph
                .formula(id)
                .iter()
                .map(|alt| Term {
                    coef: alt.choices.iter().fold(T::one(), |p, c| p * c.prob),
                    vars: alt.subgoals.iter().map(|g| g.0).collect(),
                })
                .collect()
        })
        .collect();
    EquationSystem::new(graph.labels().to_vec(), equations, graph.root().0)
}

/// `X(<goal>) = <coef>*X(<goal>)*... + ...`, one line per equation in graph
/// order.
pub fn dump_equations<T: Scalar>(system: &EquationSystem<T>) -> String {
    let mut out = String::new();
    for var in 0..system.len() {
        let terms: Vec<String> = system
            .equation(var)
            .iter()
            .map(|t| {
                let mut s = t.coef.to_string();
                for &v in &t.vars {
                    let _ = write!(s, "*X({})", system.label(v));
                }
                s
            })
            .collect();
        let _ = writeln!(out, "X({}) = {}", system.label(var), terms.join(" + "));
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stratum {
    pub vars: Vec<usize>,
    /// More than one variable, or a single variable referring to itself.
    pub recursive: bool,
}

/// Strongly connected components in dependency order: a stratum only refers
/// to variables in itself or in earlier strata.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SccDecomposition {
    pub strata: Vec<Stratum>,
    pub component_of: Vec<usize>,
}

pub fn decompose_scc<T: Scalar>(system: &EquationSystem<T>) -> SccDecomposition {
    let adj = system.adjacency();
    let comps = scc::tarjan(&adj);
    let mut component_of = vec![0; system.len()];
    for (c, comp) in comps.iter().enumerate() {
        for &v in comp {
            component_of[v] = c;
        }
    }
    let strata = comps
        .into_iter()
        .map(|vars| {
            let recursive = vars.len() > 1 || adj[vars[0]].contains(&vars[0]);
            Stratum { vars, recursive }
        })
        .collect();
    SccDecomposition {
        strata,
        component_of,
    }
}

/// Two subgoal occurrences of one disjunct that fall into the same SCC.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearityViolation {
    pub var: usize,
    pub goal: String,
    pub alternative: usize,
    pub pair: (usize, usize),
}

/// Every disjunct whose body holds two defined goals from one SCC; empty
/// means the system is linear.
pub fn check_linearity<T: Scalar>(
    system: &EquationSystem<T>,
    decomposition: &SccDecomposition,
) -> Vec<LinearityViolation> {
    let comp = &decomposition.component_of;
    let mut violations = Vec::new();
    for var in 0..system.len() {
        for (alt, term) in system.equation(var).iter().enumerate() {
            'pairs: for (i, &a) in term.vars.iter().enumerate() {
                for &b in &term.vars[i + 1..] {
                    if comp[a] == comp[b] {
                        violations.push(LinearityViolation {
                            var,
                            goal: system.label(var).to_string(),
                            alternative: alt,
                            pair: (a, b),
                        });
                        break 'pairs;
                    }
                }
            }
        }
    }
    violations
}
