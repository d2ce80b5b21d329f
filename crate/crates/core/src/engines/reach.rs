use crate::error::QueryError;
use crate::explgraph::{Alternative, DerivationEngine, SwitchChoice};
use crate::model::MarkovChain;
use crate::scalar::Scalar;

/// `reach(from, to)`: the chain started in `from` eventually visits `to`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ReachGoal {
    pub from: usize,
    pub to: usize,
}

#[derive(Debug, Clone)]
pub struct ReachEngine<'a, T> {
    chain: &'a MarkovChain<T>,
    root: ReachGoal,
}

pub fn markov_reach_engine<'a, T: Scalar>(
    chain: &'a MarkovChain<T>,
    from: &str,
    to: &str,
) -> Result<ReachEngine<'a, T>, QueryError> {
    let lookup = |name: &str| chain.state(name).ok_or_else(|| QueryError::UnknownState(name.to_string()));
    Ok(ReachEngine {
        chain,
        root: ReachGoal {
            from: lookup(from)?,
            to: lookup(to)?,
        },
    })
}

impl<T: Scalar> DerivationEngine for ReachEngine<'_, T> {
    type Goal = ReachGoal;
    type Scalar = T;

    fn root(&self) -> ReachGoal {
        self.root
    }

    fn expand(&self, goal: &ReachGoal) -> Vec<Alternative<ReachGoal, T>> {
        if goal.from == goal.to {
            return vec![Alternative::fact()];
        }
        let switch = format!("trans({})", self.chain.state_name(goal.from));
        self.chain
            .transitions(goal.from)
            .iter()
            .map(|&(next, p)| Alternative {
                subgoals: vec![ReachGoal {
                    from: next,
                    to: goal.to,
                }],
                choices: vec![SwitchChoice::new(switch.clone(), self.chain.state_name(next), p)],
            })
            .collect()
    }

    fn render(&self, goal: &ReachGoal) -> String {
        format!(
            "reach({},{})",
            self.chain.state_name(goal.from),
            self.chain.state_name(goal.to)
        )
    }
}
