use std::collections::HashMap;

use super::grammar::strip_comment;
use crate::error::ModelError;
use crate::scalar::Scalar;

/// Discrete-time Markov chain. States are numbered in order of first
/// appearance in the file; states without outgoing edges are absorbing.
#[derive(Debug, Clone)]
pub struct MarkovChain<T> {
    states: Vec<String>,
    index: HashMap<String, usize>,
    trans: Vec<Vec<(usize, T)>>,
}

impl<T: Scalar> MarkovChain<T> {
    pub fn state(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn state_name(&self, id: usize) -> &str {
        &self.states[id]
    }

    pub fn state_count(&self) -> usize {
        self.states.len()
    }

    /// Outgoing edges of `state` in file order.
    pub fn transitions(&self, state: usize) -> &[(usize, T)] {
        &self.trans[state]
    }

    pub fn is_absorbing(&self, state: usize) -> bool {
        self.trans[state].is_empty()
    }
}

pub fn parse_markov_chain<T: Scalar>(text: &str) -> Result<MarkovChain<T>, ModelError> {
    let mut chain = MarkovChain {
        states: Vec::new(),
        index: HashMap::new(),
        trans: Vec::new(),
    };
    let intern = |chain: &mut MarkovChain<T>, name: &str| -> usize {
        if let Some(&id) = chain.index.get(name) {
            return id;
        }
        chain.states.push(name.to_string());
        chain.trans.push(Vec::new());
        chain.index.insert(name.to_string(), chain.states.len() - 1);
        chain.states.len() - 1
    };
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = strip_comment(line);
        if line.is_empty() {
            continue;
        }
        let tokens: Vec<&str> = line.split_whitespace().collect();
        let ["trans", from, to, p] = tokens[..] else {
            return Err(ModelError::Syntax {
                line: line_no,
                message: "expected `trans <from> <to> <prob>`".into(),
            });
        };
        let prob = T::parse_decimal(p).ok_or_else(|| ModelError::Syntax {
            line: line_no,
            message: format!("bad probability `{p}`"),
        })?;
        if prob <= T::zero() || prob > T::one() {
            return Err(ModelError::BadProbability {
                line: line_no,
                prob: p.to_string(),
            });
        }
        let from = intern(&mut chain, from);
        let to = intern(&mut chain, to);
        if chain.trans[from].iter().any(|&(s, _)| s == to) {
            return Err(ModelError::Duplicate {
                line: line_no,
                what: "transition".into(),
            });
        }
        chain.trans[from].push((to, prob));
    }
    if chain.states.is_empty() {
        return Err(ModelError::Empty);
    }
    let tol = T::tolerance(1e-9);
    for (id, edges) in chain.trans.iter().enumerate() {
        if edges.is_empty() {
            continue;
        }
        let sum = edges.iter().fold(T::zero(), |acc, &(_, p)| acc + p);
        if (sum - T::one()).abs() > tol {
            return Err(ModelError::BadTransitionSum {
                state: chain.states[id].clone(),
                sum: sum.to_f64_lossy(),
            });
        }
    }
    Ok(chain)
}
