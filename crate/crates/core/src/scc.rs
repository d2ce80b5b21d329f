//! Tarjan's strongly connected components over an adjacency list.

/// Components in reverse topological order of the condensation: every edge
/// leaving a component points into one emitted earlier. Deterministic for a
/// given vertex and edge order.
pub fn tarjan(adj: &[Vec<usize>]) -> Vec<Vec<usize>> {
    const UNVISITED: usize = usize::MAX;
    let n = adj.len();
    let mut index = vec![UNVISITED; n];
    let mut low = vec![0; n];
    let mut on_stack = vec![false; n];
    let mut stack = Vec::new();
    let mut comps = Vec::new();
    let mut next = 0;
    // (vertex, next edge position)
    let mut call: Vec<(usize, usize)> = Vec::new();

    for root in 0..n {
        if index[root] != UNVISITED {
            continue;
        }
        call.push((root, 0));
        index[root] = next;
        low[root] = next;
        next += 1;
        stack.push(root);
        on_stack[root] = true;

        while let Some(&(v, pos)) = call.last() {
            if let Some(&w) = adj[v].get(pos) {
                call.last_mut().expect("nonempty").1 += 1;
                if index[w] == UNVISITED {
                    index[w] = next;
                    low[w] = next;
                    next += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(index[w]);
                }
                continue;
            }
            call.pop();
            if let Some(&(parent, _)) = call.last() {
                low[parent] = low[parent].min(low[v]);
            }
            if low[v] == index[v] {
                let mut comp = Vec::new();
                loop {
                    let w = stack.pop().expect("tarjan stack underflow");
                    on_stack[w] = false;
                    comp.push(w);
                    if w == v {
                        break;
                    }
                }
                comp.sort_unstable();
                comps.push(comp);
            }
        }
    }
    comps
}

/// True iff some vertex reaches itself.
pub fn has_cycle(adj: &[Vec<usize>]) -> bool {
    adj.iter().enumerate().any(|(v, succ)| succ.contains(&v))
        || tarjan(adj).iter().any(|c| c.len() > 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reverse_topological_order() {
        // 0 -> 1 -> 2 -> 1, 2 -> 3
        let adj = vec![vec![1], vec![2], vec![1, 3], vec![]];
        let comps = tarjan(&adj);
        assert_eq!(comps, vec![vec![3], vec![1, 2], vec![0]]);
        assert!(has_cycle(&adj));
    }

    #[test]
    fn self_loop_and_dag() {
        assert!(has_cycle(&[vec![0]]));
        assert!(!has_cycle(&[vec![1], vec![2], vec![]]));
        assert_eq!(tarjan(&[vec![1], vec![2], vec![]]), vec![vec![2], vec![1], vec![0]]);
    }

    #[test]
    fn deep_chain_does_not_recurse() {
        let n = 200_000;
        let adj: Vec<Vec<usize>> = (0..n).map(|i| if i + 1 < n { vec![i + 1] } else { vec![] }).collect();
        assert_eq!(tarjan(&adj).len(), n);
    }
}
