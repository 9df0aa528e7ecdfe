//! Elementary circuit enumeration (Johnson's algorithm).

struct Search<'a> {
    adj: &'a [Vec<usize>],
    start: usize,
    in_scc: Vec<bool>,
    blocked: Vec<bool>,
    block_map: Vec<Vec<usize>>,
    stack: Vec<usize>,
    found: Vec<Vec<usize>>,
    limit: usize,
}

impl Search<'_> {
    fn unblock(&mut self, u: usize) {
        self.blocked[u] = false;
        let waiting = std::mem::take(&mut self.block_map[u]);
        for w in waiting {
            if self.blocked[w] {
                self.unblock(w);
            }
        }
    }

    /// Returns `None` once `limit` circuits have been collected.
    fn circuit(&mut self, v: usize) -> Option<bool> {
        let mut closed = false;
        self.stack.push(v);
        self.blocked[v] = true;
        for &w in &self.adj[v] {
            if !self.in_scc[w] {
                continue;
            }
            if w == self.start {
                self.found.push(self.stack.clone());
                closed = true;
                if self.found.len() >= self.limit {
                    return None;
                }
            } else if !self.blocked[w] && self.circuit(w)? {
                closed = true;
            }
        }
        if closed {
            self.unblock(v);
        } else {
            for &w in &self.adj[v] {
                if self.in_scc[w] && !self.block_map[w].contains(&v) {
                    self.block_map[w].push(v);
                }
            }
        }
        self.stack.pop();
        Some(closed)
    }
}

/// Nodes reachable from `s` and reaching `s`, using only nodes `>= s`.
fn component_of(adj: &[Vec<usize>], rev: &[Vec<usize>], s: usize) -> Vec<bool> {
    let n = adj.len();
    let sweep = |edges: &[Vec<usize>]| {
        let mut seen = vec![false; n];
        let mut todo = vec![s];
        seen[s] = true;
        while let Some(v) = todo.pop() {
            for &w in &edges[v] {
                if w >= s && !seen[w] {
                    seen[w] = true;
                    todo.push(w);
                }
            }
        }
        seen
    };
    let fwd = sweep(adj);
    let bwd = sweep(rev);
    fwd.iter().zip(&bwd).map(|(a, b)| *a && *b).collect()
}

/// All elementary circuits of the digraph, each listed from its smallest
/// node. Stops after `limit` circuits; the flag reports whether it did.
pub fn elementary_circuits(adj: &[Vec<usize>], limit: usize) -> (Vec<Vec<usize>>, bool) {
    let n = adj.len();
    let mut rev = vec![Vec::new(); n];
    for (v, ws) in adj.iter().enumerate() {
        for &w in ws {
            rev[w].push(v);
        }
    }
    let mut found = Vec::new();
    if limit == 0 {
        return (found, adj.iter().any(|ws| !ws.is_empty()));
    }
    for s in 0..n {
        let in_scc = component_of(adj, &rev, s);
        let trivial = in_scc.iter().filter(|&&x| x).count() == 1 && !adj[s].contains(&s);
        if trivial {
            continue;
        }
        let mut search = Search {
            adj,
            start: s,
            in_scc,
            blocked: vec![false; n],
            block_map: vec![Vec::new(); n],
            stack: Vec::new(),
            found,
            limit,
        };
        let done = search.circuit(s).is_none();
        found = search.found;
        if done {
            return (found, true);
        }
    }
    (found, false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Brute force: DFS over simple paths from each start, closing only at
    /// the start and only visiting larger nodes.
    fn brute_force(adj: &[Vec<usize>]) -> Vec<Vec<usize>> {
        fn walk(adj: &[Vec<usize>], s: usize, path: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
            let v = *path.last().unwrap();
            let mut next: Vec<usize> = adj[v].clone();
            next.sort_unstable();
            next.dedup();
            for w in next {
                if w == s {
                    out.push(path.clone());
                } else if w > s && !path.contains(&w) {
                    path.push(w);
                    walk(adj, s, path, out);
                    path.pop();
                }
            }
        }
        let mut out = Vec::new();
        for s in 0..adj.len() {
            walk(adj, s, &mut vec![s], &mut out);
        }
        out
    }

    #[test]
    fn triangle_and_self_loop() {
        let adj = vec![vec![1], vec![2], vec![0]];
        assert_eq!(elementary_circuits(&adj, 100).0, vec![vec![0, 1, 2]]);
        let adj = vec![vec![0]];
        assert_eq!(elementary_circuits(&adj, 100).0, vec![vec![0]]);
        let adj = vec![vec![1], vec![]];
        assert!(elementary_circuits(&adj, 100).0.is_empty());
    }

    #[test]
    fn limit_truncates() {
        // Complete digraph on 4 nodes has 20 elementary circuits.
        let adj: Vec<Vec<usize>> = (0..4)
            .map(|v| (0..4).filter(|&w| w != v).collect())
            .collect();
        assert_eq!(elementary_circuits(&adj, 1000).0.len(), 20);
        let (some, truncated) = elementary_circuits(&adj, 5);
        assert_eq!(some.len(), 5);
        assert!(truncated);
    }

    proptest! {
        #[test]
        fn matches_brute_force(edges in prop::collection::vec((0usize..6, 0usize..6), 0..14)) {
            let mut adj = vec![Vec::new(); 6];
            for (a, b) in edges {
                if !adj[a].contains(&b) {
                    adj[a].push(b);
                }
            }
            let mut got = elementary_circuits(&adj, usize::MAX).0;
            let mut want = brute_force(&adj);
            got.sort();
            want.sort();
            prop_assert_eq!(got, want);
        }
    }
}
