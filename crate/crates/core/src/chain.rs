//! Longest compatible sequences in a topologically ordered graph.
//!
//! Nodes are numbered in a fixed order and `succ[i]` holds the compatible
//! nodes after `i`. A longest path over `succ` bounds the answer; the exact
//! answer is the largest set that is pairwise compatible, found by
//! branch-and-bound in ascending node order so that the first maximum found
//! is also the lexicographically first.

use fixedbitset::FixedBitSet;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Longest {
    pub nodes: Vec<usize>,
    /// The search finished within its budget, so `nodes` is optimal.
    pub complete: bool,
}

/// `succ[i]` must only contain indices greater than `i`.
pub fn longest_clique(succ: &[FixedBitSet], candidates: &FixedBitSet, budget: u64) -> Longest {
    let n = succ.len();
    let mut ub = vec![0usize; n];
    for i in (0..n).rev() {
        if !candidates.contains(i) {
            continue;
        }
        let mut best = 0;
        for j in succ[i].ones() {
            if candidates.contains(j) {
                best = best.max(ub[j]);
            }
        }
        ub[i] = best + 1;
    }
    let mut s = Search {
        succ,
        ub: &ub,
        best: Vec::new(),
        cur: Vec::new(),
        steps: 0,
        budget,
        complete: true,
    };
    s.expand(candidates.clone());
    Longest {
        nodes: s.best,
        complete: s.complete,
    }
}

struct Search<'a> {
    succ: &'a [FixedBitSet],
    ub: &'a [usize],
    best: Vec<usize>,
    cur: Vec<usize>,
    steps: u64,
    budget: u64,
    complete: bool,
}

impl Search<'_> {
    fn expand(&mut self, cand: FixedBitSet) {
        if self.cur.len() > self.best.len() {
            self.best = self.cur.clone();
        }
        let mut remaining = cand.count_ones(..);
        for v in cand.ones() {
            if self.cur.len() + remaining.min(self.ub[v]) <= self.best.len() {
                remaining -= 1;
                continue;
            }
            self.steps += 1;
            if self.steps > self.budget {
                self.complete = false;
                return;
            }
            let mut next = cand.clone();
            next.intersect_with(&self.succ[v]);
            self.cur.push(v);
            self.expand(next);
            self.cur.pop();
            if !self.complete {
                return;
            }
            remaining -= 1;
        }
    }
}

/// Forward adjacency from a symmetric-or-not predicate, keeping only `j > i`.
pub fn forward_graph(n: usize, edge: impl Fn(usize, usize) -> bool + Sync) -> Vec<FixedBitSet> {
    use rayon::prelude::*;
    (0..n)
        .into_par_iter()
        .map(|i| {
            let mut row = FixedBitSet::with_capacity(n);
            for j in i + 1..n {
                if edge(i, j) {
                    row.insert(j);
                }
            }
            row
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn brute(n: usize, adj: &[Vec<bool>]) -> usize {
        (0u32..1 << n)
            .filter(|mask| {
                (0..n).all(|i| {
                    (i + 1..n).all(|j| mask & (1 << i) == 0 || mask & (1 << j) == 0 || adj[i][j])
                })
            })
            .map(|m| m.count_ones() as usize)
            .max()
            .unwrap()
    }

    #[test]
    fn empty_and_single() {
        let succ: Vec<FixedBitSet> = vec![];
        let r = longest_clique(&succ, &FixedBitSet::with_capacity(0), 10);
        assert!(r.nodes.is_empty() && r.complete);
        let succ = vec![FixedBitSet::with_capacity(1)];
        let mut all = FixedBitSet::with_capacity(1);
        all.insert(0);
        assert_eq!(longest_clique(&succ, &all, 10).nodes, vec![0]);
    }

    #[test]
    fn budget_is_flagged() {
        let n = 12;
        let succ = forward_graph(n, |_, _| true);
        let mut all = FixedBitSet::with_capacity(n);
        all.insert_range(..);
        assert!(!longest_clique(&succ, &all, 3).complete);
        assert_eq!(longest_clique(&succ, &all, 1000).nodes.len(), n);
    }

    proptest! {
        #[test]
        fn matches_brute_force(n in 1usize..10, bits in proptest::collection::vec(any::<bool>(), 45)) {
            let mut adj = vec![vec![false; n]; n];
            let mut k = 0;
            for i in 0..n {
                for j in i + 1..n {
                    adj[i][j] = bits[k];
                    adj[j][i] = bits[k];
                    k += 1;
                }
            }
            let succ = forward_graph(n, |i, j| adj[i][j]);
            let mut all = FixedBitSet::with_capacity(n);
            all.insert_range(..);
            let r = longest_clique(&succ, &all, u64::MAX);
            prop_assert!(r.complete);
            prop_assert_eq!(r.nodes.len(), brute(n, &adj));
            for (a, &i) in r.nodes.iter().enumerate() {
                for &j in &r.nodes[a + 1..] {
                    prop_assert!(adj[i][j]);
                }
            }
        }
    }
}
