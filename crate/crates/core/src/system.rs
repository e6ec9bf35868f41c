//! Chain systems: membership predicates on finite wall sets and the
//! longest-member searches behind the dual distance.
//!
//! Every system here is built from pairwise data. A wall may carry several
//! defining balls, so membership is decided over *tokens* `(wall, ball)`:
//! a set of walls is a member iff one token per wall can be chosen with all
//! chosen tokens pairwise compatible (plus the chain condition). Searches
//! run over tokens and read off the distinct walls.

use std::sync::Arc;

use fixedbitset::FixedBitSet;
use serde::Serialize;

use crate::chain::{forward_graph, longest_clique, Longest};
use crate::metric::{DistTable, FiniteMetric};
use crate::ultrafilter::Ultrafilter;
use crate::wall::WallSet;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum SystemKind {
    /// Chains of walls definable by pairwise far-apart balls.
    Disparate,
    /// Unions of one disparate chain per color.
    D1,
    /// Members of `D1` that are chains.
    D,
    /// Members of `D` whose pairs are crossed by no `D`-chain longer than `L`.
    LChain,
    /// As `LChain`, with the bound `K` in place of `L`.
    KChain,
    /// The single-color part of a `KChain` system, on the factor walls.
    Color,
    Singletons,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SystemParams {
    /// Ball radius per color.
    #[serde(rename = "K")]
    pub radius: Vec<u32>,
    /// Minimum centre distance for same-color balls, per color.
    pub spacing: Vec<u32>,
    /// Bound on crossing chains (`L` or `K`), if the system has one.
    pub bound: Option<u32>,
    pub m: usize,
    /// Wall pairs declared incompatible by hand.
    pub forbidden: Vec<(usize, usize)>,
    /// Let a wall use any of its defining balls, instead of the one with the
    /// smallest centre.
    pub any_ball: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Token {
    pub wall: usize,
    pub color: usize,
    /// Ball centre in the color's factor, or `None` for walls without a
    /// recorded ball.
    pub center: Option<usize>,
}

#[derive(Clone, Debug)]
pub struct ChainSystem {
    pub kind: SystemKind,
    pub params: SystemParams,
    walls: Arc<WallSet>,
    domain: FixedBitSet,
    tokens: Vec<Token>,
    wall_tokens: Vec<Vec<usize>>,
    tok_ok: Vec<FixedBitSet>,
    wall_ok: Vec<FixedBitSet>,
    require_chain: bool,
    /// Per-color factor wall sets and the wall → factor wall map; members
    /// must restrict to a chain in each factor.
    factor_chain: Option<(Vec<Arc<WallSet>>, Vec<usize>)>,
    pub budget: u64,
}

/// Everything a system needs beyond its pairwise rule.
pub struct SystemSpec<'a> {
    pub kind: SystemKind,
    pub params: SystemParams,
    pub walls: Arc<WallSet>,
    pub domain: FixedBitSet,
    /// Color of each wall.
    pub color: Vec<usize>,
    /// Factor metric per color, for ball-centre distances.
    pub factor_metrics: Vec<&'a DistTable>,
    pub require_chain: bool,
    pub factor_chain: Option<(Vec<Arc<WallSet>>, Vec<usize>)>,
}

impl ChainSystem {
    /// `pair_ok(a, b)` is the wall-level pairwise rule; crossing and the
    /// ball spacing are added here.
    pub fn build(
        spec: SystemSpec<'_>,
        pair_ok: impl Fn(usize, usize) -> bool + Sync,
    ) -> ChainSystem {
        let SystemSpec {
            kind,
            params,
            walls,
            domain,
            color,
            factor_metrics,
            require_chain,
            factor_chain,
        } = spec;
        let n = walls.len();
        let mut tokens = Vec::new();
        let mut wall_tokens = vec![Vec::new(); n];
        for w in domain.ones() {
            let mut centers: Vec<Option<usize>> = walls
                .wall(w)
                .origins
                .iter()
                .filter(|p| p.color == color[w])
                .map(|p| Some(p.center))
                .collect();
            centers.sort();
            centers.dedup();
            if !params.any_ball {
                centers.truncate(1);
            }
            if centers.is_empty() {
                centers.push(None);
            }
            for c in centers {
                wall_tokens[w].push(tokens.len());
                tokens.push(Token {
                    wall: w,
                    color: color[w],
                    center: c,
                });
            }
        }
        let singletons = kind == SystemKind::Singletons;
        let forbidden: std::collections::HashSet<(usize, usize)> = params
            .forbidden
            .iter()
            .map(|&(a, b)| (a.min(b), a.max(b)))
            .collect();
        let wall_rule = |a: usize, b: usize| {
            a != b
                && !singletons
                && domain.contains(a)
                && domain.contains(b)
                && !(require_chain && walls.crosses(a, b))
                && !forbidden.contains(&(a.min(b), a.max(b)))
                && pair_ok(a, b)
        };
        use rayon::prelude::*;
        let wall_ok: Vec<FixedBitSet> = (0..n)
            .into_par_iter()
            .map(|a| {
                let mut row = FixedBitSet::with_capacity(n);
                for b in 0..n {
                    if wall_rule(a, b) {
                        row.insert(b);
                    }
                }
                row
            })
            .collect();
        let spacing = &params.spacing;
        let t = tokens.len();
        let tok_ok: Vec<FixedBitSet> = (0..t)
            .into_par_iter()
            .map(|i| {
                let mut row = FixedBitSet::with_capacity(t);
                let a = tokens[i];
                for (j, b) in tokens.iter().enumerate() {
                    if !wall_ok[a.wall].contains(b.wall) {
                        continue;
                    }
                    let spaced = a.color != b.color
                        || match (a.center, b.center) {
                            (Some(p), Some(q)) => {
                                factor_metrics[a.color].dist(p, q) >= spacing[a.color]
                            }
                            _ => false,
                        };
                    if spaced {
                        row.insert(j);
                    }
                }
                row
            })
            .collect();
        ChainSystem {
            kind,
            params,
            walls,
            domain,
            tokens,
            wall_tokens,
            tok_ok,
            wall_ok,
            require_chain,
            factor_chain,
            budget: 50_000_000,
        }
    }

    pub fn walls(&self) -> &Arc<WallSet> {
        &self.walls
    }

    pub fn domain(&self) -> &FixedBitSet {
        &self.domain
    }

    pub fn tokens(&self) -> &[Token] {
        &self.tokens
    }

    pub fn requires_chain(&self) -> bool {
        self.require_chain
    }

    /// Wall-level pairwise rule (one half of membership for two walls).
    pub fn pair_ok(&self, a: usize, b: usize) -> bool {
        self.wall_ok[a].contains(b)
    }

    pub fn token_ok(&self, i: usize, j: usize) -> bool {
        self.tok_ok[i].contains(j)
    }

    /// Exact membership test.
    pub fn contains(&self, set: &[usize]) -> bool {
        if set.is_empty() {
            return true;
        }
        if set
            .iter()
            .any(|&w| w >= self.walls.len() || !self.domain.contains(w))
        {
            return false;
        }
        if set.len() == 1 {
            return true;
        }
        for (i, &a) in set.iter().enumerate() {
            for &b in &set[i + 1..] {
                if !self.pair_ok(a, b) {
                    return false;
                }
            }
        }
        if self.require_chain && !self.walls.is_chain_set(set) {
            return false;
        }
        self.contains_chain(set)
    }

    /// Membership for a set already known to be a chain.
    pub fn contains_chain(&self, set: &[usize]) -> bool {
        if set.len() <= 1 {
            return set
                .iter()
                .all(|&w| w < self.walls.len() && self.domain.contains(w));
        }
        for (i, &a) in set.iter().enumerate() {
            for &b in &set[i + 1..] {
                if !self.pair_ok(a, b) {
                    return false;
                }
            }
        }
        if let Some((factors, fwall)) = &self.factor_chain {
            for (c, fs) in factors.iter().enumerate() {
                let part: Vec<usize> = set
                    .iter()
                    .filter(|&&w| self.tokens[self.wall_tokens[w][0]].color == c)
                    .map(|&w| fwall[w])
                    .collect();
                if !fs.is_chain_set(&part) {
                    return false;
                }
            }
        }
        self.assign_tokens(set).is_some()
    }

    /// One compatible token per wall, if any.
    pub fn assign_tokens(&self, set: &[usize]) -> Option<Vec<usize>> {
        let mut chosen = Vec::with_capacity(set.len());
        fn go(sys: &ChainSystem, set: &[usize], chosen: &mut Vec<usize>) -> bool {
            let i = chosen.len();
            if i == set.len() {
                return true;
            }
            for &t in &sys.wall_tokens[set[i]] {
                if chosen.iter().all(|&c| sys.tok_ok[c].contains(t)) {
                    chosen.push(t);
                    if go(sys, set, chosen) {
                        return true;
                    }
                    chosen.pop();
                }
            }
            false
        }
        if go(self, set, &mut chosen) {
            Some(chosen)
        } else {
            None
        }
    }

    /// Longest member all of whose walls separate `x` from `y`.
    pub fn dist(&self, x: &Ultrafilter, y: &Ultrafilter) -> Longest {
        let mut sep: Vec<usize> = x
            .difference(y)
            .ones()
            .filter(|&w| self.domain.contains(w))
            .collect();
        if sep.is_empty() {
            return Longest {
                nodes: vec![],
                complete: true,
            };
        }
        if self.kind == SystemKind::Singletons {
            return Longest {
                nodes: vec![sep[0]],
                complete: true,
            };
        }
        let size: Vec<usize> = sep
            .iter()
            .map(|&w| self.walls.side_size(w, x.is_plus(w)))
            .collect();
        let mut order: Vec<usize> = (0..sep.len()).collect();
        order.sort_by_key(|&i| (size[i], sep[i]));
        sep = order.iter().map(|&i| sep[i]).collect();
        let nodes: Vec<usize> = sep
            .iter()
            .flat_map(|&w| self.wall_tokens[w].iter().copied())
            .collect();
        let succ = forward_graph(nodes.len(), |i, j| self.tok_ok[nodes[i]].contains(nodes[j]));
        let pick = self.search(&succ, nodes.len());
        let mut walls: Vec<usize> = pick
            .nodes
            .iter()
            .map(|&i| self.tokens[nodes[i]].wall)
            .collect();
        walls.sort_unstable();
        Longest {
            nodes: walls,
            complete: pick.complete,
        }
    }

    pub fn dist_points(&self, s: usize, t: usize) -> Longest {
        let x = Ultrafilter::point(&self.walls, s).expect("ground point");
        let y = Ultrafilter::point(&self.walls, t).expect("ground point");
        self.dist(&x, &y)
    }

    /// Longest member contained in `set`.
    pub fn longest_among(&self, set: &[usize]) -> Longest {
        let set: Vec<usize> = set
            .iter()
            .copied()
            .filter(|&w| self.domain.contains(w))
            .collect();
        if set.is_empty() {
            return Longest {
                nodes: vec![],
                complete: true,
            };
        }
        if self.kind == SystemKind::Singletons {
            return Longest {
                nodes: vec![set[0]],
                complete: true,
            };
        }
        assert!(
            self.factor_chain.is_none(),
            "arbitrary-set search needs the chain condition in the ground set"
        );
        if !self.require_chain {
            let nodes: Vec<usize> = set
                .iter()
                .flat_map(|&w| self.wall_tokens[w].iter().copied())
                .collect();
            let succ = forward_graph(nodes.len(), |i, j| self.tok_ok[nodes[i]].contains(nodes[j]));
            let pick = self.search(&succ, nodes.len());
            let mut walls: Vec<usize> = pick
                .nodes
                .iter()
                .map(|&i| self.tokens[nodes[i]].wall)
                .collect();
            walls.sort_unstable();
            return Longest {
                nodes: walls,
                complete: pick.complete,
            };
        }
        // Oriented nodes ordered by halfspace size; an edge means nested
        // halfspaces, so cliques are exactly the member chains.
        let mut nodes: Vec<(usize, usize, bool, usize)> = Vec::new();
        for &w in &set {
            for s in [false, true] {
                for &t in &self.wall_tokens[w] {
                    nodes.push((self.walls.side_size(w, s), w, s, t));
                }
            }
        }
        nodes.sort_unstable();
        let succ = forward_graph(nodes.len(), |i, j| {
            let (_, a, sa, ta) = nodes[i];
            let (_, b, sb, tb) = nodes[j];
            self.tok_ok[ta].contains(tb) && self.walls.side_subset(a, sa, b, sb)
        });
        let pick = self.search(&succ, nodes.len());
        let mut walls: Vec<usize> = pick.nodes.iter().map(|&i| nodes[i].1).collect();
        walls.sort_unstable();
        Longest {
            nodes: walls,
            complete: pick.complete,
        }
    }

    fn search(&self, succ: &[FixedBitSet], n: usize) -> Longest {
        let mut all = FixedBitSet::with_capacity(n);
        all.insert_range(..);
        longest_clique(succ, &all, self.budget)
    }

    /// Distance table on a list of ultrafilters, and whether every search
    /// completed.
    pub fn dist_table(&self, points: &[Ultrafilter]) -> (DistTable, bool) {
        use rayon::prelude::*;
        let n = points.len();
        let rows: Vec<(Vec<u32>, bool)> = (0..n)
            .into_par_iter()
            .map(|i| {
                let mut ok = true;
                let row = (0..n)
                    .map(|j| {
                        if j <= i {
                            return 0;
                        }
                        let l = self.dist(&points[i], &points[j]);
                        ok &= l.complete;
                        l.nodes.len() as u32
                    })
                    .collect();
                (row, ok)
            })
            .collect();
        let mut t = DistTable::new(n);
        let mut complete = true;
        for (i, (row, ok)) in rows.into_iter().enumerate() {
            complete &= ok;
            for (j, &d) in row.iter().enumerate().skip(i + 1) {
                t.set(i, j, d);
            }
        }
        (t, complete)
    }

    /// Same system with additional forbidden wall pairs.
    pub fn with_forbidden(&self, pairs: &[(usize, usize)]) -> ChainSystem {
        let mut s = self.clone();
        for &(a, b) in pairs {
            s.wall_ok[a].set(b, false);
            s.wall_ok[b].set(a, false);
            s.params.forbidden.push((a.min(b), a.max(b)));
        }
        let t = s.tokens.len();
        for i in 0..t {
            for j in 0..t {
                if !s.wall_ok[s.tokens[i].wall].contains(s.tokens[j].wall) {
                    s.tok_ok[i].set(j, false);
                }
            }
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wall::{bitset_from_iter, Origin, Variant, Wall};

    /// Path cuts with one defining ball each, at the listed centres.
    fn cut_system(
        n: usize,
        cuts: &[(usize, usize)],
        spacing: u32,
        metric: &DistTable,
    ) -> ChainSystem {
        let walls = cuts
            .iter()
            .map(|&(j, c)| {
                let p = Origin {
                    color: 0,
                    center: c,
                    radius: 1,
                    component: 0,
                    variant: Variant::Component,
                };
                Wall::from_plus(0, bitset_from_iter(n, j + 1..n), vec![p]).unwrap()
            })
            .collect();
        let walls = Arc::new(WallSet::new(n, walls));
        let mut domain = FixedBitSet::with_capacity(walls.len());
        domain.insert_range(..);
        let spec = SystemSpec {
            kind: SystemKind::Disparate,
            params: SystemParams {
                radius: vec![1],
                spacing: vec![spacing],
                bound: None,
                m: 1,
                forbidden: vec![],
                any_ball: true,
            },
            color: vec![0; walls.len()],
            walls,
            domain,
            factor_metrics: vec![metric],
            require_chain: true,
            factor_chain: None,
        };
        ChainSystem::build(spec, |_, _| true)
    }

    fn path_metric(n: usize) -> DistTable {
        DistTable::from_fn(n, |a, b| a.abs_diff(b) as u32)
    }

    #[test]
    fn membership_and_distance() {
        let m = path_metric(30);
        let sys = cut_system(30, &[(3, 4), (8, 9), (15, 14), (26, 25)], 10, &m);
        assert!(sys.contains(&[]));
        assert!(sys.contains(&[1]));
        assert!(sys.contains(&[0, 2, 3]));
        assert!(!sys.contains(&[0, 1]));
        let d = sys.dist_points(0, 29);
        assert_eq!(d.nodes.len(), 3);
        assert!(sys.contains(&d.nodes));
        assert_eq!(sys.dist_points(5, 5).nodes.len(), 0);
        assert_eq!(sys.longest_among(&[0, 1, 2, 3]).nodes.len(), 3);
    }

    #[test]
    fn forbidden_pairs() {
        let m = path_metric(30);
        let sys = cut_system(30, &[(3, 4), (15, 14), (26, 25)], 10, &m).with_forbidden(&[(0, 2)]);
        assert!(!sys.contains(&[0, 2]));
        assert!(sys.contains(&[0, 1]));
        assert_eq!(sys.dist_points(0, 29).nodes.len(), 2);
    }
}
