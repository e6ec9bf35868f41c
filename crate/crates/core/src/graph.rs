//! Finite connected graphs with their shortest-path metric.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::{DistTable, FiniteMetric};

/// A vertex name as it appears in instance files.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(untagged)]
pub enum VertexLabel {
    Int(i64),
    Str(String),
}

impl fmt::Display for VertexLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VertexLabel::Int(i) => write!(f, "{i}"),
            VertexLabel::Str(s) => f.write_str(s),
        }
    }
}

impl From<usize> for VertexLabel {
    fn from(v: usize) -> Self {
        VertexLabel::Int(v as i64)
    }
}

impl From<&str> for VertexLabel {
    fn from(v: &str) -> Self {
        VertexLabel::Str(v.to_owned())
    }
}

/// `{"vertices":[ids],"edges":[[id,id],...]}`
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphJson {
    pub vertices: Vec<VertexLabel>,
    pub edges: Vec<[VertexLabel; 2]>,
}

#[derive(Clone, Debug)]
pub struct MetricGraph {
    labels: Vec<VertexLabel>,
    adj: Vec<Vec<usize>>,
    dist: DistTable,
}

impl MetricGraph {
    /// Build from vertices `0..n` and an edge list. Rejects duplicate edges,
    /// self-loops and disconnected input.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let labels = (0..n).map(VertexLabel::from).collect();
        Self::with_labels(labels, edges)
    }

    pub fn with_labels(labels: Vec<VertexLabel>, edges: &[(usize, usize)]) -> Result<Self> {
        let n = labels.len();
        if n == 0 {
            return Err(Error::EmptyInstance);
        }
        let mut seen = BTreeSet::new();
        let mut adj = vec![Vec::new(); n];
        for &(a, b) in edges {
            if a >= n {
                return Err(Error::UnknownVertex(a.to_string()));
            }
            if b >= n {
                return Err(Error::UnknownVertex(b.to_string()));
            }
            if a == b {
                return Err(Error::SelfLoop(labels[a].to_string()));
            }
            if !seen.insert((a.min(b), a.max(b))) {
                return Err(Error::DuplicateEdge(
                    labels[a].to_string(),
                    labels[b].to_string(),
                ));
            }
            adj[a].push(b);
            adj[b].push(a);
        }
        for nb in &mut adj {
            nb.sort_unstable();
        }
        let dist = all_pairs(&adj).ok_or(Error::Disconnected)?;
        Ok(MetricGraph { labels, adj, dist })
    }

    pub fn from_json(g: &GraphJson) -> Result<Self> {
        let mut index = HashMap::new();
        for (i, v) in g.vertices.iter().enumerate() {
            if index.insert(v.clone(), i).is_some() {
                return Err(Error::DuplicateVertex(v.to_string()));
            }
        }
        let lookup = |v: &VertexLabel| {
            index
                .get(v)
                .copied()
                .ok_or_else(|| Error::UnknownVertex(v.to_string()))
        };
        let edges = g
            .edges
            .iter()
            .map(|[a, b]| Ok((lookup(a)?, lookup(b)?)))
            .collect::<Result<Vec<_>>>()?;
        Self::with_labels(g.vertices.clone(), &edges)
    }

    pub fn to_json(&self) -> GraphJson {
        GraphJson {
            vertices: self.labels.clone(),
            edges: self
                .edges()
                .map(|(a, b)| [self.labels[a].clone(), self.labels[b].clone()])
                .collect(),
        }
    }

    pub fn label(&self, v: usize) -> &VertexLabel {
        &self.labels[v]
    }

    pub fn labels(&self) -> &[VertexLabel] {
        &self.labels
    }

    pub fn index_of(&self, label: &VertexLabel) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn neighbours(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adj
            .iter()
            .enumerate()
            .flat_map(|(a, nb)| nb.iter().filter(move |&&b| a < b).map(move |&b| (a, b)))
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn is_tree(&self) -> bool {
        self.edge_count() + 1 == self.len()
    }

    pub fn dist_table(&self) -> &DistTable {
        &self.dist
    }

    /// Closed ball of radius `r`, as a membership vector.
    pub fn ball(&self, center: usize, r: u32) -> Vec<bool> {
        self.dist.row(center).iter().map(|&d| d <= r).collect()
    }

    /// Connected components of the subgraph induced on `keep`, each sorted,
    /// ordered by smallest vertex.
    pub fn components(&self, keep: &[bool]) -> Vec<Vec<usize>> {
        let n = self.len();
        let mut comp = vec![usize::MAX; n];
        let mut out = Vec::new();
        for s in 0..n {
            if !keep[s] || comp[s] != usize::MAX {
                continue;
            }
            let id = out.len();
            let mut members = vec![s];
            comp[s] = id;
            let mut q = VecDeque::from([s]);
            while let Some(u) = q.pop_front() {
                for &w in &self.adj[u] {
                    if keep[w] && comp[w] == usize::MAX {
                        comp[w] = id;
                        members.push(w);
                        q.push_back(w);
                    }
                }
            }
            members.sort_unstable();
            out.push(members);
        }
        out
    }

    /// One shortest path from `a` to `b`, preferring smaller vertex ids.
    pub fn geodesic(&self, a: usize, b: usize) -> Vec<usize> {
        let mut path = vec![a];
        let mut cur = a;
        while cur != b {
            let d = self.dist.dist(cur, b);
            cur = *self.adj[cur]
                .iter()
                .find(|&&w| self.dist.dist(w, b) + 1 == d)
                .expect("connected graph has a next step");
            path.push(cur);
        }
        path
    }
}

impl FiniteMetric for MetricGraph {
    fn len(&self) -> usize {
        self.labels.len()
    }
    fn dist(&self, a: usize, b: usize) -> u32 {
        self.dist.dist(a, b)
    }
}

fn all_pairs(adj: &[Vec<usize>]) -> Option<DistTable> {
    let n = adj.len();
    let mut t = DistTable::new(n);
    let mut d = vec![u32::MAX; n];
    let mut q = VecDeque::new();
    for s in 0..n {
        d.iter_mut().for_each(|x| *x = u32::MAX);
        d[s] = 0;
        q.push_back(s);
        while let Some(u) = q.pop_front() {
            for &w in &adj[u] {
                if d[w] == u32::MAX {
                    d[w] = d[u] + 1;
                    q.push_back(w);
                }
            }
        }
        for b in s + 1..n {
            if d[b] == u32::MAX {
                return None;
            }
            t.set(s, b, d[b]);
        }
    }
    Some(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn path_metric() {
        let g = MetricGraph::from_edges(4, &[(0, 1), (1, 2), (2, 3)]).unwrap();
        assert_eq!(g.dist(0, 3), 3);
        assert!(g.is_tree());
        assert_eq!(g.geodesic(3, 0), vec![3, 2, 1, 0]);
        assert!(g.dist_table().metric_violation().is_none());
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(
            MetricGraph::from_edges(0, &[]),
            Err(Error::EmptyInstance)
        ));
        assert!(matches!(
            MetricGraph::from_edges(3, &[(0, 1)]),
            Err(Error::Disconnected)
        ));
        assert!(matches!(
            MetricGraph::from_edges(2, &[(0, 1), (1, 0)]),
            Err(Error::DuplicateEdge(..))
        ));
    }

    #[test]
    fn json_with_string_ids() {
        let text = r#"{"vertices":["a","b",3],"edges":[["a","b"],["b",3]]}"#;
        let gj: GraphJson = serde_json::from_str(text).unwrap();
        let g = MetricGraph::from_json(&gj).unwrap();
        assert_eq!(g.dist(0, 2), 2);
        assert_eq!(g.label(2), &VertexLabel::Int(3));
        let back = serde_json::to_string(&g.to_json()).unwrap();
        assert_eq!(
            back,
            r#"{"vertices":["a","b",3],"edges":[["a","b"],["b",3]]}"#
        );
    }

    #[test]
    fn duplicate_edge_in_json() {
        let text = r#"{"vertices":[0,1],"edges":[[0,1],[1,0]]}"#;
        let gj: GraphJson = serde_json::from_str(text).unwrap();
        assert!(matches!(
            MetricGraph::from_json(&gj),
            Err(Error::DuplicateEdge(..))
        ));
    }
}
