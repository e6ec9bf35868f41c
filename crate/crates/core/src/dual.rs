//! Finite working model of a dual space: point ultrafilters closed under
//! medians and gates, with the system distance.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::sync::Arc;

use serde::Serialize;

use crate::error::Result;
use crate::gate::{halfspace_gate, GatedSet};
use crate::metric::{DistTable, FiniteMetric};
use crate::system::ChainSystem;
use crate::ultrafilter::Ultrafilter;
use crate::wall::WallSet;

#[derive(Clone, Copy, Debug, Serialize)]
pub struct ClosureConfig {
    pub cap: usize,
    /// Also close under gates to metric balls.
    pub ball_gates: bool,
    /// Maximum number of ball-gate rounds.
    pub rounds: usize,
}

impl Default for ClosureConfig {
    fn default() -> Self {
        ClosureConfig {
            cap: 2000,
            ball_gates: true,
            rounds: 4,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ClosureStats {
    pub cap: usize,
    pub capped: bool,
    pub ball_gates: bool,
    /// Ball-gate rounds run; `stable` is false if the last one still added points.
    pub rounds: usize,
    pub stable: bool,
    pub repairs: usize,
    /// Every distance search finished within budget.
    pub dist_complete: bool,
}

#[derive(Clone, Debug)]
pub struct DualModel {
    walls: Arc<WallSet>,
    pub points: Vec<Ultrafilter>,
    index: HashMap<Ultrafilter, usize>,
    /// Ground point → model index of its principal ultrafilter.
    pub ground_point: Vec<usize>,
    pub dist: DistTable,
    pub stats: ClosureStats,
}

impl DualModel {
    pub fn build(sys: &ChainSystem, cfg: ClosureConfig) -> Result<DualModel> {
        let walls = sys.walls().clone();
        let mut model = DualModel {
            points: Vec::new(),
            index: HashMap::new(),
            ground_point: Vec::new(),
            dist: DistTable::new(0),
            stats: ClosureStats {
                cap: cfg.cap,
                capped: false,
                ball_gates: cfg.ball_gates,
                rounds: 0,
                stable: true,
                repairs: 0,
                dist_complete: true,
            },
            walls,
        };
        for s in 0..model.walls.ground() {
            let u = Ultrafilter::point(&model.walls, s)?;
            let i = model.insert(u).unwrap_or(model.points.len() - 1);
            model.ground_point.push(i);
        }
        model.close(0, cfg.cap);
        model.extend_dist(sys, 0);
        if cfg.ball_gates {
            model.stats.stable = false;
            for _ in 0..cfg.rounds {
                model.stats.rounds += 1;
                let before = model.points.len();
                model.add_ball_gates(cfg.cap)?;
                if model.points.len() == before {
                    model.stats.stable = true;
                    break;
                }
                model.close(before, cfg.cap);
                let known = model.dist.len();
                model.extend_dist(sys, known);
            }
        }
        Ok(model)
    }

    /// Returns `Some(index)` if the point was already present.
    fn insert(&mut self, u: Ultrafilter) -> Option<usize> {
        if let Some(&i) = self.index.get(&u) {
            return Some(i);
        }
        self.index.insert(u.clone(), self.points.len());
        self.points.push(u);
        None
    }

    fn try_add(&mut self, u: Ultrafilter, cap: usize) -> bool {
        if self.index.contains_key(&u) {
            return true;
        }
        if self.points.len() >= cap {
            self.stats.capped = true;
            return false;
        }
        debug_assert!(u.is_consistent(&self.walls));
        self.insert(u);
        true
    }

    /// Close under medians and halfspace gates. Points before `from` are
    /// already closed among themselves.
    fn close(&mut self, from: usize, cap: usize) {
        let walls = self.walls.clone();
        let mut i = from;
        while i < self.points.len() {
            for j in 0..=i {
                for k in j..=i {
                    let m = Ultrafilter::median(&self.points[i], &self.points[j], &self.points[k]);
                    if !self.try_add(m, cap) {
                        return;
                    }
                }
            }
            for h in 0..walls.len() {
                for s in [false, true] {
                    let g = halfspace_gate(&walls, &self.points[i], h, s);
                    if !self.try_add(g, cap) {
                        return;
                    }
                }
            }
            i += 1;
        }
    }

    fn extend_dist(&mut self, sys: &ChainSystem, known: usize) {
        let n = self.points.len();
        if known == 0 {
            let (t, ok) = sys.dist_table(&self.points);
            self.dist = t;
            self.stats.dist_complete &= ok;
            return;
        }
        self.dist.grow(n);
        use rayon::prelude::*;
        let rows: Vec<(usize, Vec<u32>, bool)> = (known..n)
            .into_par_iter()
            .map(|i| {
                let mut ok = true;
                let row = (0..i)
                    .map(|j| {
                        let l = sys.dist(&self.points[i], &self.points[j]);
                        ok &= l.complete;
                        l.nodes.len() as u32
                    })
                    .collect();
                (i, row, ok)
            })
            .collect();
        for (i, row, ok) in rows {
            self.stats.dist_complete &= ok;
            for (j, d) in row.into_iter().enumerate() {
                self.dist.set(i, j, d);
            }
        }
    }

    fn add_ball_gates(&mut self, cap: usize) -> Result<()> {
        let n = self.points.len();
        let diam = self.dist.diameter();
        let mut fresh = Vec::new();
        let mut seen = std::collections::HashSet::new();
        for c in 0..n {
            for r in 0..=diam {
                let ball = self.ball(c, r);
                if !seen.insert(ball.clone()) {
                    continue;
                }
                let gs = self.ball_set(&ball)?;
                for x in 0..n {
                    // A raw gate that is already a model point needs no repair.
                    let mut g = gs.raw_gate(&self.points[x]);
                    if self.index.contains_key(&g) {
                        continue;
                    }
                    self.stats.repairs += g.repair(&self.walls, &gs.mask)?;
                    if !self.index.contains_key(&g) {
                        fresh.push(g);
                    }
                }
            }
        }
        fresh.sort();
        fresh.dedup();
        for g in fresh {
            if !self.try_add(g, cap) {
                break;
            }
        }
        Ok(())
    }

    pub fn walls(&self) -> &Arc<WallSet> {
        &self.walls
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn index_of(&self, u: &Ultrafilter) -> Option<usize> {
        self.index.get(u).copied()
    }

    /// Model index of the median, if the model contains it.
    pub fn median(&self, a: usize, b: usize, c: usize) -> Option<usize> {
        self.index_of(&Ultrafilter::median(
            &self.points[a],
            &self.points[b],
            &self.points[c],
        ))
    }

    pub fn ball(&self, c: usize, r: u32) -> Vec<usize> {
        (0..self.len())
            .filter(|&p| self.dist.dist(c, p) <= r)
            .collect()
    }

    pub fn ball_set(&self, members: &[usize]) -> Result<GatedSet> {
        GatedSet::hull(members.iter().map(|&p| &self.points[p]))
    }

    /// Whether the point is some ground point's principal ultrafilter.
    pub fn is_ground(&self, p: usize) -> bool {
        self.ground_point.contains(&p)
    }

    pub fn to_json(&self) -> DualJson {
        DualJson {
            walls: self.walls.len(),
            points: self.points.iter().map(Ultrafilter::to_signs).collect(),
            ground_point: self.ground_point.clone(),
            dist: self.dist.rows(),
            closure: self.stats.clone(),
        }
    }

    /// The unit-distance graph; ground points are labelled by `label`.
    pub fn to_dot(&self, name: &str, label: impl Fn(usize) -> String) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "graph {} {{", dot_id(name));
        let mut names: Vec<Vec<String>> = vec![Vec::new(); self.len()];
        for (s, &p) in self.ground_point.iter().enumerate() {
            names[p].push(label(s));
        }
        for (p, ns) in names.iter().enumerate() {
            let text = if ns.is_empty() {
                format!("p{p}")
            } else {
                ns.join(",")
            };
            let shape = if ns.is_empty() { "box" } else { "ellipse" };
            let _ = writeln!(out, "  p{p} [label={}, shape={shape}];", dot_id(&text));
        }
        for a in 0..self.len() {
            for b in a + 1..self.len() {
                if self.dist.dist(a, b) == 1 {
                    let _ = writeln!(out, "  p{a} -- p{b};");
                }
            }
        }
        out.push_str("}\n");
        out
    }
}

/// Quoted DOT identifier.
pub fn dot_id(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

#[derive(Clone, Debug, Serialize)]
pub struct DualJson {
    pub walls: usize,
    /// Orientation map per point: character `i` is the chosen side of wall `i`.
    pub points: Vec<String>,
    pub ground_point: Vec<usize>,
    pub dist: Vec<Vec<u32>>,
    pub closure: ClosureStats,
}
