//! Walls: bipartitions of a finite ground set, with the quarterspace data
//! every other module reads.

use fixedbitset::FixedBitSet;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which of the two bipartitions a ball-complement component defines.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Variant {
    /// `(C, rest)`
    #[serde(rename = "C")]
    Component,
    /// `(C ∪ B, rest)`
    #[serde(rename = "C∪B")]
    WithBall,
}

/// One way of defining a wall from a ball.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Origin {
    pub color: usize,
    pub center: usize,
    pub radius: u32,
    pub component: usize,
    pub variant: Variant,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Wall {
    pub id: usize,
    pub minus: FixedBitSet,
    pub plus: FixedBitSet,
    pub origins: Vec<Origin>,
}

impl Wall {
    /// A wall with the given plus side; the minus side is its complement.
    pub fn from_plus(id: usize, plus: FixedBitSet, origins: Vec<Origin>) -> Result<Wall> {
        let mut minus = plus.clone();
        minus.toggle_range(..);
        if plus.is_clear() || minus.is_clear() {
            return Err(Error::Invalid(format!("wall {id} has an empty side")));
        }
        Ok(Wall {
            id,
            minus,
            plus,
            origins,
        })
    }

    /// Orient so that the minus side holds the smallest ground point.
    pub fn canonical(mut self) -> Wall {
        if !self.minus.contains(0) {
            std::mem::swap(&mut self.minus, &mut self.plus);
        }
        self
    }

    pub fn side(&self, plus: bool) -> &FixedBitSet {
        if plus {
            &self.plus
        } else {
            &self.minus
        }
    }

    pub fn ground_len(&self) -> usize {
        self.plus.len()
    }

    /// Plus side membership of a ground point.
    pub fn is_plus(&self, s: usize) -> bool {
        self.plus.contains(s)
    }
}

/// JSON form: `{id, minus, plus, origins}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WallJson {
    pub id: usize,
    pub minus: Vec<usize>,
    pub plus: Vec<usize>,
    pub origins: Vec<Origin>,
}

impl From<&Wall> for WallJson {
    fn from(w: &Wall) -> Self {
        WallJson {
            id: w.id,
            minus: w.minus.ones().collect(),
            plus: w.plus.ones().collect(),
            origins: w.origins.clone(),
        }
    }
}

impl WallJson {
    pub fn to_wall(&self, ground: usize) -> Result<Wall> {
        let mut plus = FixedBitSet::with_capacity(ground);
        for &p in &self.plus {
            if p >= ground {
                return Err(Error::NotInGround(p));
            }
            plus.insert(p);
        }
        let w = Wall::from_plus(self.id, plus, self.origins.clone())?;
        let mut listed = FixedBitSet::with_capacity(ground);
        for &p in &self.minus {
            if p >= ground {
                return Err(Error::NotInGround(p));
            }
            listed.insert(p);
        }
        if listed != w.minus || self.minus.len() + self.plus.len() != ground {
            return Err(Error::Invalid(format!(
                "wall {} is not a bipartition",
                self.id
            )));
        }
        Ok(w)
    }
}

#[inline]
fn q(sa: bool, sb: bool) -> usize {
    (sa as usize) << 1 | sb as usize
}

/// A finite family of walls on a common ground set, with the quarterspace
/// matrix precomputed.
#[derive(Clone, Debug)]
pub struct WallSet {
    ground: usize,
    walls: Vec<Wall>,
    /// `meet[a][q(σ,τ)]` holds the walls `b` with `a^σ ∩ b^τ ≠ ∅`.
    meet: Vec<[FixedBitSet; 4]>,
    cross: Vec<FixedBitSet>,
}

impl WallSet {
    /// Walls are renumbered `0..len` in the given order.
    pub fn new(ground: usize, mut walls: Vec<Wall>) -> WallSet {
        for (i, w) in walls.iter_mut().enumerate() {
            w.id = i;
            debug_assert_eq!(w.ground_len(), ground);
        }
        let n = walls.len();
        use rayon::prelude::*;
        let meet: Vec<[FixedBitSet; 4]> = (0..n)
            .into_par_iter()
            .map(|a| {
                let mut rows: [FixedBitSet; 4] =
                    std::array::from_fn(|_| FixedBitSet::with_capacity(n));
                for (b, wb) in walls.iter().enumerate() {
                    for sa in [false, true] {
                        for sb in [false, true] {
                            if !walls[a].side(sa).is_disjoint(wb.side(sb)) {
                                rows[q(sa, sb)].insert(b);
                            }
                        }
                    }
                }
                rows
            })
            .collect();
        let cross = (0..n)
            .map(|a| {
                let mut c = meet[a][0].clone();
                for r in &meet[a][1..] {
                    c.intersect_with(r);
                }
                c.remove(a);
                c
            })
            .collect();
        WallSet {
            ground,
            walls,
            meet,
            cross,
        }
    }

    pub fn ground(&self) -> usize {
        self.ground
    }

    pub fn len(&self) -> usize {
        self.walls.len()
    }

    pub fn is_empty(&self) -> bool {
        self.walls.is_empty()
    }

    pub fn walls(&self) -> &[Wall] {
        &self.walls
    }

    pub fn wall(&self, a: usize) -> &Wall {
        &self.walls[a]
    }

    /// `a^σ ∩ b^τ ≠ ∅`.
    pub fn meets(&self, a: usize, sa: bool, b: usize, sb: bool) -> bool {
        self.meet[a][q(sa, sb)].contains(b)
    }

    /// Walls `b` with `a^σ ∩ b^τ ≠ ∅`.
    pub fn meet_row(&self, a: usize, sa: bool, sb: bool) -> &FixedBitSet {
        &self.meet[a][q(sa, sb)]
    }

    /// All four quarterspaces are nonempty.
    pub fn crosses(&self, a: usize, b: usize) -> bool {
        self.cross[a].contains(b)
    }

    pub fn crossing_row(&self, a: usize) -> &FixedBitSet {
        &self.cross[a]
    }

    /// `a^σ ⊆ b^τ`.
    pub fn side_subset(&self, a: usize, sa: bool, b: usize, sb: bool) -> bool {
        !self.meets(a, sa, b, !sb)
    }

    pub fn side_size(&self, a: usize, s: bool) -> usize {
        self.walls[a].side(s).count_ones(..)
    }

    /// Wall `h` separates walls `a` and `b`: neither crosses `h` and they
    /// have halfspaces on opposite sides of it.
    pub fn separates_walls(&self, h: usize, a: usize, b: usize) -> bool {
        if h == a || h == b || a == b || self.crosses(h, a) || self.crosses(h, b) {
            return false;
        }
        for t in [false, true] {
            let a_in = [false, true]
                .iter()
                .any(|&sa| self.side_subset(a, sa, h, t));
            let b_in = [false, true]
                .iter()
                .any(|&sb| self.side_subset(b, sb, h, !t));
            if a_in && b_in {
                return true;
            }
        }
        false
    }

    /// Each interior wall separates its neighbours.
    pub fn is_chain_seq(&self, seq: &[usize]) -> bool {
        if seq.len() == 2 {
            return seq[0] != seq[1] && !self.crosses(seq[0], seq[1]);
        }
        seq.windows(3)
            .all(|w| self.separates_walls(w[1], w[0], w[2]))
    }

    /// Some ordering of the set is a chain: the walls are pairwise
    /// non-crossing and a single pair of ground points is separated by all
    /// of them.
    pub fn is_chain_set(&self, set: &[usize]) -> bool {
        if set.len() <= 1 {
            return true;
        }
        for (i, &a) in set.iter().enumerate() {
            for &b in &set[i + 1..] {
                if a == b || self.crosses(a, b) {
                    return false;
                }
            }
        }
        self.common_separated_pair(set).is_some()
    }

    /// Smallest `(s, t)` such that every wall of `set` separates `s` from `t`.
    pub fn common_separated_pair(&self, set: &[usize]) -> Option<(usize, usize)> {
        for s in 0..self.ground {
            let mut far = FixedBitSet::with_capacity(self.ground);
            far.insert_range(..);
            for &w in set {
                let wall = &self.walls[w];
                far.intersect_with(wall.side(!wall.is_plus(s)));
                if far.is_clear() {
                    break;
                }
            }
            if let Some(t) = far.minimum() {
                return Some((s, t));
            }
        }
        None
    }

    /// Walls separating ground points `s` and `t`.
    pub fn separating(&self, s: usize, t: usize) -> Vec<usize> {
        (0..self.len())
            .filter(|&w| self.walls[w].is_plus(s) != self.walls[w].is_plus(t))
            .collect()
    }

    pub fn to_json(&self) -> Vec<WallJson> {
        self.walls.iter().map(WallJson::from).collect()
    }

    pub fn from_json(ground: usize, walls: &[WallJson]) -> Result<WallSet> {
        let walls = walls
            .iter()
            .map(|w| w.to_wall(ground))
            .collect::<Result<Vec<_>>>()?;
        Ok(WallSet::new(ground, walls))
    }
}

/// Merge walls with equal bipartitions, keeping the first occurrence's
/// position and the union of origins lists (sorted).
pub fn dedup_walls(walls: Vec<Wall>) -> Vec<Wall> {
    use std::collections::HashMap;
    let mut index: HashMap<FixedBitSet, usize> = HashMap::new();
    let mut out: Vec<Wall> = Vec::new();
    for w in walls {
        let w = w.canonical();
        match index.get(&w.minus) {
            Some(&i) => out[i].origins.extend(w.origins),
            None => {
                index.insert(w.minus.clone(), out.len());
                out.push(w);
            }
        }
    }
    for w in &mut out {
        w.origins.sort();
        w.origins.dedup();
    }
    out
}

/// Bitset over `0..n` from a boolean mask.
pub fn bitset_from_mask(mask: &[bool]) -> FixedBitSet {
    let mut b = FixedBitSet::with_capacity(mask.len());
    for (i, &m) in mask.iter().enumerate() {
        if m {
            b.insert(i);
        }
    }
    b
}

pub fn bitset_from_iter(n: usize, items: impl IntoIterator<Item = usize>) -> FixedBitSet {
    let mut b = FixedBitSet::with_capacity(n);
    for i in items {
        b.insert(i);
    }
    b
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cut(n: usize, j: usize) -> Wall {
        Wall::from_plus(0, bitset_from_iter(n, j + 1..n), vec![]).unwrap()
    }

    fn grid_wall(side: usize, axis: usize, j: usize) -> Wall {
        let plus = (0..side * side).filter(|&p| {
            if axis == 0 {
                p / side > j
            } else {
                p % side > j
            }
        });
        Wall::from_plus(0, bitset_from_iter(side * side, plus), vec![]).unwrap()
    }

    #[test]
    fn crossing() {
        let ws = WallSet::new(11, vec![cut(11, 4), cut(11, 4), cut(11, 7)]);
        assert!(!ws.crosses(0, 1));
        assert!(!ws.crosses(0, 0));
        assert!(!ws.crosses(0, 2));
        let grid = WallSet::new(16, vec![grid_wall(4, 0, 1), grid_wall(4, 1, 2)]);
        for (sa, sb) in [(false, false), (false, true), (true, false), (true, true)] {
            assert!(grid.meets(0, sa, 1, sb));
        }
        assert!(grid.crosses(0, 1));
    }

    #[test]
    fn chains() {
        let ws = WallSet::new(11, vec![cut(11, 1), cut(11, 4), cut(11, 7), cut(11, 9)]);
        assert!(ws.is_chain_seq(&[2]));
        assert!(ws.is_chain_seq(&[0, 1, 2, 3]));
        assert!(!ws.is_chain_seq(&[0, 2, 1]));
        assert!(ws.is_chain_set(&[2, 0, 3]));
        let grid = WallSet::new(
            16,
            vec![grid_wall(4, 0, 0), grid_wall(4, 1, 1), grid_wall(4, 0, 2)],
        );
        for order in [[0, 1, 2], [1, 0, 2], [0, 2, 1]] {
            assert!(!grid.is_chain_seq(&order));
        }
        assert!(!grid.is_chain_set(&[0, 1]));
        assert!(grid.is_chain_set(&[0, 2]));
    }

    #[test]
    fn star_is_not_a_chain() {
        // K_{1,3}: centre 0, leaves 1..=3, one wall per leaf.
        let leaf = |l: usize| Wall::from_plus(0, bitset_from_iter(4, [l]), vec![]).unwrap();
        let ws = WallSet::new(4, vec![leaf(1), leaf(2), leaf(3)]);
        assert!(ws.is_chain_set(&[0, 1]));
        assert!(!ws.is_chain_set(&[0, 1, 2]));
    }

    #[test]
    fn dedup_merges_origins() {
        let p = |c| Origin {
            color: 0,
            center: c,
            radius: 1,
            component: 0,
            variant: Variant::Component,
        };
        let a = Wall::from_plus(0, bitset_from_iter(5, [3, 4]), vec![p(4)]).unwrap();
        let b = Wall::from_plus(0, bitset_from_iter(5, [0, 1, 2]), vec![p(1)]).unwrap();
        let out = dedup_walls(vec![a, b]);
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].origins.len(), 2);
        assert!(out[0].minus.contains(0));
    }

    #[test]
    fn json_round_trip() {
        let ws = WallSet::new(11, vec![cut(11, 4), cut(11, 7)]);
        let back = WallSet::from_json(11, &ws.to_json()).unwrap();
        assert_eq!(back.walls(), ws.walls());
        let mut bad = ws.to_json();
        bad[0].minus.push(9);
        assert!(WallSet::from_json(11, &bad).is_err());
    }
}
