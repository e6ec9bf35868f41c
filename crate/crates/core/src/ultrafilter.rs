//! Orientations of a wall set: ultrafilters, majority-vote medians and
//! consistency repair.

use fixedbitset::FixedBitSet;

use crate::error::{Error, Result};
use crate::wall::WallSet;

/// One chosen halfspace per wall; bit set means the plus side.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Ultrafilter(FixedBitSet);

impl Ultrafilter {
    pub fn from_bits(bits: FixedBitSet) -> Self {
        Ultrafilter(bits)
    }

    pub fn bits(&self) -> &FixedBitSet {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.len() == 0
    }

    /// The principal ultrafilter of a ground point.
    pub fn point(walls: &WallSet, s: usize) -> Result<Ultrafilter> {
        if s >= walls.ground() {
            return Err(Error::NotInGround(s));
        }
        let mut b = FixedBitSet::with_capacity(walls.len());
        for (i, w) in walls.walls().iter().enumerate() {
            b.set(i, w.is_plus(s));
        }
        Ok(Ultrafilter(b))
    }

    pub fn is_plus(&self, w: usize) -> bool {
        self.0.contains(w)
    }

    pub fn set(&mut self, w: usize, plus: bool) {
        self.0.set(w, plus)
    }

    pub fn flip(&mut self, w: usize) {
        self.0.toggle(w)
    }

    pub fn separates(&self, other: &Ultrafilter, w: usize) -> bool {
        self.is_plus(w) != other.is_plus(w)
    }

    /// Walls oriented differently by the two.
    pub fn difference(&self, other: &Ultrafilter) -> FixedBitSet {
        let mut d = self.0.clone();
        d.symmetric_difference_with(&other.0);
        d
    }

    pub fn separating(&self, other: &Ultrafilter) -> Vec<usize> {
        self.difference(other).ones().collect()
    }

    /// Per-wall majority.
    pub fn median(a: &Ultrafilter, b: &Ultrafilter, c: &Ultrafilter) -> Ultrafilter {
        let blocks =
            a.0.as_slice()
                .iter()
                .zip(b.0.as_slice())
                .zip(c.0.as_slice())
                .map(|((&x, &y), &z)| (x & y) | (x & z) | (y & z));
        Ultrafilter(FixedBitSet::with_capacity_and_blocks(a.0.len(), blocks))
    }

    /// Agrees with `self` on every wall in `mask`.
    pub fn agrees_on(&self, other: &Ultrafilter, mask: &FixedBitSet) -> bool {
        self.0
            .as_slice()
            .iter()
            .zip(other.0.as_slice())
            .zip(mask.as_slice())
            .all(|((&x, &y), &m)| (x ^ y) & m == 0)
    }

    /// Walls `b` whose chosen side is disjoint from `a`'s chosen side.
    fn clashes(&self, walls: &WallSet, a: usize) -> FixedBitSet {
        let sa = self.is_plus(a);
        // b clashes iff the chosen side of b misses a's chosen side.
        let mut ok = walls.meet_row(a, sa, true).clone();
        ok.intersect_with(&self.0);
        let mut neg = walls.meet_row(a, sa, false).clone();
        neg.difference_with(&self.0);
        ok.union_with(&neg);
        ok.toggle_range(..);
        ok
    }

    /// First pair of chosen halfspaces with empty intersection.
    pub fn first_violation(&self, walls: &WallSet) -> Option<(usize, usize)> {
        (0..walls.len()).find_map(|a| {
            self.clashes(walls, a)
                .minimum()
                .map(|b| (a.min(b), a.max(b)))
        })
    }

    /// Every two chosen halfspaces meet in the ground set. For walls on a
    /// set this is the same as monotonicity under inclusion.
    pub fn is_consistent(&self, walls: &WallSet) -> bool {
        self.first_violation(walls).is_none()
    }

    /// `+`/`-` string, one character per wall.
    pub fn to_signs(&self) -> String {
        (0..self.len())
            .map(|w| if self.is_plus(w) { '+' } else { '-' })
            .collect()
    }

    /// Number of walls where the minimal flip repair had to intervene.
    pub fn repair(&mut self, walls: &WallSet, fixed: &FixedBitSet) -> Result<usize> {
        let mut repairs = 0;
        let limit = walls.len() * walls.len() + 1;
        while let Some((a, b)) = self.first_violation(walls) {
            let target = match (fixed.contains(a), fixed.contains(b)) {
                (true, true) => {
                    return Err(Error::Invalid(format!(
                        "walls {a} and {b} are fixed to disjoint halfspaces"
                    )))
                }
                (true, false) => b,
                (false, _) => {
                    if fixed.contains(b) {
                        a
                    } else {
                        b
                    }
                }
            };
            self.flip(target);
            repairs += 1;
            if repairs > limit {
                return Err(Error::Invalid("orientation repair did not converge".into()));
            }
        }
        Ok(repairs)
    }
}

/// Every ultrafilter of the wall set, by backtracking in wall order.
/// `None` if more than `cap` exist.
pub fn enumerate_ultrafilters(walls: &WallSet, cap: usize) -> Option<Vec<Ultrafilter>> {
    let n = walls.len();
    let mut out = Vec::new();
    let mut cur = FixedBitSet::with_capacity(n);
    fn go(
        walls: &WallSet,
        i: usize,
        cur: &mut FixedBitSet,
        out: &mut Vec<Ultrafilter>,
        cap: usize,
    ) -> bool {
        if i == walls.len() {
            if out.len() == cap {
                return false;
            }
            out.push(Ultrafilter(cur.clone()));
            return true;
        }
        for s in [false, true] {
            cur.set(i, s);
            let ok = (0..i).all(|j| walls.meets(i, s, j, cur.contains(j)));
            if ok && !go(walls, i + 1, cur, out, cap) {
                return false;
            }
        }
        cur.set(i, false);
        true
    }
    if go(walls, 0, &mut cur, &mut out, cap) {
        Some(out)
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wall::{bitset_from_iter, Wall};

    fn path_cuts(n: usize, cuts: &[usize]) -> WallSet {
        let walls = cuts
            .iter()
            .map(|&j| Wall::from_plus(0, bitset_from_iter(n, j + 1..n), vec![]).unwrap())
            .collect();
        WallSet::new(n, walls)
    }

    #[test]
    fn points() {
        let ws = path_cuts(11, &[4]);
        let u = Ultrafilter::point(&ws, 2).unwrap();
        assert!(!u.is_plus(0));
        let all_plus = path_cuts(11, &[0, 1, 2]);
        let u = Ultrafilter::point(&all_plus, 10).unwrap();
        assert_eq!(u.to_signs(), "+++");
        assert!(Ultrafilter::point(&ws, 11).is_err());
        let nested = path_cuts(11, &[2, 6]);
        for s in 0..11 {
            assert!(Ultrafilter::point(&nested, s)
                .unwrap()
                .is_consistent(&nested));
        }
    }

    #[test]
    fn inconsistent_detected_and_repaired() {
        let ws = path_cuts(11, &[2, 6]);
        // plus side of cut 2 but minus side of cut 6 ... fine; the reverse is not.
        let mut u = Ultrafilter::from_bits(bitset_from_iter(2, [1]));
        assert_eq!(u.first_violation(&ws), Some((0, 1)));
        let fixed = bitset_from_iter(2, [1]);
        assert_eq!(u.repair(&ws, &fixed).unwrap(), 1);
        assert!(u.is_plus(0) && u.is_plus(1));
    }

    #[test]
    fn path_ultrafilters_are_points() {
        let ws = path_cuts(8, &[0, 1, 2, 3, 4, 5, 6]);
        let all = enumerate_ultrafilters(&ws, 100).unwrap();
        assert_eq!(all.len(), 8);
        assert!(enumerate_ultrafilters(&ws, 3).is_none());
    }

    #[test]
    fn median_absorbs() {
        let ws = path_cuts(11, &[1, 4, 7]);
        let a = Ultrafilter::point(&ws, 0).unwrap();
        let b = Ultrafilter::point(&ws, 10).unwrap();
        let c = Ultrafilter::point(&ws, 5).unwrap();
        assert_eq!(Ultrafilter::median(&a, &a, &b), a);
        assert_eq!(Ultrafilter::median(&a, &b, &c), c);
        assert_eq!(Ultrafilter::median(&b, &c, &a), c);
    }
}
