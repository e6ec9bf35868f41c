//! Gated sets given by a partial orientation, and their gate maps.

use fixedbitset::FixedBitSet;

use crate::error::{Error, Result};
use crate::ultrafilter::Ultrafilter;
use crate::wall::WallSet;

/// The ultrafilters that agree with `orient` on the walls of `mask`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GatedSet {
    pub mask: FixedBitSet,
    pub orient: FixedBitSet,
}

impl GatedSet {
    /// A filter on `mask`; fails if two of its halfspaces are disjoint.
    pub fn new(walls: &WallSet, mask: FixedBitSet, mut orient: FixedBitSet) -> Result<GatedSet> {
        orient.intersect_with(&mask);
        for a in mask.ones() {
            for b in mask.ones() {
                if b > a && !walls.meets(a, orient.contains(a), b, orient.contains(b)) {
                    return Err(Error::EmptyGatedSet);
                }
            }
        }
        Ok(GatedSet { mask, orient })
    }

    /// The halfspace `h^σ`.
    pub fn halfspace(walls: &WallSet, h: usize, plus: bool) -> GatedSet {
        let mut mask = FixedBitSet::with_capacity(walls.len());
        mask.insert(h);
        let mut orient = FixedBitSet::with_capacity(walls.len());
        orient.set(h, plus);
        GatedSet { mask, orient }
    }

    /// The smallest halfspace intersection containing the given points:
    /// the orientations they all share.
    pub fn hull<'a>(points: impl IntoIterator<Item = &'a Ultrafilter>) -> Result<GatedSet> {
        let mut it = points.into_iter();
        let first = it.next().ok_or(Error::EmptyGatedSet)?;
        let n = first.len();
        let mut mask = FixedBitSet::with_capacity(n);
        mask.insert_range(..);
        for p in it {
            mask.difference_with(&first.difference(p));
        }
        let mut orient = first.bits().clone();
        orient.intersect_with(&mask);
        Ok(GatedSet { mask, orient })
    }

    pub fn contains(&self, u: &Ultrafilter) -> bool {
        let o = Ultrafilter::from_bits(self.orient.clone());
        u.agrees_on(&o, &self.mask)
    }

    /// `ψ` on the mask, `x` elsewhere, then repaired to an ultrafilter.
    /// Returns the gate and the number of repair flips.
    pub fn gate(&self, walls: &WallSet, x: &Ultrafilter) -> Result<(Ultrafilter, usize)> {
        let mut u = self.raw_gate(x);
        let repairs = u.repair(walls, &self.mask)?;
        Ok((u, repairs))
    }

    /// `ψ` on the mask and `x` elsewhere, before repair.
    pub fn raw_gate(&self, x: &Ultrafilter) -> Ultrafilter {
        let mut bits = x.bits().clone();
        bits.difference_with(&self.mask);
        bits.union_with(&self.orient);
        Ultrafilter::from_bits(bits)
    }
}

/// Gate onto the halfspace `h^σ`: flip exactly the walls whose `x`-side
/// misses `h^σ`. The result is always consistent.
pub fn halfspace_gate(walls: &WallSet, x: &Ultrafilter, h: usize, plus: bool) -> Ultrafilter {
    // Walls b whose chosen side meets h^σ.
    let mut keep = walls.meet_row(h, plus, true).clone();
    keep.intersect_with(x.bits());
    let mut neg = walls.meet_row(h, plus, false).clone();
    neg.difference_with(x.bits());
    keep.union_with(&neg);
    let mut flips = keep;
    flips.toggle_range(..);
    let mut bits = x.bits().clone();
    bits.symmetric_difference_with(&flips);
    Ultrafilter::from_bits(bits)
}

/// Gate onto the interval between `x` and `y`.
pub fn interval_gate(x: &Ultrafilter, y: &Ultrafilter, p: &Ultrafilter) -> Ultrafilter {
    Ultrafilter::median(x, y, p)
}
