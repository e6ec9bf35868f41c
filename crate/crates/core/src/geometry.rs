//! Coarse geometry of finite metric spaces: four-point hyperbolicity,
//! Gromov products, rough geodesics, coarse medians and the bottleneck test.

use std::collections::VecDeque;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::half::Half;
use crate::metric::FiniteMetric;

/// Minimal δ for the four-point condition over all quadruples.
pub fn hyperbolicity_delta<M: FiniteMetric>(space: &M) -> Result<Half> {
    let n = space.len();
    if n == 0 {
        return Err(Error::EmptyInstance);
    }
    let mut worst = 0i64;
    for a in 0..n {
        for b in a + 1..n {
            let ab = space.dist(a, b) as i64;
            for c in b + 1..n {
                let ac = space.dist(a, c) as i64;
                let bc = space.dist(b, c) as i64;
                for d in c + 1..n {
                    let s1 = ab + space.dist(c, d) as i64;
                    let s2 = ac + space.dist(b, d) as i64;
                    let s3 = space.dist(a, d) as i64 + bc;
                    let mut s = [s1, s2, s3];
                    s.sort_unstable();
                    worst = worst.max(s[2] - s[1]);
                }
            }
        }
    }
    Ok(Half::from_twice(worst))
}

/// ⟨y,z⟩_x = (d(x,y) + d(x,z) − d(y,z)) / 2.
pub fn gromov_product<M: FiniteMetric>(space: &M, x: usize, y: usize, z: usize) -> Half {
    Half::from_twice(space.dist(x, y) as i64 + space.dist(x, z) as i64 - space.dist(y, z) as i64)
}

/// Smallest-id point minimising d(·,x) + d(·,y) + d(·,z).
///
/// The three Gromov-product defects of a point `v` sum to
/// `2(d(v,x)+d(v,y)+d(v,z))` minus the perimeter, so this is also the
/// minimiser of the total defect.
pub fn coarse_median<M: FiniteMetric>(space: &M, x: usize, y: usize, z: usize) -> usize {
    (0..space.len())
        .min_by_key(|&v| (space.dist(v, x) + space.dist(v, y) + space.dist(v, z), v))
        .expect("nonempty space")
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RoughGeodesic {
    pub points: Vec<usize>,
    pub quality: u32,
}

impl RoughGeodesic {
    /// Independent re-check of the (1,k)-quasi-isometric embedding condition.
    pub fn is_valid<M: FiniteMetric>(&self, space: &M) -> bool {
        is_rough_geodesic(space, &self.points, self.quality)
    }
}

pub fn is_rough_geodesic<M: FiniteMetric>(space: &M, points: &[usize], k: u32) -> bool {
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            let d = space.dist(points[i], points[j]) as i64;
            if (d - (j - i) as i64).abs() > k as i64 {
                return false;
            }
        }
    }
    true
}

#[derive(Clone, Debug, Serialize)]
pub struct RoughGeodesics {
    pub paths: Vec<RoughGeodesic>,
    /// The cap was reached before the search finished.
    pub capped: bool,
}

/// All k-rough geodesics from `x` to `y` (up to `cap`), in lexicographic
/// order of their point sequences.
pub fn enumerate_rough_geodesics<M: FiniteMetric>(
    space: &M,
    x: usize,
    y: usize,
    k: u32,
    cap: usize,
) -> Result<RoughGeodesics> {
    let order: Vec<usize> = (0..space.len()).collect();
    enumerate_rough_geodesics_in(space, x, y, k, cap, &order)
}

/// As [`enumerate_rough_geodesics`], trying next points in the given order.
pub fn enumerate_rough_geodesics_in<M: FiniteMetric>(
    space: &M,
    x: usize,
    y: usize,
    k: u32,
    cap: usize,
    order: &[usize],
) -> Result<RoughGeodesics> {
    if cap == 0 {
        return Err(Error::EmptyBudget);
    }
    let n = space.len();
    if x >= n {
        return Err(Error::NotInGround(x));
    }
    if y >= n {
        return Err(Error::NotInGround(y));
    }
    let max_len = space.dist(x, y) as usize + k as usize;
    let mut out = RoughGeodesics {
        paths: Vec::new(),
        capped: false,
    };
    let mut prefix = vec![x];
    extend(space, y, k, max_len, cap, order, &mut prefix, &mut out);
    Ok(out)
}

fn extend<M: FiniteMetric>(
    space: &M,
    y: usize,
    k: u32,
    max_len: usize,
    cap: usize,
    order: &[usize],
    prefix: &mut Vec<usize>,
    out: &mut RoughGeodesics,
) {
    if out.capped {
        return;
    }
    let last = *prefix.last().unwrap();
    if last == y {
        if out.paths.len() == cap {
            out.capped = true;
            return;
        }
        out.paths.push(RoughGeodesic {
            points: prefix.clone(),
            quality: k,
        });
    }
    let i = prefix.len();
    if i > max_len {
        return;
    }
    for &q in order {
        // Remaining room to reach y.
        if space.dist(q, y) as usize > (max_len - i) + k as usize {
            continue;
        }
        let fits = prefix.iter().enumerate().all(|(j, &p)| {
            let d = space.dist(p, q) as i64;
            (d - (i - j) as i64).abs() <= k as i64
        });
        if fits {
            prefix.push(q);
            extend(space, y, k, max_len, cap, order, prefix, out);
            prefix.pop();
            if out.capped {
                return;
            }
        }
    }
}

/// Minimal k such that for all x, y and integer r ≤ d(x,y) some z has
/// d(x,z) ≥ r−k, d(z,y) ≥ d(x,y)−r−k and d(x,z)+d(z,y) ≤ d(x,y)+k.
pub fn weak_rough_geodesic_constant<M: FiniteMetric>(space: &M) -> u32 {
    let n = space.len();
    let mut worst = 0i64;
    for x in 0..n {
        for y in 0..n {
            let dxy = space.dist(x, y) as i64;
            for r in 0..=dxy {
                let best = (0..n)
                    .map(|z| {
                        let dxz = space.dist(x, z) as i64;
                        let dzy = space.dist(z, y) as i64;
                        (r - dxz).max(dxy - r - dzy).max(dxz + dzy - dxy).max(0)
                    })
                    .min()
                    .unwrap_or(0);
                worst = worst.max(best);
            }
        }
    }
    worst as u32
}

#[derive(Clone, Debug, Serialize)]
pub struct BottleneckWitness {
    pub x: usize,
    pub y: usize,
    pub point: usize,
    /// A unit-step path from x to y staying at distance ≥ `distance` from `point`.
    pub path: Vec<usize>,
    pub distance: u32,
}

#[derive(Clone, Debug, Serialize)]
pub struct BottleneckReport {
    pub delta: Half,
    pub holds: bool,
    /// Largest distance any unit-step path can keep from a between-point.
    pub worst_distance: u32,
    pub worst: Option<BottleneckWitness>,
    pub path_budget: usize,
    /// The worst witness path fits in the path-length budget.
    pub witness_within_budget: bool,
}

/// Bottleneck test: for all x, y, every point z between them (as decided by
/// `between(x, y, z)`) lies within `delta` of every unit-step path from x
/// to y. Unit steps join points at distance ≤ 1.
///
/// The maximum over paths of dist(z, γ) is the largest r for which x and y
/// stay connected after deleting the open r-ball about z, so paths are not
/// enumerated; the answer is exact for paths of any length.
pub fn bottleneck_check<M, F>(space: &M, delta: Half, between: F) -> Result<BottleneckReport>
where
    M: FiniteMetric + Sync,
    F: Fn(usize, usize, usize) -> bool + Sync,
{
    let n = space.len();
    if n == 0 {
        return Err(Error::EmptyInstance);
    }
    let adj: Vec<Vec<usize>> = (0..n)
        .map(|a| {
            (0..n)
                .filter(|&b| b != a && space.dist(a, b) <= 1)
                .collect()
        })
        .collect();
    let diam = space.diameter() as usize;
    let path_budget = 2 * diam + 16;

    use rayon::prelude::*;
    let per_point: Vec<Option<(u32, usize, usize)>> = (0..n)
        .into_par_iter()
        .map(|z| {
            let mut best: Option<(u32, usize, usize)> = None;
            let ecc = (0..n).map(|p| space.dist(z, p)).max().unwrap_or(0);
            for r in 1..=ecc {
                let keep: Vec<bool> = (0..n).map(|p| space.dist(z, p) >= r).collect();
                let comp = label_components(&adj, &keep);
                let mut found = None;
                'pairs: for x in 0..n {
                    if !keep[x] {
                        continue;
                    }
                    for y in x + 1..n {
                        if keep[y] && comp[x] == comp[y] && between(x, y, z) {
                            found = Some((x, y));
                            break 'pairs;
                        }
                    }
                }
                match found {
                    Some((x, y)) => best = Some((r, x, y)),
                    None => break,
                }
            }
            best
        })
        .collect();

    let mut worst: Option<(u32, usize, usize, usize)> = None;
    for (z, b) in per_point.into_iter().enumerate() {
        if let Some((r, x, y)) = b {
            if worst.map_or(true, |w| r > w.0) {
                worst = Some((r, x, y, z));
            }
        }
    }
    let worst_distance = worst.map_or(0, |w| w.0);
    let holds = Half::from_int(worst_distance as i64) <= delta;
    let witness = worst.map(|(r, x, y, z)| {
        let keep: Vec<bool> = (0..n).map(|p| space.dist(z, p) >= r).collect();
        BottleneckWitness {
            x,
            y,
            point: z,
            path: bfs_path(&adj, &keep, x, y),
            distance: r,
        }
    });
    let witness_within_budget = witness
        .as_ref()
        .map_or(true, |w| w.path.len() <= path_budget + 1);
    Ok(BottleneckReport {
        delta,
        holds,
        worst_distance,
        worst: witness,
        path_budget,
        witness_within_budget,
    })
}

/// Metric betweenness: d(x,z) + d(z,y) = d(x,y).
pub fn metric_between<M: FiniteMetric>(space: &M) -> impl Fn(usize, usize, usize) -> bool + '_ {
    move |x, y, z| space.dist(x, z) + space.dist(z, y) == space.dist(x, y)
}

fn label_components(adj: &[Vec<usize>], keep: &[bool]) -> Vec<usize> {
    let n = adj.len();
    let mut comp = vec![usize::MAX; n];
    let mut next = 0;
    let mut q = VecDeque::new();
    for s in 0..n {
        if !keep[s] || comp[s] != usize::MAX {
            continue;
        }
        comp[s] = next;
        q.push_back(s);
        while let Some(u) = q.pop_front() {
            for &w in &adj[u] {
                if keep[w] && comp[w] == usize::MAX {
                    comp[w] = next;
                    q.push_back(w);
                }
            }
        }
        next += 1;
    }
    comp
}

fn bfs_path(adj: &[Vec<usize>], keep: &[bool], s: usize, t: usize) -> Vec<usize> {
    let mut prev = vec![usize::MAX; adj.len()];
    prev[s] = s;
    let mut q = VecDeque::from([s]);
    while let Some(u) = q.pop_front() {
        if u == t {
            break;
        }
        for &w in &adj[u] {
            if keep[w] && prev[w] == usize::MAX {
                prev[w] = u;
                q.push_back(w);
            }
        }
    }
    let mut path = vec![t];
    let mut cur = t;
    while cur != s {
        cur = prev[cur];
        path.push(cur);
    }
    path.reverse();
    path
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators;

    #[test]
    fn trees_are_zero_hyperbolic() {
        let t = generators::tripod(2, 3, 1).unwrap();
        assert_eq!(hyperbolicity_delta(&t).unwrap(), Half::ZERO);
        let single = generators::path(0).unwrap();
        assert_eq!(hyperbolicity_delta(&single).unwrap(), Half::ZERO);
    }

    #[test]
    fn cycle_twelve_matches_quadruple_scan() {
        let c = generators::cycle(12).unwrap();
        // Independent scan over ordered quadruples, no symmetry reduction.
        let mut worst = 0i64;
        for a in 0..12 {
            for b in 0..12 {
                for x in 0..12 {
                    for y in 0..12 {
                        let d = |p, q| c.dist(p, q) as i64;
                        let lhs = d(a, b) + d(x, y);
                        let rhs = (d(a, x) + d(b, y)).max(d(a, y) + d(b, x));
                        worst = worst.max(lhs - rhs);
                    }
                }
            }
        }
        assert_eq!(worst, 6);
        assert_eq!(hyperbolicity_delta(&c).unwrap(), Half::from_twice(worst));
    }

    #[test]
    fn gromov_products() {
        let t = generators::tripod(2, 3, 4).unwrap();
        // vertex 0 is the centre; legs are laid out consecutively.
        let (ea, eb, ec) = (2, 2 + 3, 2 + 3 + 4);
        assert_eq!(gromov_product(&t, ea, eb, ec), Half::from_int(2));
        assert_eq!(gromov_product(&t, eb, eb, ec), Half::ZERO);
        assert_eq!(
            gromov_product(&t, ea, eb, eb),
            Half::from_int(t.dist(ea, eb) as i64)
        );
    }

    #[test]
    fn rough_geodesics() {
        let p = generators::path(5).unwrap();
        let r = enumerate_rough_geodesics(&p, 0, 5, 0, 10).unwrap();
        assert_eq!(r.paths.len(), 1);
        assert_eq!(r.paths[0].points, vec![0, 1, 2, 3, 4, 5]);
        let r = enumerate_rough_geodesics(&p, 2, 2, 0, 10).unwrap();
        assert_eq!(r.paths.len(), 1);
        assert_eq!(r.paths[0].points, vec![2]);
        let c = generators::cycle(4).unwrap();
        let r = enumerate_rough_geodesics(&c, 0, 2, 0, 10).unwrap();
        assert_eq!(r.paths.len(), 2);
        assert!(matches!(
            enumerate_rough_geodesics(&c, 0, 2, 0, 0),
            Err(Error::EmptyBudget)
        ));
    }

    #[test]
    fn rough_geodesic_cap_is_flagged() {
        let c = generators::cycle(6).unwrap();
        let r = enumerate_rough_geodesics(&c, 0, 3, 2, 3).unwrap();
        assert_eq!(r.paths.len(), 3);
        assert!(r.capped);
        assert!(r.paths.iter().all(|g| g.is_valid(&c)));
    }

    #[test]
    fn medians() {
        let t = generators::tripod(2, 2, 2).unwrap();
        assert_eq!(coarse_median(&t, 2, 4, 6), 0);
        assert_eq!(coarse_median(&t, 3, 3, 6), 3);
        let c = generators::cycle(6).unwrap();
        for (x, y, z) in [(0, 2, 4), (0, 1, 3), (5, 1, 2)] {
            let brute = (0..6)
                .min_by_key(|&v| (c.dist(v, x) + c.dist(v, y) + c.dist(v, z), v))
                .unwrap();
            assert_eq!(coarse_median(&c, x, y, z), brute);
        }
    }

    #[test]
    fn weak_rough_geodesic_constants() {
        assert_eq!(
            weak_rough_geodesic_constant(&generators::path(7).unwrap()),
            0
        );
        assert_eq!(
            weak_rough_geodesic_constant(&generators::path(0).unwrap()),
            0
        );
        let two = crate::metric::DistTable::from_fn(2, |_, _| 5);
        // Scan k = 0..=5 directly against the definition.
        let ok = |k: i64| {
            (0..=5i64).all(|r| {
                [(0i64, 5i64), (5, 0)]
                    .iter()
                    .any(|&(dxz, dzy)| dxz >= r - k && dzy >= 5 - r - k && dxz + dzy <= 5 + k)
            })
        };
        let minimal = (0..=5).find(|&k| ok(k)).unwrap();
        assert_eq!(minimal, 2);
        assert_eq!(weak_rough_geodesic_constant(&two), minimal as u32);
    }

    #[test]
    fn bottleneck() {
        let t = generators::tripod(3, 2, 4).unwrap();
        assert!(
            bottleneck_check(&t, Half::ZERO, metric_between(&t))
                .unwrap()
                .holds
        );
        let e = generators::path(1).unwrap();
        assert!(
            bottleneck_check(&e, Half::ZERO, metric_between(&e))
                .unwrap()
                .holds
        );
        let c = generators::cycle(12).unwrap();
        let r = bottleneck_check(&c, Half::from_twice(5), metric_between(&c)).unwrap();
        assert!(!r.holds);
        let w = r.worst.unwrap();
        assert_eq!(w.distance, 3);
        assert_eq!(c.dist(w.x, w.y), 6);
        assert!(w.path.iter().all(|&p| c.dist(p, w.point) >= 3));
        assert!(
            bottleneck_check(&c, Half::from_int(3), metric_between(&c))
                .unwrap()
                .holds
        );
    }
}
