//! Cylinders in a finite dual model and a checker for their global
//! stability.
//!
//! For points `x, y` the walls not separating them are oriented towards
//! `x`. Those that no long monochromatic chain through `[x,y]` crosses are
//! the distant walls, and their positive halfspaces cut out `I(x,y)`, which
//! sits between the interval and its 1-neighbourhood. The cylinder is the
//! ε-neighbourhood of `I(x,y)`.

use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;

use fixedbitset::FixedBitSet;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Serialize, Serializer};

use crate::dual::{dot_id, DualModel};
use crate::error::{Error, Result};
use crate::geometry::{coarse_median, enumerate_rough_geodesics_in};
use crate::half::Half;
use crate::metric::{DistTable, FiniteMetric};
use crate::system::ChainSystem;
use crate::wall::WallSet;

/// Largest model the cylinder analysis accepts; it tabulates all medians.
pub const MAX_POINTS: usize = 256;

#[derive(Clone, Copy, Debug, Serialize)]
pub struct CylinderConfig {
    pub m: usize,
    #[serde(rename = "L")]
    pub l: u32,
    /// Use this ε instead of the measured one.
    pub epsilon: Option<u32>,
    /// Roughness of the sampled geodesics; defaults to `3m`.
    pub rough_k: Option<u32>,
    pub path_cap: usize,
    /// All pairs are sampled when the model has at most this many points.
    pub exhaustive_pairs: usize,
    pub sample_pairs: usize,
    pub exhaustive_triples: usize,
    pub sample_triples: usize,
    pub seed: u64,
    /// Ball budget of the certificate; defaults to `2m+1`.
    pub max_k: Option<usize>,
    /// Replace `I(x,y)` by the interval and widen the cylinder by this much.
    pub inflate: Option<u32>,
}

impl CylinderConfig {
    pub fn new(m: usize, l: u32) -> Self {
        CylinderConfig {
            m,
            l,
            epsilon: None,
            rough_k: None,
            path_cap: 64,
            exhaustive_pairs: 40,
            sample_pairs: 200,
            exhaustive_triples: 80,
            sample_triples: 20_000,
            seed: 0,
            max_k: None,
            inflate: None,
        }
    }

    pub fn rough(&self) -> u32 {
        self.rough_k.unwrap_or(3 * self.m as u32)
    }

    pub fn budget(&self) -> usize {
        self.max_k.unwrap_or(2 * self.m + 1)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PathWitness {
    pub x: usize,
    pub y: usize,
    pub path: Vec<usize>,
    pub point: usize,
    pub dist: u32,
}

#[derive(Clone, Debug, Serialize)]
pub struct TripleWitness {
    pub x: usize,
    pub y: usize,
    pub z: usize,
    pub walls: Vec<usize>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CylinderReport {
    pub points: usize,
    pub walls: usize,
    pub m: usize,
    #[serde(rename = "L")]
    pub l: u32,
    pub epsilon: u32,
    pub epsilon_measured: u32,
    /// A supplied ε is below the measured one.
    pub epsilon_warning: bool,
    pub inflate: Option<u32>,
    pub rough_k: u32,
    pub pairs_sampled: usize,
    pub pairs_exhaustive: bool,
    pub paths: usize,
    /// Pairs whose geodesic enumeration hit the cap.
    pub capped_pairs: usize,
    pub contains_geodesics: bool,
    pub containment_witness: Option<PathWitness>,
    pub theta: u32,
    pub tau: u32,
    pub theta_holds: bool,
    pub theta_witness: Option<PathWitness>,
    pub reversible: bool,
    pub distant_complete: bool,
    pub gate_max_diameter: u32,
    pub gate_bound: u32,
    pub gate_diameter_holds: bool,
    pub gates_gated: bool,
    pub gate_sets: usize,
    pub nonseparation_holds: bool,
    pub nonseparation_witness: Option<TripleWitness>,
    pub max_far_family: usize,
    pub projections_holds: bool,
    pub projections_witness: Option<TripleWitness>,
    pub cluster_radius: u32,
    pub clusters_holds: bool,
    pub clusters_witness: Option<TripleWitness>,
    /// Largest `|d(x, μ) − ⟨y,z⟩_x|` over the triples.
    pub median_defect: Half,
    pub triples: usize,
    pub triples_exhaustive: bool,
}

impl CylinderReport {
    pub fn lemmas_hold(&self) -> bool {
        self.gate_diameter_holds
            && self.gates_gated
            && self.nonseparation_holds
            && self.projections_holds
            && self.clusters_holds
    }

    pub fn axioms_hold(&self) -> bool {
        self.contains_geodesics && self.theta_holds && self.reversible
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BallKind {
    Median,
    Cluster,
    Transferred,
    Cover,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CoverMode {
    Shaped,
    Greedy,
}

impl Serialize for CoverMode {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(match self {
            CoverMode::Shaped => "paper-shaped",
            CoverMode::Greedy => "greedy",
        })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Ball {
    pub center: usize,
    pub radius: u32,
    pub kind: BallKind,
}

#[derive(Clone, Debug, Serialize)]
pub struct TripleRecord {
    pub x: usize,
    pub y: usize,
    pub z: usize,
    pub mode: CoverMode,
    pub balls: Vec<Ball>,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct ParetoPoint {
    #[serde(rename = "R")]
    pub r: u32,
    /// Balls needed at this radius; `None` if more than the search depth.
    pub k: Option<usize>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Recheck {
    pub checked: usize,
    pub failures: usize,
    pub first_failure: Option<(usize, usize, usize)>,
    pub holds: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct StabilityCertificate {
    pub k: usize,
    #[serde(rename = "R")]
    pub r: u32,
    pub max_k: usize,
    pub triples: usize,
    pub empty: usize,
    pub shaped: usize,
    pub greedy: usize,
    /// Share of all triples settled by the median and cluster cover.
    pub shaped_fraction: f64,
    /// The same share among triples with a nonempty difference.
    pub shaped_fraction_nonempty: f64,
    pub pareto: Vec<ParetoPoint>,
    pub recheck: Recheck,
    /// Triples with a nonempty difference and the balls removed for them.
    pub records: Vec<TripleRecord>,
}

impl StabilityCertificate {
    pub fn record(&self, x: usize, y: usize, z: usize) -> Option<&TripleRecord> {
        let (y, z) = (y.min(z), y.max(z));
        self.records
            .binary_search_by_key(&(x, y, z), |r| (r.x, r.y, r.z))
            .ok()
            .map(|i| &self.records[i])
    }
}

struct PairData {
    interval: FixedBitSet,
    distant: FixedBitSet,
    inner: FixedBitSet,
    cylinder: FixedBitSet,
}

/// Cylinders on every pair of model points.
pub struct CylinderSpace {
    pub dist: DistTable,
    pub config: CylinderConfig,
    pub epsilon: u32,
    n: usize,
    walls: usize,
    signs: Vec<FixedBitSet>,
    med: Vec<u16>,
    diam: u32,
    /// `balls[c][r]` for `r ≤ diam`.
    balls: Vec<Vec<FixedBitSet>>,
    pairs: Vec<PairData>,
    /// Gate radius from `x` of each distant wall of `(x, y)`.
    radius: Vec<Vec<u32>>,
    distant_complete: bool,
}

impl CylinderSpace {
    /// Cylinders of a dual model of the chain system `sys`; `color[w]` is
    /// the factor of wall `w`.
    pub fn build(
        model: &DualModel,
        sys: &ChainSystem,
        color: &[usize],
        cfg: CylinderConfig,
    ) -> Result<(CylinderSpace, CylinderReport)> {
        let n = model.len();
        if n == 0 {
            return Err(Error::EmptyInstance);
        }
        if n > MAX_POINTS {
            return Err(Error::Invalid(format!(
                "cylinder analysis takes at most {MAX_POINTS} points, model has {n}"
            )));
        }
        let walls = model.walls().clone();
        let w = walls.len();
        if color.len() != w {
            return Err(Error::Invalid(format!(
                "{} colours for {w} walls",
                color.len()
            )));
        }
        let signs: Vec<FixedBitSet> = model.points.iter().map(|p| p.bits().clone()).collect();
        let mut med = vec![0u16; n * n * n];
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    let i = model.median(a, b, c).ok_or_else(|| {
                        Error::Invalid(format!("model is not median closed at ({a}, {b}, {c})"))
                    })?;
                    med[(a * n + b) * n + c] = i as u16;
                }
            }
        }
        let dist = model.dist.clone();
        let diam = dist.diameter();
        let balls: Vec<Vec<FixedBitSet>> = (0..n)
            .map(|c| {
                (0..=diam)
                    .map(|r| {
                        let mut b = FixedBitSet::with_capacity(n);
                        for p in 0..n {
                            if dist.dist(c, p) <= r {
                                b.insert(p);
                            }
                        }
                        b
                    })
                    .collect()
            })
            .collect();
        let mut space = CylinderSpace {
            dist,
            config: cfg,
            epsilon: 0,
            n,
            walls: w,
            signs,
            med,
            diam,
            balls,
            pairs: Vec::with_capacity(n * n),
            radius: Vec::with_capacity(n * n),
            distant_complete: true,
        };
        space.build_pairs(&walls, sys, color);
        let report = space.finish(&walls)?;
        Ok((space, report))
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn median(&self, a: usize, b: usize, c: usize) -> usize {
        self.med[(a * self.n + b) * self.n + c] as usize
    }

    fn pair(&self, x: usize, y: usize) -> &PairData {
        &self.pairs[x * self.n + y]
    }

    pub fn interval(&self, x: usize, y: usize) -> &FixedBitSet {
        &self.pair(x, y).interval
    }

    /// `I(x, y)`.
    pub fn inner(&self, x: usize, y: usize) -> &FixedBitSet {
        &self.pair(x, y).inner
    }

    pub fn distant(&self, x: usize, y: usize) -> &FixedBitSet {
        &self.pair(x, y).distant
    }

    pub fn cylinder(&self, x: usize, y: usize) -> &FixedBitSet {
        &self.pair(x, y).cylinder
    }

    fn ball(&self, c: usize, r: u32) -> &FixedBitSet {
        &self.balls[c][r.min(self.diam) as usize]
    }

    fn neighbourhood(&self, set: &FixedBitSet, r: u32) -> FixedBitSet {
        let mut out = FixedBitSet::with_capacity(self.n);
        for p in set.ones() {
            out.union_with(self.ball(p, r));
        }
        out
    }

    fn set_dist(&self, p: usize, set: &FixedBitSet) -> u32 {
        set.ones()
            .map(|q| self.dist.dist(p, q))
            .min()
            .unwrap_or(u32::MAX)
    }

    /// Points `p` with `sign(p) & mask == sign(x) & mask`.
    fn agreeing(&self, x: usize, mask: &FixedBitSet) -> FixedBitSet {
        let mut out = FixedBitSet::with_capacity(self.n);
        for p in 0..self.n {
            let mut diff = self.signs[p].clone();
            diff.symmetric_difference_with(&self.signs[x]);
            diff.intersect_with(mask);
            if diff.is_clear() {
                out.insert(p);
            }
        }
        out
    }

    fn build_pairs(&mut self, walls: &WallSet, sys: &ChainSystem, color: &[usize]) {
        let n = self.n;
        let w = self.walls;
        let colors = color.iter().copied().max().map_or(0, |c| c + 1);
        let mut by_color = vec![FixedBitSet::with_capacity(w); colors];
        for (h, &c) in color.iter().enumerate() {
            by_color[c].insert(h);
        }
        let l = self.config.l as usize;
        let mut cache: HashMap<FixedBitSet, usize> = HashMap::new();
        for x in 0..n {
            for y in 0..n {
                let mut sep = self.signs[x].clone();
                sep.symmetric_difference_with(&self.signs[y]);
                let mut keep = sep.clone();
                keep.toggle_range(..);
                let interval = self.agreeing(x, &keep);
                let mut distant = FixedBitSet::with_capacity(w);
                for h in keep.ones() {
                    let far = by_color.iter().all(|cs| {
                        let mut s = sep.clone();
                        s.intersect_with(walls.crossing_row(h));
                        s.intersect_with(cs);
                        if s.count_ones(..) <= l {
                            return true;
                        }
                        let len = *cache.entry(s.clone()).or_insert_with(|| {
                            let set: Vec<usize> = s.ones().collect();
                            let best = sys.longest_among(&set);
                            self.distant_complete &= best.complete;
                            best.nodes.len()
                        });
                        len <= l
                    });
                    if far {
                        distant.insert(h);
                    }
                }
                let inner = self.agreeing(x, &distant);
                self.pairs.push(PairData {
                    interval,
                    distant,
                    inner,
                    cylinder: FixedBitSet::with_capacity(n),
                });
            }
        }
        for x in 0..n {
            for y in 0..n {
                let radius = self
                    .distant(x, y)
                    .ones()
                    .map(|h| {
                        self.gate(x, y, h)
                            .ones()
                            .map(|p| self.dist.dist(x, p))
                            .max()
                            .unwrap_or(0)
                    })
                    .collect();
                self.radius.push(radius);
            }
        }
    }

    /// Gate of the far side of `h` (seen from `x`) onto `[x, y]`.
    pub fn gate(&self, x: usize, y: usize, h: usize) -> FixedBitSet {
        let mut out = FixedBitSet::with_capacity(self.n);
        let sx = self.signs[x].contains(h);
        for p in 0..self.n {
            if self.signs[p].contains(h) != sx {
                out.insert(self.median(x, y, p));
            }
        }
        out
    }

    /// Gate radius from `x` of a distant wall of `(x, y)`.
    pub fn gate_radius(&self, x: usize, y: usize, h: usize) -> Option<u32> {
        let d = self.distant(x, y);
        if !d.contains(h) {
            return None;
        }
        let i = d.ones().position(|g| g == h).unwrap();
        Some(self.radius[x * self.n + y][i])
    }

    fn diameter_of(&self, set: &FixedBitSet) -> u32 {
        let pts: Vec<usize> = set.ones().collect();
        let mut d = 0;
        for (i, &a) in pts.iter().enumerate() {
            for &b in &pts[i + 1..] {
                d = d.max(self.dist.dist(a, b));
            }
        }
        d
    }

    fn is_convex(&self, set: &FixedBitSet) -> bool {
        let pts: Vec<usize> = set.ones().collect();
        for (i, &a) in pts.iter().enumerate() {
            for &b in &pts[i..] {
                if (0..self.n).any(|p| !set.contains(self.median(a, b, p))) {
                    return false;
                }
            }
        }
        true
    }

    fn sample_pairs(&self) -> (Vec<(usize, usize)>, bool) {
        let n = self.n;
        let all: Vec<(usize, usize)> = (0..n).flat_map(|x| (x..n).map(move |y| (x, y))).collect();
        if n <= self.config.exhaustive_pairs || all.len() <= self.config.sample_pairs {
            return (all, true);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.config.seed);
        let mut pick: Vec<(usize, usize)> = all
            .choose_multiple(&mut rng, self.config.sample_pairs)
            .copied()
            .collect();
        pick.sort_unstable();
        (pick, false)
    }

    fn finish(&mut self, walls: &WallSet) -> Result<CylinderReport> {
        let n = self.n;
        let cfg = self.config;
        let m = cfg.m as u32;
        let l = cfg.l;
        // Inclusion [x,y] ⊆ I(x,y) ⊆ N_1([x,y]) is what every later bound rests on.
        for x in 0..n {
            for y in 0..n {
                let p = self.pair(x, y);
                if !p.interval.is_subset(&p.inner) {
                    return Err(Error::InclusionViolated(format!(
                        "interval of ({x}, {y}) is not inside I"
                    )));
                }
                if !p.inner.is_subset(&self.neighbourhood(&p.interval, 1)) {
                    return Err(Error::InclusionViolated(format!(
                        "I({x}, {y}) leaves the 1-neighbourhood of the interval"
                    )));
                }
            }
        }

        // Sampled rough geodesics.
        let k = cfg.rough();
        let (pairs, exhaustive) = self.sample_pairs();
        let mut samples: Vec<(usize, usize, Vec<Vec<usize>>)> = Vec::new();
        let mut capped = 0;
        for &(x, y) in &pairs {
            let mut order: Vec<usize> = (0..n).collect();
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ ((x as u64) << 32 | y as u64));
            order.shuffle(&mut rng);
            let g = enumerate_rough_geodesics_in(&self.dist, x, y, k, cfg.path_cap, &order)?;
            capped += g.capped as usize;
            samples.push((x, y, g.paths.into_iter().map(|p| p.points).collect()));
        }
        let mut measured = 0;
        for (x, y, paths) in &samples {
            let inner = self.inner(*x, *y);
            for p in paths {
                for &q in p {
                    measured = measured.max(self.set_dist(q, inner));
                }
                for o in paths {
                    measured = measured.max(hausdorff(&self.dist, p, o));
                }
            }
        }
        let epsilon = cfg.epsilon.unwrap_or(measured);
        self.epsilon = epsilon;
        for x in 0..n {
            for y in 0..n {
                let c = match cfg.inflate {
                    Some(t) => self.neighbourhood(self.interval(x, y), epsilon + t),
                    None => self.neighbourhood(self.inner(x, y), epsilon),
                };
                self.pairs[x * n + y].cylinder = c;
            }
        }

        let mut containment_witness = None;
        let mut theta_witness = None;
        let (mut theta, mut tau, mut paths_seen) = (0, 0, 0);
        for (x, y, paths) in &samples {
            let cyl = self.cylinder(*x, *y);
            let iv = self.interval(*x, *y);
            for p in paths {
                paths_seen += 1;
                let set = points_set(n, p);
                if containment_witness.is_none() {
                    if let Some(&q) = p.iter().find(|&&q| !cyl.contains(q)) {
                        let d = self.set_dist(q, cyl);
                        containment_witness = Some(PathWitness {
                            x: *x,
                            y: *y,
                            path: p.clone(),
                            point: q,
                            dist: d,
                        });
                    }
                }
                let t = iv.ones().map(|q| self.set_dist(q, &set)).max().unwrap_or(0);
                tau = tau.max(t);
                for c in cyl.ones() {
                    let d = self.set_dist(c, &set);
                    theta = theta.max(d);
                    if d > epsilon + 1 + t && theta_witness.is_none() {
                        theta_witness = Some(PathWitness {
                            x: *x,
                            y: *y,
                            path: p.clone(),
                            point: c,
                            dist: d,
                        });
                    }
                }
            }
        }
        let reversible =
            (0..n).all(|x| (x + 1..n).all(|y| self.cylinder(x, y) == self.cylinder(y, x)));

        // Gate sets: bounded and gated.
        let mut seen: HashSet<FixedBitSet> = HashSet::new();
        let mut gate_max = 0;
        let mut gated = true;
        for x in 0..n {
            for y in x..n {
                for h in self.distant(x, y).ones() {
                    let g = self.gate(x, y, h);
                    if seen.insert(g.clone()) {
                        gate_max = gate_max.max(self.diameter_of(&g));
                        gated &= self.is_convex(&g);
                    }
                }
            }
        }

        let (triples, triples_exhaustive) = self.triples();
        let cluster_radius = 2 * m * l + l + 1;
        let mut nonsep = None;
        let mut proj = None;
        let mut clusters = None;
        let mut max_family = 0;
        let mut defect = 0i64;
        for &(x, y, z) in &triples {
            let mu = self.median(x, y, z);
            let r = self.dist.dist(x, mu);
            let twice = self.dist.dist(x, y) as i64 + self.dist.dist(x, z) as i64
                - self.dist.dist(y, z) as i64;
            defect = defect.max((2 * r as i64 - twice).abs());
            for (a, b) in [(y, z), (z, y)] {
                if nonsep.is_none() {
                    let bad: Vec<usize> = self
                        .distant_within(x, a, r as i64 - 1)
                        .into_iter()
                        .filter(|&h| walls_separate(&self.signs, x, b, h))
                        .collect();
                    if !bad.is_empty() {
                        nonsep = Some(TripleWitness {
                            x,
                            y: a,
                            z: b,
                            walls: bad,
                        });
                    }
                }
                let family = self.far_walls(x, a, b, r);
                if family.is_empty() {
                    continue;
                }
                let gates: Vec<FixedBitSet> = family.iter().map(|&h| self.gate(x, a, h)).collect();
                let near: Vec<FixedBitSet> =
                    gates.iter().map(|g| self.neighbourhood(g, l)).collect();
                let far = |i: usize, j: usize| gates[i].is_disjoint(&near[j]);
                let clique = largest_clique(gates.len(), &far, cfg.m + 1);
                max_family = max_family.max(clique.len());
                if clique.len() > cfg.m && proj.is_none() {
                    proj = Some(TripleWitness {
                        x,
                        y: a,
                        z: b,
                        walls: clique.iter().map(|&i| family[i]).collect(),
                    });
                }
                let centres = greedy_family(gates.len(), &far);
                let covered = gates.iter().all(|g| {
                    centres.iter().any(|&i| {
                        g.is_subset(self.ball(gates[i].minimum().unwrap(), cluster_radius))
                    })
                });
                if (!covered || centres.len() > cfg.m) && clusters.is_none() {
                    clusters = Some(TripleWitness {
                        x,
                        y: a,
                        z: b,
                        walls: centres.iter().map(|&i| family[i]).collect(),
                    });
                }
            }
        }

        Ok(CylinderReport {
            points: n,
            walls: walls.len(),
            m: cfg.m,
            l,
            epsilon,
            epsilon_measured: measured,
            epsilon_warning: epsilon < measured,
            inflate: cfg.inflate,
            rough_k: k,
            pairs_sampled: pairs.len(),
            pairs_exhaustive: exhaustive,
            paths: paths_seen,
            capped_pairs: capped,
            contains_geodesics: containment_witness.is_none(),
            containment_witness,
            theta,
            tau,
            theta_holds: theta_witness.is_none(),
            theta_witness,
            reversible,
            distant_complete: self.distant_complete,
            gate_max_diameter: gate_max,
            gate_bound: m * l,
            gate_diameter_holds: gate_max <= m * l,
            gates_gated: gated,
            gate_sets: seen.len(),
            nonseparation_holds: nonsep.is_none(),
            nonseparation_witness: nonsep,
            max_far_family: max_family,
            projections_holds: proj.is_none(),
            projections_witness: proj,
            cluster_radius,
            clusters_holds: clusters.is_none(),
            clusters_witness: clusters,
            median_defect: Half::from_twice(defect),
            triples: triples.len(),
            triples_exhaustive,
        })
    }

    /// Distant walls of `(x, a)` whose gate lies within `t` of `x`.
    fn distant_within(&self, x: usize, a: usize, t: i64) -> Vec<usize> {
        let rad = &self.radius[x * self.n + a];
        self.distant(x, a)
            .ones()
            .zip(rad)
            .filter(|&(_, &r)| r as i64 <= t)
            .map(|(h, _)| h)
            .collect()
    }

    /// Distant walls of `(x, a)` with gate radius at most `r − L − 1` that
    /// are not distant for `(x, b)`.
    fn far_walls(&self, x: usize, a: usize, b: usize, r: u32) -> Vec<usize> {
        let t = r as i64 - self.config.l as i64 - 1;
        let other = self.distant(x, b);
        self.distant_within(x, a, t)
            .into_iter()
            .filter(|&h| !other.contains(h))
            .collect()
    }

    /// Triples `(x, y, z)` with `y ≤ z`.
    pub fn triples(&self) -> (Vec<(usize, usize, usize)>, bool) {
        let n = self.n;
        if n <= self.config.exhaustive_triples {
            let all = (0..n)
                .flat_map(|x| (0..n).flat_map(move |y| (y..n).map(move |z| (x, y, z))))
                .collect();
            return (all, true);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.config.seed.wrapping_add(1));
        let mut set = HashSet::new();
        use rand::Rng;
        while set.len() < self.config.sample_triples {
            let (x, a, b) = (
                rng.gen_range(0..n),
                rng.gen_range(0..n),
                rng.gen_range(0..n),
            );
            set.insert((x, a.min(b), a.max(b)));
        }
        let mut v: Vec<_> = set.into_iter().collect();
        v.sort_unstable();
        (v, false)
    }

    fn cases(&self) -> Vec<Case> {
        let (triples, _) = self.triples();
        triples
            .into_iter()
            .map(|(x, y, z)| {
                let mut delta = self.cylinder(x, y).clone();
                delta.symmetric_difference_with(self.cylinder(x, z));
                let twice = self.dist.dist(x, y) as i64 + self.dist.dist(x, z) as i64
                    - self.dist.dist(y, z) as i64;
                let rho = Half::from_twice(twice);
                delta.intersect_with(&ball_half(&self.dist, x, rho));
                let mut shaped = Vec::new();
                if !delta.is_clear() {
                    shaped.push((self.median(x, y, z), BallKind::Median));
                    let r = self.dist.dist(x, self.median(x, y, z));
                    for (a, b) in [(y, z), (z, y)] {
                        let family = self.far_walls(x, a, b, r);
                        let gates: Vec<FixedBitSet> =
                            family.iter().map(|&h| self.gate(x, a, h)).collect();
                        let near: Vec<FixedBitSet> = gates
                            .iter()
                            .map(|g| self.neighbourhood(g, self.config.l))
                            .collect();
                        let far = |i: usize, j: usize| gates[i].is_disjoint(&near[j]);
                        for i in greedy_family(gates.len(), &far) {
                            shaped.push((gates[i].minimum().unwrap(), BallKind::Cluster));
                        }
                    }
                }
                Case {
                    x,
                    y,
                    z,
                    rho,
                    delta,
                    shaped,
                }
            })
            .collect()
    }

    /// The global stability certificate of these cylinders.
    pub fn certify(&self) -> StabilityCertificate {
        let cyl = |a: usize, b: usize| self.cylinder(a, b).clone();
        certify(
            &self.dist,
            &self.balls,
            self.cases(),
            self.config.budget(),
            &cyl,
        )
    }

    /// DOT picture of one pair: interval, `I` and cylinder.
    pub fn pair_dot(&self, x: usize, y: usize) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "graph {} {{", dot_id(&format!("interval_{x}_{y}")));
        let _ = writeln!(out, "  node [style=filled, fillcolor=white];");
        for p in 0..self.n {
            let fill = if self.interval(x, y).contains(p) {
                "gold"
            } else if self.inner(x, y).contains(p) {
                "orange"
            } else if self.cylinder(x, y).contains(p) {
                "lightblue"
            } else {
                "white"
            };
            let tag = if p == x {
                " x"
            } else if p == y {
                " y"
            } else {
                ""
            };
            let _ = writeln!(
                out,
                "  p{p} [label={}, fillcolor={fill}];",
                dot_id(&format!("p{p}{tag}"))
            );
        }
        self.dot_edges(&mut out);
        out
    }

    fn dot_edges(&self, out: &mut String) {
        for a in 0..self.n {
            for b in a + 1..self.n {
                if self.dist.dist(a, b) == 1 {
                    let _ = writeln!(out, "  p{a} -- p{b};");
                }
            }
        }
        out.push_str("}\n");
    }

    /// DOT picture of one triple: the two cylinders and the removed balls.
    pub fn triple_dot(&self, x: usize, y: usize, z: usize, cert: &StabilityCertificate) -> String {
        let removed: Vec<&Ball> = cert
            .record(x, y, z)
            .map(|r| r.balls.iter().collect())
            .unwrap_or_default();
        let mut out = String::new();
        let _ = writeln!(
            out,
            "graph {} {{",
            dot_id(&format!("cylinders_{x}_{y}_{z}"))
        );
        let _ = writeln!(out, "  node [style=filled, fillcolor=white];");
        let (cy, cz) = (self.cylinder(x, y), self.cylinder(x, z));
        for p in 0..self.n {
            let fill = match (cy.contains(p), cz.contains(p)) {
                (true, true) => "plum",
                (true, false) => "lightblue",
                (false, true) => "lightpink",
                (false, false) => "white",
            };
            let hit = removed
                .iter()
                .any(|b| self.dist.dist(b.center, p) <= b.radius);
            let centre = removed.iter().any(|b| b.center == p);
            let mut label = format!("p{p}");
            for (q, tag) in [(x, "x"), (y, "y"), (z, "z")] {
                if p == q {
                    label.push_str(&format!(" {tag}"));
                }
            }
            let border = if centre {
                ", penwidth=3"
            } else if hit {
                ", style=\"filled,dashed\""
            } else {
                ""
            };
            let _ = writeln!(
                out,
                "  p{p} [label={}, fillcolor={fill}{border}];",
                dot_id(&label)
            );
        }
        self.dot_edges(&mut out);
        out
    }
}

fn walls_separate(signs: &[FixedBitSet], a: usize, b: usize, h: usize) -> bool {
    signs[a].contains(h) != signs[b].contains(h)
}

fn points_set(n: usize, pts: &[usize]) -> FixedBitSet {
    let mut s = FixedBitSet::with_capacity(n);
    for &p in pts {
        s.insert(p);
    }
    s
}

fn hausdorff(d: &DistTable, a: &[usize], b: &[usize]) -> u32 {
    let one = |a: &[usize], b: &[usize]| {
        a.iter()
            .map(|&p| b.iter().map(|&q| d.dist(p, q)).min().unwrap_or(0))
            .max()
            .unwrap_or(0)
    };
    one(a, b).max(one(b, a))
}

fn ball_half(d: &DistTable, x: usize, rho: Half) -> FixedBitSet {
    let mut b = FixedBitSet::with_capacity(d.len());
    for p in 0..d.len() {
        if Half::from_int(d.dist(x, p) as i64) <= rho {
            b.insert(p);
        }
    }
    b
}

/// First-fit family of pairwise far indices.
fn greedy_family(n: usize, far: &impl Fn(usize, usize) -> bool) -> Vec<usize> {
    let mut pick: Vec<usize> = Vec::new();
    for i in 0..n {
        if pick.iter().all(|&j| far(i, j) && far(j, i)) {
            pick.push(i);
        }
    }
    pick
}

/// A largest family of pairwise far indices, searched up to size `stop`.
fn largest_clique(n: usize, far: &impl Fn(usize, usize) -> bool, stop: usize) -> Vec<usize> {
    fn grow(
        n: usize,
        far: &impl Fn(usize, usize) -> bool,
        stop: usize,
        from: usize,
        cur: &mut Vec<usize>,
        best: &mut Vec<usize>,
    ) {
        if cur.len() > best.len() {
            *best = cur.clone();
        }
        if best.len() >= stop {
            return;
        }
        for i in from..n {
            if cur.iter().all(|&j| far(i, j) && far(j, i)) {
                cur.push(i);
                grow(n, far, stop, i + 1, cur, best);
                cur.pop();
                if best.len() >= stop {
                    return;
                }
            }
        }
    }
    let mut best = Vec::new();
    grow(n, far, stop, 0, &mut Vec::new(), &mut best);
    best
}

struct Case {
    x: usize,
    y: usize,
    z: usize,
    rho: Half,
    delta: FixedBitSet,
    shaped: Vec<(usize, BallKind)>,
}

fn metric_balls(d: &DistTable) -> Vec<Vec<FixedBitSet>> {
    let (n, diam) = (d.len(), d.diameter());
    (0..n)
        .map(|c| {
            (0..=diam)
                .map(|r| {
                    let mut b = FixedBitSet::with_capacity(n);
                    for p in 0..n {
                        if d.dist(c, p) <= r {
                            b.insert(p);
                        }
                    }
                    b
                })
                .collect()
        })
        .collect()
}

/// Fewest balls from `sets` covering `target`, if at most `limit` suffice.
fn min_cover(target: &FixedBitSet, sets: &[FixedBitSet], limit: usize) -> Option<Vec<usize>> {
    if target.is_clear() {
        return Some(Vec::new());
    }
    // Keep one copy of each trace on the target, dropping dominated traces.
    let mut traces: Vec<(FixedBitSet, usize)> = Vec::new();
    for (i, s) in sets.iter().enumerate() {
        let mut t = s.clone();
        t.intersect_with(target);
        if !t.is_clear() {
            traces.push((t, i));
        }
    }
    traces.sort_by_key(|(t, _)| std::cmp::Reverse(t.count_ones(..)));
    let mut kept: Vec<(FixedBitSet, usize)> = Vec::new();
    for (t, i) in traces {
        if !kept.iter().any(|(k, _)| t.is_subset(k)) {
            kept.push((t, i));
        }
    }
    fn dfs(
        left: &FixedBitSet,
        kept: &[(FixedBitSet, usize)],
        depth: usize,
        cur: &mut Vec<usize>,
    ) -> bool {
        let Some(u) = left.minimum() else { return true };
        if depth == 0 {
            return false;
        }
        for (t, i) in kept {
            if t.contains(u) {
                let mut next = left.clone();
                next.difference_with(t);
                cur.push(*i);
                if dfs(&next, kept, depth - 1, cur) {
                    return true;
                }
                cur.pop();
            }
        }
        false
    }
    for depth in 1..=limit {
        let mut cur = Vec::new();
        if dfs(target, &kept, depth, &mut cur) {
            return Some(cur);
        }
    }
    None
}

fn certify(
    d: &DistTable,
    balls: &[Vec<FixedBitSet>],
    cases: Vec<Case>,
    max_k: usize,
    cylinder: &dyn Fn(usize, usize) -> FixedBitSet,
) -> StabilityCertificate {
    let diam = d.diameter();
    let depth = max_k + 2;
    let total = cases.len();
    let live: Vec<&Case> = cases.iter().filter(|c| !c.delta.is_clear()).collect();
    // Median and cluster covers: each point goes to its nearest centre.
    let shaped: Vec<Vec<Ball>> = live
        .iter()
        .map(|c| {
            let mut radius: Vec<Option<u32>> = vec![None; c.shaped.len()];
            for p in c.delta.ones() {
                let (i, dd) = c
                    .shaped
                    .iter()
                    .enumerate()
                    .map(|(i, &(q, _))| (i, d.dist(q, p)))
                    .min_by_key(|&(i, dd)| (dd, i))
                    .expect("a median and cluster cover has a median ball");
                radius[i] = Some(radius[i].map_or(dd, |r| r.max(dd)));
            }
            c.shaped
                .iter()
                .zip(radius)
                .filter_map(|(&(center, kind), r)| {
                    r.map(|radius| Ball {
                        center,
                        radius,
                        kind,
                    })
                })
                .collect()
        })
        .collect();
    // Fewest balls per radius.
    let counts: Vec<Vec<Option<usize>>> = live
        .iter()
        .map(|c| {
            let mut v = Vec::with_capacity(diam as usize + 1);
            let mut done = false;
            for r in 0..=diam {
                if done {
                    v.push(Some(1));
                    continue;
                }
                let sets: Vec<FixedBitSet> = balls.iter().map(|b| b[r as usize].clone()).collect();
                let k = min_cover(&c.delta, &sets, depth).map(|s| s.len());
                done = k == Some(1);
                v.push(k);
            }
            v
        })
        .collect();
    let fits = |k: Option<usize>| k.is_some_and(|k| k <= max_k);
    let r_star = counts
        .iter()
        .map(|v| (0..=diam).find(|&r| fits(v[r as usize])).unwrap_or(diam))
        .max()
        .unwrap_or(0);
    let mut pareto = Vec::new();
    let mut last: Option<Option<usize>> = None;
    for r in 0..=diam {
        let k = counts
            .iter()
            .try_fold(0usize, |acc, v| v[r as usize].map(|k| acc.max(k)));
        let better = match last {
            None => true,
            Some(None) => k.is_some(),
            Some(Some(prev)) => k.is_some_and(|k| k < prev),
        };
        if better {
            pareto.push(ParetoPoint { r, k });
            last = Some(k);
        }
    }
    let mut records = Vec::new();
    let mut shaped_n = 0;
    for (c, balls_s) in live.iter().zip(shaped) {
        let ok = balls_s.len() <= max_k && balls_s.iter().all(|b| b.radius <= r_star);
        let (mode, chosen) = if ok {
            shaped_n += 1;
            (CoverMode::Shaped, balls_s)
        } else {
            let sets: Vec<FixedBitSet> = balls.iter().map(|b| b[r_star as usize].clone()).collect();
            let pick = min_cover(&c.delta, &sets, max_k).unwrap_or_default();
            let chosen = pick
                .into_iter()
                .map(|center| Ball {
                    center,
                    radius: r_star,
                    kind: BallKind::Cover,
                })
                .collect();
            (CoverMode::Greedy, chosen)
        };
        records.push(TripleRecord {
            x: c.x,
            y: c.y,
            z: c.z,
            mode,
            balls: chosen,
        });
    }
    let empty = total - live.len();
    let k = records.iter().map(|r| r.balls.len()).max().unwrap_or(0);
    let r = records
        .iter()
        .flat_map(|r| r.balls.iter().map(|b| b.radius))
        .max()
        .unwrap_or(0);
    let index: HashMap<(usize, usize, usize), usize> = records
        .iter()
        .enumerate()
        .map(|(i, r)| ((r.x, r.y, r.z), i))
        .collect();
    let recheck = recheck(d, &cases, &records, &index, cylinder);
    let frac = |a: usize, b: usize| if b == 0 { 1.0 } else { a as f64 / b as f64 };
    StabilityCertificate {
        k,
        r,
        max_k,
        triples: total,
        empty,
        shaped: shaped_n,
        greedy: live.len() - shaped_n,
        shaped_fraction: frac(shaped_n + empty, total),
        shaped_fraction_nonempty: frac(shaped_n, live.len()),
        pareto,
        recheck,
        records,
    }
}

/// Checks the set equation for every triple with plain boolean vectors.
fn recheck(
    d: &DistTable,
    cases: &[Case],
    records: &[TripleRecord],
    index: &HashMap<(usize, usize, usize), usize>,
    cylinder: &dyn Fn(usize, usize) -> FixedBitSet,
) -> Recheck {
    let n = d.len();
    let mut failures = 0;
    let mut first = None;
    for c in cases {
        let (x, y, z) = (c.x, c.y, c.z);
        let cy: Vec<bool> = (0..n).map(|p| cylinder(x, y).contains(p)).collect();
        let cz: Vec<bool> = (0..n).map(|p| cylinder(x, z).contains(p)).collect();
        let balls: &[Ball] = index.get(&(x, y, z)).map_or(&[], |&i| &records[i].balls);
        let twice = c.rho.twice();
        let bad = (0..n).any(|p| {
            let inside = 2 * d.dist(x, p) as i64 <= twice;
            let removed = balls.iter().any(|b| d.dist(b.center, p) <= b.radius);
            inside && !removed && cy[p] != cz[p]
        });
        if bad {
            failures += 1;
            first.get_or_insert((x, y, z));
        }
    }
    Recheck {
        checked: cases.len(),
        failures,
        first_failure: first,
        holds: failures == 0,
    }
}

/// A quasi-isometry `φ: Y → X` with its quasi-inverse.
#[derive(Clone, Debug, Serialize)]
pub struct QuasiIsometry {
    pub lambda: u32,
    pub inverse: Vec<usize>,
}

/// Smallest λ with `d/λ − λ ≤ d(φa, φb) ≤ λd + λ` and both composites
/// within λ of the identity.
pub fn quasi_isometry(
    y: &DistTable,
    x: &DistTable,
    phi: &[usize],
    max_lambda: u32,
) -> Result<QuasiIsometry> {
    if phi.len() != y.len() {
        return Err(Error::Invalid(format!(
            "map has {} values for {} points",
            phi.len(),
            y.len()
        )));
    }
    if y.is_empty() {
        return Err(Error::EmptyInstance);
    }
    if let Some(&p) = phi.iter().find(|&&p| p >= x.len()) {
        return Err(Error::NotInGround(p));
    }
    let inverse: Vec<usize> = (0..x.len())
        .map(|p| {
            (0..y.len())
                .min_by_key(|&a| (x.dist(phi[a], p), a))
                .unwrap()
        })
        .collect();
    let mut worst: Option<(usize, usize)> = None;
    for lambda in 1..=max_lambda {
        let lam = lambda as u64;
        let mut bad = None;
        'pairs: for a in 0..y.len() {
            for b in a..y.len() {
                let (s, t) = (y.dist(a, b) as u64, x.dist(phi[a], phi[b]) as u64);
                if t > lam * s + lam || s > lam * t + lam * lam {
                    bad = Some((a, b));
                    break 'pairs;
                }
            }
        }
        let inverse_ok = (0..y.len()).all(|a| y.dist(inverse[phi[a]], a) <= lambda)
            && (0..x.len()).all(|p| x.dist(phi[inverse[p]], p) <= lambda);
        if bad.is_none() && inverse_ok {
            return Ok(QuasiIsometry { lambda, inverse });
        }
        worst = bad.or(worst);
    }
    let (a, b) = worst.unwrap_or((0, 0));
    Err(Error::NotQuasiIsometry {
        lambda: max_lambda,
        a,
        b,
        source_dist: y.dist(a, b),
        image_dist: x.dist(phi[a], phi[b]),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct TransferReport {
    pub lambda: u32,
    pub kappa: u32,
    pub source_k: usize,
    #[serde(rename = "source_R")]
    pub source_r: u32,
    /// Every source cover removes a ball centred on the median.
    pub median_balls: bool,
    pub bound: usize,
    pub reversible: bool,
    pub certificate: StabilityCertificate,
    pub holds: bool,
}

/// Pulls cylinders back along `φ: Y → X` and certifies the result in `Y`.
pub fn transfer_cylinders(
    y: &DistTable,
    phi: &[usize],
    space: &CylinderSpace,
    cert: &StabilityCertificate,
    kappa: u32,
    max_lambda: u32,
) -> Result<TransferReport> {
    let qi = quasi_isometry(y, &space.dist, phi, max_lambda)?;
    let n = y.len();
    let balls = metric_balls(y);
    let diam = y.diameter();
    let mut cyl: Vec<FixedBitSet> = Vec::with_capacity(n * n);
    for a in 0..n {
        for b in 0..n {
            let target = space.cylinder(phi[a], phi[b]);
            let mut out = FixedBitSet::with_capacity(n);
            for q in 0..n {
                if target.contains(phi[q]) {
                    out.union_with(&balls[q][kappa.min(diam) as usize]);
                }
            }
            cyl.push(out);
        }
    }
    let reversible = (0..n).all(|a| (a + 1..n).all(|b| cyl[a * n + b] == cyl[b * n + a]));
    let median_balls = cert
        .records
        .iter()
        .all(|r| r.balls.iter().any(|b| b.kind == BallKind::Median));
    let bound = if median_balls { cert.k } else { cert.k + 1 };
    let mut cases = Vec::new();
    for a in 0..n {
        for b in 0..n {
            for c in b..n {
                let mut delta = cyl[a * n + b].clone();
                delta.symmetric_difference_with(&cyl[a * n + c]);
                let rho = Half::from_twice(
                    y.dist(a, b) as i64 + y.dist(a, c) as i64 - y.dist(b, c) as i64,
                );
                delta.intersect_with(&ball_half(y, a, rho));
                let mut shaped = Vec::new();
                if !delta.is_clear() {
                    if let Some(r) = cert.record(phi[a], phi[b], phi[c]) {
                        shaped.extend(r.balls.iter().map(|b| {
                            let kind = if b.kind == BallKind::Median {
                                BallKind::Median
                            } else {
                                BallKind::Transferred
                            };
                            (qi.inverse[b.center], kind)
                        }));
                    }
                    if !shaped.iter().any(|&(_, k)| k == BallKind::Median) {
                        shaped.push((coarse_median(y, a, b, c), BallKind::Median));
                    }
                }
                cases.push(Case {
                    x: a,
                    y: b,
                    z: c,
                    rho,
                    delta,
                    shaped,
                });
            }
        }
    }
    let lookup = |a: usize, b: usize| cyl[a * n + b].clone();
    let certificate = certify(y, &balls, cases, bound, &lookup);
    let holds = certificate.k <= bound && certificate.recheck.holds;
    Ok(TransferReport {
        lambda: qi.lambda,
        kappa,
        source_k: cert.k,
        source_r: cert.r,
        median_balls,
        bound,
        reversible,
        certificate,
        holds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cover_search_is_minimal() {
        let sets: Vec<FixedBitSet> = [vec![0, 1], vec![1, 2], vec![2, 3], vec![0, 3]]
            .iter()
            .map(|v| points_set(4, v))
            .collect();
        let target = points_set(4, &[0, 1, 2, 3]);
        assert_eq!(min_cover(&target, &sets, 3).unwrap().len(), 2);
        assert!(min_cover(&target, &sets, 1).is_none());
    }

    #[test]
    fn greedy_and_largest_families() {
        let far = |i: usize, j: usize| (i as i64 - j as i64).abs() >= 2;
        assert_eq!(greedy_family(5, &far), vec![0, 2, 4]);
        assert_eq!(largest_clique(5, &far, 10).len(), 3);
    }
}
