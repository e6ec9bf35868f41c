//! Exhaustive verifiers for chain systems and working duals.

use fixedbitset::FixedBitSet;
use serde::Serialize;

use crate::chain::forward_graph;
use crate::dual::DualModel;
use crate::error::Result;
use crate::gate::{halfspace_gate, GatedSet};
use crate::geometry::{bottleneck_check, weak_rough_geodesic_constant, BottleneckReport};
use crate::half::Half;
use crate::metric::{DistTable, FiniteMetric};
use crate::system::ChainSystem;
use crate::ultrafilter::Ultrafilter;

#[derive(Clone, Copy, Debug, Serialize)]
pub struct GlueConfig {
    pub m: usize,
    /// Largest union size examined.
    pub chain_cap: usize,
    /// Maximum number of search nodes.
    pub budget: u64,
    /// Try dropping the last wall of the first part before searching.
    pub fast_path: bool,
}

impl GlueConfig {
    pub fn new(m: usize) -> GlueConfig {
        GlueConfig {
            m,
            chain_cap: 2 * (m + 1),
            budget: 200_000_000,
            fast_path: false,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct GlueWitness {
    pub c1: Vec<usize>,
    pub c2: Vec<usize>,
    /// The union, in chain order.
    pub union: Vec<usize>,
}

#[derive(Clone, Debug, Serialize)]
pub struct GlueReport {
    pub m: usize,
    pub chain_cap: usize,
    pub holds: bool,
    pub partial: bool,
    /// Chains examined that are unions of two members.
    pub unions: u64,
    /// Of those, the ones that were not members themselves.
    pub glued: u64,
    pub fast_path_hits: u64,
    pub counterexample: Option<GlueWitness>,
}

/// `m`-gluability: whenever two members lie on either side of each other and
/// their union is a chain, removing at most `m` walls from the union leaves
/// a member. Unions are enumerated as chains in halfspace order up to the
/// chain cap. A chain is only grown while it still splits into a member
/// prefix and a member suffix, which passes to subchains.
pub fn check_gluable(sys: &ChainSystem, cfg: GlueConfig) -> GlueReport {
    let walls = sys.walls();
    let mut nodes: Vec<(usize, usize, bool)> = Vec::new();
    for w in sys.domain().ones() {
        for s in [false, true] {
            nodes.push((walls.side_size(w, s), w, s));
        }
    }
    nodes.sort_unstable();
    let succ = forward_graph(nodes.len(), |i, j| {
        let (_, a, sa) = nodes[i];
        let (_, b, sb) = nodes[j];
        a != b && walls.side_subset(a, sa, b, sb)
    });
    let mut g = Glue {
        sys,
        cfg,
        nodes: &nodes,
        succ: &succ,
        stack: Vec::new(),
        steps: 0,
        report: GlueReport {
            m: cfg.m,
            chain_cap: cfg.chain_cap,
            holds: true,
            partial: false,
            unions: 0,
            glued: 0,
            fast_path_hits: 0,
            counterexample: None,
        },
    };
    for v in 0..nodes.len() {
        let mut cand = succ[v].clone();
        cand.grow(nodes.len());
        g.stack.push(v);
        g.grow(cand);
        g.stack.pop();
        if g.report.counterexample.is_some() || g.report.partial {
            break;
        }
    }
    g.report.holds = g.report.counterexample.is_none();
    g.report
}

struct Glue<'a> {
    sys: &'a ChainSystem,
    cfg: GlueConfig,
    nodes: &'a [(usize, usize, bool)],
    succ: &'a [FixedBitSet],
    stack: Vec<usize>,
    steps: u64,
    report: GlueReport,
}

impl Glue<'_> {
    fn walls_of(&self) -> Vec<usize> {
        self.stack.iter().map(|&i| self.nodes[i].1).collect()
    }

    fn grow(&mut self, cand: FixedBitSet) {
        self.steps += 1;
        if self.steps > self.cfg.budget {
            self.report.partial = true;
            return;
        }
        let chain = self.walls_of();
        let Some((c1, c2)) = self.cover(&chain) else {
            return;
        };
        // Each chain appears in both orientations; examine one.
        let min_pos = (0..chain.len()).min_by_key(|&i| chain[i]).unwrap();
        if chain.len() >= 2 && !self.nodes[self.stack[min_pos]].2 {
            self.examine(&chain, c1, c2);
            if self.report.counterexample.is_some() {
                return;
            }
        }
        if chain.len() == self.cfg.chain_cap {
            return;
        }
        for v in cand.ones() {
            let mut next = cand.clone();
            next.intersect_with(&self.succ[v]);
            self.stack.push(v);
            self.grow(next);
            self.stack.pop();
            if self.report.counterexample.is_some() || self.report.partial {
                return;
            }
        }
    }

    /// Split into a member prefix and a member suffix of the chain.
    fn cover(&self, chain: &[usize]) -> Option<(Vec<usize>, Vec<usize>)> {
        if chain.len() == 1 {
            return Some((chain.to_vec(), vec![]));
        }
        (1..chain.len())
            .find(|&i| self.member(&chain[..i]) && self.member(&chain[i..]))
            .map(|i| (chain[..i].to_vec(), chain[i..].to_vec()))
    }

    fn member(&self, set: &[usize]) -> bool {
        self.sys.contains_chain(set)
    }

    fn examine(&mut self, chain: &[usize], c1: Vec<usize>, c2: Vec<usize>) {
        self.report.unions += 1;
        if self.member(chain) {
            return;
        }
        self.report.glued += 1;
        if self.cfg.fast_path && !c1.is_empty() && !c2.is_empty() {
            let last = *c1.last().unwrap();
            let rest: Vec<usize> = chain.iter().copied().filter(|&w| w != last).collect();
            if self.member(&rest) {
                self.report.fast_path_hits += 1;
                return;
            }
        }
        let n = chain.len();
        for drop in 1..=self.cfg.m.min(n) {
            let mut idx: Vec<usize> = (0..drop).collect();
            loop {
                let rest: Vec<usize> = chain
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| !idx.contains(i))
                    .map(|(_, &w)| w)
                    .collect();
                if self.member(&rest) {
                    return;
                }
                // next combination
                let mut k = drop;
                while k > 0 && idx[k - 1] == n - drop + k - 1 {
                    k -= 1;
                }
                if k == 0 {
                    break;
                }
                idx[k - 1] += 1;
                for t in k..drop {
                    idx[t] = idx[t - 1] + 1;
                }
            }
        }
        self.report.counterexample = Some(GlueWitness {
            c1,
            c2,
            union: chain.to_vec(),
        });
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SeparationWitness {
    pub pair: (usize, usize),
    /// A member all of whose walls cross both walls of `pair`.
    pub crossing: Vec<usize>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SeparationReport {
    #[serde(rename = "L")]
    pub l: u32,
    pub holds: bool,
    pub pairs: u64,
    /// Longest crossing member seen.
    pub worst: usize,
    pub complete: bool,
    pub counterexample: Option<SeparationWitness>,
}

/// `L`-separation: for every two-wall member `{a, b}`, every member whose
/// walls all cross both `a` and `b` has at most `L` walls.
pub fn check_separated(sys: &ChainSystem, l: u32) -> SeparationReport {
    let walls = sys.walls();
    let mut rep = SeparationReport {
        l,
        holds: true,
        pairs: 0,
        worst: 0,
        complete: true,
        counterexample: None,
    };
    let dom: Vec<usize> = sys.domain().ones().collect();
    for (i, &a) in dom.iter().enumerate() {
        for &b in &dom[i + 1..] {
            if !sys.pair_ok(a, b) || sys.assign_tokens(&[a, b]).is_none() {
                continue;
            }
            rep.pairs += 1;
            let mut cand = walls.crossing_row(a).clone();
            cand.intersect_with(walls.crossing_row(b));
            cand.intersect_with(sys.domain());
            let count = cand.count_ones(..);
            if count <= rep.worst {
                continue;
            }
            let set: Vec<usize> = cand.ones().collect();
            let best = sys.longest_among(&set);
            rep.complete &= best.complete;
            if best.nodes.len() > rep.worst {
                rep.worst = best.nodes.len();
            }
            if best.nodes.len() > l as usize && rep.counterexample.is_none() {
                rep.counterexample = Some(SeparationWitness {
                    pair: (a, b),
                    crossing: best.nodes,
                });
            }
        }
    }
    rep.holds = rep.counterexample.is_none();
    rep
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct Failure {
    pub check: String,
    pub points: Vec<usize>,
}

#[derive(Clone, Debug, Serialize)]
pub struct MedianSuiteReport {
    pub points: usize,
    pub metric: bool,
    pub median_closed: bool,
    pub majority: bool,
    pub symmetric: bool,
    pub associative: bool,
    pub halfspace_convex: bool,
    pub halfspace_gates: bool,
    pub ball_gates: bool,
    pub interval_gates: Option<bool>,
    pub helly: bool,
    pub gate_repairs: usize,
    pub gated_sets: usize,
    pub balls: usize,
    pub failures: Vec<Failure>,
}

impl MedianSuiteReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct SuiteConfig {
    /// Check interval gates for all pairs when the model is at most this big.
    pub interval_limit: usize,
    /// Keep at most this many failures.
    pub max_failures: usize,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            interval_limit: 120,
            max_failures: 20,
        }
    }
}

/// Exhaustive median, gate, convexity and Helly checks on a working dual.
pub fn median_suite(model: &DualModel, cfg: SuiteConfig) -> Result<MedianSuiteReport> {
    let n = model.len();
    let walls = model.walls().clone();
    let mut rep = MedianSuiteReport {
        points: n,
        metric: true,
        median_closed: true,
        majority: true,
        symmetric: true,
        associative: true,
        halfspace_convex: true,
        halfspace_gates: true,
        ball_gates: true,
        interval_gates: None,
        helly: true,
        gate_repairs: 0,
        gated_sets: 0,
        balls: 0,
        failures: Vec::new(),
    };
    let fail = |rep: &mut MedianSuiteReport, check: &str, points: Vec<usize>| {
        if rep.failures.len() < cfg.max_failures {
            rep.failures.push(Failure {
                check: check.into(),
                points,
            });
        }
    };
    if let Some((a, b, c)) = model.dist.metric_violation() {
        rep.metric = false;
        fail(&mut rep, "metric", vec![a, b, c]);
    }
    let pts = &model.points;
    let d = &model.dist;

    // Median table over sorted triples.
    let idx = |a: usize, b: usize, c: usize| {
        let mut t = [a, b, c];
        t.sort_unstable();
        (t[0] * n + t[1]) * n + t[2]
    };
    let mut med = vec![u32::MAX; if n <= 400 { n * n * n } else { 0 }];
    for a in 0..n {
        for b in a..n {
            for c in b..n {
                let m = Ultrafilter::median(&pts[a], &pts[b], &pts[c]);
                // Permutations give the same votes.
                let others = [
                    Ultrafilter::median(&pts[b], &pts[a], &pts[c]),
                    Ultrafilter::median(&pts[c], &pts[b], &pts[a]),
                    Ultrafilter::median(&pts[a], &pts[c], &pts[b]),
                ];
                if others.iter().any(|o| *o != m) {
                    rep.symmetric = false;
                    fail(&mut rep, "median symmetry", vec![a, b, c]);
                }
                if a == b && m != pts[a] || b == c && m != pts[b] {
                    rep.majority = false;
                    fail(&mut rep, "median absorption", vec![a, b, c]);
                }
                // Every halfspace holding two of the points holds the median.
                let mut bad = pts[a].difference(&m);
                let ab = pts[a].difference(&pts[b]);
                bad.difference_with(&ab);
                let mut bad2 = pts[a].difference(&m);
                bad2.difference_with(&pts[a].difference(&pts[c]));
                let mut bad3 = pts[b].difference(&m);
                bad3.difference_with(&pts[b].difference(&pts[c]));
                if !bad.is_clear() || !bad2.is_clear() || !bad3.is_clear() {
                    rep.halfspace_convex = false;
                    fail(&mut rep, "halfspace convexity", vec![a, b, c]);
                }
                match model.index_of(&m) {
                    Some(i) => {
                        if !med.is_empty() {
                            med[idx(a, b, c)] = i as u32;
                        }
                    }
                    None => {
                        rep.median_closed = false;
                        fail(&mut rep, "median leaves model", vec![a, b, c]);
                    }
                }
            }
        }
    }

    // Associativity μ(μ(a,x,b),x,c) = μ(a,x,μ(b,x,c)), one x at a time.
    if rep.median_closed && !med.is_empty() {
        let mut mx = vec![0u32; n * n];
        'outer: for x in 0..n {
            for a in 0..n {
                for b in 0..n {
                    mx[a * n + b] = med[idx(a, x, b)];
                }
            }
            for a in 0..n {
                for b in 0..n {
                    let ab = mx[a * n + b] as usize;
                    let row_ab = &mx[ab * n..ab * n + n];
                    for c in 0..n {
                        let bc = mx[b * n + c] as usize;
                        if row_ab[c] != mx[a * n + bc] {
                            rep.associative = false;
                            fail(&mut rep, "median associativity", vec![a, x, b, c]);
                            break 'outer;
                        }
                    }
                }
            }
        }
    } else if med.is_empty() {
        rep.associative = false;
        fail(
            &mut rep,
            "associativity not checked: model too large",
            vec![],
        );
    }

    // Gates: halfspaces, balls and (small models) intervals.
    let check_gate = |rep: &mut MedianSuiteReport,
                      label: &str,
                      image: &[Option<usize>],
                      member: &dyn Fn(usize) -> bool|
     -> bool {
        let mut ok = true;
        for x in 0..n {
            let Some(g) = image[x] else {
                fail(rep, &format!("{label} gate leaves model"), vec![x]);
                return false;
            };
            if !member(g) {
                fail(rep, &format!("{label} gate misses its set"), vec![x, g]);
                ok = false;
            }
            if member(x) && g != x {
                fail(rep, &format!("{label} gate moves a member"), vec![x, g]);
                ok = false;
            }
            if image[g] != Some(g) {
                fail(rep, &format!("{label} gate not idempotent"), vec![x, g]);
                ok = false;
            }
        }
        for x in 0..n {
            for y in x + 1..n {
                let (gx, gy) = (image[x].unwrap(), image[y].unwrap());
                if d.dist(gx, gy) > d.dist(x, y) {
                    fail(rep, &format!("{label} gate not 1-Lipschitz"), vec![x, y]);
                    return false;
                }
            }
        }
        ok
    };

    for h in 0..walls.len() {
        for s in [false, true] {
            let image: Vec<Option<usize>> = (0..n)
                .map(|x| model.index_of(&halfspace_gate(&walls, &pts[x], h, s)))
                .collect();
            rep.gated_sets += 1;
            if !check_gate(&mut rep, "halfspace", &image, &|p| pts[p].is_plus(h) == s) {
                rep.halfspace_gates = false;
            }
        }
    }

    let diam = d.diameter();
    let mut balls: Vec<FixedBitSet> = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for c in 0..n {
        for r in 0..=diam {
            let members = model.ball(c, r);
            if !seen.insert(members.clone()) {
                continue;
            }
            let gs = model.ball_set(&members)?;
            let mut image = Vec::with_capacity(n);
            for x in 0..n {
                let raw = gs.raw_gate(&pts[x]);
                let g = match model.index_of(&raw) {
                    Some(i) => Some(i),
                    None => {
                        let (g, repairs) = gs.gate(&walls, &pts[x])?;
                        rep.gate_repairs += repairs;
                        model.index_of(&g)
                    }
                };
                image.push(g);
            }
            let mut bits = FixedBitSet::with_capacity(n);
            for &p in &members {
                bits.insert(p);
            }
            rep.gated_sets += 1;
            let set = bits.clone();
            if !check_gate(&mut rep, "ball", &image, &|p| set.contains(p)) {
                rep.ball_gates = false;
            }
            balls.push(bits);
        }
    }
    rep.balls = balls.len();

    if n <= cfg.interval_limit {
        let mut ok = true;
        for x in 0..n {
            for y in x + 1..n {
                let gs = GatedSet::hull([&pts[x], &pts[y]])?;
                let image: Vec<Option<usize>> = (0..n)
                    .map(|p| {
                        if med.is_empty() {
                            model.median(x, y, p)
                        } else {
                            Some(med[idx(x, y, p)] as usize)
                        }
                    })
                    .collect();
                rep.gated_sets += 1;
                if !check_gate(&mut rep, "interval", &image, &|p| gs.contains(&pts[p])) {
                    ok = false;
                }
            }
        }
        rep.interval_gates = Some(ok);
    }

    // Helly on triples of pairwise-intersecting balls.
    let b = balls.len();
    let mut meets = vec![FixedBitSet::with_capacity(b); b];
    for i in 0..b {
        for j in 0..b {
            if !balls[i].is_disjoint(&balls[j]) {
                meets[i].insert(j);
            }
        }
    }
    'helly: for i in 0..b {
        for j in meets[i].ones().filter(|&j| j > i) {
            let mut ij = balls[i].clone();
            ij.intersect_with(&balls[j]);
            let mut both = meets[i].clone();
            both.intersect_with(&meets[j]);
            for k in both.ones().filter(|&k| k > j) {
                if ij.is_disjoint(&balls[k]) {
                    rep.helly = false;
                    fail(&mut rep, "ball Helly", vec![i, j, k]);
                    break 'helly;
                }
            }
        }
    }
    Ok(rep)
}

#[derive(Clone, Debug, Serialize)]
pub struct DensityReport {
    /// Largest distance from a model point to the nearest ground point.
    pub max_gap: u32,
    pub farthest: usize,
    /// `3k + 4(L + m + 1)` at the given constants.
    pub bound: u32,
    pub constants: (u32, u32, u32),
    /// Weak rough geodesic constant of the ground points in the dual metric.
    pub weak_constant: u32,
    pub holds: bool,
    pub weak_holds: bool,
    pub capped: bool,
}

pub fn density_bound(k: u32, l: u32, m: u32) -> u32 {
    3 * k + 4 * (l + m + 1)
}

/// Every model point lies within `limit` of a ground point, and the ground
/// points are `k`-weakly roughly geodesic in the dual metric.
pub fn verify_density(model: &DualModel, k: u32, l: u32, m: u32, limit: u32) -> DensityReport {
    let mut ground: Vec<usize> = model.ground_point.clone();
    ground.sort_unstable();
    ground.dedup();
    let (mut gap, mut far) = (0, 0);
    for p in 0..model.len() {
        let g = ground
            .iter()
            .map(|&s| model.dist.dist(p, s))
            .min()
            .unwrap_or(0);
        if g > gap {
            gap = g;
            far = p;
        }
    }
    let sub = DistTable::from_fn(ground.len(), |a, b| model.dist.dist(ground[a], ground[b]));
    let weak = weak_rough_geodesic_constant(&sub);
    DensityReport {
        max_gap: gap,
        farthest: far,
        bound: density_bound(k, l, m),
        constants: (k, l, m),
        weak_constant: weak,
        holds: gap <= limit,
        weak_holds: weak <= k,
        capped: model.stats.capped,
    }
}

/// Bottleneck test on a working dual, with median betweenness.
pub fn dual_bottleneck(model: &DualModel, delta: u32) -> Result<BottleneckReport> {
    bottleneck_check(&model.dist, Half::from_int(delta as i64), |x, y, z| {
        model.median(x, y, z) == Some(z)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dual::ClosureConfig;
    use crate::generators;
    use crate::quasitree::{build_walls, WallOptions};

    #[test]
    fn path_duals() {
        let inst = build_walls(generators::path(30).unwrap(), 1, WallOptions::default()).unwrap();
        let g = check_gluable(&inst.system, GlueConfig::new(1));
        assert!(g.holds && !g.partial, "{g:?}");
        assert!(g.unions > 0);
        let s = check_separated(&inst.system, 0);
        assert!(s.holds);
        let model = DualModel::build(&inst.system, ClosureConfig::default()).unwrap();
        assert_eq!(model.len(), 31);
        let suite = median_suite(&model, SuiteConfig::default()).unwrap();
        assert!(suite.passed(), "{:?}", suite.failures);
        let dens = verify_density(&model, 1, 0, 1, 11);
        assert!(dens.holds && dens.bound == 11);
        assert!(dual_bottleneck(&model, 7).unwrap().holds);
    }

    #[test]
    fn singletons_glue_after_one_removal() {
        let inst = build_walls(generators::path(12).unwrap(), 1, WallOptions::default()).unwrap();
        let mut sys = inst.system.clone();
        sys.kind = crate::system::SystemKind::Singletons;
        let sys = crate::system::ChainSystem::build(
            crate::system::SystemSpec {
                kind: crate::system::SystemKind::Singletons,
                params: sys.params.clone(),
                walls: sys.walls().clone(),
                domain: sys.domain().clone(),
                color: vec![0; sys.walls().len()],
                factor_metrics: vec![inst.graph.dist_table()],
                require_chain: true,
                factor_chain: None,
            },
            |_, _| true,
        );
        assert!(check_gluable(&sys, GlueConfig::new(1)).holds);
        let g = check_gluable(&sys, GlueConfig::new(0));
        let w = g.counterexample.expect("two singletons do not glue");
        assert_eq!(w.union.len(), 2);
    }
}
