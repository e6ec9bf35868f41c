//! Walls induced on a subspace of a product of quasitrees, the grid bound,
//! the product systems and their refinement by bounded crossing.

use std::sync::Arc;

use fixedbitset::FixedBitSet;
use rayon::prelude::*;
use serde::Serialize;

use crate::chain::forward_graph;
use crate::dual::{ClosureConfig, DualModel};
use crate::error::{Error, Result};
use crate::geometry::{hyperbolicity_delta, weak_rough_geodesic_constant, BottleneckReport};
use crate::graph::MetricGraph;
use crate::half::Half;
use crate::metric::{DistTable, FiniteMetric};
use crate::quasitree::{build_walls, QuasitreeInstance, WallOptions};
use crate::system::{ChainSystem, SystemKind, SystemParams, SystemSpec};
use crate::verify::{
    check_gluable, check_separated, density_bound, dual_bottleneck, verify_density, DensityReport,
    GlueConfig, GlueReport, SeparationReport,
};
use crate::wall::{Origin, Wall, WallSet};

/// Crossing chains are counted up to this many walls in the pair table.
type PairTable = Vec<Vec<u16>>;

#[derive(Clone, Debug, Serialize)]
pub struct GridWitness {
    pub colors: (usize, usize),
    pub d1: Vec<usize>,
    pub d2: Vec<usize>,
    /// For each crossing pair, points of `S` in the four quarterspaces
    /// `(−,−), (+,−), (+,+), (−,+)`.
    pub certificate: Vec<(usize, usize, [usize; 4])>,
}

#[derive(Clone, Debug, Serialize)]
pub struct GridReport {
    /// Largest `min(|d1|, |d2|)` over all grids, before the floor.
    pub largest: usize,
    #[serde(rename = "L")]
    pub l: u32,
    pub complete: bool,
    pub nodes: u64,
    pub witness: Option<GridWitness>,
}

#[derive(Clone, Debug)]
pub struct ProductInstance {
    pub factors: Vec<QuasitreeInstance>,
    pub points: Vec<Vec<usize>>,
    /// Induced walls on `S`, one per (factor, factor wall) with both sides nonempty.
    pub walls: Arc<WallSet>,
    pub color: Vec<usize>,
    pub factor_wall: Vec<usize>,
    /// Inverse of `factor_wall` per factor.
    pub induced: Vec<Vec<Option<usize>>>,
    pub grid: GridReport,
    pub l: u32,
    /// An `L` asserted by the input, checked against the systems.
    pub claimed_l: Option<u32>,
    pub d1: ChainSystem,
    pub d: ChainSystem,
    pub c: ChainSystem,
    /// Longest `D`-member crossing both walls of a pair.
    pub pair_max: Arc<PairTable>,
    pub grid_budget: u64,
}

/// Pull factor walls back to `S` through the coordinate projections.
pub fn induce_walls(
    factors: &[QuasitreeInstance],
    points: &[Vec<usize>],
) -> Result<(WallSet, Vec<usize>, Vec<usize>)> {
    if points.is_empty() {
        return Err(Error::EmptyInstance);
    }
    let n = points.len();
    for p in points {
        if p.len() != factors.len() {
            return Err(Error::Invalid(format!(
                "point {p:?} needs {} coordinates",
                factors.len()
            )));
        }
        for (i, &c) in p.iter().enumerate() {
            if c >= factors[i].graph.len() {
                return Err(Error::Invalid(format!("coordinate {c} outside factor {i}")));
            }
        }
    }
    let mut walls = Vec::new();
    let (mut color, mut fwall) = (Vec::new(), Vec::new());
    for (i, f) in factors.iter().enumerate() {
        for w in f.walls.walls() {
            let mut plus = FixedBitSet::with_capacity(n);
            for (s, p) in points.iter().enumerate() {
                plus.set(s, w.is_plus(p[i]));
            }
            let prov: Vec<Origin> = w
                .origins
                .iter()
                .map(|p| Origin {
                    color: i,
                    ..p.clone()
                })
                .collect();
            if let Ok(sw) = Wall::from_plus(walls.len(), plus, prov) {
                walls.push(sw);
                color.push(i);
                fwall.push(w.id);
            }
        }
    }
    Ok((WallSet::new(n, walls), color, fwall))
}

impl ProductInstance {
    pub fn build(
        factors: Vec<(MetricGraph, u32)>,
        points: Vec<Vec<usize>>,
        opts: WallOptions,
        claimed_l: Option<u32>,
    ) -> Result<ProductInstance> {
        let factors: Vec<QuasitreeInstance> = factors
            .into_iter()
            .map(|(g, k)| build_walls(g, k, opts))
            .collect::<Result<_>>()?;
        Self::from_factors(factors, points, claimed_l, 20_000_000)
    }

    pub fn from_factors(
        factors: Vec<QuasitreeInstance>,
        points: Vec<Vec<usize>>,
        claimed_l: Option<u32>,
        grid_budget: u64,
    ) -> Result<ProductInstance> {
        let (walls, color, factor_wall) = induce_walls(&factors, &points)?;
        let walls = Arc::new(walls);
        let mut induced: Vec<Vec<Option<usize>>> =
            factors.iter().map(|f| vec![None; f.walls.len()]).collect();
        for (w, (&c, &fw)) in color.iter().zip(&factor_wall).enumerate() {
            induced[c][fw] = Some(w);
        }
        let d1 = product_system(
            &factors,
            &walls,
            &color,
            &factor_wall,
            SystemKind::D1,
            None,
            |_, _| true,
        );
        let d = product_system(
            &factors,
            &walls,
            &color,
            &factor_wall,
            SystemKind::D,
            None,
            |_, _| true,
        );
        let pair_max = Arc::new(pair_max_table(&d));
        let grid = grid_bound(&d, &color, factors.len(), grid_budget);
        let l = grid.l;
        let pm = pair_max.clone();
        let c = product_system(
            &factors,
            &walls,
            &color,
            &factor_wall,
            SystemKind::LChain,
            Some(l),
            move |a, b| pm[a][b] as u32 <= l,
        );
        Ok(ProductInstance {
            factors,
            points,
            walls,
            color,
            factor_wall,
            induced,
            grid,
            l,
            claimed_l,
            d1,
            d,
            c,
            pair_max,
            grid_budget,
        })
    }

    pub fn m(&self) -> usize {
        self.factors.len()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// `ℓ¹` sum of the factor system distances.
    pub fn dist_s(&self, s: usize, t: usize) -> u32 {
        self.factors
            .iter()
            .enumerate()
            .map(|(i, f)| {
                f.system
                    .dist_points(self.points[s][i], self.points[t][i])
                    .nodes
                    .len() as u32
            })
            .sum()
    }

    /// Chains of `D` all of whose walls cross both `h` and `k` are at most
    /// `bound` long.
    pub fn bounded_chain(&self, kind: SystemKind, bound: u32) -> ChainSystem {
        let pm = self.pair_max.clone();
        product_system(
            &self.factors,
            &self.walls,
            &self.color,
            &self.factor_wall,
            kind,
            Some(bound),
            move |a, b| pm[a][b] as u32 <= bound,
        )
    }
}

fn product_system(
    factors: &[QuasitreeInstance],
    walls: &Arc<WallSet>,
    color: &[usize],
    fwall: &[usize],
    kind: SystemKind,
    bound: Option<u32>,
    extra: impl Fn(usize, usize) -> bool + Sync,
) -> ChainSystem {
    let mut domain = FixedBitSet::with_capacity(walls.len());
    domain.insert_range(..);
    let radius = factors.iter().map(|f| f.k).collect();
    let spacing = factors.iter().map(|f| f.spacing()).collect();
    let any_ball = factors.iter().any(|f| f.options.any_ball);
    let factor_chain = (kind == SystemKind::D1).then(|| {
        (
            factors.iter().map(|f| f.walls.clone()).collect(),
            fwall.to_vec(),
        )
    });
    let spec = SystemSpec {
        kind,
        params: SystemParams {
            radius,
            spacing,
            bound,
            m: factors.len(),
            forbidden: vec![],
            any_ball,
        },
        walls: walls.clone(),
        domain,
        color: color.to_vec(),
        factor_metrics: factors.iter().map(|f| f.graph.dist_table()).collect(),
        require_chain: kind != SystemKind::D1,
        factor_chain,
    };
    // Same-color walls must be nested already in their factor.
    ChainSystem::build(spec, |a, b| {
        (color[a] != color[b] || !factors[color[a]].walls.crosses(fwall[a], fwall[b]))
            && extra(a, b)
    })
}

/// `pairMax(h, k)` for every pair the system allows together.
pub fn pair_max_table(d: &ChainSystem) -> PairTable {
    let walls = d.walls();
    let n = walls.len();
    let rows: Vec<Vec<u16>> = (0..n)
        .into_par_iter()
        .map(|a| {
            let mut row = vec![0u16; n];
            for (b, slot) in row.iter_mut().enumerate() {
                if b == a || !d.pair_ok(a, b) {
                    continue;
                }
                let mut cand = walls.crossing_row(a).clone();
                cand.intersect_with(walls.crossing_row(b));
                if cand.is_clear() {
                    continue;
                }
                let set: Vec<usize> = cand.ones().collect();
                *slot = d.longest_among(&set).nodes.len() as u16;
            }
            row
        })
        .collect();
    rows
}

/// Exact largest grid, by branch and bound over first sides.
pub fn grid_bound(d: &ChainSystem, color: &[usize], m: usize, budget: u64) -> GridReport {
    let walls = d.walls().clone();
    let mut g = GridSearch {
        d,
        walls: &walls,
        best: 0,
        best_pair: None,
        nodes: 0,
        budget,
        complete: true,
    };
    for i in 0..m {
        for j in i..m {
            let first: Vec<usize> = (0..walls.len()).filter(|&w| color[w] == i).collect();
            let mut other = FixedBitSet::with_capacity(walls.len());
            for w in (0..walls.len()).filter(|&w| color[w] == j) {
                other.insert(w);
            }
            g.color_pair(i, j, &first, other);
        }
    }
    let witness = g.best_pair.take().map(|(colors, d1, d2)| {
        let mut certificate = Vec::new();
        for &h in &d1 {
            for &k in &d2 {
                certificate.push((h, k, quarter_points(&walls, h, k)));
            }
        }
        GridWitness {
            colors,
            d1,
            d2,
            certificate,
        }
    });
    GridReport {
        largest: g.best,
        l: (g.best as u32).max(3),
        complete: g.complete,
        nodes: g.nodes,
        witness,
    }
}

/// One point of `S` in each quarterspace of two crossing walls.
pub fn quarter_points(walls: &WallSet, h: usize, k: usize) -> [usize; 4] {
    let pick = |sh: bool, sk: bool| {
        let mut q = walls.wall(h).side(sh).clone();
        q.intersect_with(walls.wall(k).side(sk));
        q.ones().next().unwrap_or(usize::MAX)
    };
    [
        pick(false, false),
        pick(true, false),
        pick(true, true),
        pick(false, true),
    ]
}

type GridPair = ((usize, usize), Vec<usize>, Vec<usize>);

struct GridSearch<'a> {
    d: &'a ChainSystem,
    walls: &'a WallSet,
    best: usize,
    best_pair: Option<GridPair>,
    nodes: u64,
    budget: u64,
    complete: bool,
}

impl GridSearch<'_> {
    fn color_pair(&mut self, i: usize, j: usize, first: &[usize], other: FixedBitSet) {
        let mut nodes: Vec<(usize, usize, bool)> = Vec::new();
        for &w in first {
            for s in [false, true] {
                nodes.push((self.walls.side_size(w, s), w, s));
            }
        }
        nodes.sort_unstable();
        let succ = forward_graph(nodes.len(), |x, y| {
            let (_, a, sa) = nodes[x];
            let (_, b, sb) = nodes[y];
            a != b && self.d.pair_ok(a, b) && self.walls.side_subset(a, sa, b, sb)
        });
        let mut stack = Vec::new();
        for v in 0..nodes.len() {
            let mut x = other.clone();
            x.intersect_with(self.walls.crossing_row(nodes[v].1));
            stack.push(v);
            self.grow((i, j), &nodes, &succ, &mut stack, succ[v].clone(), x);
            stack.pop();
        }
    }

    fn grow(
        &mut self,
        colors: (usize, usize),
        nodes: &[(usize, usize, bool)],
        succ: &[FixedBitSet],
        stack: &mut Vec<usize>,
        cand: FixedBitSet,
        x: FixedBitSet,
    ) {
        self.nodes += 1;
        if self.nodes > self.budget {
            self.complete = false;
            return;
        }
        if x.count_ones(..) <= self.best {
            return;
        }
        let d1: Vec<usize> = stack.iter().map(|&v| nodes[v].1).collect();
        if !self.d.contains_chain(&d1) {
            return;
        }
        let set: Vec<usize> = x.ones().collect();
        let side = self.d.longest_among(&set);
        self.complete &= side.complete;
        let l2 = side.nodes.len();
        if l2 <= self.best {
            return;
        }
        let here = d1.len().min(l2);
        if here > self.best {
            self.best = here;
            let mut sorted = d1.clone();
            sorted.sort_unstable();
            self.best_pair = Some((colors, sorted, side.nodes.clone()));
        }
        if d1.len() >= l2 {
            return;
        }
        for v in cand.ones() {
            let mut next = cand.clone();
            next.intersect_with(&succ[v]);
            let mut nx = x.clone();
            nx.intersect_with(self.walls.crossing_row(nodes[v].1));
            stack.push(v);
            self.grow(colors, nodes, succ, stack, next, nx);
            stack.pop();
            if !self.complete {
                return;
            }
        }
    }
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct PairViolation {
    pub s: usize,
    pub t: usize,
    pub values: Vec<u32>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SystemLemmaReport {
    pub m: usize,
    #[serde(rename = "L")]
    pub l: u32,
    pub grid: GridReport,
    pub walls: usize,
    pub points: usize,
    pub gluable_d: GlueReport,
    pub gluable_c: GlueReport,
    pub separated_c: SeparationReport,
    /// The claimed `L`, if one was given, checked as a separation constant.
    pub separated_claimed: Option<SeparationReport>,
    pub dualisable: bool,
    /// `dist_{D¹}` is the `ℓ¹` sum of the factor distances.
    pub l1_law: bool,
    pub l1_violation: Option<PairViolation>,
    /// `dist_C ≤ dist_D ≤ dist_{D¹}`.
    pub monotone: bool,
    pub monotone_violation: Option<PairViolation>,
    /// `(dist_S − m)/(2mL) ≤ dist_C ≤ dist_S`.
    pub comparison: bool,
    pub comparison_violation: Option<PairViolation>,
    pub holds: bool,
}

#[derive(Clone, Debug)]
pub struct PointTables {
    pub s: DistTable,
    pub d1: DistTable,
    pub d: DistTable,
    pub c: DistTable,
    pub complete: bool,
}

pub fn point_tables(inst: &ProductInstance) -> PointTables {
    let n = inst.len();
    let mut complete = true;
    let mut table = |sys: &ChainSystem| {
        let mut t = DistTable::new(n);
        for a in 0..n {
            for b in a + 1..n {
                let l = sys.dist_points(a, b);
                complete &= l.complete;
                t.set(a, b, l.nodes.len() as u32);
            }
        }
        t
    };
    let (d1, d, c) = (table(&inst.d1), table(&inst.d), table(&inst.c));
    let s = DistTable::from_fn(n, |a, b| inst.dist_s(a, b));
    PointTables {
        s,
        d1,
        d,
        c,
        complete,
    }
}

pub fn verify_system_lemma(inst: &ProductInstance, glue: GlueConfig) -> SystemLemmaReport {
    let m = inst.m();
    let gcfg = GlueConfig { m, ..glue };
    let gluable_d = check_gluable(&inst.d, gcfg);
    let gluable_c = check_gluable(&inst.c, gcfg);
    let separated_c = check_separated(&inst.c, inst.l);
    let separated_claimed = inst.claimed_l.map(|l| check_separated(&inst.c, l));
    let t = point_tables(inst);
    let (mut l1, mut mono, mut cmp) = (None, None, None);
    let l = inst.l;
    for a in 0..inst.len() {
        for b in a + 1..inst.len() {
            let (s, d1, d, c) = (
                t.s.dist(a, b),
                t.d1.dist(a, b),
                t.d.dist(a, b),
                t.c.dist(a, b),
            );
            let v = || PairViolation {
                s: a,
                t: b,
                values: vec![s, d1, d, c],
            };
            if d1 != s && l1.is_none() {
                l1 = Some(v());
            }
            if !(c <= d && d <= d1) && mono.is_none() {
                mono = Some(v());
            }
            if (c > s || 2 * m as u32 * l * c + (m as u32) < s) && cmp.is_none() {
                cmp = Some(v());
            }
        }
    }
    let holds = gluable_d.holds
        && gluable_c.holds
        && separated_c.holds
        && separated_claimed.as_ref().is_none_or(|r| r.holds)
        && t.complete
        && l1.is_none()
        && mono.is_none()
        && cmp.is_none();
    SystemLemmaReport {
        m,
        l,
        grid: inst.grid.clone(),
        walls: inst.walls.len(),
        points: inst.len(),
        gluable_d,
        gluable_c,
        separated_c,
        separated_claimed,
        dualisable: t.complete,
        l1_law: l1.is_none(),
        l1_violation: l1,
        monotone: mono.is_none(),
        monotone_violation: mono,
        comparison: cmp.is_none(),
        comparison_violation: cmp,
        holds,
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct DualScReport {
    pub points: usize,
    pub capped: bool,
    pub comparison: bool,
    pub comparison_violation: Option<PairViolation>,
    /// Weak rough geodesic constant of `(S, dist_C)`.
    pub weak_constant: u32,
    pub density: DensityReport,
    /// Hyperbolicity of the working dual, when small enough to compute.
    pub delta: Option<Half>,
}

/// The working dual of `C`, with the distance comparison and density.
pub fn build_dual_sc(
    inst: &ProductInstance,
    cfg: ClosureConfig,
) -> Result<(DualModel, DualScReport)> {
    let model = DualModel::build(&inst.c, cfg)?;
    let t = point_tables(inst);
    let m = inst.m() as u32;
    let mut cmp = None;
    for a in 0..inst.len() {
        for b in a + 1..inst.len() {
            let (s, c) = (t.s.dist(a, b), t.c.dist(a, b));
            if (c > s || 2 * m * inst.l * c + m < s) && cmp.is_none() {
                cmp = Some(PairViolation {
                    s: a,
                    t: b,
                    values: vec![s, c],
                });
            }
        }
    }
    let weak = weak_rough_geodesic_constant(&t.c);
    let bound = density_bound(weak, inst.l, m);
    let density = verify_density(&model, weak, inst.l, m, bound);
    let delta = if model.len() <= 120 {
        hyperbolicity_delta(&model.dist).ok()
    } else {
        None
    };
    let rep = DualScReport {
        points: model.len(),
        capped: model.stats.capped,
        comparison: cmp.is_none(),
        comparison_violation: cmp,
        weak_constant: weak,
        density,
        delta,
    };
    Ok((model, rep))
}

#[derive(Clone, Debug, Serialize)]
pub struct ColorReport {
    pub color: usize,
    pub walls: usize,
    pub gluable: GlueReport,
    pub separated: SeparationReport,
    pub dual_points: usize,
    pub capped: bool,
    pub bottleneck: BottleneckReport,
    /// Largest `d(t1,p) + d(p,t2) − d(t1,t2)` over ordered triples on factor
    /// geodesics, in the refined metric.
    pub geodesic_defect: u32,
    pub geodesic_ok: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct RefineReport {
    #[serde(rename = "K")]
    pub k: u32,
    pub colors: Vec<ColorReport>,
    /// `dist_{E'}/m ≤ dist_{E^K} ≤ dist_{E'}`.
    pub comparison: bool,
    pub comparison_violation: Option<PairViolation>,
    pub holds: bool,
}

/// The per-color refinement: walls of one factor whose induced walls
/// form members of `E^K`.
pub fn color_system(inst: &ProductInstance, i: usize, k: u32) -> ChainSystem {
    let f = &inst.factors[i];
    let map = &inst.induced[i];
    let mut domain = FixedBitSet::with_capacity(f.walls.len());
    for (w, s) in map.iter().enumerate() {
        if s.is_some() {
            domain.insert(w);
        }
    }
    let spec = SystemSpec {
        kind: SystemKind::Color,
        params: SystemParams {
            radius: vec![f.k],
            spacing: vec![f.spacing()],
            bound: Some(k),
            m: 1,
            forbidden: vec![],
            any_ball: f.options.any_ball,
        },
        walls: f.walls.clone(),
        domain,
        color: vec![0; f.walls.len()],
        factor_metrics: vec![f.graph.dist_table()],
        require_chain: true,
        factor_chain: None,
    };
    let pm = &inst.pair_max;
    let d = &inst.d;
    ChainSystem::build(spec, |a, b| match (map[a], map[b]) {
        (Some(x), Some(y)) => d.pair_ok(x, y) && pm[x][y] as u32 <= k,
        _ => false,
    })
}

pub fn refine_ek(inst: &ProductInstance, k: u32, cfg: ClosureConfig) -> Result<RefineReport> {
    let ek = inst.bounded_chain(SystemKind::KChain, k);
    let mut colors = Vec::new();
    let mut factor_tables = Vec::new();
    for i in 0..inst.m() {
        let sys = color_system(inst, i, k);
        let glue = GlueConfig {
            fast_path: true,
            ..GlueConfig::new(1)
        };
        let gluable = check_gluable(&sys, glue);
        let separated = check_separated(&sys, 0);
        let model = DualModel::build(&sys, cfg)?;
        let bottleneck = dual_bottleneck(&model, 7)?;
        let g = &inst.factors[i].graph;
        let n = g.len();
        let dt = DistTable::from_fn(n, |a, b| sys.dist_points(a, b).nodes.len() as u32);
        let mut defect = 0;
        for a in 0..n {
            for b in a + 1..n {
                let path = g.geodesic(a, b);
                for (x, &t1) in path.iter().enumerate() {
                    for (y, &p) in path.iter().enumerate().skip(x + 1) {
                        for &t2 in &path[y + 1..] {
                            let over =
                                (dt.dist(t1, p) + dt.dist(p, t2)).saturating_sub(dt.dist(t1, t2));
                            defect = defect.max(over);
                        }
                    }
                }
            }
        }
        colors.push(ColorReport {
            color: i,
            walls: sys.domain().count_ones(..),
            gluable,
            separated,
            dual_points: model.len(),
            capped: model.stats.capped,
            bottleneck,
            geodesic_defect: defect,
            geodesic_ok: defect <= 2,
        });
        factor_tables.push(dt);
    }
    let m = inst.m() as u32;
    let mut cmp = None;
    for a in 0..inst.len() {
        for b in a + 1..inst.len() {
            let e = ek.dist_points(a, b).nodes.len() as u32;
            let sum: u32 = (0..inst.m())
                .map(|i| factor_tables[i].dist(inst.points[a][i], inst.points[b][i]))
                .sum();
            if (e > sum || m * e < sum) && cmp.is_none() {
                cmp = Some(PairViolation {
                    s: a,
                    t: b,
                    values: vec![e, sum],
                });
            }
        }
    }
    let holds = cmp.is_none()
        && colors
            .iter()
            .all(|c| c.gluable.holds && c.separated.holds && c.bottleneck.holds && c.geodesic_ok);
    Ok(RefineReport {
        k,
        colors,
        comparison: cmp.is_none(),
        comparison_violation: cmp,
        holds,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct SweepReport {
    pub ks: Vec<u32>,
    /// Largest point distance per `K`.
    pub diameters: Vec<u32>,
    /// `dist_{E^K}` is pointwise nondecreasing in `K`.
    pub monotone: bool,
    pub violation: Option<PairViolation>,
}

pub fn sweep_ek(inst: &ProductInstance, ks: &[u32]) -> SweepReport {
    let n = inst.len();
    let mut ks = ks.to_vec();
    ks.sort_unstable();
    ks.dedup();
    let tables: Vec<DistTable> = ks
        .iter()
        .map(|&k| {
            let sys = inst.bounded_chain(SystemKind::KChain, k);
            DistTable::from_fn(n, |a, b| sys.dist_points(a, b).nodes.len() as u32)
        })
        .collect();
    let mut violation = None;
    for w in tables.windows(2) {
        for a in 0..n {
            for b in a + 1..n {
                if w[0].dist(a, b) > w[1].dist(a, b) && violation.is_none() {
                    violation = Some(PairViolation {
                        s: a,
                        t: b,
                        values: vec![w[0].dist(a, b), w[1].dist(a, b)],
                    });
                }
            }
        }
    }
    SweepReport {
        diameters: tables.iter().map(|t| t.diameter()).collect(),
        ks,
        monotone: violation.is_none(),
        violation,
    }
}
