//! Walls from ball complements of a graph and the disparate chain system.

use std::sync::Arc;

use fixedbitset::FixedBitSet;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::hyperbolicity_delta;
use crate::graph::MetricGraph;
use crate::half::Half;
use crate::metric::FiniteMetric;
use crate::system::{ChainSystem, SystemKind, SystemParams, SystemSpec};
use crate::verify::{check_gluable, check_separated, GlueConfig, GlueReport, SeparationReport};
use crate::wall::{bitset_from_mask, dedup_walls, Origin, Variant, Wall, WallSet};

/// Whether `K > 100δ` holds, the regime the constants were derived for.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    Large,
    Relaxed,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct WallOptions {
    /// Emit the `C ∪ B` variant as well as `C`.
    pub with_ball: bool,
    /// Same-color balls must have centres at least `spacing_factor · K` apart.
    pub spacing_factor: u32,
    pub color: usize,
    /// A wall may be defined by any ball producing it, not just the one
    /// with the smallest centre.
    pub any_ball: bool,
}

impl Default for WallOptions {
    fn default() -> Self {
        WallOptions {
            with_ball: true,
            spacing_factor: 10,
            color: 0,
            any_ball: false,
        }
    }
}

#[derive(Clone, Debug)]
pub struct QuasitreeInstance {
    pub graph: MetricGraph,
    pub delta: Half,
    pub k: u32,
    pub regime: Regime,
    pub options: WallOptions,
    pub walls: Arc<WallSet>,
    pub system: ChainSystem,
}

impl QuasitreeInstance {
    pub fn spacing(&self) -> u32 {
        self.options.spacing_factor * self.k
    }
}

/// Both bipartitions from every complementary component of every radius-`k`
/// ball that disconnects the graph. Balls whose complement is connected or
/// empty are skipped.
pub fn ball_walls(g: &MetricGraph, k: u32, opts: WallOptions) -> Vec<Wall> {
    let n = g.len();
    let mut raw = Vec::new();
    for c in 0..n {
        let ball = g.ball(c, k);
        let keep: Vec<bool> = ball.iter().map(|&b| !b).collect();
        let comps = g.components(&keep);
        if comps.len() < 2 {
            continue;
        }
        for (i, comp) in comps.iter().enumerate() {
            let mut side = vec![false; n];
            for &v in comp {
                side[v] = true;
            }
            let prov = |variant| Origin {
                color: opts.color,
                center: c,
                radius: k,
                component: i,
                variant,
            };
            if let Ok(w) =
                Wall::from_plus(0, bitset_from_mask(&side), vec![prov(Variant::Component)])
            {
                raw.push(w);
            }
            if opts.with_ball {
                let with: Vec<bool> = (0..n).map(|v| side[v] || ball[v]).collect();
                if let Ok(w) =
                    Wall::from_plus(0, bitset_from_mask(&with), vec![prov(Variant::WithBall)])
                {
                    raw.push(w);
                }
            }
        }
    }
    dedup_walls(raw)
}

pub fn build_walls(g: MetricGraph, k: u32, opts: WallOptions) -> Result<QuasitreeInstance> {
    if k == 0 {
        return Err(Error::Invalid("K must be positive".into()));
    }
    let delta = hyperbolicity_delta(&g)?;
    let walls = ball_walls(&g, k, opts);
    if walls.is_empty() {
        return Err(Error::DegenerateK(k));
    }
    let walls = Arc::new(WallSet::new(g.len(), walls));
    let regime = if Half::from_int(k as i64) > delta.times(100) {
        Regime::Large
    } else {
        Regime::Relaxed
    };
    let system = disparate_system(&g, &walls, k, opts);
    Ok(QuasitreeInstance {
        graph: g,
        delta,
        k,
        regime,
        options: opts,
        walls,
        system,
    })
}

/// Chains whose walls can be defined by pairwise far-apart balls.
pub fn disparate_system(
    g: &MetricGraph,
    walls: &Arc<WallSet>,
    k: u32,
    opts: WallOptions,
) -> ChainSystem {
    let mut domain = FixedBitSet::with_capacity(walls.len());
    domain.insert_range(..);
    let spec = SystemSpec {
        kind: SystemKind::Disparate,
        params: SystemParams {
            radius: vec![k],
            spacing: vec![opts.spacing_factor * k],
            bound: None,
            m: 1,
            forbidden: vec![],
            any_ball: opts.any_ball,
        },
        walls: walls.clone(),
        domain,
        color: vec![0; walls.len()],
        factor_metrics: vec![g.dist_table()],
        require_chain: true,
        factor_chain: None,
    };
    ChainSystem::build(spec, |_, _| true)
}

/// The defining balls (some choice of them, with `any_ball`) have pairwise
/// centre distance at least the spacing.
pub fn is_disparate(inst: &QuasitreeInstance, walls: &[usize]) -> bool {
    let spacing = inst.spacing();
    let d = inst.graph.dist_table();
    let centers: Vec<Vec<usize>> = walls
        .iter()
        .map(|&w| {
            let mut c: Vec<usize> = inst
                .walls
                .wall(w)
                .origins
                .iter()
                .map(|p| p.center)
                .collect();
            c.sort_unstable();
            c.dedup();
            if !inst.options.any_ball {
                c.truncate(1);
            }
            c
        })
        .collect();
    fn go(
        centers: &[Vec<usize>],
        chosen: &mut Vec<usize>,
        d: &crate::metric::DistTable,
        spacing: u32,
    ) -> bool {
        let i = chosen.len();
        if i == centers.len() {
            return true;
        }
        for &c in &centers[i] {
            if chosen.iter().all(|&p| d.dist(p, c) >= spacing) {
                chosen.push(c);
                if go(centers, chosen, d, spacing) {
                    return true;
                }
                chosen.pop();
            }
        }
        false
    }
    go(&centers, &mut Vec::new(), d, spacing)
}

#[derive(Clone, Debug, Serialize)]
pub struct BoundWitness {
    pub s: usize,
    pub t: usize,
    pub dist: u32,
    pub system_dist: u32,
    pub chain: Vec<usize>,
}

#[derive(Clone, Debug, Serialize)]
pub struct QuasitreeLemmaReport {
    pub vertices: usize,
    pub walls: usize,
    pub delta: Half,
    #[serde(rename = "K")]
    pub k: u32,
    pub regime: Regime,
    pub gluable: GlueReport,
    pub separated: SeparationReport,
    /// Every pair has a finite, exactly computed system distance.
    pub dualisable: bool,
    pub pairs: usize,
    /// `dist_D(s,t) ≥ dist(s,t)/20K − 1` for all pairs.
    pub lower_holds: bool,
    pub lower_violation: Option<BoundWitness>,
    /// `dist_D(s,t) ≤ ⌈dist(s,t)/10K⌉` for all pairs.
    pub upper_holds: bool,
    pub upper_violation: Option<BoundWitness>,
    pub max_ratio_gap: f64,
    /// `dist_D(s,t) ≤ ⌊dist(s,t)/8K⌋ + 1`, which follows from the defining
    /// balls meeting a geodesic. Informational; not part of `holds`.
    pub projected_upper_holds: bool,
    pub projected_upper_violation: Option<BoundWitness>,
    pub holds: bool,
}

/// 1-gluability, 0-separation, dualisability and both distance bounds.
pub fn verify_lemma(inst: &QuasitreeInstance, glue: GlueConfig) -> QuasitreeLemmaReport {
    let gluable = check_gluable(&inst.system, glue);
    let separated = check_separated(&inst.system, 0);
    let n = inst.graph.len();
    let d = inst.graph.dist_table();
    let k = inst.k;
    let (mut lower, mut upper, mut projected) = (None, None, None);
    let mut complete = true;
    let mut gap: f64 = 0.0;
    let mut pairs = 0;
    for s in 0..n {
        for t in s + 1..n {
            pairs += 1;
            let l = inst.system.dist_points(s, t);
            complete &= l.complete;
            let dd = d.dist(s, t);
            let sd = l.nodes.len() as u32;
            let w = || BoundWitness {
                s,
                t,
                dist: dd,
                system_dist: sd,
                chain: l.nodes.clone(),
            };
            if 20 * k * (sd + 1) < dd && lower.is_none() {
                lower = Some(w());
            }
            if sd > dd.div_ceil(10 * k) && upper.is_none() {
                upper = Some(w());
            }
            if sd > dd / (8 * k) + 1 && projected.is_none() {
                projected = Some(w());
            }
            gap = gap.max(sd as f64 - dd as f64 / (10 * k) as f64);
        }
    }
    let holds = gluable.holds && separated.holds && complete && lower.is_none() && upper.is_none();
    QuasitreeLemmaReport {
        vertices: n,
        walls: inst.walls.len(),
        delta: inst.delta,
        k,
        regime: inst.regime,
        gluable,
        separated,
        dualisable: complete,
        pairs,
        lower_holds: lower.is_none(),
        lower_violation: lower,
        upper_holds: upper.is_none(),
        upper_violation: upper,
        max_ratio_gap: gap,
        projected_upper_holds: projected.is_none(),
        projected_upper_violation: projected,
        holds,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators;

    fn cut(inst: &QuasitreeInstance, j: usize) -> usize {
        let n = inst.graph.len();
        let want = bitset_from_mask(&(0..n).map(|v| v > j).collect::<Vec<_>>());
        inst.walls
            .walls()
            .iter()
            .position(|w| w.plus == want)
            .expect("cut present")
    }

    #[test]
    fn path_ten() {
        let inst = build_walls(generators::path(10).unwrap(), 1, WallOptions::default()).unwrap();
        // centre 5: components {0..3} and {7..10}
        let a = cut(&inst, 3);
        let b = cut(&inst, 6);
        assert!(inst.walls.wall(a).origins.iter().any(|p| p.center == 5));
        assert!(inst.walls.wall(b).origins.iter().any(|p| p.center == 5));
        assert_eq!(inst.regime, Regime::Large);
        // cuts 0..=9, one wall each
        assert_eq!(inst.walls.len(), 10);
    }

    #[test]
    fn path_hundred_cut_origins() {
        let inst = build_walls(generators::path(100).unwrap(), 1, WallOptions::default()).unwrap();
        assert_eq!(inst.walls.len(), 100);
        let c0 = cut(&inst, 0);
        let centers: Vec<usize> = inst
            .walls
            .wall(c0)
            .origins
            .iter()
            .map(|p| p.center)
            .collect();
        assert_eq!(centers, vec![2, 2]);
        let c50 = cut(&inst, 50);
        let mut centers: Vec<usize> = inst
            .walls
            .wall(c50)
            .origins
            .iter()
            .map(|p| p.center)
            .collect();
        centers.dedup();
        assert_eq!(centers, vec![49, 52]);
        let a = cut(&inst, 8);
        let b = cut(&inst, 23);
        assert!(is_disparate(&inst, &[a, b]));
        assert!(is_disparate(&inst, &[a]));
        let d = inst.system.dist_points(0, 100);
        assert_eq!(d.nodes.len(), 10);
        assert!(inst.system.contains(&d.nodes));
    }

    #[test]
    fn star_and_complete() {
        // The ball at the centre covers everything; each leaf ball splits
        // off the other leaves.
        let inst = build_walls(generators::star(3).unwrap(), 1, WallOptions::default()).unwrap();
        assert_eq!(inst.walls.len(), 3);
        let k4 =
            MetricGraph::from_edges(4, &[(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]).unwrap();
        assert!(matches!(
            build_walls(k4, 1, WallOptions::default()),
            Err(Error::DegenerateK(1))
        ));
    }

    #[test]
    fn same_ball_is_not_disparate() {
        let inst = build_walls(generators::path(30).unwrap(), 1, WallOptions::default()).unwrap();
        // centre 10 defines cuts 8 and 11; cut 11 also comes from 13, and 13
        // is too close to every centre of cut 8 (7 and 10).
        assert!(!is_disparate(&inst, &[cut(&inst, 8), cut(&inst, 11)]));
    }

    #[test]
    fn path_lemma() {
        let inst = build_walls(generators::path(100).unwrap(), 1, WallOptions::default()).unwrap();
        let rep = verify_lemma(&inst, GlueConfig::new(1));
        assert!(rep.holds, "{rep:?}");
    }

    #[test]
    fn any_ball_breaks_gluing() {
        let opts = WallOptions {
            any_ball: true,
            ..WallOptions::default()
        };
        let inst = build_walls(generators::path(30).unwrap(), 1, opts).unwrap();
        let g = check_gluable(&inst.system, GlueConfig::new(1));
        assert!(!g.holds);
        // Both halves are disparate, but no single removal fixes the union.
        let w = g.counterexample.unwrap();
        assert_eq!(w.union.len(), 4);
    }
}
