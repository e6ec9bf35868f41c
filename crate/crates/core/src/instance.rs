//! Instance files and the full verification pipeline behind the CLI.

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::cylinders::{
    CylinderConfig, CylinderReport, CylinderSpace, StabilityCertificate, MAX_POINTS,
};
use crate::dual::{ClosureConfig, DualModel};
use crate::error::{Error, Result};
use crate::generators::{Generated, ProductSpec};
use crate::geometry::BottleneckReport;
use crate::graph::{GraphJson, MetricGraph, VertexLabel};
use crate::product::{
    build_dual_sc, refine_ek, sweep_ek, verify_system_lemma, DualScReport, ProductInstance,
    RefineReport, SweepReport, SystemLemmaReport,
};
use crate::quasitree::{
    build_walls, verify_lemma, QuasitreeInstance, QuasitreeLemmaReport, WallOptions,
};
use crate::system::ChainSystem;
use crate::verify::{
    density_bound, dual_bottleneck, median_suite, verify_density, DensityReport, GlueConfig,
    MedianSuiteReport, SuiteConfig,
};

/// Deliberate damage applied after the instance is built.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Corruption {
    /// Wall pairs removed from the chain system.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub forbid: Vec<[usize; 2]>,
    /// Cylinders become this much wider neighbourhoods of intervals.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inflate: Option<u32>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GraphInstanceJson {
    #[serde(flatten)]
    pub graph: GraphJson,
    #[serde(rename = "K", default, skip_serializing_if = "Option::is_none")]
    pub k: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub corrupt: Option<Corruption>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ProductInstanceJson {
    pub factors: Vec<GraphJson>,
    #[serde(rename = "K")]
    pub k: Vec<u32>,
    pub points: Vec<Vec<VertexLabel>>,
    #[serde(rename = "L", default, skip_serializing_if = "Option::is_none")]
    pub l: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub corrupt: Option<Corruption>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum InstanceJson {
    Product(ProductInstanceJson),
    Graph(GraphInstanceJson),
}

#[derive(Clone, Debug)]
pub enum Instance {
    Graph {
        graph: MetricGraph,
        k: u32,
        corrupt: Corruption,
    },
    Product {
        spec: ProductSpec,
        ks: Vec<u32>,
        l: Option<u32>,
        corrupt: Corruption,
    },
}

impl Instance {
    pub fn generated(g: Generated, k: u32) -> Instance {
        match g {
            Generated::Graph(graph) => Instance::Graph {
                graph,
                k,
                corrupt: Corruption::default(),
            },
            Generated::Product(spec) => {
                let ks = vec![k; spec.factors.len()];
                Instance::Product {
                    spec,
                    ks,
                    l: None,
                    corrupt: Corruption::default(),
                }
            }
        }
    }

    pub fn parse(text: &str) -> Result<Instance> {
        if text.trim().is_empty() {
            return Err(Error::EmptyInstance);
        }
        Self::from_json(&serde_json::from_str(text)?)
    }

    pub fn from_json(j: &InstanceJson) -> Result<Instance> {
        match j {
            InstanceJson::Graph(g) => Ok(Instance::Graph {
                graph: MetricGraph::from_json(&g.graph)?,
                k: g.k.unwrap_or(1),
                corrupt: g.corrupt.clone().unwrap_or_default(),
            }),
            InstanceJson::Product(p) => {
                if p.factors.is_empty() {
                    return Err(Error::EmptyInstance);
                }
                if p.k.len() != p.factors.len() {
                    return Err(Error::Invalid(format!(
                        "{} factors but {} values of K",
                        p.factors.len(),
                        p.k.len()
                    )));
                }
                let factors: Vec<MetricGraph> = p
                    .factors
                    .iter()
                    .map(MetricGraph::from_json)
                    .collect::<Result<_>>()?;
                let points = p
                    .points
                    .iter()
                    .map(|pt| {
                        if pt.len() != factors.len() {
                            return Err(Error::Invalid(format!(
                                "point {pt:?} needs {} coordinates",
                                factors.len()
                            )));
                        }
                        pt.iter()
                            .zip(&factors)
                            .map(|(c, f)| {
                                f.index_of(c)
                                    .ok_or_else(|| Error::UnknownVertex(c.to_string()))
                            })
                            .collect::<Result<Vec<usize>>>()
                    })
                    .collect::<Result<_>>()?;
                Ok(Instance::Product {
                    spec: ProductSpec { factors, points },
                    ks: p.k.clone(),
                    l: p.l,
                    corrupt: p.corrupt.clone().unwrap_or_default(),
                })
            }
        }
    }

    pub fn to_json(&self) -> InstanceJson {
        let corrupt = |c: &Corruption| (c != &Corruption::default()).then(|| c.clone());
        match self {
            Instance::Graph {
                graph,
                k,
                corrupt: c,
            } => InstanceJson::Graph(GraphInstanceJson {
                graph: graph.to_json(),
                k: Some(*k),
                corrupt: corrupt(c),
            }),
            Instance::Product {
                spec,
                ks,
                l,
                corrupt: c,
            } => InstanceJson::Product(ProductInstanceJson {
                factors: spec.factors.iter().map(MetricGraph::to_json).collect(),
                k: ks.clone(),
                points: spec
                    .points
                    .iter()
                    .map(|pt| {
                        pt.iter()
                            .zip(&spec.factors)
                            .map(|(&v, f)| f.label(v).clone())
                            .collect()
                    })
                    .collect(),
                l: *l,
                corrupt: corrupt(c),
            }),
        }
    }

    pub fn corruption(&self) -> &Corruption {
        match self {
            Instance::Graph { corrupt, .. } | Instance::Product { corrupt, .. } => corrupt,
        }
    }

    /// Replace every K.
    pub fn set_k(&mut self, value: u32) {
        match self {
            Instance::Graph { k, .. } => *k = value,
            Instance::Product { ks, .. } => ks.iter_mut().for_each(|k| *k = value),
        }
    }

    /// Claim a separation constant for a product instance.
    pub fn set_l(&mut self, value: u32) {
        if let Instance::Product { l, .. } = self {
            *l = Some(value);
        }
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct RunOptions {
    pub closure: ClosureConfig,
    /// Longest chain the gluability search builds; `None` means `2(m+1)`.
    pub chain_cap: Option<usize>,
    pub epsilon: Option<u32>,
    pub seed: u64,
    pub any_ball: bool,
    /// Largest dual put through the median suite.
    pub suite_limit: usize,
    /// Largest dual put through the bottleneck check.
    pub bottleneck_limit: usize,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            closure: ClosureConfig::default(),
            chain_cap: None,
            epsilon: None,
            seed: 0,
            any_ball: false,
            suite_limit: 300,
            bottleneck_limit: 200,
        }
    }
}

impl RunOptions {
    fn glue(&self, m: usize) -> GlueConfig {
        let mut g = GlueConfig::new(m);
        if let Some(c) = self.chain_cap {
            g.chain_cap = c;
        }
        g
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub holds: bool,
    /// Reported only; does not affect the exit status.
    pub informational: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Value>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Skipped {
    pub part: String,
    pub reason: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct DualSummary {
    pub points: usize,
    pub walls: usize,
    pub diameter: u32,
    pub closure: crate::dual::ClosureStats,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifyReport {
    pub kind: &'static str,
    pub options: RunOptions,
    pub corruption: Corruption,
    pub checks: Vec<Check>,
    pub skipped: Vec<Skipped>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub quasitree: Option<QuasitreeLemmaReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub product: Option<SystemLemmaReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dual: Option<DualSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub median_suite: Option<MedianSuiteReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub density: Option<DensityReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bottleneck: Option<BottleneckReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dual_comparison: Option<DualScReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub refinement: Option<RefineReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cylinders: Option<CylinderReport>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.holds || c.informational)
    }

    pub fn failing(&self) -> Vec<&Check> {
        self.checks
            .iter()
            .filter(|c| !c.holds && !c.informational)
            .collect()
    }

    fn check(&mut self, name: &str, holds: bool, witness: Option<Value>) {
        self.checks.push(Check {
            name: name.into(),
            holds,
            informational: false,
            witness,
        });
    }

    fn info(&mut self, name: &str, holds: bool, witness: Option<Value>) {
        self.checks.push(Check {
            name: name.into(),
            holds,
            informational: true,
            witness,
        });
    }

    fn skip(&mut self, part: &str, reason: String) {
        self.skipped.push(Skipped {
            part: part.into(),
            reason,
        });
    }

    fn new(kind: &'static str, options: RunOptions, corruption: Corruption) -> Self {
        VerifyReport {
            kind,
            options,
            corruption,
            checks: Vec::new(),
            skipped: Vec::new(),
            quasitree: None,
            product: None,
            dual: None,
            median_suite: None,
            density: None,
            bottleneck: None,
            dual_comparison: None,
            refinement: None,
            sweep: None,
            cylinders: None,
        }
    }
}

fn witness<T: Serialize>(w: &Option<T>) -> Option<Value> {
    w.as_ref()
        .map(|w| serde_json::to_value(w).expect("serialisable witness"))
}

/// A built instance: the chain system whose dual carries the cylinders.
pub enum Built {
    Quasitree(Box<QuasitreeInstance>),
    Product(Box<ProductInstance>),
}

impl Built {
    pub fn system(&self) -> &ChainSystem {
        match self {
            Built::Quasitree(q) => &q.system,
            Built::Product(p) => &p.c,
        }
    }

    pub fn m(&self) -> usize {
        match self {
            Built::Quasitree(_) => 1,
            Built::Product(p) => p.m(),
        }
    }

    /// Separation constant used for cylinders: the claimed or computed L
    /// for products. Quasitree systems are 0-separated, hence 1-separated,
    /// and cylinders use 1 so that the gate-cluster radius bound applies.
    pub fn l(&self) -> u32 {
        match self {
            Built::Quasitree(_) => 1,
            Built::Product(p) => p.claimed_l.unwrap_or(p.l).max(1),
        }
    }

    pub fn colors(&self) -> Vec<usize> {
        match self {
            Built::Quasitree(q) => vec![0; q.walls.len()],
            Built::Product(p) => p.color.clone(),
        }
    }
}

pub fn build(inst: &Instance, opts: &RunOptions) -> Result<Built> {
    let wall_opts = WallOptions {
        any_ball: opts.any_ball,
        ..WallOptions::default()
    };
    let forbid: Vec<(usize, usize)> = inst
        .corruption()
        .forbid
        .iter()
        .map(|p| (p[0], p[1]))
        .collect();
    let check_walls = |sys: &ChainSystem| -> Result<()> {
        let w = sys.walls().len();
        match forbid.iter().find(|&&(a, b)| a >= w || b >= w) {
            Some(&(a, b)) => Err(Error::Invalid(format!(
                "forbidden pair ({a}, {b}) names a missing wall"
            ))),
            None => Ok(()),
        }
    };
    match inst {
        Instance::Graph { graph, k, .. } => {
            let mut q = build_walls(graph.clone(), *k, wall_opts)?;
            check_walls(&q.system)?;
            if !forbid.is_empty() {
                q.system = q.system.with_forbidden(&forbid);
            }
            Ok(Built::Quasitree(Box::new(q)))
        }
        Instance::Product { spec, ks, l, .. } => {
            let factors = spec
                .factors
                .iter()
                .cloned()
                .zip(ks.iter().copied())
                .collect();
            let mut p = ProductInstance::build(factors, spec.points.clone(), wall_opts, *l)?;
            check_walls(&p.c)?;
            if !forbid.is_empty() {
                p.c = p.c.with_forbidden(&forbid);
            }
            Ok(Built::Product(Box::new(p)))
        }
    }
}

/// Runs every lemma check that applies to the instance.
pub fn verify(inst: &Instance, opts: &RunOptions) -> Result<VerifyReport> {
    let built = build(inst, opts)?;
    let corrupt = inst.corruption().clone();
    let mut rep;
    let model;
    match &built {
        Built::Quasitree(q) => {
            rep = VerifyReport::new("quasitree", *opts, corrupt.clone());
            let lemma = verify_lemma(q, opts.glue(1));
            rep.check(
                "gluable",
                lemma.gluable.holds,
                witness(&lemma.gluable.counterexample),
            );
            rep.info("gluable_complete", !lemma.gluable.partial, None);
            rep.check(
                "separated",
                lemma.separated.holds,
                witness(&lemma.separated.counterexample),
            );
            rep.check("dualisable", lemma.dualisable, None);
            rep.check(
                "lower_bound",
                lemma.lower_holds,
                witness(&lemma.lower_violation),
            );
            rep.check(
                "upper_bound",
                lemma.upper_holds,
                witness(&lemma.upper_violation),
            );
            rep.info(
                "projected_upper_bound",
                lemma.projected_upper_holds,
                witness(&lemma.projected_upper_violation),
            );
            rep.quasitree = Some(lemma);
            model = DualModel::build(&q.system, opts.closure)?;
        }
        Built::Product(p) => {
            rep = VerifyReport::new("product", *opts, corrupt.clone());
            let m = p.m();
            let lemma = verify_system_lemma(p, opts.glue(m));
            rep.check(
                "gluable_d",
                lemma.gluable_d.holds,
                witness(&lemma.gluable_d.counterexample),
            );
            rep.check(
                "gluable",
                lemma.gluable_c.holds,
                witness(&lemma.gluable_c.counterexample),
            );
            rep.check(
                "separated",
                lemma.separated_c.holds,
                witness(&lemma.separated_c.counterexample),
            );
            if let Some(s) = &lemma.separated_claimed {
                rep.check("separated_claimed", s.holds, witness(&s.counterexample));
            }
            rep.check("dualisable", lemma.dualisable, None);
            rep.check("l1_law", lemma.l1_law, witness(&lemma.l1_violation));
            rep.check(
                "monotone",
                lemma.monotone,
                witness(&lemma.monotone_violation),
            );
            rep.check(
                "comparison",
                lemma.comparison,
                witness(&lemma.comparison_violation),
            );
            rep.product = Some(lemma);
            let (dual, sc) = build_dual_sc(p, opts.closure)?;
            rep.check(
                "dual_comparison",
                sc.comparison,
                witness(&sc.comparison_violation),
            );
            rep.dual_comparison = Some(sc);
            if p.len() <= 200 {
                let e = refine_ek(p, p.l, opts.closure)?;
                rep.check("refinement", e.holds, witness(&e.comparison_violation));
                rep.refinement = Some(e);
                rep.sweep = Some(sweep_ek(p, &[1, 2, 3, 5, 8]));
            } else {
                rep.skip("refinement", format!("{} points exceed 200", p.len()));
            }
            model = dual;
        }
    }

    use crate::metric::FiniteMetric;
    rep.dual = Some(DualSummary {
        points: model.len(),
        walls: model.walls().len(),
        diameter: model.dist.diameter(),
        closure: model.stats.clone(),
    });
    rep.info("closure_complete", !model.stats.capped, None);
    if model.len() <= opts.suite_limit {
        let suite = median_suite(&model, SuiteConfig::default())?;
        let first = suite.failures.first().map(|f| json!(f));
        rep.check("median_suite", suite.passed(), first);
        rep.median_suite = Some(suite);
    } else {
        rep.skip(
            "median_suite",
            format!("{} dual points exceed {}", model.len(), opts.suite_limit),
        );
    }
    let m = built.m() as u32;
    if let Built::Quasitree(_) = &built {
        let d = verify_density(&model, 1, 0, m, density_bound(1, 0, m));
        rep.check(
            "density",
            d.holds,
            Some(json!({"farthest": d.farthest, "gap": d.max_gap})).filter(|_| !d.holds),
        );
        rep.density = Some(d);
        if model.len() <= opts.bottleneck_limit {
            let b = dual_bottleneck(&model, 3 * m + 4)?;
            rep.check(
                "bottleneck",
                b.holds,
                witness(&b.worst).filter(|_| !b.holds),
            );
            rep.bottleneck = Some(b);
        } else {
            rep.skip(
                "bottleneck",
                format!(
                    "{} dual points exceed {}",
                    model.len(),
                    opts.bottleneck_limit
                ),
            );
        }
    }
    if model.len() <= MAX_POINTS && !model.stats.capped {
        let (_, cyl) = cylinders(&built, &model, &corrupt, opts)?;
        cylinder_checks(&mut rep, &cyl);
        rep.cylinders = Some(cyl);
    } else {
        rep.skip(
            "cylinders",
            format!(
                "dual has {} points (limit {MAX_POINTS}) or hit the closure cap",
                model.len()
            ),
        );
    }
    Ok(rep)
}

fn cylinder_checks(rep: &mut VerifyReport, c: &CylinderReport) {
    rep.check("gate_diameter", c.gate_diameter_holds, None);
    rep.check("gates_gated", c.gates_gated, None);
    rep.check(
        "nonseparation",
        c.nonseparation_holds,
        witness(&c.nonseparation_witness),
    );
    rep.check(
        "few_projections",
        c.projections_holds,
        witness(&c.projections_witness),
    );
    rep.check(
        "gate_clusters",
        c.clusters_holds,
        witness(&c.clusters_witness),
    );
    rep.check(
        "cylinder_contains_geodesics",
        c.contains_geodesics,
        witness(&c.containment_witness),
    );
    rep.check("cylinder_theta", c.theta_holds, witness(&c.theta_witness));
    rep.check("cylinder_reversible", c.reversible, None);
    rep.info("epsilon_at_least_measured", !c.epsilon_warning, None);
}

/// Cylinder space of the dual model.
pub fn cylinders(
    built: &Built,
    model: &DualModel,
    corrupt: &Corruption,
    opts: &RunOptions,
) -> Result<(CylinderSpace, CylinderReport)> {
    let mut cfg = CylinderConfig::new(built.m(), built.l());
    cfg.epsilon = opts.epsilon;
    cfg.seed = opts.seed;
    cfg.inflate = corrupt.inflate;
    CylinderSpace::build(model, built.system(), &built.colors(), cfg)
}

/// The dual model the cylinders live on.
pub fn dual_model(built: &Built, opts: &RunOptions) -> Result<DualModel> {
    DualModel::build(built.system(), opts.closure)
}

#[derive(Clone, Debug, Serialize)]
pub struct CertificateJson {
    pub k: usize,
    #[serde(rename = "R")]
    pub r: u32,
    pub epsilon: u32,
    pub theta: u32,
    pub cylinders: CylinderReport,
    pub certificate: StabilityCertificate,
    pub failures: Vec<String>,
}

/// Builds cylinders on the dual and certifies their stability.
pub fn certify(inst: &Instance, opts: &RunOptions) -> Result<(CylinderSpace, CertificateJson)> {
    let built = build(inst, opts)?;
    let model = dual_model(&built, opts)?;
    if model.stats.capped {
        return Err(Error::Invalid(format!(
            "dual hit the closure cap of {}",
            opts.closure.cap
        )));
    }
    let (space, report) = cylinders(&built, &model, inst.corruption(), opts)?;
    let cert = space.certify();
    let mut failures = Vec::new();
    if !cert.recheck.holds {
        failures.push(format!(
            "set equation fails on {} triples",
            cert.recheck.failures
        ));
    }
    if cert.k > cert.max_k {
        failures.push(format!("needs {} balls, budget {}", cert.k, cert.max_k));
    }
    if !report.lemmas_hold() {
        failures.push("cylinder lemma chain fails".into());
    }
    if !report.axioms_hold() {
        failures.push("cylinder axioms fail".into());
    }
    Ok((
        space,
        CertificateJson {
            k: cert.k,
            r: cert.r,
            epsilon: report.epsilon,
            theta: report.theta,
            cylinders: report,
            certificate: cert,
            failures,
        },
    ))
}
