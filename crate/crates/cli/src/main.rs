use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use medianwall::dual::ClosureConfig;
use medianwall::generators::generate;
use medianwall::instance::{self, Instance, RunOptions};

#[derive(Parser)]
#[command(
    name = "medianwall",
    version,
    about = "Walls, median duals and stable cylinders on finite graphs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write an instance file from a generator spec such as `path(100)`.
    Generate {
        spec: String,
        #[arg(long = "K", default_value_t = 1)]
        k: u32,
        /// Claimed separation constant for product instances.
        #[arg(long = "L")]
        l: Option<u32>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run every lemma check that applies; exit 1 if one fails.
    Verify(Run),
    /// Certify global stability of the cylinders on the dual.
    Cylinders(Run),
    /// Write DOT pictures of the dual, one interval and one triple.
    ExportDot(Run),
}

#[derive(Args)]
struct Run {
    #[arg(
        long,
        conflicts_with = "generate",
        required_unless_present = "generate"
    )]
    instance: Option<PathBuf>,
    #[arg(long)]
    generate: Option<String>,
    #[arg(long = "K")]
    k: Option<u32>,
    #[arg(long = "L")]
    l: Option<u32>,
    #[arg(long)]
    epsilon: Option<u32>,
    #[arg(long, default_value_t = 2000, value_parser = clap::value_parser!(u64).range(1..))]
    closure_cap: u64,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    chain_cap: Option<u64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// A wall may use any of its defining balls.
    #[arg(long)]
    any_ball: bool,
    /// Report or certificate file.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Directory for DOT files.
    #[arg(long)]
    dot: Option<PathBuf>,
    /// Pair `x,y` of dual points for the interval picture.
    #[arg(long, value_delimiter = ',', num_args = 2)]
    pair: Option<Vec<usize>>,
    /// Triple `x,y,z` of dual points for the triple picture.
    #[arg(long, value_delimiter = ',', num_args = 3)]
    triple: Option<Vec<usize>>,
}

impl Run {
    fn load(&self) -> anyhow::Result<Instance> {
        let mut inst = match (&self.instance, &self.generate) {
            (Some(path), _) => {
                let text = fs::read_to_string(path)
                    .with_context(|| format!("reading {}", path.display()))?;
                Instance::parse(&text).with_context(|| format!("parsing {}", path.display()))?
            }
            (None, Some(spec)) => Instance::generated(generate(spec)?, 1),
            (None, None) => bail!("give --instance or --generate"),
        };
        if let Some(k) = self.k {
            if k == 0 {
                bail!("K must be positive");
            }
            inst.set_k(k);
        }
        if let Some(l) = self.l {
            inst.set_l(l);
        }
        Ok(inst)
    }

    fn options(&self) -> RunOptions {
        RunOptions {
            closure: ClosureConfig {
                cap: self.closure_cap as usize,
                ..ClosureConfig::default()
            },
            chain_cap: self.chain_cap.map(|c| c as usize),
            epsilon: self.epsilon,
            seed: self.seed,
            any_ball: self.any_ball,
            ..RunOptions::default()
        }
    }
}

fn write(out: Option<&Path>, text: &str) -> anyhow::Result<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn json<T: serde::Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serialisable");
    s.push('\n');
    s
}

fn write_dot(dir: &Path, name: &str, text: &str) -> anyhow::Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let p = dir.join(name);
    fs::write(&p, text).with_context(|| format!("writing {}", p.display()))
}

/// Lemma failures are exit 1; everything that goes wrong before a check
/// can run is exit 2.
enum Outcome {
    Pass,
    Fail,
}

fn verify(run: &Run) -> anyhow::Result<Outcome> {
    let inst = run.load()?;
    let rep = instance::verify(&inst, &run.options())?;
    if let Some(p) = &run.out {
        write(Some(p), &json(&rep))?;
    }
    for c in &rep.checks {
        let status = match (c.holds, c.informational) {
            (true, _) => "PASS",
            (false, false) => "FAIL",
            (false, true) => "NOTE",
        };
        match &c.witness {
            Some(w) if !c.holds => println!("{status} {}: {w}", c.name),
            _ => println!("{status} {}", c.name),
        }
    }
    for s in &rep.skipped {
        println!("SKIP {}: {}", s.part, s.reason);
    }
    Ok(if rep.passed() {
        Outcome::Pass
    } else {
        Outcome::Fail
    })
}

fn cylinders(run: &Run) -> anyhow::Result<Outcome> {
    let inst = run.load()?;
    let (space, cert) = instance::certify(&inst, &run.options())?;
    write(run.out.as_deref(), &json(&cert))?;
    if let Some(dir) = &run.dot {
        let (x, y, z) = pick_triple(run, &cert.certificate, space.len());
        write_dot(
            dir,
            "triple.dot",
            &space.triple_dot(x, y, z, &cert.certificate),
        )?;
    }
    eprintln!(
        "k = {} R = {} epsilon = {} theta = {} ({} of {} triples empty or covered by median and cluster balls)",
        cert.k,
        cert.r,
        cert.epsilon,
        cert.theta,
        cert.certificate.shaped + cert.certificate.empty,
        cert.certificate.triples
    );
    for f in &cert.failures {
        eprintln!("FAIL {f}");
    }
    Ok(if cert.failures.is_empty() {
        Outcome::Pass
    } else {
        Outcome::Fail
    })
}

fn pick_triple(
    run: &Run,
    cert: &medianwall::cylinders::StabilityCertificate,
    n: usize,
) -> (usize, usize, usize) {
    if let Some(t) = &run.triple {
        return (t[0], t[1], t[2]);
    }
    match cert.records.first() {
        Some(r) => (r.x, r.y, r.z),
        None => (0, n / 2, n - 1),
    }
}

fn export_dot(run: &Run) -> anyhow::Result<Outcome> {
    let Some(dir) = &run.dot else {
        bail!("export-dot needs --dot <dir>")
    };
    let inst = run.load()?;
    let opts = run.options();
    let built = instance::build(&inst, &opts)?;
    let model = instance::dual_model(&built, &opts)?;
    write_dot(dir, "dual.dot", &model.to_dot("dual", |s| format!("s{s}")))?;
    if model.len() > medianwall::cylinders::MAX_POINTS || model.stats.capped {
        eprintln!("dual has {} points; only dual.dot written", model.len());
        return Ok(Outcome::Pass);
    }
    let (space, _) = instance::cylinders(&built, &model, inst.corruption(), &opts)?;
    let n = space.len();
    for p in run.pair.iter().flatten().chain(run.triple.iter().flatten()) {
        if *p >= n {
            bail!("dual point {p} out of range (dual has {n} points)");
        }
    }
    let (x, y) = match &run.pair {
        Some(p) => (p[0], p[1]),
        None => (model.ground_point[0], *model.ground_point.last().unwrap()),
    };
    write_dot(dir, "interval.dot", &space.pair_dot(x, y))?;
    let cert = space.certify();
    let (x, y, z) = pick_triple(run, &cert, n);
    write_dot(dir, "triple.dot", &space.triple_dot(x, y, z, &cert))?;
    Ok(Outcome::Pass)
}

fn run(cli: Cli) -> anyhow::Result<Outcome> {
    match cli.command {
        Command::Generate { spec, k, l, out } => {
            if k == 0 {
                bail!("K must be positive");
            }
            let mut inst = Instance::generated(generate(&spec)?, k);
            if let Some(l) = l {
                inst.set_l(l);
            }
            write(out.as_deref(), &json(&inst.to_json()))?;
            Ok(Outcome::Pass)
        }
        Command::Verify(r) => verify(&r),
        Command::Cylinders(r) => cylinders(&r),
        Command::ExportDot(r) => export_dot(&r),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = std::env::var("MEDIANWALL_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
    {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build_global();
    }
    match run(cli) {
        Ok(Outcome::Pass) => ExitCode::SUCCESS,
        Ok(Outcome::Fail) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
