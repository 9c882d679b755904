//! `hvlb`: generate task graphs, schedule them, reproduce the experiments and
//! draw Gantt charts.
//!
//! Exit status: 0 success, 1 usage or input error, 2 scheduling failure,
//! 3 internal invariant breach.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context as _};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use hvlb_core::experiment::{self, ExperimentConfig, ExperimentId};
use hvlb_core::graph::{self, generate_random, measure_ccr, GeneratorParams};
use hvlb_core::network::CompRounding;
use hvlb_core::scheduler::{schedule_sweep, AlphaGrid, Schedule, SweepResult};
use hvlb_core::{fixtures, gantt, metrics, verify, Error, Network, TaskGraph, Topology, Variant};

#[derive(Parser)]
#[command(
    name = "hvlb",
    version,
    about = "Contention-aware list scheduling of stream-processing task graphs"
)]
struct Cli {
    /// Worker threads for sweeps and experiments.
    #[arg(long, global = true, env = "HVLB_WORKERS")]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random task graph.
    Generate(GenerateArgs),
    /// Schedule a task graph and write schedule, metrics, chart and curve.
    Schedule(ScheduleArgs),
    /// Reproduce one of the experiments.
    Experiment(ExperimentArgs),
    /// Draw a schedule file as a Gantt chart.
    Gantt(GanttArgs),
    /// Check a graph, a topology and optionally a schedule.
    Validate(ValidateArgs),
}

#[derive(Args)]
struct NetworkArgs {
    /// Topology file; the bundled three-processor network by default.
    #[arg(long)]
    topology: Option<PathBuf>,
    /// Comma-separated processor rates overriding the topology's.
    #[arg(long, value_delimiter = ',')]
    rates: Option<Vec<f64>>,
    /// Round computation times half up to integers.
    #[arg(long)]
    round: bool,
}

impl NetworkArgs {
    fn topology(&self) -> anyhow::Result<Topology> {
        let mut t = match &self.topology {
            Some(p) => Topology::load(p)?,
            None => fixtures::example_topology(),
        };
        if let Some(r) = &self.rates {
            if r.len() != t.processors.len() {
                return Err(Error::Parameter(format!(
                    "{} rates for {} processors",
                    r.len(),
                    t.processors.len()
                ))
                .into());
            }
            t = t.with_rates(r);
        }
        if self.round {
            t = t.with_rounding(CompRounding::HalfUp);
        }
        Ok(t)
    }
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long, default_value_t = 20)]
    tasks: usize,
    #[arg(long, default_value_t = 2)]
    max_in: usize,
    #[arg(long, default_value_t = 3)]
    max_out: usize,
    #[arg(long, default_value_t = 2)]
    min_entry: usize,
    #[arg(long, default_value_t = 2)]
    min_exit: usize,
    #[arg(long, default_value_t = 5)]
    weight_min: u32,
    #[arg(long, default_value_t = 20)]
    weight_max: u32,
    #[arg(long, default_value_t = 1.0)]
    ccr: f64,
    /// Drop the out-degree ordering constraint.
    #[arg(long)]
    unconstrained: bool,
    #[arg(long)]
    layers: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    network: NetworkArgs,
    /// Output file; stdout when absent.
    #[arg(long, short)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    HsvCc,
    HvlbCcA,
    HvlbCcB,
    HvlbCcBLinear,
}

impl From<VariantArg> for Variant {
    fn from(v: VariantArg) -> Variant {
        match v {
            VariantArg::HsvCc => Variant::HsvCc,
            VariantArg::HvlbCcA => Variant::HvlbCcA,
            VariantArg::HvlbCcB => Variant::HvlbCcB,
            VariantArg::HvlbCcBLinear => Variant::HvlbCcBLinearDepth,
        }
    }
}

#[derive(Args)]
struct ScheduleArgs {
    #[arg(long)]
    graph: PathBuf,
    #[command(flatten)]
    network: NetworkArgs,
    #[arg(long, value_enum, default_value = "hvlb-cc-a")]
    variant: VariantArg,
    /// Single alpha instead of a sweep.
    #[arg(long, conflicts_with_all = ["alpha_start", "alpha_stop", "alpha_step"])]
    alpha: Option<f64>,
    #[arg(long, default_value_t = 0.0)]
    alpha_start: f64,
    #[arg(long, default_value_t = 20.0)]
    alpha_stop: f64,
    #[arg(long, default_value_t = 0.01)]
    alpha_step: f64,
    /// Output directory.
    #[arg(long, short)]
    out: PathBuf,
}

#[derive(Args)]
struct ExperimentArgs {
    /// exp1 .. exp5; may instead come from the config file.
    id: Option<String>,
    /// TOML file overriding any default setting.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, short)]
    out: Option<PathBuf>,
    #[arg(long)]
    graphs: Option<usize>,
    #[arg(long)]
    alpha_step: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Print the effective configuration and exit.
    #[arg(long)]
    print_config: bool,
}

#[derive(Args)]
struct GanttArgs {
    #[arg(long)]
    schedule: PathBuf,
    /// SVG output; an ASCII chart goes to stdout when absent.
    #[arg(long, short)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = 80)]
    columns: usize,
}

#[derive(Args)]
struct ValidateArgs {
    #[arg(long)]
    graph: Option<PathBuf>,
    #[arg(long)]
    topology: Option<PathBuf>,
    #[arg(long, requires = "graph")]
    schedule: Option<PathBuf>,
}

/// A failure carrying its exit status.
struct Failure {
    code: u8,
    error: anyhow::Error,
}

fn status(e: &anyhow::Error) -> u8 {
    match e.downcast_ref::<Error>() {
        Some(Error::SchedulingFailure { .. }) => 2,
        Some(Error::Contention { .. } | Error::Metric(_)) => 3,
        Some(_) => 1,
        None if e.downcast_ref::<std::io::Error>().is_some() => 1,
        None => 3,
    }
}

impl From<anyhow::Error> for Failure {
    fn from(error: anyhow::Error) -> Self {
        Failure {
            code: status(&error),
            error,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        anyhow::Error::from(e).into()
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Some(n) = cli.workers.filter(|&n| n > 0) {
        // fails only if a pool already exists, which cannot happen here
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
    let result = match cli.command {
        Command::Generate(a) => generate(a),
        Command::Schedule(a) => schedule(a),
        Command::Experiment(a) => run_experiment(a),
        Command::Gantt(a) => draw(a),
        Command::Validate(a) => validate(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}

fn write(path: &Path, body: &str) -> anyhow::Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    fs::write(path, body).with_context(|| format!("writing {}", path.display()))
}

fn generate(a: GenerateArgs) -> Result<(), Failure> {
    let net = Network::new(a.network.topology()?)?;
    let params = GeneratorParams {
        task_count: a.tasks,
        max_in_degree: a.max_in,
        max_out_degree: a.max_out,
        min_entry: a.min_entry,
        min_exit: a.min_exit,
        weight_range: (a.weight_min, a.weight_max),
        ccr: a.ccr,
        constrain_outdegree: !a.unconstrained,
        layers: a.layers,
        seed: a.seed,
    };
    let g = generate_random(&params, &net)?;
    let text = graph::to_json(&g);
    let ccr = if g.edges.is_empty() {
        0.0
    } else {
        measure_ccr(&g, &net)?
    };
    match &a.out {
        Some(p) => {
            write(p, &text)?;
            eprintln!(
                "{} tasks, {} edges, ccr {ccr:.4} -> {}",
                g.len(),
                g.edges.len(),
                p.display()
            );
        }
        None => print!("{text}"),
    }
    Ok(())
}

#[derive(Serialize)]
struct RunRecord<'a> {
    graph: &'a Path,
    variant: Variant,
    alpha_grid: Option<AlphaGrid>,
    status: &'a str,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    makespan: Option<f64>,
}

fn schedule(a: ScheduleArgs) -> Result<(), Failure> {
    let g = graph::load(&a.graph)?;
    let topo = a.network.topology()?;
    let net = Network::new(topo.clone())?;
    let variant: Variant = a.variant.into();
    let grid = match a.alpha {
        Some(x) => AlphaGrid::single(x),
        None => AlphaGrid::new(a.alpha_start, a.alpha_stop, a.alpha_step)?,
    };
    grid.check()?;
    let mut run = RunRecord {
        graph: &a.graph,
        variant,
        alpha_grid: variant.uses_alpha().then_some(grid),
        status: "ok",
        error: None,
        alpha: None,
        makespan: None,
    };
    let result = schedule_sweep(&g, &net, variant, &grid);
    let SweepResult { best, curve } = match result {
        Ok(r) => r,
        Err(e) => {
            run.status = "failed";
            run.error = Some(e.to_string());
            write(&a.out.join("run.json"), &json(&run))?;
            return Err(e.into());
        }
    };
    let report = verify::verify(&best, &g, &topo);
    if !report.is_ok() {
        return Err(Failure {
            code: 3,
            error: anyhow!("scheduler produced an invalid schedule:\n{report}"),
        });
    }
    let m = metrics::report(&best, &g, &net)?;
    let name = a
        .graph
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("graph");
    write(&a.out.join("schedule.json"), &best.to_json())?;
    write(
        &a.out.join("metrics.csv"),
        &format!(
            "{}\n{}\n",
            metrics::CSV_HEADER,
            m.csv_row(name, variant.name(), best.alpha)
        ),
    )?;
    write(&a.out.join("gantt.svg"), &gantt::render_svg(&best))?;
    let mut csv = String::from("alpha,makespan\n");
    for (x, y) in &curve {
        csv += &format!("{x},{y}\n");
    }
    write(&a.out.join("curve.csv"), &csv)?;
    run.alpha = Some(best.alpha);
    run.makespan = Some(best.makespan);
    write(&a.out.join("run.json"), &json(&run))?;
    println!(
        "{variant}: makespan {} at alpha {} (slr {:.4}, speedup {:.4}, lb {:.4})",
        best.makespan, best.alpha, m.slr, m.speedup, m.lb
    );
    Ok(())
}

fn json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("serializable");
    s.push('\n');
    s
}

/// Overlays `user` on `base`, merging nested tables key by key.
fn merge(base: &mut toml::Table, user: toml::Table) {
    for (k, v) in user {
        match (base.get_mut(&k), v) {
            (Some(toml::Value::Table(b)), toml::Value::Table(u)) => merge(b, u),
            (_, v) => {
                base.insert(k, v);
            }
        }
    }
}

fn experiment_config(a: &ExperimentArgs) -> anyhow::Result<ExperimentConfig> {
    let user: toml::Table = match &a.config {
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
            toml::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", p.display())))?
        }
        None => toml::Table::new(),
    };
    let id: ExperimentId = match (&a.id, user.get("experiment").and_then(|v| v.as_str())) {
        (Some(id), _) => id.parse()?,
        (None, Some(id)) => id.parse()?,
        (None, None) => return Err(Error::Parameter("experiment id missing".into()).into()),
    };
    let mut base = toml::Table::try_from(ExperimentConfig::defaults(id))?;
    merge(&mut base, user);
    base.insert("experiment".into(), toml::Value::String(id.name().into()));
    let mut cfg: ExperimentConfig = base
        .try_into()
        .map_err(|e| Error::Parse(format!("config: {e}")))?;
    if let Some(o) = &a.out {
        cfg.output_dir = o.clone();
    }
    if let Some(n) = a.graphs {
        cfg.graphs_per_cell = n;
    }
    if let Some(s) = a.alpha_step {
        cfg.alpha.step = s;
    }
    if let Some(s) = a.seed {
        cfg.seed = s;
    }
    cfg.check()?;
    Ok(cfg)
}

fn run_experiment(a: ExperimentArgs) -> Result<(), Failure> {
    let cfg = experiment_config(&a)?;
    if a.print_config {
        print!("{}", toml::to_string(&cfg).map_err(anyhow::Error::from)?);
        return Ok(());
    }
    let art = experiment::run(&cfg)?;
    let files = art.write(&cfg.output_dir)?;
    write(
        &cfg.output_dir.join("config.toml"),
        &toml::to_string(&cfg).map_err(anyhow::Error::from)?,
    )?;
    println!("{}", art.summary);
    println!(
        "{} files written to {}",
        files.len() + 1,
        cfg.output_dir.display()
    );
    Ok(())
}

fn draw(a: GanttArgs) -> Result<(), Failure> {
    let text = fs::read_to_string(&a.schedule).map_err(|e| Error::io(&a.schedule, e))?;
    let s = Schedule::from_json(&text)?;
    match &a.out {
        Some(p) => write(p, &gantt::render_svg(&s))?,
        None => print!("{}", gantt::render_ascii(&s, a.columns)),
    }
    Ok(())
}

fn validate(a: ValidateArgs) -> Result<(), Failure> {
    let topo = match &a.topology {
        Some(p) => Topology::load(p)?,
        None => fixtures::example_topology(),
    };
    Network::new(topo.clone())?;
    let Some(gp) = &a.graph else {
        println!("topology ok");
        return Ok(());
    };
    let g: TaskGraph = graph::load(gp)?;
    println!("graph ok: {} tasks, {} edges", g.len(), g.edges.len());
    if let Some(sp) = &a.schedule {
        let text = fs::read_to_string(sp).map_err(|e| Error::io(sp, e))?;
        let s = Schedule::from_json(&text)?;
        let report = verify::verify(&s, &g, &topo);
        if !report.is_ok() {
            return Err(Failure {
                code: 1,
                error: anyhow!("schedule is invalid:\n{report}"),
            });
        }
        println!("schedule ok: makespan {}", s.makespan);
    }
    Ok(())
}
