//! Seeded experiment harness.
//!
//! | id   | varies                          | reports                        |
//! |------|---------------------------------|--------------------------------|
//! | exp1 | task count, rate permutation    | SLR and speedup                |
//! | exp2 | task count, rate permutation    | load balance                   |
//! | exp3 | CCR                             | SLR                            |
//! | exp4 | unconstrained random graphs     | scheduling failure rate        |
//! | exp5 | arrival-rate factor on a fixture| precision with and without IC  |
//!
//! Every instance is a pure function of the configuration, so results are
//! reproducible bit for bit. Instances run on the rayon pool; all files are
//! produced by one collector once every instance is done.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::graph::{derive_structure, generate_random, GeneratorParams, TaskGraph};
use crate::imprecise::{find_holes, precision_csv, simulate_precision};
use crate::network::Network;
use crate::plot::{bar_chart, line_chart, Series};
use crate::scheduler::{schedule_once, schedule_sweep, AlphaGrid, Problem, Variant};
use crate::{fixtures, gantt, metrics, verify, Error, Result, Topology};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExperimentId {
    Exp1,
    Exp2,
    Exp3,
    Exp4,
    Exp5,
}

impl ExperimentId {
    pub const ALL: [ExperimentId; 5] = [
        ExperimentId::Exp1,
        ExperimentId::Exp2,
        ExperimentId::Exp3,
        ExperimentId::Exp4,
        ExperimentId::Exp5,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentId::Exp1 => "exp1",
            ExperimentId::Exp2 => "exp2",
            ExperimentId::Exp3 => "exp3",
            ExperimentId::Exp4 => "exp4",
            ExperimentId::Exp5 => "exp5",
        }
    }
}

impl std::str::FromStr for ExperimentId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ExperimentId::ALL
            .into_iter()
            .find(|e| e.name() == s.to_ascii_lowercase())
            .ok_or_else(|| Error::Parameter(format!("unknown experiment `{s}`")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentId,
    pub task_counts: Vec<usize>,
    pub ccrs: Vec<f64>,
    /// Processor rate vectors, one per cell column.
    pub rates: Vec<Vec<f64>>,
    pub graphs_per_cell: usize,
    /// Graph `i` of every cell is generated with seed `seed + i`.
    pub seed: u64,
    pub alpha: AlphaGrid,
    pub constrain_outdegree: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub layers: Option<usize>,
    pub lambdas: Vec<f64>,
    pub output_dir: PathBuf,
    /// Topology file; the bundled three-processor network when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub topology: Option<PathBuf>,
    /// Graph file for exp5; the bundled imprecise graph when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub graph: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn defaults(id: ExperimentId) -> ExperimentConfig {
        let all_rates: Vec<Vec<f64>> = fixtures::rate_permutations()
            .iter()
            .map(|r| r.to_vec())
            .collect();
        let base = ExperimentConfig {
            experiment: id,
            task_counts: vec![10, 20, 30, 40, 50],
            ccrs: vec![1.0],
            rates: all_rates,
            graphs_per_cell: 100,
            seed: 1,
            alpha: AlphaGrid::default(),
            constrain_outdegree: true,
            layers: None,
            lambdas: (0..=10).map(|i| 1.0 + i as f64 / 10.0).collect(),
            output_dir: PathBuf::from("results").join(id.name()),
            topology: None,
            graph: None,
        };
        let (s, m, f) = (fixtures::RATE_SLOW, fixtures::RATE_MID, fixtures::RATE_FAST);
        match id {
            ExperimentId::Exp1 | ExperimentId::Exp2 => base,
            ExperimentId::Exp3 => ExperimentConfig {
                task_counts: vec![20],
                ccrs: vec![0.1, 0.5, 1.0, 5.0, 10.0],
                rates: vec![vec![m, f, s]],
                ..base
            },
            ExperimentId::Exp4 => ExperimentConfig {
                task_counts: vec![10],
                rates: vec![vec![s, f, m]],
                graphs_per_cell: 1000,
                seed: 0,
                constrain_outdegree: false,
                layers: Some(4),
                ..base
            },
            ExperimentId::Exp5 => ExperimentConfig {
                rates: vec![vec![s, f, m]],
                ..base
            },
        }
    }

    pub fn check(&self) -> Result<()> {
        self.alpha.check()?;
        let bad = |m: &str| Err(Error::Parameter(m.to_string()));
        if self.graphs_per_cell == 0 {
            return bad("graphs_per_cell must be positive");
        }
        if self.rates.is_empty()
            || self.rates.iter().any(|r| {
                r.iter()
                    .any(|x| x.partial_cmp(&0.0) != Some(Ordering::Greater))
            })
        {
            return bad("rates must be non-empty and positive");
        }
        if self.task_counts.is_empty() || self.ccrs.is_empty() {
            return bad("task_counts and ccrs must be non-empty");
        }
        Ok(())
    }

    fn base_topology(&self) -> Result<Topology> {
        match &self.topology {
            Some(p) => Topology::load(p),
            None => Ok(fixtures::example_topology()),
        }
    }

    /// The configured topology carrying `rates`.
    pub fn network(&self, rates: &[f64]) -> Result<Network> {
        let topo = self.base_topology()?;
        if topo.processors.len() != rates.len() {
            return Err(Error::Parameter(format!(
                "{} rates given for {} processors",
                rates.len(),
                topo.processors.len()
            )));
        }
        Network::new(topo.with_rates(rates))
    }
}

/// Outcome of one variant on one generated graph.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InstanceRecord {
    pub rates: String,
    pub tasks: usize,
    pub ccr: f64,
    pub graph: usize,
    pub variant: Variant,
    /// `None` when the priority order is infeasible.
    pub alpha: Option<f64>,
    pub makespan: Option<f64>,
    /// Makespan at alpha = 0 (the first grid point).
    pub makespan_alpha0: Option<f64>,
    pub slr: Option<f64>,
    pub speedup: Option<f64>,
    pub lb: Option<f64>,
    pub valid: bool,
}

fn opt(x: Option<f64>) -> String {
    x.map_or_else(String::new, |v| v.to_string())
}

const INSTANCE_HEADER: &str =
    "rates,tasks,ccr,graph,variant,alpha,makespan,makespan_alpha0,slr,speedup,lb,valid";

impl InstanceRecord {
    fn csv(&self) -> String {
        format!(
            "\"{}\",{},{},{},{},{},{},{},{},{},{},{}",
            self.rates,
            self.tasks,
            self.ccr,
            self.graph,
            self.variant,
            opt(self.alpha),
            opt(self.makespan),
            opt(self.makespan_alpha0),
            opt(self.slr),
            opt(self.speedup),
            opt(self.lb),
            self.valid
        )
    }
}

pub fn generator_params(
    cfg: &ExperimentConfig,
    tasks: usize,
    ccr: f64,
    graph: usize,
) -> GeneratorParams {
    GeneratorParams {
        task_count: tasks,
        ccr,
        constrain_outdegree: cfg.constrain_outdegree,
        layers: cfg.layers,
        seed: cfg.seed.wrapping_add(graph as u64),
        ..GeneratorParams::default()
    }
}

const COMPARED: [Variant; 3] = [Variant::HsvCc, Variant::HvlbCcA, Variant::HvlbCcB];

/// Schedules one graph with every compared variant.
pub fn run_instance(
    cfg: &ExperimentConfig,
    net: &Network,
    label: &str,
    tasks: usize,
    ccr: f64,
    graph_index: usize,
) -> Result<Vec<InstanceRecord>> {
    let g = generate_random(&generator_params(cfg, tasks, ccr, graph_index), net)?;
    let mut out = Vec::new();
    for v in COMPARED {
        let mut rec = InstanceRecord {
            rates: label.to_string(),
            tasks,
            ccr,
            graph: graph_index,
            variant: v,
            alpha: None,
            makespan: None,
            makespan_alpha0: None,
            slr: None,
            speedup: None,
            lb: None,
            valid: true,
        };
        match schedule_sweep(&g, net, v, &cfg.alpha) {
            Ok(sw) => {
                let s = &sw.best;
                let m = metrics::report(s, &g, net)?;
                rec.alpha = Some(s.alpha);
                rec.makespan = Some(s.makespan);
                rec.makespan_alpha0 = sw.curve.first().filter(|c| c.0 == 0.0).map(|c| c.1);
                rec.slr = Some(m.slr);
                rec.speedup = Some(m.speedup);
                rec.lb = Some(m.lb);
                rec.valid = verify::verify(s, &g, net.topology()).is_ok();
            }
            Err(Error::SchedulingFailure { .. }) => {}
            Err(e) => return Err(e),
        }
        out.push(rec);
    }
    Ok(out)
}

/// Files produced by an experiment, keyed by relative path.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Artifacts {
    pub files: BTreeMap<String, String>,
    /// Human-readable digest printed by the CLI.
    pub summary: String,
}

impl Artifacts {
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let mut written = Vec::new();
        for (name, body) in &self.files {
            let path = dir.join(name);
            fs::write(&path, body).map_err(|e| Error::io(&path, e))?;
            written.push(path);
        }
        Ok(written)
    }
}

pub fn run(cfg: &ExperimentConfig) -> Result<Artifacts> {
    cfg.check()?;
    match cfg.experiment {
        ExperimentId::Exp1 | ExperimentId::Exp2 | ExperimentId::Exp3 => batch(cfg),
        ExperimentId::Exp4 => failure_rates(cfg),
        ExperimentId::Exp5 => precision(cfg),
    }
}

/// Runs every (rates, tasks, ccr, graph) instance.
pub fn run_batch(cfg: &ExperimentConfig) -> Result<Vec<InstanceRecord>> {
    let mut jobs = Vec::new();
    for rates in &cfg.rates {
        let net = cfg.network(rates)?;
        let label = fixtures::rate_label(rates);
        for &n in &cfg.task_counts {
            for &ccr in &cfg.ccrs {
                for gi in 0..cfg.graphs_per_cell {
                    jobs.push((net.clone(), label.clone(), n, ccr, gi));
                }
            }
        }
    }
    let nested: Vec<Vec<InstanceRecord>> = jobs
        .par_iter()
        .map(|(net, label, n, ccr, gi)| run_instance(cfg, net, label, *n, *ccr, *gi))
        .collect::<Result<_>>()?;
    Ok(nested.into_iter().flatten().collect())
}

#[derive(Default)]
struct Agg {
    count: usize,
    ok: usize,
    slr: Vec<f64>,
    speedup: Vec<f64>,
    lb: Vec<f64>,
    dominance_violations: usize,
    invalid: usize,
}

fn mean(v: &[f64]) -> f64 {
    if v.is_empty() {
        f64::NAN
    } else {
        v.iter().sum::<f64>() / v.len() as f64
    }
}

fn max(v: &[f64]) -> f64 {
    v.iter().copied().fold(f64::NAN, f64::max)
}

fn batch(cfg: &ExperimentConfig) -> Result<Artifacts> {
    let records = run_batch(cfg)?;
    let mut art = Artifacts::default();
    let mut inst = format!("{INSTANCE_HEADER}\n");
    for r in &records {
        inst += &r.csv();
        inst.push('\n');
    }
    art.files.insert("instances.csv".into(), inst);

    // baseline makespan per graph, for the dominance check
    let key = |r: &InstanceRecord| (r.rates.clone(), r.tasks, r.ccr.to_bits(), r.graph);
    let hsv: BTreeMap<_, f64> = records
        .iter()
        .filter(|r| r.variant == Variant::HsvCc)
        .filter_map(|r| r.makespan.map(|m| (key(r), m)))
        .collect();

    let mut cells: BTreeMap<(String, usize, u64, Variant), Agg> = BTreeMap::new();
    let rate_order: Vec<String> = cfg.rates.iter().map(|r| fixtures::rate_label(r)).collect();
    for r in &records {
        let a = cells
            .entry((r.rates.clone(), r.tasks, r.ccr.to_bits(), r.variant))
            .or_default();
        a.count += 1;
        let Some(m) = r.makespan else { continue };
        a.ok += 1;
        a.slr.extend(r.slr);
        a.speedup.extend(r.speedup);
        a.lb.extend(r.lb);
        a.invalid += usize::from(!r.valid);
        let base = match r.variant {
            Variant::HvlbCcA => hsv.get(&key(r)).copied(),
            Variant::HvlbCcB => r.makespan_alpha0,
            _ => None,
        };
        if base.is_some_and(|b| m > b) {
            a.dominance_violations += 1;
        }
    }

    let mut summary = String::from(
        "rates,tasks,ccr,variant,graphs,scheduled,mean_slr,worst_slr,mean_speedup,best_speedup,mean_lb,worst_lb,dominance_violations,invalid\n",
    );
    let mut ordered: Vec<_> = cells.iter().collect();
    ordered.sort_by_key(|((rates, n, ccr, v), _)| {
        // positive floats order like their bit patterns
        (rate_order.iter().position(|x| x == rates), *n, *ccr, *v)
    });
    for ((rates, n, ccr, v), a) in &ordered {
        let _ = writeln!(
            summary,
            "\"{rates}\",{n},{},{v},{},{},{},{},{},{},{},{},{},{}",
            f64::from_bits(*ccr),
            a.count,
            a.ok,
            mean(&a.slr),
            max(&a.slr),
            mean(&a.speedup),
            max(&a.speedup),
            mean(&a.lb),
            max(&a.lb),
            a.dominance_violations,
            a.invalid
        );
    }
    art.files.insert("summary.csv".into(), summary);

    let series_for = |rates: &str, pick: &dyn Fn(&Agg) -> f64, by_ccr: bool| -> Vec<Series> {
        COMPARED
            .iter()
            .map(|&v| Series {
                name: v.to_string(),
                points: ordered
                    .iter()
                    .filter(|((r, _, _, vv), _)| r == rates && *vv == v)
                    .map(|((_, n, ccr, _), a)| {
                        (
                            if by_ccr {
                                f64::from_bits(*ccr)
                            } else {
                                *n as f64
                            },
                            pick(a),
                        )
                    })
                    .collect(),
            })
            .collect()
    };
    let total_violations: usize = cells.values().map(|a| a.dominance_violations).sum();
    let total_invalid: usize = cells.values().map(|a| a.invalid).sum();
    for (k, rates) in rate_order.iter().enumerate() {
        match cfg.experiment {
            ExperimentId::Exp1 => {
                let slr = series_for(rates, &|a| mean(&a.slr), false);
                let sp = series_for(rates, &|a| mean(&a.speedup), false);
                art.files.insert(
                    format!("slr_r{}.svg", k + 1),
                    line_chart(&format!("SLR, rates ({rates})"), "tasks", "mean SLR", &slr),
                );
                art.files.insert(
                    format!("speedup_r{}.svg", k + 1),
                    line_chart(
                        &format!("Speedup, rates ({rates})"),
                        "tasks",
                        "mean speedup",
                        &sp,
                    ),
                );
            }
            ExperimentId::Exp2 => {
                let lb = series_for(rates, &|a| mean(&a.lb), false);
                art.files.insert(
                    format!("lb_r{}.svg", k + 1),
                    line_chart(
                        &format!("Load balance, rates ({rates})"),
                        "tasks",
                        "mean LB",
                        &lb,
                    ),
                );
            }
            _ => {
                let slr = series_for(rates, &|a| mean(&a.slr), true);
                art.files.insert(
                    format!("slr_ccr_r{}.svg", k + 1),
                    line_chart(
                        &format!("SLR vs CCR, rates ({rates})"),
                        "CCR",
                        "mean SLR",
                        &slr,
                    ),
                );
            }
        }
    }
    art.summary = format!(
        "{}: {} instances, {} dominance violations, {} invalid schedules",
        cfg.experiment.name(),
        records.len(),
        total_violations,
        total_invalid
    );
    Ok(art)
}

/// Failure rates of the baseline and both depth weightings. Failure is a
/// property of the priority order alone, so no placement is run.
pub fn failure_flags(cfg: &ExperimentConfig, variant: Variant) -> Result<Vec<bool>> {
    let mut jobs = Vec::new();
    for rates in &cfg.rates {
        let net = cfg.network(rates)?;
        for &n in &cfg.task_counts {
            for &ccr in &cfg.ccrs {
                for gi in 0..cfg.graphs_per_cell {
                    jobs.push((net.clone(), n, ccr, gi));
                }
            }
        }
    }
    jobs.par_iter()
        .map(|(net, n, ccr, gi)| {
            let g = generate_random(&generator_params(cfg, *n, *ccr, *gi), net)?;
            Ok(Problem::new(&g, net, variant)?.failure().is_some())
        })
        .collect()
}

pub const SFR_VARIANTS: [(Variant, &str); 3] = [
    (Variant::HsvCc, "HSV_CC"),
    (Variant::HvlbCcBLinearDepth, "HVLB_CC(depth)"),
    (Variant::HvlbCcB, "HVLB_CC(depth^2)"),
];

fn failure_rates(cfg: &ExperimentConfig) -> Result<Artifacts> {
    let mut art = Artifacts::default();
    let mut csv = String::from("variant,graphs,failed,sfr\n");
    let mut bars = Vec::new();
    for (v, label) in SFR_VARIANTS {
        let flags = failure_flags(cfg, v)?;
        let failed = flags.iter().filter(|&&f| f).count();
        let rate = metrics::sfr(&flags)?;
        let _ = writeln!(csv, "{label},{},{failed},{rate}", flags.len());
        bars.push((label.to_string(), rate));
    }
    art.summary = bars
        .iter()
        .map(|(l, r)| format!("SFR {l} = {r}%"))
        .collect::<Vec<_>>()
        .join(", ");
    art.files.insert("sfr.csv".into(), csv);
    art.files.insert(
        "sfr.svg".into(),
        bar_chart("Scheduling failure rate", "SFR (%)", &bars),
    );
    Ok(art)
}

/// The exp5 graph and network as configured.
pub fn precision_instance(cfg: &ExperimentConfig) -> Result<(TaskGraph, Network)> {
    let g = match &cfg.graph {
        Some(p) => crate::graph::load(p)?,
        None => fixtures::imprecise_graph(),
    };
    Ok((g, cfg.network(&cfg.rates[0])?))
}

fn precision(cfg: &ExperimentConfig) -> Result<Artifacts> {
    let (g, net) = precision_instance(cfg)?;
    derive_structure(&g)?;
    let sched = if cfg.alpha == AlphaGrid::single(0.0) {
        schedule_once(&g, &net, Variant::HvlbCcA, 0.0)?
    } else {
        schedule_sweep(&g, &net, Variant::HvlbCcA, &cfg.alpha)?.best
    };
    let holes = find_holes(&sched, &g, &net)?;
    let results = simulate_precision(&sched, &g, &holes, &cfg.lambdas)?;

    let mut art = Artifacts::default();
    let mut hcsv = String::from("task,processor,finish,condition1,condition2,hole\n");
    for h in &holes.holes {
        let _ = writeln!(
            hcsv,
            "{},{},{},{},{},{}",
            h.task,
            h.processor,
            h.finish,
            h.condition1,
            opt(h.condition2),
            h.hole
        );
    }
    art.files.insert("holes.csv".into(), hcsv);
    art.files
        .insert("precision.csv".into(), precision_csv(&results));
    let mut series = Vec::new();
    for h in &holes.holes {
        let mine: Vec<_> = results.iter().filter(|r| r.task == h.task).collect();
        series.push(Series {
            name: format!("{} IC", h.task),
            points: mine.iter().map(|r| (r.lambda, r.precision_ic)).collect(),
        });
        series.push(Series {
            name: format!("{} plain", h.task),
            points: mine.iter().map(|r| (r.lambda, r.precision_plain)).collect(),
        });
    }
    art.files.insert(
        "precision.svg".into(),
        line_chart("Precision", "lambda", "precision (%)", &series),
    );
    art.files.insert("schedule.json".into(), sched.to_json());
    art.files
        .insert("gantt.svg".into(), gantt::render_svg(&sched));
    art.summary = holes
        .holes
        .iter()
        .map(|h| format!("hole({}) = {}", h.task, h.hole))
        .collect::<Vec<_>>()
        .join(", ");
    Ok(art)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(id: ExperimentId) -> ExperimentConfig {
        ExperimentConfig {
            task_counts: vec![10],
            graphs_per_cell: 3,
            rates: vec![fixtures::rate_permutations()[0].to_vec()],
            alpha: AlphaGrid::new(0.0, 2.0, 0.5).unwrap(),
            ..ExperimentConfig::defaults(id)
        }
    }

    #[test]
    fn defaults_are_valid() {
        for id in ExperimentId::ALL {
            ExperimentConfig::defaults(id).check().unwrap();
            assert_eq!(id.name().parse::<ExperimentId>().unwrap(), id);
        }
    }

    #[test]
    fn batch_is_deterministic() {
        let a = run(&small(ExperimentId::Exp1)).unwrap();
        let b = run(&small(ExperimentId::Exp1)).unwrap();
        assert_eq!(a, b);
        assert!(a.files.contains_key("slr_r1.svg"));
        assert!(
            a.summary.contains("0 dominance violations"),
            "{}",
            a.summary
        );
    }

    #[test]
    fn precision_at_lambda_one() {
        let art = run(&ExperimentConfig {
            alpha: AlphaGrid::single(0.0),
            ..small(ExperimentId::Exp5)
        })
        .unwrap();
        for line in art.files["precision.csv"].lines().skip(1) {
            let f: Vec<&str> = line.split(',').collect();
            if f[1] == "1" {
                assert_eq!(f[3], "100");
            }
        }
    }

    #[test]
    fn failure_rates_small() {
        let art = run(&ExperimentConfig {
            graphs_per_cell: 50,
            ..ExperimentConfig::defaults(ExperimentId::Exp4)
        })
        .unwrap();
        assert!(art.files["sfr.csv"].starts_with("variant,graphs,failed,sfr\nHSV_CC,50,"));
    }
}
