//! Seeded layered DAG generator.
//!
//! Every task draws a layer. `min_entry` tasks sit in the first layer and
//! `min_exit` tasks in the last; the rest are spread uniformly over the
//! layers in between. Tasks are numbered layer by layer, so index order is a
//! topological order. Each task outside the first layer draws
//! 1..=`max_in_degree` predecessors from strictly earlier layers among tasks
//! with spare out-degree. With `constrain_outdegree` set, a reverse sweep adds
//! edges (or drops redundant ones) until every edge `(p, s)` has
//! `outd(p) >= outd(s)`. Volumes are finally scaled to the requested CCR.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{apply_ccr, Edge, Task, TaskGraph};
use crate::network::Network;
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneratorParams {
    pub task_count: usize,
    pub max_in_degree: usize,
    pub max_out_degree: usize,
    pub min_entry: usize,
    pub min_exit: usize,
    /// Inclusive range for integer task weights; edge volumes are drawn from
    /// the same range before CCR scaling.
    pub weight_range: (u32, u32),
    pub ccr: f64,
    /// Enforce `outd(pred) >= outd(succ)` on every edge.
    pub constrain_outdegree: bool,
    /// Number of layers; `None` picks `max(3, round(sqrt(n)))`, capped so
    /// every inner layer can be populated.
    #[serde(default)]
    pub layers: Option<usize>,
    pub seed: u64,
}

impl Default for GeneratorParams {
    fn default() -> Self {
        GeneratorParams {
            task_count: 20,
            max_in_degree: 2,
            max_out_degree: 3,
            min_entry: 2,
            min_exit: 2,
            weight_range: (5, 20),
            ccr: 1.0,
            constrain_outdegree: true,
            layers: None,
            seed: 0,
        }
    }
}

impl GeneratorParams {
    pub fn check(&self) -> Result<()> {
        let fail = |m: &str| Err(Error::Generation(m.to_string()));
        if self.task_count == 0 || self.max_in_degree == 0 || self.max_out_degree == 0 {
            return fail("task count and degree bounds must be at least 1");
        }
        if self.min_entry == 0 || self.min_exit == 0 {
            return fail("min_entry and min_exit must be at least 1");
        }
        if self.min_entry + self.min_exit > self.task_count {
            return Err(Error::Generation(format!(
                "min_entry ({}) + min_exit ({}) exceeds task count ({})",
                self.min_entry, self.min_exit, self.task_count
            )));
        }
        if self.weight_range.0 == 0 || self.weight_range.0 > self.weight_range.1 {
            return fail("weight range must be a positive, non-empty interval");
        }
        if !(self.ccr > 0.0 && self.ccr.is_finite()) {
            return fail("ccr must be positive");
        }
        if self.layers.is_some_and(|l| l < 2) {
            return fail("at least two layers are needed");
        }
        Ok(())
    }

    pub fn layer_count(&self) -> usize {
        self.layers.unwrap_or_else(|| {
            let n = self.task_count;
            let auto = ((n as f64).sqrt().round() as usize).max(3);
            let inner = n - self.min_entry - self.min_exit;
            auto.min(inner + 2).max(2)
        })
    }
}

const MAX_ATTEMPTS: usize = 1000;

/// Random layered wiring; returns successor and predecessor lists.
fn wire(params: &GeneratorParams, rng: &mut ChaCha8Rng) -> (Vec<Vec<usize>>, Vec<Vec<usize>>) {
    let n = params.task_count;
    let layers = params.layer_count();
    let inner = n - params.min_entry - params.min_exit;
    let mut layer = vec![0; params.min_entry];
    layer.extend((0..inner).map(|_| {
        if layers > 2 {
            rng.gen_range(1..layers - 1)
        } else {
            rng.gen_range(0..2)
        }
    }));
    layer.extend(std::iter::repeat_n(layers - 1, params.min_exit));
    layer.sort_unstable();

    let mut succ: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut pred: Vec<Vec<usize>> = vec![Vec::new(); n];
    for t in 0..n {
        if layer[t] == 0 {
            continue;
        }
        let mut open: Vec<usize> = (0..t)
            .filter(|&p| layer[p] < layer[t] && succ[p].len() < params.max_out_degree)
            .collect();
        let want = rng.gen_range(1..=params.max_in_degree).min(open.len());
        open.shuffle(rng);
        for &p in open.iter().take(want) {
            succ[p].push(t);
            pred[t].push(p);
        }
    }
    (succ, pred)
}

/// Generates a graph; `network` calibrates edge volumes to `params.ccr`.
/// The period is the total task weight.
pub fn generate_random(params: &GeneratorParams, network: &Network) -> Result<TaskGraph> {
    params.check()?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let n = params.task_count;

    // the out-degree repair can dead-end on unlucky wiring; retrying from
    // the same stream keeps the result a pure function of the seed
    let mut attempts = 0;
    let succ = loop {
        let (mut succ, mut pred) = wire(params, &mut rng);
        if !params.constrain_outdegree {
            break succ;
        }
        match enforce_outdegree_order(&mut succ, &mut pred, params, &mut rng) {
            Ok(()) => break succ,
            Err(e) if attempts >= MAX_ATTEMPTS => return Err(e),
            Err(_) => attempts += 1,
        }
    };

    let (lo, hi) = params.weight_range;
    let tasks: Vec<Task> = (0..n)
        .map(|i| Task::new(format!("n{}", i + 1), f64::from(rng.gen_range(lo..=hi))))
        .collect();
    let mut edges = Vec::new();
    for (p, list) in succ.iter().enumerate() {
        let mut list = list.clone();
        list.sort_unstable();
        for s in list {
            edges.push(Edge::new(
                format!("n{}", p + 1),
                format!("n{}", s + 1),
                f64::from(rng.gen_range(lo..=hi)),
            ));
        }
    }
    let period = tasks.iter().map(|t| t.weight).sum();
    let graph = TaskGraph::new(period, tasks, edges);
    if graph.edges.is_empty() {
        return Ok(graph);
    }
    apply_ccr(&graph, network, params.ccr)
}

/// Walks tasks from last to first; each task's successors are final when it
/// is visited, so raising its own out-degree cannot break later tasks.
fn enforce_outdegree_order(
    succ: &mut [Vec<usize>],
    pred: &mut [Vec<usize>],
    params: &GeneratorParams,
    rng: &mut ChaCha8Rng,
) -> Result<()> {
    let n = succ.len();
    for p in (0..n).rev() {
        let mut banned: Vec<usize> = Vec::new();
        loop {
            let need = succ[p].iter().map(|&s| succ[s].len()).max().unwrap_or(0);
            if succ[p].len() >= need {
                break;
            }
            let targets: Vec<usize> = (p + 1..n)
                .filter(|&t| {
                    !pred[t].is_empty()
                        && pred[t].len() < params.max_in_degree
                        && !succ[p].contains(&t)
                        && !banned.contains(&t)
                })
                .collect();
            if let Some(&t) = targets.choose(rng) {
                succ[p].push(t);
                pred[t].push(p);
                continue;
            }
            // no room for a new edge: drop the edge to the most demanding
            // successor that has another predecessor
            let victim = succ[p]
                .iter()
                .copied()
                .filter(|&s| pred[s].len() >= 2)
                .max_by_key(|&s| (succ[s].len(), std::cmp::Reverse(s)));
            let Some(s) = victim else {
                return Err(Error::Generation(format!(
                    "cannot satisfy the out-degree constraint at task {}",
                    p + 1
                )));
            };
            succ[p].retain(|&x| x != s);
            pred[s].retain(|&x| x != p);
            banned.push(s);
        }
    }
    Ok(())
}
