//! Schedule holes and imprecise-computation precision.
//!
//! A task's hole is the longest extension of its finish time that leaves
//! every other task, every foreign link reservation, the arrival time of
//! each of its own messages and the makespan unchanged. Two bounds apply:
//!
//! * processor side: the start of the next task on the same processor, the
//!   start of any successor on that processor, and the makespan;
//! * network side: for each outgoing inter-processor message, the latest
//!   first-link start that still lets the message reach its destination at
//!   the original time without pushing any later reservation.
//!
//! The network bound is found by sliding the message's per-link chain as
//! late as the calendars allow, working backwards from the last link.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::graph::TaskGraph;
use crate::network::Network;
use crate::scheduler::Schedule;
use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Hole {
    pub task: String,
    pub processor: String,
    pub finish: f64,
    /// Processor-side slack.
    pub condition1: f64,
    /// Network-side slack, if the task sends inter-processor messages.
    pub condition2: Option<f64>,
    /// `max(0, min(condition1, condition2))`.
    pub hole: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct HoleReport {
    pub holes: Vec<Hole>,
}

impl HoleReport {
    pub fn get(&self, task: &str) -> Option<&Hole> {
        self.holes.iter().find(|h| h.task == task)
    }
}

/// Holes of the tasks marked imprecise.
pub fn find_holes(schedule: &Schedule, graph: &TaskGraph, network: &Network) -> Result<HoleReport> {
    let ids: Vec<&str> = graph
        .tasks
        .iter()
        .filter(|t| t.imprecise)
        .map(|t| t.id.as_str())
        .collect();
    holes_for(schedule, graph, network, &ids)
}

/// Holes of every task, in graph order.
pub fn find_all_holes(
    schedule: &Schedule,
    graph: &TaskGraph,
    network: &Network,
) -> Result<HoleReport> {
    let ids: Vec<&str> = graph.tasks.iter().map(|t| t.id.as_str()).collect();
    holes_for(schedule, graph, network, &ids)
}

fn holes_for(
    schedule: &Schedule,
    graph: &TaskGraph,
    network: &Network,
    ids: &[&str],
) -> Result<HoleReport> {
    let pos: HashMap<&str, usize> = schedule
        .tasks
        .iter()
        .enumerate()
        .map(|(i, t)| (t.id.as_str(), i))
        .collect();
    let lookup = |id: &str| {
        pos.get(id)
            .copied()
            .ok_or_else(|| Error::Parameter(format!("task `{id}` is not in the schedule")))
    };
    let topo = network.topology();
    let speed: HashMap<&str, f64> = topo
        .links
        .iter()
        .map(|l| (l.id.as_str(), l.speed))
        .collect();

    // reservations per link in commit order: (message, hop)
    let mut on_link: HashMap<&str, Vec<(usize, usize)>> = HashMap::new();
    for (m, msg) in schedule.messages.iter().enumerate() {
        for (h, hop) in msg.hops.iter().enumerate() {
            on_link.entry(hop.link.as_str()).or_default().push((m, h));
        }
    }
    let mut next_on_link: HashMap<(usize, usize), (usize, usize)> = HashMap::new();
    for list in on_link.values() {
        for w in list.windows(2) {
            next_on_link.insert(w[0], w[1]);
        }
    }

    let mut holes = Vec::with_capacity(ids.len());
    for &id in ids {
        let me = &schedule.tasks[lookup(id)?];
        let f = me.finish;
        let mut c1 = schedule.makespan;
        if let Some(next) = schedule
            .tasks
            .iter()
            .skip(lookup(id)? + 1)
            .find(|t| t.processor == me.processor)
        {
            c1 = c1.min(next.start);
        }
        for e in graph.edges.iter().filter(|e| e.src == id) {
            let s = &schedule.tasks[lookup(&e.dst)?];
            if s.processor == me.processor {
                c1 = c1.min(s.start);
            }
        }

        // latest start per hop of each own message, later commits first
        let own: Vec<usize> = (0..schedule.messages.len())
            .filter(|&m| schedule.messages[m].src == id)
            .collect();
        let mut latest: HashMap<(usize, usize), f64> = HashMap::new();
        for &m in own.iter().rev() {
            let msg = &schedule.messages[m];
            let mut bf = msg.arrival();
            let mut later = f64::INFINITY;
            for (h, hop) in msg.hops.iter().enumerate().rev() {
                if let Some(&(nm, nh)) = next_on_link.get(&(m, h)) {
                    let bound = if schedule.messages[nm].src == id {
                        latest[&(nm, nh)]
                    } else {
                        schedule.messages[nm].hops[nh].start
                    };
                    bf = bf.min(bound);
                }
                let c = msg.volume / speed[hop.link.as_str()];
                later = later.min(bf - c);
                latest.insert((m, h), later);
            }
        }
        let c2 = own.iter().map(|&m| latest[&(m, 0)]).reduce(f64::min);

        let limit = c2.map_or(c1, |c| c1.min(c));
        holes.push(Hole {
            task: id.to_string(),
            processor: me.processor.clone(),
            finish: f,
            condition1: c1 - f,
            condition2: c2.map(|c| c - f),
            hole: (limit - f).max(0.0),
        });
    }
    Ok(HoleReport { holes })
}

/// Precision of one imprecise task at one arrival-rate factor.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrecisionResult {
    pub task: String,
    pub lambda: f64,
    /// Mandatory time `mp`.
    pub mandatory: f64,
    /// Requested time `lambda * mp`.
    pub requested: f64,
    pub hole: f64,
    /// `mp + min((lambda - 1) * mp, hole)`.
    pub executed_ic: f64,
    pub precision_ic: f64,
    /// Without imprecise computation only the mandatory part runs.
    pub precision_plain: f64,
}

/// Precision with and without hole exploitation for every imprecise task and
/// every `lambda >= 1`.
pub fn simulate_precision(
    schedule: &Schedule,
    graph: &TaskGraph,
    holes: &HoleReport,
    lambdas: &[f64],
) -> Result<Vec<PrecisionResult>> {
    if let Some(l) = lambdas.iter().find(|&&l| !(l >= 1.0 && l.is_finite())) {
        return Err(Error::Parameter(format!(
            "arrival-rate factor {l} is below 1"
        )));
    }
    let mut out = Vec::new();
    for h in &holes.holes {
        let task = graph
            .task(&h.task)
            .ok_or_else(|| Error::Parameter(format!("unknown task `{}`", h.task)))?;
        let st = schedule
            .task(&h.task)
            .ok_or_else(|| Error::Parameter(format!("task `{}` is not in the schedule", h.task)))?;
        let mp = task.mandatory_fraction * (st.finish - st.start);
        if mp <= 0.0 {
            return Err(Error::Parameter(format!(
                "task `{}` has no mandatory time",
                h.task
            )));
        }
        for &lambda in lambdas {
            let executed = mp + ((lambda - 1.0) * mp).min(h.hole);
            out.push(PrecisionResult {
                task: h.task.clone(),
                lambda,
                mandatory: mp,
                requested: lambda * mp,
                hole: h.hole,
                executed_ic: executed,
                precision_ic: executed / (lambda * mp) * 100.0,
                precision_plain: 100.0 / lambda,
            });
        }
    }
    Ok(out)
}

/// `task,lambda,mode,precision` with one row per mode.
pub fn precision_csv(results: &[PrecisionResult]) -> String {
    let mut s = String::from("task,lambda,mode,precision\n");
    for r in results {
        s += &format!("{},{},ic,{}\n", r.task, r.lambda, r.precision_ic);
        s += &format!("{},{},plain,{}\n", r.task, r.lambda, r.precision_plain);
    }
    s
}
