//! The two-phase list scheduler.
//!
//! Tasks are ranked once ([`compute_priority`]) and then dequeued in priority
//! order. Each dequeued task is tried on every processor with every route
//! choice for its incoming messages, and the candidate with the smallest
//! selection value is committed together with its link reservations.
//!
//! ```
//! use hvlb_core::{fixtures, scheduler, Network, Variant};
//!
//! let graph = fixtures::stream_graph();
//! let net = Network::new(fixtures::example_topology()).unwrap();
//! let hsv = scheduler::schedule_once(&graph, &net, Variant::HsvCc, 0.0).unwrap();
//! let hvlb = scheduler::schedule_once(&graph, &net, Variant::HvlbCcA, 0.0).unwrap();
//! assert_eq!(hsv, hvlb);
//! ```

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::graph::{derive_structure, StructureIndex, TaskGraph};
use crate::network::Network;
use crate::{Error, Result};

mod priority;
mod select;

pub use priority::{compute_hrank, compute_priority, compute_rank, PriorityTable};
pub use select::{balance, link_times, Context, Incoming, Placement, PlannedMessage, State};

/// Scheduling algorithm.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    /// Baseline: out-degree weighted priority, `EFT * LDET` selection.
    HsvCc,
    /// Baseline priority with load-balanced selection.
    HvlbCcA,
    /// Priority additionally divided by the squared depth.
    HvlbCcB,
    /// Like [`Variant::HvlbCcB`] with the depth not squared.
    HvlbCcBLinearDepth,
}

impl Variant {
    pub const ALL: [Variant; 4] = [
        Variant::HsvCc,
        Variant::HvlbCcA,
        Variant::HvlbCcB,
        Variant::HvlbCcBLinearDepth,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Variant::HsvCc => "hsv_cc",
            Variant::HvlbCcA => "hvlb_cc_a",
            Variant::HvlbCcB => "hvlb_cc_b",
            Variant::HvlbCcBLinearDepth => "hvlb_cc_b_linear",
        }
    }

    /// Whether the selection value depends on alpha.
    pub fn uses_alpha(self) -> bool {
        self != Variant::HsvCc
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Variant> {
        let key = s.to_ascii_lowercase().replace(['-', ' ', '(', ')'], "_");
        let key = key.trim_matches('_');
        Variant::ALL
            .into_iter()
            .find(|v| v.name() == key)
            .or(match key {
                "hsv" => Some(Variant::HsvCc),
                "a" | "hvlb_a" | "hvlb_cc__a" => Some(Variant::HvlbCcA),
                "b" | "hvlb_b" | "hvlb_cc__b" => Some(Variant::HvlbCcB),
                _ => None,
            })
            .ok_or_else(|| Error::Parameter(format!("unknown variant `{s}`")))
    }
}

/// Evenly spaced alpha values `start, start + step, ..., stop`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlphaGrid {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl Default for AlphaGrid {
    fn default() -> Self {
        AlphaGrid {
            start: 0.0,
            stop: 20.0,
            step: 0.01,
        }
    }
}

impl AlphaGrid {
    pub fn new(start: f64, stop: f64, step: f64) -> Result<AlphaGrid> {
        let g = AlphaGrid { start, stop, step };
        g.check()?;
        Ok(g)
    }

    /// A grid holding the single value `alpha`.
    pub fn single(alpha: f64) -> AlphaGrid {
        AlphaGrid {
            start: alpha,
            stop: alpha,
            step: 1.0,
        }
    }

    pub fn check(&self) -> Result<()> {
        let ok = self.step > 0.0
            && self.start >= 0.0
            && self.start <= self.stop
            && [self.start, self.stop, self.step]
                .iter()
                .all(|x| x.is_finite());
        if ok {
            Ok(())
        } else {
            Err(Error::Parameter(format!(
                "alpha grid needs 0 <= start <= stop and step > 0, got {}..{} step {}",
                self.start, self.stop, self.step
            )))
        }
    }

    /// Grid points computed as `start + i * step` to avoid accumulated drift.
    pub fn points(&self) -> Vec<f64> {
        let n = ((self.stop - self.start) / self.step + 1e-9).floor() as usize;
        (0..=n).map(|i| self.start + i as f64 * self.step).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScheduledTask {
    pub id: String,
    pub processor: String,
    pub start: f64,
    pub finish: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Hop {
    pub link: String,
    pub start: f64,
    pub finish: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScheduledMessage {
    pub src: String,
    pub dst: String,
    pub volume: f64,
    pub src_processor: String,
    pub dst_processor: String,
    pub hops: Vec<Hop>,
}

impl ScheduledMessage {
    /// Finish time on the last link.
    pub fn arrival(&self) -> f64 {
        self.hops.last().map_or(0.0, |h| h.finish)
    }
}

/// A complete schedule. Tasks and messages are listed in commit order; the
/// messages of a task are committed together with it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub tasks: Vec<ScheduledTask>,
    pub messages: Vec<ScheduledMessage>,
    pub makespan: f64,
    pub alpha: f64,
}

impl Schedule {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("schedule serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Schedule> {
        serde_json::from_str(text)
            .map_err(|e| Error::Parse(format!("line {}, column {}: {e}", e.line(), e.column())))
    }

    pub fn task(&self, id: &str) -> Option<&ScheduledTask> {
        self.tasks.iter().find(|t| t.id == id)
    }

    /// Tasks on `processor` in start order.
    pub fn tasks_on<'a>(
        &'a self,
        processor: &'a str,
    ) -> impl Iterator<Item = &'a ScheduledTask> + 'a {
        self.tasks.iter().filter(move |t| t.processor == processor)
    }
}

/// A prepared scheduling problem: structure and priorities are computed once
/// and reused for every alpha.
pub struct Problem<'a> {
    pub graph: &'a TaskGraph,
    pub network: &'a Network,
    pub structure: StructureIndex,
    pub priority: PriorityTable,
    pub variant: Variant,
}

impl<'a> Problem<'a> {
    pub fn new(graph: &'a TaskGraph, network: &'a Network, variant: Variant) -> Result<Self> {
        let structure = derive_structure(graph)?;
        let priority = compute_priority(graph, &structure, network, variant);
        Ok(Problem {
            graph,
            network,
            structure,
            priority,
            variant,
        })
    }

    /// The scheduling failure implied by the priority order, if any. It does
    /// not depend on alpha.
    pub fn failure(&self) -> Option<Error> {
        self.priority
            .first_violation(&self.structure)
            .map(|(t, p)| Error::SchedulingFailure {
                task: self.graph.tasks[t].id.clone(),
                predecessor: self.graph.tasks[p].id.clone(),
            })
    }

    fn context(&self) -> Context<'_> {
        Context {
            graph: self.graph,
            structure: &self.structure,
            network: self.network,
            priority: &self.priority,
        }
    }

    pub fn run(&self, alpha: f64) -> Result<Schedule> {
        self.execute(alpha, true)
            .map(|(_, s)| s.expect("materialized"))
    }

    /// Makespan only; skips building the output records.
    pub fn makespan(&self, alpha: f64) -> Result<f64> {
        self.execute(alpha, false).map(|(m, _)| m)
    }

    fn execute(&self, alpha: f64, materialize: bool) -> Result<(f64, Option<Schedule>)> {
        let alpha = if self.variant.uses_alpha() {
            alpha
        } else {
            0.0
        };
        let ctx = self.context();
        let net = self.network;
        let topo = net.topology();
        let mut state = State::new(self.graph.len(), net);
        let mut tasks = Vec::new();
        let mut messages = Vec::new();
        let mut message_count = 0;
        for &t in &self.priority.order {
            let mut best: Option<(f64, Placement)> = None;
            for dest in 0..net.processor_count() {
                let placement = ctx.est_eft(&state, t, dest)?;
                let value = ctx.value(&state, t, &placement, self.variant, alpha);
                if best.as_ref().is_none_or(|b| value < b.0) {
                    best = Some((value, placement));
                }
            }
            let (_, win) = best.ok_or_else(|| Error::Parameter("no processors".into()))?;
            let p = win.processor;
            for m in ctx.plan_messages(&state, &win) {
                for &(l, s, f) in &m.hops {
                    state.calendar.reserve(l, message_count, s, f)?;
                }
                message_count += 1;
                if materialize {
                    let edge = &self.graph.edges[m.edge];
                    messages.push(ScheduledMessage {
                        src: edge.src.clone(),
                        dst: edge.dst.clone(),
                        volume: edge.volume,
                        src_processor: topo.processors[m.src_proc].id.clone(),
                        dst_processor: topo.processors[p].id.clone(),
                        hops: m
                            .hops
                            .iter()
                            .map(|&(l, s, f)| Hop {
                                link: topo.links[l].id.clone(),
                                start: s,
                                finish: f,
                            })
                            .collect(),
                    });
                }
            }
            state.proc_of[t] = Some(p);
            state.start[t] = win.est;
            state.finish[t] = win.eft;
            state.avail[p] = win.eft;
            state.load[p] += win.eft - win.est;
            if materialize {
                tasks.push(ScheduledTask {
                    id: self.graph.tasks[t].id.clone(),
                    processor: topo.processors[p].id.clone(),
                    start: win.est,
                    finish: win.eft,
                });
            }
        }
        let makespan = self
            .structure
            .exits()
            .map(|t| state.finish[t])
            .fold(0.0, f64::max);
        let schedule = materialize.then_some(Schedule {
            tasks,
            messages,
            makespan,
            alpha,
        });
        Ok((makespan, schedule))
    }
}

/// Schedules `graph` once with a fixed alpha.
pub fn schedule_once(
    graph: &TaskGraph,
    network: &Network,
    variant: Variant,
    alpha: f64,
) -> Result<Schedule> {
    let problem = Problem::new(graph, network, variant)?;
    if let Some(e) = problem.failure() {
        return Err(e);
    }
    problem.run(alpha)
}

/// Best schedule over an alpha grid plus the whole `(alpha, makespan)` curve.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepResult {
    pub best: Schedule,
    pub curve: Vec<(f64, f64)>,
}

/// Runs every grid point and keeps the smallest makespan, preferring the
/// smaller alpha on ties. The baseline has no alpha and runs once.
pub fn schedule_sweep(
    graph: &TaskGraph,
    network: &Network,
    variant: Variant,
    grid: &AlphaGrid,
) -> Result<SweepResult> {
    grid.check()?;
    let problem = Problem::new(graph, network, variant)?;
    if let Some(e) = problem.failure() {
        return Err(e);
    }
    let points = if variant.uses_alpha() {
        grid.points()
    } else {
        vec![0.0]
    };
    let curve: Vec<(f64, f64)> = points
        .par_iter()
        .map(|&a| problem.makespan(a).map(|m| (a, m)))
        .collect::<Result<_>>()?;
    let (alpha, _) = curve
        .iter()
        .copied()
        .reduce(|a, b| if b.1 < a.1 { b } else { a })
        .expect("grid is non-empty");
    let best = problem.run(alpha)?;
    Ok(SweepResult { best, curve })
}
