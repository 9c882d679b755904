//! Processor and route selection for a single task.
//!
//! Candidates are evaluated against a read-only view of the partial schedule.
//! Only the winning candidate is committed.

use smallvec::SmallVec;

use super::priority::PriorityTable;
use super::Variant;
use crate::graph::{StructureIndex, TaskGraph};
use crate::network::{ctml, LinkCalendar, Network};
use crate::{Error, Result};

/// Route choices are enumerated jointly up to this many cross-processor
/// predecessors; beyond it each message takes its own fastest route.
const JOINT_ROUTE_LIMIT: usize = 2;

/// Mutable state of one scheduling run.
#[derive(Clone, Debug)]
pub struct State {
    pub proc_of: Vec<Option<usize>>,
    pub start: Vec<f64>,
    pub finish: Vec<f64>,
    /// Finish time of the last task committed on each processor.
    pub avail: Vec<f64>,
    /// Sum of computation times assigned to each processor.
    pub load: Vec<f64>,
    pub calendar: LinkCalendar,
}

impl State {
    pub fn new(tasks: usize, network: &Network) -> Self {
        State {
            proc_of: vec![None; tasks],
            start: vec![0.0; tasks],
            finish: vec![0.0; tasks],
            avail: vec![0.0; network.processor_count()],
            load: vec![0.0; network.processor_count()],
            calendar: LinkCalendar::new(network.link_count()),
        }
    }
}

/// Link timing of one message along its route.
#[derive(Clone, Debug, PartialEq)]
pub struct PlannedMessage {
    pub pred: usize,
    pub edge: usize,
    pub src_proc: usize,
    pub route_index: usize,
    /// `(link, start, finish)` per hop.
    pub hops: Vec<(usize, f64, f64)>,
}

impl PlannedMessage {
    pub fn arrival(&self) -> f64 {
        self.hops.last().map_or(0.0, |h| h.2)
    }
}

/// An incoming message that has to cross processors.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Incoming {
    pub pred: usize,
    pub edge: usize,
    pub volume: f64,
    pub src_proc: usize,
}

/// Result of placing a task on one processor.
#[derive(Clone, Debug, PartialEq)]
pub struct Placement {
    pub processor: usize,
    pub est: f64,
    pub eft: f64,
    /// Cross-processor messages in the order they are planned, ordered by
    /// predecessor finish time and then index.
    pub incoming: SmallVec<[Incoming; 4]>,
    /// Chosen route index per incoming message.
    pub routes: SmallVec<[usize; 4]>,
}

/// Per-link start and finish of a message leaving at `ready`.
///
/// The first link starts when both the data and the link are ready; each
/// further link starts no earlier than the previous one and finishes no
/// earlier than the previous link's finish.
pub fn link_times(
    network: &Network,
    route: &[usize],
    volume: f64,
    ready: f64,
    avail: impl Fn(usize) -> f64,
) -> Vec<(usize, f64, f64)> {
    let mut hops = Vec::with_capacity(route.len());
    walk(network, route, volume, ready, avail, |l, s, f| {
        hops.push((l, s, f))
    });
    hops
}

/// Core of [`link_times`]; returns the final-link finish.
fn walk(
    network: &Network,
    route: &[usize],
    volume: f64,
    ready: f64,
    avail: impl Fn(usize) -> f64,
    mut hop: impl FnMut(usize, f64, f64),
) -> f64 {
    let (mut lst, mut lft) = (ready, f64::NEG_INFINITY);
    for &l in route {
        lst = lst.max(avail(l));
        lft = lft.max(lst + ctml(volume, network.link_speed(l)));
        hop(l, lst, lft);
    }
    lft
}

/// Evaluation context shared by all candidates of one task.
pub struct Context<'a> {
    pub graph: &'a TaskGraph,
    pub structure: &'a StructureIndex,
    pub network: &'a Network,
    pub priority: &'a PriorityTable,
}

impl Context<'_> {
    pub fn comp(&self, task: usize, processor: usize) -> f64 {
        self.network
            .comp_time(self.graph.tasks[task].weight, processor)
    }

    /// `rank - comp`, or exactly 1 for exit tasks.
    pub fn ldet(&self, task: usize, processor: usize) -> f64 {
        if self.structure.is_exit(task) {
            1.0
        } else {
            self.priority.rank[task][processor] - self.comp(task, processor)
        }
    }

    /// Earliest start/finish of `task` on `dest` with the best route choice
    /// for its incoming messages. Pure: the state is not modified.
    pub fn est_eft(&self, state: &State, task: usize, dest: usize) -> Result<Placement> {
        let mut local_ready = 0.0f64;
        let mut incoming: SmallVec<[Incoming; 4]> = SmallVec::new();
        for p in self.structure.preds(task) {
            let Some(src) = state.proc_of[p.task] else {
                return Err(Error::SchedulingFailure {
                    task: self.graph.tasks[task].id.clone(),
                    predecessor: self.graph.tasks[p.task].id.clone(),
                });
            };
            if src == dest {
                local_ready = local_ready.max(state.finish[p.task]);
            } else {
                incoming.push(Incoming {
                    pred: p.task,
                    edge: p.edge,
                    volume: p.volume,
                    src_proc: src,
                });
            }
        }
        incoming.sort_by(|a, b| {
            state.finish[a.pred]
                .total_cmp(&state.finish[b.pred])
                .then(a.pred.cmp(&b.pred))
        });
        let base = state.avail[dest].max(local_ready);

        let (arrival, routes) = if incoming.len() <= JOINT_ROUTE_LIMIT {
            self.joint_routes(state, dest, &incoming)
        } else {
            self.greedy_routes(state, dest, &incoming)
        };
        let est = base.max(arrival);
        Ok(Placement {
            processor: dest,
            est,
            eft: est + self.comp(task, dest),
            incoming,
            routes,
        })
    }

    /// Latest arrival over the first `choice.len()` messages when planned in
    /// order, each seeing the links taken by the ones before it. The arrival
    /// of the last planned message is returned as well.
    fn arrivals(
        &self,
        state: &State,
        dest: usize,
        incoming: &[Incoming],
        choice: &[usize],
    ) -> (f64, f64) {
        let mut taken: SmallVec<[(usize, f64); 16]> = SmallVec::new();
        let mut fresh: SmallVec<[(usize, f64); 8]> = SmallVec::new();
        let (mut latest, mut last) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
        for (m, &ri) in incoming.iter().zip(choice) {
            let route = &self.network.routes(m.src_proc, dest)[ri];
            let avail = |l: usize| {
                taken
                    .iter()
                    .filter(|t| t.0 == l)
                    .map(|t| t.1)
                    .fold(state.calendar.avail(l), f64::max)
            };
            fresh.clear();
            last = walk(
                self.network,
                route,
                m.volume,
                state.finish[m.pred],
                avail,
                |l, _, f| fresh.push((l, f)),
            );
            taken.extend_from_slice(&fresh);
            latest = latest.max(last);
        }
        (latest, last)
    }

    fn joint_routes(
        &self,
        state: &State,
        dest: usize,
        incoming: &[Incoming],
    ) -> (f64, SmallVec<[usize; 4]>) {
        let counts: SmallVec<[usize; 4]> = incoming
            .iter()
            .map(|m| self.network.routes(m.src_proc, dest).len())
            .collect();
        let mut choice: SmallVec<[usize; 4]> = SmallVec::from_elem(0, incoming.len());
        let mut best = (f64::INFINITY, SmallVec::new());
        loop {
            let (arrival, _) = self.arrivals(state, dest, incoming, &choice);
            // lexicographic enumeration, so strict improvement keeps the
            // smallest combination on ties
            if arrival < best.0 {
                best = (arrival, choice.clone());
            }
            if !advance(&mut choice, &counts) {
                break;
            }
        }
        best
    }

    fn greedy_routes(
        &self,
        state: &State,
        dest: usize,
        incoming: &[Incoming],
    ) -> (f64, SmallVec<[usize; 4]>) {
        let mut choice: SmallVec<[usize; 4]> = SmallVec::with_capacity(incoming.len());
        for k in 0..incoming.len() {
            let n = self.network.routes(incoming[k].src_proc, dest).len();
            let mut best = (f64::INFINITY, 0);
            for ri in 0..n {
                choice.push(ri);
                let (_, last) = self.arrivals(state, dest, &incoming[..=k], &choice);
                choice.pop();
                if last < best.0 {
                    best = (last, ri);
                }
            }
            choice.push(best.1);
        }
        let (arrival, _) = self.arrivals(state, dest, incoming, &choice);
        (arrival, choice)
    }

    /// Link timing of every incoming message of a placement.
    pub fn plan_messages(&self, state: &State, placement: &Placement) -> Vec<PlannedMessage> {
        let dest = placement.processor;
        let mut taken: Vec<(usize, f64)> = Vec::new();
        let mut out = Vec::with_capacity(placement.incoming.len());
        for (m, &ri) in placement.incoming.iter().zip(&placement.routes) {
            let route = &self.network.routes(m.src_proc, dest)[ri];
            let hops = link_times(self.network, route, m.volume, state.finish[m.pred], |l| {
                taken
                    .iter()
                    .filter(|t| t.0 == l)
                    .map(|t| t.1)
                    .fold(state.calendar.avail(l), f64::max)
            });
            taken.extend(hops.iter().map(|h| (h.0, h.2)));
            out.push(PlannedMessage {
                pred: m.pred,
                edge: m.edge,
                src_proc: m.src_proc,
                route_index: ri,
                hops,
            });
        }
        out
    }

    /// Selection value of a placement; smaller is better.
    pub fn value(
        &self,
        state: &State,
        task: usize,
        placement: &Placement,
        variant: Variant,
        alpha: f64,
    ) -> f64 {
        let ldet = self.ldet(task, placement.processor);
        match variant {
            Variant::HsvCc => placement.eft * ldet,
            _ if self.structure.is_exit(task) => placement.eft,
            _ => {
                placement.eft
                    * ldet
                    * balance(state.load[placement.processor], self.graph.period, alpha)
            }
        }
    }
}

/// Load-balancing factor `1 + (load / period) * alpha`.
pub fn balance(load: f64, period: f64, alpha: f64) -> f64 {
    1.0 + (load / period) * alpha
}

/// Odometer increment in lexicographic order; false once exhausted.
fn advance(choice: &mut [usize], counts: &[usize]) -> bool {
    for i in (0..choice.len()).rev() {
        choice[i] += 1;
        if choice[i] < counts[i] {
            return true;
        }
        choice[i] = 0;
    }
    false
}
