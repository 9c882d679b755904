//! Oracles shared by the integration tests.
//!
//! Nothing here calls into the scheduler. Schedules are rebuilt from a fixed
//! plan (commit order, processors, routes, durations) with plain
//! append-only timing: a task starts when its processor is free and its
//! inputs are in, and each hop of a message starts when the link is free
//! and no earlier than the previous hop.

#![allow(dead_code)]

use std::collections::HashMap;

use hvlb_core::scheduler::{Hop, ScheduledMessage, ScheduledTask};
use hvlb_core::{Schedule, TaskGraph, Topology};

const TOL: f64 = 1e-9;

/// Everything that fixes a non-insertion list schedule.
#[derive(Clone, Debug)]
pub struct Plan {
    /// Task indices in commit order.
    pub order: Vec<usize>,
    pub processor: Vec<usize>,
    /// Link indices per edge; ignored for edges between co-located tasks.
    pub route: Vec<Vec<usize>>,
    pub duration: Vec<f64>,
    /// Commit position of every edge's message. `None` orders the inputs of
    /// each task by (sender finish, sender index).
    pub message_rank: Option<Vec<usize>>,
}

/// Reads the plan back out of a finished schedule.
pub fn plan_of(schedule: &Schedule, graph: &TaskGraph, topo: &Topology) -> Plan {
    let idx = |id: &str| graph.task_index(id).expect("known task");
    let proc_idx = |id: &str| topo.processor_index(id).expect("known processor");
    let n = graph.len();
    let mut processor = vec![usize::MAX; n];
    let mut duration = vec![0.0; n];
    let order: Vec<usize> = schedule
        .tasks
        .iter()
        .map(|t| {
            let i = idx(&t.id);
            processor[i] = proc_idx(&t.processor);
            duration[i] = t.finish - t.start;
            i
        })
        .collect();
    let mut route = vec![Vec::new(); graph.edges.len()];
    let mut rank = vec![usize::MAX; graph.edges.len()];
    for (k, m) in schedule.messages.iter().enumerate() {
        let e = graph
            .edges
            .iter()
            .position(|e| e.src == m.src && e.dst == m.dst)
            .expect("message matches an edge");
        route[e] = m
            .hops
            .iter()
            .map(|h| topo.link_index(&h.link).expect("known link"))
            .collect();
        rank[e] = k;
    }
    Plan {
        order,
        processor,
        route,
        duration,
        message_rank: Some(rank),
    }
}

/// Rebuilds the schedule a plan implies.
pub fn simulate(plan: &Plan, graph: &TaskGraph, topo: &Topology) -> Schedule {
    let idx: HashMap<&str, usize> = graph
        .tasks
        .iter()
        .enumerate()
        .map(|(i, t)| (t.id.as_str(), i))
        .collect();
    let mut finish = vec![f64::NAN; graph.len()];
    let mut proc_free = vec![0.0f64; topo.processors.len()];
    let mut link_free = vec![0.0f64; topo.links.len()];
    let mut tasks = Vec::new();
    let mut messages = Vec::new();
    for &t in &plan.order {
        let p = plan.processor[t];
        let mut ready = proc_free[p];
        let mut cross = Vec::new();
        for (e, edge) in graph
            .edges
            .iter()
            .enumerate()
            .filter(|(_, e)| idx[e.dst.as_str()] == t)
        {
            let s = idx[edge.src.as_str()];
            assert!(
                !finish[s].is_nan(),
                "plan commits {} before {}",
                edge.dst,
                edge.src
            );
            if plan.processor[s] == p {
                ready = ready.max(finish[s]);
            } else {
                cross.push((e, s));
            }
        }
        match &plan.message_rank {
            Some(rank) => cross.sort_by_key(|&(e, _)| rank[e]),
            None => cross.sort_by(|a, b| finish[a.1].total_cmp(&finish[b.1]).then(a.1.cmp(&b.1))),
        }
        for (e, s) in cross {
            let volume = graph.edges[e].volume;
            let (mut lst, mut lft) = (finish[s], f64::NEG_INFINITY);
            let mut hops = Vec::new();
            for &l in &plan.route[e] {
                lst = lst.max(link_free[l]);
                lft = lft.max(lst + volume / topo.links[l].speed);
                link_free[l] = link_free[l].max(lft);
                hops.push(Hop {
                    link: topo.links[l].id.clone(),
                    start: lst,
                    finish: lft,
                });
            }
            ready = ready.max(lft);
            messages.push(ScheduledMessage {
                src: graph.edges[e].src.clone(),
                dst: graph.edges[e].dst.clone(),
                volume,
                src_processor: topo.processors[plan.processor[s]].id.clone(),
                dst_processor: topo.processors[p].id.clone(),
                hops,
            });
        }
        finish[t] = ready + plan.duration[t];
        proc_free[p] = finish[t];
        tasks.push(ScheduledTask {
            id: graph.tasks[t].id.clone(),
            processor: topo.processors[p].id.clone(),
            start: ready,
            finish: finish[t],
        });
    }
    let makespan = finish.iter().copied().fold(0.0, f64::max);
    Schedule {
        tasks,
        messages,
        makespan,
        alpha: 0.0,
    }
}

// absolute, so the bisection below resolves to about TOL
fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= TOL
}

/// Whether `new` differs from `old` anywhere except the finish of `task`
/// and the intermediate hops of its own messages.
pub fn disturbed(old: &Schedule, new: &Schedule, task: &str) -> bool {
    if !close(old.makespan, new.makespan) {
        return true;
    }
    for (a, b) in old.tasks.iter().zip(&new.tasks) {
        if !close(a.start, b.start) || (a.id != task && !close(a.finish, b.finish)) {
            return true;
        }
    }
    for (a, b) in old.messages.iter().zip(&new.messages) {
        if a.src == task {
            if !close(a.arrival(), b.arrival()) {
                return true;
            }
        } else if a
            .hops
            .iter()
            .zip(&b.hops)
            .any(|(x, y)| !close(x.start, y.start) || !close(x.finish, y.finish))
        {
            return true;
        }
    }
    false
}

/// Replays `schedule` with `task` running `extra` longer.
pub fn stretched(
    schedule: &Schedule,
    graph: &TaskGraph,
    topo: &Topology,
    task: &str,
    extra: f64,
) -> Schedule {
    let mut plan = plan_of(schedule, graph, topo);
    plan.duration[graph.task_index(task).unwrap()] += extra;
    simulate(&plan, graph, topo)
}

/// Largest extension of `task` that disturbs nothing, found by bisection.
pub fn hole_by_replay(schedule: &Schedule, graph: &TaskGraph, topo: &Topology, task: &str) -> f64 {
    let f = schedule.task(task).unwrap().finish;
    // past the makespan something always moves
    let (mut lo, mut hi) = (0.0, schedule.makespan - f + 1.0);
    while hi - lo > 1e-11 {
        let mid = 0.5 * (lo + hi);
        if disturbed(schedule, &stretched(schedule, graph, topo, task, mid), task) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    lo
}

/// Every topological order of the graph.
pub fn topological_orders(graph: &TaskGraph) -> Vec<Vec<usize>> {
    let n = graph.len();
    let mut preds = vec![Vec::new(); n];
    for e in &graph.edges {
        preds[graph.task_index(&e.dst).unwrap()].push(graph.task_index(&e.src).unwrap());
    }
    fn rec(
        preds: &[Vec<usize>],
        done: &mut Vec<bool>,
        cur: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        if cur.len() == preds.len() {
            out.push(cur.clone());
            return;
        }
        for t in 0..preds.len() {
            if !done[t] && preds[t].iter().all(|&p| done[p]) {
                done[t] = true;
                cur.push(t);
                rec(preds, done, cur, out);
                cur.pop();
                done[t] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&preds, &mut vec![false; n], &mut Vec::new(), &mut out);
    out
}

/// Best non-insertion list schedule over every commit order, processor
/// assignment and route choice. `routes(a, b)` lists the link sequences
/// from processor `a` to processor `b`.
pub fn brute_force_optimum(
    graph: &TaskGraph,
    topo: &Topology,
    routes: impl Fn(usize, usize) -> Vec<Vec<usize>>,
) -> Schedule {
    let n = graph.len();
    let p = topo.processors.len();
    let ends: Vec<(usize, usize)> = graph
        .edges
        .iter()
        .map(|e| {
            (
                graph.task_index(&e.src).unwrap(),
                graph.task_index(&e.dst).unwrap(),
            )
        })
        .collect();
    let orders = topological_orders(graph);
    let mut best: Option<Schedule> = None;
    let mut assign = vec![0usize; n];
    loop {
        let duration: Vec<f64> = (0..n)
            .map(|t| graph.tasks[t].weight / topo.processors[assign[t]].rate)
            .collect();
        let options: Vec<Vec<Vec<usize>>> = ends
            .iter()
            .map(|&(s, d)| {
                if assign[s] == assign[d] {
                    vec![Vec::new()]
                } else {
                    routes(assign[s], assign[d])
                }
            })
            .collect();
        let mut pick = vec![0usize; ends.len()];
        loop {
            let route: Vec<Vec<usize>> = pick
                .iter()
                .zip(&options)
                .map(|(&i, o)| o[i].clone())
                .collect();
            for order in &orders {
                let plan = Plan {
                    order: order.clone(),
                    processor: assign.clone(),
                    route: route.clone(),
                    duration: duration.clone(),
                    message_rank: None,
                };
                let s = simulate(&plan, graph, topo);
                if best.as_ref().is_none_or(|b| s.makespan < b.makespan) {
                    best = Some(s);
                }
            }
            if !odometer(&mut pick, |k| options[k].len()) {
                break;
            }
        }
        if !odometer(&mut assign, |_| p) {
            break;
        }
    }
    best.expect("at least one plan")
}

fn odometer(digits: &mut [usize], base: impl Fn(usize) -> usize) -> bool {
    for (k, d) in digits.iter_mut().enumerate() {
        *d += 1;
        if *d < base(k) {
            return true;
        }
        *d = 0;
    }
    false
}

/// All entry-to-exit paths, as task-index sequences.
pub fn all_paths(graph: &TaskGraph) -> Vec<Vec<usize>> {
    let n = graph.len();
    let mut succ = vec![Vec::new(); n];
    let mut has_pred = vec![false; n];
    for e in &graph.edges {
        let (s, d) = (
            graph.task_index(&e.src).unwrap(),
            graph.task_index(&e.dst).unwrap(),
        );
        succ[s].push(d);
        has_pred[d] = true;
    }
    fn rec(succ: &[Vec<usize>], cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        let last = *cur.last().unwrap();
        if succ[last].is_empty() {
            out.push(cur.clone());
        }
        for &s in &succ[last] {
            cur.push(s);
            rec(succ, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    for t in (0..n).filter(|&t| !has_pred[t]) {
        rec(&succ, &mut vec![t], &mut out);
    }
    out
}

/// All paths from `task` to any exit.
pub fn paths_from(graph: &TaskGraph, task: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut stack = vec![vec![task]];
    while let Some(path) = stack.pop() {
        let last = graph.tasks[*path.last().unwrap()].id.as_str();
        let next: Vec<usize> = graph
            .edges
            .iter()
            .filter(|e| e.src == last)
            .map(|e| graph.task_index(&e.dst).unwrap())
            .collect();
        if next.is_empty() {
            out.push(path);
        } else {
            for s in next {
                let mut p = path.clone();
                p.push(s);
                stack.push(p);
            }
        }
    }
    out
}

/// Volume of the edge `a -> b`.
pub fn volume(graph: &TaskGraph, a: usize, b: usize) -> f64 {
    let (a, b) = (&graph.tasks[a].id, &graph.tasks[b].id);
    graph
        .edges
        .iter()
        .find(|e| &e.src == a && &e.dst == b)
        .unwrap()
        .volume
}
