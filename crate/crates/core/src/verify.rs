//! Schedule checker written against the file formats only.
//!
//! It recomputes computation times from the raw topology and walks the raw
//! link list, sharing no logic with the scheduler, so it can be trusted to
//! catch scheduler bugs.

use std::collections::{HashMap, HashSet};
use std::fmt;

use crate::graph::TaskGraph;
use crate::network::{CompRounding, Topology};
use crate::scheduler::Schedule;

const EPS: f64 = 1e-9;

#[derive(Clone, Debug, Default, PartialEq)]
pub struct VerifyReport {
    pub violations: Vec<String>,
}

impl VerifyReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for VerifyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_ok() {
            return f.write_str("schedule is valid");
        }
        for v in &self.violations {
            writeln!(f, "{v}")?;
        }
        Ok(())
    }
}

fn tol(x: f64) -> f64 {
    EPS * x.abs().max(1.0)
}

fn comp(weight: f64, rate: f64, rounding: CompRounding) -> f64 {
    let t = weight / rate;
    if rounding == CompRounding::HalfUp {
        (t + 0.5 + 1e-9).floor()
    } else {
        t
    }
}

/// Checks task durations, processor exclusivity, link exclusivity, message
/// routes and timing, precedence with arrival, and the makespan.
pub fn verify(schedule: &Schedule, graph: &TaskGraph, topology: &Topology) -> VerifyReport {
    let mut v = Vec::new();
    let rate: HashMap<&str, f64> = topology
        .processors
        .iter()
        .map(|p| (p.id.as_str(), p.rate))
        .collect();
    let weight: HashMap<&str, f64> = graph
        .tasks
        .iter()
        .map(|t| (t.id.as_str(), t.weight))
        .collect();

    let mut placed = HashMap::new();
    for t in &schedule.tasks {
        let Some(&w) = weight.get(t.id.as_str()) else {
            v.push(format!("unknown task `{}` in schedule", t.id));
            continue;
        };
        let Some(&mu) = rate.get(t.processor.as_str()) else {
            v.push(format!(
                "task `{}` on unknown processor `{}`",
                t.id, t.processor
            ));
            continue;
        };
        if placed.insert(t.id.as_str(), t).is_some() {
            v.push(format!("task `{}` scheduled twice", t.id));
        }
        if t.start < -EPS {
            v.push(format!("task `{}` starts before 0", t.id));
        }
        let c = comp(w, mu, topology.comp_rounding);
        if (t.finish - t.start - c).abs() > tol(c) {
            v.push(format!(
                "task `{}` runs {} but needs {c} on `{}`",
                t.id,
                t.finish - t.start,
                t.processor
            ));
        }
    }
    for t in &graph.tasks {
        if !placed.contains_key(t.id.as_str()) {
            v.push(format!("task `{}` is not scheduled", t.id));
        }
    }

    // processor exclusivity
    let mut per_proc: HashMap<&str, Vec<(f64, f64, &str)>> = HashMap::new();
    for t in &schedule.tasks {
        per_proc
            .entry(&t.processor)
            .or_default()
            .push((t.start, t.finish, &t.id));
    }
    for (p, mut list) in per_proc {
        list.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
        overlaps(
            &list,
            |a, b| format!("tasks `{a}` and `{b}` overlap on `{p}`"),
            &mut v,
        );
    }

    // messages
    let link_ends: HashMap<&str, (&str, &str, f64)> = topology
        .links
        .iter()
        .map(|l| (l.id.as_str(), (l.a.as_str(), l.b.as_str(), l.speed)))
        .collect();
    let mut by_edge: HashMap<(&str, &str), usize> = HashMap::new();
    let mut per_link: HashMap<&str, Vec<(f64, f64, String)>> = HashMap::new();
    for (k, m) in schedule.messages.iter().enumerate() {
        let name = format!("{}->{}", m.src, m.dst);
        if by_edge.insert((&m.src, &m.dst), k).is_some() {
            v.push(format!("message {name} appears twice"));
        }
        let (Some(s), Some(d)) = (placed.get(m.src.as_str()), placed.get(m.dst.as_str())) else {
            continue;
        };
        if s.processor != m.src_processor || d.processor != m.dst_processor {
            v.push(format!(
                "message {name} endpoints disagree with task placement"
            ));
        }
        if m.hops.is_empty() {
            v.push(format!("message {name} has no route"));
            continue;
        }
        // walk the route through the topology
        let mut at = m.src_processor.as_str();
        let mut visited = HashSet::from([at]);
        let mut prev: Option<(f64, f64)> = None;
        for h in &m.hops {
            let Some(&(a, b, speed)) = link_ends.get(h.link.as_str()) else {
                v.push(format!("message {name} uses unknown link `{}`", h.link));
                break;
            };
            at = if a == at {
                b
            } else if b == at {
                a
            } else {
                v.push(format!(
                    "message {name}: link `{}` is not attached to `{at}`",
                    h.link
                ));
                break;
            };
            if !visited.insert(at) {
                v.push(format!("message {name} revisits `{at}`"));
            }
            let need = m.volume / speed;
            if h.finish - h.start < need - tol(need) {
                v.push(format!("message {name} too short on `{}`", h.link));
            }
            match prev {
                None if h.start < s.finish - tol(s.finish) => {
                    v.push(format!("message {name} leaves before its source finishes"))
                }
                Some((ps, pf)) if h.start < ps - tol(ps) || h.finish < pf - tol(pf) => {
                    v.push(format!("message {name} goes backwards on `{}`", h.link))
                }
                _ => {}
            }
            prev = Some((h.start, h.finish));
            per_link
                .entry(link_key(&link_ends, &h.link))
                .or_default()
                .push((h.start, h.finish, name.clone()));
        }
        if at != m.dst_processor {
            v.push(format!(
                "message {name} does not reach `{}`",
                m.dst_processor
            ));
        }
        if d.start < m.arrival() - tol(m.arrival()) {
            v.push(format!(
                "task `{}` starts before message {name} arrives",
                m.dst
            ));
        }
    }
    for (l, mut list) in per_link {
        list.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
        let named: Vec<(f64, f64, &str)> = list.iter().map(|x| (x.0, x.1, x.2.as_str())).collect();
        overlaps(
            &named,
            |a, b| format!("messages {a} and {b} overlap on `{l}`"),
            &mut v,
        );
    }

    // precedence
    for e in &graph.edges {
        let (Some(s), Some(d)) = (placed.get(e.src.as_str()), placed.get(e.dst.as_str())) else {
            continue;
        };
        if d.start < s.finish - tol(s.finish) {
            v.push(format!(
                "task `{}` starts before predecessor `{}` finishes",
                e.dst, e.src
            ));
        }
        let has_msg = by_edge.contains_key(&(e.src.as_str(), e.dst.as_str()));
        if s.processor != d.processor && !has_msg {
            v.push(format!(
                "edge {}->{} crosses processors without a message",
                e.src, e.dst
            ));
        }
        if s.processor == d.processor && has_msg {
            v.push(format!(
                "edge {}->{} is local but has a message",
                e.src, e.dst
            ));
        }
    }
    let edges: HashSet<(&str, &str)> = graph
        .edges
        .iter()
        .map(|e| (e.src.as_str(), e.dst.as_str()))
        .collect();
    for m in &schedule.messages {
        if !edges.contains(&(m.src.as_str(), m.dst.as_str())) {
            v.push(format!("message {}->{} has no edge", m.src, m.dst));
        }
    }

    let last = schedule.tasks.iter().map(|t| t.finish).fold(0.0, f64::max);
    if (schedule.makespan - last).abs() > tol(last) {
        v.push(format!(
            "makespan {} but last finish {last}",
            schedule.makespan
        ));
    }
    VerifyReport { violations: v }
}

fn link_key<'a>(ends: &HashMap<&'a str, (&'a str, &'a str, f64)>, id: &str) -> &'a str {
    ends.get_key_value(id)
        .map(|(k, _)| *k)
        .expect("link checked above")
}

/// Flags consecutive positive-length intervals that intersect.
fn overlaps(
    sorted: &[(f64, f64, &str)],
    msg: impl Fn(&str, &str) -> String,
    out: &mut Vec<String>,
) {
    let mut open: Option<(f64, &str)> = None;
    for &(s, f, name) in sorted {
        if f - s <= 0.0 {
            continue;
        }
        if let Some((end, who)) = open {
            if s < end - tol(end) {
                out.push(msg(who, name));
            }
            if f > end {
                open = Some((f, name));
            }
        } else {
            open = Some((f, name));
        }
    }
}
