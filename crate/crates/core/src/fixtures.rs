//! Bundled example instances.
//!
//! * `topology.json`: three processors and one switch; links
//!   `l1: p1-S1` (speed 1), `l2: S1-p2` (1), `l3: p2-p3` (3), `l4: S1-p3` (2).
//!   Processor rates are 2/3, 1 and 5/6.
//! * `stream_graph.json`: the ten-task stream-processing graph whose weights
//!   give computation times 18/12/14, 12/8/10, ... after half-up rounding.
//!   Edge volumes are not canonical; they are chosen so that the CCR on the
//!   bundled topology is exactly 1.
//! * `imprecise_graph.json`: the same structure with the heavier weights used for
//!   the precision experiment, with `n2` and `n5` marked imprecise.

use crate::graph::{self, Edge, Task, TaskGraph};
use crate::network::{CompRounding, Link, Processor, Switch, Topology};

pub const EXAMPLE_TOPOLOGY: &str = include_str!("../fixtures/topology.json");
pub const STREAM_GRAPH: &str = include_str!("../fixtures/stream_graph.json");
pub const IMPRECISE_GRAPH: &str = include_str!("../fixtures/imprecise_graph.json");

/// Processor execution rates. The two slower rates are usually printed as
/// 0.67 and 0.83.
pub const RATE_SLOW: f64 = 2.0 / 3.0;
pub const RATE_MID: f64 = 5.0 / 6.0;
pub const RATE_FAST: f64 = 1.0;

pub fn example_topology() -> Topology {
    Topology::from_json(EXAMPLE_TOPOLOGY).expect("bundled topology parses")
}

pub fn stream_graph() -> TaskGraph {
    graph::from_json(STREAM_GRAPH).expect("bundled graph parses")
}

pub fn imprecise_graph() -> TaskGraph {
    graph::from_json(IMPRECISE_GRAPH).expect("bundled graph parses")
}

/// The six orderings of the three rates over `(p1, p2, p3)`.
pub fn rate_permutations() -> [[f64; 3]; 6] {
    let (s, m, f) = (RATE_SLOW, RATE_MID, RATE_FAST);
    [
        [f, s, m],
        [m, s, f],
        [s, m, f],
        [f, m, s],
        [m, f, s],
        [s, f, m],
    ]
}

/// `"1.0,0.67,0.83"` style label.
pub fn rate_label(rates: &[f64]) -> String {
    rates
        .iter()
        .map(|r| {
            if (r - RATE_FAST).abs() < 1e-12 {
                "1.0".to_string()
            } else {
                format!("{r:.2}")
            }
        })
        .collect::<Vec<_>>()
        .join(",")
}

/// Two unit-rate processors joined by a single link.
pub fn two_processor_topology(speed: f64) -> Topology {
    Topology {
        processors: vec![
            Processor {
                id: "p1".into(),
                rate: 1.0,
            },
            Processor {
                id: "p2".into(),
                rate: 1.0,
            },
        ],
        switches: vec![],
        links: vec![Link {
            id: "l1".into(),
            a: "p1".into(),
            b: "p2".into(),
            speed,
        }],
        comp_rounding: CompRounding::None,
    }
}

/// Two processors with two sub-routes between them: a direct slow link and a
/// faster two-hop path through a switch.
pub fn two_route_topology(rates: [f64; 2]) -> Topology {
    Topology {
        processors: vec![
            Processor {
                id: "p1".into(),
                rate: rates[0],
            },
            Processor {
                id: "p2".into(),
                rate: rates[1],
            },
        ],
        switches: vec![Switch { id: "S1".into() }],
        links: vec![
            Link {
                id: "l1".into(),
                a: "p1".into(),
                b: "p2".into(),
                speed: 1.0,
            },
            Link {
                id: "l2".into(),
                a: "p1".into(),
                b: "S1".into(),
                speed: 3.0,
            },
            Link {
                id: "l3".into(),
                a: "S1".into(),
                b: "p2".into(),
                speed: 2.0,
            },
        ],
        comp_rounding: CompRounding::None,
    }
}

/// A single-task graph, handy for edge cases.
pub fn single_task(weight: f64) -> TaskGraph {
    TaskGraph::new(
        weight.max(1.0),
        vec![Task::new("n1", weight)],
        Vec::<Edge>::new(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_parse() {
        assert_eq!(stream_graph().len(), 10);
        assert_eq!(stream_graph().edges.len(), 13);
        let g = imprecise_graph();
        let imprecise: Vec<&str> = g
            .tasks
            .iter()
            .filter(|t| t.imprecise)
            .map(|t| t.id.as_str())
            .collect();
        assert_eq!(imprecise, ["n2", "n5"]);
        assert_eq!(example_topology().links.len(), 4);
    }

    #[test]
    fn labels() {
        assert_eq!(rate_label(&rate_permutations()[0]), "1.0,0.67,0.83");
        assert_eq!(rate_label(&rate_permutations()[5]), "0.67,1.0,0.83");
    }
}
