//! Heterogeneous network model.
//!
//! A [`Topology`] is an undirected graph of processors and switches joined by
//! links of differing speeds. [`Network`] is the prepared form the scheduler
//! works with: every ordered processor pair has its sub-routes enumerated and
//! the route, pair and per-source transfer speeds are precomputed exactly.

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

mod calendar;
mod routes;

pub use calendar::{LinkCalendar, Reservation};
pub use routes::enumerate_routes;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Processor {
    pub id: String,
    /// Execution rate in operations per time unit.
    pub rate: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Switch {
    pub id: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Link {
    pub id: String,
    pub a: String,
    pub b: String,
    /// Data units per time unit.
    pub speed: f64,
}

/// How `weight / rate` is turned into a computation time.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CompRounding {
    #[default]
    None,
    /// Round half up to an integer.
    HalfUp,
}

fn is_default_rounding(r: &CompRounding) -> bool {
    *r == CompRounding::None
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Topology {
    pub processors: Vec<Processor>,
    #[serde(default)]
    pub switches: Vec<Switch>,
    pub links: Vec<Link>,
    #[serde(default, skip_serializing_if = "is_default_rounding")]
    pub comp_rounding: CompRounding,
}

impl Topology {
    /// Same wiring with the processor rates replaced in order.
    pub fn with_rates(&self, rates: &[f64]) -> Topology {
        assert_eq!(rates.len(), self.processors.len(), "one rate per processor");
        let mut t = self.clone();
        for (p, &r) in t.processors.iter_mut().zip(rates) {
            p.rate = r;
        }
        t
    }

    pub fn with_rounding(&self, rounding: CompRounding) -> Topology {
        Topology {
            comp_rounding: rounding,
            ..self.clone()
        }
    }

    pub fn from_json(text: &str) -> Result<Topology> {
        serde_json::from_str(text)
            .map_err(|e| Error::Parse(format!("line {}, column {}: {e}", e.line(), e.column())))
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("topology serializes");
        s.push('\n');
        s
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Topology> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Topology::from_json(&text)
    }

    pub fn store(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }

    pub fn processor_index(&self, id: &str) -> Option<usize> {
        self.processors.iter().position(|p| p.id == id)
    }

    pub fn link_index(&self, id: &str) -> Option<usize> {
        self.links.iter().position(|l| l.id == id)
    }
}

/// Sequence of link indices leading from the source to the destination
/// processor.
pub type Route = Vec<usize>;

/// Exact speed of a sub-route: the slowest of its links.
pub fn route_speed(topology: &Topology, route: &[usize]) -> Result<BigRational> {
    route
        .iter()
        .map(|&l| exact(topology.links[l].speed))
        .min()
        .ok_or_else(|| Error::Parameter("empty route".into()))
}

/// `volume / speed(link)`.
pub fn ctml(volume: f64, link_speed: f64) -> f64 {
    volume / link_speed
}

fn exact(x: f64) -> BigRational {
    BigRational::from_float(x).expect("finite speed")
}

fn mean(values: &[BigRational]) -> BigRational {
    let sum = values.iter().fold(BigRational::zero(), |acc, v| acc + v);
    sum / BigRational::from_integer(BigInt::from(values.len()))
}

/// A validated topology with precomputed routes and speeds.
#[derive(Clone, Debug)]
pub struct Network {
    topology: Topology,
    /// `routes[src * P + dst]`, lexicographic by link index.
    routes: Vec<Vec<Route>>,
    pair_speed: Vec<BigRational>,
    processor_speed: Vec<BigRational>,
    processor_speed_f64: Vec<f64>,
    link_speed: Vec<f64>,
}

impl Network {
    pub fn new(topology: Topology) -> Result<Network> {
        check_topology(&topology)?;
        let p = topology.processors.len();
        let mut routes = vec![Vec::new(); p * p];
        let mut pair_speed = vec![BigRational::zero(); p * p];
        for s in 0..p {
            for d in 0..p {
                if s == d {
                    continue;
                }
                let rs = enumerate_routes(&topology, s, d)?;
                let speeds: Vec<BigRational> = rs
                    .iter()
                    .map(|r| route_speed(&topology, r))
                    .collect::<Result<_>>()?;
                pair_speed[s * p + d] = mean(&speeds);
                routes[s * p + d] = rs;
            }
        }
        let processor_speed: Vec<BigRational> = (0..p)
            .map(|s| {
                if p < 2 {
                    return BigRational::zero();
                }
                let others: Vec<BigRational> = (0..p)
                    .filter(|&d| d != s)
                    .map(|d| pair_speed[s * p + d].clone())
                    .collect();
                mean(&others)
            })
            .collect();
        let processor_speed_f64 = processor_speed
            .iter()
            .map(|s| s.to_f64().unwrap_or(f64::NAN))
            .collect();
        let link_speed = topology.links.iter().map(|l| l.speed).collect();
        Ok(Network {
            topology,
            routes,
            pair_speed,
            processor_speed,
            processor_speed_f64,
            link_speed,
        })
    }

    pub fn topology(&self) -> &Topology {
        &self.topology
    }

    pub fn processor_count(&self) -> usize {
        self.topology.processors.len()
    }

    pub fn link_count(&self) -> usize {
        self.topology.links.len()
    }

    pub fn rate(&self, processor: usize) -> f64 {
        self.topology.processors[processor].rate
    }

    pub fn link_speed(&self, link: usize) -> f64 {
        self.link_speed[link]
    }

    /// Sub-routes from `src` to `dst` in deterministic order.
    pub fn routes(&self, src: usize, dst: usize) -> &[Route] {
        &self.routes[src * self.processor_count() + dst]
    }

    /// Mean of the sub-route speeds between two processors.
    pub fn pair_speed(&self, src: usize, dst: usize) -> Result<&BigRational> {
        if src == dst || self.routes(src, dst).is_empty() {
            return Err(Error::NoRoute {
                src: self.topology.processors[src].id.clone(),
                dst: self.topology.processors[dst].id.clone(),
            });
        }
        Ok(&self.pair_speed[src * self.processor_count() + dst])
    }

    /// Data-transfer speed of a source processor: the mean pair speed to every
    /// other processor.
    pub fn processor_speed(&self, src: usize) -> Result<&BigRational> {
        if self.processor_count() < 2 {
            return Err(Error::Parameter(
                "processor speed needs at least two processors".into(),
            ));
        }
        Ok(&self.processor_speed[src])
    }

    /// Transfer time of `volume` sent from `src`; zero for intra-processor
    /// edges, which callers handle by not calling this.
    pub fn comm_time(&self, volume: f64, src: usize) -> f64 {
        if volume == 0.0 {
            return 0.0;
        }
        volume / self.processor_speed_f64[src]
    }

    /// Computation time of `weight` on `processor`, honouring the topology's
    /// rounding mode.
    pub fn comp_time(&self, weight: f64, processor: usize) -> f64 {
        comp_time(weight, self.rate(processor), self.topology.comp_rounding)
    }
}

/// `weight / rate`, optionally rounded half up.
pub fn comp_time(weight: f64, rate: f64, rounding: CompRounding) -> f64 {
    let raw = weight / rate;
    match rounding {
        CompRounding::None => raw,
        // the epsilon absorbs representation error of rates such as 2/3
        CompRounding::HalfUp => (raw + 0.5 + 1e-9).floor(),
    }
}

fn check_topology(t: &Topology) -> Result<()> {
    let bad = |msg: String| Err(Error::InvalidTopology(msg));
    if t.processors.is_empty() {
        return bad("no processors".into());
    }
    let mut nodes: HashMap<&str, ()> = HashMap::new();
    for id in t
        .processors
        .iter()
        .map(|p| &p.id)
        .chain(t.switches.iter().map(|s| &s.id))
    {
        if nodes.insert(id.as_str(), ()).is_some() {
            return bad(format!("duplicate node id `{id}`"));
        }
    }
    for p in &t.processors {
        if !(p.rate > 0.0 && p.rate.is_finite()) {
            return bad(format!("processor `{}` has non-positive rate", p.id));
        }
    }
    let mut link_ids = HashMap::new();
    for l in &t.links {
        if link_ids.insert(l.id.as_str(), ()).is_some() {
            return bad(format!("duplicate link id `{}`", l.id));
        }
        if !(l.speed > 0.0 && l.speed.is_finite()) {
            return bad(format!("link `{}` has non-positive speed", l.id));
        }
        for end in [&l.a, &l.b] {
            if !nodes.contains_key(end.as_str()) {
                return bad(format!("link `{}` references unknown node `{end}`", l.id));
            }
        }
        if l.a == l.b {
            return bad(format!("link `{}` is a loop", l.id));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn example_route_speeds() {
        let net = Network::new(fixtures::example_topology()).unwrap();
        let t = net.topology();
        let l = |id: &str| t.link_index(id).unwrap();
        // p2 -> p3: {l2, l4} and {l3}
        let r = net.routes(1, 2);
        assert_eq!(r, &[vec![l("l2"), l("l4")], vec![l("l3")]]);
        assert_eq!(route_speed(t, &r[0]).unwrap(), q(1, 1));
        assert_eq!(route_speed(t, &r[1]).unwrap(), q(3, 1));
        assert_eq!(*net.pair_speed(1, 2).unwrap(), q(2, 1));
        assert_eq!(*net.pair_speed(0, 2).unwrap(), q(1, 1));
        assert_eq!(*net.processor_speed(0).unwrap(), q(1, 1));
        assert_eq!(*net.processor_speed(1).unwrap(), q(3, 2));
        assert_eq!(*net.processor_speed(2).unwrap(), q(3, 2));
    }

    #[test]
    fn single_link_pair() {
        let topo = fixtures::two_processor_topology(4.0);
        let net = Network::new(topo).unwrap();
        assert_eq!(net.routes(0, 1).len(), 1);
        assert_eq!(net.routes(0, 1)[0].len(), 1);
        assert_eq!(*net.pair_speed(0, 1).unwrap(), q(4, 1));
        assert_eq!(*net.processor_speed(0).unwrap(), q(4, 1));
        assert_eq!(route_speed(net.topology(), &[0]).unwrap(), q(4, 1));
    }

    #[test]
    fn lone_processor_has_no_speed() {
        let topo = Topology {
            processors: vec![Processor {
                id: "p1".into(),
                rate: 1.0,
            }],
            switches: vec![],
            links: vec![],
            comp_rounding: CompRounding::None,
        };
        let net = Network::new(topo).unwrap();
        assert!(net.processor_speed(0).is_err());
    }

    #[test]
    fn comm_and_ctml() {
        let net = Network::new(fixtures::example_topology()).unwrap();
        assert_eq!(net.comm_time(0.0, 0), 0.0);
        assert_eq!(net.comm_time(3.0, 0), 3.0);
        assert_eq!(net.comm_time(3.0, 1), 2.0);
        assert_eq!(ctml(0.0, 3.0), 0.0);
        assert_eq!(ctml(6.0, 3.0), 2.0);
        assert_eq!(ctml(6.0, 1.0), 6.0);
    }

    #[test]
    fn comp_time_rounding() {
        assert_eq!(comp_time(10.0, 1.0, CompRounding::HalfUp), 10.0);
        assert_eq!(comp_time(10.0, 0.67, CompRounding::HalfUp), 15.0);
        assert!((comp_time(10.0, 0.67, CompRounding::None) - 14.925373).abs() < 1e-6);
        assert_eq!(comp_time(0.0, 0.83, CompRounding::HalfUp), 0.0);
        assert_eq!(comp_time(9.0, 2.0 / 3.0, CompRounding::HalfUp), 14.0);
    }

    #[test]
    fn rejects_bad_topologies() {
        let mut t = fixtures::example_topology();
        t.links[0].speed = 0.0;
        assert!(Network::new(t).is_err());
        let mut t = fixtures::example_topology();
        t.links[0].b = "nowhere".into();
        assert!(Network::new(t).is_err());
        let mut t = fixtures::example_topology();
        t.links.retain(|l| l.id != "l1");
        assert!(matches!(Network::new(t), Err(Error::NoRoute { .. })));
    }
}
