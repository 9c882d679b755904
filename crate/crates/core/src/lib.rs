//! Contention-aware static list scheduling for stream-processing task graphs.
//!
//! Task graphs (weighted DAGs with a period) are mapped onto heterogeneous
//! processors connected by a heterogeneous switched network. Every
//! inter-processor message is routed over an explicit sub-route and reserves
//! each link exclusively, so computation and communication are scheduled
//! together.
//!
//! The crate provides
//!
//! * [`graph`]: the task-graph model, structural derivations, validation,
//!   seeded random generation and JSON I/O,
//! * [`network`]: topologies, route enumeration, route/processor speeds and
//!   link reservation calendars,
//! * [`scheduler`]: the `HSV_CC` baseline and the load-balanced
//!   `HVLB_CC` (A)/(B) variants together with the alpha sweep,
//! * [`imprecise`]: schedule-hole detection and precision simulation for
//!   tasks following the imprecise-computation model,
//! * [`metrics`]: makespan, SLR, speedup, load balance and failure rate,
//! * [`verify`]: a schedule checker that is independent of the scheduler,
//! * [`gantt`], [`experiment`]: chart rendering and the seeded experiment
//!   harness used by the `hvlb` command-line tool.

pub mod error;
pub mod experiment;
pub mod fixtures;
pub mod gantt;
pub mod graph;
pub mod imprecise;
pub mod metrics;
pub mod network;
pub mod plot;
pub mod scheduler;
pub mod verify;

pub use error::{Error, Result};
pub use graph::{Edge, Task, TaskGraph};
pub use network::{Network, Topology};
pub use scheduler::{AlphaGrid, Schedule, Variant};
