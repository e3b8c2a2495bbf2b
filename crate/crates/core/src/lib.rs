pub mod clustering;
pub mod config;
pub mod dtn;
pub mod geometry;
pub mod mobility;
pub mod oracle;
pub mod rng;
pub mod scalar;
pub mod selftest;
pub mod transport;
pub mod ferrying;
pub mod sim;

pub use config::{MobilitySource, RotationMode, ScenarioConfig};
pub use geometry::Point2;

/// Concrete types used by the simulator.
pub type Point = geometry::Point2<f64>;
pub type Cost = transport::CostKind<f64>;
pub type Clusters = clustering::ClusterState<f64>;
pub type Problem = transport::TransportProblem<f64>;
pub type Plan = transport::TransportPlan<f64>;
