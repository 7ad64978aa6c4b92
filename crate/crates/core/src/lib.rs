//! Multi-stage multi-robot task assignment for gridworld search and rescue.
//!
//! The pipeline scouts the map for victims, matches victim requirements
//! against robot capabilities, clusters victims, assigns clusters, then
//! remaining victims, then leftover requirements to robots, and finally plans
//! A* paths. A repeated-planning greedy baseline is included for comparison.
//!
//! The weighted stages are generic over [`Scalar`]; the aliases below fix the
//! scalar to `f64` or to exact rationals.

pub mod assignment;
pub mod baseline;
pub mod capability;
pub mod clustering;
pub mod grid;
pub mod model;
pub mod pathplan;
pub mod pipeline;
pub mod scalar;
pub mod scouting;

pub use assignment::{solve_linear_assignment, AssignmentBundle, Sense};
pub use baseline::{run_mrga, BaselineReport};
pub use capability::{missing_cap, reqment_analysis, CapabilityContext, CapabilityMatrices};
pub use grid::{load_map, manhattan, Coord, GridMap};
pub use model::{Robot, VictimRecord};
pub use pathplan::{astar, Path};
pub use pipeline::{measure_planning_time, plan_mission, run_mission, MissionError, Scenario};
pub use scalar::Scalar;

pub use num_rational::Rational64;

pub type Clustering = clustering::Clustering<f64>;
pub type ClusterWeights = assignment::ClusterWeights<f64>;
pub type TimeCostMatrices = assignment::TimeCostMatrices<f64>;
pub type PlanningOutput = pipeline::PlanningOutput<f64>;
pub type MissionReport = pipeline::MissionReport<f64>;

pub type ExactClustering = clustering::Clustering<Rational64>;
pub type ExactClusterWeights = assignment::ClusterWeights<Rational64>;
pub type ExactTimeCostMatrices = assignment::TimeCostMatrices<Rational64>;
pub type ExactPlanningOutput = pipeline::PlanningOutput<Rational64>;
pub type ExactMissionReport = pipeline::MissionReport<Rational64>;
