//! Scenario and map generation, the planning-time sweep and its plots.

pub mod mapgen;
pub mod plot;
pub mod scengen;
pub mod sweep;

pub use mapgen::{gen_map, ObstacleStyle};
pub use plot::{render_plot, render_svg};
pub use scengen::gen_scenario;
pub use sweep::{run_sweep, SweepConfig, SweepRow};
