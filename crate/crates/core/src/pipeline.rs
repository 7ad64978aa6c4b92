//! End-to-end mission: scouting, requirement analysis, clustering, the three
//! assignment stages and path planning.

use std::path::{Path as FsPath, PathBuf};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::assignment::{
    audit_coverage, cluster_weights, clstr_asgn, perf_analysis, robot_assign, victim_assign, AssignmentBundle,
    ClusterWeights, CoverageViolation, ServiceTimes, TimeCostMatrices,
};
use crate::capability::{CapabilityContext, CapabilityError, CapabilityMatrices, ReqAnalysisResult, UnavailableList};
use crate::clustering::{kmeans, obstacle_filter, ClusterError, ClusterPlan, Clustering};
use crate::grid::{load_map, Coord, GridError, GridMap};
use crate::model::{Robot, RobotId, VictimId, VictimRecord};
use crate::pathplan::{plan_bundle, Navigator, RobotPlan};
use crate::scalar::Scalar;
use crate::scouting::{scout_mission, Scout, ScoutOutcome};

pub const DEFAULT_PSI: f64 = 0.5;
pub const DEFAULT_BETA: f64 = 0.5;
pub const DEFAULT_SEED: u64 = 42;

#[derive(Debug, Error)]
pub enum MissionError {
    #[error("invalid scenario: {0}")]
    Scenario(String),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Capability(#[from] CapabilityError),
    #[error(transparent)]
    Cluster(#[from] ClusterError),
    #[error("scenario file: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

fn invalid(msg: impl Into<String>) -> MissionError {
    MissionError::Scenario(msg.into())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScoutConfig {
    pub count: usize,
    pub starts: Vec<Coord>,
    #[serde(default = "default_vfd")]
    pub vfd: usize,
    #[serde(default = "default_step_limit")]
    pub step_limit: usize,
}

fn default_vfd() -> usize {
    3
}

fn default_step_limit() -> usize {
    10_000
}

fn default_psi() -> f64 {
    DEFAULT_PSI
}

fn default_beta() -> f64 {
    DEFAULT_BETA
}

fn default_seed() -> u64 {
    DEFAULT_SEED
}

fn one() -> f64 {
    1.0
}

/// A complete mission definition.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub map: GridMap,
    pub robots: Vec<Robot>,
    pub victims: Vec<VictimRecord>,
    pub scouts: ScoutConfig,
    pub psi: f64,
    pub beta: f64,
    pub seed: u64,
    pub t_serve: f64,
    pub t_attempt: f64,
}

/// On-disk JSON form of a [`Scenario`]. The map is given either as a path
/// (relative paths resolve against the scenario file's directory) or inline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub map_path: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub map: Option<String>,
    pub robots: Vec<Robot>,
    pub victims: Vec<VictimRecord>,
    pub scouts: ScoutConfig,
    #[serde(default = "default_psi")]
    pub psi: f64,
    #[serde(default = "default_beta")]
    pub beta: f64,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "one")]
    pub t_serve: f64,
    #[serde(default = "one")]
    pub t_attempt: f64,
}

impl Scenario {
    pub fn from_file(file: ScenarioFile, base_dir: &FsPath) -> Result<Self, MissionError> {
        let map = match (&file.map_path, &file.map) {
            (Some(p), None) => {
                let path = base_dir.join(p);
                let text = std::fs::read_to_string(&path).map_err(|source| MissionError::Io { path, source })?;
                load_map(&text)?
            }
            (None, Some(text)) => load_map(text)?,
            _ => return Err(invalid("exactly one of map_path and map must be given")),
        };
        let scenario = Self {
            map,
            robots: file.robots,
            victims: file.victims,
            scouts: file.scouts,
            psi: file.psi,
            beta: file.beta,
            seed: file.seed,
            t_serve: file.t_serve,
            t_attempt: file.t_attempt,
        };
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn from_json(text: &str, base_dir: &FsPath) -> Result<Self, MissionError> {
        Self::from_file(serde_json::from_str(text)?, base_dir)
    }

    pub fn load(path: &FsPath) -> Result<Self, MissionError> {
        let text = std::fs::read_to_string(path).map_err(|source| MissionError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&text, path.parent().unwrap_or(FsPath::new(".")))
    }

    /// File form with the map referenced by `map_path`.
    pub fn to_file(&self, map_path: Option<String>) -> ScenarioFile {
        let inline = map_path.is_none().then(|| self.map.to_text());
        ScenarioFile {
            map_path,
            map: inline,
            robots: self.robots.clone(),
            victims: self.victims.clone(),
            scouts: self.scouts.clone(),
            psi: self.psi,
            beta: self.beta,
            seed: self.seed,
            t_serve: self.t_serve,
            t_attempt: self.t_attempt,
        }
    }

    pub fn kinds(&self) -> usize {
        self.victims
            .first()
            .map(|v| v.requirements.len())
            .or(self.robots.first().map(|r| r.capabilities.len()))
            .unwrap_or(0)
    }

    pub fn validate(&self) -> Result<(), MissionError> {
        let nr = self.kinds();
        if self.robots.is_empty() {
            return Err(invalid("at least one robot is required"));
        }
        for (i, r) in self.robots.iter().enumerate() {
            if r.id != i {
                return Err(invalid(format!("robot IDs must be 0..N in order, found {} at {i}", r.id)));
            }
            if r.capabilities.len() != nr {
                return Err(invalid(format!("robot {} has {} capabilities, expected {nr}", r.id, r.capabilities.len())));
            }
            self.map.require_free(r.start)?;
        }
        for (i, v) in self.victims.iter().enumerate() {
            if v.id != i {
                return Err(invalid(format!("victim IDs must be 0..M in order, found {} at {i}", v.id)));
            }
            if v.requirements.len() != nr {
                return Err(invalid(format!("victim {} has {} requirements, expected {nr}", v.id, v.requirements.len())));
            }
            if v.requirement_count() == 0 {
                return Err(CapabilityError::NoRequirements(v.id).into());
            }
            self.map.require_free(v.location)?;
        }
        for bits in self
            .robots
            .iter()
            .map(|r| &r.capabilities)
            .chain(self.victims.iter().map(|v| &v.requirements))
        {
            if bits.iter().any(|&b| b > 1) {
                return Err(invalid("capability and requirement vectors must be binary"));
            }
        }
        if self.scouts.count == 0 || self.scouts.count != self.scouts.starts.len() {
            return Err(invalid("scout count must be positive and match the number of starts"));
        }
        if self.scouts.vfd == 0 {
            return Err(invalid("scout vfd must be at least 1"));
        }
        for &s in &self.scouts.starts {
            self.map.require_free(s)?;
        }
        for (name, x) in [("psi", self.psi), ("beta", self.beta)] {
            if !(0.0..=1.0).contains(&x) {
                return Err(invalid(format!("{name} must lie in [0, 1], got {x}")));
            }
        }
        for (name, x) in [("t_serve", self.t_serve), ("t_attempt", self.t_attempt)] {
            if !(x.is_finite() && x >= 0.0) {
                return Err(invalid(format!("{name} must be a non-negative number, got {x}")));
            }
        }
        Ok(())
    }

    pub fn scouts(&self) -> Vec<Scout> {
        self.scouts
            .starts
            .iter()
            .enumerate()
            .map(|(id, &position)| Scout {
                id,
                position,
                vfd: self.scouts.vfd,
            })
            .collect()
    }

    /// The scouting mission on ground truth.
    pub fn scout(&self) -> ScoutOutcome {
        scout_mission(&self.map, &self.scouts(), &self.victims, self.seed, self.scouts.step_limit)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    ClusterRoute,
    Performance,
    AuctionOnly,
    Unavailable,
}

/// Where each found victim ended up.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VictimStatus {
    pub victim: VictimId,
    pub stage: Stage,
    /// Holder first (if any), then auction winners, without repeats.
    pub robots: Vec<RobotId>,
    /// Some assigned robot has no path to the victim.
    pub unreachable: bool,
}

/// Everything computed by the planning stages (requirement analysis through
/// path planning).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanningOutput<T> {
    pub analysis: ReqAnalysisResult,
    pub unavailable: UnavailableList,
    pub clustering: Clustering<T>,
    pub cluster_plan: ClusterPlan,
    pub weights: ClusterWeights<T>,
    pub time_costs: TimeCostMatrices<T>,
    pub bundle: AssignmentBundle,
    pub plans: Vec<RobotPlan>,
    pub victim_status: Vec<VictimStatus>,
    pub coverage_violations: Vec<CoverageViolation>,
    pub total_travel_cost: usize,
    pub astar_calls: usize,
}

fn classify(bundle: &AssignmentBundle, plans: &[RobotPlan], found: &[VictimRecord]) -> Vec<VictimStatus> {
    found
        .iter()
        .map(|victim| {
            let v = victim.id;
            let mut robots = Vec::new();
            let stage = if let Some(e) = bundle.b2.iter().find(|e| e.route.contains(&v)) {
                robots.push(e.robot);
                Stage::ClusterRoute
            } else if let Some(e) = bundle.b3.iter().find(|e| e.victim == v) {
                robots.push(e.robot);
                Stage::Performance
            } else if bundle.b4.iter().any(|e| e.victim == v) {
                Stage::AuctionOnly
            } else {
                Stage::Unavailable
            };
            for e in bundle.b4.iter().filter(|e| e.victim == v) {
                if !robots.contains(&e.robot) {
                    robots.push(e.robot);
                }
            }
            let unreachable = plans.iter().any(|p| p.unreachable_victims().any(|u| u == v));
            VictimStatus {
                victim: v,
                stage,
                robots,
                unreachable,
            }
        })
        .collect()
}

/// Runs requirement analysis through path planning on the scouted victims.
/// The cluster count is the robot count, capped by the number of victims.
pub fn plan_mission<T: Scalar>(scenario: &Scenario, found: &[VictimRecord]) -> Result<PlanningOutput<T>, MissionError> {
    let map = &scenario.map;
    let robots = &scenario.robots;
    let nav = Navigator::new(map);

    let mats = CapabilityMatrices::from_records(found, robots)?;
    let ctx = CapabilityContext::analyze(mats)?;

    let k = robots.len().min(found.len());
    let clustering: Clustering<T> = if k == 0 {
        Clustering {
            k: 0,
            victim_ids: Vec::new(),
            assignments: Vec::new(),
            means: Vec::new(),
            centers: Vec::new(),
            sse: T::zero(),
        }
    } else {
        kmeans::<T>(found, k, scenario.seed)?.snap(map, found)
    };
    let cluster_plan = obstacle_filter(map, &clustering, found);

    let psi = T::from_real(scenario.psi);
    let beta = T::from_real(scenario.beta);
    let times = ServiceTimes {
        serve: T::from_real(scenario.t_serve),
        attempt: T::from_real(scenario.t_attempt),
    };

    let weights = cluster_weights(&cluster_plan, &ctx, psi);
    let (b2, v_bar_after_b2) = clstr_asgn(&weights, &cluster_plan, &clustering, &ctx);
    let time_costs = perf_analysis(&nav, robots, &b2, &v_bar_after_b2, found, &ctx, times, beta);
    let (b3, v_bar_after_b3) = victim_assign(&time_costs, &ctx);
    let auction = robot_assign(robots, found, &ctx, &b2, &b3);

    let bundle = AssignmentBundle {
        b2,
        b3,
        b4: auction.b4,
        v_bar_after_b2,
        v_bar_after_b3,
        unserved: auction.unserved,
    };
    let plans = plan_bundle(&nav, &bundle, robots, found);
    let total_travel_cost = plans.iter().map(|p| p.travel_cost).sum();
    let victim_status = classify(&bundle, &plans, found);
    let coverage_violations = audit_coverage(&ctx, &bundle);

    Ok(PlanningOutput {
        analysis: ctx.result,
        unavailable: ctx.unavailable,
        clustering,
        cluster_plan,
        weights,
        time_costs,
        bundle,
        plans,
        victim_status,
        coverage_violations,
        total_travel_cost,
        astar_calls: nav.calls(),
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Timing {
    pub planning_time_us: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MissionReport<T> {
    pub scouting: ScoutOutcome,
    /// Scouting ran out of steps; only the victims found are planned for.
    pub partial: bool,
    pub planning: PlanningOutput<T>,
    pub timing: Timing,
}

impl<T: Scalar + Serialize> MissionReport<T> {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// The report with the `timing` block removed; stable across runs.
    pub fn to_json_without_timing(&self) -> String {
        let mut value = serde_json::to_value(self).expect("report serializes");
        if let Some(obj) = value.as_object_mut() {
            obj.remove("timing");
        }
        serde_json::to_string_pretty(&value).expect("value serializes")
    }
}

pub(crate) fn micros(d: Duration) -> u64 {
    (d.as_nanos().div_ceil(1000) as u64).max(1)
}

/// Scouting followed by timed planning.
pub fn run_mission<T: Scalar>(scenario: &Scenario) -> Result<MissionReport<T>, MissionError> {
    scenario.validate()?;
    let scouting = scenario.scout();
    let started = Instant::now();
    let planning = plan_mission::<T>(scenario, &scouting.found)?;
    let elapsed = started.elapsed();
    Ok(MissionReport {
        partial: !scouting.complete,
        scouting,
        planning,
        timing: Timing {
            planning_time_us: micros(elapsed),
        },
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DurationStats {
    pub samples_us: Vec<u64>,
    pub min_us: u64,
    pub median_us: u64,
    pub mean_us: f64,
}

impl DurationStats {
    pub fn from_samples(samples_us: Vec<u64>) -> Self {
        assert!(!samples_us.is_empty(), "at least one sample");
        let mut sorted = samples_us.clone();
        sorted.sort_unstable();
        let mid = sorted.len() / 2;
        let median_us = if sorted.len() % 2 == 1 {
            sorted[mid]
        } else {
            (sorted[mid - 1] + sorted[mid]) / 2
        };
        let mean_us = sorted.iter().sum::<u64>() as f64 / sorted.len() as f64;
        Self {
            min_us: sorted[0],
            median_us,
            mean_us,
            samples_us,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlanningTimeStats<T> {
    pub stats: DurationStats,
    pub scouting: ScoutOutcome,
    /// Output of the first repetition.
    pub output: PlanningOutput<T>,
}

/// Times the planning stages `repetitions` times on one scouting result.
pub fn measure_planning_time<T: Scalar>(
    scenario: &Scenario,
    repetitions: usize,
) -> Result<PlanningTimeStats<T>, MissionError> {
    let scouting = scenario.scout();
    measure_planning_time_on(scenario, scouting, repetitions)
}

/// [`measure_planning_time`] with an existing scouting result.
pub fn measure_planning_time_on<T: Scalar>(
    scenario: &Scenario,
    scouting: ScoutOutcome,
    repetitions: usize,
) -> Result<PlanningTimeStats<T>, MissionError> {
    if repetitions == 0 {
        return Err(invalid("repetitions must be at least 1"));
    }
    let mut samples = Vec::with_capacity(repetitions);
    let mut output = None;
    for _ in 0..repetitions {
        let started = Instant::now();
        let out = plan_mission::<T>(scenario, &scouting.found)?;
        samples.push(micros(started.elapsed()));
        output.get_or_insert(out);
    }
    Ok(PlanningTimeStats {
        stats: DurationStats::from_samples(samples),
        scouting,
        output: output.expect("repetitions >= 1"),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(row: usize, col: usize) -> Coord {
        Coord::new(row, col)
    }

    fn minimal() -> Scenario {
        Scenario {
            map: GridMap::empty(6, 6),
            robots: vec![Robot::new(0, c(0, 0), vec![1, 1])],
            victims: vec![VictimRecord::new(0, c(4, 4), vec![1, 1])],
            scouts: ScoutConfig {
                count: 1,
                starts: vec![c(0, 0)],
                vfd: 3,
                step_limit: 1000,
            },
            psi: 0.5,
            beta: 0.5,
            seed: 1,
            t_serve: 1.0,
            t_attempt: 1.0,
        }
    }

    #[test]
    fn minimal_mission() {
        let report = run_mission::<f64>(&minimal()).unwrap();
        assert!(!report.partial);
        let b = &report.planning.bundle;
        assert_eq!(b.b2[0].cluster, Some(0));
        assert_eq!(b.b2[0].route, vec![0]);
        assert!(b.b3.is_empty() && b.b4.is_empty());
        assert_eq!(report.planning.plans[0].legs.len(), 2);
        assert_eq!(report.planning.total_travel_cost, 8);
        assert!(report.planning.coverage_violations.is_empty());
        assert_eq!(report.planning.victim_status[0].stage, Stage::ClusterRoute);
    }

    #[test]
    fn validation_catches_bad_scenarios() {
        let mut s = minimal();
        s.victims[0].requirements = vec![0, 0];
        assert!(matches!(s.validate(), Err(MissionError::Capability(_))));

        let mut s = minimal();
        s.robots[0].id = 3;
        assert!(matches!(s.validate(), Err(MissionError::Scenario(_))));

        let mut s = minimal();
        s.psi = 1.5;
        assert!(s.validate().is_err());

        let mut s = minimal();
        s.map.set(c(4, 4), crate::grid::Cell::Obstacle);
        assert!(matches!(s.validate(), Err(MissionError::Grid(GridError::NotFree(_)))));

        let mut s = minimal();
        s.scouts.count = 2;
        assert!(s.validate().is_err());
    }

    #[test]
    fn scenario_json_round_trip() {
        let s = minimal();
        let json = serde_json::to_string(&s.to_file(None)).unwrap();
        let back = Scenario::from_json(&json, FsPath::new(".")).unwrap();
        assert_eq!(back, s);
        assert!(json.contains("\"p\":[1,1]") && json.contains("\"q\":[1,1]"));
    }

    #[test]
    fn defaults_fill_optional_fields() {
        let json = r#"{
            "map": "....\n....\n",
            "robots": [{"id": 0, "start": [0, 0], "p": [1]}],
            "victims": [{"id": 0, "location": [1, 3], "q": [1]}],
            "scouts": {"count": 1, "starts": [[0, 0]]}
        }"#;
        let s = Scenario::from_json(json, FsPath::new(".")).unwrap();
        assert_eq!((s.psi, s.beta, s.seed), (DEFAULT_PSI, DEFAULT_BETA, DEFAULT_SEED));
        assert_eq!((s.scouts.vfd, s.scouts.step_limit), (3, 10_000));
    }

    #[test]
    fn no_victims_found_yields_empty_plan() {
        let mut s = minimal();
        s.victims.clear();
        let report = run_mission::<f64>(&s).unwrap();
        assert!(report.planning.bundle.b3.is_empty());
        assert_eq!(report.planning.clustering.k, 0);
        assert_eq!(report.planning.total_travel_cost, 0);
    }

    #[test]
    fn timing_shape_and_output_stability() {
        let s = minimal();
        let a = measure_planning_time::<f64>(&s, 5).unwrap();
        assert_eq!(a.stats.samples_us.len(), 5);
        assert!(a.stats.samples_us.iter().all(|&t| t > 0));
        assert!(a.stats.min_us <= a.stats.median_us);
        let b = measure_planning_time::<f64>(&s, 2).unwrap();
        assert_eq!(a.output, b.output);
        assert!(measure_planning_time::<f64>(&s, 0).is_err());
    }

    #[test]
    fn median_of_even_sample_count() {
        let st = DurationStats::from_samples(vec![4, 1, 3, 2]);
        assert_eq!((st.min_us, st.median_us), (1, 2));
        assert_eq!(st.mean_us, 2.5);
    }
}
