//! Planning-time sweep over maps, robot counts and victim counts.

use std::io;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use msmrta::baseline::run_mrga;
use msmrta::pipeline::{measure_planning_time_on, DurationStats, MissionError};
use msmrta::{load_map, GridMap, Scenario};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::mapgen::{gen_map, MapGenError, ObstacleStyle};
use crate::scengen::{gen_scenario, DEFAULT_KINDS};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MapSpec {
    File {
        path: PathBuf,
        #[serde(default)]
        id: Option<String>,
    },
    Generated {
        style: ObstacleStyle,
        seed: u64,
        #[serde(default = "default_side")]
        width: usize,
        #[serde(default = "default_side")]
        height: usize,
    },
}

fn default_side() -> usize {
    20
}

impl MapSpec {
    pub fn id(&self) -> String {
        match self {
            Self::File { id: Some(id), .. } => id.clone(),
            Self::File { path, .. } => path
                .file_stem()
                .map_or_else(|| path.display().to_string(), |s| s.to_string_lossy().into_owned()),
            Self::Generated { style, seed, .. } => format!("{style}-{seed}"),
        }
    }

    pub fn load(&self, base_dir: &Path) -> Result<GridMap, SweepError> {
        match self {
            Self::File { path, .. } => {
                let path = base_dir.join(path);
                let text = std::fs::read_to_string(&path).map_err(|source| SweepError::Io { path, source })?;
                Ok(load_map(&text).map_err(MissionError::from)?)
            }
            &Self::Generated {
                style,
                seed,
                width,
                height,
            } => Ok(gen_map(width, height, style, seed)?),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    #[serde(default = "default_robots")]
    pub robots: Vec<usize>,
    #[serde(default = "default_victims")]
    pub victims: Vec<usize>,
    #[serde(default = "default_maps")]
    pub maps: Vec<MapSpec>,
    #[serde(default = "default_reps")]
    pub repetitions: usize,
    #[serde(default = "default_kinds")]
    pub kinds: usize,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub psi: Option<f64>,
    #[serde(default)]
    pub beta: Option<f64>,
    #[serde(default = "default_parallel")]
    pub parallel: usize,
    #[serde(default)]
    pub output: Option<PathBuf>,
}

fn default_robots() -> Vec<usize> {
    vec![2, 4, 6, 8, 10]
}

fn default_victims() -> Vec<usize> {
    (1..=10).map(|i| 10 * i).collect()
}

fn default_maps() -> Vec<MapSpec> {
    [
        (ObstacleStyle::Rooms, 1),
        (ObstacleStyle::RandomWalls, 2),
        (ObstacleStyle::Rooms, 3),
        (ObstacleStyle::RandomWalls, 4),
    ]
    .into_iter()
    .map(|(style, seed)| MapSpec::Generated {
        style,
        seed,
        width: 20,
        height: 20,
    })
    .collect()
}

fn default_reps() -> usize {
    5
}

fn default_kinds() -> usize {
    DEFAULT_KINDS
}

fn default_seed() -> u64 {
    42
}

fn default_parallel() -> usize {
    1
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            robots: default_robots(),
            victims: default_victims(),
            maps: default_maps(),
            repetitions: default_reps(),
            kinds: default_kinds(),
            seed: default_seed(),
            psi: None,
            beta: None,
            parallel: default_parallel(),
            output: None,
        }
    }
}

impl SweepConfig {
    pub fn load(path: &Path) -> Result<Self, SweepError> {
        let text = std::fs::read_to_string(path).map_err(|source| SweepError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn validate(&self) -> Result<(), SweepError> {
        let bad = |msg: String| Err(SweepError::Config(msg));
        if self.robots.is_empty() || self.victims.is_empty() || self.maps.is_empty() {
            return bad("robots, victims and maps must be non-empty".into());
        }
        if self.robots.iter().chain(&self.victims).any(|&x| x == 0) {
            return bad("all robot and victim counts must be at least 1".into());
        }
        let (max_n, min_m) = (self.robots.iter().max().unwrap(), self.victims.iter().min().unwrap());
        if min_m < max_n {
            return bad(format!("every cell needs victims >= robots; {min_m} victims < {max_n} robots"));
        }
        if self.repetitions == 0 || self.kinds == 0 || self.parallel == 0 {
            return bad("repetitions, kinds and parallel must be at least 1".into());
        }
        for (name, x) in [("psi", self.psi), ("beta", self.beta)] {
            if x.is_some_and(|x| !(0.0..=1.0).contains(&x)) {
                return bad(format!("{name} must lie in [0, 1]"));
            }
        }
        Ok(())
    }

    /// Scenario seed for one (map, robot count) pair; independent of the
    /// victim count so larger cells extend smaller ones.
    pub fn cell_seed(&self, map_index: usize, n_robots: usize) -> u64 {
        self.seed
            .wrapping_mul(0x9E37_79B9_7F4A_7C15)
            .wrapping_add((map_index as u64) << 32)
            .wrapping_add(n_robots as u64)
    }
}

#[derive(Debug, Error)]
pub enum SweepError {
    #[error("invalid sweep config: {0}")]
    Config(String),
    #[error(transparent)]
    Map(#[from] MapGenError),
    #[error(transparent)]
    Mission(#[from] MissionError),
    #[error("sweep config: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("no data rows")]
    Empty,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Msmrta,
    Mrga,
    Reduction,
}

/// One CSV record. Data rows fill the timing and work columns; reduction
/// rows fill `reduction_pct` only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub map_id: String,
    pub n_robots: usize,
    pub n_victims: usize,
    pub algorithm: Algorithm,
    pub median_time_us: Option<u64>,
    pub mean_time_us: Option<f64>,
    pub total_travel_cost: Option<usize>,
    pub astar_calls: Option<usize>,
    pub reduction_pct: Option<f64>,
    pub status: String,
}

impl SweepRow {
    fn empty(map_id: &str, n: usize, m: usize, algorithm: Algorithm) -> Self {
        Self {
            map_id: map_id.to_string(),
            n_robots: n,
            n_victims: m,
            algorithm,
            median_time_us: None,
            mean_time_us: None,
            total_travel_cost: None,
            astar_calls: None,
            reduction_pct: None,
            status: "ok".to_string(),
        }
    }

    fn timed(map_id: &str, n: usize, m: usize, algorithm: Algorithm, stats: &DurationStats, travel: usize, calls: usize) -> Self {
        Self {
            median_time_us: Some(stats.median_us),
            mean_time_us: Some(stats.mean_us),
            total_travel_cost: Some(travel),
            astar_calls: Some(calls),
            ..Self::empty(map_id, n, m, algorithm)
        }
    }

    pub fn is_ok(&self) -> bool {
        self.status == "ok"
    }

    /// Columns that must reproduce exactly across runs with equal seeds.
    pub fn non_timing_key(&self) -> (String, usize, usize, Algorithm, Option<usize>, Option<usize>, String) {
        (
            self.map_id.clone(),
            self.n_robots,
            self.n_victims,
            self.algorithm,
            self.total_travel_cost,
            self.astar_calls,
            self.status.clone(),
        )
    }
}

/// Both algorithms on the same scenario and scouting result.
pub fn run_cell(scenario: &Scenario, map_id: &str, repetitions: usize) -> [SweepRow; 3] {
    let (n, m) = (scenario.robots.len(), scenario.victims.len());
    let scouting = scenario.scout();
    let found = scouting.found.clone();
    let msmrta = measure_planning_time_on::<f64>(scenario, scouting, repetitions);
    let mrga: Result<Vec<_>, _> = (0..repetitions).map(|_| run_mrga(scenario, &found)).collect();

    let mut rows = [
        SweepRow::empty(map_id, n, m, Algorithm::Msmrta),
        SweepRow::empty(map_id, n, m, Algorithm::Mrga),
        SweepRow::empty(map_id, n, m, Algorithm::Reduction),
    ];
    let ms_stats = match msmrta {
        Ok(t) => {
            rows[0] = SweepRow::timed(map_id, n, m, Algorithm::Msmrta, &t.stats, t.output.total_travel_cost, t.output.astar_calls);
            Some(t.stats)
        }
        Err(e) => {
            rows[0].status = format!("error: {e}");
            None
        }
    };
    let mrga_stats = match mrga {
        Ok(reps) => {
            let stats = DurationStats::from_samples(reps.iter().map(|r| r.planning_time_us).collect());
            rows[1] = SweepRow::timed(map_id, n, m, Algorithm::Mrga, &stats, reps[0].total_travel_cost, reps[0].astar_calls);
            Some(stats)
        }
        Err(e) => {
            rows[1].status = format!("error: {e}");
            None
        }
    };
    match (ms_stats, mrga_stats) {
        (Some(a), Some(b)) => {
            rows[2].reduction_pct = Some(100.0 * (1.0 - a.median_us as f64 / b.median_us as f64));
        }
        _ => rows[2].status = "error: missing timing".to_string(),
    }
    rows
}

fn failed_cell(map_id: &str, n: usize, m: usize, err: &dyn std::fmt::Display) -> [SweepRow; 3] {
    [Algorithm::Msmrta, Algorithm::Mrga, Algorithm::Reduction].map(|a| SweepRow {
        status: format!("error: {err}"),
        ..SweepRow::empty(map_id, n, m, a)
    })
}

/// Runs every (map, robots, victims) cell. Map paths resolve against
/// `base_dir`. Cells are distributed over `config.parallel` workers, each
/// running one timed cell at a time; rows come back in cell order.
pub fn run_sweep(config: &SweepConfig, base_dir: &Path) -> Result<Vec<SweepRow>, SweepError> {
    config.validate()?;
    let maps: Vec<(String, GridMap)> = config
        .maps
        .iter()
        .map(|spec| Ok((spec.id(), spec.load(base_dir)?)))
        .collect::<Result<_, SweepError>>()?;

    let mut cells = Vec::new();
    for (mi, _) in maps.iter().enumerate() {
        for &n in &config.robots {
            for &m in &config.victims {
                cells.push((mi, n, m));
            }
        }
    }

    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<Option<[SweepRow; 3]>>> = Mutex::new(vec![None; cells.len()]);
    let work = || loop {
        let i = next.fetch_add(1, Ordering::SeqCst);
        let Some(&(mi, n, m)) = cells.get(i) else { break };
        let (id, map) = &maps[mi];
        let rows = match gen_scenario(map, n, m, config.kinds, config.cell_seed(mi, n)) {
            Ok(mut scenario) => {
                scenario.psi = config.psi.unwrap_or(scenario.psi);
                scenario.beta = config.beta.unwrap_or(scenario.beta);
                run_cell(&scenario, id, config.repetitions)
            }
            Err(e) => failed_cell(id, n, m, &e),
        };
        results.lock().expect("results lock")[i] = Some(rows);
    };
    std::thread::scope(|s| {
        for _ in 1..config.parallel {
            s.spawn(work);
        }
        work();
    });

    Ok(results
        .into_inner()
        .expect("results lock")
        .into_iter()
        .flat_map(|r| r.expect("every cell ran"))
        .collect())
}

pub fn write_csv<W: io::Write>(rows: &[SweepRow], out: W) -> Result<(), SweepError> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush().map_err(|source| SweepError::Io {
        path: PathBuf::from("<csv>"),
        source,
    })?;
    Ok(())
}

pub fn save_csv(rows: &[SweepRow], path: &Path) -> Result<(), SweepError> {
    let file = std::fs::File::create(path).map_err(|source| SweepError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    write_csv(rows, file)
}

pub fn read_csv<R: io::Read>(input: R) -> Result<Vec<SweepRow>, SweepError> {
    let mut r = csv::Reader::from_reader(input);
    Ok(r.deserialize().collect::<Result<_, _>>()?)
}

pub fn load_csv(path: &Path) -> Result<Vec<SweepRow>, SweepError> {
    let file = std::fs::File::open(path).map_err(|source| SweepError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    read_csv(file)
}

/// Reduction row for one cell, if present.
pub fn reduction_at(rows: &[SweepRow], map_id: &str, n: usize, m: usize) -> Option<f64> {
    rows.iter()
        .find(|r| r.algorithm == Algorithm::Reduction && r.map_id == map_id && r.n_robots == n && r.n_victims == m)
        .and_then(|r| r.reduction_pct)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny() -> SweepConfig {
        SweepConfig {
            robots: vec![2],
            victims: vec![10],
            maps: vec![MapSpec::Generated {
                style: ObstacleStyle::Rooms,
                seed: 1,
                width: 20,
                height: 20,
            }],
            repetitions: 3,
            ..SweepConfig::default()
        }
    }

    #[test]
    fn single_cell_shape() {
        let rows = run_sweep(&tiny(), Path::new(".")).unwrap();
        assert_eq!(rows.len(), 3);
        let algos: Vec<Algorithm> = rows.iter().map(|r| r.algorithm).collect();
        assert_eq!(algos, vec![Algorithm::Msmrta, Algorithm::Mrga, Algorithm::Reduction]);
        assert_eq!(rows.iter().filter(|r| r.median_time_us.is_some()).count(), 2);
        assert!(rows.iter().all(SweepRow::is_ok));
        assert!(rows[2].reduction_pct.is_some());
    }

    #[test]
    fn csv_round_trip_and_header() {
        let rows = run_sweep(&tiny(), Path::new(".")).unwrap();
        let mut buf = Vec::new();
        write_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert_eq!(
            text.lines().next().unwrap(),
            "map_id,n_robots,n_victims,algorithm,median_time_us,mean_time_us,total_travel_cost,astar_calls,reduction_pct,status"
        );
        assert_eq!(text.lines().count(), 4);
        assert_eq!(read_csv(&buf[..]).unwrap(), rows);
    }

    #[test]
    fn rerun_reproduces_non_timing_columns() {
        let mut cfg = tiny();
        cfg.victims = vec![10, 20];
        cfg.parallel = 2;
        let a = run_sweep(&cfg, Path::new(".")).unwrap();
        let b = run_sweep(&cfg, Path::new(".")).unwrap();
        let key = |rows: &[SweepRow]| rows.iter().map(SweepRow::non_timing_key).collect::<Vec<_>>();
        assert_eq!(key(&a), key(&b));
    }

    #[test]
    fn config_validation() {
        let mut cfg = tiny();
        cfg.victims = vec![1];
        assert!(matches!(cfg.validate(), Err(SweepError::Config(_))));
        let mut cfg = tiny();
        cfg.repetitions = 0;
        assert!(cfg.validate().is_err());
        assert!(SweepConfig::default().validate().is_ok());
    }

    #[test]
    fn config_json_defaults() {
        let cfg: SweepConfig = serde_json::from_str("{}").unwrap();
        assert_eq!(cfg, SweepConfig::default());
        let cfg: SweepConfig =
            serde_json::from_str(r#"{"maps": [{"path": "m.txt"}, {"style": "rooms", "seed": 5}]}"#).unwrap();
        assert_eq!(cfg.maps[0].id(), "m");
        assert_eq!(cfg.maps[1].id(), "rooms-5");
    }

    #[test]
    fn failed_scenarios_are_flagged_not_fatal() {
        let mut cfg = tiny();
        cfg.maps = vec![MapSpec::Generated {
            style: ObstacleStyle::Rooms,
            seed: 1,
            width: 5,
            height: 5,
        }];
        cfg.victims = vec![10, 40];
        let rows = run_sweep(&cfg, Path::new(".")).unwrap();
        assert_eq!(rows.len(), 6);
        assert!(rows[..3].iter().all(SweepRow::is_ok));
        assert!(rows[3..].iter().all(|r| !r.is_ok()));
    }
}
