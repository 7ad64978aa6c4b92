//! Random scenarios on a given map.
//!
//! Placements come from one seeded shuffle of the free cells (robots first,
//! then victims), and requirement vectors are drawn victim by victim from a
//! separate stream. Growing `m_victims` with everything else fixed therefore
//! only appends victims.

use msmrta::model::Robot;
use msmrta::pipeline::{ScoutConfig, DEFAULT_BETA, DEFAULT_PSI};
use msmrta::{GridMap, Scenario, VictimRecord};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

pub const DEFAULT_KINDS: usize = 6;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ScenarioGenError {
    #[error("{needed} placements requested but the map has {free} free cells")]
    NotEnoughFreeCells { needed: usize, free: usize },
    #[error("at least one robot and one requirement kind are required")]
    Empty,
}

const PLACEMENT_STREAM: u64 = 0;
const ROBOT_STREAM: u64 = 1;
const VICTIM_STREAM: u64 = 2;

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

fn bernoulli_bits(rng: &mut ChaCha8Rng, n: usize) -> Vec<u8> {
    (0..n).map(|_| u8::from(rng.random_bool(0.5))).collect()
}

/// Capability vectors, redrawn as a whole until every kind has a robot
/// (only enforced for two or more robots).
fn draw_capabilities(rng: &mut ChaCha8Rng, n: usize, nr: usize) -> Vec<Vec<u8>> {
    loop {
        let p: Vec<Vec<u8>> = (0..n).map(|_| bernoulli_bits(rng, nr)).collect();
        if n < 2 || (0..nr).all(|j| p.iter().any(|row| row[j] == 1)) {
            return p;
        }
    }
}

fn draw_requirements(rng: &mut ChaCha8Rng, nr: usize) -> Vec<u8> {
    loop {
        let q = bernoulli_bits(rng, nr);
        if q.contains(&1) {
            return q;
        }
    }
}

pub fn gen_scenario(
    map: &GridMap,
    n_robots: usize,
    m_victims: usize,
    nr: usize,
    seed: u64,
) -> Result<Scenario, ScenarioGenError> {
    if n_robots == 0 || nr == 0 {
        return Err(ScenarioGenError::Empty);
    }
    let mut cells: Vec<_> = map.free_cells().collect();
    let needed = n_robots + m_victims;
    if needed > cells.len() {
        return Err(ScenarioGenError::NotEnoughFreeCells {
            needed,
            free: cells.len(),
        });
    }
    cells.shuffle(&mut stream(seed, PLACEMENT_STREAM));

    let caps = draw_capabilities(&mut stream(seed, ROBOT_STREAM), n_robots, nr);
    let robots: Vec<Robot> = caps
        .into_iter()
        .enumerate()
        .map(|(id, p)| Robot::new(id, cells[id], p))
        .collect();

    let mut vrng = stream(seed, VICTIM_STREAM);
    let victims = (0..m_victims)
        .map(|id| VictimRecord::new(id, cells[n_robots + id], draw_requirements(&mut vrng, nr)))
        .collect();

    let mut starts = vec![robots[0].start];
    if n_robots > 1 {
        starts.push(robots[n_robots - 1].start);
    }
    Ok(Scenario {
        map: map.clone(),
        robots,
        victims,
        scouts: ScoutConfig {
            count: starts.len(),
            starts,
            vfd: 3,
            step_limit: 100_000,
        },
        psi: DEFAULT_PSI,
        beta: DEFAULT_BETA,
        seed,
        t_serve: 1.0,
        t_attempt: 1.0,
    })
}
