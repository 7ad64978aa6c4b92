//! Scout team coverage search.
//!
//! Scouts share a search table of visit counts and repeatedly step to the
//! least-visited free neighbour, breaking ties uniformly at random. A cell is
//! observed once it lies within some scout's visual field depth (a Chebyshev
//! square) with clear line of sight. The mission ends when every free cell
//! has been observed or the step budget runs out.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::grid::{chebyshev, line_of_sight, Coord, GridMap};
use crate::model::VictimRecord;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Scout {
    pub id: usize,
    pub position: Coord,
    pub vfd: usize,
}

/// Shared visit counts. Obstacle cells are never visited.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchTable {
    width: usize,
    visits: Vec<u32>,
}

impl SearchTable {
    pub fn new(map: &GridMap) -> Self {
        Self {
            width: map.width(),
            visits: vec![0; map.len()],
        }
    }

    pub fn count(&self, c: Coord) -> u32 {
        self.visits[c.row * self.width + c.col]
    }

    pub fn visit(&mut self, c: Coord) {
        self.visits[c.row * self.width + c.col] += 1;
    }

    pub fn counts(&self) -> &[u32] {
        &self.visits
    }
}

/// Least-visited free neighbour of the scout; the current cell if boxed in.
/// Equal counts are resolved by one uniform draw from `rng`.
pub fn step_policy<R: Rng + ?Sized>(scout: &Scout, table: &SearchTable, map: &GridMap, rng: &mut R) -> Coord {
    let mut best = u32::MAX;
    let mut ties: Vec<Coord> = Vec::with_capacity(4);
    for n in map.free_neighbors(scout.position) {
        let count = table.count(n);
        if count < best {
            best = count;
            ties.clear();
        }
        if count == best {
            ties.push(n);
        }
    }
    match ties.len() {
        0 => scout.position,
        1 => ties[0],
        k => ties[rng.random_range(0..k)],
    }
}

/// Victims within the scout's visual field that it can see.
pub fn detect(scout: &Scout, map: &GridMap, victims: &[VictimRecord]) -> Vec<VictimRecord> {
    victims
        .iter()
        .filter(|v| chebyshev(scout.position, v.location) <= scout.vfd && line_of_sight(map, scout.position, v.location))
        .cloned()
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScoutOutcome {
    /// Detected victims ordered by ID.
    pub found: Vec<VictimRecord>,
    pub steps_taken: usize,
    /// False when the step budget ran out before every free cell was seen.
    pub complete: bool,
    pub observed_cells: usize,
}

fn observe(map: &GridMap, scout: &Scout, observed: &mut [bool]) -> usize {
    let p = scout.position;
    let r0 = p.row.saturating_sub(scout.vfd);
    let c0 = p.col.saturating_sub(scout.vfd);
    let r1 = (p.row + scout.vfd).min(map.height() - 1);
    let c1 = (p.col + scout.vfd).min(map.width() - 1);
    let mut newly = 0;
    for row in r0..=r1 {
        for col in c0..=c1 {
            let cell = Coord::new(row, col);
            let i = map.index(cell);
            if !observed[i] && map.is_free(cell) && line_of_sight(map, p, cell) {
                observed[i] = true;
                newly += 1;
            }
        }
    }
    newly
}

/// Runs the scouting mission. Scouts move synchronously, one cell per round,
/// in ascending ID order within a round.
pub fn scout_mission(
    map: &GridMap,
    scouts: &[Scout],
    ground_truth: &[VictimRecord],
    seed: u64,
    step_limit: usize,
) -> ScoutOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut scouts = scouts.to_vec();
    scouts.sort_by_key(|s| s.id);

    let mut table = SearchTable::new(map);
    let mut observed = vec![false; map.len()];
    let mut seen = 0;
    let target = map.free_count();
    let mut found = vec![false; ground_truth.len()];

    let sweep = |scout: &Scout, observed: &mut [bool], found: &mut [bool]| -> usize {
        let newly = observe(map, scout, observed);
        if newly > 0 {
            for v in detect(scout, map, ground_truth) {
                let i = ground_truth.iter().position(|g| g.id == v.id).expect("detected from ground truth");
                found[i] = true;
            }
        }
        newly
    };

    for s in &scouts {
        table.visit(s.position);
        seen += sweep(s, &mut observed, &mut found);
    }

    let mut steps = 0;
    while seen < target && steps < step_limit {
        for i in 0..scouts.len() {
            let next = step_policy(&scouts[i], &table, map, &mut rng);
            scouts[i].position = next;
            table.visit(next);
            seen += sweep(&scouts[i], &mut observed, &mut found);
        }
        steps += 1;
    }

    let mut found: Vec<VictimRecord> = ground_truth
        .iter()
        .zip(&found)
        .filter(|(_, &f)| f)
        .map(|(v, _)| v.clone())
        .collect();
    found.sort_by_key(|v| v.id);
    ScoutOutcome {
        found,
        steps_taken: steps,
        complete: seen == target,
        observed_cells: seen,
    }
}
