#![allow(dead_code)]

use msmrta::grid::Cell;
use msmrta::model::Robot;
use msmrta::pipeline::ScoutConfig;
use msmrta::{Coord, GridMap, Scenario, VictimRecord};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn c(row: usize, col: usize) -> Coord {
    Coord::new(row, col)
}

/// Ten victims of the rescue example.
pub fn table_victims() -> Vec<VictimRecord> {
    let rows: [((usize, usize), [u8; 6]); 10] = [
        ((16, 7), [0, 1, 1, 0, 0, 0]),
        ((15, 12), [0, 0, 0, 1, 1, 0]),
        ((6, 5), [0, 1, 0, 0, 0, 1]),
        ((11, 4), [0, 0, 1, 0, 1, 0]),
        ((0, 1), [1, 1, 0, 0, 0, 0]),
        ((14, 14), [0, 0, 0, 0, 1, 1]),
        ((14, 12), [1, 0, 0, 0, 1, 0]),
        ((3, 16), [1, 0, 0, 1, 0, 0]),
        ((10, 15), [0, 1, 0, 1, 0, 0]),
        ((0, 12), [1, 0, 0, 0, 1, 0]),
    ];
    rows.iter()
        .enumerate()
        .map(|(id, &((r, col), q))| VictimRecord::new(id, c(r, col), q.to_vec()))
        .collect()
}

/// Four rescue robots of the example.
pub fn table_robots() -> Vec<Robot> {
    let rows: [((usize, usize), [u8; 6]); 4] = [
        ((0, 9), [0, 1, 0, 1, 0, 0]),
        ((0, 10), [1, 0, 1, 0, 1, 0]),
        ((19, 9), [0, 0, 0, 0, 1, 0]),
        ((19, 10), [1, 0, 0, 1, 0, 0]),
    ];
    rows.iter()
        .enumerate()
        .map(|(id, &((r, col), p))| Robot::new(id, c(r, col), p.to_vec()))
        .collect()
}

/// 20x20 map with a few wall segments that keep every example position free.
pub fn walled_map() -> GridMap {
    let mut map = GridMap::empty(20, 20);
    let walls = (2..=9)
        .map(|col| c(8, col))
        .chain((11..=17).map(|row| c(row, 10)))
        .chain((2..=6).map(|row| c(row, 13)))
        .chain((14..=18).map(|col| c(12, col)));
    for w in walls {
        map.set(w, Cell::Obstacle);
    }
    map
}

pub fn table_scenario(map: GridMap) -> Scenario {
    Scenario {
        map,
        robots: table_robots(),
        victims: table_victims(),
        scouts: ScoutConfig {
            count: 2,
            starts: vec![c(0, 0), c(19, 19)],
            vfd: 3,
            step_limit: 10_000,
        },
        psi: 0.5,
        beta: 0.5,
        seed: 42,
        t_serve: 1.0,
        t_attempt: 1.0,
    }
}

/// Random connected map with roughly `density` obstacles.
pub fn random_map(rng: &mut ChaCha8Rng, w: usize, h: usize, density: f64) -> GridMap {
    loop {
        let mut map = GridMap::empty(w, h);
        for row in 0..h {
            for col in 0..w {
                if rng.random_bool(density) {
                    map.set(c(row, col), Cell::Obstacle);
                }
            }
        }
        if map.free_count() > 0 && msmrta::grid::is_connected(&map) {
            return map;
        }
    }
}

pub fn random_bits(rng: &mut ChaCha8Rng, n: usize, nonzero: bool) -> Vec<u8> {
    loop {
        let bits: Vec<u8> = (0..n).map(|_| rng.random_range(0..=1)).collect();
        if !nonzero || bits.contains(&1) {
            return bits;
        }
    }
}

/// Random scenario on a connected `size x size` map; capability vectors are
/// unconstrained so some requirements may be unavailable.
pub fn random_scenario(seed: u64, size: usize, max_robots: usize, max_victims: usize) -> Scenario {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let map = random_map(&mut rng, size, size, 0.2);
    let mut free: Vec<Coord> = map.free_cells().collect();
    let n = rng.random_range(1..=max_robots);
    let m = rng.random_range(1..=max_victims);
    let nr = rng.random_range(1..=5);
    let mut take = |rng: &mut ChaCha8Rng| free.swap_remove(rng.random_range(0..free.len()));
    let robots = (0..n)
        .map(|id| {
            let at = take(&mut rng);
            Robot::new(id, at, random_bits(&mut rng, nr, false))
        })
        .collect();
    let victims = (0..m)
        .map(|id| {
            let at = take(&mut rng);
            VictimRecord::new(id, at, random_bits(&mut rng, nr, true))
        })
        .collect();
    let scout_start = take(&mut rng);
    Scenario {
        map,
        robots,
        victims,
        scouts: ScoutConfig {
            count: 1,
            starts: vec![scout_start],
            vfd: 2,
            step_limit: 5_000,
        },
        psi: rng.random_range(0..=4) as f64 / 4.0,
        beta: rng.random_range(0..=4) as f64 / 4.0,
        seed,
        t_serve: 1.0,
        t_attempt: 1.0,
    }
}
