//! Procedural occupancy maps.

use std::fmt;
use std::str::FromStr;

use msmrta::grid::{is_connected, Cell};
use msmrta::{Coord, GridMap};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const MAX_ATTEMPTS: u64 = 64;

/// Smallest side of a room produced by recursive division.
const MIN_ROOM: usize = 4;

/// Obstacle fraction targeted by the random-walls style.
const WALL_DENSITY: f64 = 0.2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ObstacleStyle {
    Rooms,
    RandomWalls,
}

impl FromStr for ObstacleStyle {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "rooms" => Ok(Self::Rooms),
            "random-walls" | "random_walls" | "walls" => Ok(Self::RandomWalls),
            other => Err(format!("unknown obstacle style `{other}` (expected rooms or random-walls)")),
        }
    }
}

impl fmt::Display for ObstacleStyle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Rooms => "rooms",
            Self::RandomWalls => "random-walls",
        })
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MapGenError {
    #[error("map dimensions must be at least 5x5, got {width}x{height}")]
    TooSmall { width: usize, height: usize },
    #[error("no connected map after {0} attempts")]
    Disconnected(u64),
}

/// Generates a map whose free cells form one 4-connected region. The same
/// arguments always give the same map.
pub fn gen_map(width: usize, height: usize, style: ObstacleStyle, seed: u64) -> Result<GridMap, MapGenError> {
    if width < 5 || height < 5 {
        return Err(MapGenError::TooSmall { width, height });
    }
    for attempt in 0..MAX_ATTEMPTS {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(attempt);
        let map = match style {
            ObstacleStyle::Rooms => rooms(width, height, &mut rng),
            ObstacleStyle::RandomWalls => random_walls(width, height, &mut rng),
        };
        if is_connected(&map) {
            return Ok(map);
        }
    }
    Err(MapGenError::Disconnected(MAX_ATTEMPTS))
}

fn rooms(width: usize, height: usize, rng: &mut ChaCha8Rng) -> GridMap {
    let mut map = GridMap::empty(width, height);
    divide(&mut map, 0, 0, height, width, rng);
    map
}

/// Recursive division: split the chamber with a wall that has a two-cell
/// doorway, then recurse into both halves.
fn divide(map: &mut GridMap, r0: usize, c0: usize, h: usize, w: usize, rng: &mut ChaCha8Rng) {
    let can_h = h > 2 * MIN_ROOM;
    let can_v = w > 2 * MIN_ROOM;
    let horizontal = match (can_h, can_v) {
        (false, false) => return,
        (true, false) => true,
        (false, true) => false,
        (true, true) if h != w => h > w,
        (true, true) => rng.random_bool(0.5),
    };
    let (len, span) = if horizontal { (w, h) } else { (h, w) };
    let at = rng.random_range(MIN_ROOM..span - MIN_ROOM);
    let door = rng.random_range(0..len - 1);
    for i in (0..len).filter(|&i| i != door && i != door + 1) {
        let cell = if horizontal {
            Coord::new(r0 + at, c0 + i)
        } else {
            Coord::new(r0 + i, c0 + at)
        };
        map.set(cell, Cell::Obstacle);
    }
    if horizontal {
        divide(map, r0, c0, at, w, rng);
        divide(map, r0 + at + 1, c0, h - at - 1, w, rng);
    } else {
        divide(map, r0, c0, h, at, rng);
        divide(map, r0, c0 + at + 1, h, w - at - 1, rng);
    }
}

/// Straight wall segments are added one at a time; a segment that would
/// disconnect the free space is rolled back.
fn random_walls(width: usize, height: usize, rng: &mut ChaCha8Rng) -> GridMap {
    let mut map = GridMap::empty(width, height);
    let target = (WALL_DENSITY * (width * height) as f64) as usize;
    let mut tries = 0;
    while map.obstacle_count() < target && tries < 50 * target {
        tries += 1;
        let len = rng.random_range(3..=width.min(height) / 2 + 1);
        let horizontal = rng.random_bool(0.5);
        let (rmax, cmax) = if horizontal { (height, width - len + 1) } else { (height - len + 1, width) };
        let (r, c) = (rng.random_range(0..rmax), rng.random_range(0..cmax));
        let cells: Vec<Coord> = (0..len)
            .map(|i| if horizontal { Coord::new(r, c + i) } else { Coord::new(r + i, c) })
            .filter(|&p| map.is_free(p))
            .collect();
        for &p in &cells {
            map.set(p, Cell::Obstacle);
        }
        if !is_connected(&map) {
            for &p in &cells {
                map.set(p, Cell::Free);
            }
        }
    }
    map
}

pub fn obstacle_density(map: &GridMap) -> f64 {
    map.obstacle_count() as f64 / map.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_bytes() {
        for style in [ObstacleStyle::Rooms, ObstacleStyle::RandomWalls] {
            let a = gen_map(20, 20, style, 1).unwrap();
            let b = gen_map(20, 20, style, 1).unwrap();
            assert_eq!(a.to_text(), b.to_text());
            assert_ne!(a.to_text(), gen_map(20, 20, style, 2).unwrap().to_text());
        }
    }

    #[test]
    fn outputs_are_connected() {
        for seed in 0..50 {
            for style in [ObstacleStyle::Rooms, ObstacleStyle::RandomWalls] {
                let map = gen_map(20, 20, style, seed).unwrap();
                assert!(is_connected(&map));
            }
        }
    }

    #[test]
    fn room_density_band() {
        for seed in 0..100 {
            let d = obstacle_density(&gen_map(20, 20, ObstacleStyle::Rooms, seed).unwrap());
            assert!((0.10..=0.40).contains(&d), "seed {seed}: {d}");
        }
    }

    #[test]
    fn too_small() {
        assert_eq!(
            gen_map(4, 10, ObstacleStyle::Rooms, 0),
            Err(MapGenError::TooSmall { width: 4, height: 10 })
        );
        assert!(gen_map(5, 5, ObstacleStyle::Rooms, 0).is_ok());
    }

    #[test]
    fn style_names() {
        assert_eq!("rooms".parse::<ObstacleStyle>(), Ok(ObstacleStyle::Rooms));
        assert_eq!("random-walls".parse::<ObstacleStyle>(), Ok(ObstacleStyle::RandomWalls));
        assert!("maze".parse::<ObstacleStyle>().is_err());
        assert_eq!(ObstacleStyle::RandomWalls.to_string(), "random-walls");
    }
}
