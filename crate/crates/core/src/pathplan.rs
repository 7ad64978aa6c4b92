//! A* path planning on the 4-connected grid and expansion of an assignment
//! bundle into per-robot itineraries.

use std::cell::Cell;
use std::cmp::Reverse;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::assignment::AssignmentBundle;
use crate::grid::{manhattan, Coord, GridError, GridMap};
use crate::model::{Robot, VictimId, VictimRecord};

/// A sequence of 4-adjacent free cells. `cost` is the number of moves.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Path {
    pub waypoints: Vec<Coord>,
    pub cost: usize,
}

impl Path {
    pub fn start(&self) -> Coord {
        self.waypoints[0]
    }

    pub fn end(&self) -> Coord {
        *self.waypoints.last().expect("paths are non-empty")
    }

    /// Checks the structural invariants against `map`.
    pub fn is_valid_on(&self, map: &GridMap) -> bool {
        !self.waypoints.is_empty()
            && self.cost + 1 == self.waypoints.len()
            && self.waypoints.iter().all(|&c| map.is_free(c))
            && self.waypoints.windows(2).all(|w| manhattan(w[0], w[1]) == 1)
    }
}

const UNSEEN: u32 = u32::MAX;
const NO_PARENT: u32 = u32::MAX;

struct Search {
    g: Vec<u32>,
    parent: Vec<u32>,
    found: bool,
}

/// Core A*. The open list is ordered by `(f, insertion sequence)` so equal-f
/// nodes expand first-in first-out. `on_expand` sees every closed node with
/// its g value.
fn search(map: &GridMap, start: Coord, goal: Coord, mut on_expand: impl FnMut(Coord, usize)) -> Search {
    let n = map.len();
    let mut g = vec![UNSEEN; n];
    let mut parent = vec![NO_PARENT; n];
    let mut closed = vec![false; n];
    let mut open = BinaryHeap::new();
    let mut seq: u64 = 0;

    let s = map.index(start);
    let t = map.index(goal);
    g[s] = 0;
    open.push(Reverse((manhattan(start, goal) as u32, seq, s as u32)));

    while let Some(Reverse((_, _, idx))) = open.pop() {
        let idx = idx as usize;
        if closed[idx] {
            continue;
        }
        closed[idx] = true;
        let here = map.coord(idx);
        on_expand(here, g[idx] as usize);
        if idx == t {
            return Search {
                g,
                parent,
                found: true,
            };
        }
        let next_g = g[idx] + 1;
        for nb in map.free_neighbors(here) {
            let ni = map.index(nb);
            if closed[ni] || next_g >= g[ni] {
                continue;
            }
            g[ni] = next_g;
            parent[ni] = idx as u32;
            seq += 1;
            let f = next_g + manhattan(nb, goal) as u32;
            open.push(Reverse((f, seq, ni as u32)));
        }
    }
    Search {
        g,
        parent,
        found: false,
    }
}

fn reconstruct(map: &GridMap, search: &Search, goal: Coord) -> Path {
    let mut waypoints = Vec::new();
    let mut idx = map.index(goal) as u32;
    while idx != NO_PARENT {
        waypoints.push(map.coord(idx as usize));
        idx = search.parent[idx as usize];
    }
    waypoints.reverse();
    let cost = search.g[map.index(goal)] as usize;
    Path { waypoints, cost }
}

/// Minimum-cost path from `start` to `goal`, `Ok(None)` if unreachable.
pub fn astar(map: &GridMap, start: Coord, goal: Coord) -> Result<Option<Path>, GridError> {
    astar_inspect(map, start, goal, |_, _| {})
}

/// [`astar`] with a callback observing each expanded node and its g value.
pub fn astar_inspect(
    map: &GridMap,
    start: Coord,
    goal: Coord,
    on_expand: impl FnMut(Coord, usize),
) -> Result<Option<Path>, GridError> {
    map.require_free(start)?;
    map.require_free(goal)?;
    let s = search(map, start, goal, on_expand);
    Ok(s.found.then(|| reconstruct(map, &s, goal)))
}

/// Path length only; skips path reconstruction.
pub fn astar_cost(map: &GridMap, start: Coord, goal: Coord) -> Result<Option<usize>, GridError> {
    map.require_free(start)?;
    map.require_free(goal)?;
    let s = search(map, start, goal, |_, _| {});
    Ok(s.found.then(|| s.g[map.index(goal)] as usize))
}

/// A* front end that counts invocations. Endpoints that are not free cells
/// are treated as unreachable.
#[derive(Debug)]
pub struct Navigator<'m> {
    map: &'m GridMap,
    calls: Cell<usize>,
}

impl<'m> Navigator<'m> {
    pub fn new(map: &'m GridMap) -> Self {
        Self {
            map,
            calls: Cell::new(0),
        }
    }

    pub fn map(&self) -> &'m GridMap {
        self.map
    }

    pub fn calls(&self) -> usize {
        self.calls.get()
    }

    pub fn cost(&self, from: Coord, to: Coord) -> Option<usize> {
        self.calls.set(self.calls.get() + 1);
        astar_cost(self.map, from, to).ok().flatten()
    }

    pub fn path(&self, from: Coord, to: Coord) -> Option<Path> {
        self.calls.set(self.calls.get() + 1);
        astar(self.map, from, to).ok().flatten()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "id", rename_all = "snake_case")]
pub enum LegTarget {
    ClusterCenter(usize),
    Victim(VictimId),
}

/// One hop of an itinerary. `path` is `None` when the goal is unreachable from
/// `from`; the next leg then starts from the same cell.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Leg {
    pub from: Coord,
    pub to: Coord,
    pub target: LegTarget,
    pub path: Option<Path>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RobotPlan {
    pub robot: usize,
    pub legs: Vec<Leg>,
    pub travel_cost: usize,
    /// Indices into `legs` that could not be planned.
    pub gaps: Vec<usize>,
}

impl RobotPlan {
    pub fn unreachable_victims(&self) -> impl Iterator<Item = VictimId> + '_ {
        self.gaps.iter().filter_map(|&i| match self.legs[i].target {
            LegTarget::Victim(v) => Some(v),
            LegTarget::ClusterCenter(_) => None,
        })
    }
}

/// Turns the staged assignments into executable itineraries: start to cluster
/// center, center through the cluster route, then B3 victims, then B4 targets
/// (each victim visited once per robot).
pub fn plan_bundle(
    nav: &Navigator<'_>,
    bundle: &AssignmentBundle,
    robots: &[Robot],
    victims: &[VictimRecord],
) -> Vec<RobotPlan> {
    let location = |id: VictimId| {
        victims
            .binary_search_by_key(&id, |v| v.id)
            .map(|i| victims[i].location)
            .expect("bundle references a known victim")
    };

    robots
        .iter()
        .map(|robot| {
            let mut targets: Vec<(LegTarget, Coord)> = Vec::new();
            if let Some(entry) = bundle.b2.iter().find(|e| e.robot == robot.id) {
                if let (Some(cluster), Some(center)) = (entry.cluster, entry.center) {
                    targets.push((LegTarget::ClusterCenter(cluster), center));
                }
                targets.extend(entry.route.iter().map(|&v| (LegTarget::Victim(v), location(v))));
            }
            for e in bundle.b3.iter().filter(|e| e.robot == robot.id) {
                targets.push((LegTarget::Victim(e.victim), location(e.victim)));
            }
            let mut auctioned: Vec<VictimId> = Vec::new();
            for e in bundle.b4.iter().filter(|e| e.robot == robot.id) {
                if !auctioned.contains(&e.victim) {
                    auctioned.push(e.victim);
                    targets.push((LegTarget::Victim(e.victim), location(e.victim)));
                }
            }

            let mut here = robot.start;
            let mut legs = Vec::with_capacity(targets.len());
            let mut gaps = Vec::new();
            let mut travel_cost = 0;
            for (target, to) in targets {
                let path = nav.path(here, to);
                match &path {
                    Some(p) => {
                        travel_cost += p.cost;
                        legs.push(Leg {
                            from: here,
                            to,
                            target,
                            path,
                        });
                        here = to;
                    }
                    None => {
                        gaps.push(legs.len());
                        legs.push(Leg {
                            from: here,
                            to,
                            target,
                            path: None,
                        });
                    }
                }
            }
            RobotPlan {
                robot: robot.id,
                legs,
                travel_cost,
                gaps,
            }
        })
        .collect()
}
