//! Repeated-planning greedy baseline.
//!
//! Each round recomputes the A* cost from every robot's current position to
//! every unassigned victim it can help with, commits the globally cheapest
//! pair, and moves that robot onto the victim. Nothing is cached between
//! rounds, so a fully compatible instance costs `N * (M + (M - 1) + ... + 1)`
//! A* searches.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::capability::{CapabilityContext, CapabilityMatrices};
use crate::model::{RobotId, VictimId, VictimRecord};
use crate::pathplan::Navigator;
use crate::pipeline::{micros, MissionError, Scenario};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BaselineAssignment {
    pub robot: RobotId,
    pub victim: VictimId,
    pub cost: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BaselineReport {
    /// In commit order.
    pub assignments: Vec<BaselineAssignment>,
    /// Victims no robot has any capability for.
    pub skipped: Vec<VictimId>,
    /// Victims with capable robots that none of them can reach.
    pub unreachable: Vec<VictimId>,
    pub astar_calls: usize,
    pub total_travel_cost: usize,
    pub planning_time_us: u64,
}

pub fn run_mrga(scenario: &Scenario, found: &[VictimRecord]) -> Result<BaselineReport, MissionError> {
    let started = Instant::now();
    let robots = &scenario.robots;
    let nav = Navigator::new(&scenario.map);
    let ctx = CapabilityContext::analyze(CapabilityMatrices::from_records(found, robots)?)?;

    let mut positions: Vec<_> = robots.iter().map(|r| r.start).collect();
    let (mut open, skipped): (Vec<&VictimRecord>, Vec<&VictimRecord>) =
        found.iter().partition(|v| (0..robots.len()).any(|r| ctx.covered(r, v.id) > 0));

    let mut assignments = Vec::new();
    let mut total_travel_cost = 0;
    while !open.is_empty() {
        let mut best: Option<(usize, RobotId, usize)> = None;
        for (r, &pos) in positions.iter().enumerate() {
            for (slot, v) in open.iter().enumerate() {
                if ctx.covered(r, v.id) == 0 {
                    continue;
                }
                let Some(cost) = nav.cost(pos, v.location) else { continue };
                if best.is_none_or(|(c, br, bs)| (cost, r, open[slot].id) < (c, br, open[bs].id)) {
                    best = Some((cost, r, slot));
                }
            }
        }
        let Some((cost, robot, slot)) = best else { break };
        let victim = open.remove(slot);
        positions[robot] = victim.location;
        total_travel_cost += cost;
        assignments.push(BaselineAssignment {
            robot,
            victim: victim.id,
            cost,
        });
    }

    Ok(BaselineReport {
        assignments,
        skipped: skipped.iter().map(|v| v.id).collect(),
        unreachable: open.iter().map(|v| v.id).collect(),
        astar_calls: nav.calls(),
        total_travel_cost,
        planning_time_us: micros(started.elapsed()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{load_map, Coord, GridMap};
    use crate::model::Robot;
    use crate::pipeline::ScoutConfig;

    fn c(row: usize, col: usize) -> Coord {
        Coord::new(row, col)
    }

    fn scenario(map: GridMap, robots: Vec<Robot>, victims: Vec<VictimRecord>) -> Scenario {
        Scenario {
            map,
            robots,
            victims,
            scouts: ScoutConfig {
                count: 1,
                starts: vec![c(0, 0)],
                vfd: 3,
                step_limit: 100,
            },
            psi: 0.5,
            beta: 0.5,
            seed: 0,
            t_serve: 1.0,
            t_attempt: 1.0,
        }
    }

    #[test]
    fn single_pair() {
        let s = scenario(
            GridMap::empty(5, 5),
            vec![Robot::new(0, c(0, 0), vec![1])],
            vec![VictimRecord::new(0, c(3, 3), vec![1])],
        );
        let rep = run_mrga(&s, &s.victims).unwrap();
        assert_eq!(
            rep.assignments,
            vec![BaselineAssignment {
                robot: 0,
                victim: 0,
                cost: 6
            }]
        );
        assert_eq!(rep.astar_calls, 1);
    }

    #[test]
    fn symmetric_costs_resolve_to_lowest_ids() {
        let s = scenario(
            GridMap::empty(5, 5),
            vec![Robot::new(0, c(2, 0), vec![1]), Robot::new(1, c(2, 4), vec![1])],
            vec![VictimRecord::new(0, c(0, 2), vec![1]), VictimRecord::new(1, c(4, 2), vec![1])],
        );
        let a = run_mrga(&s, &s.victims).unwrap();
        let b = run_mrga(&s, &s.victims).unwrap();
        assert_eq!(a.assignments, b.assignments);
        assert_eq!((a.assignments[0].robot, a.assignments[0].victim), (0, 0));
        // robot 0 now sits at (0,2): 4 to victim 1; robot 1 is also 4 away
        assert_eq!((a.assignments[1].robot, a.assignments[1].victim), (0, 1));
    }

    #[test]
    fn counts_full_recomputation() {
        let victims: Vec<_> = (0..10).map(|i| VictimRecord::new(i, c(i, 9 - i), vec![1, 1])).collect();
        let robots: Vec<_> = (0..4).map(|r| Robot::new(r, c(r, 0), vec![1, 0])).collect();
        let s = scenario(GridMap::empty(12, 12), robots, victims);
        let rep = run_mrga(&s, &s.victims).unwrap();
        let expected: usize = (1..=10).map(|k| 4 * k).sum();
        assert_eq!(rep.astar_calls, expected);
        assert_eq!(rep.assignments.len(), 10);
    }

    #[test]
    fn incapable_and_walled_off_victims_are_reported() {
        let map = load_map(".....\n#####\n.....\n").unwrap();
        let s = scenario(
            map,
            vec![Robot::new(0, c(0, 0), vec![1, 0])],
            vec![
                VictimRecord::new(0, c(0, 4), vec![1, 0]),
                VictimRecord::new(1, c(0, 3), vec![0, 1]),
                VictimRecord::new(2, c(2, 2), vec![1, 0]),
            ],
        );
        let rep = run_mrga(&s, &s.victims).unwrap();
        assert_eq!(rep.assignments.len(), 1);
        assert_eq!(rep.skipped, vec![1]);
        assert_eq!(rep.unreachable, vec![2]);
    }
}
