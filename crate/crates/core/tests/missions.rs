mod common;

use std::time::Instant;

use common::{c, random_map, random_scenario, table_scenario, walled_map};
use msmrta::baseline::run_mrga;
use msmrta::model::Robot;
use msmrta::pipeline::{measure_planning_time, plan_mission, run_mission, ScoutConfig, Stage};
use msmrta::scouting::{scout_mission, Scout};
use msmrta::{GridMap, Scenario, VictimRecord};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn coverage_audit_on_random_scenarios() {
    for seed in 0..200 {
        let s = random_scenario(seed, 12, 4, 8);
        let report = run_mission::<f64>(&s).unwrap();
        let out = &report.planning;
        assert!(out.coverage_violations.is_empty(), "seed {seed}: {:?}", out.coverage_violations);

        // Independent audit straight from the bit vectors.
        let robots = &s.robots;
        for v in &report.scouting.found {
            let holder = out
                .bundle
                .b2
                .iter()
                .find(|e| e.route.contains(&v.id))
                .map(|e| e.robot)
                .or(out.bundle.b3.iter().find(|e| e.victim == v.id).map(|e| e.robot));
            for j in (0..v.requirements.len()).filter(|&j| v.requirements[j] == 1) {
                let by_holder = holder.is_some_and(|h| robots[h].capabilities[j] == 1);
                let by_auction = out
                    .bundle
                    .b4
                    .iter()
                    .any(|e| e.victim == v.id && e.requirement == j && robots[e.robot].capabilities[j] == 1);
                let unavailable = out.unavailable.entries.contains(&(v.id, j));
                assert!(by_holder || by_auction || unavailable, "seed {seed}: ({}, {j}) uncovered", v.id);
                assert_eq!(unavailable, robots.iter().all(|r| r.capabilities[j] == 0));
            }
        }

        // Each found victim has exactly one status; statuses agree with the bundle.
        assert_eq!(out.victim_status.len(), report.scouting.found.len());
        for st in &out.victim_status {
            let in_b2 = out.bundle.b2.iter().any(|e| e.route.contains(&st.victim));
            let in_b3 = out.bundle.b3.iter().any(|e| e.victim == st.victim);
            let in_b4 = out.bundle.b4.iter().any(|e| e.victim == st.victim);
            let expect = if in_b2 {
                Stage::ClusterRoute
            } else if in_b3 {
                Stage::Performance
            } else if in_b4 {
                Stage::AuctionOnly
            } else {
                Stage::Unavailable
            };
            assert_eq!(st.stage, expect);
            assert!(!(in_b2 && in_b3));
        }

        // Remaining set never grows.
        assert!(out.bundle.v_bar_after_b3.len() <= out.bundle.v_bar_after_b2.len());
        assert!(out.bundle.v_bar_after_b3.iter().all(|v| out.bundle.v_bar_after_b2.contains(v)));
    }
}

#[test]
fn reports_are_deterministic() {
    for seed in [1, 2, 3] {
        let s = random_scenario(seed, 12, 4, 8);
        let a = run_mission::<f64>(&s).unwrap();
        let b = run_mission::<f64>(&s).unwrap();
        assert_eq!(a.to_json_without_timing(), b.to_json_without_timing());
        assert!(!a.to_json_without_timing().contains("planning_time_us"));
        assert!(a.to_json().contains("planning_time_us"));
    }
}

#[test]
fn scouting_regression_two_scouts() {
    let s = table_scenario(GridMap::empty(20, 20));
    let first = s.scout();
    assert_eq!(first.found, s.victims);
    assert!(first.complete);
    assert_eq!(first.observed_cells, 400);
    assert_eq!(first.steps_taken, SCOUT_STEPS);
    assert_eq!(s.scout(), first);
}

const SCOUT_STEPS: usize = 208;

#[test]
fn scouting_terminates_for_many_seeds() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let map = random_map(&mut rng, 15, 15, 0.2);
    let start = map.free_cells().next().unwrap();
    let victims: Vec<VictimRecord> = map
        .free_cells()
        .step_by(17)
        .enumerate()
        .map(|(id, at)| VictimRecord::new(id, at, vec![1]))
        .collect();
    for seed in 0..100 {
        let scouts = [Scout { id: 0, position: start, vfd: 2 }];
        let out = scout_mission(&map, &scouts, &victims, seed, usize::MAX);
        assert!(out.complete, "seed {seed}");
        assert_eq!(out.observed_cells, map.free_count());
        assert_eq!(out.found, victims);
    }
}

#[test]
fn partial_scouting_flags_the_report() {
    let mut s = table_scenario(walled_map());
    s.scouts = ScoutConfig {
        count: 1,
        starts: vec![c(0, 0)],
        vfd: 1,
        step_limit: 5,
    };
    let report = run_mission::<f64>(&s).unwrap();
    assert!(report.partial);
    assert!(report.scouting.found.len() < s.victims.len());
    let ids: Vec<usize> = report.planning.victim_status.iter().map(|v| v.victim).collect();
    assert_eq!(ids, report.scouting.found.iter().map(|v| v.id).collect::<Vec<_>>());
    assert!(report.planning.coverage_violations.is_empty());
}

#[test]
fn walled_off_victim_is_flagged_unreachable() {
    let mut map = GridMap::empty(8, 8);
    for i in 0..8 {
        map.set(c(4, i), msmrta::grid::Cell::Obstacle);
    }
    let s = Scenario {
        map,
        robots: vec![Robot::new(0, c(0, 0), vec![1])],
        victims: vec![VictimRecord::new(0, c(2, 2), vec![1]), VictimRecord::new(1, c(6, 6), vec![1])],
        scouts: ScoutConfig {
            count: 2,
            starts: vec![c(0, 0), c(7, 7)],
            vfd: 3,
            step_limit: 1000,
        },
        psi: 0.5,
        beta: 0.5,
        seed: 3,
        t_serve: 1.0,
        t_attempt: 1.0,
    };
    let out = plan_mission::<f64>(&s, &s.victims).unwrap();
    assert!(out.coverage_violations.is_empty());
    let far = out.victim_status.iter().find(|st| st.victim == 1).unwrap();
    assert!(far.unreachable);
    assert!(!out.plans[0].gaps.is_empty());
}

fn dense_scenario(n: usize, m: usize, seed: u64) -> Scenario {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let map = random_map(&mut rng, 20, 20, 0.15);
    let mut free: Vec<_> = map.free_cells().collect();
    let mut take = |rng: &mut ChaCha8Rng| free.swap_remove(rng.random_range(0..free.len()));
    let robots = (0..n)
        .map(|id| {
            let at = take(&mut rng);
            Robot::new(id, at, common::random_bits(&mut rng, 4, true))
        })
        .collect();
    let victims = (0..m)
        .map(|id| {
            let at = take(&mut rng);
            VictimRecord::new(id, at, common::random_bits(&mut rng, 4, true))
        })
        .collect();
    let start = take(&mut rng);
    Scenario {
        map,
        robots,
        victims,
        scouts: ScoutConfig {
            count: 1,
            starts: vec![start],
            vfd: 3,
            step_limit: 100_000,
        },
        psi: 0.5,
        beta: 0.5,
        seed,
        t_serve: 1.0,
        t_attempt: 1.0,
    }
}

#[test]
fn ten_robots_hundred_victims_within_budget() {
    let s = dense_scenario(10, 100, 5);
    let stats = measure_planning_time::<f64>(&s, 3).unwrap();
    assert!(stats.stats.samples_us.iter().all(|&t| t < 1_000_000), "{:?}", stats.stats);
    assert!(stats.output.coverage_violations.is_empty());
}

#[test]
fn baseline_assigns_every_coverable_victim() {
    for seed in 0..30 {
        let s = random_scenario(seed, 12, 4, 8);
        let rep = run_mrga(&s, &s.victims).unwrap();
        let mut ids: Vec<usize> = rep.assignments.iter().map(|a| a.victim).collect();
        ids.extend(&rep.skipped);
        ids.extend(&rep.unreachable);
        ids.sort_unstable();
        assert_eq!(ids, (0..s.victims.len()).collect::<Vec<_>>());
        for id in &rep.skipped {
            let q = &s.victims[*id].requirements;
            assert!(s.robots.iter().all(|r| r.capabilities.iter().zip(q).all(|(a, b)| a & b == 0)));
        }
        // Connected maps: nothing coverable is unreachable.
        assert!(rep.unreachable.is_empty());
    }
}

#[test]
fn baseline_call_count_formula() {
    let s = dense_scenario(4, 10, 9);
    let mut s = s;
    for r in &mut s.robots {
        r.capabilities = vec![1, 1, 1, 1];
    }
    let started = Instant::now();
    let rep = run_mrga(&s, &s.victims).unwrap();
    assert!(started.elapsed().as_secs() < 5);
    assert_eq!(rep.astar_calls, (1..=10).map(|k| 4 * k).sum::<usize>());
}
