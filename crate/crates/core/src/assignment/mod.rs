//! The three assignment stages.
//!
//! * Cluster assignment (B2): robots are matched one-to-one to clusters by
//!   maximising `(1 - psi) * w + psi * w_full`.
//! * Performance-based victim assignment (B3): every remaining victim goes to
//!   the robot minimising `(1 - beta) * T_success + beta * T_failure`, where
//!   the time costs come from replaying each robot's B2 route.
//! * Distance auction (B4): every requirement still unmet goes to the closest
//!   robot that has the capability.

mod lap;

pub use lap::{matching_value, solve_linear_assignment, Sense};

use serde::{Deserialize, Serialize};

use crate::capability::CapabilityContext;
use crate::clustering::{ClusterPlan, Clustering};
use crate::grid::{manhattan, Coord};
use crate::model::{Robot, RobotId, VictimId, VictimRecord};
use crate::pathplan::Navigator;
use crate::scalar::Scalar;

/// Robot x cluster weight matrices for the cluster assignment objective.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterWeights<T> {
    /// Requirements of surviving cluster members the robot covers.
    pub w: Vec<Vec<T>>,
    /// Surviving cluster members the robot covers completely.
    pub w_full: Vec<Vec<T>>,
    pub psi: T,
}

impl<T: Scalar> ClusterWeights<T> {
    pub fn combined(&self, robot: RobotId, cluster: usize) -> T {
        (T::one() - self.psi) * self.w[robot][cluster] + self.psi * self.w_full[robot][cluster]
    }

    pub fn combined_matrix(&self) -> Vec<Vec<T>> {
        (0..self.w.len())
            .map(|r| (0..self.w[r].len()).map(|c| self.combined(r, c)).collect())
            .collect()
    }

    pub fn scaled(&self, factor: T) -> Self {
        let scale = |m: &Vec<Vec<T>>| m.iter().map(|row| row.iter().map(|&x| x * factor).collect()).collect();
        Self {
            w: scale(&self.w),
            w_full: scale(&self.w_full),
            psi: self.psi,
        }
    }
}

pub fn cluster_weights<T: Scalar>(plan: &ClusterPlan, ctx: &CapabilityContext, psi: T) -> ClusterWeights<T> {
    let n = ctx.robots();
    let k = plan.ordered.len();
    let mut w = vec![vec![T::zero(); k]; n];
    let mut w_full = vec![vec![T::zero(); k]; n];
    for (c, members) in plan.ordered.iter().enumerate() {
        for &v in members {
            for r in 0..n {
                let covered = ctx.covered(r, v);
                w[r][c] = w[r][c] + T::from_count(covered as usize);
                if covered > 0 && covered == ctx.total(v) {
                    w_full[r][c] = w_full[r][c] + T::one();
                }
            }
        }
    }
    ClusterWeights { w, w_full, psi }
}

/// A robot's cluster-stage assignment. `route` lists the victims it serves on
/// arrival, in priority order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct B2Entry {
    pub robot: RobotId,
    pub cluster: Option<usize>,
    pub center: Option<Coord>,
    pub route: Vec<VictimId>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct B3Entry {
    pub robot: RobotId,
    pub victim: VictimId,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct B4Entry {
    pub robot: RobotId,
    pub victim: VictimId,
    pub requirement: usize,
}

/// Matches robots to clusters. Pairs with zero combined weight are never
/// used. Each assigned robot's route keeps the cluster's surviving members
/// it can serve at least partly; every other victim is returned as remaining.
pub fn clstr_asgn<T: Scalar>(
    weights: &ClusterWeights<T>,
    plan: &ClusterPlan,
    clustering: &Clustering<T>,
    ctx: &CapabilityContext,
) -> (Vec<B2Entry>, Vec<VictimId>) {
    let n = ctx.robots();
    let combined = weights.combined_matrix();
    let matching = solve_linear_assignment(&combined, Sense::Maximize, |r, c| combined[r][c] == T::zero());

    let mut b2: Vec<B2Entry> = (0..n)
        .map(|robot| B2Entry {
            robot,
            cluster: None,
            center: None,
            route: Vec::new(),
        })
        .collect();
    for (r, c) in matching {
        b2[r].cluster = Some(c);
        b2[r].center = Some(clustering.centers[c]);
        b2[r].route = plan.ordered[c].iter().copied().filter(|&v| ctx.covered(r, v) > 0).collect();
    }

    let mut routed: Vec<VictimId> = b2.iter().flat_map(|e| e.route.iter().copied()).collect();
    routed.sort_unstable();
    let v_bar = ctx
        .mats
        .victim_ids()
        .iter()
        .copied()
        .filter(|v| routed.binary_search(v).is_err())
        .collect();
    (b2, v_bar)
}

/// Success/failure time accumulated by a robot over its cluster route.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobotHistory<T> {
    pub robot: RobotId,
    pub success: T,
    pub failure: T,
    pub end: Coord,
}

/// Robot x remaining-victim time costs. `t_success` is `None` where the robot
/// cannot reach the victim.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeCostMatrices<T> {
    pub victims: Vec<VictimId>,
    pub t_success: Vec<Vec<Option<T>>>,
    pub t_failure: Vec<Vec<T>>,
    pub beta: T,
    pub histories: Vec<RobotHistory<T>>,
}

impl<T: Scalar> TimeCostMatrices<T> {
    /// `(1 - beta) * T_success + beta * T_failure`, `None` if unusable.
    pub fn cost(&self, robot: RobotId, column: usize) -> Option<T> {
        let s = self.t_success[robot][column]?;
        Some((T::one() - self.beta) * s + self.beta * self.t_failure[robot][column])
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ServiceTimes<T> {
    pub serve: T,
    pub attempt: T,
}

impl<T: Scalar> Default for ServiceTimes<T> {
    fn default() -> Self {
        Self {
            serve: T::one(),
            attempt: T::one(),
        }
    }
}

fn victim_by_id(victims: &[VictimRecord], id: VictimId) -> &VictimRecord {
    let i = victims.binary_search_by_key(&id, |v| v.id).expect("known victim");
    &victims[i]
}

/// Replays each robot's B2 route (start, center, route victims) to build its
/// success and failure histories, then prices every remaining victim.
#[allow(clippy::too_many_arguments)]
pub fn perf_analysis<T: Scalar>(
    nav: &Navigator<'_>,
    robots: &[Robot],
    b2: &[B2Entry],
    v_bar: &[VictimId],
    victims: &[VictimRecord],
    ctx: &CapabilityContext,
    times: ServiceTimes<T>,
    beta: T,
) -> TimeCostMatrices<T> {
    let kinds = ctx.kinds();
    let histories: Vec<RobotHistory<T>> = robots
        .iter()
        .map(|robot| {
            let mut h = RobotHistory {
                robot: robot.id,
                success: T::zero(),
                failure: T::zero(),
                end: robot.start,
            };
            let Some(entry) = b2.iter().find(|e| e.robot == robot.id) else {
                return h;
            };
            let Some(center) = entry.center else {
                return h;
            };
            let mut stops = vec![(None, center)];
            stops.extend(entry.route.iter().map(|&v| (Some(v), victim_by_id(victims, v).location)));
            for (victim, at) in stops {
                let Some(travel) = nav.cost(h.end, at) else {
                    continue;
                };
                h.success = h.success + T::from_count(travel);
                h.end = at;
                if let Some(v) = victim {
                    for j in (0..kinds).filter(|&j| ctx.needs(v, j)) {
                        if ctx.can(robot.id, j) {
                            h.success = h.success + times.serve;
                        } else {
                            h.failure = h.failure + times.attempt;
                        }
                    }
                }
            }
            h
        })
        .collect();

    let mut t_success = vec![Vec::with_capacity(v_bar.len()); robots.len()];
    let mut t_failure = vec![Vec::with_capacity(v_bar.len()); robots.len()];
    for (r, h) in histories.iter().enumerate() {
        for &v in v_bar {
            let covered = ctx.covered(r, v) as usize;
            let uncovered = ctx.total(v) as usize - covered;
            let travel = nav.cost(h.end, victim_by_id(victims, v).location);
            t_success[r].push(travel.map(|t| h.success + T::from_count(t) + T::from_count(covered) * times.serve));
            t_failure[r].push(h.failure + T::from_count(uncovered) * times.attempt);
        }
    }
    TimeCostMatrices {
        victims: v_bar.to_vec(),
        t_success,
        t_failure,
        beta,
        histories,
    }
}

/// Gives each remaining victim to the cheapest robot that covers at least one
/// of its requirements and can reach it (ties to the lowest robot ID). Returns
/// the assignments and the victims nobody could take.
pub fn victim_assign<T: Scalar>(costs: &TimeCostMatrices<T>, ctx: &CapabilityContext) -> (Vec<B3Entry>, Vec<VictimId>) {
    let mut b3 = Vec::new();
    let mut left = Vec::new();
    for (col, &v) in costs.victims.iter().enumerate() {
        let mut best: Option<(RobotId, T)> = None;
        for r in 0..costs.t_success.len() {
            if ctx.covered(r, v) == 0 {
                continue;
            }
            let Some(cost) = costs.cost(r, col) else { continue };
            if best.is_none_or(|(_, b)| cost.definitely_lt(b)) {
                best = Some((r, cost));
            }
        }
        match best {
            Some((robot, _)) => b3.push(B3Entry { robot, victim: v }),
            None => left.push(v),
        }
    }
    (b3, left)
}

/// Output of the auction stage.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuctionOutcome {
    pub b4: Vec<B4Entry>,
    /// Unmet requirements without any capable robot; these must all be in
    /// the unavailable list.
    pub unserved: Vec<(VictimId, usize)>,
}

/// The robot holding each victim after B2 and B3.
pub fn holders(b2: &[B2Entry], b3: &[B3Entry]) -> Vec<(VictimId, RobotId)> {
    let mut out: Vec<(VictimId, RobotId)> = b2
        .iter()
        .flat_map(|e| e.route.iter().map(move |&v| (v, e.robot)))
        .chain(b3.iter().map(|e| (e.victim, e.robot)))
        .collect();
    out.sort_unstable();
    out
}

/// Sealed-bid auction over unmet requirements. Each capable robot bids its
/// Manhattan distance from its start to the victim; the closest wins, ties to
/// the lowest ID. Victims held by a robot that satisfies them fully are never
/// auctioned.
pub fn robot_assign(
    robots: &[Robot],
    victims: &[VictimRecord],
    ctx: &CapabilityContext,
    b2: &[B2Entry],
    b3: &[B3Entry],
) -> AuctionOutcome {
    let held = holders(b2, b3);
    let holder_of = |v: VictimId| held.binary_search_by_key(&v, |&(v, _)| v).ok().map(|i| held[i].1);
    let mut out = AuctionOutcome::default();
    for victim in victims {
        let v = victim.id;
        let holder = holder_of(v);
        if holder.is_some_and(|h| ctx.result.is_full(h, v)) {
            continue;
        }
        let potential = ctx.result.potential(v).expect("victim analysed");
        for (j, candidates) in potential.iter().enumerate() {
            if !ctx.needs(v, j) || holder.is_some_and(|h| ctx.can(h, j)) {
                continue;
            }
            let winner = candidates
                .iter()
                .map(|&r| (manhattan(robots[r].start, victim.location), r))
                .min();
            match winner {
                Some((_, robot)) => out.b4.push(B4Entry {
                    robot,
                    victim: v,
                    requirement: j,
                }),
                None => out.unserved.push((v, j)),
            }
        }
    }
    out
}

/// All staged outputs of one planning pass.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AssignmentBundle {
    pub b2: Vec<B2Entry>,
    pub b3: Vec<B3Entry>,
    pub b4: Vec<B4Entry>,
    /// Remaining victims after the cluster stage.
    pub v_bar_after_b2: Vec<VictimId>,
    /// Remaining victims after the performance stage.
    pub v_bar_after_b3: Vec<VictimId>,
    pub unserved: Vec<(VictimId, usize)>,
}

/// A requirement-level coverage problem found by [`audit_coverage`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CoverageViolation {
    /// Neither served by a capable robot nor listed as unavailable.
    Uncovered { victim: VictimId, requirement: usize },
    /// Auctioned although the holder already covers it.
    Duplicated { victim: VictimId, requirement: usize },
    /// Assigned to a robot lacking the capability.
    Incapable { robot: RobotId, victim: VictimId, requirement: usize },
    /// More than one robot holds the victim in B2/B3.
    DoubleHeld { victim: VictimId },
}

/// Checks that every needed requirement is covered exactly once by a capable
/// robot or appears in the unavailable list.
pub fn audit_coverage(ctx: &CapabilityContext, bundle: &AssignmentBundle) -> Vec<CoverageViolation> {
    let mut issues = Vec::new();
    let held = holders(&bundle.b2, &bundle.b3);
    for w in held.windows(2) {
        if w[0].0 == w[1].0 {
            issues.push(CoverageViolation::DoubleHeld { victim: w[0].0 });
        }
    }
    for e in &bundle.b4 {
        if !ctx.can(e.robot, e.requirement) {
            issues.push(CoverageViolation::Incapable {
                robot: e.robot,
                victim: e.victim,
                requirement: e.requirement,
            });
        }
    }
    for &v in ctx.mats.victim_ids() {
        let holder = held.iter().find(|&&(hv, _)| hv == v).map(|&(_, r)| r);
        for j in (0..ctx.kinds()).filter(|&j| ctx.needs(v, j)) {
            let by_holder = holder.is_some_and(|h| ctx.can(h, j));
            let auctioned = bundle.b4.iter().filter(|e| e.victim == v && e.requirement == j).count();
            if by_holder && auctioned > 0 {
                issues.push(CoverageViolation::Duplicated { victim: v, requirement: j });
            }
            if !by_holder && auctioned == 0 && !ctx.unavailable.contains(v, j) {
                issues.push(CoverageViolation::Uncovered { victim: v, requirement: j });
            }
        }
    }
    issues
}
