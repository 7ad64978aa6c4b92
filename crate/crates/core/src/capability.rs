//! Requirement analysis: which victims each robot can serve fully or
//! partly, which robots can serve each individual requirement, and which
//! requirements nobody in the fleet can serve.
//!
//! Orientation: `Q` is victims x kinds, `P` is kinds x robots, so the
//! coverage matrix `U = Q P` is victims x robots and `U[v][r]` counts the
//! requirements of victim `v` that robot `r` covers.

use ndarray::{Array1, Array2, Axis};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{Robot, RobotId, VictimId, VictimRecord};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CapabilityError {
    #[error("victim {0} has no requirements")]
    NoRequirements(VictimId),
    #[error("{what} {id} has a vector of length {found}, expected {expected}")]
    Length {
        what: &'static str,
        id: usize,
        expected: usize,
        found: usize,
    },
    #[error("{what} {id} has non-binary entry {value}")]
    NotBinary { what: &'static str, id: usize, value: u8 },
}

/// Binary requirement matrix `Q` (victims x kinds) and capability matrix `P`
/// (kinds x robots). Row `i` of `Q` belongs to `victim_ids[i]`; robot IDs are
/// the column indices of `P`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CapabilityMatrices {
    q: Array2<u8>,
    p: Array2<u8>,
    victim_ids: Vec<VictimId>,
}

fn check_binary(what: &'static str, id: usize, bits: &[u8], nr: usize) -> Result<(), CapabilityError> {
    if bits.len() != nr {
        return Err(CapabilityError::Length {
            what,
            id,
            expected: nr,
            found: bits.len(),
        });
    }
    if let Some(&value) = bits.iter().find(|&&b| b > 1) {
        return Err(CapabilityError::NotBinary { what, id, value });
    }
    Ok(())
}

impl CapabilityMatrices {
    /// Builds the matrices from requirement rows (victim IDs `0..M`) and
    /// capability vectors (robot IDs `0..N`).
    pub fn new(q_rows: &[Vec<u8>], p_columns: &[Vec<u8>]) -> Result<Self, CapabilityError> {
        let nr = q_rows.first().or(p_columns.first()).map_or(0, Vec::len);
        let ids: Vec<VictimId> = (0..q_rows.len()).collect();
        Self::build(nr, &ids, q_rows, p_columns)
    }

    /// Matrices for the given victims (kept in their order, expected sorted by
    /// ID) and robots (expected to carry IDs `0..N` in order).
    pub fn from_records(victims: &[VictimRecord], robots: &[Robot]) -> Result<Self, CapabilityError> {
        let nr = victims
            .first()
            .map(|v| v.requirements.len())
            .or(robots.first().map(|r| r.capabilities.len()))
            .unwrap_or(0);
        let ids: Vec<VictimId> = victims.iter().map(|v| v.id).collect();
        let q: Vec<Vec<u8>> = victims.iter().map(|v| v.requirements.clone()).collect();
        let p: Vec<Vec<u8>> = robots.iter().map(|r| r.capabilities.clone()).collect();
        Self::build(nr, &ids, &q, &p)
    }

    fn build(nr: usize, ids: &[VictimId], q_rows: &[Vec<u8>], p_columns: &[Vec<u8>]) -> Result<Self, CapabilityError> {
        let m = q_rows.len();
        let n = p_columns.len();
        let mut q = Array2::zeros((m, nr));
        for (i, row) in q_rows.iter().enumerate() {
            check_binary("victim", ids[i], row, nr)?;
            q.row_mut(i).assign(&Array1::from(row.clone()));
        }
        let mut p = Array2::zeros((nr, n));
        for (r, col) in p_columns.iter().enumerate() {
            check_binary("robot", r, col, nr)?;
            p.column_mut(r).assign(&Array1::from(col.clone()));
        }
        Ok(Self {
            q,
            p,
            victim_ids: ids.to_vec(),
        })
    }

    pub fn victims(&self) -> usize {
        self.q.nrows()
    }

    pub fn robots(&self) -> usize {
        self.p.ncols()
    }

    pub fn kinds(&self) -> usize {
        self.q.ncols()
    }

    pub fn victim_ids(&self) -> &[VictimId] {
        &self.victim_ids
    }

    pub fn q(&self) -> &Array2<u8> {
        &self.q
    }

    pub fn p(&self) -> &Array2<u8> {
        &self.p
    }

    pub fn row_of(&self, victim: VictimId) -> Option<usize> {
        self.victim_ids.binary_search(&victim).ok()
    }

    pub fn needs(&self, row: usize, kind: usize) -> bool {
        self.q[[row, kind]] == 1
    }

    pub fn can(&self, robot: RobotId, kind: usize) -> bool {
        self.p[[kind, robot]] == 1
    }
}

/// `U` (victims x robots) and the per-victim requirement totals `S`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReqAnalysisIntermediate {
    pub u: Array2<u32>,
    pub s: Array1<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReqAnalysisResult {
    /// Per robot: victims whose whole requirement set it covers.
    pub l_full: Vec<Vec<VictimId>>,
    /// Per robot: victims it covers some but not all requirements of.
    pub l_partial: Vec<Vec<VictimId>>,
    /// Per victim (in matrix row order), per kind: robots able to serve it.
    /// Empty for kinds the victim does not need.
    pub l_potential: Vec<Vec<Vec<RobotId>>>,
    pub victim_ids: Vec<VictimId>,
}

impl ReqAnalysisResult {
    pub fn potential(&self, victim: VictimId) -> Option<&[Vec<RobotId>]> {
        let row = self.victim_ids.binary_search(&victim).ok()?;
        Some(&self.l_potential[row])
    }

    pub fn is_full(&self, robot: RobotId, victim: VictimId) -> bool {
        self.l_full[robot].binary_search(&victim).is_ok()
    }
}

/// `(victim, kind)` pairs that no robot can serve.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct UnavailableList {
    pub entries: Vec<(VictimId, usize)>,
}

impl UnavailableList {
    pub fn contains(&self, victim: VictimId, kind: usize) -> bool {
        self.entries.binary_search(&(victim, kind)).is_ok()
    }
}

/// Classifies every (victim, robot) pair by comparing `U = Q P` against the
/// requirement totals, and lists candidate robots per victim requirement.
pub fn reqment_analysis(
    mats: &CapabilityMatrices,
) -> Result<(ReqAnalysisResult, ReqAnalysisIntermediate), CapabilityError> {
    let q = mats.q.mapv(u32::from);
    let p = mats.p.mapv(u32::from);
    let u = q.dot(&p);
    let s = q.sum_axis(Axis(1));
    if let Some(row) = s.iter().position(|&total| total == 0) {
        return Err(CapabilityError::NoRequirements(mats.victim_ids[row]));
    }

    let (m, n) = (mats.victims(), mats.robots());
    let mut l_full = vec![Vec::new(); n];
    let mut l_partial = vec![Vec::new(); n];
    for r in 0..n {
        for v in 0..m {
            let covered = u[[v, r]];
            if covered == 0 {
                continue;
            }
            if covered == s[v] {
                l_full[r].push(mats.victim_ids[v]);
            } else {
                l_partial[r].push(mats.victim_ids[v]);
            }
        }
    }

    let l_potential = (0..m)
        .map(|v| {
            (0..mats.kinds())
                .map(|j| {
                    if q[[v, j]] == 0 {
                        return Vec::new();
                    }
                    (0..n).filter(|&r| p[[j, r]] == 1).collect()
                })
                .collect()
        })
        .collect();

    Ok((
        ReqAnalysisResult {
            l_full,
            l_partial,
            l_potential,
            victim_ids: mats.victim_ids.clone(),
        },
        ReqAnalysisIntermediate { u, s },
    ))
}

/// Requirements with no candidate robot, sorted by (victim, kind).
pub fn missing_cap(mats: &CapabilityMatrices, result: &ReqAnalysisResult) -> UnavailableList {
    let mut entries = Vec::new();
    for (row, per_kind) in result.l_potential.iter().enumerate() {
        for (j, robots) in per_kind.iter().enumerate() {
            if mats.needs(row, j) && robots.is_empty() {
                entries.push((mats.victim_ids[row], j));
            }
        }
    }
    entries.sort_unstable();
    UnavailableList { entries }
}

/// Matrices plus every analysis product, the shared input of the assignment
/// stages.
#[derive(Debug, Clone)]
pub struct CapabilityContext {
    pub mats: CapabilityMatrices,
    pub result: ReqAnalysisResult,
    pub intermediate: ReqAnalysisIntermediate,
    pub unavailable: UnavailableList,
}

impl CapabilityContext {
    pub fn analyze(mats: CapabilityMatrices) -> Result<Self, CapabilityError> {
        let (result, intermediate) = reqment_analysis(&mats)?;
        let unavailable = missing_cap(&mats, &result);
        Ok(Self {
            mats,
            result,
            intermediate,
            unavailable,
        })
    }

    pub fn robots(&self) -> usize {
        self.mats.robots()
    }

    pub fn kinds(&self) -> usize {
        self.mats.kinds()
    }

    pub fn row_of(&self, victim: VictimId) -> usize {
        self.mats.row_of(victim).expect("victim present in capability matrices")
    }

    /// Requirements of `victim` that `robot` covers.
    pub fn covered(&self, robot: RobotId, victim: VictimId) -> u32 {
        self.intermediate.u[[self.row_of(victim), robot]]
    }

    pub fn total(&self, victim: VictimId) -> u32 {
        self.intermediate.s[self.row_of(victim)]
    }

    pub fn needs(&self, victim: VictimId, kind: usize) -> bool {
        self.mats.needs(self.row_of(victim), kind)
    }

    pub fn can(&self, robot: RobotId, kind: usize) -> bool {
        self.mats.can(robot, kind)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_match_is_full() {
        let mats = CapabilityMatrices::new(&[vec![1, 0, 1]], &[vec![1, 0, 1]]).unwrap();
        let (res, inter) = reqment_analysis(&mats).unwrap();
        assert_eq!(res.l_full, vec![vec![0]]);
        assert_eq!(res.l_partial, vec![Vec::<usize>::new()]);
        assert_eq!(inter.u[[0, 0]], 2);
        assert_eq!(inter.s[0], 2);
    }

    #[test]
    fn zero_requirement_row_is_rejected() {
        let mats = CapabilityMatrices::new(&[vec![1, 0], vec![0, 0]], &[vec![1, 1]]).unwrap();
        assert_eq!(reqment_analysis(&mats), Err(CapabilityError::NoRequirements(1)));
    }

    #[test]
    fn malformed_vectors_are_rejected() {
        assert!(matches!(
            CapabilityMatrices::new(&[vec![1, 0]], &[vec![1, 0, 1]]),
            Err(CapabilityError::Length { what: "robot", .. })
        ));
        assert!(matches!(
            CapabilityMatrices::new(&[vec![1, 2]], &[vec![1, 0]]),
            Err(CapabilityError::NotBinary { value: 2, .. })
        ));
    }

    #[test]
    fn universal_robot_leaves_nothing_unavailable() {
        let q = vec![vec![1, 0, 1], vec![0, 1, 0], vec![1, 1, 1]];
        let mats = CapabilityMatrices::new(&q, &[vec![0, 0, 0], vec![1, 1, 1]]).unwrap();
        let (res, _) = reqment_analysis(&mats).unwrap();
        assert!(missing_cap(&mats, &res).entries.is_empty());
        assert_eq!(res.l_full[1], vec![0, 1, 2]);
        assert!(res.l_full[0].is_empty() && res.l_partial[0].is_empty());
    }

    #[test]
    fn capability_free_fleet_misses_everything() {
        let q = vec![vec![1, 0, 1], vec![0, 1, 0]];
        let mats = CapabilityMatrices::new(&q, &[vec![0, 0, 0], vec![0, 0, 0]]).unwrap();
        let (res, _) = reqment_analysis(&mats).unwrap();
        assert_eq!(missing_cap(&mats, &res).entries, vec![(0, 0), (0, 2), (1, 1)]);
    }

    #[test]
    fn records_keep_sparse_victim_ids() {
        use crate::grid::Coord;
        let victims = vec![
            VictimRecord::new(3, Coord::new(0, 0), vec![1, 0]),
            VictimRecord::new(7, Coord::new(1, 1), vec![1, 1]),
        ];
        let robots = vec![Robot::new(0, Coord::new(2, 2), vec![1, 0])];
        let ctx = CapabilityContext::analyze(CapabilityMatrices::from_records(&victims, &robots).unwrap()).unwrap();
        assert_eq!(ctx.result.l_full, vec![vec![3]]);
        assert_eq!(ctx.result.l_partial, vec![vec![7]]);
        assert_eq!(ctx.unavailable.entries, vec![(7, 1)]);
        assert_eq!(ctx.covered(0, 7), 1);
        assert_eq!(ctx.total(7), 2);
        assert_eq!(ctx.result.potential(7).unwrap(), &[vec![0], vec![]]);
    }
}
