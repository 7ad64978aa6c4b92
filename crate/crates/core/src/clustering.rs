//! K-means clustering of victim locations and the obstacle-aware cluster plan.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grid::{bfs_distances, manhattan, Coord, GridMap};
use crate::model::{VictimId, VictimRecord};
use crate::scalar::Scalar;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ClusterError {
    #[error("cannot cluster an empty victim list")]
    NoVictims,
    #[error("requested {k} clusters for {points} victims")]
    TooManyClusters { k: usize, points: usize },
    #[error("cluster count must be at least 1")]
    ZeroClusters,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KMeansOptions {
    /// Independent k-means++ initialisations; the lowest-SSE run is kept.
    pub restarts: usize,
    pub max_iterations: usize,
}

impl Default for KMeansOptions {
    fn default() -> Self {
        Self {
            restarts: 1,
            max_iterations: 300,
        }
    }
}

/// Lloyd's algorithm output before the means are snapped onto the map.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KMeans<T> {
    /// Cluster index per input victim, in input order.
    pub assignments: Vec<usize>,
    /// Real-valued (row, col) mean per cluster.
    pub means: Vec<(T, T)>,
    pub sse: T,
    pub iterations: usize,
}

/// Clustering with navigable centers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Clustering<T> {
    pub k: usize,
    pub victim_ids: Vec<VictimId>,
    pub assignments: Vec<usize>,
    pub means: Vec<(T, T)>,
    /// Free cell nearest (Manhattan) to each mean, ties by (row, col).
    pub centers: Vec<Coord>,
    pub sse: T,
}

impl<T: Scalar> Clustering<T> {
    pub fn cluster_of(&self, victim: VictimId) -> Option<usize> {
        let i = self.victim_ids.iter().position(|&v| v == victim)?;
        Some(self.assignments[i])
    }

    pub fn members(&self, cluster: usize) -> impl Iterator<Item = VictimId> + '_ {
        self.victim_ids
            .iter()
            .zip(&self.assignments)
            .filter(move |(_, &c)| c == cluster)
            .map(|(&v, _)| v)
    }
}

fn point<T: Scalar>(c: Coord) -> (T, T) {
    (T::from_count(c.row), T::from_count(c.col))
}

pub(crate) fn sq_dist<T: Scalar>(a: (T, T), b: (T, T)) -> T {
    let dr = a.0 - b.0;
    let dc = a.1 - b.1;
    dr * dr + dc * dc
}

/// Within-cluster sum of squared distances to the member means.
pub fn partition_sse<T: Scalar>(points: &[Coord], assignments: &[usize], k: usize) -> T {
    let means = cluster_means::<T>(points, assignments, k, &vec![(T::zero(), T::zero()); k]);
    points
        .iter()
        .zip(assignments)
        .fold(T::zero(), |acc, (&p, &c)| acc + sq_dist(point(p), means[c]))
}

fn cluster_means<T: Scalar>(points: &[Coord], assignments: &[usize], k: usize, fallback: &[(T, T)]) -> Vec<(T, T)> {
    let mut sums = vec![(T::zero(), T::zero()); k];
    let mut counts = vec![0usize; k];
    for (&p, &c) in points.iter().zip(assignments) {
        let (r, col) = point::<T>(p);
        sums[c].0 = sums[c].0 + r;
        sums[c].1 = sums[c].1 + col;
        counts[c] += 1;
    }
    (0..k)
        .map(|c| {
            if counts[c] == 0 {
                fallback[c]
            } else {
                let n = T::from_count(counts[c]);
                (sums[c].0 / n, sums[c].1 / n)
            }
        })
        .collect()
}

fn nearest<T: Scalar>(p: (T, T), means: &[(T, T)]) -> usize {
    let mut best = 0;
    let mut best_d = sq_dist(p, means[0]);
    for (c, &m) in means.iter().enumerate().skip(1) {
        let d = sq_dist(p, m);
        if d < best_d {
            best = c;
            best_d = d;
        }
    }
    best
}

/// k-means++ seeding: first center uniform, then proportional to the squared
/// distance to the closest chosen center.
fn seed_centers<T: Scalar>(points: &[(T, T)], k: usize, rng: &mut ChaCha8Rng) -> Vec<(T, T)> {
    let mut centers = vec![points[rng.random_range(0..points.len())]];
    while centers.len() < k {
        let weights: Vec<f64> = points
            .iter()
            .map(|&p| {
                centers
                    .iter()
                    .map(|&c| sq_dist(p, c).to_real())
                    .fold(f64::INFINITY, f64::min)
            })
            .collect();
        let total: f64 = weights.iter().sum();
        let pick = if total > 0.0 {
            let mut target = rng.random::<f64>() * total;
            let mut chosen = weights.iter().rposition(|&w| w > 0.0).unwrap_or(0);
            for (i, &w) in weights.iter().enumerate() {
                if w > 0.0 && target < w {
                    chosen = i;
                    break;
                }
                target -= w;
            }
            chosen
        } else {
            rng.random_range(0..points.len())
        };
        centers.push(points[pick]);
    }
    centers
}

fn lloyd<T: Scalar>(
    coords: &[Coord],
    points: &[(T, T)],
    mut means: Vec<(T, T)>,
    max_iterations: usize,
) -> KMeans<T> {
    let k = means.len();
    let mut assignments: Vec<usize> = Vec::new();
    let mut iterations = 0;
    loop {
        let mut next: Vec<usize> = points.iter().map(|&p| nearest(p, &means)).collect();

        // Re-seed empty clusters with the point farthest from its own center,
        // taken from a cluster that keeps at least one member.
        let mut sizes = vec![0usize; k];
        for &c in &next {
            sizes[c] += 1;
        }
        for empty in 0..k {
            if sizes[empty] > 0 {
                continue;
            }
            let mut donor: Option<(usize, T)> = None;
            for (i, &p) in points.iter().enumerate() {
                if sizes[next[i]] < 2 {
                    continue;
                }
                let d = sq_dist(p, means[next[i]]);
                if donor.is_none_or(|(_, best)| d > best) {
                    donor = Some((i, d));
                }
            }
            let (i, _) = donor.expect("k <= number of points leaves a donor");
            sizes[next[i]] -= 1;
            next[i] = empty;
            sizes[empty] = 1;
            means[empty] = points[i];
        }

        let converged = next == assignments;
        assignments = next;
        if converged || iterations >= max_iterations {
            break;
        }
        means = cluster_means(coords, &assignments, k, &means);
        iterations += 1;
    }
    let sse = points
        .iter()
        .zip(&assignments)
        .fold(T::zero(), |acc, (&p, &c)| acc + sq_dist(p, means[c]));
    KMeans {
        assignments,
        means,
        sse,
        iterations,
    }
}

/// Clusters victim locations into `k` groups using squared Euclidean distance
/// on (row, col), k-means++ seeding from `seed`, and Lloyd iterations until the
/// assignment is stable.
pub fn kmeans<T: Scalar>(victims: &[VictimRecord], k: usize, seed: u64) -> Result<KMeans<T>, ClusterError> {
    kmeans_with(victims, k, seed, &KMeansOptions::default())
}

pub fn kmeans_with<T: Scalar>(
    victims: &[VictimRecord],
    k: usize,
    seed: u64,
    options: &KMeansOptions,
) -> Result<KMeans<T>, ClusterError> {
    let coords: Vec<Coord> = victims.iter().map(|v| v.location).collect();
    kmeans_points(&coords, k, seed, options)
}

pub fn kmeans_points<T: Scalar>(
    coords: &[Coord],
    k: usize,
    seed: u64,
    options: &KMeansOptions,
) -> Result<KMeans<T>, ClusterError> {
    if coords.is_empty() {
        return Err(ClusterError::NoVictims);
    }
    if k == 0 {
        return Err(ClusterError::ZeroClusters);
    }
    if k > coords.len() {
        return Err(ClusterError::TooManyClusters {
            k,
            points: coords.len(),
        });
    }
    let points: Vec<(T, T)> = coords.iter().map(|&c| point(c)).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<KMeans<T>> = None;
    for _ in 0..options.restarts.max(1) {
        let init = seed_centers(&points, k, &mut rng);
        let run = lloyd(coords, &points, init, options.max_iterations);
        if best.as_ref().is_none_or(|b| run.sse.definitely_lt(b.sse)) {
            best = Some(run);
        }
    }
    Ok(best.expect("at least one restart"))
}

/// Nearest free cell to a real-valued point by Manhattan distance, ties by
/// (row, col). `None` only for a map without free cells.
pub fn snap_to_free<T: Scalar>(map: &GridMap, at: (T, T)) -> Option<Coord> {
    let mut best: Option<(Coord, T)> = None;
    for cell in map.free_cells() {
        let (r, c) = point::<T>(cell);
        let d = r.abs_diff(at.0) + c.abs_diff(at.1);
        if best.is_none_or(|(_, bd)| d < bd) {
            best = Some((cell, d));
        }
    }
    best.map(|(c, _)| c)
}

impl<T: Scalar> KMeans<T> {
    /// Attaches navigable centers. `victims` must be the list that was
    /// clustered.
    pub fn snap(self, map: &GridMap, victims: &[VictimRecord]) -> Clustering<T> {
        let centers = self
            .means
            .iter()
            .map(|&m| snap_to_free(map, m).expect("map has a free cell"))
            .collect();
        Clustering {
            k: self.means.len(),
            victim_ids: victims.iter().map(|v| v.id).collect(),
            assignments: self.assignments,
            means: self.means,
            centers,
            sse: self.sse,
        }
    }
}

/// Per-cluster service order and the victims held back because obstacles
/// lengthen the trip from their cluster center.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClusterPlan {
    /// Surviving victims per cluster, by (Manhattan distance to center, ID).
    pub ordered: Vec<Vec<VictimId>>,
    pub excluded: Vec<VictimId>,
}

impl ClusterPlan {
    pub fn is_excluded(&self, victim: VictimId) -> bool {
        self.excluded.binary_search(&victim).is_ok()
    }
}

/// A victim is excluded when the obstacle-aware distance from its cluster
/// center exceeds the empty-grid (Manhattan) distance, or when the center
/// cannot reach it at all.
pub fn obstacle_filter<T: Scalar>(map: &GridMap, clustering: &Clustering<T>, victims: &[VictimRecord]) -> ClusterPlan {
    let fields: Vec<Vec<Option<usize>>> = clustering
        .centers
        .iter()
        .map(|&c| bfs_distances(map, c).expect("centers are free cells"))
        .collect();
    let mut ordered: Vec<Vec<(usize, VictimId)>> = vec![Vec::new(); clustering.k];
    let mut excluded = Vec::new();
    for (v, &c) in victims.iter().zip(&clustering.assignments) {
        let center = clustering.centers[c];
        let direct = manhattan(center, v.location);
        match fields[c][map.index(v.location)] {
            Some(d) if d <= direct => ordered[c].push((direct, v.id)),
            _ => excluded.push(v.id),
        }
    }
    excluded.sort_unstable();
    ClusterPlan {
        ordered: ordered
            .into_iter()
            .map(|mut members| {
                members.sort_unstable();
                members.into_iter().map(|(_, id)| id).collect()
            })
            .collect(),
        excluded,
    }
}
