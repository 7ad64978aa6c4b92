//! Rectangular linear assignment with forbidden pairs.
//!
//! The solver returns a maximum-cardinality matching over the allowed pairs
//! and, among those, one with optimal total cost. Internally every entry is a
//! lexicographic pair `(unmatched, value)`: forbidden and padding cells cost
//! one "unmatched" unit, so the Hungarian method over the padded square matrix
//! first minimises the number of unmatched rows and then the value. Among
//! optimal matchings the lexicographically smallest sorted pair list wins.

use std::cmp::Ordering;
use std::ops::{Add, Sub};

use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sense {
    Minimize,
    Maximize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Lex<T> {
    unmatched: i64,
    value: T,
}

impl<T: Scalar> Lex<T> {
    fn zero() -> Self {
        Self {
            unmatched: 0,
            value: T::zero(),
        }
    }

    fn lt(self, other: Self) -> bool {
        matches!(self.cmp_lex(other), Ordering::Less)
    }

    fn cmp_lex(self, other: Self) -> Ordering {
        self.unmatched
            .cmp(&other.unmatched)
            .then_with(|| self.value.partial_cmp(&other.value).unwrap_or(Ordering::Equal))
    }
}

impl<T: Scalar> Add for Lex<T> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self {
            unmatched: self.unmatched + rhs.unmatched,
            value: self.value + rhs.value,
        }
    }
}

impl<T: Scalar> Sub for Lex<T> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self {
            unmatched: self.unmatched - rhs.unmatched,
            value: self.value - rhs.value,
        }
    }
}

/// Hungarian method (shortest augmenting paths with potentials) on the square
/// padding of a `rows x cols` problem. `cost(i, j)` is `None` for forbidden
/// pairs and already sign-adjusted for minimisation. Returns the column of
/// each row (if matched on an allowed pair), the matching size and value.
fn hungarian<T: Scalar>(
    rows: usize,
    cols: usize,
    cost: impl Fn(usize, usize) -> Option<T>,
) -> (Vec<Option<usize>>, usize, T) {
    let n = rows.max(cols);
    if n == 0 || rows == 0 || cols == 0 {
        return (vec![None; rows], 0, T::zero());
    }
    let miss = Lex {
        unmatched: 1,
        value: T::zero(),
    };
    let a: Vec<Lex<T>> = (0..n * n)
        .map(|k| {
            let (i, j) = (k / n, k % n);
            if i < rows && j < cols {
                cost(i, j).map_or(miss, |value| Lex { unmatched: 0, value })
            } else {
                miss
            }
        })
        .collect();

    let mut u = vec![Lex::zero(); n + 1];
    let mut v = vec![Lex::zero(); n + 1];
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv: Vec<Option<Lex<T>>> = vec![None; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta: Option<Lex<T>> = None;
            let mut j1 = 0;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = a[(i0 - 1) * n + (j - 1)] - u[i0] - v[j];
                if minv[j].is_none_or(|m| cur.lt(m)) {
                    minv[j] = Some(cur);
                    way[j] = j0;
                }
                let mj = minv[j].expect("set above");
                if delta.is_none_or(|d| mj.lt(d)) {
                    delta = Some(mj);
                    j1 = j;
                }
            }
            let delta = delta.expect("an unused column remains");
            for j in 0..=n {
                if used[j] {
                    u[p[j]] = u[p[j]] + delta;
                    v[j] = v[j] - delta;
                } else if let Some(m) = minv[j] {
                    minv[j] = Some(m - delta);
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut assignment = vec![None; rows];
    let mut size = 0;
    let mut total = T::zero();
    for j in 1..=n {
        let i = p[j];
        if i == 0 || i > rows || j > cols {
            continue;
        }
        if let Some(c) = cost(i - 1, j - 1) {
            assignment[i - 1] = Some(j - 1);
            size += 1;
            total = total + c;
        }
    }
    (assignment, size, total)
}

/// Optimal one-to-one matching of rows to columns avoiding `skip`ped pairs.
/// The result is sorted by row and has maximum possible cardinality.
pub fn solve_linear_assignment<T: Scalar>(
    cost: &[Vec<T>],
    sense: Sense,
    skip: impl Fn(usize, usize) -> bool,
) -> Vec<(usize, usize)> {
    let rows = cost.len();
    let cols = cost.first().map_or(0, Vec::len);
    debug_assert!(cost.iter().all(|r| r.len() == cols), "ragged cost matrix");
    if rows == 0 || cols == 0 {
        return Vec::new();
    }
    let signed = |r: usize, c: usize| -> Option<T> {
        if skip(r, c) {
            return None;
        }
        Some(match sense {
            Sense::Minimize => cost[r][c],
            Sense::Maximize => T::zero() - cost[r][c],
        })
    };

    let (first, best_size, best_value) = hungarian(rows, cols, signed);
    let optimal = |size: usize, value: T| size == best_size && value.approx_eq(best_value);

    // Fix rows in ascending order to the smallest column that still admits an
    // optimal completion over the rows below. While every decision so far
    // agrees with the first solution, that solution itself is such a
    // completion for its own choice.
    let mut open_cols: Vec<usize> = (0..cols).collect();
    let mut fixed = Vec::with_capacity(best_size);
    let (mut size, mut value) = (0usize, T::zero());
    let mut follows_first = true;
    for r in 0..rows {
        let rest: Vec<usize> = (r + 1..rows).collect();
        let mut choice = None;
        for (slot, &c) in open_cols.iter().enumerate() {
            let Some(here) = signed(r, c) else { continue };
            if follows_first && first[r] == Some(c) {
                choice = Some((slot, c, here));
                break;
            }
            let cols_left: Vec<usize> = open_cols.iter().copied().filter(|&x| x != c).collect();
            let (_, s, v) = hungarian(rest.len(), cols_left.len(), |i, j| signed(rest[i], cols_left[j]));
            if optimal(size + 1 + s, value + here + v) {
                choice = Some((slot, c, here));
                break;
            }
        }
        follows_first &= choice.map(|(_, c, _)| c) == first[r];
        if let Some((slot, c, here)) = choice {
            open_cols.remove(slot);
            fixed.push((r, c));
            size += 1;
            value = value + here;
        }
    }
    fixed
}

/// Objective value of a matching.
pub fn matching_value<T: Scalar>(cost: &[Vec<T>], pairs: &[(usize, usize)]) -> T {
    pairs.iter().fold(T::zero(), |acc, &(r, c)| acc + cost[r][c])
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::Rational64;

    fn never(_: usize, _: usize) -> bool {
        false
    }

    #[test]
    fn small_minimisation() {
        let cost = vec![vec![1.0, 2.0], vec![2.0, 4.0]];
        let m = solve_linear_assignment(&cost, Sense::Minimize, never);
        assert_eq!(m, vec![(0, 1), (1, 0)]);
        assert_eq!(matching_value(&cost, &m), 4.0);
    }

    #[test]
    fn dominant_diagonal_maximisation() {
        let cost = vec![vec![9.0, 1.0, 2.0], vec![0.5, 8.0, 1.0], vec![2.0, 3.0, 7.0]];
        assert_eq!(
            solve_linear_assignment(&cost, Sense::Maximize, never),
            vec![(0, 0), (1, 1), (2, 2)]
        );
    }

    #[test]
    fn empty_input() {
        let cost: Vec<Vec<f64>> = Vec::new();
        assert!(solve_linear_assignment(&cost, Sense::Minimize, never).is_empty());
        let cost: Vec<Vec<f64>> = vec![Vec::new(); 3];
        assert!(solve_linear_assignment(&cost, Sense::Minimize, never).is_empty());
    }

    #[test]
    fn rectangular_in_both_orientations() {
        let wide = vec![vec![5.0, 1.0, 3.0], vec![2.0, 9.0, 1.0]];
        assert_eq!(solve_linear_assignment(&wide, Sense::Minimize, never), vec![(0, 1), (1, 2)]);
        let tall = vec![vec![5.0, 1.0], vec![2.0, 9.0], vec![1.0, 3.0]];
        assert_eq!(solve_linear_assignment(&tall, Sense::Minimize, never), vec![(0, 1), (2, 0)]);
    }

    #[test]
    fn skipped_pairs_are_avoided_but_cardinality_is_kept() {
        let cost = vec![vec![10.0, 1.0], vec![1.0, 0.0]];
        let skip = |r: usize, c: usize| r == 1 && c == 1;
        assert_eq!(solve_linear_assignment(&cost, Sense::Maximize, skip), vec![(0, 1), (1, 0)]);
        let all_skipped = |_: usize, _: usize| true;
        assert!(solve_linear_assignment(&cost, Sense::Maximize, all_skipped).is_empty());
    }

    #[test]
    fn ties_resolve_to_lexicographically_smallest() {
        let flat = vec![vec![1.0; 3]; 3];
        assert_eq!(
            solve_linear_assignment(&flat, Sense::Minimize, never),
            vec![(0, 0), (1, 1), (2, 2)]
        );
        let cost = vec![vec![2.0, 1.0, 1.0], vec![1.0, 2.0, 2.0]];
        assert_eq!(solve_linear_assignment(&cost, Sense::Minimize, never), vec![(0, 1), (1, 0)]);
        // Two rows competing for one allowed column: row 0 keeps it.
        let narrow = vec![vec![3.0], vec![3.0]];
        assert_eq!(solve_linear_assignment(&narrow, Sense::Maximize, never), vec![(0, 0)]);
    }

    #[test]
    fn exact_scalars() {
        let r = |n: i64, d: i64| Rational64::new(n, d);
        let cost = vec![vec![r(1, 3), r(1, 2)], vec![r(1, 2), r(2, 3)]];
        let m = solve_linear_assignment(&cost, Sense::Maximize, never);
        // 1/3 + 2/3 == 1/2 + 1/2, the tie goes to the diagonal
        assert_eq!(m, vec![(0, 0), (1, 1)]);
    }
}
