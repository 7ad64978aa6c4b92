//! Occupancy grid, coordinates and distance primitives.
//!
//! The grid is 4-connected. Map files use one character per cell: `.` for a
//! free cell and `#` for an obstacle, one row per line.

use std::collections::VecDeque;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GridError {
    #[error("map has no cells")]
    Empty,
    #[error("row {row} has {found} cells, expected {expected}")]
    RaggedRow {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("unknown map character {ch:?} at row {row}, column {col}")]
    UnknownChar { row: usize, col: usize, ch: char },
    #[error("cell {0} lies outside the map")]
    OutOfBounds(Coord),
    #[error("cell {0} is an obstacle")]
    NotFree(Coord),
}

/// A cell address. Serialized as a `[row, col]` pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(from = "(usize, usize)", into = "(usize, usize)")]
pub struct Coord {
    pub row: usize,
    pub col: usize,
}

impl Coord {
    pub const fn new(row: usize, col: usize) -> Self {
        Self { row, col }
    }
}

impl From<(usize, usize)> for Coord {
    fn from((row, col): (usize, usize)) -> Self {
        Self { row, col }
    }
}

impl From<Coord> for (usize, usize) {
    fn from(c: Coord) -> Self {
        (c.row, c.col)
    }
}

impl fmt::Display for Coord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.row, self.col)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Cell {
    Free,
    Obstacle,
}

/// Immutable 2D occupancy grid stored row-major.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GridMap {
    width: usize,
    height: usize,
    cells: Vec<Cell>,
}

impl GridMap {
    /// An all-free map. Panics on a zero dimension.
    pub fn empty(width: usize, height: usize) -> Self {
        assert!(width > 0 && height > 0, "map dimensions must be positive");
        Self {
            width,
            height,
            cells: vec![Cell::Free; width * height],
        }
    }

    pub fn from_cells(width: usize, height: usize, cells: Vec<Cell>) -> Result<Self, GridError> {
        if width == 0 || height == 0 {
            return Err(GridError::Empty);
        }
        assert_eq!(cells.len(), width * height, "cell buffer does not match dimensions");
        Ok(Self {
            width,
            height,
            cells,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn in_bounds(&self, c: Coord) -> bool {
        c.row < self.height && c.col < self.width
    }

    #[inline]
    pub fn index(&self, c: Coord) -> usize {
        c.row * self.width + c.col
    }

    #[inline]
    pub fn coord(&self, index: usize) -> Coord {
        Coord::new(index / self.width, index % self.width)
    }

    pub fn cell(&self, c: Coord) -> Option<Cell> {
        self.in_bounds(c).then(|| self.cells[self.index(c)])
    }

    #[inline]
    pub fn is_free(&self, c: Coord) -> bool {
        self.in_bounds(c) && self.cells[self.index(c)] == Cell::Free
    }

    pub fn set(&mut self, c: Coord, cell: Cell) {
        let i = self.index(c);
        self.cells[i] = cell;
    }

    /// Free-cell check that reports why a coordinate is unusable.
    pub fn require_free(&self, c: Coord) -> Result<(), GridError> {
        if !self.in_bounds(c) {
            Err(GridError::OutOfBounds(c))
        } else if !self.is_free(c) {
            Err(GridError::NotFree(c))
        } else {
            Ok(())
        }
    }

    /// The in-bounds 4-neighbours of `c` in the fixed order up, down, left,
    /// right. Obstacles are included; filter with [`GridMap::is_free`].
    pub fn neighbors(&self, c: Coord) -> impl Iterator<Item = Coord> {
        let (h, w) = (self.height, self.width);
        let up = (c.row > 0).then(|| Coord::new(c.row - 1, c.col));
        let down = (c.row + 1 < h).then(|| Coord::new(c.row + 1, c.col));
        let left = (c.col > 0).then(|| Coord::new(c.row, c.col - 1));
        let right = (c.col + 1 < w).then(|| Coord::new(c.row, c.col + 1));
        [up, down, left, right].into_iter().flatten()
    }

    pub fn free_neighbors(&self, c: Coord) -> impl Iterator<Item = Coord> + '_ {
        self.neighbors(c).filter(move |&n| self.is_free(n))
    }

    pub fn free_cells(&self) -> impl Iterator<Item = Coord> + '_ {
        (0..self.cells.len())
            .filter(move |&i| self.cells[i] == Cell::Free)
            .map(move |i| self.coord(i))
    }

    pub fn free_count(&self) -> usize {
        self.cells.iter().filter(|&&c| c == Cell::Free).count()
    }

    pub fn obstacle_count(&self) -> usize {
        self.cells.len() - self.free_count()
    }

    /// Serializes back to the map file format, newline-terminated.
    pub fn to_text(&self) -> String {
        let mut out = String::with_capacity((self.width + 1) * self.height);
        for row in 0..self.height {
            for col in 0..self.width {
                out.push(match self.cells[row * self.width + col] {
                    Cell::Free => '.',
                    Cell::Obstacle => '#',
                });
            }
            out.push('\n');
        }
        out
    }
}

impl std::str::FromStr for GridMap {
    type Err = GridError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        load_map(s)
    }
}

/// Parses map text. Rows must have equal length; a single trailing newline
/// (and `\r\n` line endings) are accepted.
pub fn load_map(source: &str) -> Result<GridMap, GridError> {
    let body = source.strip_suffix('\n').unwrap_or(source);
    if body.is_empty() {
        return Err(GridError::Empty);
    }
    let mut width = None;
    let mut cells = Vec::new();
    let mut height = 0;
    for (row, line) in body.split('\n').enumerate() {
        let line = line.strip_suffix('\r').unwrap_or(line);
        let mut count = 0;
        for (col, ch) in line.chars().enumerate() {
            cells.push(match ch {
                '.' => Cell::Free,
                '#' => Cell::Obstacle,
                _ => return Err(GridError::UnknownChar { row, col, ch }),
            });
            count += 1;
        }
        match width {
            None => width = Some(count),
            Some(expected) if expected != count => {
                return Err(GridError::RaggedRow {
                    row,
                    expected,
                    found: count,
                })
            }
            Some(_) => {}
        }
        height += 1;
    }
    let width = width.unwrap_or(0);
    GridMap::from_cells(width, height, cells)
}

#[inline]
pub fn manhattan(a: Coord, b: Coord) -> usize {
    a.row.abs_diff(b.row) + a.col.abs_diff(b.col)
}

#[inline]
pub fn chebyshev(a: Coord, b: Coord) -> usize {
    a.row.abs_diff(b.row).max(a.col.abs_diff(b.col))
}

/// Breadth-first distances from `start` to every cell; `None` marks
/// obstacles and unreachable cells.
pub fn bfs_distances(map: &GridMap, start: Coord) -> Result<Vec<Option<usize>>, GridError> {
    map.require_free(start)?;
    let mut dist = vec![None; map.len()];
    let mut queue = VecDeque::new();
    dist[map.index(start)] = Some(0);
    queue.push_back(start);
    while let Some(c) = queue.pop_front() {
        let d = dist[map.index(c)].expect("queued cells have a distance");
        for n in map.free_neighbors(c) {
            let slot = &mut dist[map.index(n)];
            if slot.is_none() {
                *slot = Some(d + 1);
                queue.push_back(n);
            }
        }
    }
    Ok(dist)
}

/// Shortest 4-connected obstacle-avoiding path length, or `Ok(None)` when the
/// goal cannot be reached.
pub fn bfs_shortest_path(map: &GridMap, start: Coord, goal: Coord) -> Result<Option<usize>, GridError> {
    map.require_free(goal)?;
    Ok(bfs_distances(map, start)?[map.index(goal)])
}

/// Whether every free cell is reachable from every other free cell.
pub fn is_connected(map: &GridMap) -> bool {
    let Some(first) = map.free_cells().next() else {
        return true;
    };
    let dist = bfs_distances(map, first).expect("first free cell is free");
    dist.iter().filter(|d| d.is_some()).count() == map.free_count()
}

/// Cells visited by an integer (Bresenham) line between the centers of `from`
/// and `to`, both endpoints included.
pub fn line_cells(from: Coord, to: Coord) -> Vec<Coord> {
    let (mut r, mut c) = (from.row as i64, from.col as i64);
    let (r1, c1) = (to.row as i64, to.col as i64);
    let dr = (r1 - r).abs();
    let dc = (c1 - c).abs();
    let sr = if r1 >= r { 1 } else { -1 };
    let sc = if c1 >= c { 1 } else { -1 };
    let mut err = dc - dr;
    let mut out = Vec::with_capacity((dr.max(dc) + 1) as usize);
    loop {
        out.push(Coord::new(r as usize, c as usize));
        if r == r1 && c == c1 {
            break;
        }
        let e2 = 2 * err;
        if e2 > -dr {
            err -= dr;
            c += sc;
        }
        if e2 < dc {
            err += dc;
            r += sr;
        }
    }
    out
}

/// True iff the discretized segment from `from` to `to` crosses no obstacle.
pub fn line_of_sight(map: &GridMap, from: Coord, to: Coord) -> bool {
    if !map.in_bounds(to) {
        return false;
    }
    line_cells(from, to).into_iter().all(|c| map.is_free(c))
}
