//! Dynamic time warping between feature sequences.
//!
//! Rows of the input matrices are time steps. Paths use the symmetric step
//! set `(+1,+1)`, `(+1,0)`, `(0,+1)` from `(1,1)` to `(n,m)`, optionally
//! restricted to a band around the diagonal and to a maximum number of
//! consecutive non-diagonal steps along one axis.

use crate::error::{Error, Result};
use crate::matrix::Matrix;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DtwConfig {
    /// Band radius `r`: only cells with `|i - j| <= max(r, |n - m|)` are
    /// feasible. `None` leaves the grid unconstrained.
    pub band_radius: Option<usize>,
    /// Longest allowed run of consecutive same-axis non-diagonal steps.
    pub max_run: Option<usize>,
    /// Rank by `distance / (n + m)` rather than the raw distance.
    pub normalize: bool,
}

impl Default for DtwConfig {
    fn default() -> Self {
        Self {
            band_radius: None,
            max_run: None,
            normalize: true,
        }
    }
}

impl DtwConfig {
    pub fn with_band(mut self, r: usize) -> Self {
        self.band_radius = Some(r);
        self
    }

    pub fn with_max_run(mut self, s: usize) -> Self {
        self.max_run = Some(s);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_run == Some(0) {
            return Err(Error::InvalidConfig("max run must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct WarpResult {
    /// Accumulated local distance along the optimal path.
    pub distance: f64,
    /// `distance / (n + m)`.
    pub normalized_distance: f64,
    /// 1-based `(i, j)` pairs from `(1, 1)` to `(n, m)`.
    pub path: Vec<(usize, usize)>,
    /// Grid cells evaluated while filling the cost matrix.
    pub cells_visited: u64,
}

impl WarpResult {
    pub fn score(&self, normalize: bool) -> f64 {
        if normalize {
            self.normalized_distance
        } else {
            self.distance
        }
    }
}

/// Sum of squared per-dimension differences.
pub fn local_distance(q: &[f64], c: &[f64]) -> Result<f64> {
    if q.len() != c.len() {
        return Err(Error::DimensionMismatch {
            expected: q.len(),
            actual: c.len(),
        });
    }
    Ok(sq_dist(q, c))
}

#[inline]
fn sq_dist(q: &[f64], c: &[f64]) -> f64 {
    q.iter().zip(c).map(|(a, b)| (a - b) * (a - b)).sum()
}

/// Aligns `query` against `template` and backtraces one optimal path.
///
/// Ties in the backtrace prefer the diagonal predecessor, then `(i-1, j)`,
/// then `(i, j-1)`.
pub fn dtw_align(query: &Matrix, template: &Matrix, cfg: &DtwConfig) -> Result<WarpResult> {
    let filled = fill(query, template, cfg)?;
    let (n, m) = (query.rows(), template.rows());
    let (distance, path) = filled.backtrace()?;
    Ok(WarpResult {
        distance,
        normalized_distance: distance / (n + m) as f64,
        path,
        cells_visited: filled.cells_visited,
    })
}

/// The `n × m` accumulated-cost matrix; cells outside the band or unreachable
/// under the run-length limit hold `+inf`.
pub fn dtw_cost_matrix(query: &Matrix, template: &Matrix, cfg: &DtwConfig) -> Result<Matrix> {
    let filled = fill(query, template, cfg)?;
    // same error contract as dtw_align
    filled.end_state()?;
    Ok(filled.cell_costs())
}

const DIAG: usize = 0;

/// Filled DP table. With a run limit `S` each cell carries `1 + 2S` states:
/// arrived diagonally (or the origin), arrived after a run of `r` steps in
/// `i` (state `r`), or a run of `r` steps in `j` (state `S + r`). Without a
/// limit there is a single state per cell.
struct Filled {
    n: usize,
    m: usize,
    states: usize,
    max_run: usize,
    acc: Vec<f64>,
    /// Predecessor state per (cell, state); unused when `states == 1`.
    back: Vec<u32>,
    cells_visited: u64,
}

impl Filled {
    #[inline]
    fn idx(&self, i: usize, j: usize, s: usize) -> usize {
        (i * self.m + j) * self.states + s
    }

    fn cell_costs(&self) -> Matrix {
        let mut out = Matrix::zeros(self.n, self.m);
        for i in 0..self.n {
            for j in 0..self.m {
                let base = self.idx(i, j, 0);
                out[(i, j)] = self.acc[base..base + self.states]
                    .iter()
                    .copied()
                    .fold(f64::INFINITY, f64::min);
            }
        }
        out
    }

    /// Best state at `(n, m)`, preferring lower state indices on ties.
    fn end_state(&self) -> Result<(usize, f64)> {
        let base = self.idx(self.n - 1, self.m - 1, 0);
        let (s, cost) = argmin(&self.acc[base..base + self.states]);
        if cost.is_infinite() {
            return Err(Error::InfeasibleConstraints { n: self.n, m: self.m });
        }
        Ok((s, cost))
    }

    fn backtrace(&self) -> Result<(f64, Vec<(usize, usize)>)> {
        let (mut s, distance) = self.end_state()?;
        let (mut i, mut j) = (self.n - 1, self.m - 1);
        let mut path = vec![(i + 1, j + 1)];
        while (i, j) != (0, 0) {
            if self.states == 1 {
                let diag = if i > 0 && j > 0 { self.acc[self.idx(i - 1, j - 1, 0)] } else { f64::INFINITY };
                let vert = if i > 0 { self.acc[self.idx(i - 1, j, 0)] } else { f64::INFINITY };
                let horiz = if j > 0 { self.acc[self.idx(i, j - 1, 0)] } else { f64::INFINITY };
                if diag <= vert && diag <= horiz {
                    (i, j) = (i - 1, j - 1);
                } else if vert <= horiz {
                    i -= 1;
                } else {
                    j -= 1;
                }
            } else {
                let prev = self.back[self.idx(i, j, s)] as usize;
                if s == DIAG {
                    (i, j) = (i - 1, j - 1);
                } else if s <= self.max_run {
                    i -= 1;
                } else {
                    j -= 1;
                }
                s = prev;
            }
            path.push((i + 1, j + 1));
        }
        path.reverse();
        Ok((distance, path))
    }
}

fn argmin(values: &[f64]) -> (usize, f64) {
    let mut best = (0, values[0]);
    for (s, &v) in values.iter().enumerate().skip(1) {
        if v < best.1 {
            best = (s, v);
        }
    }
    best
}

fn fill(query: &Matrix, template: &Matrix, cfg: &DtwConfig) -> Result<Filled> {
    cfg.validate()?;
    let (n, m) = (query.rows(), template.rows());
    if n == 0 || m == 0 {
        return Err(Error::EmptySequence);
    }
    if query.cols() != template.cols() {
        return Err(Error::DimensionMismatch {
            expected: query.cols(),
            actual: template.cols(),
        });
    }
    let width = cfg
        .band_radius
        .map_or(usize::MAX, |r| r.max(n.abs_diff(m)));
    let max_run = cfg.max_run.unwrap_or(0);
    let states = if cfg.max_run.is_some() { 1 + 2 * max_run } else { 1 };

    let mut filled = Filled {
        n,
        m,
        states,
        max_run,
        acc: vec![f64::INFINITY; n * m * states],
        back: if states > 1 { vec![0; n * m * states] } else { Vec::new() },
        cells_visited: 0,
    };

    for i in 0..n {
        let lo = i.saturating_sub(width);
        let hi = i.saturating_add(width).min(m - 1);
        let q = query.row(i);
        for j in lo..=hi {
            filled.cells_visited += 1;
            let d = sq_dist(q, template.row(j));
            if states == 1 {
                relax_single(&mut filled, i, j, d);
            } else {
                relax_runs(&mut filled, i, j, d);
            }
        }
    }
    Ok(filled)
}

fn relax_single(f: &mut Filled, i: usize, j: usize, d: f64) {
    let best = if i == 0 && j == 0 {
        0.0
    } else {
        let mut best = f64::INFINITY;
        if i > 0 && j > 0 {
            best = f.acc[f.idx(i - 1, j - 1, 0)];
        }
        if i > 0 {
            best = best.min(f.acc[f.idx(i - 1, j, 0)]);
        }
        if j > 0 {
            best = best.min(f.acc[f.idx(i, j - 1, 0)]);
        }
        best
    };
    let k = f.idx(i, j, 0);
    f.acc[k] = best + d;
}

fn relax_runs(f: &mut Filled, i: usize, j: usize, d: f64) {
    let s_max = f.max_run;
    if i == 0 && j == 0 {
        let k = f.idx(0, 0, DIAG);
        f.acc[k] = d;
        return;
    }

    if i > 0 && j > 0 {
        let base = f.idx(i - 1, j - 1, 0);
        let (s, cost) = argmin(&f.acc[base..base + f.states]);
        let k = f.idx(i, j, DIAG);
        f.acc[k] = cost + d;
        f.back[k] = s as u32;
    }

    // step in i: continue a vertical run, or start one from diag/horizontal
    if i > 0 {
        let base = f.idx(i - 1, j, 0);
        let (s, cost) = argmin_excluding(&f.acc[base..base + f.states], 1..=s_max);
        let k = f.idx(i, j, 1);
        f.acc[k] = cost + d;
        f.back[k] = s as u32;
        for r in 2..=s_max {
            let k = f.idx(i, j, r);
            f.acc[k] = f.acc[base + r - 1] + d;
            f.back[k] = (r - 1) as u32;
        }
    }

    if j > 0 {
        let base = f.idx(i, j - 1, 0);
        let (s, cost) = argmin_excluding(&f.acc[base..base + f.states], s_max + 1..=2 * s_max);
        let k = f.idx(i, j, s_max + 1);
        f.acc[k] = cost + d;
        f.back[k] = s as u32;
        for r in 2..=s_max {
            let k = f.idx(i, j, s_max + r);
            f.acc[k] = f.acc[base + s_max + r - 1] + d;
            f.back[k] = (s_max + r - 1) as u32;
        }
    }
}

fn argmin_excluding(values: &[f64], skip: std::ops::RangeInclusive<usize>) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (s, &v) in values.iter().enumerate() {
        if !skip.contains(&s) && v < best.1 {
            best = (s, v);
        }
    }
    best
}
