//! Fixed-radius pair enumeration and the edge power sum of the random
//! geometric graph.
//!
//! Points are hashed into a cell list with side at least `r`, so only the
//! 3^d surrounding cells of a point can contain its graph neighbours. Cells
//! are stored in counting-sort layout (one offsets array, one index array)
//! and visited in a fixed canonical order, which keeps the summation order,
//! and hence the floating-point result, identical from run to run.

use crate::error::{Error, Result};
use crate::geom::PointCloud;

/// Hard cap on the total number of grid cells; above it the cell side is
/// doubled until the grid fits. Cells only ever get coarser than `r`, which
/// preserves correctness.
const MAX_CELLS: usize = 1 << 22;

/// An unordered pair of point indices (`i < j`) at Euclidean distance
/// `dist <= r`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pair {
    pub i: usize,
    pub j: usize,
    pub dist: f64,
}

/// The edge list of the random geometric graph at radius `r`.
#[derive(Debug, Clone, Default)]
pub struct PairList {
    pub entries: Vec<Pair>,
}

impl PairList {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

struct CellGrid {
    ncells: Vec<usize>,
    strides: Vec<usize>,
    /// Prefix offsets into `point_ids`, one slot per cell plus a sentinel.
    offsets: Vec<u32>,
    /// Point indices sorted by cell, original order preserved within a cell.
    point_ids: Vec<u32>,
}

impl CellGrid {
    fn build(cloud: &PointCloud, r: f64) -> CellGrid {
        let d = cloud.dim();
        let n = cloud.len();
        let mut mins = vec![f64::INFINITY; d];
        let mut maxs = vec![f64::NEG_INFINITY; d];
        for p in cloud.iter_points() {
            for (a, &x) in p.iter().enumerate() {
                mins[a] = mins[a].min(x);
                maxs[a] = maxs[a].max(x);
            }
        }
        if n == 0 {
            mins = vec![0.0; d];
            maxs = vec![0.0; d];
        }

        // Cell side = r, coarsened if the grid would not fit the cap.
        let mut side = r;
        let mut ncells: Vec<usize>;
        loop {
            ncells = (0..d)
                .map(|a| ((maxs[a] - mins[a]) / side).floor() as usize + 1)
                .collect();
            let total: usize = ncells.iter().try_fold(1usize, |acc, &c| acc.checked_mul(c)).unwrap_or(usize::MAX);
            if total <= MAX_CELLS {
                break;
            }
            side *= 2.0;
        }
        let total: usize = ncells.iter().product();
        let mut strides = vec![1usize; d];
        for a in (0..d.saturating_sub(1)).rev() {
            strides[a] = strides[a + 1] * ncells[a + 1];
        }

        let grid_cell = |p: &[f64]| -> usize {
            let mut id = 0usize;
            for a in 0..d {
                let mut c = ((p[a] - mins[a]) / side) as usize;
                if c >= ncells[a] {
                    c = ncells[a] - 1;
                }
                id += c * strides[a];
            }
            id
        };

        // Counting sort of point indices by cell.
        let mut counts = vec![0u32; total + 1];
        let cell_of: Vec<u32> = cloud.iter_points().map(|p| grid_cell(p) as u32).collect();
        for &c in &cell_of {
            counts[c as usize + 1] += 1;
        }
        for i in 0..total {
            counts[i + 1] += counts[i];
        }
        let offsets = counts.clone();
        let mut cursor = counts;
        let mut point_ids = vec![0u32; n];
        for (i, &c) in cell_of.iter().enumerate() {
            point_ids[cursor[c as usize] as usize] = i as u32;
            cursor[c as usize] += 1;
        }

        CellGrid {
            ncells,
            strides,
            offsets,
            point_ids,
        }
    }

    fn cell_points(&self, cell: usize) -> &[u32] {
        &self.point_ids[self.offsets[cell] as usize..self.offsets[cell + 1] as usize]
    }

    fn decode(&self, cell: usize) -> Vec<usize> {
        let mut rem = cell;
        self.strides
            .iter()
            .map(|&s| {
                let c = rem / s;
                rem %= s;
                c
            })
            .collect()
    }
}

/// The forward half of the 3^d - 1 neighbour offsets: those whose first
/// nonzero component is positive. Visiting only these from each cell yields
/// every unordered cell pair exactly once.
fn forward_offsets(d: usize) -> Vec<Vec<i64>> {
    let mut out = Vec::new();
    let total = 3usize.pow(d as u32);
    for code in 0..total {
        let mut rem = code;
        let mut offset = vec![0i64; d];
        for a in (0..d).rev() {
            offset[a] = (rem % 3) as i64 - 1;
            rem /= 3;
        }
        if offset.iter().find(|&&v| v != 0).is_some_and(|&v| v > 0) {
            out.push(offset);
        }
    }
    out
}

#[inline]
fn dist_sq(p: &[f64], q: &[f64]) -> f64 {
    p.iter().zip(q).map(|(&a, &b)| (a - b) * (a - b)).sum()
}

/// Visits every unordered pair at squared distance `<= r2`, grouped by cell
/// and in a fixed order. The callback receives `(i, j, dist_sq)` with
/// `i < j`.
fn for_each_close_pair<F>(cloud: &PointCloud, r: f64, mut visit: F)
where
    F: FnMut(usize, usize, f64),
{
    let r2 = r * r;
    let grid = CellGrid::build(cloud, r);
    let d = cloud.dim();
    let offsets = forward_offsets(d);

    // Walk runs of occupied cells through the sorted index array.
    let n = grid.point_ids.len();
    let mut run_start = 0usize;
    while run_start < n {
        let first = grid.point_ids[run_start] as usize;
        // Recover the cell id of this run by binary search over offsets.
        let cell = grid
            .offsets
            .partition_point(|&o| (o as usize) <= run_start)
            - 1;
        let members = grid.cell_points(cell);
        debug_assert_eq!(members[0] as usize, first);

        // Pairs within the cell.
        for (a, &pi) in members.iter().enumerate() {
            let p = cloud.point(pi as usize);
            for &pj in &members[a + 1..] {
                let q = cloud.point(pj as usize);
                let d2 = dist_sq(p, q);
                if d2 <= r2 {
                    let (i, j) = order(pi as usize, pj as usize);
                    visit(i, j, d2);
                }
            }
        }

        // Pairs with the forward-neighbour cells.
        let coords = grid.decode(cell);
        'offsets: for off in &offsets {
            let mut neighbor = 0usize;
            for a in 0..d {
                let c = coords[a] as i64 + off[a];
                if c < 0 || c >= grid.ncells[a] as i64 {
                    continue 'offsets;
                }
                neighbor += c as usize * grid.strides[a];
            }
            let others = grid.cell_points(neighbor);
            if others.is_empty() {
                continue;
            }
            for &pi in members {
                let p = cloud.point(pi as usize);
                for &pj in others {
                    let q = cloud.point(pj as usize);
                    let d2 = dist_sq(p, q);
                    if d2 <= r2 {
                        let (i, j) = order(pi as usize, pj as usize);
                        visit(i, j, d2);
                    }
                }
            }
        }

        run_start += members.len();
    }
}

#[inline]
fn order(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

/// Enumerates exactly the unordered point pairs at Euclidean distance
/// `<= r` (inclusive, compared on squared distances).
pub fn enumerate_close_pairs(cloud: &PointCloud, r: f64) -> Result<PairList> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "radius must be positive and finite, got {r}"
        )));
    }
    let mut entries = Vec::new();
    for_each_close_pair(cloud, r, |i, j, d2| {
        entries.push(Pair {
            i,
            j,
            dist: d2.sqrt(),
        });
    });
    Ok(PairList { entries })
}

/// `dist^beta` with the conventions of the edge statistic: repeated
/// multiplication for small integer exponents, `exp(beta ln dist)`
/// otherwise. The caller has already excluded `dist = 0`.
#[inline]
fn pow_beta(dist_sq: f64, beta: f64) -> f64 {
    if beta == 0.0 {
        return 1.0;
    }
    let half = beta / 2.0;
    if half == half.trunc() && half.abs() <= 16.0 {
        // even beta: integer power of the squared distance, no sqrt needed
        dist_sq.powi(half as i32)
    } else if beta == beta.trunc() && beta.abs() <= 16.0 {
        dist_sq.sqrt().powi(beta as i32)
    } else {
        (half * dist_sq.ln()).exp()
    }
}

/// Sum of `dist^beta` over all unordered pairs at distance `<= r`; returns
/// the edge count for `beta = 0` and 0 when the graph has no edges.
///
/// `beta` must exceed `-d` (the statistic range for testing is narrower,
/// `beta > -d/2`, but the mean formulas need the wider range). A
/// zero-distance pair is an error for negative `beta`, contributes 1 for
/// `beta = 0` and 0 for positive `beta`.
pub fn edge_power_sum(cloud: &PointCloud, r: f64, beta: f64) -> Result<f64> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "radius must be positive and finite, got {r}"
        )));
    }
    let d = cloud.dim() as f64;
    if !(beta > -d) {
        return Err(Error::BetaOutOfRange { beta, min: -d });
    }
    let mut duplicate: Option<(usize, usize)> = None;
    let mut total = 0.0f64;
    for_each_close_pair(cloud, r, |i, j, d2| {
        if d2 == 0.0 {
            if beta < 0.0 {
                duplicate.get_or_insert((i, j));
            } else if beta == 0.0 {
                total += 1.0;
            }
            // beta > 0: contributes 0
        } else {
            total += pow_beta(d2, beta);
        }
    });
    if let Some((i, j)) = duplicate {
        return Err(Error::DuplicatePoints { i, j });
    }
    Ok(total)
}

/// Average vertex degree of the graph, `2 L_n(0) / n`.
pub fn average_degree(cloud: &PointCloud, r: f64) -> Result<f64> {
    let n = cloud.len();
    if n == 0 {
        return Ok(0.0);
    }
    Ok(2.0 * edge_power_sum(cloud, r, 0.0)? / n as f64)
}
