//! Minimum-cost linear assignment (Hungarian method, shortest augmenting
//! path formulation with row/column potentials), O(n^2 m) for n <= m.

use thiserror::Error;

use crate::scalar::Scalar;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AssignError {
    #[error("cost matrix row {row} has {len} entries, expected {expected}")]
    Ragged {
        row: usize,
        len: usize,
        expected: usize,
    },
    #[error("cost matrix data has {len} entries, expected {rows}x{cols}")]
    Shape {
        rows: usize,
        cols: usize,
        len: usize,
    },
    #[error("cost[{row}][{col}] = {value} is negative or non-finite")]
    InvalidCost { row: usize, col: usize, value: f64 },
}

/// Totally ordered additive group the solver can run over. Plain scalars
/// implement it; [`Lexicographic`] pairs give a tie-breaking secondary cost.
pub trait AssignCost: Copy + PartialOrd {
    fn zero() -> Self;
    fn infinity() -> Self;
    fn add(self, other: Self) -> Self;
    fn sub(self, other: Self) -> Self;
}

impl<T: Scalar> AssignCost for T {
    fn zero() -> Self {
        T::zero()
    }
    fn infinity() -> Self {
        T::infinity()
    }
    fn add(self, other: Self) -> Self {
        self + other
    }
    fn sub(self, other: Self) -> Self {
        self - other
    }
}

/// Cost compared on `primary` first, `secondary` only on ties.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Lexicographic<T> {
    pub primary: T,
    pub secondary: T,
}

impl<T: Scalar> AssignCost for Lexicographic<T> {
    fn zero() -> Self {
        Self {
            primary: T::zero(),
            secondary: T::zero(),
        }
    }
    fn infinity() -> Self {
        Self {
            primary: T::infinity(),
            secondary: T::infinity(),
        }
    }
    fn add(self, o: Self) -> Self {
        Self {
            primary: self.primary + o.primary,
            secondary: self.secondary + o.secondary,
        }
    }
    fn sub(self, o: Self) -> Self {
        Self {
            primary: self.primary - o.primary,
            secondary: self.secondary - o.secondary,
        }
    }
}

/// Dense row-major cost matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CostMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Copy> CostMatrix<T> {
    pub fn new(rows: usize, cols: usize, data: Vec<T>) -> Result<Self, AssignError> {
        if data.len() != rows * cols {
            return Err(AssignError::Shape {
                rows,
                cols,
                len: data.len(),
            });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: Vec<Vec<T>>) -> Result<Self, AssignError> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for (r, row) in rows.iter().enumerate() {
            if row.len() != cols {
                return Err(AssignError::Ragged {
                    row: r,
                    len: row.len(),
                    expected: cols,
                });
            }
            data.extend_from_slice(row);
        }
        Self::new(rows.len(), cols, data)
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> T {
        self.data[row * self.cols + col]
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self.get(c, r))
    }
}

impl<T: Scalar> CostMatrix<T> {
    /// Sum of the costs of `pairs`, taken in the given order.
    pub fn total(&self, pairs: &[(usize, usize)]) -> T {
        pairs.iter().map(|&(r, c)| self.get(r, c)).sum()
    }
}

/// Returns `min(rows, cols)` `(row, col)` pairs of minimum total cost, each
/// row and column used at most once, sorted by row. Among equal-cost
/// choices the scan order favors lower column indices.
pub fn hungarian_assign<T: Scalar>(
    cost: &CostMatrix<T>,
) -> Result<Vec<(usize, usize)>, AssignError> {
    for r in 0..cost.rows {
        for c in 0..cost.cols {
            let v = cost.get(r, c);
            if !v.is_finite() || v < T::zero() {
                return Err(AssignError::InvalidCost {
                    row: r,
                    col: c,
                    value: v.to_f64_lossy(),
                });
            }
        }
    }
    Ok(solve(cost))
}

/// Unchecked solver over any [`AssignCost`]; entries must be finite.
pub(crate) fn solve<C: AssignCost>(cost: &CostMatrix<C>) -> Vec<(usize, usize)> {
    if cost.rows == 0 || cost.cols == 0 {
        return Vec::new();
    }
    if cost.rows > cost.cols {
        let mut pairs: Vec<(usize, usize)> = solve_wide(&cost.transpose())
            .into_iter()
            .map(|(c, r)| (r, c))
            .collect();
        pairs.sort_unstable();
        return pairs;
    }
    solve_wide(cost)
}

/// Core solver for `rows <= cols`. Indices are 1-based internally with
/// slot 0 as the virtual source column.
fn solve_wide<C: AssignCost>(cost: &CostMatrix<C>) -> Vec<(usize, usize)> {
    let (n, m) = (cost.rows, cost.cols);
    let inf = C::infinity();
    let mut u = vec![C::zero(); n + 1];
    let mut v = vec![C::zero(); m + 1];
    // row_of[j]: row matched to column j (0 = free)
    let mut row_of = vec![0usize; m + 1];
    let mut way = vec![0usize; m + 1];

    for i in 1..=n {
        row_of[0] = i;
        let mut j0 = 0usize;
        let mut min_slack = vec![inf; m + 1];
        let mut used = vec![false; m + 1];
        loop {
            used[j0] = true;
            let i0 = row_of[j0];
            let mut delta = inf;
            let mut j1 = 0usize;
            for j in 1..=m {
                if used[j] {
                    continue;
                }
                let reduced = cost.get(i0 - 1, j - 1).sub(u[i0]).sub(v[j]);
                if reduced < min_slack[j] {
                    min_slack[j] = reduced;
                    way[j] = j0;
                }
                if min_slack[j] < delta {
                    delta = min_slack[j];
                    j1 = j;
                }
            }
            for j in 0..=m {
                if used[j] {
                    u[row_of[j]] = u[row_of[j]].add(delta);
                    v[j] = v[j].sub(delta);
                } else {
                    min_slack[j] = min_slack[j].sub(delta);
                }
            }
            j0 = j1;
            if row_of[j0] == 0 {
                break;
            }
        }
        // flip the augmenting path back to the source
        loop {
            let j1 = way[j0];
            row_of[j0] = row_of[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut pairs: Vec<(usize, usize)> = (1..=m)
        .filter(|&j| row_of[j] != 0)
        .map(|j| (row_of[j] - 1, j - 1))
        .collect();
    pairs.sort_unstable();
    pairs
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Exhaustive minimum over all injections of the shorter side into the longer.
    /// Totals are summed over row-sorted pairs of the original matrix, the
    /// same way the solver's result is totalled, so equal optima compare equal.
    fn brute_force_min(cost: &CostMatrix<f64>) -> f64 {
        let transposed = cost.rows() > cost.cols();
        let (short, long) = if transposed {
            (cost.cols(), cost.rows())
        } else {
            (cost.rows(), cost.cols())
        };
        fn rec(
            cost: &CostMatrix<f64>,
            transposed: bool,
            (depth, short, long): (usize, usize, usize),
            used: &mut Vec<bool>,
            acc: &mut Vec<(usize, usize)>,
            best: &mut f64,
        ) {
            if depth == short {
                let mut pairs: Vec<(usize, usize)> = acc
                    .iter()
                    .map(|&(s, l)| if transposed { (l, s) } else { (s, l) })
                    .collect();
                pairs.sort_unstable();
                *best = best.min(cost.total(&pairs));
                return;
            }
            for l in 0..long {
                if !used[l] {
                    used[l] = true;
                    acc.push((depth, l));
                    rec(cost, transposed, (depth + 1, short, long), used, acc, best);
                    acc.pop();
                    used[l] = false;
                }
            }
        }
        let mut best = f64::INFINITY;
        rec(
            cost,
            transposed,
            (0, short, long),
            &mut vec![false; long],
            &mut Vec::new(),
            &mut best,
        );
        best
    }

    fn check_valid(pairs: &[(usize, usize)], rows: usize, cols: usize) {
        assert_eq!(pairs.len(), rows.min(cols));
        let mut rs: Vec<_> = pairs.iter().map(|p| p.0).collect();
        let mut cs: Vec<_> = pairs.iter().map(|p| p.1).collect();
        rs.sort_unstable();
        rs.dedup();
        cs.sort_unstable();
        cs.dedup();
        assert_eq!(rs.len(), pairs.len());
        assert_eq!(cs.len(), pairs.len());
    }

    #[test]
    fn small_examples() {
        let one = CostMatrix::from_rows(vec![vec![7.0]]).unwrap();
        assert_eq!(hungarian_assign(&one).unwrap(), vec![(0, 0)]);

        let two = CostMatrix::from_rows(vec![vec![1.0, 2.0], vec![2.0, 4.0]]).unwrap();
        assert_eq!(brute_force_min(&two), 4.0);
        let pairs = hungarian_assign(&two).unwrap();
        assert_eq!(pairs, vec![(0, 1), (1, 0)]);
        assert_eq!(two.total(&pairs), 4.0);

        let diag = CostMatrix::from_fn(3, 3, |r, c| if r == c { 0.0 } else { 5.0 });
        let pairs = hungarian_assign(&diag).unwrap();
        assert_eq!(pairs, vec![(0, 0), (1, 1), (2, 2)]);
        assert_eq!(diag.total(&pairs), 0.0);
    }

    #[test]
    fn rectangular_in_both_orientations() {
        let wide = CostMatrix::from_rows(vec![vec![9.0, 1.0, 5.0], vec![1.0, 9.0, 5.0]]).unwrap();
        assert_eq!(hungarian_assign(&wide).unwrap(), vec![(0, 1), (1, 0)]);
        let tall = wide.transpose();
        assert_eq!(hungarian_assign(&tall).unwrap(), vec![(0, 1), (1, 0)]);
    }

    #[test]
    fn empty_sides_yield_no_pairs() {
        let empty = CostMatrix::<f64>::new(0, 4, vec![]).unwrap();
        assert!(hungarian_assign(&empty).unwrap().is_empty());
        let empty = CostMatrix::<f64>::new(3, 0, vec![]).unwrap();
        assert!(hungarian_assign(&empty).unwrap().is_empty());
    }

    #[test]
    fn invalid_costs_rejected() {
        let neg = CostMatrix::from_rows(vec![vec![1.0, -0.5]]).unwrap();
        assert!(matches!(
            hungarian_assign(&neg),
            Err(AssignError::InvalidCost { row: 0, col: 1, .. })
        ));
        let nan = CostMatrix::from_rows(vec![vec![1.0], vec![f64::NAN]]).unwrap();
        assert!(matches!(
            hungarian_assign(&nan),
            Err(AssignError::InvalidCost { row: 1, .. })
        ));
        let inf = CostMatrix::from_rows(vec![vec![f64::INFINITY]]).unwrap();
        assert!(hungarian_assign(&inf).is_err());
        assert!(matches!(
            CostMatrix::from_rows(vec![vec![1.0, 2.0], vec![1.0]]),
            Err(AssignError::Ragged { row: 1, .. })
        ));
    }

    #[test]
    fn matches_brute_force_on_random_matrices() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        for trial in 0..300 {
            let rows = rng.random_range(1..=6);
            let cols = rng.random_range(1..=6);
            let integral = trial % 2 == 0;
            let cost = CostMatrix::from_fn(rows, cols, |_, _| {
                if integral {
                    rng.random_range(0..=10) as f64
                } else {
                    rng.random_range(0.0..=100.0)
                }
            });
            let pairs = hungarian_assign(&cost).unwrap();
            check_valid(&pairs, rows, cols);
            assert_eq!(
                cost.total(&pairs),
                brute_force_min(&cost),
                "trial {trial}: {cost:?}"
            );
        }
    }

    #[test]
    fn single_precision_costs() {
        let cost = CostMatrix::<f32>::from_rows(vec![
            vec![4.0, 1.0, 3.0],
            vec![2.0, 0.0, 5.0],
            vec![3.0, 2.0, 2.0],
        ])
        .unwrap();
        let pairs = hungarian_assign(&cost).unwrap();
        assert_eq!(cost.total(&pairs), 5.0);
    }
}
