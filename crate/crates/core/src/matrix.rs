//! Dense exact matrices and Gaussian elimination.
//!
//! Everything downstream (Hom-complex ranks, Koszul lifting systems, prune)
//! funnels into [`ExactMatrix::row_echelon`]. Elimination uses the first
//! nonzero entry in each column as pivot, so results are deterministic.

use std::fmt;

use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactMatrix {
    rows: usize,
    cols: usize,
    // Row-major; length rows * cols.
    entries: Vec<Scalar>,
}

impl ExactMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        ExactMatrix {
            rows,
            cols,
            entries: vec![Scalar::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = ExactMatrix::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Scalar::one());
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Scalar>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        ExactMatrix {
            rows: r,
            cols: c,
            entries: rows.into_iter().flatten().collect(),
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Scalar) -> Self {
        let mut entries = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                entries.push(f(r, c));
            }
        }
        ExactMatrix { rows, cols, entries }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> Scalar {
        self.entries[r * self.cols + c].clone()
    }

    pub fn get_ref(&self, r: usize, c: usize) -> &Scalar {
        &self.entries[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: Scalar) {
        self.entries[r * self.cols + c] = v;
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|e| e.is_zero())
    }

    pub fn transpose(&self) -> ExactMatrix {
        ExactMatrix::from_fn(self.cols, self.rows, |r, c| self.get(c, r))
    }

    pub fn mul(&self, other: &ExactMatrix) -> ExactMatrix {
        assert_eq!(self.cols, other.rows, "shape mismatch in matrix product");
        let mut out = ExactMatrix::zeros(self.rows, other.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get_ref(r, k);
                if a.is_zero() {
                    continue;
                }
                for c in 0..other.cols {
                    let b = other.get_ref(k, c);
                    if b.is_zero() {
                        continue;
                    }
                    let v = out.get(r, c) + a * b;
                    out.set(r, c, v);
                }
            }
        }
        out
    }

    /// Stacks `self` on top of `other`.
    pub fn vstack(&self, other: &ExactMatrix) -> ExactMatrix {
        assert_eq!(self.cols, other.cols);
        let mut entries = self.entries.clone();
        entries.extend(other.entries.iter().cloned());
        ExactMatrix {
            rows: self.rows + other.rows,
            cols: self.cols,
            entries,
        }
    }

    /// Places `other` to the right of `self`.
    pub fn hstack(&self, other: &ExactMatrix) -> ExactMatrix {
        assert_eq!(self.rows, other.rows);
        ExactMatrix::from_fn(self.rows, self.cols + other.cols, |r, c| {
            if c < self.cols {
                self.get(r, c)
            } else {
                other.get(r, c - self.cols)
            }
        })
    }

    /// In-place reduction to row echelon form. Returns the pivot columns;
    /// the rank is their count. Pivot rows are scaled to 1 and pivot columns
    /// are cleared above and below (reduced form).
    pub fn row_echelon(&mut self) -> Vec<usize> {
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..self.cols {
            if row == self.rows {
                break;
            }
            // First nonzero entry at or below `row` (fixed pivot order).
            let Some(p) = (row..self.rows).find(|&r| !self.get_ref(r, col).is_zero()) else {
                continue;
            };
            self.swap_rows(row, p);
            let inv = self.get(row, col).inv();
            for c in col..self.cols {
                let v = self.get_ref(row, c) * &inv;
                self.set(row, c, v);
            }
            for r in 0..self.rows {
                if r == row || self.get_ref(r, col).is_zero() {
                    continue;
                }
                let factor = self.get(r, col);
                for c in col..self.cols {
                    let v = self.get(r, c) - &factor * self.get_ref(row, c);
                    self.set(r, c, v);
                }
            }
            pivots.push(col);
            row += 1;
        }
        pivots
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for c in 0..self.cols {
            self.entries.swap(a * self.cols + c, b * self.cols + c);
        }
    }

    pub fn rank(&self) -> usize {
        let mut m = self.clone();
        m.row_echelon().len()
    }

    /// Exact rank together with a basis of the right kernel;
    /// `rank + kernel.len() == cols` always holds.
    pub fn rank_kernel(&self) -> (usize, Vec<Vec<Scalar>>) {
        let mut m = self.clone();
        let pivots = m.row_echelon();
        let rank = pivots.len();
        let mut kernel = Vec::with_capacity(self.cols - rank);
        let mut is_pivot = vec![false; self.cols];
        for &c in &pivots {
            is_pivot[c] = true;
        }
        for free in 0..self.cols {
            if is_pivot[free] {
                continue;
            }
            let mut v = vec![Scalar::zero(); self.cols];
            v[free] = Scalar::one();
            for (r, &pc) in pivots.iter().enumerate() {
                v[pc] = -m.get_ref(r, free);
            }
            kernel.push(v);
        }
        (rank, kernel)
    }

    /// Solves `self * X = rhs` for all columns of `rhs` at once, with free
    /// variables set to zero. Returns `None` when some column is
    /// inconsistent.
    pub fn solve(&self, rhs: &ExactMatrix) -> Option<ExactMatrix> {
        assert_eq!(self.rows, rhs.rows, "rhs row count mismatch");
        let mut aug = self.hstack(rhs);
        let pivots = aug.row_echelon();
        // Any pivot in the rhs block signals inconsistency.
        if pivots.iter().any(|&c| c >= self.cols) {
            return None;
        }
        let mut x = ExactMatrix::zeros(self.cols, rhs.cols);
        for (r, &pc) in pivots.iter().enumerate() {
            for c in 0..rhs.cols {
                x.set(pc, c, aug.get(r, self.cols + c));
            }
        }
        Some(x)
    }

    pub fn neg(&self) -> ExactMatrix {
        ExactMatrix::from_fn(self.rows, self.cols, |r, c| -self.get_ref(r, c))
    }
}

impl fmt::Display for ExactMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in 0..self.rows {
            let row: Vec<String> = (0..self.cols).map(|c| format!("{}", self.get_ref(r, c))).collect();
            writeln!(f, "[{}]", row.join(", "))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::FieldSpec;
    use rand::{Rng, SeedableRng};

    fn mat(rows: Vec<Vec<i64>>) -> ExactMatrix {
        ExactMatrix::from_rows(
            rows.into_iter()
                .map(|r| r.into_iter().map(Scalar::from_int).collect())
                .collect(),
        )
    }

    #[test]
    fn identity_has_full_rank_and_empty_kernel() {
        let (rank, kernel) = ExactMatrix::identity(3).rank_kernel();
        assert_eq!(rank, 3);
        assert!(kernel.is_empty());
    }

    #[test]
    fn zero_matrix_kernel_is_everything() {
        let (rank, kernel) = ExactMatrix::zeros(2, 4).rank_kernel();
        assert_eq!(rank, 0);
        assert_eq!(kernel.len(), 4);
    }

    #[test]
    fn rank_one_kernel_by_hand() {
        // [[1,2],[2,4]] has rank 1 with kernel spanned by (2,-1)^T
        // (equivalently (-2,1)^T; ours is pinned by the pivot convention).
        let (rank, kernel) = mat(vec![vec![1, 2], vec![2, 4]]).rank_kernel();
        assert_eq!(rank, 1);
        assert_eq!(kernel.len(), 1);
        let v = &kernel[0];
        // Proportional to (2, -1)^T.
        assert_eq!(&v[0] * &Scalar::from_int(-1), &v[1] * &Scalar::from_int(2));
        assert!(!v.iter().all(|x| x.is_zero()));
    }

    #[test]
    fn rank_nullity_on_random_matrices() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let r = rng.gen_range(1..6);
            let c = rng.gen_range(1..6);
            let m = ExactMatrix::from_fn(r, c, |_, _| Scalar::from_int(rng.gen_range(-4..=4)));
            let (rank, kernel) = m.rank_kernel();
            assert_eq!(rank + kernel.len(), c);
            for v in &kernel {
                for row in 0..r {
                    let mut acc = Scalar::zero();
                    for col in 0..c {
                        acc = acc + m.get_ref(row, col) * &v[col];
                    }
                    assert!(acc.is_zero());
                }
            }
        }
    }

    #[test]
    fn rank_invariant_under_permutation() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(23);
        for _ in 0..10 {
            let r = rng.gen_range(2..5);
            let c = rng.gen_range(2..5);
            let m = ExactMatrix::from_fn(r, c, |_, _| Scalar::from_int(rng.gen_range(-3..=3)));
            let mut rows: Vec<usize> = (0..r).collect();
            let mut cols: Vec<usize> = (0..c).collect();
            for i in (1..r).rev() {
                rows.swap(i, rng.gen_range(0..=i));
            }
            for i in (1..c).rev() {
                cols.swap(i, rng.gen_range(0..=i));
            }
            let p = ExactMatrix::from_fn(r, c, |i, j| m.get(rows[i], cols[j]));
            assert_eq!(m.rank(), p.rank());
        }
    }

    #[test]
    fn fp_rank_never_exceeds_rational_rank() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..15 {
            let r = rng.gen_range(2..5);
            let c = rng.gen_range(2..5);
            let m = ExactMatrix::from_fn(r, c, |_, _| Scalar::from_int(rng.gen_range(-6..=6)));
            let mp = ExactMatrix::from_fn(r, c, |i, j| {
                m.get(i, j).to_field(FieldSpec::Fp(5)).unwrap()
            });
            assert!(mp.rank() <= m.rank());
        }
    }

    #[test]
    fn solve_consistent_and_inconsistent() {
        let a = mat(vec![vec![1, 2], vec![2, 4]]);
        // b in the column span.
        let b = mat(vec![vec![3], vec![6]]);
        let x = a.solve(&b).unwrap();
        assert_eq!(a.mul(&x), b);
        // b outside the span.
        let b2 = mat(vec![vec![1], vec![0]]);
        assert!(a.solve(&b2).is_none());
    }

    #[test]
    fn solve_multiple_rhs() {
        let a = mat(vec![vec![2, 0, 1], vec![0, 1, 1]]);
        let b = mat(vec![vec![4, 2], vec![3, 1]]);
        let x = a.solve(&b).unwrap();
        assert_eq!(a.mul(&x), b);
    }
}
