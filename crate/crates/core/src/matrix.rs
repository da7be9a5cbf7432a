//! Dense exact linear algebra over the scalar field and over the jet ring.
//!
//! Rank decisions happen on the constant parts (the values at the base
//! point); square systems over jets are inverted by correcting the
//! constant-part inverse with a Neumann series, which terminates at the
//! truncation order because the correction has no constant term.
//!
//! All pivot choices are deterministic: columns are scanned left to right,
//! rows top to bottom, no magnitude heuristics. Identical inputs give
//! identical pivots and identical outputs.

use crate::error::{Error, Result};
use crate::jet::{Jet, JetSpace};
use crate::scalar::Scalar;

/// A matrix of plain scalars (constant parts, direction tables, ...).
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarMat<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

/// Outcome of an exact elimination: the rank and the pivot positions,
/// with `pivot_rows[k]` the row chosen for column `pivot_cols[k]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankProfile {
    pub rank: usize,
    pub pivot_rows: Vec<usize>,
    pub pivot_cols: Vec<usize>,
}

impl<T: Scalar> ScalarMat<T> {
    pub fn from_rows(rows: Vec<Vec<T>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        ScalarMat { rows: r, cols: c, data: rows.into_iter().flatten().collect() }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        ScalarMat { rows, cols, data }
    }

    pub fn identity(k: usize) -> Self {
        Self::from_fn(k, k, |r, c| if r == c { T::one() } else { T::zero() })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn at(&self, r: usize, c: usize) -> &T {
        &self.data[r * self.cols + c]
    }

    fn at_mut(&mut self, r: usize, c: usize) -> &mut T {
        &mut self.data[r * self.cols + c]
    }

    /// Exact Gaussian elimination. For each column, the pivot is the topmost
    /// not-yet-used row with a nonzero entry.
    pub fn rank_profile(&self) -> RankProfile {
        let mut work = self.clone();
        let mut used = vec![false; self.rows];
        let mut pivot_rows = Vec::new();
        let mut pivot_cols = Vec::new();
        for j in 0..self.cols {
            let Some(piv) = (0..self.rows).find(|&r| !used[r] && !work.at(r, j).is_zero())
            else {
                continue;
            };
            used[piv] = true;
            pivot_rows.push(piv);
            pivot_cols.push(j);
            let inv = T::one() / work.at(piv, j).clone();
            for r in 0..self.rows {
                if used[r] || work.at(r, j).is_zero() {
                    continue;
                }
                let factor = work.at(r, j).clone() * inv.clone();
                for c in j..self.cols {
                    let delta = factor.clone() * work.at(piv, c).clone();
                    let e = work.at_mut(r, c);
                    *e = e.clone() - delta;
                }
            }
        }
        RankProfile { rank: pivot_rows.len(), pivot_rows, pivot_cols }
    }

    pub fn rank(&self) -> usize {
        self.rank_profile().rank
    }

    /// Gauss-Jordan inverse; `None` when singular.
    pub fn inverse(&self) -> Option<ScalarMat<T>> {
        assert_eq!(self.rows, self.cols, "inverse of a non-square matrix");
        let k = self.rows;
        let mut a = self.clone();
        let mut b = Self::identity(k);
        for j in 0..k {
            let piv = (j..k).find(|&r| !a.at(r, j).is_zero())?;
            if piv != j {
                for c in 0..k {
                    a.data.swap(j * k + c, piv * k + c);
                    b.data.swap(j * k + c, piv * k + c);
                }
            }
            let inv = T::one() / a.at(j, j).clone();
            for c in 0..k {
                *a.at_mut(j, c) = a.at(j, c).clone() * inv.clone();
                *b.at_mut(j, c) = b.at(j, c).clone() * inv.clone();
            }
            for r in 0..k {
                if r == j || a.at(r, j).is_zero() {
                    continue;
                }
                let factor = a.at(r, j).clone();
                for c in 0..k {
                    let da = factor.clone() * a.at(j, c).clone();
                    let db = factor.clone() * b.at(j, c).clone();
                    *a.at_mut(r, c) = a.at(r, c).clone() - da;
                    *b.at_mut(r, c) = b.at(r, c).clone() - db;
                }
            }
        }
        Some(b)
    }

    pub fn mul(&self, other: &ScalarMat<T>) -> ScalarMat<T> {
        assert_eq!(self.cols, other.rows);
        ScalarMat::from_fn(self.rows, other.cols, |r, c| {
            let mut acc = T::zero();
            for k in 0..self.cols {
                acc = acc + self.at(r, k).clone() * other.at(k, c).clone();
            }
            acc
        })
    }
}

/// A dense matrix whose entries are jets sharing dimension, base point, and
/// a common usable order.
#[derive(Debug, Clone, PartialEq)]
pub struct JetMatrix<T: Scalar> {
    space: JetSpace<T>,
    rows: usize,
    cols: usize,
    entries: Vec<Jet<T>>,
}

impl<T: Scalar> JetMatrix<T> {
    pub fn from_entries(rows: usize, cols: usize, entries: Vec<Jet<T>>) -> Self {
        assert_eq!(entries.len(), rows * cols, "entry count mismatch");
        assert!(!entries.is_empty(), "empty matrix");
        let order = entries.iter().map(Jet::order).min().unwrap();
        let first_space = entries[0].space();
        assert!(
            entries.iter().all(|e| first_space.compatible(&e.space())),
            "jet entries live at different base points"
        );
        let entries: Vec<Jet<T>> = entries.into_iter().map(|e| e.truncated(order)).collect();
        let space = first_space.with_order(order);
        JetMatrix { space, rows, cols, entries }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Jet<T>) -> Self {
        let mut entries = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                entries.push(f(r, c));
            }
        }
        Self::from_entries(rows, cols, entries)
    }

    pub fn zeros(space: &JetSpace<T>, rows: usize, cols: usize) -> Self {
        Self::from_fn(rows, cols, |_, _| space.zero())
    }

    pub fn identity(space: &JetSpace<T>, k: usize) -> Self {
        Self::from_fn(k, k, |r, c| if r == c { space.one() } else { space.zero() })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Common usable order of all entries.
    pub fn order(&self) -> usize {
        self.space.order()
    }

    pub fn space(&self) -> &JetSpace<T> {
        &self.space
    }

    pub fn at(&self, r: usize, c: usize) -> &Jet<T> {
        assert!(r < self.rows && c < self.cols, "index out of bounds");
        &self.entries[r * self.cols + c]
    }

    pub fn row(&self, r: usize) -> &[Jet<T>] {
        &self.entries[r * self.cols..(r + 1) * self.cols]
    }

    pub fn truncated(&self, order: usize) -> JetMatrix<T> {
        Self::from_fn(self.rows, self.cols, |r, c| self.at(r, c).truncated(order))
    }

    /// The rational matrix of values at the base point.
    pub fn constant_part(&self) -> ScalarMat<T> {
        ScalarMat::from_fn(self.rows, self.cols, |r, c| self.at(r, c).constant_term())
    }

    pub fn add(&self, other: &JetMatrix<T>) -> JetMatrix<T> {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Self::from_fn(self.rows, self.cols, |r, c| self.at(r, c).add(other.at(r, c)))
    }

    pub fn sub(&self, other: &JetMatrix<T>) -> JetMatrix<T> {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Self::from_fn(self.rows, self.cols, |r, c| self.at(r, c).sub(other.at(r, c)))
    }

    pub fn neg(&self) -> JetMatrix<T> {
        Self::from_fn(self.rows, self.cols, |r, c| self.at(r, c).neg())
    }

    pub fn mul(&self, other: &JetMatrix<T>) -> JetMatrix<T> {
        assert_eq!(self.cols, other.rows, "dimension mismatch in matrix product");
        let order = self.order().min(other.order());
        let zero = self.space.with_order(order).zero();
        Self::from_fn(self.rows, other.cols, |r, c| {
            let mut acc = zero.clone();
            for k in 0..self.cols {
                let a = self.at(r, k);
                let b = other.at(k, c);
                if a.is_zero() || b.is_zero() {
                    continue;
                }
                acc = acc.add(&a.mul(b));
            }
            acc
        })
    }

    /// Entrywise derivation; costs one usable order.
    pub fn derive(&self, dir: usize) -> Result<JetMatrix<T>> {
        if self.order() == 0 {
            return Err(Error::InsufficientJetOrder { needed: 1, have: 0 });
        }
        let mut entries = Vec::with_capacity(self.entries.len());
        for e in &self.entries {
            entries.push(e.derive(dir)?);
        }
        Ok(Self::from_entries(self.rows, self.cols, entries))
    }

    pub fn hstack(parts: &[&JetMatrix<T>]) -> JetMatrix<T> {
        assert!(!parts.is_empty());
        let rows = parts[0].rows;
        assert!(parts.iter().all(|m| m.rows == rows), "row count mismatch in hstack");
        let cols = parts.iter().map(|m| m.cols).sum();
        let mut entries = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for m in parts {
                entries.extend(m.row(r).iter().cloned());
            }
        }
        Self::from_entries(rows, cols, entries)
    }

    pub fn vstack(parts: &[&JetMatrix<T>]) -> JetMatrix<T> {
        assert!(!parts.is_empty());
        let cols = parts[0].cols;
        assert!(parts.iter().all(|m| m.cols == cols), "column count mismatch in vstack");
        let rows = parts.iter().map(|m| m.rows).sum();
        let mut entries = Vec::with_capacity(rows * cols);
        for m in parts {
            entries.extend(m.entries.iter().cloned());
        }
        Self::from_entries(rows, cols, entries)
    }

    pub fn select(&self, rows: &[usize], cols: &[usize]) -> JetMatrix<T> {
        Self::from_fn(rows.len(), cols.len(), |r, c| self.at(rows[r], cols[c]).clone())
    }

    pub fn columns(&self, range: std::ops::Range<usize>) -> JetMatrix<T> {
        let cols: Vec<usize> = range.collect();
        let rows: Vec<usize> = (0..self.rows).collect();
        self.select(&rows, &cols)
    }

    /// Widens with zero jets on the right.
    pub fn pad_cols(&self, new_cols: usize) -> JetMatrix<T> {
        assert!(new_cols >= self.cols);
        let zero = self.space.zero();
        Self::from_fn(self.rows, new_cols, |r, c| {
            if c < self.cols {
                self.at(r, c).clone()
            } else {
                zero.clone()
            }
        })
    }

    pub fn is_zero_to_order(&self, order: usize) -> bool {
        self.entries.iter().all(|e| e.truncated(order).is_zero())
    }

    pub fn eq_to_common_order(&self, other: &JetMatrix<T>) -> bool {
        self.rows == other.rows
            && self.cols == other.cols
            && self
                .entries
                .iter()
                .zip(&other.entries)
                .all(|(a, b)| a.eq_to_common_order(b))
    }

    /// Rank of the constant part at the base point, with the deterministic
    /// pivot columns and rows.
    pub fn rank_at_base(&self) -> RankProfile {
        self.constant_part().rank_profile()
    }

    /// Inverse over the jet ring of a square matrix whose constant part is
    /// invertible. Computed as a Neumann correction of the constant-part
    /// inverse; the result is verified against the identity to the usable
    /// order before being returned.
    pub fn invert_square(&self) -> Result<JetMatrix<T>> {
        assert_eq!(self.rows, self.cols, "invert_square needs a square matrix");
        let m0 = self.constant_part();
        let x0 = m0.inverse().ok_or(Error::NotInvertibleAtBase)?;
        let x0j = Self::from_fn(self.rows, self.cols, |r, c| {
            self.space.constant(x0.at(r, c).clone())
        });
        let m_plus = self.sub(&Self::from_fn(self.rows, self.cols, |r, c| {
            self.space.constant(m0.at(r, c).clone())
        }));
        // inv = sum_r (-x0 m_plus)^r x0; the r-th term has valuation r.
        let step = x0j.mul(&m_plus).neg();
        let mut acc = x0j.clone();
        let mut term = x0j;
        for _ in 1..=self.order() {
            term = step.mul(&term);
            if term.is_zero_to_order(term.order()) {
                break;
            }
            acc = acc.add(&term);
        }
        let check = self.mul(&acc);
        let id = Self::identity(&self.space.with_order(check.order()), self.rows);
        if !check.eq_to_common_order(&id) {
            return Err(Error::Internal("jet inverse failed verification".into()));
        }
        Ok(acc)
    }

    /// Expresses the non-free solution components of `self * x = 0` as
    /// jet-linear functions of the chosen free components.
    ///
    /// Returns `L` with one row per dependent column (in ascending column
    /// order) and one column per free column, such that setting
    /// `x_dep = L * x_free` solves the system to the usable order. The
    /// dependent columns must be square-invertible at the base point against
    /// the pivot rows.
    pub fn solve_dependent(&self, free_cols: &[usize]) -> Result<JetMatrix<T>> {
        let free_set: std::collections::BTreeSet<usize> = free_cols.iter().copied().collect();
        assert_eq!(free_set.len(), free_cols.len(), "duplicate free columns");
        assert!(free_set.iter().all(|&c| c < self.cols), "free column out of range");
        let dep: Vec<usize> = (0..self.cols).filter(|c| !free_set.contains(c)).collect();
        let free: Vec<usize> = free_set.into_iter().collect();
        if dep.is_empty() {
            return Err(Error::FrameNotAdapted);
        }
        let all_rows: Vec<usize> = (0..self.rows).collect();
        let dep_m = self.select(&all_rows, &dep);
        let profile = dep_m.rank_at_base();
        if profile.rank != dep.len() {
            return Err(Error::FrameNotAdapted);
        }
        let mut pivot_rows = profile.pivot_rows.clone();
        pivot_rows.sort_unstable();
        let square = self.select(&pivot_rows, &dep);
        let inv = square.invert_square().map_err(|e| match e {
            Error::NotInvertibleAtBase => Error::FrameNotAdapted,
            other => other,
        })?;
        let rhs = self.select(&pivot_rows, &free);
        let l = inv.mul(&rhs).neg();

        // The assembled kernel vectors must annihilate every row, including
        // the ones not used as pivots.
        let zero = self.space.with_order(l.order()).zero();
        let assembled = JetMatrix::from_fn(self.cols, free.len(), |r, c| {
            if let Ok(d) = dep.binary_search(&r) {
                l.at(d, c).clone()
            } else if free[c] == r {
                self.space.one()
            } else {
                zero.clone()
            }
        });
        let residual = self.mul(&assembled);
        if !residual.is_zero_to_order(residual.order()) {
            return Err(Error::Internal(
                "dependent-column solve does not annihilate the full system".into(),
            ));
        }
        Ok(l)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Rat;
    use num_traits::{One, Zero};

    fn space(n: usize, order: usize) -> JetSpace<Rat> {
        JetSpace::new(n, order, vec![Rat::zero(); n])
    }

    fn r(num: i64, den: i64) -> Rat {
        Rat::new(num.into(), den.into())
    }

    fn const_mat(sp: &JetSpace<Rat>, rows: &[&[i64]]) -> JetMatrix<Rat> {
        JetMatrix::from_fn(rows.len(), rows[0].len(), |i, j| {
            sp.constant(r(rows[i][j], 1))
        })
    }

    #[test]
    fn rank_of_identity_and_dependent_rows() {
        let sp = space(2, 2);
        let id = JetMatrix::identity(&sp, 5);
        let prof = id.rank_at_base();
        assert_eq!(prof.rank, 5);
        assert_eq!(prof.pivot_cols, vec![0, 1, 2, 3, 4]);
        assert_eq!(prof.pivot_rows, vec![0, 1, 2, 3, 4]);

        let m = const_mat(&sp, &[&[1, 2], &[2, 4]]);
        assert_eq!(m.rank_at_base().rank, 1);
    }

    #[test]
    fn deterministic_pivots() {
        let sp = space(2, 1);
        let m = const_mat(&sp, &[&[0, 1, 1], &[1, 0, 1], &[1, 1, 0]]);
        let p1 = m.rank_at_base();
        let p2 = m.rank_at_base();
        assert_eq!(p1, p2);
        // column 0: topmost nonzero is row 1; column 1: row 0; column 2: row 2
        assert_eq!(p1.pivot_cols, vec![0, 1, 2]);
        assert_eq!(p1.pivot_rows, vec![1, 0, 2]);
    }

    #[test]
    fn invert_identity_and_diagonal() {
        let sp = space(2, 3);
        let id = JetMatrix::identity(&sp, 4);
        assert!(id.invert_square().unwrap().eq_to_common_order(&id));

        let u1 = sp.one().add(&sp.coordinate(1));
        let u2 = sp.constant(r(3, 7)).add(&sp.coordinate(2).mul(&sp.coordinate(1)));
        let d = JetMatrix::from_fn(2, 2, |i, j| {
            if i != j {
                sp.zero()
            } else if i == 0 {
                u1.clone()
            } else {
                u2.clone()
            }
        });
        let dinv = d.invert_square().unwrap();
        assert!(dinv.at(0, 0).eq_to_common_order(&u1.invert().unwrap()));
        assert!(dinv.at(1, 1).eq_to_common_order(&u2.invert().unwrap()));
        assert!(dinv.at(0, 1).is_zero());
    }

    #[test]
    fn invert_roundtrip_with_mixed_terms() {
        let sp = space(2, 3);
        let x = sp.coordinate(1);
        let y = sp.coordinate(2);
        let m = JetMatrix::from_entries(
            2,
            2,
            vec![
                sp.one().add(&x.mul(&y)),
                x.clone(),
                y.scale(&r(2, 3)),
                sp.constant(r(-5, 2)).add(&y.pow(2)),
            ],
        );
        let minv = m.invert_square().unwrap();
        let back = minv.invert_square().unwrap();
        assert!(back.eq_to_common_order(&m));
    }

    #[test]
    fn invert_singular_constant_part_errors() {
        let sp = space(2, 2);
        let m = JetMatrix::from_entries(
            2,
            2,
            vec![sp.coordinate(1), sp.zero(), sp.zero(), sp.one()],
        );
        match m.invert_square() {
            Err(Error::NotInvertibleAtBase) => {}
            other => panic!("expected singular error, got {other:?}"),
        }
    }

    #[test]
    fn solve_dependent_minimal() {
        let sp = space(1, 2);
        let m = const_mat(&sp, &[&[1, 1]]);
        let l = m.solve_dependent(&[1]).unwrap();
        assert_eq!((l.rows(), l.cols()), (1, 1));
        assert_eq!(l.at(0, 0).constant_term(), r(-1, 1));
    }

    #[test]
    fn solve_dependent_two_by_four_is_minus_binv_c() {
        // m = (B C) with B invertible: dependent = columns of B,
        // free = columns of C, L = -B^{-1} C.
        let sp = space(2, 2);
        let m = const_mat(&sp, &[&[1, 2, 5, 6], &[3, 4, 7, 8]]);
        let l = m.solve_dependent(&[2, 3]).unwrap();
        // B^{-1} = [[-2, 1], [3/2, -1/2]]; L = -B^{-1}C = [[3, 4], [-4, -5]]
        let expected = [[r(3, 1), r(4, 1)], [r(-4, 1), r(-5, 1)]];
        for i in 0..2 {
            for j in 0..2 {
                assert_eq!(l.at(i, j).constant_term(), expected[i][j]);
            }
        }
    }

    #[test]
    fn solve_dependent_three_by_four_single_free() {
        // 3x4 with one free column left among the trailing block.
        let sp = space(2, 2);
        let m = const_mat(&sp, &[&[1, 0, 1, 2], &[0, 1, 3, 4], &[0, 0, 5, 6]]);
        let l = m.solve_dependent(&[3]).unwrap();
        assert_eq!((l.rows(), l.cols()), (3, 1));
        let expected = [r(-4, 5), r(-2, 5), r(-6, 5)];
        for i in 0..3 {
            assert_eq!(l.at(i, 0).constant_term(), expected[i]);
        }
    }

    #[test]
    fn solve_dependent_rejects_singular_complement() {
        let sp = space(1, 1);
        let m = const_mat(&sp, &[&[0, 1]]);
        match m.solve_dependent(&[1]) {
            Err(Error::FrameNotAdapted) => {}
            other => panic!("expected frame-not-adapted, got {other:?}"),
        }
    }

    #[test]
    fn block_assembly_roundtrip() {
        let sp = space(2, 2);
        let a = const_mat(&sp, &[&[1, 2], &[3, 4]]);
        let b = JetMatrix::zeros(&sp, 2, 3);
        let c = const_mat(&sp, &[&[5, 6], &[7, 8]]);
        let d = const_mat(&sp, &[&[9, 1, 2], &[3, 4, 5]]);
        let top = JetMatrix::hstack(&[&a, &b]);
        let bottom = JetMatrix::hstack(&[&c, &d]);
        let m = JetMatrix::vstack(&[&top, &bottom]);
        assert_eq!(m.rows(), 4);
        assert_eq!(m.cols(), 5);
        let rows: Vec<usize> = vec![0, 1];
        assert!(m.select(&rows, &[0, 1]).eq_to_common_order(&a));
        assert!(m.select(&[2, 3], &[0, 1]).eq_to_common_order(&c));
        assert!(m.select(&[2, 3], &[2, 3, 4]).eq_to_common_order(&d));
        assert!(m.select(&rows, &[2, 3, 4]).is_zero_to_order(2));
    }

    #[test]
    fn scalar_inverse_on_permuted_matrix() {
        let m: ScalarMat<Rat> = ScalarMat::from_rows(vec![
            vec![Rat::zero(), Rat::one()],
            vec![Rat::one(), Rat::zero()],
        ]);
        let inv = m.inverse().unwrap();
        assert_eq!(m.mul(&inv), ScalarMat::identity(2));
    }
}
