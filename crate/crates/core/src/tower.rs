//! Prolongation of an operator: each level differentiates the previous one,
//! producing the block-triangular matrices whose kernels are the formal
//! solutions at each order.
//!
//! A row block holds the `q` equations differentiated by one multi-index
//! `t`. Deriving block `t` in direction `i` produces block `t + 1_i` by the
//! Leibniz rule: the coefficient of the component `(v, s)` picks up the
//! derivative of the old `(v, s)` coefficient plus the old `(v, s - 1_i)`
//! coefficient. A target block is reachable from several parents; the first
//! producing pair in graded order generates it and every other pair is
//! recomputed and checked for exact equality.

use crate::error::{Error, Result};
use crate::matrix::JetMatrix;
use crate::multiindex::{count, count_upto, decode_col, IndexTable};
use crate::operator::{calibration_identity, compute_h0, OperatorSpec, Range};
use crate::scalar::Scalar;

/// Maximal-rank check of one principal symbol.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymbolRank {
    pub h: usize,
    pub expected: u64,
    pub actual: u64,
}

/// Outcome of the finite ordinariness check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrdinaryReport {
    pub ordinary: bool,
    pub checked: Vec<SymbolRank>,
    /// First level whose symbol rank is deficient, when not ordinary.
    pub failing: Option<usize>,
}

/// The tower of prolonged equation systems, stored as derived row blocks.
#[derive(Debug, Clone)]
pub struct Tower<T: Scalar> {
    spec: OperatorSpec<T>,
    h_limit: usize,
    row_table: IndexTable,
    col_table: IndexTable,
    blocks: Vec<JetMatrix<T>>,
}

impl<T: Scalar> Tower<T> {
    /// Builds all row blocks up to equation-derivative height `h_limit - k`.
    pub fn build(spec: OperatorSpec<T>, h_limit: usize) -> Result<Self> {
        let (n, k, p) = (spec.n(), spec.k(), spec.p());
        assert!(h_limit >= k, "tower must reach at least the operator order");
        let derivations = h_limit - k;
        if spec.space().order() < derivations {
            return Err(Error::InsufficientJetOrder {
                needed: derivations,
                have: spec.space().order(),
            });
        }
        let row_table = IndexTable::new(n, derivations);
        let col_table = IndexTable::new(n, h_limit);
        let mut blocks: Vec<JetMatrix<T>> = Vec::with_capacity(row_table.len());
        blocks.push(spec.base_matrix());
        for w_rank in 1..row_table.len() {
            let w = row_table.unrank(w_rank).clone();
            let mut parents: Vec<(usize, usize)> = w
                .iter_dirs_present()
                .map(|i| {
                    let t = row_table
                        .rank(&w.lowered(i).expect("direction present"))
                        .expect("parent in table");
                    (t, i)
                })
                .collect();
            parents.sort_unstable();
            let (t0, i0) = parents[0];
            let generated = derive_block(&col_table, &blocks[t0], i0, p, w.height() + k)?;
            for &(t, i) in &parents[1..] {
                let alt = derive_block(&col_table, &blocks[t], i, p, w.height() + k)?;
                if !generated.eq_to_common_order(&alt) {
                    return Err(Error::Internal(format!(
                        "conflicting duplicate rows: block {w:?} from parents ({t0},{i0}) and ({t},{i}) disagree"
                    )));
                }
            }
            blocks.push(generated);
        }
        Ok(Tower { spec, h_limit, row_table, col_table, blocks })
    }

    pub fn spec(&self) -> &OperatorSpec<T> {
        &self.spec
    }

    pub fn h_limit(&self) -> usize {
        self.h_limit
    }

    pub fn row_table(&self) -> &IndexTable {
        &self.row_table
    }

    pub fn col_table(&self) -> &IndexTable {
        &self.col_table
    }

    /// Row block for the equations differentiated by the rank-`t` index.
    pub fn block(&self, t_rank: usize) -> &JetMatrix<T> {
        &self.blocks[t_rank]
    }

    fn assert_level(&self, h: usize) {
        assert!(
            (self.spec.k()..=self.h_limit).contains(&h),
            "level {h} outside built tower (k..={})",
            self.h_limit
        );
    }

    /// The full prolonged system at order `h`: every row block of
    /// equation-derivative height `<= h - k`, zero-padded to the common
    /// column count.
    pub fn matrix(&self, h: usize) -> JetMatrix<T> {
        self.assert_level(h);
        let (k, p, n) = (self.spec.k(), self.spec.p(), self.spec.n());
        let width = p * count_upto(n, h as i64) as usize;
        let padded: Vec<JetMatrix<T>> = (0..self.row_table.height_start(h - k + 1))
            .map(|t| self.blocks[t].pad_cols(width))
            .collect();
        let refs: Vec<&JetMatrix<T>> = padded.iter().collect();
        JetMatrix::vstack(&refs)
    }

    /// The new rows at order `h`: row blocks of height exactly `h - k`.
    pub fn level_matrix(&self, h: usize) -> JetMatrix<T> {
        self.assert_level(h);
        let k = self.spec.k();
        let range = self.row_table.height_range(h - k);
        let parts: Vec<&JetMatrix<T>> = range.map(|t| &self.blocks[t]).collect();
        JetMatrix::vstack(&parts)
    }

    /// Principal symbol at order `h`: the level rows restricted to the
    /// columns of derivative order exactly `h`.
    pub fn principal_block(&self, h: usize) -> JetMatrix<T> {
        let p = self.spec.p();
        let lm = self.level_matrix(h);
        lm.columns(p * self.col_table.height_start(h)..lm.cols())
    }

    /// The level rows restricted to the columns of derivative order `< h`.
    pub fn lower_block(&self, h: usize) -> JetMatrix<T> {
        let p = self.spec.p();
        let lm = self.level_matrix(h);
        lm.columns(0..p * self.col_table.height_start(h))
    }

    /// Levels the finite ordinariness test must cover: up to `h0` when the
    /// critical symbol is square, up to `h0 + 1` otherwise.
    pub fn required_check_level(spec: &OperatorSpec<T>) -> Result<usize> {
        let (n, k, p, q) = (spec.n(), spec.k(), spec.p(), spec.q());
        let h0 = compute_h0(n, k, p, q)?;
        Ok(if calibration_identity(n, k, p, q)? { h0 } else { h0 + 1 })
    }

    /// Checks that every principal symbol in the finite window has maximal
    /// rank at the base point.
    pub fn check_ordinary(&self) -> Result<OrdinaryReport> {
        let (n, k, p, q) = (self.spec.n(), self.spec.k(), self.spec.p(), self.spec.q());
        if self.spec.range() != Range::III {
            return Err(Error::OutOfRange {
                p: p as u64,
                q: q as u64,
                qmax: p as u64 * count(n, k as i64),
            });
        }
        let h_check = Self::required_check_level(&self.spec)?;
        if self.h_limit < h_check {
            return Err(Error::Validation(format!(
                "tower built to level {}, but ordinariness needs level {h_check}",
                self.h_limit
            )));
        }
        let mut checked = Vec::new();
        let mut failing = None;
        for h in k..=h_check {
            let expected = u64::min(
                q as u64 * count(n, (h - k) as i64),
                p as u64 * count(n, h as i64),
            );
            let actual = self.principal_block(h).rank_at_base().rank as u64;
            if actual != expected && failing.is_none() {
                failing = Some(h);
            }
            checked.push(SymbolRank { h, expected, actual });
        }
        Ok(OrdinaryReport { ordinary: failing.is_none(), checked, failing })
    }

    /// Kernel dimension of the full order-`h` system at the base point,
    /// computed by brute-force rank rather than the counting formula.
    pub fn formal_rank_oracle(&self, h: usize) -> u64 {
        self.assert_level(h);
        let cols = self.spec.p() as u64 * count_upto(self.spec.n(), h as i64);
        cols - self.matrix(h).rank_at_base().rank as u64
    }
}

/// One Leibniz step: derive a row block in one direction, extending it to
/// the next column width.
fn derive_block<T: Scalar>(
    col_table: &IndexTable,
    parent: &JetMatrix<T>,
    dir: usize,
    p: usize,
    new_max_height: usize,
) -> Result<JetMatrix<T>> {
    let parent_scount = parent.cols() / p;
    let new_cols = p * count_upto(col_table.dim(), new_max_height as i64) as usize;
    let mut entries = Vec::with_capacity(parent.rows() * new_cols);
    for r in 0..parent.rows() {
        for c in 0..new_cols {
            let (v, s_rank) = decode_col(c + 1, p);
            let mut val = if s_rank < parent_scount {
                parent.at(r, c).derive(dir)?
            } else {
                parent.space().with_order(parent.order().saturating_sub(1)).zero()
            };
            if let Some(lower) = col_table.lower(s_rank, dir) {
                if lower < parent_scount {
                    val = val.add(parent.at(r, (v - 1) + p * lower));
                }
            }
            entries.push(val);
        }
    }
    Ok(JetMatrix::from_entries(parent.rows(), new_cols, entries))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::jet::JetSpace;
    use crate::multiindex::MultiIndex;
    use crate::Rat;
    use num_traits::Zero;

    fn r(num: i64, den: i64) -> Rat {
        Rat::new(num.into(), den.into())
    }

    /// A deterministic "random enough" jet: constant plus linear terms with
    /// small rational coefficients derived from the seed.
    fn test_jet(sp: &JetSpace<Rat>, seed: i64) -> crate::jet::Jet<Rat> {
        let mut jet = sp.constant(r((seed % 11) - 5, 1 + (seed.rem_euclid(3))));
        for i in 1..=sp.n() {
            let c = r((seed * 7 + 3 * i as i64) % 9 - 4, 1 + ((seed + i as i64).rem_euclid(4)));
            jet = jet.add(&sp.coordinate(i).sub(&sp.constant(sp.base()[i - 1].clone())).scale(&c));
        }
        jet
    }

    /// The 3x2-coefficient first-order example: q=3 equations, p=2 unknowns,
    /// coefficient matrices A (order 0), B (d/dx1), C (d/dx2).
    fn first_order_example(
        sp: &JetSpace<Rat>,
    ) -> (OperatorSpec<Rat>, Vec<Vec<crate::jet::Jet<Rat>>>) {
        let mut spec = OperatorSpec::new(2, 1, 2, 3, sp.clone());
        let mut tables = Vec::new();
        for (w, key) in [
            MultiIndex::new(vec![0, 0]),
            MultiIndex::new(vec![1, 0]),
            MultiIndex::new(vec![0, 1]),
        ]
        .iter()
        .enumerate()
        {
            let mut table = Vec::new();
            for u in 1..=3 {
                for v in 1..=2 {
                    let jet = test_jet(sp, (w * 100 + u * 10 + v) as i64);
                    spec.set_coeff(u, key, v, jet.clone());
                    table.push(jet);
                }
            }
            tables.push(table);
        }
        (spec, tables)
    }

    fn block_of(table: &[crate::jet::Jet<Rat>], u: usize, v: usize) -> &crate::jet::Jet<Rat> {
        &table[(u - 1) * 2 + (v - 1)]
    }

    #[test]
    fn first_order_structure() {
        let sp: JetSpace<Rat> = JetSpace::new(2, 3, vec![r(1, 3), r(-2, 5)]);
        let (spec, tables) = first_order_example(&sp);
        let tower = Tower::build(spec, 2).unwrap();
        let (a, b, c) = (&tables[0], &tables[1], &tables[2]);

        // sigma_1 = (B C)
        let p1 = tower.principal_block(1);
        assert_eq!((p1.rows(), p1.cols()), (3, 4));
        for u in 1..=3 {
            for v in 1..=2 {
                assert!(p1.at(u - 1, v - 1).eq_to_common_order(block_of(b, u, v)));
                assert!(p1.at(u - 1, 2 + v - 1).eq_to_common_order(block_of(c, u, v)));
            }
        }

        // sigma_2 = [[B, C, 0], [0, B, C]]
        let p2 = tower.principal_block(2);
        assert_eq!((p2.rows(), p2.cols()), (6, 6));
        for u in 1..=3 {
            for v in 1..=2 {
                let bj = block_of(b, u, v);
                let cj = block_of(c, u, v);
                assert!(p2.at(u - 1, v - 1).eq_to_common_order(bj));
                assert!(p2.at(u - 1, 2 + v - 1).eq_to_common_order(cj));
                assert!(p2.at(u - 1, 4 + v - 1).is_zero());
                assert!(p2.at(3 + u - 1, v - 1).is_zero());
                assert!(p2.at(3 + u - 1, 2 + v - 1).eq_to_common_order(bj));
                assert!(p2.at(3 + u - 1, 4 + v - 1).eq_to_common_order(cj));
            }
        }

        // Q_2 = [[A'_x, A + B'_x, C'_x], [A'_y, B'_y, A + C'_y]]
        let q2 = tower.lower_block(2);
        assert_eq!((q2.rows(), q2.cols()), (6, 6));
        for u in 1..=3 {
            for v in 1..=2 {
                let aj = block_of(a, u, v);
                let bj = block_of(b, u, v);
                let cj = block_of(c, u, v);
                assert!(q2.at(u - 1, v - 1).eq_to_common_order(&aj.derive(1).unwrap()));
                assert!(q2
                    .at(u - 1, 2 + v - 1)
                    .eq_to_common_order(&aj.add(&bj.derive(1).unwrap())));
                assert!(q2.at(u - 1, 4 + v - 1).eq_to_common_order(&cj.derive(1).unwrap()));
                assert!(q2.at(3 + u - 1, v - 1).eq_to_common_order(&aj.derive(2).unwrap()));
                assert!(q2.at(3 + u - 1, 2 + v - 1).eq_to_common_order(&bj.derive(2).unwrap()));
                assert!(q2
                    .at(3 + u - 1, 4 + v - 1)
                    .eq_to_common_order(&aj.add(&cj.derive(2).unwrap())));
            }
        }
    }

    #[test]
    fn block_recursion_invariant() {
        let sp: JetSpace<Rat> = JetSpace::new(2, 4, vec![r(2, 7), r(1, 9)]);
        let (spec, _) = first_order_example(&sp);
        let tower = Tower::build(spec, 3).unwrap();
        for h in 2..=3usize {
            let m = tower.matrix(h);
            let prev = tower.matrix(h - 1).pad_cols(m.cols());
            let level = JetMatrix::hstack(&[&tower.lower_block(h), &tower.principal_block(h)]);
            let rebuilt = JetMatrix::vstack(&[&prev, &level]);
            assert!(m.eq_to_common_order(&rebuilt), "level {h}");
        }
    }

    #[test]
    fn leibniz_consistency_of_derived_blocks() {
        // Every entry of a derived block equals d_i(old entry) + old shifted
        // entry, recomputed here directly from the assembled level below.
        let sp: JetSpace<Rat> = JetSpace::new(2, 4, vec![r(1, 2), r(-1, 3)]);
        let (spec, _) = first_order_example(&sp);
        let p = spec.p();
        let tower = Tower::build(spec, 3).unwrap();
        let ct = tower.col_table();
        for w_rank in 1..tower.row_table().len() {
            let w = tower.row_table().unrank(w_rank).clone();
            let i = w.iter_dirs_present().next().unwrap();
            let t_rank = tower.row_table().rank(&w.lowered(i).unwrap()).unwrap();
            let parent = tower.block(t_rank);
            let derived = tower.block(w_rank);
            for row in 0..derived.rows() {
                for col in 0..derived.cols() {
                    let (v, s) = decode_col(col + 1, p);
                    let mut want = if col < parent.cols() {
                        parent.at(row, col).derive(i).unwrap()
                    } else {
                        sp.with_order(parent.order() - 1).zero()
                    };
                    if let Some(ls) = ct.lower(s, i) {
                        if (v - 1) + p * ls < parent.cols() {
                            want = want.add(parent.at(row, (v - 1) + p * ls));
                        }
                    }
                    assert!(derived.at(row, col).eq_to_common_order(&want));
                }
            }
        }
    }

    #[test]
    fn second_order_symbol_pattern() {
        // k=2, n=3: the order-3 symbol places each top-order block T_K at
        // exactly the columns reachable by one more derivative, blanks zero.
        let sp: JetSpace<Rat> = JetSpace::new(3, 3, vec![r(1, 3), r(1, 5), r(1, 7)]);
        let (p, q) = (2usize, 3usize);
        let mut spec = OperatorSpec::new(3, 2, p, q, sp.clone());
        let k2 = IndexTable::new(3, 2);
        let mut t_blocks = Vec::new();
        for s_rank in k2.height_range(2) {
            let key = k2.unrank(s_rank).clone();
            let mut block = Vec::new();
            for u in 1..=q {
                for v in 1..=p {
                    let jet = test_jet(&sp, (s_rank * 100 + u * 10 + v) as i64);
                    spec.set_coeff(u, &key, v, jet.clone());
                    block.push(jet);
                }
            }
            t_blocks.push((key, block));
        }
        let tower = Tower::build(spec, 3).unwrap();
        let p3 = tower.principal_block(3);
        let c3 = IndexTable::new(3, 3);
        let h2_start = c3.height_start(2);
        let h3_start = c3.height_start(3);
        assert_eq!((p3.rows(), p3.cols()), (3 * 3, 2 * 10));
        for (trow, t_rank) in (c3.height_start(1)..h2_start).enumerate() {
            let t = c3.unrank(t_rank).clone();
            for (scol, s_rank) in (h3_start..c3.len()).enumerate() {
                let s = c3.unrank(s_rank).clone();
                let expected = s.checked_sub(&t).map(|key| {
                    t_blocks
                        .iter()
                        .find(|(k, _)| *k == key)
                        .map(|(_, block)| block.clone())
                        .expect("difference has height 2")
                });
                for u in 1..=q {
                    for v in 1..=p {
                        let got = p3.at(trow * q + (u - 1), scol * p + (v - 1));
                        match &expected {
                            Some(block) => assert!(
                                got.eq_to_common_order(&block[(u - 1) * p + (v - 1)]),
                                "t={t:?} s={s:?}"
                            ),
                            None => assert!(got.is_zero(), "t={t:?} s={s:?} should be blank"),
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn ordinary_check_and_degenerate_counterexample() {
        let sp: JetSpace<Rat> = JetSpace::new(2, 3, vec![r(1, 3), r(-2, 5)]);
        let (spec, _) = first_order_example(&sp);
        let tower = Tower::build(spec, 2).unwrap();
        let report = tower.check_ordinary().unwrap();
        assert!(report.ordinary, "{:?}", report.checked);
        assert_eq!(report.checked.len(), 2);
        assert_eq!(report.checked[0], SymbolRank { h: 1, expected: 3, actual: 3 });
        assert_eq!(report.checked[1], SymbolRank { h: 2, expected: 6, actual: 6 });

        // With C = 0 the first symbol (B 0) cannot reach rank 3.
        let mut degenerate = OperatorSpec::new(2, 1, 2, 3, sp.clone());
        for u in 1..=3 {
            for v in 1..=2 {
                degenerate.set_coeff(
                    u,
                    &MultiIndex::new(vec![0, 0]),
                    v,
                    test_jet(&sp, (u * 10 + v) as i64),
                );
                degenerate.set_coeff(
                    u,
                    &MultiIndex::new(vec![1, 0]),
                    v,
                    test_jet(&sp, (100 + u * 10 + v) as i64),
                );
            }
        }
        let tower = Tower::build(degenerate, 2).unwrap();
        let report = tower.check_ordinary().unwrap();
        assert!(!report.ordinary);
        assert_eq!(report.failing, Some(1));
    }

    #[test]
    fn rank_oracle_matches_counting_formula() {
        let sp: JetSpace<Rat> = JetSpace::new(2, 3, vec![r(1, 3), r(-2, 5)]);
        let (spec, _) = first_order_example(&sp);
        let tower = Tower::build(spec, 2).unwrap();
        assert_eq!(tower.formal_rank_oracle(1), 3);
        assert_eq!(tower.formal_rank_oracle(2), 3);
    }

    #[test]
    fn insufficient_coefficient_order_is_refused() {
        let sp: JetSpace<Rat> = JetSpace::new(2, 0, vec![Rat::zero(), Rat::zero()]);
        let (spec, _) = first_order_example(&sp);
        match Tower::build(spec, 2) {
            Err(Error::InsufficientJetOrder { .. }) => {}
            other => panic!("expected insufficient order, got {other:?}"),
        }
    }
}
