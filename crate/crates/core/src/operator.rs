//! Linear homogeneous differential operators of order `k` acting on
//! `p`-vectors of unknowns through `q` scalar equations, together with the
//! integer bookkeeping that classifies them.

use crate::error::{Error, Result};
use crate::jet::{Jet, JetSpace};
use crate::matrix::JetMatrix;
use crate::multiindex::{count, count_upto, IndexTable, MultiIndex};
use crate::scalar::Scalar;

/// Position of `(p, q)` against the equation-counting thresholds.
///
/// In range I (`q <= p`) every prolongation stays under-determined; in
/// range II (`q > p*c(n,k)`) every prolongation is over-determined; range
/// III is the window in between, the one with a finite critical order.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Range {
    I,
    II,
    III,
}

impl std::fmt::Display for Range {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Range::I => write!(f, "I"),
            Range::II => write!(f, "II"),
            Range::III => write!(f, "III"),
        }
    }
}

pub fn classify_range(n: usize, k: usize, p: usize, q: usize) -> Range {
    assert!(n >= 1 && k >= 1 && p >= 1 && q >= 1);
    if q <= p {
        Range::I
    } else if (q as u64) > p as u64 * count(n, k as i64) {
        Range::II
    } else {
        Range::III
    }
}

/// Largest `h >= k` with `p*c(n,h) >= q*c(n,h-k)`; defined exactly in
/// range III, where the ratio `c(n,h-k)/c(n,h)` climbs monotonically
/// through `p/q`.
pub fn compute_h0(n: usize, k: usize, p: usize, q: usize) -> Result<usize> {
    if classify_range(n, k, p, q) != Range::III {
        return Err(Error::OutOfRange {
            p: p as u64,
            q: q as u64,
            qmax: p as u64 * count(n, k as i64),
        });
    }
    let mut h = k;
    loop {
        let next = h + 1;
        if (p as u64) * count(n, next as i64) >= (q as u64) * count(n, (next - k) as i64) {
            h = next;
        } else {
            return Ok(h);
        }
    }
}

/// `p*c(n+1,h) - q*c(n+1,h-k)` as a signed integer, valid for any `h`.
pub fn kernel_dim_formula(n: usize, k: usize, p: usize, q: usize, h: i64) -> i64 {
    let closed =
        (p as i64) * count_upto(n, h) as i64 - (q as i64) * count_upto(n, h - k as i64) as i64;
    // Telescoped form: p*c(n+1,k-1) + sum_{l=k..h} (p*c(n,l) - q*c(n,l-k)).
    if h >= (k as i64) - 1 {
        let mut acc = (p as i64) * count_upto(n, k as i64 - 1) as i64;
        let mut l = k as i64;
        while l <= h {
            acc += (p as i64) * count(n, l) as i64 - (q as i64) * count(n, l - k as i64) as i64;
            l += 1;
        }
        assert_eq!(acc, closed, "kernel-dimension formulas disagree");
    }
    closed
}

/// Fiber dimension of the space of formal solutions at order `h`
/// (range III, `k-1 <= h <= h0`; at `h = k-1` this is the full jet space).
pub fn rho(n: usize, k: usize, p: usize, q: usize, h: i64) -> Result<u64> {
    let h0 = compute_h0(n, k, p, q)? as i64;
    let lo = k as i64 - 1;
    if h < lo || h > h0 {
        return Err(Error::LevelOutOfWindow { h, lo, hi: h0 });
    }
    Ok(kernel_dim_formula(n, k, p, q, h) as u64)
}

/// The solution-space dimension bound: `rho` at the critical order.
pub fn pi(n: usize, k: usize, p: usize, q: usize) -> Result<u64> {
    let h0 = compute_h0(n, k, p, q)?;
    rho(n, k, p, q, h0 as i64)
}

/// Whether `p*c(n,h0) = q*c(n,h0-k)`, i.e. the critical-order symbol is
/// square. This is the integer half of calibration; the other half is
/// ordinariness of the actual operator.
pub fn calibration_identity(n: usize, k: usize, p: usize, q: usize) -> Result<bool> {
    let h0 = compute_h0(n, k, p, q)?;
    Ok((p as u64) * count(n, h0 as i64) == (q as u64) * count(n, (h0 - k) as i64))
}

/// Coefficient table of an order-`k` operator: one jet per
/// `(equation u, derivative multi-index K, unknown v)` with `|K| <= k`.
/// Missing coefficients are zero jets.
#[derive(Debug, Clone)]
pub struct OperatorSpec<T: Scalar> {
    n: usize,
    k: usize,
    p: usize,
    q: usize,
    space: JetSpace<T>,
    ktable: IndexTable,
    coeffs: Vec<Jet<T>>,
}

impl<T: Scalar> OperatorSpec<T> {
    pub fn new(n: usize, k: usize, p: usize, q: usize, space: JetSpace<T>) -> Self {
        assert!(n >= 1 && k >= 1 && p >= 1 && q >= 1);
        assert_eq!(space.n(), n, "jet space dimension must match the operator");
        let ktable = IndexTable::new(n, k);
        let coeffs = vec![space.zero(); q * ktable.len() * p];
        OperatorSpec { n, k, p, q, space, ktable, coeffs }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn space(&self) -> &JetSpace<T> {
        &self.space
    }

    fn slot(&self, u: usize, s_rank: usize, v: usize) -> usize {
        assert!((1..=self.q).contains(&u), "equation index out of range");
        assert!((1..=self.p).contains(&v), "unknown index out of range");
        assert!(s_rank < self.ktable.len(), "coefficient index beyond order k");
        ((u - 1) * self.ktable.len() + s_rank) * self.p + (v - 1)
    }

    pub fn set_coeff(&mut self, u: usize, key: &MultiIndex, v: usize, jet: Jet<T>) {
        assert!(key.height() <= self.k, "coefficient index beyond operator order");
        assert!(
            self.space.compatible(&jet.space()),
            "coefficient jet lives at a different base point"
        );
        let rank = self.ktable.rank(key).expect("index within table");
        let slot = self.slot(u, rank, v);
        self.coeffs[slot] = jet.truncated(self.space.order());
    }

    pub fn coeff(&self, u: usize, key: &MultiIndex, v: usize) -> &Jet<T> {
        let rank = self.ktable.rank(key).expect("index within table");
        &self.coeffs[self.slot(u, rank, v)]
    }

    pub fn coeff_by_rank(&self, u: usize, s_rank: usize, v: usize) -> &Jet<T> {
        &self.coeffs[self.slot(u, s_rank, v)]
    }

    pub fn range(&self) -> Range {
        classify_range(self.n, self.k, self.p, self.q)
    }

    /// The undifferentiated equations as a matrix: `q` rows, one column per
    /// jet component `(v, K)` with `|K| <= k`, columns in graded order.
    pub fn base_matrix(&self) -> JetMatrix<T> {
        let cols = self.p * self.ktable.len();
        JetMatrix::from_fn(self.q, cols, |r, c| {
            let (v, s) = crate::multiindex::decode_col(c + 1, self.p);
            self.coeff_by_rank(r + 1, s, v).clone()
        })
    }
}
