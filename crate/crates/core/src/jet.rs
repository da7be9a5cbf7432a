//! Truncated multivariate Taylor expansions at a fixed base point.
//!
//! A [`Jet`] stores the coefficients of a function's expansion up to a
//! truncation order, together with the number of usable orders left: every
//! derivation consumes one order, and operations that would need more refuse
//! with an explicit error instead of silently returning truncated garbage.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_rational::BigRational;

use crate::error::{Error, Result};
use crate::multiindex::{indices_of_height, MultiIndex};
use crate::scalar::Scalar;

/// Shared expansion context: variable count, default truncation order, and
/// the base point all jets of one analysis are expanded at.
#[derive(Debug, Clone, PartialEq)]
pub struct JetSpace<T: Scalar> {
    n: usize,
    order: usize,
    base: Arc<Vec<T>>,
}

impl<T: Scalar> JetSpace<T> {
    pub fn new(n: usize, order: usize, base: Vec<T>) -> Self {
        assert!(n >= 1 && base.len() == n, "base point must have n coordinates");
        JetSpace { n, order, base: Arc::new(base) }
    }

    pub fn from_rationals(n: usize, order: usize, base: &[BigRational]) -> Self {
        Self::new(n, order, base.iter().map(T::from_rational).collect())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn base(&self) -> &[T] {
        &self.base
    }

    /// Same base point and dimension, different default order.
    pub fn with_order(&self, order: usize) -> Self {
        JetSpace { n: self.n, order, base: self.base.clone() }
    }

    pub fn zero(&self) -> Jet<T> {
        Jet { n: self.n, order: self.order, base: self.base.clone(), coeffs: BTreeMap::new() }
    }

    pub fn constant(&self, c: T) -> Jet<T> {
        let mut jet = self.zero();
        if !c.is_zero() {
            jet.coeffs.insert(MultiIndex::zero(self.n), c);
        }
        jet
    }

    pub fn one(&self) -> Jet<T> {
        self.constant(T::one())
    }

    pub fn rational(&self, q: &BigRational) -> Jet<T> {
        self.constant(T::from_rational(q))
    }

    /// The coordinate function `x_i` (1-based), i.e. `base_i + (x_i - base_i)`.
    pub fn coordinate(&self, i: usize) -> Jet<T> {
        assert!((1..=self.n).contains(&i), "coordinate index out of range");
        let mut jet = self.constant(self.base[i - 1].clone());
        if self.order >= 1 {
            jet.coeffs.insert(MultiIndex::unit(self.n, i), T::one());
        }
        jet
    }

    pub fn from_coeffs(&self, coeffs: impl IntoIterator<Item = (MultiIndex, T)>) -> Jet<T> {
        let mut jet = self.zero();
        for (ix, c) in coeffs {
            assert_eq!(ix.dim(), self.n);
            assert!(ix.height() <= self.order, "coefficient beyond truncation order");
            if !c.is_zero() {
                jet.coeffs.insert(ix, c);
            }
        }
        jet
    }

    pub fn compatible(&self, other: &JetSpace<T>) -> bool {
        self.n == other.n && (Arc::ptr_eq(&self.base, &other.base) || *self.base == *other.base)
    }
}

/// A function germ known up to `order` derivatives: exact Taylor coefficients
/// indexed by multi-index, at a shared base point.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet<T: Scalar> {
    n: usize,
    order: usize,
    base: Arc<Vec<T>>,
    coeffs: BTreeMap<MultiIndex, T>,
}

impl<T: Scalar> Jet<T> {
    pub fn n(&self) -> usize {
        self.n
    }

    /// Usable truncation order; coefficients above it are unknown.
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn base(&self) -> &[T] {
        &self.base
    }

    pub fn space(&self) -> JetSpace<T> {
        JetSpace { n: self.n, order: self.order, base: self.base.clone() }
    }

    pub fn coeff(&self, ix: &MultiIndex) -> T {
        debug_assert!(ix.height() <= self.order, "reading coefficient beyond usable order");
        self.coeffs.get(ix).cloned().unwrap_or_else(T::zero)
    }

    /// Value at the base point.
    pub fn constant_term(&self) -> T {
        self.coeff(&MultiIndex::zero(self.n))
    }

    pub fn coeffs(&self) -> impl Iterator<Item = (&MultiIndex, &T)> {
        self.coeffs.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Whether the constant term is invertible.
    pub fn is_unit(&self) -> bool {
        !self.constant_term().is_zero()
    }

    fn assert_compatible(&self, other: &Jet<T>) {
        assert_eq!(self.n, other.n, "jet dimension mismatch");
        assert!(
            Arc::ptr_eq(&self.base, &other.base) || *self.base == *other.base,
            "jet base-point mismatch"
        );
    }

    /// Copy truncated to `order` (never raises the order).
    pub fn truncated(&self, order: usize) -> Jet<T> {
        let order = order.min(self.order);
        let coeffs = self
            .coeffs
            .iter()
            .filter(|(ix, _)| ix.height() <= order)
            .map(|(ix, c)| (ix.clone(), c.clone()))
            .collect();
        Jet { n: self.n, order, base: self.base.clone(), coeffs }
    }

    pub fn add(&self, other: &Jet<T>) -> Jet<T> {
        self.assert_compatible(other);
        let order = self.order.min(other.order);
        let mut coeffs: BTreeMap<MultiIndex, T> = self
            .coeffs
            .iter()
            .filter(|(ix, _)| ix.height() <= order)
            .map(|(ix, c)| (ix.clone(), c.clone()))
            .collect();
        for (ix, c) in &other.coeffs {
            if ix.height() > order {
                continue;
            }
            let entry = coeffs.entry(ix.clone()).or_insert_with(T::zero);
            *entry = entry.clone() + c.clone();
            if entry.is_zero() {
                coeffs.remove(ix);
            }
        }
        Jet { n: self.n, order, base: self.base.clone(), coeffs }
    }

    pub fn neg(&self) -> Jet<T> {
        let coeffs = self.coeffs.iter().map(|(ix, c)| (ix.clone(), -c.clone())).collect();
        Jet { n: self.n, order: self.order, base: self.base.clone(), coeffs }
    }

    pub fn sub(&self, other: &Jet<T>) -> Jet<T> {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: &T) -> Jet<T> {
        if c.is_zero() {
            let mut z = self.clone();
            z.coeffs.clear();
            return z;
        }
        let coeffs = self
            .coeffs
            .iter()
            .filter_map(|(ix, v)| {
                let w = c.clone() * v.clone();
                (!w.is_zero()).then(|| (ix.clone(), w))
            })
            .collect();
        Jet { n: self.n, order: self.order, base: self.base.clone(), coeffs }
    }

    /// Truncated Cauchy product.
    pub fn mul(&self, other: &Jet<T>) -> Jet<T> {
        self.assert_compatible(other);
        let order = self.order.min(other.order);
        let mut coeffs: BTreeMap<MultiIndex, T> = BTreeMap::new();
        for (ix, a) in &self.coeffs {
            let ha = ix.height();
            if ha > order {
                continue;
            }
            for (jx, b) in &other.coeffs {
                if ha + jx.height() > order {
                    continue;
                }
                let target = ix.plus(jx);
                let entry = coeffs.entry(target.clone()).or_insert_with(T::zero);
                *entry = entry.clone() + a.clone() * b.clone();
                if entry.is_zero() {
                    coeffs.remove(&target);
                }
            }
        }
        Jet { n: self.n, order, base: self.base.clone(), coeffs }
    }

    pub fn pow(&self, e: u32) -> Jet<T> {
        let mut acc = self.space().one();
        for _ in 0..e {
            acc = acc.mul(self);
        }
        acc
    }

    /// Partial derivative in direction `i` (1-based); costs one usable order.
    pub fn derive(&self, i: usize) -> Result<Jet<T>> {
        assert!((1..=self.n).contains(&i), "derivation direction out of range");
        if self.order == 0 {
            return Err(Error::InsufficientJetOrder { needed: 1, have: 0 });
        }
        let order = self.order - 1;
        let mut coeffs = BTreeMap::new();
        for (jx, c) in &self.coeffs {
            if let Some(ix) = jx.lowered(i) {
                let factor = T::from_int(jx.entry(i) as i64);
                let w = factor * c.clone();
                if !w.is_zero() && ix.height() <= order {
                    coeffs.insert(ix, w);
                }
            }
        }
        Ok(Jet { n: self.n, order, base: self.base.clone(), coeffs })
    }

    /// Multiplicative inverse; requires a nonzero constant term.
    pub fn invert(&self) -> Result<Jet<T>> {
        let a0 = self.constant_term();
        if a0.is_zero() {
            return Err(Error::NonUnitJet);
        }
        let r0 = T::one() / a0;
        let mut inv: BTreeMap<MultiIndex, T> = BTreeMap::new();
        inv.insert(MultiIndex::zero(self.n), r0.clone());
        // b_I = -1/a_0 * sum_{0<J<=I} a_J b_{I-J}, filled in by height.
        for h in 1..=self.order {
            for target in indices_of_height(self.n, h) {
                let mut s = T::zero();
                for (jx, a) in &self.coeffs {
                    if jx.height() == 0 {
                        continue;
                    }
                    if let Some(rest) = target.checked_sub(jx) {
                        if let Some(b) = inv.get(&rest) {
                            s = s + a.clone() * b.clone();
                        }
                    }
                }
                if !s.is_zero() {
                    inv.insert(target, -(r0.clone() * s));
                }
            }
        }
        Ok(Jet { n: self.n, order: self.order, base: self.base.clone(), coeffs: inv })
    }

    /// Coefficient-wise equality up to height `order`.
    pub fn eq_to_order(&self, other: &Jet<T>, order: usize) -> bool {
        self.assert_compatible(other);
        assert!(
            order <= self.order && order <= other.order,
            "comparison order exceeds usable order"
        );
        let keys: std::collections::BTreeSet<&MultiIndex> = self
            .coeffs
            .keys()
            .chain(other.coeffs.keys())
            .filter(|ix| ix.height() <= order)
            .collect();
        keys.into_iter().all(|ix| self.coeff(ix) == other.coeff(ix))
    }

    /// Equality up to the smaller of the two usable orders.
    pub fn eq_to_common_order(&self, other: &Jet<T>) -> bool {
        self.eq_to_order(other, self.order.min(other.order))
    }
}

impl<T: Scalar> fmt::Display for Jet<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0 (+O^{})", self.order + 1);
        }
        let mut first = true;
        for (ix, c) in &self.coeffs {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            if ix.height() == 0 {
                write!(f, "{c}")?;
            } else {
                write!(f, "({c})")?;
                for (k, e) in ix.entries().iter().enumerate() {
                    match e {
                        0 => {}
                        1 => write!(f, "*d{}", k + 1)?,
                        _ => write!(f, "*d{}^{}", k + 1, e)?,
                    }
                }
            }
        }
        write!(f, " (+O^{})", self.order + 1)
    }
}
