//! One-call classification of an operator: range, critical order, symbol
//! ranks, calibration, and the kernel-dimension table.

use crate::error::Result;
use crate::operator::{
    calibration_identity, compute_h0, kernel_dim_formula, OperatorSpec, Range,
};
use crate::scalar::Scalar;
use crate::tower::{OrdinaryReport, Tower};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OperatorAnalysis {
    pub range: Range,
    /// Critical order; present exactly in range III.
    pub h0: Option<usize>,
    /// Symbol-rank report over the finite check window (range III).
    pub ordinary: Option<OrdinaryReport>,
    /// Ordinary and the critical symbol is square.
    pub calibrated: Option<bool>,
    /// `(h, dim R_h)` for `k-1 <= h <= h0` (range III only).
    pub kernel_dims: Vec<(i64, u64)>,
    /// Upper bound for the dimension of the solution space; present iff
    /// range III and ordinary.
    pub solution_bound: Option<u64>,
    /// In range II the only general bound: the rank of the lower jet space.
    pub lower_jet_bound: Option<u64>,
}

/// An analyzed operator, with the tower kept when one was built.
#[derive(Debug, Clone)]
pub struct AnalyzedOperator<T: Scalar> {
    pub tower: Option<Tower<T>>,
    pub analysis: OperatorAnalysis,
}

/// Classifies the operator and, in range III, builds the tower and runs the
/// finite ordinariness check. `h_limit_request` forces a deeper tower (for
/// rank oracles); outside range III a tower is built only on request.
pub fn analyze_operator<T: Scalar>(
    spec: OperatorSpec<T>,
    h_limit_request: Option<usize>,
) -> Result<AnalyzedOperator<T>> {
    let (n, k, p, q) = (spec.n(), spec.k(), spec.p(), spec.q());
    let range = spec.range();
    match range {
        Range::I | Range::II => {
            let lower_jet_bound = (range == Range::II)
                .then(|| p as u64 * crate::multiindex::count_upto(n, k as i64 - 1));
            let tower = match h_limit_request {
                Some(h) => Some(Tower::build(spec, h.max(k))?),
                None => None,
            };
            Ok(AnalyzedOperator {
                tower,
                analysis: OperatorAnalysis {
                    range,
                    h0: None,
                    ordinary: None,
                    calibrated: None,
                    kernel_dims: Vec::new(),
                    solution_bound: None,
                    lower_jet_bound,
                },
            })
        }
        Range::III => {
            let h0 = compute_h0(n, k, p, q)?;
            let h_check = Tower::<T>::required_check_level(&spec)?;
            let h_limit = h_check.max(h_limit_request.unwrap_or(0));
            let tower = Tower::build(spec, h_limit)?;
            let ordinary = tower.check_ordinary()?;
            let is_ordinary = ordinary.ordinary;
            let calibrated = is_ordinary && calibration_identity(n, k, p, q)?;
            let kernel_dims: Vec<(i64, u64)> = ((k as i64 - 1)..=(h0 as i64))
                .map(|h| (h, kernel_dim_formula(n, k, p, q, h) as u64))
                .collect();
            let solution_bound = is_ordinary.then(|| kernel_dims.last().unwrap().1);
            Ok(AnalyzedOperator {
                tower: Some(tower),
                analysis: OperatorAnalysis {
                    range,
                    h0: Some(h0),
                    ordinary: Some(ordinary),
                    calibrated: Some(calibrated),
                    kernel_dims,
                    solution_bound,
                    lower_jet_bound: None,
                },
            })
        }
    }
}
