//! Curvilinear webs: `d` pairwise-independent direction fields on an
//! `n`-chart, compiled into the first-order operator whose solutions are the
//! web's abelian relations.
//!
//! Each foliation gets the semi-basic generator `omega = i_X(vol)`; the
//! unknown per foliation is the scalar factor in front of it. The pointwise
//! kernel constraint eliminates `n` of the `d` unknowns, the Lie-derivative
//! equations supply `d` first-order equations of which exactly one is a
//! jet-level combination of the others and is dropped.

use num_rational::BigRational;
use num_traits::Zero;

use crate::analysis::{analyze_operator, OperatorAnalysis};
use crate::connection::{
    build_adapted_frame, ConcentrationReport, Connection, Curvature, FlatnessReport,
};
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::jet::{Jet, JetSpace};
use crate::matrix::{JetMatrix, ScalarMat};
use crate::multiindex::{count, MultiIndex};
use crate::operator::{pi, OperatorSpec};
use crate::scalar::Scalar;
use crate::tower::Tower;

/// A `d`-web on an `n`-chart: the direction field of each foliation as a row
/// of rational-function expressions, plus the expansion point.
#[derive(Debug, Clone)]
pub struct WebSpec {
    pub n: usize,
    pub d: usize,
    /// `fields[lambda][i]` is the `i`-th component of the `lambda`-th field.
    pub fields: Vec<Vec<Expr>>,
    pub base_point: Vec<BigRational>,
}

impl WebSpec {
    pub fn new(n: usize, fields: Vec<Vec<Expr>>, base_point: Vec<BigRational>) -> Self {
        let d = fields.len();
        WebSpec { n, d, fields, base_point }
    }

    /// Checks the shape, the absence of poles at the base point, and that
    /// every `n` of the `d` directions are linearly independent there.
    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::Validation("webs need an ambient dimension n >= 2".into()));
        }
        if self.d <= self.n {
            return Err(Error::Validation(format!(
                "webs need more foliations than dimensions (d = {}, n = {})",
                self.d, self.n
            )));
        }
        if self.fields.len() != self.d || self.fields.iter().any(|row| row.len() != self.n) {
            return Err(Error::Validation("field table must be d rows of n expressions".into()));
        }
        if self.base_point.len() != self.n {
            return Err(Error::Validation("base point must have n coordinates".into()));
        }
        let space: JetSpace<BigRational> = JetSpace::from_rationals(self.n, 0, &self.base_point);
        let mut values: Vec<Vec<BigRational>> = Vec::with_capacity(self.d);
        for (lambda, row) in self.fields.iter().enumerate() {
            let mut vals = Vec::with_capacity(self.n);
            for e in row {
                vals.push(e.compile(&space)?.constant_term());
            }
            if vals.iter().all(Zero::is_zero) {
                return Err(Error::DegenerateBasePoint {
                    what: format!("field {} vanishes at the base point", lambda + 1),
                });
            }
            values.push(vals);
        }
        for subset in combinations(self.d, self.n) {
            let m = ScalarMat::from_fn(self.n, self.n, |r, c| values[subset[r]][c].clone());
            if m.rank() < self.n {
                let human: Vec<usize> = subset.iter().map(|l| l + 1).collect();
                return Err(Error::DegenerateBasePoint {
                    what: format!("fields {human:?} are linearly dependent at the base point"),
                });
            }
        }
        Ok(())
    }
}

fn combinations(d: usize, n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(n);
    fn rec(start: usize, d: usize, n: usize, current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if current.len() == n {
            out.push(current.clone());
            return;
        }
        for v in start..d {
            current.push(v);
            rec(v + 1, d, n, current, out);
            current.pop();
        }
    }
    rec(0, d, n, &mut current, &mut out);
    out
}

/// Components of the Lie derivative `L_X omega` of an `(n-1)`-form
/// `omega = sum_i w_i i_{d_i}(vol)`, on the same component basis:
///
/// `(L_X omega)_i = div(w) x_i + sum_{j != i} d_j (w_i x_j - w_j x_i)`.
///
/// Derived from `L_X = i_X d + d i_X`; costs one usable order.
pub fn lie_derivative_semibasic<T: Scalar>(x: &[Jet<T>], w: &[Jet<T>]) -> Result<Vec<Jet<T>>> {
    let n = x.len();
    assert_eq!(w.len(), n);
    let mut div = w[0].derive(1)?;
    for (j, wj) in w.iter().enumerate().skip(1) {
        div = div.add(&wj.derive(j + 1)?);
    }
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut acc = div.mul(&x[i]);
        for j in 0..n {
            if j == i {
                continue;
            }
            let u = w[i].mul(&x[j]).sub(&w[j].mul(&x[i]));
            acc = acc.add(&u.derive(j + 1)?);
        }
        out.push(acc);
    }
    Ok(out)
}

/// The abelian-relation operator of a web, with the bookkeeping of the
/// elimination that produced it.
#[derive(Debug, Clone)]
pub struct WebOperator<T: Scalar> {
    pub op: OperatorSpec<T>,
    /// Compiled direction components, `d` rows of `n` jets.
    pub directions: Vec<Vec<Jet<T>>>,
    /// Lie-derivative factors `g_lambda` with `L omega = g omega`.
    pub g: Vec<Jet<T>>,
    /// 1-based foliations whose unknowns were eliminated (n of them).
    pub eliminated: Vec<usize>,
    /// 1-based foliations carrying the surviving unknowns (d - n of them).
    pub free: Vec<usize>,
    /// `f_eliminated = substitution * f_free`, one row per eliminated field.
    pub substitution: JetMatrix<T>,
    /// 1-based raw equation dropped as jet-level dependent.
    pub dropped_row: usize,
    /// 1-based raw equations kept, in order, as the operator's equations.
    pub kept_rows: Vec<usize>,
}

impl<T: Scalar> WebOperator<T> {
    /// Extends the surviving unknowns back to all `d` foliation factors.
    pub fn reconstruct_relation(&self, section: &[Jet<T>]) -> Vec<Jet<T>> {
        let p = self.free.len();
        assert_eq!(section.len(), p);
        let d = self.directions.len();
        let mut out: Vec<Option<Jet<T>>> = vec![None; d];
        for (pos, &lambda) in self.free.iter().enumerate() {
            out[lambda - 1] = Some(section[pos].clone());
        }
        for (row, &lambda) in self.eliminated.iter().enumerate() {
            let mut acc = self.substitution.at(row, 0).mul(&section[0]);
            for (col, s) in section.iter().enumerate().skip(1) {
                acc = acc.add(&self.substitution.at(row, col).mul(s));
            }
            out[lambda - 1] = Some(acc);
        }
        out.into_iter().map(|j| j.expect("all factors assigned")).collect()
    }

    /// Residuals of the defining equations `d_lambda f_lambda + g_lambda
    /// f_lambda` on a full family of foliation factors; zero jets iff the
    /// family is an abelian relation to the usable order.
    pub fn relation_residuals(&self, relation: &[Jet<T>]) -> Result<Vec<Jet<T>>> {
        let d = self.directions.len();
        assert_eq!(relation.len(), d);
        let mut out = Vec::with_capacity(d);
        for lambda in 0..d {
            let f = &relation[lambda];
            let mut acc = self.g[lambda].mul(f);
            for (i, a) in self.directions[lambda].iter().enumerate() {
                acc = acc.add(&a.mul(&f.derive(i + 1)?));
            }
            out.push(acc);
        }
        Ok(out)
    }
}

/// Compiles a web into its abelian-relation operator with coefficients
/// usable to `op_order`. `pivots` overrides the eliminated foliations.
pub fn web_operator<T: Scalar>(
    web: &WebSpec,
    op_order: usize,
    pivots: Option<&[usize]>,
) -> Result<WebOperator<T>> {
    web.validate()?;
    let (n, d) = (web.n, web.d);
    let p = d - n;
    // one order is spent differentiating the substitution and the generators
    let space: JetSpace<T> = JetSpace::from_rationals(n, op_order + 1, &web.base_point);

    let mut directions: Vec<Vec<Jet<T>>> = Vec::with_capacity(d);
    for row in &web.fields {
        let jets: Result<Vec<Jet<T>>> = row.iter().map(|e| e.compile(&space)).collect();
        directions.push(jets?);
    }

    // L_X omega = g omega, extracted from any unit component and checked on
    // all of them.
    let mut g = Vec::with_capacity(d);
    for (lambda, a_row) in directions.iter().enumerate() {
        let l = lie_derivative_semibasic(a_row, a_row)?;
        let i0 = (0..n).find(|&i| a_row[i].is_unit()).ok_or_else(|| {
            Error::DegenerateBasePoint {
                what: format!("field {} vanishes at the base point", lambda + 1),
            }
        })?;
        let g_lambda = l[i0].mul(&a_row[i0].invert()?);
        for (j, lj) in l.iter().enumerate() {
            if !lj.eq_to_common_order(&g_lambda.mul(&a_row[j])) {
                return Err(Error::Internal(format!(
                    "Lie derivative of generator {} is not proportional to it",
                    lambda + 1
                )));
            }
        }
        g.push(g_lambda);
    }

    // choose the n unknowns to eliminate
    let eliminated0: Vec<usize> = match pivots {
        Some(set) => {
            let mut set0: Vec<usize> = set.iter().map(|&l| l - 1).collect();
            if set0.len() != n || set0.iter().any(|&l| l >= d) {
                return Err(Error::Validation(format!(
                    "pivot override must list {n} distinct foliations in 1..={d}"
                )));
            }
            set0.sort_unstable();
            set0.dedup();
            if set0.len() != n {
                return Err(Error::Validation("pivot override has duplicates".into()));
            }
            set0
        }
        None => {
            let coordinate_like = |row: &Vec<Jet<T>>| {
                row.iter().filter(|jet| !jet.is_zero()).count() == 1
                    && row.iter().all(|jet| {
                        jet.is_zero() || jet.coeffs().all(|(ix, _)| ix.height() == 0)
                    })
            };
            let mut order: Vec<usize> = (0..d).filter(|&l| coordinate_like(&directions[l])).collect();
            order.extend((0..d).filter(|&l| !coordinate_like(&directions[l])));
            let mut chosen: Vec<usize> = Vec::with_capacity(n);
            for cand in order {
                if chosen.len() == n {
                    break;
                }
                let mut trial = chosen.clone();
                trial.push(cand);
                let m = ScalarMat::from_fn(n, trial.len(), |r, c| {
                    directions[trial[c]][r].constant_term()
                });
                if m.rank() == trial.len() {
                    chosen = trial;
                }
            }
            if chosen.len() != n {
                return Err(Error::DegenerateBasePoint {
                    what: "no invertible set of directions to eliminate".into(),
                });
            }
            chosen.sort_unstable();
            chosen
        }
    };
    let free0: Vec<usize> = (0..d).filter(|l| !eliminated0.contains(l)).collect();

    // kernel constraint sum_lambda a_lambda^i f_lambda = 0 solved for the
    // eliminated unknowns: f_P = -C_P^{-1} C_F f_F
    let c_p = JetMatrix::from_fn(n, n, |i, c| directions[eliminated0[c]][i].clone());
    let c_f = JetMatrix::from_fn(n, p, |i, c| directions[free0[c]][i].clone());
    let substitution = c_p
        .invert_square()
        .map_err(|e| match e {
            Error::NotInvertibleAtBase => Error::DegenerateBasePoint {
                what: "chosen elimination directions are dependent at the base point".into(),
            },
            other => other,
        })?
        .mul(&c_f)
        .neg();

    // d raw first-order equations in the p surviving unknowns
    let width = p * (n + 1);
    let mut raw_entries = Vec::with_capacity(d * width);
    for lambda in 0..d {
        for col in 0..width {
            let (v, s) = crate::multiindex::decode_col(col + 1, p);
            let mu = v - 1;
            let entry = match eliminated0.iter().position(|&e| e == lambda) {
                None => {
                    // untouched unknown: d_lambda f + g f = 0
                    let pos = free0.iter().position(|&f| f == lambda).expect("free field");
                    if pos != mu {
                        space.zero()
                    } else if s == 0 {
                        g[lambda].clone()
                    } else {
                        directions[lambda][s - 1].clone()
                    }
                }
                Some(row) => {
                    let h = substitution.at(row, mu);
                    if s == 0 {
                        // sum_i a^i d_i H + g H
                        let mut acc = g[lambda].mul(h);
                        for (i, a) in directions[lambda].iter().enumerate() {
                            acc = acc.add(&a.mul(&h.derive(i + 1)?));
                        }
                        acc
                    } else {
                        directions[lambda][s - 1].mul(h)
                    }
                }
            };
            raw_entries.push(entry);
        }
    }
    let raw = JetMatrix::from_entries(d, width, raw_entries);

    let profile = raw.rank_at_base();
    if profile.rank != d - 1 {
        return Err(Error::DegenerateBasePoint {
            what: format!(
                "substituted system has rank {} at the base point, expected {}",
                profile.rank,
                d - 1
            ),
        });
    }
    let mut kept: Vec<usize> = profile.pivot_rows.clone();
    kept.sort_unstable();
    let dropped = (0..d).find(|r| !kept.contains(r)).expect("one dependent row");

    // the dropped equation must be a jet-level combination of the kept ones
    let all_cols: Vec<usize> = (0..width).collect();
    let kept_m = raw.select(&kept, &all_cols);
    let square = raw.select(&kept, &profile.pivot_cols);
    let inv = square.invert_square().map_err(|_| {
        Error::Internal("pivot minor of the substituted system is singular".into())
    })?;
    let dropped_piv = raw.select(&[dropped], &profile.pivot_cols);
    let combo = dropped_piv.mul(&inv).mul(&kept_m);
    if !combo.eq_to_common_order(&raw.select(&[dropped], &all_cols)) {
        return Err(Error::Internal(
            "dropped equation is not a jet-level combination of the kept ones".into(),
        ));
    }

    let mut op = OperatorSpec::new(n, 1, p, d - 1, space.with_order(op_order));
    for (u0, &row) in kept.iter().enumerate() {
        for v in 1..=p {
            op.set_coeff(u0 + 1, &MultiIndex::zero(n), v, raw.at(row, v - 1).clone());
            for i in 1..=n {
                op.set_coeff(
                    u0 + 1,
                    &MultiIndex::unit(n, i),
                    v,
                    raw.at(row, (v - 1) + p * i).clone(),
                );
            }
        }
    }

    Ok(WebOperator {
        op,
        directions,
        g,
        eliminated: eliminated0.iter().map(|l| l + 1).collect(),
        free: free0.iter().map(|l| l + 1).collect(),
        substitution,
        dropped_row: dropped + 1,
        kept_rows: kept.iter().map(|r| r + 1).collect(),
    })
}

/// The closed-form maximal rank of a curvilinear `d`-web on an `n`-chart:
/// `sum_{h=0}^{d-n-1} c(n-1, h) (d-n-h)`, checked against both
/// `binomial(d-1, n)` and the prolongation bound before returning.
pub fn damiano_bound(n: usize, d: usize) -> u64 {
    assert!(n >= 2 && d > n, "webs need d > n >= 2");
    let sum: u64 = (0..=(d - n - 1) as i64)
        .map(|h| count(n - 1, h) * (d as i64 - n as i64 - h) as u64)
        .sum();
    let binom = count(n + 1, (d - 1 - n) as i64);
    assert_eq!(sum, binom, "closed forms of the web rank bound disagree");
    let from_pi = pi(n, 1, d - n, d - 1).expect("web parameters sit in range III");
    assert_eq!(sum, from_pi, "web rank bound disagrees with the prolongation bound");
    sum
}

/// The standard one-parameter `(n+3)`-web family: the `n` coordinate
/// fields plus three pencils of directions anchored at `-c`, `1+c`, and
/// `{0, 1}`. At `c = 0` it degenerates to the exceptional web of maximal
/// rank (Bol's web for `n = 2`).
pub fn wc_family(
    n: usize,
    c: &BigRational,
    base_point: Option<Vec<BigRational>>,
) -> Result<WebSpec> {
    if n < 2 {
        return Err(Error::Validation("the family needs n >= 2".into()));
    }
    let one_plus_c = BigRational::from_integer(1.into()) + c.clone();
    let mut fields: Vec<Vec<Expr>> = Vec::with_capacity(n + 3);
    for i in 1..=n {
        fields.push(
            (1..=n)
                .map(|j| if i == j { Expr::int(1) } else { Expr::int(0) })
                .collect(),
        );
    }
    // (x_i + c) / (x_n + c)
    fields.push(
        (1..=n)
            .map(|i| {
                Expr::var(i)
                    .add(Expr::rat(c.clone()))
                    .div(Expr::var(n).add(Expr::rat(c.clone())))
            })
            .collect(),
    );
    // (x_i - 1 - c) / (x_n - 1 - c)
    fields.push(
        (1..=n)
            .map(|i| {
                Expr::var(i)
                    .sub(Expr::rat(one_plus_c.clone()))
                    .div(Expr::var(n).sub(Expr::rat(one_plus_c.clone())))
            })
            .collect(),
    );
    // x_i (x_i - 1) / (x_n (x_n - 1))
    fields.push(
        (1..=n)
            .map(|i| {
                Expr::var(i)
                    .mul(Expr::var(i).sub(Expr::int(1)))
                    .div(Expr::var(n).mul(Expr::var(n).sub(Expr::int(1))))
            })
            .collect(),
    );

    match base_point {
        Some(base) => {
            let web = WebSpec::new(n, fields, base);
            web.validate()?;
            Ok(web)
        }
        None => {
            // deterministic search over small rationals in (0, 1)
            let mut state: u64 = 0x9E37_79B9_7F4A_7C15 ^ ((n as u64) << 32);
            let mut next = move || {
                state = state
                    .wrapping_mul(6364136223846793005)
                    .wrapping_add(1442695040888963407);
                state >> 33
            };
            for _ in 0..400 {
                let base: Vec<BigRational> = (0..n)
                    .map(|_| {
                        let num = 1 + (next() % 89) as i64;
                        let den = 90 + (next() % 157) as i64;
                        BigRational::new(num.into(), den.into())
                    })
                    .collect();
                let web = WebSpec::new(n, fields.clone(), base);
                if web.validate().is_ok() {
                    return Ok(web);
                }
            }
            Err(Error::DegenerateBasePoint {
                what: "no admissible base point found for the family".into(),
            })
        }
    }
}

/// Everything the web pipeline produces.
#[derive(Debug, Clone)]
pub struct WebAnalysis<T: Scalar> {
    pub operator: WebOperator<T>,
    pub tower: Tower<T>,
    pub analysis: OperatorAnalysis,
    pub connection: Connection<T>,
    pub curvature: Curvature<T>,
    pub flatness: FlatnessReport,
    pub concentration: ConcentrationReport,
    pub damiano_bound: u64,
}

#[derive(Debug, Clone, Default)]
pub struct WebOptions {
    /// Usable order of the operator coefficients; the default supports the
    /// curvature plus two guard orders.
    pub jet_order: Option<usize>,
    /// Overrides which foliation factors are eliminated (1-based).
    pub pivots: Option<Vec<usize>>,
}

/// Full pipeline: operator, tower, ordinariness, frame, connection,
/// curvature, flatness and concentration verdicts. Errors carry the stage
/// they occurred in.
pub fn analyze_web<T: Scalar>(web: &WebSpec, options: &WebOptions) -> Result<WebAnalysis<T>> {
    web.validate().map_err(|e| e.at_stage("validate"))?;
    let (n, d) = (web.n, web.d);
    let h0 = d - n;
    let op_order = options.jet_order.unwrap_or(h0 - 1 + 3);
    let operator: WebOperator<T> = web_operator(web, op_order, options.pivots.as_deref())
        .map_err(|e| e.at_stage("web_operator"))?;
    let analyzed = analyze_operator(operator.op.clone(), None)
        .map_err(|e| e.at_stage("prolongation"))?;
    let analysis = analyzed.analysis;
    let tower = analyzed.tower.expect("web operators sit in range III");
    if analysis.h0 != Some(h0) {
        return Err(Error::Internal(format!(
            "critical order {:?} disagrees with d - n = {h0}",
            analysis.h0
        )));
    }
    let ordinary = analysis.ordinary.as_ref().expect("range III analysis");
    if !ordinary.ordinary {
        let level = ordinary.failing.unwrap_or(0);
        return Err(Error::DegenerateBasePoint {
            what: format!("web operator symbol is rank-deficient at level {level}"),
        }
        .at_stage("ordinary"));
    }
    if analysis.calibrated != Some(true) {
        return Err(Error::Internal("web operator failed the calibration identity".into()));
    }
    let frame = build_adapted_frame(&tower).map_err(|e| e.at_stage("frame"))?;
    let connection =
        Connection::build(&tower, frame).map_err(|e| e.at_stage("connection"))?;
    let curvature = connection.curvature().map_err(|e| e.at_stage("curvature"))?;
    let flatness = connection.flatness(&curvature);
    let concentration = connection
        .concentration(&curvature)
        .map_err(|e| e.at_stage("concentration"))?;
    let bound = damiano_bound(n, d);
    if analysis.solution_bound != Some(bound) {
        return Err(Error::Internal(
            "prolongation bound disagrees with the web rank bound".into(),
        ));
    }
    Ok(WebAnalysis {
        operator,
        tower,
        analysis,
        connection,
        curvature,
        flatness,
        concentration,
        damiano_bound: bound,
    })
}
