//! On-disk input formats. Rationals travel as strings (`"a/b"` or `"a"`);
//! floats are rejected everywhere.

use std::path::Path;
use std::str::FromStr;

use num_rational::BigRational;
use serde::Deserialize;

use jetpde::{Error, Expr, MultiIndex, OperatorSpec, Rat, RatJetSpace, Result, WebSpec};

pub fn parse_rational(text: &str) -> Result<BigRational> {
    let trimmed = text.trim();
    if trimmed.contains('.') {
        return Err(Error::Validation(format!(
            "`{trimmed}` looks like a decimal; rationals must be written exactly as a/b or an integer"
        )));
    }
    BigRational::from_str(trimmed)
        .map_err(|e| Error::Validation(format!("cannot parse rational `{trimmed}`: {e}")))
}

pub fn parse_base_list(text: &str) -> Result<Vec<BigRational>> {
    text.split(',').map(parse_rational).collect()
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorFile {
    pub n: usize,
    pub k: usize,
    pub p: usize,
    pub q: usize,
    pub base_point: Vec<String>,
    #[serde(default)]
    pub jet_order: Option<usize>,
    pub coefficients: Vec<CoefficientEntry>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoefficientEntry {
    pub u: usize,
    #[serde(rename = "K")]
    pub key: Vec<usize>,
    pub v: usize,
    pub expr: String,
}

/// Parsed, validated operator input, ready to compile at any base point.
#[derive(Debug, Clone)]
pub struct OperatorInput {
    pub n: usize,
    pub k: usize,
    pub p: usize,
    pub q: usize,
    pub base_point: Vec<BigRational>,
    pub jet_order: Option<usize>,
    pub coefficients: Vec<(usize, MultiIndex, usize, Expr)>,
}

impl OperatorInput {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Validation(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json_str(&text)
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let file: OperatorFile = serde_json::from_str(text)
            .map_err(|e| Error::Validation(format!("invalid operator file: {e}")))?;
        Self::from_parts(file)
    }

    fn from_parts(file: OperatorFile) -> Result<Self> {
        if file.n < 1 || file.k < 1 || file.p < 1 || file.q < 1 {
            return Err(Error::Validation("n, k, p, q must all be positive".into()));
        }
        if file.base_point.len() != file.n {
            return Err(Error::Validation(format!(
                "base_point has {} coordinates, expected n = {}",
                file.base_point.len(),
                file.n
            )));
        }
        let base_point: Result<Vec<BigRational>> =
            file.base_point.iter().map(|s| parse_rational(s)).collect();
        let base_point = base_point?;
        let mut seen = std::collections::BTreeSet::new();
        let mut coefficients = Vec::with_capacity(file.coefficients.len());
        for entry in &file.coefficients {
            if entry.key.len() != file.n {
                return Err(Error::Validation(format!(
                    "coefficient K={:?} has {} entries, expected n = {}",
                    entry.key,
                    entry.key.len(),
                    file.n
                )));
            }
            let key = MultiIndex::new(entry.key.clone());
            if key.height() > file.k {
                return Err(Error::Validation(format!(
                    "coefficient K={:?} has height {} > k = {}",
                    entry.key,
                    key.height(),
                    file.k
                )));
            }
            if !(1..=file.q).contains(&entry.u) || !(1..=file.p).contains(&entry.v) {
                return Err(Error::Validation(format!(
                    "coefficient (u={}, v={}) outside 1..={} x 1..={}",
                    entry.u, entry.v, file.q, file.p
                )));
            }
            if !seen.insert((entry.u, entry.key.clone(), entry.v)) {
                return Err(Error::Validation(format!(
                    "duplicate coefficient (u={}, K={:?}, v={})",
                    entry.u, entry.key, entry.v
                )));
            }
            let expr = jetpde::parse_expr(&entry.expr)?;
            coefficients.push((entry.u, key, entry.v, expr));
        }
        Ok(OperatorInput {
            n: file.n,
            k: file.k,
            p: file.p,
            q: file.q,
            base_point,
            jet_order: file.jet_order,
            coefficients,
        })
    }

    /// Compiles every coefficient at the given base point.
    pub fn compile(&self, base: &[BigRational], order: usize) -> Result<OperatorSpec<Rat>> {
        let space: RatJetSpace = RatJetSpace::from_rationals(self.n, order, base);
        let mut spec = OperatorSpec::new(self.n, self.k, self.p, self.q, space.clone());
        for (u, key, v, expr) in &self.coefficients {
            spec.set_coeff(*u, key, *v, expr.compile(&space)?);
        }
        Ok(spec)
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WebFile {
    pub n: usize,
    pub d: usize,
    pub base_point: Vec<String>,
    #[serde(default)]
    pub jet_order: Option<usize>,
    pub fields: Vec<Vec<String>>,
}

/// Parsed web input.
#[derive(Debug, Clone)]
pub struct WebInput {
    pub web: WebSpec,
    pub jet_order: Option<usize>,
}

impl WebInput {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Validation(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json_str(&text)
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let file: WebFile = serde_json::from_str(text)
            .map_err(|e| Error::Validation(format!("invalid web file: {e}")))?;
        if file.fields.len() != file.d {
            return Err(Error::Validation(format!(
                "fields table has {} rows, expected d = {}",
                file.fields.len(),
                file.d
            )));
        }
        let base_point: Result<Vec<BigRational>> =
            file.base_point.iter().map(|s| parse_rational(s)).collect();
        let mut fields = Vec::with_capacity(file.d);
        for row in &file.fields {
            if row.len() != file.n {
                return Err(Error::Validation(format!(
                    "field row has {} components, expected n = {}",
                    row.len(),
                    file.n
                )));
            }
            let parsed: Result<Vec<Expr>> =
                row.iter().map(|s| jetpde::parse_expr(s)).collect();
            fields.push(parsed?);
        }
        let web = WebSpec::new(file.n, fields, base_point?);
        Ok(WebInput { web, jet_order: file.jet_order })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rationals_parse_exactly() {
        assert_eq!(parse_rational("3/4").unwrap(), BigRational::new(3.into(), 4.into()));
        assert_eq!(parse_rational(" -7 ").unwrap(), BigRational::from_integer((-7).into()));
        assert!(parse_rational("0.5").is_err());
        assert!(parse_rational("1e3").is_err());
        assert!(parse_rational("1/0").is_err());
        assert_eq!(
            parse_base_list("1/3,-2/5").unwrap(),
            vec![
                BigRational::new(1.into(), 3.into()),
                BigRational::new((-2).into(), 5.into())
            ]
        );
    }

    #[test]
    fn operator_file_validation() {
        let good = r#"{
            "n": 2, "k": 1, "p": 1, "q": 2,
            "base_point": ["0", "0"],
            "coefficients": [
                {"u": 1, "K": [1, 0], "v": 1, "expr": "1"},
                {"u": 1, "K": [0, 0], "v": 1, "expr": "-x2"},
                {"u": 2, "K": [0, 1], "v": 1, "expr": "1"}
            ]
        }"#;
        let input = OperatorInput::from_json_str(good).unwrap();
        assert_eq!((input.n, input.k, input.p, input.q), (2, 1, 1, 2));
        assert_eq!(input.coefficients.len(), 3);

        // duplicate coefficient slot
        let dup = good.replace(r#"{"u": 2, "K": [0, 1], "v": 1, "expr": "1"}"#,
            r#"{"u": 1, "K": [1, 0], "v": 1, "expr": "2"}"#);
        assert!(matches!(OperatorInput::from_json_str(&dup), Err(Error::Validation(_))));

        // K beyond the operator order
        let deep = good.replace(r#""K": [1, 0]"#, r#""K": [1, 1]"#);
        assert!(OperatorInput::from_json_str(&deep).is_err());

        // float base point
        let float = good.replace(r#""base_point": ["0", "0"]"#, r#""base_point": ["0.5", "0"]"#);
        assert!(OperatorInput::from_json_str(&float).is_err());

        // unknown field
        let unknown = good.replacen('{', r#"{"extra": 1,"#, 1);
        assert!(OperatorInput::from_json_str(&unknown).is_err());
    }

    #[test]
    fn web_file_validation() {
        let good = r#"{
            "n": 2, "d": 3,
            "base_point": ["1/3", "1/5"],
            "fields": [["1", "0"], ["0", "1"], ["1", "x1 + 1"]]
        }"#;
        let input = WebInput::from_json_str(good).unwrap();
        assert_eq!(input.web.d, 3);
        input.web.validate().unwrap();

        let ragged = good.replace(r#"["0", "1"]"#, r#"["0"]"#);
        assert!(WebInput::from_json_str(&ragged).is_err());

        let bad_expr = good.replace("x1 + 1", "x1 +");
        assert!(matches!(WebInput::from_json_str(&bad_expr), Err(Error::Parse { .. })));
    }
}
