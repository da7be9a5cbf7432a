//! Machine-readable analysis reports. Every numeric field is exact: counts
//! as integers, scalars as rational strings. Serialization order is the
//! struct order, so identical inputs give byte-identical JSON.

use serde::{Deserialize, Serialize};

use jetpde::{
    ConcentrationReport, Curvature, FlatnessReport, MultiIndex, OperatorAnalysis, Rat,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub command: String,
    pub input: InputInfo,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub range: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h0: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub symbol_ranks: Option<Vec<SymbolRankOut>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ordinary: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub calibrated: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kernel_dims: Option<Vec<KernelDimOut>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solution_bound: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lower_jet_bound: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub web: Option<WebInfo>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frame_levels: Option<Vec<FrameLevelOut>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub flat: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certified_order: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub concentration: Option<ConcentrationOut>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub curvature: Option<Vec<CurvatureBlockOut>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle: Option<Vec<OracleLevelOut>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probes: Option<ProbesOut>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InputInfo {
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<String>,
    pub base_point: Vec<String>,
    pub jet_order: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymbolRankOut {
    pub h: u64,
    pub expected: u64,
    pub actual: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelDimOut {
    pub h: i64,
    pub dim: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WebInfo {
    pub d: usize,
    pub damiano_bound: u64,
    pub eliminated: Vec<usize>,
    pub free: Vec<usize>,
    pub dropped_row: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameLevelOut {
    pub level: usize,
    pub size: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationOut {
    pub expected_zero_rows: usize,
    pub holds: bool,
    pub nonzero_rows: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvatureBlockOut {
    pub i: usize,
    pub j: usize,
    pub order: usize,
    /// Values at the base point, row-major rational strings.
    pub constant: Vec<Vec<String>>,
    /// First-order coefficients, one matrix per direction.
    pub linear: Vec<LinearPartOut>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearPartOut {
    pub direction: usize,
    pub matrix: Vec<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleLevelOut {
    pub h: u64,
    pub matrix_rank: u64,
    pub kernel_dim: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub formula: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub agrees: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbesOut {
    pub seed: u64,
    pub requested: usize,
    pub results: Vec<ProbeOut>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeOut {
    pub base_point: Vec<String>,
    pub status: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub agrees: Option<bool>,
}

/// Copies the classification fields of an analysis into a report.
pub fn fill_analysis(report: &mut Report, analysis: &OperatorAnalysis) {
    report.range = Some(analysis.range.to_string());
    report.h0 = analysis.h0.map(|h| h as u64);
    report.symbol_ranks = analysis.ordinary.as_ref().map(|o| {
        o.checked
            .iter()
            .map(|s| SymbolRankOut { h: s.h as u64, expected: s.expected, actual: s.actual })
            .collect()
    });
    report.ordinary = analysis.ordinary.as_ref().map(|o| o.ordinary);
    report.calibrated = analysis.calibrated;
    if !analysis.kernel_dims.is_empty() {
        report.kernel_dims = Some(
            analysis
                .kernel_dims
                .iter()
                .map(|&(h, dim)| KernelDimOut { h, dim })
                .collect(),
        );
    }
    report.solution_bound = analysis.solution_bound;
    report.lower_jet_bound = analysis.lower_jet_bound;
}

pub fn fill_flatness(report: &mut Report, flatness: &FlatnessReport, conc: &ConcentrationReport) {
    report.flat = Some(flatness.flat);
    report.certified_order = Some(flatness.certified_order as u64);
    report.concentration = Some(ConcentrationOut {
        expected_zero_rows: conc.expected_zero_rows,
        holds: conc.holds,
        nonzero_rows: conc.nonzero_rows.clone(),
    });
}

pub fn curvature_blocks(curvature: &Curvature<Rat>, n: usize) -> Vec<CurvatureBlockOut> {
    curvature
        .blocks()
        .map(|(&(i, j), block)| {
            let dim = block.rows();
            let constant: Vec<Vec<String>> = (0..dim)
                .map(|r| (0..dim).map(|c| block.at(r, c).constant_term().to_string()).collect())
                .collect();
            let linear = (1..=n)
                .map(|dir| {
                    let key = MultiIndex::unit(n, dir);
                    let matrix = (0..dim)
                        .map(|r| {
                            (0..dim).map(|c| block.at(r, c).coeff(&key).to_string()).collect()
                        })
                        .collect();
                    LinearPartOut { direction: dir, matrix }
                })
                .collect();
            CurvatureBlockOut { i, j, order: block.order(), constant, linear }
        })
        .collect()
}

impl Report {
    pub fn new(command: &str, input: InputInfo) -> Self {
        Report {
            command: command.to_string(),
            input,
            range: None,
            h0: None,
            symbol_ranks: None,
            ordinary: None,
            calibrated: None,
            kernel_dims: None,
            solution_bound: None,
            lower_jet_bound: None,
            web: None,
            frame_levels: None,
            flat: None,
            certified_order: None,
            concentration: None,
            curvature: None,
            oracle: None,
            probes: None,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let push = |out: &mut String, line: String| {
            out.push_str(&line);
            out.push('\n');
        };
        push(&mut out, format!("command: {}", self.command));
        let i = &self.input;
        let mut dims = format!("n={} ", i.n);
        if let (Some(k), Some(p), Some(q)) = (i.k, i.p, i.q) {
            dims.push_str(&format!("k={k} p={p} q={q} "));
        }
        if let Some(d) = i.d {
            dims.push_str(&format!("d={d} "));
        }
        if let Some(c) = &i.c {
            dims.push_str(&format!("c={c} "));
        }
        push(&mut out, format!("input: {dims}jet_order={}", i.jet_order));
        push(&mut out, format!("base point: ({})", i.base_point.join(", ")));
        if let Some(range) = &self.range {
            push(&mut out, format!("range: {range}"));
        }
        if let Some(h0) = self.h0 {
            push(&mut out, format!("h0: {h0}"));
        }
        if let Some(ranks) = &self.symbol_ranks {
            let parts: Vec<String> = ranks
                .iter()
                .map(|s| format!("h={}: {}/{}", s.h, s.actual, s.expected))
                .collect();
            push(&mut out, format!("symbol ranks: {}", parts.join("  ")));
        }
        if let Some(ordinary) = self.ordinary {
            push(&mut out, format!("ordinary: {ordinary}"));
        }
        if let Some(calibrated) = self.calibrated {
            push(&mut out, format!("calibrated: {calibrated}"));
        }
        if let Some(dims) = &self.kernel_dims {
            let parts: Vec<String> =
                dims.iter().map(|k| format!("rho({})={}", k.h, k.dim)).collect();
            push(&mut out, format!("kernel dims: {}", parts.join("  ")));
        }
        if let Some(bound) = self.solution_bound {
            push(&mut out, format!("solution bound: {bound}"));
        }
        if let Some(bound) = self.lower_jet_bound {
            push(&mut out, format!("lower-jet bound: {bound}"));
        }
        if let Some(web) = &self.web {
            push(
                &mut out,
                format!(
                    "web: d={} damiano_bound={} eliminated={:?} free={:?} dropped_row={}",
                    web.d, web.damiano_bound, web.eliminated, web.free, web.dropped_row
                ),
            );
        }
        if let Some(levels) = &self.frame_levels {
            let parts: Vec<String> =
                levels.iter().map(|l| format!("{}:{}", l.level, l.size)).collect();
            push(&mut out, format!("frame levels: {}", parts.join("  ")));
        }
        if let Some(flat) = self.flat {
            push(
                &mut out,
                format!(
                    "flat: {flat} (certified order {})",
                    self.certified_order.unwrap_or(0)
                ),
            );
        }
        if let Some(conc) = &self.concentration {
            push(
                &mut out,
                format!(
                    "concentration: first {} rows zero: {}; nonzero rows {:?}",
                    conc.expected_zero_rows,
                    if conc.holds { "ok" } else { "VIOLATED" },
                    conc.nonzero_rows
                ),
            );
        }
        if let Some(blocks) = &self.curvature {
            for b in blocks {
                push(
                    &mut out,
                    format!("curvature K_({},{}) to order {}:", b.i, b.j, b.order),
                );
                for row in &b.constant {
                    push(&mut out, format!("  [{}]", row.join(", ")));
                }
                for lin in &b.linear {
                    push(&mut out, format!("  d{} coefficients:", lin.direction));
                    for row in &lin.matrix {
                        push(&mut out, format!("    [{}]", row.join(", ")));
                    }
                }
            }
        }
        if let Some(oracle) = &self.oracle {
            for level in oracle {
                let formula = level
                    .formula
                    .map(|f| format!(" formula={f} agrees={}", level.agrees.unwrap_or(false)))
                    .unwrap_or_default();
                push(
                    &mut out,
                    format!(
                        "oracle h={}: rank={} kernel_dim={}{formula}",
                        level.h, level.matrix_rank, level.kernel_dim
                    ),
                );
            }
        }
        if let Some(probes) = &self.probes {
            push(
                &mut out,
                format!("probes: seed={} requested={}", probes.seed, probes.requested),
            );
            for (idx, probe) in probes.results.iter().enumerate() {
                let agrees = probe
                    .agrees
                    .map(|a| format!(" agrees={a}"))
                    .unwrap_or_default();
                push(
                    &mut out,
                    format!(
                        "  probe {}: ({}) {}{}",
                        idx + 1,
                        probe.base_point.join(", "),
                        probe.status,
                        agrees
                    ),
                );
            }
        }
        out
    }
}
