//! Drives the analysis for the CLI: one primary run, optional probe re-runs
//! at fresh base points, and report assembly.

use num_rational::BigRational;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use jetpde::{
    analyze_operator, analyze_web, build_adapted_frame, classify_range, compute_h0,
    kernel_dim_formula, Connection, Error, Range, RatWebAnalysis, Result, WebOptions, WebSpec,
};

use crate::input::OperatorInput;
use crate::report::{
    curvature_blocks, fill_analysis, fill_flatness, FrameLevelOut, InputInfo,
    OracleLevelOut, ProbeOut, ProbesOut, Report, WebInfo,
};

/// Fixed seed for probe points, recorded in the report.
pub const PROBE_SEED: u64 = 0x6a65_7464_6574;
const PROBE_ATTEMPTS: usize = 25;

#[derive(Debug, Clone, Default)]
pub struct RunFlags {
    pub jet_order: Option<usize>,
    pub emit_curvature: bool,
    pub probes: Option<usize>,
}

/// The comparable outcome of one analysis, for probe agreement.
#[derive(Debug, Clone, PartialEq, Eq)]
struct Verdict {
    range: String,
    h0: Option<usize>,
    ordinary: Option<bool>,
    calibrated: Option<bool>,
    solution_bound: Option<u64>,
    flat: Option<bool>,
    nonzero_rows: Option<Vec<usize>>,
}

struct OperatorOutcome {
    report: Report,
    verdict: Verdict,
}

fn default_operator_order(n: usize, k: usize, p: usize, q: usize) -> usize {
    match compute_h0(n, k, p, q) {
        Ok(h0) => (h0 - k) + 3,
        Err(_) => 3,
    }
}

fn operator_input_info(
    input: &OperatorInput,
    base: &[BigRational],
    order: usize,
) -> InputInfo {
    InputInfo {
        n: input.n,
        k: Some(input.k),
        p: Some(input.p),
        q: Some(input.q),
        d: None,
        c: None,
        base_point: base.iter().map(|q| q.to_string()).collect(),
        jet_order: order,
    }
}

fn analyze_operator_at(
    input: &OperatorInput,
    base: &[BigRational],
    order: usize,
    emit_curvature: bool,
) -> Result<OperatorOutcome> {
    let spec = input.compile(base, order)?;
    let analyzed = analyze_operator(spec, None)?;
    let analysis = analyzed.analysis;

    let mut report = Report::new("analyze-operator", operator_input_info(input, base, order));
    fill_analysis(&mut report, &analysis);

    if analysis.calibrated == Some(true) {
        let tower = analyzed.tower.as_ref().expect("range III keeps its tower");
        let frame = build_adapted_frame(tower)?;
        report.frame_levels = Some(
            frame
                .levels()
                .iter()
                .map(|l| FrameLevelOut { level: l.level, size: l.size })
                .collect(),
        );
        let connection = Connection::build(tower, frame)?;
        let curvature = connection.curvature()?;
        let flatness = connection.flatness(&curvature);
        let concentration = connection.concentration(&curvature)?;
        fill_flatness(&mut report, &flatness, &concentration);
        if emit_curvature {
            report.curvature = Some(curvature_blocks(&curvature, input.n));
        }
    }

    let verdict = Verdict {
        range: analysis.range.to_string(),
        h0: analysis.h0,
        ordinary: report.ordinary,
        calibrated: report.calibrated,
        solution_bound: report.solution_bound,
        flat: report.flat,
        nonzero_rows: report.concentration.as_ref().map(|c| c.nonzero_rows.clone()),
    };
    Ok(OperatorOutcome { report, verdict })
}

/// Errors that mean "this base point is unusable", as opposed to broken
/// input or an internal bug.
fn is_degeneracy(err: &Error) -> bool {
    matches!(
        err.root(),
        Error::PoleAtBasePoint { .. }
            | Error::NonUnitJet
            | Error::NotInvertibleAtBase
            | Error::FrameNotAdapted
            | Error::NoAdaptedFrame { .. }
            | Error::DegenerateBasePoint { .. }
            | Error::NotFlat { .. }
    )
}

fn probe_base(n: usize, rng: &mut ChaCha8Rng) -> Vec<BigRational> {
    (0..n)
        .map(|_| {
            let num: i64 = rng.gen_range(-9..=9);
            let den: i64 = rng.gen_range(1..=9);
            BigRational::new(num.into(), den.into())
        })
        .collect()
}

pub fn run_operator(input: &OperatorInput, flags: &RunFlags) -> Result<Report> {
    let order = flags
        .jet_order
        .or(input.jet_order)
        .unwrap_or_else(|| default_operator_order(input.n, input.k, input.p, input.q));
    let primary =
        analyze_operator_at(input, &input.base_point, order, flags.emit_curvature)?;
    let mut report = primary.report;

    if let Some(count) = flags.probes {
        let mut rng = ChaCha8Rng::seed_from_u64(PROBE_SEED);
        let mut results = Vec::with_capacity(count);
        for _ in 0..count {
            let mut recorded = None;
            for _ in 0..PROBE_ATTEMPTS {
                let base = probe_base(input.n, &mut rng);
                match analyze_operator_at(input, &base, order, false) {
                    Ok(outcome) => {
                        recorded = Some(ProbeOut {
                            base_point: outcome.report.input.base_point.clone(),
                            status: "ok".into(),
                            agrees: Some(outcome.verdict == primary.verdict),
                        });
                        break;
                    }
                    Err(e) if is_degeneracy(&e) => continue,
                    Err(e) => return Err(e),
                }
            }
            results.push(recorded.unwrap_or(ProbeOut {
                base_point: Vec::new(),
                status: "no admissible probe point found".into(),
                agrees: None,
            }));
        }
        report.probes = Some(ProbesOut { seed: PROBE_SEED, requested: count, results });
    }
    Ok(report)
}

struct WebOutcome {
    report: Report,
    verdict: Verdict,
}

fn web_input_info(web: &WebSpec, c: Option<&BigRational>, order: usize) -> InputInfo {
    InputInfo {
        n: web.n,
        k: Some(1),
        p: Some(web.d - web.n),
        q: Some(web.d - 1),
        d: Some(web.d),
        c: c.map(|q| q.to_string()),
        base_point: web.base_point.iter().map(|q| q.to_string()).collect(),
        jet_order: order,
    }
}

fn analyze_web_at(
    command: &str,
    web: &WebSpec,
    c: Option<&BigRational>,
    jet_order: Option<usize>,
    emit_curvature: bool,
) -> Result<WebOutcome> {
    let h0 = web.d - web.n;
    let order = jet_order.unwrap_or(h0 - 1 + 3);
    let options = WebOptions { jet_order: Some(order), pivots: None };
    let out: RatWebAnalysis = analyze_web(web, &options)?;

    let mut report = Report::new(command, web_input_info(web, c, order));
    fill_analysis(&mut report, &out.analysis);
    report.web = Some(WebInfo {
        d: web.d,
        damiano_bound: out.damiano_bound,
        eliminated: out.operator.eliminated.clone(),
        free: out.operator.free.clone(),
        dropped_row: out.operator.dropped_row,
    });
    report.frame_levels = Some(
        out.connection
            .frame()
            .levels()
            .iter()
            .map(|l| FrameLevelOut { level: l.level, size: l.size })
            .collect(),
    );
    fill_flatness(&mut report, &out.flatness, &out.concentration);
    if emit_curvature {
        report.curvature = Some(curvature_blocks(&out.curvature, web.n));
    }

    let verdict = Verdict {
        range: out.analysis.range.to_string(),
        h0: out.analysis.h0,
        ordinary: report.ordinary,
        calibrated: report.calibrated,
        solution_bound: report.solution_bound,
        flat: report.flat,
        nonzero_rows: report.concentration.as_ref().map(|c| c.nonzero_rows.clone()),
    };
    Ok(WebOutcome { report, verdict })
}

pub fn run_web(
    command: &str,
    web: &WebSpec,
    c: Option<&BigRational>,
    flags: &RunFlags,
    file_jet_order: Option<usize>,
) -> Result<Report> {
    let jet_order = flags.jet_order.or(file_jet_order);
    let primary = analyze_web_at(command, web, c, jet_order, flags.emit_curvature)?;
    let mut report = primary.report;

    if let Some(count) = flags.probes {
        let mut rng = ChaCha8Rng::seed_from_u64(PROBE_SEED);
        let mut results = Vec::with_capacity(count);
        for _ in 0..count {
            let mut recorded = None;
            for _ in 0..PROBE_ATTEMPTS {
                let base = probe_base(web.n, &mut rng);
                let candidate = WebSpec::new(web.n, web.fields.clone(), base);
                if candidate.validate().is_err() {
                    continue;
                }
                match analyze_web_at(command, &candidate, c, jet_order, false) {
                    Ok(outcome) => {
                        recorded = Some(ProbeOut {
                            base_point: outcome.report.input.base_point.clone(),
                            status: "ok".into(),
                            agrees: Some(outcome.verdict == primary.verdict),
                        });
                        break;
                    }
                    Err(e) if is_degeneracy(&e) => continue,
                    Err(e) => return Err(e),
                }
            }
            results.push(recorded.unwrap_or(ProbeOut {
                base_point: Vec::new(),
                status: "no admissible probe point found".into(),
                agrees: None,
            }));
        }
        report.probes = Some(ProbesOut { seed: PROBE_SEED, requested: count, results });
    }
    Ok(report)
}

pub fn run_oracle(input: &OperatorInput, h: usize, flags: &RunFlags) -> Result<Report> {
    if h < input.k {
        return Err(Error::Validation(format!(
            "--h must be at least the operator order k = {}",
            input.k
        )));
    }
    let base_order = flags
        .jet_order
        .or(input.jet_order)
        .unwrap_or_else(|| default_operator_order(input.n, input.k, input.p, input.q));
    let order = base_order.max(h - input.k);
    let spec = input.compile(&input.base_point, order)?;
    let analyzed = analyze_operator(spec, Some(h))?;
    let tower = analyzed.tower.expect("tower built on request");
    let analysis = analyzed.analysis;

    let mut report = Report::new("oracle-ranks", operator_input_info(input, &input.base_point, order));
    fill_analysis(&mut report, &analysis);

    let in_range_iii = classify_range(input.n, input.k, input.p, input.q) == Range::III;
    let mut levels = Vec::new();
    for level in input.k..=h {
        let matrix_rank = tower.matrix(level).rank_at_base().rank as u64;
        let kernel_dim = tower.formal_rank_oracle(level);
        let formula = (in_range_iii && analysis.h0.is_some_and(|h0| level <= h0)).then(|| {
            kernel_dim_formula(input.n, input.k, input.p, input.q, level as i64) as u64
        });
        let agrees = formula.map(|f| f == kernel_dim);
        levels.push(OracleLevelOut { h: level as u64, matrix_rank, kernel_dim, formula, agrees });
    }
    report.oracle = Some(levels);
    Ok(report)
}
