use thiserror::Error;

/// Pipeline stage a failure was detected in, for diagnostics.
pub type Stage = &'static str;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// A rank/unrank table was asked for an index beyond its maximum height.
    #[error("table exhausted: cannot raise rank {rank} in direction {dir} beyond height {h_max}")]
    TableExhausted { rank: usize, dir: usize, h_max: usize },

    /// A derivation chain consumed more usable orders than the jet carries.
    #[error("insufficient jet order: need {needed}, have {have}")]
    InsufficientJetOrder { needed: usize, have: usize },

    /// Inversion of a jet whose constant term vanishes.
    #[error("non-unit jet: constant term is zero")]
    NonUnitJet,

    /// A quotient's denominator vanishes at the expansion point.
    #[error("pole at base point in subexpression `{subexpr}`")]
    PoleAtBasePoint { subexpr: String },

    /// Square jet-matrix inversion with a singular constant part.
    #[error("not invertible at base point")]
    NotInvertibleAtBase,

    /// The dependent columns handed to a kernel solve are singular at the base point.
    #[error("frame not adapted: dependent columns are singular at the base point")]
    FrameNotAdapted,

    /// No graded choice of free components exists at this base point.
    #[error("no adapted frame at this base point (level {level}); re-probe at another point")]
    NoAdaptedFrame { level: usize },

    /// Caller asked for h0 or related data outside the admissible rank range.
    #[error("h0 undefined for p={p}, q={q}: requires p < q <= p*c(n,k) = {qmax}; use range classification first")]
    OutOfRange { p: u64, q: u64, qmax: u64 },

    #[error("level {h} outside the admissible window {lo}..={hi}")]
    LevelOutOfWindow { h: i64, lo: i64, hi: i64 },

    /// A geometric degeneracy at the chosen base point (non-generic position).
    #[error("degenerate at base point: {what}")]
    DegenerateBasePoint { what: String },

    /// Flat-section integration met an inconsistency between mixed derivatives.
    #[error("flatness violated at order {order}")]
    FlatnessViolated { order: usize },

    /// Curvature has a nonzero value at the base point where a flat connection was required.
    #[error("not flat: curvature K_({i},{j}) is nonzero at the base point")]
    NotFlat { i: usize, j: usize },

    #[error("syntax error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },

    #[error("invalid input: {0}")]
    Validation(String),

    /// An internal consistency assertion failed; this signals a bug, not bad input.
    #[error("internal consistency assertion failed: {0}")]
    Internal(String),

    /// Same failure, annotated with the pipeline stage that produced it.
    #[error("[{stage}] {source}")]
    AtStage {
        stage: Stage,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub fn at_stage(self, stage: Stage) -> Error {
        match self {
            Error::AtStage { .. } => self,
            other => Error::AtStage { stage, source: Box::new(other) },
        }
    }

    /// Innermost error, unwrapping stage annotations.
    pub fn root(&self) -> &Error {
        match self {
            Error::AtStage { source, .. } => source.root(),
            other => other,
        }
    }

    pub fn stage(&self) -> Option<Stage> {
        match self {
            Error::AtStage { stage, .. } => Some(stage),
            _ => None,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
