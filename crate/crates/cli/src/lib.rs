//! Library half of the CLI: input formats, report schema, and the run
//! pipelines, kept importable for integration tests.

pub mod input;
pub mod pipeline;
pub mod report;

use jetpde::Error;

/// Process exit code classification:
/// 0 pipeline completed, 1 input/validation error, 2 mathematical
/// degeneracy at the base point, 3 internal consistency failure.
pub fn exit_code(err: &Error) -> i32 {
    match err.root() {
        Error::Parse { .. }
        | Error::Validation(_)
        | Error::OutOfRange { .. }
        | Error::LevelOutOfWindow { .. }
        | Error::InsufficientJetOrder { .. } => 1,
        Error::PoleAtBasePoint { .. }
        | Error::NonUnitJet
        | Error::NotInvertibleAtBase
        | Error::FrameNotAdapted
        | Error::NoAdaptedFrame { .. }
        | Error::DegenerateBasePoint { .. }
        | Error::NotFlat { .. } => 2,
        Error::TableExhausted { .. } | Error::Internal(_) | Error::FlatnessViolated { .. } => 3,
        Error::AtStage { .. } => 3,
    }
}
