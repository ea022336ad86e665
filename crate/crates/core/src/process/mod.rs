//! Process matrices and quantum instruments: validity, the generalized
//! Born rule, and searches for inequality violations.

pub mod instrument;
pub mod matrix;
pub mod operator;
pub mod optimize;
pub mod sdp;
pub mod space;

pub use instrument::{validate_instrument, Instrument, InstrumentReport, InstrumentSet};
pub use matrix::{born_correlation, born_rule, build_named, validate_process, validate_process_with, Named, ProcessMatrix, ProcessReport};
pub use operator::{Operator, OperatorFile};
pub use optimize::{
    classical_optimize, optimize_instrument, optimize_w, see_saw, ClassicalOptimum, Objective, SdpOptions,
    SeeSawOptions, SeeSawResult,
};
pub use space::{OrderConstraint, PartySpaces};
