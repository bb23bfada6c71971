//! Streaming interactive proofs with zero-knowledge, at desk scale.
//!
//! The crate implements the sumcheck and polynomial-evaluation streaming
//! protocols together with their zero-knowledge variants, the algebraic and
//! temporal commitment protocols they are built from, the matching
//! simulators, and a set of derived streaming applications (index, point
//! query, range count, selection, frequency moments, inner product). Verifier
//! memory is bit-accounted so that space bounds are testable quantities, and
//! every completeness/soundness bound carries an empirical harness.

pub mod analysis;
pub mod apps;
pub mod cli;
pub mod commit;
pub mod field;
pub mod pep;
pub mod poly;
pub mod stream;
pub mod sumcheck;

pub use field::{Element, FieldError, FieldKind, FieldSpec};
pub use poly::{EvalPoint, LdeSpec, Line, PolyError, UnivariatePoly};
pub use stream::{SessionRng, SpaceMeter, StreamError, Tape, View};
