//! The polynomial evaluation protocols: the plain streaming protocol, its
//! zero-knowledge variant built from temporal and algebraic commitments, and
//! the simulator with whitebox capture-set extraction.

mod protocol1;
mod simulator;
mod zk;

pub use protocol1::{pep_run, PepOutcome, PepProver};
pub use simulator::{
    whitebox_capture_set, zk_pep_simulate, CaptureEntry, CaptureSet, EnumerativeWhitebox,
    HonestPepWhitebox, JPlusOneWhitebox, WhiteboxOracle,
};
pub use zk::{
    zk_pep_run, HonestZkPepProver, HonestZkPepVerifier, JPlusOneVerifier, ZkPepCase1Prover,
    ZkPepCase2Prover, ZkPepCase3Prover, ZkPepProverStrategy, ZkPepVerifier,
};

use serde::Serialize;

use crate::commit::ProtocolError;
use crate::field::{Element, FieldSpec};
use crate::poly::{EvalPoint, FingerprintState, InterpolationDomain, LdeSpec};
use crate::stream::View;

/// Why a verifier rejected or a prover/simulator aborted.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RejectReason {
    /// The secret point never appeared in the setup string.
    TemporalMiss,
    /// Fingerprint check failed in a decommitment.
    FingerprintMismatch,
    /// Opened value did not match the claimed target.
    OpeningMismatch,
    /// The rho = beta2 short circuit resolved to a direct-check failure.
    DirectCheckFailed,
    /// A prover message had the wrong shape or degree.
    MalformedMessage,
    /// A sumcheck chain equation failed.
    ChainBroken,
    /// The prover (or simulator) aborted; the verifier never completed.
    Abort(AbortReason),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum AbortReason {
    /// Temporal certificate does not match the revealed point.
    CertificateInvalid,
    /// Revealed point is off the line or its parameter is in the excluded set.
    ParameterExcluded,
    /// Simulator-only: the revealed pair was not in the capture set. Flagged
    /// distinctly so distinguishing experiments can isolate simulation
    /// failures from aborts the real prover would also make.
    CaptureMiss,
    /// A verifier message violated the protocol shape (line through the
    /// wrong base point).
    LineBaseMismatch,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Decision {
    Accept,
    Reject(RejectReason),
}

impl Decision {
    pub fn accepted(&self) -> bool {
        matches!(self, Decision::Accept)
    }
}

/// Per-session measurements: verifier peak memory and communication split
/// into the setup and interactive stages. All sizes in bits.
#[derive(Debug, Clone, Serialize)]
pub struct SessionMetrics {
    pub peak_bits: u64,
    pub comm_setup_bits: u64,
    pub comm_interactive_bits: u64,
    pub rounds: u32,
}

/// A completed session: the verifier's decision, its streamed view, and the
/// measurements.
#[derive(Debug)]
pub struct SessionOutcome {
    pub decision: Decision,
    pub view: View,
    pub metrics: SessionMetrics,
    /// Search-mode output (pep) or opened claim value, when applicable.
    pub output: Option<Element>,
}

/// A mapping x -> f^x of streams to m-variate degree-d polynomials, with a
/// low-space streaming evaluator and a full-storage evaluator used by the
/// prover and by test oracles.
pub trait StreamPolyMap: Sync {
    /// Degree and dimension of f^x.
    fn degree(&self) -> u32;
    fn dimension(&self) -> usize;
    fn field(&self) -> FieldSpec;
    /// Tape symbols consumed per logical stream update.
    fn arity(&self) -> usize {
        1
    }
    /// Number of logical updates in a full stream.
    fn stream_len(&self) -> usize;
    /// Low-space streaming evaluator of f^x at a fixed point.
    fn start(&self, point: &EvalPoint) -> Result<Box<dyn StreamAccumulator>, ProtocolError>;
    /// Full evaluation of f^x at an arbitrary point from the archived
    /// stream. Unbounded-memory path: the prover's evaluator and the tests'
    /// brute-force oracle.
    fn eval_full(&self, archive: &[Element], point: &EvalPoint) -> Result<Element, ProtocolError>;
}

/// Streaming evaluator state for one point; retained bits are charged by the
/// session that owns it.
pub trait StreamAccumulator {
    fn update(&mut self, symbols: &[Element]) -> Result<(), ProtocolError>;
    fn finalize(&self) -> Element;
    fn retained_bits(&self) -> u64;
}

/// The identity mapping: f^x is the low-degree extension of the stream
/// itself. This is the mapping behind index and the basic commitment.
pub struct LdeMap {
    pub spec: LdeSpec,
}

impl LdeMap {
    pub fn new(spec: LdeSpec) -> Self {
        LdeMap { spec }
    }
}

struct LdeAccumulator {
    state: FingerprintState,
}

impl StreamAccumulator for LdeAccumulator {
    fn update(&mut self, symbols: &[Element]) -> Result<(), ProtocolError> {
        self.state.update(symbols[0])?;
        Ok(())
    }

    fn finalize(&self) -> Element {
        self.state.finalize()
    }

    fn retained_bits(&self) -> u64 {
        self.state.retained_bits()
    }
}

impl StreamPolyMap for LdeMap {
    fn degree(&self) -> u32 {
        self.spec.d
    }

    fn dimension(&self) -> usize {
        self.spec.m
    }

    fn field(&self) -> FieldSpec {
        self.spec.field
    }

    fn stream_len(&self) -> usize {
        self.spec.n
    }

    fn start(&self, point: &EvalPoint) -> Result<Box<dyn StreamAccumulator>, ProtocolError> {
        Ok(Box::new(LdeAccumulator {
            state: FingerprintState::init(self.spec, point.clone())?,
        }))
    }

    fn eval_full(&self, archive: &[Element], point: &EvalPoint) -> Result<Element, ProtocolError> {
        Ok(self.spec.lde_eval(archive, point)?)
    }
}

/// Lagrange weights over the interpolation set {0} union [dm]: the vector
/// (chi_i(t) : i in [dm]) and the separate chi_0(t).
pub fn pep_chi_weights(
    t: Element,
    dm: u32,
    field: FieldSpec,
) -> Result<(Element, Vec<Element>), ProtocolError> {
    let spec = LdeSpec::new(field, 1, dm, 1, InterpolationDomain::ZeroBased)?;
    let chi0 = spec.chi_uni(0, t);
    let rest = (1..=dm).map(|i| spec.chi_uni(i, t)).collect();
    Ok((chi0, rest))
}
