//! The plain polynomial evaluation protocol: a streaming verifier with one
//! fingerprint recovers f^x at a point revealed after the stream, assisted by
//! an untrusted prover who sends the restriction of f^x to a line.

use super::{Decision, RejectReason, SessionMetrics, SessionOutcome, StreamPolyMap};
use crate::commit::{ProtocolError, ProtocolParams};
use crate::field::Element;
use crate::poly::{interpolate_univariate, line_through, EvalPoint, Line};
use crate::stream::{bits_for_range, Origin, SessionRng, SpaceMeter, Tape, View};

/// Prover strategy for the plain protocol: may pervert the evaluations of
/// the line restriction before they are sent.
pub trait PepProver {
    /// `honest` holds f^x restricted to the line at parameters 1..=dm (and
    /// at 0 first, in search mode).
    fn evals(&mut self, honest: &[Element], line: &Line, phi: Element) -> Vec<Element>;
}

/// The honest prover sends the true restriction.
pub struct HonestPep;

impl PepProver for HonestPep {
    fn evals(&mut self, honest: &[Element], _line: &Line, _phi: Element) -> Vec<Element> {
        honest.to_vec()
    }
}

#[derive(Debug)]
pub struct PepOutcome {
    pub decision: Decision,
    /// Search-mode output g(0); in decision mode, the claim is echoed on
    /// accept.
    pub output: Option<Element>,
    pub view: View,
    pub metrics: SessionMetrics,
}

/// Runs the protocol. `claim` selects decision mode (check f^x(beta2) =
/// claim) or, when None, search mode (output g(0)).
pub fn pep_run(
    map: &dyn StreamPolyMap,
    claim: Option<Element>,
    x: &mut Tape<Element>,
    beta2: &EvalPoint,
    params: &ProtocolParams,
    prover: &mut dyn PepProver,
    rng: &mut SessionRng,
) -> Result<PepOutcome, ProtocolError> {
    params.validate()?;
    let spec = params.field;
    let q = spec.order();
    let dm = params.d * params.m as u32;
    if dm as u64 + 1 >= q {
        return Err(ProtocolError::InvalidParams(format!(
            "pep needs q > dm + 1 (q = {q}, dm = {dm})"
        )));
    }
    let mut view = View::new(spec);
    let mut meter = SpaceMeter::unbounded();
    let mut interactive_bits = 0u64;

    // Verifier: sample rho, fingerprint the stream.
    let data_lde = params.data_lde(crate::poly::InterpolationDomain::OneBased)?;
    let rho = data_lde.sample_point(rng);
    view.record(Origin::Randomness, "rho", rho.reprs())?;
    meter.charge_elements("rho", spec, params.m as u64)?;
    let mut acc = map.start(&rho)?;
    meter.charge("f-accumulator", acc.retained_bits())?;
    let arity = map.arity();
    let mut x_payload = Vec::with_capacity(x.len());
    let archive: Vec<Element> = x.archive().to_vec();
    for _ in 0..map.stream_len() {
        let mut symbols = Vec::with_capacity(arity);
        for _ in 0..arity {
            let sym = x.next()?;
            x_payload.push(sym.repr());
            symbols.push(sym);
        }
        acc.update(&symbols)?;
    }
    view.record(Origin::Input, "x", x_payload)?;
    let fx_rho = acc.finalize();
    meter.release_slot("f-accumulator");
    meter.charge_elements("fx-rho", spec, 1)?;

    // Store the evaluation point revealed after the stream.
    view.record(Origin::Input, "beta2", beta2.reprs())?;
    meter.charge_elements("beta2", spec, params.m as u64)?;

    // Line through beta2 and rho at a nonzero parameter (phi = 0 resampled
    // away internally).
    let phi = spec.sample_uniform(rng, &[spec.zero()])?;
    view.record(Origin::Randomness, "phi", vec![phi.repr()])?;
    meter.charge_elements("phi", spec, 1)?;
    let line = line_through(beta2, &rho, phi)?;
    interactive_bits += spec.element_bits() * params.m as u64; // L(1), canonical wire form

    // Prover: the restriction of f^x to the line.
    let search_mode = claim.is_none();
    let mut honest = Vec::with_capacity(dm as usize + 1);
    let lo = if search_mode { 0 } else { 1 };
    for i in lo..=dm as u64 {
        let t = spec.embed_index(i)?;
        honest.push(map.eval_full(&archive, &line.eval(t))?);
    }
    let evals = prover.evals(&honest, &line, phi);
    view.record(
        Origin::Prover,
        "line-restriction",
        evals.iter().map(|e| e.repr()).collect(),
    )?;
    interactive_bits += spec.element_bits() * evals.len() as u64;
    if evals.len() != honest.len() {
        return Ok(PepOutcome {
            decision: Decision::Reject(RejectReason::MalformedMessage),
            output: None,
            view,
            metrics: metrics(&meter, 0, interactive_bits, 2),
        });
    }

    // Verifier: interpolate g (degree dm) with g(0) pinned to the claim in
    // decision mode, then check g(phi) against the fingerprint.
    let mut pts: Vec<(Element, Element)> = Vec::with_capacity(dm as usize + 1);
    let mut idx = lo;
    if let Some(alpha) = claim {
        pts.push((spec.zero(), alpha));
    }
    for &e in &evals {
        pts.push((spec.embed_index(idx)?, e));
        idx += 1;
    }
    meter.charge_elements("g-accumulators", spec, 2)?;
    meter.charge("bookkeeping", bits_for_range(map.stream_len().max(2) as u64))?;
    let g = interpolate_univariate(&pts, dm)?;
    let ok = g.eval(phi) == fx_rho;
    let decision = if ok {
        Decision::Accept
    } else {
        Decision::Reject(RejectReason::FingerprintMismatch)
    };
    let output = if ok {
        Some(g.eval(spec.zero()))
    } else {
        None
    };
    Ok(PepOutcome {
        decision,
        output,
        view,
        metrics: metrics(&meter, 0, interactive_bits, 2),
    })
}

fn metrics(meter: &SpaceMeter, setup: u64, interactive: u64, rounds: u32) -> SessionMetrics {
    SessionMetrics {
        peak_bits: meter.peak_bits(),
        comm_setup_bits: setup,
        comm_interactive_bits: interactive,
        rounds,
    }
}

impl From<PepOutcome> for SessionOutcome {
    fn from(o: PepOutcome) -> SessionOutcome {
        SessionOutcome {
            decision: o.decision,
            view: o.view,
            metrics: o.metrics,
            output: o.output,
        }
    }
}
