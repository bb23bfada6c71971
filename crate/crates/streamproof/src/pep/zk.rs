//! The zero-knowledge polynomial evaluation session: temporal commitment
//! setup, input streaming, algebraic commitment, temporal decommitment, and
//! algebraic decommitment, with role-separated prover and verifier state
//! machines.
//!
//! The driver moves messages between the parties, records the verifier view,
//! and accounts communication. Prover strategies may pervert individual
//! messages (wrong-claim, forged-opening, and crafted-commitment cases);
//! verifier implementations may be malicious (the line-through-j-and-j+1
//! attacker). Both real runs and the simulator drive the same verifier
//! interface, so views are entry-for-entry comparable.

use super::{
    pep_chi_weights, AbortReason, Decision, RejectReason, SessionMetrics, SessionOutcome,
    StreamAccumulator, StreamPolyMap,
};
use crate::commit::{IngestOrder, MatrixFingerprint, ProtocolError, ProtocolParams};
use crate::field::Element;
use crate::poly::{line_through, EvalPoint, LdeSpec, Line};
use crate::stream::{
    bits_for_range, AddressableRandom, BitReader, BitWriter, Origin, SessionRng, Snapshot,
    SpaceMeter, Tape, View,
};

/// Region tags for the prover's addressable randomness (the setup string z,
/// the commitment matrix y, and the hidden column k). The simulator reads
/// the same regions, which is what makes paired real/simulated runs share
/// their prover-side randomness.
pub const REGION_Z: u64 = 1;
pub const REGION_Y: u64 = 2;
pub const REGION_K: u64 = 3;

pub fn z_point_at(rand: &AddressableRandom, params: &ProtocolParams, index: u64) -> EvalPoint {
    let m = params.m as u64;
    EvalPoint(
        (0..m)
            .map(|c| rand.element_at(REGION_Z, (index - 1) * m + c, params.field))
            .collect(),
    )
}

pub fn y_entry_at(rand: &AddressableRandom, params: &ProtocolParams, row: u64, col: u64) -> Element {
    rand.element_at(REGION_Y, row * params.p + col, params.field)
}

pub fn k_at(rand: &AddressableRandom, params: &ProtocolParams) -> usize {
    rand.value_at(REGION_K, 0, params.p) as usize + 1
}

/// What the verifier does after streaming the setup string.
pub enum SetupVerdict {
    Continue,
    /// The secret point never appeared: reject now.
    Reject,
}

/// Message-level verifier interface for the zero-knowledge session. The
/// driver (real protocol or simulator) feeds each streamed symbol and asks
/// for each verifier message in protocol order.
pub trait ZkPepVerifier {
    /// Step 0: one setup symbol z_i (1-indexed).
    fn setup_symbol(&mut self, zi: &EvalPoint, index: u64) -> Result<(), ProtocolError>;
    fn setup_end(&mut self) -> Result<SetupVerdict, ProtocolError>;
    /// Step 1: one logical input update (arity symbols).
    fn input_update(&mut self, symbols: &[Element]) -> Result<(), ProtocolError>;
    /// Step 1: the evaluation point; Some(decision) short-circuits the
    /// session (the rho = beta2 direct check).
    fn input_beta2(&mut self, beta2: &EvalPoint) -> Result<Option<Decision>, ProtocolError>;
    /// Step 2: the verifier's line.
    fn send_line(&mut self) -> Result<Line, ProtocolError>;
    /// Step 2: one commitment matrix entry (column-major).
    fn commit_entry(&mut self, value: Element) -> Result<(), ProtocolError>;
    /// Step 2: the correction tuple, then the revealed column.
    fn commit_corrections(&mut self, gamma: &[Element]) -> Result<(), ProtocolError>;
    fn commit_column(&mut self, k: usize) -> Result<(), ProtocolError>;
    /// Step 3: the temporal decommitment (point, certificate index).
    fn temporal_decommit(&mut self) -> Result<(EvalPoint, u64), ProtocolError>;
    /// Step 4: the decommit line.
    fn send_decommit_line(&mut self) -> Result<Line, ProtocolError>;
    /// Step 4: one opening evaluation.
    fn opening_eval(&mut self, value: Element) -> Result<(), ProtocolError>;
    /// Final decision (only meaningful when the session ran to completion).
    fn decide(&mut self) -> Decision;
    /// Snapshot of retained memory (defined at the end of step 0, which is
    /// where the simulator queries it).
    fn snapshot(&self) -> Snapshot;
    fn meter(&self) -> &SpaceMeter;
    /// Draws the verifier consumed, in order, for view recording.
    fn take_randomness_log(&mut self) -> Vec<(String, Vec<u64>)>;
}

/// The honest metered verifier.
pub struct HonestZkPepVerifier<'a> {
    params: ProtocolParams,
    map: &'a dyn StreamPolyMap,
    alpha: Element,
    rng: SessionRng,
    meter: SpaceMeter,
    rand_log: Vec<(String, Vec<u64>)>,
    // retained protocol state
    rho: Vec<Element>,
    ell: Option<u64>,
    z_index: u64,
    accumulator: Option<Box<dyn StreamAccumulator>>,
    fx_rho: Option<Element>,
    beta2: Option<EvalPoint>,
    phi: Option<Element>,
    sigma: Option<EvalPoint>,
    fingerprint: Option<MatrixFingerprint>,
    fingerprint_value: Option<Element>,
    correction: Option<Element>,
    gamma_weights: Option<Vec<Element>>, // chi_i(phi), retained only while gamma streams
    k: Option<usize>,
    target: Option<Element>,
    phi2: Option<Element>,
    opening_nodes: Vec<Element>,
    opening_pos: usize,
    g_zero: Element,
    g_phi2: Element,
    decision: Option<Decision>,
    commit_lde: LdeSpec,
}

impl<'a> HonestZkPepVerifier<'a> {
    pub fn new(
        params: &ProtocolParams,
        map: &'a dyn StreamPolyMap,
        alpha: Element,
        mut rng: SessionRng,
    ) -> Result<Self, ProtocolError> {
        params.validate()?;
        params.validate_zk_gate()?;
        let spec = params.field;
        let commit_lde = params.commit_lde()?;
        let mut meter = SpaceMeter::unbounded();
        // step 0 state: the secret point and the certificate slot
        let rho: Vec<Element> = (0..params.m)
            .map(|_| spec.sample_uniform(&mut rng, &[]))
            .collect::<Result<_, _>>()?;
        meter.charge_elements("rho", spec, params.m as u64)?;
        meter.charge("ell", bits_for_range(params.v))?;
        let rand_log = vec![(
            "rho".to_string(),
            rho.iter().map(|e| e.repr()).collect::<Vec<u64>>(),
        )];
        Ok(HonestZkPepVerifier {
            params: params.clone(),
            map,
            alpha,
            rng,
            meter,
            rand_log,
            rho,
            ell: None,
            z_index: 0,
            accumulator: None,
            fx_rho: None,
            beta2: None,
            phi: None,
            sigma: None,
            fingerprint: None,
            fingerprint_value: None,
            correction: None,
            gamma_weights: None,
            k: None,
            target: None,
            phi2: None,
            opening_nodes: Vec::new(),
            opening_pos: 0,
            g_zero: spec.zero(),
            g_phi2: spec.zero(),
            decision: None,
            commit_lde,
        })
    }

    fn rho_point(&self) -> EvalPoint {
        EvalPoint(self.rho.clone())
    }

    /// Retained protocol state must match the meter ledger exactly; called
    /// at phase boundaries in debug builds.
    fn audit(&self) {
        if cfg!(debug_assertions) {
            assert!(self.meter.audit_ledger());
        }
    }
}

impl<'a> ZkPepVerifier for HonestZkPepVerifier<'a> {
    fn setup_symbol(&mut self, zi: &EvalPoint, index: u64) -> Result<(), ProtocolError> {
        self.z_index = index;
        if self.ell.is_none() && zi.coords() == self.rho.as_slice() {
            self.ell = Some(index);
        }
        Ok(())
    }

    fn setup_end(&mut self) -> Result<SetupVerdict, ProtocolError> {
        self.audit();
        if self.ell.is_none() {
            self.decision = Some(Decision::Reject(RejectReason::TemporalMiss));
            return Ok(SetupVerdict::Reject);
        }
        // step 1 begins: the streaming f-evaluator
        let acc = self.map.start(&self.rho_point())?;
        self.meter.charge("f-accumulator", acc.retained_bits())?;
        self.accumulator = Some(acc);
        Ok(SetupVerdict::Continue)
    }

    fn input_update(&mut self, symbols: &[Element]) -> Result<(), ProtocolError> {
        self.accumulator
            .as_mut()
            .expect("input after setup")
            .update(symbols)
    }

    fn input_beta2(&mut self, beta2: &EvalPoint) -> Result<Option<Decision>, ProtocolError> {
        let fx = self.accumulator.as_ref().expect("streamed").finalize();
        self.meter.release_slot("f-accumulator");
        self.accumulator = None;
        self.meter.charge_elements("fx-rho", self.params.field, 1)?;
        self.fx_rho = Some(fx);
        if beta2.coords() == self.rho.as_slice() {
            // direct check: the verifier already holds f^x(beta2)
            let d = if fx == self.alpha {
                Decision::Accept
            } else {
                Decision::Reject(RejectReason::DirectCheckFailed)
            };
            self.decision = Some(d.clone());
            return Ok(Some(d));
        }
        self.meter
            .charge_elements("beta2", self.params.field, self.params.m as u64)?;
        self.beta2 = Some(beta2.clone());
        self.audit();
        Ok(None)
    }

    fn send_line(&mut self) -> Result<Line, ProtocolError> {
        let spec = self.params.field;
        let dm = self.params.d as u64 * self.params.m as u64;
        // phi ~ F^x minus [dm]
        let mut exclude = vec![spec.zero()];
        for i in 1..=dm {
            exclude.push(spec.embed_index(i)?);
        }
        let phi = spec.sample_uniform(&mut self.rng, &exclude)?;
        self.rand_log.push(("phi".into(), vec![phi.repr()]));
        self.meter.charge_elements("phi", spec, 1)?;
        self.phi = Some(phi);
        let line = line_through(self.beta2.as_ref().expect("beta2 stored"), &self.rho_point(), phi)?;
        // beta2 is not needed once the line is on the wire
        self.meter.release_slot("beta2");
        self.beta2 = None;
        // sigma and the commit-phase fingerprint accumulator
        let sigma = self.commit_lde.sample_point(&mut self.rng);
        self.rand_log.push(("sigma".into(), sigma.reprs()));
        self.meter.charge_elements("sigma", spec, self.params.m as u64)?;
        let dm32 = self.params.d * self.params.m as u32;
        let (_, weights) = pep_chi_weights(phi, dm32, spec)?;
        let fp = MatrixFingerprint::new(self.commit_lde, dm as usize, vec![(sigma.clone(), weights)])?;
        self.meter.charge("fingerprint-accumulator", fp.retained_bits())?;
        self.sigma = Some(sigma);
        self.fingerprint = Some(fp);
        self.audit();
        Ok(line)
    }

    fn commit_entry(&mut self, value: Element) -> Result<(), ProtocolError> {
        self.fingerprint
            .as_mut()
            .expect("commit after line")
            .ingest(value, IngestOrder::ColumnMajor)
    }

    fn commit_corrections(&mut self, gamma: &[Element]) -> Result<(), ProtocolError> {
        let spec = self.params.field;
        let fp = self.fingerprint.take().expect("commit streamed");
        if !fp.is_complete() {
            return Err(ProtocolError::Protocol("commitment matrix truncated".into()));
        }
        let value = fp.finalize()[0];
        self.meter.release_slot("fingerprint-accumulator");
        self.meter.charge_elements("fingerprint-value", spec, 1)?;
        self.fingerprint_value = Some(value);
        // correction gamma = chi(phi) . corrections, streamed
        let dm = self.params.d * self.params.m as u32;
        let (chi0, weights) = pep_chi_weights(self.phi.expect("phi drawn"), dm, spec)?;
        if gamma.len() != dm as usize {
            return Err(ProtocolError::Protocol(format!(
                "correction tuple has {} entries, expected {dm}",
                gamma.len()
            )));
        }
        let mut corr = spec.zero();
        for (w, &g) in weights.iter().zip(gamma) {
            corr = corr + *w * g;
        }
        self.meter.charge_elements("correction", spec, 1)?;
        self.correction = Some(corr);
        self.gamma_weights = None;
        // the opening target is fixed now: f^x(rho) - chi_0(phi) * alpha;
        // phi and the raw fingerprint of the input are folded into it
        let target = self.fx_rho.expect("input streamed") - chi0 * self.alpha;
        self.meter.release_slot("fx-rho");
        self.meter.release_slot("phi");
        self.fx_rho = None;
        self.phi = None;
        self.meter.charge_elements("target", spec, 1)?;
        self.target = Some(target);
        Ok(())
    }

    fn commit_column(&mut self, k: usize) -> Result<(), ProtocolError> {
        self.meter.charge("k", bits_for_range(self.params.p))?;
        self.k = Some(k);
        self.audit();
        Ok(())
    }

    fn temporal_decommit(&mut self) -> Result<(EvalPoint, u64), ProtocolError> {
        let ell = self.ell.expect("certificate stored");
        let rho = self.rho_point();
        // rho and the certificate are on the wire now; release both
        self.meter.release_slot("rho");
        self.meter.release_slot("ell");
        self.audit();
        Ok((rho, ell))
    }

    fn send_decommit_line(&mut self) -> Result<Line, ProtocolError> {
        let spec = self.params.field;
        let phi2 = spec.sample_uniform(&mut self.rng, &[spec.zero()])?;
        self.rand_log.push(("phi2".into(), vec![phi2.repr()]));
        self.meter.charge_elements("phi2", spec, 1)?;
        self.phi2 = Some(phi2);
        let k_point = self.commit_lde.index_to_point(self.k.expect("k stored"));
        let line = line_through(&k_point, self.sigma.as_ref().expect("sigma"), phi2)?;
        // sigma is not needed once the line is sent
        self.meter.release_slot("sigma");
        self.sigma = None;
        let degree = self.commit_lde.d * self.params.m as u32;
        self.opening_nodes = (1..=degree as u64 + 1)
            .map(|i| spec.embed_index(i))
            .collect::<Result<_, _>>()?;
        self.opening_pos = 0;
        self.g_zero = spec.zero();
        self.g_phi2 = spec.zero();
        self.meter.charge_elements("g-accumulators", spec, 2)?;
        self.audit();
        Ok(line)
    }

    fn opening_eval(&mut self, value: Element) -> Result<(), ProtocolError> {
        let spec = self.params.field;
        let j = self.opening_pos;
        if j >= self.opening_nodes.len() {
            return Err(ProtocolError::Protocol("opening overran".into()));
        }
        let phi2 = self.phi2.expect("phi2 drawn");
        let node_j = self.opening_nodes[j];
        let mut w_phi2 = spec.one();
        let mut w_zero = spec.one();
        for (l, &node_l) in self.opening_nodes.iter().enumerate() {
            if l == j {
                continue;
            }
            let denom_inv = (node_j - node_l).inv()?;
            w_phi2 = w_phi2 * (phi2 - node_l) * denom_inv;
            w_zero = w_zero * (spec.zero() - node_l) * denom_inv;
        }
        self.g_phi2 = self.g_phi2 + value * w_phi2;
        self.g_zero = self.g_zero + value * w_zero;
        self.opening_pos += 1;
        Ok(())
    }

    fn decide(&mut self) -> Decision {
        if let Some(d) = &self.decision {
            return d.clone();
        }
        if self.opening_pos != self.opening_nodes.len() {
            return Decision::Reject(RejectReason::MalformedMessage);
        }
        let fingerprint_ok = self.g_phi2 == self.fingerprint_value.expect("fingerprint saved");
        let opening_ok =
            self.g_zero + self.correction.expect("correction saved") == self.target.expect("target");
        if fingerprint_ok && opening_ok {
            Decision::Accept
        } else if !fingerprint_ok {
            Decision::Reject(RejectReason::FingerprintMismatch)
        } else {
            Decision::Reject(RejectReason::OpeningMismatch)
        }
    }

    fn snapshot(&self) -> Snapshot {
        // retained state at the end of step 0: rho and the certificate
        let spec = self.params.field;
        let mut w = BitWriter::new();
        for e in &self.rho {
            w.write(e.repr(), spec.element_bits());
        }
        let ell_bits = bits_for_range(self.params.v);
        match self.ell {
            Some(l) => {
                w.write(1, 1);
                w.write(l, ell_bits);
            }
            None => {
                w.write(0, 1);
                w.write(0, ell_bits);
            }
        }
        w.finish()
    }

    fn meter(&self) -> &SpaceMeter {
        &self.meter
    }

    fn take_randomness_log(&mut self) -> Vec<(String, Vec<u64>)> {
        std::mem::take(&mut self.rand_log)
    }
}

/// Decodes an honest-layout snapshot into (rho, certificate).
pub fn decode_honest_snapshot(
    snapshot: &Snapshot,
    params: &ProtocolParams,
) -> (EvalPoint, Option<u64>) {
    let spec = params.field;
    let mut r = BitReader::new(snapshot);
    let rho = EvalPoint(
        (0..params.m)
            .map(|_| {
                spec.element(r.read(spec.element_bits()) % spec.order())
                    .expect("in range")
            })
            .collect(),
    );
    let present = r.read(1) == 1;
    let ell = r.read(bits_for_range(params.v));
    (rho, if present { Some(ell) } else { None })
}

/// The cheating verifier that requests the line through j and j+1 instead of
/// an honestly random point, then fabricates its temporal decommitment. It
/// behaves honestly during setup (so it holds one valid certificate), but at
/// step 3 it reveals the adjacent domain point, for which it has no
/// certificate except by collision.
pub struct JPlusOneVerifier<'a> {
    inner: HonestZkPepVerifier<'a>,
    data_lde: LdeSpec,
    fabricated: Option<EvalPoint>,
}

impl<'a> JPlusOneVerifier<'a> {
    pub fn new(
        params: &ProtocolParams,
        map: &'a dyn StreamPolyMap,
        alpha: Element,
        rng: SessionRng,
    ) -> Result<Self, ProtocolError> {
        let data_lde = params.data_lde(crate::poly::InterpolationDomain::OneBased)?;
        Ok(JPlusOneVerifier {
            inner: HonestZkPepVerifier::new(params, map, alpha, rng)?,
            data_lde,
            fabricated: None,
        })
    }

    /// The adjacent grid point of the index beta2 identifies, wrapping at
    /// the end of the grid.
    fn next_point(&self, beta2: &EvalPoint) -> EvalPoint {
        let grid = self.data_lde.grid_size();
        for i in 1..=grid {
            if self.data_lde.index_to_point(i) == *beta2 {
                let next = if i == grid { 1 } else { i + 1 };
                return self.data_lde.index_to_point(next);
            }
        }
        // beta2 off the grid: fall back to the first grid point
        self.data_lde.index_to_point(1)
    }
}

impl<'a> ZkPepVerifier for JPlusOneVerifier<'a> {
    fn setup_symbol(&mut self, zi: &EvalPoint, index: u64) -> Result<(), ProtocolError> {
        self.inner.setup_symbol(zi, index)
    }

    fn setup_end(&mut self) -> Result<SetupVerdict, ProtocolError> {
        self.inner.setup_end()
    }

    fn input_update(&mut self, symbols: &[Element]) -> Result<(), ProtocolError> {
        // ignores the input, but the evaluator runs to keep the layout honest
        self.inner.input_update(symbols)
    }

    fn input_beta2(&mut self, beta2: &EvalPoint) -> Result<Option<Decision>, ProtocolError> {
        self.fabricated = Some(self.next_point(beta2));
        self.inner.input_beta2(beta2)
    }

    fn send_line(&mut self) -> Result<Line, ProtocolError> {
        // the line through j and j+1: L(0) = beta2, L(phi) = j+1
        let spec = self.inner.params.field;
        let dm = self.inner.params.d as u64 * self.inner.params.m as u64;
        let mut exclude = vec![spec.zero()];
        for i in 1..=dm {
            exclude.push(spec.embed_index(i)?);
        }
        let phi = spec.sample_uniform(&mut self.inner.rng, &exclude)?;
        self.inner.rand_log.push(("phi".into(), vec![phi.repr()]));
        self.inner.meter.charge_elements("phi", spec, 1)?;
        self.inner.phi = Some(phi);
        let beta2 = self.inner.beta2.clone().expect("beta2 stored");
        let target_point = self.fabricated.clone().expect("beta2 seen");
        let line = line_through(&beta2, &target_point, phi)?;
        self.inner.meter.release_slot("beta2");
        self.inner.beta2 = None;
        let sigma = self.inner.commit_lde.sample_point(&mut self.inner.rng);
        self.inner.rand_log.push(("sigma".into(), sigma.reprs()));
        self.inner
            .meter
            .charge_elements("sigma", spec, self.inner.params.m as u64)?;
        let dm32 = self.inner.params.d * self.inner.params.m as u32;
        let (_, weights) = pep_chi_weights(phi, dm32, spec)?;
        let fp = MatrixFingerprint::new(
            self.inner.commit_lde,
            dm as usize,
            vec![(sigma.clone(), weights)],
        )?;
        self.inner
            .meter
            .charge("fingerprint-accumulator", fp.retained_bits())?;
        self.inner.sigma = Some(sigma);
        self.inner.fingerprint = Some(fp);
        Ok(line)
    }

    fn commit_entry(&mut self, value: Element) -> Result<(), ProtocolError> {
        self.inner.commit_entry(value)
    }

    fn commit_corrections(&mut self, gamma: &[Element]) -> Result<(), ProtocolError> {
        self.inner.commit_corrections(gamma)
    }

    fn commit_column(&mut self, k: usize) -> Result<(), ProtocolError> {
        self.inner.commit_column(k)
    }

    fn temporal_decommit(&mut self) -> Result<(EvalPoint, u64), ProtocolError> {
        // reveal the fabricated point with the only certificate it holds
        let ell = self.inner.ell.expect("certificate stored");
        let fabricated = self.fabricated.clone().expect("beta2 seen");
        self.inner.meter.release_slot("rho");
        self.inner.meter.release_slot("ell");
        Ok((fabricated, ell))
    }

    fn send_decommit_line(&mut self) -> Result<Line, ProtocolError> {
        self.inner.send_decommit_line()
    }

    fn opening_eval(&mut self, value: Element) -> Result<(), ProtocolError> {
        self.inner.opening_eval(value)
    }

    fn decide(&mut self) -> Decision {
        self.inner.decide()
    }

    fn snapshot(&self) -> Snapshot {
        self.inner.snapshot()
    }

    fn meter(&self) -> &SpaceMeter {
        self.inner.meter()
    }

    fn take_randomness_log(&mut self) -> Vec<(String, Vec<u64>)> {
        self.inner.take_randomness_log()
    }
}

/// Prover strategy: hooks at the two messages a cheating prover can pervert.
pub trait ZkPepProverStrategy {
    /// The tuple committed at step 2 (honest: f^x restricted to the line at
    /// parameters 1..=dm).
    fn committed_tuple(&mut self, honest: &[Element], ctx: &ProverCtx) -> Vec<Element>;
    /// The opening sent at step 4 (honest: the combined-row LDE restricted
    /// to the decommit line).
    fn opening(&mut self, honest: &[Element], ctx: &OpeningCtx) -> Vec<Element>;
}

pub struct ProverCtx<'a> {
    pub line: &'a Line,
    pub claim: Element,
    pub f_beta2: Element,
    pub params: &'a ProtocolParams,
}

pub struct OpeningCtx<'a> {
    pub phi: Element,
    pub claim: Element,
    pub f_beta2: Element,
    pub nodes: &'a [Element],
    pub degree: u32,
    pub params: &'a ProtocolParams,
}

/// Honest prover: commits to the true restriction and opens honestly.
pub struct HonestZkPepProver;

impl ZkPepProverStrategy for HonestZkPepProver {
    fn committed_tuple(&mut self, honest: &[Element], _ctx: &ProverCtx) -> Vec<Element> {
        honest.to_vec()
    }

    fn opening(&mut self, honest: &[Element], _ctx: &OpeningCtx) -> Vec<Element> {
        honest.to_vec()
    }
}

/// Soundness case 1: commits and opens honestly while the claim is wrong.
/// Rejected with probability 1 (the opened value cannot match the target).
pub type ZkPepCase1Prover = HonestZkPepProver;

/// Soundness case 2: commits honestly but forges the opening so that the
/// opened value matches the (wrong) target; caught by the fingerprint check
/// except when phi2 lands in the forgery's root set.
pub struct ZkPepCase2Prover;

impl ZkPepProverStrategy for ZkPepCase2Prover {
    fn committed_tuple(&mut self, honest: &[Element], _ctx: &ProverCtx) -> Vec<Element> {
        honest.to_vec()
    }

    fn opening(&mut self, honest: &[Element], ctx: &OpeningCtx) -> Vec<Element> {
        let spec = ctx.claim.spec();
        let dm = ctx.params.d * ctx.params.m as u32;
        let (chi0, _) = pep_chi_weights(ctx.phi, dm, spec).expect("weights");
        // shift g(0) by chi_0(phi) (f(beta2) - alpha) so the opening check
        // passes, hiding the shift in a polynomial with `degree` roots
        let delta = chi0 * (ctx.f_beta2 - ctx.claim);
        crate::commit::best_shift_forgery(honest, ctx.nodes, delta, spec, ctx.degree)
    }
}

/// Soundness case 3: commits to a crafted tuple (off from the truth by a
/// polynomial vanishing on dm chosen parameters) and opens honestly; caught
/// unless the verifier's phi landed in the crafted root set, which happens
/// with probability exactly dm/(q - dm - 1).
pub struct ZkPepCase3Prover;

impl ZkPepProverStrategy for ZkPepCase3Prover {
    fn committed_tuple(&mut self, honest: &[Element], ctx: &ProverCtx) -> Vec<Element> {
        let params = ctx.params;
        let spec = params.field;
        let dm = params.d * params.m as u32;
        // Psi of degree dm with Psi(0) = f(beta2) - alpha and roots at the
        // dm smallest elements of F^x minus [dm]
        let delta = ctx.f_beta2 - ctx.claim;
        let mut pts: Vec<(Element, Element)> = vec![(spec.zero(), delta)];
        let mut candidate = dm as u64 + 1;
        while pts.len() < dm as usize + 1 {
            pts.push((spec.embed_index(candidate).expect("small"), spec.zero()));
            candidate += 1;
        }
        let psi = crate::poly::interpolate_univariate(&pts, dm).expect("distinct");
        honest
            .iter()
            .enumerate()
            .map(|(i, &h)| {
                let node = spec.embed_index(i as u64 + 1).expect("small");
                h - psi.eval(node)
            })
            .collect()
    }

    fn opening(&mut self, honest: &[Element], _ctx: &OpeningCtx) -> Vec<Element> {
        honest.to_vec()
    }
}

/// Runs one zero-knowledge polynomial-evaluation session end to end.
///
/// The prover's randomness (z, y, k) comes from the addressable source, so a
/// paired simulator run with the same source reproduces it exactly.
pub fn zk_pep_run(
    map: &dyn StreamPolyMap,
    alpha: Element,
    x: &mut Tape<Element>,
    beta2: &EvalPoint,
    params: &ProtocolParams,
    prover: &mut dyn ZkPepProverStrategy,
    verifier: &mut dyn ZkPepVerifier,
    prover_rand: &AddressableRandom,
) -> Result<SessionOutcome, ProtocolError> {
    params.validate()?;
    params.validate_zk_gate()?;
    let spec = params.field;
    let eb = spec.element_bits();
    let m = params.m as u64;
    let dm = params.d as u64 * m;
    let commit_lde = params.commit_lde()?;
    let mut view = View::new(spec);
    let mut setup_bits = 0u64;
    let mut interactive_bits = 0u64;
    let mut rounds = 0u32;

    let flush_randomness =
        |verifier: &mut dyn ZkPepVerifier, view: &mut View| -> Result<(), ProtocolError> {
            for (label, payload) in verifier.take_randomness_log() {
                view.record(Origin::Randomness, &label, payload)?;
            }
            Ok(())
        };

    // Step 0: temporal commitment.
    flush_randomness(verifier, &mut view)?;
    let mut z_payload = Vec::with_capacity((params.v * m) as usize);
    for i in 1..=params.v {
        let zi = z_point_at(prover_rand, params, i);
        z_payload.extend(zi.reprs());
        verifier.setup_symbol(&zi, i)?;
    }
    setup_bits += params.v * m * eb;
    rounds += 1;
    view.record(Origin::Prover, "z", z_payload)?;
    if let SetupVerdict::Reject = verifier.setup_end()? {
        flush_randomness(verifier, &mut view)?;
        let decision = verifier.decide();
        return Ok(SessionOutcome {
            decision,
            metrics: metrics_of(verifier, setup_bits, interactive_bits, rounds),
            output: None,
            view,
        });
    }

    // Step 1: input streaming.
    let archive: Vec<Element> = x.archive().to_vec();
    let arity = map.arity();
    let mut x_payload = Vec::with_capacity(x.len());
    for _ in 0..map.stream_len() {
        let mut symbols = Vec::with_capacity(arity);
        for _ in 0..arity {
            let sym = x.next()?;
            x_payload.push(sym.repr());
            symbols.push(sym);
        }
        verifier.input_update(&symbols)?;
    }
    view.record(Origin::Input, "x", x_payload)?;
    view.record(Origin::Input, "beta2", beta2.reprs())?;
    if let Some(decision) = verifier.input_beta2(beta2)? {
        flush_randomness(verifier, &mut view)?;
        return Ok(SessionOutcome {
            decision,
            metrics: metrics_of(verifier, setup_bits, interactive_bits, rounds),
            output: None,
            view,
        });
    }

    // Step 2: algebraic commitment.
    let line = verifier.send_line()?;
    flush_randomness(verifier, &mut view)?;
    interactive_bits += m * eb; // L(1), canonical form
    rounds += 1;
    let mut honest_tuple = Vec::with_capacity(dm as usize);
    for i in 1..=dm {
        let t = spec.embed_index(i)?;
        honest_tuple.push(map.eval_full(&archive, &line.eval(t))?);
    }
    let f_beta2 = map.eval_full(&archive, &line.eval(spec.zero()))?;
    let tuple = prover.committed_tuple(
        &honest_tuple,
        &ProverCtx {
            line: &line,
            claim: alpha,
            f_beta2,
            params,
        },
    );
    if tuple.len() != dm as usize {
        return Err(ProtocolError::Protocol("committed tuple length".into()));
    }
    let k = k_at(prover_rand, params);
    let mut y_payload = Vec::with_capacity((dm * params.p) as usize);
    for col in 0..params.p {
        for row in 0..dm {
            let e = y_entry_at(prover_rand, params, row, col);
            y_payload.push(e.repr());
            verifier.commit_entry(e)?;
        }
    }
    view.record(Origin::Prover, "y", y_payload)?;
    interactive_bits += dm * params.p * eb;
    let corrections: Vec<Element> = tuple
        .iter()
        .enumerate()
        .map(|(i, &t)| t - y_entry_at(prover_rand, params, i as u64, k as u64 - 1))
        .collect();
    view.record(
        Origin::Prover,
        "gamma",
        corrections.iter().map(|e| e.repr()).collect(),
    )?;
    interactive_bits += dm * eb;
    verifier.commit_corrections(&corrections)?;
    view.record(Origin::Prover, "k", vec![k as u64])?;
    interactive_bits += bits_for_range(params.p);
    verifier.commit_column(k)?;
    rounds += 1;

    // Step 3: temporal decommitment.
    let (revealed, ell) = verifier.temporal_decommit()?;
    interactive_bits += m * eb + bits_for_range(params.v);
    rounds += 1;
    // prover checks the certificate and the excluded parameter set
    let cert_ok = ell >= 1
        && ell <= params.v
        && z_point_at(prover_rand, params, ell) == revealed;
    if !cert_ok {
        flush_randomness(verifier, &mut view)?;
        return Ok(abort_outcome(
            verifier,
            view,
            AbortReason::CertificateInvalid,
            setup_bits,
            interactive_bits,
            rounds,
        ));
    }
    let phi = match line.param_of(&revealed) {
        Some(t) if !t.is_zero() && t.repr() > dm => Some(t),
        Some(t) => {
            // the parameter exists but is in {0} union [dm]
            let excluded = t.is_zero() || t.repr() <= dm;
            debug_assert!(excluded);
            None
        }
        None => None,
    };
    let Some(phi) = phi else {
        flush_randomness(verifier, &mut view)?;
        return Ok(abort_outcome(
            verifier,
            view,
            AbortReason::ParameterExcluded,
            setup_bits,
            interactive_bits,
            rounds,
        ));
    };

    // Step 4: algebraic decommitment.
    let dec_line = verifier.send_decommit_line()?;
    flush_randomness(verifier, &mut view)?;
    interactive_bits += m * eb;
    rounds += 1;
    let degree = commit_lde.d * params.m as u32;
    let nodes: Vec<Element> = (1..=degree as u64 + 1)
        .map(|i| spec.embed_index(i))
        .collect::<Result<_, _>>()?;
    let (_, weights) = pep_chi_weights(phi, params.d * params.m as u32, spec)?;
    // combined row w = chi(phi) . y, materialized prover-side
    let mut w = vec![spec.zero(); params.p as usize];
    for (i, wt) in weights.iter().enumerate() {
        for (c, slot) in w.iter_mut().enumerate() {
            *slot = *slot + *wt * y_entry_at(prover_rand, params, i as u64, c as u64);
        }
    }
    let honest_opening: Vec<Element> = nodes
        .iter()
        .map(|&t| commit_lde.lde_eval(&w, &dec_line.eval(t)))
        .collect::<Result<_, _>>()?;
    let opening = prover.opening(
        &honest_opening,
        &OpeningCtx {
            phi,
            claim: alpha,
            f_beta2,
            nodes: &nodes,
            degree,
            params,
        },
    );
    view.record(
        Origin::Prover,
        "decommit-evals",
        opening.iter().map(|e| e.repr()).collect(),
    )?;
    interactive_bits += (degree as u64 + 1) * eb;
    rounds += 1;
    for &e in &opening {
        verifier.opening_eval(e)?;
    }
    let decision = verifier.decide();
    let output = decision.accepted().then_some(alpha);
    Ok(SessionOutcome {
        decision,
        metrics: metrics_of(verifier, setup_bits, interactive_bits, rounds),
        output,
        view,
    })
}

fn metrics_of(
    verifier: &dyn ZkPepVerifier,
    setup: u64,
    interactive: u64,
    rounds: u32,
) -> SessionMetrics {
    SessionMetrics {
        peak_bits: verifier.meter().peak_bits(),
        comm_setup_bits: setup,
        comm_interactive_bits: interactive,
        rounds,
    }
}

fn abort_outcome(
    verifier: &dyn ZkPepVerifier,
    view: View,
    reason: AbortReason,
    setup: u64,
    interactive: u64,
    rounds: u32,
) -> SessionOutcome {
    SessionOutcome {
        decision: Decision::Reject(RejectReason::Abort(reason)),
        metrics: metrics_of(verifier, setup, interactive, rounds),
        output: None,
        view,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::commit::ProtocolKind;
    use crate::field::FieldSpec;
    use crate::pep::LdeMap;
    use crate::poly::{InterpolationDomain, LdeSpec};

    pub fn test_params(q: &str, d: u32, m: usize, n: usize, v: u64) -> (ProtocolParams, LdeMap) {
        let field = FieldSpec::parse(q).unwrap();
        let params = ProtocolParams::new(ProtocolKind::ZkPep, field, d, m, n, None)
            .unwrap()
            .with_p((d as u64 + 1).pow(m as u32))
            .with_v(v);
        let lde = LdeSpec::new(field, n, d, m, InterpolationDomain::OneBased).unwrap();
        (params, LdeMap::new(lde))
    }

    fn run_once(
        seed: u64,
        session: u64,
        params: &ProtocolParams,
        map: &LdeMap,
        x: &[Element],
        j: usize,
        alpha: Element,
        prover: &mut dyn ZkPepProverStrategy,
    ) -> SessionOutcome {
        let beta2 = map.spec.index_to_point(j);
        let mut verifier =
            HonestZkPepVerifier::new(params, map, alpha, SessionRng::from_seed(seed, session))
                .unwrap();
        let rand = AddressableRandom::new(seed ^ 0xabcd ^ session.wrapping_mul(0x1234567));
        let mut tape = Tape::new(x.to_vec());
        zk_pep_run(
            map, alpha, &mut tape, &beta2, params, prover, &mut verifier, &rand,
        )
        .unwrap()
    }

    #[test]
    fn honest_run_accepts_after_temporal_hit() {
        let (params, map) = test_params("64", 2, 2, 9, 4 * 64 * 64);
        let f = params.field;
        let mut rng = SessionRng::from_seed(100, 0);
        let mut accepts = 0;
        let mut misses = 0;
        let trials = 60;
        for t in 0..trials {
            let x: Vec<Element> = (0..9)
                .map(|_| f.sample_uniform(&mut rng, &[]).unwrap())
                .collect();
            let out = run_once(7, t, &params, &map, &x, 4, x[3], &mut HonestZkPepProver);
            match out.decision {
                Decision::Accept => accepts += 1,
                Decision::Reject(RejectReason::TemporalMiss) => misses += 1,
                other => panic!("unexpected decision {other:?}"),
            }
        }
        // with v = 4 q^m the miss rate is about e^-4, so nearly all accept
        assert!(accepts >= trials - 5, "accepts {accepts}, misses {misses}");
    }

    #[test]
    fn case1_rejects_always() {
        let (params, map) = test_params("64", 2, 2, 9, 4 * 64 * 64);
        let f = params.field;
        let mut rng = SessionRng::from_seed(200, 0);
        for t in 0..50 {
            let x: Vec<Element> = (0..9)
                .map(|_| f.sample_uniform(&mut rng, &[]).unwrap())
                .collect();
            let wrong = x[3] + f.one();
            let out = run_once(9, t, &params, &map, &x, 4, wrong, &mut HonestZkPepProver);
            assert!(
                !out.decision.accepted(),
                "case-1 prover must never be accepted"
            );
        }
    }

    #[test]
    fn view_layout_matches_protocol_order() {
        let (params, map) = test_params("64", 2, 2, 9, 4 * 64 * 64);
        let f = params.field;
        let mut rng = SessionRng::from_seed(300, 0);
        let x: Vec<Element> = (0..9)
            .map(|_| f.sample_uniform(&mut rng, &[]).unwrap())
            .collect();
        // find a completing seed
        for t in 0..50 {
            let out = run_once(11, t, &params, &map, &x, 4, x[3], &mut HonestZkPepProver);
            if !out.decision.accepted() {
                continue;
            }
            let labels: Vec<(Origin, String)> = out
                .view
                .entries
                .iter()
                .map(|e| (e.origin, e.label.clone()))
                .collect();
            let expect = vec![
                (Origin::Randomness, "rho".to_string()),
                (Origin::Prover, "z".to_string()),
                (Origin::Input, "x".to_string()),
                (Origin::Input, "beta2".to_string()),
                (Origin::Randomness, "phi".to_string()),
                (Origin::Randomness, "sigma".to_string()),
                (Origin::Prover, "y".to_string()),
                (Origin::Prover, "gamma".to_string()),
                (Origin::Prover, "k".to_string()),
                (Origin::Randomness, "phi2".to_string()),
                (Origin::Prover, "decommit-evals".to_string()),
            ];
            assert_eq!(labels, expect);
            // serialization round-trip is stable
            let s = out.view.serialize_json();
            let back = crate::stream::View::deserialize_json(&s).unwrap();
            assert_eq!(back.serialize_json(), s);
            return;
        }
        panic!("no completing run found");
    }
}
