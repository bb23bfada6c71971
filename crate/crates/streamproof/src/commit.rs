//! Prover-to-verifier basic and algebraic commitment protocols and the
//! verifier-to-prover temporal commitment mechanics.
//!
//! A basic commitment to a field element is the triple (y, alpha - y_k, k)
//! for uniform y in F^p and k in [p]; an algebraic commitment hides an
//! l-tuple column-wise at one shared coordinate k, so a linear combination of
//! the rows opens to the same linear combination of the messages. Decommits
//! run a polynomial-evaluation check against a fingerprint the verifier
//! saved while streaming the commitment.
//!
//! The length-p commitment string is fingerprinted through its own LDE of
//! dimension m (matching the protocol dimension) and degree d_y, the smallest
//! degree with p <= (d_y + 1)^m. Default commitment lengths follow the
//! protocol formulas; tests may override v and p downward to keep trials
//! fast, and the effective values are always reported next to the formula
//! values.

use serde::{Deserialize, Serialize};

use crate::field::{Element, FieldError, FieldSpec};
use crate::poly::{
    interpolate_univariate, line_through, EvalPoint, InterpolationDomain, LdeSpec, Line,
    PolyError,
};
use crate::stream::{bits_for_range, SessionRng, SpaceMeter, StreamError, Tape, View};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ProtocolError {
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Poly(#[from] PolyError),
    #[error(transparent)]
    Stream(#[from] StreamError),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("protocol violation: {0}")]
    Protocol(String),
    #[error("whitebox oracle unavailable for this verifier")]
    UnsupportedVerifier,
}

/// Which protocol family a parameter set is for; fixes the commitment-length
/// formulas and the evaluation-point alphabet.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProtocolKind {
    ZkPep,
    ZkSumcheck,
}

/// Public protocol parameters: field, LDE shape, subcube (sumcheck only),
/// and the temporal/algebraic commitment lengths v and p.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolParams {
    pub field: FieldSpec,
    pub d: u32,
    pub m: usize,
    pub n: usize,
    /// Subcube H as element representatives (sumcheck only).
    pub h: Option<Vec<u64>>,
    /// Temporal commitment length (effective).
    pub v: u64,
    /// Algebraic commitment length (effective).
    pub p: u64,
    /// The protocol formula values of v and p for these parameters; equal to
    /// the effective values unless overridden.
    pub v_formula: u64,
    pub p_formula: u64,
    pub kind: ProtocolKind,
}

pub fn pep_v_formula(q: u64, m: usize) -> u64 {
    let lg = |x: f64| x.log2();
    let val = (q as f64).powi(m as i32) * (lg(m as f64).max(0.0) + lg(lg(q as f64))) / 32.0;
    val.ceil().max(1.0) as u64
}

pub fn pep_p_formula(q: u64, d: u32, m: usize) -> u64 {
    let dmq = d as f64 * m as f64 * q as f64;
    (m as f64 * dmq.powi(3)).ceil().max(1.0) as u64
}

pub fn sumcheck_v_formula(q: u64, m: usize) -> u64 {
    let lg = |x: f64| x.log2();
    let val = (q as f64).powi(m as i32) * (lg(m as f64).max(0.0) + lg(lg(q as f64))) / 96.0;
    val.ceil().max(1.0) as u64
}

pub fn sumcheck_p_formula(q: u64) -> u64 {
    let lg = (q as f64).log2();
    let val = lg * lg.log2();
    2f64.powf(val).ceil().max(1.0) as u64
}

impl ProtocolParams {
    pub fn new(
        kind: ProtocolKind,
        field: FieldSpec,
        d: u32,
        m: usize,
        n: usize,
        h: Option<Vec<u64>>,
    ) -> Result<Self, ProtocolError> {
        let q = field.order();
        let (v_formula, p_formula) = match kind {
            ProtocolKind::ZkPep => (pep_v_formula(q, m), pep_p_formula(q, d, m)),
            ProtocolKind::ZkSumcheck => (sumcheck_v_formula(q, m), sumcheck_p_formula(q)),
        };
        let params = ProtocolParams {
            field,
            d,
            m,
            n,
            h,
            v: v_formula,
            p: p_formula,
            v_formula,
            p_formula,
            kind,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn with_v(mut self, v: u64) -> Self {
        self.v = v.max(1);
        self
    }

    pub fn with_p(mut self, p: u64) -> Self {
        self.p = p.max(1);
        self
    }

    pub fn q(&self) -> u64 {
        self.field.order()
    }

    pub fn validate(&self) -> Result<(), ProtocolError> {
        let q = self.q();
        if q <= self.d as u64 {
            return Err(ProtocolError::InvalidParams(format!(
                "field order {q} must exceed degree {}",
                self.d
            )));
        }
        if (self.d as u64) * (self.m as u64) >= q {
            return Err(ProtocolError::InvalidParams(format!(
                "dm = {} must be below field order {q}",
                self.d as u64 * self.m as u64
            )));
        }
        let cap = (self.d as u128 + 1).checked_pow(self.m as u32);
        if !matches!(cap, Some(c) if self.n as u128 <= c) {
            return Err(ProtocolError::InvalidParams(format!(
                "n = {} exceeds (d+1)^m capacity",
                self.n
            )));
        }
        if self.v < 1 || self.p < 1 {
            return Err(ProtocolError::InvalidParams("v and p must be >= 1".into()));
        }
        if let Some(h) = &self.h {
            if h.is_empty() {
                return Err(ProtocolError::InvalidParams("H must be nonempty".into()));
            }
            if h.len() > self.d as usize + 1 {
                return Err(ProtocolError::InvalidParams(format!(
                    "|H| = {} exceeds d + 1 = {}",
                    h.len(),
                    self.d + 1
                )));
            }
            for &r in h {
                if r >= q {
                    return Err(ProtocolError::InvalidParams(format!(
                        "H element {r} outside field"
                    )));
                }
            }
        }
        Ok(())
    }

    /// The concrete reading of "dm = o(q)" used by the zero-knowledge
    /// sessions: dm must not exceed q / 10.
    pub fn validate_zk_gate(&self) -> Result<(), ProtocolError> {
        let dm = self.d as u64 * self.m as u64;
        if dm * 10 > self.q() {
            return Err(ProtocolError::InvalidParams(format!(
                "zk precondition dm <= q/10 violated: dm = {dm}, q = {}",
                self.q()
            )));
        }
        Ok(())
    }

    /// LDE shape of the data vector itself.
    pub fn data_lde(&self, domain: InterpolationDomain) -> Result<LdeSpec, ProtocolError> {
        Ok(LdeSpec::new(self.field, self.n, self.d, self.m, domain)?)
    }

    /// LDE shape of a length-p commitment string: dimension m, degree d_y
    /// minimal with p <= (d_y + 1)^m.
    pub fn commit_lde(&self) -> Result<LdeSpec, ProtocolError> {
        let mut dy = 1u32;
        loop {
            let cap = (dy as u128 + 1).pow(self.m as u32);
            if cap >= self.p as u128 {
                break;
            }
            dy += 1;
            if dy as u64 >= self.q() {
                return Err(ProtocolError::InvalidParams(format!(
                    "commitment length p = {} needs LDE degree >= field order {}; override p downward",
                    self.p,
                    self.q()
                )));
            }
        }
        let spec = LdeSpec::new(
            self.field,
            self.p as usize,
            dy,
            self.m,
            InterpolationDomain::OneBased,
        )?;
        // the decommit polynomial has degree d_y * m and is sent as
        // d_y * m + 1 evaluations at distinct embedded nodes
        if (spec.d as u64) * (self.m as u64) + 2 > self.q() {
            return Err(ProtocolError::InvalidParams(format!(
                "decommit degree d_y*m = {} too large for field order {}; override p downward",
                spec.d * self.m as u32,
                self.q()
            )));
        }
        Ok(spec)
    }

    pub fn h_elements(&self) -> Result<Vec<Element>, ProtocolError> {
        let h = self
            .h
            .as_ref()
            .ok_or_else(|| ProtocolError::InvalidParams("H not set".into()))?;
        Ok(h.iter()
            .map(|&r| self.field.element(r))
            .collect::<Result<_, _>>()?)
    }
}

/// Basic commitment to a single field element: uniform string y, uniform
/// coordinate k (1-indexed), and the correction alpha - y_k.
#[derive(Debug, Clone)]
pub struct BasicCommitment {
    pub y: Vec<Element>,
    pub gamma: Element,
    pub k: usize,
}

pub fn basic_commit(
    alpha: Element,
    params: &ProtocolParams,
    rng: &mut SessionRng,
) -> Result<BasicCommitment, ProtocolError> {
    let spec = params.field;
    let p = params.p as usize;
    let y: Vec<Element> = (0..p)
        .map(|_| spec.sample_uniform(rng, &[]))
        .collect::<Result<_, _>>()?;
    let k = rng.next_u64_below(p as u64) as usize + 1;
    let gamma = alpha - y[k - 1];
    Ok(BasicCommitment { y, gamma, k })
}

/// Algebraic commitment to an l-tuple: matrix y with one row per message,
/// per-row corrections at a shared hidden column k.
#[derive(Debug, Clone)]
pub struct AlgebraicCommitment {
    /// rows[i] is the commitment string for message i.
    pub rows: Vec<Vec<Element>>,
    pub corrections: Vec<Element>,
    pub k: usize,
}

pub fn algebraic_commit(
    messages: &[Element],
    params: &ProtocolParams,
    rng: &mut SessionRng,
) -> Result<AlgebraicCommitment, ProtocolError> {
    if messages.is_empty() {
        return Err(ProtocolError::InvalidParams(
            "algebraic commitment needs at least one message".into(),
        ));
    }
    let spec = params.field;
    let p = params.p as usize;
    let k = rng.next_u64_below(p as u64) as usize + 1;
    let mut rows = Vec::with_capacity(messages.len());
    let mut corrections = Vec::with_capacity(messages.len());
    for &msg in messages {
        let row: Vec<Element> = (0..p)
            .map(|_| spec.sample_uniform(rng, &[]))
            .collect::<Result<_, _>>()?;
        corrections.push(msg - row[k - 1]);
        rows.push(row);
    }
    Ok(AlgebraicCommitment {
        rows,
        corrections,
        k,
    })
}

impl AlgebraicCommitment {
    /// The virtual string w = coeffs . y (row combination).
    pub fn combined_row(&self, coeffs: &[Element]) -> Vec<Element> {
        let spec = self.rows[0][0].spec();
        let p = self.rows[0].len();
        let mut w = vec![spec.zero(); p];
        for (row, &c) in self.rows.iter().zip(coeffs) {
            for (wc, &yc) in w.iter_mut().zip(row) {
                *wc = *wc + c * yc;
            }
        }
        w
    }
}

/// Streaming ingest of a weighted matrix fingerprint: while the commitment
/// matrix goes by, accumulates y-hat(sigma, weights) = sum_i weights_i *
/// y_i-hat(sigma) for one or more (sigma, weights) pairs in a single pass.
/// Supports both column-major and row-major arrival orders.
pub struct MatrixFingerprint {
    lde: LdeSpec,
    rows: usize,
    pairs: Vec<(EvalPoint, Vec<Element>)>,
    accumulators: Vec<Element>,
    /// scratch for the current column (column-major ingest)
    col_partial: Vec<Element>,
    position: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IngestOrder {
    ColumnMajor,
    RowMajor,
}

impl MatrixFingerprint {
    pub fn new(
        lde: LdeSpec,
        rows: usize,
        pairs: Vec<(EvalPoint, Vec<Element>)>,
    ) -> Result<Self, ProtocolError> {
        for (pt, w) in &pairs {
            if pt.dim() != lde.m || w.len() != rows {
                return Err(ProtocolError::InvalidParams(
                    "fingerprint pair shape mismatch".into(),
                ));
            }
        }
        let zero = lde.field.zero();
        Ok(MatrixFingerprint {
            accumulators: vec![zero; pairs.len()],
            col_partial: vec![zero; pairs.len()],
            lde,
            rows,
            pairs,
            position: 0,
        })
    }

    /// Retained verifier bits: one accumulator per pair plus the position
    /// counter (the sigma points are charged by the caller, which owns them).
    pub fn retained_bits(&self) -> u64 {
        self.lde.field.element_bits() * (2 * self.pairs.len() as u64)
            + bits_for_range((self.rows * self.lde.n).max(2) as u64)
    }

    /// Consumes the next matrix entry. Column-major: entries arrive
    /// (row 1, col 1), (row 2, col 1), ..; row-major: (row 1, col 1),
    /// (row 1, col 2), ...
    pub fn ingest(&mut self, value: Element, order: IngestOrder) -> Result<(), ProtocolError> {
        let p = self.lde.n;
        let (row, col) = match order {
            IngestOrder::ColumnMajor => (self.position % self.rows, self.position / self.rows),
            IngestOrder::RowMajor => (self.position / p, self.position % p),
        };
        if row >= self.rows || col >= p {
            return Err(ProtocolError::Protocol("matrix ingest overflow".into()));
        }
        match order {
            IngestOrder::ColumnMajor => {
                for (j, (_, weights)) in self.pairs.iter().enumerate() {
                    self.col_partial[j] = self.col_partial[j] + weights[row] * value;
                }
                if row == self.rows - 1 {
                    for (j, (sigma, _)) in self.pairs.iter().enumerate() {
                        let chi = self.lde.chi_index(col + 1, sigma)?;
                        self.accumulators[j] = self.accumulators[j] + self.col_partial[j] * chi;
                        self.col_partial[j] = self.lde.field.zero();
                    }
                }
            }
            IngestOrder::RowMajor => {
                for (j, (sigma, weights)) in self.pairs.iter().enumerate() {
                    let chi = self.lde.chi_index(col + 1, sigma)?;
                    self.accumulators[j] = self.accumulators[j] + weights[row] * value * chi;
                }
            }
        }
        self.position += 1;
        Ok(())
    }

    pub fn is_complete(&self) -> bool {
        self.position == self.rows * self.lde.n
    }

    pub fn finalize(&self) -> Vec<Element> {
        self.accumulators.clone()
    }
}

/// Everything the verifier retained from the commit phase for one decommit:
/// the claimed opening target, the correction, the saved fingerprint, the
/// fingerprint point, and the shared column.
#[derive(Debug, Clone)]
pub struct DecommitCheck {
    pub target: Element,
    pub correction: Element,
    pub fingerprint: Element,
    pub sigma: EvalPoint,
    /// 1-indexed column within [p].
    pub k: usize,
}

/// Outcome of one decommit run, with the polynomial the prover sent.
#[derive(Debug, Clone)]
pub struct DecommitOutcome {
    pub accepted: bool,
    pub fingerprint_ok: bool,
    pub opening_ok: bool,
    /// The evaluations actually sent (degree d_y*m poly at nodes 1..D+1).
    pub sent_evals: Vec<Element>,
    pub line: Line,
    pub phi2: Element,
}

/// The decommit protocol: the verifier draws phi2, sends the line through
/// (the embedding of) k and sigma, streams the prover's d_y*m + 1 evaluations
/// of the combined-row LDE restricted to that line, and accepts iff the
/// evaluation at phi2 matches the saved fingerprint and the evaluation at 0
/// plus the correction matches the target.
pub fn run_decommit(
    check: &DecommitCheck,
    params: &ProtocolParams,
    open: impl FnOnce(&Line, &[Element]) -> Vec<Element>,
    rng: &mut SessionRng,
    mut view: Option<&mut View>,
    meter: Option<&mut SpaceMeter>,
) -> Result<DecommitOutcome, ProtocolError> {
    let spec = params.field;
    let commit_lde = params.commit_lde()?;
    let degree = commit_lde.d * params.m as u32;
    let k_point = commit_lde.index_to_point(check.k);
    let phi2 = spec.sample_uniform(rng, &[spec.zero()])?;
    if let Some(v) = view.as_deref_mut() {
        v.record(crate::stream::Origin::Randomness, "phi2", vec![phi2.repr()])?;
    }
    let line = line_through(&k_point, &check.sigma, phi2)?;
    let nodes: Vec<Element> = (1..=degree as u64 + 1)
        .map(|i| spec.embed_index(i))
        .collect::<Result<_, _>>()?;
    let evals = open(&line, &nodes);
    if evals.len() != nodes.len() {
        return Err(ProtocolError::Protocol(format!(
            "decommit opening has {} evaluations, expected {}",
            evals.len(),
            nodes.len()
        )));
    }
    if let Some(v) = view.as_deref_mut() {
        v.record(
            crate::stream::Origin::Prover,
            "decommit-evals",
            evals.iter().map(|e| e.repr()).collect(),
        )?;
    }
    // Streaming evaluation of the interpolant at phi2 and 0: two accumulators.
    if let Some(m) = meter {
        m.charge_elements("decommit-transient", spec, 3)?; // phi2 + two accumulators
    }
    let mut g_phi2 = spec.zero();
    let mut g_zero = spec.zero();
    for (j, (&node_j, &e)) in nodes.iter().zip(&evals).enumerate() {
        let mut w_phi2 = spec.one();
        let mut w_zero = spec.one();
        for (l, &node_l) in nodes.iter().enumerate() {
            if l == j {
                continue;
            }
            let denom_inv = (node_j - node_l).inv()?;
            w_phi2 = w_phi2 * (phi2 - node_l) * denom_inv;
            w_zero = w_zero * (spec.zero() - node_l) * denom_inv;
        }
        g_phi2 = g_phi2 + e * w_phi2;
        g_zero = g_zero + e * w_zero;
    }
    let fingerprint_ok = g_phi2 == check.fingerprint;
    let opening_ok = g_zero + check.correction == check.target;
    Ok(DecommitOutcome {
        accepted: fingerprint_ok && opening_ok,
        fingerprint_ok,
        opening_ok,
        sent_evals: evals,
        line,
        phi2,
    })
}

/// Honest opening of a combined row: evaluations of the LDE of w restricted
/// to the line, at the requested parameters.
pub fn honest_opening(
    w: &[Element],
    line: &Line,
    nodes: &[Element],
    commit_lde: &LdeSpec,
) -> Vec<Element> {
    nodes
        .iter()
        .map(|&t| {
            commit_lde
                .lde_eval(w, &line.eval(t))
                .expect("w has length p")
        })
        .collect()
}

/// End-to-end basic commit/decommit session against a pluggable opening.
/// Returns the decommit outcome; `forge` may replace the honest opening.
pub fn basic_decommit_session(
    commitment: &BasicCommitment,
    claimed: Element,
    params: &ProtocolParams,
    rng: &mut SessionRng,
    forge: Option<&dyn Fn(&Line, &[Element], &LdeSpec, &[Element]) -> Vec<Element>>,
) -> Result<DecommitOutcome, ProtocolError> {
    let commit_lde = params.commit_lde()?;
    // commit phase: verifier fingerprints y at a secret point
    let sigma = commit_lde.sample_point(rng);
    let fingerprint = commit_lde.lde_eval(&commitment.y, &sigma)?;
    let check = DecommitCheck {
        target: claimed,
        correction: commitment.gamma,
        fingerprint,
        sigma,
        k: commitment.k,
    };
    run_decommit(
        &check,
        params,
        |line, nodes| match forge {
            None => honest_opening(&commitment.y, line, nodes, &commit_lde),
            Some(f) => f(line, nodes, &commit_lde, &commitment.y),
        },
        rng,
        None,
        None,
    )
}

/// The forged opening that maximizes a cheating prover's acceptance when it
/// must shift the opened value by `delta`: add delta * psi where psi(0) = 1
/// and psi vanishes on `degree` chosen nonzero points, so the fingerprint
/// check only fails when phi2 misses the chosen root set.
pub fn best_shift_forgery(
    true_evals: &[Element],
    nodes: &[Element],
    delta: Element,
    spec: FieldSpec,
    degree: u32,
) -> Vec<Element> {
    // psi = delta * prod_{s in S} (X - s) / (-s), S = the `degree` smallest
    // nonzero non-node field elements
    let mut roots = Vec::new();
    let node_set: std::collections::HashSet<u64> = nodes.iter().map(|e| e.repr()).collect();
    let mut candidate = 1u64;
    while roots.len() < degree as usize {
        if !node_set.contains(&candidate) {
            roots.push(spec.element(candidate).expect("small"));
        }
        candidate += 1;
    }
    let mut psi_pts: Vec<(Element, Element)> = Vec::with_capacity(degree as usize + 1);
    psi_pts.push((spec.zero(), spec.one()));
    for &r in &roots {
        psi_pts.push((r, spec.zero()));
    }
    let psi = interpolate_univariate(&psi_pts, degree).expect("distinct abscissae");
    nodes
        .iter()
        .zip(true_evals)
        .map(|(&t, &e)| e + delta * psi.eval(t))
        .collect()
}

/// Verifier-side temporal commitment: the index where the secret point
/// appeared in the setup string, if anywhere.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TemporalCommitment {
    /// 1-indexed position with z_ell = rho; None means the verifier must
    /// reject (the point never appeared).
    pub ell: Option<u64>,
}

/// One-pass scan of the setup string: stores the smallest index whose entry
/// equals rho, charging ceil(log2 v) bits for it. No match is a protocol
/// reject, not an error.
pub fn temporal_setup(
    z: &mut Tape<EvalPoint>,
    rho: &EvalPoint,
    v: u64,
    meter: &mut SpaceMeter,
) -> Result<TemporalCommitment, ProtocolError> {
    let mut ell = None;
    let mut index = 0u64;
    meter.charge("temporal-ell", bits_for_range(v))?;
    while z.remaining() > 0 {
        let entry = z.next()?;
        index += 1;
        if ell.is_none() && &entry == rho {
            ell = Some(index);
        }
    }
    Ok(TemporalCommitment { ell })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TemporalVerdict {
    Pass,
    Abort(String),
}

/// Prover-side check of a temporal decommitment: the certificate index must
/// point at rho in the archived setup string and every extra predicate must
/// hold.
pub fn temporal_check(
    z_archive: &[EvalPoint],
    ell: u64,
    rho: &EvalPoint,
    extra: &[(&str, &dyn Fn(&EvalPoint) -> bool)],
) -> TemporalVerdict {
    if ell == 0 || ell as usize > z_archive.len() {
        return TemporalVerdict::Abort(format!("certificate index {ell} out of range"));
    }
    if &z_archive[ell as usize - 1] != rho {
        return TemporalVerdict::Abort("certificate does not match the revealed point".into());
    }
    for (name, pred) in extra {
        if !pred(rho) {
            return TemporalVerdict::Abort(format!("predicate '{name}' failed"));
        }
    }
    TemporalVerdict::Pass
}
