//! Lagrange bases, multivariate low-degree extensions, one-pass fingerprint
//! evaluation, line restrictions, univariate interpolation, subcube-sum
//! coefficients, and constrained random polynomial sampling.
//!
//! Two interpolation-domain conventions are supported and carried in
//! [`LdeSpec`]: nodes `1..=d+1` when no evaluation at 0 is part of the
//! protocol, and nodes `0..=d` when there is one. The canonical injection of
//! `[n]` into the node grid `[d+1]^m` writes `i - 1` in base `d+1`,
//! least-significant digit in coordinate 1.

use crate::field::{Element, FieldError, FieldSpec};
use crate::stream::SessionRng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PolyError {
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("parameter error: {0}")]
    Parameter(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("duplicate abscissa in interpolation input")]
    DuplicateAbscissa,
    #[error("underdetermined: need {need} points for degree bound {bound}, got {got}")]
    Underdetermined { need: usize, bound: u32, got: usize },
    #[error("degenerate line parameter t1 = 0")]
    DegenerateParameter,
    #[error("stream overflow: more than {0} updates")]
    StreamOverflow(usize),
    #[error("constraint system is infeasible")]
    Infeasible,
    #[error("resource limit exceeded: {0}")]
    Resource(String),
}

/// A point of F^m.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EvalPoint(pub Vec<Element>);

impl EvalPoint {
    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[Element] {
        &self.0
    }

    pub fn reprs(&self) -> Vec<u64> {
        self.0.iter().map(|e| e.repr()).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InterpolationDomain {
    /// Nodes are the embeddings of 1..=d+1.
    OneBased,
    /// Nodes are the embeddings of 0..=d.
    ZeroBased,
}

/// Shape of a low-degree extension: data length n, individual degree d,
/// dimension m, and the interpolation-domain convention.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LdeSpec {
    pub field: FieldSpec,
    pub n: usize,
    pub d: u32,
    pub m: usize,
    pub domain: InterpolationDomain,
}

impl LdeSpec {
    pub fn new(
        field: FieldSpec,
        n: usize,
        d: u32,
        m: usize,
        domain: InterpolationDomain,
    ) -> Result<Self, PolyError> {
        if field.order() <= d as u64 {
            return Err(PolyError::Parameter(format!(
                "field order {} must exceed degree {d} (Lagrange denominators vanish otherwise)",
                field.order()
            )));
        }
        if m == 0 {
            return Err(PolyError::Parameter("dimension m must be positive".into()));
        }
        let capacity = (d as u128 + 1).checked_pow(m as u32);
        match capacity {
            Some(c) if (n as u128) <= c => {}
            _ if n == 0 => {}
            _ => {
                return Err(PolyError::Parameter(format!(
                    "n = {n} exceeds grid capacity (d+1)^m = ({}+1)^{m}",
                    d
                )))
            }
        }
        Ok(LdeSpec {
            field,
            n,
            d,
            m,
            domain,
        })
    }

    /// The i-th interpolation node as a field element (i in 0..=d).
    pub fn node(&self, i: u32) -> Element {
        debug_assert!(i <= self.d);
        let idx = match self.domain {
            InterpolationDomain::OneBased => i as u64 + 1,
            InterpolationDomain::ZeroBased => i as u64,
        };
        self.field.embed_index(idx).expect("node within field")
    }

    pub fn nodes(&self) -> Vec<Element> {
        (0..=self.d).map(|i| self.node(i)).collect()
    }

    /// Digits (little-endian, base d+1) of data index i in [n].
    pub fn index_digits(&self, i: usize) -> Vec<u32> {
        debug_assert!(i >= 1);
        let base = self.d as usize + 1;
        let mut rem = i - 1;
        let mut digits = Vec::with_capacity(self.m);
        for _ in 0..self.m {
            digits.push((rem % base) as u32);
            rem /= base;
        }
        digits
    }

    /// Canonical injection of [n] into F^m through the node grid.
    pub fn index_to_point(&self, i: usize) -> EvalPoint {
        EvalPoint(
            self.index_digits(i)
                .into_iter()
                .map(|dg| self.node(dg))
                .collect(),
        )
    }

    /// Univariate Lagrange basis polynomial chi_i evaluated at t, over this
    /// spec's node set: chi_i(node_j) = 1 iff i = j.
    pub fn chi_uni(&self, i: u32, t: Element) -> Element {
        let ni = self.node(i);
        let mut num = self.field.one();
        let mut den = self.field.one();
        for k in 0..=self.d {
            if k == i {
                continue;
            }
            let nk = self.node(k);
            num = num * (t - nk);
            den = den * (ni - nk);
        }
        num * den.inv().expect("distinct nodes")
    }

    /// m-variate Lagrange basis for data index i, evaluated at a point.
    pub fn chi_index(&self, i: usize, point: &EvalPoint) -> Result<Element, PolyError> {
        if point.dim() != self.m {
            return Err(PolyError::DimensionMismatch {
                expected: self.m,
                got: point.dim(),
            });
        }
        let mut acc = self.field.one();
        for (j, dg) in self.index_digits(i).into_iter().enumerate() {
            acc = acc * self.chi_uni(dg, point.0[j]);
        }
        Ok(acc)
    }

    /// Batch evaluation of the LDE of x at a point: sum_i x_i chi_i(point).
    pub fn lde_eval(&self, x: &[Element], point: &EvalPoint) -> Result<Element, PolyError> {
        if x.len() != self.n {
            return Err(PolyError::DimensionMismatch {
                expected: self.n,
                got: x.len(),
            });
        }
        let mut acc = self.field.zero();
        for (idx, &xi) in x.iter().enumerate() {
            acc = acc + xi * self.chi_index(idx + 1, point)?;
        }
        Ok(acc)
    }

    /// Uniform point of F^m.
    pub fn sample_point(&self, rng: &mut SessionRng) -> EvalPoint {
        EvalPoint(
            (0..self.m)
                .map(|_| self.field.sample_uniform(rng, &[]).expect("nonempty"))
                .collect(),
        )
    }

    /// Uniform point with every coordinate outside the node set.
    pub fn sample_point_off_nodes(&self, rng: &mut SessionRng) -> EvalPoint {
        let nodes = self.nodes();
        EvalPoint(
            (0..self.m)
                .map(|_| {
                    self.field
                        .sample_uniform(rng, &nodes)
                        .expect("q > d + 1 checked at construction")
                })
                .collect(),
        )
    }

    /// Number of points in the node grid [d+1]^m.
    pub fn grid_size(&self) -> usize {
        (self.d as usize + 1).pow(self.m as u32)
    }
}

/// Streaming fingerprint of a vector: after consuming x_1..x_j the
/// accumulator holds sum_{i<=j} x_i chi_i(point). Each update costs O(dm)
/// field operations and the retained state is the point, the accumulator and
/// a position counter.
#[derive(Debug, Clone)]
pub struct FingerprintState {
    spec: LdeSpec,
    point: EvalPoint,
    position: usize,
    accumulator: Element,
}

impl FingerprintState {
    pub fn init(spec: LdeSpec, point: EvalPoint) -> Result<Self, PolyError> {
        if point.dim() != spec.m {
            return Err(PolyError::DimensionMismatch {
                expected: spec.m,
                got: point.dim(),
            });
        }
        Ok(FingerprintState {
            accumulator: spec.field.zero(),
            spec,
            point,
            position: 0,
        })
    }

    /// Bits of verifier memory this state retains: the point, the
    /// accumulator and the stream-position counter.
    pub fn retained_bits(&self) -> u64 {
        let eb = self.spec.field.element_bits();
        eb * (self.spec.m as u64 + 1) + crate::stream::bits_for_range(self.spec.n.max(2) as u64)
    }

    /// Consumes the next stream symbol in sequence.
    pub fn update(&mut self, symbol: Element) -> Result<(), PolyError> {
        if self.position >= self.spec.n {
            return Err(PolyError::StreamOverflow(self.spec.n));
        }
        self.position += 1;
        let chi = self.spec.chi_index(self.position, &self.point)?;
        self.accumulator = self.accumulator + symbol * chi;
        Ok(())
    }

    /// Adds value * chi_index(point); used by update streams where symbols
    /// address arbitrary coordinates.
    pub fn update_at(&mut self, index: usize, value: Element) -> Result<(), PolyError> {
        if index < 1 || index > self.spec.n {
            return Err(PolyError::Parameter(format!(
                "update index {index} outside [1, {}]",
                self.spec.n
            )));
        }
        let chi = self.spec.chi_index(index, &self.point)?;
        self.accumulator = self.accumulator + value * chi;
        Ok(())
    }

    pub fn position(&self) -> usize {
        self.position
    }

    pub fn point(&self) -> &EvalPoint {
        &self.point
    }

    pub fn finalize(&self) -> Element {
        self.accumulator
    }
}

/// An affine line L(t) = base + t * direction in F^m. The canonical wire form
/// is the evaluation pair (L(0), L(1)).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Line {
    pub base: EvalPoint,
    pub direction: EvalPoint,
}

impl Line {
    pub fn eval(&self, t: Element) -> EvalPoint {
        EvalPoint(
            self.base
                .0
                .iter()
                .zip(&self.direction.0)
                .map(|(&b, &d)| b + t * d)
                .collect(),
        )
    }

    pub fn is_constant(&self) -> bool {
        self.direction.0.iter().all(|e| e.is_zero())
    }

    /// Solves L(t) = point. Returns None when the point is off the line; a
    /// constant line matching the point returns t = 0.
    pub fn param_of(&self, point: &EvalPoint) -> Option<Element> {
        if point.dim() != self.base.dim() {
            return None;
        }
        let spec = self.base.0[0].spec();
        let mut t: Option<Element> = None;
        for ((&b, &d), &p) in self.base.0.iter().zip(&self.direction.0).zip(&point.0) {
            if d.is_zero() {
                if b != p {
                    return None;
                }
            } else {
                let cand = (p - b) * d.inv().expect("nonzero");
                match t {
                    None => t = Some(cand),
                    Some(prev) if prev != cand => return None,
                    _ => {}
                }
            }
        }
        Some(t.unwrap_or_else(|| spec.zero()))
    }

    pub fn wire_form(&self) -> (EvalPoint, EvalPoint) {
        let spec = self.base.0[0].spec();
        (self.base.clone(), self.eval(spec.one()))
    }
}

/// The line with L(0) = p0 and L(t1) = p1; t1 must be nonzero.
pub fn line_through(p0: &EvalPoint, p1: &EvalPoint, t1: Element) -> Result<Line, PolyError> {
    if t1.is_zero() {
        return Err(PolyError::DegenerateParameter);
    }
    if p0.dim() != p1.dim() {
        return Err(PolyError::DimensionMismatch {
            expected: p0.dim(),
            got: p1.dim(),
        });
    }
    let inv = t1.inv().expect("nonzero");
    let direction = EvalPoint(
        p0.0.iter()
            .zip(&p1.0)
            .map(|(&a, &b)| (b - a) * inv)
            .collect(),
    );
    Ok(Line {
        base: p0.clone(),
        direction,
    })
}

/// Univariate polynomial in canonical coefficient form, lowest degree first.
/// Trailing zero coefficients are allowed; the degree bound is explicit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnivariatePoly {
    pub degree_bound: u32,
    coeffs: Vec<Element>,
}

impl UnivariatePoly {
    pub fn from_coeffs(degree_bound: u32, mut coeffs: Vec<Element>, spec: FieldSpec) -> Self {
        coeffs.resize(degree_bound as usize + 1, spec.zero());
        UnivariatePoly {
            degree_bound,
            coeffs,
        }
    }

    pub fn constant(value: Element) -> Self {
        UnivariatePoly {
            degree_bound: 0,
            coeffs: vec![value],
        }
    }

    pub fn coeffs(&self) -> &[Element] {
        &self.coeffs
    }

    /// Actual degree (highest nonzero coefficient), or 0 for the zero poly.
    pub fn degree(&self) -> u32 {
        for (i, c) in self.coeffs.iter().enumerate().rev() {
            if !c.is_zero() {
                return i as u32;
            }
        }
        0
    }

    pub fn eval(&self, t: Element) -> Element {
        let spec = t.spec();
        let mut acc = spec.zero();
        for &c in self.coeffs.iter().rev() {
            acc = acc * t + c;
        }
        acc
    }

    pub fn evals_at(&self, points: &[Element]) -> Vec<Element> {
        points.iter().map(|&t| self.eval(t)).collect()
    }
}

/// Unique polynomial of degree <= degree_bound through the given points.
pub fn interpolate_univariate(
    points: &[(Element, Element)],
    degree_bound: u32,
) -> Result<UnivariatePoly, PolyError> {
    let need = degree_bound as usize + 1;
    if points.len() < need {
        return Err(PolyError::Underdetermined {
            need,
            bound: degree_bound,
            got: points.len(),
        });
    }
    let pts = &points[..need];
    for i in 0..pts.len() {
        for j in (i + 1)..pts.len() {
            if pts[i].0 == pts[j].0 {
                return Err(PolyError::DuplicateAbscissa);
            }
        }
    }
    let spec = pts[0].0.spec();
    let zero = spec.zero();
    let one = spec.one();
    let mut result = vec![zero; need];
    // Lagrange form, expanded term by term.
    let mut scratch = vec![zero; need];
    for (i, &(xi, yi)) in pts.iter().enumerate() {
        scratch.iter_mut().for_each(|c| *c = zero);
        scratch[0] = one;
        let mut deg = 0usize;
        let mut denom = one;
        for (j, &(xj, _)) in pts.iter().enumerate() {
            if j == i {
                continue;
            }
            // scratch *= (X - xj)
            deg += 1;
            for k in (1..=deg).rev() {
                let prev = scratch[k - 1];
                scratch[k] = scratch[k] * (-xj) + prev;
            }
            scratch[0] = scratch[0] * (-xj);
            denom = denom * (xi - xj);
        }
        let w = yi * denom.inv().map_err(|_| PolyError::DuplicateAbscissa)?;
        for k in 0..need {
            result[k] = result[k] + scratch[k] * w;
        }
    }
    // Remaining points, if any, must be consistent with the interpolant.
    let poly = UnivariatePoly {
        degree_bound,
        coeffs: result,
    };
    for &(x, y) in &points[need..] {
        if poly.eval(x) != y {
            return Err(PolyError::Parameter(
                "surplus interpolation point off the unique interpolant".into(),
            ));
        }
    }
    Ok(poly)
}

/// The restriction of the LDE of x to a line: the univariate polynomial
/// (x-hat ∘ L) of degree <= d*m. Prover-side; evaluates the LDE at d*m + 1
/// canonical parameters and interpolates.
pub fn restrict_lde_to_line(
    x: &[Element],
    line: &Line,
    spec: &LdeSpec,
) -> Result<UnivariatePoly, PolyError> {
    let bound = spec.d * spec.m as u32;
    let field = spec.field;
    if (bound as u64) >= field.order() {
        return Err(PolyError::Parameter(format!(
            "degree bound {bound} needs more interpolation nodes than field order {}",
            field.order()
        )));
    }
    let params: Vec<Element> = (0..=bound)
        .map(|i| field.embed_index(i as u64).expect("within order"))
        .collect();
    let mut pts = Vec::with_capacity(params.len());
    for &t in &params {
        let val = spec.lde_eval(x, &line.eval(t))?;
        pts.push((t, val));
    }
    interpolate_univariate(&pts, bound)
}

/// Linear coefficients theta with sum_{beta in H} g(beta) = sum_i theta_i
/// g(node_i) for every degree-<= d univariate g.
pub fn subcube_coeffs(h: &[Element], spec: &LdeSpec) -> Vec<Element> {
    (0..=spec.d)
        .map(|i| {
            let mut acc = spec.field.zero();
            for &beta in h {
                acc = acc + spec.chi_uni(i, beta);
            }
            acc
        })
        .collect()
}

/// Uniform sample over degree-<= bound polynomials satisfying g(c) = v for
/// every constraint (c, v): free interpolation slots are drawn uniformly and
/// the unique interpolant is returned.
pub fn sample_constrained_univariate(
    degree_bound: u32,
    constraints: &[(Element, Element)],
    spec: FieldSpec,
    rng: &mut SessionRng,
) -> Result<UnivariatePoly, PolyError> {
    let need = degree_bound as usize + 1;
    if constraints.len() > need {
        return Err(PolyError::Parameter(format!(
            "{} constraints exceed degree bound {degree_bound} + 1",
            constraints.len()
        )));
    }
    for i in 0..constraints.len() {
        for j in (i + 1)..constraints.len() {
            if constraints[i].0 == constraints[j].0 {
                return Err(PolyError::DuplicateAbscissa);
            }
        }
    }
    if (need as u64) > spec.order() {
        return Err(PolyError::Parameter(format!(
            "degree bound {degree_bound} too large for field of order {}",
            spec.order()
        )));
    }
    let mut pts: Vec<(Element, Element)> = constraints.to_vec();
    let taken: Vec<Element> = constraints.iter().map(|&(c, _)| c).collect();
    let mut candidate = 0u64;
    while pts.len() < need {
        let c = spec.element(candidate).expect("below order");
        candidate += 1;
        if taken.contains(&c) {
            continue;
        }
        let v = spec.sample_uniform(rng, &[])?;
        pts.push((c, v));
    }
    interpolate_univariate(&pts, degree_bound)
}

/// Dense m-variate polynomial of individual degree <= d, stored as its values
/// on the node grid [d+1]^m (equivalently, Lagrange-basis coefficients).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultivariatePoly {
    pub spec: LdeSpec,
    values: Vec<Element>,
}

impl MultivariatePoly {
    pub fn from_grid_values(spec: LdeSpec, values: Vec<Element>) -> Result<Self, PolyError> {
        if values.len() != spec.grid_size() {
            return Err(PolyError::DimensionMismatch {
                expected: spec.grid_size(),
                got: values.len(),
            });
        }
        Ok(MultivariatePoly { spec, values })
    }

    pub fn grid_values(&self) -> &[Element] {
        &self.values
    }

    /// Digits (little-endian base d+1) of grid slot g.
    fn grid_digits(&self, mut g: usize) -> Vec<u32> {
        let base = self.spec.d as usize + 1;
        let mut digits = Vec::with_capacity(self.spec.m);
        for _ in 0..self.spec.m {
            digits.push((g % base) as u32);
            g /= base;
        }
        digits
    }

    pub fn eval(&self, point: &EvalPoint) -> Result<Element, PolyError> {
        if point.dim() != self.spec.m {
            return Err(PolyError::DimensionMismatch {
                expected: self.spec.m,
                got: point.dim(),
            });
        }
        // per-coordinate chi tables, then a weighted sum over the grid
        let tables: Vec<Vec<Element>> = (0..self.spec.m)
            .map(|j| {
                (0..=self.spec.d)
                    .map(|i| self.spec.chi_uni(i, point.0[j]))
                    .collect()
            })
            .collect();
        let mut acc = self.spec.field.zero();
        for (g, &v) in self.values.iter().enumerate() {
            let mut w = v;
            for (j, dg) in self.grid_digits(g).into_iter().enumerate() {
                w = w * tables[j][dg as usize];
            }
            acc = acc + w;
        }
        Ok(acc)
    }

    /// Partial sum with the first `prefix.len()` variables fixed, the next
    /// free, and the remaining summed over H: returns the degree-<= d
    /// univariate polynomial T -> sum_{suffix in H^r} f(prefix, T, suffix).
    pub fn partial_sum(&self, prefix: &[Element], h: &[Element]) -> Result<UnivariatePoly, PolyError> {
        partial_sum(
            &|pt: &EvalPoint| self.eval(pt),
            prefix,
            h,
            &self.spec,
        )
    }
}

/// Brute-force partial sum of an m-variate degree-d polynomial given by an
/// evaluator: f_i(T) = sum over the suffix cube H^(m - i) with the prefix
/// rho_1..rho_{i-1} fixed. Prover-side; the suffix cube is enumerated.
pub fn partial_sum(
    f: &dyn Fn(&EvalPoint) -> Result<Element, PolyError>,
    prefix: &[Element],
    h: &[Element],
    spec: &LdeSpec,
) -> Result<UnivariatePoly, PolyError> {
    let i = prefix.len(); // 0-based: the free variable is number i+1
    if i >= spec.m {
        return Err(PolyError::Parameter(
            "prefix already covers every variable".into(),
        ));
    }
    let suffix_len = spec.m - i - 1;
    let cube: u128 = (h.len() as u128)
        .checked_pow(suffix_len as u32)
        .unwrap_or(u128::MAX);
    let evals_needed = cube.saturating_mul(spec.d as u128 + 1);
    if evals_needed > (1 << 24) {
        return Err(PolyError::Resource(format!(
            "suffix cube needs {evals_needed} evaluations (> 2^24)"
        )));
    }
    let nodes = spec.nodes();
    let mut pts = Vec::with_capacity(nodes.len());
    for &t in &nodes {
        let mut acc = spec.field.zero();
        let mut odometer = vec![0usize; suffix_len];
        loop {
            let mut coords = Vec::with_capacity(spec.m);
            coords.extend_from_slice(prefix);
            coords.push(t);
            for &oi in &odometer {
                coords.push(h[oi]);
            }
            acc = acc + f(&EvalPoint(coords))?;
            // advance odometer
            let mut pos = 0;
            loop {
                if pos == suffix_len {
                    break;
                }
                odometer[pos] += 1;
                if odometer[pos] < h.len() {
                    break;
                }
                odometer[pos] = 0;
                pos += 1;
            }
            if pos == suffix_len {
                break;
            }
        }
        pts.push((t, acc));
    }
    interpolate_univariate(&pts, spec.d)
}

/// A linear functional on the grid-value slots of a [`MultivariatePoly`],
/// paired with its required value.
#[derive(Debug, Clone)]
pub struct LinearConstraint {
    pub coeffs: Vec<Element>,
    pub rhs: Element,
}

impl LinearConstraint {
    /// Constraint g(point) = value.
    pub fn point_eval(spec: &LdeSpec, point: &EvalPoint, value: Element) -> Result<Self, PolyError> {
        let tables: Vec<Vec<Element>> = (0..spec.m)
            .map(|j| {
                (0..=spec.d)
                    .map(|i| spec.chi_uni(i, point.0[j]))
                    .collect()
            })
            .collect();
        let mut coeffs = Vec::with_capacity(spec.grid_size());
        let base = spec.d as usize + 1;
        for g in 0..spec.grid_size() {
            let mut w = spec.field.one();
            let mut rem = g;
            for table in tables.iter() {
                w = w * table[rem % base];
                rem /= base;
            }
            coeffs.push(w);
        }
        Ok(LinearConstraint { coeffs, rhs: value })
    }

    /// Constraint sum over the subcube H^m of g equal to value.
    pub fn subcube_sum(spec: &LdeSpec, h: &[Element], value: Element) -> Self {
        let theta = subcube_coeffs(h, spec);
        let base = spec.d as usize + 1;
        let mut coeffs = Vec::with_capacity(spec.grid_size());
        for g in 0..spec.grid_size() {
            let mut w = spec.field.one();
            let mut rem = g;
            for _ in 0..spec.m {
                w = w * theta[rem % base];
                rem /= base;
            }
            coeffs.push(w);
        }
        LinearConstraint { coeffs, rhs: value }
    }

    /// Constraint: the partial sum at (prefix, T = node t, suffix over H)
    /// equals value.
    pub fn partial_sum_eval(
        spec: &LdeSpec,
        prefix: &[Element],
        h: &[Element],
        t: Element,
        value: Element,
    ) -> Result<Self, PolyError> {
        let i = prefix.len();
        let mut tables: Vec<Vec<Element>> = Vec::with_capacity(spec.m);
        for j in 0..spec.m {
            let col: Vec<Element> = if j < i {
                (0..=spec.d).map(|a| spec.chi_uni(a, prefix[j])).collect()
            } else if j == i {
                (0..=spec.d).map(|a| spec.chi_uni(a, t)).collect()
            } else {
                // summed coordinate: chi integrated over H
                (0..=spec.d)
                    .map(|a| {
                        let mut acc = spec.field.zero();
                        for &beta in h {
                            acc = acc + spec.chi_uni(a, beta);
                        }
                        acc
                    })
                    .collect()
            };
            tables.push(col);
        }
        let base = spec.d as usize + 1;
        let mut coeffs = Vec::with_capacity(spec.grid_size());
        for g in 0..spec.grid_size() {
            let mut w = spec.field.one();
            let mut rem = g;
            for table in tables.iter() {
                w = w * table[rem % base];
                rem /= base;
            }
            coeffs.push(w);
        }
        Ok(LinearConstraint { coeffs, rhs: value })
    }
}

/// Uniform sample over the affine solution space of a linear system on the
/// (d+1)^m grid-value slots: row-reduce, draw free variables uniformly, then
/// back-substitute.
pub fn sample_constrained_multivariate(
    spec: &LdeSpec,
    constraints: &[LinearConstraint],
    rng: &mut SessionRng,
) -> Result<MultivariatePoly, PolyError> {
    let cols = spec.grid_size();
    if cols > (1 << 16) {
        return Err(PolyError::Resource(format!(
            "coefficient table of size {cols} exceeds 2^16"
        )));
    }
    let field = spec.field;
    let zero = field.zero();
    let mut rows: Vec<(Vec<Element>, Element)> = constraints
        .iter()
        .map(|c| {
            if c.coeffs.len() != cols {
                return Err(PolyError::DimensionMismatch {
                    expected: cols,
                    got: c.coeffs.len(),
                });
            }
            Ok((c.coeffs.clone(), c.rhs))
        })
        .collect::<Result<_, _>>()?;

    // forward elimination to row echelon form
    let mut pivots: Vec<(usize, usize)> = Vec::new(); // (row, col)
    let mut row = 0usize;
    for col in 0..cols {
        if row >= rows.len() {
            break;
        }
        let pivot_row = (row..rows.len()).find(|&r| !rows[r].0[col].is_zero());
        let Some(pr) = pivot_row else { continue };
        rows.swap(row, pr);
        let inv = rows[row].0[col].inv().expect("pivot nonzero");
        for c in col..cols {
            rows[row].0[c] = rows[row].0[c] * inv;
        }
        rows[row].1 = rows[row].1 * inv;
        for r in 0..rows.len() {
            if r != row && !rows[r].0[col].is_zero() {
                let factor = rows[r].0[col];
                for c in col..cols {
                    let sub = factor * rows[row].0[c];
                    rows[r].0[c] = rows[r].0[c] - sub;
                }
                let sub = factor * rows[row].1;
                rows[r].1 = rows[r].1 - sub;
            }
        }
        pivots.push((row, col));
        row += 1;
    }
    // inconsistency: zero row with nonzero rhs
    for r in row..rows.len() {
        if !rows[r].1.is_zero() {
            return Err(PolyError::Infeasible);
        }
    }
    let pivot_cols: std::collections::HashSet<usize> = pivots.iter().map(|&(_, c)| c).collect();
    let mut values = vec![zero; cols];
    for c in 0..cols {
        if !pivot_cols.contains(&c) {
            values[c] = field.sample_uniform(rng, &[])?;
        }
    }
    for &(r, c) in pivots.iter().rev() {
        let mut v = rows[r].1;
        for cc in (c + 1)..cols {
            if !rows[r].0[cc].is_zero() {
                v = v - rows[r].0[cc] * values[cc];
            }
        }
        values[c] = v;
    }
    MultivariatePoly::from_grid_values(*spec, values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn f(q: u64) -> FieldSpec {
        FieldSpec::prime(q).unwrap()
    }

    fn el(spec: FieldSpec, r: u64) -> Element {
        spec.element(r).unwrap()
    }

    fn spec_1d(q: u64, d: u32, n: usize) -> LdeSpec {
        LdeSpec::new(f(q), n, d, 1, InterpolationDomain::OneBased).unwrap()
    }

    #[test]
    fn lagrange_defining_property() {
        // GF(5), domain {1,2}: chi_1(1) = 1, chi_1(2) = 0, chi_1(4) = 3
        let s = spec_1d(5, 1, 2);
        let f5 = s.field;
        assert_eq!(s.chi_uni(0, el(f5, 1)), f5.one());
        assert_eq!(s.chi_uni(0, el(f5, 2)), f5.zero());
        assert_eq!(s.chi_uni(0, el(f5, 4)).repr(), 3);
    }

    #[test]
    fn lagrange_partition_of_unity() {
        // sum_i chi_i(t) = 1 for random t (brute-force identity check)
        let mut rng = SessionRng::from_seed(3, 0);
        for spec in [
            LdeSpec::new(f(257), 9, 2, 2, InterpolationDomain::OneBased).unwrap(),
            LdeSpec::new(
                FieldSpec::binary(8).unwrap(),
                16,
                3,
                2,
                InterpolationDomain::ZeroBased,
            )
            .unwrap(),
        ] {
            for _ in 0..100 {
                let t = spec.field.sample_uniform(&mut rng, &[]).unwrap();
                let mut acc = spec.field.zero();
                for i in 0..=spec.d {
                    acc = acc + spec.chi_uni(i, t);
                }
                assert_eq!(acc, spec.field.one());
            }
        }
    }

    #[test]
    fn small_field_rejected() {
        assert!(matches!(
            LdeSpec::new(f(2), 4, 3, 2, InterpolationDomain::OneBased),
            Err(PolyError::Parameter(_))
        ));
    }

    #[test]
    fn lde_eval_examples() {
        // x = [3,1], d=1, m=1 over GF(5): domain points return the data
        let s = spec_1d(5, 1, 2);
        let f5 = s.field;
        let x = vec![el(f5, 3), el(f5, 1)];
        assert_eq!(
            s.lde_eval(&x, &EvalPoint(vec![el(f5, 2)])).unwrap().repr(),
            1
        );
        // off-domain point, frozen from the hand Lagrange sum: x-hat(4) = 2
        assert_eq!(
            s.lde_eval(&x, &EvalPoint(vec![el(f5, 4)])).unwrap().repr(),
            2
        );
        // all-zero data extends to the zero polynomial
        let zeros = vec![f5.zero(); 2];
        for r in 0..5 {
            assert!(s
                .lde_eval(&zeros, &EvalPoint(vec![el(f5, r)]))
                .unwrap()
                .is_zero());
        }
    }

    #[test]
    fn lde_restriction_to_domain_is_identity() {
        let spec = LdeSpec::new(f(13), 9, 2, 2, InterpolationDomain::OneBased).unwrap();
        let mut rng = SessionRng::from_seed(7, 1);
        let x: Vec<Element> = (0..9)
            .map(|_| spec.field.sample_uniform(&mut rng, &[]).unwrap())
            .collect();
        for i in 1..=9 {
            let p = spec.index_to_point(i);
            assert_eq!(spec.lde_eval(&x, &p).unwrap(), x[i - 1]);
        }
    }

    #[test]
    fn fingerprint_incremental_equals_batch() {
        let spec = spec_1d(5, 1, 2);
        let f5 = spec.field;
        let pt = EvalPoint(vec![el(f5, 4)]);
        let mut st = FingerprintState::init(spec, pt.clone()).unwrap();
        st.update(el(f5, 3)).unwrap();
        st.update(el(f5, 1)).unwrap();
        assert_eq!(st.finalize().repr(), 2);
        assert!(matches!(
            st.update(el(f5, 0)),
            Err(PolyError::StreamOverflow(2))
        ));

        // randomized batch-oracle comparison
        let spec = LdeSpec::new(f(257), 27, 2, 3, InterpolationDomain::OneBased).unwrap();
        let mut rng = SessionRng::from_seed(11, 0);
        for _ in 0..1000 {
            let x: Vec<Element> = (0..27)
                .map(|_| spec.field.sample_uniform(&mut rng, &[]).unwrap())
                .collect();
            let rho = spec.sample_point(&mut rng);
            let mut st = FingerprintState::init(spec, rho.clone()).unwrap();
            for &xi in &x {
                st.update(xi).unwrap();
            }
            assert_eq!(st.finalize(), spec.lde_eval(&x, &rho).unwrap());
        }
    }

    #[test]
    fn line_examples() {
        let f5 = f(5);
        // constant line
        let p = EvalPoint(vec![el(f5, 1), el(f5, 1)]);
        let l = line_through(&p, &p, el(f5, 3)).unwrap();
        assert!(l.is_constant());
        assert_eq!(l.eval(el(f5, 2)), p);
        // direction = (p1 - p0) / t1
        let p0 = EvalPoint(vec![el(f5, 0), el(f5, 0)]);
        let p1 = EvalPoint(vec![el(f5, 2), el(f5, 4)]);
        let l = line_through(&p0, &p1, el(f5, 2)).unwrap();
        assert_eq!(l.direction.reprs(), vec![1, 2]);
        assert!(matches!(
            line_through(&p0, &p1, f5.zero()),
            Err(PolyError::DegenerateParameter)
        ));
    }

    proptest! {
        #[test]
        fn line_through_hits_endpoints(seed in 0u64..5000) {
            let f257 = f(257);
            let mut rng = SessionRng::from_seed(seed, 0);
            let spec = LdeSpec::new(f257, 9, 2, 2, InterpolationDomain::OneBased).unwrap();
            let p0 = spec.sample_point(&mut rng);
            let p1 = spec.sample_point(&mut rng);
            let t1 = f257.sample_uniform(&mut rng, &[f257.zero()]).unwrap();
            let l = line_through(&p0, &p1, t1).unwrap();
            prop_assert_eq!(l.eval(f257.zero()), p0);
            prop_assert_eq!(l.eval(t1), p1.clone());
            if !l.is_constant() {
                prop_assert_eq!(l.param_of(&p1), Some(t1));
            }
        }
    }

    #[test]
    fn restriction_agrees_with_lde_on_line() {
        let spec = LdeSpec::new(f(257), 9, 2, 2, InterpolationDomain::OneBased).unwrap();
        let mut rng = SessionRng::from_seed(21, 0);
        for _ in 0..100 {
            let x: Vec<Element> = (0..9)
                .map(|_| spec.field.sample_uniform(&mut rng, &[]).unwrap())
                .collect();
            let p0 = spec.sample_point(&mut rng);
            let p1 = spec.sample_point(&mut rng);
            let t1 = spec
                .field
                .sample_uniform(&mut rng, &[spec.field.zero()])
                .unwrap();
            let line = line_through(&p0, &p1, t1).unwrap();
            let restricted = restrict_lde_to_line(&x, &line, &spec).unwrap();
            assert!(restricted.degree() <= spec.d * spec.m as u32);
            let t = spec.field.sample_uniform(&mut rng, &[]).unwrap();
            assert_eq!(
                restricted.eval(t),
                spec.lde_eval(&x, &line.eval(t)).unwrap()
            );
        }
    }

    #[test]
    fn restriction_of_constant_line_is_data_value() {
        let spec = LdeSpec::new(f(13), 4, 1, 2, InterpolationDomain::OneBased).unwrap();
        let f13 = spec.field;
        let x: Vec<Element> = [7u64, 3, 9, 2].iter().map(|&r| el(f13, r)).collect();
        let pt = spec.index_to_point(3);
        let line = Line {
            base: pt.clone(),
            direction: EvalPoint(vec![f13.zero(); 2]),
        };
        let restricted = restrict_lde_to_line(&x, &line, &spec).unwrap();
        for r in 0..13 {
            assert_eq!(restricted.eval(el(f13, r)), x[2]);
        }
    }

    #[test]
    fn interpolation_examples() {
        let f5 = f(5);
        // two equal values, bound 1 -> the constant polynomial
        let p = interpolate_univariate(&[(el(f5, 1), el(f5, 4)), (el(f5, 2), el(f5, 4))], 1)
            .unwrap();
        assert_eq!(p.degree(), 0);
        assert_eq!(p.eval(el(f5, 3)).repr(), 4);
        // frozen from the Lagrange oracle: through (0,1),(1,2),(2,0) over GF(5)
        let p = interpolate_univariate(
            &[
                (el(f5, 0), el(f5, 1)),
                (el(f5, 1), el(f5, 2)),
                (el(f5, 2), el(f5, 0)),
            ],
            2,
        )
        .unwrap();
        let oracle_at_3 = {
            // brute-force Lagrange evaluation at 3
            let pts = [(0u64, 1u64), (1, 2), (2, 0)];
            let mut acc = f5.zero();
            for &(xi, yi) in &pts {
                let mut term = el(f5, yi);
                for &(xj, _) in &pts {
                    if xi != xj {
                        term = term
                            * (el(f5, 3) - el(f5, xj))
                            * (el(f5, xi) - el(f5, xj)).inv().unwrap();
                    }
                }
                acc = acc + term;
            }
            acc
        };
        assert_eq!(p.eval(el(f5, 3)), oracle_at_3);
        // error paths
        assert!(matches!(
            interpolate_univariate(&[(el(f5, 1), el(f5, 0)), (el(f5, 1), el(f5, 1))], 1),
            Err(PolyError::DuplicateAbscissa)
        ));
        assert!(matches!(
            interpolate_univariate(&[(el(f5, 1), el(f5, 0))], 1),
            Err(PolyError::Underdetermined { .. })
        ));
    }

    proptest! {
        #[test]
        fn interpolation_roundtrip_degree3(c0 in 0u64..257, c1 in 0u64..257, c2 in 0u64..257, c3 in 0u64..257) {
            let f257 = f(257);
            let poly = UnivariatePoly::from_coeffs(
                3,
                vec![el(f257, c0), el(f257, c1), el(f257, c2), el(f257, c3)],
                f257,
            );
            let pts: Vec<(Element, Element)> = (0..4)
                .map(|r| (el(f257, r), poly.eval(el(f257, r))))
                .collect();
            let back = interpolate_univariate(&pts, 3).unwrap();
            prop_assert_eq!(back.coeffs(), poly.coeffs());
        }
    }

    #[test]
    fn subcube_coeffs_examples() {
        let s = spec_1d(5, 1, 2);
        let f5 = s.field;
        // H equal to the domain {1,2}: theta = (1,1)
        let theta = subcube_coeffs(&[el(f5, 1), el(f5, 2)], &s);
        assert_eq!(theta.iter().map(|e| e.repr()).collect::<Vec<_>>(), vec![1, 1]);
        // H = {4}: theta = (chi_1(4), chi_2(4)) = (3, 3)
        let theta = subcube_coeffs(&[el(f5, 4)], &s);
        assert_eq!(theta.iter().map(|e| e.repr()).collect::<Vec<_>>(), vec![3, 3]);
    }

    #[test]
    fn subcube_identity_exhaustive_small() {
        // exact for all degree-<= d univariate polynomials, q <= 8, d <= 2
        for q in [5u64, 7] {
            for d in 1..=2u32 {
                let spec =
                    LdeSpec::new(f(q), d as usize + 1, d, 1, InterpolationDomain::OneBased)
                        .unwrap();
                let fq = spec.field;
                let h: Vec<Element> = (1..=2).map(|r| el(fq, r)).collect();
                let theta = subcube_coeffs(&h, &spec);
                // enumerate polynomials by their node values
                let nodes = spec.nodes();
                let count = q.pow(d + 1);
                for mut code in 0..count {
                    let mut vals = Vec::new();
                    for _ in 0..=d {
                        vals.push(el(fq, code % q));
                        code /= q;
                    }
                    let pts: Vec<(Element, Element)> =
                        nodes.iter().copied().zip(vals.iter().copied()).collect();
                    let g = interpolate_univariate(&pts, d).unwrap();
                    let direct = h
                        .iter()
                        .fold(fq.zero(), |acc, &beta| acc + g.eval(beta));
                    let via_theta = theta
                        .iter()
                        .zip(&vals)
                        .fold(fq.zero(), |acc, (&t, &v)| acc + t * v);
                    assert_eq!(direct, via_theta);
                }
            }
        }
    }

    #[test]
    fn lde_linearity() {
        let spec = LdeSpec::new(f(257), 9, 2, 2, InterpolationDomain::OneBased).unwrap();
        let mut rng = SessionRng::from_seed(17, 0);
        for _ in 0..1000 {
            let x: Vec<Element> = (0..9)
                .map(|_| spec.field.sample_uniform(&mut rng, &[]).unwrap())
                .collect();
            let y: Vec<Element> = (0..9)
                .map(|_| spec.field.sample_uniform(&mut rng, &[]).unwrap())
                .collect();
            let a = spec.field.sample_uniform(&mut rng, &[]).unwrap();
            let b = spec.field.sample_uniform(&mut rng, &[]).unwrap();
            let rho = spec.sample_point(&mut rng);
            let mix: Vec<Element> = x
                .iter()
                .zip(&y)
                .map(|(&xi, &yi)| a * xi + b * yi)
                .collect();
            let lhs = spec.lde_eval(&mix, &rho).unwrap();
            let rhs = a * spec.lde_eval(&x, &rho).unwrap() + b * spec.lde_eval(&y, &rho).unwrap();
            assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn schwartz_zippel_rate_small() {
        // P[x-hat(rho) = y-hat(rho)] <= dm/q for distinct x, y; quick check
        // at 10^4 trials (the acceptance suite runs the full 10^5).
        let spec = LdeSpec::new(f(257), 9, 2, 2, InterpolationDomain::OneBased).unwrap();
        let mut rng = SessionRng::from_seed(23, 0);
        let trials = 10_000;
        let mut collisions = 0u64;
        for _ in 0..trials {
            let x: Vec<Element> = (0..9)
                .map(|_| spec.field.sample_uniform(&mut rng, &[]).unwrap())
                .collect();
            let mut y = x.clone();
            while y == x {
                y = (0..9)
                    .map(|_| spec.field.sample_uniform(&mut rng, &[]).unwrap())
                    .collect();
            }
            let rho = spec.sample_point(&mut rng);
            if spec.lde_eval(&x, &rho).unwrap() == spec.lde_eval(&y, &rho).unwrap() {
                collisions += 1;
            }
        }
        let bound = 4.0 / 257.0;
        let sigma = (bound * (1.0 - bound) / trials as f64).sqrt();
        assert!(
            (collisions as f64 / trials as f64) <= bound + 4.0 * sigma,
            "rate {} vs bound {}",
            collisions as f64 / trials as f64,
            bound
        );
    }

    #[test]
    fn constrained_univariate_sampling() {
        let f257 = f(257);
        let mut rng = SessionRng::from_seed(31, 0);
        let alpha = el(f257, 123);
        // every sample satisfies its constraints
        for _ in 0..50 {
            let g = sample_constrained_univariate(
                2,
                &[(f257.zero(), alpha), (el(f257, 5), el(f257, 7))],
                f257,
                &mut rng,
            )
            .unwrap();
            assert_eq!(g.eval(f257.zero()), alpha);
            assert_eq!(g.eval(el(f257, 5)).repr(), 7);
            assert!(g.degree() <= 2);
        }
        // fully constrained -> deterministic
        let cons = [
            (el(f257, 0), el(f257, 1)),
            (el(f257, 1), el(f257, 2)),
            (el(f257, 2), el(f257, 9)),
        ];
        let g1 = sample_constrained_univariate(2, &cons, f257, &mut rng).unwrap();
        let g2 = sample_constrained_univariate(2, &cons, f257, &mut rng).unwrap();
        assert_eq!(g1, g2);
        // duplicate abscissae error
        assert!(matches!(
            sample_constrained_univariate(
                2,
                &[(el(f257, 1), el(f257, 1)), (el(f257, 1), el(f257, 2))],
                f257,
                &mut rng
            ),
            Err(PolyError::DuplicateAbscissa)
        ));
    }

    #[test]
    fn constrained_univariate_marginal_uniform() {
        // bound 2, constraint g(0) = alpha: g(1) marginal uniform within 4 sigma
        let q = 17u64;
        let fq = f(q);
        let mut rng = SessionRng::from_seed(37, 0);
        let alpha = el(fq, 11);
        let n = 10_000usize;
        let mut counts = vec![0u64; q as usize];
        for _ in 0..n {
            let g =
                sample_constrained_univariate(2, &[(fq.zero(), alpha)], fq, &mut rng).unwrap();
            counts[g.eval(fq.one()).repr() as usize] += 1;
        }
        let p = 1.0 / q as f64;
        let sigma = (n as f64 * p * (1.0 - p)).sqrt();
        for &c in &counts {
            assert!((c as f64 - n as f64 * p).abs() <= 4.0 * sigma, "{counts:?}");
        }
    }

    #[test]
    fn constrained_multivariate_sampling() {
        let spec = LdeSpec::new(f(17), 4, 1, 2, InterpolationDomain::OneBased).unwrap();
        let fq = spec.field;
        let mut rng = SessionRng::from_seed(41, 0);
        let h: Vec<Element> = vec![el(fq, 1), el(fq, 2)];
        let alpha = el(fq, 9);
        // subcube-sum constraint holds for every sample
        let c = LinearConstraint::subcube_sum(&spec, &h, alpha);
        for _ in 0..50 {
            let g = sample_constrained_multivariate(&spec, &[c.clone()], &mut rng).unwrap();
            let mut total = fq.zero();
            for &b1 in &h {
                for &b2 in &h {
                    total = total + g.eval(&EvalPoint(vec![b1, b2])).unwrap();
                }
            }
            assert_eq!(total, alpha);
        }
        // pinning all grid slots makes the sample deterministic
        let mut cons = Vec::new();
        for i in 1..=4usize {
            let pt = spec.index_to_point(i);
            cons.push(LinearConstraint::point_eval(&spec, &pt, el(fq, i as u64)).unwrap());
        }
        let g1 = sample_constrained_multivariate(&spec, &cons, &mut rng).unwrap();
        let g2 = sample_constrained_multivariate(&spec, &cons, &mut rng).unwrap();
        assert_eq!(g1, g2);
        // inconsistent constraints are infeasible
        let p = spec.index_to_point(1);
        let bad = vec![
            LinearConstraint::point_eval(&spec, &p, fq.zero()).unwrap(),
            LinearConstraint::point_eval(&spec, &p, fq.one()).unwrap(),
        ];
        assert!(matches!(
            sample_constrained_multivariate(&spec, &bad, &mut rng),
            Err(PolyError::Infeasible)
        ));
    }

    #[test]
    fn constrained_multivariate_marginal_uniform() {
        // d=1, m=2, constraint g(rho) = c: marginal at an unconstrained
        // domain point is uniform within 4 sigma over 10^4 samples.
        let q = 17u64;
        let spec = LdeSpec::new(f(q), 4, 1, 2, InterpolationDomain::OneBased).unwrap();
        let fq = spec.field;
        let mut rng = SessionRng::from_seed(43, 0);
        let rho = EvalPoint(vec![el(fq, 7), el(fq, 12)]);
        let c = LinearConstraint::point_eval(&spec, &rho, el(fq, 3)).unwrap();
        let probe = spec.index_to_point(2);
        let n = 10_000usize;
        let mut counts = vec![0u64; q as usize];
        for _ in 0..n {
            let g = sample_constrained_multivariate(&spec, &[c.clone()], &mut rng).unwrap();
            assert_eq!(g.eval(&rho).unwrap().repr(), 3);
            counts[g.eval(&probe).unwrap().repr() as usize] += 1;
        }
        let p = 1.0 / q as f64;
        let sigma = (n as f64 * p * (1.0 - p)).sqrt();
        for &cnt in &counts {
            assert!((cnt as f64 - n as f64 * p).abs() <= 4.0 * sigma, "{counts:?}");
        }
    }

    #[test]
    fn partial_sum_examples() {
        // f(X1, X2) = X1 * X2 over GF(5), H = {1,2}: f_1(T) = 3T
        let spec = LdeSpec::new(f(5), 4, 1, 2, InterpolationDomain::OneBased).unwrap();
        let fq = spec.field;
        let h = vec![el(fq, 1), el(fq, 2)];
        let prod = |pt: &EvalPoint| -> Result<Element, PolyError> { Ok(pt.0[0] * pt.0[1]) };
        let f1 = partial_sum(&prod, &[], &h, &spec).unwrap();
        for r in 0..5 {
            assert_eq!(f1.eval(el(fq, r)), el(fq, (3 * r) % 5));
        }
        // m = 1: the partial sum is the polynomial itself
        let spec1 = LdeSpec::new(f(5), 2, 1, 1, InterpolationDomain::OneBased).unwrap();
        let lin = |pt: &EvalPoint| -> Result<Element, PolyError> { Ok(pt.0[0] + el(fq, 1)) };
        let g = partial_sum(&lin, &[], &h, &spec1).unwrap();
        for r in 0..5 {
            assert_eq!(g.eval(el(fq, r)), lin(&EvalPoint(vec![el(fq, r)])).unwrap());
        }
        // sum_{beta in H} f_1(beta) equals the full-cube brute-force sum
        let full: Element = h.iter().flat_map(|&a| h.iter().map(move |&b| (a, b))).fold(
            fq.zero(),
            |acc, (a, b)| acc + a * b,
        );
        let via_f1 = h.iter().fold(fq.zero(), |acc, &b| acc + f1.eval(b));
        assert_eq!(via_f1, full);
    }
}
