//! Finite-field arithmetic for prime fields F_p and binary extension fields GF(2^k).
//!
//! Elements carry their field spec and are plain immutable values; all
//! operations are pure. Binary extension fields use one fixed canonical
//! irreducible per degree: the lexicographically smallest irreducible
//! polynomial of that degree, interpreted as an integer bitmask (bit i is the
//! coefficient of x^i). This makes transcripts bit-reproducible across runs
//! and builds.

use serde::{Deserialize, Serialize};
use std::fmt;
use std::sync::OnceLock;

use crate::stream::SessionRng;

/// Largest supported field order. Desk scale; larger is a non-goal.
pub const MAX_ORDER: u64 = 1 << 31;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FieldError {
    #[error("invalid field spec: {0}")]
    InvalidSpec(String),
    #[error("elements belong to different field specs")]
    SpecMismatch,
    #[error("division by zero")]
    DivisionByZero,
    #[error("index {index} out of range for field of order {order}")]
    IndexOutOfRange { index: u64, order: u64 },
    #[error("sampling support is empty: exclusion set covers the field")]
    EmptySupport,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FieldKind {
    Prime,
    BinaryExtension,
}

/// Description of a finite field F_q, q = characteristic^degree.
///
/// Copyable and freely shareable; equality is structural.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FieldSpec {
    pub kind: FieldKind,
    pub characteristic: u64,
    pub degree: u32,
}

/// An element of a finite field, as a canonical integer in [0, q).
///
/// For prime fields the representative is the residue; for GF(2^k) it is the
/// coefficient bitmask of the residue polynomial.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Element {
    spec: FieldSpec,
    repr: u64,
}

impl fmt::Debug for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}@{}", self.repr, self.spec.order())
    }
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n % 2 == 0 {
        return n == 2;
    }
    let mut d = 3u64;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

/// Multiplication of GF(2)[x] polynomials given as bitmasks (no reduction).
fn poly_mul_gf2(a: u64, b: u64) -> u128 {
    let mut acc: u128 = 0;
    let mut b = b as u128;
    let mut a = a;
    while a != 0 {
        if a & 1 == 1 {
            acc ^= b;
        }
        a >>= 1;
        b <<= 1;
    }
    acc
}

fn poly_deg(a: u128) -> i32 {
    127 - a.leading_zeros() as i32
}

/// Remainder of a modulo m in GF(2)[x].
fn poly_rem_gf2(mut a: u128, m: u64) -> u64 {
    let md = poly_deg(m as u128);
    while poly_deg(a) >= md {
        a ^= (m as u128) << (poly_deg(a) - md);
    }
    a as u64
}

fn poly_mulmod(a: u64, b: u64, m: u64) -> u64 {
    poly_rem_gf2(poly_mul_gf2(a, b), m)
}

/// x^(2^e) mod m by repeated squaring.
fn poly_frob(e: u32, m: u64) -> u64 {
    let mut x = 2u64; // the polynomial x
    for _ in 0..e {
        x = poly_mulmod(x, x, m);
    }
    x
}

fn poly_gcd_gf2(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let r = poly_rem_gf2(a as u128, b);
        a = b;
        b = r;
    }
    a
}

/// Rabin irreducibility test for a degree-k bitmask polynomial over GF(2).
fn is_irreducible_gf2(m: u64, k: u32) -> bool {
    if poly_deg(m as u128) != k as i32 {
        return false;
    }
    // x^(2^k) == x mod m
    if poly_frob(k, m) != 2 {
        return false;
    }
    // gcd(x^(2^(k/p)) - x, m) == 1 for every prime divisor p of k
    let mut rem = k;
    let mut p = 2;
    let mut prime_divs = Vec::new();
    while p * p <= rem {
        if rem % p == 0 {
            prime_divs.push(p);
            while rem % p == 0 {
                rem /= p;
            }
        }
        p += 1;
    }
    if rem > 1 {
        prime_divs.push(rem);
    }
    for p in prime_divs {
        let t = poly_frob(k / p, m) ^ 2;
        if poly_gcd_gf2(m, t) != 1 {
            return false;
        }
    }
    true
}

/// Canonical irreducible of each supported degree: the numerically smallest
/// degree-k irreducible bitmask. Computed once and cached.
pub fn canonical_irreducible(degree: u32) -> u64 {
    static TABLE: OnceLock<Vec<u64>> = OnceLock::new();
    let table = TABLE.get_or_init(|| {
        let mut t = vec![0u64; 32];
        for k in 1..32u32 {
            let lo = 1u64 << k;
            let mut m = lo + 1;
            loop {
                if is_irreducible_gf2(m, k) {
                    t[k as usize] = m;
                    break;
                }
                m += 2; // constant term must be 1 for irreducibility (k >= 1)
            }
        }
        t
    });
    table[degree as usize]
}

impl FieldSpec {
    pub fn prime(q: u64) -> Result<Self, FieldError> {
        if q < 2 || q > MAX_ORDER {
            return Err(FieldError::InvalidSpec(format!(
                "order {q} outside supported range [2, 2^31]"
            )));
        }
        if !is_prime(q) {
            return Err(FieldError::InvalidSpec(format!("{q} is not prime")));
        }
        Ok(FieldSpec {
            kind: FieldKind::Prime,
            characteristic: q,
            degree: 1,
        })
    }

    pub fn binary(degree: u32) -> Result<Self, FieldError> {
        if degree == 0 || degree > 31 {
            return Err(FieldError::InvalidSpec(format!(
                "GF(2^{degree}) outside supported range (1 <= k <= 31)"
            )));
        }
        Ok(FieldSpec {
            kind: FieldKind::BinaryExtension,
            characteristic: 2,
            degree,
        })
    }

    /// Parses "257" as a prime field and "2^8" as a binary extension.
    pub fn parse(s: &str) -> Result<Self, FieldError> {
        if let Some(exp) = s.strip_prefix("2^") {
            let k = exp
                .parse::<u32>()
                .map_err(|_| FieldError::InvalidSpec(format!("bad field spec '{s}'")))?;
            Self::binary(k)
        } else {
            let q = s
                .parse::<u64>()
                .map_err(|_| FieldError::InvalidSpec(format!("bad field spec '{s}'")))?;
            if q > 2 && q.is_power_of_two() {
                Self::binary(q.trailing_zeros())
            } else {
                Self::prime(q)
            }
        }
    }

    pub fn order(&self) -> u64 {
        match self.kind {
            FieldKind::Prime => self.characteristic,
            FieldKind::BinaryExtension => 1 << self.degree,
        }
    }

    /// Canonical reduction polynomial (binary extensions only).
    pub fn reduction_poly(&self) -> Option<u64> {
        match self.kind {
            FieldKind::Prime => None,
            FieldKind::BinaryExtension => Some(canonical_irreducible(self.degree)),
        }
    }

    /// Bits needed to store one element: ceil(log2 q).
    pub fn element_bits(&self) -> u64 {
        let q = self.order();
        64 - (q - 1).leading_zeros() as u64
    }

    pub fn element(&self, repr: u64) -> Result<Element, FieldError> {
        if repr >= self.order() {
            return Err(FieldError::IndexOutOfRange {
                index: repr,
                order: self.order(),
            });
        }
        Ok(Element { spec: *self, repr })
    }

    pub fn zero(&self) -> Element {
        Element {
            spec: *self,
            repr: 0,
        }
    }

    pub fn one(&self) -> Element {
        Element {
            spec: *self,
            repr: 1 % self.order(),
        }
    }

    /// Canonical injection of i in [q] into the field: the element whose
    /// representative is i mod q. Prime fields reduce the integer; binary
    /// extensions take the bits of i mod 2^k as polynomial coefficients.
    pub fn embed_index(&self, i: u64) -> Result<Element, FieldError> {
        let q = self.order();
        if i > q {
            return Err(FieldError::IndexOutOfRange { index: i, order: q });
        }
        Ok(Element {
            spec: *self,
            repr: i % q,
        })
    }

    /// Uniform sample from the field minus an exclusion set, deterministic
    /// given the rng state and draw order.
    pub fn sample_uniform(
        &self,
        rng: &mut SessionRng,
        exclude: &[Element],
    ) -> Result<Element, FieldError> {
        let q = self.order();
        let mut mask = vec![false; 0];
        let excluded: Vec<u64> = exclude
            .iter()
            .filter(|e| e.spec == *self)
            .map(|e| e.repr)
            .collect();
        let distinct = {
            let mut v = excluded.clone();
            v.sort_unstable();
            v.dedup();
            v
        };
        if distinct.len() as u64 >= q {
            return Err(FieldError::EmptySupport);
        }
        // Rejection sampling while the support is large; direct indexing once
        // more than half the field is excluded.
        if (distinct.len() as u64) * 2 < q {
            loop {
                let r = rng.next_u64_below(q);
                if !distinct.contains(&r) {
                    return Ok(Element {
                        spec: *self,
                        repr: r,
                    });
                }
            }
        } else {
            mask.resize(q as usize, false);
            for &e in &distinct {
                mask[e as usize] = true;
            }
            let allowed: Vec<u64> = (0..q).filter(|&r| !mask[r as usize]).collect();
            let idx = rng.next_u64_below(allowed.len() as u64) as usize;
            Ok(Element {
                spec: *self,
                repr: allowed[idx],
            })
        }
    }

    /// Iterator over all elements, in representative order.
    pub fn elements(&self) -> impl Iterator<Item = Element> + '_ {
        let spec = *self;
        (0..self.order()).map(move |repr| Element { spec, repr })
    }
}

impl Element {
    pub fn repr(&self) -> u64 {
        self.repr
    }

    pub fn spec(&self) -> FieldSpec {
        self.spec
    }

    pub fn is_zero(&self) -> bool {
        self.repr == 0
    }

    fn check_spec(&self, other: &Element) -> Result<(), FieldError> {
        if self.spec != other.spec {
            return Err(FieldError::SpecMismatch);
        }
        Ok(())
    }

    pub fn try_add(&self, other: &Element) -> Result<Element, FieldError> {
        self.check_spec(other)?;
        let repr = match self.spec.kind {
            FieldKind::Prime => {
                let q = self.spec.characteristic;
                (self.repr + other.repr) % q
            }
            FieldKind::BinaryExtension => self.repr ^ other.repr,
        };
        Ok(Element {
            spec: self.spec,
            repr,
        })
    }

    pub fn try_sub(&self, other: &Element) -> Result<Element, FieldError> {
        self.try_add(&other.neg())
    }

    pub fn try_mul(&self, other: &Element) -> Result<Element, FieldError> {
        self.check_spec(other)?;
        let repr = match self.spec.kind {
            FieldKind::Prime => {
                let q = self.spec.characteristic;
                (self.repr as u128 * other.repr as u128 % q as u128) as u64
            }
            FieldKind::BinaryExtension => {
                let m = canonical_irreducible(self.spec.degree);
                poly_mulmod(self.repr, other.repr, m)
            }
        };
        Ok(Element {
            spec: self.spec,
            repr,
        })
    }

    pub fn neg(&self) -> Element {
        let repr = match self.spec.kind {
            FieldKind::Prime => {
                let q = self.spec.characteristic;
                (q - self.repr) % q
            }
            FieldKind::BinaryExtension => self.repr,
        };
        Element {
            spec: self.spec,
            repr,
        }
    }

    pub fn inv(&self) -> Result<Element, FieldError> {
        if self.repr == 0 {
            return Err(FieldError::DivisionByZero);
        }
        let repr = match self.spec.kind {
            FieldKind::Prime => {
                // extended Euclid on (repr, q)
                let q = self.spec.characteristic as i128;
                let (mut r0, mut r1) = (q, self.repr as i128);
                let (mut s0, mut s1) = (0i128, 1i128);
                while r1 != 0 {
                    let quot = r0 / r1;
                    (r0, r1) = (r1, r0 - quot * r1);
                    (s0, s1) = (s1, s0 - quot * s1);
                }
                debug_assert_eq!(r0, 1);
                (s0.rem_euclid(q)) as u64
            }
            FieldKind::BinaryExtension => {
                // a^(2^k - 2) by square and multiply
                let k = self.spec.degree;
                let m = canonical_irreducible(k);
                let mut result = 1u64;
                let mut base = self.repr;
                let mut exp = (1u64 << k) - 2;
                while exp > 0 {
                    if exp & 1 == 1 {
                        result = poly_mulmod(result, base, m);
                    }
                    base = poly_mulmod(base, base, m);
                    exp >>= 1;
                }
                result
            }
        };
        Ok(Element {
            spec: self.spec,
            repr,
        })
    }

    pub fn try_div(&self, other: &Element) -> Result<Element, FieldError> {
        self.try_mul(&other.inv()?)
    }

    pub fn pow(&self, mut exp: u64) -> Element {
        let mut result = self.spec.one();
        let mut base = *self;
        while exp > 0 {
            if exp & 1 == 1 {
                result = result * base;
            }
            base = base * base;
            exp >>= 1;
        }
        result
    }
}

// Operator forms panic on spec mismatch; protocol code always works within a
// single field, so a mismatch is a programming error. Use try_* for checked
// arithmetic at API boundaries.
impl std::ops::Add for Element {
    type Output = Element;
    fn add(self, rhs: Element) -> Element {
        self.try_add(&rhs).expect("field spec mismatch in +")
    }
}

impl std::ops::Sub for Element {
    type Output = Element;
    fn sub(self, rhs: Element) -> Element {
        self.try_sub(&rhs).expect("field spec mismatch in -")
    }
}

impl std::ops::Mul for Element {
    type Output = Element;
    fn mul(self, rhs: Element) -> Element {
        self.try_mul(&rhs).expect("field spec mismatch in *")
    }
}

impl std::ops::Neg for Element {
    type Output = Element;
    fn neg(self) -> Element {
        Element::neg(&self)
    }
}
