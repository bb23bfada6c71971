//! The streaming computational model: one-pass tapes, bit-accounted verifier
//! memory, snapshots, and ordered views.
//!
//! Space accounting convention: every verifier-retained datum is charged to a
//! named meter slot — field elements at ceil(log2 q) bits, an index into [v]
//! at ceil(log2 v) bits. Bookkeeping constants (stream-position counters,
//! phase tags) are charged once per session under the `bookkeeping` slot at
//! ceil(log2 n) bits per counter. Streamed symbols that are not retained are
//! never charged.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

use crate::field::FieldSpec;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum StreamError {
    #[error("one-pass violation: tape exhausted at position {0}")]
    OnePassViolation(usize),
    #[error("space-bound violation: {current} bits charged against budget {budget}")]
    SpaceBoundViolation { current: u64, budget: u64 },
    #[error("meter accounting bug: releasing {amount} bits from slot '{slot}' holding {held}")]
    NegativeBalance {
        slot: String,
        amount: u64,
        held: u64,
    },
    #[error("schedule violation: {0}")]
    ScheduleViolation(String),
}

/// Deterministic per-session randomness. A session's stream is derived from
/// (seed, session index), so parallel and serial trial runs agree.
pub struct SessionRng {
    rng: ChaCha12Rng,
    draws: u64,
}

impl SessionRng {
    pub fn from_seed(seed: u64, session: u64) -> Self {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        rng.set_stream(session);
        SessionRng { rng, draws: 0 }
    }

    /// Number of raw u64 draws so far.
    pub fn draw_index(&self) -> u64 {
        self.draws
    }

    pub fn next_u64(&mut self) -> u64 {
        self.draws += 1;
        self.rng.next_u64()
    }

    /// Uniform in [0, n) by rejection from the top power of two.
    pub fn next_u64_below(&mut self, n: u64) -> u64 {
        assert!(n > 0);
        if n.is_power_of_two() {
            return self.next_u64() & (n - 1);
        }
        let mask = n.next_power_of_two() - 1;
        loop {
            let r = self.next_u64() & mask;
            if r < n {
                return r;
            }
        }
    }

    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }
}

/// Query-addressable random string. Each index yields an independent uniform
/// value derived from (seed, region, index), so callers may re-read any
/// position in O(1) without storing the string.
#[derive(Clone)]
pub struct AddressableRandom {
    seed: u64,
}

impl AddressableRandom {
    pub fn new(seed: u64) -> Self {
        AddressableRandom { seed }
    }

    fn rng_at(&self, region: u64, index: u64) -> ChaCha12Rng {
        let mut rng = ChaCha12Rng::seed_from_u64(self.seed ^ (region.wrapping_mul(0x9e3779b97f4a7c15)));
        rng.set_stream(index);
        rng
    }

    /// Uniform value in [0, n) at (region, index).
    pub fn value_at(&self, region: u64, index: u64, n: u64) -> u64 {
        assert!(n > 0);
        let mut rng = self.rng_at(region, index);
        if n.is_power_of_two() {
            return rng.next_u64() & (n - 1);
        }
        let mask = n.next_power_of_two() - 1;
        loop {
            let r = rng.next_u64() & mask;
            if r < n {
                return r;
            }
        }
    }

    /// Uniform field element at (region, index).
    pub fn element_at(&self, region: u64, index: u64, spec: FieldSpec) -> crate::field::Element {
        spec.element(self.value_at(region, index, spec.order()))
            .expect("value_at below order")
    }
}

/// One-pass symbol stream. The cursor never moves backwards; reading past the
/// end is an error, which makes single-pass access structurally enforced.
#[derive(Debug, Clone)]
pub struct Tape<T> {
    symbols: Vec<T>,
    cursor: usize,
}

impl<T: Clone> Tape<T> {
    pub fn new(symbols: Vec<T>) -> Self {
        Tape { symbols, cursor: 0 }
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn cursor(&self) -> usize {
        self.cursor
    }

    pub fn remaining(&self) -> usize {
        self.symbols.len() - self.cursor
    }

    /// Returns the next symbol and advances the cursor. Streamed symbols are
    /// transient: they are not charged to any meter.
    pub fn next(&mut self) -> Result<T, StreamError> {
        if self.cursor >= self.symbols.len() {
            return Err(StreamError::OnePassViolation(self.cursor));
        }
        let sym = self.symbols[self.cursor].clone();
        self.cursor += 1;
        Ok(sym)
    }

    /// Archive access for the unbounded prover, which stores the whole tape.
    /// Never used by metered verifier code.
    pub fn archive(&self) -> &[T] {
        &self.symbols
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MeterMode {
    HardFail,
    Record,
}

/// Bit-accounted verifier memory. Charges are tracked per named slot so the
/// audit can diff retained protocol state against the ledger at any step.
#[derive(Debug, Clone)]
pub struct SpaceMeter {
    budget_bits: Option<u64>,
    mode: MeterMode,
    current_bits: u64,
    peak_bits: u64,
    violated: bool,
    slots: BTreeMap<String, u64>,
}

impl SpaceMeter {
    pub fn unbounded() -> Self {
        SpaceMeter {
            budget_bits: None,
            mode: MeterMode::Record,
            current_bits: 0,
            peak_bits: 0,
            violated: false,
            slots: BTreeMap::new(),
        }
    }

    pub fn with_budget(budget_bits: u64, mode: MeterMode) -> Self {
        SpaceMeter {
            budget_bits: Some(budget_bits),
            mode,
            current_bits: 0,
            peak_bits: 0,
            violated: false,
            slots: BTreeMap::new(),
        }
    }

    pub fn charge(&mut self, slot: &str, bits: u64) -> Result<(), StreamError> {
        *self.slots.entry(slot.to_string()).or_insert(0) += bits;
        self.current_bits += bits;
        self.peak_bits = self.peak_bits.max(self.current_bits);
        if let Some(budget) = self.budget_bits {
            if self.current_bits > budget {
                self.violated = true;
                if self.mode == MeterMode::HardFail {
                    return Err(StreamError::SpaceBoundViolation {
                        current: self.current_bits,
                        budget,
                    });
                }
            }
        }
        Ok(())
    }

    pub fn release(&mut self, slot: &str, bits: u64) -> Result<(), StreamError> {
        let held = self.slots.get(slot).copied().unwrap_or(0);
        if bits > held {
            return Err(StreamError::NegativeBalance {
                slot: slot.to_string(),
                amount: bits,
                held,
            });
        }
        *self.slots.get_mut(slot).unwrap() -= bits;
        self.current_bits -= bits;
        Ok(())
    }

    /// Drops whatever the slot holds.
    pub fn release_slot(&mut self, slot: &str) {
        let held = self.slots.remove(slot).unwrap_or(0);
        self.current_bits -= held;
    }

    /// Charges `count` field elements of the given spec.
    pub fn charge_elements(
        &mut self,
        slot: &str,
        spec: FieldSpec,
        count: u64,
    ) -> Result<(), StreamError> {
        self.charge(slot, spec.element_bits() * count)
    }

    /// Charges an index into [range] at ceil(log2 range) bits.
    pub fn charge_index(&mut self, slot: &str, range: u64) -> Result<(), StreamError> {
        self.charge(slot, bits_for_range(range))
    }

    pub fn current_bits(&self) -> u64 {
        self.current_bits
    }

    pub fn peak_bits(&self) -> u64 {
        self.peak_bits
    }

    pub fn violated(&self) -> bool {
        self.violated
    }

    pub fn slot_bits(&self, slot: &str) -> u64 {
        self.slots.get(slot).copied().unwrap_or(0)
    }

    /// The audit invariant: slot ledger must sum to the current balance.
    pub fn audit_ledger(&self) -> bool {
        self.slots.values().sum::<u64>() == self.current_bits
    }
}

/// Bits to store an index into [range], i.e. ceil(log2 range), minimum 1.
pub fn bits_for_range(range: u64) -> u64 {
    if range <= 2 {
        1
    } else {
        64 - (range - 1).leading_zeros() as u64
    }
}

/// Opaque encoding of a verifier's retained memory state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Snapshot(pub Vec<u8>);

impl Snapshot {
    pub fn bits(&self) -> u64 {
        self.0.len() as u64 * 8
    }
}

/// Bit-level writer used to pack snapshots so that their size stays within
/// the charged bit count (rounded up to whole bytes).
pub struct BitWriter {
    bytes: Vec<u8>,
    bit_pos: u64,
}

impl BitWriter {
    pub fn new() -> Self {
        BitWriter {
            bytes: Vec::new(),
            bit_pos: 0,
        }
    }

    pub fn write(&mut self, value: u64, bits: u64) {
        assert!(bits <= 64);
        for i in 0..bits {
            let bit = (value >> i) & 1;
            let byte_idx = (self.bit_pos / 8) as usize;
            if byte_idx == self.bytes.len() {
                self.bytes.push(0);
            }
            self.bytes[byte_idx] |= (bit as u8) << (self.bit_pos % 8);
            self.bit_pos += 1;
        }
    }

    pub fn finish(self) -> Snapshot {
        Snapshot(self.bytes)
    }
}

impl Default for BitWriter {
    fn default() -> Self {
        Self::new()
    }
}

pub struct BitReader<'a> {
    bytes: &'a [u8],
    bit_pos: u64,
}

impl<'a> BitReader<'a> {
    pub fn new(snapshot: &'a Snapshot) -> Self {
        BitReader {
            bytes: &snapshot.0,
            bit_pos: 0,
        }
    }

    pub fn read(&mut self, bits: u64) -> u64 {
        let mut value = 0u64;
        for i in 0..bits {
            let byte_idx = (self.bit_pos / 8) as usize;
            let bit = if byte_idx < self.bytes.len() {
                (self.bytes[byte_idx] >> (self.bit_pos % 8)) & 1
            } else {
                0
            };
            value |= (bit as u64) << i;
            self.bit_pos += 1;
        }
        value
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Origin {
    Randomness,
    Prover,
    Input,
}

/// One entry of a verifier view: a protocol message, an input segment, or a
/// batch of verifier coin flips, in the order the verifier streams them.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ViewEntry {
    pub origin: Origin,
    pub label: String,
    /// Stream position (in symbols) at which this entry starts.
    pub position: u64,
    pub payload: Vec<u64>,
}

/// The ordered record of what the verifier streams during a protocol run:
/// randomness, prover messages, and the input, each tagged with origin and
/// stream position. Serialization round-trips bit-exactly; a distinguisher
/// can consume a view as a tape of symbols.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct View {
    pub field: FieldSpec,
    pub entries: Vec<ViewEntry>,
    position: u64,
    input_seen: bool,
    input_closed: bool,
}

impl View {
    pub fn new(field: FieldSpec) -> Self {
        View {
            field,
            entries: Vec::new(),
            position: 0,
            input_seen: false,
            input_closed: false,
        }
    }

    /// Appends an entry. The input must be streamed at a contiguous block of
    /// the schedule: once a post-input prover message or coin batch arrives,
    /// further input entries are schedule violations.
    pub fn record(
        &mut self,
        origin: Origin,
        label: &str,
        payload: Vec<u64>,
    ) -> Result<(), StreamError> {
        match origin {
            Origin::Input => {
                if self.input_closed {
                    return Err(StreamError::ScheduleViolation(format!(
                        "input entry '{label}' after the input block was closed"
                    )));
                }
                self.input_seen = true;
            }
            Origin::Prover | Origin::Randomness => {
                if self.input_seen {
                    self.input_closed = true;
                }
            }
        }
        let len = payload.len() as u64;
        self.entries.push(ViewEntry {
            origin,
            label: label.to_string(),
            position: self.position,
            payload,
        });
        self.position += len;
        Ok(())
    }

    /// Total number of streamed symbols.
    pub fn stream_len(&self) -> u64 {
        self.position
    }

    /// Flattens the view into a one-pass tape of raw symbols, as a streaming
    /// distinguisher would consume it.
    pub fn as_tape(&self) -> Tape<u64> {
        let symbols = self
            .entries
            .iter()
            .flat_map(|e| e.payload.iter().copied())
            .collect();
        Tape::new(symbols)
    }

    /// Schedule fingerprint: (origin, label, payload length) per entry.
    pub fn schedule(&self) -> Vec<(Origin, String, u64)> {
        self.entries
            .iter()
            .map(|e| (e.origin, e.label.clone(), e.payload.len() as u64))
            .collect()
    }

    pub fn serialize_json(&self) -> String {
        let entries: Vec<serde_json::Value> = self
            .entries
            .iter()
            .map(|e| {
                let mut hex = String::with_capacity(e.payload.len() * 16);
                for v in &e.payload {
                    hex.push_str(&format!("{v:016x}"));
                }
                serde_json::json!({
                    "origin": e.origin,
                    "label": e.label,
                    "position": e.position,
                    "payload-hex": hex,
                })
            })
            .collect();
        serde_json::to_string(&serde_json::json!({
            "field": self.field,
            "entries": entries,
        }))
        .expect("view serialization")
    }

    pub fn deserialize_json(s: &str) -> Result<View, serde_json::Error> {
        let value: serde_json::Value = serde_json::from_str(s)?;
        let field: FieldSpec = serde_json::from_value(value["field"].clone())?;
        let mut view = View::new(field);
        for e in value["entries"].as_array().into_iter().flatten() {
            let origin: Origin = serde_json::from_value(e["origin"].clone())?;
            let label = e["label"].as_str().unwrap_or_default().to_string();
            let hex = e["payload-hex"].as_str().unwrap_or_default();
            let payload: Vec<u64> = hex
                .as_bytes()
                .chunks(16)
                .map(|c| u64::from_str_radix(std::str::from_utf8(c).unwrap_or("0"), 16).unwrap_or(0))
                .collect();
            // bypass schedule checks: we are reconstructing a recorded view
            view.entries.push(ViewEntry {
                origin,
                label,
                position: e["position"].as_u64().unwrap_or(0),
                payload,
            });
        }
        view.position = view
            .entries
            .last()
            .map(|e| e.position + e.payload.len() as u64)
            .unwrap_or(0);
        Ok(view)
    }
}
