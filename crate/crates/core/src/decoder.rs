//! Sliding-window minimum-error-weight decoder for one sink.
//!
//! Survivors are hypotheses of the source input, each carrying the residual error
//! window that the received words leave after removing the hypothesized codeword and
//! every table entry already committed on its path.

use std::cmp::Ordering;
use std::fmt;
use std::rc::Rc;

use serde::Serialize;

use crate::convcode::Generator;
use crate::error::{Error, Result};
use crate::subspace::{unpack, ReferenceTable, Window};

/// `|X| + max(deg G, l)`: enough words to hold every combined error vector.
pub fn expected_rx_length(x_len: usize, g: &Generator, l: usize) -> usize {
    x_len + g.memory().max(l)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum DecodeMode {
    #[default]
    Global,
    Distributed,
}

impl std::str::FromStr for DecodeMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "global" => Ok(Self::Global),
            "distributed" => Ok(Self::Distributed),
            _ => Err(Error::Parse(format!("unknown decode mode {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DecoderConfig {
    pub l: usize,
    pub mode: DecodeMode,
    /// `|X|`; derived from the received length when absent.
    pub input_length: Option<usize>,
    pub trace: bool,
}

impl DecoderConfig {
    pub fn new(l: usize) -> Self {
        Self {
            l,
            mode: DecodeMode::Global,
            input_length: None,
            trace: false,
        }
    }

    pub fn mode(mut self, mode: DecodeMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn input_length(mut self, n: usize) -> Self {
        self.input_length = Some(n);
        self
    }

    pub fn trace(mut self, on: bool) -> Self {
        self.trace = on;
        self
    }
}

/// Bits output once the surviving hypotheses agreed on them.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Emission {
    pub window_start: usize,
    pub window_end: usize,
    /// Input index of `bits[0]`.
    pub first_index: usize,
    pub bits: Vec<bool>,
}

impl Emission {
    pub fn bit_string(&self) -> String {
        bits_to_string(&self.bits)
    }
}

/// One survivor as seen by the window step: its residual before classification and
/// the weight afterwards (`None` once pruned).
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TraceRow {
    pub residual: Window,
    pub weight: Option<u32>,
}

impl fmt::Display for TraceRow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.weight {
            Some(w) => write!(f, "{} ({w})", self.residual.to_decimal()),
            None => write!(f, "{} ∞", self.residual.to_decimal()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WindowTrace {
    pub start: usize,
    pub end: usize,
    pub rows: Vec<TraceRow>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DecodeResult {
    pub decoded_input: Vec<bool>,
    pub total_weight: u32,
    pub emissions: Vec<Emission>,
    pub trace: Vec<WindowTrace>,
}

impl DecodeResult {
    /// Emitted bits in order, cut to the decoded length.
    pub fn emitted_bits(&self) -> Vec<bool> {
        let mut bits: Vec<bool> = self
            .emissions
            .iter()
            .flat_map(|e| e.bits.iter().copied())
            .collect();
        bits.truncate(self.decoded_input.len());
        bits
    }
}

pub fn bits_to_string(bits: &[bool]) -> String {
    bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
}

/// Persistent input history shared between survivors.
#[derive(Debug)]
struct Path {
    bit: bool,
    len: usize,
    parent: Option<Rc<Path>>,
}

fn push(parent: &Option<Rc<Path>>, bit: bool) -> Option<Rc<Path>> {
    Some(Rc::new(Path {
        bit,
        len: parent.as_ref().map_or(0, |p| p.len) + 1,
        parent: parent.clone(),
    }))
}

/// Bits `from..to` of a history.
fn path_bits(p: &Option<Rc<Path>>, from: usize, to: usize) -> Vec<bool> {
    let mut out = Vec::with_capacity(to.saturating_sub(from));
    let mut node = p.as_deref();
    while let Some(n) = node {
        let idx = n.len - 1;
        if idx < from {
            break;
        }
        if idx < to {
            out.push(n.bit);
        }
        node = n.parent.as_deref();
    }
    out.reverse();
    out
}

/// Lexicographic order of two equal-length histories.
fn path_cmp(a: &Option<Rc<Path>>, b: &Option<Rc<Path>>) -> Ordering {
    let mut ord = Ordering::Equal;
    let (mut x, mut y) = (a.as_ref(), b.as_ref());
    while let (Some(p), Some(q)) = (x, y) {
        if Rc::ptr_eq(p, q) {
            break;
        }
        if p.bit != q.bit {
            ord = p.bit.cmp(&q.bit);
        }
        x = p.parent.as_ref();
        y = q.parent.as_ref();
    }
    ord
}

#[derive(Debug, Clone)]
struct Survivor {
    state: usize,
    /// Packed residual window, first word most significant.
    residual: u128,
    /// `None` once pruned.
    weight: Option<u32>,
    last_commit: Option<usize>,
    history: Option<Rc<Path>>,
}

impl Survivor {
    /// Merge preference: lower weight, then the earlier most recent commit, then the
    /// lexicographically smaller input.
    fn better_than(&self, other: &Survivor) -> bool {
        (self.weight, self.last_commit)
            .cmp(&(other.weight, other.last_commit))
            .then_with(|| path_cmp(&self.history, &other.history))
            == Ordering::Less
    }
}

/// Streaming decoder; feed received words one at a time, then finalize.
pub struct Decoder<'a> {
    g: &'a Generator,
    table: &'a ReferenceTable,
    mode: DecodeMode,
    trace_on: bool,
    l: usize,
    x_len: usize,
    y_len: usize,
    received: Vec<u64>,
    survivors: Vec<Survivor>,
    next_emit: usize,
    emissions: Vec<Emission>,
    trace: Vec<WindowTrace>,
    failed: Option<Error>,
    /// `omega * l`: shift of the first residual word.
    head_shift: u32,
    window_mask: u128,
}

impl<'a> Decoder<'a> {
    pub fn new(g: &'a Generator, table: &'a ReferenceTable, cfg: &DecoderConfig) -> Result<Self> {
        let x_len = cfg.input_length.ok_or_else(|| {
            Error::InvalidArgument("streaming decoder needs the input length".into())
        })?;
        if x_len == 0 {
            return Err(Error::InvalidArgument(
                "input length must be positive".into(),
            ));
        }
        if table.l() != cfg.l {
            return Err(Error::InvalidArgument(format!(
                "table built for l={} but decoder configured with l={}",
                table.l(),
                cfg.l
            )));
        }
        if table.omega() != g.outputs() {
            return Err(Error::InvalidArgument(format!(
                "table has omega={} but the generator has {} outputs",
                table.omega(),
                g.outputs()
            )));
        }
        if !table.supports_packed() {
            return Err(Error::Unsupported(format!(
                "window of {} bits exceeds 128",
                table.omega() * (cfg.l + 1)
            )));
        }
        let bits = g.outputs() * (cfg.l + 1);
        Ok(Self {
            head_shift: (g.outputs() * cfg.l) as u32,
            window_mask: if bits == 128 {
                u128::MAX
            } else {
                (1u128 << bits) - 1
            },
            g,
            table,
            mode: cfg.mode,
            trace_on: cfg.trace,
            l: cfg.l,
            x_len,
            y_len: expected_rx_length(x_len, g, cfg.l),
            received: Vec::new(),
            survivors: Vec::new(),
            next_emit: 0,
            emissions: Vec::new(),
            trace: Vec::new(),
            failed: None,
        })
    }

    pub fn expected_len(&self) -> usize {
        self.y_len
    }

    pub fn received_len(&self) -> usize {
        self.received.len()
    }

    /// Current number of finite-weight survivors.
    pub fn survivor_count(&self) -> usize {
        self.survivors.len()
    }

    /// Consumes one word; returns the input bits emitted by this step.
    pub fn feed(&mut self, word: u64) -> Result<Vec<bool>> {
        if let Some(e) = &self.failed {
            return Err(e.clone());
        }
        if self.received.len() >= self.y_len {
            return Err(Error::InvalidState(format!(
                "received sequence already complete at {} words",
                self.y_len
            )));
        }
        let omega = self.g.outputs();
        if omega < 64 && word >> omega != 0 {
            return Err(Error::InvalidArgument(format!(
                "word {word} does not fit in {omega} bits"
            )));
        }
        self.received.push(word);
        let n = self.received.len();
        if n < self.l + 1 {
            return Ok(Vec::new());
        }
        if n == self.l + 1 {
            self.init();
        } else {
            self.extend(n - 1);
        }
        self.window_step(n - self.l - 1)
    }

    fn input_allowed(&self, t: usize) -> &'static [bool] {
        if t < self.x_len {
            &[false, true]
        } else {
            &[false]
        }
    }

    fn init(&mut self) {
        let trellis = self.g.trellis();
        let omega = self.g.outputs();
        let mut layer = vec![Survivor {
            state: 0,
            residual: 0,
            weight: Some(0),
            last_commit: None,
            history: None,
        }];
        for t in 0..=self.l {
            let mut next = Vec::with_capacity(layer.len() * 2);
            for s in &layer {
                for &bit in self.input_allowed(t) {
                    let (state, out) = trellis.step(s.state, bit);
                    let word = (self.received[t] ^ out) as u128;
                    next.push(Survivor {
                        state,
                        residual: (s.residual << omega) | word,
                        weight: Some(0),
                        last_commit: None,
                        history: push(&s.history, bit),
                    });
                }
            }
            layer = next;
        }
        self.survivors = merge(layer);
    }

    fn extend(&mut self, t: usize) {
        let trellis = self.g.trellis();
        let y = self.received[t];
        let omega = self.g.outputs();
        let mut children = Vec::with_capacity(self.survivors.len() * 2);
        for s in &self.survivors {
            for &bit in self.input_allowed(t) {
                let (state, out) = trellis.step(s.state, bit);
                let residual = ((s.residual << omega) & self.window_mask) | (y ^ out) as u128;
                children.push(Survivor {
                    state,
                    residual,
                    weight: s.weight,
                    last_commit: s.last_commit,
                    history: push(&s.history, bit),
                });
            }
        }
        self.survivors = merge(children);
    }

    fn window_step(&mut self, start: usize) -> Result<Vec<bool>> {
        let end = start + self.l;
        let mut rows = Vec::new();
        for s in &mut self.survivors {
            let before = s.residual;
            if s.residual >> self.head_shift != 0 {
                match self.table.packed_weight(s.residual) {
                    Some(weight) => {
                        s.weight = s.weight.map(|w| w + weight);
                        s.residual = 0;
                        s.last_commit = Some(start);
                    }
                    None => s.weight = None,
                }
            }
            if self.trace_on {
                rows.push(TraceRow {
                    residual: unpack(before, self.g.outputs(), self.l + 1),
                    weight: s.weight,
                });
            }
        }
        if self.trace_on {
            self.trace.push(WindowTrace { start, end, rows });
        }
        self.survivors.retain(|s| s.weight.is_some());
        if self.survivors.is_empty() {
            let e = Error::Undecodable { start, end };
            self.failed = Some(e.clone());
            return Err(e);
        }
        if self.mode == DecodeMode::Distributed
            && self.survivors.len() == 1
            && self.next_emit <= start
        {
            let bits = path_bits(&self.survivors[0].history, self.next_emit, start + 1);
            self.emissions.push(Emission {
                window_start: start,
                window_end: end,
                first_index: self.next_emit,
                bits: bits.clone(),
            });
            self.next_emit = start + 1;
            return Ok(bits);
        }
        Ok(Vec::new())
    }

    /// Picks the lightest survivor whose residual is fully explained.
    pub fn finalize(mut self) -> Result<DecodeResult> {
        if let Some(e) = self.failed {
            return Err(e);
        }
        if self.received.len() != self.y_len {
            return Err(Error::InvalidState(format!(
                "finalize after {} of {} words",
                self.received.len(),
                self.y_len
            )));
        }
        let start = self.y_len - self.l - 1;
        let best = self
            .survivors
            .iter()
            .filter(|s| s.residual == 0)
            .reduce(|a, b| if b.better_than(a) { b } else { a })
            .ok_or(Error::Undecodable {
                start,
                end: start + self.l,
            })?;
        let decoded_input = path_bits(&best.history, 0, self.x_len);
        let total_weight = best.weight.unwrap_or(0);
        if self.mode == DecodeMode::Distributed && self.next_emit < self.x_len {
            self.emissions.push(Emission {
                window_start: start,
                window_end: start + self.l,
                first_index: self.next_emit,
                bits: decoded_input[self.next_emit..].to_vec(),
            });
        }
        Ok(DecodeResult {
            decoded_input,
            total_weight,
            emissions: self.emissions,
            trace: self.trace,
        })
    }
}

/// Keeps the preferred survivor per `(state, residual)`, then orders by state.
/// Within one state, survivors keep the order in which their key first appeared.
fn merge(mut children: Vec<Survivor>) -> Vec<Survivor> {
    children.sort_by_key(|s| s.state);
    let mut kept: Vec<Survivor> = Vec::with_capacity(children.len());
    let mut group = 0;
    for c in children {
        if kept.get(group).is_some_and(|g| g.state != c.state) {
            group = kept.len();
        }
        match kept[group..].iter_mut().find(|k| k.residual == c.residual) {
            Some(k) => {
                if c.better_than(k) {
                    *k = c;
                }
            }
            None => kept.push(c),
        }
    }
    kept
}

/// Decodes a complete received sequence. `|X|` is taken from the config or derived
/// from the sequence length.
pub fn decode(
    y: &[u64],
    g: &Generator,
    table: &ReferenceTable,
    cfg: &DecoderConfig,
) -> Result<DecodeResult> {
    let pad = g.memory().max(cfg.l);
    let x_len = match cfg.input_length {
        Some(n) => n,
        None if y.len() > pad => y.len() - pad,
        None => {
            return Err(Error::InvalidArgument(format!(
                "received length {} leaves no input symbols",
                y.len()
            )))
        }
    };
    let cfg = DecoderConfig {
        input_length: Some(x_len),
        ..cfg.clone()
    };
    let mut dec = Decoder::new(g, table, &cfg)?;
    if y.len() != dec.expected_len() {
        return Err(Error::InvalidArgument(format!(
            "received length {} but |X|={x_len} needs {}",
            y.len(),
            dec.expected_len()
        )));
    }
    for &w in y {
        dec.feed(w)?;
    }
    dec.finalize()
}
