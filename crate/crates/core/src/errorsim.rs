//! Random network errors and Monte-Carlo bit error rate runs.

use std::fmt::Write as _;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::convcode::{encode, Generator};
use crate::decoder::{decode, DecoderConfig};
use crate::error::{Error, Result};
use crate::netmodel::SinkTransfer;
use crate::subspace::{ErrorVector, ReferenceTable};

/// `q = 1 - sum_{i=1..|E|} p^i`, the probability of an error-free instant.
pub fn derive_q(p: f64, edges: usize) -> Result<f64> {
    if !p.is_finite() || !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidProbability { p, edges });
    }
    let mut sum = 0.0;
    let mut term = 1.0;
    for _ in 0..edges {
        term *= p;
        sum += term;
    }
    let q = 1.0 - sum;
    if q < -1e-12 {
        return Err(Error::InvalidProbability { p, edges });
    }
    Ok(q.max(0.0))
}

/// Single-error probability `p` over `edges` edges: `i` edges fail at an instant
/// with probability `p^i`, none with probability `q`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ErrorModelConfig {
    p: f64,
    edges: usize,
    q: f64,
}

impl ErrorModelConfig {
    pub fn new(p: f64, edges: usize) -> Result<Self> {
        if edges == 0 || edges > 64 {
            return Err(Error::InvalidArgument(format!(
                "edge count {edges} outside 1..=64"
            )));
        }
        Ok(Self {
            p,
            edges,
            q: derive_q(p, edges)?,
        })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn edge_count(&self) -> usize {
        self.edges
    }

    /// Probability of exactly `i` failing edges.
    pub fn weight_probability(&self, i: usize) -> f64 {
        match i {
            0 => self.q,
            i if i <= self.edges => self.p.powi(i as i32),
            _ => 0.0,
        }
    }

    /// Draws the error vector of one instant; the failing edges form a uniformly
    /// chosen subset of the drawn size.
    pub fn sample_error<R: Rng + ?Sized>(&self, rng: &mut R) -> ErrorVector {
        let u: f64 = rng.gen();
        let mut acc = self.q;
        let mut weight = 0;
        while u >= acc && weight < self.edges {
            weight += 1;
            acc += self.weight_probability(weight);
        }
        // Rounding can leave a sliver above the last cumulative value.
        if u >= acc {
            return ErrorVector::zero(self.edges);
        }
        if weight == 0 {
            return ErrorVector::zero(self.edges);
        }
        ErrorVector::from_edges(index::sample(rng, self.edges, weight), self.edges)
    }
}

/// Received words at a sink: `X G_O + sum_s e_s F z^s`, truncated to `y_len`.
/// `errors[s]` is the error vector injected at instant `s`.
pub fn transmit(
    g_out: &Generator,
    transfer: &SinkTransfer,
    x: &[bool],
    errors: &[ErrorVector],
    y_len: usize,
) -> Vec<u64> {
    let mut y = encode(g_out, x, true);
    y.resize(y_len, 0);
    for (s, e) in errors.iter().enumerate() {
        let mut bits = e.mask();
        while bits != 0 {
            let edge = bits.trailing_zeros() as usize;
            bits &= bits - 1;
            for i in 0..=transfer.l_t() {
                if let Some(w) = y.get_mut(s + i) {
                    *w ^= transfer.edge_word(i, edge);
                }
            }
        }
    }
    y
}

/// Everything needed to decode at one sink.
#[derive(Debug, Clone)]
pub struct SinkSetup {
    pub name: String,
    pub transfer: SinkTransfer,
    /// Output generator `G_I M_t` seen by this sink.
    pub generator: Generator,
    pub table: ReferenceTable,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BerConfig {
    pub l: usize,
    pub p_grid: Vec<f64>,
    pub trials: usize,
    pub x_len: usize,
    pub seed: u64,
}

impl Default for BerConfig {
    fn default() -> Self {
        Self {
            l: 2,
            p_grid: vec![0.0],
            trials: 10_000,
            x_len: 64,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BerRow {
    pub p: f64,
    pub sink: String,
    pub trials: usize,
    pub total_bits: u64,
    pub bit_errors: u64,
    pub undecodable_blocks: u64,
    pub ber: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BerReport {
    pub seed: u64,
    pub rows: Vec<BerRow>,
    /// Grid points skipped because `q` would be negative.
    pub warnings: Vec<String>,
}

impl BerReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("p,sink,trials,total_bits,bit_errors,undecodable_blocks,ber\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{}",
                sig12(r.p),
                r.sink,
                r.trials,
                r.total_bits,
                r.bit_errors,
                r.undecodable_blocks,
                sig12(r.ber)
            );
        }
        out
    }
}

/// Fixed-point formatting with 12 significant digits.
pub fn sig12(v: f64) -> String {
    let decimals = if v == 0.0 || !v.is_finite() {
        11
    } else {
        (11 - v.abs().log10().floor() as i64).max(0) as usize
    };
    format!("{v:.decimals$}")
}

/// Deterministic per-trial seed, independent of scheduling.
fn trial_seed(seed: u64, p_idx: usize, trial: usize) -> u64 {
    let mut z = seed
        ^ (p_idx as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
        ^ (trial as u64).wrapping_mul(0xD1B5_4A32_D192_ED03);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, Default)]
struct Tally {
    bit_errors: Vec<u64>,
    undecodable: Vec<u64>,
}

impl Tally {
    fn new(sinks: usize) -> Self {
        Self {
            bit_errors: vec![0; sinks],
            undecodable: vec![0; sinks],
        }
    }

    fn merge(mut self, other: Tally) -> Tally {
        for (a, b) in self.bit_errors.iter_mut().zip(other.bit_errors) {
            *a += b;
        }
        for (a, b) in self.undecodable.iter_mut().zip(other.undecodable) {
            *a += b;
        }
        self
    }
}

/// One trial: a random input and error sequence shared by all sinks, decoded at each.
fn run_trial(sinks: &[SinkSetup], model: &ErrorModelConfig, cfg: &BerConfig, seed: u64) -> Tally {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x: Vec<bool> = (0..cfg.x_len).map(|_| rng.gen()).collect();
    let errors: Vec<ErrorVector> = (0..cfg.x_len)
        .map(|_| model.sample_error(&mut rng))
        .collect();
    let mut tally = Tally::new(sinks.len());
    let dcfg = DecoderConfig::new(cfg.l).input_length(cfg.x_len);
    for (k, s) in sinks.iter().enumerate() {
        let y_len = crate::decoder::expected_rx_length(cfg.x_len, &s.generator, cfg.l);
        let y = transmit(&s.generator, &s.transfer, &x, &errors, y_len);
        match decode(&y, &s.generator, &s.table, &dcfg) {
            Ok(r) => {
                tally.bit_errors[k] += r
                    .decoded_input
                    .iter()
                    .zip(&x)
                    .filter(|(a, b)| a != b)
                    .count() as u64;
            }
            Err(_) => {
                tally.bit_errors[k] += cfg.x_len as u64;
                tally.undecodable[k] += 1;
            }
        }
    }
    tally
}

#[cfg(feature = "parallel")]
fn run_point(
    sinks: &[SinkSetup],
    model: &ErrorModelConfig,
    cfg: &BerConfig,
    p_idx: usize,
) -> Tally {
    use rayon::prelude::*;
    (0..cfg.trials)
        .into_par_iter()
        .map(|t| run_trial(sinks, model, cfg, trial_seed(cfg.seed, p_idx, t)))
        .reduce(|| Tally::new(sinks.len()), Tally::merge)
}

#[cfg(not(feature = "parallel"))]
fn run_point(
    sinks: &[SinkSetup],
    model: &ErrorModelConfig,
    cfg: &BerConfig,
    p_idx: usize,
) -> Tally {
    (0..cfg.trials)
        .map(|t| run_trial(sinks, model, cfg, trial_seed(cfg.seed, p_idx, t)))
        .fold(Tally::new(sinks.len()), Tally::merge)
}

/// Bit error rate per `(p, sink)`; undecodable blocks count every input bit as wrong.
pub fn run_ber(sinks: &[SinkSetup], cfg: &BerConfig) -> Result<BerReport> {
    run_ber_with_progress(sinks, cfg, |_, _| {})
}

/// As [`run_ber`], calling `progress(p_idx, p)` after each finished grid point.
pub fn run_ber_with_progress<F: FnMut(usize, f64)>(
    sinks: &[SinkSetup],
    cfg: &BerConfig,
    mut progress: F,
) -> Result<BerReport> {
    let Some(first) = sinks.first() else {
        return Err(Error::InvalidArgument("no sinks to simulate".into()));
    };
    if cfg.x_len == 0 || cfg.trials == 0 {
        return Err(Error::InvalidArgument(
            "trials and input length must be positive".into(),
        ));
    }
    let edges = first.transfer.edge_count();
    for s in sinks {
        if s.table.l() != cfg.l {
            return Err(Error::InvalidArgument(format!(
                "table for sink {} built at l={}, run uses l={}",
                s.name,
                s.table.l(),
                cfg.l
            )));
        }
        if s.transfer.edge_count() != edges {
            return Err(Error::InvalidArgument(
                "sinks disagree on the edge count".into(),
            ));
        }
    }
    let mut rows = Vec::new();
    let mut warnings = Vec::new();
    for (p_idx, &p) in cfg.p_grid.iter().enumerate() {
        let model = match ErrorModelConfig::new(p, edges) {
            Ok(m) => m,
            Err(e) => {
                warnings.push(format!("skipped p={p}: {e}"));
                continue;
            }
        };
        let tally = run_point(sinks, &model, cfg, p_idx);
        let total_bits = (cfg.trials * cfg.x_len) as u64;
        for (k, s) in sinks.iter().enumerate() {
            rows.push(BerRow {
                p,
                sink: s.name.clone(),
                trials: cfg.trials,
                total_bits,
                bit_errors: tally.bit_errors[k],
                undecodable_blocks: tally.undecodable[k],
                ber: tally.bit_errors[k] as f64 / total_bits as f64,
            });
        }
        progress(p_idx, p);
    }
    Ok(BerReport {
        seed: cfg.seed,
        rows,
        warnings,
    })
}

/// Parses `0.1,0.2` or `start:stop:step` (inclusive of `stop` up to rounding).
pub fn parse_p_grid(s: &str) -> Result<Vec<f64>> {
    let num = |t: &str| {
        t.trim()
            .parse::<f64>()
            .map_err(|_| Error::Parse(format!("bad probability {t:?}")))
    };
    let parts: Vec<&str> = s.split(':').collect();
    match parts.as_slice() {
        [start, stop, step] => {
            let (start, stop, step) = (num(start)?, num(stop)?, num(step)?);
            if step <= 0.0 || stop < start {
                return Err(Error::Parse(format!("bad range {s:?}")));
            }
            let n = ((stop - start) / step + 1e-9).floor() as usize;
            Ok((0..=n).map(|i| start + i as f64 * step).collect())
        }
        [_] => s.split(',').map(num).collect(),
        _ => Err(Error::Parse(format!("bad grid {s:?}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf2poly::{BitMatrix, PolyMatrix};

    #[test]
    fn q_values() {
        assert_eq!(derive_q(0.0, 9).unwrap(), 1.0);
        assert!((derive_q(0.5, 9).unwrap() - 0.001953125).abs() < 1e-15);
        assert!(matches!(
            derive_q(0.6, 9),
            Err(Error::InvalidProbability { .. })
        ));
        assert!(derive_q(-0.1, 3).is_err());
        let m = ErrorModelConfig::new(0.1, 9).unwrap();
        let total: f64 = (0..=9).map(|i| m.weight_probability(i)).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_p_never_errs() {
        let m = ErrorModelConfig::new(0.0, 5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        assert!((0..1000).all(|_| m.sample_error(&mut rng).is_zero()));
    }

    #[test]
    fn sig12_format() {
        assert_eq!(sig12(0.0), "0.00000000000");
        assert_eq!(sig12(0.5), "0.500000000000");
        assert_eq!(sig12(0.02), "0.0200000000000");
        assert_eq!(sig12(1.0), "1.00000000000");
    }

    #[test]
    fn grid_parsing() {
        assert_eq!(parse_p_grid("0.1,0.2").unwrap(), vec![0.1, 0.2]);
        let g = parse_p_grid("0.02:0.1:0.02").unwrap();
        assert_eq!(g.len(), 5);
        assert!((g[4] - 0.1).abs() < 1e-12);
        assert!(parse_p_grid("0.1:0:0.1").is_err());
        assert!(parse_p_grid("a").is_err());
    }

    #[test]
    fn transmit_adds_delayed_footprint() {
        let f = PolyMatrix::parse_rows(&[vec!["1", "1"], vec!["0", "11"]]).unwrap();
        let t = SinkTransfer::new("t", f, &BitMatrix::identity(2)).unwrap();
        let g: Generator = "1 1".parse().unwrap();
        let x = [true, false];
        let errors = [ErrorVector::zero(2), ErrorVector::parse("01").unwrap()];
        let y = transmit(&g, &t, &x, &errors, 3);
        assert_eq!(y, vec![3, 1, 1]);
    }

    #[test]
    fn seeds_differ() {
        assert_ne!(trial_seed(1, 0, 0), trial_seed(1, 0, 1));
        assert_ne!(trial_seed(1, 0, 0), trial_seed(1, 1, 0));
    }
}
