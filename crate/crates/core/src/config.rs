//! JSON network files.
//!
//! A file describes the network either through `(A, K, B)` with the full topology,
//! or directly through `A` and one `F` matrix per sink. Run parameters (generator,
//! window, seed, ...) may ride along as defaults for the command line.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Deserialize;

use crate::convcode::Generator;
use crate::decoder::DecodeMode;
use crate::error::{Error, Result};
use crate::errorsim::SinkSetup;
use crate::gf2poly::{BitMatrix, PolyMatrix};
use crate::netmodel::{NetworkCode, NetworkSpec, SinkTransfer};
use crate::subspace::ReferenceTable;

/// Default degree bound for the series inverse of `I - K`.
pub const DEFAULT_TRUNCATION_BOUND: usize = 64;

/// A bit written as `0`, `1`, `"0"` or `"1"`.
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(untagged)]
enum Bit {
    Num(u8),
    Text(char),
}

impl Bit {
    fn value(self) -> Result<bool> {
        match self {
            Bit::Num(0) | Bit::Text('0') => Ok(false),
            Bit::Num(1) | Bit::Text('1') => Ok(true),
            other => Err(Error::Parse(format!("not a bit: {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum Grid {
    Text(String),
    List(Vec<f64>),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    nodes: Option<Vec<String>>,
    edges: Option<Vec<(String, String)>>,
    source: Option<String>,
    sinks: Option<Vec<String>>,
    omega: Option<usize>,
    #[serde(rename = "A")]
    a: Vec<Vec<Bit>>,
    #[serde(rename = "K")]
    k: Option<Vec<Vec<String>>>,
    #[serde(rename = "B")]
    b: Option<BTreeMap<String, Vec<Vec<Bit>>>>,
    #[serde(rename = "F")]
    f: Option<BTreeMap<String, Vec<Vec<String>>>>,
    generator: Option<String>,
    output_generators: Option<BTreeMap<String, String>>,
    truncation_bound: Option<usize>,
    l: Option<usize>,
    mode: Option<String>,
    seed: Option<u64>,
    p: Option<Grid>,
    trials: Option<usize>,
    x_len: Option<usize>,
}

/// Optional run parameters stored next to the network.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunDefaults {
    pub l: Option<usize>,
    pub mode: Option<DecodeMode>,
    pub seed: Option<u64>,
    pub p: Option<Vec<f64>>,
    pub trials: Option<usize>,
    pub x_len: Option<usize>,
}

/// A parsed network file with its per-sink transfers resolved.
#[derive(Debug, Clone)]
pub struct NetworkConfig {
    pub spec: Option<NetworkSpec>,
    pub code: Option<NetworkCode>,
    pub a: BitMatrix,
    /// Sink names in file order.
    pub sinks: Vec<String>,
    pub transfers: BTreeMap<String, SinkTransfer>,
    pub generator: Option<Generator>,
    pub output_generators: BTreeMap<String, Generator>,
    pub defaults: RunDefaults,
}

fn bit_matrix(rows: &[Vec<Bit>]) -> Result<BitMatrix> {
    let rows = rows
        .iter()
        .map(|r| r.iter().map(|b| b.value()).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    BitMatrix::from_rows(&rows)
}

impl NetworkConfig {
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: RawConfig = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        Self::from_raw(raw)
    }

    fn from_raw(raw: RawConfig) -> Result<Self> {
        let a = bit_matrix(&raw.a)?;
        if let Some(omega) = raw.omega {
            if omega != a.rows() {
                return Err(Error::Validation(format!(
                    "omega={omega} but A has {} rows",
                    a.rows()
                )));
            }
        }
        let spec = match (&raw.nodes, &raw.edges, &raw.source) {
            (Some(nodes), Some(edges), Some(source)) => {
                let sinks = raw.sinks.clone().unwrap_or_default();
                let edges: Vec<(&str, &str)> = edges
                    .iter()
                    .map(|(u, v)| (u.as_str(), v.as_str()))
                    .collect();
                let nodes: Vec<&str> = nodes.iter().map(String::as_str).collect();
                let sinks: Vec<&str> = sinks.iter().map(String::as_str).collect();
                let spec = NetworkSpec::from_names(&nodes, &edges, source, &sinks)?;
                spec.validate()?;
                if spec.edge_count() != a.cols() {
                    return Err(Error::Validation(format!(
                        "network has {} edges but A has {} columns",
                        spec.edge_count(),
                        a.cols()
                    )));
                }
                Some(spec)
            }
            (None, None, None) => None,
            _ => {
                return Err(Error::Validation(
                    "\"nodes\", \"edges\" and \"source\" must be given together".into(),
                ))
            }
        };

        let bound = raw.truncation_bound.unwrap_or(DEFAULT_TRUNCATION_BOUND);
        let (code, per_sink): (Option<NetworkCode>, BTreeMap<String, Result<SinkTransfer>>) =
            match (raw.k, raw.b, raw.f) {
                (Some(k), Some(b), None) => {
                    let Some(spec) = &spec else {
                        return Err(Error::Validation(
                            "K/B description needs \"nodes\", \"edges\" and \"source\"".into(),
                        ));
                    };
                    let k = PolyMatrix::parse_rows(&k)?;
                    let b = b
                        .iter()
                        .map(|(s, m)| Ok((s.clone(), bit_matrix(m)?)))
                        .collect::<Result<BTreeMap<_, _>>>()?;
                    let code = NetworkCode::new(a.clone(), k, b)?;
                    code.check_topology(spec)?;
                    let transfers = code
                        .b
                        .keys()
                        .map(|s| (s.clone(), code.sink_transfer(s, bound)))
                        .collect();
                    (Some(code), transfers)
                }
                (None, None, Some(f)) => {
                    let transfers = f
                        .iter()
                        .map(|(s, rows)| {
                            let t = PolyMatrix::parse_rows(rows)
                                .and_then(|f| SinkTransfer::new(s, f, &a));
                            (s.clone(), t)
                        })
                        .collect();
                    (None, transfers)
                }
                _ => {
                    return Err(Error::Validation(
                        "exactly one of \"K\"+\"B\" or \"F\" must be present".into(),
                    ))
                }
            };

        let sinks: Vec<String> = match &raw.sinks {
            Some(s) => s.clone(),
            None => per_sink.keys().cloned().collect(),
        };
        if sinks.is_empty() {
            return Err(Error::Validation("network has no sinks".into()));
        }
        for s in &sinks {
            if !per_sink.contains_key(s) {
                return Err(Error::Validation(format!(
                    "no transfer given for sink `{s}`"
                )));
            }
        }
        if let Some(extra) = per_sink.keys().find(|s| !sinks.contains(s)) {
            return Err(Error::Validation(format!(
                "transfer given for unknown sink `{extra}`"
            )));
        }
        let mut transfers = BTreeMap::new();
        for (s, t) in per_sink {
            transfers.insert(s, t?);
        }

        let generator = raw.generator.as_deref().map(str::parse).transpose()?;
        let output_generators = raw
            .output_generators
            .unwrap_or_default()
            .into_iter()
            .map(|(s, g)| {
                if !sinks.contains(&s) {
                    return Err(Error::Validation(format!(
                        "output generator for unknown sink `{s}`"
                    )));
                }
                Ok((s, g.parse()?))
            })
            .collect::<Result<BTreeMap<_, _>>>()?;

        let defaults = RunDefaults {
            l: raw.l,
            mode: raw.mode.as_deref().map(str::parse).transpose()?,
            seed: raw.seed,
            p: match raw.p {
                Some(Grid::Text(s)) => Some(crate::errorsim::parse_p_grid(&s)?),
                Some(Grid::List(v)) => Some(v),
                None => None,
            },
            trials: raw.trials,
            x_len: raw.x_len,
        };

        Ok(Self {
            spec,
            code,
            a,
            sinks,
            transfers,
            generator,
            output_generators,
            defaults,
        })
    }

    pub fn omega(&self) -> usize {
        self.a.rows()
    }

    pub fn edge_count(&self) -> usize {
        self.a.cols()
    }

    pub fn transfer(&self, sink: &str) -> Result<&SinkTransfer> {
        self.transfers
            .get(sink)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown sink `{sink}`")))
    }

    /// `G_I M_t`, unless the file pins the output generator of `sink`.
    /// `input` overrides the file's input generator.
    pub fn output_generator(&self, sink: &str, input: Option<&Generator>) -> Result<Generator> {
        if input.is_none() {
            if let Some(g) = self.output_generators.get(sink) {
                return Ok(g.clone());
            }
        }
        let g = input.or(self.generator.as_ref()).ok_or_else(|| {
            Error::InvalidArgument(format!("no generator available for sink `{sink}`"))
        })?;
        g.times(self.transfer(sink)?.m())
    }

    /// Transfer, output generator and reference table of `sink` at window `l`.
    pub fn sink_setup(&self, sink: &str, l: usize, input: Option<&Generator>) -> Result<SinkSetup> {
        let transfer = self.transfer(sink)?.clone();
        let table = ReferenceTable::build(&transfer, l)?;
        Ok(SinkSetup {
            name: sink.to_string(),
            generator: self.output_generator(sink, input)?,
            transfer,
            table,
        })
    }
}
