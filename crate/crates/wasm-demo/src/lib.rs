use cnecc::config::NetworkConfig;
use cnecc::convcode::{free_distance, is_catastrophic, weight_profile as profile};
use cnecc::decoder::bits_to_string;
use cnecc::errorsim::{parse_p_grid, run_ber, BerConfig};
use cnecc::{decode, DecodeMode, DecoderConfig, Generator, ReferenceTable};
use serde::Serialize;
use wasm_bindgen::prelude::*;

const EXAMPLE1: &str = include_str!("../../core/fixtures/example1.json");
const BUTTERFLY: &str = include_str!("../../core/fixtures/butterfly.json");

/// Longest window the profile view accepts; the search is exponential in `l`.
const MAX_PROFILE_L: usize = 20;

#[derive(Serialize)]
struct Profile {
    generator: String,
    algebraic: String,
    d_free: Option<u32>,
    catastrophic: bool,
    profile: Vec<u32>,
}

#[derive(Serialize)]
struct TraceWindow {
    start: usize,
    end: usize,
    rows: Vec<String>,
}

#[derive(Serialize)]
struct EmissionView {
    start: usize,
    end: usize,
    bits: String,
}

#[derive(Serialize)]
struct TraceView {
    generator: String,
    decoded: String,
    weight: u32,
    emissions: Vec<EmissionView>,
    windows: Vec<TraceWindow>,
}

#[derive(Serialize)]
struct Point {
    p: f64,
    sink: String,
    ber: f64,
    undecodable: u64,
}

fn to_json<T: Serialize>(v: &T) -> Result<String, String> {
    serde_json::to_string(v).map_err(|e| e.to_string())
}

pub fn preset_json(name: &str) -> Result<String, String> {
    match name {
        "example1" => Ok(EXAMPLE1.to_string()),
        "butterfly" => Ok(BUTTERFLY.to_string()),
        _ => Err(format!("unknown preset {name:?}")),
    }
}

pub fn profile_json(generator: &str, l_max: usize) -> Result<String, String> {
    if l_max > MAX_PROFILE_L {
        return Err(format!("l_max is capped at {MAX_PROFILE_L}"));
    }
    let g: Generator = generator.parse().map_err(|e: cnecc::Error| e.to_string())?;
    to_json(&Profile {
        generator: g.to_string(),
        algebraic: g.to_algebraic(),
        d_free: free_distance(&g).ok(),
        catastrophic: is_catastrophic(&g),
        profile: profile(&g, l_max),
    })
}

pub fn trace_json(
    network: &str,
    sink: &str,
    words: &str,
    l: usize,
    mode: &str,
) -> Result<String, String> {
    let err = |e: cnecc::Error| e.to_string();
    let config = NetworkConfig::from_json(network).map_err(err)?;
    let g = config.output_generator(sink, None).map_err(err)?;
    let table = ReferenceTable::build(config.transfer(sink).map_err(err)?, l).map_err(err)?;
    let omega = g.outputs();
    let y = words
        .split_whitespace()
        .map(|w| match u64::from_str_radix(w, 2) {
            Ok(v) if w.len() == omega => Ok(v),
            _ => Err(format!("word {w:?} is not {omega} bits")),
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mode: DecodeMode = mode.parse().map_err(err)?;
    let r = decode(
        &y,
        &g,
        &table,
        &DecoderConfig::new(l).mode(mode).trace(true),
    )
    .map_err(err)?;
    to_json(&TraceView {
        generator: g.to_algebraic(),
        decoded: bits_to_string(&r.decoded_input),
        weight: r.total_weight,
        emissions: r
            .emissions
            .iter()
            .map(|e| EmissionView {
                start: e.window_start,
                end: e.window_end,
                bits: e.bit_string(),
            })
            .collect(),
        windows: r
            .trace
            .iter()
            .map(|w| TraceWindow {
                start: w.start,
                end: w.end,
                rows: w.rows.iter().map(ToString::to_string).collect(),
            })
            .collect(),
    })
}

pub fn ber_json(
    network: &str,
    p_grid: &str,
    l: usize,
    trials: usize,
    x_len: usize,
    seed: u64,
) -> Result<String, String> {
    let err = |e: cnecc::Error| e.to_string();
    let config = NetworkConfig::from_json(network).map_err(err)?;
    let sinks = config
        .sinks
        .iter()
        .map(|s| config.sink_setup(s, l, None))
        .collect::<Result<Vec<_>, _>>()
        .map_err(err)?;
    let cfg = BerConfig {
        l,
        p_grid: parse_p_grid(p_grid).map_err(err)?,
        trials,
        x_len,
        seed,
    };
    let report = run_ber(&sinks, &cfg).map_err(err)?;
    let points: Vec<Point> = report
        .rows
        .into_iter()
        .map(|r| Point {
            p: r.p,
            sink: r.sink,
            ber: r.ber,
            undecodable: r.undecodable_blocks,
        })
        .collect();
    to_json(&points)
}

#[wasm_bindgen]
pub fn preset(name: &str) -> Result<String, JsError> {
    preset_json(name).map_err(|e| JsError::new(&e))
}

/// Column distance profile `W(0..=l_max)` of a generator such as `"101 111"`.
#[wasm_bindgen]
pub fn weight_profile(generator: &str, l_max: usize) -> Result<String, JsError> {
    profile_json(generator, l_max).map_err(|e| JsError::new(&e))
}

/// Decodes received words (`"01 00 11 ..."`) at one sink and returns every window.
#[wasm_bindgen]
pub fn decode_trace(
    network: &str,
    sink: &str,
    words: &str,
    l: usize,
    mode: &str,
) -> Result<String, JsError> {
    trace_json(network, sink, words, l, mode).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn ber_curve(
    network: &str,
    p_grid: &str,
    l: usize,
    trials: usize,
    x_len: usize,
    seed: u64,
) -> Result<String, JsError> {
    ber_json(network, p_grid, l, trials, x_len, seed).map_err(|e| JsError::new(&e))
}
