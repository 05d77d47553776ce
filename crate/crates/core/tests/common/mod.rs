#![allow(dead_code)]

use std::path::PathBuf;

use cnecc::config::NetworkConfig;
use cnecc::convcode::encode;
use cnecc::subspace::{ErrorVector, ReferenceTable, Window};
use cnecc::{BitMatrix, Generator, PolyMatrix, SinkTransfer};
use rand::Rng;

pub fn fixture(name: &str) -> NetworkConfig {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(name);
    NetworkConfig::from_path(&path).unwrap()
}

pub fn words(s: &str) -> Vec<u64> {
    s.split_whitespace()
        .map(|w| u64::from_str_radix(w, 2).unwrap())
        .collect()
}

pub fn bits(s: &str) -> Vec<bool> {
    s.chars().map(|c| c == '1').collect()
}

/// A small random sink: transfer, generator, window and input length.
pub struct Instance {
    pub transfer: SinkTransfer,
    pub g: Generator,
    pub l: usize,
    pub table: ReferenceTable,
    pub x: Vec<bool>,
    pub y: Vec<u64>,
}

pub fn random_transfer<R: Rng>(
    rng: &mut R,
    omega: usize,
    edges: usize,
    l_t: usize,
) -> SinkTransfer {
    loop {
        let rows: Vec<Vec<String>> = (0..edges)
            .map(|_| {
                (0..omega)
                    .map(|_| {
                        (0..=l_t)
                            .map(|_| if rng.gen() { '1' } else { '0' })
                            .collect()
                    })
                    .collect()
            })
            .collect();
        let f = PolyMatrix::parse_rows(&rows).unwrap();
        if f.degree() != Some(l_t) {
            continue;
        }
        let a = BitMatrix::zeros(omega, edges);
        return SinkTransfer::without_rank_check("t", f, &a).unwrap();
    }
}

pub fn random_generator<R: Rng>(rng: &mut R, omega: usize) -> Generator {
    let polys: Vec<String> = (0..omega)
        .map(|c| {
            let len = rng.gen_range(1..=4);
            (0..len)
                .map(|i| {
                    if (c == 0 && i == 0) || rng.gen() {
                        '1'
                    } else {
                        '0'
                    }
                })
                .collect()
        })
        .collect();
    polys.join(" ").parse().unwrap()
}

/// Errors placed at least `l+1` instants apart, each with a nonzero first word
/// at the sink, only at instants before `x_len`.
pub fn separated_errors<R: Rng>(
    rng: &mut R,
    transfer: &SinkTransfer,
    l: usize,
    x_len: usize,
) -> Vec<ErrorVector> {
    let edges = transfer.edge_count();
    let mut errors = vec![ErrorVector::zero(edges); x_len];
    let mut t = rng.gen_range(0..=l);
    while t < x_len {
        let e = ErrorVector::new(rng.gen_range(1..(1u64 << edges)), edges);
        let w = cnecc::subspace::combined_error(&e, transfer, l).unwrap();
        if w.first() != 0 {
            errors[t] = e;
            t += l + 1 + rng.gen_range(0..=2);
        } else if rng.gen_bool(0.3) {
            t += 1;
        }
    }
    errors
}

pub fn random_instance<R: Rng>(rng: &mut R) -> Instance {
    let omega = rng.gen_range(1..=2);
    let edges = rng.gen_range(1..=6);
    let l_t = rng.gen_range(0..=1);
    let transfer = random_transfer(rng, omega, edges, l_t);
    let l = rng.gen_range(l_t..=3);
    let g = random_generator(rng, omega);
    let x_len = rng.gen_range(1..=8);
    let x: Vec<bool> = (0..x_len).map(|_| rng.gen()).collect();
    let errors = separated_errors(rng, &transfer, l, x_len);
    let y_len = cnecc::expected_rx_length(x_len, &g, l);
    let y = cnecc::errorsim::transmit(&g, &transfer, &x, &errors, y_len);
    let table = ReferenceTable::build(&transfer, l).unwrap();
    Instance {
        transfer,
        g,
        l,
        table,
        x,
        y,
    }
}

/// Minimum total weight over all inputs and all placements of table entries
/// (first word nonzero, non-overlapping) that explain `y`.
pub fn oracle_weight(
    y: &[u64],
    g: &Generator,
    table: &ReferenceTable,
    x_len: usize,
) -> Option<u32> {
    let l = table.l();
    let n = y.len();
    let mut best: Option<u32> = None;
    for v in 0..(1u32 << x_len) {
        let x: Vec<bool> = (0..x_len).map(|i| (v >> i) & 1 == 1).collect();
        let mut c = encode(g, &x, true);
        c.resize(n, 0);
        let mut r: Vec<u64> = y.iter().zip(&c).map(|(a, b)| a ^ b).collect();
        let mut weight = 0;
        let mut a = 0;
        let ok = loop {
            while a < n && r[a] == 0 {
                a += 1;
            }
            if a == n {
                break true;
            }
            if a + l >= n {
                break false;
            }
            let w = Window::from_words(r[a..=a + l].to_vec());
            match table.get(&w) {
                Some(entry) => {
                    weight += entry.weight;
                    r[a..=a + l].fill(0);
                    a += l + 1;
                }
                None => break false,
            }
        };
        if ok && best.is_none_or(|b| weight < b) {
            best = Some(weight);
        }
    }
    best
}
