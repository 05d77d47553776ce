//! Rate-1/c convolutional encoders in controller canonical form, their trellis,
//! and code metrics: free distance, `T_dfree`, the windowed weight profile and
//! catastrophicity.

use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::gf2poly::{Gf2Poly, PolyMatrix};

/// Largest supported encoder memory; the trellis is tabulated eagerly.
pub const MAX_MEMORY: usize = 16;

/// Generator row `[g_1(z) ... g_c(z)]` of a rate-1/c code, with its trellis.
///
/// Output words pack component 0 in the most significant of the `c` bits, so the
/// word `01` reads as decimal 1.
#[derive(Clone, PartialEq, Eq)]
pub struct Generator {
    polys: Vec<Gf2Poly>,
    memory: usize,
    /// `slices[j]` is the coefficient of `z^j` across all components.
    slices: Vec<u64>,
    trellis: Trellis,
}

impl Generator {
    pub fn new(polys: Vec<Gf2Poly>) -> Result<Self> {
        if polys.is_empty() {
            return Err(Error::InvalidArgument(
                "generator needs at least one polynomial".into(),
            ));
        }
        if polys.len() > 64 {
            return Err(Error::Unsupported("more than 64 output components".into()));
        }
        let Some(memory) = polys.iter().filter_map(Gf2Poly::degree).max() else {
            return Err(Error::InvalidArgument(
                "generator polynomials are all zero".into(),
            ));
        };
        if memory > MAX_MEMORY {
            return Err(Error::Unsupported(format!(
                "encoder memory {memory} exceeds {MAX_MEMORY}"
            )));
        }
        let slices: Vec<u64> = (0..=memory)
            .map(|j| {
                polys
                    .iter()
                    .fold(0, |acc, p| (acc << 1) | p.coeff(j) as u64)
            })
            .collect();
        let trellis = Trellis::build(memory, &slices);
        Ok(Self {
            polys,
            memory,
            slices,
            trellis,
        })
    }

    /// Builds from a `1 x c` polynomial matrix.
    pub fn from_row(row: &PolyMatrix) -> Result<Self> {
        if row.rows() != 1 {
            return Err(Error::InvalidArgument(format!(
                "generator must be a single row, got {} rows",
                row.rows()
            )));
        }
        Self::new(row.row(0).to_vec())
    }

    pub fn polys(&self) -> &[Gf2Poly] {
        &self.polys
    }

    /// Number of output components `c` (equal to omega at a sink).
    pub fn outputs(&self) -> usize {
        self.polys.len()
    }

    pub fn memory(&self) -> usize {
        self.memory
    }

    pub fn slice_word(&self, j: usize) -> u64 {
        self.slices.get(j).copied().unwrap_or(0)
    }

    pub fn as_row(&self) -> PolyMatrix {
        PolyMatrix::from_rows(vec![self.polys.clone()]).expect("nonempty row")
    }

    pub fn trellis(&self) -> &Trellis {
        &self.trellis
    }

    /// `G(z) M(z)` for a square transfer matrix `M`.
    pub fn times(&self, m: &PolyMatrix) -> Result<Generator> {
        Generator::from_row(&self.as_row().mul(m)?)
    }

    pub fn to_algebraic(&self) -> String {
        let terms: Vec<String> = self.polys.iter().map(Gf2Poly::to_algebraic).collect();
        format!("[{}]", terms.join(", "))
    }
}

impl FromStr for Generator {
    type Err = Error;

    /// Whitespace-separated ascending-power bit strings, e.g. `"101 00101"`.
    fn from_str(s: &str) -> Result<Self> {
        let polys = s
            .split_whitespace()
            .map(str::parse)
            .collect::<Result<Vec<Gf2Poly>>>()?;
        Self::new(polys)
    }
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.polys.iter().map(ToString::to_string).collect();
        f.write_str(&parts.join(" "))
    }
}

impl fmt::Debug for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Generator({})", self.to_algebraic())
    }
}

/// Tabulated state machine of the encoder.
///
/// The state after instant `t` holds `x_t, x_{t-1}, ..., x_{t-m+1}` with the newest
/// input in the most significant bit.
#[derive(Clone, PartialEq, Eq)]
pub struct Trellis {
    memory: usize,
    /// `next[2 * state + bit]` and `output[2 * state + bit]`.
    next: Vec<u32>,
    output: Vec<u64>,
}

impl Trellis {
    fn build(memory: usize, slices: &[u64]) -> Self {
        let states = 1usize << memory;
        let mut next = Vec::with_capacity(2 * states);
        let mut output = Vec::with_capacity(2 * states);
        for state in 0..states {
            let mut past = 0;
            for (j, slice) in slices.iter().enumerate().skip(1) {
                if (state >> (memory - j)) & 1 == 1 {
                    past ^= slice;
                }
            }
            for bit in 0..2usize {
                let word = if bit == 1 { past ^ slices[0] } else { past };
                let ns = if memory == 0 {
                    0
                } else {
                    (bit << (memory - 1)) | (state >> 1)
                };
                next.push(ns as u32);
                output.push(word);
            }
        }
        Self {
            memory,
            next,
            output,
        }
    }

    pub fn state_count(&self) -> usize {
        1 << self.memory
    }

    pub fn memory(&self) -> usize {
        self.memory
    }

    /// `(next state, output word)` for feeding `bit` in `state`.
    #[inline]
    pub fn step(&self, state: usize, bit: bool) -> (usize, u64) {
        let i = 2 * state + bit as usize;
        (self.next[i] as usize, self.output[i])
    }
}

/// Free distance, `T_dfree` and catastrophicity of one generator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CodeMetrics {
    pub d_free: u32,
    /// Absent for catastrophic generators.
    pub t_dfree: Option<usize>,
    pub catastrophic: bool,
}

impl CodeMetrics {
    pub fn of(g: &Generator) -> Result<Self> {
        let catastrophic = is_catastrophic(g);
        Ok(Self {
            d_free: free_distance(g)?,
            t_dfree: if catastrophic {
                None
            } else {
                Some(t_dfree(g)?)
            },
            catastrophic,
        })
    }
}

/// Encodes `x` from the zero state, one output word per instant. With `flush` set,
/// `m` zero inputs are appended so the whole product `X(z) G(z)` is emitted.
pub fn encode(g: &Generator, x: &[bool], flush: bool) -> Vec<u64> {
    let tail = if flush { g.memory() } else { 0 };
    let trellis = g.trellis();
    let mut state = 0;
    x.iter()
        .copied()
        .chain(std::iter::repeat_n(false, tail))
        .map(|bit| {
            let (ns, word) = trellis.step(state, bit);
            state = ns;
            word
        })
        .collect()
}

/// Default depth bound of the free distance search.
pub fn default_depth_bound(g: &Generator) -> usize {
    10 * (g.memory() + 1)
}

/// Minimum weight over codewords leaving and re-entering the zero state.
pub fn free_distance(g: &Generator) -> Result<u32> {
    free_distance_bounded(g, default_depth_bound(g))
}

/// Least-weight-first search over the trellis with a per-state best-weight memo.
pub fn free_distance_bounded(g: &Generator, depth_bound: usize) -> Result<u32> {
    let trellis = g.trellis();
    let (start, word) = trellis.step(0, true);
    let mut best = vec![u32::MAX; trellis.state_count()];
    let mut heap = BinaryHeap::new();
    heap.push(Reverse((word.count_ones(), 1usize, start)));
    while let Some(Reverse((weight, depth, state))) = heap.pop() {
        if state == 0 {
            return Ok(weight);
        }
        if weight > best[state] {
            continue;
        }
        if depth > depth_bound {
            return Err(Error::DepthExceeded { depth: depth_bound });
        }
        for bit in [false, true] {
            let (ns, w) = trellis.step(state, bit);
            let nw = weight + w.count_ones();
            if nw < best[ns] {
                best[ns] = nw;
                heap.push(Reverse((nw, depth + 1, ns)));
            }
        }
    }
    Err(Error::DepthExceeded { depth: depth_bound })
}

/// Catastrophic iff the gcd of the generator polynomials is not a power of `z`.
pub fn is_catastrophic(g: &Generator) -> bool {
    let gcd = g
        .polys()
        .iter()
        .filter(|p| !p.is_zero())
        .try_fold(Gf2Poly::zero(), |acc, p| acc.gcd(p))
        .expect("generator is nonzero");
    gcd.weight() != 1
}

/// `T_dfree`: one plus the longest prefix length `j` whose output weight stays below
/// `d_free` while the state is nonzero at every instant `1..=j`.
pub fn t_dfree(g: &Generator) -> Result<usize> {
    if is_catastrophic(g) {
        return Err(Error::Unsupported(
            "T_dfree of a catastrophic generator".into(),
        ));
    }
    let d_free = free_distance(g)?;
    let trellis = g.trellis();
    let depth_guard = 64 * (g.memory() + 1) * d_free as usize;
    let mut longest = 0;
    // Explicit stack of (state, weight, prefix length).
    let mut stack = vec![(0usize, 0u32, 0usize)];
    while let Some((state, weight, j)) = stack.pop() {
        longest = longest.max(j);
        if j >= depth_guard {
            return Err(Error::DepthExceeded { depth: depth_guard });
        }
        for bit in [false, true] {
            let (ns, w) = trellis.step(state, bit);
            let nw = weight + w.count_ones();
            if ns != 0 && nw < d_free {
                stack.push((ns, nw, j + 1));
            }
        }
    }
    Ok(longest + 1)
}

/// `W(l)` for `l = 0..=l_max`: minimum weight of the first `l+1` output words over
/// inputs starting in the zero state with `x_0 = 1`.
pub fn weight_profile(g: &Generator, l_max: usize) -> Vec<u32> {
    let trellis = g.trellis();
    let n = trellis.state_count();
    let mut dist = vec![u32::MAX; n];
    let (s0, w0) = trellis.step(0, true);
    dist[s0] = w0.count_ones();
    let mut profile = vec![w0.count_ones()];
    for _ in 0..l_max {
        let mut next = vec![u32::MAX; n];
        for (state, &d) in dist.iter().enumerate().filter(|(_, &d)| d != u32::MAX) {
            for bit in [false, true] {
                let (ns, w) = trellis.step(state, bit);
                next[ns] = next[ns].min(d + w.count_ones());
            }
        }
        profile.push(*next.iter().min().expect("at least one state"));
        dist = next;
    }
    profile
}
