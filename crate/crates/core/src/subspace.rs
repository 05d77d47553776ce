//! Combined error vectors and the two spaces a sink decoder must tell apart:
//! the reference table `Delta(t,l)` (error footprints with minimum-weight
//! preimages) and the window space `Phi(t,l)` (codeword windows).

use std::collections::{HashMap, HashSet};
use std::fmt;

use itertools::Itertools;
use serde::Serialize;

use crate::convcode::{free_distance, is_catastrophic, weight_profile, Generator};
use crate::error::{Error, Result};
use crate::netmodel::SinkTransfer;

/// Default limit on `|E|` for the weight-ordered table enumeration.
pub const DEFAULT_EDGE_CAP: usize = 24;

/// A run of `l+1` omega-bit words, the unit compared by the decoder.
///
/// Used both for combined error vectors `(E_0 ... E_l)` and codeword windows.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize)]
#[serde(transparent)]
pub struct Window(Vec<u64>);

impl Window {
    pub fn zeros(len: usize) -> Self {
        Self(vec![0; len])
    }

    pub fn from_words(words: Vec<u64>) -> Self {
        Self(words)
    }

    pub fn words(&self) -> &[u64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&w| w == 0)
    }

    pub fn first(&self) -> u64 {
        self.0.first().copied().unwrap_or(0)
    }

    pub fn weight(&self) -> u32 {
        self.0.iter().map(|w| w.count_ones()).sum()
    }

    pub fn xor(&self, other: &Window) -> Window {
        Window(self.0.iter().zip(&other.0).map(|(a, b)| a ^ b).collect())
    }

    /// The same window delayed by `d` instants, truncated to the original length.
    pub fn delayed(&self, d: usize) -> Window {
        let n = self.0.len();
        Window(
            (0..n)
                .map(|i| if i >= d { self.0[i - d] } else { 0 })
                .collect(),
        )
    }

    /// Drops the oldest word and appends `word`.
    pub fn slide(&mut self, word: u64) {
        self.0.rotate_left(1);
        if let Some(last) = self.0.last_mut() {
            *last = word;
        }
    }

    /// Decimal words, e.g. `3 1 0`.
    pub fn to_decimal(&self) -> String {
        self.0.iter().map(u64::to_string).join(" ")
    }

    /// Bit-string words, e.g. `11 01 00` for omega = 2.
    pub fn to_bits(&self, omega: usize) -> String {
        self.0
            .iter()
            .map(|w| format!("{:0width$b}", w, width = omega))
            .join(" ")
    }
}

impl fmt::Debug for Window {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Window({})", self.to_decimal())
    }
}

/// A `1 x |E|` GF(2) error vector; bit `i` of `mask` is edge `i`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ErrorVector {
    mask: u64,
    edges: usize,
}

impl ErrorVector {
    pub fn new(mask: u64, edges: usize) -> Self {
        debug_assert!(edges == 64 || mask >> edges == 0);
        Self { mask, edges }
    }

    pub fn zero(edges: usize) -> Self {
        Self { mask: 0, edges }
    }

    pub fn from_edges<I: IntoIterator<Item = usize>>(idx: I, edges: usize) -> Self {
        Self {
            mask: idx.into_iter().fold(0, |m, i| m | 1 << i),
            edges,
        }
    }

    /// Parses the textual form, edge 0 first, e.g. `10100`.
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() || s.len() > 64 {
            return Err(Error::Parse(format!("bad error vector {s:?}")));
        }
        let mut mask = 0;
        for (i, c) in s.chars().enumerate() {
            match c {
                '0' => {}
                '1' => mask |= 1 << i,
                _ => return Err(Error::Parse(format!("bad error vector digit {c:?}"))),
            }
        }
        Ok(Self {
            mask,
            edges: s.len(),
        })
    }

    pub fn mask(&self) -> u64 {
        self.mask
    }

    pub fn edges(&self) -> usize {
        self.edges
    }

    pub fn weight(&self) -> u32 {
        self.mask.count_ones()
    }

    pub fn is_zero(&self) -> bool {
        self.mask == 0
    }
}

impl fmt::Display for ErrorVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: String = (0..self.edges)
            .map(|i| if (self.mask >> i) & 1 == 1 { '1' } else { '0' })
            .collect();
        f.write_str(&s)
    }
}

impl fmt::Debug for ErrorVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({self})")
    }
}

/// The combined error vector `(eF_0, ..., eF_{l_t}, 0, ...)` over a window of `l+1` words.
pub fn combined_error(e: &ErrorVector, transfer: &SinkTransfer, l: usize) -> Result<Window> {
    if l < transfer.l_t() {
        return Err(Error::WindowTooShort {
            l,
            l_t: transfer.l_t(),
        });
    }
    if e.edges() != transfer.edge_count() {
        return Err(Error::InvalidArgument(format!(
            "error vector has {} components, network has {} edges",
            e.edges(),
            transfer.edge_count()
        )));
    }
    Ok(combined_error_unchecked(e.mask(), transfer, l + 1))
}

fn combined_error_unchecked(mask: u64, transfer: &SinkTransfer, len: usize) -> Window {
    let mut words = vec![0; len];
    let mut bits = mask;
    while bits != 0 {
        let edge = bits.trailing_zeros() as usize;
        bits &= bits - 1;
        for (i, w) in words.iter_mut().enumerate().take(transfer.l_t() + 1) {
            *w ^= transfer.edge_word(i, edge);
        }
    }
    Window(words)
}

/// Rank over GF(2) of a set of windows viewed as flat bit vectors.
fn gf2_rank(mut rows: Vec<Window>) -> usize {
    let Some(len) = rows.first().map(Window::len) else {
        return 0;
    };
    let mut rank = 0;
    for word in 0..len {
        for bit in (0..64).rev() {
            let mask = 1u64 << bit;
            let Some(p) = (rank..rows.len()).find(|&r| rows[r].0[word] & mask != 0) else {
                continue;
            };
            rows.swap(rank, p);
            let pivot = rows[rank].clone();
            for (r, row) in rows.iter_mut().enumerate() {
                if r != rank && row.0[word] & mask != 0 {
                    *row = row.xor(&pivot);
                }
            }
            rank += 1;
        }
    }
    rank
}

/// One reference table entry: the minimum weight over all preimage error vectors
/// and every preimage achieving it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TableEntry {
    pub weight: u32,
    pub preimages: Vec<ErrorVector>,
}

/// The subspace `Delta(t,l)` materialized as a lookup from combined error vector
/// to its minimum-weight preimages.
#[derive(Debug, Clone)]
pub struct ReferenceTable {
    omega: usize,
    l: usize,
    l_t: usize,
    edges: usize,
    rank: usize,
    entries: HashMap<Window, TableEntry>,
    /// Discovery order: nondecreasing weight, then first preimage in edge order.
    order: Vec<Window>,
    packed: PackedWeights,
}

/// Largest packed window (in bits) served by a flat array.
const DENSE_BITS: usize = 16;

/// Table weights keyed by [`pack`]ed windows, for the decoder's inner loop.
#[derive(Debug, Clone)]
enum PackedWeights {
    Dense(Vec<u32>),
    Sparse(HashMap<u128, u32>),
    /// The window does not fit in 128 bits.
    Unavailable,
}

impl PackedWeights {
    const ABSENT: u32 = u32::MAX;

    fn new(entries: &HashMap<Window, TableEntry>, omega: usize, len: usize) -> Self {
        let bits = omega * len;
        if bits > 128 {
            return Self::Unavailable;
        }
        if bits <= DENSE_BITS {
            let mut dense = vec![Self::ABSENT; 1 << bits];
            for (w, e) in entries {
                dense[pack(w.words(), omega) as usize] = e.weight;
            }
            Self::Dense(dense)
        } else {
            Self::Sparse(
                entries
                    .iter()
                    .map(|(w, e)| (pack(w.words(), omega), e.weight))
                    .collect(),
            )
        }
    }
}

/// Packs a window into one integer with the first word most significant.
/// Requires `omega * words.len() <= 128`.
pub fn pack(words: &[u64], omega: usize) -> u128 {
    words
        .iter()
        .fold(0u128, |acc, &w| (acc << omega) | w as u128)
}

/// Inverse of [`pack`].
pub fn unpack(key: u128, omega: usize, len: usize) -> Window {
    let mask = (1u128 << omega) - 1;
    Window(
        (0..len)
            .map(|i| ((key >> (omega * (len - 1 - i))) & mask) as u64)
            .collect(),
    )
}

impl ReferenceTable {
    pub fn build(transfer: &SinkTransfer, l: usize) -> Result<Self> {
        Self::build_with_cap(transfer, l, DEFAULT_EDGE_CAP)
    }

    /// Enumerates error vectors by nondecreasing Hamming weight. The first weight
    /// reaching a combined error vector is its table weight; all preimages of that
    /// weight are kept. Stops once the full span (`2^rank` vectors) has been reached
    /// and the current weight layer is exhausted.
    pub fn build_with_cap(transfer: &SinkTransfer, l: usize, edge_cap: usize) -> Result<Self> {
        let edges = transfer.edge_count();
        if edges > edge_cap {
            return Err(Error::TooLarge {
                edges,
                cap: edge_cap,
            });
        }
        if l < transfer.l_t() {
            return Err(Error::WindowTooShort {
                l,
                l_t: transfer.l_t(),
            });
        }
        let len = l + 1;
        let singles: Vec<Window> = (0..edges)
            .map(|e| combined_error_unchecked(1 << e, transfer, len))
            .collect();
        let rank = gf2_rank(singles.clone());
        let full = 1usize << rank;

        let mut entries: HashMap<Window, TableEntry> = HashMap::new();
        let mut order = Vec::new();
        for weight in 0..=edges {
            for combo in (0..edges).combinations(weight) {
                let window = combo
                    .iter()
                    .fold(Window::zeros(len), |acc, &e| acc.xor(&singles[e]));
                let ev = ErrorVector::from_edges(combo.iter().copied(), edges);
                match entries.get_mut(&window) {
                    Some(entry) if entry.weight == weight as u32 => entry.preimages.push(ev),
                    Some(_) => {}
                    None => {
                        order.push(window.clone());
                        entries.insert(
                            window,
                            TableEntry {
                                weight: weight as u32,
                                preimages: vec![ev],
                            },
                        );
                    }
                }
            }
            if entries.len() == full {
                break;
            }
        }
        let packed = PackedWeights::new(&entries, transfer.omega(), len);
        Ok(Self {
            omega: transfer.omega(),
            l,
            l_t: transfer.l_t(),
            edges,
            rank,
            entries,
            order,
            packed,
        })
    }

    /// The same table over a longer window (entries zero-padded).
    pub fn extended(&self, l: usize) -> Result<Self> {
        if l < self.l_t {
            return Err(Error::WindowTooShort { l, l_t: self.l_t });
        }
        let resize = |w: &Window| {
            let mut words = w.0.clone();
            words.resize(l + 1, 0);
            Window(words)
        };
        let entries: HashMap<Window, TableEntry> = self
            .entries
            .iter()
            .map(|(w, e)| (resize(w), e.clone()))
            .collect();
        Ok(Self {
            l,
            packed: PackedWeights::new(&entries, self.omega, l + 1),
            entries,
            order: self.order.iter().map(resize).collect(),
            ..self.clone()
        })
    }

    pub fn l(&self) -> usize {
        self.l
    }

    pub fn l_t(&self) -> usize {
        self.l_t
    }

    pub fn omega(&self) -> usize {
        self.omega
    }

    pub fn edge_count(&self) -> usize {
        self.edges
    }

    /// Dimension of the span of single-edge combined error vectors.
    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, window: &Window) -> Option<&TableEntry> {
        self.entries.get(window)
    }

    pub fn contains(&self, window: &Window) -> bool {
        self.entries.contains_key(window)
    }

    /// Whether [`ReferenceTable::packed_weight`] is available (`omega (l+1) <= 128`).
    pub fn supports_packed(&self) -> bool {
        !matches!(self.packed, PackedWeights::Unavailable)
    }

    /// Weight of the entry whose [`pack`]ed form is `key`.
    #[inline]
    pub fn packed_weight(&self, key: u128) -> Option<u32> {
        match &self.packed {
            PackedWeights::Dense(d) => d
                .get(key as usize)
                .copied()
                .filter(|&w| w != PackedWeights::ABSENT),
            PackedWeights::Sparse(m) => m.get(&key).copied(),
            PackedWeights::Unavailable => None,
        }
    }

    /// Entries in discovery order.
    pub fn iter(&self) -> impl Iterator<Item = (&Window, &TableEntry)> {
        self.order.iter().map(move |w| (w, &self.entries[w]))
    }

    pub fn nonzero(&self) -> impl Iterator<Item = &Window> {
        self.order.iter().filter(|w| !w.is_zero())
    }

    /// Text export: `E_0 E_1 ... E_l | weight | preimage;preimage;...` per line,
    /// words in decimal.
    pub fn to_text(&self) -> String {
        self.iter()
            .map(|(w, e)| {
                format!(
                    "{} | {} | {}\n",
                    w.to_decimal(),
                    e.weight,
                    e.preimages.iter().map(ToString::to_string).join(";")
                )
            })
            .collect()
    }
}

/// The window space `Phi(t,l)`: every codeword window over instants `[0,l]`.
#[derive(Debug, Clone)]
pub struct WindowSpace {
    l: usize,
    /// `(input, window)` with inputs in lexicographic order of `x_0 x_1 ... x_l`.
    elements: Vec<(Vec<bool>, Window)>,
    members: HashSet<Window>,
}

/// Largest window for which the window space is enumerated.
pub const MAX_SPACE_WINDOW: usize = 22;

impl WindowSpace {
    pub fn new(g: &Generator, l: usize) -> Result<Self> {
        if l > MAX_SPACE_WINDOW {
            return Err(Error::Unsupported(format!(
                "window space for l={l} exceeds l={MAX_SPACE_WINDOW}"
            )));
        }
        let trellis = g.trellis();
        let mut elements = Vec::with_capacity(1 << (l + 1));
        // Depth-first with input 0 explored before 1 yields lexicographic order.
        let mut stack = vec![(0usize, Vec::<bool>::new(), Vec::<u64>::new())];
        while let Some((state, input, words)) = stack.pop() {
            if input.len() == l + 1 {
                elements.push((input, Window(words)));
                continue;
            }
            for bit in [true, false] {
                let (ns, w) = trellis.step(state, bit);
                let mut i = input.clone();
                i.push(bit);
                let mut ws = words.clone();
                ws.push(w);
                stack.push((ns, i, ws));
            }
        }
        let members = elements.iter().map(|(_, w)| w.clone()).collect();
        Ok(Self {
            l,
            elements,
            members,
        })
    }

    pub fn l(&self) -> usize {
        self.l
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn contains(&self, w: &Window) -> bool {
        self.members.contains(w)
    }

    pub fn elements(&self) -> &[(Vec<bool>, Window)] {
        &self.elements
    }

    /// Distinct windows whose first word is nonzero.
    pub fn v0_nonzero(&self) -> Vec<&Window> {
        self.elements
            .iter()
            .map(|(_, w)| w)
            .filter(|w| w.first() != 0)
            .unique()
            .collect()
    }
}

/// Number of window-space elements with a nonzero first word.
pub fn element_count_v0_nonzero(g: &Generator, l: usize) -> Result<usize> {
    Ok(WindowSpace::new(g, l)?.v0_nonzero().len())
}

/// Nonzero windows lying in both `Phi(t,l)` and `Delta(t,l)`.
pub fn intersection(space: &WindowSpace, table: &ReferenceTable) -> Vec<Window> {
    table
        .nonzero()
        .filter(|w| space.contains(w))
        .cloned()
        .collect()
}

fn check_omega(g: &Generator, transfer: &SinkTransfer) -> Result<()> {
    if g.outputs() != transfer.omega() {
        return Err(Error::InvalidArgument(format!(
            "generator has {} outputs but the sink has omega={}",
            g.outputs(),
            transfer.omega()
        )));
    }
    Ok(())
}

/// Smallest `l` in `l_t..=l_cap` with `Phi(t,l) ∩ Delta(t,l) = {0}`.
pub fn min_window_length(g: &Generator, transfer: &SinkTransfer, l_cap: usize) -> Result<usize> {
    check_omega(g, transfer)?;
    let base = ReferenceTable::build(transfer, transfer.l_t())?;
    let mut blocking = None;
    for l in transfer.l_t()..=l_cap {
        let table = base.extended(l)?;
        let space = WindowSpace::new(g, l)?;
        match intersection(&space, &table).into_iter().next() {
            None => return Ok(l),
            Some(w) => blocking = Some((l, w)),
        }
    }
    Err(Error::NotFound {
        cap: l_cap,
        collision: blocking.map_or_else(
            || "none (l_cap below l_t)".to_string(),
            |(l, w)| format!("{} at l={l}", w.to_bits(g.outputs())),
        ),
    })
}

/// Two table entries, the second delayed by `shift`, whose sum is a codeword window
/// with a nonzero first word.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Collision {
    pub first: Window,
    pub second: Window,
    pub shift: usize,
    pub sum: Window,
}

/// Searches for a pair of nonzero table entries whose windowed sum (second entry
/// delayed by `0..=l` instants) equals a codeword window with `V_0 != 0`. Sums that
/// match codeword windows with `V_0 = 0` are resolved by error preposing and allowed.
pub fn distributed_collision(
    g: &Generator,
    transfer: &SinkTransfer,
    l: usize,
) -> Result<Option<Collision>> {
    check_omega(g, transfer)?;
    let table = ReferenceTable::build(transfer, l)?;
    let space = WindowSpace::new(g, l)?;
    if let Some(w) = intersection(&space, &table).first() {
        return Err(Error::InvalidState(format!(
            "window {} lies in both spaces at l={l}",
            w.to_bits(g.outputs())
        )));
    }
    let nonzero: Vec<&Window> = table.nonzero().collect();
    for a in &nonzero {
        for b in &nonzero {
            for shift in 0..=l {
                let sum = a.xor(&b.delayed(shift));
                if sum.first() != 0 && space.contains(&sum) {
                    return Ok(Some(Collision {
                        first: (*a).clone(),
                        second: (*b).clone(),
                        shift,
                        sum,
                    }));
                }
            }
        }
    }
    Ok(None)
}

/// True iff no sum of two (possibly time-shifted) combined error vectors is a
/// codeword window with a nonzero first word.
pub fn check_distributed(g: &Generator, transfer: &SinkTransfer, l: usize) -> Result<bool> {
    Ok(distributed_collision(g, transfer, l)?.is_none())
}

/// The free-distance sufficient condition for distributed decoding.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FreeDistanceCondition {
    pub catastrophic: bool,
    /// Absent when the free distance search hit its depth bound.
    pub d_free: Option<u32>,
    /// `2 omega (l_t + 1) + 1`.
    pub bound: u32,
    pub satisfied: bool,
    /// Smallest `l` with `W(l) >= bound`, searched up to the cap.
    pub l_gate: Option<usize>,
}

pub fn free_distance_condition(
    g: &Generator,
    transfer: &SinkTransfer,
    l_cap: usize,
) -> Result<FreeDistanceCondition> {
    check_omega(g, transfer)?;
    let catastrophic = is_catastrophic(g);
    let d_free = free_distance(g).ok();
    let bound = (2 * transfer.omega() * (transfer.l_t() + 1) + 1) as u32;
    let satisfied = !catastrophic && d_free.is_some_and(|d| d >= bound);
    let l_gate = if satisfied {
        weight_profile(g, l_cap).iter().position(|&w| w >= bound)
    } else {
        None
    };
    Ok(FreeDistanceCondition {
        catastrophic,
        d_free,
        bound,
        satisfied,
        l_gate,
    })
}

/// Everything the `analyze` command reports for one sink.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DecodabilityReport {
    pub l_min: Option<usize>,
    /// `(l, distributed)` for `l` in `l_min..=l_min+extra`.
    pub distributed: Vec<(usize, bool)>,
    pub condition: FreeDistanceCondition,
}

pub fn decodability_report(
    g: &Generator,
    transfer: &SinkTransfer,
    l_cap: usize,
    extra: usize,
) -> Result<DecodabilityReport> {
    let l_min = match min_window_length(g, transfer, l_cap) {
        Ok(l) => Some(l),
        Err(Error::NotFound { .. }) => None,
        Err(e) => return Err(e),
    };
    let distributed = match l_min {
        Some(l0) => (l0..=(l0 + extra).min(MAX_SPACE_WINDOW))
            .map(|l| Ok((l, check_distributed(g, transfer, l)?)))
            .collect::<Result<Vec<_>>>()?,
        None => Vec::new(),
    };
    Ok(DecodabilityReport {
        l_min,
        distributed,
        condition: free_distance_condition(g, transfer, l_cap)?,
    })
}
