//! Polynomials and polynomial matrices over GF(2).
//!
//! Textual polynomials are ascending-power bit strings: `"1011"` is `1 + z^2 + z^3`.
//! Everything here is an immutable value type; operators allocate new values.

use std::fmt;
use std::ops::{Add, AddAssign, Mul};
use std::str::FromStr;

use crate::error::{Error, Result};

/// A polynomial in `z` with GF(2) coefficients, bit-packed into `u64` words.
///
/// Bit `i % 64` of word `i / 64` is the coefficient of `z^i`. The top word is
/// always nonzero, so the zero polynomial has no words and equality is structural.
#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Gf2Poly {
    words: Vec<u64>,
}

impl Gf2Poly {
    pub fn zero() -> Self {
        Self { words: Vec::new() }
    }

    pub fn one() -> Self {
        Self { words: vec![1] }
    }

    /// `z^k`.
    pub fn monomial(k: usize) -> Self {
        let mut words = vec![0; k / 64 + 1];
        words[k / 64] = 1 << (k % 64);
        Self { words }
    }

    fn from_words(mut words: Vec<u64>) -> Self {
        while words.last() == Some(&0) {
            words.pop();
        }
        Self { words }
    }

    /// Builds a polynomial from coefficients in ascending order.
    pub fn from_coeffs<I: IntoIterator<Item = bool>>(coeffs: I) -> Self {
        let mut words = Vec::new();
        for (i, c) in coeffs.into_iter().enumerate() {
            if i / 64 >= words.len() {
                words.push(0);
            }
            if c {
                words[i / 64] |= 1 << (i % 64);
            }
        }
        Self::from_words(words)
    }

    /// Polynomial whose coefficient of `z^i` is bit `i` of `bits`.
    pub fn from_u64(bits: u64) -> Self {
        Self::from_words(vec![bits])
    }

    pub fn is_zero(&self) -> bool {
        self.words.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.words == [1]
    }

    /// Degree, or `None` for the zero polynomial (degree minus infinity).
    pub fn degree(&self) -> Option<usize> {
        let top = *self.words.last()?;
        Some((self.words.len() - 1) * 64 + 63 - top.leading_zeros() as usize)
    }

    pub fn coeff(&self, i: usize) -> bool {
        self.words
            .get(i / 64)
            .is_some_and(|w| (w >> (i % 64)) & 1 == 1)
    }

    /// Number of nonzero coefficients.
    pub fn weight(&self) -> u32 {
        self.words.iter().map(|w| w.count_ones()).sum()
    }

    /// Coefficients in ascending order, `degree + 1` of them (empty for zero).
    pub fn coeffs(&self) -> Vec<bool> {
        match self.degree() {
            None => Vec::new(),
            Some(d) => (0..=d).map(|i| self.coeff(i)).collect(),
        }
    }

    /// Multiplication by `z^k`.
    pub fn shifted(&self, k: usize) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        let (ws, bs) = (k / 64, k % 64);
        let mut words = vec![0u64; self.words.len() + ws + 1];
        for (i, &w) in self.words.iter().enumerate() {
            words[i + ws] ^= w << bs;
            if bs != 0 {
                words[i + ws + 1] ^= w >> (64 - bs);
            }
        }
        Self::from_words(words)
    }

    /// Remainder modulo `z^n`.
    pub fn truncated(&self, n: usize) -> Self {
        let mut words: Vec<u64> = self.words.iter().take(n.div_ceil(64)).copied().collect();
        if !n.is_multiple_of(64) {
            if let Some(w) = words.get_mut(n / 64) {
                *w &= (1u64 << (n % 64)) - 1;
            }
        }
        Self::from_words(words)
    }

    fn xor_shifted_in_place(words: &mut Vec<u64>, other: &[u64], k: usize) {
        let (ws, bs) = (k / 64, k % 64);
        let need = other.len() + ws + 1;
        if words.len() < need {
            words.resize(need, 0);
        }
        for (i, &w) in other.iter().enumerate() {
            words[i + ws] ^= w << bs;
            if bs != 0 {
                words[i + ws + 1] ^= w >> (64 - bs);
            }
        }
    }

    /// Euclidean division: returns `(quotient, remainder)`.
    pub fn div_rem(&self, divisor: &Gf2Poly) -> Result<(Gf2Poly, Gf2Poly)> {
        let dd = divisor
            .degree()
            .ok_or_else(|| Error::InvalidArgument("division by the zero polynomial".into()))?;
        let mut rem = self.words.clone();
        let mut quot = Vec::new();
        loop {
            while rem.last() == Some(&0) {
                rem.pop();
            }
            let Some(&top) = rem.last() else { break };
            let rd = (rem.len() - 1) * 64 + 63 - top.leading_zeros() as usize;
            if rd < dd {
                break;
            }
            let shift = rd - dd;
            if quot.len() <= shift / 64 {
                quot.resize(shift / 64 + 1, 0);
            }
            quot[shift / 64] |= 1 << (shift % 64);
            Self::xor_shifted_in_place(&mut rem, &divisor.words, shift);
        }
        Ok((Self::from_words(quot), Self::from_words(rem)))
    }

    /// Greatest common divisor. Over GF(2) every nonzero result is already monic.
    pub fn gcd(&self, other: &Gf2Poly) -> Result<Gf2Poly> {
        if self.is_zero() && other.is_zero() {
            return Err(Error::InvalidArgument("gcd(0, 0) is undefined".into()));
        }
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let (_, r) = a.div_rem(&b)?;
            a = b;
            b = r;
        }
        Ok(a)
    }

    /// Conventional algebraic rendering, e.g. `1+z^2+z^3`.
    pub fn to_algebraic(&self) -> String {
        let terms: Vec<String> = self
            .coeffs()
            .iter()
            .enumerate()
            .filter(|(_, &c)| c)
            .map(|(i, _)| match i {
                0 => "1".to_string(),
                1 => "z".to_string(),
                _ => format!("z^{i}"),
            })
            .collect();
        if terms.is_empty() {
            "0".into()
        } else {
            terms.join("+")
        }
    }
}

impl FromStr for Gf2Poly {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() {
            return Err(Error::Parse("empty polynomial string".into()));
        }
        let coeffs = s
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(Error::Parse(format!("bad polynomial digit {c:?} in {s:?}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::from_coeffs(coeffs))
    }
}

impl fmt::Display for Gf2Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let s: String = self
            .coeffs()
            .iter()
            .map(|&c| if c { '1' } else { '0' })
            .collect();
        f.write_str(&s)
    }
}

impl fmt::Debug for Gf2Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Gf2Poly({self})")
    }
}

impl Add for &Gf2Poly {
    type Output = Gf2Poly;

    fn add(self, rhs: &Gf2Poly) -> Gf2Poly {
        let (long, short) = if self.words.len() >= rhs.words.len() {
            (self, rhs)
        } else {
            (rhs, self)
        };
        let mut words = long.words.clone();
        for (w, s) in words.iter_mut().zip(&short.words) {
            *w ^= s;
        }
        Gf2Poly::from_words(words)
    }
}

impl Add for Gf2Poly {
    type Output = Gf2Poly;

    fn add(self, rhs: Gf2Poly) -> Gf2Poly {
        &self + &rhs
    }
}

impl AddAssign<&Gf2Poly> for Gf2Poly {
    fn add_assign(&mut self, rhs: &Gf2Poly) {
        if self.words.len() < rhs.words.len() {
            self.words.resize(rhs.words.len(), 0);
        }
        for (w, r) in self.words.iter_mut().zip(&rhs.words) {
            *w ^= r;
        }
        while self.words.last() == Some(&0) {
            self.words.pop();
        }
    }
}

impl Mul for &Gf2Poly {
    type Output = Gf2Poly;

    fn mul(self, rhs: &Gf2Poly) -> Gf2Poly {
        if self.is_zero() || rhs.is_zero() {
            return Gf2Poly::zero();
        }
        let mut words = vec![0u64; self.words.len() + rhs.words.len() + 1];
        for (wi, &w) in self.words.iter().enumerate() {
            let mut bits = w;
            while bits != 0 {
                let b = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                Gf2Poly::xor_shifted_in_place(&mut words, &rhs.words, wi * 64 + b);
            }
        }
        Gf2Poly::from_words(words)
    }
}

impl Mul for Gf2Poly {
    type Output = Gf2Poly;

    fn mul(self, rhs: Gf2Poly) -> Gf2Poly {
        &self * &rhs
    }
}

/// A dense matrix over GF(2). Used for `A`, `B^t` and coefficient slices.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitMatrix {
    rows: usize,
    cols: usize,
    bits: Vec<bool>,
}

impl BitMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            bits: vec![false; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, true);
        }
        m
    }

    pub fn from_rows(rows: &[Vec<bool>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if r == 0 || c == 0 {
            return Err(Error::InvalidArgument(
                "bit matrix must have positive dimensions".into(),
            ));
        }
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::InvalidArgument("ragged bit matrix rows".into()));
        }
        Ok(Self {
            rows: r,
            cols: c,
            bits: rows.concat(),
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> bool {
        self.bits[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: bool) {
        self.bits[r * self.cols + c] = v;
    }

    pub fn is_zero(&self) -> bool {
        self.bits.iter().all(|b| !b)
    }

    /// Row `r` packed into a word, column 0 in the most significant position.
    pub fn row_word(&self, r: usize) -> u64 {
        (0..self.cols).fold(0, |acc, c| (acc << 1) | self.get(r, c) as u64)
    }

    pub fn mul(&self, rhs: &BitMatrix) -> Result<BitMatrix> {
        if self.cols != rhs.rows {
            return Err(Error::InvalidArgument(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut out = BitMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in (0..self.cols).filter(|&k| self.get(i, k)) {
                for j in 0..rhs.cols {
                    if rhs.get(k, j) {
                        let v = out.get(i, j);
                        out.set(i, j, !v);
                    }
                }
            }
        }
        Ok(out)
    }

    fn xor_assign(&mut self, rhs: &BitMatrix) {
        for (a, b) in self.bits.iter_mut().zip(&rhs.bits) {
            *a ^= b;
        }
    }

    /// Inverse by Gauss-Jordan elimination.
    pub fn inverse(&self) -> Result<BitMatrix> {
        if self.rows != self.cols {
            return Err(Error::InvalidArgument(
                "only square matrices are invertible".into(),
            ));
        }
        let n = self.rows;
        let mut a = self.clone();
        let mut inv = BitMatrix::identity(n);
        for col in 0..n {
            let pivot = (col..n)
                .find(|&r| a.get(r, col))
                .ok_or(Error::NotInvertible)?;
            if pivot != col {
                for c in 0..n {
                    a.bits.swap(pivot * n + c, col * n + c);
                    inv.bits.swap(pivot * n + c, col * n + c);
                }
            }
            for r in 0..n {
                if r != col && a.get(r, col) {
                    for c in 0..n {
                        let (ap, ip) = (a.get(col, c), inv.get(col, c));
                        a.bits[r * n + c] ^= ap;
                        inv.bits[r * n + c] ^= ip;
                    }
                }
            }
        }
        Ok(inv)
    }
}

impl fmt::Debug for BitMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<String> = (0..self.rows)
            .map(|r| {
                (0..self.cols)
                    .map(|c| if self.get(r, c) { '1' } else { '0' })
                    .collect()
            })
            .collect();
        write!(f, "BitMatrix[{}]", rows.join(" "))
    }
}

/// A dense matrix of [`Gf2Poly`] entries, stored row-major.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PolyMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<Gf2Poly>,
}

impl PolyMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            entries: vec![Gf2Poly::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Gf2Poly::one());
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Gf2Poly>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if r == 0 || c == 0 {
            return Err(Error::InvalidArgument(
                "polynomial matrix must have positive dimensions".into(),
            ));
        }
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::InvalidArgument(
                "ragged polynomial matrix rows".into(),
            ));
        }
        Ok(Self {
            rows: r,
            cols: c,
            entries: rows.into_iter().flatten().collect(),
        })
    }

    /// Parses rows of ascending-power bit strings.
    pub fn parse_rows<S: AsRef<str>>(rows: &[Vec<S>]) -> Result<Self> {
        let parsed = rows
            .iter()
            .map(|row| {
                row.iter()
                    .map(|s| s.as_ref().parse())
                    .collect::<Result<Vec<Gf2Poly>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_rows(parsed)
    }

    pub fn from_bit_matrix(m: &BitMatrix) -> Self {
        let mut out = Self::zeros(m.rows(), m.cols());
        for r in 0..m.rows() {
            for c in 0..m.cols() {
                if m.get(r, c) {
                    out.set(r, c, Gf2Poly::one());
                }
            }
        }
        out
    }

    /// Reassembles `sum_i slices[i] * z^i`.
    pub fn from_slices(slices: &[BitMatrix]) -> Result<Self> {
        let first = slices
            .first()
            .ok_or_else(|| Error::InvalidArgument("no coefficient slices".into()))?;
        let (rows, cols) = (first.rows(), first.cols());
        if slices.iter().any(|s| s.rows() != rows || s.cols() != cols) {
            return Err(Error::InvalidArgument(
                "coefficient slices differ in shape".into(),
            ));
        }
        let mut out = Self::zeros(rows, cols);
        for r in 0..rows {
            for c in 0..cols {
                out.set(
                    r,
                    c,
                    Gf2Poly::from_coeffs(slices.iter().map(|s| s.get(r, c))),
                );
            }
        }
        Ok(out)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> &Gf2Poly {
        &self.entries[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, p: Gf2Poly) {
        self.entries[r * self.cols + c] = p;
    }

    pub fn row(&self, r: usize) -> &[Gf2Poly] {
        &self.entries[r * self.cols..(r + 1) * self.cols]
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(Gf2Poly::is_zero)
    }

    /// Maximum entry degree; `None` for the zero matrix.
    pub fn degree(&self) -> Option<usize> {
        self.entries.iter().filter_map(Gf2Poly::degree).max()
    }

    /// The GF(2) matrix of coefficients of `z^i`.
    pub fn coefficient_slice(&self, i: usize) -> BitMatrix {
        let mut out = BitMatrix::zeros(self.rows, self.cols);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.set(r, c, self.get(r, c).coeff(i));
            }
        }
        out
    }

    /// Slices `0..=degree` (a single zero slice for the zero matrix).
    pub fn slices(&self) -> Vec<BitMatrix> {
        (0..=self.degree().unwrap_or(0))
            .map(|i| self.coefficient_slice(i))
            .collect()
    }

    pub fn transpose(&self) -> PolyMatrix {
        let mut out = Self::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.set(c, r, self.get(r, c).clone());
            }
        }
        out
    }

    pub fn mul(&self, rhs: &PolyMatrix) -> Result<PolyMatrix> {
        if self.cols != rhs.rows {
            return Err(Error::InvalidArgument(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for j in 0..rhs.cols {
                let mut acc = Gf2Poly::zero();
                for k in 0..self.cols {
                    let (a, b) = (self.get(i, k), rhs.get(k, j));
                    if !a.is_zero() && !b.is_zero() {
                        acc += &(a * b);
                    }
                }
                out.set(i, j, acc);
            }
        }
        Ok(out)
    }

    pub fn add(&self, rhs: &PolyMatrix) -> Result<PolyMatrix> {
        if self.rows != rhs.rows || self.cols != rhs.cols {
            return Err(Error::InvalidArgument("matrix shapes differ".into()));
        }
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            entries: self
                .entries
                .iter()
                .zip(&rhs.entries)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    /// Determinant by fraction-free (Bareiss) elimination; every division is exact.
    pub fn determinant(&self) -> Result<Gf2Poly> {
        if self.rows != self.cols {
            return Err(Error::InvalidArgument(
                "determinant of a non-square matrix".into(),
            ));
        }
        let n = self.rows;
        let mut m = self.clone();
        let mut prev = Gf2Poly::one();
        for k in 0..n {
            if m.get(k, k).is_zero() {
                let Some(p) = (k + 1..n).find(|&r| !m.get(r, k).is_zero()) else {
                    return Ok(Gf2Poly::zero());
                };
                for c in 0..n {
                    m.entries.swap(k * n + c, p * n + c);
                }
            }
            if k + 1 == n {
                break;
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let num = &(m.get(i, j) * m.get(k, k)) + &(m.get(i, k) * m.get(k, j));
                    let (q, r) = num.div_rem(&prev)?;
                    debug_assert!(r.is_zero(), "Bareiss division must be exact");
                    m.set(i, j, q);
                }
                m.set(i, k, Gf2Poly::zero());
            }
            prev = m.get(k, k).clone();
        }
        Ok(m.get(n - 1, n - 1).clone())
    }
}

impl fmt::Debug for PolyMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<String> = (0..self.rows)
            .map(|r| {
                let row: Vec<String> = self.row(r).iter().map(|p| p.to_algebraic()).collect();
                format!("[{}]", row.join(", "))
            })
            .collect();
        write!(f, "PolyMatrix[{}]", rows.join(", "))
    }
}

/// Truncated power-series inverse of a square polynomial matrix.
///
/// Returns `P` with `m * P == I (mod z^(bound+1))` together with a flag that is set
/// when `m * P == I` holds exactly, i.e. the true inverse is a polynomial.
pub fn truncated_inverse(m: &PolyMatrix, bound: usize) -> Result<(PolyMatrix, bool)> {
    if m.rows() != m.cols() {
        return Err(Error::InvalidArgument(
            "series inverse needs a square matrix".into(),
        ));
    }
    if bound == 0 {
        return Err(Error::InvalidArgument(
            "series inverse bound must be at least 1".into(),
        ));
    }
    let coeffs = m.slices();
    let c0_inv = coeffs[0].inverse()?;
    let mut p: Vec<BitMatrix> = vec![c0_inv.clone()];
    for k in 1..=bound {
        let mut acc = BitMatrix::zeros(m.rows(), m.cols());
        for j in 1..=k.min(coeffs.len() - 1) {
            acc.xor_assign(&coeffs[j].mul(&p[k - j])?);
        }
        p.push(c0_inv.mul(&acc)?);
    }
    let inv = PolyMatrix::from_slices(&p)?;
    let exact = m.mul(&inv)? == PolyMatrix::identity(m.rows());
    Ok((inv, exact))
}

/// Exact polynomial inverse of `m`, found as a power series of degree at most `bound`.
pub fn series_inverse(m: &PolyMatrix, bound: usize) -> Result<PolyMatrix> {
    match truncated_inverse(m, bound)? {
        (inv, true) => Ok(inv),
        (_, false) => Err(Error::TruncationExceeded { bound }),
    }
}
