//! Network model: a directed multigraph with one source and several sinks, the
//! `(A, K(z), B^t)` description of a network code, and per-sink transfer matrices.

use std::collections::{BTreeMap, VecDeque};

use crate::error::{Error, Result};
use crate::gf2poly::{series_inverse, BitMatrix, PolyMatrix};

/// Directed multigraph. Edge order is global: edge `i` is component `i` of every
/// error vector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NetworkSpec {
    pub nodes: Vec<String>,
    pub edges: Vec<(usize, usize)>,
    pub source: usize,
    pub sinks: Vec<usize>,
}

impl NetworkSpec {
    /// Resolves node names into indices. Unknown names are a validation error.
    pub fn from_names<S: AsRef<str>>(
        nodes: &[S],
        edges: &[(S, S)],
        source: &str,
        sinks: &[S],
    ) -> Result<Self> {
        let nodes: Vec<String> = nodes.iter().map(|n| n.as_ref().to_string()).collect();
        let index = |name: &str| {
            nodes
                .iter()
                .position(|n| n == name)
                .ok_or_else(|| Error::Validation(format!("unknown node `{name}`")))
        };
        let edges = edges
            .iter()
            .map(|(u, v)| Ok((index(u.as_ref())?, index(v.as_ref())?)))
            .collect::<Result<Vec<_>>>()?;
        let source = index(source)?;
        let sinks = sinks
            .iter()
            .map(|s| index(s.as_ref()))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            nodes,
            edges,
            source,
            sinks,
        })
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn node_index(&self, name: &str) -> Option<usize> {
        self.nodes.iter().position(|n| n == name)
    }

    pub fn sink_names(&self) -> Vec<&str> {
        self.sinks.iter().map(|&s| self.nodes[s].as_str()).collect()
    }

    /// Checks the structural rules: the source only sends, sinks only receive.
    pub fn validate(&self) -> Result<()> {
        let n = self.nodes.len();
        if self.source >= n {
            return Err(Error::Validation("source index out of range".into()));
        }
        if self.sinks.is_empty() {
            return Err(Error::Validation("network has no sinks".into()));
        }
        for &t in &self.sinks {
            if t >= n {
                return Err(Error::Validation(format!("sink index {t} out of range")));
            }
            if t == self.source {
                return Err(Error::Validation(format!(
                    "node `{}` is both source and sink",
                    self.nodes[t]
                )));
            }
        }
        for (i, &(u, v)) in self.edges.iter().enumerate() {
            if u >= n || v >= n {
                return Err(Error::Validation(format!(
                    "edge {i} references a missing node"
                )));
            }
            if v == self.source {
                return Err(Error::Validation(format!(
                    "edge {i} enters the source `{}`",
                    self.nodes[v]
                )));
            }
            if self.sinks.contains(&u) {
                return Err(Error::Validation(format!(
                    "edge {i} leaves the sink `{}`",
                    self.nodes[u]
                )));
            }
        }
        Ok(())
    }

    /// Unit-capacity max-flow from the source to `sink`, by BFS augmenting paths.
    pub fn max_flow(&self, sink: usize) -> usize {
        let n = self.nodes.len();
        // Arc 2i is edge i, arc 2i+1 its reverse.
        let mut cap: Vec<u8> = self.edges.iter().flat_map(|_| [1u8, 0u8]).collect();
        let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (i, &(u, v)) in self.edges.iter().enumerate() {
            adj[u].push(2 * i);
            adj[v].push(2 * i + 1);
        }
        let head = |arc: usize| {
            let (u, v) = self.edges[arc / 2];
            if arc.is_multiple_of(2) {
                v
            } else {
                u
            }
        };
        let mut flow = 0;
        loop {
            let mut via: Vec<Option<usize>> = vec![None; n];
            let mut seen = vec![false; n];
            seen[self.source] = true;
            let mut queue = VecDeque::from([self.source]);
            while let Some(u) = queue.pop_front() {
                if u == sink {
                    break;
                }
                for &arc in &adj[u] {
                    let w = head(arc);
                    if cap[arc] > 0 && !seen[w] {
                        seen[w] = true;
                        via[w] = Some(arc);
                        queue.push_back(w);
                    }
                }
            }
            if !seen[sink] {
                return flow;
            }
            let mut v = sink;
            while let Some(arc) = via[v] {
                cap[arc] -= 1;
                cap[arc ^ 1] += 1;
                v = head(arc ^ 1);
            }
            flow += 1;
        }
    }

    /// Multicast capacity: the minimum over sinks of the source-to-sink max-flow.
    pub fn multicast_capacity(&self) -> Result<usize> {
        self.validate()?;
        let mut omega = usize::MAX;
        for &t in &self.sinks {
            let f = self.max_flow(t);
            if f == 0 {
                return Err(Error::ZeroCapacity {
                    sink: self.nodes[t].clone(),
                });
            }
            omega = omega.min(f);
        }
        Ok(omega)
    }
}

/// An `omega`-dimensional network code `(A, K(z), B^t)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NetworkCode {
    pub a: BitMatrix,
    pub k: PolyMatrix,
    pub b: BTreeMap<String, BitMatrix>,
    pub omega: usize,
}

impl NetworkCode {
    pub fn new(a: BitMatrix, k: PolyMatrix, b: BTreeMap<String, BitMatrix>) -> Result<Self> {
        let omega = a.rows();
        let edges = a.cols();
        if k.rows() != edges || k.cols() != edges {
            return Err(Error::InvalidArgument(format!(
                "K must be {edges}x{edges}, got {}x{}",
                k.rows(),
                k.cols()
            )));
        }
        for (sink, bt) in &b {
            if bt.rows() != edges || bt.cols() != omega {
                return Err(Error::InvalidArgument(format!(
                    "B for sink `{sink}` must be {edges}x{omega}, got {}x{}",
                    bt.rows(),
                    bt.cols()
                )));
            }
        }
        Ok(Self { a, k, b, omega })
    }

    pub fn edge_count(&self) -> usize {
        self.a.cols()
    }

    /// `K(z)` may only connect edge `i` to edge `j` when `head(i) == tail(j)`.
    pub fn check_topology(&self, spec: &NetworkSpec) -> Result<()> {
        if spec.edge_count() != self.edge_count() {
            return Err(Error::Validation(format!(
                "network has {} edges but the code has {}",
                spec.edge_count(),
                self.edge_count()
            )));
        }
        for i in 0..self.edge_count() {
            for j in 0..self.edge_count() {
                if !self.k.get(i, j).is_zero() && spec.edges[i].1 != spec.edges[j].0 {
                    return Err(Error::Validation(format!(
                        "K({i},{j}) is nonzero but edge {i} does not feed edge {j}"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Derives the transfer of `sink`: `F_t = (I - K)^-1 B^t`, `M_t = A F_t`.
    pub fn sink_transfer(&self, sink: &str, bound: usize) -> Result<SinkTransfer> {
        let bt = self
            .b
            .get(sink)
            .ok_or_else(|| Error::InvalidArgument(format!("no B matrix for sink `{sink}`")))?;
        let i_minus_k = PolyMatrix::identity(self.edge_count()).add(&self.k)?;
        let inv = series_inverse(&i_minus_k, bound)?;
        let f = inv.mul(&PolyMatrix::from_bit_matrix(bt))?;
        SinkTransfer::new(sink, f, &self.a)
    }
}

/// Per-sink transfer data: `F_t(z)` (`|E| x omega`), `M_t(z) = A F_t(z)` and `l_t = deg F_t`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SinkTransfer {
    sink: String,
    f: PolyMatrix,
    m: PolyMatrix,
    l_t: usize,
    /// `edge_words[i][e]`: row `e` of slice `F_i` packed as an omega-bit word.
    edge_words: Vec<Vec<u64>>,
}

impl SinkTransfer {
    /// Builds a transfer from explicit `F_t` and `A`, checking shapes and full rank.
    pub fn new(sink: &str, f: PolyMatrix, a: &BitMatrix) -> Result<Self> {
        let transfer = Self::without_rank_check(sink, f, a)?;
        if transfer.m.determinant()?.is_zero() {
            return Err(Error::NotFullRank { sink: sink.into() });
        }
        Ok(transfer)
    }

    /// Like [`SinkTransfer::new`] but accepts a singular `M_t`. Only useful for
    /// studying how edge errors reach a sink (e.g. `F = 0`), not for decoding messages.
    pub fn without_rank_check(sink: &str, f: PolyMatrix, a: &BitMatrix) -> Result<Self> {
        if a.cols() != f.rows() || a.rows() != f.cols() {
            return Err(Error::InvalidArgument(format!(
                "A is {}x{} but F is {}x{}",
                a.rows(),
                a.cols(),
                f.rows(),
                f.cols()
            )));
        }
        if f.cols() > 64 {
            return Err(Error::Unsupported("omega above 64".into()));
        }
        let m = PolyMatrix::from_bit_matrix(a).mul(&f)?;
        let edge_words = f
            .slices()
            .iter()
            .map(|s| (0..s.rows()).map(|e| s.row_word(e)).collect())
            .collect();
        Ok(Self {
            sink: sink.into(),
            l_t: f.degree().unwrap_or(0),
            f,
            m,
            edge_words,
        })
    }

    pub fn sink(&self) -> &str {
        &self.sink
    }

    pub fn f(&self) -> &PolyMatrix {
        &self.f
    }

    pub fn m(&self) -> &PolyMatrix {
        &self.m
    }

    pub fn l_t(&self) -> usize {
        self.l_t
    }

    pub fn omega(&self) -> usize {
        self.f.cols()
    }

    pub fn edge_count(&self) -> usize {
        self.f.rows()
    }

    /// Word `i` of the combined error vector of a single error on `edge`.
    pub fn edge_word(&self, i: usize, edge: usize) -> u64 {
        self.edge_words.get(i).map_or(0, |s| s[edge])
    }
}

/// Same as [`SinkTransfer::new`]; the entry point used when `F_t` is given directly.
pub fn load_transfer_direct(sink: &str, f: PolyMatrix, a: &BitMatrix) -> Result<SinkTransfer> {
    SinkTransfer::new(sink, f, a)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf2poly::Gf2Poly;

    fn spec(nodes: &[&str], edges: &[(&str, &str)], sinks: &[&str]) -> NetworkSpec {
        NetworkSpec::from_names(nodes, edges, "s", sinks).unwrap()
    }

    pub(crate) fn butterfly() -> NetworkSpec {
        spec(
            &["s", "a", "b", "c", "d", "t1", "t2"],
            &[
                ("s", "a"),
                ("s", "b"),
                ("a", "c"),
                ("b", "c"),
                ("c", "d"),
                ("a", "t1"),
                ("b", "t2"),
                ("d", "t1"),
                ("d", "t2"),
            ],
            &["t1", "t2"],
        )
    }

    #[test]
    fn validation_examples() {
        let two = spec(&["s", "t"], &[("s", "t"), ("s", "t")], &["t"]);
        assert!(two.validate().is_ok());

        let bad = spec(&["s", "t", "u"], &[("s", "t"), ("t", "u")], &["t"]);
        assert!(matches!(bad.validate(), Err(Error::Validation(msg)) if msg.contains("`t`")));

        assert!(butterfly().validate().is_ok());
        assert!(NetworkSpec::from_names(&["s"], &[("s", "x")], "s", &["s"]).is_err());
    }

    #[test]
    fn capacity_examples() {
        assert_eq!(
            spec(&["s", "t"], &[("s", "t")], &["t"]).multicast_capacity(),
            Ok(1)
        );
        assert_eq!(butterfly().multicast_capacity(), Ok(2));
        let three = spec(&["s", "t"], &[("s", "t"); 3], &["t"]);
        assert_eq!(three.multicast_capacity(), Ok(3));
        let cut = spec(&["s", "a", "t"], &[("s", "a")], &["t"]);
        assert_eq!(
            cut.multicast_capacity(),
            Err(Error::ZeroCapacity { sink: "t".into() })
        );
    }

    #[test]
    fn capacity_invariant_under_edge_reordering() {
        let mut b = butterfly();
        b.edges.reverse();
        assert_eq!(b.multicast_capacity(), Ok(2));
        b.edges.rotate_left(4);
        assert_eq!(b.multicast_capacity(), Ok(2));
    }

    #[test]
    fn degenerate_code_gives_identity() {
        let a = BitMatrix::identity(2);
        let b = BTreeMap::from([("t".to_string(), BitMatrix::identity(2))]);
        let code = NetworkCode::new(a, PolyMatrix::zeros(2, 2), b).unwrap();
        let tr = code.sink_transfer("t", 2).unwrap();
        assert_eq!(tr.m(), &PolyMatrix::identity(2));
        assert_eq!(tr.l_t(), 0);
    }

    #[test]
    fn delayed_butterfly_derivation() {
        let net = butterfly();
        let mut k = PolyMatrix::zeros(9, 9);
        for (i, j) in [(0, 2), (0, 5), (1, 3), (1, 6), (2, 4), (4, 7), (4, 8)] {
            k.set(i, j, Gf2Poly::one());
        }
        k.set(3, 4, "01".parse().unwrap());
        let mut a = BitMatrix::zeros(2, 9);
        a.set(0, 0, true);
        a.set(1, 1, true);
        let mut b1 = BitMatrix::zeros(9, 2);
        b1.set(5, 0, true);
        b1.set(7, 1, true);
        let mut b2 = BitMatrix::zeros(9, 2);
        b2.set(6, 0, true);
        b2.set(8, 1, true);
        let code =
            NetworkCode::new(a, k, BTreeMap::from([("t1".into(), b1), ("t2".into(), b2)])).unwrap();
        code.check_topology(&net).unwrap();
        let t1 = code.sink_transfer("t1", 9).unwrap();
        let expect = PolyMatrix::parse_rows(&[vec!["1", "1"], vec!["0", "01"]]).unwrap();
        assert_eq!(t1.m(), &expect);
        assert_eq!(t1.l_t(), 1);
        let t2 = code.sink_transfer("t2", 9).unwrap();
        let expect = PolyMatrix::parse_rows(&[vec!["0", "1"], vec!["1", "01"]]).unwrap();
        assert_eq!(t2.m(), &expect);
    }

    #[test]
    fn topology_violation_detected() {
        let net = butterfly();
        let mut k = PolyMatrix::zeros(9, 9);
        k.set(0, 3, Gf2Poly::one());
        let code = NetworkCode::new(BitMatrix::zeros(2, 9), k, BTreeMap::new()).unwrap();
        assert!(code.check_topology(&net).is_err());
    }

    #[test]
    fn cyclic_code_truncates() {
        let mut k = PolyMatrix::zeros(1, 1);
        k.set(0, 0, "01".parse().unwrap());
        let code = NetworkCode::new(
            BitMatrix::identity(1),
            k,
            BTreeMap::from([("t".into(), BitMatrix::identity(1))]),
        )
        .unwrap();
        assert_eq!(
            code.sink_transfer("t", 8),
            Err(Error::TruncationExceeded { bound: 8 })
        );
    }

    #[test]
    fn direct_transfer_examples() {
        let f = PolyMatrix::parse_rows(&[
            vec!["1", "1"],
            vec!["0", "11"],
            vec!["0", "1"],
            vec!["0", "1"],
            vec!["0", "1"],
        ])
        .unwrap();
        let mut a = BitMatrix::zeros(2, 5);
        a.set(0, 0, true);
        a.set(1, 1, true);
        let tr = load_transfer_direct("t1", f, &a).unwrap();
        assert_eq!(tr.l_t(), 1);
        assert_eq!(
            tr.m(),
            &PolyMatrix::parse_rows(&[vec!["1", "1"], vec!["0", "11"]]).unwrap()
        );
        assert_eq!(tr.edge_word(0, 0), 0b11);
        assert_eq!(tr.edge_word(1, 1), 0b01);
        assert_eq!(tr.edge_word(5, 1), 0);

        let id =
            load_transfer_direct("t", PolyMatrix::identity(2), &BitMatrix::identity(2)).unwrap();
        assert_eq!(id.m(), &PolyMatrix::identity(2));

        let rank1 = PolyMatrix::parse_rows(&[vec!["1", "1"], vec!["1", "1"]]).unwrap();
        assert_eq!(
            load_transfer_direct("t", rank1, &BitMatrix::identity(2)),
            Err(Error::NotFullRank { sink: "t".into() })
        );
        assert!(
            load_transfer_direct("t", PolyMatrix::identity(3), &BitMatrix::identity(2)).is_err()
        );
    }
}
