//! Convex geometric graphs and ordered graphs.
//!
//! Vertices are always the integers `0..n`. For a cgg they sit clockwise on a
//! circle; for an ordered graph they sit on a line. Cyclic relabelings are
//! never applied implicitly: operations that care about rotations say so.

pub(crate) mod bits;
mod blowup;
mod embed;
mod partition;

use std::collections::BTreeSet;
use std::fmt;

use num_bigint::BigInt;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::rational::Rational;

pub use bits::BitMatrix;
pub use blowup::{blowup, irregular_blowup_k3, IrregularBlowup};
pub use embed::{
    distinct_copies, enumerate_embeddings, is_order_preserving, rotation_automorphisms, Embedding,
};
pub use partition::{
    chromatic_number, cyclic_chromatic_number, interval_chromatic_number, IntervalPartition,
};

/// How the vertices `0..n` are arranged.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Order {
    /// Clockwise around a circle (a convex geometric graph).
    #[serde(rename = "cgg")]
    Cyclic,
    /// Left to right on a line (an ordered graph).
    #[serde(rename = "ordered")]
    Linear,
}

impl fmt::Display for Order {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Order::Cyclic => "cgg",
            Order::Linear => "ordered",
        })
    }
}

/// Length of the pair `{u, v}` among `n` vertices arranged by `order`.
///
/// Cyclic: `min(|u-v|, n-|u-v|)`. Linear: `|u-v|`.
#[inline]
pub fn pair_length(order: Order, n: usize, u: usize, v: usize) -> usize {
    let d = u.abs_diff(v);
    match order {
        Order::Cyclic => d.min(n - d),
        Order::Linear => d,
    }
}

#[inline]
fn norm(u: usize, v: usize) -> (usize, usize) {
    if u < v {
        (u, v)
    } else {
        (v, u)
    }
}

/// A simple graph on `0..n` together with a cyclic or linear vertex order.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Graph {
    order: Order,
    n: usize,
    edges: BTreeSet<(usize, usize)>,
}

impl Graph {
    /// Builds a graph, rejecting self-loops, out-of-range endpoints and
    /// duplicate edges (in either orientation).
    pub fn new(
        order: Order,
        n: usize,
        edges: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self> {
        let mut set = BTreeSet::new();
        for (u, v) in edges {
            if u == v {
                return Err(Error::InvalidEdge(u, v, "self-loop"));
            }
            if u >= n || v >= n {
                return Err(Error::InvalidEdge(u, v, "endpoint out of range"));
            }
            if !set.insert(norm(u, v)) {
                return Err(Error::InvalidEdge(u, v, "duplicate edge"));
            }
        }
        Ok(Graph {
            order,
            n,
            edges: set,
        })
    }

    pub fn cgg(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        Self::new(Order::Cyclic, n, edges)
    }

    pub fn ordered(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        Self::new(Order::Linear, n, edges)
    }

    pub fn complete(order: Order, n: usize) -> Self {
        let edges = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
        Graph { order, n, edges }
    }

    pub fn edgeless(order: Order, n: usize) -> Self {
        Graph {
            order,
            n,
            edges: BTreeSet::new(),
        }
    }

    /// The plane cycle `C_k`: consecutive vertices joined, plus `{k-1, 0}`.
    pub fn plane_cycle(k: usize) -> Result<Self> {
        if k < 3 {
            return Err(Error::param("a plane cycle needs at least 3 vertices"));
        }
        Self::cgg(k, (0..k).map(|i| (i, (i + 1) % k)))
    }

    /// The ordered path `0 - 1 - ... - (k-1)`.
    pub fn ordered_path(k: usize) -> Result<Self> {
        Self::ordered(k, (1..k).map(|i| (i - 1, i)))
    }

    pub fn order(&self) -> Order {
        self.order
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Edges as `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl ExactSizeIterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.edges.contains(&norm(u, v))
    }

    /// `true` when every pair of distinct vertices is an edge.
    pub fn is_complete(&self) -> bool {
        self.edges.len() == self.n * self.n.saturating_sub(1) / 2
    }

    /// Length of `{u, v}` under this graph's vertex order.
    pub fn edge_length(&self, u: usize, v: usize) -> Result<usize> {
        edge_length(self.order, self.n, u, v)
    }

    pub fn adjacency(&self) -> BitMatrix {
        let mut m = BitMatrix::new(self.n);
        for (u, v) in self.edges() {
            m.set_sym(u, v);
        }
        m
    }

    /// Same vertices and edges, different vertex order.
    pub fn with_order(&self, order: Order) -> Graph {
        Graph {
            order,
            n: self.n,
            edges: self.edges.clone(),
        }
    }
}

/// Length of the pair `{u, v}` in a host with `n` vertices.
pub fn edge_length(order: Order, n: usize, u: usize, v: usize) -> Result<usize> {
    if u == v {
        return Err(Error::InvalidEdge(u, v, "identical endpoints"));
    }
    if u >= n || v >= n {
        return Err(Error::InvalidEdge(u, v, "endpoint out of range"));
    }
    Ok(pair_length(order, n, u, v))
}

/// Exact average edge length of the complete graph `K_n`.
pub fn average_edge_length(n: usize, order: Order) -> Result<Rational> {
    if n < 3 {
        return Err(Error::param("average edge length needs n >= 3"));
    }
    let n = n as u64;
    // Cyclic: every unordered pair {u, u+d}, d in 1..n, counted once per u and
    // halved. Linear: n-d pairs at distance d.
    let (total, pairs): (u64, u64) = match order {
        Order::Cyclic => {
            let twice: u64 = (1..n).map(|d| n * d.min(n - d)).sum();
            (twice / 2, n * (n - 1) / 2)
        }
        Order::Linear => ((1..n).map(|d| (n - d) * d).sum(), n * (n - 1) / 2),
    };
    Ok(Rational::new(BigInt::from(total), BigInt::from(pairs)))
}

/// The host side of a packing: either a complete graph, described implicitly,
/// or an explicit graph such as a blowup.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Host {
    Complete { order: Order, n: usize },
    Graph(Graph),
}

impl Host {
    pub fn complete(order: Order, n: usize) -> Self {
        Host::Complete { order, n }
    }

    pub fn n(&self) -> usize {
        match self {
            Host::Complete { n, .. } => *n,
            Host::Graph(g) => g.n(),
        }
    }

    pub fn order(&self) -> Order {
        match self {
            Host::Complete { order, .. } => *order,
            Host::Graph(g) => g.order(),
        }
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        match self {
            Host::Complete { n, .. } => u != v && u < *n && v < *n,
            Host::Graph(g) => g.has_edge(u, v),
        }
    }

    pub fn edge_count(&self) -> u64 {
        match self {
            Host::Complete { n, .. } => (*n as u64) * (*n as u64).saturating_sub(1) / 2,
            Host::Graph(g) => g.edge_count() as u64,
        }
    }

    pub fn adjacency(&self) -> BitMatrix {
        match self {
            Host::Complete { n, .. } => BitMatrix::complete(*n),
            Host::Graph(g) => g.adjacency(),
        }
    }
}

impl From<Graph> for Host {
    fn from(g: Graph) -> Self {
        Host::Graph(g)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGraph {
    kind: Order,
    n: usize,
    edges: Vec<[usize; 2]>,
}

impl Serialize for Graph {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        RawGraph {
            kind: self.order,
            n: self.n,
            edges: self.edges().map(|(u, v)| [u, v]).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Graph {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let raw = RawGraph::deserialize(d)?;
        Graph::new(raw.kind, raw.n, raw.edges.iter().map(|e| (e[0], e[1])))
            .map_err(serde::de::Error::custom)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawHost {
    kind: Order,
    n: usize,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    complete: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    edges: Option<Vec<[usize; 2]>>,
}

impl Serialize for Host {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Host::Complete { order, n } => RawHost {
                kind: *order,
                n: *n,
                complete: true,
                edges: None,
            }
            .serialize(s),
            Host::Graph(g) => g.serialize(s),
        }
    }
}

impl<'de> Deserialize<'de> for Host {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let raw = RawHost::deserialize(d)?;
        match (raw.complete, raw.edges) {
            (true, None) => Ok(Host::Complete {
                order: raw.kind,
                n: raw.n,
            }),
            (false, Some(edges)) => Graph::new(raw.kind, raw.n, edges.iter().map(|e| (e[0], e[1])))
                .map(Host::Graph)
                .map_err(D::Error::custom),
            _ => Err(D::Error::custom(
                "host needs exactly one of \"complete\": true or \"edges\"",
            )),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::frac;

    #[test]
    fn edge_length_examples() {
        assert_eq!(edge_length(Order::Cyclic, 7, 0, 3).unwrap(), 3);
        assert_eq!(edge_length(Order::Cyclic, 7, 0, 6).unwrap(), 1);
        assert_eq!(edge_length(Order::Linear, 7, 2, 5).unwrap(), 3);
        assert!(matches!(
            edge_length(Order::Cyclic, 7, 4, 4),
            Err(Error::InvalidEdge(..))
        ));
        assert!(edge_length(Order::Cyclic, 7, 0, 7).is_err());
    }

    #[test]
    fn average_length_examples() {
        assert_eq!(average_edge_length(5, Order::Cyclic).unwrap(), frac(3, 2));
        assert_eq!(average_edge_length(3, Order::Cyclic).unwrap(), frac(1, 1));
        assert_eq!(average_edge_length(101, Order::Cyclic).unwrap(), frac(51, 2));
        assert!(average_edge_length(2, Order::Cyclic).is_err());
        // linear K_4: lengths 1,1,1,2,2,3 -> 10/6
        assert_eq!(average_edge_length(4, Order::Linear).unwrap(), frac(5, 3));
    }

    #[test]
    fn odd_n_has_n_edges_per_length() {
        for n in (3..40).step_by(2) {
            let g = Graph::complete(Order::Cyclic, n);
            let mut counts = vec![0usize; n / 2 + 1];
            for (u, v) in g.edges() {
                counts[g.edge_length(u, v).unwrap()] += 1;
            }
            assert_eq!(counts[0], 0);
            assert!(counts[1..].iter().all(|&c| c == n));
            assert_eq!(counts.iter().sum::<usize>(), n * (n - 1) / 2);
        }
    }

    #[test]
    fn rejects_bad_edges() {
        assert!(Graph::cgg(3, [(0, 0)]).is_err());
        assert!(Graph::cgg(3, [(0, 3)]).is_err());
        assert!(Graph::cgg(3, [(0, 1), (1, 0)]).is_err());
    }

    #[test]
    fn graph_json_is_strict_and_canonical() {
        let text = r#"{"kind":"cgg","n":5,"edges":[[0,1],[0,4],[1,2],[2,3],[3,4]]}"#;
        let g: Graph = serde_json::from_str(text).unwrap();
        assert_eq!(g, Graph::plane_cycle(5).unwrap());
        assert_eq!(serde_json::to_string(&g).unwrap(), text);

        let dup = r#"{"kind":"cgg","n":3,"edges":[[0,1],[1,0]]}"#;
        assert!(serde_json::from_str::<Graph>(dup).is_err());
        let extra = r#"{"kind":"cgg","n":3,"edges":[],"x":1}"#;
        assert!(serde_json::from_str::<Graph>(extra).is_err());
        let kind = r#"{"kind":"tree","n":3,"edges":[]}"#;
        assert!(serde_json::from_str::<Graph>(kind).is_err());
    }

    #[test]
    fn host_json() {
        let h = Host::complete(Order::Linear, 9);
        let s = serde_json::to_string(&h).unwrap();
        assert_eq!(s, r#"{"kind":"ordered","n":9,"complete":true}"#);
        assert_eq!(serde_json::from_str::<Host>(&s).unwrap(), h);
        let g = Host::Graph(Graph::plane_cycle(4).unwrap());
        let s = serde_json::to_string(&g).unwrap();
        assert_eq!(serde_json::from_str::<Host>(&s).unwrap(), g);
        assert_eq!(h.edge_count(), 36);
    }
}
