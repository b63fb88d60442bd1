//! Explicit edge-disjoint packings and the constructions that produce them.
//!
//! Every constructor returns a [`Packing`]; none of them is trusted.
//! [`verify_packing`] re-derives order preservation, edge membership and
//! disjointness from scratch.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{is_order_preserving, Graph, Host};
use crate::rational::{self, Rational};

mod compose;
mod greedy;
mod hypergraph;
mod ordered;
mod route;
mod schedule;

pub use compose::{compose_packings, ComposeReport};
pub use greedy::{extend_to_maximal, greedy_best_of, greedy_maximal_packing};
pub use hypergraph::{
    build_copy_hypergraph, nibble_matching, CopyHypergraph, HypergraphStats, NibbleStats,
};
pub use ordered::{pack_ordered_chi3, LevelTrace, OrderedOptions, OrderedReport};
pub use route::{pack_chi_le4, BaseHost, RouteOptions, RouteReport, WitnessChoice};
pub use schedule::{plane_c4_schedule, rotation_schedule_packing, C4Schedule, ScheduleReport};

/// Copies of `pattern` in `host`, stored flat: copy `i` is
/// `copies[i*k..(i+1)*k]` with `k = |V(pattern)|`, entry `j` being the image
/// of pattern vertex `j`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Packing {
    host: Host,
    pattern: Graph,
    copies: Vec<u32>,
}

impl Packing {
    pub fn new(host: Host, pattern: Graph) -> Self {
        Packing {
            host,
            pattern,
            copies: Vec::new(),
        }
    }

    pub fn from_copies(host: Host, pattern: Graph, copies: Vec<u32>) -> Result<Self> {
        let k = pattern.n();
        if (k == 0 && !copies.is_empty()) || (k > 0 && copies.len() % k != 0) {
            return Err(Error::param("copy list length is not a multiple of |V(pattern)|"));
        }
        Ok(Packing {
            host,
            pattern,
            copies,
        })
    }

    pub fn host(&self) -> &Host {
        &self.host
    }

    pub fn pattern(&self) -> &Graph {
        &self.pattern
    }

    pub fn len(&self) -> usize {
        self.copies.len().checked_div(self.pattern.n()).unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.copies.is_empty()
    }

    pub fn push(&mut self, map: &[u32]) {
        debug_assert_eq!(map.len(), self.pattern.n());
        self.copies.extend_from_slice(map);
    }

    pub fn copy(&self, i: usize) -> &[u32] {
        let k = self.pattern.n();
        &self.copies[i * k..(i + 1) * k]
    }

    pub fn copies(&self) -> impl ExactSizeIterator<Item = &[u32]> + '_ {
        self.copies.chunks_exact(self.pattern.n().max(1))
    }

    pub fn raw_copies(&self) -> &[u32] {
        &self.copies
    }

    pub fn covered_edges(&self) -> u64 {
        self.len() as u64 * self.pattern.edge_count() as u64
    }

    /// `|E(pattern)| * #copies / |E(host)|`.
    pub fn coverage(&self) -> Rational {
        let total = self.host.edge_count();
        if total == 0 {
            return Rational::from_integer(0.into());
        }
        Rational::new(self.covered_edges().into(), total.into())
    }

    pub fn coverage_f64(&self) -> f64 {
        rational::to_f64(&self.coverage())
    }
}

/// Index of the pair `{u, v}` among the `n(n-1)/2` pairs of an `n`-set.
#[inline]
pub(crate) fn pair_index(n: usize, u: usize, v: usize) -> usize {
    let (u, v) = if u < v { (u, v) } else { (v, u) };
    u * n - u * (u + 1) / 2 + (v - u - 1)
}

/// Bitmap over all pairs of an `n`-set.
#[derive(Clone, Debug)]
pub(crate) struct EdgeSet {
    n: usize,
    bits: Vec<u64>,
}

impl EdgeSet {
    pub(crate) fn new(n: usize) -> Self {
        let pairs = n * n.saturating_sub(1) / 2;
        EdgeSet {
            n,
            bits: vec![0; pairs.div_ceil(64)],
        }
    }

    /// Sets the pair; returns `false` if it was already set.
    #[inline]
    pub(crate) fn insert(&mut self, u: usize, v: usize) -> bool {
        let i = pair_index(self.n, u, v);
        let (w, b) = (i / 64, 1u64 << (i % 64));
        let fresh = self.bits[w] & b == 0;
        self.bits[w] |= b;
        fresh
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    /// The copy is not injective, leaves the host, or breaks the order.
    NotOrderPreserving { copy: usize },
    /// A pattern edge lands on a non-edge of the host.
    MissingHostEdge { copy: usize, edge: [usize; 2] },
    /// Two copies use the same host edge.
    SharedEdge { first: usize, second: usize, edge: [usize; 2] },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub copies: usize,
    pub covered_edges: u64,
    pub host_edges: u64,
    #[serde(with = "crate::rational::serde_str")]
    pub coverage: Rational,
    /// At most [`MAX_VIOLATIONS`] entries.
    pub violations: Vec<Violation>,
}

impl VerificationReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn into_result(self) -> Result<Self> {
        if self.ok() {
            Ok(self)
        } else {
            Err(Error::Verification(format!(
                "{} violation(s), first: {:?}",
                self.violations.len(),
                self.violations[0]
            )))
        }
    }
}

pub const MAX_VIOLATIONS: usize = 100;

/// Independent check of a packing. Nothing recorded by the constructor is
/// used: order preservation, host edges and disjointness are recomputed, and
/// disjointness uses a fresh bitmap over all host pairs.
pub fn verify_packing(p: &Packing) -> VerificationReport {
    let n = p.host.n();
    let k = p.pattern.n();
    let order = p.host.order();
    let mut violations = Vec::new();
    let mut used = EdgeSet::new(n);
    let mut map = vec![0usize; k];
    let mut clashes: Vec<(usize, [usize; 2])> = Vec::new();
    let orders_match = p.pattern.order() == order;
    for (ci, copy) in p.copies().enumerate() {
        for (m, &c) in map.iter_mut().zip(copy) {
            *m = c as usize;
        }
        if !orders_match || !is_order_preserving(order, n, &map) {
            violations.push(Violation::NotOrderPreserving { copy: ci });
            continue;
        }
        for (a, b) in p.pattern.edges() {
            let (u, v) = (map[a].min(map[b]), map[a].max(map[b]));
            if !p.host.has_edge(u, v) {
                violations.push(Violation::MissingHostEdge {
                    copy: ci,
                    edge: [u, v],
                });
            } else if !used.insert(u, v) {
                clashes.push((ci, [u, v]));
            }
        }
    }
    if !clashes.is_empty() {
        // second pass: the first owner of each contested edge
        let contested: std::collections::HashMap<[usize; 2], usize> = clashes
            .iter()
            .map(|(_, e)| (*e, usize::MAX))
            .collect();
        let mut owner = contested;
        for (ci, copy) in p.copies().enumerate() {
            for (a, b) in p.pattern.edges() {
                let (u, v) = (copy[a] as usize, copy[b] as usize);
                let e = [u.min(v), u.max(v)];
                if let Some(o) = owner.get_mut(&e) {
                    if *o == usize::MAX {
                        *o = ci;
                    }
                }
            }
        }
        for (second, edge) in clashes {
            violations.push(Violation::SharedEdge {
                first: owner[&edge],
                second,
                edge,
            });
        }
    }
    violations.truncate(MAX_VIOLATIONS);
    VerificationReport {
        copies: p.len(),
        covered_edges: p.covered_edges(),
        host_edges: p.host.edge_count(),
        coverage: p.coverage(),
        violations,
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPacking {
    host: Host,
    pattern: Graph,
    copies: Vec<Vec<u32>>,
    #[serde(with = "crate::rational::serde_str")]
    coverage: Rational,
}

impl Serialize for Packing {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        RawPacking {
            host: self.host.clone(),
            pattern: self.pattern.clone(),
            copies: self.copies().map(<[u32]>::to_vec).collect(),
            coverage: self.coverage(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Packing {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let raw = RawPacking::deserialize(d)?;
        let k = raw.pattern.n();
        if raw.copies.iter().any(|c| c.len() != k) {
            return Err(D::Error::custom("copy length differs from |V(pattern)|"));
        }
        let p = Packing::from_copies(raw.host, raw.pattern, raw.copies.concat())
            .map_err(D::Error::custom)?;
        if p.coverage() != raw.coverage {
            return Err(D::Error::custom("stated coverage does not match the copies"));
        }
        Ok(p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Order;
    use crate::rational::frac;

    fn c5() -> Graph {
        Graph::plane_cycle(5).unwrap()
    }

    #[test]
    fn valid_packing_passes() {
        let host = Host::complete(Order::Cyclic, 10);
        // two C5s: the even and odd vertices
        let p = Packing::from_copies(host, c5(), vec![0, 2, 4, 6, 8, 1, 3, 5, 7, 9]).unwrap();
        let r = verify_packing(&p);
        assert!(r.ok(), "{:?}", r.violations);
        assert_eq!(r.coverage, frac(10, 45));
    }

    #[test]
    fn shared_edge_names_the_pair() {
        let host = Host::complete(Order::Cyclic, 7);
        let p = Packing::from_copies(host, c5(), vec![0, 1, 2, 3, 4, 0, 1, 3, 5, 6]).unwrap();
        let r = verify_packing(&p);
        assert_eq!(
            r.violations,
            vec![Violation::SharedEdge {
                first: 0,
                second: 1,
                edge: [0, 1]
            }]
        );
    }

    #[test]
    fn reflection_is_rejected() {
        // the mirror image of a plane C5 is not a rotation of it
        let host = Host::complete(Order::Cyclic, 5);
        let p = Packing::from_copies(host, c5(), vec![4, 3, 2, 1, 0]).unwrap();
        let r = verify_packing(&p);
        assert_eq!(r.violations, vec![Violation::NotOrderPreserving { copy: 0 }]);
        // a rotation is fine
        let host = Host::complete(Order::Cyclic, 5);
        let p = Packing::from_copies(host, c5(), vec![2, 3, 4, 0, 1]).unwrap();
        assert!(verify_packing(&p).ok());
    }

    #[test]
    fn host_edges_are_checked() {
        let host = Host::Graph(Graph::cgg(5, [(0, 1), (1, 2)]).unwrap());
        let edge = Graph::cgg(2, [(0, 1)]).unwrap();
        let p = Packing::from_copies(host, edge, vec![0, 1, 1, 3]).unwrap();
        let r = verify_packing(&p);
        assert_eq!(
            r.violations,
            vec![Violation::MissingHostEdge {
                copy: 1,
                edge: [1, 3]
            }]
        );
    }

    #[test]
    fn json_round_trip() {
        let host = Host::complete(Order::Cyclic, 10);
        let p = Packing::from_copies(host, c5(), vec![0, 2, 4, 6, 8]).unwrap();
        let s = serde_json::to_string(&p).unwrap();
        assert!(s.contains(r#""coverage":"1/9""#));
        assert!(s.contains(r#""copies":[[0,2,4,6,8]]"#));
        let back: Packing = serde_json::from_str(&s).unwrap();
        assert_eq!(back, p);
        let tampered = s.replace("1/9", "1/8");
        assert!(serde_json::from_str::<Packing>(&tampered).is_err());
    }

    #[test]
    fn edge_set_indexing() {
        let n = 9;
        let mut seen = std::collections::BTreeSet::new();
        for u in 0..n {
            for v in u + 1..n {
                assert!(seen.insert(pair_index(n, u, v)));
                assert_eq!(pair_index(n, u, v), pair_index(n, v, u));
            }
        }
        assert_eq!(seen.into_iter().collect::<Vec<_>>(), (0..36).collect::<Vec<_>>());
    }
}
