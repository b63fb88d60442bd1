use super::{Graph, Order};
use crate::error::{Error, Result};

/// The `t`-regular blowup `H[t]`: vertex `v` of `H` becomes the interval
/// `v*t .. (v+1)*t`, and every edge of `H` becomes a complete bipartite
/// bundle between the two intervals.
pub fn blowup(h: &Graph, t: usize) -> Result<Graph> {
    if t == 0 {
        return Err(Error::param("blowup factor must be positive"));
    }
    let edges = h.edges().flat_map(|(u, v)| {
        (0..t).flat_map(move |a| (0..t).map(move |b| (u * t + a, v * t + b)))
    });
    Graph::new(h.order(), h.n() * t, edges)
}

/// Sizes of the three consecutive intervals of the irregular blowup of an
/// ordered triangle with cross-edge counts `e12, e13, e23`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct IrregularBlowup {
    pub sizes: [usize; 3],
}

impl IrregularBlowup {
    pub fn new(e12: usize, e13: usize, e23: usize, t: usize) -> Result<Self> {
        if e12 == 0 || e13 == 0 || e23 == 0 {
            return Err(Error::param("irregular blowup needs all cross-edge counts >= 1"));
        }
        if t == 0 {
            return Err(Error::param("blowup factor must be positive"));
        }
        Ok(IrregularBlowup {
            sizes: [e12 * e13 * t, e12 * e23 * t, e13 * e23 * t],
        })
    }

    pub fn n(&self) -> usize {
        self.sizes.iter().sum()
    }

    /// First vertex of each interval.
    pub fn offsets(&self) -> [usize; 3] {
        [0, self.sizes[0], self.sizes[0] + self.sizes[1]]
    }

    pub fn edge_count(&self) -> u64 {
        let [a, b, c] = self.sizes.map(|s| s as u64);
        a * b + a * c + b * c
    }

    pub fn to_graph(&self) -> Graph {
        let [o1, o2, o3] = self.offsets();
        let n = self.n();
        let part = |v: usize| {
            if v < o2 {
                0
            } else if v < o3 {
                1
            } else {
                2
            }
        };
        let _ = o1;
        let edges = (0..n).flat_map(move |u| (u + 1..n).map(move |v| (u, v)));
        Graph::new(Order::Linear, n, edges.filter(|&(u, v)| part(u) != part(v)))
            .expect("cross pairs are valid edges")
    }
}

/// The irregular blowup as an explicit ordered graph.
pub fn irregular_blowup_k3(e12: usize, e13: usize, e23: usize, t: usize) -> Result<Graph> {
    Ok(IrregularBlowup::new(e12, e13, e23, t)?.to_graph())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::cyclic_chromatic_number;

    #[test]
    fn identity_blowup() {
        let h = Graph::cgg(5, [(0, 1), (1, 2), (2, 3), (3, 1), (1, 4), (0, 4)]).unwrap();
        assert_eq!(blowup(&h, 1).unwrap(), h);
        let h2 = blowup(&h, 2).unwrap();
        assert_eq!(h2.n(), 10);
        assert_eq!(h2.edge_count(), 4 * h.edge_count());
        assert!(blowup(&h, 0).is_err());
    }

    #[test]
    fn triangle_blowup() {
        let k3 = Graph::complete(Order::Cyclic, 3);
        let b = blowup(&k3, 2).unwrap();
        assert_eq!((b.n(), b.edge_count()), (6, 12));
        assert!(!b.has_edge(0, 1));
        assert!(b.has_edge(1, 2));
    }

    #[test]
    fn irregular_examples() {
        let g = irregular_blowup_k3(1, 1, 1, 4).unwrap();
        assert_eq!((g.n(), g.edge_count()), (12, 48));
        let b = IrregularBlowup::new(2, 1, 1, 1).unwrap();
        assert_eq!(b.sizes, [2, 2, 1]);
        assert_eq!(b.to_graph().edge_count(), 8);
        let b = IrregularBlowup::new(1, 2, 3, 1).unwrap();
        assert_eq!(b.sizes, [2, 3, 6]);
        assert_eq!(b.edge_count(), 36);
        assert_eq!(b.to_graph().edge_count(), 36);
        assert!(IrregularBlowup::new(0, 1, 1, 1).is_err());
    }

    #[test]
    fn blowup_preserves_cyclic_chromatic_number() {
        // every cgg on up to 5 vertices with an edge, t <= 3
        for n in 2..=5usize {
            let pairs: Vec<(usize, usize)> =
                (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
            for mask in 1u32..1 << pairs.len() {
                let edges = pairs
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| mask >> i & 1 == 1)
                    .map(|(_, &e)| e);
                let h = Graph::cgg(n, edges).unwrap();
                let chi = cyclic_chromatic_number(&h).unwrap().0;
                for t in 1..=3 {
                    let b = blowup(&h, t).unwrap();
                    assert_eq!(b.edge_count(), t * t * h.edge_count());
                    assert_eq!(cyclic_chromatic_number(&b).unwrap().0, chi, "{h:?} t={t}");
                }
            }
        }
    }
}
