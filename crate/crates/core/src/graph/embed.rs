use super::{BitMatrix, Graph, Host, Order};
use crate::error::{Error, Result};

/// An order-preserving injective map from pattern vertices to host vertices.
/// `map[i]` is the image of pattern vertex `i`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Embedding {
    pub map: Vec<usize>,
}

impl Embedding {
    pub fn new(map: Vec<usize>) -> Self {
        Embedding { map }
    }

    /// Images of the pattern edges, normalised to `u < v`.
    pub fn image_edges<'a>(
        &'a self,
        pattern: &'a Graph,
    ) -> impl Iterator<Item = (usize, usize)> + 'a {
        pattern.edges().map(|(a, b)| {
            let (u, v) = (self.map[a], self.map[b]);
            if u < v {
                (u, v)
            } else {
                (v, u)
            }
        })
    }
}

/// Injective, in range, and order-preserving: strictly increasing for a
/// linear order, a rotation of an increasing sequence for a cyclic one.
pub fn is_order_preserving(order: Order, host_n: usize, map: &[usize]) -> bool {
    if map.iter().any(|&v| v >= host_n) {
        return false;
    }
    let k = map.len();
    match order {
        Order::Linear => map.windows(2).all(|w| w[0] < w[1]),
        Order::Cyclic => {
            if k <= 1 {
                return true;
            }
            let mut sorted = map.to_vec();
            sorted.sort_unstable();
            if sorted.windows(2).any(|w| w[0] == w[1]) {
                return false;
            }
            let descents = (0..k).filter(|&i| map[(i + 1) % k] < map[i]).count();
            descents == 1
        }
    }
}

/// Rotations `i -> i + r (mod k)` of a cgg that map its edge set onto
/// itself. Always contains 0; an ordered graph only has 0.
pub fn rotation_automorphisms(g: &Graph) -> Vec<usize> {
    let k = g.n();
    if g.order() == Order::Linear || k == 0 {
        return vec![0];
    }
    (0..k)
        .filter(|&r| g.edges().all(|(u, v)| g.has_edge((u + r) % k, (v + r) % k)))
        .collect()
}

struct Search<'a> {
    order: Order,
    adj: BitMatrix,
    back: Vec<Vec<usize>>,
    host_n: usize,
    k: usize,
    limit: usize,
    out: Vec<Embedding>,
    keep: &'a dyn Fn(&[usize]) -> bool,
}

impl Search<'_> {
    fn extend(&mut self, map: &mut Vec<usize>, anchor: usize, last_off: usize) {
        if self.out.len() >= self.limit {
            return;
        }
        let i = map.len();
        if i == self.k {
            if (self.keep)(map) {
                self.out.push(Embedding::new(map.clone()));
            }
            return;
        }
        let remaining = self.k - i - 1;
        let max_off = self.host_n - 1 - remaining;
        for off in last_off + 1..=max_off {
            let v = match self.order {
                Order::Cyclic => (anchor + off) % self.host_n,
                Order::Linear => anchor + off,
            };
            if self.back[i].iter().all(|&j| self.adj.get(map[j], v)) {
                map.push(v);
                self.extend(map, anchor, off);
                map.pop();
                if self.out.len() >= self.limit {
                    return;
                }
            }
        }
    }
}

fn run_search(
    pattern: &Graph,
    host: &Host,
    limit: Option<usize>,
    keep: &dyn Fn(&[usize]) -> bool,
) -> Result<Vec<Embedding>> {
    if pattern.order() != host.order() {
        return Err(Error::param("pattern and host use different vertex orders"));
    }
    let k = pattern.n();
    let host_n = host.n();
    if k == 0 || k > host_n {
        return Ok(Vec::new());
    }
    let mut back = vec![Vec::new(); k];
    for (u, v) in pattern.edges() {
        back[v].push(u);
    }
    let mut search = Search {
        order: pattern.order(),
        adj: host.adjacency(),
        back,
        host_n,
        k,
        limit: limit.unwrap_or(usize::MAX),
        out: Vec::new(),
        keep,
    };
    let anchors = match pattern.order() {
        Order::Cyclic => 0..host_n,
        Order::Linear => 0..host_n - k + 1,
    };
    for a in anchors {
        let mut map = vec![a];
        match pattern.order() {
            Order::Cyclic => search.extend(&mut map, a, 0),
            Order::Linear => search.extend_linear(&mut map),
        }
        if search.out.len() >= search.limit {
            break;
        }
    }
    Ok(search.out)
}

impl Search<'_> {
    fn extend_linear(&mut self, map: &mut Vec<usize>) {
        if self.out.len() >= self.limit {
            return;
        }
        let i = map.len();
        if i == self.k {
            if (self.keep)(map) {
                self.out.push(Embedding::new(map.clone()));
            }
            return;
        }
        let remaining = self.k - i - 1;
        let lo = map[i - 1] + 1;
        let hi = self.host_n - remaining;
        for v in lo..hi {
            if self.back[i].iter().all(|&j| self.adj.get(map[j], v)) {
                map.push(v);
                self.extend_linear(map);
                map.pop();
                if self.out.len() >= self.limit {
                    return;
                }
            }
        }
    }
}

/// All order-preserving maps of `pattern` into `host` that carry edges to
/// edges, or the first `limit` of them.
///
/// Maps are counted, not copies: a copy with a non-trivial rotation
/// automorphism appears once per automorphism. Order is deterministic:
/// by the image of pattern vertex 0, then lexicographically by offsets.
pub fn enumerate_embeddings(
    pattern: &Graph,
    host: &Host,
    limit: Option<usize>,
) -> Result<Vec<Embedding>> {
    run_search(pattern, host, limit, &|_| true)
}

/// One embedding per distinct copy (image sub-graph) of `pattern` in `host`.
/// Among maps with the same image the one sending vertex 0 to the smallest
/// host vertex is kept.
pub fn distinct_copies(
    pattern: &Graph,
    host: &Host,
    limit: Option<usize>,
) -> Result<Vec<Embedding>> {
    let autos = rotation_automorphisms(pattern);
    let keep = move |map: &[usize]| autos.iter().all(|&r| map[0] <= map[r]);
    run_search(pattern, host, limit, &keep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    fn brute_force_maps(pattern: &Graph, host: &Graph) -> BTreeSet<Vec<usize>> {
        let k = pattern.n();
        let n = host.n();
        let mut out = BTreeSet::new();
        let mut map = vec![0; k];
        fn rec(
            i: usize,
            map: &mut Vec<usize>,
            pattern: &Graph,
            host: &Graph,
            out: &mut BTreeSet<Vec<usize>>,
        ) {
            if i == map.len() {
                let ok = is_order_preserving(pattern.order(), host.n(), map)
                    && pattern.edges().all(|(a, b)| host.has_edge(map[a], map[b]));
                if ok {
                    out.insert(map.clone());
                }
                return;
            }
            for v in 0..host.n() {
                map[i] = v;
                rec(i + 1, map, pattern, host, out);
            }
        }
        if k <= n {
            rec(0, &mut map, pattern, host, &mut out);
        }
        out
    }

    #[test]
    fn triangle_into_k5() {
        let k3 = Graph::complete(Order::Cyclic, 3);
        let k5 = Host::complete(Order::Cyclic, 5);
        assert_eq!(enumerate_embeddings(&k3, &k5, None).unwrap().len(), 30);
        let copies = distinct_copies(&k3, &k5, None).unwrap();
        assert_eq!(copies.len(), 10);
        let triples: BTreeSet<Vec<usize>> = copies
            .iter()
            .map(|e| {
                let mut s = e.map.clone();
                s.sort();
                s
            })
            .collect();
        assert_eq!(triples.len(), 10);
    }

    #[test]
    fn c4_into_k4_and_c5_into_k4() {
        let c4 = Graph::plane_cycle(4).unwrap();
        let k4 = Host::complete(Order::Cyclic, 4);
        assert_eq!(enumerate_embeddings(&c4, &k4, None).unwrap().len(), 4);
        assert_eq!(distinct_copies(&c4, &k4, None).unwrap().len(), 1);
        let c5 = Graph::plane_cycle(5).unwrap();
        assert!(enumerate_embeddings(&c5, &k4, None).unwrap().is_empty());
    }

    #[test]
    fn limit_and_reflection() {
        let k3 = Graph::complete(Order::Cyclic, 3);
        let k6 = Host::complete(Order::Cyclic, 6);
        assert_eq!(enumerate_embeddings(&k3, &k6, Some(7)).unwrap().len(), 7);
        // reflection of C5 is not order preserving
        assert!(!is_order_preserving(Order::Cyclic, 5, &[0, 4, 3, 2, 1]));
        assert!(is_order_preserving(Order::Cyclic, 5, &[3, 4, 0, 1, 2]));
        assert!(!is_order_preserving(Order::Linear, 5, &[3, 4, 0]));
    }

    #[test]
    fn matches_brute_force_on_small_hosts() {
        let patterns = [
            Graph::plane_cycle(4).unwrap(),
            Graph::cgg(4, [(0, 2), (1, 3)]).unwrap(),
            Graph::cgg(3, [(0, 1)]).unwrap(),
            Graph::ordered(3, [(0, 1), (0, 2)]).unwrap(),
            Graph::ordered_path(3).unwrap(),
        ];
        let hosts = [
            Graph::cgg(6, [(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (5, 0), (0, 3), (1, 4), (2, 4)])
                .unwrap(),
            Graph::complete(Order::Cyclic, 6),
        ];
        for p in &patterns {
            for h in &hosts {
                let h = h.with_order(p.order());
                let got: BTreeSet<Vec<usize>> =
                    enumerate_embeddings(p, &Host::Graph(h.clone()), None)
                        .unwrap()
                        .into_iter()
                        .map(|e| e.map)
                        .collect();
                assert_eq!(got, brute_force_maps(p, &h), "{p:?} in {h:?}");
                let copies = distinct_copies(p, &Host::Graph(h.clone()), None).unwrap();
                let image = |m: &[usize]| {
                    let mut vs = m.to_vec();
                    vs.sort();
                    let es: BTreeSet<(usize, usize)> =
                        Embedding::new(m.to_vec()).image_edges(p).collect();
                    (vs, es)
                };
                let all_images: BTreeSet<_> = got.iter().map(|m| image(m)).collect();
                let rep_images: BTreeSet<_> = copies.iter().map(|e| image(&e.map)).collect();
                assert_eq!(rep_images.len(), copies.len());
                assert_eq!(rep_images, all_images);
            }
        }
    }

    #[test]
    fn automorphisms() {
        assert_eq!(rotation_automorphisms(&Graph::plane_cycle(5).unwrap()), vec![0, 1, 2, 3, 4]);
        let g = Graph::cgg(4, [(0, 2), (1, 2)]).unwrap();
        assert_eq!(rotation_automorphisms(&g), vec![0]);
        let diag = Graph::cgg(4, [(0, 2), (1, 3)]).unwrap();
        assert_eq!(rotation_automorphisms(&diag), vec![0, 1, 2, 3]);
    }
}
