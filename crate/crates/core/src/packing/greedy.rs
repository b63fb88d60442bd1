use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::Packing;
use crate::error::{Error, Result};
use crate::graph::bits::{iter_ones, keep_range};
use crate::graph::{BitMatrix, Graph, Host, Order};

/// Random greedy packing run to maximality.
///
/// Phase one draws uniformly random order-preserving maps (a random vertex
/// subset plus, for cggs, a random rotation of the pattern labels) and keeps
/// every map whose edges are all still free. It ends after a run of
/// consecutive rejections. Phase two sweeps all maps systematically, so no
/// further copy fits when it returns.
pub fn greedy_maximal_packing(pattern: &Graph, host: &Host, seed: u64) -> Result<Packing> {
    if pattern.order() != host.order() {
        return Err(Error::param("pattern and host use different vertex orders"));
    }
    let mut packing = Packing::new(host.clone(), pattern.clone());
    extend_to_maximal(&mut packing, seed)?;
    Ok(packing)
}

/// Runs both greedy phases on the edges `packing` leaves free, appending
/// copies until no further copy fits.
pub fn extend_to_maximal(packing: &mut Packing, seed: u64) -> Result<()> {
    let pattern = packing.pattern().clone();
    let host = packing.host().clone();
    let (n, k) = (host.n(), pattern.n());
    if k == 0 || k > n {
        return Ok(());
    }
    if pattern.edge_count() == 0 {
        return Err(Error::param("an edgeless pattern packs without bound"));
    }
    let mut free = host.adjacency();
    for c in packing.copies() {
        for (a, b) in pattern.edges() {
            free.clear_sym(c[a] as usize, c[b] as usize);
        }
    }
    let edges: Vec<(usize, usize)> = pattern.edges().collect();
    let rotations = match pattern.order() {
        Order::Cyclic => k,
        Order::Linear => 1,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut map = vec![0u32; k];
    let patience = 64 + n;
    let mut misses = 0;
    while misses < patience {
        let mut s = sample(&mut rng, n, k).into_vec();
        s.sort_unstable();
        let r = if rotations > 1 { rng.random_range(0..rotations) } else { 0 };
        for (i, &v) in s.iter().enumerate() {
            map[(r + i) % k] = v as u32;
        }
        if try_take(&mut free, &edges, &map) {
            packing.push(&map);
            misses = 0;
        } else {
            misses += 1;
        }
    }
    Sweep::new(&pattern, n, &edges).run(&mut free, packing);
    Ok(())
}

/// Best of `restarts` greedy runs (most copies, earliest on ties). Run `i`
/// uses seed `seed + i`.
pub fn greedy_best_of(pattern: &Graph, host: &Host, seed: u64, restarts: usize) -> Result<Packing> {
    let mut best: Option<Packing> = None;
    for i in 0..restarts.max(1) as u64 {
        let p = greedy_maximal_packing(pattern, host, seed.wrapping_add(i))?;
        if best.as_ref().is_none_or(|b| p.len() > b.len()) {
            best = Some(p);
        }
    }
    Ok(best.expect("at least one run"))
}

fn try_take(free: &mut BitMatrix, edges: &[(usize, usize)], map: &[u32]) -> bool {
    let ok = edges
        .iter()
        .all(|&(a, b)| free.get(map[a] as usize, map[b] as usize));
    if ok {
        for &(a, b) in edges {
            free.clear_sym(map[a] as usize, map[b] as usize);
        }
    }
    ok
}

/// Depth-first sweep over all maps. For rotation `r`, pattern vertex
/// `(r + i) mod k` goes to the `i`-th smallest image; candidates are
/// intersections of the live free-edge rows. Rows are only ever cleared, so
/// a candidate list computed earlier may hold stale entries but never misses
/// a valid one; each candidate is rechecked before use.
struct Sweep<'a> {
    n: usize,
    k: usize,
    rotations: usize,
    edges: &'a [(usize, usize)],
    /// `back[r][i]`: earlier positions joined to position `i` under rotation `r`.
    back: Vec<Vec<Vec<usize>>>,
}

impl<'a> Sweep<'a> {
    fn new(pattern: &Graph, n: usize, edges: &'a [(usize, usize)]) -> Self {
        let k = pattern.n();
        let rotations = match pattern.order() {
            Order::Cyclic => k,
            Order::Linear => 1,
        };
        let back = (0..rotations)
            .map(|r| {
                (0..k)
                    .map(|i| {
                        (0..i)
                            .filter(|&j| pattern.has_edge((r + i) % k, (r + j) % k))
                            .collect()
                    })
                    .collect()
            })
            .collect();
        Sweep {
            n,
            k,
            rotations,
            edges,
            back,
        }
    }

    fn run(&self, free: &mut BitMatrix, packing: &mut Packing) {
        let mut pos = vec![0usize; self.k];
        for first in 0..=self.n - self.k {
            for r in 0..self.rotations {
                pos[0] = first;
                self.extend(r, 1, &mut pos, free, packing);
            }
        }
    }

    fn extend(
        &self,
        r: usize,
        i: usize,
        pos: &mut Vec<usize>,
        free: &mut BitMatrix,
        packing: &mut Packing,
    ) {
        let k = self.k;
        if i == k {
            let mut map = vec![0u32; k];
            for (j, &v) in pos.iter().enumerate() {
                map[(r + j) % k] = v as u32;
            }
            if try_take(free, self.edges, &map) {
                packing.push(&map);
            }
            return;
        }
        let lo = pos[i - 1] + 1;
        let hi = self.n - (k - 1 - i);
        let back = &self.back[r][i];
        let candidates: Vec<usize> = if back.is_empty() {
            (lo..hi).collect()
        } else {
            let mut row = free.row(pos[back[0]]).to_vec();
            for &j in &back[1..] {
                for (w, x) in row.iter_mut().zip(free.row(pos[j])) {
                    *w &= x;
                }
            }
            keep_range(&mut row, lo, hi);
            iter_ones(&row).collect()
        };
        for v in candidates {
            if back.iter().all(|&j| free.get(pos[j], v)) {
                pos[i] = v;
                self.extend(r, i + 1, pos, free, packing);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::distinct_copies;
    use crate::packing::verify_packing;

    fn assert_maximal(p: &Packing) {
        // no copy of the pattern survives in the leftover graph
        let n = p.host().n();
        let mut used = std::collections::BTreeSet::new();
        for c in p.copies() {
            for (a, b) in p.pattern().edges() {
                let (u, v) = (c[a] as usize, c[b] as usize);
                used.insert((u.min(v), u.max(v)));
            }
        }
        let leftover: Vec<(usize, usize)> = (0..n)
            .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
            .filter(|&(u, v)| p.host().has_edge(u, v) && !used.contains(&(u, v)))
            .collect();
        let g = Graph::new(p.host().order(), n, leftover).unwrap();
        let rest = distinct_copies(p.pattern(), &Host::Graph(g), Some(1)).unwrap();
        assert!(rest.is_empty(), "a copy still fits: {:?}", rest[0]);
    }

    #[test]
    fn single_edge_is_perfect() {
        let e = Graph::cgg(2, [(0, 1)]).unwrap();
        let p = greedy_maximal_packing(&e, &Host::complete(Order::Cyclic, 5), 3).unwrap();
        assert_eq!(p.len(), 10);
        assert!(verify_packing(&p).ok());
    }

    #[test]
    fn packings_are_valid_and_maximal() {
        let patterns = [
            Graph::complete(Order::Cyclic, 3),
            Graph::plane_cycle(4).unwrap(),
            Graph::plane_cycle(5).unwrap(),
            Graph::cgg(4, [(0, 2), (1, 3)]).unwrap(),
            Graph::ordered_path(3).unwrap(),
            Graph::ordered(3, [(0, 2), (1, 2)]).unwrap(),
        ];
        for g in &patterns {
            for n in [7usize, 12] {
                for seed in 0..3 {
                    let host = Host::complete(g.order(), n);
                    let p = greedy_maximal_packing(g, &host, seed).unwrap();
                    let r = verify_packing(&p);
                    assert!(r.ok(), "{:?}", r.violations);
                    assert_maximal(&p);
                }
            }
        }
    }

    #[test]
    fn deterministic_per_seed() {
        let g = Graph::plane_cycle(5).unwrap();
        let host = Host::complete(Order::Cyclic, 41);
        let a = greedy_maximal_packing(&g, &host, 9).unwrap();
        let b = greedy_maximal_packing(&g, &host, 9).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn fano_plane_found_by_restarts() {
        // K_7 splits into 7 triangles; a restart finds a perfect packing
        let k3 = Graph::complete(Order::Cyclic, 3);
        let p = greedy_best_of(&k3, &Host::complete(Order::Cyclic, 7), 0, 200).unwrap();
        assert_eq!(p.len(), 7);
        assert!(verify_packing(&p).ok());
        assert_eq!(p.coverage(), crate::rational::int(1));
    }

    #[test]
    fn non_complete_host() {
        let k3 = Graph::complete(Order::Cyclic, 3);
        let host = Host::Graph(crate::graph::blowup(&k3, 3).unwrap());
        let p = greedy_maximal_packing(&k3, &host, 1).unwrap();
        assert!(verify_packing(&p).ok());
        assert_maximal(&p);
    }

    #[test]
    fn rejects_mismatch_and_edgeless() {
        let g = Graph::plane_cycle(4).unwrap();
        assert!(greedy_maximal_packing(&g, &Host::complete(Order::Linear, 9), 0).is_err());
        let e = Graph::edgeless(Order::Cyclic, 2);
        assert!(greedy_maximal_packing(&e, &Host::complete(Order::Cyclic, 9), 0).is_err());
        let big = Graph::plane_cycle(6).unwrap();
        let p = greedy_maximal_packing(&big, &Host::complete(Order::Cyclic, 4), 0).unwrap();
        assert!(p.is_empty());
    }
}
