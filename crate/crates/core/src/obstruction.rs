//! Edge-length statistics of `K_n` and upper bounds on packing coverage.
//!
//! A copy of `G` in the cyclic `K_n` has total edge length at most `L`
//! (the maximum over all placements). If a packing has `c` copies, it covers
//! `M = c |E(G)|` edges of total length at most `c L = M L / |E(G)|`. Any
//! `M` edges of `K_n` have total length at least that of the `M` shortest
//! edges, `S(M)`. Hence `|E(G)| S(M) <= M L`, and since `S(M)/M` is
//! nondecreasing the largest such `M` bounds every packing. The bound is
//! exact integer arithmetic and valid for every odd `n`.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Graph, Order};
use crate::rational::{self, Rational};

/// Exact-mode limits for the brute force over placements.
pub const EXACT_MAX_VERTICES: usize = 8;
pub const EXACT_MAX_N: usize = 60;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LengthProfile {
    pub n: usize,
    /// Edge count of each length.
    pub counts: BTreeMap<usize, u64>,
    pub total_length: u64,
}

/// Lengths of all edges of the cyclic `K_n`. For even `n` the diameter
/// length `n/2` has only `n/2` edges.
pub fn length_profile(n: usize) -> Result<LengthProfile> {
    if n < 3 {
        return Err(Error::param("length profile needs n >= 3"));
    }
    let mut counts = BTreeMap::new();
    for l in 1..=n / 2 {
        let c = if 2 * l == n { n / 2 } else { n };
        counts.insert(l, c as u64);
    }
    let total_length = counts.iter().map(|(&l, &c)| l as u64 * c).sum();
    Ok(LengthProfile {
        n,
        counts,
        total_length,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundMode {
    /// Brute force over all placements; the true maximum.
    Exact,
    /// For subgraphs of the plane cycle: consecutive gaps sum to `n`.
    CycleBound,
}

/// `true` when every edge joins cyclically consecutive vertices.
fn is_plane_cycle_subgraph(g: &Graph) -> bool {
    let k = g.n();
    g.edges().all(|(u, v)| (u + 1) % k == v || (v + 1) % k == u)
}

/// Maximum total edge length of a copy of `g` in the cyclic `K_n`, exactly
/// by brute force or as the cycle bound `n`. With `mode = None` the exact
/// search is used within its limits and the cycle bound otherwise.
pub fn max_copy_total_length(
    g: &Graph,
    n: usize,
    mode: Option<BoundMode>,
) -> Result<(u64, BoundMode)> {
    if g.order() != Order::Cyclic {
        return Err(Error::param("obstruction bounds are defined for cggs"));
    }
    let k = g.n();
    if k > n {
        return Err(Error::param(format!("pattern has {k} vertices, host only {n}")));
    }
    let exact_ok = k <= EXACT_MAX_VERTICES && n <= EXACT_MAX_N;
    let mode = match mode {
        Some(m) => m,
        None if exact_ok => BoundMode::Exact,
        None => BoundMode::CycleBound,
    };
    match mode {
        BoundMode::Exact if !exact_ok => Err(Error::param(format!(
            "exact mode needs |V| <= {EXACT_MAX_VERTICES} and n <= {EXACT_MAX_N}; \
             use cycle-bound mode"
        ))),
        BoundMode::Exact => Ok((exact_max_length(g, n), mode)),
        BoundMode::CycleBound if k >= 2 && is_plane_cycle_subgraph(g) => Ok((n as u64, mode)),
        BoundMode::CycleBound => Err(Error::param(
            "cycle-bound mode needs a subgraph of the plane cycle; use exact mode",
        )),
    }
}

/// Host rotations let pattern vertex 0 sit at 0; the others then take
/// increasing positions. Branches are cut when even maximal lengths on the
/// remaining edges cannot beat the best total found.
fn exact_max_length(g: &Graph, n: usize) -> u64 {
    let k = g.n();
    if k < 2 || g.edge_count() == 0 {
        return 0;
    }
    let mut back = vec![Vec::new(); k];
    for (u, v) in g.edges() {
        back[u.max(v)].push(u.min(v));
    }
    let later: Vec<u64> = (0..k)
        .map(|i| back[i..].iter().map(|b| b.len() as u64).sum())
        .collect();
    let len = |a: usize, b: usize| {
        let d = a.abs_diff(b);
        d.min(n - d) as u64
    };
    struct Ctx<'a> {
        n: usize,
        k: usize,
        back: &'a [Vec<usize>],
        later: &'a [u64],
        best: u64,
    }
    fn go(c: &mut Ctx, pos: &mut Vec<usize>, total: u64, len: &dyn Fn(usize, usize) -> u64) {
        let i = pos.len();
        if i == c.k {
            c.best = c.best.max(total);
            return;
        }
        if total + c.later[i] * (c.n / 2) as u64 <= c.best {
            return;
        }
        let lo = pos[i - 1] + 1;
        let hi = c.n - (c.k - i);
        for p in lo..=hi {
            let add: u64 = c.back[i].iter().map(|&j| len(pos[j], p)).sum();
            pos.push(p);
            go(c, pos, total + add, len);
            pos.pop();
        }
    }
    let mut ctx = Ctx {
        n,
        k,
        back: &back,
        later: &later,
        best: 0,
    };
    go(&mut ctx, &mut vec![0], 0, &len);
    ctx.best
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObstructionReport {
    pub n: usize,
    #[serde(rename = "L")]
    pub l: u64,
    #[serde(with = "crate::rational::serde_str")]
    pub bound: Rational,
    pub mode: BoundMode,
}

/// Total length of the `m` shortest edges of `K_n`, `n` odd.
fn shortest_sum(n: u128, m: u128) -> u128 {
    let (q, r) = (m / n, m % n);
    n * q * (q + 1) / 2 + r * (q + 1)
}

/// Largest fraction of `K_n` (odd `n`) that a `g`-packing can cover by the
/// shortest-edges argument in the module docs.
pub fn coverage_upper_bound(g: &Graph, n: usize, mode: Option<BoundMode>) -> Result<ObstructionReport> {
    if n % 2 == 0 {
        return Err(Error::param(
            "coverage bounds need odd n (length n/2 would have only n/2 edges)",
        ));
    }
    let e = g.edge_count() as u128;
    if e == 0 {
        return Err(Error::param("the pattern has no edges"));
    }
    let (l, mode) = max_copy_total_length(g, n, mode)?;
    let total = (n as u128) * (n as u128 - 1) / 2;
    let ok = |m: u128| e * shortest_sum(n as u128, m) <= m * l as u128;
    let (mut lo, mut hi) = (0u128, total);
    while lo < hi {
        let mid = (lo + hi).div_ceil(2);
        if ok(mid) {
            lo = mid;
        } else {
            hi = mid - 1;
        }
    }
    Ok(ObstructionReport {
        n,
        l,
        bound: Rational::new(BigInt::from(lo), BigInt::from(total)),
        mode,
    })
}

/// `achieved <= bound`, both exact.
pub fn within_bound(achieved: &Rational, report: &ObstructionReport) -> bool {
    achieved <= &report.bound
}

/// The bound as a float, for tables.
pub fn bound_f64(report: &ObstructionReport) -> f64 {
    rational::to_f64(&report.bound)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::int;

    fn brute(g: &Graph, n: usize) -> u64 {
        // every order-preserving map, no symmetry reduction
        let k = g.n();
        let mut best = 0;
        let mut idx: Vec<usize> = (0..k).collect();
        loop {
            for r in 0..k {
                let f: Vec<usize> = (0..k).map(|i| idx[(i + r) % k]).collect();
                let s: u64 = g
                    .edges()
                    .map(|(a, b)| {
                        let d = f[a].abs_diff(f[b]);
                        d.min(n - d) as u64
                    })
                    .sum();
                best = best.max(s);
            }
            let mut i = k;
            loop {
                if i == 0 {
                    return best;
                }
                i -= 1;
                if idx[i] < n - k + i {
                    idx[i] += 1;
                    for j in i + 1..k {
                        idx[j] = idx[j - 1] + 1;
                    }
                    break;
                }
            }
        }
    }

    #[test]
    fn profiles() {
        let p = length_profile(5).unwrap();
        assert_eq!(p.counts, BTreeMap::from([(1, 5), (2, 5)]));
        assert_eq!(p.total_length, 15);
        let p = length_profile(7).unwrap();
        assert_eq!(p.counts, BTreeMap::from([(1, 7), (2, 7), (3, 7)]));
        assert_eq!(p.total_length, 42);
        let p = length_profile(4).unwrap();
        assert_eq!(p.counts, BTreeMap::from([(1, 4), (2, 2)]));
        assert_eq!(p.total_length, 8);
        for n in 3..40 {
            let p = length_profile(n).unwrap();
            assert_eq!(p.counts.values().sum::<u64>(), (n * (n - 1) / 2) as u64);
        }
    }

    #[test]
    fn max_lengths() {
        let c5 = Graph::plane_cycle(5).unwrap();
        assert_eq!(max_copy_total_length(&c5, 25, None).unwrap(), (25, BoundMode::Exact));
        let e = Graph::cgg(2, [(0, 1)]).unwrap();
        for n in [5usize, 9, 31] {
            assert_eq!(max_copy_total_length(&e, n, None).unwrap().0, (n as u64 - 1) / 2);
        }
        let k3 = Graph::complete(Order::Cyclic, 3);
        assert_eq!(max_copy_total_length(&k3, 7, None).unwrap().0, 7);
        let diag = Graph::cgg(4, [(0, 2), (1, 3), (0, 1)]).unwrap();
        for n in [6usize, 9, 12] {
            assert_eq!(max_copy_total_length(&diag, n, None).unwrap().0, brute(&diag, n));
        }
    }

    #[test]
    fn plane_cycles_reach_n() {
        for k in 3..=6 {
            let c = Graph::plane_cycle(k).unwrap();
            for n in (2 * k..=40).step_by(3) {
                let (l, _) = max_copy_total_length(&c, n, Some(BoundMode::Exact)).unwrap();
                assert_eq!(l, n as u64, "C{k} in K{n}");
            }
        }
    }

    #[test]
    fn mode_errors() {
        let k4 = Graph::complete(Order::Cyclic, 4);
        assert!(max_copy_total_length(&k4, 61, None).is_err());
        assert!(max_copy_total_length(&k4, 61, Some(BoundMode::Exact)).is_err());
        let c9 = Graph::plane_cycle(9).unwrap();
        assert!(max_copy_total_length(&c9, 30, Some(BoundMode::Exact)).is_err());
        assert_eq!(max_copy_total_length(&c9, 30, None).unwrap(), (30, BoundMode::CycleBound));
        assert!(coverage_upper_bound(&c9, 30, None).is_err());
    }

    #[test]
    fn bounds() {
        let e = Graph::cgg(2, [(0, 1)]).unwrap();
        for n in (3..=101).step_by(2) {
            assert_eq!(coverage_upper_bound(&e, n, None).unwrap().bound, int(1));
        }
        let k3 = Graph::complete(Order::Cyclic, 3);
        assert_eq!(coverage_upper_bound(&k3, 7, None).unwrap().bound, int(1));
        let c5 = Graph::plane_cycle(5).unwrap();
        let r = coverage_upper_bound(&c5, 301, None).unwrap();
        assert!((bound_f64(&r) - 0.8).abs() < 0.02, "{}", bound_f64(&r));
        assert_eq!(r.mode, BoundMode::CycleBound);
    }

    #[test]
    fn cycle_family_is_ordered() {
        let bounds: Vec<Rational> = (3..=7)
            .map(|k| {
                let c = Graph::plane_cycle(k).unwrap();
                coverage_upper_bound(&c, 41, None).unwrap().bound
            })
            .collect();
        assert_eq!(bounds[0], int(1));
        assert!(bounds.windows(2).all(|w| w[0] > w[1]), "{bounds:?}");
    }

    #[test]
    fn report_json() {
        let c5 = Graph::plane_cycle(5).unwrap();
        let r = coverage_upper_bound(&c5, 25, None).unwrap();
        let js = serde_json::to_string(&r).unwrap();
        assert!(js.starts_with(r#"{"n":25,"L":25,"bound":""#), "{js}");
        assert!(js.ends_with(r#","mode":"exact"}"#));
        assert_eq!(serde_json::from_str::<ObstructionReport>(&js).unwrap(), r);
    }
}
