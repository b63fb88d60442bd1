use std::collections::VecDeque;

use num_traits::{ToPrimitive, Zero};
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{pair_index, Packing};
use crate::error::{Error, Result};
use crate::graph::bits::{iter_ones, keep_range};
use crate::graph::{blowup, BitMatrix, Graph, Host, IntervalPartition};
use crate::lp::{weighted_representation, FractionalPacking};
use crate::rational::{self, Rational};

/// Bite fraction of the nibble.
pub const BITE: f64 = 0.05;

/// Explicit enumeration refuses families with more candidates than this.
pub const MAX_CANDIDATES: u64 = 20_000_000;

/// Spacing bound used inside intervals of length `t`: `max(1, floor(ln t))`.
pub fn delta_max(t: usize) -> usize {
    ((t.max(1) as f64).ln().floor() as usize).max(1)
}

/// Acceptance probability of a layout, kept exact where possible.
#[derive(Clone, Debug)]
enum Chance {
    Always,
    Ratio(u64, u64),
    Float(f64),
}

impl Chance {
    fn new(p: &Rational) -> Self {
        if *p >= rational::int(1) {
            return Chance::Always;
        }
        match (p.numer().to_u64(), p.denom().to_u64()) {
            (Some(a), Some(b)) => Chance::Ratio(a, b),
            _ => Chance::Float(rational::to_f64(p)),
        }
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> bool {
        match *self {
            Chance::Always => true,
            Chance::Ratio(a, b) => rng.random_range(0..b) < a,
            Chance::Float(p) => rng.random_bool(p),
        }
    }
}

/// Part `j` of the pattern goes into the host interval
/// `starts[j] .. starts[j] + lens[j]`.
#[derive(Clone, Debug)]
pub(crate) struct Layout {
    pub starts: Vec<usize>,
    pub lens: Vec<usize>,
    chance: Chance,
    weight: f64,
}

/// All copies of a pattern that put each part of an interval partition into
/// a prescribed host interval with consecutive part vertices exactly `delta`
/// apart, for `delta` in `1..=delta_max` (only `1` when every part is a
/// single vertex, since the spacing is then irrelevant).
#[derive(Clone, Debug)]
pub(crate) struct SpacedFamily {
    pattern: Graph,
    parts: Vec<Vec<usize>>,
    deltas: usize,
    layouts: Vec<Layout>,
    /// Neighbours of each pattern vertex in earlier parts.
    back: Vec<Vec<usize>>,
}

impl SpacedFamily {
    pub(crate) fn new(pattern: &Graph, partition: &IntervalPartition, delta_max: usize) -> Self {
        let parts = partition.parts();
        let part_of = partition.part_of();
        let mut back = vec![Vec::new(); pattern.n()];
        for (u, v) in pattern.edges() {
            let (a, b) = if part_of[u] < part_of[v] { (u, v) } else { (v, u) };
            back[b].push(a);
        }
        let spaced = parts.iter().any(|p| p.len() > 1);
        SpacedFamily {
            pattern: pattern.clone(),
            parts,
            deltas: if spaced { delta_max.max(1) } else { 1 },
            layouts: Vec::new(),
            back,
        }
    }

    pub(crate) fn add_layout(&mut self, starts: Vec<usize>, lens: Vec<usize>, prob: &Rational) {
        debug_assert_eq!(starts.len(), self.parts.len());
        let weight = rational::to_f64(prob) * self.layout_size(&lens) as f64;
        self.layouts.push(Layout {
            starts,
            lens,
            chance: Chance::new(prob),
            weight,
        });
    }

    pub(crate) fn deltas(&self) -> usize {
        self.deltas
    }

    fn start_range(&self, lens: &[usize], j: usize, delta: usize) -> usize {
        let span = (self.parts[j].len() - 1) * delta;
        lens[j].saturating_sub(span)
    }

    fn layout_size(&self, lens: &[usize]) -> u64 {
        (1..=self.deltas)
            .map(|d| {
                (0..self.parts.len())
                    .map(|j| self.start_range(lens, j, d) as u64)
                    .product::<u64>()
            })
            .sum()
    }

    pub(crate) fn size(&self) -> u64 {
        self.layouts.iter().map(|l| self.layout_size(&l.lens)).sum()
    }

    /// Expected number of kept candidates.
    pub(crate) fn expected_size(&self) -> f64 {
        self.layouts.iter().map(|l| l.weight).sum()
    }

    /// Host pairs between intervals joined by a pattern edge, summed over
    /// layouts with distinct intervals counted once.
    pub(crate) fn reachable_pairs(&self) -> u64 {
        let part_of: Vec<usize> = {
            let mut p = vec![0; self.pattern.n()];
            for (j, vs) in self.parts.iter().enumerate() {
                for &v in vs {
                    p[v] = j;
                }
            }
            p
        };
        let mut bundles = std::collections::BTreeSet::new();
        for l in &self.layouts {
            for (u, v) in self.pattern.edges() {
                let (a, b) = (part_of[u], part_of[v]);
                let key = (l.starts[a].min(l.starts[b]), l.starts[a].max(l.starts[b]));
                bundles.insert((key, l.lens[a] as u64 * l.lens[b] as u64));
            }
        }
        bundles.iter().map(|(_, c)| c).sum()
    }

    fn place(&self, layout: &Layout, delta: usize, offsets: &[usize], map: &mut [u32]) {
        for (j, part) in self.parts.iter().enumerate() {
            for (i, &v) in part.iter().enumerate() {
                map[v] = (layout.starts[j] + offsets[j] + i * delta) as u32;
            }
        }
    }

    /// Calls `f` on every copy, in a fixed order, after its layout's coin
    /// comes up.
    fn for_each_kept(&self, rng: &mut ChaCha8Rng, mut f: impl FnMut(&[u32])) {
        let k = self.pattern.n();
        let p = self.parts.len();
        let mut map = vec![0u32; k];
        for layout in &self.layouts {
            for delta in 1..=self.deltas {
                let ranges: Vec<usize> =
                    (0..p).map(|j| self.start_range(&layout.lens, j, delta)).collect();
                if ranges.contains(&0) {
                    continue;
                }
                let mut off = vec![0usize; p];
                loop {
                    if layout.chance.draw(rng) {
                        self.place(layout, delta, &off, &mut map);
                        f(&map);
                    }
                    let mut j = p;
                    loop {
                        if j == 0 {
                            break;
                        }
                        j -= 1;
                        off[j] += 1;
                        if off[j] < ranges[j] {
                            break;
                        }
                        off[j] = 0;
                    }
                    if off.iter().all(|&o| o == 0) {
                        break;
                    }
                }
            }
        }
    }

    /// A uniformly random delta and offsets within a layout drawn with
    /// weight proportional to its expected kept size.
    fn sample(&self, rng: &mut ChaCha8Rng, pick: &WeightedIndex<f64>, map: &mut [u32]) -> bool {
        let layout = &self.layouts[pick.sample(rng)];
        let delta = rng.random_range(1..=self.deltas);
        let mut off = Vec::with_capacity(self.parts.len());
        for j in 0..self.parts.len() {
            let r = self.start_range(&layout.lens, j, delta);
            if r == 0 {
                return false;
            }
            off.push(rng.random_range(0..r));
        }
        self.place(layout, delta, &off, map);
        true
    }

    fn edges_free(&self, free: &BitMatrix, map: &[u32]) -> bool {
        self.pattern
            .edges()
            .all(|(a, b)| free.get(map[a] as usize, map[b] as usize))
    }

    fn take(&self, free: &mut BitMatrix, map: &[u32]) {
        for (a, b) in self.pattern.edges() {
            free.clear_sym(map[a] as usize, map[b] as usize);
        }
    }

    /// Systematic pass adding every copy whose edges are all free, which
    /// leaves no copy of the family addable.
    pub(crate) fn sweep(&self, free: &mut BitMatrix, out: &mut Vec<u32>) -> usize {
        let mut added = 0;
        let mut map = vec![0u32; self.pattern.n()];
        for layout in &self.layouts {
            for delta in 1..=self.deltas {
                added += self.sweep_part(layout, delta, 0, &mut map, free, out);
            }
        }
        added
    }

    fn sweep_part(
        &self,
        layout: &Layout,
        delta: usize,
        j: usize,
        map: &mut Vec<u32>,
        free: &mut BitMatrix,
        out: &mut Vec<u32>,
    ) -> usize {
        if j == self.parts.len() {
            if self.edges_free(free, map) {
                self.take(free, map);
                out.extend_from_slice(map);
                return 1;
            }
            return 0;
        }
        let part = &self.parts[j];
        let range = self.start_range(&layout.lens, j, delta);
        if range == 0 {
            return 0;
        }
        let base = layout.starts[j];
        let pivot = part.iter().position(|&v| !self.back[v].is_empty());
        let candidates: Vec<usize> = match pivot {
            None => (0..range).collect(),
            Some(i) => {
                let nb = &self.back[part[i]];
                let mut row = free.row(map[nb[0]] as usize).to_vec();
                for &u in &nb[1..] {
                    for (w, x) in row.iter_mut().zip(free.row(map[u] as usize)) {
                        *w &= x;
                    }
                }
                let lo = base + i * delta;
                keep_range(&mut row, lo, lo + range);
                iter_ones(&row).map(|p| p - lo).collect()
            }
        };
        let mut added = 0;
        for s in candidates {
            let ok = part.iter().enumerate().all(|(i, &v)| {
                let pos = base + s + i * delta;
                self.back[v].iter().all(|&u| free.get(map[u] as usize, pos))
            });
            if ok {
                for (i, &v) in part.iter().enumerate() {
                    map[v] = (base + s + i * delta) as u32;
                }
                added += self.sweep_part(layout, delta, j + 1, map, free, out);
            }
        }
        added
    }
}

/// Counters from [`build_copy_hypergraph`].
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct HypergraphStats {
    /// Candidate copies enumerated before the inclusion coins.
    pub candidates: u64,
    /// Expected number of kept candidates.
    pub expected: f64,
    /// Kept candidates whose edge set repeats an earlier one.
    pub duplicates: u64,
    pub hyperedges: u64,
    pub delta_max: usize,
    pub warning: Option<String>,
}

/// Hyperedges of uniform size `r` over a vertex set of `vertex_count` ids.
/// When built from copies, vertex ids are host pairs and each hyperedge
/// remembers the copy that produced it.
#[derive(Clone, Debug)]
pub struct CopyHypergraph {
    r: usize,
    vertex_count: u64,
    edges: Vec<u64>,
    copies: Option<(Host, Graph, Vec<u32>)>,
    pub stats: HypergraphStats,
}

impl CopyHypergraph {
    /// An abstract hypergraph. Every hyperedge must have exactly `r`
    /// distinct vertices below `vertex_count`.
    pub fn from_hyperedges(vertex_count: u64, r: usize, hyperedges: &[Vec<u64>]) -> Result<Self> {
        let mut edges = Vec::with_capacity(hyperedges.len() * r);
        for h in hyperedges {
            let mut s = h.clone();
            s.sort_unstable();
            s.dedup();
            if s.len() != r || h.len() != r {
                return Err(Error::param("hyperedge size differs from r or repeats a vertex"));
            }
            if s.last().is_some_and(|&v| v >= vertex_count) {
                return Err(Error::param("hyperedge vertex out of range"));
            }
            edges.extend(s);
        }
        let stats = HypergraphStats {
            hyperedges: hyperedges.len() as u64,
            ..Default::default()
        };
        Ok(CopyHypergraph {
            r,
            vertex_count,
            edges,
            copies: None,
            stats,
        })
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn vertex_count(&self) -> u64 {
        self.vertex_count
    }

    pub fn len(&self) -> usize {
        self.edges.len().checked_div(self.r).unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    /// Sorted vertex ids of hyperedge `i`.
    pub fn hyperedge(&self, i: usize) -> &[u64] {
        &self.edges[i * self.r..(i + 1) * self.r]
    }

    /// The copy behind hyperedge `i`, if the hypergraph was built from copies.
    pub fn copy(&self, i: usize) -> Option<&[u32]> {
        self.copies.as_ref().map(|(_, g, maps)| {
            let k = g.n();
            &maps[i * k..(i + 1) * k]
        })
    }

    /// Number of vertices lying in at least one hyperedge.
    pub fn active_vertices(&self) -> u64 {
        let mut v = self.edges.clone();
        v.sort_unstable();
        v.dedup();
        v.len() as u64
    }

    /// The selected hyperedges as a packing of the copies' host.
    pub fn to_packing(&self, selected: &[usize]) -> Result<Packing> {
        let (host, pattern, _) = self
            .copies
            .as_ref()
            .ok_or_else(|| Error::param("hypergraph was not built from copies"))?;
        let mut p = Packing::new(host.clone(), pattern.clone());
        for &i in selected {
            p.push(self.copy(i).expect("copies present"));
        }
        Ok(p)
    }
}

/// The δ-spaced copies of `g` in `h[t]` with one layout per placement of
/// positive coefficient in `phi`, kept with probability `phi / max phi`.
pub(crate) fn blowup_family(
    g: &Graph,
    partition: &IntervalPartition,
    h: &Graph,
    phi: &FractionalPacking,
    t: usize,
) -> Result<SpacedFamily> {
    if t == 0 {
        return Err(Error::param("blowup factor must be positive"));
    }
    let w = weighted_representation(g, partition)?;
    if phi.pattern() != &w {
        return Err(Error::pre("phi does not pack the weighted representation of g"));
    }
    if phi.host_n() != h.n() {
        return Err(Error::pre("phi lives on a host of a different size"));
    }
    phi.verify_against_graph(h)
        .map_err(|e| Error::pre(format!("phi is not a perfect fractional packing: {e}")))?;
    let mut family = SpacedFamily::new(g, partition, delta_max(t));
    let phi_max = phi.max_coef();
    if !phi_max.is_zero() {
        for pl in phi.aggregated().entries() {
            if pl.coef.is_zero() {
                continue;
            }
            let starts = pl.map.iter().map(|&v| v * t).collect();
            family.add_layout(starts, vec![t; pl.map.len()], &(&pl.coef / &phi_max));
        }
    }
    Ok(family)
}

/// Copy hypergraph of `g` inside the blowup `h[t]`.
///
/// `phi` is a fractional packing of the weighted representation `W` of `g`
/// (from `partition`) into `h`. Every placement of `W` with positive
/// coefficient fixes which blowup interval receives each part; inside the
/// intervals the part vertices sit `delta` apart. Each such copy is kept with
/// probability `phi / max phi`. Copies with the same edge set are kept once.
pub fn build_copy_hypergraph(
    g: &Graph,
    partition: &IntervalPartition,
    h: &Graph,
    phi: &FractionalPacking,
    t: usize,
    seed: u64,
) -> Result<CopyHypergraph> {
    let family = blowup_family(g, partition, h, phi, t)?;
    let host = Host::Graph(blowup(h, t)?);
    let n = host.n();
    let mut stats = HypergraphStats {
        delta_max: family.deltas(),
        ..Default::default()
    };
    stats.candidates = family.size();
    stats.expected = family.expected_size();
    if stats.candidates > MAX_CANDIDATES {
        return Err(Error::param(format!(
            "{} candidate copies exceed the enumeration limit of {MAX_CANDIDATES}",
            stats.candidates
        )));
    }
    if stats.candidates == 0 && !family.layouts.is_empty() {
        stats.warning = Some(format!(
            "blowup factor {t} is too small for the largest part; no copy fits"
        ));
    }
    let k = g.n();
    let r = g.edge_count();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut maps: Vec<u32> = Vec::new();
    let mut keys: Vec<u64> = Vec::new();
    family.for_each_kept(&mut rng, |map| {
        debug_assert!(crate::graph::is_order_preserving(
            g.order(),
            n,
            &map.iter().map(|&v| v as usize).collect::<Vec<_>>()
        ));
        let start = keys.len();
        keys.extend(
            g.edges()
                .map(|(a, b)| pair_index(n, map[a] as usize, map[b] as usize) as u64),
        );
        keys[start..].sort_unstable();
        maps.extend_from_slice(map);
    });
    let kept = if r == 0 { 0 } else { keys.len() / r };
    let mut idx: Vec<usize> = (0..kept).collect();
    idx.sort_by(|&a, &b| keys[a * r..(a + 1) * r].cmp(&keys[b * r..(b + 1) * r]).then(a.cmp(&b)));
    idx.dedup_by(|b, a| keys[*a * r..(*a + 1) * r] == keys[*b * r..(*b + 1) * r]);
    idx.sort_unstable();
    stats.duplicates = (kept - idx.len()) as u64;
    stats.hyperedges = idx.len() as u64;
    let mut edges = Vec::with_capacity(idx.len() * r);
    let mut copies = Vec::with_capacity(idx.len() * k);
    for &i in &idx {
        edges.extend_from_slice(&keys[i * r..(i + 1) * r]);
        copies.extend_from_slice(&maps[i * k..(i + 1) * k]);
    }
    Ok(CopyHypergraph {
        r,
        vertex_count: (n * n.saturating_sub(1) / 2) as u64,
        edges,
        copies: Some((host, g.clone(), copies)),
        stats,
    })
}

/// Outcome counters of a nibble run.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct NibbleStats {
    pub rounds: usize,
    pub selected: usize,
    /// Vertices lying in some hyperedge (the host pairs that can be covered).
    pub active_vertices: u64,
    /// `selected * r / active_vertices`.
    pub matched_fraction: f64,
    /// Whether `selected >= (1 - epsilon) * active_vertices / r`.
    pub meets_target: bool,
    /// Copies added by the closing systematic sweep (implicit families only).
    pub swept: usize,
}

struct VertexSet(Vec<u64>);

impl VertexSet {
    fn new(n: u64) -> Self {
        VertexSet(vec![0; n.div_ceil(64) as usize])
    }
    fn has(&self, v: u64) -> bool {
        self.0[(v / 64) as usize] >> (v % 64) & 1 == 1
    }
    fn set(&mut self, v: u64) {
        self.0[(v / 64) as usize] |= 1 << (v % 64);
    }
}

/// Randomized matching in the nibble style.
///
/// Hyperedges are shuffled and consumed in bites of `BITE * free / r`, where
/// `free` counts active vertices not yet matched. Inside a bite, hyperedges
/// that share no vertex with another live member of the bite are accepted;
/// the rest go back to the end of the queue while still disjoint from the
/// matching. A bite in which everything collides accepts its first member.
/// Hyperedges leave the queue only when accepted or blocked, so the result
/// is a maximal matching.
pub fn nibble_matching(hg: &CopyHypergraph, epsilon: f64, seed: u64) -> (Vec<usize>, NibbleStats) {
    let r = hg.r().max(1);
    let active = hg.active_vertices();
    let mut stats = NibbleStats {
        active_vertices: active,
        ..Default::default()
    };
    let mut order: Vec<usize> = (0..hg.len()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    order.shuffle(&mut rng);
    let mut queue: VecDeque<usize> = order.into();
    let mut used = VertexSet::new(hg.vertex_count());
    let mut selected = Vec::new();
    let mut free = active;
    let mut seen: std::collections::HashMap<u64, u32> = std::collections::HashMap::new();
    let alive = |used: &VertexSet, i: usize| hg.hyperedge(i).iter().all(|&v| !used.has(v));
    while !queue.is_empty() {
        stats.rounds += 1;
        let bite = ((BITE * free as f64 / r as f64) as usize).max(1);
        let mut batch = Vec::with_capacity(bite);
        while batch.len() < bite {
            match queue.pop_front() {
                Some(i) if alive(&used, i) => batch.push(i),
                Some(_) => {}
                None => break,
            }
        }
        if batch.is_empty() {
            break;
        }
        seen.clear();
        for &i in &batch {
            for &v in hg.hyperedge(i) {
                *seen.entry(v).or_insert(0) += 1;
            }
        }
        let mut accepted = 0;
        let mut rest = Vec::new();
        for &i in &batch {
            if hg.hyperedge(i).iter().all(|v| seen[v] == 1) {
                for &v in hg.hyperedge(i) {
                    used.set(v);
                }
                selected.push(i);
                accepted += 1;
            } else {
                rest.push(i);
            }
        }
        if accepted == 0 {
            let i = rest.remove(0);
            for &v in hg.hyperedge(i) {
                used.set(v);
            }
            selected.push(i);
            accepted = 1;
        }
        free = free.saturating_sub((accepted * r) as u64);
        queue.extend(rest.into_iter().filter(|&i| alive(&used, i)));
    }
    finish_stats(&mut stats, selected.len(), r, epsilon);
    (selected, stats)
}

fn finish_stats(stats: &mut NibbleStats, selected: usize, r: usize, epsilon: f64) {
    stats.selected = selected;
    let active = stats.active_vertices as f64;
    stats.matched_fraction = if active > 0.0 {
        (selected * r) as f64 / active
    } else {
        0.0
    };
    stats.meets_target = selected as f64 >= (1.0 - epsilon) * active / r as f64;
}

/// Nibble over a family too large to list. Bites are uniform samples from
/// the family; a sample is accepted when its edges are free and it shares
/// no edge with another accepted-eligible sample of the same bite. Sampling
/// stops once a bite accepts under 2% of its members, and a systematic sweep
/// then makes the result maximal. Accepted copies are appended to `out` and
/// their edges cleared from `free`.
pub(crate) fn implicit_nibble(
    family: &SpacedFamily,
    free: &mut BitMatrix,
    epsilon: f64,
    rng: &mut ChaCha8Rng,
    out: &mut Vec<u32>,
) -> NibbleStats {
    let k = family.pattern.n();
    let r = family.pattern.edge_count().max(1);
    let n = free.n();
    let active = family.reachable_pairs();
    let mut stats = NibbleStats {
        active_vertices: active,
        ..Default::default()
    };
    let weights: Vec<f64> = family.layouts.iter().map(|l| l.weight).collect();
    let Ok(pick) = WeightedIndex::new(&weights) else {
        finish_stats(&mut stats, 0, r, epsilon);
        return stats;
    };
    let mut remaining = active;
    let mut selected = 0usize;
    let mut batch: Vec<u32> = Vec::new();
    let mut keys: Vec<(u64, u32)> = Vec::new();
    let mut map = vec![0u32; k];
    loop {
        stats.rounds += 1;
        let bite = ((BITE * remaining as f64 / r as f64) as usize).max(16);
        batch.clear();
        keys.clear();
        for _ in 0..bite {
            if family.sample(rng, &pick, &mut map) && family.edges_free(free, &map) {
                let id = (batch.len() / k) as u32;
                for (a, b) in family.pattern.edges() {
                    let e = pair_index(n, map[a] as usize, map[b] as usize) as u64;
                    keys.push((e, id));
                }
                batch.extend_from_slice(&map);
            }
        }
        keys.sort_unstable();
        let mut clash = vec![false; batch.len() / k];
        for w in keys.windows(2) {
            if w[0].0 == w[1].0 {
                clash[w[0].1 as usize] = true;
                clash[w[1].1 as usize] = true;
            }
        }
        let mut accepted = 0;
        for (i, c) in batch.chunks_exact(k).enumerate() {
            if !clash[i] {
                family.take(free, c);
                out.extend_from_slice(c);
                accepted += 1;
            }
        }
        selected += accepted;
        remaining = remaining.saturating_sub((accepted * r) as u64);
        if (accepted as f64) < 0.02 * bite as f64 {
            break;
        }
    }
    stats.swept = family.sweep(free, out);
    let total = selected + stats.swept;
    finish_stats(&mut stats, total, r, epsilon);
    stats
}
