use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use super::fractional::FractionalPacking;
use crate::error::{Error, Result};
use crate::graph::{pair_length, Graph, IntervalPartition, Order};
use crate::rational::{self, Rational};

/// A complete cgg on `k` vertices with a nonnegative rational weight on
/// every edge.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct WeightedCgg {
    k: usize,
    weights: Vec<Rational>,
}

#[inline]
fn pair_index(k: usize, u: usize, v: usize) -> usize {
    let (u, v) = if u < v { (u, v) } else { (v, u) };
    u * k - u * (u + 1) / 2 + (v - u - 1)
}

impl WeightedCgg {
    pub fn from_fn(k: usize, mut f: impl FnMut(usize, usize) -> Rational) -> Result<Self> {
        let mut weights = Vec::with_capacity(k * k.saturating_sub(1) / 2);
        for u in 0..k {
            for v in u + 1..k {
                let w = f(u, v);
                if w.is_negative() {
                    return Err(Error::param(format!("negative weight on ({u}, {v})")));
                }
                weights.push(w);
            }
        }
        Ok(WeightedCgg { k, weights })
    }

    /// Every edge of length `l` gets `by_length[l-1]`, for `l = 1..=k/2`.
    pub fn from_length_weights(k: usize, by_length: &[Rational]) -> Result<Self> {
        if k < 2 {
            return Err(Error::param("a weighted cgg needs at least 2 vertices"));
        }
        if by_length.len() != k / 2 {
            return Err(Error::param(format!(
                "expected {} length weights for k = {k}, got {}",
                k / 2,
                by_length.len()
            )));
        }
        Self::from_fn(k, |u, v| by_length[pair_length(Order::Cyclic, k, u, v) - 1].clone())
    }

    /// Every edge weight 1.
    pub fn unit(k: usize) -> Self {
        Self::from_fn(k, |_, _| rational::int(1)).expect("unit weights are nonnegative")
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn weight(&self, u: usize, v: usize) -> &Rational {
        &self.weights[pair_index(self.k, u, v)]
    }

    pub fn length(&self, u: usize, v: usize) -> usize {
        pair_length(Order::Cyclic, self.k, u, v)
    }

    pub fn max_length(&self) -> usize {
        self.k / 2
    }

    /// `(u, v, weight)` for all pairs `u < v`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, &Rational)> + '_ {
        let k = self.k;
        (0..k)
            .flat_map(move |u| (u + 1..k).map(move |v| (u, v)))
            .map(|(u, v)| (u, v, self.weight(u, v)))
    }

    pub fn total_weight(&self) -> Rational {
        self.weights.iter().fold(Rational::zero(), |a, w| a + w)
    }

    /// Weights per length when the weighting is constant on each length class.
    pub fn length_weights(&self) -> Option<Vec<Rational>> {
        let mut out: Vec<Option<Rational>> = vec![None; self.max_length()];
        for (u, v, w) in self.edges() {
            let slot = &mut out[self.length(u, v) - 1];
            match slot {
                None => *slot = Some(w.clone()),
                Some(prev) if prev != w => return None,
                _ => {}
            }
        }
        out.into_iter().collect()
    }

    pub fn is_length_uniform(&self) -> bool {
        self.length_weights().is_some()
    }

    /// The cgg formed by the positive-weight edges.
    pub fn support_graph(&self) -> Graph {
        let edges: Vec<(usize, usize)> = self
            .edges()
            .filter(|(_, _, w)| w.is_positive())
            .map(|(u, v, _)| (u, v))
            .collect();
        Graph::cgg(self.k, edges).expect("pairs are distinct")
    }

    /// `self` relabelled by `i -> i + r (mod k)`.
    pub fn rotated(&self, r: usize) -> Self {
        let k = self.k;
        Self::from_fn(k, |u, v| {
            self.weight((u + k - r % k) % k, (v + k - r % k) % k).clone()
        })
        .expect("rotation keeps weights nonnegative")
    }

    pub fn scaled(&self, c: &Rational) -> Result<Self> {
        Self::from_fn(self.k, |u, v| self.weight(u, v) * c)
    }
}

/// The weighted representation of `g` built from a valid interval partition:
/// one vertex per interval, weight = number of edges between the intervals.
pub fn weighted_representation(g: &Graph, p: &IntervalPartition) -> Result<WeightedCgg> {
    if g.order() != Order::Cyclic {
        return Err(Error::param("weighted representations are defined for cggs"));
    }
    if !p.is_valid_for(g) {
        return Err(Error::pre("partition has an edge inside one interval"));
    }
    let part = p.part_of();
    let k = p.k();
    let mut counts = vec![0i64; k * k];
    for (u, v) in g.edges() {
        let (a, b) = (part[u], part[v]);
        counts[a * k + b] += 1;
        counts[b * k + a] += 1;
    }
    WeightedCgg::from_fn(k, |a, b| rational::int(counts[a * k + b]))
}

/// A length-uniform weighted cgg together with the fractional packing of the
/// original weighting into it made of the `k` rotations.
#[derive(Clone, Debug)]
pub struct Uniformized {
    pub uniform: WeightedCgg,
    pub rotations: FractionalPacking,
}

/// Aggregates the weights of `w` per length: `w_l` is the total weight of
/// length-`l` edges, doubled for the diameter length `k/2` when `k` is even.
/// Returns the rotation packing that certifies `w` packs fractionally into
/// the result.
pub fn uniformize_by_rotation(w: &WeightedCgg) -> Result<Uniformized> {
    let k = w.k();
    if k < 2 {
        return Err(Error::param("uniformizing needs at least 2 vertices"));
    }
    let mut per_length = vec![Rational::zero(); w.max_length()];
    for (u, v, x) in w.edges() {
        per_length[w.length(u, v) - 1] += x;
    }
    if k % 2 == 0 {
        let last = per_length.last_mut().unwrap();
        *last = &*last * BigInt::from(2);
    }
    let uniform = WeightedCgg::from_length_weights(k, &per_length)?;
    let placements = (0..k).map(|r| ((0..k).map(|i| (i + r) % k).collect(), rational::int(1)));
    let rotations = FractionalPacking::new(w.clone(), k, placements.collect())?.aggregated();
    Ok(Uniformized { uniform, rotations })
}

/// Edge-length class sizes of an interval partition with `2k` parts.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LongEdgeReport {
    pub k: usize,
    /// `sizes[l-1] = |E_l|` for `l = 1..=k`.
    pub sizes: Vec<u64>,
    pub c_k: u64,
    pub holds: bool,
}

/// Evaluates `E_1 != {} && |E_k| >= 16k * sum_{l<k} |E_l|` for a partition
/// of `g` into `2k` intervals.
pub fn long_edge_condition(g: &Graph, p: &IntervalPartition, k: usize) -> Result<LongEdgeReport> {
    if k <= 2 {
        return Err(Error::param("long-edge condition needs k > 2"));
    }
    if p.k() != 2 * k {
        return Err(Error::param(format!(
            "partition has {} parts, expected 2k = {}",
            p.k(),
            2 * k
        )));
    }
    let w = weighted_representation(g, p)?;
    let mut sizes = vec![0u64; k];
    for (u, v, x) in w.edges() {
        let count = u64::try_from(x.to_integer()).expect("edge counts are small integers");
        sizes[p.pair_length(u, v) - 1] += count;
    }
    let c_k = 16 * k as u64;
    let shorter: u64 = sizes[..k - 1].iter().sum();
    let holds = sizes[0] > 0 && sizes[k - 1] >= c_k * shorter;
    Ok(LongEdgeReport {
        k,
        sizes,
        c_k,
        holds,
    })
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawWeighted {
    k: usize,
    weights: BTreeMap<String, String>,
}

impl Serialize for WeightedCgg {
    /// Length-uniform weightings are written per length (`"1": "p/q"`),
    /// others per edge (`"u-v": "p/q"`).
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let weights = match self.length_weights() {
            Some(ls) => ls
                .iter()
                .enumerate()
                .map(|(i, w)| ((i + 1).to_string(), rational::format(w)))
                .collect(),
            None => self
                .edges()
                .map(|(u, v, w)| (format!("{u}-{v}"), rational::format(w)))
                .collect(),
        };
        RawWeighted { k: self.k, weights }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for WeightedCgg {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let raw = RawWeighted::deserialize(d)?;
        parse_weights(raw.k, &raw.weights).map_err(D::Error::custom)
    }
}

fn parse_weights(k: usize, map: &BTreeMap<String, String>) -> Result<WeightedCgg> {
    let by_length = map.keys().all(|key| !key.contains('-'));
    if by_length {
        let mut ls = vec![None; k / 2];
        for (key, val) in map {
            let l: usize = key
                .parse()
                .map_err(|_| Error::Parse(format!("bad length key {key:?}")))?;
            if l == 0 || l > k / 2 {
                return Err(Error::Parse(format!("length {l} out of range for k = {k}")));
            }
            ls[l - 1] = Some(rational::parse(val)?);
        }
        let ls: Option<Vec<Rational>> = ls.into_iter().collect();
        let ls = ls.ok_or_else(|| Error::Parse("every length needs a weight".into()))?;
        WeightedCgg::from_length_weights(k, &ls)
    } else {
        let mut edges = BTreeMap::new();
        for (key, val) in map {
            let (a, b) = key
                .split_once('-')
                .ok_or_else(|| Error::Parse(format!("bad edge key {key:?}")))?;
            let parse = |x: &str| {
                x.parse::<usize>()
                    .map_err(|_| Error::Parse(format!("bad edge key {key:?}")))
            };
            let (u, v) = (parse(a)?, parse(b)?);
            if u == v || u >= k || v >= k {
                return Err(Error::Parse(format!("edge {key:?} out of range")));
            }
            if edges.insert((u.min(v), u.max(v)), rational::parse(val)?).is_some() {
                return Err(Error::Parse(format!("duplicate edge {key:?}")));
            }
        }
        if edges.len() != k * k.saturating_sub(1) / 2 {
            return Err(Error::Parse("every edge needs a weight".into()));
        }
        WeightedCgg::from_fn(k, |u, v| edges[&(u, v)].clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::cyclic_chromatic_number;
    use crate::rational::{frac, int};

    fn figure_two_h() -> Graph {
        Graph::cgg(5, [(0, 1), (1, 2), (2, 3), (3, 1), (1, 4), (0, 4)]).unwrap()
    }

    #[test]
    fn figure_two_representation() {
        let h = figure_two_h();
        let p = IntervalPartition::new(Order::Cyclic, 5, vec![0, 1, 2, 3]).unwrap();
        let w = weighted_representation(&h, &p).unwrap();
        let sides: Vec<_> = (0..4).map(|i| w.weight(i, (i + 1) % 4).clone()).collect();
        assert_eq!(sides, vec![int(1); 4]);
        assert_eq!(w.weight(1, 3), &int(2));
        assert_eq!(w.weight(0, 2), &int(0));
        // the chromatic witness gives the same multiset of weights
        let (_, witness) = cyclic_chromatic_number(&h).unwrap();
        let w2 = weighted_representation(&h, &witness).unwrap();
        assert_eq!(w2.total_weight(), int(6));
    }

    #[test]
    fn singleton_and_invalid_partitions() {
        let k4 = Graph::complete(Order::Cyclic, 4);
        let p = IntervalPartition::singletons(Order::Cyclic, 4).unwrap();
        assert_eq!(weighted_representation(&k4, &p).unwrap(), WeightedCgg::unit(4));
        let c6 = Graph::plane_cycle(6).unwrap();
        let p = IntervalPartition::new(Order::Cyclic, 6, vec![0, 2, 4]).unwrap();
        assert!(matches!(
            weighted_representation(&c6, &p),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn uniformize_four_vertices() {
        let h = figure_two_h();
        let p = IntervalPartition::new(Order::Cyclic, 5, vec![0, 1, 2, 3]).unwrap();
        let w = weighted_representation(&h, &p).unwrap();
        let u = uniformize_by_rotation(&w).unwrap();
        assert_eq!(u.uniform.length_weights().unwrap(), vec![int(4), int(4)]);
        u.rotations.verify_against_weighted(&u.uniform).unwrap();
    }

    #[test]
    fn uniformize_triangle() {
        let w = WeightedCgg::from_fn(3, |u, v| int((u + 2 * v) as i64)).unwrap();
        // weights (0,1)=2, (0,2)=4, (1,2)=5
        let u = uniformize_by_rotation(&w).unwrap();
        assert_eq!(u.uniform.length_weights().unwrap(), vec![int(11)]);
        u.rotations.verify_against_weighted(&u.uniform).unwrap();
    }

    #[test]
    fn uniformize_already_uniform() {
        for k in 3..=7 {
            let ls: Vec<Rational> = (1..=k / 2).map(|l| frac(l as i64, 3)).collect();
            let w = WeightedCgg::from_length_weights(k, &ls).unwrap();
            let u = uniformize_by_rotation(&w).unwrap();
            // every length class has k edges (k/2 for the even diameter, doubled)
            assert_eq!(u.uniform, w.scaled(&int(k as i64)).unwrap());
            // the k rotations coincide; their coefficients aggregate to k
            assert_eq!(u.rotations.entries().len(), 1);
            assert_eq!(u.rotations.entries()[0].coef, int(k as i64));
            u.rotations.verify_against_weighted(&u.uniform).unwrap();
        }
    }

    #[test]
    fn long_edge_condition_examples() {
        // 6 parts: A={0..9} B={10} C={11} D={12..21} E={22} F={23}
        // (A,D) opposite: 96 edges; (A,B) length 1: one edge; (A,C) length 2: one edge
        let mut edges = vec![(0, 10), (0, 11)];
        for a in 0..10 {
            for d in 12..22 {
                if edges.len() < 98 {
                    edges.push((a, d));
                }
            }
        }
        let g = Graph::cgg(24, edges).unwrap();
        let p = IntervalPartition::new(Order::Cyclic, 24, vec![0, 10, 11, 12, 22, 23]).unwrap();
        let r = long_edge_condition(&g, &p, 3).unwrap();
        assert_eq!(r.sizes, vec![1, 1, 96]);
        assert_eq!(r.c_k, 48);
        assert!(r.holds);

        // drop the length-1 edge: E_1 empty, condition fails regardless of E_k
        let g2 = Graph::cgg(24, g.edges().filter(|&e| e != (0, 10))).unwrap();
        assert!(!long_edge_condition(&g2, &p, 3).unwrap().holds);

        assert!(long_edge_condition(&g, &p, 2).is_err());
        let p4 = IntervalPartition::new(Order::Cyclic, 24, vec![0, 10, 12, 22]).unwrap();
        assert!(long_edge_condition(&g, &p4, 3).is_err());
    }

    #[test]
    fn json_forms() {
        let w = WeightedCgg::from_length_weights(4, &[int(1), frac(1, 2)]).unwrap();
        let s = serde_json::to_string(&w).unwrap();
        assert_eq!(s, r#"{"k":4,"weights":{"1":"1","2":"1/2"}}"#);
        assert_eq!(serde_json::from_str::<WeightedCgg>(&s).unwrap(), w);

        let h = figure_two_h();
        let p = IntervalPartition::new(Order::Cyclic, 5, vec![0, 1, 2, 3]).unwrap();
        let w = weighted_representation(&h, &p).unwrap();
        let s = serde_json::to_string(&w).unwrap();
        assert!(s.contains("\"1-3\":\"2\""));
        assert_eq!(serde_json::from_str::<WeightedCgg>(&s).unwrap(), w);

        assert!(serde_json::from_str::<WeightedCgg>(r#"{"k":4,"weights":{"1":"1"}}"#).is_err());
        assert!(serde_json::from_str::<WeightedCgg>(r#"{"k":4,"weights":{"1":"-1","2":"1"}}"#).is_err());
    }
}
