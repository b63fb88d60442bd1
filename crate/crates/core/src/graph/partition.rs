use serde::{Deserialize, Serialize};

use super::{pair_length, Graph, Order};
use crate::error::{Error, Result};

/// A split of `0..n` into contiguous intervals.
///
/// `starts` holds the first vertex of every interval in increasing order.
/// Under a cyclic order the last interval wraps around from `starts[k-1]`
/// through `n-1` to `starts[0]-1`; under a linear order `starts[0]` is 0.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct IntervalPartition {
    order: Order,
    n: usize,
    starts: Vec<usize>,
}

impl IntervalPartition {
    pub fn new(order: Order, n: usize, starts: Vec<usize>) -> Result<Self> {
        if starts.is_empty() {
            return Err(Error::param("a partition needs at least one interval"));
        }
        if starts.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::param("interval starts must be strictly increasing"));
        }
        if *starts.last().unwrap() >= n {
            return Err(Error::param("interval start out of range"));
        }
        if order == Order::Linear && starts[0] != 0 {
            return Err(Error::param("a linear partition must start at vertex 0"));
        }
        Ok(IntervalPartition { order, n, starts })
    }

    /// Every vertex in its own interval.
    pub fn singletons(order: Order, n: usize) -> Result<Self> {
        Self::new(order, n, (0..n).collect())
    }

    pub fn order(&self) -> Order {
        self.order
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of intervals.
    pub fn k(&self) -> usize {
        self.starts.len()
    }

    pub fn starts(&self) -> &[usize] {
        &self.starts
    }

    /// Vertices of each interval, each listed in the (cyclic) order.
    pub fn parts(&self) -> Vec<Vec<usize>> {
        let k = self.k();
        (0..k)
            .map(|i| {
                let lo = self.starts[i];
                let len = self.part_len(i);
                (0..len).map(|d| (lo + d) % self.n).collect()
            })
            .collect()
    }

    pub fn part_len(&self, i: usize) -> usize {
        let k = self.k();
        if i + 1 < k {
            self.starts[i + 1] - self.starts[i]
        } else {
            match self.order {
                Order::Cyclic => self.n - self.starts[i] + self.starts[0],
                Order::Linear => self.n - self.starts[i],
            }
        }
    }

    pub fn part_sizes(&self) -> Vec<usize> {
        (0..self.k()).map(|i| self.part_len(i)).collect()
    }

    /// `part_of()[v]` is the index of the interval containing `v`.
    pub fn part_of(&self) -> Vec<usize> {
        let mut out = vec![0; self.n];
        for (i, part) in self.parts().into_iter().enumerate() {
            for v in part {
                out[v] = i;
            }
        }
        out
    }

    /// Length of the pair of intervals `{i, j}` in the induced order on parts.
    pub fn pair_length(&self, i: usize, j: usize) -> usize {
        pair_length(self.order, self.k(), i, j)
    }

    /// No edge of `g` lies inside one interval.
    pub fn is_valid_for(&self, g: &Graph) -> bool {
        if g.n() != self.n || g.order() != self.order {
            return false;
        }
        let part = self.part_of();
        g.edges().all(|(u, v)| part[u] != part[v])
    }
}

/// Greedy split of the vertex sequence `seq` into the fewest intervals with
/// no internal edge. Optimal for a linear sequence: any sub-interval of a
/// valid interval is valid, so extending each interval as far as possible
/// never hurts.
fn greedy_split(g: &Graph, seq: impl Iterator<Item = usize>) -> Vec<usize> {
    let n = g.n();
    let mut neighbors = vec![Vec::new(); n];
    for (u, v) in g.edges() {
        neighbors[u].push(v);
        neighbors[v].push(u);
    }
    let mut pos = vec![usize::MAX; n];
    let mut starts = Vec::new();
    let mut current_lo = 0;
    for (idx, v) in seq.enumerate() {
        let clash = idx == 0
            || neighbors[v]
                .iter()
                .any(|&w| pos[w] != usize::MAX && pos[w] >= current_lo);
        if clash {
            current_lo = idx;
            starts.push(v);
        }
        pos[v] = idx;
    }
    starts
}

/// Minimum number of intervals, with a witness partition. Edgeless graphs
/// get 1.
pub fn chromatic_number(g: &Graph) -> Result<(usize, IntervalPartition)> {
    let n = g.n();
    if n == 0 {
        return Err(Error::param("chromatic number of the empty vertex set"));
    }
    match g.order() {
        Order::Linear => {
            let starts = greedy_split(g, 0..n);
            let k = starts.len();
            Ok((k, IntervalPartition::new(Order::Linear, n, starts)?))
        }
        Order::Cyclic => {
            let mut best: Option<Vec<usize>> = None;
            for s in 0..n {
                let mut starts = greedy_split(g, (0..n).map(|d| (s + d) % n));
                if best.as_ref().is_some_and(|b| b.len() <= starts.len()) {
                    continue;
                }
                starts.sort_unstable();
                best = Some(starts);
                if best.as_ref().unwrap().len() == 1 {
                    break;
                }
            }
            let starts = best.unwrap();
            Ok((starts.len(), IntervalPartition::new(Order::Cyclic, n, starts)?))
        }
    }
}

/// `chi_c` of a cgg.
pub fn cyclic_chromatic_number(g: &Graph) -> Result<(usize, IntervalPartition)> {
    if g.order() != Order::Cyclic {
        return Err(Error::param("cyclic chromatic number needs a cgg"));
    }
    chromatic_number(g)
}

/// `chi_<` of an ordered graph.
pub fn interval_chromatic_number(g: &Graph) -> Result<(usize, IntervalPartition)> {
    if g.order() != Order::Linear {
        return Err(Error::param("interval chromatic number needs an ordered graph"));
    }
    chromatic_number(g)
}
