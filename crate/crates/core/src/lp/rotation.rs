use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Gap vector of a copy of a `k`-vertex pattern in `K_m`, up to rotation.
///
/// For a copy on host positions `p_0 < ... < p_{k-1}` the gaps are
/// `p_1 - p_0, ..., p_{k-1} - p_{k-2}, m - p_{k-1} + p_0`. Rotating the copy
/// around the host rotates the gap vector; the stored form is the
/// lexicographically smallest rotation.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RotationClass {
    gaps: Vec<usize>,
}

impl RotationClass {
    /// Canonicalizes an arbitrary gap vector.
    pub fn new(gaps: Vec<usize>) -> Result<Self> {
        if gaps.is_empty() || gaps.contains(&0) {
            return Err(Error::param("gaps must be positive and nonempty"));
        }
        Ok(RotationClass {
            gaps: canonical_rotation(&gaps),
        })
    }

    /// The class of the copy on the given host positions.
    pub fn from_positions(m: usize, positions: &[usize]) -> Result<Self> {
        let mut p = positions.to_vec();
        p.sort_unstable();
        p.dedup();
        if p.len() != positions.len() || p.is_empty() || *p.last().unwrap() >= m {
            return Err(Error::param("positions must be distinct and below m"));
        }
        let k = p.len();
        let gaps = (0..k)
            .map(|i| if i + 1 < k { p[i + 1] - p[i] } else { m - p[i] + p[0] })
            .collect();
        Self::new(gaps)
    }

    pub fn gaps(&self) -> &[usize] {
        &self.gaps
    }

    pub fn k(&self) -> usize {
        self.gaps.len()
    }

    pub fn m(&self) -> usize {
        self.gaps.iter().sum()
    }

    /// Smallest `p > 0` with `gaps` invariant under rotating by `p` places.
    pub fn period(&self) -> usize {
        period(&self.gaps)
    }

    /// Number of host rotations fixing a copy of this class.
    pub fn stabilizer(&self) -> usize {
        self.k() / self.period()
    }

    /// Number of distinct copies in the class.
    pub fn orbit_size(&self) -> usize {
        self.m() / self.stabilizer()
    }

    /// Positions of the representative copy starting at `offset`.
    pub fn positions(&self, offset: usize) -> Vec<usize> {
        let m = self.m();
        let mut p = offset % m;
        self.gaps
            .iter()
            .map(|g| {
                let here = p;
                p = (p + g) % m;
                here
            })
            .collect()
    }

    /// `(i, j, arc)` for pattern positions `i < j`, where `arc` is the sum of
    /// gaps from `i` to `j`.
    pub fn arcs(&self) -> impl Iterator<Item = (usize, usize, usize)> + '_ {
        let k = self.k();
        (0..k).flat_map(move |i| {
            let mut s = 0;
            (i + 1..k).map(move |j| {
                s += self.gaps[j - 1];
                (i, j, s)
            })
        })
    }
}

fn period(g: &[usize]) -> usize {
    let k = g.len();
    (1..=k)
        .find(|&p| k % p == 0 && (0..k).all(|i| g[i] == g[(i + p) % k]))
        .unwrap_or(k)
}

fn canonical_rotation(g: &[usize]) -> Vec<usize> {
    let k = g.len();
    (0..k)
        .map(|r| g[r..].iter().chain(&g[..r]).copied().collect::<Vec<_>>())
        .min()
        .unwrap()
}

fn is_canonical(g: &[usize]) -> bool {
    let k = g.len();
    (1..k).all(|r| {
        let rotated = g[r..].iter().chain(&g[..r]);
        g.iter().le(rotated)
    })
}

/// All canonical gap vectors of `k` positive parts summing to `m`, in
/// lexicographic order, written back to back into one flat buffer.
pub fn canonical_gap_vectors(m: usize, k: usize) -> Vec<u32> {
    let mut out = Vec::new();
    if k == 0 || m < k {
        return out;
    }
    if k == 1 {
        out.push(m as u32);
        return out;
    }
    let mut g = vec![0usize; k];
    // A canonical rotation starts with its minimum part.
    for first in 1..=m / k {
        g[0] = first;
        fill(&mut g, 1, m - first, first, &mut out);
    }
    out
}

fn fill(g: &mut [usize], at: usize, rest: usize, min: usize, out: &mut Vec<u32>) {
    let k = g.len();
    if at + 1 == k {
        if rest >= min {
            g[at] = rest;
            if is_canonical(g) {
                out.extend(g.iter().map(|&x| x as u32));
            }
        }
        return;
    }
    let slots = k - at - 1;
    if rest < min * (slots + 1) {
        return;
    }
    for x in min..=rest - min * slots {
        g[at] = x;
        fill(g, at + 1, rest - x, min, out);
    }
}

/// The configurations used as test fixtures for the dual analysis of the
/// four-vertex and `2k`-vertex witnesses.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Configuration {
    /// Gaps `(i, i_max - i, i, m - i_max - i)`.
    S { i: usize, i_max: usize },
    /// Gaps `(i, i0, i, m - i0 - 2i)`.
    SPrime { i: usize, i0: usize },
    /// Gaps `(i, m - i0, i, i0 - 2i)` for `i0 > m'/2`.
    SDoublePrime { i: usize, i0: usize },
    /// `2k` vertices, gaps `q` (k-1 times), `q + r`, `q` (k-1 times), closing
    /// gap, where `i = qk + r`.
    HexS { i: usize, k: usize },
    /// `2k` vertices, gaps `j` (k-1 times), `i`, `j` (k-1 times), closing gap.
    HexSij { i: usize, j: usize, k: usize },
}

/// Canonical class of a configuration in `K_m` (`m` odd).
pub fn figure_configuration(c: Configuration, m: usize) -> Result<RotationClass> {
    if m % 2 == 0 || m < 3 {
        return Err(Error::param("configurations live in K_m with m odd"));
    }
    let mp = (m - 1) / 2;
    let bad = |why: &str| Err(Error::param(format!("{c:?} at m = {m}: {why}")));
    let closing = |used: usize| {
        if used >= m {
            Err(Error::param(format!("{c:?} does not fit in K_{m}")))
        } else {
            Ok(m - used)
        }
    };
    let gaps = match c {
        Configuration::S { i, i_max } => {
            if i == 0 || i >= i_max || i_max > mp {
                return bad("needs 1 <= i < i_max <= m'");
            }
            vec![i, i_max - i, i, closing(i_max + i)?]
        }
        Configuration::SPrime { i, i0 } => {
            if i == 0 || 4 * i > mp || i0 == 0 || 2 * i0 > mp {
                return bad("needs 1 <= i <= m'/4 and 1 <= i0 <= m'/2");
            }
            vec![i, i0, i, closing(i0 + 2 * i)?]
        }
        Configuration::SDoublePrime { i, i0 } => {
            if i == 0 || 2 * i0 <= mp || i0 > mp || i0 <= 2 * i {
                return bad("needs m'/2 < i0 <= m' and i0 > 2i >= 2");
            }
            vec![i, m - i0, i, i0 - 2 * i]
        }
        Configuration::HexS { i, k } => {
            if k < 3 || i < k {
                return bad("needs k >= 3 and i >= k");
            }
            let (q, r) = (i / k, i % k);
            let mut g = vec![q; k - 1];
            g.push(q + r);
            g.extend(std::iter::repeat(q).take(k - 1));
            g.push(closing((2 * k - 1) * q + r)?);
            g
        }
        Configuration::HexSij { i, j, k } => {
            if k < 3 || i == 0 || i >= k || j == 0 || 2 * k * j > mp {
                return bad("needs k >= 3, 1 <= i < k and 1 <= j <= m'/(2k)");
            }
            let mut g = vec![j; k - 1];
            g.push(i);
            g.extend(std::iter::repeat(j).take(k - 1));
            g.push(closing(i + (2 * k - 2) * j)?);
            g
        }
    };
    RotationClass::new(gaps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    fn brute_classes(m: usize, k: usize) -> BTreeSet<Vec<usize>> {
        // every k-subset of Z_m, reduced to its canonical gap vector
        let mut out = BTreeSet::new();
        let mut idx: Vec<usize> = (0..k).collect();
        loop {
            out.insert(RotationClass::from_positions(m, &idx).unwrap().gaps);
            let mut i = k;
            while i > 0 && idx[i - 1] == m - k + i - 1 {
                i -= 1;
            }
            if i == 0 {
                break;
            }
            idx[i - 1] += 1;
            for j in i..k {
                idx[j] = idx[j - 1] + 1;
            }
        }
        out
    }

    fn binom(n: usize, r: usize) -> usize {
        (0..r).fold(1, |a, i| a * (n - i) / (i + 1))
    }

    #[test]
    fn enumeration_matches_subsets() {
        for k in 1..=5 {
            for m in k..=13 {
                let flat = canonical_gap_vectors(m, k);
                let listed: Vec<Vec<usize>> = flat
                    .chunks(k)
                    .map(|c| c.iter().map(|&x| x as usize).collect())
                    .collect();
                let mut sorted = listed.clone();
                sorted.sort();
                assert_eq!(listed, sorted, "lex order m={m} k={k}");
                let brute: Vec<_> = brute_classes(m, k).into_iter().collect();
                assert_eq!(listed, brute, "m={m} k={k}");
                // orbit sizes add up to the number of k-subsets
                let total: usize = listed
                    .iter()
                    .map(|g| RotationClass::new(g.clone()).unwrap().orbit_size())
                    .sum();
                assert_eq!(total, binom(m, k));
            }
        }
    }

    #[test]
    fn triangle_classes_in_k5() {
        let flat = canonical_gap_vectors(5, 3);
        assert_eq!(flat, vec![1, 1, 3, 1, 2, 2]);
    }

    #[test]
    fn stabilizers() {
        let c = RotationClass::new(vec![2, 1, 2, 1]).unwrap();
        assert_eq!(c.gaps(), &[1, 2, 1, 2]);
        assert_eq!(c.period(), 2);
        assert_eq!(c.stabilizer(), 2);
        assert_eq!(c.orbit_size(), 3);
        let c = RotationClass::new(vec![1, 1, 1]).unwrap();
        assert_eq!((c.stabilizer(), c.orbit_size()), (3, 1));
        assert_eq!(c.positions(2), vec![2, 0, 1]);
    }

    #[test]
    fn arcs_cover_all_pairs() {
        let c = RotationClass::new(vec![1, 3, 2, 5]).unwrap();
        let arcs: Vec<_> = c.arcs().collect();
        assert_eq!(
            arcs,
            vec![(0, 1, 1), (0, 2, 4), (0, 3, 6), (1, 2, 3), (1, 3, 5), (2, 3, 2)]
        );
    }

    #[test]
    fn figure_configurations_gap_vectors() {
        let m = 97;
        let c = figure_configuration(Configuration::SPrime { i: 3, i0: 10 }, m).unwrap();
        assert_eq!(c, RotationClass::new(vec![3, 10, 3, 81]).unwrap());
        let c = figure_configuration(Configuration::S { i: 2, i_max: 40 }, m).unwrap();
        assert_eq!(c, RotationClass::new(vec![2, 38, 2, 55]).unwrap());
        let c = figure_configuration(Configuration::SDoublePrime { i: 3, i0: 30 }, m).unwrap();
        assert_eq!(c, RotationClass::new(vec![3, 67, 3, 24]).unwrap());
        assert!(figure_configuration(Configuration::S { i: 40, i_max: 40 }, m).is_err());
        assert!(figure_configuration(Configuration::SPrime { i: 13, i0: 1 }, m).is_err());
        assert!(figure_configuration(Configuration::SPrime { i: 1, i0: 3 }, 96).is_err());
    }

    #[test]
    fn hexagon_configurations() {
        // gaps j, j, i, j, j, closing: the closing gap spans i + 4j the other way
        let m = 31;
        let c = figure_configuration(Configuration::HexSij { i: 1, j: 2, k: 3 }, m).unwrap();
        assert_eq!(c, RotationClass::new(vec![2, 2, 1, 2, 2, 22]).unwrap());
        let c = figure_configuration(Configuration::HexS { i: 7, k: 3 }, m).unwrap();
        // q = 2, r = 1
        assert_eq!(c, RotationClass::new(vec![2, 2, 3, 2, 2, 20]).unwrap());
        assert!(figure_configuration(Configuration::HexS { i: 2, k: 3 }, m).is_err());
        assert!(figure_configuration(Configuration::HexSij { i: 3, j: 1, k: 3 }, m).is_err());
        assert!(figure_configuration(Configuration::HexSij { i: 1, j: 3, k: 3 }, m).is_err());
    }
}
