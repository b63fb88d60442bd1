use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};
use rayon::prelude::*;

use super::rotation::{canonical_gap_vectors, RotationClass};
use super::weighted::WeightedCgg;
use crate::error::{Error, Result};
use crate::rational::{self, Rational};

/// Column access for the feasibility solver. Columns may be generated on
/// demand; `first_with_sign` is the pricing step.
pub trait ColumnSource: Sync {
    fn rows(&self) -> usize;
    fn cols(&self) -> usize;
    /// Nonzero entries `(row, value)` of column `j`.
    fn column(&self, j: usize) -> Vec<(usize, Rational)>;

    /// First column `j` (in index order) whose dot product with `y` is
    /// strictly positive (`positive`) or strictly negative (`!positive`).
    fn first_with_sign(&self, y: &[Rational], positive: bool) -> Option<usize> {
        (0..self.cols()).find(|&j| {
            let d = dot(&self.column(j), y);
            if positive {
                d.is_positive()
            } else {
                d.is_negative()
            }
        })
    }

    /// Column with the largest strictly positive dot product with `y`;
    /// ties go to the smallest index.
    fn most_positive(&self, y: &[Rational]) -> Option<usize> {
        let mut best: Option<(usize, Rational)> = None;
        for j in 0..self.cols() {
            let d = dot(&self.column(j), y);
            if d.is_positive() && best.as_ref().is_none_or(|(_, b)| d > *b) {
                best = Some((j, d));
            }
        }
        best.map(|(j, _)| j)
    }
}

fn dot(col: &[(usize, Rational)], y: &[Rational]) -> Rational {
    col.iter().fold(Rational::zero(), |a, (r, v)| a + &y[*r] * v)
}

/// A plain row-major rational matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Rational>,
}

impl DenseMatrix {
    pub fn new(rows: Vec<Vec<Rational>>) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::param("ragged matrix"));
        }
        Ok(DenseMatrix {
            rows: rows.len(),
            cols,
            data: rows.into_iter().flatten().collect(),
        })
    }

    pub fn from_ints(rows: &[&[i64]]) -> Result<Self> {
        Self::new(
            rows.iter()
                .map(|r| r.iter().map(|&v| rational::int(v)).collect())
                .collect(),
        )
    }

    pub fn get(&self, i: usize, j: usize) -> &Rational {
        &self.data[i * self.cols + j]
    }
}

impl ColumnSource for DenseMatrix {
    fn rows(&self) -> usize {
        self.rows
    }

    fn cols(&self) -> usize {
        self.cols
    }

    fn column(&self, j: usize) -> Vec<(usize, Rational)> {
        (0..self.rows)
            .filter(|&i| !self.get(i, j).is_zero())
            .map(|i| (i, self.get(i, j).clone()))
            .collect()
    }
}

/// Rows are the edge lengths `1..=(m-1)/2` of `K_m`, columns the rotation
/// classes of copies of a length-uniform weighted cgg `W`. The entry in row
/// `l` is the total weight a copy places on host edges of length `l`.
///
/// Columns are kept as packed gap vectors and expanded on demand, so the
/// matrix stays small even when there are millions of classes.
#[derive(Clone, Debug)]
pub struct CompressedMatrix {
    m: usize,
    pattern: WeightedCgg,
    length_weights: Vec<Rational>,
    gaps: Vec<u32>,
    /// `(a, b, length index)` for pattern pairs `a < b` of nonzero weight.
    active: Vec<(usize, usize, usize)>,
}

/// Builds the compressed matrix of `w` in `K_m`.
pub fn compressed_matrix(w: &WeightedCgg, m: usize) -> Result<CompressedMatrix> {
    if m % 2 == 0 {
        return Err(Error::param(format!(
            "m = {m} is even; host lengths are only rotation-regular for odd m"
        )));
    }
    let length_weights = w.length_weights().ok_or_else(|| {
        Error::pre("weights are not constant per length; call uniformize_by_rotation first")
    })?;
    if w.k() < 2 {
        return Err(Error::param("pattern needs at least 2 vertices"));
    }
    if m > u32::MAX as usize {
        return Err(Error::param("m too large"));
    }
    let k = w.k();
    let active = (0..k)
        .flat_map(|a| (a + 1..k).map(move |b| (a, b, (b - a).min(k - b + a) - 1)))
        .filter(|&(_, _, wl)| !length_weights[wl].is_zero())
        .collect();
    Ok(CompressedMatrix {
        m,
        pattern: w.clone(),
        length_weights,
        gaps: canonical_gap_vectors(m, k),
        active,
    })
}

impl CompressedMatrix {
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn k(&self) -> usize {
        self.pattern.k()
    }

    pub fn pattern(&self) -> &WeightedCgg {
        &self.pattern
    }

    pub fn gaps(&self, j: usize) -> &[u32] {
        let k = self.k();
        &self.gaps[j * k..(j + 1) * k]
    }

    pub fn class(&self, j: usize) -> RotationClass {
        RotationClass::new(self.gaps(j).iter().map(|&g| g as usize).collect())
            .expect("stored gaps are canonical")
    }

    pub fn classes(&self) -> impl Iterator<Item = RotationClass> + '_ {
        (0..self.cols()).map(|j| self.class(j))
    }

    /// Column index of a class, if it is a column of this matrix.
    pub fn column_of(&self, c: &RotationClass) -> Option<usize> {
        if c.k() != self.k() || c.m() != self.m {
            return None;
        }
        let key: Vec<u32> = c.gaps().iter().map(|&g| g as u32).collect();
        let (mut lo, mut hi) = (0, self.cols());
        while lo < hi {
            let mid = (lo + hi) / 2;
            match self.gaps(mid).cmp(&key[..]) {
                std::cmp::Ordering::Less => lo = mid + 1,
                std::cmp::Ordering::Greater => hi = mid,
                std::cmp::Ordering::Equal => return Some(mid),
            }
        }
        None
    }

    /// `(host row, pattern length index)` for every pattern pair of column `j`.
    fn slots(&self, j: usize) -> impl Iterator<Item = (usize, usize)> + '_ {
        let (m, k) = (self.m, self.k());
        let g = self.gaps(j);
        (0..k).flat_map(move |a| {
            let mut s = 0usize;
            (a + 1..k).map(move |b| {
                s += g[b - 1] as usize;
                let host = s.min(m - s);
                let d = b - a;
                (host - 1, d.min(k - d) - 1)
            })
        })
    }

    /// `sum table[wl * rows + row]` over the nonzero-weight pairs of column
    /// `j`; `table` holds the scaled products `y[row] * w[wl]`.
    #[inline]
    fn scaled_dot<T: Copy + std::ops::Add<Output = T> + Default>(&self, j: usize, table: &[T]) -> T {
        let (m, k, rows) = (self.m as u32, self.k(), self.rows());
        let g = self.gaps(j);
        let mut prefix = [0u32; 33];
        let mut acc = T::default();
        if k < prefix.len() {
            for a in 0..k {
                prefix[a + 1] = prefix[a] + g[a];
            }
            for &(a, b, wl) in &self.active {
                let s = prefix[b] - prefix[a];
                acc = acc + table[wl * rows + s.min(m - s) as usize - 1];
            }
        } else {
            for (row, wl) in self.slots(j) {
                acc = acc + table[wl * rows + row];
            }
        }
        acc
    }

    /// Dense column as a vector over all rows.
    pub fn dense_column(&self, j: usize) -> Vec<Rational> {
        let mut col = vec![Rational::zero(); self.rows()];
        for (row, wl) in self.slots(j) {
            col[row] += &self.length_weights[wl];
        }
        col
    }

    pub fn entry(&self, l: usize, j: usize) -> Rational {
        self.dense_column(j)[l - 1].clone()
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let cols: Vec<Vec<Rational>> = (0..self.cols()).map(|j| self.dense_column(j)).collect();
        DenseMatrix::new(
            (0..self.rows())
                .map(|i| cols.iter().map(|c| c[i].clone()).collect())
                .collect(),
        )
        .expect("rectangular")
    }
}

/// `y` and the length weights scaled to integers; entry `[wl][row]` of
/// `table` is `y[row] * w[wl]` up to a common positive factor.
enum PriceTable {
    Small(Vec<i64>),
    Medium(Vec<i128>),
    Big(Vec<BigInt>),
}

fn price_table(y: &[Rational], weights: &[Rational]) -> PriceTable {
    let dy = rational::common_denominator(y);
    let dw = rational::common_denominator(weights);
    let mut ys: Vec<BigInt> = y.iter().map(|v| (v * &dy).to_integer()).collect();
    let g = ys.iter().fold(BigInt::zero(), |a, v| num_integer::Integer::gcd(&a, v));
    if g > BigInt::from(1) {
        ys.iter_mut().for_each(|v| *v /= &g);
    }
    let ws: Vec<BigInt> = weights.iter().map(|v| (v * &dw).to_integer()).collect();
    let products: Vec<BigInt> = ws
        .iter()
        .flat_map(|w| ys.iter().map(move |v| v * w))
        .collect();
    // Each column sums at most k^2/2 products; keep clear of overflow.
    let max_bits = products.iter().map(BigInt::bits).max().unwrap_or(0);
    if max_bits < 48 {
        PriceTable::Small(products.iter().map(|p| p.to_i64().unwrap()).collect())
    } else if max_bits < 100 {
        PriceTable::Medium(products.iter().map(|p| p.to_i128().unwrap()).collect())
    } else {
        PriceTable::Big(products)
    }
}

impl ColumnSource for CompressedMatrix {
    fn rows(&self) -> usize {
        (self.m - 1) / 2
    }

    fn cols(&self) -> usize {
        self.gaps.len() / self.k()
    }

    fn column(&self, j: usize) -> Vec<(usize, Rational)> {
        self.dense_column(j)
            .into_iter()
            .enumerate()
            .filter(|(_, v)| !v.is_zero())
            .collect()
    }

    fn first_with_sign(&self, y: &[Rational], positive: bool) -> Option<usize> {
        let rows = self.rows();
        let want = |sign: std::cmp::Ordering| {
            if positive {
                sign.is_gt()
            } else {
                sign.is_lt()
            }
        };
        let cols = 0..self.cols();
        match price_table(y, &self.length_weights) {
            PriceTable::Small(t) => cols
                .into_par_iter()
                .position_first(|j| want(self.scaled_dot(j, &t).cmp(&0))),
            PriceTable::Medium(t) => cols
                .into_par_iter()
                .position_first(|j| want(self.scaled_dot(j, &t).cmp(&0))),
            PriceTable::Big(t) => cols.into_par_iter().position_first(|j| {
                let dot: BigInt = self.slots(j).map(|(r, wl)| &t[wl * rows + r]).sum();
                want(dot.sign().cmp(&num_bigint::Sign::NoSign))
            }),
        }
    }

    /// Floating-point pricing proposes the column; its reduced cost is then
    /// confirmed exactly. If the proposal fails the exact first-improving
    /// scan decides, so a `None` here is always exact.
    fn most_positive(&self, y: &[Rational]) -> Option<usize> {
        let rows = self.rows();
        let top = y.iter().map(|v| rational::to_f64(v).abs()).fold(0.0, f64::max);
        if top > 0.0 && top.is_finite() {
            let mut table = Vec::with_capacity(self.length_weights.len() * rows);
            for w in &self.length_weights {
                let wf = rational::to_f64(w);
                table.extend(y.iter().map(|v| rational::to_f64(v) / top * wf));
            }
            let mut best: Option<(f64, usize)> = None;
            for j in 0..self.cols() {
                let d: f64 = self.scaled_dot(j, &table);
                if d > 0.0 && best.is_none_or(|(b, _)| d > b) {
                    best = Some((d, j));
                }
            }
            if let Some((_, j)) = best {
                if dot(&self.column(j), y).is_positive() {
                    return Some(j);
                }
            }
        }
        self.first_with_sign(y, true)
    }
}

/// `M` followed by a unit column for each row in `slack_rows`, turning
/// `Mx = 1` into `Mx <= 1` on those rows.
pub struct WithSlack<'a, C: ?Sized> {
    inner: &'a C,
    slack_rows: Vec<usize>,
}

impl<'a, C: ColumnSource + ?Sized> WithSlack<'a, C> {
    pub fn new(inner: &'a C, mut slack_rows: Vec<usize>) -> Result<Self> {
        slack_rows.sort_unstable();
        slack_rows.dedup();
        if slack_rows.last().is_some_and(|&r| r >= inner.rows()) {
            return Err(Error::param("slack row out of range"));
        }
        Ok(WithSlack { inner, slack_rows })
    }

    pub fn inner(&self) -> &C {
        self.inner
    }

    /// Structural part of a solution of the slack system.
    pub fn structural(&self, x: &[(usize, Rational)]) -> Vec<(usize, Rational)> {
        x.iter()
            .filter(|(j, _)| *j < self.inner.cols())
            .cloned()
            .collect()
    }

    fn slack_hits<'y>(
        &'y self,
        y: &'y [Rational],
        positive: bool,
    ) -> impl Iterator<Item = (usize, &'y Rational)> + 'y {
        let base = self.inner.cols();
        self.slack_rows
            .iter()
            .enumerate()
            .map(move |(i, &r)| (base + i, &y[r]))
            .filter(move |(_, v)| if positive { v.is_positive() } else { v.is_negative() })
    }
}

impl<C: ColumnSource + ?Sized> ColumnSource for WithSlack<'_, C> {
    fn rows(&self) -> usize {
        self.inner.rows()
    }

    fn cols(&self) -> usize {
        self.inner.cols() + self.slack_rows.len()
    }

    fn column(&self, j: usize) -> Vec<(usize, Rational)> {
        match j.checked_sub(self.inner.cols()) {
            None => self.inner.column(j),
            Some(i) => vec![(self.slack_rows[i], Rational::from_integer(1.into()))],
        }
    }

    fn first_with_sign(&self, y: &[Rational], positive: bool) -> Option<usize> {
        self.inner
            .first_with_sign(y, positive)
            .or_else(|| self.slack_hits(y, positive).map(|(j, _)| j).next())
    }

    fn most_positive(&self, y: &[Rational]) -> Option<usize> {
        // compare the best structural column with the best slack exactly
        let best_slack = self
            .slack_hits(y, true)
            .fold(None::<(usize, &Rational)>, |b, (j, v)| match b {
                Some((_, bv)) if bv >= v => b,
                _ => Some((j, v)),
            });
        let structural = self.inner.most_positive(y).map(|j| (j, dot(&self.inner.column(j), y)));
        match (structural, best_slack) {
            (Some((j, d)), Some((sj, sv))) => Some(if *sv > d { sj } else { j }),
            (Some((j, _)), None) => Some(j),
            (None, s) => s.map(|(j, _)| j),
        }
    }
}
