use num_traits::{Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::Packing;
use crate::error::{Error, Result};
use crate::graph::{Graph, Host, Order};
use crate::lp::{ColumnSource, CompressedMatrix};
use crate::rational::{self, Rational};

/// Accounting for [`rotation_schedule_packing`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScheduleReport {
    /// Classes with positive multiplicity.
    pub classes: usize,
    /// `sum floor(x_j * n)` over those classes.
    pub requested: u64,
    pub placed: u64,
    /// Requested offsets rejected because an edge was already taken.
    pub filtered: u64,
    /// `n * sum x_j` minus `requested`: copies lost to rounding (fractional).
    pub rounding_loss: f64,
    /// Edges per length left unused by `x` itself (rows where `Mx < 1`).
    pub slack_edges: u64,
    /// Used edges per length `1..=(n-1)/2`.
    pub used_per_length: Vec<u64>,
    /// Placed offsets per class, in column order of the support.
    pub placed_per_class: Vec<(usize, u64)>,
}

/// Integral packing read off a rotation-class solution.
///
/// The host is `K_n` with `n = mat.m()` odd. A length-`l` edge of `K_n` is
/// `{s, s + l}` for a unique start `s`, so every length has exactly `n`
/// edges indexed by start. A copy of class `j` at offset `o` puts pattern
/// vertex `i` on `positions_j[i] + o`; each of its edges claims one start
/// of its length. Classes are handled in column order and offsets in
/// increasing order; an offset is taken when all its starts are free, up to
/// `floor(x_j * n)` offsets per class.
///
/// `x` must be nonnegative with `Mx <= 1` row by row; rows with `Mx < 1`
/// are reported as slack. The pattern must be the support of the matrix
/// pattern, with unit weights.
pub fn rotation_schedule_packing(
    pattern: &Graph,
    mat: &CompressedMatrix,
    x: &[(usize, Rational)],
) -> Result<(Packing, ScheduleReport)> {
    let n = mat.m();
    let w = mat.pattern();
    if pattern.order() != Order::Cyclic || pattern.n() != w.k() {
        return Err(Error::param("pattern must be a cgg on the matrix pattern's vertices"));
    }
    let one = rational::int(1);
    for (u, v, wt) in w.edges() {
        let unit = wt.is_zero() || *wt == one;
        if !unit || pattern.has_edge(u, v) != wt.is_positive() {
            return Err(Error::pre("pattern must realize every positive length with unit weight"));
        }
    }
    let rows = mat.rows();
    let mut load = vec![Rational::zero(); rows];
    for (j, v) in x {
        if *j >= mat.cols() || v.is_negative() {
            return Err(Error::pre("x has a negative entry or an index outside the matrix"));
        }
        for (l, a) in mat.column(*j) {
            load[l] += a * v;
        }
    }
    if load.iter().any(|s| *s > one) {
        return Err(Error::pre("x overloads some length (Mx > 1)"));
    }
    let nn = rational::int(n as i64);
    let slack_edges: u64 = load
        .iter()
        .map(|s| ((&one - s) * &nn).floor().to_integer().to_u64().unwrap_or(0))
        .sum();

    let edges: Vec<(usize, usize)> = pattern.edges().collect();
    let half = (n - 1) / 2;
    let mut used = vec![vec![false; n]; half];
    let mut used_per_length = vec![0u64; half];
    let mut packing = Packing::new(Host::complete(Order::Cyclic, n), pattern.clone());
    let mut report = ScheduleReport {
        classes: 0,
        requested: 0,
        placed: 0,
        filtered: 0,
        rounding_loss: 0.0,
        slack_edges,
        used_per_length: Vec::new(),
        placed_per_class: Vec::new(),
    };
    let mut support: Vec<&(usize, Rational)> = x.iter().filter(|(_, v)| v.is_positive()).collect();
    support.sort_by_key(|(j, _)| *j);
    let mut exact_total = Rational::zero();
    for (j, v) in support {
        let class = mat.class(*j);
        let quota_q = v * &nn;
        exact_total += &quota_q;
        let quota = quota_q.floor().to_integer().to_u64().unwrap_or(0);
        report.classes += 1;
        report.requested += quota;
        let pos = class.positions(0);
        // (length index, start) of each pattern edge at offset 0
        let claims: Vec<(usize, usize)> = edges
            .iter()
            .map(|&(a, b)| {
                let (p, q) = (pos[a].min(pos[b]), pos[a].max(pos[b]));
                let arc = q - p;
                if arc <= half {
                    (arc - 1, p)
                } else {
                    (n - arc - 1, q)
                }
            })
            .collect();
        let mut got = 0u64;
        let mut map = vec![0u32; pos.len()];
        for o in 0..class.orbit_size() {
            if got == quota {
                break;
            }
            let free = claims.iter().all(|&(l, s)| !used[l][(s + o) % n]);
            if free {
                for &(l, s) in &claims {
                    used[l][(s + o) % n] = true;
                    used_per_length[l] += 1;
                }
                for (i, &p) in pos.iter().enumerate() {
                    map[i] = ((p + o) % n) as u32;
                }
                packing.push(&map);
                got += 1;
            }
        }
        report.placed += got;
        report.filtered += quota - got;
        report.placed_per_class.push((*j, got));
    }
    report.rounding_loss = rational::to_f64(&exact_total) - report.requested as f64;
    report.used_per_length = used_per_length;
    Ok((packing, report))
}

/// Result of [`plane_c4_schedule`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct C4Schedule {
    /// Gap vectors of the classes used with multiplicity one.
    pub quadruples: Vec<[usize; 4]>,
    /// Lengths covered by no class.
    pub dropped: Vec<usize>,
    pub report: ScheduleReport,
}

/// Splits the lengths `1..=(n-1)/2` into quadruples summing to `n`, greedily
/// from the top: the largest free length `a` is matched with the largest `b`
/// for which two further free lengths complete the sum; `a` is dropped when
/// no `b` works.
pub fn c4_difference_quadruples(n: usize) -> (Vec<[usize; 4]>, Vec<usize>) {
    let half = n.saturating_sub(1) / 2;
    let mut free = vec![true; half + 1];
    free[0] = false;
    let mut quads = Vec::new();
    let mut dropped = Vec::new();
    for a in (1..=half).rev() {
        if !free[a] {
            continue;
        }
        free[a] = false;
        let mut found = None;
        'b: for b in (1..a).rev().filter(|&b| free[b]) {
            let rest = n - a - b;
            // c < d, both free, distinct from b, c + d = rest
            let lo = rest.saturating_sub(half).max(1);
            for c in lo..rest.div_ceil(2) {
                let d = rest - c;
                if d <= half && free[c] && free[d] && c != b && d != b {
                    found = Some([a, b, c, d]);
                    break 'b;
                }
            }
        }
        match found {
            Some(q) => {
                for &v in &q[1..] {
                    free[v] = false;
                }
                quads.push(q);
            }
            None => dropped.push(a),
        }
    }
    dropped.sort_unstable();
    (quads, dropped)
}

/// Rotation-schedule packing of the plane `C4` into `K_n`, `n` odd.
///
/// `Mx = 1` has no solution for any odd `n`: a plane 4-cycle has side
/// lengths summing to at most `n`, so its average side is at most `n/4`,
/// below the average `(n+1)/4` over all edges of `K_n`. Instead `x` puts
/// weight 1 on the classes of [`c4_difference_quadruples`]. Each such class
/// uses every length in its quadruple once, so `Mx <= 1` with equality off
/// the dropped lengths; this is checked exactly against the matrix before
/// scheduling, and the full orbit of every class is placed.
pub fn plane_c4_schedule(n: usize) -> Result<(Packing, C4Schedule)> {
    use crate::lp::{compressed_matrix, verify_solution, RotationClass, WeightedCgg, WithSlack};
    if n < 5 || n % 2 == 0 {
        return Err(Error::param("the C4 schedule needs an odd host size of at least 5"));
    }
    let w = WeightedCgg::from_length_weights(4, &[rational::int(1), rational::int(0)])?;
    let mat = compressed_matrix(&w, n)?;
    let (quadruples, dropped) = c4_difference_quadruples(n);
    let mut x = Vec::with_capacity(quadruples.len());
    for q in &quadruples {
        let class = RotationClass::new(q.to_vec())?;
        let j = mat
            .column_of(&class)
            .ok_or_else(|| Error::Verification(format!("{q:?} is not a column")))?;
        x.push((j, rational::int(1)));
    }
    let relaxed = WithSlack::new(&mat, dropped.iter().map(|l| l - 1).collect())?;
    let mut with_slack = x.clone();
    with_slack.extend((0..dropped.len()).map(|i| (mat.cols() + i, rational::int(1))));
    if !verify_solution(&relaxed, &with_slack) {
        return Err(Error::Verification("quadruple solution fails Mx + s = 1".into()));
    }
    let (packing, report) = rotation_schedule_packing(&w.support_graph(), &mat, &x)?;
    Ok((
        packing,
        C4Schedule {
            quadruples,
            dropped,
            report,
        },
    ))
}
