use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use super::matrix::CompressedMatrix;
use super::rotation::RotationClass;
use super::simplex::verify_solution;
use super::weighted::WeightedCgg;
use crate::error::{Error, Result};
use crate::graph::{is_order_preserving, Graph, Order};
use crate::rational::{self, Rational};

/// One weighted copy of the pattern: pattern vertex `i` goes to `map[i]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Placement {
    pub map: Vec<usize>,
    #[serde(with = "crate::rational::serde_str")]
    pub coef: Rational,
}

/// Nonnegative coefficients on copies of a weighted pattern inside a
/// weighted host on `host_n` vertices.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FractionalPacking {
    pattern: WeightedCgg,
    host_n: usize,
    placements: Vec<Placement>,
}

/// Identifies a copy by what it contributes to the host: its vertex set and
/// the weight it puts on every host pair.
pub type ImageKey = (Vec<usize>, Vec<(usize, usize, Rational)>);

impl FractionalPacking {
    pub fn new(
        pattern: WeightedCgg,
        host_n: usize,
        placements: Vec<(Vec<usize>, Rational)>,
    ) -> Result<Self> {
        for (map, coef) in &placements {
            if map.len() != pattern.k() || !is_order_preserving(Order::Cyclic, host_n, map) {
                return Err(Error::param(format!(
                    "placement {map:?} is not a cyclic copy in a host of size {host_n}"
                )));
            }
            if coef.is_negative() {
                return Err(Error::param("negative coefficient"));
            }
        }
        Ok(FractionalPacking {
            pattern,
            host_n,
            placements: placements
                .into_iter()
                .map(|(map, coef)| Placement { map, coef })
                .collect(),
        })
    }

    pub fn pattern(&self) -> &WeightedCgg {
        &self.pattern
    }

    pub fn host_n(&self) -> usize {
        self.host_n
    }

    pub fn entries(&self) -> &[Placement] {
        &self.placements
    }

    pub fn image_key(&self, map: &[usize]) -> ImageKey {
        let mut verts = map.to_vec();
        verts.sort_unstable();
        let mut edges: Vec<(usize, usize, Rational)> = self
            .pattern
            .edges()
            .filter(|(_, _, w)| !w.is_zero())
            .map(|(a, b, w)| {
                let (u, v) = (map[a].min(map[b]), map[a].max(map[b]));
                (u, v, w.clone())
            })
            .collect();
        edges.sort();
        (verts, edges)
    }

    /// Merges placements with the same image and drops zero coefficients.
    /// The first map seen for an image is kept.
    pub fn aggregated(&self) -> Self {
        let mut merged: BTreeMap<ImageKey, (usize, Rational)> = BTreeMap::new();
        for (idx, p) in self.placements.iter().enumerate() {
            let e = merged
                .entry(self.image_key(&p.map))
                .or_insert((idx, Rational::zero()));
            e.1 += &p.coef;
        }
        let mut kept: Vec<(usize, Rational)> = merged
            .into_values()
            .filter(|(_, c)| c.is_positive())
            .collect();
        kept.sort_by_key(|(i, _)| *i);
        FractionalPacking {
            pattern: self.pattern.clone(),
            host_n: self.host_n,
            placements: kept
                .into_iter()
                .map(|(i, coef)| Placement {
                    map: self.placements[i].map.clone(),
                    coef,
                })
                .collect(),
        }
    }

    pub fn scaled(&self, c: &Rational) -> Self {
        let mut out = self.clone();
        for p in &mut out.placements {
            p.coef = &p.coef * c;
        }
        out
    }

    /// `Phi`, the largest coefficient.
    pub fn max_coef(&self) -> Rational {
        self.placements
            .iter()
            .map(|p| p.coef.clone())
            .max()
            .unwrap_or_else(Rational::zero)
    }

    /// Total weight landing on each host pair.
    pub fn loads(&self) -> BTreeMap<(usize, usize), Rational> {
        let mut out = BTreeMap::new();
        for p in &self.placements {
            for (a, b, w) in self.pattern.edges() {
                if w.is_zero() || p.coef.is_zero() {
                    continue;
                }
                let (u, v) = (p.map[a].min(p.map[b]), p.map[a].max(p.map[b]));
                *out.entry((u, v)).or_insert_with(Rational::zero) += w * &p.coef;
            }
        }
        out
    }

    /// Checks that every host pair receives exactly `host(u, v)`.
    pub fn verify_against(&self, host: impl Fn(usize, usize) -> Rational) -> Result<()> {
        let loads = self.loads();
        let zero = Rational::zero();
        for u in 0..self.host_n {
            for v in u + 1..self.host_n {
                let got = loads.get(&(u, v)).unwrap_or(&zero);
                let want = host(u, v);
                if *got != want {
                    return Err(Error::Verification(format!(
                        "pair ({u}, {v}) receives {got}, host weight is {want}"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn verify_against_weighted(&self, host: &WeightedCgg) -> Result<()> {
        if host.k() != self.host_n {
            return Err(Error::param("host size mismatch"));
        }
        self.verify_against(|u, v| host.weight(u, v).clone())
    }

    /// Host edges have weight 1, non-edges 0.
    pub fn verify_against_graph(&self, host: &Graph) -> Result<()> {
        if host.n() != self.host_n || host.order() != Order::Cyclic {
            return Err(Error::param("host must be a cgg of matching size"));
        }
        self.verify_against(|u, v| {
            if host.has_edge(u, v) {
                Rational::one()
            } else {
                Rational::zero()
            }
        })
    }
}

/// A fractional packing of a length-uniform pattern into `K_m`, constant on
/// rotation classes. `phi` is the coefficient of every single copy.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassPacking {
    pub m: usize,
    pub pattern: WeightedCgg,
    pub classes: Vec<ClassWeight>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassWeight {
    pub class: RotationClass,
    #[serde(with = "crate::rational::serde_str")]
    pub phi: Rational,
}

/// Turns a solution of `Mx = 1` into coefficients on copies of the pattern.
///
/// A class whose gap vector is invariant under `s` rotations has only `m/s`
/// distinct copies, so each copy carries `s * x` to keep the per-edge sums
/// equal to the row sums of `Mx`.
pub fn fractional_packing_from_solution(
    mat: &CompressedMatrix,
    x: &[(usize, Rational)],
) -> Result<ClassPacking> {
    use super::matrix::ColumnSource;
    if !verify_solution(mat, x) {
        return Err(Error::pre("x is not a nonnegative solution of Mx = 1"));
    }
    let classes = x
        .iter()
        .filter(|(_, v)| v.is_positive())
        .map(|(j, v)| {
            let class = mat.class(*j);
            let s = rational::int(class.stabilizer() as i64);
            ClassWeight { class, phi: v * s }
        })
        .collect();
    let _ = mat.cols();
    Ok(ClassPacking {
        m: mat.m(),
        pattern: mat.pattern().clone(),
        classes,
    })
}

impl ClassPacking {
    /// Distinct copies of every class in the support, with their coefficient.
    pub fn copies(&self) -> impl Iterator<Item = (Vec<usize>, &Rational)> + '_ {
        self.classes.iter().flat_map(move |c| {
            (0..c.class.orbit_size()).map(move |off| (c.class.positions(off), &c.phi))
        })
    }

    pub fn to_fractional(&self) -> Result<FractionalPacking> {
        FractionalPacking::new(
            self.pattern.clone(),
            self.m,
            self.copies().map(|(p, c)| (p, c.clone())).collect(),
        )
    }

    /// Exact check that every edge of `K_m` receives total weight 1. The
    /// coefficients and weights are scaled to integers so the sums over all
    /// copies stay in machine arithmetic when they fit.
    pub fn verify(&self) -> Result<()> {
        let m = self.m;
        let k = self.pattern.k();
        let phis: Vec<&Rational> = self.classes.iter().map(|c| &c.phi).collect();
        let weights: Vec<Rational> = self.pattern.edges().map(|(_, _, w)| w.clone()).collect();
        let dp = rational::common_denominator(phis.iter().copied());
        let dw = rational::common_denominator(&weights);
        let scale = &dp * &dw;
        let big_phi: Vec<BigInt> = phis.iter().map(|p| (*p * &dp).to_integer()).collect();
        let big_w: Vec<BigInt> = weights.iter().map(|w| (w * &dw).to_integer()).collect();
        let fits = big_phi
            .iter()
            .chain(&big_w)
            .chain(std::iter::once(&scale))
            .all(|v| v.bits() < 40);
        let idx = |u: usize, v: usize| {
            let (u, v) = (u.min(v), u.max(v));
            u * m - u * (u + 1) / 2 + (v - u - 1)
        };
        let pairs: Vec<(usize, usize)> = (0..k).flat_map(|a| (a + 1..k).map(move |b| (a, b))).collect();
        let report = |u: usize, v: usize| {
            Err(Error::Verification(format!(
                "edge ({u}, {v}) of K_{m} does not receive weight exactly 1"
            )))
        };
        if fits {
            let mut load = vec![0i128; m * (m - 1) / 2];
            for (ci, c) in self.classes.iter().enumerate() {
                let phi = big_phi[ci].to_i128().unwrap();
                for off in 0..c.class.orbit_size() {
                    let p = c.class.positions(off);
                    for (pi, &(a, b)) in pairs.iter().enumerate() {
                        load[idx(p[a], p[b])] += phi * big_w[pi].to_i128().unwrap();
                    }
                }
            }
            let want = scale.to_i128().unwrap();
            for u in 0..m {
                for v in u + 1..m {
                    if load[idx(u, v)] != want {
                        return report(u, v);
                    }
                }
            }
        } else {
            let mut load = vec![BigInt::zero(); m * (m - 1) / 2];
            for (ci, c) in self.classes.iter().enumerate() {
                for off in 0..c.class.orbit_size() {
                    let p = c.class.positions(off);
                    for (pi, &(a, b)) in pairs.iter().enumerate() {
                        load[idx(p[a], p[b])] += &big_phi[ci] * &big_w[pi];
                    }
                }
            }
            for u in 0..m {
                for v in u + 1..m {
                    if load[idx(u, v)] != scale {
                        return report(u, v);
                    }
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp::matrix::compressed_matrix;
    use crate::lp::simplex::{solve_feasibility, FeasibilityOutcome};
    use crate::rational::{frac, int};

    #[test]
    fn triangles_in_k5() {
        let mat = compressed_matrix(&WeightedCgg::unit(3), 5).unwrap();
        let FeasibilityOutcome::Feasible { x } = solve_feasibility(&mat).unwrap() else {
            panic!("K_5 has a fractional triangle packing");
        };
        let cp = fractional_packing_from_solution(&mat, &x).unwrap();
        cp.verify().unwrap();
        let fp = cp.to_fractional().unwrap();
        assert_eq!(fp.entries().len(), 10);
        assert!(fp.entries().iter().all(|p| p.coef == frac(1, 3)));
        fp.verify_against_graph(&Graph::complete(Order::Cyclic, 5)).unwrap();
    }

    #[test]
    fn stabilizer_scaling() {
        // K_3 itself: one class (1,1,1) fixed by all 3 rotations, x = 1/3
        let mat = compressed_matrix(&WeightedCgg::unit(3), 3).unwrap();
        let out = solve_feasibility(&mat).unwrap();
        assert_eq!(out.dense_x(1).unwrap(), vec![frac(1, 3)]);
        let FeasibilityOutcome::Feasible { x } = out else { unreachable!() };
        let cp = fractional_packing_from_solution(&mat, &x).unwrap();
        assert_eq!(cp.classes[0].phi, int(1));
        cp.verify().unwrap();
        cp.to_fractional()
            .unwrap()
            .verify_against_graph(&Graph::complete(Order::Cyclic, 3))
            .unwrap();
    }

    #[test]
    fn zero_entries_leave_the_support() {
        let mat = compressed_matrix(&WeightedCgg::unit(3), 5).unwrap();
        let x = vec![(0, frac(1, 3)), (1, frac(1, 3))];
        let cp = fractional_packing_from_solution(&mat, &x).unwrap();
        assert_eq!(cp.classes.len(), 2);
        let bad = vec![(0, frac(1, 2)), (1, int(0))];
        assert!(matches!(
            fractional_packing_from_solution(&mat, &bad),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn linear_scaling() {
        let mat = compressed_matrix(&WeightedCgg::unit(3), 5).unwrap();
        let x = vec![(0, frac(1, 3)), (1, frac(1, 3))];
        let fp = fractional_packing_from_solution(&mat, &x)
            .unwrap()
            .to_fractional()
            .unwrap();
        let c = frac(7, 2);
        let scaled = fp.scaled(&c);
        scaled.verify_against(|_, _| c.clone()).unwrap();
        assert!(fp.verify_against(|_, _| c.clone()).is_err());
    }

    #[test]
    fn rejects_bad_placements() {
        let w = WeightedCgg::unit(3);
        assert!(FractionalPacking::new(w.clone(), 5, vec![(vec![0, 2, 1], int(1))]).is_err());
        assert!(FractionalPacking::new(w.clone(), 5, vec![(vec![0, 1, 5], int(1))]).is_err());
        assert!(FractionalPacking::new(w, 5, vec![(vec![3, 4, 0], int(-1))]).is_err());
    }

    #[test]
    fn mismatch_is_reported() {
        let w = WeightedCgg::unit(3);
        let fp = FractionalPacking::new(w, 4, vec![(vec![0, 1, 2], int(1))]).unwrap();
        let err = fp
            .verify_against_graph(&Graph::complete(Order::Cyclic, 4))
            .unwrap_err();
        assert!(err.to_string().contains("(0, 3)"));
    }
}
