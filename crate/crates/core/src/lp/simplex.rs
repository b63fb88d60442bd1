use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use super::matrix::ColumnSource;
use crate::error::{Error, Result};
use crate::rational::{self, Rational};

/// Result of deciding `{x >= 0 : Mx = 1}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum FeasibilityOutcome {
    /// Sparse solution: `(column, value)` pairs with positive values, sorted
    /// by column.
    Feasible {
        #[serde(with = "sparse_serde")]
        x: Vec<(usize, Rational)>,
    },
    /// `y` with `M^T y >= 0` and `1^T y < 0`, scaled to a primitive integer
    /// vector.
    Infeasible {
        #[serde(with = "crate::rational::serde_vec")]
        y: Vec<Rational>,
    },
}

impl FeasibilityOutcome {
    pub fn is_feasible(&self) -> bool {
        matches!(self, FeasibilityOutcome::Feasible { .. })
    }

    /// Dense `x` of length `cols`, or `None` for a certificate.
    pub fn dense_x(&self, cols: usize) -> Option<Vec<Rational>> {
        match self {
            FeasibilityOutcome::Feasible { x } => {
                let mut out = vec![Rational::zero(); cols];
                for (j, v) in x {
                    out[*j] = v.clone();
                }
                Some(out)
            }
            FeasibilityOutcome::Infeasible { .. } => None,
        }
    }
}

mod sparse_serde {
    use super::Rational;
    use crate::rational::{format, parse};
    use serde::{de::Error as _, Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(x: &[(usize, Rational)], s: S) -> Result<S::Ok, S::Error> {
        x.iter()
            .map(|(j, v)| (*j, format(v)))
            .collect::<Vec<_>>()
            .serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<(usize, Rational)>, D::Error> {
        Vec::<(usize, String)>::deserialize(d)?
            .into_iter()
            .map(|(j, v)| Ok((j, parse(&v).map_err(D::Error::custom)?)))
            .collect()
    }
}

/// Checks `x >= 0` and `Mx = 1` exactly.
pub fn verify_solution<C: ColumnSource + ?Sized>(m: &C, x: &[(usize, Rational)]) -> bool {
    let mut acc = vec![Rational::zero(); m.rows()];
    for (j, v) in x {
        if v.is_negative() || *j >= m.cols() {
            return false;
        }
        for (r, a) in m.column(*j) {
            acc[r] += a * v;
        }
    }
    acc.iter().all(|v| v.is_one())
}

/// Checks `1^T y < 0` and `M^T y >= 0` over every column exactly.
pub fn verify_certificate<C: ColumnSource + ?Sized>(m: &C, y: &[Rational]) -> bool {
    y.len() == m.rows()
        && y.iter().fold(Rational::zero(), |a, v| a + v).is_negative()
        && m.first_with_sign(y, false).is_none()
}

/// Degenerate pivots tolerated before switching to Bland's rule.
const STALL_LIMIT: usize = 50;

/// Exact phase-1 revised simplex with column generation.
///
/// The auxiliary problem is `min 1^T a` subject to `Mx + a = 1`, starting from
/// the all-artificial basis. Pricing picks a column with large `pi . a_j`
/// (the column source may use a floating-point estimate but must confirm
/// the sign exactly). After a run of degenerate pivots it
/// falls back to Bland's rule (first improving column, then artificials)
/// until the objective drops again, so the run cannot cycle. The ratio test
/// breaks ties on the smallest variable index. The returned branch is
/// re-verified before it is handed back.
pub fn solve_feasibility<C: ColumnSource + ?Sized>(m: &C) -> Result<FeasibilityOutcome> {
    let mut s = Simplex::new(m);
    let outcome = s.run()?;
    let ok = match &outcome {
        FeasibilityOutcome::Feasible { x } => verify_solution(m, x),
        FeasibilityOutcome::Infeasible { y } => verify_certificate(m, y),
    };
    if !ok {
        return Err(Error::Verification(
            "simplex produced an outcome that does not verify".into(),
        ));
    }
    Ok(outcome)
}

/// Revised simplex state with the basis inverse kept fraction-free:
/// `B^{-1} = n / d` where `d = det B` and `n = adj B` are integral. Entering
/// columns are scaled to integers first; `scale` remembers the factor per
/// basis row so solutions can be mapped back.
struct Simplex<'a, C: ?Sized> {
    m: &'a C,
    rows: usize,
    cols: usize,
    /// Variable index per basis row; artificial `i` is `cols + i`.
    basis: Vec<usize>,
    scale: Vec<BigInt>,
    n: Vec<Vec<BigInt>>,
    d: BigInt,
    /// `n * 1`, so the basic values are `xn / d`.
    xn: Vec<BigInt>,
}

impl<'a, C: ColumnSource + ?Sized> Simplex<'a, C> {
    fn new(m: &'a C) -> Self {
        let (rows, cols) = (m.rows(), m.cols());
        let n = (0..rows)
            .map(|i| {
                (0..rows)
                    .map(|j| if i == j { BigInt::one() } else { BigInt::zero() })
                    .collect()
            })
            .collect();
        Simplex {
            m,
            rows,
            cols,
            basis: (cols..cols + rows).collect(),
            scale: vec![BigInt::one(); rows],
            n,
            d: BigInt::one(),
            xn: vec![BigInt::one(); rows],
        }
    }

    fn is_artificial(&self, var: usize) -> bool {
        var >= self.cols
    }

    fn objective(&self) -> Rational {
        let num = (0..self.rows)
            .filter(|&i| self.is_artificial(self.basis[i]))
            .fold(BigInt::zero(), |a, i| a + &self.xn[i]);
        Rational::new(num, self.d.clone())
    }

    /// `pi = c_B^T B^{-1}` with cost 1 on artificials.
    fn duals(&self) -> Vec<Rational> {
        let mut pi = vec![BigInt::zero(); self.rows];
        for i in 0..self.rows {
            if self.is_artificial(self.basis[i]) {
                for (p, b) in pi.iter_mut().zip(&self.n[i]) {
                    if !b.is_zero() {
                        *p += b;
                    }
                }
            }
        }
        pi.into_iter()
            .map(|p| Rational::new(p, self.d.clone()))
            .collect()
    }

    fn entering(&self, pi: &[Rational], bland: bool) -> Option<usize> {
        let structural = if bland {
            self.m.first_with_sign(pi, true)
        } else {
            self.m.most_positive(pi)
        };
        if structural.is_some() {
            return structural;
        }
        let in_basis: std::collections::BTreeSet<usize> = self.basis.iter().copied().collect();
        (0..self.rows)
            .find(|&i| !in_basis.contains(&(self.cols + i)) && pi[i] > Rational::one())
            .map(|i| self.cols + i)
    }

    /// Integer entries of the entering column and the factor applied.
    fn entering_column(&self, var: usize) -> (Vec<(usize, BigInt)>, BigInt) {
        if self.is_artificial(var) {
            return (vec![(var - self.cols, BigInt::one())], BigInt::one());
        }
        let col = self.m.column(var);
        let c = rational::common_denominator(col.iter().map(|(_, v)| v));
        let ints = col
            .into_iter()
            .map(|(r, v)| (r, (v * &c).to_integer()))
            .collect();
        (ints, c)
    }

    fn run(&mut self) -> Result<FeasibilityOutcome> {
        let mut last = self.objective();
        let mut stalled = 0usize;
        loop {
            let z = self.objective();
            if z.is_zero() {
                return Ok(self.solution());
            }
            if z < last {
                last = z;
                stalled = 0;
            } else {
                stalled += 1;
            }
            let pi = self.duals();
            let Some(var) = self.entering(&pi, stalled >= STALL_LIMIT) else {
                return Ok(FeasibilityOutcome::Infeasible {
                    y: primitive(pi.iter().map(|p| -p).collect()),
                });
            };
            let (a, c) = self.entering_column(var);
            // u = n a, so B^{-1} a = u / d
            let u: Vec<BigInt> = self
                .n
                .iter()
                .map(|row| {
                    a.iter()
                        .filter(|(r, _)| !row[*r].is_zero())
                        .fold(BigInt::zero(), |acc, (r, v)| acc + &row[*r] * v)
                })
                .collect();
            let positive_d = self.d.is_positive();
            let mut leave: Option<usize> = None;
            for i in 0..self.rows {
                if u[i].is_zero() || u[i].is_positive() != positive_d {
                    continue;
                }
                // ratio xb_i / (B^{-1} a)_i = xn_i / u_i, compared by cross-multiplying
                let better = match leave {
                    None => true,
                    Some(p) => {
                        let lhs = &self.xn[i] * &u[p];
                        let rhs = &self.xn[p] * &u[i];
                        // both u_i, u_p share the sign of d
                        let (lhs, rhs) = if positive_d { (lhs, rhs) } else { (rhs, lhs) };
                        lhs < rhs || (lhs == rhs && self.basis[i] < self.basis[p])
                    }
                };
                if better {
                    leave = Some(i);
                }
            }
            let p = leave.ok_or_else(|| {
                Error::Verification("phase-1 problem reported unbounded".into())
            })?;
            self.pivot(p, var, c, &u);
        }
    }

    fn pivot(&mut self, p: usize, var: usize, c: BigInt, u: &[BigInt]) {
        let up = &u[p];
        let prow = self.n[p].clone();
        let pxn = self.xn[p].clone();
        for i in 0..self.rows {
            if i == p {
                continue;
            }
            let ui = &u[i];
            for (v, q) in self.n[i].iter_mut().zip(&prow) {
                let mut t = &*v * up;
                if !ui.is_zero() && !q.is_zero() {
                    t -= ui * q;
                }
                *v = t / &self.d;
            }
            self.xn[i] = (&self.xn[i] * up - ui * &pxn) / &self.d;
        }
        self.d = up.clone();
        self.basis[p] = var;
        self.scale[p] = c;
    }

    fn solution(&self) -> FeasibilityOutcome {
        let mut x: Vec<(usize, Rational)> = (0..self.rows)
            .filter(|&i| !self.is_artificial(self.basis[i]))
            .map(|i| {
                let v = Rational::new(&self.xn[i] * &self.scale[i], self.d.clone());
                (self.basis[i], v)
            })
            .filter(|(_, v)| v.is_positive())
            .collect();
        x.sort_by_key(|(j, _)| *j);
        FeasibilityOutcome::Feasible { x }
    }
}

/// Positive multiple of `y` with coprime integer entries.
fn primitive(y: Vec<Rational>) -> Vec<Rational> {
    let den = rational::common_denominator(&y);
    let ints: Vec<BigInt> = y.iter().map(|v| (v * &den).to_integer()).collect();
    let g = ints.iter().fold(BigInt::zero(), |a, v| a.gcd(v));
    if g.is_zero() {
        return y;
    }
    ints.into_iter()
        .map(|v| Rational::from_integer(v / &g))
        .collect()
}
