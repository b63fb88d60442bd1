use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use super::matrix::{compressed_matrix, CompressedMatrix};
use super::simplex::{solve_feasibility, FeasibilityOutcome};
use super::weighted::WeightedCgg;
use crate::error::{Error, Result};
use crate::rational::{self, Rational};

/// Host size `2m' + 1` with `m' = ceil(12 (w1 + w2)^2 / (w1 w2))` for a
/// four-vertex pattern with side weight `w1` and diagonal weight `w2`.
pub fn k4_witness_m(w1: &Rational, w2: &Rational) -> Result<u64> {
    if !w1.is_positive() || !w2.is_positive() {
        return Err(Error::param("both weights must be positive"));
    }
    let s = w1 + w2;
    let mp = rational::ceil_to_u64(&(rational::int(12) * &s * &s / (w1 * w2)))?;
    Ok(2 * mp + 1)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct KkWitness {
    pub k: usize,
    pub c_k: u64,
    /// `w_k >= C_k * sum_{l<k} w_l`.
    pub condition_holds: bool,
    #[serde(with = "crate::rational::serde_str")]
    pub longest: Rational,
    #[serde(with = "crate::rational::serde_str")]
    pub shorter_sum: Rational,
    pub m_prime: Option<u64>,
    pub m: Option<u64>,
}

/// The `2k`-vertex witness: when the longest-length weight dominates,
/// `m' = ceil(24 k^3 sum_l w_l / w_1)` and `m = 2m' + 1`.
pub fn kk_witness_m(weights: &[Rational], k: usize) -> Result<KkWitness> {
    if k <= 2 {
        return Err(Error::param("k must exceed 2"));
    }
    if weights.len() != k {
        return Err(Error::param(format!("expected {k} weights, got {}", weights.len())));
    }
    if weights.iter().any(Signed::is_negative) {
        return Err(Error::param("weights must be nonnegative"));
    }
    if !weights[0].is_positive() {
        return Err(Error::param("w_1 must be positive"));
    }
    let c_k = 16 * k as u64;
    let shorter_sum = weights[..k - 1].iter().fold(Rational::zero(), |a, w| a + w);
    let longest = weights[k - 1].clone();
    let condition_holds = longest >= rational::int(c_k as i64) * &shorter_sum;
    let (m_prime, m) = if condition_holds {
        let total = weights.iter().fold(Rational::zero(), |a, w| a + w);
        let k3 = rational::int((k * k * k) as i64);
        let mp = rational::ceil_to_u64(&(rational::int(24) * k3 * total / &weights[0]))?;
        (Some(mp), Some(2 * mp + 1))
    } else {
        (None, None)
    };
    Ok(KkWitness {
        k,
        c_k,
        condition_holds,
        longest,
        shorter_sum,
        m_prime,
        m,
    })
}

/// Smallest odd `m <= m_max` at which `w` has a perfect fractional packing
/// of `K_m`, scanning upward from the first odd `m >= max(k, 3)`.
pub fn minimal_feasible_m(
    w: &WeightedCgg,
    m_max: usize,
) -> Result<Option<(CompressedMatrix, FeasibilityOutcome)>> {
    let mut m = w.k().max(3);
    if m % 2 == 0 {
        m += 1;
    }
    while m <= m_max {
        let mat = compressed_matrix(w, m)?;
        let out = solve_feasibility(&mat)?;
        if out.is_feasible() {
            return Ok(Some((mat, out)));
        }
        m += 2;
    }
    Ok(None)
}
