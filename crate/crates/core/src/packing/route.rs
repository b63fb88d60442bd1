use num_traits::Zero;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::hypergraph::{blowup_family, implicit_nibble, MAX_CANDIDATES};
use super::schedule::plane_c4_schedule;
use super::{
    build_copy_hypergraph, compose_packings, extend_to_maximal, greedy_best_of,
    greedy_maximal_packing, nibble_matching, verify_packing, ComposeReport, HypergraphStats,
    NibbleStats, Packing, ScheduleReport,
};
use crate::error::{Error, Result};
use crate::graph::{blowup, cyclic_chromatic_number, Graph, Host, IntervalPartition, Order};
use crate::lp::{
    compressed_matrix, fractional_packing_from_solution, k4_witness_m, minimal_feasible_m,
    solve_feasibility, uniformize_by_rotation, weighted_representation, FeasibilityOutcome,
    FractionalPacking, WeightedCgg,
};
use crate::rational::{self, Rational};

/// How `m` is chosen for the `K_m` base host.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WitnessChoice {
    /// The closed-form witness for length weights `(w1, w2)`.
    Witness,
    /// The smallest odd `m` whose LP is feasible, scanning up to `max_m`.
    Minimal { max_m: usize },
}

/// The host `H` the pattern's weighted representation is packed into.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BaseHost {
    /// Interval chromatic number 2: no base host, greedy on `K_n`.
    None,
    Triangle,
    PlaneC4,
    Complete { m: usize },
}

#[derive(Clone, Debug)]
pub struct RouteOptions {
    /// Blowup factor; chosen from the divisors of `n` when absent.
    pub t: Option<usize>,
    /// Greedy restarts for the outer packing of a complete base host.
    pub restarts: usize,
    /// Nibble runs over the copy hypergraph; the largest matching is kept.
    pub nibble_runs: usize,
    pub epsilon: f64,
    pub witness: WitnessChoice,
}

impl Default for RouteOptions {
    fn default() -> Self {
        RouteOptions {
            t: None,
            restarts: 1000,
            nibble_runs: 50,
            epsilon: 0.1,
            witness: WitnessChoice::Witness,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RouteReport {
    pub chi_c: usize,
    pub partition: Vec<usize>,
    pub weights: Option<WeightedCgg>,
    pub uniform: Option<WeightedCgg>,
    pub base: BaseHost,
    pub n: usize,
    pub outer_n: usize,
    pub t: usize,
    /// Host vertices beyond `outer_n * t`, left untouched.
    pub unused_vertices: usize,
    pub outer_copies: usize,
    #[serde(with = "crate::rational::serde_str")]
    pub outer_coverage: Rational,
    pub schedule: Option<ScheduleReport>,
    pub hypergraph: Option<HypergraphStats>,
    pub nibble: Option<NibbleStats>,
    pub inner_copies: usize,
    #[serde(with = "crate::rational::serde_str")]
    pub inner_coverage: Rational,
    pub compose: Option<ComposeReport>,
    pub host_edges: u64,
    pub covered: u64,
    #[serde(with = "crate::rational::serde_str")]
    pub coverage: Rational,
}

/// Blowup factor: the divisor of `n` closest to `sqrt n` (smaller on ties)
/// leaving at least `min_outer` outer vertices, else `floor(sqrt n)`.
pub fn default_blowup_factor(n: usize, min_outer: usize) -> usize {
    let root = (n as f64).sqrt();
    (1..=n)
        .filter(|&t| n % t == 0 && n / t >= min_outer)
        .min_by(|&a, &b| {
            let (da, db) = ((a as f64 - root).abs(), (b as f64 - root).abs());
            da.partial_cmp(&db).unwrap().then(a.cmp(&b))
        })
        .filter(|&t| t > 1 || n < min_outer * 2)
        .unwrap_or((root as usize).max(1))
}

/// A perfect fractional packing of `w` into `H`, given one of the uniform
/// weighting `u` (which `rot` packs `w` into) by reading each `u`-copy as
/// its rotations of `w`.
fn pull_back(
    w: &WeightedCgg,
    rot: &FractionalPacking,
    upper: &FractionalPacking,
) -> Result<FractionalPacking> {
    let mut out = Vec::new();
    for pl in upper.entries() {
        for r in rot.entries() {
            let map = r.map.iter().map(|&i| pl.map[i]).collect();
            out.push((map, &pl.coef * &r.coef));
        }
    }
    Ok(FractionalPacking::new(w.clone(), upper.host_n(), out)?.aggregated())
}

/// Blowup pipeline for a cgg with cyclic chromatic number at most 4.
///
/// * `chi_c <= 2`: greedy maximal packing of `K_n`.
/// * `chi_c = 3`: `W` (weighted representation on 3 intervals) packs into
///   the triangle by its rotations, scaled by the common uniform weight.
/// * `chi_c = 4`, `w2 = 0`: same with the plane `C4`.
/// * `chi_c = 4`, `w2 > 0`: `K_m` with `m` from the witness formula or the
///   minimal scan, and the LP solution pulled back through the rotations.
///
/// The base host `H` is packed into `K_outer` (greedy for complete hosts,
/// rotation schedule plus greedy completion for `C4`), `G` is packed into
/// `H[t]` by a nibble over the δ-spaced copy hypergraph, and the two are
/// composed. The result is verified before it is returned.
pub fn pack_chi_le4(
    g: &Graph,
    n: usize,
    seed: u64,
    opts: &RouteOptions,
) -> Result<(Packing, RouteReport)> {
    if g.order() != Order::Cyclic {
        return Err(Error::param("pack_chi_le4 expects a cgg"));
    }
    if g.edge_count() == 0 {
        return Err(Error::param("the pattern has no edges"));
    }
    let (chi, p) = cyclic_chromatic_number(g)?;
    if chi > 4 {
        return Err(Error::UnsupportedRoute(format!(
            "chi_c = {chi} > 4; no constructive route (see long_edge_condition for the \
             weighted obstruction)"
        )));
    }
    let host = Host::complete(Order::Cyclic, n);
    let mut report = RouteReport {
        chi_c: chi,
        partition: p.starts().to_vec(),
        weights: None,
        uniform: None,
        base: BaseHost::None,
        n,
        outer_n: n,
        t: 1,
        unused_vertices: 0,
        outer_copies: 0,
        outer_coverage: Rational::zero(),
        schedule: None,
        hypergraph: None,
        nibble: None,
        inner_copies: 0,
        inner_coverage: Rational::zero(),
        compose: None,
        host_edges: host.edge_count(),
        covered: 0,
        coverage: Rational::zero(),
    };
    if chi <= 2 {
        let packing = greedy_maximal_packing(g, &host, seed)?;
        return finish(packing, report);
    }

    let w = weighted_representation(g, &p)?;
    let uni = uniformize_by_rotation(&w)?;
    let lw = uni.uniform.length_weights().expect("uniformized weights are uniform");
    report.weights = Some(w.clone());
    report.uniform = Some(uni.uniform.clone());
    let (h, phi, base) = if chi == 3 {
        let phi = uni.rotations.scaled(&(rational::int(1) / &lw[0]));
        (Graph::complete(Order::Cyclic, 3), phi, BaseHost::Triangle)
    } else if lw[1].is_zero() {
        let phi = uni.rotations.scaled(&(rational::int(1) / &lw[0]));
        (Graph::plane_cycle(4)?, phi, BaseHost::PlaneC4)
    } else {
        let (mat, x) = match opts.witness {
            WitnessChoice::Witness => {
                let m = k4_witness_m(&lw[0], &lw[1])? as usize;
                let mat = compressed_matrix(&uni.uniform, m)?;
                let out = solve_feasibility(&mat)?;
                (mat, out)
            }
            WitnessChoice::Minimal { max_m } => minimal_feasible_m(&uni.uniform, max_m)?
                .ok_or_else(|| {
                    Error::UnsupportedRoute(format!("no feasible K_m with m <= {max_m}"))
                })?,
        };
        let FeasibilityOutcome::Feasible { x } = x else {
            return Err(Error::Verification(format!(
                "the LP for K_{} is infeasible although the witness predicts feasibility",
                mat.m()
            )));
        };
        let upper = fractional_packing_from_solution(&mat, &x)?.to_fractional()?;
        let phi = pull_back(&w, &uni.rotations, &upper)?;
        let m = mat.m();
        (Graph::complete(Order::Cyclic, m), phi, BaseHost::Complete { m })
    };
    report.base = base.clone();

    let hn = h.n();
    let t = opts.t.unwrap_or_else(|| default_blowup_factor(n, hn));
    if t == 0 || n / t < hn {
        return Err(Error::param(format!(
            "n = {n} with blowup factor {t} leaves fewer than {hn} outer vertices"
        )));
    }
    let outer_n = n / t;
    report.outer_n = outer_n;
    report.t = t;
    report.unused_vertices = n - outer_n * t;

    let outer = match base {
        BaseHost::PlaneC4 if outer_n % 2 == 1 && outer_n >= 5 => {
            let (mut packing, sched) = plane_c4_schedule(outer_n)?;
            extend_to_maximal(&mut packing, seed)?;
            report.schedule = Some(sched.report);
            packing
        }
        _ => greedy_best_of(&h, &Host::complete(Order::Cyclic, outer_n), seed, opts.restarts)?,
    };
    report.outer_copies = outer.len();
    report.outer_coverage = outer.coverage();

    let inner = inner_packing(g, &p, &h, &phi, t, seed, opts, &mut report)?;
    report.inner_copies = inner.len();
    report.inner_coverage = inner.coverage();
    let (composed, crep) = compose_packings(&outer, &inner)?;
    report.compose = Some(crep);
    let packing = Packing::from_copies(host, g.clone(), composed.raw_copies().to_vec())?;
    finish(packing, report)
}

#[allow(clippy::too_many_arguments)]
fn inner_packing(
    g: &Graph,
    p: &IntervalPartition,
    h: &Graph,
    phi: &FractionalPacking,
    t: usize,
    seed: u64,
    opts: &RouteOptions,
    report: &mut RouteReport,
) -> Result<Packing> {
    let epsilon = opts.epsilon;
    let family = blowup_family(g, p, h, phi, t)?;
    let bh = Host::Graph(blowup(h, t)?);
    if family.size() <= MAX_CANDIDATES {
        let hg = build_copy_hypergraph(g, p, h, phi, t, seed)?;
        let (sel, stats) = (0..opts.nibble_runs.max(1) as u64)
            .map(|i| nibble_matching(&hg, epsilon, seed.wrapping_add(1 + i)))
            .reduce(|best, run| if run.0.len() > best.0.len() { run } else { best })
            .expect("at least one run");
        report.hypergraph = Some(hg.stats.clone());
        report.nibble = Some(stats);
        return hg.to_packing(&sel);
    }
    let mut free = bh.adjacency();
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(1));
    let mut copies = Vec::new();
    let stats = implicit_nibble(&family, &mut free, epsilon, &mut rng, &mut copies);
    report.nibble = Some(stats);
    Packing::from_copies(bh, g.clone(), copies)
}

fn finish(packing: Packing, mut report: RouteReport) -> Result<(Packing, RouteReport)> {
    verify_packing(&packing).into_result()?;
    report.covered = packing.covered_edges();
    report.coverage = packing.coverage();
    Ok((packing, report))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn blowup_factor_choice() {
        assert_eq!(default_blowup_factor(49, 3), 7);
        assert_eq!(default_blowup_factor(169, 3), 13);
        assert_eq!(default_blowup_factor(343, 3), 7);
        assert_eq!(default_blowup_factor(101, 3), 10);
        assert_eq!(default_blowup_factor(12, 3), 3);
    }

    #[test]
    fn triangle_route() {
        let k3 = Graph::complete(Order::Cyclic, 3);
        let (p, rep) = pack_chi_le4(&k3, 49, 0, &RouteOptions::default()).unwrap();
        assert_eq!(rep.chi_c, 3);
        assert_eq!(rep.base, BaseHost::Triangle);
        assert_eq!((rep.outer_n, rep.t), (7, 7));
        let c = rep.compose.unwrap();
        assert!(c.balanced());
        assert_eq!(c.covered, p.covered_edges());
        assert!(p.coverage_f64() > 0.5);
    }

    #[test]
    fn c4_route_uses_plane_c4_host() {
        let c4 = Graph::plane_cycle(4).unwrap();
        let (p, rep) = pack_chi_le4(&c4, 45, 3, &RouteOptions::default()).unwrap();
        assert_eq!(rep.chi_c, 4);
        assert_eq!(rep.uniform.unwrap().length_weights().unwrap()[1], rational::int(0));
        assert_eq!(rep.base, BaseHost::PlaneC4);
        assert!(rep.schedule.is_some());
        assert!(!p.is_empty());
    }

    #[test]
    fn chi3_pattern_with_wide_part() {
        // C6 with a chord pattern whose first interval holds two vertices
        let g = Graph::cgg(5, [(0, 2), (1, 3), (2, 4), (3, 0), (4, 1)]).unwrap();
        let (chi, _) = cyclic_chromatic_number(&g).unwrap();
        if chi == 3 {
            let (p, rep) = pack_chi_le4(&g, 60, 1, &RouteOptions::default()).unwrap();
            assert!(rep.hypergraph.unwrap().delta_max >= 1);
            assert!(verify_packing(&p).ok());
        }
    }

    #[test]
    fn low_chromatic_and_rejections() {
        let e = Graph::cgg(2, [(0, 1)]).unwrap();
        let (p, rep) = pack_chi_le4(&e, 9, 0, &RouteOptions::default()).unwrap();
        assert_eq!(rep.base, BaseHost::None);
        assert_eq!(p.coverage(), rational::int(1));
        let c5 = Graph::plane_cycle(5).unwrap();
        let err = pack_chi_le4(&c5, 50, 0, &RouteOptions::default()).unwrap_err();
        assert!(matches!(err, Error::UnsupportedRoute(ref s) if s.contains("chi_c = 5")));
        let lin = Graph::complete(Order::Linear, 3);
        assert!(pack_chi_le4(&lin, 50, 0, &RouteOptions::default()).is_err());
    }

    #[test]
    fn complete_k4_base_route_via_minimal_scan() {
        let k4 = Graph::complete(Order::Cyclic, 4);
        let opts = RouteOptions {
            witness: WitnessChoice::Minimal { max_m: 15 },
            t: Some(2),
            restarts: 1,
            ..Default::default()
        };
        match pack_chi_le4(&k4, 40, 0, &opts) {
            Ok((p, rep)) => {
                assert!(matches!(rep.base, BaseHost::Complete { .. }));
                assert!(verify_packing(&p).ok());
            }
            Err(e) => assert!(matches!(e, Error::UnsupportedRoute(_) | Error::InvalidParameter(_))),
        }
    }
}
