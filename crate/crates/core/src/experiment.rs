//! Experiment manifests and the deterministic runners behind the CLI.
//!
//! A [`Manifest`] records everything a command needs: the command, the
//! input graph (inline), parameters, seeds, the generator name and the crate
//! version. [`run`] turns a manifest into an [`Outcome`] whose `result` JSON
//! has no timings or paths, so re-running a manifest gives identical bytes.

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::graph::{chromatic_number, Graph, Host, Order};
use crate::lp::{
    compressed_matrix, k4_witness_m, kk_witness_m, minimal_feasible_m, solve_feasibility,
    verify_certificate, verify_solution, FeasibilityOutcome, WeightedCgg,
};
use crate::obstruction::{coverage_upper_bound, within_bound};
use crate::packing::{
    greedy_best_of, pack_chi_le4, pack_ordered_chi3, plane_c4_schedule, verify_packing,
    OrderedOptions, Packing, RouteOptions, WitnessChoice,
};
use crate::rational::{self, Rational};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
/// The only generator used for randomness anywhere in the crate.
pub const RNG: &str = "ChaCha8Rng";
/// Feasibility LPs above this `m` are reported as formula-only.
pub const MAX_LP_M: usize = 1001;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Chroma,
    Feasible,
    Pack,
    Bound,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Route {
    /// `pack_chi_le4` for cggs, `pack_ordered_chi3` for ordered graphs.
    #[default]
    Auto,
    Greedy,
    /// The difference-quadruple schedule for the plane 4-cycle.
    C4Schedule,
}

fn is_default<T: Default + PartialEq>(v: &T) -> bool {
    *v == T::default()
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub n: Vec<usize>,
    #[serde(default, skip_serializing_if = "is_default")]
    pub route: Route,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cutoff: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub restarts: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nibble_runs: Option<usize>,
    /// Pattern size for `feasible`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    /// Length weights for `feasible`, as `"p/q"` strings.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    #[serde(default, skip_serializing_if = "is_default")]
    pub witness: bool,
    /// Scan limit for the smallest feasible `m`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub minimal: Option<usize>,
    /// A packing to compare against the bound.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub packing: Option<Packing>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    pub command: Command,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub graph: Option<Graph>,
    pub params: Params,
    #[serde(default)]
    pub seeds: Vec<u64>,
    pub rng: String,
    pub version: String,
}

impl Manifest {
    pub fn new(command: Command, graph: Option<Graph>, params: Params, seeds: Vec<u64>) -> Self {
        Manifest {
            command,
            graph,
            params,
            seeds,
            rng: RNG.to_string(),
            version: VERSION.to_string(),
        }
    }

    fn graph(&self) -> Result<&Graph> {
        self.graph
            .as_ref()
            .ok_or_else(|| Error::param(format!("{:?} needs an input graph", self.command)))
    }
}

/// What a run produced: deterministic result JSON, packings keyed by a file
/// stem, and a human-readable summary.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub result: Value,
    pub packings: Vec<(String, Packing)>,
    pub summary: Vec<String>,
}

impl Outcome {
    /// Pretty JSON with a trailing newline; the bytes compared for
    /// reproducibility.
    pub fn result_bytes(&self) -> Vec<u8> {
        let mut s = serde_json::to_string_pretty(&self.result).expect("values serialize");
        s.push('\n');
        s.into_bytes()
    }
}

/// Hex sha256 of the copy list `[[v0, ...], ...]` as compact JSON.
pub fn copies_digest(p: &Packing) -> String {
    let copies: Vec<&[u32]> = p.copies().collect();
    let bytes = serde_json::to_vec(&copies).expect("copies serialize");
    hex::encode(Sha256::digest(bytes))
}

pub fn run(manifest: &Manifest) -> Result<Outcome> {
    if manifest.rng != RNG {
        return Err(Error::param(format!(
            "manifest names generator {:?}; only {RNG} is available",
            manifest.rng
        )));
    }
    let mut out = match manifest.command {
        Command::Chroma => run_chroma(manifest)?,
        Command::Feasible => run_feasible(manifest)?,
        Command::Pack => run_pack(manifest)?,
        Command::Bound => run_bound(manifest)?,
    };
    let body = std::mem::take(&mut out.result);
    out.result = json!({ "manifest": manifest, "result": body });
    Ok(out)
}

fn chi_label(order: Order) -> &'static str {
    match order {
        Order::Cyclic => "chi_c",
        Order::Linear => "chi_<",
    }
}

fn run_chroma(man: &Manifest) -> Result<Outcome> {
    let g = man.graph()?;
    let (chi, p) = chromatic_number(g)?;
    let parts = p.parts();
    Ok(Outcome {
        result: json!({ "order": g.order(), "chi": chi, "partition": p.starts(), "parts": parts }),
        packings: Vec::new(),
        summary: vec![
            format!("{} = {chi}", chi_label(g.order())),
            format!("partition {parts:?}"),
        ],
    })
}

fn parse_weights(p: &Params) -> Result<Vec<Rational>> {
    let ws = p.weights.as_ref().ok_or_else(|| Error::param("feasible needs weights"))?;
    ws.iter().map(|w| rational::parse(w)).collect()
}

fn run_feasible(man: &Manifest) -> Result<Outcome> {
    let p = &man.params;
    let k = p.k.ok_or_else(|| Error::param("feasible needs k"))?;
    let weights = parse_weights(p)?;
    let mut summary = Vec::new();
    let mut result = json!({
        "k": k,
        "weights": weights.iter().map(rational::format).collect::<Vec<_>>(),
    });

    if p.witness && k != 4 {
        // 2k-vertex witness with one weight per length
        if k != 2 * weights.len() || weights.len() < 3 {
            return Err(Error::param(
                "the witness needs k = 4 with two weights, or k = 2l with l >= 3 weights",
            ));
        }
        let w = kk_witness_m(&weights, weights.len())?;
        summary.push(match w.m {
            Some(m) => format!("condition holds: m' = {}, m = {m}", w.m_prime.unwrap()),
            None => "condition fails: no witness m".to_string(),
        });
        result["witness"] = serde_json::to_value(&w)?;
        match w.m {
            Some(m) if (m as usize) <= MAX_LP_M => {
                let wc = WeightedCgg::from_length_weights(k, &weights)?;
                solve_at(&wc, m as usize, &mut result, &mut summary)?;
            }
            Some(m) => {
                result["lp"] = Value::Null;
                summary.push(format!("LP at m = {m} skipped (limit {MAX_LP_M})"));
            }
            None => result["lp"] = Value::Null,
        }
        return Ok(Outcome {
            result,
            packings: Vec::new(),
            summary,
        });
    }

    let wc = WeightedCgg::from_length_weights(k, &weights)?;
    if let Some(max_m) = p.minimal {
        match minimal_feasible_m(&wc, max_m)? {
            Some((mat, _)) => {
                summary.push(format!("m = {} (smallest feasible)", mat.m()));
                result["source"] = json!("minimal");
                solve_at(&wc, mat.m(), &mut result, &mut summary)?;
            }
            None => {
                summary.push(format!("no feasible odd m <= {max_m}"));
                result["source"] = json!("minimal");
                result["m"] = Value::Null;
            }
        }
    } else {
        let m = if p.witness {
            if weights.len() != 2 {
                return Err(Error::param("the k = 4 witness needs weights w1,w2"));
            }
            result["source"] = json!("witness");
            k4_witness_m(&weights[0], &weights[1])? as usize
        } else {
            result["source"] = json!("given");
            p.m.ok_or_else(|| Error::param("feasible needs m, witness or minimal"))?
        };
        solve_at(&wc, m, &mut result, &mut summary)?;
    }
    Ok(Outcome {
        result,
        packings: Vec::new(),
        summary,
    })
}

fn solve_at(w: &WeightedCgg, m: usize, result: &mut Value, summary: &mut Vec<String>) -> Result<()> {
    if m % 2 == 0 {
        return Err(Error::param(format!("m = {m} is even; K_m hosts need odd m")));
    }
    let mat = compressed_matrix(w, m)?;
    let outcome = solve_feasibility(&mat)?;
    let verified = match &outcome {
        FeasibilityOutcome::Feasible { x } => verify_solution(&mat, x),
        FeasibilityOutcome::Infeasible { y } => verify_certificate(&mat, y),
    };
    if !verified {
        return Err(Error::Verification(format!("LP outcome at m = {m} fails its check")));
    }
    result["m"] = json!(m);
    result["classes"] = json!(mat.classes().count());
    result["verified"] = json!(true);
    match &outcome {
        FeasibilityOutcome::Feasible { x } => {
            summary.push(format!("m = {m}, feasible"));
            let support: Vec<Value> = x
                .iter()
                .map(|(j, v)| json!({ "gaps": mat.gaps(*j), "x": rational::format(v) }))
                .collect();
            for s in &support {
                summary.push(format!("  class {} x = {}", s["gaps"], s["x"].as_str().unwrap()));
            }
            result["support"] = Value::Array(support);
        }
        FeasibilityOutcome::Infeasible { y } => {
            summary.push(format!("m = {m}, infeasible"));
            summary.push(format!(
                "  certificate y = [{}]",
                y.iter().map(rational::format).collect::<Vec<_>>().join(", ")
            ));
        }
    }
    result["lp"] = serde_json::to_value(&outcome)?;
    Ok(())
}

fn route_options(p: &Params) -> RouteOptions {
    let d = RouteOptions::default();
    RouteOptions {
        t: p.t,
        restarts: p.restarts.unwrap_or(d.restarts),
        nibble_runs: p.nibble_runs.unwrap_or(d.nibble_runs),
        epsilon: p.epsilon.unwrap_or(d.epsilon),
        witness: match p.minimal {
            Some(max_m) => WitnessChoice::Minimal { max_m },
            None => WitnessChoice::Witness,
        },
    }
}

/// One packing run; the report is route specific.
fn pack_once(g: &Graph, n: usize, seed: u64, p: &Params) -> Result<(Packing, &'static str, Value)> {
    match (p.route, g.order()) {
        (Route::Greedy, order) => {
            let host = Host::complete(order, n);
            let pk = greedy_best_of(g, &host, seed, p.restarts.unwrap_or(1))?;
            Ok((pk, "greedy", Value::Null))
        }
        (Route::C4Schedule, _) => {
            if *g != Graph::plane_cycle(4)? {
                return Err(Error::UnsupportedRoute(
                    "the c4 schedule packs the plane 4-cycle only".into(),
                ));
            }
            let (pk, sched) = plane_c4_schedule(n)?;
            Ok((pk, "c4_schedule", serde_json::to_value(sched)?))
        }
        (Route::Auto, Order::Cyclic) => {
            let (pk, rep) = pack_chi_le4(g, n, seed, &route_options(p))?;
            Ok((pk, "chi_le4", serde_json::to_value(rep)?))
        }
        (Route::Auto, Order::Linear) => {
            let d = OrderedOptions::default();
            let opts = OrderedOptions {
                epsilon: p.epsilon.unwrap_or(d.epsilon),
                cutoff: p.cutoff,
                partition: None,
            };
            let (pk, rep) = pack_ordered_chi3(g, n, seed, &opts)?;
            Ok((pk, "ordered_chi3", serde_json::to_value(rep)?))
        }
    }
}

fn run_pack(man: &Manifest) -> Result<Outcome> {
    let g = man.graph()?;
    let p = &man.params;
    if p.n.is_empty() {
        return Err(Error::param("pack needs at least one n"));
    }
    let seeds = if man.seeds.is_empty() { vec![0] } else { man.seeds.clone() };
    let mut runs = Vec::new();
    let mut packings = Vec::new();
    let mut summary = vec![format!(
        "{:>6} {:>6} {:>13} {:>8} {:>9} {:>9}",
        "n", "seed", "route", "copies", "coverage", "bound"
    )];
    for &n in &p.n {
        // the bound depends on n only
        let bound = match g.order() {
            Order::Cyclic if n % 2 == 1 && g.edge_count() > 0 => {
                coverage_upper_bound(g, n, None).ok()
            }
            _ => None,
        };
        for &seed in &seeds {
            let (pk, route, report) = pack_once(g, n, seed, p)?;
            let ver = verify_packing(&pk);
            if !ver.ok() {
                return Err(Error::Verification(format!(
                    "n = {n}, seed = {seed}: {:?}",
                    ver.violations
                )));
            }
            let mut run = json!({
                "n": n,
                "seed": seed,
                "route": route,
                "copies": pk.len(),
                "covered_edges": pk.covered_edges(),
                "host_edges": pk.host().edge_count(),
                "coverage": rational::format(&pk.coverage()),
                "coverage_f64": pk.coverage_f64(),
                "copies_sha256": copies_digest(&pk),
                "verified": true,
                "report": report,
            });
            let mut bound_col = "-".to_string();
            if let Some(b) = &bound {
                let within = within_bound(&pk.coverage(), b);
                run["bound"] = json!({
                    "bound": rational::format(&b.bound),
                    "mode": b.mode,
                    "within": within,
                });
                bound_col = format!("{:.4}", rational::to_f64(&b.bound));
            }
            summary.push(format!(
                "{n:>6} {seed:>6} {route:>13} {:>8} {:>9.4} {bound_col:>9}",
                pk.len(),
                pk.coverage_f64()
            ));
            if let Some(levels) = run["report"]["levels"].as_array() {
                for l in levels {
                    summary.push(format!(
                        "    depth {} interval {}..+{} sizes {} leftover {}",
                        l["depth"], l["start"], l["len"], l["sizes"], l["leftover"]
                    ));
                }
            }
            runs.push(run);
            packings.push((format!("packing-n{n}-s{seed}"), pk));
        }
    }
    Ok(Outcome {
        result: json!({ "runs": runs }),
        packings,
        summary,
    })
}

fn run_bound(man: &Manifest) -> Result<Outcome> {
    let g = man.graph()?;
    let p = &man.params;
    let mut ns = p.n.clone();
    if let Some(pk) = &p.packing {
        if pk.pattern() != g {
            return Err(Error::param("the packing's pattern differs from the input graph"));
        }
        if !ns.contains(&pk.host().n()) {
            ns.push(pk.host().n());
        }
    }
    if ns.is_empty() {
        return Err(Error::param("bound needs n or a packing"));
    }
    let mut reports = Vec::new();
    let mut summary = Vec::new();
    let mut comparison = Value::Null;
    for &n in &ns {
        let r = coverage_upper_bound(g, n, None)?;
        let bf = rational::to_f64(&r.bound);
        let mode = serde_json::to_value(r.mode)?;
        summary.push(format!(
            "n = {n}: L = {}, bound = {} ({bf:.4}), mode {}",
            r.l,
            rational::format(&r.bound),
            mode.as_str().unwrap_or_default()
        ));
        if let Some(pk) = p.packing.as_ref().filter(|pk| pk.host().n() == n) {
            verify_packing(pk).into_result()?;
            let within = within_bound(&pk.coverage(), &r);
            let verdict = format!(
                "achieved {:.4} {} bound {bf:.4}",
                pk.coverage_f64(),
                if within { "≤" } else { ">" }
            );
            summary.push(verdict.clone());
            comparison = json!({
                "achieved": rational::format(&pk.coverage()),
                "within": within,
                "verdict": verdict,
            });
        }
        reports.push(serde_json::to_value(r)?);
    }
    Ok(Outcome {
        result: json!({ "bounds": reports, "comparison": comparison }),
        packings: Vec::new(),
        summary,
    })
}
