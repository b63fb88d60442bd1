use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::hypergraph::{delta_max, implicit_nibble, SpacedFamily};
use super::{greedy_maximal_packing, Packing};
use crate::error::{Error, Result};
use crate::graph::{interval_chromatic_number, BitMatrix, Graph, Host, IntervalPartition, Order};
use crate::rational;

#[derive(Clone, Debug)]
pub struct OrderedOptions {
    pub epsilon: f64,
    /// Intervals shorter than this are left alone. Default
    /// `3 * max(e_ij)^2 * |V(G)|`.
    pub cutoff: Option<usize>,
    /// Three-part witness partition; computed when absent.
    pub partition: Option<IntervalPartition>,
}

impl Default for OrderedOptions {
    fn default() -> Self {
        OrderedOptions {
            epsilon: 0.1,
            cutoff: None,
            partition: None,
        }
    }
}

/// One recursion step on the interval `start .. start + len`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelTrace {
    pub depth: usize,
    pub start: usize,
    pub len: usize,
    pub n_prime: usize,
    /// `|I1|, |I2|, |I3|` = `e12 e13 n'`, `e12 e23 n'`, `e13 e23 n'`.
    pub sizes: [usize; 3],
    /// `|I4| = len - |I1| - |I2| - |I3|`, always below `q`.
    pub leftover: usize,
    pub cross_edges: u64,
    pub copies: u64,
    pub swept: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OrderedReport {
    /// `"greedy"` for interval chromatic number 2, else `"recursive"`.
    pub route: String,
    pub chi: usize,
    pub partition: Vec<usize>,
    pub e: [usize; 3],
    pub q: usize,
    pub cutoff: usize,
    pub levels: Vec<LevelTrace>,
    pub host_edges: u64,
    pub covered: u64,
    /// Pairs touching some `I4`.
    pub leftover_edges: u64,
    /// Cross pairs between `I1, I2, I3` left uncovered at their level.
    pub cross_uncovered: u64,
    /// Pairs inside intervals shorter than the cutoff.
    pub base_uncovered: u64,
}

fn pairs(n: usize) -> u64 {
    let n = n as u64;
    n * n.saturating_sub(1) / 2
}

/// Recursive packing of an ordered graph with interval chromatic number 3
/// into the ordered `K_n`.
///
/// With cross-edge counts `e12, e13, e23` between the three parts and
/// `q = e12 e13 + e12 e23 + e13 e23`, an interval of length `len` is split
/// into consecutive `I1, I2, I3, I4` of sizes `e12 e13 n'`, `e12 e23 n'`,
/// `e13 e23 n'` and the rest, where `n' = floor(len / q)`. The three cross
/// bundles form an irregular blowup of the ordered triangle in which every
/// bundle has `e_ab * e12 e13 e23 n'^2` pairs. It is packed by a nibble over
/// copies that put part `a` in `I_a` with in-part spacing `delta` in
/// `1..=max(1, floor(ln n'))`, and the procedure recurses on `I1, I2, I3`
/// until intervals drop below the cutoff.
pub fn pack_ordered_chi3(
    g: &Graph,
    n: usize,
    seed: u64,
    opts: &OrderedOptions,
) -> Result<(Packing, OrderedReport)> {
    if g.order() != Order::Linear {
        return Err(Error::param("the ordered packer needs an ordered graph"));
    }
    let (chi, p) = match &opts.partition {
        Some(p) => {
            if p.order() != Order::Linear || p.n() != g.n() || !p.is_valid_for(g) {
                return Err(Error::pre("supplied partition is not a valid interval colouring"));
            }
            (p.k(), p.clone())
        }
        None => interval_chromatic_number(g)?,
    };
    let host = Host::complete(Order::Linear, n);
    let mut report = OrderedReport {
        route: "recursive".into(),
        chi,
        partition: p.starts().to_vec(),
        e: [0; 3],
        q: 0,
        cutoff: 0,
        levels: Vec::new(),
        host_edges: pairs(n),
        covered: 0,
        leftover_edges: 0,
        cross_uncovered: 0,
        base_uncovered: 0,
    };
    if chi <= 2 {
        let packing = greedy_maximal_packing(g, &host, seed)?;
        report.route = "greedy".into();
        report.covered = packing.covered_edges();
        return Ok((packing, report));
    }
    if chi > 3 {
        return Err(Error::UnsupportedRoute(format!(
            "interval chromatic number {chi} exceeds 3"
        )));
    }
    let part = p.part_of();
    let mut e = [0usize; 3];
    for (u, v) in g.edges() {
        let (a, b) = (part[u].min(part[v]), part[u].max(part[v]));
        e[a + b - 1] += 1;
    }
    if e.contains(&0) {
        return Err(Error::pre(format!(
            "cross-edge counts (e12, e13, e23) = {e:?} must all be positive"
        )));
    }
    let [e12, e13, e23] = e;
    let q = e12 * e13 + e12 * e23 + e13 * e23;
    let emax = *e.iter().max().unwrap();
    let cutoff = opts.cutoff.unwrap_or(3 * emax * emax * g.n());
    report.e = e;
    report.q = q;
    report.cutoff = cutoff;

    let mut free = BitMatrix::complete(n);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    let r = g.edge_count() as u64;
    let mut stack = vec![(0usize, n, 0usize)];
    while let Some((start, len, depth)) = stack.pop() {
        let np = len / q;
        if len < cutoff || np == 0 {
            report.base_uncovered += pairs(len);
            continue;
        }
        let sizes = [e12 * e13 * np, e12 * e23 * np, e13 * e23 * np];
        let used: usize = sizes.iter().sum();
        let leftover = len - used;
        let starts = vec![start, start + sizes[0], start + sizes[0] + sizes[1]];
        let mut family = SpacedFamily::new(g, &p, delta_max(np));
        family.add_layout(starts.clone(), sizes.to_vec(), &rational::int(1));
        let before = out.len();
        let stats = implicit_nibble(&family, &mut free, opts.epsilon, &mut rng, &mut out);
        let copies = ((out.len() - before) / g.n()) as u64;
        let [a, b, c] = sizes.map(|s| s as u64);
        let cross = a * b + a * c + b * c;
        report.covered += copies * r;
        report.cross_uncovered += cross - copies * r;
        report.leftover_edges += pairs(leftover) + (leftover * used) as u64;
        report.levels.push(LevelTrace {
            depth,
            start,
            len,
            n_prime: np,
            sizes,
            leftover,
            cross_edges: cross,
            copies,
            swept: stats.swept as u64,
        });
        for i in (0..3).rev() {
            stack.push((starts[i], sizes[i], depth + 1));
        }
    }
    let packing = Packing::from_copies(host, g.clone(), out)?;
    Ok((packing, report))
}
