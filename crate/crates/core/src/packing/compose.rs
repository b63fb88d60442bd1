use serde::{Deserialize, Serialize};

use super::Packing;
use crate::error::{Error, Result};
use crate::graph::{blowup, Host};

/// Where the edges of `K_{n t}` end up after composing.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComposeReport {
    pub n: usize,
    pub t: usize,
    pub host_edges: u64,
    pub covered: u64,
    /// Pairs inside one `t`-interval: not edges of the blowup `K_n[t]`.
    pub non_blowup: u64,
    /// Bundles over edges of `K_n` that no outer copy uses.
    pub outer_uncovered: u64,
    /// Edges of used bundles that the inner packing misses.
    pub inner_uncovered: u64,
}

impl ComposeReport {
    /// The three categories and the covered edges add up to the host.
    pub fn balanced(&self) -> bool {
        self.covered + self.non_blowup + self.outer_uncovered + self.inner_uncovered
            == self.host_edges
    }
}

/// Lifts `inner` (a packing of `G` into `H[t]`) through every copy of `H` in
/// `outer` (a packing of `H` into `K_n`).
///
/// Vertex `(v, s)` of `H[t]`, stored as `v * t + s`, goes to `f(v) * t + s`
/// where `f` is the outer copy. Distinct outer copies share no edge of
/// `K_n`, so their lifted bundles are disjoint and the union is a packing of
/// `K_{n t}`.
pub fn compose_packings(outer: &Packing, inner: &Packing) -> Result<(Packing, ComposeReport)> {
    let h = outer.pattern();
    let Host::Complete { order, n } = *outer.host() else {
        return Err(Error::Composition("outer packing must live in a complete host".into()));
    };
    if h.order() != order || inner.pattern().order() != order {
        return Err(Error::Composition("vertex orders differ".into()));
    }
    let hn = h.n();
    if hn == 0 || inner.host().n() % hn != 0 {
        return Err(Error::Composition(
            "inner host size is not a multiple of |V(H)|".into(),
        ));
    }
    let t = inner.host().n() / hn;
    let expected = Host::Graph(blowup(h, t)?);
    if *inner.host() != expected {
        return Err(Error::Composition(format!(
            "inner host is not the blowup H[{t}] of the outer pattern"
        )));
    }
    let nt = n * t;
    let mut out = Packing::new(Host::complete(order, nt), inner.pattern().clone());
    let mut map = vec![0u32; inner.pattern().n()];
    for f in outer.copies() {
        for c in inner.copies() {
            for (i, &b) in c.iter().enumerate() {
                let (v, s) = (b as usize / t, b as usize % t);
                map[i] = (f[v] as usize * t + s) as u32;
            }
            out.push(&map);
        }
    }
    let (n64, t64) = (n as u64, t as u64);
    let kn = n64 * n64.saturating_sub(1) / 2;
    let blowup_edges = inner.host().edge_count();
    let report = ComposeReport {
        n,
        t,
        host_edges: out.host().edge_count(),
        covered: out.covered_edges(),
        non_blowup: n64 * (t64 * t64.saturating_sub(1) / 2),
        outer_uncovered: (kn - outer.covered_edges()) * t64 * t64,
        inner_uncovered: outer.len() as u64 * (blowup_edges - inner.covered_edges()),
    };
    Ok((out, report))
}
