//! Network construction: household cliques, global stubs paired uniformly
//! (label X=0) or by total-degree quantile (label X=1), and household
//! rewiring.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::dist::DiscreteDist;
use crate::error::{Error, Result};
use crate::network::{Edge, EdgeKind, Network};
use crate::rng::{rng_from_seed, SimRng};

#[derive(Debug, Clone)]
pub struct GenSpec {
    pub n: usize,
    pub household: DiscreteDist,
    pub global: DiscreteDist,
    pub r: f64,
    pub n_q: usize,
    pub seed: u64,
}

impl GenSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidParameter("network needs at least one node".into()));
        }
        if !(-1.0..=1.0).contains(&self.r) {
            return Err(Error::InvalidParameter(format!("r = {} outside [-1, 1]", self.r)));
        }
        if self.n_q == 0 {
            return Err(Error::InvalidParameter("n_Q must be at least 1".into()));
        }
        if self.household.prob(0) > 0.0 {
            return Err(Error::InvalidParameter("household sizes must be at least 1".into()));
        }
        Ok(())
    }
}

/// Sizes of `n_q` near-equal consecutive blocks of `total` items, larger
/// blocks first.
pub fn block_sizes(total: usize, n_q: usize) -> Vec<usize> {
    let base = total / n_q;
    let extra = total % n_q;
    (0..n_q).map(|i| base + usize::from(i < extra)).collect()
}

fn block_of(rank: usize, total: usize, n_q: usize) -> usize {
    let base = total / n_q;
    let extra = total % n_q;
    let big = extra * (base + 1);
    if rank < big {
        rank / (base + 1)
    } else {
        extra + (rank - big) / base.max(1)
    }
}

#[derive(Debug, Clone, Copy)]
struct Stub {
    owner: usize,
    quantile: u32,
}

pub fn build_network(spec: &GenSpec) -> Result<Network> {
    spec.validate()?;
    let mut rng = rng_from_seed(spec.seed);

    let h_sampler = spec.household.sampler();
    let mut sizes = Vec::new();
    let mut filled = 0;
    while filled < spec.n {
        let h = h_sampler.sample(&mut rng).min(spec.n - filled);
        sizes.push(h);
        filled += h;
    }

    let mut edges = Vec::new();
    let mut start = 0;
    for &h in &sizes {
        for u in start..start + h {
            for v in u + 1..start + h {
                edges.push(Edge::local(u, v));
            }
        }
        start += h;
    }

    let g_sampler = spec.global.sampler();
    let mut total_degree = Vec::with_capacity(spec.n);
    let mut global_degree = Vec::with_capacity(spec.n);
    for &h in &sizes {
        for _ in 0..h {
            let g = g_sampler.sample(&mut rng);
            total_degree.push(h - 1 + g);
            global_degree.push(g);
        }
    }

    // Rank every global stub by owner total degree. Owners of equal degree
    // are ordered at random, but an owner's stubs stay adjacent so that they
    // share a quantile except at block boundaries.
    let mut owners: Vec<usize> = (0..spec.n).collect();
    owners.shuffle(&mut rng);
    owners.sort_by_key(|&owner| total_degree[owner]);
    let stubs: Vec<usize> = owners
        .iter()
        .flat_map(|&owner| std::iter::repeat_n(owner, global_degree[owner]))
        .collect();
    let n_stubs = stubs.len();
    let p_one = spec.r.abs();
    let mut x0 = Vec::new();
    let mut x1 = Vec::new();
    for (rank, &owner) in stubs.iter().enumerate() {
        let stub = Stub {
            owner,
            quantile: block_of(rank, n_stubs, spec.n_q) as u32,
        };
        if rng.random::<f64>() < p_one {
            x1.push(stub);
        } else {
            x0.push(stub);
        }
    }

    let mut discarded = 0;
    x0.shuffle(&mut rng);
    discarded += pair_consecutive(&x0, &mut edges);

    let mut blocks: Vec<Vec<Stub>> = Vec::with_capacity(spec.n_q);
    let mut offset = 0;
    for size in block_sizes(x1.len(), spec.n_q) {
        blocks.push(x1[offset..offset + size].to_vec());
        offset += size;
    }
    if spec.r > 0.0 {
        for block in &mut blocks {
            block.shuffle(&mut rng);
            discarded += pair_consecutive(block, &mut edges);
        }
    } else if spec.r < 0.0 {
        let n_q = spec.n_q;
        for i in 0..n_q / 2 {
            let j = n_q - 1 - i;
            let (lo, hi) = blocks.split_at_mut(j);
            let a = &mut lo[i];
            let b = &mut hi[0];
            a.shuffle(&mut rng);
            b.shuffle(&mut rng);
            let m = a.len().min(b.len());
            for k in 0..m {
                edges.push(global_edge(a[k], b[k]));
            }
            discarded += a.len() + b.len() - 2 * m;
        }
        if n_q % 2 == 1 {
            let mid = &mut blocks[n_q / 2];
            mid.shuffle(&mut rng);
            discarded += pair_consecutive(mid, &mut edges);
        }
    }

    Network::new(sizes, edges, discarded, 0)
}

fn global_edge(a: Stub, b: Stub) -> Edge {
    Edge::global(a.owner, b.owner, Some((a.quantile, b.quantile)))
}

fn pair_consecutive(stubs: &[Stub], edges: &mut Vec<Edge>) -> usize {
    for pair in stubs.chunks_exact(2) {
        edges.push(global_edge(pair[0], pair[1]));
    }
    stubs.len() % 2
}

/// Independently for each household with probability `p_rw`, breaks its
/// local edges into stubs labelled by household size; stubs of each label
/// are then re-paired uniformly at random.
pub fn rewire(net: &Network, p_rw: f64, seed: u64) -> Result<Network> {
    if !(0.0..=1.0).contains(&p_rw) {
        return Err(Error::InvalidParameter(format!("p_RW = {p_rw} outside [0, 1]")));
    }
    let mut rng: SimRng = rng_from_seed(seed);
    let selected: Vec<bool> = net
        .household_sizes()
        .iter()
        .map(|_| rng.random::<f64>() < p_rw)
        .collect();

    let mut kept = Vec::with_capacity(net.edges().len());
    let mut by_label: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for e in net.edges() {
        let household = net.household_of(e.u);
        if e.kind == EdgeKind::Local && household == net.household_of(e.v) && selected[household] {
            let label = net.household_sizes()[household];
            let stubs = by_label.entry(label).or_default();
            stubs.push(e.u);
            stubs.push(e.v);
        } else {
            kept.push(*e);
        }
    }

    let mut discarded_local = net.imperfections().discarded_local_stubs;
    for stubs in by_label.values_mut() {
        stubs.shuffle(&mut rng);
        for pair in stubs.chunks_exact(2) {
            kept.push(Edge::local(pair[0], pair[1]));
        }
        discarded_local += stubs.len() % 2;
    }
    Network::new(
        net.household_sizes().to_vec(),
        kept,
        net.imperfections().discarded_global_stubs,
        discarded_local,
    )
}
