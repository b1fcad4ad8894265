//! Direct simulation of the approximating multitype branching process,
//! built from first principles (stub sampling, bond-level household
//! epidemics), compared with the fixed-point solutions.

use clustnet::branching::{BranchingModel, ModelParams};
use clustnet::dist::{DiscreteDist, DistSampler};
use clustnet::infection::InfectionSpec;
use clustnet::quantile::QuantileTable;
use clustnet::rng::rng_from_seed;
use rand::Rng;

const SURVIVAL_POPULATION: usize = 100;

struct Oracle {
    p: f64,
    r: f64,
    n_q: usize,
    g: DistSampler,
    g_tilde: DistSampler,
    h_tilde: DistSampler,
    /// Cumulative `P(Q~ <= i | D~ = d)` per degree.
    quantile_cdf: Vec<Vec<f64>>,
}

impl Oracle {
    fn new(params: &ModelParams) -> Self {
        let d_tilde = clustnet::dist::stub_degree_law(&params.household, &params.global).unwrap();
        let table = QuantileTable::new(&d_tilde, params.n_q).unwrap();
        let quantile_cdf = (0..table.degree_len())
            .map(|d| {
                let mut acc = 0.0;
                (0..params.n_q)
                    .map(|i| {
                        acc += table.q_given_d(i, d);
                        acc
                    })
                    .collect()
            })
            .collect();
        Self {
            p: params.infection.p_i(),
            r: params.r,
            n_q: params.n_q,
            g: params.global.sampler(),
            g_tilde: params.global.size_bias().unwrap().sampler(),
            h_tilde: params.household.size_bias().unwrap().sampler(),
            quantile_cdf,
        }
    }

    fn quantile_of_degree<R: Rng>(&self, d: usize, rng: &mut R) -> usize {
        let u: f64 = rng.random();
        let cdf = &self.quantile_cdf[d];
        cdf.partition_point(|&c| c <= u).min(self.n_q - 1)
    }

    fn partner(&self, i: usize) -> usize {
        if self.r < 0.0 {
            self.n_q - 1 - i
        } else {
            i
        }
    }

    /// Type of the individual reached through a stub of quantile `q`.
    fn child_type<R: Rng>(&self, q: usize, rng: &mut R) -> usize {
        if rng.random::<f64>() < self.r.abs() {
            self.partner(q)
        } else {
            rng.random_range(0..self.n_q)
        }
    }

    /// Number infected besides the initial case in a clique of size `h`.
    fn household_epidemic<R: Rng>(&self, h: usize, rng: &mut R) -> usize {
        let mut infected = vec![false; h];
        infected[0] = true;
        let mut frontier = vec![0];
        let mut count = 0;
        while let Some(_u) = frontier.pop() {
            for v in 0..h {
                if !infected[v] && rng.random::<f64>() < self.p {
                    infected[v] = true;
                    frontier.push(v);
                    count += 1;
                }
            }
        }
        count
    }

    /// Children of the household members infected locally, each with a
    /// fresh global degree.
    fn secondary_children<R: Rng>(&self, h: usize, out: &mut Vec<usize>, rng: &mut R) {
        for _ in 0..self.household_epidemic(h, rng) {
            let g = self.g.sample(rng);
            for _ in 0..g {
                if rng.random::<f64>() < self.p {
                    let q = self.quantile_of_degree(g + h - 1, rng);
                    out.push(self.child_type(q, rng));
                }
            }
        }
    }

    /// Owner of a uniformly chosen stub in quantile `i`, by rejection.
    fn primary_of_type<R: Rng>(&self, i: usize, rng: &mut R) -> (usize, usize) {
        loop {
            let g = self.g_tilde.sample(rng);
            let h = self.h_tilde.sample(rng);
            if self.quantile_of_degree(g + h - 1, rng) == i {
                return (g, h);
            }
        }
    }

    fn children_of_type<R: Rng>(&self, i: usize, rng: &mut R) -> Vec<usize> {
        let (g, h) = self.primary_of_type(i, rng);
        let mut out = Vec::new();
        for _ in 1..g {
            if rng.random::<f64>() < self.p {
                out.push(self.child_type(i, rng));
            }
        }
        self.secondary_children(h, &mut out, rng);
        out
    }

    fn ancestor_children<R: Rng>(&self, rng: &mut R) -> Vec<usize> {
        let h = self.h_tilde.sample(rng);
        let g = self.g.sample(rng);
        let mut out = Vec::new();
        for _ in 0..g {
            if rng.random::<f64>() < self.p {
                let q = self.quantile_of_degree(g + h - 1, rng);
                out.push(self.child_type(q, rng));
            }
        }
        self.secondary_children(h, &mut out, rng);
        out
    }

    fn survives<R: Rng>(&self, mut alive: Vec<usize>, rng: &mut R) -> bool {
        while let Some(i) = alive.pop() {
            alive.extend(self.children_of_type(i, rng));
            if alive.len() >= SURVIVAL_POPULATION {
                return true;
            }
        }
        false
    }
}

fn within(emp: f64, exact: f64, runs: usize, k: f64) -> bool {
    let se = (exact * (1.0 - exact) / runs as f64).sqrt().max(1e-9);
    (emp - exact).abs() <= k * se
}

fn params(r: f64) -> ModelParams {
    ModelParams {
        household: DiscreteDist::poisson_plus(2.0).unwrap(),
        global: DiscreteDist::poisson(8.0).unwrap(),
        r,
        n_q: 10,
        p_rw: 0.0,
        infection: InfectionSpec::constant(0.2).unwrap(),
    }
}

#[test]
fn type_extinction_matches_branching_simulation() {
    let params = params(0.5);
    let sigma = BranchingModel::new(&params).unwrap().forward_extinction().unwrap();
    let oracle = Oracle::new(&params);
    let mut rng = rng_from_seed(101);
    let runs = 100_000;
    let mut failures = Vec::new();
    for (i, &s) in sigma.iter().enumerate() {
        let died = (0..runs).filter(|_| !oracle.survives(vec![i], &mut rng)).count();
        let emp = died as f64 / runs as f64;
        if !within(emp, s, runs, 2.0) {
            failures.push((i, emp, s));
        }
    }
    // Two-SE bands: allow one miss among ten types.
    assert!(failures.len() <= 1, "{failures:?}");
}

#[test]
fn major_outbreak_probability_matches_branching_simulation() {
    let mut rng = rng_from_seed(7);
    let runs = 40_000;
    for r in [-1.0, 0.0, 1.0] {
        let params = params(r);
        let p_maj = BranchingModel::new(&params).unwrap().p_major().unwrap();
        let oracle = Oracle::new(&params);
        let took_off = (0..runs)
            .filter(|_| {
                let first = oracle.ancestor_children(&mut rng);
                !first.is_empty() && oracle.survives(first, &mut rng)
            })
            .count();
        let emp = took_off as f64 / runs as f64;
        assert!(within(emp, p_maj, runs, 3.0), "r = {r}: {emp} vs {p_maj}");
    }
}
