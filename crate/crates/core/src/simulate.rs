//! Monte Carlo SIR epidemics on finite networks.
//!
//! Final outcomes only, so the epidemic is run as directed bond
//! percolation: each copy of an edge `u -> v` is open with the transmission
//! probability drawn for `u`, and the final size is the set reachable from
//! the initial case. Self-loops never transmit.

use std::collections::VecDeque;

use log::warn;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::infection::{InfectionSpec, TransmissionSampler};
use crate::netgen::{build_network, rewire, GenSpec};
use crate::network::{Adjacency, Network};
use crate::rng::{derive_seed, rng_from_seed, SimRng};

#[derive(Debug, Clone, PartialEq)]
pub struct EpidemicOutcome {
    pub final_size: usize,
    pub infected_fraction: f64,
    /// Cases per generation, starting with the initial case.
    pub generations: Vec<usize>,
}

/// Forward runs follow infection; backward runs collect the susceptibility
/// set of the chosen node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    #[default]
    Forward,
    Backward,
}

pub fn run_epidemic(net: &Network, infection: &InfectionSpec, seed: u64) -> Result<EpidemicOutcome> {
    run_epidemic_directed(net, infection, seed, Direction::Forward)
}

pub fn run_epidemic_directed(
    net: &Network,
    infection: &InfectionSpec,
    seed: u64,
    direction: Direction,
) -> Result<EpidemicOutcome> {
    if net.n() == 0 {
        return Err(Error::InvalidParameter("network has no nodes".into()));
    }
    let sampler = infection.sampler()?;
    let mut rng = rng_from_seed(seed);
    Ok(spread(&net.adjacency(), &sampler, &mut rng, direction))
}

/// One percolation run from a uniformly chosen node.
pub fn spread(adj: &Adjacency, sampler: &TransmissionSampler, rng: &mut SimRng, direction: Direction) -> EpidemicOutcome {
    let n = adj.n();
    let start = rng.random_range(0..n);
    let mut reached = vec![false; n];
    reached[start] = true;
    let mut frontier = VecDeque::from([start]);
    let mut generations = vec![1];

    // Backward runs meet each potential source several times, so its draw
    // must be remembered.
    let mut source_p = match direction {
        Direction::Forward => Vec::new(),
        Direction::Backward => vec![f64::NAN; n],
    };

    while !frontier.is_empty() {
        let mut next = VecDeque::new();
        for u in frontier {
            let forward_p = match direction {
                Direction::Forward => sampler.draw(rng),
                Direction::Backward => 0.0,
            };
            for &v in adj.neighbours(u) {
                if reached[v] {
                    continue;
                }
                let p = match direction {
                    Direction::Forward => forward_p,
                    Direction::Backward => {
                        if source_p[v].is_nan() {
                            source_p[v] = sampler.draw(rng);
                        }
                        source_p[v]
                    }
                };
                if rng.random::<f64>() < p {
                    reached[v] = true;
                    next.push_back(v);
                }
            }
        }
        if !next.is_empty() {
            generations.push(next.len());
        }
        frontier = next;
    }
    let final_size = generations.iter().sum();
    EpidemicOutcome {
        final_size,
        infected_fraction: final_size as f64 / n as f64,
        generations,
    }
}

/// Threshold separating minor from major outbreaks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MajorCutoff {
    /// Fraction of the population.
    Fraction(f64),
    /// Absolute number of cases.
    Count(usize),
}

impl Default for MajorCutoff {
    fn default() -> Self {
        MajorCutoff::Fraction(0.05)
    }
}

impl MajorCutoff {
    pub fn threshold(&self, n: usize) -> usize {
        match *self {
            MajorCutoff::Fraction(f) => ((f * n as f64).ceil() as usize).max(1),
            MajorCutoff::Count(c) => c,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Classification {
    pub major: Vec<bool>,
    pub threshold: usize,
    /// More than 2% of runs fell within 20% of the threshold.
    pub ambiguous: bool,
}

pub fn classify(final_sizes: &[usize], n: usize, cutoff: MajorCutoff) -> Classification {
    let threshold = cutoff.threshold(n);
    let major = final_sizes.iter().map(|&s| s >= threshold).collect();
    let (lo, hi) = (0.8 * threshold as f64, 1.2 * threshold as f64);
    let near = final_sizes
        .iter()
        .filter(|&&s| (lo..=hi).contains(&(s as f64)))
        .count();
    let ambiguous = !final_sizes.is_empty() && near as f64 > 0.02 * final_sizes.len() as f64;
    if ambiguous {
        warn!(
            "ambiguous bimodality: {near} of {} runs lie within 20% of the major-outbreak threshold {threshold}",
            final_sizes.len()
        );
    }
    Classification {
        major,
        threshold,
        ambiguous,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    pub bin_width: usize,
    pub counts: Vec<usize>,
}

impl Histogram {
    pub fn new(final_sizes: &[usize], n: usize, bins: usize) -> Self {
        let bin_width = n.div_ceil(bins.max(1)).max(1);
        let mut counts = vec![0; n / bin_width + 1];
        for &s in final_sizes {
            counts[s / bin_width] += 1;
        }
        Self { bin_width, counts }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub run: usize,
    pub seed: u64,
    pub final_size: usize,
    pub major: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimateReport {
    pub n: usize,
    pub n_sims: usize,
    pub n_major: usize,
    pub p_hat: f64,
    pub p_se: f64,
    /// Absent when no run was major.
    pub z_hat: Option<f64>,
    pub z_se: Option<f64>,
    pub cutoff_used: usize,
    pub ambiguous: bool,
    pub histogram: Histogram,
    pub runs: Vec<RunRecord>,
}

impl EstimateReport {
    pub fn no_major_outbreaks(&self) -> bool {
        self.n_major == 0
    }
}

#[derive(Debug, Clone)]
pub struct EstimateSpec {
    pub network: GenSpec,
    pub infection: InfectionSpec,
    pub p_rw: f64,
    pub n_sims: usize,
    pub cutoff: MajorCutoff,
    pub direction: Direction,
    pub master_seed: u64,
}

/// `n_sims` independent network-plus-epidemic replicates. Replicate `k`
/// uses seeds derived from `(master_seed, k)`, so results do not depend on
/// thread scheduling.
pub fn estimate(spec: &EstimateSpec) -> Result<EstimateReport> {
    if spec.n_sims == 0 {
        return Err(Error::InvalidParameter("n_sims must be at least 1".into()));
    }
    spec.network.validate()?;
    let sampler = spec.infection.sampler()?;
    let n = spec.network.n;

    let runs: Vec<(u64, usize)> = (0..spec.n_sims)
        .into_par_iter()
        .map(|k| {
            let seed = derive_seed(spec.master_seed, k as u64);
            let net = build_network(&GenSpec {
                seed: derive_seed(seed, 0),
                ..spec.network.clone()
            })?;
            let net = if spec.p_rw > 0.0 {
                rewire(&net, spec.p_rw, derive_seed(seed, 1))?
            } else {
                net
            };
            let mut rng = rng_from_seed(derive_seed(seed, 2));
            let outcome = spread(&net.adjacency(), &sampler, &mut rng, spec.direction);
            Ok((seed, outcome.final_size))
        })
        .collect::<Result<_>>()?;

    let sizes: Vec<usize> = runs.iter().map(|r| r.1).collect();
    let class = classify(&sizes, n, spec.cutoff);
    Ok(summarise(n, &runs, class))
}

fn summarise(n: usize, runs: &[(u64, usize)], class: Classification) -> EstimateReport {
    let n_sims = runs.len();
    let sizes: Vec<usize> = runs.iter().map(|r| r.1).collect();
    let majors: Vec<f64> = sizes
        .iter()
        .zip(&class.major)
        .filter(|(_, m)| **m)
        .map(|(&s, _)| s as f64 / n as f64)
        .collect();
    let n_major = majors.len();
    let p_hat = n_major as f64 / n_sims as f64;
    let p_se = (p_hat * (1.0 - p_hat) / n_sims as f64).sqrt();
    let (z_hat, z_se) = if n_major == 0 {
        (None, None)
    } else {
        let mean = majors.iter().sum::<f64>() / n_major as f64;
        let sd = if n_major > 1 {
            (majors.iter().map(|z| (z - mean).powi(2)).sum::<f64>() / (n_major - 1) as f64).sqrt()
        } else {
            0.0
        };
        (Some(mean), Some(sd / (n_major as f64).sqrt()))
    };
    let records = runs
        .iter()
        .zip(&class.major)
        .enumerate()
        .map(|(run, (&(seed, final_size), &major))| RunRecord {
            run,
            seed,
            final_size,
            major,
        })
        .collect();
    EstimateReport {
        n,
        n_sims,
        n_major,
        p_hat,
        p_se,
        z_hat,
        z_se,
        cutoff_used: class.threshold,
        ambiguous: class.ambiguous,
        histogram: Histogram::new(&sizes, n, 100),
        runs: records,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::DiscreteDist;
    use crate::infection::InfectiousPeriod;
    use crate::network::Edge;

    fn clique(h: usize) -> Network {
        let mut edges = Vec::new();
        for u in 0..h {
            for v in u + 1..h {
                edges.push(Edge::local(u, v));
            }
        }
        Network::new(vec![h], edges, 0, 0).unwrap()
    }

    /// Final-size pmf from node 0 over all `2^(h(h-1))` directed bond sets.
    fn enumerate_final_size(h: usize, p: f64) -> Vec<f64> {
        let pairs: Vec<(usize, usize)> = (0..h)
            .flat_map(|u| (0..h).filter(move |&v| v != u).map(move |v| (u, v)))
            .collect();
        let mut pmf = vec![0.0; h + 1];
        for mask in 0u32..(1 << pairs.len()) {
            let open = mask.count_ones() as i32;
            let weight = p.powi(open) * (1.0 - p).powi(pairs.len() as i32 - open);
            let mut reached = vec![false; h];
            reached[0] = true;
            let mut changed = true;
            while changed {
                changed = false;
                for (k, &(u, v)) in pairs.iter().enumerate() {
                    if mask >> k & 1 == 1 && reached[u] && !reached[v] {
                        reached[v] = true;
                        changed = true;
                    }
                }
            }
            pmf[reached.iter().filter(|&&b| b).count()] += weight;
        }
        pmf
    }

    #[test]
    fn trivial_transmission() {
        let net = clique(6);
        let none = run_epidemic(&net, &InfectionSpec::constant(0.0).unwrap(), 1).unwrap();
        assert_eq!(none.final_size, 1);
        assert_eq!(none.generations, vec![1]);
        let all = run_epidemic(&net, &InfectionSpec::constant(1.0).unwrap(), 1).unwrap();
        assert_eq!(all.final_size, 6);
        assert_eq!(all.generations, vec![1, 5]);
        assert_eq!(all.infected_fraction, 1.0);
    }

    #[test]
    fn triangle_matches_enumeration() {
        let exact = enumerate_final_size(3, 0.5);
        // Chain binomial: q^2, 2pq^2, remainder.
        assert!((exact[1] - 0.25).abs() < 1e-15);
        assert!((exact[2] - 0.25).abs() < 1e-15);
        assert!((exact[3] - 0.5).abs() < 1e-15);
        let net = clique(3);
        let sampler = InfectionSpec::constant(0.5).unwrap().sampler().unwrap();
        let adj = net.adjacency();
        let mut rng = rng_from_seed(42);
        let runs = 100_000;
        for direction in [Direction::Forward, Direction::Backward] {
            let mut counts = [0usize; 4];
            for _ in 0..runs {
                counts[spread(&adj, &sampler, &mut rng, direction).final_size] += 1;
            }
            for k in 1..=3 {
                let p = exact[k];
                let band = 3.0 * (p * (1.0 - p) / runs as f64).sqrt();
                let emp = counts[k] as f64 / runs as f64;
                assert!((emp - p).abs() < band, "{direction:?} k={k}: {emp} vs {p}");
            }
        }
    }

    #[test]
    fn self_loops_are_inert() {
        let net = Network::new(vec![1, 1], vec![Edge::global(0, 0, None)], 0, 0).unwrap();
        let out = run_epidemic(&net, &InfectionSpec::constant(1.0).unwrap(), 3).unwrap();
        assert_eq!(out.final_size, 1);
    }

    #[test]
    fn classification_examples() {
        let c = classify(&[1, 2, 3, 3], 10_000, MajorCutoff::Count(500));
        assert_eq!(c.major, vec![false; 4]);
        assert!(!c.ambiguous);
        let c = classify(&[2, 4800], 10_000, MajorCutoff::default());
        assert_eq!(c.threshold, 500);
        assert_eq!(c.major, vec![false, true]);
        let mut sizes = vec![3; 90];
        sizes.extend([450, 480, 520, 560, 600, 9000, 9100, 8800, 8900, 9050]);
        let c = classify(&sizes, 10_000, MajorCutoff::default());
        assert!(c.ambiguous);
    }

    #[test]
    fn histogram_counts_everything() {
        let h = Histogram::new(&[1, 50, 99, 100], 100, 10);
        assert_eq!(h.bin_width, 10);
        assert_eq!(h.counts.iter().sum::<usize>(), 4);
        assert_eq!(h.counts[10], 1);
    }

    fn small_spec(p: f64) -> EstimateSpec {
        EstimateSpec {
            network: GenSpec {
                n: 500,
                household: DiscreteDist::poisson_plus(2.0).unwrap(),
                global: DiscreteDist::poisson(4.0).unwrap(),
                r: 0.5,
                n_q: 5,
                seed: 0,
            },
            infection: InfectionSpec::constant(p).unwrap(),
            p_rw: 0.3,
            n_sims: 40,
            cutoff: MajorCutoff::default(),
            direction: Direction::Forward,
            master_seed: 11,
        }
    }

    #[test]
    fn estimate_is_deterministic_and_consistent() {
        let spec = small_spec(0.3);
        let a = estimate(&spec).unwrap();
        let b = estimate(&spec).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.p_hat, a.n_major as f64 / a.n_sims as f64);
        assert!((a.p_se - (a.p_hat * (1.0 - a.p_hat) / 40.0).sqrt()).abs() < 1e-15);
        assert_eq!(a.runs.iter().filter(|r| r.major).count(), a.n_major);
        assert_eq!(a.histogram.counts.iter().sum::<usize>(), 40);
    }

    #[test]
    fn subcritical_has_no_majors() {
        let rep = estimate(&small_spec(0.001)).unwrap();
        assert!(rep.no_major_outbreaks());
        assert_eq!(rep.p_hat, 0.0);
        assert!(rep.z_hat.is_none() && rep.z_se.is_none());
    }

    #[test]
    fn general_period_runs() {
        let mut spec = small_spec(0.3);
        spec.infection = InfectionSpec::general(0.4, InfectiousPeriod::Exponential { mean: 1.0 }).unwrap();
        for direction in [Direction::Forward, Direction::Backward] {
            spec.direction = direction;
            let rep = estimate(&spec).unwrap();
            assert_eq!(rep.n_sims, 40);
        }
    }
}
