//! Degree distribution, clustering and degree correlation: asymptotic
//! formulas for the model and empirical measures on a finite network.

use crate::dist::{stub_degree_law, DiscreteDist};
use crate::error::{Error, Result};
use crate::network::Network;
use crate::numeric::{compensated_sum, CompensatedSum};
use crate::quantile::QuantileTable;

/// Asymptotic local properties of the model.
#[derive(Debug, Clone)]
pub struct LocalProps {
    pub degree_dist: DiscreteDist,
    pub clustering: f64,
    pub degree_corr: f64,
    pub p_g: f64,
}

/// Terms of the covariance decomposition of the degrees at the two ends of
/// a uniformly chosen edge, conditioning on whether the edge is global.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DegreeCorrComponents {
    pub cov: f64,
    pub var: f64,
    /// `E[cov(X_L, X_R | I_G)]`.
    pub e_cov_given_ig: f64,
    /// `cov(E[X_L | I_G], E[X_R | I_G])`.
    pub cov_of_means: f64,
}

impl DegreeCorrComponents {
    pub fn rho(&self) -> Result<f64> {
        if self.var <= 0.0 {
            return Err(Error::ZeroVariance);
        }
        Ok(self.cov / self.var)
    }
}

pub fn local_props(h: &DiscreteDist, g: &DiscreteDist, r: f64, n_q: usize) -> Result<LocalProps> {
    Ok(LocalProps {
        degree_dist: analytic_degree_dist(h, g)?,
        clustering: analytic_clustering(h, g)?,
        degree_corr: analytic_degree_corr(h, g, r, n_q)?,
        p_g: p_global(h, g)?,
    })
}

/// `D = G + H~ - 1`.
pub fn analytic_degree_dist(h: &DiscreteDist, g: &DiscreteDist) -> Result<DiscreteDist> {
    Ok(g.convolve(&h.size_bias()?.shift_down(1)?))
}

/// Probability that a uniformly chosen edge is global.
pub fn p_global(h: &DiscreteDist, g: &DiscreteDist) -> Result<f64> {
    let mu_g = g.mean();
    let mu_h_tilde = h.size_bias()?.mean();
    let denom = mu_g + mu_h_tilde - 1.0;
    if denom <= 0.0 {
        return Err(Error::DegenerateNetwork);
    }
    Ok(mu_g / denom)
}

/// `E[H(H-1)(H-2)] / E[H(G+H-1)(G+H-2)]`.
pub fn analytic_clustering(h: &DiscreteDist, g: &DiscreteDist) -> Result<f64> {
    let num = h.expect(|x| x * (x - 1.0) * (x - 2.0));
    let mu_g = g.mean();
    let g2 = g.expect(|x| x * x);
    let den = h.expect(|x| x * (g2 + mu_g * (2.0 * x - 3.0) + (x - 1.0) * (x - 2.0)));
    if den <= 0.0 {
        return Err(Error::DegenerateNetwork);
    }
    Ok((num / den).clamp(0.0, 1.0))
}

pub fn degree_corr_components(
    h: &DiscreteDist,
    g: &DiscreteDist,
    r: f64,
    n_q: usize,
) -> Result<DegreeCorrComponents> {
    let h_tilde = h.size_bias()?;
    let (mu_ht, var_ht) = h_tilde.moments()?;
    let (mu_g, var_g) = g.moments()?;
    let p_g = p_global(h, g)?;

    let (mu_hh, var_hh) = match h.edge_bias() {
        Ok(hh) => hh.moments()?,
        Err(Error::NoEdges) => (0.0, 0.0),
        Err(e) => return Err(e),
    };

    let (g_term, var_gt, shift) = if mu_g > 0.0 {
        let table = QuantileTable::new(&stub_degree_law(h, g)?, n_q)?;
        let var_gt = g.size_bias()?.variance();
        (table.g(r), var_gt, mu_hh - mu_ht - var_g / mu_g)
    } else {
        (0.0, 0.0, 0.0)
    };

    let q_g = 1.0 - p_g;
    let e_cov = q_g * var_hh + p_g * g_term;
    let cov_of_means = p_g * q_g * shift * shift;
    let var = q_g * (var_hh + var_g) + p_g * (var_ht + var_gt) + cov_of_means;
    Ok(DegreeCorrComponents {
        cov: e_cov + cov_of_means,
        var,
        e_cov_given_ig: e_cov,
        cov_of_means,
    })
}

pub fn analytic_degree_corr(h: &DiscreteDist, g: &DiscreteDist, r: f64, n_q: usize) -> Result<f64> {
    degree_corr_components(h, g, r, n_q)?.rho()
}

/// `D~ ~ 1 + Poi(gamma)`, the stub-degree law of the Poisson template.
pub fn poisson_stub_law(gamma: f64) -> Result<DiscreteDist> {
    Ok(DiscreteDist::poisson(gamma)?.shift_up(1))
}

/// Closed forms for `G ~ Poi(gamma - mu)`, `H ~ Poi+(mu)`.
pub fn poisson_c_rho(gamma: f64, mu: f64, r: f64, n_q: usize) -> Result<(f64, f64)> {
    let table = QuantileTable::new(&poisson_stub_law(gamma)?, n_q)?;
    poisson_c_rho_with(&table, gamma, mu, r)
}

/// As [`poisson_c_rho`] with a precomputed quantile table for `1 + Poi(gamma)`.
pub fn poisson_c_rho_with(table: &QuantileTable, gamma: f64, mu: f64, r: f64) -> Result<(f64, f64)> {
    if !(gamma > 0.0) || !(0.0..gamma).contains(&mu) {
        return Err(Error::InvalidParameter(format!(
            "Poisson template needs 0 <= mu < gamma, got mu = {mu}, gamma = {gamma}"
        )));
    }
    let c = (mu / gamma).powi(2);
    let rho = (mu * mu + (gamma - mu) * table.g(r)) / (gamma * gamma);
    Ok((c, rho))
}

/// One point of the attainable `(c, rho)` region for the Poisson template.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvelopePoint {
    pub mu: f64,
    pub c: f64,
    pub rho_lower: f64,
    pub rho_upper: f64,
}

/// Lower (`r = -1`) and upper (`r = 1`) degree correlation against `mu`.
pub fn poisson_envelope(gamma: f64, n_q: usize, mus: &[f64]) -> Result<Vec<EnvelopePoint>> {
    let table = QuantileTable::new(&poisson_stub_law(gamma)?, n_q)?;
    mus.iter()
        .map(|&mu| {
            let (c, lo) = poisson_c_rho_with(&table, gamma, mu, -1.0)?;
            let (_, hi) = poisson_c_rho_with(&table, gamma, mu, 1.0)?;
            Ok(EnvelopePoint {
                mu,
                c,
                rho_lower: lo,
                rho_upper: hi,
            })
        })
        .collect()
}

/// `(1 - p_RW) c0`.
pub fn rewired_clustering(c0: f64, p_rw: f64) -> f64 {
    (1.0 - p_rw) * c0
}

/// Sorted, de-duplicated neighbour lists without self-loops.
fn simple_adjacency(net: &Network) -> Vec<Vec<usize>> {
    let mut adj = vec![Vec::new(); net.n()];
    for e in net.edges().iter().filter(|e| !e.is_self_loop()) {
        adj[e.u].push(e.v);
        adj[e.v].push(e.u);
    }
    for list in &mut adj {
        list.sort_unstable();
        list.dedup();
    }
    adj
}

/// Fraction of ordered two-paths `i - j - k` (`i != k`) closed by an edge
/// `i - k`, on the simple graph underlying `net`.
pub fn empirical_clustering(net: &Network) -> Result<f64> {
    let adj = simple_adjacency(net);
    let triplets: f64 = adj
        .iter()
        .map(|a| {
            let k = a.len() as f64;
            k * (k - 1.0)
        })
        .sum();
    if triplets == 0.0 {
        return Err(Error::NoTriplets);
    }
    // Orient each edge from lower to higher (degree, id) rank.
    let rank = |v: usize| (adj[v].len(), v);
    let forward: Vec<Vec<usize>> = adj
        .iter()
        .enumerate()
        .map(|(v, list)| list.iter().copied().filter(|&w| rank(w) > rank(v)).collect())
        .collect();
    let mut triangles = 0u64;
    let mut mark = vec![false; net.n()];
    for v in 0..net.n() {
        for &w in &forward[v] {
            mark[w] = true;
        }
        for &w in &forward[v] {
            triangles += forward[w].iter().filter(|&&x| mark[x]).count() as u64;
        }
        for &w in &forward[v] {
            mark[w] = false;
        }
    }
    Ok(6.0 * triangles as f64 / triplets)
}

/// Pearson correlation of total degrees over both orientations of every
/// non-loop edge, parallel edges counted with multiplicity.
pub fn empirical_degree_corr(net: &Network) -> Result<f64> {
    let deg = net.degrees();
    let mut sx = CompensatedSum::new();
    let mut sxx = CompensatedSum::new();
    let mut sxy = CompensatedSum::new();
    let mut m = 0usize;
    for e in net.edges().iter().filter(|e| !e.is_self_loop()) {
        let (a, b) = (deg[e.u] as f64, deg[e.v] as f64);
        sx.add(a + b);
        sxx.add(a * a + b * b);
        sxy.add(2.0 * a * b);
        m += 2;
    }
    if m == 0 {
        return Err(Error::ZeroVariance);
    }
    let m = m as f64;
    let mean = sx.value() / m;
    let var = sxx.value() / m - mean * mean;
    if var <= 1e-12 * mean.max(1.0).powi(2) {
        return Err(Error::ZeroVariance);
    }
    Ok((sxy.value() / m - mean * mean) / var)
}

/// Empirical total-degree pmf of a network.
pub fn empirical_degree_dist(net: &Network) -> Result<DiscreteDist> {
    let deg = net.degrees();
    let max = deg.iter().copied().max().unwrap_or(0);
    let mut counts = vec![0.0; max + 1];
    for d in deg {
        counts[d] += 1.0;
    }
    DiscreteDist::from_weights(counts)
}

/// Mean and variance of the model degree law.
pub fn degree_moments(h: &DiscreteDist, g: &DiscreteDist) -> Result<(f64, f64)> {
    let d = analytic_degree_dist(h, g)?;
    let mean = d.mean();
    let var = compensated_sum(d.support().map(|(k, p)| p * (k as f64 - mean).powi(2)));
    Ok((mean, var))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::Edge;

    fn poi_template(gamma: f64, mu: f64) -> (DiscreteDist, DiscreteDist) {
        (
            DiscreteDist::poisson_plus(mu).unwrap(),
            DiscreteDist::poisson(gamma - mu).unwrap(),
        )
    }

    #[test]
    fn degree_dist_examples() {
        let g = DiscreteDist::poisson(4.0).unwrap();
        let d = analytic_degree_dist(&DiscreteDist::point(1), &g).unwrap();
        assert!(d.total_variation(&g) < 1e-15);
        let (h, g) = poi_template(10.0, 3.0);
        let d = analytic_degree_dist(&h, &g).unwrap();
        assert!(d.total_variation(&DiscreteDist::poisson(10.0).unwrap()) < 1e-12);
        let d = analytic_degree_dist(&DiscreteDist::point(3), &DiscreteDist::point(2)).unwrap();
        assert_eq!(d, DiscreteDist::point(4));
    }

    #[test]
    fn clustering_examples() {
        let (h, g) = poi_template(10.0, 2.0);
        assert!((analytic_clustering(&h, &g).unwrap() - 0.04).abs() < 1e-10);
        let h = DiscreteDist::from_pairs(&[(1, 0.5), (2, 0.5)]).unwrap();
        assert_eq!(analytic_clustering(&h, &DiscreteDist::poisson(3.0).unwrap()).unwrap(), 0.0);
        assert_eq!(analytic_clustering(&DiscreteDist::point(3), &DiscreteDist::point(0)).unwrap(), 1.0);
        assert!(matches!(
            analytic_clustering(&DiscreteDist::point(1), &DiscreteDist::point(1)),
            Err(Error::DegenerateNetwork)
        ));
    }

    #[test]
    fn clustering_matches_brute_expectation() {
        // Direct double sum over (h, g) as an independent route.
        let h = DiscreteDist::from_pairs(&[(1, 0.2), (3, 0.5), (4, 0.3)]).unwrap();
        let g = DiscreteDist::from_pairs(&[(0, 0.3), (2, 0.4), (5, 0.3)]).unwrap();
        let mut num = 0.0;
        let mut den = 0.0;
        for (hh, ph) in h.support() {
            for (gg, pg) in g.support() {
                let (x, y) = (hh as f64, gg as f64);
                num += ph * pg * x * (x - 1.0) * (x - 2.0);
                den += ph * pg * x * (y + x - 1.0) * (y + x - 2.0);
            }
        }
        assert!((analytic_clustering(&h, &g).unwrap() - num / den).abs() < 1e-14);
    }

    #[test]
    fn poisson_template_matches_general_formula() {
        for (mu, r) in [(2.0, 0.0), (2.0, 0.5), (4.0, -0.7), (6.0, 1.0)] {
            let (h, g) = poi_template(10.0, mu);
            let rho = analytic_degree_corr(&h, &g, r, 10).unwrap();
            let c = analytic_clustering(&h, &g).unwrap();
            let (pc, prho) = poisson_c_rho(10.0, mu, r, 10).unwrap();
            assert!((c - pc).abs() < 1e-10, "c mu={mu}");
            assert!((rho - prho).abs() < 1e-9, "rho mu={mu} r={r}: {rho} vs {prho}");
        }
    }

    #[test]
    fn rho_equals_c_at_zero_r() {
        for mu in [0.5, 2.0, 4.0, 6.0] {
            let (c, rho) = poisson_c_rho(10.0, mu, 0.0, 10).unwrap();
            assert!((c - rho).abs() < 1e-12);
        }
        assert_eq!(poisson_c_rho(10.0, 0.0, 0.0, 10).unwrap(), (0.0, 0.0));
        assert_eq!(poisson_c_rho(10.0, 6.0, 0.0, 10).unwrap().0, 0.36);
    }

    #[test]
    fn single_quantile_ignores_r() {
        let (h, g) = poi_template(8.0, 3.0);
        let base = analytic_degree_corr(&h, &g, 0.0, 1).unwrap();
        for r in [-1.0, -0.3, 0.4, 1.0] {
            assert!((analytic_degree_corr(&h, &g, r, 1).unwrap() - base).abs() < 1e-12);
        }
    }

    #[test]
    fn upper_envelope_limit() {
        let gamma = 10.0;
        let pts = poisson_envelope(gamma, 1000, &[1.0, 3.0, 5.0, 7.0, 9.0]).unwrap();
        for p in pts {
            let target = 1.0 + p.c - p.c.sqrt();
            assert!((p.rho_upper - target).abs() < 0.01, "mu={} {} vs {}", p.mu, p.rho_upper, target);
            assert!(p.rho_lower < p.rho_upper);
        }
    }

    #[test]
    fn components_examples() {
        // No household edges: p_G = 1 and the household term vanishes.
        let g = DiscreteDist::poisson(5.0).unwrap();
        let h = DiscreteDist::point(1);
        let comp = degree_corr_components(&h, &g, 0.6, 5).unwrap();
        let t = QuantileTable::new(&stub_degree_law(&h, &g).unwrap(), 5).unwrap();
        assert!((comp.e_cov_given_ig - t.g(0.6)).abs() < 1e-14);

        let (h, g) = poi_template(10.0, 2.0);
        let comp = degree_corr_components(&h, &g, 0.0, 10).unwrap();
        let p_g = p_global(&h, &g).unwrap();
        let hh = h.edge_bias().unwrap();
        let ht = h.size_bias().unwrap();
        let shift = hh.mean() - ht.mean() - g.variance() / g.mean();
        let expected = (1.0 - p_g) * hh.variance() + p_g * (1.0 - p_g) * shift * shift;
        assert!((comp.cov - expected).abs() < 1e-12);
        let comp = degree_corr_components(&h, &g, 0.5, 10).unwrap();
        assert_eq!(comp.rho().unwrap(), analytic_degree_corr(&h, &g, 0.5, 10).unwrap());
        assert!((p_g - 0.8).abs() < 1e-12);
    }

    #[test]
    fn rho_monotone_in_r() {
        let h = DiscreteDist::from_pairs(&[(1, 0.3), (2, 0.3), (4, 0.4)]).unwrap();
        let g = DiscreteDist::poisson(3.0).unwrap();
        let mut prev = f64::NEG_INFINITY;
        for k in 0..=40 {
            let r = -1.0 + k as f64 * 0.05;
            let rho = analytic_degree_corr(&h, &g, r, 6).unwrap();
            assert!(rho >= prev - 1e-15 && (-1.0..=1.0).contains(&rho));
            prev = rho;
        }
    }

    #[test]
    fn rewired_clustering_examples() {
        assert_eq!(rewired_clustering(0.3, 0.0), 0.3);
        assert_eq!(rewired_clustering(0.3, 1.0), 0.0);
        assert!((rewired_clustering(0.4855, 0.5) - 0.24275).abs() < 1e-15);
    }

    fn graph(n: usize, pairs: &[(usize, usize)]) -> Network {
        Network::new(
            vec![1; n],
            pairs.iter().map(|&(u, v)| Edge::global(u, v, None)).collect(),
            0,
            0,
        )
        .unwrap()
    }

    /// Exhaustive ordered-triplet count.
    fn brute_clustering(n: usize, pairs: &[(usize, usize)]) -> f64 {
        let mut adj = vec![vec![false; n]; n];
        for &(u, v) in pairs {
            if u != v {
                adj[u][v] = true;
                adj[v][u] = true;
            }
        }
        let (mut closed, mut all) = (0, 0);
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    if i != k && i != j && j != k && adj[i][j] && adj[j][k] {
                        all += 1;
                        closed += adj[i][k] as usize;
                    }
                }
            }
        }
        closed as f64 / all as f64
    }

    #[test]
    fn empirical_clustering_examples() {
        assert_eq!(empirical_clustering(&graph(3, &[(0, 1), (1, 2), (0, 2)])).unwrap(), 1.0);
        assert_eq!(empirical_clustering(&graph(3, &[(0, 1), (1, 2)])).unwrap(), 0.0);
        let k4_minus = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3)];
        assert_eq!(empirical_clustering(&graph(4, &k4_minus)).unwrap(), 0.75);
        assert_eq!(brute_clustering(4, &k4_minus), 0.75);
        // Multigraph artefacts are reduced away.
        let messy = [(0, 1), (0, 1), (1, 2), (2, 2), (0, 2), (2, 3), (3, 4), (2, 4)];
        assert!((empirical_clustering(&graph(5, &messy)).unwrap() - brute_clustering(5, &messy)).abs() < 1e-15);
        assert!(matches!(empirical_clustering(&graph(2, &[(0, 1)])), Err(Error::NoTriplets)));
    }

    #[test]
    fn empirical_degree_corr_examples() {
        let star = graph(4, &[(0, 1), (0, 2), (0, 3)]);
        assert!((empirical_degree_corr(&star).unwrap() + 1.0).abs() < 1e-12);
        let cycle = graph(4, &[(0, 1), (1, 2), (2, 3), (3, 0)]);
        assert!(matches!(empirical_degree_corr(&cycle), Err(Error::ZeroVariance)));
    }
}
