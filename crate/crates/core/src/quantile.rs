//! Joint law of the total degree and degree quantile of a uniformly chosen
//! global stub, and the pairing kernels derived from it.
//!
//! Quantiles are 0-based here: quantile `i` covers cumulative probability
//! `[i/n_Q, (i+1)/n_Q)`.

use crate::dist::DiscreteDist;
use crate::error::{Error, Result};
use crate::numeric::compensated_sum;

#[derive(Debug, Clone)]
pub struct QuantileTable {
    n_q: usize,
    /// `joint[d][i] = P(D~ = d, Q~ = i)`.
    joint: Vec<Vec<f64>>,
    quantile_means: Vec<f64>,
    mean: f64,
}

impl QuantileTable {
    pub fn new(d_tilde: &DiscreteDist, n_q: usize) -> Result<Self> {
        if n_q == 0 {
            return Err(Error::InvalidParameter("n_Q must be at least 1".into()));
        }
        let pmf = d_tilde.pmf();
        let nq = n_q as f64;
        let mut joint = vec![vec![0.0; n_q]; pmf.len()];
        let mut lower = 0.0;
        let mut cum = 0.0;
        let last = pmf.iter().rposition(|&p| p > 0.0).unwrap_or(0);
        for (d, &p) in pmf.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            cum += p;
            let upper = if d == last { 1.0 } else { cum.min(1.0) };
            // Only quantiles overlapping [lower, upper] can be non-zero.
            let first_q = ((lower * nq).floor() as usize).min(n_q - 1);
            let last_q = ((upper * nq).ceil() as usize).clamp(1, n_q) - 1;
            for (i, cell) in joint[d].iter_mut().enumerate().take(last_q + 1).skip(first_q) {
                let lo = lower.max(i as f64 / nq);
                let hi = upper.min((i + 1) as f64 / nq);
                *cell = (hi - lo).max(0.0);
            }
            lower = upper;
        }
        let mut quantile_means = Vec::with_capacity(n_q);
        for i in 0..n_q {
            let col = compensated_sum(joint.iter().map(|row| row[i]));
            let m = compensated_sum(joint.iter().enumerate().map(|(d, row)| d as f64 * row[i]));
            quantile_means.push(if col > 0.0 { m / col } else { 0.0 });
        }
        Ok(Self {
            n_q,
            joint,
            quantile_means,
            mean: d_tilde.mean(),
        })
    }

    pub fn n_q(&self) -> usize {
        self.n_q
    }

    /// Largest retained degree plus one.
    pub fn degree_len(&self) -> usize {
        self.joint.len()
    }

    #[inline]
    pub fn joint(&self, d: usize, i: usize) -> f64 {
        self.joint.get(d).map_or(0.0, |row| row[i])
    }

    pub fn column_sum(&self, i: usize) -> f64 {
        compensated_sum(self.joint.iter().map(|row| row[i]))
    }

    pub fn row_sum(&self, d: usize) -> f64 {
        self.joint.get(d).map_or(0.0, |row| compensated_sum(row.iter().copied()))
    }

    /// `P(Q~ = i | D~ = d)`; zero for degrees outside the support.
    pub fn q_given_d(&self, i: usize, d: usize) -> f64 {
        let row = self.row_sum(d);
        if row > 0.0 {
            self.joint(d, i) / row
        } else {
            0.0
        }
    }

    /// `P(D~ = d | Q~ = i)`.
    pub fn d_given_q(&self, d: usize, i: usize) -> f64 {
        let col = self.column_sum(i);
        if col > 0.0 {
            self.joint(d, i) / col
        } else {
            0.0
        }
    }

    /// Conditional law of `D~` within quantile `i`, as a dense vector over d.
    pub fn d_given_q_column(&self, i: usize) -> Vec<f64> {
        let col = self.column_sum(i);
        self.joint
            .iter()
            .map(|row| if col > 0.0 { row[i] / col } else { 0.0 })
            .collect()
    }

    pub fn quantile_means(&self) -> &[f64] {
        &self.quantile_means
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// `g(r)`: covariance of the quantile means at the two ends of an X=1
    /// pairing, scaled by `|r|`.
    pub fn g(&self, r: f64) -> f64 {
        let n = self.n_q;
        let mu = compensated_sum(self.quantile_means.iter().copied()) / n as f64;
        let mu2 = mu * mu;
        let s = if r >= 0.0 {
            compensated_sum(self.quantile_means.iter().map(|m| m * m)) / n as f64
        } else {
            compensated_sum(
                (0..n).map(|i| self.quantile_means[i] * self.quantile_means[n - 1 - i]),
            ) / n as f64
        };
        r.abs() * (s - mu2)
    }

    pub fn pairing_kernels(&self, r: f64) -> PairingKernels {
        PairingKernels::new(self, r)
    }
}

/// X=1 pairing kernels: `p1(i, j)` between quantiles and `p1_tilde(d, j)`
/// from a stub of total degree `d` to quantile `j`.
#[derive(Debug, Clone)]
pub struct PairingKernels {
    n_q: usize,
    mirror: bool,
    /// `rows[d][j]`.
    rows: Vec<Vec<f64>>,
}

impl PairingKernels {
    fn new(table: &QuantileTable, r: f64) -> Self {
        let n_q = table.n_q();
        let mirror = r < 0.0;
        let rows = (0..table.degree_len())
            .map(|d| {
                (0..n_q)
                    .map(|j| {
                        let i = if mirror { n_q - 1 - j } else { j };
                        table.q_given_d(i, d)
                    })
                    .collect()
            })
            .collect();
        Self { n_q, mirror, rows }
    }

    pub fn n_q(&self) -> usize {
        self.n_q
    }

    pub fn is_mirrored(&self) -> bool {
        self.mirror
    }

    /// Quantile an X=1 stub in quantile `i` is paired into.
    #[inline]
    pub fn partner(&self, i: usize) -> usize {
        if self.mirror {
            self.n_q - 1 - i
        } else {
            i
        }
    }

    #[inline]
    pub fn p1(&self, i: usize, j: usize) -> f64 {
        if self.partner(i) == j {
            1.0
        } else {
            0.0
        }
    }

    /// Row `d` of the degree-to-quantile kernel; all zeros outside the support.
    pub fn p1_tilde_row(&self, d: usize) -> Option<&[f64]> {
        self.rows.get(d).map(Vec::as_slice)
    }

    #[inline]
    pub fn p1_tilde(&self, d: usize, j: usize) -> f64 {
        self.rows.get(d).map_or(0.0, |row| row[j])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::{stub_degree_law, DiscreteDist};
    use rand::seq::SliceRandom;
    use rand::SeedableRng;

    fn one_plus_poisson(gamma: f64) -> DiscreteDist {
        let p = DiscreteDist::poisson(gamma).unwrap();
        let mut w = vec![0.0];
        w.extend_from_slice(p.pmf());
        DiscreteDist::from_weights(w).unwrap()
    }

    #[test]
    fn single_quantile() {
        let d = one_plus_poisson(5.0);
        let t = QuantileTable::new(&d, 1).unwrap();
        for (k, _) in d.support() {
            assert!((t.q_given_d(0, k) - 1.0).abs() < 1e-15);
        }
        assert!((t.quantile_means()[0] - d.mean()).abs() < 1e-12);
        assert_eq!(t.g(0.7), 0.0);
    }

    #[test]
    fn two_point_halves() {
        let d = DiscreteDist::from_pairs(&[(1, 0.5), (2, 0.5)]).unwrap();
        let t = QuantileTable::new(&d, 2).unwrap();
        assert_eq!(t.joint(1, 0), 0.5);
        assert_eq!(t.joint(1, 1), 0.0);
        assert_eq!(t.joint(2, 0), 0.0);
        assert_eq!(t.joint(2, 1), 0.5);
        assert_eq!(t.quantile_means(), &[1.0, 2.0]);
    }

    #[test]
    fn equal_columns_and_rows() {
        let d = one_plus_poisson(10.0);
        let t = QuantileTable::new(&d, 10).unwrap();
        for i in 0..10 {
            assert!((t.column_sum(i) - 0.1).abs() < 1e-10);
        }
        for (k, p) in d.support() {
            assert!((t.row_sum(k) - p).abs() < 1e-10);
        }
        let m = t.quantile_means();
        assert!(m.windows(2).all(|w| w[0] <= w[1]));
        let avg = m.iter().sum::<f64>() / 10.0;
        assert!((avg - d.mean()).abs() < 1e-10);
    }

    #[test]
    fn kernels_are_stochastic() {
        let d = one_plus_poisson(10.0);
        let t = QuantileTable::new(&d, 7).unwrap();
        for r in [-0.5, 0.0, 0.5] {
            let k = t.pairing_kernels(r);
            for (deg, _) in d.support() {
                let s: f64 = k.p1_tilde_row(deg).unwrap().iter().sum();
                assert!((s - 1.0).abs() < 1e-12);
            }
            for i in 0..7 {
                let s: f64 = (0..7).map(|j| k.p1(i, j)).sum();
                assert_eq!(s, 1.0);
            }
        }
        let k = t.pairing_kernels(-1.0);
        assert_eq!(k.p1(0, 6), 1.0);
        assert_eq!(k.p1(3, 3), 1.0);
        let k = t.pairing_kernels(1.0);
        assert_eq!(k.p1(2, 2), 1.0);
    }

    #[test]
    fn g_bounded_by_variance() {
        let d = one_plus_poisson(10.0);
        let t = QuantileTable::new(&d, 10).unwrap();
        assert_eq!(t.g(0.0), 0.0);
        assert!(t.g(1.0) <= d.variance() + 1e-12);
        assert!(t.g(-1.0) < 0.0);
    }

    #[test]
    fn stub_sorting_reproduces_conditionals() {
        // Sample stubs, sort by total degree (random tie-break), split into
        // equal blocks and compare empirical P(D~ = d | Q~ = i).
        let h = DiscreteDist::poisson_plus(2.0).unwrap();
        let g = DiscreteDist::poisson(8.0).unwrap();
        let d_tilde = stub_degree_law(&h, &g).unwrap();
        let n_q = 10;
        let t = QuantileTable::new(&d_tilde, n_q).unwrap();

        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let gs = g.size_bias().unwrap().sampler();
        let hs = h.size_bias().unwrap().sampler();
        let n = 4_000_000;
        let mut stubs: Vec<usize> = (0..n).map(|_| gs.sample(&mut rng) + hs.sample(&mut rng) - 1).collect();
        stubs.shuffle(&mut rng);
        stubs.sort_unstable();
        let block = n / n_q;
        for i in 0..n_q {
            let slice = &stubs[i * block..(i + 1) * block];
            let mut counts = vec![0usize; t.degree_len().max(slice[slice.len() - 1] + 1)];
            for &d in slice {
                counts[d] += 1;
            }
            for (d, &c) in counts.iter().enumerate() {
                let emp = c as f64 / block as f64;
                assert!((emp - t.d_given_q(d, i)).abs() < 0.01, "q={i} d={d} emp={emp} exact={}", t.d_given_q(d, i));
            }
        }
    }
}
