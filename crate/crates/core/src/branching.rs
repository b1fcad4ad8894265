//! Multitype branching-process approximations of the epidemic.
//!
//! Types are the degree quantiles of the global stub through which an
//! individual is reached. The forward process gives the threshold `R*` and
//! the major-outbreak probability; the backward (susceptibility set)
//! process gives the relative final size `z`.

use log::warn;
use rand::Rng;

use crate::dist::{stub_degree_law, DiscreteDist};
use crate::error::{Error, Result};
use crate::household::{HouseholdEngine, LocalVariable};
use crate::infection::InfectionSpec;
use crate::netprops::{poisson_c_rho_with, poisson_stub_law};
use crate::numeric::CompensatedSum;
use crate::quantile::{PairingKernels, QuantileTable};
use crate::rng::rng_from_seed;

const EXTINCTION_TOL: f64 = 1e-12;
const EXTINCTION_MAX_ITER: usize = 1_000_000;
const PERRON_TOL: f64 = 1e-12;
const PERRON_MAX_ITER: usize = 100_000;

/// Everything the analytics and the simulator need to agree on.
#[derive(Debug, Clone)]
pub struct ModelParams {
    pub household: DiscreteDist,
    pub global: DiscreteDist,
    pub r: f64,
    pub n_q: usize,
    pub p_rw: f64,
    pub infection: InfectionSpec,
}

impl ModelParams {
    pub fn validate(&self) -> Result<()> {
        if !(-1.0..=1.0).contains(&self.r) {
            return Err(Error::InvalidParameter(format!("r = {} outside [-1, 1]", self.r)));
        }
        if self.n_q == 0 {
            return Err(Error::InvalidParameter("n_Q must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&self.p_rw) {
            return Err(Error::InvalidParameter(format!("p_RW = {} outside [0, 1]", self.p_rw)));
        }
        if self.household.prob(0) > 0.0 {
            return Err(Error::InvalidParameter("household sizes must be at least 1".into()));
        }
        self.infection.validate()
    }

    /// Poisson template: `G ~ Poi(gamma - mu)`, `H ~ Poi+(mu)`.
    pub fn poisson(gamma: f64, mu: f64, r: f64, n_q: usize, infection: InfectionSpec) -> Result<Self> {
        if !(0.0..gamma).contains(&mu) {
            return Err(Error::InvalidParameter(format!(
                "Poisson template needs 0 <= mu < gamma, got mu = {mu}, gamma = {gamma}"
            )));
        }
        Ok(Self {
            household: DiscreteDist::poisson_plus(mu)?,
            global: DiscreteDist::poisson(gamma - mu)?,
            r,
            n_q,
            p_rw: 0.0,
            infection,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeanMatrix {
    n: usize,
    entries: Vec<f64>,
    has_infinite: bool,
}

impl MeanMatrix {
    pub fn from_rows(rows: &[Vec<f64>], has_infinite: bool) -> Result<Self> {
        let n = rows.len();
        if n == 0 || rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidParameter("mean matrix must be square and non-empty".into()));
        }
        let entries: Vec<f64> = rows.iter().flatten().copied().collect();
        if entries.iter().any(|x| !(*x >= 0.0) || !x.is_finite()) {
            return Err(Error::InvalidParameter("mean matrix entries must be finite and >= 0".into()));
        }
        Ok(Self {
            n,
            entries,
            has_infinite,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.n..(i + 1) * self.n]
    }

    pub fn has_infinite(&self) -> bool {
        self.has_infinite
    }

    /// Strong connectivity of the graph of positive entries.
    pub fn is_irreducible(&self) -> bool {
        let n = self.n;
        let reach = |transpose: bool| {
            let mut seen = vec![false; n];
            seen[0] = true;
            let mut stack = vec![0];
            while let Some(i) = stack.pop() {
                for j in 0..n {
                    let w = if transpose { self.get(j, i) } else { self.get(i, j) };
                    if w > 0.0 && !seen[j] {
                        seen[j] = true;
                        stack.push(j);
                    }
                }
            }
            seen.into_iter().all(|b| b)
        };
        reach(false) && reach(true)
    }

    fn mul(&self, x: &[f64], out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate() {
            *o = self.row(i).iter().zip(x).map(|(a, b)| a * b).sum();
        }
    }
}

/// Dominant eigenvalue of a non-negative matrix, or infinity when flagged.
///
/// Power iteration on `M + sI` with `s` the largest row sum, so periodic
/// matrices still converge; stops when the Collatz-Wielandt bounds agree.
pub fn r_star(m: &MeanMatrix) -> Result<f64> {
    if m.has_infinite {
        return Ok(f64::INFINITY);
    }
    let n = m.n;
    let shift = (0..n).map(|i| m.row(i).iter().sum::<f64>()).fold(0.0, f64::max);
    if shift == 0.0 {
        return Ok(0.0);
    }
    if n == 1 {
        return Ok(m.get(0, 0));
    }
    if !m.is_irreducible() {
        warn!("mean matrix is reducible; the dominant eigenvalue may not be simple");
    }
    let mut rng = rng_from_seed(0x5eed);
    let mut x: Vec<f64> = (0..n).map(|_| rng.random_range(0.5..1.5)).collect();
    let mut y = vec![0.0; n];
    let mut history = Vec::new();
    for _ in 0..PERRON_MAX_ITER {
        m.mul(&x, &mut y);
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        for i in 0..n {
            if x[i] > 1e-300 {
                let ratio = y[i] / x[i];
                lo = lo.min(ratio);
                hi = hi.max(ratio);
            }
        }
        if hi - lo <= PERRON_TOL * hi.max(1e-300) {
            return Ok(0.5 * (lo + hi));
        }
        history.push(0.5 * (lo + hi));
        if history.len() > 8 {
            history.remove(0);
        }
        let mut norm = 0.0f64;
        for i in 0..n {
            x[i] = y[i] + shift * x[i];
            norm = norm.max(x[i]);
        }
        for v in &mut x {
            *v /= norm;
        }
    }
    // Reducible matrices can have zero components in the limit, where the
    // ratio bounds never meet; accept the last estimate if it has settled.
    if let [.., a, b] = history.as_slice() {
        if (a - b).abs() <= PERRON_TOL * b.abs().max(1e-300) {
            return Ok(*b);
        }
    }
    Err(Error::NonConvergence {
        what: "power iteration",
        iterations: PERRON_MAX_ITER,
        history,
    })
}

/// Analytic epidemic quantities for one parameter point.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalyticReport {
    pub r_star: f64,
    /// Absent for non-constant infectious periods.
    pub p_maj: Option<f64>,
    pub z: f64,
    pub sigma: Option<Vec<f64>>,
    pub xi: Vec<f64>,
}

/// Precomputed laws for the forward and backward branching processes.
#[derive(Debug, Clone)]
pub struct BranchingModel {
    params: ModelParams,
    n_q: usize,
    abs_r: f64,
    p_i: f64,
    table: QuantileTable,
    kernels: PairingKernels,
    global: Vec<(usize, f64)>,
    mu_g: f64,
    pi_tilde: Vec<(usize, f64)>,
    /// `(d, P(D~ = d | Q~ = i))` per type.
    type_degrees: Vec<Vec<(usize, f64)>>,
    /// `(h, pi~_h^(d))` per degree.
    household_given_degree: Vec<Vec<(usize, f64)>>,
    engine: HouseholdEngine,
    max_h: usize,
}

impl BranchingModel {
    pub fn new(params: &ModelParams) -> Result<Self> {
        params.validate()?;
        let h_tilde = params.household.size_bias()?;
        let g_tilde = params.global.size_bias()?;
        let d_tilde = stub_degree_law(&params.household, &params.global)?;
        let table = QuantileTable::new(&d_tilde, params.n_q)?;
        let kernels = table.pairing_kernels(params.r);

        let pi_tilde: Vec<(usize, f64)> = h_tilde.support().collect();
        let max_h = params.household.max_value().max(1);
        let mut household_given_degree = vec![Vec::new(); table.degree_len()];
        for (d, slot) in household_given_degree.iter_mut().enumerate() {
            let p_d = d_tilde.prob(d);
            if p_d == 0.0 {
                continue;
            }
            let weights: Vec<(usize, f64)> = pi_tilde
                .iter()
                .filter(|(h, _)| *h <= d)
                .map(|&(h, p)| (h, p * g_tilde.prob(d - h + 1)))
                .filter(|(_, w)| *w > 0.0)
                .collect();
            let total: f64 = weights.iter().map(|(_, w)| *w).collect::<CompensatedSum>().value();
            *slot = weights.into_iter().map(|(h, w)| (h, w / total)).collect();
        }
        let type_degrees = (0..params.n_q)
            .map(|i| {
                table
                    .d_given_q_column(i)
                    .into_iter()
                    .enumerate()
                    .filter(|(_, p)| *p > 0.0)
                    .collect()
            })
            .collect();

        let engine = HouseholdEngine::new(params.infection, max_h)?;
        Ok(Self {
            n_q: params.n_q,
            abs_r: params.r.abs(),
            p_i: params.infection.p_i(),
            table,
            kernels,
            global: params.global.support().collect(),
            mu_g: params.global.mean(),
            pi_tilde,
            type_degrees,
            household_given_degree,
            engine,
            max_h,
            params: params.clone(),
        })
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn quantile_table(&self) -> &QuantileTable {
        &self.table
    }

    pub fn household_engine(&self) -> &HouseholdEngine {
        &self.engine
    }

    /// `pi~_h^(d)` for degree `d`.
    pub fn household_given_degree(&self, d: usize) -> &[(usize, f64)] {
        self.household_given_degree.get(d).map_or(&[], Vec::as_slice)
    }

    fn local_mean(&self, h: usize) -> f64 {
        self.engine.mixture_mean(h, self.params.p_rw)
    }

    pub fn mean_matrix(&self) -> MeanMatrix {
        let n = self.n_q;
        let p = self.p_i;
        let r = self.abs_r;
        let has_infinite = self.params.p_rw > 0.0
            && self.pi_tilde.iter().any(|&(h, _)| self.engine.rewired_mean(h).is_infinite());

        // Mean type-j offspring of one secondary household member, by h.
        let secondary: Vec<Vec<f64>> = (0..=self.max_h)
            .map(|h| {
                (0..n)
                    .map(|j| {
                        if h == 0 {
                            return 0.0;
                        }
                        let tail: f64 = self
                            .global
                            .iter()
                            .filter(|(g, _)| *g > 0)
                            .map(|&(g, pg)| pg * g as f64 * self.kernels.p1_tilde(g + h - 1, j))
                            .collect::<CompensatedSum>()
                            .value();
                        p * ((1.0 - r) * self.mu_g / n as f64 + r * tail)
                    })
                    .collect()
            })
            .collect();

        let mut entries = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                let kernel = (1.0 - r) / n as f64 + r * self.kernels.p1(i, j);
                let mut acc = CompensatedSum::new();
                for &(d, pd) in &self.type_degrees[i] {
                    for &(h, ph) in self.household_given_degree(d) {
                        let mu = if has_infinite { 0.0 } else { self.local_mean(h) };
                        let primary = (d - h) as f64 * p * kernel;
                        acc.add(pd * ph * (primary + mu * secondary[h][j]));
                    }
                }
                entries[i * n + j] = acc.value().max(0.0);
            }
        }
        MeanMatrix {
            n,
            entries,
            has_infinite,
        }
    }

    pub fn r_star(&self) -> Result<f64> {
        r_star(&self.mean_matrix())
    }

    /// Offspring PGFs of every type and of the ancestor, evaluated at `s`.
    pub fn offspring_pgfs(&self, s: &[f64], which: LocalVariable) -> Result<(Vec<f64>, f64)> {
        if which == LocalVariable::FinalSize && !self.params.infection.is_constant_period() {
            return Err(Error::ConstantPeriodRequired);
        }
        let n = self.n_q;
        let p = self.p_i;
        let r = self.abs_r;
        let uniform = (1.0 - r) * s.iter().sum::<f64>() / n as f64;

        let per_type: Vec<f64> = (0..n)
            .map(|i| 1.0 - p + p * (uniform + r * s[self.kernels.partner(i)]))
            .collect();
        let per_degree: Vec<f64> = (0..self.table.degree_len())
            .map(|d| {
                let directed = match self.kernels.p1_tilde_row(d) {
                    Some(row) => row.iter().zip(s).map(|(a, b)| a * b).sum::<f64>(),
                    None => 0.0,
                };
                1.0 - p + p * (uniform + r * directed)
            })
            .collect();

        // Global-offspring PGF of a secondary case, and its local epidemic.
        let mut secondary = vec![1.0; self.max_h + 1];
        let mut local = vec![1.0; self.max_h + 1];
        for &(h, _) in &self.pi_tilde {
            let mut acc = CompensatedSum::new();
            for &(g, pg) in &self.global {
                acc.add(if g == 0 { pg } else { pg * per_degree[g + h - 1].powi(g as i32) });
            }
            secondary[h] = acc.value();
            local[h] = self.engine.mixture_pgf(h, self.params.p_rw, which, secondary[h])?;
        }

        let types = (0..n)
            .map(|i| {
                let mut acc = CompensatedSum::new();
                for &(d, pd) in &self.type_degrees[i] {
                    for &(h, ph) in self.household_given_degree(d) {
                        acc.add(pd * ph * per_type[i].powi((d - h) as i32) * local[h]);
                    }
                }
                acc.value()
            })
            .collect();
        let ancestor = self
            .pi_tilde
            .iter()
            .map(|&(h, ph)| ph * secondary[h] * local[h])
            .collect::<CompensatedSum>()
            .value();
        Ok((types, ancestor))
    }

    /// Minimal fixed point of the type PGFs by iteration from zero.
    fn extinction(&self, which: LocalVariable) -> Result<Vec<f64>> {
        let mut s = vec![0.0; self.n_q];
        let mut history = Vec::new();
        for _ in 0..EXTINCTION_MAX_ITER {
            let (next, _) = self.offspring_pgfs(&s, which)?;
            let change = next
                .iter()
                .zip(&s)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            s = next;
            if change < EXTINCTION_TOL {
                return Ok(s);
            }
            history.push(change);
            if history.len() > 8 {
                history.remove(0);
            }
        }
        Err(Error::NonConvergence {
            what: "extinction iteration",
            iterations: EXTINCTION_MAX_ITER,
            history,
        })
    }

    /// Forward extinction probabilities by type (constant period only).
    pub fn forward_extinction(&self) -> Result<Vec<f64>> {
        self.forward_extinction_given(self.r_star()?)
    }

    fn forward_extinction_given(&self, r_star: f64) -> Result<Vec<f64>> {
        if !self.params.infection.is_constant_period() {
            return Err(Error::ConstantPeriodRequired);
        }
        if r_star <= 1.0 {
            return Ok(vec![1.0; self.n_q]);
        }
        self.extinction(LocalVariable::FinalSize)
    }

    /// Probability of a major outbreak (constant period only).
    pub fn p_major(&self) -> Result<f64> {
        let r_star = self.r_star()?;
        self.p_major_given(r_star).map(|(p, _)| p)
    }

    fn p_major_given(&self, r_star: f64) -> Result<(f64, Vec<f64>)> {
        let sigma = self.forward_extinction_given(r_star)?;
        if r_star <= 1.0 {
            return Ok((0.0, sigma));
        }
        let (_, ancestor) = self.offspring_pgfs(&sigma, LocalVariable::FinalSize)?;
        Ok(((1.0 - ancestor).clamp(0.0, 1.0), sigma))
    }

    /// Backward extinction probabilities and relative final size.
    pub fn backward_extinction_and_z(&self) -> Result<(Vec<f64>, f64)> {
        let r_star = self.r_star()?;
        self.backward_given(r_star)
    }

    fn backward_given(&self, r_star: f64) -> Result<(Vec<f64>, f64)> {
        if r_star <= 1.0 {
            return Ok((vec![1.0; self.n_q], 0.0));
        }
        let xi = self.extinction(LocalVariable::Susceptibility)?;
        let (_, ancestor) = self.offspring_pgfs(&xi, LocalVariable::Susceptibility)?;
        Ok((xi, (1.0 - ancestor).clamp(0.0, 1.0)))
    }

    pub fn report(&self) -> Result<AnalyticReport> {
        let r_star = self.r_star()?;
        let (p_maj, sigma) = if self.params.infection.is_constant_period() {
            let (p, s) = self.p_major_given(r_star)?;
            (Some(p), Some(s))
        } else {
            (None, None)
        };
        let (xi, z) = self.backward_given(r_star)?;
        Ok(AnalyticReport {
            r_star,
            p_maj,
            z,
            sigma,
            xi,
        })
    }
}

pub fn mean_matrix(params: &ModelParams) -> Result<MeanMatrix> {
    Ok(BranchingModel::new(params)?.mean_matrix())
}

pub fn forward_extinction(params: &ModelParams) -> Result<Vec<f64>> {
    BranchingModel::new(params)?.forward_extinction()
}

pub fn p_major(params: &ModelParams) -> Result<f64> {
    BranchingModel::new(params)?.p_major()
}

pub fn backward_extinction_and_z(params: &ModelParams) -> Result<(Vec<f64>, f64)> {
    BranchingModel::new(params)?.backward_extinction_and_z()
}

pub fn analyze(params: &ModelParams) -> Result<AnalyticReport> {
    BranchingModel::new(params)?.report()
}

/// Poisson-template parameters reproducing a target `(c, rho)` at total
/// degree `Poi(gamma)`: `mu = gamma sqrt(c)`, `r` by bisection.
pub fn tune_poisson(gamma: f64, c_target: f64, rho_target: f64, n_q: usize) -> Result<(f64, f64)> {
    if !(gamma > 0.0) {
        return Err(Error::InvalidTarget(format!("gamma = {gamma} must be positive")));
    }
    if !(0.0..1.0).contains(&c_target) {
        return Err(Error::InvalidTarget(format!("clustering {c_target} outside [0, 1)")));
    }
    let mu = gamma * c_target.sqrt();
    if mu >= gamma {
        return Err(Error::InvalidTarget(format!("mu = {mu} is not below gamma = {gamma}")));
    }
    let table = QuantileTable::new(&poisson_stub_law(gamma)?, n_q)?;
    let rho = |r: f64| poisson_c_rho_with(&table, gamma, mu, r).map(|(_, rho)| rho);
    let (lo, hi) = (rho(-1.0)?, rho(1.0)?);
    let slack = 1e-12;
    if !(rho_target >= lo - slack && rho_target <= hi + slack) {
        return Err(Error::Infeasible {
            target: rho_target,
            lo,
            hi,
        });
    }
    let (mut a, mut b) = (-1.0f64, 1.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        let value = rho(mid)?;
        if (value - rho_target).abs() < 1e-14 || b - a < 1e-16 {
            return Ok((mu, mid));
        }
        if value < rho_target {
            a = mid;
        } else {
            b = mid;
        }
    }
    Ok((mu, 0.5 * (a + b)))
}

/// Clustering and degree correlation after rewiring a Poisson-template
/// model with base `(mu, r)`.
pub fn rewired_tuning(gamma: f64, n_q: usize, base: (f64, f64), p_rw: f64) -> Result<(f64, f64)> {
    let table = QuantileTable::new(&poisson_stub_law(gamma)?, n_q)?;
    let (c, rho) = poisson_c_rho_with(&table, gamma, base.0, base.1)?;
    Ok((crate::netprops::rewired_clustering(c, p_rw), rho))
}

/// Smallest constant `p_I` with `R* >= 1`, by bisection on `[0, 1]`.
pub fn critical_p_i(params: &ModelParams) -> Result<f64> {
    let at = |p: f64| -> Result<f64> {
        let mut q = params.clone();
        q.infection = InfectionSpec::constant(p)?;
        BranchingModel::new(&q)?.r_star()
    };
    if at(1.0)? < 1.0 {
        return Err(Error::InvalidParameter("R* < 1 even at p_I = 1".into()));
    }
    let (mut a, mut b) = (0.0f64, 1.0f64);
    while b - a > 1e-12 {
        let mid = 0.5 * (a + b);
        if at(mid)? < 1.0 {
            a = mid;
        } else {
            b = mid;
        }
    }
    Ok(b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::infection::InfectiousPeriod;

    fn poisson_params(mu: f64, r: f64, n_q: usize, p: f64) -> ModelParams {
        ModelParams::poisson(10.0, mu, r, n_q, InfectionSpec::constant(p).unwrap()).unwrap()
    }

    #[test]
    fn perron_examples() {
        let m = MeanMatrix::from_rows(&[vec![2.5]], false).unwrap();
        assert_eq!(r_star(&m).unwrap(), 2.5);
        let m = MeanMatrix::from_rows(&[vec![0.0, 2.0], vec![2.0, 0.0]], false).unwrap();
        assert!((r_star(&m).unwrap() - 2.0).abs() < 1e-12);
        let m = MeanMatrix::from_rows(&[vec![1.5, 0.0], vec![0.0, 0.5]], false).unwrap();
        assert!((r_star(&m).unwrap() - 1.5).abs() < 1e-12);
        let m = MeanMatrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]], false).unwrap();
        let exact = (5.0 + 33f64.sqrt()) / 2.0;
        assert!((r_star(&m).unwrap() - exact).abs() < 1e-11);
        let m = MeanMatrix::from_rows(&[vec![1.0]], true).unwrap();
        assert!(r_star(&m).unwrap().is_infinite());
    }

    #[test]
    fn configuration_model_threshold() {
        let params = ModelParams {
            household: DiscreteDist::point(1),
            global: DiscreteDist::poisson(10.0).unwrap(),
            r: 0.0,
            n_q: 3,
            p_rw: 0.0,
            infection: InfectionSpec::constant(0.1).unwrap(),
        };
        let r = BranchingModel::new(&params).unwrap().r_star().unwrap();
        assert!((r - 1.0).abs() < 1e-9, "{r}");
        let params = ModelParams {
            global: DiscreteDist::from_pairs(&[(1, 0.2), (3, 0.5), (6, 0.3)]).unwrap(),
            r: 0.7,
            ..params
        };
        let g = &params.global;
        let expected = 0.1 * g.expect(|x| x * (x - 1.0)) / g.mean();
        // r != 0 changes R* only through the quantile structure.
        let r0 = BranchingModel::new(&ModelParams { r: 0.0, ..params.clone() }).unwrap().r_star().unwrap();
        assert!((r0 - expected).abs() < 1e-12);
    }

    #[test]
    fn type_collapse_at_zero_r() {
        let a = BranchingModel::new(&poisson_params(2.0, 0.0, 4, 0.2)).unwrap().report().unwrap();
        let b = BranchingModel::new(&poisson_params(2.0, 0.0, 1, 0.2)).unwrap().report().unwrap();
        assert!((a.r_star - b.r_star).abs() < 1e-10);
        assert!((a.p_maj.unwrap() - b.p_maj.unwrap()).abs() < 1e-10);
        assert!((a.z - b.z).abs() < 1e-10);
    }

    #[test]
    fn zero_transmission() {
        let m = BranchingModel::new(&poisson_params(2.0, 0.5, 5, 0.0)).unwrap();
        assert!(m.mean_matrix().entries.iter().all(|&x| x == 0.0));
        let rep = m.report().unwrap();
        assert_eq!(rep.r_star, 0.0);
        assert_eq!(rep.p_maj, Some(0.0));
        assert_eq!(rep.z, 0.0);
    }

    #[test]
    fn subcritical_extinction_is_certain() {
        let m = BranchingModel::new(&poisson_params(2.0, 0.5, 5, 0.05)).unwrap();
        assert!(m.r_star().unwrap() < 1.0);
        assert_eq!(m.forward_extinction().unwrap(), vec![1.0; 5]);
        assert_eq!(m.backward_extinction_and_z().unwrap().1, 0.0);
    }

    #[test]
    fn p_major_equals_z_constant_period() {
        for (mu, r, p) in [(2.0, 0.5, 0.2), (4.0, -1.0, 0.15), (6.0, 1.0, 0.3), (0.1, -0.3, 0.12)] {
            let rep = BranchingModel::new(&poisson_params(mu, r, 10, p)).unwrap().report().unwrap();
            assert!(rep.r_star > 1.0);
            assert!((rep.p_maj.unwrap() - rep.z).abs() < 1e-8, "mu={mu} r={r}: {rep:?}");
        }
    }

    #[test]
    fn fixed_point_residuals() {
        let m = BranchingModel::new(&poisson_params(2.0, 0.5, 10, 0.2)).unwrap();
        let rep = m.report().unwrap();
        let sigma = rep.sigma.unwrap();
        let (f, _) = m.offspring_pgfs(&sigma, LocalVariable::FinalSize).unwrap();
        let res = f.iter().zip(&sigma).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(res < 1e-10);
        let (g, _) = m.offspring_pgfs(&rep.xi, LocalVariable::Susceptibility).unwrap();
        let res = g.iter().zip(&rep.xi).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(res < 1e-10);
    }

    #[test]
    fn pgf_derivative_matches_mean_matrix() {
        for (r, p_rw) in [(0.5, 0.0), (-0.7, 0.0), (0.3, 0.4)] {
            let params = ModelParams {
                household: DiscreteDist::from_pairs(&[(1, 0.3), (2, 0.3), (3, 0.2), (5, 0.2)]).unwrap(),
                global: DiscreteDist::poisson(4.0).unwrap(),
                r,
                n_q: 4,
                p_rw,
                infection: InfectionSpec::constant(0.15).unwrap(),
            };
            params.validate().unwrap();
            let m = BranchingModel::new(&params).unwrap();
            let mm = m.mean_matrix();
            assert!(!mm.has_infinite());
            let ones = vec![1.0; 4];
            let eps = 1e-6;
            for j in 0..4 {
                let mut s = ones.clone();
                s[j] -= eps;
                let (f, _) = m.offspring_pgfs(&s, LocalVariable::FinalSize).unwrap();
                for i in 0..4 {
                    let deriv = (1.0 - f[i]) / eps;
                    assert!((deriv - mm.get(i, j)).abs() < 1e-5, "r={r} i={i} j={j}: {deriv} vs {}", mm.get(i, j));
                }
            }
        }
    }

    #[test]
    fn general_period_has_z_only() {
        let params = ModelParams {
            infection: InfectionSpec::general(0.25, InfectiousPeriod::Exponential { mean: 1.0 }).unwrap(),
            ..poisson_params(2.0, 0.5, 5, 0.2)
        };
        let m = BranchingModel::new(&params).unwrap();
        assert!(matches!(m.p_major(), Err(Error::ConstantPeriodRequired)));
        let rep = m.report().unwrap();
        assert!(rep.p_maj.is_none());
        assert!(rep.z > 0.0 && rep.z < 1.0);
    }

    #[test]
    fn rewiring_infinite_mean_flag() {
        let params = ModelParams {
            household: DiscreteDist::point(4),
            p_rw: 0.2,
            ..poisson_params(2.0, 0.5, 3, 0.5)
        };
        let m = BranchingModel::new(&params).unwrap();
        assert!(m.mean_matrix().has_infinite());
        let rep = m.report().unwrap();
        assert!(rep.r_star.is_infinite());
        assert!((rep.p_maj.unwrap() - rep.z).abs() < 1e-8);
    }

    #[test]
    fn rewiring_monotone_bounded_households() {
        let base = ModelParams {
            household: DiscreteDist::from_pairs(&[(1, 0.2), (2, 0.2), (3, 0.3), (4, 0.3)]).unwrap(),
            global: DiscreteDist::poisson(3.0).unwrap(),
            r: 0.3,
            n_q: 5,
            p_rw: 0.0,
            infection: InfectionSpec::constant(0.3).unwrap(),
        };
        let mut prev = (0.0, 0.0, 0.0);
        for (k, p_rw) in [0.0, 0.25, 0.5, 0.75, 1.0].into_iter().enumerate() {
            let rep = analyze(&ModelParams { p_rw, ..base.clone() }).unwrap();
            let cur = (rep.r_star, rep.p_maj.unwrap(), rep.z);
            if k > 0 {
                assert!(cur.0 > prev.0 && cur.1 > prev.1 && cur.2 > prev.2, "{prev:?} -> {cur:?}");
            }
            prev = cur;
        }
    }

    #[test]
    fn tuning_examples() {
        let (mu, r) = tune_poisson(10.0, 0.04, 0.04, 10).unwrap();
        assert_eq!(mu, 2.0);
        assert!(r.abs() < 1e-6);
        let (mu, r) = tune_poisson(10.0, 0.16, 0.30, 10).unwrap();
        let (c, rho) = crate::netprops::poisson_c_rho(10.0, mu, r, 10).unwrap();
        assert!((c - 0.16).abs() < 1e-6 && (rho - 0.30).abs() < 1e-6);
        match tune_poisson(10.0, 0.16, 0.99, 10) {
            Err(Error::Infeasible { lo, hi, .. }) => assert!(lo < hi && hi < 0.99),
            other => panic!("{other:?}"),
        }
        assert!(matches!(tune_poisson(10.0, 1.0, 0.5, 10), Err(Error::InvalidTarget(_))));
    }

    #[test]
    fn rewired_tuning_examples() {
        let base = (6.9676, -1.0);
        let (c, rho) = rewired_tuning(10.0, 10, base, 0.0).unwrap();
        assert!((c - 0.4855).abs() < 5e-4, "{c}");
        assert!((rho - 0.2).abs() < 5e-4, "{rho}");
        let (c1, rho1) = rewired_tuning(10.0, 10, base, 1.0).unwrap();
        assert_eq!(c1, 0.0);
        assert_eq!(rho1, rho);
    }

    #[test]
    fn critical_p_i_is_threshold() {
        let params = poisson_params(2.0, 0.0, 10, 0.1);
        let pc = critical_p_i(&params).unwrap();
        let at = |p: f64| {
            BranchingModel::new(&ModelParams {
                infection: InfectionSpec::constant(p).unwrap(),
                ..params.clone()
            })
            .unwrap()
            .r_star()
            .unwrap()
        };
        assert!((at(pc) - 1.0).abs() < 1e-8);
    }
}
