//! Plot-ready tables for the published figures.

use log::info;

use crate::branching::{analyze, critical_p_i, tune_poisson, ModelParams};
use crate::error::{Error, Result};
use crate::infection::InfectionSpec;
use crate::netgen::GenSpec;
use crate::netprops::{poisson_envelope, rewired_clustering, poisson_c_rho};
use crate::rng::derive_seed;
use crate::simulate::{estimate, Direction, EstimateSpec, MajorCutoff};

pub const FIGURES: [&str; 5] = ["fig1", "fig2", "fig3", "fig4", "fig5"];

const GAMMA: f64 = 10.0;
const N_Q: usize = 10;
/// `(mu, r)` of the maximal-clustering model with `rho = 0.2`.
pub const FIG5_BASE: (f64, f64) = (6.9676, -1.0);

#[derive(Debug, Clone)]
pub struct FigureOptions {
    /// Replicates per simulated point; zero skips simulation.
    pub n_sims: usize,
    pub sizes: Vec<usize>,
    pub seed: u64,
    pub cutoff: MajorCutoff,
}

impl Default for FigureOptions {
    fn default() -> Self {
        Self {
            n_sims: 1000,
            sizes: vec![1000, 10_000],
            seed: 0,
            cutoff: MajorCutoff::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    fn new(columns: &[&'static str]) -> Self {
        Self {
            columns: columns.to_vec(),
            rows: Vec::new(),
        }
    }

    fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| *c == name)
    }
}

pub fn num(x: f64) -> String {
    x.to_string()
}

pub fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

fn grid(lo: f64, hi: f64, steps: usize) -> Vec<f64> {
    (0..=steps).map(|k| lo + (hi - lo) * k as f64 / steps as f64).collect()
}

pub fn figure(name: &str, opts: &FigureOptions) -> Result<Table> {
    match name {
        "fig1" => fig1(),
        "fig2" => fig2(opts),
        "fig3" => fig3(),
        "fig4" => fig4(),
        "fig5" => fig5(),
        other => Err(Error::UnknownFigure(other.to_string())),
    }
}

/// Attainable degree correlation against clustering, `D ~ Poi(10)`.
pub fn fig1() -> Result<Table> {
    let mut t = Table::new(&["n_q", "mu", "c", "rho_lower", "rho_upper", "rho_upper_limit"]);
    let mus = grid(0.0, 9.9, 99);
    for n_q in [2, 5, 10, 100, 1000] {
        for p in poisson_envelope(GAMMA, n_q, &mus)? {
            t.push(vec![
                n_q.to_string(),
                num(p.mu),
                num(p.c),
                num(p.rho_lower),
                num(p.rho_upper),
                num(1.0 + p.c - p.c.sqrt()),
            ]);
        }
    }
    Ok(t)
}

/// `p_maj` and `z` against `r`, analytic curves and simulation bands.
pub fn fig2(opts: &FigureOptions) -> Result<Table> {
    let mut t = Table::new(&[
        "mu", "r", "n", "r_star", "p_maj", "z", "n_sims", "n_major", "p_hat", "p_se", "z_hat", "z_se", "cutoff",
        "ambiguous",
    ]);
    let infection = InfectionSpec::constant(0.2)?;
    let simulated = [-1.0, -0.5, 0.0, 0.5, 1.0];
    let mut point = 0u64;
    for mu in [2.0, 4.0] {
        for r in grid(-1.0, 1.0, 40) {
            let params = ModelParams::poisson(GAMMA, mu, r, N_Q, infection)?;
            let rep = analyze(&params)?;
            let analytic = [num(rep.r_star), opt(rep.p_maj), num(rep.z)];
            let mut row = vec![num(mu), num(r), String::new()];
            row.extend(analytic.iter().cloned());
            row.extend(std::iter::repeat_n(String::new(), 8));
            t.push(row);
            if opts.n_sims == 0 || !simulated.iter().any(|s| (s - r).abs() < 1e-12) {
                continue;
            }
            for &n in &opts.sizes {
                info!("fig2: mu = {mu}, r = {r}, n = {n}");
                let spec = EstimateSpec {
                    network: GenSpec {
                        n,
                        household: params.household.clone(),
                        global: params.global.clone(),
                        r,
                        n_q: N_Q,
                        seed: 0,
                    },
                    infection,
                    p_rw: 0.0,
                    n_sims: opts.n_sims,
                    cutoff: opts.cutoff,
                    direction: Direction::Forward,
                    master_seed: derive_seed(opts.seed, point),
                };
                point += 1;
                let est = estimate(&spec)?;
                let mut row = vec![num(mu), num(r), n.to_string()];
                row.extend(analytic.iter().cloned());
                row.extend([
                    est.n_sims.to_string(),
                    est.n_major.to_string(),
                    num(est.p_hat),
                    num(est.p_se),
                    opt(est.z_hat),
                    opt(est.z_se),
                    est.cutoff_used.to_string(),
                    est.ambiguous.to_string(),
                ]);
                t.push(row);
            }
        }
    }
    Ok(t)
}

/// Smallest multiple of 0.005 strictly above every critical `p_I` over `r`.
pub fn just_supercritical_p_i(mu: f64, rs: &[f64]) -> Result<f64> {
    let mut worst = 0.0f64;
    for &r in rs {
        let params = ModelParams::poisson(GAMMA, mu, r, N_Q, InfectionSpec::constant(0.1)?)?;
        worst = worst.max(critical_p_i(&params)?);
    }
    Ok(((worst / 0.005).floor() + 1.0) * 0.005)
}

fn p_maj_against_r(t: &mut Table, mu: f64, p_i: f64, rs: &[f64]) -> Result<()> {
    let infection = InfectionSpec::constant(p_i)?;
    for &r in rs {
        let rep = analyze(&ModelParams::poisson(GAMMA, mu, r, N_Q, infection)?)?;
        t.push(vec![num(mu), num(p_i), num(r), num(rep.r_star), opt(rep.p_maj), num(rep.z)]);
    }
    Ok(())
}

/// `p_maj` against `r` for several `p_I`, `mu` in {0.1, 2, 4, 6}.
pub fn fig3() -> Result<Table> {
    let mut t = Table::new(&["mu", "p_i", "r", "r_star", "p_maj", "z"]);
    let rs = grid(-1.0, 1.0, 40);
    for mu in [0.1, 2.0, 4.0, 6.0] {
        let lowest = just_supercritical_p_i(mu, &rs)?;
        for p_i in [lowest, 0.15, 0.2, 0.3] {
            p_maj_against_r(&mut t, mu, p_i, &rs)?;
        }
    }
    Ok(t)
}

/// Near-critical `p_I` with essentially no clustering.
pub fn fig4() -> Result<Table> {
    let mut t = Table::new(&["mu", "p_i", "r", "r_star", "p_maj", "z"]);
    let rs = grid(-1.0, 1.0, 100);
    for p_i in [0.102, 0.103, 0.104, 0.105, 0.106] {
        p_maj_against_r(&mut t, 0.1, p_i, &rs)?;
    }
    Ok(t)
}

/// `p_maj` against clustering at `rho = 0.2`, `p_I = 0.15`, tuned through
/// `mu` (unrewired) or through rewiring from the maximal-clustering base.
pub fn fig5() -> Result<Table> {
    let mut t = Table::new(&["branch", "c", "rho", "mu", "r", "p_rw", "r_star", "p_maj", "z"]);
    let infection = InfectionSpec::constant(0.15)?;
    let rho_target = 0.2;
    let push = |t: &mut Table, branch: &str, mu: f64, r: f64, p_rw: f64| -> Result<()> {
        let (c0, rho) = poisson_c_rho(GAMMA, mu, r, N_Q)?;
        let mut params = ModelParams::poisson(GAMMA, mu, r, N_Q, infection)?;
        params.p_rw = p_rw;
        let rep = analyze(&params)?;
        t.push(vec![
            branch.to_string(),
            num(rewired_clustering(c0, p_rw)),
            num(rho),
            num(mu),
            num(r),
            num(p_rw),
            num(rep.r_star),
            opt(rep.p_maj),
            num(rep.z),
        ]);
        Ok(())
    };
    for mu in grid(0.0, 6.75, 27) {
        match tune_poisson(GAMMA, (mu / GAMMA).powi(2), rho_target, N_Q) {
            Ok((mu, r)) => push(&mut t, "unrewired", mu, r, 0.0)?,
            Err(Error::Infeasible { .. }) => continue,
            Err(e) => return Err(e),
        }
    }
    let (mu0, r0) = FIG5_BASE;
    push(&mut t, "unrewired", mu0, r0, 0.0)?;
    for p_rw in grid(0.0, 1.0, 20) {
        push(&mut t, "rewired", mu0, r0, p_rw)?;
    }
    Ok(t)
}
