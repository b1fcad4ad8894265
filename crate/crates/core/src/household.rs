//! Within-household epidemics.
//!
//! `T^(h)` is the number of further cases in a household of size `h` with
//! one initial infective, `M^(h)` is the size of a local susceptibility set
//! minus one. The rewired counterparts replace the clique by a tree in which
//! every node has `h - 1` neighbours.

use crate::error::{Error, Result};
use crate::infection::InfectionSpec;
use crate::numeric::{Binomials, CompensatedSum};

/// Which local random variable a PGF refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LocalVariable {
    /// Final size `T`.
    FinalSize,
    /// Susceptibility set `M`.
    Susceptibility,
}

const FIXED_POINT_TOL: f64 = 1e-13;
const FIXED_POINT_MAX_ITER: usize = 1_000_000;

/// Precomputed household quantities for sizes `1..=max_h`.
#[derive(Debug, Clone)]
pub struct HouseholdEngine {
    infection: InfectionSpec,
    max_h: usize,
    binom: Binomials,
    /// `escape[k] = phi_I(k lambda)`.
    escape: Vec<f64>,
    means: Vec<f64>,
    m_pmfs: Vec<Vec<f64>>,
}

impl HouseholdEngine {
    pub fn new(infection: InfectionSpec, max_h: usize) -> Result<Self> {
        infection.validate()?;
        let max_h = max_h.max(1);
        let binom = Binomials::new(max_h);
        let escape: Vec<f64> = (0..=max_h).map(|k| infection.escape(k)).collect();

        // alpha_k = k - sum_{l<k} C(k,l) alpha_l phi(l lambda)^(k-l)
        let mut alpha = vec![0.0; max_h + 1];
        for k in 1..=max_h {
            let mut acc = CompensatedSum::new();
            acc.add(k as f64);
            for l in 1..k {
                acc.add(-binom.get(k, l) * alpha[l] * escape[l].powi((k - l) as i32));
            }
            alpha[k] = acc.value();
        }
        let mut means = vec![0.0; max_h + 1];
        for h in 1..=max_h {
            let mut acc = CompensatedSum::new();
            acc.add((h - 1) as f64);
            for k in 1..h {
                acc.add(-binom.get(h - 1, k) * alpha[k] * escape[k].powi((h - k) as i32));
            }
            means[h] = acc.value().max(0.0);
        }

        // top[k] = P(M^(k) = k - 1)
        let mut top = vec![0.0; max_h + 1];
        if max_h >= 1 {
            top[1] = 1.0;
        }
        for k in 2..=max_h {
            let mut acc = CompensatedSum::new();
            acc.add(1.0);
            for l in 1..k {
                acc.add(-binom.get(k - 1, l - 1) * escape[l].powi((k - l) as i32) * top[l]);
            }
            top[k] = acc.value();
        }
        let mut m_pmfs = vec![Vec::new(); max_h + 1];
        for h in 1..=max_h {
            m_pmfs[h] = (0..h)
                .map(|k| {
                    let p = binom.get(h - 1, k) * escape[k + 1].powi((h - 1 - k) as i32) * top[k + 1];
                    p.clamp(0.0, 1.0)
                })
                .collect();
        }

        Ok(Self {
            infection,
            max_h,
            binom,
            escape,
            means,
            m_pmfs,
        })
    }

    pub fn infection(&self) -> &InfectionSpec {
        &self.infection
    }

    pub fn max_h(&self) -> usize {
        self.max_h
    }

    pub fn p_i(&self) -> f64 {
        1.0 - self.escape[1.min(self.max_h)]
    }

    fn check_h(&self, h: usize) {
        assert!(
            (1..=self.max_h).contains(&h),
            "household size {h} outside engine range 1..={}",
            self.max_h
        );
    }

    /// `E[T^(h)]`.
    pub fn final_size_mean(&self, h: usize) -> f64 {
        self.check_h(h);
        self.means[h]
    }

    /// `E[s^T^(h)]` for a constant infectious period.
    pub fn final_size_pgf(&self, h: usize, s: f64) -> Result<f64> {
        if !self.infection.is_constant_period() {
            return Err(Error::ConstantPeriodRequired);
        }
        self.check_h(h);
        Ok(self.final_size_pgf_unchecked(h, s))
    }

    /// Rescaled recursion `beta_k = s^k alpha_k(s)`, which stays finite at
    /// `s = 0`.
    pub(crate) fn final_size_pgf_unchecked(&self, h: usize, s: f64) -> f64 {
        let q = self.escape[1];
        let mut beta = [0.0f64; 64];
        let mut beta_vec;
        let beta: &mut [f64] = if h <= 64 {
            &mut beta[..h]
        } else {
            beta_vec = vec![0.0; h];
            &mut beta_vec
        };
        let mut s_pow = Vec::with_capacity(h);
        let mut x = 1.0;
        for _ in 0..h {
            s_pow.push(x);
            x *= s;
        }
        for k in 0..h {
            let mut acc = CompensatedSum::new();
            acc.add(1.0);
            for l in 0..k {
                acc.add(-self.binom.get(k, l) * q.powi((l * (k - l)) as i32) * s_pow[k - l] * beta[l]);
            }
            beta[k] = acc.value();
        }
        let mut out = CompensatedSum::new();
        for k in 0..h {
            out.add(self.binom.get(h - 1, k) * q.powi((k * (h - k)) as i32) * s_pow[h - 1 - k] * beta[k]);
        }
        out.value().clamp(0.0, 1.0)
    }

    /// Pmf of `M^(h)` over `0..h`.
    pub fn susceptibility_pmf(&self, h: usize) -> &[f64] {
        self.check_h(h);
        &self.m_pmfs[h]
    }

    pub fn susceptibility_mean(&self, h: usize) -> f64 {
        self.susceptibility_pmf(h)
            .iter()
            .enumerate()
            .map(|(k, p)| k as f64 * p)
            .collect::<CompensatedSum>()
            .value()
    }

    pub fn susceptibility_pgf(&self, h: usize, s: f64) -> f64 {
        self.susceptibility_pmf(h).iter().rev().fold(0.0, |acc, &p| acc * s + p)
    }

    /// `E[T^hat^(h)]`, possibly infinite.
    pub fn rewired_mean(&self, h: usize) -> f64 {
        rewired_final_size_mean(h, self.p_i())
    }

    /// PGF of the rewired final size or susceptibility set; both have the
    /// same form with `p_I = 1 - phi_I(lambda)`.
    pub fn rewired_pgf(&self, h: usize, s: f64) -> f64 {
        rewired_final_size_pgf(h, self.p_i(), s)
    }

    /// `(1 - p_RW) mu^(h) + p_RW mu_hat^(h)`.
    pub fn mixture_mean(&self, h: usize, p_rw: f64) -> f64 {
        if p_rw == 0.0 {
            return self.final_size_mean(h);
        }
        let rewired = self.rewired_mean(h);
        if p_rw == 1.0 {
            return rewired;
        }
        (1.0 - p_rw) * self.final_size_mean(h) + p_rw * rewired
    }

    pub fn mixture_pgf(&self, h: usize, p_rw: f64, which: LocalVariable, s: f64) -> Result<f64> {
        let base = || match which {
            LocalVariable::FinalSize => self.final_size_pgf(h, s),
            LocalVariable::Susceptibility => Ok(self.susceptibility_pgf(h, s)),
        };
        if p_rw == 0.0 {
            return base();
        }
        let rewired = self.rewired_pgf(h, s);
        if p_rw == 1.0 {
            if which == LocalVariable::FinalSize && !self.infection.is_constant_period() {
                return Err(Error::ConstantPeriodRequired);
            }
            return Ok(rewired);
        }
        Ok((1.0 - p_rw) * base()? + p_rw * rewired)
    }

    /// Pmf of `T^(h)` extracted as polynomial coefficients of the PGF
    /// recursion. Loses accuracy for large `h` and small `p_I`; intended for
    /// small households and checks.
    pub fn final_size_pmf(&self, h: usize) -> Result<Vec<f64>> {
        if !self.infection.is_constant_period() {
            return Err(Error::ConstantPeriodRequired);
        }
        self.check_h(h);
        let q = self.escape[1];
        // beta_k as polynomials in s of degree <= k.
        let mut beta: Vec<Vec<f64>> = Vec::with_capacity(h);
        for k in 0..h {
            let mut poly = vec![0.0; k + 1];
            poly[0] = 1.0;
            for (l, b) in beta.iter().enumerate() {
                let c = self.binom.get(k, l) * q.powi((l * (k - l)) as i32);
                for (j, &bj) in b.iter().enumerate() {
                    poly[j + k - l] -= c * bj;
                }
            }
            beta.push(poly);
        }
        let mut out = vec![0.0; h];
        for (k, b) in beta.iter().enumerate() {
            let c = self.binom.get(h - 1, k) * q.powi((k * (h - k)) as i32);
            for (j, &bj) in b.iter().enumerate() {
                out[j + h - 1 - k] += c * bj;
            }
        }
        Ok(out)
    }
}

/// `E[T^(h)]` for one household size.
pub fn final_size_mean(h: usize, infection: &InfectionSpec) -> Result<f64> {
    Ok(HouseholdEngine::new(*infection, h)?.final_size_mean(h.max(1)))
}

/// `E[s^T^(h)]`, constant infectious period only.
pub fn final_size_pgf(h: usize, infection: &InfectionSpec, s: f64) -> Result<f64> {
    HouseholdEngine::new(*infection, h)?.final_size_pgf(h.max(1), s)
}

pub fn susceptibility_set_pmf(h: usize, infection: &InfectionSpec) -> Result<Vec<f64>> {
    Ok(HouseholdEngine::new(*infection, h)?.susceptibility_pmf(h.max(1)).to_vec())
}

/// `(h-1) p / (1 - (h-2) p)`, or infinity once the tree epidemic is
/// supercritical.
pub fn rewired_final_size_mean(h: usize, p_i: f64) -> f64 {
    if h <= 1 {
        return 0.0;
    }
    let branching = (h - 2) as f64 * p_i;
    if branching >= 1.0 {
        f64::INFINITY
    } else {
        (h - 1) as f64 * p_i / (1.0 - branching)
    }
}

/// `(1 - p + p f~)^(h-1)` with `f~` the smallest root of
/// `x = s (1 - p + p x)^(h-2)`.
pub fn rewired_final_size_pgf(h: usize, p_i: f64, s: f64) -> f64 {
    if h <= 1 {
        return 1.0;
    }
    let f = tree_offspring_fixed_point(h - 2, p_i, s);
    (1.0 - p_i + p_i * f).powi((h - 1) as i32)
}

/// Same functional form as [`rewired_final_size_pgf`]; contacts out of an
/// infective are marginally Bernoulli(p_I) in the backward tree.
pub fn rewired_susceptibility_pgf(h: usize, p_i: f64, s: f64) -> f64 {
    rewired_final_size_pgf(h, p_i, s)
}

/// Smallest root in [0, 1] of `x = s (1 - p + p x)^m`, by Newton steps from
/// zero (monotone for this convex map) with a plain iteration fallback.
fn tree_offspring_fixed_point(m: usize, p: f64, s: f64) -> f64 {
    if m == 0 {
        return s;
    }
    let phi = |x: f64| s * (1.0 - p + p * x).powi(m as i32);
    let dphi = |x: f64| s * m as f64 * p * (1.0 - p + p * x).powi(m as i32 - 1);
    let mut x = 0.0f64;
    for _ in 0..FIXED_POINT_MAX_ITER {
        let fx = phi(x);
        let slope = dphi(x);
        let next = if slope < 1.0 {
            x + (fx - x) / (1.0 - slope)
        } else {
            fx
        };
        let next = next.clamp(x, 1.0);
        if (next - x).abs() < FIXED_POINT_TOL {
            return next;
        }
        x = next;
    }
    x
}
