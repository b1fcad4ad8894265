//! Discrete distributions on the non-negative integers.
//!
//! Every law is stored as a dense, normalised pmf over a finite support.
//! Infinite-support laws are truncated once the remaining tail mass drops
//! below a tolerance; the discarded mass is kept in
//! [`DiscreteDist::tail_mass_bound`].

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{compensated_sum, CompensatedSum};

/// Default tail tolerance used when expanding named laws.
pub const DEFAULT_TRUNCATION: f64 = 1e-14;

const MAX_SUPPORT: usize = 1 << 20;

#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteDist {
    pmf: Vec<f64>,
    tail_mass: f64,
}

impl DiscreteDist {
    /// Builds a law from non-negative weights indexed by value. Weights are
    /// normalised; trailing zeros are trimmed.
    pub fn from_weights(mut weights: Vec<f64>) -> Result<Self> {
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidPmf(
                "weights must be finite and non-negative".into(),
            ));
        }
        while weights.last() == Some(&0.0) {
            weights.pop();
        }
        let total = compensated_sum(weights.iter().copied());
        if weights.is_empty() || total <= 0.0 {
            return Err(Error::EmptyDistribution);
        }
        for w in &mut weights {
            *w /= total;
        }
        Ok(Self {
            pmf: weights,
            tail_mass: 0.0,
        })
    }

    /// Explicit pmf given as `(value, probability)` pairs. Probabilities must
    /// sum to one within 1e-6; the result is renormalised exactly.
    pub fn from_pairs(pairs: &[(usize, f64)]) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::EmptyDistribution);
        }
        let max = pairs.iter().map(|(k, _)| *k).max().unwrap_or(0);
        if max >= MAX_SUPPORT {
            return Err(Error::InvalidPmf(format!("value {max} is too large")));
        }
        let mut weights = vec![0.0; max + 1];
        for &(k, p) in pairs {
            if !(0.0..=1.0).contains(&p) {
                return Err(Error::InvalidPmf(format!(
                    "probability {p} for value {k} is outside [0, 1]"
                )));
            }
            weights[k] += p;
        }
        let total = compensated_sum(weights.iter().copied());
        if (total - 1.0).abs() > 1e-6 {
            return Err(Error::InvalidPmf(format!(
                "probabilities sum to {total}, not 1"
            )));
        }
        Self::from_weights(weights)
    }

    pub fn point(k: usize) -> Self {
        let mut pmf = vec![0.0; k + 1];
        pmf[k] = 1.0;
        Self {
            pmf,
            tail_mass: 0.0,
        }
    }

    pub fn poisson(mean: f64) -> Result<Self> {
        DistSpec::Poisson { mean }.expand(DEFAULT_TRUNCATION)
    }

    /// Poisson conditioned to be strictly positive; `poisson_plus(0)` is the
    /// point mass at 1.
    pub fn poisson_plus(mean: f64) -> Result<Self> {
        DistSpec::PoissonPlus { mean }.expand(DEFAULT_TRUNCATION)
    }

    pub fn pmf(&self) -> &[f64] {
        &self.pmf
    }

    #[inline]
    pub fn prob(&self, k: usize) -> f64 {
        self.pmf.get(k).copied().unwrap_or(0.0)
    }

    /// Largest value with positive retained probability.
    pub fn max_value(&self) -> usize {
        self.pmf.len() - 1
    }

    /// Smallest value with positive probability.
    pub fn min_value(&self) -> usize {
        self.pmf.iter().position(|&p| p > 0.0).unwrap_or(0)
    }

    pub fn tail_mass_bound(&self) -> f64 {
        self.tail_mass
    }

    /// Iterator over `(value, probability)` for values with positive mass.
    pub fn support(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.pmf
            .iter()
            .enumerate()
            .filter(|(_, p)| **p > 0.0)
            .map(|(k, p)| (k, *p))
    }

    pub fn expect<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        compensated_sum(self.support().map(|(k, p)| p * f(k as f64)))
    }

    pub fn mean(&self) -> f64 {
        self.expect(|k| k)
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        self.expect(|k| (k - m) * (k - m))
    }

    /// Mean and variance of the retained pmf.
    pub fn moments(&self) -> Result<(f64, f64)> {
        if self.pmf.iter().all(|&p| p == 0.0) {
            return Err(Error::EmptyDistribution);
        }
        Ok((self.mean(), self.variance()))
    }

    /// Law of the value seen from a uniformly chosen unit: `k p_k / mean`.
    pub fn size_bias(&self) -> Result<Self> {
        let weights: Vec<f64> = self
            .pmf
            .iter()
            .enumerate()
            .map(|(k, p)| k as f64 * p)
            .collect();
        if weights.iter().all(|&w| w == 0.0) {
            return Err(Error::ZeroMean);
        }
        let mut out = Self::from_weights(weights)?;
        out.tail_mass = self.tail_mass;
        Ok(out)
    }

    /// Household size of a uniformly chosen household edge:
    /// weights `h (h - 1) pi_h`.
    pub fn edge_bias(&self) -> Result<Self> {
        let weights: Vec<f64> = self
            .pmf
            .iter()
            .enumerate()
            .map(|(k, p)| k as f64 * (k as f64 - 1.0).max(0.0) * p)
            .collect();
        if weights.iter().all(|&w| w == 0.0) {
            return Err(Error::NoEdges);
        }
        let mut out = Self::from_weights(weights)?;
        out.tail_mass = self.tail_mass;
        Ok(out)
    }

    /// Law of `X - by`. Fails if `X < by` has positive probability.
    pub fn shift_down(&self, by: usize) -> Result<Self> {
        if self.pmf.iter().take(by).any(|&p| p > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "cannot shift a law with mass below {by}"
            )));
        }
        Ok(Self {
            pmf: self.pmf[by..].to_vec(),
            tail_mass: self.tail_mass,
        })
    }

    /// Law of `X + by`.
    pub fn shift_up(&self, by: usize) -> Self {
        let mut pmf = vec![0.0; by];
        pmf.extend_from_slice(&self.pmf);
        Self {
            pmf,
            tail_mass: self.tail_mass,
        }
    }

    /// Law of the sum of independent draws from `self` and `other`.
    pub fn convolve(&self, other: &Self) -> Self {
        let n = self.pmf.len() + other.pmf.len() - 1;
        let mut acc = vec![CompensatedSum::new(); n];
        for (a, pa) in self.support() {
            for (b, pb) in other.support() {
                acc[a + b].add(pa * pb);
            }
        }
        let mut pmf: Vec<f64> = acc.iter().map(|c| c.value()).collect();
        while pmf.len() > 1 && pmf.last() == Some(&0.0) {
            pmf.pop();
        }
        Self {
            pmf,
            tail_mass: self.tail_mass + other.tail_mass,
        }
    }

    pub fn total_variation(&self, other: &Self) -> f64 {
        let n = self.pmf.len().max(other.pmf.len());
        0.5 * (0..n)
            .map(|k| (self.prob(k) - other.prob(k)).abs())
            .sum::<f64>()
    }

    pub fn sampler(&self) -> DistSampler {
        let mut cdf = Vec::with_capacity(self.pmf.len());
        let mut acc = CompensatedSum::new();
        for &p in &self.pmf {
            acc.add(p);
            cdf.push(acc.value());
        }
        if let Some(last) = cdf.last_mut() {
            *last = 1.0;
        }
        DistSampler { cdf }
    }
}

/// Inverse-cdf sampler for a [`DiscreteDist`].
#[derive(Debug, Clone)]
pub struct DistSampler {
    cdf: Vec<f64>,
}

impl DistSampler {
    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.random();
        self.cdf.partition_point(|&c| c <= u).min(self.cdf.len() - 1)
    }
}

/// `D~ = G~ + H~ - 1`: total degree of the owner of a uniformly chosen
/// global stub.
pub fn stub_degree_law(household: &DiscreteDist, global: &DiscreteDist) -> Result<DiscreteDist> {
    let g_tilde = global.size_bias()?;
    let h_tilde_minus_one = household.size_bias()?.shift_down(1)?;
    Ok(g_tilde.convolve(&h_tilde_minus_one))
}

/// A distribution given by name and parameters, as written in config files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum DistSpec {
    Poisson { mean: f64 },
    PoissonPlus { mean: f64 },
    Geometric { p: f64 },
    NegativeBinomial { r: f64, p: f64 },
    Point(usize),
    Pmf(Vec<(usize, f64)>),
}

impl DistSpec {
    /// Expands to a truncated pmf whose discarded tail is below `eps`.
    pub fn expand(&self, eps: f64) -> Result<DiscreteDist> {
        if !(eps > 0.0 && eps < 1e-3) {
            return Err(Error::InvalidParameter(format!(
                "truncation tolerance {eps} must lie in (0, 1e-3)"
            )));
        }
        match *self {
            DistSpec::Poisson { mean } => {
                check_poisson_mean(mean)?;
                if mean == 0.0 {
                    return Ok(DiscreteDist::point(0));
                }
                expand_series((-mean).exp(), |k| mean / (k + 1) as f64, 0.0, mean, eps)
            }
            DistSpec::PoissonPlus { mean } => {
                check_poisson_mean(mean)?;
                if mean == 0.0 {
                    return Ok(DiscreteDist::point(1));
                }
                let positive = -(-mean).exp_m1();
                let mut d = expand_series(
                    (-mean).exp(),
                    |k| mean / (k + 1) as f64,
                    0.0,
                    mean,
                    eps * positive,
                )?;
                d.pmf[0] = 0.0;
                let tail = d.tail_mass / positive;
                let mut out = DiscreteDist::from_weights(d.pmf)?;
                out.tail_mass = tail;
                Ok(out)
            }
            DistSpec::Geometric { p } => {
                if !(p > 0.0 && p <= 1.0) {
                    return Err(Error::InvalidParameter(format!(
                        "geometric success probability {p} must lie in (0, 1]"
                    )));
                }
                if p == 1.0 {
                    return Ok(DiscreteDist::point(0));
                }
                expand_series(p, |_| 1.0 - p, 1.0 - p, (1.0 - p) / p, eps)
            }
            DistSpec::NegativeBinomial { r, p } => {
                if !(r > 0.0 && r.is_finite()) || !(p > 0.0 && p <= 1.0) {
                    return Err(Error::InvalidParameter(format!(
                        "negative_binomial({r}, {p}) needs r > 0 and p in (0, 1]"
                    )));
                }
                if p == 1.0 {
                    return Ok(DiscreteDist::point(0));
                }
                let q = 1.0 - p;
                expand_series(
                    p.powf(r),
                    |k| (k as f64 + r) / (k as f64 + 1.0) * q,
                    q,
                    r * q / p,
                    eps,
                )
            }
            DistSpec::Point(k) => Ok(DiscreteDist::point(k)),
            DistSpec::Pmf(ref pairs) => DiscreteDist::from_pairs(pairs),
        }
    }
}

fn check_poisson_mean(mean: f64) -> Result<()> {
    if !(0.0..=700.0).contains(&mean) {
        return Err(Error::InvalidParameter(format!(
            "Poisson mean {mean} must lie in [0, 700]"
        )));
    }
    Ok(())
}

/// Expands `p_0 = first`, `p_{k+1} = p_k * ratio(k)` until the tail bound
/// `p_{k+1} / (1 - sup ratio)` drops below `eps`. Ratios are assumed
/// monotone with limit `limit_ratio`.
fn expand_series<F: Fn(usize) -> f64>(
    first: f64,
    ratio: F,
    limit_ratio: f64,
    mean: f64,
    eps: f64,
) -> Result<DiscreteDist> {
    let mut pmf = vec![first];
    let mut k = 0usize;
    loop {
        let next = pmf[k] * ratio(k);
        let sup = ratio(k + 1).max(limit_ratio);
        if (k as f64) >= mean && sup < 1.0 && next / (1.0 - sup) < eps {
            break;
        }
        pmf.push(next);
        k += 1;
        if k >= MAX_SUPPORT {
            return Err(Error::InvalidParameter(
                "distribution support too large to expand".into(),
            ));
        }
    }
    let kept = compensated_sum(pmf.iter().copied());
    let tail = (1.0 - kept).max(0.0);
    let mut out = DiscreteDist::from_weights(pmf)?;
    out.tail_mass = tail;
    Ok(out)
}

impl TryFrom<String> for DistSpec {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<DistSpec> for String {
    fn from(d: DistSpec) -> String {
        d.to_string()
    }
}

impl FromStr for DistSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let err = |reason: &str| Error::DistParse {
            input: s.to_string(),
            reason: reason.to_string(),
        };
        let t = s.trim();
        let open = t.find('(').ok_or_else(|| err("expected `name(args)`"))?;
        if !t.ends_with(')') {
            return Err(err("missing closing parenthesis"));
        }
        let name = t[..open].trim();
        let inner = t[open + 1..t.len() - 1].trim();
        let number = |x: &str| -> Result<f64> {
            x.trim()
                .parse::<f64>()
                .map_err(|_| err(&format!("`{}` is not a number", x.trim())))
        };
        let args = || -> Vec<&str> { inner.split(',').map(str::trim).collect() };
        let one = || -> Result<f64> {
            match args().as_slice() {
                [x] => number(x),
                _ => Err(err("expected exactly one argument")),
            }
        };
        match name {
            "poisson" => Ok(DistSpec::Poisson { mean: one()? }),
            "poisson_plus" => Ok(DistSpec::PoissonPlus { mean: one()? }),
            "geometric" => Ok(DistSpec::Geometric { p: one()? }),
            "negative_binomial" => match args().as_slice() {
                [r, p] => Ok(DistSpec::NegativeBinomial {
                    r: number(r)?,
                    p: number(p)?,
                }),
                _ => Err(err("expected two arguments `r, p`")),
            },
            "point" => {
                let k = inner
                    .parse::<usize>()
                    .map_err(|_| err("point(k) needs a non-negative integer"))?;
                Ok(DistSpec::Point(k))
            }
            "pmf" => {
                let body = inner
                    .strip_prefix('[')
                    .and_then(|b| b.strip_suffix(']'))
                    .ok_or_else(|| err("pmf expects a bracketed list `[k:p, ...]`"))?;
                let mut pairs = Vec::new();
                for item in body.split(',').map(str::trim).filter(|x| !x.is_empty()) {
                    let (k, p) = item
                        .split_once(':')
                        .ok_or_else(|| err(&format!("entry `{item}` is not `k:p`")))?;
                    let k = k
                        .trim()
                        .parse::<usize>()
                        .map_err(|_| err(&format!("`{}` is not a non-negative integer", k.trim())))?;
                    pairs.push((k, number(p)?));
                }
                if pairs.is_empty() {
                    return Err(err("empty pmf"));
                }
                Ok(DistSpec::Pmf(pairs))
            }
            other => Err(err(&format!("unknown distribution `{other}`"))),
        }
    }
}

impl fmt::Display for DistSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DistSpec::Poisson { mean } => write!(f, "poisson({mean})"),
            DistSpec::PoissonPlus { mean } => write!(f, "poisson_plus({mean})"),
            DistSpec::Geometric { p } => write!(f, "geometric({p})"),
            DistSpec::NegativeBinomial { r, p } => write!(f, "negative_binomial({r}, {p})"),
            DistSpec::Point(k) => write!(f, "point({k})"),
            DistSpec::Pmf(pairs) => {
                write!(f, "pmf([")?;
                for (i, (k, p)) in pairs.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{k}:{p}")?;
                }
                write!(f, "])")
            }
        }
    }
}
