//! Infection model: per-contact transmission and the infectious period.

use std::fmt;

use rand::Rng;
use rand_distr::{Distribution, Exp, Gamma};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Law of the infectious period `I`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InfectiousPeriod {
    Fixed { length: f64 },
    Exponential { mean: f64 },
    Gamma { shape: f64, scale: f64 },
}

impl InfectiousPeriod {
    /// Laplace transform `E[exp(-theta I)]`.
    pub fn laplace(&self, theta: f64) -> f64 {
        match *self {
            InfectiousPeriod::Fixed { length } => (-theta * length).exp(),
            InfectiousPeriod::Exponential { mean } => 1.0 / (1.0 + theta * mean),
            InfectiousPeriod::Gamma { shape, scale } => (1.0 + theta * scale).powf(-shape),
        }
    }

    pub fn mean(&self) -> f64 {
        match *self {
            InfectiousPeriod::Fixed { length } => length,
            InfectiousPeriod::Exponential { mean } => mean,
            InfectiousPeriod::Gamma { shape, scale } => shape * scale,
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = match *self {
            InfectiousPeriod::Fixed { length } => length >= 0.0 && length.is_finite(),
            InfectiousPeriod::Exponential { mean } => mean > 0.0 && mean.is_finite(),
            InfectiousPeriod::Gamma { shape, scale } => {
                shape > 0.0 && scale > 0.0 && shape.is_finite() && scale.is_finite()
            }
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("invalid infectious period {self:?}")))
        }
    }
}

/// How infectives transmit to neighbours.
///
/// `Constant` is the Reed-Frost case: each infective infects each neighbour
/// independently with probability `p_i`. `General` has contacts at rate
/// `lambda` over a random infectious period.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case", deny_unknown_fields)]
pub enum InfectionSpec {
    Constant { p_i: f64 },
    General { lambda: f64, period: InfectiousPeriod },
}

impl InfectionSpec {
    pub fn constant(p_i: f64) -> Result<Self> {
        let spec = InfectionSpec::Constant { p_i };
        spec.validate()?;
        Ok(spec)
    }

    pub fn general(lambda: f64, period: InfectiousPeriod) -> Result<Self> {
        let spec = InfectionSpec::General { lambda, period };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            InfectionSpec::Constant { p_i } => {
                if (0.0..=1.0).contains(&p_i) {
                    Ok(())
                } else {
                    Err(Error::InvalidParameter(format!("p_I = {p_i} is not a probability")))
                }
            }
            InfectionSpec::General { lambda, period } => {
                if !(lambda >= 0.0 && lambda.is_finite()) {
                    return Err(Error::InvalidParameter(format!("lambda = {lambda} must be >= 0")));
                }
                period.validate()
            }
        }
    }

    /// `phi_I(k lambda)`: probability that one infective fails to contact
    /// each of `k` given neighbours.
    pub fn escape(&self, k: usize) -> f64 {
        match *self {
            InfectionSpec::Constant { p_i } => (1.0 - p_i).powi(k as i32),
            InfectionSpec::General { lambda, period } => period.laplace(k as f64 * lambda),
        }
    }

    /// Marginal probability that an infective contacts a given neighbour.
    pub fn p_i(&self) -> f64 {
        match *self {
            InfectionSpec::Constant { p_i } => p_i,
            InfectionSpec::General { .. } => 1.0 - self.escape(1),
        }
    }

    /// True when contacts from one infective are independent across
    /// neighbours, so within-household outcomes are Reed-Frost.
    pub fn is_constant_period(&self) -> bool {
        matches!(
            self,
            InfectionSpec::Constant { .. }
                | InfectionSpec::General {
                    period: InfectiousPeriod::Fixed { .. },
                    ..
                }
        )
    }

    /// Same model with marginal transmission probability scaled to `p_i`
    /// where possible. General models rescale `lambda`.
    pub fn with_p_i(&self, p_i: f64) -> Result<Self> {
        match *self {
            InfectionSpec::Constant { .. } => Self::constant(p_i),
            InfectionSpec::General { period, .. } => {
                if !(0.0..1.0).contains(&p_i) {
                    return Err(Error::InvalidParameter(format!("p_I = {p_i} must lie in [0, 1)")));
                }
                let lambda = solve_lambda(&period, p_i);
                Self::general(lambda, period)
            }
        }
    }

    pub fn sampler(&self) -> Result<TransmissionSampler> {
        self.validate()?;
        Ok(match *self {
            InfectionSpec::Constant { p_i } => TransmissionSampler::Fixed(p_i),
            InfectionSpec::General { lambda, period } => match period {
                InfectiousPeriod::Fixed { length } => {
                    TransmissionSampler::Fixed(-(-lambda * length).exp_m1())
                }
                InfectiousPeriod::Exponential { mean } => TransmissionSampler::Exponential {
                    lambda,
                    dist: Exp::new(1.0 / mean).map_err(|e| Error::InvalidParameter(e.to_string()))?,
                },
                InfectiousPeriod::Gamma { shape, scale } => TransmissionSampler::Gamma {
                    lambda,
                    dist: Gamma::new(shape, scale).map_err(|e| Error::InvalidParameter(e.to_string()))?,
                },
            },
        })
    }
}

fn solve_lambda(period: &InfectiousPeriod, p_i: f64) -> f64 {
    let target = 1.0 - p_i;
    if p_i == 0.0 {
        return 0.0;
    }
    let mut hi = 1.0;
    while period.laplace(hi) > target {
        hi *= 2.0;
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if period.laplace(mid) > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

impl fmt::Display for InfectionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InfectionSpec::Constant { p_i } => write!(f, "constant(p_i={p_i})"),
            InfectionSpec::General { lambda, period } => {
                write!(f, "general(lambda={lambda}, period={period:?})")
            }
        }
    }
}

/// Draws the per-neighbour transmission probability of one infective.
#[derive(Debug, Clone)]
pub enum TransmissionSampler {
    Fixed(f64),
    Exponential { lambda: f64, dist: Exp<f64> },
    Gamma { lambda: f64, dist: Gamma<f64> },
}

impl TransmissionSampler {
    #[inline]
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            TransmissionSampler::Fixed(p) => *p,
            TransmissionSampler::Exponential { lambda, dist } => {
                -(-lambda * dist.sample(rng)).exp_m1()
            }
            TransmissionSampler::Gamma { lambda, dist } => -(-lambda * dist.sample(rng)).exp_m1(),
        }
    }
}
