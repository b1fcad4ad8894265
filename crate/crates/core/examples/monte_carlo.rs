//! Monte Carlo estimates of the major-outbreak probability and final size,
//! set against the asymptotic values.

use clustnet::branching::{analyze, ModelParams};
use clustnet::infection::InfectionSpec;
use clustnet::netgen::GenSpec;
use clustnet::simulate::{estimate, Direction, EstimateSpec, MajorCutoff};

fn main() -> clustnet::Result<()> {
    let infection = InfectionSpec::constant(0.2)?;
    for r in [-1.0, 0.0, 1.0] {
        let params = ModelParams::poisson(10.0, 2.0, r, 10, infection)?;
        let rep = analyze(&params)?;
        let est = estimate(&EstimateSpec {
            network: GenSpec {
                n: 5000,
                household: params.household.clone(),
                global: params.global.clone(),
                r,
                n_q: 10,
                seed: 0,
            },
            infection,
            p_rw: 0.0,
            n_sims: 300,
            cutoff: MajorCutoff::default(),
            direction: Direction::Forward,
            master_seed: 2024,
        })?;
        println!(
            "r = {r:>4}: p_maj {:.3} vs {:.3} ± {:.3};  z {:.3} vs {:.3} ± {:.4}",
            rep.p_maj.unwrap(),
            est.p_hat,
            2.0 * est.p_se,
            rep.z,
            est.z_hat.unwrap_or(f64::NAN),
            2.0 * est.z_se.unwrap_or(f64::NAN)
        );
    }
    Ok(())
}
