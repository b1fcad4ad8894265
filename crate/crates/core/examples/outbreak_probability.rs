//! Threshold, major-outbreak probability and final size from the
//! branching-process approximations, across the correlation parameter.

use clustnet::branching::{analyze, ModelParams};
use clustnet::infection::InfectionSpec;

fn main() -> clustnet::Result<()> {
    let infection = InfectionSpec::constant(0.2)?;
    println!("r      R*      p_maj   z");
    for k in 0..=8 {
        let r = -1.0 + 0.25 * k as f64;
        let rep = analyze(&ModelParams::poisson(10.0, 2.0, r, 10, infection)?)?;
        println!("{r:<6} {:.4}  {:.4}  {:.4}", rep.r_star, rep.p_maj.unwrap_or(f64::NAN), rep.z);
    }
    Ok(())
}
