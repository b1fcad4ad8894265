//! Choose the Poisson-template parameters for a target clustering and
//! degree correlation; then trade clustering away by rewiring.

use clustnet::branching::{rewired_tuning, tune_poisson};
use clustnet::netprops::poisson_c_rho;
use clustnet::Error;

fn main() -> clustnet::Result<()> {
    let (mu, r) = tune_poisson(10.0, 0.16, 0.30, 10)?;
    let (c, rho) = poisson_c_rho(10.0, mu, r, 10)?;
    println!("target (0.16, 0.30): mu = {mu:.4}, r = {r:.6} -> c = {c:.6}, rho = {rho:.6}");

    match tune_poisson(10.0, 0.16, 0.95, 10) {
        Err(Error::Infeasible { lo, hi, .. }) => println!("rho = 0.95 is out of reach; attainable [{lo:.4}, {hi:.4}]"),
        other => println!("unexpected: {other:?}"),
    }

    for p_rw in [0.0, 0.5, 1.0] {
        let (c, rho) = rewired_tuning(10.0, 10, (6.9676, -1.0), p_rw)?;
        println!("rewired base, p_RW = {p_rw}: c = {c:.4}, rho = {rho:.4}");
    }
    Ok(())
}
