//! Clustering and degree correlation of the Poisson template, and the
//! range of correlations reachable at each clustering level.

use clustnet::netprops::{poisson_c_rho, poisson_envelope};

fn main() -> clustnet::Result<()> {
    let gamma = 10.0;
    println!("mu    r      c       rho");
    for mu in [2.0, 4.0, 6.0] {
        for r in [-1.0, 0.0, 1.0] {
            let (c, rho) = poisson_c_rho(gamma, mu, r, 10)?;
            println!("{mu:<5} {r:<6} {c:.4}  {rho:.4}");
        }
    }

    println!("\nattainable rho by n_Q (mu = 5, c = 0.25)");
    for n_q in [2, 10, 100] {
        let p = &poisson_envelope(gamma, n_q, &[5.0])?[0];
        println!("n_Q = {n_q:<4} [{:.4}, {:.4}]", p.rho_lower, p.rho_upper);
    }
    Ok(())
}
