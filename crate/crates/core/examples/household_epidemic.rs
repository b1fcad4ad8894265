//! Within-household epidemics: final size, susceptibility set and the
//! tree-like rewired household.

use clustnet::household::HouseholdEngine;
use clustnet::infection::{InfectionSpec, InfectiousPeriod};

fn main() -> clustnet::Result<()> {
    let constant = HouseholdEngine::new(InfectionSpec::constant(0.3)?, 6)?;
    println!("h  P(T = 0..h-1)                           E[T]    E[rewired]");
    for h in 2..=6 {
        let pmf: Vec<String> = constant.final_size_pmf(h)?.iter().map(|p| format!("{p:.3}")).collect();
        println!("{h}  {:<40} {:.4}  {:.4}", pmf.join(" "), constant.final_size_mean(h), constant.rewired_mean(h));
    }

    let exp = InfectionSpec::general(1.0, InfectiousPeriod::Exponential { mean: 1.0 })?.with_p_i(0.3)?;
    let general = HouseholdEngine::new(exp, 6)?;
    println!("\nexponential period, same p_I:");
    for h in 2..=6 {
        println!(
            "h = {h}: E[T] = {:.4}, E[M] = {:.4}",
            general.final_size_mean(h),
            general.susceptibility_mean(h)
        );
    }
    Ok(())
}
