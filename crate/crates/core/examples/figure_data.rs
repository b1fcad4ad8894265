//! Plot data for the clustering sweep at fixed degree correlation, printed
//! as CSV.

use clustnet::figures::fig5;

fn main() -> clustnet::Result<()> {
    let table = fig5()?;
    println!("{}", table.columns.join(","));
    for row in &table.rows {
        println!("{}", row.join(","));
    }
    Ok(())
}
