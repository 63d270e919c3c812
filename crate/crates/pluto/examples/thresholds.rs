//! Thresholds for each prime code next to the polynomial-code baselines.

use pluto::sim::{table_one_inputs, thresholds_table, write_thresholds_csv};

fn main() -> pluto::Result<()> {
    let rows = thresholds_table(&table_one_inputs());
    write_thresholds_csv(&rows, std::io::stdout())?;
    Ok(())
}
