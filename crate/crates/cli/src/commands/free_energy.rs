use std::io::Write;

use serde::Serialize;
use xyqmc::model::beta_grid;
use xyqmc::state::{free_energy, free_energy_limit};

use super::scan;
use crate::args::{FreeEnergyArgs, OutputFormat};
use crate::error::Result;
use crate::output::{number, write_json_lines, CsvTable};

#[derive(Debug, Serialize)]
struct FreeEnergyRow {
    beta: f64,
    n: usize,
    alpha: f64,
    #[serde(rename = "F_n")]
    f_n: f64,
    #[serde(rename = "F_limit")]
    f_limit: f64,
    abs_gap: f64,
}

pub fn run(args: &FreeEnergyArgs, out: &mut dyn Write) -> Result<bool> {
    let grid = args.beta.grid(&beta_grid())?;
    let rows = scan(&grid, |_, &beta| {
        let alpha = args.alpha.resolve(beta)?;
        let f_n = free_energy(args.n, beta, alpha)?;
        let f_limit = free_energy_limit(beta)?;
        Ok(FreeEnergyRow {
            beta,
            n: args.n,
            alpha,
            f_n,
            f_limit,
            abs_gap: (f_n - f_limit).abs(),
        })
    })?;
    match args.out {
        OutputFormat::Json => write_json_lines(out, &rows)?,
        OutputFormat::Csv => {
            let mut table = CsvTable::new(&["beta", "F_n", "F_limit", "abs_gap"]);
            for r in &rows {
                table.push(vec![
                    number(r.beta, "beta")?,
                    number(r.f_n, "F_n")?,
                    number(r.f_limit, "F_limit")?,
                    number(r.abs_gap, "abs_gap")?,
                ]);
            }
            table.write(out)?;
        }
    }
    Ok(true)
}
