use std::io::Write;

use serde::Serialize;
use xyqmc::boundary::solution_family;
use xyqmc::state::boundary_residuals;

use super::scan;
use crate::args::{check_positive, OutputFormat, SolveBoundaryArgs};
use crate::error::Result;
use crate::output::{matrix, number, write_json_lines, CsvTable};

#[derive(Debug, Serialize)]
struct BoundaryRecord {
    alpha: f64,
    beta: f64,
    w0: [[[f64; 2]; 2]; 2],
    h_levels: Vec<[[[f64; 2]; 2]; 2]>,
    eq1_residual: f64,
    /// Level `n` compares `h^(n)` with the parent produced by two copies of `h^(n+1)`.
    eq2_residual_per_level: Vec<f64>,
    passed: bool,
}

pub fn run(args: &SolveBoundaryArgs, out: &mut dyn Write) -> Result<bool> {
    let tol = check_positive("tol", args.tol)?;
    let grid = args.beta.grid(&[1.0])?;
    let records = scan(&grid, |_, &beta| {
        let alpha = args.alpha.resolve(beta)?;
        log::info!("solving β={beta} α={alpha} through level {}", args.n);
        let bc = solution_family(alpha, beta, args.n + 1)?;
        let residuals = boundary_residuals(&bc, beta, args.n + 1)?;
        Ok(BoundaryRecord {
            alpha,
            beta,
            w0: matrix(bc.w0()),
            h_levels: bc.levels()[..=args.n].iter().map(matrix).collect(),
            eq1_residual: residuals.eq1,
            passed: residuals.within(tol),
            eq2_residual_per_level: residuals.eq2,
        })
    })?;
    let passed = records.iter().all(|r| r.passed);
    match args.out {
        OutputFormat::Json => write_json_lines(out, &records)?,
        OutputFormat::Csv => {
            let mut table = CsvTable::new(&[
                "beta", "alpha", "level", "h11", "h12_re", "h12_im", "h22", "eq1_residual", "eq2_residual",
            ]);
            for r in &records {
                for (level, h) in r.h_levels.iter().enumerate() {
                    table.push(vec![
                        number(r.beta, "beta")?,
                        number(r.alpha, "alpha")?,
                        level.to_string(),
                        number(h[0][0][0], "h11")?,
                        number(h[0][1][0], "h12_re")?,
                        number(h[0][1][1], "h12_im")?,
                        number(h[1][1][0], "h22")?,
                        number(r.eq1_residual, "eq1_residual")?,
                        number(r.eq2_residual_per_level[level], "eq2_residual")?,
                    ]);
                }
            }
            table.write(out)?;
        }
    }
    Ok(passed)
}
