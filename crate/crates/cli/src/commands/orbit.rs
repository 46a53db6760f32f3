use std::io::Write;

use serde::Serialize;
use xyqmc::boundary::{is_admissible, orbit, periodic_point_search, BoundaryPoint};

use crate::args::{check_positive, OrbitArgs, OutputFormat};
use crate::error::Result;
use crate::output::{number, write_json_lines, CsvTable};

#[derive(Debug, Serialize)]
struct OrbitPoint {
    step: usize,
    x: f64,
    y: f64,
    admissible: bool,
}

#[derive(Debug, Serialize)]
struct OrbitRecord {
    beta: f64,
    points: Vec<OrbitPoint>,
    termination: String,
}

#[derive(Debug, Serialize)]
struct Hit {
    start: [f64; 2],
    period: usize,
    step: usize,
}

#[derive(Debug, Serialize)]
struct PeriodicRecord {
    beta: f64,
    samples: usize,
    hits: Vec<Hit>,
}

pub fn run(args: &OrbitArgs, out: &mut dyn Write) -> Result<bool> {
    let beta = check_positive("beta", args.beta)?;
    if args.periodic {
        return periodic(args, beta, out);
    }
    let result = orbit(BoundaryPoint::new(args.x0, args.y0), beta, args.max_steps)?;
    log::info!("orbit from ({}, {}) ended with {}", args.x0, args.y0, result.termination);
    let record = OrbitRecord {
        beta,
        points: result
            .points
            .iter()
            .enumerate()
            .map(|(step, p)| OrbitPoint {
                step,
                x: p.x,
                y: p.y,
                admissible: is_admissible(*p, beta),
            })
            .collect(),
        termination: result.termination.to_string(),
    };
    match args.out.unwrap_or(OutputFormat::Csv) {
        OutputFormat::Json => write_json_lines(out, &[record])?,
        OutputFormat::Csv => {
            let mut table = CsvTable::new(&["step", "x", "y", "admissible"]);
            for p in &record.points {
                table.push(vec![
                    p.step.to_string(),
                    number(p.x, "x")?,
                    number(p.y, "y")?,
                    u8::from(p.admissible).to_string(),
                ]);
            }
            table.write(out)?;
            writeln!(out, "termination={}", record.termination)?;
        }
    }
    Ok(true)
}

fn periodic(args: &OrbitArgs, beta: f64, out: &mut dyn Write) -> Result<bool> {
    let report = periodic_point_search(beta, args.k_max, args.samples, args.seed)?;
    log::info!("{} periodic returns among {} starts", report.hits.len(), report.samples);
    let record = PeriodicRecord {
        beta: report.beta,
        samples: report.samples,
        hits: report
            .hits
            .iter()
            .map(|h| Hit {
                start: [h.start.x, h.start.y],
                period: h.period,
                step: h.step,
            })
            .collect(),
    };
    match args.out.unwrap_or(OutputFormat::Json) {
        OutputFormat::Json => write_json_lines(out, &[record])?,
        OutputFormat::Csv => {
            let mut table = CsvTable::new(&["x0", "y0", "period", "step"]);
            for h in &record.hits {
                table.push(vec![
                    number(h.start[0], "x0")?,
                    number(h.start[1], "y0")?,
                    h.period.to_string(),
                    h.step.to_string(),
                ]);
            }
            table.write(out)?;
        }
    }
    Ok(true)
}
