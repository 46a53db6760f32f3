use std::io::Write;

use serde::Serialize;
use xyqmc::boundary::{solution_family, BoundaryCondition};
use xyqmc::linalg::C64;
use xyqmc::state::{
    boundary_residuals, expectation_dense, resolve_evaluation, DenseOptions, Evaluation, ProductObservable,
    TransferEngine,
};
use xyqmc::Error as CoreError;

use super::scan;
use crate::args::{check_positive, EngineChoice, EvaluationChoice, ExpectArgs, OutputFormat};
use crate::error::Result;
use crate::observable_file::read_observable;
use crate::output::{complex, number, write_json_lines, CsvTable};

#[derive(Debug, Serialize)]
struct ResidualRecord {
    eq1: f64,
    eq2: f64,
}

#[derive(Debug, Serialize)]
struct ExpectRecord {
    n: usize,
    beta: f64,
    alpha: f64,
    engine: &'static str,
    evaluation: &'static str,
    value: [f64; 2],
    residuals: ResidualRecord,
    #[serde(skip_serializing_if = "Option::is_none")]
    dense: Option<[f64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    transfer: Option<[f64; 2]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    gap: Option<f64>,
}

fn evaluation(choice: EvaluationChoice) -> Evaluation {
    match choice {
        EvaluationChoice::Auto => Evaluation::Auto,
        EvaluationChoice::Reduced => Evaluation::Reduced,
        EvaluationChoice::Padded => Evaluation::Padded,
    }
}

fn evaluation_name(e: Evaluation) -> &'static str {
    match e {
        Evaluation::Auto => "auto",
        Evaluation::Reduced => "reduced",
        Evaluation::Padded => "padded",
    }
}

struct Query<'a> {
    obs: &'a ProductObservable,
    n: usize,
    beta: f64,
    bc: BoundaryCondition,
    evaluation: Evaluation,
    matrix_free: bool,
}

impl Query<'_> {
    fn dense(&self) -> Result<C64> {
        let options = DenseOptions {
            evaluation: self.evaluation,
            allow_matrix_free: self.matrix_free,
        };
        Ok(expectation_dense(self.obs, self.n, self.beta, &self.bc, options)?)
    }

    fn transfer(&self) -> Result<C64> {
        Ok(TransferEngine::new(self.beta, &self.bc)?.expectation(self.obs, self.n, self.evaluation)?)
    }
}

pub fn run(args: &ExpectArgs, out: &mut dyn Write) -> Result<bool> {
    let tol = check_positive("tol", args.tol)?;
    let obs = read_observable(&args.observable)?;
    log::info!("observable with {} terms reaching level {}", obs.terms().len(), obs.support_level());
    let grid = args.beta.grid(&[1.0])?;
    let records = scan(&grid, |_, &beta| {
        let alpha = args.alpha.resolve(beta)?;
        let bc = solution_family(alpha, beta, args.n + 1)?;
        let evaluation = resolve_evaluation(evaluation(args.evaluation), &bc, beta, args.n)?;
        let residuals = boundary_residuals(&bc, beta, args.n)?;
        let query = Query {
            obs: &obs,
            n: args.n,
            beta,
            bc,
            evaluation,
            matrix_free: args.matrix_free,
        };
        let (engine, value, dense, transfer, gap) = match args.engine {
            EngineChoice::Dense => ("dense", query.dense()?, None, None, None),
            EngineChoice::Transfer => ("transfer", query.transfer()?, None, None, None),
            EngineChoice::Auto => match query.dense() {
                Ok(v) => ("dense", v, None, None, None),
                Err(crate::CliError::Core(CoreError::Infeasible { .. })) => {
                    ("transfer", query.transfer()?, None, None, None)
                }
                Err(e) => return Err(e),
            },
            EngineChoice::Both => {
                let d = query.dense()?;
                let t = query.transfer()?;
                ("both", t, Some(complex(d)), Some(complex(t)), Some((d - t).norm()))
            }
        };
        Ok(ExpectRecord {
            n: args.n,
            beta,
            alpha,
            engine,
            evaluation: evaluation_name(evaluation),
            value: complex(value),
            residuals: ResidualRecord {
                eq1: residuals.eq1,
                eq2: residuals.max_eq2(),
            },
            dense,
            transfer,
            gap,
        })
    })?;
    let passed = records.iter().all(|r| r.gap.is_none_or(|g| g <= tol));
    match args.out {
        OutputFormat::Json => write_json_lines(out, &records)?,
        OutputFormat::Csv => {
            let mut table = CsvTable::new(&[
                "n", "beta", "alpha", "engine", "evaluation", "re", "im", "eq1", "eq2", "gap",
            ]);
            for r in &records {
                table.push(vec![
                    r.n.to_string(),
                    number(r.beta, "beta")?,
                    number(r.alpha, "alpha")?,
                    r.engine.to_string(),
                    r.evaluation.to_string(),
                    number(r.value[0], "re")?,
                    number(r.value[1], "im")?,
                    number(r.residuals.eq1, "eq1")?,
                    number(r.residuals.eq2, "eq2")?,
                    r.gap.map(|g| number(g, "gap")).transpose()?.unwrap_or_default(),
                ]);
            }
            table.write(out)?;
        }
    }
    Ok(passed)
}
