//! The growth rate `F(β) = lim (1/(β|V_n|)) log tr(K̃_n* K̃_n)` with
//! `|V_n| = |Λ_n| = 2^{n+1} - 1`.

use libm::{cosh, log, pow};

use super::dense::build_k_tilde;
use crate::boundary::solution_family;
use crate::error::{Error, Result};
use crate::model::check_beta;

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name: "alpha",
            value: alpha,
        })
    }
}

fn check_n(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidParameter { name: "n", value: 0.0 });
    }
    Ok(())
}

/// `F_n(β, α) = [-log(α cosh⁴β) + 2^{n+1} log cosh⁴β] / (β (2^{n+1} - 1))`.
pub fn free_energy(n: usize, beta: f64, alpha: f64) -> Result<f64> {
    check_n(n)?;
    check_beta(beta)?;
    check_alpha(alpha)?;
    let leaves = pow(2.0, (n + 1) as f64);
    let log_c4 = 4.0 * log(cosh(beta));
    let numerator = -(log(alpha) + log_c4) + leaves * log_c4;
    Ok(numerator / (beta * (leaves - 1.0)))
}

/// `(4/β) log cosh β`.
pub fn free_energy_limit(beta: f64) -> Result<f64> {
    check_beta(beta)?;
    Ok(4.0 * log(cosh(beta)) / beta)
}

/// `F_n` from the dense normalized trace of `K̃_n* K̃_n` under the solution
/// family; `n ≤ 1`.
pub fn free_energy_dense(n: usize, beta: f64, alpha: f64) -> Result<f64> {
    check_n(n)?;
    check_alpha(alpha)?;
    let bc = solution_family(alpha, beta, n + 1)?;
    let k = build_k_tilde(n, beta, &bc)?;
    let trace = k.adjoint().product(&k)?.normalized_trace().re;
    let volume = pow(2.0, (n + 1) as f64) - 1.0;
    Ok(log(trace) / (beta * volume))
}
