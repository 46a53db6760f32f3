//! Dense construction of `K_[m-1,m]`, `K_n` and `W_n]` on `Λ_n`.

use nalgebra::DMatrix;

use super::matrix_free::PaddedTraceOracle;
use super::observable::ProductObservable;
use super::{resolve_evaluation, Evaluation, DENSE_MAX_SITES, FUNCTIONAL_TOL, MATRIX_FREE_MAX_SITES};
use crate::boundary::BoundaryCondition;
use crate::error::{Error, Result};
use crate::linalg::{sqrt_psd2, SiteOperator, C64};
use crate::model::{check_beta, k_edge};
use crate::tree::{ball, ball_size, level_set, successors, Vertex};

fn check_dense(sites: usize) -> Result<()> {
    if sites > DENSE_MAX_SITES {
        return Err(Error::Infeasible {
            sites,
            limit: DENSE_MAX_SITES,
        });
    }
    Ok(())
}

/// `Π_{x ∈ W_{m-1}} Π_{y ∈ S(x)} K_<x,y>` in forward order, on `Λ_m`.
pub fn build_level_coupler(m: usize, beta: f64, k: usize) -> Result<SiteOperator> {
    check_beta(beta)?;
    if m == 0 || k == 0 {
        return Err(Error::InvalidParameter {
            name: if m == 0 { "m" } else { "k" },
            value: 0.0,
        });
    }
    check_dense(ball_size(m, k))?;
    let sites = ball(m, k);
    coupler_on(&sites, m, beta, k)
}

fn coupler_on(sites: &[Vertex], m: usize, beta: f64, k: usize) -> Result<SiteOperator> {
    let mut out = SiteOperator::identity(sites.to_vec())?;
    for x in level_set(m - 1, k).forward() {
        for y in successors(x, k) {
            let edge = k_edge(x, &y, beta)?.into_operator().embed(sites)?;
            out = out.product(&edge)?;
        }
    }
    Ok(out)
}

/// `w₀^{1/2}` on the root, tensored with identity on `sites`.
fn root_weight(bc: &BoundaryCondition, sites: &[Vertex]) -> Result<SiteOperator> {
    SiteOperator::single(Vertex::root(), &sqrt_psd2(bc.w0())?).embed(sites)
}

/// `⊗_{x ∈ W_n} f(h^(n))`, tensored with identity on `sites`.
fn level_product(m: &crate::linalg::Mat2, n: usize, sites: &[Vertex]) -> Result<SiteOperator> {
    let mut out = SiteOperator::identity(sites.to_vec())?;
    for x in level_set(n, 2).forward() {
        out = out.product(&SiteOperator::single(x.clone(), m).embed(sites)?)?;
    }
    Ok(out)
}

/// `W_n]` with its normalized trace.
#[derive(Clone, Debug)]
pub struct Density {
    pub operator: SiteOperator,
    pub trace: f64,
    /// Normalized trace within [`FUNCTIONAL_TOL`] of 1.
    pub boundary_consistent: bool,
}

/// `K_n = w₀^{1/2} K_[0,1] ··· K_[n-1,n] h_n^{1/2}` on `Λ_n`.
pub fn build_k(n: usize, beta: f64, bc: &BoundaryCondition) -> Result<SiteOperator> {
    check_beta(beta)?;
    check_dense(ball_size(n, 2))?;
    let sites = ball(n, 2);
    let h_sqrt = sqrt_psd2(bc.h(n)?)?;
    let mut k = root_weight(bc, &sites)?;
    for m in 1..=n {
        k = k.product(&coupler_on(&sites, m, beta, 2)?)?;
    }
    k.product(&level_product(&h_sqrt, n, &sites)?)
}

/// `W_n] = K_n K_n*`.
pub fn build_density(n: usize, beta: f64, bc: &BoundaryCondition) -> Result<Density> {
    let k = build_k(n, beta, bc)?;
    let operator = k.product(&k.adjoint())?;
    let trace = operator.normalized_trace().re;
    Ok(Density {
        operator,
        trace,
        boundary_consistent: (trace - 1.0).abs() <= FUNCTIONAL_TOL,
    })
}

/// `K̃_n = w₀^{1/2} K_[0,1] ··· K_[n,n+1]` on `Λ_{n+1}`, without boundary factor.
pub fn build_k_tilde(n: usize, beta: f64, bc: &BoundaryCondition) -> Result<SiteOperator> {
    check_beta(beta)?;
    check_dense(ball_size(n + 1, 2))?;
    let sites = ball(n + 1, 2);
    let mut k = root_weight(bc, &sites)?;
    for m in 1..=n + 1 {
        k = k.product(&coupler_on(&sites, m, beta, 2)?)?;
    }
    Ok(k)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct DenseOptions {
    pub evaluation: Evaluation,
    /// Route padded evaluations beyond the dense limit to [`PaddedTraceOracle`].
    pub allow_matrix_free: bool,
}

fn trace_against(w: &SiteOperator, obs: &ProductObservable) -> Result<C64> {
    let a = obs.to_operator(w.sites())?;
    let wm: &DMatrix<C64> = w.matrix();
    let am = a.matrix();
    let d = wm.nrows();
    let mut total = C64::new(0.0, 0.0);
    for i in 0..d {
        for j in 0..d {
            total += wm[(i, j)] * am[(j, i)];
        }
    }
    Ok(total / d as f64)
}

/// `φ^(n)(obs)` from the dense density (or the matrix-free oracle).
pub fn expectation_dense(
    obs: &ProductObservable,
    n: usize,
    beta: f64,
    bc: &BoundaryCondition,
    options: DenseOptions,
) -> Result<C64> {
    check_beta(beta)?;
    obs.check_support(n)?;
    let volume = match resolve_evaluation(options.evaluation, bc, beta, n)? {
        Evaluation::Padded => n + 1,
        _ => n,
    };
    let sites = ball_size(volume, 2);
    if sites <= DENSE_MAX_SITES {
        let w = build_density(volume, beta, bc)?;
        return trace_against(&w.operator, obs);
    }
    if options.allow_matrix_free && volume == n + 1 && sites <= MATRIX_FREE_MAX_SITES {
        return PaddedTraceOracle::new(n, beta, bc)?.expectation(obs);
    }
    Err(Error::Infeasible {
        sites,
        limit: if options.allow_matrix_free {
            MATRIX_FREE_MAX_SITES
        } else {
            DENSE_MAX_SITES
        },
    })
}
