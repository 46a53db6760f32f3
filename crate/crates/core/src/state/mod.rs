//! Finite-volume forward states on `Λ_n` of the order-2 tree.
//!
//! With boundary data `(w₀, {h^(n)})` the construction is
//!
//! ```text
//! K_[m-1,m] = Π_{x ∈ W_{m-1}} Π_{y ∈ S(x)} K_<x,y>          (forward order)
//! K_n       = w₀^{1/2} K_[0,1] ··· K_[n-1,n] h_n^{1/2}
//! W_n]      = K_n K_n*
//! φ^(n)(a)  = tr(W_{n+1]} (a ⊗ 1))                           ("padded")
//!           = tr(W_n] a)        when the boundary data is consistent ("reduced")
//! ```
//!
//! Edge operators sharing a parent do not commute, so every product here
//! keeps the forward order on `K` factors and the backward order on their
//! adjoints.
//!
//! Two independent evaluators are provided: [`dense`] materializes `W` (up to
//! `Λ_2`, 128x128) and [`transfer`] contracts the tree leaf-to-root with 2x2
//! messages. [`matrix_free`] evaluates the padded form on `Λ_3` by applying
//! `K_n` to every basis vector.

pub mod dense;
pub mod free_energy;
pub mod matrix_free;
pub mod observable;
pub mod quasi;
pub mod transfer;

use alloc::vec;
use alloc::vec::Vec;

pub use dense::{build_density, build_level_coupler, expectation_dense, Density, DenseOptions};
pub use free_energy::{free_energy, free_energy_dense, free_energy_limit};
pub use matrix_free::PaddedTraceOracle;
pub use observable::{ProductObservable, ProductTerm};
pub use quasi::{ChoiSpectrum, ConjugationTrace, QuasiConditionalReport, QuasiConditionalWindow};
pub use transfer::{expectation_transfer, TransferEngine, TransferMessage};

use crate::boundary::{solution_family, BoundaryCondition};
use crate::error::Result;
use crate::linalg::{Mat2, SiteOperator, C64};
use crate::model::{check_beta, k_edge};
use crate::tree::Vertex;

/// Largest number of sites for a dense `2^m x 2^m` operator.
pub const DENSE_MAX_SITES: usize = 7;
/// Largest number of sites for the matrix-free padded-trace oracle.
pub const MATRIX_FREE_MAX_SITES: usize = 15;
/// Deepest level handled by the transfer engine.
pub const TRANSFER_MAX_LEVEL: usize = 12;
/// Threshold on functional values and on the boundary-consistency residuals.
pub const FUNCTIONAL_TOL: f64 = 1e-10;
/// Threshold on operator-norm residuals.
pub const OPERATOR_TOL: f64 = 1e-12;

/// Which of the two expressions for `φ^(n)` to evaluate.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Evaluation {
    /// Reduced when the boundary residuals are within [`FUNCTIONAL_TOL`],
    /// padded otherwise.
    #[default]
    Auto,
    /// `tr(W_n] a)`.
    Reduced,
    /// `tr(W_{n+1]} (a ⊗ 1))`.
    Padded,
}

/// Brute-force parent matrix produced by two children:
/// `tr_x(K_<x,y> K_<x,z> (1 ⊗ h_y ⊗ h_z) K_<x,z>* K_<x,y>*)` with the
/// normalized partial trace over `{y, z}`.
pub fn check_eq2(h_y: &Mat2, h_z: &Mat2, beta: f64) -> Result<Mat2> {
    check_beta(beta)?;
    let x = Vertex::root();
    let y = x.child(1);
    let z = x.child(2);
    let sites = vec![x.clone(), y.clone(), z.clone()];
    let k_xy = k_edge(&x, &y, beta)?.into_operator().embed(&sites)?;
    let k_xz = k_edge(&x, &z, beta)?.into_operator().embed(&sites)?;
    let children = SiteOperator::single(y, h_y)
        .tensor(&SiteOperator::single(z, h_z))?
        .embed(&sites)?;
    let left = k_xy.product(&k_xz)?;
    let full = left.product(&children)?.product(&left.adjoint())?;
    let parent = full.normalized_partial_trace(&[x])?;
    Ok(parent.to_mat2().expect("single site"))
}

/// How far boundary data is from the normalization and recursion conditions.
#[derive(Clone, Debug, PartialEq)]
pub struct Residuals {
    /// `|tr(w₀ h^(0)) - 1|`.
    pub eq1: f64,
    /// `eq2[n] = ‖check_eq2(h^(n+1), h^(n+1)) - h^(n)‖_F`.
    pub eq2: Vec<f64>,
}

impl Residuals {
    pub fn max_eq2(&self) -> f64 {
        self.eq2.iter().copied().fold(0.0, f64::max)
    }

    pub fn within(&self, tol: f64) -> bool {
        self.eq1 <= tol && self.max_eq2() <= tol
    }
}

/// Residuals of `bc` for the levels `0..through` of the recursion.
pub fn boundary_residuals(bc: &BoundaryCondition, beta: f64, through: usize) -> Result<Residuals> {
    let mut eq2 = Vec::with_capacity(through);
    for n in 0..through {
        let child = bc.h(n + 1)?;
        let parent = check_eq2(child, child, beta)?;
        eq2.push((parent - bc.h(n)?).norm());
    }
    Ok(Residuals {
        eq1: bc.eq1_residual(),
        eq2,
    })
}

/// Resolves [`Evaluation::Auto`] for a state on `Λ_n`.
pub fn resolve_evaluation(
    evaluation: Evaluation,
    bc: &BoundaryCondition,
    beta: f64,
    n: usize,
) -> Result<Evaluation> {
    Ok(match evaluation {
        Evaluation::Auto => {
            let through = n.min(bc.depth());
            let consistent = bc.depth() >= n
                && boundary_residuals(bc, beta, through)?.within(FUNCTIONAL_TOL);
            if consistent {
                Evaluation::Reduced
            } else {
                Evaluation::Padded
            }
        }
        other => other,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Engine {
    Dense,
    Transfer,
}

/// `φ^(n)` for fixed `β` and boundary data.
#[derive(Clone, Debug)]
pub struct FiniteVolumeState {
    pub n: usize,
    pub beta: f64,
    pub bc: BoundaryCondition,
    pub engine: Engine,
}

impl FiniteVolumeState {
    pub fn new(n: usize, beta: f64, bc: BoundaryCondition, engine: Engine) -> Result<Self> {
        check_beta(beta)?;
        Ok(FiniteVolumeState { n, beta, bc, engine })
    }

    pub fn expectation(&self, obs: &ProductObservable, evaluation: Evaluation) -> Result<C64> {
        match self.engine {
            Engine::Dense => expectation_dense(
                obs,
                self.n,
                self.beta,
                &self.bc,
                DenseOptions {
                    evaluation,
                    allow_matrix_free: false,
                },
            ),
            Engine::Transfer => {
                TransferEngine::new(self.beta, &self.bc)?.expectation(obs, self.n, evaluation)
            }
        }
    }

    pub fn residuals(&self) -> Result<Residuals> {
        boundary_residuals(&self.bc, self.beta, self.n.min(self.bc.depth()))
    }
}

/// Values of `φ^(n)` under `solution_family(α)` for every `α` and observable.
#[derive(Clone, Debug, PartialEq)]
pub struct UniquenessReport {
    pub alphas: Vec<f64>,
    /// `values[i][j]`: observable `j` under `alphas[i]`.
    pub values: Vec<Vec<C64>>,
    pub max_deviation: f64,
}

/// Evaluates every observable under each member of the solution family with
/// the transfer engine and reports the largest pairwise spread.
pub fn uniqueness_check(
    alphas: &[f64],
    observables: &[ProductObservable],
    n: usize,
    beta: f64,
) -> Result<UniquenessReport> {
    let mut values = Vec::with_capacity(alphas.len());
    for &alpha in alphas {
        let bc = solution_family(alpha, beta, n + 1)?;
        let engine = TransferEngine::new(beta, &bc)?;
        let row = observables
            .iter()
            .map(|obs| engine.expectation(obs, n, Evaluation::Auto))
            .collect::<Result<Vec<_>>>()?;
        values.push(row);
    }
    let mut max_deviation: f64 = 0.0;
    for j in 0..observables.len() {
        for a in 0..values.len() {
            for b in (a + 1)..values.len() {
                max_deviation = max_deviation.max((values[a][j] - values[b][j]).norm());
            }
        }
    }
    Ok(UniquenessReport {
        alphas: alphas.to_vec(),
        values,
        max_deviation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::boundary::{alpha0, pushdown, BoundaryPoint};
    use approx::assert_abs_diff_eq;

    const COSH1_4: f64 = 5.669_626_950_043_876;

    #[test]
    fn eq2_oracle_examples() {
        let id = Mat2::identity();
        let out = check_eq2(&id, &id, 1.0).unwrap();
        assert!((out - id * C64::new(COSH1_4, 0.0)).norm() <= 1e-12);

        let fp = id * C64::new(alpha0(1.0), 0.0);
        assert!((check_eq2(&fp, &fp, 1.0).unwrap() - fp).norm() <= 1e-12);

        let child = BoundaryPoint::new(0.7, 0.3);
        let out = check_eq2(&child.to_matrix(0.0), &child.to_matrix(0.0), 1.0).unwrap();
        let p = pushdown(child, 1.0);
        assert_abs_diff_eq!(out[(0, 0)].re, p.x, epsilon = 1e-12);
        assert_abs_diff_eq!(out[(1, 1)].re, p.x, epsilon = 1e-12);
        assert_abs_diff_eq!(out[(0, 1)].norm(), p.y, epsilon = 1e-12);
    }

    #[test]
    fn eq2_oracle_keeps_the_phase() {
        let child = BoundaryPoint::new(0.5, 0.2);
        let phase = 0.4;
        let out = check_eq2(&child.to_matrix(phase), &child.to_matrix(phase), 0.8).unwrap();
        let expected = pushdown(child, 0.8).to_matrix(phase);
        assert!((out - expected).norm() <= 1e-12);
    }

    #[test]
    fn residuals_of_solution_family() {
        for alpha in [0.3, 1.0, 4.0] {
            let bc = solution_family(alpha, 1.0, 5).unwrap();
            let r = boundary_residuals(&bc, 1.0, 5).unwrap();
            assert!(r.within(1e-12), "{r:?}");
        }
        let bad = BoundaryCondition::new(Mat2::identity(), vec![Mat2::identity(); 3]).unwrap();
        let r = boundary_residuals(&bad, 1.0, 2).unwrap();
        assert!(!r.within(1e-3));
        assert_eq!(
            resolve_evaluation(Evaluation::Auto, &bad, 1.0, 1).unwrap(),
            Evaluation::Padded
        );
    }
}
