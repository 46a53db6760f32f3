//! Quasi-conditional expectations on a finite window.
//!
//! ```text
//! Ê(x)   = tr_{W_0}( K_[0,1]* w₀^{1/2} x w₀^{1/2} K_[0,1] )
//! E_2(x) = tr_{W_1}( K_[1,2]* x K_[1,2] )
//! φ^(1)(a) = tr_{W_2}( h_2 · E_2(Ê(a) ⊗ 1) )
//! ```
//!
//! Both maps have the form `x ↦ tr_C(B x B*)`, so they are completely
//! positive; [`ConjugationTrace::choi`] exposes the Choi matrix for checking.

use alloc::vec::Vec;

use nalgebra::DMatrix;

use super::dense::{build_density, build_level_coupler};
use super::observable::ProductObservable;
use crate::boundary::BoundaryCondition;
use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigenvalues, sqrt_psd2, Mat2, SiteOperator, C64};
use crate::model::{check_beta, k_edge, pauli, Axis};
use crate::tree::{ball, level_set, successors, Vertex};

/// `x ↦ tr_{input \ keep}(B x B*)` with the normalized partial trace.
#[derive(Clone, Debug)]
pub struct ConjugationTrace {
    b: SiteOperator,
    keep: Vec<Vertex>,
}

impl ConjugationTrace {
    pub fn new(b: SiteOperator, keep: Vec<Vertex>) -> Result<Self> {
        if let Some(x) = keep.iter().find(|x| !b.sites().contains(x)) {
            return Err(Error::MissingSite(alloc::string::ToString::to_string(x)));
        }
        Ok(ConjugationTrace { b, keep })
    }

    pub fn input(&self) -> &[Vertex] {
        self.b.sites()
    }

    pub fn keep(&self) -> &[Vertex] {
        &self.keep
    }

    pub fn apply(&self, x: &SiteOperator) -> Result<SiteOperator> {
        let x = x.embed(self.b.sites())?;
        self.b
            .product(&x)?
            .product(&self.b.adjoint())?
            .normalized_partial_trace(&self.keep)
    }

    /// `Σ_{ij} E_ij ⊗ Φ(E_ij)`, built column by column from `Φ(E_ij) = tr_C(b_i b_j*)`.
    pub fn choi(&self) -> Result<DMatrix<C64>> {
        let din = self.b.dim();
        let dout = 1usize << self.keep.len();
        let mut out = DMatrix::from_element(din * dout, din * dout, C64::new(0.0, 0.0));
        let bm = self.b.matrix();
        for i in 0..din {
            for j in 0..din {
                let outer = DMatrix::from_fn(din, din, |r, c| bm[(r, i)] * bm[(c, j)].conj());
                let image = SiteOperator::new(self.b.sites().to_vec(), outer)?
                    .normalized_partial_trace(&self.keep)?;
                out.view_mut((i * dout, j * dout), (dout, dout))
                    .copy_from(image.matrix());
            }
        }
        Ok(out)
    }

    pub fn choi_spectrum(&self) -> Result<ChoiSpectrum> {
        let eig = hermitian_eigenvalues(&self.choi()?);
        Ok(ChoiSpectrum {
            min: eig[0],
            max: eig[eig.len() - 1],
        })
    }
}

/// Extreme eigenvalues of a Choi matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChoiSpectrum {
    pub min: f64,
    pub max: f64,
}

impl ChoiSpectrum {
    /// `min / max`, the smallest eigenvalue of the Choi matrix scaled to unit norm.
    pub fn relative_min(&self) -> f64 {
        self.min / self.max.abs().max(f64::MIN_POSITIVE)
    }
}

fn coupler_on_sites(m: usize, beta: f64, sites: &[Vertex]) -> Result<SiteOperator> {
    let mut out = SiteOperator::identity(sites.to_vec())?;
    for x in level_set(m - 1, 2).forward() {
        for y in successors(x, 2) {
            out = out.product(&k_edge(x, &y, beta)?.into_operator().embed(sites)?)?;
        }
    }
    Ok(out)
}

fn tensor_level(m: &Mat2, n: usize) -> Result<SiteOperator> {
    let sites = level_set(n, 2).into_vec();
    let mut out = SiteOperator::identity(sites.clone())?;
    for x in &sites {
        out = out.product(&SiteOperator::single(x.clone(), m).embed(&sites)?)?;
    }
    Ok(out)
}

/// Checks gathered by [`QuasiConditionalWindow::report`].
#[derive(Clone, Debug, PartialEq)]
pub struct QuasiConditionalReport {
    /// Choi spectrum of `Ê` on `Λ_1 → W_1`.
    pub hat_choi: ChoiSpectrum,
    /// Choi spectrum of `E_2` on `W_1 ∪ W_2 → W_2`.
    pub e2_choi: Option<ChoiSpectrum>,
    /// `‖Ê(c a) - c Ê(a)‖_F` for `c = σx` at vertex `1.1`.
    pub module_residual: Option<f64>,
    /// `|tr(h_1 Ê(1)) - tr(W_0])|`.
    pub identity_residual: f64,
    /// Largest `|tr_{W_2}(h_2 E_2(Ê(a))) - tr(W_2](a ⊗ 1))|` over the probes.
    pub chain_residual: Option<f64>,
}

/// `Ê` and `E_2` materialized on `Λ_{n_window}`.
#[derive(Clone, Debug)]
pub struct QuasiConditionalWindow {
    n_window: usize,
    beta: f64,
    bc: BoundaryCondition,
    hat: ConjugationTrace,
    e2: Option<ConjugationTrace>,
}

impl QuasiConditionalWindow {
    pub fn new(n_window: usize, beta: f64, bc: &BoundaryCondition) -> Result<Self> {
        check_beta(beta)?;
        if !(1..=2).contains(&n_window) {
            return Err(Error::Infeasible {
                sites: ball(n_window, 2).len(),
                limit: ball(2, 2).len(),
            });
        }
        let window = ball(n_window, 2);
        let root_sqrt = SiteOperator::single(Vertex::root(), &sqrt_psd2(bc.w0())?).embed(&window)?;
        let k01 = coupler_on_sites(1, beta, &window)?;
        let hat = ConjugationTrace::new(k01.adjoint().product(&root_sqrt)?, window[1..].to_vec())?;
        let e2 = if n_window == 2 {
            let sites = window[1..].to_vec();
            let k12 = coupler_on_sites(2, beta, &sites)?;
            Some(ConjugationTrace::new(k12.adjoint(), level_set(2, 2).into_vec())?)
        } else {
            None
        };
        Ok(QuasiConditionalWindow {
            n_window,
            beta,
            bc: bc.clone(),
            hat,
            e2,
        })
    }

    pub fn hat(&self) -> &ConjugationTrace {
        &self.hat
    }

    pub fn e2(&self) -> Option<&ConjugationTrace> {
        self.e2.as_ref()
    }

    /// `tr_{W_2}(h_2 · E_2(Ê(a)))` for `a` supported in `Λ_1`.
    pub fn chain(&self, obs: &ProductObservable) -> Result<C64> {
        let e2 = self.e2.as_ref().ok_or(Error::Infeasible {
            sites: ball(self.n_window, 2).len(),
            limit: ball(2, 2).len(),
        })?;
        obs.check_support(1)?;
        let a = obs.to_operator(&ball(1, 2))?;
        let reduced = e2.apply(&self.hat.apply(&a)?)?;
        let h2 = tensor_level(self.bc.h(2)?, 2)?;
        Ok(h2.product(&reduced)?.normalized_trace())
    }

    pub fn report(&self, probes: &[ProductObservable]) -> Result<QuasiConditionalReport> {
        let lambda1 = ball(1, 2);
        let hat_small = {
            let root_sqrt = SiteOperator::single(Vertex::root(), &sqrt_psd2(self.bc.w0())?).embed(&lambda1)?;
            let k01 = build_level_coupler(1, self.beta, 2)?;
            ConjugationTrace::new(k01.adjoint().product(&root_sqrt)?, lambda1[1..].to_vec())?
        };
        let hat_choi = hat_small.choi_spectrum()?;
        let e2_choi = self.e2.as_ref().map(ConjugationTrace::choi_spectrum).transpose()?;

        let window = ball(self.n_window, 2);
        let module_residual = if self.n_window == 2 {
            let c = SiteOperator::single("1.1".parse()?, &pauli(Axis::X)).embed(&window)?;
            let a = probe_operator(probes, &window)?;
            let left = self.hat.apply(&c.product(&a)?)?;
            let c_out = c.normalized_partial_trace(&window[1..])?;
            let right = c_out.product(&self.hat.apply(&a)?)?;
            Some(left.distance(&right)?)
        } else {
            None
        };

        let hat_id = hat_small.apply(&SiteOperator::identity(lambda1.clone())?)?;
        let h1 = tensor_level(self.bc.h(1)?, 1)?;
        let lhs = h1.product(&hat_id)?.normalized_trace();
        let rhs = build_density(0, self.beta, &self.bc)?.operator.normalized_trace();
        let identity_residual = (lhs - rhs).norm();

        let chain_residual = if self.e2.is_some() {
            let w2 = build_density(2, self.beta, &self.bc)?.operator;
            let mut worst: f64 = 0.0;
            for obs in probes {
                let direct = {
                    let a = obs.to_operator(w2.sites())?;
                    (w2.matrix() * a.matrix()).trace() / w2.dim() as f64
                };
                worst = worst.max((self.chain(obs)? - direct).norm());
            }
            Some(worst)
        } else {
            None
        };

        Ok(QuasiConditionalReport {
            hat_choi,
            e2_choi,
            module_residual,
            identity_residual,
            chain_residual,
        })
    }
}

/// First probe as an operator on `sites`, or `σz` at the root if none.
fn probe_operator(probes: &[ProductObservable], sites: &[Vertex]) -> Result<SiteOperator> {
    match probes.first() {
        Some(obs) => obs.to_operator(sites),
        None => ProductObservable::single(Vertex::root(), pauli(Axis::Z)).to_operator(sites),
    }
}
