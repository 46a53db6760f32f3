//! Leaf-to-root contraction of `φ^(n)` with 2x2 messages.
//!
//! For a product term `⊗_x a_x` the message of a vertex `u` below level `n` is
//!
//! ```text
//! m_u = tr_{y,z}( P (1 ⊗ m_y ⊗ m_z) P* (1 ⊗ a_y ⊗ a_z) ),   P = K_<u,y> K_<u,z>
//! ```
//!
//! with `m_x = h^(n)` on `W_n`, and the value is
//! `½ Tr(w₀^{1/2} m_root w₀^{1/2} a_root)`. Subtrees carrying no factor share
//! one message per level.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::SMatrix;

use super::observable::{ProductObservable, ProductTerm};
use super::{resolve_evaluation, Evaluation, TRANSFER_MAX_LEVEL};
use crate::boundary::BoundaryCondition;
use crate::error::{Error, Result};
use crate::linalg::{sqrt_psd2, Mat2, C64};
use crate::model::{check_beta, k_edge_matrix};
use crate::tree::{ball, Vertex};

type Mat8 = SMatrix<C64, 8, 8>;

/// Message arriving at `vertex` from its subtree.
#[derive(Clone, Debug, PartialEq)]
pub struct TransferMessage {
    pub vertex: Vertex,
    pub matrix: Mat2,
}

/// `1 ⊗ a ⊗ b` on legs `(u, y, z)`.
fn children_product(a: &Mat2, b: &Mat2) -> Mat8 {
    Mat8::from_fn(|r, c| {
        if (r >> 2) != (c >> 2) {
            return C64::new(0.0, 0.0);
        }
        a[((r >> 1) & 1, (c >> 1) & 1)] * b[(r & 1, c & 1)]
    })
}

/// `K_<u,y> K_<u,z>` on legs `(u, y, z)`, assembled from the 4x4 edge block.
fn pair_kernel(beta: f64) -> Mat8 {
    let k = k_edge_matrix(beta);
    let k_uy = Mat8::from_fn(|r, c| {
        if (r & 1) != (c & 1) {
            return C64::new(0.0, 0.0);
        }
        k[(r >> 1, c >> 1)]
    });
    let k_uz = Mat8::from_fn(|r, c| {
        if ((r >> 1) & 1) != ((c >> 1) & 1) {
            return C64::new(0.0, 0.0);
        }
        let (ru, rz) = (r >> 2, r & 1);
        let (cu, cz) = (c >> 2, c & 1);
        k[((ru << 1) | rz, (cu << 1) | cz)]
    });
    k_uy * k_uz
}

/// Per-`β`, per-boundary-condition message-passing evaluator.
#[derive(Clone, Debug)]
pub struct TransferEngine {
    beta: f64,
    pair: Mat8,
    pair_adjoint: Mat8,
    w0_sqrt: Mat2,
    bc: BoundaryCondition,
}

impl TransferEngine {
    pub fn new(beta: f64, bc: &BoundaryCondition) -> Result<Self> {
        check_beta(beta)?;
        let pair = pair_kernel(beta);
        Ok(TransferEngine {
            beta,
            pair,
            pair_adjoint: pair.adjoint(),
            w0_sqrt: sqrt_psd2(bc.w0())?,
            bc: bc.clone(),
        })
    }

    /// Parent message from two child messages and the children's factors.
    pub fn combine(&self, m_y: &Mat2, m_z: &Mat2, a_y: &Mat2, a_z: &Mat2) -> Mat2 {
        let inner = self.pair * children_product(m_y, m_z) * self.pair_adjoint;
        let full = inner * children_product(a_y, a_z);
        Mat2::from_fn(|i, j| {
            (0..4)
                .map(|s| full[((i << 2) | s, (j << 2) | s)])
                .sum::<C64>()
                * 0.25
        })
    }

    fn close(&self, m_root: &Mat2, a_root: &Mat2) -> C64 {
        (self.w0_sqrt * m_root * self.w0_sqrt * a_root).trace() * 0.5
    }

    fn check_level(&self, n: usize) -> Result<()> {
        if n > TRANSFER_MAX_LEVEL {
            return Err(Error::LevelTooDeep {
                n,
                limit: TRANSFER_MAX_LEVEL,
            });
        }
        Ok(())
    }

    /// Messages of factor-free subtrees rooted at levels `0..=n`.
    fn identity_messages(&self, n: usize) -> Result<Vec<Mat2>> {
        let id = Mat2::identity();
        let mut out = vec![Mat2::zeros(); n + 1];
        out[n] = *self.bc.h(n)?;
        for l in (0..n).rev() {
            out[l] = self.combine(&out[l + 1], &out[l + 1], &id, &id);
        }
        Ok(out)
    }

    fn message(&self, u: &Vertex, term: &ProductTerm, n: usize, ident: &[Mat2]) -> Mat2 {
        let level = u.level();
        let below = term
            .factors
            .keys()
            .any(|x| x.level() > level && x.digits().starts_with(u.digits()));
        if level == n || !below {
            return ident[level];
        }
        let id = Mat2::identity();
        let (y, z) = (u.child(1), u.child(2));
        let m_y = self.message(&y, term, n, ident);
        let m_z = self.message(&z, term, n, ident);
        let a_y = term.factor(&y).unwrap_or(&id);
        let a_z = term.factor(&z).unwrap_or(&id);
        self.combine(&m_y, &m_z, a_y, a_z)
    }

    /// `½ Tr(w₀^{1/2} m_root w₀^{1/2} a_root)` for one product term on `Λ_n`,
    /// without the coefficient.
    pub fn term_value(&self, term: &ProductTerm, n: usize) -> Result<C64> {
        let ident = self.identity_messages(n)?;
        let root = Vertex::root();
        let m_root = self.message(&root, term, n, &ident);
        let id = Mat2::identity();
        Ok(self.close(&m_root, term.factor(&root).unwrap_or(&id)))
    }

    /// Every message on `Λ_n` for `term`, in `Λ_n` order, computed without
    /// sharing.
    pub fn messages(&self, term: &ProductTerm, n: usize) -> Result<Vec<TransferMessage>> {
        self.check_level(n)?;
        let sites = ball(n, 2);
        let mut matrices = vec![Mat2::zeros(); sites.len()];
        let id = Mat2::identity();
        let h = *self.bc.h(n)?;
        for (i, x) in sites.iter().enumerate().rev() {
            matrices[i] = if x.level() == n {
                h
            } else {
                let (cy, cz) = (2 * i + 1, 2 * i + 2);
                let a_y = term.factor(&sites[cy]).unwrap_or(&id);
                let a_z = term.factor(&sites[cz]).unwrap_or(&id);
                self.combine(&matrices[cy], &matrices[cz], a_y, a_z)
            };
        }
        Ok(sites
            .into_iter()
            .zip(matrices)
            .map(|(vertex, matrix)| TransferMessage { vertex, matrix })
            .collect())
    }

    /// `φ^(n)(obs)` summed over terms.
    pub fn expectation(&self, obs: &ProductObservable, n: usize, evaluation: Evaluation) -> Result<C64> {
        self.check_level(n)?;
        obs.check_support(n)?;
        let volume = match resolve_evaluation(evaluation, &self.bc, self.beta, n)? {
            Evaluation::Padded => n + 1,
            _ => n,
        };
        let mut total = C64::new(0.0, 0.0);
        for term in obs.terms() {
            total += term.coeff * self.term_value(term, volume)?;
        }
        Ok(total)
    }
}

/// `φ^(n)(obs)` with the transfer engine and automatic evaluation form.
pub fn expectation_transfer(
    obs: &ProductObservable,
    n: usize,
    beta: f64,
    bc: &BoundaryCondition,
) -> Result<C64> {
    TransferEngine::new(beta, bc)?.expectation(obs, n, Evaluation::Auto)
}
