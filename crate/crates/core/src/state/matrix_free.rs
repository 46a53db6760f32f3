//! Padded-trace evaluation without materializing `W_{n+1]}`.
//!
//! `tr(W_{n+1]} (a ⊗ 1)) = 2^{-N} Σ_j ⟨K e_j, (a ⊗ 1) K e_j⟩` where
//! `K = K_{n+1}` and `N = |Λ_{n+1}|`. Each `K e_j` is formed by applying the
//! local factors of `K` right to left to a state vector.

use alloc::vec;
use alloc::vec::Vec;
use core::ops::Range;

use super::observable::{ProductObservable, ProductTerm};
use super::MATRIX_FREE_MAX_SITES;
use crate::boundary::BoundaryCondition;
use crate::error::{Error, Result};
use crate::linalg::{sqrt_psd2, Mat2, C64};
use crate::model::{check_beta, k_edge_matrix, Mat4};
use crate::tree::{ball, level_set, successors, Vertex};

#[derive(Clone, Debug)]
enum Local {
    One { bit: usize, m: Mat2 },
    Two { hi: usize, lo: usize, m: Mat4 },
}

fn apply_one(v: &mut [C64], bit: usize, m: &Mat2) {
    for i in 0..v.len() {
        if i & bit == 0 {
            let (a, b) = (v[i], v[i | bit]);
            v[i] = m[(0, 0)] * a + m[(0, 1)] * b;
            v[i | bit] = m[(1, 0)] * a + m[(1, 1)] * b;
        }
    }
}

/// `m` on legs `(first, second)` where `first` is the more significant leg
/// of the 4x4 block.
fn apply_two(v: &mut [C64], first: usize, second: usize, m: &Mat4) {
    let mask = first | second;
    for i in 0..v.len() {
        if i & mask == 0 {
            let idx = [i, i | second, i | first, i | first | second];
            let old = idx.map(|k| v[k]);
            for (r, &k) in idx.iter().enumerate() {
                v[k] = (0..4).map(|c| m[(r, c)] * old[c]).sum();
            }
        }
    }
}

impl Local {
    fn apply(&self, v: &mut [C64]) {
        match self {
            Local::One { bit, m } => apply_one(v, *bit, m),
            Local::Two { hi, lo, m } => apply_two(v, *hi, *lo, m),
        }
    }
}

/// Evaluator of `φ^(n)` in padded form on `Λ_{n+1}` for up to 15 sites.
#[derive(Clone, Debug)]
pub struct PaddedTraceOracle {
    sites: Vec<Vertex>,
    /// Factors of `K`, in the order they act on a vector.
    factors: Vec<Local>,
}

impl PaddedTraceOracle {
    pub fn new(n: usize, beta: f64, bc: &BoundaryCondition) -> Result<Self> {
        check_beta(beta)?;
        let sites = ball(n + 1, 2);
        if sites.len() > MATRIX_FREE_MAX_SITES {
            return Err(Error::Infeasible {
                sites: sites.len(),
                limit: MATRIX_FREE_MAX_SITES,
            });
        }
        let total = sites.len();
        let bit_of = |x: &Vertex| {
            let p = sites.iter().position(|s| s == x).expect("vertex in volume");
            1usize << (total - 1 - p)
        };

        let mut factors = Vec::new();
        let h_sqrt = sqrt_psd2(bc.h(n + 1)?)?;
        for x in level_set(n + 1, 2).forward() {
            factors.push(Local::One {
                bit: bit_of(x),
                m: h_sqrt,
            });
        }
        let k = k_edge_matrix(beta);
        for m in (1..=n + 1).rev() {
            let mut edges = Vec::new();
            for x in level_set(m - 1, 2).forward() {
                for y in successors(x, 2) {
                    edges.push(Local::Two {
                        hi: bit_of(x),
                        lo: bit_of(&y),
                        m: k,
                    });
                }
            }
            factors.extend(edges.into_iter().rev());
        }
        factors.push(Local::One {
            bit: bit_of(&Vertex::root()),
            m: sqrt_psd2(bc.w0())?,
        });
        Ok(PaddedTraceOracle { sites, factors })
    }

    pub fn sites(&self) -> &[Vertex] {
        &self.sites
    }

    pub fn dim(&self) -> usize {
        1 << self.sites.len()
    }

    fn bit_of(&self, x: &Vertex) -> Result<usize> {
        let p = self
            .sites
            .iter()
            .position(|s| s == x)
            .ok_or_else(|| Error::MissingSite(alloc::string::ToString::to_string(x)))?;
        Ok(1usize << (self.sites.len() - 1 - p))
    }

    fn term_locals(&self, term: &ProductTerm) -> Result<Vec<Local>> {
        term.factors
            .iter()
            .map(|(x, m)| Ok(Local::One { bit: self.bit_of(x)?, m: *m }))
            .collect()
    }

    /// `Σ_{j ∈ range} ⟨K e_j, a K e_j⟩`, unnormalized.
    pub fn partial_sum(&self, obs: &ProductObservable, range: Range<usize>) -> Result<C64> {
        Ok(self.partial_sums(core::slice::from_ref(obs), range)?[0])
    }

    /// [`Self::partial_sum`] for several observables sharing each `K e_j`.
    pub fn partial_sums(&self, observables: &[ProductObservable], range: Range<usize>) -> Result<Vec<C64>> {
        let mut terms = Vec::new();
        for (i, obs) in observables.iter().enumerate() {
            for t in obs.terms() {
                terms.push((i, t.coeff, self.term_locals(t)?));
            }
        }
        let d = self.dim();
        let mut v = vec![C64::new(0.0, 0.0); d];
        let mut w = vec![C64::new(0.0, 0.0); d];
        let mut totals = vec![C64::new(0.0, 0.0); observables.len()];
        for j in range.start..range.end.min(d) {
            v.iter_mut().for_each(|c| *c = C64::new(0.0, 0.0));
            v[j] = C64::new(1.0, 0.0);
            for f in &self.factors {
                f.apply(&mut v);
            }
            for (i, coeff, locals) in &terms {
                w.copy_from_slice(&v);
                for f in locals {
                    f.apply(&mut w);
                }
                let inner: C64 = v.iter().zip(&w).map(|(a, b)| a.conj() * b).sum();
                totals[*i] += coeff * inner;
            }
        }
        Ok(totals)
    }

    pub fn expectation(&self, obs: &ProductObservable) -> Result<C64> {
        Ok(self.partial_sum(obs, 0..self.dim())? / self.dim() as f64)
    }
}
