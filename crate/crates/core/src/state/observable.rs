use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::{Mat2, SiteOperator, C64};
use crate::tree::Vertex;

/// `coeff · ⊗_x a_x`, identity on every vertex without a factor.
#[derive(Clone, Debug, PartialEq)]
pub struct ProductTerm {
    pub coeff: C64,
    pub factors: BTreeMap<Vertex, Mat2>,
}

impl ProductTerm {
    pub fn identity() -> Self {
        ProductTerm {
            coeff: C64::new(1.0, 0.0),
            factors: BTreeMap::new(),
        }
    }

    pub fn new(coeff: C64, factors: impl IntoIterator<Item = (Vertex, Mat2)>) -> Self {
        ProductTerm {
            coeff,
            factors: factors.into_iter().collect(),
        }
    }

    /// Deepest level carrying a factor; 0 for the identity.
    pub fn support_level(&self) -> usize {
        self.factors.keys().map(Vertex::level).max().unwrap_or(0)
    }

    pub fn factor(&self, x: &Vertex) -> Option<&Mat2> {
        self.factors.get(x)
    }

    pub fn adjoint(&self) -> Self {
        ProductTerm {
            coeff: self.coeff.conj(),
            factors: self
                .factors
                .iter()
                .map(|(x, m)| (x.clone(), m.adjoint()))
                .collect(),
        }
    }
}

/// A linear combination of product terms.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ProductObservable {
    terms: Vec<ProductTerm>,
}

impl ProductObservable {
    pub fn identity() -> Self {
        ProductObservable {
            terms: alloc::vec![ProductTerm::identity()],
        }
    }

    pub fn single(x: Vertex, m: Mat2) -> Self {
        Self::product(C64::new(1.0, 0.0), [(x, m)])
    }

    pub fn product(coeff: C64, factors: impl IntoIterator<Item = (Vertex, Mat2)>) -> Self {
        ProductObservable {
            terms: alloc::vec![ProductTerm::new(coeff, factors)],
        }
    }

    pub fn from_terms(terms: Vec<ProductTerm>) -> Self {
        ProductObservable { terms }
    }

    pub fn push(&mut self, term: ProductTerm) {
        self.terms.push(term);
    }

    pub fn terms(&self) -> &[ProductTerm] {
        &self.terms
    }

    pub fn support_level(&self) -> usize {
        self.terms
            .iter()
            .map(ProductTerm::support_level)
            .max()
            .unwrap_or(0)
    }

    pub fn adjoint(&self) -> Self {
        ProductObservable {
            terms: self.terms.iter().map(ProductTerm::adjoint).collect(),
        }
    }

    pub(crate) fn check_support(&self, n: usize) -> Result<()> {
        let level = self.support_level();
        if level > n {
            return Err(Error::SupportExceedsVolume { level, n });
        }
        Ok(())
    }

    /// Dense matrix of the observable on `sites`.
    pub fn to_operator(&self, sites: &[Vertex]) -> Result<SiteOperator> {
        let d = 1usize << sites.len();
        let mut total = nalgebra::DMatrix::from_element(d, d, C64::new(0.0, 0.0));
        for term in &self.terms {
            if let Some(x) = term.factors.keys().find(|x| !sites.contains(x)) {
                return Err(Error::MissingSite(alloc::string::ToString::to_string(x)));
            }
            let mut m = nalgebra::DMatrix::from_element(1, 1, term.coeff);
            for x in sites {
                let local = term.factors.get(x).copied().unwrap_or_else(Mat2::identity);
                m = m.kronecker(&local);
            }
            total += m;
        }
        SiteOperator::new(sites.to_vec(), total)
    }
}

impl From<ProductTerm> for ProductObservable {
    fn from(term: ProductTerm) -> Self {
        ProductObservable {
            terms: alloc::vec![term],
        }
    }
}
