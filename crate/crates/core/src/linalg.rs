//! Dense operators on labeled collections of qubit sites.
//!
//! Leg order is big-endian: the first site of an operator's site list is the
//! most significant bit of the computational-basis index. Every routine that
//! reorders legs (`tensor`, `embed`, `normalized_partial_trace`) keeps that
//! convention, so a [`SiteOperator`] can be moved between site lists without
//! ambiguity.

use alloc::vec::Vec;
use alloc::string::ToString;

use nalgebra::{DMatrix, Matrix2};
use nalgebra::linalg::SymmetricEigen;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::tree::Vertex;

pub type C64 = Complex64;
pub type Mat2 = Matrix2<C64>;

/// Default relative tolerance for hermiticity and positivity predicates.
pub const DEFAULT_TOL: f64 = 1e-10;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);

/// A `2^m x 2^m` complex matrix acting on an ordered list of `m` sites.
#[derive(Clone, Debug, PartialEq)]
pub struct SiteOperator {
    sites: Vec<Vertex>,
    matrix: DMatrix<C64>,
}

impl SiteOperator {
    pub fn new(sites: Vec<Vertex>, matrix: DMatrix<C64>) -> Result<Self> {
        check_distinct(&sites)?;
        let expected = 1usize << sites.len();
        if matrix.nrows() != expected || matrix.ncols() != expected {
            return Err(Error::DimensionMismatch {
                rows: matrix.nrows(),
                cols: matrix.ncols(),
                expected,
            });
        }
        Ok(SiteOperator { sites, matrix })
    }

    pub fn identity(sites: Vec<Vertex>) -> Result<Self> {
        let d = 1usize << sites.len();
        Self::new(sites, DMatrix::identity(d, d))
    }

    pub fn single(site: Vertex, m: &Mat2) -> Self {
        let matrix = DMatrix::from_fn(2, 2, |i, j| m[(i, j)]);
        SiteOperator { sites: alloc::vec![site], matrix }
    }

    pub fn sites(&self) -> &[Vertex] {
        &self.sites
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// The 2x2 block of a single-site operator.
    pub fn to_mat2(&self) -> Option<Mat2> {
        (self.sites.len() == 1).then(|| Mat2::from_fn(|i, j| self.matrix[(i, j)]))
    }

    pub fn adjoint(&self) -> Self {
        SiteOperator {
            sites: self.sites.clone(),
            matrix: self.matrix.adjoint(),
        }
    }

    pub fn scale(&self, factor: C64) -> Self {
        SiteOperator {
            sites: self.sites.clone(),
            matrix: &self.matrix * factor,
        }
    }

    /// Matrix product; both operands must use the same site list.
    pub fn product(&self, rhs: &SiteOperator) -> Result<Self> {
        if self.sites != rhs.sites {
            return Err(Error::SiteListMismatch);
        }
        Ok(SiteOperator {
            sites: self.sites.clone(),
            matrix: &self.matrix * &rhs.matrix,
        })
    }

    pub fn sum(&self, rhs: &SiteOperator) -> Result<Self> {
        if self.sites != rhs.sites {
            return Err(Error::SiteListMismatch);
        }
        Ok(SiteOperator {
            sites: self.sites.clone(),
            matrix: &self.matrix + &rhs.matrix,
        })
    }

    /// `self ⊗ rhs` on the concatenated site list.
    pub fn tensor(&self, rhs: &SiteOperator) -> Result<Self> {
        if let Some(shared) = self.sites.iter().find(|s| rhs.sites.contains(s)) {
            return Err(Error::OverlappingSites(shared.to_string()));
        }
        let mut sites = self.sites.clone();
        sites.extend(rhs.sites.iter().cloned());
        Ok(SiteOperator {
            sites,
            matrix: self.matrix.kronecker(&rhs.matrix),
        })
    }

    /// Tensor with identity on the sites of `target` that `self` lacks and
    /// permute legs into `target` order.
    pub fn embed(&self, target: &[Vertex]) -> Result<Self> {
        check_distinct(target)?;
        let n = target.len();
        let positions = positions_in(&self.sites, target)?;
        let source_masks: Vec<usize> = positions.iter().map(|&p| bit(n, p)).collect();
        let missing_mask = (0..n)
            .filter(|p| !positions.contains(p))
            .fold(0usize, |acc, p| acc | bit(n, p));

        let gather = |idx: usize| -> usize {
            source_masks
                .iter()
                .fold(0usize, |acc, &m| (acc << 1) | usize::from(idx & m != 0))
        };

        let d = 1usize << n;
        let local: Vec<usize> = (0..d).map(gather).collect();
        let mut matrix = DMatrix::from_element(d, d, ZERO);
        for c in 0..d {
            for r in 0..d {
                if (r ^ c) & missing_mask == 0 {
                    matrix[(r, c)] = self.matrix[(local[r], local[c])];
                }
            }
        }
        Ok(SiteOperator {
            sites: target.to_vec(),
            matrix,
        })
    }

    /// `Tr(M) / 2^{#sites}`.
    pub fn normalized_trace(&self) -> C64 {
        self.matrix.trace() / self.dim() as f64
    }

    /// Traces out every site not in `keep`, divides by the traced dimension,
    /// and returns the result on the site list `keep` (in that order).
    pub fn normalized_partial_trace(&self, keep: &[Vertex]) -> Result<Self> {
        check_distinct(keep)?;
        let n = self.sites.len();
        let keep_pos = positions_in(keep, &self.sites)?;
        let traced_pos: Vec<usize> = (0..n).filter(|p| !keep_pos.contains(p)).collect();

        let scatter = |positions: &[usize], local: usize| -> usize {
            let m = positions.len();
            positions.iter().enumerate().fold(0usize, |acc, (i, &p)| {
                if local & (1 << (m - 1 - i)) != 0 {
                    acc | bit(n, p)
                } else {
                    acc
                }
            })
        };
        let dk = 1usize << keep_pos.len();
        let dt = 1usize << traced_pos.len();
        let keep_idx: Vec<usize> = (0..dk).map(|i| scatter(&keep_pos, i)).collect();
        let traced_idx: Vec<usize> = (0..dt).map(|i| scatter(&traced_pos, i)).collect();

        let norm = 1.0 / dt as f64;
        let matrix = DMatrix::from_fn(dk, dk, |r, c| {
            let (kr, kc) = (keep_idx[r], keep_idx[c]);
            traced_idx
                .iter()
                .map(|&t| self.matrix[(kr | t, kc | t)])
                .sum::<C64>()
                * norm
        });
        Ok(SiteOperator {
            sites: keep.to_vec(),
            matrix,
        })
    }

    /// Largest entrywise deviation `|M - M*|`, relative to `max(1, ‖M‖_F)`.
    pub fn hermiticity_deviation(&self) -> f64 {
        hermiticity_deviation(&self.matrix)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_deviation() <= tol
    }

    /// Smallest eigenvalue of the Hermitian part.
    pub fn min_eigenvalue(&self) -> f64 {
        min_eigenvalue(&self.matrix)
    }

    /// Hermitian with every eigenvalue `>= -tol * ‖M‖_F`.
    pub fn is_positive(&self, tol: f64) -> bool {
        self.is_hermitian(tol) && self.min_eigenvalue() >= -tol * self.matrix.norm()
    }

    /// `exp(scale * M)` for Hermitian `M`, via eigendecomposition.
    pub fn expm_hermitian(&self, scale: f64) -> Result<Self> {
        self.expm_hermitian_tol(scale, DEFAULT_TOL)
    }

    pub fn expm_hermitian_tol(&self, scale: f64, tol: f64) -> Result<Self> {
        let matrix = hermitian_function(&self.matrix, tol, |x| libm::exp(scale * x))?;
        Ok(SiteOperator {
            sites: self.sites.clone(),
            matrix,
        })
    }

    /// Frobenius norm of `self - rhs` after aligning `rhs` to this site list.
    pub fn distance(&self, rhs: &SiteOperator) -> Result<f64> {
        let aligned = if rhs.sites == self.sites {
            rhs.clone()
        } else {
            if rhs.sites.len() != self.sites.len() {
                return Err(Error::SiteListMismatch);
            }
            rhs.embed(&self.sites)?
        };
        Ok((&self.matrix - &aligned.matrix).norm())
    }
}

fn bit(n: usize, position: usize) -> usize {
    1usize << (n - 1 - position)
}

fn check_distinct(sites: &[Vertex]) -> Result<()> {
    for (i, s) in sites.iter().enumerate() {
        if sites[..i].contains(s) {
            return Err(Error::DuplicateSite(s.to_string()));
        }
    }
    Ok(())
}

/// Position of each of `subset` inside `superset`.
fn positions_in(subset: &[Vertex], superset: &[Vertex]) -> Result<Vec<usize>> {
    subset
        .iter()
        .map(|s| {
            superset
                .iter()
                .position(|t| t == s)
                .ok_or_else(|| Error::MissingSite(s.to_string()))
        })
        .collect()
}

pub fn hermiticity_deviation(m: &DMatrix<C64>) -> f64 {
    let scale = m.norm().max(1.0);
    max_abs(&(m - m.adjoint())) / scale
}

fn max_abs<'a>(entries: impl IntoIterator<Item = &'a C64>) -> f64 {
    entries.into_iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Smallest eigenvalue of the Hermitian part of `m`.
pub fn min_eigenvalue(m: &DMatrix<C64>) -> f64 {
    let t = Tridiagonal::new(m);
    t.kth_eigenvalue(0)
}

/// Eigenvalues of the Hermitian part, ascending.
pub fn hermitian_eigenvalues(m: &DMatrix<C64>) -> Vec<f64> {
    let t = Tridiagonal::new(m);
    (0..t.diag.len()).map(|k| t.kth_eigenvalue(k)).collect()
}

/// Real symmetric tridiagonal form of a Hermitian matrix, kept as the
/// diagonal and the squared moduli of the off-diagonal.
struct Tridiagonal {
    diag: Vec<f64>,
    off_sq: Vec<f64>,
}

impl Tridiagonal {
    /// Householder reduction of `(m + m*)/2`.
    fn new(m: &DMatrix<C64>) -> Self {
        let n = m.nrows();
        let mut a = (m + m.adjoint()) * C64::new(0.5, 0.0);
        let mut off_sq = Vec::with_capacity(n.saturating_sub(1));
        for k in 0..n.saturating_sub(1) {
            let len = n - k - 1;
            let x: Vec<C64> = (0..len).map(|i| a[(k + 1 + i, k)]).collect();
            let norm = libm::sqrt(x.iter().map(|z| z.norm_sqr()).sum::<f64>());
            if len == 1 || norm == 0.0 {
                off_sq.push(norm * norm);
                continue;
            }
            let phase = if x[0].norm() == 0.0 { ONE } else { x[0] / x[0].norm() };
            let alpha = -phase * norm;
            let mut v = x;
            v[0] -= alpha;
            let v_norm = libm::sqrt(v.iter().map(|z| z.norm_sqr()).sum::<f64>());
            if v_norm == 0.0 {
                off_sq.push(norm * norm);
                continue;
            }
            v.iter_mut().for_each(|z| *z /= v_norm);

            let base = k + 1;
            let mut p = alloc::vec![ZERO; len];
            for (j, vj) in v.iter().enumerate() {
                for (i, pi) in p.iter_mut().enumerate() {
                    *pi += a[(base + i, base + j)] * vj;
                }
            }
            let kappa: C64 = v.iter().zip(&p).map(|(vi, pi)| vi.conj() * pi).sum();
            let q: Vec<C64> = p.iter().zip(&v).map(|(pi, vi)| pi - kappa * vi).collect();
            for j in 0..len {
                for i in 0..len {
                    a[(base + i, base + j)] -=
                        (v[i] * q[j].conj() + q[i] * v[j].conj()) * 2.0;
                }
            }
            off_sq.push(norm * norm);
        }
        let diag = (0..n).map(|i| a[(i, i)].re).collect();
        Tridiagonal { diag, off_sq }
    }

    /// Number of eigenvalues strictly below `x` (Sturm sequence).
    fn count_below(&self, x: f64) -> usize {
        let tiny = f64::MIN_POSITIVE / f64::EPSILON;
        let mut count = 0;
        let mut q = 1.0;
        for (i, &d) in self.diag.iter().enumerate() {
            let coupling = if i == 0 { 0.0 } else { self.off_sq[i - 1] / q };
            q = d - x - coupling;
            if q.abs() < tiny {
                q = -tiny;
            }
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// `k`-th smallest eigenvalue by bisection inside the Gershgorin interval.
    fn kth_eigenvalue(&self, k: usize) -> f64 {
        let n = self.diag.len();
        let radius = |i: usize| {
            let left = if i > 0 { libm::sqrt(self.off_sq[i - 1]) } else { 0.0 };
            let right = if i + 1 < n { libm::sqrt(self.off_sq[i]) } else { 0.0 };
            left + right
        };
        let mut lo = (0..n).map(|i| self.diag[i] - radius(i)).fold(f64::INFINITY, f64::min);
        let mut hi = (0..n).map(|i| self.diag[i] + radius(i)).fold(f64::NEG_INFINITY, f64::max);
        let scale = lo.abs().max(hi.abs());
        lo -= f64::EPSILON * scale + f64::MIN_POSITIVE;
        hi += f64::EPSILON * scale + f64::MIN_POSITIVE;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi || hi - lo <= 2.0 * f64::EPSILON * scale {
                break;
            }
            if self.count_below(mid) > k {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }
}

/// `f(M)` for Hermitian `M` through its spectral decomposition.
pub fn hermitian_function(
    m: &DMatrix<C64>,
    tol: f64,
    f: impl Fn(f64) -> f64,
) -> Result<DMatrix<C64>> {
    let deviation = hermiticity_deviation(m);
    if deviation > tol {
        return Err(Error::NotHermitian { deviation });
    }
    let herm = (m + m.adjoint()) * C64::new(0.5, 0.0);
    let eig = SymmetricEigen::new(herm);
    let v = &eig.eigenvectors;
    let mut scaled = v.clone();
    for (j, &lambda) in eig.eigenvalues.iter().enumerate() {
        let mut column = scaled.column_mut(j);
        column *= C64::new(f(lambda), 0.0);
    }
    Ok(scaled * v.adjoint())
}

/// Positive square root of a positive semidefinite 2x2 matrix.
pub fn sqrt_psd2(m: &Mat2) -> Result<Mat2> {
    let dense = DMatrix::from_fn(2, 2, |i, j| m[(i, j)]);
    let min = min_eigenvalue(&dense);
    if min < -DEFAULT_TOL * dense.norm().max(1.0) {
        return Err(Error::NotPositive { min_eigenvalue: min });
    }
    let root = hermitian_function(&dense, DEFAULT_TOL, |x| libm::sqrt(x.max(0.0)))?;
    Ok(Mat2::from_fn(|i, j| root[(i, j)]))
}

/// Positive definiteness of a 2x2 matrix: Hermitian, positive trace and determinant.
pub fn is_positive_definite2(m: &Mat2, tol: f64) -> bool {
    let scale = m.norm().max(1.0);
    let herm = max_abs(&(m - m.adjoint())) / scale <= tol;
    let tr = (m[(0, 0)] + m[(1, 1)]).re;
    let det = (m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)]).re;
    herm && tr > 0.0 && det > 0.0
}
