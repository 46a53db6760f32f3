//! XY-model operators: Pauli matrices, the edge Hamiltonian
//! `H = (σx⊗σx + σy⊗σy) / 2` and the edge operator `K = exp(βH)`.

use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, Matrix4};

use crate::error::{Error, Result};
use crate::linalg::{Mat2, SiteOperator, C64, ONE, ZERO};
use crate::tree::Vertex;

pub type Mat4 = Matrix4<C64>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];
}

pub fn pauli(axis: Axis) -> Mat2 {
    let i = C64::new(0.0, 1.0);
    match axis {
        Axis::X => Mat2::new(ZERO, ONE, ONE, ZERO),
        Axis::Y => Mat2::new(ZERO, -i, i, ZERO),
        Axis::Z => Mat2::new(ONE, ZERO, ZERO, -ONE),
    }
}

fn kron2(a: &Mat2, b: &Mat2) -> Mat4 {
    Mat4::from_fn(|r, c| a[(r >> 1, c >> 1)] * b[(r & 1, c & 1)])
}

/// The 4x4 exchange Hamiltonian in the `(u, v)` leg order.
pub fn h_edge_matrix() -> Mat4 {
    let xx = kron2(&pauli(Axis::X), &pauli(Axis::X));
    let yy = kron2(&pauli(Axis::Y), &pauli(Axis::Y));
    (xx + yy) * C64::new(0.5, 0.0)
}

/// `I + sinh β H + (cosh β - 1) H²`.
pub fn k_edge_matrix(beta: f64) -> Mat4 {
    let h = h_edge_matrix();
    let h2 = h * h;
    Mat4::identity() + h * C64::new(libm::sinh(beta), 0.0)
        + h2 * C64::new(libm::cosh(beta) - 1.0, 0.0)
}

fn to_dense(m: &Mat4) -> DMatrix<C64> {
    DMatrix::from_fn(4, 4, |i, j| m[(i, j)])
}

pub fn h_edge(u: &Vertex, v: &Vertex) -> Result<SiteOperator> {
    if u == v {
        return Err(Error::SameSite(u.to_string()));
    }
    SiteOperator::new(vec![u.clone(), v.clone()], to_dense(&h_edge_matrix()))
}

/// `K_{<u,v>} = exp(β H_{<u,v>})` in closed form.
#[derive(Clone, Debug, PartialEq)]
pub struct EdgeOperator {
    beta: f64,
    op: SiteOperator,
}

impl EdgeOperator {
    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn u(&self) -> &Vertex {
        &self.op.sites()[0]
    }

    pub fn v(&self) -> &Vertex {
        &self.op.sites()[1]
    }

    pub fn operator(&self) -> &SiteOperator {
        &self.op
    }

    pub fn into_operator(self) -> SiteOperator {
        self.op
    }
}

pub fn k_edge(u: &Vertex, v: &Vertex, beta: f64) -> Result<EdgeOperator> {
    check_beta(beta)?;
    if u == v {
        return Err(Error::SameSite(u.to_string()));
    }
    let op = SiteOperator::new(vec![u.clone(), v.clone()], to_dense(&k_edge_matrix(beta)))?;
    Ok(EdgeOperator { beta, op })
}

pub(crate) fn check_beta(beta: f64) -> Result<()> {
    if beta > 0.0 && beta.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name: "beta",
            value: beta,
        })
    }
}

/// Residuals of `H^{2m} = H²`, `H^{2m-1} = H`, and of closed-form `K` against
/// the spectral exponential.
#[derive(Clone, Debug, PartialEq)]
pub struct PowerIdentityReport {
    /// `(m, ‖H^{2m} - H²‖, ‖H^{2m-1} - H‖)` in Frobenius norm.
    pub powers: Vec<(u32, f64, f64)>,
    /// `(β, ‖closed form - expm(βH)‖)`.
    pub closed_form: Vec<(f64, f64)>,
    /// `‖H² - (I - σz⊗σz)/2‖`.
    pub square_form: f64,
}

impl PowerIdentityReport {
    pub fn max_power_residual(&self) -> f64 {
        self.powers
            .iter()
            .map(|&(_, even, odd)| even.max(odd))
            .fold(0.0, f64::max)
    }

    pub fn max_closed_form_residual(&self) -> f64 {
        self.closed_form.iter().map(|&(_, r)| r).fold(0.0, f64::max)
    }

    pub fn holds(&self, tol: f64) -> bool {
        self.max_power_residual() <= tol
            && self.max_closed_form_residual() <= tol
            && self.square_form <= tol
    }
}

pub fn verify_power_identities(m_max: u32, beta_grid: &[f64]) -> Result<PowerIdentityReport> {
    let h = h_edge_matrix();
    let h2 = h * h;
    let zz = kron2(&pauli(Axis::Z), &pauli(Axis::Z));
    let square_form = (h2 - (Mat4::identity() - zz) * C64::new(0.5, 0.0)).norm();

    let mut powers = Vec::new();
    let mut odd_power = h; // H^{2m-1}
    for m in 1..=m_max.max(1) {
        if m > 1 {
            odd_power *= h2;
        }
        let even_power = odd_power * h;
        powers.push((m, (even_power - h2).norm(), (odd_power - h).norm()));
    }

    let u = Vertex::root();
    let v = u.child(1);
    let h_op = h_edge(&u, &v)?;
    let mut closed_form = Vec::new();
    for &beta in beta_grid {
        let spectral = h_op.expm_hermitian(beta)?;
        let closed = k_edge(&u, &v, beta)?;
        closed_form.push((beta, spectral.distance(closed.operator())?));
    }
    Ok(PowerIdentityReport {
        powers,
        closed_form,
        square_form,
    })
}

/// `{0.1, 0.25, 0.5, ..., 3.0}`: the inverse-temperature grid used by the
/// verification suites.
pub fn beta_grid() -> Vec<f64> {
    let mut grid = vec![0.1];
    grid.extend((1..=12).map(|i| 0.25 * i as f64));
    grid
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::hermitian_eigenvalues;
    use approx::assert_abs_diff_eq;

    fn dense(m: &Mat4) -> DMatrix<C64> {
        to_dense(m)
    }

    #[test]
    fn pauli_algebra() {
        assert_eq!(pauli(Axis::X), Mat2::new(ZERO, ONE, ONE, ZERO));
        for a in Axis::ALL {
            assert_eq!(pauli(a) * pauli(a), Mat2::identity());
        }
        let i = C64::new(0.0, 1.0);
        assert_eq!(pauli(Axis::X) * pauli(Axis::Y), pauli(Axis::Z) * i);
    }

    #[test]
    fn exchange_hamiltonian() {
        let h = h_edge_matrix();
        // |01> -> |10>
        assert_eq!(h[(2, 1)], ONE);
        assert_eq!(h[(1, 2)], ONE);
        assert_eq!(h[(0, 0)], ZERO);
        assert_eq!(h[(3, 3)], ZERO);
        let zz = kron2(&pauli(Axis::Z), &pauli(Axis::Z));
        assert_abs_diff_eq!((h * h - (Mat4::identity() - zz) * C64::new(0.5, 0.0)).norm(), 0.0);
        let eig = hermitian_eigenvalues(&dense(&h));
        let expected = [-1.0, 0.0, 0.0, 1.0];
        for (a, b) in eig.iter().zip(expected) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-14);
        }
    }

    #[test]
    fn h_edge_rejects_loop() {
        let u = Vertex::root();
        assert!(matches!(h_edge(&u, &u), Err(Error::SameSite(_))));
    }

    #[test]
    fn k_edge_closed_form_properties() {
        let u = Vertex::root();
        let v = u.child(1);
        let k1 = k_edge(&u, &v, 1.0).unwrap();
        let e = core::f64::consts::E;
        let eig = hermitian_eigenvalues(k1.operator().matrix());
        for (a, b) in eig.iter().zip([1.0 / e, 1.0, 1.0, e]) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-13);
        }
        let m = k1.operator().matrix();
        assert_eq!((m - m.adjoint()).norm(), 0.0);
        assert!(m.iter().all(|z| z.im == 0.0));

        let tiny = k_edge(&u, &v, 1e-12).unwrap();
        let dist = (tiny.operator().matrix() - DMatrix::<C64>::identity(4, 4)).norm();
        assert!(dist <= 2e-12, "{dist}");

        assert!(k_edge(&u, &v, 0.0).is_err());
        assert!(k_edge(&u, &v, -1.0).is_err());
        assert!(k_edge(&u, &v, f64::NAN).is_err());
    }

    #[test]
    fn spin_flip_and_total_z_symmetry() {
        let xx = kron2(&pauli(Axis::X), &pauli(Axis::X));
        let zz = kron2(&pauli(Axis::Z), &pauli(Axis::Z));
        let h = h_edge_matrix();
        assert_abs_diff_eq!((xx * h * xx - h).norm(), 0.0);
        for beta in beta_grid() {
            let k = k_edge_matrix(beta);
            assert!((xx * k * xx - k).norm() <= 1e-13);
            assert!((k * zz - zz * k).norm() <= 1e-13);
        }
    }

    #[test]
    fn power_identities() {
        let report = verify_power_identities(6, &beta_grid()).unwrap();
        assert_eq!(report.powers.len(), 6);
        assert_eq!(report.powers[0].1, 0.0);
        assert!(report.holds(1e-12), "{report:?}");
    }
}
