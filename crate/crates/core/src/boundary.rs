//! Boundary conditions for the order-2 tree and the planar map that links
//! consecutive levels.
//!
//! A level-homogeneous boundary matrix `h^(n) = [[x, a], [ā, x]]` is tracked
//! by `(x, |a|)`. The *push-down* map sends level `n+1` data to level `n`:
//!
//! ```text
//! x = x'² cosh⁴β + y'² sinh²β coshβ
//! y = x' y' sinhβ coshβ (1 + coshβ)
//! ```
//!
//! and the *pull-up* map is its explicit inverse, defined only when
//! `x ≥ 2y·sqrt(cosh³β)/(1 + coshβ)`. Positivity of `h` restricts everything
//! to `Δ = {x > y ≥ 0}`.

use alloc::vec::Vec;
use core::fmt;

use libm::{cosh, exp, log, sinh, sqrt};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::{is_positive_definite2, Mat2, C64, DEFAULT_TOL};
use crate::model::check_beta;

/// Absolute step norm below which an orbit counts as converged.
pub const CONVERGENCE_STEP: f64 = 1e-13;

/// `(x, y) = (a₁₁, |a₁₂|)` of a level-homogeneous boundary matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundaryPoint {
    pub x: f64,
    pub y: f64,
}

impl BoundaryPoint {
    pub const fn new(x: f64, y: f64) -> Self {
        BoundaryPoint { x, y }
    }

    /// Membership in `Δ`: `x > y ≥ 0`, both finite.
    pub fn in_domain(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.y >= 0.0 && self.x > self.y
    }

    pub fn distance(&self, other: &BoundaryPoint) -> f64 {
        libm::hypot(self.x - other.x, self.y - other.y)
    }

    /// `[[x, y e^{iφ}], [y e^{-iφ}, x]]`.
    pub fn to_matrix(&self, phase: f64) -> Mat2 {
        let off = C64::from_polar(self.y, phase);
        Mat2::new(C64::new(self.x, 0.0), off, off.conj(), C64::new(self.x, 0.0))
    }
}

/// Why the pull-up map cannot continue from a point.
#[derive(Clone, Copy, Debug, PartialEq, thiserror::Error)]
pub enum DomainViolation {
    /// `x < threshold = 2y·sqrt(cosh³β)/(1+coshβ)`: the square roots are undefined.
    #[error("({x}, {y}) is inadmissible: x is below the threshold {threshold}")]
    Inadmissible { x: f64, y: f64, threshold: f64 },
    /// The point itself is not in `Δ`.
    #[error("({x}, {y}) is outside x > y >= 0")]
    OutsideDomain { x: f64, y: f64 },
    /// The preimage exists but has `x' ≤ y'`, i.e. it is not a positive matrix.
    #[error("preimage ({}, {}) of ({x}, {y}) leaves x > y", image.x, image.y)]
    LeavesDomain { x: f64, y: f64, image: BoundaryPoint },
}

impl DomainViolation {
    pub fn point(&self) -> BoundaryPoint {
        match *self {
            DomainViolation::Inadmissible { x, y, .. }
            | DomainViolation::OutsideDomain { x, y }
            | DomainViolation::LeavesDomain { x, y, .. } => BoundaryPoint::new(x, y),
        }
    }
}

/// Hyperbolic coefficients of the level map at fixed β.
#[derive(Clone, Copy, Debug)]
struct Coeffs {
    cosh: f64,
    sinh: f64,
    cosh4: f64,
    /// `sinh²β coshβ`
    off_sq: f64,
    /// `sinhβ coshβ (1 + coshβ)`
    cross: f64,
    /// `sqrt(cosh³β) / (1 + coshβ)`
    half_threshold: f64,
}

impl Coeffs {
    fn new(beta: f64) -> Self {
        let c = cosh(beta);
        let s = sinh(beta);
        Coeffs {
            cosh: c,
            sinh: s,
            cosh4: c * c * c * c,
            off_sq: s * s * c,
            cross: s * c * (1.0 + c),
            half_threshold: sqrt(c * c * c) / (1.0 + c),
        }
    }
}

/// Level `n+1` data → level `n` data. Polynomial and defined everywhere.
pub fn pushdown(p: BoundaryPoint, beta: f64) -> BoundaryPoint {
    let k = Coeffs::new(beta);
    BoundaryPoint {
        x: p.x * p.x * k.cosh4 + p.y * p.y * k.off_sq,
        y: p.x * p.y * k.cross,
    }
}

/// Right-hand side of the admissibility condition, `2y·sqrt(cosh³β)/(1+coshβ)`.
pub fn admissibility_threshold(y: f64, beta: f64) -> f64 {
    2.0 * y * Coeffs::new(beta).half_threshold
}

pub fn is_admissible(p: BoundaryPoint, beta: f64) -> bool {
    p.x >= admissibility_threshold(p.y, beta)
}

/// The branch of the inverse with the larger diagonal, without checking that
/// it lands in `Δ`.
///
/// `y'` is recovered from `x' y' = y / (sinhβ coshβ (1+coshβ))` rather than
/// from the difference of square roots, which cancels catastrophically for
/// `y ≪ x`.
fn preimage(p: BoundaryPoint, k: &Coeffs) -> core::result::Result<BoundaryPoint, DomainViolation> {
    let half = k.half_threshold;
    let threshold = 2.0 * p.y * half;
    if p.x.is_nan() || p.x < threshold {
        return Err(DomainViolation::Inadmissible {
            x: p.x,
            y: p.y,
            threshold,
        });
    }
    let disc = ((p.x - threshold) * (p.x + threshold)).max(0.0);
    let u = (p.x + sqrt(disc)) / (2.0 * k.cosh4);
    let x_new = sqrt(u);
    let y_new = if p.y == 0.0 { 0.0 } else { p.y / (x_new * k.cross) };
    Ok(BoundaryPoint::new(x_new, y_new))
}

/// Level `n` data → level `n+1` data.
pub fn pullup(p: BoundaryPoint, beta: f64) -> core::result::Result<BoundaryPoint, DomainViolation> {
    if !p.in_domain() {
        return Err(DomainViolation::OutsideDomain { x: p.x, y: p.y });
    }
    let image = preimage(p, &Coeffs::new(beta))?;
    if !image.in_domain() {
        return Err(DomainViolation::LeavesDomain {
            x: p.x,
            y: p.y,
            image,
        });
    }
    Ok(image)
}

/// The unique fixed point `(1/cosh⁴β, 0)` in `Δ`.
pub fn fixed_point(beta: f64) -> Result<BoundaryPoint> {
    check_beta(beta)?;
    Ok(BoundaryPoint::new(1.0 / Coeffs::new(beta).cosh4, 0.0))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Termination {
    /// The step from `points[step - 1]` to `points[step]` was below
    /// [`CONVERGENCE_STEP`].
    Converged { step: usize },
    /// Computing `points[step]` failed.
    DomainViolation {
        step: usize,
        violation: DomainViolation,
    },
    MaxSteps,
}

impl fmt::Display for Termination {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Termination::Converged { .. } => f.write_str("Converged"),
            Termination::DomainViolation { step, .. } => write!(f, "DomainViolation@{step}"),
            Termination::MaxSteps => f.write_str("MaxSteps"),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OrbitResult {
    /// `points[0]` is the starting point, `points[n]` the `n`-th pull-up.
    pub points: Vec<BoundaryPoint>,
    pub termination: Termination,
}

/// Iterates [`pullup`] from `start` for at most `max_steps` steps.
pub fn orbit(start: BoundaryPoint, beta: f64, max_steps: usize) -> Result<OrbitResult> {
    check_beta(beta)?;
    if !start.in_domain() {
        return Err(Error::OutsideDomain {
            x: start.x,
            y: start.y,
        });
    }
    let mut points = Vec::with_capacity(max_steps.min(1024) + 1);
    points.push(start);
    let mut current = start;
    for step in 1..=max_steps {
        match pullup(current, beta) {
            Ok(next) => {
                points.push(next);
                if next.distance(&current) <= CONVERGENCE_STEP {
                    return Ok(OrbitResult {
                        points,
                        termination: Termination::Converged { step },
                    });
                }
                current = next;
            }
            Err(violation) => {
                return Ok(OrbitResult {
                    points,
                    termination: Termination::DomainViolation { step, violation },
                })
            }
        }
    }
    Ok(OrbitResult {
        points,
        termination: Termination::MaxSteps,
    })
}

/// `x^(n) = (x^(0) cosh⁴β)^{1/2ⁿ} / cosh⁴β`: the orbit of a diagonal start.
pub fn diagonal_orbit_closed_form(x0: f64, beta: f64, n: u32) -> f64 {
    let c4 = Coeffs::new(beta).cosh4;
    exp(log(x0 * c4) / libm::pow(2.0, n as f64)) / c4
}

/// `sinhβ (1 + coshβ) / cosh³β`, the per-step contraction of `x/y`.
pub fn contraction_factor(beta: f64) -> f64 {
    let k = Coeffs::new(beta);
    k.sinh * (1.0 + k.cosh) / (k.cosh * k.cosh * k.cosh)
}

/// Evaluates `x'/y' < contraction_factor(β) · x/y` for the pull-up of `p`.
///
/// Only the admissibility of `p` is required; the preimage may leave `Δ`.
pub fn ratio_contraction_check(p: BoundaryPoint, beta: f64) -> Result<bool> {
    check_beta(beta)?;
    if p.y.is_nan() || p.y <= 0.0 {
        return Err(Error::RatioNotApplicable);
    }
    if !p.in_domain() {
        return Err(Error::OutsideDomain { x: p.x, y: p.y });
    }
    let image = preimage(p, &Coeffs::new(beta))?;
    Ok(image.x / image.y < contraction_factor(beta) * (p.x / p.y))
}

/// `(sinhβ coshβ (1+coshβ), cosh⁴β)` and whether `0 < lhs < rhs`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LemmaCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

pub fn lemma_inequality(beta: f64) -> LemmaCheck {
    let k = Coeffs::new(beta);
    let lhs = k.cross;
    let rhs = k.cosh4;
    LemmaCheck {
        lhs,
        rhs,
        holds: 0.0 < lhs && lhs < rhs,
    }
}

/// `p(t) = t⁶ - 2t⁵ - t⁴ + 7t² + 2t + 1`.
///
/// With `t = e^β`, `p(t) = 8t³ (cosh³β - sinhβ(1+coshβ))`.
pub fn appendix_polynomial(t: f64) -> f64 {
    t * t * (((t - 2.0) * t - 1.0) * t * t + 7.0) + 2.0 * t + 1.0
}

/// `cosh³β - sinhβ(1 + coshβ)`.
pub fn cubic_gap(beta: f64) -> f64 {
    let k = Coeffs::new(beta);
    k.cosh * k.cosh * k.cosh - k.sinh * (1.0 + k.cosh)
}

/// One of the four ranges of `t > 1` used to prove `p(t) > 0`, with the
/// nonnegative summands of the matching rewrite of `p(t)`.
#[derive(Clone, Debug, PartialEq)]
pub struct AppendixCase {
    /// 1: `t ≥ 1+√2`, 2: `2 ≤ t < 1+√2`, 3: `√(7/2) ≤ t < 2`, 4: `1 < t < √(7/2)`.
    pub case: u8,
    /// Summands; they add up to `p(t)`.
    pub terms: Vec<f64>,
}

impl AppendixCase {
    pub fn value(&self) -> f64 {
        self.terms.iter().sum()
    }

    pub fn all_terms_nonnegative(&self) -> bool {
        self.terms.iter().all(|&t| t >= 0.0)
    }
}

pub fn appendix_case(t: f64) -> Option<AppendixCase> {
    if t.is_nan() || t <= 1.0 {
        return None;
    }
    let sqrt2 = core::f64::consts::SQRT_2;
    let t2 = t * t;
    let t4 = t2 * t2;
    let (case, terms) = if t >= 1.0 + sqrt2 {
        let quad = (t - (1.0 + sqrt2)) * (t - (1.0 - sqrt2));
        (1, alloc::vec![t4 * quad, 7.0 * t2, 2.0 * t, 1.0])
    } else if t >= 2.0 {
        (2, alloc::vec![t4 * t * (t - 2.0), t2 * (7.0 - t2), 2.0 * t, 1.0])
    } else if t >= sqrt(3.5) {
        (
            3,
            alloc::vec![
                t4 * (t2 - 3.5),
                1.25 * t4 * (2.0 - t),
                0.75 * t2 * (8.0 - t2 * t),
                t2,
                2.0 * t,
                1.0,
            ],
        )
    } else {
        (4, alloc::vec![t4 * (t - 1.0) * (t - 1.0), t2 * (7.0 - 2.0 * t2), 2.0 * t, 1.0])
    };
    Some(AppendixCase { case, terms })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PeriodicHit {
    pub start: BoundaryPoint,
    pub period: usize,
    pub step: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PeriodicReport {
    pub beta: f64,
    pub samples: usize,
    pub hits: Vec<PeriodicHit>,
}

/// Distance under which two orbit points count as the same point.
pub const PERIODIC_TOL: f64 = 1e-10;

/// Orbit length used per sample.
pub const PERIODIC_MAX_STEPS: usize = 200;

/// Scans orbits of `start` for a return, within [`PERIODIC_TOL`], to a point
/// `2..=k_max` steps earlier that is not a fixed point.
pub fn periodic_hits_from(start: BoundaryPoint, beta: f64, k_max: usize) -> Result<Vec<PeriodicHit>> {
    let result = orbit(start, beta, PERIODIC_MAX_STEPS)?;
    let pts = &result.points;
    let mut hits = Vec::new();
    for step in 1..pts.len() {
        // settled onto a fixed point: lag-1 returns are not cycles
        if pts[step].distance(&pts[step - 1]) <= PERIODIC_TOL {
            break;
        }
        for period in 2..=k_max.min(step) {
            if pts[step].distance(&pts[step - period]) <= PERIODIC_TOL {
                hits.push(PeriodicHit {
                    start,
                    period,
                    step,
                });
                break;
            }
        }
    }
    Ok(hits)
}

/// Samples `samples` starting points in `Δ ∩ (0, 5]²` (every other one on the
/// diagonal `y = 0`) and reports every periodic return of period `2..=k_max`.
pub fn periodic_point_search(beta: f64, k_max: usize, samples: usize, seed: u64) -> Result<PeriodicReport> {
    check_beta(beta)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut hits = Vec::new();
    for i in 0..samples {
        let x = 5.0 * (1.0 - rng.gen::<f64>());
        let y = if i % 2 == 0 { 0.0 } else { x * rng.gen::<f64>() };
        hits.extend(periodic_hits_from(BoundaryPoint::new(x, y), beta, k_max)?);
    }
    Ok(PeriodicReport {
        beta,
        samples,
        hits,
    })
}

/// `α₀ = 1/cosh⁴β`, the member of the solution family sitting at the fixed point.
pub fn alpha0(beta: f64) -> f64 {
    1.0 / Coeffs::new(beta).cosh4
}

/// Root weight `w₀` and per-level boundary matrices `h^(n)`, `n = 0..=depth`.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryCondition {
    alpha: Option<f64>,
    w0: Mat2,
    levels: Vec<Mat2>,
}

impl BoundaryCondition {
    /// Checks positive definiteness of `w₀` and every `h^(n)`.
    pub fn new(w0: Mat2, levels: Vec<Mat2>) -> Result<Self> {
        for m in core::iter::once(&w0).chain(levels.iter()) {
            if !is_positive_definite2(m, DEFAULT_TOL) {
                let dense = nalgebra::DMatrix::from_fn(2, 2, |i, j| m[(i, j)]);
                return Err(Error::NotPositive {
                    min_eigenvalue: crate::linalg::min_eigenvalue(&dense),
                });
            }
        }
        if levels.is_empty() {
            return Err(Error::MissingLevel(0));
        }
        Ok(BoundaryCondition {
            alpha: None,
            w0,
            levels,
        })
    }

    /// Boundary data read off a pull-up orbit: `h^(n)` from `points[n]` with
    /// off-diagonal phase `phase`, and `w₀ = I / x₀` so that `tr(w₀h^(0)) = 1`.
    pub fn from_orbit(points: &[BoundaryPoint], phase: f64) -> Result<Self> {
        let first = points.first().ok_or(Error::MissingLevel(0))?;
        if first.x.is_nan() || first.x <= 0.0 {
            return Err(Error::OutsideDomain {
                x: first.x,
                y: first.y,
            });
        }
        let w0 = Mat2::identity() * C64::new(1.0 / first.x, 0.0);
        let levels = points.iter().map(|p| p.to_matrix(phase)).collect();
        Self::new(w0, levels)
    }

    pub fn alpha(&self) -> Option<f64> {
        self.alpha
    }

    pub fn w0(&self) -> &Mat2 {
        &self.w0
    }

    pub fn levels(&self) -> &[Mat2] {
        &self.levels
    }

    /// Deepest level with boundary data.
    pub fn depth(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn h(&self, level: usize) -> Result<&Mat2> {
        self.levels.get(level).ok_or(Error::MissingLevel(level))
    }

    /// `|tr(w₀ h^(0)) - 1|` with the normalized trace.
    pub fn eq1_residual(&self) -> f64 {
        let t = (self.w0 * self.levels[0]).trace() * 0.5;
        (t - C64::new(1.0, 0.0)).norm()
    }
}

/// `w₀ = I/α`, `h^(n) = (α cosh⁴β)^{1/2ⁿ}/cosh⁴β · I` for `n = 0..=n_max`.
pub fn solution_family(alpha: f64, beta: f64, n_max: usize) -> Result<BoundaryCondition> {
    check_beta(beta)?;
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "alpha",
            value: alpha,
        });
    }
    let c4 = Coeffs::new(beta).cosh4;
    let log_ac4 = log(alpha * c4);
    let levels = (0..=n_max)
        .map(|n| {
            let scalar = exp(log_ac4 / libm::pow(2.0, n as f64)) / c4;
            Mat2::identity() * C64::new(scalar, 0.0)
        })
        .collect();
    let w0 = Mat2::identity() * C64::new(1.0 / alpha, 0.0);
    let mut bc = BoundaryCondition::new(w0, levels)?;
    bc.alpha = Some(alpha);
    Ok(bc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    const COSH1_4: f64 = 5.669_626_950_043_876;

    #[test]
    fn pushdown_examples() {
        let p = pushdown(BoundaryPoint::new(1.0, 0.0), 1.0);
        assert_relative_eq!(p.x, COSH1_4, max_relative = 1e-14);
        assert_eq!(p.y, 0.0);
        assert_eq!(pushdown(BoundaryPoint::new(0.0, 0.0), 0.7), BoundaryPoint::new(0.0, 0.0));
        for beta in [0.3, 1.0, 2.5] {
            let fp = fixed_point(beta).unwrap();
            assert!(pushdown(fp, beta).distance(&fp) <= 1e-14);
        }
    }

    #[test]
    fn pullup_examples() {
        let p = pullup(BoundaryPoint::new(COSH1_4, 0.0), 1.0).unwrap();
        assert_abs_diff_eq!(p.x, 1.0, epsilon = 1e-14);
        assert_eq!(p.y, 0.0);

        match pullup(BoundaryPoint::new(1.0, 0.9), 1.0) {
            Err(DomainViolation::Inadmissible { threshold, .. }) => {
                assert_abs_diff_eq!(threshold, 0.9 * 1.507_484_295_231_394, epsilon = 1e-12);
                assert!(threshold > 1.0);
            }
            other => panic!("{other:?}"),
        }

        let start = BoundaryPoint::new(1.0, 0.5);
        let up = pullup(start, 1.0).unwrap();
        assert!(pushdown(up, 1.0).distance(&start) <= 1e-12);
    }

    #[test]
    fn pullup_matches_explicit_square_roots() {
        // away from cancellation the stable form agrees with the textbook one
        let beta = 0.8;
        let k = Coeffs::new(beta);
        let p = BoundaryPoint::new(1.3, 0.4);
        let disc = p.x * p.x - 4.0 * p.y * p.y * k.cosh * k.cosh * k.cosh / ((1.0 + k.cosh) * (1.0 + k.cosh));
        let x_ref = sqrt((p.x + sqrt(disc)) / (2.0 * k.cosh4));
        let y_ref = sqrt((p.x - sqrt(disc)) / (2.0 * k.sinh * k.sinh * k.cosh));
        let up = pullup(p, beta).unwrap();
        assert_relative_eq!(up.x, x_ref, max_relative = 1e-14);
        assert_relative_eq!(up.y, y_ref, max_relative = 1e-12);
    }

    #[test]
    fn preimage_can_leave_the_domain_near_the_threshold() {
        let beta = 1.0;
        let y = 1.0;
        let p = BoundaryPoint::new(admissibility_threshold(y, beta) * (1.0 + 1e-9), y);
        match pullup(p, beta) {
            Err(DomainViolation::LeavesDomain { image, .. }) => {
                assert!(image.x < image.y);
                assert!(pushdown(image, beta).distance(&p) < 1e-9);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn pullup_rejects_points_outside_domain() {
        assert!(matches!(
            pullup(BoundaryPoint::new(0.5, 0.5), 1.0),
            Err(DomainViolation::OutsideDomain { .. })
        ));
        assert!(matches!(
            pullup(BoundaryPoint::new(0.0, 0.0), 1.0),
            Err(DomainViolation::OutsideDomain { .. })
        ));
    }

    #[test]
    fn fixed_point_values() {
        assert_abs_diff_eq!(fixed_point(1.0).unwrap().x, 1.0 / COSH1_4, epsilon = 1e-15);
        assert_abs_diff_eq!(fixed_point(1.0).unwrap().x, 0.176378, epsilon = 1e-6);
        let fp = fixed_point(0.5).unwrap();
        assert_abs_diff_eq!(fp.x, 1.0 / cosh(0.5).powi(4), epsilon = 1e-15);
        assert!(pullup(fp, 0.5).unwrap().distance(&fp) <= 1e-14);
        assert!(fixed_point(0.0).is_err());
    }

    #[test]
    fn diagonal_orbit_follows_closed_form() {
        let r = orbit(BoundaryPoint::new(1.0, 0.0), 1.0, 500).unwrap();
        assert!(matches!(r.termination, Termination::Converged { .. }));
        assert_abs_diff_eq!(r.points[1].x, 0.419974, epsilon = 1e-6);
        for (n, p) in r.points.iter().enumerate().take(21) {
            let expected = diagonal_orbit_closed_form(1.0, 1.0, n as u32);
            assert_relative_eq!(p.x, expected, max_relative = 1e-12);
        }
        // monotone decrease to the fixed point
        for w in r.points.windows(2) {
            assert!(w[1].x <= w[0].x);
        }
        assert_abs_diff_eq!(r.points.last().unwrap().x, 1.0 / COSH1_4, epsilon = 1e-12);
    }

    #[test]
    fn off_diagonal_orbit_dies() {
        let r = orbit(BoundaryPoint::new(1.0, 0.5), 1.0, 1000).unwrap();
        match r.termination {
            // independent iteration of the square-root formulas: (0.382289, 0.283607)
            // at step 1, inadmissible at step 2
            Termination::DomainViolation { step, violation } => {
                assert_eq!(step, r.points.len());
                assert_eq!(step, 2);
                assert!(matches!(violation, DomainViolation::Inadmissible { .. }));
                assert_abs_diff_eq!(r.points[1].x, 0.382_288_582_846_303_46, epsilon = 1e-14);
                assert_abs_diff_eq!(r.points[1].y, 0.283_607_492_908_090_7, epsilon = 1e-14);
            }
            other => panic!("{other:?}"),
        }
        for p in &r.points {
            assert!(p.in_domain());
        }
    }

    #[test]
    fn fixed_point_orbit_converges_immediately() {
        for beta in [0.3, 1.0, 2.0] {
            let r = orbit(fixed_point(beta).unwrap(), beta, 10).unwrap();
            assert_eq!(r.termination, Termination::Converged { step: 1 });
        }
    }

    #[test]
    fn orbit_rejects_bad_start() {
        assert!(matches!(
            orbit(BoundaryPoint::new(0.2, 0.3), 1.0, 10),
            Err(Error::OutsideDomain { .. })
        ));
    }

    #[test]
    fn termination_labels() {
        assert_eq!(Termination::MaxSteps.to_string(), "MaxSteps");
        assert_eq!(Termination::Converged { step: 4 }.to_string(), "Converged");
        let v = DomainViolation::OutsideDomain { x: 0.0, y: 0.0 };
        assert_eq!(
            Termination::DomainViolation { step: 7, violation: v }.to_string(),
            "DomainViolation@7"
        );
    }

    #[test]
    fn ratio_contraction() {
        assert!(ratio_contraction_check(BoundaryPoint::new(1.0, 0.5), 1.0).unwrap());
        assert!(matches!(
            ratio_contraction_check(BoundaryPoint::new(1.0, 0.0), 1.0),
            Err(Error::RatioNotApplicable)
        ));
        assert_abs_diff_eq!(1.0 / contraction_factor(1.0), 1.229_400_848_176_401, epsilon = 1e-12);
        assert!(contraction_factor(1.0) < 1.0);
    }

    #[test]
    fn lemma_values() {
        let l = lemma_inequality(1.0);
        assert_abs_diff_eq!(l.lhs, 4.611_699_234_186_935, epsilon = 1e-12);
        assert_abs_diff_eq!(l.rhs, COSH1_4, epsilon = 1e-12);
        assert!(l.holds);
        let small = lemma_inequality(0.01);
        assert!(small.holds);
        assert_abs_diff_eq!(small.lhs, 0.02, epsilon = 1e-3);
        assert_abs_diff_eq!(small.rhs, 1.000_200_016_667, epsilon = 1e-12);
        assert!(lemma_inequality(10.0).holds);
    }

    #[test]
    fn appendix_polynomial_values() {
        assert_eq!(appendix_polynomial(1.0), 8.0);
        assert_eq!(appendix_polynomial(2.0), 17.0);
        for i in 1..=30 {
            let beta = 0.1 * i as f64;
            let t = exp(beta);
            let scaled = 8.0 * t * t * t * cubic_gap(beta);
            assert_relative_eq!(appendix_polynomial(t), scaled, max_relative = 1e-9);
            assert!(cubic_gap(beta) > 0.0);
        }
    }

    #[test]
    fn appendix_cases_cover_and_agree() {
        let mut seen = [false; 4];
        for i in 1..=2000 {
            let t = 1.0 + 0.002 * i as f64;
            let case = appendix_case(t).unwrap();
            seen[case.case as usize - 1] = true;
            assert_relative_eq!(case.value(), appendix_polynomial(t), max_relative = 1e-12);
            assert!(case.all_terms_nonnegative(), "t = {t}: {case:?}");
            assert!(case.value() > 0.0);
        }
        assert_eq!(seen, [true; 4]);
        assert!(appendix_case(1.0).is_none());
    }

    #[test]
    fn solution_family_properties() {
        for beta in [0.5, 1.0, 2.0] {
            let bc = solution_family(2.0, beta, 6).unwrap();
            assert!(bc.eq1_residual() <= 1e-12);
            let a0 = alpha0(beta);
            let fixed = solution_family(a0, beta, 6).unwrap();
            for h in fixed.levels() {
                assert_relative_eq!(h[(0, 0)].re, a0, max_relative = 1e-12);
            }
            // consecutive levels are linked by the push-down map
            for n in 0..6 {
                let child = BoundaryPoint::new(bc.h(n + 1).unwrap()[(0, 0)].re, 0.0);
                let parent = pushdown(child, beta);
                assert_relative_eq!(parent.x, bc.h(n).unwrap()[(0, 0)].re, max_relative = 1e-12);
            }
        }
        let deep = solution_family(7.0, 1.0, 40).unwrap();
        assert_relative_eq!(deep.h(40).unwrap()[(0, 0)].re, alpha0(1.0), max_relative = 1e-10);
        assert!(solution_family(0.0, 1.0, 2).is_err());
        assert!(solution_family(1.0, -1.0, 2).is_err());
    }

    #[test]
    fn boundary_from_orbit() {
        let r = orbit(BoundaryPoint::new(1.0, 0.05), 0.7, 100).unwrap();
        let bc = BoundaryCondition::from_orbit(&r.points, 0.3).unwrap();
        assert!(bc.eq1_residual() <= 1e-14);
        assert_eq!(bc.depth(), r.points.len() - 1);
        assert!(BoundaryCondition::new(Mat2::identity(), alloc::vec![Mat2::zeros()]).is_err());
    }

    #[test]
    fn periodic_search_on_fixed_point_and_diagonal() {
        let fp = fixed_point(0.7).unwrap();
        assert!(periodic_hits_from(fp, 0.7, 8).unwrap().is_empty());
        assert!(periodic_hits_from(BoundaryPoint::new(3.0, 0.0), 0.7, 8).unwrap().is_empty());
        let report = periodic_point_search(0.7, 6, 200, 3).unwrap();
        assert_eq!(report.samples, 200);
        assert!(report.hits.is_empty());
    }
}
