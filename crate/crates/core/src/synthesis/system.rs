//! The orthogonality system for one index `(n, m)` in Bernstein form.
//!
//! With the top coefficient pinned to 1 the candidate phase is
//!
//! ```text
//! theta(r) = T r^n + T r^m sum_{i<L} alpha_i B_{i,L}(r^2),   T = theta(1), L = (n-m)/2
//! ```
//!
//! and the `L` unknowns `alpha_0..alpha_{L-1}` are fixed by requiring zero
//! overlap with every established function `(n', m)`, `n' < n`. Since
//! `B_{i,L}(1) = 0` for `i < L`, the rim clamp holds for any value of the
//! unknowns and `d theta / d alpha_i = T r^m B_{i,L}(r^2)`.

use nalgebra::DMatrix;

use crate::bernstein::bernstein_unchecked;
use crate::error::{Error, Result};
use crate::quadrature::{integrate_samples, QuadratureConfig};
use crate::radial_basis::{BasisIndex, Kind, RadialFunction, ReducedPhase};

/// Integrand factors for one index, tabulated once on the quadrature grid.
#[derive(Debug, Clone)]
pub struct OrthogonalitySystem {
    index: BasisIndex,
    kind: Kind,
    rim: f64,
    quad: QuadratureConfig,
    /// `T r^m B_{i,L}(r^2)` for `i = 0..=L`.
    shape: Vec<Vec<f64>>,
    /// `r kind(theta_{n'}(r))` for each established `n'`, descending.
    partners: Vec<Vec<f64>>,
    partner_indices: Vec<BasisIndex>,
}

impl OrthogonalitySystem {
    /// `established` must hold exactly the functions `(n', m)` for
    /// `n' = m, m+2, ..., n-2`, in any order.
    pub fn new(
        index: BasisIndex,
        established: &[&RadialFunction],
        quad: &QuadratureConfig,
    ) -> Result<Self> {
        quad.validate()?;
        let mut partners: Vec<&RadialFunction> = established.to_vec();
        partners.sort_by_key(|f| std::cmp::Reverse(f.index().n()));

        let expected: Vec<BasisIndex> = (0..index.half_span() as u32)
            .map(|k| BasisIndex::new(index.n() - 2 - 2 * k, index.m()).unwrap())
            .collect();
        let got: Vec<BasisIndex> = partners.iter().map(|f| f.index()).collect();
        if got != expected {
            return Err(Error::Precondition(format!(
                "system for {index} needs established functions {:?}, got {:?}",
                expected.iter().map(ToString::to_string).collect::<Vec<_>>(),
                got.iter().map(ToString::to_string).collect::<Vec<_>>(),
            )));
        }

        let nodes = quad.nodes();
        let rim = index.rim_phase();
        let degree = index.half_span();
        let m = index.m() as i32;
        let shape = (0..=degree)
            .map(|i| {
                nodes
                    .iter()
                    .map(|&r| rim * r.powi(m) * bernstein_unchecked(i, degree, r * r))
                    .collect()
            })
            .collect();
        let partner_samples = partners
            .iter()
            .map(|f| {
                nodes
                    .iter()
                    .map(|&r| r * f.kind().apply(f.phase().eval_unchecked(r)))
                    .collect()
            })
            .collect();

        Ok(OrthogonalitySystem {
            index,
            kind: index.kind(),
            rim,
            quad: *quad,
            shape,
            partners: partner_samples,
            partner_indices: got,
        })
    }

    pub fn index(&self) -> BasisIndex {
        self.index
    }

    /// Number of unknowns, equal to the number of equations.
    pub fn unknowns(&self) -> usize {
        self.index.half_span()
    }

    pub fn rim(&self) -> f64 {
        self.rim
    }

    /// Established partners, in equation order (descending `n'`).
    pub fn partner_indices(&self) -> &[BasisIndex] {
        &self.partner_indices
    }

    fn check_len(&self, free: &[f64]) -> Result<()> {
        if free.len() != self.unknowns() {
            return Err(Error::Precondition(format!(
                "system for {} has {} unknowns, got {}",
                self.index,
                self.unknowns(),
                free.len()
            )));
        }
        Ok(())
    }

    /// Candidate phase sampled on the grid.
    pub fn phase_samples(&self, free: &[f64]) -> Vec<f64> {
        let top = &self.shape[self.unknowns()];
        let mut theta = top.clone();
        for (alpha, column) in free.iter().zip(&self.shape) {
            for (t, s) in theta.iter_mut().zip(column) {
                *t += alpha * s;
            }
        }
        theta
    }

    /// Overlap integrals against each partner, descending `n'`.
    pub fn residuals(&self, free: &[f64]) -> Result<Vec<f64>> {
        self.check_len(free)?;
        let theta = self.phase_samples(free);
        self.residuals_from_phase(&theta)
    }

    fn residuals_from_phase(&self, theta: &[f64]) -> Result<Vec<f64>> {
        let value: Vec<f64> = theta.iter().map(|&t| self.kind.apply(t)).collect();
        let mut buffer = vec![0.0; value.len()];
        self.partners
            .iter()
            .map(|partner| {
                for ((b, v), p) in buffer.iter_mut().zip(&value).zip(partner) {
                    *b = v * p;
                }
                integrate_samples(&buffer, &self.quad)
            })
            .collect()
    }

    /// Exact derivative of [`Self::residuals`] with respect to the unknowns;
    /// row `k` is the equation against the `k`-th partner.
    pub fn jacobian(&self, free: &[f64]) -> Result<DMatrix<f64>> {
        self.check_len(free)?;
        let theta = self.phase_samples(free);
        self.jacobian_from_phase(&theta)
    }

    fn jacobian_from_phase(&self, theta: &[f64]) -> Result<DMatrix<f64>> {
        let size = self.unknowns();
        let slope: Vec<f64> = theta.iter().map(|&t| self.kind.derivative(t)).collect();
        let mut jac = DMatrix::zeros(size, size);
        let mut weighted = vec![0.0; slope.len()];
        let mut buffer = vec![0.0; slope.len()];
        for (row, partner) in self.partners.iter().enumerate() {
            for ((w, s), p) in weighted.iter_mut().zip(&slope).zip(partner) {
                *w = s * p;
            }
            for col in 0..size {
                for ((b, w), sh) in buffer.iter_mut().zip(&weighted).zip(&self.shape[col]) {
                    *b = w * sh;
                }
                jac[(row, col)] = integrate_samples(&buffer, &self.quad)?;
            }
        }
        Ok(jac)
    }

    /// Residuals and Jacobian from a single phase tabulation.
    pub fn evaluate(&self, free: &[f64]) -> Result<(Vec<f64>, DMatrix<f64>)> {
        self.check_len(free)?;
        let theta = self.phase_samples(free);
        Ok((
            self.residuals_from_phase(&theta)?,
            self.jacobian_from_phase(&theta)?,
        ))
    }
}

fn check_candidate(candidate: &ReducedPhase) -> Result<()> {
    let index = candidate.index();
    if (candidate.boundary_value() - index.rim_phase()).abs() > 1e-12 * index.rim_phase().max(1.0) {
        return Err(Error::Precondition(format!(
            "candidate for {index} has theta(1) = {}, expected {}",
            candidate.boundary_value(),
            index.rim_phase()
        )));
    }
    Ok(())
}

/// Orthogonality defects of `candidate` against the established functions
/// of the same `m`, ordered by descending `n'`.
pub fn residuals(
    candidate: &ReducedPhase,
    established: &[&RadialFunction],
    quad: &QuadratureConfig,
) -> Result<Vec<f64>> {
    check_candidate(candidate)?;
    OrthogonalitySystem::new(candidate.index(), established, quad)?.residuals(candidate.free_alphas())
}

/// Jacobian of [`residuals`] with respect to the free Bernstein coefficients.
pub fn jacobian(
    candidate: &ReducedPhase,
    established: &[&RadialFunction],
    quad: &QuadratureConfig,
) -> Result<DMatrix<f64>> {
    check_candidate(candidate)?;
    OrthogonalitySystem::new(candidate.index(), established, quad)?.jacobian(candidate.free_alphas())
}
