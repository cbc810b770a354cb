//! Basis indices, radial phase polynomials and the radial, azimuthal and
//! full circle functions built from them.
//!
//! The phase `theta_{n,m}(r) = sum_i beta_i r^i` runs over the powers
//! `i = m, m+2, ..., n` only, so the parity `theta(-r) = (-1)^m theta(r)` is
//! structural. Monomial coefficients are the storage of record; the reduced
//! Bernstein form is derived from them on demand.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::bernstein::{self, BernsteinVector};
use crate::error::{Error, Result};

/// Boundary clamp tolerance per unit of `max(1, sum |beta_i|)`.
pub const BOUNDARY_TOLERANCE: f64 = 1e-9;

/// Tolerance on the pinned top coefficient of a reduced phase.
pub const TOP_ALPHA_TOLERANCE: f64 = 1e-9;

/// Radial order `n` and azimuthal order `m` with `n >= m` and `n - m` even.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BasisIndex {
    n: u32,
    m: u32,
}

impl BasisIndex {
    pub fn new(n: u32, m: u32) -> Result<Self> {
        if m > n || !(n - m).is_multiple_of(2) {
            return Err(Error::Domain(format!(
                "invalid basis index (n, m) = ({n}, {m}): need n >= m and n - m even"
            )));
        }
        Ok(BasisIndex { n, m })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    /// `(n - m) / 2`: the Bernstein degree of the reduced phase, and the
    /// number of unknowns in the orthogonality system.
    pub fn half_span(&self) -> usize {
        ((self.n - self.m) / 2) as usize
    }

    /// Number of phase coefficients, `1 + (n - m) / 2`.
    pub fn coefficient_count(&self) -> usize {
        self.half_span() + 1
    }

    /// Powers `m, m+2, ..., n` carried by the phase polynomial.
    pub fn powers(&self) -> impl Iterator<Item = u32> {
        (self.m..=self.n).step_by(2)
    }

    /// Clamped rim value `theta(1)`: `(1 + n - m) pi/2` for `m > 0`, `n pi/2` for `m = 0`.
    pub fn rim_phase(&self) -> f64 {
        if self.m == 0 {
            self.n as f64 * FRAC_PI_2
        } else {
            (1 + self.n - self.m) as f64 * FRAC_PI_2
        }
    }

    pub fn kind(&self) -> Kind {
        if self.m == 0 {
            Kind::Cosine
        } else {
            Kind::Sine
        }
    }

    /// Predecessor `(n - 2, m)` in the same azimuthal family.
    pub fn previous(&self) -> Option<BasisIndex> {
        (self.n >= self.m + 2).then(|| BasisIndex {
            n: self.n - 2,
            m: self.m,
        })
    }

    /// All valid indices with `n <= n_max`, ascending in `n` then `m`.
    pub fn enumerate(n_max: u32) -> Vec<BasisIndex> {
        (0..=n_max)
            .flat_map(|n| (n % 2..=n).step_by(2).map(move |m| BasisIndex { n, m }))
            .collect()
    }
}

impl fmt::Display for BasisIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.n, self.m)
    }
}

/// Trigonometric kind of the radial function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Kind {
    Sine,
    Cosine,
}

impl Kind {
    #[inline]
    pub fn apply(self, theta: f64) -> f64 {
        match self {
            Kind::Sine => theta.sin(),
            Kind::Cosine => theta.cos(),
        }
    }

    /// Derivative of [`Kind::apply`] with respect to its argument.
    #[inline]
    pub fn derivative(self, theta: f64) -> f64 {
        match self {
            Kind::Sine => theta.cos(),
            Kind::Cosine => -theta.sin(),
        }
    }
}

/// Phase polynomial `theta_{n,m}(r) = sum_{i=m,m+2,..,n} beta_i r^i`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhasePolynomial {
    index: BasisIndex,
    betas: Vec<f64>,
}

impl PhasePolynomial {
    /// Builds a phase and checks the rim clamp `theta(1) = index.rim_phase()`.
    pub fn new(index: BasisIndex, betas: Vec<f64>) -> Result<Self> {
        let phase = Self::from_raw(index, betas)?;
        let expected = index.rim_phase();
        let actual = phase.boundary_sum();
        if (actual - expected).abs() > phase.boundary_tolerance() {
            return Err(Error::BoundaryMismatch {
                index,
                expected,
                actual,
            });
        }
        Ok(phase)
    }

    /// Builds a phase without the rim clamp check (parsed or trial data).
    pub fn from_raw(index: BasisIndex, betas: Vec<f64>) -> Result<Self> {
        if betas.len() != index.coefficient_count() {
            return Err(Error::Domain(format!(
                "phase {index} needs {} coefficients, got {}",
                index.coefficient_count(),
                betas.len()
            )));
        }
        if let Some(bad) = betas.iter().find(|b| !b.is_finite()) {
            return Err(Error::Domain(format!("phase {index} has non-finite coefficient {bad}")));
        }
        Ok(PhasePolynomial { index, betas })
    }

    pub fn index(&self) -> BasisIndex {
        self.index
    }

    /// `beta_{n,m,i}` for `i = m, m+2, ..., n`.
    pub fn betas(&self) -> &[f64] {
        &self.betas
    }

    /// Coefficient of `r^power`, zero for powers outside the phase.
    pub fn beta(&self, power: u32) -> f64 {
        if power < self.index.m || power > self.index.n || !(power - self.index.m).is_multiple_of(2) {
            0.0
        } else {
            self.betas[((power - self.index.m) / 2) as usize]
        }
    }

    /// `theta(1) = sum_i beta_i`.
    pub fn boundary_sum(&self) -> f64 {
        self.betas.iter().sum()
    }

    pub fn boundary_tolerance(&self) -> f64 {
        let scale: f64 = self.betas.iter().map(|b| b.abs()).sum();
        BOUNDARY_TOLERANCE * scale.max(1.0)
    }

    /// `theta(r)` without the `|r| <= 1` check.
    #[inline]
    pub fn eval_unchecked(&self, r: f64) -> f64 {
        let x = r * r;
        let s = self.betas.iter().rev().fold(0.0, |acc, b| acc * x + b);
        r.powi(self.index.m as i32) * s
    }

    /// `theta'(r)`.
    pub fn derivative_unchecked(&self, r: f64) -> f64 {
        let m = self.index.m;
        let x = r * r;
        if m == 0 {
            // d/dr sum_j beta_j r^(2j) = r * sum_{j>=1} 2j beta_j x^(j-1)
            let s = self
                .betas
                .iter()
                .enumerate()
                .skip(1)
                .rev()
                .fold(0.0, |acc, (j, b)| acc * x + 2.0 * j as f64 * b);
            r * s
        } else {
            let s = self
                .betas
                .iter()
                .enumerate()
                .rev()
                .fold(0.0, |acc, (j, b)| acc * x + (m as usize + 2 * j) as f64 * b);
            r.powi(m as i32 - 1) * s
        }
    }
}

/// Bernstein coefficients of the reduced phase
/// `theta(r) = r^m theta(1) sum_i alpha_i B_{i,(n-m)/2}(r^2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedPhase {
    index: BasisIndex,
    alphas: Vec<f64>,
    boundary_value: f64,
}

impl ReducedPhase {
    pub fn new(index: BasisIndex, alphas: Vec<f64>, boundary_value: f64) -> Result<Self> {
        if alphas.len() != index.coefficient_count() {
            return Err(Error::Domain(format!(
                "reduced phase {index} needs {} coefficients, got {}",
                index.coefficient_count(),
                alphas.len()
            )));
        }
        let top = *alphas.last().unwrap();
        if (top - 1.0).abs() > TOP_ALPHA_TOLERANCE {
            return Err(Error::Domain(format!(
                "reduced phase {index}: top coefficient {top} is not pinned to 1"
            )));
        }
        if !boundary_value.is_finite() || boundary_value == 0.0 {
            return Err(Error::DegenerateBoundary {
                index,
                boundary: boundary_value,
            });
        }
        Ok(ReducedPhase {
            index,
            alphas,
            boundary_value,
        })
    }

    /// Reduced phase with the free coefficients `alpha_0..alpha_{L-1}`, the
    /// top one pinned to 1 and `theta(1)` set to the index's rim phase.
    pub fn with_free(index: BasisIndex, free: &[f64]) -> Result<Self> {
        let mut alphas = free.to_vec();
        alphas.push(1.0);
        Self::new(index, alphas, index.rim_phase())
    }

    pub fn index(&self) -> BasisIndex {
        self.index
    }

    pub fn alphas(&self) -> &[f64] {
        &self.alphas
    }

    /// The unknowns of the orthogonality system: every coefficient but the top.
    pub fn free_alphas(&self) -> &[f64] {
        &self.alphas[..self.alphas.len() - 1]
    }

    pub fn boundary_value(&self) -> f64 {
        self.boundary_value
    }

    /// `theta_bar(r) = sum_i alpha_i B_{i,(n-m)/2}(r^2)`.
    pub fn eval(&self, r: f64) -> Result<f64> {
        check_radius(r)?;
        let x = r * r;
        let degree = self.index.half_span();
        Ok(self
            .alphas
            .iter()
            .enumerate()
            .map(|(i, a)| a * bernstein::bernstein_unchecked(i, degree, x))
            .sum())
    }
}

/// `Q_{n,m}(r) = N sin(theta(r))`, or `N cos(theta(r))` for `m = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialFunction {
    phase: PhasePolynomial,
    normalization: f64,
    kind: Kind,
}

impl RadialFunction {
    pub fn new(phase: PhasePolynomial, normalization: f64) -> Result<Self> {
        let index = phase.index();
        if !normalization.is_finite() || normalization == 0.0 {
            return Err(Error::Domain(format!(
                "normalization of {index} must be finite and nonzero, got {normalization}"
            )));
        }
        Ok(RadialFunction {
            kind: index.kind(),
            phase,
            normalization,
        })
    }

    pub fn index(&self) -> BasisIndex {
        self.phase.index()
    }

    pub fn phase(&self) -> &PhasePolynomial {
        &self.phase
    }

    pub fn normalization(&self) -> f64 {
        self.normalization
    }

    pub fn kind(&self) -> Kind {
        self.kind
    }

    #[inline]
    pub fn eval_unchecked(&self, r: f64) -> f64 {
        self.normalization * self.kind.apply(self.phase.eval_unchecked(r))
    }
}

fn check_radius(r: f64) -> Result<()> {
    if r.is_nan() || r.abs() > 1.0 {
        Err(Error::Domain(format!("radius {r} outside [-1, 1]")))
    } else {
        Ok(())
    }
}

/// `theta_{n,m}(r)` for `-1 <= r <= 1`.
pub fn theta_eval(phase: &PhasePolynomial, r: f64) -> Result<f64> {
    check_radius(r)?;
    Ok(phase.eval_unchecked(r))
}

/// `Q_{n,m}(r)` for `-1 <= r <= 1`.
pub fn q_eval(f: &RadialFunction, r: f64) -> Result<f64> {
    check_radius(r)?;
    Ok(f.eval_unchecked(r))
}

/// Orthonormal azimuthal factor `M_m(phi)`.
pub fn azimuthal_eval(m: u32, phi: f64) -> f64 {
    let eps = if m == 0 { 1.0 } else { 2.0 };
    let scale = (eps / (2.0 * PI)).sqrt();
    let arg = m as f64 * phi;
    if m.is_multiple_of(2) {
        scale * arg.cos()
    } else {
        scale * arg.sin()
    }
}

/// Full circle function `M_m(phi) Q_{n,m}(r)` for `0 <= r <= 1`.
pub fn basis_eval(f: &RadialFunction, r: f64, phi: f64) -> Result<f64> {
    if r.is_nan() || !(0.0..=1.0).contains(&r) {
        return Err(Error::Domain(format!("radius {r} outside [0, 1]")));
    }
    Ok(azimuthal_eval(f.index().m(), phi) * f.eval_unchecked(r))
}

/// Expands a reduced phase into monomial coefficients over `r^m, r^(m+2), .., r^n`.
pub fn alpha_to_beta(rp: &ReducedPhase) -> PhasePolynomial {
    let bern = BernsteinVector::new(rp.alphas.clone()).expect("validated length");
    let betas = bernstein::bernstein_to_monomial(&bern)
        .into_iter()
        .map(|c| c * rp.boundary_value)
        .collect();
    PhasePolynomial::from_raw(rp.index, betas).expect("validated length")
}

/// Reduced Bernstein form of a phase polynomial.
pub fn beta_to_alpha(p: &PhasePolynomial) -> Result<ReducedPhase> {
    let boundary = p.boundary_sum();
    if boundary.abs() < 1e-14 {
        return Err(Error::DegenerateBoundary {
            index: p.index,
            boundary,
        });
    }
    let scaled: Vec<f64> = p.betas.iter().map(|b| b / boundary).collect();
    let alphas = bernstein::monomials_to_bernstein(&scaled)?.into_coeffs();
    ReducedPhase::new(p.index, alphas, boundary)
}
