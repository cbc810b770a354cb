//! Members of the basis known in closed form: the piston, the `m = 0` and
//! `m = 2` families with quadratic phases, and the diagonal `n = m` phases
//! `theta = (pi/2) r^n` whose normalization follows from a power series.

use std::f64::consts::{FRAC_PI_2, PI, SQRT_2};

use crate::error::{Error, Result};
use crate::radial_basis::{BasisIndex, PhasePolynomial, RadialFunction};

/// Series terms below this magnitude end the normalization sum.
const SERIES_CUTOFF: f64 = 1e-16;

/// `Q_{0,0}(r) = sqrt(2)`.
pub fn piston() -> RadialFunction {
    let index = BasisIndex::new(0, 0).unwrap();
    RadialFunction::new(PhasePolynomial::new(index, vec![0.0]).unwrap(), SQRT_2).unwrap()
}

fn check_even_family(n: u32, family: &str) -> Result<()> {
    if n < 2 || !n.is_multiple_of(2) {
        Err(Error::Domain(format!(
            "{family} family needs an even n >= 2, got {n}"
        )))
    } else {
        Ok(())
    }
}

/// Quadratic phase `theta = c r^2` carried in a coefficient vector over the
/// index's powers.
fn quadratic_phase(index: BasisIndex, coefficient: f64) -> PhasePolynomial {
    let mut betas = vec![0.0; index.coefficient_count()];
    // power 2 sits at slot (2 - m) / 2
    betas[((2 - index.m()) / 2) as usize] = coefficient;
    PhasePolynomial::new(index, betas).expect("closed form satisfies the rim clamp")
}

/// `Q_{n,0} = (-1)^(n/2) 2 cos(n pi/2 r^2)` for even `n >= 2`.
pub fn family_m0(n: u32) -> Result<RadialFunction> {
    check_even_family(n, "m = 0")?;
    let index = BasisIndex::new(n, 0)?;
    let phase = quadratic_phase(index, n as f64 * FRAC_PI_2);
    let sign = if (n / 2).is_multiple_of(2) { 1.0 } else { -1.0 };
    RadialFunction::new(phase, 2.0 * sign)
}

/// `Q_{n,2} = (-1)^(1+n/2) 2 sin((n-1) pi/2 r^2)` for even `n >= 2`.
pub fn family_m2(n: u32) -> Result<RadialFunction> {
    check_even_family(n, "m = 2")?;
    let index = BasisIndex::new(n, 2)?;
    let phase = quadratic_phase(index, (n - 1) as f64 * FRAC_PI_2);
    let sign = if (1 + n / 2).is_multiple_of(2) { 1.0 } else { -1.0 };
    RadialFunction::new(phase, 2.0 * sign)
}

/// `theta_{n,n}(r) = (pi/2) r^n`.
pub fn diagonal_phase(n: u32) -> Result<PhasePolynomial> {
    if n < 1 {
        return Err(Error::Domain("diagonal phase needs n >= 1".into()));
    }
    PhasePolynomial::new(BasisIndex::new(n, n)?, vec![FRAC_PI_2])
}

/// `int_0^1 r sin^2(pi r^n / 2) dr` from its alternating power series
/// `sum_{k>=1} (-1)^(k+1) pi^(2k) / (2 (2kn+2) (2k)!)`.
pub fn diagonal_norm_integral(n: u32) -> f64 {
    let n = n as f64;
    let pi2 = PI * PI;
    // pi^(2k) / (2k)!
    let mut power_ratio = pi2 / 2.0;
    let mut sum = 0.0;
    let mut k = 1u32;
    loop {
        let kf = k as f64;
        let term = power_ratio / (2.0 * (2.0 * kf * n + 2.0));
        if k % 2 == 1 {
            sum += term;
        } else {
            sum -= term;
        }
        // terms shrink monotonically once past the k = 1 peak
        if term < SERIES_CUTOFF && k > 2 {
            break;
        }
        power_ratio *= pi2 / ((2.0 * kf + 1.0) * (2.0 * kf + 2.0));
        k += 1;
    }
    sum
}

/// Positive normalization `N_{n,n}` of the diagonal function.
pub fn diagonal_norm(n: u32) -> Result<f64> {
    if n < 1 {
        return Err(Error::Domain("diagonal normalization needs n >= 1".into()));
    }
    Ok(diagonal_norm_integral(n).sqrt().recip())
}

/// `N_{1,1} = 2 pi / sqrt(pi^2 + 4)`.
pub fn n11_exact() -> f64 {
    2.0 * PI / (PI * PI + 4.0).sqrt()
}

/// `Q_{n,n} = N_{n,n} sin((pi/2) r^n)`.
pub fn diagonal(n: u32) -> Result<RadialFunction> {
    RadialFunction::new(diagonal_phase(n)?, diagonal_norm(n)?)
}

/// Closed form for `index` when one exists: piston, `m = 0`, `m = 2`, or `n = m`.
pub fn closed_form(index: BasisIndex) -> Option<RadialFunction> {
    let (n, m) = (index.n(), index.m());
    match (n, m) {
        (0, 0) => Some(piston()),
        (_, 0) => family_m0(n).ok(),
        (_, 2) => family_m2(n).ok(),
        _ if n == m => diagonal(n).ok(),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::{integrate, QuadratureConfig};
    use crate::radial_basis::{q_eval, theta_eval};

    #[test]
    fn piston_examples() {
        let p = piston();
        assert_eq!(q_eval(&p, 0.0).unwrap(), SQRT_2);
        assert_eq!(q_eval(&p, 1.0).unwrap(), SQRT_2);
        let norm = integrate(|r| r * q_eval(&p, r).unwrap().powi(2), &QuadratureConfig::default()).unwrap();
        assert!((norm - 1.0).abs() < 1e-14);
    }

    #[test]
    fn m0_examples() {
        let q2 = family_m0(2).unwrap();
        assert_eq!(q2.normalization(), -2.0);
        assert_eq!(q2.phase().beta(2), PI);
        let q4 = family_m0(4).unwrap();
        assert_eq!(q4.normalization(), 2.0);
        assert_eq!(q4.phase().beta(2), 2.0 * PI);
        assert_eq!(q4.phase().beta(0), 0.0);
        assert_eq!(q4.phase().beta(4), 0.0);
        let overlap = integrate(
            |r| r * q_eval(&q2, r).unwrap() * q_eval(&q4, r).unwrap(),
            &QuadratureConfig::default(),
        )
        .unwrap();
        assert!(overlap.abs() < 1e-12);
        assert!(family_m0(3).is_err());
        assert!(family_m0(0).is_err());
    }

    #[test]
    fn m2_examples() {
        let q2 = family_m2(2).unwrap();
        assert_eq!(q2.phase().beta(2), FRAC_PI_2);
        assert_eq!(q2.normalization(), 2.0);
        let q6 = family_m2(6).unwrap();
        assert_eq!(q6.phase().beta(2), 5.0 * FRAC_PI_2);
        assert_eq!(q6.normalization(), 2.0);
        assert_eq!(family_m2(4).unwrap().normalization(), -2.0);
        let q4 = family_m2(4).unwrap();
        let overlap = integrate(
            |r| r * q_eval(&q4, r).unwrap() * q_eval(&q6, r).unwrap(),
            &QuadratureConfig::default(),
        )
        .unwrap();
        assert!(overlap.abs() < 1e-12);
        assert!(family_m2(5).is_err());
    }

    #[test]
    fn diagonal_phase_examples() {
        let p1 = diagonal_phase(1).unwrap();
        assert_eq!(theta_eval(&p1, 0.5).unwrap(), FRAC_PI_2 * 0.5);
        assert_eq!(theta_eval(&diagonal_phase(3).unwrap(), 1.0).unwrap(), FRAC_PI_2);
        assert_eq!(diagonal_phase(2).unwrap(), *family_m2(2).unwrap().phase());
        assert!(diagonal_phase(0).is_err());
    }

    #[test]
    fn printed_diagonal_norms() {
        let printed = [
            (1, 1.68712721613),
            (2, 2.0),
            (3, 2.27799236632),
            (4, 2.52776603703),
            (5, 2.75587198375),
        ];
        for (n, v) in printed {
            assert!((diagonal_norm(n).unwrap() - v).abs() < 1e-9, "n={n}");
        }
        assert!((diagonal_norm(1).unwrap() - n11_exact()).abs() < 1e-12);
        assert!((diagonal_norm(2).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn series_agrees_with_quadrature() {
        let config = QuadratureConfig::default();
        for n in 1..=22u32 {
            let quad = integrate(
                |r| r * (FRAC_PI_2 * r.powi(n as i32)).sin().powi(2),
                &config,
            )
            .unwrap();
            assert!((quad - diagonal_norm_integral(n)).abs() < 1e-10, "n={n}");
        }
    }

    #[test]
    fn closed_form_dispatch() {
        let idx = |n, m| BasisIndex::new(n, m).unwrap();
        assert!(closed_form(idx(0, 0)).is_some());
        assert!(closed_form(idx(6, 0)).is_some());
        assert!(closed_form(idx(6, 2)).is_some());
        assert!(closed_form(idx(5, 5)).is_some());
        assert!(closed_form(idx(5, 3)).is_none());
        assert!(closed_form(idx(5, 1)).is_none());
    }
}
