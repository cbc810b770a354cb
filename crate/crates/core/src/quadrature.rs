//! Romberg integration over `[0, 1]` on a fixed dyadic grid.
//!
//! The trapezoid rule is refined by interval halving from one interval up to
//! `sample_count - 1` intervals, and the sequence is extrapolated with the
//! usual Richardson table. Every integrand in this crate is smooth (sines of
//! low-degree polynomials), so no adaptive subdivision is attempted.
//!
//! Two entry points share one Richardson core: [`integrate`] samples a closure
//! level by level, [`integrate_samples`] consumes values already tabulated on
//! [`QuadratureConfig::nodes`]. For the same integrand both return the same
//! bits, which lets the Newton solver precompute integrand factors once.

use crate::error::{Error, Result};

/// Rows of the Richardson table before an early exit is allowed.
///
/// Agreement between very coarse trapezoid sums of an oscillatory integrand
/// is usually an accident of the node placement.
const MIN_EXIT_ROW: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct QuadratureConfig {
    /// Number of grid nodes including both end points; `sample_count - 1`
    /// must be a power of two.
    pub sample_count: usize,
    /// Maximum number of Richardson extrapolation columns.
    pub max_romberg_level: usize,
    /// Early exit threshold on successive diagonal entries.
    pub abs_tolerance: f64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig {
            sample_count: 4097,
            max_romberg_level: 12,
            abs_tolerance: 1e-12,
        }
    }
}

impl QuadratureConfig {
    /// Default configuration with `intervals` trapezoid panels at the finest level.
    pub fn with_intervals(intervals: usize) -> Result<Self> {
        let config = QuadratureConfig {
            sample_count: intervals + 1,
            ..Default::default()
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        let intervals = self.sample_count.saturating_sub(1);
        if intervals == 0 || !intervals.is_power_of_two() {
            return Err(Error::Config(format!(
                "sample_count - 1 must be a power of two, got sample_count = {}",
                self.sample_count
            )));
        }
        if !(self.abs_tolerance > 0.0) {
            return Err(Error::Config(format!(
                "abs_tolerance must be positive, got {}",
                self.abs_tolerance
            )));
        }
        Ok(())
    }

    pub fn intervals(&self) -> usize {
        self.sample_count - 1
    }

    /// Number of halvings from one interval to the finest grid.
    pub fn levels(&self) -> usize {
        self.intervals().trailing_zeros() as usize
    }

    /// Abscissae `k / intervals`, `k = 0..=intervals`.
    pub fn nodes(&self) -> Vec<f64> {
        let n = self.intervals() as f64;
        (0..self.sample_count).map(|k| k as f64 / n).collect()
    }
}

/// Romberg integral of `f` over `[0, 1]`.
pub fn integrate<F>(f: F, config: &QuadratureConfig) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    config.validate()?;
    let eval = |r: f64| -> Result<f64> {
        let v = f(r);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonFiniteIntegrand {
                abscissa: r,
                value: v,
            })
        }
    };
    romberg(config, |level| {
        if level == 0 {
            return Ok(0.5 * (eval(0.0)? + eval(1.0)?));
        }
        let denom = (1usize << level) as f64;
        let mut sum = 0.0;
        for t in 0..(1usize << (level - 1)) {
            sum += eval((2 * t + 1) as f64 / denom)?;
        }
        Ok(sum)
    })
}

/// Romberg integral of values tabulated on `config.nodes()`.
pub fn integrate_samples(samples: &[f64], config: &QuadratureConfig) -> Result<f64> {
    config.validate()?;
    if samples.len() != config.sample_count {
        return Err(Error::Precondition(format!(
            "expected {} samples, got {}",
            config.sample_count,
            samples.len()
        )));
    }
    let intervals = config.intervals();
    let pick = |k: usize| -> Result<f64> {
        let v = samples[k];
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonFiniteIntegrand {
                abscissa: k as f64 / intervals as f64,
                value: v,
            })
        }
    };
    romberg(config, |level| {
        if level == 0 {
            return Ok(0.5 * (pick(0)? + pick(intervals)?));
        }
        let stride = intervals >> level;
        let mut sum = 0.0;
        for t in 0..(1usize << (level - 1)) {
            sum += pick((2 * t + 1) * stride)?;
        }
        Ok(sum)
    })
}

/// Richardson core. `new_points(level)` returns the sum of integrand values at
/// the nodes first introduced at `level` (for level 0, the averaged end points).
fn romberg<S>(config: &QuadratureConfig, mut new_points: S) -> Result<f64>
where
    S: FnMut(usize) -> Result<f64>,
{
    let levels = config.levels();
    let depth = config.max_romberg_level;
    let mut prev: Vec<f64> = Vec::with_capacity(depth + 1);
    let mut row: Vec<f64> = Vec::with_capacity(depth + 1);

    let mut trapezoid = new_points(0)?;
    prev.push(trapezoid);
    for k in 1..=levels {
        let h = 1.0 / (1usize << k) as f64;
        trapezoid = 0.5 * trapezoid + h * new_points(k)?;

        row.clear();
        row.push(trapezoid);
        let mut factor = 1.0;
        for j in 1..=k.min(depth) {
            factor *= 4.0;
            let refined = row[j - 1] + (row[j - 1] - prev[j - 1]) / (factor - 1.0);
            row.push(refined);
        }

        let best = *row.last().unwrap();
        let previous_best = *prev.last().unwrap();
        if k >= MIN_EXIT_ROW.min(levels) && (best - previous_best).abs() < config.abs_tolerance {
            return Ok(best);
        }
        std::mem::swap(&mut prev, &mut row);
    }
    Ok(*prev.last().unwrap())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn linear_integrand() {
        let v = integrate(|r| r, &QuadratureConfig::default()).unwrap();
        assert!((v - 0.5).abs() < 1e-15);
    }

    #[test]
    fn chirp_pair_is_orthogonal() {
        let v = integrate(
            |r| r * (PI * r * r).sin() * (2.0 * PI * r * r).sin(),
            &QuadratureConfig::default(),
        )
        .unwrap();
        assert!(v.abs() < 1e-12, "{v}");
    }

    #[test]
    fn chirp_square_is_quarter() {
        let v = integrate(|r| r * (PI * r * r).sin().powi(2), &QuadratureConfig::default()).unwrap();
        assert!((v - 0.25).abs() < 1e-12, "{v}");
    }

    #[test]
    fn cubic_is_exact() {
        let f = |r: f64| 3.0 * r * r * r - 2.0 * r * r + r - 7.0;
        let exact = 0.75 - 2.0 / 3.0 + 0.5 - 7.0;
        let v = integrate(f, &QuadratureConfig::default()).unwrap();
        assert!((v - exact).abs() < 4.0 * f64::EPSILON * 7.0);
    }

    #[test]
    fn halving_changes_little() {
        let f = |r: f64| r * (10.0 * PI * r * r).sin();
        let fine = integrate(f, &QuadratureConfig::default()).unwrap();
        let coarse = integrate(f, &QuadratureConfig::with_intervals(2048).unwrap()).unwrap();
        assert!((fine - coarse).abs() < 1e-9);
    }

    #[test]
    fn samples_and_closure_agree_bitwise() {
        let config = QuadratureConfig::default();
        let f = |r: f64| r * (3.7 * r * r + 1.1 * r.powi(4)).sin();
        let samples: Vec<f64> = config.nodes().iter().map(|&r| f(r)).collect();
        let a = integrate(f, &config).unwrap();
        let b = integrate_samples(&samples, &config).unwrap();
        assert_eq!(a.to_bits(), b.to_bits());
    }

    #[test]
    fn non_finite_integrand_reports_abscissa() {
        let err = integrate(|r| if r == 0.5 { f64::NAN } else { r }, &QuadratureConfig::default())
            .unwrap_err();
        match err {
            Error::NonFiniteIntegrand { abscissa, .. } => assert_eq!(abscissa, 0.5),
            e => panic!("unexpected {e:?}"),
        }
    }

    #[test]
    fn rejects_bad_configs() {
        let bad = QuadratureConfig {
            sample_count: 4096,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let bad = QuadratureConfig {
            abs_tolerance: 0.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        assert!(integrate_samples(&[0.0; 3], &QuadratureConfig::default()).is_err());
    }
}
