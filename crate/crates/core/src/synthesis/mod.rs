//! Recursive construction of the radial functions without closed forms.
//!
//! For each azimuthal order `m` the functions are built in ascending `n`.
//! `(n, m)` has `(n - m)/2` free Bernstein coefficients, fixed by requiring
//! orthogonality to every `(n', m)` with `n' < n`; the square system is
//! solved by damped Newton iteration from a guess produced by one of the
//! registered [`GuessStrategy`] implementations. A converged phase is kept
//! only if it is monotone, otherwise the next strategy is tried.

pub mod guess;
pub mod system;

use nalgebra::DVector;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::closed_form;
use crate::error::{Error, Result};
use crate::quadrature::{integrate_samples, QuadratureConfig};
use crate::radial_basis::{alpha_to_beta, BasisIndex, Kind, PhasePolynomial, RadialFunction, ReducedPhase};
use crate::table::{CoefficientTable, Provenance, TableEntry};
use crate::verification::min_phase_slope;

pub use guess::{initial_guess, FirstOffDiagonal, GuessRegistry, GuessStrategy, Lifted};
pub use system::{jacobian, residuals, OrthogonalitySystem};

/// Smallest damping factor tried before the iteration is declared stalled.
const MIN_DAMPING: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthesisConfig {
    pub n_max: u32,
    /// Convergence threshold on the residual max-norm.
    pub newton_tolerance: f64,
    pub max_iterations: u32,
    pub damping_init: f64,
    pub damping_growth: f64,
    pub quadrature: QuadratureConfig,
    /// Points of the uniform grid on which `theta'` is checked.
    pub monotonicity_grid: usize,
    /// Lowest `theta'` sample still accepted as monotone.
    pub monotonicity_slack: f64,
    /// Guess strategies by registry name, in the order they are tried.
    pub guess_order: Vec<String>,
    /// Also run the `m = 0` and `m = 2` families through Newton instead of
    /// taking their closed forms. Used to put error bars on the solver.
    pub closed_form_diagnostics: bool,
}

impl Default for SynthesisConfig {
    fn default() -> Self {
        SynthesisConfig {
            n_max: 12,
            newton_tolerance: 1e-10,
            max_iterations: 100,
            damping_init: 0.5,
            damping_growth: 1.3,
            quadrature: QuadratureConfig::default(),
            monotonicity_grid: 4096,
            monotonicity_slack: -1e-9,
            guess_order: guess::default_order(),
            closed_form_diagnostics: false,
        }
    }
}

impl SynthesisConfig {
    pub fn with_n_max(n_max: u32) -> Self {
        SynthesisConfig {
            n_max,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.newton_tolerance > 0.0) {
            return Err(Error::Config(format!(
                "newton_tolerance must be positive, got {}",
                self.newton_tolerance
            )));
        }
        if !(self.damping_init > 0.0 && self.damping_init <= 1.0) {
            return Err(Error::Config(format!(
                "damping_init must lie in (0, 1], got {}",
                self.damping_init
            )));
        }
        if !(self.damping_growth > 1.0) {
            return Err(Error::Config(format!(
                "damping_growth must exceed 1, got {}",
                self.damping_growth
            )));
        }
        if self.monotonicity_grid < 2 {
            return Err(Error::Config("monotonicity_grid needs at least 2 points".into()));
        }
        if self.guess_order.is_empty() {
            return Err(Error::Config("guess_order is empty".into()));
        }
        self.quadrature.validate()
    }
}

/// How one index was solved.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthesisReport {
    pub index: BasisIndex,
    pub iterations: u32,
    pub final_residual: f64,
    /// Name of the guess strategy whose run was accepted.
    pub guess_strategy: String,
    /// Strategies tried and discarded before the accepted one.
    pub retries: u32,
}

struct NewtonRun {
    free: Vec<f64>,
    iterations: u32,
    residual: f64,
}

fn max_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |acc, x| acc.max(x.abs()))
}

/// Damped Newton on one system. The step is scaled by `lambda`, which grows
/// by `damping_growth` (up to 1) after every accepted step and is halved
/// whenever a trial step fails to reduce the residual max-norm.
fn damped_newton(
    system: &OrthogonalitySystem,
    start: &[f64],
    config: &SynthesisConfig,
    strategy: &str,
) -> Result<NewtonRun> {
    let index = system.index();
    let mut free = start.to_vec();
    let mut res = system.residuals(&free)?;
    let mut norm = max_norm(&res);
    let mut lambda = config.damping_init;
    let mut iterations = 0u32;

    let stalled = |iterations, residual| Error::NonConvergence {
        report: SynthesisReport {
            index,
            iterations,
            final_residual: residual,
            guess_strategy: strategy.to_string(),
            retries: 0,
        },
    };

    while norm > config.newton_tolerance {
        if iterations >= config.max_iterations {
            return Err(stalled(iterations, norm));
        }
        let jac = system.jacobian(&free)?;
        let rhs = -DVector::from_column_slice(&res);
        let step = jac
            .lu()
            .solve(&rhs)
            .filter(|s| s.iter().all(|x| x.is_finite()))
            .ok_or(Error::SingularSystem { index })?;
        iterations += 1;

        loop {
            let trial: Vec<f64> = free.iter().zip(step.iter()).map(|(a, d)| a + lambda * d).collect();
            let trial_res = system.residuals(&trial)?;
            let trial_norm = max_norm(&trial_res);
            if trial_norm < norm {
                free = trial;
                res = trial_res;
                norm = trial_norm;
                lambda = (lambda * config.damping_growth).min(1.0);
                break;
            }
            lambda *= 0.5;
            if lambda < MIN_DAMPING {
                return Err(stalled(iterations, norm));
            }
        }
    }
    Ok(NewtonRun {
        free,
        iterations,
        residual: norm,
    })
}

/// Established functions `(n', m)`, `n' < n`, pulled from a partial table.
fn established(index: BasisIndex, table: &CoefficientTable) -> Result<Vec<&RadialFunction>> {
    (index.m()..index.n())
        .step_by(2)
        .map(|n| table.function(BasisIndex::new(n, index.m())?))
        .collect()
}

/// Solves for the reduced phase of `(n, m)` with the default strategy registry.
pub fn newton_solve(
    n: u32,
    m: u32,
    table: &CoefficientTable,
    config: &SynthesisConfig,
) -> Result<(ReducedPhase, SynthesisReport)> {
    newton_solve_with(n, m, table, config, &GuessRegistry::default())
}

pub fn newton_solve_with(
    n: u32,
    m: u32,
    table: &CoefficientTable,
    config: &SynthesisConfig,
    registry: &GuessRegistry,
) -> Result<(ReducedPhase, SynthesisReport)> {
    config.validate()?;
    let index = BasisIndex::new(n, m)?;
    if index.half_span() == 0 {
        let phase = ReducedPhase::with_free(index, &[])?;
        let report = SynthesisReport {
            index,
            iterations: 0,
            final_residual: 0.0,
            guess_strategy: "closed_form".into(),
            retries: 0,
        };
        return Ok((phase, report));
    }

    let partners = established(index, table)?;
    let system = OrthogonalitySystem::new(index, &partners, &config.quadrature)?;
    let strategies: Vec<_> = registry
        .resolve(&config.guess_order)?
        .into_iter()
        .filter(|s| s.applies(index))
        .collect();
    if strategies.is_empty() {
        return Err(Error::NoApplicableGuess { index });
    }

    let mut first_error: Option<Error> = None;
    let mut rejected_slope: Option<f64> = None;
    for (attempt, strategy) in strategies.iter().enumerate() {
        let outcome = strategy
            .guess(index, table)
            .and_then(|g| damped_newton(&system, g.free_alphas(), config, strategy.name()));
        let run = match outcome {
            Ok(run) => run,
            Err(e) => {
                first_error.get_or_insert(e);
                continue;
            }
        };
        let reduced = ReducedPhase::with_free(index, &run.free)?;
        let (slope, _) = min_phase_slope(&alpha_to_beta(&reduced), config.monotonicity_grid);
        if slope < config.monotonicity_slack {
            rejected_slope = Some(rejected_slope.map_or(slope, |s: f64| s.min(slope)));
            continue;
        }
        let report = SynthesisReport {
            index,
            iterations: run.iterations,
            final_residual: run.residual,
            guess_strategy: strategy.name().to_string(),
            retries: attempt as u32,
        };
        return Ok((reduced, report));
    }
    match rejected_slope {
        Some(min_slope) => Err(Error::BranchRejected { index, min_slope }),
        None => Err(first_error.expect("at least one strategy ran")),
    }
}

/// Signed normalization making `int_0^1 r Q^2 dr = 1` with `Q(1) > 0`.
pub fn normalize(phase: &PhasePolynomial, quad: &QuadratureConfig) -> Result<f64> {
    let index = phase.index();
    let kind = index.kind();
    let samples: Vec<f64> = quad
        .nodes()
        .iter()
        .map(|&r| r * kind.apply(phase.eval_unchecked(r)).powi(2))
        .collect();
    let integral = integrate_samples(&samples, quad)?;
    if integral < 1e-14 {
        return Err(Error::DegenerateFunction { index, integral });
    }
    // kind(theta(1)) is sin((1+n-m) pi/2) = (-1)^((n-m)/2), or cos(n pi/2) for m = 0
    let flips = match kind {
        Kind::Sine => index.half_span(),
        Kind::Cosine => (index.n() / 2) as usize,
    };
    let sign = if flips % 2 == 0 { 1.0 } else { -1.0 };
    Ok(sign / integral.sqrt())
}

/// An index whose synthesis failed.
#[derive(Debug, Clone)]
pub struct SynthesisFailure {
    pub index: BasisIndex,
    pub error: Error,
}

/// Result of a table synthesis that keeps going past failures.
#[derive(Debug, Clone)]
pub struct SynthesisOutcome {
    /// Every entry that was produced; incomplete when anything failed.
    pub table: CoefficientTable,
    /// One report per Newton-solved index, ascending.
    pub reports: Vec<SynthesisReport>,
    pub failures: Vec<SynthesisFailure>,
    /// Indices never attempted because a lower `n` of the same `m` failed.
    pub blocked: Vec<BasisIndex>,
}

impl SynthesisOutcome {
    pub fn is_complete(&self) -> bool {
        self.failures.is_empty() && self.blocked.is_empty()
    }
}

struct FamilyOutcome {
    table: CoefficientTable,
    reports: Vec<SynthesisReport>,
    failure: Option<SynthesisFailure>,
    blocked: Vec<BasisIndex>,
}

fn uses_closed_form(index: BasisIndex, config: &SynthesisConfig) -> bool {
    let m = index.m();
    index.n() == m || (!config.closed_form_diagnostics && (m == 0 || m == 2))
}

fn synthesize_entry(
    index: BasisIndex,
    table: &CoefficientTable,
    config: &SynthesisConfig,
    registry: &GuessRegistry,
) -> Result<(TableEntry, SynthesisReport)> {
    let (reduced, report) = newton_solve_with(index.n(), index.m(), table, config, registry)?;
    let phase = PhasePolynomial::new(index, alpha_to_beta(&reduced).betas().to_vec())?;
    let normalization = normalize(&phase, &config.quadrature)?;
    let entry = TableEntry {
        function: RadialFunction::new(phase, normalization)?,
        reduced: Some(reduced),
        provenance: Provenance::Synthesized,
    };
    Ok((entry, report))
}

fn synthesize_family(m: u32, config: &SynthesisConfig, registry: &GuessRegistry) -> FamilyOutcome {
    let mut out = FamilyOutcome {
        table: CoefficientTable::new(config.n_max),
        reports: Vec::new(),
        failure: None,
        blocked: Vec::new(),
    };
    for n in (m..=config.n_max).step_by(2) {
        let index = BasisIndex::new(n, m).unwrap();
        if out.failure.is_some() {
            out.blocked.push(index);
            continue;
        }
        if uses_closed_form(index, config) {
            let f = closed_form::closed_form(index).expect("closed form exists");
            out.table
                .insert(TableEntry::new(f, Provenance::ClosedForm))
                .unwrap();
            continue;
        }
        match synthesize_entry(index, &out.table, config, registry) {
            Ok((entry, report)) => {
                out.table.insert(entry).unwrap();
                out.reports.push(report);
            }
            Err(error) => out.failure = Some(SynthesisFailure { index, error }),
        }
    }
    out
}

/// Builds every valid `(n, m)` up to `config.n_max`, continuing past
/// failures. Azimuthal families are independent and run in parallel.
pub fn synthesize(config: &SynthesisConfig) -> Result<SynthesisOutcome> {
    synthesize_with(config, &GuessRegistry::default())
}

pub fn synthesize_with(config: &SynthesisConfig, registry: &GuessRegistry) -> Result<SynthesisOutcome> {
    config.validate()?;
    registry.resolve(&config.guess_order)?;
    let families: Vec<FamilyOutcome> = (0..=config.n_max)
        .into_par_iter()
        .map(|m| synthesize_family(m, config, registry))
        .collect();

    let mut outcome = SynthesisOutcome {
        table: CoefficientTable::new(config.n_max),
        reports: Vec::new(),
        failures: Vec::new(),
        blocked: Vec::new(),
    };
    for family in families {
        outcome.table.merge(family.table);
        outcome.reports.extend(family.reports);
        outcome.failures.extend(family.failure);
        outcome.blocked.extend(family.blocked);
    }
    outcome.reports.sort_by_key(|r| r.index);
    outcome.failures.sort_by_key(|f| f.index);
    outcome.blocked.sort();
    Ok(outcome)
}

/// Complete table up to `config.n_max`, or the first failure.
pub fn synthesize_table(config: &SynthesisConfig) -> Result<CoefficientTable> {
    let outcome = synthesize(config)?;
    match outcome.failures.into_iter().next() {
        Some(failure) => Err(failure.error),
        None => Ok(outcome.table),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn idx(n: u32, m: u32) -> BasisIndex {
        BasisIndex::new(n, m).unwrap()
    }

    #[test]
    fn normalize_examples() {
        let q = QuadratureConfig::default();
        let n22 = normalize(&closed_form::diagonal_phase(2).unwrap(), &q).unwrap();
        assert!((n22 - 2.0).abs() < 1e-12);
        let n11 = normalize(&closed_form::diagonal_phase(1).unwrap(), &q).unwrap();
        assert!((n11 - closed_form::n11_exact()).abs() < 1e-12);
        let n42 = normalize(closed_form::family_m2(4).unwrap().phase(), &q).unwrap();
        assert!((n42 + 2.0).abs() < 1e-12);
        let n40 = normalize(closed_form::family_m0(2).unwrap().phase(), &q).unwrap();
        assert!((n40 + 2.0).abs() < 1e-12);
    }

    #[test]
    fn degenerate_phase_rejected() {
        let p = PhasePolynomial::from_raw(idx(1, 1), vec![0.0]).unwrap();
        assert!(matches!(
            normalize(&p, &QuadratureConfig::default()),
            Err(Error::DegenerateFunction { .. })
        ));
    }

    #[test]
    fn diagonal_is_trivial() {
        let t = CoefficientTable::new(3);
        let (rp, report) = newton_solve(3, 3, &t, &SynthesisConfig::default()).unwrap();
        assert_eq!(rp.alphas(), &[1.0]);
        assert_eq!(report.iterations, 0);
        assert_eq!(alpha_to_beta(&rp).betas(), &[FRAC_PI_2]);
    }

    #[test]
    fn first_off_diagonal_m2_is_exact() {
        let mut t = CoefficientTable::new(4);
        t.fill_closed_forms();
        let (rp, _) = newton_solve(4, 2, &t, &SynthesisConfig::default()).unwrap();
        for a in rp.alphas() {
            assert!((a - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn missing_prerequisites() {
        let t = CoefficientTable::new(5);
        assert!(matches!(
            newton_solve(5, 1, &t, &SynthesisConfig::default()),
            Err(Error::MissingEntry(_))
        ));
    }

    #[test]
    fn small_table_enumeration() {
        let t = synthesize_table(&SynthesisConfig::with_n_max(2)).unwrap();
        let got: Vec<_> = t.indices().collect();
        assert_eq!(got, vec![idx(0, 0), idx(1, 1), idx(2, 0), idx(2, 2)]);
        assert!(t.entries().all(|e| e.provenance == Provenance::ClosedForm));
    }

    #[test]
    fn config_validation() {
        let mut c = SynthesisConfig::default();
        c.damping_init = 0.0;
        assert!(c.validate().is_err());
        let mut c = SynthesisConfig::default();
        c.newton_tolerance = -1.0;
        assert!(c.validate().is_err());
        let mut c = SynthesisConfig::default();
        c.guess_order = vec!["bogus".into()];
        assert!(synthesize(&c).is_err());
    }

    #[test]
    fn unknown_orders_need_strategies() {
        let mut t = CoefficientTable::new(7);
        t.fill_closed_forms();
        let mut c = SynthesisConfig::default();
        c.guess_order = vec![FirstOffDiagonal::NAME.into()];
        let (_, r) = newton_solve(3, 1, &t, &c).unwrap();
        assert_eq!(r.guess_strategy, "heuristic");
        t.insert(TableEntry {
            function: RadialFunction::new(
                PhasePolynomial::new(idx(3, 1), vec![PI, PI / 2.0]).unwrap(),
                1.0,
            )
            .unwrap(),
            reduced: None,
            provenance: Provenance::Synthesized,
        })
        .unwrap();
        assert!(matches!(
            newton_solve(5, 1, &t, &c),
            Err(Error::NoApplicableGuess { .. })
        ));
    }
}
