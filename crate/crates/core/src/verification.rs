//! Audits of a coefficient table: orthogonality, phase monotonicity, the
//! equal-amplitude extrema, extremum counts across azimuthal orders, and
//! the classical Zernike radial polynomials used for comparison curves.
//!
//! Extrema are located through phase crossings: on a monotone phase,
//! `sin(theta)` peaks where `theta = (2k+1) pi/2` and `cos(theta)` where
//! `theta = k pi`, found by bisection on `theta`.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt::Write as _;

use nalgebra::DMatrix;

use crate::bernstein::{binomial, MAX_DEGREE};
use crate::error::{Error, Result};
use crate::quadrature::{integrate_samples, QuadratureConfig};
use crate::radial_basis::{BasisIndex, Kind, PhasePolynomial, RadialFunction};
use crate::table::CoefficientTable;

pub const DEFAULT_MONOTONICITY_GRID: usize = 4096;
pub const DEFAULT_MONOTONICITY_SLACK: f64 = -1e-9;
/// Bisection stops once the bracket on `r` is this narrow.
const CROSSING_TOLERANCE: f64 = 1e-12;

/// Smallest `theta'(r)` on `grid` uniform points spanning `[0, 1]`, and where.
pub fn min_phase_slope(phase: &PhasePolynomial, grid: usize) -> (f64, f64) {
    let last = (grid.max(2) - 1) as f64;
    (0..grid.max(2))
        .map(|k| {
            let r = k as f64 / last;
            (phase.derivative_unchecked(r), r)
        })
        .fold((f64::INFINITY, 0.0), |best, cur| if cur.0 < best.0 { cur } else { best })
}

pub fn is_monotone(phase: &PhasePolynomial, grid: usize, slack: f64) -> bool {
    min_phase_slope(phase, grid).0 >= slack
}

/// Overlap matrix `G[a][b] = int_0^1 r Q_a Q_b dr` over the `m` family,
/// rows ascending in `n` up to the table's `n_max`.
pub fn gram_matrix(table: &CoefficientTable, m: u32, quad: &QuadratureConfig) -> Result<DMatrix<f64>> {
    quad.validate()?;
    if m > table.n_max() {
        return Err(Error::Precondition(format!(
            "no functions of order m = {m} below n_max = {}",
            table.n_max()
        )));
    }
    let members: Vec<&RadialFunction> = (m..=table.n_max())
        .step_by(2)
        .map(|n| table.function(BasisIndex::new(n, m)?))
        .collect::<Result<_>>()?;
    gram_of(&members, quad)
}

fn gram_of(members: &[&RadialFunction], quad: &QuadratureConfig) -> Result<DMatrix<f64>> {
    let nodes = quad.nodes();
    let samples: Vec<Vec<f64>> = members
        .iter()
        .map(|f| nodes.iter().map(|&r| f.eval_unchecked(r)).collect())
        .collect();
    let size = members.len();
    let mut gram = DMatrix::zeros(size, size);
    let mut buffer = vec![0.0; nodes.len()];
    for a in 0..size {
        for b in a..size {
            for (k, v) in buffer.iter_mut().enumerate() {
                *v = nodes[k] * samples[a][k] * samples[b][k];
            }
            let value = integrate_samples(&buffer, quad)?;
            gram[(a, b)] = value;
            gram[(b, a)] = value;
        }
    }
    Ok(gram)
}

/// One local extremum of `Q` on `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtremumRecord {
    pub r_location: f64,
    pub amplitude: f64,
    /// `k` of the crossing `theta = (2k+1) pi/2` (sine) or `theta = k pi` (cosine).
    pub phase_multiple: u32,
    /// Signed value `Q(r_location)`.
    pub value: f64,
}

fn crossing(phase: &PhasePolynomial, target: f64, rim: f64, rim_tol: f64) -> f64 {
    if (rim - target).abs() <= rim_tol {
        return 1.0;
    }
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    while hi - lo > CROSSING_TOLERANCE {
        let mid = 0.5 * (lo + hi);
        if phase.eval_unchecked(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Extrema of `Q` located through phase crossings.
///
/// For sine functions the crossings are `theta = (2k+1) pi/2`,
/// `k = 0..=(n-m)/2`, the last one at the rim. For cosine functions the
/// origin is an extremum and the rest sit at `theta = k pi`.
pub fn extrema_report(f: &RadialFunction) -> Result<Vec<ExtremumRecord>> {
    let phase = f.phase();
    let (slope, at) = min_phase_slope(phase, DEFAULT_MONOTONICITY_GRID);
    if slope < DEFAULT_MONOTONICITY_SLACK {
        return Err(Error::Domain(format!(
            "phase of {} is not monotone: theta'({at}) = {slope:e}",
            f.index()
        )));
    }
    let rim = phase.eval_unchecked(1.0);
    let rim_tol = phase.boundary_tolerance();
    let record = |r: f64, k: u32| {
        let value = f.eval_unchecked(r);
        ExtremumRecord {
            r_location: r,
            amplitude: value.abs(),
            phase_multiple: k,
            value,
        }
    };

    let mut records = Vec::new();
    let (first, spacing, offset) = match f.kind() {
        Kind::Sine => (0u32, PI, FRAC_PI_2),
        Kind::Cosine => {
            records.push(record(0.0, 0));
            (1u32, PI, 0.0)
        }
    };
    let mut k = first;
    loop {
        let target = offset + k as f64 * spacing;
        if target > rim + rim_tol || target <= 0.0 && f.kind() == Kind::Sine && k > 0 {
            break;
        }
        records.push(record(crossing(phase, target, rim, rim_tol), k));
        k += 1;
    }
    Ok(records)
}

/// Outcome of the "one more extremum when `m` drops by two" audit.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ExtremumCountReport {
    /// `(index, count(index), count(n, m-2))` for every pair checked.
    pub checked: Vec<(BasisIndex, usize, usize)>,
    pub violations: Vec<BasisIndex>,
}

impl ExtremumCountReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

pub fn count_extrema_consistency(table: &CoefficientTable) -> Result<ExtremumCountReport> {
    let mut report = ExtremumCountReport::default();
    for entry in table.entries() {
        let index = entry.index();
        if index.m() < 2 {
            continue;
        }
        let lower = BasisIndex::new(index.n(), index.m() - 2)?;
        let Some(lower_entry) = table.get(lower) else {
            continue;
        };
        let upper_count = extrema_report(&entry.function).map(|r| r.len());
        let lower_count = extrema_report(&lower_entry.function).map(|r| r.len());
        match (upper_count, lower_count) {
            (Ok(u), Ok(l)) => {
                report.checked.push((index, u, l));
                if l != u + 1 {
                    report.violations.push(index);
                }
            }
            _ => report.violations.push(index),
        }
    }
    Ok(report)
}

/// Classical Zernike radial polynomial `R_n^m(r)`.
pub fn zernike_radial(n: u32, m: u32, r: f64) -> Result<f64> {
    let index = BasisIndex::new(n, m)?;
    if n as usize > MAX_DEGREE {
        return Err(Error::Domain(format!("Zernike order {n} above {MAX_DEGREE}")));
    }
    if r.is_nan() || !(0.0..=1.0).contains(&r) {
        return Err(Error::Domain(format!("radius {r} outside [0, 1]")));
    }
    let (n, half) = (n as usize, index.half_span());
    // (n-k)! / (k! ((n+m)/2-k)! ((n-m)/2-k)!) = C(n-k, k) C(n-2k, (n-m)/2-k)
    Ok((0..=half)
        .map(|k| {
            let c = binomial(n - k, k) * binomial(n - 2 * k, half - k);
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            sign * c * r.powi((n - 2 * k) as i32)
        })
        .sum())
}

/// Thresholds for [`run_checks`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CheckTolerances {
    pub gram_off_diagonal: f64,
    pub gram_diagonal: f64,
    pub amplitude: f64,
    pub monotonicity_grid: usize,
    pub monotonicity_slack: f64,
    pub quadrature: QuadratureConfig,
}

impl Default for CheckTolerances {
    fn default() -> Self {
        CheckTolerances {
            gram_off_diagonal: 1e-6,
            gram_diagonal: 1e-4,
            amplitude: 1e-9,
            monotonicity_grid: DEFAULT_MONOTONICITY_GRID,
            monotonicity_slack: DEFAULT_MONOTONICITY_SLACK,
            quadrature: QuadratureConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteResult {
    pub name: &'static str,
    /// Worst deviation found; what it measures depends on the suite.
    pub worst: f64,
    pub tolerance: f64,
    pub offenders: Vec<BasisIndex>,
}

impl SuiteResult {
    pub fn passed(&self) -> bool {
        self.offenders.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct CheckReport {
    pub suites: Vec<SuiteResult>,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.suites.iter().all(SuiteResult::passed)
    }

    pub fn offenders(&self) -> Vec<BasisIndex> {
        let mut all: Vec<BasisIndex> = self.suites.iter().flat_map(|s| s.offenders.clone()).collect();
        all.sort();
        all.dedup();
        all
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for s in &self.suites {
            let _ = write!(
                out,
                "{:<16} worst {:>12.4e}  tol {:>9.1e}  {}",
                s.name,
                s.worst,
                s.tolerance,
                if s.passed() { "PASS" } else { "FAIL" }
            );
            if !s.passed() {
                let names: Vec<String> = s.offenders.iter().map(ToString::to_string).collect();
                let _ = write!(out, "  offenders: {}", names.join(" "));
            }
            out.push('\n');
        }
        out
    }
}

fn boundary_suite(table: &CoefficientTable) -> SuiteResult {
    let mut worst: f64 = 0.0;
    let mut offenders = Vec::new();
    for e in table.entries() {
        let phase = e.function.phase();
        let dev = (phase.boundary_sum() - e.index().rim_phase()).abs();
        let scale = phase.boundary_tolerance() / crate::radial_basis::BOUNDARY_TOLERANCE;
        worst = worst.max(dev / scale);
        if dev > phase.boundary_tolerance() {
            offenders.push(e.index());
        }
    }
    SuiteResult {
        // relative to max(1, sum |beta|)
        name: "boundary",
        worst,
        tolerance: crate::radial_basis::BOUNDARY_TOLERANCE,
        offenders,
    }
}

fn gram_suites(table: &CoefficientTable, tol: &CheckTolerances) -> Result<[SuiteResult; 2]> {
    let mut diagonal = SuiteResult {
        name: "gram_diagonal",
        worst: 0.0,
        tolerance: tol.gram_diagonal,
        offenders: Vec::new(),
    };
    let mut off_diagonal = SuiteResult {
        name: "gram_off_diag",
        worst: 0.0,
        tolerance: tol.gram_off_diagonal,
        offenders: Vec::new(),
    };
    for m in table.azimuthal_orders() {
        let family = table.family(m);
        let members: Vec<&RadialFunction> = family.iter().map(|e| &e.function).collect();
        let gram = gram_of(&members, &tol.quadrature)?;
        let size = members.len();
        let mut row_violations = vec![0usize; size];
        for a in 0..size {
            let diag = (gram[(a, a)] - 1.0).abs();
            diagonal.worst = diagonal.worst.max(diag);
            if diag > tol.gram_diagonal {
                diagonal.offenders.push(members[a].index());
            }
            for b in (0..size).filter(|&b| b != a) {
                let off = gram[(a, b)].abs();
                off_diagonal.worst = off_diagonal.worst.max(off);
                if off > tol.gram_off_diagonal {
                    row_violations[a] += 1;
                }
            }
        }
        // blame the rows with the most off-diagonal violations
        let most = row_violations.iter().copied().max().unwrap_or(0);
        for a in 0..size {
            if most > 0 && row_violations[a] == most {
                off_diagonal.offenders.push(members[a].index());
            }
        }
    }
    diagonal.offenders.sort();
    off_diagonal.offenders.sort();
    Ok([diagonal, off_diagonal])
}

fn monotonicity_suite(table: &CoefficientTable, tol: &CheckTolerances) -> SuiteResult {
    let mut worst = f64::INFINITY;
    let mut offenders = Vec::new();
    for e in table.entries() {
        let (slope, _) = min_phase_slope(e.function.phase(), tol.monotonicity_grid);
        worst = worst.min(slope);
        if slope < tol.monotonicity_slack {
            offenders.push(e.index());
        }
    }
    SuiteResult {
        name: "monotonicity",
        worst: if worst.is_finite() { worst } else { 0.0 },
        tolerance: tol.monotonicity_slack,
        offenders,
    }
}

/// Number of extrema a function of this index must show.
pub fn expected_extremum_count(index: BasisIndex) -> usize {
    match index.kind() {
        Kind::Sine => index.half_span() + 1,
        Kind::Cosine => (index.n() / 2) as usize + 1,
    }
}

fn minimax_suite(table: &CoefficientTable, tol: &CheckTolerances) -> SuiteResult {
    let mut worst: f64 = 0.0;
    let mut offenders = Vec::new();
    for e in table.entries() {
        let f = &e.function;
        let Ok(records) = extrema_report(f) else {
            offenders.push(e.index());
            continue;
        };
        let level = f.normalization().abs();
        let mut ok = records.len() == expected_extremum_count(e.index());
        for rec in &records {
            let dev = (rec.amplitude - level).abs();
            worst = worst.max(dev);
            ok &= dev <= tol.amplitude;
        }
        if e.index().n() > 0 {
            ok &= records
                .last()
                .is_some_and(|last| last.r_location == 1.0 && last.value > 0.0);
        }
        if !ok {
            offenders.push(e.index());
        }
    }
    SuiteResult {
        name: "minimax",
        worst,
        tolerance: tol.amplitude,
        offenders,
    }
}

fn extremum_count_suite(table: &CoefficientTable) -> Result<SuiteResult> {
    let report = count_extrema_consistency(table)?;
    Ok(SuiteResult {
        name: "extremum_count",
        worst: report.violations.len() as f64,
        tolerance: 0.0,
        offenders: report.violations,
    })
}

/// Runs every audit over a complete table.
pub fn run_checks(table: &CoefficientTable, tol: &CheckTolerances) -> Result<CheckReport> {
    table.require_complete()?;
    let [diagonal, off_diagonal] = gram_suites(table, tol)?;
    Ok(CheckReport {
        suites: vec![
            boundary_suite(table),
            off_diagonal,
            diagonal,
            monotonicity_suite(table, tol),
            minimax_suite(table, tol),
            extremum_count_suite(table)?,
        ],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closed_form;

    fn closed_table(n_max: u32) -> CoefficientTable {
        let mut t = CoefficientTable::new(n_max);
        t.fill_closed_forms();
        t
    }

    #[test]
    fn closed_form_grams_are_identity() {
        let q = QuadratureConfig::default();
        for (m, n_max) in [(0, 4), (2, 6)] {
            let g = gram_matrix(&closed_table(n_max), m, &q).unwrap();
            let eye = DMatrix::<f64>::identity(g.nrows(), g.ncols());
            assert!((g - eye).amax() < 1e-10);
        }
        let g = gram_matrix(&closed_table(1), 1, &q).unwrap();
        assert_eq!(g.shape(), (1, 1));
        assert!((g[(0, 0)] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn gram_needs_complete_family() {
        let t = closed_table(3); // (3,1) has no closed form
        assert!(matches!(
            gram_matrix(&t, 1, &QuadratureConfig::default()),
            Err(Error::MissingEntry(_))
        ));
    }

    #[test]
    fn extrema_of_closed_forms() {
        let q22 = closed_form::diagonal(2).unwrap();
        let rec = extrema_report(&q22).unwrap();
        assert_eq!(rec.len(), 1);
        assert_eq!(rec[0].r_location, 1.0);
        assert!((rec[0].amplitude - 2.0).abs() < 1e-12);

        let q42 = closed_form::family_m2(4).unwrap();
        let rec = extrema_report(&q42).unwrap();
        assert_eq!(rec.len(), 2);
        assert!((rec[0].r_location - 1.0 / 3f64.sqrt()).abs() < 1e-11);
        assert_eq!(rec[1].r_location, 1.0);
        assert!(rec.iter().all(|r| (r.amplitude - 2.0).abs() < 1e-9));

        for n in 1..8 {
            assert_eq!(extrema_report(&closed_form::diagonal(n).unwrap()).unwrap().len(), 1);
        }
        let q60 = closed_form::family_m0(6).unwrap();
        let rec = extrema_report(&q60).unwrap();
        assert_eq!(rec.len(), 4);
        assert_eq!(rec[0].r_location, 0.0);
        assert!(rec.last().unwrap().value > 0.0);
    }

    #[test]
    fn non_monotone_phase_rejected() {
        let idx = BasisIndex::new(4, 2).unwrap();
        let phase = PhasePolynomial::new(idx, vec![4.0 * PI, 3.0 * FRAC_PI_2 - 4.0 * PI]).unwrap();
        let f = RadialFunction::new(phase, 1.0).unwrap();
        assert!(extrema_report(&f).is_err());
    }

    #[test]
    fn extremum_counts_on_closed_forms() {
        let t = closed_table(6);
        let report = count_extrema_consistency(&t).unwrap();
        assert!(report.passed());
        let find = |n, m| {
            report
                .checked
                .iter()
                .find(|(i, _, _)| *i == BasisIndex::new(n, m).unwrap())
                .map(|(_, u, l)| (*u, *l))
        };
        assert_eq!(find(4, 4), Some((1, 2)));
        assert_eq!(find(6, 2), Some((3, 4)));
    }

    #[test]
    fn zernike_examples() {
        assert_eq!(zernike_radial(1, 1, 0.5).unwrap(), 0.5);
        assert_eq!(zernike_radial(2, 0, 1.0).unwrap(), 1.0);
        assert_eq!(zernike_radial(4, 2, 1.0).unwrap(), 1.0);
        let r: f64 = 0.7;
        assert!((zernike_radial(4, 2, r).unwrap() - (4.0 * r.powi(4) - 3.0 * r * r)).abs() < 1e-15);
        assert!((zernike_radial(2, 0, r).unwrap() - (2.0 * r * r - 1.0)).abs() < 1e-15);
        assert!(zernike_radial(3, 2, 0.5).is_err());
        assert!(zernike_radial(2, 0, 1.5).is_err());
        for n in 0..=22u32 {
            for m in (n % 2..=n).step_by(2) {
                assert!((zernike_radial(n, m, 1.0).unwrap() - 1.0).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn checks_pass_on_closed_forms() {
        let report = run_checks(&closed_table(2), &CheckTolerances::default()).unwrap();
        assert!(report.passed(), "{}", report.render());
    }
}
