#![allow(dead_code)]

use std::sync::OnceLock;

use qbasis::synthesis::{synthesize, SynthesisConfig};
use qbasis::CoefficientTable;

/// Composite Simpson rule on `[a, b]` with `panels` (even) panels.
pub fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize) -> f64 {
    assert!(panels.is_multiple_of(2));
    let h = (b - a) / panels as f64;
    let inner: f64 = (1..panels)
        .map(|k| {
            let w = if k % 2 == 1 { 4.0 } else { 2.0 };
            w * f(a + k as f64 * h)
        })
        .sum();
    (f(a) + f(b) + inner) * h / 3.0
}

/// Synthesized table up to `n = 12`, built once per test binary.
pub fn table12() -> &'static CoefficientTable {
    static TABLE: OnceLock<CoefficientTable> = OnceLock::new();
    TABLE.get_or_init(|| {
        let outcome = synthesize(&SynthesisConfig::with_n_max(12)).expect("valid config");
        assert!(outcome.is_complete(), "{:?}", outcome.failures);
        outcome.table
    })
}
