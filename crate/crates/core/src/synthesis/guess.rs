//! Initial guesses for the Newton iteration.
//!
//! Most starting points lead Newton to orthogonal but non-monotone phases,
//! so the guess decides which branch is found. Strategies implement
//! [`GuessStrategy`] and are looked up by name in a [`GuessRegistry`]; the
//! solver tries the applicable ones in the configured order.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::radial_basis::{beta_to_alpha, BasisIndex, PhasePolynomial, ReducedPhase};
use crate::table::CoefficientTable;

pub trait GuessStrategy: Send + Sync {
    /// Registry key, also recorded in synthesis reports.
    fn name(&self) -> &'static str;

    /// Whether the strategy can produce a guess for `index` at all.
    fn applies(&self, index: BasisIndex) -> bool;

    fn guess(&self, index: BasisIndex, table: &CoefficientTable) -> Result<ReducedPhase>;
}

/// Linear fit for the first off-diagonal, `n = m + 2`:
/// `alpha_0 = 3 - pi + (pi/4 - 1/2) n`, `alpha_1 = 1`.
#[derive(Debug, Default, Clone, Copy)]
pub struct FirstOffDiagonal;

impl FirstOffDiagonal {
    pub const NAME: &'static str = "heuristic";

    pub fn alpha0(n: u32) -> f64 {
        3.0 - PI + (PI / 4.0 - 0.5) * n as f64
    }
}

impl GuessStrategy for FirstOffDiagonal {
    fn name(&self) -> &'static str {
        Self::NAME
    }

    fn applies(&self, index: BasisIndex) -> bool {
        index.n() == index.m() + 2
    }

    fn guess(&self, index: BasisIndex, _table: &CoefficientTable) -> Result<ReducedPhase> {
        if !self.applies(index) {
            return Err(Error::NoApplicableGuess { index });
        }
        ReducedPhase::with_free(index, &[Self::alpha0(index.n())])
    }
}

/// Lifts the converged phase of `(n - 2, m)`: the lowest phase power gains
/// `pi`, interior coefficients are copied, and the new top power absorbs
/// whatever the rim clamp requires.
///
/// For `m = 0` the lifted power is `r^2`.
#[derive(Debug, Default, Clone, Copy)]
pub struct Lifted;

impl Lifted {
    pub const NAME: &'static str = "lifted";

    /// Lifted monomial guess from the predecessor's phase.
    pub fn lift(index: BasisIndex, previous: &PhasePolynomial) -> Result<PhasePolynomial> {
        let mut betas = previous.betas().to_vec();
        betas.push(0.0);
        let lifted_slot = if index.m() == 0 { 1 } else { 0 };
        betas[lifted_slot] += PI;
        let top = betas.len() - 1;
        let rest: f64 = betas[..top].iter().sum();
        betas[top] = index.rim_phase() - rest;
        PhasePolynomial::from_raw(index, betas)
    }
}

impl GuessStrategy for Lifted {
    fn name(&self) -> &'static str {
        Self::NAME
    }

    fn applies(&self, index: BasisIndex) -> bool {
        index.n() >= index.m() + 2
    }

    fn guess(&self, index: BasisIndex, table: &CoefficientTable) -> Result<ReducedPhase> {
        let previous = index.previous().ok_or(Error::NoApplicableGuess { index })?;
        let phase = Self::lift(index, table.function(previous)?.phase())?;
        let reduced = beta_to_alpha(&phase)?;
        // pin the top coefficient to exactly 1
        ReducedPhase::with_free(index, reduced.free_alphas())
    }
}

/// Named collection of guess strategies.
pub struct GuessRegistry {
    strategies: Vec<Box<dyn GuessStrategy>>,
}

impl Default for GuessRegistry {
    fn default() -> Self {
        let mut registry = GuessRegistry::empty();
        registry.register(Box::new(FirstOffDiagonal));
        registry.register(Box::new(Lifted));
        registry
    }
}

impl GuessRegistry {
    pub fn empty() -> Self {
        GuessRegistry {
            strategies: Vec::new(),
        }
    }

    /// Adds a strategy, replacing any registered under the same name.
    pub fn register(&mut self, strategy: Box<dyn GuessStrategy>) {
        self.strategies.retain(|s| s.name() != strategy.name());
        self.strategies.push(strategy);
    }

    pub fn get(&self, name: &str) -> Option<&dyn GuessStrategy> {
        self.strategies
            .iter()
            .find(|s| s.name() == name)
            .map(|s| s.as_ref())
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.strategies.iter().map(|s| s.name()).collect()
    }

    /// Strategies named in `order`, failing on an unknown name.
    pub fn resolve<'a>(&'a self, order: &[String]) -> Result<Vec<&'a dyn GuessStrategy>> {
        order
            .iter()
            .map(|name| self.get(name).ok_or_else(|| Error::UnknownStrategy(name.clone())))
            .collect()
    }
}

/// Default order: first-off-diagonal heuristic where it applies, lifting otherwise.
pub fn default_order() -> Vec<String> {
    vec![FirstOffDiagonal::NAME.to_string(), Lifted::NAME.to_string()]
}

/// Initial guess for `index` from the first applicable default strategy.
pub fn initial_guess(index: BasisIndex, table: &CoefficientTable) -> Result<ReducedPhase> {
    let registry = GuessRegistry::default();
    let strategies = registry.resolve(&default_order())?;
    let strategy = strategies
        .into_iter()
        .find(|s| s.applies(index))
        .ok_or(Error::NoApplicableGuess { index })?;
    strategy.guess(index, table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closed_form;
    use crate::table::{Provenance, TableEntry};

    fn idx(n: u32, m: u32) -> BasisIndex {
        BasisIndex::new(n, m).unwrap()
    }

    #[test]
    fn heuristic_values() {
        let t = CoefficientTable::new(4);
        let g = initial_guess(idx(4, 2), &t).unwrap();
        assert!((g.alphas()[0] - 1.0).abs() < 4.0 * f64::EPSILON);
        assert_eq!(g.alphas()[1], 1.0);
        let g = initial_guess(idx(3, 1), &t).unwrap();
        let expected = 3.0 - PI + 3.0 * (PI / 4.0 - 0.5);
        assert_eq!(g.alphas()[0], expected);
        assert!((g.alphas()[0] - 0.7146).abs() < 1e-4);
    }

    #[test]
    fn heuristic_only_on_first_off_diagonal() {
        let t = CoefficientTable::new(8);
        assert!(FirstOffDiagonal.guess(idx(7, 3), &t).is_err());
        assert!(!FirstOffDiagonal.applies(idx(3, 3)));
    }

    #[test]
    fn lifting_m2_reproduces_closed_form() {
        let mut t = CoefficientTable::new(6);
        t.insert(TableEntry::new(closed_form::family_m2(4).unwrap(), Provenance::ClosedForm))
            .unwrap();
        let g = Lifted.guess(idx(6, 2), &t).unwrap();
        for a in g.alphas() {
            assert!((a - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn lifting_needs_predecessor() {
        let t = CoefficientTable::new(6);
        assert!(matches!(
            Lifted.guess(idx(6, 2), &t),
            Err(Error::MissingEntry(_))
        ));
        assert!(Lifted.guess(idx(3, 3), &t).is_err());
    }

    #[test]
    fn registry_lookup() {
        let mut r = GuessRegistry::default();
        assert_eq!(r.names(), vec!["heuristic", "lifted"]);
        assert!(r.resolve(&["lifted".to_string()]).is_ok());
        assert!(matches!(
            r.resolve(&["nope".to_string()]),
            Err(Error::UnknownStrategy(_))
        ));
        r.register(Box::new(Lifted));
        assert_eq!(r.names().len(), 2);
    }
}
