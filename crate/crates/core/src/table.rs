use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::closed_form;
use crate::error::{Error, Result};
use crate::radial_basis::{beta_to_alpha, BasisIndex, RadialFunction, ReducedPhase};

/// Where an entry's coefficients came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    ClosedForm,
    Synthesized,
}

impl Provenance {
    /// Provenance a table file implies for an index it lists.
    pub fn default_for(index: BasisIndex) -> Self {
        if closed_form::closed_form(index).is_some() {
            Provenance::ClosedForm
        } else {
            Provenance::Synthesized
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TableEntry {
    pub function: RadialFunction,
    /// Reduced Bernstein form; absent for the piston, whose phase vanishes.
    pub reduced: Option<ReducedPhase>,
    pub provenance: Provenance,
}

impl TableEntry {
    /// Entry with the reduced form derived from the stored phase.
    pub fn new(function: RadialFunction, provenance: Provenance) -> Self {
        let reduced = beta_to_alpha(function.phase()).ok();
        TableEntry {
            function,
            reduced,
            provenance,
        }
    }

    pub fn index(&self) -> BasisIndex {
        self.function.index()
    }
}

/// Radial functions for every valid `(n, m)` with `n <= n_max`.
///
/// A table under construction (or parsed from a partial file) may have gaps;
/// [`CoefficientTable::is_complete`] says whether it covers the full range.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CoefficientTable {
    n_max: u32,
    entries: BTreeMap<BasisIndex, TableEntry>,
}

impl CoefficientTable {
    pub fn new(n_max: u32) -> Self {
        CoefficientTable {
            n_max,
            entries: BTreeMap::new(),
        }
    }

    pub fn n_max(&self) -> u32 {
        self.n_max
    }

    pub fn insert(&mut self, entry: TableEntry) -> Result<()> {
        let index = entry.index();
        if index.n() > self.n_max {
            return Err(Error::Precondition(format!(
                "entry {index} exceeds table n_max = {}",
                self.n_max
            )));
        }
        self.entries.insert(index, entry);
        Ok(())
    }

    pub fn get(&self, index: BasisIndex) -> Option<&TableEntry> {
        self.entries.get(&index)
    }

    pub fn function(&self, index: BasisIndex) -> Result<&RadialFunction> {
        self.get(index)
            .map(|e| &e.function)
            .ok_or(Error::MissingEntry(index))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Entries in ascending `(n, m)` order.
    pub fn entries(&self) -> impl Iterator<Item = &TableEntry> {
        self.entries.values()
    }

    pub fn indices(&self) -> impl Iterator<Item = BasisIndex> + '_ {
        self.entries.keys().copied()
    }

    /// Valid indices up to `n_max` that have no entry.
    pub fn missing(&self) -> Vec<BasisIndex> {
        BasisIndex::enumerate(self.n_max)
            .into_iter()
            .filter(|i| !self.entries.contains_key(i))
            .collect()
    }

    pub fn is_complete(&self) -> bool {
        self.missing().is_empty()
    }

    pub fn require_complete(&self) -> Result<()> {
        match self.missing().first() {
            Some(&index) => Err(Error::MissingEntry(index)),
            None => Ok(()),
        }
    }

    /// Entries of azimuthal order `m`, ascending in `n`.
    pub fn family(&self, m: u32) -> Vec<&TableEntry> {
        self.entries.values().filter(|e| e.index().m() == m).collect()
    }

    /// Azimuthal orders with at least one entry.
    pub fn azimuthal_orders(&self) -> Vec<u32> {
        let mut ms: Vec<u32> = self.entries.keys().map(|i| i.m()).collect();
        ms.sort_unstable();
        ms.dedup();
        ms
    }

    /// Fills every gap that has a closed form. Returns the filled indices.
    pub fn fill_closed_forms(&mut self) -> Vec<BasisIndex> {
        let mut filled = Vec::new();
        for index in self.missing() {
            if let Some(f) = closed_form::closed_form(index) {
                self.entries
                    .insert(index, TableEntry::new(f, Provenance::ClosedForm));
                filled.push(index);
            }
        }
        filled
    }

    /// Merges another table's entries into this one; `n_max` becomes the larger.
    pub fn merge(&mut self, other: CoefficientTable) {
        self.n_max = self.n_max.max(other.n_max);
        self.entries.extend(other.entries);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_table_is_complete() {
        let mut t = CoefficientTable::new(2);
        assert_eq!(t.missing().len(), 4);
        let filled = t.fill_closed_forms();
        assert_eq!(filled.len(), 4);
        assert!(t.is_complete());
        assert!(t.get(BasisIndex::new(0, 0).unwrap()).unwrap().reduced.is_none());
        assert!(t.get(BasisIndex::new(2, 2).unwrap()).unwrap().reduced.is_some());
    }

    #[test]
    fn synthesized_indices_are_not_filled() {
        let mut t = CoefficientTable::new(3);
        t.fill_closed_forms();
        assert_eq!(t.missing(), vec![BasisIndex::new(3, 1).unwrap()]);
        assert!(t.require_complete().is_err());
    }

    #[test]
    fn insert_beyond_n_max_fails() {
        let mut t = CoefficientTable::new(1);
        let e = TableEntry::new(closed_form::family_m2(2).unwrap(), Provenance::ClosedForm);
        assert!(t.insert(e).is_err());
    }
}
