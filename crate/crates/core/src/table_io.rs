//! Text serialization of coefficient tables and evaluation grids.
//!
//! A coefficient file holds one logical entry per line, fields separated by
//! single blanks:
//!
//! ```text
//! n m N value      normalization N_{n,m}
//! n m i t value    monomial phase coefficient beta_{n,m,i}
//! n m i B value    Bernstein coefficient alpha_{n,m,i}
//! ```
//!
//! Values carry 12 significant digits. The parser also accepts several
//! logical entries on one physical line, as in multi-column printed layouts.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::radial_basis::{alpha_to_beta, beta_to_alpha, BasisIndex, PhasePolynomial, RadialFunction, ReducedPhase};
use crate::table::{CoefficientTable, Provenance, TableEntry};
use crate::verification::zernike_radial;

/// Relative tolerance of the `beta` versus `alpha` consistency check.
pub const CROSS_CHECK_TOLERANCE: f64 = 1e-6;

/// `printf("%#.12g")`: 12 significant digits, trailing zeros kept.
pub fn format_value(v: f64) -> String {
    const DIGITS: i32 = 12;
    if !v.is_finite() {
        return format!("{v}");
    }
    if v == 0.0 {
        return format!("{:.*}", (DIGITS - 1) as usize, 0.0);
    }
    let sci = format!("{:.*e}", (DIGITS - 1) as usize, v);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..DIGITS).contains(&exp) {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    } else {
        format!("{:.*}", (DIGITS - 1 - exp) as usize, v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EmitOptions {
    /// Emit entries with closed forms (`m = 0`, `m = 2`, `n = m`); a parser
    /// restores them when they are left out.
    pub include_closed_form: bool,
}

impl Default for EmitOptions {
    fn default() -> Self {
        EmitOptions {
            include_closed_form: true,
        }
    }
}

fn emit_entry(out: &mut String, entry: &TableEntry) {
    let index = entry.index();
    let (n, m) = (index.n(), index.m());
    let f = &entry.function;
    let _ = writeln!(out, "{n} {m} N {}", format_value(f.normalization()));
    if index.n() == 0 {
        return;
    }
    for (power, beta) in index.powers().zip(f.phase().betas()) {
        let _ = writeln!(out, "{n} {m} {power} t {}", format_value(*beta));
    }
    if let Some(reduced) = &entry.reduced {
        for (i, alpha) in reduced.alphas().iter().enumerate() {
            let _ = writeln!(out, "{n} {m} {i} B {}", format_value(*alpha));
        }
    }
}

/// Serializes whatever entries the table holds, ascending in `(n, m)`.
pub fn emit_partial(table: &CoefficientTable, options: &EmitOptions) -> String {
    let mut out = String::new();
    for entry in table.entries() {
        if !options.include_closed_form && closed_form_index(entry.index()) {
            continue;
        }
        emit_entry(&mut out, entry);
    }
    out
}

fn closed_form_index(index: BasisIndex) -> bool {
    Provenance::default_for(index) == Provenance::ClosedForm
}

/// Serializes a complete table.
pub fn emit_table(table: &CoefficientTable, options: &EmitOptions) -> Result<String> {
    table.require_complete()?;
    Ok(emit_partial(table, options))
}

/// Result of [`parse_table`].
#[derive(Debug, Clone, PartialEq)]
pub struct ParsedTable {
    pub table: CoefficientTable,
    /// Closed-form entries absent from the text and filled in.
    pub filled: Vec<BasisIndex>,
    /// Integrity warnings (inconsistent `beta` and `alpha` lists).
    pub warnings: Vec<String>,
}

#[derive(Default)]
struct RawEntry {
    first_line: usize,
    normalization: Option<f64>,
    betas: BTreeMap<u32, f64>,
    alphas: BTreeMap<u32, f64>,
}

fn parse_error(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn parse_number<T: std::str::FromStr>(token: &str, what: &str, line: usize) -> Result<T> {
    token
        .parse()
        .map_err(|_| parse_error(line, format!("expected {what}, found `{token}`")))
}

fn insert_unique(map: &mut BTreeMap<u32, f64>, key: u32, value: f64, line: usize, label: &str) -> Result<()> {
    if map.insert(key, value).is_some() {
        return Err(parse_error(line, format!("duplicate {label} coefficient {key}")));
    }
    Ok(())
}

/// Parses a coefficient file. Closed-form entries the text leaves out are
/// restored, and `n_max` becomes the largest `n` present.
pub fn parse_table(text: &str) -> Result<ParsedTable> {
    let mut raw: BTreeMap<BasisIndex, RawEntry> = BTreeMap::new();
    for (k, line) in text.lines().enumerate() {
        let line_no = k + 1;
        let mut tokens = line.split_whitespace();
        while let Some(first) = tokens.next() {
            let mut next = |what: &str| {
                tokens
                    .next()
                    .ok_or_else(|| parse_error(line_no, format!("truncated entry, missing {what}")))
            };
            let n: u32 = parse_number(first, "degree n", line_no)?;
            let m: u32 = parse_number(next("order m")?, "order m", line_no)?;
            let index = BasisIndex::new(n, m).map_err(|e| parse_error(line_no, e.to_string()))?;
            let entry = raw.entry(index).or_insert_with(|| RawEntry {
                first_line: line_no,
                ..RawEntry::default()
            });
            let tag = next("field tag")?;
            if tag == "N" {
                let value = parse_number(next("value")?, "value", line_no)?;
                if entry.normalization.replace(value).is_some() {
                    return Err(parse_error(line_no, format!("duplicate normalization for {index}")));
                }
                continue;
            }
            let i: u32 = parse_number(tag, "coefficient index or N", line_no)?;
            let kind = next("t or B")?;
            let value: f64 = parse_number(next("value")?, "value", line_no)?;
            match kind {
                "t" => {
                    if i < m || i > n || !(i - m).is_multiple_of(2) {
                        return Err(parse_error(line_no, format!("power {i} not in phase {index}")));
                    }
                    insert_unique(&mut entry.betas, i, value, line_no, "t")?;
                }
                "B" => {
                    if i as usize > index.half_span() {
                        return Err(parse_error(
                            line_no,
                            format!("Bernstein index {i} beyond degree {} of {index}", index.half_span()),
                        ));
                    }
                    insert_unique(&mut entry.alphas, i, value, line_no, "B")?;
                }
                other => return Err(parse_error(line_no, format!("unknown field tag `{other}`"))),
            }
        }
    }
    if raw.is_empty() {
        return Err(parse_error(1, "no table entries"));
    }

    let n_max = raw.keys().map(|i| i.n()).max().unwrap_or(0);
    let mut table = CoefficientTable::new(n_max);
    let mut warnings = Vec::new();
    for (index, entry) in raw {
        let (function, reduced) = assemble(index, entry, &mut warnings)?;
        table.insert(TableEntry {
            function,
            reduced,
            provenance: Provenance::default_for(index),
        })?;
    }
    let filled = table.fill_closed_forms();
    Ok(ParsedTable {
        table,
        filled,
        warnings,
    })
}

fn assemble(
    index: BasisIndex,
    entry: RawEntry,
    warnings: &mut Vec<String>,
) -> Result<(RadialFunction, Option<ReducedPhase>)> {
    let line = entry.first_line;
    let at = |e: Error| parse_error(line, e.to_string());
    let normalization = entry
        .normalization
        .ok_or_else(|| parse_error(line, format!("entry {index} has no N line")))?;
    let betas: Vec<f64> = if entry.betas.is_empty() && index.n() == 0 {
        vec![0.0]
    } else {
        let betas: Vec<f64> = index.powers().filter_map(|p| entry.betas.get(&p).copied()).collect();
        if betas.len() != index.coefficient_count() {
            return Err(parse_error(
                line,
                format!("entry {index} lists {} of {} t lines", betas.len(), index.coefficient_count()),
            ));
        }
        betas
    };
    let phase = PhasePolynomial::from_raw(index, betas).map_err(at)?;
    let reduced = if entry.alphas.is_empty() {
        beta_to_alpha(&phase).ok()
    } else {
        let alphas: Vec<f64> = entry.alphas.values().copied().collect();
        if alphas.len() != index.coefficient_count() {
            return Err(parse_error(
                line,
                format!("entry {index} lists {} of {} B lines", alphas.len(), index.coefficient_count()),
            ));
        }
        let reduced = ReducedPhase::new(index, alphas, index.rim_phase()).map_err(at)?;
        let expanded = alpha_to_beta(&reduced);
        let scale = phase.betas().iter().fold(1.0f64, |s, b| s.max(b.abs()));
        let worst = expanded
            .betas()
            .iter()
            .zip(phase.betas())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        if worst > CROSS_CHECK_TOLERANCE * scale {
            warnings.push(format!(
                "{index}: t and B coefficients disagree by {worst:e} (line {line})"
            ));
        }
        Some(reduced)
    };
    let function = RadialFunction::new(phase, normalization).map_err(at)?;
    Ok((function, reduced))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct GridOptions {
    /// Add a reduced-phase column per selected function.
    pub with_reduced: bool,
    /// Add a normalized Zernike column `sqrt(2n+2) R_n^m(r)` per selected function.
    pub with_zernike: bool,
}

/// Comma-separated samples at `r = k / (resolution - 1)`.
///
/// Columns: `r`, then `Q_n_m` for each selected index, then `thetabar_n_m`
/// and `Z_n_m` groups when requested. The piston has no reduced form and
/// gets a zero reduced-phase column.
pub fn emit_grid(
    table: &CoefficientTable,
    selection: &[BasisIndex],
    resolution: usize,
    options: &GridOptions,
) -> Result<String> {
    if resolution < 2 {
        return Err(Error::Domain(format!("grid resolution must be at least 2, got {resolution}")));
    }
    let entries: Vec<&TableEntry> = selection
        .iter()
        .map(|&i| table.get(i).ok_or(Error::MissingEntry(i)))
        .collect::<Result<_>>()?;

    let label = |prefix: &str, i: BasisIndex| format!("{prefix}_{}_{}", i.n(), i.m());
    let mut header = vec!["r".to_string()];
    header.extend(selection.iter().map(|&i| label("Q", i)));
    if options.with_reduced {
        header.extend(selection.iter().map(|&i| label("thetabar", i)));
    }
    if options.with_zernike {
        header.extend(selection.iter().map(|&i| label("Z", i)));
    }

    let mut out = header.join(",");
    out.push('\n');
    let last = (resolution - 1) as f64;
    for k in 0..resolution {
        let r = k as f64 / last;
        let mut row = vec![format_value(r)];
        row.extend(entries.iter().map(|e| format_value(e.function.eval_unchecked(r))));
        if options.with_reduced {
            for e in &entries {
                let value = match &e.reduced {
                    Some(rp) => rp.eval(r)?,
                    None => 0.0,
                };
                row.push(format_value(value));
            }
        }
        if options.with_zernike {
            for &i in selection {
                let scale = (2.0 * i.n() as f64 + 2.0).sqrt();
                row.push(format_value(scale * zernike_radial(i.n(), i.m(), r)?));
            }
        }
        out.push_str(&row.join(","));
        out.push('\n');
    }
    Ok(out)
}

/// Parses an index list such as `"1:1,3:1,5:1"`.
pub fn parse_indices(text: &str) -> Result<Vec<BasisIndex>> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|item| {
            let (n, m) = item
                .split_once(':')
                .ok_or_else(|| Error::Domain(format!("index `{item}` is not of the form n:m")))?;
            let n = n.trim().parse().map_err(|_| Error::Domain(format!("bad degree in `{item}`")))?;
            let m = m.trim().parse().map_err(|_| Error::Domain(format!("bad order in `{item}`")))?;
            BasisIndex::new(n, m)
        })
        .collect()
}
