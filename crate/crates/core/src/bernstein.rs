//! Bernstein polynomials `B_{i,j}(x) = C(j,i) x^i (1-x)^(j-i)` on `[0, 1]`
//! and exact changes of basis to and from monomials.
//!
//! The monomial expansion of a Bernstein form has integer weights
//! `C(j,l) C(l,s) (-1)^(l-s)` that reach `~3e8` at degree 22, so both
//! conversions accumulate in double-word arithmetic. [`BernsteinVector`]
//! keeps the low word of each coefficient it produces; a vector converted
//! from monomials converts back to the same monomials to the last bit.

use std::sync::LazyLock;

use crate::compensated::Dd;
use crate::error::{Error, Result};

/// Highest degree supported by the binomial table.
pub const MAX_DEGREE: usize = 64;

static PASCAL: LazyLock<Vec<Vec<f64>>> = LazyLock::new(|| {
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(MAX_DEGREE + 1);
    rows.push(vec![1.0]);
    for j in 1..=MAX_DEGREE {
        let prev = &rows[j - 1];
        let mut row = vec![1.0; j + 1];
        for i in 1..j {
            row[i] = prev[i - 1] + prev[i];
        }
        rows.push(row);
    }
    rows
});

/// Binomial coefficient `C(j, i)`; exact for `j <= 56`.
pub fn binomial(j: usize, i: usize) -> f64 {
    if i > j {
        0.0
    } else {
        PASCAL[j][i]
    }
}

fn check_degree(j: usize) -> Result<()> {
    if j > MAX_DEGREE {
        Err(Error::Domain(format!(
            "Bernstein degree {j} exceeds supported maximum {MAX_DEGREE}"
        )))
    } else {
        Ok(())
    }
}

/// Evaluates `B_{i,j}(x)`.
pub fn bernstein_eval(i: usize, j: usize, x: f64) -> Result<f64> {
    check_degree(j)?;
    if i > j {
        return Err(Error::Domain(format!("B_{{{i},{j}}}: index exceeds degree")));
    }
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::Domain(format!("B_{{{i},{j}}}: x = {x} outside [0, 1]")));
    }
    Ok(bernstein_unchecked(i, j, x))
}

#[inline]
pub(crate) fn bernstein_unchecked(i: usize, j: usize, x: f64) -> f64 {
    binomial(j, i) * x.powi(i as i32) * (1.0 - x).powi((j - i) as i32)
}

/// Coefficients of a polynomial in the degree-`j` Bernstein basis.
#[derive(Debug, Clone, PartialEq)]
pub struct BernsteinVector {
    coeffs: Vec<f64>,
    // low words of the coefficients when they came out of a conversion
    tails: Vec<f64>,
}

impl BernsteinVector {
    pub fn new(coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::Domain("Bernstein vector needs at least one coefficient".into()));
        }
        check_degree(coeffs.len() - 1)?;
        let tails = vec![0.0; coeffs.len()];
        Ok(BernsteinVector { coeffs, tails })
    }

    fn from_dd(values: Vec<Dd>) -> Self {
        BernsteinVector {
            coeffs: values.iter().map(|d| d.hi).collect(),
            tails: values.iter().map(|d| d.lo).collect(),
        }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<f64> {
        self.coeffs
    }

    /// `sum_s c_s B_{s,j}(x)`.
    pub fn eval(&self, x: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&x) {
            return Err(Error::Domain(format!("x = {x} outside [0, 1]")));
        }
        let j = self.degree();
        Ok(self
            .coeffs
            .iter()
            .enumerate()
            .map(|(s, c)| c * bernstein_unchecked(s, j, x))
            .sum())
    }
}

/// Expansion of the monomial `x^i` in the degree-`j` Bernstein basis:
/// `c_s = C(s,i) / C(j,i)` for `s >= i`, zero below.
pub fn monomial_to_bernstein(i: usize, j: usize) -> Result<BernsteinVector> {
    check_degree(j)?;
    if i > j {
        return Err(Error::Domain(format!("monomial x^{i} does not fit degree {j}")));
    }
    let mut unit = vec![0.0; j + 1];
    unit[i] = 1.0;
    monomials_to_bernstein(&unit)
}

/// Converts monomial coefficients `a_0..=a_j` to the degree-`j` Bernstein basis.
pub fn monomials_to_bernstein(monomial: &[f64]) -> Result<BernsteinVector> {
    if monomial.is_empty() {
        return Err(Error::Domain("empty monomial coefficient vector".into()));
    }
    let j = monomial.len() - 1;
    check_degree(j)?;
    let out = (0..=j)
        .map(|s| {
            monomial[..=s]
                .iter()
                .enumerate()
                .filter(|(_, a)| **a != 0.0)
                .fold(Dd::default(), |acc, (i, &a)| {
                    let ratio = Dd::quotient(binomial(s, i), binomial(j, i));
                    acc.add(ratio.mul(Dd::from_f64(a)))
                })
        })
        .collect();
    Ok(BernsteinVector::from_dd(out))
}

/// Monomial coefficients `a_0..=a_j` of a Bernstein form:
/// `a_l = sum_{s<=l} (-1)^(l-s) C(j,l) C(l,s) c_s`.
pub fn bernstein_to_monomial(v: &BernsteinVector) -> Vec<f64> {
    let j = v.degree();
    (0..=j)
        .map(|l| {
            let mut acc = Dd::default();
            for s in 0..=l {
                let weight = Dd::prod(binomial(j, l), binomial(l, s));
                let weight = if (l - s) % 2 == 1 { weight.neg() } else { weight };
                acc = acc.add(weight.mul(Dd::new(v.coeffs[s], v.tails[s])));
            }
            acc.hi
        })
        .collect()
}
