use std::collections::{BTreeMap, BTreeSet};

use num_traits::{One, Zero};

use super::poly::{monomials_of_degree, Monomial, Series};
use crate::error::{Error, Result};
use crate::qlinalg::{QMatrix, Rat};

/// Rank of the odd-monomial coefficient matrix of the degree-`m` products.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OddRank {
    /// Exponents `(k₁,…,k_l)` of each product, in row order.
    pub products: Vec<Vec<u32>>,
    pub rank: usize,
    /// Product owns an odd monomial that no other product contains.
    pub unique: Vec<bool>,
}

impl OddRank {
    pub fn full_rank(&self) -> bool {
        self.rank == self.products.len()
    }
}

/// Checks the staircase shape: each form is supported on a contiguous index
/// range `[jₖ, nₖ]` with nonzero coefficients there, `jₖ < nₖ`, and both
/// endpoints strictly increase with `k`.
pub fn check_staircase(forms: &[Vec<Rat>]) -> Result<Vec<(usize, usize)>> {
    let bad = |msg: String| Err(Error::MalformedStaircase(msg));
    if forms.is_empty() {
        return bad("no forms given".into());
    }
    let n = forms[0].len();
    let mut ranges = Vec::with_capacity(forms.len());
    for (k, f) in forms.iter().enumerate() {
        if f.len() != n {
            return bad(format!("form {} has {} coefficients, expected {n}", k + 1, f.len()));
        }
        let Some(lo) = f.iter().position(|c| !c.is_zero()) else {
            return bad(format!("form {} is zero", k + 1));
        };
        let hi = f.iter().rposition(|c| !c.is_zero()).expect("nonzero form");
        if let Some(i) = (lo..=hi).find(|&i| f[i].is_zero()) {
            return bad(format!("form {} has a zero coefficient on u{}", k + 1, i + 1));
        }
        if lo >= hi {
            return bad(format!("form {} involves a single variable", k + 1));
        }
        if let Some(&(plo, phi)) = ranges.last() {
            if lo <= plo || hi <= phi {
                return bad(format!("form {} does not step past form {}", k + 1, k));
            }
        }
        ranges.push((lo, hi));
    }
    Ok(ranges)
}

pub fn odd_matrix_rank(forms: &[Vec<Rat>], m: u32) -> Result<OddRank> {
    check_staircase(forms)?;
    let l = forms.len();
    let n = forms[0].len();
    let ys: Vec<Series<Rat>> = forms.iter().map(|f| Series::linear(f, m)).collect();
    let exps = monomials_of_degree(l, m);
    let rows: Vec<Series<Rat>> = exps
        .iter()
        .map(|k| {
            let mut p = Series::constant(n, m, Rat::one());
            for (y, &e) in ys.iter().zip(k.exps()) {
                for _ in 0..e {
                    p = p.mul(y);
                }
            }
            p
        })
        .collect();

    let odd: BTreeSet<Monomial> = rows
        .iter()
        .flat_map(|r| r.terms().keys().filter(|mono| mono.is_odd()).cloned())
        .collect();
    let mut owners: BTreeMap<&Monomial, usize> = BTreeMap::new();
    for r in &rows {
        for mono in r.terms().keys().filter(|mono| mono.is_odd()) {
            *owners.entry(mono).or_default() += 1;
        }
    }
    let unique = rows
        .iter()
        .map(|r| r.terms().keys().any(|mono| mono.is_odd() && owners[mono] == 1))
        .collect();
    let matrix = QMatrix::from_rows_with_cols(
        rows.iter()
            .map(|r| {
                odd.iter()
                    .map(|mono| r.coeff(mono).cloned().unwrap_or_else(Rat::zero))
                    .collect()
            })
            .collect(),
        odd.len(),
    );
    Ok(OddRank {
        products: exps.into_iter().map(|k| k.0).collect(),
        rank: matrix.rank(),
        unique,
    })
}
