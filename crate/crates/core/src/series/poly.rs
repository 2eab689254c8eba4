use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Zero};

use crate::qlinalg::{fmt_rat, Rat};
use crate::taufield::TauScalar;

/// Coefficient ring operations a truncated series needs.
pub trait Coeff: Clone + PartialEq + fmt::Debug + fmt::Display {
    fn is_zero(&self) -> bool;
    fn plus(&self, other: &Self) -> Self;
    fn scale(&self, q: &Rat) -> Self;
}

impl Coeff for Rat {
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn plus(&self, other: &Self) -> Self {
        self + other
    }
    fn scale(&self, q: &Rat) -> Self {
        self * q
    }
}

impl Coeff for TauScalar {
    fn is_zero(&self) -> bool {
        TauScalar::is_zero(self)
    }
    fn plus(&self, other: &Self) -> Self {
        self + other
    }
    fn scale(&self, q: &Rat) -> Self {
        TauScalar::scale(self, q)
    }
}

/// Exponent vector, ordered by total degree and then reverse-lexicographically
/// on the exponents (so `u₁²` precedes `u₁u₂` precedes `u₂²`).
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Monomial(pub Vec<u32>);

impl Monomial {
    pub fn one(nvars: usize) -> Self {
        Monomial(vec![0; nvars])
    }

    pub fn var(nvars: usize, i: usize) -> Self {
        let mut e = vec![0; nvars];
        e[i] = 1;
        Monomial(e)
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn exps(&self) -> &[u32] {
        &self.0
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// Some exponent is odd.
    pub fn is_odd(&self) -> bool {
        self.0.iter().any(|e| e % 2 == 1)
    }

    /// Text form over variables named `{prefix}1, {prefix}2, …`.
    pub fn render(&self, prefix: &str) -> String {
        let parts: Vec<String> = self
            .0
            .iter()
            .enumerate()
            .filter(|(_, e)| **e > 0)
            .map(|(i, e)| {
                if *e == 1 {
                    format!("{prefix}{}", i + 1)
                } else {
                    format!("{prefix}{}^{e}", i + 1)
                }
            })
            .collect();
        if parts.is_empty() {
            "1".to_string()
        } else {
            parts.join("*")
        }
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| other.0.cmp(&self.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.render("u"))
    }
}

/// All exponent vectors of total degree `d` in `nvars` variables, in
/// [`Monomial`] order.
pub fn monomials_of_degree(nvars: usize, d: u32) -> Vec<Monomial> {
    fn rec(nvars: usize, left: u32, prefix: &mut Vec<u32>, out: &mut Vec<Monomial>) {
        if prefix.len() + 1 == nvars {
            prefix.push(left);
            out.push(Monomial(prefix.clone()));
            prefix.pop();
            return;
        }
        for e in (0..=left).rev() {
            prefix.push(e);
            rec(nvars, left - e, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if nvars == 0 {
        if d == 0 {
            out.push(Monomial(vec![]));
        }
        return out;
    }
    rec(nvars, d, &mut Vec::with_capacity(nvars), &mut out);
    out
}

/// Multivariate power series truncated at total degree `trunc` (inclusive).
#[derive(Clone, PartialEq)]
pub struct Series<C> {
    nvars: usize,
    trunc: u32,
    terms: BTreeMap<Monomial, C>,
}

impl<C: Coeff> Series<C> {
    pub fn zero(nvars: usize, trunc: u32) -> Self {
        Series {
            nvars,
            trunc,
            terms: BTreeMap::new(),
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn trunc(&self) -> u32 {
        self.trunc
    }

    pub fn terms(&self) -> &BTreeMap<Monomial, C> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, m: &Monomial) -> Option<&C> {
        self.terms.get(m)
    }

    /// Adds `c · m`; terms beyond the truncation are dropped silently.
    pub fn add_term(&mut self, m: Monomial, c: C) {
        assert_eq!(m.0.len(), self.nvars);
        if m.degree() > self.trunc || c.is_zero() {
            return;
        }
        match self.terms.get_mut(&m) {
            Some(slot) => {
                let sum = slot.plus(&c);
                if sum.is_zero() {
                    self.terms.remove(&m);
                } else {
                    *slot = sum;
                }
            }
            None => {
                self.terms.insert(m, c);
            }
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.nvars, other.nvars);
        let mut out = self.truncated(self.trunc.min(other.trunc));
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn scale(&self, q: &Rat) -> Self {
        let mut out = Series::zero(self.nvars, self.trunc);
        for (m, c) in &self.terms {
            out.add_term(m.clone(), c.scale(q));
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(&-Rat::one()))
    }

    pub fn truncated(&self, trunc: u32) -> Self {
        Series {
            nvars: self.nvars,
            trunc,
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| m.degree() <= trunc)
                .map(|(m, c)| (m.clone(), c.clone()))
                .collect(),
        }
    }

    /// Part of total degree exactly `d`.
    pub fn homogeneous(&self, d: u32) -> Self {
        Series {
            nvars: self.nvars,
            trunc: self.trunc,
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| m.degree() == d)
                .map(|(m, c)| (m.clone(), c.clone()))
                .collect(),
        }
    }

    /// `∂/∂x_var`, truncated one degree lower.
    pub fn derivative(&self, var: usize) -> Self {
        let mut out = Series::zero(self.nvars, self.trunc.saturating_sub(1));
        for (m, c) in &self.terms {
            let e = m.0[var];
            if e == 0 {
                continue;
            }
            let mut dm = m.clone();
            dm.0[var] -= 1;
            out.add_term(dm, c.scale(&Rat::from_integer(e.into())));
        }
        out
    }

    /// Sets the listed variables to zero.
    pub fn vanish(&self, vars: &[usize]) -> Self {
        Series {
            nvars: self.nvars,
            trunc: self.trunc,
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| vars.iter().all(|&v| m.0[v] == 0))
                .map(|(m, c)| (m.clone(), c.clone()))
                .collect(),
        }
    }

    /// True iff some term has a positive exponent on `var`.
    pub fn depends_on(&self, var: usize) -> bool {
        self.terms.keys().any(|m| m.0[var] > 0)
    }

    pub fn map_coeffs<D: Coeff>(&self, mut f: impl FnMut(&C) -> D) -> Series<D> {
        let mut out = Series::zero(self.nvars, self.trunc);
        for (m, c) in &self.terms {
            out.add_term(m.clone(), f(c));
        }
        out
    }

    pub fn render(&self, prefix: &str) -> String {
        if self.terms.is_empty() {
            return "0".to_string();
        }
        self.terms
            .iter()
            .map(|(m, c)| format!("({})*{}", c, m.render(prefix)))
            .collect::<Vec<_>>()
            .join(" + ")
    }
}

impl Series<Rat> {
    /// Truncated product; the result keeps the smaller truncation.
    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.nvars, other.nvars);
        let trunc = self.trunc.min(other.trunc);
        let mut acc: BTreeMap<Monomial, Rat> = BTreeMap::new();
        for (ma, ca) in &self.terms {
            let da = ma.degree();
            for (mb, cb) in &other.terms {
                if da + mb.degree() > trunc {
                    continue;
                }
                let entry = acc.entry(ma.mul(mb)).or_insert_with(Rat::zero);
                *entry += ca * cb;
            }
        }
        acc.retain(|_, c| !Zero::is_zero(c));
        Series {
            nvars: self.nvars,
            trunc,
            terms: acc,
        }
    }

    pub fn constant(nvars: usize, trunc: u32, q: Rat) -> Self {
        let mut s = Series::zero(nvars, trunc);
        s.add_term(Monomial::one(nvars), q);
        s
    }

    /// Linear polynomial `Σ coeffs[i] x_i`.
    pub fn linear(coeffs: &[Rat], trunc: u32) -> Self {
        let n = coeffs.len();
        let mut s = Series::zero(n, trunc);
        for (i, c) in coeffs.iter().enumerate() {
            s.add_term(Monomial::var(n, i), c.clone());
        }
        s
    }
}

impl<C: Coeff> fmt::Debug for Series<C> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Series[≤{}]({})", self.trunc, self.render("u"))
    }
}

impl fmt::Display for Series<Rat> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(m, c)| format!("{}*{}", fmt_rat(c), m.render("s")))
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qlinalg::rat;

    #[test]
    fn monomial_order_and_enumeration() {
        let ms = monomials_of_degree(2, 2);
        assert_eq!(
            ms,
            vec![Monomial(vec![2, 0]), Monomial(vec![1, 1]), Monomial(vec![0, 2])]
        );
        assert!(ms.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(monomials_of_degree(3, 3).len(), 10);
        assert!(Monomial(vec![0, 1]) < Monomial(vec![2, 0]));
    }

    #[test]
    fn derivative_and_product() {
        // (x + y)^2 = x^2 + 2xy + y^2
        let s = Series::linear(&[rat(1), rat(1)], 4);
        let sq = s.mul(&s);
        assert_eq!(sq.coeff(&Monomial(vec![1, 1])), Some(&rat(2)));
        let dx = sq.derivative(0);
        assert_eq!(dx, Series::linear(&[rat(2), rat(2)], 3));
        let t = Series::linear(&[rat(1), rat(0)], 1);
        assert!(t.mul(&t).is_zero(), "degree 2 is beyond truncation 1");
    }

    #[test]
    fn vanish_and_dependence() {
        let mut s: Series<Rat> = Series::zero(3, 4);
        s.add_term(Monomial(vec![1, 0, 2]), rat(1));
        s.add_term(Monomial(vec![1, 0, 0]), rat(3));
        assert!(s.depends_on(2));
        let v = s.vanish(&[2]);
        assert!(!v.depends_on(2));
        assert_eq!(v.terms().len(), 1);
    }
}
