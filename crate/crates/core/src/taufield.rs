//! The ℚ-span of squarefree monomials in the cusp shapes τ₁,…,τₙ.
//!
//! Zero-testing in this span is sound whenever the squarefree products of
//! distinct cusp shapes are linearly independent over ℚ. Products that would
//! create a square are rejected instead of being simplified.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Neg, Sub};

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::qlinalg::{fmt_rat, q_rank, QMatrix, Rat};

/// Largest cusp count a bitmask exponent set can hold.
pub const MAX_CUSPS: usize = 64;

/// An element of ℚ⟨τ_S : S ⊆ {1..n}⟩; `S` is stored as a bitmask with bit
/// `i` standing for τ_{i+1}.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct TauScalar {
    n: usize,
    terms: BTreeMap<u64, Rat>,
}

impl TauScalar {
    pub fn zero(n: usize) -> Self {
        assert!(n <= MAX_CUSPS, "at most {MAX_CUSPS} cusps");
        TauScalar {
            n,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(n: usize, q: Rat) -> Self {
        Self::monomial(n, 0, q)
    }

    /// The cusp shape τ_{i+1} (0-based `i`).
    pub fn tau(n: usize, i: usize) -> Self {
        assert!(i < n);
        Self::monomial(n, 1 << i, Rat::one())
    }

    /// `q · Π_{i ∈ mask} τ_{i+1}`.
    pub fn monomial(n: usize, mask: u64, q: Rat) -> Self {
        let mut s = Self::zero(n);
        assert!(n == 64 || mask >> n == 0, "exponent set outside 1..={n}");
        if !q.is_zero() {
            s.terms.insert(mask, q);
        }
        s
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Nonzero coefficients keyed by exponent-set bitmask.
    pub fn terms(&self) -> &BTreeMap<u64, Rat> {
        &self.terms
    }

    pub fn coeff(&self, mask: u64) -> Rat {
        self.terms.get(&mask).cloned().unwrap_or_else(Rat::zero)
    }

    /// Rational part (the coefficient of the empty monomial).
    pub fn constant_part(&self) -> Rat {
        self.coeff(0)
    }

    /// Union of all exponent sets that occur.
    pub fn support_mask(&self) -> u64 {
        self.terms.keys().fold(0, |acc, m| acc | m)
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check_n(other)?;
        let mut out = self.clone();
        for (m, q) in &other.terms {
            out.add_term(*m, q.clone());
        }
        Ok(out)
    }

    /// Distributive product; monomials multiply by disjoint union.
    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        self.check_n(other)?;
        let mut out = Self::zero(self.n);
        for (ma, qa) in &self.terms {
            for (mb, qb) in &other.terms {
                if ma & mb != 0 {
                    let index = (ma & mb).trailing_zeros() as usize + 1;
                    return Err(Error::SquarefreeViolation { index });
                }
                out.add_term(ma | mb, qa * qb);
            }
        }
        Ok(out)
    }

    pub fn scale(&self, q: &Rat) -> Self {
        if q.is_zero() {
            return Self::zero(self.n);
        }
        TauScalar {
            n: self.n,
            terms: self.terms.iter().map(|(m, c)| (*m, c * q)).collect(),
        }
    }

    /// Value after substituting `tau[i]` for τ_{i+1}.
    pub fn eval(&self, tau: &[Rat]) -> Rat {
        assert!(tau.len() >= self.n);
        let mut total = Rat::zero();
        for (m, q) in &self.terms {
            let mut t = q.clone();
            let mut bits = *m;
            while bits != 0 {
                let i = bits.trailing_zeros() as usize;
                t *= &tau[i];
                bits &= bits - 1;
            }
            total += t;
        }
        total
    }

    fn add_term(&mut self, mask: u64, q: Rat) {
        if q.is_zero() {
            return;
        }
        let slot = self.terms.entry(mask).or_insert_with(Rat::zero);
        *slot += q;
        if slot.is_zero() {
            self.terms.remove(&mask);
        }
    }

    fn check_n(&self, other: &Self) -> Result<()> {
        if self.n != other.n {
            return Err(Error::CuspCountMismatch {
                left: self.n,
                right: other.n,
            });
        }
        Ok(())
    }
}

/// Coefficientwise sum. Panics on mismatched cusp counts; use
/// [`TauScalar::try_add`] to get an error instead.
pub fn tau_add(x: &TauScalar, y: &TauScalar) -> TauScalar {
    x.try_add(y).expect("tau_add on scalars of different cusp counts")
}

pub fn tau_mul(x: &TauScalar, y: &TauScalar) -> Result<TauScalar> {
    x.try_mul(y)
}

pub fn tau_is_zero(x: &TauScalar) -> bool {
    x.is_zero()
}

impl Add for &TauScalar {
    type Output = TauScalar;
    fn add(self, rhs: &TauScalar) -> TauScalar {
        tau_add(self, rhs)
    }
}

impl Neg for &TauScalar {
    type Output = TauScalar;
    fn neg(self) -> TauScalar {
        TauScalar {
            n: self.n,
            terms: self.terms.iter().map(|(m, q)| (*m, -q)).collect(),
        }
    }
}

impl Sub for &TauScalar {
    type Output = TauScalar;
    fn sub(self, rhs: &TauScalar) -> TauScalar {
        tau_add(self, &-rhs)
    }
}

/// Orders monomials by degree, then by index list.
fn display_key(mask: u64) -> (u32, Vec<usize>) {
    let idx = (0..64).filter(|i| mask >> i & 1 == 1).collect();
    (mask.count_ones(), idx)
}

impl fmt::Display for TauScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut keys: Vec<u64> = self.terms.keys().copied().collect();
        keys.sort_by_key(|m| display_key(*m));
        for (k, m) in keys.iter().enumerate() {
            let q = &self.terms[m];
            let (_, idx) = display_key(*m);
            let mono: Vec<String> = idx.iter().map(|i| format!("t{}", i + 1)).collect();
            let neg = q < &Rat::zero();
            let abs = if neg { -q.clone() } else { q.clone() };
            if k == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, "{}", if neg { " - " } else { " + " })?;
            }
            if mono.is_empty() {
                write!(f, "{}", fmt_rat(&abs))?;
            } else if abs.is_one() {
                write!(f, "{}", mono.join("*"))?;
            } else {
                write!(f, "{}*{}", fmt_rat(&abs), mono.join("*"))?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for TauScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "TauScalar({})", self)
    }
}

/// `a + τ_{col+1} · b`, one entry of a Jacobian in log-coordinates.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct JacobianEntry {
    pub a: Rat,
    pub b: Rat,
    pub col: usize,
}

impl JacobianEntry {
    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    pub fn to_scalar(&self, n: usize) -> TauScalar {
        let mut s = TauScalar::constant(n, self.a.clone());
        s.add_term(1 << self.col, self.b.clone());
        s
    }

    pub fn eval(&self, tau: &[Rat]) -> Rat {
        &self.a + &self.b * &tau[self.col]
    }
}

/// Matrix whose column `j` involves only the cusp shape τ_{j+1}.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct JacobianMatrix {
    n: usize,
    rows: Vec<Vec<JacobianEntry>>,
}

impl JacobianMatrix {
    /// Rows of `(a, b)` pairs, one pair per cusp.
    pub fn from_pairs(n: usize, rows: Vec<Vec<(Rat, Rat)>>) -> Self {
        assert!(n <= MAX_CUSPS);
        let rows = rows
            .into_iter()
            .map(|r| {
                assert_eq!(r.len(), n, "jacobian row must have one entry per cusp");
                r.into_iter()
                    .enumerate()
                    .map(|(col, (a, b))| JacobianEntry { a, b, col })
                    .collect()
            })
            .collect();
        JacobianMatrix { n, rows }
    }

    pub fn from_i64_pairs(n: usize, rows: &[Vec<(i64, i64)>]) -> Self {
        Self::from_pairs(
            n,
            rows.iter()
                .map(|r| {
                    r.iter()
                        .map(|&(a, b)| (Rat::from_integer(a.into()), Rat::from_integer(b.into())))
                        .collect()
                })
                .collect(),
        )
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn rows(&self) -> &[Vec<JacobianEntry>] {
        &self.rows
    }

    pub fn entry(&self, r: usize, c: usize) -> &JacobianEntry {
        &self.rows[r][c]
    }

    /// Appends the τ-free unit row `e_{i+1}`.
    pub fn with_unit_row(&self, i: usize) -> Self {
        let mut out = self.clone();
        out.rows.push(
            (0..self.n)
                .map(|col| JacobianEntry {
                    a: if col == i { Rat::one() } else { Rat::zero() },
                    b: Rat::zero(),
                    col,
                })
                .collect(),
        );
        out
    }

    /// Rational matrix obtained by substituting `tau`.
    pub fn eval(&self, tau: &[Rat]) -> QMatrix {
        QMatrix::from_rows_with_cols(
            self.rows
                .iter()
                .map(|r| r.iter().map(|e| e.eval(tau)).collect())
                .collect(),
            self.n,
        )
    }

    /// Symbolic k×k minor on the given (increasing) rows and columns.
    pub fn minor(&self, rows: &[usize], cols: &[usize]) -> TauScalar {
        assert_eq!(rows.len(), cols.len());
        let k = cols.len();
        let n = self.n;
        let entries: Vec<Vec<TauScalar>> = rows
            .iter()
            .map(|&r| cols.iter().map(|&c| self.rows[r][c].to_scalar(n)).collect())
            .collect();
        // Laplace expansion along the last chosen row, memoized over the set
        // of column positions already used.
        let mut dp = vec![TauScalar::zero(n); 1 << k];
        dp[0] = TauScalar::constant(n, Rat::one());
        for mask in 1usize..(1 << k) {
            let t = mask.count_ones() as usize;
            let mut acc = TauScalar::zero(n);
            for p in 0..k {
                if mask >> p & 1 == 0 {
                    continue;
                }
                let e = &entries[t - 1][p];
                let sub = &dp[mask & !(1 << p)];
                if e.is_zero() || sub.is_zero() {
                    continue;
                }
                let prod = e
                    .try_mul(sub)
                    .expect("distinct columns carry distinct cusp shapes");
                let pos = (mask & ((1 << p) - 1)).count_ones() as usize;
                if (t - 1 + pos).is_multiple_of(2) {
                    acc = &acc + &prod;
                } else {
                    acc = &acc - &prod;
                }
            }
            dp[mask] = acc;
        }
        dp.pop().expect("nonempty table")
    }
}

/// Largest `k` such that some k×k minor of `j` is a nonzero [`TauScalar`].
///
/// Minors are scanned by increasing `k`, with row and column subsets in
/// lexicographic order, stopping at the first nonzero minor of each size.
pub fn minor_rank(j: &JacobianMatrix) -> usize {
    let live_cols: Vec<usize> = (0..j.n)
        .filter(|&c| j.rows.iter().any(|r| !r[c].is_zero()))
        .collect();
    let live_rows: Vec<usize> = (0..j.rows.len())
        .filter(|&r| j.rows[r].iter().any(|e| !e.is_zero()))
        .collect();
    let max_k = live_cols.len().min(live_rows.len());
    let mut rank = 0;
    for k in 1..=max_k {
        let found = subsets(live_rows.len(), k).any(|rs| {
            let rows: Vec<usize> = rs.iter().map(|&i| live_rows[i]).collect();
            subsets(live_cols.len(), k).any(|cs| {
                let cols: Vec<usize> = cs.iter().map(|&i| live_cols[i]).collect();
                !j.minor(&rows, &cols).is_zero()
            })
        });
        if !found {
            break;
        }
        rank = k;
    }
    rank
}

/// Rank of `j` after substituting rational values for the cusp shapes.
pub fn eval_rank(j: &JacobianMatrix, tau: &[Rat]) -> usize {
    q_rank(&j.eval(tau))
}

/// k-subsets of `0..n` in lexicographic order.
pub fn subsets(n: usize, k: usize) -> impl Iterator<Item = Vec<usize>> {
    let mut cur: Option<Vec<usize>> = (k <= n).then(|| (0..k).collect());
    std::iter::from_fn(move || {
        let out = cur.clone()?;
        // advance
        let c = cur.as_mut().expect("checked");
        let mut i = k;
        loop {
            if i == 0 {
                cur = None;
                break;
            }
            i -= 1;
            if c[i] < n - k + i {
                c[i] += 1;
                for t in i + 1..k {
                    c[t] = c[t - 1] + 1;
                }
                break;
            }
        }
        Some(out)
    })
}
