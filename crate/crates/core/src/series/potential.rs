use std::fmt;

use num_traits::{One, Zero};

use super::poly::{Monomial, Series};
use crate::error::{Error, Result};
use crate::qlinalg::{fmt_rat, parse_rat, Rat};
use crate::subgroup::CuspSupport;
use crate::taufield::TauScalar;

pub const DEFAULT_TRUNCATION: u32 = 8;

/// How the coefficients of a potential are meant.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CoeffMode {
    /// Coefficients live in ℚ⟨τ-monomials⟩ and the cusp shapes stay formal.
    Symbolic,
    /// Cusp shapes are the given rationals; every coefficient is rational.
    Rational { tau: Vec<Rat> },
}

/// Truncated potential `Φ(u₁,…,uₙ) = Σ τᵢuᵢ² + (even higher terms)`.
///
/// Coefficients are stored as [`TauScalar`]s in both modes; in rational mode
/// they are constants and the quadratic coefficients are the given shapes.
#[derive(Clone, Debug, PartialEq)]
pub struct PotentialSeries {
    n: usize,
    degree: u32,
    mode: CoeffMode,
    series: Series<TauScalar>,
}

impl PotentialSeries {
    /// Symbolic potential with quadratic part `Σ τᵢuᵢ²` plus `higher`.
    ///
    /// `higher` may repeat the quadratic terms as long as they match.
    pub fn symbolic(n: usize, degree: u32, higher: Vec<(Vec<u32>, TauScalar)>) -> Result<Self> {
        let quad = (0..n).map(|i| TauScalar::tau(n, i)).collect();
        Self::build(n, degree, CoeffMode::Symbolic, quad, higher)
    }

    /// Rational-mode potential with cusp shapes `tau`.
    pub fn rational(n: usize, degree: u32, tau: Vec<Rat>, higher: Vec<(Vec<u32>, Rat)>) -> Result<Self> {
        if tau.len() != n {
            return Err(Error::Precondition(format!(
                "expected {n} cusp shapes, got {}",
                tau.len()
            )));
        }
        let quad = tau.iter().map(|t| TauScalar::constant(n, t.clone())).collect();
        let higher = higher
            .into_iter()
            .map(|(e, q)| (e, TauScalar::constant(n, q)))
            .collect();
        Self::build(n, degree, CoeffMode::Rational { tau }, quad, higher)
    }

    fn build(
        n: usize,
        degree: u32,
        mode: CoeffMode,
        quad: Vec<TauScalar>,
        higher: Vec<(Vec<u32>, TauScalar)>,
    ) -> Result<Self> {
        if n == 0 || n > crate::taufield::MAX_CUSPS {
            return Err(Error::Precondition(format!("cusp count {n} out of range")));
        }
        if degree < 2 {
            return Err(Error::Precondition(format!("truncation {degree} below 2")));
        }
        let mut series = Series::zero(n, degree);
        for (i, t) in quad.iter().enumerate() {
            let mut e = vec![0; n];
            e[i] = 2;
            series.add_term(Monomial(e), t.clone());
        }
        for (exps, c) in higher {
            let m = Monomial(exps);
            let violation = |reason: &str| Error::ParityViolation {
                monomial: m.render("u"),
                reason: reason.to_string(),
            };
            if m.0.len() != n {
                return Err(violation("exponent vector has the wrong length"));
            }
            if c.n() != n {
                return Err(violation("coefficient has the wrong cusp count"));
            }
            if let CoeffMode::Rational { .. } = mode {
                if c.support_mask() != 0 {
                    return Err(violation("rational mode coefficient involves a cusp shape"));
                }
            }
            let d = m.degree();
            if d < 2 {
                return Err(violation("potential vanishes to order 2"));
            }
            if d > degree {
                return Err(violation("degree exceeds the truncation"));
            }
            if m.is_odd() {
                return Err(violation("potential must be even in every variable"));
            }
            if d == 2 {
                let i = m.0.iter().position(|&e| e == 2).expect("even degree-2 monomial");
                if c != quad[i] {
                    return Err(violation("quadratic coefficient must be the cusp shape"));
                }
                continue;
            }
            series.add_term(m, c);
        }
        Ok(PotentialSeries {
            n,
            degree,
            mode,
            series,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Truncation total degree `D`.
    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn mode(&self) -> &CoeffMode {
        &self.mode
    }

    pub fn series(&self) -> &Series<TauScalar> {
        &self.series
    }

    pub fn is_symbolic(&self) -> bool {
        self.mode == CoeffMode::Symbolic
    }

    /// Rational-mode copy with the cusp shapes set to `tau`.
    pub fn substitute(&self, tau: &[Rat]) -> Result<Self> {
        if tau.len() != self.n {
            return Err(Error::Precondition(format!(
                "expected {} cusp shapes, got {}",
                self.n,
                tau.len()
            )));
        }
        if let CoeffMode::Rational { tau: own } = &self.mode {
            if own.as_slice() != tau {
                return Err(Error::Precondition(
                    "potential already fixes different cusp shapes".into(),
                ));
            }
            return Ok(self.clone());
        }
        let higher = self
            .series
            .terms()
            .iter()
            .filter(|(m, _)| m.degree() > 2)
            .map(|(m, c)| (m.0.clone(), c.eval(tau)))
            .collect();
        Self::rational(self.n, self.degree, tau.to_vec(), higher)
    }

    /// Copy truncated at a lower total degree.
    pub fn truncate(&self, degree: u32) -> Result<Self> {
        if degree < 2 || degree > self.degree {
            return Err(Error::Precondition(format!(
                "truncation {degree} must lie in 2..={}",
                self.degree
            )));
        }
        Ok(PotentialSeries {
            n: self.n,
            degree,
            mode: self.mode.clone(),
            series: self.series.truncated(degree),
        })
    }
}

/// Log-coordinate branch `vᵢ = ½ ∂Φ/∂uᵢ`, truncated at degree `D − 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct LogBranch {
    n: usize,
    trunc: u32,
    v: Vec<Series<TauScalar>>,
}

impl LogBranch {
    /// Wraps explicit components without checking parity, for branches that
    /// do not come from a potential.
    pub fn from_components(n: usize, trunc: u32, v: Vec<Series<TauScalar>>) -> Self {
        assert_eq!(v.len(), n);
        assert!(v.iter().all(|s| s.nvars() == n));
        LogBranch { n, trunc, v }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn trunc(&self) -> u32 {
        self.trunc
    }

    pub fn component(&self, i: usize) -> &Series<TauScalar> {
        &self.v[i]
    }

    pub fn components(&self) -> &[Series<TauScalar>] {
        &self.v
    }

    /// First monomial violating "vᵢ odd in uᵢ, even in every other uⱼ".
    pub fn parity_violation(&self) -> Option<(usize, Monomial)> {
        for (i, vi) in self.v.iter().enumerate() {
            for m in vi.terms().keys() {
                let ok = m
                    .exps()
                    .iter()
                    .enumerate()
                    .all(|(j, e)| if j == i { e % 2 == 1 } else { e % 2 == 0 });
                if !ok {
                    return Some((i, m.clone()));
                }
            }
        }
        None
    }

    /// Expands `Σ aᵢuᵢ + bᵢvᵢ` as a series in `u`.
    pub fn expand(&self, form: &LinearForm) -> Series<TauScalar> {
        assert_eq!(form.n(), self.n);
        let n = self.n;
        let mut out = Series::zero(n, self.trunc);
        for j in 0..n {
            let a = form.u_coeff(j);
            if !a.is_zero() {
                out.add_term(Monomial::var(n, j), TauScalar::constant(n, a.clone()));
            }
            let b = form.v_coeff(j);
            if !b.is_zero() {
                out = out.add(&self.v[j].scale(b));
            }
        }
        out
    }
}

pub fn branch_from_potential(phi: &PotentialSeries) -> LogBranch {
    let half = Rat::new(1.into(), 2.into());
    let v = (0..phi.n)
        .map(|i| phi.series.derivative(i).scale(&half))
        .collect();
    LogBranch {
        n: phi.n,
        trunc: phi.degree - 1,
        v,
    }
}

fn check_proper(n: usize, a: &CuspSupport) -> Result<()> {
    if a.is_empty() || a.len() >= n || a.iter().any(|i| i >= n) {
        return Err(Error::Precondition(format!(
            "cusp set {a} must be a nonempty proper subset of 1..={n}"
        )));
    }
    Ok(())
}

/// Cusps in `a` are strongly isolated: each `vᵢ`, `i ∈ a`, involves only
/// the `uⱼ` with `j ∈ a`.
pub fn sgi_check(phi: &PotentialSeries, a: &CuspSupport) -> Result<bool> {
    check_proper(phi.n, a)?;
    let branch = branch_from_potential(phi);
    Ok(sgi_on_branch(&branch, a))
}

pub fn sgi_on_branch(branch: &LogBranch, a: &CuspSupport) -> bool {
    a.iter().all(|i| {
        (0..branch.n)
            .filter(|j| !a.contains(*j))
            .all(|j| !branch.v[i].depends_on(j))
    })
}

/// After setting `uⱼ = 0` for `j ∈ c`, each `vᵢ` with `i ∈ a` is independent
/// of every `uⱼ` with `j ∈ b`.
pub fn wgi_check(
    phi: &PotentialSeries,
    a: &CuspSupport,
    b: &CuspSupport,
    c: &CuspSupport,
) -> Result<bool> {
    let n = phi.n;
    let disjoint = a.iter().all(|i| !b.contains(i) && !c.contains(i))
        && b.iter().all(|i| !c.contains(i));
    let covers = a.len() + b.len() + c.len() == n && [a, b, c].iter().all(|s| s.iter().all(|i| i < n));
    if !disjoint || !covers || a.is_empty() || b.is_empty() {
        return Err(Error::Precondition(format!(
            "need a partition of 1..={n} with A, B nonempty; got A={a} B={b} C={c}"
        )));
    }
    let branch = branch_from_potential(phi);
    let kept: Vec<usize> = c.iter().collect();
    Ok(a.iter().all(|i| {
        let vi = branch.v[i].vanish(&kept);
        b.iter().all(|j| !vi.depends_on(j))
    }))
}

/// Symmetry of `∂vᵢ/∂uⱼ` through degree `D − 2`.
pub fn mixed_partial_check(phi: &PotentialSeries) -> bool {
    mixed_partials_on_branch(&branch_from_potential(phi))
}

pub fn mixed_partials_on_branch(branch: &LogBranch) -> bool {
    let n = branch.n;
    (0..n).all(|i| {
        (i + 1..n).all(|j| {
            let dij = branch.v[i].derivative(j);
            let dji = branch.v[j].derivative(i);
            dij.sub(&dji).is_zero()
        })
    })
}

/// Rational linear form on `(u₁, v₁, …, uₙ, vₙ)`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct LinearForm {
    coeffs: Vec<Rat>,
}

impl LinearForm {
    /// Interleaved coefficients `(a₁, b₁, …, aₙ, bₙ)`; all-zero is rejected.
    pub fn new(coeffs: Vec<Rat>) -> Result<Self> {
        if !coeffs.len().is_multiple_of(2) {
            return Err(Error::Precondition("linear form needs 2n coefficients".into()));
        }
        if coeffs.iter().all(Zero::is_zero) {
            return Err(Error::Precondition("linear form is identically zero".into()));
        }
        Ok(LinearForm { coeffs })
    }

    pub fn from_i64(coeffs: &[i64]) -> Result<Self> {
        Self::new(coeffs.iter().map(|&c| Rat::from_integer(c.into())).collect())
    }

    pub fn u(n: usize, i: usize) -> Self {
        let mut c = vec![Rat::zero(); 2 * n];
        c[2 * i] = Rat::one();
        LinearForm { coeffs: c }
    }

    pub fn v(n: usize, i: usize) -> Self {
        let mut c = vec![Rat::zero(); 2 * n];
        c[2 * i + 1] = Rat::one();
        LinearForm { coeffs: c }
    }

    pub fn n(&self) -> usize {
        self.coeffs.len() / 2
    }

    pub fn coeffs(&self) -> &[Rat] {
        &self.coeffs
    }

    pub fn u_coeff(&self, i: usize) -> &Rat {
        &self.coeffs[2 * i]
    }

    pub fn v_coeff(&self, i: usize) -> &Rat {
        &self.coeffs[2 * i + 1]
    }

    /// Rational combination `Σ λₖ formsₖ`; `None` if it vanishes.
    pub fn combine(forms: &[LinearForm], weights: &[Rat]) -> Option<LinearForm> {
        let len = forms.first()?.coeffs.len();
        let mut c = vec![Rat::zero(); len];
        for (f, w) in forms.iter().zip(weights) {
            for (x, y) in c.iter_mut().zip(&f.coeffs) {
                *x += w * y;
            }
        }
        LinearForm::new(c).ok()
    }

    /// Parses text like `2*u1 - v3 + 1/2*u2` for `n` cusps.
    pub fn parse(text: &str, n: usize) -> Result<Self> {
        let bad = |msg: String| Error::Precondition(format!("linear form `{text}`: {msg}"));
        let mut coeffs = vec![Rat::zero(); 2 * n];
        let cleaned: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        if cleaned.is_empty() {
            return Err(bad("empty".into()));
        }
        let mut terms = Vec::new();
        let mut cur = String::new();
        for (k, ch) in cleaned.chars().enumerate() {
            if (ch == '+' || ch == '-') && k > 0 && !cur.ends_with('*') && !cur.ends_with('/') {
                terms.push(std::mem::take(&mut cur));
            }
            cur.push(ch);
        }
        terms.push(cur);
        for term in terms {
            let (sign, body) = match term.strip_prefix('-') {
                Some(rest) => (-Rat::one(), rest),
                None => (Rat::one(), term.strip_prefix('+').unwrap_or(&term)),
            };
            let (coef, var) = match body.rsplit_once('*') {
                Some((c, v)) => (parse_rat(c).ok_or_else(|| bad(format!("bad coefficient `{c}`")))?, v),
                None => (Rat::one(), body),
            };
            let kind = var.chars().next().ok_or_else(|| bad("missing variable".into()))?;
            let slot = match kind {
                'u' => 0,
                'v' => 1,
                _ => return Err(bad(format!("unknown variable `{var}`"))),
            };
            let idx: usize = var[1..]
                .parse()
                .map_err(|_| bad(format!("bad variable index in `{var}`")))?;
            if idx == 0 || idx > n {
                return Err(bad(format!("variable `{var}` outside 1..={n}")));
            }
            coeffs[2 * (idx - 1) + slot] += sign * coef;
        }
        LinearForm::new(coeffs).map_err(|e| bad(e.to_string()))
    }
}

impl fmt::Display for LinearForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let var = format!("{}{}", if k % 2 == 0 { "u" } else { "v" }, k / 2 + 1);
            let neg = c < &Rat::zero();
            let abs = if neg { -c.clone() } else { c.clone() };
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { "-" } else { "+" })?;
            }
            if abs.is_one() {
                write!(f, "{var}")?;
            } else {
                write!(f, "{}*{var}", fmt_rat(&abs))?;
            }
            first = false;
        }
        Ok(())
    }
}

impl fmt::Debug for LinearForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "LinearForm({self})")
    }
}
