//! Algebraic subgroups of 𝔾^{2n} given by integer relation matrices.
//!
//! Coordinates are ordered `(M₁, L₁, …, Mₙ, Lₙ)`; a relation row
//! `(a₁, b₁, …, aₙ, bₙ)` stands for `M₁^{a₁} L₁^{b₁} ⋯ Mₙ^{aₙ} Lₙ^{bₙ} = 1`.
//! All tests happen in log-coordinates near the identity, so only the row
//! lattice matters.

use std::collections::BTreeSet;
use std::fmt;

use num_bigint::BigInt;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::qlinalg::{hnf, left_kernel, saturate, IntMatrix, Rat};
use crate::taufield::JacobianMatrix;

/// A subgroup in HNF: rows are a canonical basis of its relation lattice.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SubgroupSpec {
    n: usize,
    rel: IntMatrix,
}

impl SubgroupSpec {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn relations(&self) -> &IntMatrix {
        &self.rel
    }

    pub fn codim(&self) -> usize {
        self.rel.rows()
    }

    pub fn dim(&self) -> usize {
        2 * self.n - self.codim()
    }

    /// The subgroup whose relation lattice is the saturation of this one,
    /// i.e. the connected component through the identity.
    pub fn saturated(&self) -> SubgroupSpec {
        SubgroupSpec {
            n: self.n,
            rel: saturate(&self.rel),
        }
    }

    pub fn is_saturated(&self) -> bool {
        saturate(&self.rel) == self.rel
    }

    /// The subgroup `{M_{i+1} = L_{i+1} = 1}` that keeps one cusp complete.
    pub fn keeping_cusp_complete(n: usize, i: usize) -> SubgroupSpec {
        let mut rows = vec![vec![0i64; 2 * n]; 2];
        rows[0][2 * i] = 1;
        rows[1][2 * i + 1] = 1;
        normalize(&IntMatrix::from_i64(&rows), n).expect("nonzero rows")
    }

    pub fn rows_i64(&self) -> Vec<Vec<i64>> {
        self.rel
            .to_i64_rows()
            .expect("relation entries fit in i64")
    }
}

impl fmt::Debug for SubgroupSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SubgroupSpec(n={}, {:?})", self.n, self.rel)
    }
}

impl fmt::Display for SubgroupSpec {
    /// Multiplicative form, e.g. `{M1*L2 = 1, L1*L2^-1 = 1}`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rels: Vec<String> = (0..self.rel.rows())
            .map(|r| {
                let row = self.rel.row(r);
                let factors: Vec<String> = row
                    .iter()
                    .enumerate()
                    .filter(|(_, e)| !e.is_zero())
                    .map(|(c, e)| {
                        let base = format!("{}{}", if c % 2 == 0 { "M" } else { "L" }, c / 2 + 1);
                        if *e == BigInt::from(1) {
                            base
                        } else {
                            format!("{base}^{e}")
                        }
                    })
                    .collect();
                format!("{} = 1", factors.join("*"))
            })
            .collect();
        write!(f, "{{{}}}", rels.join(", "))
    }
}

/// A set of cusp indices (0-based internally, printed 1-based).
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CuspSupport(pub BTreeSet<usize>);

impl CuspSupport {
    pub fn new(indices: impl IntoIterator<Item = usize>) -> Self {
        CuspSupport(indices.into_iter().collect())
    }

    /// From 1-based indices as written by users.
    pub fn from_one_based(indices: &[usize]) -> Self {
        CuspSupport(indices.iter().map(|i| i - 1).collect())
    }

    pub fn all(n: usize) -> Self {
        CuspSupport((0..n).collect())
    }

    pub fn contains(&self, i: usize) -> bool {
        self.0.contains(&i)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }

    pub fn one_based(&self) -> Vec<usize> {
        self.0.iter().map(|i| i + 1).collect()
    }
}

impl fmt::Display for CuspSupport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: Vec<String> = self.one_based().iter().map(ToString::to_string).collect();
        write!(f, "{{{}}}", s.join(","))
    }
}

/// Excess dimension data for `X ∩ H`, with `dim X = n` in `𝔾^{2n}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BAnomalyDatum {
    pub b: i64,
    pub dim_intersection: usize,
    pub dim_subgroup: usize,
}

/// HNF-normalizes a raw relation matrix with `2n` columns.
pub fn normalize(raw: &IntMatrix, n: usize) -> Result<SubgroupSpec> {
    if raw.cols() != 2 * n {
        return Err(Error::Precondition(format!(
            "relation rows must have {} entries, got {}",
            2 * n,
            raw.cols()
        )));
    }
    let rel = hnf(raw);
    if rel.rows() == 0 {
        return Err(Error::EmptyRelation);
    }
    Ok(SubgroupSpec { n, rel })
}

/// Row `i`, column `j` carries `a_{ij} + τ_j b_{ij}`.
pub fn jacobian(h: &SubgroupSpec) -> JacobianMatrix {
    jacobian_of_rows(h.n, &h.rel)
}

/// Jacobian of an arbitrary (not necessarily normalized) relation matrix.
pub fn jacobian_of_rows(n: usize, rel: &IntMatrix) -> JacobianMatrix {
    assert_eq!(rel.cols(), 2 * n);
    let rows = (0..rel.rows())
        .map(|r| {
            let row = rel.row(r);
            (0..n)
                .map(|j| {
                    (
                        Rat::from_integer(row[2 * j].clone()),
                        Rat::from_integer(row[2 * j + 1].clone()),
                    )
                })
                .collect()
        })
        .collect();
    JacobianMatrix::from_pairs(n, rows)
}

/// Largest subgroup containing `h` whose relations only involve cusps in `s`.
///
/// This is the intersection of the ℚ-span of `h`'s relations with the
/// coordinate subspace of the cusps in `s`, saturated to a primitive
/// ℤ-basis. The result may have no relations at all.
pub fn support_subgroup(h: &SubgroupSpec, s: &CuspSupport) -> SubgroupSpec {
    let n = h.n;
    let cols = 2 * n;
    // x lies in the saturated span iff K x = 0, K a basis of the right kernel
    let k = left_kernel(&h.rel.transpose());
    let mut constraints: Vec<Vec<BigInt>> = k.row_vecs();
    for j in (0..n).filter(|j| !s.contains(*j)) {
        for c in [2 * j, 2 * j + 1] {
            let mut e = vec![BigInt::zero(); cols];
            e[c] = BigInt::from(1);
            constraints.push(e);
        }
    }
    let rel = if constraints.is_empty() {
        IntMatrix::identity(cols)
    } else {
        let c = IntMatrix::from_rows(constraints, cols);
        left_kernel(&c.transpose())
    };
    SubgroupSpec { n, rel: hnf(&rel) }
}

/// `b = dim(X∩H) − (dim H + n − 2n)`; negative values are rejected.
pub fn b_value(h: &SubgroupSpec, dim_xh: usize) -> Result<BAnomalyDatum> {
    let n = h.n;
    if dim_xh > n {
        return Err(Error::Precondition(format!(
            "dimension {dim_xh} exceeds dim X = {n}"
        )));
    }
    let expected = h.dim() as i64 - n as i64;
    let b = dim_xh as i64 - expected;
    if b < 0 {
        return Err(Error::NotAnomalousConsistent { dim: dim_xh, b });
    }
    Ok(BAnomalyDatum {
        b,
        dim_intersection: dim_xh,
        dim_subgroup: h.dim(),
    })
}
