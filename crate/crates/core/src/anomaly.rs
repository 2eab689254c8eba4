//! Anomaly classification, complete-cusp location and deficient subsets.

use std::fmt;

use num_traits::Zero;

use crate::error::{Choice, Error, Result};
use crate::qlinalg::{QMatrix, Rat};
use crate::subgroup::{b_value, jacobian, CuspSupport, SubgroupSpec};
use crate::taufield::{eval_rank, minor_rank, subsets, JacobianMatrix};

/// Largest `n` accepted by the exhaustive selection searches.
pub const MAX_PAIR_CUSPS: usize = 12;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AnomalyReport {
    pub subgroup: SubgroupSpec,
    pub jacobian_rank: usize,
    pub codim: usize,
    pub anomalous: bool,
    /// Tangent-space dimension `n − rank J` of `X ∩ H` at the identity.
    pub first_order_dim: usize,
    /// 0-based cusps `i` whose coordinates vanish on the tangent space.
    pub complete_cusps: Vec<usize>,
    pub b: Option<i64>,
}

pub fn classify(h: &SubgroupSpec) -> AnomalyReport {
    classify_by(h, minor_rank)
}

/// Classification with the cusp shapes fixed to the rationals `tau`.
pub fn classify_at(h: &SubgroupSpec, tau: &[Rat]) -> AnomalyReport {
    assert_eq!(tau.len(), h.n());
    classify_by(h, |j| eval_rank(j, tau))
}

fn classify_by(h: &SubgroupSpec, rank_of: impl Fn(&JacobianMatrix) -> usize) -> AnomalyReport {
    let j = jacobian(h);
    let n = h.n();
    let rank = rank_of(&j);
    let codim = h.codim();
    let first_order_dim = n - rank;
    let anomalous = if codim <= n {
        first_order_dim > 0 && rank < codim
    } else {
        first_order_dim > 0
    };
    let (complete_cusps, b) = if anomalous {
        (
            (0..n)
                .filter(|&i| rank_of(&j.with_unit_row(i)) == rank)
                .collect(),
            b_value(h, first_order_dim).ok().map(|d| d.b),
        )
    } else {
        (Vec::new(), None)
    };
    AnomalyReport {
        subgroup: h.clone(),
        jacobian_rank: rank,
        codim,
        anomalous,
        first_order_dim,
        complete_cusps,
        b,
    }
}

/// Cusps `i` with `{x : Jx = 0} ⊆ {xᵢ = 0}`, given `rank = minor_rank(j)`.
pub fn tangent_complete_cusps(j: &JacobianMatrix, rank: usize) -> Vec<usize> {
    (0..j.n())
        .filter(|&i| minor_rank(&j.with_unit_row(i)) == rank)
        .collect()
}

/// Complete cusps of an anomalous subgroup; an empty answer is an error.
pub fn locate_complete_cusps(h: &SubgroupSpec) -> Result<Vec<usize>> {
    let report = classify(h);
    if !report.anomalous {
        return Err(Error::Precondition(format!("{} is not anomalous", h)));
    }
    if report.complete_cusps.is_empty() {
        return Err(Error::NoCuspLocated);
    }
    Ok(report.complete_cusps)
}

/// Distinct cusp supports of the relation rows, in order of first appearance.
pub fn block_structure(h: &SubgroupSpec) -> Vec<CuspSupport> {
    let rel = h.relations();
    let mut out: Vec<CuspSupport> = Vec::new();
    for r in 0..rel.rows() {
        let row = rel.row(r);
        let s = CuspSupport::new(
            (0..h.n()).filter(|&i| !row[2 * i].is_zero() || !row[2 * i + 1].is_zero()),
        );
        if !s.is_empty() && !out.contains(&s) {
            out.push(s);
        }
    }
    out
}

/// `n` pairs `(vᵢ, wᵢ)` of vectors in `ℚⁿ`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PairFamily {
    n: usize,
    pairs: Vec<(Vec<Rat>, Vec<Rat>)>,
}

impl PairFamily {
    pub fn new(pairs: Vec<(Vec<Rat>, Vec<Rat>)>) -> Result<Self> {
        let n = pairs.len();
        if n == 0 {
            return Err(Error::Precondition("pair family is empty".into()));
        }
        for (i, (v, w)) in pairs.iter().enumerate() {
            if v.len() != n || w.len() != n {
                return Err(Error::Precondition(format!(
                    "pair {} must hold two vectors of length {n}",
                    i + 1
                )));
            }
        }
        Ok(PairFamily { n, pairs })
    }

    pub fn from_i64(pairs: &[(Vec<i64>, Vec<i64>)]) -> Result<Self> {
        let conv = |v: &Vec<i64>| v.iter().map(|&x| Rat::from_integer(x.into())).collect();
        Self::new(pairs.iter().map(|(v, w)| (conv(v), conv(w))).collect())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn pairs(&self) -> &[(Vec<Rat>, Vec<Rat>)] {
        &self.pairs
    }

    pub fn pick(&self, i: usize, c: Choice) -> &Vec<Rat> {
        match c {
            Choice::V => &self.pairs[i].0,
            Choice::W => &self.pairs[i].1,
        }
    }

    /// Rank of `{vᵢ, wᵢ : i ∈ s}`.
    pub fn span_rank(&self, s: &CuspSupport) -> usize {
        let rows = s
            .iter()
            .flat_map(|i| [self.pairs[i].0.clone(), self.pairs[i].1.clone()])
            .collect();
        QMatrix::from_rows_with_cols(rows, self.n).rank()
    }

    fn selection_rank(&self, sel: &[Choice]) -> usize {
        let rows = sel.iter().enumerate().map(|(i, &c)| self.pick(i, c).clone()).collect();
        QMatrix::from_rows_with_cols(rows, self.n).rank()
    }
}

/// All `2ⁿ` selections in lexicographic order, index 1 most significant and
/// `V` before `W`.
fn selections(n: usize) -> impl Iterator<Item = Vec<Choice>> {
    (0u64..1 << n).map(move |mask| {
        (0..n)
            .map(|i| {
                if mask >> (n - 1 - i) & 1 == 1 {
                    Choice::W
                } else {
                    Choice::V
                }
            })
            .collect()
    })
}

fn check_size(f: &PairFamily) -> Result<()> {
    if f.n > MAX_PAIR_CUSPS {
        return Err(Error::Precondition(format!(
            "pair family with n = {} exceeds the limit {MAX_PAIR_CUSPS}",
            f.n
        )));
    }
    Ok(())
}

/// First independent selection, if any.
pub fn hypothesis_witness(f: &PairFamily) -> Result<Option<Vec<Choice>>> {
    check_size(f)?;
    Ok(selections(f.n).find(|sel| f.selection_rank(sel) == f.n))
}

/// Every selection `(u₁,…,uₙ)`, `uᵢ ∈ {vᵢ, wᵢ}`, is linearly dependent.
pub fn check_hypothesis(f: &PairFamily) -> Result<bool> {
    Ok(hypothesis_witness(f)?.is_none())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DeficientSubset {
    pub indices: CuspSupport,
    pub achieved_rank: usize,
}

impl DeficientSubset {
    /// Nonempty, proper, and the pairs over it span at most `|S|` dimensions.
    pub fn is_valid_for(&self, f: &PairFamily) -> bool {
        is_deficient(f, &self.indices)
    }
}

impl fmt::Display for DeficientSubset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (rank {})", self.indices, self.achieved_rank)
    }
}

pub fn is_deficient(f: &PairFamily, s: &CuspSupport) -> bool {
    !s.is_empty() && s.len() < f.n && s.iter().all(|i| i < f.n) && f.span_rank(s) <= s.len()
}

fn require_hypothesis(f: &PairFamily) -> Result<()> {
    if let Some(witness) = hypothesis_witness(f)? {
        return Err(Error::HypothesisFailed { witness });
    }
    if f.n == 1 {
        return Err(Error::NoProperSubset { n: 1 });
    }
    Ok(())
}

/// Lexicographically first among the smallest deficient subsets.
pub fn deficient_subset_bruteforce(f: &PairFamily) -> Result<DeficientSubset> {
    require_hypothesis(f)?;
    for size in 1..f.n {
        for s in subsets(f.n, size) {
            let s = CuspSupport::new(s);
            let rank = f.span_rank(&s);
            if rank <= size {
                return Ok(DeficientSubset {
                    indices: s,
                    achieved_rank: rank,
                });
            }
        }
    }
    Err(Error::InternalProofDeviation(
        "no deficient subset although every selection is dependent".into(),
    ))
}

/// Extracts a deficient subset by following the interchange argument:
/// a maximum independent selection `U`, its maximal counter extension `U′`,
/// then the chain `V₁, V₂, …` of basis vectors interchangeable with the
/// previous counter vectors, stopping at the first empty step.
pub fn deficient_subset_constructive(f: &PairFamily) -> Result<DeficientSubset> {
    require_hypothesis(f)?;
    let n = f.n;
    let s = constructive_indices(f)?;
    let indices = CuspSupport::new(s);
    let achieved_rank = f.span_rank(&indices);
    let out = DeficientSubset {
        indices,
        achieved_rank,
    };
    if !is_deficient(f, &out.indices) {
        return Err(Error::InternalProofDeviation(format!(
            "emitted {} has rank {} over {} pairs (n = {n})",
            out.indices,
            out.achieved_rank,
            out.indices.len()
        )));
    }
    Ok(out)
}

fn counter(c: Choice) -> Choice {
    match c {
        Choice::V => Choice::W,
        Choice::W => Choice::V,
    }
}

fn constructive_indices(f: &PairFamily) -> Result<Vec<usize>> {
    let n = f.n;
    let rank_of = |vs: &[&Vec<Rat>]| {
        QMatrix::from_rows_with_cols(vs.iter().map(|v| (*v).clone()).collect(), n).rank()
    };

    // U: greedy independent part of the first selection of maximum rank.
    let mut best: Option<(usize, Vec<Choice>)> = None;
    for sel in selections(n) {
        let r = f.selection_rank(&sel);
        if best.as_ref().is_none_or(|(b, _)| r > *b) {
            best = Some((r, sel));
        }
    }
    let (h, sel) = best.expect("at least one selection");
    if h == 0 {
        // every vector vanishes; any single pair is deficient
        return Ok(vec![0]);
    }
    let mut u_idx: Vec<usize> = Vec::new();
    let mut u_vecs: Vec<&Vec<Rat>> = Vec::new();
    for (i, &c) in sel.iter().enumerate() {
        let v = f.pick(i, c);
        u_vecs.push(v);
        if rank_of(&u_vecs) == u_vecs.len() {
            u_idx.push(i);
        } else {
            u_vecs.pop();
        }
    }
    debug_assert_eq!(u_idx.len(), h);
    let outside: Vec<usize> = (0..n).filter(|i| !u_idx.contains(i)).collect();

    // U′: counter vectors added greedily while independent.
    let mut all = u_vecs.clone();
    let mut k_idx: Vec<usize> = Vec::new();
    for &i in &u_idx {
        all.push(f.pick(i, counter(sel[i])));
        if rank_of(&all) == all.len() {
            k_idx.push(i);
        } else {
            all.pop();
        }
    }
    if k_idx.len() == h {
        return Ok(outside);
    }

    // Basis V_{H\K} and expansions in it.
    let basis_idx: Vec<usize> = u_idx.iter().copied().filter(|i| !k_idx.contains(i)).collect();
    let basis_cols = QMatrix::from_rows_with_cols(
        basis_idx.iter().map(|&i| f.pick(i, sel[i]).clone()).collect(),
        n,
    )
    .transpose();
    let expand = |v: &Vec<Rat>| -> Result<Vec<Rat>> {
        basis_cols.solve(v).ok_or_else(|| {
            Error::InternalProofDeviation("vector outside the span of V_{H\\K}".into())
        })
    };
    // positions in `basis_idx` with a nonzero coefficient for some vector
    let support_of = |vs: &[&Vec<Rat>]| -> Result<Vec<usize>> {
        let mut hit = vec![false; basis_idx.len()];
        for v in vs {
            for (p, c) in expand(v)?.iter().enumerate() {
                if !c.is_zero() {
                    hit[p] = true;
                }
            }
        }
        Ok((0..basis_idx.len()).filter(|&p| hit[p]).collect())
    };

    let outside_vecs: Vec<&Vec<Rat>> = outside
        .iter()
        .flat_map(|&i| [&f.pairs[i].0, &f.pairs[i].1])
        .collect();
    let v1 = support_of(&outside_vecs)?;
    if v1.is_empty() {
        return Ok(outside);
    }
    let mut used: Vec<usize> = v1.clone();
    let mut last = v1;
    loop {
        let counters: Vec<&Vec<Rat>> = last
            .iter()
            .map(|&p| {
                let i = basis_idx[p];
                f.pick(i, counter(sel[i]))
            })
            .collect();
        let next: Vec<usize> = support_of(&counters)?
            .into_iter()
            .filter(|p| !used.contains(p))
            .collect();
        if next.is_empty() {
            let mut out: Vec<usize> = used.iter().map(|&p| basis_idx[p]).collect();
            out.sort_unstable();
            return Ok(out);
        }
        used.extend(&next);
        last = next;
    }
}
