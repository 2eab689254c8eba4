use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde::Serialize;

use cuspcert_core::anomaly::{classify, classify_at, AnomalyReport};
use cuspcert_core::qlinalg::{fmt_rat, saturate, IntMatrix, Rat};
use cuspcert_core::series::PotentialSeries;
use cuspcert_core::subgroup::normalize;

use crate::commands::{isolation_findings, Isolation};
use crate::report::SubgroupEntry;
use crate::CliError;

/// Largest cusp count for symbolic scans.
pub const MAX_SYMBOLIC_SCAN_CUSPS: usize = 16;

#[derive(Clone, Debug)]
pub struct ScanConfig {
    pub n: usize,
    pub codim: (usize, usize),
    pub max_coeff: i64,
    /// Fixed cusp shapes in rational mode; `None` keeps them formal.
    pub tau: Option<Vec<Rat>>,
    pub truncation: Option<u32>,
    pub jobs: usize,
    pub max_candidates: u128,
}

#[derive(Serialize, Debug)]
pub struct ConfigEcho {
    pub n: usize,
    pub codim: [usize; 2],
    pub max_coeff: i64,
    pub mode: &'static str,
    pub tau: Option<Vec<String>>,
    pub truncation: Option<u32>,
}

impl ScanConfig {
    pub fn echo(&self) -> ConfigEcho {
        ConfigEcho {
            n: self.n,
            codim: [self.codim.0, self.codim.1],
            max_coeff: self.max_coeff,
            mode: if self.tau.is_some() { "rational" } else { "symbolic" },
            tau: self.tau.as_ref().map(|t| t.iter().map(fmt_rat).collect()),
            truncation: self.truncation,
        }
    }
}

#[derive(Serialize, Debug, Default)]
pub struct Summary {
    /// Unordered sets of distinct sign-normalized rows examined.
    pub candidates: u64,
    /// Candidates whose rows are ℚ-independent.
    pub full_rank: u64,
    /// Distinct saturated lattices among them.
    pub distinct_lattices: usize,
    pub anomalous: usize,
    pub not_anomalous: usize,
    pub counterexamples: usize,
    /// Rational-mode lattices that are anomalous only because the fixed
    /// shapes satisfy a rational relation.
    pub degenerate_shapes: usize,
    /// Anomalous lattices per located complete cusp (1-based).
    pub anomalous_by_cusp: BTreeMap<usize, usize>,
}

#[derive(Serialize, Debug)]
pub struct ScanReport {
    pub summary: Summary,
    pub subgroups: Vec<SubgroupEntry>,
    pub counterexamples: Vec<SubgroupEntry>,
    pub isolation: Option<Isolation>,
}

impl ScanReport {
    pub fn text(&self) -> String {
        let s = &self.summary;
        let mut out = format!(
            "candidates {}  full rank {}  lattices {}  anomalous {}  not anomalous {}  counterexamples {}\n",
            s.candidates, s.full_rank, s.distinct_lattices, s.anomalous, s.not_anomalous, s.counterexamples
        );
        if s.degenerate_shapes > 0 {
            out.push_str(&format!("degenerate shapes {}\n", s.degenerate_shapes));
        }
        for (cusp, count) in &s.anomalous_by_cusp {
            out.push_str(&format!("cusp {cusp}: {count} anomalous\n"));
        }
        for e in self.subgroups.iter().filter(|e| e.anomalous) {
            out.push_str(&e.text_line());
            out.push('\n');
        }
        if let Some(iso) = &self.isolation {
            out.push_str(&iso.text());
        }
        out
    }
}

/// Rows of `[−k, k]^len` whose first nonzero entry is positive.
fn box_rows(len: usize, k: i64) -> Vec<Vec<i64>> {
    let side = (2 * k + 1) as u64;
    let total = side.pow(len as u32);
    (0..total)
        .filter_map(|mut code| {
            let mut row = vec![0i64; len];
            for x in row.iter_mut().rev() {
                *x = (code % side) as i64 - k;
                code /= side;
            }
            match row.iter().find(|&&x| x != 0) {
                Some(&x) if x > 0 => Some(row),
                _ => None,
            }
        })
        .collect()
}

fn binomial(n: u128, k: u128) -> u128 {
    if k > n {
        return 0;
    }
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul(n - i) / (i + 1);
    }
    acc
}

/// Number of candidate relation sets in the box.
pub fn estimate(n: usize, codim: (usize, usize), k: i64) -> u128 {
    let side = (2 * k + 1) as u128;
    let rows = side.saturating_pow(2 * n as u32).saturating_sub(1) / 2;
    (codim.0.max(1)..=codim.1)
        .map(|c| binomial(rows, c as u128))
        .fold(0u128, u128::saturating_add)
}

/// Visits every increasing `c`-subset of `0..r` starting with `first`.
fn for_each_combination(r: usize, c: usize, first: usize, mut f: impl FnMut(&[usize])) {
    let mut idx: Vec<usize> = (0..c).map(|j| first + j).collect();
    if c == 0 || idx[c - 1] >= r {
        return;
    }
    loop {
        f(&idx);
        // advance positions 1..c, keeping idx[0] fixed
        let mut j = c - 1;
        loop {
            if j == 0 {
                return;
            }
            if idx[j] < r - (c - j) {
                idx[j] += 1;
                for t in j + 1..c {
                    idx[t] = idx[t - 1] + 1;
                }
                break;
            }
            j -= 1;
        }
    }
}

pub fn scan(cfg: &ScanConfig, potential: Option<&PotentialSeries>) -> Result<ScanReport, CliError> {
    let n = cfg.n;
    if cfg.max_coeff < 1 {
        return Err(CliError::Input("--max-coeff must be at least 1".into()));
    }
    if cfg.tau.is_none() && n > MAX_SYMBOLIC_SCAN_CUSPS {
        return Err(CliError::Input(format!(
            "symbolic scans support at most {MAX_SYMBOLIC_SCAN_CUSPS} cusps, got {n}"
        )));
    }
    if cfg.codim.0 > cfg.codim.1 || cfg.codim.1 > 2 * n {
        return Err(CliError::Input(format!(
            "codimension range {}..{} must lie within 0..{}",
            cfg.codim.0,
            cfg.codim.1,
            2 * n
        )));
    }
    if cfg.jobs == 0 {
        return Err(CliError::Input("--jobs must be at least 1".into()));
    }
    let size = estimate(n, cfg.codim, cfg.max_coeff);
    if size > cfg.max_candidates {
        return Err(CliError::Input(format!(
            "box too large: about {size} candidate relation sets exceed the limit {} (raise --max-candidates or shrink the box)",
            cfg.max_candidates
        )));
    }
    let isolation = match potential {
        Some(phi) => Some(isolation_findings(phi, cfg.truncation)?),
        None => None,
    };

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs)
        .build()
        .map_err(|e| CliError::Internal(format!("thread pool: {e}")))?;
    pool.install(|| run_scan(cfg, isolation))
}

fn run_scan(cfg: &ScanConfig, isolation: Option<Isolation>) -> Result<ScanReport, CliError> {
    let n = cfg.n;
    let rows = if cfg.codim.1 == 0 {
        Vec::new()
    } else {
        box_rows(2 * n, cfg.max_coeff)
    };
    let r = rows.len();
    let mut summary = Summary::default();
    let mut keys: BTreeSet<IntMatrix> = BTreeSet::new();
    for c in cfg.codim.0.max(1)..=cfg.codim.1 {
        let parts: Vec<(u64, u64, Vec<IntMatrix>)> = (0..r)
            .into_par_iter()
            .map(|first| {
                let mut seen = 0u64;
                let mut full = 0u64;
                let mut found = BTreeSet::new();
                for_each_combination(r, c, first, |idx| {
                    seen += 1;
                    let picked: Vec<Vec<i64>> = idx.iter().map(|&i| rows[i].clone()).collect();
                    let m = IntMatrix::from_i64(&picked);
                    if m.q_rank() == c {
                        full += 1;
                        found.insert(saturate(&m));
                    }
                });
                (seen, full, found.into_iter().collect())
            })
            .collect();
        for (seen, full, found) in parts {
            summary.candidates += seen;
            summary.full_rank += full;
            keys.extend(found);
        }
    }
    let keys: Vec<IntMatrix> = keys.into_iter().collect();
    summary.distinct_lattices = keys.len();

    let classify_key = |key: &IntMatrix| -> Result<AnomalyReport, CliError> {
        let h = normalize(key, n)?;
        Ok(match &cfg.tau {
            Some(tau) => classify_at(&h, tau),
            None => classify(&h),
        })
    };
    let entries: Vec<SubgroupEntry> = keys
        .par_iter()
        .map(|key| {
            let report = classify_key(key)?;
            let orphan = report.anomalous && report.complete_cusps.is_empty();
            let suspicious = orphan && cfg.tau.is_none();
            let confirmed = suspicious && {
                // two fresh classifications must agree before flagging
                let again = classify_key(key)?;
                let third = classify_key(key)?;
                again.anomalous
                    && again.complete_cusps.is_empty()
                    && third.anomalous
                    && third.complete_cusps.is_empty()
            };
            Ok(SubgroupEntry::new(&report, confirmed, orphan && cfg.tau.is_some()))
        })
        .collect::<Result<_, CliError>>()?;

    for e in &entries {
        if e.anomalous {
            summary.anomalous += 1;
            for &c in &e.complete_cusps {
                *summary.anomalous_by_cusp.entry(c).or_default() += 1;
            }
        } else {
            summary.not_anomalous += 1;
        }
        if e.counterexample {
            summary.counterexamples += 1;
        }
        if e.degenerate_shapes {
            summary.degenerate_shapes += 1;
        }
    }
    let counterexamples = entries.iter().filter(|e| e.counterexample).cloned().collect();
    Ok(ScanReport {
        summary,
        subgroups: entries,
        counterexamples,
        isolation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn box_rows_are_sign_normalized() {
        let rows = box_rows(2, 1);
        assert_eq!(rows.len(), 4);
        assert!(rows.contains(&vec![0, 1]));
        assert!(rows.contains(&vec![1, -1]));
        assert!(!rows.contains(&vec![-1, 1]));
    }

    #[test]
    fn combinations_cover_all_subsets() {
        let mut all = Vec::new();
        for first in 0..5 {
            for_each_combination(5, 3, first, |idx| all.push(idx.to_vec()));
        }
        assert_eq!(all.len(), 10);
        assert!(all.windows(2).all(|w| w[0] < w[1]));
        let mut singles = 0;
        for first in 0..4 {
            for_each_combination(4, 1, first, |_| singles += 1);
        }
        assert_eq!(singles, 4);
    }

    #[test]
    fn estimate_matches_enumeration() {
        assert_eq!(estimate(1, (1, 2), 1), 4 + 6);
        assert_eq!(estimate(2, (0, 0), 2), 0);
    }
}
