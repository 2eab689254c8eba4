use std::collections::HashMap;

use num_bigint::BigInt;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::poly::{monomials_of_degree, Monomial, Series};
use super::potential::{branch_from_potential, CoeffMode, LinearForm, LogBranch, PotentialSeries};
use crate::error::{Error, Result};
use crate::qlinalg::{QMatrix, Rat};
use crate::taufield::{minor_rank, JacobianMatrix, TauScalar};

/// Knobs for the sampled fits used in symbolic mode.
#[derive(Clone, Debug)]
pub struct FitOptions {
    /// Number of random cusp-shape substitutions (at least 3 are used).
    pub samples: usize,
    pub seed: u64,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            samples: 3,
            seed: 0x5eed_c05b,
        }
    }
}

/// Result of fitting one target series against generator series at fixed
/// cusp shapes.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleFit {
    pub tau: Vec<Rat>,
    /// Θ in the generator variables, through the solved degrees.
    pub theta: Series<Rat>,
    /// First degree at which no Θ matches, if any.
    pub failed_at: Option<u32>,
}

impl SampleFit {
    pub fn success(&self) -> bool {
        self.failed_at.is_none()
    }
}

#[derive(Clone, Debug)]
pub struct ThetaFit {
    pub target: LinearForm,
    pub gens: Vec<LinearForm>,
    /// Truncation degree of the potential; the fit runs through `degree − 1`.
    pub degree: u32,
    pub samples: Vec<SampleFit>,
}

impl ThetaFit {
    pub fn success(&self) -> bool {
        self.samples.iter().all(SampleFit::success)
    }

    pub fn failed_at(&self) -> Option<u32> {
        self.samples.iter().filter_map(|s| s.failed_at).min()
    }

    /// Θ from the first substitution.
    pub fn theta(&self) -> &Series<Rat> {
        &self.samples[0].theta
    }
}

pub fn theta_fit(phi: &PotentialSeries, s0: &LinearForm, gens: &[LinearForm]) -> Result<ThetaFit> {
    theta_fit_with(phi, s0, gens, &FitOptions::default())
}

pub fn theta_fit_with(
    phi: &PotentialSeries,
    s0: &LinearForm,
    gens: &[LinearForm],
    opts: &FitOptions,
) -> Result<ThetaFit> {
    let n = phi.n();
    if s0.n() != n || gens.iter().any(|g| g.n() != n) {
        return Err(Error::Precondition(format!("linear forms must have {n} cusps")));
    }
    if gens.is_empty() {
        return Err(Error::Precondition("at least one generator is required".into()));
    }
    let branch = branch_from_potential(phi);
    let linear = generator_jacobian(n, gens);
    let samples = match phi.mode() {
        CoeffMode::Rational { tau } => {
            let rank = linear.eval(tau).rank();
            if rank < gens.len() {
                return Err(Error::DependentGenerators {
                    rank,
                    count: gens.len(),
                });
            }
            vec![fit_at(&branch, s0, gens, tau)?]
        }
        CoeffMode::Symbolic => {
            let rank = minor_rank(&linear);
            if rank < gens.len() {
                return Err(Error::DependentGenerators {
                    rank,
                    count: gens.len(),
                });
            }
            let taus = draw_samples(&linear, gens.len(), opts)?;
            let fits = taus
                .iter()
                .map(|tau| fit_at(&branch, s0, gens, tau))
                .collect::<Result<Vec<_>>>()?;
            let verdict = fits[0].success();
            if fits.iter().any(|f| f.success() != verdict) {
                let detail: Vec<String> = fits
                    .iter()
                    .map(|f| match f.failed_at {
                        None => "ok".to_string(),
                        Some(d) => format!("fails at degree {d}"),
                    })
                    .collect();
                return Err(Error::UnstableFit(detail.join(", ")));
            }
            fits
        }
    };
    Ok(ThetaFit {
        target: s0.clone(),
        gens: gens.to_vec(),
        degree: phi.degree(),
        samples,
    })
}

/// Linear parts `aᵢ + bᵢτᵢ` of the forms, as a Jacobian over the τ field.
fn generator_jacobian(n: usize, gens: &[LinearForm]) -> JacobianMatrix {
    let rows = gens
        .iter()
        .map(|g| {
            (0..n)
                .map(|j| (g.u_coeff(j).clone(), g.v_coeff(j).clone()))
                .collect()
        })
        .collect();
    JacobianMatrix::from_pairs(n, rows)
}

/// Distinct random cusp shapes at which the generators stay independent.
fn draw_samples(linear: &JacobianMatrix, k: usize, opts: &FitOptions) -> Result<Vec<Vec<Rat>>> {
    let n = linear.n();
    let want = opts.samples.max(3);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut out: Vec<Vec<Rat>> = Vec::with_capacity(want);
    let mut attempts = 0;
    while out.len() < want {
        attempts += 1;
        if attempts > 1000 * want {
            return Err(Error::UnstableFit(
                "could not find cusp shapes keeping the generators independent".into(),
            ));
        }
        let tau: Vec<Rat> = (0..n)
            .map(|_| {
                let mut p = 0i64;
                while p == 0 {
                    p = rng.gen_range(-50..=50);
                }
                let q: i64 = rng.gen_range(1..=20);
                Rat::new(BigInt::from(p), BigInt::from(q))
            })
            .collect();
        if out.contains(&tau) {
            continue;
        }
        if linear.eval(&tau).rank() < k {
            continue;
        }
        out.push(tau);
    }
    Ok(out)
}

fn eval_series(s: &Series<TauScalar>, tau: &[Rat]) -> Series<Rat> {
    s.map_coeffs(|c| c.eval(tau))
}

fn fit_at(branch: &LogBranch, s0: &LinearForm, gens: &[LinearForm], tau: &[Rat]) -> Result<SampleFit> {
    let target = eval_series(&branch.expand(s0), tau);
    let gs: Vec<Series<Rat>> = gens.iter().map(|g| eval_series(&branch.expand(g), tau)).collect();
    let mut fit = fit_series(&target, &gs)?;
    fit.tau = tau.to_vec();
    Ok(fit)
}

/// Solves `target = Θ(gens)` degree by degree through the target's
/// truncation.
///
/// Every generator must vanish at the origin with linearly independent
/// linear parts; otherwise `DependentGenerators` is returned.
pub fn fit_series(target: &Series<Rat>, gens: &[Series<Rat>]) -> Result<SampleFit> {
    let n = target.nvars();
    let k = gens.len();
    let trunc = target.trunc();
    let lin: Vec<Series<Rat>> = gens.iter().map(|g| g.homogeneous(1).truncated(trunc)).collect();
    let lin_rows: Vec<Vec<Rat>> = lin
        .iter()
        .map(|l| (0..n).map(|j| l.coeff(&Monomial::var(n, j)).cloned().unwrap_or_else(Rat::zero)).collect())
        .collect();
    let rank = QMatrix::from_rows_with_cols(lin_rows, n).rank();
    if rank < k || gens.iter().any(|g| g.coeff(&Monomial::one(n)).is_some()) {
        return Err(Error::DependentGenerators { rank, count: k });
    }
    let gens: Vec<Series<Rat>> = gens.iter().map(|g| g.truncated(trunc)).collect();

    let mut powers = Powers::new(&gens, n, trunc);
    let mut lin_powers = Powers::new(&lin, n, trunc);
    let mut residual = target.clone();
    let mut theta = Series::zero(k, trunc);
    if residual.coeff(&Monomial::one(n)).is_some() {
        return Ok(SampleFit {
            tau: Vec::new(),
            theta,
            failed_at: Some(0),
        });
    }
    for d in 1..=trunc {
        let alphas = monomials_of_degree(k, d);
        let betas = monomials_of_degree(n, d);
        let index: HashMap<&Monomial, usize> = betas.iter().enumerate().map(|(i, b)| (b, i)).collect();
        // columns are the unknown coefficients c_α, rows the degree-d monomials in u
        let mut a = QMatrix::zeros(betas.len(), alphas.len());
        for (col, alpha) in alphas.iter().enumerate() {
            for (m, c) in lin_powers.get(alpha).terms() {
                a.set(index[m], col, c.clone());
            }
        }
        let rhs: Vec<Rat> = betas
            .iter()
            .map(|b| residual.coeff(b).cloned().unwrap_or_else(Rat::zero))
            .collect();
        let Some(sol) = a.solve(&rhs) else {
            return Ok(SampleFit {
                tau: Vec::new(),
                theta,
                failed_at: Some(d),
            });
        };
        for (alpha, c) in alphas.iter().zip(sol) {
            if c.is_zero() {
                continue;
            }
            residual = residual.sub(&powers.get(alpha).scale(&c));
            theta.add_term(alpha.clone(), c);
        }
    }
    Ok(SampleFit {
        tau: Vec::new(),
        theta,
        failed_at: None,
    })
}

/// Memoized products `g^α` of truncated series.
struct Powers<'a> {
    gens: &'a [Series<Rat>],
    nvars: usize,
    trunc: u32,
    cache: HashMap<Monomial, Series<Rat>>,
}

impl<'a> Powers<'a> {
    fn new(gens: &'a [Series<Rat>], nvars: usize, trunc: u32) -> Self {
        Powers {
            gens,
            nvars,
            trunc,
            cache: HashMap::new(),
        }
    }

    fn get(&mut self, alpha: &Monomial) -> &Series<Rat> {
        if !self.cache.contains_key(alpha) {
            let value = match alpha.exps().iter().rposition(|&e| e > 0) {
                None => Series::constant(self.nvars, self.trunc, Rat::from_integer(1.into())),
                Some(i) => {
                    let mut lower = alpha.clone();
                    lower.0[i] -= 1;
                    let prev = self.get(&lower).clone();
                    prev.mul(&self.gens[i]).truncated(self.trunc)
                }
            };
            self.cache.insert(alpha.clone(), value);
        }
        &self.cache[alpha]
    }
}

/// Θ ignores its last `l` arguments: every coefficient on a monomial with
/// positive degree in those variables vanishes, in every sample.
///
/// A failed fit yields `false`.
pub fn theta_t_independence(fit: &ThetaFit, l: usize) -> bool {
    if !fit.success() {
        return false;
    }
    let k = fit.gens.len();
    let m = k.saturating_sub(l);
    fit.samples.iter().all(|s| {
        s.theta
            .terms()
            .keys()
            .all(|mono| mono.exps()[m..].iter().all(|&e| e == 0))
    })
}

/// Both two-cusp relations: `au₁ + bv₁ + cu₂ + dv₂` is a series in
/// `du₁ + bu₂`, and `au₁ + bv₁ − cu₂ − dv₂` is a series in `du₁ − bu₂`.
pub fn two_cusp_relation_check(phi: &PotentialSeries, a: i64, b: i64, c: i64, d: i64) -> Result<bool> {
    two_cusp_relation_check_with(phi, a, b, c, d, &FitOptions::default())
}

pub fn two_cusp_relation_check_with(
    phi: &PotentialSeries,
    a: i64,
    b: i64,
    c: i64,
    d: i64,
    opts: &FitOptions,
) -> Result<bool> {
    if phi.n() != 2 {
        return Err(Error::Precondition(format!(
            "two-cusp check needs n = 2, got {}",
            phi.n()
        )));
    }
    if b == 0 && d == 0 {
        return Err(Error::Precondition("b and d must not both vanish".into()));
    }
    let first = LinearForm::from_i64(&[a, b, c, d])?;
    let first_gen = LinearForm::from_i64(&[d, 0, b, 0])?;
    if !theta_fit_with(phi, &first, &[first_gen], opts)?.success() {
        return Ok(false);
    }
    let second = LinearForm::from_i64(&[a, b, -c, -d])?;
    let second_gen = LinearForm::from_i64(&[d, 0, -b, 0])?;
    Ok(theta_fit_with(phi, &second, &[second_gen], opts)?.success())
}
