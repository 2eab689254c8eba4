use std::path::Path;

use serde::Serialize;
use serde_json::json;

use cuspcert_core::anomaly::{
    classify, classify_at, deficient_subset_bruteforce, deficient_subset_constructive,
    hypothesis_witness, DeficientSubset, PairFamily,
};
use cuspcert_core::io::{parse_manifold, parse_pairs, parse_subgroup, Manifold};
use cuspcert_core::qlinalg::{fmt_rat, parse_rat, Rat};
use cuspcert_core::series::{
    branch_from_potential, mixed_partial_check, sgi_check, theta_fit, theta_t_independence,
    two_cusp_relation_check, wgi_check, CoeffMode, LinearForm, PotentialSeries,
};
use cuspcert_core::subgroup::CuspSupport;
use cuspcert_core::{Choice, Error};

use crate::args::{Cli, Command, Format, Method, ModeArg, SeriesCheck, ShapeArgs};
use crate::report::{Envelope, SubgroupEntry};
use crate::scan::{scan, ScanConfig};
use crate::{read_file, CliError, Outcome, EXIT_INTERNAL, EXIT_OK};

/// Largest cusp count for which all isolation splits are enumerated.
pub const MAX_ISOLATION_CUSPS: usize = 8;

pub fn execute(cli: &Cli) -> Result<Outcome, CliError> {
    match &cli.command {
        Command::CheckSubgroup {
            input,
            subgroup,
            shapes,
        } => check_subgroup(cli.format, input, subgroup, shapes),
        Command::Scan {
            input,
            codim,
            max_coeff,
            jobs,
            max_candidates,
            truncation,
            shapes,
        } => {
            let manifold = load_manifold(input)?;
            let tau = resolve_tau(shapes, &manifold)?;
            let cfg = ScanConfig {
                n: manifold.n,
                codim: parse_codim(codim)?,
                max_coeff: *max_coeff,
                tau,
                truncation: *truncation,
                jobs: *jobs,
                max_candidates: *max_candidates,
            };
            let report = scan(&cfg, manifold.potential.as_ref())?;
            let text = match cli.format {
                Format::Json => Envelope::new("scan", cfg.echo(), &report).to_json(),
                Format::Text => report.text(),
            };
            let code = if report.summary.counterexamples > 0 {
                EXIT_INTERNAL
            } else {
                EXIT_OK
            };
            Ok(Outcome { text, code })
        }
        Command::Series { .. } => series(cli),
        Command::Deficient { input, method } => deficient(cli.format, input, *method),
    }
}

fn load_manifold(path: &Path) -> Result<Manifold, CliError> {
    let text = read_file(path)?;
    Ok(parse_manifold(&text, &path.display().to_string())?)
}

fn parse_tau(s: &str, n: usize) -> Result<Vec<Rat>, CliError> {
    let vals: Vec<Rat> = s
        .split(',')
        .map(|p| {
            parse_rat(p.trim()).ok_or_else(|| CliError::Input(format!("--tau: invalid rational `{p}`")))
        })
        .collect::<Result<_, _>>()?;
    if vals.len() != n {
        return Err(CliError::Input(format!(
            "--tau: expected {n} cusp shapes, got {}",
            vals.len()
        )));
    }
    Ok(vals)
}

/// Cusp shapes for rational mode, from `--tau` or a rational potential.
fn resolve_tau(shapes: &ShapeArgs, m: &Manifold) -> Result<Option<Vec<Rat>>, CliError> {
    match shapes.mode {
        ModeArg::Symbolic => {
            if shapes.tau.is_some() {
                return Err(CliError::Input("--tau requires --mode rational".into()));
            }
            Ok(None)
        }
        ModeArg::Rational => {
            if let Some(s) = &shapes.tau {
                return parse_tau(s, m.n).map(Some);
            }
            match m.potential.as_ref().map(PotentialSeries::mode) {
                Some(CoeffMode::Rational { tau }) => Ok(Some(tau.clone())),
                _ => Err(CliError::Input(
                    "--mode rational needs --tau or a rational-mode potential".into(),
                )),
            }
        }
    }
}

fn parse_codim(s: &str) -> Result<(usize, usize), CliError> {
    let bad = || CliError::Input(format!("--codim: expected `c` or `lo..hi`, got `{s}`"));
    let (lo, hi) = match s.split_once("..").or_else(|| s.split_once('-')) {
        Some((a, b)) => (a.trim(), b.trim().trim_start_matches('=')),
        None => (s.trim(), s.trim()),
    };
    let lo: usize = lo.parse().map_err(|_| bad())?;
    let hi: usize = hi.parse().map_err(|_| bad())?;
    if lo > hi {
        return Err(bad());
    }
    Ok((lo, hi))
}

fn parse_set(s: &str, n: usize, flag: &str) -> Result<CuspSupport, CliError> {
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let i: usize = part
            .parse()
            .map_err(|_| CliError::Input(format!("{flag}: invalid cusp index `{part}`")))?;
        if i == 0 || i > n {
            return Err(CliError::Input(format!("{flag}: cusp {i} outside 1..={n}")));
        }
        out.push(i);
    }
    Ok(CuspSupport::from_one_based(&out))
}

fn check_subgroup(format: Format, input: &Path, subgroup: &Path, shapes: &ShapeArgs) -> Result<Outcome, CliError> {
    let manifold = load_manifold(input)?;
    let h = parse_subgroup(&read_file(subgroup)?, &subgroup.display().to_string())?;
    if h.n() != manifold.n {
        return Err(Error::CuspCountMismatch {
            left: manifold.n,
            right: h.n(),
        }
        .into());
    }
    let tau = resolve_tau(shapes, &manifold)?;
    let run = || match &tau {
        Some(t) => classify_at(&h, t),
        None => classify(&h),
    };
    let report = run();
    let orphan = report.anomalous && report.complete_cusps.is_empty();
    let counterexample = orphan && tau.is_none() && {
        let again = run();
        again.anomalous && again.complete_cusps.is_empty()
    };
    let entry = SubgroupEntry::new(&report, counterexample, orphan && tau.is_some());
    let text = match format {
        Format::Json => Envelope::new(
            "check-subgroup",
            json!({
                "input": input.display().to_string(),
                "subgroup": subgroup.display().to_string(),
                "mode": if tau.is_some() { "rational" } else { "symbolic" },
                "tau": tau.as_ref().map(|t| t.iter().map(fmt_rat).collect::<Vec<_>>()),
            }),
            json!({ "saturated": h.is_saturated(), "report": entry }),
        )
        .to_json(),
        Format::Text => format!("{}\n", entry.text_line()),
    };
    Ok(Outcome {
        text,
        code: if counterexample { EXIT_INTERNAL } else { EXIT_OK },
    })
}

#[derive(Serialize, Debug, Clone, PartialEq, Eq)]
pub struct WgiFinding {
    pub a: Vec<usize>,
    pub b: Vec<usize>,
    pub c: Vec<usize>,
}

/// SGI sets and the WGI splits not already implied by SGI.
#[derive(Serialize, Debug, Clone, PartialEq, Eq)]
pub struct Isolation {
    pub truncation: u32,
    pub enumerated: bool,
    pub sgi: Vec<Vec<usize>>,
    pub wgi: Vec<WgiFinding>,
}

impl Isolation {
    pub fn text(&self) -> String {
        if !self.enumerated {
            return format!("isolation splits not enumerated for more than {MAX_ISOLATION_CUSPS} cusps\n");
        }
        let fmt = |s: &[usize]| {
            let parts: Vec<String> = s.iter().map(ToString::to_string).collect();
            format!("{{{}}}", parts.join(","))
        };
        let mut parts = Vec::new();
        if self.sgi.is_empty() {
            parts.push("no SGI split".to_string());
        } else {
            let sets: Vec<String> = self.sgi.iter().map(|a| format!("A={}", fmt(a))).collect();
            parts.push(format!("SGI: {}", sets.join(", ")));
        }
        if self.wgi.is_empty() {
            parts.push("no WGI split".to_string());
        } else {
            let sets: Vec<String> = self
                .wgi
                .iter()
                .map(|w| format!("A={} from B={} keeping C={}", fmt(&w.a), fmt(&w.b), fmt(&w.c)))
                .collect();
            parts.push(format!("WGI: {}", sets.join(", ")));
        }
        format!("{} (through degree {})\n", parts.join("; "), self.truncation - 1)
    }
}

pub fn isolation_findings(phi: &PotentialSeries, truncation: Option<u32>) -> Result<Isolation, CliError> {
    let phi = match truncation {
        Some(d) => phi.truncate(d)?,
        None => phi.clone(),
    };
    let n = phi.n();
    if !(2..=MAX_ISOLATION_CUSPS).contains(&n) {
        return Ok(Isolation {
            truncation: phi.degree(),
            enumerated: n < 2,
            sgi: Vec::new(),
            wgi: Vec::new(),
        });
    }
    let mut sgi = Vec::new();
    for mask in 1u32..(1 << n) - 1 {
        let a = CuspSupport::new((0..n).filter(|i| mask >> i & 1 == 1));
        if sgi_check(&phi, &a)? {
            sgi.push(a.one_based());
        }
    }
    let mut wgi = Vec::new();
    for code in 0..3u32.pow(n as u32) {
        let mut parts = [Vec::new(), Vec::new(), Vec::new()];
        let mut c = code;
        for i in 0..n {
            parts[(c % 3) as usize].push(i);
            c /= 3;
        }
        if parts.iter().any(Vec::is_empty) {
            continue;
        }
        let [a, b, cc] = parts.map(CuspSupport::new);
        if sgi.contains(&a.one_based()) {
            continue;
        }
        if wgi_check(&phi, &a, &b, &cc)? {
            wgi.push(WgiFinding {
                a: a.one_based(),
                b: b.one_based(),
                c: cc.one_based(),
            });
        }
    }
    wgi.sort_by(|x, y| (x.a.len(), &x.a, &x.b, &x.c).cmp(&(y.a.len(), &y.a, &y.b, &y.c)));
    sgi.sort_by(|x, y| (x.len(), x).cmp(&(y.len(), y)));
    Ok(Isolation {
        truncation: phi.degree(),
        enumerated: true,
        sgi,
        wgi,
    })
}

fn series(cli: &Cli) -> Result<Outcome, CliError> {
    let Command::Series {
        check,
        input,
        truncation,
        shapes,
        set_a,
        set_b,
        set_c,
        target,
        gens,
        t_count,
        coeffs,
    } = &cli.command
    else {
        unreachable!("series dispatch")
    };
    let manifold = load_manifold(input)?;
    let Some(mut phi) = manifold.potential.clone() else {
        return Err(CliError::Input(format!(
            "{}: manifold file carries no potential series",
            input.display()
        )));
    };
    if let Some(d) = truncation {
        phi = phi.truncate(*d)?;
    }
    if let Some(tau) = resolve_tau(shapes, &manifold)? {
        phi = phi.substitute(&tau)?;
    }
    let n = phi.n();
    let d = phi.degree();
    let config = json!({
        "input": input.display().to_string(),
        "check": format!("{check:?}").to_lowercase(),
        "truncation": d,
        "mode": if phi.is_symbolic() { "symbolic" } else { "rational" },
    });
    let need = |v: &Option<String>, flag: &str| {
        v.clone()
            .ok_or_else(|| CliError::Input(format!("{flag} is required for this check")))
    };
    let (result, text) = match check {
        SeriesCheck::Sgi => match set_a {
            Some(a) => {
                let a = parse_set(a, n, "--set-a")?;
                let ok = sgi_check(&phi, &a)?;
                (
                    json!({ "truncation": d, "a": a.one_based(), "sgi": ok }),
                    format!("SGI A={a}: {ok} (through degree {})\n", d - 1),
                )
            }
            None => {
                let iso = isolation_findings(&phi, None)?;
                let text = iso.text();
                (serde_json::to_value(&iso).expect("serializable"), text)
            }
        },
        SeriesCheck::Wgi => {
            let a = parse_set(&need(set_a, "--set-a")?, n, "--set-a")?;
            let b = parse_set(&need(set_b, "--set-b")?, n, "--set-b")?;
            let c = parse_set(set_c.as_deref().unwrap_or(""), n, "--set-c")?;
            let ok = wgi_check(&phi, &a, &b, &c)?;
            (
                json!({ "truncation": d, "a": a.one_based(), "b": b.one_based(), "c": c.one_based(), "wgi": ok }),
                format!("WGI A={a} from B={b} keeping C={c}: {ok} (through degree {})\n", d - 1),
            )
        }
        SeriesCheck::Theta => {
            let s0 = LinearForm::parse(&need(target, "--target")?, n)?;
            if gens.is_empty() {
                return Err(CliError::Input("--gen is required for theta".into()));
            }
            let forms: Vec<LinearForm> = gens
                .iter()
                .map(|g| LinearForm::parse(g, n))
                .collect::<Result<_, _>>()?;
            if *t_count > forms.len() {
                return Err(CliError::Input("--t-count exceeds the number of generators".into()));
            }
            let fit = theta_fit(&phi, &s0, &forms)?;
            let t_indep = fit.success().then(|| theta_t_independence(&fit, *t_count));
            let samples: Vec<_> = fit
                .samples
                .iter()
                .map(|s| {
                    json!({
                        "tau": s.tau.iter().map(fmt_rat).collect::<Vec<_>>(),
                        "theta": s.theta.to_string(),
                        "failed_at": s.failed_at,
                    })
                })
                .collect();
            let mut text = format!(
                "theta {s0} in [{}]: {} (through degree {})\n",
                forms.iter().map(ToString::to_string).collect::<Vec<_>>().join(", "),
                match fit.failed_at() {
                    None => "fits".to_string(),
                    Some(k) => format!("no fit at degree {k}"),
                },
                d - 1
            );
            if let Some(t) = t_indep {
                text.push_str(&format!("independent of the last {t_count} generators: {t}\n"));
            }
            for sample in &fit.samples {
                let tau: Vec<String> = sample.tau.iter().map(fmt_rat).collect();
                text.push_str(&format!("Θ(s) at τ = ({}): {}\n", tau.join(", "), sample.theta));
            }
            (
                json!({
                    "truncation": d,
                    "target": s0.to_string(),
                    "gens": forms.iter().map(ToString::to_string).collect::<Vec<_>>(),
                    "success": fit.success(),
                    "failed_at": fit.failed_at(),
                    "t_count": t_count,
                    "t_independent": t_indep,
                    "samples": samples,
                }),
                text,
            )
        }
        SeriesCheck::TwoCusp => {
            let raw = need(coeffs, "--coeffs")?;
            let v: Vec<i64> = raw
                .split(',')
                .map(|p| p.trim().parse::<i64>())
                .collect::<Result<_, _>>()
                .map_err(|_| CliError::Input(format!("--coeffs: expected four integers, got `{raw}`")))?;
            let [a, b, c, dd] = v[..] else {
                return Err(CliError::Input(format!("--coeffs: expected four integers, got `{raw}`")));
            };
            let ok = two_cusp_relation_check(&phi, a, b, c, dd)?;
            (
                json!({ "truncation": d, "coeffs": [a, b, c, dd], "holds": ok }),
                format!("two-cusp relations for (a,b,c,d)=({a},{b},{c},{dd}): {ok} (through degree {})\n", d - 1),
            )
        }
        SeriesCheck::Parity => {
            let branch = branch_from_potential(&phi);
            let violation = branch
                .parity_violation()
                .map(|(i, m)| format!("v{}: {}", i + 1, m.render("u")));
            let mixed = mixed_partial_check(&phi);
            let comps: Vec<String> = branch.components().iter().map(|v| v.render("u")).collect();
            let mut text = format!(
                "parity {}; mixed partials {} (through degree {})\n",
                if violation.is_none() { "ok" } else { "VIOLATED" },
                if mixed { "symmetric" } else { "NOT symmetric" },
                d - 1
            );
            for (i, c) in comps.iter().enumerate() {
                text.push_str(&format!("v{} = {c}\n", i + 1));
            }
            (
                json!({
                    "truncation": d,
                    "parity_ok": violation.is_none(),
                    "violation": violation,
                    "mixed_partials_ok": mixed,
                    "branch": comps,
                }),
                text,
            )
        }
    };
    let text = match cli.format {
        Format::Json => Envelope::new("series", config, result).to_json(),
        Format::Text => text,
    };
    Ok(Outcome { text, code: EXIT_OK })
}

#[derive(Serialize, Debug)]
struct Found {
    subset: Vec<usize>,
    rank: usize,
    valid: bool,
}

impl Found {
    fn new(d: &DeficientSubset, f: &PairFamily) -> Self {
        Found {
            subset: d.indices.one_based(),
            rank: d.achieved_rank,
            valid: d.is_valid_for(f),
        }
    }
}

#[derive(Serialize, Debug)]
struct DeficientResult {
    n: usize,
    hypothesis: bool,
    witness: Option<Vec<&'static str>>,
    vacuous: bool,
    brute: Option<Found>,
    constructive: Option<Found>,
    agreement: Option<&'static str>,
}

fn deficient(format: Format, input: &Path, method: Method) -> Result<Outcome, CliError> {
    let f = parse_pairs(&read_file(input)?, &input.display().to_string())?;
    let witness = hypothesis_witness(&f)?;
    let mut res = DeficientResult {
        n: f.n(),
        hypothesis: witness.is_none(),
        witness: witness.as_ref().map(|w| {
            w.iter()
                .map(|c| match c {
                    Choice::V => "v",
                    Choice::W => "w",
                })
                .collect()
        }),
        vacuous: f.n() == 1,
        brute: None,
        constructive: None,
        agreement: None,
    };
    if res.hypothesis && !res.vacuous {
        if matches!(method, Method::Brute | Method::Both) {
            res.brute = Some(Found::new(&deficient_subset_bruteforce(&f)?, &f));
        }
        if matches!(method, Method::Constructive | Method::Both) {
            res.constructive = Some(Found::new(&deficient_subset_constructive(&f)?, &f));
        }
        if let (Some(b), Some(c)) = (&res.brute, &res.constructive) {
            res.agreement = Some(if b.valid == c.valid { "match" } else { "mismatch" });
        }
    }
    let text = match format {
        Format::Json => Envelope::new(
            "deficient",
            json!({ "input": input.display().to_string(), "method": format!("{method:?}").to_lowercase() }),
            &res,
        )
        .to_json(),
        Format::Text => {
            let mut t = String::new();
            if res.vacuous {
                t.push_str("n = 1: no nonempty proper subset exists; the hypothesis is vacuous\n");
            } else if let Some(w) = &res.witness {
                t.push_str(&format!("hypothesis fails: independent selection ({})\n", w.join(",")));
            } else {
                t.push_str("hypothesis holds: every selection is dependent\n");
            }
            for (name, found) in [("brute", &res.brute), ("constructive", &res.constructive)] {
                if let Some(x) = found {
                    let s: Vec<String> = x.subset.iter().map(ToString::to_string).collect();
                    t.push_str(&format!(
                        "{name}: S={{{}}} rank {} {}\n",
                        s.join(","),
                        x.rank,
                        if x.valid { "valid" } else { "INVALID" }
                    ));
                }
            }
            if let Some(a) = res.agreement {
                t.push_str(&format!("validity {a}\n"));
            }
            t
        }
    };
    Ok(Outcome { text, code: EXIT_OK })
}
