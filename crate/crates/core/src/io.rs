//! JSON input formats for subgroups, potentials, manifolds and pair families.
//!
//! Parse failures carry the file name, a line/column position and the path
//! of the offending field.

use std::fmt;

use serde::de::{self, Deserializer, SeqAccess, Visitor};
use serde::Deserialize;
use serde_json::{json, Value};

use crate::anomaly::PairFamily;
use crate::error::Error;
use crate::qlinalg::{fmt_rat, parse_rat, IntMatrix, Rat};
use crate::series::{CoeffMode, PotentialSeries, DEFAULT_TRUNCATION};
use crate::subgroup::{normalize, SubgroupSpec};
use crate::taufield::{TauScalar, MAX_CUSPS};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InputError {
    pub file: String,
    pub line: usize,
    pub column: usize,
    pub field: String,
    pub message: String,
}

impl fmt::Display for InputError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}:{}:{}: field `{}`: {}",
            self.file, self.line, self.column, self.field, self.message
        )
    }
}

impl std::error::Error for InputError {}

/// A rational read from either a JSON integer or a `"p/q"` string.
#[derive(Clone, Debug, PartialEq)]
struct RatText(Rat);

impl<'de> Deserialize<'de> for RatText {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        d.deserialize_any(RatVisitor)
    }
}

struct RatVisitor;

impl<'de> Visitor<'de> for RatVisitor {
    type Value = RatText;

    fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
        write!(f, "an integer or a rational string like \"-3/4\"")
    }

    fn visit_i64<E: de::Error>(self, v: i64) -> Result<RatText, E> {
        Ok(RatText(Rat::from_integer(v.into())))
    }

    fn visit_u64<E: de::Error>(self, v: u64) -> Result<RatText, E> {
        Ok(RatText(Rat::from_integer(v.into())))
    }

    fn visit_str<E: de::Error>(self, v: &str) -> Result<RatText, E> {
        parse_rat(v)
            .map(RatText)
            .ok_or_else(|| E::custom(format!("invalid rational `{v}`")))
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSubgroup {
    n: usize,
    rows: Vec<Vec<i64>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTauTerm {
    tau_set: Vec<usize>,
    q: RatText,
}

enum RawCoeff {
    Scalar(Rat),
    Sum(Vec<RawTauTerm>),
}

impl<'de> Deserialize<'de> for RawCoeff {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;
        impl<'de> Visitor<'de> for V {
            type Value = RawCoeff;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                write!(f, "a rational or a list of {{\"tau_set\", \"q\"}} terms")
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> Result<RawCoeff, E> {
                RatVisitor.visit_i64(v).map(|r| RawCoeff::Scalar(r.0))
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> Result<RawCoeff, E> {
                RatVisitor.visit_u64(v).map(|r| RawCoeff::Scalar(r.0))
            }

            fn visit_str<E: de::Error>(self, v: &str) -> Result<RawCoeff, E> {
                RatVisitor.visit_str(v).map(|r| RawCoeff::Scalar(r.0))
            }

            fn visit_seq<A: SeqAccess<'de>>(self, mut seq: A) -> Result<RawCoeff, A::Error> {
                let mut out = Vec::new();
                while let Some(t) = seq.next_element()? {
                    out.push(t);
                }
                Ok(RawCoeff::Sum(out))
            }
        }
        d.deserialize_any(V)
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTerm {
    u: Vec<u32>,
    coeff: RawCoeff,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSeries {
    n: usize,
    #[serde(rename = "D", default)]
    degree: Option<u32>,
    #[serde(default)]
    mode: Option<String>,
    #[serde(default)]
    tau: Option<Vec<RatText>>,
    terms: Vec<RawTerm>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawManifold {
    #[serde(default)]
    name: Option<String>,
    n: usize,
    #[serde(default)]
    potential: Option<RawSeries>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPair {
    v: Vec<RatText>,
    w: Vec<RatText>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPairs {
    n: usize,
    pairs: Vec<RawPair>,
}

/// Cusped manifold data: the cusp count and optionally its potential.
#[derive(Clone, Debug, PartialEq)]
pub struct Manifold {
    pub name: Option<String>,
    pub n: usize,
    pub potential: Option<PotentialSeries>,
}

struct Ctx<'a> {
    file: &'a str,
    text: &'a str,
}

impl<'a> Ctx<'a> {
    fn parse<T: for<'de> Deserialize<'de>>(&self) -> Result<T, InputError> {
        let mut de = serde_json::Deserializer::from_str(self.text);
        let value = serde_path_to_error::deserialize(&mut de).map_err(|e| {
            let field = e.path().to_string();
            let inner = e.into_inner();
            InputError {
                file: self.file.to_string(),
                line: inner.line(),
                column: inner.column(),
                field,
                message: strip_position(&inner.to_string()),
            }
        })?;
        de.end().map_err(|e| InputError {
            file: self.file.to_string(),
            line: e.line(),
            column: e.column(),
            field: ".".into(),
            message: strip_position(&e.to_string()),
        })?;
        Ok(value)
    }

    /// Error positioned at the `nth` occurrence of `"key"` in the text.
    fn at(&self, key: &str, nth: usize, field: String, message: String) -> InputError {
        let needle = format!("\"{key}\"");
        let offset = self
            .text
            .match_indices(&needle)
            .nth(nth)
            .map(|(i, _)| i)
            .unwrap_or(0);
        let before = &self.text[..offset];
        let line = before.matches('\n').count() + 1;
        let column = before.rfind('\n').map_or(offset, |p| offset - p - 1) + 1;
        InputError {
            file: self.file.to_string(),
            line,
            column,
            field,
            message,
        }
    }
}

fn strip_position(msg: &str) -> String {
    match msg.rfind(" at line ") {
        Some(p) => msg[..p].to_string(),
        None => msg.to_string(),
    }
}

pub fn parse_subgroup(text: &str, file: &str) -> Result<SubgroupSpec, InputError> {
    let ctx = Ctx { file, text };
    let raw: RawSubgroup = ctx.parse()?;
    subgroup_from_raw(&ctx, raw)
}

fn subgroup_from_raw(ctx: &Ctx, raw: RawSubgroup) -> Result<SubgroupSpec, InputError> {
    if raw.n == 0 || raw.n > MAX_CUSPS {
        return Err(ctx.at("n", 0, "n".into(), format!("cusp count {} out of range", raw.n)));
    }
    for (i, row) in raw.rows.iter().enumerate() {
        if row.len() != 2 * raw.n {
            return Err(ctx.at(
                "rows",
                0,
                format!("rows[{i}]"),
                format!("expected {} entries, got {}", 2 * raw.n, row.len()),
            ));
        }
    }
    if raw.rows.is_empty() {
        return Err(ctx.at("rows", 0, "rows".into(), "no relations given".into()));
    }
    normalize(&IntMatrix::from_i64_with_cols(&raw.rows, 2 * raw.n), raw.n)
        .map_err(|e| ctx.at("rows", 0, "rows".into(), e.to_string()))
}

pub fn parse_series(text: &str, file: &str) -> Result<PotentialSeries, InputError> {
    let ctx = Ctx { file, text };
    let raw: RawSeries = ctx.parse()?;
    series_from_raw(&ctx, raw, "")
}

fn series_from_raw(ctx: &Ctx, raw: RawSeries, prefix: &str) -> Result<PotentialSeries, InputError> {
    let n = raw.n;
    let field = |f: &str| format!("{prefix}{f}");
    if n == 0 || n > MAX_CUSPS {
        return Err(ctx.at("n", 0, field("n"), format!("cusp count {n} out of range")));
    }
    let degree = raw.degree.unwrap_or(DEFAULT_TRUNCATION);
    let mode = raw.mode.as_deref().unwrap_or("symbolic");
    let mut higher = Vec::with_capacity(raw.terms.len());
    for (i, t) in raw.terms.iter().enumerate() {
        if t.u.len() != n {
            return Err(ctx.at(
                "u",
                i,
                field(&format!("terms[{i}].u")),
                format!("expected {n} exponents, got {}", t.u.len()),
            ));
        }
        let coeff = match &t.coeff {
            RawCoeff::Scalar(q) => TauScalar::constant(n, q.clone()),
            RawCoeff::Sum(parts) => {
                let mut acc = TauScalar::zero(n);
                for (k, p) in parts.iter().enumerate() {
                    let mut mask = 0u64;
                    for &ix in &p.tau_set {
                        if ix == 0 || ix > n || mask & (1 << (ix - 1)) != 0 {
                            return Err(ctx.at(
                                "tau_set",
                                0,
                                field(&format!("terms[{i}].coeff[{k}].tau_set")),
                                format!("tau index {ix} invalid or repeated for n = {n}"),
                            ));
                        }
                        mask |= 1 << (ix - 1);
                    }
                    acc = &acc + &TauScalar::monomial(n, mask, p.q.0.clone());
                }
                acc
            }
        };
        higher.push((t.u.clone(), coeff));
    }
    let built = match mode {
        "symbolic" => {
            if raw.tau.is_some() {
                return Err(ctx.at("tau", 0, field("tau"), "tau is only allowed in rational mode".into()));
            }
            PotentialSeries::symbolic(n, degree, higher.clone())
        }
        "rational" => {
            let Some(tau) = raw.tau else {
                return Err(ctx.at("mode", 0, field("tau"), "rational mode needs tau values".into()));
            };
            if tau.len() != n {
                return Err(ctx.at("tau", 0, field("tau"), format!("expected {n} values, got {}", tau.len())));
            }
            let mut rational = Vec::with_capacity(higher.len());
            for (i, (e, c)) in higher.iter().enumerate() {
                if c.support_mask() != 0 {
                    return Err(ctx.at(
                        "u",
                        i,
                        field(&format!("terms[{i}].coeff")),
                        "rational mode coefficients must not involve tau".into(),
                    ));
                }
                rational.push((e.clone(), c.constant_part()));
            }
            PotentialSeries::rational(n, degree, tau.into_iter().map(|t| t.0).collect(), rational)
        }
        other => {
            return Err(ctx.at(
                "mode",
                0,
                field("mode"),
                format!("unknown mode `{other}`, expected symbolic or rational"),
            ))
        }
    };
    built.map_err(|e| match &e {
        Error::ParityViolation { monomial, .. } => {
            let i = raw
                .terms
                .iter()
                .position(|t| crate::series::Monomial(t.u.clone()).render("u") == *monomial)
                .unwrap_or(0);
            ctx.at("u", i, field(&format!("terms[{i}]")), e.to_string())
        }
        _ => ctx.at("D", 0, field("D"), e.to_string()),
    })
}

/// Reads `{"n", "potential"?}` or a bare potential series.
pub fn parse_manifold(text: &str, file: &str) -> Result<Manifold, InputError> {
    let ctx = Ctx { file, text };
    let bare = serde_json::from_str::<Value>(text)
        .ok()
        .and_then(|v| v.as_object().map(|o| o.contains_key("terms")))
        .unwrap_or(false);
    if bare {
        let raw: RawSeries = ctx.parse()?;
        let potential = series_from_raw(&ctx, raw, "")?;
        return Ok(Manifold {
            name: None,
            n: potential.n(),
            potential: Some(potential),
        });
    }
    let raw: RawManifold = ctx.parse()?;
    if raw.n == 0 || raw.n > MAX_CUSPS {
        return Err(ctx.at("n", 0, "n".into(), format!("cusp count {} out of range", raw.n)));
    }
    let potential = match raw.potential {
        None => None,
        Some(p) => {
            if p.n != raw.n {
                return Err(ctx.at(
                    "n",
                    1,
                    "potential.n".into(),
                    format!("potential has {} cusps, manifold has {}", p.n, raw.n),
                ));
            }
            Some(series_from_raw(&ctx, p, "potential.")?)
        }
    };
    Ok(Manifold {
        name: raw.name,
        n: raw.n,
        potential,
    })
}

pub fn parse_pairs(text: &str, file: &str) -> Result<PairFamily, InputError> {
    let ctx = Ctx { file, text };
    let raw: RawPairs = ctx.parse()?;
    if raw.pairs.len() != raw.n {
        return Err(ctx.at(
            "pairs",
            0,
            "pairs".into(),
            format!("expected {} pairs, got {}", raw.n, raw.pairs.len()),
        ));
    }
    for (i, p) in raw.pairs.iter().enumerate() {
        for (key, v) in [("v", &p.v), ("w", &p.w)] {
            if v.len() != raw.n {
                return Err(ctx.at(
                    key,
                    i,
                    format!("pairs[{i}].{key}"),
                    format!("expected {} entries, got {}", raw.n, v.len()),
                ));
            }
        }
    }
    let pairs = raw
        .pairs
        .into_iter()
        .map(|p| {
            (
                p.v.into_iter().map(|r| r.0).collect(),
                p.w.into_iter().map(|r| r.0).collect(),
            )
        })
        .collect();
    PairFamily::new(pairs).map_err(|e| ctx.at("pairs", 0, "pairs".into(), e.to_string()))
}

pub fn subgroup_to_json(h: &SubgroupSpec) -> Value {
    let rows: Vec<Vec<String>> = (0..h.codim())
        .map(|r| h.relations().row(r).iter().map(ToString::to_string).collect())
        .collect();
    // entries are written as numbers when they fit
    let rows: Vec<Value> = rows
        .into_iter()
        .map(|r| {
            Value::Array(
                r.into_iter()
                    .map(|s| s.parse::<i64>().map(Value::from).unwrap_or(Value::String(s)))
                    .collect(),
            )
        })
        .collect();
    json!({ "n": h.n(), "rows": rows })
}

pub fn series_to_json(phi: &PotentialSeries) -> Value {
    let n = phi.n();
    let terms: Vec<Value> = phi
        .series()
        .terms()
        .iter()
        .map(|(m, c)| {
            let coeff = if c.support_mask() == 0 {
                Value::String(fmt_rat(&c.constant_part()))
            } else {
                Value::Array(
                    c.terms()
                        .iter()
                        .map(|(mask, q)| {
                            let set: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).map(|i| i + 1).collect();
                            json!({ "tau_set": set, "q": fmt_rat(q) })
                        })
                        .collect(),
                )
            };
            json!({ "u": m.exps(), "coeff": coeff })
        })
        .collect();
    match phi.mode() {
        CoeffMode::Symbolic => json!({ "n": n, "D": phi.degree(), "mode": "symbolic", "terms": terms }),
        CoeffMode::Rational { tau } => json!({
            "n": n,
            "D": phi.degree(),
            "mode": "rational",
            "tau": tau.iter().map(fmt_rat).collect::<Vec<_>>(),
            "terms": terms,
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qlinalg::rat;

    #[test]
    fn subgroup_round_trip() {
        let h = parse_subgroup(r#"{"n": 2, "rows": [[0,1,0,0],[1,0,0,0]]}"#, "h.json").unwrap();
        assert_eq!(h.rows_i64(), vec![vec![1, 0, 0, 0], vec![0, 1, 0, 0]]);
        let again = parse_subgroup(&subgroup_to_json(&h).to_string(), "x").unwrap();
        assert_eq!(again, h);
    }

    #[test]
    fn subgroup_errors_name_the_field() {
        let e = parse_subgroup("{\"n\": 2,\n \"rows\": [[1,0,0]]}", "h.json").unwrap_err();
        assert_eq!((e.file.as_str(), e.line, e.field.as_str()), ("h.json", 2, "rows[0]"));
        let e = parse_subgroup("{\"n\": 2,\n \"rows\": [[1,0,\"x\",0]]}", "h.json").unwrap_err();
        assert_eq!(e.field, "rows[0][2]");
        assert_eq!(e.line, 2);
        let e = parse_subgroup(r#"{"n": 2}"#, "h.json").unwrap_err();
        assert!(e.message.contains("rows"), "{e}");
        let e = parse_subgroup(r#"{"n": 2, "rows": [[0,0,0,0]]}"#, "h.json").unwrap_err();
        assert!(e.message.contains("no nonzero row"), "{e}");
    }

    #[test]
    fn series_parsing() {
        let text = r#"{"n": 2, "D": 6, "mode": "symbolic", "terms": [
            {"u": [2, 2], "coeff": [{"tau_set": [1], "q": "1/2"}, {"tau_set": [], "q": 3}]},
            {"u": [4, 0], "coeff": "-1"}
        ]}"#;
        let phi = parse_series(text, "p.json").unwrap();
        assert_eq!(phi.degree(), 6);
        assert_eq!(phi.series().terms().len(), 4);
        let back = parse_series(&series_to_json(&phi).to_string(), "x").unwrap();
        assert_eq!(back, phi);

        let bad = r#"{"n": 2, "D": 6, "terms": [{"u": [2, 0], "coeff": "1"},
            {"u": [3, 1], "coeff": "1"}]}"#;
        let e = parse_series(bad, "p.json").unwrap_err();
        assert!(e.field.starts_with("terms[0]"), "{e}");
        let bad = "{\"n\": 2, \"terms\": [{\"u\": [2, 2], \"coeff\": \"1\"},\n {\"u\": [3, 1], \"coeff\": \"1\"}]}";
        let e = parse_series(bad, "p.json").unwrap_err();
        assert_eq!((e.field.as_str(), e.line), ("terms[1]", 2));
        assert!(e.message.contains("u1^3*u2"), "{e}");
    }

    #[test]
    fn rational_series_and_manifold() {
        let text = r#"{"n": 2, "D": 4, "mode": "rational", "tau": ["2", -2], "terms": []}"#;
        let phi = parse_series(text, "p.json").unwrap();
        assert_eq!(phi.mode(), &CoeffMode::Rational { tau: vec![rat(2), rat(-2)] });
        let m = parse_manifold(text, "m.json").unwrap();
        assert_eq!(m.n, 2);
        let m = parse_manifold(r#"{"n": 3}"#, "m.json").unwrap();
        assert!(m.potential.is_none());
        let e = parse_manifold(r#"{"n": 3, "potential": {"n": 2, "terms": []}}"#, "m.json").unwrap_err();
        assert_eq!(e.field, "potential.n");
        let e = parse_series(r#"{"n": 1, "mode": "rational", "terms": []}"#, "p.json").unwrap_err();
        assert_eq!(e.field, "tau");
    }

    #[test]
    fn pairs_parsing() {
        let f = parse_pairs(
            r#"{"n": 2, "pairs": [{"v": [1, 0], "w": ["0", "1/2"]}, {"v": [0, 0], "w": [0, 0]}]}"#,
            "f.json",
        )
        .unwrap();
        assert_eq!(f.n(), 2);
        let e = parse_pairs(r#"{"n": 2, "pairs": [{"v": [1], "w": [0, 1]}, {"v": [0, 0], "w": [0, 0]}]}"#, "f.json")
            .unwrap_err();
        assert_eq!(e.field, "pairs[0].v");
    }
}
