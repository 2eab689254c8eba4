use serde::Serialize;

use cuspcert_core::anomaly::AnomalyReport;
use cuspcert_core::subgroup::SubgroupSpec;

pub const TOOL: &str = "cuspcert";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Common report wrapper: tool version, the configuration echo and the result.
#[derive(Serialize, Debug)]
pub struct Envelope<C, R> {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: &'static str,
    pub config: C,
    pub result: R,
}

impl<C: Serialize, R: Serialize> Envelope<C, R> {
    pub fn new(command: &'static str, config: C, result: R) -> Self {
        Envelope {
            tool: TOOL,
            version: VERSION,
            command,
            config,
            result,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

/// Subgroup relation rows as integers; huge entries fall back to strings.
pub fn rows_of(h: &SubgroupSpec) -> Vec<Vec<serde_json::Value>> {
    let rel = h.relations();
    (0..rel.rows())
        .map(|r| {
            rel.row(r)
                .iter()
                .map(|x| {
                    let s = x.to_string();
                    s.parse::<i64>().map(Into::into).unwrap_or(serde_json::Value::String(s))
                })
                .collect()
        })
        .collect()
}

#[derive(Serialize, Debug, Clone, PartialEq, Eq)]
pub struct SubgroupEntry {
    pub rows: Vec<Vec<serde_json::Value>>,
    pub relations: String,
    pub codim: usize,
    pub jacobian_rank: usize,
    pub first_order_dim: usize,
    pub anomalous: bool,
    /// 1-based.
    pub complete_cusps: Vec<usize>,
    pub b: Option<i64>,
    pub counterexample: bool,
    /// Anomalous without a complete cusp under fixed rational shapes, which
    /// are not rationally independent; not evidence against the theorem.
    pub degenerate_shapes: bool,
}

impl SubgroupEntry {
    pub fn new(r: &AnomalyReport, counterexample: bool, degenerate_shapes: bool) -> Self {
        SubgroupEntry {
            rows: rows_of(&r.subgroup),
            relations: r.subgroup.to_string(),
            codim: r.codim,
            jacobian_rank: r.jacobian_rank,
            first_order_dim: r.first_order_dim,
            anomalous: r.anomalous,
            complete_cusps: r.complete_cusps.iter().map(|i| i + 1).collect(),
            b: r.b,
            counterexample,
            degenerate_shapes,
        }
    }

    pub fn text_line(&self) -> String {
        let mut s = format!(
            "{}  codim {}  rank {}  dim {}  ",
            self.relations, self.codim, self.jacobian_rank, self.first_order_dim
        );
        if self.anomalous {
            let cusps: Vec<String> = self.complete_cusps.iter().map(ToString::to_string).collect();
            s.push_str(&format!("ANOMALOUS cusps [{}]", cusps.join(",")));
            if let Some(b) = self.b {
                s.push_str(&format!(" b={b}"));
            }
            if self.counterexample {
                s.push_str("  COUNTEREXAMPLE");
            }
            if self.degenerate_shapes {
                s.push_str("  degenerate shapes");
            }
        } else {
            s.push_str("not anomalous");
        }
        s
    }
}
