use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser, Debug)]
#[command(name = "cuspcert", version, about = "Anomalous subvariety checks for cusped manifolds")]
pub struct Cli {
    /// Report format.
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    pub format: Format,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    /// Cusp shapes stay formal (rationally independent).
    Symbolic,
    /// Cusp shapes are the rationals given by --tau or the potential.
    Rational,
}

#[derive(Args, Debug, Clone)]
pub struct ShapeArgs {
    #[arg(long, value_enum, default_value_t = ModeArg::Symbolic)]
    pub mode: ModeArg,

    /// Comma-separated cusp shapes, e.g. `2,-1/3`.
    #[arg(long, allow_hyphen_values = true)]
    pub tau: Option<String>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Classify one subgroup against a manifold.
    CheckSubgroup {
        /// Manifold file: `{"n": …, "potential": …}` or a bare potential.
        #[arg(long)]
        input: PathBuf,
        /// Subgroup file: `{"n": …, "rows": [[…], …]}`.
        #[arg(long)]
        subgroup: PathBuf,
        #[command(flatten)]
        shapes: ShapeArgs,
    },
    /// Enumerate and classify all subgroups in a coefficient box.
    Scan {
        #[arg(long)]
        input: PathBuf,
        /// Codimension or inclusive range like `1..3`.
        #[arg(long)]
        codim: String,
        /// Largest absolute relation coefficient.
        #[arg(long, default_value_t = 1)]
        max_coeff: i64,
        /// Worker threads.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        /// Refuse boxes with more candidate relation sets than this.
        #[arg(long, default_value_t = 5_000_000)]
        max_candidates: u128,
        /// Truncation for the isolation findings, if the manifold has a potential.
        #[arg(long)]
        truncation: Option<u32>,
        #[command(flatten)]
        shapes: ShapeArgs,
    },
    /// Tests on the manifold's potential series.
    Series {
        #[arg(value_enum)]
        check: SeriesCheck,
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        truncation: Option<u32>,
        #[command(flatten)]
        shapes: ShapeArgs,
        /// Cusp set A, e.g. `1,2`.
        #[arg(long)]
        set_a: Option<String>,
        /// Cusp set B for wgi.
        #[arg(long)]
        set_b: Option<String>,
        /// Cusp set C (kept complete) for wgi.
        #[arg(long)]
        set_c: Option<String>,
        /// Target form for theta, e.g. `v1`.
        #[arg(long, allow_hyphen_values = true)]
        target: Option<String>,
        /// Generator form for theta; repeat for several.
        #[arg(long = "gen", allow_hyphen_values = true)]
        gens: Vec<String>,
        /// Number of trailing generators Θ must ignore.
        #[arg(long, default_value_t = 0)]
        t_count: usize,
        /// `a,b,c,d` for two-cusp.
        #[arg(long, allow_hyphen_values = true)]
        coeffs: Option<String>,
    },
    /// Deficient-subset extraction for a pair family.
    Deficient {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = Method::Both)]
        method: Method,
    },
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum SeriesCheck {
    Sgi,
    Wgi,
    Theta,
    TwoCusp,
    Parity,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Brute,
    Constructive,
    Both,
}
