use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use permoment::{Pattern, Permutation, Statistic};

#[derive(Parser, Debug)]
#[command(
    name = "permoment",
    version,
    about = "Exact moments of permutation pattern statistics",
    propagate_version = true
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct GlobalArgs {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Worker threads for enumeration (default: all cores).
    #[arg(long, global = true, value_name = "N")]
    pub threads: Option<usize>,
    /// Also print decimal approximations with this many digits.
    #[arg(long, global = true, value_name = "DIGITS")]
    pub decimal: Option<usize>,
    /// TOML file supplying defaults for any flag.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Largest n for exhaustive enumeration (overrides PERMOMENT_MAX_N).
    #[arg(long, global = true, value_name = "N")]
    pub max_n: Option<usize>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Number of occurrences of a pattern in a permutation.
    Count(PatternPerm),
    /// List the occurrences of a pattern in a permutation.
    Occurrences(PatternPerm),
    /// M(f^r, n), the sum of f^r over the symmetric group.
    Aggregate(MomentArgs),
    /// E(f^r) under the uniform distribution.
    Expect(MomentArgs),
    /// Var(f) under the uniform distribution.
    Variance(VarianceArgs),
    /// Fit M(f^r, n) in the shifted-factorial basis.
    Fit(FitArgs),
    /// Merge census of r copies of a pattern, or of a list of patterns.
    Census(CensusArgs),
    /// M(cnt_P^r, n) from the merge census.
    Corollary(CorollaryArgs),
    /// Closed forms for expected counts and descent-type moments.
    #[command(subcommand)]
    ClosedForm(ClosedForm),
    /// Limit-law checks.
    #[command(subcommand)]
    Clt(Clt),
    /// Aggregates of linear valuations in closed form.
    Linearity(LinearityArgs),
    /// Recompute every reference formula and worked example.
    ReproducePaper(ReproduceArgs),
}

#[derive(Args, Debug)]
pub struct PatternPerm {
    /// Pattern text (e.g. "3[12];D={2}"), JSON form, or a file holding either.
    #[arg(long, value_parser = pattern_arg)]
    pub pattern: Pattern,
    /// Permutation as a digit word or comma-separated list.
    #[arg(long, value_parser = perm_arg)]
    pub perm: Permutation,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    /// Product decomposition for r = 1, enumeration otherwise.
    Auto,
    Brute,
    Fast,
    /// Merge census formula; pattern counts only.
    Census,
}

#[derive(Args, Debug)]
pub struct MomentArgs {
    /// Preset name, cnt:<pattern>, JSON spec, or a file holding one.
    #[arg(long, value_parser = stat_arg)]
    pub stat: Statistic,
    /// Values of n: "7", "3..8" or "4,6,8".
    #[arg(long, value_parser = n_list_arg)]
    pub n: NList,
    /// Moment order.
    #[arg(long, default_value_t = 1)]
    pub r: u32,
    #[arg(long, value_enum, default_value_t = MethodArg::Auto)]
    pub method: MethodArg,
}

#[derive(Args, Debug)]
pub struct VarianceArgs {
    #[arg(long, value_parser = stat_arg)]
    pub stat: Statistic,
    #[arg(long, value_parser = n_list_arg)]
    pub n: NList,
}

#[derive(Args, Debug)]
pub struct FitArgs {
    #[arg(long, value_parser = stat_arg, required_unless_present = "data")]
    pub stat: Option<Statistic>,
    #[arg(long, default_value_t = 1)]
    pub r: u32,
    /// Search the theorem window for the narrowest fitting offsets.
    #[arg(long)]
    pub auto: bool,
    /// Offsets to fit, "lo..hi" (default: the theorem window).
    #[arg(long, value_parser = range_arg, allow_hyphen_values = true)]
    pub offsets: Option<(i64, i64)>,
    /// Sample points, e.g. "2..7" (default: from the validity threshold).
    #[arg(long, value_parser = n_list_arg)]
    pub n: Option<NList>,
    /// Held-out verification points beyond the square system.
    #[arg(long, default_value_t = 2)]
    pub held_out: usize,
    /// Data file of (n, value) pairs, CSV or JSON, instead of computing.
    #[arg(long, value_name = "FILE")]
    pub data: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct CensusArgs {
    /// Pattern; repeat to merge distinct patterns.
    #[arg(long, value_parser = pattern_arg, required = true, action = clap::ArgAction::Append)]
    pub pattern: Vec<Pattern>,
    /// Number of copies when a single pattern is given.
    #[arg(long)]
    pub r: Option<usize>,
}

#[derive(Args, Debug)]
pub struct CorollaryArgs {
    #[arg(long, value_parser = pattern_arg)]
    pub pattern: Pattern,
    #[arg(long)]
    pub r: usize,
    /// Evaluate at these n.
    #[arg(long, value_parser = n_list_arg)]
    pub n: Option<NList>,
    /// Multiply by (n-k)! with k the copy length instead of the merged length.
    #[arg(long)]
    pub literal_factorial: bool,
}

#[derive(Subcommand, Debug)]
pub enum ClosedForm {
    /// E(cnt_P) for a pattern.
    ExpectedCount {
        #[arg(long, value_parser = pattern_arg)]
        pattern: Pattern,
        #[arg(long, value_parser = n_list_arg)]
        n: NList,
    },
    /// E(des^r).
    Euler {
        #[arg(long)]
        r: u32,
        #[arg(long, value_parser = n_list_arg)]
        n: NList,
    },
    /// E(adj^r).
    Adjacency {
        #[arg(long)]
        r: u32,
        #[arg(long, value_parser = n_list_arg)]
        n: NList,
    },
}

#[derive(Subcommand, Debug)]
pub enum Clt {
    /// a_σ(2k−1) against C(2k−1,k)².
    Burstein {
        #[arg(long, value_parser = perm_arg)]
        sigma: Permutation,
    },
    /// Mean of a_{σ,σ'}(2k−1) over σ'.
    Mean {
        #[arg(long, value_parser = perm_arg)]
        sigma: Permutation,
    },
    /// Leading coefficients of Var(cnt_P).
    Variance {
        #[arg(long, value_parser = pattern_arg)]
        pattern: Pattern,
    },
    /// Overlap inequality for a vincular pattern.
    Vincular {
        #[arg(long, value_parser = pattern_arg)]
        pattern: Pattern,
    },
    /// Configuration census for a vincular pattern.
    Conjecture {
        #[arg(long, value_parser = pattern_arg)]
        pattern: Pattern,
    },
    /// Gaps |E(adj^r) − B_r| over several n.
    Poisson {
        /// Moment orders.
        #[arg(long, value_parser = n_list_arg, default_value = "1..3")]
        r: NList,
        #[arg(long, value_parser = n_list_arg, default_value = "100,1000,10000")]
        n: NList,
        #[arg(long, default_value_t = permoment::clt::DEFAULT_POISSON_TOLERANCE)]
        tolerance: f64,
    },
}

#[derive(Args, Debug)]
pub struct LinearityArgs {
    #[arg(long, value_parser = pattern_arg)]
    pub pattern: Pattern,
    /// Q1 as a linear polynomial in y1..yk.
    #[arg(long, default_value = "1")]
    pub q1: String,
    /// Q2 as a linear polynomial in y1..yk.
    #[arg(long, default_value = "1")]
    pub q2: String,
    /// Case 1, 2 or 3 (default: inferred).
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3))]
    pub case: Option<u8>,
    #[arg(long, value_parser = n_list_arg)]
    pub n: NList,
}

#[derive(Args, Debug)]
pub struct ReproduceArgs {
    /// Use (n-k)! with the copy length in the corollary rows.
    #[arg(long)]
    pub literal_factorial: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NList(pub Vec<usize>);

fn read_inline_or_file(text: &str) -> Result<String, String> {
    let p = Path::new(text);
    if !text.trim_start().starts_with('{') && p.is_file() {
        return std::fs::read_to_string(p).map_err(|e| format!("{}: {e}", p.display()));
    }
    Ok(text.to_string())
}

pub fn pattern_arg(text: &str) -> Result<Pattern, String> {
    let body = read_inline_or_file(text)?;
    Pattern::parse_any(body.trim()).map_err(|e| e.to_string())
}

pub fn perm_arg(text: &str) -> Result<Permutation, String> {
    text.parse().map_err(|e: permoment::Error| e.to_string())
}

pub fn stat_arg(text: &str) -> Result<Statistic, String> {
    let body = read_inline_or_file(text)?;
    Statistic::load(&body).map_err(|e| e.to_string())
}

pub fn n_list_arg(text: &str) -> Result<NList, String> {
    let mut out = Vec::new();
    for part in text.split(',') {
        let part = part.trim();
        if let Some((a, b)) = part.split_once("..") {
            let a: usize = a.trim().parse().map_err(|_| format!("bad range start in {part:?}"))?;
            let b: usize = b.trim().parse().map_err(|_| format!("bad range end in {part:?}"))?;
            if a > b {
                return Err(format!("empty range {part:?}"));
            }
            out.extend(a..=b);
        } else {
            out.push(part.parse().map_err(|_| format!("bad value {part:?}"))?);
        }
    }
    if out.is_empty() {
        return Err("no values".into());
    }
    Ok(NList(out))
}

pub fn range_arg(text: &str) -> Result<(i64, i64), String> {
    let (a, b) = text.split_once("..").ok_or("expected lo..hi")?;
    let a: i64 = a.trim().parse().map_err(|_| format!("bad offset {a:?}"))?;
    let b: i64 = b.trim().parse().map_err(|_| format!("bad offset {b:?}"))?;
    if a > b {
        return Err(format!("empty offset range {text:?}"));
    }
    Ok((a, b))
}
