//! Evaluation statistics: SUS scoring and grading, the Shapiro-Wilk
//! normality test and the Mann-Whitney U test.

mod io;
mod mwu;
mod shapiro;
mod sus;

use thiserror::Error;

pub use io::{read_groups, read_sus_responses};
pub use mwu::{
    mann_whitney_u, midranks, ExactMethod, ExactMode, MwuOptions, MwuReport, MwuTable,
    ENUMERATION_LIMIT,
};
pub use shapiro::{shapiro_wilk, SwReport};
pub use sus::{
    adjective, grade, learnability, percentile_rank, sus_score, sus_summary, usability,
    SusResponse, SusSummary, PERCENTILE_ANCHORS,
};

#[derive(Debug, Error, PartialEq)]
pub enum AnalyticsError {
    #[error("respondent {respondent}: item {item} = {value} is outside 1..5")]
    InvalidItem {
        respondent: String,
        item: usize,
        value: i64,
    },
    #[error("no observations")]
    Empty,
    #[error("sample size {n} outside {min}..={max}")]
    SampleSize { n: usize, min: usize, max: usize },
    #[error("observation {0} is not finite")]
    NonFinite(usize),
    #[error("all observations are equal")]
    ZeroVariance,
    #[error("comparison needs exactly two groups, found {0}")]
    GroupCount(usize),
    #[error("line {line}: {message}")]
    Csv { line: u64, message: String },
}

/// Half-up rounding to `dp` decimals, as used for rendered reports.
pub fn round_dp(x: f64, dp: i32) -> f64 {
    let f = 10f64.powi(dp);
    (x * f).round() / f
}
