//! Two-group comparison report shared by the HTTP API and the CLI.

use std::fmt;

use curation_core::analytics::{
    mann_whitney_u, shapiro_wilk, AnalyticsError, MwuOptions, MwuReport, MwuTable, SwReport,
};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Group {
    pub label: String,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Normality {
    pub label: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub result: Option<SwReport>,
    /// Why the test could not run, e.g. too few observations.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareReport {
    pub labels: [String; 2],
    pub normality: [Normality; 2],
    pub mwu: MwuReport,
    pub table: MwuTable,
}

fn normality(g: &Group) -> Normality {
    match shapiro_wilk(&g.values) {
        Ok(r) => Normality {
            label: g.label.clone(),
            result: Some(r),
            error: None,
        },
        Err(e) => Normality {
            label: g.label.clone(),
            result: None,
            error: Some(e.to_string()),
        },
    }
}

pub fn compare(g1: &Group, g2: &Group, opts: &MwuOptions) -> Result<CompareReport, AnalyticsError> {
    let mwu = mann_whitney_u(&g1.values, &g2.values, opts)?;
    Ok(CompareReport {
        labels: [g1.label.clone(), g2.label.clone()],
        normality: [normality(g1), normality(g2)],
        table: mwu.table(),
        mwu,
    })
}

impl fmt::Display for CompareReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "group 1 = {}, group 2 = {}", self.labels[0], self.labels[1])?;
        writeln!(f)?;
        writeln!(f, "Shapiro-Wilk")?;
        for n in &self.normality {
            match (&n.result, &n.error) {
                (Some(r), _) => writeln!(f, "  {:<12} W = {:.3}  df = {}  p = {:.3}", n.label, r.statistic, r.df, r.p)?,
                (None, Some(e)) => writeln!(f, "  {:<12} not run: {e}", n.label)?,
                (None, None) => {}
            }
        }
        writeln!(f)?;
        write!(f, "{}", self.mwu)
    }
}
