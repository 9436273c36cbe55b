use std::io::Read;

use super::{AnalyticsError, SusResponse};

fn records<R: Read>(input: R) -> impl Iterator<Item = Result<(u64, csv::StringRecord), AnalyticsError>> {
    csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(input)
        .into_records()
        .map(|r| {
            r.map(|rec| (rec.position().map_or(0, |p| p.line()), rec))
                .map_err(|e| AnalyticsError::Csv {
                    line: e.position().map_or(0, |p| p.line()),
                    message: e.to_string(),
                })
        })
}

/// Rows of `respondent_id, q1, ..., q10`. A first row whose answers are not
/// numbers is taken as a header.
pub fn read_sus_responses<R: Read>(input: R) -> Result<Vec<SusResponse>, AnalyticsError> {
    let mut out = Vec::new();
    for (i, rec) in records(input).enumerate() {
        let (line, rec) = rec?;
        if rec.len() != 11 {
            return Err(AnalyticsError::Csv {
                line,
                message: format!("expected 11 fields, found {}", rec.len()),
            });
        }
        let parsed: Result<Vec<i64>, _> = rec.iter().skip(1).map(str::parse::<i64>).collect();
        let values = match parsed {
            Ok(v) => v,
            Err(_) if i == 0 => continue,
            Err(e) => {
                return Err(AnalyticsError::Csv {
                    line,
                    message: e.to_string(),
                })
            }
        };
        let mut items = [0u8; 10];
        for (k, v) in values.iter().enumerate() {
            if !(1..=5).contains(v) {
                return Err(AnalyticsError::InvalidItem {
                    respondent: rec[0].to_string(),
                    item: k + 1,
                    value: *v,
                });
            }
            items[k] = *v as u8;
        }
        out.push(SusResponse {
            respondent_id: rec[0].to_string(),
            items,
        });
    }
    Ok(out)
}

/// Rows of `group_label, score` for exactly two groups, ordered by first
/// appearance. A non-numeric first score is taken as a header.
pub fn read_groups<R: Read>(input: R) -> Result<[(String, Vec<f64>); 2], AnalyticsError> {
    let mut groups: Vec<(String, Vec<f64>)> = Vec::new();
    for (i, rec) in records(input).enumerate() {
        let (line, rec) = rec?;
        if rec.len() != 2 {
            return Err(AnalyticsError::Csv {
                line,
                message: format!("expected 2 fields, found {}", rec.len()),
            });
        }
        let score: f64 = match rec[1].parse() {
            Ok(v) => v,
            Err(_) if i == 0 => continue,
            Err(e) => {
                return Err(AnalyticsError::Csv {
                    line,
                    message: format!("{e}"),
                })
            }
        };
        match groups.iter_mut().find(|(l, _)| l == &rec[0]) {
            Some((_, v)) => v.push(score),
            None => groups.push((rec[0].to_string(), vec![score])),
        }
    }
    match <[(String, Vec<f64>); 2]>::try_from(groups) {
        Ok(g) => Ok(g),
        Err(g) => Err(AnalyticsError::GroupCount(g.len())),
    }
}
