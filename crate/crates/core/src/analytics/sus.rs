use serde::{Deserialize, Serialize};

use super::AnalyticsError;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SusResponse {
    pub respondent_id: String,
    pub items: [u8; 10],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SusSummary {
    pub n: usize,
    pub mean_sus: f64,
    pub learnability: f64,
    pub usability: f64,
    pub percentile: f64,
    pub grade: String,
    pub adjective: String,
}

impl SusResponse {
    pub fn new(respondent_id: impl Into<String>, items: [u8; 10]) -> Result<Self, AnalyticsError> {
        let r = Self {
            respondent_id: respondent_id.into(),
            items,
        };
        r.validate()?;
        Ok(r)
    }

    pub fn validate(&self) -> Result<(), AnalyticsError> {
        match self.items.iter().position(|v| !(1..=5).contains(v)) {
            Some(i) => Err(AnalyticsError::InvalidItem {
                respondent: self.respondent_id.clone(),
                item: i + 1,
                value: self.items[i] as i64,
            }),
            None => Ok(()),
        }
    }

    /// Contribution 0..4 of item `i` (0-based): odd-numbered items are
    /// positively worded, even-numbered ones reversed.
    fn contribution(&self, i: usize) -> f64 {
        let v = self.items[i] as f64;
        if i % 2 == 0 {
            v - 1.0
        } else {
            5.0 - v
        }
    }
}

pub fn sus_score(r: &SusResponse) -> Result<f64, AnalyticsError> {
    r.validate()?;
    Ok(2.5 * (0..10).map(|i| r.contribution(i)).sum::<f64>())
}

/// Items 4 and 10, scaled to 0..100.
pub fn learnability(r: &SusResponse) -> Result<f64, AnalyticsError> {
    r.validate()?;
    Ok(12.5 * (r.contribution(3) + r.contribution(9)))
}

/// The other eight items, scaled to 0..100.
pub fn usability(r: &SusResponse) -> Result<f64, AnalyticsError> {
    r.validate()?;
    let raw: f64 = (0..10)
        .filter(|&i| i != 3 && i != 9)
        .map(|i| r.contribution(i))
        .sum();
    Ok(3.125 * raw)
}

/// `(score, percentile)` points of the curved grading scale.
pub const PERCENTILE_ANCHORS: [(f64, f64); 16] = [
    (0.0, 0.0),
    (51.7, 15.0),
    (59.5, 30.0),
    (62.7, 35.0),
    (65.0, 41.0),
    (68.0, 50.0),
    (71.1, 60.0),
    (72.6, 65.0),
    (74.1, 70.0),
    (77.2, 80.0),
    (77.3, 81.0),
    (78.9, 85.0),
    (80.8, 90.0),
    (81.5, 92.0),
    (84.1, 96.0),
    (100.0, 100.0),
];

/// Percentile rank of a SUS score, piecewise linear between anchors.
pub fn percentile_rank(score: f64) -> f64 {
    let s = score.clamp(0.0, 100.0);
    let k = PERCENTILE_ANCHORS
        .windows(2)
        .position(|w| s <= w[1].0)
        .unwrap_or(PERCENTILE_ANCHORS.len() - 2);
    let (x0, y0) = PERCENTILE_ANCHORS[k];
    let (x1, y1) = PERCENTILE_ANCHORS[k + 1];
    y0 + (y1 - y0) * (s - x0) / (x1 - x0)
}

pub fn grade(percentile: f64) -> &'static str {
    const BANDS: [(f64, &str); 10] = [
        (96.0, "A+"),
        (90.0, "A"),
        (85.0, "A-"),
        (80.0, "B+"),
        (70.0, "B"),
        (65.0, "B-"),
        (60.0, "C+"),
        (35.0, "C"),
        (25.0, "C-"),
        (15.0, "D"),
    ];
    BANDS
        .iter()
        .find(|(lo, _)| percentile >= *lo)
        .map_or("F", |(_, g)| g)
}

pub fn adjective(score: f64) -> &'static str {
    if score > 85.5 {
        "Excellent"
    } else if score >= 72.9 {
        "Good"
    } else if score >= 51.7 {
        "OK"
    } else {
        "Poor"
    }
}

pub fn sus_summary(responses: &[SusResponse]) -> Result<SusSummary, AnalyticsError> {
    if responses.is_empty() {
        return Err(AnalyticsError::Empty);
    }
    let n = responses.len() as f64;
    let mut totals = [0.0; 3];
    for r in responses {
        totals[0] += sus_score(r)?;
        totals[1] += learnability(r)?;
        totals[2] += usability(r)?;
    }
    let mean_sus = totals[0] / n;
    let percentile = percentile_rank(mean_sus);
    Ok(SusSummary {
        n: responses.len(),
        mean_sus,
        learnability: totals[1] / n,
        usability: totals[2] / n,
        percentile,
        grade: grade(percentile).to_string(),
        adjective: adjective(mean_sus).to_string(),
    })
}
