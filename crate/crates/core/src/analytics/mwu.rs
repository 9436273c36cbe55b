use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use super::{round_dp, AnalyticsError};
use crate::exec::Exec;

/// Largest number of labelings enumerated in `Auto` mode.
pub const ENUMERATION_LIMIT: f64 = 1e6;
const MC_CHUNK: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum ExactMode {
    /// Enumerate when the labeling count allows, otherwise Monte Carlo.
    #[default]
    Auto,
    Enumerate,
    MonteCarlo,
    Off,
}

impl FromStr for ExactMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "auto" => Ok(ExactMode::Auto),
            "enumerate" | "full" => Ok(ExactMode::Enumerate),
            "monte-carlo" | "mc" => Ok(ExactMode::MonteCarlo),
            "off" | "none" => Ok(ExactMode::Off),
            _ => Err(format!("unknown exact mode {s:?} (auto, enumerate, monte-carlo, off)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind")]
pub enum ExactMethod {
    FullEnumeration,
    MonteCarlo { draws: usize, seed: u64 },
    None,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MwuOptions {
    pub exact: ExactMode,
    pub draws: usize,
    pub seed: u64,
    pub exec: Exec,
}

impl Default for MwuOptions {
    fn default() -> Self {
        Self {
            exact: ExactMode::Auto,
            draws: 100_000,
            seed: 42,
            exec: Exec::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MwuReport {
    pub n1: usize,
    pub n2: usize,
    pub mean_rank_1: f64,
    pub mean_rank_2: f64,
    pub rank_sum_1: f64,
    pub rank_sum_2: f64,
    pub u1: f64,
    pub u2: f64,
    #[serde(rename = "U")]
    pub u: f64,
    #[serde(rename = "W")]
    pub w: f64,
    #[serde(rename = "Z")]
    pub z: f64,
    /// Tie-corrected standard deviation of U.
    pub sigma: f64,
    /// Two-tailed, from Z without continuity correction.
    pub p_asymptotic: f64,
    /// Two-tailed with a 0.5 continuity correction.
    pub p_asymptotic_cc: f64,
    pub p_exact: Option<f64>,
    pub exact_method: ExactMethod,
}

/// Report values at the precision the result tables use.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MwuTable {
    pub mean_rank_1: f64,
    pub mean_rank_2: f64,
    pub rank_sum_1: f64,
    pub rank_sum_2: f64,
    #[serde(rename = "U")]
    pub u: f64,
    #[serde(rename = "W")]
    pub w: f64,
    #[serde(rename = "Z")]
    pub z: f64,
    pub p_asymptotic: f64,
    pub p_exact: Option<f64>,
}

impl MwuReport {
    pub fn table(&self) -> MwuTable {
        MwuTable {
            mean_rank_1: round_dp(self.mean_rank_1, 2),
            mean_rank_2: round_dp(self.mean_rank_2, 2),
            rank_sum_1: round_dp(self.rank_sum_1, 2),
            rank_sum_2: round_dp(self.rank_sum_2, 2),
            u: round_dp(self.u, 3),
            w: round_dp(self.w, 3),
            z: round_dp(self.z, 3),
            p_asymptotic: round_dp(self.p_asymptotic, 3),
            p_exact: self.p_exact.map(|p| round_dp(p, 3)),
        }
    }
}

impl fmt::Display for MwuReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let t = self.table();
        writeln!(f, "group  n   mean rank  rank sum")?;
        writeln!(f, "1      {:<3} {:<10.2} {:.2}", self.n1, t.mean_rank_1, t.rank_sum_1)?;
        writeln!(f, "2      {:<3} {:<10.2} {:.2}", self.n2, t.mean_rank_2, t.rank_sum_2)?;
        writeln!(f, "Mann-Whitney U  {:.3}", t.u)?;
        writeln!(f, "Wilcoxon W      {:.3}", t.w)?;
        writeln!(f, "Z               {:.3}", t.z)?;
        writeln!(f, "Asymp. Sig.     {:.3}", t.p_asymptotic)?;
        match (t.p_exact, self.exact_method) {
            (Some(p), ExactMethod::MonteCarlo { draws, seed }) => {
                writeln!(f, "Exact Sig.      {p:.3} (Monte Carlo, {draws} draws, seed {seed})")
            }
            (Some(p), _) => writeln!(f, "Exact Sig.      {p:.3}"),
            (None, _) => Ok(()),
        }
    }
}

/// 1-based ranks with ties sharing their average rank, in input order.
pub fn midranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = r;
        }
        i = j + 1;
    }
    ranks
}

/// Sizes of the groups of tied values.
fn tie_sizes(values: &[f64]) -> Vec<usize> {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let mut out = Vec::new();
    let mut i = 0;
    while i < v.len() {
        let j = v[i..].iter().take_while(|x| **x == v[i]).count();
        out.push(j);
        i += j;
    }
    out
}

fn binomial(n: usize, k: usize) -> f64 {
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Number of group-1 labelings whose doubled U deviates from its mean by
/// at least `dev`, out of all C(N, n1), computed by dynamic programming
/// over doubled ranks.
fn enumerate_tail(ranks2: &[u64], n1: usize, center: u64, dev: u64) -> f64 {
    let total_sum: u64 = ranks2.iter().sum();
    let width = total_sum as usize + 1;
    let mut dp = vec![vec![0u128; width]; n1 + 1];
    dp[0][0] = 1;
    for (i, &r) in ranks2.iter().enumerate() {
        for k in (1..=n1.min(i + 1)).rev() {
            let (lo, hi) = dp.split_at_mut(k);
            let (prev, cur) = (&lo[k - 1], &mut hi[0]);
            for s in (r as usize..width).rev() {
                cur[s] += prev[s - r as usize];
            }
        }
    }
    let mut hit = 0u128;
    let mut all = 0u128;
    for (s, &c) in dp[n1].iter().enumerate() {
        if c == 0 {
            continue;
        }
        all += c;
        if (s as u64).abs_diff(center) >= dev {
            hit += c;
        }
    }
    hit as f64 / all as f64
}

fn monte_carlo_tail(ranks2: &[u64], n1: usize, center: u64, dev: u64, draws: usize, seed: u64, exec: Exec) -> f64 {
    let chunks = draws.div_ceil(MC_CHUNK);
    let hits: usize = exec
        .map_range(chunks, |c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c as u64);
            let mut pool = ranks2.to_vec();
            let n = pool.len();
            let count = MC_CHUNK.min(draws - c * MC_CHUNK);
            (0..count)
                .filter(|_| {
                    let mut s = 0;
                    for i in 0..n1 {
                        let j = rng.random_range(i..n);
                        pool.swap(i, j);
                        s += pool[i];
                    }
                    s.abs_diff(center) >= dev
                })
                .count()
        })
        .into_iter()
        .sum();
    (hits + 1) as f64 / (draws + 1) as f64
}

pub fn mann_whitney_u(g1: &[f64], g2: &[f64], opts: &MwuOptions) -> Result<MwuReport, AnalyticsError> {
    if g1.is_empty() || g2.is_empty() {
        return Err(AnalyticsError::Empty);
    }
    let all: Vec<f64> = g1.iter().chain(g2).copied().collect();
    if let Some(i) = all.iter().position(|v| !v.is_finite()) {
        return Err(AnalyticsError::NonFinite(i));
    }
    let (n1, n2) = (g1.len(), g2.len());
    let n = n1 + n2;
    let ranks = midranks(&all);
    let rank_sum_1: f64 = ranks[..n1].iter().sum();
    let rank_sum_2: f64 = ranks[n1..].iter().sum();
    let (n1f, n2f, nf) = (n1 as f64, n2 as f64, n as f64);
    let u1 = rank_sum_1 - n1f * (n1f + 1.0) / 2.0;
    let u2 = rank_sum_2 - n2f * (n2f + 1.0) / 2.0;
    let u = u1.min(u2);
    let w = rank_sum_1.min(rank_sum_2);

    let ties: f64 = tie_sizes(&all)
        .iter()
        .map(|&t| (t as f64).powi(3) - t as f64)
        .sum();
    let var = n1f * n2f / 12.0 * ((nf + 1.0) - ties / (nf * (nf - 1.0)));
    let sigma = var.max(0.0).sqrt();
    let mean_u = n1f * n2f / 2.0;
    let normal = Normal::standard();
    let (z, p_asymptotic, p_asymptotic_cc) = if sigma > 0.0 {
        let z = (u - mean_u) / sigma;
        let zc = ((u - mean_u).abs() - 0.5).max(0.0) / sigma;
        (z, (2.0 * normal.sf(z.abs())).min(1.0), (2.0 * normal.sf(zc)).min(1.0))
    } else {
        (0.0, 1.0, 1.0)
    };

    let ranks2: Vec<u64> = ranks.iter().map(|r| (2.0 * r).round() as u64).collect();
    let sum1_2: u64 = ranks2[..n1].iter().sum();
    let center = (n1 * (n1 + 1) + n1 * n2) as u64;
    let dev = sum1_2.abs_diff(center);
    let method = match opts.exact {
        ExactMode::Off => ExactMethod::None,
        ExactMode::Enumerate => ExactMethod::FullEnumeration,
        ExactMode::MonteCarlo => ExactMethod::MonteCarlo {
            draws: opts.draws,
            seed: opts.seed,
        },
        ExactMode::Auto if binomial(n, n1) <= ENUMERATION_LIMIT => ExactMethod::FullEnumeration,
        ExactMode::Auto => ExactMethod::MonteCarlo {
            draws: opts.draws,
            seed: opts.seed,
        },
    };
    let p_exact = match method {
        ExactMethod::None => None,
        ExactMethod::FullEnumeration => Some(enumerate_tail(&ranks2, n1, center, dev)),
        ExactMethod::MonteCarlo { draws, seed } => Some(monte_carlo_tail(
            &ranks2, n1, center, dev, draws.max(1), seed, opts.exec,
        )),
    };

    Ok(MwuReport {
        n1,
        n2,
        mean_rank_1: rank_sum_1 / n1f,
        mean_rank_2: rank_sum_2 / n2f,
        rank_sum_1,
        rank_sum_2,
        u1,
        u2,
        u,
        w,
        z,
        sigma,
        p_asymptotic,
        p_asymptotic_cc,
        p_exact,
        exact_method: method,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_ranked() {
        let r = mann_whitney_u(&[1.0, 3.0], &[2.0, 4.0], &MwuOptions::default()).unwrap();
        assert_eq!((r.rank_sum_1, r.rank_sum_2), (4.0, 6.0));
        assert_eq!((r.u, r.w), (1.0, 4.0));
    }

    #[test]
    fn separated_three_by_three() {
        let r = mann_whitney_u(&[1.0, 2.0, 3.0], &[4.0, 5.0, 6.0], &MwuOptions::default()).unwrap();
        assert_eq!(r.u, 0.0);
        assert_eq!(r.exact_method, ExactMethod::FullEnumeration);
        assert!((r.p_exact.unwrap() - 0.1).abs() < 1e-15);
    }

    #[test]
    fn midranks_with_ties() {
        assert_eq!(midranks(&[10.0, 20.0, 10.0, 30.0, 20.0]), vec![1.5, 3.5, 1.5, 5.0, 3.5]);
    }

    #[test]
    fn half_up_rounding() {
        assert_eq!(round_dp(14.125, 2), 14.13);
        assert_eq!(round_dp(26.875, 2), 26.88);
    }

    #[test]
    fn monte_carlo_is_strategy_independent() {
        let g1: Vec<f64> = (0..30).map(|i| (i * 7 % 11) as f64).collect();
        let g2: Vec<f64> = (0..30).map(|i| (i * 5 % 13) as f64).collect();
        let mut o = MwuOptions {
            exact: ExactMode::MonteCarlo,
            draws: 10_000,
            ..Default::default()
        };
        o.exec = Exec::Sequential;
        let a = mann_whitney_u(&g1, &g2, &o).unwrap();
        o.exec = Exec::Parallel;
        let b = mann_whitney_u(&g1, &g2, &o).unwrap();
        assert_eq!(a, b);
    }
}
