//! Evaluation statistics: RMSE, percentage prediction error, normal-theory
//! confidence intervals, correlation coefficients and z-scores.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal, StudentsT};

use crate::error::{Error, Result};

fn check_pair(y: &[f64], yhat: &[f64]) -> Result<()> {
    if y.len() != yhat.len() {
        return Err(Error::LengthMismatch(y.len(), yhat.len()));
    }
    if y.is_empty() {
        return Err(Error::Empty);
    }
    Ok(())
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Sample standard deviation (divisor `n - 1`).
pub fn sample_std(v: &[f64]) -> f64 {
    let mu = mean(v);
    (v.iter().map(|x| (x - mu).powi(2)).sum::<f64>() / (v.len() - 1) as f64).sqrt()
}

pub fn rmse(y: &[f64], yhat: &[f64]) -> Result<f64> {
    check_pair(y, yhat)?;
    let mse = y
        .iter()
        .zip(yhat)
        .map(|(a, b)| (a - b).powi(2))
        .sum::<f64>()
        / y.len() as f64;
    Ok(mse.sqrt())
}

/// Mean of `|y - yhat| / |y| * 100` over samples with `y != 0`.
///
/// Returns the percentage and the number of samples skipped because their
/// target was zero.
pub fn pe(y: &[f64], yhat: &[f64]) -> Result<(f64, usize)> {
    check_pair(y, yhat)?;
    let mut sum = 0.0;
    let mut used = 0usize;
    for (&t, &p) in y.iter().zip(yhat) {
        if t == 0.0 {
            continue;
        }
        sum += ((t - p) / t).abs() * 100.0;
        used += 1;
    }
    if used == 0 {
        return Err(Error::AllTargetsZero);
    }
    Ok((sum / used as f64, y.len() - used))
}

/// Two-sided normal-approximation interval `mean ± z * s / sqrt(n)`.
pub fn confidence_interval(samples: &[f64], level: f64) -> Result<(f64, f64)> {
    if samples.len() < 2 {
        return Err(Error::TooFewSamples {
            needed: 2,
            got: samples.len(),
        });
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::ConfigError(format!("confidence level {level} outside (0, 1)")));
    }
    let z = Normal::standard().inverse_cdf(0.5 + level / 2.0);
    let mu = mean(samples);
    let half = z * sample_std(samples) / (samples.len() as f64).sqrt();
    Ok((mu - half, mu + half))
}

/// True when two closed intervals share at least one point.
pub fn intervals_overlap(a: (f64, f64), b: (f64, f64)) -> bool {
    a.0 <= b.1 && b.0 <= a.1
}

fn check_corr(x: &[f64], y: &[f64]) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::LengthMismatch(x.len(), y.len()));
    }
    if x.len() < 3 {
        return Err(Error::TooFewSamples {
            needed: 3,
            got: x.len(),
        });
    }
    Ok(())
}

fn product_moment(x: &[f64], y: &[f64]) -> Result<f64> {
    let mx = mean(x);
    let my = mean(y);
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::ConstantInput);
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Pearson's r and its two-sided p-value from a t-test with `n - 2` degrees
/// of freedom.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<(f64, f64)> {
    check_corr(x, y)?;
    let r = product_moment(x, y)?;
    let df = (x.len() - 2) as f64;
    let p = if r.abs() >= 1.0 {
        0.0
    } else {
        let t = r * (df / (1.0 - r * r)).sqrt();
        let dist = StudentsT::new(0.0, 1.0, df).expect("df > 0");
        (2.0 * dist.sf(t.abs())).min(1.0)
    };
    Ok((r, p))
}

/// Ranks starting at 1, ties sharing their average rank.
pub fn average_ranks(v: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..v.len()).collect();
    order.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let mut ranks = vec![0.0; v.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && v[order[j + 1]] == v[order[i]] {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0 + 1.0;
        for &o in &order[i..=j] {
            ranks[o] = r;
        }
        i = j + 1;
    }
    ranks
}

pub fn spearman(x: &[f64], y: &[f64]) -> Result<f64> {
    check_corr(x, y)?;
    product_moment(&average_ranks(x), &average_ranks(y))
}

/// Kendall's tau-b.
pub fn kendall(x: &[f64], y: &[f64]) -> Result<f64> {
    check_corr(x, y)?;
    let n = x.len();
    let (mut concordant, mut discordant) = (0i64, 0i64);
    let (mut ties_x, mut ties_y) = (0i64, 0i64);
    for i in 0..n {
        for j in i + 1..n {
            let dx = x[i] - x[j];
            let dy = y[i] - y[j];
            if dx == 0.0 {
                ties_x += 1;
            }
            if dy == 0.0 {
                ties_y += 1;
            }
            if dx == 0.0 || dy == 0.0 {
                continue;
            }
            if (dx > 0.0) == (dy > 0.0) {
                concordant += 1;
            } else {
                discordant += 1;
            }
        }
    }
    let pairs = (n * (n - 1) / 2) as i64;
    let denom = (((pairs - ties_x) * (pairs - ties_y)) as f64).sqrt();
    if denom == 0.0 {
        return Err(Error::ConstantInput);
    }
    Ok(((concordant - discordant) as f64 / denom).clamp(-1.0, 1.0))
}

/// `(v - mean) / s` with the sample standard deviation.
pub fn zscore(values: &[f64]) -> Result<Vec<f64>> {
    if values.len() < 2 {
        return Err(Error::TooFewSamples {
            needed: 2,
            got: values.len(),
        });
    }
    let mu = mean(values);
    let s = sample_std(values);
    if s == 0.0 || values.iter().all(|&v| v == values[0]) {
        return Err(Error::ConstantInput);
    }
    Ok(values.iter().map(|v| (v - mu) / s).collect())
}

/// Ordinary least-squares line `y = slope * x + intercept`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> Result<(f64, f64)> {
    check_pair(x, y)?;
    let mx = mean(x);
    let my = mean(y);
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::ConstantInput);
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    Ok((slope, my - slope * mx))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TargetMetrics {
    pub target: String,
    pub rmse: f64,
    pub pe_percent: f64,
    pub pe_excluded: usize,
    /// 95% interval, present when several runs were aggregated.
    pub ci: Option<(f64, f64)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorrelationRow {
    pub a: String,
    pub b: String,
    pub pearson: f64,
    pub p_value: f64,
    pub spearman: f64,
    pub kendall: f64,
}

impl CorrelationRow {
    pub fn compute(a: &str, b: &str, x: &[f64], y: &[f64]) -> Result<Self> {
        let (r, p) = pearson(x, y)?;
        Ok(CorrelationRow {
            a: a.to_string(),
            b: b.to_string(),
            pearson: r,
            p_value: p,
            spearman: spearman(x, y)?,
            kendall: kendall(x, y)?,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZScoreRow {
    pub method: String,
    pub target: String,
    pub z: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub targets: Vec<TargetMetrics>,
    pub correlations: Vec<CorrelationRow>,
    pub zscores: Vec<ZScoreRow>,
}

fn fmt_ci(ci: Option<(f64, f64)>) -> (String, String) {
    match ci {
        Some((lo, hi)) => (format!("{lo}"), format!("{hi}")),
        None => ("n/a".into(), "n/a".into()),
    }
}

impl MetricsReport {
    /// Scores predictions column by column.
    pub fn from_predictions(
        names: &[String],
        y: &ndarray::Array2<f64>,
        yhat: &ndarray::Array2<f64>,
    ) -> Result<Self> {
        if y.dim() != yhat.dim() {
            return Err(Error::ShapeMismatch(y.dim(), yhat.dim()));
        }
        let mut targets = Vec::with_capacity(names.len());
        for (k, name) in names.iter().enumerate() {
            let a = y.column(k).to_vec();
            let b = yhat.column(k).to_vec();
            let (pe_percent, pe_excluded) = pe(&a, &b)?;
            targets.push(TargetMetrics {
                target: name.clone(),
                rmse: rmse(&a, &b)?,
                pe_percent,
                pe_excluded,
                ci: None,
            });
        }
        Ok(MetricsReport {
            targets,
            ..Default::default()
        })
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("section,target,rmse,pe_percent,pe_excluded,ci_low,ci_high\n");
        for t in &self.targets {
            let (lo, hi) = fmt_ci(t.ci);
            writeln!(
                s,
                "target,{},{},{},{},{},{}",
                t.target, t.rmse, t.pe_percent, t.pe_excluded, lo, hi
            )
            .unwrap();
        }
        if !self.correlations.is_empty() {
            s.push_str("section,a,b,pearson,p_value,spearman,kendall\n");
            for c in &self.correlations {
                writeln!(
                    s,
                    "correlation,{},{},{},{},{},{}",
                    c.a, c.b, c.pearson, c.p_value, c.spearman, c.kendall
                )
                .unwrap();
            }
        }
        if !self.zscores.is_empty() {
            s.push_str("section,method,target,z\n");
            for z in &self.zscores {
                writeln!(s, "zscore,{},{},{}", z.method, z.target, z.z).unwrap();
            }
        }
        s
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        if !self.targets.is_empty() {
            writeln!(
                s,
                "{:<16} {:>12} {:>10}  {:>9}  {:>12} {:>12}",
                "target", "rmse", "pe(%)", "excluded", "ci95_low", "ci95_high"
            )
            .unwrap();
            for t in &self.targets {
                let (lo, hi) = match t.ci {
                    Some((lo, hi)) => (format!("{lo:.6}"), format!("{hi:.6}")),
                    None => ("n/a".into(), "n/a".into()),
                };
                writeln!(
                    s,
                    "{:<16} {:>12.6} {:>10.4}  excluded={:<2} {:>12} {:>12}",
                    t.target, t.rmse, t.pe_percent, t.pe_excluded, lo, hi
                )
                .unwrap();
            }
        }
        if !self.correlations.is_empty() {
            writeln!(
                s,
                "\n{:<14} {:<14} {:>9} {:>11} {:>9} {:>9}",
                "a", "b", "pearson", "p_value", "spearman", "kendall"
            )
            .unwrap();
            for c in &self.correlations {
                writeln!(
                    s,
                    "{:<14} {:<14} {:>9.4} {:>11.3e} {:>9.4} {:>9.4}",
                    c.a, c.b, c.pearson, c.p_value, c.spearman, c.kendall
                )
                .unwrap();
            }
        }
        if !self.zscores.is_empty() {
            writeln!(s, "\n{:<10} {:<14} {:>9}", "method", "target", "z").unwrap();
            for z in &self.zscores {
                writeln!(s, "{:<10} {:<14} {:>9.4}", z.method, z.target, z.z).unwrap();
            }
        }
        s
    }
}
