use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::config::Metric;
use crate::error::{Error, Result};

/// One sup-norm error measurement.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LadderRecord {
    pub n: usize,
    pub rep: u64,
    pub metric: Metric,
    pub error: f64,
    pub runtime_ms: f64,
    pub seed: u64,
}

pub fn records_to_csv(records: &[LadderRecord]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in records {
        w.serialize(r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ascii output")
}

/// Parses the format written by [`records_to_csv`].
pub fn parse_records_csv(text: &str) -> Result<Vec<LadderRecord>> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let mut out = Vec::new();
    for row in rdr.deserialize::<LadderRecord>() {
        let r = row.map_err(|e| Error::Parse(e.to_string()))?;
        if !(r.error >= 0.0) || !r.error.is_finite() {
            return Err(Error::Parse(format!("error value {} is not a finite non-negative number", r.error)));
        }
        out.push(r);
    }
    Ok(out)
}

/// Normalization applied before the log-log fit.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Correction {
    SqrtLogN,
    LogN,
    None,
}

impl Correction {
    pub const ALL: [Correction; 3] = [Correction::SqrtLogN, Correction::LogN, Correction::None];

    pub fn factor(self, n: f64) -> f64 {
        match self {
            Correction::SqrtLogN => n.ln().sqrt(),
            Correction::LogN => n.ln(),
            Correction::None => 1.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Correction::SqrtLogN => "sqrt-log-n",
            Correction::LogN => "log-n",
            Correction::None => "none",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Correction::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::Parse(format!("unknown correction {s:?}")))
    }
}

/// Least-squares line through `(log n, log(median/correction))`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    pub stderr: f64,
    pub points: usize,
}

/// Quantile by linear interpolation between order statistics.
pub fn quantile(values: &[f64], q: f64) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let h = q * (v.len() - 1) as f64;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    v[lo] + (h - lo as f64) * (v[hi] - v[lo])
}

/// Per-`n` summary of one metric.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LevelSummary {
    pub n: usize,
    pub count: usize,
    pub median: f64,
    pub q90: f64,
}

pub fn summarize(records: &[LadderRecord], metric: Metric) -> Vec<LevelSummary> {
    let mut by_n: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    for r in records.iter().filter(|r| r.metric == metric) {
        by_n.entry(r.n).or_default().push(r.error);
    }
    by_n.into_iter()
        .map(|(n, v)| LevelSummary {
            n,
            count: v.len(),
            median: quantile(&v, 0.5),
            q90: quantile(&v, 0.9),
        })
        .collect()
}

/// Fits `log(median error / correction(n))` against `log n`.
pub fn fit_rate(records: &[LadderRecord], metric: Metric, correction: Correction) -> Result<RateFit> {
    fit_rate_by(records, metric, |n| correction.factor(n))
}

/// As [`fit_rate`] with an arbitrary positive normalization.
pub fn fit_rate_by(records: &[LadderRecord], metric: Metric, factor: impl Fn(f64) -> f64) -> Result<RateFit> {
    let levels = summarize(records, metric);
    if levels.len() < 3 {
        return Err(Error::param(format!(
            "{} ladder points for {}; need at least 3",
            levels.len(),
            metric.name()
        )));
    }
    let mut xs = Vec::with_capacity(levels.len());
    let mut ys = Vec::with_capacity(levels.len());
    for l in &levels {
        let nf = l.n as f64;
        let y = (l.median / factor(nf)).ln();
        if !y.is_finite() {
            return Err(Error::Domain(format!("median error {} at n = {} has no logarithm", l.median, l.n)));
        }
        xs.push(nf.ln());
        ys.push(y);
    }
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| {
            let e = y - intercept - slope * x;
            e * e
        })
        .sum();
    Ok(RateFit {
        slope,
        intercept,
        stderr: (rss / (k - 2.0) / sxx).sqrt(),
        points: levels.len(),
    })
}
