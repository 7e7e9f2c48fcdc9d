//! Thickness statistics from local-thickness histograms.
//!
//! A histogram lists unique thickness values `x_i` (µm) with their counts `f_i`.
//! Replicates are summarised individually and then pooled.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest accepted histogram, matching 8-bit image analysis output.
pub const MAX_BINS: usize = 256;

#[derive(Debug, Error, PartialEq)]
pub enum StatsError {
    #[error("invalid histogram: {0}")]
    Histogram(String),
    #[error("no replicates given")]
    NoReplicates,
    #[error("histogram CSV line {line}: {reason}")]
    Csv { line: usize, reason: String },
}

/// Which denominator the dispersion uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StdFormula {
    /// `√(Σ f_i (x_i − µ)² / Σ f_i)`, the weighted population standard deviation.
    #[default]
    Standard,
    /// `√(Σ f_i (x_i − µ)² / Σ x_i f_i)`, with the denominator exactly as printed.
    Literal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThicknessHistogram {
    /// `(thickness_um, frequency)` with strictly increasing thickness.
    bins: Vec<(f64, f64)>,
}

impl ThicknessHistogram {
    pub fn new(bins: Vec<(f64, f64)>) -> Result<Self, StatsError> {
        let bad = |m: String| Err(StatsError::Histogram(m));
        if bins.is_empty() {
            return bad("no bins".into());
        }
        if bins.len() > MAX_BINS {
            return bad(format!("{} bins exceed the limit of {MAX_BINS}", bins.len()));
        }
        for (i, &(x, f)) in bins.iter().enumerate() {
            if !x.is_finite() || !f.is_finite() {
                return bad(format!("bin {i} is not finite"));
            }
            if f < 0.0 {
                return bad(format!("bin {i} has negative frequency {f}"));
            }
        }
        if let Some(i) = bins.windows(2).position(|w| w[1].0 <= w[0].0) {
            return bad(format!("thickness must strictly increase (bin {})", i + 1));
        }
        // every frequency is finite and non-negative here
        if bins.iter().map(|b| b.1).sum::<f64>() <= 0.0 {
            return bad("total frequency is zero".into());
        }
        Ok(ThicknessHistogram { bins })
    }

    pub fn bins(&self) -> &[(f64, f64)] {
        &self.bins
    }

    /// Number of measurements, `Σ f_i`.
    pub fn count(&self) -> f64 {
        self.bins.iter().map(|b| b.1).sum()
    }
}

/// `Σ x_i f_i / Σ f_i`.
pub fn hist_mean(h: &ThicknessHistogram) -> f64 {
    h.bins.iter().map(|&(x, f)| x * f).sum::<f64>() / h.count()
}

pub fn hist_std(h: &ThicknessHistogram, formula: StdFormula) -> f64 {
    let mu = hist_mean(h);
    let spread: f64 = h.bins.iter().map(|&(x, f)| f * (x - mu) * (x - mu)).sum();
    let denominator = match formula {
        StdFormula::Standard => h.count(),
        StdFormula::Literal => h.bins.iter().map(|&(x, f)| x * f).sum(),
    };
    (spread / denominator).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Replicate {
    pub n: f64,
    pub mean: f64,
    pub std: f64,
}

impl Replicate {
    pub fn from_histogram(h: &ThicknessHistogram, formula: StdFormula) -> Self {
        Replicate { n: h.count(), mean: hist_mean(h), std: hist_std(h, formula) }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ReplicateSet {
    pub replicates: Vec<Replicate>,
}

impl ReplicateSet {
    pub fn from_histograms<'a>(
        histograms: impl IntoIterator<Item = &'a ThicknessHistogram>,
        formula: StdFormula,
    ) -> Self {
        ReplicateSet { replicates: histograms.into_iter().map(|h| Replicate::from_histogram(h, formula)).collect() }
    }

    fn total(&self) -> Result<f64, StatsError> {
        let n: f64 = self.replicates.iter().map(|r| r.n).sum();
        if self.replicates.is_empty() || n.is_nan() || n <= 0.0 {
            return Err(StatsError::NoReplicates);
        }
        Ok(n)
    }
}

/// `Σ n_j µ_j / Σ n_j`.
pub fn combined_mean(set: &ReplicateSet) -> Result<f64, StatsError> {
    let n = set.total()?;
    Ok(set.replicates.iter().map(|r| r.n * r.mean).sum::<f64>() / n)
}

/// `√(Σ_j [n_j σ_j² + n_j (µ_c − µ_j)²] / Σ n_j)`; with population standard
/// deviations per replicate this is the standard deviation of the pooled sample.
pub fn combined_std(set: &ReplicateSet) -> Result<f64, StatsError> {
    let n = set.total()?;
    let mu = combined_mean(set)?;
    let sum: f64 = set.replicates.iter().map(|r| r.n * r.std * r.std + r.n * (mu - r.mean) * (mu - r.mean)).sum();
    Ok((sum / n).sqrt())
}

/// Read a `thickness_um,frequency` CSV with a header row.
pub fn histogram_from_csv(text: &str) -> Result<ThicknessHistogram, StatsError> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let headers = rdr.headers().map_err(|e| StatsError::Csv { line: 1, reason: e.to_string() })?;
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| StatsError::Csv { line: 1, reason: format!("missing column `{name}`") })
    };
    let (xi, fi) = (col("thickness_um")?, col("frequency")?);
    let mut bins = Vec::new();
    for (k, record) in rdr.records().enumerate() {
        let line = k + 2;
        let record = record.map_err(|e| StatsError::Csv { line, reason: e.to_string() })?;
        let num = |i: usize| {
            let s = record.get(i).unwrap_or("");
            s.parse::<f64>().map_err(|_| StatsError::Csv { line, reason: format!("malformed number {s:?}") })
        };
        bins.push((num(xi)?, num(fi)?));
    }
    ThicknessHistogram::new(bins)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicateSummary {
    pub name: String,
    pub n: f64,
    pub mean_um: f64,
    pub std_um: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StatsReport {
    pub formula: StdFormula,
    pub replicates: Vec<ReplicateSummary>,
    pub combined: ReplicateSummary,
}

/// Summaries of named histograms plus their pooled statistics.
pub fn summarize(named: &[(String, ThicknessHistogram)], formula: StdFormula) -> Result<StatsReport, StatsError> {
    let set = ReplicateSet::from_histograms(named.iter().map(|(_, h)| h), formula);
    let replicates = named
        .iter()
        .zip(&set.replicates)
        .map(|((name, _), r)| ReplicateSummary { name: name.clone(), n: r.n, mean_um: r.mean, std_um: r.std })
        .collect();
    let combined = ReplicateSummary {
        name: "combined".into(),
        n: set.total()?,
        mean_um: combined_mean(&set)?,
        std_um: combined_std(&set)?,
    };
    Ok(StatsReport { formula, replicates, combined })
}
