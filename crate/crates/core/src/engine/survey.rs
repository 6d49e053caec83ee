//! Proportion statistics for the closer/farther occlusion survey.

use serde::{Deserialize, Serialize};

use super::EngineError;

/// Two-sided 95% normal quantile.
pub const Z_95: f64 = 1.96;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SurveyCounts {
    /// Respondents who saw the moon as closer than the sky.
    pub n_closer: u64,
    pub n_farther: u64,
}

impl SurveyCounts {
    pub fn new(n_closer: u64, n_farther: u64) -> Self {
        Self { n_closer, n_farther }
    }

    pub fn total(&self) -> u64 {
        self.n_closer + self.n_farther
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurveySummary {
    pub n: u64,
    pub proportion_closer: f64,
    pub wilson_95_ci: (f64, f64),
}

/// Wilson score interval for `successes` out of `n` at normal quantile `z`.
pub fn wilson_interval(successes: u64, n: u64, z: f64) -> Option<(f64, f64)> {
    if n == 0 || successes > n {
        return None;
    }
    let n = n as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    Some(((center - half).max(0.0), (center + half).min(1.0)))
}

pub fn survey_proportions(counts: SurveyCounts) -> Result<SurveySummary, EngineError> {
    let n = counts.total();
    if n == 0 {
        return Err(EngineError::EmptySurvey);
    }
    Ok(SurveySummary {
        n,
        proportion_closer: counts.n_closer as f64 / n as f64,
        wilson_95_ci: wilson_interval(counts.n_closer, n, Z_95).expect("n > 0"),
    })
}

/// Read `label,count` rows. Labels are `closer` and `farther`
/// (case-insensitive); an optional `label,count` header is skipped.
pub fn parse_survey_csv<R: std::io::Read>(input: R) -> Result<SurveyCounts, EngineError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(input);
    let mut closer = None;
    let mut farther = None;
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(|e| EngineError::SurveyInput(e.to_string()))?;
        if record.len() != 2 {
            return Err(EngineError::SurveyInput(format!(
                "row {}: expected `label,count`, got {} fields",
                line + 1,
                record.len()
            )));
        }
        let label = record[0].to_ascii_lowercase();
        if line == 0 && label == "label" {
            continue;
        }
        let count: u64 = record[1].parse().map_err(|_| {
            EngineError::SurveyInput(format!(
                "row {}: count `{}` is not a non-negative integer",
                line + 1,
                &record[1]
            ))
        })?;
        let slot = match label.as_str() {
            "closer" => &mut closer,
            "farther" => &mut farther,
            other => {
                return Err(EngineError::SurveyInput(format!(
                    "row {}: unknown label `{other}` (expected closer or farther)",
                    line + 1
                )))
            }
        };
        if slot.replace(count).is_some() {
            return Err(EngineError::SurveyInput(format!(
                "row {}: duplicate label `{label}`",
                line + 1
            )));
        }
    }
    if closer.is_none() && farther.is_none() {
        return Err(EngineError::SurveyInput("no survey rows".into()));
    }
    Ok(SurveyCounts::new(closer.unwrap_or(0), farther.unwrap_or(0)))
}
