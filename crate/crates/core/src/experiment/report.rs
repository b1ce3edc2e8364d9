use std::fmt;
use std::path::Path;

use super::sweep::{point_label, SweepResult};
use super::ExperimentError;
use crate::constellation::tv_to_uniform;

/// Probability above which a symbol counts as active.
pub const ACTIVE_THRESHOLD: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq)]
pub struct UserPmfSummary {
    pub user: usize,
    pub amplitudes: Vec<f64>,
    pub probabilities: Vec<f64>,
    pub active_symbols: usize,
    pub tv_to_uniform: f64,
}

impl UserPmfSummary {
    fn new(user: usize, amplitudes: Vec<f64>, probabilities: Vec<f64>) -> Self {
        let active_symbols = probabilities.iter().filter(|&&p| p > ACTIVE_THRESHOLD).count();
        let tv = tv_to_uniform(&probabilities);
        Self { user, amplitudes, probabilities, active_symbols, tv_to_uniform: tv }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PmfReport {
    pub a_over_sigma_db: f64,
    pub users: Vec<UserPmfSummary>,
}

impl fmt::Display for PmfReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "A/sigma = {} dB", self.a_over_sigma_db)?;
        for u in &self.users {
            writeln!(
                f,
                "user {}: {} active symbols, TV to uniform {:.4}",
                u.user, u.active_symbols, u.tv_to_uniform
            )?;
            writeln!(f, "  {:>14}  {:>11}", "amplitude", "probability")?;
            for (a, p) in u.amplitudes.iter().zip(&u.probabilities) {
                writeln!(f, "  {a:>14.6e}  {p:>11.6}")?;
            }
        }
        Ok(())
    }
}

/// Per-user PMF table of one sweep point.
pub fn pmf_report(result: &SweepResult, db: f64) -> Result<PmfReport, ExperimentError> {
    let point = result.point(db).ok_or(ExperimentError::MissingPoint(db))?;
    let users = (0..point.pmf.users())
        .map(|k| UserPmfSummary::new(k + 1, point.amplitudes[k].clone(), point.pmf.row(k)))
        .collect();
    Ok(PmfReport { a_over_sigma_db: db, users })
}

/// Rebuilds the report from the `pmf_<user>.csv` files of a sweep output
/// directory.
pub fn read_pmf_report(dir: &Path, db: f64) -> Result<PmfReport, ExperimentError> {
    let point_dir = dir.join(format!("point_{}", point_label(db)));
    if !point_dir.is_dir() {
        return Err(ExperimentError::MissingPoint(db));
    }
    let mut users = Vec::new();
    for k in 1.. {
        let path = point_dir.join(format!("pmf_{k}.csv"));
        if !path.exists() {
            break;
        }
        let mut rdr = csv::Reader::from_path(&path)?;
        let (mut amps, mut probs) = (Vec::new(), Vec::new());
        for rec in rdr.records() {
            let rec = rec?;
            let parse = |i: usize| -> Result<f64, ExperimentError> {
                rec.get(i).and_then(|s| s.parse().ok()).ok_or_else(|| ExperimentError::Malformed {
                    path: path.display().to_string(),
                    reason: format!("bad column {i}"),
                })
            };
            amps.push(parse(0)?);
            probs.push(parse(1)?);
        }
        users.push(UserPmfSummary::new(k, amps, probs));
    }
    if users.is_empty() {
        return Err(ExperimentError::MissingPoint(db));
    }
    Ok(PmfReport { a_over_sigma_db: db, users })
}
