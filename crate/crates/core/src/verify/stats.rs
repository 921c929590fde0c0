use serde::{Deserialize, Serialize};

/// Summary of a sample of log-ratios.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatioStats {
    pub count: usize,
    pub min: f64,
    pub median: f64,
    pub max: f64,
    /// `max − min`, in natural-log units.
    pub spread: f64,
}

impl RatioStats {
    /// Statistics of `ln(ratio)`; non-positive or non-finite ratios are skipped.
    pub fn from_ratios(ratios: impl IntoIterator<Item = f64>) -> Option<Self> {
        Self::from_logs(ratios.into_iter().filter(|r| *r > 0.0 && r.is_finite()).map(f64::ln))
    }

    pub fn from_logs(logs: impl IntoIterator<Item = f64>) -> Option<Self> {
        let mut v: Vec<f64> = logs.into_iter().collect();
        if v.is_empty() {
            return None;
        }
        v.sort_by(f64::total_cmp);
        let (min, max) = (v[0], v[v.len() - 1]);
        Some(RatioStats { count: v.len(), min, median: median_sorted(&v), max, spread: max - min })
    }
}

fn median_sorted(v: &[f64]) -> f64 {
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    if v.is_empty() {
        f64::NAN
    } else {
        median_sorted(&v)
    }
}

/// Whether a sequence of per-level medians (in log units) drifts.
///
/// A drift is a strictly monotone run over all levels whose last step is not
/// settling: `|last step| > max(0.05, |first step| / 2)`. Returns `None` when
/// fewer than three levels are available.
pub fn monotone_drift(medians: &[f64]) -> Option<bool> {
    if medians.len() < 3 {
        return None;
    }
    let steps: Vec<f64> = medians.windows(2).map(|w| w[1] - w[0]).collect();
    let monotone = steps.iter().all(|&s| s > 0.0) || steps.iter().all(|&s| s < 0.0);
    let first = steps[0].abs();
    let last = steps[steps.len() - 1].abs();
    Some(monotone && last > f64::max(0.05, 0.5 * first))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stats_of_ratios() {
        let s = RatioStats::from_ratios([1.0, std::f64::consts::E, 0.0, f64::NAN]).unwrap();
        assert_eq!(s.count, 2);
        assert!((s.spread - 1.0).abs() < 1e-15);
        assert!((s.median - 0.5).abs() < 1e-15);
        assert!(RatioStats::from_ratios([]).is_none());
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
    }

    #[test]
    fn drift_rules() {
        assert_eq!(monotone_drift(&[0.0, 1.0]), None);
        // linear growth drifts
        assert_eq!(monotone_drift(&[0.0, 0.3, 0.6, 0.9]), Some(true));
        // saturating sequence does not
        let sat: Vec<f64> = [1.397f64, 1.259, 1.203, 1.179].iter().map(|x| x.ln()).collect();
        assert_eq!(monotone_drift(&sat), Some(false));
        // non-monotone does not
        assert_eq!(monotone_drift(&[0.0, 0.3, 0.2, 0.5]), Some(false));
    }
}
