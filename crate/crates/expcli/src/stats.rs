use crate::record::{ExperimentRecord, Status};

/// Ordinary least-squares slope of y on x; `None` for fewer than two distinct x.
pub fn ols_slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let k = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / k;
    let my = points.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// (ln SRF, ln value) over `ok` records with a positive finite value.
pub fn loglog_points<F>(records: &[ExperimentRecord], value: F) -> Vec<(f64, f64)>
where
    F: Fn(&ExperimentRecord) -> Option<f64>,
{
    records
        .iter()
        .filter(|r| r.status == Status::Ok)
        .filter_map(|r| value(r).filter(|v| *v > 0.0 && v.is_finite()).map(|v| (r.srf.ln(), v.ln())))
        .collect()
}

pub fn loglog_slope<F>(records: &[ExperimentRecord], value: F) -> Option<f64>
where
    F: Fn(&ExperimentRecord) -> Option<f64>,
{
    ols_slope(&loglog_points(records, value))
}
