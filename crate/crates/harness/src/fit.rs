use crate::error::{HarnessError, Result};

/// Ordinary least squares of `ln y` on `ln T`; returns `(slope, intercept)`.
pub fn fit_rate(points: &[(f64, f64)]) -> Result<(f64, f64)> {
    if points.len() < 3 {
        return Err(HarnessError::Fit(format!("need at least 3 points, got {}", points.len())));
    }
    if let Some(&(t, y)) = points.iter().find(|(t, y)| !(*t > 0.0 && *y > 0.0 && t.is_finite() && y.is_finite())) {
        return Err(HarnessError::Fit(format!("non-positive or non-finite point ({t}, {y})")));
    }
    let n = points.len() as f64;
    let (lx, ly): (Vec<f64>, Vec<f64>) = points.iter().map(|&(t, y)| (t.ln(), y.ln())).unzip();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx == 0.0 {
        return Err(HarnessError::Fit("all T values are equal".into()));
    }
    let slope = sxy / sxx;
    Ok((slope, my - slope * mx))
}
