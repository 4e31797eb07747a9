//! Monte Carlo summaries and least-squares fits.

use crate::error::{Error, Result};

/// Least-squares line `y ≈ slope·x + intercept`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

pub fn fit_line(x: &[f64], y: &[f64]) -> Result<RateFit> {
    if x.len() != y.len() {
        return Err(Error::invalid("fit needs equally many x and y values"));
    }
    if x.len() < 2 {
        return Err(Error::invalid("fit needs at least two points"));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::invalid("fit inputs must be finite"));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    if sxx == 0.0 {
        return Err(Error::invalid("fit needs at least two distinct x values"));
    }
    let slope = sxy / sxx;
    let r_squared = if syy == 0.0 {
        1.0
    } else {
        (sxy * sxy / (sxx * syy)).clamp(0.0, 1.0)
    };
    Ok(RateFit {
        slope,
        intercept: my - slope * mx,
        r_squared,
    })
}

/// Fit `log y` against `log x`.
pub fn fit_loglog(points: &[(f64, f64)]) -> Result<RateFit> {
    if points.iter().any(|&(x, y)| !(x > 0.0) || !(y > 0.0)) {
        return Err(Error::invalid("log-log fit needs positive coordinates"));
    }
    let (x, y): (Vec<f64>, Vec<f64>) = points.iter().map(|&(x, y)| (x.ln(), y.ln())).unzip();
    fit_line(&x, &y)
}

/// Fit `y ≈ A e^{−rate·t}`; returns `(rate, fit)`.
pub fn fit_exponential(t: &[f64], y: &[f64]) -> Result<(f64, RateFit)> {
    if y.iter().any(|&v| !(v > 0.0)) {
        return Err(Error::invalid("exponential fit needs positive values"));
    }
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let fit = fit_line(t, &ly)?;
    Ok((-fit.slope, fit))
}

/// Sample mean and standard error of the mean (zero for one sample).
pub fn mean_stderr(xs: &[f64]) -> (f64, f64) {
    let n = xs.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

/// Per-column mean and standard error over equally long rows.
pub fn column_mean_stderr(rows: &[Vec<f64>]) -> (Vec<f64>, Vec<f64>) {
    let len = rows.first().map_or(0, |r| r.len());
    let mut col = vec![0.0; rows.len()];
    (0..len)
        .map(|j| {
            for (c, r) in col.iter_mut().zip(rows) {
                *c = r[j];
            }
            mean_stderr(&col)
        })
        .unzip()
}

/// Overall mean and batch-means standard error with `n_batches` equal
/// batches; trailing samples that do not fill a batch are dropped from the
/// error estimate only.
pub fn batch_means(xs: &[f64], n_batches: usize) -> Result<(f64, f64)> {
    if n_batches < 2 || xs.len() < n_batches {
        return Err(Error::invalid(format!(
            "batch means need at least {n_batches} ≥ 2 samples"
        )));
    }
    let mean = xs.iter().sum::<f64>() / xs.len() as f64;
    let b = xs.len() / n_batches;
    let means: Vec<f64> = xs
        .chunks_exact(b)
        .take(n_batches)
        .map(|c| c.iter().sum::<f64>() / b as f64)
        .collect();
    Ok((mean, mean_stderr(&means).1))
}
