//! CSV and summary-line helpers shared by the experiment reports.

use std::fmt::Write as _;

/// Columns `step,time,statistic,envelope,stderr`; absent columns are left
/// empty. Steps are numbered from `first_step`.
pub fn series_csv(
    first_step: usize,
    times: &[f64],
    statistic: &[f64],
    envelope: Option<&[f64]>,
    stderr: Option<&[f64]>,
) -> String {
    let mut out = String::from("step,time,statistic,envelope,stderr\n");
    for (i, (t, s)) in times.iter().zip(statistic).enumerate() {
        let _ = write!(out, "{},{t},{s},", first_step + i);
        if let Some(e) = envelope {
            let _ = write!(out, "{}", e[i]);
        }
        out.push(',');
        if let Some(e) = stderr {
            let _ = write!(out, "{}", e[i]);
        }
        out.push('\n');
    }
    out
}

pub fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "none".to_string(), |x| x.to_string())
}
