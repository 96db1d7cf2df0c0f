//! Sample summaries and the distribution tests built on them.

use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use super::StatsError;

/// Empirical quantile with linear interpolation between order statistics.
pub fn quantile(samples: &[f64], p: f64) -> f64 {
    let mut v = samples.to_vec();
    v.sort_by(f64::total_cmp);
    quantile_sorted(&v, p)
}

pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    assert!(!sorted.is_empty(), "quantile of an empty sample");
    let h = p.clamp(0.0, 1.0) * (sorted.len() - 1) as f64;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

/// Unbiased sample variance.
pub fn variance(x: &[f64]) -> f64 {
    if x.len() < 2 {
        return 0.0;
    }
    let m = mean(x);
    x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (x.len() - 1) as f64
}

/// Moment skewness `m3 / m2^(3/2)`.
pub fn skewness(x: &[f64]) -> f64 {
    let m = mean(x);
    let n = x.len() as f64;
    let m2 = x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / n;
    let m3 = x.iter().map(|v| (v - m).powi(3)).sum::<f64>() / n;
    m3 / m2.powf(1.5)
}

fn std_normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / std::f64::consts::SQRT_2)
}

/// Anderson-Darling test of normality with estimated mean and variance.
/// Returns the small-sample corrected statistic and its approximate p-value.
pub fn anderson_darling_normal(x: &[f64]) -> Result<(f64, f64), StatsError> {
    let n = x.len();
    if n < 8 {
        return Err(StatsError::Degenerate(format!(
            "Anderson-Darling needs at least 8 samples, got {n}"
        )));
    }
    let m = mean(x);
    let s = variance(x).sqrt();
    if !(s > 0.0) {
        return Err(StatsError::Degenerate("all samples are equal".into()));
    }
    let mut z: Vec<f64> = x.iter().map(|v| (v - m) / s).collect();
    z.sort_by(f64::total_cmp);
    let nf = n as f64;
    let mut sum = 0.0;
    for i in 0..n {
        let lo = std_normal_cdf(z[i]).max(1e-300);
        let hi = (1.0 - std_normal_cdf(z[n - 1 - i])).max(1e-300);
        sum += (2 * i + 1) as f64 * (lo.ln() + hi.ln());
    }
    let a2 = -nf - sum / nf;
    let a = a2 * (1.0 + 0.75 / nf + 2.25 / (nf * nf));
    // D'Agostino and Stephens' piecewise approximation
    let p = if a >= 0.6 {
        (1.2937 - 5.709 * a + 0.0186 * a * a).exp()
    } else if a >= 0.34 {
        (0.9177 - 4.279 * a - 1.38 * a * a).exp()
    } else if a >= 0.2 {
        1.0 - (-8.318 + 42.796 * a - 59.938 * a * a).exp()
    } else {
        1.0 - (-13.436 + 101.14 * a - 223.73 * a * a).exp()
    };
    Ok((a, p.clamp(0.0, 1.0)))
}

/// Two-sample Kolmogorov-Smirnov statistic and asymptotic p-value.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> (f64, f64) {
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    x.sort_by(f64::total_cmp);
    y.sort_by(f64::total_cmp);
    let (n, m) = (x.len(), y.len());
    let (mut i, mut j) = (0, 0);
    let mut d = 0.0f64;
    while i < n && j < m {
        let t = x[i].min(y[j]);
        while i < n && x[i] <= t {
            i += 1;
        }
        while j < m && y[j] <= t {
            j += 1;
        }
        d = d.max((i as f64 / n as f64 - j as f64 / m as f64).abs());
    }
    let en = ((n * m) as f64 / (n + m) as f64).sqrt();
    let lambda = (en + 0.12 + 0.11 / en) * d;
    (d, kolmogorov_q(lambda))
}

/// Survival function of the Kolmogorov distribution.
fn kolmogorov_q(lambda: f64) -> f64 {
    if lambda < 1e-3 {
        return 1.0;
    }
    let mut sum = 0.0;
    for k in 1..=100 {
        let term = (-2.0 * (k * k) as f64 * lambda * lambda).exp();
        sum += if k % 2 == 1 { term } else { -term };
        if term < 1e-16 {
            break;
        }
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum Bandwidth {
    /// `0.9 min(sd, IQR / 1.34) n^(-1/5)`.
    #[default]
    Silverman,
    Fixed {
        h: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Density {
    pub bandwidth: f64,
    pub grid: Vec<f64>,
    pub density: Vec<f64>,
}

/// Gaussian kernel density estimate on `n_grid` equally spaced points
/// spanning the sample range widened by eight bandwidths on each side.
pub fn density_export(
    samples: &[f64],
    rule: Bandwidth,
    n_grid: usize,
) -> Result<Density, StatsError> {
    if samples.len() < 2 {
        return Err(StatsError::Degenerate(format!(
            "density estimate needs at least 2 samples, got {}",
            samples.len()
        )));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let (lo, hi) = (sorted[0], sorted[sorted.len() - 1]);
    if !(hi > lo) {
        return Err(StatsError::Degenerate("all samples are equal".into()));
    }
    let h = match rule {
        Bandwidth::Fixed { h } if h > 0.0 => h,
        Bandwidth::Fixed { h } => {
            return Err(StatsError::InvalidSpec(format!(
                "bandwidth must be positive, got {h}"
            )))
        }
        Bandwidth::Silverman => {
            let sd = variance(samples).sqrt();
            let iqr = quantile_sorted(&sorted, 0.75) - quantile_sorted(&sorted, 0.25);
            let spread = if iqr > 0.0 { sd.min(iqr / 1.34) } else { sd };
            0.9 * spread * (samples.len() as f64).powf(-0.2)
        }
    };
    let n_grid = n_grid.max(2);
    let (a, b) = (lo - 8.0 * h, hi + 8.0 * h);
    let step = (b - a) / (n_grid - 1) as f64;
    let norm = 1.0 / (samples.len() as f64 * h * (2.0 * std::f64::consts::PI).sqrt());
    let grid: Vec<f64> = (0..n_grid).map(|k| a + k as f64 * step).collect();
    let density = grid
        .iter()
        .map(|&x| {
            norm * sorted
                .iter()
                .map(|s| (-0.5 * ((x - s) / h).powi(2)).exp())
                .sum::<f64>()
        })
        .collect();
    Ok(Density {
        bandwidth: h,
        grid,
        density,
    })
}
