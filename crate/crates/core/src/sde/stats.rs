//! Batch-means standard errors, Kolmogorov–Smirnov distances and small fits.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

/// Default number of batches for batch-means standard errors.
pub const DEFAULT_BATCHES: usize = 20;

/// A Monte Carlo mean with its batch-means standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub se: f64,
    pub samples: usize,
    pub batches: usize,
}

impl Estimate {
    /// Known value with no sampling error.
    pub fn exact(v: f64) -> Self {
        Self {
            mean: v,
            se: 0.0,
            samples: 0,
            batches: 0,
        }
    }

    /// Batch means over `batches` contiguous batches (the tail remainder joins the last batch).
    pub fn batch_means(samples: &[f64], batches: usize) -> Self {
        let n = samples.len();
        assert!(batches >= 2 && n >= batches, "need at least {batches} samples for batch means");
        let size = n / batches;
        let means: Vec<f64> = (0..batches)
            .map(|b| {
                let end = if b + 1 == batches { n } else { (b + 1) * size };
                let chunk = &samples[b * size..end];
                chunk.iter().sum::<f64>() / chunk.len() as f64
            })
            .collect();
        let mean = samples.iter().sum::<f64>() / n as f64;
        let mb = means.iter().sum::<f64>() / batches as f64;
        let var = means.iter().map(|m| (m - mb).powi(2)).sum::<f64>() / (batches - 1) as f64;
        Self {
            mean,
            se: (var / batches as f64).sqrt(),
            samples: n,
            batches,
        }
    }

    pub fn from_samples(samples: &[f64]) -> Self {
        Self::batch_means(samples, DEFAULT_BATCHES)
    }

    /// `|self − other| / sqrt(se₁² + se₂²)`, infinite when both are exact and differ.
    pub fn z_against(&self, other: &Estimate) -> f64 {
        let d = (self.mean - other.mean).abs();
        let s = (self.se * self.se + other.se * other.se).sqrt();
        if d == 0.0 {
            0.0
        } else if s == 0.0 {
            f64::INFINITY
        } else {
            d / s
        }
    }

    /// Whether `|mean − target| ≤ k·se + allowance`.
    pub fn within(&self, target: f64, k: f64, allowance: f64) -> bool {
        (self.mean - target).abs() <= k * self.se + allowance
    }
}

/// Two-sided KS distance between samples and a continuous CDF.
pub fn ks_distance(samples: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut s = samples.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len() as f64;
    s.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

/// Asymptotic one-sample KS critical value `sqrt(−ln(α/2)/2)/√n`.
pub fn ks_critical(n: usize, alpha: f64) -> f64 {
    (-(alpha / 2.0).ln() / 2.0).sqrt() / (n as f64).sqrt()
}

/// Ordinary least-squares line `y = a + b x` with the standard error of `b`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineFit {
    pub intercept: f64,
    pub slope: f64,
    pub slope_se: f64,
}

impl LineFit {
    /// Two-sided `level` confidence interval for the slope (Student t with `n − 2` dof).
    pub fn slope_ci(&self, n: usize, level: f64) -> (f64, f64) {
        if n <= 2 || self.slope_se == 0.0 {
            return (self.slope, self.slope);
        }
        let t = StudentsT::new(0.0, 1.0, (n - 2) as f64)
            .map(|d| d.inverse_cdf(0.5 + level / 2.0))
            .unwrap_or(f64::INFINITY);
        (self.slope - t * self.slope_se, self.slope + t * self.slope_se)
    }
}

/// Weighted least squares (`w = 1/σ²`; pass equal weights for OLS).
pub fn line_fit(xs: &[f64], ys: &[f64], weights: Option<&[f64]>) -> LineFit {
    let n = xs.len();
    let ones = vec![1.0; n];
    let w = weights.unwrap_or(&ones);
    let sw: f64 = w.iter().sum();
    let mx = xs.iter().zip(w).map(|(x, w)| w * x).sum::<f64>() / sw;
    let my = ys.iter().zip(w).map(|(y, w)| w * y).sum::<f64>() / sw;
    let sxx: f64 = xs.iter().zip(w).map(|(x, w)| w * (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).zip(w).map(|((x, y), w)| w * (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let slope_se = if n > 2 {
        let rss: f64 = xs
            .iter()
            .zip(ys)
            .zip(w)
            .map(|((x, y), w)| w * (y - intercept - slope * x).powi(2))
            .sum();
        (rss / (n - 2) as f64 / sxx).sqrt()
    } else {
        0.0
    };
    LineFit {
        intercept,
        slope,
        slope_se,
    }
}
