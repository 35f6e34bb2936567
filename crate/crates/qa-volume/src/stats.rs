//! Streaming ensemble statistics and log-log power-law fits.
//!
//! Trajectories contribute one value per axis point; per-point accumulators
//! keep (count, mean, M2) so means and population standard deviations come
//! out in one pass. Accumulators merge associatively, which lets parallel
//! runs combine per-trajectory results in a fixed serial order and produce
//! identical output regardless of how the work was scheduled.

use serde::{Deserialize, Serialize};
use thiserror::Error;

// ===== accumulators =====

/// What the x axis of a series means.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Axis {
    Time,
    SubsystemSize,
    SystemSize,
}

/// One-pass moment accumulator (count, mean, sum of squared deviations).
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Moments {
    n: u64,
    mean: f64,
    m2: f64,
}

impl Moments {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let d = x - self.mean;
        self.mean += d / self.n as f64;
        self.m2 += d * (x - self.mean);
    }

    pub fn merge(&mut self, other: &Moments) {
        if other.n == 0 {
            return;
        }
        if self.n == 0 {
            *self = *other;
            return;
        }
        let n = self.n + other.n;
        let d = other.mean - self.mean;
        self.mean += d * other.n as f64 / n as f64;
        self.m2 += other.m2 + d * d * (self.n as f64 * other.n as f64 / n as f64);
        self.n = n;
    }

    pub fn count(&self) -> u64 {
        self.n
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Population variance (normalized by n, matching the ensemble
    /// fluctuation definition δy = sqrt(<y²> − <y>²)).
    pub fn variance(&self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            (self.m2 / self.n as f64).max(0.0)
        }
    }

    pub fn stddev(&self) -> f64 {
        self.variance().sqrt()
    }
}

/// A family of accumulators indexed by axis points, fed one trajectory at a
/// time.
#[derive(Clone, Debug, PartialEq)]
pub struct EnsembleSeries {
    pub axis: Axis,
    xs: Vec<f64>,
    points: Vec<Moments>,
}

impl EnsembleSeries {
    pub fn new(axis: Axis, xs: Vec<f64>) -> Self {
        let points = vec![Moments::default(); xs.len()];
        EnsembleSeries { axis, xs, points }
    }

    /// One trajectory's value per axis point.
    pub fn accumulate(&mut self, samples: &[f64]) {
        assert_eq!(
            samples.len(),
            self.xs.len(),
            "trajectory length must match the axis"
        );
        for (p, &s) in self.points.iter_mut().zip(samples) {
            p.push(s);
        }
    }

    /// One value at a single axis point (for axes whose points are fed by
    /// separate ensembles, such as per-system-size runs).
    pub fn push_at(&mut self, i: usize, x: f64) {
        self.points[i].push(x);
    }

    /// Folds another series over the same axis into this one.
    pub fn merge(&mut self, other: &EnsembleSeries) {
        assert_eq!(self.axis, other.axis, "axis kind mismatch in merge");
        assert_eq!(self.xs, other.xs, "axis points mismatch in merge");
        for (p, q) in self.points.iter_mut().zip(&other.points) {
            p.merge(q);
        }
    }

    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    pub fn point(&self, i: usize) -> &Moments {
        &self.points[i]
    }

    /// (x, mean) pairs, the usual fit input.
    pub fn mean_points(&self) -> Vec<(f64, f64)> {
        self.xs
            .iter()
            .zip(&self.points)
            .map(|(&x, p)| (x, p.mean()))
            .collect()
    }

    /// (x, stddev) pairs for fluctuation fits.
    pub fn stddev_points(&self) -> Vec<(f64, f64)> {
        self.xs
            .iter()
            .zip(&self.points)
            .map(|(&x, p)| (x, p.stddev()))
            .collect()
    }

    /// CSV body with header `x,mean,stddev,n`. Floats use the shortest
    /// round-trip formatting, so the bytes depend only on the merged values.
    pub fn to_csv(&self) -> String {
        moments_csv(&self.xs, &self.points)
    }
}

/// CSV body (`x,mean,stddev,n`) for any moment row set, shared by series
/// over the standard axes and ad-hoc sweeps such as measurement-rate scans.
pub fn moments_csv(xs: &[f64], points: &[Moments]) -> String {
    assert_eq!(xs.len(), points.len());
    let mut out = String::from("x,mean,stddev,n\n");
    for (x, p) in xs.iter().zip(points) {
        out.push_str(&format!("{},{},{},{}\n", x, p.mean(), p.stddev(), p.count()));
    }
    out
}

// ===== power-law fitting =====

#[derive(Debug, Error, PartialEq)]
pub enum FitError {
    #[error("power-law fit needs at least {needed} usable points, got {got}")]
    TooFewPoints { needed: usize, got: usize },
}

/// Least-squares fit of y = prefactor · x^exponent on log-transformed data.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FitResult {
    pub exponent: f64,
    pub prefactor: f64,
    /// Standard error of the exponent, from the fit residuals.
    pub stderr: f64,
    pub r2: f64,
    pub n_points: usize,
    pub x_min: f64,
    pub x_max: f64,
    /// Points inside the window that were dropped because x or y were not
    /// positive; nonzero values deserve a caller-side warning.
    pub excluded_nonpositive: usize,
}

/// The default fit window: one decade centered on the log-midpoint of the
/// axis, clipped to the data. Trims early transients and saturation tails
/// when the axis spans more than a decade; otherwise keeps everything.
pub fn central_decade(x_min: f64, x_max: f64) -> (f64, f64) {
    assert!(x_min > 0.0 && x_max >= x_min);
    let (lo, hi) = (x_min.log10(), x_max.log10());
    if hi - lo <= 1.0 {
        return (x_min, x_max);
    }
    let c = 0.5 * (lo + hi);
    (10f64.powf(c - 0.5), 10f64.powf(c + 0.5))
}

/// Fits y = c·x^β by least squares on (ln x, ln y), using points with
/// x inside `range` (everything when `None`). Nonpositive x or y inside the
/// window are excluded and counted.
pub fn fit_power_law(points: &[(f64, f64)], range: Option<(f64, f64)>) -> Result<FitResult, FitError> {
    let mut excluded = 0usize;
    let mut logs: Vec<(f64, f64)> = Vec::new();
    let mut x_min = f64::INFINITY;
    let mut x_max = f64::NEG_INFINITY;
    for &(x, y) in points {
        if let Some((lo, hi)) = range {
            if x < lo || x > hi {
                continue;
            }
        }
        if x <= 0.0 || y <= 0.0 {
            excluded += 1;
            continue;
        }
        x_min = x_min.min(x);
        x_max = x_max.max(x);
        logs.push((x.ln(), y.ln()));
    }
    let n = logs.len();
    if n < 4 {
        return Err(FitError::TooFewPoints { needed: 4, got: n });
    }
    let nf = n as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / nf;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / nf;
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = logs
        .iter()
        .map(|p| {
            let r = p.1 - (slope * p.0 + intercept);
            r * r
        })
        .sum();
    let ss_tot: f64 = logs.iter().map(|p| (p.1 - my) * (p.1 - my)).sum();
    let stderr = if n > 2 {
        (ss_res / (nf - 2.0) / sxx).sqrt()
    } else {
        f64::NAN
    };
    let r2 = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 1.0 };
    Ok(FitResult {
        exponent: slope,
        prefactor: intercept.exp(),
        stderr,
        r2,
        n_points: n,
        x_min,
        x_max,
        excluded_nonpositive: excluded,
    })
}

/// Power-law fit of code distances against system size. Distances are small
/// integers; they are fitted as-is (no jitter), and at least four sizes are
/// required for the exponent to mean anything.
pub fn extract_distance_exponent(points: &[(usize, usize)]) -> Result<FitResult, FitError> {
    let float_points: Vec<(f64, f64)> = points
        .iter()
        .map(|&(l, d)| (l as f64, d as f64))
        .collect();
    fit_power_law(&float_points, None)
}

// ===== tests =====
