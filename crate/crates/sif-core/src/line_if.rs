//! Reference 1D discrete iterative filtering with a circulant filter
//! matrix, used as an oracle for the sifting-iteration mechanics.
//!
//! Signals are periodic. The moving average is `F g` with `F` a circulant
//! stochastic matrix built from nonnegative even filter samples. For a
//! double-convolution filter (samples that are a discrete
//! self-convolution), the iterates `(I - F)^m g` converge, and the limit
//! keeps exactly the signal frequencies where the filter's DFT vanishes.

use crate::error::{Result, SifError};
use num_complex::Complex64;
use rustfft::FftPlanner;

/// Circulant moving-average matrix, stored by its first row.
#[derive(Debug, Clone, PartialEq)]
pub struct CirculantFilter {
    n: usize,
    first_row: Vec<f64>,
    half_support: usize,
    double_convolution: bool,
}

/// DFT magnitudes at or below this threshold count as exact filter zeros
/// when building the limit projector.
const DFT_ZERO_TOL: f64 = 1e-12;

fn validate_samples(n: usize, samples: &[f64]) -> Result<usize> {
    if samples.is_empty() || samples.len() % 2 == 0 {
        return Err(SifError::InvalidFilter(
            "need an odd number of centered samples".into(),
        ));
    }
    let s = samples.len() / 2;
    if s >= n / 6 {
        return Err(SifError::InvalidFilter(format!(
            "half-support {s} must stay below n/6 = {}",
            n / 6
        )));
    }
    if samples.iter().any(|&v| !(v >= 0.0) || !v.is_finite()) {
        return Err(SifError::InvalidFilter("samples must be nonnegative".into()));
    }
    for k in 0..samples.len() {
        if samples[k] != samples[samples.len() - 1 - k] {
            return Err(SifError::InvalidFilter("samples must be even".into()));
        }
    }
    if samples.iter().sum::<f64>() <= 0.0 {
        return Err(SifError::InvalidFilter("samples must not be all zero".into()));
    }
    Ok(s)
}

impl CirculantFilter {
    /// Builds `F` from centered samples `[w_{-s}, ..., w_0, ..., w_s]`,
    /// normalized so each row sums to exactly 1.
    pub fn from_samples(n: usize, samples: &[f64]) -> Result<Self> {
        Self::build(n, samples, false)
    }

    /// Builds `F` from `base` convolved with itself, satisfying the
    /// double-convolution hypothesis of the limit formula.
    pub fn from_self_convolution(n: usize, base: &[f64]) -> Result<Self> {
        if base.is_empty() || base.len() % 2 == 0 {
            return Err(SifError::InvalidFilter(
                "need an odd number of centered base samples".into(),
            ));
        }
        let len = 2 * base.len() - 1;
        let mut conv = vec![0.0; len];
        for (a, &x) in base.iter().enumerate() {
            for (b, &y) in base.iter().enumerate() {
                conv[a + b] += x * y;
            }
        }
        Self::build(n, &conv, true)
    }

    fn build(n: usize, samples: &[f64], double: bool) -> Result<Self> {
        if n < 6 {
            return Err(SifError::InvalidFilter(format!(
                "signal length {n} too short for any admissible filter"
            )));
        }
        let s = validate_samples(n, samples)?;
        let total: f64 = samples.iter().sum();
        let mut first_row = vec![0.0; n];
        for (off, &v) in samples.iter().enumerate() {
            let k = off as i64 - s as i64;
            first_row[k.rem_euclid(n as i64) as usize] += v / total;
        }
        Ok(Self {
            n,
            first_row,
            half_support: s,
            double_convolution: double,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn first_row(&self) -> &[f64] {
        &self.first_row
    }

    pub fn half_support(&self) -> usize {
        self.half_support
    }

    pub fn is_double_convolution(&self) -> bool {
        self.double_convolution
    }

    /// Moving average `F g` (direct circular convolution).
    pub fn apply(&self, g: &[f64]) -> Result<Vec<f64>> {
        if g.len() != self.n {
            return Err(SifError::GridMismatch {
                lhs: self.n,
                rhs: g.len(),
            });
        }
        let n = self.n as i64;
        let s = self.half_support as i64;
        let mut out = vec![0.0; self.n];
        for (i, o) in out.iter_mut().enumerate() {
            let mut acc = 0.0;
            for k in -s..=s {
                let c = self.first_row[k.rem_euclid(n) as usize];
                acc += c * g[(i as i64 - k).rem_euclid(n) as usize];
            }
            *o = acc;
        }
        Ok(out)
    }

    /// One sifting step `(I - F) g`.
    pub fn sift(&self, g: &[f64]) -> Result<Vec<f64>> {
        let avg = self.apply(g)?;
        Ok(g.iter().zip(avg).map(|(x, a)| x - a).collect())
    }

    /// DFT of the first row (the circulant eigenvalues).
    pub fn dft_eigenvalues(&self) -> Vec<Complex64> {
        let mut planner = FftPlanner::new();
        let fft = planner.plan_fft_forward(self.n);
        let mut buf: Vec<Complex64> = self
            .first_row
            .iter()
            .map(|&v| Complex64::new(v, 0.0))
            .collect();
        fft.process(&mut buf);
        buf
    }
}

/// Limit of the sifting iteration, `lim (I - F)^m g`, via the DFT: keep
/// the signal frequencies where the filter's DFT vanishes, zero out the
/// rest, and transform back.
///
/// Requires a double-convolution filter (the circulant eigenvalues are
/// then `|w_hat|^2` in `[0, 1]`, which makes the powers converge); raw
/// filters are rejected.
pub fn if_limit_imf(filter: &CirculantFilter, g: &[f64]) -> Result<Vec<f64>> {
    if !filter.is_double_convolution() {
        return Err(SifError::InvalidFilter(
            "limit formula requires a double-convolution filter".into(),
        ));
    }
    if g.len() != filter.n() {
        return Err(SifError::GridMismatch {
            lhs: filter.n(),
            rhs: g.len(),
        });
    }
    let n = filter.n();
    let lam = filter.dft_eigenvalues();
    let mut planner = FftPlanner::new();
    let fwd = planner.plan_fft_forward(n);
    let inv = planner.plan_fft_inverse(n);
    let mut buf: Vec<Complex64> = g.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fwd.process(&mut buf);
    for (b, l) in buf.iter_mut().zip(&lam) {
        if l.norm() > DFT_ZERO_TOL {
            *b = Complex64::new(0.0, 0.0);
        }
    }
    inv.process(&mut buf);
    Ok(buf.iter().map(|z| z.re / n as f64).collect())
}

/// Settings for the 1D decomposition loop.
#[derive(Debug, Clone, Copy)]
pub struct DifConfig {
    pub delta: f64,
    pub max_inner_iterations: usize,
    pub max_imfs: usize,
    /// Filter-length scale: half-support of the base triangle is
    /// `floor(chi * n / extrema_count)`.
    pub chi: f64,
}

impl Default for DifConfig {
    fn default() -> Self {
        Self {
            delta: 1e-3,
            max_inner_iterations: 200,
            max_imfs: 8,
            chi: 1.6,
        }
    }
}

/// Result of `dif_decompose`.
#[derive(Debug, Clone)]
pub struct DifResult {
    pub imfs: Vec<Vec<f64>>,
    pub remainder: Vec<f64>,
    pub inner_iterations: Vec<usize>,
}

/// Strict local extrema of a periodic sequence.
pub fn count_extrema_1d(g: &[f64]) -> usize {
    let n = g.len();
    if n < 3 {
        return 0;
    }
    let mut count = 0;
    for i in 0..n {
        let prev = g[(i + n - 1) % n];
        let next = g[(i + 1) % n];
        if (g[i] > prev && g[i] > next) || (g[i] < prev && g[i] < next) {
            count += 1;
        }
    }
    count
}

fn l2(g: &[f64]) -> f64 {
    g.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// 1D iterative filtering (the sphere algorithm's line ancestor): repeat
/// sifting with a self-convolved triangle filter sized from the extrema
/// count, peel the converged iterate off, and stop when fewer than two
/// extrema remain.
pub fn dif_decompose(g: &[f64], config: &DifConfig) -> Result<DifResult> {
    let n = g.len();
    if n < 6 {
        return Err(SifError::InvalidFilter(format!(
            "signal length {n} too short to filter"
        )));
    }
    let mut remainder = g.to_vec();
    let mut imfs = Vec::new();
    let mut inner = Vec::new();
    while imfs.len() < config.max_imfs {
        let extrema = count_extrema_1d(&remainder);
        if extrema < 2 {
            break;
        }
        // base triangle half-width from the mean extrema spacing, clamped
        // to the admissible support
        let b_raw = (config.chi * n as f64 / extrema as f64).floor() as usize;
        let b_max = (n / 6).saturating_sub(2) / 2;
        let b = b_raw.clamp(1, b_max.max(1));
        let tri: Vec<f64> = (0..2 * b + 1)
            .map(|k| b as f64 + 1.0 - (k as i64 - b as i64).abs() as f64)
            .collect();
        let filter = CirculantFilter::from_self_convolution(n, &tri)?;

        let mut it = remainder.clone();
        let mut used = 0;
        for _ in 0..config.max_inner_iterations {
            let denom = l2(&it);
            if denom == 0.0 {
                return Err(SifError::DegenerateSignal);
            }
            let next = filter.sift(&it)?;
            used += 1;
            let diff: f64 = next
                .iter()
                .zip(&it)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            it = next;
            if diff / denom <= config.delta {
                break;
            }
        }
        inner.push(used);
        for (r, v) in remainder.iter_mut().zip(&it) {
            *r -= v;
        }
        imfs.push(it);
    }
    Ok(DifResult {
        imfs,
        remainder,
        inner_iterations: inner,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn mode(n: usize, k: usize, phase: f64) -> Vec<f64> {
        (0..n)
            .map(|i| (2.0 * PI * k as f64 * i as f64 / n as f64 + phase).cos())
            .collect()
    }

    #[test]
    fn rows_sum_to_one_exactly() {
        let f = CirculantFilter::from_samples(32, &[1.0, 2.0, 1.0]).unwrap();
        let sum: f64 = f.first_row().iter().sum();
        assert!((sum - 1.0).abs() <= 1e-15);
    }

    #[test]
    fn rejects_bad_samples() {
        assert!(CirculantFilter::from_samples(32, &[1.0, 2.0]).is_err());
        assert!(CirculantFilter::from_samples(32, &[1.0, 2.0, 0.5]).is_err());
        assert!(CirculantFilter::from_samples(32, &[-1.0, 2.0, -1.0]).is_err());
        let wide = vec![1.0; 13]; // half-support 6 >= 32/6
        assert!(CirculantFilter::from_samples(32, &wide).is_err());
    }

    #[test]
    fn delta_filter_is_identity() {
        let f = CirculantFilter::from_samples(32, &[1.0]).unwrap();
        let g: Vec<f64> = (0..32).map(|i| (i as f64).sin()).collect();
        let avg = f.apply(&g).unwrap();
        for (a, b) in avg.iter().zip(&g) {
            assert_abs_diff_eq!(a, b);
        }
        // (I - F) g = 0 for every g, from the first step on
        let sifted = f.sift(&g).unwrap();
        assert!(sifted.iter().all(|v| v.abs() <= 1e-15));
    }

    #[test]
    fn limit_requires_double_convolution() {
        let raw = CirculantFilter::from_samples(64, &[1.0, 2.0, 1.0]).unwrap();
        let g = mode(64, 3, 0.0);
        assert!(if_limit_imf(&raw, &g).is_err());
    }

    #[test]
    fn limit_removes_constants() {
        // frequency 0 response is the row sum 1, never zero, so the limit
        // IMF is orthogonal to constants
        let base: Vec<f64> = vec![1.0, 2.0, 3.0, 2.0, 1.0];
        let f = CirculantFilter::from_self_convolution(64, &base).unwrap();
        let g = vec![1.0; 64];
        let imf = if_limit_imf(&f, &g).unwrap();
        assert!(imf.iter().all(|v| v.abs() <= 1e-12));
    }

    #[test]
    fn filter_dft_zero_mode_is_fixed_point() {
        // triangle of half-width 7 on n = 128: the width 8 divides n, so
        // the DFT has exact interior zeros (at multiples of 16)
        let tri: Vec<f64> = (0..15)
            .map(|k| 8.0 - ((k as i64) - 7).abs() as f64)
            .collect();
        let f = CirculantFilter::from_self_convolution(128, &tri).unwrap();
        let lam = f.dft_eigenvalues();
        let k0 = (1..64)
            .find(|&k| lam[k].norm() <= DFT_ZERO_TOL)
            .expect("triangle DFT has interior zeros");
        let g = mode(128, k0, 0.4);
        let mut it = g.clone();
        for _ in 0..50 {
            it = f.sift(&it).unwrap();
        }
        for (a, b) in it.iter().zip(&g) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-10);
        }
    }

    #[test]
    fn power_iteration_converges_to_dft_limit() {
        let tri: Vec<f64> = vec![1.0, 2.0, 3.0, 4.0, 5.0, 4.0, 3.0, 2.0, 1.0];
        let f = CirculantFilter::from_self_convolution(64, &tri).unwrap();
        // random-ish but deterministic signal
        let g: Vec<f64> = (0..64)
            .map(|i| ((i * i + 3 * i) as f64 * 0.7).sin() + 0.3 * ((i * 5) as f64).cos())
            .collect();
        let limit = if_limit_imf(&f, &g).unwrap();
        let mut it = g.clone();
        let mut dists = Vec::new();
        let mut m = 0usize;
        for &checkpoint in &[10usize, 100, 1000] {
            while m < checkpoint {
                it = f.sift(&it).unwrap();
                m += 1;
            }
            let d: f64 = it
                .iter()
                .zip(&limit)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            dists.push(d);
        }
        assert!(dists[1] < dists[0] && dists[2] < dists[1], "{dists:?}");
    }

    #[test]
    fn spectral_radius_of_sifting_map_at_most_one() {
        let tri: Vec<f64> = vec![1.0, 3.0, 5.0, 3.0, 1.0];
        let f = CirculantFilter::from_self_convolution(128, &tri).unwrap();
        for lam in f.dft_eigenvalues() {
            // eigenvalues are |w_hat|^2 in [0, 1]; I - F eigenvalues in [0, 1]
            assert!(lam.im.abs() <= 1e-12);
            assert!(lam.re >= -1e-12 && lam.re <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn decompose_two_sinusoids() {
        let n = 256;
        let hi = mode(n, 32, 0.0);
        let lo = mode(n, 10, 1.1);
        let g: Vec<f64> = hi.iter().zip(&lo).map(|(a, b)| a + b).collect();
        let cfg = DifConfig {
            delta: 5e-3,
            ..DifConfig::default()
        };
        let out = dif_decompose(&g, &cfg).unwrap();
        assert!(out.imfs.len() >= 2, "got {} IMFs", out.imfs.len());
        let rel = |a: &[f64], b: &[f64]| {
            let d: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt();
            d / l2(b)
        };
        assert!(rel(&out.imfs[0], &hi) <= 0.1, "imf1 err {}", rel(&out.imfs[0], &hi));
        assert!(rel(&out.imfs[1], &lo) <= 0.1, "imf2 err {}", rel(&out.imfs[1], &lo));
    }

    #[test]
    fn decompose_constant_yields_nothing() {
        let g = vec![2.0; 64];
        let out = dif_decompose(&g, &DifConfig::default()).unwrap();
        assert!(out.imfs.is_empty());
        assert_eq!(out.remainder, g);
    }

    #[test]
    fn reconstruction_identity() {
        let n = 128;
        let g: Vec<f64> = (0..n).map(|i| ((i * 7) as f64 * 0.13).sin()).collect();
        let out = dif_decompose(&g, &DifConfig::default()).unwrap();
        for i in 0..n {
            let total: f64 = out.imfs.iter().map(|imf| imf[i]).sum::<f64>() + out.remainder[i];
            assert!((total - g[i]).abs() <= 1e-12);
        }
    }
}
