//! Synthetic test signals and ground-truth error metrics.

use crate::error::Result;
use crate::grid::{arc_distance, GridPoint, GridSpec};
use crate::operator::SiftOperator;
use crate::signal::SphericalSignal;
use std::f64::consts::PI;

/// A windowed circular wave `amplitude * cos(k d(z, center)) * w(d)`.
///
/// The window is 1 out to 85% of `support_radius`, then tapers to 0 with
/// a raised cosine; the taper keeps the truncation ring from dominating
/// error maps. `support_radius = None` means the whole sphere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaveSpec {
    pub center: GridPoint,
    pub angular_frequency: f64,
    pub amplitude: f64,
    pub support_radius: Option<f64>,
}

/// Fraction of the support radius over which the raised-cosine taper acts.
const TAPER_FRACTION: f64 = 0.15;

impl WaveSpec {
    /// Wave value at arc distance `d` from the center.
    pub fn profile(&self, d: f64) -> f64 {
        self.amplitude * (self.angular_frequency * d).cos() * self.window(d)
    }

    fn window(&self, d: f64) -> f64 {
        match self.support_radius {
            None => 1.0,
            Some(rho) => {
                let flat = (1.0 - TAPER_FRACTION) * rho;
                if d >= rho {
                    0.0
                } else if d <= flat {
                    1.0
                } else {
                    0.5 * (1.0 + (PI * (d - flat) / (rho - flat)).cos())
                }
            }
        }
    }
}

/// Samples the wave on the grid.
pub fn circular_wave(grid: &GridSpec, spec: &WaveSpec) -> SphericalSignal {
    SphericalSignal::from_fn(*grid, |z| spec.profile(arc_distance(z, spec.center)))
}

/// Canonical two-wave preset: the high-frequency wave (the extraction
/// target) and a low-frequency companion on the antipodal cap.
///
/// The high frequency is tuned so the conic moving average at radius
/// `pi/20` nearly annihilates the wave (the cap average of
/// `cos(48 d)` at that radius sits close to a sign change of the radial
/// attenuation), which is the regime where sifting isolates it in a few
/// iterations while the non-stabilized iteration is driven by the
/// filter's negative spectrum.
pub const TWO_WAVE_K1: f64 = 48.0;
pub const TWO_WAVE_K2: f64 = 6.0;
pub const TWO_WAVE_SUPPORT: f64 = PI / 2.0;

/// Centers of the two waves: mid-latitude, antipodal to each other.
pub fn two_wave_centers() -> (GridPoint, GridPoint) {
    (
        GridPoint {
            theta: PI / 2.0,
            phi: PI / 6.0,
        },
        GridPoint {
            theta: 3.0 * PI / 2.0,
            phi: -PI / 6.0,
        },
    )
}

/// Wave specifications for the canonical two-wave preset.
pub fn two_wave_specs() -> (WaveSpec, WaveSpec) {
    let (c1, c2) = two_wave_centers();
    (
        WaveSpec {
            center: c1,
            angular_frequency: TWO_WAVE_K1,
            amplitude: 1.0,
            support_radius: Some(TWO_WAVE_SUPPORT),
        },
        WaveSpec {
            center: c2,
            angular_frequency: TWO_WAVE_K2,
            amplitude: 1.0,
            support_radius: Some(TWO_WAVE_SUPPORT),
        },
    )
}

/// The canonical test signal and its two ground-truth components:
/// `(signal, high_frequency_wave, low_frequency_wave)`.
pub fn two_wave_preset(grid: &GridSpec) -> (SphericalSignal, SphericalSignal, SphericalSignal) {
    let (s1, s2) = two_wave_specs();
    let w1 = circular_wave(grid, &s1);
    let w2 = circular_wave(grid, &s2);
    let sum = w1.add(&w2).expect("same grid");
    (sum, w1, w2)
}

/// Area-weighted L2 distance `sqrt(sum sigma_ij (a - b)_ij^2)`.
pub fn weighted_l2_error(a: &SphericalSignal, b: &SphericalSignal) -> Result<f64> {
    Ok(a.sub(b)?.weighted_norm())
}

/// Per-cell absolute error `|a - b|`, for error-map output.
pub fn error_map(a: &SphericalSignal, b: &SphericalSignal) -> Result<SphericalSignal> {
    let diff = a.sub(b)?;
    Ok(SphericalSignal::from_raw(
        *a.grid(),
        diff.values().mapv(f64::abs),
    ))
}

/// Iterates the chosen sifting map from `g` and records the area-weighted
/// L2 error against `ground_truth` after each application.
pub fn error_curve(
    g: &SphericalSignal,
    ground_truth: &SphericalSignal,
    op: &SiftOperator,
    stabilized: bool,
    iterations: usize,
) -> Result<Vec<f64>> {
    g.check_same_grid(ground_truth)?;
    let mut it = g.clone();
    let mut errs = Vec::with_capacity(iterations);
    for _ in 0..iterations {
        it = if stabilized {
            op.sift_stabilized(&it)?
        } else {
            op.sift(&it)?
        };
        errs.push(weighted_l2_error(&it, ground_truth)?);
    }
    Ok(errs)
}
