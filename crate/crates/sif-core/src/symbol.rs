//! The GLT / spectral symbol of the operator family pinned at `R = m h`.
//!
//! The diagonal functions are
//! `a_{t,s}(x2) = 6 sin(pi x2) (m - sqrt(s^2 + 4 t^2 sin^2(pi x2)))^+ / (m^3 pi)`
//! and the symbol is `kappa(x2, theta) = sum_{t,s} a_{t,s}(x2)
//! exp(i (t theta1 + s theta2))`. For every interior `x2` only finitely
//! many addends are nonzero (`|s| < m`, `|t| < m / (2 sin(pi x2))`); on
//! the measure-zero set `sin(pi x2) = 0` every addend vanishes and the
//! symbol is defined as 0.
//!
//! `kappa` takes negative real values near the poles; already at `m = 2`
//! the value at `theta = (0, pi)` tends to a negative constant as
//! `x2 -> 0`, which rules out convergence of the naive sifting iteration.

use crate::par;
use num_complex::Complex64;
use std::f64::consts::PI;

/// Diagonal function `a_{t,s}` (independent of `x1`, even in `t` and `s`).
/// Exactly zero at the domain edges `x2 = 0, 1` where `sin(pi x2)`
/// vanishes (floating-point `sin(pi)` leaves a ~1e-16 residue otherwise).
pub fn a_ts(t: i64, s: i64, x2: f64, m: f64) -> f64 {
    debug_assert!(m > 0.0);
    if x2 <= 0.0 || x2 >= 1.0 {
        return 0.0;
    }
    let sn = (PI * x2).sin();
    let root = ((s * s) as f64 + 4.0 * (t * t) as f64 * sn * sn).sqrt();
    6.0 * sn * (m - root).max(0.0) / (m * m * m * PI)
}

/// Pointwise symbol value `kappa(x2, theta1, theta2)`.
///
/// The sum runs over the finite support window `|s| <= ceil(m)`,
/// `|t| <= ceil(m / (2 sin(pi x2)))`; widening the window adds only zero
/// terms. Returns exactly 0 when `sin(pi x2) = 0` (including the lattice
/// endpoints `x2 = 0, 1`).
pub fn symbol(x2: f64, theta1: f64, theta2: f64, m: f64) -> Complex64 {
    let sn = (PI * x2).sin();
    if x2 <= 0.0 || x2 >= 1.0 || sn <= 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    let t_max = (m / (2.0 * sn)).ceil() as i64;
    let s_max = m.ceil() as i64;
    let mut acc = Complex64::new(0.0, 0.0);
    for t in -t_max..=t_max {
        for s in -s_max..=s_max {
            let a = a_ts(t, s, x2, m);
            if a != 0.0 {
                let phase = t as f64 * theta1 + s as f64 * theta2;
                acc += Complex64::new(a * phase.cos(), a * phase.sin());
            }
        }
    }
    acc
}

/// Quantile-based eigenvalue approximation from the symbol.
///
/// Evaluates `kappa` on the lattice `x2 = j/N` (`j = 1..N`, matching the
/// diagonal sampling of the matrix family) times an `L x L` midpoint
/// lattice over `[-pi, pi]^2` with `L = ceil(sqrt(oversample * N))`,
/// sorts the samples by real part and returns `N^2` equispaced order
/// statistics.
pub fn symbol_eig_approx(n: usize, m: f64, oversample: usize) -> Vec<Complex64> {
    assert!(n >= 2 && oversample >= 1);
    let l = ((oversample * n) as f64).sqrt().ceil() as usize;
    let thetas: Vec<f64> = (0..l)
        .map(|a| -PI + (a as f64 + 0.5) * 2.0 * PI / l as f64)
        .collect();

    let slabs = par::map_range(n, |j0| {
        let x2 = (j0 + 1) as f64 / n as f64;
        let mut slab = Vec::with_capacity(l * l);
        for &t1 in &thetas {
            for &t2 in &thetas {
                slab.push(symbol(x2, t1, t2, m));
            }
        }
        slab
    });

    let mut samples: Vec<Complex64> = slabs.into_iter().flatten().collect();
    samples.sort_by(|a, b| {
        a.re.partial_cmp(&b.re)
            .unwrap()
            .then(a.im.partial_cmp(&b.im).unwrap())
    });
    let total = samples.len();
    (0..n * n)
        .map(|r| {
            let idx = (((r as f64 + 0.5) * total as f64) / (n * n) as f64).floor() as usize;
            samples[idx.min(total - 1)]
        })
        .collect()
}

/// One row of the pole-limit scan of `kappa(x2, (0, pi))`.
#[derive(Debug, Clone, Copy)]
pub struct CounterexampleRow {
    pub x2: f64,
    pub kappa_re: f64,
    pub negative: bool,
}

/// Evaluates `kappa(x2, (0, pi))` over the given `x2` values and flags the
/// negative region.
pub fn counterexample_scan(m: f64, x2_values: &[f64]) -> Vec<CounterexampleRow> {
    x2_values
        .iter()
        .map(|&x2| {
            let k = symbol(x2, 0.0, PI, m).re;
            CounterexampleRow {
                x2,
                kappa_re: k,
                negative: k < 0.0,
            }
        })
        .collect()
}

/// Analytic `x2 -> 0` limit of `kappa(x2, (0, pi))` at `m = 2`:
/// the two lattice sums become Riemann sums with step `sin(pi x2)` of
/// `int (1 - |x|)^+ dx = 1` and
/// `int (2 - sqrt(1 + 4x^2))^+ dx = sqrt(3) - asinh(sqrt(3)) / 2`,
/// so the limit is `(3 / 2pi) (1 - sqrt(3) + ln(2 + sqrt(3)) / 2)`,
/// approximately `-0.0351280`.
pub fn counterexample_limit_m2() -> f64 {
    1.5 / PI * (1.0 - 3.0f64.sqrt() + (2.0 + 3.0f64.sqrt()).ln() / 2.0)
}
