//! Plane-wave incidence, Rayleigh modes and the quasi-periodic Green
//! function for period 2π.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_2, TAU};

use crate::error::{config, Error, Result};

/// Orders with `|β_n|` below this are treated as grazing (Wood anomaly).
pub const WOOD_TOLERANCE: f64 = 1e-8;

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlaneWave {
    pub kappa: f64,
    pub theta: f64,
    pub alpha: f64,
    pub beta: f64,
}

impl PlaneWave {
    pub fn new(kappa: f64, theta: f64) -> Result<Self> {
        if !(kappa.is_finite() && kappa > 0.0) {
            return config(format!("wavenumber must be positive, got {kappa}"));
        }
        if !(theta.is_finite() && theta.abs() < FRAC_PI_2) {
            return config(format!(
                "incidence angle must lie in (-π/2, π/2), got {theta}"
            ));
        }
        Ok(PlaneWave {
            kappa,
            theta,
            alpha: kappa * theta.sin(),
            beta: kappa * theta.cos(),
        })
    }

    pub fn mode(&self, order: i64) -> RayleighMode {
        let alpha = self.alpha + order as f64;
        let d = self.kappa * self.kappa - alpha * alpha;
        let beta = if alpha.abs() <= self.kappa {
            Complex64::new(d.max(0.0).sqrt(), 0.0)
        } else {
            Complex64::new(0.0, (-d).sqrt())
        };
        RayleighMode { order, alpha, beta }
    }
}

/// `u^i(x, y) = exp(i α x - i β y)`.
pub fn incident_field(wave: &PlaneWave, x: f64, y: f64) -> Complex64 {
    (I * (wave.alpha * x - wave.beta * y)).exp()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RayleighMode {
    pub order: i64,
    pub alpha: f64,
    /// Real and non-negative for propagating orders, positive imaginary for
    /// evanescent ones.
    pub beta: Complex64,
}

impl RayleighMode {
    pub fn is_propagating(&self) -> bool {
        self.beta.im == 0.0
    }

    pub fn is_grazing(&self) -> bool {
        self.beta.norm() < WOOD_TOLERANCE
    }

    /// `exp(i α_n x + i β_n y)`.
    pub fn wave(&self, x: f64, y: f64) -> Complex64 {
        (I * (self.alpha * x + self.beta * y)).exp()
    }
}

/// Orders `-N..=N` for one plane wave.
#[derive(Debug, Clone)]
pub struct ModeSet {
    pub wave: PlaneWave,
    pub truncation: usize,
    pub modes: Vec<RayleighMode>,
}

impl ModeSet {
    /// Fails if any order is grazing.
    pub fn new(wave: PlaneWave, truncation: usize) -> Result<Self> {
        let set = Self::allowing_grazing(wave, truncation);
        if let Some(m) = set.modes.iter().find(|m| m.is_grazing()) {
            return Err(Error::WoodAnomaly {
                order: m.order,
                beta_abs: m.beta.norm(),
            });
        }
        Ok(set)
    }

    /// Grazing orders are kept and classified as propagating.
    pub fn allowing_grazing(wave: PlaneWave, truncation: usize) -> Self {
        let n = truncation as i64;
        ModeSet {
            wave,
            truncation,
            modes: (-n..=n).map(|k| wave.mode(k)).collect(),
        }
    }

    /// Position of order `n` in `modes`.
    pub fn index(&self, order: i64) -> usize {
        (order + self.truncation as i64) as usize
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }
}

/// Smallest truncation `N` such that `-N..=N` contains every propagating
/// order of `wave`.
pub fn propagating_truncation(wave: &PlaneWave) -> usize {
    (wave.kappa + wave.alpha.abs()).floor() as usize + 1
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GreenOptions {
    /// Bound on the discarded tail of the mode series.
    pub tolerance: f64,
    /// Smallest admissible vertical separation `|y - t|`.
    pub min_separation: f64,
    pub max_order: i64,
}

impl Default for GreenOptions {
    fn default() -> Self {
        GreenOptions {
            tolerance: 1e-12,
            min_separation: 1e-3,
            max_order: 2000,
        }
    }
}

/// Bound on `Σ_{m > n} exp(-|β_m| d) / |β_m|` along one side of the series,
/// valid once order `n + 1` is evanescent (`|β|` then grows by at least one
/// per order).
fn tail_bound(beta_abs: f64, d: f64) -> f64 {
    (-beta_abs * d).exp() / (beta_abs * (1.0 - (-d).exp()))
}

/// Smallest `n` such that the series tails beyond `±n` are bounded by the
/// tolerance when each term is at most `weight · exp(-|β_m| d) / |β_m|`.
pub(crate) fn series_truncation(
    wave: &PlaneWave,
    d: f64,
    opts: &GreenOptions,
    weight: f64,
) -> Result<i64> {
    for n in 0..=opts.max_order {
        let (next_p, next_m) = (wave.mode(n + 1), wave.mode(-n - 1));
        if !next_p.is_propagating() && !next_m.is_propagating() {
            let bound = weight * (tail_bound(next_p.beta.im, d) + tail_bound(next_m.beta.im, d));
            if bound < opts.tolerance {
                return Ok(n);
            }
        }
    }
    Err(Error::SeriesNotConverged {
        max_order: opts.max_order,
    })
}

/// Quasi-periodic Green function
/// `G = (i / 2π) Σ_n exp(i α_n (x - s) + i β_n |y - t|) / β_n`.
pub fn quasiperiodic_green(
    wave: &PlaneWave,
    x: f64,
    y: f64,
    s: f64,
    t: f64,
    opts: &GreenOptions,
) -> Result<Complex64> {
    let d = (y - t).abs();
    if d < opts.min_separation {
        return Err(Error::Proximity { separation: d });
    }
    let n_max = series_truncation(wave, d, opts, 1.0)?;
    let dx = x - s;
    let mut sum = Complex64::new(0.0, 0.0);
    for n in -n_max..=n_max {
        let m = wave.mode(n);
        if m.is_grazing() {
            return Err(Error::WoodAnomaly {
                order: m.order,
                beta_abs: m.beta.norm(),
            });
        }
        sum += m.wave(dx, d) / m.beta;
    }
    Ok(sum * I / TAU)
}
