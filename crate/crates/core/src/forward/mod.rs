//! Forward scattering by a sound-soft periodic surface.
//!
//! The scattered field is represented as a single-layer potential on a flat
//! line of `N` equispaced sources below the surface. Because the sources are
//! equispaced, the potential factors through the discrete Fourier transform
//! of the density: mode `n` of the field only sees DFT bin `n mod N`. The
//! collocation system is therefore assembled directly in that modal basis,
//! solved by truncated SVD, and the density recovered by an inverse DFT.

pub mod dataset;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

use crate::error::{config, Error, Result};
use crate::linalg::truncated_lstsq;
use crate::rng::symmetric_uniform;
use crate::surface::{periodic_grid, Surface};
use crate::waves::{
    incident_field, propagating_truncation, quasiperiodic_green, series_truncation, GreenOptions,
    ModeSet, PlaneWave, RayleighMode,
};

const I: Complex64 = Complex64::new(0.0, 1.0);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ForwardOptions {
    pub sources: usize,
    pub collocation: usize,
    /// Distance between the lowest collocation point and the source line.
    pub gap: f64,
    /// Relative singular-value cutoff.
    pub svd_cutoff: f64,
    /// Modal columns whose norm is below this fraction of the largest are
    /// dropped before factorisation.
    pub column_cutoff: f64,
    pub green: GreenOptions,
}

impl Default for ForwardOptions {
    fn default() -> Self {
        ForwardOptions {
            sources: 256,
            collocation: 512,
            gap: 0.5,
            svd_cutoff: 1e-12,
            column_cutoff: 1e-13,
            green: GreenOptions::default(),
        }
    }
}

impl ForwardOptions {
    pub fn validate(&self) -> Result<()> {
        if self.sources < 2 || self.collocation < self.sources {
            return config("need at least 2 sources and no fewer collocation points than sources");
        }
        if !(self.gap > 0.0) {
            return config("source gap must be positive");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SourceLine {
    pub depth: f64,
    pub count: usize,
}

impl SourceLine {
    pub fn position(&self, j: usize) -> f64 {
        TAU * j as f64 / self.count as f64
    }

    pub fn weight(&self) -> f64 {
        TAU / self.count as f64
    }

    /// Signed order represented by DFT bin `q`.
    fn bin_order(&self, q: usize) -> i64 {
        let n = self.count as i64;
        let q = q as i64;
        if q < n / 2 {
            q
        } else {
            q - n
        }
    }

    fn order_bin(&self, order: i64) -> usize {
        order.rem_euclid(self.count as i64) as usize
    }
}

/// Modal weight `i / (2π β_n)`; grazing orders use `κ` in place of `β_n`.
fn modal_weight(mode: &RayleighMode, kappa: f64) -> Complex64 {
    let beta = if mode.is_grazing() {
        Complex64::new(kappa, 0.0)
    } else {
        mode.beta
    };
    I / (beta * TAU)
}

#[derive(Debug, Clone)]
pub struct LayerDensity {
    pub wave: PlaneWave,
    pub line: SourceLine,
    /// Density values at the sources.
    pub values: Vec<Complex64>,
    /// `Φ_q = Σ_j w φ_j exp(-i α_q s_j)` per DFT bin.
    pub spectrum: Vec<Complex64>,
    pub rank: usize,
    pub columns: usize,
    /// Largest boundary-condition violation at the collocation points.
    pub residual: f64,
    green: GreenOptions,
}

/// Solve for the density whose potential cancels the incident field on the
/// surface.
pub fn solve_layer_density(
    surface: &dyn Surface,
    wave: &PlaneWave,
    opts: &ForwardOptions,
) -> Result<LayerDensity> {
    opts.validate()?;
    let xs = periodic_grid(opts.collocation);
    let fs = surface.heights(&xs);
    if fs.iter().any(|f| !f.is_finite()) {
        return Err(Error::Singular("surface height is not finite".into()));
    }
    let depth = fs.iter().copied().fold(f64::INFINITY, f64::min) - opts.gap;
    let line = SourceLine {
        depth,
        count: opts.sources,
    };

    let bins: Vec<(usize, RayleighMode, Complex64)> = (0..line.count)
        .map(|q| {
            let m = wave.mode(line.bin_order(q));
            (q, m, modal_weight(&m, wave.kappa))
        })
        .collect();
    let column = |m: &RayleighMode, w: Complex64| -> Vec<Complex64> {
        xs.iter()
            .zip(&fs)
            .map(|(&x, &f)| w * m.wave(x, f - depth))
            .collect()
    };
    let root_rows = (opts.collocation as f64).sqrt();
    // Propagating columns have norm exactly |w| √rows.
    let floor = bins
        .iter()
        .filter(|(_, m, _)| m.is_propagating())
        .map(|(_, _, w)| w.norm() * root_rows)
        .fold(0.0, f64::max);
    let mut columns = Vec::new();
    let mut norms = Vec::new();
    for (q, m, w) in &bins {
        // Norm bound from the lowest point; such columns would be dropped
        // below anyway.
        let bound = w.norm() * (-m.beta.im * opts.gap).exp() * root_rows;
        if bound <= opts.column_cutoff * floor {
            continue;
        }
        let c = column(m, *w);
        let norm = c.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        columns.push((*q, c));
        norms.push(norm);
    }
    let max_norm = norms.iter().copied().fold(0.0, f64::max);
    let kept: Vec<(usize, Vec<Complex64>)> = columns
        .into_iter()
        .zip(&norms)
        .filter(|(_, &n)| n > opts.column_cutoff * max_norm)
        .map(|(c, _)| c)
        .collect();
    let rows = xs.len();
    let a = DMatrix::from_fn(rows, kept.len(), |i, j| kept[j].1[i]);
    let rhs = DVector::from_iterator(
        rows,
        xs.iter()
            .zip(&fs)
            .map(|(&x, &f)| -incident_field(wave, x, f)),
    );
    let ls = truncated_lstsq(a.clone(), &rhs, opts.svd_cutoff)?;
    let residual = (&a * &ls.solution - &rhs)
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max);

    let mut spectrum = vec![Complex64::new(0.0, 0.0); line.count];
    for (j, (q, _)) in kept.iter().enumerate() {
        spectrum[*q] = ls.solution[j];
    }
    let n = line.count;
    let twiddle: Vec<Complex64> = (0..n)
        .map(|k| (I * TAU * k as f64 / n as f64).exp())
        .collect();
    let active: Vec<usize> = kept.iter().map(|(q, _)| *q).collect();
    let values = (0..n)
        .map(|j| {
            let psi: Complex64 = active
                .iter()
                .map(|&q| spectrum[q] * twiddle[(q * j) % n])
                .sum::<Complex64>()
                / n as f64;
            psi * (I * wave.alpha * line.position(j)).exp() / line.weight()
        })
        .collect();
    Ok(LayerDensity {
        wave: *wave,
        line,
        values,
        spectrum,
        rank: ls.rank,
        columns: kept.len(),
        residual,
        green: opts.green,
    })
}

impl LayerDensity {
    fn coefficient(&self, order: i64) -> Complex64 {
        self.spectrum[self.line.order_bin(order)]
    }

    /// Orders `-n..=n` needed at height `y`, plus the modes themselves.
    fn modes_at(&self, y: f64) -> Result<Vec<(RayleighMode, Complex64)>> {
        let d = y - self.line.depth;
        if d < self.green.min_separation {
            return Err(Error::Proximity {
                separation: d.abs(),
            });
        }
        let bound = self.spectrum.iter().map(|z| z.norm()).fold(0.0, f64::max) / TAU;
        let n_max = series_truncation(&self.wave, d, &self.green, bound.max(f64::MIN_POSITIVE))?;
        Ok((-n_max..=n_max)
            .map(|n| {
                let m = self.wave.mode(n);
                let c = modal_weight(&m, self.wave.kappa)
                    * (I * m.beta * d).exp()
                    * self.coefficient(n);
                (m, c)
            })
            .collect())
    }

    /// Scattered field at points on the horizontal line `y`.
    pub fn field_on_line(&self, xs: &[f64], y: f64) -> Result<Vec<Complex64>> {
        let terms = self.modes_at(y)?;
        Ok(xs
            .iter()
            .map(|&x| terms.iter().map(|(m, c)| c * (I * m.alpha * x).exp()).sum())
            .collect())
    }

    pub fn scattered_field(&self, x: f64, y: f64) -> Result<Complex64> {
        Ok(self.field_on_line(&[x], y)?[0])
    }

    /// The same potential summed source by source with the Green function.
    /// Slow; used to cross-check the modal evaluation.
    pub fn scattered_field_direct(&self, x: f64, y: f64) -> Result<Complex64> {
        let w = self.line.weight();
        self.values
            .iter()
            .enumerate()
            .map(|(j, phi)| {
                quasiperiodic_green(
                    &self.wave,
                    x,
                    y,
                    self.line.position(j),
                    self.line.depth,
                    &self.green,
                )
                .map(|g| g * phi * w)
            })
            .sum()
    }

    /// Sample the scattered field on `nx` equispaced points at height `y0`.
    pub fn sample(&self, y0: f64, nx: usize) -> Result<FieldSamples> {
        let values = self.field_on_line(&periodic_grid(nx), y0)?;
        Ok(FieldSamples {
            kappa: self.wave.kappa,
            theta: self.wave.theta,
            y0,
            values,
        })
    }
}

/// Field values at `x_k = 2π k / n`, `k = 0..n`, on the line `y = y0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldSamples {
    pub kappa: f64,
    pub theta: f64,
    pub y0: f64,
    pub values: Vec<Complex64>,
}

impl FieldSamples {
    pub fn wave(&self) -> Result<PlaneWave> {
        PlaneWave::new(self.kappa, self.theta)
    }
}

/// Trapezoid Fourier coefficients `u_n = (1/n) Σ_k u(x_k) exp(-i α_n x_k)`.
pub fn field_coefficients(field: &FieldSamples, modes: &ModeSet) -> Vec<Complex64> {
    let n = field.values.len();
    let xs = periodic_grid(n);
    modes
        .modes
        .iter()
        .map(|m| {
            field
                .values
                .iter()
                .zip(&xs)
                .map(|(u, &x)| u * (-I * m.alpha * x).exp())
                .sum::<Complex64>()
                / n as f64
        })
        .collect()
}

/// Rayleigh amplitudes `A_n = u_n exp(-i β_n y0)`.
pub fn rayleigh_amplitudes(field: &FieldSamples, modes: &ModeSet) -> Vec<Complex64> {
    field_coefficients(field, modes)
        .into_iter()
        .zip(&modes.modes)
        .map(|(u, m)| u * (-I * m.beta * field.y0).exp())
        .collect()
}

/// Reflected energy `Σ_prop (β_n / β) |A_n|²`; equals one for an exact
/// solution when every propagating order is present.
pub fn energy_balance(amplitudes: &[Complex64], modes: &ModeSet) -> Result<f64> {
    if amplitudes.len() != modes.len() {
        return Err(Error::LengthMismatch {
            expected: modes.len(),
            found: amplitudes.len(),
        });
    }
    let beta = modes.wave.beta;
    Ok(amplitudes
        .iter()
        .zip(&modes.modes)
        .filter(|(_, m)| m.is_propagating())
        .map(|(a, m)| m.beta.re / beta * a.norm_sqr())
        .sum())
}

/// Energy balance of a sampled field using every propagating order.
pub fn energy_audit(field: &FieldSamples) -> Result<f64> {
    let wave = field.wave()?;
    let modes = ModeSet::allowing_grazing(wave, propagating_truncation(&wave));
    energy_balance(&rayleigh_amplitudes(field, &modes), &modes)
}

/// Rayleigh amplitudes fitted by least squares to the boundary condition,
/// assuming the expansion holds down to the surface.
pub fn rayleigh_lsq(
    surface: &dyn Surface,
    wave: &PlaneWave,
    truncation: usize,
    collocation: usize,
) -> Result<Vec<Complex64>> {
    let modes = ModeSet::allowing_grazing(*wave, truncation);
    if collocation < modes.len() {
        return config("fewer collocation points than Rayleigh orders");
    }
    let xs = periodic_grid(collocation);
    let fs = surface.heights(&xs);
    let mut a = DMatrix::from_fn(xs.len(), modes.len(), |i, j| {
        modes.modes[j].wave(xs[i], fs[i])
    });
    let scale: Vec<f64> = a.column_iter().map(|c| c.norm()).collect();
    for (j, s) in scale.iter().enumerate() {
        a.column_mut(j).unscale_mut(*s);
    }
    let rhs = DVector::from_iterator(
        xs.len(),
        xs.iter()
            .zip(&fs)
            .map(|(&x, &f)| -incident_field(wave, x, f)),
    );
    let cols = modes.len();
    let ls = truncated_lstsq(a, &rhs, collocation as f64 * f64::EPSILON)?;
    if ls.rank < cols {
        return Err(Error::RankDeficient {
            rank: ls.rank,
            columns: cols,
        });
    }
    Ok(ls.solution.iter().zip(&scale).map(|(x, s)| x / s).collect())
}

/// Multiplicative noise `u (1 + τ ε)` with `ε` uniform on `[-1, 1)`.
pub fn add_noise<R: Rng + ?Sized>(field: &mut FieldSamples, tau: f64, rng: &mut R) {
    for u in &mut field.values {
        *u *= 1.0 + tau * symmetric_uniform(rng);
    }
}
