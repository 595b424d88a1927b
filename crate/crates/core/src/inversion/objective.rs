use num_complex::Complex64;

use super::SpectralData;
use crate::error::{config, Result};
use crate::surface::{fourier_basis, periodic_grid, FourierSurface, Surface};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Per-angle boundary misfits `J_l = ∫ |r_l|²` and their sum.
#[derive(Debug, Clone, PartialEq)]
pub struct Objective {
    pub per_angle: Vec<f64>,
    pub total: f64,
}

struct AngleTable {
    beta: f64,
    betas: Vec<Complex64>,
    /// `ψ_n exp(i α_n x_q)`, row-major by quadrature point.
    weights: Vec<Complex64>,
    /// `exp(i α x_q)`.
    incident: Vec<Complex64>,
}

/// Boundary-residual objective for a fixed set of incidences and a fixed
/// Fourier bandwidth, with all surface-independent factors tabulated.
pub struct ObjectiveModel {
    bandwidth: usize,
    xs: Vec<f64>,
    /// `b_p(x_q)`, row-major by basis index.
    basis: Vec<f64>,
    angles: Vec<AngleTable>,
}

/// `exp(i β f)` without a complex exponential for purely real or purely
/// imaginary `β`.
fn phase(beta: Complex64, f: f64) -> Complex64 {
    if beta.im == 0.0 {
        let (s, c) = (beta.re * f).sin_cos();
        Complex64::new(c, s)
    } else if beta.re == 0.0 {
        Complex64::new((-beta.im * f).exp(), 0.0)
    } else {
        (I * beta * f).exp()
    }
}

impl ObjectiveModel {
    pub fn new(spectra: &[SpectralData], bandwidth: usize, quadrature: usize) -> Result<Self> {
        if spectra.is_empty() {
            return config("objective needs at least one incidence");
        }
        if quadrature < 2 * bandwidth + 1 {
            return config("quadrature too coarse for the bandwidth");
        }
        let xs = periodic_grid(quadrature);
        let nb = 2 * bandwidth + 1;
        let mut basis = Vec::with_capacity(nb * quadrature);
        for p in 0..nb {
            basis.extend(xs.iter().map(|&x| fourier_basis(p, x)));
        }
        let angles = spectra
            .iter()
            .map(|s| {
                let mut weights = Vec::with_capacity(quadrature * s.modes.len());
                for &x in &xs {
                    for (m, psi) in s.modes.modes.iter().zip(&s.psi) {
                        weights.push(psi * (I * m.alpha * x).exp());
                    }
                }
                AngleTable {
                    beta: s.wave.beta,
                    betas: s.modes.modes.iter().map(|m| m.beta).collect(),
                    weights,
                    incident: xs.iter().map(|&x| (I * s.wave.alpha * x).exp()).collect(),
                }
            })
            .collect();
        Ok(ObjectiveModel {
            bandwidth,
            xs,
            basis,
            angles,
        })
    }

    pub fn bandwidth(&self) -> usize {
        self.bandwidth
    }

    pub fn quadrature_points(&self) -> &[f64] {
        &self.xs
    }

    fn heights(&self, c: &FourierSurface) -> Result<Vec<f64>> {
        if c.bandwidth() != self.bandwidth {
            return config(format!(
                "surface bandwidth {} does not match objective bandwidth {}",
                c.bandwidth(),
                self.bandwidth
            ));
        }
        Ok(c.heights(&self.xs))
    }

    /// Residual `r(x_q)` and its derivative with respect to the height.
    fn residual_at(&self, a: &AngleTable, q: usize, f: f64) -> (Complex64, Complex64) {
        let nm = a.betas.len();
        let row = &a.weights[q * nm..(q + 1) * nm];
        let mut r = Complex64::new(0.0, 0.0);
        let mut dr = Complex64::new(0.0, 0.0);
        for (w, &b) in row.iter().zip(&a.betas) {
            let t = w * phase(b, f);
            r += t;
            dr += t * b;
        }
        let inc = a.incident[q] * phase(Complex64::new(-a.beta, 0.0), f);
        (r + inc, I * (dr - inc * a.beta))
    }

    /// Residual on the quadrature grid for incidence `angle`.
    pub fn residual(&self, c: &FourierSurface, angle: usize) -> Result<Vec<Complex64>> {
        let fs = self.heights(c)?;
        let a = &self.angles[angle];
        Ok(fs
            .iter()
            .enumerate()
            .map(|(q, &f)| self.residual_at(a, q, f).0)
            .collect())
    }

    pub fn evaluate(&self, c: &FourierSurface) -> Result<Objective> {
        let fs = self.heights(c)?;
        let dx = std::f64::consts::TAU / self.xs.len() as f64;
        let per_angle: Vec<f64> = self
            .angles
            .iter()
            .map(|a| {
                dx * fs
                    .iter()
                    .enumerate()
                    .map(|(q, &f)| self.residual_at(a, q, f).0.norm_sqr())
                    .sum::<f64>()
            })
            .collect();
        let total = per_angle.iter().sum();
        Ok(Objective { per_angle, total })
    }

    /// Objective together with the gradient of each `J_l` with respect to
    /// the Fourier coefficients.
    pub fn gradient(&self, c: &FourierSurface) -> Result<(Objective, Vec<Vec<f64>>)> {
        let fs = self.heights(c)?;
        let nq = self.xs.len();
        let nb = 2 * self.bandwidth + 1;
        let dx = std::f64::consts::TAU / nq as f64;
        let mut per_angle = Vec::with_capacity(self.angles.len());
        let mut grads = Vec::with_capacity(self.angles.len());
        let mut sensitivity = vec![0.0; nq];
        for a in &self.angles {
            let mut j = 0.0;
            for (q, &f) in fs.iter().enumerate() {
                let (r, dr) = self.residual_at(a, q, f);
                j += r.norm_sqr();
                sensitivity[q] = 2.0 * (r.conj() * dr).re;
            }
            per_angle.push(dx * j);
            grads.push(
                (0..nb)
                    .map(|p| {
                        dx * self.basis[p * nq..(p + 1) * nq]
                            .iter()
                            .zip(&sensitivity)
                            .map(|(b, s)| b * s)
                            .sum::<f64>()
                    })
                    .collect(),
            );
        }
        let total = per_angle.iter().sum();
        Ok((Objective { per_angle, total }, grads))
    }
}
