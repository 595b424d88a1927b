//! Closed-form and tabulated periodic profiles used for mean curves and
//! intensity functions.

use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

use crate::error::{config, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Cos,
    Sin,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrigTerm {
    pub amplitude: f64,
    pub frequency: u32,
    pub phase: Phase,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExpCosTerm {
    pub amplitude: f64,
    pub frequency: u32,
}

/// A 2π-periodic real function.
///
/// Serialized as `{"kind": ..., "params": {...}}`. Tabulated values sit on
/// the uniform grid `x_i = 2π i / n`, `i = 0..n`, and are linearly
/// interpolated with periodic wrap-around.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "kebab-case")]
pub enum ProfileSpec {
    Constant { value: f64 },
    TrigPolynomial { offset: f64, terms: Vec<TrigTerm> },
    ExpCosSum { offset: f64, terms: Vec<ExpCosTerm> },
    Tabulated { values: Vec<f64> },
}

/// Reduce `x` into `[0, 2π)`.
pub fn wrap(x: f64) -> f64 {
    let r = x.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

impl ProfileSpec {
    pub fn zero() -> Self {
        ProfileSpec::Constant { value: 0.0 }
    }

    pub fn constant(value: f64) -> Self {
        ProfileSpec::Constant { value }
    }

    /// `offset + Σ a cos(k x)` from `(a, k)` pairs.
    pub fn cosines(offset: f64, terms: &[(f64, u32)]) -> Self {
        Self::trig(offset, terms.iter().map(|&(a, k)| (a, k, Phase::Cos)))
    }

    pub fn trig(offset: f64, terms: impl IntoIterator<Item = (f64, u32, Phase)>) -> Self {
        ProfileSpec::TrigPolynomial {
            offset,
            terms: terms
                .into_iter()
                .map(|(amplitude, frequency, phase)| TrigTerm {
                    amplitude,
                    frequency,
                    phase,
                })
                .collect(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = |v: f64, what: &str| {
            if v.is_finite() {
                Ok(())
            } else {
                config(format!("profile {what} is not finite"))
            }
        };
        match self {
            ProfileSpec::Constant { value } => finite(*value, "value"),
            ProfileSpec::TrigPolynomial { offset, terms } => {
                finite(*offset, "offset")?;
                terms
                    .iter()
                    .try_for_each(|t| finite(t.amplitude, "amplitude"))
            }
            ProfileSpec::ExpCosSum { offset, terms } => {
                finite(*offset, "offset")?;
                terms
                    .iter()
                    .try_for_each(|t| finite(t.amplitude, "amplitude"))
            }
            ProfileSpec::Tabulated { values } => {
                if values.is_empty() {
                    return config("tabulated profile has no values");
                }
                values.iter().try_for_each(|&v| finite(v, "table entry"))
            }
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let x = wrap(x);
        match self {
            ProfileSpec::Constant { value } => *value,
            ProfileSpec::TrigPolynomial { offset, terms } => {
                offset
                    + terms
                        .iter()
                        .map(|t| {
                            let arg = t.frequency as f64 * x;
                            t.amplitude
                                * match t.phase {
                                    Phase::Cos => arg.cos(),
                                    Phase::Sin => arg.sin(),
                                }
                        })
                        .sum::<f64>()
            }
            ProfileSpec::ExpCosSum { offset, terms } => {
                offset
                    + terms
                        .iter()
                        .map(|t| t.amplitude * (t.frequency as f64 * x).cos().exp())
                        .sum::<f64>()
            }
            ProfileSpec::Tabulated { values } => {
                let n = values.len();
                let pos = x / TAU * n as f64;
                let i = (pos.floor() as usize).min(n - 1);
                let w = pos - i as f64;
                values[i] * (1.0 - w) + values[(i + 1) % n] * w
            }
        }
    }

    /// Largest value over a uniform grid of `samples` points (exact for the
    /// tabulated kind when `samples` is a multiple of the table length).
    pub fn grid_max(&self, samples: usize) -> f64 {
        (0..samples)
            .map(|i| self.eval(TAU * i as f64 / samples as f64))
            .fold(f64::NEG_INFINITY, f64::max)
    }
}
