//! Sign recovery for the intensity function from per-sample deviation
//! patterns.

use serde::{Deserialize, Serialize};

use crate::error::{config, Error, Result};

/// Anchors the global sign: the consensus at `node` is made positive (or
/// negative when `positive` is false).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SignPrior {
    pub node: usize,
    pub positive: bool,
}

impl Default for SignPrior {
    fn default() -> Self {
        SignPrior {
            node: 0,
            positive: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignReport {
    /// Consensus sign per node: -1, 0 or 1.
    pub consensus: Vec<i8>,
    /// Correlation of each sample's sign pattern with the consensus.
    pub correlation: Vec<f64>,
    /// Samples correlated with the consensus above the threshold.
    pub aligned: usize,
    /// Samples anti-correlated below minus the threshold.
    pub opposed: usize,
    pub other: usize,
    /// Index of the sample used to seed the consensus.
    pub reference: usize,
}

impl SignReport {
    /// Fraction of samples in the two dominant clusters.
    pub fn dominant_fraction(&self) -> f64 {
        (self.aligned + self.opposed) as f64 / self.correlation.len() as f64
    }
}

fn sign(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

fn correlation(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        dot / (na * nb)
    }
}

/// Cluster the sign patterns of `deviations` (one row per sample, one column
/// per node).
///
/// The sample with the largest deviation norm seeds a running consensus;
/// every other sample, in index order, is flipped if that increases its
/// agreement with the consensus and then added to it. The consensus is
/// oriented by `prior`, and each sample is classified by its correlation
/// with the consensus against `threshold`.
pub fn sign_recovery(
    deviations: &[Vec<f64>],
    prior: SignPrior,
    threshold: f64,
) -> Result<SignReport> {
    let Some(first) = deviations.first() else {
        return config("sign recovery needs at least one sample");
    };
    let nodes = first.len();
    if deviations.iter().any(|d| d.len() != nodes) {
        return Err(Error::LengthMismatch {
            expected: nodes,
            found: 0,
        });
    }
    if prior.node >= nodes {
        return config(format!("anchor node {} out of range", prior.node));
    }
    let patterns: Vec<Vec<f64>> = deviations
        .iter()
        .map(|d| d.iter().map(|&v| sign(v)).collect())
        .collect();
    let norm2 = |d: &Vec<f64>| d.iter().map(|v| v * v).sum::<f64>();
    let mut reference = 0;
    for (m, d) in deviations.iter().enumerate() {
        if norm2(d) > norm2(&deviations[reference]) {
            reference = m;
        }
    }
    let mut running = patterns[reference].clone();
    for (m, p) in patterns.iter().enumerate() {
        if m == reference {
            continue;
        }
        let agree: f64 = p.iter().zip(&running).map(|(a, b)| a * b).sum();
        let flip = if agree < 0.0 { -1.0 } else { 1.0 };
        for (r, v) in running.iter_mut().zip(p) {
            *r += flip * v;
        }
    }
    let mut consensus: Vec<f64> = running.iter().map(|&v| sign(v)).collect();
    if consensus.iter().all(|&v| v == 0.0) {
        return Err(Error::Ambiguity("consensus vanishes at every node".into()));
    }
    let anchor = consensus[prior.node];
    if anchor == 0.0 {
        return Err(Error::Ambiguity(format!(
            "consensus vanishes at anchor node {}",
            prior.node
        )));
    }
    if (anchor > 0.0) != prior.positive {
        consensus.iter_mut().for_each(|v| *v = -*v);
    }
    let corr: Vec<f64> = patterns
        .iter()
        .map(|p| correlation(p, &consensus))
        .collect();
    let aligned = corr.iter().filter(|&&c| c >= threshold).count();
    let opposed = corr.iter().filter(|&&c| c <= -threshold).count();
    Ok(SignReport {
        consensus: consensus.iter().map(|&v| v as i8).collect(),
        other: corr.len() - aligned - opposed,
        correlation: corr,
        aligned,
        opposed,
        reference,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pattern(amp: f64, n: usize) -> Vec<f64> {
        (0..n)
            .map(|i| amp * (std::f64::consts::TAU * i as f64 / n as f64).cos())
            .collect()
    }

    #[test]
    fn two_opposite_clusters() {
        let mut devs: Vec<Vec<f64>> = (0..10)
            .map(|m| pattern(if m % 2 == 0 { 1.0 } else { -0.5 }, 20))
            .collect();
        devs.push(
            (0..20)
                .map(|i| if i % 2 == 0 { 0.1 } else { -0.1 })
                .collect(),
        );
        let r = sign_recovery(&devs, SignPrior::default(), 0.5).unwrap();
        assert_eq!(r.consensus[0], 1);
        assert_eq!(r.consensus[10], -1);
        assert_eq!(r.aligned, 5);
        assert_eq!(r.opposed, 5);
        assert_eq!(r.other, 1);
    }

    #[test]
    fn prior_sets_orientation() {
        let devs = vec![pattern(1.0, 12), pattern(2.0, 12)];
        let r = sign_recovery(
            &devs,
            SignPrior {
                node: 0,
                positive: false,
            },
            0.5,
        )
        .unwrap();
        assert_eq!(r.consensus[0], -1);
        assert_eq!(r.opposed, 2);
    }

    #[test]
    fn degenerate_inputs() {
        assert!(sign_recovery(&[], SignPrior::default(), 0.5).is_err());
        assert!(matches!(
            sign_recovery(&[vec![0.0; 4]], SignPrior::default(), 0.5),
            Err(Error::Ambiguity(_))
        ));
    }
}
