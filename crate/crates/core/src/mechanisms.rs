//! The randomizers: bitwise randomized response, LSHRR (hash then flip bits)
//! and LapLSH (add spherical Laplace noise then hash).
//!
//! Two kinds of randomness are kept apart. The hash family is shared and
//! fixed by its seed; the per-call `rng` is private to whoever perturbs.

use rand::Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::lsh::{hash, FamilySpec, ProjectionFamily};
use crate::vectors::{BitString, DenseVector, RealVector};

fn check_rr_epsilon(epsilon: f64) -> Result<()> {
    if epsilon.is_nan() || epsilon < 0.0 || epsilon.is_infinite() {
        return Err(invalid(format!(
            "randomized response needs finite epsilon >= 0, got {epsilon}"
        )));
    }
    Ok(())
}

fn check_laplace_epsilon(epsilon: f64) -> Result<()> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(invalid(format!(
            "laplace mechanism needs finite epsilon > 0, got {epsilon}"
        )));
    }
    Ok(())
}

/// Probability that randomized response flips a bit: `1 / (1 + e^ε)`.
pub fn flip_probability(epsilon: f64) -> f64 {
    // Written as a logistic so large ε underflows to 0 instead of NaN.
    1.0 / (1.0 + epsilon.exp())
}

/// ε-randomized response on one bit.
pub fn rr_bit<R: Rng + ?Sized>(epsilon: f64, bit: bool, rng: &mut R) -> Result<bool> {
    check_rr_epsilon(epsilon)?;
    let p = flip_probability(epsilon);
    Ok(if rng.random::<f64>() < p { !bit } else { bit })
}

/// Applies ε-randomized response to every bit independently.
pub fn bitwise_rr<R: Rng + ?Sized>(epsilon: f64, v: &BitString, rng: &mut R) -> Result<BitString> {
    check_rr_epsilon(epsilon)?;
    let p = flip_probability(epsilon);
    let mut out = v.clone();
    for i in 0..out.len() {
        if rng.random::<f64>() < p {
            out.flip(i);
        }
    }
    Ok(out)
}

/// Which randomizer produced an output, with its parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mechanism", rename_all = "snake_case")]
pub enum Mechanism {
    /// Vanilla LSH, no noise.
    Lsh,
    /// Hash, then per-bit randomized response with budget `epsilon`.
    Lshrr { epsilon: f64 },
    /// Spherical Laplace noise with budget `epsilon`, then hash.
    Laplsh { epsilon: f64 },
    /// Uniformly random κ-bit string, independent of the input.
    Uniform,
}

impl Mechanism {
    pub fn name(&self) -> &'static str {
        match self {
            Mechanism::Lsh => "lsh",
            Mechanism::Lshrr { .. } => "lshrr",
            Mechanism::Laplsh { .. } => "laplsh",
            Mechanism::Uniform => "uniform",
        }
    }

    pub fn epsilon(&self) -> Option<f64> {
        match self {
            Mechanism::Lshrr { epsilon } | Mechanism::Laplsh { epsilon } => Some(*epsilon),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Mechanism::Lshrr { epsilon } => check_rr_epsilon(*epsilon),
            Mechanism::Laplsh { epsilon } => check_laplace_epsilon(*epsilon),
            _ => Ok(()),
        }
    }

    /// Runs the mechanism on `x`.
    pub fn apply<R: Rng + ?Sized>(
        &self,
        fam: &ProjectionFamily,
        x: &impl RealVector,
        rng: &mut R,
    ) -> Result<MechanismOutput> {
        match *self {
            Mechanism::Lsh => Ok(MechanismOutput {
                bits: hash(fam, x)?,
                provenance: Provenance::new(*self, fam),
            }),
            Mechanism::Lshrr { epsilon } => lshrr(fam, epsilon, x, rng),
            Mechanism::Laplsh { epsilon } => laplsh(fam, epsilon, x, rng),
            Mechanism::Uniform => {
                let mut bits = BitString::zeros(fam.kappa())?;
                for i in 0..bits.len() {
                    bits.set(i, rng.random::<bool>());
                }
                Ok(MechanismOutput {
                    bits,
                    provenance: Provenance::new(*self, fam),
                })
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    #[serde(flatten)]
    pub mechanism: Mechanism,
    pub family: FamilySpec,
}

impl Provenance {
    fn new(mechanism: Mechanism, fam: &ProjectionFamily) -> Self {
        Self {
            mechanism,
            family: fam.spec(),
        }
    }
}

/// A published κ-bit value and how it was produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MechanismOutput {
    pub bits: BitString,
    pub provenance: Provenance,
}

/// LSHRR: `bitwise_rr(ε, hash(fam, x))`.
pub fn lshrr<R: Rng + ?Sized>(
    fam: &ProjectionFamily,
    epsilon: f64,
    x: &impl RealVector,
    rng: &mut R,
) -> Result<MechanismOutput> {
    check_rr_epsilon(epsilon)?;
    let h = hash(fam, x)?;
    Ok(MechanismOutput {
        bits: bitwise_rr(epsilon, &h, rng)?,
        provenance: Provenance::new(Mechanism::Lshrr { epsilon }, fam),
    })
}

/// Noise vector with density ∝ exp(−ε‖z‖₂) in ℝⁿ: a uniform direction on the
/// sphere scaled by a Gamma(n, 1/ε) radius.
pub fn laplace_noise<R: Rng + ?Sized>(epsilon: f64, n: usize, rng: &mut R) -> Result<Vec<f64>> {
    check_laplace_epsilon(epsilon)?;
    if n == 0 {
        return Err(invalid("noise dimension must be >= 1"));
    }
    let radius_dist = Gamma::new(n as f64, 1.0 / epsilon).map_err(|e| invalid(e.to_string()))?;
    let mut dir: Vec<f64>;
    let norm = loop {
        dir = (0..n).map(|_| StandardNormal.sample(rng)).collect();
        let norm = dir.iter().map(|v: &f64| v * v).sum::<f64>().sqrt();
        if norm > 0.0 {
            break norm;
        }
    };
    let radius = radius_dist.sample(rng);
    Ok(dir.into_iter().map(|v| v / norm * radius).collect())
}

/// Multivariate Laplace mechanism w.r.t. Euclidean distance: `x + noise`.
pub fn multivariate_laplace<R: Rng + ?Sized>(epsilon: f64, x: &impl RealVector, rng: &mut R) -> Result<DenseVector> {
    let mut values = match x.view() {
        crate::vectors::VecRef::Dense(d) => d.to_vec(),
        crate::vectors::VecRef::Sparse { dim, indices, values } => {
            let mut out = vec![0.0; dim];
            for (&i, &v) in indices.iter().zip(values) {
                out[i] = v;
            }
            out
        }
    };
    let noise = laplace_noise(epsilon, values.len(), rng)?;
    for (v, z) in values.iter_mut().zip(noise) {
        *v += z;
    }
    DenseVector::new(values)
}

/// LapLSH: `hash(fam, multivariate_laplace(ε, x))`.
///
/// The input is not normalized here; noise is absolute, so the output
/// distribution depends on the scale of `x`.
pub fn laplsh<R: Rng + ?Sized>(
    fam: &ProjectionFamily,
    epsilon: f64,
    x: &impl RealVector,
    rng: &mut R,
) -> Result<MechanismOutput> {
    crate::error::check_dim(fam.n(), x.dimension())?;
    let mut attempts = 0;
    let bits = loop {
        let noisy = multivariate_laplace(epsilon, x, rng)?;
        match hash(fam, &noisy) {
            Err(Error::ZeroVector) if attempts == 0 => attempts += 1,
            other => break other?,
        }
    };
    Ok(MechanismOutput {
        bits,
        provenance: Provenance::new(Mechanism::Laplsh { epsilon }, fam),
    })
}
