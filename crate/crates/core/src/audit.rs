//! Analytic and Monte Carlo checks of the hashing and privacy claims.
//!
//! Every statistical verdict uses a 3-sigma threshold at a sample size that
//! is part of the report, and every Monte Carlo loop derives trial `t`'s
//! randomness from substream `t` of the caller's seed, so verdicts are
//! reproducible and independent of thread count.

use std::f64::consts::{PI, TAU};

use rand::RngCore;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF};

use crate::error::{check_dim, invalid, Error, Result};
use crate::lsh::{hash, sample_family, ProjectionFamily};
use crate::mechanisms::{bitwise_rr, flip_probability};
use crate::par;
use crate::privacy::{pxdp_budget_simple, solve_alpha, tight_delta, PrivacyParams};
use crate::rng;
use crate::vectors::{angular_distance, hamming_distance, BitString, DenseVector, RealVector};

/// Tolerance for merging boundary angles and checking probability sums.
const ANGLE_TOL: f64 = 1e-12;

/// A deterministic 1-bit hash realized by all hyperplane normals on one or
/// more arcs of the unit circle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeterministicHash {
    /// Output bit for each input, in input order.
    pub outputs: Vec<bool>,
    pub probability: f64,
    /// Arcs `[start, end)` in radians that realize this function.
    pub arcs: Vec<(f64, f64)>,
}

/// Channel of a single random-projection bit over a finite set of 2-D inputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelMatrix {
    pub inputs: Vec<[f64; 2]>,
    pub functions: Vec<DeterministicHash>,
    /// `P(output = 1 | input)`, in input order.
    pub channel: Vec<f64>,
}

impl ChannelMatrix {
    pub fn total_probability(&self) -> f64 {
        self.functions.iter().map(|f| f.probability).sum()
    }
}

fn bit(r: [f64; 2], x: [f64; 2]) -> bool {
    r[0] * x[0] + r[1] * x[1] >= 0.0
}

/// Exact channel of a random hyperplane over 2-D `inputs`.
///
/// A Gaussian normal has a uniformly distributed direction, so the circle of
/// directions is cut at the angles orthogonal to each input; on each arc the
/// hash is one fixed function, with probability arc length / 2π. Arcs that
/// realize the same function are merged.
pub fn enumerate_2d_channel(inputs: &[DenseVector]) -> Result<ChannelMatrix> {
    if inputs.is_empty() {
        return Err(invalid("need at least one input"));
    }
    let mut pts = Vec::with_capacity(inputs.len());
    for x in inputs {
        check_dim(2, x.dim())?;
        if x.norm() == 0.0 {
            return Err(Error::ZeroVector);
        }
        pts.push([x.values()[0], x.values()[1]]);
    }
    let mut cuts: Vec<f64> = pts
        .iter()
        .flat_map(|p| {
            let a = p[1].atan2(p[0]);
            [(a + PI / 2.0).rem_euclid(TAU), (a - PI / 2.0).rem_euclid(TAU)]
        })
        .collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup_by(|a, b| (*a - *b).abs() < ANGLE_TOL);
    if cuts.len() > 1 && (cuts[0] + TAU - cuts[cuts.len() - 1]).abs() < ANGLE_TOL {
        cuts.pop();
    }

    let mut functions: Vec<DeterministicHash> = Vec::new();
    for (i, &start) in cuts.iter().enumerate() {
        let end = if i + 1 < cuts.len() { cuts[i + 1] } else { cuts[0] + TAU };
        let mid = 0.5 * (start + end);
        let r = [mid.cos(), mid.sin()];
        let outputs: Vec<bool> = pts.iter().map(|&p| bit(r, p)).collect();
        let probability = (end - start) / TAU;
        match functions.iter_mut().find(|f| f.outputs == outputs) {
            Some(f) => {
                f.probability += probability;
                f.arcs.push((start, end));
            }
            None => functions.push(DeterministicHash {
                outputs,
                probability,
                arcs: vec![(start, end)],
            }),
        }
    }
    let channel = (0..pts.len())
        .map(|j| functions.iter().filter(|f| f.outputs[j]).map(|f| f.probability).sum())
        .collect();
    let cm = ChannelMatrix {
        inputs: pts,
        functions,
        channel,
    };
    debug_assert!((cm.total_probability() - 1.0).abs() < 1e-9);
    Ok(cm)
}

/// Empirical frequency of each function of `cm` over `samples` Gaussian normals.
pub fn monte_carlo_channel(cm: &ChannelMatrix, samples: usize, seed: u64) -> Vec<f64> {
    let hits = par::map_indices(samples, |t| {
        let mut r = rng::substream(seed, t as u64);
        let normal = [rng::standard_normal(&mut r), rng::standard_normal(&mut r)];
        let outputs: Vec<bool> = cm.inputs.iter().map(|&p| bit(normal, p)).collect();
        cm.functions.iter().position(|f| f.outputs == outputs)
    });
    let mut counts = vec![0usize; cm.functions.len()];
    for h in hits.into_iter().flatten() {
        counts[h] += 1;
    }
    counts.into_iter().map(|c| c as f64 / samples as f64).collect()
}

/// What publishing the hyperplane reveals for one deterministic function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FunctionLeakage {
    pub outputs: Vec<bool>,
    pub probability: f64,
    /// Inputs grouped by output bit (indices into the channel's inputs).
    pub classes: Vec<Vec<usize>>,
    /// Inputs that are alone in their class and hence identified exactly.
    pub singletons: Vec<usize>,
    /// Min-entropy leakage under a uniform prior: log2(number of classes).
    pub leaked_bits: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LeakageReport {
    pub functions: Vec<FunctionLeakage>,
    /// Probability that the realized function isolates some input.
    pub prob_singleton: f64,
    /// Expected min-entropy leakage in bits.
    pub expected_leaked_bits: f64,
    /// With one input every function trivially isolates it.
    pub degenerate: bool,
}

/// Partitions the inputs by each function's output. Once the hyperplane is
/// public the adversary learns the class of the secret.
pub fn hyperplane_release_leakage(cm: &ChannelMatrix) -> LeakageReport {
    let functions: Vec<FunctionLeakage> = cm
        .functions
        .iter()
        .map(|f| {
            let classes: Vec<Vec<usize>> = [false, true]
                .iter()
                .map(|&b| (0..f.outputs.len()).filter(|&j| f.outputs[j] == b).collect::<Vec<_>>())
                .filter(|c| !c.is_empty())
                .collect();
            let singletons = classes.iter().filter(|c| c.len() == 1).map(|c| c[0]).collect();
            FunctionLeakage {
                outputs: f.outputs.clone(),
                probability: f.probability,
                leaked_bits: (classes.len() as f64).log2(),
                classes,
                singletons,
            }
        })
        .collect();
    let prob_singleton = functions
        .iter()
        .filter(|f| !f.singletons.is_empty())
        .map(|f| f.probability)
        .sum();
    let expected_leaked_bits = functions.iter().map(|f| f.probability * f.leaked_bits).sum();
    LeakageReport {
        functions,
        prob_singleton,
        expected_leaked_bits,
        degenerate: cm.inputs.len() == 1,
    }
}

fn random_normal_row(n: usize, r: &mut impl RngCore) -> Vec<f64> {
    (0..n).map(|_| rng::standard_normal(r)).collect()
}

fn family_seed(seed: u64, trial: usize) -> u64 {
    rng::substream(seed, trial as u64).next_u64()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CollisionReport {
    pub trials: usize,
    pub target: f64,
    pub rate: f64,
    pub std_err: f64,
    /// `target ± 3·√(target(1−target)/trials)`.
    pub interval: (f64, f64),
    pub pass: bool,
}

/// Fraction of independent 1-bit hashes on which `x` and `x_other` differ,
/// compared with their angular distance.
pub fn estimate_collision_rate(
    x: &impl RealVector,
    x_other: &impl RealVector,
    trials: usize,
    seed: u64,
) -> Result<CollisionReport> {
    if trials < 100 {
        return Err(invalid("collision estimate needs >= 100 trials"));
    }
    let target = angular_distance(x, x_other)?;
    let (va, vb) = (x.view(), x_other.view());
    let n = va.dim();
    let diffs = par::map_indices(trials, |t| {
        let mut r = rng::substream(seed, t as u64);
        let row = random_normal_row(n, &mut r);
        (va.dot_dense(&row) >= 0.0) != (vb.dot_dense(&row) >= 0.0)
    });
    let m = trials as f64;
    let rate = diffs.iter().filter(|d| **d).count() as f64 / m;
    let half = 3.0 * (target * (1.0 - target) / m).sqrt();
    let interval = (target - half, target + half);
    Ok(CollisionReport {
        trials,
        target,
        rate,
        std_err: (rate * (1.0 - rate) / m).sqrt(),
        interval,
        pass: rate >= interval.0 - 1e-12 && rate <= interval.1 + 1e-12,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HammingLawReport {
    pub kappa: usize,
    pub families: usize,
    pub d_theta: f64,
    pub mean: f64,
    pub expected_mean: f64,
    pub mean_band: (f64, f64),
    pub variance: f64,
    pub expected_variance: f64,
    /// `σ²·χ²_{F−1}(q)/(F−1)` at the two-sided 3-sigma quantiles.
    pub variance_band: (f64, f64),
    pub pass: bool,
}

/// Hamming distances between hashes of `x` and `x_other` over independently
/// drawn κ-bit families, against Binomial(κ, d_θ).
pub fn hamming_law_check(
    x: &impl RealVector,
    x_other: &impl RealVector,
    kappa: usize,
    families: usize,
    seed: u64,
) -> Result<HammingLawReport> {
    if families < 500 {
        return Err(invalid("hamming law check needs >= 500 families"));
    }
    let d = angular_distance(x, x_other)?;
    let n = x.dimension();
    let dists = par::map_indices(families, |f| -> Result<f64> {
        let fam = sample_family(n, kappa, family_seed(seed, f))?;
        Ok(hamming_distance(&hash(&fam, x)?, &hash(&fam, x_other)?)? as f64)
    })
    .into_iter()
    .collect::<Result<Vec<f64>>>()?;
    let fcount = families as f64;
    let mean = dists.iter().sum::<f64>() / fcount;
    let variance = dists.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (fcount - 1.0);
    let k = kappa as f64;
    let expected_mean = k * d;
    let expected_variance = k * d * (1.0 - d);
    let half = 3.0 * (expected_variance / fcount).sqrt();
    let mean_band = (expected_mean - half, expected_mean + half);
    let variance_band = chi_square_variance_band(expected_variance, families);
    let tol = 1e-12;
    let pass = mean >= mean_band.0 - tol
        && mean <= mean_band.1 + tol
        && variance >= variance_band.0 - tol
        && variance <= variance_band.1 + tol;
    Ok(HammingLawReport {
        kappa,
        families,
        d_theta: d,
        mean,
        expected_mean,
        mean_band,
        variance,
        expected_variance,
        variance_band,
        pass,
    })
}

/// Two-sided 3-sigma acceptance band for a sample variance of `samples`
/// draws with true variance `sigma2`.
pub fn chi_square_variance_band(sigma2: f64, samples: usize) -> (f64, f64) {
    // Two-sided tail mass of a 3-sigma normal band.
    const TAIL: f64 = 0.001_349_898_031_630_094_5;
    if sigma2 == 0.0 {
        return (0.0, 0.0);
    }
    let dof = (samples - 1) as f64;
    let chi = ChiSquared::new(dof).expect("dof > 0");
    (
        sigma2 * chi.inverse_cdf(TAIL) / dof,
        sigma2 * chi.inverse_cdf(1.0 - TAIL) / dof,
    )
}

/// One realized privacy loss of LSHRR: output `y = Q_H(x)` and
/// `ln(P[y | x] / P[y | x'])` under the realized family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LossSample {
    pub family_seed: u64,
    pub output: BitString,
    pub loss: f64,
}

/// Samples `y` from LSHRR on `x` and returns its exact log-likelihood ratio.
/// Each bit contributes `±ε` where `H(x)` and `H(x')` disagree.
pub fn sample_loss<R: rand::Rng + ?Sized>(
    fam: &ProjectionFamily,
    epsilon: f64,
    x: &impl RealVector,
    x_other: &impl RealVector,
    rng: &mut R,
) -> Result<LossSample> {
    let hx = hash(fam, x)?;
    let hy = hash(fam, x_other)?;
    let y = bitwise_rr(epsilon, &hx, rng)?;
    let loss = epsilon * (hamming_distance(&y, &hy)? as f64 - hamming_distance(&y, &hx)? as f64);
    Ok(LossSample {
        family_seed: fam.seed(),
        output: y,
        loss,
    })
}

/// Tail check of one bound: empirical `Pr[loss > ξ]` against its δ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailCheck {
    pub xi: f64,
    pub delta: f64,
    pub alpha: Option<f64>,
    pub empirical_tail: f64,
    /// `δ + 3·√(δ/trials)`.
    pub threshold: f64,
    pub pass: bool,
}

impl TailCheck {
    fn new(xi: f64, delta: f64, alpha: Option<f64>, losses: &[f64]) -> Self {
        let trials = losses.len() as f64;
        let empirical_tail = losses.iter().filter(|&&l| l > xi).count() as f64 / trials;
        let threshold = delta + 3.0 * (delta / trials).sqrt();
        Self {
            xi,
            delta,
            alpha,
            empirical_tail,
            threshold,
            pass: empirical_tail <= threshold,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificationReport {
    pub epsilon: f64,
    pub kappa: usize,
    pub d_theta: f64,
    pub delta_target: f64,
    pub trials: usize,
    pub simple: TailCheck,
    /// `None` when no slack α reaches the target δ.
    pub tight: Option<TailCheck>,
    pub pass: bool,
}

/// Monte Carlo certification of the probabilistic XDP bounds of LSHRR.
///
/// For a realized family the worst-case loss over outputs is exactly
/// `ε·hamming(H(x), H(x'))`, so only the family is sampled.
pub fn certify_pxdp(
    epsilon: f64,
    kappa: usize,
    x: &impl RealVector,
    x_other: &impl RealVector,
    delta_target: f64,
    trials: usize,
    seed: u64,
) -> Result<CertificationReport> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(invalid(format!("epsilon must be finite and > 0, got {epsilon}")));
    }
    if trials < 10_000 {
        return Err(invalid("pxdp certification needs >= 10000 trials"));
    }
    if !(delta_target > 0.0 && delta_target < 1.0) {
        return Err(invalid(format!("delta must be in (0, 1), got {delta_target}")));
    }
    let d = angular_distance(x, x_other)?;
    let n = x.dimension();
    let losses = par::map_indices(trials, |t| -> Result<f64> {
        let fam = sample_family(n, kappa, family_seed(seed, t))?;
        Ok(epsilon * hamming_distance(&hash(&fam, x)?, &hash(&fam, x_other)?)? as f64)
    })
    .into_iter()
    .collect::<Result<Vec<f64>>>()?;

    let params = PrivacyParams::new(epsilon, kappa, delta_target, d)?;
    let simple_report = pxdp_budget_simple(&params)?;
    let simple = TailCheck::new(simple_report.xi, delta_target, None, &losses);

    let tight = match solve_alpha(kappa, d, delta_target) {
        Ok(alpha) => {
            let delta_alpha = tight_delta(kappa, d, alpha)?;
            let xi = epsilon * kappa as f64 * (d + alpha);
            Some(TailCheck::new(xi, delta_alpha, Some(alpha), &losses))
        }
        Err(Error::Infeasible(_)) => None,
        Err(e) => return Err(e),
    };
    let pass = simple.pass && tight.as_ref().is_none_or(|t| t.pass);
    Ok(CertificationReport {
        epsilon,
        kappa,
        d_theta: d,
        delta_target,
        trials,
        simple,
        tight,
        pass,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorBoundReport {
    pub epsilon: f64,
    pub kappa: usize,
    pub trials: usize,
    pub mean_error: f64,
    pub std_err: f64,
    /// `2κ / (1 + e^ε)`.
    pub bound: f64,
    pub pass: bool,
}

/// Mean absolute change of the Hamming distance between two inputs caused
/// by randomized response, against `2κ/(1+e^ε)`.
pub fn error_bound_check(
    epsilon: f64,
    kappa: usize,
    x: &impl RealVector,
    x_other: &impl RealVector,
    trials: usize,
    seed: u64,
) -> Result<ErrorBoundReport> {
    if trials < 1000 {
        return Err(invalid("error bound check needs >= 1000 trials"));
    }
    if epsilon.is_nan() || epsilon < 0.0 {
        return Err(invalid(format!("epsilon must be >= 0, got {epsilon}")));
    }
    let n = x.dimension();
    check_dim(n, x_other.dimension())?;
    let errors = par::map_indices(trials, |t| -> Result<f64> {
        let fam = sample_family(n, kappa, family_seed(seed, t))?;
        let (hx, hy) = (hash(&fam, x)?, hash(&fam, x_other)?);
        let mut r = rng::substream(seed ^ 0x5151_5151_5151_5151, t as u64);
        let (qx, qy) = (bitwise_rr(epsilon, &hx, &mut r)?, bitwise_rr(epsilon, &hy, &mut r)?);
        let before = hamming_distance(&hx, &hy)? as f64;
        let after = hamming_distance(&qx, &qy)? as f64;
        Ok((after - before).abs())
    })
    .into_iter()
    .collect::<Result<Vec<f64>>>()?;
    let (mean, std_err) = crate::nns::mean_and_std_err(errors.into_iter());
    let bound = 2.0 * kappa as f64 * flip_probability(epsilon);
    Ok(ErrorBoundReport {
        epsilon,
        kappa,
        trials,
        mean_error: mean,
        std_err,
        bound,
        pass: mean <= bound + 3.0 * std_err,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dv(v: &[f64]) -> DenseVector {
        DenseVector::new(v.to_vec()).unwrap()
    }

    fn toy() -> ChannelMatrix {
        enumerate_2d_channel(&[dv(&[0.0, 1.0]), dv(&[1.0, 0.0]), dv(&[1.0, 1.0])]).unwrap()
    }

    #[test]
    fn toy_channel_probabilities() {
        let cm = toy();
        assert_eq!(cm.functions.len(), 6);
        let mut probs: Vec<f64> = cm.functions.iter().map(|f| f.probability).collect();
        probs.sort_by(f64::total_cmp);
        let want = [0.125, 0.125, 0.125, 0.125, 0.25, 0.25];
        for (p, w) in probs.iter().zip(want) {
            assert!((p - w).abs() < 1e-12);
        }
        for p in &cm.channel {
            assert!((p - 0.5).abs() < 1e-12);
        }
        // The two constant functions carry the quarter-circle arcs.
        for f in cm.functions.iter().filter(|f| f.probability > 0.2) {
            assert!(f.outputs.iter().all(|&b| b == f.outputs[0]));
        }
    }

    #[test]
    fn worked_example_function_is_present() {
        let cm = toy();
        // r = (1, -1/2): (0,1) -> 0, (1,0) -> 1, (1,1) -> 1
        let f = cm.functions.iter().find(|f| f.outputs == [false, true, true]).unwrap();
        assert!((f.probability - 0.125).abs() < 1e-12);
    }

    #[test]
    fn single_input_channel() {
        let cm = enumerate_2d_channel(&[dv(&[1.0, 0.0])]).unwrap();
        assert_eq!(cm.functions.len(), 2);
        for f in &cm.functions {
            assert!((f.probability - 0.5).abs() < 1e-12);
        }
        let leak = hyperplane_release_leakage(&cm);
        assert!(leak.degenerate);
        assert!((leak.prob_singleton - 1.0).abs() < 1e-12);
    }

    #[test]
    fn channel_errors() {
        assert_eq!(enumerate_2d_channel(&[dv(&[0.0, 0.0])]), Err(Error::ZeroVector));
        assert!(matches!(
            enumerate_2d_channel(&[dv(&[1.0, 0.0, 0.0])]),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(enumerate_2d_channel(&[]).is_err());
    }

    #[test]
    fn parallel_inputs_share_boundaries() {
        let cm = enumerate_2d_channel(&[dv(&[1.0, 0.0]), dv(&[3.0, 0.0]), dv(&[-1.0, 0.0])]).unwrap();
        assert_eq!(cm.functions.len(), 2);
        assert!((cm.total_probability() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn toy_leakage() {
        let leak = hyperplane_release_leakage(&toy());
        assert!((leak.prob_singleton - 0.5).abs() < 1e-12);
        assert!((leak.expected_leaked_bits - 0.5).abs() < 1e-12);
        for f in &leak.functions {
            if f.probability > 0.2 {
                assert_eq!(f.classes, vec![vec![0, 1, 2]]);
                assert!(f.singletons.is_empty());
                assert_eq!(f.leaked_bits, 0.0);
            } else {
                assert_eq!(f.singletons.len(), 1);
                assert_eq!(f.leaked_bits, 1.0);
            }
        }
        // (0,1) is isolated by two functions, (1,0) by the other two.
        let isolated: Vec<usize> = leak.functions.iter().flat_map(|f| f.singletons.clone()).collect();
        assert_eq!(isolated.iter().filter(|&&i| i == 0).count(), 2);
        assert_eq!(isolated.iter().filter(|&&i| i == 1).count(), 2);
    }

    #[test]
    fn channel_agrees_with_sampling() {
        let cm = toy();
        let m = 100_000;
        let freq = monte_carlo_channel(&cm, m, 17);
        assert!((freq.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        for (f, p) in cm.functions.iter().zip(freq) {
            let sd = (f.probability * (1.0 - f.probability) / m as f64).sqrt();
            assert!((p - f.probability).abs() <= 3.0 * sd, "{p} vs {}", f.probability);
        }
    }

    #[test]
    fn collision_examples() {
        let x = dv(&[1.0, 0.0]);
        let r = estimate_collision_rate(&x, &x, 1000, 1).unwrap();
        assert_eq!(r.rate, 0.0);
        assert!(r.pass);
        let r = estimate_collision_rate(&x, &dv(&[0.0, 1.0]), 10_000, 2).unwrap();
        assert!((r.rate - 0.5).abs() <= 0.015 && r.pass);
        let r = estimate_collision_rate(&x, &dv(&[1.0, 1.0]), 10_000, 3).unwrap();
        assert!((r.target - 0.25).abs() < 1e-12);
        assert!((r.rate - 0.25).abs() <= 0.013 && r.pass);
        assert!(estimate_collision_rate(&x, &x, 99, 1).is_err());
    }

    #[test]
    fn collision_is_scale_invariant() {
        let (x, y) = (dv(&[1.0, 2.0, -1.0]), dv(&[0.5, -1.0, 2.0]));
        let a = estimate_collision_rate(&x, &y, 2000, 5).unwrap();
        let b = estimate_collision_rate(&x.scale(7.0).unwrap(), &y.scale(0.01).unwrap(), 2000, 5).unwrap();
        assert_eq!(a.rate, b.rate);
    }

    #[test]
    fn hamming_law_examples() {
        let x = dv(&[1.0, 0.0]);
        let same = hamming_law_check(&x, &x, 20, 500, 1).unwrap();
        assert_eq!(same.mean, 0.0);
        assert_eq!(same.variance, 0.0);
        assert!(same.pass);

        let r = hamming_law_check(&x, &dv(&[0.0, 1.0]), 20, 1000, 2).unwrap();
        assert!((r.mean - 10.0).abs() <= 0.43, "{}", r.mean);
        assert!(r.pass, "{r:?}");

        let r = hamming_law_check(&x, &dv(&[1.0, 1.0]), 40, 1000, 3).unwrap();
        assert!((r.mean - 10.0).abs() <= 0.42, "{}", r.mean);
        assert!((r.expected_variance - 7.5).abs() < 1e-9);
        assert!(r.pass, "{r:?}");
    }

    #[test]
    fn variance_band_brackets_sigma() {
        let (lo, hi) = chi_square_variance_band(3.75, 1000);
        assert!(lo < 3.75 && 3.75 < hi);
        // Normal approximation: σ²(1 ± 3√(2/(F−1))).
        let half = 3.0 * (2.0f64 / 999.0).sqrt() * 3.75;
        assert!((lo - (3.75 - half)).abs() < 0.05 && (hi - (3.75 + half)).abs() < 0.05);
    }

    #[test]
    fn loss_samples_respect_pseudometric() {
        let fam = sample_family(3, 12, 4).unwrap();
        let (x, y) = (dv(&[1.0, 0.2, 0.0]), dv(&[0.0, 1.0, 1.0]));
        let cap = 0.8 * hamming_distance(&hash(&fam, &x).unwrap(), &hash(&fam, &y).unwrap()).unwrap() as f64;
        let mut r = rng::substream(9, 0);
        let mut hit_cap = false;
        for _ in 0..2000 {
            let s = sample_loss(&fam, 0.8, &x, &y, &mut r).unwrap();
            assert!(s.loss <= cap + 1e-12 && s.loss >= -cap - 1e-12);
            hit_cap |= (s.loss - cap).abs() < 1e-12;
        }
        assert!(hit_cap);
    }

    #[test]
    fn certification_examples() {
        let x = dv(&[1.0, 0.0]);
        let same = certify_pxdp(1.0, 20, &x, &x, 0.05, 10_000, 1).unwrap();
        assert_eq!(same.simple.empirical_tail, 0.0);
        assert!(same.pass);

        let y = dv(&[1.0, 1.0]);
        let r = certify_pxdp(1.0, 20, &x, &y, 0.05, 10_000, 2).unwrap();
        assert!((r.d_theta - 0.25).abs() < 1e-12);
        let tight = r.tight.as_ref().unwrap();
        assert!((tight.delta - 0.05).abs() < 1e-9);
        assert!(tight.pass && r.simple.pass, "{r:?}");
        assert!(certify_pxdp(1.0, 20, &x, &y, 0.05, 100, 2).is_err());
    }

    #[test]
    fn error_bound_examples() {
        let (x, y) = (dv(&[1.0, 0.0, 0.3]), dv(&[0.2, 1.0, -0.5]));
        let r = error_bound_check(50.0, 20, &x, &y, 1000, 1).unwrap();
        assert_eq!(r.mean_error, 0.0);
        assert!(r.bound < 1e-18 && r.pass);
        let r = error_bound_check(1.0, 20, &x, &y, 1000, 2).unwrap();
        assert!((r.bound - 40.0 / (1.0 + 1f64.exp())).abs() < 1e-12);
        assert!(r.mean_error < r.bound && r.pass);
        let r = error_bound_check(0.0, 10, &x, &y, 1000, 3).unwrap();
        assert_eq!(r.bound, 10.0);
        assert!(r.mean_error <= 10.0 && r.pass);
    }
}
