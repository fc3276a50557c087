//! Privacy accounting for LSHRR and LapLSH.
//!
//! All bounds are closed forms in `(ε, κ, d, δ)` where `d` is the angular
//! distance between the two inputs being compared:
//!
//! | bound            | total budget ξ                         | failure prob.             |
//! |------------------|----------------------------------------|---------------------------|
//! | worst-case DP    | `κε`                                   | 0                         |
//! | pseudometric     | `ε · d_H(H(x), H(x'))` for a fixed H   | 0                         |
//! | PXDP (Hoeffding) | `εκd + ε√(−ln δ / 2)·√κ`               | δ                         |
//! | PXDP (tight)     | `εκ(d + α)`                            | `exp(−κ·KL(d+α ‖ d))`     |
//! | LapLSH           | `ε · d_euc(x, x')`                     | 0                         |
//!
//! The tight bound is inverted for α by bisection ([`solve_alpha`]), which in
//! turn lets a target ξ be converted into a per-bit ε and into the equivalent
//! local-DP budget `κε`.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::lsh::{hash, ProjectionFamily};
use crate::mechanisms::flip_probability;
use crate::vectors::{angular_to_euclidean, euclidean_distance, hamming_distance, RealVector};

/// Relative tolerance on δ for [`solve_alpha`].
pub const ALPHA_REL_TOL: f64 = 1e-9;
/// Iteration cap for [`solve_alpha`].
pub const ALPHA_MAX_ITER: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrivacyParams {
    pub epsilon: f64,
    pub kappa: usize,
    pub delta: f64,
    /// Angular distance between the two inputs.
    pub d: f64,
}

impl PrivacyParams {
    pub fn new(epsilon: f64, kappa: usize, delta: f64, d: f64) -> Result<Self> {
        let p = Self {
            epsilon,
            kappa,
            delta,
            d,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        check_epsilon(self.epsilon)?;
        check_kappa(self.kappa)?;
        if !(self.delta > 0.0 && self.delta <= 1.0) {
            return Err(invalid(format!("delta must be in (0, 1], got {}", self.delta)));
        }
        check_distance(self.d)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    WorstCaseDp,
    Pseudometric,
    PxdpSimple,
    PxdpTight,
    Laplsh,
}

impl BoundKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            BoundKind::WorstCaseDp => "worst_case_dp",
            BoundKind::Pseudometric => "pseudometric",
            BoundKind::PxdpSimple => "pxdp_simple",
            BoundKind::PxdpTight => "pxdp_tight",
            BoundKind::Laplsh => "laplsh",
        }
    }
}

/// Derived budget quantities for one parameter point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BudgetReport {
    pub bound_kind: BoundKind,
    pub epsilon: f64,
    pub kappa: usize,
    pub d: f64,
    pub xi: f64,
    pub alpha: Option<f64>,
    pub delta_out: f64,
    /// `κε`; absent for LapLSH, which has no per-bit budget.
    pub ldp_budget: Option<f64>,
    pub flip_prob: Option<f64>,
}

impl BudgetReport {
    fn new(bound_kind: BoundKind, epsilon: f64, kappa: usize, d: f64, xi: f64) -> Self {
        Self {
            bound_kind,
            epsilon,
            kappa,
            d,
            xi,
            alpha: None,
            delta_out: 0.0,
            ldp_budget: Some(kappa as f64 * epsilon),
            flip_prob: Some(flip_probability(epsilon)),
        }
    }
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if epsilon > 0.0 && epsilon.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!("epsilon must be finite and > 0, got {epsilon}")))
    }
}

fn check_kappa(kappa: usize) -> Result<()> {
    if kappa >= 1 {
        Ok(())
    } else {
        Err(invalid("kappa must be >= 1"))
    }
}

fn check_distance(d: f64) -> Result<()> {
    if (0.0..=1.0).contains(&d) {
        Ok(())
    } else {
        Err(invalid(format!("angular distance must be in [0, 1], got {d}")))
    }
}

/// Worst-case (ordinary LDP) budget of LSHRR: `κε`.
pub fn worst_case_dp(epsilon: f64, kappa: usize) -> Result<f64> {
    check_epsilon(epsilon)?;
    check_kappa(kappa)?;
    Ok(kappa as f64 * epsilon)
}

/// Exact XDP budget between `x` and `x'` for a realized family:
/// `ε · hamming(H(x), H(x'))`.
pub fn pseudometric_budget(
    fam: &ProjectionFamily,
    epsilon: f64,
    x: &impl RealVector,
    x_other: &impl RealVector,
) -> Result<f64> {
    check_epsilon(epsilon)?;
    let d = hamming_distance(&hash(fam, x)?, &hash(fam, x_other)?)?;
    Ok(epsilon * d as f64)
}

/// Kullback-Leibler divergence between Bernoulli(a) and Bernoulli(b), using
/// `0·ln 0 = 0`. Returns `+∞` when `b ∈ {0, 1}` and `a ≠ b`.
pub fn kl_bernoulli(a: f64, b: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&a) || !(0.0..=1.0).contains(&b) {
        return Err(invalid(format!("probabilities must be in [0, 1], got a={a}, b={b}")));
    }
    if a == b {
        return Ok(0.0);
    }
    fn term(p: f64, q: f64) -> f64 {
        if p == 0.0 {
            0.0
        } else if q == 0.0 {
            f64::INFINITY
        } else {
            p * (p / q).ln()
        }
    }
    Ok((term(a, b) + term(1.0 - a, 1.0 - b)).max(0.0))
}

/// Hoeffding-style PXDP bound: `ξ = εκd + ε√(−ln δ / 2)·√κ`, failure prob. δ.
pub fn pxdp_budget_simple(p: &PrivacyParams) -> Result<BudgetReport> {
    p.validate()?;
    let k = p.kappa as f64;
    let eps_prime = p.epsilon * (-p.delta.ln() / 2.0).sqrt();
    let xi = p.epsilon * k * p.d + eps_prime * k.sqrt();
    let mut r = BudgetReport::new(BoundKind::PxdpSimple, p.epsilon, p.kappa, p.d, xi);
    r.delta_out = p.delta;
    Ok(r)
}

/// Failure probability of the tight bound at slack α: `exp(−κ·KL(d+α ‖ d))`.
pub fn tight_delta(kappa: usize, d: f64, alpha: f64) -> Result<f64> {
    check_kappa(kappa)?;
    check_distance(d)?;
    if !(alpha > 0.0 && d + alpha <= 1.0) {
        return Err(invalid(format!(
            "alpha must satisfy 0 < alpha <= 1 - d, got alpha={alpha}, d={d}"
        )));
    }
    Ok((-(kappa as f64) * kl_bernoulli(d + alpha, d)?).exp())
}

/// Smallest slack α with `exp(−κ·KL(d+α ‖ d)) = δ`, by bisection on `(0, 1−d]`.
///
/// At `d = 0` every positive α gives failure probability 0, so the smallest
/// positive double is returned (with a warning). Returns
/// [`Error::Infeasible`] when even `α = 1 − d` cannot reach δ, which happens
/// iff `d^κ > δ`.
pub fn solve_alpha(kappa: usize, d: f64, delta: f64) -> Result<f64> {
    check_kappa(kappa)?;
    check_distance(d)?;
    if !(delta > 0.0 && delta < 1.0) {
        return Err(invalid(format!("delta must be in (0, 1), got {delta}")));
    }
    if d == 0.0 {
        log::warn!("solve_alpha at d = 0: the tight bound is vacuous, returning minimal alpha");
        return Ok(f64::MIN_POSITIVE);
    }
    if d >= 1.0 {
        return Err(Error::Infeasible("no slack available at d = 1".into()));
    }
    let k = kappa as f64;
    let target = -delta.ln() / k;
    // KL(1 ‖ d) = −ln d is the largest value reachable on the interval.
    if -d.ln() < target {
        return Err(Error::Infeasible(format!(
            "d^kappa = {} exceeds delta = {delta}; no alpha <= 1 - d reaches it",
            d.powf(k)
        )));
    }
    let f = |alpha: f64| kl_bernoulli((d + alpha).min(1.0), d).expect("in range");
    let (mut lo, mut hi) = (0.0, 1.0 - d);
    let mut mid = hi;
    for _ in 0..ALPHA_MAX_ITER {
        mid = 0.5 * (lo + hi);
        let delta_mid = (-k * f(mid)).exp();
        if ((delta_mid - delta) / delta).abs() <= ALPHA_REL_TOL {
            return Ok(mid);
        }
        if delta_mid > delta {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= f64::EPSILON * hi {
            break;
        }
    }
    Ok(mid)
}

/// Tight PXDP bound: `ξ = εκ(d + α)`, failure probability `exp(−κ·KL(d+α ‖ d))`.
pub fn pxdp_budget_tight(p: &PrivacyParams, alpha: f64) -> Result<BudgetReport> {
    p.validate()?;
    let delta_out = tight_delta(p.kappa, p.d, alpha)?;
    let xi = p.epsilon * p.kappa as f64 * (p.d + alpha);
    let mut r = BudgetReport::new(BoundKind::PxdpTight, p.epsilon, p.kappa, p.d, xi);
    r.alpha = Some(alpha);
    r.delta_out = delta_out;
    Ok(r)
}

/// Per-bit ε realizing total budget `xi` under the tight bound at `(κ, d, δ)`.
/// `xi = 0` gives `ε = 0`, i.e. uniformly random output bits.
pub fn epsilon_for_target_xi(xi: f64, kappa: usize, d: f64, delta: f64) -> Result<f64> {
    if !(xi >= 0.0 && xi.is_finite()) {
        return Err(invalid(format!("target xi must be finite and >= 0, got {xi}")));
    }
    let alpha = solve_alpha(kappa, d, delta)?;
    Ok(xi / (kappa as f64 * (d + alpha)))
}

/// Worst-case LDP budget `κε` of the ε that realizes `xi` under the tight bound.
pub fn ldp_budget(xi: f64, kappa: usize, d: f64, delta: f64) -> Result<f64> {
    Ok(kappa as f64 * epsilon_for_target_xi(xi, kappa, d, delta)?)
}

/// Rounds half away from zero for positive inputs (2.5 → 3).
pub fn round_half_up(v: f64) -> i64 {
    (v + 0.5).floor() as i64
}

/// LapLSH budget between two inputs: `ε · d_euc(x, x')`.
pub fn laplsh_budget(epsilon: f64, x: &impl RealVector, x_other: &impl RealVector) -> Result<f64> {
    check_epsilon(epsilon)?;
    Ok(epsilon * euclidean_distance(x, x_other)?)
}

/// LapLSH budget for unit vectors at angular distance `d_theta`:
/// `ε · √(2 − 2cos(π·d_θ))`.
pub fn laplsh_budget_from_angle(epsilon: f64, d_theta: f64) -> Result<f64> {
    check_epsilon(epsilon)?;
    Ok(epsilon * angular_to_euclidean(d_theta)?)
}

/// LapLSH ε whose budget on unit vectors at `d_theta` equals `xi`, so the
/// two mechanisms can be placed on one privacy axis.
pub fn laplsh_epsilon_for_target_xi(xi: f64, d_theta: f64) -> Result<f64> {
    if !(xi > 0.0 && xi.is_finite()) {
        return Err(invalid(format!("target xi must be finite and > 0, got {xi}")));
    }
    let d_euc = angular_to_euclidean(d_theta)?;
    if d_euc == 0.0 {
        return Err(Error::Infeasible("no finite epsilon at d_theta = 0".into()));
    }
    Ok(xi / d_euc)
}

/// Report for LapLSH at unit-vector angular distance `d_theta`.
pub fn laplsh_report(epsilon: f64, d_theta: f64) -> Result<BudgetReport> {
    let xi = laplsh_budget_from_angle(epsilon, d_theta)?;
    let mut r = BudgetReport::new(BoundKind::Laplsh, epsilon, 0, d_theta, xi);
    r.ldp_budget = None;
    r.flip_prob = None;
    Ok(r)
}

/// Report for the worst-case DP bound.
pub fn worst_case_report(epsilon: f64, kappa: usize) -> Result<BudgetReport> {
    let xi = worst_case_dp(epsilon, kappa)?;
    Ok(BudgetReport::new(BoundKind::WorstCaseDp, epsilon, kappa, 1.0, xi))
}

/// Per-bit randomized-response flip probability `1/(1+e^ε)`.
pub fn rr_flip_probability(epsilon: f64) -> Result<f64> {
    if epsilon.is_nan() || epsilon < 0.0 {
        return Err(invalid(format!("epsilon must be >= 0, got {epsilon}")));
    }
    Ok(flip_probability(epsilon))
}

/// Concentrated-XDP parameters of LSHRR: mean `μ = εκ`, subgaussian `τ = εκ/2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CxdpParams {
    pub mu: f64,
    pub tau: f64,
    pub kappa: usize,
}

impl CxdpParams {
    /// Generic CXDP-to-PXDP conversion: `ξ = μ·d + τ·√(−2 ln δ)`, failure prob. δ.
    ///
    /// With `τ = εκ/2` this treats the Hamming distance as one variable on
    /// `[0, κ]` and is looser than [`pxdp_budget_simple`] by a factor `√κ` in
    /// the tail term.
    pub fn to_pxdp(&self, d: f64, delta: f64) -> Result<f64> {
        convert(self.mu, self.tau, d, delta)
    }

    /// Subgaussian parameter of the loss when the κ bits are used as
    /// independent summands on `[0, ε]`: `τ/√κ = ε√κ/2`.
    pub fn per_bit_tau(&self) -> f64 {
        self.tau / (self.kappa as f64).sqrt()
    }

    /// CXDP-to-PXDP conversion with [`per_bit_tau`](Self::per_bit_tau).
    /// Coincides with [`pxdp_budget_simple`].
    pub fn to_pxdp_independent_bits(&self, d: f64, delta: f64) -> Result<f64> {
        convert(self.mu, self.per_bit_tau(), d, delta)
    }
}

fn convert(mu: f64, tau: f64, d: f64, delta: f64) -> Result<f64> {
    check_distance(d)?;
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(invalid(format!("delta must be in (0, 1], got {delta}")));
    }
    Ok(mu * d + tau * (-2.0 * delta.ln()).sqrt())
}

pub fn cxdp_params(epsilon: f64, kappa: usize) -> Result<CxdpParams> {
    let mu = worst_case_dp(epsilon, kappa)?;
    Ok(CxdpParams {
        mu,
        tau: mu / 2.0,
        kappa,
    })
}

/// One cell of the XDP-to-LDP conversion table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LdpTableEntry {
    pub d_theta: f64,
    pub xi: f64,
    pub kappa: usize,
    pub delta: f64,
    pub epsilon: f64,
    pub ldp_budget: f64,
    pub ldp_rounded: i64,
}

pub const TABLE1_D_THETAS: [f64; 2] = [0.05, 0.1];
pub const TABLE1_XIS: [f64; 4] = [1.0, 5.0, 10.0, 20.0];
pub const TABLE1_KAPPAS: [usize; 3] = [10, 20, 50];
pub const TABLE1_DELTA: f64 = 0.01;

/// XDP-to-LDP conversion at every `(d_θ, ξ, κ)` of the given grids.
pub fn ldp_table(d_thetas: &[f64], xis: &[f64], kappas: &[usize], delta: f64) -> Result<Vec<LdpTableEntry>> {
    let mut out = Vec::with_capacity(d_thetas.len() * xis.len() * kappas.len());
    for &d_theta in d_thetas {
        for &xi in xis {
            for &kappa in kappas {
                let epsilon = epsilon_for_target_xi(xi, kappa, d_theta, delta)?;
                let ldp = kappa as f64 * epsilon;
                out.push(LdpTableEntry {
                    d_theta,
                    xi,
                    kappa,
                    delta,
                    epsilon,
                    ldp_budget: ldp,
                    ldp_rounded: round_half_up(ldp),
                });
            }
        }
    }
    Ok(out)
}

/// The standard conversion table: d_θ ∈ {0.05, 0.1}, ξ ∈ {1, 5, 10, 20},
/// κ ∈ {10, 20, 50}, δ = 0.01.
pub fn table1() -> Vec<LdpTableEntry> {
    ldp_table(&TABLE1_D_THETAS, &TABLE1_XIS, &TABLE1_KAPPAS, TABLE1_DELTA).expect("fixed grid is feasible")
}
