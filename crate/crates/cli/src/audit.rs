use std::f64::consts::PI;
use std::path::PathBuf;

use anyhow::{bail, Result};
use clap::{ArgGroup, Args};
use lshxdp::audit::{
    certify_pxdp, enumerate_2d_channel, error_bound_check, estimate_collision_rate, hamming_law_check,
    hyperplane_release_leakage,
};
use lshxdp::vectors::DenseVector;
use serde_json::{json, Value};

use crate::io::{seed_or_entropy, write_json};

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("check").required(true).args(["toy_channel", "collision", "hamming", "pxdp", "error_bound"])))]
pub struct AuditArgs {
    /// Exact channel and leakage of one hyperplane bit over {(0,1), (1,0), (1,1)}.
    #[arg(long)]
    toy_channel: bool,
    /// One-bit mismatch rate against angular distance.
    #[arg(long)]
    collision: bool,
    /// Hamming distance law over κ-bit families.
    #[arg(long)]
    hamming: bool,
    /// Monte Carlo tail check of both probabilistic XDP bounds.
    #[arg(long)]
    pxdp: bool,
    /// Randomized-response error on Hamming distances.
    #[arg(long)]
    error_bound: bool,
    /// Monte Carlo trials (families for --hamming and --pxdp).
    #[arg(long)]
    trials: Option<usize>,
    /// Angular distances of the audited pairs.
    #[arg(long = "d-theta", value_delimiter = ',')]
    d_theta: Vec<f64>,
    #[arg(long, value_delimiter = ',')]
    kappa: Vec<usize>,
    #[arg(long, value_delimiter = ',')]
    eps: Vec<f64>,
    #[arg(long, default_value_t = 0.01)]
    delta: f64,
    /// Dimension of the audited pairs.
    #[arg(long, default_value_t = 3)]
    dim: usize,
    #[arg(long)]
    family_seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Unit vectors `e1` and `cos(πd)e1 + sin(πd)e2` in `dim` dimensions.
fn pair(dim: usize, d: f64) -> Result<(DenseVector, DenseVector)> {
    if dim < 2 {
        bail!("--dim must be >= 2");
    }
    let mut x = vec![0.0; dim];
    let mut y = vec![0.0; dim];
    x[0] = 1.0;
    y[0] = (PI * d).cos();
    y[1] = (PI * d).sin();
    Ok((DenseVector::new(x)?, DenseVector::new(y)?))
}

fn or_default<T: Clone>(v: &[T], d: &[T]) -> Vec<T> {
    if v.is_empty() {
        d.to_vec()
    } else {
        v.to_vec()
    }
}

/// Writes the report and returns whether every check passed.
pub fn run(a: AuditArgs) -> Result<bool> {
    let (kind, reports, pass): (&str, Vec<Value>, bool) = if a.toy_channel {
        let inputs = [[0.0, 1.0], [1.0, 0.0], [1.0, 1.0]]
            .iter()
            .map(|v| DenseVector::new(v.to_vec()))
            .collect::<Result<Vec<_>, _>>()?;
        let cm = enumerate_2d_channel(&inputs)?;
        let leak = hyperplane_release_leakage(&cm);
        ("toy_channel", vec![json!({ "channel": cm, "leakage": leak })], true)
    } else {
        let seed = seed_or_entropy(a.family_seed, "family-seed");
        let ds = or_default(&a.d_theta, &[0.0, 0.25, 0.5, 0.75, 1.0]);
        let kappas = or_default(&a.kappa, &[20]);
        let epss = or_default(&a.eps, &[1.0]);
        let mut reports = Vec::new();
        let mut pass = true;
        let mut stream = 0u64;
        let mut next_seed = || {
            stream += 1;
            seed.wrapping_add(stream.wrapping_mul(0x9e37_79b9_7f4a_7c15))
        };
        let kind = if a.collision {
            for &d in &ds {
                let (x, y) = pair(a.dim, d)?;
                let r = estimate_collision_rate(&x, &y, a.trials.unwrap_or(10_000), next_seed())?;
                pass &= r.pass;
                reports.push(serde_json::to_value(r)?);
            }
            "collision"
        } else if a.hamming {
            for &kappa in &kappas {
                for &d in &ds {
                    let (x, y) = pair(a.dim, d)?;
                    let r = hamming_law_check(&x, &y, kappa, a.trials.unwrap_or(1000), next_seed())?;
                    pass &= r.pass;
                    reports.push(serde_json::to_value(r)?);
                }
            }
            "hamming"
        } else if a.pxdp {
            for &eps in &epss {
                for &kappa in &kappas {
                    for &d in &ds {
                        let (x, y) = pair(a.dim, d)?;
                        let r = certify_pxdp(eps, kappa, &x, &y, a.delta, a.trials.unwrap_or(10_000), next_seed())?;
                        pass &= r.pass;
                        reports.push(serde_json::to_value(r)?);
                    }
                }
            }
            "pxdp"
        } else {
            for &eps in &epss {
                for &kappa in &kappas {
                    for &d in &ds {
                        let (x, y) = pair(a.dim, d)?;
                        let r = error_bound_check(eps, kappa, &x, &y, a.trials.unwrap_or(1000), next_seed())?;
                        pass &= r.pass;
                        reports.push(serde_json::to_value(r)?);
                    }
                }
            }
            "error_bound"
        };
        (kind, reports, pass)
    };
    write_json(
        a.out.as_ref(),
        &json!({ "schema": "lshxdp.audit.v1", "check": kind, "pass": pass, "reports": reports }),
    )?;
    Ok(pass)
}
