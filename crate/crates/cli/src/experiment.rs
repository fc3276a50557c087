use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::Args;
use lshxdp::data::{synthesize, truncate_dimensions, SynthSpec, TruncationStrategy};
use lshxdp::lsh::sample_family;
use lshxdp::mechanisms::Mechanism;
use lshxdp::nns::{mean_and_std_err, Dataset, MatchingExperiment};
use lshxdp::privacy::{epsilon_for_target_xi, laplsh_epsilon_for_target_xi};
use lshxdp::rng::substream;
use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::io::{load_dataset, seed_or_entropy, write_rows, Format};
use crate::MechanismArg;

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum OneOrMany<T> {
    One(T),
    Many(Vec<T>),
}

impl<T> OneOrMany<T> {
    fn into_vec(self) -> Vec<T> {
        match self {
            OneOrMany::One(t) => vec![t],
            OneOrMany::Many(v) => v,
        }
    }
}

/// Flat TOML document describing a utility-loss sweep.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// `"synth"` or a path to a snapshot / event file.
    dataset: String,
    items: Option<usize>,
    #[serde(default)]
    raw_counts: bool,
    #[serde(default)]
    header: bool,
    synth_n: Option<usize>,
    synth_clusters: Option<usize>,
    synth_users_per_cluster: Option<usize>,
    synth_sigma_theta: Option<f64>,
    synth_seed: Option<u64>,
    /// Keep only the `n_prime` most popular items.
    n_prime: Option<usize>,
    kappa: OneOrMany<usize>,
    k: OneOrMany<usize>,
    mechanism: OneOrMany<MechanismArg>,
    xi: Option<OneOrMany<f64>>,
    epsilon: Option<OneOrMany<f64>>,
    #[serde(default = "default_delta")]
    delta: f64,
    #[serde(default = "default_d_theta")]
    d_theta: f64,
    family_seed: Option<u64>,
    noise_seed: Option<u64>,
    /// Independent families per point; losses are pooled across them.
    #[serde(default = "default_families")]
    families: usize,
    /// Number of query users, evenly spaced in id order; all when absent.
    queries: Option<usize>,
    out: Option<PathBuf>,
    format: Option<Format>,
}

fn default_delta() -> f64 {
    0.01
}
fn default_d_theta() -> f64 {
    0.1
}
fn default_families() -> usize {
    1
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let c: Self = toml::from_str(text)?;
        match (&c.xi, &c.epsilon) {
            (Some(_), Some(_)) => bail!("give either xi or epsilon, not both"),
            (None, None) => bail!("give xi or epsilon"),
            _ => {}
        }
        if c.families == 0 {
            bail!("families must be >= 1");
        }
        Ok(c)
    }

    fn dataset(&self) -> Result<Dataset> {
        let s = if self.dataset == "synth" {
            let spec = SynthSpec {
                n: self.synth_n.unwrap_or(100),
                clusters: self.synth_clusters.unwrap_or(10),
                users_per_cluster: self.synth_users_per_cluster.unwrap_or(20),
                sigma_theta: self.synth_sigma_theta.unwrap_or(0.1),
                seed: self.synth_seed.unwrap_or(0),
            };
            synthesize(&spec)?
        } else {
            load_dataset(self.dataset.as_ref(), self.items, self.raw_counts, self.header)?
        };
        Ok(match self.n_prime {
            Some(n) => truncate_dimensions(&s, n, TruncationStrategy::MostPopular)?,
            None => s,
        })
    }
}

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    family_seed: Option<u64>,
    #[arg(long)]
    noise_seed: Option<u64>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Serialize)]
struct PointRow {
    mechanism: &'static str,
    kappa: usize,
    k: usize,
    xi: Option<f64>,
    epsilon: Option<f64>,
    families: usize,
    queries: usize,
    mean_utility_loss: f64,
    std_err: f64,
    family_seed: u64,
    noise_seed: u64,
}

fn epsilon_for(
    mech: MechanismArg,
    xi: Option<f64>,
    eps: Option<f64>,
    kappa: usize,
    c: &ExperimentConfig,
) -> Result<Option<f64>> {
    Ok(match (mech, xi, eps) {
        (MechanismArg::Lsh | MechanismArg::Uniform, _, _) => None,
        (_, _, Some(e)) => Some(e),
        (MechanismArg::Lshrr, Some(xi), None) => Some(epsilon_for_target_xi(xi, kappa, c.d_theta, c.delta)?),
        (MechanismArg::Laplsh, Some(xi), None) => Some(laplsh_epsilon_for_target_xi(xi, c.d_theta)?),
        _ => unreachable!("config validation guarantees xi or epsilon"),
    })
}

pub fn run(a: ExperimentArgs) -> Result<()> {
    let text = std::fs::read_to_string(&a.config).with_context(|| format!("reading {}", a.config.display()))?;
    let c = ExperimentConfig::from_toml(&text).with_context(|| format!("parsing {}", a.config.display()))?;
    let family_seed = seed_or_entropy(a.family_seed.or(c.family_seed), "family-seed");
    let noise_seed = seed_or_entropy(a.noise_seed.or(c.noise_seed), "noise-seed");
    let s = c.dataset()?;
    let ids = s.ids();
    let queries: Vec<String> = match c.queries {
        Some(q) if q < ids.len() => (0..q).map(|i| ids[i * ids.len() / q].clone()).collect(),
        _ => ids.to_vec(),
    };
    let axis: Vec<(Option<f64>, Option<f64>)> = match (&c.xi, &c.epsilon) {
        (Some(x), _) => x.clone().into_vec().into_iter().map(|v| (Some(v), None)).collect(),
        (_, Some(e)) => e.clone().into_vec().into_iter().map(|v| (None, Some(v))).collect(),
        _ => unreachable!(),
    };
    let fam_seeds: Vec<u64> = (0..c.families)
        .map(|f| substream(family_seed, f as u64).next_u64())
        .collect();
    let noise_seeds: Vec<u64> = (0..c.families)
        .map(|f| substream(noise_seed, f as u64).next_u64())
        .collect();

    let mut rows = Vec::new();
    for &k in &c.k.clone().into_vec() {
        let exp = MatchingExperiment::new(&s, &queries, k)?;
        for &kappa in &c.kappa.clone().into_vec() {
            let fams = fam_seeds
                .iter()
                .map(|&fs| sample_family(s.dim(), kappa, fs))
                .collect::<Result<Vec<_>, _>>()?;
            for &mech_arg in &c.mechanism.clone().into_vec() {
                for &(xi, eps) in &axis {
                    let epsilon = epsilon_for(mech_arg, xi, eps, kappa, &c)?;
                    let mechanism = match mech_arg {
                        MechanismArg::Lsh => Mechanism::Lsh,
                        MechanismArg::Uniform => Mechanism::Uniform,
                        MechanismArg::Lshrr => Mechanism::Lshrr {
                            epsilon: epsilon.expect("set above"),
                        },
                        MechanismArg::Laplsh => Mechanism::Laplsh {
                            epsilon: epsilon.expect("set above"),
                        },
                    };
                    let mut losses = Vec::new();
                    for (fam, &ns) in fams.iter().zip(&noise_seeds) {
                        let res = exp.run(fam, mechanism, ns)?;
                        losses.extend(res.per_query.iter().map(|q| q.utility_loss));
                    }
                    let (mean, std_err) = mean_and_std_err(losses.into_iter());
                    log::info!(
                        "{} kappa={kappa} k={k} xi={xi:?} eps={epsilon:?}: {mean:.5}",
                        mechanism.name()
                    );
                    rows.push(PointRow {
                        mechanism: mechanism.name(),
                        kappa,
                        k,
                        xi,
                        epsilon,
                        families: c.families,
                        queries: queries.len(),
                        mean_utility_loss: mean,
                        std_err,
                        family_seed,
                        noise_seed,
                    });
                }
            }
        }
    }
    let format = a.format.or(c.format).unwrap_or_default();
    let out = a.out.or(c.out.clone());
    write_rows(out.as_ref(), format, "lshxdp.experiment.v1", &rows)
}
