use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::Args;
use lshxdp::lsh::{sample_family, FamilySpec, ProjectionFamily};
use lshxdp::mechanisms::{Mechanism, Provenance};
use lshxdp::nns::{approx_knn, exact_knn, perturb_all, Dataset};
use lshxdp::privacy::{epsilon_for_target_xi, laplsh_epsilon_for_target_xi};
use serde::Serialize;

use crate::io::{load_dataset, seed_or_entropy, write_json, write_rows, Format};
use crate::MechanismArg;

const CODES_SCHEMA: &str = "lshxdp.codes.v1";

#[derive(Debug, Args)]
pub struct DatasetArgs {
    /// Dataset snapshot, or a `user,item,value` CSV/TSV event file.
    #[arg(long)]
    pub input: PathBuf,
    /// Item count (vector dimension) when reading an event file.
    #[arg(long)]
    pub items: Option<usize>,
    /// Use event values as given instead of centering each user's ratings.
    #[arg(long)]
    pub raw_counts: bool,
    /// The event file starts with a header row.
    #[arg(long)]
    pub header: bool,
}

impl DatasetArgs {
    pub fn load(&self) -> Result<Dataset> {
        load_dataset(&self.input, self.items, self.raw_counts, self.header)
    }
}

#[derive(Debug, Args)]
pub struct FamilyArgs {
    #[arg(long)]
    kappa: Option<usize>,
    #[arg(long)]
    family_seed: Option<u64>,
    /// Reuse a family written by --save-family.
    #[arg(long, conflicts_with_all = ["kappa", "family_seed"])]
    family: Option<PathBuf>,
    #[arg(long)]
    save_family: Option<PathBuf>,
}

impl FamilyArgs {
    fn build(&self, n: usize) -> Result<ProjectionFamily> {
        let fam = match &self.family {
            Some(p) => {
                let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
                let spec = FamilySpec::from_json(&text)?;
                if spec.n != n {
                    bail!("family is over dimension {} but the dataset has {n}", spec.n);
                }
                spec.build()?
            }
            None => {
                let Some(kappa) = self.kappa else {
                    bail!("pass --kappa or --family")
                };
                sample_family(n, kappa, seed_or_entropy(self.family_seed, "family-seed"))?
            }
        };
        if let Some(p) = &self.save_family {
            std::fs::write(p, fam.spec().to_json() + "\n").with_context(|| format!("writing {}", p.display()))?;
        }
        Ok(fam)
    }
}

#[derive(Debug, Args)]
pub struct HashArgs {
    #[command(flatten)]
    data: DatasetArgs,
    #[command(flatten)]
    family: FamilyArgs,
    #[arg(long, value_enum, default_value_t)]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PerturbArgs {
    #[command(flatten)]
    data: DatasetArgs,
    #[command(flatten)]
    family: FamilyArgs,
    #[command(flatten)]
    mech: MechanismArgs,
    #[arg(long)]
    noise_seed: Option<u64>,
    #[arg(long, value_enum, default_value_t)]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct MechanismArgs {
    #[arg(long, value_enum, default_value_t = MechanismArg::Lshrr)]
    pub mechanism: MechanismArg,
    #[arg(long, conflicts_with = "xi")]
    pub eps: Option<f64>,
    /// Target budget, inverted to ε at (--d-theta, --delta).
    #[arg(long)]
    pub xi: Option<f64>,
    #[arg(long = "d-theta", default_value_t = 0.1)]
    pub d_theta: f64,
    #[arg(long, default_value_t = 0.01)]
    pub delta: f64,
}

impl MechanismArgs {
    pub fn resolve(&self, kappa: usize) -> Result<Mechanism> {
        let eps = |lap: bool| -> Result<f64> {
            match (self.eps, self.xi) {
                (Some(e), _) => Ok(e),
                (None, Some(xi)) if lap => Ok(laplsh_epsilon_for_target_xi(xi, self.d_theta)?),
                (None, Some(xi)) => Ok(epsilon_for_target_xi(xi, kappa, self.d_theta, self.delta)?),
                (None, None) => bail!("{:?} needs --eps or --xi", self.mechanism),
            }
        };
        let m = match self.mechanism {
            MechanismArg::Lsh => Mechanism::Lsh,
            MechanismArg::Uniform => Mechanism::Uniform,
            MechanismArg::Lshrr => Mechanism::Lshrr { epsilon: eps(false)? },
            MechanismArg::Laplsh => Mechanism::Laplsh { epsilon: eps(true)? },
        };
        m.validate()?;
        Ok(m)
    }
}

#[derive(Serialize)]
struct CodeRow<'a> {
    id: &'a str,
    bits: String,
}

fn emit_codes(
    s: &Dataset,
    fam: &ProjectionFamily,
    mechanism: Mechanism,
    noise_seed: u64,
    format: Format,
    out: Option<&PathBuf>,
) -> Result<()> {
    let codes = perturb_all(fam, mechanism, s.vectors(), noise_seed)?;
    let rows: Vec<CodeRow> = s
        .ids()
        .iter()
        .zip(&codes)
        .map(|(id, b)| CodeRow {
            id,
            bits: b.to_string(),
        })
        .collect();
    match format {
        Format::Csv => write_rows(out, format, CODES_SCHEMA, &rows),
        Format::Json => {
            let provenance = Provenance {
                mechanism,
                family: fam.spec(),
            };
            write_json(
                out,
                &serde_json::json!({ "schema": CODES_SCHEMA, "provenance": provenance, "noise_seed": noise_seed, "rows": rows }),
            )
        }
    }
}

pub fn run_hash(a: HashArgs) -> Result<()> {
    let s = a.data.load()?;
    let fam = a.family.build(s.dim())?;
    emit_codes(&s, &fam, Mechanism::Lsh, 0, a.format, a.out.as_ref())
}

pub fn run_perturb(a: PerturbArgs) -> Result<()> {
    let s = a.data.load()?;
    let fam = a.family.build(s.dim())?;
    let mechanism = a.mech.resolve(fam.kappa())?;
    let noise_seed = seed_or_entropy(a.noise_seed, "noise-seed");
    emit_codes(&s, &fam, mechanism, noise_seed, a.format, a.out.as_ref())
}

#[derive(Debug, Args)]
pub struct KnnArgs {
    #[command(flatten)]
    data: DatasetArgs,
    /// Query ids; all users when omitted.
    #[arg(long, value_delimiter = ',')]
    query: Vec<String>,
    #[arg(long, default_value_t = 10)]
    k: usize,
    /// Search Hamming space of perturbed codes instead of exact angular search.
    #[arg(long)]
    approx: bool,
    #[command(flatten)]
    family: FamilyArgs,
    #[command(flatten)]
    mech: MechanismArgs,
    #[arg(long)]
    noise_seed: Option<u64>,
    #[arg(long, value_enum, default_value_t)]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Serialize)]
struct NeighborRow {
    query_id: String,
    rank: usize,
    neighbor_id: String,
    distance: f64,
}

pub fn run_knn(a: KnnArgs) -> Result<()> {
    let s = a.data.load()?;
    let queries: Vec<String> = if a.query.is_empty() {
        s.ids().to_vec()
    } else {
        a.query.clone()
    };
    let lists = if a.approx {
        let fam = a.family.build(s.dim())?;
        let mechanism = a.mech.resolve(fam.kappa())?;
        let noise_seed = seed_or_entropy(a.noise_seed, "noise-seed");
        let codes = perturb_all(&fam, mechanism, s.vectors(), noise_seed)?;
        queries
            .iter()
            .map(|q| approx_knn(s.ids(), &codes, q, a.k))
            .collect::<Result<Vec<_>, _>>()?
    } else {
        queries
            .iter()
            .map(|q| exact_knn(&s, q, a.k))
            .collect::<Result<Vec<_>, _>>()?
    };
    let rows: Vec<NeighborRow> = lists
        .into_iter()
        .flat_map(|l| {
            let q = l.query_id;
            l.neighbors.into_iter().enumerate().map(move |(i, n)| NeighborRow {
                query_id: q.clone(),
                rank: i + 1,
                neighbor_id: n.id,
                distance: n.distance,
            })
        })
        .collect();
    write_rows(a.out.as_ref(), a.format, "lshxdp.neighbors.v1", &rows)
}
