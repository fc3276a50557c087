//! Exhaustive k-nearest-neighbor search in angular and Hamming space, and the
//! utility loss of approximate neighbor sets.
//!
//! Ties are always broken by ascending user id so every result is
//! reproducible.

use std::cmp::Ordering;
use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::lsh::ProjectionFamily;
use crate::mechanisms::Mechanism;
use crate::par;
use crate::rng;
use crate::vectors::{angular_distance, hamming_distance, BitString, RealVector, Vector};

/// A nonempty collection of equal-dimension vectors keyed by unique ids.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    dim: usize,
    ids: Vec<String>,
    vectors: Vec<Vector>,
    index: HashMap<String, usize>,
}

impl Dataset {
    pub fn new(rows: Vec<(String, Vector)>) -> Result<Self> {
        let dim = rows.first().ok_or(Error::EmptyDataset)?.1.dim();
        let mut ids = Vec::with_capacity(rows.len());
        let mut vectors = Vec::with_capacity(rows.len());
        let mut index = HashMap::with_capacity(rows.len());
        for (id, v) in rows {
            if v.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    actual: v.dim(),
                });
            }
            if index.insert(id.clone(), ids.len()).is_some() {
                return Err(invalid(format!("duplicate id {id:?}")));
            }
            ids.push(id);
            vectors.push(v);
        }
        Ok(Self {
            dim,
            ids,
            vectors,
            index,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn vectors(&self) -> &[Vector] {
        &self.vectors
    }

    pub fn position(&self, id: &str) -> Result<usize> {
        self.index
            .get(id)
            .copied()
            .ok_or_else(|| Error::UnknownId(id.to_string()))
    }

    pub fn get(&self, id: &str) -> Result<&Vector> {
        Ok(&self.vectors[self.position(id)?])
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Vector)> {
        self.ids.iter().map(String::as_str).zip(&self.vectors)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Neighbor {
    pub id: String,
    pub distance: f64,
}

/// Up to `k` neighbors of `query_id`, nearest first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NeighborList {
    pub query_id: String,
    pub neighbors: Vec<Neighbor>,
    /// Set when fewer than `k` other points existed.
    pub truncated: bool,
}

impl NeighborList {
    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.neighbors.iter().map(|n| n.id.as_str())
    }

    pub fn len(&self) -> usize {
        self.neighbors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.neighbors.is_empty()
    }
}

fn by_distance_then_id(a: &(f64, &str), b: &(f64, &str)) -> Ordering {
    a.0.total_cmp(&b.0).then_with(|| a.1.cmp(b.1))
}

fn top_k(query_id: &str, mut cands: Vec<(f64, &str)>, k: usize) -> Result<NeighborList> {
    if k == 0 {
        return Err(invalid("k must be >= 1"));
    }
    let truncated = cands.len() < k;
    if cands.len() > k {
        cands.select_nth_unstable_by(k - 1, by_distance_then_id);
        cands.truncate(k);
    }
    cands.sort_unstable_by(by_distance_then_id);
    Ok(NeighborList {
        query_id: query_id.to_string(),
        neighbors: cands
            .into_iter()
            .map(|(distance, id)| Neighbor {
                id: id.to_string(),
                distance,
            })
            .collect(),
        truncated,
    })
}

/// The `k` points of `s` closest to `q` in angular distance, `q` excluded.
pub fn exact_knn(s: &Dataset, q: &str, k: usize) -> Result<NeighborList> {
    let qi = s.position(q)?;
    let xq = &s.vectors[qi];
    let mut cands = Vec::with_capacity(s.len().saturating_sub(1));
    for (i, (id, v)) in s.iter().enumerate() {
        if i != qi {
            cands.push((angular_distance(xq, v)?, id));
        }
    }
    top_k(q, cands, k)
}

/// The `k` codes closest to `q`'s code in Hamming distance, `q` excluded.
/// `ids[i]` names `hashes[i]`; distances are raw bit counts.
pub fn approx_knn(ids: &[String], hashes: &[BitString], q: &str, k: usize) -> Result<NeighborList> {
    if ids.len() != hashes.len() {
        return Err(Error::LengthMismatch {
            left: ids.len(),
            right: hashes.len(),
        });
    }
    let qi = ids
        .iter()
        .position(|id| id == q)
        .ok_or_else(|| Error::UnknownId(q.to_string()))?;
    approx_knn_at(ids, hashes, qi, k)
}

fn approx_knn_at(ids: &[String], hashes: &[BitString], qi: usize, k: usize) -> Result<NeighborList> {
    let hq = &hashes[qi];
    let mut cands = Vec::with_capacity(ids.len().saturating_sub(1));
    for (i, (id, h)) in ids.iter().zip(hashes).enumerate() {
        if i != qi {
            cands.push((hamming_distance(hq, h)? as f64, id.as_str()));
        }
    }
    top_k(&ids[qi], cands, k)
}

/// Average angular distance of the approximate neighbors minus that of the
/// true neighbors, both measured in the original space.
pub fn utility_loss(s: &Dataset, q: &str, approx: &NeighborList, exact: &NeighborList) -> Result<f64> {
    if approx.len() != exact.len() {
        return Err(Error::LengthMismatch {
            left: approx.len(),
            right: exact.len(),
        });
    }
    if approx.is_empty() {
        return Err(invalid("neighbor lists are empty"));
    }
    let xq = s.get(q)?;
    let sum = |list: &NeighborList| -> Result<f64> { list.ids().map(|id| angular_distance(xq, s.get(id)?)).sum() };
    Ok((sum(approx)? - sum(exact)?) / approx.len() as f64)
}

/// Utility loss for one query.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryOutcome {
    pub query_id: String,
    pub utility_loss: f64,
    /// Number of neighbors actually averaged (`< k` only for tiny datasets).
    pub neighbors: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSummary {
    pub k: usize,
    pub kappa: usize,
    pub mechanism: Mechanism,
    pub queries: usize,
    pub mean_utility_loss: f64,
    pub std_err: f64,
    /// Some query had fewer than `k` candidate neighbors.
    pub truncated: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub per_query: Vec<QueryOutcome>,
    pub summary: ExperimentSummary,
    /// Approximate neighbor lists, in query order.
    #[serde(skip)]
    pub approx: Vec<NeighborList>,
}

/// Precomputed true neighbors for a fixed `(dataset, queries, k)`, so that
/// sweeps over mechanisms and families share one exact search.
#[derive(Debug, Clone)]
pub struct MatchingExperiment<'a> {
    dataset: &'a Dataset,
    k: usize,
    query_positions: Vec<usize>,
    exact: Vec<NeighborList>,
}

impl<'a> MatchingExperiment<'a> {
    pub fn new(dataset: &'a Dataset, queries: &[String], k: usize) -> Result<Self> {
        if k == 0 {
            return Err(invalid("k must be >= 1"));
        }
        if dataset.len() < 2 {
            return Err(invalid("need at least two users to match"));
        }
        let query_positions = queries
            .iter()
            .map(|q| dataset.position(q))
            .collect::<Result<Vec<_>>>()?;
        let exact = par::try_map_slice(queries, |q| exact_knn(dataset, q, k))?;
        Ok(Self {
            dataset,
            k,
            query_positions,
            exact,
        })
    }

    pub fn exact(&self) -> &[NeighborList] {
        &self.exact
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Publishes one code per user under the shared family, then scores each
    /// query. User `i` draws mechanism noise from substream `i` of `noise_seed`.
    pub fn run(&self, fam: &ProjectionFamily, mechanism: Mechanism, noise_seed: u64) -> Result<ExperimentResult> {
        mechanism.validate()?;
        let s = self.dataset;
        let codes = perturb_all(fam, mechanism, s.vectors(), noise_seed)?;
        let scored = par::try_map_slice(
            &self.query_positions.iter().zip(&self.exact).collect::<Vec<_>>(),
            |(qi, exact)| {
                let approx = approx_knn_at(s.ids(), &codes, **qi, self.k)?;
                let loss = utility_loss(s, &s.ids()[**qi], &approx, exact)?;
                Ok::<_, Error>((approx, loss))
            },
        )?;
        let mut per_query = Vec::with_capacity(scored.len());
        let mut approx = Vec::with_capacity(scored.len());
        let mut truncated = false;
        for ((list, loss), exact) in scored.into_iter().zip(&self.exact) {
            truncated |= exact.truncated;
            per_query.push(QueryOutcome {
                query_id: list.query_id.clone(),
                utility_loss: loss,
                neighbors: list.len(),
            });
            approx.push(list);
        }
        let (mean, std_err) = mean_and_std_err(per_query.iter().map(|q| q.utility_loss));
        Ok(ExperimentResult {
            summary: ExperimentSummary {
                k: self.k,
                kappa: fam.kappa(),
                mechanism,
                queries: per_query.len(),
                mean_utility_loss: mean,
                std_err,
                truncated,
            },
            per_query,
            approx,
        })
    }
}

/// Applies `mechanism` to every vector under one family. Vector `i` uses
/// noise substream `i`, so the result does not depend on thread scheduling.
pub fn perturb_all<V: RealVector + Sync>(
    fam: &ProjectionFamily,
    mechanism: Mechanism,
    xs: &[V],
    noise_seed: u64,
) -> Result<Vec<BitString>> {
    let outputs = par::map_indices(xs.len(), |i| {
        let mut r = rng::substream(noise_seed, i as u64);
        mechanism.apply(fam, &xs[i], &mut r).map(|o| o.bits)
    });
    outputs.into_iter().collect()
}

/// Exact neighbors in angular space, mechanism codes for every user, Hamming
/// neighbors on the codes, and the per-query utility loss.
pub fn run_matching_experiment(
    s: &Dataset,
    fam: &ProjectionFamily,
    mechanism: Mechanism,
    k: usize,
    queries: &[String],
    noise_seed: u64,
) -> Result<ExperimentResult> {
    MatchingExperiment::new(s, queries, k)?.run(fam, mechanism, noise_seed)
}

/// Sample mean and standard error of the mean (0 for a single value).
pub fn mean_and_std_err(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let v: Vec<f64> = values.collect();
    let n = v.len() as f64;
    if v.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = v.iter().sum::<f64>() / n;
    if v.len() < 2 {
        return (mean, 0.0);
    }
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}
