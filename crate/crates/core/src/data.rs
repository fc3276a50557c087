//! Event ingestion, per-user vector construction, item truncation, synthetic
//! clustered data, and a plain-text dataset snapshot format.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt::Write as _;
use std::io::{BufRead, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::nns::Dataset;
use crate::rng;
use crate::vectors::{DenseVector, SparseVector, Vector};

/// One `(user, item, value)` observation: a rating or a visit count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventRecord {
    pub user_id: String,
    pub item_index: usize,
    pub value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EventFormat {
    Csv,
    Tsv,
}

impl EventFormat {
    fn delimiter(self) -> u8 {
        match self {
            EventFormat::Csv => b',',
            EventFormat::Tsv => b'\t',
        }
    }

    /// Guesses from the file extension; anything but `.tsv` is CSV.
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some("tsv") => EventFormat::Tsv,
            _ => EventFormat::Csv,
        }
    }
}

/// Reads `user_id,item_index,value` rows. Item indices must be below `n`.
pub fn load_events(path: &Path, format: EventFormat, n: usize, has_header: bool) -> Result<Vec<EventRecord>> {
    let file = std::fs::File::open(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_events(file, format, n, has_header)
}

pub fn parse_events<R: Read>(reader: R, format: EventFormat, n: usize, has_header: bool) -> Result<Vec<EventRecord>> {
    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(format.delimiter())
        .has_headers(has_header)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(reader);
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| Error::Parse {
            line: e.position().map_or(0, |p| p.line() as usize),
            message: e.to_string(),
        })?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        let err = |message: String| Error::Parse { line, message };
        if rec.len() != 3 {
            return Err(err(format!("expected 3 fields, found {}", rec.len())));
        }
        let user_id = rec[0].to_string();
        if user_id.is_empty() {
            return Err(err("empty user id".into()));
        }
        let item_index: usize = rec[1]
            .parse()
            .map_err(|_| err(format!("bad item index {:?}", &rec[1])))?;
        if item_index >= n {
            return Err(err(format!("item index {item_index} >= dimension {n}")));
        }
        let value: f64 = rec[2].parse().map_err(|_| err(format!("bad value {:?}", &rec[2])))?;
        if !value.is_finite() {
            return Err(err(format!("non-finite value {value}")));
        }
        out.push(EventRecord {
            user_id,
            item_index,
            value,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VectorMode {
    /// Subtract each user's mean over rated items; unrated items stay 0.
    RatingCentered,
    /// Use the values as given.
    RawCounts,
}

/// Groups events into one sparse vector per user, ids in ascending order.
/// Duplicate `(user, item)` pairs keep the last value. Users whose vector is
/// all zero are dropped.
pub fn build_vectors(events: &[EventRecord], n: usize, mode: VectorMode) -> Result<Dataset> {
    if n == 0 {
        return Err(invalid("dimension must be >= 1"));
    }
    let mut users: BTreeMap<&str, BTreeMap<usize, f64>> = BTreeMap::new();
    for e in events {
        if e.item_index >= n {
            return Err(Error::OutOfRange(format!(
                "item index {} >= dimension {n}",
                e.item_index
            )));
        }
        users.entry(&e.user_id).or_default().insert(e.item_index, e.value);
    }
    let mut rows = Vec::with_capacity(users.len());
    let mut dropped = 0usize;
    for (user, items) in users {
        let shift = match mode {
            VectorMode::RatingCentered => items.values().sum::<f64>() / items.len() as f64,
            VectorMode::RawCounts => 0.0,
        };
        let v = SparseVector::from_unsorted(n, items.into_iter().map(|(i, x)| (i, x - shift)))?;
        if v.nnz() == 0 {
            dropped += 1;
            continue;
        }
        rows.push((user.to_string(), Vector::Sparse(v)));
    }
    if dropped > 0 {
        log::warn!("dropped {dropped} user(s) with all-zero vectors");
    }
    Dataset::new(rows)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TruncationStrategy {
    /// Keep the items with the most nonzero entries across users.
    MostPopular,
}

/// Keeps `n_keep` items, re-indexed in their original order. Support ties
/// prefer the lower original index. Users left all-zero are dropped.
pub fn truncate_dimensions(s: &Dataset, n_keep: usize, strategy: TruncationStrategy) -> Result<Dataset> {
    let n = s.dim();
    if n_keep == 0 || n_keep > n {
        return Err(invalid(format!("cannot keep {n_keep} of {n} dimensions")));
    }
    let TruncationStrategy::MostPopular = strategy;
    let mut support = vec![0usize; n];
    for v in s.vectors() {
        match v {
            Vector::Sparse(sv) => sv.indices().iter().for_each(|&i| support[i] += 1),
            Vector::Dense(dv) => dv
                .values()
                .iter()
                .enumerate()
                .filter(|(_, x)| **x != 0.0)
                .for_each(|(i, _)| support[i] += 1),
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| support[b].cmp(&support[a]).then(a.cmp(&b)));
    let mut kept = order[..n_keep].to_vec();
    kept.sort_unstable();
    let mut remap = vec![usize::MAX; n];
    for (new, &old) in kept.iter().enumerate() {
        remap[old] = new;
    }
    let mut rows = Vec::with_capacity(s.len());
    let mut dropped = 0usize;
    for (id, v) in s.iter() {
        let entries: Vec<(usize, f64)> = match v {
            Vector::Sparse(sv) => sv.iter().collect(),
            Vector::Dense(dv) => dv
                .values()
                .iter()
                .copied()
                .enumerate()
                .filter(|(_, x)| *x != 0.0)
                .collect(),
        };
        let entries: Vec<(usize, f64)> = entries
            .into_iter()
            .filter(|(i, _)| remap[*i] != usize::MAX)
            .map(|(i, x)| (remap[i], x))
            .collect();
        if entries.is_empty() {
            dropped += 1;
            continue;
        }
        rows.push((id.to_string(), Vector::Sparse(SparseVector::new(n_keep, entries)?)));
    }
    if dropped > 0 {
        log::warn!("truncation dropped {dropped} user(s) left with all-zero vectors");
    }
    Dataset::new(rows)
}

/// Parameters of a synthetic clustered dataset.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub n: usize,
    pub clusters: usize,
    pub users_per_cluster: usize,
    /// Angular distance of members from their cluster center, in (0, 0.5).
    pub sigma_theta: f64,
    pub seed: u64,
}

impl SynthSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.clusters == 0 || self.users_per_cluster == 0 {
            return Err(invalid("n, clusters and users_per_cluster must be >= 1"));
        }
        if !(self.sigma_theta > 0.0 && self.sigma_theta < 0.5) {
            return Err(invalid(format!(
                "sigma_theta must be in (0, 0.5), got {}",
                self.sigma_theta
            )));
        }
        if self.clusters > self.n {
            return Err(invalid(format!(
                "{} mutually orthogonal centers do not fit in dimension {}",
                self.clusters, self.n
            )));
        }
        Ok(())
    }
}

fn gaussian_vec(n: usize, r: &mut impl rand::RngCore) -> Vec<f64> {
    (0..n).map(|_| rng::standard_normal(r)).collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn unit(mut v: Vec<f64>) -> Option<Vec<f64>> {
    let norm = dot(&v, &v).sqrt();
    if norm < 1e-12 {
        return None;
    }
    v.iter_mut().for_each(|x| *x /= norm);
    Some(v)
}

/// Clustered unit vectors. Centers are mutually orthogonal (angular distance
/// 0.5); each member sits at angular distance drawn uniformly from
/// `[σ_θ/2, σ_θ]` from its center, in a random direction orthogonal to it.
/// Ids are `c{cluster}-u{member}`, zero padded.
pub fn synthesize(spec: &SynthSpec) -> Result<Dataset> {
    spec.validate()?;
    let n = spec.n;
    let mut r = rng::substream(spec.seed, 0);
    let mut centers: Vec<Vec<f64>> = Vec::with_capacity(spec.clusters);
    while centers.len() < spec.clusters {
        let mut v = gaussian_vec(n, &mut r);
        for c in &centers {
            let p = dot(&v, c);
            v.iter_mut().zip(c).for_each(|(x, y)| *x -= p * y);
        }
        if let Some(u) = unit(v) {
            centers.push(u);
        }
    }
    let width = |count: usize| count.saturating_sub(1).to_string().len().max(2);
    let (cw, uw) = (width(spec.clusters), width(spec.users_per_cluster));
    let mut rows = Vec::with_capacity(spec.clusters * spec.users_per_cluster);
    for (ci, c) in centers.iter().enumerate() {
        for ui in 0..spec.users_per_cluster {
            let angle = PI * spec.sigma_theta * (0.5 + 0.5 * rng::open_unit(&mut r));
            let dir = loop {
                let mut v = gaussian_vec(n, &mut r);
                let p = dot(&v, c);
                v.iter_mut().zip(c).for_each(|(x, y)| *x -= p * y);
                if n == 1 {
                    break None;
                }
                if let Some(u) = unit(v) {
                    break Some(u);
                }
            };
            let member: Vec<f64> = match dir {
                Some(d) => c
                    .iter()
                    .zip(&d)
                    .map(|(a, b)| angle.cos() * a + angle.sin() * b)
                    .collect(),
                None => c.clone(),
            };
            rows.push((
                format!("c{ci:0cw$}-u{ui:0uw$}"),
                Vector::Dense(DenseVector::new(member)?),
            ));
        }
    }
    Dataset::new(rows)
}

pub const SNAPSHOT_MAGIC: &str = "lshxdp-dataset v1";

/// Writes a dataset as text: a version line, `dim <n>`, then one line per
/// user sorted by id, `id<TAB>idx:value idx:value ...` with ascending indices.
pub fn write_snapshot<W: Write>(s: &Dataset, mut w: W) -> Result<()> {
    writeln!(w, "{SNAPSHOT_MAGIC}")?;
    writeln!(w, "dim {}", s.dim())?;
    let mut rows: Vec<(&str, &Vector)> = s.iter().collect();
    rows.sort_by(|a, b| a.0.cmp(b.0));
    for (id, v) in rows {
        if id.contains(['\t', '\n']) {
            return Err(invalid(format!("id {id:?} cannot be written to a snapshot")));
        }
        let mut line = String::with_capacity(16 * v.nnz());
        line.push_str(id);
        line.push('\t');
        let entries: Vec<(usize, f64)> = match v {
            Vector::Sparse(sv) => sv.iter().collect(),
            Vector::Dense(dv) => dv.to_sparse().iter().collect(),
        };
        for (j, (i, x)) in entries.iter().enumerate() {
            if j > 0 {
                line.push(' ');
            }
            write!(line, "{i}:{x:?}").expect("write to string");
        }
        writeln!(w, "{line}")?;
    }
    Ok(())
}

/// Reads a snapshot written by [`write_snapshot`]; rows come back sparse.
pub fn read_snapshot<R: BufRead>(r: R) -> Result<Dataset> {
    let mut lines = r.lines().enumerate();
    let mut next = |what: &str| -> Result<(usize, String)> {
        match lines.next() {
            Some((i, l)) => Ok((i + 1, l?)),
            None => Err(Error::Parse {
                line: 0,
                message: format!("missing {what}"),
            }),
        }
    };
    let (_, magic) = next("header")?;
    if magic.trim() != SNAPSHOT_MAGIC {
        return Err(Error::Parse {
            line: 1,
            message: format!("expected {SNAPSHOT_MAGIC:?}, found {magic:?}"),
        });
    }
    let (ln, dim_line) = next("dimension line")?;
    let dim: usize = dim_line
        .strip_prefix("dim ")
        .and_then(|d| d.trim().parse().ok())
        .ok_or_else(|| Error::Parse {
            line: ln,
            message: format!("bad dimension line {dim_line:?}"),
        })?;
    let mut rows = Vec::new();
    for (i, line) in lines {
        let line = line?;
        let ln = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let perr = |message: String| Error::Parse { line: ln, message };
        let (id, body) = line
            .split_once('\t')
            .ok_or_else(|| perr("missing tab after id".into()))?;
        let mut entries = Vec::new();
        for tok in body.split_whitespace() {
            let (i, x) = tok.split_once(':').ok_or_else(|| perr(format!("bad entry {tok:?}")))?;
            let i: usize = i.parse().map_err(|_| perr(format!("bad index in {tok:?}")))?;
            let x: f64 = x.parse().map_err(|_| perr(format!("bad value in {tok:?}")))?;
            entries.push((i, x));
        }
        let v = SparseVector::new(dim, entries).map_err(|e| perr(e.to_string()))?;
        rows.push((id.to_string(), Vector::Sparse(v)));
    }
    Dataset::new(rows)
}
