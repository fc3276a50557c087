//! Real vectors, bitstrings and the three distances used throughout the
//! crate: angular, Euclidean and Hamming.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, invalid, Error, Result};

/// A dense real vector with at least one entry, all finite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct DenseVector {
    values: Vec<f64>,
}

impl DenseVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(invalid("dense vector must have dimension >= 1"));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(invalid(format!("non-finite entry at index {i}")));
        }
        Ok(Self { values })
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn norm(&self) -> f64 {
        norm(self.view())
    }

    pub fn scale(&self, c: f64) -> Result<Self> {
        Self::new(self.values.iter().map(|v| v * c).collect())
    }

    /// Sparse copy with the zero entries dropped.
    pub fn to_sparse(&self) -> SparseVector {
        let (indices, values) = self
            .values
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != 0.0)
            .map(|(i, v)| (i, *v))
            .unzip();
        SparseVector {
            dim: self.dim(),
            indices,
            values,
        }
    }
}

impl TryFrom<Vec<f64>> for DenseVector {
    type Error = Error;
    fn try_from(values: Vec<f64>) -> Result<Self> {
        Self::new(values)
    }
}

impl From<DenseVector> for Vec<f64> {
    fn from(v: DenseVector) -> Self {
        v.values
    }
}

/// A sparse real vector: strictly increasing in-range indices, no stored zeros.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SparseRepr", into = "SparseRepr")]
pub struct SparseVector {
    dim: usize,
    indices: Vec<usize>,
    values: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct SparseRepr {
    dim: usize,
    entries: Vec<(usize, f64)>,
}

impl TryFrom<SparseRepr> for SparseVector {
    type Error = Error;
    fn try_from(r: SparseRepr) -> Result<Self> {
        Self::new(r.dim, r.entries)
    }
}

impl From<SparseVector> for SparseRepr {
    fn from(v: SparseVector) -> Self {
        SparseRepr {
            dim: v.dim,
            entries: v.indices.into_iter().zip(v.values).collect(),
        }
    }
}

impl SparseVector {
    /// Entries must be sorted by strictly increasing index; zero values are
    /// rejected so that the nonzero count is meaningful.
    pub fn new(dim: usize, entries: Vec<(usize, f64)>) -> Result<Self> {
        if dim == 0 {
            return Err(invalid("sparse vector must have dimension >= 1"));
        }
        let mut prev: Option<usize> = None;
        for &(i, v) in &entries {
            if i >= dim {
                return Err(Error::OutOfRange(format!("index {i} >= dimension {dim}")));
            }
            if prev.is_some_and(|p| i <= p) {
                return Err(invalid("sparse indices must be strictly increasing"));
            }
            if v == 0.0 {
                return Err(invalid(format!("stored zero at index {i}")));
            }
            if !v.is_finite() {
                return Err(invalid(format!("non-finite entry at index {i}")));
            }
            prev = Some(i);
        }
        let (indices, values) = entries.into_iter().unzip();
        Ok(Self { dim, indices, values })
    }

    /// Builds from unsorted entries, dropping zeros. Later duplicates win.
    pub fn from_unsorted(dim: usize, entries: impl IntoIterator<Item = (usize, f64)>) -> Result<Self> {
        let mut map = std::collections::BTreeMap::new();
        for (i, v) in entries {
            map.insert(i, v);
        }
        Self::new(dim, map.into_iter().filter(|(_, v)| *v != 0.0).collect())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.indices.len()
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.indices.iter().copied().zip(self.values.iter().copied())
    }

    pub fn norm(&self) -> f64 {
        norm(self.view())
    }

    pub fn to_dense(&self) -> DenseVector {
        let mut values = vec![0.0; self.dim];
        for (i, v) in self.iter() {
            values[i] = v;
        }
        DenseVector { values }
    }
}

/// Either representation; the element type of datasets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Vector {
    Dense(DenseVector),
    Sparse(SparseVector),
}

impl Vector {
    pub fn dim(&self) -> usize {
        match self {
            Vector::Dense(d) => d.dim(),
            Vector::Sparse(s) => s.dim(),
        }
    }

    pub fn to_dense(&self) -> DenseVector {
        match self {
            Vector::Dense(d) => d.clone(),
            Vector::Sparse(s) => s.to_dense(),
        }
    }

    pub fn nnz(&self) -> usize {
        match self {
            Vector::Dense(d) => d.values().iter().filter(|v| **v != 0.0).count(),
            Vector::Sparse(s) => s.nnz(),
        }
    }
}

impl From<DenseVector> for Vector {
    fn from(v: DenseVector) -> Self {
        Vector::Dense(v)
    }
}

impl From<SparseVector> for Vector {
    fn from(v: SparseVector) -> Self {
        Vector::Sparse(v)
    }
}

/// Borrowed view over either representation.
#[derive(Debug, Clone, Copy)]
pub enum VecRef<'a> {
    Dense(&'a [f64]),
    Sparse {
        dim: usize,
        indices: &'a [usize],
        values: &'a [f64],
    },
}

impl VecRef<'_> {
    pub fn dim(&self) -> usize {
        match self {
            VecRef::Dense(v) => v.len(),
            VecRef::Sparse { dim, .. } => *dim,
        }
    }

    /// Inner product with a dense row of the same dimension. Sparse inputs
    /// touch only their nonzeros.
    pub fn dot_dense(&self, row: &[f64]) -> f64 {
        match self {
            VecRef::Dense(v) => v.iter().zip(row).map(|(a, b)| a * b).sum(),
            VecRef::Sparse { indices, values, .. } => indices.iter().zip(*values).map(|(&i, v)| row[i] * v).sum(),
        }
    }
}

/// Anything that can be viewed as a real vector.
pub trait RealVector: Sync {
    fn view(&self) -> VecRef<'_>;

    fn dimension(&self) -> usize {
        self.view().dim()
    }
}

impl RealVector for DenseVector {
    fn view(&self) -> VecRef<'_> {
        VecRef::Dense(&self.values)
    }
}

impl RealVector for SparseVector {
    fn view(&self) -> VecRef<'_> {
        VecRef::Sparse {
            dim: self.dim,
            indices: &self.indices,
            values: &self.values,
        }
    }
}

impl RealVector for Vector {
    fn view(&self) -> VecRef<'_> {
        match self {
            Vector::Dense(d) => d.view(),
            Vector::Sparse(s) => s.view(),
        }
    }
}

impl<T: RealVector + ?Sized> RealVector for &T {
    fn view(&self) -> VecRef<'_> {
        (**self).view()
    }
}

fn dot(a: VecRef<'_>, b: VecRef<'_>) -> f64 {
    match (a, b) {
        (VecRef::Dense(x), _) => b.dot_dense(x),
        (_, VecRef::Dense(y)) => a.dot_dense(y),
        (
            VecRef::Sparse {
                indices: ia,
                values: va,
                ..
            },
            VecRef::Sparse {
                indices: ib,
                values: vb,
                ..
            },
        ) => {
            let (mut i, mut j, mut acc) = (0, 0, 0.0);
            while i < ia.len() && j < ib.len() {
                match ia[i].cmp(&ib[j]) {
                    std::cmp::Ordering::Less => i += 1,
                    std::cmp::Ordering::Greater => j += 1,
                    std::cmp::Ordering::Equal => {
                        acc += va[i] * vb[j];
                        i += 1;
                        j += 1;
                    }
                }
            }
            acc
        }
    }
}

fn norm(a: VecRef<'_>) -> f64 {
    match a {
        VecRef::Dense(v) => v.iter().map(|x| x * x).sum::<f64>().sqrt(),
        VecRef::Sparse { values, .. } => values.iter().map(|x| x * x).sum::<f64>().sqrt(),
    }
}

/// Inner product of two vectors of equal dimension.
pub fn inner_product(a: &impl RealVector, b: &impl RealVector) -> Result<f64> {
    let (a, b) = (a.view(), b.view());
    check_dim(a.dim(), b.dim())?;
    Ok(dot(a, b))
}

/// Scales `x` to unit Euclidean norm.
pub fn normalize(x: &DenseVector) -> Result<DenseVector> {
    let n = x.norm();
    if n == 0.0 {
        return Err(Error::ZeroVector);
    }
    Ok(DenseVector {
        values: x.values.iter().map(|v| v / n).collect(),
    })
}

/// Cosine similarity, clamped to [-1, 1].
pub fn cosine_similarity(a: &impl RealVector, b: &impl RealVector) -> Result<f64> {
    let (va, vb) = (a.view(), b.view());
    check_dim(va.dim(), vb.dim())?;
    let (na, nb) = (norm(va), norm(vb));
    if na == 0.0 || nb == 0.0 {
        return Err(Error::ZeroVector);
    }
    Ok((dot(va, vb) / (na * nb)).clamp(-1.0, 1.0))
}

/// Angular distance `arccos(cos_sim) / pi`, in [0, 1].
pub fn angular_distance(a: &impl RealVector, b: &impl RealVector) -> Result<f64> {
    Ok(cosine_similarity(a, b)?.acos() / PI)
}

pub fn euclidean_distance(a: &impl RealVector, b: &impl RealVector) -> Result<f64> {
    let (va, vb) = (a.view(), b.view());
    check_dim(va.dim(), vb.dim())?;
    let sq = match (va, vb) {
        (VecRef::Dense(x), VecRef::Dense(y)) => x.iter().zip(y).map(|(p, q)| (p - q) * (p - q)).sum::<f64>(),
        _ => {
            // ||a-b||^2 over the union of supports, computed without cancellation.
            let da = to_dense_vec(va);
            let db = to_dense_vec(vb);
            da.iter().zip(&db).map(|(p, q)| (p - q) * (p - q)).sum()
        }
    };
    Ok(sq.sqrt())
}

fn to_dense_vec(v: VecRef<'_>) -> Vec<f64> {
    match v {
        VecRef::Dense(x) => x.to_vec(),
        VecRef::Sparse { dim, indices, values } => {
            let mut out = vec![0.0; dim];
            for (&i, &x) in indices.iter().zip(values) {
                out[i] = x;
            }
            out
        }
    }
}

/// Euclidean distance between unit vectors at angular distance `d_theta`.
pub fn angular_to_euclidean(d_theta: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&d_theta) {
        return Err(Error::OutOfRange(format!("angular distance {d_theta} not in [0, 1]")));
    }
    // sqrt(2 - 2 cos(pi d)) written as 2 sin(pi d / 2), which stays accurate near 0.
    Ok(2.0 * (PI * d_theta / 2.0).sin())
}

/// Inverse of [`angular_to_euclidean`].
pub fn euclidean_to_angular(d_euc: f64) -> Result<f64> {
    if !(0.0..=2.0).contains(&d_euc) {
        return Err(Error::OutOfRange(format!("euclidean distance {d_euc} not in [0, 2]")));
    }
    Ok(2.0 * (d_euc / 2.0).clamp(0.0, 1.0).asin() / PI)
}

/// A fixed-length string of bits, packed little-endian into 64-bit words.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitString {
    len: usize,
    words: Vec<u64>,
}

impl BitString {
    pub fn zeros(len: usize) -> Result<Self> {
        if len == 0 {
            return Err(invalid("bitstring length must be >= 1"));
        }
        Ok(Self {
            len,
            words: vec![0; len.div_ceil(64)],
        })
    }

    pub fn from_bools(bits: &[bool]) -> Result<Self> {
        let mut out = Self::zeros(bits.len())?;
        for (i, &b) in bits.iter().enumerate() {
            out.set(i, b);
        }
        Ok(out)
    }

    pub fn len(&self) -> usize {
        self.len
    }

    /// Always false; kept for API symmetry with `len`.
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "bit index {i} out of range {}", self.len);
        (self.words[i / 64] >> (i % 64)) & 1 == 1
    }

    pub fn set(&mut self, i: usize, bit: bool) {
        assert!(i < self.len, "bit index {i} out of range {}", self.len);
        let mask = 1u64 << (i % 64);
        if bit {
            self.words[i / 64] |= mask;
        } else {
            self.words[i / 64] &= !mask;
        }
    }

    pub fn flip(&mut self, i: usize) {
        assert!(i < self.len, "bit index {i} out of range {}", self.len);
        self.words[i / 64] ^= 1u64 << (i % 64);
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }

    pub fn count_ones(&self) -> u32 {
        self.words.iter().map(|w| w.count_ones()).sum()
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }
}

/// Number of positions at which `a` and `b` differ.
pub fn hamming_distance(a: &BitString, b: &BitString) -> Result<usize> {
    if a.len != b.len {
        return Err(Error::DimensionMismatch {
            expected: a.len,
            actual: b.len,
        });
    }
    Ok(a.words
        .iter()
        .zip(&b.words)
        .map(|(x, y)| (x ^ y).count_ones() as usize)
        .sum())
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in self.iter() {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitString({self})")
    }
}

impl FromStr for BitString {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let bits = s
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(invalid(format!("invalid bit character {other:?}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_bools(&bits)
    }
}

impl Serialize for BitString {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for BitString {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
