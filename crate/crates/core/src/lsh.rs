//! Random-projection LSH for angular distance.
//!
//! A κ-bit family is κ hyperplane normals with i.i.d. standard-normal entries.
//! Bit `i` of the hash of `x` is 1 iff `rᵢ·x >= 0`. The normals are never
//! stored on disk: [`FamilySpec`] carries `(version, seed, n, κ)` and the
//! matrix is re-derived bit-exactly from it.

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, invalid, Error, Result};
use crate::par;
use crate::rng::{self, PRNG_VERSION};
use crate::vectors::{BitString, RealVector};

/// Serializable identity of a hash family.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FamilySpec {
    pub version: String,
    pub seed: u64,
    pub n: usize,
    pub kappa: usize,
}

impl FamilySpec {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("family spec serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| invalid(format!("bad family spec: {e}")))
    }

    /// Regenerates the family, refusing specs written by a different generator.
    pub fn build(&self) -> Result<ProjectionFamily> {
        if self.version != PRNG_VERSION {
            return Err(invalid(format!(
                "family version {:?} does not match this build ({PRNG_VERSION:?})",
                self.version
            )));
        }
        sample_family(self.n, self.kappa, self.seed)
    }
}

/// κ hyperplane normals over ℝⁿ, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectionFamily {
    n: usize,
    kappa: usize,
    seed: u64,
    normals: Vec<f64>,
}

impl ProjectionFamily {
    /// A family with explicitly given normals (one row per bit). Used for
    /// worked examples and tests; the seed is recorded as 0.
    pub fn from_normals(rows: Vec<Vec<f64>>) -> Result<Self> {
        let kappa = rows.len();
        let n = rows.first().map_or(0, Vec::len);
        if kappa == 0 || n == 0 {
            return Err(invalid("family needs at least one non-empty row"));
        }
        let mut normals = Vec::with_capacity(kappa * n);
        for (i, row) in rows.into_iter().enumerate() {
            check_dim(n, row.len())?;
            if row.iter().all(|v| *v == 0.0) || row.iter().any(|v| !v.is_finite()) {
                return Err(invalid(format!("row {i} must be finite and nonzero")));
            }
            normals.extend(row);
        }
        Ok(Self {
            n,
            kappa,
            seed: 0,
            normals,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn kappa(&self) -> usize {
        self.kappa
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn version(&self) -> &'static str {
        PRNG_VERSION
    }

    pub fn spec(&self) -> FamilySpec {
        FamilySpec {
            version: PRNG_VERSION.to_string(),
            seed: self.seed,
            n: self.n,
            kappa: self.kappa,
        }
    }

    pub fn normal(&self, i: usize) -> &[f64] {
        &self.normals[i * self.n..(i + 1) * self.n]
    }

    pub fn normals(&self) -> impl Iterator<Item = &[f64]> {
        self.normals.chunks_exact(self.n)
    }

    /// Raw projections `rᵢ·x` for every bit.
    pub fn project(&self, x: &impl RealVector) -> Result<Vec<f64>> {
        let v = x.view();
        check_dim(self.n, v.dim())?;
        Ok(self.normals().map(|r| v.dot_dense(r)).collect())
    }
}

/// Draws `κ·n` standard normals. Row `i` comes from ChaCha20 stream `i` of
/// `seed`, so rows can be generated independently and in parallel.
pub fn sample_family(n: usize, kappa: usize, seed: u64) -> Result<ProjectionFamily> {
    if n == 0 || kappa == 0 {
        return Err(invalid(format!(
            "family needs n >= 1 and kappa >= 1, got n={n}, kappa={kappa}"
        )));
    }
    let rows = par::map_indices(kappa, |i| {
        let mut rng = rng::substream(seed, i as u64);
        loop {
            let row: Vec<f64> = (0..n).map(|_| rng::standard_normal(&mut rng)).collect();
            // An all-zero row is impossible with inversion sampling, but the
            // invariant is cheap to keep.
            if row.iter().any(|v| *v != 0.0) {
                return row;
            }
        }
    });
    Ok(ProjectionFamily {
        n,
        kappa,
        seed,
        normals: rows.concat(),
    })
}

/// κ-bit hash of `x`: bit `i` is 1 iff `rᵢ·x >= 0`.
pub fn hash(fam: &ProjectionFamily, x: &impl RealVector) -> Result<BitString> {
    let v = x.view();
    check_dim(fam.n, v.dim())?;
    let is_zero = match v {
        crate::vectors::VecRef::Dense(d) => d.iter().all(|x| *x == 0.0),
        crate::vectors::VecRef::Sparse { values, .. } => values.is_empty(),
    };
    if is_zero {
        return Err(Error::ZeroVector);
    }
    let mut out = BitString::zeros(fam.kappa)?;
    for (i, r) in fam.normals().enumerate() {
        if v.dot_dense(r) >= 0.0 {
            out.set(i, true);
        }
    }
    Ok(out)
}

/// Hashes every vector under the same family, preserving order.
pub fn hash_dataset<V: RealVector + Sync>(fam: &ProjectionFamily, xs: &[V]) -> Result<Vec<BitString>> {
    par::try_map_slice(xs, |x| hash(fam, x))
}
