//! Hidden-unitary instances and their JSON file format.

use std::fs;
use std::path::Path;

use gaussian_tomo_core::linalg::{RealMatrix, RealVector};
use gaussian_tomo_core::rng::{stream, stream_rng};
use gaussian_tomo_core::symplectic::random_symplectic;
use gaussian_tomo_core::{GaussianState, GaussianUnitary, SymplecticMatrix};
use rand::{Rng, RngCore};
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};

pub const INSTANCE_SCHEMA: u32 = 1;

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixRecord {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl MatrixRecord {
    pub fn from_matrix(m: &RealMatrix) -> Self {
        let data = (0..m.nrows())
            .flat_map(|i| (0..m.ncols()).map(move |j| (i, j)))
            .map(|(i, j)| m[(i, j)])
            .collect();
        MatrixRecord {
            rows: m.nrows(),
            cols: m.ncols(),
            data,
        }
    }

    pub fn to_matrix(&self) -> std::result::Result<RealMatrix, String> {
        if self.data.len() != self.rows * self.cols {
            return Err(format!(
                "matrix declares {}x{} but has {} entries",
                self.rows,
                self.cols,
                self.data.len()
            ));
        }
        Ok(RealMatrix::from_row_slice(self.rows, self.cols, &self.data))
    }
}

/// A hidden unitary `G_{r,S}` on disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub schema_version: u32,
    pub m: usize,
    /// `‖S‖∞` bound the instance was drawn with.
    pub z: f64,
    #[serde(default)]
    pub seed: Option<u64>,
    pub r: Vec<f64>,
    pub s: MatrixRecord,
}

impl InstanceFile {
    pub fn from_unitary(g: &GaussianUnitary, z: f64, seed: Option<u64>) -> Self {
        InstanceFile {
            schema_version: INSTANCE_SCHEMA,
            m: g.modes(),
            z,
            seed,
            r: g.displacement().iter().copied().collect(),
            s: MatrixRecord::from_matrix(g.symplectic().as_matrix()),
        }
    }

    pub fn to_unitary(&self) -> std::result::Result<GaussianUnitary, String> {
        if self.schema_version != INSTANCE_SCHEMA {
            return Err(format!("unsupported instance schema_version {}", self.schema_version));
        }
        let s = self.s.to_matrix()?;
        if s.nrows() != 2 * self.m || s.ncols() != 2 * self.m {
            return Err(format!("S must be {0}x{0} for m = {1}", 2 * self.m, self.m));
        }
        let s = SymplecticMatrix::try_from_matrix(s).map_err(|e| e.to_string())?;
        GaussianUnitary::new(RealVector::from_vec(self.r.clone()), s).map_err(|e| e.to_string())
    }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).expect("records serialize");
    text.push('\n');
    write_atomic(path, text.as_bytes())
}

/// Writes through a sibling temporary file and a rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    fs::write(&tmp, bytes).map_err(|e| HarnessError::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| HarnessError::io(path, e))
}

pub fn read_instance(path: &Path) -> Result<InstanceFile> {
    let text = fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| HarnessError::Format {
        path: path.to_owned(),
        detail: e.to_string(),
    })
}

/// Random `G_{r,S}` with `S = random_symplectic(m, z_max)` and `r ~ N(0, r_scale²)`.
/// When `pin_z` is false, `z_max` is drawn uniformly from `[1, z]`.
pub fn random_unitary(m: usize, z: f64, r_scale: f64, pin_z: bool, seed: u64) -> Result<GaussianUnitary> {
    let mut rng = stream_rng(seed, 0, stream::INSTANCE);
    let z_max = if pin_z { z } else { 1.0 + (z - 1.0) * rng.random::<f64>() };
    let s = random_symplectic(m, z_max, rng.next_u64())?;
    let r = RealVector::from_fn(2 * m, |_, _| r_scale * Distribution::<f64>::sample(&StandardNormal, &mut rng));
    Ok(GaussianUnitary::new(r, s)?)
}

/// Random mixed Gaussian state `S (⊕ ν_j 1) Sᵀ` with thermal factors in
/// `[1, 3]`, `‖S‖∞ ≤ z_max` and a standard normal mean.
pub fn random_state(m: usize, z_max: f64, seed: u64) -> Result<GaussianState> {
    let mut rng = stream_rng(seed, 0, stream::AUX);
    let z = 1.0 + (z_max - 1.0) * rng.random::<f64>();
    let s = random_symplectic(m, z, rng.next_u64())?;
    let nus: Vec<f64> = (0..m).map(|_| 1.0 + 2.0 * rng.random::<f64>()).collect();
    let d = RealMatrix::from_diagonal(&RealVector::from_fn(2 * m, |i, _| nus[i / 2]));
    let cov = s.as_matrix() * d * s.as_matrix().transpose();
    let cov = (&cov + cov.transpose()) * 0.5;
    let mean = RealVector::from_fn(2 * m, |_, _| StandardNormal.sample(&mut rng));
    Ok(GaussianState::new(mean, cov)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matrix_record_round_trip() {
        let m = RealMatrix::from_fn(3, 2, |i, j| (i as f64 + 0.1) / (j as f64 + 3.0));
        let rec = MatrixRecord::from_matrix(&m);
        assert_eq!(rec.data[1], m[(0, 1)]);
        let json = serde_json::to_string(&rec).unwrap();
        let back: MatrixRecord = serde_json::from_str(&json).unwrap();
        assert_eq!(back.to_matrix().unwrap(), m);
    }

    #[test]
    fn instance_round_trip_is_exact() {
        let g = random_unitary(3, 2.5, 1.0, true, 17).unwrap();
        let file = InstanceFile::from_unitary(&g, 2.5, Some(17));
        let json = serde_json::to_string(&file).unwrap();
        let back: InstanceFile = serde_json::from_str(&json).unwrap();
        assert_eq!(back.to_unitary().unwrap(), g);
    }

    #[test]
    fn random_state_is_physical() {
        for seed in 0..10 {
            let s = random_state(2, 3.0, seed).unwrap();
            s.validate().unwrap();
        }
    }

    #[test]
    fn rejects_non_symplectic_file() {
        let mut file = InstanceFile::from_unitary(&GaussianUnitary::identity(1), 1.0, None);
        file.s.data[0] = 2.0;
        assert!(file.to_unitary().is_err());
    }
}
