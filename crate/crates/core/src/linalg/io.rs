use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{c64, CMat, UnitaryMatrix, TAU_U};
use crate::error::{Error, Result};

/// On-disk matrix: `{"dim": d, "re": [[..]], "im": [[..]]}`, row-major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatrixFile {
    pub dim: usize,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

impl MatrixFile {
    pub fn from_matrix(m: &CMat) -> Self {
        let dim = m.nrows();
        let re = (0..dim)
            .map(|i| (0..dim).map(|j| m[(i, j)].re).collect())
            .collect();
        let im = (0..dim)
            .map(|i| (0..dim).map(|j| m[(i, j)].im).collect())
            .collect();
        MatrixFile { dim, re, im }
    }

    pub fn to_matrix(&self) -> Result<CMat> {
        let d = self.dim;
        let shape_ok = self.re.len() == d
            && self.im.len() == d
            && self.re.iter().all(|r| r.len() == d)
            && self.im.iter().all(|r| r.len() == d);
        if !shape_ok || d == 0 {
            return Err(Error::Validation(format!(
                "matrix file rows do not match dim {d}"
            )));
        }
        Ok(CMat::from_fn(d, d, |i, j| c64(self.re[i][j], self.im[i][j])))
    }
}

/// Reads a matrix file; with `check` the matrix must be unitary within `TAU_U`.
pub fn read_matrix(path: impl AsRef<Path>, check: bool) -> Result<UnitaryMatrix> {
    let text = fs::read_to_string(path)?;
    let file: MatrixFile = serde_json::from_str(&text)?;
    let m = file.to_matrix()?;
    if check {
        UnitaryMatrix::with_tolerance(m, TAU_U)
    } else {
        Ok(UnitaryMatrix::new_unchecked(m))
    }
}

pub fn write_matrix(path: impl AsRef<Path>, m: &CMat) -> Result<()> {
    let text = serde_json::to_string(&MatrixFile::from_matrix(m))?;
    fs::write(path, text)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::haar_random;

    #[test]
    fn round_trip_is_exact() {
        let u = haar_random(4, 2);
        let dir = std::env::temp_dir().join(format!("spinchain-io-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        let path = dir.join("u.json");
        write_matrix(&path, u.matrix()).unwrap();
        let back = read_matrix(&path, true).unwrap();
        assert_eq!(back, u);
        fs::remove_dir_all(dir).ok();
    }

    #[test]
    fn rejects_ragged_rows() {
        let f = MatrixFile {
            dim: 2,
            re: vec![vec![1.0, 0.0], vec![0.0]],
            im: vec![vec![0.0, 0.0], vec![0.0, 0.0]],
        };
        assert!(f.to_matrix().is_err());
    }

    #[test]
    fn non_unitary_needs_no_check() {
        let f = MatrixFile {
            dim: 1,
            re: vec![vec![2.0]],
            im: vec![vec![0.0]],
        };
        let dir = std::env::temp_dir().join(format!("spinchain-io2-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        let path = dir.join("m.json");
        fs::write(&path, serde_json::to_string(&f).unwrap()).unwrap();
        assert!(matches!(read_matrix(&path, true), Err(Error::Validation(_))));
        assert!(read_matrix(&path, false).is_ok());
        fs::remove_dir_all(dir).ok();
    }
}
