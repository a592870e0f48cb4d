//! JSON coefficient files with an explicit power window.
//!
//! `entries[i][j][k] = [re, im]` is the coefficient of `t^(min_power + k)` in
//! entry `(i, j)`; every entry is padded to the shared window.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{FactorError, Result};
use crate::laurent::{LaurentMatrix, LaurentPoly};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoefficientFile {
    pub rows: usize,
    pub cols: usize,
    pub min_power: i64,
    pub max_power: i64,
    pub entries: Vec<Vec<Vec<[f64; 2]>>>,
}

impl CoefficientFile {
    pub fn from_matrix(m: &LaurentMatrix) -> Self {
        let (lo, hi) = m.window();
        let entries = (0..m.rows())
            .map(|i| {
                (0..m.cols())
                    .map(|j| {
                        let p = m.get(i, j);
                        (lo..=hi).map(|n| {
                            let z = p.coeff(n);
                            [z.re, z.im]
                        })
                        .collect()
                    })
                    .collect()
            })
            .collect();
        Self {
            rows: m.rows(),
            cols: m.cols(),
            min_power: lo,
            max_power: hi,
            entries,
        }
    }

    /// Checks shapes and finiteness.
    pub fn validate(&self) -> Result<()> {
        if self.max_power < self.min_power {
            return Err(FactorError::InvalidInput(format!(
                "max_power {} below min_power {}",
                self.max_power, self.min_power
            )));
        }
        let len = (self.max_power - self.min_power + 1) as usize;
        if self.entries.len() != self.rows || self.entries.iter().any(|row| row.len() != self.cols) {
            return Err(FactorError::InvalidInput(format!(
                "entries do not form a {}x{} array",
                self.rows, self.cols
            )));
        }
        for (i, row) in self.entries.iter().enumerate() {
            for (j, e) in row.iter().enumerate() {
                if e.len() != len {
                    return Err(FactorError::InvalidInput(format!(
                        "entry ({i},{j}) has {} coefficients, window needs {len}",
                        e.len()
                    )));
                }
                if e.iter().flatten().any(|x| !x.is_finite()) {
                    return Err(FactorError::InvalidInput(format!("entry ({i},{j}) is not finite")));
                }
            }
        }
        Ok(())
    }

    pub fn to_matrix(&self) -> Result<LaurentMatrix> {
        self.validate()?;
        let entries = self
            .entries
            .iter()
            .flatten()
            .map(|e| LaurentPoly::new(self.min_power, e.iter().map(|&[re, im]| Complex64::new(re, im)).collect()))
            .collect();
        LaurentMatrix::new(self.rows, self.cols, entries)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: Self =
            serde_json::from_str(text).map_err(|e| FactorError::InvalidInput(format!("coefficient file: {e}")))?;
        file.validate()?;
        Ok(file)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data serializes")
    }
}
