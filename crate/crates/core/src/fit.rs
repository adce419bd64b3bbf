//! Small linear least-squares fits shared by the asymptotic estimators.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub coefficients: Vec<f64>,
    /// Root-mean-square residual.
    pub residual: f64,
}

/// Least squares for `y ≈ Σ_j c_j basis_j`; `rows[i][j]` is basis `j` at
/// sample `i`.
pub fn least_squares(rows: &[Vec<f64>], y: &[f64]) -> Result<LinearFit> {
    let m = rows.len();
    let p = rows.first().map_or(0, |r| r.len());
    if m < p || p == 0 || y.len() != m {
        return Err(Error::InvalidInput(format!("{m} samples cannot fit {p} coefficients")));
    }
    let a = DMatrix::from_fn(m, p, |i, j| rows[i][j]);
    let b = DVector::from_column_slice(y);
    let svd = a.clone().svd(true, true);
    let c = svd
        .solve(&b, 1e-13)
        .map_err(|e| Error::InvalidInput(format!("least squares failed: {e}")))?;
    let res = &a * &c - b;
    Ok(LinearFit {
        coefficients: c.iter().copied().collect(),
        residual: (res.norm_squared() / m as f64).sqrt(),
    })
}
