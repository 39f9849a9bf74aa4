//! Dense least squares via Householder QR.

use nalgebra::{DMatrix, DVector};

use super::StatsError;

/// Relative threshold on `|R_jj| / max_i |R_ii|` below which the design is
/// treated as rank deficient.
const RANK_TOL: f64 = 1e-10;

pub(crate) struct LeastSquares {
    pub coef: Vec<f64>,
    pub residuals: Vec<f64>,
    pub ssr: f64,
    /// Upper-triangular factor of the design, `k x k`.
    r: DMatrix<f64>,
    dof: usize,
}

impl LeastSquares {
    /// Fits `response ~ design` where `design` is `n x k`, column major.
    pub fn fit(design: DMatrix<f64>, response: &[f64]) -> Result<Self, StatsError> {
        let (n, k) = design.shape();
        debug_assert_eq!(n, response.len());
        if n <= k {
            return Err(StatsError::TooShort {
                needed: k + 1,
                got: n,
            });
        }

        let qr = design.clone().qr();
        let r = qr.r();
        let scale = r.diagonal().iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        if scale == 0.0 || r.diagonal().iter().any(|v| v.abs() <= RANK_TOL * scale) {
            return Err(StatsError::SingularDesign);
        }

        let mut qty = DVector::from_column_slice(response);
        qr.q_tr_mul(&mut qty);
        let head = qty.rows(0, k).into_owned();
        let coef = r
            .solve_upper_triangular(&head)
            .ok_or(StatsError::SingularDesign)?;

        let fitted = &design * &coef;
        let residuals: Vec<f64> = response
            .iter()
            .zip(fitted.iter())
            .map(|(y, f)| y - f)
            .collect();
        let ssr = residuals.iter().map(|e| e * e).sum();

        Ok(Self {
            coef: coef.iter().copied().collect(),
            residuals,
            ssr,
            r,
            dof: n - k,
        })
    }

    /// Classical (homoskedastic) standard error of coefficient `j`.
    pub fn std_error(&self, j: usize) -> Option<f64> {
        let k = self.r.nrows();
        let mut unit = DVector::zeros(k);
        unit[j] = 1.0;
        // diag((R^T R)^-1)_j = |R^-T e_j|^2
        let z = self.r.transpose().solve_lower_triangular(&unit)?;
        let sigma2 = self.ssr / self.dof as f64;
        Some((sigma2 * z.norm_squared()).sqrt())
    }
}
