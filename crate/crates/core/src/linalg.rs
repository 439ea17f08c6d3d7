//! Dense direct solves for the small systems that show up in fixed-point
//! evaluation. Factorizations use partial pivoting; every system is screened
//! with a Hager-style estimate of the reciprocal 1-norm condition number.

use nalgebra::{DMatrix, DVector, Dyn, LU};

use crate::error::{Error, Result};

/// Systems whose reciprocal condition estimate falls below this are rejected.
pub const RCOND_THRESHOLD: f64 = 1e-12;

pub(crate) struct LinearSystem {
    lu: LU<f64, Dyn, Dyn>,
    lu_t: LU<f64, Dyn, Dyn>,
    rcond: f64,
}

impl LinearSystem {
    pub fn new(a: DMatrix<f64>) -> Result<Self> {
        debug_assert!(a.is_square());
        let norm_a = one_norm(&a);
        let lu_t = a.transpose().lu();
        let lu = a.lu();
        let mut sys = LinearSystem {
            lu,
            lu_t,
            rcond: 0.0,
        };
        let inv_norm = sys.inverse_one_norm_estimate()?;
        let rcond = 1.0 / (norm_a * inv_norm);
        if !rcond.is_finite() || rcond < RCOND_THRESHOLD {
            return Err(Error::Singular {
                rcond: if rcond.is_finite() { rcond } else { 0.0 },
            });
        }
        sys.rcond = rcond;
        Ok(sys)
    }

    #[allow(dead_code)]
    pub fn rcond(&self) -> f64 {
        self.rcond
    }

    pub fn solve(&self, b: &DVector<f64>) -> Result<DVector<f64>> {
        self.lu.solve(b).ok_or(Error::Singular { rcond: 0.0 })
    }

    /// Solves `Aᵀ x = b`.
    pub fn solve_transpose(&self, b: &DVector<f64>) -> Result<DVector<f64>> {
        self.lu_t.solve(b).ok_or(Error::Singular { rcond: 0.0 })
    }

    // Hager (1984) / Higham estimator for ||A^-1||_1.
    fn inverse_one_norm_estimate(&self) -> Result<f64> {
        let n = self.lu.l().nrows();
        if n == 0 {
            return Ok(0.0);
        }
        let mut x = DVector::from_element(n, 1.0 / n as f64);
        let mut estimate = 0.0;
        for _ in 0..5 {
            let y = self.solve(&x)?;
            estimate = y.iter().map(|v| v.abs()).sum::<f64>();
            let xi = y.map(|v| if v >= 0.0 { 1.0 } else { -1.0 });
            let z = self.solve_transpose(&xi)?;
            let (jmax, zmax) = z
                .iter()
                .enumerate()
                .map(|(j, v)| (j, v.abs()))
                .fold((0, f64::NEG_INFINITY), |acc, it| if it.1 > acc.1 { it } else { acc });
            if zmax <= z.dot(&x) {
                break;
            }
            x = DVector::zeros(n);
            x[jmax] = 1.0;
        }
        Ok(estimate)
    }
}

fn one_norm(a: &DMatrix<f64>) -> f64 {
    a.column_iter()
        .map(|c| c.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}
