use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::network::InfluenceNetwork;

/// Stubbornness floor under which convergence must be proven some other way.
pub const THETA_MIN: f64 = 1e-6;
/// Row-sum tolerance for the influence matrix.
pub const ROW_SUM_TOL: f64 = 1e-9;
const SPECTRAL_MARGIN: f64 = 1e-9;
const SPECTRAL_MAX_POWER: usize = 10_000;

/// Friedkin-Johnsen parameters over a fixed influence network.
///
/// `influence[(i, j)]` is the weight agent `i` gives in-neighbor `j`; each
/// row sums to one and is zero off the network's support.
#[derive(Debug, Clone, PartialEq)]
pub struct FjParameters {
    network: InfluenceNetwork,
    intrinsic: Vec<f64>,
    stubbornness: Vec<f64>,
    influence: DMatrix<f64>,
}

impl FjParameters {
    pub fn new(
        network: InfluenceNetwork,
        intrinsic: Vec<f64>,
        stubbornness: Vec<f64>,
        influence: DMatrix<f64>,
    ) -> Result<Self> {
        let n = network.agent_count();
        check_unit_vector("s", &intrinsic, n)?;
        check_unit_vector("theta", &stubbornness, n)?;
        if influence.nrows() != n || influence.ncols() != n {
            return Err(Error::DimensionMismatch {
                what: "influence matrix",
                expected: n,
                found: influence.nrows().max(influence.ncols()),
            });
        }
        for i in 0..n {
            let mut sum = 0.0;
            for j in 0..n {
                let w = influence[(i, j)];
                if !w.is_finite() || w < 0.0 {
                    return Err(Error::InvalidParameter(format!(
                        "w[{i}][{j}] = {w} must be a nonnegative finite number"
                    )));
                }
                if w > 0.0 && !network.has_edge(j, i) {
                    return Err(Error::OffSupport { row: i, col: j, value: w });
                }
                sum += w;
            }
            if (sum - 1.0).abs() > ROW_SUM_TOL {
                return Err(Error::NotRowStochastic { row: i, sum });
            }
        }
        let params = FjParameters {
            network,
            intrinsic,
            stubbornness,
            influence,
        };
        params.check_convergence()?;
        Ok(params)
    }

    /// Weights spread evenly over each agent's in-neighbors.
    pub fn uniform_weights(network: &InfluenceNetwork) -> DMatrix<f64> {
        let n = network.agent_count();
        let mut w = DMatrix::zeros(n, n);
        for i in 0..n {
            let nb = network.in_neighbors(i);
            let share = 1.0 / nb.len() as f64;
            for &j in nb {
                w[(i, j)] = share;
            }
        }
        w
    }

    pub fn network(&self) -> &InfluenceNetwork {
        &self.network
    }

    pub fn agent_count(&self) -> usize {
        self.network.agent_count()
    }

    pub fn intrinsic(&self) -> &[f64] {
        &self.intrinsic
    }

    pub fn stubbornness(&self) -> &[f64] {
        &self.stubbornness
    }

    pub fn influence(&self) -> &DMatrix<f64> {
        &self.influence
    }

    /// Same parameters with a replacement influence matrix, fully revalidated.
    pub fn with_influence(&self, influence: DMatrix<f64>) -> Result<Self> {
        Self::new(
            self.network.clone(),
            self.intrinsic.clone(),
            self.stubbornness.clone(),
            influence,
        )
    }

    pub fn with_intrinsic(&self, intrinsic: Vec<f64>) -> Result<Self> {
        Self::new(
            self.network.clone(),
            intrinsic,
            self.stubbornness.clone(),
            self.influence.clone(),
        )
    }

    // Either every theta clears THETA_MIN (row sums of (I-Θ)W are then below
    // one), or ||((I-Θ)W)^k||_inf^(1/k) certifies a spectral radius below 1.
    fn check_convergence(&self) -> Result<()> {
        if self.stubbornness.iter().all(|&t| t >= THETA_MIN) {
            return Ok(());
        }
        let n = self.agent_count();
        let limit = 1.0 - SPECTRAL_MARGIN;
        let mut v = vec![1.0; n];
        let mut next = vec![0.0; n];
        for k in 1..=SPECTRAL_MAX_POWER {
            for i in 0..n {
                let row: f64 = (0..n).map(|j| self.influence[(i, j)] * v[j]).sum();
                next[i] = (1.0 - self.stubbornness[i]) * row;
            }
            std::mem::swap(&mut v, &mut next);
            let norm = v.iter().cloned().fold(0.0, f64::max);
            if norm <= limit.powi(k as i32) {
                return Ok(());
            }
        }
        Err(Error::NotConvergent(format!(
            "some stubbornness is below {THETA_MIN} and the spectral radius of (I-Θ)W \
             could not be certified below {limit}"
        )))
    }
}

pub(crate) fn check_unit_vector(what: &'static str, v: &[f64], n: usize) -> Result<()> {
    if v.len() != n {
        return Err(Error::DimensionMismatch {
            what,
            expected: n,
            found: v.len(),
        });
    }
    for (index, &value) in v.iter().enumerate() {
        if !(0.0..=1.0).contains(&value) {
            return Err(Error::OutOfUnitRange { what, index, value });
        }
    }
    Ok(())
}
