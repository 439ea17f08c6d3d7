//! Least squares over the probability simplex: projected gradient, then an
//! exact solve on the detected support.

use nalgebra::{DMatrix, DVector, SVD};

/// Euclidean projection onto `{x : x ≥ 0, Σx = 1}` (sort-based, exact).
pub fn project_to_simplex(v: &[f64]) -> Vec<f64> {
    let mut u = v.to_vec();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut cumsum = 0.0;
    let mut tau = 0.0;
    for (k, &uk) in u.iter().enumerate() {
        cumsum += uk;
        let t = (cumsum - 1.0) / (k + 1) as f64;
        if uk - t > 0.0 {
            tau = t;
        }
    }
    v.iter().map(|&x| (x - tau).max(0.0)).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimplexFit {
    pub solution: Vec<f64>,
    pub objective: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Objective after every iterate, starting with the initial point.
    pub trace: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimplexSettings {
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for SimplexSettings {
    fn default() -> Self {
        SimplexSettings {
            tolerance: 1e-10,
            max_iterations: 10_000,
        }
    }
}

/// Minimizes `‖Xβ − y‖² + ridge·‖β‖²` over the simplex, starting at `start`.
///
/// The step is `1/L` with `L` twice the largest eigenvalue of `XᵀX + ridge·I`
/// (power iteration), so the objective never increases. Stops when the
/// gradient-mapping norm drops to the tolerance.
///
/// Plain gradient steps crawl when `X` is badly conditioned, which is the
/// normal case for trajectories that settle quickly. The gradient phase is
/// therefore followed by an equality-constrained solve on a candidate
/// support; that point replaces the iterate only if it is feasible
/// and lowers the objective, so the trace stays non-increasing.
pub fn simplex_least_squares(
    x: &DMatrix<f64>,
    y: &DVector<f64>,
    ridge: f64,
    start: &[f64],
    settings: SimplexSettings,
) -> SimplexFit {
    let k = x.ncols();
    let mut gram = x.transpose() * x;
    for d in 0..k {
        gram[(d, d)] += ridge;
    }
    let xty = x.transpose() * y;
    let objective = |b: &DVector<f64>| residual(x, y, ridge, b);

    let lipschitz = 2.0 * largest_eigenvalue(&gram) * (1.0 + 1e-9);
    let mut beta = DVector::from_column_slice(&project_to_simplex(start));
    let mut f = objective(&beta);
    let mut trace = vec![f];
    if lipschitz <= 0.0 {
        // X = 0 and no ridge: every feasible point is optimal
        return SimplexFit {
            solution: beta.iter().copied().collect(),
            objective: f,
            iterations: 0,
            converged: true,
            trace,
        };
    }
    let step = 1.0 / lipschitz;
    let mut converged = false;
    let mut iterations = 0;
    while iterations < settings.max_iterations {
        let grad = 2.0 * (&gram * &beta - &xty);
        let trial: Vec<f64> = (&beta - step * &grad).iter().copied().collect();
        let next = DVector::from_vec(project_to_simplex(&trial));
        let mapping = (&beta - &next).norm() * lipschitz;
        iterations += 1;
        let f_next = objective(&next);
        beta = next;
        f = f_next;
        trace.push(f);
        if mapping <= settings.tolerance {
            converged = true;
            break;
        }
    }
    if let Some(polished) = polish(x, y, ridge, &beta) {
        let f_polished = objective(&polished);
        if f_polished <= f {
            beta = polished;
            f = f_polished;
            trace.push(f);
            converged = converged || kkt_holds(&gram, &xty, &beta);
        }
    }
    SimplexFit {
        solution: beta.iter().copied().collect(),
        objective: f,
        iterations,
        converged,
        trace,
    }
}

/// Evaluated from the residual rather than the Gram form, which loses digits
/// once the fit is nearly exact.
fn residual(x: &DMatrix<f64>, y: &DVector<f64>, ridge: f64, b: &DVector<f64>) -> f64 {
    (x * b - y).norm_squared() + ridge * b.norm_squared()
}

/// Minimizer over `{Σβ = 1, β_k = 0 off the support}`, shrinking the support
/// while the solution has negative entries. Tries the full index set first,
/// then the gradient phase's support.
fn polish(x: &DMatrix<f64>, y: &DVector<f64>, ridge: f64, beta: &DVector<f64>) -> Option<DVector<f64>> {
    let k = x.ncols();
    let starts = [(0..k).collect::<Vec<_>>(), (0..k).filter(|&d| beta[d] > 0.0).collect()];
    let mut best: Option<(f64, DVector<f64>)> = None;
    for start in starts {
        let mut support = start;
        while !support.is_empty() {
            let Some(sol) = solve_on_support(x, y, ridge, &support) else {
                break;
            };
            if sol.iter().all(|&v| v >= 0.0) {
                let r = residual(x, y, ridge, &sol);
                if best.as_ref().is_none_or(|(rb, _)| r < *rb) {
                    best = Some((r, sol));
                }
                break;
            }
            support.retain(|&d| sol[d] > 0.0);
        }
    }
    best.map(|(_, b)| b)
}

fn solve_on_support(x: &DMatrix<f64>, y: &DVector<f64>, ridge: f64, support: &[usize]) -> Option<DVector<f64>> {
    let k = x.ncols();
    let mut full = DVector::zeros(k);
    // eliminate the last support coordinate: β_last = 1 − Σ β_free
    let (&last, free) = support.split_last()?;
    if free.is_empty() {
        full[last] = 1.0;
        return Some(full);
    }
    let m = x.nrows();
    let extra = if ridge > 0.0 { free.len() + 1 } else { 0 };
    let mut a = DMatrix::zeros(m + extra, free.len());
    let mut b = DVector::zeros(m + extra);
    for r in 0..m {
        for (c, &d) in free.iter().enumerate() {
            a[(r, c)] = x[(r, d)] - x[(r, last)];
        }
        b[r] = y[r] - x[(r, last)];
    }
    if ridge > 0.0 {
        let q = ridge.sqrt();
        for c in 0..free.len() {
            a[(m + c, c)] = q;
            a[(m + free.len(), c)] = q;
        }
        b[m + free.len()] = q;
    }
    let svd = SVD::new(a, true, true);
    let eps = svd.singular_values.max() * 1e-13;
    let sol = svd.solve(&b, eps).ok()?;
    for (c, &d) in free.iter().enumerate() {
        full[d] = sol[c];
    }
    full[last] = 1.0 - sol.sum();
    Some(full)
}

/// First-order optimality on the simplex: equal gradients on the support,
/// no smaller gradient off it.
fn kkt_holds(gram: &DMatrix<f64>, xty: &DVector<f64>, beta: &DVector<f64>) -> bool {
    let grad = 2.0 * (gram * beta - xty);
    let scale = 1e-8 * (1.0 + grad.amax());
    let on: Vec<f64> = (0..beta.len()).filter(|&d| beta[d] > 0.0).map(|d| grad[d]).collect();
    let lo = on.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = on.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    hi - lo <= scale && (0..beta.len()).all(|d| beta[d] > 0.0 || grad[d] >= lo - scale)
}

fn largest_eigenvalue(m: &DMatrix<f64>) -> f64 {
    let k = m.nrows();
    let mut v = DVector::from_element(k, 1.0 / (k as f64).sqrt());
    let mut lambda = 0.0;
    for _ in 0..1000 {
        let w = m * &v;
        let norm = w.norm();
        if norm == 0.0 {
            return 0.0;
        }
        let next = v.dot(&w);
        v = w / norm;
        if (next - lambda).abs() <= 1e-14 * next.abs() {
            return next.max(norm);
        }
        lambda = next;
    }
    lambda
}
