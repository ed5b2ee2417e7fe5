use ndarray::ArrayView2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{sigmoid, ClassWeights};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LogisticConfig {
    /// L2 penalty on the weights (not the bias).
    pub l2: f64,
    /// Gradient-norm tolerance.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for LogisticConfig {
    fn default() -> Self {
        Self {
            l2: 1e-4,
            tol: 1e-8,
            max_iter: 50_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticModel {
    pub weights: Vec<f64>,
    pub bias: f64,
    /// Final gradient norm; below `tol` when training converged.
    pub grad_norm: f64,
    pub iterations: usize,
}

impl LogisticModel {
    pub fn margin(&self, x: &[f64]) -> f64 {
        self.weights.iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + self.bias
    }

    pub fn predict_proba(&self, x: &[f64]) -> f64 {
        sigmoid(self.margin(x))
    }
}

/// `log(1 + exp(z))` without overflow.
fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

/// Weighted mean negative log-likelihood plus `l2 / 2 |w|^2`, and its
/// gradient. `params` holds the weights followed by the bias.
pub fn objective_gradient(
    params: &[f64],
    x: ArrayView2<f64>,
    y: &[bool],
    class_weights: &ClassWeights,
    l2: f64,
) -> (f64, Vec<f64>) {
    let d = x.ncols();
    let (w, b) = (&params[..d], params[d]);
    let mut grad = vec![0.0; d + 1];
    let mut nll = 0.0;
    let mut total = 0.0;
    for (row, &label) in x.rows().into_iter().zip(y) {
        let cw = class_weights.of(label);
        let s = if label { 1.0 } else { -1.0 };
        let m = row.iter().zip(w).map(|(a, c)| a * c).sum::<f64>() + b;
        nll += cw * softplus(-s * m);
        total += cw;
        let g = -cw * s * sigmoid(-s * m);
        for (gj, xj) in grad.iter_mut().zip(row.iter()) {
            *gj += g * xj;
        }
        grad[d] += g;
    }
    grad.iter_mut().for_each(|g| *g /= total);
    let mut f = nll / total;
    for j in 0..d {
        f += 0.5 * l2 * w[j] * w[j];
        grad[j] += l2 * w[j];
    }
    (f, grad)
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|a| a * a).sum::<f64>().sqrt()
}

/// Class-weighted L2-penalized logistic regression by gradient descent with
/// Barzilai-Borwein steps and an Armijo safeguard, starting at the origin.
pub fn train_logistic(
    x: ArrayView2<f64>,
    y: &[bool],
    class_weights: ClassWeights,
    config: &LogisticConfig,
) -> Result<LogisticModel> {
    if x.nrows() != y.len() {
        return Err(Error::invalid("labels", "row/label count mismatch"));
    }
    if !y.iter().any(|v| *v) || y.iter().all(|v| *v) {
        return Err(Error::SingleClass);
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("logistic input".into()));
    }
    let d = x.ncols();
    let mut p = vec![0.0; d + 1];
    let (mut f, mut g) = objective_gradient(&p, x, y, &class_weights, config.l2);
    let mut step = 1.0;
    let mut iterations = 0;

    while iterations < config.max_iter && norm(&g) >= config.tol {
        iterations += 1;
        let gg: f64 = g.iter().map(|a| a * a).sum();
        let mut trial_step = step;
        let (np, nf, ng) = loop {
            let np: Vec<f64> = p.iter().zip(&g).map(|(a, b)| a - trial_step * b).collect();
            let (nf, ng) = objective_gradient(&np, x, y, &class_weights, config.l2);
            if !nf.is_finite() {
                return Err(Error::Divergence);
            }
            if nf <= f - 1e-4 * trial_step * gg || trial_step < 1e-12 {
                break (np, nf, ng);
            }
            trial_step *= 0.5;
        };
        // Barzilai-Borwein step for the next iteration.
        let s: Vec<f64> = np.iter().zip(&p).map(|(a, b)| a - b).collect();
        let yv: Vec<f64> = ng.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy: f64 = s.iter().zip(&yv).map(|(a, b)| a * b).sum();
        let ss: f64 = s.iter().map(|a| a * a).sum();
        step = if sy > 0.0 {
            (ss / sy).clamp(1e-6, 1e6)
        } else {
            trial_step * 2.0
        };
        if nf >= f && trial_step < 1e-12 {
            p = np;
            g = ng;
            break;
        }
        p = np;
        f = nf;
        g = ng;
    }

    Ok(LogisticModel {
        bias: p[d],
        weights: p[..d].to_vec(),
        grad_norm: norm(&g),
        iterations,
    })
}
