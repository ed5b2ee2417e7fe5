use ndarray::{Array1, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Per-class sample weights.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassWeights {
    pub positive: f64,
    pub negative: f64,
}

impl ClassWeights {
    pub fn uniform() -> Self {
        Self {
            positive: 1.0,
            negative: 1.0,
        }
    }

    /// `n_total / (2 * n_class)` for each class.
    pub fn balanced(y: &[bool]) -> Result<Self> {
        let pos = y.iter().filter(|v| **v).count();
        let neg = y.len() - pos;
        if pos == 0 || neg == 0 {
            return Err(Error::SingleClass);
        }
        let n = y.len() as f64;
        Ok(Self {
            positive: n / (2.0 * pos as f64),
            negative: n / (2.0 * neg as f64),
        })
    }

    pub fn of(&self, label: bool) -> f64 {
        if label {
            self.positive
        } else {
            self.negative
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SvmConfig {
    /// Hinge-loss weight.
    pub c: f64,
    pub max_iter: usize,
    /// Relative improvement of the best objective below which training stops.
    pub tol: f64,
    /// Iterations over which the improvement is measured.
    pub patience: usize,
    /// Multiplier on the base step `1 / (C * W * R)`.
    pub step_scale: f64,
}

impl Default for SvmConfig {
    fn default() -> Self {
        Self {
            c: 1.0,
            max_iter: 20_000,
            tol: 1e-8,
            patience: 500,
            step_scale: 1.0,
        }
    }
}

/// Linear soft-margin classifier `w . x + b`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearSvm {
    pub weights: Vec<f64>,
    pub bias: f64,
    pub c: f64,
    pub class_weights: ClassWeights,
}

impl LinearSvm {
    pub fn decision(&self, x: &[f64]) -> f64 {
        self.weights.iter().zip(x).map(|(w, v)| w * v).sum::<f64>() + self.bias
    }

    /// `0.5 |w|^2 + C * sum_i cw(y_i) * max(0, 1 - y_i (w . x_i + b))`.
    pub fn objective(&self, x: ArrayView2<f64>, y: &[bool]) -> f64 {
        objective(&self.weights, self.bias, x, y, self.c, &self.class_weights)
    }
}

fn sign(label: bool) -> f64 {
    if label {
        1.0
    } else {
        -1.0
    }
}

fn objective(w: &[f64], b: f64, x: ArrayView2<f64>, y: &[bool], c: f64, cw: &ClassWeights) -> f64 {
    let reg = 0.5 * w.iter().map(|v| v * v).sum::<f64>();
    let loss: f64 = x
        .rows()
        .into_iter()
        .zip(y)
        .map(|(row, &label)| {
            let m = row.iter().zip(w).map(|(a, b)| a * b).sum::<f64>() + b;
            cw.of(label) * (1.0 - sign(label) * m).max(0.0)
        })
        .sum();
    reg + c * loss
}

#[derive(Debug, Clone)]
pub struct SvmFit {
    pub model: LinearSvm,
    /// Best objective seen after each iteration (nonincreasing).
    pub objective_log: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

/// Full-batch subgradient descent from the origin with step
/// `step_scale / (C W R sqrt(t + 1))`, where `W` is the total sample weight
/// and `R` the largest augmented row norm. The best iterate is returned.
pub fn train_svm(
    x: ArrayView2<f64>,
    y: &[bool],
    class_weights: ClassWeights,
    config: &SvmConfig,
) -> Result<SvmFit> {
    let (n, d) = x.dim();
    if n != y.len() {
        return Err(Error::invalid("labels", "row/label count mismatch"));
    }
    if !y.iter().any(|v| *v) || y.iter().all(|v| *v) {
        return Err(Error::SingleClass);
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("SVM input".into()));
    }
    let c = config.c;
    let total_weight: f64 = y.iter().map(|&l| class_weights.of(l)).sum();
    let radius = x
        .rows()
        .into_iter()
        .map(|r| (1.0 + r.dot(&r)).sqrt())
        .fold(1.0, f64::max);
    let eta0 = config.step_scale / (c * total_weight * radius);

    let mut w = Array1::<f64>::zeros(d);
    let mut b = 0.0;
    let mut best_w = w.to_vec();
    let mut best_b = b;
    let mut best = f64::INFINITY;
    let mut log = Vec::with_capacity(config.max_iter.min(1 << 16));
    let mut converged = false;
    let mut iterations = 0;

    for t in 0..config.max_iter {
        iterations = t + 1;
        let mut gw = w.clone();
        let mut gb = 0.0;
        let mut loss = 0.0;
        for (row, &label) in x.rows().into_iter().zip(y) {
            let s = sign(label);
            let slack = 1.0 - s * (row.dot(&w) + b);
            if slack > 0.0 {
                let cw = class_weights.of(label);
                loss += cw * slack;
                let f = c * cw * s;
                gw.scaled_add(-f, &row);
                gb -= f;
            }
        }
        let f = 0.5 * w.dot(&w) + c * loss;
        if !f.is_finite() {
            return Err(Error::Divergence);
        }
        if f < best {
            best = f;
            best_w.copy_from_slice(w.as_slice().expect("contiguous"));
            best_b = b;
        }
        log.push(best);
        if t >= config.patience {
            let before = log[t - config.patience];
            if before - best <= config.tol * best.abs().max(1.0) {
                converged = true;
                break;
            }
        }
        let eta = eta0 / ((t + 1) as f64).sqrt();
        w.scaled_add(-eta, &gw);
        b -= eta * gb;
    }

    Ok(SvmFit {
        model: LinearSvm {
            weights: best_w,
            bias: best_b,
            c,
            class_weights,
        },
        objective_log: log,
        iterations,
        converged,
    })
}
