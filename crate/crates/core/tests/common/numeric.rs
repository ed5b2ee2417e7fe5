//! Independent numeric references: nalgebra eigendecomposition and
//! pairwise AUC.

use nalgebra::{DMatrix, SymmetricEigen};
use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use sa_core::eval::roc_auc;
use sa_core::numeric::fit_pca;

/// Correlated 50x30 matrix: a random mixing of standard normals.
pub fn random_matrix(rng: &mut ChaCha8Rng) -> Array2<f64> {
    let (n, d) = (50, 30);
    let z = Array2::from_shape_fn((n, d), |_| StandardNormal.sample(rng));
    let mix = Array2::from_shape_fn((d, d), |_| {
        let v: f64 = StandardNormal.sample(rng);
        v * rng.random_range(0.1..2.0)
    });
    z.dot(&mix)
}

pub fn nalgebra_spectrum(x: &Array2<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let (n, d) = x.dim();
    let m = DMatrix::from_fn(n, d, |i, j| x[[i, j]]);
    let mean = m.row_mean();
    let mut centered = m.clone();
    for mut row in centered.row_iter_mut() {
        row -= &mean;
    }
    let cov = centered.transpose() * &centered / (n as f64 - 1.0);
    let eig = SymmetricEigen::new(cov);
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let values = order.iter().map(|&i| eig.eigenvalues[i].max(0.0)).collect();
    let vectors = DMatrix::from_fn(d, d, |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

pub fn pair_count_auc(scores: &[f64], labels: &[bool]) -> f64 {
    let mut wins = 0.0;
    let mut pairs = 0.0;
    for (i, &si) in scores.iter().enumerate() {
        if !labels[i] {
            continue;
        }
        for (j, &sj) in scores.iter().enumerate() {
            if labels[j] {
                continue;
            }
            pairs += 1.0;
            if si > sj {
                wins += 1.0;
            } else if si == sj {
                wins += 0.5;
            }
        }
    }
    wins / pairs
}

/// Random score/label set; every third case uses a coarse score grid so
/// ties are common.
pub fn random_scores(rng: &mut ChaCha8Rng, case: usize) -> (Vec<f64>, Vec<bool>) {
    let n = rng.random_range(2..200);
    let mut labels: Vec<bool> = (0..n).map(|_| rng.random_bool(0.45)).collect();
    labels[0] = true;
    labels[1] = false;
    let levels = if case.is_multiple_of(3) { 5.0 } else { 1e6 };
    let scores = (0..n)
        .map(|i| {
            let shift = if labels[i] { 0.3 } else { 0.0 };
            let raw: f64 = rng.random::<f64>() + shift;
            (raw * levels).round() / levels
        })
        .collect();
    (scores, labels)
}

/// Largest |trapezoid - pair count| over `cases` random sets.
pub fn auc_max_error(seed: u64, cases: usize) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..cases)
        .map(|case| {
            let (scores, labels) = random_scores(&mut rng, case);
            (roc_auc(&scores, &labels).unwrap().auc - pair_count_auc(&scores, &labels)).abs()
        })
        .fold(0.0, f64::max)
}

/// Worst eigenvalue, variance-ratio and orthonormality errors of a full PCA
/// against nalgebra, eigenvalue error relative to the leading eigenvalue.
pub fn pca_errors(x: &Array2<f64>) -> (f64, f64, f64) {
    let d = x.ncols();
    let basis = fit_pca(x.view(), d).unwrap();
    let (values, _) = nalgebra_spectrum(x);
    let scale = values[0].max(1.0);
    let eig = basis
        .eigenvalues
        .iter()
        .zip(&values)
        .map(|(a, b)| (a - b).abs() / scale)
        .fold(0.0, f64::max);
    let total: f64 = values.iter().sum();
    let ratio = basis
        .full_variance_ratio()
        .iter()
        .zip(&values)
        .map(|(r, v)| (r - v / total).abs())
        .fold(0.0, f64::max);
    let mut ortho: f64 = 0.0;
    for a in 0..d {
        for b in 0..d {
            let dot: f64 = basis.components[a]
                .iter()
                .zip(&basis.components[b])
                .map(|(p, q)| p * q)
                .sum();
            let want = if a == b { 1.0 } else { 0.0 };
            ortho = ortho.max((dot - want).abs());
        }
    }
    (eig, ratio, ortho)
}
