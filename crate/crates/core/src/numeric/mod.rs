//! Hand-written numeric primitives. All fitting is single-threaded and
//! deterministic: the same inputs give bit-identical parameters.

mod logistic;
mod pca;
mod scaler;
mod svm;

pub use logistic::{
    objective_gradient as logistic_objective_gradient, train_logistic, LogisticConfig,
    LogisticModel,
};
pub use pca::{fit_pca, symmetric_eigen, PcaBasis};
pub use scaler::MinMaxScaler;
pub use svm::{train_svm, ClassWeights, LinearSvm, SvmConfig, SvmFit};

/// Logistic link used to turn margins into probabilities.
pub fn sigmoid(margin: f64) -> f64 {
    if margin >= 0.0 {
        1.0 / (1.0 + (-margin).exp())
    } else {
        let e = margin.exp();
        e / (1.0 + e)
    }
}
