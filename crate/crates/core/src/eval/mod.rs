//! Leave-one-scene-out evaluation, ROC/AUC, comparison tables and PCA
//! loading reports.

mod cv;
mod folds;
mod loadings;
mod roc;
mod table;

pub use cv::{
    run_cv, run_memory_sweep, Confusion, CvData, EvalMethod, EvalReport, FoldResult,
    MemorySweepEntry, MemorySweepReport,
};
pub use folds::{make_folds, Fold, FoldPlan};
pub use loadings::{
    fit_feature_pca, hv_dwell_loading_trend, pca_report, ComponentLoadings, LoadingTable,
    BOLD_LOADING,
};
pub use roc::{mann_whitney_auc, roc_auc, RocCurve, RocPoint};
pub use table::{
    comparison_csv, comparison_rows, render_comparison, BASELINE2_LABEL, CHANCE_LABEL,
};
