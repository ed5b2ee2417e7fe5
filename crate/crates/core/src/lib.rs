//! Per-object driver situation awareness (SA) prediction.
//!
//! The crate turns registered gaze trajectories and annotated object tracks
//! into a fixed 30-column feature table, trains linear classifiers on top of
//! it (optionally re-ranked by a short-term memory capacity feature), and
//! evaluates them with leave-one-pause-out cross validation.
//!
//! Modules:
//! - [`scene`]: domain types, dataset directory I/O, calibration.
//! - [`features`]: gaze-to-object geometry and the feature families.
//! - [`numeric`]: min-max scaling, PCA, linear SVM, logistic regression.
//! - [`pipeline`]: method presets, the fixation-rule baseline, the
//!   two-stage memory re-ranking classifier.
//! - [`eval`]: pause-out folds, ROC/AUC, reports, PCA loading tables.
//! - [`synth`]: synthetic datasets with planted ground truth.

pub mod error;
pub mod eval;
pub mod features;
pub mod numeric;
pub mod pipeline;
pub mod scene;
pub mod synth;

pub use error::{Error, Result};
pub use features::{
    extract_all, FeatureConfig, FeatureRow, FeatureTable, FeatureVector, ReferenceHeights, RowKey,
    SensoryRadii, FEATURE_COUNT,
};
pub use pipeline::{
    FeatureFamily, MemoryShape, MemorySpec, MethodSpec, PcaK, PipelineConfig, Preset,
    TrainedPipeline,
};
pub use scene::{
    load_dataset, write_dataset, AwarenessLabel, BoundingBox, Dataset, GazeSample, GazeTrack,
    ObjectKind, ObjectProperties, ObjectTrack, SceneRecord,
};
