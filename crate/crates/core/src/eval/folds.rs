use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scene::Dataset;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fold {
    pub test_scene: String,
    pub train_scenes: Vec<String>,
}

/// Leave-one-scene-out split, one fold per scene in scene-id order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldPlan {
    pub folds: Vec<Fold>,
}

impl FoldPlan {
    pub fn from_scene_ids<S: AsRef<str>>(ids: &[S]) -> Result<Self> {
        let mut ids: Vec<String> = ids.iter().map(|s| s.as_ref().to_owned()).collect();
        ids.sort();
        ids.dedup();
        if ids.len() < 2 {
            return Err(Error::invalid(
                "scenes",
                format!(
                    "cross validation needs at least 2 scenes, found {}",
                    ids.len()
                ),
            ));
        }
        let folds = ids
            .iter()
            .map(|test| Fold {
                test_scene: test.clone(),
                train_scenes: ids.iter().filter(|s| *s != test).cloned().collect(),
            })
            .collect();
        Ok(Self { folds })
    }

    pub fn len(&self) -> usize {
        self.folds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.folds.is_empty()
    }
}

pub fn make_folds(ds: &Dataset) -> Result<FoldPlan> {
    let ids: Vec<&str> = ds.scenes.iter().map(|s| s.scene_id.as_str()).collect();
    FoldPlan::from_scene_ids(&ids)
}
