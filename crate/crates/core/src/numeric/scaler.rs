use ndarray::{Array2, ArrayView2, Axis};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Per-column min-max normalization learned on training rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinMaxScaler {
    pub min: Vec<f64>,
    pub max: Vec<f64>,
}

impl MinMaxScaler {
    pub fn fit(x: ArrayView2<f64>) -> Result<Self> {
        if x.nrows() == 0 || x.ncols() == 0 {
            return Err(Error::Empty("min-max scaler input".into()));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("min-max scaler input".into()));
        }
        let min = x
            .axis_iter(Axis(1))
            .map(|c| c.iter().copied().fold(f64::INFINITY, f64::min))
            .collect();
        let max = x
            .axis_iter(Axis(1))
            .map(|c| c.iter().copied().fold(f64::NEG_INFINITY, f64::max))
            .collect();
        Ok(Self { min, max })
    }

    pub fn transform_row(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .zip(self.min.iter().zip(&self.max))
            .map(|(v, (lo, hi))| if hi > lo { (v - lo) / (hi - lo) } else { 0.0 })
            .collect()
    }

    /// Test-time values outside the training range are not clipped.
    pub fn transform(&self, x: ArrayView2<f64>) -> Result<Array2<f64>> {
        if x.ncols() != self.min.len() {
            return Err(Error::invalid(
                "columns",
                format!(
                    "scaler fitted on {} columns, got {}",
                    self.min.len(),
                    x.ncols()
                ),
            ));
        }
        let mut out = x.to_owned();
        for (mut c, (lo, hi)) in out
            .axis_iter_mut(Axis(1))
            .zip(self.min.iter().zip(&self.max))
        {
            if hi > lo {
                let span = hi - lo;
                c.mapv_inplace(|v| (v - lo) / span);
            } else {
                c.fill(0.0);
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use proptest::prelude::*;

    #[test]
    fn scales_columns() {
        let x = array![[2.0, 5.0], [4.0, 5.0], [6.0, 5.0]];
        let s = MinMaxScaler::fit(x.view()).unwrap();
        let y = s.transform(x.view()).unwrap();
        assert_eq!(y, array![[0.0, 0.0], [0.5, 0.0], [1.0, 0.0]]);
    }

    #[test]
    fn does_not_clip() {
        let s = MinMaxScaler::fit(array![[0.0], [10.0]].view()).unwrap();
        assert_eq!(s.transform(array![[12.0]].view()).unwrap()[[0, 0]], 1.2);
        assert_eq!(s.transform_row(&[-5.0]), vec![-0.5]);
    }

    #[test]
    fn rejects_empty() {
        assert!(MinMaxScaler::fit(Array2::<f64>::zeros((0, 3)).view()).is_err());
    }

    proptest! {
        #[test]
        fn training_extremes_map_to_unit_interval(
            data in proptest::collection::vec(-1e3f64..1e3, 6..60)
        ) {
            let n = data.len() / 3;
            let x = Array2::from_shape_vec((n, 3), data[..n * 3].to_vec()).unwrap();
            let s = MinMaxScaler::fit(x.view()).unwrap();
            let y = s.transform(x.view()).unwrap();
            for (j, c) in y.axis_iter(Axis(1)).enumerate() {
                let lo = c.iter().copied().fold(f64::INFINITY, f64::min);
                let hi = c.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                if s.max[j] > s.min[j] {
                    prop_assert_eq!(lo, 0.0);
                    prop_assert_eq!(hi, 1.0);
                }
            }
        }
    }
}
