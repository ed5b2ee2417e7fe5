use std::fmt::Write as _;
use std::io::Write;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::FeatureRow;
use crate::numeric::{fit_pca, MinMaxScaler, PcaBasis};

/// Loadings with larger magnitude are highlighted.
pub const BOLD_LOADING: f64 = 0.2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentLoadings {
    /// 1-based.
    pub component: usize,
    pub contribution_pct: f64,
    pub cumulative_pct: f64,
    pub loadings: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoadingTable {
    pub feature_names: Vec<String>,
    pub components: Vec<ComponentLoadings>,
}

impl LoadingTable {
    /// Cumulative explained variance of the listed components, in percent.
    pub fn cumulative_pct(&self) -> f64 {
        self.components.last().map_or(0.0, |c| c.cumulative_pct)
    }

    pub fn write_csv(&self, out: impl Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec![
            "component".to_owned(),
            "contribution_pct".into(),
            "cumulative_pct".into(),
        ];
        header.extend(self.feature_names.iter().cloned());
        w.write_record(&header)?;
        for c in &self.components {
            let mut rec = vec![
                c.component.to_string(),
                c.contribution_pct.to_string(),
                c.cumulative_pct.to_string(),
            ];
            rec.extend(c.loadings.iter().map(f64::to_string));
            w.write_record(&rec)?;
        }
        w.flush().map_err(csv::Error::from)?;
        Ok(())
    }

    /// One row per component; loadings above the bold threshold are in bold.
    pub fn to_markdown(&self) -> String {
        let mut out = String::from("| # | Contribution (%) | Cumulative (%) |");
        for n in &self.feature_names {
            let _ = write!(out, " {n} |");
        }
        out.push_str("\n|---:|---:|---:|");
        out.push_str(&"---:|".repeat(self.feature_names.len()));
        out.push('\n');
        for c in &self.components {
            let _ = write!(
                out,
                "| {} | {:.1} | {:.1} |",
                c.component, c.contribution_pct, c.cumulative_pct
            );
            for &l in &c.loadings {
                if l.abs() > BOLD_LOADING {
                    let _ = write!(out, " **{l:.2}** |");
                } else {
                    let _ = write!(out, " {l:.2} |");
                }
            }
            out.push('\n');
        }
        out
    }
}

/// Contribution and signed loadings of the first `top_k` components.
pub fn pca_report(
    basis: &PcaBasis,
    feature_names: &[String],
    top_k: usize,
) -> Result<LoadingTable> {
    if top_k == 0 || top_k > basis.k() {
        return Err(Error::OutOfRange {
            what: "top components".into(),
            value: top_k,
            allowed: format!("1..={}", basis.k()),
        });
    }
    if feature_names.len() != basis.dim() {
        return Err(Error::invalid(
            "feature_names",
            format!("{} names for {} columns", feature_names.len(), basis.dim()),
        ));
    }
    let ratios = basis.explained_variance_ratio();
    let mut cumulative = 0.0;
    let components = (0..top_k)
        .map(|j| {
            cumulative += ratios[j];
            ComponentLoadings {
                component: j + 1,
                contribution_pct: 100.0 * ratios[j],
                cumulative_pct: 100.0 * cumulative,
                loadings: basis.components[j].clone(),
            }
        })
        .collect();
    Ok(LoadingTable {
        feature_names: feature_names.to_vec(),
        components,
    })
}

/// Scales the chosen columns to [0, 1] and fits `k` components.
pub fn fit_feature_pca(rows: &[&FeatureRow], columns: &[usize], k: usize) -> Result<PcaBasis> {
    let x = Array2::from_shape_fn((rows.len(), columns.len()), |(i, j)| {
        rows[i].features.values[columns[j]]
    });
    let scaler = MinMaxScaler::fit(x.view())?;
    fit_pca(scaler.transform(x.view())?.view(), k)
}

/// Loadings of the four `HV_dwell` columns on one component (1-based).
pub fn hv_dwell_loading_trend(
    basis: &PcaBasis,
    feature_names: &[String],
    component: usize,
) -> Result<[f64; 4]> {
    if component == 0 || component > basis.k() {
        return Err(Error::OutOfRange {
            what: "component".into(),
            value: component,
            allowed: format!("1..={}", basis.k()),
        });
    }
    let idx: Vec<usize> = feature_names
        .iter()
        .enumerate()
        .filter(|(_, n)| n.starts_with("HV_dwell_"))
        .map(|(i, _)| i)
        .collect();
    if idx.len() != 4 {
        return Err(Error::MissingColumn(format!(
            "expected 4 HV_dwell columns, found {}",
            idx.len()
        )));
    }
    let c = &basis.components[component - 1];
    Ok([c[idx[0]], c[idx[1]], c[idx[2]], c[idx[3]]])
}
