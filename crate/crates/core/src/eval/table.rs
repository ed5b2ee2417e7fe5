use std::fmt::Write as _;

use crate::eval::EvalReport;
use crate::pipeline::Preset;

pub const CHANCE_LABEL: &str = "Chance rate (Percentage of majority class)";
pub const BASELINE2_LABEL: &str = "Baseline 2 (Fixation SVM)";

/// `(label, accuracy %)` rows in comparison-table order. Methods without a
/// report, and the fixation SVM baseline, have no value.
pub fn comparison_rows(reports: &[EvalReport]) -> Vec<(String, Option<f64>)> {
    let chance = reports.first().map(|r| r.chance_rate_pct);
    let mut rows = vec![(CHANCE_LABEL.to_owned(), chance)];
    for preset in Preset::ALL {
        let acc = reports
            .iter()
            .find(|r| r.method == preset.name())
            .map(|r| r.accuracy_pct);
        rows.push((preset.label().to_owned(), acc));
        if preset == Preset::Baseline1 {
            rows.push((BASELINE2_LABEL.to_owned(), None));
        }
    }
    rows
}

fn cell(v: Option<f64>) -> String {
    v.map_or_else(|| "n/a".to_owned(), |a| format!("{a:.1}"))
}

/// Markdown table with a `Method` and an `Accuracy (%)` column.
pub fn render_comparison(reports: &[EvalReport]) -> String {
    let mut out = String::from("| Method | Accuracy (%) |\n|---|---:|\n");
    for (label, acc) in comparison_rows(reports) {
        let _ = writeln!(out, "| {label} | {} |", cell(acc));
    }
    out
}

pub fn comparison_csv(reports: &[EvalReport]) -> String {
    let mut out = String::from("method,accuracy_pct\n");
    for (label, acc) in comparison_rows(reports) {
        let _ = writeln!(
            out,
            "\"{label}\",{}",
            acc.map_or_else(String::new, |a| a.to_string())
        );
    }
    out
}
