//! Per-class one-vs-rest confusion counts, the five derived metrics, macro
//! averages and report rendering.
//!
//! For a class `c`, predictions are collapsed to "is c" / "is not c":
//!
//! | metric      | formula                         |
//! |-------------|---------------------------------|
//! | accuracy    | (tp + tn) / (tp + fn + fp + tn) |
//! | precision   | tp / (tp + fp)                  |
//! | recall      | tp / (tp + fn)                  |
//! | specificity | tn / (tn + fp)                  |
//! | f1          | 2·p·r / (p + r)                 |
//!
//! A `0/0` precision, recall or f1 evaluates to 0. Specificity with no
//! negative samples (`tn + fp = 0`) is 1: there was nothing to misclassify.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::util::round_half_up;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BinaryConfusion {
    pub tp: u64,
    #[serde(rename = "fn")]
    pub fn_: u64,
    pub fp: u64,
    pub tn: u64,
}

impl BinaryConfusion {
    pub fn total(&self) -> u64 {
        self.tp + self.fn_ + self.fp + self.tn
    }
}

impl std::ops::AddAssign for BinaryConfusion {
    fn add_assign(&mut self, rhs: Self) {
        self.tp += rhs.tp;
        self.fn_ += rhs.fn_;
        self.fp += rhs.fp;
        self.tn += rhs.tn;
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub specificity: f64,
    pub f1: f64,
}

impl ClassMetrics {
    fn fields(&self) -> [f64; 5] {
        [
            self.accuracy,
            self.precision,
            self.recall,
            self.specificity,
            self.f1,
        ]
    }

    fn from_fields(v: [f64; 5]) -> Self {
        ClassMetrics {
            accuracy: v[0],
            precision: v[1],
            recall: v[2],
            specificity: v[3],
            f1: v[4],
        }
    }
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

pub fn compute_metrics(cm: &BinaryConfusion) -> Result<ClassMetrics> {
    let total = cm.total();
    if total == 0 {
        return Err(Error::Empty("confusion matrix has no samples"));
    }
    let precision = ratio(cm.tp, cm.tp + cm.fp);
    let recall = ratio(cm.tp, cm.tp + cm.fn_);
    let f1 = if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    };
    Ok(ClassMetrics {
        accuracy: ratio(cm.tp + cm.tn, total),
        precision,
        recall,
        specificity: if cm.tn + cm.fp == 0 {
            1.0
        } else {
            ratio(cm.tn, cm.tn + cm.fp)
        },
        f1,
    })
}

/// One-vs-rest confusion per schema class, in schema order.
pub fn per_class_confusions<T: AsRef<str>, P: AsRef<str>>(
    y_true: &[T],
    y_pred: &[P],
    schema: &[String],
) -> Result<Vec<BinaryConfusion>> {
    if y_true.len() != y_pred.len() {
        return Err(Error::DimensionMismatch {
            expected: y_true.len(),
            actual: y_pred.len(),
        });
    }
    let index = |label: &str| {
        schema
            .iter()
            .position(|c| c == label)
            .ok_or_else(|| Error::UnknownLabel {
                id: String::new(),
                label: label.to_string(),
            })
    };
    let n = y_true.len() as u64;
    let mut tp = vec![0u64; schema.len()];
    let mut actual = vec![0u64; schema.len()];
    let mut predicted = vec![0u64; schema.len()];
    for (t, p) in y_true.iter().zip(y_pred) {
        let (t, p) = (index(t.as_ref())?, index(p.as_ref())?);
        actual[t] += 1;
        predicted[p] += 1;
        if t == p {
            tp[t] += 1;
        }
    }
    Ok((0..schema.len())
        .map(|k| {
            let fn_ = actual[k] - tp[k];
            let fp = predicted[k] - tp[k];
            BinaryConfusion {
                tp: tp[k],
                fn_,
                fp,
                tn: n - tp[k] - fn_ - fp,
            }
        })
        .collect())
}

/// Field-wise unweighted mean.
pub fn macro_average(rows: &[ClassMetrics]) -> Result<ClassMetrics> {
    if rows.is_empty() {
        return Err(Error::Empty("no metric rows to average"));
    }
    let mut sum = [0.0; 5];
    for row in rows {
        for (s, v) in sum.iter_mut().zip(row.fields()) {
            *s += v;
        }
    }
    let n = rows.len() as f64;
    Ok(ClassMetrics::from_fields(sum.map(|s| s / n)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassReport {
    pub name: String,
    pub confusion: BinaryConfusion,
    pub metrics: ClassMetrics,
}

/// Table-shaped summary: one row per class plus the macro-average row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub classes: Vec<ClassReport>,
    pub average: ClassMetrics,
    pub n: u64,
}

impl MetricsReport {
    pub fn from_predictions<T: AsRef<str>, P: AsRef<str>>(
        y_true: &[T],
        y_pred: &[P],
        schema: &[String],
    ) -> Result<Self> {
        let confusions = per_class_confusions(y_true, y_pred, schema)?;
        let classes = schema
            .iter()
            .zip(confusions)
            .map(|(name, confusion)| {
                Ok(ClassReport {
                    name: name.clone(),
                    metrics: compute_metrics(&confusion)?,
                    confusion,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let rows: Vec<ClassMetrics> = classes.iter().map(|c| c.metrics).collect();
        Ok(MetricsReport {
            average: macro_average(&rows)?,
            classes,
            n: y_true.len() as u64,
        })
    }

    /// Field-wise mean of several reports over the same classes.
    ///
    /// Metrics (per class and average) are averaged; confusion counts and `n`
    /// are summed, so they describe all pooled evaluations.
    pub fn mean_of(reports: &[MetricsReport]) -> Result<Self> {
        let first = reports
            .first()
            .ok_or(Error::Empty("no reports to aggregate"))?;
        let names: Vec<&str> = first.classes.iter().map(|c| c.name.as_str()).collect();
        for r in reports {
            if r.classes
                .iter()
                .map(|c| c.name.as_str())
                .ne(names.iter().copied())
            {
                return Err(Error::InvalidArgument(
                    "reports cover different classes".into(),
                ));
            }
        }
        let classes = (0..names.len())
            .map(|k| {
                let rows: Vec<ClassMetrics> =
                    reports.iter().map(|r| r.classes[k].metrics).collect();
                let mut confusion = BinaryConfusion::default();
                for r in reports {
                    confusion += r.classes[k].confusion;
                }
                Ok(ClassReport {
                    name: names[k].to_string(),
                    confusion,
                    metrics: macro_average(&rows)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let averages: Vec<ClassMetrics> = reports.iter().map(|r| r.average).collect();
        Ok(MetricsReport {
            classes,
            average: macro_average(&averages)?,
            n: reports.iter().map(|r| r.n).sum(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Table,
    Json,
}

/// Percentage with two decimals, rounded half-up: `0.868125` → `"86.81%"`.
pub fn format_percent(fraction: f64) -> String {
    format!("{:.2}%", round_half_up(fraction * 100.0, 2))
}

pub fn render_report(report: &MetricsReport, format: ReportFormat) -> String {
    match format {
        ReportFormat::Json => {
            let mut s = serde_json::to_string_pretty(report).expect("report serializes");
            s.push('\n');
            s
        }
        ReportFormat::Table => render_table(report),
    }
}

fn render_table(report: &MetricsReport) -> String {
    let header = [
        "Class",
        "Accuracy",
        "Precision",
        "Recall",
        "Specificity",
        "F1",
    ];
    let mut rows: Vec<[String; 6]> = report
        .classes
        .iter()
        .map(|c| row_cells(&c.name, &c.metrics))
        .collect();
    rows.push(row_cells("Average", &report.average));

    let mut widths = header.map(|h| h.chars().count());
    for row in &rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }

    let mut out = String::new();
    let line = |out: &mut String, cells: &[&str]| {
        for (k, cell) in cells.iter().enumerate() {
            let pad = widths[k] - cell.chars().count();
            if k == 0 {
                out.push_str(cell);
                out.push_str(&" ".repeat(pad));
            } else {
                out.push_str(" | ");
                out.push_str(&" ".repeat(pad));
                out.push_str(cell);
            }
        }
        out.push('\n');
    };
    line(&mut out, &header);
    let rule: Vec<String> = widths.iter().map(|&w| "-".repeat(w)).collect();
    let _ = writeln!(out, "{}", rule.join("-|-"));
    for row in &rows {
        let cells: Vec<&str> = row.iter().map(String::as_str).collect();
        line(&mut out, &cells);
    }
    out
}

fn row_cells(name: &str, m: &ClassMetrics) -> [String; 6] {
    [
        name.to_string(),
        format_percent(m.accuracy),
        format_percent(m.precision),
        format_percent(m.recall),
        format_percent(m.specificity),
        format_percent(m.f1),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn cm(tp: u64, fn_: u64, fp: u64, tn: u64) -> BinaryConfusion {
        BinaryConfusion { tp, fn_, fp, tn }
    }

    fn schema(names: &[&str]) -> Vec<String> {
        names.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn hand_computed_metrics() {
        let m = compute_metrics(&cm(90, 10, 20, 80)).unwrap();
        assert!((m.accuracy - 0.85).abs() < 1e-12);
        assert!((m.precision - 90.0 / 110.0).abs() < 1e-12);
        assert!((m.recall - 0.9).abs() < 1e-12);
        assert!((m.specificity - 0.8).abs() < 1e-12);
        assert!((m.f1 - 0.857142857142857).abs() < 1e-12);
    }

    #[test]
    fn perfect_positive_class() {
        let m = compute_metrics(&cm(7, 0, 0, 0)).unwrap();
        assert_eq!(m.accuracy, 1.0);
        assert_eq!(m.precision, 1.0);
        assert_eq!(m.recall, 1.0);
        assert_eq!(m.f1, 1.0);
        assert_eq!(m.specificity, 1.0);
    }

    #[test]
    fn never_predicted_class_scores_zero() {
        let m = compute_metrics(&cm(0, 5, 0, 95)).unwrap();
        assert_eq!((m.precision, m.recall, m.f1), (0.0, 0.0, 0.0));
        assert_eq!(m.specificity, 1.0);
        assert!(compute_metrics(&cm(0, 0, 0, 0)).is_err());
    }

    #[test]
    fn hand_counted_confusions() {
        let c = per_class_confusions(
            &["A", "A", "B", "B"],
            &["A", "B", "B", "B"],
            &schema(&["A", "B"]),
        )
        .unwrap();
        assert_eq!(c[0], cm(1, 1, 0, 2));
        assert_eq!(c[1], cm(2, 0, 1, 1));
        assert!(per_class_confusions(&["A"], &["A", "B"], &schema(&["A", "B"])).is_err());
        assert!(per_class_confusions(&["A"], &["Z"], &schema(&["A", "B"])).is_err());
    }

    #[test]
    fn table_average_rows() {
        let acc = |v: f64| ClassMetrics {
            accuracy: v,
            ..Default::default()
        };
        let four_class: Vec<_> = [0.8005, 0.75, 0.9266, 0.9954].map(acc).to_vec();
        assert_eq!(
            format_percent(macro_average(&four_class).unwrap().accuracy),
            "86.81%"
        );
        let three_class: Vec<_> = [0.7836, 0.7150, 0.8605].map(acc).to_vec();
        assert_eq!(
            format_percent(macro_average(&three_class).unwrap().accuracy),
            "78.64%"
        );
        assert_eq!(macro_average(&four_class[..1]).unwrap(), four_class[0]);
        assert!(macro_average(&[]).is_err());
    }

    #[test]
    fn perfect_report_renders_all_hundreds() {
        let r = MetricsReport::from_predictions(
            &["A", "B", "A"],
            &["A", "B", "A"],
            &schema(&["A", "B"]),
        )
        .unwrap();
        let table = render_report(&r, ReportFormat::Table);
        assert_eq!(table.matches("100.00%").count(), 15);
        assert!(table.lines().last().unwrap().starts_with("Average"));
        assert!(table.lines().next().unwrap().starts_with("Class"));
    }

    #[test]
    fn json_form_matches_table_after_rounding() {
        let r = MetricsReport::from_predictions(
            &["A", "B", "C", "A", "B", "C", "A"],
            &["A", "C", "C", "B", "B", "C", "A"],
            &schema(&["A", "B", "C"]),
        )
        .unwrap();
        let json: serde_json::Value =
            serde_json::from_str(&render_report(&r, ReportFormat::Json)).unwrap();
        let table = render_report(&r, ReportFormat::Table);
        for (k, line) in table.lines().skip(2).enumerate() {
            let m = if k < 3 {
                &json["classes"][k]["metrics"]
            } else {
                &json["average"]
            };
            let expected: Vec<String> = ["accuracy", "precision", "recall", "specificity", "f1"]
                .iter()
                .map(|f| format_percent(m[f].as_f64().unwrap()))
                .collect();
            let cells: Vec<&str> = line.split('|').skip(1).map(str::trim).collect();
            assert_eq!(cells, expected);
        }
        assert_eq!(json["n"], 7);
        assert_eq!(json["classes"][0]["confusion"]["fn"], 1);
    }

    #[test]
    fn mean_of_single_report_is_identity() {
        let r = MetricsReport::from_predictions(
            &["A", "B", "B"],
            &["A", "A", "B"],
            &schema(&["A", "B"]),
        )
        .unwrap();
        assert_eq!(MetricsReport::mean_of(std::slice::from_ref(&r)).unwrap(), r);
    }

    proptest! {
        #[test]
        fn counting_identities(pairs in prop::collection::vec((0usize..4, 0usize..4), 1..80)) {
            let names = schema(&["a", "b", "c", "d"]);
            let t: Vec<&str> = pairs.iter().map(|p| names[p.0].as_str()).collect();
            let p: Vec<&str> = pairs.iter().map(|p| names[p.1].as_str()).collect();
            let c = per_class_confusions(&t, &p, &names).unwrap();
            let n = pairs.len() as u64;
            let correct = pairs.iter().filter(|p| p.0 == p.1).count() as u64;
            prop_assert_eq!(c.iter().map(|x| x.tp).sum::<u64>(), correct);
            prop_assert_eq!(c.iter().map(|x| x.tp + x.fn_).sum::<u64>(), n);
            prop_assert_eq!(c.iter().map(|x| x.fp).sum::<u64>(), n - correct);
            prop_assert_eq!(c.iter().map(|x| x.fn_).sum::<u64>(), n - correct);
            for x in &c {
                prop_assert_eq!(x.total(), n);
                let m = compute_metrics(x).unwrap();
                for v in m.fields() {
                    prop_assert!((0.0..=1.0).contains(&v));
                }
                if m.precision + m.recall > 0.0 {
                    prop_assert!(m.f1 >= m.precision.min(m.recall) - 1e-12);
                    prop_assert!(m.f1 <= m.precision.max(m.recall) + 1e-12);
                }
                prop_assert_eq!(m.f1 == 0.0, m.precision * m.recall == 0.0);
            }
        }
    }
}
