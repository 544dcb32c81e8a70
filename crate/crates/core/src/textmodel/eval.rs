use crate::error::{Error, Result};
use crate::report::{fmt_f64, KvReport};
use crate::stance::StanceLabel;

/// Confusion matrix (rows gold, columns predicted) and derived scores over a
/// fixed, ordered class list.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub classes: Vec<StanceLabel>,
    pub confusion: Vec<Vec<u64>>,
    pub precision: Vec<f64>,
    pub recall: Vec<f64>,
    pub per_class_f1: Vec<f64>,
    pub macro_f1: f64,
    pub accuracy: f64,
    pub n: u64,
}

impl EvalReport {
    /// Scores a confusion matrix directly. F1 is 0 for a class whose
    /// precision and recall are both 0 (or undefined).
    pub fn from_confusion(classes: Vec<StanceLabel>, confusion: Vec<Vec<u64>>) -> Result<Self> {
        let k = classes.len();
        if k == 0 || confusion.len() != k || confusion.iter().any(|r| r.len() != k) {
            return Err(Error::InvalidConfig("confusion matrix must be square over the classes".into()));
        }
        let n: u64 = confusion.iter().flatten().sum();
        let mut precision = vec![0.0; k];
        let mut recall = vec![0.0; k];
        let mut per_class_f1 = vec![0.0; k];
        for c in 0..k {
            let tp = confusion[c][c] as f64;
            let gold: u64 = confusion[c].iter().sum();
            let predicted: u64 = confusion.iter().map(|r| r[c]).sum();
            precision[c] = if predicted > 0 { tp / predicted as f64 } else { 0.0 };
            recall[c] = if gold > 0 { tp / gold as f64 } else { 0.0 };
            let denom = gold + predicted;
            per_class_f1[c] = if tp > 0.0 { 2.0 * tp / denom as f64 } else { 0.0 };
        }
        let trace: u64 = (0..k).map(|c| confusion[c][c]).sum();
        Ok(EvalReport {
            macro_f1: per_class_f1.iter().sum::<f64>() / k as f64,
            accuracy: if n > 0 { trace as f64 / n as f64 } else { 0.0 },
            classes,
            confusion,
            precision,
            recall,
            per_class_f1,
            n,
        })
    }

    pub fn f1(&self, class: StanceLabel) -> Option<f64> {
        self.classes
            .iter()
            .position(|&c| c == class)
            .map(|i| self.per_class_f1[i])
    }

    pub fn to_report(&self, title: &str) -> KvReport {
        let mut r = KvReport::new(title);
        r.push("n", self.n)
            .push(
                "classes",
                self.classes.iter().map(|c| c.as_str()).collect::<Vec<_>>().join(","),
            )
            .push_f64("macro_f1", self.macro_f1)
            .push_f64("accuracy", self.accuracy);
        for (i, c) in self.classes.iter().enumerate() {
            r.push_f64(format!("f1.{c}"), self.per_class_f1[i])
                .push_f64(format!("precision.{c}"), self.precision[i])
                .push_f64(format!("recall.{c}"), self.recall[i]);
        }
        let mut block = String::from("gold\\pred");
        for c in &self.classes {
            block.push_str(&format!("\t{c}"));
        }
        block.push('\n');
        for (i, c) in self.classes.iter().enumerate() {
            block.push_str(c.as_str());
            for v in &self.confusion[i] {
                block.push_str(&format!("\t{v}"));
            }
            block.push('\n');
        }
        r.block("confusion", block);
        r
    }

    pub fn summary_line(&self) -> String {
        format!(
            "macro_f1={} accuracy={} n={}",
            fmt_f64(self.macro_f1),
            fmt_f64(self.accuracy),
            self.n
        )
    }
}

/// Three-class evaluation in the fixed order Against, NonOpinionated, Support.
pub fn evaluate(gold: &[StanceLabel], predicted: &[StanceLabel]) -> Result<EvalReport> {
    evaluate_with_classes(gold, predicted, &StanceLabel::ALL)
}

/// Evaluation restricted to `classes`; macro F1 averages over exactly these.
pub fn evaluate_with_classes(
    gold: &[StanceLabel],
    predicted: &[StanceLabel],
    classes: &[StanceLabel],
) -> Result<EvalReport> {
    if gold.len() != predicted.len() {
        return Err(Error::LengthMismatch {
            left: gold.len(),
            right: predicted.len(),
        });
    }
    let pos = |l: StanceLabel| {
        classes
            .iter()
            .position(|&c| c == l)
            .ok_or_else(|| Error::InvalidConfig(format!("label {l} is not an evaluated class")))
    };
    let k = classes.len();
    let mut confusion = vec![vec![0u64; k]; k];
    for (&g, &p) in gold.iter().zip(predicted) {
        confusion[pos(g)?][pos(p)?] += 1;
    }
    EvalReport::from_confusion(classes.to_vec(), confusion)
}
