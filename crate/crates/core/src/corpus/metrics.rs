//! Threshold sweep over classifier scores: precision, recall, F1, MCC and
//! area under the precision-recall curve.
//!
//! A sample is predicted positive when its score is at least the threshold.
//! The sweep visits every distinct score, highest first.

use std::io::Write;

use num_traits::Float;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum MetricsError {
    #[error("{scores} scores but {labels} labels")]
    LengthMismatch { scores: usize, labels: usize },
    #[error("no samples to evaluate")]
    Empty,
    #[error("score #{index} is {score}, outside [0, 1]")]
    ScoreOutOfRange { index: usize, score: f64 },
    #[error("labels contain a single class; MCC is undefined")]
    SingleClass,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Confusion {
    pub tp: usize,
    pub fp: usize,
    pub tn: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

fn cast<F: Float>(n: usize) -> F {
    F::from(n).expect("count representable as float")
}

impl Confusion {
    pub fn at_threshold<F: Float>(scores: &[F], labels: &[bool], threshold: F) -> Self {
        let mut c = Confusion::default();
        for (&s, &l) in scores.iter().zip(labels) {
            match (s >= threshold, l) {
                (true, true) => c.tp += 1,
                (true, false) => c.fp += 1,
                (false, false) => c.tn += 1,
                (false, true) => c.fn_ += 1,
            }
        }
        c
    }

    /// TP / (TP + FP), or 1 when nothing is predicted positive.
    pub fn precision<F: Float>(&self) -> F {
        let predicted = self.tp + self.fp;
        if predicted == 0 {
            F::one()
        } else {
            cast::<F>(self.tp) / cast(predicted)
        }
    }

    /// TP / (TP + FN), or 0 when there are no positives.
    pub fn recall<F: Float>(&self) -> F {
        let actual = self.tp + self.fn_;
        if actual == 0 {
            F::zero()
        } else {
            cast::<F>(self.tp) / cast(actual)
        }
    }

    pub fn f1<F: Float>(&self) -> F {
        let p: F = self.precision();
        let r: F = self.recall();
        if p + r == F::zero() {
            F::zero()
        } else {
            cast::<F>(2) * p * r / (p + r)
        }
    }

    /// Matthews correlation; 0 when any marginal is empty.
    pub fn mcc<F: Float>(&self) -> F {
        let [tp, fp, tn, fn_] = [self.tp, self.fp, self.tn, self.fn_].map(cast::<F>);
        let denom = (tp + fp) * (tp + fn_) * (tn + fp) * (tn + fn_);
        if denom == F::zero() {
            F::zero()
        } else {
            (tp * tn - fp * fn_) / denom.sqrt()
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct OperatingPoint<F> {
    pub threshold: F,
    pub precision: F,
    pub recall: F,
    pub f1: F,
    pub mcc: F,
    pub confusion: Confusion,
}

impl<F: Float> OperatingPoint<F> {
    fn new(threshold: F, confusion: Confusion) -> Self {
        Self {
            threshold,
            precision: confusion.precision(),
            recall: confusion.recall(),
            f1: confusion.f1(),
            mcc: confusion.mcc(),
            confusion,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MetricsReport<F> {
    pub positives: usize,
    pub negatives: usize,
    /// Area under the precision-recall curve.
    pub auc: F,
    /// Operating point with the highest F1; ties go to the higher threshold.
    pub best: OperatingPoint<F>,
    /// One point per distinct score, threshold descending.
    pub curve: Vec<OperatingPoint<F>>,
}

fn validate<F: Float>(scores: &[F], labels: &[bool]) -> Result<(), MetricsError> {
    if scores.len() != labels.len() {
        return Err(MetricsError::LengthMismatch {
            scores: scores.len(),
            labels: labels.len(),
        });
    }
    if scores.is_empty() {
        return Err(MetricsError::Empty);
    }
    for (index, &s) in scores.iter().enumerate() {
        if !(s >= F::zero() && s <= F::one()) {
            return Err(MetricsError::ScoreOutOfRange {
                index,
                score: s.to_f64().unwrap_or(f64::NAN),
            });
        }
    }
    Ok(())
}

/// Sweeps thresholds without the `[0, 1]` range check, so monotone
/// transformations of scores can be compared.
pub fn sweep<F: Float>(scores: &[F], labels: &[bool]) -> Result<MetricsReport<F>, MetricsError> {
    if scores.len() != labels.len() {
        return Err(MetricsError::LengthMismatch {
            scores: scores.len(),
            labels: labels.len(),
        });
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(MetricsError::ScoreOutOfRange {
            index: scores.iter().position(|s| s.is_nan()).unwrap_or(0),
            score: f64::NAN,
        });
    }
    let positives = labels.iter().filter(|&&l| l).count();
    let negatives = labels.len() - positives;
    if positives == 0 || negatives == 0 {
        return Err(if labels.is_empty() {
            MetricsError::Empty
        } else {
            MetricsError::SingleClass
        });
    }

    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].partial_cmp(&scores[a]).expect("no NaN"));

    let mut curve = Vec::new();
    let mut c = Confusion {
        tp: 0,
        fp: 0,
        tn: negatives,
        fn_: positives,
    };
    let mut i = 0;
    while i < order.len() {
        let threshold = scores[order[i]];
        while i < order.len() && scores[order[i]] == threshold {
            if labels[order[i]] {
                c.tp += 1;
                c.fn_ -= 1;
            } else {
                c.fp += 1;
                c.tn -= 1;
            }
            i += 1;
        }
        curve.push(OperatingPoint::new(threshold, c));
    }

    let half = cast::<F>(1) / cast(2);
    let mut auc = F::zero();
    let (mut prev_r, mut prev_p) = (F::zero(), F::one());
    for point in &curve {
        auc = auc + (point.recall - prev_r) * (point.precision + prev_p) * half;
        prev_r = point.recall;
        prev_p = point.precision;
    }

    let best = *curve
        .iter()
        .reduce(|best, p| if p.f1 > best.f1 { p } else { best })
        .expect("at least one point");

    Ok(MetricsReport {
        positives,
        negatives,
        auc,
        best,
        curve,
    })
}

/// Full report for probability scores in `[0, 1]`.
pub fn evaluate<F: Float>(scores: &[F], labels: &[bool]) -> Result<MetricsReport<F>, MetricsError> {
    validate(scores, labels)?;
    sweep(scores, labels)
}

/// Rows `threshold,precision,recall,f1,mcc`, threshold descending.
pub fn write_pr_csv<F: Float + std::fmt::Display>(
    report: &MetricsReport<F>,
    writer: impl Write,
) -> Result<(), csv::Error> {
    let mut out = csv::Writer::from_writer(writer);
    out.write_record(["threshold", "precision", "recall", "f1", "mcc"])?;
    for p in &report.curve {
        out.write_record([p.threshold, p.precision, p.recall, p.f1, p.mcc].map(|v| v.to_string()))?;
    }
    out.flush()?;
    Ok(())
}
