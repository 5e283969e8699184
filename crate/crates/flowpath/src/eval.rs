//! IoU-gated region matching and micro-averaged attribution scoring.

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::agent::QuestionType;
use crate::gen::{BBox, QASample, Region, RegionMap, Split};
use crate::graph::NodeLabel;

pub const DEFAULT_IOU_THRESHOLD: f64 = 0.7;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),
    #[error("prediction references unknown sample {0}")]
    UnknownSample(String),
    #[error("prediction for {0} carries neither nodes nor regions")]
    EmptyPrediction(String),
}

/// An unlabeled predicted region: a box or a simple polygon.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FreeRegion {
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub bbox: Option<BBox>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub polygon: Option<Vec<[f64; 2]>>,
}

impl FreeRegion {
    pub fn from_bbox(bbox: BBox) -> Self {
        FreeRegion {
            bbox: Some(bbox),
            polygon: None,
        }
    }

    fn polygon_or_box(&self) -> Result<Vec<[f64; 2]>, EvalError> {
        if let Some(poly) = &self.polygon {
            return Ok(poly.clone());
        }
        if let Some(b) = self.bbox {
            return Ok(box_polygon(b));
        }
        Err(EvalError::DegenerateGeometry(
            "region has neither bbox nor polygon".to_string(),
        ))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionRecord {
    pub sample_id: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub pred_nodes: Option<Vec<NodeLabel>>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub pred_regions: Option<Vec<FreeRegion>>,
}

fn box_polygon(b: BBox) -> Vec<[f64; 2]> {
    vec![
        [b.x, b.y],
        [b.x + b.w, b.y],
        [b.x + b.w, b.y + b.h],
        [b.x, b.y + b.h],
    ]
}

/// Signed shoelace area; positive for counter-clockwise rings.
fn shoelace(poly: &[[f64; 2]]) -> f64 {
    let n = poly.len();
    let mut acc = 0.0;
    for i in 0..n {
        let [x1, y1] = poly[i];
        let [x2, y2] = poly[(i + 1) % n];
        acc += x1 * y2 - x2 * y1;
    }
    acc / 2.0
}

fn polygon_area(poly: &[[f64; 2]]) -> f64 {
    shoelace(poly).abs()
}

/// Sutherland–Hodgman clipping of `subject` against convex `clip`.
fn clip_polygon(subject: &[[f64; 2]], clip: &[[f64; 2]]) -> Vec<[f64; 2]> {
    // Orient the clip ring counter-clockwise so "inside" is consistent.
    let clip: Vec<[f64; 2]> = if shoelace(clip) < 0.0 {
        clip.iter().rev().copied().collect()
    } else {
        clip.to_vec()
    };
    let mut output = subject.to_vec();
    for i in 0..clip.len() {
        if output.is_empty() {
            break;
        }
        let a = clip[i];
        let b = clip[(i + 1) % clip.len()];
        let inside = |p: [f64; 2]| (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0]) >= 0.0;
        let intersect = |p: [f64; 2], q: [f64; 2]| -> [f64; 2] {
            let dc = [a[0] - b[0], a[1] - b[1]];
            let dp = [p[0] - q[0], p[1] - q[1]];
            let n1 = a[0] * b[1] - a[1] * b[0];
            let n2 = p[0] * q[1] - p[1] * q[0];
            let denom = dc[0] * dp[1] - dc[1] * dp[0];
            [(n1 * dp[0] - n2 * dc[0]) / denom, (n1 * dp[1] - n2 * dc[1]) / denom]
        };
        let input = std::mem::take(&mut output);
        for j in 0..input.len() {
            let current = input[j];
            let prev = input[(j + input.len() - 1) % input.len()];
            if inside(current) {
                if !inside(prev) {
                    output.push(intersect(prev, current));
                }
                output.push(current);
            } else if inside(prev) {
                output.push(intersect(prev, current));
            }
        }
    }
    output
}

/// Exact rectangle-rectangle IoU.
pub fn iou_bbox(a: BBox, b: BBox) -> Result<f64, EvalError> {
    if a.w <= 0.0 || a.h <= 0.0 || b.w <= 0.0 || b.h <= 0.0 {
        return Err(EvalError::DegenerateGeometry(
            "zero-area box".to_string(),
        ));
    }
    let ix = (a.x + a.w).min(b.x + b.w) - a.x.max(b.x);
    let iy = (a.y + a.h).min(b.y + b.h) - a.y.max(b.y);
    let inter = ix.max(0.0) * iy.max(0.0);
    Ok(inter / (a.area() + b.area() - inter))
}

/// Polygon-aware IoU over free geometry.
pub fn iou_free(a: &FreeRegion, b: &FreeRegion) -> Result<f64, EvalError> {
    if let (Some(ab), Some(bb), None, None) = (a.bbox, b.bbox, &a.polygon, &b.polygon) {
        return iou_bbox(ab, bb);
    }
    let pa = a.polygon_or_box()?;
    let pb = b.polygon_or_box()?;
    let area_a = polygon_area(&pa);
    let area_b = polygon_area(&pb);
    if area_a <= 0.0 || area_b <= 0.0 {
        return Err(EvalError::DegenerateGeometry(
            "zero-area polygon".to_string(),
        ));
    }
    let inter = polygon_area(&clip_polygon(&pa, &pb));
    Ok(inter / (area_a + area_b - inter))
}

/// Ground-truth geometry projected to match the prediction's kind: a bbox
/// prediction is compared against the node's bbox, a polygon prediction
/// against the node's polygon (falling back to the bbox ring).
fn gt_free(region: &Region, pred: &FreeRegion) -> FreeRegion {
    if pred.polygon.is_some() {
        FreeRegion {
            bbox: Some(region.bbox),
            polygon: region.polygon.clone(),
        }
    } else {
        FreeRegion {
            bbox: Some(region.bbox),
            polygon: None,
        }
    }
}

/// Resolves each predicted region to the ground-truth node of maximum IoU,
/// keeping matches at or above the threshold. Duplicates collapse; ties
/// break toward the earlier-inserted node.
pub fn match_regions(
    preds: &[FreeRegion],
    gt: &RegionMap,
    threshold: f64,
) -> Result<Vec<NodeLabel>, EvalError> {
    let mut matched: Vec<NodeLabel> = Vec::new();
    for pred in preds {
        let mut best: Option<(NodeLabel, f64)> = None;
        for region in gt.regions() {
            let value = iou_free(pred, &gt_free(region, pred))?;
            let beats = match &best {
                None => true,
                Some((_, bv)) => value > *bv,
            };
            if beats {
                best = Some((region.label.clone(), value));
            }
        }
        if let Some((label, value)) = best {
            if value >= threshold && !matched.contains(&label) {
                matched.push(label);
            }
        }
    }
    Ok(matched)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct SliceScore {
    /// Percentages in [0, 100].
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

impl SliceScore {
    fn from_counts(tp: usize, fp: usize, fn_: usize) -> Self {
        let p = if tp + fp > 0 {
            tp as f64 / (tp + fp) as f64
        } else {
            0.0
        };
        let r = if tp + fn_ > 0 {
            tp as f64 / (tp + fn_) as f64
        } else {
            0.0
        };
        let f1 = if p + r > 0.0 { 2.0 * p * r / (p + r) } else { 0.0 };
        SliceScore {
            precision: p * 100.0,
            recall: r * 100.0,
            f1: f1 * 100.0,
            tp,
            fp,
            fn_,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleDiagnostic {
    pub sample_id: String,
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    /// |pred| / |gt|; how much longer or shorter the predicted path is.
    pub path_length_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub threshold: f64,
    pub overall: SliceScore,
    pub by_split: Vec<(Split, SliceScore)>,
    pub by_question_type: Vec<(QuestionType, SliceScore)>,
    pub diagnostics: Vec<SampleDiagnostic>,
}

impl EvalReport {
    /// Summary table as CSV: one row per slice.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("slice,precision,recall,f1,tp,fp,fn\n");
        let mut row = |name: &str, s: &SliceScore| {
            let _ = writeln!(
                out,
                "{name},{:.2},{:.2},{:.2},{},{},{}",
                s.precision, s.recall, s.f1, s.tp, s.fp, s.fn_
            );
        };
        row("overall", &self.overall);
        for (split, score) in &self.by_split {
            row(split.as_str(), score);
        }
        for (qt, score) in &self.by_question_type {
            row(qt.as_str(), score);
        }
        out
    }
}

/// Resolves a prediction to its node-label set: labels pass through,
/// regions go through IoU matching.
fn resolve_labels(
    pred: &PredictionRecord,
    sample: &QASample,
    threshold: f64,
) -> Result<BTreeSet<NodeLabel>, EvalError> {
    if let Some(nodes) = &pred.pred_nodes {
        return Ok(nodes.iter().cloned().collect());
    }
    if let Some(regions) = &pred.pred_regions {
        return Ok(match_regions(regions, &sample.regions, threshold)?
            .into_iter()
            .collect());
    }
    Err(EvalError::EmptyPrediction(pred.sample_id.clone()))
}

pub fn score(
    preds: &[PredictionRecord],
    dataset: &[QASample],
    threshold: f64,
) -> Result<EvalReport, EvalError> {
    let by_id: HashMap<&str, &QASample> =
        dataset.iter().map(|s| (s.id.as_str(), s)).collect();
    let mut pred_by_id: HashMap<&str, &PredictionRecord> = HashMap::new();
    for pred in preds {
        if !by_id.contains_key(pred.sample_id.as_str()) {
            return Err(EvalError::UnknownSample(pred.sample_id.clone()));
        }
        pred_by_id.insert(pred.sample_id.as_str(), pred);
    }

    let mut pooled = (0usize, 0usize, 0usize);
    let mut split_counts: HashMap<Split, (usize, usize, usize)> = HashMap::new();
    let mut type_counts: HashMap<QuestionType, (usize, usize, usize)> = HashMap::new();
    let mut diagnostics = Vec::new();

    for sample in dataset {
        let gt: BTreeSet<NodeLabel> = sample.gt_nodes.iter().cloned().collect();
        // Absent prediction counts as empty: everything in gt becomes FN.
        let predicted: BTreeSet<NodeLabel> = match pred_by_id.get(sample.id.as_str()) {
            Some(pred) => resolve_labels(pred, sample, threshold)?,
            None => BTreeSet::new(),
        };
        let tp = predicted.intersection(&gt).count();
        let fp = predicted.difference(&gt).count();
        let fn_ = gt.difference(&predicted).count();
        pooled.0 += tp;
        pooled.1 += fp;
        pooled.2 += fn_;
        let s = split_counts.entry(sample.split).or_default();
        s.0 += tp;
        s.1 += fp;
        s.2 += fn_;
        let t = type_counts.entry(sample.question_type).or_default();
        t.0 += tp;
        t.1 += fp;
        t.2 += fn_;
        diagnostics.push(SampleDiagnostic {
            sample_id: sample.id.clone(),
            tp,
            fp,
            fn_,
            path_length_ratio: if gt.is_empty() {
                0.0
            } else {
                predicted.len() as f64 / gt.len() as f64
            },
        });
    }

    let by_split = Split::ALL
        .iter()
        .filter_map(|split| {
            split_counts
                .get(split)
                .map(|(tp, fp, fn_)| (*split, SliceScore::from_counts(*tp, *fp, *fn_)))
        })
        .collect();
    let by_question_type = QuestionType::ALL
        .iter()
        .filter_map(|qt| {
            type_counts
                .get(qt)
                .map(|(tp, fp, fn_)| (*qt, SliceScore::from_counts(*tp, *fp, *fn_)))
        })
        .collect();

    Ok(EvalReport {
        threshold,
        overall: SliceScore::from_counts(pooled.0, pooled.1, pooled.2),
        by_split,
        by_question_type,
        diagnostics,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agent::Statement;
    use crate::fixtures::g1;
    use crate::gen::{assemble_sample, StyleFamily, StyleSpec};

    fn l(s: &str) -> NodeLabel {
        NodeLabel::new(s).unwrap()
    }

    fn bb(x: f64, y: f64, w: f64, h: f64) -> BBox {
        BBox::new(x, y, w, h)
    }

    fn g1_sample(id: &str, gt: &[&str]) -> QASample {
        let statement = Statement {
            question: "What happens when x is positive?".to_string(),
            answer: "x is incremented.".to_string(),
            question_type: QuestionType::FactRetrieval,
        };
        let style = StyleSpec::new(StyleFamily::Default, 0);
        assemble_sample(
            &g1(),
            id,
            &statement,
            crate::gen::Split::Custom,
            gt.iter().map(|s| l(s)).collect(),
            &style,
        )
        .unwrap()
        .0
    }

    #[test]
    fn iou_identical_boxes() {
        assert_eq!(iou_bbox(bb(0.0, 0.0, 10.0, 10.0), bb(0.0, 0.0, 10.0, 10.0)).unwrap(), 1.0);
    }

    #[test]
    fn iou_shifted_boxes_one_third() {
        let value = iou_bbox(bb(0.0, 0.0, 10.0, 10.0), bb(5.0, 0.0, 10.0, 10.0)).unwrap();
        assert_eq!(value, 1.0 / 3.0);
    }

    #[test]
    fn iou_disjoint_boxes_zero() {
        assert_eq!(iou_bbox(bb(0.0, 0.0, 5.0, 5.0), bb(100.0, 100.0, 5.0, 5.0)).unwrap(), 0.0);
    }

    #[test]
    fn iou_degenerate_rejected() {
        assert!(iou_bbox(bb(0.0, 0.0, 0.0, 10.0), bb(0.0, 0.0, 10.0, 10.0)).is_err());
    }

    #[test]
    fn polygon_iou_matches_box_iou() {
        let a = FreeRegion {
            bbox: None,
            polygon: Some(vec![[0.0, 0.0], [10.0, 0.0], [10.0, 10.0], [0.0, 10.0]]),
        };
        let b = FreeRegion::from_bbox(bb(5.0, 0.0, 10.0, 10.0));
        let value = iou_free(&a, &b).unwrap();
        assert!((value - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn diamond_polygon_iou_half_of_box() {
        // A diamond inscribed in its bbox has half the area.
        let diamond = FreeRegion {
            bbox: None,
            polygon: Some(vec![[5.0, 0.0], [10.0, 5.0], [5.0, 10.0], [0.0, 5.0]]),
        };
        let square = FreeRegion::from_bbox(bb(0.0, 0.0, 10.0, 10.0));
        let value = iou_free(&diamond, &square).unwrap();
        assert!((value - 0.5).abs() < 1e-12);
    }

    #[test]
    fn match_exact_region() {
        let sample = g1_sample("m1", &["A", "B"]);
        let b = sample.regions.get(&l("B")).unwrap().bbox;
        let matched = match_regions(&[FreeRegion::from_bbox(b)], &sample.regions, 0.7).unwrap();
        assert_eq!(matched, vec![l("B")]);
    }

    #[test]
    fn below_threshold_unmatched() {
        let sample = g1_sample("m2", &["A"]);
        let b = sample.regions.get(&l("B")).unwrap().bbox;
        // Shift by half a width: IoU 1/3 < 0.7.
        let shifted = bb(b.x + b.w / 2.0, b.y, b.w, b.h);
        let matched = match_regions(&[FreeRegion::from_bbox(shifted)], &sample.regions, 0.7).unwrap();
        assert!(matched.is_empty());
    }

    #[test]
    fn duplicate_matches_collapse() {
        let sample = g1_sample("m3", &["B"]);
        let b = sample.regions.get(&l("B")).unwrap().bbox;
        let preds = vec![FreeRegion::from_bbox(b), FreeRegion::from_bbox(b)];
        let matched = match_regions(&preds, &sample.regions, 0.7).unwrap();
        assert_eq!(matched, vec![l("B")]);
    }

    #[test]
    fn score_two_thirds_example() {
        let sample = g1_sample("s1", &["A", "B", "C"]);
        let pred = PredictionRecord {
            sample_id: "s1".to_string(),
            pred_nodes: Some(vec![l("B"), l("C"), l("D")]),
            pred_regions: None,
        };
        let report = score(&[pred], &[sample], 0.7).unwrap();
        assert!((report.overall.precision - 66.6667).abs() < 0.01);
        assert!((report.overall.recall - 66.6667).abs() < 0.01);
        assert!((report.overall.f1 - 66.6667).abs() < 0.01);
        assert_eq!((report.overall.tp, report.overall.fp, report.overall.fn_), (2, 1, 1));
    }

    #[test]
    fn perfect_predictions_score_100() {
        let samples = vec![g1_sample("p1", &["A", "B"]), g1_sample("p2", &["C", "E"])];
        let preds: Vec<PredictionRecord> = samples
            .iter()
            .map(|s| PredictionRecord {
                sample_id: s.id.clone(),
                pred_nodes: Some(s.gt_nodes.clone()),
                pred_regions: None,
            })
            .collect();
        let report = score(&preds, &samples, 0.7).unwrap();
        assert_eq!(report.overall.f1, 100.0);
        assert_eq!(report.overall.fp, 0);
        assert_eq!(report.overall.fn_, 0);
    }

    #[test]
    fn missing_prediction_counts_all_fn() {
        let sample = g1_sample("missing", &["A", "B"]);
        let report = score(&[], &[sample], 0.7).unwrap();
        assert_eq!(report.overall.tp, 0);
        assert_eq!(report.overall.fn_, 2);
        assert_eq!(report.overall.recall, 0.0);
    }

    #[test]
    fn unknown_sample_rejected() {
        let pred = PredictionRecord {
            sample_id: "ghost".to_string(),
            pred_nodes: Some(vec![l("A")]),
            pred_regions: None,
        };
        assert!(matches!(
            score(&[pred], &[], 0.7),
            Err(EvalError::UnknownSample(_))
        ));
    }

    #[test]
    fn raising_threshold_never_increases_tp() {
        let sample = g1_sample("t1", &["A", "B", "C"]);
        let a = sample.regions.get(&l("A")).unwrap().bbox;
        let b = sample.regions.get(&l("B")).unwrap().bbox;
        let preds = vec![PredictionRecord {
            sample_id: "t1".to_string(),
            pred_nodes: None,
            pred_regions: Some(vec![
                FreeRegion::from_bbox(a),
                // Partial overlap: matches at low thresholds only.
                FreeRegion::from_bbox(bb(b.x + b.w * 0.15, b.y, b.w, b.h)),
            ]),
        }];
        let mut last_tp = usize::MAX;
        for threshold in [0.5, 0.6, 0.7, 0.8, 0.9] {
            let report = score(&preds, std::slice::from_ref(&sample), threshold).unwrap();
            assert!(report.overall.tp <= last_tp);
            last_tp = report.overall.tp;
        }
    }

    #[test]
    fn slices_sum_to_overall() {
        let samples = vec![g1_sample("x1", &["A", "B"]), g1_sample("x2", &["C", "D", "E"])];
        let preds = vec![
            PredictionRecord {
                sample_id: "x1".to_string(),
                pred_nodes: Some(vec![l("A"), l("C")]),
                pred_regions: None,
            },
            PredictionRecord {
                sample_id: "x2".to_string(),
                pred_nodes: Some(vec![l("C"), l("D")]),
                pred_regions: None,
            },
        ];
        let report = score(&preds, &samples, 0.7).unwrap();
        let split_tp: usize = report.by_split.iter().map(|(_, s)| s.tp).sum();
        let type_tp: usize = report.by_question_type.iter().map(|(_, s)| s.tp).sum();
        assert_eq!(split_tp, report.overall.tp);
        assert_eq!(type_tp, report.overall.tp);
        assert_eq!(report.diagnostics.len(), 2);
    }

    #[test]
    fn csv_has_header_and_overall_row() {
        let sample = g1_sample("c1", &["A"]);
        let report = score(&[], &[sample], 0.7).unwrap();
        let csv = report.to_csv();
        assert!(csv.starts_with("slice,precision,recall,f1,tp,fp,fn\n"));
        assert!(csv.contains("overall,"));
    }
}
