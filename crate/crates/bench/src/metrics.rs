//! Aggregation of annotations into per-variant metrics.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::stats::{mann_whitney_u, MannWhitney};
use crate::{AnnotationRecord, BenchError, Scores};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Resolution,
    Fidelity,
    Robustness,
}

impl Metric {
    pub const ALL: [Metric; 3] = [Metric::Resolution, Metric::Fidelity, Metric::Robustness];

    pub fn of(self, s: &Scores) -> u8 {
        match self {
            Metric::Resolution => s.resolution,
            Metric::Fidelity => s.fidelity,
            Metric::Robustness => s.robustness,
        }
    }
}

/// Distribution of one 1-3 score.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ScoreStats {
    /// Counts of scores 1, 2 and 3.
    pub frequency: [u64; 3],
    pub sum: u64,
    pub count: u64,
    pub average: f64,
}

impl ScoreStats {
    fn add(&mut self, score: u8) {
        self.frequency[score as usize - 1] += 1;
        self.sum += score as u64;
        self.count += 1;
        self.average = self.sum as f64 / self.count as f64;
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariantMetrics {
    pub variant: String,
    pub annotations: u64,
    /// Number of rank-1 placements.
    pub f1: u64,
    pub resolution: ScoreStats,
    pub fidelity: ScoreStats,
    pub robustness: ScoreStats,
}

impl VariantMetrics {
    pub fn stats(&self, m: Metric) -> &ScoreStats {
        match m {
            Metric::Resolution => &self.resolution,
            Metric::Fidelity => &self.fidelity,
            Metric::Robustness => &self.robustness,
        }
    }

    fn stats_mut(&mut self, m: Metric) -> &mut ScoreStats {
        match m {
            Metric::Resolution => &mut self.resolution,
            Metric::Fidelity => &mut self.fidelity,
            Metric::Robustness => &mut self.robustness,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairTest {
    pub metric: Metric,
    pub a: String,
    pub b: String,
    #[serde(flatten)]
    pub result: MannWhitney,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricSummary {
    /// Sorted by variant name.
    pub variants: Vec<VariantMetrics>,
    /// Between the first two annotators (by id); absent with fewer than two
    /// or when their coverage differs.
    pub agreement_rate: Option<f64>,
    /// Every variant pair, every metric, on pooled raw scores.
    pub tests: Vec<PairTest>,
}

impl MetricSummary {
    pub fn variant(&self, name: &str) -> Option<&VariantMetrics> {
        self.variants.iter().find(|v| v.variant == name)
    }
}

/// Per-variant counts and averages over all annotations, plus annotator
/// agreement and pairwise Mann-Whitney tests.
pub fn aggregate_metrics(records: &[AnnotationRecord]) -> MetricSummary {
    let mut by_variant: BTreeMap<&str, VariantMetrics> = BTreeMap::new();
    let mut raw: BTreeMap<(&str, usize), Vec<f64>> = BTreeMap::new();
    for r in records {
        for (v, s) in &r.variants {
            let m = by_variant.entry(v).or_insert_with(|| VariantMetrics {
                variant: v.clone(),
                annotations: 0,
                f1: 0,
                resolution: ScoreStats::default(),
                fidelity: ScoreStats::default(),
                robustness: ScoreStats::default(),
            });
            m.annotations += 1;
            m.f1 += (s.rank == 1) as u64;
            for (k, metric) in Metric::ALL.into_iter().enumerate() {
                let score = metric.of(s);
                m.stats_mut(metric).add(score);
                raw.entry((v, k)).or_default().push(score as f64);
            }
        }
    }

    let names: Vec<&str> = by_variant.keys().copied().collect();
    let mut tests = Vec::new();
    for (i, a) in names.iter().enumerate() {
        for b in &names[i + 1..] {
            for (k, metric) in Metric::ALL.into_iter().enumerate() {
                let result = mann_whitney_u(&raw[&(*a, k)], &raw[&(*b, k)])
                    .expect("every aggregated variant has scores");
                tests.push(PairTest {
                    metric,
                    a: a.to_string(),
                    b: b.to_string(),
                    result,
                });
            }
        }
    }

    let annotators: BTreeSet<&str> = records.iter().map(|r| r.annotator_id.as_str()).collect();
    let agreement_rate = match annotators.iter().take(2).collect::<Vec<_>>()[..] {
        [x, y] => {
            let pick = |id: &str| -> Vec<AnnotationRecord> {
                records.iter().filter(|r| r.annotator_id == id).cloned().collect()
            };
            agreement_rate(&pick(x), &pick(y)).ok()
        }
        _ => None,
    };

    MetricSummary {
        variants: by_variant.into_values().collect(),
        agreement_rate,
        tests,
    }
}

/// Share of (task, variant, metric) cells where two annotators gave the
/// same value. The metrics are rank, resolution, fidelity and robustness.
pub fn agreement_rate(a: &[AnnotationRecord], b: &[AnnotationRecord]) -> Result<f64, BenchError> {
    let cells = |rs: &[AnnotationRecord]| -> BTreeMap<(String, String), Scores> {
        rs.iter()
            .flat_map(|r| {
                r.variants
                    .iter()
                    .map(move |(v, s)| ((r.task_id.clone(), v.clone()), *s))
            })
            .collect()
    };
    let (ca, cb) = (cells(a), cells(b));
    if ca.is_empty() {
        return Err(BenchError::CoverageMismatch("no annotations".into()));
    }
    if !ca.keys().eq(cb.keys()) {
        let only_a = ca.keys().find(|k| !cb.contains_key(*k));
        let only_b = cb.keys().find(|k| !ca.contains_key(*k));
        return Err(BenchError::CoverageMismatch(format!(
            "first difference: {:?} / {:?}",
            only_a, only_b
        )));
    }
    let mut agree = 0usize;
    for (k, sa) in &ca {
        let sb = &cb[k];
        agree += (sa.rank == sb.rank) as usize
            + (sa.resolution == sb.resolution) as usize
            + (sa.fidelity == sb.fidelity) as usize
            + (sa.robustness == sb.robustness) as usize;
    }
    Ok(agree as f64 / (ca.len() * 4) as f64)
}
