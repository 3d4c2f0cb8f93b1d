//! Grouped metric reports over ingested annotations.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use uisuggest_core::Stratum;

use crate::tables::{render_table, TableBlock};
use crate::{aggregate_metrics, AnnotationRecord, BenchTask, MetricSummary, Split};

pub const POOLING_NOTE: &str =
    "significance tests pool the raw scores of all annotators; they are not averaged per task";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportGroup {
    /// None when the task carries no split.
    pub split: Option<Split>,
    /// Only set for the mask evaluation, which is reported per stratum.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stratum: Option<Stratum>,
    /// The variants compared in this group.
    pub variants: Vec<String>,
    pub summary: MetricSummary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub note: String,
    pub groups: Vec<ReportGroup>,
}

type GroupKey = (Option<Split>, Option<Stratum>, Vec<String>);

/// Groups annotations by split, by stratum within the mask evaluation, and
/// by the set of variants compared, then aggregates each group.
pub fn build_report(tasks: &[BenchTask], records: &[AnnotationRecord]) -> BenchReport {
    let by_id: BTreeMap<&str, &BenchTask> = tasks.iter().map(|t| (t.task_id.as_str(), t)).collect();
    let mut groups: BTreeMap<GroupKey, Vec<AnnotationRecord>> = BTreeMap::new();
    for r in records {
        let task = by_id.get(r.task_id.as_str());
        let split = task.and_then(|t| t.split);
        let stratum = match (split, task) {
            (Some(Split::MaskEval), Some(t)) => Some(t.stratum),
            _ => None,
        };
        let variants: Vec<String> = r.variants.keys().cloned().collect();
        groups.entry((split, stratum, variants)).or_default().push(r.clone());
    }
    BenchReport {
        note: POOLING_NOTE.to_string(),
        groups: groups
            .into_iter()
            .map(|((split, stratum, variants), rs)| ReportGroup {
                split,
                stratum,
                variants,
                summary: aggregate_metrics(&rs),
            })
            .collect(),
    }
}

fn group_name(g: &ReportGroup) -> String {
    match (g.stratum, g.split) {
        (Some(s), _) => s.to_string(),
        (None, _) => g.variants.join(" vs "),
    }
}

/// Text tables: one per split, one block per group.
pub fn render_report_tables(report: &BenchReport) -> String {
    let splits: BTreeSet<Option<Split>> = report.groups.iter().map(|g| g.split).collect();
    let mut out = String::new();
    for split in splits {
        let groups: Vec<&ReportGroup> = report.groups.iter().filter(|g| g.split == split).collect();
        let single = groups.len() == 1;
        let blocks: Vec<TableBlock<'_>> = groups
            .iter()
            .map(|g| TableBlock {
                group: (!single).then(|| group_name(g)),
                summary: &g.summary,
                order: &[],
            })
            .collect();
        let title = split.map_or_else(|| "all tasks".to_string(), |s| s.to_string());
        out.push_str(&render_table(&title, &blocks));
        out.push('\n');
    }
    out.push_str(&format!("note: {}\n", report.note));
    out
}
