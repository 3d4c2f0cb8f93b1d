//! Plain-text result tables.

use crate::{Metric, MetricSummary};

/// One block of rows, optionally headed by a group name (e.g. a stratum).
pub struct TableBlock<'a> {
    pub group: Option<String>,
    pub summary: &'a MetricSummary,
    /// Row order; variants not listed follow alphabetically.
    pub order: &'a [String],
}

pub fn render_table(title: &str, blocks: &[TableBlock<'_>]) -> String {
    let mut rows: Vec<Vec<String>> = vec![
        ["", "", "F#1", "Res", "", "", "", "Fid", "", "", "", "Rob", "", "", ""]
            .map(String::from)
            .to_vec(),
        ["", "", "", "1", "2", "3", "Avg", "1", "2", "3", "Avg", "1", "2", "3", "Avg"]
            .map(String::from)
            .to_vec(),
    ];
    let header_rows = rows.len();
    let mut separators = Vec::new();
    for block in blocks {
        separators.push(rows.len());
        let mut variants: Vec<_> = block.summary.variants.iter().collect();
        variants.sort_by_key(|v| {
            (
                block.order.iter().position(|o| *o == v.variant).unwrap_or(usize::MAX),
                v.variant.clone(),
            )
        });
        for (i, v) in variants.into_iter().enumerate() {
            let mut row = vec![
                if i == 0 { block.group.clone().unwrap_or_default() } else { String::new() },
                v.variant.clone(),
                v.f1.to_string(),
            ];
            for m in Metric::ALL {
                let s = v.stats(m);
                row.extend(s.frequency.iter().map(u64::to_string));
                row.push(format!("{:.2}", s.average));
            }
            rows.push(row);
        }
    }
    let grouped = blocks.iter().any(|b| b.group.is_some());
    if !grouped {
        for r in &mut rows {
            r.remove(0);
        }
    }
    let labels = if grouped { 2 } else { 1 };
    let cols = rows[0].len();
    let widths: Vec<usize> = (0..cols)
        .map(|c| rows.iter().map(|r| r[c].chars().count()).max().unwrap_or(0))
        .collect();
    let line = |r: &Vec<String>| {
        r.iter()
            .enumerate()
            .map(|(c, cell)| {
                if c < labels {
                    format!("{cell:<w$}", w = widths[c])
                } else {
                    format!("{cell:>w$}", w = widths[c])
                }
            })
            .collect::<Vec<_>>()
            .join("  ")
            .trim_end()
            .to_string()
    };
    let total_width = widths.iter().sum::<usize>() + 2 * (cols - 1);
    let rule = "-".repeat(total_width);
    let mut out = format!("{title}\n{rule}\n");
    for (i, r) in rows.iter().enumerate() {
        if i >= header_rows && separators.contains(&i) {
            out.push_str(&rule);
            out.push('\n');
        }
        out.push_str(&line(r));
        out.push('\n');
    }
    out.push_str(&rule);
    out.push('\n');
    for block in blocks {
        if let Some(a) = block.summary.agreement_rate {
            let g = block.group.as_deref().map(|g| format!(" ({g})")).unwrap_or_default();
            out.push_str(&format!("agreement{g}: {:.2}%\n", a * 100.0));
        }
    }
    out
}
