//! Published result tables as frequency data, and a reconstruction of raw
//! annotation records consistent with them.

#![allow(dead_code)]

use std::collections::BTreeMap;

use uisuggest_bench::{AnnotationRecord, Scores};

pub struct Row {
    pub variant: &'static str,
    pub f1: u64,
    /// Frequencies of scores 1, 2, 3 for resolution, fidelity, robustness.
    pub freq: [[u64; 3]; 3],
    /// Reported two-decimal averages, same metric order.
    pub avg: [f64; 3],
}

const fn row(variant: &'static str, f1: u64, freq: [[u64; 3]; 3], avg: [f64; 3]) -> Row {
    Row { variant, f1, freq, avg }
}

pub const MODELS: [Row; 4] = [
    row("gpt-image-1", 214, [[22, 18, 200], [4, 33, 203], [1, 27, 212]], [2.74, 2.83, 2.88]),
    row("flux-kontext-max", 14, [[153, 29, 58], [4, 30, 206], [11, 70, 159]], [1.60, 2.84, 2.62]),
    row("gemini-2.0-flash", 8, [[114, 53, 73], [18, 43, 179], [35, 115, 90]], [1.83, 2.67, 2.23]),
    row("bagel", 4, [[181, 27, 32], [9, 19, 212], [100, 35, 105]], [1.38, 2.85, 2.02]),
];

/// Per stratum: masked then unmasked.
pub const MASK: [(&str, [Row; 2]); 3] = [
    ("S", [
        row("gpt-image-1-mask", 28, [[6, 4, 30], [0, 0, 40], [1, 10, 29]], [2.60, 3.00, 2.70]),
        row("gpt-image-1", 12, [[8, 2, 30], [0, 4, 36], [0, 5, 35]], [2.55, 2.90, 2.88]),
    ]),
    ("M", [
        row("gpt-image-1-mask", 21, [[0, 2, 38], [5, 2, 33], [1, 7, 32]], [2.95, 2.70, 2.77]),
        row("gpt-image-1", 19, [[1, 2, 37], [2, 6, 32], [0, 3, 37]], [2.90, 2.75, 2.92]),
    ]),
    ("L", [
        row("gpt-image-1-mask", 18, [[0, 0, 40], [11, 9, 20], [1, 9, 30]], [3.00, 2.23, 2.73]),
        row("gpt-image-1", 22, [[3, 1, 36], [0, 1, 39], [0, 6, 34]], [2.83, 2.98, 2.85]),
    ]),
];

/// Masked block then unmasked block: with then without suggestion generation.
pub const ABLATION: [(&str, [Row; 2]); 2] = [
    ("mask", [
        row("gpt-image-1-mask", 108, [[10, 10, 100], [5, 26, 89], [2, 29, 89]], [2.75, 2.70, 2.73]),
        row("gpt-image-1-mask-no-sg", 12, [[78, 7, 35], [66, 11, 43], [61, 22, 37]], [1.64, 1.81, 1.80]),
    ]),
    ("no mask", [
        row("gpt-image-1", 80, [[10, 11, 99], [1, 12, 107], [0, 11, 109]], [2.74, 2.88, 2.91]),
        row("gpt-image-1-no-sg", 40, [[25, 13, 82], [3, 6, 111], [3, 16, 101]], [2.48, 2.90, 2.82]),
    ]),
];

/// Scores in ascending order, one entry per annotation.
pub fn expand(freq: [u64; 3]) -> Vec<u8> {
    (1..=3u8)
        .flat_map(|s| std::iter::repeat_n(s, freq[s as usize - 1] as usize))
        .collect()
}

/// Records whose per-variant score multisets and rank-1 counts equal the
/// table rows. Annotations alternate between two annotators.
pub fn reconstruct(rows: &[Row], task_prefix: &str) -> Vec<AnnotationRecord> {
    let total = rows.iter().map(|r| r.f1).sum::<u64>() as usize;
    let scores: Vec<[Vec<u8>; 3]> = rows
        .iter()
        .map(|r| {
            let s = [expand(r.freq[0]), expand(r.freq[1]), expand(r.freq[2])];
            for m in &s {
                assert_eq!(m.len(), total, "{}: frequencies must sum to the annotation count", r.variant);
            }
            s
        })
        .collect();
    let winners: Vec<usize> = rows
        .iter()
        .enumerate()
        .flat_map(|(v, r)| std::iter::repeat_n(v, r.f1 as usize))
        .collect();
    (0..total)
        .map(|i| {
            let mut next_rank = 2;
            let variants: BTreeMap<String, Scores> = rows
                .iter()
                .enumerate()
                .map(|(v, r)| {
                    let rank = if winners[i] == v {
                        1
                    } else {
                        next_rank += 1;
                        next_rank - 1
                    };
                    (
                        r.variant.to_string(),
                        Scores {
                            rank,
                            resolution: scores[v][0][i],
                            fidelity: scores[v][1][i],
                            robustness: scores[v][2][i],
                        },
                    )
                })
                .collect();
            AnnotationRecord {
                annotator_id: format!("annotator-{}", i % 2 + 1),
                task_id: format!("{task_prefix}{:03}", i / 2),
                variants,
            }
        })
        .collect()
}
