//! Stratified sampling of benchmark tasks.

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use uisuggest_core::Stratum;

use crate::{extract_feedback_sentence, BenchError, BenchTask, CritiqueRecord};

/// Splits `total` over `counts` in proportion, rounding by largest
/// remainder. Ties go to the earlier entry. Exact integer arithmetic.
pub fn largest_remainder(total: usize, counts: &[usize]) -> Vec<usize> {
    let pool: usize = counts.iter().sum();
    if pool == 0 {
        return vec![0; counts.len()];
    }
    let mut alloc: Vec<usize> = counts.iter().map(|&c| total * c / pool).collect();
    let mut order: Vec<usize> = (0..counts.len()).collect();
    // Stable sort keeps earlier entries first among equal remainders.
    order.sort_by_key(|&i| std::cmp::Reverse(total * counts[i] % pool));
    let short = total - alloc.iter().sum::<usize>();
    for &i in order.iter().take(short) {
        alloc[i] += 1;
    }
    alloc
}

/// Draws `total` tasks, at most one per screenshot, with per-stratum counts
/// proportional to the strata's prevalence among `records`.
///
/// Deterministic for a given record order and seed. Strata with the fewest
/// candidates pick first so that shared screenshots do not starve them.
pub fn stratified_sample(
    records: &[CritiqueRecord],
    total: usize,
    seed: u64,
) -> Result<Vec<BenchTask>, BenchError> {
    let by_stratum: Vec<Vec<&CritiqueRecord>> = Stratum::ALL
        .iter()
        .map(|&s| records.iter().filter(|r| r.stratum() == s).collect())
        .collect();
    let counts: Vec<usize> = by_stratum.iter().map(Vec::len).collect();
    let quotas = largest_remainder(total, &counts);

    let mut order: Vec<usize> = (0..3).collect();
    order.sort_by_key(|&i| (by_stratum[i].len(), i));

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut used: HashSet<&str> = HashSet::new();
    let mut picked: Vec<Vec<&CritiqueRecord>> = vec![Vec::new(); 3];
    for i in order {
        let mut candidates = by_stratum[i].clone();
        candidates.shuffle(&mut rng);
        for r in candidates {
            if picked[i].len() == quotas[i] {
                break;
            }
            if used.insert(r.screenshot_id.as_str()) {
                picked[i].push(r);
            }
        }
        if picked[i].len() < quotas[i] {
            return Err(BenchError::InsufficientRecords {
                stratum: Stratum::ALL[i],
                needed: quotas[i],
                available: picked[i].len(),
            });
        }
    }

    let width = total.to_string().len().max(3);
    picked
        .into_iter()
        .zip(Stratum::ALL)
        .flat_map(|(rs, s)| rs.into_iter().map(move |r| (r, s)))
        .enumerate()
        .map(|(i, (r, stratum))| {
            Ok(BenchTask {
                task_id: format!("t{:0width$}", i + 1),
                screenshot_id: r.screenshot_id.clone(),
                image: r.image.clone(),
                feedback: extract_feedback_sentence(&r.critique_text)?,
                bbox: r.bbox,
                stratum,
                split: None,
            })
        })
        .collect()
}
