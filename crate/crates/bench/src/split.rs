//! Splitting a sample into disjoint evaluation sets.

use std::collections::VecDeque;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use uisuggest_core::Stratum;

use crate::sample::largest_remainder;
use crate::{BenchError, BenchTask, Split};

/// How a split's per-stratum counts are chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Allocation {
    /// In proportion to the strata among the tasks.
    Proportional,
    /// Equal per stratum.
    Uniform,
}

impl FromStr for Allocation {
    type Err = BenchError;

    fn from_str(s: &str) -> Result<Self, BenchError> {
        match s {
            "proportional" => Ok(Allocation::Proportional),
            "uniform" => Ok(Allocation::Uniform),
            other => Err(BenchError::Invalid(format!("unknown allocation {other}"))),
        }
    }
}

/// Per-split allocations in split order: mask evaluation is uniform, the
/// others proportional.
pub const DEFAULT_ALLOCATIONS: [Allocation; 3] = [
    Allocation::Proportional,
    Allocation::Uniform,
    Allocation::Proportional,
];

/// Tiny Edmonds-Karp over an adjacency matrix.
fn max_flow(cap: &mut [Vec<i64>], s: usize, t: usize) -> i64 {
    let n = cap.len();
    let mut total = 0;
    loop {
        let mut prev = vec![usize::MAX; n];
        prev[s] = s;
        let mut queue = VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            for v in 0..n {
                if prev[v] == usize::MAX && cap[u][v] > 0 {
                    prev[v] = u;
                    queue.push_back(v);
                }
            }
        }
        if prev[t] == usize::MAX {
            return total;
        }
        let mut push = i64::MAX;
        let mut v = t;
        while v != s {
            push = push.min(cap[prev[v]][v]);
            v = prev[v];
        }
        let mut v = t;
        while v != s {
            cap[prev[v]][v] -= push;
            cap[v][prev[v]] += push;
            v = prev[v];
        }
        total += push;
    }
}

/// Integer matrix with the given row and column sums whose entries are the
/// floor or ceiling of `rows[i] * cols[j] / N`. Cells with the largest
/// fractional parts are rounded up first; a max-flow pass repairs whatever
/// the greedy pass leaves unbalanced.
pub fn round_proportional(rows: &[usize], cols: &[usize]) -> Vec<Vec<usize>> {
    let n: usize = cols.iter().sum();
    assert_eq!(rows.iter().sum::<usize>(), n, "row and column totals differ");
    let (r, c) = (rows.len(), cols.len());
    if n == 0 {
        return vec![vec![0; c]; r];
    }
    let mut out: Vec<Vec<usize>> = rows
        .iter()
        .map(|&ri| cols.iter().map(|&cj| ri * cj / n).collect())
        .collect();
    let frac = |i: usize, j: usize| rows[i] * cols[j] % n;
    let mut row_short: Vec<i64> = (0..r).map(|i| (rows[i] - out[i].iter().sum::<usize>()) as i64).collect();
    let mut col_short: Vec<i64> = (0..c)
        .map(|j| (cols[j] - (0..r).map(|i| out[i][j]).sum::<usize>()) as i64)
        .collect();

    let mut cells: Vec<(usize, usize)> = (0..r)
        .flat_map(|i| (0..c).map(move |j| (i, j)))
        .filter(|&(i, j)| frac(i, j) > 0)
        .collect();
    cells.sort_by_key(|&(i, j)| std::cmp::Reverse(frac(i, j)));
    let mut raised = vec![vec![false; c]; r];
    for &(i, j) in &cells {
        if row_short[i] > 0 && col_short[j] > 0 {
            raised[i][j] = true;
            row_short[i] -= 1;
            col_short[j] -= 1;
        }
    }

    let need: i64 = row_short.iter().sum();
    if need > 0 {
        // Nodes: source, rows, cols, sink. Raised cells appear as flow
        // already sent, so augmenting paths may undo them.
        let (src, sink) = (0, 1 + r + c);
        let mut cap = vec![vec![0i64; r + c + 2]; r + c + 2];
        cap[src][1..=r].copy_from_slice(&row_short[..r]);
        for j in 0..c {
            cap[1 + r + j][sink] = col_short[j];
        }
        for &(i, j) in &cells {
            if raised[i][j] {
                cap[1 + r + j][1 + i] = 1;
            } else {
                cap[1 + i][1 + r + j] = 1;
            }
        }
        let flow = max_flow(&mut cap, src, sink);
        assert_eq!(flow, need, "a proportional rounding always exists");
        for &(i, j) in &cells {
            raised[i][j] = cap[1 + r + j][1 + i] > 0;
        }
    }
    for (i, row) in out.iter_mut().enumerate() {
        for (j, v) in row.iter_mut().enumerate() {
            *v += raised[i][j] as usize;
        }
    }
    out
}

/// Per-split, per-stratum counts. Uniform splits are fixed first; the
/// proportional ones share what remains.
pub fn split_counts(
    strata: [usize; 3],
    sizes: &[usize],
    allocations: &[Allocation],
) -> Result<Vec<[usize; 3]>, BenchError> {
    let total: usize = strata.iter().sum();
    if sizes.iter().sum::<usize>() != total {
        return Err(BenchError::SizeMismatch {
            sizes: sizes.iter().sum(),
            tasks: total,
        });
    }
    if allocations.len() != sizes.len() {
        return Err(BenchError::Invalid("one allocation per split is required".into()));
    }
    let mut out = vec![[0usize; 3]; sizes.len()];
    let mut left = strata;
    for (k, _) in allocations.iter().enumerate().filter(|(_, a)| **a == Allocation::Uniform) {
        let want = largest_remainder(sizes[k], &[1, 1, 1]);
        for (s, &w) in want.iter().enumerate() {
            if w > left[s] {
                return Err(BenchError::InsufficientRecords {
                    stratum: Stratum::ALL[s],
                    needed: w,
                    available: left[s],
                });
            }
            left[s] -= w;
            out[k][s] = w;
        }
    }
    let prop: Vec<usize> = (0..sizes.len())
        .filter(|&k| allocations[k] == Allocation::Proportional)
        .collect();
    let rows: Vec<usize> = prop.iter().map(|&k| sizes[k]).collect();
    let rounded = round_proportional(&rows, &left);
    for (row, &k) in rounded.into_iter().zip(&prop) {
        out[k].copy_from_slice(&row);
    }
    Ok(out)
}

/// Partitions `tasks` into `sizes.len()` disjoint splits. Each split's
/// stratum counts follow its allocation (within one of the exact share);
/// which tasks land where is a seeded shuffle within each stratum. The
/// returned tasks carry their split when `sizes` has three entries.
pub fn stratified_split(
    tasks: &[BenchTask],
    sizes: &[usize],
    allocations: &[Allocation],
    seed: u64,
) -> Result<Vec<Vec<BenchTask>>, BenchError> {
    let mut strata = [0usize; 3];
    for t in tasks {
        strata[t.stratum as usize] += 1;
    }
    let counts = split_counts(strata, sizes, allocations)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out: Vec<Vec<BenchTask>> = vec![Vec::new(); sizes.len()];
    for (s, stratum) in Stratum::ALL.into_iter().enumerate() {
        let mut pool: Vec<&BenchTask> = tasks.iter().filter(|t| t.stratum == stratum).collect();
        pool.shuffle(&mut rng);
        let mut it = pool.into_iter();
        for (k, split) in out.iter_mut().enumerate() {
            split.extend(it.by_ref().take(counts[k][s]).cloned());
        }
    }
    for (k, split) in out.iter_mut().enumerate() {
        split.sort_by(|a, b| a.task_id.cmp(&b.task_id));
        if sizes.len() == Split::ALL.len() {
            for t in split.iter_mut() {
                t.split = Some(Split::ALL[k]);
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn proportional_example() {
        let c = split_counts([210, 60, 30], &[120, 60, 120], &[Allocation::Proportional; 3]).unwrap();
        assert_eq!(c, vec![[84, 24, 12], [42, 12, 6], [84, 24, 12]]);
    }

    #[test]
    fn uniform_mask_split() {
        let c = split_counts([210, 60, 30], &[120, 60, 120], &DEFAULT_ALLOCATIONS).unwrap();
        assert_eq!(c[1], [20, 20, 20]);
        // The rest, 190/40/10, is shared evenly by the two 120-task splits.
        assert_eq!(c[0], [95, 20, 5]);
        assert_eq!(c[2], [95, 20, 5]);
    }

    #[test]
    fn uniform_needs_enough_per_stratum() {
        let err = split_counts([280, 10, 10], &[120, 60, 120], &DEFAULT_ALLOCATIONS).unwrap_err();
        assert!(matches!(err, BenchError::InsufficientRecords { stratum: Stratum::M, .. }));
    }

    #[test]
    fn size_mismatch() {
        assert!(matches!(
            split_counts([100, 100, 100], &[120, 60, 119], &DEFAULT_ALLOCATIONS),
            Err(BenchError::SizeMismatch { sizes: 299, tasks: 300 })
        ));
    }

    proptest! {
        #[test]
        fn rounding_respects_totals_and_bounds(
            cols in prop::collection::vec(0usize..200, 1..5),
            cuts in prop::collection::vec(0.0f64..1.0, 0..4),
        ) {
            let n: usize = cols.iter().sum();
            let mut points: Vec<usize> = cuts.iter().map(|c| (c * n as f64) as usize).collect();
            points.sort();
            let mut rows = Vec::new();
            let mut prev = 0;
            for p in points.into_iter().chain([n]) {
                rows.push(p - prev);
                prev = p;
            }
            let m = round_proportional(&rows, &cols);
            for (i, row) in m.iter().enumerate() {
                prop_assert_eq!(row.iter().sum::<usize>(), rows[i]);
                for (j, &v) in row.iter().enumerate() {
                    let exact = rows[i] * cols[j];
                    prop_assert!(v == exact / n.max(1) || v == exact.div_ceil(n.max(1)));
                }
            }
            for j in 0..cols.len() {
                prop_assert_eq!(m.iter().map(|r| r[j]).sum::<usize>(), cols[j]);
            }
        }
    }
}
