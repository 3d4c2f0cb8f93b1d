//! Significance tests.

use serde::{Deserialize, Serialize};
use statrs::distribution::{Binomial, ContinuousCDF, DiscreteCDF, Normal};

use crate::BenchError;

/// Both samples at most this large use the exact permutation distribution.
pub const EXACT_MAX_SAMPLE: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PMethod {
    Exact,
    Normal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MannWhitney {
    pub u_a: f64,
    pub u_b: f64,
    /// Normal-approximation z of `u_a`, tie- and continuity-corrected.
    pub z: f64,
    pub p_two_sided: f64,
    pub method: PMethod,
}

/// Midranks (1-based) of `values`.
fn midranks(values: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && values[idx[j + 1]] == values[idx[i]] {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            ranks[k] = r;
        }
        i = j + 1;
    }
    ranks
}

/// Tie sizes in `values`.
fn tie_groups(values: &[f64]) -> Vec<usize> {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut out = Vec::new();
    let mut i = 0;
    while i < sorted.len() {
        let j = sorted[i..].iter().take_while(|&&v| v == sorted[i]).count();
        out.push(j);
        i += j;
    }
    out
}

/// Rank sums of group A over every way of choosing `n_a` of the pooled
/// ranks, in twice-rank units so midranks stay integral.
fn exact_rank_sums(ranks2: &[u64], n_a: usize) -> Vec<u64> {
    let mut out = Vec::new();
    fn go(ranks2: &[u64], start: usize, left: usize, acc: u64, out: &mut Vec<u64>) {
        if left == 0 {
            out.push(acc);
            return;
        }
        for i in start..=ranks2.len() - left {
            go(ranks2, i + 1, left - 1, acc + ranks2[i], out);
        }
    }
    go(ranks2, 0, n_a, 0, &mut out);
    out
}

/// Wilcoxon-Mann-Whitney test. `u_a` counts pairs with `a > b` plus half
/// the ties. The two-sided p is exact when both samples have at most
/// [`EXACT_MAX_SAMPLE`] values and uses the normal approximation otherwise.
/// Identical pooled values give p = 1.
pub fn mann_whitney_u(a: &[f64], b: &[f64]) -> Result<MannWhitney, BenchError> {
    if a.is_empty() || b.is_empty() {
        return Err(BenchError::EmptySample);
    }
    let (n1, n2) = (a.len() as f64, b.len() as f64);
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let ranks = midranks(&pooled);
    let r_a: f64 = ranks[..a.len()].iter().sum();
    let u_a = r_a - n1 * (n1 + 1.0) / 2.0;
    let u_b = n1 * n2 - u_a;

    let n = n1 + n2;
    let tie_term: f64 = tie_groups(&pooled)
        .into_iter()
        .map(|t| (t as f64).powi(3) - t as f64)
        .sum();
    let var = n1 * n2 / 12.0 * ((n + 1.0) - tie_term / (n * (n - 1.0)));
    if var <= 0.0 {
        return Ok(MannWhitney {
            u_a,
            u_b,
            z: 0.0,
            p_two_sided: 1.0,
            method: PMethod::Exact,
        });
    }
    let mean = n1 * n2 / 2.0;
    let diff = u_a - mean;
    let z = (diff.abs() - 0.5).max(0.0) * diff.signum() / var.sqrt();

    if a.len() <= EXACT_MAX_SAMPLE && b.len() <= EXACT_MAX_SAMPLE {
        let ranks2: Vec<u64> = ranks.iter().map(|r| (r * 2.0).round() as u64).collect();
        let observed: u64 = ranks2[..a.len()].iter().sum();
        let sums = exact_rank_sums(&ranks2, a.len());
        let total = sums.len() as f64;
        let le = sums.iter().filter(|&&s| s <= observed).count() as f64 / total;
        let ge = sums.iter().filter(|&&s| s >= observed).count() as f64 / total;
        return Ok(MannWhitney {
            u_a,
            u_b,
            z,
            p_two_sided: (2.0 * le.min(ge)).min(1.0),
            method: PMethod::Exact,
        });
    }
    let std = Normal::standard();
    Ok(MannWhitney {
        u_a,
        u_b,
        z,
        p_two_sided: (2.0 * std.sf(z.abs())).min(1.0),
        method: PMethod::Normal,
    })
}

/// `C(n, k)` for all k, exactly. Valid for n ≤ 127.
fn binomial_row(n: u32) -> Vec<u128> {
    let mut row = vec![1u128];
    for _ in 0..n {
        let mut next = vec![1u128; row.len() + 1];
        for k in 1..row.len() {
            next[k] = row[k - 1] + row[k];
        }
        row = next;
    }
    row
}

/// Exact one-sided sign test as a fraction: `(Σ_{k≥pos} C(n,k), n)`, the
/// p-value being the numerator over `2^n`. `None` when `n` exceeds 127.
pub fn sign_test_exact(n_positive: u32, n_negative: u32) -> Option<(u128, u32)> {
    let n = n_positive + n_negative;
    if n > 127 {
        return None;
    }
    let row = binomial_row(n);
    Some((row[n_positive as usize..].iter().sum(), n))
}

/// One-sided paired sign test: P(X ≥ n_positive) for X ~ Bin(n, 1/2),
/// ties already dropped.
pub fn sign_test_one_sided(n_positive: u32, n_negative: u32) -> Result<f64, BenchError> {
    let n = n_positive + n_negative;
    if n == 0 {
        return Err(BenchError::NoInformativePairs);
    }
    if let Some((num, n)) = sign_test_exact(n_positive, n_negative) {
        return Ok(num as f64 / 2f64.powi(n as i32));
    }
    let bin = Binomial::new(0.5, n as u64).expect("valid binomial parameters");
    Ok(if n_positive == 0 { 1.0 } else { bin.sf(n_positive as u64 - 1) })
}
