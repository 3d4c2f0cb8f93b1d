mod support;

use std::collections::HashMap;

use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use support::reported::{expand, ABLATION, MODELS};
use uisuggest_bench::{mann_whitney_u, sign_test_one_sided, PMethod};

/// U for `a` by direct pair counting.
fn pair_u(a: &[u8], b: &[u8]) -> f64 {
    let mut u = 0.0;
    for x in a {
        for y in b {
            u += if x > y { 1.0 } else if x == y { 0.5 } else { 0.0 };
        }
    }
    u
}

/// Two-sided exact p from every assignment of the pooled values to the
/// first sample: twice the smaller tail, capped at 1.
fn exact_oracle(a: &[u8], b: &[u8], cache: &mut HashMap<(Vec<u8>, usize), Vec<f64>>) -> f64 {
    let mut pooled: Vec<u8> = a.iter().chain(b).copied().collect();
    pooled.sort();
    let n = pooled.len();
    let us = cache.entry((pooled.clone(), a.len())).or_insert_with(|| {
        (0u32..1 << n)
            .filter(|m| m.count_ones() as usize == a.len())
            .map(|m| {
                let (mut x, mut y) = (Vec::new(), Vec::new());
                for (i, v) in pooled.iter().enumerate() {
                    if m & (1 << i) != 0 { x.push(*v) } else { y.push(*v) }
                }
                pair_u(&x, &y)
            })
            .collect()
    });
    let obs = pair_u(a, b);
    let total = us.len() as f64;
    let le = us.iter().filter(|&&u| u <= obs + 1e-9).count() as f64 / total;
    let ge = us.iter().filter(|&&u| u >= obs - 1e-9).count() as f64 / total;
    (2.0 * le.min(ge)).min(1.0)
}

fn multisets(max_len: usize) -> Vec<Vec<u8>> {
    let mut out = Vec::new();
    for n in 1..=max_len {
        for ones in 0..=n {
            for twos in 0..=n - ones {
                out.push(expand([ones as u64, twos as u64, (n - ones - twos) as u64]));
            }
        }
    }
    out
}

fn f(v: &[u8]) -> Vec<f64> {
    v.iter().map(|&x| x as f64).collect()
}

#[test]
fn matches_exact_enumeration_for_small_samples() {
    let sets = multisets(6);
    assert_eq!(sets.len(), 83);
    let mut cache = HashMap::new();
    let mut worst = 0.0f64;
    for a in &sets {
        for b in &sets {
            let r = mann_whitney_u(&f(a), &f(b)).unwrap();
            assert_eq!(r.u_a, pair_u(a, b));
            let p = exact_oracle(a, b, &mut cache);
            worst = worst.max((r.p_two_sided - p).abs());
        }
    }
    assert!(worst <= 0.02, "largest deviation {worst}");
}

#[test]
fn two_by_two_example() {
    let r = mann_whitney_u(&[3.0, 3.0], &[1.0, 1.0]).unwrap();
    assert_eq!(r.method, PMethod::Exact);
    assert!((r.p_two_sided - 1.0 / 3.0).abs() < 1e-12);
    let same = mann_whitney_u(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]).unwrap();
    assert_eq!(same.z, 0.0);
    assert_eq!(same.p_two_sided, 1.0);
}

/// Two-sided permutation p for integer scores, `shuffles` random relabelings.
fn permutation_p(a: &[u8], b: &[u8], shuffles: usize, seed: u64) -> f64 {
    let mean = a.len() as f64 * b.len() as f64 / 2.0;
    let obs = (pair_u(a, b) - mean).abs();
    let mut pooled: Vec<u8> = a.iter().chain(b).copied().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut hits = 0usize;
    for _ in 0..shuffles {
        pooled.shuffle(&mut rng);
        let (x, y) = pooled.split_at(a.len());
        // Pair counting via score histograms.
        let mut cy = [0f64; 4];
        for &v in y {
            cy[v as usize] += 1.0;
        }
        let u: f64 = x
            .iter()
            .map(|&v| (1..v).map(|w| cy[w as usize]).sum::<f64>() + 0.5 * cy[v as usize])
            .sum();
        if (u - mean).abs() >= obs - 1e-9 {
            hits += 1;
        }
    }
    (hits + 1) as f64 / (shuffles + 1) as f64
}

#[test]
fn model_resolution_differences_are_significant() {
    let gpt = expand(MODELS[0].freq[0]);
    for other in &MODELS[1..] {
        let o = expand(other.freq[0]);
        let r = mann_whitney_u(&f(&gpt), &f(&o)).unwrap();
        assert_eq!(r.method, PMethod::Normal);
        assert!(r.p_two_sided <= 0.001, "{}: p = {}", other.variant, r.p_two_sided);
    }
    let bagel = expand(MODELS[3].freq[0]);
    let mc = permutation_p(&gpt, &bagel, 100_000, 11);
    assert!(mc <= 0.001, "permutation p = {mc}");
}

#[test]
fn normal_approximation_tracks_permutation_test() {
    let mut pairs = Vec::new();
    for (i, a) in MODELS.iter().enumerate() {
        for b in &MODELS[i + 1..] {
            pairs.push((a, b));
        }
    }
    for (_, rows) in &ABLATION {
        pairs.push((&rows[0], &rows[1]));
    }
    for (k, (a, b)) in pairs.into_iter().enumerate() {
        for m in 0..3 {
            let (x, y) = (expand(a.freq[m]), expand(b.freq[m]));
            let r = mann_whitney_u(&f(&x), &f(&y)).unwrap();
            let mc = permutation_p(&x, &y, 10_000, k as u64 * 3 + m as u64);
            let label = format!("{} vs {} metric {m}: normal {} permutation {mc}", a.variant, b.variant, r.p_two_sided);
            assert_eq!(r.p_two_sided <= 0.05, mc <= 0.05, "{label}");
            // Far from significance, ceiling effects on the 3-point scale
            // make the tail lumpy and the approximation looser.
            if mc < 0.1 {
                assert!((r.p_two_sided - mc).abs() <= 0.01, "{label}");
            }
        }
    }
}

#[test]
fn sign_test_values() {
    let p = sign_test_one_sided(19, 1).unwrap();
    assert_eq!(p, 21.0 / 1048576.0);
    assert!(p <= 0.05);
    assert_eq!(sign_test_one_sided(8, 0).unwrap(), 1.0 / 256.0);
    assert_eq!(sign_test_one_sided(5, 5).unwrap(), 638.0 / 1024.0);
}

proptest! {
    #[test]
    fn sign_test_monotone_in_positives(n in 1u32..300, k in 0u32..300) {
        prop_assume!(k < n);
        let lower = sign_test_one_sided(k, n - k).unwrap();
        let higher = sign_test_one_sided(k + 1, n - k - 1).unwrap();
        prop_assert!(higher <= lower);
        prop_assert!((0.0..=1.0).contains(&higher));
    }

    #[test]
    fn two_sided_p_is_symmetric(
        a in prop::collection::vec(1u8..=3, 1..40),
        b in prop::collection::vec(1u8..=3, 1..40),
    ) {
        let ab = mann_whitney_u(&f(&a), &f(&b)).unwrap();
        let ba = mann_whitney_u(&f(&b), &f(&a)).unwrap();
        prop_assert!((ab.p_two_sided - ba.p_two_sided).abs() < 1e-12);
        prop_assert_eq!(ab.u_a + ab.u_b, (a.len() * b.len()) as f64);
    }
}
