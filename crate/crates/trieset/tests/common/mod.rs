//! Generators and independent oracles shared by the integration suites.

#![allow(dead_code)]

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use trieset::measures::SortedSet;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `n` distinct values drawn uniformly from `[0..u)`.
pub fn uniform_set(r: &mut ChaCha8Rng, u: u64, n: usize) -> Vec<u64> {
    assert!(n as u64 <= u);
    let mut picked = BTreeSet::new();
    while picked.len() < n {
        picked.insert(r.random_range(0..u));
    }
    picked.into_iter().collect()
}

/// Values bunched into short bursts, the shape inverted lists tend to
/// have. Roughly `n` elements.
pub fn clustered_set(r: &mut ChaCha8Rng, u: u64, n: usize) -> Vec<u64> {
    assert!(n as u64 <= u);
    let mut picked = BTreeSet::new();
    while picked.len() < n {
        let start = r.random_range(0..u);
        let burst = r.random_range(1..=8u64);
        for v in start..(start + burst).min(u) {
            picked.insert(v);
            if picked.len() >= n {
                break;
            }
        }
    }
    picked.into_iter().collect()
}

/// A few long runs of consecutive values, about `n` elements in total.
pub fn run_heavy_set(r: &mut ChaCha8Rng, u: u64, n: usize) -> Vec<u64> {
    assert!(n as u64 <= u);
    let mut picked = BTreeSet::new();
    while picked.len() < n {
        let len = r.random_range((n as u64 / 8).max(2)..=(n as u64 / 2).max(3));
        let start = r.random_range(0..u);
        for v in start..(start + len).min(u) {
            picked.insert(v);
            if picked.len() >= n {
                break;
            }
        }
    }
    picked.into_iter().collect()
}

/// Reference intersection: pairwise two-pointer merges.
pub fn intersect_oracle(sets: &[Vec<u64>]) -> Vec<u64> {
    let mut acc = sets[0].clone();
    for s in &sets[1..] {
        let mut next = Vec::new();
        let (mut i, mut j) = (0, 0);
        while i < acc.len() && j < s.len() {
            match acc[i].cmp(&s[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    next.push(acc[i]);
                    i += 1;
                    j += 1;
                }
            }
        }
        acc = next;
    }
    acc
}

/// Exhaustive minimum certificate size by dynamic programming over all
/// interval partitions: `cost[y]` is the fewest intervals tiling `[0..y)`.
/// Only usable at toy scale (quadratic in `u`).
///
/// `merge_runs` switches between singleton member intervals and member
/// intervals covering whole runs of consecutive result values.
pub fn dp_min_certificate(sets: &[&SortedSet], merge_runs: bool) -> usize {
    let u = sets[0].universe() as usize;
    let members: Vec<bool> = {
        let owned: Vec<Vec<u64>> = sets.iter().map(|s| s.elems().to_vec()).collect();
        let inter = intersect_oracle(&owned);
        let mut m = vec![false; u];
        for x in inter {
            m[x as usize] = true;
        }
        m
    };
    // prefix[i][x] = how many elements of set i are below x
    let prefix: Vec<Vec<usize>> = sets
        .iter()
        .map(|s| {
            let mut p = vec![0usize; u + 1];
            for x in 0..u {
                p[x + 1] = p[x] + s.elems().binary_search(&(x as u64)).is_ok() as usize;
            }
            p
        })
        .collect();

    const INF: usize = usize::MAX / 2;
    let mut cost = vec![INF; u + 1];
    cost[0] = 0;
    for lo in 0..u {
        if cost[lo] == INF {
            continue;
        }
        for hi in lo + 1..=u {
            let eliminator = prefix.iter().any(|p| p[hi] == p[lo]);
            let all_members = members[lo..hi].iter().all(|&m| m);
            let member_ok = all_members && (merge_runs || hi - lo == 1);
            if eliminator || member_ok {
                cost[hi] = cost[hi].min(cost[lo] + 1);
            }
        }
    }
    cost[u]
}
