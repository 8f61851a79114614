#![allow(dead_code)]

use std::collections::BTreeSet;

use cournot_core::{CoalitionStructure, MarketParams};

pub fn rel(got: f64, want: f64) -> f64 {
    (got - want).abs() / want.abs().max(f64::MIN_POSITIVE)
}

pub fn params(gamma: f64, n: usize) -> MarketParams {
    MarketParams::new(10.0, 1.0, gamma, n).unwrap()
}

/// Partitions of `m` by brute force: every composition, sorted and deduped.
pub fn brute_partitions(m: usize) -> BTreeSet<Vec<usize>> {
    fn compositions(m: usize, prefix: &mut Vec<usize>, out: &mut BTreeSet<Vec<usize>>) {
        if m == 0 {
            let mut p = prefix.clone();
            p.sort_unstable_by(|a, b| b.cmp(a));
            out.insert(p);
            return;
        }
        for first in 1..=m {
            prefix.push(first);
            compositions(m - first, prefix, out);
            prefix.pop();
        }
    }
    let mut out = BTreeSet::new();
    compositions(m, &mut Vec::new(), &mut out);
    out
}

/// `p(m)` from Euler's pentagonal number recurrence.
pub fn pentagonal_partition_numbers(limit: usize) -> Vec<u128> {
    let mut p = vec![0i128; limit + 1];
    p[0] = 1;
    for m in 1..=limit {
        let mut acc = 0i128;
        for k in 1i64.. {
            let sign = if k % 2 == 1 { 1 } else { -1 };
            let g1 = (k * (3 * k - 1) / 2) as usize;
            let g2 = (k * (3 * k + 1) / 2) as usize;
            if g1 > m {
                break;
            }
            acc += sign * p[m - g1];
            if g2 <= m {
                acc += sign * p[m - g2];
            }
        }
        p[m] = acc;
    }
    p.into_iter().map(|x| x as u128).collect()
}

/// Every `(s, outsider partition)` with `s < n`, from the brute-force
/// enumerator.
pub fn all_structures(n: usize) -> Vec<CoalitionStructure> {
    let mut out = Vec::new();
    for s in 1..n {
        for p in brute_partitions(n - s) {
            out.push(CoalitionStructure::new(n, s, p).unwrap());
        }
    }
    out
}
