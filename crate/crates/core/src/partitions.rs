//! Integer partitions of the outsider count and the worth-extremal
//! outsider structures.

use serde::Serialize;

use crate::error::{Error, Result};

/// Required number of parts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PartCount {
    Exactly(usize),
    Any,
}

/// Lazy enumeration of the partitions of `m`, each a non-increasing vector,
/// in reverse-lexicographic order.
#[derive(Debug, Clone)]
pub struct PartitionSet {
    m: usize,
    count: PartCount,
    current: Option<Vec<usize>>,
    started: bool,
}

pub fn enumerate_partitions(m: usize, count: PartCount) -> Result<PartitionSet> {
    if m < 1 {
        return Err(Error::domain("cannot partition fewer than one agent"));
    }
    if let PartCount::Exactly(j) = count {
        if j < 1 || j > m {
            return Err(Error::domain(format!(
                "part count must satisfy 1 <= j <= m, got j={j}, m={m}"
            )));
        }
    }
    Ok(PartitionSet {
        m,
        count,
        current: None,
        started: false,
    })
}

impl PartitionSet {
    pub fn m(&self) -> usize {
        self.m
    }

    pub fn part_count(&self) -> PartCount {
        self.count
    }

    fn first(&self) -> Vec<usize> {
        match self.count {
            PartCount::Exactly(j) => {
                let mut p = vec![1; j];
                p[0] = self.m - j + 1;
                p
            }
            PartCount::Any => vec![self.m],
        }
    }
}

fn advance_exact(p: &mut [usize]) -> bool {
    let j = p.len();
    let mut suffix = 0;
    let mut suffix_sums = vec![0; j + 1];
    for i in (0..j).rev() {
        suffix += p[i];
        suffix_sums[i] = suffix;
    }
    for i in (0..j.saturating_sub(1)).rev() {
        if p[i] < 2 {
            continue;
        }
        let cap = p[i] - 1;
        let rest = j - i - 1;
        let rem = suffix_sums[i] - cap;
        if rest <= rem && rem <= rest * cap {
            p[i] = cap;
            let (mut rem, mut cap) = (rem, cap);
            for (t, slot) in p.iter_mut().enumerate().skip(i + 1) {
                let after = j - t - 1;
                let part = cap.min(rem - after);
                *slot = part;
                rem -= part;
                cap = part;
            }
            return true;
        }
    }
    false
}

fn advance_any(p: &mut Vec<usize>) -> bool {
    let Some(i) = p.iter().rposition(|&x| x > 1) else {
        return false;
    };
    let v = p[i] - 1;
    let mut rem = p.len() - i;
    p.truncate(i);
    p.push(v);
    while rem > 0 {
        let part = v.min(rem);
        p.push(part);
        rem -= part;
    }
    true
}

impl Iterator for PartitionSet {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        if !self.started {
            self.started = true;
            self.current = Some(self.first());
            return self.current.clone();
        }
        let p = self.current.as_mut()?;
        let advanced = match self.count {
            PartCount::Exactly(_) => advance_exact(p),
            PartCount::Any => advance_any(p),
        };
        if advanced {
            Some(p.clone())
        } else {
            self.current = None;
            None
        }
    }
}

/// Number of partitions of `m` into exactly `j` parts,
/// `p(m, j) = p(m - 1, j - 1) + p(m - j, j)`.
pub fn partition_count(m: usize, j: usize) -> u128 {
    if j == 0 || j > m {
        return u128::from(m == 0 && j == 0);
    }
    // table[a][b] = partitions of a into exactly b parts
    let mut table = vec![vec![0u128; j + 1]; m + 1];
    table[0][0] = 1;
    for a in 1..=m {
        for b in 1..=j.min(a) {
            table[a][b] = table[a - 1][b - 1] + table[a - b][b];
        }
    }
    table[m][j]
}

/// Number of partitions of `m` into any number of parts.
pub fn total_partition_count(m: usize) -> u128 {
    (1..=m).map(|j| partition_count(m, j)).sum()
}

/// An outsider structure singled out as worth-minimizing or maximizing.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ExtremalPartition {
    pub parts: Vec<usize>,
    /// Set when the continuous optimum `m / j` is not integral and the
    /// balanced integer split is returned in its place.
    pub extrapolated: bool,
}

fn check_extremal(m: usize, j: usize) -> Result<()> {
    if m < 1 || j < 1 || j > m {
        return Err(Error::domain(format!(
            "part count must satisfy 1 <= j <= m, got j={j}, m={m}"
        )));
    }
    Ok(())
}

/// Equal split of `m` outsiders into `j` coalitions; the balanced split
/// (parts differing by at most one) when `j` does not divide `m`.
pub fn min_worth_partition(m: usize, j: usize) -> Result<ExtremalPartition> {
    check_extremal(m, j)?;
    let (q, r) = (m / j, m % j);
    let parts = (0..j).map(|i| if i < r { q + 1 } else { q }).collect();
    Ok(ExtremalPartition {
        parts,
        extrapolated: r != 0,
    })
}

/// One coalition of `m - (j - 1)` outsiders and `j - 1` singletons.
pub fn max_worth_partition(m: usize, j: usize) -> Result<ExtremalPartition> {
    check_extremal(m, j)?;
    let mut parts = vec![1; j];
    parts[0] = m - (j - 1);
    Ok(ExtremalPartition {
        parts,
        extrapolated: false,
    })
}
