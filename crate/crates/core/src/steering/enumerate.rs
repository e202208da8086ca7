use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gaussian::Bipartition;

/// Which family of ordered bipartitions to enumerate.
///
/// `Full`: the parties cover all modes (m, complement); 2^N - 2 partitions.
/// `DisjointPairs`: both parties nonempty and disjoint, union may be a
/// proper subset; 3^N - 2^{N+1} + 1 ordered pairs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnumerationMode {
    Full,
    DisjointPairs,
}

impl std::fmt::Display for EnumerationMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            EnumerationMode::Full => "full",
            EnumerationMode::DisjointPairs => "disjoint_pairs",
        })
    }
}

/// Default enumeration cap: 2^20 - 2, the full-mode count at N = 20.
pub const DEFAULT_PARTITION_CAP: u64 = (1 << 20) - 2;

/// Number of partitions enumeration would produce (saturating).
pub fn partition_count(n_modes: usize, mode: EnumerationMode) -> u64 {
    let n = n_modes as u32;
    match mode {
        EnumerationMode::Full => {
            if n >= 64 {
                u64::MAX
            } else {
                (1u64 << n) - 2
            }
        }
        EnumerationMode::DisjointPairs => {
            // 3^n - 2^{n+1} + 1, saturating.
            let pow3 = 3u64.checked_pow(n);
            let pow2 = 1u64.checked_shl(n + 1);
            match (pow3, pow2) {
                (Some(a), Some(b)) => a - b + 1,
                _ => u64::MAX,
            }
        }
    }
}

fn modes_of_mask(mask: u32, n: usize) -> Vec<usize> {
    (0..n).filter(|i| mask & (1 << i) != 0).collect()
}

/// Enumerate ordered bipartitions of `n_modes` modes in canonical order:
/// ascending steering-party bitmask, then ascending steered-party bitmask
/// (bit i = mode i). The order is deterministic so reports diff cleanly.
///
/// `cap` bounds the partition count before anything is materialized;
/// exceeding it is an error so desk-scale runs stay bounded.
pub fn enumerate_bipartitions(
    n_modes: usize,
    mode: EnumerationMode,
    cap: Option<u64>,
) -> Result<Vec<Bipartition>> {
    if n_modes < 2 {
        return Err(Error::BadPartition(format!(
            "need at least 2 modes to bipartition, got {n_modes}"
        )));
    }
    if n_modes > 32 {
        return Err(Error::BadPartition(format!(
            "enumeration supports at most 32 modes, got {n_modes}"
        )));
    }
    let count = partition_count(n_modes, mode);
    let cap = cap.unwrap_or(DEFAULT_PARTITION_CAP);
    if count > cap {
        return Err(Error::TooManyPartitions { count, cap });
    }

    let n = n_modes;
    let all: u32 = if n == 32 { u32::MAX } else { (1 << n) - 1 };
    let mut out = Vec::with_capacity(count as usize);
    match mode {
        EnumerationMode::Full => {
            for m_mask in 1..all {
                out.push(
                    Bipartition::new(modes_of_mask(m_mask, n), modes_of_mask(all & !m_mask, n))
                        .expect("masks nonempty and disjoint"),
                );
            }
        }
        EnumerationMode::DisjointPairs => {
            let mut submasks = Vec::new();
            for m_mask in 1..=all {
                let comp = all & !m_mask;
                if comp == 0 {
                    continue;
                }
                // Submasks of comp come out descending; reverse for canonical
                // ascending order.
                submasks.clear();
                let mut s = comp;
                while s != 0 {
                    submasks.push(s);
                    s = (s - 1) & comp;
                }
                for &n_mask in submasks.iter().rev() {
                    out.push(
                        Bipartition::new(modes_of_mask(m_mask, n), modes_of_mask(n_mask, n))
                            .expect("masks nonempty and disjoint"),
                    );
                }
            }
        }
    }
    debug_assert_eq!(out.len() as u64, count);
    Ok(out)
}
