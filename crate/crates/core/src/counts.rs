use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Measured bitstring counts of one family member. Character `j` of a key is
/// the outcome of chain position `j`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShotRecord {
    pub n: usize,
    pub shots: u64,
    pub counts: BTreeMap<String, u64>,
}

impl ShotRecord {
    /// Builds a record from basis-state indices, where bit `j` of an index is
    /// chain position `j`.
    pub fn from_indices(
        n: usize,
        q: usize,
        indexed: impl IntoIterator<Item = (usize, u64)>,
    ) -> Self {
        let mut counts = BTreeMap::new();
        let mut shots = 0;
        for (index, c) in indexed {
            if c > 0 {
                *counts.entry(bitstring(index, q)).or_insert(0) += c;
                shots += c;
            }
        }
        ShotRecord { n, shots, counts }
    }

    /// Checks bit width, alphabet and that counts sum to `shots`.
    pub fn validate(&self, q: usize) -> Result<()> {
        let total: u64 = self.counts.values().sum();
        if total != self.shots {
            return Err(Error::invalid(
                "counts",
                format!(
                    "member {} counts sum to {total}, declared shots {}",
                    self.n, self.shots
                ),
            ));
        }
        if let Some(bad) = self.counts.keys().find(|k| k.len() != q) {
            return Err(Error::invalid(
                "counts",
                format!("bitstring `{bad}` has {} bits, expected {q}", bad.len()),
            ));
        }
        if let Some(bad) = self
            .counts
            .keys()
            .find(|k| k.bytes().any(|b| b != b'0' && b != b'1'))
        {
            return Err(Error::invalid(
                "counts",
                format!("bitstring `{bad}` is not binary"),
            ));
        }
        Ok(())
    }

    pub fn polarizations(&self) -> Result<Vec<f64>> {
        polarization_from_counts(&self.counts)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("counts serialize")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

pub fn bitstring(index: usize, q: usize) -> String {
    (0..q)
        .map(|j| if (index >> j) & 1 == 1 { '1' } else { '0' })
        .collect()
}

/// ⟨Z_j⟩ = (N(j=0) − N(j=1)) / total for each position `j`.
pub fn polarization_from_counts(counts: &BTreeMap<String, u64>) -> Result<Vec<f64>> {
    let total: u64 = counts.values().sum();
    let Some(width) = counts.keys().next().map(String::len) else {
        return Err(Error::invalid("counts", "empty record"));
    };
    if total == 0 {
        return Err(Error::invalid("counts", "no shots recorded"));
    }
    let mut diff = vec![0i64; width];
    for (bits, &c) in counts {
        if bits.len() != width {
            return Err(Error::invalid(
                "counts",
                format!(
                    "bitstring `{bits}` has {} bits, expected {width}",
                    bits.len()
                ),
            ));
        }
        for (d, b) in diff.iter_mut().zip(bits.bytes()) {
            match b {
                b'0' => *d += c as i64,
                b'1' => *d -= c as i64,
                _ => {
                    return Err(Error::invalid(
                        "counts",
                        format!("bitstring `{bits}` is not binary"),
                    ))
                }
            }
        }
    }
    Ok(diff.into_iter().map(|d| d as f64 / total as f64).collect())
}
