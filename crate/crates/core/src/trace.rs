use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// How the polarizations of a trace were estimated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shots {
    /// Infinite-shot expectation values.
    Exact,
    Sampled(u64),
}

impl Serialize for Shots {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Shots::Exact => s.serialize_str("exact"),
            Shots::Sampled(n) => s.serialize_u64(*n),
        }
    }
}

impl<'de> Deserialize<'de> for Shots {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Count(u64),
            Tag(String),
        }
        match Raw::deserialize(d)? {
            Raw::Count(n) => Ok(Shots::Sampled(n)),
            Raw::Tag(t) if t == "exact" => Ok(Shots::Exact),
            Raw::Tag(t) => Err(serde::de::Error::custom(format!(
                "shots must be a count or \"exact\", got \"{t}\""
            ))),
        }
    }
}

/// ⟨Z_j(n)⟩ for every chain qubit `j` and cycle `n = 0..=horizon`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolarizationTrace {
    pub q: usize,
    pub horizon: usize,
    pub shots: Shots,
    /// `values[j][n]`.
    pub values: Vec<Vec<f64>>,
    pub exec_seed: Option<u64>,
}

impl PolarizationTrace {
    /// Builds a trace from per-cycle rows `rows[n][j]`.
    pub fn from_cycles(rows: &[Vec<f64>], shots: Shots, exec_seed: Option<u64>) -> Result<Self> {
        let Some(first) = rows.first() else {
            return Err(Error::invalid("trace", "no cycles"));
        };
        let q = first.len();
        let values = (0..q)
            .map(|j| rows.iter().map(|row| row[j]).collect())
            .collect();
        let trace = PolarizationTrace {
            q,
            horizon: rows.len() - 1,
            shots,
            values,
            exec_seed,
        };
        if rows.iter().any(|row| row.len() != q) {
            return Err(Error::invalid("trace", "rows of differing width"));
        }
        trace.validate()?;
        Ok(trace)
    }

    pub fn value(&self, qubit: usize, cycle: usize) -> f64 {
        self.values[qubit][cycle]
    }

    pub fn series(&self, qubit: usize) -> &[f64] {
        &self.values[qubit]
    }

    /// The same trace cut at a smaller horizon.
    pub fn truncated(&self, horizon: usize) -> Result<Self> {
        if horizon > self.horizon {
            return Err(Error::invalid(
                "horizon",
                format!("{horizon} exceeds recorded horizon {}", self.horizon),
            ));
        }
        Ok(PolarizationTrace {
            values: self.values.iter().map(|v| v[..=horizon].to_vec()).collect(),
            horizon,
            ..self.clone()
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.values.len() != self.q {
            return Err(Error::invalid(
                "trace",
                format!("{} qubit series for q={}", self.values.len(), self.q),
            ));
        }
        for (j, series) in self.values.iter().enumerate() {
            if series.len() != self.horizon + 1 {
                return Err(Error::invalid(
                    "trace",
                    format!(
                        "qubit {j} has {} cycles, expected {}",
                        series.len(),
                        self.horizon + 1
                    ),
                ));
            }
            if let Some(n) = series
                .iter()
                .position(|z| z.is_nan() || z.abs() > 1.0 + 1e-10)
            {
                return Err(Error::invalid(
                    "trace",
                    format!(
                        "polarization {} of qubit {j} at cycle {n} is outside [-1, 1]",
                        series[n]
                    ),
                ));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("trace serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let trace: PolarizationTrace = serde_json::from_str(text)?;
        trace.validate()?;
        Ok(trace)
    }
}
