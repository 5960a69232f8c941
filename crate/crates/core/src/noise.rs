//! Noise descriptions.
//!
//! [`DeviceNoise`] is keyed by physical qubits and edges and is what users
//! write in noise files. [`NoiseModel`] is the same information restricted to
//! one chain layout, indexed by chain position, and is what the simulators
//! consume.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::coverage::CouplingMap;
use crate::error::{Error, Result};

/// Classical readout confusion for one qubit.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ReadoutError {
    /// P(read 1 | prepared 0).
    pub p01: f64,
    /// P(read 0 | prepared 1).
    pub p10: f64,
}

impl ReadoutError {
    pub fn symmetric(gamma: f64) -> Self {
        ReadoutError {
            p01: gamma,
            p10: gamma,
        }
    }

    /// `1 - p01 - p10`; the factor by which readout shrinks ⟨Z⟩.
    pub fn attenuation(&self) -> f64 {
        1.0 - self.p01 - self.p10
    }

    /// Maps a true ⟨Z⟩ onto the value a confused readout reports.
    pub fn apply(&self, z: f64) -> f64 {
        self.attenuation() * z + (self.p10 - self.p01)
    }

    pub fn is_ideal(&self) -> bool {
        self.p01 == 0.0 && self.p10 == 0.0
    }
}

/// Where two-qubit depolarizing noise is attached to a ZZ interaction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InteractionNoise {
    /// One channel of strength ε after each ZZ rotation.
    #[default]
    Aggregate,
    /// The ZZ rotation is run as CX·RZ·CX with a channel of strength ε
    /// after each CX.
    PerCnot,
}

impl fmt::Display for InteractionNoise {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            InteractionNoise::Aggregate => "aggregate",
            InteractionNoise::PerCnot => "per-cnot",
        })
    }
}

impl FromStr for InteractionNoise {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "aggregate" => Ok(InteractionNoise::Aggregate),
            "per-cnot" => Ok(InteractionNoise::PerCnot),
            other => Err(Error::invalid(
                "noise model",
                format!("unknown interaction placement `{other}`"),
            )),
        }
    }
}

fn check_probability(what: &str, p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(Error::invalid(
            "noise model",
            format!("{what} = {p} is not a probability"),
        ))
    }
}

/// Noise on a `q`-qubit chain, indexed by chain position.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    /// Depolarizing probability on edge `(j, j+1)`.
    pub two_qubit: Vec<f64>,
    pub one_qubit: Vec<f64>,
    pub readout: Vec<ReadoutError>,
    #[serde(default)]
    pub interaction: InteractionNoise,
}

impl NoiseModel {
    pub fn ideal(q: usize) -> Self {
        NoiseModel {
            two_qubit: vec![0.0; q.saturating_sub(1)],
            one_qubit: vec![0.0; q],
            readout: vec![ReadoutError::default(); q],
            interaction: InteractionNoise::Aggregate,
        }
    }

    /// Same ε on every edge and symmetric readout Γ on every qubit.
    pub fn uniform(q: usize, eps: f64, gamma: f64) -> Self {
        NoiseModel {
            two_qubit: vec![eps; q.saturating_sub(1)],
            one_qubit: vec![0.0; q],
            readout: vec![ReadoutError::symmetric(gamma); q],
            interaction: InteractionNoise::Aggregate,
        }
    }

    pub fn with_edge(mut self, j: usize, eps: f64) -> Self {
        self.two_qubit[j] = eps;
        self
    }

    pub fn with_readout(mut self, j: usize, readout: ReadoutError) -> Self {
        self.readout[j] = readout;
        self
    }

    pub fn with_one_qubit(mut self, j: usize, p: f64) -> Self {
        self.one_qubit[j] = p;
        self
    }

    pub fn with_interaction(mut self, interaction: InteractionNoise) -> Self {
        self.interaction = interaction;
        self
    }

    pub fn q(&self) -> usize {
        self.one_qubit.len()
    }

    /// Depolarizing probability of the chain edge joining `a` and `b`.
    pub fn edge(&self, a: usize, b: usize) -> Result<f64> {
        let (lo, hi) = (a.min(b), a.max(b));
        if hi != lo + 1 || hi >= self.q() {
            return Err(Error::invalid(
                "circuit",
                format!("two-qubit gate on ({a}, {b}) is not a chain edge"),
            ));
        }
        Ok(self.two_qubit[lo])
    }

    pub fn validate(&self) -> Result<()> {
        let q = self.q();
        if self.two_qubit.len() != q.saturating_sub(1) || self.readout.len() != q {
            return Err(Error::invalid("noise model", "inconsistent chain length"));
        }
        for (j, &eps) in self.two_qubit.iter().enumerate() {
            check_probability(&format!("two-qubit rate on edge {j}"), eps)?;
        }
        for (j, &p) in self.one_qubit.iter().enumerate() {
            check_probability(&format!("one-qubit rate on qubit {j}"), p)?;
        }
        for (j, r) in self.readout.iter().enumerate() {
            check_probability(&format!("p01 on qubit {j}"), r.p01)?;
            check_probability(&format!("p10 on qubit {j}"), r.p10)?;
        }
        Ok(())
    }

    pub fn is_noiseless(&self) -> bool {
        self.two_qubit.iter().all(|&e| e == 0.0)
            && self.one_qubit.iter().all(|&p| p == 0.0)
            && self.readout.iter().all(ReadoutError::is_ideal)
    }
}

/// Noise keyed by physical qubits. Per-item entries override the uniform
/// defaults.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DeviceNoise {
    pub two_qubit_default: f64,
    pub two_qubit: BTreeMap<(usize, usize), f64>,
    pub one_qubit_default: f64,
    pub one_qubit: BTreeMap<usize, f64>,
    pub readout_default: ReadoutError,
    pub readout: BTreeMap<usize, ReadoutError>,
    pub interaction: InteractionNoise,
}

impl DeviceNoise {
    pub fn ideal() -> Self {
        DeviceNoise::default()
    }

    pub fn uniform(eps: f64, gamma: f64) -> Self {
        DeviceNoise {
            two_qubit_default: eps,
            readout_default: ReadoutError::symmetric(gamma),
            ..DeviceNoise::default()
        }
    }

    pub fn with_edge(mut self, a: usize, b: usize, eps: f64) -> Self {
        self.two_qubit.insert((a.min(b), a.max(b)), eps);
        self
    }

    pub fn with_readout(mut self, qubit: usize, readout: ReadoutError) -> Self {
        self.readout.insert(qubit, readout);
        self
    }

    pub fn with_interaction(mut self, interaction: InteractionNoise) -> Self {
        self.interaction = interaction;
        self
    }

    pub fn edge_rate(&self, a: usize, b: usize) -> f64 {
        self.two_qubit
            .get(&(a.min(b), a.max(b)))
            .copied()
            .unwrap_or(self.two_qubit_default)
    }

    pub fn readout_of(&self, qubit: usize) -> ReadoutError {
        self.readout
            .get(&qubit)
            .copied()
            .unwrap_or(self.readout_default)
    }

    /// Restricts the device noise to a chain embedded along `path`.
    pub fn chain(&self, path: &[usize]) -> NoiseModel {
        NoiseModel {
            two_qubit: path
                .windows(2)
                .map(|w| self.edge_rate(w[0], w[1]))
                .collect(),
            one_qubit: path
                .iter()
                .map(|p| {
                    self.one_qubit
                        .get(p)
                        .copied()
                        .unwrap_or(self.one_qubit_default)
                })
                .collect(),
            readout: path.iter().map(|&p| self.readout_of(p)).collect(),
            interaction: self.interaction,
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_probability("uniform two-qubit rate", self.two_qubit_default)?;
        check_probability("uniform one-qubit rate", self.one_qubit_default)?;
        check_probability("uniform p01", self.readout_default.p01)?;
        check_probability("uniform p10", self.readout_default.p10)?;
        for (&(a, b), &eps) in &self.two_qubit {
            if a == b {
                return Err(Error::invalid(
                    "noise model",
                    format!("self-loop edge {a}-{b}"),
                ));
            }
            check_probability(&format!("rate on edge {a}-{b}"), eps)?;
        }
        for (&j, &p) in &self.one_qubit {
            check_probability(&format!("one-qubit rate on {j}"), p)?;
        }
        for (&j, r) in &self.readout {
            check_probability(&format!("p01 on {j}"), r.p01)?;
            check_probability(&format!("p10 on {j}"), r.p10)?;
        }
        Ok(())
    }

    /// Checks that every keyed edge and qubit exists on `map`.
    pub fn validate_for(&self, map: &CouplingMap) -> Result<()> {
        self.validate()?;
        for &(a, b) in self.two_qubit.keys() {
            if !map.has_edge(a, b) {
                return Err(Error::invalid(
                    "noise model",
                    format!("edge {a}-{b} is not in coupling map `{}`", map.name),
                ));
            }
        }
        let n = map.num_qubits;
        if let Some(j) = self
            .one_qubit
            .keys()
            .chain(self.readout.keys())
            .find(|&&j| j >= n)
        {
            return Err(Error::invalid(
                "noise model",
                format!("qubit {j} is not in coupling map `{}`", map.name),
            ));
        }
        Ok(())
    }

    /// Parses `uniform:EPS[,GAMMA]`.
    pub fn parse_shorthand(text: &str) -> Result<Self> {
        let body = text.strip_prefix("uniform:").ok_or_else(|| {
            Error::invalid(
                "noise shorthand",
                format!("`{text}` is not uniform:EPS[,GAMMA]"),
            )
        })?;
        let mut parts = body.split(',');
        let parse = |s: Option<&str>, name: &str| -> Result<Option<f64>> {
            s.map(|t| {
                t.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::invalid("noise shorthand", format!("bad {name} `{t}`")))
            })
            .transpose()
        };
        let eps = parse(parts.next(), "epsilon")?.unwrap_or(0.0);
        let gamma = parse(parts.next(), "gamma")?.unwrap_or(0.0);
        if parts.next().is_some() {
            return Err(Error::invalid("noise shorthand", "too many fields"));
        }
        let noise = DeviceNoise::uniform(eps, gamma);
        noise.validate()?;
        Ok(noise)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: Value = serde_json::from_str(text)?;
        let obj = doc
            .as_object()
            .ok_or_else(|| Error::invalid("noise model", "document must be an object"))?;
        let mut noise = DeviceNoise::default();
        let number = |v: &Value, what: &str| -> Result<f64> {
            v.as_f64()
                .ok_or_else(|| Error::invalid("noise model", format!("{what} must be a number")))
        };
        let index = |k: &str| -> Result<usize> {
            k.trim()
                .parse::<usize>()
                .map_err(|_| Error::invalid("noise model", format!("bad qubit key `{k}`")))
        };
        for (key, value) in obj {
            match key.as_str() {
                "two_qubit" => {
                    for (k, v) in as_object(value, "two_qubit")? {
                        if k == "uniform" {
                            noise.two_qubit_default = number(v, "two_qubit.uniform")?;
                            continue;
                        }
                        let (a, b) = k.split_once('-').ok_or_else(|| {
                            Error::invalid("noise model", format!("edge key `{k}` is not `a-b`"))
                        })?;
                        let (a, b) = (index(a)?, index(b)?);
                        let edge = (a.min(b), a.max(b));
                        if noise.two_qubit.insert(edge, number(v, k)?).is_some() {
                            return Err(Error::invalid(
                                "noise model",
                                format!("duplicate edge {}-{}", edge.0, edge.1),
                            ));
                        }
                    }
                }
                "one_qubit" => {
                    for (k, v) in as_object(value, "one_qubit")? {
                        if k == "uniform" {
                            noise.one_qubit_default = number(v, "one_qubit.uniform")?;
                        } else {
                            noise.one_qubit.insert(index(k)?, number(v, k)?);
                        }
                    }
                }
                "readout" => {
                    for (k, v) in as_object(value, "readout")? {
                        if k == "uniform" && v.is_number() {
                            noise.readout_default =
                                ReadoutError::symmetric(number(v, "readout.uniform")?);
                            continue;
                        }
                        let pair = v.as_array().filter(|a| a.len() == 2).ok_or_else(|| {
                            Error::invalid(
                                "noise model",
                                format!("readout `{k}` must be [p01, p10]"),
                            )
                        })?;
                        let readout = ReadoutError {
                            p01: number(&pair[0], k)?,
                            p10: number(&pair[1], k)?,
                        };
                        if k == "uniform" {
                            noise.readout_default = readout;
                        } else {
                            noise.readout.insert(index(k)?, readout);
                        }
                    }
                }
                "interaction" => {
                    noise.interaction = value
                        .as_str()
                        .ok_or_else(|| {
                            Error::invalid("noise model", "interaction must be a string")
                        })?
                        .parse()?;
                }
                other => {
                    return Err(Error::invalid(
                        "noise model",
                        format!("unknown field `{other}`"),
                    ))
                }
            }
        }
        noise.validate()?;
        Ok(noise)
    }

    pub fn to_json_value(&self) -> Value {
        let mut two = Map::new();
        two.insert("uniform".into(), json!(self.two_qubit_default));
        for (&(a, b), &eps) in &self.two_qubit {
            two.insert(format!("{a}-{b}"), json!(eps));
        }
        let mut one = Map::new();
        one.insert("uniform".into(), json!(self.one_qubit_default));
        for (&j, &p) in &self.one_qubit {
            one.insert(j.to_string(), json!(p));
        }
        let mut readout = Map::new();
        let d = self.readout_default;
        if d.p01 == d.p10 {
            readout.insert("uniform".into(), json!(d.p01));
        } else {
            readout.insert("uniform".into(), json!([d.p01, d.p10]));
        }
        for (&j, r) in &self.readout {
            readout.insert(j.to_string(), json!([r.p01, r.p10]));
        }
        json!({
            "two_qubit": two,
            "one_qubit": one,
            "readout": readout,
            "interaction": self.interaction.to_string(),
        })
    }
}

fn as_object<'a>(value: &'a Value, what: &str) -> Result<&'a Map<String, Value>> {
    value
        .as_object()
        .ok_or_else(|| Error::invalid("noise model", format!("{what} must be an object")))
}
