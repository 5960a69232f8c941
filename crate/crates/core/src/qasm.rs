//! OpenQASM 3 text for family members, the family manifest, and a parser for
//! the subset this crate emits.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize, Serializer};
use serde_json::value::RawValue;

use crate::dtc::{build_cycle_unitary, CircuitFamily, DtcParams, Gate, PhaseSet};
use crate::error::{Error, Result};
use crate::rng::AngleInterval;

/// Bit order written into every manifest.
pub const BIT_ORDER: &str = "bitstring index i = chain position i, leftmost first";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExportFormat {
    Qasm3,
}

impl FromStr for ExportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "qasm3" | "openqasm3" | "qasm" => Ok(ExportFormat::Qasm3),
            other => Err(Error::UnsupportedFormat(other.to_string())),
        }
    }
}

/// Decimal text with 17 significant digits; always parses back to the same
/// double.
pub fn format_sig17(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x:?}");
    }
    let exponent = x.abs().log10().floor() as i32;
    if (-5..=15).contains(&exponent) {
        let decimals = (16 - exponent).max(0) as usize;
        let text = format!("{x:.decimals$}");
        if text.parse::<f64>().ok() == Some(x) {
            return text;
        }
    }
    format!("{x:.16e}")
}

pub(crate) fn serialize_sig17<S: Serializer>(values: &[f64], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(
        values.iter().map(|&v| {
            RawValue::from_string(format_sig17(v)).expect("formatted number is valid JSON")
        }),
    )
}

pub fn member_file_name(q: usize, seed: u64, n: usize) -> String {
    format!("dtc_q{q}_seed{seed}_n{n}.qasm")
}

/// OpenQASM 3 program for member `n`. `physical` adds mapping comments.
pub fn member_program(family: &CircuitFamily, n: usize, physical: Option<&[usize]>) -> String {
    let q = family.q();
    let mut out = String::new();
    let _ = writeln!(out, "OPENQASM 3.0;");
    let _ = writeln!(out, "include \"stdgates.inc\";");
    let _ = writeln!(
        out,
        "// dtc q={q} g={} seed={} cycles={n}",
        family.params.g, family.params.seed
    );
    if let Some(path) = physical {
        let mapping: Vec<String> = path
            .iter()
            .enumerate()
            .map(|(i, p)| format!("q[{i}]->{p}"))
            .collect();
        let _ = writeln!(out, "// layout: {}", mapping.join(" "));
    }
    let _ = writeln!(out, "qubit[{q}] q;");
    let _ = writeln!(out, "bit[{q}] c;");
    for cycle in 0..n {
        let _ = writeln!(out, "// cycle {}", cycle + 1);
        for gate in family.unitary.gates() {
            match *gate {
                Gate::Rx { qubit, angle } => {
                    let _ = writeln!(out, "rx({}) q[{qubit}];", format_sig17(angle));
                }
                Gate::Rzz { a, b, angle } => {
                    let _ = writeln!(out, "rzz({}) q[{a}], q[{b}];", format_sig17(angle));
                }
                Gate::Rz { qubit, angle } => {
                    let _ = writeln!(out, "rz({}) q[{qubit}];", format_sig17(angle));
                }
            }
        }
    }
    for j in 0..q {
        let _ = writeln!(out, "c[{j}] = measure q[{j}];");
    }
    out
}

/// A parsed program: register width and gates in order. Every qubit is
/// measured at the end.
#[derive(Debug, Clone, PartialEq)]
pub struct Program {
    pub q: usize,
    pub gates: Vec<Gate>,
    pub measured: Vec<usize>,
}

pub fn parse_program(text: &str) -> Result<Program> {
    let mut q = None;
    let mut gates = Vec::new();
    let mut measured = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split("//").next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let bad =
            |msg: &str| Error::invalid("OpenQASM program", format!("line {}: {msg}", lineno + 1));
        let stmt = line
            .strip_suffix(';')
            .ok_or_else(|| bad("missing `;`"))?
            .trim();
        if stmt.starts_with("OPENQASM") || stmt.starts_with("include") || stmt.starts_with("bit[") {
            continue;
        }
        if let Some(rest) = stmt.strip_prefix("qubit[") {
            let width = rest
                .split(']')
                .next()
                .and_then(|w| w.parse::<usize>().ok())
                .ok_or_else(|| bad("bad qubit declaration"))?;
            q = Some(width);
            continue;
        }
        let width = q.ok_or_else(|| bad("gate before qubit declaration"))?;
        let qubit_index = |operand: &str| -> Result<usize> {
            let idx = operand
                .trim()
                .strip_prefix("q[")
                .and_then(|s| s.strip_suffix(']'))
                .and_then(|s| s.parse::<usize>().ok())
                .ok_or_else(|| bad(&format!("bad operand `{operand}`")))?;
            if idx >= width {
                return Err(bad(&format!("qubit {idx} out of range")));
            }
            Ok(idx)
        };
        if let Some((_, target)) = stmt.split_once("= measure") {
            measured.push(qubit_index(target)?);
            continue;
        }
        let (head, operands) = stmt
            .split_once(')')
            .ok_or_else(|| bad("unrecognized statement"))?;
        let (name, angle) = head
            .split_once('(')
            .ok_or_else(|| bad("unrecognized statement"))?;
        let angle: f64 = angle
            .trim()
            .parse()
            .map_err(|_| bad(&format!("bad angle `{angle}`")))?;
        let gate = match name.trim() {
            "rx" => Gate::Rx {
                qubit: qubit_index(operands)?,
                angle,
            },
            "rz" => Gate::Rz {
                qubit: qubit_index(operands)?,
                angle,
            },
            "rzz" => {
                let (a, b) = operands
                    .split_once(',')
                    .ok_or_else(|| bad("rzz needs two operands"))?;
                Gate::Rzz {
                    a: qubit_index(a)?,
                    b: qubit_index(b)?,
                    angle,
                }
            }
            other => return Err(bad(&format!("unsupported gate `{other}`"))),
        };
        gates.push(gate);
    }
    let q = q.ok_or_else(|| Error::invalid("OpenQASM program", "no qubit declaration"))?;
    Ok(Program { q, gates, measured })
}

fn default_convention() -> String {
    "half-angle".to_string()
}

/// Family manifest. Angles are written with 17 significant digits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyManifest {
    pub q: usize,
    pub g: f64,
    pub seed: u64,
    pub n_max: usize,
    #[serde(serialize_with = "serialize_sig17")]
    pub rzz_angles: Vec<f64>,
    #[serde(serialize_with = "serialize_sig17")]
    pub rz_angles: Vec<f64>,
    /// Sampled values are the gate angles `λ` of `exp(-iλP/2)`.
    #[serde(default = "default_convention")]
    pub convention: String,
    pub rzz_interval: AngleInterval,
    pub rz_interval: AngleInterval,
    pub bit_order: String,
    #[serde(default)]
    pub members: Vec<String>,
}

impl FamilyManifest {
    pub fn from_family(family: &CircuitFamily) -> Self {
        let p = &family.params;
        FamilyManifest {
            q: p.q,
            g: p.g,
            seed: p.seed,
            n_max: p.n_max,
            rzz_angles: family.phases.rzz_angles.clone(),
            rz_angles: family.phases.rz_angles.clone(),
            convention: default_convention(),
            rzz_interval: p.rzz_interval,
            rz_interval: p.rz_interval,
            bit_order: BIT_ORDER.to_string(),
            members: (0..=p.n_max)
                .map(|n| member_file_name(p.q, p.seed, n))
                .collect(),
        }
    }

    pub fn params(&self) -> DtcParams {
        DtcParams {
            q: self.q,
            g: self.g,
            seed: self.seed,
            n_max: self.n_max,
            rzz_interval: self.rzz_interval,
            rz_interval: self.rz_interval,
        }
    }

    pub fn phases(&self) -> PhaseSet {
        PhaseSet {
            rzz_angles: self.rzz_angles.clone(),
            rz_angles: self.rz_angles.clone(),
        }
    }

    /// Rebuilds the family from the recorded angles (not by resampling).
    pub fn family(&self) -> Result<CircuitFamily> {
        if self.convention != "half-angle" {
            return Err(Error::invalid(
                "manifest",
                format!("unknown angle convention `{}`", self.convention),
            ));
        }
        let params = self.params();
        let phases = self.phases();
        let unitary = build_cycle_unitary(&params, &phases)?;
        Ok(CircuitFamily {
            params,
            phases,
            unitary,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// Writes one `.qasm` file per member plus `manifest.json` into `dir`.
pub fn export_family(
    family: &CircuitFamily,
    format: ExportFormat,
    dir: &Path,
) -> Result<Vec<PathBuf>> {
    let ExportFormat::Qasm3 = format;
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let manifest = FamilyManifest::from_family(family);
    let mut written = Vec::with_capacity(family.len() + 1);
    for (n, name) in manifest.members.iter().enumerate() {
        let path = dir.join(name);
        fs::write(&path, member_program(family, n, None)).map_err(|e| Error::io(&path, e))?;
        written.push(path);
    }
    let path = dir.join("manifest.json");
    fs::write(&path, manifest.to_json()).map_err(|e| Error::io(&path, e))?;
    written.push(path);
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn family(q: usize, n_max: usize) -> CircuitFamily {
        CircuitFamily::generate(&DtcParams::new(q, 12345).with_n_max(n_max)).unwrap()
    }

    fn count(text: &str, prefix: &str) -> usize {
        text.lines().filter(|l| l.starts_with(prefix)).count()
    }

    #[test]
    fn member_zero_has_no_gates() {
        let text = member_program(&family(2, 3), 0, None);
        assert!(text.contains("qubit[2] q;"));
        assert_eq!(count(&text, "rx("), 0);
        assert_eq!(count(&text, "rzz("), 0);
        assert_eq!(text.matches("measure").count(), 2);
    }

    #[test]
    fn one_cycle_gate_counts() {
        let text = member_program(&family(5, 3), 1, Some(&[10, 12, 15, 18, 17]));
        assert_eq!(count(&text, "rx("), 5);
        assert_eq!(count(&text, "rzz("), 4);
        assert_eq!(count(&text, "rz("), 5);
        assert_eq!(text.matches("measure").count(), 5);
        assert!(text.contains("q[2]->15"));
    }

    #[test]
    fn parse_recovers_exact_gates() {
        let fam = family(4, 3);
        let program = parse_program(&member_program(&fam, 3, None)).unwrap();
        assert_eq!(program.q, 4);
        let expected: Vec<Gate> = fam.member_gates(3).copied().collect();
        assert_eq!(program.gates, expected);
        assert_eq!(program.measured, vec![0, 1, 2, 3]);
    }

    #[test]
    fn parse_rejects_garbage() {
        assert!(parse_program("OPENQASM 3.0;\nrx(0.1) q[0];").is_err());
        assert!(parse_program("qubit[2] q;\nrx(0.1) q[2];").is_err());
        assert!(parse_program("qubit[2] q;\ncx q[0], q[1];").is_err());
        assert!(parse_program("qubit[2] q;\nrx(abc) q[0];").is_err());
    }

    #[test]
    fn manifest_round_trip_reproduces_phases() {
        let fam = family(5, 80);
        let manifest = FamilyManifest::from_family(&fam);
        let text = manifest.to_json();
        assert!(text.contains("\"convention\": \"half-angle\""));
        let back = FamilyManifest::from_json(&text).unwrap();
        assert_eq!(back.phases(), fam.phases);
        assert_eq!(back.family().unwrap(), fam);
    }

    #[test]
    fn sig17_text() {
        assert_eq!(format_sig17(std::f64::consts::PI), "3.1415926535897931");
        assert_eq!(format_sig17(0.0), "0.0");
        for x in [1e-9, 123456.789, -2.370946058638946, 1e300, 5e-324] {
            assert_eq!(format_sig17(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn format_identifiers() {
        assert_eq!(
            "qasm3".parse::<ExportFormat>().unwrap(),
            ExportFormat::Qasm3
        );
        assert!(matches!(
            "quil".parse::<ExportFormat>(),
            Err(Error::UnsupportedFormat(_))
        ));
    }

    #[test]
    fn export_writes_all_members() {
        let dir = tempfile::tempdir().unwrap();
        let written = export_family(&family(3, 4), ExportFormat::Qasm3, dir.path()).unwrap();
        assert_eq!(written.len(), 6);
        assert!(dir.path().join("dtc_q3_seed12345_n4.qasm").exists());
    }
}
