use std::fmt::Write as _;
use std::path::Path;

use clap::ValueEnum;
use serde_json::json;

use dtc_core::analysis::VisibilityReport;
use dtc_core::coverage::{validate_cover, CouplingMap, CoveringSet};
use dtc_core::dtc::CircuitFamily;
use dtc_core::harness::ExportManifest;
use dtc_core::qasm::{format_sig17, FamilyManifest};

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Md,
}

pub fn report(report: &VisibilityReport, format: Format) -> String {
    match format {
        Format::Json => report.to_json(),
        Format::Csv => report.to_csv(),
        Format::Md => report.to_markdown(),
    }
}

pub fn family(family: &CircuitFamily, format: Format) -> String {
    let p = &family.params;
    match format {
        Format::Json => FamilyManifest::from_family(family).to_json(),
        Format::Csv => {
            let mut out = String::from("layer,index,angle\n");
            for (i, a) in family.phases.rzz_angles.iter().enumerate() {
                let _ = writeln!(out, "rzz,{i},{}", format_sig17(*a));
            }
            for (i, a) in family.phases.rz_angles.iter().enumerate() {
                let _ = writeln!(out, "rz,{i},{}", format_sig17(*a));
            }
            out
        }
        Format::Md => {
            let mut out = format!(
                "# DTC family\n\nq = {}, g = {}, seed = {}, members n = 0..={} ({} gates per cycle)\n\n",
                p.q,
                p.g,
                p.seed,
                p.n_max,
                family.unitary.gate_count()
            );
            let _ = writeln!(out, "| qubit | rz angle | rzz angle to next |");
            let _ = writeln!(out, "|---|---|---|");
            for j in 0..p.q {
                let rzz = family
                    .phases
                    .rzz_angles
                    .get(j)
                    .map_or(String::new(), |a| format!("{a:.6}"));
                let _ = writeln!(out, "| {j} | {:.6} | {rzz} |", family.phases.rz_angles[j]);
            }
            out
        }
    }
}

pub fn topology(map: &CouplingMap, format: Format) -> String {
    let degrees: Vec<usize> = (0..map.num_qubits)
        .map(|v| map.neighbors(v).len())
        .collect();
    let max_degree = degrees.iter().copied().max().unwrap_or(0);
    let components = map.components();
    match format {
        Format::Json => serde_json::to_string_pretty(&json!({
            "name": map.name,
            "num_qubits": map.num_qubits,
            "num_edges": map.num_edges(),
            "max_degree": max_degree,
            "components": components.len(),
            "edges": map.edges().iter().map(|&(a, b)| [a, b]).collect::<Vec<_>>(),
        }))
        .expect("summary serializes"),
        Format::Csv => {
            let mut out = String::from("a,b\n");
            for (a, b) in map.edges() {
                let _ = writeln!(out, "{a},{b}");
            }
            out
        }
        Format::Md => format!(
            "# {}\n\n{} qubits, {} edges, max degree {}, {} connected component(s)\n",
            map.name,
            map.num_qubits,
            map.num_edges(),
            max_degree,
            components.len()
        ),
    }
}

pub fn cover(map: &CouplingMap, cover: &CoveringSet, format: Format) -> String {
    let check = validate_cover(map, cover.chain_length, &cover.layouts);
    match format {
        Format::Json => cover.to_json(),
        Format::Csv => {
            let mut out = String::from("layout_id,path,new_edges\n");
            for (k, l) in cover.layouts.iter().enumerate() {
                let path: Vec<String> = l.path().iter().map(usize::to_string).collect();
                let _ = writeln!(out, "{k},{},{}", path.join(" "), check.new_edges[k]);
            }
            out
        }
        Format::Md => {
            let mut out = format!(
                "# Covering set: {} with {}-qubit chains\n\n{} layouts (lower bound {}), {} of {} edges covered{}\n\n",
                cover.map_name,
                cover.chain_length,
                cover.layouts.len(),
                check.lower_bound,
                cover.covered.len(),
                map.num_edges(),
                if cover.randomized { ", randomized candidates" } else { "" }
            );
            let _ = writeln!(out, "| layout | path | new edges |");
            let _ = writeln!(out, "|---|---|---|");
            for (k, l) in cover.layouts.iter().enumerate() {
                let _ = writeln!(out, "| {k} | {:?} | {} |", l.path(), check.new_edges[k]);
            }
            if !cover.uncovered.is_empty() {
                let _ = writeln!(out, "\nUncovered edges: {:?}", cover.uncovered);
            }
            out
        }
    }
}

pub fn export_summary(manifest: &ExportManifest, out: &Path) -> String {
    let files: usize = manifest.layouts.iter().map(|l| l.members.len()).sum();
    format!(
        "Exported {} layouts, {} circuit files and manifest.json to {}\nCounts expected at {}\n",
        manifest.layouts.len(),
        files,
        out.display(),
        manifest.counts_pattern
    )
}
