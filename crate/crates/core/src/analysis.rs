//! Visible-cycle metrics from polarization traces.

use std::fmt::Write as _;

use serde::Serialize;

use crate::coverage::Layout;
use crate::error::{Error, Result};
use crate::noise::NoiseModel;
use crate::trace::PolarizationTrace;

/// `2/e`, the amplitude below which a cycle no longer counts as visible.
pub const DEFAULT_THRESHOLD: f64 = 2.0 / std::f64::consts::E;
pub const DEFAULT_SPAM_TOLERANCE: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AnalysisConfig {
    pub threshold: f64,
    pub spam_tolerance: f64,
    /// Number of leading amplitudes used for decay fits; all when `None`.
    pub fit_window: Option<usize>,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        AnalysisConfig {
            threshold: DEFAULT_THRESHOLD,
            spam_tolerance: DEFAULT_SPAM_TOLERANCE,
            fit_window: None,
        }
    }
}

impl AnalysisConfig {
    pub fn with_threshold(mut self, threshold: f64) -> Self {
        self.threshold = threshold;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.threshold > 0.0 && self.threshold < 2.0) {
            return Err(Error::invalid(
                "threshold",
                format!("{} is not in (0, 2)", self.threshold),
            ));
        }
        if !(0.0..=1.0).contains(&self.spam_tolerance) {
            return Err(Error::invalid(
                "SPAM tolerance",
                format!("{} is not in [0, 1]", self.spam_tolerance),
            ));
        }
        if self.fit_window.is_some_and(|w| w < 3) {
            return Err(Error::invalid("fit window", "needs at least 3 cycles"));
        }
        Ok(())
    }
}

/// `A_j(n) = |⟨Z_j(n+1)⟩ − ⟨Z_j(n)⟩|` for `n = 0..horizon`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AmplitudeSeries {
    pub values: Vec<Vec<f64>>,
}

impl AmplitudeSeries {
    pub fn horizon(&self) -> usize {
        self.values.first().map_or(0, Vec::len)
    }

    pub fn series(&self, qubit: usize) -> &[f64] {
        &self.values[qubit]
    }
}

pub fn cycle_amplitudes(trace: &PolarizationTrace) -> Result<AmplitudeSeries> {
    if trace.horizon == 0 {
        return Err(Error::invalid("trace", "horizon 0 has no cycle amplitudes"));
    }
    Ok(AmplitudeSeries {
        values: trace
            .values
            .iter()
            .map(|z| z.windows(2).map(|w| (w[1] - w[0]).abs()).collect())
            .collect(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Visibility {
    pub n_vis: usize,
    /// No crossing within the horizon; `n_vis` is a lower bound.
    pub saturated: bool,
}

/// Leading cycles whose amplitude stays strictly above the threshold.
pub fn visible_cycles_of(amplitudes: &[f64], threshold: f64) -> Visibility {
    match amplitudes.iter().position(|&a| a <= threshold) {
        Some(n) => Visibility {
            n_vis: n,
            saturated: false,
        },
        None => Visibility {
            n_vis: amplitudes.len(),
            saturated: true,
        },
    }
}

pub fn visible_cycles(amplitudes: &AmplitudeSeries, config: &AnalysisConfig) -> Vec<Visibility> {
    amplitudes
        .values
        .iter()
        .map(|a| visible_cycles_of(a, config.threshold))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpamEntry {
    /// `(1 − ⟨Z(0)⟩) / 2`.
    pub deviation: f64,
    pub flagged: bool,
}

pub fn spam_check(trace: &PolarizationTrace, config: &AnalysisConfig) -> Result<Vec<SpamEntry>> {
    trace
        .values
        .iter()
        .enumerate()
        .map(|(j, z)| {
            let z0 = *z
                .first()
                .ok_or_else(|| Error::invalid("trace", format!("qubit {j} has no cycle 0")))?;
            let deviation = (1.0 - z0) / 2.0;
            Ok(SpamEntry {
                deviation,
                flagged: deviation > config.spam_tolerance,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeviceScore {
    pub layout_means: Vec<f64>,
    pub mean: f64,
    /// Population standard deviation of the layout means.
    pub std: f64,
}

/// Averages per-qubit visible cycles within each layout, then across layouts.
pub fn layout_score(n_vis: &[Vec<usize>]) -> Result<DeviceScore> {
    if n_vis.is_empty() {
        return Err(Error::invalid("layout score", "no layouts"));
    }
    let layout_means = n_vis
        .iter()
        .map(|v| {
            if v.is_empty() {
                Err(Error::invalid("layout score", "layout without qubits"))
            } else {
                Ok(v.iter().sum::<usize>() as f64 / v.len() as f64)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    let k = layout_means.len() as f64;
    let mean = layout_means.iter().sum::<f64>() / k;
    let var = layout_means.iter().map(|m| (m - mean).powi(2)).sum::<f64>() / k;
    Ok(DeviceScore {
        layout_means,
        mean,
        std: var.sqrt(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Prediction {
    /// Predicted visible cycles; `None` when no neighboring edge is noisy.
    pub cycles: Option<f64>,
    pub eps_left: f64,
    pub eps_right: f64,
    /// `1 − p01 − p10`.
    pub readout_factor: f64,
}

/// Weak-noise estimate `(15/16) · g(Γ) / (ε_left + ε_right)` per chain qubit,
/// with missing neighbors contributing no error.
pub fn predict_visibility(noise: &NoiseModel) -> Result<Vec<Prediction>> {
    noise.validate()?;
    let q = noise.q();
    Ok((0..q)
        .map(|j| {
            let eps_left = if j > 0 { noise.two_qubit[j - 1] } else { 0.0 };
            let eps_right = if j + 1 < q { noise.two_qubit[j] } else { 0.0 };
            let readout_factor = noise.readout[j].attenuation();
            let total = eps_left + eps_right;
            Prediction {
                cycles: (total > 0.0).then(|| (15.0 / 16.0) * readout_factor / total),
                eps_left,
                eps_right,
                readout_factor,
            }
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecayFit {
    /// Decay rate per cycle of the fitted `A(n) ∝ exp(−rate · n)`.
    pub rate: f64,
    pub r_squared: f64,
    pub points: usize,
}

/// Least-squares fit of `ln A(n)` against `n` over the first `window`
/// amplitudes, ignoring points at or below `floor`.
pub fn fit_decay_series(amplitudes: &[f64], floor: f64, window: Option<usize>) -> Result<DecayFit> {
    let end = window.map_or(amplitudes.len(), |w| w.min(amplitudes.len()));
    let points: Vec<(f64, f64)> = amplitudes[..end]
        .iter()
        .enumerate()
        .filter(|&(_, &a)| a > floor && a > 0.0)
        .map(|(n, &a)| (n as f64, a.ln()))
        .collect();
    if points.len() < 3 {
        return Err(Error::invalid(
            "decay fit",
            format!("{} usable points, need at least 3", points.len()),
        ));
    }
    let m = points.len() as f64;
    let mean_x = points.iter().map(|p| p.0).sum::<f64>() / m;
    let mean_y = points.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = points.iter().map(|p| (p.0 - mean_x).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mean_x) * (p.1 - mean_y)).sum();
    let slope = sxy / sxx;
    let ss_tot: f64 = points.iter().map(|p| (p.1 - mean_y).powi(2)).sum();
    let ss_res: f64 = points
        .iter()
        .map(|p| (p.1 - (mean_y + slope * (p.0 - mean_x))).powi(2))
        .sum();
    let r_squared = if ss_tot == 0.0 {
        1.0
    } else {
        1.0 - ss_res / ss_tot
    };
    Ok(DecayFit {
        rate: -slope,
        r_squared,
        points: points.len(),
    })
}

/// Per-qubit decay fits with floor `threshold · 0.1`.
pub fn fit_decay(amplitudes: &AmplitudeSeries, config: &AnalysisConfig) -> Vec<Result<DecayFit>> {
    amplitudes
        .values
        .iter()
        .map(|a| fit_decay_series(a, config.threshold * 0.1, config.fit_window))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LayoutReport {
    pub layout_id: usize,
    pub path: Vec<usize>,
    pub n_vis: Vec<usize>,
    pub saturated: Vec<bool>,
    pub spam_deviation: Vec<f64>,
    pub spam_flagged: Vec<bool>,
    pub mean: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VisibilityReport {
    pub threshold: f64,
    pub spam_tolerance: f64,
    pub horizon: usize,
    pub layouts: Vec<LayoutReport>,
    pub device_mean: f64,
    pub device_std: f64,
}

impl VisibilityReport {
    /// Scores one trace per layout; trace position `j` sits on `path[j]`.
    pub fn build(runs: &[(Layout, PolarizationTrace)], config: &AnalysisConfig) -> Result<Self> {
        config.validate()?;
        let Some((_, first)) = runs.first() else {
            return Err(Error::invalid("report", "no layouts"));
        };
        let horizon = first.horizon;
        let mut layouts = Vec::with_capacity(runs.len());
        for (layout_id, (layout, trace)) in runs.iter().enumerate() {
            if trace.horizon != horizon {
                return Err(Error::invalid(
                    "report",
                    format!(
                        "layout {layout_id} has horizon {}, expected {horizon}",
                        trace.horizon
                    ),
                ));
            }
            if trace.q != layout.len() {
                return Err(Error::invalid(
                    "report",
                    format!(
                        "layout {layout_id} has {} qubits but its trace {}",
                        layout.len(),
                        trace.q
                    ),
                ));
            }
            let vis = visible_cycles(&cycle_amplitudes(trace)?, config);
            let spam = spam_check(trace, config)?;
            let n_vis: Vec<usize> = vis.iter().map(|v| v.n_vis).collect();
            layouts.push(LayoutReport {
                layout_id,
                path: layout.path().to_vec(),
                mean: n_vis.iter().sum::<usize>() as f64 / n_vis.len() as f64,
                n_vis,
                saturated: vis.iter().map(|v| v.saturated).collect(),
                spam_deviation: spam.iter().map(|s| s.deviation).collect(),
                spam_flagged: spam.iter().map(|s| s.flagged).collect(),
            });
        }
        let score = layout_score(&layouts.iter().map(|l| l.n_vis.clone()).collect::<Vec<_>>())?;
        Ok(VisibilityReport {
            threshold: config.threshold,
            spam_tolerance: config.spam_tolerance,
            horizon,
            layouts,
            device_mean: score.mean,
            device_std: score.std,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// `layout_id,position,physical_qubit,n_vis,spam_dev,saturated`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("layout_id,position,physical_qubit,n_vis,spam_dev,saturated\n");
        for l in &self.layouts {
            for (pos, &phys) in l.path.iter().enumerate() {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{}",
                    l.layout_id, pos, phys, l.n_vis[pos], l.spam_deviation[pos], l.saturated[pos]
                );
            }
        }
        out
    }

    pub fn to_markdown(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# Visible cycles\n");
        let _ = writeln!(
            out,
            "Threshold {:.4}, horizon {}, {} layout(s).\n",
            self.threshold,
            self.horizon,
            self.layouts.len()
        );
        let _ = writeln!(
            out,
            "Device mean **{:.2}** cycles, std {:.2} over layouts.\n",
            self.device_mean, self.device_std
        );
        let _ = writeln!(out, "| layout | path | N_vis | mean | SPAM flags |");
        let _ = writeln!(out, "|---|---|---|---|---|");
        for l in &self.layouts {
            let n_vis: Vec<String> = l
                .n_vis
                .iter()
                .zip(&l.saturated)
                .map(|(n, &s)| if s { format!("{n}+") } else { n.to_string() })
                .collect();
            let flags: Vec<String> = l
                .path
                .iter()
                .zip(&l.spam_flagged)
                .filter(|(_, &f)| f)
                .map(|(p, _)| p.to_string())
                .collect();
            let _ = writeln!(
                out,
                "| {} | {:?} | {} | {:.2} | {} |",
                l.layout_id,
                l.path,
                n_vis.join(" "),
                l.mean,
                if flags.is_empty() {
                    "-".to_string()
                } else {
                    flags.join(" ")
                }
            );
        }
        out
    }
}

/// `layout_id,qubit,cycle,polarization,amplitude` rows; the amplitude column
/// is empty at the final cycle.
pub fn plot_csv(runs: &[(Layout, PolarizationTrace)]) -> String {
    let mut out = String::from("layout_id,qubit,cycle,polarization,amplitude\n");
    for (layout_id, (layout, trace)) in runs.iter().enumerate() {
        for (j, z) in trace.values.iter().enumerate() {
            let phys = layout.path()[j];
            for (n, &zn) in z.iter().enumerate() {
                let amp = z.get(n + 1).map(|next| (next - zn).abs().to_string());
                let _ = writeln!(
                    out,
                    "{layout_id},{phys},{n},{zn},{}",
                    amp.unwrap_or_default()
                );
            }
        }
    }
    out
}

/// `layout_id,cycle,mean_amplitude`: qubit-averaged amplitude per layout.
pub fn mean_amplitude_csv(runs: &[(Layout, PolarizationTrace)]) -> Result<String> {
    let mut out = String::from("layout_id,cycle,mean_amplitude\n");
    for (layout_id, (_, trace)) in runs.iter().enumerate() {
        let amps = cycle_amplitudes(trace)?;
        for n in 0..amps.horizon() {
            let mean = amps.values.iter().map(|a| a[n]).sum::<f64>() / amps.values.len() as f64;
            let _ = writeln!(out, "{layout_id},{n},{mean}");
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise::ReadoutError;
    use crate::trace::Shots;

    fn trace(series: &[&[f64]]) -> PolarizationTrace {
        let rows: Vec<Vec<f64>> = (0..series[0].len())
            .map(|n| series.iter().map(|s| s[n]).collect())
            .collect();
        PolarizationTrace::from_cycles(&rows, Shots::Exact, None).unwrap()
    }

    #[test]
    fn amplitudes() {
        let a = cycle_amplitudes(&trace(&[
            &[1.0, -1.0, 1.0],
            &[0.3, 0.3, 0.3],
            &[1.0, -0.8, 0.64],
        ]))
        .unwrap();
        assert_eq!(a.series(0), &[2.0, 2.0]);
        assert_eq!(a.series(1), &[0.0, 0.0]);
        assert!((a.series(2)[0] - 1.8).abs() < 1e-15 && (a.series(2)[1] - 1.44).abs() < 1e-15);
        assert!(cycle_amplitudes(&trace(&[&[1.0]])).is_err());
    }

    #[test]
    fn visibility_is_a_consecutive_prefix() {
        assert_eq!(
            visible_cycles_of(&[2.0, 2.0, 0.5, 2.0], DEFAULT_THRESHOLD),
            Visibility {
                n_vis: 2,
                saturated: false
            }
        );
        let all = visible_cycles_of(&[2.0; 80], DEFAULT_THRESHOLD);
        assert_eq!((all.n_vis, all.saturated), (80, true));
        assert_eq!(
            visible_cycles_of(&[DEFAULT_THRESHOLD], DEFAULT_THRESHOLD).n_vis,
            0
        );
        assert_eq!(DEFAULT_THRESHOLD, 0.7357588823428847);
    }

    #[test]
    fn spam_deviation() {
        let cfg = AnalysisConfig::default();
        let s = spam_check(&trace(&[&[1.0, -1.0], &[0.4, -0.4], &[0.96, -0.96]]), &cfg).unwrap();
        assert_eq!((s[0].deviation, s[0].flagged), (0.0, false));
        assert!((s[1].deviation - 0.3).abs() < 1e-15 && s[1].flagged);
        assert!((s[2].deviation - 0.02).abs() < 1e-15 && !s[2].flagged);
    }

    #[test]
    fn layout_means() {
        let one = layout_score(&[vec![45; 5]]).unwrap();
        assert_eq!((one.mean, one.std), (45.0, 0.0));
        let two = layout_score(&[vec![45; 5], vec![3; 5]]).unwrap();
        assert_eq!((two.mean, two.std), (24.0, 21.0));
        assert!(layout_score(&[]).is_err());
    }

    #[test]
    fn predictions() {
        let bulk = NoiseModel::uniform(3, 0.05, 0.0);
        let p = predict_visibility(&bulk).unwrap();
        assert!((p[1].cycles.unwrap() - 9.375).abs() < 1e-12);
        assert!((p[0].cycles.unwrap() - 18.75).abs() < 1e-12);
        assert_eq!(p[0].eps_left, 0.0);
        let dead = bulk.with_readout(1, ReadoutError::symmetric(0.5));
        assert_eq!(predict_visibility(&dead).unwrap()[1].cycles, Some(0.0));
        assert_eq!(
            predict_visibility(&NoiseModel::ideal(2)).unwrap()[0].cycles,
            None
        );
    }

    #[test]
    fn exponential_fits() {
        let a: Vec<f64> = (0..=30).map(|n| 2.0 * (-(n as f64) / 10.0).exp()).collect();
        let fit = fit_decay_series(&a, DEFAULT_THRESHOLD * 0.1, None).unwrap();
        assert!((fit.rate - 0.1).abs() < 1e-9);
        assert!((fit.r_squared - 1.0).abs() < 1e-12);
        let flat = fit_decay_series(&[2.0; 10], 0.07, None).unwrap();
        assert_eq!((flat.rate, flat.r_squared), (0.0, 1.0));
        assert!(fit_decay_series(&[2.0, 0.0, 0.0, 0.0], 0.07, None).is_err());
    }

    #[test]
    fn report_outputs() {
        let t = trace(&[&[1.0, -1.0, 1.0], &[1.0, -0.5, 0.1]]);
        let runs = vec![(Layout::new(vec![3, 4]), t)];
        let report = VisibilityReport::build(&runs, &AnalysisConfig::default()).unwrap();
        assert_eq!(report.layouts[0].n_vis, vec![2, 1]);
        assert_eq!(report.device_mean, 1.5);
        let csv = report.to_csv();
        assert!(csv.contains("0,0,3,2,0,true") && csv.contains("0,1,4,1,0,false"));
        assert!(report.to_markdown().contains("2+ 1"));
        let plot = plot_csv(&runs);
        assert_eq!(plot.lines().count(), 1 + 6);
        assert!(plot.lines().any(|l| l == "0,4,2,0.1,"));
    }
}
