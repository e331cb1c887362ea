//! Batch front end: χ scans, propagation scenarios, medium design and
//! parameter sweeps. Every artifact is recorded in `metadata.json` with its
//! SHA-256 checksum.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::config::{ModeSpec, OutputKind, ScenarioConfig, SourceSpec};
use crate::diagnostics::{
    cross_section, default_beam_window, image_fidelity, total_power, Axis, DiagnosticsReport,
};
use crate::error::{Error, Result};
use crate::medium::{design_medium, DesignTargets, MediumParams};
use crate::pgm::GrayImage;
use crate::propagator::{PropagationMode, PropagationPlan, Propagator, ReferencedField};
use crate::sources::{band_limit_report, composite_beams, load_raster};
use crate::spectral::ComplexField;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Largest |residual| accepted from the designer.
pub const DESIGN_RESIDUAL_LIMIT: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Artifact {
    pub path: String,
    pub sha256: String,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct DerivedQuantities {
    pub k0: Option<f64>,
    pub group_velocity: Option<f64>,
    pub kappa: Option<f64>,
    pub reference_waist: Option<f64>,
    pub rayleigh_length: Option<f64>,
    pub cancellation_residual: Option<f64>,
    pub band_limit_fraction: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunMetadata {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub config_hash: String,
    pub resolved: serde_json::Value,
    pub derived: DerivedQuantities,
    pub wall_clock_seconds: f64,
    pub artifacts: Vec<Artifact>,
    pub warnings: Vec<String>,
}

/// Writes files under an output directory and records their checksums.
struct ArtifactWriter {
    root: PathBuf,
    artifacts: Vec<Artifact>,
}

impl ArtifactWriter {
    fn new(root: &Path) -> Result<Self> {
        fs::create_dir_all(root).map_err(|e| Error::io(root, e))?;
        Ok(ArtifactWriter {
            root: root.to_path_buf(),
            artifacts: Vec::new(),
        })
    }

    fn write(&mut self, rel: &str, bytes: &[u8]) -> Result<PathBuf> {
        let path = self.root.join(rel);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
        fs::write(&path, bytes).map_err(|e| Error::io(&path, e))?;
        self.artifacts.push(Artifact {
            path: rel.to_string(),
            sha256: sha256_hex(bytes),
        });
        Ok(path)
    }

    fn write_json<T: Serialize>(&mut self, rel: &str, value: &T) -> Result<PathBuf> {
        let text =
            serde_json::to_string_pretty(value).map_err(|e| Error::Serialize(e.to_string()))?;
        self.write(rel, text.as_bytes())
    }

    fn write_raw(&mut self, rel_base: &str, field: &ComplexField, z: f64) -> Result<()> {
        let base = self.root.join(rel_base);
        if let Some(parent) = base.parent() {
            fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
        let (bin, json) = field.write_raw(&base, z)?;
        for p in [bin, json] {
            let bytes = fs::read(&p).map_err(|e| Error::io(&p, e))?;
            let rel = p
                .strip_prefix(&self.root)
                .unwrap_or(&p)
                .to_string_lossy()
                .into_owned();
            self.artifacts.push(Artifact {
                path: rel,
                sha256: sha256_hex(&bytes),
            });
        }
        Ok(())
    }

    /// Writes `metadata.json`, which lists every artifact written so far.
    fn finish(self, mut metadata: RunMetadata) -> Result<RunMetadata> {
        metadata.artifacts = self.artifacts;
        let text =
            serde_json::to_string_pretty(&metadata).map_err(|e| Error::Serialize(e.to_string()))?;
        let path = self.root.join("metadata.json");
        fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
        Ok(metadata)
    }
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Hash of the resolved configuration plus any referenced image contents.
pub fn config_hash(config: &ScenarioConfig) -> Result<String> {
    let mut hasher = Sha256::new();
    hasher.update(config.to_toml().as_bytes());
    if let Some(SourceSpec::Image(img)) = &config.source {
        let bytes = fs::read(&img.path).map_err(|e| Error::io(&img.path, e))?;
        hasher.update(Sha256::digest(&bytes));
    }
    Ok(hex::encode(hasher.finalize()))
}

fn base_metadata(config: &ScenarioConfig, command: &str) -> Result<RunMetadata> {
    let mut derived = DerivedQuantities::default();
    if let Ok(m) = config.medium() {
        derived.k0 = Some(m.dicke_width_k0());
        derived.group_velocity = m.group_velocity().ok();
        derived.kappa = Some(m.absorption_kappa());
        derived.cancellation_residual = Some(m.check_cancellation(&config.optics));
    }
    if let Some(run) = &config.run {
        derived.reference_waist = Some(run.reference_waist);
        derived.rayleigh_length = Some(config.optics.rayleigh_length(run.reference_waist));
    }
    Ok(RunMetadata {
        tool: "slowlight".into(),
        version: TOOL_VERSION.into(),
        command: command.into(),
        config_hash: config_hash(config)?,
        resolved: serde_json::to_value(config).map_err(|e| Error::Serialize(e.to_string()))?,
        derived,
        wall_clock_seconds: 0.0,
        artifacts: Vec::new(),
        warnings: config.warnings.clone(),
    })
}

fn csv_field(s: &str) -> String {
    if s.contains(',') || s.contains('"') || s.contains('\n') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn fmt(v: f64) -> String {
    format!("{v:.12e}")
}

/// File-name label for a detuning in units of Γ, e.g. `m1.00`, `p2.00`.
pub fn delta_label(delta_over_gamma: f64) -> String {
    let sign = if delta_over_gamma < 0.0 { 'm' } else { 'p' };
    format!("{sign}{:.2}", delta_over_gamma.abs())
}

/// χ(Δ, k⊥)/α against k⊥/k₀, one CSV per detuning.
#[derive(Clone, Debug, PartialEq)]
pub struct ChiScanCurve {
    pub delta_over_gamma: f64,
    /// `(k/k₀, Im χ/α, Re χ/α)` rows.
    pub rows: Vec<(f64, f64, f64)>,
}

pub fn chi_scan(
    medium: &MediumParams,
    spec: &crate::config::ChiScanSpec,
) -> Result<Vec<ChiScanCurve>> {
    if medium.alpha() <= 0.0 {
        return Err(Error::config("medium.alpha", "χ/α needs alpha > 0"));
    }
    let k0 = medium.dicke_width_k0();
    spec.deltas_over_gamma
        .iter()
        .map(|&d| {
            let m = medium.with_delta(d * medium.gamma())?;
            let rows = (0..spec.points)
                .map(|i| {
                    let ratio = spec.k_max_over_k0 * i as f64 / (spec.points - 1) as f64;
                    let k = ratio * k0;
                    let chi = m.chi(k * k) / m.alpha();
                    (ratio, chi.im, chi.re)
                })
                .collect();
            Ok(ChiScanCurve {
                delta_over_gamma: d,
                rows,
            })
        })
        .collect()
}

pub fn run_chi_scan(config: &ScenarioConfig, out_dir: &Path) -> Result<RunMetadata> {
    let start = Instant::now();
    let medium = config.medium()?;
    let mut writer = ArtifactWriter::new(out_dir)?;
    for curve in chi_scan(medium, &config.chi_scan)? {
        let mut csv = String::from("k_over_k0[-],im_chi_over_alpha[-],re_chi_over_alpha[-]\n");
        for (k, im, re) in &curve.rows {
            let _ = writeln!(csv, "{},{},{}", fmt(*k), fmt(*im), fmt(*re));
        }
        writer.write(
            &format!("chi_delta_{}.csv", delta_label(curve.delta_over_gamma)),
            csv.as_bytes(),
        )?;
    }
    let mut meta = base_metadata(config, "chi-scan")?;
    meta.wall_clock_seconds = start.elapsed().as_secs_f64();
    writer.finish(meta)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DesignReport {
    pub medium: MediumParams,
    pub wavelength: f64,
    pub k0: f64,
    pub group_velocity: f64,
    pub kappa: f64,
    pub waist: f64,
    pub rayleigh_length: f64,
    pub kappa_z_r: f64,
    pub cancellation_residual: f64,
    /// False when an explicit medium already met the design constraints.
    pub changed: bool,
}

/// Resolves the configured medium into a design meeting the cancellation
/// condition at Δ = −Γ.
pub fn design(config: &ScenarioConfig) -> Result<DesignReport> {
    let resolved = config
        .medium
        .as_ref()
        .ok_or_else(|| Error::config("design", "a [design] or [medium] section is required"))?;
    let optics = &config.optics;
    let (medium, changed) = match &resolved.design {
        Some(_) => (resolved.params, true),
        None => {
            let m = resolved.params;
            let satisfied = m.delta() == -m.gamma()
                && m.check_cancellation(optics).abs() <= DESIGN_RESIDUAL_LIMIT;
            if satisfied {
                (m, false)
            } else {
                if m.gamma_p() <= 0.0 {
                    return Err(Error::config(
                        "medium.gamma_p",
                        "cannot satisfy the cancellation condition without pumping",
                    ));
                }
                (
                    design_medium(&DesignTargets::from_medium(&m, optics))?,
                    true,
                )
            }
        }
    };
    let residual = medium.check_cancellation(optics);
    if !(residual.abs() <= DESIGN_RESIDUAL_LIMIT) {
        return Err(Error::Domain(format!(
            "designed medium misses the cancellation condition (residual {residual:e})"
        )));
    }
    let k0 = medium.dicke_width_k0();
    let waist = config.design_waist.unwrap_or(std::f64::consts::PI / k0);
    let z_r = optics.rayleigh_length(waist);
    let kappa = medium.absorption_kappa();
    Ok(DesignReport {
        medium,
        wavelength: optics.wavelength(),
        k0,
        group_velocity: medium.group_velocity()?,
        kappa,
        waist,
        rayleigh_length: z_r,
        kappa_z_r: kappa * z_r,
        cancellation_residual: residual,
        changed,
    })
}

pub fn run_design(config: &ScenarioConfig, out_dir: &Path) -> Result<(DesignReport, RunMetadata)> {
    let start = Instant::now();
    let report = design(config)?;
    let mut writer = ArtifactWriter::new(out_dir)?;
    writer.write_json("design.json", &report)?;
    let mut meta = base_metadata(config, "design")?;
    meta.wall_clock_seconds = start.elapsed().as_secs_f64();
    Ok((report, writer.finish(meta)?))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ModeSummary {
    pub mode: String,
    pub initial: DiagnosticsReport,
    #[serde(rename = "final")]
    pub final_report: DiagnosticsReport,
    /// Mean per-beam x width at the last slice over the first, minus one.
    pub spreading: f64,
    /// Intensity correlation between the input and the last slice.
    pub fidelity: f64,
    pub slices: Vec<DiagnosticsReport>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PropagateOutcome {
    pub modes: Vec<ModeSummary>,
    pub metadata: RunMetadata,
}

pub fn build_source(config: &ScenarioConfig) -> Result<ComplexField> {
    let grid = config.grid()?;
    match config
        .source
        .as_ref()
        .ok_or_else(|| Error::config("source", "section is required"))?
    {
        SourceSpec::Beams(beams) => composite_beams(grid, beams),
        SourceSpec::Image(img) => load_raster(&img.path, grid, img.pitch, img.mapping, img.blur_px),
    }
}

pub fn propagation_mode(config: &ScenarioConfig, mode: ModeSpec) -> Result<PropagationMode> {
    Ok(match mode {
        ModeSpec::FreeSpace => PropagationMode::FreeSpace,
        ModeSpec::Eit => PropagationMode::Eit {
            medium: *config.medium()?,
        },
        ModeSpec::EitResonant => PropagationMode::Eit {
            medium: config.medium()?.with_delta(0.0)?,
        },
        ModeSpec::Uniform => PropagationMode::Uniform {
            chi: config.run()?.uniform_chi,
        },
    })
}

fn heatmap(field: &ComplexField, peak: f64, log_scale: f64) -> GrayImage {
    let g = field.grid();
    let scale = if peak > 0.0 {
        log_scale.exp() / peak
    } else {
        0.0
    };
    let pixels = field
        .values()
        .iter()
        .map(|v| (255.0 * (v.norm_sqr() * scale).clamp(0.0, 1.0)).round() as u8)
        .collect();
    GrayImage::new(g.nx(), g.ny(), pixels)
}

fn peak_intensity(field: &ComplexField) -> f64 {
    field
        .values()
        .iter()
        .map(|v| v.norm_sqr())
        .fold(0.0, f64::max)
}

pub fn run_propagate(config: &ScenarioConfig, out_dir: &Path) -> Result<PropagateOutcome> {
    let start = Instant::now();
    let run = config.run()?;
    let grid = config.grid()?;
    let input = build_source(config)?;
    let mut meta = base_metadata(config, "propagate")?;

    if let Ok(m) = config.medium() {
        let fraction = band_limit_report(&input, m.dicke_width_k0(), run.band_limit_ratio)?;
        meta.derived.band_limit_fraction = Some(fraction);
        if fraction > run.band_limit_max_fraction {
            meta.warnings.push(format!(
                "band_limit_exceeded: {:.4} of the input power lies above {} k0 (limit {})",
                fraction, run.band_limit_ratio, run.band_limit_max_fraction
            ));
        }
    }

    let plan = PropagationPlan::uniform(run.z, run.slices)?;
    let centers = config
        .source
        .as_ref()
        .map(SourceSpec::centers)
        .unwrap_or_default();
    let window = run
        .beam_window
        .unwrap_or_else(|| default_beam_window(&input, &centers));
    let input_power = total_power(&input);
    let z_r = config.optics.rayleigh_length(run.reference_waist);
    let wants = |k: OutputKind| run.outputs.contains(&k);

    let mut writer = ArtifactWriter::new(out_dir)?;
    let mut summaries = Vec::with_capacity(run.modes.len());
    for &mode_spec in &run.modes {
        let mode = propagation_mode(config, mode_spec)?;
        let name = mode_spec.name();
        let propagator = Propagator::new(mode, config.optics, grid);
        let slices = propagator.propagate_slices_referenced(&input, &plan)?;

        let reports = slices
            .iter()
            .map(|s| {
                DiagnosticsReport::measure(
                    &s.field,
                    s.z,
                    s.log_power_scale(),
                    input_power,
                    &centers,
                    window,
                )
            })
            .collect::<Result<Vec<_>>>()?;
        let last: &ReferencedField = slices.last().expect("plan is nonempty");
        let initial = reports.first().expect("plan is nonempty").clone();
        let final_report = reports.last().expect("plan is nonempty").clone();
        let spreading = final_report.mean_beam_width_x() / initial.mean_beam_width_x() - 1.0;
        let fidelity = image_fidelity(&input, &last.field)?;

        if wants(OutputKind::Heatmaps) {
            let input_peak = peak_intensity(&input);
            for (k, s) in slices.iter().enumerate() {
                let img = if run.normalize_heatmaps {
                    heatmap(&s.field, peak_intensity(&s.field), 0.0)
                } else {
                    heatmap(&s.field, input_peak, s.log_power_scale())
                };
                writer.write(&format!("{name}/heatmap_{k:03}.pgm"), &img.encode())?;
            }
            // y = 0 intensity along x (columns) against z (rows)
            let mut pixels = Vec::with_capacity(grid.nx() * slices.len());
            for s in &slices {
                let profile = cross_section(&s.field, Axis::X, run.normalize_heatmaps);
                let scale = if run.normalize_heatmaps {
                    1.0
                } else {
                    let p = cross_section(&input, Axis::X, false)
                        .into_iter()
                        .fold(0.0, f64::max);
                    if p > 0.0 {
                        s.log_power_scale().exp() / p
                    } else {
                        0.0
                    }
                };
                pixels.extend(
                    profile
                        .iter()
                        .map(|v| (255.0 * (v * scale).clamp(0.0, 1.0)).round() as u8),
                );
            }
            let xz = GrayImage::new(grid.nx(), slices.len(), pixels);
            writer.write(&format!("{name}/xz_map.pgm"), &xz.encode())?;
        }
        if wants(OutputKind::Raw) {
            writer.write_raw(&format!("{name}/field_input"), &input, 0.0)?;
            writer.write_raw(&format!("{name}/field_final"), &last.physical(), last.z)?;
        }
        if wants(OutputKind::Widths) {
            let mut csv = String::from(
                "z[m],z_over_zr[-],width_x[m],width_y[m],mean_beam_width_x[m],transmission[-],log_transmission[-]\n",
            );
            for r in &reports {
                let _ = writeln!(
                    csv,
                    "{},{},{},{},{},{},{}",
                    fmt(r.z),
                    fmt(r.z / z_r),
                    fmt(r.width_x),
                    fmt(r.width_y),
                    fmt(r.mean_beam_width_x()),
                    fmt(r.transmission),
                    fmt(r.log_transmission)
                );
            }
            writer.write(&format!("{name}/widths.csv"), csv.as_bytes())?;
        }
        if wants(OutputKind::CrossSection) {
            let a = cross_section(&input, Axis::X, run.normalize_heatmaps);
            let b = cross_section(&last.field, Axis::X, run.normalize_heatmaps);
            let b_scale = if run.normalize_heatmaps {
                1.0
            } else {
                last.log_power_scale().exp()
            };
            let mut csv = String::from("x[m],intensity_input[arb],intensity_final[arb]\n");
            for (i, x) in grid.xs().iter().enumerate() {
                let _ = writeln!(csv, "{},{},{}", fmt(*x), fmt(a[i]), fmt(b[i] * b_scale));
            }
            writer.write(&format!("{name}/cross_section.csv"), csv.as_bytes())?;
        }

        let summary = ModeSummary {
            mode: name.to_string(),
            initial,
            final_report,
            spreading,
            fidelity,
            slices: reports,
        };
        if wants(OutputKind::Report) {
            writer.write_json(&format!("{name}/report.json"), &summary)?;
        }
        summaries.push(summary);
    }
    meta.wall_clock_seconds = start.elapsed().as_secs_f64();
    let metadata = writer.finish(meta)?;
    Ok(PropagateOutcome {
        modes: summaries,
        metadata,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub index: usize,
    pub value: String,
    pub mode: String,
    pub result: std::result::Result<SweepMetrics, String>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SweepMetrics {
    pub initial_width_x: f64,
    pub final_width_x: f64,
    pub spreading: f64,
    pub transmission: f64,
    pub log_transmission: f64,
    pub fidelity: f64,
}

fn value_label(v: &toml::Value) -> String {
    match v {
        toml::Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut csv = String::from(
        "index,value,mode,status,initial_width_x[m],final_width_x[m],spreading[-],transmission[-],log_transmission[-],fidelity[-],error\n",
    );
    for r in rows {
        match &r.result {
            Ok(m) => {
                let _ = writeln!(
                    csv,
                    "{},{},{},ok,{},{},{},{},{},{},",
                    r.index,
                    csv_field(&r.value),
                    r.mode,
                    fmt(m.initial_width_x),
                    fmt(m.final_width_x),
                    fmt(m.spreading),
                    fmt(m.transmission),
                    fmt(m.log_transmission),
                    fmt(m.fidelity)
                );
            }
            Err(e) => {
                let _ = writeln!(
                    csv,
                    "{},{},{},error,,,,,,,{}",
                    r.index,
                    csv_field(&r.value),
                    r.mode,
                    csv_field(e)
                );
            }
        }
    }
    csv
}

/// Runs one propagation per sweep value (in parallel) and aggregates a
/// summary row per value and mode, in config order.
pub fn run_sweep(config: &ScenarioConfig, out_dir: &Path) -> Result<(Vec<SweepRow>, RunMetadata)> {
    let start = Instant::now();
    let sweep = config
        .sweep
        .as_ref()
        .ok_or_else(|| Error::config("sweep", "section is required"))?;
    let children: Vec<(usize, String, std::result::Result<PropagateOutcome, String>)> = sweep
        .values
        .par_iter()
        .enumerate()
        .map(|(i, value)| {
            let outcome = config
                .sweep_variant(&sweep.parameter, value)
                .and_then(|doc| ScenarioConfig::from_value(doc, &config.base_dir, false))
                .and_then(|child| run_propagate(&child, &out_dir.join(format!("run_{i:03}"))))
                .map_err(|e| e.to_string());
            (i, value_label(value), outcome)
        })
        .collect();

    let mut rows = Vec::new();
    let mut warnings = config.warnings.clone();
    let mut child_artifacts = Vec::new();
    for (index, value, outcome) in children {
        match outcome {
            Ok(o) => {
                warnings.extend(
                    o.metadata
                        .warnings
                        .iter()
                        .map(|w| format!("run_{index:03}: {w}")),
                );
                child_artifacts.extend(o.metadata.artifacts.iter().map(|a| Artifact {
                    path: format!("run_{index:03}/{}", a.path),
                    sha256: a.sha256.clone(),
                }));
                for m in o.modes {
                    rows.push(SweepRow {
                        index,
                        value: value.clone(),
                        mode: m.mode.clone(),
                        result: Ok(SweepMetrics {
                            initial_width_x: m.initial.mean_beam_width_x(),
                            final_width_x: m.final_report.mean_beam_width_x(),
                            spreading: m.spreading,
                            transmission: m.final_report.transmission,
                            log_transmission: m.final_report.log_transmission,
                            fidelity: m.fidelity,
                        }),
                    });
                }
            }
            Err(e) => rows.push(SweepRow {
                index,
                value,
                mode: String::new(),
                result: Err(e),
            }),
        }
    }
    let mut writer = ArtifactWriter::new(out_dir)?;
    writer.artifacts.extend(child_artifacts);
    writer.write("sweep_summary.csv", sweep_csv(&rows).as_bytes())?;
    let mut meta = base_metadata(config, "sweep")?;
    meta.warnings = warnings;
    meta.wall_clock_seconds = start.elapsed().as_secs_f64();
    Ok((rows, writer.finish(meta)?))
}
