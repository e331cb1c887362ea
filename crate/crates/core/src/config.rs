//! TOML scenario configuration.
//!
//! Quantities are bare SI numbers or unit strings (see [`crate::units`]).
//! Parsing resolves everything to SI: the medium (explicit or designed), the
//! grid, the source beams and the run distance. [`ScenarioConfig::to_toml`]
//! writes the resolved form back out; it parses to an equal config.
//!
//! ```toml
//! [optics]
//! wavelength = "795 nm"
//!
//! [design]                      # or [medium] with alpha, gamma_p, gamma, diffusion, delta
//! feature_scale = "100 um"      # π/k₀; or k0 = "..."
//! gamma_over_gammap = 2.0
//! diffusion = "11 cm^2/s"       # anchor (and/or gamma)
//!
//! [grid]
//! n = 512
//! window_waists = 64            # or window = "6.4 mm", or pitch = "12.5 um"
//!
//! [source.row]                  # or [[source.beams]], or [source.image]
//! count = 2
//! waist_over_feature = 1.0      # or waist = "100 um"
//! separation_waists = 3.0
//!
//! [run]
//! modes = ["free_space", "eit_resonant", "eit"]
//! z_rayleigh = 1.0              # or z = "3.95 cm"
//! slices = 10
//! ```

use std::cell::RefCell;
use std::collections::BTreeSet;
use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::Serialize;
use toml::Value;

use crate::error::{Error, Result};
use crate::medium::{design_medium, DesignTargets, MediumParams, OpticalParams};
use crate::sources::{beam_row, AmplitudeMapping, BeamSpec};
use crate::spectral::TransverseGrid;
use crate::units::{quantity_from_toml, Dimension};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ResolvedMedium {
    pub params: MediumParams,
    /// Present when the medium came from design targets.
    pub design: Option<DesignTargets>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ImageSource {
    pub path: PathBuf,
    pub pitch: f64,
    pub mapping: AmplitudeMapping,
    pub blur_px: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SourceSpec {
    Beams(Vec<BeamSpec>),
    Image(ImageSource),
}

impl SourceSpec {
    pub fn centers(&self) -> Vec<(f64, f64)> {
        match self {
            SourceSpec::Beams(b) => b.iter().map(|s| s.center).collect(),
            SourceSpec::Image(_) => Vec::new(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeSpec {
    FreeSpace,
    /// The configured medium.
    Eit,
    /// The configured medium moved to Raman resonance, Δ = 0.
    EitResonant,
    Uniform,
}

impl ModeSpec {
    pub fn name(&self) -> &'static str {
        match self {
            ModeSpec::FreeSpace => "free_space",
            ModeSpec::Eit => "eit",
            ModeSpec::EitResonant => "eit_resonant",
            ModeSpec::Uniform => "uniform",
        }
    }

    fn parse(key: &str, s: &str) -> Result<Self> {
        Ok(match s {
            "free_space" => ModeSpec::FreeSpace,
            "eit" => ModeSpec::Eit,
            "eit_resonant" => ModeSpec::EitResonant,
            "uniform" => ModeSpec::Uniform,
            other => {
                return Err(Error::config(
                    key,
                    format!(
                        "unknown mode {other:?} (expected free_space, eit, eit_resonant or uniform)"
                    ),
                ))
            }
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputKind {
    Heatmaps,
    Raw,
    Widths,
    CrossSection,
    Report,
}

impl OutputKind {
    pub const ALL: [OutputKind; 5] = [
        OutputKind::Heatmaps,
        OutputKind::Raw,
        OutputKind::Widths,
        OutputKind::CrossSection,
        OutputKind::Report,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            OutputKind::Heatmaps => "heatmaps",
            OutputKind::Raw => "raw",
            OutputKind::Widths => "widths",
            OutputKind::CrossSection => "cross_section",
            OutputKind::Report => "report",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunSpec {
    pub modes: Vec<ModeSpec>,
    pub z: f64,
    /// Waist that defines `z_R` for reporting and `z_rayleigh`.
    pub reference_waist: f64,
    pub slices: usize,
    pub outputs: Vec<OutputKind>,
    pub normalize_heatmaps: bool,
    pub uniform_chi: Complex64,
    pub band_limit_ratio: f64,
    pub band_limit_max_fraction: f64,
    /// Per-beam window half-width; defaults to half the beam separation.
    pub beam_window: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChiScanSpec {
    pub k_max_over_k0: f64,
    pub points: usize,
    pub deltas_over_gamma: Vec<f64>,
}

impl Default for ChiScanSpec {
    fn default() -> Self {
        ChiScanSpec {
            k_max_over_k0: 4.0,
            points: 401,
            deltas_over_gamma: vec![0.0, 1.0, -1.0, 2.0, -2.0],
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepSpec {
    pub parameter: String,
    pub values: Vec<Value>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScenarioConfig {
    pub optics: OpticalParams,
    pub medium: Option<ResolvedMedium>,
    /// Waist used for `κ·z_R` in design reports.
    pub design_waist: Option<f64>,
    pub grid: Option<TransverseGrid>,
    pub source: Option<SourceSpec>,
    pub run: Option<RunSpec>,
    pub chi_scan: ChiScanSpec,
    pub sweep: Option<SweepSpec>,
    /// Non-fatal findings (unknown keys outside strict mode).
    #[serde(skip)]
    pub warnings: Vec<String>,
    /// The document as written, used to derive sweep variants.
    #[serde(skip)]
    pub document: Value,
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl serde::Serialize for TransverseGrid {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut st = s.serialize_struct("TransverseGrid", 4)?;
        st.serialize_field("nx", &self.nx())?;
        st.serialize_field("ny", &self.ny())?;
        st.serialize_field("dx", &self.dx())?;
        st.serialize_field("dy", &self.dy())?;
        st.end()
    }
}

/// Table accessor that records which keys were read.
struct Section<'a> {
    path: String,
    table: &'a toml::Table,
    used: RefCell<BTreeSet<String>>,
}

impl<'a> Section<'a> {
    fn new(path: &str, table: &'a toml::Table) -> Self {
        Section {
            path: path.to_string(),
            table,
            used: RefCell::new(BTreeSet::new()),
        }
    }

    fn key(&self, k: &str) -> String {
        if self.path.is_empty() {
            k.to_string()
        } else {
            format!("{}.{k}", self.path)
        }
    }

    fn get(&self, k: &str) -> Option<&'a Value> {
        let v = self.table.get(k);
        if v.is_some() {
            self.used.borrow_mut().insert(k.to_string());
        }
        v
    }

    fn has(&self, k: &str) -> bool {
        self.table.contains_key(k)
    }

    fn quantity(&self, k: &str, dim: Dimension) -> Result<Option<f64>> {
        self.get(k)
            .map(|v| quantity_from_toml(&self.key(k), v, dim))
            .transpose()
    }

    fn number(&self, k: &str) -> Result<Option<f64>> {
        self.get(k)
            .map(|v| match v {
                Value::Float(f) => Ok(*f),
                Value::Integer(i) => Ok(*i as f64),
                other => Err(Error::config(
                    self.key(k),
                    format!("expected a number, found {}", other.type_str()),
                )),
            })
            .transpose()
    }

    fn count(&self, k: &str) -> Result<Option<usize>> {
        self.get(k)
            .map(|v| match v {
                Value::Integer(i) if *i >= 0 => Ok(*i as usize),
                other => Err(Error::config(
                    self.key(k),
                    format!("expected a nonnegative integer, found {other}"),
                )),
            })
            .transpose()
    }

    fn boolean(&self, k: &str) -> Result<Option<bool>> {
        self.get(k)
            .map(|v| {
                v.as_bool()
                    .ok_or_else(|| Error::config(self.key(k), "expected true or false"))
            })
            .transpose()
    }

    fn string(&self, k: &str) -> Result<Option<&'a str>> {
        self.get(k)
            .map(|v| {
                v.as_str()
                    .ok_or_else(|| Error::config(self.key(k), "expected a string"))
            })
            .transpose()
    }

    fn array(&self, k: &str) -> Result<Option<&'a Vec<Value>>> {
        self.get(k)
            .map(|v| {
                v.as_array()
                    .ok_or_else(|| Error::config(self.key(k), "expected an array"))
            })
            .transpose()
    }

    fn sub(&self, k: &str) -> Result<Option<Section<'a>>> {
        self.get(k)
            .map(|v| {
                v.as_table()
                    .map(|t| Section::new(&self.key(k), t))
                    .ok_or_else(|| Error::config(self.key(k), "expected a table"))
            })
            .transpose()
    }

    fn exclusive(&self, keys: &[&str]) -> Result<()> {
        let present: Vec<_> = keys.iter().filter(|k| self.has(k)).collect();
        if present.len() > 1 {
            return Err(Error::config(
                self.key(present[0]),
                format!("conflicts with `{}`; give only one", self.key(present[1])),
            ));
        }
        Ok(())
    }

    fn finish(self, strict: bool, warnings: &mut Vec<String>) -> Result<()> {
        let used = self.used.borrow().clone();
        for k in self.table.keys() {
            if !used.contains(k) {
                let key = self.key(k);
                if strict {
                    return Err(Error::config(key, "unknown key"));
                }
                warnings.push(format!("unknown key `{key}` ignored"));
            }
        }
        Ok(())
    }
}

/// Length given directly or as a multiple of the feature scale `π/k₀`.
fn length_or_feature(
    s: &Section,
    key: &str,
    feature_key: &str,
    feature: Option<f64>,
) -> Result<Option<f64>> {
    s.exclusive(&[key, feature_key])?;
    if let Some(v) = s.quantity(key, Dimension::Length)? {
        return Ok(Some(v));
    }
    match s.number(feature_key)? {
        None => Ok(None),
        Some(m) => {
            let f = feature.ok_or_else(|| {
                Error::config(
                    s.key(feature_key),
                    "needs a medium to define the feature scale π/k0",
                )
            })?;
            Ok(Some(m * f))
        }
    }
}

fn positive(key: String, v: f64) -> Result<f64> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(Error::config(key, format!("must be > 0, got {v}")))
    }
}

impl ScenarioConfig {
    pub fn from_file(path: &Path, strict: bool) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| {
            Error::config("--config", format!("cannot read {}: {e}", path.display()))
        })?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        ScenarioConfig::from_str(&text, &base, strict)
    }

    pub fn from_str(text: &str, base_dir: &Path, strict: bool) -> Result<Self> {
        let document: Value = text
            .parse::<toml::Table>()
            .map(Value::Table)
            .map_err(|e| Error::config("<document>", e.message().to_string()))?;
        ScenarioConfig::from_value(document, base_dir, strict)
    }

    pub fn from_value(document: Value, base_dir: &Path, strict: bool) -> Result<Self> {
        let table = document
            .as_table()
            .ok_or_else(|| Error::config("<document>", "expected a table"))?;
        let root = Section::new("", table);
        let mut warnings = Vec::new();

        let optics_s = root
            .sub("optics")?
            .ok_or_else(|| Error::config("optics", "section is required"))?;
        let wavelength = optics_s
            .quantity("wavelength", Dimension::Length)?
            .ok_or_else(|| Error::config("optics.wavelength", "is required"))?;
        let optics = OpticalParams::new(wavelength).map_err(|_| {
            Error::config(
                "optics.wavelength",
                format!("must be > 0, got {wavelength}"),
            )
        })?;
        optics_s.finish(strict, &mut warnings)?;

        if root.has("medium") && root.has("design") {
            return Err(Error::config(
                "medium",
                "both [medium] and [design] are present; give exactly one",
            ));
        }
        let (medium, design_waist) = if let Some(s) = root.sub("medium")? {
            let m = parse_medium(&s)?;
            s.finish(strict, &mut warnings)?;
            (
                Some(ResolvedMedium {
                    params: m,
                    design: None,
                }),
                None,
            )
        } else if let Some(s) = root.sub("design")? {
            let (targets, waist) = parse_design(&s, &optics)?;
            s.finish(strict, &mut warnings)?;
            let params = design_medium(&targets)?;
            (
                Some(ResolvedMedium {
                    params,
                    design: Some(targets),
                }),
                waist,
            )
        } else {
            (None, None)
        };
        let feature = medium.map(|m| PI / m.params.dicke_width_k0());

        let source = match root.sub("source")? {
            Some(s) => {
                let src = parse_source(&s, feature, base_dir, strict, &mut warnings)?;
                s.finish(strict, &mut warnings)?;
                Some(src)
            }
            None => None,
        };
        let first_waist = match &source {
            Some(SourceSpec::Beams(b)) => b.first().map(|s| s.waist),
            _ => None,
        };

        let run_section = root.sub("run")?;
        let reference_waist = match &run_section {
            Some(s) => length_or_feature(
                s,
                "reference_waist",
                "reference_waist_over_feature",
                feature,
            )?,
            None => None,
        }
        .or(first_waist)
        .or(feature);

        let grid = match root.sub("grid")? {
            Some(s) => {
                let g = parse_grid(&s, reference_waist)?;
                s.finish(strict, &mut warnings)?;
                Some(g)
            }
            None => None,
        };

        let run = match run_section {
            Some(s) => {
                let r = parse_run(&s, &optics, reference_waist, medium.is_some())?;
                s.finish(strict, &mut warnings)?;
                Some(r)
            }
            None => None,
        };

        let chi_scan = match root.sub("chi_scan")? {
            Some(s) => {
                let c = parse_chi_scan(&s)?;
                s.finish(strict, &mut warnings)?;
                c
            }
            None => ChiScanSpec::default(),
        };

        let sweep = match root.sub("sweep")? {
            Some(s) => {
                let parameter = s
                    .string("parameter")?
                    .ok_or_else(|| Error::config("sweep.parameter", "is required"))?
                    .to_string();
                let values = s
                    .array("values")?
                    .ok_or_else(|| Error::config("sweep.values", "is required"))?
                    .clone();
                if values.is_empty() {
                    return Err(Error::config("sweep.values", "must not be empty"));
                }
                s.finish(strict, &mut warnings)?;
                Some(SweepSpec { parameter, values })
            }
            None => None,
        };

        if run.is_some() && (grid.is_none() || source.is_none()) {
            return Err(Error::config(
                if grid.is_none() { "grid" } else { "source" },
                "section is required for propagation runs",
            ));
        }

        root.finish(strict, &mut warnings)?;
        Ok(ScenarioConfig {
            optics,
            medium,
            design_waist,
            grid,
            source,
            run,
            chi_scan,
            sweep,
            warnings,
            document,
            base_dir: base_dir.to_path_buf(),
        })
    }

    pub fn medium(&self) -> Result<&MediumParams> {
        self.medium
            .as_ref()
            .map(|m| &m.params)
            .ok_or_else(|| Error::config("medium", "a [medium] or [design] section is required"))
    }

    pub fn grid(&self) -> Result<&TransverseGrid> {
        self.grid
            .as_ref()
            .ok_or_else(|| Error::config("grid", "section is required"))
    }

    pub fn run(&self) -> Result<&RunSpec> {
        self.run
            .as_ref()
            .ok_or_else(|| Error::config("run", "section is required"))
    }

    /// Copy of the document with `path` (dotted) replaced by `value` and the
    /// sweep section removed.
    pub fn sweep_variant(&self, path: &str, value: &Value) -> Result<Value> {
        let mut doc = self.document.clone();
        if let Some(t) = doc.as_table_mut() {
            t.remove("sweep");
        }
        let parts: Vec<&str> = path.split('.').collect();
        let (last, parents) = parts
            .split_last()
            .ok_or_else(|| Error::config("sweep.parameter", "empty path"))?;
        let mut cursor = &mut doc;
        for p in parents {
            let next = match cursor {
                Value::Array(items) => p.parse::<usize>().ok().and_then(|i| items.get_mut(i)),
                other => other.as_table_mut().and_then(|t| t.get_mut(*p)),
            };
            cursor = next.ok_or_else(|| {
                Error::config("sweep.parameter", format!("path {path:?} does not exist"))
            })?;
        }
        let table = cursor.as_table_mut().ok_or_else(|| {
            Error::config(
                "sweep.parameter",
                format!("path {path:?} does not name a table entry"),
            )
        })?;
        table.insert(last.to_string(), value.clone());
        Ok(doc)
    }

    /// Fully resolved SI document.
    pub fn to_toml(&self) -> String {
        let mut root = toml::Table::new();
        let mut optics = toml::Table::new();
        optics.insert("wavelength".into(), Value::Float(self.optics.wavelength()));
        root.insert("optics".into(), Value::Table(optics));

        if let Some(m) = &self.medium {
            match &m.design {
                Some(d) => {
                    let mut t = toml::Table::new();
                    t.insert("k0".into(), Value::Float(d.k0));
                    t.insert(
                        "gamma_over_gammap".into(),
                        Value::Float(d.gamma_over_gammap),
                    );
                    if let Some(v) = d.diffusion {
                        t.insert("diffusion".into(), Value::Float(v));
                    }
                    if let Some(v) = d.gamma {
                        t.insert("gamma".into(), Value::Float(v));
                    }
                    if let Some(w) = self.design_waist {
                        t.insert("waist".into(), Value::Float(w));
                    }
                    root.insert("design".into(), Value::Table(t));
                }
                None => {
                    let p = &m.params;
                    let mut t = toml::Table::new();
                    t.insert("alpha".into(), Value::Float(p.alpha()));
                    t.insert("gamma_p".into(), Value::Float(p.gamma_p()));
                    t.insert("gamma".into(), Value::Float(p.gamma()));
                    t.insert("diffusion".into(), Value::Float(p.diffusion()));
                    t.insert("delta".into(), Value::Float(p.delta()));
                    root.insert("medium".into(), Value::Table(t));
                }
            }
        }

        if let Some(g) = &self.grid {
            let mut t = toml::Table::new();
            t.insert("nx".into(), Value::Integer(g.nx() as i64));
            t.insert("ny".into(), Value::Integer(g.ny() as i64));
            t.insert("dx".into(), Value::Float(g.dx()));
            t.insert("dy".into(), Value::Float(g.dy()));
            root.insert("grid".into(), Value::Table(t));
        }

        if let Some(src) = &self.source {
            let mut t = toml::Table::new();
            match src {
                SourceSpec::Beams(beams) => {
                    let list = beams
                        .iter()
                        .map(|b| {
                            let mut e = toml::Table::new();
                            e.insert("waist".into(), Value::Float(b.waist));
                            e.insert(
                                "center".into(),
                                Value::Array(vec![
                                    Value::Float(b.center.0),
                                    Value::Float(b.center.1),
                                ]),
                            );
                            e.insert(
                                "amplitude".into(),
                                Value::Array(vec![
                                    Value::Float(b.amplitude.re),
                                    Value::Float(b.amplitude.im),
                                ]),
                            );
                            Value::Table(e)
                        })
                        .collect();
                    t.insert("beams".into(), Value::Array(list));
                }
                SourceSpec::Image(img) => {
                    let mut e = toml::Table::new();
                    e.insert("path".into(), Value::String(img.path.display().to_string()));
                    e.insert("pitch".into(), Value::Float(img.pitch));
                    let mapping = match img.mapping {
                        AmplitudeMapping::Linear => "linear",
                        AmplitudeMapping::SquareRoot => "square_root",
                    };
                    e.insert("mapping".into(), Value::String(mapping.into()));
                    e.insert("blur_px".into(), Value::Float(img.blur_px));
                    t.insert("image".into(), Value::Table(e));
                }
            }
            root.insert("source".into(), Value::Table(t));
        }

        if let Some(r) = &self.run {
            let mut t = toml::Table::new();
            t.insert(
                "modes".into(),
                Value::Array(
                    r.modes
                        .iter()
                        .map(|m| Value::String(m.name().into()))
                        .collect(),
                ),
            );
            t.insert("z".into(), Value::Float(r.z));
            t.insert("reference_waist".into(), Value::Float(r.reference_waist));
            t.insert("slices".into(), Value::Integer(r.slices as i64));
            t.insert(
                "outputs".into(),
                Value::Array(
                    r.outputs
                        .iter()
                        .map(|o| Value::String(o.name().into()))
                        .collect(),
                ),
            );
            t.insert(
                "normalize_heatmaps".into(),
                Value::Boolean(r.normalize_heatmaps),
            );
            t.insert(
                "uniform_chi".into(),
                Value::Array(vec![
                    Value::Float(r.uniform_chi.re),
                    Value::Float(r.uniform_chi.im),
                ]),
            );
            t.insert("band_limit_ratio".into(), Value::Float(r.band_limit_ratio));
            t.insert(
                "band_limit_max_fraction".into(),
                Value::Float(r.band_limit_max_fraction),
            );
            if let Some(w) = r.beam_window {
                t.insert("beam_window".into(), Value::Float(w));
            }
            root.insert("run".into(), Value::Table(t));
        }

        let mut c = toml::Table::new();
        c.insert(
            "k_max_over_k0".into(),
            Value::Float(self.chi_scan.k_max_over_k0),
        );
        c.insert("points".into(), Value::Integer(self.chi_scan.points as i64));
        c.insert(
            "deltas_over_gamma".into(),
            Value::Array(
                self.chi_scan
                    .deltas_over_gamma
                    .iter()
                    .map(|d| Value::Float(*d))
                    .collect(),
            ),
        );
        root.insert("chi_scan".into(), Value::Table(c));

        if let Some(s) = &self.sweep {
            let mut t = toml::Table::new();
            t.insert("parameter".into(), Value::String(s.parameter.clone()));
            t.insert("values".into(), Value::Array(s.values.clone()));
            root.insert("sweep".into(), Value::Table(t));
        }

        toml::to_string(&Value::Table(root)).expect("resolved config serializes")
    }
}

fn parse_medium(s: &Section) -> Result<MediumParams> {
    let req = |k: &str, dim| {
        s.quantity(k, dim)?
            .ok_or_else(|| Error::config(s.key(k), "is required"))
    };
    let alpha = req("alpha", Dimension::Wavenumber)?;
    let gamma_p = req("gamma_p", Dimension::Rate)?;
    let gamma = req("gamma", Dimension::Rate)?;
    let diffusion = req("diffusion", Dimension::Diffusivity)?;
    s.exclusive(&["delta", "delta_over_gamma"])?;
    let delta = match (
        s.quantity("delta", Dimension::Rate)?,
        s.number("delta_over_gamma")?,
    ) {
        (Some(d), _) => d,
        (None, Some(r)) => r * gamma,
        (None, None) => 0.0,
    };
    MediumParams::new(alpha, gamma_p, gamma, diffusion, delta).map_err(|e| match e {
        Error::Config { key, message } => Error::config(s.key(&key), message),
        other => other,
    })
}

fn parse_design(s: &Section, optics: &OpticalParams) -> Result<(DesignTargets, Option<f64>)> {
    s.exclusive(&["k0", "feature_scale"])?;
    let k0 = match (
        s.quantity("k0", Dimension::Wavenumber)?,
        s.quantity("feature_scale", Dimension::Length)?,
    ) {
        (Some(k), _) => positive(s.key("k0"), k)?,
        (None, Some(f)) => PI / positive(s.key("feature_scale"), f)?,
        (None, None) => {
            return Err(Error::config(
                s.key("k0"),
                "one of `k0` or `feature_scale` is required",
            ))
        }
    };
    let ratio = s.number("gamma_over_gammap")?.unwrap_or(2.0);
    let diffusion = s.quantity("diffusion", Dimension::Diffusivity)?;
    let gamma = s.quantity("gamma", Dimension::Rate)?;
    let waist = length_or_feature(s, "waist", "waist_over_feature", Some(PI / k0))?;
    Ok((
        DesignTargets {
            wavelength: optics.wavelength(),
            k0,
            gamma_over_gammap: ratio,
            diffusion,
            gamma,
        },
        waist,
    ))
}

fn parse_grid(s: &Section, reference_waist: Option<f64>) -> Result<TransverseGrid> {
    s.exclusive(&["n", "nx"])?;
    s.exclusive(&["n", "ny"])?;
    let n = s.count("n")?;
    let nx = s.count("nx")?.or(n).unwrap_or(512);
    let ny = s.count("ny")?.or(n).unwrap_or(nx);
    s.exclusive(&["pitch", "dx", "window", "window_waists"])?;
    let pad = s.count("pad_factor")?.unwrap_or(1);
    if pad == 0 || !pad.is_power_of_two() {
        return Err(Error::config(
            s.key("pad_factor"),
            "must be a power of two >= 1",
        ));
    }
    let (dx, dy) = if let Some(p) = s.quantity("pitch", Dimension::Length)? {
        (p, p)
    } else if let Some(dx) = s.quantity("dx", Dimension::Length)? {
        let dy = s.quantity("dy", Dimension::Length)?.unwrap_or(dx);
        (dx, dy)
    } else if let Some(w) = s.quantity("window", Dimension::Length)? {
        (w / nx as f64, w / ny as f64)
    } else if let Some(m) = s.number("window_waists")? {
        let w0 = reference_waist.ok_or_else(|| {
            Error::config(
                s.key("window_waists"),
                "no reference waist to scale the window by",
            )
        })?;
        (m * w0 / nx as f64, m * w0 / ny as f64)
    } else {
        return Err(Error::config(
            s.key("pitch"),
            "one of `pitch`, `dx`, `window` or `window_waists` is required",
        ));
    };
    TransverseGrid::new(nx * pad, ny * pad, dx, dy).map_err(|e| match e {
        Error::Config { key, message } => Error::config(key, message),
        other => other,
    })
}

fn parse_source(
    s: &Section,
    feature: Option<f64>,
    base_dir: &Path,
    strict: bool,
    warnings: &mut Vec<String>,
) -> Result<SourceSpec> {
    let kinds: Vec<_> = ["beams", "row", "image"]
        .into_iter()
        .filter(|k| s.has(k))
        .collect();
    match kinds.len() {
        0 => {
            return Err(Error::config(
                s.key("beams"),
                "one of beams, row or image is required",
            ))
        }
        1 => {}
        _ => {
            return Err(Error::config(
                s.key(kinds[0]),
                format!(
                    "conflicts with `{}`: exactly one source kind is allowed",
                    s.key(kinds[1])
                ),
            ))
        }
    }
    if let Some(list) = s.array("beams")? {
        let mut beams = Vec::with_capacity(list.len());
        for (i, v) in list.iter().enumerate() {
            let path = format!("{}[{i}]", s.key("beams"));
            let t = v
                .as_table()
                .ok_or_else(|| Error::config(&path, "expected a table"))?;
            let b = Section::new(&path, t);
            let waist = length_or_feature(&b, "waist", "waist_over_feature", feature)?
                .ok_or_else(|| Error::config(b.key("waist"), "is required"))?;
            let center = match b.array("center")? {
                None => (0.0, 0.0),
                Some(c) if c.len() == 2 => (
                    quantity_from_toml(&b.key("center"), &c[0], Dimension::Length)?,
                    quantity_from_toml(&b.key("center"), &c[1], Dimension::Length)?,
                ),
                Some(_) => return Err(Error::config(b.key("center"), "expected [x, y]")),
            };
            let amplitude = match b.array("amplitude")? {
                None => Complex64::new(1.0, 0.0),
                Some(a) if a.len() == 2 => {
                    let num = |v: &Value| {
                        v.as_float()
                            .or_else(|| v.as_integer().map(|i| i as f64))
                            .ok_or_else(|| Error::config(b.key("amplitude"), "expected numbers"))
                    };
                    Complex64::new(num(&a[0])?, num(&a[1])?)
                }
                Some(_) => return Err(Error::config(b.key("amplitude"), "expected [re, im]")),
            };
            b.finish(strict, warnings)?;
            beams.push(BeamSpec {
                waist: positive(format!("{path}.waist"), waist)?,
                center,
                amplitude,
            });
        }
        if beams.is_empty() {
            return Err(Error::config(s.key("beams"), "beam list is empty"));
        }
        return Ok(SourceSpec::Beams(beams));
    }
    if let Some(r) = s.sub("row")? {
        let count = r.count("count")?.unwrap_or(1);
        if count == 0 {
            return Err(Error::config(r.key("count"), "must be >= 1"));
        }
        let waist = length_or_feature(&r, "waist", "waist_over_feature", feature)?
            .ok_or_else(|| Error::config(r.key("waist"), "is required"))?;
        let waist = positive(r.key("waist"), waist)?;
        r.exclusive(&["separation", "separation_waists"])?;
        let separation = match (
            r.quantity("separation", Dimension::Length)?,
            r.number("separation_waists")?,
        ) {
            (Some(d), _) => d,
            (None, Some(m)) => m * waist,
            (None, None) if count == 1 => 0.0,
            (None, None) => {
                return Err(Error::config(
                    r.key("separation_waists"),
                    "is required for count > 1",
                ))
            }
        };
        r.finish(strict, warnings)?;
        return Ok(SourceSpec::Beams(beam_row(count, waist, separation)));
    }
    let img = s.sub("image")?.expect("checked above");
    let path = img
        .string("path")?
        .ok_or_else(|| Error::config(img.key("path"), "is required"))?;
    let path = if Path::new(path).is_absolute() {
        PathBuf::from(path)
    } else {
        base_dir.join(path)
    };
    let pitch = img
        .quantity("pitch", Dimension::Length)?
        .ok_or_else(|| Error::config(img.key("pitch"), "is required"))?;
    let mapping = match img.string("mapping")? {
        None | Some("square_root") => AmplitudeMapping::SquareRoot,
        Some("linear") => AmplitudeMapping::Linear,
        Some(other) => {
            return Err(Error::config(
                img.key("mapping"),
                format!("unknown mapping {other:?} (linear or square_root)"),
            ))
        }
    };
    let blur_px = img.number("blur_px")?.unwrap_or(2.0);
    if !(blur_px >= 0.0) {
        return Err(Error::config(img.key("blur_px"), "must be >= 0"));
    }
    img.finish(strict, warnings)?;
    Ok(SourceSpec::Image(ImageSource {
        path,
        pitch: positive(format!("{}.pitch", s.key("image")), pitch)?,
        mapping,
        blur_px,
    }))
}

fn parse_run(
    s: &Section,
    optics: &OpticalParams,
    reference_waist: Option<f64>,
    has_medium: bool,
) -> Result<RunSpec> {
    s.exclusive(&["mode", "modes"])?;
    let modes = if let Some(m) = s.string("mode")? {
        vec![ModeSpec::parse(&s.key("mode"), m)?]
    } else if let Some(list) = s.array("modes")? {
        list.iter()
            .map(|v| {
                v.as_str()
                    .ok_or_else(|| Error::config(s.key("modes"), "expected strings"))
                    .and_then(|m| ModeSpec::parse(&s.key("modes"), m))
            })
            .collect::<Result<Vec<_>>>()?
    } else {
        vec![ModeSpec::Eit]
    };
    if modes.is_empty() {
        return Err(Error::config(s.key("modes"), "must not be empty"));
    }
    if !has_medium
        && modes
            .iter()
            .any(|m| matches!(m, ModeSpec::Eit | ModeSpec::EitResonant))
    {
        return Err(Error::config(
            s.key("modes"),
            "EIT modes need a [medium] or [design] section",
        ));
    }
    let reference_waist = reference_waist.ok_or_else(|| {
        Error::config(
            s.key("reference_waist"),
            "cannot infer a reference waist; set it explicitly",
        )
    })?;
    s.exclusive(&["z", "z_rayleigh"])?;
    let z = match (s.quantity("z", Dimension::Length)?, s.number("z_rayleigh")?) {
        (Some(z), _) => z,
        (None, Some(m)) => m * optics.rayleigh_length(reference_waist),
        (None, None) => {
            return Err(Error::config(
                s.key("z"),
                "one of `z` or `z_rayleigh` is required",
            ))
        }
    };
    if !(z.is_finite() && z >= 0.0) {
        return Err(Error::config(s.key("z"), format!("must be >= 0, got {z}")));
    }
    let outputs = match s.array("outputs")? {
        None => OutputKind::ALL.to_vec(),
        Some(list) => {
            let mut out = BTreeSet::new();
            for v in list {
                let name = v
                    .as_str()
                    .ok_or_else(|| Error::config(s.key("outputs"), "expected strings"))?;
                let kind = OutputKind::ALL
                    .into_iter()
                    .find(|k| k.name() == name)
                    .ok_or_else(|| {
                        Error::config(s.key("outputs"), format!("unknown output {name:?}"))
                    })?;
                out.insert(kind);
            }
            out.into_iter().collect()
        }
    };
    let uniform_chi = match s.array("uniform_chi")? {
        None => Complex64::new(0.0, 0.0),
        Some(a) if a.len() == 2 => Complex64::new(
            quantity_from_toml(&s.key("uniform_chi"), &a[0], Dimension::Wavenumber)?,
            quantity_from_toml(&s.key("uniform_chi"), &a[1], Dimension::Wavenumber)?,
        ),
        Some(_) => return Err(Error::config(s.key("uniform_chi"), "expected [re, im]")),
    };
    let band_limit_ratio = s.number("band_limit_ratio")?.unwrap_or(0.3);
    let band_limit_max_fraction = s.number("band_limit_max_fraction")?.unwrap_or(0.75);
    let beam_window = s
        .quantity("beam_window", Dimension::Length)?
        .map(|w| positive(s.key("beam_window"), w))
        .transpose()?;
    Ok(RunSpec {
        modes,
        z,
        reference_waist,
        slices: s.count("slices")?.unwrap_or(1),
        outputs,
        normalize_heatmaps: s.boolean("normalize_heatmaps")?.unwrap_or(true),
        uniform_chi,
        band_limit_ratio: positive(s.key("band_limit_ratio"), band_limit_ratio)?,
        band_limit_max_fraction,
        beam_window,
    })
}

fn parse_chi_scan(s: &Section) -> Result<ChiScanSpec> {
    let d = ChiScanSpec::default();
    let k_max = s.number("k_max_over_k0")?.unwrap_or(d.k_max_over_k0);
    let points = s.count("points")?.unwrap_or(d.points);
    if points < 2 {
        return Err(Error::config(s.key("points"), "must be >= 2"));
    }
    let deltas = match s.array("deltas_over_gamma")? {
        None => d.deltas_over_gamma,
        Some(list) => list
            .iter()
            .map(|v| {
                v.as_float()
                    .or_else(|| v.as_integer().map(|i| i as f64))
                    .ok_or_else(|| Error::config(s.key("deltas_over_gamma"), "expected numbers"))
            })
            .collect::<Result<_>>()?,
    };
    Ok(ChiScanSpec {
        k_max_over_k0: positive(s.key("k_max_over_k0"), k_max)?,
        points,
        deltas_over_gamma: deltas,
    })
}
