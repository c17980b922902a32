//! Run configuration: a sectioned `key = value` text file.
//!
//! ```text
//! # comment
//! [physical]
//! hbar = 1
//! mass = 1
//!
//! [grid]
//! dx = 0.02
//! t_final = 4
//! ```
//!
//! Unknown sections and keys are errors. Every value is validated through
//! the corresponding core constructor; errors name the file, line and key.

use std::path::{Path, PathBuf};

use ballistic::grid::{DEFAULT_NX_CAP, MIN_SAFETY_SPAN};
use ballistic::stepper::{DEFAULT_LEAK_THRESHOLD, STABILITY_LIMIT};
use ballistic::{
    AutoGrid, Error as CoreError, GaussianState, PhysicalParams, Resolution, SlitConfig, Stepper,
    StepperSettings,
};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq)]
struct Entry {
    key: String,
    value: String,
    line: usize,
}

#[derive(Debug, Clone, PartialEq)]
struct Section {
    name: String,
    line: usize,
    entries: Vec<Entry>,
}

/// Parsed but not yet interpreted key-value document.
#[derive(Debug, Clone, PartialEq)]
pub struct Ini {
    origin: String,
    sections: Vec<Section>,
}

fn strip_comment(line: &str) -> &str {
    let trimmed = line.trim();
    if trimmed.starts_with('#') || trimmed.starts_with(';') {
        return "";
    }
    match trimmed.find(" #") {
        Some(i) => trimmed[..i].trim_end(),
        None => trimmed,
    }
}

impl Ini {
    pub fn parse(text: &str, origin: impl Into<String>) -> Result<Self> {
        let origin = origin.into();
        let mut sections: Vec<Section> = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = strip_comment(raw);
            if content.is_empty() {
                continue;
            }
            let err = |key: &str, message: String| CliError::Config {
                location: format!("{}:{}", origin, line),
                key: key.to_string(),
                message,
            };
            if let Some(rest) = content.strip_prefix('[') {
                let name = rest
                    .strip_suffix(']')
                    .ok_or_else(|| err(content, "unterminated section header".into()))?
                    .trim();
                if name.is_empty() {
                    return Err(err(content, "empty section name".into()));
                }
                if sections.iter().any(|s| s.name == name) {
                    return Err(err(&format!("[{}]", name), "duplicate section".into()));
                }
                sections.push(Section {
                    name: name.to_string(),
                    line,
                    entries: Vec::new(),
                });
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| err(content, "expected `key = value`".into()))?;
            let (key, value) = (key.trim(), value.trim());
            let section = sections
                .last_mut()
                .ok_or_else(|| err(key, "key outside of any [section]".into()))?;
            if key.is_empty() {
                return Err(err(content, "empty key".into()));
            }
            if section.entries.iter().any(|e| e.key == key) {
                return Err(err(
                    &format!("{}.{}", section.name, key),
                    "duplicate key".into(),
                ));
            }
            section.entries.push(Entry {
                key: key.to_string(),
                value: value.to_string(),
                line,
            });
        }
        Ok(Self { origin, sections })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::parse(&text, path.display().to_string())
    }

    pub fn origin(&self) -> &str {
        &self.origin
    }

    fn section(&self, name: &str) -> Option<&Section> {
        self.sections.iter().find(|s| s.name == name)
    }

    pub fn has_section(&self, name: &str) -> bool {
        self.section(name).is_some()
    }

    pub fn get(&self, section: &str, key: &str) -> Option<&str> {
        self.section(section)?
            .entries
            .iter()
            .find(|e| e.key == key)
            .map(|e| e.value.as_str())
    }

    /// Inserts or replaces `section.key`.
    pub fn set(&mut self, section: &str, key: &str, value: &str) {
        let idx = match self.sections.iter().position(|s| s.name == section) {
            Some(i) => i,
            None => {
                self.sections.push(Section {
                    name: section.to_string(),
                    line: 0,
                    entries: Vec::new(),
                });
                self.sections.len() - 1
            }
        };
        let entries = &mut self.sections[idx].entries;
        match entries.iter_mut().find(|e| e.key == key) {
            Some(e) => {
                e.value = value.to_string();
                e.line = 0;
            }
            None => entries.push(Entry {
                key: key.to_string(),
                value: value.to_string(),
                line: 0,
            }),
        }
    }

    pub fn remove(&mut self, section: &str, key: &str) {
        if let Some(s) = self.sections.iter_mut().find(|s| s.name == section) {
            s.entries.retain(|e| e.key != key);
        }
    }

    pub fn remove_section(&mut self, section: &str) {
        self.sections.retain(|s| s.name != section);
    }

    /// `(key, value)` pairs of a section in file order.
    pub fn entries(&self, section: &str) -> Vec<(String, String)> {
        self.section(section)
            .map(|s| {
                s.entries
                    .iter()
                    .map(|e| (e.key.clone(), e.value.clone()))
                    .collect()
            })
            .unwrap_or_default()
    }

    fn location(&self, section: &str, key: Option<&str>) -> String {
        let line = self.section(section).and_then(|s| match key {
            Some(k) => s.entries.iter().find(|e| e.key == k).map(|e| e.line),
            None => Some(s.line),
        });
        match line {
            Some(l) if l > 0 => format!("{}:{}", self.origin, l),
            Some(_) => format!("{} (override)", self.origin),
            None => self.origin.clone(),
        }
    }

    fn error(&self, section: &str, key: &str, message: impl Into<String>) -> CliError {
        CliError::Config {
            location: self.location(section, Some(key)),
            key: format!("{}.{}", section, key),
            message: message.into(),
        }
    }
}

const SECTIONS: &[(&str, &[&str])] = &[
    ("physical", &["hbar", "mass"]),
    ("packet", &["sigma0", "center"]),
    (
        "grid",
        &[
            "dx",
            "points_per_sigma0",
            "dt",
            "t_final",
            "safety_span",
            "nx_cap",
            "stability_limit",
            "leak_threshold",
        ],
    ),
    (
        "slits",
        &["separation", "sigma0", "v1", "v2", "dvx", "v_mean"],
    ),
    ("trajectories", &["quantiles", "v_y", "source"]),
    (
        "output",
        &[
            "directory",
            "snapshot_times",
            "snapshot_interval",
            "normalize_total",
        ],
    ),
    (
        "checks",
        &[
            "sigma_rel_tol",
            "mass_drift_tol",
            "homothety_rel_tol",
            "velocity_rel_tol",
            "velocity_min_tau",
            "fringe_max_cells",
            "composition_abs_tol",
            "order_min",
            "order_max",
        ],
    ),
];

/// Typed accessors for one section.
struct Reader<'a> {
    ini: &'a Ini,
    section: &'static str,
}

impl<'a> Reader<'a> {
    fn raw(&self, key: &str) -> Option<&'a str> {
        self.ini.get(self.section, key)
    }

    fn err(&self, key: &str, message: impl Into<String>) -> CliError {
        self.ini.error(self.section, key, message)
    }

    fn f64_opt(&self, key: &str) -> Result<Option<f64>> {
        self.raw(key)
            .map(|v| {
                v.parse::<f64>()
                    .map_err(|_| self.err(key, format!("`{}` is not a number", v)))
            })
            .transpose()
    }

    fn f64_or(&self, key: &str, default: f64) -> Result<f64> {
        Ok(self.f64_opt(key)?.unwrap_or(default))
    }

    fn usize_or(&self, key: &str, default: usize) -> Result<usize> {
        self.raw(key)
            .map(|v| {
                v.parse::<usize>()
                    .map_err(|_| self.err(key, format!("`{}` is not a non-negative integer", v)))
            })
            .transpose()
            .map(|v| v.unwrap_or(default))
    }

    fn bool_or(&self, key: &str, default: bool) -> Result<bool> {
        match self.raw(key) {
            None => Ok(default),
            Some("true") | Some("yes") | Some("1") => Ok(true),
            Some("false") | Some("no") | Some("0") => Ok(false),
            Some(v) => Err(self.err(key, format!("`{}` is not a boolean", v))),
        }
    }

    fn list_opt(&self, key: &str) -> Result<Option<Vec<f64>>> {
        self.raw(key)
            .map(|v| {
                v.split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(|s| {
                        s.parse::<f64>()
                            .map_err(|_| self.err(key, format!("`{}` is not a number", s)))
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .transpose()
    }

    /// Maps a core validation error on `field` to this section's `key`.
    fn core<T>(&self, key: &str, r: ballistic::Result<T>) -> Result<T> {
        r.map_err(|e| match e {
            CoreError::Validation { reason, .. } => self.err(key, reason),
            other => self.err(key, other.to_string()),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSettings {
    pub resolution: Resolution<f64>,
    pub dt: f64,
    pub t_final: f64,
    pub safety_span: f64,
    pub nx_cap: usize,
    pub stability_limit: f64,
    pub leak_threshold: f64,
}

impl GridSettings {
    pub fn auto_grid(&self) -> AutoGrid<f64> {
        AutoGrid::new(self.resolution, self.safety_span).with_nx_cap(self.nx_cap)
    }

    pub fn stepper(&self) -> Stepper<f64> {
        Stepper::new(StepperSettings {
            stability_limit: self.stability_limit,
            leak_threshold: self.leak_threshold,
        })
        .expect("validated at load time")
    }
}

/// Which density the flux lines are traced through.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DensitySource {
    SingleBeam,
    DoubleSlit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrajectorySettings {
    pub quantiles: Vec<f64>,
    /// Nominal forward speed mapping time to the display coordinate `y = v_y·t`.
    pub v_y: f64,
    pub source: DensitySource,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SnapshotSpec {
    Times(Vec<f64>),
    Interval(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputSettings {
    pub directory: PathBuf,
    pub snapshots: SnapshotSpec,
    /// Rescale `p_total` to unit mass in exported intensity files.
    pub normalize_total: bool,
}

/// Tolerances that decide the exit status of a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Checks {
    pub sigma_rel_tol: f64,
    pub mass_drift_tol: f64,
    pub homothety_rel_tol: f64,
    pub velocity_rel_tol: f64,
    /// Velocity asymptote is checked where `D·t/σ₀² ≥ velocity_min_tau`.
    pub velocity_min_tau: f64,
    pub fringe_max_cells: f64,
    pub composition_abs_tol: f64,
    pub order_min: f64,
    pub order_max: f64,
}

impl Default for Checks {
    fn default() -> Self {
        Self {
            sigma_rel_tol: 0.005,
            mass_drift_tol: 1e-9,
            homothety_rel_tol: 0.01,
            velocity_rel_tol: 0.02,
            velocity_min_tau: 10.0,
            fringe_max_cells: 1.0,
            composition_abs_tol: 1e-12,
            order_min: 1.7,
            order_max: 2.3,
        }
    }
}

/// What a sweep varies and which run it repeats.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub run: String,
    /// `(section.key, values)` in file order; the first key varies slowest.
    pub axes: Vec<(String, Vec<String>)>,
}

pub const SWEEPABLE_RUNS: &[&str] = &["spread", "doubleslit", "trajectories"];

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub physical: PhysicalParams<f64>,
    pub packet: GaussianState<f64>,
    pub grid: GridSettings,
    pub slits: Option<SlitConfig<f64>>,
    pub trajectories: TrajectorySettings,
    pub output: OutputSettings,
    pub checks: Checks,
    pub sweep: Option<SweepSpec>,
    ini: Ini,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        Self::from_ini(Ini::load(path)?)
    }

    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        Self::from_ini(Ini::parse(text, origin)?)
    }

    pub fn ini(&self) -> &Ini {
        &self.ini
    }

    pub fn origin(&self) -> &str {
        self.ini.origin()
    }

    pub fn from_ini(ini: Ini) -> Result<Self> {
        for section in &ini.sections {
            if section.name == "sweep" {
                continue;
            }
            let Some((_, keys)) = SECTIONS.iter().find(|(n, _)| *n == section.name) else {
                return Err(CliError::Config {
                    location: ini.location(&section.name, None),
                    key: format!("[{}]", section.name),
                    message: "unknown section".into(),
                });
            };
            if let Some(e) = section
                .entries
                .iter()
                .find(|e| !keys.contains(&e.key.as_str()))
            {
                return Err(ini.error(&section.name, &e.key, "unknown key"));
            }
        }

        let r = Reader {
            ini: &ini,
            section: "physical",
        };
        let hbar = r.f64_or("hbar", 1.0)?;
        let mass = r.f64_or("mass", 1.0)?;
        let physical = PhysicalParams::new(hbar, mass).map_err(|e| match e {
            CoreError::Validation { field, reason } => r.err(field, reason),
            other => r.err("hbar", other.to_string()),
        })?;

        let r = Reader {
            ini: &ini,
            section: "packet",
        };
        let sigma0 = r.f64_or("sigma0", 1.0)?;
        let center = r.f64_or("center", 0.0)?;
        let packet = r.core(
            if r.raw("sigma0").is_some() || !sigma0.is_finite() {
                "sigma0"
            } else {
                "center"
            },
            GaussianState::new(sigma0, center),
        )?;

        let grid = Self::read_grid(&ini, &packet)?;
        let slits = Self::read_slits(&ini, &packet)?;
        let trajectories = Self::read_trajectories(&ini)?;
        let output = Self::read_output(&ini, grid.t_final)?;
        let checks = Self::read_checks(&ini)?;
        let sweep = Self::read_sweep(&ini)?;

        Ok(Self {
            physical,
            packet,
            grid,
            slits,
            trajectories,
            output,
            checks,
            sweep,
            ini,
        })
    }

    fn read_grid(ini: &Ini, packet: &GaussianState<f64>) -> Result<GridSettings> {
        let r = Reader {
            ini,
            section: "grid",
        };
        let resolution = match (r.f64_opt("dx")?, r.f64_opt("points_per_sigma0")?) {
            (Some(_), Some(_)) => {
                return Err(r.err("dx", "give either dx or points_per_sigma0, not both"))
            }
            (Some(dx), None) => Resolution::Spacing(dx),
            (None, Some(n)) => Resolution::PointsPerSigma0(n),
            (None, None) => Resolution::PointsPerSigma0(10.0),
        };
        let key = match resolution {
            Resolution::Spacing(_) => "dx",
            Resolution::PointsPerSigma0(_) => "points_per_sigma0",
        };
        r.core(
            key,
            AutoGrid::new(resolution, MIN_SAFETY_SPAN).dx(packet.sigma0()),
        )?;

        let dt = r.f64_or("dt", 0.01)?;
        if !(dt.is_finite() && dt > 0.0) {
            return Err(r.err("dt", format!("must be > 0, got {}", dt)));
        }
        let t_final = r.f64_or("t_final", 4.0)?;
        if !(t_final.is_finite() && t_final >= 0.0) {
            return Err(r.err("t_final", format!("must be >= 0, got {}", t_final)));
        }
        let safety_span = r.f64_or("safety_span", 10.0)?;
        if !(safety_span >= MIN_SAFETY_SPAN) {
            return Err(r.err(
                "safety_span",
                format!("must be >= {}, got {}", MIN_SAFETY_SPAN, safety_span),
            ));
        }
        let nx_cap = r.usize_or("nx_cap", DEFAULT_NX_CAP)?;
        if nx_cap < 3 {
            return Err(r.err("nx_cap", "must be at least 3"));
        }
        let stability_limit = r.f64_or("stability_limit", STABILITY_LIMIT)?;
        let leak_threshold = r.f64_or("leak_threshold", DEFAULT_LEAK_THRESHOLD)?;
        let settings = StepperSettings {
            stability_limit,
            leak_threshold,
        };
        Stepper::new(settings).map_err(|e| match e {
            CoreError::Validation { field, reason } => r.err(field, reason),
            other => r.err("stability_limit", other.to_string()),
        })?;
        Ok(GridSettings {
            resolution,
            dt,
            t_final,
            safety_span,
            nx_cap,
            stability_limit,
            leak_threshold,
        })
    }

    fn read_slits(ini: &Ini, packet: &GaussianState<f64>) -> Result<Option<SlitConfig<f64>>> {
        if !ini.has_section("slits") {
            return Ok(None);
        }
        let r = Reader {
            ini,
            section: "slits",
        };
        let separation = r
            .f64_opt("separation")?
            .ok_or_else(|| r.err("separation", "required"))?;
        let sigma0 = r.f64_or("sigma0", packet.sigma0())?;
        let pair = (r.f64_opt("v1")?, r.f64_opt("v2")?);
        let dvx = r.f64_opt("dvx")?;
        let v_mean = r.f64_opt("v_mean")?;
        let built = match (pair, dvx) {
            ((Some(v1), Some(v2)), None) => {
                if v_mean.is_some() {
                    return Err(r.err("v_mean", "only valid together with dvx"));
                }
                SlitConfig::new(separation, sigma0, v1, v2)
            }
            ((None, None), Some(dvx)) => {
                SlitConfig::from_velocity_difference(separation, sigma0, dvx, v_mean.unwrap_or(0.0))
            }
            ((None, None), None) => return Err(r.err("dvx", "give dvx or both v1 and v2")),
            ((Some(_), Some(_)), Some(_)) => {
                return Err(r.err("dvx", "conflicts with v1/v2; give one form only"))
            }
            ((Some(_), None), _) => return Err(r.err("v2", "required together with v1")),
            ((None, Some(_)), _) => return Err(r.err("v1", "required together with v2")),
        };
        let slits = built.map_err(|e| match e {
            CoreError::Validation { field, reason } => r.err(field, reason),
            other => r.err("separation", other.to_string()),
        })?;
        Ok(Some(slits))
    }

    fn read_trajectories(ini: &Ini) -> Result<TrajectorySettings> {
        let r = Reader {
            ini,
            section: "trajectories",
        };
        let quantiles = r
            .list_opt("quantiles")?
            .unwrap_or_else(|| (1..=9).map(|k| k as f64 / 10.0).collect());
        if quantiles.is_empty() {
            return Err(r.err("quantiles", "empty list"));
        }
        for (i, &q) in quantiles.iter().enumerate() {
            if !(q > 0.0 && q < 1.0) {
                return Err(r.err("quantiles", format!("{} is outside (0, 1)", q)));
            }
            if i > 0 && q <= quantiles[i - 1] {
                return Err(r.err("quantiles", "must be strictly increasing"));
            }
        }
        let v_y = r.f64_or("v_y", 1.0)?;
        if !v_y.is_finite() {
            return Err(r.err("v_y", "must be finite"));
        }
        let source = match r.raw("source").unwrap_or("single") {
            "single" => DensitySource::SingleBeam,
            "doubleslit" => DensitySource::DoubleSlit,
            other => {
                return Err(r.err(
                    "source",
                    format!("`{}`: expected `single` or `doubleslit`", other),
                ))
            }
        };
        Ok(TrajectorySettings {
            quantiles,
            v_y,
            source,
        })
    }

    fn read_output(ini: &Ini, t_final: f64) -> Result<OutputSettings> {
        let r = Reader {
            ini,
            section: "output",
        };
        let directory = PathBuf::from(r.raw("directory").unwrap_or("out"));
        let snapshots = match (
            r.list_opt("snapshot_times")?,
            r.f64_opt("snapshot_interval")?,
        ) {
            (Some(_), Some(_)) => {
                return Err(r.err(
                    "snapshot_times",
                    "give either snapshot_times or snapshot_interval, not both",
                ))
            }
            (Some(times), None) => {
                if times.is_empty() {
                    return Err(r.err("snapshot_times", "empty list"));
                }
                for (i, &t) in times.iter().enumerate() {
                    if !(t >= 0.0 && t <= t_final) {
                        return Err(r.err(
                            "snapshot_times",
                            format!("{} outside [0, t_final = {}]", t, t_final),
                        ));
                    }
                    if i > 0 && t < times[i - 1] {
                        return Err(r.err("snapshot_times", "must be sorted"));
                    }
                }
                SnapshotSpec::Times(times)
            }
            (None, Some(h)) => {
                if !(h.is_finite() && h > 0.0) {
                    return Err(r.err("snapshot_interval", "must be > 0"));
                }
                SnapshotSpec::Interval(h)
            }
            (None, None) => SnapshotSpec::Interval(if t_final > 0.0 { t_final / 8.0 } else { 1.0 }),
        };
        let normalize_total = r.bool_or("normalize_total", false)?;
        Ok(OutputSettings {
            directory,
            snapshots,
            normalize_total,
        })
    }

    fn read_checks(ini: &Ini) -> Result<Checks> {
        let r = Reader {
            ini,
            section: "checks",
        };
        let d = Checks::default();
        let c = Checks {
            sigma_rel_tol: r.f64_or("sigma_rel_tol", d.sigma_rel_tol)?,
            mass_drift_tol: r.f64_or("mass_drift_tol", d.mass_drift_tol)?,
            homothety_rel_tol: r.f64_or("homothety_rel_tol", d.homothety_rel_tol)?,
            velocity_rel_tol: r.f64_or("velocity_rel_tol", d.velocity_rel_tol)?,
            velocity_min_tau: r.f64_or("velocity_min_tau", d.velocity_min_tau)?,
            fringe_max_cells: r.f64_or("fringe_max_cells", d.fringe_max_cells)?,
            composition_abs_tol: r.f64_or("composition_abs_tol", d.composition_abs_tol)?,
            order_min: r.f64_or("order_min", d.order_min)?,
            order_max: r.f64_or("order_max", d.order_max)?,
        };
        if c.order_min > c.order_max {
            return Err(r.err("order_min", "exceeds order_max"));
        }
        Ok(c)
    }

    fn read_sweep(ini: &Ini) -> Result<Option<SweepSpec>> {
        if !ini.has_section("sweep") {
            return Ok(None);
        }
        let mut run = None;
        let mut axes = Vec::new();
        for (key, value) in ini.entries("sweep") {
            if key == "run" {
                if !SWEEPABLE_RUNS.contains(&value.as_str()) {
                    return Err(ini.error(
                        "sweep",
                        &key,
                        format!("`{}`: expected one of {:?}", value, SWEEPABLE_RUNS),
                    ));
                }
                run = Some(value);
                continue;
            }
            let Some((section, field)) = key.split_once('.') else {
                return Err(ini.error("sweep", &key, "expected `section.key`"));
            };
            let known = SECTIONS
                .iter()
                .find(|(n, _)| *n == section)
                .is_some_and(|(_, keys)| keys.contains(&field));
            if !known || section == "output" {
                return Err(ini.error("sweep", &key, "not a sweepable configuration key"));
            }
            let values: Vec<String> = value
                .split(',')
                .map(|s| s.trim().to_string())
                .filter(|s| !s.is_empty())
                .collect();
            if values.is_empty() {
                return Err(ini.error("sweep", &key, "empty value list"));
            }
            if let Some(bad) = values.iter().find(|v| v.parse::<f64>().is_err()) {
                return Err(ini.error("sweep", &key, format!("`{}` is not a number", bad)));
            }
            axes.push((key, values));
        }
        let run = run.ok_or_else(|| ini.error("sweep", "run", "required"))?;
        if axes.is_empty() {
            return Err(ini.error("sweep", "run", "no parameters to sweep"));
        }
        Ok(Some(SweepSpec { run, axes }))
    }

    /// Copy with `section.key = value` overrides applied and revalidated.
    pub fn with_overrides(&self, overrides: &[(String, String)]) -> Result<Self> {
        let mut ini = self.ini.clone();
        ini.remove_section("sweep");
        for (dotted, value) in overrides {
            let (section, key) = dotted
                .split_once('.')
                .ok_or_else(|| CliError::Usage(format!("bad override key `{}`", dotted)))?;
            // a velocity difference replaces an explicit beam pair and vice versa
            if section == "slits" && key == "dvx" {
                ini.remove("slits", "v1");
                ini.remove("slits", "v2");
            }
            if section == "slits" && (key == "v1" || key == "v2") {
                ini.remove("slits", "dvx");
                ini.remove("slits", "v_mean");
            }
            if section == "grid" && key == "dx" {
                ini.remove("grid", "points_per_sigma0");
            }
            if section == "grid" && key == "points_per_sigma0" {
                ini.remove("grid", "dx");
            }
            ini.set(section, key, value);
        }
        Self::from_ini(ini)
    }

    /// Requested snapshot times, sorted, within `[0, t_final]`.
    pub fn snapshot_times(&self) -> Vec<f64> {
        let t_final = self.grid.t_final;
        match &self.output.snapshots {
            SnapshotSpec::Times(times) => times.clone(),
            SnapshotSpec::Interval(h) => {
                let n = (t_final / h + 1e-9).floor() as usize;
                let mut times: Vec<f64> = (0..=n).map(|k| k as f64 * h).collect();
                if t_final - times[n] > 1e-9 * t_final.max(1.0) {
                    times.push(t_final);
                } else {
                    times[n] = t_final;
                }
                times
            }
        }
    }

    pub fn require_slits(&self) -> Result<SlitConfig<f64>> {
        self.slits.ok_or_else(|| CliError::Config {
            location: self.ini.origin().to_string(),
            key: "[slits]".into(),
            message: "section required for double-slit runs".into(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_natural_units() {
        let cfg = RunConfig::parse("", "empty").unwrap();
        assert_eq!(cfg.physical.diffusivity(), 0.5);
        assert_eq!(cfg.packet.sigma0(), 1.0);
        assert_eq!(cfg.grid.stability_limit, 0.4);
        assert_eq!(cfg.grid.nx_cap, 1 << 22);
        assert!(cfg.slits.is_none());
        assert_eq!(cfg.trajectories.quantiles.len(), 9);
        assert_eq!(cfg.snapshot_times().len(), 9);
        assert_eq!(*cfg.snapshot_times().last().unwrap(), 4.0);
    }

    #[test]
    fn parses_sections_and_comments() {
        let text = "# header\n[physical]\nhbar = 2 # inline\nmass=0.5\n\n[slits]\nseparation = 4\ndvx = 1\n";
        let cfg = RunConfig::parse(text, "t.ini").unwrap();
        assert_eq!(cfg.physical.diffusivity(), 2.0);
        let s = cfg.slits.unwrap();
        assert_eq!((s.v1(), s.v2()), (0.5, -0.5));
    }

    #[test]
    fn unknown_keys_are_rejected_with_location() {
        let err = RunConfig::parse("[grid]\ndx = 0.02\ndtt = 0.1\n", "cfg.ini").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("cfg.ini:3"), "{}", msg);
        assert!(msg.contains("grid.dtt"), "{}", msg);
        assert!(RunConfig::parse("[gird]\n", "cfg.ini").is_err());
        assert!(RunConfig::parse("dx = 1\n", "cfg.ini").is_err());
        assert!(RunConfig::parse("[grid]\ndx = 1\ndx = 2\n", "cfg.ini").is_err());
    }

    #[test]
    fn validation_names_the_key() {
        let msg = RunConfig::parse("[physical]\nhbar = 0\n", "c.ini")
            .unwrap_err()
            .to_string();
        assert!(msg.contains("physical.hbar"), "{}", msg);
        let msg = RunConfig::parse("[grid]\npoints_per_sigma0 = 4\n", "c.ini")
            .unwrap_err()
            .to_string();
        assert!(msg.contains("grid.points_per_sigma0"), "{}", msg);
        let msg = RunConfig::parse("[trajectories]\nquantiles = 0.7, 0.3\n", "c.ini")
            .unwrap_err()
            .to_string();
        assert!(msg.contains("strictly increasing"), "{}", msg);
        assert!(RunConfig::parse("[slits]\nseparation = 4\nv1 = 1\n", "c").is_err());
        assert!(
            RunConfig::parse("[slits]\nseparation = 4\nv1 = 1\nv2 = 0\ndvx = 1\n", "c").is_err()
        );
        assert!(RunConfig::parse("[output]\nsnapshot_times = 1, 9\n", "c").is_err());
    }

    #[test]
    fn missing_slits_section_is_reported() {
        let cfg = RunConfig::parse("", "c.ini").unwrap();
        assert!(cfg
            .require_slits()
            .unwrap_err()
            .to_string()
            .contains("[slits]"));
    }

    #[test]
    fn overrides_replace_velocity_forms() {
        let cfg = RunConfig::parse("[slits]\nseparation = 4\nv1 = 1\nv2 = 0\n", "c").unwrap();
        let o = cfg
            .with_overrides(&[("slits.dvx".to_string(), "2".to_string())])
            .unwrap();
        let s = o.slits.unwrap();
        assert_eq!((s.v1(), s.v2(), s.dvx()), (1.0, -1.0, 2.0));
    }

    #[test]
    fn sweep_section() {
        let text =
            "[slits]\nseparation = 4\ndvx = 1\n[sweep]\nrun = doubleslit\nslits.dvx = 0.5, 1, 2\n";
        let cfg = RunConfig::parse(text, "c").unwrap();
        let sweep = cfg.sweep.clone().unwrap();
        assert_eq!(sweep.run, "doubleslit");
        assert_eq!(sweep.axes[0].1, vec!["0.5", "1", "2"]);
        assert!(RunConfig::parse("[sweep]\nrun = doubleslit\nslits.dvx =\n", "c").is_err());
        assert!(RunConfig::parse("[sweep]\nrun = doubleslit\n", "c").is_err());
        assert!(RunConfig::parse("[sweep]\nrun = spread\ngrid.bogus = 1\n", "c").is_err());
        assert!(RunConfig::parse(
            "[sweep]\nrun = trajectories\ntrajectories.source = single\n",
            "c"
        )
        .is_err());
    }

    #[test]
    fn interval_snapshots_end_at_final_time() {
        let cfg = RunConfig::parse(
            "[grid]\nt_final = 1\n[output]\nsnapshot_interval = 0.3\n",
            "c",
        )
        .unwrap();
        let t = cfg.snapshot_times();
        assert_eq!(t.len(), 5);
        assert_eq!(*t.last().unwrap(), 1.0);
        let zero = RunConfig::parse("[grid]\nt_final = 0\n", "c").unwrap();
        assert_eq!(zero.snapshot_times(), vec![0.0]);
    }
}
