//! Scenario configuration: TOML text in, a fully validated [`ScenarioConfig`]
//! out, and the resolved echo with every default written back.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use nlse_core::grid::MIN_POINTS;
use nlse_core::potentials::{FdOptions, GenericDensity, CATALOG};
use nlse_core::{
    DgParams, GaugePreset, InitialPreset, IntegratorConfig, Lattice, Model, PhysicalConstants,
    PotentialSpec, Route, Scenario,
};
use thiserror::Error;
use toml::{Table, Value};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid `{field}`: {constraint}")]
    Validation { field: String, constraint: String },
    #[error("unknown key `{key}`{}", suggestion_text(.suggestion))]
    UnknownKey {
        key: String,
        suggestion: Option<String>,
    },
}

fn suggestion_text(s: &Option<String>) -> String {
    s.as_ref()
        .map(|s| format!(", did you mean `{s}`?"))
        .unwrap_or_default()
}

fn invalid(field: impl Into<String>, constraint: impl Into<String>) -> ConfigError {
    ConfigError::Validation {
        field: field.into(),
        constraint: constraint.into(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    EvolveOriginal,
    EvolveTransformedA,
    EvolveTransformedB,
    CommutingDiagram,
    ConditionCheck,
    SelfConsistent1d,
    FullVerify,
}

impl Mode {
    pub const ALL: [(Mode, &'static str, &'static str); 7] = [
        (Mode::EvolveOriginal, "evolve-original", "evolve psi under the original nonlinear equation"),
        (
            Mode::EvolveTransformedA,
            "evolve-transformed-A",
            "transform psi, keep A, evolve the transformed equation",
        ),
        (
            Mode::EvolveTransformedB,
            "evolve-transformed-B",
            "keep psi, shift the gauge field, evolve the transformed equation",
        ),
        (
            Mode::CommutingDiagram,
            "commuting-diagram",
            "compare evolve-then-transform with transform-then-evolve, plus refinement study",
        ),
        (
            Mode::ConditionCheck,
            "condition-check",
            "evaluate the integrability condition on the initial state",
        ),
        (
            Mode::SelfConsistent1d,
            "selfconsistent-1d",
            "1D run with A0 solved from Gauss's law at every stage",
        ),
        (Mode::FullVerify, "full-verify", "every verification check, written to report.txt"),
    ];

    pub fn name(self) -> &'static str {
        Self::ALL.iter().find(|m| m.0 == self).map_or("", |m| m.1)
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Self::ALL
            .iter()
            .find(|m| m.1 == s)
            .map(|m| m.0)
            .ok_or_else(|| {
                let names: Vec<&str> = Self::ALL.iter().map(|m| m.1).collect();
                format!("unknown mode `{s}` (known: {})", names.join(", "))
            })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PotentialKind {
    DgUngauged,
    DgGauged,
    Generic,
}

impl PotentialKind {
    pub const ALL: [(PotentialKind, &'static str, &'static str); 3] = [
        (PotentialKind::DgUngauged, "dg-ungauged", "Doebner-Goldin density with grad S"),
        (PotentialKind::DgGauged, "dg-gauged", "Doebner-Goldin density with grad S - A"),
        (PotentialKind::Generic, "generic", "catalog density handled by the numeric engine"),
    ];

    pub fn name(self) -> &'static str {
        Self::ALL.iter().find(|k| k.0 == self).map_or("", |k| k.1)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PotentialConfig {
    pub kind: PotentialKind,
    pub nu: f64,
    pub alpha: f64,
    /// Catalog name, generic kind only.
    pub density: Option<String>,
    /// Density floor relative to `max rho`.
    pub floor: f64,
    /// Relative step of the numeric functional-derivative engine.
    pub fd_step: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LatticeConfig {
    pub dim: usize,
    pub points: usize,
    pub length: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IntegratorSettings {
    pub dt: f64,
    pub t_final: f64,
    pub snapshot_stride: u64,
    pub stability: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct VerifySettings {
    pub levels: Vec<usize>,
    pub drift_steps: u64,
    pub route: Route,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    /// `None` means calibrated.
    pub condition: Option<f64>,
    pub charge_drift: f64,
    pub gauss: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioConfig {
    pub mode: Mode,
    pub output: PathBuf,
    pub constants: PhysicalConstants,
    pub potential: PotentialConfig,
    pub lattice: LatticeConfig,
    pub initial: InitialPreset,
    pub gauge: GaugePreset,
    pub integrator: IntegratorSettings,
    pub verify: VerifySettings,
    pub tolerances: Tolerances,
}

pub const DEFAULT_DT_FACTOR: f64 = 0.1;

const SECTIONS: [&str; 10] = [
    "mode",
    "output",
    "constants",
    "potential",
    "lattice",
    "initial",
    "gauge",
    "integrator",
    "verify",
    "tolerances",
];

fn suggest<'a>(key: &str, known: impl IntoIterator<Item = &'a str>) -> Option<String> {
    known
        .into_iter()
        .map(|k| (strsim::levenshtein(key, k), k))
        .min()
        .filter(|(d, k)| *d <= 2.max(k.len() / 3))
        .map(|(_, k)| k.to_string())
}

struct Section {
    name: &'static str,
    table: Table,
}

impl Section {
    fn new(root: &mut Table, name: &'static str) -> Result<Self, ConfigError> {
        let table = match root.remove(name) {
            None => Table::new(),
            Some(Value::Table(t)) => t,
            Some(_) => return Err(invalid(name, "expected a table")),
        };
        Ok(Self { name, table })
    }

    fn field(&self, key: &str) -> String {
        format!("{}.{key}", self.name)
    }

    fn f64(&mut self, key: &str, default: f64) -> Result<f64, ConfigError> {
        match self.table.remove(key) {
            None => Ok(default),
            Some(Value::Float(v)) => Ok(v),
            Some(Value::Integer(v)) => Ok(v as f64),
            Some(_) => Err(invalid(self.field(key), "expected a number")),
        }
    }

    fn opt_f64(&mut self, key: &str) -> Result<Option<f64>, ConfigError> {
        if self.table.contains_key(key) {
            self.f64(key, 0.0).map(Some)
        } else {
            Ok(None)
        }
    }

    fn int(&mut self, key: &str, default: i64) -> Result<i64, ConfigError> {
        match self.table.remove(key) {
            None => Ok(default),
            Some(Value::Integer(v)) => Ok(v),
            Some(_) => Err(invalid(self.field(key), "expected an integer")),
        }
    }

    fn str(&mut self, key: &str, default: &str) -> Result<String, ConfigError> {
        match self.table.remove(key) {
            None => Ok(default.to_string()),
            Some(Value::String(v)) => Ok(v),
            Some(_) => Err(invalid(self.field(key), "expected a string")),
        }
    }

    fn finish(self, allowed: &[&str]) -> Result<(), ConfigError> {
        match self.table.keys().next() {
            None => Ok(()),
            Some(k) => Err(ConfigError::UnknownKey {
                key: format!("{}.{k}", self.name),
                suggestion: suggest(k, allowed.iter().copied()).map(|s| format!("{}.{s}", self.name)),
            }),
        }
    }
}

fn positive(field: &str, v: f64) -> Result<f64, ConfigError> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(invalid(field, format!("must be positive and finite, got {v}")))
    }
}

fn non_negative(field: &str, v: f64) -> Result<f64, ConfigError> {
    if v.is_finite() && v >= 0.0 {
        Ok(v)
    } else {
        Err(invalid(field, format!("must be non-negative and finite, got {v}")))
    }
}

fn finite(field: &str, v: f64) -> Result<f64, ConfigError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(invalid(field, "must be finite"))
    }
}

fn wavenumber(field: &str, v: i64) -> Result<u32, ConfigError> {
    u32::try_from(v)
        .ok()
        .filter(|&k| k >= 1)
        .ok_or_else(|| invalid(field, format!("must be a positive integer, got {v}")))
}

/// Parses TOML text into a raw table, reporting the position of syntax errors.
pub fn parse_table(text: &str) -> Result<Table, ConfigError> {
    text.parse::<Table>().map_err(|e| {
        let offset = e.span().map_or(0, |s| s.start).min(text.len());
        let before = &text[..offset];
        let line = before.matches('\n').count() + 1;
        let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
        ConfigError::Parse {
            line,
            column,
            message: e.message().to_string(),
        }
    })
}

/// Applies `section.key=value` overrides to a raw table. Values are read as
/// TOML and fall back to bare strings.
pub fn apply_overrides(table: &mut Table, overrides: &[String]) -> Result<(), ConfigError> {
    for o in overrides {
        let (path, raw) = o
            .split_once('=')
            .ok_or_else(|| invalid(o.clone(), "override must have the form key=value"))?;
        let path = path.trim();
        let raw = raw.trim();
        let value = format!("v = {raw}")
            .parse::<Table>()
            .ok()
            .and_then(|mut t| t.remove("v"))
            .unwrap_or_else(|| Value::String(raw.to_string()));
        let mut parts: Vec<&str> = path.split('.').collect();
        let last = parts.pop().filter(|k| !k.is_empty()).ok_or_else(|| invalid(path, "empty key"))?;
        let mut cur = &mut *table;
        for p in parts {
            let entry = cur.entry(p.to_string()).or_insert_with(|| Value::Table(Table::new()));
            cur = match entry {
                Value::Table(t) => t,
                _ => return Err(invalid(path, format!("`{p}` is not a table"))),
            };
        }
        cur.insert(last.to_string(), value);
    }
    Ok(())
}

/// Parses and validates a configuration.
pub fn parse_config(text: &str) -> Result<ScenarioConfig, ConfigError> {
    parse_config_with(text, &[])
}

/// Parses a configuration after applying command-line overrides.
pub fn parse_config_with(text: &str, overrides: &[String]) -> Result<ScenarioConfig, ConfigError> {
    let mut table = parse_table(text)?;
    apply_overrides(&mut table, overrides)?;
    from_table(table)
}

fn from_table(mut root: Table) -> Result<ScenarioConfig, ConfigError> {
    if let Some(k) = root.keys().find(|k| !SECTIONS.contains(&k.as_str())) {
        return Err(ConfigError::UnknownKey {
            key: k.clone(),
            suggestion: suggest(k, SECTIONS),
        });
    }
    let mode = match root.remove("mode") {
        None => return Err(invalid("mode", "required")),
        Some(Value::String(s)) => s.parse::<Mode>().map_err(|e| invalid("mode", e))?,
        Some(_) => return Err(invalid("mode", "expected a string")),
    };
    let output = match root.remove("output") {
        None => PathBuf::from("out"),
        Some(Value::String(s)) => PathBuf::from(s),
        Some(_) => return Err(invalid("output", "expected a string")),
    };

    let mut s = Section::new(&mut root, "constants")?;
    let constants = PhysicalConstants {
        hbar: positive("constants.hbar", s.f64("hbar", 1.0)?)?,
        mass: positive("constants.mass", s.f64("mass", 1.0)?)?,
        charge_e: positive("constants.charge", s.f64("charge", 1.0)?)?,
        light_c: positive("constants.light_speed", s.f64("light_speed", 1.0)?)?,
    };
    s.finish(&["hbar", "mass", "charge", "light_speed"])?;

    let mut s = Section::new(&mut root, "potential")?;
    let kind_name = s.str("kind", "dg-gauged")?;
    let kind = PotentialKind::ALL
        .iter()
        .find(|k| k.1 == kind_name)
        .map(|k| k.0)
        .ok_or_else(|| invalid("potential.kind", format!("unknown kind `{kind_name}`")))?;
    let nu = non_negative("potential.nu", s.f64("nu", 0.05)?)?;
    let alpha = finite("potential.alpha", s.f64("alpha", 0.1)?)?;
    let density = if kind == PotentialKind::Generic {
        let d = s.str("density", "")?;
        if !CATALOG.contains(&d.as_str()) {
            return Err(invalid(
                "potential.density",
                format!("expected one of {}", CATALOG.join(", ")),
            ));
        }
        Some(d)
    } else {
        None
    };
    let floor = positive("potential.floor", s.f64("floor", nlse_core::fields::DEFAULT_FLOOR_REL)?)?;
    let fd_step = positive("potential.fd_step", s.f64("fd_step", FdOptions::default().h_rel)?)?;
    let mut allowed = vec!["kind", "nu", "alpha", "floor", "fd_step"];
    if kind == PotentialKind::Generic {
        allowed.push("density");
    }
    s.finish(&allowed)?;
    let potential = PotentialConfig {
        kind,
        nu,
        alpha,
        density,
        floor,
        fd_step,
    };

    let mut s = Section::new(&mut root, "lattice")?;
    let dim = s.int("dim", 1)?;
    if !(1..=2).contains(&dim) {
        return Err(invalid("lattice.dim", format!("must be 1 or 2, got {dim}")));
    }
    let points = s.int("points", 64)?;
    if points < MIN_POINTS as i64 {
        return Err(invalid("lattice.points", format!("must be at least {MIN_POINTS}, got {points}")));
    }
    let length = positive("lattice.length", s.f64("length", std::f64::consts::TAU)?)?;
    s.finish(&["dim", "points", "length"])?;
    let lattice = LatticeConfig {
        dim: dim as usize,
        points: points as usize,
        length,
    };

    let mut s = Section::new(&mut root, "initial")?;
    let name = s.str("preset", "cosine-density")?;
    let base = name
        .parse::<InitialPreset>()
        .map_err(|_| invalid("initial.preset", preset_list(&InitialPreset::NAMES)))?;
    let (initial, allowed): (InitialPreset, &[&str]) = match base {
        InitialPreset::Uniform => (base, &["preset"]),
        InitialPreset::CosineDensity {
            amplitude,
            wavenumber: k,
            phase_amplitude,
        } => {
            let a = finite("initial.amplitude", s.f64("amplitude", amplitude)?)?;
            if a.abs() >= 1.0 {
                return Err(invalid("initial.amplitude", "must satisfy |amplitude| < 1"));
            }
            (
                InitialPreset::CosineDensity {
                    amplitude: a,
                    wavenumber: wavenumber("initial.wavenumber", s.int("wavenumber", i64::from(k))?)?,
                    phase_amplitude: finite("initial.phase_amplitude", s.f64("phase_amplitude", phase_amplitude)?)?,
                },
                &["preset", "amplitude", "wavenumber", "phase_amplitude"],
            )
        }
        InitialPreset::GaussianBump {
            center,
            width,
            background,
        } => (
            InitialPreset::GaussianBump {
                center: finite("initial.center", s.f64("center", center)?)?,
                width: positive("initial.width", s.f64("width", width)?)?,
                background: non_negative("initial.background", s.f64("background", background)?)?,
            },
            &["preset", "center", "width", "background"],
        ),
        InitialPreset::TwoBump {
            width,
            background,
            phase_amplitude,
        } => (
            InitialPreset::TwoBump {
                width: positive("initial.width", s.f64("width", width)?)?,
                background: non_negative("initial.background", s.f64("background", background)?)?,
                phase_amplitude: finite("initial.phase_amplitude", s.f64("phase_amplitude", phase_amplitude)?)?,
            },
            &["preset", "width", "background", "phase_amplitude"],
        ),
    };
    s.finish(allowed)?;

    let mut s = Section::new(&mut root, "gauge")?;
    let name = s.str("preset", "zero")?;
    let base = name
        .parse::<GaugePreset>()
        .map_err(|_| invalid("gauge.preset", preset_list(&GaugePreset::NAMES)))?;
    let (gauge, allowed): (GaugePreset, &[&str]) = match base {
        GaugePreset::Zero => (base, &["preset"]),
        GaugePreset::StaticSineA0 { e0, wavenumber: k } => (
            GaugePreset::StaticSineA0 {
                e0: finite("gauge.e0", s.f64("e0", e0)?)?,
                wavenumber: wavenumber("gauge.wavenumber", s.int("wavenumber", i64::from(k))?)?,
            },
            &["preset", "e0", "wavenumber"],
        ),
        GaugePreset::ConstantB { b0 } => (
            GaugePreset::ConstantB {
                b0: finite("gauge.b0", s.f64("b0", b0)?)?,
            },
            &["preset", "b0"],
        ),
        GaugePreset::SineB { b0, wavenumber: k } => (
            GaugePreset::SineB {
                b0: finite("gauge.b0", s.f64("b0", b0)?)?,
                wavenumber: wavenumber("gauge.wavenumber", s.int("wavenumber", i64::from(k))?)?,
            },
            &["preset", "b0", "wavenumber"],
        ),
    };
    s.finish(allowed)?;
    if matches!(gauge, GaugePreset::ConstantB { .. } | GaugePreset::SineB { .. }) && lattice.dim != 2 {
        return Err(invalid("gauge.preset", format!("`{}` needs lattice.dim = 2", gauge.name())));
    }

    let mut s = Section::new(&mut root, "integrator")?;
    let t_final = positive("integrator.t_final", s.f64("t_final", 0.1)?)?;
    let stability = positive("integrator.stability", s.f64("stability", IntegratorConfig::DEFAULT_STABILITY_C)?)?;
    let dx = length / lattice.points as f64;
    let dt = match s.opt_f64("dt")? {
        Some(dt) => positive("integrator.dt", dt)?,
        None => {
            let target = DEFAULT_DT_FACTOR * dx * dx * constants.mass / constants.hbar;
            t_final / (t_final / target).ceil()
        }
    };
    let stride = s.int("snapshot_stride", 10)?;
    if stride < 1 {
        return Err(invalid("integrator.snapshot_stride", "must be at least 1"));
    }
    s.finish(&["dt", "t_final", "snapshot_stride", "stability"])?;
    let integrator = IntegratorSettings {
        dt,
        t_final,
        snapshot_stride: stride as u64,
        stability,
    };

    let mut s = Section::new(&mut root, "verify")?;
    let levels = match s.table.remove("levels") {
        None => vec![lattice.points, 2 * lattice.points, 4 * lattice.points],
        Some(Value::Array(a)) => a
            .iter()
            .map(|v| match v {
                Value::Integer(n) if *n >= MIN_POINTS as i64 => Ok(*n as usize),
                _ => Err(invalid("verify.levels", format!("entries must be integers >= {MIN_POINTS}"))),
            })
            .collect::<Result<Vec<_>, _>>()?,
        Some(_) => return Err(invalid("verify.levels", "expected an array of integers")),
    };
    if levels.len() < 3 || levels.windows(2).any(|w| w[1] <= w[0]) {
        return Err(invalid("verify.levels", "needs at least three strictly increasing entries"));
    }
    let drift_steps = s.int("drift_steps", 1000)?;
    if drift_steps < 1 {
        return Err(invalid("verify.drift_steps", "must be at least 1"));
    }
    let route = s
        .str("route", "A")?
        .parse::<Route>()
        .map_err(|_| invalid("verify.route", "expected `A` or `B`"))?;
    s.finish(&["levels", "drift_steps", "route"])?;
    let verify = VerifySettings {
        levels,
        drift_steps: drift_steps as u64,
        route,
    };

    let mut s = Section::new(&mut root, "tolerances")?;
    let tolerances = Tolerances {
        condition: s.opt_f64("condition")?.map(|v| positive("tolerances.condition", v)).transpose()?,
        charge_drift: positive("tolerances.charge_drift", s.f64("charge_drift", 1e-8)?)?,
        gauss: positive("tolerances.gauss", s.f64("gauss", 1e-10)?)?,
    };
    s.finish(&["condition", "charge_drift", "gauss"])?;

    if mode == Mode::SelfConsistent1d && lattice.dim != 1 {
        return Err(invalid("lattice.dim", "selfconsistent-1d needs lattice.dim = 1"));
    }
    if potential.kind == PotentialKind::Generic && matches!(mode, Mode::CommutingDiagram | Mode::FullVerify) {
        return Err(invalid("potential.kind", format!("{mode} runs on the Doebner-Goldin kinds only")));
    }

    Ok(ScenarioConfig {
        mode,
        output,
        constants,
        potential,
        lattice,
        initial,
        gauge,
        integrator,
        verify,
        tolerances,
    })
}

fn preset_list(names: &[(&str, &str)]) -> String {
    let n: Vec<&str> = names.iter().map(|p| p.0).collect();
    format!("expected one of {}", n.join(", "))
}

impl ScenarioConfig {
    pub fn lattice(&self) -> Lattice {
        let l = &self.lattice;
        Lattice::new(&vec![l.points; l.dim], &vec![l.length; l.dim]).expect("validated lattice")
    }

    pub fn potential_spec(&self) -> PotentialSpec {
        let p = &self.potential;
        let params = DgParams {
            nu: p.nu,
            alpha: p.alpha,
        };
        match p.kind {
            PotentialKind::DgUngauged => PotentialSpec::DgUngauged(params),
            PotentialKind::DgGauged => PotentialSpec::DgGauged(params),
            PotentialKind::Generic => PotentialSpec::Generic(
                GenericDensity::catalog(p.density.as_deref().unwrap_or(""), params, self.constants)
                    .expect("validated catalog name"),
            ),
        }
    }

    pub fn model(&self) -> Model {
        Model {
            floor_rel: self.potential.floor,
            fd: FdOptions {
                h_rel: self.potential.fd_step,
            },
            ..Model::new(self.potential_spec(), self.constants)
        }
    }

    pub fn integrator_config(&self) -> IntegratorConfig {
        IntegratorConfig {
            dt: self.integrator.dt,
            t_final: self.integrator.t_final,
            snapshot_stride: self.integrator.snapshot_stride,
            stability_c: self.integrator.stability,
        }
    }

    /// Refinable scenario whose base level reproduces `dt` at `lattice.points`.
    pub fn scenario(&self) -> Scenario {
        let lat = self.lattice();
        let dx = lat.min_spacing();
        Scenario {
            model: self.model(),
            initial: self.initial,
            gauge: self.gauge,
            lattice: lat,
            t_final: self.integrator.t_final,
            dt_factor: self.integrator.dt * self.constants.hbar / (self.constants.mass * dx * dx),
            condition_override: self.tolerances.condition,
        }
    }

    /// Resolved configuration with every default materialised.
    pub fn to_toml(&self) -> String {
        let mut root = Table::new();
        root.insert("mode".into(), self.mode.name().into());
        root.insert("output".into(), self.output.display().to_string().into());

        let c = &self.constants;
        root.insert(
            "constants".into(),
            table(&[
                ("hbar", c.hbar.into()),
                ("mass", c.mass.into()),
                ("charge", c.charge_e.into()),
                ("light_speed", c.light_c.into()),
            ]),
        );

        let p = &self.potential;
        let mut pot = vec![
            ("kind", p.kind.name().into()),
            ("nu", p.nu.into()),
            ("alpha", p.alpha.into()),
            ("floor", p.floor.into()),
            ("fd_step", p.fd_step.into()),
        ];
        if let Some(d) = &p.density {
            pot.push(("density", d.as_str().into()));
        }
        root.insert("potential".into(), table(&pot));

        let l = &self.lattice;
        root.insert(
            "lattice".into(),
            table(&[
                ("dim", (l.dim as i64).into()),
                ("points", (l.points as i64).into()),
                ("length", l.length.into()),
            ]),
        );

        let init: Vec<(&str, Value)> = match self.initial {
            InitialPreset::Uniform => vec![],
            InitialPreset::CosineDensity {
                amplitude,
                wavenumber,
                phase_amplitude,
            } => vec![
                ("amplitude", amplitude.into()),
                ("wavenumber", i64::from(wavenumber).into()),
                ("phase_amplitude", phase_amplitude.into()),
            ],
            InitialPreset::GaussianBump {
                center,
                width,
                background,
            } => vec![
                ("center", center.into()),
                ("width", width.into()),
                ("background", background.into()),
            ],
            InitialPreset::TwoBump {
                width,
                background,
                phase_amplitude,
            } => vec![
                ("width", width.into()),
                ("background", background.into()),
                ("phase_amplitude", phase_amplitude.into()),
            ],
        };
        let mut t = table(&init);
        if let Value::Table(t) = &mut t {
            t.insert("preset".into(), self.initial.name().into());
        }
        root.insert("initial".into(), t);

        let g: Vec<(&str, Value)> = match self.gauge {
            GaugePreset::Zero => vec![],
            GaugePreset::StaticSineA0 { e0, wavenumber } => {
                vec![("e0", e0.into()), ("wavenumber", i64::from(wavenumber).into())]
            }
            GaugePreset::ConstantB { b0 } => vec![("b0", b0.into())],
            GaugePreset::SineB { b0, wavenumber } => {
                vec![("b0", b0.into()), ("wavenumber", i64::from(wavenumber).into())]
            }
        };
        let mut t = table(&g);
        if let Value::Table(t) = &mut t {
            t.insert("preset".into(), self.gauge.name().into());
        }
        root.insert("gauge".into(), t);

        let i = &self.integrator;
        root.insert(
            "integrator".into(),
            table(&[
                ("dt", i.dt.into()),
                ("t_final", i.t_final.into()),
                ("snapshot_stride", (i.snapshot_stride as i64).into()),
                ("stability", i.stability.into()),
            ]),
        );

        let v = &self.verify;
        root.insert(
            "verify".into(),
            table(&[
                (
                    "levels",
                    Value::Array(v.levels.iter().map(|&n| Value::Integer(n as i64)).collect()),
                ),
                ("drift_steps", (v.drift_steps as i64).into()),
                ("route", v.route.to_string().into()),
            ]),
        );

        let tol = &self.tolerances;
        let mut t = vec![("charge_drift", tol.charge_drift.into()), ("gauss", tol.gauss.into())];
        if let Some(c) = tol.condition {
            t.push(("condition", c.into()));
        }
        root.insert("tolerances".into(), table(&t));

        let mut out = String::from("# resolved configuration; tolerances.condition is calibrated when absent\n");
        out.push_str(&toml::to_string(&root).expect("plain table serialises"));
        out
    }
}

fn table(entries: &[(&str, Value)]) -> Value {
    Value::Table(entries.iter().map(|(k, v)| (k.to_string(), v.clone())).collect())
}
