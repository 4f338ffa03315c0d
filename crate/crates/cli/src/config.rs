//! Flat key-value configuration file for the experiment harness.
//!
//! Format: one `key = value` pair per line, `#` starts a comment, blank
//! lines are ignored. Unknown keys are errors. Every key has a default, so
//! an empty (or absent) file reproduces the reference figure setups:
//! area 1, epsilon 0.5, sin² pulse on [0, 1], generator bases at 0.
//!
//! ```text
//! area = 1.0
//! epsilon = 0.5
//! pulse = sin2            # sin2 | constant
//! pulse_start = 0.0
//! pulse_end = 1.0
//! scan_parameter = t1     # t1 | t2 | t1_lower | t2_lower | epsilon | area
//! scan_lo = 0.0           # defaults to pulse_start
//! scan_hi = 1.0           # defaults to pulse_end
//! scan_points = 101
//! methods = kam1,kam2,magnus1,magnus2
//! t1 = 0.39               # fig2/sweep fixed value; scaling defaults to pulse_start
//! t2 = 0.0
//! t1_lower = 0.0
//! t2_lower = 0.0
//! series_tol = 1e-12
//! series_max_terms = 64
//! quad_panels = 64
//! quad_order = 8
//! ode_tol = 1e-12
//! epsilons = 0.05,0.1,0.2
//! out_dir = out
//! svg = false
//! ```

use std::fmt;
use std::path::{Path, PathBuf};

use pulsekam::kam::KamParams;
use pulsekam::model::{Pulse, PulseShape, SuddenProblem};

#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config error: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MethodId {
    Dyson1,
    Dyson2,
    Magnus1,
    Magnus2,
    Kam1,
    Kam2,
}

impl MethodId {
    pub fn label(&self) -> &'static str {
        match self {
            MethodId::Dyson1 => "dyson1",
            MethodId::Dyson2 => "dyson2",
            MethodId::Magnus1 => "magnus1",
            MethodId::Magnus2 => "magnus2",
            MethodId::Kam1 => "kam1",
            MethodId::Kam2 => "kam2",
        }
    }

    fn parse(s: &str) -> Result<Self, ConfigError> {
        match s.trim().to_ascii_lowercase().as_str() {
            "dyson1" => Ok(MethodId::Dyson1),
            "dyson2" => Ok(MethodId::Dyson2),
            "magnus1" => Ok(MethodId::Magnus1),
            "magnus2" => Ok(MethodId::Magnus2),
            "kam1" => Ok(MethodId::Kam1),
            "kam2" => Ok(MethodId::Kam2),
            other => Err(ConfigError(format!("unknown method '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepParameter {
    T1,
    T2,
    T1Lower,
    T2Lower,
    Epsilon,
    Area,
}

impl SweepParameter {
    pub fn label(&self) -> &'static str {
        match self {
            SweepParameter::T1 => "t1",
            SweepParameter::T2 => "t2",
            SweepParameter::T1Lower => "t1_lower",
            SweepParameter::T2Lower => "t2_lower",
            SweepParameter::Epsilon => "epsilon",
            SweepParameter::Area => "area",
        }
    }

    fn parse(s: &str) -> Result<Self, ConfigError> {
        match s.trim().to_ascii_lowercase().as_str() {
            "t1" => Ok(SweepParameter::T1),
            "t2" => Ok(SweepParameter::T2),
            "t1_lower" => Ok(SweepParameter::T1Lower),
            "t2_lower" => Ok(SweepParameter::T2Lower),
            "epsilon" => Ok(SweepParameter::Epsilon),
            "area" => Ok(SweepParameter::Area),
            other => Err(ConfigError(format!("unknown scan parameter '{other}'"))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub area: f64,
    pub epsilon: f64,
    pub pulse_shape: PulseShape,
    pub pulse_start: f64,
    pub pulse_end: f64,
    pub scan_parameter: SweepParameter,
    pub scan_lo: Option<f64>,
    pub scan_hi: Option<f64>,
    pub scan_points: usize,
    pub methods: Vec<MethodId>,
    pub t1: Option<f64>,
    pub t2: Option<f64>,
    pub t1_lower: f64,
    pub t2_lower: f64,
    pub series_tol: f64,
    pub series_max_terms: usize,
    pub quad_panels: usize,
    pub quad_order: usize,
    pub ode_tol: f64,
    pub epsilons: Vec<f64>,
    pub out_dir: PathBuf,
    pub svg: bool,
    pub quiet: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            area: 1.0,
            epsilon: 0.5,
            pulse_shape: PulseShape::Sin2,
            pulse_start: 0.0,
            pulse_end: 1.0,
            scan_parameter: SweepParameter::T1,
            scan_lo: None,
            scan_hi: None,
            scan_points: 101,
            methods: vec![
                MethodId::Kam1,
                MethodId::Kam2,
                MethodId::Magnus1,
                MethodId::Magnus2,
            ],
            t1: None,
            t2: None,
            t1_lower: 0.0,
            t2_lower: 0.0,
            series_tol: 1e-12,
            series_max_terms: 64,
            quad_panels: 64,
            quad_order: 8,
            ode_tol: 1e-12,
            epsilons: vec![0.05, 0.1, 0.2],
            out_dir: PathBuf::from("out"),
            svg: false,
            quiet: false,
        }
    }
}

fn parse_f64(key: &str, value: &str) -> Result<f64, ConfigError> {
    value
        .parse::<f64>()
        .map_err(|_| ConfigError(format!("key '{key}': expected a number, got '{value}'")))
}

fn parse_usize(key: &str, value: &str) -> Result<usize, ConfigError> {
    value
        .parse::<usize>()
        .map_err(|_| ConfigError(format!("key '{key}': expected an integer, got '{value}'")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool, ConfigError> {
    match value.to_ascii_lowercase().as_str() {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        other => Err(ConfigError(format!("key '{key}': expected a boolean, got '{other}'"))),
    }
}

impl ExperimentConfig {
    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
        Self::from_str_contents(&text)
    }

    pub fn from_str_contents(text: &str) -> Result<Self, ConfigError> {
        let mut config = Self::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = match raw.find('#') {
                Some(pos) => &raw[..pos],
                None => raw,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                ConfigError(format!("line {}: expected 'key = value', got '{line}'", lineno + 1))
            })?;
            let key = key.trim();
            let value = value.trim();
            config.apply(key, value)?;
        }
        config.validate()?;
        Ok(config)
    }

    fn apply(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        match key {
            "area" => self.area = parse_f64(key, value)?,
            "epsilon" => self.epsilon = parse_f64(key, value)?,
            "pulse" => {
                self.pulse_shape = match value.to_ascii_lowercase().as_str() {
                    "sin2" => PulseShape::Sin2,
                    "constant" => PulseShape::Constant,
                    other => return Err(ConfigError(format!("unknown pulse shape '{other}'"))),
                }
            }
            "pulse_start" => self.pulse_start = parse_f64(key, value)?,
            "pulse_end" => self.pulse_end = parse_f64(key, value)?,
            "scan_parameter" => self.scan_parameter = SweepParameter::parse(value)?,
            "scan_lo" => self.scan_lo = Some(parse_f64(key, value)?),
            "scan_hi" => self.scan_hi = Some(parse_f64(key, value)?),
            "scan_points" => self.scan_points = parse_usize(key, value)?,
            "methods" => {
                self.methods = value
                    .split(',')
                    .filter(|s| !s.trim().is_empty())
                    .map(MethodId::parse)
                    .collect::<Result<_, _>>()?;
                if self.methods.is_empty() {
                    return Err(ConfigError("methods list is empty".into()));
                }
            }
            "t1" => self.t1 = Some(parse_f64(key, value)?),
            "t2" => self.t2 = Some(parse_f64(key, value)?),
            "t1_lower" => self.t1_lower = parse_f64(key, value)?,
            "t2_lower" => self.t2_lower = parse_f64(key, value)?,
            "series_tol" => self.series_tol = parse_f64(key, value)?,
            "series_max_terms" => self.series_max_terms = parse_usize(key, value)?,
            "quad_panels" => self.quad_panels = parse_usize(key, value)?,
            "quad_order" => self.quad_order = parse_usize(key, value)?,
            "ode_tol" => self.ode_tol = parse_f64(key, value)?,
            "epsilons" => {
                self.epsilons = value
                    .split(',')
                    .filter(|s| !s.trim().is_empty())
                    .map(|s| parse_f64("epsilons", s.trim()))
                    .collect::<Result<_, _>>()?;
            }
            "out_dir" => self.out_dir = PathBuf::from(value),
            "svg" => self.svg = parse_bool(key, value)?,
            unknown => return Err(ConfigError(format!("unknown key '{unknown}'"))),
        }
        Ok(())
    }

    fn validate(&self) -> Result<(), ConfigError> {
        if self.pulse_start.is_nan() || self.pulse_end.is_nan() || self.pulse_start >= self.pulse_end
        {
            return Err(ConfigError(format!(
                "pulse support must satisfy pulse_start < pulse_end, got [{}, {}]",
                self.pulse_start, self.pulse_end
            )));
        }
        if self.scan_points < 3 {
            return Err(ConfigError(format!(
                "scan_points must be at least 3, got {}",
                self.scan_points
            )));
        }
        if !(self.epsilon >= 0.0 && self.epsilon.is_finite()) {
            return Err(ConfigError(format!("epsilon must be non-negative, got {}", self.epsilon)));
        }
        if !matches!(self.quad_order, 4 | 8 | 16) {
            return Err(ConfigError(format!(
                "quad_order must be 4, 8 or 16, got {}",
                self.quad_order
            )));
        }
        if !(1e-14..=1e-6).contains(&self.ode_tol) {
            return Err(ConfigError(format!(
                "ode_tol must lie in [1e-14, 1e-6], got {:e}",
                self.ode_tol
            )));
        }
        Ok(())
    }

    pub fn problem(&self) -> Result<SuddenProblem, ConfigError> {
        let pulse = Pulse::new(self.pulse_shape, self.area, self.pulse_start, self.pulse_end)
            .map_err(|e| ConfigError(e.to_string()))?;
        SuddenProblem::new(
            pulse,
            pulsekam::ComplexMatrix::pauli_x(),
            pulsekam::ComplexMatrix::pauli_z(),
            self.epsilon,
        )
        .map_err(|e| ConfigError(e.to_string()))
    }

    fn base_params(&self) -> KamParams {
        KamParams {
            t_free: self.pulse_start,
            t_lower: self.t1_lower,
            series_tol: self.series_tol,
            series_max_terms: self.series_max_terms,
            quad_panels: self.quad_panels,
            quad_order: self.quad_order,
        }
    }

    /// First-iteration parameters; `default_t1` supplies the command's
    /// fallback when the config does not pin `t1`.
    pub fn params1(&self, default_t1: f64) -> KamParams {
        self.base_params().with_t_free(self.t1.unwrap_or(default_t1))
    }

    /// Second-iteration parameters.
    pub fn params2(&self, default_t2: f64) -> KamParams {
        self.base_params()
            .with_t_free(self.t2.unwrap_or(default_t2))
            .with_t_lower(self.t2_lower)
    }

    pub fn scan_range(&self) -> (f64, f64) {
        (
            self.scan_lo.unwrap_or(self.pulse_start),
            self.scan_hi.unwrap_or(self.pulse_end),
        )
    }
}
