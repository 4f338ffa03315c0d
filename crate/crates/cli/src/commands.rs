//! The experiment commands: figure reproductions, the objective scan, the
//! scaling table and the generic sweep.

use std::fmt;
use std::path::PathBuf;

use pulsekam::baselines::{baseline_propagator, BaselineKind};
use pulsekam::error::CoreError;
use pulsekam::kam::{kam_approximant, KamChain, KamParams};
use pulsekam::metrics::{delta_error, scaling_study};
use pulsekam::model::SuddenProblem;
use pulsekam::optimize::{scan_lambda, ScanParameter};
use pulsekam::propagator::{reference_for_problem, Propagator};

use crate::config::{ConfigError, ExperimentConfig, MethodId, SweepParameter};
use crate::output::{fmt12, fmt_opt, log10_cell, write_csv, write_svg, Panel, Series};

/// Default fixed first free time for the second-figure run; matches the
/// minimum located by the first-figure optimization.
pub const DEFAULT_T1_STAR: f64 = 0.39;

#[derive(Debug)]
pub enum CommandError {
    Config(ConfigError),
    Numeric(CoreError),
    Io(std::io::Error),
}

impl CommandError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CommandError::Config(_) => 2,
            CommandError::Numeric(_) => 3,
            CommandError::Io(_) => 4,
        }
    }
}

impl fmt::Display for CommandError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CommandError::Config(e) => write!(f, "{e}"),
            CommandError::Numeric(e) => write!(f, "numeric failure: {e}"),
            CommandError::Io(e) => write!(f, "i/o failure: {e}"),
        }
    }
}

impl From<ConfigError> for CommandError {
    fn from(e: ConfigError) -> Self {
        CommandError::Config(e)
    }
}

impl From<CoreError> for CommandError {
    fn from(e: CoreError) -> Self {
        CommandError::Numeric(e)
    }
}

impl From<std::io::Error> for CommandError {
    fn from(e: std::io::Error) -> Self {
        CommandError::Io(e)
    }
}

type CmdResult = Result<Vec<PathBuf>, CommandError>;

fn ensure_out_dir(config: &ExperimentConfig) -> Result<(), CommandError> {
    std::fs::create_dir_all(&config.out_dir)?;
    Ok(())
}

fn warn_outside_support(config: &ExperimentConfig, params: &KamParams, which: &str) {
    if params.outside_support(config.pulse_start, config.pulse_end) {
        eprintln!(
            "warning: {which} free times ({}, {}) lie outside the pulse support [{}, {}]",
            params.t_free, params.t_lower, config.pulse_start, config.pulse_end
        );
    }
}

/// Build the approximant a method id names, using the configured
/// first/second iteration parameters.
pub fn method_propagator(
    problem: &SuddenProblem,
    method: MethodId,
    params1: KamParams,
    params2: KamParams,
) -> Result<Propagator, CoreError> {
    match method {
        MethodId::Dyson1 => Ok(baseline_propagator(problem, BaselineKind::Dyson1)),
        MethodId::Dyson2 => Ok(baseline_propagator(problem, BaselineKind::Dyson2)),
        MethodId::Magnus1 => Ok(baseline_propagator(problem, BaselineKind::Magnus1)),
        MethodId::Magnus2 => Ok(baseline_propagator(problem, BaselineKind::Magnus2)),
        MethodId::Kam1 => kam_approximant(problem, &[params1], 1),
        MethodId::Kam2 => kam_approximant(problem, &[params1, params2], 2),
    }
}

/// First figure: the first-iteration error against the free time `t1`,
/// alongside the constant first-order Dyson/Magnus errors and the
/// eigenvalue objective.
pub fn cmd_fig1(config: &ExperimentConfig) -> CmdResult {
    ensure_out_dir(config)?;
    let problem = config.problem()?;
    let (lo, hi) = config.scan_range();
    let points = config.scan_points;
    let step = (hi - lo) / (points - 1) as f64;
    let (t_start, t_end) = (config.pulse_start, config.pulse_end);

    // At epsilon = 0 every method is exact; errors are reported as zero and
    // the log columns stay empty.
    let degenerate = problem.epsilon() == 0.0;
    let (dyson1_log, magnus1_log, reference) = if degenerate {
        (None, None, None)
    } else {
        let reference = reference_for_problem(&problem, config.ode_tol)?;
        let dyson = delta_error(
            &baseline_propagator(&problem, BaselineKind::Dyson1),
            &reference,
            t_start,
            t_end,
        )?;
        let magnus = delta_error(
            &baseline_propagator(&problem, BaselineKind::Magnus1),
            &reference,
            t_start,
            t_end,
        )?;
        (log10_cell(dyson.delta), log10_cell(magnus.delta), Some(reference))
    };

    let mut rows = Vec::with_capacity(points);
    let mut error_series = vec![Vec::new(), Vec::new(), Vec::new()];
    let mut lambda_series = Vec::new();
    for i in 0..points {
        let t1 = lo + i as f64 * step;
        let params = config.params1(t1).with_t_free(t1);
        let (kam_log, lambda_cell) = if degenerate {
            (None, Some(0.0))
        } else {
            let reference = reference.as_ref().expect("reference exists");
            match fig1_point(&problem, &params, reference, t_start, t_end) {
                Ok((delta, lambda)) => (log10_cell(delta), Some(lambda)),
                Err(err) => {
                    eprintln!("warning: t1 = {t1}: {err}");
                    (None, None)
                }
            }
        };
        if let Some(v) = dyson1_log {
            error_series[0].push((t1, v));
        }
        if let Some(v) = magnus1_log {
            error_series[1].push((t1, v));
        }
        if let Some(v) = kam_log {
            error_series[2].push((t1, v));
        }
        if let Some(l) = lambda_cell.and_then(log10_cell) {
            lambda_series.push((t1, l));
        }
        rows.push(vec![
            fmt12(t1),
            fmt_opt(dyson1_log),
            fmt_opt(magnus1_log),
            fmt_opt(kam_log),
            lambda_cell.map(fmt12).unwrap_or_default(),
        ]);
    }

    let csv_path = config.out_dir.join("fig1.csv");
    write_csv(
        &csv_path,
        &[
            "t1",
            "log10_delta_dyson1",
            "log10_delta_magnus1",
            "log10_delta_kam1",
            "lambda2",
        ],
        &rows,
    )?;
    let mut written = vec![csv_path];

    if config.svg {
        let svg_path = config.out_dir.join("fig1.svg");
        let labels = ["dyson1", "magnus1", "kam1"];
        write_svg(
            &svg_path,
            &[
                Panel {
                    title: "first-iteration error against the free time".into(),
                    x_label: "t1".into(),
                    y_label: "log10 delta1".into(),
                    series: error_series
                        .into_iter()
                        .zip(labels)
                        .map(|(points, label)| Series {
                            label: label.into(),
                            points,
                        })
                        .collect(),
                },
                Panel {
                    title: "eigenvalue objective".into(),
                    x_label: "t1".into(),
                    y_label: "log10 lambda2".into(),
                    series: vec![Series {
                        label: "lambda2".into(),
                        points: lambda_series,
                    }],
                },
            ],
        )?;
        written.push(svg_path);
    }
    Ok(written)
}

fn fig1_point(
    problem: &SuddenProblem,
    params: &KamParams,
    reference: &Propagator,
    t_start: f64,
    t_end: f64,
) -> Result<(f64, f64), CoreError> {
    let chain = KamChain::build(problem, &[*params], 1)?;
    let lambda = chain.lambda_last();
    let report = delta_error(&chain.approximant(), reference, t_start, t_end)?;
    Ok((report.delta, lambda))
}

/// Second figure: the two-iteration error against the second free time `t2`
/// with `t1` held at its optimized value, alongside the constant
/// second-order Dyson/Magnus errors.
pub fn cmd_fig2(config: &ExperimentConfig) -> CmdResult {
    ensure_out_dir(config)?;
    let problem = config.problem()?;
    let (lo, hi) = config.scan_range();
    let points = config.scan_points;
    let step = (hi - lo) / (points - 1) as f64;
    let (t_start, t_end) = (config.pulse_start, config.pulse_end);
    let params1 = config.params1(DEFAULT_T1_STAR);
    warn_outside_support(config, &params1, "first-iteration");

    let degenerate = problem.epsilon() == 0.0;
    let (dyson2_log, magnus2_log, reference) = if degenerate {
        (None, None, None)
    } else {
        let reference = reference_for_problem(&problem, config.ode_tol)?;
        let dyson = delta_error(
            &baseline_propagator(&problem, BaselineKind::Dyson2),
            &reference,
            t_start,
            t_end,
        )?;
        let magnus = delta_error(
            &baseline_propagator(&problem, BaselineKind::Magnus2),
            &reference,
            t_start,
            t_end,
        )?;
        (log10_cell(dyson.delta), log10_cell(magnus.delta), Some(reference))
    };

    let mut rows = Vec::with_capacity(points);
    let mut series = vec![Vec::new(), Vec::new(), Vec::new()];
    for i in 0..points {
        let t2 = lo + i as f64 * step;
        let params2 = config.params2(t2).with_t_free(t2);
        let kam_log = if degenerate {
            None
        } else {
            let reference = reference.as_ref().expect("reference exists");
            match kam_approximant(&problem, &[params1, params2], 2)
                .and_then(|approx| delta_error(&approx, reference, t_start, t_end))
            {
                Ok(report) => log10_cell(report.delta),
                Err(err) => {
                    eprintln!("warning: t2 = {t2}: {err}");
                    None
                }
            }
        };
        if let Some(v) = dyson2_log {
            series[0].push((t2, v));
        }
        if let Some(v) = magnus2_log {
            series[1].push((t2, v));
        }
        if let Some(v) = kam_log {
            series[2].push((t2, v));
        }
        rows.push(vec![
            fmt12(t2),
            fmt_opt(dyson2_log),
            fmt_opt(magnus2_log),
            fmt_opt(kam_log),
        ]);
    }

    let csv_path = config.out_dir.join("fig2.csv");
    write_csv(
        &csv_path,
        &[
            "t2",
            "log10_delta_dyson2",
            "log10_delta_magnus2",
            "log10_delta_kam2",
        ],
        &rows,
    )?;
    let mut written = vec![csv_path];

    if config.svg {
        let svg_path = config.out_dir.join("fig2.svg");
        let labels = ["dyson2", "magnus2", "kam2"];
        write_svg(
            &svg_path,
            &[Panel {
                title: "second-iteration error against the second free time".into(),
                x_label: "t2".into(),
                y_label: "log10 delta2".into(),
                series: series
                    .into_iter()
                    .zip(labels)
                    .map(|(points, label)| Series {
                        label: label.into(),
                        points,
                    })
                    .collect(),
            }],
        )?;
        written.push(svg_path);
    }
    Ok(written)
}

/// Objective scan with golden-section refinement. Never evaluates the
/// reference integrator: only the eigenvalue objective is consulted.
pub fn cmd_optimize(config: &ExperimentConfig) -> CmdResult {
    ensure_out_dir(config)?;
    let problem = config.problem()?;
    let which = match config.scan_parameter {
        SweepParameter::T1 => ScanParameter::TFree(0),
        SweepParameter::T2 => ScanParameter::TFree(1),
        SweepParameter::T1Lower => ScanParameter::TLower(0),
        SweepParameter::T2Lower => ScanParameter::TLower(1),
        other => {
            return Err(ConfigError(format!(
                "optimize scans the iteration free times, not '{}'",
                other.label()
            ))
            .into())
        }
    };
    let template = [
        config.params1(DEFAULT_T1_STAR),
        config.params2(config.pulse_start),
    ];
    let (lo, hi) = config.scan_range();
    let scan = scan_lambda(&problem, &template, which, lo, hi, config.scan_points)?;

    for (value, error) in &scan.failures {
        eprintln!("warning: objective failed at {} = {value}: {error}", config.scan_parameter.label());
    }
    if scan.best.1 == 0.0 {
        eprintln!("warning: objective is identically zero over the scan (degenerate; epsilon = 0?)");
    }

    let rows: Vec<Vec<String>> = scan
        .grid
        .iter()
        .map(|&(x, lambda)| vec![fmt12(x), fmt12(lambda)])
        .collect();
    let csv_path = config.out_dir.join("optimize.csv");
    write_csv(&csv_path, &[config.scan_parameter.label(), "lambda"], &rows)?;
    let mut written = vec![csv_path];

    if !config.quiet {
        println!(
            "{}* = {} lambda* = {} evaluations = {}",
            config.scan_parameter.label(),
            fmt12(scan.refined.0),
            fmt12(scan.refined.1),
            scan.evaluations
        );
    }

    if config.svg {
        let svg_path = config.out_dir.join("optimize.svg");
        write_svg(
            &svg_path,
            &[Panel {
                title: "eigenvalue objective scan".into(),
                x_label: config.scan_parameter.label().into(),
                y_label: "lambda".into(),
                series: vec![Series {
                    label: "lambda".into(),
                    points: scan.grid.clone(),
                }],
            }],
        )?;
        written.push(svg_path);
    }
    Ok(written)
}

/// Error-versus-epsilon table with fitted log-log slopes per method.
///
/// The iteration free times default to the pulse start here (the generic,
/// non-optimized choice); set `t1`/`t2` in the config to pin others.
pub fn cmd_scaling(config: &ExperimentConfig) -> CmdResult {
    ensure_out_dir(config)?;
    let problem = config.problem()?;
    let params1 = config.params1(config.pulse_start);
    let params2 = config.params2(config.pulse_start);

    let mut rows = Vec::new();
    let mut slope_rows = Vec::new();
    let mut panels_series = Vec::new();
    for &method in &config.methods {
        let study = scaling_study(&problem, &config.epsilons, |p| {
            method_propagator(p, method, params1, params2)
        })?;
        let mut points = Vec::new();
        for point in &study.points {
            let log_delta = log10_cell(point.delta);
            if let Some(v) = log_delta {
                points.push((point.epsilon.log10(), v));
            }
            rows.push(vec![
                method.label().to_string(),
                fmt12(point.epsilon),
                fmt12(point.delta),
                fmt_opt(log_delta),
            ]);
        }
        slope_rows.push(vec![method.label().to_string(), fmt12(study.slope)]);
        panels_series.push(Series {
            label: method.label().into(),
            points,
        });
    }

    let csv_path = config.out_dir.join("scaling.csv");
    write_csv(&csv_path, &["method", "epsilon", "delta", "log10_delta"], &rows)?;
    let slopes_path = config.out_dir.join("slopes.csv");
    write_csv(&slopes_path, &["method", "slope"], &slope_rows)?;
    let mut written = vec![csv_path, slopes_path];

    if config.svg {
        let svg_path = config.out_dir.join("scaling.svg");
        write_svg(
            &svg_path,
            &[Panel {
                title: "error order in the sudden parameter".into(),
                x_label: "log10 epsilon".into(),
                y_label: "log10 delta".into(),
                series: panels_series,
            }],
        )?;
        written.push(svg_path);
    }
    Ok(written)
}

/// Generic sweep of one parameter against the reference error of the
/// selected methods.
pub fn cmd_sweep(config: &ExperimentConfig) -> CmdResult {
    ensure_out_dir(config)?;
    let (lo, hi) = config.scan_range();
    let points = config.scan_points;
    let step = (hi - lo) / (points - 1) as f64;
    let parameter = config.scan_parameter;
    let (t_start, t_end) = (config.pulse_start, config.pulse_end);

    // For time-parameter sweeps the problem (and so the reference) is fixed.
    let fixed_problem = config.problem()?;
    let fixed_reference = match parameter {
        SweepParameter::Epsilon | SweepParameter::Area => None,
        _ => Some(reference_for_problem(&fixed_problem, config.ode_tol)?),
    };

    let mut rows = Vec::new();
    let mut series: Vec<Series> = config
        .methods
        .iter()
        .map(|m| Series {
            label: m.label().into(),
            points: Vec::new(),
        })
        .collect();
    for i in 0..points {
        let value = lo + i as f64 * step;
        let mut params1 = config.params1(config.pulse_start);
        let mut params2 = config.params2(config.pulse_start);
        let problem;
        let reference;
        match parameter {
            SweepParameter::T1 => params1.t_free = value,
            SweepParameter::T2 => params2.t_free = value,
            SweepParameter::T1Lower => params1.t_lower = value,
            SweepParameter::T2Lower => params2.t_lower = value,
            SweepParameter::Epsilon | SweepParameter::Area => {}
        }
        match parameter {
            SweepParameter::Epsilon => {
                problem = fixed_problem
                    .with_epsilon(value)
                    .map_err(CommandError::from)?;
                reference = reference_for_problem(&problem, config.ode_tol)?;
            }
            SweepParameter::Area => {
                let mut scaled = config.clone();
                scaled.area = value;
                problem = scaled.problem()?;
                reference = reference_for_problem(&problem, config.ode_tol)?;
            }
            _ => {
                problem = fixed_problem.clone();
                reference = fixed_reference.clone().expect("fixed reference exists");
            }
        }
        for (series_idx, &method) in config.methods.iter().enumerate() {
            match method_propagator(&problem, method, params1, params2)
                .and_then(|approx| delta_error(&approx, &reference, t_start, t_end))
            {
                Ok(report) => {
                    let log_delta = log10_cell(report.delta);
                    if let Some(v) = log_delta {
                        series[series_idx].points.push((value, v));
                    }
                    rows.push(vec![
                        parameter.label().to_string(),
                        fmt12(value),
                        method.label().to_string(),
                        fmt12(report.delta),
                        fmt_opt(log_delta),
                    ]);
                }
                Err(err) => {
                    eprintln!("warning: {} = {value}, {}: {err}", parameter.label(), method.label());
                    rows.push(vec![
                        parameter.label().to_string(),
                        fmt12(value),
                        method.label().to_string(),
                        String::new(),
                        String::new(),
                    ]);
                }
            }
        }
    }

    let csv_path = config.out_dir.join("sweep.csv");
    write_csv(
        &csv_path,
        &["parameter", "value", "method", "delta", "log10_delta"],
        &rows,
    )?;
    let mut written = vec![csv_path];

    if config.svg {
        let svg_path = config.out_dir.join("sweep.svg");
        write_svg(
            &svg_path,
            &[Panel {
                title: format!("reference error against {}", parameter.label()),
                x_label: parameter.label().into(),
                y_label: "log10 delta".into(),
                series,
            }],
        )?;
        written.push(svg_path);
    }
    Ok(written)
}
