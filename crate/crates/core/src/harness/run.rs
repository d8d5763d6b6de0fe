//! Single-run driver: initial front `G = x1`, time marching, diagnostics, artifacts.

use std::fmt::Write as _;
use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::time::Instant;

use super::config::{RunConfig, EXTENSION_CAP};
use crate::error::{Error, Result};
use crate::flow::FlowSpec;
use crate::grid::{max_abs_du, AffineField, Grid};
use crate::metrics::{
    contour_csv, detect_quench, estimate_pointwise, estimate_window_average, extract_zero_level, DiagnosticsSeries,
    EstimateFlag, Method, QuenchReport, SpeedEstimate,
};
use crate::reinit::reinit_field;
use crate::snapshot::{fmt17, write_snapshot};
use crate::stepping::{Model, ModelConfig, Scheme, SimState, Stepper};

/// One line of a sweep table.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub model: Model,
    pub amplitude: f64,
    pub d: f64,
    pub grid: usize,
    pub scheme: Option<Scheme>,
    pub s_t: Option<f64>,
    pub method: Method,
    pub s_t_pointwise: Option<f64>,
    pub quenched: bool,
    pub quench_time: Option<f64>,
    pub period: Option<f64>,
    pub t_end: f64,
    pub steps: u64,
    pub runtime_s: f64,
    pub failure: Option<String>,
}

pub const SWEEP_HEADER: &str =
    "model,A,d,grid,scheme,s_T,method,s_T_pointwise,quenched,quench_time,period,t_end,steps,runtime_s,status";

impl SweepRow {
    pub fn failed(cfg: &RunConfig, reason: String) -> Self {
        SweepRow {
            model: cfg.model,
            amplitude: cfg.amplitude,
            d: cfg.d,
            grid: cfg.grid,
            scheme: None,
            s_t: None,
            method: Method::WindowAverage,
            s_t_pointwise: None,
            quenched: false,
            quench_time: None,
            period: None,
            t_end: 0.0,
            steps: 0,
            runtime_s: 0.0,
            failure: Some(reason),
        }
    }

    pub fn is_ok(&self) -> bool {
        self.failure.is_none()
    }

    pub fn to_csv_line(&self) -> String {
        let opt = |v: Option<f64>| v.map(fmt17).unwrap_or_default();
        let status = match &self.failure {
            None => "ok".to_string(),
            Some(r) => format!("\"failed: {}\"", r.replace('"', "'")),
        };
        format!(
            "{},{:?},{:?},{},{},{},{},{},{},{},{},{},{},{:.3},{}",
            self.model,
            self.amplitude,
            self.d,
            self.grid,
            self.scheme.map(|s| s.name()).unwrap_or(""),
            opt(self.s_t),
            self.method,
            opt(self.s_t_pointwise),
            self.quenched,
            opt(self.quench_time),
            opt(self.period),
            fmt17(self.t_end),
            self.steps,
            self.runtime_s,
            status
        )
    }
}

/// Everything a run produces.
#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub config: RunConfig,
    pub row: SweepRow,
    pub window: Option<SpeedEstimate>,
    pub pointwise: Option<SpeedEstimate>,
    pub quench: QuenchReport,
    pub series: DiagnosticsSeries,
    pub field: AffineField,
    pub time: f64,
    pub reinits: usize,
}

/// March `state` to `t_end`, reinitializing on the configured cadence.
fn advance(
    cfg: &RunConfig,
    stepper: &mut Stepper,
    state: &mut SimState,
    series: &mut DiagnosticsSeries,
    t_end: f64,
    reinits: &mut usize,
) -> Result<()> {
    let profile = cfg.reinit_profile();
    let pseudo = cfg.reinit_pseudo_cells * state.field.grid().hx();
    let tiny = 1e-9 * stepper.dt();
    while state.time < t_end - tiny {
        let dt = stepper.dt().min(t_end - state.time);
        stepper.step_by(state, dt)?;
        if pseudo > 0.0 {
            let cadence = cfg.reinit_every > 0 && state.steps % cfg.reinit_every as u64 == 0;
            let triggered = cfg.reinit_trigger.is_finite() && max_abs_du(&state.field) > cfg.reinit_trigger;
            if cadence || triggered {
                let (next, _) = reinit_field(&state.field, &profile, pseudo)?;
                series.note_reinit(&state.field, &next);
                state.field = next;
                *reinits += 1;
            }
        }
        series.record(state.time, &state.field)?;
    }
    Ok(())
}

/// Whether an adaptive run should be extended: the flow is on, the front is
/// moving and no period of `A'(t)` was found.
fn wants_more(cfg: &RunConfig, series: &DiagnosticsSeries) -> bool {
    if cfg.amplitude == 0.0 {
        return false;
    }
    if detect_quench(series, cfg.s_l, cfg.quench_threshold, cfg.quench_hold).quenched {
        return false;
    }
    match estimate_window_average(series) {
        Ok(e) => e.has_flag(EstimateFlag::NoPeriodDetected),
        Err(_) => true,
    }
}

/// Run without writing artifacts. Configuration errors are returned; integration
/// failures are recorded in the outcome together with the partial series.
pub fn simulate(cfg: &RunConfig) -> Result<RunOutcome> {
    cfg.validate()?;
    let clock = Instant::now();
    let grid = Grid::square(cfg.grid)?;
    let flow = FlowSpec::cellular(cfg.amplitude);
    let mc = ModelConfig { model: cfg.model, s_l: cfg.s_l, d: cfg.d, scheme: cfg.scheme };
    let mut stepper = Stepper::new(&mc, &flow, grid, [1.0, 0.0], cfg.cfl_safety)?;
    let mut state = SimState::new(AffineField::planar(grid));
    let mut series = DiagnosticsSeries::new(grid.nearest_node(cfg.probe));
    series.record(0.0, &state.field)?;

    let initial = cfg.initial_t_max();
    let cap = if cfg.t_max.is_none() { EXTENSION_CAP * initial } else { initial };
    let mut t_end = initial;
    let mut reinits = 0;
    let mut failure = None;
    loop {
        if let Err(e) = advance(cfg, &mut stepper, &mut state, &mut series, t_end, &mut reinits) {
            failure = Some(e.to_string());
            break;
        }
        if t_end >= cap || !wants_more(cfg, &series) {
            break;
        }
        t_end = (t_end + 0.5 * initial).min(cap);
    }

    let quench = detect_quench(&series, cfg.s_l, cfg.quench_threshold, cfg.quench_hold);
    let window = estimate_window_average(&series).map(|e| e.with_quench(quench));
    let pointwise = estimate_pointwise(&series).map(|e| e.with_quench(quench));
    if failure.is_none() {
        if let Err(e) = &window {
            failure = Some(e.to_string());
        }
    }
    let window = window.ok();
    let pointwise = pointwise.ok();
    let row = SweepRow {
        model: cfg.model,
        amplitude: cfg.amplitude,
        d: cfg.d,
        grid: cfg.grid,
        scheme: Some(stepper.scheme()),
        s_t: window.as_ref().map(|e| e.s_t),
        method: Method::WindowAverage,
        s_t_pointwise: pointwise.as_ref().map(|e| e.s_t),
        quenched: quench.quenched,
        quench_time: quench.quench_time,
        period: window.as_ref().and_then(|e| e.period),
        t_end: state.time,
        steps: state.steps,
        runtime_s: clock.elapsed().as_secs_f64(),
        failure,
    };
    Ok(RunOutcome {
        config: cfg.clone(),
        row,
        window,
        pointwise,
        quench,
        series,
        time: state.time,
        field: state.field,
        reinits,
    })
}

/// [`simulate`] and write the artifacts under `outdir/<run name>/`.
pub fn run_single(cfg: &RunConfig) -> Result<RunOutcome> {
    let out = simulate(cfg)?;
    write_artifacts(&out, &run_dir(cfg))?;
    Ok(out)
}

pub fn run_dir(cfg: &RunConfig) -> PathBuf {
    cfg.outdir.join(cfg.run_name())
}

/// `config.txt`, `series.csv`, `final.field`, `contour.csv`, `estimate.txt`.
pub fn write_artifacts(out: &RunOutcome, dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("config.txt"), out.config.to_text())?;
    fs::write(dir.join("series.csv"), out.series.to_csv())?;
    write_snapshot(BufWriter::new(fs::File::create(dir.join("final.field"))?), &out.field, out.time)?;
    fs::write(dir.join("estimate.txt"), estimate_text(out))?;
    let (a, b) = front_strip(&out.field);
    let contour = match extract_zero_level(&out.field, a, b) {
        Ok(lines) => contour_csv(&lines),
        Err(e) => format!("# contour skipped: {e}\n{}", contour_csv(&[])),
    };
    fs::write(dir.join("contour.csv"), contour)?;
    Ok(())
}

/// Smallest strip of whole periods containing the front `x1 = −u`.
pub fn front_strip(f: &AffineField) -> (i32, i32) {
    let (lo, hi) = f
        .u()
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &v| (l.min(v), h.max(v)));
    let a = (-hi).floor().max(i32::MIN as f64 / 2.0) as i32;
    let b = ((-lo).ceil().min(i32::MAX as f64 / 2.0) as i32).max(a + 1);
    (a, b)
}

pub fn estimate_text(out: &RunOutcome) -> String {
    let mut s = String::new();
    let status = out.row.failure.as_deref().map_or("ok".to_string(), |r| format!("failed: {r}"));
    let _ = writeln!(s, "status = {status}");
    let _ = writeln!(s, "scheme = {}", out.row.scheme.map_or("", |sc| sc.name()));
    let _ = writeln!(s, "t_end = {}", fmt17(out.time));
    let _ = writeln!(s, "steps = {}", out.row.steps);
    let _ = writeln!(s, "reinits = {}", out.reinits);
    for e in [&out.window, &out.pointwise].into_iter().flatten() {
        let _ = writeln!(s, "\n[{}]", e.method);
        s += &e.to_text();
    }
    s
}

/// Reads `s_T` for `method` back from an `estimate.txt`.
pub fn parse_estimate(text: &str, method: Method) -> Result<f64> {
    let header = format!("[{method}]");
    let mut inside = false;
    for line in text.lines() {
        let line = line.trim();
        if line.starts_with('[') {
            inside = line == header;
        } else if inside {
            if let Some(v) = line.strip_prefix("s_T = ") {
                return v.parse().map_err(|_| Error::Parse(format!("bad s_T value {v:?}")));
            }
        }
    }
    Err(Error::Parse(format!("no {header} section")))
}
