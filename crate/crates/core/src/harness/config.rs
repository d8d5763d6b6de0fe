//! Flat `key = value` run configuration.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::stepping::{Model, SchemeChoice};

pub const DEFAULT_GRID: usize = 200;
pub const MAX_GRID: usize = 400;
/// Hard cap on adaptive extension, as a multiple of the initial `t_max`.
pub const EXTENSION_CAP: f64 = 3.0;

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub model: Model,
    /// Cellular flow amplitude `A`.
    pub amplitude: f64,
    pub d: f64,
    pub s_l: f64,
    pub grid: usize,
    /// `None` selects the adaptive policy, see [`RunConfig::initial_t_max`].
    pub t_max: Option<f64>,
    pub cfl_safety: f64,
    pub scheme: SchemeChoice,
    /// Reinitialize every this many steps; 0 disables the cadence.
    pub reinit_every: usize,
    /// Reinitialize early once `max |Du|` exceeds this (`inf` disables).
    pub reinit_trigger: f64,
    /// Pseudo-time per reinitialization, in grid spacings.
    pub reinit_pseudo_cells: f64,
    pub reinit_eps: f64,
    pub reinit_iters: usize,
    pub quench_threshold: f64,
    pub quench_hold: f64,
    pub probe: [f64; 2],
    pub outdir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            model: Model::Inviscid,
            amplitude: 0.0,
            d: 0.0,
            s_l: 1.0,
            grid: DEFAULT_GRID,
            t_max: None,
            cfl_safety: 0.5,
            scheme: SchemeChoice::Auto,
            reinit_every: 0,
            reinit_trigger: f64::INFINITY,
            reinit_pseudo_cells: 5.0,
            reinit_eps: 0.1,
            reinit_iters: 5,
            quench_threshold: crate::metrics::DEFAULT_THRESHOLD,
            quench_hold: crate::metrics::DEFAULT_HOLD_TIME,
            probe: [0.0, 0.0],
            outdir: PathBuf::from("out"),
        }
    }
}

pub const KEYS: [&str; 18] = [
    "model",
    "amplitude",
    "d",
    "s_l",
    "grid",
    "t_max",
    "cfl_safety",
    "scheme",
    "reinit_every",
    "reinit_trigger",
    "reinit_pseudo_cells",
    "reinit_eps",
    "reinit_iters",
    "quench_threshold",
    "quench_hold",
    "probe_x",
    "probe_y",
    "outdir",
];

fn num<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("{key}: cannot parse {value:?}")))
}

impl RunConfig {
    /// Parse `key = value` lines over the defaults. `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = RunConfig::default();
        cfg.apply_text(text)?;
        Ok(cfg)
    }

    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", n + 1)))?;
            self.set(k.trim(), v.trim())?;
        }
        Ok(())
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "model" => self.model = value.parse()?,
            "amplitude" | "A" => self.amplitude = num(key, value)?,
            "d" => self.d = num(key, value)?,
            "s_l" | "s_L" => self.s_l = num(key, value)?,
            "grid" => self.grid = num(key, value)?,
            "t_max" => self.t_max = if value == "auto" { None } else { Some(num(key, value)?) },
            "cfl_safety" => self.cfl_safety = num(key, value)?,
            "scheme" => self.scheme = value.parse()?,
            "reinit_every" => self.reinit_every = num(key, value)?,
            "reinit_trigger" => self.reinit_trigger = num(key, value)?,
            "reinit_pseudo_cells" => self.reinit_pseudo_cells = num(key, value)?,
            "reinit_eps" => self.reinit_eps = num(key, value)?,
            "reinit_iters" => self.reinit_iters = num(key, value)?,
            "quench_threshold" => self.quench_threshold = num(key, value)?,
            "quench_hold" => self.quench_hold = num(key, value)?,
            "probe_x" => self.probe[0] = num(key, value)?,
            "probe_y" => self.probe[1] = num(key, value)?,
            "outdir" => self.outdir = PathBuf::from(value),
            _ => return Err(Error::Config(format!("unknown key {key:?}"))),
        }
        Ok(())
    }

    /// Every key, one per line; [`RunConfig::parse`] restores an equal config.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "model = {}", self.model);
        let _ = writeln!(s, "amplitude = {:?}", self.amplitude);
        let _ = writeln!(s, "d = {:?}", self.d);
        let _ = writeln!(s, "s_l = {:?}", self.s_l);
        let _ = writeln!(s, "grid = {}", self.grid);
        match self.t_max {
            Some(t) => _ = writeln!(s, "t_max = {t:?}"),
            None => _ = writeln!(s, "t_max = auto"),
        }
        let _ = writeln!(s, "cfl_safety = {:?}", self.cfl_safety);
        let _ = writeln!(s, "scheme = {}", self.scheme);
        let _ = writeln!(s, "reinit_every = {}", self.reinit_every);
        let _ = writeln!(s, "reinit_trigger = {:?}", self.reinit_trigger);
        let _ = writeln!(s, "reinit_pseudo_cells = {:?}", self.reinit_pseudo_cells);
        let _ = writeln!(s, "reinit_eps = {:?}", self.reinit_eps);
        let _ = writeln!(s, "reinit_iters = {}", self.reinit_iters);
        let _ = writeln!(s, "quench_threshold = {:?}", self.quench_threshold);
        let _ = writeln!(s, "quench_hold = {:?}", self.quench_hold);
        let _ = writeln!(s, "probe_x = {:?}", self.probe[0]);
        let _ = writeln!(s, "probe_y = {:?}", self.probe[1]);
        let _ = writeln!(s, "outdir = {}", self.outdir.display());
        s
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::Config(what.to_string()));
        if !(self.amplitude.is_finite() && self.amplitude >= 0.0) {
            return bad("amplitude must be finite and nonnegative");
        }
        if !(self.s_l.is_finite() && self.s_l > 0.0) {
            return bad("s_l must be positive");
        }
        if !(self.d.is_finite() && self.d >= 0.0) {
            return bad("d must be finite and nonnegative");
        }
        if self.grid < 10 || self.grid > MAX_GRID {
            return Err(Error::Config(format!("grid must lie in [10, {MAX_GRID}], got {}", self.grid)));
        }
        if let Some(t) = self.t_max {
            if !(t.is_finite() && t > 0.0) {
                return bad("t_max must be positive");
            }
        }
        if !(self.cfl_safety > 0.0 && self.cfl_safety <= 1.0) {
            return bad("cfl_safety must lie in (0, 1]");
        }
        if !(self.reinit_trigger > 0.0) {
            return bad("reinit_trigger must be positive");
        }
        if !(self.reinit_pseudo_cells >= 0.0 && self.reinit_pseudo_cells.is_finite()) {
            return bad("reinit_pseudo_cells must be finite and nonnegative");
        }
        if !(self.quench_threshold >= 0.0 && self.quench_hold > 0.0) {
            return bad("quench threshold must be nonnegative and hold time positive");
        }
        if !(self.probe[0].is_finite() && self.probe[1].is_finite()) {
            return bad("probe must be finite");
        }
        let mc = crate::stepping::ModelConfig { model: self.model, s_l: self.s_l, d: self.d, scheme: self.scheme };
        mc.resolve_scheme(crate::grid::Grid::square(self.grid)?)?;
        self.reinit_profile().validate()
    }

    pub fn reinit_profile(&self) -> crate::reinit::ReinitProfile {
        crate::reinit::ReinitProfile { eps_band: self.reinit_eps, smooth_iters: self.reinit_iters, ..Default::default() }
    }

    /// `t_max` if set, else `max(3, 30 / (1 + A))`.
    pub fn initial_t_max(&self) -> f64 {
        self.t_max.unwrap_or_else(|| (30.0 / (1.0 + self.amplitude)).max(3.0))
    }

    /// Run directory name `run-<model>-A<val>-d<val>-n<grid>`.
    pub fn run_name(&self) -> String {
        format!("run-{}-A{}-d{}-n{}", self.model, self.amplitude, self.d, self.grid)
    }
}
