//! Parameter sweeps over `(model, A, d)` and the corrector table.

use std::fs;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use super::config::RunConfig;
use super::run::{run_single, SweepRow, SWEEP_HEADER};
use crate::corrector::{contraction_bound, corrector_iterate, CorrectorParams};
use crate::error::Result;
use crate::flow::{FlowSamples, FlowSpec};
use crate::grid::Grid;
use crate::snapshot::fmt17;
use crate::stepping::Model;

/// Apply `f` to every item on up to `workers` threads; results keep input order.
pub fn parallel_map<T: Sync, R: Send>(items: &[T], workers: usize, f: impl Fn(&T) -> R + Sync) -> Vec<R> {
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<R>>> = Mutex::new((0..items.len()).map(|_| None).collect());
    std::thread::scope(|s| {
        for _ in 0..workers.clamp(1, items.len().max(1)) {
            s.spawn(|| loop {
                let k = next.fetch_add(1, Ordering::Relaxed);
                if k >= items.len() {
                    break;
                }
                let r = f(&items[k]);
                slots.lock().unwrap()[k] = Some(r);
            });
        }
    });
    slots.into_inner().unwrap().into_iter().map(|r| r.expect("worker result")).collect()
}

pub fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct SweepTable {
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    pub fn to_csv(&self) -> String {
        let mut s = format!("{SWEEP_HEADER}\n");
        for r in &self.rows {
            s += &r.to_csv_line();
            s.push('\n');
        }
        s
    }

    pub fn failures(&self) -> usize {
        self.rows.iter().filter(|r| !r.is_ok()).count()
    }
}

fn model_rank(m: Model) -> usize {
    Model::ALL.iter().position(|&x| x == m).unwrap_or(usize::MAX)
}

/// Every combination of `models × amplitudes × ds` on top of `base`, each run
/// independently; rows sorted by `(model, A, d)`.
pub fn run_sweep(base: &RunConfig, amplitudes: &[f64], ds: &[f64], models: &[Model], workers: usize) -> SweepTable {
    let mut configs = Vec::new();
    for &model in models {
        for &amplitude in amplitudes {
            for &d in ds {
                configs.push(RunConfig { model, amplitude, d, ..base.clone() });
            }
        }
    }
    let mut rows = parallel_map(&configs, workers, |cfg| match run_single(cfg) {
        Ok(out) => out.row,
        Err(e) => SweepRow::failed(cfg, e.to_string()),
    });
    rows.sort_by(|a, b| {
        model_rank(a.model)
            .cmp(&model_rank(b.model))
            .then(a.amplitude.total_cmp(&b.amplitude))
            .then(a.d.total_cmp(&b.d))
    });
    SweepTable { rows }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CorrectorRow {
    pub amplitude: f64,
    pub d: f64,
    pub grid: usize,
    pub h_bar: Option<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub max_ratio: Option<f64>,
    pub bound: f64,
    pub regime: &'static str,
    pub linear_iterations: usize,
    pub runtime_s: f64,
    pub failure: Option<String>,
}

pub const CORRECTOR_HEADER: &str = "A,d,grid,H_bar,iterations,converged,max_ratio,bound,regime,linear_iterations,runtime_s,status";

impl CorrectorRow {
    pub fn to_csv_line(&self) -> String {
        let opt = |v: Option<f64>| v.map(fmt17).unwrap_or_default();
        let status = match &self.failure {
            None => "ok".to_string(),
            Some(r) => format!("\"failed: {}\"", r.replace('"', "'")),
        };
        format!(
            "{:?},{:?},{},{},{},{},{},{},{},{},{:.3},{}",
            self.amplitude,
            self.d,
            self.grid,
            opt(self.h_bar),
            self.iterations,
            self.converged,
            opt(self.max_ratio),
            fmt17(self.bound),
            self.regime,
            self.linear_iterations,
            self.runtime_s,
            status
        )
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct CorrectorTable {
    pub rows: Vec<CorrectorRow>,
}

impl CorrectorTable {
    pub fn to_csv(&self) -> String {
        let mut s = format!("{CORRECTOR_HEADER}\n");
        for r in &self.rows {
            s += &r.to_csv_line();
            s.push('\n');
        }
        s
    }

    /// Rows that failed outright; non-convergence is not a failure.
    pub fn failures(&self) -> usize {
        self.rows.iter().filter(|r| r.failure.is_some()).count()
    }
}

/// Corrector iteration for every `(A, d)` on the grid and `s_l` of `base`.
///
/// Writes `corrector-A<a>-d<d>-n<grid>.csv` per pair and `corrector_summary.csv`
/// into `base.outdir`.
pub fn run_corrector(base: &RunConfig, amplitudes: &[f64], ds: &[f64], workers: usize) -> Result<CorrectorTable> {
    fs::create_dir_all(&base.outdir)?;
    let pairs: Vec<(f64, f64)> = amplitudes.iter().flat_map(|&a| ds.iter().map(move |&d| (a, d))).collect();
    let rows = parallel_map(&pairs, workers, |&(a, d)| {
        let clock = Instant::now();
        let mut row = CorrectorRow {
            amplitude: a,
            d,
            grid: base.grid,
            h_bar: None,
            iterations: 0,
            converged: false,
            max_ratio: None,
            bound: contraction_bound(d),
            regime: if crate::corrector::in_guaranteed_regime(d) { "guaranteed" } else { "outside guaranteed regime" },
            linear_iterations: 0,
            runtime_s: 0.0,
            failure: None,
        };
        let result = Grid::square(base.grid).and_then(|g| {
            let flow = FlowSamples::new(&FlowSpec::cellular(a), g);
            corrector_iterate(g, &flow, &CorrectorParams::new(d, base.s_l), None)
        });
        match result {
            Ok((_, report)) => {
                let name = format!("corrector-A{a}-d{d}-n{}.csv", base.grid);
                if let Err(e) = fs::write(base.outdir.join(name), report.to_csv()) {
                    row.failure = Some(e.to_string());
                }
                row.h_bar = Some(report.h_bar);
                row.iterations = report.records.len();
                row.converged = report.converged;
                row.max_ratio = report.max_ratio_after(1);
                row.regime = report.regime_label();
                row.linear_iterations = report.linear_iterations;
            }
            Err(e) => row.failure = Some(e.to_string()),
        }
        row.runtime_s = clock.elapsed().as_secs_f64();
        row
    });
    let table = CorrectorTable { rows };
    fs::write(base.outdir.join("corrector_summary.csv"), table.to_csv())?;
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parallel_map_keeps_order() {
        let items: Vec<usize> = (0..37).collect();
        assert_eq!(parallel_map(&items, 4, |k| k * k), items.iter().map(|k| k * k).collect::<Vec<_>>());
        assert!(parallel_map(&Vec::<usize>::new(), 3, |k| *k).is_empty());
    }

    #[test]
    fn empty_sweep_is_empty() {
        let t = run_sweep(&RunConfig::default(), &[], &[0.1], &[Model::Inviscid], 2);
        assert!(t.rows.is_empty());
        assert_eq!(t.to_csv(), format!("{SWEEP_HEADER}\n"));
    }

    #[test]
    fn sweep_rows_sorted_and_failures_recorded() {
        let dir = tempfile::tempdir().unwrap();
        let base = RunConfig { grid: 16, t_max: Some(0.5), outdir: dir.path().to_path_buf(), ..Default::default() };
        // d < 0 is a configuration failure for that row only
        let t = run_sweep(&base, &[1.0, 0.0], &[0.1, -1.0], &[Model::Viscous, Model::Inviscid], 3);
        assert_eq!(t.rows.len(), 8);
        assert_eq!(t.failures(), 4);
        let keys: Vec<(Model, f64, f64)> = t.rows.iter().map(|r| (r.model, r.amplitude, r.d)).collect();
        assert_eq!(keys[0], (Model::Inviscid, 0.0, -1.0));
        assert_eq!(keys[7], (Model::Viscous, 1.0, 0.1));
        assert_eq!(t.to_csv().lines().count(), 9);
    }

    #[test]
    fn corrector_table_zero_flow() {
        let dir = tempfile::tempdir().unwrap();
        let base = RunConfig { grid: 16, outdir: dir.path().to_path_buf(), ..Default::default() };
        let t = run_corrector(&base, &[0.0], &[1.0, 0.2, 0.0], 2).unwrap();
        assert_eq!(t.rows.len(), 3);
        assert!((t.rows[0].h_bar.unwrap() - 1.0).abs() < 1e-12);
        assert!(t.rows[0].converged && t.rows[0].iterations <= 2);
        assert_eq!(t.rows[1].regime, "outside guaranteed regime");
        assert!(t.rows[2].failure.is_some());
        assert!(dir.path().join("corrector_summary.csv").exists());
        assert!(dir.path().join("corrector-A0-d1-n16.csv").exists());
    }
}
