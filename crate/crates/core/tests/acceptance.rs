//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Flow runs are cached under `target/acceptance` (or `$GFRONT_ACCEPTANCE_DIR`)
//! and reused when the stored `config.txt` matches. Arguments after `--`:
//! `--only 3,5` restricts the criteria, `--fresh` ignores the cache, `--strict`
//! exits nonzero when a criterion fails.

use std::collections::HashMap;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use gfront::corrector::contraction_bound;
use gfront::harness::checks::{hamiltonian_scan, squeeze, steep_plane, stretch_cases_2d, stretch_cases_3d, weno_order_study};
use gfront::harness::{run_corrector, run_dir, run_single, RunConfig};
use gfront::hj::WenoOrder;
use gfront::metrics::{
    detect_quench, estimate_pointwise, estimate_window_average, DiagnosticsSeries, QuenchReport, SpeedEstimate,
};
use gfront::{Grid, Model, SchemeChoice};

/// What a criterion needs from one flow run.
#[derive(Clone, Debug)]
struct Run {
    window: SpeedEstimate,
    pointwise: SpeedEstimate,
    quench: QuenchReport,
    runtime: f64,
    t_end: f64,
}

impl Run {
    fn s_t(&self) -> f64 {
        self.window.s_t
    }
}

struct Cache {
    dir: PathBuf,
    fresh: bool,
    memo: HashMap<String, Result<Run, String>>,
}

impl Cache {
    fn get(&mut self, cfg: RunConfig) -> Result<Run, String> {
        let cfg = RunConfig { outdir: self.dir.clone(), ..cfg };
        let key = cfg.to_text();
        if let Some(r) = self.memo.get(&key) {
            return r.clone();
        }
        let r = self.load(&cfg).or_else(|| Some(self.compute(&cfg))).unwrap();
        self.memo.insert(key, r.clone());
        r
    }

    fn load(&self, cfg: &RunConfig) -> Option<Result<Run, String>> {
        if self.fresh {
            return None;
        }
        let dir = run_dir(cfg);
        if fs::read_to_string(dir.join("config.txt")).ok()? != cfg.to_text() {
            return None;
        }
        let runtime: f64 = fs::read_to_string(dir.join("runtime.txt")).ok()?.trim().parse().ok()?;
        let estimate = fs::read_to_string(dir.join("estimate.txt")).ok()?;
        if let Some(status) = estimate.lines().next().and_then(|l| l.strip_prefix("status = ")) {
            if status != "ok" {
                return Some(Err(status.to_string()));
            }
        }
        let text = fs::read_to_string(dir.join("series.csv")).ok()?;
        Some(summarize(cfg, &text, runtime))
    }

    fn compute(&self, cfg: &RunConfig) -> Result<Run, String> {
        eprintln!("  running {} ...", cfg.run_name());
        let clock = Instant::now();
        let out = run_single(cfg).map_err(|e| e.to_string())?;
        let runtime = clock.elapsed().as_secs_f64();
        let _ = fs::write(run_dir(cfg).join("runtime.txt"), format!("{runtime}\n"));
        eprintln!("  done in {runtime:.1} s");
        if let Some(f) = out.row.failure {
            return Err(f);
        }
        summarize(cfg, &out.series.to_csv(), runtime)
    }
}

fn summarize(cfg: &RunConfig, series_csv: &str, runtime: f64) -> Result<Run, String> {
    let grid = Grid::square(cfg.grid).map_err(|e| e.to_string())?;
    let series = DiagnosticsSeries::from_csv(series_csv, grid.nearest_node(cfg.probe)).map_err(|e| e.to_string())?;
    let quench = detect_quench(&series, cfg.s_l, cfg.quench_threshold, cfg.quench_hold);
    let window = estimate_window_average(&series).map_err(|e| e.to_string())?.with_quench(quench);
    let pointwise = estimate_pointwise(&series).map_err(|e| e.to_string())?.with_quench(quench);
    let t_end = series.times.last().copied().unwrap_or(0.0);
    Ok(Run { window, pointwise, quench, runtime, t_end })
}

fn cfg(model: Model, a: f64, d: f64, grid: usize) -> RunConfig {
    RunConfig { model, amplitude: a, d, grid, ..Default::default() }
}

type Verdict = Result<(bool, String), String>;

fn criterion_1(c: &mut Cache) -> Verdict {
    let mut ok = true;
    let mut parts = Vec::new();
    for model in Model::ALL {
        let d = if model == Model::Inviscid { 0.0 } else { 0.1 };
        let r = c.get(RunConfig { t_max: Some(3.0), ..cfg(model, 0.0, d, 100) })?;
        let good = (r.s_t() - 1.0).abs() <= 0.01 && (r.pointwise.s_t - 1.0).abs() <= 0.01 && r.runtime <= 30.0;
        ok &= good;
        parts.push(format!("{model}: {:.4}/{:.4} in {:.1}s", r.s_t(), r.pointwise.s_t, r.runtime));
    }
    Ok((ok, parts.join("; ")))
}

fn criterion_2(c: &mut Cache) -> Verdict {
    let mut ok = true;
    let mut total = 0.0;
    let mut parts = Vec::new();
    for a in [4.0, 8.0, 16.0] {
        let inv = c.get(cfg(Model::Inviscid, a, 0.1, 200))?;
        let cur = c.get(cfg(Model::Curvature, a, 0.1, 200))?;
        let vis = c.get(cfg(Model::Viscous, a, 0.1, 200))?;
        total += inv.runtime + cur.runtime + vis.runtime;
        ok &= vis.s_t() <= 1.01 * cur.s_t() && cur.s_t() <= 1.01 * inv.s_t();
        parts.push(format!("A={a}: vis {:.4} cur {:.4} inv {:.4}", vis.s_t(), cur.s_t(), inv.s_t()));
    }
    ok &= total <= 1800.0;
    parts.push(format!("runtime {total:.0}s"));
    Ok((ok, parts.join("; ")))
}

fn criterion_3(c: &mut Cache) -> Verdict {
    let mut ok = true;
    let mut prev: Option<f64> = None;
    let mut parts = Vec::new();
    for a in [0.0, 2.0, 4.0, 8.0, 16.0, 32.0] {
        let s = c.get(cfg(Model::Inviscid, a, 0.1, 200))?.s_t();
        if let Some(p) = prev {
            ok &= s >= 1.02 * p;
        }
        prev = Some(s);
        parts.push(format!("A={a}: {s:.4}"));
    }
    Ok((ok, parts.join(", ")))
}

fn criterion_4(c: &mut Cache) -> Verdict {
    let ratio = |c: &mut Cache, m: Model| -> Result<f64, String> {
        Ok(c.get(cfg(m, 32.0, 0.1, 200))?.s_t() / c.get(cfg(m, 8.0, 0.1, 200))?.s_t())
    };
    let vis = ratio(c, Model::Viscous)?;
    let inv = ratio(c, Model::Inviscid)?;
    Ok((vis < inv, format!("s_T(32)/s_T(8): viscous {vis:.4}, inviscid {inv:.4}")))
}

fn criterion_5(c: &mut Cache) -> Verdict {
    let mut ok = true;
    let mut prev: Option<f64> = None;
    let mut parts = Vec::new();
    for d in [0.1, 0.2, 1.0] {
        let s = c.get(cfg(Model::Curvature, 8.0, d, 200))?.s_t();
        if let Some(p) = prev {
            ok &= s <= 1.01 * p;
        }
        prev = Some(s);
        parts.push(format!("d={d}: {s:.4}"));
    }
    Ok((ok, parts.join(", ")))
}

fn criterion_6(c: &mut Cache) -> Verdict {
    let q = c.get(RunConfig { t_max: Some(2.0), ..cfg(Model::Strain, 32.0, 0.02, 200) })?;
    let p = c.get(RunConfig { t_max: Some(1.5), ..cfg(Model::Strain, 32.0, 0.01, 200) })?;
    let tq = q.quench.quench_time;
    let ok = q.quench.quenched && tq.is_some_and(|t| (0.4..=1.0).contains(&t)) && !p.quench.quenched && p.t_end >= 1.5 - 1e-9;
    Ok((
        ok,
        format!(
            "d=0.02: quenched {} at {:?} (s_T {:.4}); d=0.01: quenched {} at {:?} (s_T {:.4}, t_end {:.3})",
            q.quench.quenched,
            tq,
            q.s_t(),
            p.quench.quenched,
            p.quench.quench_time,
            p.s_t(),
            p.t_end
        ),
    ))
}

fn criterion_7(c: &mut Cache) -> Verdict {
    let amps = [1.0, 2.0, 4.0, 8.0, 16.0, 32.0];
    let mut s = Vec::new();
    for a in amps {
        s.push(c.get(cfg(Model::Strain, a, 0.02, 100))?.s_t());
    }
    let peak = (0..s.len()).max_by(|&i, &j| s[i].total_cmp(&s[j])).unwrap_or(0);
    let ok = peak > 0 && peak + 1 < s.len() && s[s.len() - 1] < 0.05;
    let shown: Vec<String> = amps.iter().zip(&s).map(|(a, v)| format!("A={a}: {v:.4}")).collect();
    Ok((ok, shown.join(", ")))
}

fn criterion_8(c: &mut Cache) -> Verdict {
    let base = RunConfig { outdir: c.dir.join("corrector"), ..cfg(Model::Viscous, 4.0, 1.0, 200) };
    let table = run_corrector(&base, &[4.0], &[1.0], 1).map_err(|e| e.to_string())?;
    let row = &table.rows[0];
    let h_bar = row.h_bar.ok_or("corrector failed")?;
    let ratio = row.max_ratio.unwrap_or(f64::INFINITY);
    let vis = c.get(cfg(Model::Viscous, 4.0, 1.0, 200))?.s_t();
    let gap = (h_bar - vis).abs() / vis;
    let limit = contraction_bound(1.0) + 0.05;
    Ok((
        row.converged && gap <= 0.02 && ratio <= limit,
        format!("H_bar {h_bar:.5}, time marching {vis:.5}, gap {:.2}%, ratio {ratio:.4} (limit {limit:.4})", 100.0 * gap),
    ))
}

fn criterion_9(c: &mut Cache) -> Verdict {
    let base = RunConfig { outdir: c.dir.join("corrector"), ..cfg(Model::Viscous, 0.0, 1.0, 100) };
    let table = run_corrector(&base, &[0.0, 1.0, 4.0, 8.0], &[0.5, 1.0, 2.0], 1).map_err(|e| e.to_string())?;
    let converged: Vec<_> = table.rows.iter().filter(|r| r.converged).collect();
    let worst = converged.iter().filter_map(|r| r.h_bar).fold(f64::INFINITY, f64::min);
    let ok = !converged.is_empty() && converged.iter().all(|r| r.h_bar.is_some_and(|h| h >= 1.0 - 1e-12));
    Ok((ok, format!("{} of {} pairs converged, smallest H_bar {worst:.6}", converged.len(), table.rows.len())))
}

fn criterion_10() -> Verdict {
    let grids = [64, 128, 256];
    let o5 = weno_order_study(WenoOrder::Five, &grids).map_err(|e| e.to_string())?;
    let o3 = weno_order_study(WenoOrder::Three, &grids).map_err(|e| e.to_string())?;
    Ok((
        o5.l1_order >= 4.5 && o3.l1_order >= 2.5,
        format!(
            "mean-error order WENO5 {:.3}, WENO3 {:.3} (max-error order {:.3}, {:.3})",
            o5.l1_order, o3.l1_order, o5.max_order, o3.max_order
        ),
    ))
}

fn criterion_11() -> Verdict {
    let s = hamiltonian_scan(11, 1000, 1e-6);
    Ok((
        s.passes(1e-14),
        format!(
            "consistency {:.1e}/{:.1e}, monotonicity violations {}/{} over {} samples",
            s.inviscid_consistency, s.strain_consistency, s.inviscid_violations, s.strain_violations, s.samples
        ),
    ))
}

fn criterion_12() -> Verdict {
    let worst = |v: Vec<gfront::harness::checks::StretchCase>| v.iter().map(|c| c.error()).fold(0.0, f64::max);
    let e2 = worst(stretch_cases_2d(2024, 20).map_err(|e| e.to_string())?);
    let e3 = worst(stretch_cases_3d(2024, 10).map_err(|e| e.to_string())?);
    Ok((e2 <= 1e-3 && e3 <= 1e-10, format!("2d max error {e2:.2e}, 3d max error {e3:.2e}")))
}

fn criterion_13() -> Verdict {
    let s = steep_plane(100).map_err(|e| e.to_string())?;
    let max = |v: Vec<f64>| v.into_iter().fold(0.0, f64::max);
    let smooth = max(squeeze(100, 10).map_err(|e| e.to_string())?);
    let raw = max(squeeze(100, 0).map_err(|e| e.to_string())?);
    Ok((
        s.band_deviation <= 0.05 && s.zero_shift <= s.h && smooth <= 4.0 && raw > 10.0,
        format!(
            "band deviation {:.4}, zero shift {:.2e} (h {:.2e}); squeeze max|Dphi| {smooth:.3} (smoothed) vs {raw:.3}",
            s.band_deviation, s.zero_shift, s.h
        ),
    ))
}

fn criterion_14(c: &mut Cache) -> Verdict {
    let mut ok = true;
    let mut parts = Vec::new();
    for (model, d) in [(Model::Viscous, 0.1), (Model::Curvature, 0.2)] {
        let e = c.get(RunConfig { scheme: SchemeChoice::Explicit, ..cfg(model, 8.0, d, 100) })?.s_t();
        let s = c.get(RunConfig { scheme: SchemeChoice::SemiImplicit, ..cfg(model, 8.0, d, 100) })?.s_t();
        let gap = (e - s).abs() / e;
        ok &= gap <= 0.02;
        parts.push(format!("{model} d={d}: explicit {e:.4} semi-implicit {s:.4} ({:.2}%)", 100.0 * gap));
    }
    Ok((ok, parts.join("; ")))
}

fn criterion_15(c: &mut Cache) -> Verdict {
    let inv = c.get(cfg(Model::Inviscid, 8.0, 0.1, 400))?;
    let coarse = c.get(cfg(Model::Curvature, 8.0, 0.1, 100))?;
    let fine = c.get(cfg(Model::Curvature, 8.0, 0.1, 400))?;
    let damping = |r: &Run| r.pointwise.damping.ok_or_else(|| "no damping trend".to_string());
    let (di, dc, df) = (damping(&inv)?, damping(&coarse)?, damping(&fine)?);
    let ok = di.mean_drift.abs() < 0.01 && df.amplitude_decay < dc.amplitude_decay;
    Ok((
        ok,
        format!(
            "inviscid n=400 drift {:.4}/time; curvature amplitude decay {:.4} (n=100) vs {:.4} (n=400), drift {:.4} vs {:.4}",
            di.mean_drift, dc.amplitude_decay, df.amplitude_decay, dc.mean_drift, df.mean_drift
        ),
    ))
}

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let flag = |name: &str| args.iter().any(|a| a == name);
    let only: Option<Vec<usize>> = args
        .iter()
        .position(|a| a == "--only")
        .and_then(|k| args.get(k + 1))
        .map(|v| v.split(',').filter_map(|s| s.trim().parse().ok()).collect());
    let dir = std::env::var_os("GFRONT_ACCEPTANCE_DIR")
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../target/acceptance"));
    let mut cache = Cache { dir, fresh: flag("--fresh"), memo: HashMap::new() };

    let names = [
        "zero-flow calibration",
        "speed ordering",
        "enhancement monotonicity",
        "bending signature",
        "Markstein monotonicity",
        "strain quenching",
        "strain non-monotonicity",
        "corrector cross-validation",
        "corrector lower bound",
        "WENO order",
        "Hamiltonian properties",
        "stretch-rate oracle",
        "reinitialization",
        "cross-scheme agreement",
        "grid damping",
    ];
    let mut failed = 0;
    for (k, name) in names.iter().enumerate() {
        let id = k + 1;
        if only.as_ref().is_some_and(|o| !o.contains(&id)) {
            continue;
        }
        let c = &mut cache;
        let verdict = match id {
            1 => criterion_1(c),
            2 => criterion_2(c),
            3 => criterion_3(c),
            4 => criterion_4(c),
            5 => criterion_5(c),
            6 => criterion_6(c),
            7 => criterion_7(c),
            8 => criterion_8(c),
            9 => criterion_9(c),
            10 => criterion_10(),
            11 => criterion_11(),
            12 => criterion_12(),
            13 => criterion_13(),
            14 => criterion_14(c),
            _ => criterion_15(c),
        };
        let (ok, detail) = verdict.unwrap_or_else(|e| (false, format!("error: {e}")));
        failed += !ok as usize;
        println!("{} {id:2} {name}: {detail}", if ok { "PASS" } else { "FAIL" });
    }
    println!("acceptance: {failed} failed");
    if failed > 0 && flag("--strict") {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
