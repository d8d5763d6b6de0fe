use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use gfront::harness::checks::{reinit_demo, stretch_cases_2d, stretch_cases_3d, StretchCase};
use gfront::harness::{default_workers, run_corrector, run_dir, run_single, run_sweep, RunConfig};
use gfront::stepping::Model;

#[derive(Parser)]
#[command(name = "gfront", version, about = "G-equation front propagation and turbulent flame speeds in cellular flows")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// One run; artifacts go to <outdir>/run-<model>-A<A>-d<d>-n<grid>/
    Run(RunArgs),
    /// Cartesian product of models, amplitudes and Markstein numbers
    Sweep {
        #[command(flatten)]
        run: RunArgs,
        #[command(flatten)]
        lists: ListArgs,
        #[arg(long, value_delimiter = ',', default_value = "inviscid")]
        models: Vec<String>,
    },
    /// Corrector iteration for the viscous model over (A, d)
    Corrector {
        #[command(flatten)]
        run: RunArgs,
        #[command(flatten)]
        lists: ListArgs,
    },
    /// Reinitialization scenarios: steep plane and squeezed wavy front
    ReinitDemo {
        #[arg(long, default_value_t = 100)]
        grid: usize,
        #[arg(long, value_delimiter = ',', default_value = "0,10")]
        smooth_iters: Vec<usize>,
        #[arg(long, default_value = "out")]
        outdir: PathBuf,
    },
    /// Stretch-rate formulas against independent references on random cases
    StretchCheck {
        #[arg(long, default_value_t = 2024)]
        seed: u64,
        #[arg(long, default_value_t = 20)]
        cases_2d: usize,
        #[arg(long, default_value_t = 10)]
        cases_3d: usize,
    },
}

#[derive(Args)]
struct ListArgs {
    /// Comma separated; give the flag without values for an empty sweep
    #[arg(long, value_delimiter = ',', num_args = 0.., default_value = "0")]
    amplitudes: Vec<f64>,
    #[arg(long, value_delimiter = ',', num_args = 0.., default_value = "0.1")]
    ds: Vec<f64>,
    /// Concurrent runs (default: available cores)
    #[arg(long)]
    workers: Option<usize>,
}

/// Every configuration key as a flag; flags override the config file.
#[derive(Args)]
struct RunArgs {
    /// Flat `key = value` file
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    model: Option<String>,
    #[arg(long, short = 'A')]
    amplitude: Option<String>,
    #[arg(long)]
    d: Option<String>,
    #[arg(long)]
    s_l: Option<String>,
    #[arg(long)]
    grid: Option<String>,
    /// A number or `auto`
    #[arg(long)]
    t_max: Option<String>,
    #[arg(long)]
    cfl_safety: Option<String>,
    /// auto | explicit | semi-implicit
    #[arg(long)]
    scheme: Option<String>,
    #[arg(long)]
    reinit_every: Option<String>,
    #[arg(long)]
    reinit_trigger: Option<String>,
    #[arg(long)]
    reinit_pseudo_cells: Option<String>,
    #[arg(long)]
    reinit_eps: Option<String>,
    #[arg(long)]
    reinit_iters: Option<String>,
    #[arg(long)]
    quench_threshold: Option<String>,
    #[arg(long)]
    quench_hold: Option<String>,
    #[arg(long)]
    probe_x: Option<String>,
    #[arg(long)]
    probe_y: Option<String>,
    #[arg(long)]
    outdir: Option<String>,
}

impl RunArgs {
    fn config(&self) -> Result<RunConfig, String> {
        let mut cfg = match &self.config {
            Some(p) => {
                let text = fs::read_to_string(p).map_err(|e| format!("{}: {e}", p.display()))?;
                RunConfig::parse(&text).map_err(|e| e.to_string())?
            }
            None => RunConfig::default(),
        };
        let flags = [
            ("model", &self.model),
            ("amplitude", &self.amplitude),
            ("d", &self.d),
            ("s_l", &self.s_l),
            ("grid", &self.grid),
            ("t_max", &self.t_max),
            ("cfl_safety", &self.cfl_safety),
            ("scheme", &self.scheme),
            ("reinit_every", &self.reinit_every),
            ("reinit_trigger", &self.reinit_trigger),
            ("reinit_pseudo_cells", &self.reinit_pseudo_cells),
            ("reinit_eps", &self.reinit_eps),
            ("reinit_iters", &self.reinit_iters),
            ("quench_threshold", &self.quench_threshold),
            ("quench_hold", &self.quench_hold),
            ("probe_x", &self.probe_x),
            ("probe_y", &self.probe_y),
            ("outdir", &self.outdir),
        ];
        for (key, value) in flags {
            if let Some(v) = value {
                cfg.set(key, v).map_err(|e| e.to_string())?;
            }
        }
        Ok(cfg)
    }
}

enum Failure {
    Config(String),
    Run(String),
}

impl From<gfront::Error> for Failure {
    fn from(e: gfront::Error) -> Self {
        match e {
            gfront::Error::Config(_) | gfront::Error::Parse(_) => Failure::Config(e.to_string()),
            other => Failure::Run(other.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Run(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Config(m)) => {
            eprintln!("configuration error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Run(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
    }
}

/// `Ok(false)` when some run failed.
fn dispatch(command: Command) -> Result<bool, Failure> {
    match command {
        Command::Run(args) => {
            let cfg = args.config().map_err(Failure::Config)?;
            cfg.validate()?;
            let out = run_single(&cfg)?;
            let dir = run_dir(&cfg);
            print!("{}", fs::read_to_string(dir.join("estimate.txt"))?);
            println!("artifacts = {}", dir.display());
            Ok(out.row.is_ok())
        }
        Command::Sweep { run, lists, models } => {
            let base = run.config().map_err(Failure::Config)?;
            let models = models
                .iter()
                .map(|m| m.parse::<Model>())
                .collect::<Result<Vec<_>, _>>()?;
            let table = run_sweep(&base, &lists.amplitudes, &lists.ds, &models, lists.workers.unwrap_or_else(default_workers));
            fs::create_dir_all(&base.outdir)?;
            fs::write(base.outdir.join("sweep.csv"), table.to_csv())?;
            print!("{}", table.to_csv());
            Ok(table.failures() == 0)
        }
        Command::Corrector { run, lists } => {
            let base = run.config().map_err(Failure::Config)?;
            let table = run_corrector(&base, &lists.amplitudes, &lists.ds, lists.workers.unwrap_or_else(default_workers))?;
            print!("{}", table.to_csv());
            Ok(table.failures() == 0)
        }
        Command::ReinitDemo { grid, smooth_iters, outdir } => {
            let demo = reinit_demo(grid, &smooth_iters)?;
            fs::create_dir_all(&outdir)?;
            fs::write(outdir.join("reinit_demo.csv"), demo.to_csv())?;
            println!(
                "steep plane: band deviation {:.4e}, zero crossing shift {:.3e} (h = {:.3e})",
                demo.steep.band_deviation, demo.steep.zero_shift, demo.steep.h
            );
            for (iters, v) in &demo.squeeze {
                let shown: Vec<String> = v.iter().map(|m| format!("{m:.3}")).collect();
                println!("squeeze smooth_iters={iters}: max |Dphi| per call {}", shown.join(" "));
            }
            Ok(true)
        }
        Command::StretchCheck { seed, cases_2d, cases_3d } => {
            let report = |name: &str, cases: &[StretchCase], tol: f64| {
                let worst = cases.iter().map(|c| c.error()).fold(0.0, f64::max);
                for (k, c) in cases.iter().enumerate() {
                    println!("{name} case {k:2}: formula {:+.12e} reference {:+.12e} error {:.3e}", c.formula, c.reference, c.error());
                }
                let ok = worst <= tol;
                println!("{name}: max error {worst:.3e} (tolerance {tol:e}) {}", if ok { "ok" } else { "FAILED" });
                ok
            };
            let ok2 = report("2d", &stretch_cases_2d(seed, cases_2d)?, 1e-3);
            let ok3 = report("3d", &stretch_cases_3d(seed, cases_3d)?, 1e-10);
            Ok(ok2 && ok3)
        }
    }
}
