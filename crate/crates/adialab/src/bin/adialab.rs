//! Command-line driver: solve, evolve, bound, filter, sweep, validate.
//!
//! Exit codes: 0 on success, 1 on a validation failure, 2 on a
//! configuration error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use adialab::adiabatic::{run_csv, RunOptions};
use adialab::bounds::sweep_csv;
use adialab::filter::{plan_csv, transfer_csv, window_weights};
use adialab::harness::{
    self, auto_t, measured_run, solve, sweep, sweep_measured_csv, RunConfig, SweepConfig,
    SweepMeasure, WalkKind,
};
use adialab::problem::{random_instance, write_instance, Variant};
use adialab::schedule::{profile_csv, CMode, GapModel, Schedule};
use adialab::walk::walk_to_json;

#[derive(Parser)]
#[command(name = "adialab", version, about = "Discrete-adiabatic linear-systems laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CommonOpts {
    /// Instance dimension N.
    #[arg(long, default_value_t = 2)]
    n: usize,
    /// Condition number kappa.
    #[arg(long, default_value_t = 4.0)]
    kappa: f64,
    /// Schedule exponent p in (1, 2).
    #[arg(long, default_value_t = 1.5)]
    p: f64,
    /// Walk steps T (even). Omit for automatic selection where supported.
    #[arg(long = "T")]
    t: Option<usize>,
    /// Target error for the filtering phase.
    #[arg(long, default_value_t = 1e-3)]
    epsilon: f64,
    /// Matrix variant: hermitian-pd | hermitian | general.
    #[arg(long, default_value = "general")]
    variant: String,
    /// Gap model: linear | linear-over-sqrt2 | arcsin-adjusted | exact-from-walk.
    #[arg(long = "gap-model", default_value = "linear-over-sqrt2")]
    gap_model: String,
    /// Coefficient mode: analytic | exact.
    #[arg(long = "c-mode", default_value = "analytic")]
    c_mode: String,
    /// Walk construction: appendix-e | reference.
    #[arg(long, default_value = "reference")]
    walk: String,
    /// Instance seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory for CSV/JSON artifacts.
    #[arg(long)]
    out: Option<PathBuf>,
    /// JSON config file; explicit flags override nothing when this is given.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// End-to-end solve: adiabatic phase plus filtering, with a JSON report.
    Solve(CommonOpts),
    /// Operator-level adiabatic run with diagnostics trace and bounds.
    Evolve {
        #[command(flatten)]
        common: CommonOpts,
        /// Also dump the final walk unitary as JSON.
        #[arg(long = "dump-walk", default_value_t = false)]
        dump_walk: bool,
    },
    /// Evaluate the theorem bounds for one parameter point.
    Bound(CommonOpts),
    /// Synthesise a filter plan and dump weights/transfer CSVs.
    Filter(CommonOpts),
    /// Bound sweep over kappa/p/T grids (comma-separated lists).
    Sweep {
        #[command(flatten)]
        common: CommonOpts,
        #[arg(long, value_delimiter = ',', default_value = "10,20,30,40")]
        kappas: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_value = "1.5")]
        ps: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_value = "50000")]
        ts: Vec<usize>,
        /// Measure errors on cells with T at most this cap (0 disables).
        #[arg(long = "measure-cap", default_value_t = 0)]
        measure_cap: usize,
    },
    /// Run validation suites: identities | lemma-bounds | filter | all.
    Validate {
        #[arg(default_value = "all")]
        selector: String,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Generate a random instance and write it as JSON.
    Instance(CommonOpts),
}

fn parse_common(opts: &CommonOpts) -> Result<RunConfig, String> {
    if let Some(path) = &opts.config {
        let text = std::fs::read_to_string(path).map_err(|e| format!("config read: {e}"))?;
        return serde_json::from_str(&text).map_err(|e| format!("config parse: {e}"));
    }
    let variant = Variant::parse(&opts.variant).map_err(|e| e.to_string())?;
    let gap_model = GapModel::parse(&opts.gap_model).ok_or_else(|| format!("unknown gap model '{}'", opts.gap_model))?;
    let c_mode = CMode::parse(&opts.c_mode).ok_or_else(|| format!("unknown c-mode '{}'", opts.c_mode))?;
    let walk = WalkKind::parse(&opts.walk).ok_or_else(|| format!("unknown walk '{}'", opts.walk))?;
    Ok(RunConfig {
        n: opts.n,
        kappa: opts.kappa,
        variant,
        seed: opts.seed,
        instance_path: None,
        p: opts.p,
        t: opts.t,
        epsilon: opts.epsilon,
        gap_model,
        c_mode,
        walk,
        adiabatic_target: 0.5,
        trials: 200,
        out: opts.out.clone(),
    })
}

fn write_artifact(dir: &Option<PathBuf>, name: &str, contents: &str) -> std::io::Result<()> {
    match dir {
        Some(d) => {
            std::fs::create_dir_all(d)?;
            std::fs::write(d.join(name), contents)
        }
        None => {
            println!("{contents}");
            Ok(())
        }
    }
}

fn run() -> Result<bool, String> {
    let cli = Cli::parse();
    match cli.command {
        Command::Solve(opts) => {
            let config = parse_common(&opts)?;
            let report = solve(&config).map_err(|e| e.to_string())?;
            let json = serde_json::to_string_pretty(&report).map_err(|e| e.to_string())?;
            write_artifact(&config.out, "solve_report.json", &json).map_err(|e| e.to_string())?;
            eprintln!(
                "T={} ell={} success_probability={:.4} state_error={:.3e} oracle_calls={}",
                report.t, report.filter_order, report.success_probability, report.state_error,
                report.oracle_calls
            );
            Ok(true)
        }
        Command::Evolve { common, dump_walk } => {
            let config = parse_common(&common)?;
            let t = config.t.ok_or_else(|| "evolve requires --T".to_string())?;
            let inst = config.load_instance().map_err(|e| e.to_string())?;
            let sch = Schedule::new(config.p, inst.kappa, t, config.gap_model).map_err(|e| e.to_string())?;
            let mr = measured_run(
                &inst,
                &sch,
                config.walk,
                &RunOptions { track_cumulative_error: true, ..Default::default() },
            )
            .map_err(|e| e.to_string())?;
            let csv = run_csv(&mr.run);
            write_artifact(&config.out, "run_trace.csv", &csv).map_err(|e| e.to_string())?;
            if dump_walk {
                let fam = adialab::problem::HamiltonianFamily::new(&inst);
                let w = harness::walk_matrix(&inst, &fam, &sch, config.walk, t).map_err(|e| e.to_string())?;
                let step = adialab::walk::WalkStep { s: 1.0, dim: w.nrows(), w };
                write_artifact(&config.out, "walk_final.json", &walk_to_json(&step)).map_err(|e| e.to_string())?;
            }
            eprintln!(
                "measured error {:.6e}; second-theorem bound {:.6e} (precondition {}), first-theorem bound {:.6e} (precondition {})",
                mr.run.error,
                mr.bound_thm2.total,
                mr.bound_thm2.precondition_ok,
                mr.bound_thm1.total,
                mr.bound_thm1.precondition_ok
            );
            Ok(true)
        }
        Command::Bound(opts) => {
            let config = parse_common(&opts)?;
            let t = match config.t {
                Some(t) => t,
                None => {
                    let (t, b, rule) = auto_t(config.p, config.kappa, config.gap_model, 0.5, 1 << 22)
                        .map_err(|e| e.to_string())?;
                    eprintln!("auto-T selected {t} via {rule} (bound {b:.4})");
                    t
                }
            };
            let sch = Schedule::new(config.p, config.kappa, t, config.gap_model).map_err(|e| e.to_string())?;
            let coeffs = sch.diff_coeffs(config.c_mode).map_err(|e| e.to_string())?;
            let profile = sch.gap_profile().map_err(|e| e.to_string())?;
            let r1 = adialab::bounds::theorem1_bound(&profile, &coeffs, t);
            let r2 = adialab::bounds::theorem2_bound(&profile, &coeffs, t);
            let report = serde_json::json!({
                "kappa": config.kappa, "p": config.p, "T": t,
                "gap_model": config.gap_model.as_str(), "c_mode": config.c_mode.as_str(),
                "first_theorem": r1, "second_theorem": r2,
            });
            write_artifact(&config.out, "bounds.json", &serde_json::to_string_pretty(&report).unwrap())
                .map_err(|e| e.to_string())?;
            let pcsv = profile_csv(&sch, &coeffs, &profile);
            if config.out.is_some() {
                write_artifact(&config.out, "profile.csv", &pcsv).map_err(|e| e.to_string())?;
            }
            Ok(true)
        }
        Command::Filter(opts) => {
            let config = parse_common(&opts)?;
            let ell = adialab::filter::chebyshev_order(config.kappa, config.epsilon).map_err(|e| e.to_string())?;
            let plan = window_weights(ell, config.epsilon).map_err(|e| e.to_string())?;
            write_artifact(&config.out, "filter_weights.csv", &plan_csv(&plan)).map_err(|e| e.to_string())?;
            write_artifact(&config.out, "filter_transfer.csv", &transfer_csv(&plan, 1000)).map_err(|e| e.to_string())?;
            eprintln!("ell = {ell}, beta = {:.6}", plan.beta);
            Ok(true)
        }
        Command::Sweep { common, kappas, ps, ts, measure_cap } => {
            let config = parse_common(&common)?;
            let sweep_config = SweepConfig {
                kappas,
                ps,
                ts,
                gap_model: config.gap_model,
                c_mode: config.c_mode,
                measure: if measure_cap > 0 {
                    Some(SweepMeasure {
                        n: config.n,
                        variant: config.variant,
                        seed: config.seed,
                        measure_cap,
                    })
                } else {
                    None
                },
            };
            let cells = sweep(&sweep_config);
            let rows: Vec<_> = cells.iter().map(|c| c.row.clone()).collect();
            write_artifact(&config.out, "bound_sweep.csv", &sweep_csv(&rows)).map_err(|e| e.to_string())?;
            if sweep_config.measure.is_some() {
                write_artifact(&config.out, "measured_sweep.csv", &sweep_measured_csv(&cells))
                    .map_err(|e| e.to_string())?;
            }
            Ok(true)
        }
        Command::Validate { selector, seed } => {
            let results = harness::validate(&selector, seed).map_err(|e| e.to_string())?;
            let mut all_pass = true;
            for r in &results {
                println!("{}: {} ({})", r.suite, if r.pass { "PASS" } else { "FAIL" }, r.detail);
                all_pass &= r.pass;
            }
            Ok(all_pass)
        }
        Command::Instance(opts) => {
            let config = parse_common(&opts)?;
            let inst = random_instance(config.n, config.kappa, config.variant, config.seed)
                .map_err(|e| e.to_string())?;
            match &config.out {
                Some(dir) => {
                    std::fs::create_dir_all(dir).map_err(|e| e.to_string())?;
                    write_instance(&inst, &dir.join("instance.json")).map_err(|e| e.to_string())?;
                }
                None => println!("{}", adialab::problem::instance_to_json(&inst).map_err(|e| e.to_string())?),
            }
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
