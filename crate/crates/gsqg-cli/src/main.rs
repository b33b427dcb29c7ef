//! Command-line front end.
//!
//! Every subcommand reads an optional TOML config plus flag overrides,
//! writes a run directory `{manifest.json, trajectories/*.jsonl,
//! fields/*.gsqg, report.csv, DONE}`, and exits 0 on pass, 1 on check or
//! run failure, 2 on usage/config errors.

use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;

use gsqg::brownian::{mc_crossing_probability, BrownianPath, Detection};
use gsqg::diagnostics;
use gsqg::ensemble::{run_ensemble, RunConfig, RunManifest};
use gsqg::field::FourierField;
use gsqg::ops;
use gsqg::picard::{contraction_scaling_experiment, picard_local_solve, ScalingResult};
use gsqg::snapshot;
use gsqg::solver::{self, Scheme};

#[derive(Parser)]
#[command(name = "gsqg", version, about = "Stochastic SQG simulation and verification suite")]
struct Cli {
    /// TOML run configuration; flags override individual fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Run directory for outputs.
    #[arg(long, global = true, default_value = "gsqg-run")]
    output: PathBuf,
    /// Worker threads (also honors GSQG_WORKERS).
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(flatten)]
    overrides: Overrides,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct Overrides {
    #[arg(long, global = true)]
    nu: Option<f64>,
    #[arg(long, global = true)]
    s: Option<f64>,
    #[arg(long, global = true)]
    sigma: Option<f64>,
    #[arg(long, global = true)]
    alpha: Option<f64>,
    #[arg(long, global = true)]
    beta: Option<f64>,
    #[arg(long, global = true)]
    epsilon: Option<f64>,
    #[arg(long, global = true)]
    grid_n: Option<usize>,
    #[arg(long, global = true)]
    dt: Option<f64>,
    #[arg(long, global = true)]
    t_end: Option<f64>,
    #[arg(long, global = true, value_parser = parse_scheme)]
    scheme: Option<Scheme>,
    #[arg(long, global = true)]
    record_every: Option<usize>,
    /// Initial-data seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Initial-data Gevrey norm at radius alpha + epsilon.
    #[arg(long, global = true)]
    target_norm: Option<f64>,
    /// Initial-data spectral slope.
    #[arg(long, global = true)]
    slope: Option<f64>,
    /// Path horizon.
    #[arg(long, global = true)]
    horizon: Option<f64>,
    /// Path step.
    #[arg(long, global = true)]
    step: Option<f64>,
    #[arg(long, global = true)]
    master_seed: Option<u64>,
    /// Ensemble / Monte Carlo path count.
    #[arg(long, global = true)]
    paths: Option<u64>,
    /// Crossing detection: nodal | bridge.
    #[arg(long, global = true, value_parser = parse_detection)]
    detection: Option<Detection>,
    #[arg(long, global = true)]
    allow_inadmissible: bool,
    /// Explicit modes "(k1,k2):re[,im];(k1,k2):re[,im]" instead of the
    /// seeded random datum.
    #[arg(long, global = true)]
    modes: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Field construction utilities.
    Field {
        #[command(subcommand)]
        action: FieldAction,
    },
    /// Pathwise time integration.
    Simulate {
        #[command(subcommand)]
        form: SimulateForm,
    },
    /// Back-transformed vs direct runs on one path across a dt ladder.
    CompareTransform {
        /// Comma-separated dt ladder, finest last.
        #[arg(long, default_value = "1e-2,1e-3,1e-4")]
        dt_list: String,
    },
    /// Local fixed-point iteration diagnostics.
    Picard {
        #[arg(long, default_value_t = 0.125)]
        t_loc: f64,
        #[arg(long, default_value_t = 8)]
        n_iter: usize,
        #[arg(long, default_value_t = 64)]
        quad_nodes: usize,
    },
    /// Contraction-factor power law across local horizons.
    ContractionScaling {
        #[arg(long, default_value = "0.05,0.1,0.2,0.4")]
        t_list: String,
        #[arg(long, default_value_t = 6)]
        n_iter: usize,
        #[arg(long, default_value_t = 64)]
        quad_nodes: usize,
    },
    /// Monte Carlo crossing probability of nu W - beta t over alpha.
    McCrossing,
    /// Full ensemble experiment against the analytic probability bound.
    Ensemble,
    /// Run the invariant verification suite.
    Verify {
        #[arg(long, default_value_t = 1000)]
        cases: usize,
        #[arg(long, default_value_t = 7)]
        suite_seed: u64,
    },
    /// Render a run directory's outputs into plot-ready tables.
    Report {
        /// Run directory to render (defaults to --output).
        #[arg(long)]
        run: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum FieldAction {
    /// Generate a field snapshot (seeded random or explicit modes).
    Gen,
}

#[derive(Subcommand)]
enum SimulateForm {
    /// Conjugated pathwise-deterministic equation (ETDRK2/4).
    Transformed,
    /// Original Ito form (Euler transport + exact noise factor).
    Direct,
}

fn parse_scheme(s: &str) -> Result<Scheme, String> {
    match s {
        "etdrk2" => Ok(Scheme::Etdrk2),
        "etdrk4" => Ok(Scheme::Etdrk4),
        "picard" => Ok(Scheme::Picard),
        "direct_spde" => Ok(Scheme::DirectSpde),
        other => Err(format!(
            "unknown scheme '{other}' (etdrk2|etdrk4|picard|direct_spde)"
        )),
    }
}

fn parse_detection(s: &str) -> Result<Detection, String> {
    match s {
        "nodal" => Ok(Detection::Nodal),
        "bridge" => Ok(Detection::Bridge),
        other => Err(format!("unknown detection '{other}' (nodal|bridge)")),
    }
}

fn default_config() -> RunConfig {
    use gsqg::ensemble::*;
    use gsqg::solver::OverflowPolicy;
    RunConfig {
        params: gsqg::GevreyParams {
            nu: 1.0,
            s: 0.5,
            sigma: 1.5,
            alpha: 1.0,
            beta: 0.25,
            epsilon: 0.5,
        },
        grid: GridKnobs {
            n: 32,
            dealias_cutoff: None,
        },
        initial_data: InitialDataRecipe {
            seed: 7,
            target_norm: 0.05,
            spectral_slope: 2.0,
        },
        path: PathRecipe {
            horizon: 5.0,
            step: 1e-2,
            master_seed: 1234,
        },
        solver: SolverKnobs {
            dt: 1e-2,
            t_end: 5.0,
            scheme: Scheme::Etdrk2,
            record_every: 10,
            overflow_policy: OverflowPolicy::OracleFallback,
        },
        ensemble: EnsembleKnobs {
            n_paths: 64,
            detection: Detection::Bridge,
        },
        output_dir: None,
        allow_inadmissible: false,
    }
}

fn load_config(cli: &Cli) -> Result<RunConfig> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading config {}", path.display()))?;
            RunConfig::from_toml_str(&text)?
        }
        None => default_config(),
    };
    let o = &cli.overrides;
    if let Some(v) = o.nu {
        cfg.params.nu = v;
    }
    if let Some(v) = o.s {
        cfg.params.s = v;
    }
    if let Some(v) = o.sigma {
        cfg.params.sigma = v;
    }
    if let Some(v) = o.alpha {
        cfg.params.alpha = v;
    }
    if let Some(v) = o.beta {
        cfg.params.beta = v;
    }
    if let Some(v) = o.epsilon {
        cfg.params.epsilon = v;
    }
    if let Some(v) = o.grid_n {
        cfg.grid.n = v;
    }
    if let Some(v) = o.dt {
        cfg.solver.dt = v;
    }
    if let Some(v) = o.t_end {
        cfg.solver.t_end = v;
        if cfg.path.horizon < v {
            cfg.path.horizon = v;
        }
    }
    if let Some(v) = o.scheme {
        cfg.solver.scheme = v;
    }
    if let Some(v) = o.record_every {
        cfg.solver.record_every = v;
    }
    if let Some(v) = o.seed {
        cfg.initial_data.seed = v;
    }
    if let Some(v) = o.target_norm {
        cfg.initial_data.target_norm = v;
    }
    if let Some(v) = o.slope {
        cfg.initial_data.spectral_slope = v;
    }
    if let Some(v) = o.horizon {
        cfg.path.horizon = v;
    }
    if let Some(v) = o.step {
        cfg.path.step = v;
    }
    if let Some(v) = o.master_seed {
        cfg.path.master_seed = v;
    }
    if let Some(v) = o.paths {
        cfg.ensemble.n_paths = v;
    }
    if let Some(v) = o.detection {
        cfg.ensemble.detection = v;
    }
    if o.allow_inadmissible {
        cfg.allow_inadmissible = true;
    }
    cfg.params.validate()?;
    Ok(cfg)
}

/// "(k1,k2):re[,im]" entries separated by ';'.
fn parse_modes(text: &str) -> Result<Vec<((i32, i32), Complex64)>> {
    let mut out = Vec::new();
    for entry in text.split(';') {
        let entry = entry.trim();
        if entry.is_empty() {
            continue;
        }
        let (kpart, vpart) = entry
            .split_once(':')
            .ok_or_else(|| anyhow!("mode '{entry}': expected '(k1,k2):amplitude'"))?;
        let kpart = kpart
            .trim()
            .strip_prefix('(')
            .and_then(|s| s.strip_suffix(')'))
            .ok_or_else(|| anyhow!("mode '{entry}': wavevector must be '(k1,k2)'"))?;
        let (k1, k2) = kpart
            .split_once(',')
            .ok_or_else(|| anyhow!("mode '{entry}': wavevector must be '(k1,k2)'"))?;
        let k = (
            k1.trim().parse::<i32>().context("k1")?,
            k2.trim().parse::<i32>().context("k2")?,
        );
        let amp = match vpart.split_once(',') {
            Some((re, im)) => Complex64::new(
                re.trim().parse().context("re")?,
                im.trim().parse().context("im")?,
            ),
            None => Complex64::new(vpart.trim().parse().context("amplitude")?, 0.0),
        };
        out.push((k, amp));
    }
    if out.is_empty() {
        bail!("no modes parsed from '{text}'");
    }
    Ok(out)
}

fn build_field(cfg: &RunConfig, modes: &Option<String>) -> Result<FourierField> {
    let grid = cfg.build_grid()?;
    match modes {
        Some(text) => Ok(FourierField::from_modes(grid, &parse_modes(text)?)?),
        None => Ok(cfg.build_initial_data()?),
    }
}

fn workers_from(cli: &Cli) -> Option<usize> {
    cli.workers.or_else(|| {
        std::env::var("GSQG_WORKERS")
            .ok()
            .and_then(|v| v.parse().ok())
    })
}

struct RunDir {
    root: PathBuf,
}

impl RunDir {
    fn create(root: &Path) -> Result<Self> {
        std::fs::create_dir_all(root.join("trajectories"))?;
        std::fs::create_dir_all(root.join("fields"))?;
        std::fs::create_dir_all(root.join("tables"))?;
        Ok(RunDir {
            root: root.to_path_buf(),
        })
    }

    fn write(&self, rel: &str, contents: &str) -> Result<()> {
        std::fs::write(self.root.join(rel), contents)?;
        Ok(())
    }

    fn write_bytes(&self, rel: &str, contents: &[u8]) -> Result<()> {
        std::fs::write(self.root.join(rel), contents)?;
        Ok(())
    }

    fn finish(&self, manifest: &RunManifest) -> Result<()> {
        self.write(
            "manifest.json",
            &serde_json::to_string_pretty(manifest).context("manifest")?,
        )?;
        self.write("DONE", "")?;
        Ok(())
    }
}

fn parse_f64_list(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|e| anyhow!("bad number '{s}': {e}"))
        })
        .collect()
}

fn main() {
    let cli = Cli::parse();
    let code = match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            2
        }
    };
    std::process::exit(code);
}

fn run(cli: &Cli) -> Result<i32> {
    let cfg = load_config(cli)?;
    let workers = workers_from(cli);
    let started = Instant::now();
    match &cli.command {
        Command::Field {
            action: FieldAction::Gen,
        } => {
            let dir = RunDir::create(&cli.output)?;
            let field = build_field(&cfg, &cli.overrides.modes)?;
            dir.write_bytes("fields/field.gsqg", &snapshot::to_bytes(&field, cfg.params.s))?;
            dir.write("fields/field.csv", &snapshot::to_csv(&field))?;
            let report = diagnostics::condition_check(&field, &cfg.params)?;
            println!(
                "field: {} nonzero modes, Gevrey norm {:.6e}, admissible: {} (margin {:.3e})",
                field.nonzero_modes().len(),
                report.norm,
                report.admissible,
                report.margin
            );
            dir.finish(&RunManifest::new(
                "field gen",
                cfg,
                workers,
                started.elapsed().as_secs_f64(),
            ))?;
            Ok(0)
        }

        Command::Simulate { form } => {
            let dir = RunDir::create(&cli.output)?;
            let field = build_field(&cfg, &cli.overrides.modes)?;
            let solver_cfg = cfg.solver_config()?;
            let path_seed = gsqg::brownian::derive_seed(
                cfg.path.master_seed,
                gsqg::brownian::seed_domain::PATH,
                0,
            );
            let path = BrownianPath::sample(path_seed, cfg.path.horizon, cfg.path.step)?;
            let (label, record) = match form {
                SimulateForm::Transformed => (
                    "simulate transformed",
                    solver::integrate_transformed(&field, &path, &solver_cfg, &cfg.params),
                ),
                SimulateForm::Direct => (
                    "simulate direct",
                    solver::integrate_direct(&field, &path, &solver_cfg, &cfg.params),
                ),
            };
            let record = match record {
                Ok(r) => r,
                Err(e) => {
                    eprintln!("run failed: {e}");
                    return Ok(1);
                }
            };
            dir.write("trajectories/trajectory.jsonl", &record.to_jsonl())?;
            dir.write("trajectories/path.csv", &path.to_csv())?;
            if let Some(terminal) = &record.terminal_field {
                dir.write_bytes(
                    "fields/terminal.gsqg",
                    &snapshot::to_bytes(terminal, cfg.params.s),
                )?;
            }
            let last = record.samples.last().expect("nonempty record");
            println!(
                "{label}: {} steps recorded, terminal sobolev {:.6e}, crossed: {}, monotone: {} (fallbacks {})",
                record.samples.len(),
                last.sobolev_norm,
                record.crossing_time.is_some(),
                record.monotone.pass,
                record.oracle_fallbacks
            );
            dir.finish(&RunManifest::new(
                label,
                cfg,
                workers,
                started.elapsed().as_secs_f64(),
            ))?;
            Ok(0)
        }

        Command::CompareTransform { dt_list } => {
            let dir = RunDir::create(&cli.output)?;
            let dts = parse_f64_list(dt_list)?;
            if dts.len() < 2 {
                bail!("need at least two dt values");
            }
            let field = build_field(&cfg, &cli.overrides.modes)?;
            let fine = dts.iter().cloned().fold(f64::INFINITY, f64::min);
            let path_seed = gsqg::brownian::derive_seed(
                cfg.path.master_seed,
                gsqg::brownian::seed_domain::PATH,
                0,
            );
            let path = BrownianPath::sample(path_seed, cfg.solver.t_end, fine)?;
            let w_t = path.value_at(cfg.solver.t_end)?;
            let mut rows = String::from("dt,l2_difference\n");
            let mut errs = Vec::new();
            for &dt in &dts {
                let mut scfg = cfg.solver_config()?;
                scfg.dt = dt;
                scfg.record_every = usize::MAX;
                let trans = solver::integrate_transformed(&field, &path, &scfg, &cfg.params)?;
                let direct = solver::integrate_direct(&field, &path, &scfg, &cfg.params)?;
                let theta_from_u =
                    solver::back_transform(trans.terminal_field.as_ref().unwrap(), w_t, &cfg.params)?;
                let diff = ops::l2_norm(&theta_from_u.sub(direct.terminal_field.as_ref().unwrap()));
                rows.push_str(&format!("{dt},{diff}\n"));
                errs.push((dt, diff));
            }
            dir.write("tables/compare_transform.csv", &rows)?;
            let order = empirical_order(&errs);
            println!("terminal L2 differences: {errs:?}");
            println!("empirical order: {order:.3}");
            dir.finish(&RunManifest::new(
                "compare-transform",
                cfg,
                workers,
                started.elapsed().as_secs_f64(),
            ))?;
            Ok(0)
        }

        Command::Picard {
            t_loc,
            n_iter,
            quad_nodes,
        } => {
            let dir = RunDir::create(&cli.output)?;
            let field = build_field(&cfg, &cli.overrides.modes)?;
            let quad_dt = t_loc / *quad_nodes as f64;
            let path_seed = gsqg::brownian::derive_seed(
                cfg.path.master_seed,
                gsqg::brownian::seed_domain::PATH,
                0,
            );
            let path = BrownianPath::sample(path_seed, *t_loc, quad_dt)?;
            let out = picard_local_solve(&field, &path, *t_loc, *n_iter, quad_dt, &cfg.params)?;
            dir.write(
                "tables/picard.json",
                &serde_json::to_string_pretty(&out).context("picard serialization")?,
            )?;
            println!(
                "picard: verdict {:?}, differences {:?}",
                out.verdict, out.differences
            );
            dir.finish(&RunManifest::new(
                "picard",
                cfg,
                workers,
                started.elapsed().as_secs_f64(),
            ))?;
            Ok(0)
        }

        Command::ContractionScaling {
            t_list,
            n_iter,
            quad_nodes,
        } => {
            let dir = RunDir::create(&cli.output)?;
            let field = build_field(&cfg, &cli.overrides.modes)?;
            let ts = parse_f64_list(t_list)?;
            let fine = ts.iter().cloned().fold(f64::INFINITY, f64::min) / *quad_nodes as f64;
            let horizon = ts.iter().cloned().fold(0.0, f64::max);
            let path = BrownianPath::zeros(horizon, fine)?;
            let result =
                contraction_scaling_experiment(&field, &path, &ts, &cfg.params, *n_iter, *quad_nodes)?;
            dir.write(
                "tables/contraction_scaling.json",
                &serde_json::to_string_pretty(&result).context("scaling serialization")?,
            )?;
            match &result {
                ScalingResult::Fit {
                    exponent,
                    residual,
                    points,
                } => {
                    println!(
                        "fitted exponent {exponent:.4} (residual {residual:.4}); expected 1 - sigma/2 = {:.4}",
                        1.0 - cfg.params.sigma / 2.0
                    );
                    println!("ratios: {points:?}");
                }
                ScalingResult::Degenerate => {
                    println!("degenerate (all corrections vanish); declining to fit")
                }
            }
            dir.finish(&RunManifest::new(
                "contraction-scaling",
                cfg,
                workers,
                started.elapsed().as_secs_f64(),
            ))?;
            Ok(0)
        }

        Command::McCrossing => {
            let dir = RunDir::create(&cli.output)?;
            let run = || {
                mc_crossing_probability(
                    cfg.ensemble.n_paths,
                    cfg.path.horizon,
                    cfg.path.step,
                    &cfg.params,
                    cfg.path.master_seed,
                    cfg.ensemble.detection,
                )
            };
            let est = match workers {
                Some(w) => rayon::ThreadPoolBuilder::new()
                    .num_threads(w)
                    .build()
                    .map_err(|e| anyhow!("thread pool: {e}"))?
                    .install(run)?,
                None => run()?,
            };
            dir.write(
                "tables/mc_crossing.json",
                &serde_json::to_string_pretty(&est).context("estimate serialization")?,
            )?;
            println!(
                "crossing estimate {:.5} +- {:.5} over {} paths on [0, {}] ({:?} detection); analytic infinite-horizon {:.5}",
                est.estimate,
                est.std_error,
                est.n_paths,
                est.horizon,
                est.detection,
                est.analytic_infinite_horizon
            );
            dir.finish(&RunManifest::new(
                "mc-crossing",
                cfg,
                workers,
                started.elapsed().as_secs_f64(),
            ))?;
            Ok(0)
        }

        Command::Ensemble => {
            let dir = RunDir::create(&cli.output)?;
            let report = run_ensemble(&cfg, workers)?;
            dir.write("report.csv", &report.to_csv())?;
            dir.write("report.json", &report.to_json())?;
            let a = &report.aggregate;
            println!(
                "ensemble: {}/{} successes (rate {:.4} +- {:.4}) on horizon {} with {:?} detection",
                a.n_success, a.n_paths, a.empirical_success_rate, a.std_error, a.horizon, a.detection
            );
            println!(
                "analytic bounds: {:.4} (with alpha), {:.4} (with alpha - eps); hypothesis: {}",
                a.analytic_bound_alpha, a.analytic_bound_alpha_minus_eps, a.hypothesis
            );
            dir.finish(&RunManifest::new(
                "ensemble",
                cfg,
                workers,
                started.elapsed().as_secs_f64(),
            ))?;
            let pass = a.empirical_success_rate
                >= a.analytic_bound_alpha - 3.0 * a.std_error - 0.01;
            if !pass {
                println!("BOUND CHECK FAILED");
            }
            Ok(if pass { 0 } else { 1 })
        }

        Command::Verify { cases, suite_seed } => {
            let dir = RunDir::create(&cli.output)?;
            let outcomes = diagnostics::run_verification_suite(*suite_seed, *cases);
            let mut all_pass = true;
            let mut lines = Vec::new();
            for o in &outcomes {
                println!(
                    "{} {}: {}",
                    if o.pass { "PASS" } else { "FAIL" },
                    o.check,
                    o.details
                );
                all_pass &= o.pass;
                lines.push(serde_json::to_string(o).context("verdict")?);
            }
            dir.write("tables/verify.jsonl", &(lines.join("\n") + "\n"))?;
            dir.finish(&RunManifest::new(
                "verify",
                cfg,
                workers,
                started.elapsed().as_secs_f64(),
            ))?;
            Ok(if all_pass { 0 } else { 1 })
        }

        Command::Report { run } => {
            let root = run.clone().unwrap_or_else(|| cli.output.clone());
            if !root.exists() {
                bail!("run directory {} does not exist", root.display());
            }
            let tables = root.join("tables");
            std::fs::create_dir_all(&tables)?;
            let mut rendered = 0;
            let traj_dir = root.join("trajectories");
            if traj_dir.is_dir() {
                let mut rows = String::from("source,t,gevrey_norm,sobolev_norm,crossed\n");
                let mut names: Vec<_> = std::fs::read_dir(&traj_dir)?
                    .filter_map(|e| e.ok())
                    .map(|e| e.path())
                    .filter(|p| p.extension().is_some_and(|x| x == "jsonl"))
                    .collect();
                names.sort();
                for path in names {
                    let stem = path.file_stem().unwrap().to_string_lossy().to_string();
                    for line in std::fs::read_to_string(&path)?.lines() {
                        let v: serde_json::Value = serde_json::from_str(line)?;
                        rows.push_str(&format!(
                            "{},{},{},{},{}\n",
                            stem,
                            v["t"],
                            v["gevrey_norm"].as_f64().map(|x| x.to_string()).unwrap_or_default(),
                            v["sobolev_norm"],
                            v["crossed"]
                        ));
                    }
                    rendered += 1;
                }
                if rendered > 0 {
                    std::fs::write(tables.join("norms.csv"), rows)?;
                }
            }
            let report_json = root.join("report.json");
            if report_json.is_file() {
                let v: serde_json::Value =
                    serde_json::from_str(&std::fs::read_to_string(&report_json)?)?;
                if let Some(agg) = v.get("aggregate") {
                    let mut rows = String::from("key,value\n");
                    if let Some(map) = agg.as_object() {
                        for (k, val) in map {
                            rows.push_str(&format!("{k},{val}\n"));
                        }
                    }
                    std::fs::write(tables.join("summary.csv"), rows)?;
                    rendered += 1;
                }
            }
            if rendered == 0 {
                bail!("nothing to render in {}", root.display());
            }
            println!("rendered {rendered} table source(s) into {}", tables.display());
            Ok(0)
        }
    }
}

/// Least-squares slope of log(error) against log(dt).
fn empirical_order(errs: &[(f64, f64)]) -> f64 {
    let pts: Vec<(f64, f64)> = errs
        .iter()
        .filter(|(_, e)| *e > 0.0)
        .map(|(dt, e)| (dt.ln(), e.ln()))
        .collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mode_parser_accepts_spec_syntax() {
        let modes = parse_modes("(1,0):1").unwrap();
        assert_eq!(modes, vec![((1, 0), Complex64::new(1.0, 0.0))]);
        let modes = parse_modes("(1,0):1;(1,1):0.5,-0.25").unwrap();
        assert_eq!(modes.len(), 2);
        assert_eq!(modes[1], ((1, 1), Complex64::new(0.5, -0.25)));
        assert!(parse_modes("(1,0)").is_err());
        assert!(parse_modes("1,0:1").is_err());
    }

    #[test]
    fn order_fit_recovers_slope() {
        let errs = vec![(1e-2, 1e-3), (1e-3, 1e-4), (1e-4, 1e-5)];
        assert!((empirical_order(&errs) - 1.0).abs() < 1e-12);
    }
}
