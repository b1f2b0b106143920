use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use ergg_cli::config::{load_config, resolve, ExperimentConfig, ResolvedConfig};
use ergg_cli::experiment::{generate_trial, run_gap_experiment, run_recovery_experiment};
use ergg_cli::report::write_reports;
use ergg_cli::{HarnessError, HarnessResult};
use ergg_core::bounds;
use ergg_core::cliques::{all_edge_clique_numbers, clique_stats_summary_json, write_clique_stats_files};
use ergg_core::filtering::apply_filter;
use ergg_core::graphgen::write_edge_list_file;
use ergg_core::metrics::{all_pairs_distances, recovery_stretch, write_distance_file};
use ergg_core::space::write_points_file;

#[derive(Parser)]
#[command(
    name = "ergg",
    about = "ER-perturbed random geometric graphs: generation, clique filtering, metric recovery",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// JSON experiment config (required by every subcommand).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Override the config's base seed.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Override the config's trial count.
    #[arg(long, global = true)]
    trials: Option<usize>,

    /// Override the config's worker count.
    #[arg(long, global = true)]
    workers: Option<usize>,

    /// Keep per-trial intermediate artifact files.
    #[arg(long, global = true)]
    keep_artifacts: bool,

    /// Run even when the density assumption fails.
    #[arg(long, global = true)]
    override_assumption_a: bool,

    /// Output directory (overrides the config's out_dir).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Sample the point cloud for trial 0 and write points.csv.
    Generate,
    /// Build, perturb and label trial 0's graph; write edges.txt.
    Perturb,
    /// Like perturb, and print per-class edge counts.
    Classify,
    /// Exact edge clique numbers for trial 0; write cliquestats files.
    Cliques,
    /// Run the configured filter on trial 0; write filtered.txt.
    Filter,
    /// Full single-trial pipeline; print the stretch report.
    Recover,
    /// Print every closed-form bound quantity for the configured params.
    Bounds,
    /// Monte Carlo experiments over many trials.
    Experiment {
        #[arg(value_enum)]
        kind: ExperimentKind,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ExperimentKind {
    Gap,
    Recovery,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn load_and_resolve(cli: &Cli) -> HarnessResult<ResolvedConfig> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| HarnessError::Config("--config <path> is required".into()))?;
    let mut config: ExperimentConfig = load_config(path)?;
    if let Some(seed) = cli.seed {
        config.base_seed = seed;
    }
    if let Some(trials) = cli.trials {
        config.trials = trials;
    }
    if let Some(workers) = cli.workers {
        config.workers = Some(workers);
    }
    if cli.keep_artifacts {
        config.keep_artifacts = true;
    }
    if cli.override_assumption_a {
        config.override_assumption_a = true;
    }
    if let Some(out) = &cli.out {
        config.out_dir = Some(out.clone());
    }
    resolve(config)
}

fn out_dir(resolved: &ResolvedConfig) -> PathBuf {
    resolved
        .config
        .out_dir
        .clone()
        .unwrap_or_else(|| PathBuf::from("ergg-out"))
}

fn run(cli: Cli) -> HarnessResult<()> {
    let resolved = load_and_resolve(&cli)?;
    let dir = out_dir(&resolved);
    match cli.command {
        Command::Generate => {
            std::fs::create_dir_all(&dir)?;
            let (pg, _, _) = generate_trial(&resolved, 0)?;
            let path = dir.join("points.csv");
            write_points_file(&pg.truth.cloud, &path)?;
            println!("wrote {}", path.display());
        }
        Command::Perturb | Command::Classify => {
            std::fs::create_dir_all(&dir)?;
            let (pg, labels, _) = generate_trial(&resolved, 0)?;
            let path = dir.join("edges.txt");
            write_edge_list_file(&pg, &labels, &path)?;
            if matches!(cli.command, Command::Classify) {
                let count = |want| labels.iter().filter(|&&l| l == want).count();
                println!(
                    "{}",
                    json!({
                        "observed_edges": pg.edges.len(),
                        "good": count(ergg_core::EdgeLabel::Good),
                        "bad": count(ergg_core::EdgeLabel::Bad),
                        "indeterminate": count(ergg_core::EdgeLabel::Indeterminate),
                    })
                );
            }
            println!("wrote {}", path.display());
        }
        Command::Cliques => {
            std::fs::create_dir_all(&dir)?;
            let (pg, labels, _) = generate_trial(&resolved, 0)?;
            let stats = all_edge_clique_numbers(&pg, &labels, resolved.config.clique_budget)?;
            let csv = dir.join("cliquestats.csv");
            let json_path = dir.join("cliquestats_summary.json");
            write_clique_stats_files(&stats, &csv, &json_path)?;
            println!("{}", clique_stats_summary_json(&stats));
            println!("wrote {} and {}", csv.display(), json_path.display());
        }
        Command::Filter => {
            std::fs::create_dir_all(&dir)?;
            let (pg, _, _) = generate_trial(&resolved, 0)?;
            let filter = resolved.filter_config().resolve()?;
            let fg = apply_filter(
                &pg,
                filter,
                resolved.config.tau,
                resolved.config.clique_budget,
                resolved.config.keep_artifacts,
            )?;
            let path = dir.join("filtered.txt");
            ergg_core::filtering::write_filtered_file(&fg, &path)?;
            println!(
                "{}",
                json!({
                    "observed_edges": fg.records.len(),
                    "kept": fg.kept_count(),
                    "removed": fg.records.len() - fg.kept_count(),
                })
            );
            println!("wrote {}", path.display());
        }
        Command::Recover => {
            std::fs::create_dir_all(&dir)?;
            let (pg, labels, _) = generate_trial(&resolved, 0)?;
            let filter = resolved.filter_config().resolve()?;
            let fg = apply_filter(
                &pg,
                filter,
                resolved.config.tau,
                resolved.config.clique_budget,
                false,
            )?;
            let stretch = recovery_stretch(&pg, &labels, &fg)?;
            let report = json!({
                "alpha": if stretch.approx.alpha.is_infinite() { json!("inf") } else { json!(stretch.approx.alpha) },
                "worst_pair": stretch.approx.worst_pair,
                "connectivity_mismatch": stretch.approx.connectivity_mismatch,
                "e1": stretch.e1,
                "e2": stretch.e2,
                "e3": stretch.e3,
                "survivors": fg.kept_count(),
                "observed_edges": fg.records.len(),
            });
            println!("{}", serde_json::to_string_pretty(&report).unwrap());
            std::fs::write(
                dir.join("stretch_report.json"),
                serde_json::to_string_pretty(&report).unwrap(),
            )?;
            if resolved.config.keep_artifacts {
                write_points_file(&pg.truth.cloud, &dir.join("points.csv"))?;
                write_edge_list_file(&pg, &labels, &dir.join("edges.txt"))?;
                ergg_core::filtering::write_filtered_file(&fg, &dir.join("filtered.txt"))?;
                write_distance_file(
                    &all_pairs_distances(pg.truth.adjacency()),
                    &dir.join("distances_truth.csv"),
                )?;
                write_distance_file(
                    &all_pairs_distances(&fg.survivors),
                    &dir.join("distances_filtered.csv"),
                )?;
            }
        }
        Command::Bounds => {
            let doc = bounds_report(&resolved)?;
            println!("{}", serde_json::to_string_pretty(&doc).unwrap());
            if resolved.config.out_dir.is_some() {
                std::fs::create_dir_all(&dir)?;
                std::fs::write(
                    dir.join("bounds.json"),
                    serde_json::to_string_pretty(&doc).unwrap(),
                )?;
            }
        }
        Command::Experiment { kind } => {
            std::fs::create_dir_all(&dir)?;
            match kind {
                ExperimentKind::Gap => {
                    let (records, summary) = run_gap_experiment(&resolved)?;
                    let (csv, json_path) =
                        write_reports(&records, &summary, &resolved, "gap", &dir)?;
                    println!("{}", serde_json::to_string_pretty(&summary).unwrap());
                    println!("wrote {} and {}", csv.display(), json_path.display());
                }
                ExperimentKind::Recovery => {
                    let (records, summary) = run_recovery_experiment(&resolved)?;
                    let (csv, json_path) =
                        write_reports(&records, &summary, &resolved, "recovery", &dir)?;
                    println!("{}", serde_json::to_string_pretty(&summary).unwrap());
                    println!("wrote {} and {}", csv.display(), json_path.display());
                }
            }
        }
    }
    Ok(())
}

/// Every closed-form quantity for the configured parameters. The target
/// clique size K is taken from tau (floored at 2); the block and two-ball
/// expectations are instantiated at the ball-occupancy cap 3*rho*s*n.
fn bounds_report(resolved: &ResolvedConfig) -> HarnessResult<serde_json::Value> {
    let config = &resolved.config;
    let n = config.n as u64;
    let s = resolved.mass.s;
    let rho = resolved.mass.rho;
    let sn = resolved.sn();
    let k_target = (config.tau.round() as u64).max(2);

    let params = bounds::ModelParams {
        n,
        s,
        rho,
        p: config.p,
        q: config.q,
        k: k_target,
        c1: config.c1,
        c2: config.c2,
        c3: config.c3,
    };
    let tau_bound = bounds::tau_good_edge_bound(config.p, s, n).ok();
    let q_ins = bounds::q_threshold(&params, false)?;
    let q_combined = bounds::q_threshold(&params, true).ok();

    let n_max = (3.0 * rho * sn).floor() as u64;
    let block = bounds::expected_uv_cliques(&bounds::BlockProfile {
        block_sizes: vec![n_max.max(1)],
        k: k_target.saturating_sub(2),
        q: config.q,
        p: config.p,
    })?;
    let two_balls = bounds::expected_uv_cliques_two_balls(
        n_max.max(1),
        n_max.max(1),
        k_target.saturating_sub(2),
        config.q,
        config.p,
    )?;

    let er_n = (sn / 4.0).floor() as u64;
    let p_bar = 1.0 - config.p;
    let er = if er_n >= 2 && p_bar > 0.0 && p_bar < 1.0 {
        bounds::er_clique_quantities(er_n, p_bar).ok()
    } else {
        None
    };
    let janson = er
        .as_ref()
        .and_then(|er| bounds::janson_bounds(er.zeta, er.delta).ok());

    Ok(json!({
        "params": {
            "n": n,
            "r": resolved.r,
            "s": s,
            "rho": rho,
            "sn": sn,
            "p": config.p,
            "q": config.q,
            "k_target": k_target,
            "c1": config.c1,
            "c2": config.c2,
            "c3": config.c3,
            "doubling_l": config.doubling_l,
            "besicovitch_beta": config.besicovitch_beta,
        },
        "assumption_a": {
            "s_min": bounds::assumption_a_s_min(n),
            "s": s,
            "holds": resolved.assumption_a,
        },
        "tau_good_edge_bound": tau_bound,
        "tau_good_edge_bound_insertion_only": bounds::tau_good_edge_bound_insertion_only(s, n),
        "q_threshold_insertion_only": q_ins,
        "q_threshold_combined": q_combined,
        "expected_uv_cliques_block": {
            "clique_size": k_target,
            "block_size": n_max.max(1),
            "value": block.value,
            "ln_value": block.ln_value,
        },
        "expected_uv_cliques_two_balls": {
            "clique_size": k_target,
            "ball_size": n_max.max(1),
            "value": two_balls.value,
            "ln_value": two_balls.ln_value,
        },
        "er_clique": er,
        "janson": janson,
    }))
}
