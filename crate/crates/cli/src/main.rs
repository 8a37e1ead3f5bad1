use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use fracms::harness::{
    build_mesh, cfl_report, export_cloud_csv, fmt_f64, run_experiment, sweep, ExperimentConfig, Setup,
};
use fracms::Result;

#[derive(Parser)]
#[command(name = "fracms", version, about = "Fine and meshfree multiscale flow solvers for fractured porous media")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// TOML experiment config; every key is optional.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (overrides the config).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Point cloud seed (overrides the config).
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Build the fine mesh and print its statistics.
    Mesh,
    /// Build the point cloud and write cloud.csv.
    Cloud,
    /// Run the configured schemes and write errors, fields and a manifest.
    Run,
    /// Repeat `run` for several values of one parameter.
    Sweep {
        #[arg(long)]
        param: String,
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<f64>,
    },
    /// Report forward Euler stable time steps of the coarse system.
    Cfl,
}

fn load_config(common: &Common) -> Result<ExperimentConfig> {
    let mut cfg = match &common.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(out) = &common.out {
        cfg.run.out_dir = out.clone();
    }
    if let Some(seed) = common.seed {
        cfg.cloud.seed = seed;
    }
    Ok(cfg)
}

fn run(cli: Cli) -> Result<()> {
    let cfg = load_config(&cli.common).map_err(|e| e.in_stage("config"))?;
    match cli.command {
        Command::Mesh => {
            cfg.validate().map_err(|e| e.in_stage("config"))?;
            let mesh = build_mesh(&cfg).map_err(|e| e.in_stage("mesh"))?;
            println!("vertices        {}", mesh.n_vertices());
            println!("triangles       {}", mesh.n_triangles());
            println!("fracture edges  {}", mesh.fracture_edges.len());
            println!("fracture length {}", fmt_f64(mesh.fracture_length()));
            println!("dirichlet nodes {}", mesh.dirichlet_nodes().len());
            println!("max edge        {}", fmt_f64(mesh.cell_diameter()));
        }
        Command::Cloud => {
            cfg.validate().map_err(|e| e.in_stage("config"))?;
            let mesh = build_mesh(&cfg).map_err(|e| e.in_stage("mesh"))?;
            let build = fracms::cloud::build_point_cloud(&mesh, &cfg.cloud).map_err(|e| e.in_stage("cloud"))?;
            let path = cfg.run.out_dir.join("cloud.csv");
            export_cloud_csv(&build.cloud, &path).map_err(|e| e.in_stage("export"))?;
            println!(
                "N = {}, N_I = {}, N_E = {}, lloyd iterations = {}, radius repairs = {}",
                build.cloud.len(),
                build.cloud.n_implicit(),
                build.cloud.n_explicit(),
                build.lloyd.iterations,
                build.repairs
            );
            println!("wrote {}", path.display());
        }
        Command::Run => {
            let report = run_experiment(&cfg)?;
            println!("N_I = {}, N_E = {}", report.n_implicit, report.n_explicit);
            for s in &report.outcome.errors {
                println!(
                    "{} vs {}: max L2 {:.4}%, max H1 {:.4}%",
                    s.reference,
                    s.test,
                    s.max_l2(),
                    s.max_h1()
                );
            }
            println!("wrote {} files to {}", report.files.len(), cfg.run.out_dir.display());
        }
        Command::Sweep { param, values } => {
            for (v, report) in sweep(&cfg, &param, &values)? {
                let cfl = report.outcome.cfl;
                let err = report
                    .outcome
                    .errors
                    .iter()
                    .map(|s| format!("{}/{} L2 {:.4}% H1 {:.4}%", s.reference, s.test, s.max_l2(), s.max_h1()))
                    .collect::<Vec<_>>()
                    .join(", ");
                println!(
                    "{param} = {}: tau_stable(all) {} tau_stable(explicit) {} {err}",
                    fmt_f64(v),
                    cfl.map_or("-".into(), |c| format!("{:.4e}", c.tau_stable_all)),
                    cfl.and_then(|c| c.tau_stable_explicit).map_or("-".into(), |t| format!("{t:.4e}")),
                );
            }
        }
        Command::Cfl => {
            let setup = Setup::build(&cfg)?;
            let model = setup.coarse(cfg.basis.m)?;
            let c = cfl_report(&model.system).map_err(|e| e.in_stage("cfl"))?;
            println!("tau                  {}", fmt_f64(c.tau));
            println!("coarse dofs          {} ({} explicit)", c.coarse_dofs, c.explicit_dofs);
            println!("tau_stable(all)      {:.6e}", c.tau_stable_all);
            match c.tau_stable_explicit {
                Some(t) => println!("tau_stable(explicit) {t:.6e}"),
                None => println!("tau_stable(explicit) - (no explicit dofs)"),
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("fracms: {e}");
            ExitCode::FAILURE
        }
    }
}
