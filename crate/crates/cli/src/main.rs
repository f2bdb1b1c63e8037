use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use lbw_dd::driver::{compare, format_comparison, write_comparison_csv, RunReport, Scenario, Simulation};
use lbw_dd::verify::run_suite;

#[derive(Parser)]
#[command(name = "lbw-dd", version, about = "Schwarz-preconditioned thermo-elastic welding simulations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario and write its report.
    Run(Common),
    /// Run the scenario under each configuration of its [compare] table.
    Compare(Common),
    /// Check invariants and oracles on built-in fixtures.
    Verify {
        #[arg(long)]
        threads: Option<usize>,
    },
}

#[derive(Args)]
struct Common {
    /// Scenario TOML; built-in defaults when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Write VTK files of θ, ‖u‖ and ε₂₂ after every step.
    #[arg(long)]
    dump_fields: bool,
    #[arg(long)]
    threads: Option<usize>,
    /// Accepted for interface stability; every stage is deterministic.
    #[arg(long)]
    seed: Option<u64>,
}

fn init_threads(threads: Option<usize>) -> lbw_dd::Result<()> {
    if let Some(n) = threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| lbw_dd::Error::Configuration(format!("thread pool: {e}")))?;
    }
    Ok(())
}

fn load(config: &Option<PathBuf>) -> lbw_dd::Result<Scenario> {
    match config {
        Some(p) => Scenario::load(p),
        None => Ok(Scenario::default()),
    }
}

fn write_report(report: &RunReport, out: &Path) -> lbw_dd::Result<()> {
    report.write_csv(fs::File::create(out.join("report.csv"))?, true)?;
    report.write_json(fs::File::create(out.join("report.json"))?)?;
    Ok(())
}

fn run(args: &Common) -> lbw_dd::Result<bool> {
    init_threads(args.threads)?;
    let scenario = load(&args.config)?;
    fs::create_dir_all(&args.out)?;
    let mut sim = Simulation::new(scenario)?;
    let out = args.out.clone();
    let dump = args.dump_fields;
    let report = sim.run_with(|s| {
        if dump {
            s.write_fields(&out.join(format!("fields_{:04}.vtk", s.steps_taken())))?;
        }
        Ok(())
    })?;
    write_report(&report, &args.out)?;
    print!("{}", format_comparison(std::slice::from_ref(&report)));
    if let Some(f) = &report.failure {
        eprintln!("run aborted: {f}");
    }
    Ok(report.failure.is_none())
}

fn run_compare(args: &Common) -> lbw_dd::Result<bool> {
    init_threads(args.threads)?;
    let scenario = load(&args.config)?;
    fs::create_dir_all(&args.out)?;
    let reports = compare(&scenario)?;
    write_comparison_csv(&reports, fs::File::create(args.out.join("compare.csv"))?, true)?;
    write_comparison_csv(&reports, fs::File::create(args.out.join("compare_iterations.csv"))?, false)?;
    serde_json::to_writer_pretty(fs::File::create(args.out.join("compare.json"))?, &reports)?;
    print!("{}", format_comparison(&reports));
    Ok(reports.iter().all(|r| r.failure.is_none()))
}

fn verify(threads: Option<usize>) -> lbw_dd::Result<bool> {
    init_threads(threads)?;
    let checks = run_suite()?;
    for c in &checks {
        println!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    Ok(checks.iter().all(|c| c.passed))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run(a) => run(a),
        Command::Compare(a) => run_compare(a),
        Command::Verify { threads } => verify(*threads),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
