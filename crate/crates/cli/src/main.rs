mod audit;
mod budget;
mod codes;
mod experiment;
mod io;

use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Deserialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MechanismArg {
    Lsh,
    Lshrr,
    Laplsh,
    Uniform,
}

/// Privacy-preserving LSH: budgets, hashing, perturbation, matching and audits.
#[derive(Debug, Parser)]
#[command(name = "lshxdp", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Privacy budgets and the XDP-to-LDP table.
    Budget(budget::BudgetArgs),
    /// Plain LSH codes for every user.
    Hash(codes::HashArgs),
    /// Perturbed codes for every user.
    Perturb(codes::PerturbArgs),
    /// Nearest neighbors, exact or over perturbed codes.
    Knn(codes::KnnArgs),
    /// Utility-loss sweep described by a TOML config.
    Experiment(experiment::ExperimentArgs),
    /// Statistical and analytic checks; exits 1 when a check fails.
    Audit(audit::AuditArgs),
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Budget(a) => budget::run(a).map(|_| true),
        Command::Hash(a) => codes::run_hash(a).map(|_| true),
        Command::Perturb(a) => codes::run_perturb(a).map(|_| true),
        Command::Knn(a) => codes::run_knn(a).map(|_| true),
        Command::Experiment(a) => experiment::run(a).map(|_| true),
        Command::Audit(a) => audit::run(a),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("check failed");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
