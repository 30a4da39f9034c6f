mod commands;
mod input;

use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use crate::commands::*;

#[derive(Debug, Parser)]
#[command(name = "fsnormal", version, about = "Finite-state selection, gambling and normality experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write a generated sequence as an NSEQ1 file.
    Gen(GenArgs),
    /// Word frequencies of a sequence prefix.
    Analyze(AnalyzeArgs),
    /// Run a selector over a sequence.
    Select(SelectArgs),
    /// Run a gambler over a sequence.
    Gamble(GambleArgs),
    /// Search for a divergent word and build a gambler that exploits it.
    Adversary(AdversaryArgs),
    /// Markov chain, stationary law and decay exponents of an automaton.
    AnalyzeAutomaton(AnalyzeAutomatonArgs),
    /// Compare a probabilistic automaton with its lifted deterministic form.
    DerandCheck(DerandArgs),
    /// Run an experiment suite.
    Experiment(ExperimentArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Gen(a) => gen(a),
        Command::Analyze(a) => analyze(a),
        Command::Select(a) => select(a),
        Command::Gamble(a) => gamble(a),
        Command::Adversary(a) => adversary(a),
        Command::AnalyzeAutomaton(a) => analyze_automaton(a),
        Command::DerandCheck(a) => derand_check(a),
        Command::Experiment(a) => experiment(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            let guard = e.chain().any(|c| c.downcast_ref::<fsnormal::Error>().is_some_and(|e| e.is_guard()));
            ExitCode::from(if guard { 3 } else { 2 })
        }
    }
}
