use std::path::PathBuf;

use clap::parser::ValueSource;
use clap::{ArgMatches, Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

pub const DEFAULT_SHOTS: u64 = 10_000;

/// Contextuality of Pauli-labelled quadrangles: geometry, hidden-variable
/// bounds, game values and exact quantum simulation.
#[derive(Debug, Parser)]
#[command(name = "eloily", version, about)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// grid, doily, eloily, or a path to a geometry file
    #[arg(long, global = true, default_value = "eloily")]
    pub geometry: String,
    /// Number of players (2 or 4)
    #[arg(long, global = true, default_value_t = 2, value_parser = parse_players)]
    pub players: usize,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Sampled rounds or random trials
    #[arg(long, global = true, default_value_t = DEFAULT_SHOTS, value_parser = clap::value_parser!(u64).range(1..))]
    pub shots: u64,
    /// Search threads [default: available cores]
    #[arg(long, global = true, value_parser = clap::value_parser!(u64).range(1..1025))]
    pub workers: Option<u64>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Write the report here instead of stdout
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
}

fn parse_players(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(n @ (2 | 4)) => Ok(n),
        _ => Err(format!("players must be 2 or 4, got {s:?}")),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Points, lines, signs, spread status and embedded subgeometries
    Geometry,
    /// Degree of contextuality and the hidden-variable bound
    Contextuality,
    /// Classical or quantum value of the point-line game
    Game(GameArgs),
    /// Cubic invariant, sign dressing and doily Pfaffian checks
    Invariant,
    /// Runs the full acceptance suite
    VerifyAll,
}

#[derive(Debug, Args)]
pub struct GameArgs {
    #[arg(long, value_enum, default_value_t = Mode::Classical)]
    pub mode: Mode,
    /// How quantum players measure a line
    #[arg(long, value_enum, default_value_t = ProtocolArg::Delegation)]
    pub protocol: ProtocolArg,
    /// Sampled round transcripts to include in the report
    #[arg(long, default_value_t = 0)]
    pub transcripts: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Classical,
    Quantum,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProtocolArg {
    Delegation,
    Direct,
    ThreeMeasurements,
}

/// Effective settings shared by every command.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub command: String,
    pub geometry: String,
    pub players: usize,
    pub seed: u64,
    pub shots: u64,
    pub workers: usize,
    pub format: Format,
    /// Flags left at their default value.
    pub defaulted: Vec<&'static str>,
}

impl RunConfig {
    pub fn new(cli: &Cli, matches: &ArgMatches) -> Self {
        let g = &cli.global;
        let (name, sub) = matches.subcommand().expect("subcommand is required");
        let defaulted = ["geometry", "players", "seed", "shots", "workers", "format"]
            .into_iter()
            .filter(|id| {
                let source = sub.value_source(id).or_else(|| matches.value_source(id));
                !matches!(source, Some(ValueSource::CommandLine))
            })
            .collect();
        let workers = g.workers.map(|w| w as usize).unwrap_or_else(|| {
            std::thread::available_parallelism()
                .map(|n| n.get())
                .unwrap_or(1)
        });
        RunConfig {
            command: name.to_string(),
            geometry: g.geometry.clone(),
            players: g.players,
            seed: g.seed,
            shots: g.shots,
            workers,
            format: g.format,
            defaulted,
        }
    }
}
