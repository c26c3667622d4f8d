//! `borda`: command-line front end for borda-core.
//!
//! Exit codes: 0 on success, 1 on invalid input or usage, 2 on I/O failure.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use borda_core::exact::{optimal_with_budget, solve_perm_sum, OptimalOutcome, PermSumInstance};
use borda_core::formats::{
    parse_election, parse_grid, parse_relaxed_matrix, parse_score_vector, write_election, write_grid,
    write_score_vector,
};
use borda_core::generators::{generate, GenSpec, Model};
use borda_core::hardness::{decode_pmrds, reduce_perm_sum, solve_pmrds, to_pmrds};
use borda_core::harness::{read_records, run_experiment, summarize, ExperimentConfig};
use borda_core::heuristics::{average_fit, largest_fit, reverse};
use borda_core::matrices::{matrix_to_votes, relaxed_to_strict};
use borda_core::{apply_votes, tally, Error, ManipulationProblem, Result, TieBreakPolicy, Vote};

#[derive(Parser, Debug)]
#[command(name = "borda", version, about = "Coalition manipulation of the Borda voting rule")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Borda scores of an election file.
    Tally {
        #[arg(long)]
        input: PathBuf,
        /// Emit a score-vector file with this preferred candidate.
        #[arg(long)]
        d: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Find manipulating ballots for a score-vector file.
    Manipulate {
        #[arg(long, value_enum)]
        method: Method,
        #[arg(long, default_value = "fewest-placed")]
        tiebreak: TieBreakPolicy,
        #[arg(long)]
        input: PathBuf,
        /// Print the placement log (largest-fit and average-fit).
        #[arg(long)]
        trace: bool,
        /// Cap on exact search nodes per coalition size (optimal only).
        #[arg(long)]
        node_budget: Option<u64>,
    },
    /// Random election file.
    Generate {
        #[arg(long, value_enum)]
        model: ModelArg,
        #[arg(long)]
        m: usize,
        #[arg(long)]
        voters: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Turn a relaxed matrix file into a proper manipulation matrix.
    ConvertMatrix {
        #[arg(long)]
        input: PathBuf,
        /// Print the rows as an election file instead.
        #[arg(long)]
        votes: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Hardness instances.
    #[command(subcommand)]
    Reduce(Reduce),
    /// Solve a Permutation Sum instance by brute force.
    PermSum {
        /// Space separated integers, e.g. "3 3".
        #[arg(long)]
        xs: String,
    },
    /// Two-manipulator instances as permutation matrices with fixed
    /// diagonal sums.
    #[command(subcommand)]
    Pmrds(Pmrds),
    /// Run the heuristic comparison over random elections.
    Experiment(ExperimentArgs),
    /// Summary table of an experiment CSV.
    Summarize {
        #[arg(long)]
        input: PathBuf,
    },
}

#[derive(Subcommand, Debug)]
enum Reduce {
    /// Election whose 2-manipulator problem encodes a Permutation Sum instance.
    PermSum {
        #[arg(long)]
        xs: String,
        /// Election file for the non-manipulators.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand, Debug)]
enum Pmrds {
    /// Diagonal sums for a score-vector file.
    Encode {
        #[arg(long)]
        input: PathBuf,
    },
    /// Ballots from a permutation-matrix solution.
    Decode {
        #[arg(long)]
        input: PathBuf,
        /// Grid file: one row of 0/1 entries per line.
        #[arg(long)]
        grid: PathBuf,
    },
    /// Encode, solve and decode.
    Solve {
        #[arg(long)]
        input: PathBuf,
    },
}

#[derive(Args, Debug)]
struct ExperimentArgs {
    #[arg(long, value_enum, value_delimiter = ',', default_value = "uniform,urn")]
    models: Vec<ModelArg>,
    #[arg(long, value_delimiter = ',', default_value = "4,8,16")]
    m: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "4,8,16,32,64,128")]
    voters: Vec<usize>,
    #[arg(long, default_value_t = 200)]
    trials: usize,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    /// Cap on exact search nodes per coalition size; 0 means no cap.
    #[arg(long, default_value_t = 1_000_000)]
    node_budget: u64,
    /// Record wall-clock times (the CSV is then no longer reproducible).
    #[arg(long)]
    timings: bool,
    /// Worker threads; 0 uses every core.
    #[arg(long, default_value_t = 0)]
    workers: usize,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Method {
    Reverse,
    LargestFit,
    AverageFit,
    Optimal,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModelArg {
    Uniform,
    Urn,
}

impl From<ModelArg> for Model {
    fn from(m: ModelArg) -> Self {
        match m {
            ModelArg::Uniform => Model::Uniform,
            ModelArg::Urn => Model::Urn,
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let mut out = io::stdout().lock();
    match run(cli.command, &mut out) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let _ = out.flush();
            eprintln!("error: {e}");
            ExitCode::from(if e.is_io() { 2 } else { 1 })
        }
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| with_path(e, path))
}

fn with_path(e: io::Error, path: &Path) -> Error {
    Error::Io(io::Error::new(e.kind(), format!("{}: {e}", path.display())))
}

/// Writes to `path`, or to `out` when there is no path.
fn emit(out: &mut impl Write, path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| with_path(e, p))?,
        None => out.write_all(text.as_bytes())?,
    }
    Ok(())
}

fn parse_xs(xs: &str) -> Result<PermSumInstance> {
    let xs = xs
        .split(|c: char| c.is_whitespace() || c == ',')
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<i64>().map_err(|_| Error::InvalidInstance(format!("bad integer {t:?}"))))
        .collect::<Result<Vec<_>>>()?;
    PermSumInstance::new(xs)
}

fn join<T: ToString>(xs: &[T]) -> String {
    xs.iter().map(T::to_string).collect::<Vec<_>>().join(" ")
}

fn write_ballots(out: &mut impl Write, ballots: &[Vote]) -> Result<()> {
    writeln!(out, "ballots:")?;
    for b in ballots {
        writeln!(out, "  {b}")?;
    }
    Ok(())
}

fn run(command: Command, out: &mut impl Write) -> Result<()> {
    match command {
        Command::Tally { input, d, out: path } => {
            let (m, votes) = parse_election(&read(&input)?)?;
            let scores = tally(&votes, m)?;
            let text = match d {
                Some(d) => write_score_vector(&ManipulationProblem::new(scores, d)?),
                None => format!("{}\n", join(scores.scores())),
            };
            emit(out, path.as_deref(), &text)
        }
        Command::Manipulate { method, tiebreak, input, trace, node_budget } => {
            let problem = parse_score_vector(&read(&input)?)?;
            manipulate(out, &problem, method, tiebreak, trace, node_budget)
        }
        Command::Generate { model, m, voters, seed, out: path } => {
            let spec = GenSpec::new(model.into(), m, voters, seed)?;
            emit(out, path.as_deref(), &write_election(m, &generate(&spec)))
        }
        Command::ConvertMatrix { input, votes, out: path } => {
            let b = relaxed_to_strict(&parse_relaxed_matrix(&read(&input)?)?)?;
            let text = if votes { write_election(b.m(), &matrix_to_votes(&b)) } else { b.to_string() };
            emit(out, path.as_deref(), &text)
        }
        Command::Reduce(Reduce::PermSum { xs, out: path }) => {
            let inst = parse_xs(&xs)?;
            let (problem, red) = reduce_perm_sum(&inst)?;
            let text = write_election(problem.m(), &red.votes);
            match path {
                Some(p) => {
                    fs::write(&p, text).map_err(|e| with_path(e, &p))?;
                    writeln!(out, "votes: {}", red.votes.len())?;
                    writeln!(out, "d: {}", red.d)?;
                    writeln!(out, "offset: {}", red.offset)?;
                    writeln!(out, "scores: {}", join(red.target_scores.scores()))?;
                    Ok(())
                }
                None => emit(out, None, &text),
            }
        }
        Command::PermSum { xs } => {
            match solve_perm_sum(&parse_xs(&xs)?) {
                Some(s) => {
                    writeln!(out, "sigma: {}", join(&s.sigma))?;
                    writeln!(out, "pi: {}", join(&s.pi))?;
                }
                None => writeln!(out, "UNSAT")?,
            }
            Ok(())
        }
        Command::Pmrds(cmd) => pmrds(out, cmd),
        Command::Experiment(args) => experiment(out, args),
        Command::Summarize { input } => {
            write!(out, "{}", summarize(&read_records(&input)?))?;
            Ok(())
        }
    }
}

fn manipulate(
    out: &mut impl Write,
    problem: &ManipulationProblem,
    method: Method,
    tiebreak: TieBreakPolicy,
    trace: bool,
    node_budget: Option<u64>,
) -> Result<()> {
    let result = match method {
        Method::Reverse => reverse(problem)?,
        Method::LargestFit => largest_fit(problem)?,
        Method::AverageFit => average_fit(problem, tiebreak)?,
        Method::Optimal => {
            return match optimal_with_budget(problem, node_budget, None) {
                OptimalOutcome::Optimal(r) => {
                    let ballots = matrix_to_votes(&relaxed_to_strict(&r.witness)?);
                    let fin = apply_votes(problem.base(), &ballots)?;
                    writeln!(out, "n_used: {}", r.n_opt)?;
                    write_ballots(out, &ballots)?;
                    writeln!(out, "final: {fin}")?;
                    Ok(())
                }
                OptimalOutcome::Unknown { undecided } => {
                    writeln!(out, "n_used: unknown")?;
                    writeln!(out, "undecided at: {undecided}")?;
                    Ok(())
                }
            };
        }
    };
    writeln!(out, "n_used: {}", result.n_used)?;
    write_ballots(out, &result.ballots)?;
    writeln!(out, "final: {}", result.final_scores)?;
    if trace {
        if let Some(steps) = &result.trace {
            writeln!(out, "trace: {}", join(steps))?;
        }
    }
    Ok(())
}

fn pmrds(out: &mut impl Write, cmd: Pmrds) -> Result<()> {
    match cmd {
        Pmrds::Encode { input } => {
            let inst = to_pmrds(&parse_score_vector(&read(&input)?)?)?;
            writeln!(out, "n: {}", inst.n())?;
            writeln!(out, "diagonal sums: {}", join(inst.diag_sums()))?;
        }
        Pmrds::Decode { input, grid } => {
            let problem = parse_score_vector(&read(&input)?)?;
            let dec = decode_pmrds(&parse_grid(&read(&grid)?)?, &problem)?;
            writeln!(out, "first: {}", join(&dec.first))?;
            writeln!(out, "second: {}", join(&dec.second))?;
            write_ballots(out, &dec.ballots(&problem))?;
        }
        Pmrds::Solve { input } => {
            let problem = parse_score_vector(&read(&input)?)?;
            match solve_pmrds(&to_pmrds(&problem)?)? {
                Some(grid) => {
                    write!(out, "{}", write_grid(&grid))?;
                    let dec = decode_pmrds(&grid, &problem)?;
                    write_ballots(out, &dec.ballots(&problem))?;
                }
                None => writeln!(out, "UNSAT")?,
            }
        }
    }
    Ok(())
}

fn experiment(out: &mut impl Write, args: ExperimentArgs) -> Result<()> {
    let mut voters = args.voters;
    voters.sort_unstable();
    voters.dedup();
    let config = ExperimentConfig {
        models: args.models.into_iter().map(Model::from).collect(),
        m_values: args.m,
        voter_counts: voters,
        trials: args.trials,
        seed: args.seed,
        node_budget: (args.node_budget > 0).then_some(args.node_budget),
        output: args.out,
        timings: args.timings,
        workers: args.workers,
    };
    let result = run_experiment(&config)?;
    write!(out, "{}", result.summary)?;
    Ok(())
}
