//! `latcomm`: build, verify and stress-test positive-operator
//! realizations of diagonal operators on weighted coordinate lattices.
//!
//! Exit codes: 0 all checks passed, 1 usage or I/O error, 2 a
//! mathematical check failed (invalid certificate, counterexample
//! found). Every run is deterministic in (command, seed, config).

use std::path::PathBuf;
use std::process;

use clap::{Args, Parser, Subcommand, ValueEnum};

use latcomm_core::search::SearchTarget;
use latcomm_core::ToleranceConfig;

mod commands;
mod input;
mod output;

use output::{CliError, Verdict};

#[derive(Parser)]
#[command(
    name = "latcomm",
    version,
    about = "Positive operators on weighted coordinate lattices: \
             diagonal factorizations, self-commutator certificates, \
             falsification campaigns and residual search.",
    propagate_version = true
)]
struct Cli {
    /// Root seed for every randomized component.
    #[arg(long, global = true, env = "LATTICE_COMM_SEED", default_value_t = 0)]
    seed: u64,

    /// Tolerance for float equality checks.
    #[arg(long, global = true, default_value_t = 1e-10, value_name = "TOL")]
    eq_tol: f64,

    /// Slack below zero tolerated by positivity checks.
    #[arg(long, global = true, default_value_t = 1e-12, value_name = "TOL")]
    pos_tol: f64,

    /// Exact rational arithmetic where the construction supports it.
    /// Inputs then must have exact square roots where roots are taken.
    #[arg(long, global = true)]
    exact: bool,

    /// Write the full JSON report to this file.
    #[arg(long, global = true, value_name = "FILE")]
    json: Option<PathBuf>,

    /// Suppress the human-readable summary on stdout.
    #[arg(long, global = true)]
    quiet: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Diagonal factorizations through dyadic step spaces.
    Construct {
        #[command(subcommand)]
        which: ConstructCmd,
    },
    /// Self-commutator certificates for diagonal targets.
    Selfcomm {
        #[command(subcommand)]
        which: SelfcommCmd,
    },
    /// Re-check a certificate file from scratch.
    Verify {
        /// Certificate JSON (CSV matrix references resolve relative to it).
        #[arg(long, value_name = "FILE")]
        cert: PathBuf,
    },
    /// Randomized campaigns against the rigidity statements.
    Falsify {
        #[command(subcommand)]
        which: FalsifyCmd,
    },
    /// Projected-gradient search for small commutator residuals.
    Search(SearchArgs),
    /// Scripted tour: one construction and one campaign per statement.
    Demo,
}

#[derive(Subcommand)]
enum ConstructCmd {
    /// X with X*X = diag(d), sequence space into a dyadic step space.
    X {
        #[command(flatten)]
        data: DataArgs,
        /// Dyadic depth (defaults to the number of diagonal entries).
        #[arg(long)]
        depth: Option<usize>,
    },
    /// Y = sqrt(XX*) on the dyadic step space.
    Y {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long)]
        depth: Option<usize>,
    },
    /// Entrywise-nonnegative isometry (d = identity).
    Isometry {
        /// Sequence dimension.
        #[arg(long, default_value_t = 2)]
        n: usize,
        #[arg(long)]
        depth: Option<usize>,
        #[arg(long, value_name = "DIR")]
        dump_matrices: Option<PathBuf>,
    },
    /// Interval averaging of a dyadic step function; exact rationals.
    Averaging {
        /// Step-function coordinates, e.g. "1,-1/2,3/4" or a file.
        #[arg(long)]
        d: String,
        #[arg(long, value_name = "DIR")]
        dump_matrices: Option<PathBuf>,
    },
}

#[derive(Args)]
struct DataArgs {
    /// Diagonal entries: comma/whitespace separated tokens ("1,0.5,1/4")
    /// or a path to a file of tokens.
    #[arg(long)]
    d: String,
    /// Directory for matrix CSV dumps (JSON then references them).
    #[arg(long, value_name = "DIR")]
    dump_matrices: Option<PathBuf>,
}

#[derive(Subcommand)]
enum SelfcommCmd {
    /// Split a diagonal into geometrically capped rows.
    Partition {
        #[arg(long)]
        d: String,
        /// Number of rows.
        #[arg(long, default_value_t = 3)]
        k: usize,
    },
    /// Certified block shift realizing diag(d) as a self-commutator.
    Construct {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long, default_value_t = 3)]
        k: usize,
    },
    /// Identity-block target on a sequence space next to dyadic copies.
    Mixed {
        #[command(flatten)]
        data: DataArgs,
        /// Dyadic depth of each copy (defaults to the entry count).
        #[arg(long)]
        depth: Option<usize>,
        #[arg(long, default_value_t = 3)]
        copies: usize,
    },
    /// Two-block diagonal as a sum of two certified self-commutators.
    Sum {
        #[command(flatten)]
        data: DataArgs,
        /// Second block's diagonal entries.
        #[arg(long)]
        d2: String,
        /// Kind of the first block's space.
        #[arg(long, value_enum, default_value_t = BlockKind::Sequence)]
        first: BlockKind,
        /// Kind of the second block's space.
        #[arg(long, value_enum, default_value_t = BlockKind::Sequence)]
        second: BlockKind,
        #[arg(long, default_value_t = 3)]
        copies: usize,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BlockKind {
    /// Unit weights.
    Sequence,
    /// Weight 2^-(k+1) on coordinate k.
    Dyadic,
}

#[derive(Subcommand)]
enum FalsifyCmd {
    /// Positive idempotents with nonnegative self-commutator must be
    /// orthogonal projections.
    Idempotent(CampaignArgs),
    /// A nonnegative self-commutator of a nonnegative operator
    /// vanishes (finite model of the compactness argument).
    Powercompact(CampaignArgs),
    /// Entrywise power inequality for operators whose self-commutator
    /// is entrywise nonnegative.
    Powerineq {
        #[command(flatten)]
        common: CampaignArgs,
        /// Highest power to test.
        #[arg(long, default_value_t = 5)]
        n_max: usize,
    },
    /// Positive-trace diagonals are never plain self-commutators.
    Trace(CampaignArgs),
}

#[derive(Args)]
struct CampaignArgs {
    /// Largest space dimension sampled.
    #[arg(long, default_value_t = 6)]
    n: usize,
    #[arg(long, default_value_t = 1000)]
    trials: usize,
}

#[derive(Args)]
struct SearchArgs {
    /// Sequence block dimension.
    #[arg(long, default_value_t = 2)]
    n: usize,
    /// Dyadic depth of each remaining block.
    #[arg(long, default_value_t = 2)]
    depth: usize,
    /// Total blocks (one sequence block plus dyadic copies).
    #[arg(long, default_value_t = 3)]
    copies: usize,
    #[arg(long, default_value_t = 500)]
    iters: usize,
    /// Initial gradient step size.
    #[arg(long, default_value_t = 0.05)]
    step: f64,
    /// Step shrink factor on rejected steps, in (0, 1).
    #[arg(long, default_value_t = 0.5)]
    backtrack: f64,
    #[arg(long, default_value_t = 4)]
    restarts: usize,
    /// Stop a restart once a step improves the residual by less.
    #[arg(long, default_value_t = 1e-12)]
    stop_tol: f64,
    #[arg(long, value_enum, default_value_t = TargetArg::DyadicIdentity)]
    target: TargetArg,
    /// Write the winning restart's residual trace as CSV.
    #[arg(long, value_name = "FILE")]
    history: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum TargetArg {
    /// Identity on the sequence block, zero elsewhere.
    SeqIdentity,
    /// Identity on the first dyadic block, zero elsewhere.
    DyadicIdentity,
    /// Zero target (sanity baseline).
    Zero,
}

impl TargetArg {
    fn to_core(self) -> SearchTarget {
        match self {
            TargetArg::SeqIdentity => SearchTarget::SequenceIdentity,
            TargetArg::DyadicIdentity => SearchTarget::DyadicIdentity,
            TargetArg::Zero => SearchTarget::Zero,
        }
    }
}

/// Everything a command needs besides its own flags.
pub struct Ctx {
    pub seed: u64,
    pub cfg: ToleranceConfig,
    pub exact: bool,
    pub json: Option<PathBuf>,
    pub quiet: bool,
}

impl Ctx {
    fn from_cli(cli: &Cli) -> Self {
        Ctx {
            seed: cli.seed,
            cfg: ToleranceConfig {
                eq_tol: cli.eq_tol,
                pos_tol: cli.pos_tol,
                ..ToleranceConfig::default()
            },
            exact: cli.exact,
            json: cli.json.clone(),
            quiet: cli.quiet,
        }
    }

    pub fn say(&self, line: &str) {
        if !self.quiet {
            println!("{line}");
        }
    }

    /// Writes the report to the `--json` path when one was given.
    pub fn emit<T: serde::Serialize>(&self, doc: &T) -> Result<(), CliError> {
        match &self.json {
            Some(path) => output::write_json(path, doc),
            None => Ok(()),
        }
    }
}

fn run(cli: Cli) -> Result<Verdict, CliError> {
    let ctx = Ctx::from_cli(&cli);
    match cli.command {
        Command::Construct { which } => match which {
            ConstructCmd::X { data, depth } => {
                commands::construct::x(&ctx, &data.d, depth, data.dump_matrices.as_deref())
            }
            ConstructCmd::Y { data, depth } => {
                commands::construct::y(&ctx, &data.d, depth, data.dump_matrices.as_deref())
            }
            ConstructCmd::Isometry { n, depth, dump_matrices } => {
                commands::construct::isometry(&ctx, n, depth, dump_matrices.as_deref())
            }
            ConstructCmd::Averaging { d, dump_matrices } => {
                commands::construct::averaging(&ctx, &d, dump_matrices.as_deref())
            }
        },
        Command::Selfcomm { which } => match which {
            SelfcommCmd::Partition { d, k } => commands::selfcomm::partition(&ctx, &d, k),
            SelfcommCmd::Construct { data, k } => {
                commands::selfcomm::construct(&ctx, &data.d, k, data.dump_matrices.as_deref())
            }
            SelfcommCmd::Mixed { data, depth, copies } => commands::selfcomm::mixed(
                &ctx,
                &data.d,
                depth,
                copies,
                data.dump_matrices.as_deref(),
            ),
            SelfcommCmd::Sum { data, d2, first, second, copies } => commands::selfcomm::sum(
                &ctx,
                &data.d,
                &d2,
                first,
                second,
                copies,
                data.dump_matrices.as_deref(),
            ),
        },
        Command::Verify { cert } => commands::verify::run(&ctx, &cert),
        Command::Falsify { which } => match which {
            FalsifyCmd::Idempotent(a) => {
                commands::falsify::run(&ctx, commands::falsify::Kind::Idempotent, a.n, a.trials, 0)
            }
            FalsifyCmd::Powercompact(a) => commands::falsify::run(
                &ctx,
                commands::falsify::Kind::PowerCompact,
                a.n,
                a.trials,
                0,
            ),
            FalsifyCmd::Powerineq { common, n_max } => commands::falsify::run(
                &ctx,
                commands::falsify::Kind::PowerInequality,
                common.n,
                common.trials,
                n_max,
            ),
            FalsifyCmd::Trace(a) => {
                commands::falsify::run(&ctx, commands::falsify::Kind::Trace, a.n, a.trials, 0)
            }
        },
        Command::Search(args) => commands::search::run(&ctx, &args),
        Command::Demo => commands::demo::run(&ctx),
    }
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version displays are successes; everything else
            // is a usage error.
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            process::exit(code);
        }
    };
    match run(cli) {
        Ok(Verdict::Pass) => process::exit(0),
        Ok(Verdict::MathFail) => process::exit(2),
        Err(e) => {
            eprintln!("error: {e}");
            process::exit(1);
        }
    }
}
