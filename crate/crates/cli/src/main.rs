//! Command-line front end for the steering toolkit.
//!
//! Subcommands read and write the self-describing JSON formats of the core
//! crate; analysis reports carry SHA-256 digests of their inputs, and no
//! output embeds a timestamp, so identical inputs give identical bytes.
//!
//! Exit codes: 0 success, 1 domain failure (unphysical state, failed
//! audit), 2 unusable arguments, 3 I/O or parse trouble.

mod commands;

use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use combsteer_core::steering::MonogamyRelation;
use combsteer_core::{EnumerationMode, Error, Tolerances};

#[derive(Parser)]
#[command(
    name = "combsteer",
    version,
    about = "Steering analysis for multimode squeezed light"
)]
struct Cli {
    /// Tolerance overrides: JSON with any subset of the tolerance fields.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Worker threads for partition sweeps (0 = one per core).
    #[arg(
        long,
        global = true,
        env = "COMBSTEER_JOBS",
        default_value_t = 0,
        value_name = "N"
    )]
    jobs: usize,

    #[command(subcommand)]
    command: Command,
}

/// Enumeration scope for partition sweeps.
#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModeArg {
    /// Every ordered split of all modes into two parties.
    Full,
    /// Every ordered pair of disjoint mode subsets, rest traced out.
    Pairs,
}

impl From<ModeArg> for EnumerationMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Full => EnumerationMode::Full,
            ModeArg::Pairs => EnumerationMode::DisjointPairs,
        }
    }
}

/// Monogamy relation selector.
#[derive(Debug, Clone, Copy, ValueEnum)]
enum RelationArg {
    /// Two single modes cannot both steer the same single mode.
    TypeI,
    /// The type-I statement with multimode parties; violations are legal.
    TypeII,
    /// Collective bound: the group steers at least as hard as its members.
    Ckw,
    /// Group-to-group value against the per-steered-mode sum.
    TypeIvSteeredSum,
    /// Group-to-group value against the per-steering-mode sum.
    TypeIvSteeringSum,
}

impl From<RelationArg> for MonogamyRelation {
    fn from(r: RelationArg) -> Self {
        match r {
            RelationArg::TypeI => MonogamyRelation::TypeI,
            RelationArg::TypeII => MonogamyRelation::TypeII,
            RelationArg::Ckw => MonogamyRelation::Ckw,
            RelationArg::TypeIvSteeredSum => MonogamyRelation::TypeIvSteeredSum,
            RelationArg::TypeIvSteeringSum => MonogamyRelation::TypeIvSteeringSum,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Audit a stored state or model file and print its verdict.
    Validate {
        /// State or model file, recognized by its schema tag.
        file: PathBuf,
    },

    /// Evaluate steering across one bipartition of a stored state.
    Steer {
        /// State file.
        file: PathBuf,
        /// Steering party: comma-separated labels (indices when unlabeled).
        #[arg(long, value_delimiter = ',', value_name = "MODES", required = true)]
        from: Vec<String>,
        /// Steered party.
        #[arg(long, value_delimiter = ',', value_name = "MODES", required = true)]
        to: Vec<String>,
        /// Also evaluate the reverse direction and classify the pair.
        #[arg(long)]
        both_directions: bool,
        /// Report in decibels (10 log10 e per nat) instead of nats.
        #[arg(long)]
        db: bool,
    },

    /// Sweep the steering quantifier over every enumerated bipartition.
    Spectrum {
        /// State file.
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = ModeArg::Full)]
        mode: ModeArg,
        /// Refuse enumerations larger than this many partitions.
        #[arg(long, value_name = "N")]
        max_partitions: Option<u64>,
        /// How many of the strongest partitions to print.
        #[arg(long, default_value_t = 5, value_name = "K")]
        top: usize,
        /// Write the full report as a JSON envelope with input digests.
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },

    /// Re-sweep the spectrum as labeled modes are removed one by one.
    LossScan {
        /// State file; must carry mode labels.
        file: PathBuf,
        /// Removal sequence: comma-separated labels, dropped in order.
        #[arg(long, value_delimiter = ',', value_name = "LABELS", required = true)]
        remove: Vec<String>,
        #[arg(long, value_enum, default_value_t = ModeArg::Full)]
        mode: ModeArg,
        /// Write the full report as a JSON envelope with input digests.
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },

    /// Audit a monogamy relation on one configuration or a sweep.
    Monogamy {
        /// State file.
        file: PathBuf,
        #[arg(long, value_enum)]
        relation: RelationArg,
        /// Steering groups: semicolon-separated groups of comma-separated modes.
        #[arg(long, value_name = "G1;G2;..", conflicts_with = "sweep")]
        groups: Option<String>,
        /// Steered party for the single-configuration audit.
        #[arg(long, value_name = "MODES", conflicts_with = "sweep")]
        steered: Option<String>,
        /// Audit every admissible configuration instead of one.
        #[arg(long)]
        sweep: bool,
        /// Steered-party size for sweeps over multimode relations.
        #[arg(long, default_value_t = 1, value_name = "K")]
        steered_size: usize,
        /// Configuration ceiling for sweeps.
        #[arg(long, default_value_t = 512, value_name = "N")]
        cap: usize,
        /// Write the full report as a JSON envelope with input digests.
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },

    /// Build a comb state at pixel resolution and optionally save it.
    Simulate {
        /// Model file.
        model: PathBuf,
        /// Override the model's resolution (4, 8, or 16 pixels).
        #[arg(long, value_name = "N")]
        pixels: Option<usize>,
        /// Save the simulated state as a covariance-matrix file.
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },

    /// Monte Carlo uncertainty of a steering value under squeezing noise.
    Mc {
        /// Model file.
        model: PathBuf,
        /// Steering party, in the model's pixel labels.
        #[arg(long, value_delimiter = ',', value_name = "MODES", required = true)]
        from: Vec<String>,
        /// Steered party.
        #[arg(long, value_delimiter = ',', value_name = "MODES", required = true)]
        to: Vec<String>,
        /// Squeezing s.d. in dB: one value for all eigenmodes or one each.
        #[arg(long, value_delimiter = ',', value_name = "DB", required = true)]
        noise_db: Vec<f64>,
        /// Monte Carlo sample count.
        #[arg(long, default_value_t = 1000, value_name = "N")]
        samples: usize,
        /// RNG seed; same seed and inputs give bit-identical estimates.
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Override the model's resolution (4, 8, or 16 pixels).
        #[arg(long, value_name = "N")]
        pixels: Option<usize>,
        /// Write the full report as a JSON envelope with input digests.
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },

    /// Merge pixel modes of a stored state into coarser bands.
    Coarsen {
        /// State file.
        file: PathBuf,
        /// Target uniform resolution; needs standard pixel labels.
        #[arg(long, value_name = "N", conflicts_with = "merge")]
        to_pixels: Option<usize>,
        /// Explicit groups: comma-separated, labels joined by '+',
        /// e.g. a1+a2,b1,b2. Modes in no group are traced out.
        #[arg(long, value_name = "GROUPS")]
        merge: Option<String>,
        /// Save the merged state as a covariance-matrix file.
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> combsteer_core::Result<i32> {
    if cli.jobs > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cli.jobs)
            .build_global()
            .map_err(|e| Error::BadArgument(format!("cannot size the thread pool: {e}")))?;
    }
    let tol = match &cli.config {
        Some(path) => Tolerances::from_json_file(path)?,
        None => Tolerances::default(),
    };

    match cli.command {
        Command::Validate { file } => commands::validate(&file, &tol),
        Command::Steer {
            file,
            from,
            to,
            both_directions,
            db,
        } => commands::steer(&file, &from, &to, both_directions, db, &tol),
        Command::Spectrum {
            file,
            mode,
            max_partitions,
            top,
            out,
        } => commands::spectrum(
            &file,
            mode.into(),
            max_partitions,
            top,
            out.as_deref(),
            cli.config.as_deref(),
            &tol,
        ),
        Command::LossScan {
            file,
            remove,
            mode,
            out,
        } => commands::loss_scan(
            &file,
            &remove,
            mode.into(),
            out.as_deref(),
            cli.config.as_deref(),
            &tol,
        ),
        Command::Monogamy {
            file,
            relation,
            groups,
            steered,
            sweep,
            steered_size,
            cap,
            out,
        } => commands::monogamy(
            &file,
            &commands::MonogamyArgs {
                relation: relation.into(),
                groups: groups.as_deref(),
                steered: steered.as_deref(),
                sweep,
                steered_size,
                cap,
            },
            out.as_deref(),
            cli.config.as_deref(),
            &tol,
        ),
        Command::Simulate { model, pixels, out } => {
            commands::simulate(&model, pixels, out.as_deref(), &tol)
        }
        Command::Mc {
            model,
            from,
            to,
            noise_db,
            samples,
            seed,
            pixels,
            out,
        } => commands::mc(
            &model,
            &commands::McArgs {
                from: &from,
                to: &to,
                noise_db: &noise_db,
                samples,
                seed,
                pixels,
            },
            out.as_deref(),
            cli.config.as_deref(),
            &tol,
        ),
        Command::Coarsen {
            file,
            to_pixels,
            merge,
            out,
        } => commands::coarsen(&file, to_pixels, merge.as_deref(), out.as_deref(), &tol),
    }
}

fn main() {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => std::process::exit(code),
        Err(e) => {
            eprintln!("error: {e}");
            let code = if e.is_io_or_parse() {
                3
            } else if e.is_bad_argument() {
                2
            } else {
                1
            };
            std::process::exit(code);
        }
    }
}
