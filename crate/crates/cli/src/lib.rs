//! Command-line frontend for `riesz-core`: runs a computation, writes a
//! re-verifiable certificate, and re-verifies certificates from scratch.
//!
//! Exit codes: 0 verified or constructed, 1 refuted or verdict neither,
//! 2 usage, verification or internal error.

pub mod cert;
pub mod commands;
pub mod fixtures;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use riesz_core::conjecture::{Strategy, DEFAULT_MAX_DRAWS};
use riesz_core::grid::{format_rational, parse_rational, parse_support_sets};

use crate::commands::{
    ClassifyParams, Conj1Params, Conj2Params, ConstructParams, Context, CorollaryParams, CrossCheckParams,
    HierarchyParams, Params, ReproduceParams, SamplingParams, Status, TriParams,
};

/// Environment variable that overrides `--threads`.
pub const THREADS_ENV: &str = "RIESZ_THREADS";

pub const EXIT_OK: i32 = 0;
pub const EXIT_REFUTED: i32 = 1;
pub const EXIT_ERROR: i32 = 2;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] riesz_core::Error),
    #[error("verification error: {0}")]
    Verification(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Parser)]
#[command(name = "riesz", version, about = "Exponential Riesz bases on restricted supports")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// Worker threads (overridden by RIESZ_THREADS).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Certificate path; the certificate goes to stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Path for the CSV side report, where one exists.
    #[arg(long, global = true)]
    report: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct MaskArgs {
    /// Comma-separated masks: `0b...` integers (bit j = cell j) or '0'/'1'
    /// strings (character j = cell j).
    #[arg(long, conflicts_with = "masks_file")]
    masks: Option<String>,
    /// One mask per line of '0'/'1' characters.
    #[arg(long)]
    masks_file: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum StrategyArg {
    Exhaustive,
    Randomized,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Classify a masked exponential system.
    Classify {
        #[arg(long)]
        n: usize,
        /// Comma-separated offsets, integers or p/q.
        #[arg(long)]
        offsets: String,
        #[command(flatten)]
        masks: MaskArgs,
        #[arg(long)]
        tolerance: Option<f64>,
        /// Require the exact determinant verdict.
        #[arg(long)]
        exact: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Choose cosets making the masked system a Riesz basis.
    Construct {
        #[arg(long)]
        n: usize,
        /// Cell of each row (default 0,1,...).
        #[arg(long)]
        cells: Option<String>,
        #[command(flatten)]
        masks: MaskArgs,
        #[arg(long)]
        rho: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Frequencies for finite unions of rational intervals.
    Corollary {
        /// Sets separated by ';', intervals `lo..hi` separated by ','.
        #[arg(long)]
        sets: String,
        #[arg(long)]
        rho: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Permutation search meeting the averaging bound.
    LemmaSearch {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        cells: Option<String>,
        #[command(flatten)]
        masks: MaskArgs,
        #[command(flatten)]
        common: Common,
    },
    /// Masked Fourier invertibility over all diagonal-containing masks.
    Conjecture1 {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        rho: Option<String>,
        #[arg(long, value_enum, default_value = "exhaustive")]
        strategy: StrategyArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_MAX_DRAWS)]
        max_draws: u64,
        #[arg(long)]
        collect_all: bool,
        #[arg(long)]
        all_witnesses: bool,
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        #[arg(long, requires = "checkpoint")]
        resume: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Invertibility of every principal submatrix of the permuted DFT.
    Conjecture2 {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        rho: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Principal submatrices with non-integer offsets kN/P.
    Hierarchy {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        prime: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Case of a three-interval membership, or the full 64-entry table.
    TriClassify {
        /// `L1;L2;L3`, e.g. `1,2;2,3;1,3`.
        #[arg(long)]
        membership: Option<String>,
        /// Comma-separated 1-based indices of empty intervals.
        #[arg(long)]
        empty: Option<String>,
        /// Three lower Riesz bounds.
        #[arg(long)]
        alphas: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Classify a periodic instance with supports built from memberships.
    CrossCheck {
        #[arg(long, required_unless_present = "sweep")]
        n: Option<usize>,
        /// Cells per interval: `0,1;2;3`.
        #[arg(long, required_unless_present = "sweep")]
        intervals: Option<String>,
        /// Coset offsets per interval: `0,2;1;3`.
        #[arg(long, required_unless_present = "sweep")]
        offsets: Option<String>,
        /// 1-based interval indices per support: `1,2;2,3;1,3`.
        #[arg(long, required_unless_present = "sweep")]
        membership: Option<String>,
        /// All 64 memberships on the canonical N=3 instance.
        #[arg(long)]
        sweep: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Bandpass sampling and reconstruction of a random spectrum.
    SamplingDemo {
        #[arg(long)]
        n: usize,
        #[command(flatten)]
        masks: MaskArgs,
        #[arg(long)]
        rho: Option<String>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 4)]
        refine: usize,
        /// Comma-separated truncations.
        #[arg(long, default_value = "2048,8192")]
        truncation: String,
        #[command(flatten)]
        common: Common,
    },
    /// Rebuild a published configuration.
    Reproduce {
        /// Fixture id; `list` prints the registry.
        id: String,
        #[command(flatten)]
        common: Common,
    },
    /// Re-verify a certificate.
    Verify {
        path: PathBuf,
        #[arg(long)]
        threads: Option<usize>,
    },
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn parse_list<T: std::str::FromStr>(s: &str, what: &str) -> Result<Vec<T>, CliError> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| t.parse().map_err(|_| usage(format!("bad {what} entry {t:?}"))))
        .collect()
}

fn parse_groups<T: std::str::FromStr>(s: &str, what: &str) -> Result<Vec<Vec<T>>, CliError> {
    s.split(';').map(|g| parse_list(g, what)).collect()
}

fn parse_mask(n: usize, token: &str) -> Result<Vec<u8>, CliError> {
    let token = token.trim();
    if let Some(hex) = token.strip_prefix("0b") {
        let v = u128::from_str_radix(hex, 2).map_err(|_| usage(format!("bad mask {token:?}")))?;
        if n > 128 || (n < 128 && v >> n != 0) {
            return Err(usage(format!("mask {token:?} does not fit {n} cells")));
        }
        return Ok((0..n).map(|j| (v >> j & 1) as u8).collect());
    }
    let bits = token
        .chars()
        .map(|c| match c {
            '0' => Ok(0),
            '1' => Ok(1),
            _ => Err(usage(format!("bad mask {token:?}"))),
        })
        .collect::<Result<Vec<u8>, _>>()?;
    if bits.len() != n {
        return Err(usage(format!("mask {token:?} has {} bits, expected {n}", bits.len())));
    }
    Ok(bits)
}

fn read_masks(n: usize, args: &MaskArgs) -> Result<Vec<Vec<u8>>, CliError> {
    match (&args.masks, &args.masks_file) {
        (Some(s), _) => s.split(',').map(|t| parse_mask(n, t)).collect(),
        (None, Some(path)) => fs::read_to_string(path)?
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty())
            .map(|l| parse_mask(n, l))
            .collect(),
        (None, None) => Err(usage("one of --masks or --masks-file is required")),
    }
}

fn cells_or_default(cells: &Option<String>, k: usize) -> Result<Vec<usize>, CliError> {
    match cells {
        Some(s) => parse_list(s, "cell"),
        None => Ok((0..k).collect()),
    }
}

fn canonical_rationals(s: &str) -> Result<Vec<String>, CliError> {
    s.split(',')
        .map(|t| Ok(format_rational(&parse_rational(t)?)))
        .collect()
}

/// Worker count: the environment variable wins over the flag.
pub fn resolve_threads(flag: Option<usize>) -> Result<Option<usize>, CliError> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| usage(format!("{THREADS_ENV}={v:?} is not a thread count"))),
        Err(_) => Ok(flag),
    }
}

struct Job {
    params: Params,
    ctx: Context,
    out: Option<PathBuf>,
    report: Option<PathBuf>,
}

fn job(params: Params, common: Common, ctx: Context) -> Result<Job, CliError> {
    Ok(Job {
        params,
        ctx: Context {
            threads: resolve_threads(common.threads)?,
            ..ctx
        },
        out: common.out,
        report: common.report,
    })
}

fn build_job(command: Command) -> Result<Job, CliError> {
    let plain = Context::default();
    match command {
        Command::Classify {
            n,
            offsets,
            masks,
            tolerance,
            exact,
            common,
        } => {
            let p = ClassifyParams {
                n,
                offsets: canonical_rationals(&offsets)?,
                masks: read_masks(n, &masks)?,
                tolerance: tolerance.unwrap_or(riesz_core::linalg::DEFAULT_SINGULAR_TOL),
                exact,
            };
            job(Params::Classify(p), common, plain)
        }
        Command::Construct {
            n,
            cells,
            masks,
            rho,
            common,
        } => {
            let masks = read_masks(n, &masks)?;
            let cells = cells_or_default(&cells, masks.len())?;
            job(Params::Construct(ConstructParams { n, cells, masks, rho }), common, plain)
        }
        Command::LemmaSearch { n, cells, masks, common } => {
            let masks = read_masks(n, &masks)?;
            let cells = cells_or_default(&cells, masks.len())?;
            let p = ConstructParams {
                n,
                cells,
                masks,
                rho: None,
            };
            job(Params::LemmaSearch(p), common, plain)
        }
        Command::Corollary { sets, rho, common } => {
            let parsed = parse_support_sets(&sets.replace(';', "\n"))?;
            let sets = parsed
                .iter()
                .map(|set| {
                    set.iter()
                        .map(|iv| format!("{}..{}", format_rational(&iv.lo()), format_rational(&iv.hi())))
                        .collect()
                })
                .collect();
            job(Params::Corollary(CorollaryParams { sets, rho }), common, plain)
        }
        Command::Conjecture1 {
            n,
            rho,
            strategy,
            seed,
            max_draws,
            collect_all,
            all_witnesses,
            checkpoint,
            resume,
            common,
        } => {
            let strategy = match strategy {
                StrategyArg::Exhaustive => Strategy::Exhaustive,
                StrategyArg::Randomized => Strategy::RandomizedRefute,
            };
            let p = Conj1Params {
                n,
                rho,
                strategy,
                seed,
                max_draws,
                collect_all,
                all_witnesses,
            };
            let ctx = Context {
                threads: None,
                checkpoint,
                resume,
            };
            job(Params::Conjecture1(p), common, ctx)
        }
        Command::Conjecture2 { n, rho, common } => job(Params::Conjecture2(Conj2Params { n, rho }), common, plain),
        Command::Hierarchy { n, prime, common } => {
            job(Params::Hierarchy(HierarchyParams { n, prime }), common, plain)
        }
        Command::TriClassify {
            membership,
            empty,
            alphas,
            common,
        } => {
            let alphas = match alphas {
                Some(s) => {
                    let v: Vec<f64> = parse_list(&s, "alpha")?;
                    Some(<[f64; 3]>::try_from(v).map_err(|_| usage("--alphas needs three values"))?)
                }
                None => None,
            };
            let p = TriParams {
                membership,
                empty: empty.as_deref().map(|s| parse_list(s, "index")).transpose()?.unwrap_or_default(),
                alphas,
            };
            job(Params::TriClassify(p), common, plain)
        }
        Command::CrossCheck {
            n,
            intervals,
            offsets,
            membership,
            sweep,
            common,
        } => {
            let p = if sweep {
                CrossCheckParams {
                    n: 3,
                    intervals: vec![],
                    offsets: vec![],
                    membership: vec![],
                    sweep: true,
                }
            } else {
                let groups = |s: Option<String>| s.ok_or_else(|| usage("missing cross-check argument"));
                CrossCheckParams {
                    n: n.ok_or_else(|| usage("--n is required"))?,
                    intervals: parse_groups(&groups(intervals)?, "cell")?,
                    offsets: groups(offsets)?
                        .split(';')
                        .map(canonical_rationals)
                        .collect::<Result<_, _>>()?,
                    membership: parse_groups(&groups(membership)?, "index")?,
                    sweep: false,
                }
            };
            job(Params::CrossCheck(p), common, plain)
        }
        Command::SamplingDemo {
            n,
            masks,
            rho,
            seed,
            refine,
            truncation,
            common,
        } => {
            let p = SamplingParams {
                n,
                masks: read_masks(n, &masks)?,
                rho,
                seed,
                refine,
                truncations: parse_list(&truncation, "truncation")?,
            };
            job(Params::SamplingDemo(p), common, plain)
        }
        Command::Reproduce { id, common } => job(Params::Reproduce(ReproduceParams { id }), common, plain),
        Command::Verify { .. } => unreachable!("handled before job construction"),
    }
}

fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn execute(job: Job, stdout: &mut dyn Write) -> Result<i32, CliError> {
    let outcome = commands::compute(&job.params, &job.ctx)?;
    let cert = cert::build(&job.params, outcome.results, outcome.wall_time, job.ctx.threads)?;
    if let (Some(path), Some(report)) = (&job.report, &outcome.report) {
        write_text(path, report)?;
    }
    match &job.out {
        Some(path) => {
            write_text(path, &cert::render(&cert))?;
            writeln!(stdout, "{}", outcome.summary)?;
        }
        None => write!(stdout, "{}", cert::render(&cert))?,
    }
    Ok(match outcome.status {
        Status::Ok => EXIT_OK,
        Status::Refuted => EXIT_REFUTED,
    })
}

fn verify(path: &Path, threads: Option<usize>, stdout: &mut dyn Write) -> Result<i32, CliError> {
    let ctx = Context {
        threads: resolve_threads(threads)?,
        ..Default::default()
    };
    let report = cert::verify_file(path, &ctx)?;
    if report.ok() {
        writeln!(stdout, "{}: verified", path.display())?;
        Ok(EXIT_OK)
    } else {
        writeln!(stdout, "{}: {} mismatch(es)", path.display(), report.mismatches.len())?;
        for m in &report.mismatches {
            writeln!(stdout, "  {m}")?;
        }
        Ok(EXIT_REFUTED)
    }
}

/// Runs one invocation; `argv[0]` is the program name.
pub fn run_command<S: AsRef<str>>(argv: &[S], stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    let cli = match Cli::try_parse_from(argv.iter().map(AsRef::as_ref)) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(stdout, "{e}");
                EXIT_OK
            } else {
                let _ = write!(stderr, "{}", e.render());
                EXIT_ERROR
            };
        }
    };
    let result = match cli.command {
        Command::Verify { path, threads } => verify(&path, threads, stdout),
        Command::Reproduce { ref id, .. } if id == "list" => {
            fixtures::FIXTURES
                .iter()
                .try_for_each(|f| writeln!(stdout, "{}\t{}", f.id, f.claim))
                .map(|_| EXIT_OK)
                .map_err(CliError::from)
        }
        command => build_job(command).and_then(|j| execute(j, stdout)),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            if matches!(e, CliError::Usage(_)) {
                let _ = writeln!(stderr, "run `riesz --help` for usage");
            }
            EXIT_ERROR
        }
    }
}
