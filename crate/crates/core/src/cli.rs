//! The `qraise` command line.
//!
//! Exit statuses: `0` for a yes answer or success, `1` for a no answer or a
//! failed check, `2` for usage, input and I/O errors, `3` when a resource
//! cap is exceeded. Every error is printed as one `error[CODE]: message`
//! line on standard error.

use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::error::Error;
use crate::harness::{
    check_equivalence, check_lemma, measure_growth, reduce, solve, CheckReport, Instance,
    PrefixPattern, QbfGenSpec, Target,
};
use crate::logic::{parse_qbf, qbf_valid};

pub const EXIT_YES: i32 = 0;
pub const EXIT_NO: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_CAP: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "qraise",
    version,
    about = "Reduce QBFs to abduction, default logic and planning, and check the reductions"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Decide a QBF file; exit 0 if valid, 1 if not.
    Validate {
        /// QBF file, or `-` for standard input.
        file: PathBuf,
    },
    /// Reduce a QBF file to an instance of the target problem.
    Reduce {
        #[arg(long, short)]
        target: Target,
        /// QBF file, or `-` for standard input.
        file: PathBuf,
        /// Output file; standard output when omitted.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Solve an instance file; exit 0 for a yes-instance, 1 for a no-instance.
    Solve {
        #[arg(long, short)]
        target: Target,
        /// Instance file, or `-` for standard input.
        file: PathBuf,
    },
    /// Check a reduction against the QBF oracle; exit 0 iff there are no
    /// counterexamples.
    Check(CheckArgs),
    /// Print instance sizes after each raise.
    Growth {
        #[arg(long, short)]
        target: Target,
        #[arg(long)]
        raises: usize,
    },
}

#[derive(Debug, Args)]
struct CheckArgs {
    #[arg(long, short)]
    target: Target,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Maximum number of prefix variables.
    #[arg(long, default_value_t = 3)]
    vars: usize,
    /// Prefix pattern: `ea`, `ae` or `any`. Defaults to the target's own.
    #[arg(long, value_parser = parse_pattern)]
    pattern: Option<PrefixPattern>,
    /// Enumerate every prefix and matrix template instead of sampling.
    #[arg(long, conflicts_with_all = ["seed", "count", "lemma"])]
    exhaustive: bool,
    /// Number of random QBFs, or of lemma samples with `--lemma`.
    #[arg(long, default_value_t = 500)]
    count: usize,
    /// Maximum matrix depth.
    #[arg(long)]
    depth: Option<usize>,
    /// Check the single-raise merge property on random instances instead.
    #[arg(long, conflicts_with_all = ["pattern", "vars", "depth"])]
    lemma: bool,
    /// Directory for counterexample fixtures.
    #[arg(long, default_value = "counterexamples")]
    fixtures: PathBuf,
    /// Also print one `key=value` line per case.
    #[arg(long)]
    machine: bool,
}

fn parse_pattern(s: &str) -> Result<PrefixPattern, String> {
    PrefixPattern::from_code(s)
        .ok_or_else(|| format!("unknown pattern `{s}` (expected ea, ae or any)"))
}

/// A failure with its exit status and code prefix.
#[derive(Debug)]
struct Failure {
    status: i32,
    code: &'static str,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Failure {
        Failure {
            status: if e.is_resource() {
                EXIT_CAP
            } else {
                EXIT_USAGE
            },
            code: e.code(),
            message: e.to_string(),
        }
    }
}

fn io_failure(path: &Path, e: io::Error) -> Failure {
    Failure {
        status: EXIT_USAGE,
        code: "E_IO",
        message: format!("{}: {e}", path.display()),
    }
}

fn read_input(path: &Path) -> Result<String, Failure> {
    if path == Path::new("-") {
        let mut text = String::new();
        io::stdin()
            .read_to_string(&mut text)
            .map_err(|e| io_failure(path, e))?;
        Ok(text)
    } else {
        fs::read_to_string(path).map_err(|e| io_failure(path, e))
    }
}

/// Parses `args` (including the program name) and runs the command,
/// returning the exit status.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(out, "{e}");
                return EXIT_YES;
            }
            let first = e.to_string();
            let first = first
                .lines()
                .next()
                .unwrap_or("")
                .trim_start_matches("error: ");
            let _ = writeln!(err, "error[E_USAGE]: {first}");
            return EXIT_USAGE;
        }
    };
    match execute(cli.command, out) {
        Ok(status) => status,
        Err(f) => {
            let _ = writeln!(err, "error[{}]: {}", f.code, f.message.replace('\n', " "));
            f.status
        }
    }
}

fn answer(yes: bool) -> i32 {
    if yes {
        EXIT_YES
    } else {
        EXIT_NO
    }
}

fn execute(command: Command, out: &mut dyn Write) -> Result<i32, Failure> {
    let stdout = |e: io::Error| io_failure(Path::new("<stdout>"), e);
    match command {
        Command::Validate { file } => {
            let q = parse_qbf(&read_input(&file)?)?;
            let valid = qbf_valid(&q)?;
            writeln!(out, "{}", if valid { "valid" } else { "invalid" }).map_err(stdout)?;
            Ok(answer(valid))
        }
        Command::Reduce {
            target,
            file,
            output,
        } => {
            let q = parse_qbf(&read_input(&file)?)?;
            let text = reduce(target, &q)?.to_text();
            match output {
                Some(path) if path != Path::new("-") => {
                    fs::write(&path, text).map_err(|e| io_failure(&path, e))?
                }
                _ => out.write_all(text.as_bytes()).map_err(stdout)?,
            }
            Ok(EXIT_YES)
        }
        Command::Solve { target, file } => {
            let instance = Instance::parse(target, &read_input(&file)?)?;
            let decision = solve(&instance)?;
            let verdict = if decision.answer { "yes" } else { "no" };
            match decision.witness {
                Some(w) => writeln!(out, "{verdict}: {w}"),
                None => writeln!(out, "{verdict}"),
            }
            .map_err(stdout)?;
            Ok(answer(decision.answer))
        }
        Command::Check(args) => check(args, out),
        Command::Growth { target, raises } => {
            let table = measure_growth(target, raises)?;
            out.write_all(table.render().as_bytes()).map_err(stdout)?;
            Ok(answer(table.verdict))
        }
    }
}

fn check(args: CheckArgs, out: &mut dyn Write) -> Result<i32, Failure> {
    let report: CheckReport = if args.lemma {
        check_lemma(args.target, args.seed, args.count)?
    } else {
        let pattern = args.pattern.unwrap_or(args.target.pattern());
        let spec = if args.exhaustive {
            QbfGenSpec::exhaustive(args.vars, pattern, args.depth.unwrap_or(2))
        } else {
            QbfGenSpec {
                matrix_depth: args.depth.unwrap_or(4),
                ..QbfGenSpec::random(args.seed, args.vars, pattern, args.count)
            }
        };
        check_equivalence(args.target, &spec)?
    };
    let stdout = |e: io::Error| io_failure(Path::new("<stdout>"), e);
    out.write_all(report.render_text().as_bytes())
        .map_err(stdout)?;
    if args.machine {
        out.write_all(report.render_machine().as_bytes())
            .map_err(stdout)?;
    }
    let written = report
        .write_fixtures(&args.fixtures)
        .map_err(|e| io_failure(&args.fixtures, e))?;
    for path in written {
        writeln!(out, "fixture: {}", path.display()).map_err(stdout)?;
    }
    Ok(answer(report.passed()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_args(args: &[&str]) -> (i32, String, String) {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let status = run(
            std::iter::once("qraise").chain(args.iter().copied()),
            &mut out,
            &mut err,
        );
        (
            status,
            String::from_utf8(out).unwrap(),
            String::from_utf8(err).unwrap(),
        )
    }

    #[test]
    fn usage_errors_exit_two() {
        let (status, _, err) = run_args(&["solve", "--target", "sat", "x"]);
        assert_eq!(status, EXIT_USAGE);
        assert!(err.starts_with("error[E_USAGE]: "), "{err}");
        assert_eq!(err.lines().count(), 1);
        let (status, _, _) = run_args(&[
            "check",
            "--target",
            "planning",
            "--exhaustive",
            "--seed",
            "3",
        ]);
        assert_eq!(status, EXIT_USAGE);
    }

    #[test]
    fn missing_file_is_io_error() {
        let (status, _, err) = run_args(&["validate", "/nonexistent/q.qbf"]);
        assert_eq!(status, EXIT_USAGE);
        assert!(err.starts_with("error[E_IO]: "));
    }

    #[test]
    fn growth_prints_table() {
        let (status, out, _) = run_args(&["growth", "--target", "abduction", "--raises", "3"]);
        assert_eq!(status, EXIT_YES);
        assert!(out.contains("verdict: pass"));
        let (status, _, err) = run_args(&["growth", "--target", "default", "--raises", "1000"]);
        assert_eq!(status, EXIT_CAP);
        assert!(err.starts_with("error[E_CAP]: "));
    }

    #[test]
    fn pattern_mismatch_is_shape_error() {
        let (status, _, err) = run_args(&[
            "check",
            "--target",
            "default",
            "--pattern",
            "ea",
            "--count",
            "5",
        ]);
        assert_eq!(status, EXIT_USAGE);
        assert!(err.starts_with("error[E_SHAPE]: "));
    }

    #[test]
    fn help_exits_zero() {
        let (status, out, _) = run_args(&["--help"]);
        assert_eq!(status, EXIT_YES);
        assert!(out.contains("validate"));
    }
}
