use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{ArgAction, Parser, Subcommand, ValueEnum};

use refscan_cli::{compare_commits, compare_files, dump_model, run_eval};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Parser)]
#[command(
    name = "refscan",
    version,
    about = "Detects refactorings between two versions of a C++ file"
)]
struct Cli {
    #[command(subcommand)]
    command: CommandLine,
}

#[derive(Subcommand)]
enum CommandLine {
    /// Compare two files and report refactorings and behavior changes
    CompareFiles {
        before: PathBuf,
        after: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        /// Report behavior-affecting changes alongside refactorings
        #[arg(long, default_value_t = true, action = ArgAction::Set, num_args = 0..=1, default_missing_value = "true")]
        report_behavior: bool,
    },
    /// Compare every file present in two revisions of a git repository
    CompareCommits {
        repo: PathBuf,
        rev_before: String,
        rev_after: String,
        /// Glob filter over repository paths
        #[arg(long)]
        path: Option<String>,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        #[arg(long, default_value_t = true, action = ArgAction::Set, num_args = 0..=1, default_missing_value = "true")]
        report_behavior: bool,
    },
    /// Parse one file and print its model as JSON
    DumpModel { path: PathBuf },
    /// Score the detector against a seeded fixture corpus
    Eval {
        corpus_dir: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
}

fn run(cli: Cli) -> Result<(), String> {
    match cli.command {
        CommandLine::CompareFiles {
            before,
            after,
            format,
            report_behavior,
        } => {
            let report =
                compare_files(&before, &after, report_behavior).map_err(|e| e.to_string())?;
            match format {
                Format::Text => print!("{}", report.to_text()),
                Format::Json => println!("{}", report.to_json()),
            }
        }
        CommandLine::CompareCommits {
            repo,
            rev_before,
            rev_after,
            path,
            format,
            report_behavior,
        } => {
            let comparison = compare_commits(
                &repo,
                &rev_before,
                &rev_after,
                path.as_deref(),
                report_behavior,
            )
            .map_err(|e| format!("{e:#}"))?;
            match format {
                Format::Text => print!("{}", comparison.to_text()),
                Format::Json => println!("{}", comparison.to_json()),
            }
        }
        CommandLine::DumpModel { path } => {
            println!("{}", dump_model(&path).map_err(|e| e.to_string())?);
        }
        CommandLine::Eval { corpus_dir, format } => {
            let result = run_eval(&corpus_dir).map_err(|e| format!("{e:#}"))?;
            match format {
                Format::Text => print!("{}", result.to_text()),
                Format::Json => println!("{}", result.to_json()),
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
    }
}
