//! Driver for the `pagehash` command.
//!
//! [`run`] takes explicit streams so it can be exercised without a terminal.

use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use pagehash_core::assess::MSG_NO_HASHES;
use pagehash_core::tamperlab::write_corpus;
use pagehash_core::{assess_file, protect_file, AssessmentReport, PageHashes, RootHashes, Verdict};

pub const EXIT_OK: i32 = 0;
pub const EXIT_TAMPERED: i32 = 1;
pub const EXIT_UNPROTECTED: i32 = 2;
pub const EXIT_ERROR: i32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Protect,
    Assess,
    Corpus,
    Interactive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Text,
    Json,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CliConfig {
    pub mode: Mode,
    /// Input PDF, or the target directory for `Corpus`. Unused when interactive.
    pub input: PathBuf,
    pub output: Option<PathBuf>,
    pub format: Format,
    pub verbose: bool,
}

impl CliConfig {
    pub fn interactive() -> Self {
        Self {
            mode: Mode::Interactive,
            input: PathBuf::new(),
            output: None,
            format: Format::Text,
            verbose: false,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "pagehash",
    version,
    about = "Embed and check tamper-evidence hashes in PDF files"
)]
struct Args {
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write a protected copy of a PDF.
    Protect {
        input: PathBuf,
        /// Output path (default: <input stem>_hash.pdf next to the input).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a protected PDF for alterations.
    Assess {
        input: PathBuf,
        /// Print the report as JSON.
        #[arg(long)]
        json: bool,
        /// Also show the stored and recomputed hashes.
        #[arg(long)]
        verbose: bool,
    },
    /// Write the synthetic test corpus to a directory.
    Corpus { dir: PathBuf },
}

/// Parses command-line arguments (including the program name).
pub fn parse_args<I, T>(args: I) -> Result<CliConfig, clap::Error>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let args = Args::try_parse_from(args)?;
    Ok(match args.command {
        None => CliConfig::interactive(),
        Some(Command::Protect { input, out }) => CliConfig {
            mode: Mode::Protect,
            input,
            output: out,
            format: Format::Text,
            verbose: false,
        },
        Some(Command::Assess {
            input,
            json,
            verbose,
        }) => CliConfig {
            mode: Mode::Assess,
            input,
            output: None,
            format: if json { Format::Json } else { Format::Text },
            verbose,
        },
        Some(Command::Corpus { dir }) => CliConfig {
            mode: Mode::Corpus,
            input: dir,
            output: None,
            format: Format::Text,
            verbose: false,
        },
    })
}

/// Executes `config` and returns the process exit code.
pub fn run(
    config: &CliConfig,
    stdin: &mut dyn BufRead,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> i32 {
    let code = match config.mode {
        Mode::Protect => run_protect(&config.input, config.output.as_deref(), stdout, stderr),
        Mode::Assess => run_assess(&config.input, config.format, config.verbose, stdout, stderr),
        Mode::Corpus => run_corpus(&config.input, stdout, stderr),
        Mode::Interactive => run_interactive(stdin, stdout, stderr),
    };
    let _ = stdout.flush();
    code
}

fn run_protect(
    input: &Path,
    output: Option<&Path>,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> i32 {
    let _ = writeln!(out, "Protecting: {}", input.display());
    match protect_file(input, output) {
        Ok(outcome) => {
            let _ = writeln!(
                out,
                "PDF Protected successfully, and saved to {}",
                outcome.output_path.display()
            );
            let _ = writeln!(out, "Process Completed");
            EXIT_OK
        }
        Err(e) => {
            let _ = writeln!(err, "There was an error protecting the PDF: {e}");
            EXIT_ERROR
        }
    }
}

fn exit_code(report: &AssessmentReport) -> i32 {
    match report.verdict {
        Verdict::Clean => EXIT_OK,
        Verdict::Tampered => EXIT_TAMPERED,
        Verdict::Unprotected => EXIT_UNPROTECTED,
    }
}

fn run_assess(
    input: &Path,
    format: Format,
    verbose: bool,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> i32 {
    let mut report = match assess_file(input) {
        Ok(report) => report,
        Err(e) => {
            if format == Format::Text {
                let _ = writeln!(out, "Assessing: {}", input.display());
            }
            let _ = writeln!(err, "There was an error assessing the PDF: {e}");
            return EXIT_ERROR;
        }
    };
    match format {
        Format::Json => {
            if !verbose {
                report.hashes = None;
            }
            match serde_json::to_string_pretty(&report) {
                Ok(json) => {
                    let _ = writeln!(out, "{json}");
                }
                Err(e) => {
                    let _ = writeln!(err, "could not encode report: {e}");
                    return EXIT_ERROR;
                }
            }
        }
        Format::Text => {
            let _ = writeln!(out, "Assessing: {}", input.display());
            if report.verdict == Verdict::Unprotected {
                let _ = writeln!(out, "There was an error assessing the PDF: {MSG_NO_HASHES}");
            } else {
                if verbose {
                    write_hash_dump(&report, out);
                }
                for line in &report.messages {
                    let _ = writeln!(out, "{line}");
                }
            }
        }
    }
    exit_code(&report)
}

fn py_list(items: &[pagehash_core::HashHex]) -> String {
    let inner: Vec<String> = items.iter().map(|h| format!("'{h}'")).collect();
    format!("[{}]", inner.join(", "))
}

fn root_dump(r: &RootHashes) -> String {
    format!("{{'hashroot': '{}', 'hashinfo': '{}'}}", r.root, r.info)
}

fn pages_dump(pages: &[PageHashes]) -> String {
    let entries: Vec<String> = pages
        .iter()
        .enumerate()
        .map(|(i, p)| {
            format!(
                "{}: {{'hashobject': '{}', 'hashroot': '{}', 'hashleaves': {}}}",
                i + 1,
                p.object,
                p.root,
                py_list(&p.leaves)
            )
        })
        .collect();
    format!("{{{}}}", entries.join(", "))
}

fn write_hash_dump(report: &AssessmentReport, out: &mut dyn Write) {
    let Some(h) = &report.hashes else { return };
    let _ = writeln!(out, "Hashes used to make comparison:");
    let _ = writeln!(out, "Stored Root Hashes: {}", root_dump(&h.stored_root));
    let _ = writeln!(out, "Computed Root Hashes: {}", root_dump(&h.computed_root));
    let _ = writeln!(out, "Stored Page Hashes: {}", pages_dump(&h.stored_pages));
    let _ = writeln!(
        out,
        "Computed Page Hashes: {}",
        pages_dump(&h.computed_pages)
    );
}

fn run_corpus(dir: &Path, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    match write_corpus(dir) {
        Ok(paths) => {
            for p in paths {
                let _ = writeln!(out, "Wrote {}", p.display());
            }
            EXIT_OK
        }
        Err(e) => {
            let _ = writeln!(err, "There was an error writing the corpus: {e}");
            EXIT_ERROR
        }
    }
}

/// `None` at end of input.
fn prompt(question: &str, stdin: &mut dyn BufRead, out: &mut dyn Write) -> Option<String> {
    let _ = write!(out, "{question}");
    let _ = out.flush();
    let mut line = String::new();
    match stdin.read_line(&mut line) {
        Ok(0) | Err(_) => {
            let _ = writeln!(out);
            None
        }
        Ok(_) => Some(line.trim().to_string()),
    }
}

fn yes(answer: Option<&str>) -> bool {
    matches!(answer, Some(a) if a.eq_ignore_ascii_case("y") || a.eq_ignore_ascii_case("yes"))
}

fn run_interactive(stdin: &mut dyn BufRead, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let mut code = EXIT_OK;
    if yes(prompt("Would you like to protect a PDF? (y/n): ", stdin, out).as_deref()) {
        match prompt(
            "Enter the path to the PDF you would like to protect: ",
            stdin,
            out,
        ) {
            Some(path) => code = run_protect(Path::new(&path), None, out, err),
            None => return EXIT_ERROR,
        }
    }
    if yes(prompt(
        "Would you like to assess a PDF for tampering? (y/n): ",
        stdin,
        out,
    )
    .as_deref())
    {
        match prompt(
            "Enter the path to the PDF you would like to assess: ",
            stdin,
            out,
        ) {
            Some(path) => code = run_assess(Path::new(&path), Format::Text, false, out, err),
            None => return EXIT_ERROR,
        }
    }
    code
}
