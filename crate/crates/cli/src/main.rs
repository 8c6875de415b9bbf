use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, Context, Result};
use clap::{Parser, Subcommand};
use supercong::conjdsl::registry::BUILTIN_SOURCES;
use supercong::conjdsl::{builtin_registry, parse, Registry};
use supercong::harness::{exit_code, parse_range, render, run_sweep_with, ReportFormat, SweepConfig};

#[derive(Parser)]
#[command(name = "supercong", version, about = "Verify supercongruence conjectures over ranges of primes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check registry entries for every prime in a range.
    Verify {
        /// Inclusive prime range, e.g. 3..500.
        #[arg(long, default_value = "3..200")]
        primes: String,
        /// Comma-separated glob patterns on entry ids.
        #[arg(long)]
        conjectures: Option<String>,
        /// Compare modulo p^min(e, CAP) (default 4).
        #[arg(long)]
        exponent_cap: Option<u32>,
        /// Worker threads (0 = all cores).
        #[arg(long, default_value_t = 0)]
        jobs: usize,
        /// Write the report here instead of standard output.
        #[arg(long)]
        report: Option<PathBuf>,
        /// Report format: json, csv or text.
        #[arg(long, default_value = "text")]
        format: ReportFormat,
        /// Stop after the first prime with a failure.
        #[arg(long)]
        fail_fast: bool,
        /// Permit upper bounds of 10000 and above.
        #[arg(long)]
        allow_large: bool,
        /// Also evaluate entries tagged `unsupported`.
        #[arg(long)]
        include_unsupported: bool,
        /// Additional conjecture files, loaded after the builtin registry.
        #[arg(long)]
        file: Vec<PathBuf>,
    },
    /// Print registry ids and statuses.
    List {
        /// Only ids matching this glob.
        pattern: Option<String>,
    },
    /// Validate a conjecture file.
    Parse { file: PathBuf },
}

fn registry_with(files: &[PathBuf]) -> Result<Registry> {
    if files.is_empty() {
        return Ok(builtin_registry().clone());
    }
    let mut texts = Vec::new();
    for f in files {
        let text = std::fs::read_to_string(f).with_context(|| format!("reading {}", f.display()))?;
        texts.push((f.display().to_string(), text));
    }
    let sources = BUILTIN_SOURCES.iter().copied().chain(texts.iter().map(|(n, t)| (n.as_str(), t.as_str())));
    Registry::load(sources).map_err(|(file, e)| anyhow!("{file}:{e}"))
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Verify {
            primes,
            conjectures,
            exponent_cap,
            jobs,
            report,
            format,
            fail_fast,
            allow_large,
            include_unsupported,
            file,
        } => {
            let (lo, hi) = parse_range(&primes)?;
            let config = SweepConfig {
                lo,
                hi,
                conjectures: conjectures.into_iter().collect(),
                exponent_cap,
                jobs,
                fail_fast,
                allow_large,
                include_unsupported,
                report: report.clone(),
                format,
            };
            let registry = registry_with(&file)?;
            let rep = run_sweep_with(&registry, &config)?;
            let text = render(&rep, format)?;
            match report {
                Some(path) => {
                    std::fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
                    let s = &rep.summary;
                    eprintln!(
                        "records: {} passes: {} skipped: {} errors: {} failures: {}",
                        s.records, s.passes, s.skipped, s.errors, s.failures
                    );
                }
                None => print!("{text}"),
            }
            Ok(exit_code(&rep) as u8)
        }
        Command::List { pattern } => {
            let pat = pattern.map(|p| glob::Pattern::new(&p)).transpose()?;
            for e in &builtin_registry().entries {
                if pat.as_ref().is_none_or(|p| p.matches(&e.id)) {
                    let tags = if e.tags.is_empty() { String::new() } else { format!("  [{}]", e.tags.join(", ")) };
                    println!("{:<28} {:<10} {} case(s){tags}", e.id, e.status.keyword(), e.cases.len());
                }
            }
            Ok(0)
        }
        Command::Parse { file } => {
            let text = std::fs::read_to_string(&file).with_context(|| format!("reading {}", file.display()))?;
            match parse(&text) {
                Ok(f) => {
                    println!("{}: ok ({} entries, {} defines)", file.display(), f.entries.len(), f.defines.len());
                    Ok(0)
                }
                Err(e) => {
                    eprintln!("{}:{e}", file.display());
                    Ok(2)
                }
            }
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
