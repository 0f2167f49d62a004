use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use decoy_cli::input::{read_input, RawInput};
use decoy_cli::pipeline::{self, resolve_precision, Mode, RunConfig, SynthSource};
use decoy_cli::report::FailureReport;
use decoy_cli::CliResult;

/// Exact photon-number yield bounds from decoy-state measurement data.
///
/// Exit codes: 0 success, 1 oracle disagreement or other failure, 2 invalid input,
/// 3 infeasible data, 4 search cap exceeded.
#[derive(Parser)]
#[command(name = "decoy", version)]
struct Cli {
    #[command(subcommand)]
    command: Option<Command>,
    #[command(flatten)]
    common: Common,
}

#[derive(Subcommand)]
enum Command {
    /// Yield (and optionally error-product) intervals; the default.
    Bounds,
    /// Synthesize detection data from the channel model or from random yields.
    Synth {
        /// Draw `y_1..y_N` uniformly from [0, 1] with `--seed` instead of using the model.
        #[arg(long, value_name = "N")]
        random_yields: Option<usize>,
    },
    /// Bounds plus the truncated-LP cross-check.
    Verify,
    /// Both analyses and the key rate.
    Keyrate,
    /// Runs the worked example and compares with the reference figures.
    Selftest,
}

#[derive(Args)]
struct Common {
    /// JSON or CSV input; stdin when absent or `-`.
    #[arg(long, short, global = true)]
    input: Option<PathBuf>,
    #[arg(long, value_enum, global = true)]
    mode: Option<Mode>,
    /// Significand width; rounded up to 64, 128, 256, 512 or 1024.
    #[arg(long, env = "DECOY_PRECISION_BITS", default_value_t = 256, global = true)]
    precision_bits: u32,
    /// Upper limit for the Z tail search.
    #[arg(long, default_value_t = decoy_core::bounds::DEFAULT_SEARCH_CAP, global = true)]
    cap: usize,
    /// Truncation order for the LP oracle; default max(40, L0 + 20).
    #[arg(long, global = true)]
    oracle_n: Option<usize>,
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    format: Format,
    /// Seed for `synth --random-yields`.
    #[arg(long, default_value_t = 0, global = true)]
    seed: u64,
    /// Cross-check every interval with the LP oracle.
    #[arg(long, global = true)]
    verify: bool,
    /// Directory for (n, lo, hi) and (mu, Q) tables.
    #[arg(long, value_name = "DIR", global = true)]
    emit_plot_data: Option<PathBuf>,
    /// 1-based signal intensity for the key rate; default the largest.
    #[arg(long, global = true)]
    signal: Option<usize>,
    /// Error-correction inefficiency.
    #[arg(long, global = true)]
    f: Option<String>,
    /// Accept channel parameters outside 0 <= A <= 1, 0 <= B <= eta <= 1/10.
    #[arg(long, global = true)]
    allow_out_of_domain: bool,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Text,
}

enum Action {
    Bounds(Mode),
    Synth(SynthSource),
    Selftest,
}

fn action(cli: &Cli) -> Action {
    let mode = cli.common.mode;
    match &cli.command {
        Some(Command::Selftest) => Action::Selftest,
        Some(Command::Synth { random_yields }) => {
            Action::Synth(random_yields.map_or(SynthSource::Model, SynthSource::RandomYields))
        }
        Some(Command::Verify) => Action::Bounds(Mode::Verify),
        Some(Command::Keyrate) => Action::Bounds(Mode::Keyrate),
        Some(Command::Bounds) | None => match mode {
            Some(Mode::Synth) => Action::Synth(SynthSource::Model),
            Some(m) => Action::Bounds(m),
            None => Action::Bounds(Mode::Yields),
        },
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut warnings = Vec::new();
    match execute(&cli, &mut warnings) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err}");
            if cli.common.format == Format::Json {
                let failure = FailureReport {
                    warnings,
                    errors: vec![err.to_object()],
                };
                println!("{}", serde_json::to_string_pretty(&failure).expect("serializable"));
            }
            ExitCode::from(err.exit_code() as u8)
        }
    }
}

fn execute(cli: &Cli, warnings: &mut Vec<String>) -> CliResult<u8> {
    let c = &cli.common;
    let act = action(cli);
    if let Action::Selftest = act {
        return selftest();
    }
    let (bits, note) = resolve_precision(c.precision_bits)?;
    if let Some(note) = note {
        eprintln!("warning: {note}");
        warnings.push(note);
    }
    let raw = read_input(c.input.as_deref())?;
    match act {
        Action::Synth(source) => {
            let (doc, notes) = pipeline::synth(&raw, bits, source, c.seed)?;
            for n in notes {
                eprintln!("note: {n}");
            }
            print!("{}", render_input(&doc, c.format));
            Ok(0)
        }
        Action::Bounds(mode) => {
            let cfg = RunConfig {
                mode,
                precision_bits: bits,
                cap: c.cap,
                oracle_n: c.oracle_n,
                verify: c.verify,
                signal: c.signal,
                f: c.f.clone(),
                allow_out_of_domain: c.allow_out_of_domain,
            };
            let mut outcome = pipeline::run(&raw, &cfg)?;
            if c.format != Format::Text {
                for w in &outcome.report.warnings {
                    eprintln!("warning: {w}");
                }
            }
            outcome.report.warnings.splice(0..0, warnings.drain(..));
            if let Some(dir) = &c.emit_plot_data {
                outcome.report.write_plot_data(dir)?;
            }
            let r = &outcome.report;
            print!(
                "{}",
                match c.format {
                    Format::Json => r.to_json(),
                    Format::Csv => r.to_csv(),
                    Format::Text => r.to_text(),
                }
            );
            match outcome.failure {
                Some(err) => {
                    eprintln!("error: {err}");
                    Ok(err.exit_code() as u8)
                }
                None => Ok(0),
            }
        }
        Action::Selftest => unreachable!("handled above"),
    }
}

fn render_input(doc: &RawInput, format: Format) -> String {
    match format {
        Format::Json => serde_json::to_string_pretty(doc).expect("serializable") + "\n",
        Format::Csv | Format::Text => pipeline::input_to_csv(doc),
    }
}

fn selftest() -> CliResult<u8> {
    let checks = pipeline::selftest()?;
    let mut failed = 0;
    for c in &checks {
        println!("{} {}: {}", if c.pass { "PASS" } else { "FAIL" }, c.name, c.detail);
        failed += usize::from(!c.pass);
    }
    println!("{} of {} checks passed", checks.len() - failed, checks.len());
    if failed > 0 {
        eprintln!("error: {failed} selftest check(s) failed");
    }
    Ok(u8::from(failed > 0))
}
