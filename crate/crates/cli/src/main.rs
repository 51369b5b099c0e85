use clap::{Parser, ValueEnum};
use santalo_core::error::Error;
use santalo_core::harness::{self, Command, Format, ScenarioConfig};
use santalo_core::report::Report;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

const EXIT_PASS: u8 = 0;
const EXIT_ASSERTION: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_SOLVER: u8 = 3;

#[derive(Parser, Debug)]
#[command(name = "santalo-kit", version, about = "Config-driven checks of volume-product inequalities")]
struct Cli {
    /// Scenario to run; overrides the `command` field of the config.
    #[arg(value_parser = parse_command)]
    command: Command,
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    /// Report destination; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FormatArg {
    Json,
    Csv,
}

fn parse_command(s: &str) -> Result<Command, String> {
    Command::from_name(s).ok_or_else(|| {
        let names: Vec<_> = Command::ALL.iter().map(|c| c.name()).collect();
        format!("unknown command '{s}', expected one of: {}", names.join(", "))
    })
}

/// Loads the config, letting the positional command fill in or replace the
/// `command` field before typed parsing.
fn load(cli: &Cli) -> Result<ScenarioConfig, Error> {
    let text = std::fs::read_to_string(&cli.config)
        .map_err(|e| Error::InvalidInput(format!("cannot read config {}: {e}", cli.config.display())))?;
    let mut value: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| Error::InvalidInput(format!("config {}: {e}", cli.config.display())))?;
    let obj = value
        .as_object_mut()
        .ok_or_else(|| Error::InvalidInput("config must be an object".into()))?;
    let wanted = serde_json::Value::String(cli.command.name().into());
    let mut cfg = if obj.get("command") == Some(&wanted) {
        harness::parse_config(&text)?
    } else {
        obj.insert("command".into(), wanted);
        harness::parse_config(&value.to_string())?
    };
    cfg.base_dir = cli.config.parent().map(Path::to_path_buf);
    // Paths written in the config are relative to the config file, paths
    // given as flags to the working directory.
    if let Some(base) = &cfg.base_dir {
        for p in [&mut cfg.output.path, &mut cfg.output.artifact].into_iter().flatten() {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
    }
    if let Some(s) = cli.seed {
        cfg.seed = Some(s);
    }
    if let Some(p) = &cli.out {
        cfg.output.path = Some(p.clone());
    }
    if let Some(f) = cli.format {
        cfg.output.format = match f {
            FormatArg::Json => Format::Json,
            FormatArg::Csv => Format::Csv,
        };
    }
    Ok(cfg)
}

fn csv_summary(report: &Report) -> Result<String, Error> {
    let io = |e: csv::Error| Error::InvalidInput(format!("csv output: {e}"));
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["section", "name", "tag", "lhs", "rhs", "tolerance", "passed"]).map_err(io)?;
    w.write_record(["meta", "scenario", "", &report.scenario, "", "", ""]).map_err(io)?;
    w.write_record(["meta", "digest", "", &report.digest, "", "", ""]).map_err(io)?;
    for row in report.rows() {
        w.write_record(&row).map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::InvalidInput(format!("csv output: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

fn write_to(path: Option<&Path>, text: &str) -> Result<(), Error> {
    match path {
        Some(p) => std::fs::write(p, text)
            .map_err(|e| Error::InvalidInput(format!("cannot write {}: {e}", p.display()))),
        None => {
            let mut out = std::io::stdout().lock();
            writeln!(out, "{text}").map_err(|e| Error::InvalidInput(format!("stdout: {e}")))
        }
    }
}

fn clip(s: &str, max: usize) -> std::borrow::Cow<'_, str> {
    match s.char_indices().nth(max) {
        Some((i, _)) => format!("{} ...", &s[..i]).into(),
        None => s.into(),
    }
}

fn execute(cli: &Cli) -> Result<bool, Error> {
    let cfg = load(cli)?;
    let out = harness::run(&cfg)?;
    let text = match cfg.output.format {
        Format::Json => out.report.to_json(),
        Format::Csv => csv_summary(&out.report)?,
    };
    write_to(cfg.output.path.as_deref(), &text)?;
    if let (Some(a), Some(p)) = (&out.artifact, &cfg.output.artifact) {
        write_to(Some(p), a)?;
    }
    for w in &out.report.warnings {
        eprintln!("warning: {}", clip(w, 240));
    }
    for a in out.report.assertions.iter().filter(|a| !a.passed) {
        eprintln!(
            "failed: {} [{}] {:?}: lhs {:e}, rhs {:e}, tolerance {:e}",
            a.name, a.tag, a.relation, a.lhs, a.rhs, a.tolerance
        );
    }
    Ok(out.report.passed())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(true) => ExitCode::from(EXIT_PASS),
        Ok(false) => ExitCode::from(EXIT_ASSERTION),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_input_error() { EXIT_INPUT } else { EXIT_SOLVER })
        }
    }
}
