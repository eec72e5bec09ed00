use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use bell_lhv::harness::commands::{self, Prediction, ValidateOutput};
use bell_lhv::harness::report::ReportFormat;
use bell_lhv::harness::{emit_report, Config};
use bell_lhv::search::SearchResult;
use bell_lhv::{Error, Result};
use clap::{Parser, Subcommand};

/// Local-realism toolkit: model validation, quantum predictions, count
/// analysis and detection-loophole search.
#[derive(Debug, Parser)]
#[command(name = "bell-lhv", version)]
struct Cli {
    /// TOML configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file; standard output when omitted.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Generator seed for `simulate` (overrides [simulate] seed).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output format: json or text.
    #[arg(long, global = true, default_value = "json")]
    format: String,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check a JSON model document; evaluates CH when settings A, C, B, D exist.
    Validate { model: PathBuf },
    /// Closed-form predictions for the [cascade], [pdc] and [kinematics] sections.
    Predict,
    /// Analyze a coincidence-count CSV file.
    Analyze { counts: PathBuf },
    /// Maximize S* over local models at each [search] efficiency.
    Search,
    /// Write synthetic counts from [pdc], or from a mixture in a search output file.
    Simulate { mixture: Option<PathBuf> },
    /// Re-render a JSON analysis report.
    Report { report: PathBuf },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_input_error() { 1 } else { 2 })
        }
    }
}

fn run(cli: &Cli) -> Result<()> {
    let format: ReportFormat = cli.format.parse()?;
    let cfg = match &cli.config {
        Some(path) => Config::load(path)?,
        None => Config::default(),
    };
    let text = match &cli.command {
        Command::Validate { model } => {
            let out = commands::validate(&std::fs::read_to_string(model)?)?;
            let rendered = match format {
                ReportFormat::Json => json(&out)?,
                ReportFormat::Text => validate_text(&out),
            };
            if !out.is_valid() {
                write_output(cli.output.as_deref(), &rendered)?;
                return Err(Error::InvalidModel(format!(
                    "{} violation(s)",
                    out.validation.violations.len()
                )));
            }
            rendered
        }
        Command::Predict => {
            let p = commands::predict(&cfg)?;
            match format {
                ReportFormat::Json => json(&p)?,
                ReportFormat::Text => predict_text(&p),
            }
        }
        Command::Analyze { counts } => emit_report(&commands::analyze(counts, &cfg)?, &cli.format)?,
        Command::Search => {
            let results = commands::search(&cfg)?;
            match format {
                ReportFormat::Json => json(&results)?,
                ReportFormat::Text => search_text(&results),
            }
        }
        Command::Simulate { mixture } => {
            let mixture = match mixture {
                Some(path) => Some(commands::read_mixture(&std::fs::read_to_string(path)?)?),
                None => None,
            };
            commands::simulate(&cfg, mixture.as_ref(), cli.seed)?.to_csv_string()?
        }
        Command::Report { report } => commands::report(report, &cli.format)?,
    };
    write_output(cli.output.as_deref(), &text)
}

fn json<T: serde::Serialize>(value: &T) -> Result<String> {
    Ok(serde_json::to_string_pretty(value)? + "\n")
}

fn write_output(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn validate_text(out: &ValidateOutput) -> String {
    let mut s = String::new();
    if out.is_valid() {
        s.push_str("model is valid\n");
    }
    for v in &out.validation.violations {
        let _ = writeln!(s, "{:?}: {}", v.kind, v.message);
    }
    if let Some(ch) = &out.ch {
        let _ = writeln!(s, "{}", ch.verdict_line());
    }
    if let Some(f) = &out.feasibility {
        let _ = writeln!(
            s,
            "joint distribution over A, C, B, D: {}",
            if f.is_feasible() {
                "exists"
            } else {
                "does not exist"
            }
        );
    }
    s
}

fn predict_text(p: &Prediction) -> String {
    let mut s = String::new();
    if let Some(c) = &p.cascade {
        let _ = writeln!(
            s,
            "cascade: eta = {:e}, V = {}, alpha = {}",
            c.eta, c.v, c.alpha
        );
        let _ = writeln!(s, "  {}", c.ch.verdict_line());
        let _ = writeln!(s, "  {}", c.fc.verdict_line());
        let _ = writeln!(
            s,
            "  reduced CH lhs = {:.6e} (<= 2), reduced FC lhs = {:.6} (<= 2)",
            c.bi_lhs, c.fc_reduced
        );
        if let Some(m) = &c.aperture_maximum {
            let _ = writeln!(
                s,
                "  aperture maximum of reduced CH lhs = {:.6} at theta = {:.6}",
                m.max_lhs, m.theta_star
            );
        }
    }
    if let Some(d) = &p.pdc {
        let _ = writeln!(s, "pdc: V = {}, eta = {}", d.config.v, d.config.eta);
        let _ = writeln!(s, "  {}", d.chsh_star.verdict_line());
        match d.min_efficiency {
            Some(z) => {
                let _ = writeln!(s, "  CH can fail for detector efficiency above {z:.6}");
            }
            None => {
                let _ = writeln!(s, "  CH cannot fail at this visibility");
            }
        }
    }
    if let Some(k) = &p.kinematics {
        let _ = writeln!(s, "kinematics: l_min = {:.6e} m", k.l_min);
        if let Some(dt) = k.dt_arrival {
            let _ = writeln!(s, "  arrival-time spread = {dt:.6e} s");
        }
        if let Some(l) = k.l_meas {
            let _ = writeln!(s, "  light distance during measurement = {l:.6e} m");
        }
    }
    s
}

fn search_text(results: &[SearchResult]) -> String {
    let mut s = String::from("eta  S*_max  S\n");
    for r in results {
        let _ = writeln!(s, "{} {:.9} {:.9}", r.eta, r.s_star_max, r.genuine_s);
    }
    s
}
