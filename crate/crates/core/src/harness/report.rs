//! JSON and plain-text rendering of analysis reports.

use std::fmt::Write;
use std::str::FromStr;

use super::analysis::AnalysisReport;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Text,
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(ReportFormat::Json),
            "text" => Ok(ReportFormat::Text),
            other => Err(Error::UnknownFormat(other.to_string())),
        }
    }
}

/// Renders `r`; `format` is `json` or `text`.
pub fn emit_report(r: &AnalysisReport, format: &str) -> Result<String> {
    Ok(match format.parse()? {
        ReportFormat::Json => {
            let mut s = serde_json::to_string_pretty(r)?;
            s.push('\n');
            s
        }
        ReportFormat::Text => render_text(r),
    })
}

fn render_text(r: &AnalysisReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "pairs:");
    for p in &r.pairs {
        let _ = write!(
            out,
            "  ({}, {})  coincidences = {}  E* = {:.6} +- {:.6}",
            p.settings[0], p.settings[1], p.coincidences, p.e_star, p.err
        );
        if let (Some(e), Some(err)) = (p.e, p.e_err) {
            let _ = write!(out, "  E = {e:.6e} +- {err:.3e}");
        }
        out.push('\n');
    }
    let _ = writeln!(out, "S* = {:.6} +- {:.6}", r.s_star, r.s_err);
    if let (Some(s), Some(err)) = (r.s, r.s_abs_err) {
        let _ = writeln!(out, "S = {s:.6e} +- {err:.3e}");
    }
    let _ = writeln!(out, "V_B = {:.6}", r.v_b);
    let _ = writeln!(out, "verdicts:");
    for v in &r.verdicts {
        let _ = writeln!(out, "  {}", v.verdict_line());
    }
    if r.only_auxiliary() {
        let _ = writeln!(
            out,
            "note: no genuine Bell inequality could be tested on this data; \
             declare an absolute normalization and supply singles to evaluate CH"
        );
    }
    let p = &r.provenance;
    let _ = writeln!(
        out,
        "provenance: {}  input sha256 {}",
        p.generator, p.input_sha256
    );
    if let Some(seed) = p.seed {
        let _ = writeln!(out, "seed: {seed}");
    }
    let _ = writeln!(out, "plot data (phi  E*  err):");
    let mut points: Vec<_> = r
        .pairs
        .iter()
        .filter_map(|p| p.phi.map(|phi| (phi, p.e_star, p.err)))
        .collect();
    points.sort_by(|a, b| a.0.total_cmp(&b.0));
    for (phi, e, err) in points {
        let _ = writeln!(out, "{phi:.9} {e:.9} {err:.9}");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::analysis::run_analysis;
    use crate::harness::config::Config;
    use crate::harness::dataset::CountDataset;

    fn report() -> AnalysisReport {
        let ds = CountDataset::parse(
            "setting_a,setting_b,n_pp,n_pm,n_mp,n_mm\n\
             A,B,853,147,151,849\nA,D,850,149,150,851\nC,B,848,152,150,850\nC,D,151,849,852,148\n",
        )
        .unwrap();
        run_analysis(&ds, &Config::default()).unwrap()
    }

    #[test]
    fn json_round_trip() {
        let r = report();
        let back: AnalysisReport = serde_json::from_str(&emit_report(&r, "json").unwrap()).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn text_flags_auxiliary_only() {
        let text = emit_report(&report(), "text").unwrap();
        assert!(text.contains("not a genuine Bell inequality"));
        assert!(text.contains("plot data"));
        assert_eq!(
            text.lines()
                .filter(|l| l.starts_with("  CHSH-star"))
                .count(),
            1
        );
    }

    #[test]
    fn unknown_format() {
        assert!(
            matches!(emit_report(&report(), "xml"), Err(Error::UnknownFormat(f)) if f == "xml")
        );
    }
}
