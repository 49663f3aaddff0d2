use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use sha2::{Digest, Sha256};

use super::evaluate::{Averaging, EvalReport};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Markdown,
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "json" => Ok(Self::Json),
            "md" | "markdown" => Ok(Self::Markdown),
            other => Err(Error::UnsupportedFormat(other.to_string())),
        }
    }
}

pub fn render_report(report: &EvalReport, format: ReportFormat) -> Result<Vec<u8>> {
    match format {
        ReportFormat::Json => {
            let mut out =
                serde_json::to_vec_pretty(report).map_err(|e| Error::Internal(e.to_string()))?;
            out.push(b'\n');
            Ok(out)
        }
        ReportFormat::Markdown => Ok(render_markdown(report).into_bytes()),
    }
}

pub fn parse_report(bytes: &[u8]) -> Result<EvalReport> {
    serde_json::from_slice(bytes).map_err(|e| Error::InvalidInput(format!("report JSON: {e}")))
}

fn pct(v: f64) -> String {
    format!("{:.2}", v * 100.0)
}

fn render_markdown(report: &EvalReport) -> String {
    let mut header: Vec<String> = report.rank_k.keys().map(|k| format!("R@{k}")).collect();
    header.extend(["mAP".to_string(), "mSD".to_string()]);
    let mut values: Vec<String> = report.rank_k.values().map(|&v| pct(v)).collect();
    values.extend([pct(report.map), pct(report.msd)]);

    let mut md = String::new();
    let _ = writeln!(md, "| {} |", header.join(" | "));
    let _ = writeln!(md, "|{}", "---:|".repeat(header.len()));
    let _ = writeln!(md, "| {} |", values.join(" | "));
    md.push('\n');

    let averaging = match report.averaging {
        Averaging::Caption => "caption",
        Averaging::Image => "image",
    };
    let _ = writeln!(
        md,
        "- queries: {} ({} scored, {} without a gallery match)",
        report.num_queries, report.scored_queries, report.skipped_queries
    );
    let _ = writeln!(md, "- gallery: {}", report.num_gallery);
    let _ = writeln!(md, "- averaged per: {averaging}");
    let _ = writeln!(
        md,
        "- mSD k: {}, epsilon: {:e}",
        report.config.msd_k, report.config.epsilon
    );
    for (name, digest) in &report.provenance {
        let _ = writeln!(md, "- {name}: sha256 `{digest}`");
    }
    md
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}
