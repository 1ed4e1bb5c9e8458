//! Markdown summary built only from the files a manifest lists.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::pipeline::{sha256_hex, Artifact, Manifest};

const REQUIRED: [Artifact; 7] = [
    Artifact::Stats,
    Artifact::Sentiment,
    Artifact::TopTerms,
    Artifact::Metrics,
    Artifact::TopNodes,
    Artifact::Topics,
    Artifact::Coherence,
];

/// Reads a listed file, checking it against its recorded digest.
fn read_entry(dir: &Path, manifest: &Manifest, artifact: Artifact) -> Result<String> {
    let entry = manifest
        .entry(artifact.role())
        .ok_or_else(|| Error::ManifestGaps(vec![artifact.role().into()]))?;
    let path = dir.join(&entry.path);
    let bytes = fs::read(&path).map_err(Error::io(&path))?;
    if sha256_hex(&bytes) != entry.sha256 {
        return Err(Error::DigestMismatch {
            path: entry.path.clone(),
        });
    }
    String::from_utf8(bytes).map_err(|e| Error::format(&path, e.to_string()))
}

/// Parses CSV text into a header and rows.
pub fn csv_rows(text: &str) -> Result<(Vec<String>, Vec<Vec<String>>)> {
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let bad = |e: csv::Error| Error::format("<csv>", e.to_string());
    let header = rdr.headers().map_err(bad)?.iter().map(String::from).collect();
    let rows = rdr
        .records()
        .map(|r| r.map(|r| r.iter().map(String::from).collect()))
        .collect::<Result<_, _>>()
        .map_err(bad)?;
    Ok((header, rows))
}

fn table(out: &mut String, header: &[String], rows: &[Vec<String>]) {
    let _ = writeln!(out, "| {} |", header.join(" | "));
    let _ = writeln!(out, "|{}", " --- |".repeat(header.len()));
    for row in rows {
        let _ = writeln!(out, "| {} |", row.join(" | "));
    }
    if rows.is_empty() {
        out.push_str("\n_No rows._\n");
    }
    out.push('\n');
}

fn csv_table(out: &mut String, text: &str) -> Result<Vec<Vec<String>>> {
    let (header, rows) = csv_rows(text)?;
    table(out, &header, &rows);
    Ok(rows)
}

/// Section title to `(header, rows)` for every table in a report, in order.
pub fn parse_tables(markdown: &str) -> Vec<(String, Vec<String>, Vec<Vec<String>>)> {
    let mut tables = Vec::new();
    let mut title = String::new();
    let mut lines = markdown.lines().peekable();
    while let Some(line) = lines.next() {
        if let Some(t) = line.strip_prefix("## ") {
            title = t.to_string();
        } else if line.starts_with("| ") {
            let cells = |l: &str| l.trim_matches('|').split(" | ").map(|c| c.trim().to_string()).collect::<Vec<_>>();
            let header = cells(line);
            lines.next(); // separator
            let mut rows = Vec::new();
            while let Some(l) = lines.peek().filter(|l| l.starts_with("| ")) {
                rows.push(cells(l));
                lines.next();
            }
            tables.push((title.clone(), header, rows));
        }
    }
    tables
}

pub fn render(dir: &Path, manifest: &Manifest) -> Result<String> {
    let gaps: Vec<String> = REQUIRED
        .iter()
        .filter(|a| manifest.entry(a.role()).is_none())
        .map(|a| a.role().to_string())
        .collect();
    if !gaps.is_empty() {
        return Err(Error::ManifestGaps(gaps));
    }
    let mut md = String::from("# Crisis communication report\n\n");
    let _ = writeln!(md, "Seed: {}\n", manifest.seed);

    md.push_str("## Corpus\n\n");
    let stats = read_entry(dir, manifest, Artifact::Stats)?;
    let rows: Vec<Vec<String>> = stats
        .lines()
        .filter_map(|l| l.split_once('='))
        .map(|(k, v)| vec![k.to_string(), v.to_string()])
        .collect();
    table(&mut md, &["statistic".into(), "value".into()], &rows);

    md.push_str("## Sentiment by day\n\n");
    csv_table(&mut md, &read_entry(dir, manifest, Artifact::Sentiment)?)?;

    md.push_str("## Top terms\n\n");
    let terms = csv_table(&mut md, &read_entry(dir, manifest, Artifact::TopTerms)?)?;
    if let Some(last) = terms.last() {
        let coverage: f64 = last[3].parse().unwrap_or(0.0);
        let _ = writeln!(md, "The top {} terms cover {:.2}% of all tokens.\n", terms.len(), coverage * 100.0);
    }

    md.push_str("## Network metrics\n\n");
    csv_table(&mut md, &read_entry(dir, manifest, Artifact::Metrics)?)?;

    md.push_str("## Top nodes per community\n\n");
    csv_table(&mut md, &read_entry(dir, manifest, Artifact::TopNodes)?)?;

    md.push_str("## Topics per community\n\n");
    csv_table(&mut md, &read_entry(dir, manifest, Artifact::Topics)?)?;

    md.push_str("## Topic-count selection\n\n");
    csv_table(&mut md, &read_entry(dir, manifest, Artifact::Coherence)?)?;
    Ok(md)
}

/// Loads the manifest in `dir` and renders its report.
pub fn report(dir: &Path) -> Result<String> {
    render(dir, &Manifest::load(dir)?)
}
