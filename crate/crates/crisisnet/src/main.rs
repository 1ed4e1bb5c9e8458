use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use crisisnet::config::PipelineConfig;
use crisisnet::pipeline::{self, Artifact, REPORT};
use crisisnet::{report, Error, Result};

/// Crisis-communication analytics over archived geotagged tweets.
///
/// Any config value can also be set with a flag of its dotted name,
/// e.g. `--topics.sweeps 500` or `--graph.method=path-weight`.
#[derive(Debug, Parser)]
#[command(name = "crisisnet", version)]
struct Cli {
    /// Pipeline configuration (TOML).
    #[arg(long, global = true, default_value = "crisisnet.toml")]
    config: PathBuf,
    /// Overrides `seed`.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Overrides `out`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, Subcommand)]
enum Command {
    /// Load, dedupe, filter and geo-locate; write the corpus and stats.
    Ingest,
    /// Daily negative/neutral/positive counts.
    Sentiment,
    /// Top terms and the term-by-day matrix.
    Heatmap,
    /// Top bigram network (CSV and GEXF).
    Bigrams,
    /// Per-community LDA topics with coherence-based K selection.
    Topics,
    /// Mention graph exports, metrics and top nodes.
    Graph,
    /// Markdown summary of a completed run in the output directory.
    Report,
    /// The whole pipeline, followed by the report.
    Run,
}

impl Command {
    fn artifacts(self) -> &'static [Artifact] {
        use Artifact::*;
        match self {
            Command::Ingest => &[Corpus, Stats],
            Command::Sentiment => &[Sentiment],
            Command::Heatmap => &[TopTerms, Heatmap],
            Command::Bigrams => &[BigramEdges, BigramGexf],
            Command::Topics => &[Topics, Coherence],
            Command::Graph => &[MentionEdges, MentionGexf, MentionDot, Metrics, TopNodes],
            Command::Report => &[],
            Command::Run => &Artifact::ALL,
        }
    }
}

/// Splits `--a.b value` / `--a.b=value` pairs out of the argument list.
fn split_overrides(args: Vec<String>) -> Result<(Vec<String>, Vec<(String, String)>)> {
    let mut rest = Vec::new();
    let mut overrides = Vec::new();
    let mut it = args.into_iter();
    while let Some(arg) = it.next() {
        let Some(flag) = arg.strip_prefix("--").filter(|f| f.split('=').next().unwrap_or("").contains('.')) else {
            rest.push(arg);
            continue;
        };
        match flag.split_once('=') {
            Some((k, v)) => overrides.push((k.to_string(), v.to_string())),
            None => {
                let v = it.next().ok_or_else(|| Error::config(flag, "missing value"))?;
                overrides.push((flag.to_string(), v));
            }
        }
    }
    Ok((rest, overrides))
}

fn execute(cli: Cli, mut overrides: Vec<(String, String)>) -> Result<()> {
    if let Some(seed) = cli.seed {
        overrides.push(("seed".into(), seed.to_string()));
    }
    let load = |overrides: &[(String, String)]| -> Result<PipelineConfig> {
        let mut config = PipelineConfig::load(&cli.config, overrides)?;
        if let Some(out) = &cli.out {
            config.out = out.clone();
        }
        Ok(config)
    };
    if let Command::Report = cli.command {
        let dir = match &cli.out {
            Some(out) => out.clone(),
            None => load(&overrides)?.out,
        };
        let text = report::report(&dir)?;
        let path = dir.join(REPORT);
        std::fs::write(&path, &text).map_err(Error::io(&path))?;
        println!("{}", path.display());
        return Ok(());
    }
    let config = load(&overrides)?;
    let summary = pipeline::run(&config, cli.command.artifacts())?;
    for w in &summary.warnings {
        eprintln!("warning: {w}");
    }
    let s = &summary.stats;
    eprintln!(
        "loaded {} tweets ({} malformed lines skipped), kept {} from {} users",
        s.total_loaded,
        s.malformed_skipped,
        s.kept(),
        s.unique_users
    );
    for entry in &summary.manifest.files {
        println!("{}  {}", entry.sha256, config.out.join(&entry.path).display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let (args, overrides) = match split_overrides(std::env::args().collect()) {
        Ok(split) => split,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(cli, overrides) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
