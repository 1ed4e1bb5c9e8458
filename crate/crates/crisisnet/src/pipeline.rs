//! Staged pipeline: ingest → textprep → {sentiment, ngrams} → netgraph →
//! per-community topics, writing artifacts plus a digest manifest.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use crisisnet_core::ingest::{self, CorpusStats, Keywords, Region, Tweet};
use crisisnet_core::netgraph::{self, GroupSummary, MentionGraph, Partition, PartitionKind};
use crisisnet_core::ngrams::{self, BigramModel};
use crisisnet_core::sentiment::{self, Lexicon};
use crisisnet_core::textprep::{self, Document, Stoplist};
use crisisnet_core::topics::{self, SelectionConfig, Vocabulary};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::archive;
use crate::config::PipelineConfig;
use crate::error::{Error, Result};
use crate::export::{self, MetricsRow, TopicWord};
use crate::resources;

pub const MANIFEST: &str = "manifest.json";
pub const REPORT: &str = "report.md";

/// Every artifact the pipeline can produce, with its manifest role and
/// file name.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Artifact {
    Corpus,
    Stats,
    Sentiment,
    TopTerms,
    Heatmap,
    BigramEdges,
    BigramGexf,
    MentionEdges,
    MentionGexf,
    MentionDot,
    Metrics,
    TopNodes,
    Topics,
    Coherence,
}

impl Artifact {
    pub const ALL: [Artifact; 14] = [
        Artifact::Corpus,
        Artifact::Stats,
        Artifact::Sentiment,
        Artifact::TopTerms,
        Artifact::Heatmap,
        Artifact::BigramEdges,
        Artifact::BigramGexf,
        Artifact::MentionEdges,
        Artifact::MentionGexf,
        Artifact::MentionDot,
        Artifact::Metrics,
        Artifact::TopNodes,
        Artifact::Topics,
        Artifact::Coherence,
    ];

    pub fn role(self) -> &'static str {
        match self {
            Artifact::Corpus => "corpus",
            Artifact::Stats => "stats",
            Artifact::Sentiment => "sentiment",
            Artifact::TopTerms => "top_terms",
            Artifact::Heatmap => "heatmap",
            Artifact::BigramEdges => "bigram_edges",
            Artifact::BigramGexf => "bigram_gexf",
            Artifact::MentionEdges => "mention_edges",
            Artifact::MentionGexf => "mention_gexf",
            Artifact::MentionDot => "mention_dot",
            Artifact::Metrics => "metrics",
            Artifact::TopNodes => "top_nodes",
            Artifact::Topics => "topics",
            Artifact::Coherence => "coherence",
        }
    }

    pub fn file_name(self) -> &'static str {
        match self {
            Artifact::Corpus => "corpus.jsonl",
            Artifact::Stats => "stats.txt",
            Artifact::Sentiment => "sentiment.csv",
            Artifact::TopTerms => "top_terms.csv",
            Artifact::Heatmap => "heatmap.csv",
            Artifact::BigramEdges => "bigrams.csv",
            Artifact::BigramGexf => "bigrams.gexf",
            Artifact::MentionEdges => "mentions.csv",
            Artifact::MentionGexf => "mentions.gexf",
            Artifact::MentionDot => "mentions.dot",
            Artifact::Metrics => "metrics.csv",
            Artifact::TopNodes => "top_nodes.csv",
            Artifact::Topics => "topics.csv",
            Artifact::Coherence => "coherence.csv",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub role: String,
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

/// Output listing; paths are relative to the manifest's directory.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub seed: u64,
    pub files: Vec<ManifestEntry>,
}

impl Manifest {
    pub fn load(dir: &Path) -> Result<Self> {
        let path = dir.join(MANIFEST);
        let text = fs::read_to_string(&path).map_err(Error::io(&path))?;
        serde_json::from_str(&text).map_err(|e| Error::format(&path, e.to_string()))
    }

    pub fn entry(&self, role: &str) -> Option<&ManifestEntry> {
        self.files.iter().find(|e| e.role == role)
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Tracks files written during a run so a failure can remove them.
struct OutputDir {
    root: PathBuf,
    written: Vec<PathBuf>,
    entries: Vec<ManifestEntry>,
}

impl OutputDir {
    fn create(root: &Path) -> Result<Self> {
        fs::create_dir_all(root).map_err(Error::io(root))?;
        Ok(Self {
            root: root.to_path_buf(),
            written: Vec::new(),
            entries: Vec::new(),
        })
    }

    fn put(&mut self, name: &str, bytes: &[u8]) -> Result<PathBuf> {
        let path = self.root.join(name);
        fs::write(&path, bytes).map_err(Error::io(&path))?;
        self.written.push(path.clone());
        Ok(path)
    }

    fn artifact(&mut self, artifact: Artifact, bytes: Vec<u8>) -> Result<()> {
        self.put(artifact.file_name(), &bytes)?;
        self.entries.push(ManifestEntry {
            role: artifact.role().into(),
            path: artifact.file_name().into(),
            sha256: sha256_hex(&bytes),
            bytes: bytes.len() as u64,
        });
        Ok(())
    }

    fn discard(self) {
        for path in self.written {
            let _ = fs::remove_file(path);
        }
    }
}

fn render(f: impl FnOnce(&mut Vec<u8>) -> std::io::Result<()>) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    f(&mut buf).map_err(Error::io("<buffer>"))?;
    Ok(buf)
}

/// Inputs read before any output is created.
pub struct Resources {
    pub lexicon: Lexicon,
    pub stoplist: Stoplist,
    pub regions: Vec<Region>,
    pub agency_types: Vec<(String, String)>,
    pub keywords: Keywords,
}

impl Resources {
    pub fn load(config: &PipelineConfig) -> Result<Self> {
        let input = &config.input;
        Ok(Self {
            lexicon: resources::load_lexicon(&input.lexicon)?,
            stoplist: match &input.stoplist {
                Some(p) => resources::load_stoplist(p)?,
                None => Stoplist::english(),
            },
            regions: match &input.regions {
                Some(p) => resources::load_regions(p)?,
                None => Vec::new(),
            },
            agency_types: match &input.agency_types {
                Some(p) => resources::load_agency_types(p)?,
                None => Vec::new(),
            },
            keywords: Keywords::new(input.keywords.iter().map(|k| k.trim()).filter(|k| !k.is_empty()))
                .map_err(|e| Error::config("input.keywords", e.to_string()))?,
        })
    }
}

/// Loaded, filtered corpus and its documents, aligned by index.
pub struct Corpus {
    pub tweets: Vec<Tweet>,
    pub docs: Vec<Document>,
    pub stats: CorpusStats,
    pub warnings: Vec<String>,
}

pub fn ingest(config: &PipelineConfig, res: &Resources) -> Result<Corpus> {
    let mut stats = CorpusStats::default();
    let mut tweets = Vec::new();
    let mut warnings = Vec::new();
    for path in &config.input.archives {
        let a = archive::load_archive(path)?;
        for (line, reason) in a.skipped {
            warnings.push(format!("{}:{line}: skipped: {reason}", path.display()));
        }
        stats.merge(&a.stats);
        tweets.extend(a.tweets);
    }
    let tweets = ingest::prepare_corpus(tweets, &res.keywords, &mut stats);
    let offset = config.input.utc_offset_seconds;
    let docs = tweets
        .iter()
        .map(|t| {
            let tokens = textprep::remove_stopwords(&t.tokens(), &res.stoplist);
            Document::new(t.id.clone(), tokens, ingest::day_of(&t.created_at, offset))
        })
        .collect();
    Ok(Corpus {
        tweets,
        docs,
        stats,
        warnings,
    })
}

/// Mention graph, its components, and the communities of its largest
/// component.
pub struct Network {
    pub graph: MentionGraph,
    pub components: Partition,
    pub core: MentionGraph,
    pub communities: Partition,
}

pub fn network(config: &PipelineConfig, res: &Resources, tweets: &[Tweet]) -> Result<Network> {
    let mut graph = netgraph::build_mention_graph(tweets);
    graph.set_agency_types(res.agency_types.iter().map(|(h, a)| (h.as_str(), a.as_str())));
    let components = netgraph::weak_components(&graph);
    let core = netgraph::largest_component(&graph);
    let communities = if core.node_count() == 0 {
        Partition::from_raw(&[], PartitionKind::Community)
    } else {
        netgraph::detect_communities(&core, &config.graph.community_options(config.seed))?
    };
    Ok(Network {
        graph,
        components,
        core,
        communities,
    })
}

pub fn metrics_rows(net: &Network) -> Vec<MetricsRow> {
    let mut rows = vec![MetricsRow {
        group: "all".into(),
        kind: "graph".into(),
        summary: GroupSummary::of(0, &net.graph),
    }];
    for (partition, graph) in [(&net.components, &net.graph), (&net.communities, &net.core)] {
        rows.extend(netgraph::summarize(graph, partition).into_iter().map(|s| MetricsRow {
            group: s.label.to_string(),
            kind: partition.kind.as_str().into(),
            summary: s,
        }));
    }
    rows
}

/// Topic tables for every community with enough authored documents.
pub fn community_topics(
    config: &PipelineConfig,
    corpus: &Corpus,
    net: &Network,
) -> Result<(Vec<TopicWord>, Vec<(usize, usize, f64)>)> {
    let t = &config.topics;
    let mut words = Vec::new();
    let mut coherence = Vec::new();
    for (label, members) in net.communities.groups().into_iter().enumerate() {
        let handles: BTreeSet<&str> = members.iter().map(|&i| net.core.handle(i)).collect();
        let docs: Vec<&Vec<String>> = corpus
            .tweets
            .iter()
            .zip(&corpus.docs)
            .filter(|(tw, d)| handles.contains(tw.author_handle.as_str()) && !d.tokens.is_empty())
            .map(|(_, d)| &d.tokens)
            .collect();
        if docs.len() < t.min_docs {
            continue;
        }
        let vocab = Vocabulary::from_docs(&docs);
        let encoded = vocab.encode(&docs);
        let selection = SelectionConfig {
            ks: (t.k_min..=t.k_max).collect(),
            alpha: t.alpha,
            beta: t.beta,
            sweeps: t.sweeps,
            seed: config.seed.wrapping_add(1000 * label as u64),
            coherence_words: t.coherence_words,
        };
        let chosen = topics::select_topic_count(&encoded, vocab.len(), &selection)?;
        coherence.extend(chosen.table.iter().map(|&(k, score)| (label, k, score)));
        for topic in 0..chosen.best_k {
            let top = topics::top_words(&chosen.posterior.phi, topic, t.top_words, &vocab);
            words.extend(top.into_iter().enumerate().map(|(i, (word, probability))| TopicWord {
                community: label,
                topic,
                rank: i + 1,
                word,
                probability,
            }));
        }
    }
    Ok((words, coherence))
}

/// What a run produced.
#[derive(Debug)]
pub struct RunSummary {
    pub manifest: Manifest,
    pub stats: CorpusStats,
    pub warnings: Vec<String>,
}

fn staged<T>(stage: &'static str, r: Result<T>) -> Result<T> {
    r.map_err(|e| e.in_stage(stage))
}

/// Runs the stages needed for `wanted` and writes those artifacts plus the
/// manifest (and the report when every artifact is requested). Nothing is
/// left behind on failure.
pub fn run(config: &PipelineConfig, wanted: &[Artifact]) -> Result<RunSummary> {
    staged("config", config.validate())?;
    let res = staged("config", Resources::load(config))?;
    let mut out = OutputDir::create(&config.out)?;
    match execute(config, &res, wanted, &mut out) {
        Ok(summary) => Ok(summary),
        Err(e) => {
            out.discard();
            Err(e)
        }
    }
}

fn execute(config: &PipelineConfig, res: &Resources, wanted: &[Artifact], out: &mut OutputDir) -> Result<RunSummary> {
    let wants = |a: Artifact| wanted.contains(&a);
    let wants_any = |xs: &[Artifact]| xs.iter().any(|a| wanted.contains(a));

    let corpus = staged("ingest", ingest(config, res))?;
    let mut warnings = corpus.warnings.clone();
    if wants(Artifact::Corpus) {
        let bytes = render(|b| archive::write_normalized(b, &corpus.tweets, &res.regions, |w| warnings.push(w)));
        out.artifact(Artifact::Corpus, staged("ingest", bytes)?)?;
    }
    if wants(Artifact::Stats) {
        let bytes = staged("ingest", render(|b| archive::write_stats(b, &corpus.stats)))?;
        out.artifact(Artifact::Stats, bytes)?;
    }

    if wants(Artifact::Sentiment) {
        let series = sentiment::sentiment_timeseries(&corpus.docs, &res.lexicon);
        let bytes = staged("sentiment", render(|b| export::write_sentiment(b, &series)))?;
        out.artifact(Artifact::Sentiment, bytes)?;
    }

    let n = &config.ngrams;
    if wants_any(&[Artifact::TopTerms, Artifact::Heatmap]) {
        let top = ngrams::top_terms(&corpus.docs, n.top_terms.max(n.heatmap_terms));
        if wants(Artifact::TopTerms) {
            let listed = &top[..top.len().min(n.top_terms)];
            out.artifact(Artifact::TopTerms, staged("ngrams", render(|b| export::write_top_terms(b, listed)))?)?;
        }
        if wants(Artifact::Heatmap) {
            let terms: Vec<String> = top.iter().take(n.heatmap_terms).map(|t| t.term.clone()).collect();
            let matrix = ngrams::term_time_matrix(&corpus.docs, &terms);
            out.artifact(Artifact::Heatmap, staged("ngrams", render(|b| export::write_heatmap(b, &matrix)))?)?;
        }
    }
    if wants_any(&[Artifact::BigramEdges, Artifact::BigramGexf]) {
        let model = BigramModel::fit(&corpus.docs);
        let graph = ngrams::bigram_graph(&model, n.bigram_edges);
        if wants(Artifact::BigramEdges) {
            let edges = graph.edges.iter().map(|e| (e.source.as_str(), e.target.as_str(), e.weight));
            out.artifact(Artifact::BigramEdges, staged("ngrams", render(|b| export::write_edge_list(b, edges)))?)?;
        }
        if wants(Artifact::BigramGexf) {
            out.artifact(Artifact::BigramGexf, export::bigram_gexf(&graph).render().into_bytes())?;
        }
    }

    let graph_outputs = [
        Artifact::MentionEdges,
        Artifact::MentionGexf,
        Artifact::MentionDot,
        Artifact::Metrics,
        Artifact::TopNodes,
        Artifact::Topics,
        Artifact::Coherence,
    ];
    if wants_any(&graph_outputs) {
        let net = staged("netgraph", network(config, res, &corpus.tweets))?;
        if wants(Artifact::MentionEdges) {
            let bytes = render(|b| export::write_edge_list(b, export::mention_edges(&net.graph)));
            out.artifact(Artifact::MentionEdges, staged("netgraph", bytes)?)?;
        }
        if wants(Artifact::MentionGexf) {
            let gexf = export::mention_gexf(&net.graph, &net.components, &net.core, &net.communities);
            out.artifact(Artifact::MentionGexf, gexf.render().into_bytes())?;
        }
        if wants(Artifact::MentionDot) {
            let dot = export::mention_dot(&net.graph, &net.core, &net.communities);
            out.artifact(Artifact::MentionDot, dot.into_bytes())?;
        }
        if wants(Artifact::Metrics) {
            let rows = metrics_rows(&net);
            out.artifact(Artifact::Metrics, staged("netgraph", render(|b| export::write_metrics(b, &rows)))?)?;
        }
        if wants(Artifact::TopNodes) {
            let ranked = netgraph::top_nodes(&net.core, &net.communities, config.graph.top_nodes);
            out.artifact(Artifact::TopNodes, staged("netgraph", render(|b| export::write_top_nodes(b, &ranked)))?)?;
        }
        if wants_any(&[Artifact::Topics, Artifact::Coherence]) {
            let (words, coherence) = staged("topics", community_topics(config, &corpus, &net))?;
            if wants(Artifact::Topics) {
                out.artifact(Artifact::Topics, staged("topics", render(|b| export::write_topics(b, &words)))?)?;
            }
            if wants(Artifact::Coherence) {
                let bytes = render(|b| export::write_coherence(b, &coherence));
                out.artifact(Artifact::Coherence, staged("topics", bytes)?)?;
            }
        }
    }

    let manifest = Manifest {
        seed: config.seed,
        files: out.entries.clone(),
    };
    let mut text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    text.push('\n');
    out.put(MANIFEST, text.as_bytes())?;
    if Artifact::ALL.iter().all(|a| wanted.contains(a)) {
        let report = staged("report", crate::report::render(&config.out, &manifest))?;
        out.put(REPORT, report.as_bytes())?;
    }
    Ok(RunSummary {
        manifest,
        stats: corpus.stats,
        warnings,
    })
}
