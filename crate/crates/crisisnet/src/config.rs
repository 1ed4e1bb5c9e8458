//! Declarative pipeline configuration (TOML) with dotted-name overrides.

use std::fs;
use std::path::{Path, PathBuf};

use crisisnet_core::ingest::DEFAULT_KEYWORDS;
use crisisnet_core::netgraph::{CommunityMethod, CommunityOptions};
use serde::{Deserialize, Serialize};
use toml::Value;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_out")]
    pub out: PathBuf,
    pub input: InputConfig,
    #[serde(default)]
    pub ngrams: NgramConfig,
    #[serde(default)]
    pub topics: TopicConfig,
    #[serde(default)]
    pub graph: GraphConfig,
}

fn default_out() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputConfig {
    pub archives: Vec<PathBuf>,
    pub lexicon: PathBuf,
    /// Falls back to the built-in English list.
    #[serde(default)]
    pub stoplist: Option<PathBuf>,
    #[serde(default)]
    pub regions: Option<PathBuf>,
    /// `handle,agency_type` CSV.
    #[serde(default)]
    pub agency_types: Option<PathBuf>,
    #[serde(default = "default_keywords")]
    pub keywords: Vec<String>,
    /// Fixed offset applied before binning timestamps into days.
    #[serde(default)]
    pub utc_offset_seconds: i32,
}

fn default_keywords() -> Vec<String> {
    DEFAULT_KEYWORDS.iter().map(|s| s.to_string()).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NgramConfig {
    pub top_terms: usize,
    pub heatmap_terms: usize,
    pub bigram_edges: usize,
}

impl Default for NgramConfig {
    fn default() -> Self {
        Self {
            top_terms: 100,
            heatmap_terms: 50,
            bigram_edges: 50,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TopicConfig {
    pub k_min: usize,
    pub k_max: usize,
    /// `50 / K` when absent.
    pub alpha: Option<f64>,
    pub beta: f64,
    pub sweeps: usize,
    pub top_words: usize,
    pub coherence_words: usize,
    /// Communities with fewer documents are not modeled.
    pub min_docs: usize,
}

impl Default for TopicConfig {
    fn default() -> Self {
        Self {
            k_min: 1,
            k_max: 5,
            alpha: None,
            beta: 0.01,
            sweeps: 200,
            top_words: 10,
            coherence_words: 10,
            min_docs: 5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Modularity,
    PathWeight,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GraphConfig {
    pub method: Method,
    pub resolution: f64,
    /// `0.5 / rho(A)` when absent.
    pub attenuation: Option<f64>,
    pub top_nodes: usize,
}

impl Default for GraphConfig {
    fn default() -> Self {
        Self {
            method: Method::Modularity,
            resolution: 1.0,
            attenuation: None,
            top_nodes: 5,
        }
    }
}

impl GraphConfig {
    pub fn community_options(&self, seed: u64) -> CommunityOptions {
        CommunityOptions {
            method: match self.method {
                Method::Modularity => CommunityMethod::Modularity,
                Method::PathWeight => CommunityMethod::PathWeight,
            },
            resolution: self.resolution,
            seed,
            attenuation: self.attenuation,
        }
    }
}

/// Sets `dotted` (e.g. `topics.sweeps`) in a TOML tree. The value is read
/// as a TOML literal, falling back to a bare string.
pub fn apply_override(root: &mut Value, dotted: &str, raw: &str) -> Result<()> {
    let value = toml::from_str::<toml::Table>(&format!("v = {raw}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| Value::String(raw.to_string()));
    let mut node = root;
    let mut parts = dotted.split('.').peekable();
    while let Some(part) = parts.next() {
        let table = node
            .as_table_mut()
            .ok_or_else(|| Error::config(dotted, "parent is not a table"))?;
        if parts.peek().is_none() {
            table.insert(part.to_string(), value);
            return Ok(());
        }
        node = table
            .entry(part.to_string())
            .or_insert_with(|| Value::Table(Default::default()));
    }
    Err(Error::config(dotted, "empty key"))
}

impl PipelineConfig {
    /// Parses TOML text, applies overrides, and resolves relative paths
    /// against `base`.
    pub fn from_toml(text: &str, base: &Path, overrides: &[(String, String)]) -> Result<Self> {
        let mut root: Value = toml::from_str(text).map_err(|e| Error::config("config", e.message().to_string()))?;
        for (key, raw) in overrides {
            apply_override(&mut root, key, raw)?;
        }
        let mut config: Self = root
            .try_into()
            .map_err(|e: toml::de::Error| Error::config("config", e.message().to_string()))?;
        config.resolve(base);
        Ok(config)
    }

    pub fn load(path: &Path, overrides: &[(String, String)]) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::config("--config", format!("{}: {e}", path.display())))?;
        Self::from_toml(&text, path.parent().unwrap_or(Path::new(".")), overrides)
    }

    fn resolve(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.out);
        let input = &mut self.input;
        input.archives.iter_mut().for_each(fix);
        fix(&mut input.lexicon);
        for p in [&mut input.stoplist, &mut input.regions, &mut input.agency_types].into_iter().flatten() {
            fix(p);
        }
    }

    /// Checks referenced files and numeric preconditions, naming the first
    /// offending field.
    pub fn validate(&self) -> Result<()> {
        let exists = |field: &str, p: &Path| {
            if p.is_file() {
                Ok(())
            } else {
                Err(Error::config(field, format!("file not found: {}", p.display())))
            }
        };
        if self.input.archives.is_empty() {
            return Err(Error::config("input.archives", "at least one archive is required"));
        }
        for p in &self.input.archives {
            exists("input.archives", p)?;
        }
        exists("input.lexicon", &self.input.lexicon)?;
        if let Some(p) = &self.input.stoplist {
            exists("input.stoplist", p)?;
        }
        if let Some(p) = &self.input.regions {
            exists("input.regions", p)?;
        }
        if let Some(p) = &self.input.agency_types {
            exists("input.agency_types", p)?;
        }
        if self.input.keywords.iter().all(|k| k.trim().is_empty()) {
            return Err(Error::config("input.keywords", "keyword set is empty"));
        }
        let positive = |field: &str, v: usize| {
            if v == 0 {
                Err(Error::config(field, "must be at least 1"))
            } else {
                Ok(())
            }
        };
        positive("ngrams.top_terms", self.ngrams.top_terms)?;
        positive("ngrams.heatmap_terms", self.ngrams.heatmap_terms)?;
        positive("ngrams.bigram_edges", self.ngrams.bigram_edges)?;
        let t = &self.topics;
        positive("topics.k_min", t.k_min)?;
        if t.k_max < t.k_min {
            return Err(Error::config("topics.k_max", "must be at least topics.k_min"));
        }
        if let Some(a) = t.alpha {
            if !(a > 0.0 && a.is_finite()) {
                return Err(Error::config("topics.alpha", "must be positive"));
            }
        }
        if !(t.beta > 0.0 && t.beta.is_finite()) {
            return Err(Error::config("topics.beta", "must be positive"));
        }
        positive("topics.sweeps", t.sweeps)?;
        positive("topics.top_words", t.top_words)?;
        positive("topics.coherence_words", t.coherence_words)?;
        positive("topics.min_docs", t.min_docs)?;
        let g = &self.graph;
        if !(g.resolution > 0.0 && g.resolution.is_finite()) {
            return Err(Error::config("graph.resolution", "must be positive"));
        }
        if let Some(a) = g.attenuation {
            if !(a > 0.0 && a.is_finite()) {
                return Err(Error::config("graph.attenuation", "must be positive"));
            }
        }
        positive("graph.top_nodes", g.top_nodes)
    }
}
