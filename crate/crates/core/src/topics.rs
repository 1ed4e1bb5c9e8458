//! Latent Dirichlet allocation fitted by collapsed Gibbs sampling, UMass
//! topic coherence, and coherence-driven choice of the topic count.
//!
//! Documents are sequences of word ids in `0..vocab_size`; [`Vocabulary`]
//! maps tokens to ids in lexicographic order so id order doubles as the
//! tie-break order for ranked word lists.
//!
//! The sampler visits tokens in corpus order. For each token it removes
//! the token's assignment from the counts, draws a new topic with
//! probability proportional to
//!
//! ```text
//! (n(d,t) + alpha) / (n(d,.) + T alpha) * (n(t,w) + beta) / (n(t,.) + W beta)
//! ```
//!
//! and adds it back. The posterior is read from the final state only.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::math::ln;

/// Top words per topic scored by [`umass_coherence`] by default.
pub const DEFAULT_COHERENCE_WORDS: usize = 10;
pub const DEFAULT_BETA: f64 = 0.01;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TopicError {
    #[error("corpus has no tokens")]
    EmptyCorpus,
    #[error("invalid LDA configuration: {0}")]
    InvalidConfig(&'static str),
    #[error("word id {word} outside vocabulary of {vocab}")]
    WordOutOfRange { word: usize, vocab: usize },
    #[error("topic id {topic} outside 0..{topics}")]
    TopicOutOfRange { topic: usize, topics: usize },
    #[error("document {0} out of range")]
    DocumentOutOfRange(usize),
    #[error("inconsistent sampler counts: {0}")]
    InconsistentCounts(&'static str),
    #[error("topic-count grid is empty")]
    EmptyGrid,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LdaConfig {
    pub topics: usize,
    pub alpha: f64,
    pub beta: f64,
    pub sweeps: usize,
    pub seed: u64,
}

impl LdaConfig {
    /// `alpha = 50 / T`, `beta = 0.01`.
    pub fn with_defaults(topics: usize, sweeps: usize, seed: u64) -> Self {
        Self {
            topics,
            alpha: 50.0 / topics.max(1) as f64,
            beta: DEFAULT_BETA,
            sweeps,
            seed,
        }
    }

    pub fn validate(&self) -> Result<(), TopicError> {
        if self.topics == 0 {
            return Err(TopicError::InvalidConfig("topic count must be at least 1"));
        }
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(TopicError::InvalidConfig("alpha must be positive"));
        }
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return Err(TopicError::InvalidConfig("beta must be positive"));
        }
        if self.sweeps == 0 {
            return Err(TopicError::InvalidConfig("sweeps must be at least 1"));
        }
        Ok(())
    }

    fn sampler_rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(1);
        rng
    }
}

/// Token to id mapping in lexicographic order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Vocabulary {
    words: Vec<String>,
    index: BTreeMap<String, usize>,
}

impl Vocabulary {
    pub fn from_docs<D: AsRef<[String]>>(docs: &[D]) -> Self {
        let index: BTreeMap<String, usize> = docs
            .iter()
            .flat_map(|d| d.as_ref().iter().cloned())
            .map(|w| (w, 0))
            .collect();
        let words: Vec<String> = index.keys().cloned().collect();
        let index = words.iter().cloned().enumerate().map(|(i, w)| (w, i)).collect();
        Self { words, index }
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn word(&self, id: usize) -> &str {
        &self.words[id]
    }

    pub fn id(&self, word: &str) -> Option<usize> {
        self.index.get(word).copied()
    }

    /// Maps documents to ids; unknown tokens are skipped.
    pub fn encode<D: AsRef<[String]>>(&self, docs: &[D]) -> Vec<Vec<usize>> {
        docs.iter()
            .map(|d| d.as_ref().iter().filter_map(|w| self.id(w)).collect())
            .collect()
    }
}

/// Sampler state: assignments plus the count tables they imply.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LdaState {
    docs: Vec<Vec<usize>>,
    /// Topic of every token, aligned with `docs`.
    z: Vec<Vec<usize>>,
    /// `ndt[d * topics + t]`.
    ndt: Vec<usize>,
    /// `ntw[t * vocab + w]`.
    ntw: Vec<usize>,
    nd: Vec<usize>,
    nt: Vec<usize>,
    topics: usize,
    vocab: usize,
    tokens: usize,
}

impl LdaState {
    /// Assigns every token a uniformly random topic.
    pub fn init(
        docs: Vec<Vec<usize>>,
        vocab_size: usize,
        config: &LdaConfig,
    ) -> Result<Self, TopicError> {
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let topics = config.topics;
        let z = docs
            .iter()
            .map(|doc| doc.iter().map(|_| rng.gen_range(0..topics)).collect())
            .collect();
        Self::from_assignments(docs, vocab_size, topics, z)
    }

    /// Builds the count tables implied by explicit assignments.
    pub fn from_assignments(
        docs: Vec<Vec<usize>>,
        vocab_size: usize,
        topics: usize,
        z: Vec<Vec<usize>>,
    ) -> Result<Self, TopicError> {
        if topics == 0 {
            return Err(TopicError::InvalidConfig("topic count must be at least 1"));
        }
        let tokens: usize = docs.iter().map(Vec::len).sum();
        if tokens == 0 || vocab_size == 0 {
            return Err(TopicError::EmptyCorpus);
        }
        if z.len() != docs.len() || z.iter().zip(&docs).any(|(a, b)| a.len() != b.len()) {
            return Err(TopicError::InconsistentCounts("assignment shape differs from corpus"));
        }
        let mut state = Self {
            ndt: vec![0; docs.len() * topics],
            ntw: vec![0; topics * vocab_size],
            nd: vec![0; docs.len()],
            nt: vec![0; topics],
            docs,
            z,
            topics,
            vocab: vocab_size,
            tokens,
        };
        for d in 0..state.docs.len() {
            for i in 0..state.docs[d].len() {
                let (w, t) = (state.docs[d][i], state.z[d][i]);
                if w >= vocab_size {
                    return Err(TopicError::WordOutOfRange { word: w, vocab: vocab_size });
                }
                if t >= topics {
                    return Err(TopicError::TopicOutOfRange { topic: t, topics });
                }
                state.add(d, w, t);
            }
        }
        Ok(state)
    }

    pub fn topics(&self) -> usize {
        self.topics
    }

    pub fn vocab_size(&self) -> usize {
        self.vocab
    }

    pub fn num_docs(&self) -> usize {
        self.docs.len()
    }

    pub fn num_tokens(&self) -> usize {
        self.tokens
    }

    pub fn docs(&self) -> &[Vec<usize>] {
        &self.docs
    }

    pub fn assignments(&self) -> &[Vec<usize>] {
        &self.z
    }

    pub fn doc_topic(&self, d: usize, t: usize) -> usize {
        self.ndt[d * self.topics + t]
    }

    pub fn topic_word(&self, t: usize, w: usize) -> usize {
        self.ntw[t * self.vocab + w]
    }

    pub fn doc_total(&self, d: usize) -> usize {
        self.nd[d]
    }

    pub fn topic_total(&self, t: usize) -> usize {
        self.nt[t]
    }

    fn add(&mut self, d: usize, w: usize, t: usize) {
        self.ndt[d * self.topics + t] += 1;
        self.ntw[t * self.vocab + w] += 1;
        self.nd[d] += 1;
        self.nt[t] += 1;
    }

    /// Removes token `i` of document `d` from the counts and returns its
    /// former topic. The token keeps its stale `z` entry until
    /// [`include`](Self::include) is called.
    pub fn exclude(&mut self, d: usize, i: usize) -> Result<usize, TopicError> {
        let (w, t) = self.token(d, i)?;
        let dec = |x: &mut usize| -> Result<(), TopicError> {
            *x = x
                .checked_sub(1)
                .ok_or(TopicError::InconsistentCounts("count would become negative"))?;
            Ok(())
        };
        dec(&mut self.ndt[d * self.topics + t])?;
        dec(&mut self.ntw[t * self.vocab + w])?;
        dec(&mut self.nd[d])?;
        dec(&mut self.nt[t])?;
        Ok(t)
    }

    /// Assigns token `i` of document `d` to topic `t` and counts it.
    pub fn include(&mut self, d: usize, i: usize, t: usize) -> Result<(), TopicError> {
        let (w, _) = self.token(d, i)?;
        if t >= self.topics {
            return Err(TopicError::TopicOutOfRange { topic: t, topics: self.topics });
        }
        self.z[d][i] = t;
        self.add(d, w, t);
        Ok(())
    }

    fn token(&self, d: usize, i: usize) -> Result<(usize, usize), TopicError> {
        let doc = self.docs.get(d).ok_or(TopicError::DocumentOutOfRange(d))?;
        let w = *doc
            .get(i)
            .ok_or(TopicError::InconsistentCounts("token index out of range"))?;
        Ok((w, self.z[d][i]))
    }

    /// Unnormalized full conditional for a word in document `d`, written
    /// into `weights`. Counts must already exclude the token.
    fn conditional_weights(&self, d: usize, w: usize, alpha: f64, beta: f64, weights: &mut [f64]) {
        let t_alpha = self.topics as f64 * alpha;
        let w_beta = self.vocab as f64 * beta;
        let doc_norm = self.nd[d] as f64 + t_alpha;
        for (t, weight) in weights.iter_mut().enumerate() {
            let doc_part = (self.ndt[d * self.topics + t] as f64 + alpha) / doc_norm;
            let word_part =
                (self.ntw[t * self.vocab + w] as f64 + beta) / (self.nt[t] as f64 + w_beta);
            *weight = doc_part * word_part;
        }
    }

    /// Normalized topic distribution for an excluded occurrence of word
    /// `w` in document `d`.
    pub fn gibbs_conditional(
        &self,
        d: usize,
        w: usize,
        alpha: f64,
        beta: f64,
    ) -> Result<Vec<f64>, TopicError> {
        if d >= self.docs.len() {
            return Err(TopicError::DocumentOutOfRange(d));
        }
        if w >= self.vocab {
            return Err(TopicError::WordOutOfRange { word: w, vocab: self.vocab });
        }
        let row = &self.ndt[d * self.topics..(d + 1) * self.topics];
        if row.iter().sum::<usize>() != self.nd[d] {
            return Err(TopicError::InconsistentCounts("document row does not sum to its total"));
        }
        let mut weights = vec![0.0; self.topics];
        self.conditional_weights(d, w, alpha, beta, &mut weights);
        let total: f64 = weights.iter().sum();
        weights.iter_mut().for_each(|p| *p /= total);
        Ok(weights)
    }

    /// One pass over every token in corpus order.
    pub fn sweep<R: RngCore>(&mut self, config: &LdaConfig, rng: &mut R) -> Result<(), TopicError> {
        let mut weights = vec![0.0; self.topics];
        for d in 0..self.docs.len() {
            for i in 0..self.docs[d].len() {
                let w = self.docs[d][i];
                self.exclude(d, i)?;
                self.conditional_weights(d, w, config.alpha, config.beta, &mut weights);
                let t = sample_index(&weights, rng);
                self.include(d, i, t)?;
            }
        }
        Ok(())
    }

    /// Recounts every table from `z` and compares.
    pub fn audit(&self) -> Result<(), TopicError> {
        let fresh = Self::from_assignments(self.docs.clone(), self.vocab, self.topics, self.z.clone())?;
        if fresh != *self {
            return Err(TopicError::InconsistentCounts("tables disagree with assignments"));
        }
        if self.nt.iter().sum::<usize>() != self.tokens {
            return Err(TopicError::InconsistentCounts("topic totals do not sum to token count"));
        }
        Ok(())
    }
}

fn sample_index<R: RngCore>(weights: &[f64], rng: &mut R) -> usize {
    let total: f64 = weights.iter().sum();
    let mut u = rng.gen::<f64>() * total;
    for (i, &w) in weights.iter().enumerate() {
        if u < w {
            return i;
        }
        u -= w;
    }
    weights.len() - 1
}

/// Runs `config.sweeps` sweeps with the config's sampler stream.
pub fn run_gibbs(state: &mut LdaState, config: &LdaConfig) -> Result<(), TopicError> {
    config.validate()?;
    let mut rng = config.sampler_rng();
    for _ in 0..config.sweeps {
        state.sweep(config, &mut rng)?;
    }
    Ok(())
}

/// Initializes and samples in one call.
pub fn fit(docs: Vec<Vec<usize>>, vocab_size: usize, config: &LdaConfig) -> Result<LdaState, TopicError> {
    let mut state = LdaState::init(docs, vocab_size, config)?;
    run_gibbs(&mut state, config)?;
    Ok(state)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LdaPosterior {
    /// Per-document topic distributions.
    pub theta: Vec<Vec<f64>>,
    /// Per-topic word distributions.
    pub phi: Vec<Vec<f64>>,
}

pub fn posterior(state: &LdaState, alpha: f64, beta: f64) -> LdaPosterior {
    let t_alpha = state.topics as f64 * alpha;
    let w_beta = state.vocab as f64 * beta;
    let theta = (0..state.num_docs())
        .map(|d| {
            (0..state.topics)
                .map(|t| (state.doc_topic(d, t) as f64 + alpha) / (state.nd[d] as f64 + t_alpha))
                .collect()
        })
        .collect();
    let phi = (0..state.topics)
        .map(|t| {
            (0..state.vocab)
                .map(|w| (state.topic_word(t, w) as f64 + beta) / (state.nt[t] as f64 + w_beta))
                .collect()
        })
        .collect();
    LdaPosterior { theta, phi }
}

/// Word ids of a row ranked by descending weight, ties by ascending id.
fn ranked_ids(row: &[f64]) -> Vec<usize> {
    let mut ids: Vec<usize> = (0..row.len()).collect();
    ids.sort_by(|&a, &b| row[b].total_cmp(&row[a]).then(a.cmp(&b)));
    ids
}

/// Top `k` words of topic `t` with their probabilities.
pub fn top_words(phi: &[Vec<f64>], t: usize, k: usize, vocab: &Vocabulary) -> Vec<(String, f64)> {
    let row = &phi[t];
    ranked_ids(row)
        .into_iter()
        .take(k)
        .map(|w| (vocab.word(w).into(), row[w]))
        .collect()
}

/// Document and co-document frequencies of a training corpus.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DocFrequencies {
    /// Sorted ids of the documents containing each word.
    postings: Vec<Vec<usize>>,
}

impl DocFrequencies {
    pub fn new(docs: &[Vec<usize>], vocab_size: usize) -> Self {
        let mut postings = vec![Vec::new(); vocab_size];
        for (d, doc) in docs.iter().enumerate() {
            for &w in doc {
                if postings[w].last() != Some(&d) {
                    postings[w].push(d);
                }
            }
        }
        Self { postings }
    }

    pub fn df(&self, w: usize) -> usize {
        self.postings[w].len()
    }

    pub fn co_df(&self, a: usize, b: usize) -> usize {
        let (x, y) = (&self.postings[a], &self.postings[b]);
        let (mut i, mut j, mut n) = (0, 0, 0);
        while i < x.len() && j < y.len() {
            match x[i].cmp(&y[j]) {
                core::cmp::Ordering::Less => i += 1,
                core::cmp::Ordering::Greater => j += 1,
                core::cmp::Ordering::Equal => {
                    n += 1;
                    i += 1;
                    j += 1;
                }
            }
        }
        n
    }
}

/// UMass coherence of an ordered word list:
/// `sum_{l>m} log[(D(w_l, w_m) + 1) / D(w_m)]`.
pub fn umass_score(words: &[usize], freqs: &DocFrequencies) -> f64 {
    let mut score = 0.0;
    for l in 1..words.len() {
        for m in 0..l {
            let joint = freqs.co_df(words[l], words[m]) as f64;
            score += ln(joint + 1.0) - ln(freqs.df(words[m]) as f64);
        }
    }
    score
}

/// UMass coherence over the top `m` words of topic `t`. Words absent from
/// the training corpus are never selected; `m` is clamped to the number
/// of candidates.
pub fn umass_coherence(phi: &[Vec<f64>], t: usize, freqs: &DocFrequencies, m: usize) -> f64 {
    let top: Vec<usize> = ranked_ids(&phi[t])
        .into_iter()
        .filter(|&w| freqs.df(w) > 0)
        .take(m)
        .collect();
    umass_score(&top, freqs)
}

pub fn mean_coherence(phi: &[Vec<f64>], freqs: &DocFrequencies, m: usize) -> f64 {
    let total: f64 = (0..phi.len()).map(|t| umass_coherence(phi, t, freqs, m)).sum();
    total / phi.len() as f64
}

/// Grid and shared sampler settings for [`select_topic_count`].
#[derive(Debug, Clone, PartialEq)]
pub struct SelectionConfig {
    pub ks: Vec<usize>,
    /// Fixed `alpha`, or `50 / K` per candidate when `None`.
    pub alpha: Option<f64>,
    pub beta: f64,
    pub sweeps: usize,
    /// Each candidate `K` samples with seed `seed + K`.
    pub seed: u64,
    pub coherence_words: usize,
}

impl SelectionConfig {
    pub fn config_for(&self, k: usize) -> LdaConfig {
        LdaConfig {
            topics: k,
            alpha: self.alpha.unwrap_or(50.0 / k.max(1) as f64),
            beta: self.beta,
            sweeps: self.sweeps,
            seed: self.seed.wrapping_add(k as u64),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TopicSelection {
    pub best_k: usize,
    /// `(K, mean coherence)` in ascending `K`.
    pub table: Vec<(usize, f64)>,
    pub config: LdaConfig,
    pub state: LdaState,
    pub posterior: LdaPosterior,
}

/// Fits one model per candidate `K` and keeps the one with the highest
/// mean UMass coherence; ties go to the smaller `K`.
pub fn select_topic_count(
    docs: &[Vec<usize>],
    vocab_size: usize,
    selection: &SelectionConfig,
) -> Result<TopicSelection, TopicError> {
    let mut ks = selection.ks.clone();
    ks.sort_unstable();
    ks.dedup();
    if ks.is_empty() {
        return Err(TopicError::EmptyGrid);
    }
    let freqs = DocFrequencies::new(docs, vocab_size);
    let mut table = Vec::with_capacity(ks.len());
    let mut best: Option<(f64, LdaConfig, LdaState, LdaPosterior)> = None;
    for k in ks {
        let config = selection.config_for(k);
        let state = fit(docs.to_vec(), vocab_size, &config)?;
        let post = posterior(&state, config.alpha, config.beta);
        let score = mean_coherence(&post.phi, &freqs, selection.coherence_words);
        table.push((k, score));
        if best.as_ref().is_none_or(|(b, ..)| score > *b) {
            best = Some((score, config, state, post));
        }
    }
    let (_, config, state, posterior) = best.expect("grid is non-empty");
    Ok(TopicSelection {
        best_k: config.topics,
        table,
        config,
        state,
        posterior,
    })
}
