//! Term frequencies, term-by-day matrices and maximum-likelihood bigram
//! statistics, including a class-bigram clustering objective and a greedy
//! exchange search over word classings.
//!
//! Bigrams never span two documents and nothing is smoothed: asking for a
//! transition that was never observed is an error.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Reverse;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::ingest::zero_fill;
use crate::math::{ln, xlogx};
use crate::textprep::Document;
use crate::Day;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NgramError {
    #[error("token {0:?} is not in the vocabulary")]
    UnknownToken(String),
    #[error("unseen transition {from:?} -> {to:?}")]
    UnseenTransition { from: String, to: String },
    #[error("class count {classes} must be in 1..={vocab}")]
    ClassCount { classes: usize, vocab: usize },
    #[error("classing covers {got} words, vocabulary has {expected}")]
    ClassingSize { got: usize, expected: usize },
    #[error("class id {class} out of range for {classes} classes")]
    ClassOutOfRange { class: usize, classes: usize },
}

impl AsRef<[String]> for Document {
    fn as_ref(&self) -> &[String] {
        &self.tokens
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TopTerm {
    pub term: String,
    pub count: usize,
    /// Share of all tokens covered by this term and every term ranked
    /// above it.
    pub cumulative: f64,
}

/// Tokens ranked by count, ties broken lexicographically.
pub fn top_terms<D: AsRef<[String]>>(docs: &[D], k: usize) -> Vec<TopTerm> {
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    let mut total = 0usize;
    for doc in docs {
        for token in doc.as_ref() {
            *counts.entry(token.as_str()).or_insert(0) += 1;
            total += 1;
        }
    }
    let mut ranked: Vec<(&str, usize)> = counts.into_iter().collect();
    // Stable sort on an already lexicographic list keeps ties in order.
    ranked.sort_by_key(|&(_, c)| Reverse(c));
    let mut running = 0usize;
    ranked
        .into_iter()
        .take(k)
        .map(|(term, count)| {
            running += count;
            TopTerm {
                term: term.into(),
                count,
                cumulative: running as f64 / total as f64,
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TermTimeMatrix {
    pub terms: Vec<String>,
    pub days: Vec<Day>,
    /// `counts[term][day]`.
    pub counts: Vec<Vec<usize>>,
}

impl TermTimeMatrix {
    pub fn column_sum(&self, day: usize) -> usize {
        self.counts.iter().map(|row| row[day]).sum()
    }
}

/// Occurrences of each listed term per day, across the corpus day range.
pub fn term_time_matrix(docs: &[Document], terms: &[String]) -> TermTimeMatrix {
    let mut per_day: BTreeMap<Day, BTreeMap<&str, usize>> = BTreeMap::new();
    for doc in docs {
        let day = per_day.entry(doc.day).or_default();
        for token in &doc.tokens {
            *day.entry(token.as_str()).or_insert(0) += 1;
        }
    }
    zero_fill(&mut per_day, BTreeMap::new());
    let days: Vec<Day> = per_day.keys().copied().collect();
    let counts = terms
        .iter()
        .map(|term| {
            per_day
                .values()
                .map(|day| day.get(term.as_str()).copied().unwrap_or(0))
                .collect()
        })
        .collect();
    TermTimeMatrix {
        terms: terms.to_vec(),
        days,
        counts,
    }
}

/// Unigram and within-document bigram counts.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct BigramModel {
    words: Vec<String>,
    index: BTreeMap<String, usize>,
    unigrams: Vec<usize>,
    bigrams: BTreeMap<(usize, usize), usize>,
    /// `sum_w N(v, w)` per history `v`.
    history_totals: Vec<usize>,
    /// `sum_v N(v, w)` per successor `w`.
    successor_totals: Vec<usize>,
    total: usize,
}

impl BigramModel {
    pub fn fit<D: AsRef<[String]>>(docs: &[D]) -> Self {
        let vocab: BTreeSet<&str> = docs
            .iter()
            .flat_map(|d| d.as_ref().iter().map(String::as_str))
            .collect();
        let words: Vec<String> = vocab.into_iter().map(String::from).collect();
        let index: BTreeMap<String, usize> =
            words.iter().cloned().enumerate().map(|(i, w)| (w, i)).collect();
        let v = words.len();
        let mut model = Self {
            words,
            index,
            unigrams: vec![0; v],
            bigrams: BTreeMap::new(),
            history_totals: vec![0; v],
            successor_totals: vec![0; v],
            total: 0,
        };
        for doc in docs {
            let ids: Vec<usize> = doc.as_ref().iter().map(|t| model.index[t]).collect();
            for &id in &ids {
                model.unigrams[id] += 1;
                model.total += 1;
            }
            for pair in ids.windows(2) {
                *model.bigrams.entry((pair[0], pair[1])).or_insert(0) += 1;
                model.history_totals[pair[0]] += 1;
                model.successor_totals[pair[1]] += 1;
            }
        }
        model
    }

    pub fn vocab_size(&self) -> usize {
        self.words.len()
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn id(&self, word: &str) -> Option<usize> {
        self.index.get(word).copied()
    }

    pub fn total_tokens(&self) -> usize {
        self.total
    }

    pub fn unigram(&self, word: &str) -> usize {
        self.id(word).map_or(0, |i| self.unigrams[i])
    }

    pub fn bigram(&self, from: &str, to: &str) -> usize {
        match (self.id(from), self.id(to)) {
            (Some(a), Some(b)) => self.bigrams.get(&(a, b)).copied().unwrap_or(0),
            _ => 0,
        }
    }

    pub fn history_total(&self, word: &str) -> usize {
        self.id(word).map_or(0, |i| self.history_totals[i])
    }

    /// `(from, to, count)` in lexicographic order of the pair.
    pub fn bigram_counts(&self) -> impl Iterator<Item = (&str, &str, usize)> + '_ {
        self.bigrams
            .iter()
            .map(|(&(a, b), &c)| (self.words[a].as_str(), self.words[b].as_str(), c))
    }

    pub fn num_bigrams(&self) -> usize {
        self.bigrams.len()
    }

    /// MLE `P(to | from)`, `None` when `from` never starts a bigram.
    pub fn conditional(&self, from: &str, to: &str) -> Option<f64> {
        let history = self.history_total(from);
        (history > 0).then(|| self.bigram(from, to) as f64 / history as f64)
    }

    /// Natural-log probability of `seq` under the chain decomposition
    /// `P(w1) * prod P(w_n | w_{n-1})`. An empty sequence scores 0.
    pub fn sequence_logprob<S: AsRef<str>>(&self, seq: &[S]) -> Result<f64, NgramError> {
        let ids = seq
            .iter()
            .map(|t| {
                self.id(t.as_ref())
                    .ok_or_else(|| NgramError::UnknownToken(t.as_ref().into()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let Some(&first) = ids.first() else {
            return Ok(0.0);
        };
        let mut logp = ln(self.unigrams[first] as f64) - ln(self.total as f64);
        for pair in ids.windows(2) {
            let count = self.bigrams.get(&(pair[0], pair[1])).copied().unwrap_or(0);
            if count == 0 {
                return Err(NgramError::UnseenTransition {
                    from: self.words[pair[0]].clone(),
                    to: self.words[pair[1]].clone(),
                });
            }
            logp += ln(count as f64) - ln(self.history_totals[pair[0]] as f64);
        }
        Ok(logp)
    }
}

/// A word classing: `class_of[word id]` in `0..num_classes`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassMap {
    class_of: Vec<usize>,
    num_classes: usize,
}

impl ClassMap {
    pub fn new(class_of: Vec<usize>, num_classes: usize) -> Result<Self, NgramError> {
        if let Some(&class) = class_of.iter().find(|&&c| c >= num_classes) {
            return Err(NgramError::ClassOutOfRange {
                class,
                classes: num_classes,
            });
        }
        Ok(Self {
            class_of,
            num_classes,
        })
    }

    pub fn identity(vocab_size: usize) -> Self {
        Self {
            class_of: (0..vocab_size).collect(),
            num_classes: vocab_size,
        }
    }

    pub fn class_of(&self, word_id: usize) -> usize {
        self.class_of[word_id]
    }

    pub fn num_classes(&self) -> usize {
        self.num_classes
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.class_of
    }

    /// Word groups in class order, each sorted by word id.
    pub fn groups(&self) -> Vec<Vec<usize>> {
        let mut groups = vec![Vec::new(); self.num_classes];
        for (w, &c) in self.class_of.iter().enumerate() {
            groups[c].push(w);
        }
        groups
    }
}

/// Class-level counts the objective is computed from.
struct ClassCounts {
    pairs: Vec<f64>,
    /// Summed unigram counts of member words.
    histories: Vec<f64>,
    /// Summed successor counts of member words.
    successors: Vec<f64>,
    k: usize,
}

impl ClassCounts {
    fn new(model: &BigramModel, classes: &ClassMap) -> Self {
        let k = classes.num_classes;
        let mut counts = Self {
            pairs: vec![0.0; k * k],
            histories: vec![0.0; k],
            successors: vec![0.0; k],
            k,
        };
        for (&(v, w), &c) in &model.bigrams {
            counts.pairs[classes.class_of[v] * k + classes.class_of[w]] += c as f64;
        }
        for w in 0..model.vocab_size() {
            let g = classes.class_of[w];
            counts.histories[g] += model.unigrams[w] as f64;
            counts.successors[g] += model.successor_totals[w] as f64;
        }
        counts
    }

    fn mutual_term(&self) -> f64 {
        let mut sum = 0.0;
        for g in 0..self.k {
            for h in 0..self.k {
                let n = self.pairs[g * self.k + h];
                if n > 0.0 {
                    sum += n * (ln(n) - ln(self.histories[g]) - ln(self.successors[h]));
                }
            }
        }
        sum
    }
}

/// Constant first term `sum_w N(w) log N(w)` of the objective.
fn unigram_term(model: &BigramModel) -> f64 {
    model.unigrams.iter().map(|&n| xlogx(n as f64)).sum()
}

/// Class-bigram log-likelihood
/// `sum_w N(w) log N(w) + sum_{g,h} N(g,h) log[N(g,h) / (N(g) N(h))]`.
///
/// `N(g)` on the history side sums the unigram counts of the words in
/// `g`; on the successor side it sums their successor counts.
pub fn class_bigram_objective(model: &BigramModel, classes: &ClassMap) -> Result<f64, NgramError> {
    if classes.class_of.len() != model.vocab_size() {
        return Err(NgramError::ClassingSize {
            got: classes.class_of.len(),
            expected: model.vocab_size(),
        });
    }
    Ok(unigram_term(model) + ClassCounts::new(model, classes).mutual_term())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExchangeResult {
    pub classes: ClassMap,
    /// Objective at the start and after every accepted move.
    pub trace: Vec<f64>,
}

/// Hill-climbs the class-bigram objective by single-word moves.
pub fn greedy_exchange(
    model: &BigramModel,
    num_classes: usize,
    seed: u64,
) -> Result<ClassMap, NgramError> {
    greedy_exchange_traced(model, num_classes, seed).map(|r| r.classes)
}

/// [`greedy_exchange`] that also reports the objective after every move.
///
/// Starts from a seeded shuffle dealt round-robin into `num_classes`
/// classes, then repeatedly applies the single move with the largest
/// strict gain. Moves that would empty a class are not considered.
pub fn greedy_exchange_traced(
    model: &BigramModel,
    num_classes: usize,
    seed: u64,
) -> Result<ExchangeResult, NgramError> {
    let vocab = model.vocab_size();
    if num_classes == 0 || num_classes > vocab {
        return Err(NgramError::ClassCount {
            classes: num_classes,
            vocab,
        });
    }
    let mut order: Vec<usize> = (0..vocab).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut class_of = vec![0; vocab];
    for (i, &w) in order.iter().enumerate() {
        class_of[w] = i % num_classes;
    }
    let mut classes = ClassMap {
        class_of,
        num_classes,
    };
    let base = unigram_term(model);
    let mut counts = ClassCounts::new(model, &classes);
    let mut current = base + counts.mutual_term();
    let mut trace = vec![current];
    if num_classes == 1 {
        return Ok(ExchangeResult { classes, trace });
    }

    let mut outgoing = vec![Vec::new(); vocab];
    let mut incoming = vec![Vec::new(); vocab];
    for (&(v, w), &c) in &model.bigrams {
        outgoing[v].push((w, c as f64));
        incoming[w].push((v, c as f64));
    }
    let mut sizes = vec![0usize; num_classes];
    for &c in &classes.class_of {
        sizes[c] += 1;
    }

    let mover = |counts: &mut ClassCounts, classes: &ClassMap, w: usize, from: usize, to: usize| {
        let k = counts.k;
        for &(x, c) in &outgoing[w] {
            if x != w {
                let cx = classes.class_of[x];
                counts.pairs[from * k + cx] -= c;
                counts.pairs[to * k + cx] += c;
            }
        }
        for &(v, c) in &incoming[w] {
            if v != w {
                let cv = classes.class_of[v];
                counts.pairs[cv * k + from] -= c;
                counts.pairs[cv * k + to] += c;
            } else {
                counts.pairs[from * k + from] -= c;
                counts.pairs[to * k + to] += c;
            }
        }
        let uni = model.unigrams[w] as f64;
        let succ = model.successor_totals[w] as f64;
        counts.histories[from] -= uni;
        counts.histories[to] += uni;
        counts.successors[from] -= succ;
        counts.successors[to] += succ;
    };

    loop {
        let tolerance = 1e-10 * current.abs().max(1.0);
        let mut best: Option<(usize, usize, f64)> = None;
        for w in 0..vocab {
            let from = classes.class_of[w];
            if sizes[from] == 1 {
                continue;
            }
            for to in (0..num_classes).filter(|&h| h != from) {
                mover(&mut counts, &classes, w, from, to);
                let value = base + counts.mutual_term();
                mover(&mut counts, &classes, w, to, from);
                if value > current + tolerance && best.is_none_or(|(_, _, b)| value > b) {
                    best = Some((w, to, value));
                }
            }
        }
        let Some((w, to, value)) = best else {
            break;
        };
        let from = classes.class_of[w];
        mover(&mut counts, &classes, w, from, to);
        classes.class_of[w] = to;
        sizes[from] -= 1;
        sizes[to] += 1;
        current = value;
        trace.push(current);
    }
    Ok(ExchangeResult { classes, trace })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BigramEdge {
    pub source: String,
    pub target: String,
    pub weight: usize,
}

/// The most frequent bigrams as a word graph.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BigramGraph {
    /// `(word, degree)` sorted by word; degree counts incident edges in
    /// both directions.
    pub nodes: Vec<(String, usize)>,
    pub edges: Vec<BigramEdge>,
}

/// Keeps the `top_k` bigrams by count (ties lexicographic on the pair).
pub fn bigram_graph(model: &BigramModel, top_k: usize) -> BigramGraph {
    let mut ranked: Vec<(&str, &str, usize)> = model.bigram_counts().collect();
    ranked.sort_by_key(|&(_, _, c)| Reverse(c));
    ranked.truncate(top_k);
    let mut degree: BTreeMap<String, usize> = BTreeMap::new();
    let edges = ranked
        .into_iter()
        .map(|(source, target, weight)| {
            *degree.entry(source.into()).or_insert(0) += 1;
            *degree.entry(target.into()).or_insert(0) += 1;
            BigramEdge {
                source: source.into(),
                target: target.into(),
                weight,
            }
        })
        .collect();
    BigramGraph {
        nodes: degree.into_iter().collect(),
        edges,
    }
}
