//! Tweet text normalization, tokenization and stopword removal.
//!
//! [`normalize`] lowercases and removes URLs, HTML tags and character
//! entities, emoji and other symbol codepoints, and control characters.
//! Every whitespace-separated piece is then trimmed of leading and
//! trailing non-alphanumeric characters, which also reduces `@handle`
//! and `#hashtag` to their bare words.

use alloc::collections::BTreeSet;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use unicode_general_category::{get_general_category, GeneralCategory};

use crate::Day;

/// A tokenized tweet body.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Document {
    pub tweet_id: String,
    pub tokens: Vec<String>,
    pub day: Day,
}

impl Document {
    pub fn new(tweet_id: impl Into<String>, tokens: Vec<String>, day: Day) -> Self {
        Self {
            tweet_id: tweet_id.into(),
            tokens,
            day,
        }
    }
}

/// Lowercased set of words removed by [`remove_stopwords`].
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Stoplist {
    words: BTreeSet<String>,
}

impl Stoplist {
    pub fn new<I, S>(words: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        Self {
            words: words
                .into_iter()
                .map(|w| w.as_ref().trim().to_lowercase())
                .filter(|w| !w.is_empty())
                .collect(),
        }
    }

    /// The shipped English function-word list.
    pub fn english() -> Self {
        Self::new(ENGLISH_STOPWORDS.iter().copied())
    }

    pub fn contains(&self, word: &str) -> bool {
        self.words.contains(word)
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }
}

/// Cleans raw tweet text. Idempotent.
pub fn normalize(text: &str) -> String {
    let mut current = text.to_lowercase();
    loop {
        let next = trim_pieces(&strip_noise(&current));
        if next == current {
            return next;
        }
        current = next;
    }
}

/// Splits normalized text into tokens.
///
/// Pieces are trimmed of non-alphanumeric edges; empty pieces and
/// single-digit numbers are dropped.
pub fn tokenize(text: &str) -> Vec<String> {
    text.split_whitespace()
        .map(trim_edges)
        .filter(|t| !t.is_empty() && !is_single_digit(t))
        .map(ToString::to_string)
        .collect()
}

pub fn remove_stopwords(tokens: &[String], stoplist: &Stoplist) -> Vec<String> {
    tokens
        .iter()
        .filter(|t| !stoplist.contains(t))
        .cloned()
        .collect()
}

/// `tokenize(normalize(text))`.
pub fn analyze(text: &str) -> Vec<String> {
    tokenize(&normalize(text))
}

/// True for characters that never survive [`normalize`]: emoji, symbol
/// categories `So`/`Sk`, control and format codes, and surrogates.
pub fn is_noise_char(c: char) -> bool {
    use GeneralCategory::*;
    if matches!(
        get_general_category(c),
        OtherSymbol | ModifierSymbol | Control | Format | Surrogate
    ) {
        return !c.is_whitespace();
    }
    matches!(
        c as u32,
        0x1F000..=0x1FAFF   // mahjong .. symbols & pictographs ext-A
            | 0x2600..=0x27BF   // misc symbols, dingbats
            | 0x2B00..=0x2BFF   // misc symbols and arrows
            | 0xFE00..=0xFE0F   // variation selectors
            | 0xE0000..=0xE007F // tag characters
            | 0x20E3            // combining enclosing keycap
    )
}

fn is_single_digit(token: &str) -> bool {
    let mut chars = token.chars();
    matches!((chars.next(), chars.next()), (Some(c), None) if c.is_numeric())
}

fn trim_edges(piece: &str) -> &str {
    piece.trim_matches(|c: char| !c.is_alphanumeric())
}

fn trim_pieces(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for piece in text.split_whitespace().map(trim_edges) {
        if piece.is_empty() {
            continue;
        }
        if !out.is_empty() {
            out.push(' ');
        }
        out.push_str(piece);
    }
    out
}

/// One removal pass; removed spans become spaces so pieces never merge.
fn strip_noise(text: &str) -> String {
    let text = strip_tags(text);
    let text = strip_entities(&text);
    let text = strip_urls(&text);
    text.chars()
        .map(|c| if c.is_whitespace() || is_noise_char(c) { ' ' } else { c })
        .collect()
}

fn strip_tags(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut rest = text;
    while let Some(open) = rest.find('<') {
        out.push_str(&rest[..open]);
        let after = &rest[open + 1..];
        let starts_tag = after
            .chars()
            .next()
            .is_some_and(|c| c.is_ascii_alphabetic() || c == '/' || c == '!');
        let close = after.find(['<', '>']);
        match close {
            Some(end) if starts_tag && after[end..].starts_with('>') => {
                out.push(' ');
                rest = &after[end + 1..];
            }
            _ => {
                out.push('<');
                rest = after;
            }
        }
    }
    out.push_str(rest);
    out
}

/// Length of an HTML character reference body (`amp`, `#39`, `#x1F300`)
/// ending in `;`, if `s` (the text after `&`) starts with one.
fn entity_len(s: &str) -> Option<usize> {
    let bytes = s.as_bytes();
    let body = if bytes.first() == Some(&b'#') {
        let (skip, hex) = match bytes.get(1) {
            Some(b'x') | Some(b'X') => (2, true),
            _ => (1, false),
        };
        let digits = bytes[skip..]
            .iter()
            .take_while(|b| if hex { b.is_ascii_hexdigit() } else { b.is_ascii_digit() })
            .count();
        if digits == 0 {
            return None;
        }
        skip + digits
    } else {
        let letters = bytes
            .iter()
            .take_while(|b| b.is_ascii_alphanumeric())
            .count();
        if letters == 0 || letters > 32 || !bytes[0].is_ascii_alphabetic() {
            return None;
        }
        letters
    };
    (bytes.get(body) == Some(&b';')).then_some(body + 1)
}

fn strip_entities(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut rest = text;
    while let Some(amp) = rest.find('&') {
        out.push_str(&rest[..amp]);
        let after = &rest[amp + 1..];
        match entity_len(after) {
            Some(len) => {
                out.push(' ');
                rest = &after[len..];
            }
            None => {
                out.push('&');
                rest = after;
            }
        }
    }
    out.push_str(rest);
    out
}

fn is_url_piece(piece: &str) -> bool {
    piece.contains("://")
        || piece
            .trim_start_matches(|c: char| !c.is_alphanumeric())
            .starts_with("www.")
}

fn strip_urls(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    let mut piece_start = None;
    for (i, c) in text.char_indices() {
        if c.is_whitespace() {
            if let Some(start) = piece_start.take() {
                push_piece(&mut out, &text[start..i]);
            }
            out.push(c);
        } else if piece_start.is_none() {
            piece_start = Some(i);
        }
    }
    if let Some(start) = piece_start {
        push_piece(&mut out, &text[start..]);
    }
    out
}

fn push_piece(out: &mut String, piece: &str) {
    if is_url_piece(piece) {
        out.push(' ');
    } else {
        out.push_str(piece);
    }
}

/// Common English function words.
pub const ENGLISH_STOPWORDS: &[&str] = &[
    "i", "me", "my", "myself", "we", "our", "ours", "ourselves", "you", "you're", "you've",
    "you'll", "you'd", "your", "yours", "yourself", "yourselves", "he", "him", "his", "himself",
    "she", "she's", "her", "hers", "herself", "it", "it's", "its", "itself", "they", "them",
    "their", "theirs", "themselves", "what", "which", "who", "whom", "this", "that", "that'll",
    "these", "those", "am", "is", "are", "was", "were", "be", "been", "being", "have", "has",
    "had", "having", "do", "does", "did", "doing", "a", "an", "the", "and", "but", "if", "or",
    "because", "as", "until", "while", "of", "at", "by", "for", "with", "about", "against",
    "between", "into", "through", "during", "before", "after", "above", "below", "to", "from",
    "up", "down", "in", "out", "on", "off", "over", "under", "again", "further", "then", "once",
    "here", "there", "when", "where", "why", "how", "all", "any", "both", "each", "few", "more",
    "most", "other", "some", "such", "no", "nor", "not", "only", "own", "same", "so", "than",
    "too", "very", "s", "t", "can", "will", "just", "don", "don't", "should", "should've", "now",
    "d", "ll", "m", "o", "re", "ve", "y", "ain", "aren", "aren't", "couldn", "couldn't", "didn",
    "didn't", "doesn", "doesn't", "hadn", "hadn't", "hasn", "hasn't", "haven", "haven't", "isn",
    "isn't", "ma", "mightn", "mightn't", "mustn", "mustn't", "needn", "needn't", "shan", "shan't",
    "shouldn", "shouldn't", "wasn", "wasn't", "weren", "weren't", "won", "won't", "wouldn",
    "wouldn't", "rt", "amp",
];
