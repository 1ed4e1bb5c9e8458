//! Corpus cleanup: mention extraction, deduplication, keyword relevance,
//! bounding-box centroids, region assignment and daily binning.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use chrono::{DateTime, Duration, Utc};
use thiserror::Error;

use crate::textprep;
use crate::Day;

/// Region name reported when no polygon contains a point.
pub const UNASSIGNED: &str = "unassigned";

/// Keywords used when the configuration does not supply any.
pub const DEFAULT_KEYWORDS: &[&str] = &[
    "hurricane",
    "laura",
    "storm",
    "evacuation",
    "surge",
    "landfall",
];

/// Longest handle the text scanner accepts after `@`.
pub const MAX_HANDLE_LEN: usize = 15;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IngestError {
    #[error("keyword set is empty")]
    EmptyKeywords,
    #[error("coordinate out of range: lon={lon}, lat={lat}")]
    CoordinateOutOfRange { lon: f64, lat: f64 },
    #[error("bounding box crosses the antimeridian (lon span {span} degrees)")]
    CrossesAntimeridian { span: f64 },
    #[error("polygon ring has {0} vertices, need at least 3")]
    DegenerateRing(usize),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeoPoint {
    pub lon: f64,
    pub lat: f64,
}

impl GeoPoint {
    pub fn new(lon: f64, lat: f64) -> Result<Self, IngestError> {
        if (-180.0..=180.0).contains(&lon) && (-90.0..=90.0).contains(&lat) {
            Ok(Self { lon, lat })
        } else {
            Err(IngestError::CoordinateOutOfRange { lon, lat })
        }
    }
}

pub type BoundingBox = [GeoPoint; 4];

#[derive(Debug, Clone, PartialEq)]
pub struct Tweet {
    pub id: String,
    pub author_id: String,
    /// Lowercase, without the leading `@`.
    pub author_handle: String,
    pub text: String,
    pub created_at: DateTime<Utc>,
    pub bbox: Option<BoundingBox>,
    pub place_name: Option<String>,
    /// Lowercase handles, first-occurrence order, no duplicates and no
    /// self-mentions.
    pub mentions: Vec<String>,
}

impl Tweet {
    /// Builds a tweet, canonicalizing the author handle and deriving
    /// mentions from `structured_mentions` when present, else from text.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        id: impl Into<String>,
        author_id: impl Into<String>,
        author_handle: &str,
        text: impl Into<String>,
        created_at: DateTime<Utc>,
        bbox: Option<BoundingBox>,
        place_name: Option<String>,
        structured_mentions: Option<&[String]>,
    ) -> Self {
        let author_handle = canonical_handle(author_handle);
        let text = text.into();
        let mentions = match structured_mentions {
            Some(handles) => clean_mentions(handles.iter().map(String::as_str), &author_handle),
            None => extract_mentions(&text, &author_handle),
        };
        Self {
            id: id.into(),
            author_id: author_id.into(),
            author_handle,
            text,
            created_at,
            bbox,
            place_name,
            mentions,
        }
    }

    /// Centroid of the bounding box, `None` when the box is missing.
    pub fn centroid(&self) -> Option<Result<GeoPoint, IngestError>> {
        self.bbox.as_ref().map(bbox_centroid)
    }

    pub fn tokens(&self) -> Vec<String> {
        textprep::analyze(&self.text)
    }
}

pub fn canonical_handle(handle: &str) -> String {
    handle.trim().trim_start_matches('@').to_lowercase()
}

fn clean_mentions<'a>(handles: impl Iterator<Item = &'a str>, author: &str) -> Vec<String> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for handle in handles {
        let handle = canonical_handle(handle);
        if handle.is_empty() || handle == author || !seen.insert(handle.clone()) {
            continue;
        }
        out.push(handle);
    }
    out
}

/// Scans `text` for `@` followed by 1 to 15 of `[A-Za-z0-9_]`.
pub fn extract_mentions(text: &str, author_handle: &str) -> Vec<String> {
    let bytes = text.as_bytes();
    let mut found = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i] == b'@' {
            let run = bytes[i + 1..]
                .iter()
                .take(MAX_HANDLE_LEN)
                .take_while(|b| b.is_ascii_alphanumeric() || **b == b'_')
                .count();
            if run > 0 {
                found.push(&text[i + 1..i + 1 + run]);
                i += 1 + run;
                continue;
            }
        }
        i += 1;
    }
    clean_mentions(found.into_iter(), &canonical_handle(author_handle))
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CorpusStats {
    pub total_loaded: usize,
    pub duplicates_dropped: usize,
    pub irrelevant_dropped: usize,
    pub malformed_skipped: usize,
    pub unique_users: usize,
}

impl CorpusStats {
    pub fn kept(&self) -> usize {
        self.total_loaded - self.duplicates_dropped - self.irrelevant_dropped
    }

    pub fn lines_read(&self) -> usize {
        self.total_loaded + self.malformed_skipped
    }

    /// Adds another shard's counts. `unique_users` is recomputed by
    /// [`prepare_corpus`], so it is not summed here.
    pub fn merge(&mut self, other: &CorpusStats) {
        self.total_loaded += other.total_loaded;
        self.duplicates_dropped += other.duplicates_dropped;
        self.irrelevant_dropped += other.irrelevant_dropped;
        self.malformed_skipped += other.malformed_skipped;
    }
}

/// Keeps the first tweet for every id. Returns the survivors and the
/// number removed.
pub fn dedupe(tweets: Vec<Tweet>) -> (Vec<Tweet>, usize) {
    let before = tweets.len();
    let mut seen = BTreeSet::new();
    let kept: Vec<Tweet> = tweets
        .into_iter()
        .filter(|t| seen.insert(t.id.clone()))
        .collect();
    let dropped = before - kept.len();
    (kept, dropped)
}

/// Lowercase relevance tokens; never empty.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Keywords(BTreeSet<String>);

impl Keywords {
    pub fn new<I, S>(words: I) -> Result<Self, IngestError>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let set: BTreeSet<String> = words
            .into_iter()
            .map(|w| w.as_ref().trim().to_lowercase())
            .filter(|w| !w.is_empty())
            .collect();
        if set.is_empty() {
            return Err(IngestError::EmptyKeywords);
        }
        Ok(Self(set))
    }

    pub fn contains(&self, token: &str) -> bool {
        self.0.contains(token)
    }

    pub fn iter(&self) -> impl Iterator<Item = &str> {
        self.0.iter().map(String::as_str)
    }

    pub fn union(&self, other: &Keywords) -> Keywords {
        Keywords(self.0.union(&other.0).cloned().collect())
    }

    pub fn matches(&self, tweet: &Tweet) -> bool {
        tweet.tokens().iter().any(|t| self.contains(t))
    }
}

impl Default for Keywords {
    fn default() -> Self {
        Self(DEFAULT_KEYWORDS.iter().map(|w| w.to_string()).collect())
    }
}

/// Keeps tweets with at least one normalized token in `keywords`.
/// Returns the survivors and the number dropped.
pub fn relevance_filter(tweets: Vec<Tweet>, keywords: &Keywords) -> (Vec<Tweet>, usize) {
    let before = tweets.len();
    let kept: Vec<Tweet> = tweets.into_iter().filter(|t| keywords.matches(t)).collect();
    let dropped = before - kept.len();
    (kept, dropped)
}

/// Dedupes and relevance-filters loaded tweets, completing `stats`.
///
/// `stats` arrives with `total_loaded` and `malformed_skipped` filled in
/// by the loader.
pub fn prepare_corpus(
    tweets: Vec<Tweet>,
    keywords: &Keywords,
    stats: &mut CorpusStats,
) -> Vec<Tweet> {
    let (tweets, dups) = dedupe(tweets);
    let (tweets, irrelevant) = relevance_filter(tweets, keywords);
    stats.duplicates_dropped += dups;
    stats.irrelevant_dropped += irrelevant;
    stats.unique_users = tweets
        .iter()
        .map(|t| t.author_id.as_str())
        .collect::<BTreeSet<_>>()
        .len();
    tweets
}

/// Arithmetic mean of the four corners.
pub fn bbox_centroid(bbox: &BoundingBox) -> Result<GeoPoint, IngestError> {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for corner in bbox {
        GeoPoint::new(corner.lon, corner.lat)?;
        lo = lo.min(corner.lon);
        hi = hi.max(corner.lon);
    }
    if hi - lo > 180.0 {
        return Err(IngestError::CrossesAntimeridian { span: hi - lo });
    }
    let lon = bbox.iter().map(|c| c.lon).sum::<f64>() / 4.0;
    let lat = bbox.iter().map(|c| c.lat).sum::<f64>() / 4.0;
    Ok(GeoPoint { lon, lat })
}

/// A simple polygon: the first ring is the outer boundary, the rest are
/// holes. Rings need not repeat their first vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct Polygon {
    rings: Vec<Vec<GeoPoint>>,
}

impl Polygon {
    pub fn new(rings: Vec<Vec<GeoPoint>>) -> Result<Self, IngestError> {
        let mut cleaned = Vec::with_capacity(rings.len());
        for mut ring in rings {
            if ring.len() > 1 && ring.first() == ring.last() {
                ring.pop();
            }
            if ring.len() < 3 {
                return Err(IngestError::DegenerateRing(ring.len()));
            }
            cleaned.push(ring);
        }
        if cleaned.is_empty() {
            return Err(IngestError::DegenerateRing(0));
        }
        Ok(Self { rings: cleaned })
    }

    pub fn rings(&self) -> &[Vec<GeoPoint>] {
        &self.rings
    }

    /// Even-odd containment over all rings; points on any ring count as
    /// inside.
    pub fn contains(&self, p: GeoPoint) -> bool {
        let mut inside = false;
        for ring in &self.rings {
            let n = ring.len();
            for i in 0..n {
                let a = ring[i];
                let b = ring[(i + 1) % n];
                if on_segment(p, a, b) {
                    return true;
                }
                if (a.lat > p.lat) != (b.lat > p.lat) {
                    let x = a.lon + (p.lat - a.lat) * (b.lon - a.lon) / (b.lat - a.lat);
                    if p.lon < x {
                        inside = !inside;
                    }
                }
            }
        }
        inside
    }
}

fn on_segment(p: GeoPoint, a: GeoPoint, b: GeoPoint) -> bool {
    const EPS: f64 = 1e-12;
    let cross = (b.lon - a.lon) * (p.lat - a.lat) - (b.lat - a.lat) * (p.lon - a.lon);
    let scale = crate::math::abs(b.lon - a.lon) + crate::math::abs(b.lat - a.lat) + 1.0;
    crate::math::abs(cross) <= EPS * scale
        && p.lon >= a.lon.min(b.lon) - EPS
        && p.lon <= a.lon.max(b.lon) + EPS
        && p.lat >= a.lat.min(b.lat) - EPS
        && p.lat <= a.lat.max(b.lat) + EPS
}

#[derive(Debug, Clone, PartialEq)]
pub struct Region {
    pub name: String,
    pub polygons: Vec<Polygon>,
}

impl Region {
    pub fn contains(&self, p: GeoPoint) -> bool {
        self.polygons.iter().any(|poly| poly.contains(p))
    }
}

/// Name of the first region containing `p`, in the order given.
pub fn assign_region(p: GeoPoint, regions: &[Region]) -> Option<&str> {
    regions
        .iter()
        .find(|r| r.contains(p))
        .map(|r| r.name.as_str())
}

/// Calendar day of `at` after shifting by `offset_seconds`.
pub fn day_of(at: &DateTime<Utc>, offset_seconds: i32) -> Day {
    (*at + Duration::seconds(i64::from(offset_seconds))).date_naive()
}

/// Fills every day in `[min, max]` of a day-keyed map with `zero`.
pub fn zero_fill<V: Clone>(map: &mut BTreeMap<Day, V>, zero: V) {
    let (Some(&first), Some(&last)) = (map.keys().next(), map.keys().next_back()) else {
        return;
    };
    for day in first.iter_days().take_while(|d| *d <= last) {
        map.entry(day).or_insert_with(|| zero.clone());
    }
}

/// Tweets per calendar day, zero-filled between the first and last day.
pub fn bucket_counts<'a>(
    tweets: impl IntoIterator<Item = &'a Tweet>,
    offset_seconds: i32,
) -> BTreeMap<Day, usize> {
    let mut counts = BTreeMap::new();
    for t in tweets {
        *counts.entry(day_of(&t.created_at, offset_seconds)).or_insert(0) += 1;
    }
    zero_fill(&mut counts, 0);
    counts
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use chrono::TimeZone;

    pub(crate) fn tweet(id: &str, author: &str, text: &str, day: u32) -> Tweet {
        let at = Utc.with_ymd_and_hms(2020, 8, day, 12, 0, 0).unwrap();
        Tweet::new(id, author, author, text, at, None, None, None)
    }

    fn pt(lon: f64, lat: f64) -> GeoPoint {
        GeoPoint::new(lon, lat).unwrap()
    }

    fn square(name: &str, x0: f64, y0: f64, x1: f64, y1: f64) -> Region {
        let ring = vec![pt(x0, y0), pt(x1, y0), pt(x1, y1), pt(x0, y1), pt(x0, y0)];
        Region {
            name: name.to_string(),
            polygons: vec![Polygon::new(vec![ring]).unwrap()],
        }
    }

    #[test]
    fn self_and_duplicate_mentions_dropped() {
        assert!(extract_mentions("thanks @Bob @Bob", "bob").is_empty());
        assert_eq!(
            extract_mentions("cc @KATC @kplc7news @katc and @", "someone"),
            vec!["katc", "kplc7news"]
        );
        assert_eq!(
            extract_mentions("@abcdefghijklmnopqrst hi", "x"),
            vec!["abcdefghijklmno"]
        );
    }

    #[test]
    fn structured_mentions_preferred() {
        let at = Utc.with_ymd_and_hms(2020, 8, 27, 0, 0, 0).unwrap();
        let given = vec!["@GOHSEP".to_string(), "me".to_string()];
        let t = Tweet::new("1", "9", "@Me", "hi @other", at, None, None, Some(&given));
        assert_eq!(t.author_handle, "me");
        assert_eq!(t.mentions, vec!["gohsep"]);
    }

    #[test]
    fn dedupe_examples() {
        assert_eq!(dedupe(vec![]).0, vec![]);
        let t1 = tweet("1", "a", "x", 27);
        let t2 = tweet("2", "a", "y", 27);
        let (out, dropped) = dedupe(vec![t1.clone(), t1.clone(), t2.clone()]);
        assert_eq!(out, vec![t1, t2]);
        assert_eq!(dropped, 1);

        let ids = ["1", "2", "x", "3", "x", "4", "5", "x", "6", "7"];
        let tweets: Vec<_> = ids.iter().map(|id| tweet(id, "a", "t", 27)).collect();
        let (out, dropped) = dedupe(tweets);
        assert_eq!(out.len(), 8);
        assert_eq!(dropped, 2);
    }

    #[test]
    fn relevance_examples() {
        let kw = Keywords::new(["hurricane"]).unwrap();
        let (kept, _) = relevance_filter(vec![tweet("1", "a", "Hurricane Laura is coming", 27)], &kw);
        assert_eq!(kept.len(), 1);

        let kw = Keywords::new(["hurricane", "laura"]).unwrap();
        let (kept, dropped) = relevance_filter(vec![tweet("1", "a", "nice weather today", 27)], &kw);
        assert!(kept.is_empty());
        assert_eq!(dropped, 1);

        let kw = Keywords::new(["laura"]).unwrap();
        let fixture = vec![
            tweet("1", "a", "Laura is here", 27),
            tweet("2", "a", "power is out", 27),
            tweet("3", "a", "#LAURA update", 27),
            tweet("4", "a", "lauras cousin", 27),
            tweet("5", "a", "nothing", 27),
        ];
        assert_eq!(relevance_filter(fixture, &kw).0.len(), 2);
    }

    #[test]
    fn empty_keywords_rejected() {
        assert_eq!(Keywords::new(Vec::<&str>::new()), Err(IngestError::EmptyKeywords));
        assert_eq!(Keywords::new([" "]), Err(IngestError::EmptyKeywords));
    }

    #[test]
    fn centroid_examples() {
        let c = bbox_centroid(&[pt(0., 0.), pt(2., 0.), pt(2., 2.), pt(0., 2.)]).unwrap();
        assert_eq!((c.lon, c.lat), (1.0, 1.0));
        let c = bbox_centroid(&[pt(-93.4, 29.9), pt(-93.0, 29.9), pt(-93.0, 30.3), pt(-93.4, 30.3)])
            .unwrap();
        assert!((c.lon + 93.2).abs() < 1e-12 && (c.lat - 30.1).abs() < 1e-12);
        let c = bbox_centroid(&[pt(-92., 30.); 4]).unwrap();
        assert_eq!((c.lon, c.lat), (-92.0, 30.0));
    }

    #[test]
    fn antimeridian_box_rejected() {
        let bbox = [pt(179.0, 0.), pt(-179.0, 0.), pt(-179.0, 1.), pt(179.0, 1.)];
        assert!(matches!(
            bbox_centroid(&bbox),
            Err(IngestError::CrossesAntimeridian { .. })
        ));
    }

    #[test]
    fn region_examples() {
        let a = square("A", 0., 0., 1., 1.);
        let b = square("B", 1., 0., 2., 1.);
        let regions = vec![a, b];
        assert_eq!(assign_region(pt(0.5, 0.5), &regions[..1]), Some("A"));
        assert_eq!(assign_region(pt(5., 5.), &regions[..1]), None);
        assert_eq!(assign_region(pt(1.0, 0.5), &regions), Some("A"));
        assert_eq!(assign_region(pt(1.5, 0.5), &regions), Some("B"));
        assert_eq!(assign_region(pt(0.0, 0.0), &regions), Some("A"));
    }

    #[test]
    fn polygon_holes() {
        let outer = vec![pt(0., 0.), pt(4., 0.), pt(4., 4.), pt(0., 4.)];
        let hole = vec![pt(1., 1.), pt(3., 1.), pt(3., 3.), pt(1., 3.)];
        let poly = Polygon::new(vec![outer, hole]).unwrap();
        assert!(poly.contains(pt(0.5, 0.5)));
        assert!(!poly.contains(pt(2., 2.)));
        assert!(poly.contains(pt(1., 2.)));
        assert!(Polygon::new(vec![vec![pt(0., 0.), pt(1., 1.)]]).is_err());
    }

    #[test]
    fn bucket_examples() {
        assert!(bucket_counts(&[], 0).is_empty());
        let ts = vec![
            tweet("1", "a", "x", 27),
            tweet("2", "a", "x", 27),
            tweet("3", "a", "x", 27),
            tweet("4", "a", "x", 29),
        ];
        let counts: Vec<(u32, usize)> = bucket_counts(&ts, 0)
            .into_iter()
            .map(|(d, n)| (chrono::Datelike::day(&d), n))
            .collect();
        assert_eq!(counts, vec![(27, 3), (28, 0), (29, 1)]);
        assert_eq!(bucket_counts(&ts[..1], 0).values().copied().collect::<Vec<_>>(), vec![1]);
    }

    #[test]
    fn offset_shifts_day() {
        let at = Utc.with_ymd_and_hms(2020, 8, 27, 2, 0, 0).unwrap();
        assert_eq!(day_of(&at, -5 * 3600), Day::from_ymd_opt(2020, 8, 26).unwrap());
        assert_eq!(day_of(&at, 0), Day::from_ymd_opt(2020, 8, 27).unwrap());
    }

    #[test]
    fn prepare_corpus_accounts_for_every_record() {
        let kw = Keywords::default();
        let ts = vec![
            tweet("1", "a", "hurricane", 27),
            tweet("1", "a", "hurricane", 27),
            tweet("2", "b", "sunny", 27),
            tweet("3", "c", "storm surge", 28),
        ];
        let mut stats = CorpusStats {
            total_loaded: 4,
            malformed_skipped: 1,
            ..Default::default()
        };
        let kept = prepare_corpus(ts, &kw, &mut stats);
        assert_eq!(kept.len(), 2);
        assert_eq!(stats.duplicates_dropped, 1);
        assert_eq!(stats.irrelevant_dropped, 1);
        assert_eq!(stats.unique_users, 2);
        assert_eq!(stats.kept() + stats.duplicates_dropped + stats.irrelevant_dropped + stats.malformed_skipped, stats.lines_read());
    }
}
