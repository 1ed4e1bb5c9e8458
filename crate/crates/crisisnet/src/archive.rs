//! Line-delimited tweet archives in, normalized corpus out.

use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use chrono::{DateTime, SecondsFormat, Utc};
use crisisnet_core::ingest::{self, BoundingBox, CorpusStats, GeoPoint, Region, Tweet, UNASSIGNED};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Deserialize)]
struct RawTweet {
    id: String,
    author_id: String,
    author_handle: String,
    text: String,
    created_at: String,
    #[serde(default)]
    geo: Option<RawGeo>,
    #[serde(default)]
    place_name: Option<String>,
    #[serde(default)]
    entities: Option<RawEntities>,
}

#[derive(Debug, Deserialize)]
struct RawGeo {
    #[serde(default)]
    bbox: Option<Vec<f64>>,
}

#[derive(Debug, Deserialize)]
struct RawEntities {
    #[serde(default)]
    mentions: Option<Vec<String>>,
}

/// Parses one archive record. Any schema or range violation is an error,
/// which callers count and skip.
pub fn parse_line(line: &str) -> Result<Tweet, String> {
    let raw: RawTweet = serde_json::from_str(line).map_err(|e| e.to_string())?;
    if raw.id.is_empty() {
        return Err("empty id".into());
    }
    let created_at = DateTime::parse_from_rfc3339(&raw.created_at)
        .map_err(|e| format!("created_at: {e}"))?
        .with_timezone(&Utc);
    let bbox = match raw.geo.and_then(|g| g.bbox) {
        None => None,
        Some(coords) => Some(parse_bbox(&coords)?),
    };
    let mentions = raw.entities.and_then(|e| e.mentions);
    Ok(Tweet::new(
        raw.id,
        raw.author_id,
        &raw.author_handle,
        raw.text,
        created_at,
        bbox,
        raw.place_name,
        mentions.as_deref(),
    ))
}

fn parse_bbox(coords: &[f64]) -> Result<BoundingBox, String> {
    if coords.len() != 8 {
        return Err(format!("geo.bbox has {} numbers, expected 8", coords.len()));
    }
    let corner = |i: usize| GeoPoint::new(coords[2 * i], coords[2 * i + 1]).map_err(|e| e.to_string());
    Ok([corner(0)?, corner(1)?, corner(2)?, corner(3)?])
}

/// Tweets from one archive plus the loader's share of the corpus stats.
#[derive(Debug, Default)]
pub struct Archive {
    pub tweets: Vec<Tweet>,
    pub stats: CorpusStats,
    /// `(line number, reason)` for every skipped line.
    pub skipped: Vec<(usize, String)>,
}

/// Reads records from `reader`; blank lines are ignored.
pub fn read_archive<R: BufRead>(reader: R, path: &Path) -> Result<Archive> {
    let mut archive = Archive::default();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(Error::io(path))?;
        if line.trim().is_empty() {
            continue;
        }
        match parse_line(&line) {
            Ok(tweet) => {
                archive.tweets.push(tweet);
                archive.stats.total_loaded += 1;
            }
            Err(reason) => {
                archive.skipped.push((i + 1, reason));
                archive.stats.malformed_skipped += 1;
            }
        }
    }
    Ok(archive)
}

pub fn load_archive(path: &Path) -> Result<Archive> {
    let file = File::open(path).map_err(Error::io(path))?;
    read_archive(BufReader::new(file), path)
}

/// Output schema: the input fields plus derived geography.
#[derive(Debug, Serialize)]
struct NormalizedRecord<'a> {
    id: &'a str,
    author_id: &'a str,
    author_handle: &'a str,
    text: &'a str,
    created_at: String,
    geo: Option<NormalizedGeo>,
    place_name: Option<&'a str>,
    entities: NormalizedEntities<'a>,
    centroid_lon: Option<f64>,
    centroid_lat: Option<f64>,
    region: &'a str,
}

#[derive(Debug, Serialize)]
struct NormalizedGeo {
    bbox: Vec<f64>,
}

#[derive(Debug, Serialize)]
struct NormalizedEntities<'a> {
    mentions: &'a [String],
}

/// Centroid and region of a tweet; a box that cannot be averaged (it
/// crosses the antimeridian) is reported through `warn` and treated as
/// missing.
pub fn locate<'r>(
    tweet: &Tweet,
    regions: &'r [Region],
    mut warn: impl FnMut(String),
) -> (Option<GeoPoint>, &'r str) {
    let centroid = match tweet.centroid() {
        None => None,
        Some(Ok(p)) => Some(p),
        Some(Err(e)) => {
            warn(format!("tweet {}: {e}", tweet.id));
            None
        }
    };
    let region = centroid
        .and_then(|p| ingest::assign_region(p, regions))
        .unwrap_or(UNASSIGNED);
    (centroid, region)
}

pub fn write_normalized<W: Write>(
    mut out: W,
    tweets: &[Tweet],
    regions: &[Region],
    mut warn: impl FnMut(String),
) -> std::io::Result<()> {
    for t in tweets {
        let (centroid, region) = locate(t, regions, &mut warn);
        let record = NormalizedRecord {
            id: &t.id,
            author_id: &t.author_id,
            author_handle: &t.author_handle,
            text: &t.text,
            created_at: t.created_at.to_rfc3339_opts(SecondsFormat::Secs, true),
            geo: t.bbox.map(|b| NormalizedGeo {
                bbox: b.iter().flat_map(|p| [p.lon, p.lat]).collect(),
            }),
            place_name: t.place_name.as_deref(),
            entities: NormalizedEntities {
                mentions: &t.mentions,
            },
            centroid_lon: centroid.map(|p| p.lon),
            centroid_lat: centroid.map(|p| p.lat),
            region,
        };
        serde_json::to_writer(&mut out, &record)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn write_stats<W: Write>(mut out: W, stats: &CorpusStats) -> std::io::Result<()> {
    writeln!(out, "total_loaded={}", stats.total_loaded)?;
    writeln!(out, "duplicates_dropped={}", stats.duplicates_dropped)?;
    writeln!(out, "irrelevant_dropped={}", stats.irrelevant_dropped)?;
    writeln!(out, "malformed_skipped={}", stats.malformed_skipped)?;
    writeln!(out, "kept={}", stats.kept())?;
    writeln!(out, "unique_users={}", stats.unique_users)
}

#[cfg(test)]
mod tests {
    use super::*;

    const GOOD: &str = r#"{"id":"1","author_id":"u1","author_handle":"@KPLC7News","text":"Storm surge warning for @Cameron_Parish","created_at":"2020-08-26T18:00:00Z","geo":{"bbox":[-93.4,29.9,-93.0,29.9,-93.0,30.3,-93.4,30.3]}}"#;

    fn read(text: &str) -> Archive {
        read_archive(text.as_bytes(), Path::new("mem")).unwrap()
    }

    #[test]
    fn empty_file() {
        let a = read("");
        assert!(a.tweets.is_empty());
        assert_eq!(a.stats, CorpusStats::default());
    }

    #[test]
    fn garbage_lines_are_counted() {
        let text = format!("{GOOD}\n{}\nnot json\n\n{}\n", GOOD.replace("\"1\"", "\"2\""), GOOD.replace("\"1\"", "\"3\""));
        let a = read(&text);
        assert_eq!(a.tweets.len(), 3);
        assert_eq!(a.stats.malformed_skipped, 1);
        assert_eq!(a.skipped[0].0, 3);
    }

    #[test]
    fn field_mapping() {
        let t = parse_line(GOOD).unwrap();
        assert_eq!(t.author_handle, "kplc7news");
        assert_eq!(t.mentions, ["cameron_parish"]);
        let c = t.centroid().unwrap().unwrap();
        assert!((c.lon + 93.2).abs() < 1e-12 && (c.lat - 30.1).abs() < 1e-12);
    }

    #[test]
    fn self_and_duplicate_mentions() {
        let line = r#"{"id":"9","author_id":"b","author_handle":"bob","text":"thanks @Bob @Bob","created_at":"2020-08-27T01:02:03+00:00"}"#;
        assert!(parse_line(line).unwrap().mentions.is_empty());
    }

    #[test]
    fn structured_mentions_win() {
        let line = r#"{"id":"9","author_id":"b","author_handle":"bob","text":"hi @carol","created_at":"2020-08-27T01:02:03Z","entities":{"mentions":["Dave","bob"]}}"#;
        assert_eq!(parse_line(line).unwrap().mentions, ["dave"]);
    }

    #[test]
    fn invalid_records() {
        for bad in [
            GOOD.replace("\"id\":\"1\"", "\"id\":\"\""),
            GOOD.replace("2020-08-26T18:00:00Z", "yesterday"),
            GOOD.replace("-93.4,29.9,", "-193.4,29.9,"),
            GOOD.replace("-93.4,29.9,", ""),
            GOOD.replace("\"text\"", "\"body\""),
        ] {
            assert!(parse_line(&bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn normalized_round_trip() {
        let mut t = parse_line(GOOD).unwrap();
        let mut out = Vec::new();
        write_normalized(&mut out, &[t.clone()], &[], |_| {}).unwrap();
        let line = String::from_utf8(out).unwrap();
        let v: serde_json::Value = serde_json::from_str(&line).unwrap();
        assert!((v["centroid_lon"].as_f64().unwrap() + 93.2).abs() < 1e-12);
        assert!((v["centroid_lat"].as_f64().unwrap() - 30.1).abs() < 1e-12);
        assert_eq!(v["region"], "unassigned");
        // the written record loads back as the same tweet
        let back = parse_line(line.trim_end()).unwrap();
        t.author_handle = back.author_handle.clone();
        assert_eq!(back, t);
    }

    #[test]
    fn antimeridian_box_warns() {
        let line = GOOD.replace("-93.4,29.9,-93.0,29.9,-93.0,30.3,-93.4,30.3", "179.5,0,-179.5,0,-179.5,1,179.5,1");
        let t = parse_line(&line).unwrap();
        let mut warnings = Vec::new();
        let (c, region) = locate(&t, &[], |w| warnings.push(w));
        assert!(c.is_none());
        assert_eq!(region, UNASSIGNED);
        assert_eq!(warnings.len(), 1);
    }
}
