//! Auxiliary inputs: stoplists, valence lexicons, region polygons and
//! node attributes.

use std::fs;
use std::path::Path;

use crisisnet_core::ingest::{GeoPoint, Polygon, Region};
use crisisnet_core::sentiment::Lexicon;
use crisisnet_core::textprep::Stoplist;
use serde_json::Value;

use crate::error::{Error, Result};

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(Error::io(path))
}

/// One token per line; `#` starts a comment.
pub fn parse_stoplist(text: &str) -> Stoplist {
    Stoplist::new(
        text.lines()
            .map(|l| l.split('#').next().unwrap_or("").trim())
            .filter(|l| !l.is_empty()),
    )
}

pub fn load_stoplist(path: &Path) -> Result<Stoplist> {
    Ok(parse_stoplist(&read(path)?))
}

/// `term<TAB>valence` lines. Extra columns are ignored; blank lines and
/// `#` comments are skipped.
pub fn parse_lexicon(text: &str, path: &Path) -> Result<Lexicon> {
    let mut entries = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let mut cols = line.split('\t');
        let term = cols.next().unwrap_or("").trim();
        let valence = cols
            .next()
            .and_then(|v| v.trim().parse::<f64>().ok())
            .ok_or_else(|| Error::format(path, format!("line {}: expected term<TAB>valence", i + 1)))?;
        entries.push((term.to_lowercase(), valence));
    }
    Lexicon::new(entries).map_err(|e| Error::format(path, e.to_string()))
}

pub fn load_lexicon(path: &Path) -> Result<Lexicon> {
    parse_lexicon(&read(path)?, path)
}

/// Regions from a GeoJSON FeatureCollection of Polygon / MultiPolygon
/// features, each with a `name` property. File order is preserved.
pub fn parse_regions(text: &str, path: &Path) -> Result<Vec<Region>> {
    let bad = |msg: String| Error::format(path, msg);
    let doc: Value = serde_json::from_str(text).map_err(|e| bad(e.to_string()))?;
    if doc["type"] != "FeatureCollection" {
        return Err(bad("expected a FeatureCollection".into()));
    }
    let features = doc["features"]
        .as_array()
        .ok_or_else(|| bad("missing features array".into()))?;
    features
        .iter()
        .enumerate()
        .map(|(i, f)| {
            let name = f["properties"]["name"]
                .as_str()
                .ok_or_else(|| bad(format!("feature {i}: missing name property")))?;
            let geometry = &f["geometry"];
            let coords = &geometry["coordinates"];
            let polygons = match geometry["type"].as_str() {
                Some("Polygon") => vec![polygon(coords)],
                Some("MultiPolygon") => coords
                    .as_array()
                    .map(|ps| ps.iter().map(polygon).collect())
                    .unwrap_or_else(|| vec![Err("coordinates must be an array".into())]),
                other => vec![Err(format!("unsupported geometry {other:?}"))],
            };
            let polygons = polygons
                .into_iter()
                .collect::<std::result::Result<Vec<_>, String>>()
                .map_err(|e| bad(format!("feature {i} ({name}): {e}")))?;
            Ok(Region {
                name: name.to_string(),
                polygons,
            })
        })
        .collect()
}

fn polygon(coords: &Value) -> std::result::Result<Polygon, String> {
    let rings = coords.as_array().ok_or("polygon must be an array of rings")?;
    let rings = rings
        .iter()
        .map(|ring| {
            ring.as_array()
                .ok_or("ring must be an array of positions")?
                .iter()
                .map(|pos| match pos.as_array().map(Vec::as_slice) {
                    Some([lon, lat, ..]) => {
                        let (lon, lat) = (lon.as_f64().ok_or("bad lon")?, lat.as_f64().ok_or("bad lat")?);
                        GeoPoint::new(lon, lat).map_err(|e| e.to_string())
                    }
                    _ => Err("position must be [lon, lat]".to_string()),
                })
                .collect::<std::result::Result<Vec<_>, String>>()
        })
        .collect::<std::result::Result<Vec<_>, String>>()?;
    Polygon::new(rings).map_err(|e| e.to_string())
}

pub fn load_regions(path: &Path) -> Result<Vec<Region>> {
    parse_regions(&read(path)?, path)
}

/// `handle,agency_type` rows with a header.
pub fn parse_agency_types<R: std::io::Read>(reader: R, path: &Path) -> Result<Vec<(String, String)>> {
    let mut rdr = csv::Reader::from_reader(reader);
    let mut out = Vec::new();
    for row in rdr.records() {
        let row = row.map_err(|e| Error::format(path, e.to_string()))?;
        match (row.get(0), row.get(1)) {
            (Some(h), Some(a)) => out.push((h.trim().trim_start_matches('@').to_lowercase(), a.trim().to_string())),
            _ => return Err(Error::format(path, "expected handle,agency_type")),
        }
    }
    Ok(out)
}

pub fn load_agency_types(path: &Path) -> Result<Vec<(String, String)>> {
    let file = fs::File::open(path).map_err(Error::io(path))?;
    parse_agency_types(file, path)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p() -> &'static Path {
        Path::new("mem")
    }

    #[test]
    fn stoplist_comments() {
        let s = parse_stoplist("# header\nthe\n  And  # inline\n\nof\n");
        assert_eq!(s.len(), 3);
        assert!(s.contains("and"));
    }

    #[test]
    fn lexicon_tsv() {
        let lex = parse_lexicon("good\t1.9\t0.9\t[2,2]\n# c\nBad\t-2.5\n", p()).unwrap();
        assert_eq!(lex.valence("good"), Some(1.9));
        assert_eq!(lex.valence("bad"), Some(-2.5));
        assert!(parse_lexicon("good 1.9\n", p()).is_err());
        assert!(parse_lexicon("good\tNaN\n", p()).is_err());
    }

    const REGIONS: &str = r#"{"type":"FeatureCollection","features":[
      {"type":"Feature","properties":{"name":"Square"},"geometry":{"type":"Polygon","coordinates":[[[0,0],[4,0],[4,4],[0,4],[0,0]],[[1,1],[3,1],[3,3],[1,3],[1,1]]]}},
      {"type":"Feature","properties":{"name":"Two"},"geometry":{"type":"MultiPolygon","coordinates":[[[[10,10],[11,10],[11,11],[10,10]]],[[[2,2],[2.5,2],[2.5,2.5],[2,2]]]]}}
    ]}"#;

    #[test]
    fn regions_with_holes_and_multipolygons() {
        use crisisnet_core::ingest::assign_region;
        let regions = parse_regions(REGIONS, p()).unwrap();
        let at = |lon, lat| assign_region(GeoPoint::new(lon, lat).unwrap(), &regions);
        assert_eq!(at(0.5, 0.5), Some("Square"));
        assert_eq!(at(1.0, 2.0), Some("Square")); // hole boundary counts as inside
        assert_eq!(at(2.4, 2.1), Some("Two")); // inside the hole, inside the second region
        assert_eq!(at(10.8, 10.2), Some("Two"));
        assert_eq!(at(20.0, 20.0), None);
    }

    #[test]
    fn malformed_regions() {
        for bad in [
            "{",
            r#"{"type":"Feature"}"#,
            r#"{"type":"FeatureCollection","features":[{"properties":{},"geometry":{"type":"Polygon","coordinates":[]}}]}"#,
            r#"{"type":"FeatureCollection","features":[{"properties":{"name":"x"},"geometry":{"type":"Point","coordinates":[0,0]}}]}"#,
            r#"{"type":"FeatureCollection","features":[{"properties":{"name":"x"},"geometry":{"type":"Polygon","coordinates":[[[0,0],[1,1]]]}}]}"#,
        ] {
            assert!(matches!(parse_regions(bad, p()), Err(Error::Format { .. })), "{bad}");
        }
    }

    #[test]
    fn agency_csv() {
        let rows = parse_agency_types("handle,agency_type\n@KATC,news\nfema,federal\n".as_bytes(), p()).unwrap();
        assert_eq!(rows, [("katc".into(), "news".into()), ("fema".into(), "federal".into())]);
    }
}
