//! CSV, GEXF and DOT writers, plus edge-list re-import.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::{self, Read, Write};

use crisisnet_core::netgraph::{GroupSummary, MentionGraph, Partition};
use crisisnet_core::ngrams::{BigramGraph, TermTimeMatrix, TopTerm};
use crisisnet_core::sentiment::DayCounts;
use crisisnet_core::Day;

fn csv_err(e: csv::Error) -> io::Error {
    io::Error::other(e)
}

fn csv_writer<W: Write>(out: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out)
}

macro_rules! row {
    ($w:expr, $($field:expr),+ $(,)?) => {
        $w.write_record([$(AsRef::<[u8]>::as_ref(&$field)),+]).map_err(csv_err)
    };
}

pub fn write_sentiment<W: Write>(out: W, series: &BTreeMap<Day, DayCounts>) -> io::Result<()> {
    let mut w = csv_writer(out);
    row!(w, "day", "negative", "neutral", "positive")?;
    for (day, c) in series {
        row!(w, day.to_string(), c.negative.to_string(), c.neutral.to_string(), c.positive.to_string())?;
    }
    w.flush()
}

pub fn write_top_terms<W: Write>(out: W, terms: &[TopTerm]) -> io::Result<()> {
    let mut w = csv_writer(out);
    row!(w, "rank", "term", "count", "cumulative")?;
    for (i, t) in terms.iter().enumerate() {
        row!(w, (i + 1).to_string(), t.term, t.count.to_string(), format!("{:.4}", t.cumulative))?;
    }
    w.flush()
}

/// First column `term`, then one column per ISO date.
pub fn write_heatmap<W: Write>(out: W, m: &TermTimeMatrix) -> io::Result<()> {
    let mut w = csv_writer(out);
    let mut header = vec!["term".to_string()];
    header.extend(m.days.iter().map(Day::to_string));
    w.write_record(&header).map_err(csv_err)?;
    for (term, counts) in m.terms.iter().zip(&m.counts) {
        let mut rec = vec![term.clone()];
        rec.extend(counts.iter().map(usize::to_string));
        w.write_record(&rec).map_err(csv_err)?;
    }
    w.flush()
}

/// `source,target,weight` rows.
pub fn write_edge_list<'a, W: Write>(
    out: W,
    edges: impl IntoIterator<Item = (&'a str, &'a str, usize)>,
) -> io::Result<()> {
    let mut w = csv_writer(out);
    row!(w, "source", "target", "weight")?;
    for (s, t, weight) in edges {
        row!(w, s, t, weight.to_string())?;
    }
    w.flush()
}

pub fn mention_edges(g: &MentionGraph) -> impl Iterator<Item = (&str, &str, usize)> {
    g.edges().map(|(s, t, w)| (g.handle(s), g.handle(t), w))
}

/// Reads a `source,target,weight` edge list back into a graph.
pub fn read_edge_list<R: Read>(input: R) -> io::Result<MentionGraph> {
    let mut rdr = csv::Reader::from_reader(input);
    let mut edges = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(csv_err)?;
        let bad = || io::Error::new(io::ErrorKind::InvalidData, format!("bad edge row {rec:?}"));
        let weight: usize = rec.get(2).and_then(|w| w.parse().ok()).ok_or_else(bad)?;
        match (rec.get(0), rec.get(1)) {
            (Some(s), Some(t)) => edges.push((s.to_string(), t.to_string(), weight)),
            _ => return Err(bad()),
        }
    }
    Ok(MentionGraph::from_edges(
        [],
        edges.iter().map(|(s, t, w)| (s.as_str(), t.as_str(), *w)),
    ))
}

/// One metrics row per graph, component or community.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsRow {
    pub group: String,
    pub kind: String,
    pub summary: GroupSummary,
}

impl MetricsRow {
    pub fn cells(&self) -> [String; 7] {
        let opt = |x: Option<f64>| x.map(|v| format!("{v:.6}")).unwrap_or_default();
        [
            self.group.clone(),
            self.kind.clone(),
            self.summary.nodes.to_string(),
            self.summary.edges.to_string(),
            opt(self.summary.density),
            opt(self.summary.avg_degree),
            self.summary.diameter.to_string(),
        ]
    }
}

pub const METRICS_HEADER: [&str; 7] = ["group", "kind", "nodes", "edges", "density", "avg_degree", "diameter"];

pub fn write_metrics<W: Write>(out: W, rows: &[MetricsRow]) -> io::Result<()> {
    let mut w = csv_writer(out);
    w.write_record(METRICS_HEADER).map_err(csv_err)?;
    for r in rows {
        w.write_record(r.cells()).map_err(csv_err)?;
    }
    w.flush()
}

/// `community,rank,handle,degree`.
pub fn write_top_nodes<W: Write>(out: W, ranked: &[Vec<(String, usize)>]) -> io::Result<()> {
    let mut w = csv_writer(out);
    row!(w, "community", "rank", "handle", "degree")?;
    for (c, nodes) in ranked.iter().enumerate() {
        for (i, (handle, degree)) in nodes.iter().enumerate() {
            row!(w, c.to_string(), (i + 1).to_string(), handle, degree.to_string())?;
        }
    }
    w.flush()
}

/// One row of the per-community topic table.
#[derive(Debug, Clone, PartialEq)]
pub struct TopicWord {
    pub community: usize,
    pub topic: usize,
    pub rank: usize,
    pub word: String,
    pub probability: f64,
}

pub fn write_topics<W: Write>(out: W, rows: &[TopicWord]) -> io::Result<()> {
    let mut w = csv_writer(out);
    row!(w, "community", "topic", "rank", "word", "probability")?;
    for r in rows {
        row!(
            w,
            r.community.to_string(),
            r.topic.to_string(),
            r.rank.to_string(),
            r.word,
            format!("{:.3}", r.probability)
        )?;
    }
    w.flush()
}

/// `(community, K, mean coherence)`.
pub fn write_coherence<W: Write>(out: W, rows: &[(usize, usize, f64)]) -> io::Result<()> {
    let mut w = csv_writer(out);
    row!(w, "community", "K", "mean_coherence")?;
    for (c, k, score) in rows {
        row!(w, c.to_string(), k.to_string(), format!("{score:.6}"))?;
    }
    w.flush()
}

fn xml_escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

/// Attribute-carrying graph ready for GEXF serialization. Node values are
/// positional against `attributes`; `None` omits the attvalue.
#[derive(Debug, Clone, Default)]
pub struct Gexf {
    pub attributes: Vec<(&'static str, &'static str)>,
    pub nodes: Vec<(String, Vec<Option<String>>)>,
    pub edges: Vec<(String, String, usize)>,
}

impl Gexf {
    pub fn render(&self) -> String {
        let mut s = String::new();
        s.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
        s.push_str("<gexf xmlns=\"http://www.gexf.net/1.2draft\" version=\"1.2\">\n");
        s.push_str("  <graph mode=\"static\" defaultedgetype=\"directed\">\n");
        if !self.attributes.is_empty() {
            s.push_str("    <attributes class=\"node\">\n");
            for (i, (title, ty)) in self.attributes.iter().enumerate() {
                let _ = writeln!(s, "      <attribute id=\"{i}\" title=\"{title}\" type=\"{ty}\"/>");
            }
            s.push_str("    </attributes>\n");
        }
        s.push_str("    <nodes>\n");
        for (id, values) in &self.nodes {
            let id = xml_escape(id);
            let _ = write!(s, "      <node id=\"{id}\" label=\"{id}\"");
            let present: Vec<_> = values.iter().enumerate().filter_map(|(i, v)| v.as_ref().map(|v| (i, v))).collect();
            if present.is_empty() {
                s.push_str("/>\n");
                continue;
            }
            s.push_str(">\n        <attvalues>\n");
            for (i, v) in present {
                let _ = writeln!(s, "          <attvalue for=\"{i}\" value=\"{}\"/>", xml_escape(v));
            }
            s.push_str("        </attvalues>\n      </node>\n");
        }
        s.push_str("    </nodes>\n    <edges>\n");
        for (i, (src, dst, w)) in self.edges.iter().enumerate() {
            let _ = writeln!(
                s,
                "      <edge id=\"{i}\" source=\"{}\" target=\"{}\" weight=\"{w}\"/>",
                xml_escape(src),
                xml_escape(dst)
            );
        }
        s.push_str("    </edges>\n  </graph>\n</gexf>\n");
        s
    }
}

/// Mention graph with component, community, degree and agency attributes.
/// `communities` labels only the nodes of `community_graph`; others get -1.
pub fn mention_gexf(
    g: &MentionGraph,
    components: &Partition,
    community_graph: &MentionGraph,
    communities: &Partition,
) -> Gexf {
    let degrees = g.total_degrees();
    let nodes = g
        .nodes()
        .iter()
        .enumerate()
        .map(|(i, node)| {
            let community = community_graph
                .node_id(&node.handle)
                .map_or(-1, |j| communities.label(j) as i64);
            let values = vec![
                Some(components.label(i).to_string()),
                Some(community.to_string()),
                Some(degrees[i].to_string()),
                node.agency_type.clone(),
            ];
            (node.handle.clone(), values)
        })
        .collect();
    Gexf {
        attributes: vec![
            ("component", "integer"),
            ("community", "integer"),
            ("degree", "integer"),
            ("agency_type", "string"),
        ],
        nodes,
        edges: mention_edges(g).map(|(s, t, w)| (s.into(), t.into(), w)).collect(),
    }
}

pub fn bigram_gexf(g: &BigramGraph) -> Gexf {
    Gexf {
        attributes: vec![("degree", "integer")],
        nodes: g.nodes.iter().map(|(w, d)| (w.clone(), vec![Some(d.to_string())])).collect(),
        edges: g.edges.iter().map(|e| (e.source.clone(), e.target.clone(), e.weight)).collect(),
    }
}

fn dot_id(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

/// DOT digraph; nodes carry their community label, edges their weight.
pub fn mention_dot(g: &MentionGraph, community_graph: &MentionGraph, communities: &Partition) -> String {
    let mut s = String::from("digraph mentions {\n");
    for node in g.nodes() {
        let community = community_graph
            .node_id(&node.handle)
            .map_or(-1, |j| communities.label(j) as i64);
        let _ = writeln!(s, "  {} [community={community}];", dot_id(&node.handle));
    }
    for (src, dst, w) in mention_edges(g) {
        let _ = writeln!(s, "  {} -> {} [weight={w}];", dot_id(src), dot_id(dst));
    }
    s.push_str("}\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crisisnet_core::netgraph::{self, PartitionKind};

    #[test]
    fn edge_list_round_trip() {
        let g = MentionGraph::from_edges([], [("a", "b", 3)]);
        let mut buf = Vec::new();
        write_edge_list(&mut buf, mention_edges(&g)).unwrap();
        assert_eq!(String::from_utf8(buf.clone()).unwrap(), "source,target,weight\na,b,3\n");
        assert_eq!(read_edge_list(buf.as_slice()).unwrap(), g);
    }

    #[test]
    fn empty_graph_exports() {
        let g = MentionGraph::default();
        let p = Partition::from_raw(&[], PartitionKind::Community);
        let xml = mention_gexf(&g, &p, &g, &p).render();
        assert!(xml.contains("<nodes>\n    </nodes>"));
        assert!(xml.contains("<edges>\n    </edges>"));
        assert_eq!(mention_dot(&g, &g, &p), "digraph mentions {\n}\n");
        let mut buf = Vec::new();
        write_edge_list(&mut buf, mention_edges(&g)).unwrap();
        assert_eq!(read_edge_list(buf.as_slice()).unwrap(), g);
    }

    #[test]
    fn every_node_carries_its_labels() {
        let mut g = MentionGraph::from_edges(["z"], [("b", "a", 1), ("c", "d", 2)]);
        g.set_agency_types([("a", "news & media")]);
        let comps = netgraph::weak_components(&g);
        let communities = Partition::from_raw(&[0, 0, 1, 1, 2], PartitionKind::Community);
        let xml = mention_gexf(&g, &comps, &g, &communities).render();
        assert_eq!(xml.matches("<node ").count(), 5);
        assert_eq!(xml.matches("<attvalue for=\"1\"").count(), 5);
        assert!(xml.contains("value=\"news &amp; media\""));
        // lexicographic node order
        let order: Vec<usize> = ["\"a\"", "\"b\"", "\"c\"", "\"d\"", "\"z\""]
            .iter()
            .map(|id| xml.find(&format!("<node id={id}")).unwrap())
            .collect();
        assert!(order.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn topic_probabilities_have_three_decimals() {
        let rows = [TopicWord { community: 0, topic: 1, rank: 1, word: "storm".into(), probability: 0.12345 }];
        let mut buf = Vec::new();
        write_topics(&mut buf, &rows).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "community,topic,rank,word,probability\n0,1,1,storm,0.123\n");
    }
}
