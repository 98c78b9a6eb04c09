//! File formats: graphs (plain text or JSON), rooted patterns, distributions,
//! Szemerédi types, and partitions.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dist::Distribution;
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::pattern::RootedPattern;
use crate::szemeredi::{Partition, SzemerediType};

#[derive(Serialize, Deserialize)]
struct GraphJson {
    n: usize,
    edges: Vec<(usize, usize)>,
    #[serde(skip_serializing_if = "Option::is_none")]
    root: Option<usize>,
}

/// Parse a graph from text (`n <count>` header then one `u v` per line,
/// 0-indexed) or from JSON {"n": .., "edges": [[u, v], ..]}.
pub fn parse_graph(content: &str) -> Result<Graph> {
    let trimmed = content.trim_start();
    if trimmed.starts_with('{') {
        let gj: GraphJson = serde_json::from_str(trimmed)?;
        return Graph::from_edges(gj.n, &gj.edges);
    }
    let mut lines = content.lines().filter(|l| {
        let t = l.trim();
        !t.is_empty() && !t.starts_with('#')
    });
    let header = lines
        .next()
        .ok_or_else(|| Error::Parse("empty graph file".into()))?;
    let mut it = header.split_whitespace();
    let tag = it.next().unwrap_or("");
    if tag != "n" {
        return Err(Error::Parse(format!(
            "graph header must start with 'n <count>', got '{header}'"
        )));
    }
    let n: usize = it
        .next()
        .and_then(|t| t.parse().ok())
        .ok_or_else(|| Error::Parse("bad vertex count".into()))?;
    let mut edges = Vec::new();
    for line in lines {
        let mut it = line.split_whitespace();
        let u: usize = it
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| Error::Parse(format!("bad edge line '{line}'")))?;
        let v: usize = it
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| Error::Parse(format!("bad edge line '{line}'")))?;
        edges.push((u, v));
    }
    Graph::from_edges(n, &edges)
}

pub fn read_graph(path: &Path) -> Result<Graph> {
    parse_graph(&std::fs::read_to_string(path)?)
}

pub fn graph_to_text(g: &Graph) -> String {
    let mut out = format!("n {}\n", g.n());
    for (u, v) in g.edges() {
        out.push_str(&format!("{u} {v}\n"));
    }
    out
}

pub fn graph_to_json(g: &Graph) -> String {
    serde_json::to_string_pretty(&GraphJson {
        n: g.n(),
        edges: g.edges(),
        root: None,
    })
    .expect("serializable")
}

/// A pattern argument: a built-in name ("edge", "triangle", "k4", "path3",
/// "cherry", "star3") or a path to a graph file carrying a "root" field
/// (JSON) / a `root <r>` line (text).
pub fn resolve_pattern(arg: &str) -> Result<RootedPattern> {
    if let Ok(p) = RootedPattern::named(arg) {
        return Ok(p);
    }
    let path = Path::new(arg);
    if !path.exists() {
        return Err(Error::validation(format!(
            "'{arg}' is neither a built-in pattern name nor a file"
        )));
    }
    let content = std::fs::read_to_string(path)?;
    let trimmed = content.trim_start();
    if trimmed.starts_with('{') {
        let gj: GraphJson = serde_json::from_str(trimmed)?;
        let root = gj
            .root
            .ok_or_else(|| Error::Parse("pattern file needs a root field".into()))?;
        return RootedPattern::new(Graph::from_edges(gj.n, &gj.edges)?, root);
    }
    // text form: same as graph plus a "root <r>" line
    let mut root = None;
    let mut rest = String::new();
    for line in content.lines() {
        let t = line.trim();
        if let Some(r) = t.strip_prefix("root ") {
            root = Some(
                r.trim()
                    .parse()
                    .map_err(|_| Error::Parse("bad root line".into()))?,
            );
        } else {
            rest.push_str(line);
            rest.push('\n');
        }
    }
    let root = root.ok_or_else(|| Error::Parse("pattern file needs a 'root <r>' line".into()))?;
    RootedPattern::new(parse_graph(&rest)?, root)
}

/// Distribution files use the serde form of `Distribution` directly:
/// {"type":"piecewise","breaks":[..],"densities":[..]} or
/// {"type":"empirical","atoms":[..]}. The string "uniform" is accepted as a
/// shorthand.
pub fn resolve_distribution(arg: &str) -> Result<Distribution> {
    if arg == "uniform" {
        return Ok(Distribution::uniform());
    }
    if let Some(c) = arg.strip_prefix("point:") {
        let v: f64 = c
            .parse()
            .map_err(|_| Error::Parse("bad point-mass value".into()))?;
        return Ok(Distribution::point_mass(v));
    }
    let content = std::fs::read_to_string(Path::new(arg))?;
    let d: Distribution = serde_json::from_str(&content)?;
    d.validate()?;
    Ok(d)
}

#[derive(Serialize, Deserialize)]
struct TypeFile {
    k: usize,
    eps: f64,
    #[serde(rename = "S")]
    s: Vec<Vec<f64>>,
}

pub fn parse_type(content: &str) -> Result<SzemerediType> {
    let tf: TypeFile = serde_json::from_str(content)?;
    if tf.s.len() != tf.k || tf.s.iter().any(|row| row.len() != tf.k) {
        return Err(Error::Parse("S must be a k x k matrix".into()));
    }
    for i in 0..tf.k {
        for j in (i + 1)..tf.k {
            if (tf.s[i][j] - tf.s[j][i]).abs() > 1e-12 {
                return Err(Error::Parse("S must be symmetric".into()));
            }
        }
    }
    let mut entries = Vec::with_capacity(tf.k * (tf.k - 1) / 2);
    for i in 0..tf.k {
        for j in (i + 1)..tf.k {
            entries.push(tf.s[i][j]);
        }
    }
    SzemerediType::from_entries(tf.k, tf.eps, entries)
}

pub fn read_type(path: &Path) -> Result<SzemerediType> {
    parse_type(&std::fs::read_to_string(path)?)
}

pub fn type_to_json(s: &SzemerediType) -> String {
    serde_json::to_string_pretty(&TypeFile {
        k: s.k,
        eps: s.eps,
        s: s.full_matrix(),
    })
    .expect("serializable")
}

#[derive(Serialize, Deserialize)]
struct PartitionFile {
    k: usize,
    assignment: Vec<usize>,
}

pub fn parse_partition(content: &str) -> Result<Partition> {
    let trimmed = content.trim_start();
    if trimmed.starts_with('[') {
        let assignment: Vec<usize> = serde_json::from_str(trimmed)?;
        let k = assignment.iter().cloned().max().unwrap_or(0);
        return Partition::new(assignment, k);
    }
    let pf: PartitionFile = serde_json::from_str(trimmed)?;
    Partition::new(pf.assignment, pf.k)
}

pub fn partition_to_json(p: &Partition) -> String {
    serde_json::to_string_pretty(&PartitionFile {
        k: p.k,
        assignment: p.assignment.clone(),
    })
    .expect("serializable")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn text_graph_round_trip() {
        let g = Graph::from_edges(4, &[(0, 1), (1, 2), (2, 3)]).unwrap();
        let txt = graph_to_text(&g);
        let back = parse_graph(&txt).unwrap();
        assert_eq!(back.edges(), g.edges());
    }

    #[test]
    fn json_graph_parses() {
        let g = parse_graph(r#"{"n": 3, "edges": [[0, 1], [1, 2]]}"#).unwrap();
        assert_eq!(g.n(), 3);
        assert_eq!(g.edge_count(), 2);
    }

    #[test]
    fn named_patterns_resolve() {
        for name in ["edge", "triangle", "k4", "path3", "star3"] {
            assert!(resolve_pattern(name).is_ok(), "{name}");
        }
        assert!(resolve_pattern("nonesuch-xyz").is_err());
    }

    #[test]
    fn distribution_formats() {
        let p: Distribution =
            serde_json::from_str(r#"{"type":"piecewise","breaks":[0.0,1.0],"densities":[1.0]}"#)
                .unwrap();
        p.validate().unwrap();
        let e: Distribution =
            serde_json::from_str(r#"{"type":"empirical","atoms":[0.25,0.5]}"#).unwrap();
        e.validate().unwrap();
        assert!((resolve_distribution("uniform").unwrap().moment(1) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn type_file_round_trip() {
        let mut s = SzemerediType::constant(3, 0.2, 0.0);
        s.set(0, 1, 0.3);
        s.set(0, 2, 0.6);
        s.set(1, 2, 0.9);
        let back = parse_type(&type_to_json(&s)).unwrap();
        assert_eq!(back, s);
        assert!(parse_type(r#"{"k":2,"eps":0.1,"S":[[0,0.4],[0.5,0]]}"#).is_err());
    }

    #[test]
    fn partition_forms() {
        let p = parse_partition("[0, 1, 1, 2, 2]").unwrap();
        assert_eq!(p.k, 2);
        let q = parse_partition(&partition_to_json(&p)).unwrap();
        assert_eq!(p, q);
    }

    proptest! {
        #[test]
        fn graph_text_round_trip_random(n in 2usize..9, seed in 0u64..500) {
            use rand::rngs::StdRng;
            use rand::{Rng, SeedableRng};
            let mut rng = StdRng::seed_from_u64(seed);
            let mut g = Graph::empty(n);
            for u in 0..n {
                for v in (u + 1)..n {
                    if rng.gen_bool(0.4) {
                        g.add_edge(u, v);
                    }
                }
            }
            let back = parse_graph(&graph_to_text(&g)).unwrap();
            prop_assert_eq!(back.edges(), g.edges());
            let back2 = parse_graph(&graph_to_json(&g)).unwrap();
            prop_assert_eq!(back2.edges(), g.edges());
        }
    }
}
