use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::model::Dataset;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AuthorNode {
    pub name: String,
    pub papers: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoauthorEdge {
    pub a: String,
    pub b: String,
    pub weight: usize,
}

/// Undirected; nodes sorted by name, edges by (a, b) with a < b.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoauthorGraph {
    pub nodes: Vec<AuthorNode>,
    pub edges: Vec<CoauthorEdge>,
}

/// Authors are identified by their canonical rendering, case-insensitively.
pub fn coauthor_graph(d: &Dataset) -> CoauthorGraph {
    let mut display: BTreeMap<String, String> = BTreeMap::new();
    let mut papers: BTreeMap<String, usize> = BTreeMap::new();
    let mut edges: BTreeMap<(String, String), usize> = BTreeMap::new();
    for r in d.records() {
        let keys: BTreeSet<String> = r
            .authors
            .iter()
            .filter(|a| !a.canonical().is_empty())
            .map(|a| {
                let k = a.key();
                display.entry(k.clone()).or_insert_with(|| a.canonical());
                k
            })
            .collect();
        for k in &keys {
            *papers.entry(k.clone()).or_default() += 1;
        }
        let list: Vec<&String> = keys.iter().collect();
        for (i, a) in list.iter().enumerate() {
            for b in &list[i + 1..] {
                *edges.entry(((*a).clone(), (*b).clone())).or_default() += 1;
            }
        }
    }
    let name = |k: &String| display[k].clone();
    let mut nodes: Vec<AuthorNode> = papers
        .iter()
        .map(|(k, n)| AuthorNode {
            name: name(k),
            papers: *n,
        })
        .collect();
    nodes.sort_by(|x, y| x.name.cmp(&y.name));
    let mut edges: Vec<CoauthorEdge> = edges
        .into_iter()
        .map(|((a, b), w)| {
            let (a, b) = (name(&a), name(&b));
            let (a, b) = if a <= b { (a, b) } else { (b, a) };
            CoauthorEdge { a, b, weight: w }
        })
        .collect();
    edges.sort_by(|x, y| (&x.a, &x.b).cmp(&(&y.a, &y.b)));
    CoauthorGraph { nodes, edges }
}

fn csv_of<const N: usize>(header: [&str; N], rows: impl IntoIterator<Item = [String; N]>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.write_record(&r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
}

fn dot_quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

impl CoauthorGraph {
    pub fn weight(&self, a: &str, b: &str) -> usize {
        let (a, b) = if a <= b { (a, b) } else { (b, a) };
        self.edges.iter().find(|e| e.a == a && e.b == b).map(|e| e.weight).unwrap_or(0)
    }

    pub fn nodes_csv(&self) -> String {
        csv_of(["author", "papers"], self.nodes.iter().map(|n| [n.name.clone(), n.papers.to_string()]))
    }

    pub fn edges_csv(&self) -> String {
        csv_of(
            ["source", "target", "weight"],
            self.edges.iter().map(|e| [e.a.clone(), e.b.clone(), e.weight.to_string()]),
        )
    }

    /// Graphviz DOT.
    pub fn to_dot(&self) -> String {
        let mut s = String::from("graph coauthors {\n");
        for n in &self.nodes {
            s.push_str(&format!("  {} [papers={}];\n", dot_quote(&n.name), n.papers));
        }
        for e in &self.edges {
            s.push_str(&format!("  {} -- {} [weight={}];\n", dot_quote(&e.a), dot_quote(&e.b), e.weight));
        }
        s.push_str("}\n");
        s
    }
}
