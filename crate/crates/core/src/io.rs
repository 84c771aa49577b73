//! Graph file formats, bundled benchmark networks and plan sidecars.
//!
//! Two formats are read and written: whitespace separated edge lists (one
//! `u v` pair per line, `#` comments) and a GML subset
//! (`graph [ node [ id N value V ] edge [ source A target B ] ]`, unknown
//! keys skipped). Only the karate club network ships with the crate; the
//! other benchmark networks are read from a data directory given by
//! `QATTACK_DATA_DIR` and checked against their published sizes.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::graph::{build_graph_with_nodes, Graph, GraphError, LabeledGraph, NodeId};
use crate::partition::Partition;
use crate::plan::{RewiringGene, RewiringPlan};

pub const DATA_DIR_ENV: &str = "QATTACK_DATA_DIR";

const KARATE_GML: &str = include_str!("../data/karate.gml");
const KARATE_SHA256: &str = "5d4b2bce437f9f883ac8fbe8d8994353d67f9b4f9dfdfe746233e12f9ed9d1fd";

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    File {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("unknown dataset `{0}` (expected karate, dolphins, football or polbooks)")]
    UnknownDataset(String),
    #[error("checksum mismatch for {name}: expected {expected}, got {actual}")]
    Checksum {
        name: String,
        expected: String,
        actual: String,
    },
    #[error("{name}: expected n={n} m={m} h={h}, file has n={got_n} m={got_m} h={got_h}")]
    CardMismatch {
        name: String,
        n: usize,
        m: usize,
        h: usize,
        got_n: usize,
        got_m: usize,
        got_h: usize,
    },
    #[error("{name} is not bundled; place {file} (or {name}.txt plus {name}.labels) in ${DATA_DIR_ENV}{hint}")]
    Unavailable {
        name: String,
        file: String,
        hint: String,
    },
    #[error("ground-truth labels do not cover node `{0}`")]
    MissingLabel(String),
    #[error("plan sidecar: {0}")]
    Json(#[from] serde_json::Error),
    #[error("plan sidecar refers to unknown node `{0}`")]
    UnknownNode(String),
}

fn read_file(path: &Path) -> Result<String, IoError> {
    fs::read_to_string(path).map_err(|source| IoError::File {
        path: path.to_path_buf(),
        source,
    })
}

fn write_file(path: &Path, text: &str) -> Result<(), IoError> {
    fs::write(path, text).map_err(|source| IoError::File {
        path: path.to_path_buf(),
        source,
    })
}

/// A graph with original node labels and, when known, a reference partition.
#[derive(Clone, Debug, PartialEq)]
pub struct LabeledNetwork {
    pub name: String,
    pub graph: Graph,
    pub labels: Vec<String>,
    pub ground_truth: Option<Partition>,
}

impl LabeledNetwork {
    pub fn from_labeled_graph(name: impl Into<String>, lg: LabeledGraph) -> Self {
        LabeledNetwork {
            name: name.into(),
            graph: lg.graph,
            labels: lg.labels,
            ground_truth: None,
        }
    }

    pub fn id_of(&self, label: &str) -> Option<NodeId> {
        self.labels.iter().position(|l| l == label)
    }

    /// Attaches ground truth given as `label -> community` pairs.
    pub fn with_truth(mut self, truth: &HashMap<String, String>) -> Result<Self, IoError> {
        let raw = self
            .labels
            .iter()
            .map(|l| truth.get(l).ok_or_else(|| IoError::MissingLabel(l.clone())))
            .collect::<Result<Vec<_>, _>>()?;
        self.ground_truth = Some(Partition::from_labels(&raw));
        Ok(self)
    }
}

// ---------------------------------------------------------------------------
// edge lists

const NODES_DIRECTIVE: &str = "# nodes:";

/// Parses `u v` lines. An optional `# nodes: a b c` comment fixes node order
/// and declares isolated nodes.
pub fn parse_edgelist(text: &str) -> Result<LabeledGraph, IoError> {
    let mut pairs = Vec::new();
    let mut nodes = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if let Some(rest) = line.strip_prefix(NODES_DIRECTIVE) {
            nodes.extend(rest.split_whitespace());
            continue;
        }
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut it = line.split_whitespace();
        match (it.next(), it.next()) {
            (Some(a), Some(b)) => {
                if a == b {
                    return Err(IoError::Parse {
                        line: i + 1,
                        msg: format!("self-loop on `{a}`"),
                    });
                }
                pairs.push((a, b));
            }
            _ => {
                return Err(IoError::Parse {
                    line: i + 1,
                    msg: format!("expected two node labels, got `{line}`"),
                })
            }
        }
    }
    Ok(build_graph_with_nodes(nodes, pairs)?)
}

pub fn load_edgelist(path: impl AsRef<Path>) -> Result<LabeledGraph, IoError> {
    parse_edgelist(&read_file(path.as_ref())?)
}

/// Writes one `u v` line per edge using `labels`, or dense ids when `None`,
/// after a `# nodes:` line listing every node in id order.
pub fn format_edgelist(g: &Graph, labels: Option<&[String]>) -> String {
    let mut out = String::from(NODES_DIRECTIVE);
    for v in g.nodes() {
        match labels {
            Some(l) => write!(out, " {}", l[v]),
            None => write!(out, " {v}"),
        }
        .unwrap();
    }
    out.push('\n');
    for e in g.edges() {
        match labels {
            Some(l) => writeln!(out, "{} {}", l[e.lo()], l[e.hi()]),
            None => writeln!(out, "{} {}", e.lo(), e.hi()),
        }
        .unwrap();
    }
    out
}

pub fn write_edgelist(path: impl AsRef<Path>, g: &Graph, labels: Option<&[String]>) -> Result<(), IoError> {
    write_file(path.as_ref(), &format_edgelist(g, labels))
}

/// Reads `node community` lines.
pub fn parse_labels(text: &str) -> Result<HashMap<String, String>, IoError> {
    let mut out = HashMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut it = line.split_whitespace();
        match (it.next(), it.next()) {
            (Some(a), Some(b)) => {
                out.insert(a.to_string(), b.to_string());
            }
            _ => {
                return Err(IoError::Parse {
                    line: i + 1,
                    msg: format!("expected `node community`, got `{line}`"),
                })
            }
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// GML subset

#[derive(Debug, Clone, PartialEq)]
enum GmlValue {
    Scalar(String),
    List(Vec<(String, GmlValue)>),
}

struct GmlLexer<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: usize,
}

#[derive(Debug, PartialEq)]
enum Token {
    Open,
    Close,
    Word(String),
    Quoted(String),
}

impl<'a> GmlLexer<'a> {
    fn new(text: &'a str) -> Self {
        GmlLexer {
            chars: text.chars().peekable(),
            line: 1,
        }
    }

    fn err(&self, msg: impl Into<String>) -> IoError {
        IoError::Parse {
            line: self.line,
            msg: msg.into(),
        }
    }

    fn next_token(&mut self) -> Result<Option<Token>, IoError> {
        loop {
            match self.chars.peek() {
                None => return Ok(None),
                Some('\n') => {
                    self.line += 1;
                    self.chars.next();
                }
                Some(c) if c.is_whitespace() => {
                    self.chars.next();
                }
                Some('#') => {
                    while let Some(&c) = self.chars.peek() {
                        if c == '\n' {
                            break;
                        }
                        self.chars.next();
                    }
                }
                Some(_) => break,
            }
        }
        let c = self.chars.next().unwrap();
        Ok(Some(match c {
            '[' => Token::Open,
            ']' => Token::Close,
            '"' => {
                let mut s = String::new();
                loop {
                    match self.chars.next() {
                        None => return Err(self.err("unterminated string")),
                        Some('"') => break,
                        Some(ch) => {
                            if ch == '\n' {
                                self.line += 1;
                            }
                            s.push(ch);
                        }
                    }
                }
                Token::Quoted(s)
            }
            _ => {
                let mut s = String::from(c);
                while let Some(&ch) = self.chars.peek() {
                    if ch.is_whitespace() || ch == '[' || ch == ']' || ch == '"' {
                        break;
                    }
                    s.push(ch);
                    self.chars.next();
                }
                Token::Word(s)
            }
        }))
    }

    /// Parses `key value` pairs until `]` (nested) or end of input (top).
    fn parse_list(&mut self, nested: bool) -> Result<Vec<(String, GmlValue)>, IoError> {
        let mut items = Vec::new();
        loop {
            let key = match self.next_token()? {
                None if nested => return Err(self.err("unexpected end of input, missing `]`")),
                None => return Ok(items),
                Some(Token::Close) if nested => return Ok(items),
                Some(Token::Word(k)) => k,
                Some(t) => return Err(self.err(format!("expected a key, got {t:?}"))),
            };
            let value = match self.next_token()? {
                Some(Token::Open) => GmlValue::List(self.parse_list(true)?),
                Some(Token::Word(v)) | Some(Token::Quoted(v)) => GmlValue::Scalar(v),
                other => return Err(self.err(format!("missing value for `{key}` (got {other:?})"))),
            };
            items.push((key, value));
        }
    }
}

fn scalar<'a>(items: &'a [(String, GmlValue)], key: &str) -> Option<&'a str> {
    items.iter().find_map(|(k, v)| match v {
        GmlValue::Scalar(s) if k == key => Some(s.as_str()),
        _ => None,
    })
}

/// Parses a GML graph. Node ids become labels; `value` attributes, when
/// every node has one, become the ground truth. Weights and other keys are
/// ignored.
pub fn parse_gml(text: &str) -> Result<LabeledNetwork, IoError> {
    let mut lexer = GmlLexer::new(text);
    let top = lexer.parse_list(false)?;
    let mut name = String::from("gml");
    let graph_items = top
        .iter()
        .find_map(|(k, v)| match v {
            GmlValue::List(items) if k == "graph" => Some(items),
            _ => None,
        })
        .ok_or_else(|| IoError::Parse {
            line: 1,
            msg: "no `graph [ ... ]` block".into(),
        })?;
    if let Some(n) = scalar(graph_items, "name").or_else(|| scalar(graph_items, "label")) {
        name = n.to_string();
    }

    let mut labels: Vec<String> = Vec::new();
    let mut index: HashMap<String, NodeId> = HashMap::new();
    let mut values: Vec<Option<String>> = Vec::new();
    let mut edges = Vec::new();
    for (k, v) in graph_items {
        let GmlValue::List(items) = v else { continue };
        match k.as_str() {
            "node" => {
                let id = scalar(items, "id").ok_or_else(|| IoError::Parse {
                    line: 0,
                    msg: "node without id".into(),
                })?;
                if index.contains_key(id) {
                    return Err(IoError::Parse {
                        line: 0,
                        msg: format!("duplicate node id {id}"),
                    });
                }
                index.insert(id.to_string(), labels.len());
                labels.push(id.to_string());
                values.push(scalar(items, "value").map(str::to_string));
            }
            "edge" => {
                let s = scalar(items, "source");
                let t = scalar(items, "target");
                match (s, t) {
                    (Some(s), Some(t)) => edges.push((s.to_string(), t.to_string())),
                    _ => {
                        return Err(IoError::Parse {
                            line: 0,
                            msg: "edge without source or target".into(),
                        })
                    }
                }
            }
            _ => {}
        }
    }
    let mut pairs = Vec::with_capacity(edges.len());
    for (s, t) in &edges {
        let u = *index.get(s).ok_or_else(|| IoError::UnknownNode(s.clone()))?;
        let v = *index.get(t).ok_or_else(|| IoError::UnknownNode(t.clone()))?;
        if u == v {
            return Err(GraphError::SelfLoop(s.clone()).into());
        }
        pairs.push((u, v));
    }
    let graph = Graph::from_edges(labels.len(), pairs)?;
    let ground_truth = if !values.is_empty() && values.iter().all(Option::is_some) {
        let raw: Vec<&str> = values.iter().map(|v| v.as_deref().unwrap()).collect();
        Some(Partition::from_labels(&raw))
    } else {
        None
    };
    Ok(LabeledNetwork {
        name,
        graph,
        labels,
        ground_truth,
    })
}

pub fn load_gml(path: impl AsRef<Path>) -> Result<LabeledNetwork, IoError> {
    parse_gml(&read_file(path.as_ref())?)
}

fn gml_atom(s: &str) -> String {
    if !s.is_empty() && s.chars().all(|c| c.is_ascii_digit() || c == '-' || c == '.') {
        s.to_string()
    } else {
        format!("\"{}\"", s.replace('"', "'"))
    }
}

pub fn format_gml(net: &LabeledNetwork) -> String {
    let mut out = String::from("graph [\n  directed 0\n");
    writeln!(out, "  name {}", gml_atom(&net.name)).unwrap();
    for v in net.graph.nodes() {
        write!(out, "  node [\n    id {}\n", gml_atom(&net.labels[v])).unwrap();
        if let Some(p) = &net.ground_truth {
            writeln!(out, "    value {}", p.label(v)).unwrap();
        }
        out.push_str("  ]\n");
    }
    for e in net.graph.edges() {
        writeln!(
            out,
            "  edge [\n    source {}\n    target {}\n  ]",
            gml_atom(&net.labels[e.lo()]),
            gml_atom(&net.labels[e.hi()])
        )
        .unwrap();
    }
    out.push_str("]\n");
    out
}

pub fn write_gml(path: impl AsRef<Path>, net: &LabeledNetwork) -> Result<(), IoError> {
    write_file(path.as_ref(), &format_gml(net))
}

// ---------------------------------------------------------------------------
// bundled networks

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Dataset {
    Karate,
    Dolphins,
    Football,
    Polbooks,
}

/// Published size of a benchmark network: nodes, edges, ground-truth groups.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DatasetCard {
    pub nodes: usize,
    pub edges: usize,
    pub communities: usize,
}

impl Dataset {
    pub const ALL: [Dataset; 4] = [Dataset::Karate, Dataset::Dolphins, Dataset::Football, Dataset::Polbooks];

    pub fn as_str(self) -> &'static str {
        match self {
            Dataset::Karate => "karate",
            Dataset::Dolphins => "dolphins",
            Dataset::Football => "football",
            Dataset::Polbooks => "polbooks",
        }
    }

    pub fn card(self) -> DatasetCard {
        let (nodes, edges, communities) = match self {
            Dataset::Karate => (34, 78, 2),
            Dataset::Dolphins => (62, 159, 2),
            Dataset::Football => (115, 613, 12),
            Dataset::Polbooks => (105, 441, 3),
        };
        DatasetCard {
            nodes,
            edges,
            communities,
        }
    }

    /// Budget fraction of the edge count used in the benchmark protocol.
    pub fn budget_percent(self) -> f64 {
        match self {
            Dataset::Karate | Dataset::Dolphins => 5.0,
            Dataset::Football | Dataset::Polbooks => 2.0,
        }
    }

    /// Target-set fraction of the node count used in the benchmark protocol.
    pub fn target_percent(self) -> f64 {
        match self {
            Dataset::Karate => 15.0,
            _ => 10.0,
        }
    }
}

impl std::fmt::Display for Dataset {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Dataset {
    type Err = IoError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "karate" => Ok(Dataset::Karate),
            "dolphins" => Ok(Dataset::Dolphins),
            "football" => Ok(Dataset::Football),
            "polbooks" => Ok(Dataset::Polbooks),
            _ => Err(IoError::UnknownDataset(s.to_string())),
        }
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn check_card(ds: Dataset, net: &LabeledNetwork) -> Result<(), IoError> {
    let card = ds.card();
    let h = net.ground_truth.as_ref().map_or(0, Partition::community_count);
    let (n, m) = (net.graph.node_count(), net.graph.edge_count());
    if (n, m, h) != (card.nodes, card.edges, card.communities) {
        return Err(IoError::CardMismatch {
            name: ds.to_string(),
            n: card.nodes,
            m: card.edges,
            h: card.communities,
            got_n: n,
            got_m: m,
            got_h: h,
        });
    }
    Ok(())
}

/// Loads a benchmark network. Karate is compiled in and checksum-verified;
/// the others are read from `$QATTACK_DATA_DIR` as `<name>.gml` (with
/// `value` ground truth) or `<name>.txt` + `<name>.labels`, and their sizes
/// are checked against the dataset card.
pub fn load_bundled(name: &str) -> Result<LabeledNetwork, IoError> {
    let ds: Dataset = name.parse()?;
    let dir = std::env::var_os(DATA_DIR_ENV).map(PathBuf::from);
    load_dataset(ds, dir.as_deref())
}

pub fn load_dataset(ds: Dataset, data_dir: Option<&Path>) -> Result<LabeledNetwork, IoError> {
    let mut net = match ds {
        Dataset::Karate => {
            let actual = sha256_hex(KARATE_GML.as_bytes());
            if actual != KARATE_SHA256 {
                return Err(IoError::Checksum {
                    name: ds.to_string(),
                    expected: KARATE_SHA256.into(),
                    actual,
                });
            }
            parse_gml(KARATE_GML)?
        }
        _ => load_external(ds, data_dir)?,
    };
    net.name = ds.to_string();
    check_card(ds, &net)?;
    Ok(net)
}

fn load_external(ds: Dataset, data_dir: Option<&Path>) -> Result<LabeledNetwork, IoError> {
    let name = ds.as_str();
    let unavailable = |hint: String| IoError::Unavailable {
        name: name.into(),
        file: format!("{name}.gml"),
        hint,
    };
    let Some(dir) = data_dir else {
        return Err(unavailable(" (variable not set)".into()));
    };
    let gml = dir.join(format!("{name}.gml"));
    let mut net = if gml.exists() {
        load_gml(&gml)?
    } else {
        let txt = dir.join(format!("{name}.txt"));
        if !txt.exists() {
            return Err(unavailable(format!(" (nothing found in {})", dir.display())));
        }
        LabeledNetwork::from_labeled_graph(name, load_edgelist(&txt)?)
    };
    let labels_path = dir.join(format!("{name}.labels"));
    if labels_path.exists() {
        let truth = parse_labels(&read_file(&labels_path)?)?;
        net = net.with_truth(&truth)?;
    }
    Ok(net)
}

/// Resolves a `--network` argument: a dataset name or a file path
/// (`.gml` parsed as GML, anything else as an edge list).
pub fn load_network(spec: &str) -> Result<LabeledNetwork, IoError> {
    if let Ok(ds) = spec.parse::<Dataset>() {
        return load_bundled(ds.as_str());
    }
    let path = Path::new(spec);
    let stem = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| spec.to_string());
    if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("gml")) {
        let mut net = load_gml(path)?;
        net.name = stem;
        Ok(net)
    } else {
        Ok(LabeledNetwork::from_labeled_graph(stem, load_edgelist(path)?))
    }
}

// ---------------------------------------------------------------------------
// plan sidecar

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabeledGene {
    pub target: String,
    pub delete: String,
    pub add: String,
}

/// JSON companion of an exported adversarial network.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlanSidecar {
    pub network: String,
    pub strategy: String,
    pub detector: String,
    pub seed: u64,
    pub genes: Vec<LabeledGene>,
}

impl PlanSidecar {
    pub fn new(net: &LabeledNetwork, plan: &RewiringPlan, strategy: &str, detector: &str, seed: u64) -> Self {
        let l = |v: NodeId| net.labels[v].clone();
        PlanSidecar {
            network: net.name.clone(),
            strategy: strategy.into(),
            detector: detector.into(),
            seed,
            genes: plan
                .genes()
                .iter()
                .map(|g| LabeledGene {
                    target: l(g.target),
                    delete: l(g.delete_peer),
                    add: l(g.add_peer),
                })
                .collect(),
        }
    }

    /// Translates the labelled genes back to dense ids of `net`.
    pub fn plan(&self, net: &LabeledNetwork) -> Result<RewiringPlan, IoError> {
        let id = |s: &String| net.id_of(s).ok_or_else(|| IoError::UnknownNode(s.clone()));
        self.genes
            .iter()
            .map(|g| Ok(RewiringGene::new(id(&g.target)?, id(&g.delete)?, id(&g.add)?)))
            .collect()
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<(), IoError> {
        write_file(path.as_ref(), &serde_json::to_string_pretty(self)?)
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self, IoError> {
        Ok(serde_json::from_str(&read_file(path.as_ref())?)?)
    }
}

/// Writes `<stem>.txt` (edge list of `g_adv`) and `<stem>.plan.json`.
pub fn export_adversarial(
    stem: impl AsRef<Path>,
    net: &LabeledNetwork,
    g_adv: &Graph,
    sidecar: &PlanSidecar,
) -> Result<(PathBuf, PathBuf), IoError> {
    let stem = stem.as_ref();
    let edges = stem.with_extension("txt");
    let json = stem.with_extension("plan.json");
    write_edgelist(&edges, g_adv, Some(&net.labels))?;
    sidecar.write(&json)?;
    Ok((edges, json))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn edgelist_path_graph() {
        let lg = parse_edgelist("0 1\n1 2\n").unwrap();
        assert_eq!(lg.graph, Graph::from_edges(3, [(0, 1), (1, 2)]).unwrap());
    }

    #[test]
    fn edgelist_comments_and_errors() {
        let lg = parse_edgelist("# header\n\na b\n b c \n").unwrap();
        assert_eq!(lg.labels, ["a", "b", "c"]);
        match parse_edgelist("a b\nlonely\n") {
            Err(IoError::Parse { line: 2, .. }) => {}
            other => panic!("{other:?}"),
        }
        match parse_edgelist("a b\nc c\n") {
            Err(IoError::Parse { line: 2, .. }) => {}
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn gml_values_become_truth() {
        let text = r#"
            Creator "test"
            graph [
              directed 0
              node [ id 10 label "x" value "l" ]
              node [ id 20 value "c" ]
              node [ id 30 value "l" ]
              edge [ source 10 target 20 weight 2.5 ]
              edge [ source 20 target 30 ]
            ]"#;
        let net = parse_gml(text).unwrap();
        assert_eq!(net.labels, ["10", "20", "30"]);
        assert_eq!(net.graph.edge_count(), 2);
        assert_eq!(net.ground_truth, Some(Partition::from_labels(&[0, 1, 0])));
    }

    #[test]
    fn gml_without_values_has_no_truth() {
        let net = parse_gml("graph [ node [ id 1 ] node [ id 2 ] edge [ source 1 target 2 ] ]").unwrap();
        assert!(net.ground_truth.is_none());
    }

    #[test]
    fn gml_errors() {
        assert!(parse_gml("graph [ node [ id 1 ] ").is_err());
        assert!(parse_gml("graph [ node [ id 1 ] edge [ source 1 target 1 ] ]").is_err());
        assert!(parse_gml("graph [ node [ id 1 ] edge [ source 1 target 9 ] ]").is_err());
        assert!(parse_gml("nothing 1").is_err());
    }

    #[test]
    fn karate_card() {
        let net = load_dataset(Dataset::Karate, None).unwrap();
        assert_eq!(net.graph.node_count(), 34);
        assert_eq!(net.graph.edge_count(), 78);
        assert_eq!(net.ground_truth.as_ref().unwrap().community_count(), 2);
        let hub = net.graph.nodes().max_by_key(|&v| net.graph.degree(v)).unwrap();
        assert_eq!(net.labels[hub], "34");
        assert_eq!(net.graph.degree(hub), 17);
        assert_eq!(net.graph.non_neighbors(hub).unwrap().len(), 16);
    }

    #[test]
    fn missing_external_dataset_is_reported() {
        let dir = tempfile::tempdir().unwrap();
        match load_dataset(Dataset::Dolphins, Some(dir.path())) {
            Err(IoError::Unavailable { .. }) => {}
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn external_dataset_card_checked() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("polbooks.txt"), "a b\nb c\n").unwrap();
        fs::write(dir.path().join("polbooks.labels"), "a n\nb c\nc l\n").unwrap();
        match load_dataset(Dataset::Polbooks, Some(dir.path())) {
            Err(IoError::CardMismatch { got_n: 3, got_m: 2, got_h: 3, .. }) => {}
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn sidecar_round_trip() {
        let net = load_dataset(Dataset::Karate, None).unwrap();
        let plan = RewiringPlan::new(vec![RewiringGene::new(0, 1, 9)]);
        let side = PlanSidecar::new(&net, &plan, "ra", "fn", 7);
        assert_eq!(side.genes[0].target, "1");
        let dir = tempfile::tempdir().unwrap();
        let g_adv = net.graph.apply_plan(&plan).unwrap();
        let (edges, json) = export_adversarial(dir.path().join("adv"), &net, &g_adv, &side).unwrap();
        let back = PlanSidecar::read(json).unwrap();
        assert_eq!(back, side);
        assert_eq!(back.plan(&net).unwrap(), plan);
        let reread = load_edgelist(edges).unwrap();
        assert_eq!(reread.graph.edge_count(), 78);
    }
}
