//! Dot-language and task-block parsing, plus the four textual graph wire
//! formats embedded in prompts and dataset records.
//!
//! The serialized strings are contractual: downstream files compare them
//! byte for byte, so every serializer here is deterministic (fixed key
//! order, fixed separators).

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::duration::{format_rational, parse_single_duration, DurationParseError};
use crate::plan::{Constraint, Node, Plan, PlanDag, PlanError, Step};
use crate::templates;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TextError {
    #[error("line {line}: cannot parse dot constraint {content:?}")]
    DotLine { line: usize, content: String },
    #[error("no task header line found (expected \"To <task>, here are the steps and the times needed for each step.\")")]
    MissingHeader,
    #[error("line {line}: cannot parse step line {content:?}")]
    BadStepLine { line: usize, content: String },
    #[error("line {line}: step line has no duration parenthetical")]
    MissingDuration { line: usize },
    #[error("line {line}: {source}")]
    BadDuration {
        line: usize,
        source: DurationParseError,
    },
    #[error("unrecognized constraint sentence {sentence:?}")]
    UnknownConstraint { sentence: String },
    #[error(transparent)]
    Plan(#[from] PlanError),
}

/// An ordered, duplicate-free list of `(before, after)` pairs as parsed
/// from dot-language text.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct DotEdgeList {
    edges: Vec<(u32, u32)>,
}

impl DotEdgeList {
    /// Keeps first occurrences, dropping duplicate pairs.
    pub fn from_pairs(pairs: impl IntoIterator<Item = (u32, u32)>) -> Self {
        let mut seen = BTreeSet::new();
        let mut edges = Vec::new();
        for pair in pairs {
            if seen.insert(pair) {
                edges.push(pair);
            }
        }
        DotEdgeList { edges }
    }

    pub fn edges(&self) -> &[(u32, u32)] {
        &self.edges
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn to_constraints(&self) -> BTreeSet<Constraint> {
        self.edges
            .iter()
            .map(|&(b, a)| Constraint::new(b, a))
            .collect()
    }
}

impl fmt::Display for DotEdgeList {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (before, after)) in self.edges.iter().enumerate() {
            if i > 0 {
                f.write_str("\n")?;
            }
            write!(f, "\"{before}\" -> \"{after}\"")?;
        }
        Ok(())
    }
}

/// Parses dot-language constraints: `"1" -> "2"`, `1 -> 2`, or
/// `step 1 -> step 2`, one or more per line (comma-separated), order
/// preserved and duplicates dropped.
pub fn parse_dot(text: &str) -> Result<DotEdgeList, TextError> {
    let mut pairs = Vec::new();
    for (line_idx, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        for item in line.split(',') {
            let item = item.trim();
            if item.is_empty() {
                continue;
            }
            let pair = parse_dot_item(item).ok_or_else(|| TextError::DotLine {
                line: line_idx + 1,
                content: line.trim().to_string(),
            })?;
            pairs.push(pair);
        }
    }
    Ok(DotEdgeList::from_pairs(pairs))
}

fn parse_dot_item(item: &str) -> Option<(u32, u32)> {
    let (left, right) = item.split_once("->")?;
    Some((parse_dot_endpoint(left)?, parse_dot_endpoint(right)?))
}

fn parse_dot_endpoint(text: &str) -> Option<u32> {
    let mut text = text.trim();
    if text.len() >= 2 && text.starts_with('"') && text.ends_with('"') {
        text = text[1..text.len() - 1].trim();
    }
    if let Some(rest) = text.strip_prefix("step ") {
        text = rest.trim();
    } else if let Some(rest) = text.strip_prefix("Step ") {
        text = rest.trim();
    }
    let index: u32 = text.parse().ok()?;
    (index > 0).then_some(index)
}

/// The four graph representations a task ships with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GraphFormat {
    AdjacencyList,
    EdgeList,
    AdjacencyMatrix,
    Csr,
}

impl GraphFormat {
    pub const ALL: [GraphFormat; 4] = [
        GraphFormat::AdjacencyList,
        GraphFormat::EdgeList,
        GraphFormat::AdjacencyMatrix,
        GraphFormat::Csr,
    ];

    /// Identifier used in CLI flags and JSONL fields.
    pub fn key(self) -> &'static str {
        match self {
            GraphFormat::AdjacencyList => "adjacency_list",
            GraphFormat::EdgeList => "edge_list",
            GraphFormat::AdjacencyMatrix => "adjacency_matrix",
            GraphFormat::Csr => "csr",
        }
    }

    /// Human phrase used inside prompts ("Here is the ... representation").
    pub fn phrase(self) -> &'static str {
        match self {
            GraphFormat::AdjacencyList => "adjacency list",
            GraphFormat::EdgeList => "edge list",
            GraphFormat::AdjacencyMatrix => "adjacency matrix",
            GraphFormat::Csr => "compressed sparse row",
        }
    }
}

impl fmt::Display for GraphFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

impl std::str::FromStr for GraphFormat {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "adjacency_list" => Ok(GraphFormat::AdjacencyList),
            "edge_list" => Ok(GraphFormat::EdgeList),
            "adjacency_matrix" => Ok(GraphFormat::AdjacencyMatrix),
            "csr" => Ok(GraphFormat::Csr),
            other => Err(format!("unknown graph format {other:?}")),
        }
    }
}

fn node_key(node: Node) -> String {
    match node {
        Node::Start => "START".to_string(),
        Node::End => "END".to_string(),
        Node::Step(i) => i.to_string(),
    }
}

/// Step keys ascending, then `END`, then `START`; successor lists sorted
/// ascending with `END` last. Byte-stable across calls.
pub fn serialize_adjacency_list(dag: &PlanDag) -> String {
    let mut keys: Vec<Node> = dag.step_indices().iter().map(|&i| Node::Step(i)).collect();
    keys.push(Node::End);
    keys.push(Node::Start);
    let entries: Vec<String> = keys
        .into_iter()
        .map(|node| {
            let mut succs: Vec<Node> = dag.successors(node).collect();
            succs.sort(); // Node's order puts steps ascending before End
            let list: Vec<String> = succs
                .into_iter()
                .map(|s| format!("'{}'", node_key(s)))
                .collect();
            format!("'{}': [{}]", node_key(node), list.join(", "))
        })
        .collect();
    format!("{{{}}}", entries.join(", "))
}

fn relabel(dag: &PlanDag, node: Node) -> u32 {
    match node {
        Node::Start => 0,
        Node::Step(i) => i,
        Node::End => dag.step_indices().last().copied().unwrap_or(0) + 1,
    }
}

/// `[[i, j, w], ...]` triples (or `[i, j]` pairs without weights),
/// sorted, with `START` relabeled to 0 and `END` to one past the
/// highest step. Weights are the source step's duration value in its
/// own unit; `START` edges weigh 0.
pub fn serialize_edge_list(dag: &PlanDag, with_weights: bool) -> String {
    let mut rows: Vec<(u32, u32, String)> = dag
        .edges()
        .into_iter()
        .map(|(from, to)| {
            (
                relabel(dag, from),
                relabel(dag, to),
                format_rational(&dag.native_weight(from)),
            )
        })
        .collect();
    rows.sort();
    let rows: Vec<String> = rows
        .into_iter()
        .map(|(i, j, w)| {
            if with_weights {
                format!("[{i}, {j}, {w}]")
            } else {
                format!("[{i}, {j}]")
            }
        })
        .collect();
    format!("[{}]", rows.join(", "))
}

/// 0/1 matrix with rows and columns in `[START, steps ascending, END]`
/// order, rendered as a bracketed list of bracketed rows.
pub fn serialize_adjacency_matrix(dag: &PlanDag) -> String {
    let nodes = dag.nodes();
    let position: BTreeMap<Node, usize> = nodes.iter().enumerate().map(|(i, &n)| (n, i)).collect();
    let n = nodes.len();
    let mut matrix = vec![vec![0u8; n]; n];
    for (from, to) in dag.edges() {
        matrix[position[&from]][position[&to]] = 1;
    }
    let rows: Vec<String> = matrix
        .into_iter()
        .map(|row| {
            let cells: Vec<String> = row.into_iter().map(|c| c.to_string()).collect();
            format!("[{}]", cells.join(", "))
        })
        .collect();
    format!("[{}]", rows.join(", "))
}

/// Compressed sparse row over the `[START, steps ascending, END]` node
/// order: three labeled arrays, one per line. Targets are positions in
/// that order; weights follow the edge-list convention.
pub fn serialize_csr(dag: &PlanDag) -> String {
    let nodes = dag.nodes();
    let position: BTreeMap<Node, usize> = nodes.iter().enumerate().map(|(i, &n)| (n, i)).collect();
    let mut offsets = vec![0usize];
    let mut targets = Vec::new();
    let mut weights = Vec::new();
    for &node in &nodes {
        let mut succs: Vec<usize> = dag.successors(node).map(|s| position[&s]).collect();
        succs.sort_unstable();
        for target in succs {
            targets.push(target.to_string());
            weights.push(format_rational(&dag.native_weight(node)));
        }
        offsets.push(targets.len());
    }
    let offsets: Vec<String> = offsets.into_iter().map(|o| o.to_string()).collect();
    format!(
        "offsets: [{}]\ntargets: [{}]\nweights: [{}]",
        offsets.join(", "),
        targets.join(", "),
        weights.join(", ")
    )
}

pub fn serialize_graph(dag: &PlanDag, format: GraphFormat) -> String {
    match format {
        GraphFormat::AdjacencyList => serialize_adjacency_list(dag),
        GraphFormat::EdgeList => serialize_edge_list(dag, true),
        GraphFormat::AdjacencyMatrix => serialize_adjacency_matrix(dag),
        GraphFormat::Csr => serialize_csr(dag),
    }
}

/// `{'1': '10 min', ...}` in ascending step order.
pub fn serialize_time_map(plan: &Plan) -> String {
    let entries: Vec<String> = plan
        .steps_ascending()
        .iter()
        .map(|step| format!("'{}': '{}'", step.index, step.duration))
        .collect();
    format!("{{{}}}", entries.join(", "))
}

pub(crate) const TASK_HEADER_SUFFIX: &str =
    ", here are the steps and the times needed for each step.";
pub(crate) const CONSTRAINTS_HEADER: &str =
    "These ordering constraints need to be obeyed when executing above steps";

/// Parses a rendered task block (the inverse of prompt rendering) back
/// into a [`Plan`]: header line, `Step k. <text> (<duration>)` lines,
/// then constraint sentences in any of the ten template phrasings,
/// economic or not. Trailing prompt content (question, graph sections)
/// is ignored.
pub fn parse_task_block(text: &str) -> Result<Plan, TextError> {
    let lines: Vec<&str> = text.lines().collect();
    let (header_idx, task) = lines
        .iter()
        .enumerate()
        .find_map(|(i, line)| {
            line.trim_end()
                .strip_prefix("To ")
                .and_then(|rest| rest.strip_suffix(TASK_HEADER_SUFFIX))
                .map(|task| (i, task.to_string()))
        })
        .ok_or(TextError::MissingHeader)?;

    let mut steps = Vec::new();
    let mut i = header_idx + 1;
    while i < lines.len() {
        let line = lines[i].trim_end();
        if !line.starts_with("Step ") {
            break;
        }
        steps.push(parse_step_line(line, i + 1)?);
        i += 1;
    }

    while i < lines.len() && lines[i].trim().is_empty() {
        i += 1;
    }

    let mut constraints = Vec::new();
    let has_header = i < lines.len()
        && lines[i]
            .trim_end()
            .strip_prefix(CONSTRAINTS_HEADER)
            .is_some_and(|rest| rest == ":" || rest == ".");
    if has_header {
        i += 1;
        while i < lines.len() {
            let line = lines[i].trim_end();
            if line.is_empty() || line.starts_with("Question:") || line.starts_with("Here is the") {
                break;
            }
            let (before, followers) =
                templates::parse_sentence(line).ok_or_else(|| TextError::UnknownConstraint {
                    sentence: line.to_string(),
                })?;
            for follower in followers {
                constraints.push(Constraint::new(before, follower));
            }
            i += 1;
        }
    }

    Ok(Plan::new(task, steps, constraints)?)
}

fn parse_step_line(line: &str, line_no: usize) -> Result<Step, TextError> {
    let bad = || TextError::BadStepLine {
        line: line_no,
        content: line.to_string(),
    };
    let rest = line.strip_prefix("Step ").ok_or_else(bad)?;
    let (index_text, rest) = rest.split_once(". ").ok_or_else(bad)?;
    let index: u32 = index_text.parse().map_err(|_| bad())?;
    if !rest.ends_with(')') {
        return Err(TextError::MissingDuration { line: line_no });
    }
    let open = rest
        .rfind(" (")
        .ok_or(TextError::MissingDuration { line: line_no })?;
    let text = &rest[..open];
    let duration_text = &rest[open + 2..rest.len() - 1];
    let duration =
        parse_single_duration(duration_text).map_err(|source| TextError::BadDuration {
            line: line_no,
            source,
        })?;
    Ok(Step::new(index, text, duration))
}
