//! Plan and DAG data model: validation, transitive reduction, complexity
//! scoring, and series-parallel recognition.
//!
//! A [`Plan`] is the naturalistic unit of work: named steps with durations
//! plus ordering constraints. [`build_dag`] turns it into a weighted DAG
//! with auxiliary `START`/`END` nodes; the weight of edge `(i, j)` is the
//! duration of node `i`, and edges out of `START` weigh zero.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::duration::{Duration, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PlanError {
    #[error("a plan needs at least one step")]
    Empty,
    #[error("step index {0} appears more than once")]
    DuplicateStepIndex(u32),
    #[error("step indices are 1-based; 0 is not a valid index")]
    ZeroStepIndex,
    #[error("step {0} has a non-positive duration")]
    NonPositiveDuration(u32),
    #[error("constraint references unknown step index {0}")]
    UnknownStepIndex(u32),
    #[error("step {0} cannot precede itself")]
    SelfDependency(u32),
    #[error("ordering constraints contain a cycle: {}", format_cycle(.0))]
    Cycle(Vec<u32>),
}

fn format_cycle(cycle: &[u32]) -> String {
    cycle
        .iter()
        .map(|i| i.to_string())
        .collect::<Vec<_>>()
        .join(" -> ")
}

/// One step of a plan: 1-based index, free-form text, and a positive duration.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Step {
    pub index: u32,
    pub text: String,
    pub duration: Duration,
}

impl Step {
    pub fn new(index: u32, text: impl Into<String>, duration: Duration) -> Self {
        Step {
            index,
            text: text.into(),
            duration,
        }
    }
}

/// An ordering constraint: `before` must finish before `after` starts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Constraint {
    pub before: u32,
    pub after: u32,
}

impl Constraint {
    pub fn new(before: u32, after: u32) -> Self {
        Constraint { before, after }
    }
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} -> {}", self.before, self.after)
    }
}

/// A validated plan. Construction checks all invariants, so every `Plan`
/// in circulation has unique 1-based step indices, strictly positive
/// durations, and an acyclic constraint set over known steps.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
#[serde(into = "PlanRecord")]
pub struct Plan {
    task: String,
    steps: Vec<Step>,
    constraints: BTreeSet<Constraint>,
}

impl Plan {
    pub fn new(
        task: impl Into<String>,
        steps: Vec<Step>,
        constraints: impl IntoIterator<Item = Constraint>,
    ) -> Result<Self, PlanError> {
        if steps.is_empty() {
            return Err(PlanError::Empty);
        }
        let mut seen = BTreeSet::new();
        for step in &steps {
            if step.index == 0 {
                return Err(PlanError::ZeroStepIndex);
            }
            if !seen.insert(step.index) {
                return Err(PlanError::DuplicateStepIndex(step.index));
            }
            if step.duration.value() <= Rational::from_integer(0) {
                return Err(PlanError::NonPositiveDuration(step.index));
            }
        }
        let constraints: BTreeSet<Constraint> = constraints.into_iter().collect();
        for c in &constraints {
            if c.before == c.after {
                return Err(PlanError::SelfDependency(c.before));
            }
            for index in [c.before, c.after] {
                if !seen.contains(&index) {
                    return Err(PlanError::UnknownStepIndex(index));
                }
            }
        }
        if let Some(cycle) = find_cycle(&constraints) {
            return Err(PlanError::Cycle(cycle));
        }
        Ok(Plan {
            task: task.into(),
            steps,
            constraints,
        })
    }

    pub fn task(&self) -> &str {
        &self.task
    }

    pub fn steps(&self) -> &[Step] {
        &self.steps
    }

    pub fn constraints(&self) -> &BTreeSet<Constraint> {
        &self.constraints
    }

    pub fn step(&self, index: u32) -> Option<&Step> {
        self.steps.iter().find(|s| s.index == index)
    }

    /// Steps sorted by ascending index; the order used for rendering.
    pub fn steps_ascending(&self) -> Vec<&Step> {
        let mut sorted: Vec<&Step> = self.steps.iter().collect();
        sorted.sort_by_key(|s| s.index);
        sorted
    }

    /// Same plan with its constraint set transitively reduced.
    pub fn reduced(&self) -> Plan {
        let reduced = transitive_reduce(&self.constraints)
            .expect("a validated plan cannot have cyclic constraints");
        Plan {
            task: self.task.clone(),
            steps: self.steps.clone(),
            constraints: reduced,
        }
    }
}

impl<'de> serde::Deserialize<'de> for Plan {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let record = PlanRecord::deserialize(deserializer)?;
        Plan::try_from(record).map_err(serde::de::Error::custom)
    }
}

/// On-disk shape of a plan; see the README for the JSON schema.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
struct PlanRecord {
    task: String,
    steps: Vec<Step>,
    constraints: Vec<(u32, u32)>,
}

impl From<Plan> for PlanRecord {
    fn from(plan: Plan) -> Self {
        PlanRecord {
            task: plan.task,
            steps: plan.steps,
            constraints: plan
                .constraints
                .into_iter()
                .map(|c| (c.before, c.after))
                .collect(),
        }
    }
}

impl TryFrom<PlanRecord> for Plan {
    type Error = PlanError;
    fn try_from(record: PlanRecord) -> Result<Self, PlanError> {
        Plan::new(
            record.task,
            record.steps,
            record
                .constraints
                .into_iter()
                .map(|(b, a)| Constraint::new(b, a)),
        )
    }
}

/// A node of the plan DAG: a step index or one of the two sentinels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Node {
    Start,
    Step(u32),
    End,
}

impl fmt::Display for Node {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Node::Start => f.write_str("START"),
            Node::Step(i) => write!(f, "{i}"),
            Node::End => f.write_str("END"),
        }
    }
}

/// Weighted DAG over a plan's steps plus `START`/`END` sentinels.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanDag {
    steps: Vec<u32>,
    durations: BTreeMap<u32, Duration>,
    succ: BTreeMap<Node, BTreeSet<Node>>,
    pred: BTreeMap<Node, BTreeSet<Node>>,
}

impl PlanDag {
    pub fn step_indices(&self) -> &[u32] {
        &self.steps
    }

    pub fn node_count(&self) -> usize {
        self.steps.len() + 2
    }

    pub fn edge_count(&self) -> usize {
        self.succ.values().map(BTreeSet::len).sum()
    }

    /// All nodes in `START, steps ascending, END` order.
    pub fn nodes(&self) -> Vec<Node> {
        let mut nodes = Vec::with_capacity(self.node_count());
        nodes.push(Node::Start);
        nodes.extend(self.steps.iter().map(|&i| Node::Step(i)));
        nodes.push(Node::End);
        nodes
    }

    /// All edges, sorted by (source, target).
    pub fn edges(&self) -> Vec<(Node, Node)> {
        self.succ
            .iter()
            .flat_map(|(&from, tos)| tos.iter().map(move |&to| (from, to)))
            .collect()
    }

    pub fn successors(&self, node: Node) -> impl Iterator<Item = Node> + '_ {
        self.succ.get(&node).into_iter().flatten().copied()
    }

    pub fn predecessors(&self, node: Node) -> impl Iterator<Item = Node> + '_ {
        self.pred.get(&node).into_iter().flatten().copied()
    }

    pub fn duration_of(&self, step: u32) -> Option<&Duration> {
        self.durations.get(&step)
    }

    /// Weight carried by every edge leaving `node`, in canonical seconds.
    /// `START` weighs zero; `END` has no outgoing edges.
    pub fn weight_seconds(&self, node: Node) -> Rational {
        match node {
            Node::Step(i) => self.durations[&i].to_seconds().seconds(),
            Node::Start | Node::End => Rational::from_integer(0),
        }
    }

    /// The source node's duration value in its own unit; used by the
    /// textual graph serializations.
    pub fn native_weight(&self, node: Node) -> Rational {
        match node {
            Node::Step(i) => self.durations[&i].value(),
            Node::Start | Node::End => Rational::from_integer(0),
        }
    }

    /// Task complexity `|V| + |E|`, counting the sentinels and their edges.
    pub fn complexity(&self) -> usize {
        self.node_count() + self.edge_count()
    }

    /// `|V| + |E|` over steps and step-to-step edges only, for datasets
    /// that do not count the sentinels.
    pub fn complexity_excluding_sentinels(&self) -> usize {
        let step_edges = self
            .edges()
            .iter()
            .filter(|(a, b)| matches!(a, Node::Step(_)) && matches!(b, Node::Step(_)))
            .count();
        self.steps.len() + step_edges
    }

    /// Nodes in a deterministic topological order (smallest-ready-first).
    pub fn topo_order(&self) -> Vec<Node> {
        let mut indegree: BTreeMap<Node, usize> = self
            .nodes()
            .into_iter()
            .map(|n| (n, self.predecessors(n).count()))
            .collect();
        let mut ready: BTreeSet<Node> = indegree
            .iter()
            .filter(|(_, &d)| d == 0)
            .map(|(&n, _)| n)
            .collect();
        let mut order = Vec::with_capacity(self.node_count());
        while let Some(&node) = ready.iter().next() {
            ready.remove(&node);
            order.push(node);
            for next in self.successors(node) {
                let d = indegree.get_mut(&next).unwrap();
                *d -= 1;
                if *d == 0 {
                    ready.insert(next);
                }
            }
        }
        debug_assert_eq!(order.len(), self.node_count());
        order
    }
}

/// Builds the weighted DAG for a plan: `START` feeds every step with no
/// predecessor, every step with no successor feeds `END`.
pub fn build_dag(plan: &Plan) -> PlanDag {
    let mut steps: Vec<u32> = plan.steps().iter().map(|s| s.index).collect();
    steps.sort_unstable();
    let durations: BTreeMap<u32, Duration> = plan
        .steps()
        .iter()
        .map(|s| (s.index, s.duration.clone()))
        .collect();

    let mut succ: BTreeMap<Node, BTreeSet<Node>> = BTreeMap::new();
    let mut pred: BTreeMap<Node, BTreeSet<Node>> = BTreeMap::new();
    for node in std::iter::once(Node::Start)
        .chain(steps.iter().map(|&i| Node::Step(i)))
        .chain(std::iter::once(Node::End))
    {
        succ.insert(node, BTreeSet::new());
        pred.insert(node, BTreeSet::new());
    }
    let add_edge = |from: Node,
                    to: Node,
                    succ: &mut BTreeMap<Node, BTreeSet<Node>>,
                    pred: &mut BTreeMap<Node, BTreeSet<Node>>| {
        succ.get_mut(&from).unwrap().insert(to);
        pred.get_mut(&to).unwrap().insert(from);
    };
    for c in plan.constraints() {
        add_edge(
            Node::Step(c.before),
            Node::Step(c.after),
            &mut succ,
            &mut pred,
        );
    }
    for &i in &steps {
        if pred[&Node::Step(i)].is_empty() {
            add_edge(Node::Start, Node::Step(i), &mut succ, &mut pred);
        }
        if succ[&Node::Step(i)].is_empty() {
            add_edge(Node::Step(i), Node::End, &mut succ, &mut pred);
        }
    }
    PlanDag {
        steps,
        durations,
        succ,
        pred,
    }
}

/// Returns the unique minimal edge set with the same reachability.
///
/// An edge `(u, v)` is redundant exactly when some other path of length
/// two or more also leads from `u` to `v`. Edges are examined in
/// ascending `(before, after)` order; the result of reducing a DAG does
/// not depend on that order, it only makes processing deterministic.
pub fn transitive_reduce(edges: &BTreeSet<Constraint>) -> Result<BTreeSet<Constraint>, PlanError> {
    if let Some(cycle) = find_cycle(edges) {
        return Err(PlanError::Cycle(cycle));
    }
    let mut succ: BTreeMap<u32, BTreeSet<u32>> = BTreeMap::new();
    for c in edges {
        succ.entry(c.before).or_default().insert(c.after);
        succ.entry(c.after).or_default();
    }
    let reachable_avoiding_direct = |from: u32, to: u32| -> bool {
        let mut stack: Vec<u32> = succ[&from].iter().copied().filter(|&w| w != to).collect();
        let mut seen: BTreeSet<u32> = stack.iter().copied().collect();
        while let Some(node) = stack.pop() {
            if node == to {
                return true;
            }
            for &next in &succ[&node] {
                if seen.insert(next) {
                    stack.push(next);
                }
            }
        }
        false
    };
    let mut reduced = BTreeSet::new();
    for c in edges {
        if !reachable_avoiding_direct(c.before, c.after) {
            reduced.insert(*c);
        }
    }
    Ok(reduced)
}

/// True iff the two-terminal `START -> END` DAG collapses to a single
/// edge under exhaustive series and parallel reductions.
pub fn is_series_parallel(dag: &PlanDag) -> bool {
    // Multigraph edge multiset; series reductions can create parallel
    // duplicates that the next pass merges.
    let mut multi: BTreeMap<(Node, Node), usize> = BTreeMap::new();
    for edge in dag.edges() {
        *multi.entry(edge).or_insert(0) += 1;
    }
    loop {
        let mut changed = false;
        for count in multi.values_mut() {
            if *count > 1 {
                *count = 1;
                changed = true;
            }
        }
        let mut in_edges: BTreeMap<Node, Vec<(Node, Node)>> = BTreeMap::new();
        let mut out_edges: BTreeMap<Node, Vec<(Node, Node)>> = BTreeMap::new();
        for (&(from, to), &count) in &multi {
            for _ in 0..count {
                in_edges.entry(to).or_default().push((from, to));
                out_edges.entry(from).or_default().push((from, to));
            }
        }
        let candidate = multi.keys().flat_map(|&(a, b)| [a, b]).find(|node| {
            matches!(node, Node::Step(_))
                && in_edges.get(node).map_or(0, Vec::len) == 1
                && out_edges.get(node).map_or(0, Vec::len) == 1
        });
        if let Some(mid) = candidate {
            let (from, _) = in_edges[&mid][0];
            let (_, to) = out_edges[&mid][0];
            remove_one(&mut multi, (from, mid));
            remove_one(&mut multi, (mid, to));
            *multi.entry((from, to)).or_insert(0) += 1;
            changed = true;
        }
        if !changed {
            break;
        }
    }
    multi.len() == 1 && multi.get(&(Node::Start, Node::End)) == Some(&1)
}

fn remove_one(multi: &mut BTreeMap<(Node, Node), usize>, edge: (Node, Node)) {
    if let Some(count) = multi.get_mut(&edge) {
        *count -= 1;
        if *count == 0 {
            multi.remove(&edge);
        }
    }
}

/// Finds one directed cycle if any, as a step-index path `a -> ... -> a`.
fn find_cycle(edges: &BTreeSet<Constraint>) -> Option<Vec<u32>> {
    let mut succ: BTreeMap<u32, Vec<u32>> = BTreeMap::new();
    for c in edges {
        succ.entry(c.before).or_default().push(c.after);
        succ.entry(c.after).or_default();
    }
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        White,
        Grey,
        Black,
    }
    let mut marks: BTreeMap<u32, Mark> = succ.keys().map(|&n| (n, Mark::White)).collect();
    let nodes: Vec<u32> = succ.keys().copied().collect();

    fn visit(
        node: u32,
        succ: &BTreeMap<u32, Vec<u32>>,
        marks: &mut BTreeMap<u32, Mark>,
        stack: &mut Vec<u32>,
    ) -> Option<Vec<u32>> {
        marks.insert(node, Mark::Grey);
        stack.push(node);
        for &next in &succ[&node] {
            match marks[&next] {
                Mark::Grey => {
                    let pos = stack.iter().position(|&n| n == next).unwrap();
                    let mut cycle: Vec<u32> = stack[pos..].to_vec();
                    cycle.push(next);
                    return Some(cycle);
                }
                Mark::White => {
                    if let Some(cycle) = visit(next, succ, marks, stack) {
                        return Some(cycle);
                    }
                }
                Mark::Black => {}
            }
        }
        stack.pop();
        marks.insert(node, Mark::Black);
        None
    }

    let mut stack = Vec::new();
    for node in nodes {
        if marks[&node] == Mark::White {
            if let Some(cycle) = visit(node, &succ, &mut marks, &mut stack) {
                return Some(cycle);
            }
        }
    }
    None
}
