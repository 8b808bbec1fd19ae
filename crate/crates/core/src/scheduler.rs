//! Makespan solvers: longest path under infinite resources, exhaustive
//! path enumeration as an independent oracle, and finite-resource
//! scheduling on `k` identical agents (exact branch-and-bound plus list
//! scheduling and simulated annealing heuristics).
//!
//! Schedules are non-preemptive with zero inter-step gaps; the finite
//! problem is `P|prec|Cmax`.

use std::collections::BTreeMap;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::duration::{CanonicalDuration, Rational};
use crate::plan::{Node, PlanDag};

/// Node-count limit for exhaustive path enumeration.
pub const DEFAULT_PATH_NODE_BOUND: usize = 16;
/// Step-count limit for the exact finite-resource solver.
pub const DEFAULT_EXACT_STEP_BOUND: usize = 12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolveError {
    #[error("graph has {count} nodes, above the enumeration bound of {bound}")]
    TooManyNodes { count: usize, bound: usize },
    #[error("plan has {count} steps, above the exact-solver bound of {bound}")]
    TooManySteps { count: usize, bound: usize },
    #[error("at least one agent is required")]
    NoAgents,
    #[error("invalid annealing parameters: {0}")]
    InvalidParams(String),
}

/// Optimal makespan with infinite resources: the longest `START -> END`
/// path by edge weights, via topological-order dynamic programming.
pub fn optimal_makespan(dag: &PlanDag) -> CanonicalDuration {
    let mut dist: BTreeMap<Node, Rational> = BTreeMap::new();
    for node in dag.topo_order() {
        let best = dag
            .predecessors(node)
            .map(|p| dist[&p] + dag.weight_seconds(p))
            .max()
            .unwrap_or_else(|| Rational::from_integer(0));
        dist.insert(node, best);
    }
    CanonicalDuration::from_seconds(dist[&Node::End]).expect("path lengths are nonnegative")
}

/// One full `START -> END` path and its length.
#[derive(Debug, Clone, PartialEq)]
pub struct PathLength {
    pub nodes: Vec<Node>,
    pub length: CanonicalDuration,
}

/// Every `START -> END` path with its length. This is the exhaustive
/// oracle the dynamic program is checked against; it refuses graphs
/// above `bound` nodes.
pub fn enumerate_paths_bounded(dag: &PlanDag, bound: usize) -> Result<Vec<PathLength>, SolveError> {
    if dag.node_count() > bound {
        return Err(SolveError::TooManyNodes {
            count: dag.node_count(),
            bound,
        });
    }
    let mut paths = Vec::new();
    let mut current = vec![Node::Start];
    let mut length = Rational::from_integer(0);
    walk(dag, &mut current, &mut length, &mut paths);
    Ok(paths)
}

/// [`enumerate_paths_bounded`] with the default bound.
pub fn enumerate_paths(dag: &PlanDag) -> Result<Vec<PathLength>, SolveError> {
    enumerate_paths_bounded(dag, DEFAULT_PATH_NODE_BOUND)
}

fn walk(dag: &PlanDag, current: &mut Vec<Node>, length: &mut Rational, out: &mut Vec<PathLength>) {
    let node = *current.last().unwrap();
    if node == Node::End {
        out.push(PathLength {
            nodes: current.clone(),
            length: CanonicalDuration::from_seconds(*length).unwrap(),
        });
        return;
    }
    let weight = dag.weight_seconds(node);
    for next in dag.successors(node) {
        current.push(next);
        *length += weight;
        walk(dag, current, length, out);
        *length -= weight;
        current.pop();
    }
}

/// Assignment of one step to an agent at a start time (seconds).
#[derive(Debug, Clone, PartialEq)]
pub struct Assignment {
    pub step: u32,
    pub agent: usize,
    pub start: CanonicalDuration,
}

/// A non-preemptive schedule on identical agents.
#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    assignments: Vec<Assignment>,
    agents: usize,
    makespan: CanonicalDuration,
}

impl Schedule {
    fn new(mut assignments: Vec<Assignment>, agents: usize, dag: &PlanDag) -> Self {
        assignments.sort_by_key(|a| a.step);
        let makespan = assignments
            .iter()
            .map(|a| a.start.seconds() + dag.weight_seconds(Node::Step(a.step)))
            .max()
            .unwrap_or_else(|| Rational::from_integer(0));
        Schedule {
            assignments,
            agents,
            makespan: CanonicalDuration::from_seconds(makespan).unwrap(),
        }
    }

    pub fn assignments(&self) -> &[Assignment] {
        &self.assignments
    }

    pub fn agents(&self) -> usize {
        self.agents
    }

    pub fn makespan(&self) -> CanonicalDuration {
        self.makespan
    }

    pub fn start_of(&self, step: u32) -> Option<CanonicalDuration> {
        self.assignments
            .iter()
            .find(|a| a.step == step)
            .map(|a| a.start)
    }

    /// Checks the schedule invariants against its DAG: every step is
    /// placed exactly once, no agent runs two steps at once, no step
    /// starts before its predecessors finish, and the makespan equals
    /// the last finish time.
    pub fn verify(&self, dag: &PlanDag) -> Result<(), String> {
        let placed: BTreeMap<u32, &Assignment> =
            self.assignments.iter().map(|a| (a.step, a)).collect();
        if placed.len() != dag.step_indices().len()
            || !dag.step_indices().iter().all(|i| placed.contains_key(i))
        {
            return Err("schedule does not place every step exactly once".to_string());
        }
        let end_of = |step: u32| -> Rational {
            placed[&step].start.seconds() + dag.weight_seconds(Node::Step(step))
        };
        let mut by_agent: BTreeMap<usize, Vec<u32>> = BTreeMap::new();
        for a in &self.assignments {
            if a.agent >= self.agents {
                return Err(format!("step {} is on unknown agent {}", a.step, a.agent));
            }
            by_agent.entry(a.agent).or_default().push(a.step);
        }
        for (agent, mut steps) in by_agent {
            steps.sort_by_key(|&s| placed[&s].start.seconds());
            for pair in steps.windows(2) {
                if end_of(pair[0]) > placed[&pair[1]].start.seconds() {
                    return Err(format!(
                        "agent {agent} runs steps {} and {} at the same time",
                        pair[0], pair[1]
                    ));
                }
            }
        }
        for (&step, assignment) in &placed {
            for pred in dag.predecessors(Node::Step(step)) {
                if let Node::Step(p) = pred {
                    if end_of(p) > assignment.start.seconds() {
                        return Err(format!("step {step} starts before step {p} finishes"));
                    }
                }
            }
        }
        let last_end = dag
            .step_indices()
            .iter()
            .map(|&s| end_of(s))
            .max()
            .unwrap_or_else(|| Rational::from_integer(0));
        if last_end != self.makespan.seconds() {
            return Err("makespan does not equal the last finish time".to_string());
        }
        Ok(())
    }

    /// Read-only replay of the schedule as a chronological event stream
    /// (each step firing at its start and completing at its end).
    pub fn timeline(&self, dag: &PlanDag) -> Vec<TimelineEvent> {
        let mut events = Vec::with_capacity(self.assignments.len() * 2);
        for a in &self.assignments {
            let end = a.start.seconds() + dag.weight_seconds(Node::Step(a.step));
            events.push(TimelineEvent {
                time: a.start,
                step: a.step,
                kind: TimelineEventKind::Started { agent: a.agent },
            });
            events.push(TimelineEvent {
                time: CanonicalDuration::from_seconds(end).unwrap(),
                step: a.step,
                kind: TimelineEventKind::Finished,
            });
        }
        events.sort_by(|a, b| {
            (
                a.time,
                a.step,
                matches!(a.kind, TimelineEventKind::Started { .. }),
            )
                .cmp(&(
                    b.time,
                    b.step,
                    matches!(b.kind, TimelineEventKind::Started { .. }),
                ))
        });
        events
    }

    /// Plain-text Gantt view, one row per agent.
    pub fn render_gantt(&self, dag: &PlanDag) -> String {
        let mut rows: BTreeMap<usize, Vec<&Assignment>> = BTreeMap::new();
        for agent in 0..self.agents {
            rows.entry(agent).or_default();
        }
        for a in &self.assignments {
            rows.entry(a.agent).or_default().push(a);
        }
        let mut out = String::new();
        for (agent, mut list) in rows {
            list.sort_by_key(|a| a.start.seconds());
            let cells: Vec<String> = list
                .iter()
                .map(|a| {
                    let end = a.start.seconds() + dag.weight_seconds(Node::Step(a.step));
                    format!(
                        "step {} [{}s..{}s]",
                        a.step,
                        crate::duration::format_rational(&a.start.seconds()),
                        crate::duration::format_rational(&end)
                    )
                })
                .collect();
            out.push_str(&format!("agent {agent} | {}\n", cells.join("  ")));
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimelineEvent {
    pub time: CanonicalDuration,
    pub step: u32,
    pub kind: TimelineEventKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TimelineEventKind {
    Started { agent: usize },
    Finished,
}

/// Simulated-annealing knobs. Temperatures are on the same scale as the
/// makespan in seconds.
#[derive(Debug, Clone, PartialEq)]
pub struct AnnealParams {
    pub initial_temp: f64,
    pub cooling: f64,
    pub iterations: u32,
    pub seed: u64,
}

impl Default for AnnealParams {
    fn default() -> Self {
        AnnealParams {
            initial_temp: 600.0,
            cooling: 0.995,
            iterations: 2_000,
            seed: 0,
        }
    }
}

impl AnnealParams {
    fn validate(&self) -> Result<(), SolveError> {
        if !self.initial_temp.is_finite() || self.initial_temp <= 0.0 {
            return Err(SolveError::InvalidParams(
                "initial temperature must be positive".to_string(),
            ));
        }
        if !self.cooling.is_finite() || self.cooling <= 0.0 || self.cooling >= 1.0 {
            return Err(SolveError::InvalidParams(
                "cooling rate must lie strictly between 0 and 1".to_string(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum HeuristicMethod {
    ListSchedule,
    Anneal(AnnealParams),
}

struct StepTable {
    steps: Vec<u32>,
    durations: Vec<Rational>,
    preds: Vec<Vec<usize>>,
    succs: Vec<Vec<usize>>,
    /// Longest path from the step to END, including its own duration.
    tails: Vec<Rational>,
}

impl StepTable {
    fn build(dag: &PlanDag) -> StepTable {
        let steps: Vec<u32> = dag.step_indices().to_vec();
        let pos: BTreeMap<u32, usize> = steps.iter().enumerate().map(|(i, &s)| (s, i)).collect();
        let durations: Vec<Rational> = steps
            .iter()
            .map(|&s| dag.weight_seconds(Node::Step(s)))
            .collect();
        let mut preds = vec![Vec::new(); steps.len()];
        let mut succs = vec![Vec::new(); steps.len()];
        for (&step, &i) in &pos {
            for p in dag.predecessors(Node::Step(step)) {
                if let Node::Step(ps) = p {
                    preds[i].push(pos[&ps]);
                }
            }
            for s in dag.successors(Node::Step(step)) {
                if let Node::Step(ss) = s {
                    succs[i].push(pos[&ss]);
                }
            }
        }
        let mut tails = vec![Rational::from_integer(0); steps.len()];
        // Reverse topological order over steps.
        let order: Vec<usize> = dag
            .topo_order()
            .into_iter()
            .filter_map(|n| match n {
                Node::Step(s) => Some(pos[&s]),
                _ => None,
            })
            .collect();
        for &i in order.iter().rev() {
            let best_succ = succs[i]
                .iter()
                .map(|&j| tails[j])
                .max()
                .unwrap_or_else(|| Rational::from_integer(0));
            tails[i] = durations[i] + best_succ;
        }
        StepTable {
            steps,
            durations,
            preds,
            succs,
            tails,
        }
    }

    fn len(&self) -> usize {
        self.steps.len()
    }
}

/// Provably minimal makespan on `k` identical agents, by depth-first
/// branch-and-bound over semi-active schedules. The lower bound is the
/// larger of the remaining critical path and remaining work spread over
/// `k` agents; ties branch in ascending step order.
pub fn finite_makespan_exact(dag: &PlanDag, agents: usize) -> Result<Schedule, SolveError> {
    finite_makespan_exact_bounded(dag, agents, DEFAULT_EXACT_STEP_BOUND)
}

/// [`finite_makespan_exact`] with an explicit step-count bound.
pub fn finite_makespan_exact_bounded(
    dag: &PlanDag,
    agents: usize,
    bound: usize,
) -> Result<Schedule, SolveError> {
    if agents == 0 {
        return Err(SolveError::NoAgents);
    }
    let table = StepTable::build(dag);
    if table.len() > bound {
        return Err(SolveError::TooManySteps {
            count: table.len(),
            bound,
        });
    }
    let incumbent = list_schedule(dag, agents);
    let mut search = ExactSearch {
        table: &table,
        agents,
        best: incumbent.makespan().seconds(),
        best_assignments: incumbent
            .assignments()
            .iter()
            .map(|a| (a.step, a.agent, a.start.seconds()))
            .collect(),
        chosen: Vec::new(),
    };
    let n = table.len();
    let zero = Rational::from_integer(0);
    // Step indices are 1-based, so 0 works as the "no previous placement"
    // tie-break anchor.
    search.dfs(
        0,
        &mut vec![None; n],
        &mut vec![zero; agents],
        zero,
        zero,
        0,
    );
    let assignments = search
        .best_assignments
        .iter()
        .map(|&(step, agent, start)| Assignment {
            step,
            agent,
            start: CanonicalDuration::from_seconds(start).unwrap(),
        })
        .collect();
    Ok(Schedule::new(assignments, agents, dag))
}

struct ExactSearch<'a> {
    table: &'a StepTable,
    agents: usize,
    best: Rational,
    best_assignments: Vec<(u32, usize, Rational)>,
    chosen: Vec<(u32, usize, Rational)>,
}

impl ExactSearch<'_> {
    /// Chronological branching: each placement starts no earlier than the
    /// previous one, and placements sharing a start time are taken in
    /// ascending step order. Every semi-active schedule is enumerated
    /// exactly once, and semi-active schedules contain an optimum.
    fn dfs(
        &mut self,
        scheduled: u32,
        ends: &mut Vec<Option<Rational>>,
        avail: &mut Vec<Rational>,
        cur_max: Rational,
        last_start: Rational,
        last_step_at_start: u32,
    ) {
        let n = self.table.len();
        if scheduled as usize == n {
            if cur_max < self.best {
                self.best = cur_max;
                self.best_assignments = self.chosen.clone();
            }
            return;
        }
        if self.lower_bound(ends, avail, cur_max) >= self.best {
            return;
        }
        for i in 0..n {
            if ends[i].is_some() {
                continue;
            }
            if !self.table.preds[i].iter().all(|&p| ends[p].is_some()) {
                continue;
            }
            let ready = self.table.preds[i]
                .iter()
                .map(|&p| ends[p].unwrap())
                .max()
                .unwrap_or_else(|| Rational::from_integer(0));
            // Group agents by the start they would give this step and
            // keep the earliest-available one per distinct start; with
            // identical agents the others are symmetric.
            let mut starts: Vec<(Rational, usize)> = Vec::new();
            for (agent, &at) in avail.iter().enumerate() {
                let start = if at > ready { at } else { ready };
                if !starts.iter().any(|&(s, _)| s == start) {
                    starts.push((start, agent));
                }
            }
            starts.sort();
            for (start, agent) in starts {
                if start < last_start
                    || (start == last_start && self.table.steps[i] <= last_step_at_start)
                {
                    continue;
                }
                let end = start + self.table.durations[i];
                let new_max = if end > cur_max { end } else { cur_max };
                if new_max >= self.best {
                    continue;
                }
                let saved_avail = avail[agent];
                ends[i] = Some(end);
                avail[agent] = end;
                self.chosen.push((self.table.steps[i], agent, start));
                self.dfs(
                    scheduled + 1,
                    ends,
                    avail,
                    new_max,
                    start,
                    self.table.steps[i],
                );
                self.chosen.pop();
                avail[agent] = saved_avail;
                ends[i] = None;
            }
        }
    }

    fn lower_bound(
        &self,
        ends: &[Option<Rational>],
        avail: &[Rational],
        cur_max: Rational,
    ) -> Rational {
        let n = self.table.len();
        // Earliest conceivable start per unscheduled step, ignoring agent
        // contention; settled in dependency order.
        let mut est = vec![Rational::from_integer(0); n];
        let mut path_bound = cur_max;
        let mut settled = vec![false; n];
        loop {
            let mut progressed = false;
            for i in 0..n {
                if settled[i] {
                    continue;
                }
                if ends[i].is_some() {
                    settled[i] = true;
                    progressed = true;
                    continue;
                }
                if !self.table.preds[i]
                    .iter()
                    .all(|&p| settled[p] || ends[p].is_some())
                {
                    continue;
                }
                let mut ready = Rational::from_integer(0);
                for &p in &self.table.preds[i] {
                    let end = match ends[p] {
                        Some(e) => e,
                        None => est[p] + self.table.durations[p],
                    };
                    if end > ready {
                        ready = end;
                    }
                }
                est[i] = ready;
                settled[i] = true;
                progressed = true;
            }
            if !progressed {
                break;
            }
        }
        for i in 0..n {
            if ends[i].is_none() {
                let through = est[i] + self.table.tails[i];
                if through > path_bound {
                    path_bound = through;
                }
            }
        }
        let mut load = Rational::from_integer(0);
        for at in avail {
            load += *at;
        }
        for (end, duration) in ends.iter().zip(&self.table.durations) {
            if end.is_none() {
                load += *duration;
            }
        }
        let work_bound = load / Rational::from_integer(self.agents as i128);
        if work_bound > path_bound {
            work_bound
        } else {
            path_bound
        }
    }
}

/// Feasible (not necessarily optimal) schedule on `k` agents.
pub fn finite_makespan_heuristic(
    dag: &PlanDag,
    agents: usize,
    method: HeuristicMethod,
) -> Result<Schedule, SolveError> {
    if agents == 0 {
        return Err(SolveError::NoAgents);
    }
    match method {
        HeuristicMethod::ListSchedule => Ok(list_schedule(dag, agents)),
        HeuristicMethod::Anneal(params) => {
            params.validate()?;
            Ok(anneal(dag, agents, &params))
        }
    }
}

/// Graham list scheduling with longest-remaining-path priority (ties by
/// ascending step index). Non-delay: no agent idles while a step is ready.
fn list_schedule(dag: &PlanDag, agents: usize) -> Schedule {
    let table = StepTable::build(dag);
    let mut priority: Vec<usize> = (0..table.len()).collect();
    priority.sort_by(|&a, &b| {
        table.tails[b]
            .cmp(&table.tails[a])
            .then(table.steps[a].cmp(&table.steps[b]))
    });
    let rank: Vec<usize> = {
        let mut rank = vec![0; table.len()];
        for (r, &i) in priority.iter().enumerate() {
            rank[i] = r;
        }
        rank
    };
    decode_priority(dag, &table, agents, &rank)
}

/// Non-delay simulation: whenever an agent is free at the current time,
/// it takes the ready step with the best (lowest) rank.
fn decode_priority(dag: &PlanDag, table: &StepTable, agents: usize, rank: &[usize]) -> Schedule {
    let n = table.len();
    let zero = Rational::from_integer(0);
    let mut ends: Vec<Option<Rational>> = vec![None; n];
    let mut avail = vec![zero; agents];
    let mut assignments = Vec::with_capacity(n);
    let mut now = zero;
    let mut scheduled = 0usize;
    while scheduled < n {
        loop {
            let ready: Option<usize> = (0..n)
                .filter(|&i| {
                    ends[i].is_none()
                        && table.preds[i].iter().all(|&p| match ends[p] {
                            Some(end) => end <= now,
                            None => false,
                        })
                })
                .min_by_key(|&i| rank[i]);
            let agent = (0..agents).find(|&a| avail[a] <= now);
            match (ready, agent) {
                (Some(step), Some(agent)) => {
                    let end = now + table.durations[step];
                    ends[step] = Some(end);
                    avail[agent] = end;
                    assignments.push(Assignment {
                        step: table.steps[step],
                        agent,
                        start: CanonicalDuration::from_seconds(now).unwrap(),
                    });
                    scheduled += 1;
                }
                _ => break,
            }
        }
        if scheduled == n {
            break;
        }
        // Advance to the next completion or agent-release event.
        let next = ends
            .iter()
            .flatten()
            .copied()
            .chain(avail.iter().copied())
            .filter(|&t| t > now)
            .min();
        match next {
            Some(t) => now = t,
            None => unreachable!("no future event while steps remain"),
        }
    }
    Schedule::new(assignments, agents, dag)
}

/// Simulated annealing over topological orderings. A state is a priority
/// list; neighbors swap an adjacent pair when that keeps the list a valid
/// linear extension; acceptance follows the Metropolis rule. Fully
/// deterministic for a fixed seed.
fn anneal(dag: &PlanDag, agents: usize, params: &AnnealParams) -> Schedule {
    let table = StepTable::build(dag);
    let n = table.len();
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);

    // Start from the list-scheduling priority order (a linear extension,
    // since a predecessor's tail strictly exceeds its successor's).
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        table.tails[b]
            .cmp(&table.tails[a])
            .then(table.steps[a].cmp(&table.steps[b]))
    });

    let evaluate = |order: &[usize]| -> Schedule {
        let mut rank = vec![0usize; n];
        for (r, &i) in order.iter().enumerate() {
            rank[i] = r;
        }
        decode_priority(dag, &table, agents, &rank)
    };

    let mut current = evaluate(&order);
    let mut best = current.clone();
    let mut temperature = params.initial_temp;
    for _ in 0..params.iterations {
        if n >= 2 {
            let pos = rng.gen_range(0..n - 1);
            let direct_edge = table.succs[order[pos]].contains(&order[pos + 1]);
            if !direct_edge {
                order.swap(pos, pos + 1);
                let candidate = evaluate(&order);
                let delta = candidate.makespan().as_f64() - current.makespan().as_f64();
                let accept = delta <= 0.0 || rng.gen_bool((-delta / temperature).exp().min(1.0));
                if accept {
                    if candidate.makespan() < best.makespan() {
                        best = candidate.clone();
                    }
                    current = candidate;
                } else {
                    order.swap(pos, pos + 1);
                }
            }
        }
        temperature *= params.cooling;
    }
    best
}
