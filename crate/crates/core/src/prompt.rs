//! Prompt rendering: six regimes, ten constraint templates, economic
//! compression, and embedded graph representations.
//!
//! Rendering is byte-deterministic. The blank-line layout differs between
//! a target task block and a worked exemplar (exemplars use single blank
//! lines after their constraint section), and the build-a-graph target
//! ends its constraints header with a period rather than a colon; both
//! are part of the frozen wire format and pinned by golden tests.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::plan::{build_dag, Constraint, Plan, PlanError};
use crate::scheduler::optimal_makespan;
use crate::templates;
use crate::textio::{
    serialize_graph, serialize_time_map, GraphFormat, CONSTRAINTS_HEADER, TASK_HEADER_SUFFIX,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RenderError {
    #[error("template id {0} is out of range 1..=10")]
    TemplateOutOfRange(u8),
    #[error("graph-embedded regimes need a graph format")]
    MissingGraphFormat,
    #[error("bad exemplar {task:?}: {reason}")]
    BadExemplar { task: String, reason: String },
    #[error(transparent)]
    Plan(#[from] PlanError),
}

/// Selects one of the ten constraint phrasings (1-based).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub struct TemplateId(u8);

impl TemplateId {
    /// "Must precede", the phrasing used in worked exemplars.
    pub const MUST_PRECEDE: TemplateId = TemplateId(2);

    pub fn new(id: u8) -> Result<Self, RenderError> {
        if (1..=templates::TEMPLATE_COUNT as u8).contains(&id) {
            Ok(TemplateId(id))
        } else {
            Err(RenderError::TemplateOutOfRange(id))
        }
    }

    pub fn get(self) -> u8 {
        self.0
    }

    pub fn all() -> impl Iterator<Item = TemplateId> {
        (1..=templates::TEMPLATE_COUNT as u8).map(TemplateId)
    }
}

impl TryFrom<u8> for TemplateId {
    type Error = RenderError;
    fn try_from(id: u8) -> Result<Self, RenderError> {
        TemplateId::new(id)
    }
}

impl From<TemplateId> for u8 {
    fn from(id: TemplateId) -> u8 {
        id.0
    }
}

impl fmt::Display for TemplateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// The six prompting regimes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    ZeroShot,
    ZeroShotCot,
    KShot,
    KShotCot,
    PlagExplicit,
    PlagBag,
}

impl Regime {
    pub const ALL: [Regime; 6] = [
        Regime::ZeroShot,
        Regime::ZeroShotCot,
        Regime::KShot,
        Regime::KShotCot,
        Regime::PlagExplicit,
        Regime::PlagBag,
    ];

    pub fn key(self) -> &'static str {
        match self {
            Regime::ZeroShot => "zero_shot",
            Regime::ZeroShotCot => "zero_shot_cot",
            Regime::KShot => "k_shot",
            Regime::KShotCot => "k_shot_cot",
            Regime::PlagExplicit => "plag_explicit",
            Regime::PlagBag => "plag_bag",
        }
    }

    /// Regimes that prepend worked exemplars.
    pub fn uses_exemplars(self) -> bool {
        !matches!(self, Regime::ZeroShot | Regime::ZeroShotCot)
    }

    /// Regimes that embed or elicit a graph representation.
    pub fn needs_graph_format(self) -> bool {
        matches!(self, Regime::PlagExplicit | Regime::PlagBag)
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

impl std::str::FromStr for Regime {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Regime::ALL
            .into_iter()
            .find(|r| r.key() == s)
            .ok_or_else(|| format!("unknown regime {s:?}"))
    }
}

/// One worked exemplar: a plan plus its answer text in each variant.
/// `bag_tail` is the reasoning that follows the generated graph in the
/// build-a-graph answer; the graph itself is rendered from the plan.
#[derive(Debug, Clone)]
pub struct Exemplar {
    plan: Plan,
    direct_answer: String,
    cot_answer: String,
    bag_tail: String,
}

impl Exemplar {
    pub fn new(
        plan: Plan,
        direct_answer: impl Into<String>,
        cot_answer: impl Into<String>,
        bag_tail: impl Into<String>,
    ) -> Result<Self, RenderError> {
        let exemplar = Exemplar {
            plan,
            direct_answer: direct_answer.into(),
            cot_answer: cot_answer.into(),
            bag_tail: bag_tail.into(),
        };
        exemplar.validate()?;
        Ok(exemplar)
    }

    pub fn plan(&self) -> &Plan {
        &self.plan
    }

    fn validate(&self) -> Result<(), RenderError> {
        let gold = optimal_makespan(&build_dag(&self.plan));
        let suffix = format!(
            "\"{}\".",
            gold.format(crate::duration::FormatStyle::LargestUnit)
        );
        for (name, answer) in [
            ("direct", &self.direct_answer),
            ("cot", &self.cot_answer),
            ("bag_tail", &self.bag_tail),
        ] {
            if !answer.ends_with(&suffix) {
                return Err(RenderError::BadExemplar {
                    task: self.plan.task().to_string(),
                    reason: format!("{name} answer does not end with the quoted gold {suffix}"),
                });
            }
        }
        Ok(())
    }
}

#[derive(serde::Deserialize)]
struct ExemplarFile {
    plan: Plan,
    answers: ExemplarAnswers,
}

#[derive(serde::Deserialize)]
struct ExemplarAnswers {
    direct: String,
    cot: String,
    bag_tail: String,
}

/// The worked exemplars prepended by k-shot regimes (k = bank size).
#[derive(Debug, Clone)]
pub struct ExemplarBank {
    exemplars: Vec<Exemplar>,
}

impl ExemplarBank {
    pub fn new(exemplars: Vec<Exemplar>) -> Result<Self, RenderError> {
        if exemplars.is_empty() {
            return Err(RenderError::BadExemplar {
                task: String::new(),
                reason: "exemplar bank is empty".to_string(),
            });
        }
        Ok(ExemplarBank { exemplars })
    }

    /// The default three-exemplar bank shipped with the crate.
    pub fn builtin() -> ExemplarBank {
        let files = [
            include_str!("../data/exemplars/calzones.json"),
            include_str!("../data/exemplars/garden.json"),
            include_str!("../data/exemplars/story.json"),
        ];
        let exemplars = files
            .iter()
            .map(|text| {
                let file: ExemplarFile =
                    serde_json::from_str(text).expect("bundled exemplar must parse");
                Exemplar::new(
                    file.plan,
                    file.answers.direct,
                    file.answers.cot,
                    file.answers.bag_tail,
                )
                .expect("bundled exemplar must validate")
            })
            .collect();
        ExemplarBank { exemplars }
    }

    pub fn exemplars(&self) -> &[Exemplar] {
        &self.exemplars
    }

    pub fn k(&self) -> usize {
        self.exemplars.len()
    }
}

/// Options for [`render_prompt`].
#[derive(Debug, Clone)]
pub struct RenderOptions {
    pub id: Option<String>,
    pub template: TemplateId,
    pub economic: bool,
    pub graph_format: Option<GraphFormat>,
    pub exemplars: Option<ExemplarBank>,
}

impl Default for RenderOptions {
    fn default() -> Self {
        RenderOptions {
            id: None,
            template: TemplateId::MUST_PRECEDE,
            economic: false,
            graph_format: None,
            exemplars: None,
        }
    }
}

/// A rendered prompt with the options that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct RenderedPrompt {
    pub id: String,
    pub regime: Regime,
    pub template: TemplateId,
    pub economic: bool,
    pub graph_format: Option<GraphFormat>,
    pub text: String,
}

/// Renders one sentence per constraint; with `economic` on, edges sharing
/// a preceding step merge into one sentence listing the followers
/// ascending ("Step 1 must precede step 2 and 3.").
pub fn render_constraints(
    constraints: &BTreeSet<Constraint>,
    template: TemplateId,
    economic: bool,
) -> Vec<String> {
    let index = (template.get() - 1) as usize;
    if economic {
        let mut groups: BTreeMap<u32, Vec<u32>> = BTreeMap::new();
        for c in constraints {
            groups.entry(c.before).or_default().push(c.after);
        }
        groups
            .into_iter()
            .map(|(before, followers)| templates::sentence(index, before, &followers))
            .collect()
    } else {
        constraints
            .iter()
            .map(|c| templates::sentence(index, c.before, &[c.after]))
            .collect()
    }
}

#[derive(Clone, Copy, PartialEq)]
enum QuestionKind {
    Direct,
    Cot,
    Bag,
}

fn question(task: &str, kind: QuestionKind) -> String {
    let ask = match kind {
        QuestionKind::Direct => "Answer the time in double quotes.",
        QuestionKind::Cot => "Let's think step by step and then answer the time in double quotes.",
        QuestionKind::Bag => {
            "Let's construct a graph with the nodes and edges first to represent step ordering \
             constraints, and also construct a dictionary to represent time needed for each step. \
             Use the graph and dictionary to calculate the shortest possible time needed for the \
             task. Let's think step by step and then answer the time in double quotes."
        }
    };
    format!(
        "Question: Assume that you need to execute all the steps to complete the task and that \
         infinite resources are available. What is the shortest possible time to {task}? {ask}"
    )
}

fn steps_block(plan: &Plan) -> String {
    let mut lines = vec![format!("To {}{}", plan.task(), TASK_HEADER_SUFFIX)];
    for step in plan.steps_ascending() {
        lines.push(format!(
            "Step {}. {} ({})",
            step.index, step.text, step.duration
        ));
    }
    lines.join("\n")
}

fn graph_block(plan: &Plan, format: GraphFormat) -> String {
    let dag = build_dag(&plan.reduced());
    format!(
        "Here is the {} representation of the step ordering constraints:\n{}\nTime for each step can be represented as a dictionary:\n{}",
        format.phrase(),
        serialize_graph(&dag, format),
        serialize_time_map(plan)
    )
}

struct BlockLayout {
    question_kind: QuestionKind,
    with_graph: bool,
    /// The build-a-graph target header ends with "." instead of ":".
    header_period: bool,
    /// Exemplars separate trailing sections with one blank line, targets
    /// with two.
    section_sep: &'static str,
    answer: Option<String>,
}

fn render_block(
    plan: &Plan,
    template: TemplateId,
    economic: bool,
    format: Option<GraphFormat>,
    layout: &BlockLayout,
) -> String {
    let reduced = plan.reduced();
    let sentences = render_constraints(reduced.constraints(), template, economic);
    let mut text = steps_block(plan);
    text.push_str("\n\n\n");
    if !sentences.is_empty() {
        text.push_str(CONSTRAINTS_HEADER);
        text.push(if layout.header_period { '.' } else { ':' });
        text.push('\n');
        text.push_str(&sentences.join("\n"));
        text.push_str(layout.section_sep);
    }
    if layout.with_graph {
        let format = format.expect("graph block requires a format");
        text.push_str(&graph_block(plan, format));
        text.push_str(layout.section_sep);
    }
    text.push_str(&question(plan.task(), layout.question_kind));
    text.push_str("\nAnswer:");
    if let Some(answer) = &layout.answer {
        text.push(' ');
        text.push_str(answer);
    }
    text
}

fn exemplar_answer(exemplar: &Exemplar, regime: Regime, format: Option<GraphFormat>) -> String {
    match regime {
        Regime::KShot => exemplar.direct_answer.clone(),
        Regime::KShotCot | Regime::PlagExplicit => exemplar.cot_answer.clone(),
        Regime::PlagBag => {
            let format = format.expect("build-a-graph exemplars need a format");
            format!(
                "Here is the {} representation of the step ordering constraints:\n{}\nTime for each step can be represented as a dictionary:\n{}\n{}",
                format.phrase(),
                serialize_graph(&build_dag(&exemplar.plan.reduced()), format),
                serialize_time_map(&exemplar.plan),
                exemplar.bag_tail
            )
        }
        Regime::ZeroShot | Regime::ZeroShotCot => unreachable!("zero-shot has no exemplars"),
    }
}

/// Renders the full prompt for a plan under the given regime.
pub fn render_prompt(
    plan: &Plan,
    regime: Regime,
    opts: &RenderOptions,
) -> Result<RenderedPrompt, RenderError> {
    if regime.needs_graph_format() && opts.graph_format.is_none() {
        return Err(RenderError::MissingGraphFormat);
    }
    let target_layout = BlockLayout {
        question_kind: match regime {
            Regime::ZeroShot | Regime::KShot => QuestionKind::Direct,
            Regime::ZeroShotCot | Regime::KShotCot | Regime::PlagExplicit => QuestionKind::Cot,
            Regime::PlagBag => QuestionKind::Bag,
        },
        with_graph: regime == Regime::PlagExplicit,
        header_period: regime == Regime::PlagBag,
        section_sep: "\n\n\n",
        answer: None,
    };
    let target = render_block(
        plan,
        opts.template,
        opts.economic,
        opts.graph_format,
        &target_layout,
    );

    let text = if regime.uses_exemplars() {
        let builtin;
        let bank = match &opts.exemplars {
            Some(bank) => bank,
            None => {
                builtin = ExemplarBank::builtin();
                &builtin
            }
        };
        let blocks: Vec<String> = bank
            .exemplars()
            .iter()
            .map(|exemplar| {
                let layout = BlockLayout {
                    question_kind: if regime == Regime::PlagBag {
                        QuestionKind::Bag
                    } else {
                        QuestionKind::Direct
                    },
                    with_graph: regime == Regime::PlagExplicit,
                    header_period: false,
                    section_sep: "\n\n",
                    answer: Some(exemplar_answer(exemplar, regime, opts.graph_format)),
                };
                // Exemplar surface is fixed: "must precede" phrasing,
                // one sentence per edge.
                render_block(
                    &exemplar.plan,
                    TemplateId::MUST_PRECEDE,
                    false,
                    opts.graph_format,
                    &layout,
                )
            })
            .collect();
        format!("###Examples:\n{}\n###\n{}", blocks.join("\n"), target)
    } else {
        target
    };

    Ok(RenderedPrompt {
        id: opts.id.clone().unwrap_or_default(),
        regime,
        template: opts.template,
        economic: opts.economic,
        graph_format: opts.graph_format,
        text,
    })
}

/// The pure longest-path question for a 0-based weighted DAG, used by
/// the prototypical benchmark.
pub fn render_prototypical_prompt(node_count: usize, edges: &[(u32, u32, u64)]) -> String {
    let nodes: Vec<String> = (0..node_count).map(|n| n.to_string()).collect();
    let rows: Vec<String> = edges
        .iter()
        .map(|(i, j, w)| format!("[{i}, {j}, {w}]"))
        .collect();
    format!(
        "The following lists of nodes [{}] and edges [{}] define a directed acyclic graph. Each \
         element in the list of edges is expressed in the form (i,j,w), and specifies that node i \
         connects to node j with weight w. What is the length of the longest path from node 0 to \
         node {}? Think step by step and then reply with the numerical value of the shortest path \
         enclosed by <result><result> tags.\nAnswer:",
        nodes.join(", "),
        rows.join(", "),
        node_count - 1
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::{calzones, video_game};

    fn constraint_set(pairs: &[(u32, u32)]) -> BTreeSet<Constraint> {
        pairs.iter().map(|&(b, a)| Constraint::new(b, a)).collect()
    }

    #[test]
    fn template_id_range() {
        assert!(TemplateId::new(0).is_err());
        assert!(TemplateId::new(11).is_err());
        assert_eq!(TemplateId::new(10).unwrap().get(), 10);
    }

    #[test]
    fn economic_merges_shared_preceding_steps() {
        let edges = constraint_set(&[(1, 2), (1, 3)]);
        assert_eq!(
            render_constraints(&edges, TemplateId::MUST_PRECEDE, true),
            vec!["Step 1 must precede step 2 and 3."]
        );
        assert_eq!(
            render_constraints(&edges, TemplateId::MUST_PRECEDE, false),
            vec!["Step 1 must precede step 2.", "Step 1 must precede step 3."]
        );
        assert!(
            render_constraints(&constraint_set(&[]), TemplateId::MUST_PRECEDE, true).is_empty()
        );
    }

    #[test]
    fn builtin_bank_has_three_valid_exemplars() {
        let bank = ExemplarBank::builtin();
        assert_eq!(bank.k(), 3);
        assert_eq!(bank.exemplars()[0].plan(), &calzones());
    }

    #[test]
    fn exemplar_answers_must_quote_the_gold() {
        let err = Exemplar::new(
            calzones(),
            "The shortest possible time is \"54 min\".",
            "reasoning \"55 min\".",
            "reasoning \"55 min\".",
        )
        .unwrap_err();
        assert!(matches!(err, RenderError::BadExemplar { .. }));
    }

    #[test]
    fn zero_shot_prompt_layout() {
        let prompt = render_prompt(&video_game(), Regime::ZeroShot, &RenderOptions::default())
            .unwrap()
            .text;
        assert!(prompt.starts_with(
            "To create a video game, here are the steps and the times needed for each step.\nStep 1. Learn the basics of programming (180 days)\n"
        ));
        assert!(prompt.contains(
            "Step 5. Test the game (30 days)\n\n\nThese ordering constraints need to be obeyed when executing above steps:\nStep 1 must precede step 2.\n"
        ));
        assert!(prompt.contains(
            "Step 4 must precede step 5.\n\n\nQuestion: Assume that you need to execute all the steps to complete the task and that infinite resources are available. What is the shortest possible time to create a video game? Answer the time in double quotes.\nAnswer:"
        ));
        assert!(prompt.ends_with("Answer:"));
    }

    #[test]
    fn every_regime_ends_with_answer_and_asks_the_question() {
        let opts = RenderOptions {
            graph_format: Some(GraphFormat::AdjacencyList),
            ..RenderOptions::default()
        };
        for regime in Regime::ALL {
            let prompt = render_prompt(&video_game(), regime, &opts).unwrap().text;
            assert!(
                prompt.ends_with("Answer:"),
                "{regime} must end with Answer:"
            );
            assert!(
                prompt.contains("shortest possible time to"),
                "{regime} must ask the question"
            );
        }
    }

    #[test]
    fn plag_regimes_require_a_graph_format() {
        for regime in [Regime::PlagExplicit, Regime::PlagBag] {
            let err = render_prompt(&video_game(), regime, &RenderOptions::default()).unwrap_err();
            assert_eq!(err, RenderError::MissingGraphFormat);
        }
    }

    #[test]
    fn k_shot_embeds_the_calzones_exemplar_answer() {
        let prompt = render_prompt(&video_game(), Regime::KShot, &RenderOptions::default())
            .unwrap()
            .text;
        assert!(prompt.starts_with("###Examples:\nTo Make Calzones,"));
        assert!(
            prompt.contains("Answer: The shortest possible time to Make Calzones is \"55 min\".\n")
        );
        assert!(prompt.contains("\n###\nTo create a video game,"));
    }

    #[test]
    fn plag_explicit_embeds_graph_and_times() {
        let opts = RenderOptions {
            graph_format: Some(GraphFormat::AdjacencyList),
            ..RenderOptions::default()
        };
        let prompt = render_prompt(&video_game(), Regime::PlagExplicit, &opts)
            .unwrap()
            .text;
        assert!(prompt.contains(
            "Here is the adjacency list representation of the step ordering constraints:\n{'1': ['2', '3'], '2': ['4'], '3': ['4'], '4': ['5'], '5': ['END'], 'END': [], 'START': ['1']}\nTime for each step can be represented as a dictionary:\n{'1': '180 days', '2': '60 days', '3': '30 days', '4': '90 days', '5': '30 days'}"
        ));
    }

    #[test]
    fn bag_target_header_uses_a_period() {
        let opts = RenderOptions {
            graph_format: Some(GraphFormat::AdjacencyList),
            ..RenderOptions::default()
        };
        let prompt = render_prompt(&video_game(), Regime::PlagBag, &opts)
            .unwrap()
            .text;
        assert!(prompt.contains(
            "Step 5. Test the game (30 days)\n\n\nThese ordering constraints need to be obeyed when executing above steps.\nStep 1 must precede step 2."
        ));
        // The exemplar blocks keep the colon.
        assert!(prompt.contains("when executing above steps:\nStep 1 must precede step 5."));
        assert!(prompt.contains("Answer: Here is the adjacency list representation"));
        assert!(prompt.contains("the shortest possible time to make Calzones is \"55 min\"."));
    }

    #[test]
    fn rendering_is_deterministic() {
        let opts = RenderOptions {
            graph_format: Some(GraphFormat::Csr),
            ..RenderOptions::default()
        };
        let a = render_prompt(&calzones(), Regime::PlagExplicit, &opts).unwrap();
        let b = render_prompt(&calzones(), Regime::PlagExplicit, &opts).unwrap();
        assert_eq!(a.text, b.text);
    }

    #[test]
    fn prototypical_prompt_skeleton() {
        let prompt = render_prototypical_prompt(3, &[(0, 1, 1), (1, 2, 1)]);
        assert_eq!(
            prompt,
            "The following lists of nodes [0, 1, 2] and edges [[0, 1, 1], [1, 2, 1]] define a \
             directed acyclic graph. Each element in the list of edges is expressed in the form \
             (i,j,w), and specifies that node i connects to node j with weight w. What is the \
             length of the longest path from node 0 to node 2? Think step by step and then reply \
             with the numerical value of the shortest path enclosed by <result><result> tags.\nAnswer:"
        );
    }
}
