//! Command-line surface for the asyncplan toolkit: solve plans, generate
//! benchmark datasets, render prompts, grade completions, and compute
//! significance statistics.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 validation or parse failure,
//! 3 solver size bound exceeded.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Read;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use asyncplan::duration::{CanonicalDuration, FormatStyle};
use asyncplan::evalstats::{
    grade, holm_bonferroni, EvalRecord, GradeReport, HolmDecision, PairedOutcome,
};
use asyncplan::plan::{build_dag, Plan};
use asyncplan::prompt::{render_prompt, ExemplarBank, Regime, RenderOptions, TemplateId};
use asyncplan::scheduler::{
    finite_makespan_exact, finite_makespan_heuristic, optimal_makespan, AnnealParams,
    HeuristicMethod, Schedule, SolveError,
};
use asyncplan::synth::{
    assemble_dataset, generate_instance, generate_prototypical_at, prompt_row_id,
    prototypical_manifest, write_jsonl, Dataset, GenConfig, Instance, Manifest, PromptRow,
    PromptSpec, ProtoInstance,
};
use asyncplan::textio::{parse_task_block, GraphFormat};

const SEED_ENV: &str = "ASYNCPLAN_SEED";

#[derive(Parser)]
#[command(
    name = "asyncplan",
    version,
    about = "Asynchronous-plan toolkit: optimal makespans, benchmark synthesis, prompt rendering, grading"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the optimal makespan of one plan (JSON or task-block text).
    Solve(SolveArgs),
    /// Generate a benchmark dataset with gold labels and a manifest.
    Gen(GenArgs),
    /// Render prompts for a plan or a whole dataset.
    Render(RenderArgs),
    /// Join prompts with completions and grade them against gold.
    Grade(GradeArgs),
    /// Accuracy and McNemar/Holm significance over graded record sets.
    Stats(StatsArgs),
    /// Re-solve every dataset row and compare against its stored gold.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct SolveArgs {
    /// Plan file: JSON or a rendered task block ("-" reads stdin).
    input: String,
    /// Solve for k identical agents instead of infinite resources.
    #[arg(long)]
    agents: Option<usize>,
    /// Finite-resource method: exact, list, or anneal.
    #[arg(long, default_value = "exact")]
    method: String,
    /// Seed for the annealing method.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Print a Gantt view of the schedule.
    #[arg(long)]
    gantt: bool,
}

#[derive(Args)]
struct GenArgs {
    /// Output directory for dataset.jsonl + manifest.json.
    #[arg(long)]
    out: PathBuf,
    /// Number of instances.
    #[arg(long)]
    count: usize,
    /// Inclusive complexity range, e.g. 10..40.
    #[arg(long, default_value = "10..40")]
    complexity: String,
    /// Master seed (falls back to ASYNCPLAN_SEED).
    #[arg(long)]
    seed: Option<u64>,
    /// Generate prototypical longest-path instances instead of plans.
    #[arg(long)]
    prototypical: bool,
    /// Series-composition bias in [0, 1].
    #[arg(long, default_value_t = 0.5)]
    series_bias: f64,
    /// Worker threads for generation.
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Args)]
struct RenderArgs {
    /// Single plan file (JSON or task block); prints the prompt to stdout.
    #[arg(long, conflicts_with = "dataset")]
    plan: Option<String>,
    /// Dataset JSONL to render in batch (requires --out).
    #[arg(long, requires = "out")]
    dataset: Option<PathBuf>,
    /// Output JSONL path for batch rendering.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Prompting regime.
    #[arg(long)]
    regime: Regime,
    /// Constraint template 1..=10.
    #[arg(long, default_value_t = 2)]
    template: u8,
    /// Merge constraints sharing a preceding step into one sentence.
    #[arg(long)]
    economic: bool,
    /// Graph format for the graph-embedded regimes.
    #[arg(long)]
    graph: Option<GraphFormat>,
    /// Worker threads for batch rendering.
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Args)]
struct GradeArgs {
    /// Dataset JSONL carrying gold answers.
    #[arg(long)]
    dataset: PathBuf,
    /// Prompt batch JSONL produced by `render`.
    #[arg(long)]
    prompts: PathBuf,
    /// Completions JSONL: {"id", "completion"} per line.
    #[arg(long)]
    completions: PathBuf,
    /// Output records JSONL.
    #[arg(long)]
    out: PathBuf,
    /// Worker threads for grading.
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Args)]
struct StatsArgs {
    /// Graded record sets as LABEL=PATH (repeatable).
    #[arg(long = "records", required = true)]
    records: Vec<String>,
    /// Significance level for Holm-Bonferroni.
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// Drop instances that any system failed to answer (no extractable
    /// duration) from every system before scoring.
    #[arg(long)]
    exclude_invalid: bool,
    /// Optional JSON report path.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Dataset JSONL to re-solve.
    #[arg(long)]
    dataset: PathBuf,
}

/// Failure classified by exit code.
enum CliError {
    Io(String),
    Validation(String),
    Bound(String),
}

impl CliError {
    fn code(&self) -> ExitCode {
        match self {
            CliError::Io(_) => ExitCode::from(1),
            CliError::Validation(_) => ExitCode::from(2),
            CliError::Bound(_) => ExitCode::from(3),
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Io(m) | CliError::Validation(m) | CliError::Bound(m) => m,
        }
    }
}

impl From<SolveError> for CliError {
    fn from(err: SolveError) -> CliError {
        match err {
            SolveError::TooManyNodes { .. } | SolveError::TooManySteps { .. } => {
                CliError::Bound(err.to_string())
            }
            other => CliError::Validation(other.to_string()),
        }
    }
}

fn io_err(context: &str, err: impl std::fmt::Display) -> CliError {
    CliError::Io(format!("{context}: {err}"))
}

fn invalid(err: impl std::fmt::Display) -> CliError {
    CliError::Validation(err.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Solve(args) => run_solve(args),
        Command::Gen(args) => run_gen(args),
        Command::Render(args) => run_render(args),
        Command::Grade(args) => run_grade(args),
        Command::Stats(args) => run_stats(args),
        Command::Verify(args) => run_verify(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {}", err.message());
            err.code()
        }
    }
}

fn read_input(input: &str) -> Result<String, CliError> {
    if input == "-" {
        let mut text = String::new();
        std::io::stdin()
            .read_to_string(&mut text)
            .map_err(|e| io_err("reading stdin", e))?;
        Ok(text)
    } else {
        std::fs::read_to_string(input).map_err(|e| io_err(&format!("reading {input}"), e))
    }
}

/// Accepts either the canonical plan JSON or a rendered task block.
fn load_plan(input: &str) -> Result<Plan, CliError> {
    let text = read_input(input)?;
    if text.trim_start().starts_with('{') {
        serde_json::from_str(&text).map_err(invalid)
    } else {
        parse_task_block(&text).map_err(invalid)
    }
}

fn run_solve(args: SolveArgs) -> Result<(), CliError> {
    let plan = load_plan(&args.input)?;
    let dag = build_dag(&plan);
    let unlimited = optimal_makespan(&dag);

    let schedule: Option<Schedule> = match args.agents {
        None => None,
        Some(agents) => {
            let schedule = match args.method.as_str() {
                "exact" => finite_makespan_exact(&dag, agents)?,
                "list" => finite_makespan_heuristic(&dag, agents, HeuristicMethod::ListSchedule)?,
                "anneal" => finite_makespan_heuristic(
                    &dag,
                    agents,
                    HeuristicMethod::Anneal(AnnealParams {
                        seed: args.seed,
                        ..AnnealParams::default()
                    }),
                )?,
                other => return Err(invalid(format!("unknown method {other:?}"))),
            };
            Some(schedule)
        }
    };

    let makespan = schedule.as_ref().map_or(unlimited, |s| s.makespan());
    println!("\"{}\"", makespan.format(FormatStyle::LargestUnit));

    let mut report = serde_json::json!({
        "task": plan.task(),
        "complexity": dag.complexity(),
        "complexity_excluding_sentinels": dag.complexity_excluding_sentinels(),
        "makespan": makespan.format(FormatStyle::LargestUnit),
        "makespan_seconds": makespan.as_f64(),
    });
    if let Some(schedule) = &schedule {
        report["agents"] = serde_json::json!(schedule.agents());
        report["method"] = serde_json::json!(args.method);
        report["unlimited_makespan"] =
            serde_json::json!(unlimited.format(FormatStyle::LargestUnit));
        report["schedule"] = serde_json::json!(schedule
            .assignments()
            .iter()
            .map(|a| serde_json::json!({
                "step": a.step,
                "agent": a.agent,
                "start_seconds": a.start.as_f64(),
            }))
            .collect::<Vec<_>>());
    }
    println!("{report}");
    if args.gantt {
        if let Some(schedule) = &schedule {
            print!("{}", schedule.render_gantt(&dag));
        }
    }
    Ok(())
}

fn parse_complexity_range(text: &str) -> Result<(u32, u32), CliError> {
    let (lo, hi) = text.split_once("..").ok_or_else(|| {
        invalid(format!(
            "complexity range {text:?} is not of the form LO..HI"
        ))
    })?;
    let lo: u32 = lo.trim().parse().map_err(invalid)?;
    let hi: u32 = hi.trim().parse().map_err(invalid)?;
    Ok((lo, hi))
}

fn resolve_seed(flag: Option<u64>) -> Result<u64, CliError> {
    if let Some(seed) = flag {
        return Ok(seed);
    }
    match std::env::var(SEED_ENV) {
        Ok(value) => value
            .parse()
            .map_err(|_| invalid(format!("{SEED_ENV}={value:?} is not a number"))),
        Err(_) => Err(invalid(format!("gen needs --seed or {SEED_ENV}"))),
    }
}

fn in_pool<T: Send>(jobs: Option<usize>, work: impl FnOnce() -> T + Send) -> Result<T, CliError> {
    match jobs {
        None => Ok(work()),
        Some(jobs) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(jobs.max(1))
                .build()
                .map_err(|e| invalid(format!("cannot build thread pool: {e}")))?;
            Ok(pool.install(work))
        }
    }
}

fn run_gen(args: GenArgs) -> Result<(), CliError> {
    use rayon::prelude::*;

    let seed = resolve_seed(args.seed)?;
    let (lo, hi) = parse_complexity_range(&args.complexity)?;
    let config = GenConfig {
        complexity_lo: lo,
        complexity_hi: hi,
        series_bias: args.series_bias,
        ..GenConfig::default()
    };

    if args.prototypical {
        let instances: Vec<ProtoInstance> = in_pool(args.jobs, || {
            (0..args.count)
                .into_par_iter()
                .map(|index| generate_prototypical_at(seed, index, &config))
                .collect::<Result<_, _>>()
        })?
        .map_err(invalid)?;
        let manifest = prototypical_manifest(&instances, &config, seed);
        std::fs::create_dir_all(&args.out).map_err(|e| io_err("creating output dir", e))?;
        write_jsonl(&args.out.join("prototypical.jsonl"), &instances).map_err(invalid)?;
        write_manifest(&args.out, &manifest)?;
        println!(
            "wrote {} prototypical instances to {}",
            instances.len(),
            args.out.display()
        );
        return Ok(());
    }

    let instances: Vec<Instance> = in_pool(args.jobs, || {
        (0..args.count)
            .into_par_iter()
            .map(|index| generate_instance(seed, index, &config))
            .collect::<Result<_, _>>()
    })?
    .map_err(invalid)?;
    let dataset = Dataset::from_instances(instances, &config, seed).map_err(invalid)?;
    assemble_dataset(&args.out, &dataset, &[], None).map_err(|err| match err {
        asyncplan::synth::AssembleError::Io(e) => io_err("writing dataset", e),
        other => invalid(other),
    })?;
    println!(
        "wrote {} instances to {}",
        dataset.instances.len(),
        args.out.display()
    );
    Ok(())
}

fn write_manifest(dir: &Path, manifest: &Manifest) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(manifest).map_err(invalid)?;
    std::fs::write(dir.join("manifest.json"), text + "\n")
        .map_err(|e| io_err("writing manifest", e))
}

fn read_jsonl<T: serde::de::DeserializeOwned>(path: &Path) -> Result<Vec<T>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| io_err(&format!("reading {}", path.display()), e))?;
    text.lines()
        .enumerate()
        .filter(|(_, line)| !line.trim().is_empty())
        .map(|(i, line)| {
            serde_json::from_str(line)
                .map_err(|e| invalid(format!("{}:{}: {e}", path.display(), i + 1)))
        })
        .collect()
}

fn run_render(args: RenderArgs) -> Result<(), CliError> {
    use rayon::prelude::*;

    let template = TemplateId::new(args.template).map_err(invalid)?;
    let regime = args.regime;
    if regime.needs_graph_format() && args.graph.is_none() {
        return Err(invalid("graph-embedded regimes need --graph"));
    }

    if let Some(plan_path) = &args.plan {
        let plan = load_plan(plan_path)?;
        let opts = RenderOptions {
            template,
            economic: args.economic,
            graph_format: args.graph,
            ..RenderOptions::default()
        };
        let rendered = render_prompt(&plan, regime, &opts).map_err(invalid)?;
        println!("{}", rendered.text);
        return Ok(());
    }

    let dataset_path = args
        .dataset
        .as_ref()
        .ok_or_else(|| invalid("render needs --plan or --dataset"))?;
    let out = args
        .out
        .as_ref()
        .expect("clap enforces --out with --dataset");
    let instances: Vec<Instance> = read_jsonl(dataset_path)?;
    let spec = PromptSpec {
        regime,
        template,
        economic: args.economic,
        graph_format: args.graph,
    };
    let bank = ExemplarBank::builtin();
    let rows: Vec<PromptRow> = in_pool(args.jobs, || {
        instances
            .par_iter()
            .map(|instance| {
                let opts = RenderOptions {
                    id: Some(prompt_row_id(&instance.id, &spec)),
                    template,
                    economic: args.economic,
                    graph_format: args.graph,
                    exemplars: Some(bank.clone()),
                };
                render_prompt(&instance.plan, regime, &opts).map(|rendered| PromptRow {
                    id: rendered.id,
                    instance_id: instance.id.clone(),
                    regime,
                    template: template.get(),
                    economic: args.economic,
                    graph_format: args.graph,
                    prompt: rendered.text,
                })
            })
            .collect::<Result<_, _>>()
    })?
    .map_err(invalid)?;
    write_jsonl(out, &rows).map_err(invalid)?;
    println!("wrote {} prompts to {}", rows.len(), out.display());
    Ok(())
}

#[derive(serde::Deserialize)]
struct CompletionRow {
    id: String,
    completion: String,
}

fn run_grade(args: GradeArgs) -> Result<(), CliError> {
    use rayon::prelude::*;

    let instances: Vec<Instance> = read_jsonl(&args.dataset)?;
    let gold: BTreeMap<&str, (CanonicalDuration, usize)> = instances
        .iter()
        .map(|i| (i.id.as_str(), (i.gold, i.complexity)))
        .collect();
    let prompts: Vec<PromptRow> = read_jsonl(&args.prompts)?;
    let completions: Vec<CompletionRow> = read_jsonl(&args.completions)?;
    let by_id: BTreeMap<&str, &str> = completions
        .iter()
        .map(|c| (c.id.as_str(), c.completion.as_str()))
        .collect();

    let prompt_ids: BTreeSet<&str> = prompts.iter().map(|p| p.id.as_str()).collect();
    let missing: Vec<&str> = prompts
        .iter()
        .map(|p| p.id.as_str())
        .filter(|id| !by_id.contains_key(id))
        .collect();
    let orphans: Vec<&str> = by_id
        .keys()
        .filter(|id| !prompt_ids.contains(**id))
        .copied()
        .collect();
    if !missing.is_empty() || !orphans.is_empty() {
        return Err(invalid(format!(
            "prompt/completion id mismatch; missing completions: [{}]; completions without prompts: [{}]",
            preview(&missing),
            preview(&orphans)
        )));
    }

    let mut records: Vec<EvalRecord> = in_pool(args.jobs, || {
        prompts
            .par_iter()
            .map(|prompt| {
                let (gold, complexity) =
                    gold.get(prompt.instance_id.as_str()).ok_or_else(|| {
                        invalid(format!(
                            "prompt {} references unknown instance {}",
                            prompt.id, prompt.instance_id
                        ))
                    })?;
                Ok(EvalRecord::grade(
                    prompt.id.clone(),
                    prompt.instance_id.clone(),
                    *complexity,
                    *gold,
                    by_id[prompt.id.as_str()],
                ))
            })
            .collect::<Result<Vec<_>, CliError>>()
    })??;
    records.sort_by(|a, b| a.id.cmp(&b.id));
    write_jsonl(&args.out, &records).map_err(invalid)?;
    let report = grade(&records);
    println!(
        "graded {} records: accuracy {:.4} ({} correct)",
        report.total, report.accuracy, report.correct
    );
    Ok(())
}

fn preview(ids: &[&str]) -> String {
    const SHOW: usize = 8;
    let mut shown: Vec<String> = ids.iter().take(SHOW).map(|s| s.to_string()).collect();
    if ids.len() > SHOW {
        shown.push(format!("... {} more", ids.len() - SHOW));
    }
    shown.join(", ")
}

#[derive(serde::Serialize)]
struct SystemReport {
    label: String,
    report: GradeReport,
}

#[derive(serde::Serialize)]
struct PairReport {
    a: String,
    b: String,
    outcome: PairedOutcome,
    p: f64,
    p_adjusted: f64,
    significant: bool,
}

#[derive(serde::Serialize)]
struct StatsReport {
    alpha: f64,
    excluded_invalid: bool,
    systems: Vec<SystemReport>,
    pairs: Vec<PairReport>,
}

fn run_stats(args: StatsArgs) -> Result<(), CliError> {
    let mut systems: Vec<(String, Vec<EvalRecord>)> = Vec::new();
    for spec in &args.records {
        let (label, path) = spec
            .split_once('=')
            .ok_or_else(|| invalid(format!("--records wants LABEL=PATH, got {spec:?}")))?;
        let records: Vec<EvalRecord> = read_jsonl(Path::new(path))?;
        systems.push((label.to_string(), records));
    }

    if args.exclude_invalid {
        // Drop an instance everywhere if any system failed to answer it.
        let mut invalid_instances: BTreeSet<String> = BTreeSet::new();
        for (_, records) in &systems {
            for record in records {
                if record.extracted.is_none() {
                    invalid_instances.insert(record.instance_id.clone());
                }
            }
        }
        for (_, records) in &mut systems {
            records.retain(|r| !invalid_instances.contains(&r.instance_id));
        }
    }

    let reports: Vec<SystemReport> = systems
        .iter()
        .map(|(label, records)| SystemReport {
            label: label.clone(),
            report: grade(records),
        })
        .collect();

    let mut pair_inputs: Vec<(usize, usize, PairedOutcome)> = Vec::new();
    for a in 0..systems.len() {
        for b in (a + 1)..systems.len() {
            let outcome =
                PairedOutcome::from_records(&systems[a].1, &systems[b].1).map_err(invalid)?;
            pair_inputs.push((a, b, outcome));
        }
    }
    let p_values: Vec<f64> = pair_inputs.iter().map(|(_, _, o)| o.p_value()).collect();
    let decisions: Vec<HolmDecision> = if p_values.is_empty() {
        Vec::new()
    } else {
        holm_bonferroni(&p_values, args.alpha).map_err(invalid)?
    };
    let pairs: Vec<PairReport> = pair_inputs
        .iter()
        .zip(&decisions)
        .map(|(&(a, b, outcome), decision)| PairReport {
            a: systems[a].0.clone(),
            b: systems[b].0.clone(),
            outcome,
            p: decision.p,
            p_adjusted: decision.adjusted,
            significant: decision.reject,
        })
        .collect();

    println!("{:<24} {:>8} {:>10}", "setting", "n", "accuracy");
    for system in &reports {
        println!(
            "{:<24} {:>8} {:>10.4}",
            system.label, system.report.total, system.report.accuracy
        );
    }
    if !pairs.is_empty() {
        println!();
        println!(
            "pairwise McNemar with Holm-Bonferroni correction (alpha = {})",
            args.alpha
        );
        println!(
            "{:<24} {:>7} {:>7} {:>12} {:>12} {:>12}",
            "pair", "a_only", "b_only", "p", "p_adjusted", "significant"
        );
        for pair in &pairs {
            println!(
                "{:<24} {:>7} {:>7} {:>12.6} {:>12.6} {:>12}",
                format!("{} vs {}", pair.a, pair.b),
                pair.outcome.a_only,
                pair.outcome.b_only,
                pair.p,
                pair.p_adjusted,
                if pair.significant { "yes" } else { "no" }
            );
        }
    }

    if let Some(out) = &args.out {
        let report = StatsReport {
            alpha: args.alpha,
            excluded_invalid: args.exclude_invalid,
            systems: reports,
            pairs,
        };
        let text = serde_json::to_string_pretty(&report).map_err(invalid)?;
        std::fs::write(out, text + "\n").map_err(|e| io_err("writing report", e))?;
    }
    Ok(())
}

fn run_verify(args: VerifyArgs) -> Result<(), CliError> {
    let instances: Vec<Instance> = read_jsonl(&args.dataset)?;
    let mut failures = Vec::new();
    for instance in &instances {
        if let Err(reason) = instance.verify() {
            failures.push(reason);
        }
    }
    if failures.is_empty() {
        println!(
            "verified {} instances: all golds match the solver",
            instances.len()
        );
        Ok(())
    } else {
        for failure in &failures {
            eprintln!("{failure}");
        }
        Err(invalid(format!(
            "{} of {} instances failed",
            failures.len(),
            instances.len()
        )))
    }
}
