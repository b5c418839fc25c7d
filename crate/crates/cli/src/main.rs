//! `tasm`: assembly indices for strings.
//!
//! Subcommands compute the exact assembly index (`asi`), templated upper
//! bounds (`tai`), check plan certificates (`verify`), mine and score
//! template candidates (`mine`, `gain`), and re-run the built-in
//! reproduction table (`bench`).  Every value printed is backed by a
//! certificate that re-verifies before it is reported.
//!
//! Exit codes: 0 success, 1 invalid certificate or failed bench row,
//! 2 input error, 3 unproved result under `--require-proved`.

mod bench;
mod input;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use templated_assembly::certificate::{parse_plan, serialize_plan};
use templated_assembly::heuristics::{
    gain, greedy_heuristic_with, mine_templates, CostProxy, HeuristicOptions,
};
use templated_assembly::plan::PlanMode;
use templated_assembly::report::{CandidateReport, CertificateReport, SearchReport};
use templated_assembly::solver::{asi_exact, tai_search, Optimality, SearchConfig, SearchResult};
use templated_assembly::universe::AssemblyObject;

use input::Ingested;

/// Longest target the heuristic paths accept.  The exact searches have a
/// tighter, configurable cap (`--exact-cap`).
const HEURISTIC_CAP: usize = 256;

#[derive(Parser)]
#[command(
    name = "tasm",
    version,
    about = "Assembly indices for strings: exact search, certificates, template mining"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exact assembly index (concatenation only)
    Asi(AsiArgs),
    /// Templated assembly index: verified upper bound, exact within bounds
    Tai(TaiArgs),
    /// Check a plan certificate
    Verify(VerifyArgs),
    /// Mine template candidates and rank them by gain
    Mine(MineArgs),
    /// Score a skeleton with a filler family
    Gain(GainArgs),
    /// Run the built-in reproduction table
    Bench(bench::BenchArgs),
}

#[derive(Args)]
struct InputArgs {
    /// Target string
    target: Option<String>,
    /// Text file with one target per line (`#` starts a comment)
    #[arg(long, env = "TASM_FILE", conflicts_with = "target")]
    file: Option<PathBuf>,
    /// FASTA file; every record is one target
    #[arg(long, env = "TASM_FASTA", conflicts_with_all = ["target", "file"])]
    fasta: Option<PathBuf>,
}

impl InputArgs {
    fn load(&self) -> Result<Vec<Ingested>> {
        input::load(self.target.as_deref(), self.file.as_deref(), self.fasta.as_deref())
    }
}

#[derive(Args)]
struct OutputArgs {
    /// Write the JSON report to this path (`-` for standard output)
    #[arg(long, env = "TASM_JSON")]
    json: Option<PathBuf>,
    /// Write witness certificates here (numbered when there are several)
    #[arg(long, env = "TASM_EMIT_PLAN")]
    emit_plan: Option<PathBuf>,
}

#[derive(Args)]
struct SearchArgs {
    /// Worker threads for the exact canonical search
    #[arg(long, env = "TASM_JOBS", default_value_t = 1)]
    jobs: usize,
    /// Wall-clock budget per target, in seconds
    #[arg(long, env = "TASM_BUDGET")]
    budget: Option<f64>,
    /// Exit 3 unless every reported value is proved optimal
    #[arg(long, env = "TASM_REQUIRE_PROVED")]
    require_proved: bool,
    /// Longest target accepted by the exact searches
    #[arg(long, env = "TASM_EXACT_CAP", default_value_t = 64)]
    exact_cap: usize,
    /// Progress notes on standard error
    #[arg(long, env = "TASM_TRACE")]
    trace: bool,
}

impl SearchArgs {
    fn apply(&self, cfg: &mut SearchConfig) {
        cfg.parallelism = self.jobs.max(1);
        cfg.time_budget = self.budget.map(Duration::from_secs_f64);
    }
}

#[derive(Args)]
struct TemplateArgs {
    /// Most wildcards per admitted template
    #[arg(long, env = "TASM_MAX_STARS", default_value_t = 4)]
    max_stars: usize,
    /// Longest admitted template (default: the target length)
    #[arg(long, env = "TASM_MAX_TEMPLATE_LEN")]
    max_template_len: Option<usize>,
    /// Reject templates with adjacent wildcards
    #[arg(long, env = "TASM_NO_ADJACENT_STARS")]
    no_adjacent_stars: bool,
    /// Let instantiation fillers be templates as well as literals
    #[arg(long, env = "TASM_TEMPLATE_FILLERS")]
    template_fillers: bool,
}

impl TemplateArgs {
    fn apply(&self, cfg: &mut SearchConfig) {
        cfg.template_max_stars = self.max_stars;
        cfg.template_max_len = self.max_template_len;
        cfg.allow_adjacent_stars = !self.no_adjacent_stars;
        cfg.allow_template_fillers = self.template_fillers;
    }
}

/// One row of the structured report.  `gap` is `asi - tai` and is only
/// present when both values are; it is never negative because a canonical
/// plan is also a templated plan.
#[derive(Serialize)]
struct RunReport {
    input: String,
    mode: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    asi: Option<SearchReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    tai: Option<SearchReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    gap: Option<usize>,
    config: SearchConfig,
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}

fn run() -> Result<ExitCode> {
    match Cli::parse().command {
        Command::Asi(args) => cmd_asi(args),
        Command::Tai(args) => cmd_tai(args),
        Command::Verify(args) => cmd_verify(args),
        Command::Mine(args) => cmd_mine(args),
        Command::Gain(args) => cmd_gain(args),
        Command::Bench(args) => bench::run(args),
    }
}

#[derive(Args)]
struct AsiArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    search: SearchArgs,
    #[command(flatten)]
    output: OutputArgs,
}

fn cmd_asi(args: AsiArgs) -> Result<ExitCode> {
    let inputs = args.input.load()?;
    let mut cfg = SearchConfig::default();
    args.search.apply(&mut cfg);

    let mut reports = Vec::new();
    let mut plans = Vec::new();
    let mut all_proved = true;
    println!("{:<32} {:>6}  {:<12} {:>12} {:>10}", "target", "asi", "optimal", "nodes", "time");
    for item in &inputs {
        check_exact_cap(item, args.search.exact_cap)?;
        if args.search.trace {
            eprintln!("asi {} ({} symbols)...", item.id, item.target.len());
        }
        let r = asi_exact(&item.target, &cfg);
        all_proved &= r.optimal == Optimality::Proved;
        println!(
            "{:<32} {:>6}  {:<12} {:>12} {:>10}",
            display_id(&item.id),
            r.value,
            optimality_name(r.optimal),
            r.nodes_expanded,
            format!("{:.2?}", r.elapsed),
        );
        let rep = checked_report(&r)?;
        plans.push(rep.certificate.clone());
        reports.push(RunReport {
            input: item.id.clone(),
            mode: "asi",
            asi: Some(rep),
            tai: None,
            gap: None,
            config: cfg.clone(),
        });
    }
    write_json(args.output.json.as_deref(), &reports)?;
    write_plans(args.output.emit_plan.as_deref(), &plans)?;
    Ok(exit_for(all_proved, args.search.require_proved))
}

#[derive(Args)]
struct TaiArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    search: SearchArgs,
    #[command(flatten)]
    template: TemplateArgs,
    #[command(flatten)]
    output: OutputArgs,
    /// Also compute the exact assembly index and report the gap
    #[arg(long, env = "TASM_WITH_ASI")]
    with_asi: bool,
    /// Skip the search; report the greedy heuristic plan only
    #[arg(long, env = "TASM_HEURISTIC_ONLY")]
    heuristic_only: bool,
    /// Rank candidates by occurrences in the whole target instead of the
    /// uncommitted remainder
    #[arg(long, env = "TASM_OCC_AGAINST_TARGET")]
    occ_against_target: bool,
}

fn cmd_tai(args: TaiArgs) -> Result<ExitCode> {
    let inputs = args.input.load()?;
    let mut cfg = SearchConfig::default();
    args.search.apply(&mut cfg);
    args.template.apply(&mut cfg);
    let opts = HeuristicOptions { occ_against_target: args.occ_against_target };

    let mut reports = Vec::new();
    let mut plans = Vec::new();
    let mut all_proved = true;
    if args.with_asi {
        println!(
            "{:<32} {:>6}  {:<12} {:>6} {:>4} {:>12} {:>10}",
            "target", "tai", "optimal", "asi", "gap", "nodes", "time"
        );
    } else {
        println!("{:<32} {:>6}  {:<12} {:>12} {:>10}", "target", "tai", "optimal", "nodes", "time");
    }
    for item in &inputs {
        check_heuristic_cap(item)?;
        let heuristic_only = args.heuristic_only || item.target.len() > args.search.exact_cap;
        if heuristic_only && !args.heuristic_only {
            eprintln!(
                "warning: {}: {} symbols is over the exact-search cap of {}; \
                 reporting the greedy upper bound only",
                item.id,
                item.target.len(),
                args.search.exact_cap
            );
        }
        if args.search.trace {
            eprintln!("tai {} ({} symbols)...", item.id, item.target.len());
        }
        let mut tai = if heuristic_only {
            let started = Instant::now();
            let plan = greedy_heuristic_with(&item.target, &cfg, opts);
            let rep = plan.verify();
            if !rep.valid {
                bail!("{}: the greedy heuristic produced an invalid plan", item.id);
            }
            SearchReport {
                target: item.target.as_str().to_string(),
                mode: PlanMode::Templated,
                value: rep.cost,
                optimal: Optimality::UpperBoundOnly,
                nodes_expanded: 0,
                elapsed_ms: started.elapsed().as_millis() as u64,
                certificate: serialize_plan(&plan),
            }
        } else {
            checked_report(&tai_search(&item.target, &cfg))?
        };
        all_proved &= tai.optimal == Optimality::Proved;

        let (asi_rep, gap) = if !args.with_asi {
            (None, None)
        } else if item.target.len() > args.search.exact_cap {
            eprintln!(
                "warning: {}: skipping the exact index (over the exact-search cap)",
                item.id
            );
            (None, None)
        } else {
            let a = asi_exact(&item.target, &cfg);
            all_proved &= a.optimal == Optimality::Proved;
            if a.value < tai.value {
                // The canonical witness is also a templated plan; never
                // report a templated bound above the canonical value.
                let retagged = a.witness.with_mode(PlanMode::Templated);
                let rep = retagged.verify();
                if !rep.valid {
                    bail!("{}: canonical witness failed as a templated plan", item.id);
                }
                tai.value = a.value;
                tai.optimal = Optimality::UpperBoundOnly;
                tai.certificate = serialize_plan(&retagged);
            }
            let gap = a.value - tai.value;
            (Some(checked_report(&a)?), Some(gap))
        };

        if let (Some(a), Some(g)) = (&asi_rep, gap) {
            println!(
                "{:<32} {:>6}  {:<12} {:>6} {:>4} {:>12} {:>10}",
                display_id(&item.id),
                tai.value,
                optimality_name(tai.optimal),
                a.value,
                g,
                tai.nodes_expanded + a.nodes_expanded,
                format!("{}ms", tai.elapsed_ms + a.elapsed_ms),
            );
        } else {
            println!(
                "{:<32} {:>6}  {:<12} {:>12} {:>10}",
                display_id(&item.id),
                tai.value,
                optimality_name(tai.optimal),
                tai.nodes_expanded,
                format!("{}ms", tai.elapsed_ms),
            );
        }
        plans.push(tai.certificate.clone());
        reports.push(RunReport {
            input: item.id.clone(),
            mode: if heuristic_only { "tai-heuristic" } else { "tai" },
            asi: asi_rep,
            tai: Some(tai),
            gap,
            config: cfg.clone(),
        });
    }
    write_json(args.output.json.as_deref(), &reports)?;
    write_plans(args.output.emit_plan.as_deref(), &plans)?;
    Ok(exit_for(all_proved, args.search.require_proved))
}

#[derive(Args)]
struct VerifyArgs {
    /// Certificate file
    certificate: PathBuf,
    /// Write the JSON report to this path (`-` for standard output)
    #[arg(long, env = "TASM_JSON")]
    json: Option<PathBuf>,
}

fn cmd_verify(args: VerifyArgs) -> Result<ExitCode> {
    let name = args.certificate.display().to_string();
    let text = fs::read_to_string(&args.certificate).with_context(|| format!("reading {name}"))?;
    let plan = match parse_plan(&text) {
        Ok(plan) => plan,
        Err(err) => {
            eprintln!("{name}: syntax error: {err}");
            return Ok(ExitCode::from(2));
        }
    };
    let verdict = plan.verify();
    write_json(args.json.as_deref(), &CertificateReport::new(&plan, verdict.clone()))?;
    if verdict.valid {
        println!(
            "{name}: valid {} plan for {}, cost {}",
            plan.mode,
            plan.target.as_str(),
            verdict.cost
        );
        Ok(ExitCode::SUCCESS)
    } else {
        match verdict.failure {
            Some(f) => println!("{name}: INVALID at step {}: {}", f.step, f.reason),
            None => println!("{name}: INVALID: the plan never produces its target"),
        }
        Ok(ExitCode::from(1))
    }
}

#[derive(Args)]
struct MineArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    template: TemplateArgs,
    /// Rows to print per target (the JSON report carries every candidate)
    #[arg(long, env = "TASM_TOP", default_value_t = 20)]
    top: usize,
    /// Write the JSON report to this path (`-` for standard output)
    #[arg(long, env = "TASM_JSON")]
    json: Option<PathBuf>,
}

#[derive(Serialize)]
struct MineReport {
    input: String,
    candidates: Vec<CandidateReport>,
}

fn cmd_mine(args: MineArgs) -> Result<ExitCode> {
    let inputs = args.input.load()?;
    let mut cfg = SearchConfig::default();
    args.template.apply(&mut cfg);

    let mut reports = Vec::new();
    for item in &inputs {
        check_heuristic_cap(item)?;
        let candidates: Vec<CandidateReport> =
            mine_templates(&item.target, &cfg).iter().map(CandidateReport::from).collect();
        println!("{}: {} candidates", item.id, candidates.len());
        if !candidates.is_empty() {
            println!(
                "{:<20} {:<16} {:<12} {:>8} {:>7} {:>6}",
                "skeleton", "fillers", "occurrences", "benefit", "outlay", "gain"
            );
        }
        for c in candidates.iter().take(args.top) {
            let fillers: Vec<&str> = c.fillers.iter().map(|f| f.filler.as_str()).collect();
            let occs: Vec<String> =
                c.fillers.iter().map(|f| f.occurrences.to_string()).collect();
            println!(
                "{:<20} {:<16} {:<12} {:>8} {:>7} {:>6}",
                c.skeleton,
                fillers.join(","),
                occs.join(","),
                c.benefit,
                c.outlay,
                c.gain
            );
        }
        reports.push(MineReport { input: item.id.clone(), candidates });
    }
    write_json(args.json.as_deref(), &reports)?;
    Ok(ExitCode::SUCCESS)
}

#[derive(Args)]
struct GainArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Template skeleton, e.g. "11*11*11"
    #[arg(short = 'T', long = "template", env = "TASM_TEMPLATE")]
    template: String,
    /// Filler (repeat the flag for a family), e.g. -u 22 -u 00
    #[arg(short = 'u', long = "filler", env = "TASM_FILLER", required = true)]
    fillers: Vec<String>,
    /// Write the JSON report to this path (`-` for standard output)
    #[arg(long, env = "TASM_JSON")]
    json: Option<PathBuf>,
}

#[derive(Serialize)]
struct GainRow {
    input: String,
    skeleton: String,
    fillers: Vec<String>,
    benefit: i64,
    outlay: i64,
    gain: i64,
}

fn cmd_gain(args: GainArgs) -> Result<ExitCode> {
    let inputs = args.input.load()?;
    let skeleton = AssemblyObject::new(args.template.as_bytes())
        .with_context(|| format!("invalid template {:?}", args.template))?;
    let fillers: Vec<AssemblyObject> = args
        .fillers
        .iter()
        .map(|u| AssemblyObject::new(u.as_bytes()).with_context(|| format!("invalid filler {u:?}")))
        .collect::<Result<_>>()?;

    let mut rows = Vec::new();
    for item in &inputs {
        check_heuristic_cap(item)?;
        let rep = gain(&item.target, &skeleton, &fillers, CostProxy::default())
            .with_context(|| item.id.clone())?;
        println!(
            "{}: gain({}; {}) = {} - {} = {}",
            item.id,
            args.template,
            args.fillers.join(","),
            rep.benefit,
            rep.outlay,
            rep.gain
        );
        rows.push(GainRow {
            input: item.id.clone(),
            skeleton: args.template.clone(),
            fillers: args.fillers.clone(),
            benefit: rep.benefit,
            outlay: rep.outlay,
            gain: rep.gain,
        });
    }
    write_json(args.json.as_deref(), &rows)?;
    Ok(ExitCode::SUCCESS)
}

/// Re-verify a witness before anything is printed from it.
fn checked_report(r: &SearchResult) -> Result<SearchReport> {
    let rep = r.witness.verify();
    if !rep.valid || rep.cost != r.value {
        bail!("internal error: a search witness failed re-verification");
    }
    Ok(SearchReport::from(r))
}

fn optimality_name(o: Optimality) -> &'static str {
    match o {
        Optimality::Proved => "proved",
        Optimality::UpperBoundOnly => "upper-bound",
    }
}

fn display_id(id: &str) -> String {
    if id.len() <= 32 {
        id.to_string()
    } else {
        format!("{}...", &id[..29])
    }
}

fn check_exact_cap(item: &Ingested, cap: usize) -> Result<()> {
    if item.target.len() > cap {
        bail!(
            "{}: {} symbols is over the exact-search cap of {cap}; \
             raise --exact-cap to run the exponential search anyway",
            item.id,
            item.target.len()
        );
    }
    Ok(())
}

fn check_heuristic_cap(item: &Ingested) -> Result<()> {
    if item.target.len() > HEURISTIC_CAP {
        bail!(
            "{}: {} symbols is over the {HEURISTIC_CAP}-symbol cap",
            item.id,
            item.target.len()
        );
    }
    Ok(())
}

fn exit_for(all_proved: bool, require_proved: bool) -> ExitCode {
    if require_proved && !all_proved {
        ExitCode::from(3)
    } else {
        ExitCode::SUCCESS
    }
}

fn write_json<T: Serialize>(path: Option<&Path>, value: &T) -> Result<()> {
    let Some(path) = path else { return Ok(()) };
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    if path.as_os_str() == "-" {
        print!("{text}");
    } else {
        fs::write(path, text).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

fn write_plans(path: Option<&Path>, plans: &[String]) -> Result<()> {
    let Some(path) = path else { return Ok(()) };
    if let [plan] = plans {
        fs::write(path, plan).with_context(|| format!("writing {}", path.display()))?;
        return Ok(());
    }
    for (i, plan) in plans.iter().enumerate() {
        let numbered = numbered_path(path, i + 1);
        fs::write(&numbered, plan).with_context(|| format!("writing {}", numbered.display()))?;
    }
    Ok(())
}

/// `plans.cert` becomes `plans-3.cert`: one file per target, extension kept.
fn numbered_path(path: &Path, i: usize) -> PathBuf {
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("plan");
    let name = match path.extension().and_then(|s| s.to_str()) {
        Some(ext) => format!("{stem}-{i}.{ext}"),
        None => format!("{stem}-{i}"),
    };
    path.with_file_name(name)
}
