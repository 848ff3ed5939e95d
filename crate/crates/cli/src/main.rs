//! `puca`: reversible block cellular automata, program search and
//! macroscopic no-go demonstrations.
//!
//! Exit codes: 0 success, 1 verification failed or nothing found, 2 the run
//! could not be carried out (usage, I/O or parse error).

mod quantum_demo;
mod render;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use puca_core::engine::{Phase, Trajectory};
use puca_core::lattice::text::parse_config;
use puca_core::lattice::{Configuration, Region, Torus};
use puca_core::macroscopic::{
    densities, no_go_witness, parse_rational, satisfies, shift_robustness, MacroConstraintSet, NoGoOutcome,
    Partition, Rational, TargetDensities, WitnessReport,
};
use puca_core::rules::{parse_rule, BlockRule};
use puca_core::universality::{
    describe_action, induced_map, universality_survey, BudgetReport, OutcomeReport, Program, RegionMap, SearchBudget,
    SearchReport,
};
use puca_core::{Error, VERSION};

#[derive(Debug, Parser)]
#[command(name = "puca", version, about = "Reversible block cellular automata and macroscopic no-go checks")]
struct Cli {
    /// Worker threads for parallel search
    #[arg(long, global = true, env = "PUCA_THREADS")]
    threads: Option<usize>,

    /// Write the report to this file instead of stdout
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, clap::Args)]
struct SearchArgs {
    /// Rule file
    #[arg(long)]
    rule: PathBuf,
    /// Target cells, e.g. "(0,0) (2,0)"
    #[arg(long)]
    target: String,
    /// Torus side lengths, e.g. 8x8 (default: 8 per axis)
    #[arg(long)]
    torus: Option<String>,
    /// Largest running time tried
    #[arg(long, default_value_t = 2)]
    tmax: usize,
    /// Halo cells that may be non-quiescent, or "auto" for the light cone
    #[arg(long, default_value = "auto")]
    halo: String,
    /// Stop after this many (halo, t) candidates (default: no limit)
    #[arg(long)]
    max_candidates: Option<u64>,
    /// Include wall time in the report
    #[arg(long)]
    timing: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evolve a configuration and dump the trajectory
    Simulate {
        #[arg(long)]
        rule: PathBuf,
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        steps: usize,
    },
    /// Parse a rule file and check that both phases are permutations
    ValidateRule { file: PathBuf },
    /// Tabulate the map a program induces on its target
    InducedMap {
        #[arg(long)]
        rule: PathBuf,
        /// Configuration of the complement (target cells are ignored)
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        target: String,
        #[arg(long)]
        time: usize,
        /// Also check the table against this map (ID, NOT, CONST1, or per cell: NOT,ID)
        #[arg(long)]
        beta: Option<String>,
    },
    /// Search for a program implementing a map on the target
    Search {
        #[command(flatten)]
        search: SearchArgs,
        /// Map to implement: ID, NOT, CONST<symbol>, or a per-cell list such as NOT,ID
        #[arg(long)]
        beta: String,
    },
    /// Search for every map in a list (default: all four maps on one binary cell)
    Survey {
        #[command(flatten)]
        search: SearchArgs,
        /// Maps to survey; may be repeated
        #[arg(long)]
        beta: Vec<String>,
    },
    /// Densities, constraint check and shift lemma for one configuration
    MacroCheck {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        partition: PathBuf,
        /// Constraint file; without it the targets are the configuration's own densities
        #[arg(long)]
        constraints: Option<PathBuf>,
        #[arg(long)]
        epsilon: Option<String>,
        /// Translation vector, e.g. 2,0 (default: 2 along the first axis)
        #[arg(long)]
        shift: Option<String>,
    },
    /// Build and verify a no-go witness pair (c', shift(c', v))
    NogoDemo {
        #[arg(long)]
        rule: PathBuf,
        #[arg(long)]
        partition: PathBuf,
        /// Constraint file; without it the targets are the densities of the program found
        #[arg(long)]
        constraints: Option<PathBuf>,
        #[arg(long)]
        epsilon: Option<String>,
        #[arg(long)]
        shift: Option<String>,
        #[arg(long, default_value_t = 2)]
        tmax: usize,
        #[arg(long, default_value = "auto")]
        halo: String,
        /// Stop after this many (halo, t) candidates (default: no limit)
        #[arg(long)]
        max_candidates: Option<u64>,
    },
    /// Mean-field, shift-bound, robustness and channel checks on small quantum systems
    QuantumDemo {
        /// Cells of the ring used for the mean-field checks (even, at most 10)
        #[arg(long, default_value_t = 10)]
        cells: usize,
        #[arg(long, default_value = "1/2")]
        epsilon: String,
        /// Random states per family for the robustness check
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Draw a trajectory dump as text grids or a PGM image
    Render {
        trajectory: PathBuf,
        #[arg(long, value_enum, default_value_t = RenderFormat::Text)]
        format: RenderFormat,
        /// Only this step
        #[arg(long)]
        step: Option<usize>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum RenderFormat {
    Text,
    Pgm,
}

/// Failure to run; exit code 2.
#[derive(Debug)]
struct Usage(String);

impl From<Error> for Usage {
    fn from(e: Error) -> Self {
        Usage(e.to_string())
    }
}

type Run<T> = std::result::Result<T, Usage>;

/// A finished run: the report text and its exit status.
struct Done {
    report: String,
    passed: bool,
    /// The run produced a report but could not complete (exit 2).
    aborted: bool,
}

impl Done {
    fn new(report: String, passed: bool) -> Self {
        Done {
            report,
            passed,
            aborted: false,
        }
    }
}

fn read(path: &Path) -> Run<String> {
    fs::read_to_string(path).map_err(|e| Usage(format!("cannot read {}: {e}", path.display())))
}

fn with_path<T>(path: &Path, r: puca_core::Result<T>) -> Run<T> {
    r.map_err(|e| Usage(format!("{}: {e}", path.display())))
}

fn load_rule(path: &Path) -> Run<BlockRule> {
    with_path(path, parse_rule(&read(path)?))
}

fn load_config(path: &Path) -> Run<Configuration> {
    with_path(path, parse_config(&read(path)?))
}

fn json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("reports serialize");
    s.push('\n');
    s
}

fn parse_region(text: &str) -> Run<Region> {
    text.parse::<Region>().map_err(|e| Usage(format!("invalid cell list {text:?}: {e}")))
}

fn parse_torus(text: Option<&str>, dim: usize) -> Run<Torus> {
    match text {
        Some(t) => Ok(t.parse::<Torus>()?),
        None => Ok(Torus::new(vec![8; dim])?),
    }
}

fn parse_shift(text: Option<&str>, torus: &Torus) -> Run<Vec<i64>> {
    let v = match text {
        Some(t) => t
            .split(',')
            .map(|x| x.trim().parse::<i64>().map_err(|_| Usage(format!("invalid shift vector {t:?}"))))
            .collect::<Run<Vec<_>>>()?,
        None => {
            let mut v = vec![0; torus.ndim()];
            v[0] = 2;
            v
        }
    };
    torus.check_vector(&v)?;
    Ok(v)
}

fn parse_ratio(text: &str) -> Run<Rational> {
    parse_rational(text).ok_or_else(|| Usage(format!("invalid rational {text:?}")))
}

fn budget(args: &SearchArgs, torus: &Torus, target: &Region) -> Run<SearchBudget> {
    budget_from(&args.halo, args.tmax, args.max_candidates, torus, target)
}

fn budget_from(halo: &str, tmax: usize, max: Option<u64>, torus: &Torus, target: &Region) -> Run<SearchBudget> {
    let max = max.unwrap_or(u64::MAX);
    if halo.trim() == "auto" {
        return Ok(SearchBudget::light_cone(torus, target, tmax, max)?);
    }
    Ok(SearchBudget {
        halo: parse_region(halo)?,
        t_max: tmax,
        max_candidates: max,
    })
}

fn simulate(rule: &Path, config: &Path, steps: usize) -> Run<Done> {
    let rule = load_rule(rule)?;
    let c = load_config(config)?;
    let trajectory = Trajectory::record(&c, &rule, steps)?;
    Ok(Done::new(trajectory.dump(), true))
}

fn validate_rule(path: &Path) -> Run<Done> {
    let text = read(path)?;
    let rule = match parse_rule(&text) {
        Ok(r) => r,
        Err(e @ Error::NonBijective { .. }) => {
            return Ok(Done::new(format!("invalid: {e}\n"), false))
        }
        Err(e) => return with_path(path, Err(e)),
    };
    let report = rule.validate()?;
    let mut out = if report.even == report.odd {
        format!("valid, {} fixed points\n", report.even.fixed_points)
    } else {
        format!(
            "valid, {} fixed points (even), {} fixed points (odd)\n",
            report.even.fixed_points, report.odd.fixed_points
        )
    };
    for (phase, summary) in [(Phase::Even, &report.even), (Phase::Odd, &report.odd)] {
        let cycles: Vec<String> = summary.cycles.iter().map(|(len, n)| format!("{n} of length {len}")).collect();
        out.push_str(&format!("{phase} cycles: {}\n", cycles.join(", ")));
    }
    out.push_str(&format!("hash: {}\n", rule.hash()));
    Ok(Done::new(out, true))
}

#[derive(Serialize)]
struct InducedMapReport {
    tool_version: String,
    rule_hash: String,
    torus: String,
    target: Vec<String>,
    time: usize,
    torus_only: bool,
    table: Vec<String>,
    cell_actions: Vec<(String, String)>,
    #[serde(skip_serializing_if = "Option::is_none")]
    implements: Option<bool>,
}

fn cells(r: &Region) -> Vec<String> {
    r.iter().map(|c| c.to_string()).collect()
}

fn induced(rule: &Path, config: &Path, target: &str, time: usize, beta: Option<&str>) -> Run<Done> {
    let rule = load_rule(rule)?;
    let c = load_config(config)?;
    let target = parse_region(target)?;
    let program = Program::new(&c, target.clone(), time)?;
    let im = induced_map(&rule, &program)?;
    let implements = beta
        .map(|b| RegionMap::parse_cellwise(b, target.clone(), rule.alphabet()).map(|b| b == im.map))
        .transpose()?;
    let report = InducedMapReport {
        tool_version: VERSION.into(),
        rule_hash: rule.hash(),
        torus: c.torus().to_string(),
        target: cells(&target),
        time,
        torus_only: im.torus_only,
        table: im.map.render_table(rule.alphabet()),
        cell_actions: target
            .iter()
            .map(|cell| {
                let action = im
                    .map
                    .cell_action(cell)
                    .map(|a| describe_action(&a, rule.alphabet()))
                    .unwrap_or_else(|| "depends on other cells".into());
                (cell.to_string(), action)
            })
            .collect(),
        implements,
    };
    Ok(Done::new(json(&report), implements.unwrap_or(true)))
}

fn search(args: &SearchArgs, beta: &str) -> Run<Done> {
    let rule = load_rule(&args.rule)?;
    let torus = parse_torus(args.torus.as_deref(), rule.dim())?;
    let target = parse_region(&args.target)?;
    let beta = RegionMap::parse_cellwise(beta, target.clone(), rule.alphabet())?;
    let budget = budget(args, &torus, &target)?;
    let (report, _) = SearchReport::run(&rule, &torus, &target, &beta, &budget, args.timing)?;
    let passed = matches!(report.outcome, OutcomeReport::Found { .. });
    let aborted = matches!(report.outcome, OutcomeReport::CapExceeded { .. });
    if let OutcomeReport::CapExceeded { candidates, cap } = &report.outcome {
        eprintln!("error: search space of {candidates} halo configurations exceeds the cap of {cap}");
    }
    Ok(Done {
        report: json(&report),
        passed,
        aborted,
    })
}

#[derive(Serialize)]
struct SurveyEntryReport {
    name: String,
    beta: Vec<String>,
    outcome: OutcomeReport,
    candidates_tested: u64,
}

#[derive(Serialize)]
struct SurveyReport {
    tool_version: String,
    rule_hash: String,
    torus: String,
    target: Vec<String>,
    budget: BudgetReport,
    entries: Vec<SurveyEntryReport>,
    coverage: Vec<String>,
    note: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    wall_time_ms: Option<u128>,
}

fn survey(args: &SearchArgs, betas: &[String]) -> Run<Done> {
    let start = Instant::now();
    let rule = load_rule(&args.rule)?;
    let torus = parse_torus(args.torus.as_deref(), rule.dim())?;
    let target = parse_region(&args.target)?;
    let budget = budget(args, &torus, &target)?;
    let list = if betas.is_empty() {
        None
    } else {
        Some(
            betas
                .iter()
                .map(|b| Ok((b.clone(), RegionMap::parse_cellwise(b, target.clone(), rule.alphabet())?)))
                .collect::<Run<Vec<_>>>()?,
        )
    };
    let survey = universality_survey(&rule, &torus, &target, &budget, list)?;
    let report = SurveyReport {
        tool_version: VERSION.into(),
        rule_hash: rule.hash(),
        torus: torus.to_string(),
        target: cells(&target),
        budget: (&budget).into(),
        entries: survey
            .entries
            .iter()
            .map(|e| SurveyEntryReport {
                name: e.name.clone(),
                beta: e.beta.render_table(rule.alphabet()),
                outcome: OutcomeReport::from_result(&Ok(e.result.clone())).expect("ok results have outcomes"),
                candidates_tested: e.result.candidates_tested,
            })
            .collect(),
        coverage: survey.coverage().iter().map(|s| s.to_string()).collect(),
        note: "coverage is relative to the search budget; a missing map is not shown to be unrealizable".into(),
        wall_time_ms: args.timing.then(|| start.elapsed().as_millis()),
    };
    Ok(Done::new(json(&report), true))
}

#[derive(Serialize)]
struct RegionDensities {
    name: String,
    cells: usize,
    deficit: String,
    targets: Vec<String>,
    densities: Vec<String>,
    shifted_densities: Vec<String>,
}

#[derive(Serialize)]
struct MacroReport {
    tool_version: String,
    torus: String,
    epsilon: String,
    shift: Vec<i64>,
    targets_from: String,
    regions: Vec<RegionDensities>,
    max_deviation: String,
    satisfies_epsilon: bool,
    satisfies_half_epsilon: bool,
    shifted_satisfies_epsilon: bool,
    max_deficit: String,
    max_density_change: String,
    lemma_premise: bool,
    lemma_holds: bool,
}

fn ratios(v: Vec<Rational>) -> Vec<String> {
    v.iter().map(|r| r.to_string()).collect()
}

fn macro_check(
    config: &Path,
    partition: &Path,
    constraints: Option<&Path>,
    epsilon: Option<&str>,
    shift: Option<&str>,
) -> Run<Done> {
    let c = load_config(config)?;
    let partition = with_path(partition, Partition::parse(&read(partition)?, Some(c.torus())))?;
    let eps = epsilon.map(parse_ratio).transpose()?;
    let (cs, from) = match constraints {
        Some(path) => (
            with_path(path, MacroConstraintSet::parse(&read(path)?, partition, c.alphabet().clone(), eps))?,
            path.display().to_string(),
        ),
        None => {
            let eps = eps.ok_or_else(|| Usage("--epsilon is required without a constraint file".into()))?;
            (
                MacroConstraintSet::from_densities(partition, &c, eps)?,
                "configuration densities".to_string(),
            )
        }
    };
    let v = parse_shift(shift, c.torus())?;
    let shifted = c.shift(&v)?;
    let rec = shift_robustness(&c, &cs, &v)?;
    let eps = cs.epsilon();
    let mut regions = Vec::new();
    for ((name, r), row) in cs.partition().regions().iter().zip(cs.targets()) {
        regions.push(RegionDensities {
            name: name.clone(),
            cells: r.len(),
            deficit: puca_core::macroscopic::overlap_deficit(r, &v, c.torus())?.to_string(),
            targets: ratios(row.clone()),
            densities: ratios(densities(&c, r)?.values()),
            shifted_densities: ratios(densities(&shifted, r)?.values()),
        });
    }
    let satisfies_epsilon = satisfies(&c, &cs, eps)?;
    let report = MacroReport {
        tool_version: VERSION.into(),
        torus: c.torus().to_string(),
        epsilon: eps.to_string(),
        shift: v,
        targets_from: from,
        regions,
        max_deviation: cs.deviation(&c)?.0.to_string(),
        satisfies_epsilon,
        satisfies_half_epsilon: rec.satisfies_half,
        shifted_satisfies_epsilon: rec.satisfies_shifted,
        max_deficit: rec.max_deficit.to_string(),
        max_density_change: rec.max_density_change.to_string(),
        lemma_premise: rec.premise(eps),
        lemma_holds: rec.holds(),
    };
    Ok(Done::new(json(&report), satisfies_epsilon && rec.holds()))
}

#[derive(Serialize)]
struct NotFoundReport {
    tool_version: String,
    rule_hash: String,
    status: &'static str,
    candidates_tested: u64,
    exhausted: bool,
    note: &'static str,
}

#[allow(clippy::too_many_arguments)]
fn nogo_demo(
    rule: &Path,
    partition: &Path,
    constraints: Option<&Path>,
    epsilon: Option<&str>,
    shift: Option<&str>,
    tmax: usize,
    halo: &str,
    max: Option<u64>,
) -> Run<Done> {
    let rule = load_rule(rule)?;
    let partition = with_path(partition, Partition::parse(&read(partition)?, None))?;
    let torus = partition.torus().clone();
    let eps = epsilon.map(parse_ratio).transpose()?;
    let from = match constraints {
        Some(path) => TargetDensities::Given(with_path(
            path,
            MacroConstraintSet::parse(&read(path)?, partition.clone(), rule.alphabet().clone(), eps),
        )?),
        None => TargetDensities::FromProgram {
            partition: partition.clone(),
            epsilon: eps.ok_or_else(|| Usage("--epsilon is required without a constraint file".into()))?,
        },
    };
    let v = parse_shift(shift, &torus)?;
    let budget = budget_from(halo, tmax, max, &torus, partition.target())?;
    match no_go_witness(&rule, &from, &v, &budget)? {
        NoGoOutcome::Found(w) => {
            let report = WitnessReport::new(&rule, &w)?;
            Ok(Done::new(json(&report), report.verified))
        }
        NoGoOutcome::NotFound {
            candidates_tested,
            exhausted,
        } => Ok(Done::new(
            json(&NotFoundReport {
                tool_version: VERSION.into(),
                rule_hash: rule.hash(),
                status: "not-found",
                candidates_tested,
                exhausted,
                note: "no program within the search budget; this is not a proof of nonexistence",
            }),
            false,
        )),
    }
}

fn run(cli: &Cli) -> Run<Done> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(Usage("--threads must be positive".into()));
        }
        // fails only if a pool already exists, which cannot happen here
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    match &cli.command {
        Command::Simulate { rule, config, steps } => simulate(rule, config, *steps),
        Command::ValidateRule { file } => validate_rule(file),
        Command::InducedMap {
            rule,
            config,
            target,
            time,
            beta,
        } => induced(rule, config, target, *time, beta.as_deref()),
        Command::Search { search: args, beta } => search(args, beta),
        Command::Survey { search: args, beta } => survey(args, beta),
        Command::MacroCheck {
            config,
            partition,
            constraints,
            epsilon,
            shift,
        } => macro_check(config, partition, constraints.as_deref(), epsilon.as_deref(), shift.as_deref()),
        Command::NogoDemo {
            rule,
            partition,
            constraints,
            epsilon,
            shift,
            tmax,
            halo,
            max_candidates,
        } => nogo_demo(
            rule,
            partition,
            constraints.as_deref(),
            epsilon.as_deref(),
            shift.as_deref(),
            *tmax,
            halo,
            *max_candidates,
        ),
        Command::QuantumDemo {
            cells,
            epsilon,
            trials,
            seed,
        } => quantum_demo::run(*cells, parse_ratio(epsilon)?, *trials, *seed),
        Command::Render {
            trajectory,
            format,
            step,
        } => {
            let t = with_path(trajectory, Trajectory::parse_dump(&read(trajectory)?))?;
            let report = match format {
                RenderFormat::Text => render::text(&t, *step)?,
                RenderFormat::Pgm => render::pgm(&t, *step)?,
            };
            Ok(Done::new(report, true))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(done) => {
            match &cli.output {
                Some(path) => {
                    if let Err(e) = fs::write(path, &done.report) {
                        eprintln!("error: cannot write {}: {e}", path.display());
                        return ExitCode::from(2);
                    }
                }
                None => print!("{}", done.report),
            }
            if done.aborted {
                ExitCode::from(2)
            } else if done.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
