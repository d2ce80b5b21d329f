//! Command-line front end.
//!
//! ```text
//! tabprob prefix-prob --grammar g0.pcfg --prefix "a"
//! tabprob plcg-prefix-prob --grammar g0.cfg --prefix "a b" --json
//! tabprob reach --chain mc.txt --from s0 --to s3 --oracle-check 30
//! ```
//!
//! Exit status: 0 success, 1 usage or parse error, 2 model validation error,
//! 3 solver error (including non-convergence). Errors go to stderr as one
//! line `error[CODE]: message`.

use std::fs;
use std::io::Write;
use std::panic::{self, AssertUnwindSafe};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::eqsolve::{FixpointOptions, SolverKind};
use crate::error::{ModelError, QueryError, SolveError};
use crate::model::{
    make_plcg, parse_cfg_with_start, parse_markov_chain, parse_pcfg_with_start,
    parse_plan_model_with_start, MarkovChain, Pcfg, PlanModel, PlcgModel,
};
use crate::oracle::{oracle_plcg_prefix, oracle_prefix_pcfg, oracle_reach, oracle_sentence_pcfg};
use crate::queries::{
    conditional_next, normalize, plcg_prefix_probability, prefix_probability, reach_probability,
    recognize_plan, sentence_probability, QueryResult, SolveOptions,
};
use crate::scalar::{Rational, Scalar};

#[derive(Debug, Parser)]
#[command(name = "tabprob", version, about = "Prefix, plan and reachability probabilities")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Probability that a sentence starts with the prefix.
    PrefixProb {
        #[arg(long)]
        grammar: PathBuf,
        #[arg(long, required_unless_present = "batch")]
        prefix: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Probability of the prefix as a complete sentence.
    SentenceProb {
        #[arg(long)]
        grammar: PathBuf,
        #[arg(long, required_unless_present = "batch")]
        prefix: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Conditional distribution of the next word after the prefix.
    NextSymbol {
        #[arg(long)]
        grammar: PathBuf,
        #[arg(long, required_unless_present = "batch")]
        prefix: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Most likely plan for an observed action prefix.
    PlanRecognize {
        #[arg(long)]
        grammar: PathBuf,
        #[arg(long, visible_alias = "actions", required_unless_present = "batch")]
        prefix: Option<String>,
        /// Divide joint probabilities by their sum.
        #[arg(long)]
        normalize: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Prefix probability under the left-corner model of a CFG.
    PlcgPrefixProb {
        #[arg(long)]
        grammar: PathBuf,
        /// Overrides for the uniform switch distributions.
        #[arg(long)]
        params: Option<PathBuf>,
        #[arg(long, required_unless_present = "batch")]
        prefix: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Probability of ever reaching a state of a Markov chain.
    Reach {
        #[arg(long)]
        chain: PathBuf,
        #[arg(long, required_unless_present = "batch")]
        from: Option<String>,
        #[arg(long, required_unless_present = "batch")]
        to: Option<String>,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SolverArg {
    StratifiedLinear,
    Fixpoint,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ScalarArg {
    F64,
    F32,
    Exact,
}

#[derive(Debug, Args)]
struct Common {
    #[arg(long, value_enum, default_value = "stratified-linear")]
    solver: SolverArg,
    /// Fixpoint convergence threshold (max-norm change).
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    #[arg(long, default_value_t = 1_000_000)]
    max_iter: usize,
    /// Start nonterminal.
    #[arg(long)]
    start: Option<String>,
    #[arg(long)]
    json: bool,
    #[arg(long, value_name = "PATH")]
    dump_graph: Option<PathBuf>,
    #[arg(long, value_name = "PATH")]
    dump_equations: Option<PathBuf>,
    /// Also run the brute-force oracle with this many switch draws.
    #[arg(long, value_name = "BUDGET")]
    oracle_check: Option<usize>,
    /// Arithmetic used by parsing and solving.
    #[arg(long, value_enum, default_value = "f64")]
    scalar: ScalarArg,
    /// One query per line (words, or `from to` for reach).
    #[arg(long, value_name = "PATH")]
    batch: Option<PathBuf>,
}

struct Failure {
    code: &'static str,
    exit: i32,
    message: String,
}

impl Failure {
    fn new(code: &'static str, exit: i32, message: impl Into<String>) -> Self {
        Failure {
            code,
            exit,
            message: message.into(),
        }
    }

    fn usage(message: impl Into<String>) -> Self {
        Failure::new("E_USAGE", 1, message)
    }
}

impl From<ModelError> for Failure {
    fn from(e: ModelError) -> Self {
        match e {
            ModelError::Syntax { .. } => Failure::new("E_PARSE", 1, e.to_string()),
            _ => Failure::new("E_MODEL", 2, e.to_string()),
        }
    }
}

impl From<QueryError> for Failure {
    fn from(e: QueryError) -> Self {
        let code = match &e {
            QueryError::EmptyPrefix | QueryError::UnknownState(_) | QueryError::UnknownNonterminal(_) => {
                return Failure::usage(e.to_string())
            }
            QueryError::ZeroPrefix => "E_ZERO_PREFIX",
            QueryError::Build(_) => "E_GOAL_BUDGET",
            QueryError::Solve(SolveError::Singular { .. }) => "E_SINGULAR",
            QueryError::Solve(SolveError::NonLinear { .. }) => "E_NONLINEAR",
            QueryError::Solve(SolveError::OutOfRange { .. }) => "E_OUT_OF_RANGE",
            QueryError::Solve(SolveError::FixpointNeedsFloat) => "E_EXACT_FIXPOINT",
        };
        Failure::new(code, 3, e.to_string())
    }
}

#[derive(Debug, Serialize)]
struct Ranked {
    name: String,
    probability: f64,
}

/// One query outcome; the JSON form keeps this field order.
#[derive(Debug, Serialize)]
struct Report {
    query: String,
    probability: f64,
    cyclic: bool,
    scc_count: usize,
    solver: &'static str,
    iterations: Option<usize>,
    converged: bool,
    oracle_lower_bound: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    ranking: Option<Vec<Ranked>>,
    #[serde(skip)]
    exact: Option<String>,
    #[serde(skip)]
    ranking_exact: Vec<String>,
    #[serde(skip)]
    oracle_budget: Option<usize>,
    #[serde(skip)]
    graph_dump: Option<String>,
    #[serde(skip)]
    equations_dump: Option<String>,
}

impl Report {
    fn from_result<T: Scalar>(r: &QueryResult<T>) -> Self {
        Report {
            query: r.query.clone(),
            probability: r.probability.to_f64_lossy(),
            cyclic: r.cyclic,
            scc_count: r.scc_count,
            solver: r.solver.as_str(),
            iterations: r.iterations,
            converged: r.converged,
            oracle_lower_bound: None,
            ranking: None,
            exact: T::is_exact().then(|| r.probability.to_string()),
            ranking_exact: Vec::new(),
            oracle_budget: None,
            graph_dump: r.graph_dump.clone(),
            equations_dump: r.equations_dump.clone(),
        }
    }

    fn with_ranking<T: Scalar>(mut self, items: &[(String, T)]) -> Self {
        self.ranking = Some(
            items
                .iter()
                .map(|(name, p)| Ranked {
                    name: name.clone(),
                    probability: p.to_f64_lossy(),
                })
                .collect(),
        );
        if T::is_exact() {
            self.ranking_exact = items.iter().map(|(_, p)| p.to_string()).collect();
        }
        self
    }

    fn with_oracle<T: Scalar>(mut self, bound: T, budget: usize) -> Self {
        self.oracle_lower_bound = Some(bound.to_f64_lossy());
        self.oracle_budget = Some(budget);
        self
    }
}

/// Human-readable number with 12 significant digits.
pub fn format_sig12(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let magnitude = x.abs().log10().floor() as i32;
    if !(-5..12).contains(&magnitude) {
        return format!("{x:.11e}");
    }
    let decimals = (11 - magnitude).max(0) as usize;
    format!("{x:.decimals$}")
}

fn write_human(out: &mut dyn Write, r: &Report) -> std::io::Result<()> {
    writeln!(out, "probability: {}", format_sig12(r.probability))?;
    if let Some(exact) = &r.exact {
        writeln!(out, "exact: {exact}")?;
    }
    writeln!(out, "query: {}", r.query)?;
    writeln!(out, "cyclic: {}", r.cyclic)?;
    writeln!(out, "scc_count: {}", r.scc_count)?;
    writeln!(out, "solver: {}", r.solver)?;
    match r.iterations {
        Some(n) => writeln!(out, "iterations: {n}")?,
        None => writeln!(out, "iterations: -")?,
    }
    writeln!(out, "converged: {}", r.converged)?;
    if let (Some(bound), Some(budget)) = (r.oracle_lower_bound, r.oracle_budget) {
        writeln!(out, "oracle_budget: {budget}")?;
        writeln!(out, "oracle_lower_bound: {}", format_sig12(bound))?;
        writeln!(out, "oracle_gap: {}", format_sig12(r.probability - bound))?;
    }
    if let Some(ranking) = &r.ranking {
        writeln!(out, "ranking:")?;
        for (i, item) in ranking.iter().enumerate() {
            match r.ranking_exact.get(i) {
                Some(exact) => writeln!(out, "  {} {} ({exact})", item.name, format_sig12(item.probability))?,
                None => writeln!(out, "  {} {}", item.name, format_sig12(item.probability))?,
            }
        }
    }
    Ok(())
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::new("E_IO", 1, format!("{}: {e}", path.display())))
}

fn write_dump(path: &Option<PathBuf>, text: &Option<String>) -> Result<(), Failure> {
    if let (Some(path), Some(text)) = (path, text) {
        fs::write(path, text).map_err(|e| Failure::new("E_IO", 1, format!("{}: {e}", path.display())))?;
    }
    Ok(())
}

fn words(line: &str) -> Vec<&str> {
    line.split_whitespace().collect()
}

/// Query lines: the single inline query, or every non-blank batch line.
fn query_lines(inline: &[Option<&String>], batch: &Option<PathBuf>) -> Result<Vec<String>, Failure> {
    match batch {
        Some(path) => Ok(read(path)?
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(String::from)
            .collect()),
        None => Ok(vec![inline
            .iter()
            .map(|s| s.map(String::as_str).unwrap_or_default())
            .collect::<Vec<_>>()
            .join(" ")]),
    }
}

enum Model<T> {
    Pcfg(Pcfg<T>),
    Plan(PlanModel<T>),
    Plcg(PlcgModel<T>),
    Chain(MarkovChain<T>),
}

fn load<T: Scalar>(command: &Command) -> Result<Model<T>, Failure> {
    Ok(match command {
        Command::PrefixProb { grammar, common, .. }
        | Command::SentenceProb { grammar, common, .. }
        | Command::NextSymbol { grammar, common, .. } => {
            Model::Pcfg(parse_pcfg_with_start(&read(grammar)?, common.start.as_deref())?)
        }
        Command::PlanRecognize { grammar, common, .. } => {
            Model::Plan(parse_plan_model_with_start(&read(grammar)?, common.start.as_deref())?)
        }
        Command::PlcgPrefixProb {
            grammar,
            params,
            common,
            ..
        } => {
            let cfg = parse_cfg_with_start(&read(grammar)?, common.start.as_deref())?;
            let overrides = params.as_deref().map(read).transpose()?;
            Model::Plcg(make_plcg(&cfg, overrides.as_deref())?)
        }
        Command::Reach { chain, .. } => Model::Chain(parse_markov_chain(&read(chain)?)?),
    })
}

fn common(command: &Command) -> &Common {
    match command {
        Command::PrefixProb { common, .. }
        | Command::SentenceProb { common, .. }
        | Command::NextSymbol { common, .. }
        | Command::PlanRecognize { common, .. }
        | Command::PlcgPrefixProb { common, .. }
        | Command::Reach { common, .. } => common,
    }
}

fn one_query<T: Scalar>(
    command: &Command,
    model: &Model<T>,
    line: &str,
    options: &SolveOptions,
) -> Result<Report, Failure> {
    let c = common(command);
    let start = c.start.as_deref();
    let ws = words(line);
    let report = match model {
        Model::Pcfg(pcfg) => match command {
            Command::PrefixProb { .. } => {
                let r = prefix_probability(pcfg, &ws, start, options)?;
                let mut report = Report::from_result(&r);
                if let Some(budget) = c.oracle_check {
                    let est = oracle_prefix_pcfg(pcfg, &ws, start, budget)?;
                    report = report.with_oracle(est.lower_bound, budget);
                }
                report
            }
            Command::SentenceProb { .. } => {
                let r = sentence_probability(pcfg, &ws, start, options)?;
                let mut report = Report::from_result(&r);
                if let Some(budget) = c.oracle_check {
                    let est = oracle_sentence_pcfg(pcfg, &ws, start, budget)?;
                    report = report.with_oracle(est.lower_bound, budget);
                }
                report
            }
            _ => {
                let base = prefix_probability(pcfg, &ws, start, options)?;
                let ranked = conditional_next(pcfg, &ws, start, options)?;
                let mut report = Report::from_result(&base).with_ranking(&ranked);
                if let Some(budget) = c.oracle_check {
                    let est = oracle_prefix_pcfg(pcfg, &ws, start, budget)?;
                    report = report.with_oracle(est.lower_bound, budget);
                }
                report
            }
        },
        Model::Plan(plan) => {
            let normalized = matches!(command, Command::PlanRecognize { normalize: true, .. });
            let scores = recognize_plan(plan, &ws, options)?;
            let mut ranked: Vec<(String, T)> = scores.iter().map(|s| (s.plan.clone(), s.joint)).collect();
            if normalized {
                ranked = normalize(&ranked);
            }
            let top = &scores[0];
            let mut report = Report::from_result(&top.prefix).with_ranking(&ranked);
            report.probability = ranked[0].1.to_f64_lossy();
            report.exact = T::is_exact().then(|| ranked[0].1.to_string());
            if let Some(budget) = c.oracle_check {
                let est = oracle_prefix_pcfg(plan.pcfg(), &ws, Some(&top.plan), budget)?;
                if !normalized {
                    report = report.with_oracle(top.theta * est.lower_bound, budget);
                }
            }
            report
        }
        Model::Plcg(plcg) => {
            let r = plcg_prefix_probability(plcg, &ws, options)?;
            let mut report = Report::from_result(&r);
            if let Some(budget) = c.oracle_check {
                let est = oracle_plcg_prefix(plcg, &ws, budget)?;
                report = report.with_oracle(est.lower_bound, budget);
            }
            report
        }
        Model::Chain(chain) => {
            let [from, to] = ws[..] else {
                return Err(Failure::usage(format!("reach query needs `from to`, got `{line}`")));
            };
            let r = reach_probability(chain, from, to, options)?;
            let mut report = Report::from_result(&r);
            if let Some(budget) = c.oracle_check {
                let est = oracle_reach(chain, from, to, budget)?;
                report = report.with_oracle(est.lower_bound, budget);
            }
            report
        }
    };
    Ok(report)
}

fn execute<T: Scalar>(command: &Command, out: &mut dyn Write) -> Result<(), Failure> {
    let c = common(command);
    let options = SolveOptions {
        solver: match c.solver {
            SolverArg::StratifiedLinear => SolverKind::StratifiedLinear,
            SolverArg::Fixpoint => SolverKind::Fixpoint,
        },
        fixpoint: FixpointOptions {
            tol: c.tol,
            max_iter: c.max_iter,
        },
        keep_dumps: c.dump_graph.is_some() || c.dump_equations.is_some(),
        ..SolveOptions::default()
    };
    let model = load::<T>(command)?;
    let lines = match command {
        Command::Reach { from, to, .. } => query_lines(&[from.as_ref(), to.as_ref()], &c.batch)?,
        Command::PrefixProb { prefix, .. }
        | Command::SentenceProb { prefix, .. }
        | Command::NextSymbol { prefix, .. }
        | Command::PlanRecognize { prefix, .. }
        | Command::PlcgPrefixProb { prefix, .. } => query_lines(&[prefix.as_ref()], &c.batch)?,
    };
    let mut stalled = None;
    let io = |e: std::io::Error| Failure::new("E_IO", 1, e.to_string());
    for line in &lines {
        let report = one_query(command, &model, line, &options)?;
        write_dump(&c.dump_graph, &report.graph_dump)?;
        write_dump(&c.dump_equations, &report.equations_dump)?;
        if c.json {
            let text = serde_json::to_string(&report).map_err(|e| Failure::new("E_IO", 1, e.to_string()))?;
            writeln!(out, "{text}").map_err(io)?;
        } else {
            if c.batch.is_some() {
                writeln!(out, "# {line}").map_err(io)?;
            }
            write_human(out, &report).map_err(io)?;
        }
        if !report.converged && stalled.is_none() {
            stalled = Some(format!(
                "fixpoint iteration for {} did not converge within {} steps",
                report.query, c.max_iter
            ));
        }
    }
    match stalled {
        Some(message) => Err(Failure::new("E_NONCONVERGED", 3, message)),
        None => Ok(()),
    }
}

fn validate(c: &Common, command: &Command) -> Result<(), Failure> {
    if !(c.tol > 0.0) {
        return Err(Failure::usage("--tol must be positive"));
    }
    if c.max_iter == 0 {
        return Err(Failure::usage("--max-iter must be at least 1"));
    }
    if c.batch.is_some() && (c.dump_graph.is_some() || c.dump_equations.is_some()) {
        return Err(Failure::usage("--dump-graph and --dump-equations need a single query"));
    }
    if c.start.is_some() && matches!(command, Command::Reach { .. }) {
        return Err(Failure::usage("--start does not apply to reach"));
    }
    if c.scalar == ScalarArg::Exact && c.solver == SolverArg::Fixpoint {
        return Err(Failure::usage("--solver fixpoint needs a floating-point --scalar"));
    }
    Ok(())
}

/// Runs one invocation; `argv[0]` is the program name. Returns the exit
/// status.
pub fn run<S: AsRef<str>>(argv: &[S], stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    let argv: Vec<&str> = argv.iter().map(AsRef::as_ref).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(stdout, "{e}");
                return 0;
            }
            let text = e.to_string();
            let first = text
                .lines()
                .find(|l| !l.trim().is_empty())
                .unwrap_or("invalid arguments")
                .trim_start_matches("error: ");
            let _ = writeln!(stderr, "error[E_USAGE]: {first}");
            return 1;
        }
    };
    let result = validate(common(&cli.command), &cli.command).and_then(|()| {
        panic::catch_unwind(AssertUnwindSafe(|| match common(&cli.command).scalar {
            ScalarArg::F64 => execute::<f64>(&cli.command, stdout),
            ScalarArg::F32 => execute::<f32>(&cli.command, stdout),
            ScalarArg::Exact => execute::<Rational>(&cli.command, stdout),
        }))
        .unwrap_or_else(|_| Err(Failure::new("E_OVERFLOW", 3, "arithmetic overflow in exact mode")))
    });
    match result {
        Ok(()) => 0,
        Err(f) => {
            let _ = writeln!(stderr, "error[{}]: {}", f.code, f.message);
            f.exit
        }
    }
}
