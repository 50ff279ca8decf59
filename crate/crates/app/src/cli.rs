//! `revrec` command line.

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use revrec_core::eval::{compare_reports, evaluate_strategy};
use revrec_core::fixture::build_fixture;
use revrec_core::{Execution, Language, PrId, Strategy};

use crate::cache::{RecommendationCache, DEFAULT_CAPACITY};
use crate::engine::{Engine, EngineError, ProjectSpec, Query, Target};
use crate::render;
use crate::service;

#[derive(Debug, Parser)]
#[command(name = "revrec", version, about = "Recommend code reviewers from library and technology similarity")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Rank reviewers for a pull request in the history or a new change set
    Recommend(RecommendArgs),
    /// Replay the history and score each strategy
    Evaluate(EvaluateArgs),
    /// Show the tokens extracted from a pull request or change set
    Extract(ExtractArgs),
    /// Run the HTTP service
    Serve(ServeArgs),
    /// Write the bundled sample repository and metadata
    GenFixture(GenFixtureArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum StrategyArg {
    Correct,
    Fps,
    Frequency,
}

impl From<StrategyArg> for Strategy {
    fn from(s: StrategyArg) -> Self {
        match s {
            StrategyArg::Correct => Strategy::Correct,
            StrategyArg::Fps => Strategy::Fps,
            StrategyArg::Frequency => Strategy::Frequency,
        }
    }
}

#[derive(Debug, Args)]
struct ProjectArgs {
    /// Git repository of the project
    #[arg(long)]
    repo: PathBuf,
    /// Pull request metadata, one JSON object per line
    #[arg(long)]
    history: PathBuf,
    /// Number of recent closed pull requests to compare against
    #[arg(long, default_value_t = 30, value_parser = clap::value_parser!(u64).range(1..))]
    window: u64,
    /// Technology patterns, one per line, replacing the built-in list
    #[arg(long, value_name = "PATH")]
    tech_lexicon: Option<PathBuf>,
    /// Extra module names to ignore for a language
    #[arg(long, value_name = "LANG=PATH")]
    stoplist: Vec<String>,
    /// Run on the calling thread only
    #[arg(long)]
    sequential: bool,
}

#[derive(Debug, Args)]
#[group(skip)]
struct TargetArgs {
    /// Pull request id from the history
    #[arg(long, required_unless_present = "files", conflicts_with = "files")]
    pr: Option<String>,
    /// Changed files as REV:PATH, or PATH for HEAD
    #[arg(long, num_args = 1.., value_delimiter = ',', requires = "author")]
    files: Vec<String>,
    /// Author of the change set, excluded from the result
    #[arg(long)]
    author: Option<String>,
}

#[derive(Debug, Args)]
struct RecommendArgs {
    #[command(flatten)]
    project: ProjectArgs,
    #[command(flatten)]
    target: TargetArgs,
    /// Number of reviewers to list
    #[arg(long, default_value_t = 5, value_parser = clap::value_parser!(u64).range(1..))]
    k: u64,
    #[arg(long, value_enum, default_value_t = StrategyArg::Correct)]
    strategy: StrategyArg,
    /// Ignore and replace any cached result
    #[arg(long)]
    refresh: bool,
    /// Also write the JSON document here
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Print the JSON document instead of the table
    #[arg(long)]
    json: bool,
    /// Keep results in this file between runs
    #[arg(long, value_name = "PATH")]
    cache: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct EvaluateArgs {
    #[command(flatten)]
    project: ProjectArgs,
    /// Strategies to replay
    #[arg(long, value_enum, value_delimiter = ',', default_values_t = [StrategyArg::Correct, StrategyArg::Fps, StrategyArg::Frequency])]
    strategy: Vec<StrategyArg>,
    /// List sizes to score
    #[arg(long, value_delimiter = ',', default_values_t = [1usize, 3, 5])]
    k_values: Vec<usize>,
    /// Directory for the report files
    #[arg(long, value_name = "DIR", default_value = ".")]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct ExtractArgs {
    #[command(flatten)]
    project: ProjectArgs,
    #[command(flatten)]
    target: TargetArgs,
    #[arg(long)]
    json: bool,
}

#[derive(Debug, Args)]
struct ServeArgs {
    #[command(flatten)]
    project: ProjectArgs,
    /// Listen address; defaults to $REVREC_SERVE_ADDR, then 127.0.0.1:8080
    #[arg(long, value_name = "ADDR")]
    serve_addr: Option<String>,
    #[arg(long, value_name = "PATH")]
    cache: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct GenFixtureArgs {
    /// Directory to create `repo/` and `prs.ndjson` in
    #[arg(long, value_name = "DIR")]
    out: PathBuf,
}

/// A failed command and its exit status.
struct Failure {
    code: i32,
    error: anyhow::Error,
}

impl From<anyhow::Error> for Failure {
    fn from(error: anyhow::Error) -> Self {
        Failure { code: 2, error }
    }
}

impl From<EngineError> for Failure {
    fn from(e: EngineError) -> Self {
        let code = if matches!(e, EngineError::Internal(_)) { 1 } else { 2 };
        Failure { code, error: e.into() }
    }
}

fn input_error(error: anyhow::Error) -> Failure {
    Failure { code: 2, error }
}

fn output_error(error: anyhow::Error) -> Failure {
    Failure { code: 1, error }
}

/// Runs the command line and returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let result = match cli.command {
        Command::Recommend(a) => recommend(a),
        Command::Evaluate(a) => evaluate(a),
        Command::Extract(a) => extract(a),
        Command::Serve(a) => serve(a),
        Command::GenFixture(a) => gen_fixture(a),
    };
    match result {
        Ok(()) => 0,
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            f.code
        }
    }
}

fn project_spec(p: &ProjectArgs) -> Result<ProjectSpec, Failure> {
    let mut spec = ProjectSpec::new(&p.repo, &p.history);
    spec.window = p.window as usize;
    spec.tech_lexicon = p.tech_lexicon.clone();
    for entry in &p.stoplist {
        let (lang, path) = entry
            .split_once('=')
            .ok_or_else(|| anyhow!("--stoplist expects LANG=PATH, got {entry:?}"))?;
        let language = Language::parse(lang)
            .filter(|l| *l != Language::Other)
            .ok_or_else(|| anyhow!("unknown language {lang:?} in --stoplist"))?;
        spec.stoplists.push((language, PathBuf::from(path)));
    }
    if p.sequential {
        spec.execution = Execution::Sequential;
    }
    Ok(spec)
}

fn open_cache(path: Option<&Path>) -> Result<Arc<RecommendationCache>, Failure> {
    let cache = match path {
        Some(p) => RecommendationCache::persistent(p, DEFAULT_CAPACITY)
            .with_context(|| format!("cannot read cache {}", p.display()))?,
        None => RecommendationCache::in_memory(DEFAULT_CAPACITY),
    };
    Ok(Arc::new(cache))
}

fn print_warnings(engine: &Engine) {
    for w in engine.cache().take_warnings() {
        eprintln!("warning: {w}");
    }
}

fn target(engine: &Engine, t: &TargetArgs) -> Result<Target, Failure> {
    match &t.pr {
        Some(id) => Ok(Target::Existing(PrId(id.clone()))),
        None => {
            let files = t.files.iter().map(|f| engine.resolve_file(f)).collect::<Result<Vec<_>, _>>()?;
            Ok(Target::New {
                author: t.author.clone().unwrap_or_default(),
                files,
            })
        }
    }
}

fn recommend(a: RecommendArgs) -> Result<(), Failure> {
    let spec = project_spec(&a.project)?;
    let engine = Engine::open(&spec, open_cache(a.cache.as_deref())?)?;
    print_warnings(&engine);
    let query = Query {
        target: target(&engine, &a.target)?,
        strategy: a.strategy.into(),
        k: Some(a.k as usize),
        refresh: a.refresh,
    };
    let answer = engine.recommend(&query);
    print_warnings(&engine);
    let answer = answer?;
    if a.cache.is_some() {
        eprintln!("cache: {}", answer.lookup.name());
    }
    if let Some(out) = &a.out {
        std::fs::write(out, &answer.json)
            .with_context(|| format!("cannot write {}", out.display()))
            .map_err(output_error)?;
    }
    if a.json {
        print!("{}", answer.json);
    } else {
        print!("{}", render::recommendation_table(&answer.recommendation));
    }
    if answer.recommendation.entries.is_empty() {
        eprintln!("notice: no reviewers to recommend for PR {}", answer.recommendation.generated_for);
    }
    Ok(())
}

fn evaluate(a: EvaluateArgs) -> Result<(), Failure> {
    let spec = project_spec(&a.project)?;
    if a.k_values.contains(&0) {
        return Err(input_error(anyhow!("--k-values must be positive")));
    }
    let engine = Engine::open(&spec, open_cache(None)?)?;
    let rec = engine.recommender();
    if rec.history().is_empty() {
        return Err(input_error(anyhow!("{} holds no pull requests", spec.history.display())));
    }
    let mut strategies: Vec<Strategy> = Vec::new();
    for s in &a.strategy {
        let s = Strategy::from(*s);
        if !strategies.contains(&s) {
            strategies.push(s);
        }
    }
    std::fs::create_dir_all(&a.out)
        .with_context(|| format!("cannot create {}", a.out.display()))
        .map_err(output_error)?;
    rec.warm();
    let mut reports = Vec::new();
    for s in strategies {
        let report = evaluate_strategy(rec, s, &a.k_values);
        let path = a.out.join(format!("{}.report.json", s.name()));
        std::fs::write(&path, report.to_json())
            .with_context(|| format!("cannot write {}", path.display()))
            .map_err(output_error)?;
        print!("{}", report.to_table());
        println!();
        reports.push(report);
    }
    for i in 0..reports.len() {
        for j in i + 1..reports.len() {
            let c = compare_reports(&reports[i], &reports[j]);
            let path = a.out.join(format!("{}-vs-{}.comparison.json", c.a, c.b));
            let mut text = serde_json::to_string_pretty(&c).expect("comparison serializes");
            text.push('\n');
            std::fs::write(&path, text)
                .with_context(|| format!("cannot write {}", path.display()))
                .map_err(output_error)?;
            print!("{}", c.to_table());
            println!();
        }
    }
    Ok(())
}

fn extract(a: ExtractArgs) -> Result<(), Failure> {
    let spec = project_spec(&a.project)?;
    let engine = Engine::open(&spec, open_cache(None)?)?;
    let t = target(&engine, &a.target)?;
    let e = engine.extract(&t)?;
    if a.json {
        let mut text = serde_json::to_string_pretty(&e).expect("extraction serializes");
        text.push('\n');
        print!("{text}");
    } else {
        print!("{}", render::extraction_listing(&e));
    }
    for w in &e.warnings {
        eprintln!("warning: {w}");
    }
    Ok(())
}

fn serve(a: ServeArgs) -> Result<(), Failure> {
    let spec = project_spec(&a.project)?;
    let addr = service::bind_address(a.serve_addr.as_deref()).map_err(|e| input_error(anyhow!(e)))?;
    let engine = Engine::open(&spec, open_cache(a.cache.as_deref())?)?;
    print_warnings(&engine);
    engine.recommender().warm();
    let runtime = tokio::runtime::Runtime::new()
        .context("cannot start the async runtime")
        .map_err(output_error)?;
    runtime
        .block_on(service::serve(Arc::new(engine), addr))
        .with_context(|| format!("serving on {addr}"))
        .map_err(output_error)
}

fn gen_fixture(a: GenFixtureArgs) -> Result<(), Failure> {
    let paths = build_fixture(&a.out).with_context(|| format!("cannot create fixture in {}", a.out.display()))?;
    println!("repository: {}", paths.repo.display());
    println!("history:    {}", paths.history.display());
    Ok(())
}
