//! `qmdl` command-line front end. Every subcommand reads a JSON config and
//! prints a JSON result; experiments also write CSV rows to `--out`.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use qmdl::estim::{mle, predict_next, two_part, EstimateResult};
use qmdl::infodist::{class_divergence, divergence, DivergenceKind, DivergenceValue};
use qmdl::opcore::{LogBase, MatrixLiteral};
use qmdl::projlat::{classify, consistent, finer, join, meet, q_project, LatticeResult, ProjSystem};
use qmdl::qsource::{universality_check, UniversalityMode};
use qmdl::words::OutcomeWord;
use qmdl::xplab::decl::{ModelDecl, QDecl, SourceDecl, StateDecl};
use qmdl::xplab::{run, ExperimentConfig, ExperimentKind, RunStatus};

const EXIT_ERROR: u8 = 1;
const EXIT_CONFIG: u8 = 4;

#[derive(Parser)]
#[command(name = "qmdl", version, about = "Quantum MDL inference at finite dimension")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Common {
    /// JSON config file.
    #[arg(long)]
    config: PathBuf,
    /// CSV output path.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Order, consistency, join and meet of projection systems.
    Lattice(Common),
    /// Q-projection and classicality of an operator.
    Project(Common),
    /// Universality of a source against a model.
    UniversalityCheck(Common),
    /// MLE or two-part estimate from an outcome word.
    Estimate(Common),
    /// Next-outcome probabilities of a source.
    Predict(Common),
    /// Divergence between two states or two sources.
    Divergence(Common),
    Consistency(Common),
    Bound(Common),
    Redundancy(Common),
    Markov(Common),
}

enum Failure {
    Config(String),
    Other(String),
}

impl From<qmdl::Error> for Failure {
    fn from(e: qmdl::Error) -> Self {
        match e {
            qmdl::Error::Config { .. } => Failure::Config(e.to_string()),
            other => Failure::Other(other.to_string()),
        }
    }
}

type Outcome = Result<RunStatus, Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))
}

fn parse<T: DeserializeOwned>(text: &str) -> Result<T, Failure> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        Failure::Config(format!("config error at `{path}`: {}", e.into_inner()))
    })
}

fn emit(text: &str) {
    // A closed pipe downstream is not an error of the run.
    let _ = writeln!(std::io::stdout().lock(), "{text}");
}

fn print_json(v: &impl Serialize) {
    emit(&serde_json::to_string_pretty(v).expect("results serialize"));
}

fn write_out(out: Option<&Path>, csv: &str) -> Result<(), Failure> {
    if let Some(p) = out {
        std::fs::write(p, csv).map_err(|e| Failure::Other(format!("{}: {e}", p.display())))?;
    }
    Ok(())
}

/// A word as `"0,1,1"` or, for two-outcome systems, `n` and `k`.
#[derive(Deserialize)]
struct WordDecl {
    #[serde(default)]
    word: Option<String>,
    #[serde(default)]
    n: Option<usize>,
    #[serde(default)]
    k: Option<usize>,
}

impl WordDecl {
    fn build(&self, outcomes: usize) -> Result<OutcomeWord, Failure> {
        let w = match (&self.word, self.n, self.k) {
            (Some(s), None, None) => OutcomeWord::parse(s, outcomes),
            (None, Some(n), Some(k)) if outcomes == 2 => OutcomeWord::binary(n, k),
            (None, Some(_), Some(_)) => {
                return Err(Failure::Config("`n`/`k` shorthand needs a two-outcome system".into()))
            }
            _ => return Err(Failure::Config("declare `word` or both `n` and `k`".into())),
        };
        w.map_err(|e| Failure::Config(format!("config error at `word`: {e}")))
    }
}

fn q_or_default(q: &Option<QDecl>, dim: usize) -> Result<ProjSystem, Failure> {
    Ok(q.clone().unwrap_or_default().build(dim, "q")?)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct LatticeConfig {
    systems: Vec<Vec<MatrixLiteral>>,
}

fn lattice_json(r: Result<LatticeResult, qmdl::Error>) -> Value {
    match r {
        Ok(r) => json!({
            "op": r.op,
            "projectors": r.system.to_literals(),
            "provenance": r.provenance,
        }),
        Err(e) => json!({ "error": e.to_string() }),
    }
}

fn lattice_cmd(text: &str) -> Outcome {
    let cfg: LatticeConfig = parse(text)?;
    if cfg.systems.len() < 2 {
        return Err(Failure::Config("config error at `systems`: need at least two systems".into()));
    }
    let systems = cfg
        .systems
        .iter()
        .enumerate()
        .map(|(i, lits)| {
            ProjSystem::from_literals(lits).map_err(|e| Failure::Config(format!("config error at `systems[{i}]`: {e}")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let order = systems
        .iter()
        .map(|p| systems.iter().map(|q| finer(p, q)).collect::<Result<Vec<_>, _>>())
        .collect::<Result<Vec<_>, _>>()?;
    print_json(&json!({
        "finer": order,
        "consistent": consistent(&systems)?,
        "join": lattice_json(join(&systems)),
        "meet": lattice_json(meet(&systems)),
    }));
    Ok(RunStatus::Pass)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ProjectConfig {
    operator: MatrixLiteral,
    #[serde(default)]
    q: Option<QDecl>,
}

fn project_cmd(text: &str) -> Outcome {
    let cfg: ProjectConfig = parse(text)?;
    let t = cfg
        .operator
        .to_op()
        .map_err(|e| Failure::Config(format!("config error at `operator`: {e}")))?;
    let q = q_or_default(&cfg.q, t.dim())?;
    let c = classify(&t, &q)?;
    print_json(&json!({
        "projected": MatrixLiteral::from(&q_project(&t, &q)?),
        "nu": c.nu,
        "tag": c.tag,
    }));
    Ok(RunStatus::Pass)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct UniversalityConfig {
    source: SourceDecl,
    model: Vec<StateDecl>,
    epsilon: f64,
    n_min: usize,
    n_max: usize,
    #[serde(default = "matrix_mode")]
    mode: UniversalityMode,
    #[serde(default)]
    q: Option<QDecl>,
}

fn matrix_mode() -> UniversalityMode {
    UniversalityMode::Matrix
}

fn universality_cmd(text: &str, out: Option<&Path>) -> Outcome {
    let cfg: UniversalityConfig = parse(text)?;
    let src = cfg.source.build("source")?;
    let model = cfg
        .model
        .iter()
        .enumerate()
        .map(|(i, s)| s.density(&format!("model[{i}]")))
        .collect::<Result<Vec<_>, _>>()?;
    let q = match (&cfg.q, cfg.mode) {
        (_, UniversalityMode::QRestricted | UniversalityMode::QExpected) => {
            Some(q_or_default(&cfg.q, src.as_source().dim())?)
        }
        (Some(d), _) => Some(d.build(src.as_source().dim(), "q")?),
        (None, _) => None,
    };
    let report = universality_check(
        src.as_source(),
        &model,
        cfg.epsilon,
        cfg.n_min..=cfg.n_max,
        cfg.mode,
        q.as_ref(),
    )?;
    write_out(out, &report.to_csv())?;
    print_json(&report);
    Ok(if report.pass { RunStatus::Pass } else { RunStatus::Fail })
}

#[derive(Deserialize, Clone, Copy, PartialEq, Eq)]
#[serde(rename_all = "kebab-case")]
enum Method {
    Mle,
    TwoPart,
}

#[derive(Deserialize)]
struct EstimateConfig {
    method: Method,
    model: ModelDecl,
    #[serde(default)]
    q: Option<QDecl>,
    #[serde(flatten)]
    word: WordDecl,
}

fn estimate_json(r: &EstimateResult) -> Value {
    json!({
        "theta_hat": r.theta_hat,
        "state": MatrixLiteral::from(r.state.as_op()),
        "lambda": r.lambda,
        "index": r.index,
        "tie_path": r.tie_path,
    })
}

fn estimate_cmd(text: &str) -> Outcome {
    let cfg: EstimateConfig = parse(text)?;
    let result = match cfg.method {
        Method::Mle => {
            let model = cfg.model.param("model")?;
            let q = q_or_default(&cfg.q, model.states()[0].dim())?;
            mle(&model, &q, &cfg.word.build(q.len())?)?
        }
        Method::TwoPart => {
            let model = cfg.model.generalized("model")?;
            let q = q_or_default(&cfg.q, model.dim())?;
            two_part(&model, &q, &cfg.word.build(q.len())?)?
        }
    };
    print_json(&estimate_json(&result));
    Ok(RunStatus::Pass)
}

#[derive(Deserialize)]
struct PredictConfig {
    source: SourceDecl,
    #[serde(default)]
    q: Option<QDecl>,
    #[serde(flatten)]
    word: WordDecl,
}

fn predict_cmd(text: &str) -> Outcome {
    let cfg: PredictConfig = parse(text)?;
    let src = cfg.source.build("source")?;
    let q = q_or_default(&cfg.q, src.as_source().dim())?;
    let word = cfg.word.build(q.len())?;
    print_json(&json!({
        "word": word.to_string(),
        "probabilities": predict_next(src.as_source(), &q, &word)?,
    }));
    Ok(RunStatus::Pass)
}

/// States `a`, `b`, or sources `a`, `b` compared on length-`n` outcome
/// words under `q`.
#[derive(Deserialize)]
struct DivergenceConfig {
    #[serde(flatten)]
    kind: DivergenceKind,
    #[serde(default)]
    base: Option<LogBase>,
    #[serde(default)]
    states: Option<[StateDecl; 2]>,
    #[serde(default)]
    sources: Option<[SourceDecl; 2]>,
    #[serde(default)]
    q: Option<QDecl>,
    #[serde(default)]
    n: Option<usize>,
}

fn divergence_cmd(text: &str) -> Outcome {
    let cfg: DivergenceConfig = parse(text)?;
    let value: DivergenceValue = match (&cfg.states, &cfg.sources) {
        (Some([a, b]), None) => divergence(
            cfg.kind,
            &a.semi_density("states[0]")?,
            &b.semi_density("states[1]")?,
        )?,
        (None, Some([a, b])) => {
            let (a, b) = (a.build("sources[0]")?, b.build("sources[1]")?);
            let q = q_or_default(&cfg.q, a.as_source().dim())?;
            let n = cfg.n.ok_or_else(|| Failure::Config("config error at `n`: missing".into()))?;
            class_divergence(cfg.kind, &a.class_law(&q)?, &b.class_law(&q)?, n)?
        }
        _ => return Err(Failure::Config("declare exactly one of `states` and `sources`".into())),
    };
    let value = match (cfg.base, value.base) {
        (Some(b), Some(_)) => value.in_base(b),
        _ => value,
    };
    print_json(&json!({ "value": value.value, "base": value.base_tag() }));
    Ok(RunStatus::Pass)
}

fn experiment_cmd(kind: ExperimentKind, text: &str, out: Option<&Path>, seed: Option<u64>) -> Outcome {
    let mut cfg = ExperimentConfig::from_json(text)?;
    if cfg.experiment != kind {
        return Err(Failure::Config(format!(
            "config error at `experiment`: expected {:?}, found {:?}",
            kind.tag(),
            cfg.experiment.tag()
        )));
    }
    if let Some(s) = seed {
        cfg.seed = s;
    }
    let out = out.map(Path::to_path_buf).or_else(|| cfg.output.as_ref().map(PathBuf::from));
    let result = run(&cfg)?;
    write_out(out.as_deref(), &result.to_csv())?;
    emit(&result.to_json());
    Ok(result.status())
}

fn dispatch(cmd: &Command) -> Outcome {
    let (Command::Lattice(c)
    | Command::Project(c)
    | Command::UniversalityCheck(c)
    | Command::Estimate(c)
    | Command::Predict(c)
    | Command::Divergence(c)
    | Command::Consistency(c)
    | Command::Bound(c)
    | Command::Redundancy(c)
    | Command::Markov(c)) = cmd;
    let text = read(&c.config)?;
    let out = c.out.as_deref();
    match cmd {
        Command::Lattice(_) => lattice_cmd(&text),
        Command::Project(_) => project_cmd(&text),
        Command::UniversalityCheck(_) => universality_cmd(&text, out),
        Command::Estimate(_) => estimate_cmd(&text),
        Command::Predict(_) => predict_cmd(&text),
        Command::Divergence(_) => divergence_cmd(&text),
        Command::Consistency(_) => experiment_cmd(ExperimentKind::Consistency, &text, out, c.seed),
        Command::Bound(_) => experiment_cmd(ExperimentKind::Bound, &text, out, c.seed),
        Command::Redundancy(_) => experiment_cmd(ExperimentKind::Redundancy, &text, out, c.seed),
        Command::Markov(_) => experiment_cmd(ExperimentKind::Markov, &text, out, c.seed),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli.command) {
        Ok(status) => ExitCode::from(status.exit_code() as u8),
        Err(Failure::Config(msg)) => {
            eprintln!("{msg}");
            ExitCode::from(EXIT_CONFIG)
        }
        Err(Failure::Other(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}
