//! `reachsim` command-line front end.
//!
//! Exit codes: 0 success, 1 a check failed, 2 bad input, 3 the engine stopped
//! at its cap or deadline.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use reachsim::bench::{self, BenchConfig, BenchEngine, SuiteSpec};
use reachsim::check::{self, RunReport, Theorem};
use reachsim::engine::explicit::{run_explicit, run_refalgo, sim_fixpoint};
use reachsim::engine::partition::run_partition;
use reachsim::engine::twopr::{run_twopr, run_twopr_symbolic};
use reachsim::engine::{BranchPolicy, Counters, EngineConfig, EngineOutcome, PickPolicy, Stop, Strategy};
use reachsim::lts::parse_init;
use reachsim::oracle::GroundTruth;
use reachsim::region::symbolic;
use reachsim::{gen, Error, Lts, Relation, StateSet};

#[derive(Parser)]
#[command(name = "reachsim", version, about = "Reachable simulation preorder and partition")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an engine and print its result as JSON.
    Run(RunArgs),
    /// Print the reference ground truth of an instance as JSON.
    Oracle(InstanceArgs),
    /// Check a run report against the ground truth.
    Check(CheckArgs),
    /// Write a random system.
    GenRandom(GenArgs),
    /// Write the layered unrolling of a system.
    Unroll(UnrollArgs),
    /// Time the explicit and 2PR engines on a suite.
    Bench(BenchArgs),
    /// Parse an instance and its preorder and report problems.
    Validate(InstanceArgs),
}

#[derive(Args)]
struct InstanceArgs {
    /// System in `.aut` form; a `.init` file next to it lists extra initial states.
    #[arg(long)]
    input: PathBuf,
    /// `universal`, `identity`, `partition:FILE` or `pairs:FILE`.
    #[arg(long, default_value = "universal")]
    preorder: String,
    /// Close a `pairs:` preorder reflexively and transitively.
    #[arg(long)]
    close: bool,
    /// Write here instead of stdout.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum EngineName {
    Explicit,
    Partition,
    Twopr,
    Sim,
    Refalgo,
    Oracle,
}

#[derive(Clone, Copy, ValueEnum)]
enum SystemName {
    /// States `(−∞, 1]`, `n → n+1` for `n ≤ −2` and `0 → 1`, initial state 0.
    LeftChain,
    /// States `[0, ∞)`, `n → 0` for `n ≥ 1`, initial state 1.
    CollapseToZero,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long, value_enum, default_value = "explicit")]
    engine: EngineName,
    /// System in `.aut` form; required unless `--system` is given.
    #[arg(long, required_unless_present = "system")]
    input: Option<PathBuf>,
    /// A built-in infinite system, run with the 2PR engine.
    #[arg(long, value_enum, conflicts_with = "input")]
    system: Option<SystemName>,
    #[arg(long, default_value = "universal")]
    preorder: String,
    #[arg(long)]
    close: bool,
    /// `empty`, `initials` or `file:FILE` (whitespace-separated state ids).
    #[arg(long, default_value = "empty")]
    sigma: String,
    #[arg(long, default_value = "search-first")]
    branch: BranchPolicy,
    #[arg(long, default_value = "min")]
    pick: PickPolicy,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = reachsim::engine::DEFAULT_CAP)]
    cap: u64,
    /// Wall-clock limit in seconds.
    #[arg(long)]
    timeout: Option<f64>,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct CheckArgs {
    #[command(flatten)]
    instance: InstanceArgs,
    /// A JSON report written by `run`.
    #[arg(long)]
    report: PathBuf,
    /// `1` (explicit), `3` (2PR) or `5` (partition).
    #[arg(long)]
    theorem: Theorem,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    states: usize,
    #[arg(long, default_value_t = 1)]
    labels: usize,
    /// Probability of each possible transition.
    #[arg(long, default_value_t = 0.15)]
    density: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Generate a cycle through all states plus `--extra` random edges instead.
    #[arg(long)]
    strongly_connected: bool,
    #[arg(long, default_value_t = 0)]
    extra: usize,
    #[arg(long)]
    output: PathBuf,
}

#[derive(Args)]
struct UnrollArgs {
    #[arg(long)]
    input: PathBuf,
    /// Number of extra layers below the one holding the initial states.
    #[arg(long)]
    copies: usize,
    #[arg(long)]
    output: PathBuf,
}

#[derive(Args)]
struct BenchArgs {
    /// Directory of `.aut` files.
    #[arg(long, required_unless_present = "generate")]
    suite: Option<PathBuf>,
    /// Instead of a directory, generate this many unrolled random instances.
    #[arg(long, conflicts_with = "suite")]
    generate: Option<usize>,
    #[arg(long, default_value_t = 250)]
    core_states: usize,
    #[arg(long, default_value_t = 39)]
    depth: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_delimiter = ',', default_value = "explicit,twopr")]
    engines: Vec<BenchEngine>,
    #[arg(long, default_value_t = 1)]
    repeat: usize,
    /// Per-run limit in seconds.
    #[arg(long, default_value_t = 60.0)]
    timeout: f64,
    #[arg(long)]
    csv: Option<PathBuf>,
}

enum Failure {
    Check(String),
    Input(Error),
    Budget(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Input(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Input(e.into())
    }
}

type Outcome = Result<(), Failure>;

fn emit(out: &Option<PathBuf>, text: &str) -> Outcome {
    match out {
        Some(p) => fs::write(p, text)?,
        None => match writeln!(std::io::stdout(), "{text}") {
            // a closed pipe (e.g. `| head`) is not an error
            Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => {}
            r => r?,
        },
    }
    Ok(())
}

fn load_instance(input: &Path, preorder: &str, close: bool) -> Result<(Lts, Relation), Error> {
    let lts = Lts::load(input)?;
    let r = Relation::from_source(preorder, lts.n_states(), close)?;
    Ok((lts, r))
}

fn sigma_init(policy: &str, lts: &Lts) -> Result<StateSet, Error> {
    match policy.split_once(':') {
        None if policy == "empty" => Ok(lts.empty_set()),
        None if policy == "initials" => Ok(lts.initial().clone()),
        Some(("file", path)) => {
            let text = fs::read_to_string(path)?;
            let ids = parse_init(&text.split_whitespace().collect::<Vec<_>>().join("\n"))?;
            if let Some(&x) = ids.iter().find(|&&x| x as usize >= lts.n_states()) {
                return Err(Error::Consistency(format!(
                    "σ file names state {x}, system has {} states",
                    lts.n_states()
                )));
            }
            Ok(StateSet::from_iter_with(lts.n_states(), ids))
        }
        _ => Err(Error::Consistency(format!("unknown σ policy `{policy}`"))),
    }
}

fn fixed<T>(result: T, sigma: StateSet) -> EngineOutcome<T> {
    EngineOutcome {
        result,
        sigma,
        counters: Counters::default(),
        elapsed: Duration::ZERO,
        stop: Stop::Done,
        trace: Vec::new(),
    }
}

fn finished(stop: Stop) -> Outcome {
    match stop {
        Stop::Done => Ok(()),
        Stop::Cap => Err(Failure::Budget("iteration cap reached".into())),
        Stop::Timeout => Err(Failure::Budget("deadline passed".into())),
    }
}

fn run(a: RunArgs) -> Outcome {
    let mut cfg = EngineConfig::with_strategy(Strategy::new(a.branch, a.pick, a.seed)).cap(a.cap);
    if let Some(t) = a.timeout {
        cfg = cfg.timeout(Duration::from_secs_f64(t));
    }
    if let Some(sys) = a.system {
        let (sys, t0) = match sys {
            SystemName::LeftChain => (symbolic::left_chain(), symbolic::left_chain_preorder()),
            SystemName::CollapseToZero => {
                let s = symbolic::collapse_to_zero();
                let t = symbolic::universal_on(reachsim::RegionAlgebra::universe(&s));
                (s, t)
            }
        };
        let out = run_twopr_symbolic(&sys, t0, [], &cfg)?;
        let json = serde_json::json!({
            "system": sys.name,
            "sigma": out.sigma,
            "twopr": out.result,
            "counters": out.counters,
            "final": out.is_final(),
            "stop": out.stop,
        });
        emit(&a.output, &serde_json::to_string_pretty(&json).unwrap())?;
        return finished(out.stop);
    }
    let input = a.input.as_deref().expect("clap requires input without system");
    let (lts, ri) = load_instance(input, &a.preorder, a.close)?;
    let sigma = sigma_init(&a.sigma, &lts)?;
    let report = match a.engine {
        EngineName::Explicit => RunReport::from_relation(&lts, &ri, "explicit", &run_explicit(&lts, &ri, &sigma, &cfg)?),
        EngineName::Partition => {
            RunReport::from_relation(&lts, &ri, "partition", &run_partition(&lts, &ri, &sigma, &cfg)?)
        }
        EngineName::Twopr => RunReport::from_twopr(&lts, &ri, "twopr", &run_twopr(&lts, &ri, &sigma, &cfg)?),
        EngineName::Refalgo => {
            RunReport::from_relation(&lts, &ri, "refalgo", &run_refalgo(&lts, &ri, &sigma, &cfg)?)
        }
        EngineName::Sim => {
            let r = sim_fixpoint(&lts, &ri)?;
            RunReport::from_relation(&lts, &ri, "sim", &fixed(r, lts.empty_set()))
        }
        EngineName::Oracle => {
            let g = GroundTruth::compute(&lts, &ri)?;
            RunReport::from_relation(&lts, &ri, "oracle", &fixed(g.rsim, g.reach))
        }
    };
    emit(&a.output, &report.to_json())?;
    finished(report.stop)
}

fn oracle(a: InstanceArgs) -> Outcome {
    let (lts, ri) = load_instance(&a.input, &a.preorder, a.close)?;
    let g = GroundTruth::compute(&lts, &ri)?;
    emit(&a.output, &serde_json::to_string_pretty(&g).unwrap())
}

fn check_cmd(a: CheckArgs) -> Outcome {
    let (lts, ri) = load_instance(&a.instance.input, &a.instance.preorder, a.instance.close)?;
    let report = RunReport::from_json(&fs::read_to_string(&a.report)?)?;
    let truth = GroundTruth::compute(&lts, &ri)?;
    let res = check::check(&report, &lts, &ri, &truth, a.theorem)?;
    emit(&a.instance.output, res.to_string().trim_end())?;
    if !res.passed() {
        return Err(Failure::Check("some clause fails".into()));
    }
    if !report.is_final {
        return Err(Failure::Check("report is not final".into()));
    }
    Ok(())
}

fn gen_random(a: GenArgs) -> Outcome {
    if a.states == 0 || !(a.density > 0.0 && a.density <= 1.0) {
        return Err(Failure::Input(Error::Contract(
            "need at least one state and 0 < density ≤ 1".into(),
        )));
    }
    let lts = if a.strongly_connected {
        gen::gen_strongly_connected(a.states, a.labels.max(1), a.extra, a.seed)
    } else {
        gen::gen_random(a.states, a.labels, a.density, a.seed)
    };
    lts.save(&a.output)?;
    Ok(())
}

fn unroll(a: UnrollArgs) -> Outcome {
    let lts = Lts::load(&a.input)?;
    gen::unroll(&lts, a.copies).save(&a.output)?;
    Ok(())
}

fn bench_cmd(a: BenchArgs) -> Outcome {
    let suite = match (&a.suite, a.generate) {
        (Some(dir), _) => bench::load_suite(dir)?,
        (None, Some(n)) => bench::unrolled_suite(&SuiteSpec {
            instances: n,
            core_states: a.core_states,
            depth: a.depth,
            seed: a.seed,
            ..SuiteSpec::default()
        }),
        (None, None) => unreachable!("clap requires one source"),
    };
    let cfg = BenchConfig {
        engines: a.engines,
        repeat: a.repeat,
        timeout: Duration::from_secs_f64(a.timeout),
    };
    let rows = bench::bench_suite(&suite, &cfg)?;
    match &a.csv {
        Some(p) => bench::write_csv(&rows, fs::File::create(p)?)?,
        None => bench::write_csv(&rows, std::io::stdout().lock())?,
    }
    Ok(())
}

fn validate(a: InstanceArgs) -> Outcome {
    let (lts, ri) = load_instance(&a.input, &a.preorder, a.close)?;
    ri.require_preorder()?;
    let classes = ri.principal_partition().len();
    let msg = format!(
        "{} states, {} transitions, {} labels, {} initial, preorder with {} classes",
        lts.n_states(),
        lts.n_transitions(),
        lts.n_labels(),
        lts.initial().len(),
        classes
    );
    emit(&a.output, &msg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match cli.command {
        Command::Run(a) => run(a),
        Command::Oracle(a) => oracle(a),
        Command::Check(a) => check_cmd(a),
        Command::GenRandom(a) => gen_random(a),
        Command::Unroll(a) => unroll(a),
        Command::Bench(a) => bench_cmd(a),
        Command::Validate(a) => validate(a),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Check(m)) => {
            eprintln!("check failed: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Input(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(Failure::Budget(m)) => {
            eprintln!("stopped early: {m}");
            ExitCode::from(3)
        }
    }
}
