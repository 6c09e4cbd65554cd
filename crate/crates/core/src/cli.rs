//! The `towerforge` command line.

use std::error::Error;
use std::fs;
use std::io::{self, BufRead, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::eval::{
    format_table, measure_throughput, run_protocol, AgentPolicy, Protocol, RandomAgent, RemoteAgent, RunOptions,
    ScriptedSolver, THROUGHPUT_FLOORS,
};
use crate::floor::{Theme, TowerGenerator};
use crate::room::TemplateLibrary;
use crate::service::{resolve_port, Server, DEFAULT_CAPACITY, DEFAULT_PORT};
use crate::sim::{ascii_view, Action, Camera, Environment, EpisodeConfig, Jump, MoveFb, MoveLr, RewardMode};

type CliResult = Result<(), Box<dyn Error>>;

#[derive(Parser, Debug)]
#[command(name = "towerforge", version, about = "Procedural tower generation, simulation and evaluation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write floor plans as JSON.
    Generate(GenerateArgs),
    /// Check a room template file (the built-in set by default).
    ValidateTemplates(ValidateArgs),
    /// Play in the terminal; one chord per input line.
    Play(PlayArgs),
    /// Run an evaluation protocol and write the report.
    Eval(EvalArgs),
    /// Time simulator steps on a set of floors.
    Bench(BenchArgs),
    /// Serve environments over TCP and WebSocket.
    Serve(ServeArgs),
}

#[derive(Args, Debug, Clone)]
struct EpisodeArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0)]
    dynamics_seed: u64,
    #[arg(long, value_enum, default_value_t = ModeArg::Sparse)]
    reward_mode: ModeArg,
    /// Comma-separated theme pool.
    #[arg(long, value_enum, value_delimiter = ',')]
    themes: Vec<ThemeArg>,
    #[arg(long, default_value_t = 25)]
    max_floor: u32,
}

impl EpisodeArgs {
    fn config(&self) -> EpisodeConfig {
        let mut c = EpisodeConfig::with_seeds(self.seed, self.dynamics_seed);
        c.reward_mode = self.reward_mode.into();
        c.max_floor = self.max_floor;
        if !self.themes.is_empty() {
            c.theme_pool = self.themes.iter().map(|t| (*t).into()).collect();
        }
        c
    }
}

#[derive(Args, Debug)]
struct GenerateArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// A single floor.
    #[arg(long, conflicts_with = "floors")]
    floor: Option<u32>,
    /// Floors `0..N`, written as a JSON array.
    #[arg(long)]
    floors: Option<u32>,
    #[arg(long, value_enum, value_delimiter = ',')]
    themes: Vec<ThemeArg>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ValidateArgs {
    /// Template JSON file.
    path: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct PlayArgs {
    #[command(flatten)]
    episode: EpisodeArgs,
}

#[derive(Args, Debug)]
struct EvalArgs {
    #[arg(long, value_enum, default_value_t = ProtocolArg::Weak)]
    protocol: ProtocolArg,
    #[arg(long, value_enum, default_value_t = AgentArg::Random)]
    agent: AgentArg,
    /// Address of a remote agent host.
    #[arg(long, required_if_eq("agent", "remote"))]
    connect: Option<String>,
    /// Protocol seed; train, test and dynamics seeds derive from it.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0)]
    agent_seed: u64,
    #[arg(long, default_value_t = 1)]
    workers: usize,
    /// Decisions per train seed in the train phase.
    #[arg(long, default_value_t = 200)]
    train_steps: u64,
    #[arg(long, value_enum, default_value_t = ModeArg::Sparse)]
    reward_mode: ModeArg,
    #[arg(long, value_enum, value_delimiter = ',')]
    themes: Vec<ThemeArg>,
    #[arg(long, default_value_t = 25)]
    max_floor: u32,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct BenchArgs {
    #[arg(long, value_delimiter = ',', default_values_t = THROUGHPUT_FLOORS)]
    floors: Vec<u32>,
    #[arg(long, default_value_t = 5)]
    seeds: usize,
    #[arg(long, default_value_t = 500)]
    steps: usize,
    #[arg(long, default_value_t = 84)]
    raster: u32,
    /// Also write the rows as JSON.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ServeArgs {
    #[arg(long, default_value = "127.0.0.1")]
    host: String,
    /// Overridden by TOWERFORGE_PORT.
    #[arg(long, default_value_t = DEFAULT_PORT)]
    port: u16,
    #[arg(long, default_value_t = DEFAULT_CAPACITY)]
    capacity: usize,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum ModeArg {
    Sparse,
    Dense,
}

impl From<ModeArg> for RewardMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Sparse => RewardMode::Sparse,
            ModeArg::Dense => RewardMode::Dense,
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum ThemeArg {
    Ancient,
    Moorish,
    Industrial,
    Modern,
    Future,
}

impl From<ThemeArg> for Theme {
    fn from(t: ThemeArg) -> Self {
        match t {
            ThemeArg::Ancient => Theme::Ancient,
            ThemeArg::Moorish => Theme::Moorish,
            ThemeArg::Industrial => Theme::Industrial,
            ThemeArg::Modern => Theme::Modern,
            ThemeArg::Future => Theme::Future,
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum ProtocolArg {
    None,
    Weak,
    Strong,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum AgentArg {
    Random,
    Solver,
    Remote,
}

/// Entry point for the binary: real stdio, returns the exit code.
pub fn cli_main(argv: impl IntoIterator<Item = String>) -> i32 {
    let stdin = io::stdin();
    let mut input = stdin.lock();
    let mut out = io::stdout().lock();
    let mut err = io::stderr().lock();
    run(argv, &mut input, &mut out, &mut err)
}

/// Runs one command. Usage errors exit with 2, failures with 1.
pub fn run(
    argv: impl IntoIterator<Item = String>,
    input: &mut dyn BufRead,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> i32 {
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            let _ = if code == 0 { out.write_all(text.as_bytes()) } else { err.write_all(text.as_bytes()) };
            return code;
        }
    };
    let result = match cli.command {
        Command::Generate(a) => generate(a, out),
        Command::ValidateTemplates(a) => validate_templates(a, out),
        Command::Play(a) => play(a, input, out),
        Command::Eval(a) => eval(a, out),
        Command::Bench(a) => bench(a, out),
        Command::Serve(a) => serve(a, out),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            1
        }
    }
}

fn emit(text: &str, path: Option<&PathBuf>, out: &mut dyn Write) -> CliResult {
    match path {
        Some(p) => fs::write(p, text)?,
        None => writeln!(out, "{text}")?,
    }
    Ok(())
}

fn generate(a: GenerateArgs, out: &mut dyn Write) -> CliResult {
    let g = TowerGenerator::builtin();
    let pool: Vec<Theme> = if a.themes.is_empty() {
        Theme::ALL.to_vec()
    } else {
        a.themes.iter().map(|t| (*t).into()).collect()
    };
    let text = match a.floors {
        Some(n) => {
            let plans = (0..n)
                .map(|f| g.assemble_floor(f, a.seed, &pool))
                .collect::<Result<Vec<_>, _>>()?;
            serde_json::to_string_pretty(&plans)?
        }
        None => serde_json::to_string_pretty(&g.assemble_floor(a.floor.unwrap_or(0), a.seed, &pool)?)?,
    };
    emit(&text, a.out.as_ref(), out)
}

fn validate_templates(a: ValidateArgs, out: &mut dyn Write) -> CliResult {
    let lib = match &a.path {
        Some(p) => TemplateLibrary::from_json(&fs::read_to_string(p)?)?,
        None => TemplateLibrary::builtin(),
    };
    let name = a.path.as_ref().map_or("built-in templates".into(), |p| p.display().to_string());
    writeln!(out, "{name}: {} templates ok", lib.templates().len())?;
    Ok(())
}

/// Reads a chord such as `w`, `wj` or `a e`: w/s forward/back, a/d
/// strafe, q/e turn left/right, j or space jump. Forward beats back and
/// left beats right when both are held.
pub fn parse_chord(line: &str) -> Action {
    let has = |c: char| line.contains(c);
    let fb = if has('w') {
        MoveFb::Forward
    } else if has('s') {
        MoveFb::Backward
    } else {
        MoveFb::NoOp
    };
    let lr = if has('a') {
        MoveLr::Left
    } else if has('d') {
        MoveLr::Right
    } else {
        MoveLr::NoOp
    };
    let camera = if has('q') {
        Camera::CounterClockwise
    } else if has('e') {
        Camera::Clockwise
    } else {
        Camera::NoOp
    };
    let jump = if has('j') || has(' ') { Jump::Jump } else { Jump::NoOp };
    Action::new(fb, lr, camera, jump)
}

fn hud(env: &Environment) -> String {
    let st = env.state();
    format!(
        "floor {}  keys {}  time {}  theme {:?}",
        st.floor_index,
        st.keys_held,
        st.time_remaining,
        env.plan().theme
    )
}

fn play(a: PlayArgs, input: &mut dyn BufRead, out: &mut dyn Write) -> CliResult {
    let mut env = Environment::new(a.episode.config())?;
    write!(out, "{}{}\n> ", ascii_view(&env), hud(&env))?;
    out.flush()?;
    let mut total = 0.0;
    let mut line = String::new();
    loop {
        line.clear();
        if input.read_line(&mut line)? == 0 || line.trim() == "quit" {
            break;
        }
        let r = env.step(parse_chord(line.trim_end_matches(['\n', '\r'])))?;
        total += r.reward;
        write!(out, "{}{}  reward {}", ascii_view(&env), hud(&env), r.reward)?;
        if r.done {
            writeln!(out, "\nepisode over: {:?}", r.info.termination)?;
            break;
        }
        write!(out, "\n> ")?;
        out.flush()?;
    }
    writeln!(out, "floors {}  return {total}", env.state().totals.floors)?;
    Ok(())
}

fn eval(a: EvalArgs, out: &mut dyn Write) -> CliResult {
    let protocol = match a.protocol {
        ProtocolArg::None => Protocol::no_generalization(a.seed),
        ProtocolArg::Weak => Protocol::weak(a.seed),
        ProtocolArg::Strong => Protocol::strong(a.seed),
    };
    let mut config = EpisodeConfig {
        reward_mode: a.reward_mode.into(),
        max_floor: a.max_floor,
        ..EpisodeConfig::default()
    };
    if !a.themes.is_empty() {
        config.theme_pool = a.themes.iter().map(|t| (*t).into()).collect();
    }
    let mut agent: Box<dyn AgentPolicy> = match a.agent {
        AgentArg::Random => Box::new(RandomAgent::new(a.agent_seed)),
        AgentArg::Solver => Box::new(ScriptedSolver::new()),
        AgentArg::Remote => Box::new(RemoteAgent::new(a.connect.clone().unwrap_or_default())),
    };
    let options = RunOptions {
        workers: a.workers.max(1),
        train_steps_per_seed: a.train_steps,
    };
    let report = run_protocol(agent.as_mut(), &protocol, &config, options)?;
    let t = report.test;
    let summary = format!(
        "{} {:?}: floors mean {:.3} std {:.3} max {} over {} episodes",
        report.fingerprint.agent, protocol.kind, t.mean, t.std, t.max, t.episodes
    );
    match &a.out {
        Some(p) => {
            fs::write(p, report.to_json())?;
            writeln!(out, "{summary}")?;
            writeln!(out, "report written to {}", p.display())?;
        }
        None => writeln!(out, "{}", report.to_json())?,
    }
    Ok(())
}

fn bench(a: BenchArgs, out: &mut dyn Write) -> CliResult {
    let base = EpisodeConfig {
        raster_size: a.raster,
        ..EpisodeConfig::default()
    };
    base.validate()?;
    let rows = measure_throughput(&a.floors, a.seeds, a.steps, &base)?;
    write!(out, "{}", format_table(&rows))?;
    if let Some(p) = &a.out {
        fs::write(p, serde_json::to_string_pretty(&rows)?)?;
    }
    Ok(())
}

fn serve(a: ServeArgs, out: &mut dyn Write) -> CliResult {
    let port = resolve_port(a.port)?;
    let server = Server::bind((a.host.as_str(), port), a.capacity)?;
    writeln!(out, "listening on {}", server.local_addr()?)?;
    out.flush()?;
    server.run()?;
    Ok(())
}
