use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use cnecc::config::NetworkConfig;
use cnecc::convcode::{free_distance, is_catastrophic, t_dfree};
use cnecc::decoder::bits_to_string;
use cnecc::errorsim::{derive_q, parse_p_grid, run_ber_with_progress, transmit, BerConfig};
use cnecc::subspace::decodability_report;
use cnecc::{
    decode, expected_rx_length, DecodeMode, DecoderConfig, Error, ErrorVector, Generator,
    ReferenceTable,
};

const L_CAP: usize = 16;

#[derive(Parser)]
#[command(
    name = "cnecc",
    version,
    about = "Convolutional network error correction toolkit"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// Network configuration (JSON).
    #[arg(long, global = true)]
    network: Option<PathBuf>,
    /// Input generator, e.g. "101 111"; overrides the file.
    #[arg(long, global = true)]
    generator: Option<String>,
    /// Sink to work on.
    #[arg(long, global = true)]
    sink: Option<String>,
    /// Window parameter.
    #[arg(long, global = true)]
    l: Option<usize>,
    #[arg(long, global = true, value_enum)]
    mode: Option<Mode>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    trials: Option<usize>,
    /// Probability grid: "0.1,0.2" or "start:stop:step".
    #[arg(long, global = true)]
    p: Option<String>,
    /// Output file; standard output when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Write the per-window survivor table to this file.
    #[arg(long, global = true)]
    trace: Option<PathBuf>,
    /// Input file: bits for `encode`, received words for `decode`.
    #[arg(long, global = true)]
    input: Option<PathBuf>,
    /// Error file for `encode`: one edge bit string per instant.
    #[arg(long, global = true)]
    errors: Option<PathBuf>,
    /// Input length, for `decode` and `ber`.
    #[arg(long, global = true)]
    x_len: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Code metrics and decodability per sink.
    Analyze,
    /// Reference table of combined errors.
    Table,
    /// Words received at a sink for the given input and errors.
    Encode,
    /// Minimum error weight decoding of received words.
    Decode,
    /// Monte-Carlo bit error rate, as CSV.
    Ber,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Global,
    Distributed,
}

impl From<Mode> for DecodeMode {
    fn from(m: Mode) -> Self {
        match m {
            Mode::Global => DecodeMode::Global,
            Mode::Distributed => DecodeMode::Distributed,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &anyhow::Error) -> u8 {
    match e.downcast_ref::<Error>() {
        Some(Error::Undecodable { .. }) => 4,
        Some(
            Error::InvalidArgument(_)
            | Error::Parse(_)
            | Error::Validation(_)
            | Error::InvalidProbability { .. },
        ) => 2,
        Some(_) => 3,
        None => 2,
    }
}

struct Ctx<'a> {
    args: &'a Common,
    config: NetworkConfig,
    input_generator: Option<Generator>,
}

impl Ctx<'_> {
    fn load(args: &Common) -> Result<Ctx<'_>> {
        let path = args
            .network
            .as_ref()
            .ok_or_else(|| usage("--network is required"))?;
        let config = NetworkConfig::from_path(path)?;
        let input_generator = args.generator.as_deref().map(str::parse).transpose()?;
        Ok(Ctx {
            args,
            config,
            input_generator,
        })
    }

    fn sink(&self) -> Result<String> {
        match (&self.args.sink, self.config.sinks.as_slice()) {
            (Some(s), _) => {
                self.config.transfer(s)?;
                Ok(s.clone())
            }
            (None, [only]) => Ok(only.clone()),
            (None, _) => Err(usage(
                "--sink is required when the network has several sinks",
            )),
        }
    }

    fn sinks(&self) -> Result<Vec<String>> {
        match &self.args.sink {
            Some(_) => Ok(vec![self.sink()?]),
            None => Ok(self.config.sinks.clone()),
        }
    }

    fn l(&self) -> Result<usize> {
        self.args
            .l
            .or(self.config.defaults.l)
            .ok_or_else(|| usage("no window parameter: pass --l or set `l` in the network file"))
    }

    fn generator(&self, sink: &str) -> Result<Generator> {
        Ok(self
            .config
            .output_generator(sink, self.input_generator.as_ref())?)
    }

    fn emit(&self, text: &str) -> Result<()> {
        write_out(self.args.out.as_deref(), text)
    }
}

fn usage(msg: &str) -> anyhow::Error {
    Error::InvalidArgument(msg.to_string()).into()
}

fn write_out(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn read_input(path: Option<&PathBuf>, what: &str) -> Result<String> {
    let path = path.ok_or_else(|| usage(&format!("--input with {what} is required")))?;
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn run(cli: &Cli) -> Result<()> {
    let ctx = Ctx::load(&cli.common)?;
    if ctx.config.sinks.is_empty() {
        bail!(Error::Validation("network has no sinks".into()));
    }
    match cli.command {
        Command::Analyze => analyze(&ctx),
        Command::Table => table(&ctx),
        Command::Encode => encode_cmd(&ctx),
        Command::Decode => decode_cmd(&ctx),
        Command::Ber => ber(&ctx),
    }
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map_or_else(|| "-".to_string(), |v| v.to_string())
}

fn yes_no(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

fn analyze(ctx: &Ctx) -> Result<()> {
    let mut out = String::new();
    let input = ctx
        .input_generator
        .as_ref()
        .or(ctx.config.generator.as_ref());
    if let Some(g) = input {
        writeln!(out, "input generator {} ({g})", g.to_algebraic())?;
        writeln!(out, "  d_free {}", opt(free_distance(g).ok()))?;
        writeln!(out, "  catastrophic {}", yes_no(is_catastrophic(g)))?;
    }
    for sink in ctx.sinks()? {
        let t = ctx.config.transfer(&sink)?;
        let g = ctx.generator(&sink)?;
        let report = decodability_report(&g, t, L_CAP, 4)?;
        let catastrophic = is_catastrophic(&g);
        writeln!(out, "sink {sink}")?;
        writeln!(out, "  output generator {} ({g})", g.to_algebraic())?;
        writeln!(out, "  d_free {}", opt(report.condition.d_free))?;
        writeln!(
            out,
            "  T_dfree {}",
            opt(if catastrophic { None } else { t_dfree(&g).ok() })
        )?;
        writeln!(out, "  catastrophic {}", yes_no(catastrophic))?;
        writeln!(out, "  l_t {}", t.l_t())?;
        writeln!(out, "  l_min {}", opt(report.l_min))?;
        writeln!(
            out,
            "  sufficient condition: bound {}, satisfied {}, l_gate {}",
            report.condition.bound,
            yes_no(report.condition.satisfied),
            opt(report.condition.l_gate)
        )?;
        for (l, ok) in &report.distributed {
            writeln!(out, "  distributed l={l} {}", yes_no(*ok))?;
        }
    }
    ctx.emit(&out)
}

fn table(ctx: &Ctx) -> Result<()> {
    let sink = ctx.sink()?;
    let t = ReferenceTable::build(ctx.config.transfer(&sink)?, ctx.l()?)?;
    ctx.emit(&t.to_text())
}

fn encode_cmd(ctx: &Ctx) -> Result<()> {
    let sink = ctx.sink()?;
    let l = ctx.l()?;
    let t = ctx.config.transfer(&sink)?;
    let g = ctx.generator(&sink)?;
    let x = parse_bits(&read_input(ctx.args.input.as_ref(), "input bits")?)?;
    let errors = match &ctx.args.errors {
        Some(p) => parse_errors(
            &fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?,
        )?,
        None => Vec::new(),
    };
    if errors.iter().any(|e| e.edges() != t.edge_count()) {
        bail!(Error::Parse(format!(
            "error vectors must have {} edges",
            t.edge_count()
        )));
    }
    let y = transmit(&g, t, &x, &errors, expected_rx_length(x.len(), &g, l));
    let omega = g.outputs();
    let text: String = y.iter().map(|w| format!("{w:0omega$b}\n")).collect();
    ctx.emit(&text)
}

fn decode_cmd(ctx: &Ctx) -> Result<()> {
    let sink = ctx.sink()?;
    let l = ctx.l()?;
    let g = ctx.generator(&sink)?;
    let table = ReferenceTable::build(ctx.config.transfer(&sink)?, l)?;
    let y = parse_words(
        &read_input(ctx.args.input.as_ref(), "received words")?,
        g.outputs(),
    )?;
    let mode = ctx
        .args
        .mode
        .map(DecodeMode::from)
        .or(ctx.config.defaults.mode)
        .unwrap_or(DecodeMode::Global);
    let mut cfg = DecoderConfig::new(l)
        .mode(mode)
        .trace(ctx.args.trace.is_some());
    if let Some(n) = ctx.args.x_len {
        cfg = cfg.input_length(n);
    }
    let r = decode(&y, &g, &table, &cfg)?;

    let mut out = String::new();
    writeln!(out, "decoded {}", bits_to_string(&r.decoded_input))?;
    writeln!(out, "weight {}", r.total_weight)?;
    for e in &r.emissions {
        writeln!(
            out,
            "emit [{},{}] {}",
            e.window_start,
            e.window_end,
            e.bit_string()
        )?;
    }
    if let Some(path) = &ctx.args.trace {
        let mut trace = String::new();
        for w in &r.trace {
            writeln!(trace, "[{},{}]", w.start, w.end)?;
            for row in &w.rows {
                writeln!(trace, "{row}")?;
            }
            trace.push('\n');
        }
        write_out(Some(path), &trace)?;
    }
    ctx.emit(&out)
}

fn ber(ctx: &Ctx) -> Result<()> {
    let l = ctx.l()?;
    let p_grid =
        match &ctx.args.p {
            Some(s) => parse_p_grid(s)?,
            None => ctx.config.defaults.p.clone().ok_or_else(|| {
                usage("no probability grid: pass --p or set `p` in the network file")
            })?,
        };
    let edges = ctx.config.edge_count();
    for &p in &p_grid {
        derive_q(p, edges)?;
    }
    let d = &ctx.config.defaults;
    let defaults = BerConfig::default();
    let cfg = BerConfig {
        l,
        p_grid,
        trials: ctx.args.trials.or(d.trials).unwrap_or(defaults.trials),
        x_len: ctx.args.x_len.or(d.x_len).unwrap_or(defaults.x_len),
        seed: ctx.args.seed.or(d.seed).unwrap_or(defaults.seed),
    };
    let sinks = ctx
        .sinks()?
        .iter()
        .map(|s| ctx.config.sink_setup(s, l, ctx.input_generator.as_ref()))
        .collect::<cnecc::Result<Vec<_>>>()?;
    let n = cfg.p_grid.len();
    let report = run_ber_with_progress(&sinks, &cfg, |i, p| {
        eprintln!("p={p} done ({}/{n})", i + 1);
    })?;
    ctx.emit(&report.to_csv())
}

fn parse_bits(text: &str) -> Result<Vec<bool>> {
    text.chars()
        .filter(|c| !c.is_whitespace())
        .map(|c| match c {
            '0' => Ok(false),
            '1' => Ok(true),
            _ => Err(anyhow!(Error::Parse(format!(
                "unexpected character {c:?} in bit string"
            )))),
        })
        .collect()
}

/// Whitespace-separated binary words of exactly `omega` bits.
fn parse_words(text: &str, omega: usize) -> Result<Vec<u64>> {
    text.split_whitespace()
        .map(|w| {
            if w.len() != omega || !w.chars().all(|c| c == '0' || c == '1') {
                bail!(Error::Parse(format!("word {w:?} is not {omega} bits")));
            }
            Ok(u64::from_str_radix(w, 2)?)
        })
        .collect()
}

/// One error vector per line; blank lines and `#` comments are skipped.
fn parse_errors(text: &str) -> Result<Vec<ErrorVector>> {
    text.lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .filter(|l| !l.is_empty())
        .map(|l| Ok(ErrorVector::parse(l)?))
        .collect()
}
