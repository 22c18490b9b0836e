mod config;

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use grandmo::sim::{buffered_bits, curve_of};
use grandmo::{
    ebn0_at_target_bler, grand_decode, interleave::parse_interleaver, AbandonmentRule, BerlekampMassey, BitMatrix,
    BitWord, Burstiness, ChannelPoint, CodeFamily, CodeSpec, CsvSink, DecodeStatus, DecoderKind, DeltaRounding, Error,
    Experiment, HardDecoder, LinearCode, MajorityLogic, MarkovParams, PMode, PatternOrder, Schedule, SimConfig,
    StopRule,
};

#[derive(Parser)]
#[command(name = "grandmo", version, about = "GRAND decoding for bursty Markov channels")]
struct Cli {
    /// Line-based key=value file; its entries override command-line flags.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write generator and parity-check matrices of a code.
    Codegen(CodegenArgs),
    /// List noise patterns in query order.
    Patterns(PatternsArgs),
    /// Decode one received word.
    Decode(DecodeArgs),
    /// Monte Carlo BLER sweep, CSV output.
    Simulate(SimulateArgs),
    /// Interleaved B-M against un-interleaved GRAND-MO.
    InterleaveStudy(StudyArgs),
}

#[derive(Args)]
#[command(args_override_self = true)]
struct CodegenArgs {
    /// bch, rm[:R:M] or rlc[:N:K[:SEED]]
    #[arg(long, default_value = "bch")]
    code: String,
    /// Write PREFIX.G.txt, PREFIX.H.txt and PREFIX.meta instead of printing.
    #[arg(long, value_name = "PREFIX")]
    out: Option<PathBuf>,
}

#[derive(Args)]
#[command(args_override_self = true)]
struct ChannelArgs {
    /// Eb/N0 in dB.
    #[arg(long, allow_hyphen_values = true)]
    ebn0: Option<String>,
    /// Stationary flip probability; overrides --ebn0.
    #[arg(long)]
    p: Option<f64>,
    /// Burst exit probability, or "bsc".
    #[arg(long, default_value = "bsc")]
    g: String,
    #[arg(long = "p-mode", default_value = "paper")]
    p_mode: String,
}

#[derive(Args)]
#[command(args_override_self = true)]
struct PatternsArgs {
    #[arg(long, default_value_t = 6)]
    n: usize,
    #[command(flatten)]
    channel: ChannelArgs,
    /// Code rate used with --ebn0.
    #[arg(long, default_value_t = 106.0 / 127.0)]
    rate: f64,
    /// Use this Δl instead of the channel's.
    #[arg(long = "delta-l")]
    delta_l: Option<usize>,
    /// Abandonment rule M,L.
    #[arg(long, default_value = "3,3")]
    rule: String,
    /// bundled or exact
    #[arg(long, default_value = "bundled")]
    order: String,
    /// Stop after this many patterns.
    #[arg(long, default_value_t = 100)]
    limit: u64,
}

#[derive(Args)]
#[command(args_override_self = true)]
struct DecodeArgs {
    #[arg(long, default_value = "bch")]
    code: String,
    /// Generator matrix file; overrides --code.
    #[arg(long, value_name = "FILE")]
    generator: Option<PathBuf>,
    /// grandmo, grand-bsc, bm or ml
    #[arg(long, default_value = "grandmo")]
    decoder: String,
    #[command(flatten)]
    channel: ChannelArgs,
    /// Abandonment rule M,L; defaults from the code.
    #[arg(long)]
    rule: Option<String>,
    #[arg(long = "query-cap")]
    query_cap: Option<u64>,
    /// Received word as 0/1 characters or 0x-prefixed hex.
    #[arg(long)]
    word: String,
}

#[derive(Args)]
#[command(args_override_self = true)]
struct SweepArgs {
    #[arg(long, default_value = "bch")]
    code: String,
    /// Comma list of grandmo, grand-bsc, bm, ml.
    #[arg(long, default_value = "grandmo")]
    decoder: String,
    /// Comma list or START:STOP:STEP range, in dB.
    #[arg(long, default_value = "0:8:0.5", allow_hyphen_values = true)]
    ebn0: String,
    /// Comma list of g values and/or "bsc".
    #[arg(long, default_value = "bsc")]
    g: String,
    #[arg(long = "p-mode", default_value = "paper")]
    p_mode: String,
    #[arg(long, default_value = "1")]
    seed: u64,
    #[arg(long)]
    rule: Option<String>,
    #[arg(long = "query-cap")]
    query_cap: Option<u64>,
    #[arg(long = "min-errors", default_value_t = 100)]
    min_errors: u64,
    #[arg(long = "max-trials", default_value_t = 1_000_000)]
    max_trials: u64,
    /// Stop a curve after its first point below this BLER.
    #[arg(long = "bler-floor")]
    bler_floor: Option<f64>,
    /// Worker threads (also capped by GRANDMO_THREADS).
    #[arg(long)]
    threads: Option<usize>,
    /// CSV output file; stdout when absent.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Args)]
#[command(args_override_self = true)]
struct SimulateArgs {
    #[command(flatten)]
    sweep: SweepArgs,
    /// matrix, random or none
    #[arg(long, default_value = "none")]
    interleaver: String,
    #[arg(long, default_value_t = 1)]
    packets: usize,
}

#[derive(Args)]
#[command(args_override_self = true)]
struct StudyArgs {
    #[command(flatten)]
    sweep: SweepArgs,
    /// matrix or random
    #[arg(long, default_value = "matrix")]
    interleaver: String,
    /// Comma list of interleaving depths.
    #[arg(long, default_value = "1,4,16,64")]
    packets: String,
    /// Report the Eb/N0 reaching this BLER on stderr.
    #[arg(long, default_value_t = 1e-2)]
    target: f64,
}

enum Failure {
    Config(String),
    Io(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Io(m) => Failure::Io(m),
            other => Failure::Config(other.to_string()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

type Res<T> = Result<T, Failure>;

fn cfg_err(msg: impl Into<String>) -> Failure {
    Failure::Config(msg.into())
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let argv = match config::merge_config(argv) {
        Ok(a) => a,
        Err(e) => return report(e),
    };
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let result = match cli.command {
        Command::Codegen(a) => codegen(a),
        Command::Patterns(a) => patterns(a),
        Command::Decode(a) => decode(a),
        Command::Simulate(a) => simulate(a),
        Command::InterleaveStudy(a) => interleave_study(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => report(e),
    }
}

fn report(e: Failure) -> ExitCode {
    match e {
        Failure::Config(m) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        // a closed pipe (`grandmo patterns | head`) is not an error
        Failure::Io(m) if m.contains("Broken pipe") => ExitCode::SUCCESS,
        Failure::Io(m) => {
            eprintln!("i/o error: {m}");
            ExitCode::from(3)
        }
    }
}

fn parse<T: std::str::FromStr>(what: &str, s: &str) -> Res<T> {
    s.trim().parse().map_err(|_| cfg_err(format!("invalid {what}: {s:?}")))
}

fn parse_rule(s: &str) -> Res<(usize, usize)> {
    let (m, l) = s
        .split_once(',')
        .ok_or_else(|| cfg_err(format!("rule must be M,L, got {s:?}")))?;
    let rule = (parse("rule", m)?, parse("rule", l)?);
    AbandonmentRule::new(rule.0, rule.1)?;
    Ok(rule)
}

/// Comma list, or an inclusive `START:STOP:STEP` range.
fn parse_grid(s: &str) -> Res<Vec<f64>> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() == 3 {
        let (a, b, step): (f64, f64, f64) = (
            parse("grid", parts[0])?,
            parse("grid", parts[1])?,
            parse("grid", parts[2])?,
        );
        if step.is_nan() || step <= 0.0 || b < a {
            return Err(cfg_err(format!("bad range {s:?}")));
        }
        let count = ((b - a) / step + 1e-9).floor() as usize;
        return Ok((0..=count).map(|i| a + i as f64 * step).collect());
    }
    s.split(',').map(|x| parse("grid value", x)).collect()
}

fn parse_list<T>(s: &str, f: impl Fn(&str) -> Result<T, Error>) -> Res<Vec<T>> {
    s.split(',').map(|x| f(x.trim()).map_err(Failure::from)).collect()
}

fn load_code(code: &str, generator: Option<&Path>) -> Res<LinearCode> {
    match generator {
        Some(path) => {
            let g = BitMatrix::read_text(BufReader::new(File::open(path)?))?;
            Ok(LinearCode::from_generator(g, CodeFamily::Custom, None)?)
        }
        None => Ok(code.parse::<CodeSpec>()?.build()?),
    }
}

fn codegen(a: CodegenArgs) -> Res<()> {
    let code = load_code(&a.code, None)?;
    match a.out {
        Some(prefix) => {
            let with = |ext: &str| {
                let mut p = prefix.clone().into_os_string();
                p.push(ext);
                PathBuf::from(p)
            };
            code.generator()
                .write_text(BufWriter::new(File::create(with(".G.txt"))?))?;
            code.parity()
                .write_text(BufWriter::new(File::create(with(".H.txt"))?))?;
            std::fs::write(with(".meta"), format!("{}\n", code.metadata_line()))?;
        }
        None => {
            let mut out = io::stdout().lock();
            writeln!(out, "{}", code.metadata_line())?;
            code.generator().write_text(&mut out)?;
            code.parity().write_text(&mut out)?;
        }
    }
    Ok(())
}

fn channel_params(c: &ChannelArgs, rate: f64, n: usize) -> Res<MarkovParams> {
    let burst: Burstiness = c.g.parse()?;
    let mode: PMode = c.p_mode.parse()?;
    let p = match (c.p, &c.ebn0) {
        (Some(p), _) => p,
        (None, Some(e)) => ChannelPoint::new(parse("Eb/N0", e)?, rate, burst, mode)?.p,
        (None, None) => return Err(cfg_err("need --ebn0 or --p")),
    };
    Ok(match burst {
        Burstiness::Bsc => MarkovParams::bsc(p, n)?,
        Burstiness::Markov { g } => MarkovParams::from_p_and_g(p, g, n)?,
    })
}

fn parse_order(s: &str) -> Res<PatternOrder> {
    match s {
        "bundled" => Ok(PatternOrder::ClassBundled),
        "exact" => Ok(PatternOrder::Exact),
        _ => Err(cfg_err(format!("order must be bundled or exact, got {s:?}"))),
    }
}

fn patterns(a: PatternsArgs) -> Res<()> {
    let params = channel_params(&a.channel, a.rate, a.n)?;
    let (m, l) = parse_rule(&a.rule)?;
    let rule = AbandonmentRule::new(m, l)?;
    let order = parse_order(&a.order)?;
    let schedule = match a.delta_l {
        Some(dl) => Schedule::new(a.n, dl, rule)?,
        None => Schedule::for_channel_with(&params, rule, DeltaRounding::Floor, order)?,
    };
    let mut out = BufWriter::new(io::stdout().lock());
    writeln!(out, "# n={} delta_l={} rule={m},{l}", a.n, schedule.delta_l())?;
    writeln!(out, "index\tm\tl\tcase\tlog_prob\tpattern")?;
    let mut stream = schedule.stream();
    while let Some(p) = stream.next_pattern() {
        if p.index >= a.limit {
            break;
        }
        let lp = params.log_subclass_prob(p.subclass)?;
        writeln!(
            out,
            "{}\t{}\t{}\t{}\t{:.6}\t{}",
            p.index,
            p.subclass.m,
            p.subclass.l,
            p.subclass.case.label(),
            lp,
            p.to_word(a.n)
        )?;
    }
    out.flush()?;
    Ok(())
}

fn decode(a: DecodeArgs) -> Res<()> {
    let code = load_code(&a.code, a.generator.as_deref())?;
    let n = code.n();
    let word = a.word.trim();
    let y = if word.starts_with("0x") {
        BitWord::from_hex(n, word)?
    } else {
        word.parse::<BitWord>()?
    };
    if y.len() != n {
        return Err(cfg_err(format!(
            "received word has {} bits, code length is {n}",
            y.len()
        )));
    }
    let decoder: DecoderKind = a.decoder.parse()?;
    let mut out = io::stdout().lock();
    let print_decoded = |out: &mut dyn Write, c: &BitWord| -> io::Result<()> {
        let mut z = c.clone();
        z ^= &y;
        writeln!(out, "status: decoded")?;
        writeln!(out, "codeword: {c}")?;
        writeln!(out, "noise: {z}")?;
        writeln!(out, "noise_weight: {}", z.weight())
    };
    match decoder {
        DecoderKind::GrandMo | DecoderKind::GrandBsc => {
            let rule = match &a.rule {
                Some(r) => {
                    let (m, l) = parse_rule(r)?;
                    AbandonmentRule::new(m, l)?
                }
                None => match code.min_distance() {
                    Some(d) => AbandonmentRule::from_min_distance(d)?,
                    None => AbandonmentRule::new(3, 3)?,
                },
            }
            .with_query_cap(Some(a.query_cap.unwrap_or(AbandonmentRule::DEFAULT_QUERY_CAP)));
            let schedule = if decoder == DecoderKind::GrandBsc {
                Schedule::new(n, 0, rule)?
            } else {
                Schedule::for_channel(&channel_params(&a.channel, code.rate(), n)?, rule)?
            };
            let outcome = grand_decode(&y, &code, &mut schedule.stream())?;
            match &outcome.status {
                DecodeStatus::Decoded { codeword, .. } => print_decoded(&mut out, codeword)?,
                DecodeStatus::Abandoned => writeln!(out, "status: abandoned")?,
            }
            writeln!(out, "queries: {}", outcome.queries)?;
        }
        DecoderKind::Bm | DecoderKind::Ml => {
            let result = if decoder == DecoderKind::Bm {
                BerlekampMassey::new(&code)?.decode(&y)?
            } else {
                MajorityLogic::new(&code)?.decode(&y)?
            };
            match result {
                Ok(c) => print_decoded(&mut out, &c)?,
                Err(f) => writeln!(out, "status: failure ({f})")?,
            }
        }
    }
    Ok(())
}

fn sim_config(a: &SweepArgs) -> Res<SimConfig> {
    let decoders = parse_list(&a.decoder, |s| s.parse::<DecoderKind>())?;
    let channels = parse_list(&a.g, |s| s.parse::<Burstiness>())?;
    Ok(SimConfig {
        code: a.code.parse()?,
        decoders,
        ebn0_db: parse_grid(&a.ebn0)?,
        channels,
        abandonment: a.rule.as_deref().map(parse_rule).transpose()?,
        query_cap: Some(a.query_cap.unwrap_or(AbandonmentRule::DEFAULT_QUERY_CAP)),
        stop: StopRule {
            min_errors: a.min_errors,
            max_trials: a.max_trials,
        },
        seed: a.seed,
        p_mode: a.p_mode.parse()?,
        bler_floor: a.bler_floor,
        threads: a.threads,
        ..SimConfig::default()
    })
}

fn csv_out(path: Option<&Path>) -> Res<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(io::stdout()),
    })
}

fn simulate(a: SimulateArgs) -> Res<()> {
    let mut config = sim_config(&a.sweep)?;
    config.interleaver = parse_interleaver(&a.interleaver, a.sweep.seed)?;
    config.packets = a.packets;
    let experiment = Experiment::new(config)?;
    let mut sink = CsvSink::new(csv_out(a.sweep.out.as_deref())?)?;
    experiment.sweep(Some(&mut sink))?;
    Ok(())
}

fn interleave_study(a: StudyArgs) -> Res<()> {
    let base = sim_config(&a.sweep)?;
    let kind = parse_interleaver(&a.interleaver, a.sweep.seed)?
        .ok_or_else(|| cfg_err("interleave-study needs a matrix or random interleaver"))?;
    let depths: Vec<usize> = parse_list(&a.packets, |s| {
        s.parse::<usize>()
            .map_err(|_| Error::Parse(format!("bad packet count {s:?}")))
    })?;
    let mut sink = CsvSink::new(csv_out(a.sweep.out.as_deref())?)?;
    let mut summary = Vec::new();

    let reference = SimConfig {
        decoders: vec![DecoderKind::GrandMo],
        interleaver: None,
        packets: 1,
        ..base.clone()
    };
    let n = reference.code.build()?.n();
    let mut runs = vec![(reference, "grandmo none".to_string(), n)];
    for &packets in &depths {
        let cfg = SimConfig {
            decoders: vec![DecoderKind::Bm],
            interleaver: Some(kind),
            packets,
            ..base.clone()
        };
        runs.push((
            cfg,
            format!("bm {kind} x{packets}"),
            buffered_bits(Some(kind), packets, n)?,
        ));
    }
    for (cfg, label, buffered) in runs {
        let exp = Experiment::new(cfg)?;
        let rows = exp.sweep(Some(&mut sink))?;
        for &ch in &exp.config().channels {
            let curve = curve_of(&rows, exp.config().decoders[0], ch);
            let at = ebn0_at_target_bler(&curve, a.target).map_or("out of range".to_string(), |c| {
                format!("{:.2} dB [{:.2}, {:.2}]", c.ebn0_db, c.lo, c.hi)
            });
            summary.push(format!(
                "{label} g={ch} buffered_bits={buffered}: Eb/N0 at BLER {} = {at}",
                a.target
            ));
        }
    }
    for line in summary {
        eprintln!("{line}");
    }
    Ok(())
}
