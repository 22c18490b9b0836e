//! Monte Carlo block-error-rate experiments.
//!
//! Every trial draws its message and noise from its own random stream keyed
//! by `(seed, operating point, trial)`, and trials are accumulated in fixed
//! batches, so results do not depend on the number of worker threads. All
//! decoders evaluated at the same operating point see the same noise.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use rand::Rng;
use statrs::function::beta::beta_reg;

use crate::channel::{sample_noise, trial_rng, Burstiness, ChannelPoint, PMode};
use crate::classic::{BerlekampMassey, HardDecoder, MajorityLogic};
use crate::codes::{make_bch, make_rlc, make_rm, LinearCode};
use crate::error::{Error, Result};
use crate::gf2::BitWord;
use crate::grand::{grand_decode, DecodeStatus};
use crate::interleave::{Interleaver, InterleaverKind};
use crate::markov::MarkovParams;
use crate::pattern::{AbandonmentRule, PatternOrder, Schedule};
use crate::DeltaRounding;

/// Trials (or interleaved groups) per batch; stopping is checked between
/// batches only.
pub const BATCH: u64 = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CodeSpec {
    Bch,
    Rm { r: usize, m: usize },
    Rlc { n: usize, k: usize, seed: u64 },
}

impl CodeSpec {
    pub fn build(&self) -> Result<LinearCode> {
        match *self {
            CodeSpec::Bch => Ok(make_bch()),
            CodeSpec::Rm { r, m } => make_rm(r, m),
            CodeSpec::Rlc { n, k, seed } => make_rlc(n, k, seed),
        }
    }

    pub fn tag(&self) -> &'static str {
        match self {
            CodeSpec::Bch => "bch",
            CodeSpec::Rm { .. } => "rm",
            CodeSpec::Rlc { .. } => "rlc",
        }
    }
}

impl fmt::Display for CodeSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CodeSpec::Bch => f.write_str("bch"),
            CodeSpec::Rm { r, m } => write!(f, "rm:{r}:{m}"),
            CodeSpec::Rlc { n, k, seed } => write!(f, "rlc:{n}:{k}:{seed}"),
        }
    }
}

/// Accepts `bch`, `rm`, `rm:R:M`, `rlc`, `rlc:N:K` and `rlc:N:K:SEED`.
impl FromStr for CodeSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.trim().split(':').collect();
        let num = |i: usize| -> Result<u64> {
            parts[i]
                .parse()
                .map_err(|_| Error::Parse(format!("bad number {:?} in code spec {s:?}", parts[i])))
        };
        match (parts[0], parts.len()) {
            ("bch", 1) => Ok(CodeSpec::Bch),
            ("rm", 1) => Ok(CodeSpec::Rm { r: 4, m: 7 }),
            ("rm", 3) => Ok(CodeSpec::Rm {
                r: num(1)? as usize,
                m: num(2)? as usize,
            }),
            ("rlc", 1) => Ok(CodeSpec::Rlc {
                n: 127,
                k: 106,
                seed: 1,
            }),
            ("rlc", 3 | 4) => Ok(CodeSpec::Rlc {
                n: num(1)? as usize,
                k: num(2)? as usize,
                seed: if parts.len() == 4 { num(3)? } else { 1 },
            }),
            _ => Err(Error::Parse(format!("unknown code spec {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DecoderKind {
    /// GRAND with the pattern order matched to the channel.
    GrandMo,
    /// GRAND with the memoryless order (Δl = 0) whatever the channel.
    GrandBsc,
    /// Berlekamp-Massey, BCH only.
    Bm,
    /// Majority logic, Reed-Muller only.
    Ml,
}

impl DecoderKind {
    pub fn label(self) -> &'static str {
        match self {
            DecoderKind::GrandMo => "grandmo",
            DecoderKind::GrandBsc => "grand-bsc",
            DecoderKind::Bm => "bm",
            DecoderKind::Ml => "ml",
        }
    }

    pub fn is_grand(self) -> bool {
        matches!(self, DecoderKind::GrandMo | DecoderKind::GrandBsc)
    }
}

impl fmt::Display for DecoderKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for DecoderKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "grandmo" => Ok(DecoderKind::GrandMo),
            "grand-bsc" => Ok(DecoderKind::GrandBsc),
            "bm" => Ok(DecoderKind::Bm),
            "ml" => Ok(DecoderKind::Ml),
            other => Err(Error::Parse(format!(
                "unknown decoder {other:?} (expected grandmo, grand-bsc, bm or ml)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StopRule {
    pub min_errors: u64,
    pub max_trials: u64,
}

impl Default for StopRule {
    fn default() -> Self {
        StopRule {
            min_errors: 100,
            max_trials: 1_000_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub code: CodeSpec,
    pub decoders: Vec<DecoderKind>,
    pub ebn0_db: Vec<f64>,
    pub channels: Vec<Burstiness>,
    pub interleaver: Option<InterleaverKind>,
    /// Codewords per interleaved frame; ignored without an interleaver.
    pub packets: usize,
    /// `(m_max, l_last)`; `None` picks the code's default.
    pub abandonment: Option<(usize, usize)>,
    pub query_cap: Option<u64>,
    pub order: PatternOrder,
    pub stop: StopRule,
    pub seed: u64,
    pub p_mode: PMode,
    /// Skip the rest of a curve once its BLER falls below this value.
    pub bler_floor: Option<f64>,
    /// Worker threads, capped by `GRANDMO_THREADS`; `None` uses the cap or
    /// all cores.
    pub threads: Option<usize>,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            code: CodeSpec::Bch,
            decoders: vec![DecoderKind::GrandMo],
            ebn0_db: (0..=16).map(|i| i as f64 * 0.5).collect(),
            channels: vec![Burstiness::Bsc],
            interleaver: None,
            packets: 1,
            abandonment: None,
            query_cap: Some(AbandonmentRule::DEFAULT_QUERY_CAP),
            order: PatternOrder::ClassBundled,
            stop: StopRule::default(),
            seed: 1,
            p_mode: PMode::Paper,
            bler_floor: None,
            threads: None,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParameter(m.to_string()));
        if self.decoders.is_empty() || self.ebn0_db.is_empty() || self.channels.is_empty() {
            return bad("decoder, Eb/N0 and channel grids must be non-empty");
        }
        if self.stop.min_errors == 0 || self.stop.max_trials == 0 {
            return bad("stopping rule needs min_errors ≥ 1 and max_trials ≥ 1");
        }
        if self.packets == 0 {
            return bad("packets must be at least 1");
        }
        if self.threads == Some(0) {
            return bad("threads must be at least 1");
        }
        if let Some((m, l)) = self.abandonment {
            AbandonmentRule::new(m, l)?;
        }
        for &d in &self.decoders {
            match (d, self.code) {
                (DecoderKind::Bm, c) if c != CodeSpec::Bch => {
                    return Err(Error::InvalidParameter(format!(
                        "decoder bm needs the bch code, got {c}"
                    )))
                }
                (DecoderKind::Ml, c) if !matches!(c, CodeSpec::Rm { .. }) => {
                    return Err(Error::InvalidParameter(format!("decoder ml needs an rm code, got {c}")))
                }
                _ => {}
            }
        }
        Ok(())
    }

    /// Abandonment rule in force for GRAND decoders.
    pub fn rule_for(&self, code: &LinearCode) -> Result<AbandonmentRule> {
        let rule = match (self.abandonment, code.min_distance()) {
            (Some((m, l)), _) => AbandonmentRule::new(m, l)?,
            (None, Some(d)) => AbandonmentRule::from_min_distance(d)?,
            // codes without a known distance borrow the BCH rule
            (None, None) => AbandonmentRule::new(3, 3)?,
        };
        Ok(rule.with_query_cap(self.query_cap))
    }
}

/// Two-sided 95% interval on a binomial proportion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn half_width(&self) -> f64 {
        (self.hi - self.lo) / 2.0
    }

    pub fn overlaps(&self, other: &Interval) -> bool {
        self.lo <= other.hi && other.lo <= self.hi
    }
}

/// Counts below which the exact interval replaces the normal one.
pub const EXACT_CI_BELOW: u64 = 10;

/// 95% interval for `x` successes in `n` trials: Wald when both counts are at
/// least [`EXACT_CI_BELOW`], Clopper-Pearson otherwise.
pub fn bler_interval(x: u64, n: u64) -> Interval {
    if n == 0 {
        return Interval { lo: 0.0, hi: 1.0 };
    }
    let p = x as f64 / n as f64;
    if x >= EXACT_CI_BELOW && n - x >= EXACT_CI_BELOW {
        let h = 1.96 * (p * (1.0 - p) / n as f64).sqrt();
        return Interval {
            lo: (p - h).max(0.0),
            hi: (p + h).min(1.0),
        };
    }
    let (xf, nf) = (x as f64, n as f64);
    let lo = if x == 0 {
        0.0
    } else {
        beta_quantile(xf, nf - xf + 1.0, 0.025)
    };
    let hi = if x == n {
        1.0
    } else {
        beta_quantile(xf + 1.0, nf - xf, 0.975)
    };
    Interval { lo, hi }
}

/// Quantile of Beta(a, b) by bisection on the regularized incomplete beta.
fn beta_quantile(a: f64, b: f64, q: f64) -> f64 {
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if beta_reg(a, b, mid) < q {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-15 * hi.max(1e-300) {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// One row of results.
#[derive(Debug, Clone, PartialEq)]
pub struct BlerPoint {
    pub code: CodeSpec,
    pub n: usize,
    pub k: usize,
    pub decoder: DecoderKind,
    pub p_mode: PMode,
    pub channel: Burstiness,
    pub g: f64,
    pub b: f64,
    pub ebn0_db: f64,
    pub p: f64,
    pub interleaver: Option<InterleaverKind>,
    pub packets: usize,
    pub abandonment: Option<AbandonmentRule>,
    pub trials: u64,
    pub block_errors: u64,
    pub bler: f64,
    pub interval: Interval,
    pub mean_queries: Option<f64>,
    pub max_queries: Option<u64>,
    /// Mean weight of the noise removed on correct decodes.
    pub mean_err_weight: f64,
    pub seed: u64,
    /// GRAND decodes that ran out of patterns.
    pub abandoned: u64,
    /// Classical decoder failures, majority ties included.
    pub failures: u64,
    pub ties: u64,
    /// Decodes to a wrong codeword.
    pub undetected: u64,
    /// `weights[w]` counts correct decodes that removed noise of weight `w`.
    pub weights: Vec<u64>,
}

pub const CSV_HEADER: [&str; 21] = [
    "code",
    "n",
    "k",
    "decoder",
    "p_mode",
    "g",
    "b",
    "ebn0_db",
    "p",
    "interleaver",
    "packets",
    "abandon_mmax",
    "abandon_llast",
    "trials",
    "block_errors",
    "bler",
    "ci95",
    "mean_queries",
    "max_queries",
    "mean_err_weight",
    "seed",
];

impl BlerPoint {
    pub fn ci95(&self) -> f64 {
        self.interval.half_width()
    }

    /// Fraction of correct decodes that removed noise heavier than `w`.
    pub fn fraction_heavier_than(&self, w: usize) -> f64 {
        let total: u64 = self.weights.iter().sum();
        if total == 0 {
            return 0.0;
        }
        self.weights.iter().skip(w + 1).sum::<u64>() as f64 / total as f64
    }

    pub fn csv_record(&self) -> Vec<String> {
        let opt = |v: Option<String>| v.unwrap_or_default();
        vec![
            self.code.tag().to_string(),
            self.n.to_string(),
            self.k.to_string(),
            self.decoder.label().to_string(),
            self.p_mode.label().to_string(),
            self.g.to_string(),
            self.b.to_string(),
            self.ebn0_db.to_string(),
            self.p.to_string(),
            self.interleaver.map_or("none", |i| i.label()).to_string(),
            self.packets.to_string(),
            opt(self.abandonment.map(|r| r.m_max.to_string())),
            opt(self.abandonment.map(|r| r.l_last.to_string())),
            self.trials.to_string(),
            self.block_errors.to_string(),
            self.bler.to_string(),
            self.ci95().to_string(),
            opt(self.mean_queries.map(|q| q.to_string())),
            opt(self.max_queries.map(|q| q.to_string())),
            self.mean_err_weight.to_string(),
            self.seed.to_string(),
        ]
    }
}

/// Streams result rows as CSV.
pub struct CsvSink<W: Write> {
    writer: csv::Writer<W>,
}

impl<W: Write> CsvSink<W> {
    pub fn new(inner: W) -> Result<Self> {
        let mut writer = csv::Writer::from_writer(inner);
        writer.write_record(CSV_HEADER).map_err(csv_err)?;
        writer.flush()?;
        Ok(CsvSink { writer })
    }

    pub fn push(&mut self, point: &BlerPoint) -> Result<()> {
        self.writer.write_record(point.csv_record()).map_err(csv_err)?;
        self.writer.flush()?;
        Ok(())
    }

    /// Flushes and returns the underlying writer.
    pub fn into_inner(self) -> Result<W> {
        self.writer.into_inner().map_err(|e| Error::Io(e.error().to_string()))
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

#[derive(Debug, Clone, Default)]
struct Tally {
    trials: u64,
    errors: u64,
    queries: u64,
    max_queries: u64,
    weight_sum: u64,
    abandoned: u64,
    failures: u64,
    ties: u64,
    undetected: u64,
    weights: Vec<u64>,
}

impl Tally {
    fn merge(&mut self, o: &Tally) {
        self.trials += o.trials;
        self.errors += o.errors;
        self.queries += o.queries;
        self.max_queries = self.max_queries.max(o.max_queries);
        self.weight_sum += o.weight_sum;
        self.abandoned += o.abandoned;
        self.failures += o.failures;
        self.ties += o.ties;
        self.undetected += o.undetected;
        if self.weights.len() < o.weights.len() {
            self.weights.resize(o.weights.len(), 0);
        }
        for (a, b) in self.weights.iter_mut().zip(&o.weights) {
            *a += b;
        }
    }

    fn record_success(&mut self, w: usize) {
        if self.weights.len() <= w {
            self.weights.resize(w + 1, 0);
        }
        self.weights[w] += 1;
        self.weight_sum += w as u64;
    }
}

enum Engine {
    Grand(Schedule),
    Bm(BerlekampMassey),
    Ml(MajorityLogic),
}

/// A configured experiment: the code and its decoders built once.
pub struct Experiment {
    config: SimConfig,
    code: LinearCode,
    #[cfg(feature = "parallel")]
    pool: rayon::ThreadPool,
}

impl Experiment {
    pub fn new(config: SimConfig) -> Result<Self> {
        config.validate()?;
        let code = config.code.build()?;
        #[cfg(feature = "parallel")]
        let pool = {
            // zero lets rayon use every core
            let threads = match (config.threads, threads_from_env()?) {
                (Some(t), Some(cap)) => t.min(cap),
                (Some(t), None) | (None, Some(t)) => t,
                (None, None) => 0,
            };
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?
        };
        Ok(Experiment {
            config,
            code,
            #[cfg(feature = "parallel")]
            pool,
        })
    }

    pub fn config(&self) -> &SimConfig {
        &self.config
    }

    pub fn code(&self) -> &LinearCode {
        &self.code
    }

    fn engine(&self, decoder: DecoderKind, params: Option<&MarkovParams>) -> Result<Engine> {
        let rule = self.config.rule_for(&self.code)?;
        let n = self.code.n();
        Ok(match (decoder, params) {
            (DecoderKind::GrandMo, Some(params)) => Engine::Grand(Schedule::for_channel_with(
                &params.with_len(n)?,
                rule,
                DeltaRounding::Floor,
                self.config.order,
            )?),
            // a noiseless channel has no chain to match
            (DecoderKind::GrandMo, None) | (DecoderKind::GrandBsc, _) => Engine::Grand(Schedule::new(n, 0, rule)?),
            (DecoderKind::Bm, _) => Engine::Bm(BerlekampMassey::new(&self.code)?),
            (DecoderKind::Ml, _) => Engine::Ml(MajorityLogic::new(&self.code)?),
        })
    }

    /// Random-stream key shared by every decoder at this operating point.
    fn point_key(&self, channel: Burstiness, ebn0_db: f64) -> u64 {
        let g_bits = match channel {
            Burstiness::Bsc => u64::MAX,
            Burstiness::Markov { g } => g.to_bits(),
        };
        let il = match self.config.interleaver {
            None => 0,
            Some(InterleaverKind::Matrix) => 1,
            Some(InterleaverKind::Random { seed }) => splitmix(2 ^ seed),
        };
        [g_bits, ebn0_db.to_bits(), il, self.packets() as u64]
            .into_iter()
            .fold(0x0067_7261_6e64_6d6f_u64, |h, x| splitmix(h ^ x))
    }

    fn packets(&self) -> usize {
        if self.config.interleaver.is_some() {
            self.config.packets
        } else {
            1
        }
    }

    /// Simulates one `(decoder, channel, Eb/N0)` point until the stopping rule
    /// fires.
    pub fn run_point(&self, decoder: DecoderKind, channel: Burstiness, ebn0_db: f64) -> Result<BlerPoint> {
        let cfg = &self.config;
        let code = &self.code;
        let n = code.n();
        let point = ChannelPoint::new(ebn0_db, code.rate(), channel, cfg.p_mode)?;
        // p underflows to zero far above the waterfall; such a point is noiseless
        let params = if point.p > 0.0 { Some(point.params(n)?) } else { None };
        let engine = self.engine(decoder, params.as_ref())?;
        let packets = self.packets();
        let interleaver = match cfg.interleaver {
            Some(kind) => Some(Interleaver::new(kind, packets, n)?),
            None => None,
        };
        let key = self.point_key(channel, ebn0_db);
        let units_cap = cfg.stop.max_trials.div_ceil(packets as u64);

        let mut total = Tally::default();
        let mut next_unit = 0u64;
        while next_unit < units_cap && total.errors < cfg.stop.min_errors {
            let end = (next_unit + BATCH).min(units_cap);
            let run = |unit: u64| self.run_unit(&engine, params.as_ref(), interleaver.as_ref(), key, unit);
            let tallies: Vec<Result<Tally>> = self.map_units(next_unit..end, run);
            for t in tallies {
                total.merge(&t?);
            }
            next_unit = end;
        }

        let bler = if total.trials == 0 {
            0.0
        } else {
            total.errors as f64 / total.trials as f64
        };
        let successes = total.trials - total.errors;
        Ok(BlerPoint {
            code: cfg.code,
            n,
            k: code.k(),
            decoder,
            p_mode: cfg.p_mode,
            channel,
            g: point.g,
            b: point.b,
            ebn0_db,
            p: point.p,
            interleaver: cfg.interleaver,
            packets,
            abandonment: decoder.is_grand().then(|| cfg.rule_for(code)).transpose()?,
            trials: total.trials,
            block_errors: total.errors,
            bler,
            interval: bler_interval(total.errors, total.trials),
            mean_queries: decoder
                .is_grand()
                .then(|| total.queries as f64 / total.trials.max(1) as f64),
            max_queries: decoder.is_grand().then_some(total.max_queries),
            mean_err_weight: if successes == 0 {
                0.0
            } else {
                total.weight_sum as f64 / successes as f64
            },
            seed: cfg.seed,
            abandoned: total.abandoned,
            failures: total.failures,
            ties: total.ties,
            undetected: total.undetected,
            weights: total.weights,
        })
    }

    #[cfg(feature = "parallel")]
    fn map_units<F>(&self, units: std::ops::Range<u64>, f: F) -> Vec<Result<Tally>>
    where
        F: Fn(u64) -> Result<Tally> + Sync,
    {
        use rayon::prelude::*;
        self.pool.install(|| units.into_par_iter().map(&f).collect())
    }

    #[cfg(not(feature = "parallel"))]
    fn map_units<F>(&self, units: std::ops::Range<u64>, f: F) -> Vec<Result<Tally>>
    where
        F: Fn(u64) -> Result<Tally>,
    {
        units.map(f).collect()
    }

    /// One codeword, or one interleaved group of codewords.
    fn run_unit(
        &self,
        engine: &Engine,
        params: Option<&MarkovParams>,
        interleaver: Option<&Interleaver>,
        key: u64,
        unit: u64,
    ) -> Result<Tally> {
        let code = &self.code;
        let n = code.n();
        let mut rng = trial_rng(self.config.seed, key, unit);
        let packets = interleaver.map_or(1, |il| il.packets());
        let sent: Vec<BitWord> = (0..packets)
            .map(|_| {
                let u = BitWord::from_bits((0..code.k()).map(|_| rng.gen::<bool>()));
                code.encode(&u)
            })
            .collect::<Result<_>>()?;
        let mut noise = |len: usize| match params {
            Some(params) => sample_noise(params, len, &mut rng),
            None => BitWord::zeros(len),
        };
        let received = match interleaver {
            Some(il) => {
                let mut frame = il.interleave(&sent)?;
                frame ^= &noise(il.frame_len());
                il.deinterleave(&frame)?
            }
            None => sent
                .iter()
                .map(|c| {
                    let mut y = c.clone();
                    y ^= &noise(n);
                    y
                })
                .collect(),
        };

        let mut tally = Tally::default();
        for (c, y) in sent.iter().zip(&received) {
            tally.trials += 1;
            let decoded = match engine {
                Engine::Grand(schedule) => {
                    let out = grand_decode(y, code, &mut schedule.stream())?;
                    tally.queries += out.queries;
                    tally.max_queries = tally.max_queries.max(out.queries);
                    match out.status {
                        DecodeStatus::Decoded { codeword, .. } => Some(codeword),
                        DecodeStatus::Abandoned => {
                            tally.abandoned += 1;
                            None
                        }
                    }
                }
                Engine::Bm(dec) => hard_outcome(dec, y, &mut tally)?,
                Engine::Ml(dec) => hard_outcome(dec, y, &mut tally)?,
            };
            match decoded {
                Some(w) if &w == c => {
                    let mut z = w;
                    z ^= y;
                    tally.record_success(z.weight());
                }
                Some(_) => {
                    tally.errors += 1;
                    tally.undetected += 1;
                }
                None => tally.errors += 1,
            }
        }
        Ok(tally)
    }

    /// All rows of the configured grid, streamed to `sink` as they complete.
    pub fn sweep<W: Write>(&self, mut sink: Option<&mut CsvSink<W>>) -> Result<Vec<BlerPoint>> {
        let mut rows = Vec::new();
        for &decoder in &self.config.decoders {
            for &channel in &self.config.channels {
                let mut grid = self.config.ebn0_db.clone();
                grid.sort_by(f64::total_cmp);
                for ebn0 in grid {
                    let row = self.run_point(decoder, channel, ebn0)?;
                    if let Some(s) = sink.as_deref_mut() {
                        s.push(&row)?;
                    }
                    let done = self.config.bler_floor.is_some_and(|f| row.bler < f);
                    rows.push(row);
                    if done {
                        break;
                    }
                }
            }
        }
        Ok(rows)
    }
}

fn hard_outcome<D: HardDecoder>(dec: &D, y: &BitWord, tally: &mut Tally) -> Result<Option<BitWord>> {
    Ok(match dec.decode(y)? {
        Ok(w) => Some(w),
        Err(e) => {
            tally.failures += 1;
            if matches!(e, crate::classic::DecodeFailure::MajorityTie { .. }) {
                tally.ties += 1;
            }
            None
        }
    })
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Worker cap from `GRANDMO_THREADS`, if set.
pub fn threads_from_env() -> Result<Option<usize>> {
    match std::env::var("GRANDMO_THREADS") {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(t) if t > 0 => Ok(Some(t)),
            _ => Err(Error::InvalidParameter(format!(
                "GRANDMO_THREADS must be a positive integer, got {v:?}"
            ))),
        },
        Err(_) => Ok(None),
    }
}

/// Runs one grid of the configuration and returns its rows.
pub fn sweep<W: Write>(config: &SimConfig, sink: Option<&mut CsvSink<W>>) -> Result<Vec<BlerPoint>> {
    Experiment::new(config.clone())?.sweep(sink)
}

/// Convenience for a single operating point.
pub fn run_bler_point(
    config: &SimConfig,
    decoder: DecoderKind,
    channel: Burstiness,
    ebn0_db: f64,
) -> Result<BlerPoint> {
    Experiment::new(config.clone())?.run_point(decoder, channel, ebn0_db)
}

/// Where a curve crosses a target BLER, with the crossings of its 95%
/// bounds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Crossing {
    pub ebn0_db: f64,
    /// Crossing of the lower BLER bound (earliest plausible Eb/N0).
    pub lo: f64,
    /// Crossing of the upper BLER bound (latest plausible Eb/N0).
    pub hi: f64,
}

impl Crossing {
    pub fn overlaps(&self, other: &Crossing) -> bool {
        self.lo <= other.hi && other.lo <= self.hi
    }
}

/// Eb/N0 at which the curve `(ebn0, bler)` first falls to `target`,
/// interpolating log10(BLER) linearly between the bracketing grid points.
/// `None` when the target is not bracketed.
pub fn ebn0_at_target(curve: &[(f64, f64)], target: f64) -> Option<f64> {
    // zero BLER is floored so that log-interpolation stays finite
    const FLOOR: f64 = 1e-300;
    let mut pts: Vec<(f64, f64)> = curve.to_vec();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    for w in pts.windows(2) {
        let ((x0, y0), (x1, y1)) = (w[0], w[1]);
        if y0 == target {
            return Some(x0);
        }
        if y0 > target && y1 <= target {
            if y1 == target {
                return Some(x1);
            }
            let (l0, l1, lt) = (y0.max(FLOOR).log10(), y1.max(FLOOR).log10(), target.log10());
            return Some(x0 + (x1 - x0) * (l0 - lt) / (l0 - l1));
        }
    }
    pts.last().filter(|p| p.1 == target).map(|p| p.0)
}

/// [`ebn0_at_target`] for a set of result rows of one curve, with bounds.
pub fn ebn0_at_target_bler(rows: &[BlerPoint], target: f64) -> Option<Crossing> {
    let curve = |f: &dyn Fn(&BlerPoint) -> f64| -> Vec<(f64, f64)> { rows.iter().map(|r| (r.ebn0_db, f(r))).collect() };
    let mid = ebn0_at_target(&curve(&|r| r.bler), target)?;
    let lo = ebn0_at_target(&curve(&|r| r.interval.lo), target).unwrap_or(f64::NEG_INFINITY);
    let hi = ebn0_at_target(&curve(&|r| r.interval.hi), target).unwrap_or(f64::INFINITY);
    Some(Crossing {
        ebn0_db: mid,
        lo: lo.min(mid),
        hi: hi.max(mid),
    })
}

/// Rows of one curve from a mixed result set.
pub fn curve_of<'a>(rows: &'a [BlerPoint], decoder: DecoderKind, channel: Burstiness) -> Vec<BlerPoint> {
    rows.iter()
        .filter(|r: &&'a BlerPoint| r.decoder == decoder && r.channel == channel)
        .cloned()
        .collect()
}

/// Buffered bits per decoded codeword for an interleaved frame.
pub fn buffered_bits(kind: Option<InterleaverKind>, packets: usize, n: usize) -> Result<usize> {
    match kind {
        None => Ok(n),
        Some(k) => Ok(Interleaver::new(k, packets, n)?.frame_len()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interval_switches_to_exact_for_small_counts() {
        let w = bler_interval(50, 1000);
        assert!((w.half_width() - 1.96 * (0.05f64 * 0.95 / 1000.0).sqrt()).abs() < 1e-12);
        // Clopper-Pearson for 0 of 100: upper bound 1 − 0.025^(1/100)
        let z = bler_interval(0, 100);
        assert_eq!(z.lo, 0.0);
        assert!((z.hi - (1.0 - 0.025f64.powf(0.01))).abs() < 1e-9);
        // x = n mirrors x = 0
        let f = bler_interval(100, 100);
        assert!((f.lo - 0.025f64.powf(0.01)).abs() < 1e-9 && f.hi == 1.0);
        let s = bler_interval(3, 1000);
        assert!(s.lo > 0.0 && s.lo < 0.003 && s.hi > 0.003);
    }

    #[test]
    fn target_interpolation() {
        let curve: Vec<(f64, f64)> = (0..6).map(|e| (e as f64, 10f64.powi(-e))).collect();
        assert!((ebn0_at_target(&curve, 1e-2).unwrap() - 2.0).abs() < 1e-12);
        assert!((ebn0_at_target(&curve, 10f64.powf(-2.5)).unwrap() - 2.5).abs() < 1e-12);
        assert_eq!(ebn0_at_target(&curve, 1.0), Some(0.0));
        assert_eq!(ebn0_at_target(&curve, 1e-9), None);
        assert_eq!(ebn0_at_target(&curve, 2.0), None);
        let with_zero = [(0.0, 0.1), (1.0, 0.0)];
        let x = ebn0_at_target(&with_zero, 1e-2).unwrap();
        assert!(x > 0.0 && x < 0.1);
    }

    #[test]
    fn parse_specs() {
        assert_eq!("rm:4:7".parse::<CodeSpec>().unwrap(), CodeSpec::Rm { r: 4, m: 7 });
        assert_eq!(
            "rlc:15:10:3".parse::<CodeSpec>().unwrap(),
            CodeSpec::Rlc { n: 15, k: 10, seed: 3 }
        );
        assert_eq!(
            "rlc".parse::<CodeSpec>().unwrap(),
            CodeSpec::Rlc {
                n: 127,
                k: 106,
                seed: 1
            }
        );
        assert!("rlc:1".parse::<CodeSpec>().is_err());
        assert!("golay".parse::<CodeSpec>().is_err());
        for d in ["grandmo", "grand-bsc", "bm", "ml"] {
            assert_eq!(d.parse::<DecoderKind>().unwrap().label(), d);
        }
    }

    #[test]
    fn config_validation() {
        let mut c = SimConfig {
            decoders: vec![DecoderKind::Ml],
            ..SimConfig::default()
        };
        assert!(c.validate().is_err());
        c.code = CodeSpec::Rm { r: 4, m: 7 };
        assert!(c.validate().is_ok());
        c.stop.min_errors = 0;
        assert!(c.validate().is_err());
    }
}
