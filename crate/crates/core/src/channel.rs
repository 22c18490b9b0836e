//! Two-state Gilbert channel: Eb/N0 mapping, noise sampling, and per-trial
//! random streams.

use std::fmt;
use std::str::FromStr;

use libm::erfc;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::gf2::BitWord;
use crate::markov::MarkovParams;

/// How Eb/N0 is mapped to the stationary flip probability.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PMode {
    /// p = erfc(√(2·R·Eb/N0))
    #[default]
    Paper,
    /// Hard-decision BPSK, p = ½·erfc(√(R·Eb/N0))
    Standard,
}

impl PMode {
    pub fn label(self) -> &'static str {
        match self {
            PMode::Paper => "paper",
            PMode::Standard => "standard",
        }
    }
}

impl fmt::Display for PMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for PMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "paper" => Ok(PMode::Paper),
            "standard" => Ok(PMode::Standard),
            _ => Err(Error::Parse(format!(
                "unknown p-mode {s:?} (expected paper or standard)"
            ))),
        }
    }
}

/// Stationary bit-flip probability at `ebn0_db` for a code of rate `rate`.
pub fn p_from_ebn0(ebn0_db: f64, rate: f64, mode: PMode) -> Result<f64> {
    if !(rate > 0.0 && rate <= 1.0) {
        return Err(Error::InvalidParameter(format!("rate must lie in (0, 1], got {rate}")));
    }
    if ebn0_db.is_nan() {
        return Err(Error::InvalidParameter("Eb/N0 is NaN".into()));
    }
    let snr = 10f64.powf(ebn0_db / 10.0);
    Ok(match mode {
        PMode::Paper => erfc((2.0 * rate * snr).sqrt()),
        PMode::Standard => 0.5 * erfc((rate * snr).sqrt()),
    })
}

/// Burst structure of a channel grid entry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Burstiness {
    /// Memoryless: b = p, g = 1 − p.
    Bsc,
    /// Gilbert channel with the given Bad→Good probability.
    Markov { g: f64 },
}

impl fmt::Display for Burstiness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Burstiness::Bsc => f.write_str("bsc"),
            Burstiness::Markov { g } => write!(f, "{g}"),
        }
    }
}

impl FromStr for Burstiness {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("bsc") {
            return Ok(Burstiness::Bsc);
        }
        let g: f64 = s
            .parse()
            .map_err(|_| Error::Parse(format!("expected a g value or 'bsc', got {s:?}")))?;
        if !(g > 0.0 && g <= 1.0) {
            return Err(Error::InvalidParameter(format!("g must lie in (0, 1], got {g}")));
        }
        Ok(Burstiness::Markov { g })
    }
}

/// One operating point of the channel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelPoint {
    pub ebn0_db: f64,
    pub rate: f64,
    pub mode: PMode,
    pub burstiness: Burstiness,
    pub p: f64,
    pub b: f64,
    pub g: f64,
}

impl ChannelPoint {
    pub fn new(ebn0_db: f64, rate: f64, burstiness: Burstiness, mode: PMode) -> Result<Self> {
        let p = p_from_ebn0(ebn0_db, rate, mode)?;
        let (b, g) = match burstiness {
            Burstiness::Bsc => (p, 1.0 - p),
            Burstiness::Markov { g } => (p * g / (1.0 - p), g),
        };
        Ok(ChannelPoint {
            ebn0_db,
            rate,
            mode,
            burstiness,
            p,
            b,
            g,
        })
    }

    pub fn params(&self, n: usize) -> Result<MarkovParams> {
        match self.burstiness {
            Burstiness::Bsc => MarkovParams::bsc(self.p, n),
            Burstiness::Markov { g } => MarkovParams::from_p_and_g(self.p, g, n),
        }
    }
}

/// Number of trials `k ≥ 1` until the first success with probability `q`.
fn geometric(q: f64, rng: &mut impl Rng) -> usize {
    if q >= 1.0 {
        return 1;
    }
    let u: f64 = 1.0 - rng.gen::<f64>(); // (0, 1]
    let k = (u.ln() / (1.0 - q).ln()).floor();
    if k >= usize::MAX as f64 {
        usize::MAX
    } else {
        1 + k as usize
    }
}

/// Noise word of length `n` from the chain started in its stationary
/// distribution. Ones are emitted in the Bad state.
pub fn sample_noise(params: &MarkovParams, n: usize, rng: &mut impl Rng) -> BitWord {
    let mut w = BitWord::zeros(n);
    let mut bad = rng.gen::<f64>() < params.p();
    let mut pos = 0usize;
    // sojourn times are geometric, so the walk jumps run by run
    while pos < n {
        let stay = geometric(if bad { params.g() } else { params.b() }, rng);
        let end = pos.saturating_add(stay).min(n);
        if bad {
            w.flip_range(pos, end);
        }
        pos = end;
        bad = !bad;
    }
    w
}

/// Random stream for one trial. The key is `(master_seed, point)`; each
/// trial index selects its own ChaCha stream, so draws never depend on
/// scheduling.
pub fn trial_rng(master_seed: u64, point: u64, trial: u64) -> ChaCha8Rng {
    let mut seed = [0u8; 32];
    seed[..8].copy_from_slice(&master_seed.to_le_bytes());
    seed[8..16].copy_from_slice(&point.to_le_bytes());
    let mut rng = ChaCha8Rng::from_seed(seed);
    rng.set_stream(trial);
    rng
}
