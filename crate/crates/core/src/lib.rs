//! Guessing random additive noise decoding matched to bursty Markov channels.

pub mod channel;
pub mod classic;
pub mod codes;
pub mod error;
pub mod gf128;
pub mod gf2;
pub mod grand;
pub mod interleave;
pub mod markov;
pub mod pattern;
pub mod sim;

pub use channel::{p_from_ebn0, sample_noise, trial_rng, Burstiness, ChannelPoint, PMode};
pub use classic::{BerlekampMassey, DecodeFailure, HardDecoder, MajorityLogic};
pub use codes::{make_bch, make_bch_gf128, make_rlc, make_rm, CodeFamily, LinearCode};
pub use error::{Error, Result};
pub use gf2::{xor_add, BitMatrix, BitWord, Run};
pub use grand::{grand_decode, CodebookSet, DecodeOutcome, DecodeStatus, GrandDecoder, Membership};
pub use interleave::{Interleaver, InterleaverKind};
pub use markov::{subclass_count, BurstCase, DeltaRounding, MarkovParams, SubclassId};
pub use pattern::{class_key, AbandonmentRule, Pattern, PatternOrder, PatternStream, Schedule};
pub use sim::{
    ebn0_at_target, ebn0_at_target_bler, BlerPoint, CodeSpec, Crossing, CsvSink, DecoderKind, Experiment, SimConfig,
    StopRule,
};
