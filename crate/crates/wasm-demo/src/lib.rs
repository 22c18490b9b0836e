//! Browser bindings: list the Markov pattern order, sample bursty noise, and
//! decode one BCH(127,106) block with GRAND-MO and Berlekamp-Massey.
//!
//! Every export returns a JSON string so the page can stay dependency free.

use std::fmt::Write as _;

use grandmo::{
    grand_decode, make_bch, sample_noise, trial_rng, AbandonmentRule, BerlekampMassey, BitWord, Burstiness,
    ChannelPoint, HardDecoder, MarkovParams, PMode, Schedule,
};
use rand::Rng;
use wasm_bindgen::prelude::*;

/// Query limit for one browser decode; keeps the page responsive.
pub const DEMO_QUERY_CAP: u64 = 2_000_000;

const MAX_LISTED: usize = 2000;
const MAX_BLOCKS: usize = 64;

fn bits(w: &BitWord) -> String {
    w.iter().map(|b| if b { '1' } else { '0' }).collect()
}

fn channel(ebn0_db: f64, channel: &str, n: usize, rate: f64) -> grandmo::Result<(ChannelPoint, MarkovParams)> {
    let burst: Burstiness = channel.parse()?;
    let point = ChannelPoint::new(ebn0_db, rate, burst, PMode::Paper)?;
    let params = point.params(n)?;
    Ok((point, params))
}

/// The first `count` patterns a decoder would query for a length-`n` block
/// on the chain `(p, g)` under rule `(m_max, l_last)`.
pub fn pattern_order_json(
    n: usize,
    p: f64,
    g: f64,
    m_max: usize,
    l_last: usize,
    count: usize,
) -> grandmo::Result<String> {
    let params = MarkovParams::from_p_and_g(p, g, n)?;
    let rule = AbandonmentRule::new(m_max, l_last)?;
    let schedule = Schedule::for_channel(&params, rule)?;
    let mut out = String::new();
    let _ = write!(
        out,
        "{{\"delta_l\":{},\"total\":\"{}\",\"patterns\":[",
        schedule.delta_l(),
        schedule.total_patterns()
    );
    let mut stream = schedule.stream();
    let mut first = true;
    while let Some(pat) = stream.next_pattern() {
        if pat.index as usize >= count.min(MAX_LISTED) {
            break;
        }
        if !first {
            out.push(',');
        }
        first = false;
        let id = pat.subclass;
        let _ = write!(
            out,
            "{{\"index\":{},\"m\":{},\"l\":{},\"case\":\"{}\",\"bits\":\"{}\"}}",
            pat.index,
            id.m,
            id.l,
            id.case,
            bits(&pat.to_word(n))
        );
    }
    out.push_str("]}");
    Ok(out)
}

/// `blocks` noise words of length 127 at `ebn0_db` on `channel` (`bsc` or a
/// g value), with the empirical flip rate.
pub fn sample_noise_json(ebn0_db: f64, channel_spec: &str, seed: u64, blocks: usize) -> grandmo::Result<String> {
    let code_rate = 106.0 / 127.0;
    let (point, params) = channel(ebn0_db, channel_spec, 127, code_rate)?;
    let blocks = blocks.clamp(1, MAX_BLOCKS);
    let mut rng = trial_rng(seed, 0, 0);
    let words: Vec<BitWord> = (0..blocks).map(|_| sample_noise(&params, 127, &mut rng)).collect();
    let ones: usize = words.iter().map(BitWord::weight).sum();
    let bursts: usize = words.iter().map(|w| w.runs().len()).sum();
    let mut out = String::new();
    let _ = write!(
        out,
        "{{\"p\":{:e},\"b\":{:e},\"g\":{:e},\"delta_l\":{},\"flip_rate\":{:e},\"bursts\":{},\"words\":[",
        point.p,
        point.b,
        point.g,
        params.delta_l(),
        ones as f64 / (blocks * 127) as f64,
        bursts
    );
    for (i, w) in words.iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        let _ = write!(out, "\"{}\"", bits(w));
    }
    out.push_str("]}");
    Ok(out)
}

/// Sends one random BCH(127,106) codeword through the channel and decodes it
/// with GRAND-MO (rule (3,3)) and Berlekamp-Massey.
pub fn decode_block_json(ebn0_db: f64, channel_spec: &str, seed: u64) -> grandmo::Result<String> {
    let code = make_bch();
    let (point, params) = channel(ebn0_db, channel_spec, code.n(), code.rate())?;
    let mut rng = trial_rng(seed, 1, 0);
    let message = BitWord::from_bits((0..code.k()).map(|_| rng.gen::<bool>()));
    let sent = code.encode(&message)?;
    let noise = sample_noise(&params, code.n(), &mut rng);
    let mut received = sent.clone();
    received ^= &noise;

    let rule = AbandonmentRule::new(3, 3)?.with_query_cap(Some(DEMO_QUERY_CAP));
    let schedule = Schedule::for_channel(&params, rule)?;
    let grand = grand_decode(&received, &code, &mut schedule.stream())?;
    let (grand_status, grand_correct) = match grand.codeword() {
        Some(c) => ("decoded", *c == sent),
        None => ("abandoned", false),
    };
    let bm = BerlekampMassey::new(&code)?.decode(&received)?;
    let (bm_status, bm_correct) = match &bm {
        Ok(c) => ("decoded".to_string(), *c == sent),
        Err(e) => (e.to_string(), false),
    };

    let mut out = String::new();
    let _ = write!(
        out,
        "{{\"p\":{:e},\"delta_l\":{},\"sent\":\"{}\",\"noise\":\"{}\",\"received\":\"{}\",\"noise_weight\":{},\
         \"grand\":{{\"status\":\"{}\",\"correct\":{},\"queries\":{}}},\
         \"bm\":{{\"status\":\"{}\",\"correct\":{}}}}}",
        point.p,
        params.delta_l(),
        bits(&sent),
        bits(&noise),
        bits(&received),
        noise.weight(),
        grand_status,
        grand_correct,
        grand.queries,
        bm_status,
        bm_correct
    );
    Ok(out)
}

fn js(r: grandmo::Result<String>) -> Result<String, JsError> {
    r.map_err(|e| JsError::new(&e.to_string()))
}

#[wasm_bindgen(js_name = patternOrder)]
pub fn pattern_order(n: usize, p: f64, g: f64, m_max: usize, l_last: usize, count: usize) -> Result<String, JsError> {
    js(pattern_order_json(n, p, g, m_max, l_last, count))
}

#[wasm_bindgen(js_name = sampleNoise)]
pub fn sample_noise_js(ebn0_db: f64, channel: &str, seed: u32, blocks: usize) -> Result<String, JsError> {
    js(sample_noise_json(ebn0_db, channel, seed.into(), blocks))
}

#[wasm_bindgen(js_name = decodeBlock)]
pub fn decode_block(ebn0_db: f64, channel: &str, seed: u32) -> Result<String, JsError> {
    js(decode_block_json(ebn0_db, channel, seed.into()))
}
