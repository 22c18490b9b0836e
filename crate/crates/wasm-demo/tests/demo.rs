use grandmo::MarkovParams;
use grandmo_wasm_demo::{decode_block_json, pattern_order_json, sample_noise_json};

fn field<'a>(json: &'a str, key: &str) -> &'a str {
    let at = json
        .find(&format!("\"{key}\":"))
        .unwrap_or_else(|| panic!("{key} missing in {json}"));
    let rest = &json[at + key.len() + 3..];
    let end = rest.find([',', '}']).unwrap_or(rest.len());
    rest[..end].trim_matches('"')
}

#[test]
fn pattern_order_starts_with_zero_then_singles() {
    let json = pattern_order_json(8, 0.05, 0.1, 2, 3, 4).unwrap();
    let delta_l = MarkovParams::from_p_and_g(0.05, 0.1, 8).unwrap().delta_l();
    assert_eq!(field(&json, "delta_l"), delta_l.to_string());
    assert!(json.contains("\"bits\":\"00000000\""));
    assert!(json.contains("\"bits\":\"10000000\""));
    assert_eq!(json.matches("\"index\"").count(), 4);
    assert!(pattern_order_json(8, 0.05, 0.1, 3, 2, 4).is_err());
}

#[test]
fn noise_is_reproducible() {
    let a = sample_noise_json(1.0, "0.05", 7, 8).unwrap();
    assert_eq!(a, sample_noise_json(1.0, "0.05", 7, 8).unwrap());
    assert_ne!(a, sample_noise_json(1.0, "0.05", 8, 8).unwrap());
    assert_eq!(a.matches('"').count() - json_keys(&a) * 2, 16);
    assert!(sample_noise_json(1.0, "two", 7, 8).is_err());
}

fn json_keys(json: &str) -> usize {
    json.matches("\":").count()
}

#[test]
fn decode_agrees_with_sent_word_at_high_snr() {
    let json = decode_block_json(12.0, "bsc", 3).unwrap();
    assert_eq!(field(&json, "noise_weight"), "0");
    assert!(json.contains("\"grand\":{\"status\":\"decoded\",\"correct\":true,\"queries\":1}"));
    assert!(json.contains("\"bm\":{\"status\":\"decoded\",\"correct\":true}"));
    assert_eq!(field(&json, "sent"), field(&json, "received"));
}

#[test]
fn decode_burst_channel() {
    // over several seeds GRAND-MO never does worse than the algebraic decoder
    // when the noise lies inside its rule, and both report consistent words
    let mut grand_ok = 0;
    let mut bm_ok = 0;
    for seed in 0..40 {
        let json = decode_block_json(2.0, "0.05", seed).unwrap();
        let sent = field(&json, "sent");
        let received = field(&json, "received");
        let noise = field(&json, "noise");
        assert_eq!(sent.len(), 127);
        for ((s, r), e) in sent.bytes().zip(received.bytes()).zip(noise.bytes()) {
            assert_eq!((s ^ r) & 1, e & 1);
        }
        grand_ok += json.contains("\"grand\":{\"status\":\"decoded\",\"correct\":true") as usize;
        bm_ok += json.contains("\"bm\":{\"status\":\"decoded\",\"correct\":true") as usize;
    }
    assert!(grand_ok >= bm_ok, "{grand_ok} vs {bm_ok}");
}
