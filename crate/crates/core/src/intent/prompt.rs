//! Few-shot prompt assembly for preference inference.

use crate::intent::store::IntentEntry;

/// System preamble fixed across all prompts.
pub const PREAMBLE: &str = "You assign QoE preference weights (latency, reliability, economics) \
                            summing to 1 for network slice requests.";

/// Render the prompt: preamble, retrieved exemplars in descending score
/// order, then the query awaiting its weights. Byte-deterministic.
pub fn build_prompt(query_text: &str, exemplars: &[&IntentEntry]) -> String {
    let mut out = String::with_capacity(256 + exemplars.len() * 96);
    out.push_str(PREAMBLE);
    out.push('\n');
    for e in exemplars {
        let [w1, w2, w3] = e.preference.as_array();
        out.push('\n');
        out.push_str(&format!(
            "Example:\nIntent: {}\nWeights: [{w1:.3}, {w2:.3}, {w3:.3}]\n",
            e.intent_text
        ));
    }
    out.push('\n');
    out.push_str(&format!("Intent: {query_text}\nWeights:"));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::intent::embed::{embed, DEFAULT_DIM};
    use crate::qoe::PreferenceVector;

    fn entry(text: &str, pref: (f64, f64, f64)) -> IntentEntry {
        IntentEntry {
            intent_text: text.into(),
            embedding: embed(text, DEFAULT_DIM).unwrap(),
            preference: PreferenceVector::new(pref.0, pref.1, pref.2).unwrap(),
            timestamp: 0,
            merge_count: 1,
            outcome_summary: None,
        }
    }

    #[test]
    fn zero_shot_prompt_has_preamble_and_query_only() {
        let p = build_prompt("emergency shutdown control loop", &[]);
        assert!(p.starts_with(PREAMBLE));
        assert!(p.ends_with("Intent: emergency shutdown control loop\nWeights:"));
        assert_eq!(p.matches("Example:").count(), 0);
    }

    #[test]
    fn exemplars_render_in_given_order() {
        let a = entry("low latency robot arm", (0.55, 0.3, 0.15));
        let b = entry("budget telemetry backfill", (0.2, 0.2, 0.6));
        let p = build_prompt("new request", &[&a, &b]);
        assert_eq!(p.matches("Example:").count(), 2);
        let pos_a = p.find("low latency robot arm").unwrap();
        let pos_b = p.find("budget telemetry backfill").unwrap();
        assert!(pos_a < pos_b);
        assert!(p.contains("Weights: [0.550, 0.300, 0.150]"));
    }

    #[test]
    fn identical_inputs_give_identical_bytes() {
        let a = entry("steady video wall", (0.4, 0.2, 0.4));
        let p1 = build_prompt("q", &[&a]);
        let p2 = build_prompt("q", &[&a]);
        assert_eq!(p1, p2);
    }
}
