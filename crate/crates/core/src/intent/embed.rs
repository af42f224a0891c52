//! Deterministic text embedding: feature-hashed bag of words.
//!
//! Tokens are case-folded and stripped of punctuation, hashed (FNV-1a) into
//! a fixed number of buckets, square-root-scaled, and L2-normalized. No
//! randomness, no external state: the same text embeds identically across
//! processes.

use crate::error::{Error, Result};

/// Default embedding width.
pub const DEFAULT_DIM: usize = 256;

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h = FNV_OFFSET;
    for b in bytes {
        h ^= u64::from(*b);
        h = h.wrapping_mul(FNV_PRIME);
    }
    h
}

/// Lowercased alphanumeric tokens of `text`.
pub fn tokenize(text: &str) -> Vec<String> {
    text.to_lowercase()
        .split(|c: char| !c.is_alphanumeric())
        .filter(|t| !t.is_empty())
        .map(str::to_owned)
        .collect()
}

/// Embed `text` into a unit-norm vector of `dim` buckets.
pub fn embed(text: &str, dim: usize) -> Result<Vec<f64>> {
    if dim == 0 {
        return Err(Error::InvalidArgument("embedding dimension must be positive".into()));
    }
    if text.trim().is_empty() {
        return Err(Error::InvalidArgument("cannot embed empty text".into()));
    }
    let tokens = tokenize(text);
    if tokens.is_empty() {
        return Err(Error::InvalidArgument(format!(
            "no alphanumeric tokens in intent text {text:?}"
        )));
    }
    let mut counts = vec![0.0f64; dim];
    for token in &tokens {
        let bucket = (fnv1a(token.as_bytes()) % dim as u64) as usize;
        counts[bucket] += 1.0;
    }
    for c in counts.iter_mut() {
        *c = c.sqrt();
    }
    let norm = counts.iter().map(|c| c * c).sum::<f64>().sqrt();
    for c in counts.iter_mut() {
        *c /= norm;
    }
    Ok(counts)
}

/// Cosine similarity of two equal-length vectors.
pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        dot / (na * nb)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn embedding_is_deterministic_and_unit_norm() {
        let a = embed("Ultra low-latency robotic control", DEFAULT_DIM).unwrap();
        let b = embed("Ultra low-latency robotic control", DEFAULT_DIM).unwrap();
        assert_eq!(a, b);
        let norm: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
        assert!((norm - 1.0).abs() <= 1e-6);
        assert!((cosine(&a, &b) - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn case_and_punctuation_do_not_matter() {
        let a = embed("low latency control", DEFAULT_DIM).unwrap();
        let b = embed("  LOW, latency... CONTROL!!", DEFAULT_DIM).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn related_texts_score_higher_than_unrelated() {
        let base = embed("low latency control", DEFAULT_DIM).unwrap();
        let related = embed("ultra low latency robotic control", DEFAULT_DIM).unwrap();
        let unrelated = embed("bulk video archive upload", DEFAULT_DIM).unwrap();
        assert!(cosine(&base, &related) > cosine(&base, &unrelated));
    }

    #[test]
    fn disjoint_token_sets_without_collisions_are_orthogonal() {
        // These two token sets land in distinct buckets at dim 256.
        let a = embed("alpha beta", DEFAULT_DIM).unwrap();
        let b = embed("gamma delta", DEFAULT_DIM).unwrap();
        let buckets = |t: &str| (fnv1a(t.as_bytes()) % DEFAULT_DIM as u64) as usize;
        let set_a = [buckets("alpha"), buckets("beta")];
        let set_b = [buckets("gamma"), buckets("delta")];
        assert!(set_a.iter().all(|x| !set_b.contains(x)), "fixture collided; pick other words");
        assert!(cosine(&a, &b).abs() <= 1e-12);
    }

    #[test]
    fn repeated_tokens_scale_by_square_root() {
        let once = embed("telemetry", 8).unwrap();
        let thrice = embed("telemetry telemetry telemetry", 8).unwrap();
        // Single-token texts normalize to the same unit vector.
        assert_eq!(once, thrice);
        // But pre-normalization mass follows sqrt(count): check via a mix.
        let mixed = embed("telemetry telemetry telemetry backhaul", DEFAULT_DIM).unwrap();
        let tele = embed("telemetry", DEFAULT_DIM).unwrap();
        let back = embed("backhaul", DEFAULT_DIM).unwrap();
        let expected_ratio = 3.0f64.sqrt();
        let wt = cosine(&mixed, &tele);
        let wb = cosine(&mixed, &back);
        assert!((wt / wb - expected_ratio).abs() < 1e-9);
    }

    #[test]
    fn empty_or_tokenless_text_is_rejected() {
        assert!(embed("", DEFAULT_DIM).is_err());
        assert!(embed("   \t ", DEFAULT_DIM).is_err());
        assert!(embed("!!! ---", DEFAULT_DIM).is_err());
    }
}
