//! Validation of raw completion text into a preference vector.

use crate::error::{Error, Result};
use crate::qoe::PreferenceVector;

/// Extract the first bracketed triple of real numbers and normalize it.
///
/// Rules: the first `[...]` segment must contain at least three reals; any
/// negative value is rejected; a sum within [0.5, 2.0] is renormalized to 1,
/// anything outside that band is rejected.
pub fn parse_preference(raw_text: &str) -> Result<PreferenceVector> {
    let open = raw_text
        .find('[')
        .ok_or_else(|| Error::Parse(format!("no bracketed triple in {raw_text:?}")))?;
    let close = raw_text[open + 1..]
        .find(']')
        .map(|i| open + 1 + i)
        .ok_or_else(|| Error::Parse(format!("unclosed bracket in {raw_text:?}")))?;
    let inside = &raw_text[open + 1..close];

    let mut numbers = Vec::with_capacity(3);
    for token in inside.split(|c: char| !(c.is_ascii_digit() || "+-.eE".contains(c))) {
        if token.is_empty() || numbers.len() == 3 {
            continue;
        }
        if let Ok(v) = token.parse::<f64>() {
            numbers.push(v);
        }
    }
    if numbers.len() < 3 {
        return Err(Error::Parse(format!(
            "found {} numbers in bracketed segment {inside:?}, need 3",
            numbers.len()
        )));
    }
    let [w1, w2, w3] = [numbers[0], numbers[1], numbers[2]];
    if numbers.iter().any(|v| !v.is_finite()) {
        return Err(Error::Parse(format!("non-finite weight in {inside:?}")));
    }
    if w1 < 0.0 || w2 < 0.0 || w3 < 0.0 {
        return Err(Error::Parse(format!("negative weight in [{w1}, {w2}, {w3}]")));
    }
    let sum = w1 + w2 + w3;
    if !(0.5..=2.0).contains(&sum) {
        return Err(Error::Parse(format!(
            "weight sum {sum} outside the accepted band [0.5, 2.0]"
        )));
    }
    PreferenceVector::from_raw(w1, w2, w3)
}
