//! Pluggable completion clients: a deterministic keyword mock by default.

use crate::error::Result;

/// Anything that can turn a prompt into raw completion text.
pub trait LlmClient {
    fn complete(&mut self, prompt: &str) -> Result<String>;
}

/// Keyword table driving [`MockLlm`]: first matching keyword wins, scanning
/// in the listed order against the query intent line.
pub const MOCK_KEYWORD_TABLE: &[(&str, [f64; 3])] = &[
    ("safety", [0.3, 0.5, 0.2]),
    ("control", [0.3, 0.5, 0.2]),
    ("latency", [0.55, 0.30, 0.15]),
    ("real-time", [0.55, 0.30, 0.15]),
    ("budget", [0.2, 0.2, 0.6]),
    ("cost", [0.2, 0.2, 0.6]),
    ("video", [0.4, 0.2, 0.4]),
    ("monitoring", [0.4, 0.2, 0.4]),
];

/// Deterministic stand-in for a language model: scans the final query line
/// of the prompt for known keywords and emits the mapped weight triple.
#[derive(Debug, Default, Clone, Copy)]
pub struct MockLlm;

impl MockLlm {
    /// The query line is the last "Intent:" line of the prompt (exemplar
    /// intents come earlier and must not trigger the table).
    fn query_line(prompt: &str) -> &str {
        prompt
            .lines()
            .rev()
            .find(|l| l.starts_with("Intent:"))
            .unwrap_or("")
    }
}

impl LlmClient for MockLlm {
    fn complete(&mut self, prompt: &str) -> Result<String> {
        let line = Self::query_line(prompt).to_lowercase();
        for (keyword, w) in MOCK_KEYWORD_TABLE {
            if line.contains(keyword) {
                return Ok(format!("[{}, {}, {}]", w[0], w[1], w[2]));
            }
        }
        Ok("[0.34, 0.33, 0.33]".to_owned())
    }
}

/// Test double that fails or misbehaves a scripted number of times.
#[derive(Debug, Default)]
pub struct ScriptedClient {
    /// Responses returned in order; `Err` entries simulate transport failure.
    pub script: Vec<Result<String>>,
    pub calls: usize,
}

impl LlmClient for ScriptedClient {
    fn complete(&mut self, _prompt: &str) -> Result<String> {
        let i = self.calls;
        self.calls += 1;
        match self.script.get_mut(i) {
            Some(slot) => std::mem::replace(slot, Ok(String::new())),
            None => Ok(String::new()),
        }
    }
}
