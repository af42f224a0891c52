//! Remote completion adapter: posts the prompt to an HTTP endpoint and
//! hands the response body back verbatim for parsing.

use std::time::Duration;

use slicesim::error::{Error, Result};
use slicesim::intent::LlmClient;

/// Environment variable holding the completion endpoint URL.
pub const ENDPOINT_VAR: &str = "SLICEBENCH_LLM_ENDPOINT";
/// Environment variable holding the bearer credential.
pub const API_KEY_VAR: &str = "SLICEBENCH_LLM_API_KEY";

const TIMEOUT: Duration = Duration::from_secs(10);

/// Blocking HTTP client for a hosted language model.
pub struct RemoteLlm {
    endpoint: String,
    api_key: String,
    http: reqwest::blocking::Client,
}

impl RemoteLlm {
    pub fn new(endpoint: String, api_key: String) -> Result<Self> {
        let http = reqwest::blocking::Client::builder()
            .timeout(TIMEOUT)
            .build()
            .map_err(|e| Error::Client(format!("building http client: {e}")))?;
        Ok(RemoteLlm { endpoint, api_key, http })
    }

    /// Read endpoint and credential from the environment.
    pub fn from_env() -> Result<Self> {
        let endpoint = std::env::var(ENDPOINT_VAR).map_err(|_| {
            Error::InvalidConfig(format!("remote client needs {ENDPOINT_VAR} set"))
        })?;
        let api_key = std::env::var(API_KEY_VAR)
            .map_err(|_| Error::InvalidConfig(format!("remote client needs {API_KEY_VAR} set")))?;
        Self::new(endpoint, api_key)
    }
}

impl LlmClient for RemoteLlm {
    fn complete(&mut self, prompt: &str) -> Result<String> {
        let response = self
            .http
            .post(&self.endpoint)
            .bearer_auth(&self.api_key)
            .body(prompt.to_owned())
            .send()
            .map_err(|e| Error::Client(format!("request to {}: {e}", self.endpoint)))?;
        let status = response.status();
        if !status.is_success() {
            return Err(Error::Client(format!("{} answered {status}", self.endpoint)));
        }
        response.text().map_err(|e| Error::Client(format!("reading response body: {e}")))
    }
}
