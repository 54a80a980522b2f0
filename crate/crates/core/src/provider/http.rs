//! Client for OpenAI-compatible text-completion endpoints
//! (`POST <base>/v1/completions`).

use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::{Backend, CompletionRequest, TransportError, TransportErrorKind};

pub const ENV_API_KEY: &str = "DSE_API_KEY";
pub const ENV_API_BASE: &str = "DSE_API_BASE";
pub const ENV_MODEL: &str = "DSE_MODEL";

pub const DEFAULT_API_BASE: &str = "https://api.openai.com";
pub const DEFAULT_MODEL: &str = "gpt-3.5-turbo-instruct";

#[derive(Clone)]
pub struct HttpConfig {
    pub base_url: String,
    pub api_key: Option<String>,
    pub model: String,
    pub timeout: Duration,
}

impl std::fmt::Debug for HttpConfig {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("HttpConfig")
            .field("base_url", &self.base_url)
            .field("api_key", &self.api_key.as_ref().map(|_| "<redacted>"))
            .field("model", &self.model)
            .field("timeout", &self.timeout)
            .finish()
    }
}

impl HttpConfig {
    pub fn new(base_url: &str, api_key: Option<&str>, model: &str) -> Self {
        Self {
            base_url: base_url.trim_end_matches('/').to_string(),
            api_key: api_key.map(str::to_string),
            model: model.to_string(),
            timeout: Duration::from_secs(60),
        }
    }

    /// Reads `DSE_API_BASE`, `DSE_API_KEY` and `DSE_MODEL`.
    pub fn from_env() -> Self {
        let base = std::env::var(ENV_API_BASE).unwrap_or_else(|_| DEFAULT_API_BASE.to_string());
        let key = std::env::var(ENV_API_KEY).ok().filter(|k| !k.is_empty());
        let model = std::env::var(ENV_MODEL).unwrap_or_else(|_| DEFAULT_MODEL.to_string());
        Self::new(&base, key.as_deref(), &model)
    }

    #[must_use]
    pub fn with_timeout(mut self, timeout: Duration) -> Self {
        self.timeout = timeout;
        self
    }

    pub fn endpoint(&self) -> String {
        format!("{}/v1/completions", self.base_url)
    }
}

#[derive(Serialize)]
struct WireRequest<'a> {
    model: &'a str,
    prompt: &'a str,
    max_tokens: u32,
    temperature: f64,
}

#[derive(Deserialize)]
struct WireResponse {
    choices: Vec<WireChoice>,
}

#[derive(Deserialize)]
struct WireChoice {
    text: String,
}

pub struct HttpBackend {
    config: HttpConfig,
    agent: ureq::Agent,
}

impl HttpBackend {
    pub fn new(config: HttpConfig) -> Self {
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(config.timeout))
            .http_status_as_error(false)
            .build()
            .new_agent();
        Self { config, agent }
    }

    pub fn config(&self) -> &HttpConfig {
        &self.config
    }
}

fn classify(err: ureq::Error) -> TransportError {
    let kind = match &err {
        ureq::Error::Timeout(_) => TransportErrorKind::Timeout,
        ureq::Error::Io(_) | ureq::Error::HostNotFound | ureq::Error::ConnectionFailed => {
            TransportErrorKind::Connection
        }
        ureq::Error::StatusCode(code) => TransportErrorKind::Status(*code),
        _ => TransportErrorKind::Protocol,
    };
    TransportError::new(kind, err.to_string())
}

impl Backend for HttpBackend {
    fn complete(&self, req: &CompletionRequest) -> Result<String, TransportError> {
        let body = WireRequest {
            model: &self.config.model,
            prompt: &req.prompt,
            max_tokens: req.max_tokens,
            temperature: req.temperature,
        };
        let mut builder = self.agent.post(self.config.endpoint());
        if let Some(key) = &self.config.api_key {
            builder = builder.header("Authorization", format!("Bearer {key}"));
        }
        let mut resp = builder.send_json(&body).map_err(classify)?;
        let status = resp.status().as_u16();
        if !(200..300).contains(&status) {
            let detail = resp.body_mut().read_to_string().unwrap_or_default();
            return Err(TransportError::new(
                TransportErrorKind::Status(status),
                format!(
                    "HTTP {status}: {}",
                    detail.chars().take(200).collect::<String>()
                ),
            ));
        }
        let parsed: WireResponse = resp.body_mut().read_json().map_err(classify)?;
        parsed
            .choices
            .into_iter()
            .next()
            .map(|c| c.text)
            .ok_or_else(|| TransportError::new(TransportErrorKind::Protocol, "no choices"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::{BufRead, BufReader, Read, Write};
    use std::net::TcpListener;

    fn request(prompt: &str) -> CompletionRequest {
        CompletionRequest::new("response", prompt, 32, 0.5)
    }

    #[test]
    fn unreachable_endpoint_fails_fast() {
        // Bind then drop to get a port nobody listens on.
        let port = TcpListener::bind("127.0.0.1:0")
            .unwrap()
            .local_addr()
            .unwrap()
            .port();
        let cfg = HttpConfig::new(&format!("http://127.0.0.1:{port}"), None, "m")
            .with_timeout(Duration::from_secs(2));
        let started = std::time::Instant::now();
        let err = HttpBackend::new(cfg).complete(&request("x")).unwrap_err();
        assert!(matches!(
            err.kind,
            TransportErrorKind::Connection | TransportErrorKind::Timeout
        ));
        assert!(started.elapsed() < Duration::from_secs(3));
    }

    /// Serves one canned HTTP response and hands back the raw request.
    fn one_shot_server(status: &str, body: &str) -> (String, std::thread::JoinHandle<String>) {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let addr = format!("http://{}", listener.local_addr().unwrap());
        let response = format!(
            "HTTP/1.1 {status}\r\ncontent-type: application/json\r\ncontent-length: {}\r\nconnection: close\r\n\r\n{body}",
            body.len()
        );
        let handle = std::thread::spawn(move || {
            let (stream, _) = listener.accept().unwrap();
            let mut reader = BufReader::new(stream);
            let mut head = String::new();
            let mut content_length = 0usize;
            loop {
                let mut line = String::new();
                reader.read_line(&mut line).unwrap();
                if let Some(v) = line.to_ascii_lowercase().strip_prefix("content-length:") {
                    content_length = v.trim().parse().unwrap();
                }
                head.push_str(&line);
                if line == "\r\n" {
                    break;
                }
            }
            let mut body = vec![0; content_length];
            reader.read_exact(&mut body).unwrap();
            reader.get_mut().write_all(response.as_bytes()).unwrap();
            head + &String::from_utf8(body).unwrap()
        });
        (addr, handle)
    }

    #[test]
    fn speaks_the_completions_wire_format() {
        let (base, server) = one_shot_server("200 OK", r#"{"choices":[{"text":"hello"}]}"#);
        let backend = HttpBackend::new(HttpConfig::new(&base, Some("sk-test"), "m1"));
        assert_eq!(backend.complete(&request("say hi")).unwrap(), "hello");
        let raw = server.join().unwrap();
        assert!(raw.starts_with("POST /v1/completions HTTP/1.1"));
        assert!(raw
            .to_ascii_lowercase()
            .contains("authorization: bearer sk-test"));
        let body: serde_json::Value =
            serde_json::from_str(&raw[raw.find("\r\n\r\n").unwrap() + 4..]).unwrap();
        assert_eq!(body["model"], "m1");
        assert_eq!(body["prompt"], "say hi");
        assert_eq!(body["max_tokens"], 32);
        assert_eq!(body["temperature"], 0.5);
    }

    #[test]
    fn non_success_status_is_a_transport_error() {
        let (base, server) = one_shot_server("429 Too Many Requests", r#"{"error":"slow down"}"#);
        let err = HttpBackend::new(HttpConfig::new(&base, None, "m"))
            .complete(&request("x"))
            .unwrap_err();
        server.join().unwrap();
        assert_eq!(err.kind, TransportErrorKind::Status(429));
    }

    #[test]
    fn debug_output_redacts_the_key() {
        let cfg = HttpConfig::new("http://x", Some("secret"), "m");
        assert!(!format!("{cfg:?}").contains("secret"));
    }
}
