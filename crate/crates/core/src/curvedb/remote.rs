//! HTTP lookup of curves by Cremona label, with retries and a file cache.

use std::fs;
use std::path::{Path, PathBuf};
use std::thread::sleep;
use std::time::Duration;

use num_bigint::BigInt;
use serde_json::Value;

use super::{parse_label, CurveRecord};
use crate::error::{Error, Result};

pub const DEFAULT_URL_TEMPLATE: &str =
    "https://www.lmfdb.org/api/ec_curvedata/?Clabel={label}&_format=json&_fields=Clabel,ainvs,conductor";

#[derive(Clone, Debug)]
pub struct RemoteConfig {
    /// URL with a `{label}` placeholder.
    pub url_template: String,
    pub cache_dir: Option<PathBuf>,
    pub timeout: Duration,
    pub max_retries: u32,
    pub backoff: Duration,
}

impl Default for RemoteConfig {
    fn default() -> Self {
        RemoteConfig {
            url_template: DEFAULT_URL_TEMPLATE.to_string(),
            cache_dir: None,
            timeout: Duration::from_secs(10),
            max_retries: 3,
            backoff: Duration::from_millis(500),
        }
    }
}

#[derive(Debug)]
pub struct RemoteClient {
    config: RemoteConfig,
    agent: ureq::Agent,
}

impl RemoteClient {
    pub fn new(config: RemoteConfig) -> Self {
        let agent = ureq::AgentBuilder::new().timeout(config.timeout).build();
        RemoteClient { config, agent }
    }

    pub fn config(&self) -> &RemoteConfig {
        &self.config
    }

    fn cache_path(&self, label: &str) -> Option<PathBuf> {
        self.config.cache_dir.as_ref().map(|d| d.join(format!("{label}.json")))
    }

    /// Cached record if present, otherwise a validated remote fetch.
    pub fn fetch(&self, label: &str) -> Result<CurveRecord> {
        parse_label(label)?;
        if let Some(path) = self.cache_path(label) {
            if let Ok(text) = fs::read_to_string(&path) {
                if let Ok(rec) = serde_json::from_str::<CurveRecord>(&text) {
                    if rec.label == label && rec.validate().is_ok() {
                        return Ok(rec);
                    }
                }
            }
        }
        let body = self.get_with_retries(label)?;
        let rec = parse_response(label, &body)?;
        rec.validate()?;
        if let Some(path) = self.cache_path(label) {
            write_atomic(&path, &serde_json::to_string(&rec).expect("record serialises"))?;
        }
        Ok(rec)
    }

    fn get_with_retries(&self, label: &str) -> Result<String> {
        let url = self.config.url_template.replace("{label}", label);
        let mut delay = self.config.backoff;
        let mut last = String::new();
        for attempt in 0..=self.config.max_retries {
            if attempt > 0 {
                sleep(delay);
                delay *= 2;
            }
            match self.agent.get(&url).call() {
                Ok(resp) => {
                    return resp.into_string().map_err(|e| Error::Database(format!("reading response: {e}")));
                }
                // Client errors will not improve on retry.
                Err(ureq::Error::Status(code, _)) if (400..500).contains(&code) => {
                    return Err(Error::Database(format!("{url}: HTTP {code}")));
                }
                Err(e) => last = e.to_string(),
            }
        }
        Err(Error::Database(format!("{url}: giving up after retries: {last}")))
    }
}

fn as_bigint(v: &Value) -> Option<BigInt> {
    match v {
        Value::Number(n) => n.as_i64().map(BigInt::from).or_else(|| n.to_string().parse().ok()),
        Value::String(s) => s.parse().ok(),
        _ => None,
    }
}

/// Validates the `{"data": [{"Clabel", "ainvs", "conductor"}]}` shape.
pub(crate) fn parse_response(label: &str, body: &str) -> Result<CurveRecord> {
    let schema = |what: &str| Error::Database(format!("response for {label}: {what}"));
    let v: Value = serde_json::from_str(body).map_err(|e| schema(&format!("not JSON ({e})")))?;
    let rows = v.get("data").and_then(Value::as_array).ok_or_else(|| schema("missing data array"))?;
    let row = match rows.as_slice() {
        [] => return Err(Error::NotFound(label.to_string())),
        [row] => row,
        _ => return Err(schema("more than one row")),
    };
    let got = row.get("Clabel").and_then(Value::as_str).ok_or_else(|| schema("missing Clabel"))?;
    if got != label {
        return Err(schema(&format!("label mismatch ({got})")));
    }
    let ainvs = row.get("ainvs").and_then(Value::as_array).ok_or_else(|| schema("missing ainvs"))?;
    let parsed: Vec<BigInt> = ainvs.iter().map(as_bigint).collect::<Option<_>>().ok_or_else(|| schema("non-integer ainvs"))?;
    let a_invariants: [BigInt; 5] = parsed.try_into().map_err(|_| schema("expected five ainvs"))?;
    let conductor = row.get("conductor").and_then(as_bigint).ok_or_else(|| schema("missing conductor"))?;
    Ok(CurveRecord { label: label.to_string(), a_invariants, conductor })
}

/// Writes through a temporary file in the same directory and renames it
/// into place, so concurrent readers never see a partial file.
fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let io = |e: std::io::Error| Error::Database(format!("cache write {}: {e}", path.display()));
    let dir = path.parent().unwrap_or(Path::new("."));
    fs::create_dir_all(dir).map_err(io)?;
    let tmp = dir.join(format!(".{}.{}.tmp", path.file_name().unwrap().to_string_lossy(), std::process::id()));
    fs::write(&tmp, contents).map_err(io)?;
    fs::rename(&tmp, path).map_err(io)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::{Read, Write};
    use std::net::TcpListener;
    use std::sync::atomic::{AtomicUsize, Ordering};
    use std::sync::Arc;

    /// Serves canned responses; the first `fail_first` requests get HTTP 503.
    fn mock_server(body: &'static str, fail_first: usize) -> (String, Arc<AtomicUsize>) {
        let listener = TcpListener::bind("127.0.0.1:0").unwrap();
        let addr = listener.local_addr().unwrap();
        let hits = Arc::new(AtomicUsize::new(0));
        let counter = hits.clone();
        std::thread::spawn(move || {
            for stream in listener.incoming() {
                let Ok(mut s) = stream else { break };
                let mut buf = [0u8; 4096];
                let _ = s.read(&mut buf);
                let n = counter.fetch_add(1, Ordering::SeqCst);
                let (status, text) = if n < fail_first { ("503 Service Unavailable", "") } else { ("200 OK", body) };
                let _ = write!(
                    s,
                    "HTTP/1.1 {status}\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{text}",
                    text.len()
                );
            }
        });
        (format!("http://{addr}/api?label={{label}}"), hits)
    }

    fn client(url: String, cache: Option<PathBuf>) -> RemoteClient {
        RemoteClient::new(RemoteConfig {
            url_template: url,
            cache_dir: cache,
            timeout: Duration::from_secs(5),
            max_retries: 3,
            backoff: Duration::from_millis(5),
        })
    }

    const BODY_11A1: &str = r#"{"data": [{"Clabel": "11a1", "ainvs": [0, -1, 1, -10, -20], "conductor": 11}]}"#;

    #[test]
    fn fetch_retry_and_cache() {
        let (url, hits) = mock_server(BODY_11A1, 2);
        let dir = tempfile::tempdir().unwrap();
        let c = client(url, Some(dir.path().to_path_buf()));
        let rec = c.fetch("11a1").unwrap();
        assert_eq!(rec.conductor, BigInt::from(11));
        assert_eq!(hits.load(Ordering::SeqCst), 3);
        // Second fetch is served from the cache.
        assert_eq!(c.fetch("11a1").unwrap(), rec);
        assert_eq!(hits.load(Ordering::SeqCst), 3);
        assert!(dir.path().join("11a1.json").exists());
    }

    #[test]
    fn gives_up_after_retries() {
        let (url, hits) = mock_server(BODY_11A1, 100);
        let c = client(url, None);
        assert!(matches!(c.fetch("11a1"), Err(Error::Database(_))));
        assert_eq!(hits.load(Ordering::SeqCst), 4);
    }

    #[test]
    fn schema_validation() {
        assert!(parse_response("11a1", "[]").is_err());
        assert!(parse_response("11a1", r#"{"data": []}"#).is_err());
        assert!(parse_response("11a1", r#"{"data": [{"Clabel": "11a2", "ainvs": [0,0,0,0,1], "conductor": 11}]}"#).is_err());
        assert!(parse_response("11a1", r#"{"data": [{"Clabel": "11a1", "ainvs": [0,0,1], "conductor": 11}]}"#).is_err());
        let rec = parse_response("11a1", BODY_11A1).unwrap();
        assert!(rec.validate().is_ok());
        // Wrong a-invariants are caught by the conductor round trip.
        let bad = r#"{"data": [{"Clabel": "11a1", "ainvs": ["1", "0", "1", "4", "-6"], "conductor": 11}]}"#;
        assert!(parse_response("11a1", bad).unwrap().validate().is_err());
    }

    #[test]
    fn db_falls_back_to_remote() {
        let (url, _) = mock_server(BODY_11A1, 0);
        let db = super::super::CurveDb::bundled().with_remote(client(url, None));
        assert_eq!(db.lookup("11a1").unwrap().conductor, BigInt::from(11));
    }
}
