//! Fetchers for the three-round liveness protocol.

use std::collections::HashMap;
use std::sync::Mutex;
use std::time::{Duration, Instant};

use rayon::prelude::*;

use super::accessibility::{AccessibilityRecord, FetchStatus, Method};
use crate::model::Timestamp;

pub trait Fetcher: Sync {
    /// `None` means the URL was not requested (for example, not allowlisted),
    /// so no record is produced.
    fn fetch(&self, method: Method, url: &str, attempt: u8) -> Option<FetchStatus>;
}

/// Replays previously recorded outcomes.
#[derive(Debug, Default, Clone)]
pub struct FixtureFetcher {
    outcomes: HashMap<(String, u8, Method), FetchStatus>,
}

impl FixtureFetcher {
    pub fn from_records(records: &[AccessibilityRecord]) -> Self {
        let outcomes = records
            .iter()
            .map(|r| ((r.url.clone(), r.attempt, r.method), r.status))
            .collect();
        Self { outcomes }
    }

    pub fn insert(&mut self, url: &str, attempt: u8, method: Method, status: FetchStatus) {
        self.outcomes.insert((url.to_string(), attempt, method), status);
    }
}

impl Fetcher for FixtureFetcher {
    fn fetch(&self, method: Method, url: &str, attempt: u8) -> Option<FetchStatus> {
        self.outcomes.get(&(url.to_string(), attempt, method)).copied()
    }
}

/// One round over `urls`: HEAD each, then GET the ones whose HEAD did not
/// return 200. At most `concurrency` requests are in flight. Records come
/// back sorted by URL, HEAD before GET.
pub fn run_attempt<F: Fetcher + ?Sized>(
    fetcher: &F,
    urls: &[String],
    attempt: u8,
    observed_at: Timestamp,
    concurrency: usize,
) -> Vec<AccessibilityRecord> {
    let check = |url: &String| {
        let mut out = Vec::with_capacity(2);
        let rec = |method, status| AccessibilityRecord {
            url: url.clone(),
            attempt,
            method,
            status,
            observed_at,
        };
        if let Some(head) = fetcher.fetch(Method::Head, url, attempt) {
            out.push(rec(Method::Head, head));
            if !head.is_ok() {
                if let Some(get) = fetcher.fetch(Method::Get, url, attempt) {
                    out.push(rec(Method::Get, get));
                }
            }
        }
        out
    };
    let mut urls: Vec<&String> = urls.iter().collect();
    urls.sort();
    urls.dedup();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(concurrency.max(1))
        .build()
        .expect("thread pool");
    pool.install(|| urls.par_iter().flat_map_iter(|u| check(u)).collect())
}

#[derive(Debug, Clone)]
pub struct HttpConfig {
    pub timeout: Duration,
    /// Prefix that `ipfs://` URLs are resolved against.
    pub ipfs_gateway: String,
    pub per_host_delay: Duration,
    /// Hosts that may be contacted; subdomains of a listed host are included.
    pub allowlist: Vec<String>,
}

impl Default for HttpConfig {
    fn default() -> Self {
        Self {
            timeout: Duration::from_secs(10),
            ipfs_gateway: "https://ipfs.io/ipfs/".into(),
            per_host_delay: Duration::from_millis(500),
            allowlist: Vec::new(),
        }
    }
}

/// Reads an allowlist: one host per line, `#` starts a comment.
pub fn parse_allowlist(text: &str) -> Vec<String> {
    text.lines()
        .map(|l| l.split('#').next().unwrap_or("").trim().to_ascii_lowercase())
        .filter(|l| !l.is_empty())
        .collect()
}

fn host_of(url: &str) -> Option<&str> {
    let rest = url.split_once("://")?.1;
    let authority = rest.split(['/', '?', '#']).next()?;
    let authority = authority.rsplit('@').next()?;
    let host = match authority.strip_prefix('[') {
        Some(v6) => v6.split(']').next()?,
        None => authority.split(':').next()?,
    };
    (!host.is_empty()).then_some(host)
}

/// Live HTTP checks. Redirects are followed and the final status recorded.
pub struct HttpFetcher {
    agent: ureq::Agent,
    cfg: HttpConfig,
    next_slot: Mutex<HashMap<String, Instant>>,
}

impl HttpFetcher {
    pub fn new(cfg: HttpConfig) -> Self {
        let config = ureq::Agent::config_builder()
            .timeout_global(Some(cfg.timeout))
            .http_status_as_error(false)
            .build();
        Self {
            agent: ureq::Agent::new_with_config(config),
            cfg,
            next_slot: Mutex::new(HashMap::new()),
        }
    }

    fn resolve(&self, url: &str) -> String {
        match url.trim().strip_prefix("ipfs://") {
            Some(rest) => format!(
                "{}{}",
                self.cfg.ipfs_gateway,
                rest.trim_start_matches("ipfs/")
            ),
            None => url.trim().to_string(),
        }
    }

    fn allowed(&self, host: &str) -> bool {
        let host = host.to_ascii_lowercase();
        self.cfg
            .allowlist
            .iter()
            .any(|a| host == *a || host.ends_with(&format!(".{a}")))
    }

    fn wait_for_host(&self, host: &str) {
        let start = {
            let mut slots = self.next_slot.lock().expect("host slot lock");
            let now = Instant::now();
            let start = slots.get(host).map_or(now, |&t| t.max(now));
            slots.insert(host.to_string(), start + self.cfg.per_host_delay);
            start
        };
        let now = Instant::now();
        if start > now {
            std::thread::sleep(start - now);
        }
    }
}

impl Fetcher for HttpFetcher {
    fn fetch(&self, method: Method, url: &str, _attempt: u8) -> Option<FetchStatus> {
        let target = self.resolve(url);
        let host = host_of(&target)?.to_string();
        if !self.allowed(&host) {
            log::debug!("not allowlisted, skipping {target}");
            return None;
        }
        self.wait_for_host(&host);
        let res = match method {
            Method::Head => self.agent.head(&target).call(),
            Method::Get => self.agent.get(&target).call(),
        };
        Some(match res {
            Ok(r) => FetchStatus::Code(r.status().as_u16()),
            Err(ureq::Error::StatusCode(c)) => FetchStatus::Code(c),
            Err(ureq::Error::Timeout(_)) => FetchStatus::Timeout,
            Err(e) => {
                log::debug!("{target}: {e}");
                FetchStatus::Unreachable
            }
        })
    }
}
