use std::collections::BTreeSet;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, SystemTime, UNIX_EPOCH};

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand};
use nftm_forensics::graphs::{build_graphs, write_bid_edge_list, write_edge_list};
use nftm_forensics::integrity::hash_image_dir;
use nftm_forensics::link_audit::{
    escrow_series, parse_allowlist, read_records, run_attempt, write_escrow_csv, write_records,
    HttpConfig, HttpFetcher, ATTEMPTS,
};
use nftm_forensics::model::{
    AccountId, AssetRecord, EventStream, IngestError, IngestOptions, Ingestor,
};
use nftm_forensics::report::{
    analyze, audit, parse_detectors, AuditInputs, DetectorConfig, RunReport,
};
use nftm_forensics::synth::{gen_baseline, inject, write_labels, InjectionSpec};
use rust_decimal::Decimal;

#[derive(Parser)]
#[command(name = "nftm", version, about = "Forensics over NFT marketplace event data")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
#[allow(clippy::large_enum_variant)]
enum Command {
    /// Validate and normalize input files.
    Ingest(IngestArgs),
    /// Run malpractice detectors and write a JSON report.
    Detect(DetectArgs),
    /// Audit URL liveness, metadata drift, verification and escrow.
    Audit(AuditArgs),
    /// Generate a labeled synthetic market.
    Synth(SynthArgs),
    /// Print the summary of a saved detection report.
    Report(ReportArgs),
}

#[derive(Args)]
struct InputArgs {
    /// Newline-delimited event file (repeatable).
    #[arg(long, value_name = "PATH")]
    events: Vec<PathBuf>,
    /// Newline-delimited asset file (repeatable).
    #[arg(long, value_name = "PATH")]
    assets: Vec<PathBuf>,
    /// Field naming the record kind.
    #[arg(long, default_value = "type")]
    discriminator: String,
}

#[derive(Args)]
struct IngestArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Write the normalized records here.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Write sale, payment, transfer and bid edge lists into this directory.
    #[arg(long, value_name = "DIR")]
    edges: Option<PathBuf>,
}

/// Threshold overrides; each takes precedence over the config file.
#[derive(Args, Default)]
struct Thresholds {
    #[arg(long)]
    epsilon: Option<String>,
    #[arg(long)]
    max_component_users: Option<String>,
    #[arg(long, value_name = "all_connected_pairs|heavy_pair_cycles")]
    epsilon_rule: Option<String>,
    #[arg(long)]
    hub_degree_cutoff: Option<String>,
    #[arg(long)]
    min_bids: Option<String>,
    #[arg(long)]
    sigma: Option<String>,
    #[arg(long)]
    mu: Option<String>,
    #[arg(long)]
    require_cancel_near_end: Option<String>,
    #[arg(long)]
    cancel_window_seconds: Option<String>,
    #[arg(long)]
    require_no_outbidding: Option<String>,
    #[arg(long)]
    name_max_distance: Option<String>,
    #[arg(long)]
    name_min_len: Option<String>,
    #[arg(long)]
    name_min_assets: Option<String>,
    #[arg(long)]
    hamming_threshold: Option<String>,
    #[arg(long)]
    evasion_window_seconds: Option<String>,
}

impl Thresholds {
    fn pairs(&self) -> Vec<(&'static str, &Option<String>)> {
        vec![
            ("epsilon", &self.epsilon),
            ("max_component_users", &self.max_component_users),
            ("epsilon_rule", &self.epsilon_rule),
            ("hub_degree_cutoff", &self.hub_degree_cutoff),
            ("min_bids", &self.min_bids),
            ("sigma", &self.sigma),
            ("mu", &self.mu),
            ("require_cancel_near_end", &self.require_cancel_near_end),
            ("cancel_window_seconds", &self.cancel_window_seconds),
            ("require_no_outbidding", &self.require_no_outbidding),
            ("name_max_distance", &self.name_max_distance),
            ("name_min_len", &self.name_min_len),
            ("name_min_assets", &self.name_min_assets),
            ("hamming_threshold", &self.hamming_threshold),
            ("evasion_window_seconds", &self.evasion_window_seconds),
        ]
    }
}

#[derive(Args)]
struct DetectArgs {
    #[command(flatten)]
    input: InputArgs,
    /// `key = value` threshold file.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Comma-separated: wash, shill, shield, counterfeit, evasion, all.
    #[arg(long, default_value = "all")]
    which: String,
    /// Directory of asset images named `<contract>_<token_id>`.
    #[arg(long, value_name = "DIR")]
    images: Option<PathBuf>,
    /// Report destination.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    #[command(flatten)]
    thresholds: Thresholds,
}

#[derive(Args)]
struct AuditArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Accessibility records from earlier rounds.
    #[arg(long, value_name = "PATH")]
    records: Vec<PathBuf>,
    /// Earlier crawl of the asset table, for drift and take-down analysis.
    #[arg(long, value_name = "PATH")]
    previous_assets: Option<PathBuf>,
    /// Escrow account whose holdings to count.
    #[arg(long, value_name = "ADDRESS")]
    escrow: Option<String>,
    /// Count escrow holdings as of this time (default: end of input).
    #[arg(long, value_name = "UNIX_SECONDS")]
    at: Option<u64>,
    /// Write the escrow holding series as CSV.
    #[arg(long, value_name = "PATH", requires = "escrow")]
    escrow_csv: Option<PathBuf>,
    /// Never touch the network (the default).
    #[arg(long, default_value_t = true, conflicts_with = "live")]
    offline: bool,
    /// Run one live liveness round over the asset URLs.
    #[arg(long, requires_all = ["allowlist", "attempt", "records_out"])]
    live: bool,
    /// Hosts that may be contacted, one per line.
    #[arg(long, value_name = "PATH")]
    allowlist: Option<PathBuf>,
    /// Round number of the live check (1 to 3).
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3))]
    attempt: Option<u8>,
    /// Where to append the live round's records.
    #[arg(long, value_name = "PATH")]
    records_out: Option<PathBuf>,
    #[arg(long, default_value_t = 8)]
    concurrency: usize,
    #[arg(long, default_value_t = 500)]
    per_host_delay_ms: u64,
    /// Report destination.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value_t = 200)]
    users: usize,
    #[arg(long = "assets", default_value_t = 100)]
    n_assets: usize,
    #[arg(long, default_value_t = 2000)]
    sales: usize,
    /// Inject a wash ring of K accounts trading M times per hop (repeatable).
    #[arg(long, value_name = "K:M")]
    wash_ring: Vec<String>,
    /// Inject this many shill auctions.
    #[arg(long, default_value_t = 0)]
    shill: usize,
    /// Inject a shield auction with these bid amounts (repeatable).
    #[arg(long, value_name = "LOW:HIGH")]
    shield: Vec<String>,
    /// Output directory for events.ndjson, assets.ndjson and labels.ndjson.
    #[arg(long, value_name = "DIR")]
    out: PathBuf,
}

#[derive(Args)]
struct ReportArgs {
    /// A report written by `detect`.
    #[arg(long = "in", value_name = "PATH")]
    input: PathBuf,
}

/// Input problems exit 1, configuration problems exit 2.
enum Failure {
    Input(anyhow::Error),
    Config(String),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Input(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Input(e.into())
    }
}

impl From<IngestError> for Failure {
    fn from(e: IngestError) -> Self {
        Failure::Input(e.into())
    }
}

fn open(path: &Path) -> anyhow::Result<BufReader<File>> {
    let f = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    Ok(BufReader::new(f))
}

fn create(path: &Path) -> anyhow::Result<BufWriter<File>> {
    let f = File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
    Ok(BufWriter::new(f))
}

fn load(input: &InputArgs) -> anyhow::Result<EventStream> {
    if input.events.is_empty() && input.assets.is_empty() {
        return Err(anyhow!("no input: pass --events and/or --assets"));
    }
    let mut ing = Ingestor::new(IngestOptions {
        discriminator: input.discriminator.clone(),
        ..IngestOptions::default()
    });
    for path in input.assets.iter().chain(&input.events) {
        ing.read(&path.display().to_string(), open(path)?)?;
    }
    let stream = ing.finish();
    for d in &stream.diagnostics {
        let at = d.line.map(|l| format!(":{l}")).unwrap_or_default();
        log::warn!("{}{at}: {}", d.source, d.message);
    }
    Ok(stream)
}

fn write_out(path: Option<&Path>, text: &str) -> anyhow::Result<()> {
    if let Some(p) = path {
        let mut w = create(p)?;
        w.write_all(text.as_bytes())?;
        w.flush()?;
    }
    Ok(())
}

fn cmd_ingest(a: IngestArgs) -> Result<(), Failure> {
    let stream = load(&a.input)?;
    if let Some(p) = &a.out {
        let mut w = create(p)?;
        stream.write_ndjson(&mut w).context("writing normalized records")?;
        w.flush()?;
    }
    if let Some(dir) = &a.edges {
        std::fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
        let g = build_graphs(&stream);
        write_edge_list(&g.sales, create(&dir.join("sales.tsv"))?)?;
        write_edge_list(&g.payments, create(&dir.join("payments.tsv"))?)?;
        write_edge_list(&g.transfers, create(&dir.join("transfers.tsv"))?)?;
        write_bid_edge_list(&g.bids, create(&dir.join("bids.tsv"))?)?;
    }
    println!(
        "{} events, {} assets, {} diagnostics",
        stream.len(),
        stream.assets().len(),
        stream.diagnostics.len()
    );
    Ok(())
}

fn build_config(a: &DetectArgs) -> Result<DetectorConfig, Failure> {
    let mut cfg = DetectorConfig::default();
    if let Some(p) = &a.config {
        let text = std::fs::read_to_string(p)
            .with_context(|| format!("cannot read config {}", p.display()))?;
        cfg.apply_file(&p.display().to_string(), &text)
            .map_err(|e| Failure::Config(e.to_string()))?;
    }
    for (key, value) in a.thresholds.pairs() {
        if let Some(v) = value {
            let flag = format!("--{}", key.replace('_', "-"));
            cfg.set(key, v).map_err(|m| Failure::Config(format!("{flag}: {m}")))?;
            cfg.validate().map_err(|m| Failure::Config(format!("{flag}: {m}")))?;
        }
    }
    Ok(cfg)
}

fn cmd_detect(a: DetectArgs) -> Result<(), Failure> {
    let which = parse_detectors(&a.which).map_err(|m| Failure::Config(format!("--which: {m}")))?;
    let cfg = build_config(&a)?;
    let stream = load(&a.input)?;
    let hashes = match &a.images {
        Some(dir) => {
            let h = hash_image_dir(dir, stream.assets())
                .with_context(|| format!("cannot read images in {}", dir.display()))?;
            for s in &h.skipped {
                log::warn!("image of {} skipped: {}", s.asset, s.reason);
            }
            Some(h.hashes)
        }
        None => None,
    };
    let report = analyze(&stream, &cfg, &which, hashes.as_deref());
    write_out(a.out.as_deref(), &report.to_json())?;
    print!("{}", report.summary_text());
    Ok(())
}

fn now() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

fn cmd_audit(a: AuditArgs) -> Result<(), Failure> {
    let stream = load(&a.input)?;
    let mut records = Vec::new();
    for p in &a.records {
        records.extend(read_records(open(p)?).with_context(|| format!("in {}", p.display()))?);
    }
    if a.live {
        let (Some(allow), Some(attempt), Some(out)) = (&a.allowlist, a.attempt, &a.records_out)
        else {
            unreachable!("clap enforces the live arguments");
        };
        let text = std::fs::read_to_string(allow)
            .with_context(|| format!("cannot read allowlist {}", allow.display()))?;
        let fetcher = HttpFetcher::new(HttpConfig {
            allowlist: parse_allowlist(&text),
            per_host_delay: Duration::from_millis(a.per_host_delay_ms),
            ..HttpConfig::default()
        });
        let mut urls: Vec<String> = stream
            .assets()
            .iter()
            .flat_map(|r: &AssetRecord| [r.image_url(), r.metadata_url()])
            .flatten()
            .map(str::to_string)
            .collect();
        urls.sort();
        urls.dedup();
        let fresh = run_attempt(&fetcher, &urls, attempt, now(), a.concurrency);
        let mut w = std::fs::OpenOptions::new()
            .create(true)
            .append(true)
            .open(out)
            .with_context(|| format!("cannot open {}", out.display()))?;
        write_records(&mut w, &fresh)?;
        eprintln!("attempt {attempt}/{ATTEMPTS}: {} records", fresh.len());
        records.extend(fresh);
    }
    let previous = match &a.previous_assets {
        Some(p) => {
            let mut ing = Ingestor::new(IngestOptions::default());
            ing.read(&p.display().to_string(), open(p)?)?;
            Some(ing.finish().assets().to_vec())
        }
        None => None,
    };
    let escrow = match &a.escrow {
        Some(s) => {
            let acct: AccountId = s
                .parse()
                .map_err(|e| Failure::Config(format!("--escrow: {e}")))?;
            let at = a
                .at
                .unwrap_or_else(|| stream.events().last().map_or(0, |e| e.time()));
            Some((acct, at))
        }
        None => None,
    };
    if let (Some(p), Some((acct, _))) = (&a.escrow_csv, escrow) {
        let mut w = create(p)?;
        write_escrow_csv(&mut w, &escrow_series(&stream, &acct))?;
        w.flush()?;
    }
    let report = audit(
        &stream,
        AuditInputs {
            records: (!a.records.is_empty() || a.live).then_some(&records[..]),
            previous_assets: previous.as_deref(),
            escrow,
        },
    );
    write_out(a.out.as_deref(), &report.to_json())?;
    print!("{}", report.summary_text());
    Ok(())
}

fn split_pair(flag: &str, s: &str) -> Result<(String, String), Failure> {
    s.split_once(':')
        .map(|(a, b)| (a.trim().to_string(), b.trim().to_string()))
        .ok_or_else(|| Failure::Config(format!("{flag}: expected A:B, got {s:?}")))
}

fn cmd_synth(a: SynthArgs) -> Result<(), Failure> {
    let mut specs = Vec::new();
    let mut seed = a.seed;
    let mut next_seed = || {
        seed = seed.wrapping_add(1);
        seed
    };
    for r in &a.wash_ring {
        let (k, m) = split_pair("--wash-ring", r)?;
        let bad = |e: std::num::ParseIntError| Failure::Config(format!("--wash-ring {r}: {e}"));
        specs.push(InjectionSpec::wash_ring(k.parse().map_err(bad)?, m.parse().map_err(bad)?, next_seed()));
    }
    for _ in 0..a.shill {
        specs.push(InjectionSpec::shill_auction(next_seed()));
    }
    for s in &a.shield {
        let (lo, hi) = split_pair("--shield", s)?;
        let bad = |e: rust_decimal::Error| Failure::Config(format!("--shield {s}: {e}"));
        let lo: Decimal = lo.parse().map_err(bad)?;
        let hi: Decimal = hi.parse().map_err(bad)?;
        specs.push(InjectionSpec::shield_auction(lo, hi, next_seed()));
    }
    let mut scenario = gen_baseline(a.seed, a.users, a.n_assets, a.sales)
        .map_err(|e| Failure::Config(e.to_string()))?;
    for spec in &specs {
        scenario = inject(scenario, spec).map_err(|e| Failure::Config(e.to_string()))?;
    }
    std::fs::create_dir_all(&a.out).with_context(|| format!("cannot create {}", a.out.display()))?;
    let mut w = create(&a.out.join("events.ndjson"))?;
    scenario.stream.write_events_ndjson(&mut w)?;
    w.flush()?;
    let mut w = create(&a.out.join("assets.ndjson"))?;
    scenario.stream.write_assets_ndjson(&mut w)?;
    w.flush()?;
    let mut w = create(&a.out.join("labels.ndjson"))?;
    write_labels(&mut w, &scenario.labels)?;
    w.flush()?;
    println!(
        "{} events, {} assets, {} labels written to {}",
        scenario.stream.len(),
        scenario.stream.assets().len(),
        scenario.labels.len(),
        a.out.display()
    );
    Ok(())
}

fn cmd_report(a: ReportArgs) -> Result<(), Failure> {
    let text = std::fs::read_to_string(&a.input)
        .with_context(|| format!("cannot read {}", a.input.display()))?;
    let report: RunReport = serde_json::from_str(&text)
        .with_context(|| format!("{} is not a detection report", a.input.display()))?;
    print!("{}", report.summary_text());
    let which: BTreeSet<_> = report.detectors.iter().map(|d| format!("{d:?}").to_lowercase()).collect();
    println!("detectors: {}", which.into_iter().collect::<Vec<_>>().join(","));
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Ingest(a) => cmd_ingest(a),
        Command::Detect(a) => cmd_detect(a),
        Command::Audit(a) => cmd_audit(a),
        Command::Synth(a) => cmd_synth(a),
        Command::Report(a) => cmd_report(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Input(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
        Err(Failure::Config(m)) => {
            eprintln!("config error: {m}");
            ExitCode::from(2)
        }
    }
}
