//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails.

use std::collections::{BTreeSet, HashSet};
use std::process::ExitCode;
use std::str::FromStr;
use std::time::{Duration, Instant};

use image::{GrayImage, Luma};
use nftm_forensics::graphs::{scc, wcc, DiGraph, GraphContext, DEFAULT_HUB_DEGREE_CUTOFF};
use nftm_forensics::integrity::{detect_offplatform_trades, levenshtein, perceptual_hash};
use nftm_forensics::link_audit::{
    classify_accessibility, AccessibilityRecord, FetchStatus, Liveness, Method,
};
use nftm_forensics::model::{
    ingest, AccountId, AssetId, AuctionStart, Bid, Event, EventStream, IngestOptions, Paid, Sale,
    Transfer, TxHash, Win,
};
use nftm_forensics::report::{analyze, parse_detectors, DetectorConfig};
use nftm_forensics::synth::{gen_baseline, inject, InjectionSpec, MalpracticeKind, Scenario};
use nftm_forensics::trading::{
    detect_bid_shielding, detect_shill_bids, detect_wash_trades, flagged_sale_set, ShieldConfig,
    ShillConfig, WashConfig, WashTrigger,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rust_decimal::Decimal;

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn acct(n: u32) -> AccountId {
    let mut b = [0u8; 20];
    b[16..].copy_from_slice(&n.to_be_bytes());
    AccountId::from_bytes(b)
}

fn dec(s: &str) -> Decimal {
    Decimal::from_str(s).unwrap()
}

// 1 -------------------------------------------------------------------------

fn reach_closure(n: usize, edges: &[(usize, usize)], undirected: bool) -> Vec<Vec<bool>> {
    let mut r = vec![vec![false; n]; n];
    for (i, row) in r.iter_mut().enumerate() {
        row[i] = true;
    }
    for &(a, b) in edges {
        r[a][b] = true;
        if undirected {
            r[b][a] = true;
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if r[i][k] && r[k][j] {
                    r[i][j] = true;
                }
            }
        }
    }
    r
}

fn graph_oracles() -> Check {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for trial in 0..1000 {
        let n = rng.random_range(1..=12usize);
        let m = rng.random_range(0..=30usize);
        let edges: Vec<(usize, usize)> = (0..m)
            .map(|_| (rng.random_range(0..n), rng.random_range(0..n)))
            .collect();
        let mut g: DiGraph<()> = DiGraph::new();
        for i in 0..n {
            g.add_node(acct(i as u32));
        }
        for (k, &(a, b)) in edges.iter().enumerate() {
            g.add_edge(acct(a as u32), acct(b as u32), k, ());
        }
        let s = scc(&g);
        let w = wcc(&g);
        let directed = reach_closure(n, &edges, false);
        let undirected = reach_closure(n, &edges, true);
        for i in 0..n {
            for j in 0..n {
                let (a, b) = (acct(i as u32), acct(j as u32));
                ensure(
                    s.same_component(&a, &b) == (directed[i][j] && directed[j][i]),
                    format!("SCC mismatch in graph {trial} at ({i},{j})"),
                )?;
                ensure(
                    w.same_component(&a, &b) == undirected[i][j],
                    format!("WCC mismatch in graph {trial} at ({i},{j})"),
                )?;
            }
        }
    }
    let t = start.elapsed();
    ensure(t < Duration::from_secs(5), format!("took {t:?}"))?;
    Ok(format!("1000 graphs match reachability oracles in {t:.2?}"))
}

// 2 -------------------------------------------------------------------------

fn wash_end_to_end() -> Check {
    let start = Instant::now();
    let mut s = gen_baseline(42, 200, 100, 2000).map_err(|e| e.to_string())?;
    let baseline_len = s.stream.len();
    for (i, k) in [2usize, 3, 5, 2, 3].into_iter().enumerate() {
        s = inject(s, &InjectionSpec::wash_ring(k, 12, 100 + i as u64)).map_err(|e| e.to_string())?;
    }
    let ctx = GraphContext::new(&s.stream, DEFAULT_HUB_DEGREE_CUTOFF);
    let findings = detect_wash_trades(&s.stream, &ctx, &WashConfig::default());
    let flagged = flagged_sale_set(&findings);
    let labeled: HashSet<usize> = s
        .labels_of(MalpracticeKind::WashTrading)
        .flat_map(|l| l.events.iter().copied())
        .filter(|&i| s.stream.events()[i].as_sale().is_some())
        .collect();
    let recalled = labeled.intersection(&flagged).count();
    let baseline_hits = flagged.iter().filter(|&&i| i < baseline_len).count();
    ensure(recalled == labeled.len(), format!("recall {recalled}/{}", labeled.len()))?;
    ensure(baseline_hits == 0, format!("{baseline_hits} baseline sales flagged"))?;

    let mut light = gen_baseline(42, 200, 100, 2000).map_err(|e| e.to_string())?;
    for (i, k) in [2usize, 3, 5].into_iter().enumerate() {
        light = inject(light, &InjectionSpec::wash_ring(k, 4, 200 + i as u64)).map_err(|e| e.to_string())?;
    }
    let ctx = GraphContext::new(&light.stream, DEFAULT_HUB_DEGREE_CUTOFF);
    let scc_hits = detect_wash_trades(&light.stream, &ctx, &WashConfig::default())
        .iter()
        .filter(|f| f.trigger.contains(&WashTrigger::SccSales))
        .count();
    ensure(scc_hits == 0, format!("{scc_hits} SCC findings from m=4 rings"))?;
    let t = start.elapsed();
    ensure(t < Duration::from_secs(10), format!("took {t:?}"))?;
    Ok(format!(
        "recall {recalled}/{} labeled sales, 0 of {baseline_len} baseline events flagged, m=4 rings silent, {t:.2?}",
        labeled.len()
    ))
}

// 3 -------------------------------------------------------------------------

const SELLER: u32 = 1;
const SHILL: u32 = 2;
const BUYER: u32 = 3;

fn asset(n: u32) -> AssetId {
    AssetId::new(acct(0xa55e7), n)
}

fn bid(who: u32, amount: &str, t: u64, auction: &str, a: u32) -> Event {
    Event::Bid(Bid {
        bidder: acct(who),
        amount_usd: dec(amount),
        time: t,
        auction_id: auction.into(),
        asset: asset(a),
    })
}

fn start(seller: u32, reserve: &str, t: u64, auction: &str, a: u32) -> Event {
    Event::AuctionStart(AuctionStart {
        seller: acct(seller),
        reserve_usd: dec(reserve),
        time: t,
        auction_id: auction.into(),
        asset: asset(a),
    })
}

fn win(who: u32, amount: &str, t: u64, auction: &str, a: u32) -> Event {
    Event::Win(Win {
        winner: acct(who),
        amount_usd: dec(amount),
        time: t,
        auction_id: auction.into(),
        asset: asset(a),
    })
}

fn sale(seller: u32, buyer: u32, amount: &str, t: u64, a: u32) -> Event {
    Event::Sale(Sale {
        seller: acct(seller),
        buyer: acct(buyer),
        asset: asset(a),
        price_usd: dec(amount),
        price_eth: Decimal::ONE,
        royalty_fraction: None,
        time: t,
        tx: None,
    })
}

fn tx(n: u64) -> TxHash {
    let mut b = [0u8; 32];
    b[24..].copy_from_slice(&n.to_be_bytes());
    TxHash::from_bytes(b)
}

fn paid(from: u32, to: u32, t: u64) -> Event {
    Event::Paid(Paid {
        from: acct(from),
        to: acct(to),
        amount_wei: 10u128.pow(18),
        time: t,
        tx: tx(t),
    })
}

/// Reserve 2, shill bids 3.3 to 8.14, the buyer wins at 9; the seller funded
/// the shill.
fn shill_fixture(bids: &[&str], winner: u32) -> Vec<Event> {
    let mut e = vec![paid(SELLER, SHILL, 1), start(SELLER, "2", 10, "A", 1)];
    for (i, b) in bids.iter().enumerate() {
        e.push(bid(SHILL, b, 20 + 10 * i as u64, "A", 1));
    }
    e.push(bid(BUYER, "9", 100, "A", 1));
    e.push(win(winner, "9", 110, "A", 1));
    e.push(sale(SELLER, winner, "9", 111, 1));
    e
}

const BIDS: [&str; 5] = ["3.3", "4.4", "5.5", "6.71", "8.14"];

fn shill_findings(events: Vec<Event>) -> Vec<nftm_forensics::trading::ShillFinding> {
    let s = EventStream::from_parts(events, vec![]);
    let ctx = GraphContext::new(&s, DEFAULT_HUB_DEGREE_CUTOFF);
    detect_shill_bids(&s, &ctx, &ShillConfig::default())
}

fn shill_end_to_end() -> Check {
    let f = shill_findings(shill_fixture(&BIDS, BUYER));
    ensure(f.len() == 1, format!("{} findings on the base fixture", f.len()))?;
    ensure(f[0].bidder == acct(SHILL), "wrong bidder flagged")?;
    let profit = f[0].shill_profit_usd.ok_or("no profit")?;
    ensure((profit - Decimal::from(7)).abs() <= dec("0.001"), format!("profit {profit}"))?;

    // each variant breaks exactly one rule
    let non_monotone = shill_fixture(&["3.3", "5.5", "4.4", "6.71", "8.14"], BUYER);
    let shill_wins = shill_fixture(&BIDS, SHILL);
    let mut busy = shill_fixture(&BIDS, BUYER);
    for i in 0..10u32 {
        busy.push(sale(SHILL, 100 + i, "1", 500 + i as u64, 10 + i));
    }
    let mut unconnected = shill_fixture(&BIDS, BUYER);
    unconnected.remove(0);
    let mut spread = shill_fixture(&BIDS, BUYER);
    for i in 0..4u32 {
        let id = format!("other-{i}");
        spread.push(start(200 + i, "1", 600 + 10 * i as u64, &id, 50 + i));
        spread.push(bid(SHILL, "2", 601 + 10 * i as u64, &id, 50 + i));
    }
    let variants = [
        ("rule 1 (non-monotone bids)", non_monotone),
        ("rule 2 (shill wins)", shill_wins),
        ("rule 3 (busy trader)", busy),
        ("rule 4 (no funding link)", unconnected),
        ("rule 5 (bids spread over sellers)", spread),
    ];
    for (name, events) in variants {
        let n = shill_findings(events)
            .iter()
            .filter(|f| f.bidder == acct(SHILL) && f.auction_id == "A")
            .count();
        ensure(n == 0, format!("{name}: still flagged"))?;
    }
    Ok(format!("flagged with profit {profit}; each of rules 1-5 removes it"))
}

// 4 -------------------------------------------------------------------------

fn shield_fixture(extra: Vec<Event>, winner: u32, p1: &str, p2: &str) -> EventStream {
    let mut e = vec![
        start(SELLER, "1", 10, "S", 7),
        bid(10, p1, 20, "S", 7),
        bid(11, p2, 30, "S", 7),
    ];
    if let Event::Bid(b) = bid(11, p2, 40, "S", 7) {
        e.push(Event::CancelBid(b));
    }
    e.push(win(winner, p1, 50, "S", 7));
    e.push(sale(SELLER, winner, p1, 51, 7));
    e.extend(extra);
    EventStream::from_parts(e, vec![])
}

fn shield_end_to_end() -> Check {
    let (p1, p2) = ("123.45", "987.61");
    let f = detect_bid_shielding(&shield_fixture(vec![], 10, p1, p2), &ShieldConfig::default());
    ensure(f.len() == 1, format!("{} findings", f.len()))?;
    let want = dec(p2) - dec(p1);
    ensure(
        f[0].shielded_bid_difference == want,
        format!("difference {} != {want}", f[0].shielded_bid_difference),
    )?;
    let late = shield_fixture(vec![bid(12, "200", 45, "S", 7)], 10, p1, p2);
    ensure(
        detect_bid_shielding(&late, &ShieldConfig::default()).is_empty(),
        "bid after cancel still flagged",
    )?;
    let own = shield_fixture(vec![], 11, p1, p2);
    ensure(
        detect_bid_shielding(&own, &ShieldConfig::default()).is_empty(),
        "canceller winning still flagged",
    )?;
    let synth = inject(
        gen_baseline(4, 30, 10, 80).map_err(|e| e.to_string())?,
        &InjectionSpec::shield_auction(dec(p1), dec(p2), 1),
    )
    .map_err(|e| e.to_string())?;
    let sf = detect_bid_shielding(&synth.stream, &ShieldConfig::default());
    ensure(
        sf.len() == 1 && sf[0].shielded_bid_difference == want,
        "synthetic shield auction not recovered exactly",
    )?;
    Ok(format!("difference {want} exact; both negative variants silent"))
}

// 5 -------------------------------------------------------------------------

fn naive_levenshtein(a: &[char], b: &[char]) -> usize {
    match (a.split_first(), b.split_first()) {
        (None, _) => b.len(),
        (_, None) => a.len(),
        (Some((x, ra)), Some((y, rb))) => {
            if x == y {
                naive_levenshtein(ra, rb)
            } else {
                1 + naive_levenshtein(ra, b)
                    .min(naive_levenshtein(a, rb))
                    .min(naive_levenshtein(ra, rb))
            }
        }
    }
}

fn random_word(rng: &mut ChaCha8Rng) -> String {
    const ALPHABET: [char; 6] = ['a', 'b', 'c', 'A', 'é', '字'];
    let n = rng.random_range(0..=8);
    (0..n).map(|_| ALPHABET[rng.random_range(0..ALPHABET.len())]).collect()
}

fn levenshtein_checks() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..10_000 {
        let (a, b) = (random_word(&mut rng), random_word(&mut rng));
        let ca: Vec<char> = a.chars().collect();
        let cb: Vec<char> = b.chars().collect();
        let (fast, slow) = (levenshtein(&a, &b), naive_levenshtein(&ca, &cb));
        ensure(fast == slow, format!("{a:?} vs {b:?}: {fast} != {slow}"))?;
    }
    for _ in 0..10_000 {
        let (a, b, c) = (random_word(&mut rng), random_word(&mut rng), random_word(&mut rng));
        let (ab, ba, ac, bc) = (
            levenshtein(&a, &b),
            levenshtein(&b, &a),
            levenshtein(&a, &c),
            levenshtein(&b, &c),
        );
        ensure(ab == ba, format!("asymmetric on {a:?}, {b:?}"))?;
        ensure((ab == 0) == (a == b), format!("identity fails on {a:?}, {b:?}"))?;
        ensure(ac <= ab + bc, format!("triangle fails on {a:?}, {b:?}, {c:?}"))?;
    }
    let spells = levenshtein("CryptoSpells", "Cryptospells");
    let punks = levenshtein("CryptoPunks", "CryptoPhunks");
    ensure(spells == 1 && punks == 1, format!("named pairs gave {spells}, {punks}"))?;
    Ok("10000 pairs match the recursive oracle; metric holds on 10000 triples; named pairs at distance 1".into())
}

// 6 -------------------------------------------------------------------------

/// Sum of low-frequency cosines with random amplitudes, so every coefficient
/// the hash inspects carries signal. Pixel values are even and at most 126.
fn textured_image(rng: &mut ChaCha8Rng, w: u32, h: u32) -> GrayImage {
    let amp: Vec<f64> = (0..64).map(|_| rng.random_range(-3.0..3.0)).collect();
    GrayImage::from_fn(w, h, |x, y| {
        let fx = std::f64::consts::PI * (x as f64 + 0.5) / w as f64;
        let fy = std::f64::consts::PI * (y as f64 + 0.5) / h as f64;
        let mut v = 63.0;
        for (i, a) in amp.iter().enumerate().skip(1) {
            let (u, k) = ((i % 8) as f64, (i / 8) as f64);
            v += a * (u * fx).cos() * (k * fy).cos();
        }
        Luma([(v.clamp(0.0, 126.0) as u8) & !1])
    })
}

fn phash_checks() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let noise = Normal::new(0.0, 2.55).unwrap();
    let (mut worst_noise, mut worst_neg) = (0, 64);
    for _ in 0..25 {
        let (w, h) = (rng.random_range(64..200), rng.random_range(64..200));
        let img = textured_image(&mut rng, w, h);
        let hash = |i: &GrayImage| perceptual_hash(i).map_err(|e| e.to_string());
        let base = hash(&img)?;
        ensure(base == hash(&img.clone())?, "identical inputs differ")?;

        let noisy = GrayImage::from_fn(w, h, |x, y| {
            let v = img.get_pixel(x, y)[0] as f64 + noise.sample(&mut rng);
            Luma([v.round().clamp(0.0, 255.0) as u8])
        });
        worst_noise = worst_noise.max(base.distance(hash(&noisy)?));

        let neg = GrayImage::from_fn(w, h, |x, y| Luma([255 - img.get_pixel(x, y)[0]]));
        worst_neg = worst_neg.min(base.distance(hash(&neg)?));

        let half = GrayImage::from_fn(w, h, |x, y| Luma([img.get_pixel(x, y)[0] / 2]));
        let double = GrayImage::from_fn(w, h, |x, y| Luma([img.get_pixel(x, y)[0] * 2]));
        ensure(base.distance(hash(&half)?) == 0, "x0.5 brightness changed the hash")?;
        ensure(base.distance(hash(&double)?) == 0, "x2 brightness changed the hash")?;
    }
    ensure(worst_noise <= 10, format!("noise distance {worst_noise}"))?;
    ensure(worst_neg >= 40, format!("negation distance {worst_neg}"))?;
    Ok(format!(
        "25 fixtures: identical 0, noise <= {worst_noise}, negation >= {worst_neg}, brightness 0"
    ))
}

// 7 -------------------------------------------------------------------------

fn evasion_window() -> Check {
    let mut got = Vec::new();
    for gap in [899u64, 900, 901] {
        let e = vec![
            Event::Transfer(Transfer {
                from: acct(1),
                to: acct(2),
                asset: asset(1),
                time: 10_000,
                tx: tx(1),
            }),
            paid(2, 1, 10_000 + gap),
        ];
        let n = detect_offplatform_trades(&EventStream::from_parts(e, vec![]), 900).len();
        got.push(n == 1);
    }
    ensure(got == [true, true, false], format!("899/900/901 gave {got:?}"))?;
    Ok("gaps 899, 900, 901 classify in, in, out".into())
}

// 8 -------------------------------------------------------------------------

fn accessibility_truth_table() -> Check {
    // one attempt's outcome: HEAD status and, if HEAD was not 200, GET status
    let statuses = [FetchStatus::Code(200), FetchStatus::Code(404), FetchStatus::Timeout];
    let mut outcomes: Vec<(FetchStatus, Option<FetchStatus>)> = vec![(FetchStatus::Code(200), None)];
    for head in &statuses[1..] {
        for get in &statuses {
            outcomes.push((*head, Some(*get)));
        }
    }
    let attempt_sets: Vec<Vec<u8>> = vec![
        vec![],
        vec![1],
        vec![2],
        vec![3],
        vec![1, 2],
        vec![1, 3],
        vec![2, 3],
        vec![1, 2, 3],
    ];
    let mut cases = 0;
    for attempts in &attempt_sets {
        let k = attempts.len();
        for combo in 0..outcomes.len().pow(k as u32) {
            let mut records = Vec::new();
            let mut c = combo;
            let mut any_ok = false;
            for &attempt in attempts {
                let (head, get) = outcomes[c % outcomes.len()];
                c /= outcomes.len();
                let rec = |method, status| AccessibilityRecord {
                    url: "https://example.org/x".into(),
                    attempt,
                    method,
                    status,
                    observed_at: attempt as u64,
                };
                records.push(rec(Method::Head, head));
                any_ok |= head.is_ok();
                if let Some(g) = get {
                    records.push(rec(Method::Get, g));
                    any_ok |= g.is_ok();
                }
            }
            let expected = if any_ok {
                Liveness::Alive
            } else if k == 3 {
                Liveness::Inaccessible
            } else {
                Liveness::InsufficientData
            };
            let got = classify_accessibility(&records);
            ensure(got == expected, format!("{records:?}: {got:?} != {expected:?}"))?;
            cases += 1;
        }
    }
    let two_404 = [1u8, 2].map(|attempt| AccessibilityRecord {
        url: "u".into(),
        attempt,
        method: Method::Head,
        status: FetchStatus::Code(404),
        observed_at: 0,
    });
    ensure(
        classify_accessibility(&two_404) == Liveness::InsufficientData,
        "[404, 404] is not insufficient_data",
    )?;
    Ok(format!("{cases} attempt combinations match the rule"))
}

// 9 -------------------------------------------------------------------------

fn full_scenario() -> Result<Scenario, String> {
    let mut s = gen_baseline(9, 120, 60, 900).map_err(|e| e.to_string())?;
    let specs = [
        InjectionSpec::wash_ring(3, 12, 1),
        InjectionSpec::wash_ring(2, 12, 2),
        InjectionSpec::shill_auction(3),
        InjectionSpec::shield_auction(dec("50"), dec("400"), 4),
    ];
    for spec in &specs {
        s = inject(s, spec).map_err(|e| e.to_string())?;
    }
    Ok(s)
}

fn run_report(s: &Scenario) -> Result<String, String> {
    let mut bytes = Vec::new();
    s.stream.write_ndjson(&mut bytes).map_err(|e| e.to_string())?;
    let stream = ingest(&bytes[..], &IngestOptions::default()).map_err(|e| e.to_string())?;
    let all = parse_detectors("all")?;
    Ok(analyze(&stream, &DetectorConfig::default(), &all, None).to_json())
}

fn determinism() -> Check {
    let a = run_report(&full_scenario()?)?;
    let b = run_report(&full_scenario()?)?;
    ensure(a == b, "reports differ")?;
    Ok(format!("two runs gave identical {}-byte reports", a.len()))
}

// 10 ------------------------------------------------------------------------

fn scale_smoke() -> Check {
    let s = gen_baseline(10, 5000, 2500, 48_000).map_err(|e| e.to_string())?;
    let mut bytes = Vec::new();
    s.stream.write_events_ndjson(&mut bytes).map_err(|e| e.to_string())?;
    s.stream.write_assets_ndjson(&mut bytes).map_err(|e| e.to_string())?;
    let n = s.stream.len();
    ensure(n >= 100_000, format!("only {n} events generated"))?;

    let start = Instant::now();
    let stream = ingest(&bytes[..], &IngestOptions::default()).map_err(|e| e.to_string())?;
    let detectors: BTreeSet<_> = parse_detectors("all")?;
    let report = analyze(&stream, &DetectorConfig::default(), &detectors, None);
    let t = start.elapsed();
    ensure(stream.len() == n, "events lost in ingestion")?;
    ensure(t < Duration::from_secs(60), format!("took {t:?}"))?;
    ensure(report.summary.wash_instances == 0, "baseline produced wash findings")?;
    Ok(format!("{n} events ingested and analysed in {t:.2?}"))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("graph oracles", graph_oracles),
        ("wash trading end to end", wash_end_to_end),
        ("shill bidding end to end", shill_end_to_end),
        ("bid shielding end to end", shield_end_to_end),
        ("levenshtein", levenshtein_checks),
        ("perceptual hash", phash_checks),
        ("evasion window", evasion_window),
        ("accessibility classifier", accessibility_truth_table),
        ("determinism", determinism),
        ("scale smoke test", scale_smoke),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("criterion {:>2} PASS {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2} FAIL {name}: {why}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
