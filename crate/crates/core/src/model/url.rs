//! IPFS-aware URL normalization.
//!
//! Content on IPFS is reachable through any gateway, so two URLs that differ
//! only in gateway host point at the same object. Everything here reduces a
//! URL to its content identifier (CID) when one is present.

const BASE58_ALPHABET: &[u8] = b"123456789ABCDEFGHJKLMNPQRSTUVWXYZabcdefghijkmnopqrstuvwxyz";

/// Shortest base32 CIDv1 accepted. A sha2-256 CIDv1 is 59 characters; the
/// floor keeps ordinary words starting with "b" from matching.
const MIN_CIDV1_LEN: usize = 50;

/// `Qm` followed by 44 base58 characters.
pub fn is_cid_v0(s: &str) -> bool {
    s.len() == 46
        && s.starts_with("Qm")
        && s.bytes().all(|b| BASE58_ALPHABET.contains(&b))
}

/// Multibase `b` prefix followed by lowercase RFC 4648 base32 (no padding).
pub fn is_cid_v1_base32(s: &str) -> bool {
    s.len() >= MIN_CIDV1_LEN
        && s.starts_with('b')
        && s[1..]
            .bytes()
            .all(|b| b.is_ascii_lowercase() || (b'2'..=b'7').contains(&b))
}

pub fn is_cid(s: &str) -> bool {
    is_cid_v0(s) || is_cid_v1_base32(s)
}

/// Path segments after the scheme and host, with query and fragment removed.
/// `None` when the string is not an `http(s)://` or `ipfs://` URL.
fn split_url(url: &str) -> Option<(UrlScheme, Vec<&str>)> {
    let url = url.trim();
    let (scheme, rest) = url.split_once("://")?;
    let rest = rest.split(['?', '#']).next().unwrap_or("");
    let scheme = match scheme.to_ascii_lowercase().as_str() {
        "http" | "https" => UrlScheme::Http,
        "ipfs" => UrlScheme::Ipfs,
        _ => return None,
    };
    let mut segments = rest.split('/');
    if scheme == UrlScheme::Http {
        // host
        segments.next();
    }
    Some((scheme, segments.filter(|s| !s.is_empty()).collect()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum UrlScheme {
    Http,
    Ipfs,
}

/// Position of the CID segment, if the URL addresses IPFS content.
fn locate_cid(segments: &[&str], scheme: UrlScheme) -> Option<usize> {
    match scheme {
        UrlScheme::Ipfs => {
            // ipfs://<cid>/... and the legacy ipfs://ipfs/<cid>/...
            let first = usize::from(segments.first() == Some(&"ipfs"));
            segments.get(first).filter(|s| is_cid(s)).map(|_| first)
        }
        UrlScheme::Http => {
            if let Some(pos) = segments.iter().position(|s| *s == "ipfs") {
                if segments.get(pos + 1).is_some_and(|s| is_cid(s)) {
                    return Some(pos + 1);
                }
            }
            segments.iter().position(|s| is_cid(s))
        }
    }
}

/// Extracts the CID from a gateway URL (`http(s)://<gateway>/ipfs/<cid>` or
/// `http(s)://<gateway>/<cid>`) or an `ipfs://<cid>` URL.
pub fn extract_ipfs_cid(url: &str) -> Option<String> {
    let (scheme, segments) = split_url(url)?;
    locate_cid(&segments, scheme).map(|i| segments[i].to_string())
}

/// Gateway-independent form of a URL: `ipfs://<cid>[/<path>]` for IPFS
/// content, the trimmed input otherwise.
pub fn normalize_url(url: &str) -> String {
    match split_url(url) {
        Some((scheme, segments)) => match locate_cid(&segments, scheme) {
            Some(i) => {
                let mut out = format!("ipfs://{}", segments[i]);
                for s in &segments[i + 1..] {
                    out.push('/');
                    out.push_str(s);
                }
                out
            }
            None => url.trim().to_string(),
        },
        None => url.trim().to_string(),
    }
}
