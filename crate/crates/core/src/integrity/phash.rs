//! DCT perceptual hashing of asset images.

use std::collections::{BTreeMap, HashMap};
use std::path::{Path, PathBuf};

use image::GrayImage;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::model::{AssetId, AssetRecord};

const SIDE: usize = 32;
const BLOCK: usize = 8;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum HashError {
    #[error("image is {0}x{1}, need at least {BLOCK}x{BLOCK}")]
    TooSmall(u32, u32),
    #[error("cannot decode {path}: {reason}")]
    Decode { path: String, reason: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct HashBits(#[serde(with = "hex_u64")] pub u64);

impl HashBits {
    pub fn distance(self, other: HashBits) -> u32 {
        (self.0 ^ other.0).count_ones()
    }
}

mod hex_u64 {
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &u64, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format!("{v:016x}"))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<u64, D::Error> {
        let s = String::deserialize(d)?;
        u64::from_str_radix(&s, 16).map_err(D::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ImageHash {
    pub asset: AssetId,
    pub bits: HashBits,
}

/// Weights mapping `n` source samples onto `SIDE` output cells, each cell
/// averaging the source interval it covers (fractional overlap included).
fn area_weights(n: usize) -> Vec<Vec<(usize, f64)>> {
    let scale = n as f64 / SIDE as f64;
    (0..SIDE)
        .map(|o| {
            let lo = o as f64 * scale;
            let hi = (o + 1) as f64 * scale;
            let mut w = Vec::new();
            let mut i = lo.floor() as usize;
            while (i as f64) < hi && i < n {
                let overlap = (hi.min(i as f64 + 1.0) - lo.max(i as f64)).max(0.0);
                if overlap > 0.0 {
                    w.push((i, overlap / scale));
                }
                i += 1;
            }
            w
        })
        .collect()
}

fn resize_area(img: &GrayImage) -> [[f64; SIDE]; SIDE] {
    let (w, h) = (img.width() as usize, img.height() as usize);
    let wx = area_weights(w);
    let wy = area_weights(h);
    let raw = img.as_raw();
    // horizontal pass: h rows x SIDE columns
    let mut rows = vec![[0.0f64; SIDE]; h];
    for (y, row) in rows.iter_mut().enumerate() {
        let src = &raw[y * w..(y + 1) * w];
        for (ox, ws) in wx.iter().enumerate() {
            row[ox] = ws.iter().map(|&(i, k)| src[i] as f64 * k).sum();
        }
    }
    let mut out = [[0.0f64; SIDE]; SIDE];
    for (oy, ws) in wy.iter().enumerate() {
        for ox in 0..SIDE {
            out[oy][ox] = ws.iter().map(|&(i, k)| rows[i][ox] * k).sum();
        }
    }
    out
}

/// First `BLOCK` unnormalised DCT-II coefficients of a `SIDE`-point signal.
fn dct_basis() -> [[f64; SIDE]; BLOCK] {
    let mut c = [[0.0; SIDE]; BLOCK];
    for (k, row) in c.iter_mut().enumerate() {
        for (n, v) in row.iter_mut().enumerate() {
            *v = (std::f64::consts::PI * k as f64 * (2 * n + 1) as f64 / (2 * SIDE) as f64).cos();
        }
    }
    c
}

/// 64-bit perceptual hash. Bit 63 is coefficient (0,0); bits follow the
/// top-left 8x8 DCT block in row-major order. A bit is set when its
/// coefficient exceeds the median of the 63 non-DC coefficients.
pub fn perceptual_hash(img: &GrayImage) -> Result<HashBits, HashError> {
    if (img.width() as usize) < BLOCK || (img.height() as usize) < BLOCK {
        return Err(HashError::TooSmall(img.width(), img.height()));
    }
    let px = resize_area(img);
    let basis = dct_basis();
    // columns first: tmp[k][x] = sum_y basis[k][y] * px[y][x]
    let mut tmp = [[0.0f64; SIDE]; BLOCK];
    for (k, t) in tmp.iter_mut().enumerate() {
        for (y, row) in px.iter().enumerate() {
            for x in 0..SIDE {
                t[x] += basis[k][y] * row[x];
            }
        }
    }
    let mut coeffs = [0.0f64; BLOCK * BLOCK];
    for u in 0..BLOCK {
        for v in 0..BLOCK {
            coeffs[u * BLOCK + v] = (0..SIDE).map(|x| basis[v][x] * tmp[u][x]).sum();
        }
    }
    let mut ac: Vec<f64> = coeffs[1..].to_vec();
    ac.sort_by(f64::total_cmp);
    let median = ac[ac.len() / 2];
    let bits = coeffs
        .iter()
        .fold(0u64, |acc, &c| (acc << 1) | u64::from(c > median));
    Ok(HashBits(bits))
}

pub fn hash_file(path: &Path) -> Result<HashBits, HashError> {
    let decode = |reason: String| HashError::Decode {
        path: path.display().to_string(),
        reason,
    };
    let img = image::ImageReader::open(path)
        .map_err(|e| decode(e.to_string()))?
        .with_guessed_format()
        .map_err(|e| decode(e.to_string()))?
        .decode()
        .map_err(|e| decode(e.to_string()))?;
    perceptual_hash(&img.to_luma8())
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SkippedImage {
    pub asset: AssetId,
    pub reason: String,
}

#[derive(Debug, Default)]
pub struct HashedImages {
    pub hashes: Vec<ImageHash>,
    pub skipped: Vec<SkippedImage>,
    /// Assets with no file in the directory.
    pub missing: usize,
}

/// Hashes the image of every asset found in `dir`. Files are named
/// `<contract>_<token_id>`, with or without an extension.
pub fn hash_image_dir(dir: &Path, assets: &[AssetRecord]) -> std::io::Result<HashedImages> {
    let mut files: HashMap<String, PathBuf> = HashMap::new();
    for entry in std::fs::read_dir(dir)? {
        let path = entry?.path();
        if !path.is_file() {
            continue;
        }
        if let Some(stem) = path.file_stem().and_then(|s| s.to_str()) {
            let key = stem.to_ascii_lowercase();
            // prefer the lexicographically first path if several share a stem
            match files.get(&key) {
                Some(p) if p <= &path => {}
                _ => {
                    files.insert(key, path);
                }
            }
        }
    }
    let mut ids: Vec<&AssetId> = assets.iter().map(|a| &a.id).collect();
    ids.sort();
    ids.dedup();
    let mut missing = 0;
    let jobs: Vec<(&AssetId, &PathBuf)> = ids
        .into_iter()
        .filter_map(|id| {
            let p = files.get(&id.file_stem());
            missing += usize::from(p.is_none());
            p.map(|p| (id, p))
        })
        .collect();
    let results: Vec<_> = jobs
        .par_iter()
        .map(|(id, p)| ((*id).clone(), hash_file(p)))
        .collect();
    let mut out = HashedImages {
        missing,
        ..HashedImages::default()
    };
    for (asset, r) in results {
        match r {
            Ok(bits) => out.hashes.push(ImageHash { asset, bits }),
            Err(e) => {
                log::warn!("skipping image of {asset}: {e}");
                out.skipped.push(SkippedImage {
                    asset,
                    reason: e.to_string(),
                })
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ImagePair {
    pub a: AssetId,
    pub b: AssetId,
    pub distance: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HashCollisionGroup {
    pub hash: HashBits,
    pub members: Vec<AssetId>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimilarImages {
    pub pairs: Vec<ImagePair>,
    /// Populated only for exact collisions (threshold 0).
    pub groups: Vec<HashCollisionGroup>,
}

/// Cross-collection image pairs within `threshold` bits of each other. Assets
/// without a known collection are never suppressed.
pub fn find_similar_images(
    hashes: &[ImageHash],
    assets: &[AssetRecord],
    threshold: u32,
) -> SimilarImages {
    let coll: HashMap<&AssetId, &str> = assets
        .iter()
        .map(|a| (&a.id, a.collection_slug.as_str()))
        .collect();
    let cross = |a: &AssetId, b: &AssetId| match (coll.get(a), coll.get(b)) {
        (Some(x), Some(y)) => x != y,
        _ => true,
    };
    let mut sorted: Vec<&ImageHash> = hashes.iter().collect();
    sorted.sort_by(|a, b| a.asset.cmp(&b.asset));
    sorted.dedup_by(|a, b| a.asset == b.asset);

    let mut out = SimilarImages::default();
    if threshold == 0 {
        let mut by_hash: BTreeMap<HashBits, Vec<&AssetId>> = BTreeMap::new();
        for h in &sorted {
            by_hash.entry(h.bits).or_default().push(&h.asset);
        }
        for (hash, members) in by_hash {
            let mut any = false;
            for (i, a) in members.iter().enumerate() {
                for b in &members[i + 1..] {
                    if cross(a, b) {
                        any = true;
                        out.pairs.push(ImagePair {
                            a: (*a).clone(),
                            b: (*b).clone(),
                            distance: 0,
                        });
                    }
                }
            }
            if any {
                out.groups.push(HashCollisionGroup {
                    hash,
                    members: members.into_iter().cloned().collect(),
                });
            }
        }
    } else {
        out.pairs = (0..sorted.len())
            .into_par_iter()
            .flat_map_iter(|i| {
                let a = sorted[i];
                sorted[i + 1..].iter().filter_map(move |b| {
                    let d = a.bits.distance(b.bits);
                    (d <= threshold && cross(&a.asset, &b.asset)).then(|| ImagePair {
                        a: a.asset.clone(),
                        b: b.asset.clone(),
                        distance: d,
                    })
                })
            })
            .collect();
    }
    out.pairs.sort();
    out
}
