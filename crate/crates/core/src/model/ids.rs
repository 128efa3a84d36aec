//! Account, transaction and asset identifiers.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use serde::{de, Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IdError {
    #[error("missing 0x prefix in {0:?}")]
    MissingPrefix(String),
    #[error("expected {expected} hex digits, found {found} in {value:?}")]
    BadLength {
        value: String,
        expected: usize,
        found: usize,
    },
    #[error("non-hex character in {0:?}")]
    NotHex(String),
    #[error("token id {0:?} is not a non-negative decimal integer")]
    BadTokenId(String),
}

fn parse_prefixed_hex<const N: usize>(s: &str) -> Result<[u8; N], IdError> {
    let digits = s
        .strip_prefix("0x")
        .or_else(|| s.strip_prefix("0X"))
        .ok_or_else(|| IdError::MissingPrefix(s.to_string()))?;
    if digits.len() != 2 * N {
        return Err(IdError::BadLength {
            value: s.to_string(),
            expected: 2 * N,
            found: digits.len(),
        });
    }
    let mut out = [0u8; N];
    // hex::decode_to_slice accepts mixed case, so checksummed input passes through
    hex::decode_to_slice(digits, &mut out).map_err(|_| IdError::NotHex(s.to_string()))?;
    Ok(out)
}

macro_rules! hex_id {
    ($(#[$meta:meta])* $name:ident, $len:expr) => {
        $(#[$meta])*
        #[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
        pub struct $name([u8; $len]);

        impl $name {
            pub const fn from_bytes(bytes: [u8; $len]) -> Self {
                Self(bytes)
            }

            pub fn as_bytes(&self) -> &[u8; $len] {
                &self.0
            }
        }

        impl FromStr for $name {
            type Err = IdError;

            fn from_str(s: &str) -> Result<Self, Self::Err> {
                parse_prefixed_hex::<$len>(s.trim()).map(Self)
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "0x{}", hex::encode(self.0))
            }
        }

        impl fmt::Debug for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                fmt::Display::fmt(self, f)
            }
        }

        impl Serialize for $name {
            fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
                s.collect_str(self)
            }
        }

        impl<'de> Deserialize<'de> for $name {
            fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
                let s = <std::borrow::Cow<'de, str>>::deserialize(d)?;
                s.parse().map_err(de::Error::custom)
            }
        }
    };
}

hex_id!(
    /// A 20-byte account address. Ordering and equality are byte-wise, which
    /// coincides with the lowercase hex rendering.
    AccountId,
    20
);

hex_id!(
    /// A 32-byte transaction hash.
    TxHash,
    32
);

/// Unsigned token id of arbitrary width (ERC-721 ids are uint256).
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct TokenId(pub BigUint);

impl TokenId {
    pub fn new(value: impl Into<BigUint>) -> Self {
        Self(value.into())
    }
}

impl FromStr for TokenId {
    type Err = IdError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        if t.is_empty() || !t.bytes().all(|b| b.is_ascii_digit()) {
            return Err(IdError::BadTokenId(s.to_string()));
        }
        BigUint::parse_bytes(t.as_bytes(), 10)
            .map(Self)
            .ok_or_else(|| IdError::BadTokenId(s.to_string()))
    }
}

impl fmt::Display for TokenId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.0, f)
    }
}

impl fmt::Debug for TokenId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl Serialize for TokenId {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for TokenId {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw<'a> {
            Num(u64),
            #[serde(borrow)]
            Str(std::borrow::Cow<'a, str>),
        }
        match Raw::deserialize(d)? {
            Raw::Num(n) => Ok(TokenId::new(n)),
            Raw::Str(s) => s.parse().map_err(de::Error::custom),
        }
    }
}

/// `<contract, token id>`: the global identity of one NFT.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct AssetId {
    pub contract: AccountId,
    pub token_id: TokenId,
}

impl AssetId {
    pub fn new(contract: AccountId, token_id: impl Into<BigUint>) -> Self {
        Self {
            contract,
            token_id: TokenId::new(token_id),
        }
    }

    /// File stem used when images are stored on disk: `<contract>_<token_id>`.
    pub fn file_stem(&self) -> String {
        format!("{}_{}", self.contract, self.token_id)
    }
}

impl fmt::Display for AssetId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.contract, self.token_id)
    }
}

impl fmt::Debug for AssetId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

pub(crate) mod u128_string {
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &u128, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(v)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<u128, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw<'a> {
            Num(u64),
            #[serde(borrow)]
            Str(std::borrow::Cow<'a, str>),
        }
        match Raw::deserialize(d)? {
            Raw::Num(n) => Ok(u128::from(n)),
            Raw::Str(s) => {
                let t = s.trim();
                if t.is_empty() || !t.bytes().all(|b| b.is_ascii_digit()) {
                    return Err(de::Error::custom(format!(
                        "{t:?} is not a non-negative integer"
                    )));
                }
                t.parse().map_err(de::Error::custom)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn checksummed_address_normalizes_to_lowercase() {
        let a: AccountId = "0x5aAeb6053F3E94C9b9A09f33669435E7Ef1BeAed".parse().unwrap();
        assert_eq!(a.to_string(), "0x5aaeb6053f3e94c9b9a09f33669435e7ef1beaed");
        let b: AccountId = "0x5aaeb6053f3e94c9b9a09f33669435e7ef1beaed".parse().unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn address_rejects_bad_input() {
        assert!(matches!(
            "5aaeb6053f3e94c9b9a09f33669435e7ef1beaed".parse::<AccountId>(),
            Err(IdError::MissingPrefix(_))
        ));
        assert!(matches!(
            "0x5aaeb6".parse::<AccountId>(),
            Err(IdError::BadLength { .. })
        ));
        assert!(matches!(
            "0xzzaeb6053f3e94c9b9a09f33669435e7ef1beaed".parse::<AccountId>(),
            Err(IdError::NotHex(_))
        ));
    }

    #[test]
    fn token_id_accepts_uint256_range() {
        let max = "115792089237316195423570985008687907853269984665640564039457584007913129639935";
        let t: TokenId = max.parse().unwrap();
        assert_eq!(t.to_string(), max);
        assert!("-1".parse::<TokenId>().is_err());
        assert!("".parse::<TokenId>().is_err());
        let from_num: TokenId = serde_json::from_str("42").unwrap();
        let from_str: TokenId = serde_json::from_str("\"42\"").unwrap();
        assert_eq!(from_num, from_str);
    }
}
