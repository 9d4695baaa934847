use sha2::{Digest, Sha256};

/// First 16 hex digits of the SHA-256 of `text`; stable across runs and
/// platforms.
pub fn stable_hash(text: &str) -> String {
    let digest = Sha256::digest(text.as_bytes());
    hex::encode(&digest[..8])
}
