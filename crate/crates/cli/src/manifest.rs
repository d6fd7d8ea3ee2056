//! Run manifest: the fully resolved configuration echo, its FNV-1a hash
//! (stamped into every data output), and the only place a timestamp lives.

use crate::error::CliError;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash = 0xcbf29ce484222325u64;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x100000001b3);
    }
    hash
}

pub struct Manifest {
    pub hash_hex: String,
    content: String,
}

impl Manifest {
    /// Hash covers the command name and resolved pairs only, never the
    /// timestamp, so identical configs reproduce identical hashes.
    pub fn new(command: &str, resolved: &[(String, String)]) -> Manifest {
        let mut content = format!("command = {command}\n");
        for (k, v) in resolved {
            content.push_str(&format!("{k} = {v}\n"));
        }
        let hash_hex = format!("{:016x}", fnv1a64(content.as_bytes()));
        Manifest { hash_hex, content }
    }

    pub fn write(&self, out_dir: &Path) -> Result<(), CliError> {
        std::fs::create_dir_all(out_dir).map_err(|e| CliError::io(out_dir, e))?;
        let unix = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        let path = out_dir.join("manifest.txt");
        let body = format!(
            "# written_at_unix = {unix}\n{}manifest_hash = {}\n",
            self.content, self.hash_hex
        );
        std::fs::write(&path, body).map_err(|e| CliError::io(&path, e))
    }

    /// First line of every data output.
    pub fn stamp(&self) -> String {
        format!("# manifest_hash = {}\n", self.hash_hex)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hash_is_stable_and_timestamp_free() {
        let pairs = vec![("a".to_string(), "1".to_string())];
        let m1 = Manifest::new("train", &pairs);
        let m2 = Manifest::new("train", &pairs);
        assert_eq!(m1.hash_hex, m2.hash_hex);
        let m3 = Manifest::new("train", &[("a".to_string(), "2".to_string())]);
        assert_ne!(m1.hash_hex, m3.hash_hex);
    }

    #[test]
    fn fnv_known_vector() {
        // FNV-1a 64-bit of empty input is the offset basis.
        assert_eq!(fnv1a64(b""), 0xcbf29ce484222325);
        assert_eq!(fnv1a64(b"a"), 0xaf63dc4c8601ec8c);
    }
}
