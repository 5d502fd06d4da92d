//! Config files: one `key = value` per line, `#` starts a comment.
//!
//! Keys: format, cutoff, max_word, conj_depth, ball, eps, depth, jobs, seed.

use std::collections::BTreeMap;

const KEYS: [&str; 9] = [
    "format",
    "cutoff",
    "max_word",
    "conj_depth",
    "ball",
    "eps",
    "depth",
    "jobs",
    "seed",
];

pub fn parse(text: &str) -> Result<BTreeMap<String, String>, String> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| format!("config line {}: expected key = value", i + 1))?;
        let (k, v) = (k.trim().replace('-', "_"), v.trim());
        if !KEYS.contains(&k.as_str()) {
            return Err(format!("config line {}: unknown key {k}", i + 1));
        }
        out.insert(k, v.to_string());
    }
    Ok(out)
}
