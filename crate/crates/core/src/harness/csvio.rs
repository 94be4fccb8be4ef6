//! CSV persistence with a `#`-prefixed JSON header line.
//!
//! Line 1 carries the experiment config, its hash, the master seed, and the
//! tool version as one JSON object; line 2 the column names; every further
//! line one record.  No timestamps anywhere, so identical runs produce
//! byte-identical files.

use std::io::Write;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// FNV-1a, 64-bit: the config fingerprint embedded in every output file.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash = 0xCBF2_9CE4_8422_2325u64;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x0000_0100_0000_01B3);
    }
    hash
}

pub fn config_hash_hex(config_json: &str) -> String {
    format!("{:016x}", fnv1a64(config_json.as_bytes()))
}

/// Renders a full CSV document (header comment, column line, data lines).
pub fn csv_string(header: &serde_json::Value, columns: &[&str], rows: &[Vec<String>]) -> String {
    let mut out = String::new();
    out.push_str("# ");
    out.push_str(&header.to_string());
    out.push('\n');
    out.push_str(&columns.join(","));
    out.push('\n');
    for row in rows {
        debug_assert_eq!(row.len(), columns.len());
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

pub fn write_csv(
    path: &std::path::Path,
    header: &serde_json::Value,
    columns: &[&str],
    rows: &[Vec<String>],
) -> std::io::Result<()> {
    let mut f = std::fs::File::create(path)?;
    f.write_all(csv_string(header, columns, rows).as_bytes())?;
    Ok(())
}

/// Parses a document produced by [`csv_string`] back into (header, columns,
/// rows).  Used by the summary round-trip checks.
pub fn parse_csv(text: &str) -> Option<(serde_json::Value, Vec<String>, Vec<Vec<String>>)> {
    let mut lines = text.lines();
    let header_line = lines.next()?;
    let header = serde_json::from_str(header_line.strip_prefix("# ")?).ok()?;
    let columns: Vec<String> = lines.next()?.split(',').map(str::to_owned).collect();
    let rows = lines
        .map(|l| l.split(',').map(str::to_owned).collect::<Vec<_>>())
        .collect();
    Some((header, columns, rows))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn round_trips_and_stays_deterministic() {
        let header = json!({"experiment": "demo", "seed": 7});
        let columns = ["trial", "steps"];
        let rows = vec![vec!["0".into(), "12".into()], vec!["1".into(), "9".into()]];
        let a = csv_string(&header, &columns, &rows);
        let b = csv_string(&header, &columns, &rows);
        assert_eq!(a, b);
        let (h, c, r) = parse_csv(&a).unwrap();
        assert_eq!(h, header);
        assert_eq!(c, vec!["trial", "steps"]);
        assert_eq!(r, rows);
    }

    #[test]
    fn hash_is_stable_and_input_sensitive() {
        let h1 = config_hash_hex("{\"a\":1}");
        assert_eq!(h1, config_hash_hex("{\"a\":1}"));
        assert_ne!(h1, config_hash_hex("{\"a\":2}"));
    }
}
