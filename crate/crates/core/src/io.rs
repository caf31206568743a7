//! Result emission: reproducibility header, CSV tables and digest checks.

use std::io::Write;

use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Formats a float with 12 significant digits; integers print without a fraction.
pub fn fmt_g(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let exp = x.abs().log10().floor() as i32;
    let s = if (-5..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        let s = format!("{x:.decimals$}");
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    } else {
        let s = format!("{x:.11e}");
        let (m, e) = s.split_once('e').expect("scientific format");
        let m = if m.contains('.') { m.trim_end_matches('0').trim_end_matches('.') } else { m };
        format!("{m}e{e}")
    };
    if s == "-0" {
        "0".into()
    } else {
        s
    }
}

/// A CSV table with one header row.
#[derive(Clone, Debug, Default)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self { columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

/// Cell helpers.
pub fn f(x: f64) -> String {
    fmt_g(x)
}

pub fn i<T: ToString>(x: T) -> String {
    x.to_string()
}

/// Sorted-key compact JSON for a config value.
pub fn canonical_json(v: &Value) -> String {
    // serde_json maps are ordered by key unless `preserve_order` is enabled.
    serde_json::to_string(v).expect("JSON values serialize")
}

pub fn digest(config_json: &str) -> String {
    format!("sha256:{}", hex::encode(Sha256::digest(config_json.as_bytes())))
}

/// Results of one run: config, summary notes and the table.
#[derive(Clone, Debug)]
pub struct Emission {
    pub command: String,
    pub seed: Option<u64>,
    pub config: Value,
    pub notes: Vec<(String, String)>,
    pub table: Table,
}

impl Emission {
    pub fn note(&mut self, key: &str, value: impl ToString) {
        self.notes.push((key.to_string(), value.to_string()));
    }

    pub fn note_f(&mut self, key: &str, value: f64) {
        self.note(key, fmt_g(value));
    }

    pub fn write(&self, out: &mut dyn Write) -> std::io::Result<()> {
        let cfg = canonical_json(&self.config);
        writeln!(out, "# walklab {}", env!("CARGO_PKG_VERSION"))?;
        writeln!(out, "# command: {}", self.command)?;
        writeln!(out, "# seed: {}", self.seed.map_or("none".to_string(), |s| s.to_string()))?;
        writeln!(out, "# config: {cfg}")?;
        writeln!(out, "# digest: {}", digest(&cfg))?;
        for (k, v) in &self.notes {
            writeln!(out, "# {k}: {v}")?;
        }
        writeln!(out, "{}", self.table.columns.join(","))?;
        for r in &self.table.rows {
            writeln!(out, "{}", r.join(","))?;
        }
        Ok(())
    }
}

/// Header fields read back from an emitted file.
#[derive(Clone, Debug, PartialEq)]
pub struct Header {
    pub version: String,
    pub command: String,
    pub seed: Option<u64>,
    pub config: Value,
    pub config_text: String,
    pub digest: String,
}

pub fn read_header(text: &str) -> Result<Header> {
    let mut version = None;
    let mut command = None;
    let mut seed = None;
    let mut config_text = None;
    let mut dig = None;
    for line in text.lines().take_while(|l| l.starts_with('#')) {
        let body = line.trim_start_matches('#').trim();
        if let Some(v) = body.strip_prefix("walklab ") {
            version = Some(v.to_string());
        } else if let Some((k, v)) = body.split_once(": ") {
            match k {
                "command" => command = Some(v.to_string()),
                "seed" => seed = Some(if v == "none" { None } else { Some(v.parse().map_err(|_| Error::Parse(format!("bad seed {v:?}")))?) }),
                "config" => config_text = Some(v.to_string()),
                "digest" => dig = Some(v.to_string()),
                _ => {}
            }
        }
    }
    let missing = |w: &str| Error::Parse(format!("header lacks the {w} line"));
    let config_text = config_text.ok_or_else(|| missing("config"))?;
    let config: Value = serde_json::from_str(&config_text).map_err(|e| Error::Parse(format!("config JSON: {e}")))?;
    Ok(Header {
        version: version.ok_or_else(|| missing("version"))?,
        command: command.ok_or_else(|| missing("command"))?,
        seed: seed.ok_or_else(|| missing("seed"))?,
        config,
        config_text,
        digest: dig.ok_or_else(|| missing("digest"))?,
    })
}

/// Recomputes the digest of the recorded config and compares.
pub fn verify_digest(h: &Header) -> Result<()> {
    if canonical_json(&h.config) != h.config_text {
        return Err(Error::Config("recorded config is not in canonical form".into()));
    }
    let d = digest(&h.config_text);
    if d != h.digest {
        return Err(Error::Config(format!("digest mismatch: recorded {}, computed {d}", h.digest)));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(fmt_g(1.0), "1");
        assert_eq!(fmt_g(0.1 + 0.2), "0.3");
        assert_eq!(fmt_g(std::f64::consts::PI), "3.14159265359");
        assert_eq!(fmt_g(-2.5e-9), "-2.5e-9");
        assert_eq!(fmt_g(123456789012345.0), "1.23456789012e14");
        assert_eq!(fmt_g(-0.0), "0");
        assert_eq!(fmt_g(f64::NAN), "nan");
    }

    #[test]
    fn header_round_trip() {
        let mut e = Emission {
            command: "recur".into(),
            seed: Some(7),
            config: serde_json::json!({"seed": 7, "N": 10, "group": "Z2"}),
            notes: vec![],
            table: Table::new(&["k", "v"]),
        };
        e.note("verdict", "x");
        e.table.push(vec![i(1), f(0.5)]);
        let mut buf = Vec::new();
        e.write(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let h = read_header(&text).unwrap();
        assert_eq!(h.seed, Some(7));
        verify_digest(&h).unwrap();
        let tampered = text.replace("\"N\":10", "\"N\":11");
        assert!(verify_digest(&read_header(&tampered).unwrap()).is_err());
    }
}
