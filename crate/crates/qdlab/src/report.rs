//! Bit-exact report serialization.
//!
//! Floats are printed with 17 significant digits (round-trip exact for f64),
//! field order is fixed, and files are written to a temporary name and
//! renamed into place so failed runs leave no partial output.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::config::RunConfig;
use crate::Result;

/// 17-significant-digit scientific notation; round-trip exact.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn json_escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for ch in s.chars() {
        match ch {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            c if (c as u32) < 0x20 => {
                let _ = write!(out, "\\u{:04x}", c as u32);
            }
            c => out.push(c),
        }
    }
    out
}

/// One spectral block of the comparison table.
#[derive(Debug, Clone)]
pub struct SpectrumBlock {
    pub q: f64,
    pub lambda: String,
    pub block_dim: usize,
    pub eigenvalues_d: Vec<f64>,
    pub eigenvalues_dq: Vec<f64>,
    /// Max multiset deviation between the two spectra.
    pub deviation: f64,
}

/// Machine-readable residual line of a verification suite.
#[derive(Debug, Clone)]
pub struct ResidualEntry {
    pub metric: String,
    pub value: f64,
    pub tolerance: f64,
    pub pass: bool,
}

pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

fn meta_json(config: &RunConfig) -> String {
    let mut s = String::from("{");
    let lines = config.echo_lines();
    for (i, (k, v)) in lines.iter().enumerate() {
        if i > 0 {
            s.push(',');
        }
        let _ = write!(s, "\"{}\":\"{}\"", json_escape(k), json_escape(v));
    }
    s.push('}');
    s
}

/// Spectra report: `{"meta": {...}, "blocks": [...]}` with fixed ordering.
pub fn spectrum_json(config: &RunConfig, blocks: &[SpectrumBlock]) -> String {
    let mut s = String::from("{\"meta\":");
    s.push_str(&meta_json(config));
    s.push_str(",\"blocks\":[");
    for (i, b) in blocks.iter().enumerate() {
        if i > 0 {
            s.push(',');
        }
        let _ = write!(
            s,
            "{{\"q\":{},\"lambda\":\"{}\",\"block_dim\":{},\"eigenvalues_d\":[",
            fmt_f64(b.q),
            json_escape(&b.lambda),
            b.block_dim
        );
        for (j, e) in b.eigenvalues_d.iter().enumerate() {
            if j > 0 {
                s.push(',');
            }
            s.push_str(&fmt_f64(*e));
        }
        s.push_str("],\"eigenvalues_dq\":[");
        for (j, e) in b.eigenvalues_dq.iter().enumerate() {
            if j > 0 {
                s.push(',');
            }
            s.push_str(&fmt_f64(*e));
        }
        let _ = write!(s, "],\"deviation\":{}}}", fmt_f64(b.deviation));
    }
    s.push_str("]}");
    s.push('\n');
    s
}

/// Spectra CSV: one row per (q, lambda, eigenvalue index).
pub fn spectrum_csv(blocks: &[SpectrumBlock]) -> String {
    let mut s = String::from("q,lambda,block_dim,eig_index,eigenvalue_D,eigenvalue_Dq,deviation\n");
    for b in blocks {
        for (idx, (ed, edq)) in b.eigenvalues_d.iter().zip(&b.eigenvalues_dq).enumerate() {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{}",
                fmt_f64(b.q),
                b.lambda,
                b.block_dim,
                idx,
                fmt_f64(*ed),
                fmt_f64(*edq),
                fmt_f64(b.deviation)
            );
        }
    }
    s
}

/// Residual report JSON for `verify` suites.
pub fn residual_json(config: &RunConfig, suite: &str, entries: &[ResidualEntry]) -> String {
    let mut s = String::from("{\"meta\":");
    s.push_str(&meta_json(config));
    let _ = write!(s, ",\"suite\":\"{}\",\"checks\":[", json_escape(suite));
    for (i, e) in entries.iter().enumerate() {
        if i > 0 {
            s.push(',');
        }
        let _ = write!(
            s,
            "{{\"metric\":\"{}\",\"value\":{},\"tolerance\":{},\"pass\":{}}}",
            json_escape(&e.metric),
            fmt_f64(e.value),
            fmt_f64(e.tolerance),
            e.pass
        );
    }
    s.push_str("]}");
    s.push('\n');
    s
}

/// Human-readable residual summary.
pub fn residual_text(suite: &str, entries: &[ResidualEntry]) -> String {
    let mut s = format!("suite {suite}\n");
    for e in entries {
        let _ = writeln!(
            s,
            "  [{}] {:<60} value {:>12.5e}  tol {:>9.1e}",
            if e.pass { "pass" } else { "FAIL" },
            e.metric,
            e.value,
            e.tolerance
        );
    }
    let failed = entries.iter().filter(|e| !e.pass).count();
    let _ = writeln!(
        s,
        "  {} checks, {} failed",
        entries.len(),
        failed
    );
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_formatting_round_trips() {
        for &x in &[
            0.0,
            1.0,
            -1.5,
            std::f64::consts::PI,
            1.0 / 3.0,
            6.02e23,
            -2.2250738585072014e-308,
        ] {
            let s = fmt_f64(x);
            let back: f64 = s.parse().unwrap();
            assert_eq!(back.to_bits(), x.to_bits(), "{s}");
        }
    }

    #[test]
    fn csv_has_header_only_for_empty_blocks() {
        let s = spectrum_csv(&[]);
        assert_eq!(
            s,
            "q,lambda,block_dim,eig_index,eigenvalue_D,eigenvalue_Dq,deviation\n"
        );
    }

    #[test]
    fn json_is_deterministic() {
        let cfg = RunConfig::default();
        let blocks = vec![SpectrumBlock {
            q: 1.5,
            lambda: "2".into(),
            block_dim: 4,
            eigenvalues_d: vec![-1.0, 1.0],
            eigenvalues_dq: vec![-1.0, 1.0],
            deviation: 0.0,
        }];
        let a = spectrum_json(&cfg, &blocks);
        let b = spectrum_json(&cfg, &blocks);
        assert_eq!(a, b);
        assert!(a.contains("\"blocks\""));
    }

    #[test]
    fn atomic_write_leaves_no_tmp() {
        let dir = std::env::temp_dir().join("qdlab-report-test");
        let path = dir.join("out.json");
        write_atomic(&path, b"{}\n").unwrap();
        assert_eq!(std::fs::read(&path).unwrap(), b"{}\n");
        assert!(!path.with_extension("tmp").exists());
    }
}
