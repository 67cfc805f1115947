//! CSV and JSON serialization of results.
//!
//! CSV is locale-independent: period decimals, comma delimiter, LF line
//! endings, and a fixed header row. Numeric fields carry 13 significant
//! digits; unbounded or absent values are emitted as empty fields. JSON
//! mirrors the same records with `null` for the absent cases and validates
//! against the schemas shipped under `schemas/`.

use crate::CliError;
use photonlim::adaptive::Metrics;
use photonlim::curves::TradeoffPoint;
use serde::Serialize;
use std::io::Write;

/// 13 significant digits, exponent form, locale-independent.
pub fn format_number(v: f64) -> String {
    format!("{v:.12e}")
}

fn optional_field(v: Option<f64>) -> String {
    match v {
        Some(x) if x.is_finite() => format_number(x),
        _ => String::new(),
    }
}

pub const CURVES_HEADER: &str = "scheme,E,aux,pie_bits_per_photon,die_bits_per_mode";

pub fn curves_csv(rows: &[(String, TradeoffPoint)]) -> String {
    let mut out = String::from(CURVES_HEADER);
    out.push('\n');
    for (scheme, p) in rows {
        out.push_str(&format!(
            "{scheme},{},{},{},{}\n",
            format_number(p.energy),
            optional_field(p.aux),
            optional_field(Some(p.pie)),
            format_number(p.die),
        ));
    }
    out
}

#[derive(Serialize)]
struct CurveRecord<'a> {
    scheme: &'a str,
    e: f64,
    aux: Option<f64>,
    pie_bits_per_photon: Option<f64>,
    die_bits_per_mode: f64,
}

pub fn curves_json(rows: &[(String, TradeoffPoint)]) -> String {
    let records: Vec<CurveRecord> = rows
        .iter()
        .map(|(scheme, p)| CurveRecord {
            scheme,
            e: p.energy,
            aux: p.aux.filter(|a| a.is_finite()),
            pie_bits_per_photon: Some(p.pie).filter(|x| x.is_finite()),
            die_bits_per_mode: p.die,
        })
        .collect();
    let mut s = serde_json::to_string_pretty(&records).expect("serializable records");
    s.push('\n');
    s
}

pub fn adaptive_header(block_length: usize) -> String {
    let mut header = String::from("code,mode,E,mi_bits,die,pie");
    for j in 1..=block_length {
        header.push_str(&format!(",bit_error_{j}"));
    }
    header
}

pub struct AdaptiveRow {
    pub code: String,
    pub mode: &'static str,
    pub energy: f64,
    pub metrics: Metrics,
}

pub fn adaptive_csv(rows: &[AdaptiveRow], block_length: usize) -> String {
    let mut out = adaptive_header(block_length);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{}",
            r.code,
            r.mode,
            format_number(r.energy),
            format_number(r.metrics.mutual_information.get()),
            format_number(r.metrics.die),
            format_number(r.metrics.pie),
        ));
        for e in &r.metrics.bit_error {
            out.push(',');
            out.push_str(&format_number(*e));
        }
        out.push('\n');
    }
    out
}

#[derive(Serialize)]
struct AdaptiveRecord<'a> {
    code: &'a str,
    mode: &'a str,
    e: f64,
    mi_bits: f64,
    die: f64,
    pie: f64,
    bit_error: &'a [f64],
}

pub fn adaptive_json(rows: &[AdaptiveRow]) -> String {
    let records: Vec<AdaptiveRecord> = rows
        .iter()
        .map(|r| AdaptiveRecord {
            code: &r.code,
            mode: r.mode,
            e: r.energy,
            mi_bits: r.metrics.mutual_information.get(),
            die: r.metrics.die,
            pie: r.metrics.pie,
            bit_error: &r.metrics.bit_error,
        })
        .collect();
    let mut s = serde_json::to_string_pretty(&records).expect("serializable records");
    s.push('\n');
    s
}

#[derive(Serialize)]
pub struct SimulateReport {
    pub pe_estimate: f64,
    pub stderr: f64,
    pub helstrom: f64,
    pub z_score: f64,
}

pub fn simulate_json(report: &SimulateReport) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("serializable report");
    s.push('\n');
    s
}

/// Writes to `--out PATH` or stdout.
pub fn emit(out: Option<&str>, payload: &str) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, payload)
            .map_err(|e| CliError::Io(format!("cannot write {path}: {e}"))),
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            lock.write_all(payload.as_bytes())
                .and_then(|()| lock.flush())
                .map_err(|e| CliError::Io(e.to_string()))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_fields_have_13_significant_digits() {
        let rows = vec![(
            "holevo".to_string(),
            TradeoffPoint { energy: 1.0, pie: 2.0, die: 2.0, aux: None },
        )];
        let csv = curves_csv(&rows);
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), CURVES_HEADER);
        let row = lines.next().unwrap();
        assert_eq!(row, "holevo,1.000000000000e0,,2.000000000000e0,2.000000000000e0");
        assert!(!csv.contains('\r'));
    }

    #[test]
    fn unbounded_pie_becomes_empty_csv_field_and_json_null() {
        let rows = vec![(
            "holevo".to_string(),
            TradeoffPoint { energy: 0.0, pie: f64::INFINITY, die: 0.0, aux: None },
        )];
        let csv = curves_csv(&rows);
        assert!(csv.lines().nth(1).unwrap().contains(",,,"));
        let json = curves_json(&rows);
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert!(v[0]["pie_bits_per_photon"].is_null());
    }
}
