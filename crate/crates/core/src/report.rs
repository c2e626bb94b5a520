//! Check reports: rows sorted by id, each failure with a reproducible
//! witness, rendered as a table, CSV or JSON.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub chart: String,
    pub point: Vec<f64>,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckRow {
    pub id: String,
    pub passed: bool,
    pub detail: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub title: String,
    pub rows: Vec<CheckRow>,
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn format_point(p: &[f64]) -> String {
    p.iter().map(|v| format!("{v:.12e}")).collect::<Vec<_>>().join(" ")
}

impl Report {
    pub fn new(title: &str) -> Report {
        Report { title: title.to_string(), rows: vec![] }
    }

    pub fn pass(&mut self, id: &str, detail: impl Into<String>) {
        self.push(CheckRow { id: id.to_string(), passed: true, detail: detail.into(), witness: None });
    }

    pub fn fail(&mut self, id: &str, detail: impl Into<String>, witness: Option<Witness>) {
        self.push(CheckRow { id: id.to_string(), passed: false, detail: detail.into(), witness });
    }

    /// Inserts keeping rows sorted by id; rows with equal ids keep their
    /// insertion order.
    pub fn push(&mut self, row: CheckRow) {
        let at = self.rows.partition_point(|r| r.id <= row.id);
        self.rows.insert(at, row);
    }

    pub fn extend(&mut self, other: Report) {
        for row in other.rows {
            self.push(row);
        }
    }

    pub fn passed(&self) -> bool {
        self.rows.iter().all(|r| r.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckRow> {
        self.rows.iter().filter(|r| !r.passed)
    }

    pub fn to_table(&self) -> String {
        let w = self.rows.iter().map(|r| r.id.len()).max().unwrap_or(2).max(5);
        let mut out = String::new();
        if !self.title.is_empty() {
            let _ = writeln!(out, "{}", self.title);
        }
        let _ = writeln!(out, "{:<w$}  {:<6}  detail", "check", "status");
        for r in &self.rows {
            let status = if r.passed { "pass" } else { "FAIL" };
            let _ = writeln!(out, "{:<w$}  {:<6}  {}", r.id, status, r.detail);
            if let Some(wit) = &r.witness {
                let _ = writeln!(
                    out,
                    "{:<w$}          witness: chart {} point [{}] seed {}",
                    "",
                    wit.chart,
                    format_point(&wit.point),
                    wit.seed
                );
            }
        }
        let failed = self.failures().count();
        let _ = writeln!(out, "{} checks, {} failed", self.rows.len(), failed);
        out
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("id,status,detail,witness_chart,witness_point,witness_seed\n");
        for r in &self.rows {
            let (c, p, s) = match &r.witness {
                Some(w) => (w.chart.clone(), format_point(&w.point), w.seed.to_string()),
                None => Default::default(),
            };
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                csv_field(&r.id),
                if r.passed { "pass" } else { "fail" },
                csv_field(&r.detail),
                csv_field(&c),
                csv_field(&p),
                s
            );
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }
}
