//! Benchmark records and their CSV / markdown renderings.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

/// One `(matrix, method, tol, n)` cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRecord {
    pub matrix: String,
    pub method: String,
    pub tol: f64,
    pub n: usize,
    /// Period used by `p-bicgstab-rr`; empty for the other methods.
    pub rr_period: Option<usize>,
    pub iterations: usize,
    /// `converged`, `max_iter`, `breakdown:<reason>` or `error: <message>`.
    pub status: String,
    pub wall_time_s: f64,
    /// `||b - A x|| / ||b||` of the returned iterate.
    pub true_residual: f64,
}

impl BenchRecord {
    pub fn converged(&self) -> bool {
        self.status == "converged"
    }

    /// Compares every float by bit pattern.
    pub fn bitwise_eq(&self, other: &BenchRecord) -> bool {
        self.matrix == other.matrix
            && self.method == other.method
            && self.tol.to_bits() == other.tol.to_bits()
            && self.n == other.n
            && self.rr_period == other.rr_period
            && self.iterations == other.iterations
            && self.status == other.status
            && self.wall_time_s.to_bits() == other.wall_time_s.to_bits()
            && self.true_residual.to_bits() == other.true_residual.to_bits()
    }
}

/// Floats are written in shortest round-trip form, so reading the CSV back
/// restores every value bitwise.
pub fn write_csv<W: Write>(records: &[BenchRecord], out: W) -> csv::Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    for record in records {
        writer.serialize(record)?;
    }
    writer.flush()?;
    Ok(())
}

pub fn read_csv<R: Read>(input: R) -> csv::Result<Vec<BenchRecord>> {
    csv::Reader::from_reader(input).deserialize().collect()
}

/// Iteration-count table with one row per `(matrix, tol)` and one column
/// per method, rows and columns in first-seen order. Non-converged cells
/// show `-`; the smallest converged count in each row is bold.
pub fn render_markdown(records: &[BenchRecord]) -> String {
    let mut methods: Vec<&str> = Vec::new();
    let mut rows: Vec<(&str, f64, usize)> = Vec::new();
    let mut cells: BTreeMap<(usize, usize), &BenchRecord> = BTreeMap::new();
    for record in records {
        let col = match methods.iter().position(|m| *m == record.method) {
            Some(c) => c,
            None => {
                methods.push(&record.method);
                methods.len() - 1
            }
        };
        let key = (record.matrix.as_str(), record.tol, record.n);
        let row = match rows
            .iter()
            .position(|r| r.0 == key.0 && r.1.to_bits() == key.1.to_bits() && r.2 == key.2)
        {
            Some(r) => r,
            None => {
                rows.push(key);
                rows.len() - 1
            }
        };
        cells.insert((row, col), record);
    }

    let mut out = String::from("| matrix | tol | n |");
    for m in &methods {
        out.push_str(&format!(" {m} |"));
    }
    out.push_str("\n|---|---|---|");
    for _ in &methods {
        out.push_str("---|");
    }
    out.push('\n');

    for (r, (matrix, tol, n)) in rows.iter().enumerate() {
        let best = (0..methods.len())
            .filter_map(|c| cells.get(&(r, c)))
            .filter(|rec| rec.converged())
            .map(|rec| rec.iterations)
            .min();
        out.push_str(&format!("| {matrix} | {tol:e} | {n} |"));
        for c in 0..methods.len() {
            let text = match cells.get(&(r, c)) {
                Some(rec) if rec.converged() => {
                    let mut t = rec.iterations.to_string();
                    if let Some(k) = rec.rr_period {
                        t.push_str(&format!(" (k={k})"));
                    }
                    if Some(rec.iterations) == best {
                        format!("**{t}**")
                    } else {
                        t
                    }
                }
                _ => "-".to_string(),
            };
            out.push_str(&format!(" {text} |"));
        }
        out.push('\n');
    }
    out
}
