//! Per-electrode gate counts and the gate frequency hierarchy.

use std::cmp::Ordering;
use std::fmt;
use std::io;

use serde::Serialize;

use super::{classify_gate, CoincidenceEvent, GateKind};

/// Events at one electrode closer than this (in iterations) belong to the
/// same gate realisation.
pub const DEFAULT_SEGMENTATION_GAP: u64 = 1000;

/// Column headers in gate-table order, followed by the total.
pub const COLUMN_HEADERS: [&str; 8] = ["x+y", "y", "x⊕y", "x", "x̄y", "xȳ", "xy", "Total"];

/// Merge consecutive events whose times differ by at most `gap` into one
/// realisation: the first event's time, the union of the subsets.
pub fn segment_events(events: &[CoincidenceEvent], gap: u64) -> Vec<CoincidenceEvent> {
    let mut out: Vec<CoincidenceEvent> = Vec::new();
    let mut last_t = None;
    for e in events {
        match (out.last_mut(), last_t) {
            (Some(cur), Some(prev)) if e.t.abs_diff(prev) <= gap => {
                cur.subset = cur.subset.union(e.subset);
                cur.gate = classify_gate(cur.subset).expect("union of non-empty sets");
            }
            _ => out.push(e.clone()),
        }
        last_t = Some(e.t);
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GateCountRow {
    pub electrode: String,
    /// Indexed by [`GateKind::index`].
    pub counts: [u32; 7],
}

impl GateCountRow {
    pub fn total(&self) -> u32 {
        self.counts.iter().sum()
    }

    pub fn count(&self, gate: GateKind) -> u32 {
        self.counts[gate.index()]
    }
}

/// Mean, sample standard deviation and median of one table column.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ColumnStats {
    pub mean: f64,
    pub stdev: f64,
    pub median: f64,
}

impl ColumnStats {
    /// All zero for an empty column; stdev is zero for a single value.
    pub fn of(values: &[f64]) -> Self {
        let n = values.len();
        if n == 0 {
            return Self {
                mean: 0.0,
                stdev: 0.0,
                median: 0.0,
            };
        }
        let mean = values.iter().sum::<f64>() / n as f64;
        let stdev = if n > 1 {
            let ss: f64 = values.iter().map(|v| (v - mean).powi(2)).sum();
            (ss / (n - 1) as f64).sqrt()
        } else {
            0.0
        };
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        let median = if n % 2 == 1 {
            sorted[n / 2]
        } else {
            (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0
        };
        Self {
            mean,
            stdev,
            median,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct GateCountTable {
    pub rows: Vec<GateCountRow>,
}

impl GateCountTable {
    /// Rows are put in natural label order (`E2` before `E10`).
    pub fn from_rows(mut rows: Vec<GateCountRow>) -> Self {
        rows.sort_by(|a, b| natural_cmp(&a.electrode, &b.electrode));
        Self { rows }
    }

    pub fn row(&self, electrode: &str) -> Option<&GateCountRow> {
        self.rows.iter().find(|r| r.electrode == electrode)
    }

    /// Column sums over all electrodes.
    pub fn totals(&self) -> [u32; 7] {
        let mut out = [0; 7];
        for r in &self.rows {
            for (o, c) in out.iter_mut().zip(r.counts) {
                *o += c;
            }
        }
        out
    }

    /// Statistics for the seven gate columns and the total column.
    pub fn column_stats(&self) -> [ColumnStats; 8] {
        std::array::from_fn(|c| {
            let col: Vec<f64> = self
                .rows
                .iter()
                .map(|r| f64::from(if c < 7 { r.counts[c] } else { r.total() }))
                .collect();
            ColumnStats::of(&col)
        })
    }

    /// CSV with one row per electrode and trailing Average, StDev and
    /// Median rows.
    pub fn write_csv<W: io::Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["electrode"];
        header.extend(COLUMN_HEADERS);
        w.write_record(&header)?;
        for r in &self.rows {
            let mut rec = vec![r.electrode.clone()];
            rec.extend(r.counts.iter().map(u32::to_string));
            rec.push(r.total().to_string());
            w.write_record(&rec)?;
        }
        let stats = self.column_stats();
        for name in ["Average", "StDev", "Median"] {
            let mut rec = vec![name.to_owned()];
            rec.extend(stats.iter().map(|s| {
                let v = match name {
                    "Average" => s.mean,
                    "StDev" => s.stdev,
                    _ => s.median,
                };
                format!("{v:.2}")
            }));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv output is UTF-8")
    }

    /// Parse the layout written by [`write_csv`](Self::write_csv); summary
    /// rows are skipped.
    pub fn read_csv<R: io::Read>(input: R) -> csv::Result<Self> {
        let mut r = csv::Reader::from_reader(input);
        let mut rows = Vec::new();
        for rec in r.records() {
            let rec = rec?;
            let label = rec.get(0).unwrap_or_default();
            if matches!(label, "Average" | "StDev" | "Median") {
                continue;
            }
            let mut counts = [0u32; 7];
            for (i, c) in counts.iter_mut().enumerate() {
                *c = rec
                    .get(i + 1)
                    .and_then(|s| s.trim().parse().ok())
                    .ok_or_else(|| {
                        csv::Error::from(io::Error::new(
                            io::ErrorKind::InvalidData,
                            format!("bad count in row {label:?}"),
                        ))
                    })?;
            }
            rows.push(GateCountRow {
                electrode: label.to_owned(),
                counts,
            });
        }
        Ok(Self::from_rows(rows))
    }
}

/// Segment each electrode's events and count one realisation per segment.
pub fn count_gates(events: &[(String, Vec<CoincidenceEvent>)], gap: u64) -> GateCountTable {
    let rows = events
        .iter()
        .map(|(label, evs)| {
            let mut counts = [0u32; 7];
            for e in segment_events(evs, gap) {
                counts[e.gate.index()] += 1;
            }
            GateCountRow {
                electrode: label.clone(),
                counts,
            }
        })
        .collect();
    GateCountTable::from_rows(rows)
}

/// Gates with the two SELECT variants pooled, for the frequency hierarchy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum GateFamily {
    Select,
    AndNot,
    NotAnd,
    And,
    Or,
    Xor,
}

impl GateFamily {
    pub const ALL: [GateFamily; 6] = [
        GateFamily::Select,
        GateFamily::AndNot,
        GateFamily::NotAnd,
        GateFamily::And,
        GateFamily::Or,
        GateFamily::Xor,
    ];

    pub fn of(gate: GateKind) -> Self {
        match gate {
            GateKind::SelectX | GateKind::SelectY => GateFamily::Select,
            GateKind::AndNot => GateFamily::AndNot,
            GateKind::NotAnd => GateFamily::NotAnd,
            GateKind::And => GateFamily::And,
            GateKind::Or => GateFamily::Or,
            GateKind::Xor => GateFamily::Xor,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            GateFamily::Select => "SELECT",
            GateFamily::AndNot => "AND_NOT",
            GateFamily::NotAnd => "NOT_AND",
            GateFamily::And => "AND",
            GateFamily::Or => "OR",
            GateFamily::Xor => "XOR",
        }
    }
}

impl fmt::Display for GateFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Gate families by descending total count; equal totals share a group.
pub fn rank_gates(table: &GateCountTable) -> Vec<Vec<GateFamily>> {
    let totals = table.totals();
    let mut pooled = [0u64; 6];
    for g in GateKind::ALL {
        let f = GateFamily::of(g);
        let slot = GateFamily::ALL
            .iter()
            .position(|&x| x == f)
            .expect("listed");
        pooled[slot] += u64::from(totals[g.index()]);
    }
    let mut order: Vec<(u64, GateFamily)> = GateFamily::ALL
        .iter()
        .enumerate()
        .map(|(i, &f)| (pooled[i], f))
        .collect();
    order.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
    let mut groups: Vec<(u64, Vec<GateFamily>)> = Vec::new();
    for (n, f) in order {
        match groups.last_mut() {
            Some((m, g)) if *m == n => g.push(f),
            _ => groups.push((n, vec![f])),
        }
    }
    groups.into_iter().map(|(_, g)| g).collect()
}

/// Compare labels by alphabetic prefix, then numeric suffix, then text.
pub fn natural_cmp(a: &str, b: &str) -> Ordering {
    fn split(s: &str) -> (&str, Option<u64>) {
        let digits = s.len() - s.trim_end_matches(|c: char| c.is_ascii_digit()).len();
        let (head, tail) = s.split_at(s.len() - digits);
        (head, tail.parse().ok())
    }
    let (ha, na) = split(a);
    let (hb, nb) = split(b);
    ha.cmp(hb).then(na.cmp(&nb)).then(a.cmp(b))
}
