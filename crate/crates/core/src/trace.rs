//! Per-checkpoint run records and their CSV form.
//!
//! A trace file is a block of `# key = value` metadata lines, one header row,
//! then one row per checkpoint. Reals are written with 17 significant digits;
//! absent values are empty fields.

use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct Counters {
    pub fo_calls: u64,
    pub zo_calls: u64,
    pub comm_rounds: u64,
}

impl Counters {
    pub fn since(self, base: Counters) -> Counters {
        Counters {
            fo_calls: self.fo_calls - base.fo_calls,
            zo_calls: self.zo_calls - base.zo_calls,
            comm_rounds: self.comm_rounds - base.comm_rounds,
        }
    }

    pub fn plus(self, other: Counters) -> Counters {
        Counters {
            fo_calls: self.fo_calls + other.fo_calls,
            zo_calls: self.zo_calls + other.zo_calls,
            comm_rounds: self.comm_rounds + other.comm_rounds,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceRow {
    pub step: usize,
    pub fo_calls: u64,
    pub zo_calls: u64,
    pub comm_rounds: u64,
    pub wall_ms: Option<f64>,
    pub psi0: f64,
    /// Ψ₀ minus the known reference optimum.
    pub gap: Option<f64>,
    /// `gap` divided by the gap at step 0.
    pub rel_gap: Option<f64>,
    pub consensus_sq_norm: Option<f64>,
    pub phase: usize,
    pub bound: Option<f64>,
}

pub const CSV_HEADER: &str =
    "step,fo_calls,zo_calls,comm_rounds,wall_ms,psi0,gap,rel_gap,consensus_sq_norm,phase,bound";

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct RunTrace {
    pub metadata: Vec<(String, String)>,
    pub rows: Vec<TraceRow>,
}

impl RunTrace {
    pub fn set_meta(&mut self, key: impl Into<String>, value: impl ToString) {
        let key = key.into();
        let value = value.to_string();
        match self.metadata.iter_mut().find(|(k, _)| *k == key) {
            Some(slot) => slot.1 = value,
            None => self.metadata.push((key, value)),
        }
    }

    pub fn meta(&self, key: &str) -> Option<&str> {
        self.metadata.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn last(&self) -> Option<&TraceRow> {
        self.rows.last()
    }

    /// Appends another trace's rows, shifting its counters and steps by the
    /// last row of this one.
    pub fn append_shifted(&mut self, other: RunTrace) {
        let (step0, base) = match self.rows.last() {
            Some(r) => (
                r.step,
                Counters {
                    fo_calls: r.fo_calls,
                    zo_calls: r.zo_calls,
                    comm_rounds: r.comm_rounds,
                },
            ),
            None => (0, Counters::default()),
        };
        for mut row in other.rows {
            row.step += step0;
            row.fo_calls += base.fo_calls;
            row.zo_calls += base.zo_calls;
            row.comm_rounds += base.comm_rounds;
            self.rows.push(row);
        }
    }

    pub fn body_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(CSV_HEADER);
        out.push('\n');
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{}",
                r.step,
                r.fo_calls,
                r.zo_calls,
                r.comm_rounds,
                opt(r.wall_ms),
                real(r.psi0),
                opt(r.gap),
                opt(r.rel_gap),
                opt(r.consensus_sq_norm),
                r.phase,
                opt(r.bound),
            );
        }
        out
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.metadata {
            let _ = writeln!(out, "# {k} = {v}");
        }
        out.push_str(&self.body_csv());
        out
    }

    pub fn from_csv(text: &str) -> Result<RunTrace> {
        let mut trace = RunTrace::default();
        let mut header_seen = false;
        for (i, line) in text.lines().enumerate() {
            let lineno = i + 1;
            if let Some(meta) = line.strip_prefix('#') {
                let (k, v) = meta.split_once('=').ok_or_else(|| Error::Parse {
                    line: lineno,
                    message: "metadata line lacks `=`".into(),
                })?;
                trace.metadata.push((k.trim().to_string(), v.trim().to_string()));
                continue;
            }
            if !header_seen {
                if line.trim() != CSV_HEADER {
                    return Err(Error::Parse {
                        line: lineno,
                        message: format!("expected header `{CSV_HEADER}`"),
                    });
                }
                header_seen = true;
                continue;
            }
            if line.trim().is_empty() {
                continue;
            }
            trace.rows.push(parse_row(line, lineno)?);
        }
        Ok(trace)
    }
}

fn parse_row(line: &str, lineno: usize) -> Result<TraceRow> {
    let fields: Vec<&str> = line.split(',').collect();
    if fields.len() != 11 {
        return Err(Error::Parse {
            line: lineno,
            message: format!("expected 11 fields, found {}", fields.len()),
        });
    }
    let bad = |what: &str| Error::Parse {
        line: lineno,
        message: format!("bad {what}"),
    };
    let int = |s: &str, what: &str| s.parse::<u64>().map_err(|_| bad(what));
    let maybe = |s: &str, what: &str| -> Result<Option<f64>> {
        if s.is_empty() {
            Ok(None)
        } else {
            s.parse::<f64>().map(Some).map_err(|_| bad(what))
        }
    };
    Ok(TraceRow {
        step: int(fields[0], "step")? as usize,
        fo_calls: int(fields[1], "fo_calls")?,
        zo_calls: int(fields[2], "zo_calls")?,
        comm_rounds: int(fields[3], "comm_rounds")?,
        wall_ms: maybe(fields[4], "wall_ms")?,
        psi0: fields[5].parse().map_err(|_| bad("psi0"))?,
        gap: maybe(fields[6], "gap")?,
        rel_gap: maybe(fields[7], "rel_gap")?,
        consensus_sq_norm: maybe(fields[8], "consensus_sq_norm")?,
        phase: int(fields[9], "phase")? as usize,
        bound: maybe(fields[10], "bound")?,
    })
}

fn real(v: f64) -> String {
    format!("{v:.16e}")
}

fn opt(v: Option<f64>) -> String {
    v.map(real).unwrap_or_default()
}
