//! Timed secure checks over a loopback server, written out as CSV.

use std::io::Write;
use std::sync::Arc;

use fmcc_core::crypto::BackendKind;
use fmcc_core::index::Budget;
use fmcc_core::net;
use fmcc_core::protocol::{ServerConfig, ServerIndex};
use fmcc_core::FmIndex;
use serde::Serialize;

use crate::commands::check_one;
use crate::eventlog::TraceVariant;
use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRow {
    pub backend: String,
    pub text_len: usize,
    pub trace: String,
    pub trace_len: usize,
    pub cost: Option<usize>,
    pub repetitions: usize,
    pub mean_seconds: f64,
    pub std_seconds: f64,
    pub mean_per_symbol: f64,
    pub std_per_symbol: f64,
}

/// Sample mean and standard deviation (n - 1); zero spread below two samples.
pub fn mean_std(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (0.0, 0.0);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Run every variant `repetitions` times per backend against a fresh
/// loopback server with no undo budget. Aborted checks are errors here.
pub fn run(
    index: FmIndex,
    variants: &[TraceVariant],
    backends: &[BackendKind],
    repetitions: usize,
) -> Result<Vec<BenchRow>, CliError> {
    if repetitions == 0 {
        return Ok(Vec::new());
    }
    let text_len = index.text_len();
    let shared = Arc::new(ServerIndex::new(index));
    let cfg = ServerConfig {
        budget: Budget::Unlimited,
        backends: backends.to_vec(),
        ..ServerConfig::default()
    };
    let addr = net::spawn_server("127.0.0.1:0", shared, cfg)
        .map_err(|e| CliError::Transport(e.to_string()))?;

    let mut rows = Vec::new();
    for &backend in backends {
        for v in variants {
            let mut secs = Vec::with_capacity(repetitions);
            let mut per = Vec::with_capacity(repetitions);
            let mut cost = None;
            for _ in 0..repetitions {
                let r = check_one(addr, backend, &v.activities, v.frequency)?;
                if let Err(reason) = &r.outcome {
                    return Err(CliError::Aborted(reason.clone()));
                }
                cost = r.cost();
                secs.push(r.seconds);
                per.push(r.per_symbol());
            }
            let (mean_seconds, std_seconds) = mean_std(&secs);
            let (mean_per_symbol, std_per_symbol) = mean_std(&per);
            rows.push(BenchRow {
                backend: backend.name().to_owned(),
                text_len,
                trace: v.activities.join(" "),
                trace_len: v.activities.len(),
                cost,
                repetitions,
                mean_seconds,
                std_seconds,
                mean_per_symbol,
                std_per_symbol,
            });
        }
    }
    Ok(rows)
}

const HEADER: [&str; 10] = [
    "backend",
    "text_len",
    "trace",
    "trace_len",
    "cost",
    "repetitions",
    "mean_seconds",
    "std_seconds",
    "mean_per_symbol",
    "std_per_symbol",
];

/// CSV with a header line, also when there are no rows.
pub fn write_csv<W: Write>(rows: &[BenchRow], w: W) -> Result<(), csv::Error> {
    let mut out = csv::WriterBuilder::new().has_headers(false).from_writer(w);
    out.write_record(HEADER)?;
    for r in rows {
        out.serialize(r)?;
    }
    out.flush()?;
    Ok(())
}
