use std::collections::HashSet;
use std::fmt;
use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::net::{TcpListener, ToSocketAddrs};
use std::path::Path;
use std::sync::Arc;
use std::time::Instant;

use fmcc_core::crypto::BackendKind;
use fmcc_core::index::{align_with_log_moves, read_index, write_index, Budget, IndexError};
use fmcc_core::model::{
    complete_runs, concatenate, linear_extensions, parse_model, unfold, ModelError, ModelFormat,
    DEFAULT_MAX_EVENTS,
};
use fmcc_core::net;
use fmcc_core::protocol::{ProtocolError, ServerConfig, ServerIndex};
use fmcc_core::{Alphabet, FmIndex, PetriNet, RunsText};

use crate::eventlog::{read_log, traces, variants, TraceVariant};
use crate::report::{Report, TraceResult};
use crate::CliError;

fn input(what: &str, e: impl fmt::Display) -> CliError {
    CliError::Input(format!("{what}: {e}"))
}

pub fn load_model(path: &Path) -> Result<PetriNet, CliError> {
    let format = ModelFormat::from_path(path)
        .ok_or_else(|| input(&path.display().to_string(), "expected a .pnml or .json model"))?;
    let bytes = std::fs::read(path).map_err(|e| input(&path.display().to_string(), e))?;
    Ok(parse_model(&bytes, format)?)
}

/// Everything derived from a model on the way to its index.
#[derive(Debug)]
pub struct Built {
    pub runs: usize,
    pub linearizations: usize,
    pub alphabet: Alphabet,
    pub text: RunsText,
    pub index: FmIndex,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexStats {
    pub runs: usize,
    pub linearizations: usize,
    pub text_len: usize,
    pub sigma: usize,
    pub width: u32,
}

impl fmt::Display for IndexStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "runs {}, linearizations {}, |T| {}, |Σ| {}, width {}",
            self.runs, self.linearizations, self.text_len, self.sigma, self.width
        )
    }
}

impl Built {
    pub fn stats(&self) -> IndexStats {
        IndexStats {
            runs: self.runs,
            linearizations: self.linearizations,
            text_len: self.text.len(),
            sigma: self.alphabet.size(),
            width: self.alphabet.width(),
        }
    }
}

/// Unfold, linearize (at most `cap` distinct sequences), concatenate, index.
pub fn build(net: &PetriNet, cap: usize) -> Result<Built, CliError> {
    let prefix = unfold(net, DEFAULT_MAX_EVENTS)?;
    let runs = complete_runs(&prefix);
    let mut seen = HashSet::new();
    let mut seqs = Vec::new();
    for run in &runs {
        for seq in linear_extensions(run, cap)? {
            if seen.insert(seq.clone()) {
                seqs.push(seq);
                if seqs.len() > cap {
                    return Err(ModelError::CapExceeded(cap).into());
                }
            }
        }
    }
    let alphabet = Alphabet::from_labels(net.visible_labels())?;
    let text = concatenate(&seqs, &alphabet)?;
    let index = FmIndex::build(&text, &alphabet)?;
    Ok(Built {
        runs: runs.len(),
        linearizations: seqs.len(),
        alphabet,
        text,
        index,
    })
}

pub fn index_build(model: &Path, out: &Path, cap: usize) -> Result<IndexStats, CliError> {
    let built = build(&load_model(model)?, cap)?;
    let file = File::create(out).map_err(|e| input(&out.display().to_string(), e))?;
    write_index(&built.index, BufWriter::new(file))?;
    Ok(built.stats())
}

pub fn load_index(path: &Path) -> Result<FmIndex, CliError> {
    let file = File::open(path).map_err(|e| input(&path.display().to_string(), e))?;
    read_index(BufReader::new(file)).map_err(|e| match e {
        IndexError::Io(e) => input(&path.display().to_string(), e),
        other => other.into(),
    })
}

/// Index from `--index`, or built from `--model`.
pub fn index_from(model: Option<&Path>, index: Option<&Path>, cap: usize) -> Result<FmIndex, CliError> {
    match (model, index) {
        (_, Some(i)) => load_index(i),
        (Some(m), None) => Ok(build(&load_model(m)?, cap)?.index),
        (None, None) => Err(CliError::Input("one of --model or --index is required".into())),
    }
}

/// Variants of the log at `path`, or only the one of case `case`.
pub fn load_variants(path: &Path, case: Option<&str>) -> Result<Vec<TraceVariant>, CliError> {
    let file = File::open(path).map_err(|e| input(&path.display().to_string(), e))?;
    let mut ts = traces(&read_log(BufReader::new(file))?)?;
    if let Some(id) = case {
        ts.retain(|t| t.case_id == id);
        if ts.is_empty() {
            return Err(CliError::Input(format!("no case `{id}` in the log")));
        }
    }
    Ok(variants(&ts))
}

/// Comma-separated labels; blank input is the empty trace.
pub fn parse_trace(s: &str) -> Vec<String> {
    s.split(',')
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .map(str::to_owned)
        .collect()
}

/// Log labels the model does not know. The model alphabet is authoritative:
/// log labels must be a subset of it.
pub fn check_labels(alphabet: &Alphabet, variants: &[TraceVariant]) -> Result<(), CliError> {
    let unknown: Vec<&str> = variants
        .iter()
        .flat_map(|v| alphabet.unknown_labels(&v.activities))
        .collect::<std::collections::BTreeSet<_>>()
        .into_iter()
        .collect();
    if unknown.is_empty() {
        Ok(())
    } else {
        Err(CliError::Input(format!(
            "labels not in the model: {}",
            unknown.join(", ")
        )))
    }
}

pub fn align_local(index: &FmIndex, variants: &[TraceVariant], budget: Budget) -> Result<Report, CliError> {
    check_labels(index.alphabet(), variants)?;
    let mut results = Vec::with_capacity(variants.len());
    for v in variants {
        let start = Instant::now();
        let outcome = match align_with_log_moves(index, &v.activities, budget) {
            Ok(al) => Ok(al),
            Err(e @ IndexError::BudgetExhausted(_)) => Err(e.to_string()),
            Err(e) => return Err(e.into()),
        };
        results.push(TraceResult {
            trace: v.activities.clone(),
            frequency: v.frequency,
            outcome,
            seconds: start.elapsed().as_secs_f64(),
        });
    }
    Ok(Report { results })
}

/// One secure check of `trace` on a fresh connection.
pub fn check_one<A: ToSocketAddrs>(
    addr: A,
    backend: BackendKind,
    trace: &[String],
    frequency: usize,
) -> Result<TraceResult, CliError> {
    let (mut client, mut t) = net::connect(addr, backend, None)?;
    let start = Instant::now();
    let outcome = match client.check(&mut t, trace) {
        Ok(al) => Ok(al),
        Err(ProtocolError::Aborted(reason)) => Err(reason),
        Err(e) => return Err(e.into()),
    };
    Ok(TraceResult {
        trace: trace.to_vec(),
        frequency,
        outcome,
        seconds: start.elapsed().as_secs_f64(),
    })
}

pub fn check<A: ToSocketAddrs + Copy>(
    addr: A,
    backend: BackendKind,
    variants: &[TraceVariant],
) -> Result<Report, CliError> {
    let results = variants
        .iter()
        .map(|v| check_one(addr, backend, &v.activities, v.frequency))
        .collect::<Result<_, _>>()?;
    Ok(Report { results })
}

pub fn server_config(budget: Budget, backends: Vec<BackendKind>) -> ServerConfig {
    ServerConfig {
        budget,
        backends,
        ..ServerConfig::default()
    }
}

pub fn serve(index: FmIndex, addr: &str, config: ServerConfig) -> Result<(), CliError> {
    let listener = TcpListener::bind(addr).map_err(|e| CliError::Transport(format!("bind {addr}: {e}")))?;
    let shared = Arc::new(ServerIndex::new(index));
    eprintln!(
        "listening on {} (M = {}, budget {})",
        listener.local_addr().map_err(|e| CliError::Transport(e.to_string()))?,
        shared.m(),
        config.budget
    );
    net::serve(listener, shared, config).map_err(|e| CliError::Transport(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use fmcc_core::model::synth::two_parallel_blocks;

    const LOOP_NET: &str = r#"{"places":["p1","p2","p3","p4"],
      "transitions":[{"id":"a","label":"a"},{"id":"b","label":"b"},{"id":"c","label":"c"},{"id":"d","label":"d"}],
      "arcs":[["p1","a"],["a","p2"],["p2","b"],["b","p3"],["p3","c"],["c","p2"],["p3","d"],["d","p4"]],
      "initial":["p1"],"final":["p4"]}"#;

    #[test]
    fn running_example_stats() {
        let net = parse_model(LOOP_NET.as_bytes(), ModelFormat::Json).unwrap();
        let b = build(&net, 100).unwrap();
        assert_eq!(
            b.stats(),
            IndexStats { runs: 2, linearizations: 2, text_len: 11, sigma: 6, width: 3 }
        );
        assert_eq!(b.alphabet.render(b.text.codes()), "abcbd;abd;$");
    }

    #[test]
    fn parallel_blocks_stats() {
        let b = build(&two_parallel_blocks(), 10_000).unwrap();
        assert_eq!(b.runs, 1);
        assert_eq!(b.linearizations, 144);
        assert!(matches!(build(&two_parallel_blocks(), 143), Err(CliError::Input(_))));
    }

    #[test]
    fn model_without_complete_runs_indexes_the_sentinel_only() {
        let doc = r#"{"places":["i","o","x"],"transitions":[{"id":"a","label":"a"}],
          "arcs":[["i","a"],["a","o"]],"initial":["i"],"final":["x"]}"#;
        let b = build(&parse_model(doc.as_bytes(), ModelFormat::Json).unwrap(), 10).unwrap();
        assert_eq!(b.runs, 0);
        assert_eq!(b.text.len(), 1);
    }

    #[test]
    fn trace_parsing() {
        assert_eq!(parse_trace("a, b ,d"), vec!["a", "b", "d"]);
        assert!(parse_trace("").is_empty());
    }

    #[test]
    fn unknown_log_labels_are_listed() {
        let a = Alphabet::from_labels(["a", "b"]).unwrap();
        let v = vec![TraceVariant {
            activities: vec!["a".into(), "z".into(), "y".into()],
            frequency: 1,
        }];
        match check_labels(&a, &v) {
            Err(CliError::Input(m)) => assert_eq!(m, "labels not in the model: y, z"),
            other => panic!("{other:?}"),
        }
    }
}
