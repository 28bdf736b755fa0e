//! CSV event logs with the columns `case_id,activity,timestamp`.

use std::collections::{BTreeMap, HashMap};
use std::io::Read;

use chrono::{DateTime, NaiveDate, NaiveDateTime};
use serde::Deserialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum LogError {
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("row {row}: bad timestamp `{value}`")]
    Timestamp { row: usize, value: String },
    #[error("row {0}: empty activity")]
    EmptyActivity(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
pub struct EventRecord {
    pub case_id: String,
    pub activity: String,
    pub timestamp: String,
}

/// A case's activities in timestamp order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trace {
    pub case_id: String,
    pub activities: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceVariant {
    pub activities: Vec<String>,
    pub frequency: usize,
}

pub fn read_log<R: Read>(r: R) -> Result<Vec<EventRecord>, LogError> {
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(r);
    let mut out = Vec::new();
    for (i, rec) in reader.deserialize::<EventRecord>().enumerate() {
        let rec = rec?;
        if rec.activity.is_empty() {
            return Err(LogError::EmptyActivity(i + 1));
        }
        out.push(rec);
    }
    Ok(out)
}

/// ISO-8601 date-time, with or without offset, or a plain date. Offsets
/// are normalized to UTC.
pub fn parse_timestamp(s: &str) -> Option<NaiveDateTime> {
    if let Ok(t) = DateTime::parse_from_rfc3339(s) {
        return Some(t.naive_utc());
    }
    for fmt in ["%Y-%m-%dT%H:%M:%S%.f", "%Y-%m-%d %H:%M:%S%.f", "%Y-%m-%dT%H:%M"] {
        if let Ok(t) = NaiveDateTime::parse_from_str(s, fmt) {
            return Some(t);
        }
    }
    NaiveDate::parse_from_str(s, "%Y-%m-%d")
        .ok()
        .and_then(|d| d.and_hms_opt(0, 0, 0))
}

/// Group records by case and order each case by timestamp, ties in file
/// order. Cases come out sorted by id.
pub fn traces(records: &[EventRecord]) -> Result<Vec<Trace>, LogError> {
    let mut cases: BTreeMap<&str, Vec<(NaiveDateTime, &str)>> = BTreeMap::new();
    for (i, r) in records.iter().enumerate() {
        let t = parse_timestamp(&r.timestamp).ok_or_else(|| LogError::Timestamp {
            row: i + 1,
            value: r.timestamp.clone(),
        })?;
        cases.entry(&r.case_id).or_default().push((t, &r.activity));
    }
    Ok(cases
        .into_iter()
        .map(|(id, mut events)| {
            events.sort_by_key(|e| e.0);
            Trace {
                case_id: id.to_owned(),
                activities: events.into_iter().map(|e| e.1.to_owned()).collect(),
            }
        })
        .collect())
}

/// Distinct activity sequences with their case counts, most frequent first.
pub fn variants(traces: &[Trace]) -> Vec<TraceVariant> {
    let mut counts: HashMap<&[String], usize> = HashMap::new();
    for t in traces {
        *counts.entry(&t.activities).or_default() += 1;
    }
    let mut out: Vec<TraceVariant> = counts
        .into_iter()
        .map(|(a, frequency)| TraceVariant {
            activities: a.to_vec(),
            frequency,
        })
        .collect();
    out.sort_by(|a, b| b.frequency.cmp(&a.frequency).then_with(|| a.activities.cmp(&b.activities)));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const LOG: &str = "case_id,activity,timestamp
c1,a,2024-01-01T10:00:00
c2,a,2024-01-01T09:00:00
c1,d,2024-01-01T10:05:00
c1,b,2024-01-01T10:01:00
c2,b,2024-01-01T09:01:00
c2,d,2024-01-01T09:02:00
c3,a,2024-01-02
c3,c,2024-01-02T00:00:01Z
";

    fn acts(s: &str) -> Vec<String> {
        s.chars().map(|c| c.to_string()).collect()
    }

    #[test]
    fn groups_sorts_and_counts() {
        let recs = read_log(LOG.as_bytes()).unwrap();
        let ts = traces(&recs).unwrap();
        assert_eq!(ts.len(), 3);
        assert_eq!(ts[0].activities, acts("abd"));
        let vs = variants(&ts);
        assert_eq!(
            vs,
            vec![
                TraceVariant { activities: acts("abd"), frequency: 2 },
                TraceVariant { activities: acts("ac"), frequency: 1 },
            ]
        );
        assert_eq!(vs.iter().map(|v| v.frequency).sum::<usize>(), ts.len());
    }

    #[test]
    fn ties_keep_file_order() {
        let log = "case_id,activity,timestamp\nx,b,2024-01-01\nx,a,2024-01-01\n";
        let ts = traces(&read_log(log.as_bytes()).unwrap()).unwrap();
        assert_eq!(ts[0].activities, acts("ba"));
    }

    #[test]
    fn bad_rows() {
        let log = "case_id,activity,timestamp\nx,a,yesterday\n";
        assert!(matches!(
            traces(&read_log(log.as_bytes()).unwrap()),
            Err(LogError::Timestamp { row: 1, .. })
        ));
        assert!(read_log("case,act\nx,a\n".as_bytes()).is_err());
        assert!(matches!(
            read_log("case_id,activity,timestamp\nx,,2024-01-01\n".as_bytes()),
            Err(LogError::EmptyActivity(1))
        ));
    }

    #[test]
    fn empty_log() {
        let recs = read_log("case_id,activity,timestamp\n".as_bytes()).unwrap();
        assert!(variants(&traces(&recs).unwrap()).is_empty());
    }

    #[test]
    fn offsets_are_normalized() {
        assert_eq!(
            parse_timestamp("2024-01-01T10:00:00+02:00"),
            parse_timestamp("2024-01-01T08:00:00")
        );
    }

    proptest! {
        #[test]
        fn shuffling_rows_keeps_variants(
            cases in proptest::collection::vec(proptest::collection::vec(0u8..4, 1..6), 1..8),
            seed in any::<u64>(),
        ) {
            let mut rows = Vec::new();
            for (c, acts) in cases.iter().enumerate() {
                for (k, a) in acts.iter().enumerate() {
                    rows.push(EventRecord {
                        case_id: format!("c{c}"),
                        activity: ((b'a' + a) as char).to_string(),
                        timestamp: format!("2024-01-01T00:{k:02}:00"),
                    });
                }
            }
            let before = variants(&traces(&rows).unwrap());
            use rand::seq::SliceRandom;
            use rand::SeedableRng;
            rows.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            let after_traces = traces(&rows).unwrap();
            prop_assert_eq!(&before, &variants(&after_traces));
            // idempotent: regrouping the grouped output changes nothing
            let flat: Vec<EventRecord> = after_traces
                .iter()
                .flat_map(|t| t.activities.iter().enumerate().map(move |(k, a)| EventRecord {
                    case_id: t.case_id.clone(),
                    activity: a.clone(),
                    timestamp: format!("2024-01-01T00:{k:02}:00"),
                }))
                .collect();
            prop_assert_eq!(traces(&flat).unwrap(), after_traces);
        }
    }
}
