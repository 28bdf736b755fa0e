use std::fmt::Write;

use fmcc_core::Alignment;

/// Outcome of checking one trace variant.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceResult {
    pub trace: Vec<String>,
    pub frequency: usize,
    /// The alignment, or why the check was aborted.
    pub outcome: Result<Alignment, String>,
    /// Wall clock around the check.
    pub seconds: f64,
}

impl TraceResult {
    /// Seconds per query symbol; the separator counts as one.
    pub fn per_symbol(&self) -> f64 {
        self.seconds / (self.trace.len() + 1) as f64
    }

    pub fn cost(&self) -> Option<usize> {
        self.outcome.as_ref().ok().map(|a| a.cost)
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Report {
    pub results: Vec<TraceResult>,
}

impl Report {
    /// Number of traces (cases), counting every variant by its frequency.
    pub fn traces(&self) -> usize {
        self.results.iter().map(|r| r.frequency).sum()
    }

    /// Log moves summed over all traces that were not aborted.
    pub fn total_cost(&self) -> usize {
        self.results
            .iter()
            .filter_map(|r| r.cost().map(|c| c * r.frequency))
            .sum()
    }

    pub fn aborted(&self) -> usize {
        self.results.iter().filter(|r| r.outcome.is_err()).count()
    }

    pub fn render(&self, timing: bool) -> String {
        let mut out = String::new();
        for (i, r) in self.results.iter().enumerate() {
            let _ = write!(out, "#{} x{} ", i + 1, r.frequency);
            match &r.outcome {
                Ok(al) => {
                    let _ = write!(out, "cost {}: {al}", al.cost);
                }
                Err(reason) => {
                    let _ = write!(out, "aborted: {reason}");
                }
            }
            if timing {
                let _ = write!(out, " ({:.3} ms/symbol)", r.per_symbol() * 1e3);
            }
            out.push('\n');
        }
        let _ = writeln!(
            out,
            "{} traces, {} variants, total cost {}, {} aborted",
            self.traces(),
            self.results.len(),
            self.total_cost(),
            self.aborted()
        );
        out
    }
}
