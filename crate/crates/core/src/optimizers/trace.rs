use std::fmt;

use crate::games::Point;

/// Run termination status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunFlag {
    Ok,
    /// `‖x‖ > 10¹²` or a non-finite entry; the run stopped early.
    Diverged,
}

impl RunFlag {
    pub fn as_str(self) -> &'static str {
        match self {
            RunFlag::Ok => "OK",
            RunFlag::Diverged => "DIVERGED",
        }
    }
}

impl fmt::Display for RunFlag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Metrics of one recorded iterate. Monitoring evaluations are not charged to
/// `samples_seen`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRecord {
    pub k: u64,
    pub samples_seen: u64,
    /// `‖x^k − x*‖²`, or the monitor's custom distance; NaN when neither is known.
    pub dist: f64,
    /// `H(x^k)`
    pub h: f64,
    /// Step-size used to leave `x^k` (the last one used, for a final record).
    pub gamma: f64,
    pub diverged: bool,
}

#[derive(Debug, Clone)]
pub struct Trace {
    pub records: Vec<TraceRecord>,
    pub flag: RunFlag,
    /// Iterate when the run stopped.
    pub last: Point,
    /// Algorithm output: the last iterate, or the Option-II random iterate.
    pub output: Point,
    pub iterations: u64,
    pub samples_seen: u64,
    /// Number of snapshot refreshes (variance-reduced methods).
    pub snapshot_refreshes: u64,
}

impl Trace {
    pub fn first(&self) -> &TraceRecord {
        &self.records[0]
    }

    pub fn final_record(&self) -> &TraceRecord {
        self.records
            .last()
            .expect("a trace always holds the k = 0 record")
    }

    pub fn mean_cost_per_iteration(&self) -> f64 {
        if self.iterations == 0 {
            0.0
        } else {
            self.samples_seen as f64 / self.iterations as f64
        }
    }
}
