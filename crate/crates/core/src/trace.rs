use serde::Serialize;

/// One checkpoint of a run (an epoch for the epoch solvers, a gap checkpoint
/// for the baseline).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TraceRow {
    pub epoch: usize,
    pub iters_cumulative: u64,
    pub gap: Option<f64>,
    pub near_stationarity: Option<f64>,
    pub radius: Option<f64>,
    pub eta_x: f64,
    pub eta_y: f64,
    pub wallclock_ns: u64,
    /// `P(x)` at the recorded point, when the solver computes it. Not part of
    /// the CSV trace format.
    #[serde(skip)]
    pub primal_value: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Trace {
    pub rows: Vec<TraceRow>,
}

impl Trace {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, row: TraceRow) {
        self.rows.push(row);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn last(&self) -> Option<&TraceRow> {
        self.rows.last()
    }

    /// Final gap, if the last row recorded one.
    pub fn final_gap(&self) -> Option<f64> {
        self.rows.last().and_then(|r| r.gap)
    }

    pub fn total_iterations(&self) -> u64 {
        self.rows.last().map_or(0, |r| r.iters_cumulative)
    }

    /// Sets every wallclock entry to zero, for byte-stable output.
    pub fn zero_wallclock(&mut self) {
        self.rows.iter_mut().for_each(|r| r.wallclock_ns = 0);
    }
}
