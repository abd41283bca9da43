use serde::{Deserialize, Serialize};

/// DRAM-controller counter that requests the next chunk of rows while the
/// current one is still being consumed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrefetchCounter {
    pub remaining_rows: u64,
    pub threshold: u64,
    pub requests_issued: u64,
    /// Rows consumed in the current round when the last request went out.
    pub last_request_at: Option<u64>,
    #[serde(skip)]
    armed: bool,
    #[serde(skip)]
    consumed: u64,
}

/// Rows of lead time needed to hide a DRAM fetch plus the storage-to-compute
/// transfer.
pub fn prefetch_threshold(t_dram_ns: f64, storage_to_compute_ns: f64, cycle_ns: f64) -> u64 {
    ((t_dram_ns + storage_to_compute_ns) / cycle_ns).ceil() as u64
}

impl PrefetchCounter {
    /// A counter for one round of `rows`. A request is due immediately when
    /// the round is already shorter than the lead time.
    pub fn new(rows: u64, threshold: u64) -> Self {
        let mut c = Self {
            remaining_rows: rows,
            threshold,
            requests_issued: 0,
            armed: threshold > 0,
            consumed: 0,
            last_request_at: None,
        };
        c.check();
        c
    }

    fn check(&mut self) {
        if self.armed && self.remaining_rows <= self.threshold {
            self.armed = false;
            self.requests_issued += 1;
            self.last_request_at = Some(self.consumed);
        }
    }

    /// Consumes rows one at a time so a crossing is caught at the exact row.
    pub fn step(&mut self, rows_consumed: u64) {
        assert!(rows_consumed <= self.remaining_rows, "consumed more rows than remain");
        for _ in 0..rows_consumed {
            self.remaining_rows -= 1;
            self.consumed += 1;
            self.check();
        }
    }

    /// Starts the next round with `rows` rows.
    pub fn rearm(&mut self, rows: u64) {
        self.remaining_rows = rows;
        self.consumed = 0;
        self.armed = self.threshold > 0;
        self.check();
    }
}

pub fn prefetch_step(mut counter: PrefetchCounter, rows_consumed: u64) -> PrefetchCounter {
    counter.step(rows_consumed);
    counter
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_threshold() {
        assert_eq!(prefetch_threshold(20.0, 100.0, 5.0), 24);
    }

    #[test]
    fn issues_at_threshold() {
        let c = prefetch_step(PrefetchCounter::new(50, 24), 26);
        assert_eq!(c.requests_issued, 1);
        assert_eq!(c.last_request_at, Some(26));
        assert_eq!(c.remaining_rows, 24);
        let c = prefetch_step(c, 24);
        assert_eq!(c.requests_issued, 1);
        let c = prefetch_step(PrefetchCounter::new(50, 24), 25);
        assert_eq!(c.requests_issued, 0);
    }

    #[test]
    fn zero_threshold_never_fires() {
        let c = prefetch_step(PrefetchCounter::new(50, 0), 50);
        assert_eq!(c.requests_issued, 0);
    }

    #[test]
    fn short_round_fires_immediately() {
        let c = PrefetchCounter::new(10, 24);
        assert_eq!(c.requests_issued, 1);
        assert_eq!(c.last_request_at, Some(0));
        let mut c = prefetch_step(c, 10);
        assert_eq!(c.requests_issued, 1);
        c.rearm(100);
        c.step(76);
        assert_eq!(c.requests_issued, 2);
    }
}
