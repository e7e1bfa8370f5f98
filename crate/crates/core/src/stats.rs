//! Residual accumulation with deterministic merging.

use crate::consts::SCALE_FLOOR;

/// Running summary of residual magnitudes over a batch of checks.
///
/// `max_rel` divides each residual by the magnitude of the terms entering the
/// identity (floored at [`SCALE_FLOOR`]) so that checks on large or small data
/// report comparable numbers.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ResidualStats {
    pub max_abs: f64,
    pub sum_abs: f64,
    pub max_rel: f64,
    pub count: u64,
}

impl ResidualStats {
    pub fn new() -> Self {
        Self::default()
    }

    /// Record one residual; `scale` is the typical magnitude of the terms that
    /// were subtracted to produce it.
    pub fn record(&mut self, residual: f64, scale: f64) {
        let r = residual.abs();
        self.max_abs = self.max_abs.max(r);
        self.sum_abs += r;
        self.max_rel = self.max_rel.max(r / scale.abs().max(SCALE_FLOOR));
        self.count += 1;
    }

    /// Record an absolute residual with unit scale.
    pub fn record_abs(&mut self, residual: f64) {
        self.record(residual, 1.0);
    }

    /// Fold another summary into this one. Merging is order-independent for
    /// `max_*` and `count`; `sum_abs` is order-dependent only at rounding level,
    /// so callers that need bit-stable reports must merge in a fixed order.
    pub fn merge(&mut self, other: &ResidualStats) {
        self.max_abs = self.max_abs.max(other.max_abs);
        self.sum_abs += other.sum_abs;
        self.max_rel = self.max_rel.max(other.max_rel);
        self.count += other.count;
    }

    pub fn mean_abs(&self) -> f64 {
        if self.count == 0 {
            0.0
        } else {
            self.sum_abs / self.count as f64
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn records_and_merges() {
        let mut a = ResidualStats::new();
        a.record(1e-12, 2.0);
        a.record(-3e-11, 0.5);
        let mut b = ResidualStats::new();
        b.record(2e-11, 1.0);
        a.merge(&b);
        assert_eq!(a.count, 3);
        assert!((a.max_abs - 3e-11).abs() < 1e-25);
        assert!((a.mean_abs() - (1e-12 + 3e-11 + 2e-11) / 3.0).abs() < 1e-25);
        // 3e-11 against scale 0.5 dominates the relative residual.
        assert!((a.max_rel - 6e-11).abs() < 1e-24);
    }

    #[test]
    fn scale_floor_guards_small_denominators() {
        let mut s = ResidualStats::new();
        s.record(1e-9, 1e-300);
        assert!((s.max_rel - 1e-9 / SCALE_FLOOR).abs() < 1e-18);
    }
}
