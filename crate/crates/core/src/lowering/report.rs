use std::fmt;

use serde::Serialize;

use super::ExecCounters;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CounterRatio {
    pub before: u64,
    pub after: u64,
    /// `after / before`; 1 when both are zero, `None` when only `before` is.
    pub ratio: Option<f64>,
}

impl CounterRatio {
    fn new(before: u64, after: u64) -> Self {
        let ratio = match (before, after) {
            (0, 0) => Some(1.0),
            (0, _) => None,
            (b, a) => Some(a as f64 / b as f64),
        };
        CounterRatio {
            before,
            after,
            ratio,
        }
    }
}

/// Per-counter comparison of two runs on identical inputs. Fields serialize
/// in declaration order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CounterReport {
    pub loop_iterations: CounterRatio,
    pub loads: CounterRatio,
    pub stores: CounterRatio,
    pub mults: CounterRatio,
    pub adds: CounterRatio,
    pub divs: CounterRatio,
    pub trig_calls: CounterRatio,
    pub wall_time_ns: CounterRatio,
}

pub fn counters_report(before: &ExecCounters, after: &ExecCounters) -> CounterReport {
    CounterReport {
        loop_iterations: CounterRatio::new(before.loop_iterations, after.loop_iterations),
        loads: CounterRatio::new(before.loads, after.loads),
        stores: CounterRatio::new(before.stores, after.stores),
        mults: CounterRatio::new(before.mults, after.mults),
        adds: CounterRatio::new(before.adds, after.adds),
        divs: CounterRatio::new(before.divs, after.divs),
        trig_calls: CounterRatio::new(before.trig_calls, after.trig_calls),
        wall_time_ns: CounterRatio::new(before.wall_time_ns, after.wall_time_ns),
    }
}

impl CounterReport {
    pub fn rows(&self) -> [(&'static str, CounterRatio); 8] {
        [
            ("loop_iterations", self.loop_iterations),
            ("loads", self.loads),
            ("stores", self.stores),
            ("mults", self.mults),
            ("adds", self.adds),
            ("divs", self.divs),
            ("trig_calls", self.trig_calls),
            ("wall_time_ns", self.wall_time_ns),
        ]
    }
}

impl fmt::Display for CounterReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{:<16} {:>14} {:>14} {:>10}",
            "counter", "none", "dsp", "ratio"
        )?;
        for (name, r) in self.rows() {
            let ratio = r
                .ratio
                .map_or_else(|| "-".to_string(), |v| format!("{v:.4}"));
            writeln!(f, "{name:<16} {:>14} {:>14} {ratio:>10}", r.before, r.after)?;
        }
        Ok(())
    }
}
