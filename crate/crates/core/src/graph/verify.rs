use std::collections::HashSet;
use std::f64::consts::PI;
use std::fmt;

use super::{AttrValue, DspGraph, OpCode};

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    /// Position of the offending op in `graph.ops`.
    pub op_index: usize,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "op #{}: {}", self.op_index, self.message)
    }
}

/// Checks SSA order, opcode signatures and attribute ranges. Never stops at
/// the first problem; an empty list means the graph is well formed.
pub fn verify_graph(graph: &DspGraph) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut defined = HashSet::new();
    let mut input_names = HashSet::new();

    for (idx, op) in graph.ops.iter().enumerate() {
        let mut report = |message: String| {
            out.push(Violation {
                op_index: idx,
                message,
            })
        };
        let code = op.opcode;

        for v in &op.operands {
            if !defined.contains(v) {
                report(format!("SSA order: {v} used before definition"));
            }
        }
        if op.operands.len() != code.num_operands() {
            report(format!(
                "{code} takes {} operands, has {}",
                code.num_operands(),
                op.operands.len()
            ));
        }
        if op.results.len() != code.num_results() {
            report(format!(
                "{code} defines {} results, has {}",
                code.num_results(),
                op.results.len()
            ));
        }
        if !op.result_shapes.is_empty() && op.result_shapes.len() != op.results.len() {
            report(format!(
                "{code} has {} shapes for {} results",
                op.result_shapes.len(),
                op.results.len()
            ));
        }
        for s in &op.result_shapes {
            if s.len == 0 {
                report("zero-length tensor".into());
            }
            if s.dynamic && code != OpCode::RunLenEncoding {
                report(format!("dynamic shape produced by {code}"));
            }
        }
        for r in &op.results {
            if !defined.insert(*r) {
                report(format!("SSA: {r} defined more than once"));
            }
        }

        let schema = code.attr_schema();
        let names: Vec<&str> = op.attrs.iter().map(|a| a.name.as_str()).collect();
        let expected: Vec<&str> = schema.iter().map(|(n, _)| *n).collect();
        if names != expected {
            report(format!(
                "{code} attributes {names:?}, expected {expected:?}"
            ));
        } else {
            for (a, (_, kind)) in op.attrs.iter().zip(schema) {
                if a.value.kind() != *kind {
                    report(format!(
                        "attribute {} has kind {:?}, expected {kind:?}",
                        a.name,
                        a.value.kind()
                    ));
                }
            }
        }

        let int = |n| op.int_attr(n);
        let float = |n| op.float_attr(n);
        let mut range = |ok: bool, what: &str| {
            if !ok {
                out.push(Violation {
                    op_index: idx,
                    message: format!("{what} out of range"),
                });
            }
        };
        use OpCode::*;
        match code {
            Input => {
                if let Some(AttrValue::Str(name)) = op.attr("name") {
                    range(input_names.insert(name.clone()), "input name (duplicate)");
                }
            }
            Delay => range(int("k").is_some_and(|k| k >= 0), "k"),
            SlidingWindowAvg => range(int("window").is_some_and(|w| w >= 1), "window"),
            LowPassFirCoeffs | FilterHammOpt => {
                range(float("wc").is_some_and(|w| w > 0.0 && w < PI), "wc");
                let min_len = if code == FilterHammOpt { 2 } else { 1 };
                range(int("L").is_some_and(|l| l >= min_len), "L");
            }
            HammingWindow => range(int("L").is_some_and(|l| l >= 2), "L"),
            LmsFilter | LmsFilterGainOpt => {
                range(float("mu").is_some_and(|m| m > 0.0), "mu");
                range(int("M").is_some_and(|m| m >= 1), "M");
                if code == LmsFilterGainOpt {
                    range(float("G").is_some_and(f64::is_finite), "G");
                }
            }
            Gain => range(float("g").is_some_and(f64::is_finite), "g"),
            Threshold => range(float("t").is_some_and(|t| t >= 0.0), "t"),
            Quantize => {
                range(int("levels").is_some_and(|l| l >= 2), "levels");
                range(
                    matches!((float("min"), float("max")), (Some(lo), Some(hi)) if lo < hi),
                    "min/max",
                );
            }
            Upsample | Downsample => range(int("k").is_some_and(|k| k >= 1), "k"),
            SinVec | CosVec => {
                range(int("n").is_some_and(|n| n >= 1), "n");
                range(float("fs").is_some_and(|fs| fs > 0.0), "fs");
            }
            RangeVec => range(int("n").is_some_and(|n| n >= 1), "n"),
            ConstTensor => range(
                matches!(op.attr("values"), Some(AttrValue::Floats(v)) if !v.is_empty()),
                "values",
            ),
            _ => {}
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::parse_source;
    use crate::graph::{build_graph, Attribute};

    fn build(src: &str) -> DspGraph {
        build_graph(&parse_source(src).unwrap()).unwrap()
    }

    #[test]
    fn empty_graph_is_ok() {
        assert!(verify_graph(&DspGraph::default()).is_empty());
    }

    #[test]
    fn negative_delay() {
        let mut g = build("def main(x) { var y = delay(x, 1); }");
        g.ops[1].attrs = vec![Attribute::int("k", -1)];
        let v = verify_graph(&g);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].message, "k out of range");
    }

    #[test]
    fn use_before_def() {
        let mut g = build("def main(x) { var y = delay(x, 1); print(y); }");
        g.ops.swap(1, 2);
        let v = verify_graph(&g);
        assert!(
            v.iter().any(|v| v.message.starts_with("SSA order")),
            "{v:?}"
        );
    }

    #[test]
    fn attribute_ranges() {
        let g = build(
            "def main(x) { var a = lowPassFIRFilter(5, 3.5); var b = quantize(x, 1, 1, 0); \
             var c = lmsFilter(x, x, 0, 0); var d = hammingWindow(1); }",
        );
        let msgs: Vec<_> = verify_graph(&g).into_iter().map(|v| v.message).collect();
        for want in [
            "wc out of range",
            "levels out of range",
            "min/max out of range",
            "mu out of range",
            "M out of range",
            "L out of range",
        ] {
            assert!(msgs.iter().any(|m| m == want), "missing {want}: {msgs:?}");
        }
    }

    #[test]
    fn signature_mismatch() {
        let mut g = build("def main(x) { var y = reverse(x); }");
        let x = g.ops[0].results[0];
        g.ops[1].operands.push(x);
        g.ops[1].attrs.push(Attribute::int("k", 1));
        assert_eq!(verify_graph(&g).len(), 2);
    }
}
