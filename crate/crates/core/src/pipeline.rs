//! Source text to executable loop program, stage by stage.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::frontend::{parse_source, AstModule, FrontendError};
use crate::graph::{
    build_graph, infer_shapes, verify_graph, DspGraph, GraphError, InputLengths, Violation,
};
use crate::kernels::{EvalError, Tensor};
use crate::lowering::{
    evaluate_loop_ir, lower_graph, ExecError, Execution, LoopProgram, LoweringError,
};
use crate::rewrite::{apply_dsp_patterns, PatternSet, RewriteError, RewriteStats};
use crate::synth;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Frontend(#[from] FrontendError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("verification failed: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    Verify(Vec<Violation>),
    #[error(transparent)]
    Rewrite(#[from] RewriteError),
    #[error(transparent)]
    Lowering(#[from] LoweringError),
    #[error(transparent)]
    Exec(#[from] ExecError),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

impl PipelineError {
    /// Process exit code: 2 for lex/parse errors, 3 for graph construction
    /// and verification, 4 for runtime failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Frontend(_) => 2,
            PipelineError::Exec(_) | PipelineError::Eval(_) => 4,
            _ => 3,
        }
    }
}

pub fn parse(source: &str) -> Result<AstModule, PipelineError> {
    Ok(parse_source(source)?)
}

/// Builds and verifies the graph; with `lengths` it is also shape-inferred.
pub fn build(ast: &AstModule, lengths: Option<&InputLengths>) -> Result<DspGraph, PipelineError> {
    let mut g = build_graph(ast)?;
    let violations = verify_graph(&g);
    if !violations.is_empty() {
        return Err(PipelineError::Verify(violations));
    }
    if let Some(lengths) = lengths {
        g.bind_input_lengths(lengths);
        g = infer_shapes(&g)?;
    }
    Ok(g)
}

#[derive(Debug, Clone)]
pub struct Compiled {
    /// Shape-inferred graph straight from the source.
    pub graph: DspGraph,
    /// The graph after rewriting; equal to `graph` when no patterns ran.
    pub optimized: DspGraph,
    pub stats: Option<RewriteStats>,
    pub program: LoopProgram,
}

impl Compiled {
    pub fn run(&self, inputs: &BTreeMap<String, Tensor>) -> Result<Execution, PipelineError> {
        Ok(evaluate_loop_ir(&self.program, inputs)?)
    }
}

/// Full compilation. `patterns` of `None` skips rewriting.
pub fn compile(
    source: &str,
    lengths: &InputLengths,
    patterns: Option<&PatternSet>,
) -> Result<Compiled, PipelineError> {
    let graph = build(&parse(source)?, Some(lengths))?;
    let (optimized, stats) = match patterns {
        Some(p) => {
            let (g, s) = apply_dsp_patterns(&graph, p)?;
            (g, Some(s))
        }
        None => (graph.clone(), None),
    };
    let program = lower_graph(&optimized)?;
    Ok(Compiled {
        graph,
        optimized,
        stats,
        program,
    })
}

/// Noise for every named input of `graph`. Input `i` (in declaration order)
/// uses seed `seed + i`.
pub fn synth_inputs(
    graph: &DspGraph,
    lengths: &InputLengths,
    seed: u64,
) -> BTreeMap<String, Tensor> {
    graph
        .inputs()
        .into_iter()
        .enumerate()
        .filter_map(|(i, (name, _))| {
            let n = *lengths.get(&name)?;
            Some((
                name,
                Tensor::new(synth::noise(n, seed.wrapping_add(i as u64))),
            ))
        })
        .collect()
}

/// Largest relative difference between two output lists, with
/// `|a-b| / max(|a|, |b|, 1e-3)` per element, so that a value of at most
/// 1e-9 means every element is within 1e-9 relative or 1e-12 absolute.
/// Mismatched shapes give infinity.
pub fn max_rel_deviation(a: &[Tensor], b: &[Tensor]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    let mut worst: f64 = 0.0;
    for (ta, tb) in a.iter().zip(b) {
        if ta.len() != tb.len() {
            return f64::INFINITY;
        }
        for (x, y) in ta.values().iter().zip(tb.values()) {
            if x == y {
                continue;
            }
            let d = (x - y).abs() / x.abs().max(y.abs()).max(1e-3);
            if d.is_nan() {
                return f64::INFINITY;
            }
            worst = worst.max(d);
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        let e = compile("def main( {", &InputLengths::new(), None).unwrap_err();
        assert_eq!(e.exit_code(), 2);
        let e = compile(
            "def main(x) { print(delay(x, -1)); }",
            &[("x".into(), 4)].into(),
            None,
        )
        .unwrap_err();
        assert!(matches!(e, PipelineError::Verify(_)));
        assert_eq!(e.exit_code(), 3);
        let e = compile("def main(x) { print(x); }", &InputLengths::new(), None).unwrap_err();
        assert_eq!(e.exit_code(), 3);
    }

    #[test]
    fn deviation_metric() {
        let t = |v: &[f64]| vec![Tensor::new(v.to_vec())];
        assert_eq!(max_rel_deviation(&t(&[1.0, 2.0]), &t(&[1.0, 2.0])), 0.0);
        let d = max_rel_deviation(&t(&[1.0]), &t(&[1.0 + 1e-10]));
        assert!(d > 0.0 && d <= 1e-9);
        assert!(max_rel_deviation(&t(&[1e-13]), &t(&[0.0])) <= 1e-9);
        assert!(max_rel_deviation(&t(&[1e-11]), &t(&[0.0])) > 1e-9);
        assert_eq!(
            max_rel_deviation(&t(&[1.0]), &t(&[1.0, 2.0])),
            f64::INFINITY
        );
    }

    #[test]
    fn synthesized_inputs_follow_lengths() {
        let g = build(&parse("def main(x, d) { print(x + d); }").unwrap(), None).unwrap();
        let lengths: InputLengths = [("x".into(), 4), ("d".into(), 4)].into();
        let ins = synth_inputs(&g, &lengths, 10);
        assert_eq!(ins["x"].values(), synth::noise(4, 10).as_slice());
        assert_eq!(ins["d"].values(), synth::noise(4, 11).as_slice());
    }
}
