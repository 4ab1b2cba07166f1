use std::collections::{BTreeMap, HashMap};

use thiserror::Error;

use super::*;
use crate::graph::{AttrValue, DspGraph, OpCode, OpNode, ValueId};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("input `{0}` is not bound")]
    MissingInput(String),
    #[error("{value} ({op}): {source}")]
    Kernel {
        op: OpCode,
        value: String,
        source: KernelError,
    },
    #[error("malformed op {op}: {detail}")]
    Malformed { op: OpCode, detail: String },
}

fn int(op: &OpNode, name: &str) -> Result<usize, EvalError> {
    match op.int_attr(name) {
        Some(v) if v >= 0 => Ok(v as usize),
        _ => Err(EvalError::Malformed {
            op: op.opcode,
            detail: format!("attribute {name}"),
        }),
    }
}

fn float(op: &OpNode, name: &str) -> Result<f64, EvalError> {
    op.float_attr(name).ok_or_else(|| EvalError::Malformed {
        op: op.opcode,
        detail: format!("attribute {name}"),
    })
}

fn eval_op(
    op: &OpNode,
    args: &[&Tensor],
    inputs: &BTreeMap<String, Tensor>,
) -> Result<Vec<Tensor>, EvalError> {
    use OpCode::*;
    let kernel = |e: KernelError| EvalError::Kernel {
        op: op.opcode,
        value: op.id().map_or_else(|| "print".into(), |v| v.to_string()),
        source: e,
    };
    let a = |i: usize| args[i].values();
    let one = |v: Vec<f64>| Ok(vec![Tensor::new(v)]);

    match op.opcode {
        Input => match op.attr("name") {
            Some(AttrValue::Str(name)) => inputs
                .get(name)
                .cloned()
                .map(|t| vec![t])
                .ok_or_else(|| EvalError::MissingInput(name.clone())),
            _ => Err(EvalError::Malformed {
                op: Input,
                detail: "missing name".into(),
            }),
        },
        ConstTensor => match op.attr("values") {
            Some(AttrValue::Floats(v)) => one(v.clone()),
            _ => Err(EvalError::Malformed {
                op: ConstTensor,
                detail: "missing values".into(),
            }),
        },
        Delay => one(k_delay(a(0), int(op, "k")?)),
        FirFilterResponse => one(k_fir_response(a(0), a(1))),
        Conv1DFull => one(k_conv1d_full(a(0), a(1))),
        SlidingWindowAvg => one(k_sliding_window_avg(a(0), int(op, "window")?)),
        Dft1DReal => one(k_dft_real(a(0))),
        Dft1DImag => one(k_dft_imag(a(0))),
        Idft1D => one(k_idft(a(0), a(1)).map_err(kernel)?),
        LowPassFirCoeffs => {
            one(k_lowpass_fir_coeffs(int(op, "L")?, float(op, "wc")?).map_err(kernel)?)
        }
        HammingWindow => one(k_hamming(int(op, "L")?).map_err(kernel)?),
        LmsFilter => {
            one(k_lms_filter(a(0), a(1), float(op, "mu")?, int(op, "M")?).map_err(kernel)?)
        }
        Add | Sub | Mul | Div => {
            let which = match op.opcode {
                Add => Elementwise::Add,
                Sub => Elementwise::Sub,
                Mul => Elementwise::Mul,
                _ => Elementwise::Div,
            };
            one(k_elementwise(which, a(0), a(1)).map_err(kernel)?)
        }
        Square => one(k_square(a(0))),
        Gain => one(k_gain(a(0), float(op, "g")?)),
        Reverse => one(k_reverse(a(0))),
        Sum => one(k_sum(a(0))),
        Threshold => one(k_threshold(a(0), float(op, "t")?)),
        Quantize => one(k_quantize(
            a(0),
            int(op, "levels")?,
            float(op, "min")?,
            float(op, "max")?,
        )
        .map_err(kernel)?),
        RunLenEncoding => Ok(vec![k_rle(a(0))]),
        Upsample => one(k_upsample(a(0), int(op, "k")?)),
        Downsample => one(k_downsample(a(0), int(op, "k")?)),
        SinVec => one(k_sin_vec(int(op, "n")?, float(op, "f")?, float(op, "fs")?)),
        CosVec => one(k_cos_vec(int(op, "n")?, float(op, "f")?, float(op, "fs")?)),
        RangeVec => one(k_range_vec(
            float(op, "start")?,
            float(op, "step")?,
            int(op, "n")?,
        )),
        Print => Ok(vec![]),
        FilterHammOpt => one(k_filter_hamm_opt(int(op, "L")?, float(op, "wc")?).map_err(kernel)?),
        FilterResSymmOpt => one(k_fir_symmetric(a(0), a(1))),
        FilterYSymmOpt => one(k_autocorr_symmetric(a(0))),
        Dft1DRealSymm => one(k_dft_real_symm(a(0))),
        Dft1DImagSymm => one(k_dft_imag_symm(a(0))),
        Dft1DFused => {
            let (re, im) = k_dft_fused(a(0));
            Ok(vec![Tensor::new(re), Tensor::new(im)])
        }
        LmsFilterGainOpt => {
            one(
                k_lms_filter_gain(a(0), a(1), float(op, "mu")?, int(op, "M")?, float(op, "G")?)
                    .map_err(kernel)?,
            )
        }
    }
}

/// Interprets the graph op by op with the reference kernels.
pub fn eval_graph(
    graph: &DspGraph,
    inputs: &BTreeMap<String, Tensor>,
) -> Result<HashMap<ValueId, Tensor>, EvalError> {
    let mut values: HashMap<ValueId, Tensor> = HashMap::new();
    for op in &graph.ops {
        let args: Vec<&Tensor> = op
            .operands
            .iter()
            .map(|v| {
                values.get(v).ok_or_else(|| EvalError::Malformed {
                    op: op.opcode,
                    detail: format!("operand {v} undefined"),
                })
            })
            .collect::<Result<_, _>>()?;
        let results = eval_op(op, &args, inputs)?;
        for (id, t) in op.results.iter().zip(results) {
            values.insert(*id, t);
        }
    }
    Ok(values)
}

/// The printed tensors of an evaluated graph, in program order.
pub fn printed_values(graph: &DspGraph, values: &HashMap<ValueId, Tensor>) -> Vec<Tensor> {
    graph
        .outputs()
        .iter()
        .filter_map(|v| values.get(v).cloned())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::parse_source;
    use crate::graph::build_graph;

    fn run(src: &str, inputs: &[(&str, Vec<f64>)]) -> Result<Vec<Tensor>, EvalError> {
        let g = build_graph(&parse_source(src).unwrap()).unwrap();
        let inputs = inputs
            .iter()
            .map(|(n, v)| (n.to_string(), Tensor::new(v.clone())))
            .collect();
        let values = eval_graph(&g, &inputs)?;
        Ok(printed_values(&g, &values))
    }

    #[test]
    fn constant_print() {
        let out = run("def main() { print([1, 2, 3]); }", &[]).unwrap();
        assert_eq!(out, vec![Tensor::new(vec![1.0, 2.0, 3.0])]);
    }

    #[test]
    fn precedence_evaluates_to_seven() {
        let out = run(
            "def main(x) { print(x * 0 + 1 + 2 * 3); }",
            &[("x", vec![5.0])],
        )
        .unwrap();
        assert_eq!(out[0].values(), &[7.0]);
    }

    #[test]
    fn energy_chain_by_hand() {
        let src = "def main(x) { var re = dft1dreal(x); var im = dft1dimg(x); \
                   print(sum(square(re) + square(im)) / 2); }";
        let out = run(src, &[("x", vec![1.0, 2.0])]).unwrap();
        assert!((out[0].values()[0] - 5.0).abs() < 1e-12);
    }

    #[test]
    fn errors_carry_op() {
        let err = run("def main(x) { print(x / 0); }", &[("x", vec![1.0])]).unwrap_err();
        assert!(matches!(
            err,
            EvalError::Kernel {
                op: OpCode::Div,
                source: KernelError::DivisionByZero { index: 0 },
                ..
            }
        ));
        assert_eq!(
            run("def main(x) { print(x); }", &[]),
            Err(EvalError::MissingInput("x".into()))
        );
    }
}
