use std::collections::{BTreeMap, HashMap};

use super::{AttrValue, DspGraph, GraphError, OpCode, OpNode, TensorShape, ValueId};

/// Input name to signal length.
pub type InputLengths = BTreeMap<String, usize>;

fn mismatch(op: &OpNode, detail: impl Into<String>) -> GraphError {
    GraphError::ShapeMismatch {
        op: op.opcode,
        value: op
            .id()
            .map_or_else(|| "print".to_string(), |v| v.to_string()),
        detail: detail.into(),
    }
}

fn positive(op: &OpNode, name: &str) -> Result<usize, GraphError> {
    match op.int_attr(name) {
        Some(v) if v >= 1 => Ok(v as usize),
        Some(v) => Err(mismatch(op, format!("{name} = {v} must be at least 1"))),
        None => Err(mismatch(op, format!("missing integer attribute {name}"))),
    }
}

fn result_shapes(op: &OpNode, ins: &[TensorShape]) -> Result<Vec<TensorShape>, GraphError> {
    use OpCode::*;

    if op.opcode != Print && ins.iter().any(|s| s.dynamic) {
        return Err(mismatch(
            op,
            "run-length encoded tensors can only be printed",
        ));
    }
    let same = |a: TensorShape, b: TensorShape| -> Result<(), GraphError> {
        if a.len == b.len {
            Ok(())
        } else {
            Err(mismatch(
                op,
                format!("operand lengths {} and {} differ", a.len, b.len),
            ))
        }
    };
    let fixed = |n: usize| Ok(vec![TensorShape::fixed(n)]);

    match op.opcode {
        Input => match op.result_shapes.first() {
            Some(s) => Ok(vec![*s]),
            None => Err(GraphError::UnboundInput {
                name: match op.attr("name") {
                    Some(AttrValue::Str(n)) => n.clone(),
                    _ => "?".into(),
                },
            }),
        },
        ConstTensor => match op.attr("values") {
            Some(AttrValue::Floats(v)) if !v.is_empty() => fixed(v.len()),
            _ => Err(mismatch(op, "const_tensor needs a non-empty values list")),
        },
        Delay | FirFilterResponse | SlidingWindowAvg | Dft1DReal | Dft1DImag | Square | Gain
        | Reverse | Threshold | Quantize | FilterResSymmOpt | Dft1DRealSymm | Dft1DImagSymm => {
            fixed(ins[0].len)
        }
        Conv1DFull => fixed(ins[0].len + ins[1].len - 1),
        FilterYSymmOpt => fixed(2 * ins[0].len - 1),
        Idft1D => {
            same(ins[0], ins[1])?;
            fixed(ins[0].len)
        }
        LowPassFirCoeffs | HammingWindow | FilterHammOpt => fixed(positive(op, "L")?),
        LmsFilter | LmsFilterGainOpt => {
            same(ins[0], ins[1])?;
            fixed(positive(op, "M")?)
        }
        Add | Sub | Mul | Div => {
            let (a, b) = (ins[0], ins[1]);
            if a.len == b.len || b.len == 1 {
                fixed(a.len)
            } else if a.len == 1 {
                fixed(b.len)
            } else {
                Err(mismatch(
                    op,
                    format!("operand lengths {} and {} differ", a.len, b.len),
                ))
            }
        }
        Sum => fixed(1),
        RunLenEncoding => Ok(vec![TensorShape {
            len: 2 * ins[0].len,
            dynamic: true,
        }]),
        Upsample => fixed(ins[0].len * positive(op, "k")?),
        Downsample => fixed(ins[0].len.div_ceil(positive(op, "k")?)),
        SinVec | CosVec | RangeVec => fixed(positive(op, "n")?),
        Print => Ok(vec![]),
        Dft1DFused => Ok(vec![TensorShape::fixed(ins[0].len); 2]),
    }
}

/// Fills `result_shapes` for every op. Input ops must already carry their
/// shape (see [`DspGraph::bind_input_lengths`]).
pub fn infer_shapes(graph: &DspGraph) -> Result<DspGraph, GraphError> {
    let mut out = graph.clone();
    let mut known: HashMap<ValueId, TensorShape> = HashMap::new();
    for op in &mut out.ops {
        let mut ins = Vec::with_capacity(op.operands.len());
        for v in &op.operands {
            match known.get(v) {
                Some(s) => ins.push(*s),
                None => return Err(mismatch(op, format!("operand {v} has no known shape"))),
            }
        }
        if ins.len() != op.opcode.num_operands() {
            return Err(mismatch(
                op,
                format!(
                    "expected {} operands, got {}",
                    op.opcode.num_operands(),
                    ins.len()
                ),
            ));
        }
        let shapes = result_shapes(op, &ins)?;
        for (r, s) in op.results.iter().zip(&shapes) {
            known.insert(*r, *s);
        }
        op.result_shapes = shapes;
    }
    Ok(out)
}
