//! The DSP operation graph: a straight-line SSA list of DSP-level ops.
//!
//! Ops are stored in topological order. Each op defines zero (`print`), one,
//! or two (`dft1d_fused`) consecutive [`ValueId`]s. Compile-time scalars such
//! as delay amounts, cutoffs and step sizes live in attributes; tensors flow
//! through operands.

mod build;
mod shape;
mod text;
mod verify;

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

use crate::frontend::SourceSpan;

pub use build::build_graph;
pub use shape::{infer_shapes, InputLengths};
pub use text::{graph_to_text, op_to_text, parse_graph_text};
pub use verify::{verify_graph, Violation};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ValueId(pub u32);

impl fmt::Display for ValueId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "%{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AttrKind {
    Int,
    Float,
    Floats,
    Str,
}

#[derive(Debug, Clone, PartialEq)]
pub enum AttrValue {
    Int(i64),
    Float(f64),
    Floats(Vec<f64>),
    Str(String),
}

impl AttrValue {
    pub fn kind(&self) -> AttrKind {
        match self {
            AttrValue::Int(_) => AttrKind::Int,
            AttrValue::Float(_) => AttrKind::Float,
            AttrValue::Floats(_) => AttrKind::Floats,
            AttrValue::Str(_) => AttrKind::Str,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Attribute {
    pub name: String,
    pub value: AttrValue,
}

impl Attribute {
    pub fn int(name: &str, v: i64) -> Self {
        Attribute {
            name: name.into(),
            value: AttrValue::Int(v),
        }
    }

    pub fn float(name: &str, v: f64) -> Self {
        Attribute {
            name: name.into(),
            value: AttrValue::Float(v),
        }
    }
}

/// Length of a one-dimensional tensor. `dynamic` marks run-length encoded
/// results, whose `len` is the buffer capacity and whose logical length is
/// only known at run time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TensorShape {
    pub len: usize,
    pub dynamic: bool,
}

impl TensorShape {
    pub fn fixed(len: usize) -> Self {
        TensorShape {
            len,
            dynamic: false,
        }
    }
}

impl fmt::Display for TensorShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.dynamic {
            write!(f, "tensor<?{}>", self.len)
        } else {
            write!(f, "tensor<{}>", self.len)
        }
    }
}

macro_rules! opcodes {
    ($( $variant:ident => $text:literal, $operands:literal, $results:literal, [$($attr:literal : $kind:ident),*]; )*) => {
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
        pub enum OpCode {
            $($variant),*
        }

        impl OpCode {
            pub const ALL: &'static [OpCode] = &[$(OpCode::$variant),*];

            /// Name used in the graph text format.
            pub fn name(self) -> &'static str {
                match self {
                    $(OpCode::$variant => $text),*
                }
            }

            pub fn from_name(name: &str) -> Option<OpCode> {
                match name {
                    $($text => Some(OpCode::$variant),)*
                    _ => None,
                }
            }

            pub fn num_operands(self) -> usize {
                match self {
                    $(OpCode::$variant => $operands),*
                }
            }

            pub fn num_results(self) -> usize {
                match self {
                    $(OpCode::$variant => $results),*
                }
            }

            /// Attribute names and kinds, in declaration order.
            pub fn attr_schema(self) -> &'static [(&'static str, AttrKind)] {
                match self {
                    $(OpCode::$variant => &[$(($attr, AttrKind::$kind)),*]),*
                }
            }
        }
    };
}

opcodes! {
    Input => "input", 0, 1, ["name": Str];
    ConstTensor => "const_tensor", 0, 1, ["values": Floats];
    Delay => "delay", 1, 1, ["k": Int];
    FirFilterResponse => "fir_filter_response", 2, 1, [];
    Conv1DFull => "conv1d_full", 2, 1, [];
    SlidingWindowAvg => "sliding_window_avg", 1, 1, ["window": Int];
    Dft1DReal => "dft1d_real", 1, 1, [];
    Dft1DImag => "dft1d_imag", 1, 1, [];
    Idft1D => "idft1d", 2, 1, [];
    LowPassFirCoeffs => "low_pass_fir_coeffs", 0, 1, ["L": Int, "wc": Float];
    HammingWindow => "hamming_window", 0, 1, ["L": Int];
    LmsFilter => "lms_filter", 2, 1, ["mu": Float, "M": Int];
    Add => "add", 2, 1, [];
    Sub => "sub", 2, 1, [];
    Mul => "mul", 2, 1, [];
    Div => "div", 2, 1, [];
    Square => "square", 1, 1, [];
    Gain => "gain", 1, 1, ["g": Float];
    Reverse => "reverse", 1, 1, [];
    Sum => "sum", 1, 1, [];
    Threshold => "threshold", 1, 1, ["t": Float];
    Quantize => "quantize", 1, 1, ["levels": Int, "min": Float, "max": Float];
    RunLenEncoding => "run_len_encoding", 1, 1, [];
    Upsample => "upsample", 1, 1, ["k": Int];
    Downsample => "downsample", 1, 1, ["k": Int];
    SinVec => "sin_vec", 0, 1, ["n": Int, "f": Float, "fs": Float];
    CosVec => "cos_vec", 0, 1, ["n": Int, "f": Float, "fs": Float];
    RangeVec => "range_vec", 0, 1, ["start": Float, "step": Float, "n": Int];
    Print => "print", 1, 0, [];
    FilterHammOpt => "filter_hamm_opt", 0, 1, ["L": Int, "wc": Float];
    FilterResSymmOpt => "filter_res_symm_opt", 2, 1, [];
    FilterYSymmOpt => "filter_y_symm_opt", 1, 1, [];
    Dft1DRealSymm => "dft1d_real_symm", 1, 1, [];
    Dft1DImagSymm => "dft1d_imag_symm", 1, 1, [];
    Dft1DFused => "dft1d_fused", 1, 2, [];
    LmsFilterGainOpt => "lms_filter_gain_opt", 2, 1, ["mu": Float, "M": Int, "G": Float];
}

impl OpCode {
    /// Opcodes that only the rewriter introduces.
    pub fn is_rewriter_created(self) -> bool {
        matches!(
            self,
            OpCode::FilterHammOpt
                | OpCode::FilterResSymmOpt
                | OpCode::FilterYSymmOpt
                | OpCode::Dft1DRealSymm
                | OpCode::Dft1DImagSymm
                | OpCode::Dft1DFused
                | OpCode::LmsFilterGainOpt
        )
    }

    /// Maps a DSL call name to its opcode.
    pub fn from_builtin(name: &str) -> Option<OpCode> {
        Some(match name {
            "delay" => OpCode::Delay,
            "firFilterResponse" => OpCode::FirFilterResponse,
            "conv1d" => OpCode::Conv1DFull,
            "slidingWindowAvg" => OpCode::SlidingWindowAvg,
            "dft1dreal" => OpCode::Dft1DReal,
            "dft1dimg" => OpCode::Dft1DImag,
            "idft1d" => OpCode::Idft1D,
            "lowPassFIRFilter" => OpCode::LowPassFirCoeffs,
            "hammingWindow" => OpCode::HammingWindow,
            "lmsFilter" => OpCode::LmsFilter,
            "gain" => OpCode::Gain,
            "reverse" => OpCode::Reverse,
            "square" => OpCode::Square,
            "sum" => OpCode::Sum,
            "threshold" => OpCode::Threshold,
            "quantize" => OpCode::Quantize,
            "runLenEncoding" => OpCode::RunLenEncoding,
            "upsample" => OpCode::Upsample,
            "downsample" => OpCode::Downsample,
            "sinVec" => OpCode::SinVec,
            "cosVec" => OpCode::CosVec,
            "rangeVec" => OpCode::RangeVec,
            "print" => OpCode::Print,
            _ => return None,
        })
    }

    pub fn is_elementwise_binary(self) -> bool {
        matches!(self, OpCode::Add | OpCode::Sub | OpCode::Mul | OpCode::Div)
    }
}

impl fmt::Display for OpCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OpNode {
    /// Defined values; empty for `print`, two for `dft1d_fused`.
    pub results: Vec<ValueId>,
    pub opcode: OpCode,
    pub operands: Vec<ValueId>,
    pub attrs: Vec<Attribute>,
    /// Filled by [`infer_shapes`]; parallel to `results`.
    pub result_shapes: Vec<TensorShape>,
}

impl OpNode {
    /// The first result, if any.
    pub fn id(&self) -> Option<ValueId> {
        self.results.first().copied()
    }

    pub fn attr(&self, name: &str) -> Option<&AttrValue> {
        self.attrs.iter().find(|a| a.name == name).map(|a| &a.value)
    }

    pub fn int_attr(&self, name: &str) -> Option<i64> {
        match self.attr(name)? {
            AttrValue::Int(v) => Some(*v),
            _ => None,
        }
    }

    pub fn float_attr(&self, name: &str) -> Option<f64> {
        match self.attr(name)? {
            AttrValue::Float(v) => Some(*v),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct DspGraph {
    pub ops: Vec<OpNode>,
}

impl DspGraph {
    /// Named inputs in declaration order.
    pub fn inputs(&self) -> Vec<(String, ValueId)> {
        self.ops
            .iter()
            .filter(|op| op.opcode == OpCode::Input)
            .filter_map(|op| match op.attr("name") {
                Some(AttrValue::Str(name)) => Some((name.clone(), op.results[0])),
                _ => None,
            })
            .collect()
    }

    /// Values consumed by `print` ops, in program order.
    pub fn outputs(&self) -> Vec<ValueId> {
        self.ops
            .iter()
            .filter(|op| op.opcode == OpCode::Print)
            .flat_map(|op| op.operands.iter().copied())
            .collect()
    }

    pub fn next_id(&self) -> u32 {
        self.ops
            .iter()
            .flat_map(|op| op.results.iter())
            .map(|v| v.0 + 1)
            .max()
            .unwrap_or(0)
    }

    /// Index of the op defining `value`.
    pub fn def_index(&self, value: ValueId) -> Option<usize> {
        self.ops.iter().position(|op| op.results.contains(&value))
    }

    pub fn producer(&self, value: ValueId) -> Option<&OpNode> {
        self.def_index(value).map(|i| &self.ops[i])
    }

    pub fn shape_of(&self, value: ValueId) -> Option<TensorShape> {
        let op = self.producer(value)?;
        let slot = op.results.iter().position(|r| *r == value)?;
        op.result_shapes.get(slot).copied()
    }

    pub fn use_counts(&self) -> HashMap<ValueId, usize> {
        let mut uses = HashMap::new();
        for op in &self.ops {
            for v in &op.operands {
                *uses.entry(*v).or_insert(0) += 1;
            }
        }
        uses
    }

    pub fn count(&self, opcode: OpCode) -> usize {
        self.ops.iter().filter(|op| op.opcode == opcode).count()
    }

    /// Sets the shape of each named input. Unknown names are ignored.
    pub fn bind_input_lengths(&mut self, lengths: &InputLengths) {
        for op in &mut self.ops {
            if op.opcode != OpCode::Input {
                continue;
            }
            if let Some(AttrValue::Str(name)) = op.attr("name") {
                if let Some(len) = lengths.get(name.as_str()) {
                    op.result_shapes = vec![TensorShape::fixed(*len)];
                }
            }
        }
    }

    /// Renumbers values densely in op order.
    pub fn renumber(&mut self) {
        let mut map = HashMap::new();
        let mut next = 0;
        for op in &mut self.ops {
            for r in &mut op.results {
                map.insert(*r, ValueId(next));
                *r = ValueId(next);
                next += 1;
            }
            for v in &mut op.operands {
                if let Some(n) = map.get(v) {
                    *v = *n;
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GraphError {
    #[error("{span}: unknown builtin `{name}`")]
    UnknownBuiltin { name: String, span: SourceSpan },
    #[error("{span}: `{op}` expects {expected} arguments, got {got}")]
    ArityMismatch {
        op: String,
        expected: usize,
        got: usize,
        span: SourceSpan,
    },
    #[error("{span}: undefined variable `{name}`")]
    UndefinedVariable { name: String, span: SourceSpan },
    #[error("{span}: argument `{attr}` of `{op}` must be a compile-time {kind}")]
    NotConstant {
        op: String,
        attr: String,
        kind: &'static str,
        span: SourceSpan,
    },
    #[error("{span}: `{name}` used as a tensor but has no value")]
    NoValue { name: String, span: SourceSpan },
    #[error("shape mismatch at {value} ({op}): {detail}")]
    ShapeMismatch {
        op: OpCode,
        value: String,
        detail: String,
    },
    #[error("input `{name}` has no bound length")]
    UnboundInput { name: String },
    #[error("{line}:{column}: graph text: {message}")]
    Text {
        line: u32,
        column: u32,
        message: String,
    },
}
