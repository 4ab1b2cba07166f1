//! Loop-level IR.
//!
//! Every DSP op lowers to an explicit loop nest over f64 buffers
//! ([`lower_graph`]); [`evaluate_loop_ir`] interprets the nests and counts
//! loop trips, memory traffic and arithmetic, per op region and in total.

mod interp;
mod lower;
mod print;
mod report;

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::Serialize;

use crate::graph::{OpCode, ValueId};

pub use interp::{evaluate_loop_ir, ExecError, Execution, RegionCounters};
pub use lower::{lower_graph, LoweringError};
pub use print::program_to_text;
pub use report::{counters_report, CounterRatio, CounterReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BufferId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Temp(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct LoopVar(pub u32);

impl fmt::Display for BufferId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "b{}", self.0)
    }
}

impl fmt::Display for Temp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "t{}", self.0)
    }
}

impl fmt::Display for LoopVar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "i{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum BufferInit {
    Zero,
    Const(Vec<f64>),
    Input(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Buffer {
    pub capacity: usize,
    pub init: BufferInit,
    /// Filled with `DynAppend`; its logical length is the append count.
    pub dynamic: bool,
}

/// Affine index `c0 + sum(coeff * var)`. Negative coefficients express
/// reflected indices such as `L - 1 - n`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct IndexExpr {
    pub c0: i64,
    pub terms: Vec<(LoopVar, i64)>,
}

impl IndexExpr {
    pub fn constant(c: i64) -> Self {
        IndexExpr {
            c0: c,
            terms: Vec::new(),
        }
    }

    pub fn eval(&self, vars: &[i64]) -> i64 {
        self.terms
            .iter()
            .fold(self.c0, |acc, (v, c)| acc + c * vars[v.0 as usize])
    }

    fn normalized(mut self) -> Self {
        self.terms.retain(|(_, c)| *c != 0);
        self
    }
}

impl From<i64> for IndexExpr {
    fn from(c: i64) -> Self {
        IndexExpr::constant(c)
    }
}

impl From<i32> for IndexExpr {
    fn from(c: i32) -> Self {
        IndexExpr::constant(c as i64)
    }
}

impl From<usize> for IndexExpr {
    fn from(c: usize) -> Self {
        IndexExpr::constant(c as i64)
    }
}

impl From<LoopVar> for IndexExpr {
    fn from(v: LoopVar) -> Self {
        IndexExpr {
            c0: 0,
            terms: vec![(v, 1)],
        }
    }
}

impl<T: Into<IndexExpr>> Add<T> for IndexExpr {
    type Output = IndexExpr;

    fn add(mut self, rhs: T) -> IndexExpr {
        let rhs = rhs.into();
        self.c0 += rhs.c0;
        for (v, c) in rhs.terms {
            match self.terms.iter_mut().find(|(w, _)| *w == v) {
                Some((_, k)) => *k += c,
                None => self.terms.push((v, c)),
            }
        }
        self.normalized()
    }
}

impl<T: Into<IndexExpr>> Sub<T> for IndexExpr {
    type Output = IndexExpr;

    fn sub(self, rhs: T) -> IndexExpr {
        self + (-rhs.into())
    }
}

impl Mul<i64> for IndexExpr {
    type Output = IndexExpr;

    fn mul(mut self, k: i64) -> IndexExpr {
        self.c0 *= k;
        for (_, c) in &mut self.terms {
            *c *= k;
        }
        self.normalized()
    }
}

impl Neg for IndexExpr {
    type Output = IndexExpr;

    fn neg(self) -> IndexExpr {
        self * -1
    }
}

impl<T: Into<IndexExpr>> Add<T> for LoopVar {
    type Output = IndexExpr;

    fn add(self, rhs: T) -> IndexExpr {
        IndexExpr::from(self) + rhs
    }
}

impl<T: Into<IndexExpr>> Sub<T> for LoopVar {
    type Output = IndexExpr;

    fn sub(self, rhs: T) -> IndexExpr {
        IndexExpr::from(self) - rhs
    }
}

impl Mul<i64> for LoopVar {
    type Output = IndexExpr;

    fn mul(self, k: i64) -> IndexExpr {
        IndexExpr::from(self) * k
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Operand {
    Temp(Temp),
    Const(f64),
    /// An index expression converted to f64.
    Index(IndexExpr),
    /// The DFT phase `2*pi*((k*n) mod len)/len`. Like `Index`, this is
    /// address arithmetic and is not counted.
    DftPhase {
        k: LoopVar,
        n: LoopVar,
        len: usize,
    },
}

impl From<Temp> for Operand {
    fn from(t: Temp) -> Self {
        Operand::Temp(t)
    }
}

impl From<f64> for Operand {
    fn from(v: f64) -> Self {
        Operand::Const(v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
    Min,
    Max,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Intrinsic {
    Sin,
    Cos,
    /// `sin(z)/z`: one trig call plus one divide.
    Sinc,
    Abs,
    Neg,
    Round,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cond {
    /// Every expression is non-negative.
    Index(Vec<IndexExpr>),
    Ge(Operand, Operand),
    Eq(Operand, Operand),
}

impl Cond {
    /// `0 <= e < len`.
    pub fn within(e: IndexExpr, len: usize) -> Cond {
        let upper = IndexExpr::constant(len as i64 - 1) - e.clone();
        Cond::Index(vec![e, upper])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Stmt {
    For {
        var: LoopVar,
        lb: i64,
        ub: IndexExpr,
        step: i64,
        body: Vec<Stmt>,
    },
    Load {
        dst: Temp,
        buf: BufferId,
        index: IndexExpr,
    },
    Store {
        buf: BufferId,
        index: IndexExpr,
        src: Operand,
    },
    Assign {
        dst: Temp,
        src: Operand,
    },
    Binary {
        dst: Temp,
        op: BinaryOp,
        a: Operand,
        b: Operand,
    },
    Call {
        dst: Temp,
        func: Intrinsic,
        arg: Operand,
    },
    If {
        cond: Cond,
        then: Vec<Stmt>,
        els: Vec<Stmt>,
    },
    DynAppend {
        buf: BufferId,
        src: Operand,
    },
}

/// The loop nest computing one graph op.
#[derive(Debug, Clone, PartialEq)]
pub struct Region {
    pub opcode: OpCode,
    /// The op in graph text form, e.g. `%2 = dft1d_real(%1)`.
    pub label: String,
    pub body: Vec<Stmt>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LoopProgram {
    pub buffers: Vec<Buffer>,
    pub regions: Vec<Region>,
    pub outputs: Vec<BufferId>,
    /// Buffer holding each graph value.
    pub value_buffers: HashMap<ValueId, BufferId>,
    pub num_temps: u32,
    pub num_vars: u32,
}

impl LoopProgram {
    pub fn buffer(&self, id: BufferId) -> &Buffer {
        &self.buffers[id.0 as usize]
    }

    /// Buffers bound to named inputs.
    pub fn inputs(&self) -> impl Iterator<Item = (BufferId, &str)> {
        self.buffers
            .iter()
            .enumerate()
            .filter_map(|(i, b)| match &b.init {
                BufferInit::Input(name) => Some((BufferId(i as u32), name.as_str())),
                _ => None,
            })
    }
}

/// Dynamic instruction counts of one execution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct ExecCounters {
    pub loop_iterations: u64,
    pub loads: u64,
    pub stores: u64,
    pub mults: u64,
    pub adds: u64,
    pub divs: u64,
    pub trig_calls: u64,
    pub wall_time_ns: u64,
}

impl ExecCounters {
    /// Copy with the wall time cleared, for determinism checks.
    pub fn without_time(self) -> Self {
        ExecCounters {
            wall_time_ns: 0,
            ..self
        }
    }
}

impl std::ops::AddAssign for ExecCounters {
    fn add_assign(&mut self, o: Self) {
        self.loop_iterations += o.loop_iterations;
        self.loads += o.loads;
        self.stores += o.stores;
        self.mults += o.mults;
        self.adds += o.adds;
        self.divs += o.divs;
        self.trig_calls += o.trig_calls;
        self.wall_time_ns += o.wall_time_ns;
    }
}

#[cfg(test)]
mod tests;
