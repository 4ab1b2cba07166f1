use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use super::*;
use crate::kernels::{dft_angle, sinc, Tensor};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExecError {
    #[error("input `{0}` is not bound")]
    MissingInput(String),
    #[error("input `{name}` has {got} samples, the program was built for {expected}")]
    InputLength {
        name: String,
        expected: usize,
        got: usize,
    },
    #[error("{region}: index {index} out of bounds for {buffer}")]
    OutOfBounds {
        region: String,
        buffer: BufferId,
        index: i64,
    },
    #[error("{region}: division by zero")]
    DivisionByZero { region: String },
    #[error("{region}: non-finite value {value}")]
    NonFinite { region: String, value: f64 },
    #[error("{region}: LMS weights diverged (non-finite value); step size too large")]
    Diverged { region: String },
}

/// Counts for one op region.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegionCounters {
    pub label: String,
    #[serde(skip)]
    pub opcode: OpCode,
    pub counters: ExecCounters,
    /// Loop-body executions by nesting depth; `trips[0]` is the outer trip
    /// count.
    pub trips: Vec<u64>,
    /// Loads per buffer, keyed by buffer name (`b3`).
    pub loads_by_buffer: BTreeMap<String, u64>,
}

impl RegionCounters {
    pub fn loads_from(&self, buf: BufferId) -> u64 {
        self.loads_by_buffer
            .get(&buf.to_string())
            .copied()
            .unwrap_or(0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Execution {
    pub outputs: Vec<Tensor>,
    pub counters: ExecCounters,
    pub regions: Vec<RegionCounters>,
}

impl Execution {
    /// Regions of one opcode, in program order.
    pub fn regions_of(&self, opcode: OpCode) -> impl Iterator<Item = &RegionCounters> {
        self.regions.iter().filter(move |r| r.opcode == opcode)
    }
}

struct Machine<'p> {
    bufs: Vec<Vec<f64>>,
    appended: Vec<usize>,
    temps: Vec<f64>,
    vars: Vec<i64>,
    region: &'p Region,
    counters: ExecCounters,
    trips: Vec<u64>,
    loads: Vec<u64>,
}

impl Machine<'_> {
    fn operand(&self, o: &Operand) -> f64 {
        match o {
            Operand::Temp(t) => self.temps[t.0 as usize],
            Operand::Const(c) => *c,
            Operand::Index(e) => e.eval(&self.vars) as f64,
            Operand::DftPhase { k, n, len } => dft_angle(
                self.vars[k.0 as usize] as usize,
                self.vars[n.0 as usize] as usize,
                *len,
            ),
        }
    }

    fn slot(&self, buf: BufferId, index: &IndexExpr) -> Result<usize, ExecError> {
        let i = index.eval(&self.vars);
        if i >= 0 && (i as usize) < self.bufs[buf.0 as usize].len() {
            Ok(i as usize)
        } else {
            Err(ExecError::OutOfBounds {
                region: self.region.label.clone(),
                buffer: buf,
                index: i,
            })
        }
    }

    fn finite(&self, v: f64) -> Result<f64, ExecError> {
        if v.is_finite() {
            Ok(v)
        } else if matches!(
            self.region.opcode,
            OpCode::LmsFilter | OpCode::LmsFilterGainOpt
        ) {
            Err(ExecError::Diverged {
                region: self.region.label.clone(),
            })
        } else {
            Err(ExecError::NonFinite {
                region: self.region.label.clone(),
                value: v,
            })
        }
    }

    fn holds(&self, cond: &Cond) -> bool {
        match cond {
            Cond::Index(es) => es.iter().all(|e| e.eval(&self.vars) >= 0),
            Cond::Ge(a, b) => self.operand(a) >= self.operand(b),
            Cond::Eq(a, b) => self.operand(a) == self.operand(b),
        }
    }

    fn exec(&mut self, stmts: &[Stmt], depth: usize) -> Result<(), ExecError> {
        for s in stmts {
            match s {
                Stmt::For {
                    var,
                    lb,
                    ub,
                    step,
                    body,
                } => {
                    let end = ub.eval(&self.vars);
                    if self.trips.len() <= depth {
                        self.trips.resize(depth + 1, 0);
                    }
                    let mut i = *lb;
                    while i < end {
                        self.vars[var.0 as usize] = i;
                        self.trips[depth] += 1;
                        self.counters.loop_iterations += 1;
                        self.exec(body, depth + 1)?;
                        i += step;
                    }
                }
                Stmt::Load { dst, buf, index } => {
                    let i = self.slot(*buf, index)?;
                    self.temps[dst.0 as usize] = self.bufs[buf.0 as usize][i];
                    self.counters.loads += 1;
                    self.loads[buf.0 as usize] += 1;
                }
                Stmt::Store { buf, index, src } => {
                    let i = self.slot(*buf, index)?;
                    self.bufs[buf.0 as usize][i] = self.operand(src);
                    self.counters.stores += 1;
                }
                Stmt::Assign { dst, src } => self.temps[dst.0 as usize] = self.operand(src),
                Stmt::Binary { dst, op, a, b } => {
                    let (a, b) = (self.operand(a), self.operand(b));
                    let v = match op {
                        BinaryOp::Add => {
                            self.counters.adds += 1;
                            a + b
                        }
                        BinaryOp::Sub => {
                            self.counters.adds += 1;
                            a - b
                        }
                        BinaryOp::Mul => {
                            self.counters.mults += 1;
                            a * b
                        }
                        BinaryOp::Div => {
                            self.counters.divs += 1;
                            if b == 0.0 {
                                return Err(ExecError::DivisionByZero {
                                    region: self.region.label.clone(),
                                });
                            }
                            a / b
                        }
                        BinaryOp::Min => a.min(b),
                        BinaryOp::Max => a.max(b),
                    };
                    self.temps[dst.0 as usize] = self.finite(v)?;
                }
                Stmt::Call { dst, func, arg } => {
                    let x = self.operand(arg);
                    let v = match func {
                        Intrinsic::Sin => {
                            self.counters.trig_calls += 1;
                            x.sin()
                        }
                        Intrinsic::Cos => {
                            self.counters.trig_calls += 1;
                            x.cos()
                        }
                        Intrinsic::Sinc => {
                            self.counters.trig_calls += 1;
                            self.counters.divs += 1;
                            sinc(x)
                        }
                        Intrinsic::Abs => x.abs(),
                        Intrinsic::Neg => -x,
                        Intrinsic::Round => x.round(),
                    };
                    self.temps[dst.0 as usize] = self.finite(v)?;
                }
                Stmt::If { cond, then, els } => {
                    let branch = if self.holds(cond) { then } else { els };
                    self.exec(branch, depth)?;
                }
                Stmt::DynAppend { buf, src } => {
                    let b = buf.0 as usize;
                    let i = self.appended[b];
                    if i >= self.bufs[b].len() {
                        return Err(ExecError::OutOfBounds {
                            region: self.region.label.clone(),
                            buffer: *buf,
                            index: i as i64,
                        });
                    }
                    self.bufs[b][i] = self.operand(src);
                    self.appended[b] += 1;
                    self.counters.stores += 1;
                }
            }
        }
        Ok(())
    }
}

#[cfg(not(target_arch = "wasm32"))]
fn timed<T>(f: impl FnOnce() -> T) -> (T, u64) {
    let start = std::time::Instant::now();
    let out = f();
    (out, start.elapsed().as_nanos() as u64)
}

// No monotonic clock on bare wasm.
#[cfg(target_arch = "wasm32")]
fn timed<T>(f: impl FnOnce() -> T) -> (T, u64) {
    (f(), 0)
}

/// Runs the program on the given inputs. Counters are exact and
/// deterministic; only `wall_time_ns` varies between runs.
pub fn evaluate_loop_ir(
    program: &LoopProgram,
    inputs: &BTreeMap<String, Tensor>,
) -> Result<Execution, ExecError> {
    let mut bufs = Vec::with_capacity(program.buffers.len());
    for b in &program.buffers {
        bufs.push(match &b.init {
            BufferInit::Zero => vec![0.0; b.capacity],
            BufferInit::Const(v) => v.clone(),
            BufferInit::Input(name) => {
                let t = inputs
                    .get(name)
                    .ok_or_else(|| ExecError::MissingInput(name.clone()))?;
                if t.len() != b.capacity {
                    return Err(ExecError::InputLength {
                        name: name.clone(),
                        expected: b.capacity,
                        got: t.len(),
                    });
                }
                t.values().to_vec()
            }
        });
    }

    let (result, wall) = timed(|| {
        let mut appended = vec![0; bufs.len()];
        let mut temps = vec![0.0; program.num_temps as usize];
        let mut vars = vec![0; program.num_vars as usize];
        let mut regions = Vec::with_capacity(program.regions.len());
        for region in &program.regions {
            let mut m = Machine {
                bufs: std::mem::take(&mut bufs),
                appended: std::mem::take(&mut appended),
                temps: std::mem::take(&mut temps),
                vars: std::mem::take(&mut vars),
                region,
                counters: ExecCounters::default(),
                trips: Vec::new(),
                loads: vec![0; program.buffers.len()],
            };
            let r = m.exec(&region.body, 0);
            bufs = m.bufs;
            appended = m.appended;
            temps = m.temps;
            vars = m.vars;
            r?;
            regions.push(RegionCounters {
                label: region.label.clone(),
                opcode: region.opcode,
                counters: m.counters,
                trips: m.trips,
                loads_by_buffer: m
                    .loads
                    .iter()
                    .enumerate()
                    .filter(|(_, n)| **n > 0)
                    .map(|(i, n)| (BufferId(i as u32).to_string(), *n))
                    .collect(),
            });
        }
        Ok((regions, appended))
    });
    let (regions, appended) = result?;

    let mut counters = ExecCounters::default();
    for r in &regions {
        counters += r.counters;
    }
    counters.wall_time_ns = wall;

    let outputs = program
        .outputs
        .iter()
        .map(|b| {
            let i = b.0 as usize;
            let data = bufs[i].clone();
            let logical_len = if program.buffers[i].dynamic {
                appended[i]
            } else {
                data.len()
            };
            Tensor { data, logical_len }
        })
        .collect();
    Ok(Execution {
        outputs,
        counters,
        regions,
    })
}
