use std::collections::HashMap;
use std::f64::consts::{PI, TAU};

use thiserror::Error;

use super::*;
use crate::graph::{op_to_text, AttrValue, DspGraph, OpNode};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LoweringError {
    #[error("no loop lowering for {op}: {reason}")]
    Unsupported { op: OpCode, reason: String },
    #[error("{value} has no inferred shape")]
    MissingShape { value: ValueId },
    #[error("{region}: index {index} into {buffer} may leave [0, {capacity})")]
    OutOfBounds {
        region: String,
        buffer: BufferId,
        index: String,
        capacity: usize,
    },
}

fn for_(var: LoopVar, ub: impl Into<IndexExpr>, body: Vec<Stmt>) -> Stmt {
    Stmt::For {
        var,
        lb: 0,
        ub: ub.into(),
        step: 1,
        body,
    }
}

fn load(dst: Temp, buf: BufferId, index: impl Into<IndexExpr>) -> Stmt {
    Stmt::Load {
        dst,
        buf,
        index: index.into(),
    }
}

fn store(buf: BufferId, index: impl Into<IndexExpr>, src: impl Into<Operand>) -> Stmt {
    Stmt::Store {
        buf,
        index: index.into(),
        src: src.into(),
    }
}

fn assign(dst: Temp, src: impl Into<Operand>) -> Stmt {
    Stmt::Assign {
        dst,
        src: src.into(),
    }
}

fn bin(dst: Temp, op: BinaryOp, a: impl Into<Operand>, b: impl Into<Operand>) -> Stmt {
    Stmt::Binary {
        dst,
        op,
        a: a.into(),
        b: b.into(),
    }
}

fn call(dst: Temp, func: Intrinsic, arg: impl Into<Operand>) -> Stmt {
    Stmt::Call {
        dst,
        func,
        arg: arg.into(),
    }
}

fn guard(cond: Cond, then: Vec<Stmt>) -> Stmt {
    Stmt::If {
        cond,
        then,
        els: Vec::new(),
    }
}

fn index(e: impl Into<IndexExpr>) -> Operand {
    Operand::Index(e.into())
}

struct Lowerer {
    buffers: Vec<Buffer>,
    temps: u32,
    vars: u32,
}

/// Operand buffer and its length.
type In = (BufferId, usize);

impl Lowerer {
    fn temp(&mut self) -> Temp {
        self.temps += 1;
        Temp(self.temps - 1)
    }

    fn var(&mut self) -> LoopVar {
        self.vars += 1;
        LoopVar(self.vars - 1)
    }

    fn buffer(&mut self, capacity: usize, init: BufferInit, dynamic: bool) -> BufferId {
        self.buffers.push(Buffer {
            capacity,
            init,
            dynamic,
        });
        BufferId(self.buffers.len() as u32 - 1)
    }

    /// `y[n] = sum_i h[i] * x[n-i]` for `n < out_len`, zero outside `x`.
    fn convolution(&mut self, x: In, h: In, y: BufferId, out_len: usize) -> Vec<Stmt> {
        let (n, i) = (self.var(), self.var());
        let (acc, hv, xv, p) = (self.temp(), self.temp(), self.temp(), self.temp());
        vec![for_(
            n,
            out_len,
            vec![
                assign(acc, 0.0),
                for_(
                    i,
                    h.1,
                    vec![
                        load(hv, h.0, i),
                        guard(
                            Cond::within(n - i, x.1),
                            vec![
                                load(xv, x.0, n - i),
                                bin(p, BinaryOp::Mul, hv, xv),
                                bin(acc, BinaryOp::Add, acc, p),
                            ],
                        ),
                    ],
                ),
                store(y, n, acc),
            ],
        )]
    }

    /// Statements leaving `lowpass_tap(n, taps, wc)` in the returned temp.
    fn lowpass_tap(&mut self, n: LoopVar, taps: usize, wc: f64) -> (Vec<Stmt>, Temp) {
        let (t, d, z, s) = (self.temp(), self.temp(), self.temp(), self.temp());
        let centre = Cond::Index(vec![n * 2 + 1 - taps, IndexExpr::from(taps) - 1 - (n * 2)]);
        let mid = (taps - 1) as f64 / 2.0;
        let stmts = vec![Stmt::If {
            cond: centre,
            then: vec![assign(t, wc / PI)],
            els: vec![
                bin(d, BinaryOp::Sub, index(n), mid),
                bin(z, BinaryOp::Mul, wc, d),
                call(s, Intrinsic::Sinc, z),
                bin(t, BinaryOp::Mul, wc / PI, s),
            ],
        }];
        (stmts, t)
    }

    fn hamming_tap(&mut self, n: LoopVar, taps: usize) -> (Vec<Stmt>, Temp) {
        let (a, b, c, m, t) = (
            self.temp(),
            self.temp(),
            self.temp(),
            self.temp(),
            self.temp(),
        );
        let stmts = vec![
            bin(a, BinaryOp::Mul, TAU, index(n)),
            bin(b, BinaryOp::Div, a, (taps - 1) as f64),
            call(c, Intrinsic::Cos, b),
            bin(m, BinaryOp::Mul, 0.46, c),
            bin(t, BinaryOp::Sub, 0.54, m),
        ];
        (stmts, t)
    }

    /// Both LMS variants; `scale` is `mu` or `mu * G`.
    fn lms(&mut self, x: In, d: In, w: BufferId, scale: f64, taps: usize) -> Vec<Stmt> {
        let (n, i, j) = (self.var(), self.var(), self.var());
        let (y, wi, xv, p, dv, e, step, u, wn) = (
            self.temp(),
            self.temp(),
            self.temp(),
            self.temp(),
            self.temp(),
            self.temp(),
            self.temp(),
            self.temp(),
            self.temp(),
        );
        vec![for_(
            n,
            x.1,
            vec![
                assign(y, 0.0),
                for_(
                    i,
                    taps,
                    vec![
                        load(wi, w, i),
                        guard(
                            Cond::within(n - i, x.1),
                            vec![
                                load(xv, x.0, n - i),
                                bin(p, BinaryOp::Mul, wi, xv),
                                bin(y, BinaryOp::Add, y, p),
                            ],
                        ),
                    ],
                ),
                load(dv, d.0, n),
                bin(e, BinaryOp::Sub, dv, y),
                bin(step, BinaryOp::Mul, scale, e),
                for_(
                    j,
                    taps,
                    vec![guard(
                        Cond::within(n - j, x.1),
                        vec![
                            load(xv, x.0, n - j),
                            bin(u, BinaryOp::Mul, step, xv),
                            load(wi, w, j),
                            bin(wn, BinaryOp::Add, wi, u),
                            store(w, j, wn),
                        ],
                    )],
                ),
            ],
        )]
    }

    /// DFT part over bins `0..bins`; `mirror` adds the conjugate-symmetric
    /// store for `k >= 1, len-k > k`.
    fn dft(&mut self, x: In, out: BufferId, imag: bool, bins: usize, mirror: bool) -> Vec<Stmt> {
        let len = x.1;
        let (k, n) = (self.var(), self.var());
        let (acc, xv, c, p, neg) = (
            self.temp(),
            self.temp(),
            self.temp(),
            self.temp(),
            self.temp(),
        );
        let phase = Operand::DftPhase { k, n, len };
        let (func, accumulate) = if imag {
            (Intrinsic::Sin, BinaryOp::Sub)
        } else {
            (Intrinsic::Cos, BinaryOp::Add)
        };
        let mut outer = vec![
            assign(acc, 0.0),
            for_(
                n,
                len,
                vec![
                    load(xv, x.0, n),
                    call(c, func, phase),
                    bin(p, BinaryOp::Mul, xv, c),
                    bin(acc, accumulate, acc, p),
                ],
            ),
            store(out, k, acc),
        ];
        if mirror {
            let cond = Cond::Index(vec![k - 1, IndexExpr::from(len) - 1 - (k * 2)]);
            let reflected = IndexExpr::from(len) - k;
            outer.push(guard(
                cond,
                if imag {
                    vec![call(neg, Intrinsic::Neg, acc), store(out, reflected, neg)]
                } else {
                    vec![store(out, reflected, acc)]
                },
            ));
        }
        vec![for_(k, bins, outer)]
    }

    fn lower_op(
        &mut self,
        op: &OpNode,
        ins: &[In],
        outs: &[(BufferId, usize)],
    ) -> Result<Vec<Stmt>, LoweringError> {
        use OpCode::*;
        let int = |name: &str| op.int_attr(name).unwrap_or(0).max(0) as usize;
        let float = |name: &str| op.float_attr(name).unwrap_or(0.0);
        let (y, out_len) = outs.first().copied().unwrap_or((BufferId(0), 0));

        Ok(match op.opcode {
            Input | ConstTensor | Print => Vec::new(),
            Delay => {
                let (x, k) = (ins[0], int("k") as i64);
                let (n, v) = (self.var(), self.temp());
                let copy = vec![load(v, x.0, n - k), store(y, n, v)];
                let body = if k == 0 {
                    copy
                } else {
                    vec![guard(Cond::Index(vec![n - k]), copy)]
                };
                vec![for_(n, out_len, body)]
            }
            FirFilterResponse | Conv1DFull => self.convolution(ins[0], ins[1], y, out_len),
            SlidingWindowAvg => {
                let (x, window) = (ins[0], int("window"));
                let (n, i) = (self.var(), self.var());
                let (acc, v, r) = (self.temp(), self.temp(), self.temp());
                vec![for_(
                    n,
                    out_len,
                    vec![
                        assign(acc, 0.0),
                        for_(
                            i,
                            window,
                            vec![guard(
                                Cond::within(n - i, x.1),
                                vec![load(v, x.0, n - i), bin(acc, BinaryOp::Add, acc, v)],
                            )],
                        ),
                        bin(r, BinaryOp::Div, acc, window as f64),
                        store(y, n, r),
                    ],
                )]
            }
            Dft1DReal => self.dft(ins[0], y, false, ins[0].1, false),
            Dft1DImag => self.dft(ins[0], y, true, ins[0].1, false),
            Dft1DRealSymm => self.dft(ins[0], y, false, ins[0].1 / 2 + 1, true),
            Dft1DImagSymm => self.dft(ins[0], y, true, ins[0].1 / 2 + 1, true),
            Dft1DFused => {
                let (x, len) = (ins[0], ins[0].1);
                let (re, im) = (outs[0].0, outs[1].0);
                let (k, n) = (self.var(), self.var());
                let (ar, ai, xv, c, s, p, q) = (
                    self.temp(),
                    self.temp(),
                    self.temp(),
                    self.temp(),
                    self.temp(),
                    self.temp(),
                    self.temp(),
                );
                let phase = Operand::DftPhase { k, n, len };
                vec![for_(
                    k,
                    len,
                    vec![
                        assign(ar, 0.0),
                        assign(ai, 0.0),
                        for_(
                            n,
                            len,
                            vec![
                                load(xv, x.0, n),
                                call(c, Intrinsic::Cos, phase.clone()),
                                call(s, Intrinsic::Sin, phase),
                                bin(p, BinaryOp::Mul, xv, c),
                                bin(ar, BinaryOp::Add, ar, p),
                                bin(q, BinaryOp::Mul, xv, s),
                                bin(ai, BinaryOp::Sub, ai, q),
                            ],
                        ),
                        store(re, k, ar),
                        store(im, k, ai),
                    ],
                )]
            }
            Idft1D => {
                let (re, im, len) = (ins[0].0, ins[1].0, ins[0].1);
                let (n, k) = (self.var(), self.var());
                let (acc, a, b, c, s, p, q, r) = (
                    self.temp(),
                    self.temp(),
                    self.temp(),
                    self.temp(),
                    self.temp(),
                    self.temp(),
                    self.temp(),
                    self.temp(),
                );
                let phase = Operand::DftPhase { k, n, len };
                vec![for_(
                    n,
                    len,
                    vec![
                        assign(acc, 0.0),
                        for_(
                            k,
                            len,
                            vec![
                                load(a, re, k),
                                load(b, im, k),
                                call(c, Intrinsic::Cos, phase.clone()),
                                call(s, Intrinsic::Sin, phase),
                                bin(p, BinaryOp::Mul, a, c),
                                bin(acc, BinaryOp::Add, acc, p),
                                bin(q, BinaryOp::Mul, b, s),
                                bin(acc, BinaryOp::Sub, acc, q),
                            ],
                        ),
                        bin(r, BinaryOp::Div, acc, len as f64),
                        store(y, n, r),
                    ],
                )]
            }
            LowPassFirCoeffs => {
                let n = self.var();
                let (mut body, t) = self.lowpass_tap(n, int("L"), float("wc"));
                body.push(store(y, n, t));
                vec![for_(n, out_len, body)]
            }
            HammingWindow => {
                let n = self.var();
                let (mut body, t) = self.hamming_tap(n, int("L"));
                body.push(store(y, n, t));
                vec![for_(n, out_len, body)]
            }
            FilterHammOpt => {
                let taps = int("L");
                let n = self.var();
                let (mut body, lp) = self.lowpass_tap(n, taps, float("wc"));
                let (ham_stmts, ham) = self.hamming_tap(n, taps);
                let v = self.temp();
                body.extend(ham_stmts);
                body.push(bin(v, BinaryOp::Mul, lp, ham));
                body.push(store(y, n, v));
                let reflected = IndexExpr::from(taps) - 1 - n;
                body.push(guard(
                    Cond::Index(vec![IndexExpr::from(taps) - 2 - (n * 2)]),
                    vec![store(y, reflected, v)],
                ));
                vec![for_(n, taps.div_ceil(2), body)]
            }
            FilterResSymmOpt => {
                let (x, h, taps) = (ins[0], ins[1], ins[1].1);
                let (n, i) = (self.var(), self.var());
                let (acc, pair, xa, xb, hv, p) = (
                    self.temp(),
                    self.temp(),
                    self.temp(),
                    self.temp(),
                    self.temp(),
                    self.temp(),
                );
                let far = n - (IndexExpr::from(taps) - 1 - i);
                let mut outer = vec![
                    assign(acc, 0.0),
                    for_(
                        i,
                        taps / 2,
                        vec![
                            assign(pair, 0.0),
                            guard(
                                Cond::within(n - i, x.1),
                                vec![load(xa, x.0, n - i), assign(pair, xa)],
                            ),
                            guard(
                                Cond::within(far.clone(), x.1),
                                vec![load(xb, x.0, far), bin(pair, BinaryOp::Add, pair, xb)],
                            ),
                            load(hv, h.0, i),
                            bin(p, BinaryOp::Mul, hv, pair),
                            bin(acc, BinaryOp::Add, acc, p),
                        ],
                    ),
                ];
                if taps % 2 == 1 {
                    let mid = (taps / 2) as i64;
                    outer.push(load(hv, h.0, mid));
                    outer.push(guard(
                        Cond::within(n - mid, x.1),
                        vec![
                            load(xa, x.0, n - mid),
                            bin(p, BinaryOp::Mul, hv, xa),
                            bin(acc, BinaryOp::Add, acc, p),
                        ],
                    ));
                }
                outer.push(store(y, n, acc));
                vec![for_(n, out_len, outer)]
            }
            FilterYSymmOpt => {
                let (x, len) = (ins[0], ins[0].1);
                let (n, i) = (self.var(), self.var());
                let (acc, a, b, p) = (self.temp(), self.temp(), self.temp(), self.temp());
                let last = out_len as i64 - 1;
                vec![for_(
                    n,
                    out_len.div_ceil(2),
                    vec![
                        assign(acc, 0.0),
                        for_(
                            i,
                            len,
                            vec![
                                load(a, x.0, IndexExpr::from(len) - 1 - i),
                                guard(
                                    Cond::within(n - i, len),
                                    vec![
                                        load(b, x.0, n - i),
                                        bin(p, BinaryOp::Mul, a, b),
                                        bin(acc, BinaryOp::Add, acc, p),
                                    ],
                                ),
                            ],
                        ),
                        store(y, n, acc),
                        guard(
                            Cond::Index(vec![IndexExpr::from(last - 1) - (n * 2)]),
                            vec![store(y, IndexExpr::from(last) - n, acc)],
                        ),
                    ],
                )]
            }
            LmsFilter => self.lms(ins[0], ins[1], y, float("mu"), int("M")),
            LmsFilterGainOpt => self.lms(ins[0], ins[1], y, float("mu") * float("G"), int("M")),
            Add | Sub | Mul | Div => {
                let which = match op.opcode {
                    Add => BinaryOp::Add,
                    Sub => BinaryOp::Sub,
                    Mul => BinaryOp::Mul,
                    _ => BinaryOp::Div,
                };
                let i = self.var();
                let (a, b, r) = (self.temp(), self.temp(), self.temp());
                let at = |v: In| {
                    if v.1 == 1 {
                        IndexExpr::constant(0)
                    } else {
                        i.into()
                    }
                };
                vec![for_(
                    i,
                    out_len,
                    vec![
                        load(a, ins[0].0, at(ins[0])),
                        load(b, ins[1].0, at(ins[1])),
                        bin(r, which, a, b),
                        store(y, i, r),
                    ],
                )]
            }
            Square | Gain => {
                let i = self.var();
                let (v, r) = (self.temp(), self.temp());
                let compute = if op.opcode == Square {
                    bin(r, BinaryOp::Mul, v, v)
                } else {
                    bin(r, BinaryOp::Mul, float("g"), v)
                };
                vec![for_(
                    i,
                    out_len,
                    vec![load(v, ins[0].0, i), compute, store(y, i, r)],
                )]
            }
            Reverse => {
                let (x, len) = (ins[0].0, ins[0].1);
                let i = self.var();
                let v = self.temp();
                vec![for_(
                    i,
                    len,
                    vec![load(v, x, IndexExpr::from(len) - 1 - i), store(y, i, v)],
                )]
            }
            Sum => {
                let i = self.var();
                let (acc, v) = (self.temp(), self.temp());
                vec![
                    assign(acc, 0.0),
                    for_(
                        i,
                        ins[0].1,
                        vec![load(v, ins[0].0, i), bin(acc, BinaryOp::Add, acc, v)],
                    ),
                    store(y, 0i64, acc),
                ]
            }
            Threshold => {
                let i = self.var();
                let (v, a) = (self.temp(), self.temp());
                vec![for_(
                    i,
                    out_len,
                    vec![
                        load(v, ins[0].0, i),
                        call(a, Intrinsic::Abs, v),
                        guard(Cond::Ge(a.into(), float("t").into()), vec![store(y, i, v)]),
                    ],
                )]
            }
            Quantize => {
                let (levels, min, max) = (int("levels"), float("min"), float("max"));
                let step = (max - min) / (levels - 1) as f64;
                let i = self.var();
                let (v, c, s, q, r, m, o) = (
                    self.temp(),
                    self.temp(),
                    self.temp(),
                    self.temp(),
                    self.temp(),
                    self.temp(),
                    self.temp(),
                );
                vec![for_(
                    i,
                    out_len,
                    vec![
                        load(v, ins[0].0, i),
                        bin(c, BinaryOp::Max, v, min),
                        bin(c, BinaryOp::Min, c, max),
                        bin(s, BinaryOp::Sub, c, min),
                        bin(q, BinaryOp::Div, s, step),
                        call(r, Intrinsic::Round, q),
                        bin(m, BinaryOp::Mul, r, step),
                        bin(o, BinaryOp::Add, min, m),
                        store(y, i, o),
                    ],
                )]
            }
            RunLenEncoding => {
                let x = ins[0].0;
                let i = self.var();
                let (v, cur, run) = (self.temp(), self.temp(), self.temp());
                let start = vec![assign(cur, v), assign(run, 1.0)];
                let flush = |stmts: &mut Vec<Stmt>| {
                    stmts.push(Stmt::DynAppend {
                        buf: y,
                        src: cur.into(),
                    });
                    stmts.push(Stmt::DynAppend {
                        buf: y,
                        src: run.into(),
                    });
                };
                let mut new_run = Vec::new();
                flush(&mut new_run);
                new_run.extend(start.clone());
                let mut tail = Vec::new();
                flush(&mut tail);
                let mut body = vec![for_(
                    i,
                    ins[0].1,
                    vec![
                        load(v, x, i),
                        Stmt::If {
                            cond: Cond::Index(vec![i - 1]),
                            then: vec![Stmt::If {
                                cond: Cond::Eq(v.into(), cur.into()),
                                then: vec![bin(run, BinaryOp::Add, run, 1.0)],
                                els: new_run,
                            }],
                            els: start,
                        },
                    ],
                )];
                body.extend(tail);
                body
            }
            Upsample => {
                let k = int("k") as i64;
                let n = self.var();
                let v = self.temp();
                vec![for_(
                    n,
                    ins[0].1,
                    vec![load(v, ins[0].0, n), store(y, n * k, v)],
                )]
            }
            Downsample => {
                let k = int("k") as i64;
                let n = self.var();
                let v = self.temp();
                vec![for_(
                    n,
                    out_len,
                    vec![load(v, ins[0].0, n * k), store(y, n, v)],
                )]
            }
            SinVec | CosVec => {
                let (f, fs) = (float("f"), float("fs"));
                let func = if op.opcode == SinVec {
                    Intrinsic::Sin
                } else {
                    Intrinsic::Cos
                };
                let i = self.var();
                let (a, b, r) = (self.temp(), self.temp(), self.temp());
                vec![for_(
                    i,
                    out_len,
                    vec![
                        bin(a, BinaryOp::Mul, TAU * f, index(i)),
                        bin(b, BinaryOp::Div, a, fs),
                        call(r, func, b),
                        store(y, i, r),
                    ],
                )]
            }
            RangeVec => {
                let i = self.var();
                let (m, r) = (self.temp(), self.temp());
                vec![for_(
                    i,
                    out_len,
                    vec![
                        bin(m, BinaryOp::Mul, index(i), float("step")),
                        bin(r, BinaryOp::Add, float("start"), m),
                        store(y, i, r),
                    ],
                )]
            }
        })
    }
}

/// Lowers a verified, shape-inferred graph. Each value gets its own buffer;
/// every computing op becomes one [`Region`].
pub fn lower_graph(graph: &DspGraph) -> Result<LoopProgram, LoweringError> {
    let mut low = Lowerer {
        buffers: Vec::new(),
        temps: 0,
        vars: 0,
    };
    let mut value_buf: HashMap<ValueId, (BufferId, usize)> = HashMap::new();
    let mut regions = Vec::new();
    let mut outputs = Vec::new();

    for op in &graph.ops {
        let mut ins = Vec::with_capacity(op.operands.len());
        for v in &op.operands {
            let (buf, len) = *value_buf
                .get(v)
                .ok_or(LoweringError::MissingShape { value: *v })?;
            if low.buffers[buf.0 as usize].dynamic && op.opcode != OpCode::Print {
                return Err(LoweringError::Unsupported {
                    op: op.opcode,
                    reason: "operand has a data-dependent length".into(),
                });
            }
            ins.push((buf, len));
        }
        if op.result_shapes.len() != op.results.len() {
            return Err(LoweringError::MissingShape {
                value: op.results[0],
            });
        }
        let mut outs = Vec::new();
        for (r, shape) in op.results.iter().zip(&op.result_shapes) {
            let init = match (op.opcode, op.attr("name"), op.attr("values")) {
                (OpCode::Input, Some(AttrValue::Str(name)), _) => BufferInit::Input(name.clone()),
                (OpCode::ConstTensor, _, Some(AttrValue::Floats(v))) => {
                    BufferInit::Const(v.clone())
                }
                _ => BufferInit::Zero,
            };
            let buf = low.buffer(shape.len, init, shape.dynamic);
            value_buf.insert(*r, (buf, shape.len));
            outs.push((buf, shape.len));
        }
        if op.opcode == OpCode::Print {
            outputs.push(ins[0].0);
        }
        let body = low.lower_op(op, &ins, &outs)?;
        if !body.is_empty() {
            let label = op_to_text(op);
            check_bounds(&label, &body, &low.buffers, &mut Vec::new())?;
            regions.push(Region {
                opcode: op.opcode,
                label,
                body,
            });
        }
    }

    Ok(LoopProgram {
        buffers: low.buffers,
        regions,
        outputs,
        value_buffers: value_buf.into_iter().map(|(v, (b, _))| (v, b)).collect(),
        num_temps: low.temps,
        num_vars: low.vars,
    })
}

/// Inclusive range of `e` given ranges of the enclosing loop variables.
fn interval(e: &IndexExpr, ranges: &[(LoopVar, i64, i64)]) -> Option<(i64, i64)> {
    let (mut lo, mut hi) = (e.c0, e.c0);
    for (v, c) in &e.terms {
        let (_, vlo, vhi) = ranges.iter().find(|(w, _, _)| w == v)?;
        let (a, b) = (c * vlo, c * vhi);
        lo += a.min(b);
        hi += a.max(b);
    }
    Some((lo, hi))
}

/// Proves every unguarded load and store stays inside its buffer. Accesses
/// under an index guard are zero-fill or mirror accesses and are checked at
/// run time instead.
pub(super) fn check_bounds(
    region: &str,
    body: &[Stmt],
    buffers: &[Buffer],
    ranges: &mut Vec<(LoopVar, i64, i64)>,
) -> Result<(), LoweringError> {
    let check = |buf: BufferId, e: &IndexExpr, ranges: &[(LoopVar, i64, i64)]| {
        let capacity = buffers[buf.0 as usize].capacity;
        match interval(e, ranges) {
            Some((lo, hi)) if lo >= 0 && hi < capacity as i64 => Ok(()),
            _ => Err(LoweringError::OutOfBounds {
                region: region.to_string(),
                buffer: buf,
                index: print::index_to_text(e),
                capacity,
            }),
        }
    };
    for s in body {
        match s {
            Stmt::For {
                var, lb, ub, body, ..
            } => {
                let Some((_, ub_hi)) = interval(ub, ranges) else {
                    continue;
                };
                if ub_hi <= *lb {
                    continue;
                }
                ranges.push((*var, *lb, ub_hi - 1));
                let r = check_bounds(region, body, buffers, ranges);
                ranges.pop();
                r?;
            }
            Stmt::Load { buf, index, .. } | Stmt::Store { buf, index, .. } => {
                check(*buf, index, ranges)?
            }
            Stmt::If { cond, then, els } => {
                if !matches!(cond, Cond::Index(_)) {
                    check_bounds(region, then, buffers, ranges)?;
                }
                check_bounds(region, els, buffers, ranges)?;
            }
            _ => {}
        }
    }
    Ok(())
}
