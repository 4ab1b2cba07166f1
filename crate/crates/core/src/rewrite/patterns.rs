//! Individual DSP rewrite patterns.
//!
//! Each pattern inspects one candidate site and, on a match, returns a
//! [`Rewrite`] describing the ops to insert and the values to redirect. The
//! driver applies it and sweeps the ops left without uses.

use crate::graph::{AttrValue, Attribute, DspGraph, OpCode, OpNode, ValueId};

/// New ops are inserted before `ops[insert_at]`; afterwards every use of
/// `replace[i].0` reads `replace[i].1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Rewrite {
    pub insert_at: usize,
    pub new_ops: Vec<OpNode>,
    pub replace: Vec<(ValueId, ValueId)>,
}

/// Hands out value ids above everything already in the graph.
pub struct IdGen(pub u32);

impl IdGen {
    fn op(&mut self, opcode: OpCode, operands: Vec<ValueId>, attrs: Vec<Attribute>) -> OpNode {
        let results = (0..opcode.num_results())
            .map(|_| {
                let id = ValueId(self.0);
                self.0 += 1;
                id
            })
            .collect();
        OpNode {
            results,
            opcode,
            operands,
            attrs,
            result_shapes: Vec::new(),
        }
    }
}

fn producer(g: &DspGraph, v: ValueId) -> Option<&OpNode> {
    g.producer(v)
}

fn produced_by(g: &DspGraph, v: ValueId, opcode: OpCode) -> Option<&OpNode> {
    producer(g, v).filter(|op| op.opcode == opcode)
}

fn single(site: usize, op: OpNode, old: ValueId) -> Rewrite {
    Rewrite {
        insert_at: site,
        replace: vec![(old, op.results[0])],
        new_ops: vec![op],
    }
}

/// `mul(low_pass_fir_coeffs(L, wc), hamming_window(L))` in either operand
/// order becomes `filter_hamm_opt(L, wc)`.
pub fn symmetric_filter(g: &DspGraph, site: usize, ids: &mut IdGen) -> Option<Rewrite> {
    let op = &g.ops[site];
    if op.opcode != OpCode::Mul {
        return None;
    }
    let (a, b) = (producer(g, op.operands[0])?, producer(g, op.operands[1])?);
    let (lp, ham) = match (a.opcode, b.opcode) {
        (OpCode::LowPassFirCoeffs, OpCode::HammingWindow) => (a, b),
        (OpCode::HammingWindow, OpCode::LowPassFirCoeffs) => (b, a),
        _ => return None,
    };
    let taps = lp.int_attr("L")?;
    if ham.int_attr("L")? != taps {
        return None;
    }
    let wc = lp.float_attr("wc")?;
    let new = ids.op(
        OpCode::FilterHammOpt,
        vec![],
        vec![Attribute::int("L", taps), Attribute::float("wc", wc)],
    );
    Some(single(site, new, op.results[0]))
}

/// `fir_filter_response(x, h)` with `h` from `filter_hamm_opt` becomes
/// `filter_res_symm_opt(x, h)`.
pub fn symmetric_filter_response(g: &DspGraph, site: usize, ids: &mut IdGen) -> Option<Rewrite> {
    let op = &g.ops[site];
    if op.opcode != OpCode::FirFilterResponse {
        return None;
    }
    produced_by(g, op.operands[1], OpCode::FilterHammOpt)?;
    let new = ids.op(OpCode::FilterResSymmOpt, op.operands.clone(), vec![]);
    Some(single(site, new, op.results[0]))
}

/// `conv1d_full(x, reverse(x))` (or with the reversal on the left) becomes
/// `filter_y_symm_opt(x)`.
pub fn filter_y_symm(g: &DspGraph, site: usize, ids: &mut IdGen) -> Option<Rewrite> {
    let op = &g.ops[site];
    if op.opcode != OpCode::Conv1DFull {
        return None;
    }
    let (a, b) = (op.operands[0], op.operands[1]);
    let reversed = |outer: ValueId, inner: ValueId| {
        produced_by(g, outer, OpCode::Reverse).is_some_and(|r| r.operands[0] == inner)
    };
    let x = if reversed(b, a) {
        a
    } else if reversed(a, b) {
        b
    } else {
        return None;
    };
    let new = ids.op(OpCode::FilterYSymmOpt, vec![x], vec![]);
    Some(single(site, new, op.results[0]))
}

/// A DFT part whose input comes from `filter_y_symm_opt` is computed for half
/// the bins and mirrored.
pub fn dft_conj_symm(g: &DspGraph, site: usize, ids: &mut IdGen) -> Option<Rewrite> {
    let op = &g.ops[site];
    let replacement = match op.opcode {
        OpCode::Dft1DReal => OpCode::Dft1DRealSymm,
        OpCode::Dft1DImag => OpCode::Dft1DImagSymm,
        _ => return None,
    };
    produced_by(g, op.operands[0], OpCode::FilterYSymmOpt)?;
    let new = ids.op(replacement, op.operands.clone(), vec![]);
    Some(single(site, new, op.results[0]))
}

/// Returns the common input `x` when `re`/`im` are the real and imaginary
/// DFT parts of the same value, either as two ops or as the two results of
/// one `dft1d_fused`.
fn dft_pair_input(g: &DspGraph, re: ValueId, im: ValueId) -> Option<ValueId> {
    let (pr, pi) = (producer(g, re)?, producer(g, im)?);
    match (pr.opcode, pi.opcode) {
        (OpCode::Dft1DReal, OpCode::Dft1DImag) if pr.operands[0] == pi.operands[0] => {
            Some(pr.operands[0])
        }
        (OpCode::Dft1DFused, OpCode::Dft1DFused)
            if pr.results == pi.results && pr.results[0] == re && pr.results[1] == im =>
        {
            Some(pr.operands[0])
        }
        _ => None,
    }
}

/// `div(sum(add(square(dft_re(x)), square(dft_im(x)))), N)` with `N` the
/// length of `x` becomes `sum(square(x))`.
pub fn parseval(g: &DspGraph, site: usize, ids: &mut IdGen) -> Option<Rewrite> {
    let op = &g.ops[site];
    if op.opcode != OpCode::Div {
        return None;
    }
    let divisor = match produced_by(g, op.operands[1], OpCode::ConstTensor)?.attr("values")? {
        AttrValue::Floats(v) if v.len() == 1 => v[0],
        _ => return None,
    };
    let sum = produced_by(g, op.operands[0], OpCode::Sum)?;
    let add = produced_by(g, sum.operands[0], OpCode::Add)?;
    let sq_a = produced_by(g, add.operands[0], OpCode::Square)?;
    let sq_b = produced_by(g, add.operands[1], OpCode::Square)?;
    let (a, b) = (sq_a.operands[0], sq_b.operands[0]);
    let x = dft_pair_input(g, a, b).or_else(|| dft_pair_input(g, b, a))?;
    let len = g.shape_of(x)?.len;
    if divisor != len as f64 {
        return None;
    }
    let square = ids.op(OpCode::Square, vec![x], vec![]);
    let total = ids.op(OpCode::Sum, vec![square.results[0]], vec![]);
    Some(Rewrite {
        insert_at: site,
        replace: vec![(op.results[0], total.results[0])],
        new_ops: vec![square, total],
    })
}

/// `dft1d_imag(x)` with a sibling `dft1d_real(x)` fuses into one two-result
/// `dft1d_fused(x)`.
pub fn dft_fusion(g: &DspGraph, site: usize, ids: &mut IdGen) -> Option<Rewrite> {
    let op = &g.ops[site];
    if op.opcode != OpCode::Dft1DImag {
        return None;
    }
    let x = op.operands[0];
    let real_idx = g
        .ops
        .iter()
        .position(|o| o.opcode == OpCode::Dft1DReal && o.operands[0] == x)?;
    let real = &g.ops[real_idx];
    let fused = ids.op(OpCode::Dft1DFused, vec![x], vec![]);
    Some(Rewrite {
        insert_at: site.min(real_idx),
        replace: vec![
            (real.results[0], fused.results[0]),
            (op.results[0], fused.results[1]),
        ],
        new_ops: vec![fused],
    })
}

/// `gain(lms_filter(x, d), G)` becomes `lms_filter_gain_opt(x, d)` when the
/// unscaled weights have no other reader.
pub fn lms_gain_fusion(g: &DspGraph, site: usize, ids: &mut IdGen) -> Option<Rewrite> {
    let op = &g.ops[site];
    if op.opcode != OpCode::Gain {
        return None;
    }
    let lms = produced_by(g, op.operands[0], OpCode::LmsFilter)?;
    if g.use_counts().get(&lms.results[0]).copied() != Some(1) {
        return None;
    }
    let new = ids.op(
        OpCode::LmsFilterGainOpt,
        lms.operands.clone(),
        vec![
            Attribute::float("mu", lms.float_attr("mu")?),
            Attribute::int("M", lms.int_attr("M")?),
            Attribute::float("G", op.float_attr("g")?),
        ],
    );
    Some(single(site, new, op.results[0]))
}

/// `idft1d` of the two DFT parts of `x` is `x`.
pub fn identity_dft_idft(g: &DspGraph, site: usize, _ids: &mut IdGen) -> Option<Rewrite> {
    let op = &g.ops[site];
    if op.opcode != OpCode::Idft1D {
        return None;
    }
    let x = dft_pair_input(g, op.operands[0], op.operands[1])?;
    Some(Rewrite {
        insert_at: site,
        new_ops: vec![],
        replace: vec![(op.results[0], x)],
    })
}

/// `downsample(upsample(x, k), k)` is `x`.
pub fn identity_up_down(g: &DspGraph, site: usize, _ids: &mut IdGen) -> Option<Rewrite> {
    let op = &g.ops[site];
    if op.opcode != OpCode::Downsample {
        return None;
    }
    let up = produced_by(g, op.operands[0], OpCode::Upsample)?;
    if up.int_attr("k")? != op.int_attr("k")? {
        return None;
    }
    Some(Rewrite {
        insert_at: site,
        new_ops: vec![],
        replace: vec![(op.results[0], up.operands[0])],
    })
}
