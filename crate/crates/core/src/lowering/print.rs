//! Printable loop IR:
//!
//! ```text
//! buffer b0[8] = input "x"
//! buffer b1[8]
//!
//! // %1 = dft1d_real(%0) : tensor<8>
//! for i0 in [0, 8) {
//!   t0 = 0
//!   for i1 in [0, 8) {
//!     t1 = load b0[i1]
//!     t2 = cos(phase(i0 * i1 mod 8))
//!     t3 = mul t1, t2
//!     t0 = add t0, t3
//!   }
//!   store b1[i0] = t0
//! }
//!
//! output b1
//! ```

use std::fmt::Write;

use super::*;

/// Positive terms first, then the constant, then negative terms, so that
/// reflected indices read `7 - i0`.
pub fn index_to_text(e: &IndexExpr) -> String {
    let mut out = String::new();
    let term = |v: LoopVar, k: i64| match k {
        1 => v.to_string(),
        k => format!("{v} * {k}"),
    };
    for (v, c) in e.terms.iter().filter(|(_, c)| *c > 0) {
        if !out.is_empty() {
            out.push_str(" + ");
        }
        out.push_str(&term(*v, *c));
    }
    if out.is_empty() {
        if e.c0 != 0 || e.terms.is_empty() {
            write!(out, "{}", e.c0).unwrap();
        }
    } else if e.c0 > 0 {
        write!(out, " + {}", e.c0).unwrap();
    } else if e.c0 < 0 {
        write!(out, " - {}", -e.c0).unwrap();
    }
    for (v, c) in e.terms.iter().filter(|(_, c)| *c < 0) {
        if out.is_empty() {
            out.push('-');
        } else {
            out.push_str(" - ");
        }
        out.push_str(&term(*v, -c));
    }
    out
}

fn operand_to_text(o: &Operand) -> String {
    match o {
        Operand::Temp(t) => t.to_string(),
        Operand::Const(c) => format!("{c}"),
        Operand::Index(e) => format!("float({})", index_to_text(e)),
        Operand::DftPhase { k, n, len } => format!("phase({k} * {n} mod {len})"),
    }
}

fn cond_to_text(c: &Cond) -> String {
    match c {
        Cond::Index(es) => es
            .iter()
            .map(|e| format!("{} >= 0", index_to_text(e)))
            .collect::<Vec<_>>()
            .join(" && "),
        Cond::Ge(a, b) => format!("{} >= {}", operand_to_text(a), operand_to_text(b)),
        Cond::Eq(a, b) => format!("{} == {}", operand_to_text(a), operand_to_text(b)),
    }
}

fn write_block(out: &mut String, stmts: &[Stmt], depth: usize) {
    let pad = "  ".repeat(depth);
    for s in stmts {
        match s {
            Stmt::For {
                var,
                lb,
                ub,
                step,
                body,
            } => {
                write!(out, "{pad}for {var} in [{lb}, {})", index_to_text(ub)).unwrap();
                if *step != 1 {
                    write!(out, " step {step}").unwrap();
                }
                out.push_str(" {\n");
                write_block(out, body, depth + 1);
                writeln!(out, "{pad}}}").unwrap();
            }
            Stmt::Load { dst, buf, index } => {
                writeln!(out, "{pad}{dst} = load {buf}[{}]", index_to_text(index)).unwrap()
            }
            Stmt::Store { buf, index, src } => writeln!(
                out,
                "{pad}store {buf}[{}] = {}",
                index_to_text(index),
                operand_to_text(src)
            )
            .unwrap(),
            Stmt::Assign { dst, src } => {
                writeln!(out, "{pad}{dst} = {}", operand_to_text(src)).unwrap()
            }
            Stmt::Binary { dst, op, a, b } => {
                let name = format!("{op:?}").to_lowercase();
                writeln!(
                    out,
                    "{pad}{dst} = {name} {}, {}",
                    operand_to_text(a),
                    operand_to_text(b)
                )
                .unwrap()
            }
            Stmt::Call { dst, func, arg } => {
                let name = format!("{func:?}").to_lowercase();
                writeln!(out, "{pad}{dst} = {name}({})", operand_to_text(arg)).unwrap()
            }
            Stmt::If { cond, then, els } => {
                writeln!(out, "{pad}if {} {{", cond_to_text(cond)).unwrap();
                write_block(out, then, depth + 1);
                if !els.is_empty() {
                    writeln!(out, "{pad}}} else {{").unwrap();
                    write_block(out, els, depth + 1);
                }
                writeln!(out, "{pad}}}").unwrap();
            }
            Stmt::DynAppend { buf, src } => {
                writeln!(out, "{pad}append {buf} <- {}", operand_to_text(src)).unwrap()
            }
        }
    }
}

pub fn program_to_text(program: &LoopProgram) -> String {
    let mut out = String::new();
    for (i, b) in program.buffers.iter().enumerate() {
        write!(out, "buffer {}[{}]", BufferId(i as u32), b.capacity).unwrap();
        if b.dynamic {
            out.push_str(" dynamic");
        }
        match &b.init {
            BufferInit::Zero => {}
            BufferInit::Input(name) => write!(out, " = input {name:?}").unwrap(),
            BufferInit::Const(v) => {
                let vals: Vec<String> = v.iter().map(|x| format!("{x}")).collect();
                write!(out, " = [{}]", vals.join(", ")).unwrap();
            }
        }
        out.push('\n');
    }
    for r in &program.regions {
        writeln!(out, "\n// {}", r.label).unwrap();
        write_block(&mut out, &r.body, 0);
    }
    if !program.outputs.is_empty() {
        let outs: Vec<String> = program.outputs.iter().map(BufferId::to_string).collect();
        writeln!(out, "\noutput {}", outs.join(", ")).unwrap();
    }
    out
}
