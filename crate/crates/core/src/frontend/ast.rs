use std::fmt::Write;

use super::SourceSpan;

#[derive(Debug, Clone, PartialEq)]
pub struct AstModule {
    pub functions: Vec<AstFunction>,
}

impl AstModule {
    pub fn main(&self) -> Option<&AstFunction> {
        self.functions.iter().find(|f| f.name == "main")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AstFunction {
    pub name: String,
    pub params: Vec<String>,
    pub body: Vec<AstStatement>,
    pub span: SourceSpan,
}

#[derive(Debug, Clone, PartialEq)]
pub enum AstStatement {
    VarDecl {
        name: String,
        init: AstExpression,
        span: SourceSpan,
    },
    Print {
        expr: AstExpression,
        span: SourceSpan,
    },
    Return {
        expr: Option<AstExpression>,
        span: SourceSpan,
    },
    Expr {
        expr: AstExpression,
        span: SourceSpan,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl BinOp {
    pub fn symbol(self) -> char {
        match self {
            BinOp::Add => '+',
            BinOp::Sub => '-',
            BinOp::Mul => '*',
            BinOp::Div => '/',
        }
    }

    fn precedence(self) -> u8 {
        match self {
            BinOp::Add | BinOp::Sub => 1,
            BinOp::Mul | BinOp::Div => 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum AstExpression {
    Number {
        value: f64,
        span: SourceSpan,
    },
    Tensor {
        values: Vec<f64>,
        span: SourceSpan,
    },
    Var {
        name: String,
        span: SourceSpan,
    },
    Binary {
        op: BinOp,
        lhs: Box<AstExpression>,
        rhs: Box<AstExpression>,
        span: SourceSpan,
    },
    Call {
        callee: String,
        args: Vec<AstExpression>,
        span: SourceSpan,
    },
}

impl AstExpression {
    pub fn span(&self) -> SourceSpan {
        match self {
            AstExpression::Number { span, .. }
            | AstExpression::Tensor { span, .. }
            | AstExpression::Var { span, .. }
            | AstExpression::Binary { span, .. }
            | AstExpression::Call { span, .. } => *span,
        }
    }

    /// Structural equality that ignores source positions.
    pub fn same_shape(&self, other: &AstExpression) -> bool {
        use AstExpression::*;
        match (self, other) {
            (Number { value: a, .. }, Number { value: b, .. }) => a.to_bits() == b.to_bits(),
            (Tensor { values: a, .. }, Tensor { values: b, .. }) => {
                a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.to_bits() == y.to_bits())
            }
            (Var { name: a, .. }, Var { name: b, .. }) => a == b,
            (
                Binary {
                    op: o1,
                    lhs: l1,
                    rhs: r1,
                    ..
                },
                Binary {
                    op: o2,
                    lhs: l2,
                    rhs: r2,
                    ..
                },
            ) => o1 == o2 && l1.same_shape(l2) && r1.same_shape(r2),
            (
                Call {
                    callee: c1,
                    args: a1,
                    ..
                },
                Call {
                    callee: c2,
                    args: a2,
                    ..
                },
            ) => {
                c1 == c2 && a1.len() == a2.len() && a1.iter().zip(a2).all(|(x, y)| x.same_shape(y))
            }
            _ => false,
        }
    }
}

impl AstStatement {
    fn same_shape(&self, other: &AstStatement) -> bool {
        use AstStatement::*;
        match (self, other) {
            (
                VarDecl {
                    name: n1, init: e1, ..
                },
                VarDecl {
                    name: n2, init: e2, ..
                },
            ) => n1 == n2 && e1.same_shape(e2),
            (Print { expr: a, .. }, Print { expr: b, .. })
            | (Expr { expr: a, .. }, Expr { expr: b, .. }) => a.same_shape(b),
            (Return { expr: a, .. }, Return { expr: b, .. }) => match (a, b) {
                (None, None) => true,
                (Some(a), Some(b)) => a.same_shape(b),
                _ => false,
            },
            _ => false,
        }
    }
}

impl AstModule {
    /// Structural equality that ignores source positions.
    pub fn same_shape(&self, other: &AstModule) -> bool {
        self.functions.len() == other.functions.len()
            && self.functions.iter().zip(&other.functions).all(|(a, b)| {
                a.name == b.name
                    && a.params == b.params
                    && a.body.len() == b.body.len()
                    && a.body.iter().zip(&b.body).all(|(x, y)| x.same_shape(y))
            })
    }
}

fn write_number(out: &mut String, v: f64) {
    // `Display` for f64 never uses exponent notation and round-trips exactly.
    write!(out, "{v}").unwrap();
}

fn write_expr(out: &mut String, e: &AstExpression) {
    match e {
        AstExpression::Number { value, .. } => write_number(out, *value),
        AstExpression::Tensor { values, .. } => {
            out.push('[');
            for (i, v) in values.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                write_number(out, *v);
            }
            out.push(']');
        }
        AstExpression::Var { name, .. } => out.push_str(name),
        AstExpression::Binary { op, lhs, rhs, .. } => {
            let prec = op.precedence();
            let wrap_lhs =
                matches!(**lhs, AstExpression::Binary { op: l, .. } if l.precedence() < prec);
            // left-associative: an equal-precedence right operand needs parentheses
            let wrap_rhs = matches!(**rhs, AstExpression::Binary { op: r, .. } if r.precedence() <= prec)
                || matches!(**rhs, AstExpression::Number { value, .. } if value.is_sign_negative());
            write_operand(out, lhs, wrap_lhs);
            write!(out, " {} ", op.symbol()).unwrap();
            write_operand(out, rhs, wrap_rhs);
        }
        AstExpression::Call { callee, args, .. } => {
            out.push_str(callee);
            out.push('(');
            for (i, a) in args.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                write_expr(out, a);
            }
            out.push(')');
        }
    }
}

fn write_operand(out: &mut String, e: &AstExpression, wrap: bool) {
    if wrap {
        out.push('(');
        write_expr(out, e);
        out.push(')');
    } else {
        write_expr(out, e);
    }
}

/// Deterministic dump of a module: one line per statement, two-space indent.
pub fn ast_to_text(module: &AstModule) -> String {
    let mut out = String::new();
    for (i, f) in module.functions.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        writeln!(out, "def {}({}) {{", f.name, f.params.join(", ")).unwrap();
        for stmt in &f.body {
            out.push_str("  ");
            match stmt {
                AstStatement::VarDecl { name, init, .. } => {
                    write!(out, "var {name} = ").unwrap();
                    write_expr(&mut out, init);
                }
                AstStatement::Print { expr, .. } => {
                    out.push_str("print(");
                    write_expr(&mut out, expr);
                    out.push(')');
                }
                AstStatement::Return { expr, .. } => {
                    out.push_str("return");
                    if let Some(e) = expr {
                        out.push(' ');
                        write_expr(&mut out, e);
                    }
                }
                AstStatement::Expr { expr, .. } => write_expr(&mut out, expr),
            }
            out.push_str(";\n");
        }
        out.push_str("}\n");
    }
    out
}
