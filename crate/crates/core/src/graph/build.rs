use std::collections::HashMap;

use super::{AttrKind, AttrValue, Attribute, DspGraph, GraphError, OpCode, OpNode, ValueId};
use crate::frontend::{AstExpression, AstModule, AstStatement, BinOp, SourceSpan};

/// Result of lowering one expression: either a graph value or a literal
/// scalar not yet materialized (so it can feed an attribute without leaving
/// a dead constant behind).
#[derive(Debug, Clone, Copy)]
enum Val {
    Value(ValueId),
    Scalar(f64),
}

struct Builder {
    graph: DspGraph,
    env: HashMap<String, Val>,
    next: u32,
}

impl Builder {
    fn push(
        &mut self,
        opcode: OpCode,
        operands: Vec<ValueId>,
        attrs: Vec<Attribute>,
    ) -> Option<ValueId> {
        let results: Vec<ValueId> = (0..opcode.num_results())
            .map(|i| ValueId(self.next + i as u32))
            .collect();
        self.next += results.len() as u32;
        let first = results.first().copied();
        self.graph.ops.push(OpNode {
            results,
            opcode,
            operands,
            attrs,
            result_shapes: Vec::new(),
        });
        first
    }

    fn materialize(&mut self, v: Val) -> ValueId {
        match v {
            Val::Value(id) => id,
            Val::Scalar(x) => self
                .push(
                    OpCode::ConstTensor,
                    vec![],
                    vec![Attribute {
                        name: "values".into(),
                        value: AttrValue::Floats(vec![x]),
                    }],
                )
                .expect("const_tensor has a result"),
        }
    }

    fn expr(&mut self, e: &AstExpression) -> Result<Val, GraphError> {
        match e {
            AstExpression::Number { value, .. } => Ok(Val::Scalar(*value)),
            AstExpression::Tensor { values, .. } => Ok(Val::Value(
                self.push(
                    OpCode::ConstTensor,
                    vec![],
                    vec![Attribute {
                        name: "values".into(),
                        value: AttrValue::Floats(values.clone()),
                    }],
                )
                .unwrap(),
            )),
            AstExpression::Var { name, span } => {
                self.env
                    .get(name)
                    .copied()
                    .ok_or_else(|| GraphError::UndefinedVariable {
                        name: name.clone(),
                        span: *span,
                    })
            }
            AstExpression::Binary { op, lhs, rhs, .. } => {
                let l = self.expr(lhs)?;
                let r = self.expr(rhs)?;
                if let (Val::Scalar(a), Val::Scalar(b)) = (l, r) {
                    // literal arithmetic folds; division by a literal zero is
                    // left to the runtime so it reports DivisionByZero
                    if !(*op == BinOp::Div && b == 0.0) {
                        return Ok(Val::Scalar(match op {
                            BinOp::Add => a + b,
                            BinOp::Sub => a - b,
                            BinOp::Mul => a * b,
                            BinOp::Div => a / b,
                        }));
                    }
                }
                let opcode = match op {
                    BinOp::Add => OpCode::Add,
                    BinOp::Sub => OpCode::Sub,
                    BinOp::Mul => OpCode::Mul,
                    BinOp::Div => OpCode::Div,
                };
                let l = self.materialize(l);
                let r = self.materialize(r);
                Ok(Val::Value(self.push(opcode, vec![l, r], vec![]).unwrap()))
            }
            AstExpression::Call { callee, args, span } => self.call(callee, args, *span),
        }
    }

    fn call(
        &mut self,
        callee: &str,
        args: &[AstExpression],
        span: SourceSpan,
    ) -> Result<Val, GraphError> {
        let opcode = match OpCode::from_builtin(callee) {
            Some(op) if op != OpCode::Print => op,
            _ => {
                return Err(GraphError::UnknownBuiltin {
                    name: callee.to_string(),
                    span,
                })
            }
        };
        let schema = opcode.attr_schema();
        let expected = opcode.num_operands() + schema.len();
        if args.len() != expected {
            return Err(GraphError::ArityMismatch {
                op: callee.to_string(),
                expected,
                got: args.len(),
                span,
            });
        }

        let (operand_args, attr_args) = args.split_at(opcode.num_operands());
        let mut operands = Vec::with_capacity(operand_args.len());
        for a in operand_args {
            let v = self.expr(a)?;
            operands.push(self.materialize(v));
        }
        let mut attrs = Vec::with_capacity(schema.len());
        for (arg, (name, kind)) in attr_args.iter().zip(schema) {
            let not_const = |kind| GraphError::NotConstant {
                op: callee.to_string(),
                attr: name.to_string(),
                kind,
                span: arg.span(),
            };
            let value = match self.expr(arg)? {
                Val::Scalar(x) => x,
                Val::Value(_) => {
                    return Err(not_const(match kind {
                        AttrKind::Int => "integer",
                        _ => "number",
                    }))
                }
            };
            let value = match kind {
                AttrKind::Int if value.fract() == 0.0 && value.abs() < 9.0e15 => {
                    AttrValue::Int(value as i64)
                }
                AttrKind::Int => return Err(not_const("integer")),
                _ => AttrValue::Float(value),
            };
            attrs.push(Attribute {
                name: name.to_string(),
                value,
            });
        }
        Ok(Val::Value(self.push(opcode, operands, attrs).unwrap()))
    }
}

/// Converts the `main` function of a parsed module into a DSP graph.
///
/// Parameters of `main` become `input` ops. `print(e)` and `return e` both
/// produce `print` ops. Shapes are left empty; see [`super::infer_shapes`].
pub fn build_graph(module: &AstModule) -> Result<DspGraph, GraphError> {
    let main = module.main().ok_or_else(|| GraphError::UndefinedVariable {
        name: "main".into(),
        span: SourceSpan::default(),
    })?;
    let mut b = Builder {
        graph: DspGraph::default(),
        env: HashMap::new(),
        next: 0,
    };
    for p in &main.params {
        let id = b
            .push(
                OpCode::Input,
                vec![],
                vec![Attribute {
                    name: "name".into(),
                    value: AttrValue::Str(p.clone()),
                }],
            )
            .unwrap();
        b.env.insert(p.clone(), Val::Value(id));
    }
    for stmt in &main.body {
        match stmt {
            AstStatement::VarDecl { name, init, .. } => {
                let v = b.expr(init)?;
                b.env.insert(name.clone(), v);
            }
            AstStatement::Print { expr, .. }
            | AstStatement::Return {
                expr: Some(expr), ..
            } => {
                let v = b.expr(expr)?;
                let id = b.materialize(v);
                b.push(OpCode::Print, vec![id], vec![]);
            }
            AstStatement::Return { expr: None, .. } => {}
            AstStatement::Expr { expr, .. } => {
                b.expr(expr)?;
            }
        }
    }
    Ok(b.graph)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::parse_source;

    fn build(src: &str) -> Result<DspGraph, GraphError> {
        build_graph(&parse_source(src).unwrap())
    }

    fn opcodes(g: &DspGraph) -> Vec<OpCode> {
        g.ops.iter().map(|o| o.opcode).collect()
    }

    #[test]
    fn literal_and_print() {
        let g = build("def main() { var a = [1, 2]; print(a); }").unwrap();
        assert_eq!(opcodes(&g), vec![OpCode::ConstTensor, OpCode::Print]);
        assert_eq!(g.outputs(), vec![ValueId(0)]);
    }

    #[test]
    fn delay_attribute() {
        let g = build("def main(x) { var y = delay(x, 2); }").unwrap();
        assert_eq!(opcodes(&g), vec![OpCode::Input, OpCode::Delay]);
        assert_eq!(g.ops[1].operands, vec![ValueId(0)]);
        assert_eq!(g.ops[1].int_attr("k"), Some(2));
        assert_eq!(g.inputs(), vec![("x".to_string(), ValueId(0))]);
    }

    #[test]
    fn typo_is_unknown_builtin() {
        let err = build("def main(x) { var y = dleay(x, 2); }").unwrap_err();
        assert!(matches!(err, GraphError::UnknownBuiltin { name, .. } if name == "dleay"));
    }

    #[test]
    fn arity_and_undefined() {
        assert!(matches!(
            build("def main(x) { var y = delay(x); }"),
            Err(GraphError::ArityMismatch {
                expected: 2,
                got: 1,
                ..
            })
        ));
        assert!(matches!(
            build("def main() { print(z); }"),
            Err(GraphError::UndefinedVariable { name, .. }) if name == "z"
        ));
        assert!(matches!(
            build("def main(x) { var y = delay(x, 1.5); }"),
            Err(GraphError::NotConstant { .. })
        ));
        assert!(matches!(
            build("def main(x) { var y = delay(x, x); }"),
            Err(GraphError::NotConstant { .. })
        ));
        // user functions are not callable
        assert!(matches!(
            build("def helper() { return; } def main() { var a = helper(); }"),
            Err(GraphError::UnknownBuiltin { .. })
        ));
    }

    #[test]
    fn scalar_literals_fold_and_feed_attributes() {
        let g =
            build("def main(x) { var k = 1 + 1; var y = delay(x, k); print(1 + 2 * 3); }").unwrap();
        assert_eq!(
            opcodes(&g),
            vec![
                OpCode::Input,
                OpCode::Delay,
                OpCode::ConstTensor,
                OpCode::Print
            ]
        );
        assert_eq!(g.ops[1].int_attr("k"), Some(2));
        assert_eq!(g.ops[2].attr("values"), Some(&AttrValue::Floats(vec![7.0])));
    }

    #[test]
    fn no_rewriter_opcodes_from_source() {
        let g = build(
            "def main(x) { var h = lowPassFIRFilter(5, 1.0) * hammingWindow(5); \
             var re = dft1dreal(x); var im = dft1dimg(x); print(firFilterResponse(x, h) + re + im); }",
        )
        .unwrap();
        assert!(g.ops.iter().all(|o| !o.opcode.is_rewriter_created()));
    }
}
