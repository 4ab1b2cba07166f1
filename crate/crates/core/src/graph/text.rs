//! Textual form of a [`DspGraph`], one op per line:
//!
//! ```text
//! %0 = input() {name="x"} : tensor<8>
//! %1 = const_tensor() {values=[1,2]} : tensor<2>
//! %2, %3 = dft1d_fused(%0) : tensor<8>, tensor<8>
//! print(%2)
//! ```
//!
//! Attribute kinds come from the opcode schema, so values need no type
//! suffix. Floats print in shortest round-trip form. Shapes are omitted for
//! graphs that have not been through shape inference.

use std::fmt::Write;

use super::{
    AttrKind, AttrValue, Attribute, DspGraph, GraphError, OpCode, OpNode, TensorShape, ValueId,
};

fn write_attr(out: &mut String, v: &AttrValue) {
    match v {
        AttrValue::Int(i) => write!(out, "{i}").unwrap(),
        AttrValue::Float(f) => write!(out, "{f}").unwrap(),
        AttrValue::Floats(vs) => {
            out.push('[');
            for (i, f) in vs.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                write!(out, "{f}").unwrap();
            }
            out.push(']');
        }
        AttrValue::Str(s) => write!(out, "{s:?}").unwrap(),
    }
}

/// One op line, without the trailing newline.
pub fn op_to_text(op: &OpNode) -> String {
    let mut out = String::new();
    if !op.results.is_empty() {
        let names: Vec<String> = op.results.iter().map(ValueId::to_string).collect();
        write!(out, "{} = ", names.join(", ")).unwrap();
    }
    let operands: Vec<String> = op.operands.iter().map(ValueId::to_string).collect();
    write!(out, "{}({})", op.opcode.name(), operands.join(", ")).unwrap();
    if !op.attrs.is_empty() {
        out.push_str(" {");
        for (i, a) in op.attrs.iter().enumerate() {
            if i > 0 {
                out.push_str(", ");
            }
            write!(out, "{}=", a.name).unwrap();
            write_attr(&mut out, &a.value);
        }
        out.push('}');
    }
    if !op.result_shapes.is_empty() {
        let shapes: Vec<String> = op
            .result_shapes
            .iter()
            .map(TensorShape::to_string)
            .collect();
        write!(out, " : {}", shapes.join(", ")).unwrap();
    }
    out
}

pub fn graph_to_text(graph: &DspGraph) -> String {
    let mut out = String::new();
    for op in &graph.ops {
        out.push_str(&op_to_text(op));
        out.push('\n');
    }
    out
}

struct LineParser<'a> {
    line_no: u32,
    text: &'a str,
    pos: usize,
}

impl<'a> LineParser<'a> {
    fn err(&self, message: impl Into<String>) -> GraphError {
        GraphError::Text {
            line: self.line_no,
            column: self.text[..self.pos].chars().count() as u32 + 1,
            message: message.into(),
        }
    }

    fn rest(&self) -> &'a str {
        &self.text[self.pos..]
    }

    fn skip_ws(&mut self) {
        let trimmed = self.rest().trim_start();
        self.pos = self.text.len() - trimmed.len();
    }

    fn eat(&mut self, s: &str) -> bool {
        self.skip_ws();
        if self.rest().starts_with(s) {
            self.pos += s.len();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, s: &str) -> Result<(), GraphError> {
        if self.eat(s) {
            Ok(())
        } else {
            Err(self.err(format!("expected `{s}`")))
        }
    }

    fn take_while(&mut self, pred: impl Fn(char) -> bool) -> &'a str {
        self.skip_ws();
        let start = self.pos;
        let len: usize = self
            .rest()
            .chars()
            .take_while(|c| pred(*c))
            .map(char::len_utf8)
            .sum();
        self.pos += len;
        &self.text[start..self.pos]
    }

    fn value_id(&mut self) -> Result<ValueId, GraphError> {
        self.expect("%")?;
        let digits = self.take_while(|c| c.is_ascii_digit());
        digits
            .parse()
            .map(ValueId)
            .map_err(|_| self.err("expected value number"))
    }

    fn number_text(&mut self) -> &'a str {
        self.take_while(|c| c.is_ascii_alphanumeric() || matches!(c, '.' | '-' | '+'))
    }

    fn float(&mut self) -> Result<f64, GraphError> {
        let t = self.number_text();
        t.parse()
            .map_err(|_| self.err(format!("invalid number `{t}`")))
    }

    fn attr_value(&mut self, kind: AttrKind) -> Result<AttrValue, GraphError> {
        Ok(match kind {
            AttrKind::Int => {
                let t = self.number_text();
                AttrValue::Int(
                    t.parse()
                        .map_err(|_| self.err(format!("invalid integer `{t}`")))?,
                )
            }
            AttrKind::Float => AttrValue::Float(self.float()?),
            AttrKind::Floats => {
                self.expect("[")?;
                let mut vs = Vec::new();
                if !self.eat("]") {
                    loop {
                        vs.push(self.float()?);
                        if self.eat("]") {
                            break;
                        }
                        self.expect(",")?;
                    }
                }
                AttrValue::Floats(vs)
            }
            AttrKind::Str => {
                self.expect("\"")?;
                let body = self.take_while(|c| c != '"');
                self.expect("\"")?;
                AttrValue::Str(body.to_string())
            }
        })
    }

    fn shape(&mut self) -> Result<TensorShape, GraphError> {
        self.expect("tensor<")?;
        let dynamic = self.eat("?");
        let digits = self.take_while(|c| c.is_ascii_digit());
        let len = digits
            .parse()
            .map_err(|_| self.err("expected tensor length"))?;
        self.expect(">")?;
        Ok(TensorShape { len, dynamic })
    }

    fn op(&mut self) -> Result<OpNode, GraphError> {
        let mut results = Vec::new();
        self.skip_ws();
        if self.rest().starts_with('%') {
            loop {
                results.push(self.value_id()?);
                if !self.eat(",") {
                    break;
                }
            }
            self.expect("=")?;
        }
        let name = self.take_while(|c| c.is_ascii_alphanumeric() || c == '_');
        let opcode =
            OpCode::from_name(name).ok_or_else(|| self.err(format!("unknown opcode `{name}`")))?;
        self.expect("(")?;
        let mut operands = Vec::new();
        if !self.eat(")") {
            loop {
                operands.push(self.value_id()?);
                if self.eat(")") {
                    break;
                }
                self.expect(",")?;
            }
        }
        let mut attrs = Vec::new();
        if self.eat("{") {
            loop {
                let name = self.take_while(|c| c.is_ascii_alphanumeric() || c == '_');
                let kind = opcode
                    .attr_schema()
                    .iter()
                    .find(|(n, _)| *n == name)
                    .map(|(_, k)| *k)
                    .ok_or_else(|| self.err(format!("{opcode} has no attribute `{name}`")))?;
                self.expect("=")?;
                let value = self.attr_value(kind)?;
                attrs.push(Attribute {
                    name: name.to_string(),
                    value,
                });
                if self.eat("}") {
                    break;
                }
                self.expect(",")?;
            }
        }
        let mut result_shapes = Vec::new();
        if self.eat(":") {
            loop {
                result_shapes.push(self.shape()?);
                if !self.eat(",") {
                    break;
                }
            }
        }
        self.skip_ws();
        if !self.rest().is_empty() {
            return Err(self.err("trailing characters"));
        }
        Ok(OpNode {
            results,
            opcode,
            operands,
            attrs,
            result_shapes,
        })
    }
}

/// Parses the output of [`graph_to_text`]. Blank lines and `//` comment
/// lines are ignored. Structural validity is left to [`super::verify_graph`].
pub fn parse_graph_text(text: &str) -> Result<DspGraph, GraphError> {
    let mut ops = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with("//") {
            continue;
        }
        let mut p = LineParser {
            line_no: i as u32 + 1,
            text: line,
            pos: 0,
        };
        ops.push(p.op()?);
    }
    Ok(DspGraph { ops })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::parse_source;
    use crate::graph::{build_graph, infer_shapes};

    #[test]
    fn const_tensor_line() {
        let g = build_graph(&parse_source("def main() { var a = [1, 2]; }").unwrap()).unwrap();
        let g = infer_shapes(&g).unwrap();
        assert_eq!(
            graph_to_text(&g),
            "%0 = const_tensor() {values=[1,2]} : tensor<2>\n"
        );
    }

    #[test]
    fn two_result_line_round_trips() {
        let text = "%0 = input() {name=\"x\"} : tensor<8>\n\
                    %1, %2 = dft1d_fused(%0) : tensor<8>, tensor<8>\n\
                    print(%2)\n";
        let g = parse_graph_text(text).unwrap();
        assert_eq!(g.ops[1].results, vec![ValueId(1), ValueId(2)]);
        assert_eq!(graph_to_text(&g), text);
    }

    #[test]
    fn float_attributes_round_trip_exactly() {
        let text = "%0 = low_pass_fir_coeffs() {L=101, wc=0.9424777960769379} : tensor<101>\n\
                    %1 = range_vec() {start=-0.5, step=0.001, n=3} : tensor<3>\n";
        let g = parse_graph_text(text).unwrap();
        assert_eq!(g.ops[0].float_attr("wc"), Some(0.3 * std::f64::consts::PI));
        assert_eq!(graph_to_text(&g), text);
    }

    #[test]
    fn errors_carry_position() {
        let err = parse_graph_text("%0 = input() {name=\"x\"}\n%1 = bogus(%0)\n").unwrap_err();
        assert!(
            matches!(
                err,
                GraphError::Text {
                    line: 2,
                    column: 11,
                    ..
                }
            ),
            "{err:?}"
        );
        let err = parse_graph_text("%0 = delay(%1) {q=1}").unwrap_err();
        assert!(matches!(err, GraphError::Text { line: 1, .. }));
    }
}
