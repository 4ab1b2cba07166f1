//! Recursive-descent parser.
//!
//! ```text
//! module  := funcdef+
//! funcdef := "def" NAME "(" [IDENT {"," IDENT}] ")" "{" stmt* "}"
//! stmt    := "var" IDENT "=" expr ";" | "print" "(" expr ")" ";"
//!          | "return" [expr] ";" | expr ";"
//! expr    := term {("+" | "-") term}
//! term    := unary {("*" | "/") unary}
//! unary   := NUMBER | "-" NUMBER | "[" num {"," num} "]" | IDENT
//!          | IDENT "(" [expr {"," expr}] ")" | "(" expr ")"
//! num     := NUMBER | "-" NUMBER
//! ```

use std::collections::HashSet;

use super::ast::{AstExpression, AstFunction, AstModule, AstStatement, BinOp};
use super::lexer::{Token, TokenKind};
use super::{FrontendError, SourceSpan};

struct Parser<'t> {
    tokens: &'t [Token],
    pos: usize,
}

type PResult<T> = Result<T, FrontendError>;

impl<'t> Parser<'t> {
    fn peek(&self) -> &'t Token {
        &self.tokens[self.pos.min(self.tokens.len() - 1)]
    }

    fn peek_kind(&self) -> TokenKind {
        self.peek().kind
    }

    fn peek_nth_kind(&self, n: usize) -> TokenKind {
        self.tokens
            .get(self.pos + n)
            .map_or(TokenKind::Eof, |t| t.kind)
    }

    fn advance(&mut self) -> &'t Token {
        let tok = self.peek();
        if tok.kind != TokenKind::Eof {
            self.pos += 1;
        }
        tok
    }

    fn error(&self, expected: impl Into<String>) -> FrontendError {
        let tok = self.peek();
        FrontendError::Parse {
            span: tok.span,
            expected: expected.into(),
            found: if tok.kind == TokenKind::Eof {
                tok.kind.describe().to_string()
            } else {
                format!("`{}`", tok.text)
            },
        }
    }

    fn expect(&mut self, kind: TokenKind) -> PResult<&'t Token> {
        if self.peek_kind() == kind {
            Ok(self.advance())
        } else {
            Err(self.error(kind.describe()))
        }
    }

    fn expect_ident(&mut self) -> PResult<&'t Token> {
        self.expect(TokenKind::Ident)
    }

    fn module(&mut self) -> PResult<AstModule> {
        let mut functions: Vec<AstFunction> = Vec::new();
        let mut seen = HashSet::new();
        let mut main_span = None;
        while self.peek_kind() != TokenKind::Eof {
            let func = self.function()?;
            if func.name == "main" {
                if let Some(first) = main_span {
                    return Err(FrontendError::DuplicateMain {
                        span: func.span,
                        first,
                    });
                }
                main_span = Some(func.span);
            }
            if !seen.insert(func.name.clone()) {
                return Err(FrontendError::DuplicateName {
                    span: func.span,
                    name: func.name,
                });
            }
            functions.push(func);
        }
        if main_span.is_none() {
            return Err(FrontendError::MissingMain {
                span: self.peek().span,
            });
        }
        Ok(AstModule { functions })
    }

    fn function(&mut self) -> PResult<AstFunction> {
        if self.peek_kind() != TokenKind::Def {
            return Err(self.error("`def`"));
        }
        self.advance();
        let name_tok = match self.peek_kind() {
            TokenKind::Ident | TokenKind::Main => self.advance(),
            _ => return Err(self.error("function name")),
        };
        self.expect(TokenKind::LParen)?;
        let mut params: Vec<String> = Vec::new();
        if self.peek_kind() != TokenKind::RParen {
            loop {
                let p = self.expect_ident()?;
                if params.contains(&p.text) {
                    return Err(FrontendError::DuplicateName {
                        span: p.span,
                        name: p.text.clone(),
                    });
                }
                params.push(p.text.clone());
                if self.peek_kind() == TokenKind::Comma {
                    self.advance();
                } else {
                    break;
                }
            }
        }
        self.expect(TokenKind::RParen)?;
        self.expect(TokenKind::LBrace)?;

        let mut names: HashSet<String> = params.iter().cloned().collect();
        let mut body = Vec::new();
        while !matches!(self.peek_kind(), TokenKind::RBrace | TokenKind::Eof) {
            let stmt = self.statement()?;
            if let AstStatement::VarDecl { name, span, .. } = &stmt {
                if !names.insert(name.clone()) {
                    return Err(FrontendError::DuplicateName {
                        span: *span,
                        name: name.clone(),
                    });
                }
            }
            body.push(stmt);
        }
        self.expect(TokenKind::RBrace)?;
        Ok(AstFunction {
            name: name_tok.text.clone(),
            params,
            body,
            span: name_tok.span,
        })
    }

    fn statement(&mut self) -> PResult<AstStatement> {
        let start = self.peek().span;
        let stmt = match self.peek_kind() {
            TokenKind::Var => {
                self.advance();
                let name = self.expect_ident()?;
                self.expect(TokenKind::Assign)?;
                let init = self.expr()?;
                AstStatement::VarDecl {
                    name: name.text.clone(),
                    init,
                    span: name.span,
                }
            }
            TokenKind::Print => {
                self.advance();
                self.expect(TokenKind::LParen)?;
                let expr = self.expr()?;
                self.expect(TokenKind::RParen)?;
                AstStatement::Print { expr, span: start }
            }
            TokenKind::Return => {
                self.advance();
                let expr = if self.peek_kind() == TokenKind::Semi {
                    None
                } else {
                    Some(self.expr()?)
                };
                AstStatement::Return { expr, span: start }
            }
            _ => AstStatement::Expr {
                expr: self.expr()?,
                span: start,
            },
        };
        self.expect(TokenKind::Semi)?;
        Ok(stmt)
    }

    fn expr(&mut self) -> PResult<AstExpression> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek_kind() {
                TokenKind::Plus => BinOp::Add,
                TokenKind::Minus => BinOp::Sub,
                _ => return Ok(lhs),
            };
            let span = self.advance().span;
            let rhs = self.term()?;
            lhs = AstExpression::Binary {
                op,
                lhs: Box::new(lhs),
                rhs: Box::new(rhs),
                span,
            };
        }
    }

    fn term(&mut self) -> PResult<AstExpression> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek_kind() {
                TokenKind::Star => BinOp::Mul,
                TokenKind::Slash => BinOp::Div,
                _ => return Ok(lhs),
            };
            let span = self.advance().span;
            let rhs = self.unary()?;
            lhs = AstExpression::Binary {
                op,
                lhs: Box::new(lhs),
                rhs: Box::new(rhs),
                span,
            };
        }
    }

    fn signed_number(&mut self) -> PResult<(f64, SourceSpan)> {
        let start = self.peek().span;
        let negative = self.peek_kind() == TokenKind::Minus;
        if negative {
            self.advance();
        }
        if self.peek_kind() != TokenKind::Number {
            return Err(self.error("number"));
        }
        let tok = self.advance();
        let value: f64 = tok.text.parse().map_err(|_| FrontendError::Parse {
            span: tok.span,
            expected: "number".into(),
            found: format!("`{}`", tok.text),
        })?;
        Ok((if negative { -value } else { value }, start))
    }

    fn unary(&mut self) -> PResult<AstExpression> {
        match self.peek_kind() {
            TokenKind::Number | TokenKind::Minus
                if self.peek_kind() == TokenKind::Number
                    || self.peek_nth_kind(1) == TokenKind::Number =>
            {
                let (value, span) = self.signed_number()?;
                Ok(AstExpression::Number { value, span })
            }
            TokenKind::LBracket => {
                let span = self.advance().span;
                let mut values = vec![self.signed_number()?.0];
                while self.peek_kind() == TokenKind::Comma {
                    self.advance();
                    values.push(self.signed_number()?.0);
                }
                self.expect(TokenKind::RBracket)?;
                Ok(AstExpression::Tensor { values, span })
            }
            TokenKind::Ident => {
                let tok = self.advance();
                if self.peek_kind() != TokenKind::LParen {
                    return Ok(AstExpression::Var {
                        name: tok.text.clone(),
                        span: tok.span,
                    });
                }
                self.advance();
                let mut args = Vec::new();
                if self.peek_kind() != TokenKind::RParen {
                    args.push(self.expr()?);
                    while self.peek_kind() == TokenKind::Comma {
                        self.advance();
                        args.push(self.expr()?);
                    }
                }
                self.expect(TokenKind::RParen)?;
                Ok(AstExpression::Call {
                    callee: tok.text.clone(),
                    args,
                    span: tok.span,
                })
            }
            TokenKind::LParen => {
                self.advance();
                let inner = self.expr()?;
                self.expect(TokenKind::RParen)?;
                Ok(inner)
            }
            _ => Err(self.error("expression")),
        }
    }
}

/// Parses a token stream produced by [`super::tokenize`].
pub fn parse_module(tokens: &[Token]) -> Result<AstModule, FrontendError> {
    if tokens.last().map(|t| t.kind) != Some(TokenKind::Eof) {
        return Err(FrontendError::Parse {
            span: tokens.last().map(|t| t.span).unwrap_or_default(),
            expected: "end of input marker".into(),
            found: "unterminated token stream".into(),
        });
    }
    Parser { tokens, pos: 0 }.module()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::{parse_source, tokenize};

    fn parse(src: &str) -> Result<AstModule, FrontendError> {
        parse_module(&tokenize(src)?)
    }

    #[test]
    fn main_with_two_statements() {
        let m = parse("def main() { var a = [1,2]; print(a); }").unwrap();
        assert_eq!(m.functions.len(), 1);
        let f = &m.functions[0];
        assert_eq!(f.name, "main");
        assert_eq!(f.body.len(), 2);
        assert!(
            matches!(&f.body[0], AstStatement::VarDecl { name, init: AstExpression::Tensor { values, .. }, .. }
            if name == "a" && values == &[1.0, 2.0])
        );
        assert!(
            matches!(&f.body[1], AstStatement::Print { expr: AstExpression::Var { name, .. }, .. } if name == "a")
        );
    }

    #[test]
    fn call_arguments() {
        let m = parse("def main(b) { var a = delay(b, 2); }").unwrap();
        let AstStatement::VarDecl { init, .. } = &m.functions[0].body[0] else {
            panic!()
        };
        let AstExpression::Call { callee, args, .. } = init else {
            panic!("expected call, got {init:?}")
        };
        assert_eq!(callee, "delay");
        assert!(matches!(&args[0], AstExpression::Var { name, .. } if name == "b"));
        assert!(matches!(args[1], AstExpression::Number { value, .. } if value == 2.0));
    }

    #[test]
    fn missing_initializer() {
        let err = parse("def main() { var a = ; }").unwrap_err();
        match err {
            FrontendError::Parse {
                span,
                expected,
                found,
            } => {
                assert_eq!(expected, "expression");
                assert_eq!(found, "`;`");
                assert_eq!((span.line, span.column), (1, 22));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn precedence_and_associativity() {
        let m = parse_source(
            "def main() { var a = 1 + 2 * 3; var b = 8 - 4 - 2; var c = (1 + 2) * 3; }",
        )
        .unwrap();
        let text = crate::frontend::ast_to_text(&m);
        assert_eq!(
            text,
            "def main() {\n  var a = 1 + 2 * 3;\n  var b = 8 - 4 - 2;\n  var c = (1 + 2) * 3;\n}\n"
        );
        let AstStatement::VarDecl { init, .. } = &m.functions[0].body[1] else {
            panic!()
        };
        // (8 - 4) - 2
        let AstExpression::Binary { lhs, .. } = init else {
            panic!()
        };
        assert!(matches!(
            **lhs,
            AstExpression::Binary { op: BinOp::Sub, .. }
        ));
    }

    #[test]
    fn negative_literals() {
        let m =
            parse("def main() { var q = quantize([0.5, -1], 4, -1, 1); var d = 3 - -2; }").unwrap();
        let AstStatement::VarDecl { init, .. } = &m.functions[0].body[0] else {
            panic!()
        };
        let AstExpression::Call { args, .. } = init else {
            panic!()
        };
        assert!(matches!(&args[0], AstExpression::Tensor { values, .. } if values == &[0.5, -1.0]));
        assert!(matches!(args[2], AstExpression::Number { value, .. } if value == -1.0));
    }

    #[test]
    fn structural_errors() {
        assert!(matches!(
            parse("def main() {} def main() {}"),
            Err(FrontendError::DuplicateMain { .. })
        ));
        assert!(matches!(
            parse("def f() {}"),
            Err(FrontendError::MissingMain { .. })
        ));
        assert!(matches!(
            parse("def main(x, x) {}"),
            Err(FrontendError::DuplicateName { .. })
        ));
        assert!(matches!(
            parse("def main() { var a = 1; var a = 2; }"),
            Err(FrontendError::DuplicateName { .. })
        ));
        assert!(matches!(
            parse("def main() { var a = [] ; }"),
            Err(FrontendError::Parse { .. })
        ));
    }

    #[test]
    fn return_forms() {
        let m = parse("def main(x) { return; } def helper() { return 1 + 1; }").unwrap();
        assert!(matches!(
            m.functions[0].body[0],
            AstStatement::Return { expr: None, .. }
        ));
        assert!(matches!(
            m.functions[1].body[0],
            AstStatement::Return { expr: Some(_), .. }
        ));
    }
}
