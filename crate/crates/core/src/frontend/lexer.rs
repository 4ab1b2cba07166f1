//! Tokenizer for `.dsp` sources.
//!
//! Whitespace (including `\r` from CRLF files) and `#` comments are skipped.
//! Every token keeps the exact source slice it was read from, so the token
//! stream plus the skipped gaps reproduces the input byte for byte.

use std::fmt;

use super::{FrontendError, SourceSpan};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TokenKind {
    Def,
    Main,
    Var,
    Print,
    Return,
    Ident,
    Number,
    Plus,
    Minus,
    Star,
    Slash,
    LParen,
    RParen,
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    Comma,
    Semi,
    Assign,
    Eof,
}

impl TokenKind {
    pub fn describe(self) -> &'static str {
        match self {
            TokenKind::Def => "`def`",
            TokenKind::Main => "`main`",
            TokenKind::Var => "`var`",
            TokenKind::Print => "`print`",
            TokenKind::Return => "`return`",
            TokenKind::Ident => "identifier",
            TokenKind::Number => "number",
            TokenKind::Plus => "`+`",
            TokenKind::Minus => "`-`",
            TokenKind::Star => "`*`",
            TokenKind::Slash => "`/`",
            TokenKind::LParen => "`(`",
            TokenKind::RParen => "`)`",
            TokenKind::LBrace => "`{`",
            TokenKind::RBrace => "`}`",
            TokenKind::LBracket => "`[`",
            TokenKind::RBracket => "`]`",
            TokenKind::Comma => "`,`",
            TokenKind::Semi => "`;`",
            TokenKind::Assign => "`=`",
            TokenKind::Eof => "end of input",
        }
    }
}

impl fmt::Display for TokenKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.describe())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub kind: TokenKind,
    pub text: String,
    pub span: SourceSpan,
}

fn keyword(word: &str) -> Option<TokenKind> {
    Some(match word {
        "def" => TokenKind::Def,
        "main" => TokenKind::Main,
        "var" => TokenKind::Var,
        "print" => TokenKind::Print,
        "return" => TokenKind::Return,
        _ => return None,
    })
}

fn punct(c: char) -> Option<TokenKind> {
    Some(match c {
        '+' => TokenKind::Plus,
        '-' => TokenKind::Minus,
        '*' => TokenKind::Star,
        '/' => TokenKind::Slash,
        '(' => TokenKind::LParen,
        ')' => TokenKind::RParen,
        '{' => TokenKind::LBrace,
        '}' => TokenKind::RBrace,
        '[' => TokenKind::LBracket,
        ']' => TokenKind::RBracket,
        ',' => TokenKind::Comma,
        ';' => TokenKind::Semi,
        '=' => TokenKind::Assign,
        _ => return None,
    })
}

struct Cursor<'a> {
    src: &'a str,
    offset: usize,
    line: u32,
    column: u32,
}

impl<'a> Cursor<'a> {
    fn peek(&self) -> Option<char> {
        self.src[self.offset..].chars().next()
    }

    fn peek_second(&self) -> Option<char> {
        let mut it = self.src[self.offset..].chars();
        it.next();
        it.next()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.offset += c.len_utf8();
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    fn bump_while(&mut self, pred: impl Fn(char) -> bool) {
        while self.peek().is_some_and(&pred) {
            self.bump();
        }
    }

    fn span_from(&self, start: usize, line: u32, column: u32) -> SourceSpan {
        SourceSpan {
            line,
            column,
            length: self.src[start..self.offset].chars().count() as u32,
            offset: start,
        }
    }
}

/// Splits `source` into tokens. The returned stream always ends with
/// [`TokenKind::Eof`].
pub fn tokenize(source: &str) -> Result<Vec<Token>, FrontendError> {
    let mut cur = Cursor {
        src: source,
        offset: 0,
        line: 1,
        column: 1,
    };
    let mut tokens = Vec::new();

    while let Some(c) = cur.peek() {
        if c.is_whitespace() {
            cur.bump();
            continue;
        }
        if c == '#' {
            cur.bump_while(|c| c != '\n');
            continue;
        }

        let (start, line, column) = (cur.offset, cur.line, cur.column);
        let kind = if c.is_ascii_alphabetic() || c == '_' {
            cur.bump_while(|c| c.is_ascii_alphanumeric() || c == '_');
            keyword(&source[start..cur.offset]).unwrap_or(TokenKind::Ident)
        } else if c.is_ascii_digit() {
            cur.bump_while(|c| c.is_ascii_digit());
            if cur.peek() == Some('.') && cur.peek_second().is_some_and(|c| c.is_ascii_digit()) {
                cur.bump();
                cur.bump_while(|c| c.is_ascii_digit());
            }
            TokenKind::Number
        } else if let Some(kind) = punct(c) {
            cur.bump();
            kind
        } else {
            cur.bump();
            return Err(FrontendError::Lex {
                span: cur.span_from(start, line, column),
                message: format!("unexpected character {c:?}"),
            });
        };

        tokens.push(Token {
            kind,
            text: source[start..cur.offset].to_string(),
            span: cur.span_from(start, line, column),
        });
    }

    tokens.push(Token {
        kind: TokenKind::Eof,
        text: String::new(),
        span: SourceSpan {
            line: cur.line,
            column: cur.column,
            length: 0,
            offset: cur.offset,
        },
    });
    Ok(tokens)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn kinds(src: &str) -> Vec<TokenKind> {
        tokenize(src).unwrap().into_iter().map(|t| t.kind).collect()
    }

    #[test]
    fn empty_input_is_just_eof() {
        assert_eq!(kinds(""), vec![TokenKind::Eof]);
    }

    #[test]
    fn var_decl_with_tensor_literal() {
        use TokenKind::*;
        let toks = tokenize("var a = [1, 2];").unwrap();
        let got: Vec<_> = toks.iter().map(|t| (t.kind, t.text.as_str())).collect();
        assert_eq!(
            got,
            vec![
                (Var, "var"),
                (Ident, "a"),
                (Assign, "="),
                (LBracket, "["),
                (Number, "1"),
                (Comma, ","),
                (Number, "2"),
                (RBracket, "]"),
                (Semi, ";"),
                (Eof, ""),
            ]
        );
    }

    #[test]
    fn unknown_character_reports_its_position() {
        let err = tokenize("var x = 3 @ 4;").unwrap_err();
        match err {
            FrontendError::Lex { span, .. } => {
                assert_eq!((span.line, span.column, span.length), (1, 11, 1));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn comments_and_crlf_are_skipped() {
        use TokenKind::*;
        let toks = tokenize("# header\r\nvar b = 0.25; # trailing\r\nprint(b);").unwrap();
        assert_eq!(
            toks.iter().map(|t| t.kind).collect::<Vec<_>>(),
            vec![Var, Ident, Assign, Number, Semi, Print, LParen, Ident, RParen, Semi, Eof]
        );
        assert_eq!(toks[3].text, "0.25");
        assert_eq!((toks[5].span.line, toks[5].span.column), (3, 1));
    }

    #[test]
    fn trailing_dot_is_not_part_of_a_number() {
        let err = tokenize("1.").unwrap_err();
        assert!(matches!(err, FrontendError::Lex { span, .. } if span.column == 2));
    }

    fn reconstruct(src: &str) -> String {
        let toks = tokenize(src).unwrap();
        let mut out = String::new();
        let mut pos = 0;
        for t in &toks {
            let gap = &src[pos..t.span.offset];
            // gaps may only hold whitespace and comments
            let stripped: String = gap
                .lines()
                .map(|l| l.split('#').next().unwrap_or(""))
                .collect();
            assert!(stripped.trim().is_empty(), "non-trivia gap {gap:?}");
            out.push_str(gap);
            out.push_str(&t.text);
            pos = t.span.offset + t.text.len();
        }
        out.push_str(&src[pos..]);
        out
    }

    proptest! {
        #[test]
        fn tokens_and_trivia_reconstruct_source(
            parts in prop::collection::vec(
                prop_oneof![
                    Just("def ".to_string()), Just("main".into()), Just("var".into()),
                    Just(" ".into()), Just("\n".into()), Just("\r\n".into()),
                    Just("# note\n".into()), Just("(".into()), Just(")".into()),
                    Just("[".into()), Just("]".into()), Just(";".into()), Just("=".into()),
                    "[a-z_][a-z0-9_]{0,6}", "[0-9]{1,4}(\\.[0-9]{1,3})?",
                    Just("+".into()), Just("-".into()), Just("*".into()), Just("/".into()),
                ],
                0..40,
            )
        ) {
            let src = parts.join(" ");
            prop_assert_eq!(reconstruct(&src), src.clone());
            for t in tokenize(&src).unwrap() {
                prop_assert!(t.span.line >= 1 && t.span.column >= 1);
                prop_assert!(t.span.offset + t.text.len() <= src.len());
            }
        }
    }
}
