use num_traits::Zero;
use thiserror::Error;

use super::{BinOp, Expr, Func, Literal};

const MAX_DEPTH: usize = 200;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{kind} at offset {offset}")]
pub struct ParseError {
    /// Byte offset into the source text.
    pub offset: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseErrorKind {
    #[error("empty expression")]
    Empty,
    #[error("unexpected character {0:?}")]
    BadChar(char),
    #[error("unexpected {found}, expected {expected}")]
    Unexpected {
        found: String,
        expected: &'static str,
    },
    #[error("unknown identifier `{0}`")]
    UnknownIdent(String),
    #[error("function `{0}` must be applied to an argument")]
    BareFunction(String),
    #[error("invalid number literal `{0}`")]
    BadNumber(String),
    #[error("exponent must be a non-negative integer literal")]
    BadExponent,
    #[error("expression nested too deeply")]
    TooDeep,
    #[error("invalid coordinate list: {0}")]
    BadCoordinates(String),
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(String),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    End,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Num(s) => format!("number `{s}`"),
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Plus => "`+`".into(),
            Tok::Minus => "`-`".into(),
            Tok::Star => "`*`".into(),
            Tok::Slash => "`/`".into(),
            Tok::Caret => "`^`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::End => "end of input".into(),
        }
    }
}

fn lex(text: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        let tok = match c {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'+' => Tok::Plus,
            b'-' => Tok::Minus,
            b'*' => Tok::Star,
            b'/' => Tok::Slash,
            b'^' => Tok::Caret,
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            b'0'..=b'9' | b'.' => {
                while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                    i += 1;
                }
                out.push((Tok::Num(text[start..i].to_string()), start));
                continue;
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push((Tok::Ident(text[start..i].to_string()), start));
                continue;
            }
            _ => {
                let ch = text[start..].chars().next().unwrap_or('\u{fffd}');
                return Err(ParseError {
                    offset: start,
                    kind: ParseErrorKind::BadChar(ch),
                });
            }
        };
        out.push((tok, start));
        i += 1;
    }
    out.push((Tok::End, text.len()));
    Ok(out)
}

fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// Checks a coordinate list: non-empty, distinct identifiers, no builtin names.
pub fn validate_coords(coords: &[String]) -> Result<(), String> {
    if coords.is_empty() {
        return Err("no coordinates declared".into());
    }
    for (i, name) in coords.iter().enumerate() {
        if !is_identifier(name) {
            return Err(format!("`{name}` is not an identifier"));
        }
        if Func::from_name(name).is_some() {
            return Err(format!("`{name}` is a builtin function name"));
        }
        if coords[..i].contains(name) {
            return Err(format!("duplicate coordinate `{name}`"));
        }
    }
    Ok(())
}

/// Parses `text` against the declared coordinate names.
pub fn parse(text: &str, coords: &[String]) -> Result<Expr, ParseError> {
    validate_coords(coords).map_err(|msg| ParseError {
        offset: 0,
        kind: ParseErrorKind::BadCoordinates(msg),
    })?;
    let tokens = lex(text)?;
    if tokens.len() == 1 {
        return Err(ParseError {
            offset: 0,
            kind: ParseErrorKind::Empty,
        });
    }
    let mut p = Parser {
        tokens,
        pos: 0,
        coords,
        depth: 0,
    };
    let e = p.expr()?;
    p.expect_end()?;
    Ok(e)
}

struct Parser<'a> {
    tokens: Vec<(Tok, usize)>,
    pos: usize,
    coords: &'a [String],
    depth: usize,
}

impl Parser<'_> {
    fn peek(&self) -> &Tok {
        &self.tokens[self.pos].0
    }

    fn offset(&self) -> usize {
        self.tokens[self.pos].1
    }

    fn bump(&mut self) -> (Tok, usize) {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn unexpected(&self, expected: &'static str) -> ParseError {
        ParseError {
            offset: self.offset(),
            kind: ParseErrorKind::Unexpected {
                found: self.peek().describe(),
                expected,
            },
        }
    }

    fn expect_end(&self) -> Result<(), ParseError> {
        match self.peek() {
            Tok::End => Ok(()),
            _ => Err(self.unexpected("operator or end of input")),
        }
    }

    fn enter(&mut self) -> Result<(), ParseError> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            return Err(ParseError {
                offset: self.offset(),
                kind: ParseErrorKind::TooDeep,
            });
        }
        Ok(())
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        self.enter()?;
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => break,
            };
            self.bump();
            let rhs = self.term()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
        self.depth -= 1;
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Tok::Star => BinOp::Mul,
                Tok::Slash => BinOp::Div,
                _ => break,
            };
            self.bump();
            let rhs = self.unary()?;
            lhs = match (op, lhs, rhs) {
                // literal / literal is a rational literal
                (BinOp::Div, Expr::Num(a), Expr::Num(b)) if !b.value.is_zero() => {
                    Expr::Num(Literal::new(a.value / b.value))
                }
                (op, a, b) => Expr::Bin(op, Box::new(a), Box::new(b)),
            };
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if *self.peek() == Tok::Minus {
            self.enter()?;
            self.bump();
            let inner = self.unary()?;
            self.depth -= 1;
            return Ok(Expr::Neg(Box::new(inner)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.primary()?;
        if *self.peek() != Tok::Caret {
            return Ok(base);
        }
        self.bump();
        let (tok, at) = self.bump();
        let k = match tok {
            Tok::Num(s) if s.bytes().all(|b| b.is_ascii_digit()) => s.parse::<u32>().ok(),
            _ => None,
        };
        match k {
            Some(k) => Ok(Expr::Pow(Box::new(base), k)),
            None => Err(ParseError {
                offset: at,
                kind: ParseErrorKind::BadExponent,
            }),
        }
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        let at = self.offset();
        match self.peek().clone() {
            Tok::Num(s) => {
                self.bump();
                match crate::rational::parse_decimal(&s) {
                    Some(v) if !s.contains('e') => Ok(Expr::Num(Literal::new(v))),
                    _ => Err(ParseError {
                        offset: at,
                        kind: ParseErrorKind::BadNumber(s),
                    }),
                }
            }
            Tok::Ident(name) => {
                self.bump();
                if let Some(func) = Func::from_name(&name) {
                    if *self.peek() != Tok::LParen {
                        return Err(ParseError {
                            offset: at,
                            kind: ParseErrorKind::BareFunction(name),
                        });
                    }
                    self.bump();
                    let arg = self.expr()?;
                    self.close_paren()?;
                    return Ok(Expr::Call(func, Box::new(arg)));
                }
                match self.coords.iter().position(|c| *c == name) {
                    Some(i) => Ok(Expr::Var(i)),
                    None => Err(ParseError {
                        offset: at,
                        kind: ParseErrorKind::UnknownIdent(name),
                    }),
                }
            }
            Tok::LParen => {
                self.bump();
                let e = self.expr()?;
                self.close_paren()?;
                Ok(e)
            }
            _ => Err(self.unexpected("number, coordinate, function or `(`")),
        }
    }

    fn close_paren(&mut self) -> Result<(), ParseError> {
        if *self.peek() == Tok::RParen {
            self.bump();
            Ok(())
        } else {
            Err(self.unexpected("`)`"))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::BigRational;
    use proptest::prelude::*;

    fn xy() -> Vec<String> {
        vec!["x".into(), "y".into()]
    }

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn single_variable() {
        assert_eq!(parse("y", &xy()).unwrap(), Expr::Var(1));
    }

    #[test]
    fn precedence_and_rational_literal() {
        let e = parse("x^2*y - 1/2", &xy()).unwrap();
        let expected = Expr::Bin(
            BinOp::Sub,
            Box::new(Expr::Bin(
                BinOp::Mul,
                Box::new(Expr::Pow(Box::new(Expr::Var(0)), 2)),
                Box::new(Expr::Var(1)),
            )),
            Box::new(Expr::num(q(1, 2))),
        );
        assert_eq!(e, expected);
    }

    #[test]
    fn power_binds_tighter_than_negation() {
        let e = parse("-x^2", &xy()).unwrap();
        assert_eq!(e, Expr::Neg(Box::new(Expr::Pow(Box::new(Expr::Var(0)), 2))));
    }

    #[test]
    fn decimals_become_exact() {
        assert_eq!(parse("0.125", &xy()).unwrap(), Expr::num(q(1, 8)));
    }

    #[test]
    fn unterminated_call_reports_end_offset() {
        let err = parse("sin(", &["x".to_string()]).unwrap_err();
        assert_eq!(err.offset, 4);
        assert!(matches!(err.kind, ParseErrorKind::Unexpected { .. }));
    }

    #[test]
    fn error_cases() {
        let c = xy();
        assert!(matches!(
            parse("", &c).unwrap_err().kind,
            ParseErrorKind::Empty
        ));
        assert!(matches!(
            parse("   ", &c).unwrap_err().kind,
            ParseErrorKind::Empty
        ));
        let e = parse("x + z", &c).unwrap_err();
        assert_eq!(e.offset, 4);
        assert_eq!(e.kind, ParseErrorKind::UnknownIdent("z".into()));
        assert_eq!(
            parse("x^y", &c).unwrap_err().kind,
            ParseErrorKind::BadExponent
        );
        assert_eq!(
            parse("x^1.5", &c).unwrap_err().kind,
            ParseErrorKind::BadExponent
        );
        assert_eq!(
            parse("x^-1", &c).unwrap_err().kind,
            ParseErrorKind::BadExponent
        );
        assert!(matches!(
            parse("x^2^3", &c).unwrap_err().kind,
            ParseErrorKind::Unexpected { .. }
        ));
        assert!(matches!(
            parse("2x", &c).unwrap_err().kind,
            ParseErrorKind::Unexpected { .. }
        ));
        assert_eq!(
            parse("sin + 1", &c).unwrap_err().kind,
            ParseErrorKind::BareFunction("sin".into())
        );
        assert_eq!(
            parse("1.2.3", &c).unwrap_err().kind,
            ParseErrorKind::BadNumber("1.2.3".into())
        );
        assert_eq!(
            parse("x # y", &c).unwrap_err().kind,
            ParseErrorKind::BadChar('#')
        );
        assert!(matches!(
            parse("(x", &c).unwrap_err().kind,
            ParseErrorKind::Unexpected { .. }
        ));
        assert!(matches!(
            parse("x)", &c).unwrap_err().kind,
            ParseErrorKind::Unexpected { .. }
        ));
    }

    #[test]
    fn coordinate_validation() {
        let dup = vec!["x".to_string(), "x".to_string()];
        assert!(matches!(
            parse("x", &dup).unwrap_err().kind,
            ParseErrorKind::BadCoordinates(_)
        ));
        assert!(matches!(
            parse("x", &[]).unwrap_err().kind,
            ParseErrorKind::BadCoordinates(_)
        ));
        let builtin = vec!["exp".to_string()];
        assert!(matches!(
            parse("1", &builtin).unwrap_err().kind,
            ParseErrorKind::BadCoordinates(_)
        ));
    }

    #[test]
    fn deep_nesting_is_rejected_not_overflowed() {
        let text = format!("{}x{}", "(".repeat(10_000), ")".repeat(10_000));
        assert_eq!(
            parse(&text, &xy()).unwrap_err().kind,
            ParseErrorKind::TooDeep
        );
        let text = format!("{}x", "-".repeat(10_000));
        assert_eq!(
            parse(&text, &xy()).unwrap_err().kind,
            ParseErrorKind::TooDeep
        );
    }

    proptest! {
        #[test]
        fn parser_is_total(text in "\\PC{0,40}") {
            let _ = parse(&text, &xy());
        }

        #[test]
        fn parser_is_total_on_grammar_soup(text in "[xy0-9.+*/^() -]{0,40}|(sin|hstep|sqrt)\\([xy+*-]{0,10}") {
            match parse(&text, &xy()) {
                Ok(e) => prop_assert!(e.max_var().is_none_or(|v| v < 2)),
                Err(err) => prop_assert!(err.offset <= text.len()),
            }
        }
    }
}
