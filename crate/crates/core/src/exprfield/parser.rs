//! Recursive descent parser for the expression grammar.

use super::{Axis, BinOp, Expr, Func, Params};
use crate::{Error, Result};

use super::field::FieldDef;

/// Parse one scalar expression. `params` supplies the legal parameter names.
pub fn parse_scalar(src: &str, params: &Params) -> Result<Expr> {
    let tokens = lex(src)?;
    let mut p = Parser {
        tokens,
        pos: 0,
        end: src.len(),
        params,
    };
    let expr = p.expr()?;
    match p.peek() {
        None => Ok(expr),
        Some((_, span)) => Err(Error::Parse {
            offset: span.0,
            message: "unexpected trailing input".to_string(),
        }),
    }
}

/// Parse the three components of a vector field sharing one parameter set.
pub fn parse_field(fx: &str, fy: &str, fz: &str, params: &Params) -> Result<FieldDef> {
    validate_params(params)?;
    let components = [
        parse_scalar(fx, params)?,
        parse_scalar(fy, params)?,
        parse_scalar(fz, params)?,
    ];
    Ok(FieldDef::new(components, params.clone()))
}

const RESERVED: &[&str] = &[
    "x", "y", "z", "u", "v", "q", "p", "sin", "cos", "tan", "exp", "log", "ln", "sqrt", "arccos",
    "acos", "arcsin", "asin", "abs",
];

/// Parameter names must be plain identifiers and must not shadow variables or
/// functions.
pub fn validate_params(params: &Params) -> Result<()> {
    for (name, value) in params {
        let mut chars = name.chars();
        let head_ok = chars.next().is_some_and(|c| c.is_ascii_alphabetic() || c == '_');
        if !head_ok || !name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
            return Err(Error::InvalidInput(format!(
                "parameter name `{name}` is not a valid identifier"
            )));
        }
        if RESERVED.contains(&name.as_str()) {
            return Err(Error::InvalidInput(format!(
                "parameter name `{name}` shadows a built-in identifier"
            )));
        }
        if !value.is_finite() {
            return Err(Error::InvalidInput(format!(
                "parameter `{name}` must be finite"
            )));
        }
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

type Span = (usize, usize);

fn lex(src: &str) -> Result<Vec<(Token, Span)>> {
    let bytes = src.as_bytes();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        let start = i;
        let token = match c {
            ' ' | '\t' | '\r' | '\n' => {
                i += 1;
                continue;
            }
            '+' => Token::Plus,
            '-' => Token::Minus,
            '*' => Token::Star,
            '/' => Token::Slash,
            '^' => Token::Caret,
            '(' => Token::LParen,
            ')' => Token::RParen,
            '0'..='9' | '.' => {
                i += 1;
                while i < bytes.len() && matches!(bytes[i] as char, '0'..='9' | '.') {
                    i += 1;
                }
                if i < bytes.len() && matches!(bytes[i] as char, 'e' | 'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && matches!(bytes[j] as char, '+' | '-') {
                        j += 1;
                    }
                    if j < bytes.len() && (bytes[j] as char).is_ascii_digit() {
                        i = j + 1;
                        while i < bytes.len() && (bytes[i] as char).is_ascii_digit() {
                            i += 1;
                        }
                    }
                }
                let text = &src[start..i];
                let value: f64 = text.parse().map_err(|_| Error::Parse {
                    offset: start,
                    message: format!("malformed number `{text}`"),
                })?;
                tokens.push((Token::Num(value), (start, i)));
                continue;
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                i += 1;
                while i < bytes.len()
                    && ((bytes[i] as char).is_ascii_alphanumeric() || bytes[i] == b'_')
                {
                    i += 1;
                }
                tokens.push((Token::Ident(src[start..i].to_string()), (start, i)));
                continue;
            }
            other => {
                return Err(Error::Parse {
                    offset: start,
                    message: format!("unexpected character `{other}`"),
                })
            }
        };
        i += 1;
        tokens.push((token, (start, i)));
    }
    Ok(tokens)
}

struct Parser<'a> {
    tokens: Vec<(Token, Span)>,
    pos: usize,
    end: usize,
    params: &'a Params,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&(Token, Span)> {
        self.tokens.get(self.pos)
    }

    fn bump(&mut self) -> Option<(Token, Span)> {
        let t = self.tokens.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn eat(&mut self, token: &Token) -> bool {
        if self.peek().map(|(t, _)| t) == Some(token) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn error_here(&self, message: &str) -> Error {
        let offset = self.peek().map_or(self.end, |(_, span)| span.0);
        Error::Parse {
            offset,
            message: message.to_string(),
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Some((Token::Plus, _)) => BinOp::Add,
                Some((Token::Minus, _)) => BinOp::Sub,
                _ => break,
            };
            self.pos += 1;
            let rhs = self.term()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Some((Token::Star, _)) => BinOp::Mul,
                Some((Token::Slash, _)) => BinOp::Div,
                _ => break,
            };
            self.pos += 1;
            let rhs = self.unary()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.eat(&Token::Minus) {
            Ok(Expr::Neg(Box::new(self.unary()?)))
        } else {
            self.power()
        }
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if self.eat(&Token::Caret) {
            // Right associative; the exponent may carry a unary minus.
            let e = self.unary()?;
            Ok(Expr::Binary(BinOp::Pow, Box::new(base), Box::new(e)))
        } else {
            Ok(base)
        }
    }

    fn atom(&mut self) -> Result<Expr> {
        match self.bump() {
            Some((Token::Num(v), _)) => Ok(Expr::Const(v)),
            Some((Token::LParen, _)) => {
                let inner = self.expr()?;
                if self.eat(&Token::RParen) {
                    Ok(inner)
                } else {
                    Err(self.error_here("expected `)`"))
                }
            }
            Some((Token::Ident(name), span)) => self.ident(name, span),
            Some((_, span)) => Err(Error::Parse {
                offset: span.0,
                message: "expected a value".to_string(),
            }),
            None => Err(Error::Parse {
                offset: self.end,
                message: "unexpected end of input".to_string(),
            }),
        }
    }

    fn ident(&mut self, name: String, span: Span) -> Result<Expr> {
        if let Some(func) = function_named(&name) {
            if !self.eat(&Token::LParen) {
                return Err(self.error_here("expected `(` after function name"));
            }
            let arg = self.expr()?;
            if !self.eat(&Token::RParen) {
                return Err(self.error_here("expected `)`"));
            }
            return Ok(Expr::Unary(func, Box::new(arg)));
        }
        match name.as_str() {
            "x" | "u" | "q" => Ok(Expr::Var(Axis::X)),
            "y" | "v" | "p" => Ok(Expr::Var(Axis::Y)),
            "z" => Ok(Expr::Var(Axis::Z)),
            _ if self.params.contains_key(&name) => Ok(Expr::Param(name)),
            _ => Err(Error::UnknownIdentifier {
                name,
                offset: span.0,
            }),
        }
    }
}

fn function_named(name: &str) -> Option<Func> {
    Some(match name {
        "sin" => Func::Sin,
        "cos" => Func::Cos,
        "tan" => Func::Tan,
        "exp" => Func::Exp,
        "log" | "ln" => Func::Log,
        "sqrt" => Func::Sqrt,
        "arccos" | "acos" => Func::Acos,
        "arcsin" | "asin" => Func::Asin,
        "abs" => Func::Abs,
        _ => return None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::R3;

    fn no_params() -> Params {
        Params::new()
    }

    #[test]
    fn parses_product_field_and_evaluates() {
        let f = parse_field("y*z", "x*z", "x*y", &no_params()).unwrap();
        let v = f.value(&R3::new(1.0, 2.0, 3.0)).unwrap();
        assert_eq!(v, R3::new(6.0, 3.0, 2.0));
    }

    #[test]
    fn reports_syntax_error_offset() {
        let err = parse_field("x +", "0", "0", &no_params()).unwrap_err();
        match err {
            Error::Parse { offset, .. } => assert_eq!(offset, 3),
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn unknown_identifier_unless_declared() {
        let err = parse_scalar("w+1", &no_params()).unwrap_err();
        match err {
            Error::UnknownIdentifier { name, offset } => {
                assert_eq!(name, "w");
                assert_eq!(offset, 0);
            }
            other => panic!("unexpected error {other:?}"),
        }
        let mut params = Params::new();
        params.insert("w".to_string(), 2.5);
        let e = parse_scalar("w+1", &params).unwrap();
        assert_eq!(e.value(&R3::zeros(), &params).unwrap(), 3.5);
    }

    #[test]
    fn precedence_and_associativity() {
        let p = no_params();
        let x = R3::new(2.0, 3.0, 4.0);
        // ^ binds tighter than *, which binds tighter than -.
        assert_eq!(
            parse_scalar("2*x^2-y", &p).unwrap().value(&x, &p).unwrap(),
            5.0
        );
        // Right-associative power: 2^3^2 = 2^9.
        assert_eq!(
            parse_scalar("2^3^2", &p).unwrap().value(&x, &p).unwrap(),
            512.0
        );
        // Unary minus applies after the power: -x^2 = -(x^2).
        assert_eq!(
            parse_scalar("-x^2", &p).unwrap().value(&x, &p).unwrap(),
            -4.0
        );
        // Left-associative subtraction and division.
        assert_eq!(
            parse_scalar("8-4-2", &p).unwrap().value(&x, &p).unwrap(),
            2.0
        );
        assert_eq!(
            parse_scalar("8/4/2", &p).unwrap().value(&x, &p).unwrap(),
            1.0
        );
    }

    #[test]
    fn surface_coordinate_synonyms() {
        let p = no_params();
        let e = parse_scalar("sin(u)^2+v", &p).unwrap();
        let x = R3::new(0.5, 2.0, 0.0);
        assert!((e.value(&x, &p).unwrap() - (0.5_f64.sin().powi(2) + 2.0)).abs() < 1e-15);
    }

    #[test]
    fn domain_error_names_subexpression() {
        let p = no_params();
        let e = parse_scalar("log(x-1)+y", &p).unwrap();
        let err = e.value(&R3::new(0.5, 0.0, 0.0), &p).unwrap_err();
        match err {
            Error::Domain { expr, reason, .. } => {
                assert_eq!(expr, "log(x-1)");
                assert!(reason.contains("non-positive"));
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn integer_powers_keep_negative_bases_valid() {
        let p = no_params();
        let e = parse_scalar("x^3", &p).unwrap();
        assert_eq!(e.value(&R3::new(-2.0, 0.0, 0.0), &p).unwrap(), -8.0);
        let j = e.jet(&R3::new(-2.0, 0.0, 0.0), &p).unwrap();
        assert_eq!(j.grad.x, 12.0);
        // Non-integer exponents require a positive base.
        let g = parse_scalar("x^0.5", &p).unwrap();
        assert!(g.value(&R3::new(-2.0, 0.0, 0.0), &p).is_err());
    }

    #[test]
    fn display_round_trips_structurally() {
        for src in [
            "x+y*z",
            "(x+y)*z",
            "x-(y-z)",
            "-x^2+3*y",
            "x^-2",
            "2^3^2",
            "sin(x)*cos(y)/(1+z^2)",
            "sqrt(x^2+y^2+z^2)",
            "arccos(z/sqrt(x^2+y^2+z^2))",
            "a*log(y-z)+1/3*log(x-y)",
        ] {
            let mut params = Params::new();
            params.insert("a".to_string(), 1.0);
            let e = parse_scalar(src, &params).unwrap();
            let printed = e.to_string();
            let reparsed = parse_scalar(&printed, &params).unwrap();
            assert_eq!(e, reparsed, "round trip failed for `{src}` -> `{printed}`");
        }
    }
}
