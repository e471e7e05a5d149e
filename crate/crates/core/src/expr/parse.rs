use thiserror::Error;

use super::Expr;

#[derive(Clone, Debug, PartialEq, Error)]
#[error("{kind} at byte {position} of {text:?}")]
pub struct ParseError {
    pub position: usize,
    pub kind: ParseErrorKind,
    pub text: String,
}

#[derive(Clone, Debug, PartialEq, Error)]
pub enum ParseErrorKind {
    #[error("syntax error: {0}")]
    Syntax(String),
    #[error("nonsmooth factor in product")]
    NonsmoothFactor,
    #[error("nonsmooth base in power")]
    NonsmoothBase,
    #[error("unknown variable `{name}` (dimension {dim})")]
    UnknownVariable { name: String, dim: usize },
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(f64, bool),
    Ident(String),
    Plus,
    Minus,
    Star,
    Caret,
    LParen,
    RParen,
    Comma,
    End,
}

fn tokenize(text: &str) -> Result<Vec<(usize, Tok)>, (usize, String)> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let tok = match c {
            b'+' => Tok::Plus,
            b'-' => Tok::Minus,
            b'*' => Tok::Star,
            b'^' => Tok::Caret,
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            b',' => Tok::Comma,
            b'0'..=b'9' | b'.' => {
                let mut integral = true;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                if i < bytes.len() && bytes[i] == b'.' {
                    integral = false;
                    i += 1;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                }
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                        j += 1;
                    }
                    if j < bytes.len() && bytes[j].is_ascii_digit() {
                        integral = false;
                        i = j;
                        while i < bytes.len() && bytes[i].is_ascii_digit() {
                            i += 1;
                        }
                    }
                }
                let lexeme = &text[start..i];
                let v: f64 = lexeme
                    .parse()
                    .map_err(|_| (start, format!("malformed number `{lexeme}`")))?;
                out.push((start, Tok::Num(v, integral)));
                continue;
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push((start, Tok::Ident(text[start..i].to_string())));
                continue;
            }
            _ => {
                let ch = text[start..].chars().next().unwrap_or('?');
                return Err((start, format!("unexpected character `{ch}`")));
            }
        };
        out.push((start, tok));
        i += 1;
    }
    out.push((text.len(), Tok::End));
    Ok(out)
}

struct Parser<'a> {
    text: &'a str,
    toks: Vec<(usize, Tok)>,
    at: usize,
    dim: usize,
}

type PResult<T> = Result<T, ParseError>;

impl Parser<'_> {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].1
    }

    fn pos(&self) -> usize {
        self.toks[self.at].0
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].1.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn err(&self, position: usize, kind: ParseErrorKind) -> ParseError {
        ParseError {
            position,
            kind,
            text: self.text.to_string(),
        }
    }

    fn syntax(&self, msg: impl Into<String>) -> ParseError {
        self.err(self.pos(), ParseErrorKind::Syntax(msg.into()))
    }

    fn expect(&mut self, want: Tok, what: &str) -> PResult<()> {
        if *self.peek() == want {
            self.bump();
            Ok(())
        } else {
            Err(self.syntax(format!("expected {what}")))
        }
    }

    fn expr(&mut self) -> PResult<Expr> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Tok::Plus => {
                    self.bump();
                    let rhs = self.term()?;
                    acc = Expr::sum(acc, rhs);
                }
                Tok::Minus => {
                    self.bump();
                    let rhs = self.term()?;
                    acc = Expr::difference(acc, rhs);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> PResult<Expr> {
        let mut acc = self.unary()?;
        while *self.peek() == Tok::Star {
            let pos = self.pos();
            self.bump();
            let rhs = self.unary()?;
            acc = self.product(acc, rhs, pos)?;
        }
        Ok(acc)
    }

    fn product(&self, a: Expr, b: Expr, pos: usize) -> PResult<Expr> {
        if a.arity() == 0 {
            Ok(Expr::scale(a.eval(&[]), b))
        } else if b.arity() == 0 {
            Ok(Expr::scale(b.eval(&[]), a))
        } else if a.is_smooth() && b.is_smooth() {
            Ok(Expr::Product(Box::new(a), Box::new(b)))
        } else {
            Err(self.err(pos, ParseErrorKind::NonsmoothFactor))
        }
    }

    fn unary(&mut self) -> PResult<Expr> {
        match self.peek() {
            Tok::Minus => {
                self.bump();
                Ok(match self.unary()? {
                    Expr::Const(c) => Expr::Const(-c),
                    e => Expr::scale(-1.0, e),
                })
            }
            Tok::Plus => {
                self.bump();
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> PResult<Expr> {
        let mut base = self.primary()?;
        while *self.peek() == Tok::Caret {
            let pos = self.pos();
            self.bump();
            let k = match self.bump() {
                Tok::Num(v, true) if v >= 1.0 && v <= u32::MAX as f64 => v as u32,
                _ => return Err(self.err(pos, ParseErrorKind::Syntax("expected positive integer exponent".into()))),
            };
            base = if base.is_smooth() {
                Expr::Power(Box::new(base), k)
            } else if base.arity() == 0 {
                Expr::Const(base.eval(&[]).powi(k as i32))
            } else {
                return Err(self.err(pos, ParseErrorKind::NonsmoothBase));
            };
        }
        Ok(base)
    }

    fn primary(&mut self) -> PResult<Expr> {
        let pos = self.pos();
        match self.bump() {
            Tok::Num(v, _) => Ok(Expr::Const(v)),
            Tok::LParen => {
                let e = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            Tok::Ident(name) => self.ident(name, pos),
            Tok::End => Err(self.err(pos, ParseErrorKind::Syntax("unexpected end of input".into()))),
            t => Err(self.err(pos, ParseErrorKind::Syntax(format!("unexpected token {t:?}")))),
        }
    }

    fn ident(&mut self, name: String, pos: usize) -> PResult<Expr> {
        match name.as_str() {
            "abs" => {
                self.expect(Tok::LParen, "`(` after abs")?;
                let a = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(Expr::abs(a))
            }
            "max" | "min" => {
                self.expect(Tok::LParen, "`(`")?;
                let a = self.expr()?;
                self.expect(Tok::Comma, "`,`")?;
                let b = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(if name == "max" {
                    Expr::max(a, b)
                } else {
                    Expr::min(a, b)
                })
            }
            _ => {
                let index = name
                    .strip_prefix('u')
                    .filter(|d| !d.is_empty() && d.bytes().all(|b| b.is_ascii_digit()))
                    .and_then(|d| d.parse::<usize>().ok());
                match index {
                    Some(i) if i < self.dim => Ok(Expr::Var(i)),
                    _ => Err(self.err(
                        pos,
                        ParseErrorKind::UnknownVariable {
                            name,
                            dim: self.dim,
                        },
                    )),
                }
            }
        }
    }
}

/// Parses `text` as an expression over variables `u0 .. u{dim-1}`.
///
/// Grammar (whitespace insignificant):
///
/// ```text
/// expr   := term (('+'|'-') term)*
/// term   := factor ('*' factor)*
/// factor := number | ident | '(' expr ')' | 'abs(' expr ')'
///         | 'max(' expr ',' expr ')' | 'min(' expr ',' expr ')'
///         | factor '^' posint | '-' factor
/// ident  := 'u' digit+
/// ```
///
/// A product with a variable-free side becomes a scale node; otherwise both
/// factors must be smooth.
pub fn parse_expr(text: &str, dim: usize) -> Result<Expr, ParseError> {
    let toks = tokenize(text).map_err(|(position, msg)| ParseError {
        position,
        kind: ParseErrorKind::Syntax(msg),
        text: text.to_string(),
    })?;
    let mut p = Parser {
        text,
        toks,
        at: 0,
        dim,
    };
    let e = p.expr()?;
    if *p.peek() != Tok::End {
        return Err(p.syntax("trailing input"));
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn abs_of_variable() {
        assert_eq!(parse_expr("abs(u0)", 1).unwrap(), Expr::abs(Expr::Var(0)));
    }

    #[test]
    fn scaled_abs_plus_constant() {
        assert_eq!(
            parse_expr("2*abs(u0) + 2", 1).unwrap(),
            Expr::sum(Expr::scale(2.0, Expr::abs(Expr::Var(0))), Expr::Const(2.0))
        );
    }

    #[test]
    fn nonsmooth_product_rejected() {
        let err = parse_expr("abs(u0)*abs(u0)", 1).unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::NonsmoothFactor);
        assert_eq!(err.position, 7);
        let err = parse_expr("max(u0,u1)^2", 2).unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::NonsmoothBase);
    }

    #[test]
    fn leading_minus_and_subtraction() {
        assert_eq!(parse_expr("-u0", 1).unwrap(), Expr::scale(-1.0, Expr::Var(0)));
        let e = parse_expr("-u0-1", 1).unwrap();
        assert_eq!(e.eval(&[0.0]), -1.0);
        assert_eq!(e.eval(&[2.0]), -3.0);
        assert_eq!(parse_expr("-u0^2", 1).unwrap().eval(&[3.0]), -9.0);
    }

    #[test]
    fn unknown_variable_and_syntax() {
        let err = parse_expr("u0 + u3", 2).unwrap_err();
        assert!(matches!(err.kind, ParseErrorKind::UnknownVariable { .. }));
        assert_eq!(err.position, 5);
        assert!(matches!(parse_expr("u0 +", 1).unwrap_err().kind, ParseErrorKind::Syntax(_)));
        assert!(matches!(parse_expr("sin(u0)", 1).unwrap_err().kind, ParseErrorKind::UnknownVariable { .. }));
        assert!(parse_expr("u0^0", 1).is_err());
        assert!(parse_expr("u0^1.5", 1).is_err());
        assert!(parse_expr("(u0", 1).is_err());
        assert!(parse_expr("u0 # 1", 1).is_err());
    }

    #[test]
    fn numbers_and_precedence() {
        let e = parse_expr("1.5e1 + 2*u0^2*u1", 2).unwrap();
        assert_eq!(e.eval(&[3.0, 0.5]), 15.0 + 9.0);
        assert_eq!(parse_expr("2*3", 1).unwrap().eval(&[0.0]), 6.0);
        assert_eq!(parse_expr(" ( u0 - 0.5 ) ^ 2 ", 1).unwrap().eval(&[1.5]), 1.0);
    }
}
