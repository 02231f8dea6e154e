use thiserror::Error;

use super::ast::{BinOp, Expr, ExprKind, Func};

pub const MAX_INT_EXPONENT: i64 = 64;
pub const MAX_DEPTH: usize = 256;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("parse error at offset {position}: {message}")]
pub struct ParseError {
    /// Character offset into the input.
    pub position: usize,
    pub message: String,
}

impl ParseError {
    fn new(position: usize, message: impl Into<String>) -> Self {
        ParseError { position, message: message.into() }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Int(i64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Comma,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    pos: usize,
}

fn lex(text: &str) -> Result<(Vec<Token>, usize), ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let start = i;
        let simple = match c {
            '+' => Some(Tok::Plus),
            '-' | '\u{2212}' => Some(Tok::Minus),
            '*' | '\u{00b7}' => Some(Tok::Star),
            '/' => Some(Tok::Slash),
            '^' => Some(Tok::Caret),
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            ',' => Some(Tok::Comma),
            _ => None,
        };
        if let Some(tok) = simple {
            out.push(Token { tok, pos: start });
            i += 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())) {
            let mut is_int = true;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            if i < chars.len() && chars[i] == '.' {
                is_int = false;
                i += 1;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
            }
            // Exponent only when digits follow; "2e" is the number 2 then the constant e.
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let mut j = i + 1;
                if j < chars.len() && (chars[j] == '+' || chars[j] == '-') {
                    j += 1;
                }
                if j < chars.len() && chars[j].is_ascii_digit() {
                    is_int = false;
                    i = j;
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let s: String = chars[start..i].iter().collect();
            let tok = if is_int {
                match s.parse::<i64>() {
                    Ok(n) => Tok::Int(n),
                    Err(_) => Tok::Num(s.parse().map_err(|_| ParseError::new(start, "bad number"))?),
                }
            } else {
                Tok::Num(s.parse().map_err(|_| ParseError::new(start, format!("bad number '{s}'")))?)
            };
            out.push(Token { tok, pos: start });
            continue;
        }
        if c.is_alphabetic() || c == '_' {
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push(Token { tok: Tok::Ident(chars[start..i].iter().collect()), pos: start });
            continue;
        }
        return Err(ParseError::new(start, format!("unexpected character '{c}'")));
    }
    Ok((out, chars.len()))
}

struct Parser<'a> {
    toks: Vec<Token>,
    at: usize,
    end: usize,
    var: &'a str,
    depth: usize,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at).map(|t| &t.tok)
    }

    fn pos(&self) -> usize {
        self.toks.get(self.at).map_or(self.end, |t| t.pos)
    }

    fn bump(&mut self) -> Option<Token> {
        let t = self.toks.get(self.at).cloned();
        self.at += 1;
        t
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<(), ParseError> {
        if self.peek() == Some(&tok) {
            self.at += 1;
            Ok(())
        } else {
            Err(self.unexpected(what))
        }
    }

    fn unexpected(&self, wanted: &str) -> ParseError {
        match self.toks.get(self.at) {
            None => ParseError::new(self.end, format!("unexpected end of input, expected {wanted}")),
            Some(t) => ParseError::new(t.pos, format!("unexpected {:?}, expected {wanted}", t.tok)),
        }
    }

    fn enter(&mut self) -> Result<(), ParseError> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            Err(ParseError::new(self.pos(), format!("expression nests deeper than {MAX_DEPTH}")))
        } else {
            Ok(())
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        self.enter()?;
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Some(Tok::Plus) => BinOp::Add,
                Some(Tok::Minus) => BinOp::Sub,
                _ => break,
            };
            let pos = self.pos();
            self.at += 1;
            let rhs = self.term()?;
            lhs = Expr::new(ExprKind::Binary(op, Box::new(lhs), Box::new(rhs)), pos);
        }
        self.depth -= 1;
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.factor()?;
        loop {
            let op = match self.peek() {
                Some(Tok::Star) => BinOp::Mul,
                Some(Tok::Slash) => BinOp::Div,
                _ => break,
            };
            let pos = self.pos();
            self.at += 1;
            let rhs = self.factor()?;
            lhs = Expr::new(ExprKind::Binary(op, Box::new(lhs), Box::new(rhs)), pos);
        }
        Ok(lhs)
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        let base = self.unary()?;
        if self.peek() != Some(&Tok::Caret) {
            return Ok(base);
        }
        let pos = self.pos();
        self.at += 1;
        let negative = if self.peek() == Some(&Tok::Minus) {
            self.at += 1;
            true
        } else {
            false
        };
        let exp_pos = self.pos();
        let n = match self.bump().map(|t| t.tok) {
            Some(Tok::Int(n)) => n,
            Some(Tok::Num(_)) => {
                return Err(ParseError::new(
                    exp_pos,
                    "exponent after '^' must be an integer; use pow(u, c) for real exponents",
                ))
            }
            _ => return Err(ParseError::new(exp_pos, "expected an integer exponent after '^'")),
        };
        let n = if negative { -n } else { n };
        if n.abs() > MAX_INT_EXPONENT {
            return Err(ParseError::new(exp_pos, format!("integer exponent {n} exceeds ±{MAX_INT_EXPONENT}")));
        }
        Ok(Expr::new(ExprKind::PowInt(Box::new(base), n as i32), pos))
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.peek() == Some(&Tok::Minus) {
            let pos = self.pos();
            self.at += 1;
            self.enter()?;
            let inner = self.atom()?;
            self.depth -= 1;
            return Ok(Expr::new(ExprKind::Neg(Box::new(inner)), pos));
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let pos = self.pos();
        let Some(tok) = self.bump() else {
            return Err(ParseError::new(self.end, "unexpected end of input, expected an operand"));
        };
        match tok.tok {
            Tok::Num(x) => Ok(Expr::new(ExprKind::Num(x), pos)),
            Tok::Int(n) => Ok(Expr::new(ExprKind::Num(n as f64), pos)),
            Tok::LParen => {
                let inner = self.expr()?;
                self.expect(Tok::RParen, "')'")?;
                Ok(inner)
            }
            Tok::Ident(name) => self.identifier(name, pos),
            _ => {
                self.at -= 1;
                Err(self.unexpected("an operand"))
            }
        }
    }

    fn identifier(&mut self, name: String, pos: usize) -> Result<Expr, ParseError> {
        if name == self.var {
            return Ok(Expr::new(ExprKind::Var, pos));
        }
        match name.as_str() {
            "i" => return Ok(Expr::new(ExprKind::ImagUnit, pos)),
            "e" => return Ok(Expr::new(ExprKind::E, pos)),
            "pi" => return Ok(Expr::new(ExprKind::Pi, pos)),
            _ => {}
        }
        if let Some(func) = Func::from_name(&name) {
            self.expect(Tok::LParen, &format!("'(' after {name}"))?;
            self.enter()?;
            let arg = self.expr()?;
            self.depth -= 1;
            if self.peek() == Some(&Tok::Comma) {
                return Err(ParseError::new(self.pos(), format!("{name} takes exactly one argument")));
            }
            self.expect(Tok::RParen, "')'")?;
            return Ok(Expr::new(ExprKind::Call(func, Box::new(arg)), pos));
        }
        if name == "pow" {
            self.expect(Tok::LParen, "'(' after pow")?;
            self.enter()?;
            let base = self.expr()?;
            self.expect(Tok::Comma, "',' in pow(u, c)")?;
            let exp_pos = self.pos();
            let exponent = self.expr()?;
            self.depth -= 1;
            self.expect(Tok::RParen, "')'")?;
            if !exponent.is_constant() {
                return Err(ParseError::new(exp_pos, "pow exponent must be a real constant"));
            }
            let value = super::eval::eval_constant(&exponent)
                .map_err(|e| ParseError::new(exp_pos, format!("pow exponent: {e}")))?;
            if value.im != 0.0 || !value.re.is_finite() {
                return Err(ParseError::new(exp_pos, "pow exponent must be a real constant"));
            }
            return Ok(Expr::new(ExprKind::Pow(Box::new(base), Box::new(exponent)), pos));
        }
        Err(ParseError::new(pos, format!("unknown identifier '{name}'")))
    }
}

/// Parses `text` with `z` as the free variable.
pub fn parse_expr(text: &str) -> Result<Expr, ParseError> {
    parse_expr_in(text, "z")
}

/// Parses `text` with `var` as the name of the free variable.
pub fn parse_expr_in(text: &str, var: &str) -> Result<Expr, ParseError> {
    let (toks, end) = lex(text)?;
    let mut p = Parser { toks, at: 0, end, var, depth: 0 };
    let e = p.expr()?;
    if p.at < p.toks.len() {
        return Err(p.unexpected("an operator or end of input"));
    }
    Ok(e)
}
