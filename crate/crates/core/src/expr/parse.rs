//! Recursive-descent parser for the expression grammar
//!
//! ```text
//! expr     := term (('+'|'-') term)*
//! term     := factor (('*'|'/') factor)*
//! factor   := base ('^' exponent)?
//! base     := number | ident | ident tags? '(' expr (',' expr)* ')' | '(' expr ')' | '-' factor
//! exponent := '(' '-'? number ('/' number)? ')' | unsigned integer
//! tags     := '\''+ | '\'' '[' integer (',' integer)* ']'
//! ```
//!
//! `t`, `x`, `u` are variables. Other identifiers must be declared in the
//! [`Context`] as parameters or function symbols, unless the context is
//! permissive. A `-` directly followed by a number literal (not raised to a
//! power) is folded into a negative constant.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::Zero;

use super::{Expr, Func, Node, Rational, Var};
use crate::{Error, Result};

#[derive(Clone, Debug, Default)]
pub struct Context {
    params: BTreeSet<String>,
    functions: BTreeMap<String, Option<usize>>,
    implicit: bool,
}

impl Context {
    /// Strict context: nothing beyond `t, x, u` and the builtins is known.
    pub fn new() -> Self {
        Self::default()
    }

    /// Every single-letter identifier other than `t, x, u` is a parameter
    /// and every non-builtin `name(...)` is a function symbol.
    pub fn permissive() -> Self {
        Context {
            implicit: true,
            ..Self::default()
        }
    }

    pub fn with_param(mut self, name: &str) -> Self {
        self.params.insert(name.to_string());
        self
    }

    pub fn with_function(mut self, name: &str, arity: usize) -> Self {
        self.functions.insert(name.to_string(), Some(arity));
        self
    }

    /// Function symbol accepted with any number of arguments.
    pub fn with_any_function(mut self, name: &str) -> Self {
        self.functions.insert(name.to_string(), None);
        self
    }

    fn is_param(&self, name: &str) -> bool {
        self.params.contains(name) || (self.implicit && name.chars().count() == 1)
    }

    fn function_arity(&self, name: &str) -> Option<Option<usize>> {
        match self.functions.get(name) {
            Some(a) => Some(*a),
            None if self.implicit => Some(None),
            None => None,
        }
    }
}

pub fn parse(text: &str, ctx: &Context) -> Result<Expr> {
    let tokens = lex(text)?;
    let mut p = Parser {
        tokens,
        pos: 0,
        ctx,
        end: text.len(),
    };
    let e = p.expr()?;
    if let Some(tok) = p.peek() {
        return Err(Error::Syntax {
            offset: tok.offset,
            message: format!("unexpected {}", tok.kind.describe()),
        });
    }
    Ok(e)
}

#[derive(Clone, Debug, PartialEq)]
enum Kind {
    Number(Rational),
    Ident(String),
    Sym(char),
}

impl Kind {
    fn describe(&self) -> String {
        match self {
            Kind::Number(_) => "number".to_string(),
            Kind::Ident(s) => format!("identifier `{s}`"),
            Kind::Sym(c) => format!("`{c}`"),
        }
    }
}

#[derive(Clone, Debug)]
struct Token {
    kind: Kind,
    offset: usize,
}

fn lex(text: &str) -> Result<Vec<Token>> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_ascii_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || (c == '.' && bytes.get(i + 1).is_some_and(|b| b.is_ascii_digit())) {
            let start = i;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            let int_part = &text[start..i];
            let mut frac_part = "";
            if i < bytes.len() && bytes[i] == b'.' {
                i += 1;
                let fs = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                frac_part = &text[fs..i];
            }
            let value = decimal_literal(int_part, frac_part).ok_or_else(|| Error::Syntax {
                offset: start,
                message: "number literal out of range".to_string(),
            })?;
            out.push(Token {
                kind: Kind::Number(value),
                offset: start,
            });
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push(Token {
                kind: Kind::Ident(text[start..i].to_string()),
                offset: start,
            });
        } else if "+-*/^(),'[]".contains(c) {
            out.push(Token {
                kind: Kind::Sym(c),
                offset: i,
            });
            i += 1;
        } else {
            let ch = text[i..].chars().next().unwrap_or(c);
            return Err(Error::Syntax {
                offset: i,
                message: format!("unexpected character `{ch}`"),
            });
        }
    }
    Ok(out)
}

fn decimal_literal(int_part: &str, frac_part: &str) -> Option<Rational> {
    let digits = format!("{int_part}{frac_part}");
    let numer: i128 = if digits.is_empty() { 0 } else { digits.parse().ok()? };
    let denom = 10i128.checked_pow(frac_part.len() as u32)?;
    Some(Rational::new(numer, denom))
}

struct Parser<'a> {
    tokens: Vec<Token>,
    pos: usize,
    ctx: &'a Context,
    end: usize,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn peek_sym(&self, c: char) -> bool {
        matches!(self.peek(), Some(Token { kind: Kind::Sym(s), .. }) if *s == c)
    }

    fn offset(&self) -> usize {
        self.peek().map_or(self.end, |t| t.offset)
    }

    fn error<T>(&self, message: impl Into<String>) -> Result<T> {
        Err(Error::Syntax {
            offset: self.offset(),
            message: message.into(),
        })
    }

    fn expect_sym(&mut self, c: char) -> Result<()> {
        if self.peek_sym(c) {
            self.pos += 1;
            Ok(())
        } else {
            let found = self.peek().map_or("end of input".to_string(), |t| t.kind.describe());
            self.error(format!("expected `{c}`, found {found}"))
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            if self.peek_sym('+') {
                self.pos += 1;
                lhs = Expr::new(Node::Add(lhs, self.term()?));
            } else if self.peek_sym('-') {
                self.pos += 1;
                lhs = Expr::new(Node::Sub(lhs, self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.factor()?;
        loop {
            if self.peek_sym('*') {
                self.pos += 1;
                lhs = Expr::new(Node::Mul(lhs, self.factor()?));
            } else if self.peek_sym('/') {
                self.pos += 1;
                lhs = Expr::new(Node::Div(lhs, self.factor()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn factor(&mut self) -> Result<Expr> {
        let base = self.base()?;
        if self.peek_sym('^') {
            self.pos += 1;
            let r = self.exponent()?;
            return Ok(Expr::new(Node::Pow(base, r)));
        }
        Ok(base)
    }

    fn exponent(&mut self) -> Result<Rational> {
        match self.peek().cloned() {
            Some(Token {
                kind: Kind::Number(n), ..
            }) => {
                if !n.is_integer() {
                    return self.error("unparenthesized exponent must be an unsigned integer");
                }
                self.pos += 1;
                Ok(n)
            }
            Some(Token {
                kind: Kind::Sym('('), ..
            }) => {
                self.pos += 1;
                let negative = if self.peek_sym('-') {
                    self.pos += 1;
                    true
                } else {
                    false
                };
                let num = self.number()?;
                let mut r = num;
                if self.peek_sym('/') {
                    self.pos += 1;
                    let den = self.number()?;
                    if den.is_zero() {
                        return self.error("zero denominator in exponent");
                    }
                    r = num / den;
                }
                self.expect_sym(')')?;
                Ok(if negative { -r } else { r })
            }
            _ => self.error("expected exponent: unsigned integer or parenthesized rational"),
        }
    }

    fn number(&mut self) -> Result<Rational> {
        match self.peek().cloned() {
            Some(Token {
                kind: Kind::Number(n), ..
            }) => {
                self.pos += 1;
                Ok(n)
            }
            _ => self.error("expected number"),
        }
    }

    fn base(&mut self) -> Result<Expr> {
        let Some(tok) = self.peek().cloned() else {
            return self.error("unexpected end of input");
        };
        match tok.kind {
            Kind::Number(n) => {
                self.pos += 1;
                Ok(Expr::constant(n))
            }
            Kind::Sym('(') => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect_sym(')')?;
                Ok(e)
            }
            Kind::Sym('-') => {
                self.pos += 1;
                if let Some(Token {
                    kind: Kind::Number(n), ..
                }) = self.peek().cloned()
                {
                    let followed_by_pow = matches!(
                        self.tokens.get(self.pos + 1),
                        Some(Token {
                            kind: Kind::Sym('^'),
                            ..
                        })
                    );
                    if !followed_by_pow {
                        self.pos += 1;
                        return Ok(Expr::constant(-n));
                    }
                }
                let inner = self.factor()?;
                Ok(Expr::new(Node::Neg(inner)))
            }
            Kind::Ident(name) => {
                self.pos += 1;
                self.identifier(name, tok.offset)
            }
            Kind::Sym(c) => self.error(format!("unexpected `{c}`")),
        }
    }

    fn identifier(&mut self, name: String, offset: usize) -> Result<Expr> {
        let var = match name.as_str() {
            "t" => Some(Var::T),
            "x" => Some(Var::X),
            "u" => Some(Var::U),
            _ => None,
        };
        let tags = self.derivative_tags()?;
        let is_call = self.peek_sym('(');
        if let Some(v) = var {
            if is_call || tags.is_some() {
                return Err(Error::Syntax {
                    offset,
                    message: format!("variable `{name}` cannot be applied"),
                });
            }
            return Ok(Expr::var(v));
        }
        if !is_call {
            if tags.is_some() {
                return self.error("expected `(` after derivative tags");
            }
            if self.ctx.is_param(&name) {
                return Ok(Expr::param(&name));
            }
            return Err(Error::UnknownIdentifier { offset, name });
        }
        self.pos += 1;
        let mut args = vec![self.expr()?];
        while self.peek_sym(',') {
            self.pos += 1;
            args.push(self.expr()?);
        }
        self.expect_sym(')')?;

        if let Some(f) = Func::from_name(&name) {
            if tags.is_some() {
                return Err(Error::Syntax {
                    offset,
                    message: format!("builtin `{name}` cannot carry derivative tags"),
                });
            }
            if args.len() != 1 {
                return Err(Error::Arity {
                    name,
                    expected: 1,
                    found: args.len(),
                });
            }
            return Ok(Expr::apply(f, args.pop().expect("one argument")));
        }
        match self.ctx.function_arity(&name) {
            None => Err(Error::UnknownIdentifier { offset, name }),
            Some(Some(n)) if n != args.len() => Err(Error::Arity {
                name,
                expected: n,
                found: args.len(),
            }),
            Some(_) => {
                let derivs = match tags {
                    None => vec![0; args.len()],
                    Some(Tags::Primes(p)) if args.len() == 1 => vec![p],
                    Some(Tags::Primes(_)) => {
                        return Err(Error::Syntax {
                            offset,
                            message: "primes are only allowed on single-argument functions".to_string(),
                        })
                    }
                    Some(Tags::List(list)) if list.len() == args.len() => list,
                    Some(Tags::List(list)) => {
                        return Err(Error::Arity {
                            name,
                            expected: list.len(),
                            found: args.len(),
                        })
                    }
                };
                Ok(Expr::call_derivative(&name, args, derivs))
            }
        }
    }

    fn derivative_tags(&mut self) -> Result<Option<Tags>> {
        if !self.peek_sym('\'') {
            return Ok(None);
        }
        self.pos += 1;
        if self.peek_sym('[') {
            self.pos += 1;
            let mut list = vec![self.tag_order()?];
            while self.peek_sym(',') {
                self.pos += 1;
                list.push(self.tag_order()?);
            }
            self.expect_sym(']')?;
            return Ok(Some(Tags::List(list)));
        }
        let mut primes = 1;
        while self.peek_sym('\'') {
            self.pos += 1;
            primes += 1;
        }
        Ok(Some(Tags::Primes(primes)))
    }

    fn tag_order(&mut self) -> Result<u32> {
        let n = self.number()?;
        if !n.is_integer() || *n.numer() < 0 || *n.numer() > u32::MAX as i128 {
            return self.error("derivative order must be a non-negative integer");
        }
        Ok(*n.numer() as u32)
    }
}

enum Tags {
    Primes(u32),
    List(Vec<u32>),
}
