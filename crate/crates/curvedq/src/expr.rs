//! Arithmetic expressions for custom surfaces.
//!
//! Grammar (`^` is right associative and binds tighter than unary minus):
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := ('+' | '-') unary | power
//! power   := primary ('^' unary)?
//! primary := number | name | func '(' expr ')' | '(' expr ')'
//! func    := sin | cos | sinh | cosh | exp | sqrt
//! ```
//!
//! `pi` is a constant; every other name must be one of the variables the
//! expression is compiled against.

use std::fmt;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{message} at column {column} of `{source_text}`")]
pub struct ExprError {
    pub message: String,
    /// 1-based.
    pub column: usize,
    pub source_text: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Sinh,
    Cosh,
    Exp,
    Sqrt,
}

impl Func {
    fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "sinh" => Func::Sinh,
            "cosh" => Func::Cosh,
            "exp" => Func::Exp,
            "sqrt" => Func::Sqrt,
            _ => return None,
        })
    }

    fn apply(self, x: f64) -> f64 {
        match self {
            Func::Sin => x.sin(),
            Func::Cos => x.cos(),
            Func::Sinh => x.sinh(),
            Func::Cosh => x.cosh(),
            Func::Exp => x.exp(),
            Func::Sqrt => x.sqrt(),
        }
    }

    fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Sinh => "sinh",
            Func::Cosh => "cosh",
            Func::Exp => "exp",
            Func::Sqrt => "sqrt",
        }
    }
}

/// True for names usable as user variables: identifier syntax, not a
/// function, not `pi` and not a chart coordinate.
pub fn is_free_identifier(name: &str) -> bool {
    let mut chars = name.chars();
    let head = chars.next().is_some_and(|c| c.is_ascii_alphabetic() || c == '_');
    head && chars.all(|c| c.is_ascii_alphanumeric() || c == '_') && Func::from_name(name).is_none() && !matches!(name, "pi" | "q1" | "q2")
}

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Num(f64),
    Var(usize),
    Neg(Box<Node>),
    Add(Box<Node>, Box<Node>),
    Sub(Box<Node>, Box<Node>),
    Mul(Box<Node>, Box<Node>),
    Div(Box<Node>, Box<Node>),
    Pow(Box<Node>, Box<Node>),
    Call(Func, Box<Node>),
}

/// A compiled expression over a fixed list of variables.
#[derive(Debug, Clone, PartialEq)]
pub struct Expr {
    root: Node,
    variables: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Token {
    Num(f64),
    Ident(usize, usize),
    Op(char),
    LParen,
    RParen,
}

fn tokenize(src: &str) -> Result<Vec<(Token, usize)>, ExprError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    let err = |message: String, column: usize| ExprError {
        message,
        column: column + 1,
        source_text: src.to_string(),
    };
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_ascii_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                i += 1;
            }
            if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                let mut j = i + 1;
                if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                    j += 1;
                }
                if j < bytes.len() && bytes[j].is_ascii_digit() {
                    i = j;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let text = &src[start..i];
            let v: f64 = text.parse().map_err(|_| err(format!("malformed number `{text}`"), start))?;
            out.push((Token::Num(v), start));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push((Token::Ident(start, i), start));
        } else if "+-*/^".contains(c) {
            out.push((Token::Op(c), i));
            i += 1;
        } else if c == '(' {
            out.push((Token::LParen, i));
            i += 1;
        } else if c == ')' {
            out.push((Token::RParen, i));
            i += 1;
        } else {
            return Err(err(format!("unexpected character `{c}`"), i));
        }
    }
    Ok(out)
}

struct Parser<'a> {
    src: &'a str,
    tokens: Vec<(Token, usize)>,
    pos: usize,
    variables: &'a [String],
}

impl Parser<'_> {
    fn error(&self, message: impl Into<String>) -> ExprError {
        let column = self.tokens.get(self.pos).map_or(self.src.len(), |t| t.1) + 1;
        ExprError {
            message: message.into(),
            column,
            source_text: self.src.to_string(),
        }
    }

    fn peek(&self) -> Option<Token> {
        self.tokens.get(self.pos).map(|t| t.0)
    }

    fn expr(&mut self) -> Result<Node, ExprError> {
        let mut lhs = self.term()?;
        while let Some(Token::Op(op @ ('+' | '-'))) = self.peek() {
            self.pos += 1;
            let rhs = self.term()?;
            lhs = if op == '+' { Node::Add(lhs.into(), rhs.into()) } else { Node::Sub(lhs.into(), rhs.into()) };
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Node, ExprError> {
        let mut lhs = self.unary()?;
        while let Some(Token::Op(op @ ('*' | '/'))) = self.peek() {
            self.pos += 1;
            let rhs = self.unary()?;
            lhs = if op == '*' { Node::Mul(lhs.into(), rhs.into()) } else { Node::Div(lhs.into(), rhs.into()) };
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Node, ExprError> {
        match self.peek() {
            Some(Token::Op('-')) => {
                self.pos += 1;
                Ok(Node::Neg(self.unary()?.into()))
            }
            Some(Token::Op('+')) => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Node, ExprError> {
        let base = self.primary()?;
        if let Some(Token::Op('^')) = self.peek() {
            self.pos += 1;
            let exp = self.unary()?;
            return Ok(Node::Pow(base.into(), exp.into()));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Node, ExprError> {
        match self.peek() {
            Some(Token::Num(v)) => {
                self.pos += 1;
                Ok(Node::Num(v))
            }
            Some(Token::LParen) => {
                self.pos += 1;
                let inner = self.expr()?;
                self.expect_rparen()?;
                Ok(inner)
            }
            Some(Token::Ident(a, b)) => {
                let name = &self.src[a..b];
                if let Some(f) = Func::from_name(name) {
                    self.pos += 1;
                    if self.peek() != Some(Token::LParen) {
                        return Err(self.error(format!("`{name}` must be followed by `(`")));
                    }
                    self.pos += 1;
                    let arg = self.expr()?;
                    self.expect_rparen()?;
                    return Ok(Node::Call(f, arg.into()));
                }
                if let Some(k) = self.variables.iter().position(|v| v == name) {
                    self.pos += 1;
                    return Ok(Node::Var(k));
                }
                if name == "pi" {
                    self.pos += 1;
                    return Ok(Node::Num(std::f64::consts::PI));
                }
                Err(self.error(format!("unknown name `{name}`")))
            }
            Some(_) => Err(self.error("expected a number, name or `(`")),
            None => Err(self.error("unexpected end of expression")),
        }
    }

    fn expect_rparen(&mut self) -> Result<(), ExprError> {
        if self.peek() == Some(Token::RParen) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error("expected `)`"))
        }
    }
}

impl Expr {
    /// Compiles `src`; `variables` fixes the order of the values passed to
    /// [`Expr::eval`]. Variables shadow the constant `pi`.
    pub fn parse(src: &str, variables: &[&str]) -> Result<Self, ExprError> {
        let variables: Vec<String> = variables.iter().map(|s| s.to_string()).collect();
        let tokens = tokenize(src)?;
        let mut p = Parser {
            src,
            tokens,
            pos: 0,
            variables: &variables,
        };
        let root = p.expr()?;
        if p.pos != p.tokens.len() {
            return Err(p.error("unexpected trailing input"));
        }
        Ok(Self { root, variables })
    }

    pub fn variables(&self) -> &[String] {
        &self.variables
    }

    /// Evaluates with `values[i]` bound to the i-th variable.
    pub fn eval(&self, values: &[f64]) -> f64 {
        fn go(n: &Node, v: &[f64]) -> f64 {
            match n {
                Node::Num(x) => *x,
                Node::Var(k) => v[*k],
                Node::Neg(a) => -go(a, v),
                Node::Add(a, b) => go(a, v) + go(b, v),
                Node::Sub(a, b) => go(a, v) - go(b, v),
                Node::Mul(a, b) => go(a, v) * go(b, v),
                Node::Div(a, b) => go(a, v) / go(b, v),
                Node::Pow(a, b) => {
                    let e = go(b, v);
                    if e == e.trunc() && e.abs() <= 64.0 {
                        go(a, v).powi(e as i32)
                    } else {
                        go(a, v).powf(e)
                    }
                }
                Node::Call(f, a) => f.apply(go(a, v)),
            }
        }
        go(&self.root, values)
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn go(n: &Node, vars: &[String], f: &mut fmt::Formatter<'_>) -> fmt::Result {
            let bin = |f: &mut fmt::Formatter<'_>, a: &Node, op: &str, b: &Node| -> fmt::Result {
                f.write_str("(")?;
                go(a, vars, f)?;
                write!(f, " {op} ")?;
                go(b, vars, f)?;
                f.write_str(")")
            };
            match n {
                Node::Num(x) => write!(f, "{x:?}"),
                Node::Var(k) => f.write_str(&vars[*k]),
                Node::Neg(a) => {
                    f.write_str("(-")?;
                    go(a, vars, f)?;
                    f.write_str(")")
                }
                Node::Add(a, b) => bin(f, a, "+", b),
                Node::Sub(a, b) => bin(f, a, "-", b),
                Node::Mul(a, b) => bin(f, a, "*", b),
                Node::Div(a, b) => bin(f, a, "/", b),
                Node::Pow(a, b) => bin(f, a, "^", b),
                Node::Call(func, a) => {
                    write!(f, "{}(", func.name())?;
                    go(a, vars, f)?;
                    f.write_str(")")
                }
            }
        }
        go(&self.root, &self.variables, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn eval(src: &str, q: [f64; 2]) -> f64 {
        Expr::parse(src, &["q1", "q2"]).unwrap().eval(&q)
    }

    #[test]
    fn precedence_and_associativity() {
        assert_eq!(eval("1 + 2 * 3", [0.0, 0.0]), 7.0);
        assert_eq!(eval("2 ^ 3 ^ 2", [0.0, 0.0]), 512.0);
        assert_eq!(eval("-2 ^ 2", [0.0, 0.0]), -4.0);
        assert_eq!(eval("2 ^ -1", [0.0, 0.0]), 0.5);
        assert_eq!(eval("8 / 4 / 2", [0.0, 0.0]), 1.0);
        assert_eq!(eval("1 - 2 - 3", [0.0, 0.0]), -4.0);
        assert_eq!(eval("(1 + 2) * q2", [0.0, 4.0]), 12.0);
        assert_eq!(eval("1.5e2 + .5", [0.0, 0.0]), 150.5);
    }

    #[test]
    fn functions_and_constants() {
        let x = eval("(2 + cos(q1)) * cos(q2) + sqrt(4) * sinh(0) + exp(0)", [0.3, 1.1]);
        assert!((x - ((2.0 + 0.3f64.cos()) * 1.1f64.cos() + 1.0)).abs() < 1e-15);
        assert!((eval("cosh(1)^2 - sinh(1)^2", [0.0, 0.0]) - 1.0).abs() < 1e-14);
        assert!((eval("sin(pi / 2)", [0.0, 0.0]) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn errors_carry_columns() {
        let e = Expr::parse("1 + foo", &["q1"]).unwrap_err();
        assert_eq!(e.column, 5);
        assert!(Expr::parse("sin 2", &[]).is_err());
        assert!(Expr::parse("(1 + 2", &[]).is_err());
        assert!(Expr::parse("1 2", &[]).is_err());
        assert!(Expr::parse("1 $ 2", &[]).is_err());
        assert!(Expr::parse("", &[]).is_err());
    }

    #[test]
    fn display_round_trips() {
        let e = Expr::parse("-q1 ^ 2 + 3 * sin(q2) / 2", &["q1", "q2"]).unwrap();
        let again = Expr::parse(&e.to_string(), &["q1", "q2"]).unwrap();
        for q in [[0.1, 0.2], [1.5, -2.0]] {
            assert_eq!(e.eval(&q), again.eval(&q));
        }
    }
}
