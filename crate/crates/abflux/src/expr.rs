//! Gauge functions χ(x, y) as parsed expressions with analytic gradients.
//!
//! The accepted grammar is deliberately small:
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := factor (('*' | '/') factor)*
//! factor  := '-' factor | primary
//! primary := number | 'x' | 'y' | 'pi' | func '(' expr (',' expr)* ')' | '(' expr ')'
//! func    := sin | cos | sqrt | atan2 | pow
//! ```
//!
//! Gradients are exact, propagated through forward-mode duals carrying
//! (value, ∂/∂x, ∂/∂y). In particular ∇atan2(u, v) = (v∇u − u∇v)/(u² + v²),
//! which is single-valued everywhere off the winding point even though
//! atan2 itself has a branch cut; line integrals of such gradients are the
//! caller's way of handling winding gauge functions.

use std::fmt;

use crate::geom::Vec2;

/// Parse or evaluation failure, with the byte column of the offending token.
#[derive(Debug, Clone, thiserror::Error)]
#[error("gauge expression error at column {column}: {message}")]
pub struct ExprError {
    pub message: String,
    pub column: usize,
}

impl ExprError {
    fn new(message: impl Into<String>, column: usize) -> Self {
        Self {
            message: message.into(),
            column,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Tok {
    Num(f64),
    Ident(Ident),
    Plus,
    Minus,
    Star,
    Slash,
    LParen,
    RParen,
    Comma,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Ident {
    X,
    Y,
    Pi,
    Sin,
    Cos,
    Sqrt,
    Atan2,
    Pow,
}

impl Ident {
    fn arity(self) -> Option<usize> {
        match self {
            Ident::Sin | Ident::Cos | Ident::Sqrt => Some(1),
            Ident::Atan2 | Ident::Pow => Some(2),
            _ => None,
        }
    }
}

#[derive(Debug, Clone)]
enum Node {
    Num(f64),
    X,
    Y,
    Neg(Box<Node>),
    Add(Box<Node>, Box<Node>),
    Sub(Box<Node>, Box<Node>),
    Mul(Box<Node>, Box<Node>),
    Div(Box<Node>, Box<Node>),
    Sin(Box<Node>),
    Cos(Box<Node>),
    Sqrt(Box<Node>),
    Atan2(Box<Node>, Box<Node>),
    Pow(Box<Node>, Box<Node>),
}

/// Value with its partial derivatives along x and y.
#[derive(Debug, Clone, Copy)]
struct Dual {
    v: f64,
    dx: f64,
    dy: f64,
}

impl Dual {
    const fn con(v: f64) -> Self {
        Dual { v, dx: 0.0, dy: 0.0 }
    }
}

fn d_add(a: Dual, b: Dual) -> Dual {
    Dual { v: a.v + b.v, dx: a.dx + b.dx, dy: a.dy + b.dy }
}
fn d_sub(a: Dual, b: Dual) -> Dual {
    Dual { v: a.v - b.v, dx: a.dx - b.dx, dy: a.dy - b.dy }
}
fn d_mul(a: Dual, b: Dual) -> Dual {
    Dual {
        v: a.v * b.v,
        dx: a.dx * b.v + a.v * b.dx,
        dy: a.dy * b.v + a.v * b.dy,
    }
}
fn d_div(a: Dual, b: Dual) -> Dual {
    let inv = 1.0 / b.v;
    let v = a.v * inv;
    Dual {
        v,
        dx: (a.dx - v * b.dx) * inv,
        dy: (a.dy - v * b.dy) * inv,
    }
}

impl Node {
    fn eval(&self, x: Dual, y: Dual) -> Dual {
        match self {
            Node::Num(v) => Dual::con(*v),
            Node::X => x,
            Node::Y => y,
            Node::Neg(a) => {
                let a = a.eval(x, y);
                Dual { v: -a.v, dx: -a.dx, dy: -a.dy }
            }
            Node::Add(a, b) => d_add(a.eval(x, y), b.eval(x, y)),
            Node::Sub(a, b) => d_sub(a.eval(x, y), b.eval(x, y)),
            Node::Mul(a, b) => d_mul(a.eval(x, y), b.eval(x, y)),
            Node::Div(a, b) => d_div(a.eval(x, y), b.eval(x, y)),
            Node::Sin(a) => {
                let a = a.eval(x, y);
                let (s, c) = a.v.sin_cos();
                Dual { v: s, dx: c * a.dx, dy: c * a.dy }
            }
            Node::Cos(a) => {
                let a = a.eval(x, y);
                let (s, c) = a.v.sin_cos();
                Dual { v: c, dx: -s * a.dx, dy: -s * a.dy }
            }
            Node::Sqrt(a) => {
                let a = a.eval(x, y);
                let r = a.v.sqrt();
                let g = 0.5 / r;
                Dual { v: r, dx: g * a.dx, dy: g * a.dy }
            }
            Node::Atan2(u, w) => {
                let u = u.eval(x, y);
                let w = w.eval(x, y);
                let den = u.v * u.v + w.v * w.v;
                Dual {
                    v: u.v.atan2(w.v),
                    dx: (w.v * u.dx - u.v * w.dx) / den,
                    dy: (w.v * u.dy - u.v * w.dy) / den,
                }
            }
            Node::Pow(a, b) => {
                let a = a.eval(x, y);
                let b = b.eval(x, y);
                let v = a.v.powf(b.v);
                if b.dx == 0.0 && b.dy == 0.0 {
                    // Constant exponent: d(a^n) = n a^(n-1) da, valid for
                    // negative bases with integral n as well.
                    let g = b.v * a.v.powf(b.v - 1.0);
                    Dual { v, dx: g * a.dx, dy: g * a.dy }
                } else {
                    let ln = a.v.ln();
                    let gx = v * (b.dx * ln + b.v * a.dx / a.v);
                    let gy = v * (b.dy * ln + b.v * a.dy / a.v);
                    Dual { v, dx: gx, dy: gy }
                }
            }
        }
    }
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Self { src: src.as_bytes(), pos: 0 }
    }

    /// Next token with its starting column (1-based), or None at end.
    fn next(&mut self) -> Result<Option<(Tok, usize)>, ExprError> {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        if self.pos >= self.src.len() {
            return Ok(None);
        }
        let col = self.pos + 1;
        let b = self.src[self.pos];
        let simple = match b {
            b'+' => Some(Tok::Plus),
            b'-' => Some(Tok::Minus),
            b'*' => Some(Tok::Star),
            b'/' => Some(Tok::Slash),
            b'(' => Some(Tok::LParen),
            b')' => Some(Tok::RParen),
            b',' => Some(Tok::Comma),
            _ => None,
        };
        if let Some(t) = simple {
            self.pos += 1;
            return Ok(Some((t, col)));
        }
        if b.is_ascii_digit() || b == b'.' {
            let start = self.pos;
            while self.pos < self.src.len()
                && (self.src[self.pos].is_ascii_digit() || self.src[self.pos] == b'.')
            {
                self.pos += 1;
            }
            // Exponent part: 1e-3, 2.5E4.
            if self.pos < self.src.len() && (self.src[self.pos] | 0x20) == b'e' {
                let mut p = self.pos + 1;
                if p < self.src.len() && (self.src[p] == b'+' || self.src[p] == b'-') {
                    p += 1;
                }
                if p < self.src.len() && self.src[p].is_ascii_digit() {
                    self.pos = p;
                    while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                        self.pos += 1;
                    }
                }
            }
            let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
            let v: f64 = text
                .parse()
                .map_err(|_| ExprError::new(format!("malformed number `{text}`"), col))?;
            return Ok(Some((Tok::Num(v), col)));
        }
        if b.is_ascii_alphabetic() {
            let start = self.pos;
            while self.pos < self.src.len()
                && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
            {
                self.pos += 1;
            }
            let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
            let id = match text {
                "x" => Ident::X,
                "y" => Ident::Y,
                "pi" => Ident::Pi,
                "sin" => Ident::Sin,
                "cos" => Ident::Cos,
                "sqrt" => Ident::Sqrt,
                "atan2" => Ident::Atan2,
                "pow" => Ident::Pow,
                other => {
                    return Err(ExprError::new(
                        format!("unknown identifier `{other}` (expected x, y, pi, or a function)"),
                        col,
                    ))
                }
            };
            return Ok(Some((Tok::Ident(id), col)));
        }
        Err(ExprError::new(
            format!("unexpected character `{}`", b as char),
            col,
        ))
    }
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    idx: usize,
    len: usize,
}

impl Parser {
    fn peek(&self) -> Option<&(Tok, usize)> {
        self.toks.get(self.idx)
    }

    fn bump(&mut self) -> Option<(Tok, usize)> {
        let t = self.toks.get(self.idx).copied();
        self.idx += 1;
        t
    }

    fn end_col(&self) -> usize {
        self.len + 1
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<(), ExprError> {
        match self.bump() {
            Some((t, _)) if t == tok => Ok(()),
            Some((t, c)) => Err(ExprError::new(format!("expected {what}, found {t:?}"), c)),
            None => Err(ExprError::new(format!("expected {what}"), self.end_col())),
        }
    }

    fn expr(&mut self) -> Result<Node, ExprError> {
        let mut lhs = self.term()?;
        while let Some((tok, _)) = self.peek() {
            let op = *tok;
            if op != Tok::Plus && op != Tok::Minus {
                break;
            }
            self.bump();
            let rhs = self.term()?;
            lhs = if op == Tok::Plus {
                Node::Add(Box::new(lhs), Box::new(rhs))
            } else {
                Node::Sub(Box::new(lhs), Box::new(rhs))
            };
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Node, ExprError> {
        let mut lhs = self.factor()?;
        while let Some((tok, _)) = self.peek() {
            let op = *tok;
            if op != Tok::Star && op != Tok::Slash {
                break;
            }
            self.bump();
            let rhs = self.factor()?;
            lhs = if op == Tok::Star {
                Node::Mul(Box::new(lhs), Box::new(rhs))
            } else {
                Node::Div(Box::new(lhs), Box::new(rhs))
            };
        }
        Ok(lhs)
    }

    fn factor(&mut self) -> Result<Node, ExprError> {
        if let Some((Tok::Minus, _)) = self.peek() {
            self.bump();
            return Ok(Node::Neg(Box::new(self.factor()?)));
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<Node, ExprError> {
        match self.bump() {
            Some((Tok::Num(v), _)) => Ok(Node::Num(v)),
            Some((Tok::Ident(Ident::X), _)) => Ok(Node::X),
            Some((Tok::Ident(Ident::Y), _)) => Ok(Node::Y),
            Some((Tok::Ident(Ident::Pi), _)) => Ok(Node::Num(std::f64::consts::PI)),
            Some((Tok::Ident(f), col)) => {
                let arity = f.arity().expect("non-function idents handled above");
                self.expect(Tok::LParen, "`(` after function name")?;
                let mut args = vec![self.expr()?];
                while let Some((Tok::Comma, _)) = self.peek() {
                    self.bump();
                    args.push(self.expr()?);
                }
                self.expect(Tok::RParen, "`)`")?;
                if args.len() != arity {
                    return Err(ExprError::new(
                        format!("{f:?} takes {arity} argument(s), got {}", args.len()),
                        col,
                    ));
                }
                let mut it = args.into_iter();
                let a = Box::new(it.next().unwrap());
                Ok(match f {
                    Ident::Sin => Node::Sin(a),
                    Ident::Cos => Node::Cos(a),
                    Ident::Sqrt => Node::Sqrt(a),
                    Ident::Atan2 => Node::Atan2(a, Box::new(it.next().unwrap())),
                    Ident::Pow => Node::Pow(a, Box::new(it.next().unwrap())),
                    _ => unreachable!(),
                })
            }
            Some((Tok::LParen, _)) => {
                let inner = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(inner)
            }
            Some((t, c)) => Err(ExprError::new(format!("unexpected token {t:?}"), c)),
            None => Err(ExprError::new("unexpected end of expression", self.end_col())),
        }
    }
}

/// A scalar gauge function χ(x, y) with an exact gradient.
///
/// Coordinates are global plane coordinates, not tube-relative ones.
#[derive(Debug, Clone)]
pub struct ChiField {
    source: String,
    ast: Node,
}

impl ChiField {
    pub fn parse(source: &str) -> Result<Self, ExprError> {
        let mut lexer = Lexer::new(source);
        let mut toks = Vec::new();
        while let Some(t) = lexer.next()? {
            toks.push(t);
        }
        if toks.is_empty() {
            return Err(ExprError::new("empty expression", 1));
        }
        let len = source.len();
        let mut parser = Parser { toks, idx: 0, len };
        let ast = parser.expr()?;
        if let Some((t, c)) = parser.peek() {
            return Err(ExprError::new(format!("trailing input {t:?}"), *c));
        }
        Ok(Self {
            source: source.to_owned(),
            ast,
        })
    }

    #[must_use]
    pub fn eval(&self, p: Vec2) -> f64 {
        self.dual(p).v
    }

    /// ∇χ at `p`.
    #[must_use]
    pub fn gradient(&self, p: Vec2) -> Vec2 {
        let d = self.dual(p);
        Vec2::new(d.dx, d.dy)
    }

    /// χ ↦ −χ, pointwise exact (the gradient negates bitwise).
    #[must_use]
    pub fn negated(&self) -> Self {
        Self {
            source: format!("-({})", self.source),
            ast: Node::Neg(Box::new(self.ast.clone())),
        }
    }

    #[must_use]
    pub fn source(&self) -> &str {
        &self.source
    }

    fn dual(&self, p: Vec2) -> Dual {
        let x = Dual { v: p.x, dx: 1.0, dy: 0.0 };
        let y = Dual { v: p.y, dx: 0.0, dy: 1.0 };
        self.ast.eval(x, y)
    }
}

impl fmt::Display for ChiField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.source)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn grad_fd(chi: &ChiField, p: Vec2) -> Vec2 {
        // Independent check: symmetric differences, step tuned for f64.
        let h = 1e-6;
        Vec2::new(
            (chi.eval(Vec2::new(p.x + h, p.y)) - chi.eval(Vec2::new(p.x - h, p.y))) / (2.0 * h),
            (chi.eval(Vec2::new(p.x, p.y + h)) - chi.eval(Vec2::new(p.x, p.y - h))) / (2.0 * h),
        )
    }

    #[test]
    fn linear_gauge_gradient_is_constant() {
        let chi = ChiField::parse("3*x").unwrap();
        let g = chi.gradient(Vec2::new(-2.0, 5.0));
        assert_eq!(g, Vec2::new(3.0, 0.0));
        assert_relative_eq!(chi.eval(Vec2::new(1.5, 0.0)), 4.5);
    }

    #[test]
    fn arithmetic_and_precedence() {
        let chi = ChiField::parse("1 + 2*x - y/4").unwrap();
        assert_relative_eq!(chi.eval(Vec2::new(3.0, 8.0)), 1.0 + 6.0 - 2.0);
        let chi = ChiField::parse("(1 + x) * (1 - y)").unwrap();
        assert_relative_eq!(chi.eval(Vec2::new(2.0, 3.0)), -6.0);
        assert_relative_eq!(ChiField::parse("2e-1 * pi").unwrap().eval(Vec2::ZERO), 0.2 * PI);
    }

    #[test]
    fn gradients_match_finite_differences() {
        let cases = [
            "sin(x)*cos(y)",
            "sqrt(x*x + y*y + 1)",
            "pow(x, 3) - pow(y, 2)",
            "atan2(y, x)",
            "x*y/(1 + x*x) + sin(2*y)",
            "pow(x*x + 2, y)",
        ];
        let pts = [Vec2::new(0.7, -0.4), Vec2::new(-1.3, 2.2), Vec2::new(2.0, 0.5)];
        for src in cases {
            let chi = ChiField::parse(src).unwrap();
            for p in pts {
                let g = chi.gradient(p);
                let fd = grad_fd(&chi, p);
                assert_relative_eq!(g.x, fd.x, max_relative = 1e-6, epsilon = 1e-8);
                assert_relative_eq!(g.y, fd.y, max_relative = 1e-6, epsilon = 1e-8);
            }
        }
    }

    #[test]
    fn winding_gradient_is_azimuthal() {
        // ∇atan2(y, x) = θ̂/ρ: tangential, magnitude 1/ρ.
        let chi = ChiField::parse("atan2(y, x)").unwrap();
        let p = Vec2::new(0.0, 2.0);
        let g = chi.gradient(p);
        assert_relative_eq!(g.x, -0.5, max_relative = 1e-14);
        assert_relative_eq!(g.y, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn negation_is_pointwise_exact() {
        let chi = ChiField::parse("sin(x)*y + 0.25*x").unwrap();
        let neg = chi.negated();
        let p = Vec2::new(1.1, -0.3);
        assert_eq!(chi.eval(p), -neg.eval(p));
        let (g, h) = (chi.gradient(p), neg.gradient(p));
        assert_eq!(g.x, -h.x);
        assert_eq!(g.y, -h.y);
    }

    #[test]
    fn parse_errors_carry_columns() {
        let e = ChiField::parse("x + ").unwrap_err();
        assert_eq!(e.column, 5);
        let e = ChiField::parse("x ++ y").unwrap_err();
        assert!(e.column >= 3);
        let e = ChiField::parse("foo(x)").unwrap_err();
        assert_eq!(e.column, 1);
        assert!(e.message.contains("foo"));
        let e = ChiField::parse("atan2(x)").unwrap_err();
        assert!(e.message.contains("2 argument"));
        let e = ChiField::parse("x y").unwrap_err();
        assert_eq!(e.column, 3);
        assert!(ChiField::parse("").is_err());
        let e = ChiField::parse("x + $").unwrap_err();
        assert_eq!(e.column, 5);
    }
}
