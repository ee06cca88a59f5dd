//! Coefficient functions `q(t, omega)`.
//!
//! A coefficient is supplied as a parsed arithmetic expression, an entry of
//! the built-in catalog, or an arbitrary callback. The grammar is
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := atom ('^' unary)?          right associative
//! atom    := number | 't' | 'omega' | func '(' expr ')' | '(' expr ')'
//! func    := sin | cos | exp | log | sqrt | tanh | abs
//! ```
//!
//! so `-t^2` is `-(t^2)` and `2^-1` is `0.5`.
//!
//! The solver multiplies `q` by `omega^2`. Catalog entries for Legendre and
//! Gegenbauer functions fold the degree into `q` and are meant to be used with
//! `omega = 1`.

use std::fmt;
use std::sync::Arc;

use crate::chebyshev::ChebGrid;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Log,
    Sqrt,
    Tanh,
    Abs,
}

impl Func {
    fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sqrt" => Func::Sqrt,
            "tanh" => Func::Tanh,
            "abs" => Func::Abs,
            _ => return None,
        })
    }

    fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
            Func::Tanh => "tanh",
            Func::Abs => "abs",
        }
    }

    fn apply(self, x: f64) -> f64 {
        match self {
            Func::Sin => x.sin(),
            Func::Cos => x.cos(),
            Func::Exp => x.exp(),
            Func::Log => x.ln(),
            Func::Sqrt => x.sqrt(),
            Func::Tanh => x.tanh(),
            Func::Abs => x.abs(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    fn symbol(self) -> char {
        match self {
            BinOp::Add => '+',
            BinOp::Sub => '-',
            BinOp::Mul => '*',
            BinOp::Div => '/',
            BinOp::Pow => '^',
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    T,
    Omega,
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

impl Expr {
    pub fn eval(&self, t: f64, omega: f64) -> f64 {
        match self {
            Expr::Num(v) => *v,
            Expr::T => t,
            Expr::Omega => omega,
            Expr::Neg(e) => -e.eval(t, omega),
            Expr::Bin(op, l, r) => {
                let (l, r) = (l.eval(t, omega), r.eval(t, omega));
                match op {
                    BinOp::Add => l + r,
                    BinOp::Sub => l - r,
                    BinOp::Mul => l * r,
                    BinOp::Div => l / r,
                    BinOp::Pow => l.powf(r),
                }
            }
            Expr::Call(f, e) => f.apply(e.eval(t, omega)),
        }
    }
}

/// Fully parenthesized rendering; re-parses to an equivalent tree.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) => write!(f, "{v:?}"),
            Expr::T => f.write_str("t"),
            Expr::Omega => f.write_str("omega"),
            Expr::Neg(e) => write!(f, "(-{e})"),
            Expr::Bin(op, l, r) => write!(f, "({l} {} {r})", op.symbol()),
            Expr::Call(func, e) => write!(f, "{}({e})", func.name()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Num(f64),
    Ident(String),
    Op(char),
    LParen,
    RParen,
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn tokens(src: &'a str) -> Result<Vec<(usize, Token)>> {
        let mut lx = Lexer { src, pos: 0 };
        let mut out = Vec::new();
        while let Some(tok) = lx.next_token()? {
            out.push(tok);
        }
        Ok(out)
    }

    fn peek(&self) -> Option<u8> {
        self.src.as_bytes().get(self.pos).copied()
    }

    fn next_token(&mut self) -> Result<Option<(usize, Token)>> {
        while matches!(self.peek(), Some(c) if c.is_ascii_whitespace()) {
            self.pos += 1;
        }
        let start = self.pos;
        let Some(c) = self.peek() else {
            return Ok(None);
        };
        let tok = match c {
            b'0'..=b'9' | b'.' => self.number(start)?,
            b'a'..=b'z' | b'A'..=b'Z' | b'_' => {
                while matches!(self.peek(), Some(c) if c.is_ascii_alphanumeric() || c == b'_') {
                    self.pos += 1;
                }
                Token::Ident(self.src[start..self.pos].to_string())
            }
            b'+' | b'-' | b'*' | b'/' | b'^' => {
                self.pos += 1;
                Token::Op(c as char)
            }
            b'(' => {
                self.pos += 1;
                Token::LParen
            }
            b')' => {
                self.pos += 1;
                Token::RParen
            }
            _ => {
                let ch = self.src[start..].chars().next().unwrap_or('?');
                return Err(parse_error(start, format!("unexpected character '{ch}'")));
            }
        };
        Ok(Some((start, tok)))
    }

    fn number(&mut self, start: usize) -> Result<Token> {
        let digits = |lx: &mut Self| {
            let from = lx.pos;
            while matches!(lx.peek(), Some(b'0'..=b'9')) {
                lx.pos += 1;
            }
            lx.pos - from
        };
        let mut n = digits(self);
        if self.peek() == Some(b'.') {
            self.pos += 1;
            n += digits(self);
        }
        if n == 0 {
            return Err(parse_error(start, "malformed number"));
        }
        if matches!(self.peek(), Some(b'e' | b'E')) {
            let save = self.pos;
            self.pos += 1;
            if matches!(self.peek(), Some(b'+' | b'-')) {
                self.pos += 1;
            }
            if digits(self) == 0 {
                self.pos = save;
                return Err(parse_error(save, "malformed exponent"));
            }
        }
        let text = &self.src[start..self.pos];
        text.parse::<f64>()
            .map(Token::Num)
            .map_err(|_| parse_error(start, format!("malformed number '{text}'")))
    }
}

fn parse_error(offset: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        offset,
        message: message.into(),
    }
}

struct Parser {
    tokens: Vec<(usize, Token)>,
    idx: usize,
    end: usize,
}

impl Parser {
    fn offset(&self) -> usize {
        self.tokens.get(self.idx).map_or(self.end, |(o, _)| *o)
    }

    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.idx).map(|(_, t)| t)
    }

    fn bump(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.idx).map(|(_, t)| t.clone());
        self.idx += 1;
        t
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        while let Some(Token::Op(c @ ('+' | '-'))) = self.peek() {
            let op = if *c == '+' { BinOp::Add } else { BinOp::Sub };
            self.idx += 1;
            let rhs = self.term()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        while let Some(Token::Op(c @ ('*' | '/'))) = self.peek() {
            let op = if *c == '*' { BinOp::Mul } else { BinOp::Div };
            self.idx += 1;
            let rhs = self.unary()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr> {
        if let Some(Token::Op('-')) = self.peek() {
            self.idx += 1;
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if let Some(Token::Op('^')) = self.peek() {
            self.idx += 1;
            let exp = self.unary()?;
            return Ok(Expr::Bin(BinOp::Pow, Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr> {
        let at = self.offset();
        match self.bump() {
            Some(Token::Num(v)) => Ok(Expr::Num(v)),
            Some(Token::Ident(name)) => match name.as_str() {
                "t" => Ok(Expr::T),
                "omega" => Ok(Expr::Omega),
                _ => {
                    let func = Func::from_name(&name)
                        .ok_or_else(|| parse_error(at, format!("unknown identifier '{name}'")))?;
                    self.expect_lparen()?;
                    let arg = self.expr()?;
                    self.expect_rparen()?;
                    Ok(Expr::Call(func, Box::new(arg)))
                }
            },
            Some(Token::LParen) => {
                let e = self.expr()?;
                self.expect_rparen()?;
                Ok(e)
            }
            Some(tok) => Err(parse_error(at, format!("unexpected token {tok:?}"))),
            None => Err(parse_error(at, "unexpected end of input")),
        }
    }

    fn expect_lparen(&mut self) -> Result<()> {
        let at = self.offset();
        match self.bump() {
            Some(Token::LParen) => Ok(()),
            _ => Err(parse_error(at, "expected '('")),
        }
    }

    fn expect_rparen(&mut self) -> Result<()> {
        let at = self.offset();
        match self.bump() {
            Some(Token::RParen) => Ok(()),
            _ => Err(parse_error(at, "expected ')'")),
        }
    }
}

pub fn parse_expr(src: &str) -> Result<Expr> {
    if src.trim().is_empty() {
        return Err(parse_error(0, "empty expression"));
    }
    let tokens = Lexer::tokens(src)?;
    let mut p = Parser {
        tokens,
        idx: 0,
        end: src.len(),
    };
    let e = p.expr()?;
    if p.idx < p.tokens.len() {
        return Err(parse_error(p.offset(), "unexpected trailing input"));
    }
    Ok(e)
}

/// Built-in test coefficients.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Catalog {
    /// Normal form of Legendre's equation, solved by `L_n(t) sqrt(1 - t^2)`:
    /// `1/(1-t^2)^2 + n(n+1)/(1-t^2)`.
    Legendre { n: f64 },
    /// Normal form of the Gegenbauer equation, solved by
    /// `C_n^a(t) (1-t^2)^((2a+1)/4)`.
    Gegenbauer { n: f64, order: f64 },
    /// `(3t^2 w^2 + t^2 w + 1)/(w^2 - (t^2+1) w + 1) + 2 exp(-t)/(t^2 + 1/10)`.
    Bvp,
}

impl Catalog {
    pub fn name(&self) -> &'static str {
        match self {
            Catalog::Legendre { .. } => "legendre",
            Catalog::Gegenbauer { .. } => "gegenbauer",
            Catalog::Bvp => "bvp",
        }
    }

    fn eval(&self, t: f64, omega: f64) -> Result<f64> {
        self.eval_with_gaps(t, 1.0 - t, 1.0 + t, omega)
    }

    /// Evaluation with `1 - t` and `1 + t` supplied separately, so that the
    /// poles at `t = 1` and `t = -1` can be approached without cancellation.
    fn eval_with_gaps(&self, t: f64, one_minus: f64, one_plus: f64, omega: f64) -> Result<f64> {
        match *self {
            Catalog::Legendre { n } => {
                let s = one_minus * one_plus;
                if s <= 0.0 {
                    return Err(Error::NumericFailure(format!(
                        "Legendre coefficient has a pole at t = {t}"
                    )));
                }
                Ok(1.0 / (s * s) + n * (n + 1.0) / s)
            }
            Catalog::Gegenbauer { n, order } => {
                let s = one_minus * one_plus;
                if s <= 0.0 {
                    return Err(Error::NumericFailure(format!(
                        "Gegenbauer coefficient has a pole at t = {t}"
                    )));
                }
                let c0 = order - order * order + 0.75;
                let c1 = (n + order - 0.5) * (n + order + 0.5);
                Ok(c0 / (s * s) + c1 / s)
            }
            Catalog::Bvp => {
                let t2 = t * t;
                let num = 3.0 * t2 * omega * omega + t2 * omega + 1.0;
                let den = -(t2 + 1.0) * omega + omega * omega + 1.0;
                Ok(num / den + 2.0 * (-t).exp() / (t2 + 0.1))
            }
        }
    }
}

pub type QFn = dyn Fn(f64, f64) -> f64 + Send + Sync;

/// How `q(t, omega)` is supplied.
#[derive(Clone)]
pub enum CoefficientSpec {
    Expression { source: String, expr: Expr },
    Catalog(Catalog),
    Callback(Arc<QFn>),
}

impl fmt::Debug for CoefficientSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CoefficientSpec::Expression { source, .. } => {
                f.debug_tuple("Expression").field(source).finish()
            }
            CoefficientSpec::Catalog(c) => f.debug_tuple("Catalog").field(c).finish(),
            CoefficientSpec::Callback(_) => f.write_str("Callback(..)"),
        }
    }
}

impl CoefficientSpec {
    pub fn parse(source: &str) -> Result<Self> {
        let expr = parse_expr(source)?;
        Ok(CoefficientSpec::Expression {
            source: source.to_string(),
            expr,
        })
    }

    pub fn callback(f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        CoefficientSpec::Callback(Arc::new(f))
    }

    pub fn legendre(n: u64) -> Self {
        CoefficientSpec::Catalog(Catalog::Legendre { n: n as f64 })
    }

    pub fn gegenbauer(n: u64, order: f64) -> Self {
        CoefficientSpec::Catalog(Catalog::Gegenbauer {
            n: n as f64,
            order,
        })
    }

    pub fn eval_q(&self, t: f64, omega: f64) -> Result<f64> {
        let v = match self {
            CoefficientSpec::Expression { expr, .. } => expr.eval(t, omega),
            CoefficientSpec::Catalog(c) => c.eval(t, omega)?,
            CoefficientSpec::Callback(f) => f(t, omega),
        };
        if !v.is_finite() {
            return Err(Error::NumericFailure(format!(
                "q({t}, {omega}) evaluated to {v}"
            )));
        }
        Ok(v)
    }

    pub fn sample(&self, ts: &[f64], omega: f64) -> Result<Vec<f64>> {
        ts.iter().map(|&t| self.eval_q(t, omega)).collect()
    }

    /// `q` at the nodes of `grid` mapped onto `[a, b]`.
    pub fn sample_on(&self, grid: &ChebGrid, a: f64, b: f64, omega: f64) -> Result<Vec<f64>> {
        let ts = grid.nodes_on(a, b);
        let CoefficientSpec::Catalog(c) = self else {
            return self.sample(&ts, omega);
        };
        let (from_a, to_b) = grid.gaps_on(a, b);
        (0..ts.len())
            .map(|i| {
                let one_minus = (1.0 - b) + to_b[i];
                let one_plus = (1.0 + a) + from_a[i];
                let v = c.eval_with_gaps(ts[i], one_minus, one_plus, omega)?;
                if !v.is_finite() {
                    return Err(Error::NumericFailure(format!(
                        "q({}, {omega}) evaluated to {v}",
                        ts[i]
                    )));
                }
                Ok(v)
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};

    fn eval(src: &str, t: f64, omega: f64) -> f64 {
        CoefficientSpec::parse(src).unwrap().eval_q(t, omega).unwrap()
    }

    #[test]
    fn grammar_examples() {
        assert_eq!(eval("1 + t^2", 2.0, 0.0), 5.0);
        assert_eq!(eval("omega^2*(1-t^2)", 0.0, 3.0), 9.0);
    }

    #[test]
    fn malformed_source_reports_offset() {
        match CoefficientSpec::parse("1+*t") {
            Err(Error::Parse { offset, .. }) => assert_eq!(offset, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unknown_identifier() {
        match parse_expr("1 + x") {
            Err(Error::Parse { offset, message }) => {
                assert_eq!(offset, 4);
                assert!(message.contains('x'));
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(parse_expr("foo(t)").is_err());
    }

    #[test]
    fn other_syntax_errors() {
        assert!(parse_expr("").is_err());
        assert!(parse_expr("(1 + t").is_err());
        assert!(parse_expr("1 + t)").is_err());
        assert!(parse_expr("sin t").is_err());
        assert!(parse_expr("1e").is_err());
        assert!(parse_expr("2 # 3").is_err());
    }

    #[test]
    fn precedence_and_associativity() {
        assert_eq!(eval("-t^2", 3.0, 0.0), -9.0);
        assert_eq!(eval("2^3^2", 0.0, 0.0), 512.0);
        assert_eq!(eval("2^-1", 0.0, 0.0), 0.5);
        assert_eq!(eval("1 - 2 - 3", 0.0, 0.0), -4.0);
        assert_eq!(eval("8 / 4 / 2", 0.0, 0.0), 1.0);
        assert_eq!(eval("1 + 2 * 3", 0.0, 0.0), 7.0);
        assert_eq!(eval("2.5e-1 * 4", 0.0, 0.0), 1.0);
        assert_eq!(eval("--t", 2.0, 0.0), 2.0);
    }

    #[test]
    fn functions() {
        assert_abs_diff_eq!(eval("exp(log(t))", 2.5, 0.0), 2.5, epsilon = 1e-15);
        assert_abs_diff_eq!(eval("sqrt(abs(-t))", 4.0, 0.0), 2.0);
        assert_abs_diff_eq!(
            eval("sin(t)^2 + cos(t)^2", 0.7, 0.0),
            1.0,
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(eval("tanh(0)", 0.0, 0.0), 0.0);
    }

    #[test]
    fn non_finite_value_is_numeric_failure() {
        let q = CoefficientSpec::parse("1/t").unwrap();
        assert!(matches!(q.eval_q(0.0, 1.0), Err(Error::NumericFailure(_))));
    }

    #[test]
    fn catalog_values() {
        let leg = CoefficientSpec::legendre(2);
        assert_eq!(leg.eval_q(0.0, 1.0).unwrap(), 7.0);
        assert!(matches!(leg.eval_q(1.0, 1.0), Err(Error::NumericFailure(_))));
        assert!(matches!(leg.eval_q(-1.0, 1.0), Err(Error::NumericFailure(_))));

        let geg = CoefficientSpec::gegenbauer(2, 1.0);
        assert_abs_diff_eq!(geg.eval_q(0.0, 1.0).unwrap(), 9.5, epsilon = 1e-14);

        let bvp = CoefficientSpec::Catalog(Catalog::Bvp);
        assert_abs_diff_eq!(bvp.eval_q(0.0, 1.0).unwrap(), 21.0, epsilon = 1e-13);
    }

    #[test]
    fn callback_spec() {
        let q = CoefficientSpec::callback(|t, w| t * w);
        assert_eq!(q.eval_q(2.0, 3.0).unwrap(), 6.0);
    }

    #[test]
    fn legendre_symmetric() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(7);
        let q = CoefficientSpec::legendre(37);
        for _ in 0..100 {
            let t: f64 = rng.gen_range(-0.999..0.999);
            assert_eq!(q.eval_q(t, 1.0).unwrap(), q.eval_q(-t, 1.0).unwrap());
        }
    }

    #[test]
    fn pretty_print_round_trip() {
        let sources = [
            "1 + t^2",
            "omega^2*(1-t^2)",
            "-t^2 + 2^-1*exp(-t)/(t^2 + 0.1)",
            "sqrt(abs(sin(omega*t))) - 3.5e-2*tanh(t/omega)",
            "(3*t^2*omega^2 + t^2*omega + 1)/(omega^2 - (t^2+1)*omega + 1)",
            "2^3^t - log(1 + t*t)",
        ];
        let mut rng = rand::rngs::StdRng::seed_from_u64(11);
        for src in sources {
            let e = parse_expr(src).unwrap();
            let again = parse_expr(&e.to_string()).unwrap();
            assert_eq!(e, again, "{src}");
            for _ in 0..100 {
                let t: f64 = rng.gen_range(0.01..2.0);
                let w: f64 = rng.gen_range(2.0..50.0);
                assert_eq!(e.eval(t, w).to_bits(), again.eval(t, w).to_bits());
            }
        }
    }

    #[test]
    fn sample_on_matches_pointwise_sampling() {
        let g = ChebGrid::new(16).unwrap();
        let spec = CoefficientSpec::parse("1 + t^2/2").unwrap();
        let ts = g.nodes_on(0.0, 2.0);
        assert_eq!(spec.sample_on(&g, 0.0, 2.0, 3.0).unwrap(), spec.sample(&ts, 3.0).unwrap());
        let leg = CoefficientSpec::legendre(10);
        let a = leg.sample_on(&g, -0.5, 0.5, 1.0).unwrap();
        let b = leg.sample(&g.nodes_on(-0.5, 0.5), 1.0).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() <= 1e-14 * x);
        }
    }

    #[test]
    fn catalog_sampling_near_pole_is_smooth() {
        // q ~ 1/(1-t)^2 near the pole; sampled through the node gaps its
        // interpolant must still pass the fit test.
        let g = ChebGrid::new(16).unwrap();
        let (a, b) = (0.9999998701976807, 1.0 - 1e-7);
        let q = CoefficientSpec::legendre(128).sample_on(&g, a, b, 1.0).unwrap();
        assert!(g.fit_ratio(&q) < 1e-12, "{}", g.fit_ratio(&q));
    }
}
