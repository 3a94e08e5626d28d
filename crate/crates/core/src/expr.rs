//! Closed-form coefficient expressions over the spatial chart
//! {x1, x2, x3, t, r, rt, phi} with analytic differentiation.
//!
//! Expressions are plain evaluation trees: no simplification engine beyond
//! cheap constant folding in the builders. They serialize to a small text
//! grammar (see `docs/manifest.md`) and parse back structurally identical,
//! which is what the catalog round-trip guarantee rests on.

use crate::error::{CoreError, Result};
use num_complex::Complex64;
use std::fmt;
use std::sync::Arc;

/// Variables an expression may reference. `R`, `RTilde`, `Phi` are the
/// derived chart symbols r = |x|, rt = sqrt(x1^2+x2^2), phi = arctan(x2/x1);
/// `Xi` is the coordinate of one-dimensional reduced problems.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Var {
    X1,
    X2,
    X3,
    T,
    R,
    RTilde,
    Phi,
    Xi,
}

/// Named free parameters of Table rows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Param {
    Kappa,
    Lambda,
    Omega,
    Nu,
    Mu,
    Sigma,
}

impl Param {
    pub const ALL: [Param; 6] = [
        Param::Kappa,
        Param::Lambda,
        Param::Omega,
        Param::Nu,
        Param::Mu,
        Param::Sigma,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Param::Kappa => "kappa",
            Param::Lambda => "lambda",
            Param::Omega => "omega",
            Param::Nu => "nu",
            Param::Mu => "mu",
            Param::Sigma => "sigma",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(Complex64),
    Var(Var),
    Param(Param),
    Add(Arc<Expr>, Arc<Expr>),
    Sub(Arc<Expr>, Arc<Expr>),
    Mul(Arc<Expr>, Arc<Expr>),
    Div(Arc<Expr>, Arc<Expr>),
    Pow(Arc<Expr>, Arc<Expr>),
    Neg(Arc<Expr>),
    Exp(Arc<Expr>),
    Log(Arc<Expr>),
    Sin(Arc<Expr>),
    Cos(Arc<Expr>),
    Sqrt(Arc<Expr>),
}

/// Evaluation point for 3D expressions.
#[derive(Debug, Clone, Copy)]
pub struct Point {
    pub x: [f64; 3],
    pub t: f64,
}

impl Point {
    pub fn new(x1: f64, x2: f64, x3: f64, t: f64) -> Self {
        Point { x: [x1, x2, x3], t }
    }
    fn r(&self) -> f64 {
        (self.x[0] * self.x[0] + self.x[1] * self.x[1] + self.x[2] * self.x[2]).sqrt()
    }
    fn rt(&self) -> f64 {
        (self.x[0] * self.x[0] + self.x[1] * self.x[1]).sqrt()
    }
    fn phi(&self) -> f64 {
        self.x[1].atan2(self.x[0])
    }
}

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

impl Expr {
    pub fn constant(v: f64) -> Expr {
        Expr::Const(c(v))
    }
    pub fn imag(v: f64) -> Expr {
        Expr::Const(Complex64::new(0.0, v))
    }
    pub fn zero() -> Expr {
        Expr::constant(0.0)
    }
    pub fn one() -> Expr {
        Expr::constant(1.0)
    }
    pub fn var(v: Var) -> Expr {
        Expr::Var(v)
    }

    fn is_const(&self, v: f64) -> bool {
        matches!(self, Expr::Const(z) if z.re == v && z.im == 0.0)
    }

    pub fn add(a: Expr, b: Expr) -> Expr {
        if a.is_const(0.0) {
            return b;
        }
        if b.is_const(0.0) {
            return a;
        }
        if let (Expr::Const(x), Expr::Const(y)) = (&a, &b) {
            return Expr::Const(x + y);
        }
        Expr::Add(Arc::new(a), Arc::new(b))
    }

    pub fn sub(a: Expr, b: Expr) -> Expr {
        if b.is_const(0.0) {
            return a;
        }
        if let (Expr::Const(x), Expr::Const(y)) = (&a, &b) {
            return Expr::Const(x - y);
        }
        Expr::Sub(Arc::new(a), Arc::new(b))
    }

    pub fn mul(a: Expr, b: Expr) -> Expr {
        if a.is_const(0.0) || b.is_const(0.0) {
            return Expr::zero();
        }
        if a.is_const(1.0) {
            return b;
        }
        if b.is_const(1.0) {
            return a;
        }
        if let (Expr::Const(x), Expr::Const(y)) = (&a, &b) {
            return Expr::Const(x * y);
        }
        Expr::Mul(Arc::new(a), Arc::new(b))
    }

    pub fn div(a: Expr, b: Expr) -> Expr {
        if a.is_const(0.0) {
            return Expr::zero();
        }
        if b.is_const(1.0) {
            return a;
        }
        Expr::Div(Arc::new(a), Arc::new(b))
    }

    pub fn pow(a: Expr, b: Expr) -> Expr {
        if b.is_const(1.0) {
            return a;
        }
        if b.is_const(0.0) {
            return Expr::one();
        }
        Expr::Pow(Arc::new(a), Arc::new(b))
    }

    pub fn neg(a: Expr) -> Expr {
        if let Expr::Const(x) = &a {
            return Expr::Const(-x);
        }
        Expr::Neg(Arc::new(a))
    }

    pub fn exp(a: Expr) -> Expr {
        Expr::Exp(Arc::new(a))
    }
    pub fn log(a: Expr) -> Expr {
        Expr::Log(Arc::new(a))
    }
    pub fn sin(a: Expr) -> Expr {
        Expr::Sin(Arc::new(a))
    }
    pub fn cos(a: Expr) -> Expr {
        Expr::Cos(Arc::new(a))
    }
    pub fn sqrt(a: Expr) -> Expr {
        Expr::Sqrt(Arc::new(a))
    }

    /// Evaluate at a 3D point. Unresolved parameters are an error.
    pub fn eval(&self, p: &Point) -> Result<Complex64> {
        Ok(match self {
            Expr::Const(z) => *z,
            Expr::Var(v) => match v {
                Var::X1 => c(p.x[0]),
                Var::X2 => c(p.x[1]),
                Var::X3 => c(p.x[2]),
                Var::T => c(p.t),
                Var::R => c(p.r()),
                Var::RTilde => c(p.rt()),
                Var::Phi => c(p.phi()),
                Var::Xi => {
                    return Err(CoreError::ExprEval(
                        "1D variable `xi` used in a 3D context".into(),
                    ))
                }
            },
            Expr::Param(q) => return Err(CoreError::MissingParam(q.name())),
            Expr::Add(a, b) => a.eval(p)? + b.eval(p)?,
            Expr::Sub(a, b) => a.eval(p)? - b.eval(p)?,
            Expr::Mul(a, b) => a.eval(p)? * b.eval(p)?,
            Expr::Div(a, b) => {
                let d = b.eval(p)?;
                if d.norm() == 0.0 {
                    return Err(CoreError::ExprEval("division by zero".into()));
                }
                a.eval(p)? / d
            }
            Expr::Pow(a, b) => {
                let base = a.eval(p)?;
                let ex = b.eval(p)?;
                pow_c(base, ex)?
            }
            Expr::Neg(a) => -a.eval(p)?,
            Expr::Exp(a) => a.eval(p)?.exp(),
            Expr::Log(a) => {
                let z = a.eval(p)?;
                if z.im == 0.0 && z.re <= 0.0 {
                    return Err(CoreError::ExprEval(format!("log of non-positive {}", z.re)));
                }
                z.ln()
            }
            Expr::Sin(a) => a.eval(p)?.sin(),
            Expr::Cos(a) => a.eval(p)?.cos(),
            Expr::Sqrt(a) => a.eval(p)?.sqrt(),
        })
    }

    /// Evaluate a 1D expression (variable `xi`) at xi.
    pub fn eval1(&self, xi: f64) -> Result<Complex64> {
        match self {
            Expr::Const(z) => Ok(*z),
            Expr::Var(Var::Xi) => Ok(c(xi)),
            Expr::Var(v) => Err(CoreError::ExprEval(format!(
                "3D variable {v:?} used in a 1D context"
            ))),
            Expr::Param(q) => Err(CoreError::MissingParam(q.name())),
            Expr::Add(a, b) => Ok(a.eval1(xi)? + b.eval1(xi)?),
            Expr::Sub(a, b) => Ok(a.eval1(xi)? - b.eval1(xi)?),
            Expr::Mul(a, b) => Ok(a.eval1(xi)? * b.eval1(xi)?),
            Expr::Div(a, b) => {
                let d = b.eval1(xi)?;
                if d.norm() == 0.0 {
                    return Err(CoreError::ExprEval("division by zero".into()));
                }
                Ok(a.eval1(xi)? / d)
            }
            Expr::Pow(a, b) => pow_c(a.eval1(xi)?, b.eval1(xi)?),
            Expr::Neg(a) => Ok(-a.eval1(xi)?),
            Expr::Exp(a) => Ok(a.eval1(xi)?.exp()),
            Expr::Log(a) => {
                let z = a.eval1(xi)?;
                if z.im == 0.0 && z.re <= 0.0 {
                    return Err(CoreError::ExprEval(format!("log of non-positive {}", z.re)));
                }
                Ok(z.ln())
            }
            Expr::Sin(a) => Ok(a.eval1(xi)?.sin()),
            Expr::Cos(a) => Ok(a.eval1(xi)?.cos()),
            Expr::Sqrt(a) => Ok(a.eval1(xi)?.sqrt()),
        }
    }

    /// Real-valued evaluation; errors when the imaginary part is significant.
    pub fn eval_real(&self, p: &Point) -> Result<f64> {
        let z = self.eval(p)?;
        if z.im.abs() > 1e-12 * (1.0 + z.re.abs()) {
            return Err(CoreError::ExprEval(format!(
                "expected real value, got {z}"
            )));
        }
        Ok(z.re)
    }

    pub fn eval1_real(&self, xi: f64) -> Result<f64> {
        let z = self.eval1(xi)?;
        if z.im.abs() > 1e-12 * (1.0 + z.re.abs()) {
            return Err(CoreError::ExprEval(format!(
                "expected real value, got {z}"
            )));
        }
        Ok(z.re)
    }

    /// Substitute numeric values for parameters.
    pub fn subst(&self, vals: &ParamValues) -> Expr {
        match self {
            Expr::Const(_) | Expr::Var(_) => self.clone(),
            Expr::Param(q) => match vals.get(*q) {
                Some(z) => Expr::Const(z),
                None => self.clone(),
            },
            Expr::Add(a, b) => Expr::add(a.subst(vals), b.subst(vals)),
            Expr::Sub(a, b) => Expr::sub(a.subst(vals), b.subst(vals)),
            Expr::Mul(a, b) => Expr::mul(a.subst(vals), b.subst(vals)),
            Expr::Div(a, b) => Expr::div(a.subst(vals), b.subst(vals)),
            Expr::Pow(a, b) => Expr::pow(a.subst(vals), b.subst(vals)),
            Expr::Neg(a) => Expr::neg(a.subst(vals)),
            Expr::Exp(a) => Expr::exp(a.subst(vals)),
            Expr::Log(a) => Expr::log(a.subst(vals)),
            Expr::Sin(a) => Expr::sin(a.subst(vals)),
            Expr::Cos(a) => Expr::cos(a.subst(vals)),
            Expr::Sqrt(a) => Expr::sqrt(a.subst(vals)),
        }
    }

    pub fn params(&self) -> Vec<Param> {
        let mut out = Vec::new();
        self.collect_params(&mut out);
        out
    }

    fn collect_params(&self, out: &mut Vec<Param>) {
        match self {
            Expr::Const(_) | Expr::Var(_) => {}
            Expr::Param(q) => {
                if !out.contains(q) {
                    out.push(*q);
                }
            }
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b)
            | Expr::Pow(a, b) => {
                a.collect_params(out);
                b.collect_params(out);
            }
            Expr::Neg(a) | Expr::Exp(a) | Expr::Log(a) | Expr::Sin(a) | Expr::Cos(a)
            | Expr::Sqrt(a) => a.collect_params(out),
        }
    }

    pub fn depends_on(&self, v: Var) -> bool {
        match self {
            Expr::Const(_) | Expr::Param(_) => false,
            Expr::Var(w) => {
                *w == v
                    || (matches!(v, Var::X1 | Var::X2)
                        && matches!(w, Var::R | Var::RTilde | Var::Phi))
                    || (v == Var::X3 && *w == Var::R)
            }
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b)
            | Expr::Pow(a, b) => a.depends_on(v) || b.depends_on(v),
            Expr::Neg(a) | Expr::Exp(a) | Expr::Log(a) | Expr::Sin(a) | Expr::Cos(a)
            | Expr::Sqrt(a) => a.depends_on(v),
        }
    }

    /// Analytic partial derivative. `v` must be one of X1, X2, X3, T, Xi;
    /// the chart symbols r, rt, phi differentiate through their definitions.
    pub fn diff(&self, v: Var) -> Expr {
        match self {
            Expr::Const(_) | Expr::Param(_) => Expr::zero(),
            Expr::Var(w) => var_diff(*w, v),
            Expr::Add(a, b) => Expr::add(a.diff(v), b.diff(v)),
            Expr::Sub(a, b) => Expr::sub(a.diff(v), b.diff(v)),
            Expr::Mul(a, b) => Expr::add(
                Expr::mul(a.diff(v), (**b).clone()),
                Expr::mul((**a).clone(), b.diff(v)),
            ),
            Expr::Div(a, b) => Expr::sub(
                Expr::div(a.diff(v), (**b).clone()),
                Expr::div(
                    Expr::mul((**a).clone(), b.diff(v)),
                    Expr::mul((**b).clone(), (**b).clone()),
                ),
            ),
            Expr::Pow(a, b) => {
                let da = a.diff(v);
                let db = b.diff(v);
                if db.is_const(0.0) {
                    // d(u^c) = c u^(c-1) u'
                    let cm1 = Expr::sub((**b).clone(), Expr::one());
                    Expr::mul(
                        Expr::mul((**b).clone(), Expr::pow((**a).clone(), cm1)),
                        da,
                    )
                } else {
                    // d(u^v) = u^v (v' ln u + v u'/u)
                    let term = Expr::add(
                        Expr::mul(db, Expr::log((**a).clone())),
                        Expr::div(Expr::mul((**b).clone(), da), (**a).clone()),
                    );
                    Expr::mul(self.clone(), term)
                }
            }
            Expr::Neg(a) => Expr::neg(a.diff(v)),
            Expr::Exp(a) => Expr::mul(self.clone(), a.diff(v)),
            Expr::Log(a) => Expr::div(a.diff(v), (**a).clone()),
            Expr::Sin(a) => Expr::mul(Expr::cos((**a).clone()), a.diff(v)),
            Expr::Cos(a) => Expr::neg(Expr::mul(Expr::sin((**a).clone()), a.diff(v))),
            Expr::Sqrt(a) => Expr::div(
                a.diff(v),
                Expr::mul(Expr::constant(2.0), self.clone()),
            ),
        }
    }

    /// Laplacian as an expression tree.
    pub fn laplacian(&self) -> Expr {
        let mut out = Expr::zero();
        for v in [Var::X1, Var::X2, Var::X3] {
            out = Expr::add(out, self.diff(v).diff(v));
        }
        out
    }
}

fn var_diff(w: Var, v: Var) -> Expr {
    use Expr as E;
    use Var::*;
    if w == v {
        return E::one();
    }
    match (w, v) {
        (R, X1) => E::div(E::var(X1), E::var(R)),
        (R, X2) => E::div(E::var(X2), E::var(R)),
        (R, X3) => E::div(E::var(X3), E::var(R)),
        (RTilde, X1) => E::div(E::var(X1), E::var(RTilde)),
        (RTilde, X2) => E::div(E::var(X2), E::var(RTilde)),
        (Phi, X1) => E::neg(E::div(
            E::var(X2),
            E::mul(E::var(RTilde), E::var(RTilde)),
        )),
        (Phi, X2) => E::div(E::var(X1), E::mul(E::var(RTilde), E::var(RTilde))),
        _ => E::zero(),
    }
}

fn pow_c(base: Complex64, ex: Complex64) -> Result<Complex64> {
    // real^integer handled exactly (and correctly for negative base)
    if base.im == 0.0 && ex.im == 0.0 {
        let (b, e) = (base.re, ex.re);
        if e.fract() == 0.0 && e.abs() < 64.0 {
            return Ok(c(b.powi(e as i32)));
        }
        if b >= 0.0 {
            return Ok(c(b.powf(e)));
        }
        return Err(CoreError::ExprEval(format!(
            "negative base {b} to non-integer power {e}"
        )));
    }
    Ok(base.powc(ex))
}

/// Parameter assignment. `lambda` and `omega` may be imaginary, the rest
/// are real.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ParamValues {
    pub kappa: Option<f64>,
    pub lambda: Option<Complex64>,
    pub omega: Option<Complex64>,
    pub nu: Option<f64>,
    pub mu: Option<f64>,
    pub sigma: Option<f64>,
}

impl ParamValues {
    pub fn get(&self, p: Param) -> Option<Complex64> {
        match p {
            Param::Kappa => self.kappa.map(c),
            Param::Lambda => self.lambda,
            Param::Omega => self.omega,
            Param::Nu => self.nu.map(c),
            Param::Mu => self.mu.map(c),
            Param::Sigma => self.sigma.map(c),
        }
    }

    pub fn set_real(&mut self, p: Param, v: f64) {
        match p {
            Param::Kappa => self.kappa = Some(v),
            Param::Lambda => self.lambda = Some(c(v)),
            Param::Omega => self.omega = Some(c(v)),
            Param::Nu => self.nu = Some(v),
            Param::Mu => self.mu = Some(v),
            Param::Sigma => self.sigma = Some(v),
        }
    }
}

// ---------------------------------------------------------------------------
// text form
// ---------------------------------------------------------------------------

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Var::X1 => "x1",
            Var::X2 => "x2",
            Var::X3 => "x3",
            Var::T => "t",
            Var::R => "r",
            Var::RTilde => "rt",
            Var::Phi => "phi",
            Var::Xi => "xi",
        };
        f.write_str(s)
    }
}

fn fmt_f64(v: f64, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if v == v.trunc() && v.abs() < 1e15 {
        write!(f, "{}", v as i64)
    } else {
        write!(f, "{v}")
    }
}

impl fmt::Display for Expr {
    /// Canonical fully-parenthesized form; `parse` inverts it exactly.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(z) => {
                if z.im == 0.0 {
                    if z.re < 0.0 {
                        write!(f, "(-")?;
                        fmt_f64(-z.re, f)?;
                        write!(f, ")")
                    } else {
                        fmt_f64(z.re, f)
                    }
                } else if z.re == 0.0 {
                    write!(f, "(")?;
                    fmt_f64(z.im, f)?;
                    write!(f, "*i)")
                } else {
                    write!(f, "(")?;
                    fmt_f64(z.re, f)?;
                    write!(f, "+")?;
                    fmt_f64(z.im, f)?;
                    write!(f, "*i)")
                }
            }
            Expr::Var(v) => write!(f, "{v}"),
            Expr::Param(p) => f.write_str(p.name()),
            Expr::Add(a, b) => write!(f, "({a}+{b})"),
            Expr::Sub(a, b) => write!(f, "({a}-{b})"),
            Expr::Mul(a, b) => write!(f, "({a}*{b})"),
            Expr::Div(a, b) => write!(f, "({a}/{b})"),
            Expr::Pow(a, b) => write!(f, "({a}^{b})"),
            Expr::Neg(a) => write!(f, "(-{a})"),
            Expr::Exp(a) => write!(f, "exp({a})"),
            Expr::Log(a) => write!(f, "log({a})"),
            Expr::Sin(a) => write!(f, "sin({a})"),
            Expr::Cos(a) => write!(f, "cos({a})"),
            Expr::Sqrt(a) => write!(f, "sqrt({a})"),
        }
    }
}

// recursive-descent parser over the grammar in docs/manifest.md
struct Parser<'a> {
    src: &'a str,
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(CoreError::ExprParse {
            src: self.src.to_string(),
            msg: format!("{} (at byte {})", msg.into(), self.pos),
        })
    }

    fn skip_ws(&mut self) {
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.bytes.get(self.pos).copied()
    }

    fn eat(&mut self, ch: u8) -> bool {
        if self.peek() == Some(ch) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    let rhs = self.term()?;
                    lhs = Expr::add(lhs, rhs);
                }
                Some(b'-') => {
                    self.pos += 1;
                    let rhs = self.term()?;
                    lhs = Expr::sub(lhs, rhs);
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.factor()?;
        loop {
            match self.peek() {
                Some(b'*') => {
                    self.pos += 1;
                    let rhs = self.factor()?;
                    lhs = Expr::mul(lhs, rhs);
                }
                Some(b'/') => {
                    self.pos += 1;
                    let rhs = self.factor()?;
                    lhs = Expr::div(lhs, rhs);
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn factor(&mut self) -> Result<Expr> {
        let base = self.unary()?;
        if self.eat(b'^') {
            let ex = self.factor()?; // right-associative
            return Ok(Expr::pow(base, ex));
        }
        Ok(base)
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.eat(b'-') {
            let inner = self.unary()?;
            return Ok(Expr::neg(inner));
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<Expr> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let inner = self.expr()?;
                if !self.eat(b')') {
                    return self.err("expected `)`");
                }
                Ok(inner)
            }
            Some(ch) if ch.is_ascii_digit() || ch == b'.' => self.number(),
            Some(ch) if ch.is_ascii_alphabetic() || ch == b'_' => self.ident(),
            Some(ch) => self.err(format!("unexpected character `{}`", ch as char)),
            None => self.err("unexpected end of input"),
        }
    }

    fn number(&mut self) -> Result<Expr> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.bytes.len() {
            let ch = self.bytes[self.pos];
            if ch.is_ascii_digit() || ch == b'.' {
                self.pos += 1;
            } else if (ch == b'e' || ch == b'E')
                && self.pos > start
                && self
                    .bytes
                    .get(self.pos + 1)
                    .is_some_and(|&c| c.is_ascii_digit() || c == b'+' || c == b'-')
            {
                self.pos += 2;
            } else {
                break;
            }
        }
        let txt = &self.src[start..self.pos];
        match txt.parse::<f64>() {
            Ok(v) => Ok(Expr::constant(v)),
            Err(_) => self.err(format!("bad number `{txt}`")),
        }
    }

    fn ident(&mut self) -> Result<Expr> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.bytes.len()
            && (self.bytes[self.pos].is_ascii_alphanumeric() || self.bytes[self.pos] == b'_')
        {
            self.pos += 1;
        }
        let name = &self.src[start..self.pos];
        let func = |p: &mut Self, f: fn(Expr) -> Expr| -> Result<Expr> {
            if !p.eat(b'(') {
                return p.err("expected `(` after function name");
            }
            let inner = p.expr()?;
            if !p.eat(b')') {
                return p.err("expected `)`");
            }
            Ok(f(inner))
        };
        match name {
            "x1" => Ok(Expr::var(Var::X1)),
            "x2" => Ok(Expr::var(Var::X2)),
            "x3" => Ok(Expr::var(Var::X3)),
            "t" => Ok(Expr::var(Var::T)),
            "r" => Ok(Expr::var(Var::R)),
            "rt" => Ok(Expr::var(Var::RTilde)),
            "phi" => Ok(Expr::var(Var::Phi)),
            "xi" => Ok(Expr::var(Var::Xi)),
            "i" => Ok(Expr::imag(1.0)),
            "kappa" => Ok(Expr::Param(Param::Kappa)),
            "lambda" => Ok(Expr::Param(Param::Lambda)),
            "omega" => Ok(Expr::Param(Param::Omega)),
            "nu" => Ok(Expr::Param(Param::Nu)),
            "mu" => Ok(Expr::Param(Param::Mu)),
            "sigma" => Ok(Expr::Param(Param::Sigma)),
            "exp" => func(self, Expr::exp),
            "log" => func(self, Expr::log),
            "sin" => func(self, Expr::sin),
            "cos" => func(self, Expr::cos),
            "sqrt" => func(self, Expr::sqrt),
            _ => self.err(format!("unknown identifier `{name}`")),
        }
    }
}

pub fn parse(src: &str) -> Result<Expr> {
    let mut p = Parser {
        src,
        bytes: src.as_bytes(),
        pos: 0,
    };
    let e = p.expr()?;
    p.skip_ws();
    if p.pos != p.bytes.len() {
        return p.err("trailing input");
    }
    Ok(e)
}
