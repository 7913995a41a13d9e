//! Scalar-field expressions: parser, evaluator and symbolic derivatives.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*
//! unary  := ('-' | '+') unary | factor
//! factor := base ('^' exponent)?
//! exponent := ('-' | '+')? number | '(' expr ')'      constant only
//! base   := number | 'r' | 'x1'..'xn' | func '(' expr ')' | '(' expr ')'
//! func   := sqrt | exp | log | abs
//! ```

use std::fmt;
use std::sync::{Arc, OnceLock};

use nalgebra::DMatrix;

use super::field::{ScalarField, SingularSet};
use crate::error::{Error, Result};
use crate::numerics::{norm, Jet, ThirdOrder};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Func {
    Sqrt,
    Exp,
    Log,
    Abs,
    Sign,
}

#[derive(Debug, PartialEq)]
enum Node {
    Const(f64),
    Var(usize),
    R,
    Neg(E),
    Add(E, E),
    Sub(E, E),
    Mul(E, E),
    Div(E, E),
    Pow(E, f64),
    Call(Func, E),
}

type E = Arc<Node>;

fn konst(v: f64) -> E {
    Arc::new(Node::Const(v))
}

fn as_const(e: &E) -> Option<f64> {
    match **e {
        Node::Const(v) => Some(v),
        _ => None,
    }
}

fn is_const(e: &E, v: f64) -> bool {
    as_const(e) == Some(v)
}

fn neg(a: E) -> E {
    match &*a {
        Node::Const(v) => konst(-v),
        Node::Neg(b) => b.clone(),
        _ => Arc::new(Node::Neg(a)),
    }
}

fn add(a: E, b: E) -> E {
    match (as_const(&a), as_const(&b)) {
        (Some(x), Some(y)) => konst(x + y),
        (Some(x), _) if x == 0.0 => b,
        (_, Some(y)) if y == 0.0 => a,
        _ => Arc::new(Node::Add(a, b)),
    }
}

fn sub(a: E, b: E) -> E {
    match (as_const(&a), as_const(&b)) {
        (Some(x), Some(y)) => konst(x - y),
        (_, Some(y)) if y == 0.0 => a,
        (Some(x), _) if x == 0.0 => neg(b),
        _ => Arc::new(Node::Sub(a, b)),
    }
}

fn mul(a: E, b: E) -> E {
    match (as_const(&a), as_const(&b)) {
        (Some(x), Some(y)) => konst(x * y),
        (Some(x), _) | (_, Some(x)) if x == 0.0 => konst(0.0),
        (Some(x), _) if x == 1.0 => b,
        (_, Some(y)) if y == 1.0 => a,
        (Some(x), _) if x == -1.0 => neg(b),
        (_, Some(y)) if y == -1.0 => neg(a),
        _ => Arc::new(Node::Mul(a, b)),
    }
}

fn div(a: E, b: E) -> E {
    match (as_const(&a), as_const(&b)) {
        (Some(x), Some(y)) => konst(x / y),
        (Some(x), _) if x == 0.0 => konst(0.0),
        (_, Some(y)) if y == 1.0 => a,
        _ => Arc::new(Node::Div(a, b)),
    }
}

fn pow(a: E, p: f64) -> E {
    if p == 0.0 {
        return konst(1.0);
    }
    if p == 1.0 {
        return a;
    }
    match &*a {
        Node::Const(v) => konst(powr(*v, p)),
        _ => Arc::new(Node::Pow(a, p)),
    }
}

fn call(f: Func, a: E) -> E {
    match as_const(&a) {
        Some(v) => konst(apply(f, v)),
        None => Arc::new(Node::Call(f, a)),
    }
}

fn powr(base: f64, p: f64) -> f64 {
    if p.fract() == 0.0 && p.abs() < 1e6 {
        base.powi(p as i32)
    } else {
        base.powf(p)
    }
}

fn apply(f: Func, v: f64) -> f64 {
    match f {
        Func::Sqrt => v.sqrt(),
        Func::Exp => v.exp(),
        Func::Log => v.ln(),
        Func::Abs => v.abs(),
        Func::Sign => {
            if v > 0.0 {
                1.0
            } else if v < 0.0 {
                -1.0
            } else {
                0.0
            }
        }
    }
}

fn diff(e: &E, i: usize) -> E {
    match &**e {
        Node::Const(_) => konst(0.0),
        Node::Var(j) => konst(if *j == i { 1.0 } else { 0.0 }),
        Node::R => div(Arc::new(Node::Var(i)), Arc::new(Node::R)),
        Node::Neg(a) => neg(diff(a, i)),
        Node::Add(a, b) => add(diff(a, i), diff(b, i)),
        Node::Sub(a, b) => sub(diff(a, i), diff(b, i)),
        Node::Mul(a, b) => add(mul(diff(a, i), b.clone()), mul(a.clone(), diff(b, i))),
        Node::Div(a, b) => {
            let da = diff(a, i);
            let db = diff(b, i);
            sub(div(da, b.clone()), div(mul(a.clone(), db), pow(b.clone(), 2.0)))
        }
        // d(r^p) = p x_i r^{p-2}: smooth at the origin for even p
        Node::Pow(a, p) if **a == Node::R => mul(
            mul(konst(*p), Arc::new(Node::Var(i))),
            pow(Arc::new(Node::R), p - 2.0),
        ),
        Node::Pow(a, p) => mul(mul(konst(*p), pow(a.clone(), p - 1.0)), diff(a, i)),
        Node::Call(f, a) => {
            let da = diff(a, i);
            if is_const(&da, 0.0) {
                return konst(0.0);
            }
            match f {
                Func::Sqrt => div(da, mul(konst(2.0), e.clone())),
                Func::Exp => mul(e.clone(), da),
                Func::Log => div(da, a.clone()),
                Func::Abs => mul(call(Func::Sign, a.clone()), da),
                Func::Sign => konst(0.0),
            }
        }
    }
}

fn eval(e: &Node, x: &[f64], r: f64) -> f64 {
    match e {
        Node::Const(v) => *v,
        Node::Var(j) => x[*j],
        Node::R => r,
        Node::Neg(a) => -eval(a, x, r),
        Node::Add(a, b) => eval(a, x, r) + eval(b, x, r),
        Node::Sub(a, b) => eval(a, x, r) - eval(b, x, r),
        Node::Mul(a, b) => eval(a, x, r) * eval(b, x, r),
        Node::Div(a, b) => eval(a, x, r) / eval(b, x, r),
        Node::Pow(a, p) => powr(eval(a, x, r), *p),
        Node::Call(f, a) => apply(*f, eval(a, x, r)),
    }
}

/// True when `r` appears other than as `r^{2k}`, i.e. the tree may be non-smooth at 0.
fn origin_singular(e: &Node) -> bool {
    match e {
        Node::Const(_) | Node::Var(_) => false,
        Node::R => true,
        Node::Pow(a, p) if **a == Node::R => !(p.fract() == 0.0 && *p >= 0.0 && (*p as i64) % 2 == 0),
        Node::Neg(a) | Node::Pow(a, _) | Node::Call(_, a) => origin_singular(a),
        Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) => {
            origin_singular(a) || origin_singular(b)
        }
    }
}

// ---------------------------------------------------------------------------
// Parser

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Sym(char),
    End,
}

struct Lexer {
    toks: Vec<(Tok, usize)>,
}

fn lex(src: &str) -> Result<Lexer> {
    let bytes = src.as_bytes();
    let mut toks = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == b'.' {
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
                    while j < bytes.len() && bytes[j].is_ascii_digit() {
                        j += 1;
                    }
                    i = j;
                }
            }
            let text = &src[start..i];
            let v: f64 = text.parse().map_err(|_| Error::Syntax {
                offset: start,
                message: format!("malformed number '{text}'"),
            })?;
            toks.push((Tok::Num(v), start));
        } else if c.is_ascii_alphabetic() || c == b'_' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            toks.push((Tok::Ident(src[start..i].to_string()), start));
        } else if b"+-*/^()".contains(&c) {
            toks.push((Tok::Sym(c as char), i));
            i += 1;
        } else {
            let ch = src[i..].chars().next().unwrap_or('?');
            return Err(Error::Syntax {
                offset: i,
                message: format!("unexpected character '{ch}'"),
            });
        }
    }
    toks.push((Tok::End, src.len()));
    Ok(Lexer { toks })
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    dim: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn syntax<T>(&self, message: impl Into<String>) -> Result<T> {
        Err(Error::Syntax {
            offset: self.offset(),
            message: message.into(),
        })
    }

    fn expect(&mut self, c: char) -> Result<()> {
        if *self.peek() == Tok::Sym(c) {
            self.bump();
            Ok(())
        } else {
            self.syntax(format!("expected '{c}'"))
        }
    }

    fn expr(&mut self) -> Result<E> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Tok::Sym('+') => {
                    self.bump();
                    lhs = add(lhs, self.term()?);
                }
                Tok::Sym('-') => {
                    self.bump();
                    lhs = sub(lhs, self.term()?);
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<E> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek() {
                Tok::Sym('*') => {
                    self.bump();
                    lhs = mul(lhs, self.unary()?);
                }
                Tok::Sym('/') => {
                    self.bump();
                    lhs = div(lhs, self.unary()?);
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<E> {
        match self.peek() {
            Tok::Sym('-') => {
                self.bump();
                Ok(neg(self.unary()?))
            }
            Tok::Sym('+') => {
                self.bump();
                self.unary()
            }
            _ => self.factor(),
        }
    }

    fn factor(&mut self) -> Result<E> {
        let base = self.base()?;
        if *self.peek() != Tok::Sym('^') {
            return Ok(base);
        }
        self.bump();
        let p = self.exponent()?;
        Ok(pow(base, p))
    }

    fn exponent(&mut self) -> Result<f64> {
        let sign = match self.peek() {
            Tok::Sym('-') => {
                self.bump();
                -1.0
            }
            Tok::Sym('+') => {
                self.bump();
                1.0
            }
            _ => 1.0,
        };
        match self.peek().clone() {
            Tok::Num(v) => {
                self.bump();
                Ok(sign * v)
            }
            Tok::Sym('(') => {
                let at = self.offset();
                self.bump();
                let e = self.expr()?;
                self.expect(')')?;
                match as_const(&e) {
                    Some(v) => Ok(sign * v),
                    None => Err(Error::Syntax {
                        offset: at,
                        message: "exponent must be a constant".into(),
                    }),
                }
            }
            _ => self.syntax("expected a number after '^'"),
        }
    }

    fn base(&mut self) -> Result<E> {
        let at = self.offset();
        match self.bump() {
            Tok::Num(v) => Ok(konst(v)),
            Tok::Sym('(') => {
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Tok::Ident(name) => {
                let func = match name.as_str() {
                    "sqrt" => Some(Func::Sqrt),
                    "exp" => Some(Func::Exp),
                    "log" => Some(Func::Log),
                    "abs" => Some(Func::Abs),
                    _ => None,
                };
                if let Some(f) = func {
                    self.expect('(')?;
                    let arg = self.expr()?;
                    self.expect(')')?;
                    return Ok(call(f, arg));
                }
                if name == "r" {
                    return Ok(Arc::new(Node::R));
                }
                if let Some(k) = name.strip_prefix('x').and_then(|d| d.parse::<usize>().ok()) {
                    if (1..=self.dim).contains(&k) && !name[1..].starts_with('0') {
                        return Ok(Arc::new(Node::Var(k - 1)));
                    }
                }
                Err(Error::UnknownIdentifier { name, offset: at })
            }
            Tok::End => Err(Error::Syntax {
                offset: at,
                message: "unexpected end of expression".into(),
            }),
            Tok::Sym(c) => Err(Error::Syntax {
                offset: at,
                message: format!("unexpected '{c}'"),
            }),
        }
    }
}

// ---------------------------------------------------------------------------
// Field

/// A parsed expression on flat n-space with symbolic partials up to third order.
#[derive(Clone)]
pub struct ExprField {
    dim: usize,
    source: String,
    root: E,
    origin_singular: bool,
    singular: Vec<SingularSet>,
    decay: Option<f64>,
    grad: OnceLock<Vec<E>>,
    hess: OnceLock<Vec<E>>,
    third: OnceLock<Vec<E>>,
}

impl fmt::Debug for ExprField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ExprField")
            .field("dim", &self.dim)
            .field("source", &self.source)
            .field("decay", &self.decay)
            .finish()
    }
}

/// Parses `expr` as a scalar field on R^n.
pub fn parse_field(expr: &str, n: usize) -> Result<ExprField> {
    if n < 1 {
        return Err(Error::domain("field dimension must be positive"));
    }
    let lexer = lex(expr)?;
    let mut p = Parser {
        toks: lexer.toks,
        pos: 0,
        dim: n,
    };
    let root = p.expr()?;
    if *p.peek() != Tok::End {
        return p.syntax("unexpected trailing input");
    }
    Ok(ExprField {
        dim: n,
        source: expr.to_string(),
        origin_singular: origin_singular(&root),
        root,
        singular: Vec::new(),
        decay: None,
        grad: OnceLock::new(),
        hess: OnceLock::new(),
        third: OnceLock::new(),
    })
}

impl ExprField {
    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn with_decay(mut self, p: f64) -> Self {
        self.decay = Some(p);
        self
    }

    pub fn with_singular_set(mut self, set: SingularSet) -> Self {
        self.singular.push(set);
        self
    }

    /// True when the expression does not depend on the point.
    pub fn is_constant(&self) -> bool {
        as_const(&self.root).is_some()
    }

    fn grad(&self) -> &[E] {
        self.grad.get_or_init(|| (0..self.dim).map(|i| diff(&self.root, i)).collect())
    }

    fn hess(&self) -> &[E] {
        self.hess.get_or_init(|| {
            let n = self.dim;
            let g = self.grad();
            let mut h: Vec<Option<E>> = vec![None; n * n];
            for i in 0..n {
                for j in i..n {
                    let d = diff(&g[i], j);
                    h[j * n + i] = Some(d.clone());
                    h[i * n + j] = Some(d);
                }
            }
            h.into_iter().map(Option::unwrap).collect()
        })
    }

    fn third(&self) -> &[E] {
        self.third.get_or_init(|| {
            let n = self.dim;
            let h = self.hess();
            let mut t: Vec<Option<E>> = vec![None; n * n * n];
            for i in 0..n {
                for j in i..n {
                    for k in j..n {
                        let d = diff(&h[i * n + j], k);
                        for (a, b, c) in [(i, j, k), (i, k, j), (j, i, k), (j, k, i), (k, i, j), (k, j, i)] {
                            t[(a * n + b) * n + c] = Some(d.clone());
                        }
                    }
                }
            }
            t.into_iter().map(Option::unwrap).collect()
        })
    }

    fn check_point(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim {
            return Err(Error::domain(format!(
                "point has dimension {}, field has {}",
                x.len(),
                self.dim
            )));
        }
        Ok(norm(x))
    }

    fn jet(&self, x: &[f64], order: usize) -> Result<Jet> {
        let r = self.check_point(x)?;
        let n = self.dim;
        let finite = |v: f64, what: &str| -> Result<f64> {
            if v.is_finite() {
                Ok(v)
            } else {
                Err(Error::domain(format!("{what} of '{}' is not finite at {x:?}", self.source)))
            }
        };
        let value = finite(eval(&self.root, x, r), "value")?;
        let mut gradient = Vec::new();
        if order >= 1 {
            for g in self.grad() {
                gradient.push(finite(eval(g, x, r), "gradient")?);
            }
        }
        let mut hessian = DMatrix::zeros(0, 0);
        if order >= 2 {
            let h = self.hess();
            hessian = DMatrix::zeros(n, n);
            for i in 0..n {
                for j in i..n {
                    let v = finite(eval(&h[i * n + j], x, r), "Hessian")?;
                    hessian[(i, j)] = v;
                    hessian[(j, i)] = v;
                }
            }
        }
        let mut third = ThirdOrder::empty();
        if order >= 3 {
            let t = self.third();
            third = ThirdOrder::zeros(n);
            for i in 0..n {
                for j in i..n {
                    for k in j..n {
                        let v = finite(eval(&t[(i * n + j) * n + k], x, r), "third derivative")?;
                        third.set_symmetric(i, j, k, v);
                    }
                }
            }
        }
        Ok(Jet {
            order,
            value,
            gradient,
            hessian,
            third,
        })
    }
}

impl ScalarField for ExprField {
    fn dim(&self) -> usize {
        self.dim
    }

    fn value(&self, x: &[f64]) -> Result<f64> {
        let r = self.check_point(x)?;
        Ok(eval(&self.root, x, r))
    }

    fn analytic_jet(&self, x: &[f64], order: usize) -> Option<Result<Jet>> {
        Some(self.jet(x, order))
    }

    fn singular_distance(&self, x: &[f64]) -> Option<f64> {
        let mut d = self.singular.iter().map(|s| s.distance(x)).fold(f64::INFINITY, f64::min);
        if self.origin_singular {
            d = d.min(norm(x));
        }
        d.is_finite().then_some(d)
    }

    fn decay(&self) -> Option<f64> {
        self.decay
    }

    fn describe(&self) -> String {
        self.source.clone()
    }
}

/// Source text of a polynomial of total degree `degree` in `x1..xn`, one coefficient per
/// monomial drawn from `coeff` in graded lexicographic order.
pub fn polynomial_source(n: usize, degree: usize, mut coeff: impl FnMut() -> f64) -> String {
    let mut terms = Vec::new();
    let mut exps = vec![0usize; n];
    for d in 0..=degree {
        monomials(n, d, 0, &mut exps, &mut |e| {
            let mut t = format!("({:?})", coeff());
            for (i, &k) in e.iter().enumerate() {
                match k {
                    0 => {}
                    1 => t.push_str(&format!("*x{}", i + 1)),
                    _ => t.push_str(&format!("*x{}^{k}", i + 1)),
                }
            }
            terms.push(t);
        });
    }
    terms.join(" + ")
}

fn monomials(n: usize, left: usize, at: usize, exps: &mut Vec<usize>, emit: &mut impl FnMut(&[usize])) {
    if at == n - 1 {
        exps[at] = left;
        emit(exps);
        return;
    }
    for k in (0..=left).rev() {
        exps[at] = k;
        monomials(n, left - k, at + 1, exps, emit);
    }
}
