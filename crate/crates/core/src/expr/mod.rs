//! Exact symbolic scalar expressions.
//!
//! The expression class is deliberately small: rational constants, named
//! symbols, `pi`, sums, products, integer powers, `sin`, `cos` and `log` of
//! the absolute value. Everything a coefficient in this crate needs fits in
//! it, and exact symbolic differentiation stays total on it.
//!
//! Expressions are immutable values; all operations are pure and return new
//! trees. [`Expr::normalize`] produces a canonical sum-of-monomials form and
//! is idempotent; [`Expr::equivalence`] decides equality by normalizing the
//! difference first and falls back to seeded randomized evaluation, clearly
//! flagged as [`Equivalence::Sampled`].

mod compile;
mod normal;
mod parse;

pub use compile::CompiledExpr;
pub use parse::ParseError;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

/// A symbolic scalar expression over chart coordinates and named parameters.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum Expr {
    /// Exact rational constant.
    Num(BigRational),
    /// Coordinate or parameter symbol.
    Sym(String),
    /// The circle constant, kept symbolic until evaluation.
    Pi,
    Add(Vec<Expr>),
    Mul(Vec<Expr>),
    /// Integer power of the base; the grammar admits no other exponents.
    Pow(Box<Expr>, i64),
    Sin(Box<Expr>),
    Cos(Box<Expr>),
    /// Natural logarithm of the absolute value of the argument.
    Log(Box<Expr>),
}

/// Evaluation failure at a concrete point.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EvalError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("log of zero")]
    LogDomain,
    #[error("unbound symbol `{0}`")]
    UnboundSymbol(String),
    #[error("non-finite value produced")]
    NonFinite,
}

/// Outcome of an equivalence test between two expressions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Equivalence {
    /// The normalized difference is identically zero.
    Symbolic,
    /// Normalization was inconclusive; agreement within 1e-10 relative at
    /// all sampled pole-free points.
    Sampled,
    Distinct,
}

impl Equivalence {
    pub fn holds(self) -> bool {
        !matches!(self, Equivalence::Distinct)
    }
}

impl Expr {
    pub fn int(n: i64) -> Expr {
        Expr::Num(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn ratio(num: i64, den: i64) -> Expr {
        Expr::Num(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn sym(name: impl Into<String>) -> Expr {
        Expr::Sym(name.into())
    }

    pub fn sin(e: Expr) -> Expr {
        Expr::Sin(Box::new(e))
    }

    pub fn cos(e: Expr) -> Expr {
        Expr::Cos(Box::new(e))
    }

    pub fn log(e: Expr) -> Expr {
        Expr::Log(Box::new(e))
    }

    pub fn pow(self, exp: i64) -> Expr {
        Expr::Pow(Box::new(self), exp)
    }

    pub fn zero() -> Expr {
        Expr::int(0)
    }

    pub fn one() -> Expr {
        Expr::int(1)
    }

    /// True only for a literal zero constant (which is what every
    /// identically-zero expression normalizes to).
    pub fn is_zero(&self) -> bool {
        matches!(self, Expr::Num(r) if r.is_zero())
    }

    pub fn is_one(&self) -> bool {
        matches!(self, Expr::Num(r) if r.is_one())
    }

    pub fn as_rational(&self) -> Option<&BigRational> {
        match self {
            Expr::Num(r) => Some(r),
            _ => None,
        }
    }

    /// Canonical form: sums of ordered monomials with folded constants,
    /// syntactically detectable `sin^2 + cos^2` pairs collapsed and exact
    /// cancellation of sum-power denominators. Idempotent.
    pub fn normalize(&self) -> Expr {
        normal::canonicalize(self)
    }

    /// Exact partial derivative with respect to `var`, normalized. Symbols
    /// other than `var` are treated as constants; whether they are declared
    /// at all is checked where expressions enter a chart.
    pub fn diff(&self, var: &str) -> Expr {
        self.diff_raw(var).normalize()
    }

    fn diff_raw(&self, var: &str) -> Expr {
        match self {
            Expr::Num(_) | Expr::Pi => Expr::zero(),
            Expr::Sym(s) => {
                if s == var {
                    Expr::one()
                } else {
                    Expr::zero()
                }
            }
            Expr::Add(terms) => Expr::Add(terms.iter().map(|t| t.diff_raw(var)).collect()),
            Expr::Mul(factors) => {
                let mut terms = Vec::with_capacity(factors.len());
                for (i, f) in factors.iter().enumerate() {
                    let mut prod = factors.clone();
                    prod[i] = f.diff_raw(var);
                    terms.push(Expr::Mul(prod));
                }
                Expr::Add(terms)
            }
            Expr::Pow(base, k) => {
                if *k == 0 {
                    Expr::zero()
                } else {
                    Expr::Mul(vec![
                        Expr::int(*k),
                        Expr::Pow(base.clone(), k - 1),
                        base.diff_raw(var),
                    ])
                }
            }
            Expr::Sin(u) => Expr::Mul(vec![Expr::Cos(u.clone()), u.diff_raw(var)]),
            Expr::Cos(u) => Expr::Mul(vec![
                Expr::int(-1),
                Expr::Sin(u.clone()),
                u.diff_raw(var),
            ]),
            // d log|u| = du / u
            Expr::Log(u) => Expr::Mul(vec![u.diff_raw(var), Expr::Pow(u.clone(), -1)]),
        }
    }

    /// Substitute expressions for symbols, then normalize.
    pub fn subst(&self, map: &BTreeMap<String, Expr>) -> Expr {
        self.subst_raw(map).normalize()
    }

    fn subst_raw(&self, map: &BTreeMap<String, Expr>) -> Expr {
        match self {
            Expr::Num(_) | Expr::Pi => self.clone(),
            Expr::Sym(s) => map.get(s).cloned().unwrap_or_else(|| self.clone()),
            Expr::Add(ts) => Expr::Add(ts.iter().map(|t| t.subst_raw(map)).collect()),
            Expr::Mul(fs) => Expr::Mul(fs.iter().map(|f| f.subst_raw(map)).collect()),
            Expr::Pow(b, k) => Expr::Pow(Box::new(b.subst_raw(map)), *k),
            Expr::Sin(u) => Expr::Sin(Box::new(u.subst_raw(map))),
            Expr::Cos(u) => Expr::Cos(Box::new(u.subst_raw(map))),
            Expr::Log(u) => Expr::Log(Box::new(u.subst_raw(map))),
        }
    }

    pub fn subst_one(&self, sym: &str, value: Expr) -> Expr {
        let mut map = BTreeMap::new();
        map.insert(sym.to_string(), value);
        self.subst(&map)
    }

    pub fn free_symbols(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_symbols(&mut out);
        out
    }

    fn collect_symbols(&self, out: &mut BTreeSet<String>) {
        match self {
            Expr::Num(_) | Expr::Pi => {}
            Expr::Sym(s) => {
                out.insert(s.clone());
            }
            Expr::Add(ts) | Expr::Mul(ts) => ts.iter().for_each(|t| t.collect_symbols(out)),
            Expr::Pow(b, _) => b.collect_symbols(out),
            Expr::Sin(u) | Expr::Cos(u) | Expr::Log(u) => u.collect_symbols(out),
        }
    }

    /// Evaluate at a point. Every free symbol must be bound; division by
    /// zero, `log 0` and non-finite intermediates are reported as errors,
    /// never returned as silent NaN/inf.
    pub fn eval(&self, bindings: &BTreeMap<String, f64>) -> Result<f64, EvalError> {
        let v = match self {
            Expr::Num(r) => r.to_f64().ok_or(EvalError::NonFinite)?,
            Expr::Pi => std::f64::consts::PI,
            Expr::Sym(s) => *bindings
                .get(s)
                .ok_or_else(|| EvalError::UnboundSymbol(s.clone()))?,
            Expr::Add(ts) => {
                let mut acc = 0.0;
                for t in ts {
                    acc += t.eval(bindings)?;
                }
                acc
            }
            Expr::Mul(fs) => {
                let mut acc = 1.0;
                for f in fs {
                    acc *= f.eval(bindings)?;
                }
                acc
            }
            Expr::Pow(b, k) => {
                let base = b.eval(bindings)?;
                if *k < 0 && base == 0.0 {
                    return Err(EvalError::DivisionByZero);
                }
                powi(base, *k)
            }
            Expr::Sin(u) => u.eval(bindings)?.sin(),
            Expr::Cos(u) => u.eval(bindings)?.cos(),
            Expr::Log(u) => {
                let x = u.eval(bindings)?;
                if x == 0.0 {
                    return Err(EvalError::LogDomain);
                }
                x.abs().ln()
            }
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(EvalError::NonFinite)
        }
    }

    /// Evaluate an expression with no free symbols (pi allowed).
    pub fn eval_constant(&self) -> Result<f64, EvalError> {
        self.eval(&BTreeMap::new())
    }

    /// Equality test: normalization first, randomized evaluation fallback.
    pub fn equivalence(&self, other: &Expr) -> Equivalence {
        let diff = Expr::Add(vec![
            self.clone(),
            Expr::Mul(vec![Expr::int(-1), other.clone()]),
        ])
        .normalize();
        if diff.is_zero() {
            return Equivalence::Symbolic;
        }
        let mut symbols = self.free_symbols();
        symbols.extend(other.free_symbols());
        if symbols.is_empty() {
            // Constant difference that did not normalize to zero; decide
            // numerically (it may involve pi).
            return match (self.eval_constant(), other.eval_constant()) {
                (Ok(a), Ok(b)) if close(a, b) => Equivalence::Sampled,
                _ => Equivalence::Distinct,
            };
        }
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0x0b5e_c41c);
        let mut accepted = 0usize;
        let mut attempts = 0usize;
        while accepted < 64 {
            attempts += 1;
            if attempts > 64 * 100 {
                // Could not find enough pole-free points; be conservative.
                return Equivalence::Distinct;
            }
            let mut bindings = BTreeMap::new();
            for s in &symbols {
                bindings.insert(s.clone(), rng.gen_range(-2.0..2.0));
            }
            let (a, b) = match (self.eval(&bindings), other.eval(&bindings)) {
                (Ok(a), Ok(b)) => (a, b),
                _ => continue, // pole hit; redraw
            };
            if !close(a, b) {
                return Equivalence::Distinct;
            }
            accepted += 1;
        }
        Equivalence::Sampled
    }

    /// Shorthand for `equivalence(..).holds()`.
    pub fn equivalent(&self, other: &Expr) -> bool {
        self.equivalence(other).holds()
    }

    /// Parse the expression grammar: numbers, identifiers, `+ - * / ^`,
    /// `sin( ) cos( ) log( )`, parentheses; `^` takes integer literal
    /// exponents only.
    pub fn parse(text: &str) -> Result<Expr, ParseError> {
        parse::parse(text)
    }

    /// Order of the pole of this expression along `{sym = 0}`, judged
    /// syntactically from the normal form: negative powers whose base
    /// vanishes at `sym = 0` contribute. Zero means no division by `sym`
    /// is visible.
    pub fn pole_order_in(&self, sym: &str) -> i64 {
        normal::pole_order(self, sym)
    }

    /// Taylor coefficient of order `i` around `var = 0`: `d^i/dvar^i / i!`
    /// evaluated at `var = 0`, exact.
    pub fn taylor_coeff(&self, var: &str, order: u32) -> Expr {
        let mut d = self.clone();
        for _ in 0..order {
            d = d.diff(var);
        }
        let mut fact = BigRational::one();
        for j in 1..=order as i64 {
            fact *= BigRational::from_integer(BigInt::from(j));
        }
        let inv = Expr::Num(fact.recip());
        Expr::Mul(vec![inv, d.subst_one(var, Expr::zero())]).normalize()
    }

    /// Exact division by `var^m` when every monomial of the normal form
    /// carries at least `var^m` and `var` occurs nowhere inside a function
    /// argument or composite base. Returns `None` otherwise.
    pub fn factor_out_power(&self, var: &str, m: i64) -> Option<Expr> {
        normal::factor_out_power(self, var, m)
    }
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-10 * 1.0_f64.max(a.abs()).max(b.abs())
}

pub(crate) fn powi(base: f64, k: i64) -> f64 {
    if k.abs() <= i32::MAX as i64 {
        base.powi(k as i32)
    } else {
        base.powf(k as f64)
    }
}

impl std::ops::Add for Expr {
    type Output = Expr;
    fn add(self, rhs: Expr) -> Expr {
        Expr::Add(vec![self, rhs])
    }
}

impl std::ops::Sub for Expr {
    type Output = Expr;
    fn sub(self, rhs: Expr) -> Expr {
        Expr::Add(vec![self, Expr::Mul(vec![Expr::int(-1), rhs])])
    }
}

impl std::ops::Mul for Expr {
    type Output = Expr;
    fn mul(self, rhs: Expr) -> Expr {
        Expr::Mul(vec![self, rhs])
    }
}

impl std::ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr::Mul(vec![Expr::int(-1), self])
    }
}

// ---------------------------------------------------------------------------
// Printing. The canonical rendering round-trips through the parser: for any
// normal form `e`, `parse(print(e)).normalize() == e`.
// ---------------------------------------------------------------------------

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_expr(self, f)
    }
}

fn write_expr(e: &Expr, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    match e {
        Expr::Add(terms) if !terms.is_empty() => {
            for (i, t) in terms.iter().enumerate() {
                let (neg, mag) = split_sign(t);
                if i == 0 {
                    if neg {
                        write!(f, "-")?;
                    }
                } else if neg {
                    write!(f, " - ")?;
                } else {
                    write!(f, " + ")?;
                }
                write_term(&mag, f)?;
            }
            Ok(())
        }
        _ => {
            let (neg, mag) = split_sign(e);
            if neg {
                write!(f, "-")?;
            }
            write_term(&mag, f)
        }
    }
}

/// Split a leading numeric sign off a term for `a - b` style printing.
fn split_sign(e: &Expr) -> (bool, Expr) {
    match e {
        Expr::Num(r) if r.is_negative() => (true, Expr::Num(-r.clone())),
        Expr::Mul(fs) => match fs.first() {
            Some(Expr::Num(r)) if r.is_negative() => {
                let mut rest = fs.clone();
                let mag = -r.clone();
                if mag.is_one() && rest.len() > 1 {
                    rest.remove(0);
                } else {
                    rest[0] = Expr::Num(mag);
                }
                (true, Expr::Mul(rest))
            }
            _ => (false, e.clone()),
        },
        _ => (false, e.clone()),
    }
}

fn write_term(e: &Expr, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    match e {
        Expr::Mul(fs) if !fs.is_empty() => {
            for (i, factor) in fs.iter().enumerate() {
                if i > 0 {
                    write!(f, "*")?;
                }
                write_factor(factor, f)?;
            }
            Ok(())
        }
        _ => write_factor(e, f),
    }
}

fn write_factor(e: &Expr, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    match e {
        Expr::Num(r) => {
            if r.is_integer() {
                write!(f, "{}", r.numer())
            } else {
                write!(f, "{}/{}", r.numer(), r.denom())
            }
        }
        Expr::Sym(s) => write!(f, "{s}"),
        Expr::Pi => write!(f, "pi"),
        Expr::Sin(u) => write!(f, "sin({u})"),
        Expr::Cos(u) => write!(f, "cos({u})"),
        Expr::Log(u) => write!(f, "log({u})"),
        Expr::Pow(base, k) => {
            match base.as_ref() {
                Expr::Sym(_) | Expr::Pi | Expr::Sin(_) | Expr::Cos(_) | Expr::Log(_) => {
                    write_factor(base, f)?;
                }
                _ => {
                    write!(f, "(")?;
                    write_expr(base, f)?;
                    write!(f, ")")?;
                }
            }
            write!(f, "^{k}")
        }
        Expr::Add(_) | Expr::Mul(_) => {
            write!(f, "(")?;
            write_expr(e, f)?;
            write!(f, ")")
        }
    }
}

#[cfg(test)]
mod tests;
