//! Canonical sum-of-monomials normal form.
//!
//! A normalized expression is a sum of monomials `c * prod atom^k` with
//! exact rational `c` and atoms drawn from symbols, `pi`, `sin`, `cos`,
//! `log` (arguments themselves canonical) and, for inverses that do not
//! reduce to a monomial, whole canonical sums raised to negative powers.
//! Positive powers of sums are always expanded. Two rewriting passes run to
//! a fixed point on top of the raw expansion:
//!
//! * `sin^2 u + cos^2 u` pairs with equal cofactors collapse;
//! * sum-power denominators cancel against their expanded multiples, found
//!   by exact multivariate division.

use super::Expr;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::collections::BTreeMap;

/// Multiplicative atom of a monomial. `SumPow` bases are canonical sums
/// (or pi-free irreducibles) that only ever occur with negative exponents.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
enum Atom {
    Sym(String),
    Pi,
    Sin(Expr),
    Cos(Expr),
    Log(Expr),
    SumPow(Expr),
}

type Powers = BTreeMap<Atom, i64>;

#[derive(Debug, Clone, Default, PartialEq, Eq)]
struct Poly {
    terms: BTreeMap<Powers, BigRational>,
}

impl Poly {
    fn zero() -> Poly {
        Poly::default()
    }

    fn constant(c: BigRational) -> Poly {
        let mut p = Poly::zero();
        if !c.is_zero() {
            p.terms.insert(Powers::new(), c);
        }
        p
    }

    fn one() -> Poly {
        Poly::constant(BigRational::one())
    }

    fn atom(a: Atom) -> Poly {
        let mut powers = Powers::new();
        powers.insert(a, 1);
        let mut p = Poly::zero();
        p.terms.insert(powers, BigRational::one());
        p
    }

    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn insert(&mut self, powers: Powers, coef: BigRational) {
        if coef.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(powers) {
            Entry::Vacant(v) => {
                v.insert(coef);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += coef;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    fn add(&mut self, other: Poly) {
        for (powers, coef) in other.terms {
            self.insert(powers, coef);
        }
    }

    fn mul(&self, other: &Poly) -> Poly {
        let mut out = Poly::zero();
        for (pa, ca) in &self.terms {
            for (pb, cb) in &other.terms {
                let mut powers = pa.clone();
                for (atom, exp) in pb {
                    let e = powers.entry(atom.clone()).or_insert(0);
                    *e += exp;
                    if *e == 0 {
                        powers.remove(atom);
                    }
                }
                out.insert(powers, ca * cb);
            }
        }
        out
    }

    fn scale(&mut self, c: &BigRational) {
        if c.is_zero() {
            self.terms.clear();
            return;
        }
        for coef in self.terms.values_mut() {
            *coef *= c;
        }
    }

    fn pow(&self, k: i64) -> Poly {
        if k == 0 {
            return Poly::one();
        }
        if k > 0 {
            let mut acc = Poly::one();
            let mut base = self.clone();
            let mut n = k;
            loop {
                if n & 1 == 1 {
                    acc = acc.mul(&base);
                }
                n >>= 1;
                if n == 0 {
                    break;
                }
                base = base.mul(&base);
            }
            return acc;
        }
        // Negative power.
        if self.terms.len() == 1 {
            let (powers, coef) = self.terms.iter().next().unwrap();
            let mut inv_powers = Powers::new();
            for (atom, exp) in powers {
                inv_powers.insert(atom.clone(), exp * k);
            }
            let mut p = Poly::zero();
            p.insert(inv_powers, rational_pow(coef, k));
            // Inverting may flip an opaque sum-power positive; expand it.
            return expand_positive_sum_powers(p);
        }
        // Inverse of a genuine sum (or of zero): keep as an opaque power
        // after factoring out monomial content so equal sums up to a
        // monomial factor share one base.
        let (content_powers, content_coef, reduced) = self.factor_content();
        let base = reduced.to_expr();
        let mut powers = Powers::new();
        for (atom, exp) in content_powers {
            powers.insert(atom, exp * k);
        }
        if !reduced.is_one_monomial_one() {
            powers.insert(Atom::SumPow(base), k);
        }
        let mut p = Poly::zero();
        p.insert(powers, rational_pow(&content_coef, k));
        p
    }

    fn is_one_monomial_one(&self) -> bool {
        self.terms.len() == 1
            && self
                .terms
                .iter()
                .next()
                .map(|(p, c)| p.is_empty() && c.is_one())
                .unwrap_or(false)
    }

    /// Factor out the per-atom minimum exponent and the leading coefficient
    /// so the remaining sum is monic with atom-free content.
    fn factor_content(&self) -> (Powers, BigRational, Poly) {
        if self.is_zero() {
            return (Powers::new(), BigRational::one(), Poly::zero());
        }
        let mut common: Option<Powers> = None;
        for powers in self.terms.keys() {
            common = Some(match common {
                None => powers.clone(),
                Some(prev) => {
                    let mut next = Powers::new();
                    for (atom, exp) in &prev {
                        let other = powers.get(atom).copied().unwrap_or(0);
                        let kept = (*exp).min(other);
                        if kept != 0 {
                            next.insert(atom.clone(), kept);
                        }
                    }
                    // Atoms appearing with negative exponent in `powers`
                    // but absent from `prev` also factor out.
                    for (atom, exp) in powers {
                        if *exp < 0 && !prev.contains_key(atom) {
                            next.insert(atom.clone(), (*exp).min(0));
                        }
                    }
                    next
                }
            });
        }
        let common = common.unwrap();
        let mut reduced = Poly::zero();
        for (powers, coef) in &self.terms {
            let mut rest = powers.clone();
            for (atom, exp) in &common {
                let e = rest.entry(atom.clone()).or_insert(0);
                *e -= exp;
                if *e == 0 {
                    rest.remove(atom);
                }
            }
            reduced.insert(rest, coef.clone());
        }
        let lead_coef = reduced.terms.iter().next_back().unwrap().1.clone();
        let inv = lead_coef.recip();
        reduced.scale(&inv);
        (common, lead_coef, reduced)
    }

    fn to_expr(&self) -> Expr {
        if self.is_zero() {
            return Expr::zero();
        }
        let mut terms = Vec::with_capacity(self.terms.len());
        for (powers, coef) in &self.terms {
            terms.push(monomial_to_expr(powers, coef));
        }
        if terms.len() == 1 {
            terms.pop().unwrap()
        } else {
            Expr::Add(terms)
        }
    }
}

/// Restore the invariant that `SumPow` atoms carry negative exponents only.
fn expand_positive_sum_powers(poly: Poly) -> Poly {
    let mut out = Poly::zero();
    for (powers, coef) in poly.terms {
        let mut kept = Powers::new();
        let mut expanded = Poly::one();
        for (atom, exp) in powers {
            match &atom {
                Atom::SumPow(base) if exp > 0 => {
                    expanded = expanded.mul(&to_poly(base).pow(exp));
                }
                _ => {
                    kept.insert(atom, exp);
                }
            }
        }
        let mut term = Poly::zero();
        term.insert(kept, coef);
        out.add(term.mul(&expanded));
    }
    out
}

fn rational_pow(c: &BigRational, k: i64) -> BigRational {
    if k >= 0 {
        num_traits::pow::pow(c.clone(), k as usize)
    } else {
        num_traits::pow::pow(c.clone().recip(), (-k) as usize)
    }
}

fn monomial_to_expr(powers: &Powers, coef: &BigRational) -> Expr {
    let mut factors = Vec::new();
    if !coef.is_one() || powers.is_empty() {
        factors.push(Expr::Num(coef.clone()));
    }
    for (atom, exp) in powers {
        let base = match atom {
            Atom::Sym(s) => Expr::Sym(s.clone()),
            Atom::Pi => Expr::Pi,
            Atom::Sin(u) => Expr::Sin(Box::new(u.clone())),
            Atom::Cos(u) => Expr::Cos(Box::new(u.clone())),
            Atom::Log(u) => Expr::Log(Box::new(u.clone())),
            Atom::SumPow(b) => b.clone(),
        };
        factors.push(if *exp == 1 {
            base
        } else {
            Expr::Pow(Box::new(base), *exp)
        });
    }
    if factors.len() == 1 {
        factors.pop().unwrap()
    } else {
        Expr::Mul(factors)
    }
}

/// Full canonicalization: expand, then rewrite to a fixed point.
pub(super) fn canonicalize(e: &Expr) -> Expr {
    let mut poly = to_poly(e);
    for _ in 0..12 {
        let mut changed = pythagorean_pass(&mut poly);
        changed |= sum_power_pass(&mut poly);
        if !changed {
            break;
        }
    }
    poly.to_expr()
}

fn to_poly(e: &Expr) -> Poly {
    match e {
        Expr::Num(r) => Poly::constant(r.clone()),
        Expr::Sym(s) => Poly::atom(Atom::Sym(s.clone())),
        Expr::Pi => Poly::atom(Atom::Pi),
        Expr::Add(ts) => {
            let mut acc = Poly::zero();
            for t in ts {
                acc.add(to_poly(t));
            }
            acc
        }
        Expr::Mul(fs) => {
            let mut acc = Poly::one();
            for f in fs {
                acc = acc.mul(&to_poly(f));
                if acc.is_zero() {
                    break;
                }
            }
            acc
        }
        Expr::Pow(b, k) => to_poly(b).pow(*k),
        Expr::Sin(u) => {
            let cu = canonicalize(u);
            if cu.is_zero() {
                Poly::zero()
            } else {
                Poly::atom(Atom::Sin(cu))
            }
        }
        Expr::Cos(u) => {
            let cu = canonicalize(u);
            if cu.is_zero() {
                Poly::one()
            } else {
                Poly::atom(Atom::Cos(cu))
            }
        }
        Expr::Log(u) => {
            let cu = canonicalize(u);
            if cu.is_one() {
                Poly::zero()
            } else {
                Poly::atom(Atom::Log(cu))
            }
        }
    }
}

/// Collapse `a*X*sin(u)^2 + b*X*cos(u)^2` with same-sign `a, b` into
/// `t*X + (a-t)*X*sin(u)^2 + (b-t)*X*cos(u)^2`, `t` the smaller of the two
/// by magnitude. Each application strictly reduces total trig degree, so
/// iteration terminates.
fn pythagorean_pass(poly: &mut Poly) -> bool {
    let mut changed = false;
    loop {
        let mut rewrite: Option<(Powers, Powers, Powers, BigRational)> = None;
        for (powers, coef) in &poly.terms {
            for (atom, exp) in powers {
                let u = match atom {
                    Atom::Sin(u) if *exp >= 2 => u.clone(),
                    _ => continue,
                };
                let mut partner = powers.clone();
                let e = partner.entry(Atom::Sin(u.clone())).or_insert(0);
                *e -= 2;
                if *e == 0 {
                    partner.remove(&Atom::Sin(u.clone()));
                }
                let c = partner.entry(Atom::Cos(u.clone())).or_insert(0);
                *c += 2;
                if let Some(pc) = poly.terms.get(&partner) {
                    if pc.is_positive() == coef.is_positive() {
                        let t = if coef.abs() <= pc.abs() {
                            coef.clone()
                        } else {
                            pc.clone()
                        };
                        let mut merged = partner.clone();
                        let c = merged.entry(Atom::Cos(u.clone())).or_insert(0);
                        *c -= 2;
                        if *c == 0 {
                            merged.remove(&Atom::Cos(u));
                        }
                        rewrite = Some((powers.clone(), partner, merged, t));
                        break;
                    }
                }
            }
            if rewrite.is_some() {
                break;
            }
        }
        match rewrite {
            Some((sin_key, cos_key, merged, t)) => {
                let a = poly.terms.remove(&sin_key).unwrap();
                let b = poly.terms.remove(&cos_key).unwrap();
                poly.insert(sin_key, a - &t);
                poly.insert(cos_key, b - &t);
                poly.insert(merged, t);
                changed = true;
            }
            None => break,
        }
    }
    changed
}

/// Cancel `S^-k` atoms against their expanded multiples: factor the whole
/// poly as `S^e * Q` with `Q` expanded, then divide `Q` by `S` exactly as
/// long as the division is exact.
fn sum_power_pass(poly: &mut Poly) -> bool {
    let mut bases: Vec<Expr> = Vec::new();
    for powers in poly.terms.keys() {
        for atom in powers.keys() {
            if let Atom::SumPow(b) = atom {
                if !bases.contains(b) {
                    bases.push(b.clone());
                }
            }
        }
    }
    let mut changed = false;
    for base in bases {
        changed |= cancel_base(poly, &base);
    }
    changed
}

fn cancel_base(poly: &mut Poly, base: &Expr) -> bool {
    let atom = Atom::SumPow(base.clone());
    let mut min_exp: i64 = 0;
    for powers in poly.terms.keys() {
        let e = powers.get(&atom).copied().unwrap_or(0);
        min_exp = min_exp.min(e);
    }
    if min_exp >= 0 {
        return false;
    }
    let base_poly = to_poly(base);
    // Pull S^min_exp out of every monomial, expanding the surplus powers.
    let mut q = Poly::zero();
    let mut expanded_terms = 0usize;
    for (powers, coef) in &poly.terms {
        let e = powers.get(&atom).copied().unwrap_or(0);
        let mut stripped = powers.clone();
        stripped.remove(&atom);
        let mut term = Poly::zero();
        term.insert(stripped, coef.clone());
        let surplus = e - min_exp;
        if surplus > 0 {
            if surplus > 8 {
                return false; // expansion would blow up; leave as-is
            }
            term = term.mul(&base_poly.pow(surplus));
        }
        expanded_terms += term.terms.len();
        if expanded_terms > 4096 {
            return false;
        }
        q.add(term);
    }
    // Divide out as many factors of S as possible.
    let mut exp = min_exp;
    while exp < 0 {
        match divide_exact(&q, &base_poly) {
            Some(quotient) => {
                q = quotient;
                exp += 1;
            }
            None => break,
        }
    }
    if exp == min_exp {
        return false;
    }
    // Reattach the remaining S^exp.
    let mut out = Poly::zero();
    for (powers, coef) in q.terms {
        let mut p = powers;
        if exp != 0 {
            if p.contains_key(&atom) {
                *p.get_mut(&atom).unwrap() += exp;
                if p[&atom] == 0 {
                    p.remove(&atom);
                }
            } else {
                p.insert(atom.clone(), exp);
            }
        }
        out.insert(p, coef);
    }
    *poly = out;
    true
}

/// Lexicographic order on exponent vectors, missing atoms counting as zero.
/// Translation-invariant, so leading-term arithmetic behaves under
/// monomial multiplication (unlike the raw map order).
fn cmp_powers(a: &Powers, b: &Powers) -> std::cmp::Ordering {
    use std::cmp::Ordering;
    let mut ia = a.iter().peekable();
    let mut ib = b.iter().peekable();
    loop {
        match (ia.peek(), ib.peek()) {
            (None, None) => return Ordering::Equal,
            (Some((atom_a, ea)), Some((atom_b, eb))) => match atom_a.cmp(atom_b) {
                Ordering::Equal => match ea.cmp(eb) {
                    Ordering::Equal => {
                        ia.next();
                        ib.next();
                    }
                    ord => return ord,
                },
                Ordering::Less => match ea.cmp(&&0) {
                    Ordering::Equal => {
                        ia.next();
                    }
                    ord => return ord,
                },
                Ordering::Greater => match 0.cmp(eb) {
                    Ordering::Equal => {
                        ib.next();
                    }
                    ord => return ord,
                },
            },
            (Some((_, ea)), None) => match ea.cmp(&&0) {
                std::cmp::Ordering::Equal => {
                    ia.next();
                }
                ord => return ord,
            },
            (None, Some((_, eb))) => match 0.cmp(eb) {
                std::cmp::Ordering::Equal => {
                    ib.next();
                }
                ord => return ord,
            },
        }
    }
}

fn leading<'a>(p: &'a Poly) -> (&'a Powers, &'a BigRational) {
    p.terms
        .iter()
        .max_by(|(ka, _), (kb, _)| cmp_powers(ka, kb))
        .unwrap()
}

/// Exact multivariate division in the Laurent-monomial algebra. Atoms act
/// as independent variables; a step cap guards against non-terminating
/// reduction chains, returning `None` (sound: we only simplify on success).
fn divide_exact(q: &Poly, p: &Poly) -> Option<Poly> {
    if p.is_zero() {
        return None;
    }
    if q.is_zero() {
        return Some(Poly::zero());
    }
    let (p_lead_powers, p_lead_coef) = leading(p);
    let cap = 4 * q.terms.len() + 32;
    let mut rem = q.clone();
    let mut out = Poly::zero();
    for _ in 0..cap {
        if rem.is_zero() {
            return Some(out);
        }
        let (r_lead_powers, r_lead_coef) = leading(&rem);
        // quotient monomial = lead(rem) / lead(p)
        let mut quot_powers = r_lead_powers.clone();
        for (atom, exp) in p_lead_powers {
            let e = quot_powers.entry(atom.clone()).or_insert(0);
            *e -= exp;
            if *e == 0 {
                quot_powers.remove(atom);
            }
        }
        let quot_coef = r_lead_coef / p_lead_coef;
        let mut quot = Poly::zero();
        quot.insert(quot_powers, quot_coef);
        let sub = quot.mul(p);
        let mut neg = sub;
        neg.scale(&-BigRational::one());
        rem.add(neg);
        out.add(quot);
    }
    None
}

// ---------------------------------------------------------------------------
// Analyses on the normal form.
// ---------------------------------------------------------------------------

/// Order of the visible pole along `{sym = 0}`: for each monomial, sum
/// `|exp|` over negative-exponent atoms whose base vanishes at `sym = 0`;
/// report the maximum over monomials.
pub(super) fn pole_order(e: &Expr, sym: &str) -> i64 {
    let poly = to_poly(&canonicalize(e));
    let mut worst = 0i64;
    for powers in poly.terms.keys() {
        let mut order = 0i64;
        for (atom, exp) in powers {
            if *exp >= 0 {
                continue;
            }
            let vanishes = match atom {
                Atom::Sym(s) => s == sym,
                Atom::Pi => false,
                Atom::Sin(u) | Atom::Cos(u) | Atom::Log(u) | Atom::SumPow(u) => {
                    u.free_symbols().contains(sym)
                        && u.subst_one(sym, Expr::zero()).is_zero_like()
                }
            };
            if vanishes {
                order += -exp;
            }
        }
        worst = worst.max(order);
    }
    worst
}

impl Expr {
    fn is_zero_like(&self) -> bool {
        self.normalize().is_zero()
    }
}

/// Exact division by `sym^m`; `None` when some monomial carries less than
/// `sym^m` or `sym` occurs inside a function argument or composite base.
pub(super) fn factor_out_power(e: &Expr, sym: &str, m: i64) -> Option<Expr> {
    let canon = canonicalize(e);
    if canon.is_zero() {
        return Some(canon);
    }
    let poly = to_poly(&canon);
    let mut out = Poly::zero();
    for (powers, coef) in &poly.terms {
        let mut stripped = Powers::new();
        let mut found = 0i64;
        for (atom, exp) in powers {
            match atom {
                Atom::Sym(s) if s == sym => {
                    found = *exp;
                    if *exp != m {
                        stripped.insert(atom.clone(), exp - m);
                    }
                }
                Atom::Sin(u) | Atom::Cos(u) | Atom::Log(u) | Atom::SumPow(u) => {
                    if u.free_symbols().contains(sym) {
                        return None;
                    }
                    stripped.insert(atom.clone(), *exp);
                }
                _ => {
                    stripped.insert(atom.clone(), *exp);
                }
            }
        }
        if found < m {
            return None;
        }
        out.insert(stripped, coef.clone());
    }
    Some(out.to_expr())
}

/// Convenience used by tests: big-integer rational from parts.
#[allow(dead_code)]
pub(super) fn big_ratio(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}
