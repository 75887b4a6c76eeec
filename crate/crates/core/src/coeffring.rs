//! Exact rational scalars and multivariate Laurent polynomials.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};
use std::str::FromStr;
use std::sync::Arc;

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Exact rational number in lowest terms with positive denominator.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Default)]
pub struct Rational(BigRational);

impl Rational {
    pub fn new(numer: i64, denom: i64) -> Rational {
        assert!(denom != 0, "zero denominator");
        Rational(BigRational::new(numer.into(), denom.into()))
    }

    pub fn from_bigints(numer: BigInt, denom: BigInt) -> Result<Rational> {
        if denom.is_zero() {
            return Err(Error::InvalidArgument("zero denominator".into()));
        }
        Ok(Rational(BigRational::new(numer, denom)))
    }

    pub fn zero() -> Rational {
        Rational(BigRational::zero())
    }

    pub fn one() -> Rational {
        Rational(BigRational::one())
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.0.is_one()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn abs(&self) -> Rational {
        Rational(self.0.abs())
    }

    /// Multiplicative inverse; fails on zero.
    pub fn recip(&self) -> Result<Rational> {
        if self.is_zero() {
            return Err(Error::NotAUnit("0".into()));
        }
        Ok(Rational(self.0.recip()))
    }

    pub fn to_i64(&self) -> Option<i64> {
        if self.is_integer() {
            self.0.numer().to_i64()
        } else {
            None
        }
    }

    /// Integer power; panics on a negative power of zero.
    pub fn pow(&self, k: i32) -> Rational {
        let base = if k < 0 {
            self.recip().expect("nonzero base")
        } else {
            self.clone()
        };
        let mut acc = Rational::one();
        for _ in 0..k.unsigned_abs() {
            acc = acc * &base;
        }
        acc
    }

    /// Factorial as a rational, for small arguments.
    pub fn factorial(n: u32) -> Rational {
        let mut acc = BigInt::one();
        for k in 2..=n {
            acc *= BigInt::from(k);
        }
        Rational(BigRational::from_integer(acc))
    }
}

impl From<i64> for Rational {
    fn from(v: i64) -> Self {
        Rational(BigRational::from_integer(v.into()))
    }
}

impl From<i32> for Rational {
    fn from(v: i32) -> Self {
        Rational::from(v as i64)
    }
}

impl From<BigInt> for Rational {
    fn from(v: BigInt) -> Self {
        Rational(BigRational::from_integer(v))
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_integer() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl FromStr for Rational {
    type Err = Error;

    fn from_str(s: &str) -> Result<Rational> {
        let bad = || Error::InvalidArgument(format!("not a rational: `{s}`"));
        let (n, d) = match s.split_once('/') {
            Some((n, d)) => (n, d),
            None => (s, "1"),
        };
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        Rational::from_bigints(n, d)
    }
}

macro_rules! rational_binop {
    ($tr:ident, $m:ident) => {
        impl $tr<&Rational> for &Rational {
            type Output = Rational;
            fn $m(self, rhs: &Rational) -> Rational {
                Rational((&self.0).$m(&rhs.0))
            }
        }
        impl $tr<Rational> for Rational {
            type Output = Rational;
            fn $m(self, rhs: Rational) -> Rational {
                Rational(self.0.$m(rhs.0))
            }
        }
        impl $tr<&Rational> for Rational {
            type Output = Rational;
            fn $m(self, rhs: &Rational) -> Rational {
                Rational(self.0.$m(&rhs.0))
            }
        }
    };
}

rational_binop!(Add, add);
rational_binop!(Sub, sub);
rational_binop!(Mul, mul);
rational_binop!(Div, div);

impl Neg for Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-self.0)
    }
}

impl Neg for &Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-&self.0)
    }
}

impl AddAssign<&Rational> for Rational {
    fn add_assign(&mut self, rhs: &Rational) {
        self.0 += &rhs.0;
    }
}

impl SubAssign<&Rational> for Rational {
    fn sub_assign(&mut self, rhs: &Rational) {
        self.0 -= &rhs.0;
    }
}

/// Variable context of a Laurent polynomial ring: ordered even names and the
/// set of variables allowed to carry negative exponents (a bit mask).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PolyCtx {
    names: Vec<String>,
    invertible: u64,
}

impl PolyCtx {
    pub fn new(names: Vec<String>, invertible: &[&str]) -> Result<Arc<PolyCtx>> {
        if names.len() > 64 {
            return Err(Error::InvalidArgument("at most 64 even variables".into()));
        }
        let mut mask = 0u64;
        for inv in invertible {
            let i = names
                .iter()
                .position(|n| n == inv)
                .ok_or_else(|| Error::UnknownCoordinate(inv.to_string()))?;
            mask |= 1 << i;
        }
        Ok(Arc::new(PolyCtx {
            names,
            invertible: mask,
        }))
    }

    pub fn with_mask(names: Vec<String>, invertible: u64) -> Arc<PolyCtx> {
        Arc::new(PolyCtx { names, invertible })
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn nvars(&self) -> usize {
        self.names.len()
    }

    pub fn invertible_mask(&self) -> u64 {
        self.invertible
    }

    pub fn is_invertible(&self, i: usize) -> bool {
        self.invertible >> i & 1 == 1
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// Smallest context containing both: same names, union of invertibles.
    pub fn join(a: &Arc<PolyCtx>, b: &Arc<PolyCtx>) -> Result<Arc<PolyCtx>> {
        if Arc::ptr_eq(a, b) {
            return Ok(a.clone());
        }
        if a.names != b.names {
            return Err(Error::Context(format!(
                "variables [{}] vs [{}]",
                a.names.join(","),
                b.names.join(",")
            )));
        }
        let u = a.invertible | b.invertible;
        if u == a.invertible {
            Ok(a.clone())
        } else if u == b.invertible {
            Ok(b.clone())
        } else {
            Ok(PolyCtx::with_mask(a.names.clone(), u))
        }
    }

    /// Same names with extra invertible variables.
    pub fn extended(self: &Arc<PolyCtx>, mask: u64) -> Arc<PolyCtx> {
        if self.invertible | mask == self.invertible {
            self.clone()
        } else {
            PolyCtx::with_mask(self.names.clone(), self.invertible | mask)
        }
    }
}

pub type Exponent = Vec<i32>;

/// Multivariate Laurent polynomial with rational coefficients.
///
/// Equality compares variable names and terms; two polynomials that differ
/// only in which variables are declared invertible compare equal.
#[derive(Clone, Debug)]
pub struct LaurentPoly {
    ctx: Arc<PolyCtx>,
    terms: BTreeMap<Exponent, Rational>,
}

impl PartialEq for LaurentPoly {
    fn eq(&self, other: &Self) -> bool {
        self.terms == other.terms && self.ctx.names == other.ctx.names
    }
}

impl Eq for LaurentPoly {}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RingOp {
    Add,
    Mul,
    Neg,
}

/// Checked ring arithmetic; `Neg` ignores `b`.
pub fn ring_arith(a: &LaurentPoly, b: &LaurentPoly, op: RingOp) -> Result<LaurentPoly> {
    match op {
        RingOp::Add => a.checked_add(b),
        RingOp::Mul => a.checked_mul(b),
        RingOp::Neg => Ok(-a),
    }
}

impl LaurentPoly {
    pub fn zero(ctx: &Arc<PolyCtx>) -> LaurentPoly {
        LaurentPoly {
            ctx: ctx.clone(),
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(ctx: &Arc<PolyCtx>, c: Rational) -> LaurentPoly {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(vec![0; ctx.nvars()], c);
        }
        LaurentPoly {
            ctx: ctx.clone(),
            terms,
        }
    }

    pub fn one(ctx: &Arc<PolyCtx>) -> LaurentPoly {
        LaurentPoly::constant(ctx, Rational::one())
    }

    pub fn var(ctx: &Arc<PolyCtx>, i: usize) -> LaurentPoly {
        let mut e = vec![0; ctx.nvars()];
        e[i] = 1;
        LaurentPoly::monomial_unchecked(ctx, e, Rational::one())
    }

    /// Single term `c * x^e`; negative exponents must sit on invertible variables.
    pub fn monomial(ctx: &Arc<PolyCtx>, e: Exponent, c: Rational) -> Result<LaurentPoly> {
        if e.len() != ctx.nvars() {
            return Err(Error::Context("exponent length".into()));
        }
        for (i, &k) in e.iter().enumerate() {
            if k < 0 && !ctx.is_invertible(i) {
                return Err(Error::NotAUnit(format!(
                    "negative exponent on non-invertible `{}`",
                    ctx.names[i]
                )));
            }
        }
        Ok(LaurentPoly::monomial_unchecked(ctx, e, c))
    }

    pub(crate) fn monomial_unchecked(ctx: &Arc<PolyCtx>, e: Exponent, c: Rational) -> LaurentPoly {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(e, c);
        }
        LaurentPoly {
            ctx: ctx.clone(),
            terms,
        }
    }

    /// Builds from raw terms, checking exponent lengths and invertibility.
    pub fn from_terms(
        ctx: &Arc<PolyCtx>,
        terms: impl IntoIterator<Item = (Exponent, Rational)>,
    ) -> Result<LaurentPoly> {
        let mut out = LaurentPoly::zero(ctx);
        for (e, c) in terms {
            let m = LaurentPoly::monomial(ctx, e, c)?;
            out = &out + &m;
        }
        Ok(out)
    }

    pub fn ctx(&self) -> &Arc<PolyCtx> {
        &self.ctx
    }

    pub fn terms(&self) -> &BTreeMap<Exponent, Rational> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// The constant if the polynomial has no non-constant terms.
    pub fn as_constant(&self) -> Option<Rational> {
        match self.terms.len() {
            0 => Some(Rational::zero()),
            1 => {
                let (e, c) = self.terms.iter().next().unwrap();
                e.iter().all(|&k| k == 0).then(|| c.clone())
            }
            _ => None,
        }
    }

    pub fn as_monomial(&self) -> Option<(&Exponent, &Rational)> {
        if self.terms.len() == 1 {
            self.terms.iter().next()
        } else {
            None
        }
    }

    /// Re-tag into a context with the same names; negative exponents must stay legal.
    pub fn with_ctx(&self, ctx: &Arc<PolyCtx>) -> Result<LaurentPoly> {
        if Arc::ptr_eq(&self.ctx, ctx) {
            return Ok(self.clone());
        }
        if self.ctx.names != ctx.names {
            return Err(Error::Context("variable names differ".into()));
        }
        for e in self.terms.keys() {
            for (i, &k) in e.iter().enumerate() {
                if k < 0 && !ctx.is_invertible(i) {
                    return Err(Error::NotAUnit(format!(
                        "`{}` is not invertible in the target ring",
                        ctx.names[i]
                    )));
                }
            }
        }
        Ok(LaurentPoly {
            ctx: ctx.clone(),
            terms: self.terms.clone(),
        })
    }

    pub fn checked_add(&self, other: &LaurentPoly) -> Result<LaurentPoly> {
        let ctx = PolyCtx::join(&self.ctx, &other.ctx)?;
        let mut terms = self.terms.clone();
        for (e, c) in &other.terms {
            add_term(&mut terms, e.clone(), c);
        }
        Ok(LaurentPoly { ctx, terms })
    }

    pub fn checked_sub(&self, other: &LaurentPoly) -> Result<LaurentPoly> {
        self.checked_add(&-other)
    }

    pub fn checked_mul(&self, other: &LaurentPoly) -> Result<LaurentPoly> {
        let ctx = PolyCtx::join(&self.ctx, &other.ctx)?;
        let mut terms = BTreeMap::new();
        for (e1, c1) in &self.terms {
            for (e2, c2) in &other.terms {
                let e: Exponent = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                add_term(&mut terms, e, &(c1 * c2));
            }
        }
        Ok(LaurentPoly { ctx, terms })
    }

    pub fn scale(&self, c: &Rational) -> LaurentPoly {
        if c.is_zero() {
            return LaurentPoly::zero(&self.ctx);
        }
        LaurentPoly {
            ctx: self.ctx.clone(),
            terms: self.terms.iter().map(|(e, v)| (e.clone(), v * c)).collect(),
        }
    }

    /// Multiply by the monomial `x^e` (exponents unchecked against the context).
    pub fn shift(&self, e: &[i32]) -> LaurentPoly {
        LaurentPoly {
            ctx: self.ctx.clone(),
            terms: self
                .terms
                .iter()
                .map(|(k, v)| (k.iter().zip(e).map(|(a, b)| a + b).collect(), v.clone()))
                .collect(),
        }
    }

    /// Partial derivative in the `i`-th variable.
    pub fn derivative(&self, i: usize) -> LaurentPoly {
        let mut terms = BTreeMap::new();
        for (e, c) in &self.terms {
            if e[i] != 0 {
                let mut e2 = e.clone();
                e2[i] -= 1;
                add_term(&mut terms, e2, &(c * &Rational::from(e[i])));
            }
        }
        LaurentPoly {
            ctx: self.ctx.clone(),
            terms,
        }
    }

    /// Inverse of a monomial unit `c*x^e`, giving `c^-1 * x^-e`.
    pub fn unit_invert(&self) -> Result<LaurentPoly> {
        let (e, c) = self
            .as_monomial()
            .ok_or_else(|| Error::NotAUnit(format!("`{self}` is not a single term")))?;
        let inv: Exponent = e.iter().map(|k| -k).collect();
        LaurentPoly::monomial(&self.ctx, inv, c.recip()?)
    }

    /// Integer power; negative powers require a monomial unit.
    pub fn pow(&self, k: i32) -> Result<LaurentPoly> {
        let (base, n) = if k < 0 {
            (self.unit_invert()?, k.unsigned_abs())
        } else {
            (self.clone(), k as u32)
        };
        if let Some((e, c)) = base.as_monomial() {
            let e2: Exponent = e.iter().map(|v| v * n as i32).collect();
            let mut c2 = Rational::one();
            for _ in 0..n {
                c2 = c2 * c;
            }
            return Ok(LaurentPoly::monomial_unchecked(&base.ctx, e2, c2));
        }
        let mut acc = LaurentPoly::one(&base.ctx);
        for _ in 0..n {
            acc = &acc * &base;
        }
        Ok(acc)
    }

    pub fn max_abs_exponent(&self) -> i32 {
        self.terms
            .keys()
            .flat_map(|e| e.iter().map(|k| k.abs()))
            .max()
            .unwrap_or(0)
    }

    fn fmt_with(&self, odd: &str, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let items: Vec<(Rational, String)> = self
            .terms
            .iter()
            .map(|(e, c)| (c.clone(), monomial_factors(&self.ctx.names, e, odd)))
            .collect();
        write_sum(f, &items)
    }
}

fn add_term(terms: &mut BTreeMap<Exponent, Rational>, e: Exponent, c: &Rational) {
    if c.is_zero() {
        return;
    }
    match terms.entry(e) {
        std::collections::btree_map::Entry::Vacant(v) => {
            v.insert(c.clone());
        }
        std::collections::btree_map::Entry::Occupied(mut o) => {
            *o.get_mut() += c;
            if o.get().is_zero() {
                o.remove();
            }
        }
    }
}

/// `x1^-2*x2^3` style factor string, followed by extra factors if any.
pub(crate) fn monomial_factors(names: &[String], e: &[i32], extra: &str) -> String {
    let mut parts: Vec<String> = Vec::new();
    for (n, &k) in names.iter().zip(e) {
        match k {
            0 => {}
            1 => parts.push(n.clone()),
            _ => parts.push(format!("{n}^{k}")),
        }
    }
    if !extra.is_empty() {
        parts.push(extra.to_string());
    }
    parts.join("*")
}

/// Writes `c1*f1 + c2*f2 - c3*f3`; a bare coefficient when the factor is empty.
pub(crate) fn write_sum(f: &mut fmt::Formatter<'_>, items: &[(Rational, String)]) -> fmt::Result {
    if items.is_empty() {
        return write!(f, "0");
    }
    for (k, (c, factors)) in items.iter().enumerate() {
        let shown = if k == 0 {
            c.to_string()
        } else if c.is_negative() {
            write!(f, " - ")?;
            c.abs().to_string()
        } else {
            write!(f, " + ")?;
            c.to_string()
        };
        if factors.is_empty() {
            write!(f, "{shown}")?;
        } else {
            write!(f, "{shown}*{factors}")?;
        }
    }
    Ok(())
}

impl fmt::Display for LaurentPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_with("", f)
    }
}

impl Add for &LaurentPoly {
    type Output = LaurentPoly;
    fn add(self, rhs: &LaurentPoly) -> LaurentPoly {
        self.checked_add(rhs).expect("Laurent context mismatch")
    }
}

impl Sub for &LaurentPoly {
    type Output = LaurentPoly;
    fn sub(self, rhs: &LaurentPoly) -> LaurentPoly {
        self.checked_sub(rhs).expect("Laurent context mismatch")
    }
}

impl Mul for &LaurentPoly {
    type Output = LaurentPoly;
    fn mul(self, rhs: &LaurentPoly) -> LaurentPoly {
        self.checked_mul(rhs).expect("Laurent context mismatch")
    }
}

impl Neg for &LaurentPoly {
    type Output = LaurentPoly;
    fn neg(self) -> LaurentPoly {
        LaurentPoly {
            ctx: self.ctx.clone(),
            terms: self.terms.iter().map(|(e, c)| (e.clone(), -c)).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx1() -> Arc<PolyCtx> {
        PolyCtx::new(vec!["x".into()], &["x"]).unwrap()
    }

    #[test]
    fn rational_normalizes() {
        assert_eq!(Rational::new(2, -4).to_string(), "-1/2");
        assert_eq!(Rational::new(0, 5), Rational::zero());
        assert_eq!("6/4".parse::<Rational>().unwrap(), Rational::new(3, 2));
        assert!("1/0".parse::<Rational>().is_err());
    }

    #[test]
    fn difference_of_squares() {
        let c = ctx1();
        let x = LaurentPoly::var(&c, 0);
        let one = LaurentPoly::one(&c);
        let p = &(&x + &one) * &(&x - &one);
        assert_eq!(p.to_string(), "-1 + 1*x^2");
    }

    #[test]
    fn unit_law_and_normalization() {
        let c = ctx1();
        let x = LaurentPoly::var(&c, 0);
        let xinv = x.unit_invert().unwrap();
        assert_eq!(&xinv * &x, LaurentPoly::one(&c));
        let a = x.scale(&Rational::new(2, 3));
        let b = x.scale(&Rational::new(1, 3));
        assert_eq!(&a + &b, x);
    }

    #[test]
    fn unit_invert_cases() {
        let c = ctx1();
        let m = LaurentPoly::monomial(&c, vec![2], Rational::from(3)).unwrap();
        assert_eq!(m.unit_invert().unwrap().to_string(), "1/3*x^-2");
        let xinv = LaurentPoly::monomial(&c, vec![-1], Rational::one()).unwrap();
        assert_eq!(xinv.unit_invert().unwrap(), LaurentPoly::var(&c, 0));
        let two = &LaurentPoly::var(&c, 0) + &LaurentPoly::one(&c);
        assert!(matches!(two.unit_invert(), Err(Error::NotAUnit(_))));
    }

    #[test]
    fn non_invertible_variable_rejected() {
        let c = PolyCtx::new(vec!["x".into()], &[]).unwrap();
        assert!(LaurentPoly::monomial(&c, vec![-1], Rational::one()).is_err());
        assert!(LaurentPoly::var(&c, 0).unit_invert().is_err());
    }

    #[test]
    fn canonical_rendering() {
        let c = PolyCtx::new(vec!["x1".into(), "x2".into()], &["x1"]).unwrap();
        let m = LaurentPoly::monomial(&c, vec![-2, 3], Rational::new(-1, 2)).unwrap();
        assert_eq!(m.to_string(), "-1/2*x1^-2*x2^3");
    }

    #[test]
    fn context_mismatch() {
        let a = LaurentPoly::var(&ctx1(), 0);
        let c2 = PolyCtx::new(vec!["y".into()], &[]).unwrap();
        let b = LaurentPoly::var(&c2, 0);
        assert!(matches!(
            ring_arith(&a, &b, RingOp::Add),
            Err(Error::Context(_))
        ));
    }

    #[test]
    fn join_extends_invertibles() {
        let a = PolyCtx::new(vec!["u".into(), "v".into()], &["u"]).unwrap();
        let b = PolyCtx::new(vec!["u".into(), "v".into()], &["v"]).unwrap();
        let j = PolyCtx::join(&a, &b).unwrap();
        assert_eq!(j.invertible_mask(), 3);
    }
}
