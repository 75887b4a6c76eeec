//! The chart function algebra: a Grassmann algebra in q odd generators over
//! Laurent polynomials in the even coordinates.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Arc;

use crate::coeffring::{monomial_factors, write_sum, Exponent, LaurentPoly, PolyCtx, Rational};
use crate::error::{Error, Result};

/// Coordinate names of a chart, plus which even coordinates are invertible.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ChartSignature {
    chart: usize,
    odd: Vec<String>,
    ctx: Arc<PolyCtx>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn of_bit(odd: bool) -> Parity {
        if odd {
            Parity::Odd
        } else {
            Parity::Even
        }
    }

    pub fn is_odd(self) -> bool {
        self == Parity::Odd
    }

    pub fn add(self, other: Parity) -> Parity {
        Parity::of_bit(self.is_odd() ^ other.is_odd())
    }

    /// `(-1)^(self*other)` as a boolean "negate" flag.
    pub fn sign_with(self, other: Parity) -> bool {
        self.is_odd() && other.is_odd()
    }
}

fn valid_name(n: &str) -> bool {
    let mut chars = n.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic())
        && chars.all(|c| c.is_ascii_alphanumeric())
}

impl ChartSignature {
    pub fn new(
        chart: usize,
        even: &[&str],
        odd: &[&str],
        invertible: &[&str],
    ) -> Result<Arc<ChartSignature>> {
        let even: Vec<String> = even.iter().map(|s| s.to_string()).collect();
        let odd: Vec<String> = odd.iter().map(|s| s.to_string()).collect();
        ChartSignature::from_names(chart, even, odd, invertible)
    }

    pub fn from_names(
        chart: usize,
        even: Vec<String>,
        odd: Vec<String>,
        invertible: &[&str],
    ) -> Result<Arc<ChartSignature>> {
        if odd.len() > 30 {
            return Err(Error::InvalidArgument("at most 30 odd coordinates".into()));
        }
        let mut seen = std::collections::HashSet::new();
        for n in even.iter().chain(odd.iter()) {
            if !valid_name(n) {
                return Err(Error::InvalidArgument(format!("bad coordinate name `{n}`")));
            }
            if !seen.insert(n.clone()) {
                return Err(Error::InvalidArgument(format!(
                    "duplicate coordinate `{n}`"
                )));
            }
        }
        let ctx = PolyCtx::new(even, invertible)?;
        Ok(Arc::new(ChartSignature { chart, odd, ctx }))
    }

    pub fn chart(&self) -> usize {
        self.chart
    }

    pub fn p(&self) -> usize {
        self.ctx.nvars()
    }

    pub fn q(&self) -> usize {
        self.odd.len()
    }

    pub fn dim(&self) -> usize {
        self.p() + self.q()
    }

    pub fn even_names(&self) -> &[String] {
        self.ctx.names()
    }

    pub fn odd_names(&self) -> &[String] {
        &self.odd
    }

    /// Name of combined coordinate index `k` (evens first, then odds).
    pub fn coord_name(&self, k: usize) -> &str {
        if k < self.p() {
            &self.ctx.names()[k]
        } else {
            &self.odd[k - self.p()]
        }
    }

    pub fn coord_parity(&self, k: usize) -> Parity {
        Parity::of_bit(k >= self.p())
    }

    pub fn coord_index(&self, name: &str) -> Option<usize> {
        self.ctx.index_of(name).or_else(|| {
            self.odd
                .iter()
                .position(|n| n == name)
                .map(|j| j + self.p())
        })
    }

    pub fn ctx(&self) -> &Arc<PolyCtx> {
        &self.ctx
    }

    pub fn invertible_mask(&self) -> u64 {
        self.ctx.invertible_mask()
    }

    pub fn is_invertible(&self, i: usize) -> bool {
        self.ctx.is_invertible(i)
    }

    /// Same chart with additional invertible even coordinates.
    pub fn extended(self: &Arc<Self>, mask: u64) -> Arc<ChartSignature> {
        if self.invertible_mask() | mask == self.invertible_mask() {
            return self.clone();
        }
        Arc::new(ChartSignature {
            chart: self.chart,
            odd: self.odd.clone(),
            ctx: self.ctx.extended(mask),
        })
    }

    /// The chart ring without any invertible variables.
    pub fn without_invertibles(&self) -> Arc<ChartSignature> {
        Arc::new(ChartSignature {
            chart: self.chart,
            odd: self.odd.clone(),
            ctx: PolyCtx::with_mask(self.ctx.names().to_vec(), 0),
        })
    }

    /// Same names, different chart id.
    pub fn with_chart(&self, chart: usize) -> Arc<ChartSignature> {
        Arc::new(ChartSignature {
            chart,
            odd: self.odd.clone(),
            ctx: self.ctx.clone(),
        })
    }

    /// The reduced chart: even coordinates only.
    pub fn reduced(&self) -> Arc<ChartSignature> {
        Arc::new(ChartSignature {
            chart: self.chart,
            odd: Vec::new(),
            ctx: self.ctx.clone(),
        })
    }

    pub fn same_chart(&self, other: &ChartSignature) -> bool {
        self.chart == other.chart && self.odd == other.odd && self.ctx.names() == other.ctx.names()
    }

    pub fn join(a: &Arc<ChartSignature>, b: &Arc<ChartSignature>) -> Result<Arc<ChartSignature>> {
        if Arc::ptr_eq(a, b) {
            return Ok(a.clone());
        }
        if !a.same_chart(b) {
            return Err(Error::ChartMismatch(format!(
                "chart {} ({}) vs chart {} ({})",
                a.chart,
                a.describe(),
                b.chart,
                b.describe()
            )));
        }
        Ok(a.extended(b.invertible_mask()))
    }

    pub fn describe(&self) -> String {
        format!("{}|{}", self.even_names().join(","), self.odd.join(","))
    }
}

/// Sign of `θ_a θ_b = ±θ_{a∪b}`; `None` when the subsets overlap.
pub(crate) fn merge_sign(a: u32, b: u32) -> Option<bool> {
    if a & b != 0 {
        return None;
    }
    let mut neg = false;
    let mut bb = b;
    while bb != 0 {
        let j = bb.trailing_zeros();
        bb &= bb - 1;
        if (a >> (j + 1)).count_ones() % 2 == 1 {
            neg = !neg;
        }
    }
    Some(neg)
}

pub(crate) fn mask_indices(mask: u32) -> Vec<usize> {
    (0..32).filter(|j| mask >> j & 1 == 1).collect()
}

/// Element of the chart algebra: odd-subset mask to Laurent coefficient.
#[derive(Clone, Debug)]
pub struct SuperElement {
    sig: Arc<ChartSignature>,
    terms: BTreeMap<u32, LaurentPoly>,
}

impl PartialEq for SuperElement {
    fn eq(&self, other: &Self) -> bool {
        self.sig.same_chart(&other.sig) && self.terms == other.terms
    }
}

impl Eq for SuperElement {}

impl SuperElement {
    pub fn zero(sig: &Arc<ChartSignature>) -> SuperElement {
        SuperElement {
            sig: sig.clone(),
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(sig: &Arc<ChartSignature>, c: Rational) -> SuperElement {
        SuperElement::from_poly(sig, 0, LaurentPoly::constant(sig.ctx(), c))
    }

    pub fn one(sig: &Arc<ChartSignature>) -> SuperElement {
        SuperElement::constant(sig, Rational::one())
    }

    /// Coefficient `f` times `θ_mask`. The ring widens to admit the
    /// invertibles of `f`; panics if `f` uses other variable names.
    pub fn from_poly(sig: &Arc<ChartSignature>, mask: u32, f: LaurentPoly) -> SuperElement {
        assert_eq!(f.ctx().names(), sig.even_names(), "coefficient variables");
        let sig = sig.extended(f.ctx().invertible_mask());
        let mut terms = BTreeMap::new();
        if !f.is_zero() {
            terms.insert(mask, f.with_ctx(sig.ctx()).expect("widened ring"));
        }
        SuperElement { sig, terms }
    }

    /// `c * x^e * θ_mask`.
    pub fn monomial(
        sig: &Arc<ChartSignature>,
        mask: u32,
        e: Exponent,
        c: Rational,
    ) -> Result<SuperElement> {
        if mask >> sig.q() != 0 {
            return Err(Error::InvalidArgument("odd index out of range".into()));
        }
        let f = LaurentPoly::monomial(sig.ctx(), e, c)?;
        Ok(SuperElement::from_poly(sig, mask, f))
    }

    /// The combined coordinate `k` as a function.
    pub fn coordinate(sig: &Arc<ChartSignature>, k: usize) -> SuperElement {
        if k < sig.p() {
            SuperElement::from_poly(sig, 0, LaurentPoly::var(sig.ctx(), k))
        } else {
            SuperElement::from_poly(sig, 1 << (k - sig.p()), LaurentPoly::one(sig.ctx()))
        }
    }

    /// All coordinates in order: the identity substitution.
    pub fn coordinates(sig: &Arc<ChartSignature>) -> Vec<SuperElement> {
        (0..sig.dim())
            .map(|k| SuperElement::coordinate(sig, k))
            .collect()
    }

    pub fn sig(&self) -> &Arc<ChartSignature> {
        &self.sig
    }

    pub fn terms(&self) -> &BTreeMap<u32, LaurentPoly> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, mask: u32) -> LaurentPoly {
        self.terms
            .get(&mask)
            .cloned()
            .unwrap_or_else(|| LaurentPoly::zero(self.sig.ctx()))
    }

    /// The θ-free part.
    pub fn body(&self) -> LaurentPoly {
        self.coefficient(0)
    }

    pub fn body_element(&self) -> SuperElement {
        self.graded_part(0)
    }

    /// `Some(parity)` for homogeneous elements (zero counts as even).
    pub fn parity(&self) -> Option<Parity> {
        let mut seen: Option<Parity> = None;
        for m in self.terms.keys() {
            let p = Parity::of_bit(m.count_ones() % 2 == 1);
            match seen {
                None => seen = Some(p),
                Some(s) if s != p => return None,
                _ => {}
            }
        }
        Some(seen.unwrap_or(Parity::Even))
    }

    pub fn is_even(&self) -> bool {
        self.terms.keys().all(|m| m.count_ones() % 2 == 0)
    }

    pub fn is_odd(&self) -> bool {
        self.terms.keys().all(|m| m.count_ones() % 2 == 1)
    }

    pub fn parity_part(&self, p: Parity) -> SuperElement {
        self.filter(|m| (m.count_ones() % 2 == 1) == p.is_odd())
    }

    fn filter(&self, keep: impl Fn(u32) -> bool) -> SuperElement {
        SuperElement {
            sig: self.sig.clone(),
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| keep(**m))
                .map(|(m, f)| (*m, f.clone()))
                .collect(),
        }
    }

    fn sync_ctx(&mut self) {
        let ctx = self.sig.ctx().clone();
        for f in self.terms.values_mut() {
            if !Arc::ptr_eq(f.ctx(), &ctx) {
                *f = f.with_ctx(&ctx).expect("context sync");
            }
        }
    }

    /// Re-express in a wider ring of the same chart.
    pub fn with_sig(&self, sig: &Arc<ChartSignature>) -> Result<SuperElement> {
        if !self.sig.same_chart(sig) {
            return Err(Error::ChartMismatch(format!(
                "{} vs {}",
                self.sig.describe(),
                sig.describe()
            )));
        }
        let mut terms = BTreeMap::new();
        for (m, f) in &self.terms {
            terms.insert(*m, f.with_ctx(sig.ctx())?);
        }
        Ok(SuperElement {
            sig: sig.clone(),
            terms,
        })
    }

    pub fn extended(&self, mask: u64) -> SuperElement {
        let sig = self.sig.extended(mask);
        self.with_sig(&sig).expect("extension keeps legality")
    }

    pub fn checked_add(&self, other: &SuperElement) -> Result<SuperElement> {
        let sig = ChartSignature::join(&self.sig, &other.sig)?;
        let mut terms = self.terms.clone();
        for (m, f) in &other.terms {
            let v = match terms.get(m) {
                Some(g) => g.checked_add(f)?,
                None => f.clone(),
            };
            if v.is_zero() {
                terms.remove(m);
            } else {
                terms.insert(*m, v);
            }
        }
        let mut out = SuperElement { sig, terms };
        out.sync_ctx();
        Ok(out)
    }

    pub fn checked_sub(&self, other: &SuperElement) -> Result<SuperElement> {
        self.checked_add(&other.neg())
    }

    /// Supercommutative product.
    pub fn super_mul(&self, other: &SuperElement) -> Result<SuperElement> {
        let sig = ChartSignature::join(&self.sig, &other.sig)?;
        let mut terms: BTreeMap<u32, LaurentPoly> = BTreeMap::new();
        for (a, f) in &self.terms {
            for (b, g) in &other.terms {
                let Some(neg) = merge_sign(*a, *b) else {
                    continue;
                };
                let mut prod = f.checked_mul(g)?;
                if neg {
                    prod = -&prod;
                }
                let key = a | b;
                let v = match terms.get(&key) {
                    Some(h) => h.checked_add(&prod)?,
                    None => prod,
                };
                if v.is_zero() {
                    terms.remove(&key);
                } else {
                    terms.insert(key, v);
                }
            }
        }
        let mut out = SuperElement { sig, terms };
        out.sync_ctx();
        Ok(out)
    }

    pub fn neg(&self) -> SuperElement {
        SuperElement {
            sig: self.sig.clone(),
            terms: self.terms.iter().map(|(m, f)| (*m, -f)).collect(),
        }
    }

    pub fn scale(&self, c: &Rational) -> SuperElement {
        if c.is_zero() {
            return SuperElement::zero(&self.sig);
        }
        SuperElement {
            sig: self.sig.clone(),
            terms: self.terms.iter().map(|(m, f)| (*m, f.scale(c))).collect(),
        }
    }

    /// Multiply by an even θ-free coefficient.
    pub fn mul_poly(&self, g: &LaurentPoly) -> Result<SuperElement> {
        self.super_mul(&SuperElement::from_poly(&self.sig, 0, g.clone()))
    }

    /// Inverse of an even element whose body is a monomial unit.
    pub fn invert(&self) -> Result<SuperElement> {
        if !self.is_even() {
            return Err(Error::Parity("only even elements can be inverted".into()));
        }
        let binv = self.body().unit_invert()?;
        let binv = SuperElement::from_poly(&self.sig, 0, binv);
        let n = self
            .super_mul(&binv)?
            .checked_sub(&SuperElement::one(&self.sig))?;
        let negn = n.neg();
        let mut sum = SuperElement::one(&self.sig);
        let mut power = SuperElement::one(&self.sig);
        for _ in 0..self.sig.q() / 2 {
            power = power.super_mul(&negn)?;
            if power.is_zero() {
                break;
            }
            sum = sum.checked_add(&power)?;
        }
        binv.super_mul(&sum)
    }

    /// Integer power; negative powers go through [`SuperElement::invert`].
    pub fn pow(&self, k: i32) -> Result<SuperElement> {
        let base = if k < 0 { self.invert()? } else { self.clone() };
        let mut acc = SuperElement::one(&self.sig);
        for _ in 0..k.unsigned_abs() {
            acc = acc.super_mul(&base)?;
        }
        Ok(acc)
    }

    /// Derivative in the `i`-th even coordinate.
    pub fn d_even(&self, i: usize) -> SuperElement {
        let mut terms = BTreeMap::new();
        for (m, f) in &self.terms {
            let d = f.derivative(i);
            if !d.is_zero() {
                terms.insert(*m, d);
            }
        }
        SuperElement {
            sig: self.sig.clone(),
            terms,
        }
    }

    /// Left derivative in the `j`-th odd coordinate.
    pub fn d_odd(&self, j: usize) -> SuperElement {
        let mut terms = BTreeMap::new();
        for (m, f) in &self.terms {
            if m >> j & 1 == 1 {
                let below = (m & ((1u32 << j) - 1)).count_ones();
                let g = if below % 2 == 1 { -f } else { f.clone() };
                terms.insert(m & !(1 << j), g);
            }
        }
        SuperElement {
            sig: self.sig.clone(),
            terms,
        }
    }

    /// Derivative in combined coordinate `k`.
    pub fn d_coord(&self, k: usize) -> SuperElement {
        if k < self.sig.p() {
            self.d_even(k)
        } else {
            self.d_odd(k - self.sig.p())
        }
    }

    pub fn partial_derivative(&self, coord: &str) -> Result<SuperElement> {
        let k = self
            .sig
            .coord_index(coord)
            .ok_or_else(|| Error::UnknownCoordinate(coord.to_string()))?;
        Ok(self.d_coord(k))
    }

    /// Algebra-homomorphic evaluation with `images[k]` replacing coordinate `k`.
    /// The result lives in the join of the images' rings.
    pub fn substitute(&self, images: &[SuperElement]) -> Result<SuperElement> {
        let target = match images.first() {
            Some(first) => {
                let mut t = first.sig.clone();
                for im in &images[1..] {
                    t = ChartSignature::join(&t, &im.sig)?;
                }
                t
            }
            None => self.sig.clone(),
        };
        self.substitute_into(images, &target)
    }

    /// As [`SuperElement::substitute`] with an explicit target ring.
    pub fn substitute_into(
        &self,
        images: &[SuperElement],
        target: &Arc<ChartSignature>,
    ) -> Result<SuperElement> {
        let p = self.sig.p();
        let q = self.sig.q();
        if images.len() != p + q {
            return Err(Error::InvalidArgument(format!(
                "substitution needs {} images, got {}",
                p + q,
                images.len()
            )));
        }
        let images: Vec<SuperElement> = images
            .iter()
            .map(|im| im.with_sig(target))
            .collect::<Result<_>>()?;
        for (k, im) in images.iter().enumerate() {
            let ok = if k < p { im.is_even() } else { im.is_odd() };
            if !ok {
                return Err(Error::Parity(format!(
                    "image of `{}` has the wrong parity",
                    self.sig.coord_name(k)
                )));
            }
        }
        let mut powers: HashMap<(usize, i32), SuperElement> = HashMap::new();
        let mut inverses: HashMap<usize, SuperElement> = HashMap::new();
        let mut out = SuperElement::zero(target);
        for (mask, f) in &self.terms {
            let mut odd_part = SuperElement::one(target);
            for j in mask_indices(*mask) {
                odd_part = odd_part.super_mul(&images[p + j])?;
            }
            if odd_part.is_zero() {
                continue;
            }
            let mut even_sum = SuperElement::zero(target);
            for (e, c) in f.terms() {
                let mut term = SuperElement::constant(target, c.clone());
                for (i, &k) in e.iter().enumerate() {
                    if k == 0 {
                        continue;
                    }
                    let pw = power_of(&images[i], i, k, &mut powers, &mut inverses)?;
                    term = term.super_mul(&pw)?;
                }
                even_sum = even_sum.checked_add(&term)?;
            }
            out = out.checked_add(&even_sum.super_mul(&odd_part)?)?;
        }
        Ok(out)
    }

    /// Lowest θ-degree present.
    pub fn degree(&self) -> Result<usize> {
        self.terms
            .keys()
            .map(|m| m.count_ones() as usize)
            .min()
            .ok_or(Error::ZeroInput)
    }

    /// Terms with exactly `m` odd factors.
    pub fn graded_part(&self, m: usize) -> SuperElement {
        self.filter(|k| k.count_ones() as usize == m)
    }

    /// Terms with fewer than `m` odd factors (reduction mod J^m).
    pub fn truncate(&self, m: usize) -> SuperElement {
        self.filter(|k| (k.count_ones() as usize) < m)
    }

    pub fn jadic_data(&self) -> Result<(usize, BTreeMap<usize, SuperElement>)> {
        let degree = self.degree()?;
        let mut parts = BTreeMap::new();
        for m in self.terms.keys().map(|k| k.count_ones() as usize) {
            parts.entry(m).or_insert_with(|| self.graded_part(m));
        }
        Ok((degree, parts))
    }

    /// Initial form: the graded part of lowest degree.
    pub fn initial_form(&self) -> Result<SuperElement> {
        Ok(self.graded_part(self.degree()?))
    }

    /// Set all odd coordinates to zero, returning an element of the reduced chart.
    pub fn reduce(&self) -> SuperElement {
        let sig = self.sig.reduced();
        SuperElement::from_poly(&sig, 0, self.body())
    }

    /// Reinterpret an element of a chart without odd coordinates inside `sig`.
    pub fn lift_body(f: &LaurentPoly, sig: &Arc<ChartSignature>) -> SuperElement {
        SuperElement::from_poly(sig, 0, f.clone())
    }

    /// Canonical rendering items: `(coefficient, factor string)`.
    pub(crate) fn render_items(&self, suffix: &str) -> Vec<(Rational, String)> {
        let mut rows: Vec<(Vec<usize>, &Exponent, &Rational)> = Vec::new();
        for (m, f) in &self.terms {
            for (e, c) in f.terms() {
                rows.push((mask_indices(*m), e, c));
            }
        }
        rows.sort();
        rows.into_iter()
            .map(|(idx, e, c)| {
                let mut odd: Vec<String> = idx.iter().map(|j| self.sig.odd[*j].clone()).collect();
                if !suffix.is_empty() {
                    odd.push(suffix.to_string());
                }
                (
                    c.clone(),
                    monomial_factors(self.sig.even_names(), e, &odd.join("*")),
                )
            })
            .collect()
    }
}

fn power_of(
    base: &SuperElement,
    i: usize,
    k: i32,
    powers: &mut HashMap<(usize, i32), SuperElement>,
    inverses: &mut HashMap<usize, SuperElement>,
) -> Result<SuperElement> {
    if let Some(v) = powers.get(&(i, k)) {
        return Ok(v.clone());
    }
    let v = if k < 0 {
        let inv = match inverses.get(&i) {
            Some(v) => v.clone(),
            None => {
                let v = base.invert()?;
                inverses.insert(i, v.clone());
                v
            }
        };
        if k == -1 {
            inv
        } else {
            power_of(base, i, k + 1, powers, inverses)?.super_mul(&inv)?
        }
    } else if k == 1 {
        base.clone()
    } else {
        power_of(base, i, k - 1, powers, inverses)?.super_mul(base)?
    };
    powers.insert((i, k), v.clone());
    Ok(v)
}

impl fmt::Display for SuperElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_sum(f, &self.render_items(""))
    }
}

impl std::ops::Add for &SuperElement {
    type Output = SuperElement;
    fn add(self, rhs: &SuperElement) -> SuperElement {
        self.checked_add(rhs).expect("chart mismatch in addition")
    }
}

impl std::ops::Sub for &SuperElement {
    type Output = SuperElement;
    fn sub(self, rhs: &SuperElement) -> SuperElement {
        self.checked_sub(rhs)
            .expect("chart mismatch in subtraction")
    }
}

impl std::ops::Mul for &SuperElement {
    type Output = SuperElement;
    fn mul(self, rhs: &SuperElement) -> SuperElement {
        self.super_mul(rhs).expect("chart mismatch in product")
    }
}

impl std::ops::Neg for &SuperElement {
    type Output = SuperElement;
    fn neg(self) -> SuperElement {
        SuperElement::neg(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sig() -> Arc<ChartSignature> {
        ChartSignature::new(0, &["x"], &["t1", "t2"], &["x"]).unwrap()
    }

    fn mono(s: &Arc<ChartSignature>, mask: u32, e: i32, c: i64) -> SuperElement {
        SuperElement::monomial(s, mask, vec![e], Rational::from(c)).unwrap()
    }

    #[test]
    fn antisymmetry_and_nilpotency() {
        let s = sig();
        let t1 = SuperElement::coordinate(&s, 1);
        let t2 = SuperElement::coordinate(&s, 2);
        assert_eq!(&t2 * &t1, (&t1 * &t2).neg());
        assert!((&t1 * &t1).is_zero());
        let one = SuperElement::one(&s);
        let tt = &t1 * &t2;
        assert_eq!(&(&one + &tt) * &(&one - &tt), one);
        let x = SuperElement::coordinate(&s, 0);
        let xt = &x + &t1;
        assert_eq!((&xt * &xt).to_string(), "1*x^2 + 2*x*t1");
    }

    #[test]
    fn inversion_examples() {
        let s = sig();
        let one = SuperElement::one(&s);
        let tt = mono(&s, 3, 0, 1);
        assert_eq!((&one + &tt).invert().unwrap(), &one - &tt);
        let x = SuperElement::coordinate(&s, 0);
        let inv = (&x + &tt).invert().unwrap();
        assert_eq!(inv, &mono(&s, 0, -1, 1) - &mono(&s, 3, -2, 1));
        assert!(matches!(
            SuperElement::coordinate(&s, 1).invert(),
            Err(Error::Parity(_))
        ));
    }

    #[test]
    fn left_derivative_signs() {
        let s = sig();
        let tt = mono(&s, 3, 0, 1);
        assert_eq!(
            tt.partial_derivative("t1").unwrap(),
            SuperElement::coordinate(&s, 2)
        );
        assert_eq!(
            tt.partial_derivative("t2").unwrap(),
            SuperElement::coordinate(&s, 1).neg()
        );
        let f = mono(&s, 1, 2, 1);
        assert_eq!(f.partial_derivative("x").unwrap(), mono(&s, 1, 1, 2));
        assert!(f.partial_derivative("z").is_err());
    }

    #[test]
    fn substitution_examples() {
        let s0 = sig();
        let s1 = ChartSignature::new(1, &["y"], &["eta1", "eta2"], &["y"]).unwrap();
        let y = SuperElement::coordinate(&s1, 0);
        let eta1 = SuperElement::coordinate(&s1, 1);
        let split = vec![
            mono(&s0, 0, -1, 1),
            mono(&s0, 1, -2, 1),
            mono(&s0, 2, -2, 1),
        ];
        assert_eq!(
            (&y * &eta1).substitute(&split).unwrap(),
            mono(&s0, 1, -3, 1)
        );
        let ns = vec![
            &mono(&s0, 0, -1, 1) + &mono(&s0, 3, -3, 1),
            mono(&s0, 1, -2, 1),
            mono(&s0, 2, -2, 1),
        ];
        assert_eq!(y.substitute(&ns).unwrap(), ns[0]);
        let yinv = y.pow(-1).unwrap().substitute(&ns).unwrap();
        assert_eq!(yinv, &mono(&s0, 0, 1, 1) - &mono(&s0, 3, -1, 1));
        assert_eq!(&yinv * &ns[0], SuperElement::one(&s0));
    }

    #[test]
    fn substitution_parity_checked() {
        let s = sig();
        let mut images = SuperElement::coordinates(&s);
        images[1] = SuperElement::coordinate(&s, 0);
        let f = SuperElement::coordinate(&s, 1);
        assert!(matches!(f.substitute(&images), Err(Error::Parity(_))));
    }

    #[test]
    fn identity_substitution() {
        let s = sig();
        let f = &mono(&s, 3, -2, 5) + &mono(&s, 0, 4, -1);
        assert_eq!(f.substitute(&SuperElement::coordinates(&s)).unwrap(), f);
    }

    #[test]
    fn jadic_examples() {
        let s = sig();
        let x = SuperElement::coordinate(&s, 0);
        let tt = mono(&s, 3, 0, 1);
        let (d, parts) = (&x + &tt).jadic_data().unwrap();
        assert_eq!(d, 0);
        assert_eq!(parts[&0], x);
        let f = mono(&s, 3, -3, 1);
        assert_eq!(f.jadic_data().unwrap().0, 2);
        let t1 = SuperElement::coordinate(&s, 1);
        let (d, parts) = (&t1 + &tt).jadic_data().unwrap();
        assert_eq!(d, 1);
        assert_eq!(parts[&1], t1);
        assert_eq!(parts[&2], tt);
        assert!(matches!(
            SuperElement::zero(&s).jadic_data(),
            Err(Error::ZeroInput)
        ));
    }

    #[test]
    fn rendering() {
        let s = sig();
        assert_eq!(mono(&s, 3, -1, -1).to_string(), "-1*x^-1*t1*t2");
        assert_eq!(SuperElement::zero(&s).to_string(), "0");
    }
}
