//! Super vector fields on a chart: action on functions, graded bracket,
//! pushforward across transitions and the J-adic filtration.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::atlas::{Atlas, TransitionMap};
use crate::coeffring::{write_sum, Rational};
use crate::error::{Error, Result};
use crate::grassmann::{ChartSignature, Parity, SuperElement};

/// `Σ a^μ ∂/∂x_μ + Σ b^j ∂/∂θ_j`, stored as one component per coordinate
/// (evens first).
#[derive(Clone, Debug)]
pub struct VectorField {
    sig: Arc<ChartSignature>,
    comps: Vec<SuperElement>,
}

impl PartialEq for VectorField {
    fn eq(&self, other: &Self) -> bool {
        self.sig.same_chart(&other.sig) && self.comps == other.comps
    }
}

impl Eq for VectorField {}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldKind {
    Euler,
    DeRham,
}

/// Filtration degree and graded pieces of a vector field.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FilterData {
    pub degree: i32,
    pub graded_parts: BTreeMap<i32, VectorField>,
    pub algebraic_flags: BTreeMap<i32, bool>,
}

impl FilterData {
    pub fn initial_form(&self) -> &VectorField {
        &self.graded_parts[&self.degree]
    }
}

impl VectorField {
    pub fn new(sig: &Arc<ChartSignature>, comps: Vec<SuperElement>) -> Result<VectorField> {
        if comps.len() != sig.dim() {
            return Err(Error::InvalidArgument(format!(
                "vector field needs {} components, got {}",
                sig.dim(),
                comps.len()
            )));
        }
        let mut ring = sig.clone();
        for c in &comps {
            ring = ChartSignature::join(&ring, c.sig())?;
        }
        let comps = comps
            .iter()
            .map(|c| c.with_sig(&ring))
            .collect::<Result<_>>()?;
        Ok(VectorField { sig: ring, comps })
    }

    pub fn from_parts(
        sig: &Arc<ChartSignature>,
        even: Vec<SuperElement>,
        odd: Vec<SuperElement>,
    ) -> Result<VectorField> {
        let mut comps = even;
        comps.extend(odd);
        VectorField::new(sig, comps)
    }

    pub fn zero(sig: &Arc<ChartSignature>) -> VectorField {
        VectorField {
            sig: sig.clone(),
            comps: vec![SuperElement::zero(sig); sig.dim()],
        }
    }

    /// The coordinate derivation `∂/∂z_k`.
    pub fn partial(sig: &Arc<ChartSignature>, k: usize) -> VectorField {
        let mut v = VectorField::zero(sig);
        v.comps[k] = SuperElement::one(sig);
        v
    }

    /// `f ∂/∂z_k`.
    pub fn single(sig: &Arc<ChartSignature>, k: usize, f: SuperElement) -> Result<VectorField> {
        let mut comps = vec![SuperElement::zero(sig); sig.dim()];
        comps[k] = f;
        VectorField::new(sig, comps)
    }

    pub fn sig(&self) -> &Arc<ChartSignature> {
        &self.sig
    }

    pub fn chart(&self) -> usize {
        self.sig.chart()
    }

    pub fn components(&self) -> &[SuperElement] {
        &self.comps
    }

    pub fn component(&self, k: usize) -> &SuperElement {
        &self.comps[k]
    }

    pub fn even_components(&self) -> &[SuperElement] {
        &self.comps[..self.sig.p()]
    }

    pub fn odd_components(&self) -> &[SuperElement] {
        &self.comps[self.sig.p()..]
    }

    pub fn is_zero(&self) -> bool {
        self.comps.iter().all(|c| c.is_zero())
    }

    /// Parity part: even fields have even coefficients on ∂x and odd ones on ∂θ.
    pub fn parity_part(&self, p: Parity) -> VectorField {
        let comps = self
            .comps
            .iter()
            .enumerate()
            .map(|(k, c)| c.parity_part(p.add(self.sig.coord_parity(k))))
            .collect();
        VectorField {
            sig: self.sig.clone(),
            comps,
        }
    }

    /// `Some(parity)` for homogeneous fields (zero counts as even).
    pub fn parity(&self) -> Option<Parity> {
        let even = !self.parity_part(Parity::Even).is_zero();
        let odd = !self.parity_part(Parity::Odd).is_zero();
        match (even, odd) {
            (true, true) => None,
            (false, true) => Some(Parity::Odd),
            _ => Some(Parity::Even),
        }
    }

    fn homogeneous_parts(&self) -> Vec<(Parity, VectorField)> {
        [Parity::Even, Parity::Odd]
            .into_iter()
            .map(|p| (p, self.parity_part(p)))
            .filter(|(_, v)| !v.is_zero())
            .collect()
    }

    pub fn with_sig(&self, sig: &Arc<ChartSignature>) -> Result<VectorField> {
        let comps = self
            .comps
            .iter()
            .map(|c| c.with_sig(sig))
            .collect::<Result<_>>()?;
        Ok(VectorField {
            sig: sig.clone(),
            comps,
        })
    }

    fn zip(
        &self,
        other: &VectorField,
        f: impl Fn(&SuperElement, &SuperElement) -> Result<SuperElement>,
    ) -> Result<VectorField> {
        let ring = ChartSignature::join(&self.sig, &other.sig)?;
        let comps = self
            .comps
            .iter()
            .zip(other.comps.iter())
            .map(|(a, b)| f(a, b))
            .collect::<Result<Vec<_>>>()?;
        VectorField::new(&ring, comps)
    }

    pub fn checked_add(&self, other: &VectorField) -> Result<VectorField> {
        self.zip(other, |a, b| a.checked_add(b))
    }

    pub fn checked_sub(&self, other: &VectorField) -> Result<VectorField> {
        self.zip(other, |a, b| a.checked_sub(b))
    }

    pub fn neg(&self) -> VectorField {
        VectorField {
            sig: self.sig.clone(),
            comps: self.comps.iter().map(|c| c.neg()).collect(),
        }
    }

    pub fn scale(&self, c: &Rational) -> VectorField {
        VectorField {
            sig: self.sig.clone(),
            comps: self.comps.iter().map(|v| v.scale(c)).collect(),
        }
    }

    /// Left multiplication `f · v`.
    pub fn mul_function(&self, f: &SuperElement) -> Result<VectorField> {
        let comps = self
            .comps
            .iter()
            .map(|c| f.super_mul(c))
            .collect::<Result<Vec<_>>>()?;
        let ring = ChartSignature::join(&self.sig, f.sig())?;
        VectorField::new(&ring, comps)
    }

    /// Action on a function: `Σ v^Z ∂f/∂z_Z`.
    pub fn apply(&self, f: &SuperElement) -> Result<SuperElement> {
        if !self.sig.same_chart(f.sig()) {
            return Err(Error::ChartMismatch(format!(
                "field on chart {} applied to a function on chart {}",
                self.sig.chart(),
                f.sig().chart()
            )));
        }
        let ring = ChartSignature::join(&self.sig, f.sig())?;
        let mut acc = SuperElement::zero(&ring);
        for (k, c) in self.comps.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let d = f.d_coord(k);
            if d.is_zero() {
                continue;
            }
            acc = acc.checked_add(&c.super_mul(&d)?)?;
        }
        Ok(acc)
    }

    /// Graded bracket, computed on parity parts.
    pub fn bracket(&self, other: &VectorField) -> Result<VectorField> {
        let ring = ChartSignature::join(&self.sig, &other.sig)?;
        let mut acc = VectorField::zero(&ring);
        for (pu, u) in self.homogeneous_parts() {
            for (pv, v) in other.homogeneous_parts() {
                let neg = pu.sign_with(pv);
                let mut comps = Vec::with_capacity(ring.dim());
                for k in 0..ring.dim() {
                    let a = u.apply(&v.comps[k])?;
                    let b = v.apply(&u.comps[k])?;
                    comps.push(if neg {
                        a.checked_add(&b)?
                    } else {
                        a.checked_sub(&b)?
                    });
                }
                acc = acc.checked_add(&VectorField::new(&ring, comps)?)?;
            }
        }
        Ok(acc)
    }

    /// Filtration degree of each coordinate slot for a θ-degree.
    fn slot_degree(&self, k: usize, theta_degree: usize) -> i32 {
        theta_degree as i32 - if k >= self.sig.p() { 1 } else { 0 }
    }

    /// The homogeneous piece of filtration degree `m`.
    pub fn graded_part(&self, m: i32) -> VectorField {
        let comps = self
            .comps
            .iter()
            .enumerate()
            .map(|(k, c)| {
                let td = m + if k >= self.sig.p() { 1 } else { 0 };
                if td < 0 {
                    SuperElement::zero(&self.sig)
                } else {
                    c.graded_part(td as usize)
                }
            })
            .collect();
        VectorField {
            sig: self.sig.clone(),
            comps,
        }
    }

    /// Lowest filtration degree present (None for the zero field).
    pub fn degree(&self) -> Option<i32> {
        self.comps
            .iter()
            .enumerate()
            .filter_map(|(k, c)| c.degree().ok().map(|d| self.slot_degree(k, d)))
            .min()
    }

    /// Whether the field lies in `T^(m)`.
    pub fn in_filtration(&self, m: i32) -> bool {
        self.degree().map_or(true, |d| d >= m)
    }

    pub fn filtration_data(&self) -> Result<FilterData> {
        let degree = self.degree().ok_or(Error::ZeroInput)?;
        let mut graded_parts = BTreeMap::new();
        let mut algebraic_flags = BTreeMap::new();
        for (k, c) in self.comps.iter().enumerate() {
            for mask in c.terms().keys() {
                let m = self.slot_degree(k, mask.count_ones() as usize);
                if !graded_parts.contains_key(&m) {
                    let part = self.graded_part(m);
                    algebraic_flags.insert(m, part.even_components().iter().all(|c| c.is_zero()));
                    graded_parts.insert(m, part);
                }
            }
        }
        Ok(FilterData {
            degree,
            graded_parts,
            algebraic_flags,
        })
    }

    /// Drop the ∂θ components.
    pub fn even_block(&self) -> VectorField {
        let mut v = self.clone();
        let p = self.sig.p();
        for c in v.comps[p..].iter_mut() {
            *c = SuperElement::zero(&self.sig);
        }
        v
    }

    /// Apply a coordinate substitution to every component.
    pub fn map_components(
        &self,
        f: impl Fn(&SuperElement) -> Result<SuperElement>,
    ) -> Result<VectorField> {
        let comps = self.comps.iter().map(f).collect::<Result<Vec<_>>>()?;
        let mut ring = self.sig.clone();
        for c in &comps {
            ring = ChartSignature::join(&ring, c.sig())?;
        }
        VectorField::new(&ring, comps)
    }
}

/// Move a field from the target chart of `t` to its source chart:
/// component on `z_A` is `(v ψ_A) ∘ φ`, where `ψ = inverse`.
pub fn pushforward(
    v: &VectorField,
    t: &TransitionMap,
    inverse: &TransitionMap,
) -> Result<VectorField> {
    if !v.sig().same_chart(t.target_sig()) {
        return Err(Error::ChartMismatch(format!(
            "field on chart {} pushed through {}->{}",
            v.chart(),
            t.source(),
            t.target()
        )));
    }
    let mut comps = Vec::with_capacity(inverse.images().len());
    for psi in inverse.images() {
        comps.push(t.pull(&v.apply(psi)?)?);
    }
    let mut ring = t.source_sig().clone();
    for c in &comps {
        ring = ChartSignature::join(&ring, c.sig())?;
    }
    VectorField::new(&ring, comps)
}

impl Atlas {
    /// Express a field living on chart `from` in chart `to`.
    pub fn push_field(&self, v: &VectorField, from: usize, to: usize) -> Result<VectorField> {
        if from == to {
            return Ok(v.clone());
        }
        pushforward(v, self.transition(to, from)?, self.transition(from, to)?)
    }

    /// Express a function living on chart `from` in chart `to`.
    pub fn pull_function(&self, f: &SuperElement, from: usize, to: usize) -> Result<SuperElement> {
        if from == to {
            return Ok(f.clone());
        }
        self.transition(to, from)?.pull(f)
    }
}

/// The Euler field `Σ θ_j ∂/∂θ_j` or the de Rham field `Σ θ_μ ∂/∂x_μ`.
pub fn canonical_field(sig: &Arc<ChartSignature>, kind: FieldKind) -> Result<VectorField> {
    let p = sig.p();
    let q = sig.q();
    let mut comps = vec![SuperElement::zero(sig); p + q];
    match kind {
        FieldKind::Euler => {
            for j in 0..q {
                comps[p + j] = SuperElement::coordinate(sig, p + j);
            }
        }
        FieldKind::DeRham => {
            if p != q {
                return Err(Error::InvalidArgument(format!(
                    "de Rham field needs p = q, chart has ({p}|{q})"
                )));
            }
            for mu in 0..p {
                comps[mu] = SuperElement::coordinate(sig, p + mu);
            }
        }
    }
    VectorField::new(sig, comps)
}

impl fmt::Display for VectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut items = Vec::new();
        for (k, c) in self.comps.iter().enumerate() {
            items.extend(c.render_items(&format!("d/d{}", self.sig.coord_name(k))));
        }
        write_sum(f, &items)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sig() -> Arc<ChartSignature> {
        ChartSignature::new(0, &["x"], &["t1", "t2"], &[]).unwrap()
    }

    fn mono(s: &Arc<ChartSignature>, mask: u32, e: i32, c: i64) -> SuperElement {
        SuperElement::monomial(s, mask, vec![e], Rational::from(c)).unwrap()
    }

    #[test]
    fn euler_on_monomials() {
        let s = sig();
        let eps = canonical_field(&s, FieldKind::Euler).unwrap();
        let tt = mono(&s, 3, 0, 1);
        assert_eq!(eps.apply(&tt).unwrap(), tt.scale(&Rational::from(2)));
        let dx = VectorField::partial(&s, 0);
        let f = &mono(&s, 0, 2, 1) + &tt;
        assert_eq!(dx.apply(&f).unwrap(), mono(&s, 0, 1, 2));
        assert_eq!(eps.to_string(), "1*t1*d/dt1 + 1*t2*d/dt2");
    }

    #[test]
    fn derham_on_cotangent_chart() {
        let s = ChartSignature::new(0, &["x"], &["t"], &[]).unwrap();
        let d = canonical_field(&s, FieldKind::DeRham).unwrap();
        let f = mono(&s, 0, 3, 1);
        assert_eq!(d.apply(&f).unwrap(), mono(&s, 1, 2, 3));
        assert!(d.bracket(&d).unwrap().is_zero());
        assert!(canonical_field(&sig(), FieldKind::DeRham).is_err());
    }

    #[test]
    fn bracket_examples() {
        let s = sig();
        let eps = canonical_field(&s, FieldKind::Euler).unwrap();
        let d1 = VectorField::partial(&s, 1);
        assert_eq!(eps.bracket(&d1).unwrap(), d1.neg());
        let v = VectorField::single(&s, 0, mono(&s, 3, 0, 1)).unwrap();
        assert_eq!(eps.bracket(&v).unwrap(), v.scale(&Rational::from(2)));
        assert!(d1.bracket(&d1).unwrap().is_zero());
    }

    #[test]
    fn cotangent_bracket_identity() {
        let s = ChartSignature::new(0, &["x"], &["t"], &[]).unwrap();
        let gamma = VectorField::single(&s, 1, mono(&s, 0, 1, 1)).unwrap();
        let d = canonical_field(&s, FieldKind::DeRham).unwrap();
        let expect = VectorField::new(&s, vec![mono(&s, 0, 1, 1), mono(&s, 1, 0, 1)]).unwrap();
        assert_eq!(gamma.bracket(&d).unwrap(), expect);
    }

    #[test]
    fn filtration_examples() {
        let s = sig();
        assert_eq!(
            VectorField::partial(&s, 1)
                .filtration_data()
                .unwrap()
                .degree,
            -1
        );
        let s3 = ChartSignature::new(0, &["x"], &["t1", "t2", "t3"], &[]).unwrap();
        let v = VectorField::new(
            &s3,
            vec![
                SuperElement::monomial(&s3, 3, vec![0], Rational::one()).unwrap(),
                SuperElement::zero(&s3),
                SuperElement::zero(&s3),
                SuperElement::monomial(&s3, 7, vec![0], Rational::one()).unwrap(),
            ],
        )
        .unwrap();
        let fd = v.filtration_data().unwrap();
        assert_eq!(fd.degree, 2);
        assert!(!fd.algebraic_flags[&2]);
        let w = VectorField::single(&s, 1, mono(&s, 3, 0, 1)).unwrap();
        let fd = w.filtration_data().unwrap();
        assert_eq!(fd.degree, 1);
        assert!(fd.algebraic_flags[&1]);
        assert!(VectorField::zero(&s).filtration_data().is_err());
    }
}
