//! Even affine connections as Christoffel data:
//! `∇_{∂_A} ∂_B = Σ_C Γ_{AB}^C ∂_C`.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::atlas::{Atlas, ValidationReport};
use crate::coeffring::Rational;
use crate::error::{Error, Result};
use crate::grassmann::{ChartSignature, Parity, SuperElement};
use crate::svector::VectorField;

/// A (2,1)-tensor on a chart, stored as `T[A][B][C]` over the combined
/// coordinate indices.
#[derive(Clone, Debug)]
pub struct Tensor21 {
    sig: Arc<ChartSignature>,
    comps: Vec<SuperElement>,
}

impl PartialEq for Tensor21 {
    fn eq(&self, other: &Self) -> bool {
        self.sig.same_chart(&other.sig) && self.comps == other.comps
    }
}

impl Eq for Tensor21 {}

impl Tensor21 {
    pub fn zero(sig: &Arc<ChartSignature>) -> Tensor21 {
        let n = sig.dim();
        Tensor21 {
            sig: sig.clone(),
            comps: vec![SuperElement::zero(sig); n * n * n],
        }
    }

    /// Build from a flat component list in `(A, B, C)` order.
    pub fn from_components(
        sig: &Arc<ChartSignature>,
        comps: Vec<SuperElement>,
    ) -> Result<Tensor21> {
        let n = sig.dim();
        if comps.len() != n * n * n {
            return Err(Error::InvalidArgument(format!(
                "tensor needs {} components, got {}",
                n * n * n,
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
        Ok(Tensor21 { sig: ring, comps })
    }

    pub fn sig(&self) -> &Arc<ChartSignature> {
        &self.sig
    }

    pub fn dim(&self) -> usize {
        self.sig.dim()
    }

    fn idx(&self, a: usize, b: usize, c: usize) -> usize {
        let n = self.dim();
        (a * n + b) * n + c
    }

    pub fn get(&self, a: usize, b: usize, c: usize) -> &SuperElement {
        &self.comps[self.idx(a, b, c)]
    }

    pub fn set(&mut self, a: usize, b: usize, c: usize, v: SuperElement) -> Result<()> {
        let ring = ChartSignature::join(&self.sig, v.sig())?;
        if !Arc::ptr_eq(&ring, &self.sig) {
            *self = self.with_sig(&ring)?;
        }
        let i = self.idx(a, b, c);
        self.comps[i] = v.with_sig(&ring)?;
        Ok(())
    }

    pub fn components(&self) -> &[SuperElement] {
        &self.comps
    }

    pub fn is_zero(&self) -> bool {
        self.comps.iter().all(|c| c.is_zero())
    }

    pub fn with_sig(&self, sig: &Arc<ChartSignature>) -> Result<Tensor21> {
        let comps = self
            .comps
            .iter()
            .map(|c| c.with_sig(sig))
            .collect::<Result<_>>()?;
        Ok(Tensor21 {
            sig: sig.clone(),
            comps,
        })
    }

    pub fn checked_add(&self, other: &Tensor21) -> Result<Tensor21> {
        let comps = self
            .comps
            .iter()
            .zip(&other.comps)
            .map(|(a, b)| a.checked_add(b))
            .collect::<Result<Vec<_>>>()?;
        Tensor21::from_components(&ChartSignature::join(&self.sig, &other.sig)?, comps)
    }

    pub fn checked_sub(&self, other: &Tensor21) -> Result<Tensor21> {
        self.checked_add(&other.scale(&Rational::from(-1)))
    }

    pub fn scale(&self, c: &Rational) -> Tensor21 {
        Tensor21 {
            sig: self.sig.clone(),
            comps: self.comps.iter().map(|v| v.scale(c)).collect(),
        }
    }

    pub fn map(&self, f: impl Fn(&SuperElement) -> SuperElement) -> Tensor21 {
        let comps: Vec<SuperElement> = self.comps.iter().map(f).collect();
        let sig = comps
            .first()
            .map(|c| c.sig().clone())
            .unwrap_or_else(|| self.sig.clone());
        Tensor21 { sig, comps }
    }

    /// `Σ u^A (−1)^{|A||v^B|} v^B T_{AB}^C ∂_C`.
    pub fn contract(&self, u: &VectorField, v: &VectorField) -> Result<VectorField> {
        let ring = ChartSignature::join(&ChartSignature::join(&self.sig, u.sig())?, v.sig())?;
        let n = self.dim();
        let mut out = vec![SuperElement::zero(&ring); n];
        for a in 0..n {
            let ua = u.component(a);
            if ua.is_zero() {
                continue;
            }
            let pa = self.sig.coord_parity(a);
            for b in 0..n {
                let vb = v.component(b);
                if vb.is_zero() {
                    continue;
                }
                for pv in [Parity::Even, Parity::Odd] {
                    let part = vb.parity_part(pv);
                    if part.is_zero() {
                        continue;
                    }
                    let mut coeff = ua.super_mul(&part)?;
                    if pa.sign_with(pv) {
                        coeff = coeff.neg();
                    }
                    for (c, slot) in out.iter_mut().enumerate() {
                        let g = self.get(a, b, c);
                        if g.is_zero() {
                            continue;
                        }
                        *slot = slot.checked_add(&coeff.super_mul(g)?)?;
                    }
                }
            }
        }
        VectorField::new(&ring, out)
    }

    /// Graded symmetry `T_{AB}^C = (−1)^{|A||B|} T_{BA}^C`; returns the first
    /// offending index triple.
    pub fn symmetry_defect(&self) -> Result<Option<(usize, usize, usize)>> {
        let n = self.dim();
        for a in 0..n {
            for b in a..n {
                let sign = self.sig.coord_parity(a).sign_with(self.sig.coord_parity(b));
                for c in 0..n {
                    let swapped = if sign {
                        self.get(b, a, c).neg()
                    } else {
                        self.get(b, a, c).clone()
                    };
                    if &swapped != self.get(a, b, c) {
                        return Ok(Some((a, b, c)));
                    }
                }
            }
        }
        Ok(None)
    }

    /// Components whose parity differs from `|A| + |B| + |C|`.
    pub fn parity_defect(&self) -> Option<(usize, usize, usize)> {
        let n = self.dim();
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    let want = self
                        .sig
                        .coord_parity(a)
                        .add(self.sig.coord_parity(b))
                        .add(self.sig.coord_parity(c));
                    let g = self.get(a, b, c);
                    if !g.is_zero() && g.parity() != Some(want) {
                        return Some((a, b, c));
                    }
                }
            }
        }
        None
    }

    fn index_name(&self, a: usize, b: usize, c: usize) -> String {
        format!(
            "({}, {}, {})",
            self.sig.coord_name(a),
            self.sig.coord_name(b),
            self.sig.coord_name(c)
        )
    }

    /// Nonzero components as `(A, B, C, value)` with coordinate names.
    pub fn entries(&self) -> Vec<(String, String, String, &SuperElement)> {
        let n = self.dim();
        let mut out = Vec::new();
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    let g = self.get(a, b, c);
                    if !g.is_zero() {
                        out.push((
                            self.sig.coord_name(a).to_string(),
                            self.sig.coord_name(b).to_string(),
                            self.sig.coord_name(c).to_string(),
                            g,
                        ));
                    }
                }
            }
        }
        out
    }
}

/// Christoffel symbols of an even affine connection on one chart.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChristoffelData {
    gamma: Tensor21,
}

impl ChristoffelData {
    pub fn flat(sig: &Arc<ChartSignature>) -> ChristoffelData {
        ChristoffelData {
            gamma: Tensor21::zero(sig),
        }
    }

    /// Wrap a tensor, rejecting odd components or broken graded symmetry.
    pub fn new(gamma: Tensor21) -> Result<ChristoffelData> {
        let c = ChristoffelData::new_unchecked(gamma);
        let r = c.validate();
        match r.failures().first() {
            None => Ok(c),
            Some(f) => Err(Error::InvalidConnection(format!(
                "{}: {}",
                f.name, f.detail
            ))),
        }
    }

    pub fn new_unchecked(gamma: Tensor21) -> ChristoffelData {
        ChristoffelData { gamma }
    }

    pub fn sig(&self) -> &Arc<ChartSignature> {
        self.gamma.sig()
    }

    pub fn chart(&self) -> usize {
        self.gamma.sig().chart()
    }

    pub fn gamma(&self) -> &Tensor21 {
        &self.gamma
    }

    pub fn get(&self, a: usize, b: usize, c: usize) -> &SuperElement {
        self.gamma.get(a, b, c)
    }

    pub fn validate(&self) -> ValidationReport {
        let mut r = ValidationReport::default();
        match self.gamma.parity_defect() {
            None => r.push("evenness", true, ""),
            Some((a, b, c)) => r.push(
                "evenness",
                false,
                format!(
                    "chart {} gamma {} has the wrong parity",
                    self.chart(),
                    self.gamma.index_name(a, b, c)
                ),
            ),
        }
        match self.gamma.symmetry_defect() {
            Ok(None) => r.push("graded symmetry", true, ""),
            Ok(Some((a, b, c))) => r.push(
                "graded symmetry",
                false,
                format!(
                    "chart {} gamma {} is not graded-symmetric",
                    self.chart(),
                    self.gamma.index_name(a, b, c)
                ),
            ),
            Err(e) => r.push("graded symmetry", false, e.to_string()),
        }
        r
    }

    fn check_chart(&self, u: &VectorField) -> Result<()> {
        if !u.sig().same_chart(self.sig()) {
            return Err(Error::ChartMismatch(format!(
                "connection on chart {} used with a field on chart {}",
                self.chart(),
                u.chart()
            )));
        }
        Ok(())
    }

    /// `∇_u v = Σ_B u(v^B) ∂_B + Σ u^A (−1)^{|A||v^B|} v^B Γ_{AB}^C ∂_C`.
    pub fn covariant_derivative(&self, u: &VectorField, v: &VectorField) -> Result<VectorField> {
        self.check_chart(u)?;
        self.check_chart(v)?;
        let flat = v.map_components(|c| u.apply(c))?;
        flat.checked_add(&self.gamma.contract(u, v)?)
    }

    /// `tor(u, v) = [u, v] − ∇_u v + (−1)^{|u||v|} ∇_v u`, on parity parts.
    pub fn torsion(&self, u: &VectorField, v: &VectorField) -> Result<VectorField> {
        let ring = ChartSignature::join(u.sig(), v.sig())?;
        let mut acc = VectorField::zero(&ring);
        for pu in [Parity::Even, Parity::Odd] {
            let uu = u.parity_part(pu);
            if uu.is_zero() {
                continue;
            }
            for pv in [Parity::Even, Parity::Odd] {
                let vv = v.parity_part(pv);
                if vv.is_zero() {
                    continue;
                }
                let mut t = uu
                    .bracket(&vv)?
                    .checked_sub(&self.covariant_derivative(&uu, &vv)?)?;
                let back = self.covariant_derivative(&vv, &uu)?;
                t = if pu.sign_with(pv) {
                    t.checked_sub(&back)?
                } else {
                    t.checked_add(&back)?
                };
                acc = acc.checked_add(&t)?;
            }
        }
        Ok(acc)
    }

    pub fn checked_add_tensor(&self, t: &Tensor21) -> Result<ChristoffelData> {
        Ok(ChristoffelData {
            gamma: self.gamma.checked_add(t)?,
        })
    }
}

/// `Γ_1 − Γ_2`, a graded-symmetric tensor.
pub fn connection_difference(n1: &ChristoffelData, n2: &ChristoffelData) -> Result<Tensor21> {
    if !n1.sig().same_chart(n2.sig()) {
        return Err(Error::ChartMismatch(format!(
            "connections on charts {} and {}",
            n1.chart(),
            n2.chart()
        )));
    }
    n1.gamma.checked_sub(&n2.gamma)
}

/// Frame fields `∂_{z_A}` of chart `to` written in chart `from`.
fn frame_in(atlas: &Atlas, to: usize, from: usize) -> Result<Vec<VectorField>> {
    let sig = atlas.chart(to);
    (0..sig.dim())
        .map(|a| atlas.push_field(&VectorField::partial(sig, a), to, from))
        .collect()
}

fn assemble(atlas: &Atlas, to: usize, fields: Vec<Vec<VectorField>>) -> Result<Tensor21> {
    let n = fields.len();
    let mut comps = Vec::with_capacity(n * n * n);
    let mut ring = atlas.chart(to).clone();
    for row in &fields {
        for f in row {
            ring = ChartSignature::join(&ring, f.sig())?;
        }
    }
    for row in fields {
        for f in row {
            comps.extend(f.components().iter().cloned());
        }
    }
    Tensor21::from_components(&ring, comps)
}

/// Christoffel symbols of chart `from`'s connection expressed in chart `to`.
pub fn transform(
    gamma_from: &ChristoffelData,
    atlas: &Atlas,
    to: usize,
) -> Result<ChristoffelData> {
    let from = gamma_from.chart();
    if from == to {
        return Ok(gamma_from.clone());
    }
    let frame = frame_in(atlas, to, from)?;
    let mut fields = Vec::with_capacity(frame.len());
    for va in &frame {
        let mut row = Vec::with_capacity(frame.len());
        for vb in &frame {
            let w = gamma_from.covariant_derivative(va, vb)?;
            row.push(atlas.push_field(&w, from, to)?);
        }
        fields.push(row);
    }
    Ok(ChristoffelData::new_unchecked(assemble(atlas, to, fields)?))
}

/// Tensorial transport of a (2,1)-tensor from chart `from` to chart `to`.
pub fn transport_tensor(t: &Tensor21, atlas: &Atlas, to: usize) -> Result<Tensor21> {
    let from = t.sig().chart();
    if from == to {
        return Ok(t.clone());
    }
    let frame = frame_in(atlas, to, from)?;
    let mut fields = Vec::with_capacity(frame.len());
    for va in &frame {
        let mut row = Vec::with_capacity(frame.len());
        for vb in &frame {
            let w = t.contract(va, vb)?;
            row.push(atlas.push_field(&w, from, to)?);
        }
        fields.push(row);
    }
    assemble(atlas, to, fields)
}

/// Compare a family of chart connections across every declared overlap.
pub fn check_global(conns: &BTreeMap<usize, ChristoffelData>, atlas: &Atlas) -> ValidationReport {
    let mut report = ValidationReport::default();
    let mut missing = Vec::new();
    for i in 0..atlas.charts().len() {
        match conns.get(&i) {
            None => missing.push(i.to_string()),
            Some(c) => {
                for chk in c.validate().failures() {
                    report.push(format!("chart {i} {}", chk.name), false, chk.detail.clone());
                }
            }
        }
    }
    report.push(
        "connection on every chart",
        missing.is_empty(),
        missing.join(", "),
    );
    let mut bad = Vec::new();
    if missing.is_empty() {
        for (a, b) in atlas.overlaps() {
            match transform(&conns[&b], atlas, a) {
                Ok(t) if t.gamma == conns[&a].gamma => {}
                Ok(t) => {
                    let diff = t.gamma.checked_sub(&conns[&a].gamma);
                    let first = diff
                        .ok()
                        .and_then(|d| {
                            d.entries()
                                .first()
                                .map(|(x, y, z, v)| format!("gamma {x} {y} {z} off by {v}"))
                        })
                        .unwrap_or_default();
                    bad.push(format!("({a},{b}): {first}"));
                }
                Err(e) => bad.push(format!("({a},{b}): {e}")),
            }
        }
    }
    report.push(
        "overlap compatibility",
        bad.is_empty() && missing.is_empty(),
        bad.join("; "),
    );
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::atlas::TransitionMap;
    use crate::svector::{canonical_field, FieldKind};

    fn sig() -> Arc<ChartSignature> {
        ChartSignature::new(0, &["x"], &["t1", "t2"], &[]).unwrap()
    }

    fn mono(s: &Arc<ChartSignature>, mask: u32, e: i32, c: i64) -> SuperElement {
        SuperElement::monomial(s, mask, vec![e], Rational::from(c)).unwrap()
    }

    /// Chart 0 (x|t), chart 1 (y|eta) with y = x + t1 t2, eta = t.
    fn twisted() -> Atlas {
        let s0 = sig();
        let s1 = ChartSignature::new(1, &["y"], &["eta1", "eta2"], &[]).unwrap();
        let y = &mono(&s0, 0, 1, 1) + &mono(&s0, 3, 0, 1);
        let t =
            TransitionMap::new(&s0, &s1, vec![y, mono(&s0, 1, 0, 1), mono(&s0, 2, 0, 1)]).unwrap();
        Atlas::new("twisted", vec![s0, s1], vec![t]).unwrap()
    }

    #[test]
    fn flat_examples() {
        let s = sig();
        let flat = ChristoffelData::flat(&s);
        let eps = canonical_field(&s, FieldKind::Euler).unwrap();
        assert_eq!(flat.covariant_derivative(&eps, &eps).unwrap(), eps);
        let dx = VectorField::partial(&s, 0);
        let xdx = VectorField::single(&s, 0, mono(&s, 0, 1, 1)).unwrap();
        assert_eq!(flat.covariant_derivative(&dx, &xdx).unwrap(), dx);
        assert!(flat
            .torsion(&dx, &VectorField::partial(&s, 1))
            .unwrap()
            .is_zero());
    }

    #[test]
    fn twisted_fixed_point() {
        let a = twisted();
        let g = transform(&ChristoffelData::flat(a.chart(1)), &a, 0).unwrap();
        assert!(g.validate().passed(), "{}", g.validate());
        let s = a.chart(0);
        let h = canonical_field(s, FieldKind::Euler)
            .unwrap()
            .checked_sub(&VectorField::single(s, 0, mono(s, 3, 0, 2)).unwrap())
            .unwrap();
        assert_eq!(g.covariant_derivative(&h, &h).unwrap(), h);
        let mut conns = BTreeMap::new();
        conns.insert(0, g.clone());
        conns.insert(1, ChristoffelData::flat(a.chart(1)));
        assert!(check_global(&conns, &a).passed());
        conns.insert(0, ChristoffelData::flat(s));
        assert!(!check_global(&conns, &a).passed());
        let d = connection_difference(&g, &ChristoffelData::flat(s)).unwrap();
        assert!(!d.is_zero());
        assert!(d.symmetry_defect().unwrap().is_none());
    }

    #[test]
    fn torsion_detects_asymmetry() {
        let s = sig();
        let mut t = Tensor21::zero(&s);
        t.set(1, 2, 0, mono(&s, 0, 0, 1)).unwrap();
        let c = ChristoffelData::new_unchecked(t.clone());
        assert!(!c.validate().passed());
        assert!(ChristoffelData::new(t.clone()).is_err());
        let tor = c
            .torsion(&VectorField::partial(&s, 1), &VectorField::partial(&s, 2))
            .unwrap();
        assert!(!tor.is_zero());
        t.set(2, 1, 0, mono(&s, 0, 0, -1)).unwrap();
        let c = ChristoffelData::new(t).unwrap();
        for a in 0..3 {
            for b in 0..3 {
                let tor = c
                    .torsion(&VectorField::partial(&s, a), &VectorField::partial(&s, b))
                    .unwrap();
                assert!(tor.is_zero());
            }
        }
    }

    #[test]
    fn leibniz_in_second_slot() {
        let s = sig();
        let mut t = Tensor21::zero(&s);
        t.set(1, 2, 0, mono(&s, 0, 1, 1)).unwrap();
        t.set(2, 1, 0, mono(&s, 0, 1, -1)).unwrap();
        t.set(0, 1, 1, mono(&s, 0, 2, 3)).unwrap();
        t.set(1, 0, 1, mono(&s, 0, 2, 3)).unwrap();
        let c = ChristoffelData::new(t).unwrap();
        let u = VectorField::single(&s, 1, mono(&s, 0, 1, 1)).unwrap();
        let w = VectorField::single(&s, 0, mono(&s, 2, 0, 1)).unwrap();
        let g = mono(&s, 1, 2, 1);
        let lhs = c
            .covariant_derivative(&u, &w.mul_function(&g).unwrap())
            .unwrap();
        let rhs = w
            .mul_function(&u.apply(&g).unwrap())
            .unwrap()
            .checked_sub(
                &c.covariant_derivative(&u, &w)
                    .unwrap()
                    .mul_function(&g)
                    .unwrap(),
            )
            .unwrap();
        assert_eq!(lhs, rhs);
        let f = mono(&s, 3, 1, 1);
        assert_eq!(
            c.covariant_derivative(&u.mul_function(&f).unwrap(), &w)
                .unwrap(),
            c.covariant_derivative(&u, &w)
                .unwrap()
                .mul_function(&f)
                .unwrap()
        );
    }
}
