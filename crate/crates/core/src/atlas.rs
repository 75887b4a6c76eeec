//! Charts, transition maps and their validation; split model and reduced data.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use crate::coeffring::{Exponent, LaurentPoly, Rational};
use crate::error::{Error, Result};
use crate::grassmann::{ChartSignature, SuperElement};
use crate::linalg;

/// A coordinate change from `source` to `target` on their overlap: the
/// target coordinates written as functions of the source coordinates.
#[derive(Clone, Debug)]
pub struct TransitionMap {
    source: usize,
    target: usize,
    source_sig: Arc<ChartSignature>,
    target_sig: Arc<ChartSignature>,
    images: Vec<SuperElement>,
}

impl TransitionMap {
    /// `source_sig` carries the overlap invertibles; `images[k]` is the image
    /// of target coordinate `k`.
    pub fn new(
        source_sig: &Arc<ChartSignature>,
        target_sig: &Arc<ChartSignature>,
        images: Vec<SuperElement>,
    ) -> Result<TransitionMap> {
        if images.len() != target_sig.dim() {
            return Err(Error::InvalidAtlas(format!(
                "transition {}->{} needs {} images, got {}",
                source_sig.chart(),
                target_sig.chart(),
                target_sig.dim(),
                images.len()
            )));
        }
        let mut ring = source_sig.clone();
        for im in &images {
            ring = ChartSignature::join(&ring, im.sig())?;
        }
        let images = images
            .iter()
            .map(|im| im.with_sig(&ring))
            .collect::<Result<_>>()?;
        Ok(TransitionMap {
            source: source_sig.chart(),
            target: target_sig.chart(),
            source_sig: ring,
            target_sig: target_sig.clone(),
            images,
        })
    }

    pub fn source(&self) -> usize {
        self.source
    }

    pub fn target(&self) -> usize {
        self.target
    }

    /// Source chart ring with the overlap invertibles enabled.
    pub fn source_sig(&self) -> &Arc<ChartSignature> {
        &self.source_sig
    }

    pub fn target_sig(&self) -> &Arc<ChartSignature> {
        &self.target_sig
    }

    pub fn images(&self) -> &[SuperElement] {
        &self.images
    }

    pub fn image(&self, k: usize) -> &SuperElement {
        &self.images[k]
    }

    /// Source-side mask of variables that must be invertible for the image
    /// of every target variable in `target_mask` to be a unit.
    fn units_needed(&self, target_mask: u64) -> u64 {
        let mut need = 0u64;
        for i in 0..self.target_sig.p() {
            if target_mask >> i & 1 == 1 {
                if let Some((e, _)) = self.images[i].body().as_monomial() {
                    for (j, &k) in e.iter().enumerate() {
                        if k != 0 {
                            need |= 1 << j;
                        }
                    }
                }
            }
        }
        need
    }

    /// Pull back a function on the target chart: `f ∘ φ`, in the source ring
    /// widened by the images of any invertible target variables of `f`.
    pub fn pull(&self, f: &SuperElement) -> Result<SuperElement> {
        if !f.sig().same_chart(&self.target_sig) {
            return Err(Error::ChartMismatch(format!(
                "function on chart {} pulled through {}->{}",
                f.sig().chart(),
                self.source,
                self.target
            )));
        }
        let ring = self
            .source_sig
            .extended(self.units_needed(f.sig().invertible_mask()));
        f.substitute_into(&self.images, &ring)
    }

    /// Images in a widened source ring (for use on triple overlaps).
    pub fn images_in(&self, ring: &Arc<ChartSignature>) -> Result<Vec<SuperElement>> {
        self.images.iter().map(|im| im.with_sig(ring)).collect()
    }

    /// Keep only bodies of even images and θ-linear parts of odd images.
    pub fn split(&self) -> TransitionMap {
        let p = self.target_sig.p();
        let images = self
            .images
            .iter()
            .enumerate()
            .map(|(k, im)| {
                if k < p {
                    im.graded_part(0)
                } else {
                    im.graded_part(1)
                }
            })
            .collect();
        TransitionMap {
            images,
            ..self.clone()
        }
    }

    pub fn is_split(&self) -> bool {
        let p = self.target_sig.p();
        self.images.iter().enumerate().all(|(k, im)| {
            let keep = if k < p { 0 } else { 1 };
            im.terms().keys().all(|m| m.count_ones() == keep)
        })
    }

    /// Odd linear part as a matrix: `η_K = Σ_j G[K][j] θ_j`.
    pub fn odd_matrix(&self) -> Vec<Vec<LaurentPoly>> {
        let p = self.target_sig.p();
        let q = self.source_sig.q();
        self.images[p..]
            .iter()
            .map(|im| (0..q).map(|j| im.coefficient(1 << j)).collect())
            .collect()
    }

    /// Jacobian of the body map: `J[K][i] = ∂ body(φ_K) / ∂x_i`.
    pub fn body_jacobian(&self) -> Vec<Vec<LaurentPoly>> {
        let p = self.target_sig.p();
        (0..p)
            .map(|k| {
                (0..self.source_sig.p())
                    .map(|i| self.images[k].body().derivative(i))
                    .collect()
            })
            .collect()
    }

    /// Source coordinates as functions of the target ones.
    pub fn invert(&self) -> Result<TransitionMap> {
        invert_transition(self)
    }

    /// Check that `other` is a two-sided inverse of `self`.
    pub fn check_inverse(&self, other: &TransitionMap) -> Result<()> {
        if other.images.len() != self.source_sig.dim() {
            return Err(Error::InvalidAtlas(
                "inverse has the wrong number of images".into(),
            ));
        }
        for (k, w) in SuperElement::coordinates(other.source_sig())
            .iter()
            .enumerate()
        {
            let there = self.images[k].substitute(&other.images)?;
            if &there != w {
                return Err(Error::InvalidAtlas(format!(
                    "φ∘ψ differs from the identity on `{}`",
                    self.target_sig.coord_name(k)
                )));
            }
        }
        for (a, z) in SuperElement::coordinates(self.source_sig())
            .iter()
            .enumerate()
        {
            let back = other.images[a].substitute(&self.images)?;
            if &back != z {
                return Err(Error::InvalidAtlas(format!(
                    "ψ∘φ differs from the identity on `{}`",
                    self.source_sig.coord_name(a)
                )));
            }
        }
        Ok(())
    }
}

fn invert_transition(t: &TransitionMap) -> Result<TransitionMap> {
    let src = &t.source_sig;
    let p = src.p();
    let q = src.q();
    if t.target_sig.p() != p || t.target_sig.q() != q {
        return Err(Error::InvalidAtlas("charts of different dimensions".into()));
    }
    for (k, im) in t.images.iter().enumerate() {
        let ok = if k < p { im.is_even() } else { im.is_odd() };
        if !ok {
            return Err(Error::Parity(format!(
                "image of `{}` has the wrong parity",
                t.target_sig.coord_name(k)
            )));
        }
    }
    // Body: a monomial map with unimodular exponent matrix.
    let mut expo: Vec<Exponent> = Vec::with_capacity(p);
    let mut coef: Vec<Rational> = Vec::with_capacity(p);
    let mut target_units = 0u64;
    for k in 0..p {
        let body = t.images[k].body();
        let (e, c) = body.as_monomial().ok_or_else(|| {
            Error::NotAUnit(format!(
                "body of `{}` is `{}`, not a monomial map",
                t.target_sig.coord_name(k),
                body
            ))
        })?;
        if e.iter()
            .enumerate()
            .all(|(i, &v)| v == 0 || src.is_invertible(i))
        {
            target_units |= 1 << k;
        }
        expo.push(e.clone());
        coef.push(c.clone());
    }
    let m: Vec<Vec<Rational>> = expo
        .iter()
        .map(|e| e.iter().map(|&v| Rational::from(v)).collect())
        .collect();
    let minv = if p == 0 {
        Vec::new()
    } else {
        linalg::rational_inverse(&m)
            .ok_or_else(|| Error::NotAUnit("body exponent matrix is singular".into()))?
    };
    let tgt = t.target_sig.extended(target_units);
    let mut psi_hat: Vec<SuperElement> = Vec::with_capacity(p + q);
    for row in minv.iter() {
        let mut e = Vec::with_capacity(p);
        let mut c = Rational::one();
        for (k, v) in row.iter().enumerate() {
            let v = v
                .to_i64()
                .ok_or_else(|| Error::NotAUnit("body exponent matrix is not unimodular".into()))?
                as i32;
            e.push(v);
            c = c * coef[k].recip()?.pow(v);
        }
        psi_hat.push(SuperElement::monomial(&tgt, 0, e, c).map_err(|err| {
            Error::NotAUnit(format!(
                "inverse needs an invertible target variable: {err}"
            ))
        })?);
    }
    let g = t.odd_matrix();
    let ginv = if q == 0 {
        Vec::new()
    } else {
        linalg::laurent_inverse(&g)?
    };
    let mut odd_subst = psi_hat.clone();
    odd_subst.extend((0..q).map(|j| SuperElement::coordinate(&tgt, p + j)));
    let mut body_at_w: Vec<Vec<SuperElement>> = Vec::with_capacity(q);
    for row in &ginv {
        let mut r = Vec::with_capacity(q);
        for entry in row {
            let f = SuperElement::from_poly(src, 0, entry.clone());
            r.push(f.substitute_into(&odd_subst, &tgt)?);
        }
        body_at_w.push(r);
    }
    for row in &body_at_w {
        let mut acc = SuperElement::zero(&tgt);
        for (k, gk) in row.iter().enumerate() {
            acc = acc.checked_add(&gk.super_mul(&SuperElement::coordinate(&tgt, p + k))?)?;
        }
        psi_hat.push(acc);
    }
    // ψ̂ as a function of w; nilpotent correction ψ = ψ̂(w − N(ψ)).
    let split = t.split();
    let nil: Vec<SuperElement> = t
        .images
        .iter()
        .zip(split.images.iter())
        .map(|(a, b)| a.checked_sub(b))
        .collect::<Result<_>>()?;
    let w = SuperElement::coordinates(&tgt);
    let mut psi = psi_hat.clone();
    for _ in 0..=q + 1 {
        let mut shifted = Vec::with_capacity(p + q);
        for (k, nk) in nil.iter().enumerate() {
            let n_at = nk.substitute_into(&psi, &tgt)?;
            shifted.push(w[k].checked_sub(&n_at)?);
        }
        let next: Vec<SuperElement> = psi_hat
            .iter()
            .map(|h| h.substitute_into(&shifted, &tgt))
            .collect::<Result<_>>()?;
        if next == psi {
            break;
        }
        psi = next;
    }
    let inv = TransitionMap::new(&tgt, &t.source_sig.without_invertibles(), psi)?;
    t.check_inverse(&inv)?;
    Ok(inv)
}

/// One line of a validation report.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

/// Pass/fail results of a battery of checks.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
}

impl ValidationReport {
    pub fn push(&mut self, name: impl Into<String>, passed: bool, detail: impl Into<String>) {
        self.checks.push(Check {
            name: name.into(),
            passed,
            detail: detail.into(),
        });
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.passed).collect()
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn extend(&mut self, other: ValidationReport) {
        self.checks.extend(other.checks);
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            let tag = if c.passed { "PASS" } else { "FAIL" };
            if c.detail.is_empty() {
                writeln!(f, "{tag} {}", c.name)?;
            } else {
                writeln!(f, "{tag} {}: {}", c.name, c.detail)?;
            }
        }
        Ok(())
    }
}

/// A supermanifold presented by charts and transition maps. Declared
/// transitions go from a lower to a higher chart index; the reverse
/// directions are computed (or supplied explicitly and then verified).
#[derive(Clone, Debug)]
pub struct Atlas {
    name: String,
    charts: Vec<Arc<ChartSignature>>,
    declared: BTreeMap<(usize, usize), TransitionMap>,
    reverse: BTreeMap<(usize, usize), std::result::Result<TransitionMap, String>>,
    explicit: BTreeSet<(usize, usize)>,
}

impl Atlas {
    /// Build an atlas. `transitions` with `source < target` are declared;
    /// ones with `source > target` are explicit inverses of declared maps.
    pub fn new(
        name: impl Into<String>,
        charts: Vec<Arc<ChartSignature>>,
        transitions: Vec<TransitionMap>,
    ) -> Result<Atlas> {
        if charts.is_empty() {
            return Err(Error::InvalidAtlas("no charts".into()));
        }
        let (p, q) = (charts[0].p(), charts[0].q());
        for (i, c) in charts.iter().enumerate() {
            if c.chart() != i {
                return Err(Error::InvalidAtlas(format!(
                    "chart {} listed at position {i}",
                    c.chart()
                )));
            }
            if c.p() != p || c.q() != q {
                return Err(Error::InvalidAtlas(format!(
                    "chart {i} has dimension ({}|{}), expected ({p}|{q})",
                    c.p(),
                    c.q()
                )));
            }
        }
        let mut declared = BTreeMap::new();
        let mut explicit_maps = Vec::new();
        for t in transitions {
            let (a, b) = (t.source, t.target);
            if a >= charts.len() || b >= charts.len() || a == b {
                return Err(Error::InvalidAtlas(format!("bad overlap ({a},{b})")));
            }
            if !t.target_sig.same_chart(&charts[b]) || !t.source_sig.same_chart(&charts[a]) {
                return Err(Error::InvalidAtlas(format!(
                    "overlap ({a},{b}) uses foreign coordinates"
                )));
            }
            if a < b {
                if declared.insert((a, b), t).is_some() {
                    return Err(Error::InvalidAtlas(format!(
                        "overlap ({a},{b}) declared twice"
                    )));
                }
            } else {
                explicit_maps.push(t);
            }
        }
        let mut explicit = BTreeSet::new();
        let mut reverse = BTreeMap::new();
        for t in explicit_maps {
            let (a, b) = (t.source, t.target);
            let Some(fwd) = declared.get(&(b, a)) else {
                return Err(Error::InvalidAtlas(format!(
                    "overlap ({a},{b}) given without ({b},{a})"
                )));
            };
            let checked = fwd.check_inverse(&t).map(|_| t).map_err(|e| e.to_string());
            explicit.insert((a, b));
            reverse.insert((a, b), checked);
        }
        for (&(a, b), t) in &declared {
            reverse
                .entry((b, a))
                .or_insert_with(|| invert_transition(t).map_err(|e| e.to_string()));
        }
        Ok(Atlas {
            name: name.into(),
            charts,
            declared,
            reverse,
            explicit,
        })
    }

    pub fn single_chart(name: impl Into<String>, sig: Arc<ChartSignature>) -> Result<Atlas> {
        Atlas::new(name, vec![sig], Vec::new())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Atlas {
        self.name = name.into();
        self
    }

    pub fn charts(&self) -> &[Arc<ChartSignature>] {
        &self.charts
    }

    pub fn chart(&self, i: usize) -> &Arc<ChartSignature> {
        &self.charts[i]
    }

    pub fn p(&self) -> usize {
        self.charts[0].p()
    }

    pub fn q(&self) -> usize {
        self.charts[0].q()
    }

    /// Declared overlaps `(α, β)` with `α < β`.
    pub fn overlaps(&self) -> Vec<(usize, usize)> {
        self.declared.keys().copied().collect()
    }

    pub fn declared(&self) -> impl Iterator<Item = &TransitionMap> {
        self.declared.values()
    }

    /// Explicitly supplied inverse maps.
    pub fn explicit_inverses(&self) -> Vec<&TransitionMap> {
        self.explicit
            .iter()
            .filter_map(|k| self.reverse.get(k).and_then(|r| r.as_ref().ok()))
            .collect()
    }

    /// Triples `α < β < γ` whose three overlaps are all declared.
    pub fn triples(&self) -> Vec<(usize, usize, usize)> {
        let n = self.charts.len();
        let mut out = Vec::new();
        for a in 0..n {
            for b in a + 1..n {
                for c in b + 1..n {
                    if self.declared.contains_key(&(a, b))
                        && self.declared.contains_key(&(a, c))
                        && self.declared.contains_key(&(b, c))
                    {
                        out.push((a, b, c));
                    }
                }
            }
        }
        out
    }

    /// The transition from chart `a` to chart `b` (either direction).
    pub fn transition(&self, a: usize, b: usize) -> Result<&TransitionMap> {
        if a < b {
            self.declared
                .get(&(a, b))
                .ok_or_else(|| Error::InvalidAtlas(format!("no overlap ({a},{b})")))
        } else {
            match self.reverse.get(&(a, b)) {
                Some(Ok(t)) => Ok(t),
                Some(Err(e)) => Err(Error::InvalidAtlas(format!("inverse of ({b},{a}): {e}"))),
                None => Err(Error::InvalidAtlas(format!("no overlap ({b},{a})"))),
            }
        }
    }

    /// Ring of chart `a` on the triple overlap with `b` and `c`.
    pub fn triple_ring(&self, a: usize, b: usize, c: usize) -> Result<Arc<ChartSignature>> {
        let m1 = self.transition(a, b)?.source_sig().invertible_mask();
        let m2 = self.transition(a, c)?.source_sig().invertible_mask();
        Ok(self.charts[a].extended(m1 | m2))
    }

    pub fn is_split(&self) -> bool {
        self.declared.values().all(|t| t.is_split())
    }

    pub fn validate(&self) -> ValidationReport {
        validate_atlas(self)
    }

    /// Error unless every validation check passes.
    pub fn ensure_valid(&self) -> Result<()> {
        let r = validate_atlas(self);
        match r.failures().first() {
            None => Ok(()),
            Some(c) => Err(Error::InvalidAtlas(format!("{}: {}", c.name, c.detail))),
        }
    }
}

pub fn validate_atlas(a: &Atlas) -> ValidationReport {
    let mut report = ValidationReport::default();
    let p = a.p();
    let mut parity_bad = Vec::new();
    for t in a.declared.values() {
        for (k, im) in t.images.iter().enumerate() {
            let ok = if k < p { im.is_even() } else { im.is_odd() };
            if !ok {
                parity_bad.push(format!(
                    "({},{}) `{}`",
                    t.source,
                    t.target,
                    t.target_sig.coord_name(k)
                ));
            }
        }
    }
    report.push(
        "parity of images",
        parity_bad.is_empty(),
        parity_bad.join(", "),
    );

    let mut inv_bad = Vec::new();
    for (&(b, c), r) in &a.reverse {
        if let Err(e) = r {
            inv_bad.push(format!("({c},{b}): {e}"));
        }
    }
    report.push(
        "invertibility and inverse consistency",
        inv_bad.is_empty(),
        inv_bad.join("; "),
    );

    let mut framing_bad = Vec::new();
    for t in a.declared.values() {
        for (k, im) in t.images.iter().enumerate() {
            let lin = if k < p { 0 } else { 1 };
            let low = im.truncate(2);
            if low.terms().keys().any(|m| m.count_ones() != lin) {
                framing_bad.push(format!(
                    "({},{}) `{}`",
                    t.source,
                    t.target,
                    t.target_sig.coord_name(k)
                ));
            }
        }
    }
    report.push(
        "framing-adapted mod J^2",
        framing_bad.is_empty(),
        framing_bad.join(", "),
    );

    let mut triple_bad = Vec::new();
    if inv_bad.is_empty() && parity_bad.is_empty() {
        for (x, y, z) in a.triples() {
            if let Err(e) = check_triple(a, x, y, z) {
                triple_bad.push(format!("({x},{y},{z}): {e}"));
            }
        }
        report.push(
            "triple cocycle",
            triple_bad.is_empty(),
            triple_bad.join("; "),
        );
    } else {
        report.push("triple cocycle", false, "skipped: transitions invalid");
    }
    report
}

fn check_triple(a: &Atlas, x: usize, y: usize, z: usize) -> Result<()> {
    let ring = a.triple_ring(x, y, z)?;
    let xy = a.transition(x, y)?.images_in(&ring)?;
    let xz = a.transition(x, z)?.images_in(&ring)?;
    let yz = a.transition(y, z)?;
    for (k, im) in yz.images().iter().enumerate() {
        let composed = im.substitute_into(&xy, &ring)?;
        if composed != xz[k] {
            return Err(Error::InvalidAtlas(format!(
                "φ_{y}{z}∘φ_{x}{y} differs from φ_{x}{z} on `{}`",
                yz.target_sig().coord_name(k)
            )));
        }
    }
    Ok(())
}

/// The split model: even images reduced to their bodies, odd images to
/// their θ-linear parts.
pub fn split_model_of(a: &Atlas) -> Result<Atlas> {
    a.ensure_valid()?;
    let transitions = a
        .declared
        .values()
        .chain(a.explicit_inverses())
        .map(|t| t.split())
        .collect();
    Atlas::new(a.name.clone(), a.charts.clone(), transitions)
}

/// The reduced atlas of X and the transition matrices of T*_{X,−}.
#[derive(Clone, Debug)]
pub struct ReducedData {
    pub atlas: Atlas,
    /// For each declared overlap: `η_K = Σ_j G[K][j] θ_j`.
    pub odd_cotangent: BTreeMap<(usize, usize), Vec<Vec<LaurentPoly>>>,
}

pub fn reduced_data(a: &Atlas) -> Result<ReducedData> {
    a.ensure_valid()?;
    let charts: Vec<Arc<ChartSignature>> = a.charts.iter().map(|c| c.reduced()).collect();
    let mut transitions = Vec::new();
    let mut odd_cotangent = BTreeMap::new();
    for t in a.declared.values().chain(a.explicit_inverses()) {
        let (x, y) = (t.source, t.target);
        let src = t.source_sig().reduced();
        let images = (0..a.p())
            .map(|k| t.images[k].reduce().with_sig(&src))
            .collect::<Result<Vec<_>>>()?;
        transitions.push(TransitionMap::new(&src, &charts[y], images)?);
        if x < y {
            odd_cotangent.insert((x, y), t.odd_matrix());
        }
    }
    Ok(ReducedData {
        atlas: Atlas::new(a.name.clone(), charts, transitions)?,
        odd_cotangent,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ns2(deform: bool, bad_parity: bool) -> Atlas {
        let s0 = ChartSignature::new(0, &["x"], &["t1", "t2"], &[]).unwrap();
        let s1 = ChartSignature::new(1, &["y"], &["eta1", "eta2"], &[]).unwrap();
        let ov = s0.extended(1);
        let m = |mask: u32, e: i32| {
            SuperElement::monomial(&ov, mask, vec![e], Rational::one()).unwrap()
        };
        let mut y = m(0, -1);
        if deform {
            y = &y + &m(3, -3);
        }
        let eta1 = if bad_parity { m(0, 1) } else { m(1, -2) };
        let t = TransitionMap::new(&ov, &s1, vec![y, eta1, m(2, -2)]).unwrap();
        Atlas::new("test", vec![s0, s1], vec![t]).unwrap()
    }

    #[test]
    fn split_and_nonsplit_validate() {
        assert!(ns2(false, false).validate().passed());
        let a = ns2(true, false);
        let r = a.validate();
        assert!(r.passed(), "{r}");
        let inv = a.transition(1, 0).unwrap();
        assert_eq!(inv.image(0).to_string(), "1*y^-1 + 1*y^-3*eta1*eta2");
        assert_eq!(inv.image(1).to_string(), "1*y^-2*eta1");
    }

    #[test]
    fn parity_failure_reported() {
        let r = ns2(true, true).validate();
        assert!(!r.check("parity of images").unwrap().passed);
    }

    #[test]
    fn split_model_drops_deformation() {
        let a = ns2(true, false);
        let s = split_model_of(&a).unwrap();
        let expect = ns2(false, false);
        assert_eq!(
            s.transition(0, 1).unwrap().images(),
            expect.transition(0, 1).unwrap().images()
        );
        let ss = split_model_of(&s).unwrap();
        assert_eq!(
            ss.transition(0, 1).unwrap().images(),
            s.transition(0, 1).unwrap().images()
        );
        assert!(s.is_split() && !a.is_split());
    }

    #[test]
    fn reduced_data_reads_off() {
        let rd = reduced_data(&ns2(true, false)).unwrap();
        let t = rd.atlas.transition(0, 1).unwrap();
        assert_eq!(t.image(0).to_string(), "1*x^-1");
        let g = &rd.odd_cotangent[&(0, 1)];
        assert_eq!(g[0][0].to_string(), "1*x^-2");
        assert!(g[0][1].is_zero() && g[1][0].is_zero());
        assert_eq!(g[1][1].to_string(), "1*x^-2");
    }
}
