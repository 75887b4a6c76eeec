//! Fixture atlases: weighted superspaces over P¹, affine gluings, projective
//! reduced atlases and cotangent supermanifolds twisted by a 1-form cocycle.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::atlas::{split_model_of, Atlas, TransitionMap};
use crate::cech::{cocycle_check, Cochain0, Cochain1, EndFormSheaf, ValueSheaf, VectorBundle};
use crate::coeffring::{LaurentPoly, Rational};
use crate::error::{Error, Result};
use crate::grassmann::{ChartSignature, SuperElement};
use crate::koszul::FieldFamily;
use crate::obstruction::{exp_derivation, ObstructionCocycle};
use crate::svector::{canonical_field, FieldKind, VectorField};

/// A correction `c · x^exponent · θ_mask` added to `y = 1/x`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Deformation {
    pub mask: u32,
    pub exponent: i32,
    pub coeff: Rational,
}

impl Deformation {
    pub fn new(mask: u32, exponent: i32, coeff: Rational) -> Deformation {
        Deformation {
            mask,
            exponent,
            coeff,
        }
    }
}

fn odd_names(prefix: &str, q: usize) -> Vec<String> {
    (1..=q).map(|i| format!("{prefix}{i}")).collect()
}

/// Two charts `(x|t_i)`, `(y|eta_i)` with `y = 1/x + Σ corrections` and
/// `eta_i = t_i / x^(k_i)`.
pub fn p1_family(name: &str, weights: &[i32], deformation: &[Deformation]) -> Result<Atlas> {
    let q = weights.len();
    let s0 = ChartSignature::from_names(0, vec!["x".into()], odd_names("t", q), &[])?;
    let s1 = ChartSignature::from_names(1, vec!["y".into()], odd_names("eta", q), &[])?;
    let ov = s0.extended(1);
    let mut y = SuperElement::monomial(&ov, 0, vec![-1], Rational::one())?;
    for d in deformation {
        let k = d.mask.count_ones();
        if k % 2 == 1 {
            return Err(Error::Parity(format!(
                "deformation term with {k} odd factors is odd"
            )));
        }
        if k < 2 {
            return Err(Error::InvalidArgument(
                "deformation terms must lie in J^2".into(),
            ));
        }
        y = y.checked_add(&SuperElement::monomial(
            &ov,
            d.mask,
            vec![d.exponent],
            d.coeff.clone(),
        )?)?;
    }
    let mut images = vec![y];
    for (i, &k) in weights.iter().enumerate() {
        images.push(SuperElement::monomial(
            &ov,
            1 << i,
            vec![-k],
            Rational::one(),
        )?);
    }
    let t = TransitionMap::new(&ov, &s1, images)?;
    let a = Atlas::new(name, vec![s0, s1], vec![t])?;
    a.ensure_valid()?;
    Ok(a)
}

/// `y = 1/x`, `eta_i = t_i/x²`.
pub fn fix_s2() -> Result<Atlas> {
    p1_family("fix_s2", &[2, 2], &[])
}

/// `y = 1/x + t1 t2/x³`, `eta_i = t_i/x²`.
pub fn fix_ns2() -> Result<Atlas> {
    p1_family(
        "fix_ns2",
        &[2, 2],
        &[Deformation::new(3, -3, Rational::one())],
    )
}

/// Weights `(1,1)` with the correction `t1 t2/x`; this one splits.
pub fn fix_w11() -> Result<Atlas> {
    p1_family(
        "fix_w11",
        &[1, 1],
        &[Deformation::new(3, -1, Rational::one())],
    )
}

fn aff2_with(name: &str, twist: bool) -> Result<Atlas> {
    let s0 = ChartSignature::new(0, &["x"], &["t1", "t2"], &[])?;
    let s1 = ChartSignature::new(1, &["y"], &["eta1", "eta2"], &[])?;
    let mut y = SuperElement::coordinate(&s0, 0);
    if twist {
        y = y.checked_add(&SuperElement::monomial(&s0, 3, vec![0], Rational::one())?)?;
    }
    let t = TransitionMap::new(
        &s0,
        &s1,
        vec![
            y,
            SuperElement::coordinate(&s0, 1),
            SuperElement::coordinate(&s0, 2),
        ],
    )?;
    Atlas::new(name, vec![s0, s1], vec![t])
}

/// Two copies of `C^{1|2}` glued by the identity.
pub fn aff2() -> Result<Atlas> {
    aff2_with("fix_aff2", false)
}

/// Two copies of `C^{1|2}` glued by `y = x + t1 t2`, `eta = t`.
pub fn aff2_twisted() -> Result<Atlas> {
    aff2_with("fix_aff2_twisted", true)
}

/// The single chart `C^{1|2}`.
pub fn c12() -> Result<Atlas> {
    Atlas::single_chart("c12", ChartSignature::new(0, &["x"], &["t1", "t2"], &[])?)
}

/// Reduced P¹: `y = 1/x`.
pub fn p1_reduced() -> Result<Atlas> {
    let s0 = ChartSignature::new(0, &["x"], &[], &[])?;
    let s1 = ChartSignature::new(1, &["y"], &[], &[])?;
    let ov = s0.extended(1);
    let t = TransitionMap::new(
        &ov,
        &s1,
        vec![SuperElement::monomial(&ov, 0, vec![-1], Rational::one())?],
    )?;
    Atlas::new("p1", vec![s0, s1], vec![t])
}

/// Reduced P² on the standard charts `(u1,u2)`, `(v0,v2)`, `(w0,w1)`.
pub fn p2_reduced() -> Result<Atlas> {
    let s0 = ChartSignature::new(0, &["u1", "u2"], &[], &[])?;
    let s1 = ChartSignature::new(1, &["v0", "v2"], &[], &[])?;
    let s2 = ChartSignature::new(2, &["w0", "w1"], &[], &[])?;
    let m = |s: &Arc<ChartSignature>, e: Vec<i32>| SuperElement::monomial(s, 0, e, Rational::one());
    let o01 = s0.extended(0b01);
    let o02 = s0.extended(0b10);
    let o12 = s1.extended(0b10);
    let t01 = TransitionMap::new(
        &o01,
        &s1,
        vec![m(&o01, vec![-1, 0])?, m(&o01, vec![-1, 1])?],
    )?;
    let t02 = TransitionMap::new(
        &o02,
        &s2,
        vec![m(&o02, vec![0, -1])?, m(&o02, vec![1, -1])?],
    )?;
    let t12 = TransitionMap::new(
        &o12,
        &s2,
        vec![m(&o12, vec![1, -1])?, m(&o12, vec![0, -1])?],
    )?;
    Atlas::new("p2", vec![s0, s1, s2], vec![t01, t02, t12])
}

/// `ΠT*X` for a reduced atlas: odd coordinates `d<name>` transforming like
/// the differentials of the even ones.
pub fn cotangent_split(reduced: &Atlas) -> Result<Atlas> {
    if reduced.q() != 0 {
        return Err(Error::InvalidArgument(
            "cotangent model needs a purely even atlas".into(),
        ));
    }
    let charts: Vec<Arc<ChartSignature>> = reduced
        .charts()
        .iter()
        .map(|c| {
            let even: Vec<String> = c.even_names().to_vec();
            let odd: Vec<String> = even.iter().map(|n| format!("d{n}")).collect();
            let inv: Vec<&str> = (0..c.p())
                .filter(|i| c.is_invertible(*i))
                .map(|i| c.coord_name(i))
                .collect();
            ChartSignature::from_names(c.chart(), even, odd, &inv)
        })
        .collect::<Result<_>>()?;
    let p = reduced.p();
    let mut transitions = Vec::new();
    for t in reduced.declared() {
        let src = charts[t.source()].extended(t.source_sig().invertible_mask());
        let mut images = Vec::with_capacity(2 * p);
        for k in 0..p {
            images.push(SuperElement::from_poly(
                &src,
                0,
                t.image(k).body().with_ctx(src.ctx())?,
            ));
        }
        let jac = t.body_jacobian();
        for row in &jac {
            let mut acc = SuperElement::zero(&src);
            for (i, f) in row.iter().enumerate() {
                acc = acc.checked_add(&SuperElement::from_poly(
                    &src,
                    1 << i,
                    f.with_ctx(src.ctx())?,
                ))?;
            }
            images.push(acc);
        }
        transitions.push(TransitionMap::new(&src, &charts[t.target()], images)?);
    }
    Atlas::new(format!("cot_{}", reduced.name()), charts, transitions)
}

/// A Čech 1-cochain of 1-forms `Σ w_μ dx_μ` on a reduced atlas, with
/// coefficients in the lower chart of each overlap.
#[derive(Clone, Debug)]
pub struct OmegaCocycle {
    pub reduced: Atlas,
    pub entries: BTreeMap<(usize, usize), Vec<LaurentPoly>>,
}

impl OmegaCocycle {
    pub fn zero(reduced: &Atlas) -> Result<OmegaCocycle> {
        let mut entries = BTreeMap::new();
        for (a, b) in reduced.overlaps() {
            let ctx = reduced.transition(a, b)?.source_sig().ctx().clone();
            entries.insert((a, b), vec![LaurentPoly::zero(&ctx); reduced.p()]);
        }
        Ok(OmegaCocycle {
            reduced: reduced.clone(),
            entries,
        })
    }

    /// `Ω¹` as the End-valued 1-forms of the trivial line bundle.
    pub fn sheaf(&self) -> Result<EndFormSheaf> {
        Ok(EndFormSheaf::new(&VectorBundle::trivial(&self.reduced, 1)?))
    }

    pub fn cochain(&self) -> Result<Cochain1> {
        let forms = self
            .entries
            .iter()
            .map(|(k, w)| (*k, w.iter().map(|f| vec![vec![f.clone()]]).collect()))
            .collect();
        self.sheaf()?.cochain(&forms)
    }

    pub fn from_cochain(reduced: &Atlas, c: &Cochain1) -> Result<OmegaCocycle> {
        let mut entries = BTreeMap::new();
        for (k, sec) in &c.entries {
            entries.insert(*k, sec.iter().map(|f| f.body()).collect());
        }
        Ok(OmegaCocycle {
            reduced: reduced.clone(),
            entries,
        })
    }

    pub fn is_cocycle(&self) -> Result<bool> {
        cocycle_check(&self.sheaf()?, &self.cochain()?)
    }

    pub fn is_zero(&self) -> bool {
        self.entries.values().all(|w| w.iter().all(|f| f.is_zero()))
    }

    pub fn checked_add(&self, other: &OmegaCocycle) -> Result<OmegaCocycle> {
        let sum = self.cochain()?.checked_add(&other.cochain()?)?;
        OmegaCocycle::from_cochain(&self.reduced, &sum)
    }
}

/// `d log(Z_β/Z_α)` on P²: `du1/u1`, `du2/u2`, `dv2/v2`.
pub fn p2_omega_generator() -> Result<OmegaCocycle> {
    let r = p2_reduced()?;
    let mut w = OmegaCocycle::zero(&r)?;
    let set = |w: &mut OmegaCocycle, k: (usize, usize), mu: usize, e: Vec<i32>| -> Result<()> {
        let ctx = w.reduced.transition(k.0, k.1)?.source_sig().ctx().clone();
        w.entries.get_mut(&k).expect("overlap")[mu] =
            LaurentPoly::monomial(&ctx, e, Rational::one())?;
        Ok(())
    };
    set(&mut w, (0, 1), 0, vec![-1, 0])?;
    set(&mut w, (0, 2), 1, vec![0, -1])?;
    set(&mut w, (1, 2), 1, vec![0, -1])?;
    Ok(w)
}

/// The coboundary of the 0-cochain `du1` on chart 0 of P².
pub fn p2_omega_coboundary() -> Result<OmegaCocycle> {
    let r = p2_reduced()?;
    let zero = OmegaCocycle::zero(&r)?;
    let sheaf = zero.sheaf()?;
    let mut c0 = Cochain0::default();
    let mut s = sheaf.zero_section(0);
    s[sheaf.slot(0, 0, 0)] = SuperElement::one(r.chart(0));
    c0.entries.insert(0, s);
    let d = crate::cech::coboundary(&sheaf, &c0)?;
    OmegaCocycle::from_cochain(&r, &d)
}

/// `ν = (Σ_μ w_μ θ_μ) · Σ_ν θ_ν ∂/∂x_ν` on a cotangent chart.
pub fn omega_dx_field(sig: &Arc<ChartSignature>, w: &[LaurentPoly]) -> Result<VectorField> {
    let p = sig.p();
    let mut form = SuperElement::zero(sig);
    for (mu, f) in w.iter().enumerate() {
        let ring = ChartSignature::join(form.sig(), &sig.extended(f.ctx().invertible_mask()))?;
        let term = SuperElement::from_poly(&ring, 1 << mu, f.with_ctx(ring.ctx())?);
        form = form.with_sig(&ring)?.checked_add(&term)?;
    }
    let dx = canonical_field(sig, FieldKind::DeRham)?;
    let ring = form.sig().clone();
    let comps = (0..2 * p)
        .map(|k| form.super_mul(&dx.component(k).with_sig(&ring)?))
        .collect::<Result<Vec<_>>>()?;
    VectorField::new(&ring, comps)
}

/// The cochain `{ω_αβ · d^X}` on the split cotangent model.
pub fn omega_dx_cochain(split: &Atlas, omega: &OmegaCocycle) -> Result<ObstructionCocycle> {
    let mut entries = BTreeMap::new();
    for (a, b) in split.overlaps() {
        let sig = split.transition(a, b)?.source_sig().clone();
        entries.insert((a, b), omega_dx_field(&sig, &omega.entries[&(a, b)])?);
    }
    Ok(ObstructionCocycle {
        split: split.clone(),
        entries,
    })
}

/// `X_ω`: split cotangent transitions composed with `exp(ω_αβ · d^X)`.
pub fn cotangent_build(reduced: &Atlas, omega: &OmegaCocycle) -> Result<Atlas> {
    reduced.ensure_valid()?;
    if !omega.is_cocycle()? {
        return Err(Error::NotACocycle(
            "omega fails the cocycle condition".into(),
        ));
    }
    let split = cotangent_split(reduced)?;
    if omega.is_zero() {
        return Ok(split);
    }
    let mut transitions = Vec::new();
    for t in split.declared() {
        let (a, b) = (t.source(), t.target());
        let nu = omega_dx_field(t.source_sig(), &omega.entries[&(a, b)])?;
        let g = exp_derivation(&nu)?;
        let images = t
            .images()
            .iter()
            .map(|f| g.apply(f))
            .collect::<Result<Vec<_>>>()?;
        transitions.push(TransitionMap::new(g.sig(), split.chart(b), images)?);
    }
    let out = Atlas::new(
        format!("{}_omega", split.name()),
        split.charts().to_vec(),
        transitions,
    )?;
    out.ensure_valid()?;
    Ok(out)
}

/// `push(d^X_β) − d^X_α` on every overlap.
#[derive(Clone, Debug)]
pub struct DeRhamLift {
    pub cocycle: BTreeMap<(usize, usize), VectorField>,
    pub zero: bool,
}

pub fn de_rham_family(a: &Atlas) -> Result<FieldFamily> {
    if a.p() != a.q() {
        return Err(Error::InvalidArgument(format!(
            "not a cotangent-type atlas: dimension ({}|{})",
            a.p(),
            a.q()
        )));
    }
    a.charts()
        .iter()
        .enumerate()
        .map(|(i, s)| Ok((i, canonical_field(s, FieldKind::DeRham)?)))
        .collect()
}

pub fn de_rham_lift_check(a: &Atlas) -> Result<DeRhamLift> {
    let fam = de_rham_family(a)?;
    let cocycle = crate::koszul::lift_defect(a, &fam)?;
    let zero = cocycle.values().all(|v| v.is_zero());
    Ok(DeRhamLift { cocycle, zero })
}

/// Which hypotheses of the splitting criterion hold for a candidate `γ`:
/// (i) `[γ_α, d^X_α] = ε_α` on every chart, (ii) `γ` is global.
#[derive(Clone, Debug)]
pub struct GammaProbe {
    pub bracket_is_euler: BTreeMap<usize, bool>,
    pub brackets: BTreeMap<usize, VectorField>,
    pub lift_defect: BTreeMap<(usize, usize), VectorField>,
    pub lifts: bool,
}

impl GammaProbe {
    pub fn failing_hypotheses(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        if self.bracket_is_euler.values().any(|b| !b) {
            out.push("(i) [gamma, d^X] = euler");
        }
        if !self.lifts {
            out.push("(ii) gamma lifts");
        }
        out
    }
}

/// The candidate `γ_α = Σ_μ x_μ ∂/∂θ_μ`.
pub fn gamma_candidate(a: &Atlas) -> Result<FieldFamily> {
    de_rham_family(a)?;
    let p = a.p();
    a.charts()
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let mut comps = vec![SuperElement::zero(s); 2 * p];
            for mu in 0..p {
                comps[p + mu] = SuperElement::coordinate(s, mu);
            }
            Ok((i, VectorField::new(s, comps)?))
        })
        .collect()
}

pub fn gamma_probe(a: &Atlas, gamma: &FieldFamily) -> Result<GammaProbe> {
    let dx = de_rham_family(a)?;
    let mut bracket_is_euler = BTreeMap::new();
    let mut brackets = BTreeMap::new();
    for (i, s) in a.charts().iter().enumerate() {
        let g = gamma
            .get(&i)
            .ok_or_else(|| Error::InvalidArgument(format!("no candidate on chart {i}")))?;
        let br = g.bracket(&dx[&i])?;
        bracket_is_euler.insert(i, br == canonical_field(s, FieldKind::Euler)?);
        brackets.insert(i, br);
    }
    let lift_defect = crate::koszul::lift_defect(a, gamma)?;
    let lifts = lift_defect.values().all(|v| v.is_zero());
    Ok(GammaProbe {
        bracket_is_euler,
        brackets,
        lift_defect,
        lifts,
    })
}

/// Whether the split model of `a` equals `a`.
pub fn is_own_split_model(a: &Atlas) -> Result<bool> {
    let s = split_model_of(a)?;
    let same = a
        .declared()
        .zip(s.declared())
        .all(|(x, y)| x.images() == y.images());
    Ok(same)
}
