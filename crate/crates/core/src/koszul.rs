//! The Euler differential with staged lifting, the Koszul iteration to the
//! fixed point `∇_H H = H` of a global even connection, and the splitting
//! coordinates built from spectral projectors of `H`.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::atlas::{split_model_of, Atlas, TransitionMap, ValidationReport};
use crate::cech::{solve_coboundary, Cochain1, FieldSheaf};
use crate::coeffring::Rational;
use crate::connection::{check_global, ChristoffelData};
use crate::error::{Error, Result};
use crate::grassmann::{ChartSignature, SuperElement};
use crate::svector::{canonical_field, FieldKind, VectorField};

pub type FieldFamily = BTreeMap<usize, VectorField>;

/// The Euler field on every chart.
pub fn euler_family(a: &Atlas) -> Result<FieldFamily> {
    a.charts()
        .iter()
        .enumerate()
        .map(|(i, s)| Ok((i, canonical_field(s, FieldKind::Euler)?)))
        .collect()
}

/// `push(H_β) − H_α` on every overlap `α < β`.
pub fn lift_defect(
    a: &Atlas,
    fields: &FieldFamily,
) -> Result<BTreeMap<(usize, usize), VectorField>> {
    let mut out = BTreeMap::new();
    for (alpha, beta) in a.overlaps() {
        let hb = fields
            .get(&beta)
            .ok_or_else(|| Error::InvalidArgument(format!("no field on chart {beta}")))?;
        let ha = fields
            .get(&alpha)
            .ok_or_else(|| Error::InvalidArgument(format!("no field on chart {alpha}")))?;
        out.insert(
            (alpha, beta),
            a.push_field(hb, beta, alpha)?.checked_sub(ha)?,
        );
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Split,
    NonSplit,
    Undecided,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Split => "SPLIT",
            Verdict::NonSplit => "NONSPLIT",
            Verdict::Undecided => "UNDECIDED",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StageReport {
    pub degree: i32,
    pub solved: bool,
    /// Odd degrees vanish for even fields and need no solve.
    pub automatic: bool,
    pub definitive: bool,
    pub kernel_dim: usize,
}

#[derive(Clone, Debug)]
pub struct EulerDifferential {
    pub cocycle: BTreeMap<(usize, usize), VectorField>,
    pub stages: Vec<StageReport>,
    pub verdict: Verdict,
    pub window: i32,
    /// A global field with initial form ε, when the verdict is SPLIT.
    pub lift: Option<FieldFamily>,
}

pub fn euler_differential(a: &Atlas, window: i32) -> Result<EulerDifferential> {
    a.ensure_valid()?;
    let split = split_model_of(a)?;
    let mut h = euler_family(a)?;
    let mut e = lift_defect(a, &h)?;
    let cocycle = e.clone();
    for ((x, y), v) in &e {
        if !v.is_zero() && v.parity().map_or(true, |p| p.is_odd()) {
            return Err(Error::Assertion(format!(
                "Euler cocycle on ({x},{y}) is not even"
            )));
        }
        if !v.in_filtration(2) {
            return Err(Error::InvalidAtlas(format!(
                "overlap ({x},{y}) is not framing-adapted"
            )));
        }
    }
    let mut stages = Vec::new();
    let mut verdict = Verdict::Split;
    for m in 2..=a.q() as i32 {
        if m % 2 == 1 {
            if e.values().any(|v| !v.graded_part(m).is_zero()) {
                return Err(Error::Assertion(format!(
                    "odd degree {m} in an even cocycle"
                )));
            }
            stages.push(StageReport {
                degree: m,
                solved: true,
                automatic: true,
                definitive: true,
                kernel_dim: 0,
            });
            continue;
        }
        let part: BTreeMap<(usize, usize), VectorField> =
            e.iter().map(|(k, v)| (*k, v.graded_part(m))).collect();
        let sheaf = FieldSheaf::graded(&split, m);
        let s = solve_coboundary(&sheaf, &Cochain1::from_fields(part), window)?;
        let earlier_unique = stages.iter().all(|st| st.automatic || st.kernel_dim == 0);
        let report = StageReport {
            degree: m,
            solved: s.solved(),
            automatic: false,
            definitive: s.definitive,
            kernel_dim: s.kernel_dim,
        };
        stages.push(report);
        match s.cochain {
            Some(c0) => {
                for (chart, sec) in c0.entries {
                    let corr = VectorField::new(a.chart(chart), sec)?;
                    let cur = h.get_mut(&chart).expect("chart field");
                    *cur = cur.checked_sub(&corr)?;
                }
                e = lift_defect(a, &h)?;
                if let Some((k, _)) = e.iter().find(|(_, v)| !v.in_filtration(m + 1)) {
                    return Err(Error::Assertion(format!(
                        "stage {m} correction left degree {m} on {k:?}"
                    )));
                }
            }
            None => {
                verdict = if s.definitive && (m == 2 || earlier_unique) {
                    Verdict::NonSplit
                } else {
                    Verdict::Undecided
                };
                break;
            }
        }
    }
    let lift = if verdict == Verdict::Split {
        if e.values().any(|v| !v.is_zero()) {
            return Err(Error::Assertion(
                "all stages solved but the lift is not global".into(),
            ));
        }
        Some(h)
    } else {
        None
    };
    Ok(EulerDifferential {
        cocycle,
        stages,
        verdict,
        window,
        lift,
    })
}

/// A chart family with initial forms ε, compatible modulo `T^(order)`.
#[derive(Clone, Debug)]
pub struct LiftFamily {
    pub order: i32,
    pub fields: FieldFamily,
}

impl LiftFamily {
    /// `{ε_α}`, a lift modulo `T^(2)` on every atlas.
    pub fn euler(a: &Atlas) -> Result<LiftFamily> {
        Ok(LiftFamily {
            order: 2,
            fields: euler_family(a)?,
        })
    }

    pub fn check(&self, a: &Atlas) -> Result<()> {
        if self.order < 2 {
            return Err(Error::InvalidArgument(format!(
                "lift order {} is below 2",
                self.order
            )));
        }
        for (i, s) in a.charts().iter().enumerate() {
            let h = self
                .fields
                .get(&i)
                .ok_or_else(|| Error::InvalidArgument(format!("no field on chart {i}")))?;
            let eps = canonical_field(s, FieldKind::Euler)?;
            if !h.checked_sub(&eps)?.in_filtration(1) {
                return Err(Error::InvalidArgument(format!(
                    "field on chart {i} does not start with ε"
                )));
            }
        }
        for (k, v) in lift_defect(a, &self.fields)? {
            if !v.in_filtration(self.order) {
                return Err(Error::InvalidArgument(format!(
                    "family is not compatible modulo T^({}) on {k:?}",
                    self.order
                )));
            }
        }
        Ok(())
    }
}

/// `∇_H H − H`.
pub fn fixed_point_residual(conn: &ChristoffelData, h: &VectorField) -> Result<VectorField> {
    conn.covariant_derivative(h, h)?.checked_sub(h)
}

/// `L(v) = ∇_H v + ∇_v H − v`, the linearization of the residual at `H`.
fn linearized(conn: &ChristoffelData, h: &VectorField, v: &VectorField) -> Result<VectorField> {
    conn.covariant_derivative(h, v)?
        .checked_add(&conn.covariant_derivative(v, h)?)?
        .checked_sub(v)
}

/// One correction at order `ℓ`: `H − (2ℓR − L(R)) / (ℓ² − 1)` with
/// `R = ∇_H H − H`. On degree-`ℓ` fields `L` acts by `ℓ − 1` on ∂x and by
/// `ℓ + 1` on ∂θ, so this removes the degree-`ℓ` part of the residual.
pub fn koszul_step(conn: &ChristoffelData, h: &VectorField, l: i32) -> Result<VectorField> {
    if l <= 1 {
        return Err(Error::InvalidArgument(format!(
            "Koszul step needs order at least 2, got {l}"
        )));
    }
    let r = fixed_point_residual(conn, h)?;
    let lr = linearized(conn, h, &r)?;
    let num = r.scale(&Rational::from(2 * l as i64)).checked_sub(&lr)?;
    h.checked_sub(&num.scale(&Rational::new(1, (l * l - 1) as i64)))
}

#[derive(Clone, Debug)]
pub struct KoszulResult {
    pub fields: FieldFamily,
    /// Orders passed, with the number of corrections used at each.
    pub steps: Vec<(i32, usize)>,
}

fn ensure_connection(a: &Atlas, conns: &BTreeMap<usize, ChristoffelData>) -> Result<()> {
    let r = check_global(conns, a);
    if let Some(f) = r.failures().first() {
        return Err(Error::InvalidConnection(format!(
            "{}: {}",
            f.name, f.detail
        )));
    }
    Ok(())
}

/// Iterate from a lift family to the unique global `H` with `∇_H H = H`.
pub fn koszul_iterate(
    a: &Atlas,
    conns: &BTreeMap<usize, ChristoffelData>,
    start: Option<LiftFamily>,
) -> Result<KoszulResult> {
    ensure_connection(a, conns)?;
    let start = match start {
        Some(s) => s,
        None => LiftFamily::euler(a)?,
    };
    start.check(a)?;
    let q = a.q() as i32;
    let mut fields = start.fields;
    let mut steps = Vec::new();
    for l in start.order..=q {
        let mut used = 0;
        for (&i, h) in fields.iter_mut() {
            let conn = &conns[&i];
            let r = fixed_point_residual(conn, h)?;
            if !r.in_filtration(l) {
                return Err(Error::Assertion(format!(
                    "residual on chart {i} below order {l}"
                )));
            }
            let mut n = 0;
            while !fixed_point_residual(conn, h)?.in_filtration(l + 1) {
                if n > q as usize + 2 {
                    return Err(Error::Assertion(format!(
                        "order {l} correction does not converge on chart {i}"
                    )));
                }
                *h = koszul_step(conn, h, l)?;
                n += 1;
            }
            used = used.max(n);
        }
        for (k, v) in lift_defect(a, &fields)? {
            if !v.in_filtration(l + 1) {
                return Err(Error::Assertion(format!(
                    "family not compatible modulo T^({}) on {k:?}",
                    l + 1
                )));
            }
        }
        steps.push((l, used));
    }
    for (&i, h) in &fields {
        if !fixed_point_residual(&conns[&i], h)?.is_zero() {
            return Err(Error::Assertion(format!(
                "fixed point equation fails on chart {i}"
            )));
        }
    }
    if lift_defect(a, &fields)?.values().any(|v| !v.is_zero()) {
        return Err(Error::Assertion("Koszul field is not global".into()));
    }
    Ok(KoszulResult { fields, steps })
}

fn apply_factor(
    h: &VectorField,
    f: &SuperElement,
    shift: i64,
    scale: &Rational,
) -> Result<SuperElement> {
    Ok(h.apply(f)?
        .checked_sub(&f.scale(&Rational::from(shift)))?
        .scale(scale))
}

/// Spectral projector `P_m = Π_{j≠m} (H − j)/(m − j)`, `j = 0..=q`.
pub fn projector(h: &VectorField, m: usize, f: &SuperElement) -> Result<SuperElement> {
    let q = h.sig().q();
    let mut g = f.clone();
    for j in (0..=q).filter(|j| *j != m) {
        g = apply_factor(h, &g, j as i64, &Rational::new(1, m as i64 - j as i64))?;
    }
    Ok(g)
}

/// `Π_{j=1..q} (j − H) / q!`.
pub fn degree_zero_operator(h: &VectorField, f: &SuperElement) -> Result<SuperElement> {
    let q = h.sig().q();
    let mut g = f.clone();
    for j in 1..=q {
        g = apply_factor(h, &g, j as i64, &Rational::from(-1))?;
    }
    Ok(g.scale(&Rational::factorial(q as u32).recip()?))
}

/// `Π_{j=2..q} (j − H) / c`, with `c = (q − 1)!` by default.
pub fn degree_one_operator(
    h: &VectorField,
    f: &SuperElement,
    c: &Rational,
) -> Result<SuperElement> {
    let q = h.sig().q();
    let mut g = f.clone();
    for j in 2..=q {
        g = apply_factor(h, &g, j as i64, &Rational::from(-1))?;
    }
    Ok(g.scale(&c.recip()?))
}

/// Normalization making the degree-one operator the identity on `J/J²`.
pub fn degree_one_normalization(q: usize) -> Rational {
    Rational::factorial(q.saturating_sub(1) as u32)
}

/// The alternating factorial sum `Σ_{k<q} (−1)^k (q − k)!`.
pub fn alternating_factorial_sum(q: usize) -> Rational {
    let mut acc = Rational::zero();
    for k in 0..q {
        let t = Rational::factorial((q - k) as u32);
        if k % 2 == 0 {
            acc += &t;
        } else {
            acc -= &t;
        }
    }
    acc
}

/// `m·f − H(f)`.
pub fn shifted_operator(h: &VectorField, m: i64, f: &SuperElement) -> Result<SuperElement> {
    f.scale(&Rational::from(m)).checked_sub(&h.apply(f)?)
}

/// Monomials `x^a θ_I` with every exponent in `0..=max_exp`.
pub fn projector_test_set(sig: &Arc<ChartSignature>, max_exp: i32) -> Vec<SuperElement> {
    let p = sig.p();
    let mut exps = vec![vec![]];
    for _ in 0..p {
        exps = exps
            .into_iter()
            .flat_map(|e: Vec<i32>| {
                (0..=max_exp).map(move |k| {
                    let mut e = e.clone();
                    e.push(k);
                    e
                })
            })
            .collect();
    }
    let mut out = Vec::new();
    for e in exps {
        for mask in 0u32..1 << sig.q() {
            out.push(
                SuperElement::monomial(sig, mask, e.clone(), Rational::one()).expect("monomial"),
            );
        }
    }
    out
}

/// Idempotence, orthogonality and completeness of the projectors on a test set.
pub fn projector_checks(h: &VectorField, tests: &[SuperElement]) -> Result<ValidationReport> {
    let q = h.sig().q();
    let mut idem = true;
    let mut orth = true;
    let mut complete = true;
    let mut zero_op = true;
    let mut one_op = true;
    let c = degree_one_normalization(q);
    for f in tests {
        let parts: Vec<SuperElement> =
            (0..=q).map(|m| projector(h, m, f)).collect::<Result<_>>()?;
        let mut sum = SuperElement::zero(f.sig());
        for (m, pm) in parts.iter().enumerate() {
            sum = sum.checked_add(pm)?;
            for m2 in 0..=q {
                let pp = projector(h, m2, pm)?;
                if m2 == m {
                    idem &= &pp == pm;
                } else {
                    orth &= pp.is_zero();
                }
            }
        }
        complete &= &sum == f;
        zero_op &= degree_zero_operator(h, f)? == parts[0];
        if f.terms().keys().all(|m| m.count_ones() >= 1) && q >= 1 {
            one_op &= degree_one_operator(h, f, &c)? == parts[1];
        }
    }
    let mut r = ValidationReport::default();
    r.push("projectors idempotent", idem, "");
    r.push("projectors orthogonal", orth, "");
    r.push("projectors complete", complete, "");
    r.push("degree-zero operator equals P_0", zero_op, "");
    r.push("degree-one operator equals P_1 on J", one_op, "");
    Ok(r)
}

/// Invert a coordinate change `z ↦ κ(z)` that is the identity modulo nilpotents.
pub fn invert_near_identity(
    sig: &Arc<ChartSignature>,
    kappa: &[SuperElement],
) -> Result<Vec<SuperElement>> {
    let coords = SuperElement::coordinates(sig);
    let mut ring = sig.clone();
    for k in kappa {
        ring = ChartSignature::join(&ring, k.sig())?;
    }
    let nil: Vec<SuperElement> = kappa
        .iter()
        .zip(&coords)
        .map(|(k, z)| k.checked_sub(z))
        .collect::<Result<_>>()?;
    let mut inv = coords.clone();
    for _ in 0..=2 * sig.q() + 2 {
        let next: Vec<SuperElement> = coords
            .iter()
            .zip(&nil)
            .map(|(z, n)| z.checked_sub(&n.substitute_into(&inv, &ring)?))
            .collect::<Result<_>>()?;
        if next == inv {
            break;
        }
        inv = next;
    }
    for (k, z) in kappa.iter().zip(&coords) {
        if &k.substitute_into(&inv, &ring)? != z {
            return Err(Error::Assertion(
                "coordinate change is not invertible".into(),
            ));
        }
    }
    Ok(inv)
}

#[derive(Clone, Debug)]
pub struct SplittingResult {
    pub atlas: Atlas,
    /// New coordinates in terms of the old ones, per chart.
    pub coordinates: FieldCoords,
    pub checks: ValidationReport,
}

pub type FieldCoords = BTreeMap<usize, Vec<SuperElement>>;

/// New coordinates `x̃ = P_0(x)`, `θ̃ = P_1(θ)` on every chart and the
/// transitions rewritten in them.
pub fn splitting_map(a: &Atlas, h: &FieldFamily) -> Result<SplittingResult> {
    if lift_defect(a, h)?.values().any(|v| !v.is_zero()) {
        return Err(Error::InvalidArgument("field family is not global".into()));
    }
    let p = a.p();
    let mut checks = ValidationReport::default();
    let mut kappa = BTreeMap::new();
    let mut inverses = BTreeMap::new();
    for (i, s) in a.charts().iter().enumerate() {
        let hi = h
            .get(&i)
            .ok_or_else(|| Error::InvalidArgument(format!("no field on chart {i}")))?;
        let eps = canonical_field(s, FieldKind::Euler)?;
        if !hi.checked_sub(&eps)?.in_filtration(1) {
            return Err(Error::InvalidArgument(format!(
                "field on chart {i} does not start with ε"
            )));
        }
        let pc = projector_checks(hi, &projector_test_set(s, 2))?;
        if let Some(c) = pc.failures().first() {
            return Err(Error::Assertion(format!("chart {i}: {}", c.name)));
        }
        checks.extend(pc);
        let mut k = Vec::with_capacity(s.dim());
        for (idx, z) in SuperElement::coordinates(s).iter().enumerate() {
            k.push(projector(hi, if idx < p { 0 } else { 1 }, z)?);
        }
        let eigen = k
            .iter()
            .enumerate()
            .try_fold(true, |ok, (idx, z)| -> Result<bool> {
                let hz = hi.apply(z)?;
                Ok(ok && if idx < p { hz.is_zero() } else { &hz == z })
            })?;
        checks.push(
            format!("chart {i} new coordinates are H-eigenfunctions"),
            eigen,
            "",
        );
        inverses.insert(i, invert_near_identity(s, &k)?);
        kappa.insert(i, k);
    }
    let mut transitions = Vec::new();
    for t in a.declared() {
        let (alpha, beta) = (t.source(), t.target());
        let ring = t.source_sig().clone();
        let inv: Vec<SuperElement> = inverses[&alpha]
            .iter()
            .map(|f| f.with_sig(&ring))
            .collect::<Result<_>>()?;
        let mut images = Vec::with_capacity(a.p() + a.q());
        for kb in &kappa[&beta] {
            let pulled = t.pull(kb)?;
            let r = ChartSignature::join(&ring, pulled.sig())?;
            let inv_r: Vec<SuperElement> =
                inv.iter().map(|f| f.with_sig(&r)).collect::<Result<_>>()?;
            images.push(pulled.substitute_into(&inv_r, &r)?);
        }
        transitions.push(TransitionMap::new(&ring, a.chart(beta), images)?);
    }
    let out = Atlas::new(
        format!("{} (split)", a.name()),
        a.charts().to_vec(),
        transitions,
    )?;
    checks.push("output atlas is split", out.is_split(), "");
    if !out.is_split() {
        return Err(Error::Assertion(
            "splitting coordinates did not produce split transitions".into(),
        ));
    }
    checks.extend(out.validate());
    Ok(SplittingResult {
        atlas: out,
        coordinates: kappa,
        checks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builders;
    use crate::connection::transform;

    fn c12() -> Atlas {
        builders::c12().unwrap()
    }

    fn twisted_conn(a: &Atlas) -> BTreeMap<usize, ChristoffelData> {
        let mut m = BTreeMap::new();
        m.insert(0, ChristoffelData::flat(a.chart(0)));
        m.insert(
            1,
            transform(&ChristoffelData::flat(a.chart(0)), a, 1).unwrap(),
        );
        m
    }

    #[test]
    fn euler_differential_examples() {
        let s2 = euler_differential(&builders::fix_s2().unwrap(), 12).unwrap();
        assert_eq!(s2.verdict, Verdict::Split);
        assert!(s2.cocycle.values().all(|v| v.is_zero()));
        let ns2 = euler_differential(&builders::fix_ns2().unwrap(), 12).unwrap();
        assert_eq!(ns2.verdict, Verdict::NonSplit);
        assert_eq!(ns2.cocycle[&(0, 1)].to_string(), "2*x^-1*t1*t2*d/dx");
        let tw = euler_differential(&builders::aff2_twisted().unwrap(), 12).unwrap();
        assert_eq!(tw.verdict, Verdict::Split);
        assert!(!tw.cocycle[&(0, 1)].is_zero());
    }

    #[test]
    fn flat_single_chart_fixed_point_is_euler() {
        let a = c12();
        let mut conns = BTreeMap::new();
        conns.insert(0, ChristoffelData::flat(a.chart(0)));
        let r = koszul_iterate(&a, &conns, None).unwrap();
        assert_eq!(
            r.fields[&0],
            canonical_field(a.chart(0), FieldKind::Euler).unwrap()
        );
    }

    #[test]
    fn order_one_rejected() {
        let a = c12();
        let eps = canonical_field(a.chart(0), FieldKind::Euler).unwrap();
        assert!(koszul_step(&ChristoffelData::flat(a.chart(0)), &eps, 1).is_err());
    }

    #[test]
    fn twisted_gluing_splits_through_koszul() {
        let a = builders::aff2_twisted().unwrap();
        let conns = twisted_conn(&a);
        let r = koszul_iterate(&a, &conns, None).unwrap();
        assert_eq!(
            r.fields[&1].to_string(),
            "2*eta1*eta2*d/dy + 1*eta1*d/deta1 + 1*eta2*d/deta2"
        );
        let s = splitting_map(&a, &r.fields).unwrap();
        assert!(s.atlas.is_split());
        assert_eq!(
            split_model_of(&s.atlas)
                .unwrap()
                .transition(0, 1)
                .unwrap()
                .images(),
            s.atlas.transition(0, 1).unwrap().images()
        );
        assert_eq!(s.coordinates[&1][0].to_string(), "1*y - 1*eta1*eta2");
        assert_eq!(
            s.atlas.transition(0, 1).unwrap().image(0).to_string(),
            "1*x"
        );
    }

    #[test]
    fn alternating_normalization_fails() {
        assert_eq!(alternating_factorial_sum(3), Rational::from(5));
        assert_eq!(degree_one_normalization(3), Rational::from(2));
        let s = ChartSignature::new(0, &["x"], &["t1", "t2", "t3"], &[]).unwrap();
        let eps = canonical_field(&s, FieldKind::Euler).unwrap();
        let j = SuperElement::coordinate(&s, 1);
        let raw = degree_one_operator(&eps, &j, &Rational::one()).unwrap();
        assert_eq!(raw, j.scale(&Rational::from(2)));
        assert_ne!(
            degree_one_operator(&eps, &j, &alternating_factorial_sum(3)).unwrap(),
            j
        );
    }
}
