//! Acceptance run: one PASS/FAIL line per criterion with its runtime.
//! Built with `harness = false`, so the lines are always printed.

use std::collections::BTreeMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use supersplit::atiyah::{
    bundle_atiyah_class, dw_verify, global_connection, initial_form_relation, p1_line_bundle,
    tangent_bundle,
};
use supersplit::builders::{
    self, cotangent_build, cotangent_split, de_rham_lift_check, is_own_split_model,
    p2_omega_generator, p2_reduced, OmegaCocycle,
};
use supersplit::cech::{class_equal, h1_dimension, EndFormSheaf, SectionSheaf, ValueSheaf};
use supersplit::connection::{check_global, transform, ChristoffelData};
use supersplit::koszul::{
    alternating_factorial_sum, degree_one_normalization, degree_one_operator, euler_differential,
    fixed_point_residual, koszul_iterate, projector_checks, projector_test_set, shifted_operator,
    splitting_map, LiftFamily, Verdict,
};
use supersplit::obstruction::{
    euler_obstruction_compare, exp_derivation, log_automorphism, obstruction_class,
    primary_obstruction, ClassVerdict, ObstructionCocycle,
};
use supersplit::sma::{parse_atlas, parse_bytes, parse_document, render_atlas};
use supersplit::{
    atlas::split_model_of, canonical_field, Atlas, ChartSignature, FieldKind, Parity, Rational,
    SuperElement, VectorField,
};

type Check = std::result::Result<String, String>;

fn ensure(cond: bool, what: impl Into<String>) -> std::result::Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(what.into())
    }
}

fn ok<T, E: std::fmt::Display>(r: std::result::Result<T, E>) -> std::result::Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn sig(p: usize, q: usize) -> Arc<ChartSignature> {
    let even: Vec<String> = ["x", "z"][..p].iter().map(|s| s.to_string()).collect();
    let odd: Vec<String> = (1..=q).map(|i| format!("t{i}")).collect();
    ChartSignature::from_names(0, even, odd, &[]).unwrap()
}

fn mono(s: &Arc<ChartSignature>, mask: u32, e: Vec<i32>, c: i64) -> SuperElement {
    SuperElement::monomial(s, mask, e, Rational::from(c)).unwrap()
}

/// Monomials `x^e θ_I` with `0 ≤ e ≤ max_e` (one even coordinate).
fn basis(s: &Arc<ChartSignature>, max_e: i32) -> Vec<SuperElement> {
    let mut out = Vec::new();
    for e in 0..=max_e {
        for mask in 0u32..1 << s.q() {
            out.push(mono(s, mask, vec![e], 1));
        }
    }
    out
}

fn parity_of_mask(mask: u32) -> Parity {
    Parity::of_bit(mask.count_ones() % 2 == 1)
}

fn random_element(
    rng: &mut StdRng,
    s: &Arc<ChartSignature>,
    parity: Option<Parity>,
    min_deg: u32,
) -> SuperElement {
    let mut acc = SuperElement::zero(s);
    for _ in 0..rng.gen_range(1..=3) {
        let mut mask = rng.gen_range(0u32..1 << s.q());
        if let Some(p) = parity {
            if parity_of_mask(mask) != p || mask.count_ones() < min_deg {
                continue;
            }
        } else if mask.count_ones() < min_deg {
            continue;
        }
        if s.q() == 0 {
            mask = 0;
        }
        let e: Vec<i32> = (0..s.p()).map(|_| rng.gen_range(0..=2)).collect();
        let c = [-3i64, -2, -1, 1, 2, 3][rng.gen_range(0..6)];
        acc = acc.checked_add(&mono(s, mask, e, c)).unwrap();
    }
    acc
}

/// Random substitution: `x ↦ x + c + nilpotent even`, `θ ↦ aθ + odd of degree ≥ 2`.
fn random_substitution(rng: &mut StdRng, s: &Arc<ChartSignature>) -> Vec<SuperElement> {
    let mut images = Vec::new();
    for k in 0..s.dim() {
        let z = SuperElement::coordinate(s, k);
        let im = if k < s.p() {
            let shift = SuperElement::constant(s, Rational::from(rng.gen_range(-1i64..=1)));
            z.checked_add(&shift)
                .unwrap()
                .checked_add(&random_element(rng, s, Some(Parity::Even), 2))
                .unwrap()
        } else {
            let a = Rational::from([1i64, 2, -1][rng.gen_range(0..3)]);
            z.scale(&a)
                .checked_add(&random_element(rng, s, Some(Parity::Odd), 3))
                .unwrap()
        };
        images.push(im);
    }
    images
}

fn leibniz_holds(f: &SuperElement, g: &SuperElement, k: usize) -> bool {
    let s = f.sig();
    let lhs = f.super_mul(g).unwrap().d_coord(k);
    let sign_flip = k >= s.p() && f.is_odd() && !f.is_zero();
    let second = f.super_mul(&g.d_coord(k)).unwrap();
    let second = if sign_flip { second.neg() } else { second };
    let rhs = f
        .d_coord(k)
        .super_mul(g)
        .unwrap()
        .checked_add(&second)
        .unwrap();
    lhs == rhs
}

fn supercommutes(f: &SuperElement, g: &SuperElement) -> bool {
    let fg = f.super_mul(g).unwrap();
    let gf = g.super_mul(f).unwrap();
    if f.is_odd() && g.is_odd() {
        fg == gf.neg()
    } else {
        fg == gf
    }
}

fn compose(phi: &[SuperElement], psi: &[SuperElement]) -> Vec<SuperElement> {
    phi.iter().map(|im| im.substitute(psi).unwrap()).collect()
}

fn algebra_laws() -> Check {
    let mut checks = 0usize;
    let mut rng = StdRng::seed_from_u64(7);
    for q in 0..=3 {
        let s = sig(1, q);
        let b = basis(&s, 4);
        for f in &b {
            for g in &b {
                ensure(supercommutes(f, g), format!("supercommutativity {f} {g}"))?;
                for k in 0..s.dim() {
                    ensure(leibniz_holds(f, g, k), format!("Leibniz {f} {g} in {k}"))?;
                }
                checks += 1 + s.dim();
            }
        }
        if q > 0 {
            let gens: Vec<SuperElement> = (0u32..1 << q)
                .filter(|m| *m != 0)
                .map(|m| mono(&s, m, vec![0], 1))
                .collect();
            let mut tuples = vec![SuperElement::one(&s)];
            for _ in 0..=q {
                tuples = tuples
                    .iter()
                    .flat_map(|t| gens.iter().map(move |g| t.super_mul(g).unwrap()))
                    .collect();
            }
            ensure(
                tuples.iter().all(|t| t.is_zero()),
                format!("J^{} nonzero for q = {q}", q + 1),
            )?;
            checks += tuples.len();
        }
        for _ in 0..2 {
            let phi = random_substitution(&mut rng, &s);
            let psi = random_substitution(&mut rng, &s);
            let both = compose(&phi, &psi);
            for f in &b {
                let lhs = f.substitute(&phi).unwrap().substitute(&psi).unwrap();
                ensure(
                    lhs == f.substitute(&both).unwrap(),
                    format!("substitution functoriality on {f}"),
                )?;
                checks += 1;
            }
        }
    }
    for case in 0..1000 {
        let q = rng.gen_range(0..=3);
        let p = rng.gen_range(1..=2);
        let s = sig(p, q);
        let (f, g, h) = (
            random_element(&mut rng, &s, None, 0),
            random_element(&mut rng, &s, None, 0),
            random_element(&mut rng, &s, None, 0),
        );
        let fg_h = f.super_mul(&g).unwrap().super_mul(&h).unwrap();
        let f_gh = f.super_mul(&g.super_mul(&h).unwrap()).unwrap();
        ensure(fg_h == f_gh, format!("associativity, case {case}"))?;
        let dist = f.super_mul(&g.checked_add(&h).unwrap()).unwrap();
        ensure(
            dist == f
                .super_mul(&g)
                .unwrap()
                .checked_add(&f.super_mul(&h).unwrap())
                .unwrap(),
            format!("distributivity, case {case}"),
        )?;
        for pf in [Parity::Even, Parity::Odd] {
            for pg in [Parity::Even, Parity::Odd] {
                let (a, b) = (f.parity_part(pf), g.parity_part(pg));
                ensure(
                    supercommutes(&a, &b),
                    format!("supercommutativity, case {case}"),
                )?;
                let k = rng.gen_range(0..s.dim());
                ensure(leibniz_holds(&a, &b, k), format!("Leibniz, case {case}"))?;
            }
        }
        let phi = random_substitution(&mut rng, &s);
        let psi = random_substitution(&mut rng, &s);
        let fg = f.super_mul(&g).unwrap();
        ensure(
            fg.substitute(&phi).unwrap()
                == f.substitute(&phi)
                    .unwrap()
                    .super_mul(&g.substitute(&phi).unwrap())
                    .unwrap(),
            format!("substitution is multiplicative, case {case}"),
        )?;
        ensure(
            f.substitute(&phi).unwrap().substitute(&psi).unwrap()
                == f.substitute(&compose(&phi, &psi)).unwrap(),
            format!("substitution functoriality, case {case}"),
        )?;
        if q > 0 {
            let mut prod = SuperElement::one(&s);
            for _ in 0..=q {
                prod = prod
                    .super_mul(&random_element(&mut rng, &s, None, 1))
                    .unwrap();
            }
            ensure(prod.is_zero(), format!("J^(q+1) = 0, case {case}"))?;
        }
        checks += 1;
    }
    Ok(format!("{checks} exhaustive and 1000 random cases"))
}

/// Basis fields `x^e θ_I ∂_k` with `0 ≤ e ≤ max_e`.
fn field_basis(s: &Arc<ChartSignature>, max_e: i32) -> Vec<VectorField> {
    let mut out = Vec::new();
    for f in basis(s, max_e) {
        for k in 0..s.dim() {
            out.push(VectorField::single(s, k, f.clone()).unwrap());
        }
    }
    out
}

fn euler_properties() -> Check {
    let mut n = 0;
    for q in 1..=3 {
        let s = sig(1, q);
        let eps = canonical_field(&s, FieldKind::Euler).unwrap();
        let b = basis(&s, 2);
        for f in &b {
            let m = f.degree().unwrap();
            for k in 0..=q {
                let scaled = f.scale(&Rational::from(k as i64));
                ensure(
                    (eps.apply(f).unwrap() == scaled) == (k == m),
                    format!("ε on {f}, m = {k}"),
                )?;
            }
            for g in &b {
                let sum = f.checked_add(g).unwrap();
                if sum.is_zero() {
                    continue;
                }
                for k in 0..=q {
                    let eigen = eps.apply(&sum).unwrap() == sum.scale(&Rational::from(k as i64));
                    ensure(
                        eigen == (sum.graded_part(k) == sum),
                        format!("ε eigen test on {sum}"),
                    )?;
                    n += 1;
                }
            }
        }
        for v in field_basis(&s, 2) {
            let d = v.degree().unwrap();
            let br = eps.bracket(&v).unwrap();
            ensure(
                br == v.scale(&Rational::from(d as i64)),
                format!("[ε, {v}] ≠ {d}·v"),
            )?;
            n += 1;
        }
    }
    Ok(format!("{n} checks"))
}

fn splitting_detection() -> Check {
    let w = 12;
    let s2 = ok(euler_differential(&ok(builders::fix_s2())?, w))?;
    ensure(
        s2.verdict == Verdict::Split,
        format!("FIX-S2: {}", s2.verdict),
    )?;
    let ns2 = ok(euler_differential(&ok(builders::fix_ns2())?, w))?;
    ensure(
        ns2.verdict == Verdict::NonSplit,
        format!("FIX-NS2: {}", ns2.verdict),
    )?;
    ensure(
        ns2.stages.iter().all(|s| s.definitive || s.automatic),
        "FIX-NS2 not definitive",
    )?;
    ensure(
        ns2.cocycle[&(0, 1)].to_string() == "2*x^-1*t1*t2*d/dx",
        "FIX-NS2 cocycle",
    )?;
    let w11 = ok(euler_differential(&ok(builders::fix_w11())?, w))?;
    ensure(
        w11.verdict == Verdict::Split,
        format!("weights (1,1): {}", w11.verdict),
    )?;
    ensure(
        !w11.cocycle[&(0, 1)].is_zero(),
        "weights (1,1) cocycle should be a nonzero coboundary",
    )?;
    Ok("SPLIT / NONSPLIT (definitive) / SPLIT".into())
}

fn obstruction_golden() -> Check {
    let w = 12;
    let ns2 = ok(builders::fix_ns2())?;
    let eta = ok(primary_obstruction(&ns2))?;
    let split = eta.split.clone();
    let ring = ok(split.transition(0, 1))?.source_sig().clone();
    let expected = VectorField::single(&ring, 0, mono(&ring, 3, vec![-1], -1)).unwrap();
    let mut entries = BTreeMap::new();
    entries.insert((0, 1), expected);
    let target = ObstructionCocycle { split, entries };
    let d = ok(class_equal(
        &eta.sheaf(),
        &eta.cochain(),
        &target.cochain(),
        w,
    ))?;
    ensure(d.equal, "η differs from -x^-1 θ1θ2 ∂x")?;
    let class = ok(obstruction_class(&eta, w))?;
    ensure(
        class == ClassVerdict::Nontrivial,
        format!("FIX-NS2 class {class}"),
    )?;
    let s2 = ok(obstruction_class(
        &ok(primary_obstruction(&ok(builders::fix_s2())?))?,
        w,
    ))?;
    ensure(s2 == ClassVerdict::Zero, format!("FIX-S2 class {s2}"))?;
    Ok(format!("η = {}", eta.entries[&(0, 1)]))
}

fn twisted_c12_connection() -> std::result::Result<(Atlas, BTreeMap<usize, ChristoffelData>), String>
{
    let c12 = ok(builders::c12())?;
    let tw = ok(builders::aff2_twisted())?;
    let g = ok(transform(&ChristoffelData::flat(tw.chart(1)), &tw, 0))?;
    let mut conns = BTreeMap::new();
    conns.insert(0, g);
    Ok((c12, conns))
}

fn koszul_engine() -> Check {
    let c12 = ok(builders::c12())?;
    let s = c12.chart(0).clone();
    let eps = ok(canonical_field(&s, FieldKind::Euler))?;
    let mut flat = BTreeMap::new();
    flat.insert(0, ChristoffelData::flat(&s));
    let h = ok(koszul_iterate(&c12, &flat, None))?.fields[&0].clone();
    ensure(h == eps, format!("flat: H = {h}"))?;
    ensure(
        ok(fixed_point_residual(&flat[&0], &h))?.is_zero(),
        "flat residual",
    )?;

    let (c12, conns) = twisted_c12_connection()?;
    let h = ok(koszul_iterate(&c12, &conns, None))?.fields[&0].clone();
    let expected =
        ok(eps.checked_sub(&VectorField::single(&s, 0, mono(&s, 3, vec![0], 2)).unwrap()))?;
    ensure(h == expected, format!("twisted: H = {h}"))?;
    ensure(
        ok(fixed_point_residual(&conns[&0], &h))?.is_zero(),
        "twisted residual",
    )?;

    let start = ok(eps.checked_add(&VectorField::single(&s, 0, mono(&s, 3, vec![1], 5)).unwrap()))?;
    let mut fields = BTreeMap::new();
    fields.insert(0, start);
    let other = ok(koszul_iterate(
        &c12,
        &conns,
        Some(LiftFamily { order: 2, fields }),
    ))?
    .fields[&0]
        .clone();
    ensure(other == h, format!("second start gives {other}"))?;

    for a in [ok(builders::aff2())?, ok(builders::aff2_twisted())?] {
        let conns: BTreeMap<usize, ChristoffelData> = [
            (0, ChristoffelData::flat(a.chart(0))),
            (1, ok(transform(&ChristoffelData::flat(a.chart(0)), &a, 1))?),
        ]
        .into_iter()
        .collect();
        let k = ok(koszul_iterate(&a, &conns, None))?;
        let out = ok(splitting_map(&a, &k.fields))?;
        ensure(
            out.checks.passed(),
            format!("{}: splitting checks\n{}", a.name(), out.checks),
        )?;
        let model = ok(split_model_of(&out.atlas))?;
        let fixed = out
            .atlas
            .declared()
            .zip(model.declared())
            .all(|(x, y)| x.images() == y.images());
        ensure(
            out.atlas.is_split() && fixed,
            format!("{}: output not split", a.name()),
        )?;
    }
    Ok(format!("H_twisted = {h}"))
}

fn splitting_operators() -> Check {
    let mut n = 0;
    for q in 1..=3 {
        let s = sig(1, q);
        let eps = ok(canonical_field(&s, FieldKind::Euler))?;
        let r = ok(projector_checks(&eps, &projector_test_set(&s, 2)))?;
        ensure(r.passed(), format!("projectors, q = {q}\n{r}"))?;
        n += 1;
    }
    let (_, conns) = twisted_c12_connection()?;
    let c12 = ok(builders::c12())?;
    let h = ok(koszul_iterate(&c12, &conns, None))?.fields[&0].clone();
    let r = ok(projector_checks(&h, &projector_test_set(h.sig(), 2)))?;
    ensure(r.passed(), format!("projectors of H\n{r}"))?;

    let s3 = sig(1, 3);
    let eps3 = ok(canonical_field(&s3, FieldKind::Euler))?;
    let extra = VectorField::single(&s3, 0, mono(&s3, 3, vec![0], 1)).unwrap();
    let extra2 = VectorField::single(&s3, 1, mono(&s3, 0b111, vec![1], 3)).unwrap();
    let h3 = ok(ok(eps3.checked_add(&extra))?.checked_add(&extra2))?;
    for hh in [&h, &h3] {
        let sq = hh.sig();
        let mut rng = StdRng::seed_from_u64(11);
        let mut tests = basis(sq, 2);
        for _ in 0..30 {
            tests.push(random_element(&mut rng, sq, None, 0));
        }
        for j in tests.iter().filter(|j| !j.is_zero()) {
            let d = j.degree().unwrap();
            let inj = j.initial_form().unwrap();
            for m in 0..=sq.q() as i64 {
                let r = ok(shifted_operator(hh, m, j))?;
                ensure(
                    r.truncate(d).is_zero(),
                    format!("lower terms in Õ^({m})({j})"),
                )?;
                let want = inj.scale(&Rational::from(m - d as i64));
                ensure(
                    r.graded_part(d) == want,
                    format!("in(Õ^({m})({j})) ≠ (m − deg j)·in(j)"),
                )?;
                n += 1;
            }
        }
    }

    ensure(
        degree_one_normalization(3) == Rational::from(2),
        "(q−1)! at q = 3",
    )?;
    let alt = alternating_factorial_sum(3);
    ensure(alt == Rational::from(5), "alternating sum at q = 3")?;
    for k in 1..=3 {
        let theta = SuperElement::coordinate(&s3, k);
        let good = ok(degree_one_operator(&eps3, &theta, &Rational::from(2)))?;
        ensure(good == theta, "constant 2 preserves in(θ)")?;
        let bad = ok(degree_one_operator(&eps3, &theta, &alt))?;
        ensure(
            bad.initial_form().ok() != theta.initial_form().ok(),
            "constant 5 should fail",
        )?;
    }
    Ok(format!(
        "{n} initial-form checks; constant 2 passes, 5 fails"
    ))
}

fn exp_log() -> Check {
    let mut n = 0;
    for q in 1..=3 {
        let s = sig(1, q);
        for v in field_basis(&s, 2) {
            let Some(d) = v.degree() else { continue };
            if d < 1 || v.parity() != Some(Parity::Even) {
                continue;
            }
            let g = ok(exp_derivation(&v))?;
            let back = ok(log_automorphism(&g))?;
            ensure(back == v, format!("log exp {v} = {back}"))?;
            let again = ok(exp_derivation(&back))?;
            ensure(again.images() == g.images(), format!("exp log on exp({v})"))?;
            for m in 1..=q + 1 {
                ensure(
                    v.in_filtration(m as i32) == g.in_group(m),
                    format!("G^({m}) vs T^({m}) on {v}"),
                )?;
            }
            ensure(g.level() == Some(d as usize), format!("level of exp({v})"))?;
            n += 1;
        }
    }
    Ok(format!("{n} generators"))
}

fn cohomology() -> Check {
    let p1 = ok(builders::p1_reduced())?;
    let mut dims = Vec::new();
    for n in -4..=2 {
        let sh = SectionSheaf::new(&ok(p1_line_bundle(&p1, n))?);
        let h = ok(h1_dimension(&sh, 12))?;
        ensure(h.definitive, format!("O({n}) not definitive"))?;
        ensure(
            h.dim == (-n - 1).max(0) as usize,
            format!("h1(O({n})) = {}", h.dim),
        )?;
        dims.push(format!("{n}:{}", h.dim));
    }
    Ok(format!("h1(O(n)) = {}", dims.join(" ")))
}

fn atiyah_suite() -> Check {
    let p1 = ok(builders::p1_reduced())?;
    let t = ok(tangent_bundle(&p1))?;
    let (c, s) = ok(bundle_atiyah_class(&t, 12))?;
    ensure(!s.solved() && s.definitive, "at T_P1 should be nontrivial")?;
    let entry = EndFormSheaf::new(&t).render(0, &c.entries[&(0, 1)]);
    ensure(entry == "-2*x^-1*dx*E11", format!("at T_P1 entry {entry}"))?;
    for n in -3..=3 {
        let (_, s) = ok(bundle_atiyah_class(&ok(p1_line_bundle(&p1, n))?, 12))?;
        ensure(s.solved() == (n == 0), format!("at O({n})"))?;
        ensure(s.solved() || s.definitive, format!("at O({n}) undecided"))?;
    }
    for a in [ok(builders::aff2())?, ok(builders::aff2_twisted())?] {
        let conns = ok(global_connection(&a, 12))?
            .ok_or_else(|| format!("{}: no global connection", a.name()))?;
        let r = check_global(&conns, &a);
        ensure(r.passed(), format!("{}: {r}", a.name()))?;
    }
    Ok(format!("at T_P1 = {entry}"))
}

fn fix_cot() -> std::result::Result<Atlas, String> {
    ok(cotangent_build(
        &ok(p2_reduced())?,
        &ok(p2_omega_generator())?,
    ))
}

fn decomposition() -> Check {
    let w = 6;
    let s2 = ok(dw_verify(&ok(builders::fix_s2())?, w))?;
    ensure(
        s2.pass && s2.obstruction_class == ClassVerdict::Zero,
        format!("FIX-S2\n{s2}"),
    )?;
    let ns2 = ok(builders::fix_ns2())?;
    let r = ok(dw_verify(&ns2, w))?;
    ensure(
        r.pass && r.obstruction_class == ClassVerdict::Nontrivial,
        format!("FIX-NS2\n{r}"),
    )?;
    let cot = ok(dw_verify(&fix_cot()?, w))?;
    ensure(
        cot.pass && cot.obstruction_class == ClassVerdict::Nontrivial,
        format!("FIX-COT\n{cot}"),
    )?;
    ensure(
        ok(initial_form_relation(&ns2))?,
        "initial-form relation on FIX-NS2",
    )?;
    let s2_affine = ok(supersplit::atiyah::affine_atiyah(&ok(builders::fix_s2())?))?;
    let ns2_split = ok(supersplit::atiyah::affine_atiyah(&ok(split_model_of(
        &ns2,
    ))?))?;
    ensure(
        s2_affine == ns2_split,
        "FIX-S2 is the split model of FIX-NS2",
    )?;
    Ok("FIX-S2, FIX-NS2, FIX-COT pass".into())
}

fn cotangent_appendix() -> Check {
    let w = 6;
    let r = ok(p2_reduced())?;
    let x = fix_cot()?;
    let e = ok(euler_differential(&x, w))?;
    ensure(
        e.verdict == Verdict::NonSplit,
        format!("X_ω: {}", e.verdict),
    )?;
    let zero = ok(OmegaCocycle::zero(&r))?;
    let x0 = ok(cotangent_build(&r, &zero))?;
    let model = ok(cotangent_split(&r))?;
    let same = x0
        .declared()
        .zip(model.declared())
        .all(|(a, b)| a.images() == b.images());
    ensure(
        same && ok(is_own_split_model(&x0))?,
        "ω = 0 is not the split model",
    )?;
    let dr = ok(de_rham_lift_check(&x))?;
    ensure(dr.zero, "de Rham lift cocycle is nonzero")?;
    Ok("X_ω NONSPLIT; X_0 split; d^X lifts".into())
}

fn euler_vs_obstruction() -> Check {
    let w = 6;
    for a in [ok(builders::fix_ns2())?, fix_cot()?] {
        let r = ok(euler_obstruction_compare(&a, w))?;
        ensure(
            r.pass && r.definitive,
            format!("{}: compare failed", a.name()),
        )?;
        ensure(
            r.constant == Some(Rational::from(-2)),
            format!("{}: constant {:?}", a.name(), r.constant),
        )?;
    }
    Ok("constant -2 on FIX-NS2 and FIX-COT".into())
}

fn fixtures_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn cli_and_format() -> Check {
    let mut goldens = 0;
    let mut texts = Vec::new();
    for entry in ok(std::fs::read_dir(fixtures_dir()))? {
        let path = ok(entry)?.path();
        if path.extension().and_then(|e| e.to_str()) != Some("sma") {
            continue;
        }
        let text = ok(std::fs::read_to_string(&path))?;
        let doc = ok(parse_document(&text))?;
        ensure(
            doc.to_string() == text,
            format!("{} not canonical", path.display()),
        )?;
        if doc.blocks_of("chart").next().is_some() {
            ensure(
                render_atlas(&ok(parse_atlas(&text))?) == text,
                format!("{} round trip", path.display()),
            )?;
        }
        texts.push(text);
        goldens += 1;
    }
    let ns2 = ok(parse_atlas(&ok(std::fs::read_to_string(
        fixtures_dir().join("fix_ns2.sma"),
    ))?))?;
    let built = ok(builders::fix_ns2())?;
    ensure(
        render_atlas(&ns2) == render_atlas(&built),
        "FIX-NS2 golden differs from builder",
    )?;

    let mut rng = StdRng::seed_from_u64(13);
    let alphabet = b"[]()=+-*^/# \n\tdxyzt0123456789etachartoverlapevenoddinvertiblegammaentry";
    let mut panics = 0;
    for i in 0..10_000 {
        let len = rng.gen_range(0..160);
        let bytes: Vec<u8> = match i % 3 {
            0 => (0..len).map(|_| rng.gen()).collect(),
            1 => (0..len)
                .map(|_| alphabet[rng.gen_range(0..alphabet.len())])
                .collect(),
            _ => {
                let mut b = texts[rng.gen_range(0..texts.len())].clone().into_bytes();
                for _ in 0..rng.gen_range(1..4) {
                    if b.is_empty() {
                        break;
                    }
                    let at = rng.gen_range(0..b.len());
                    b[at] = alphabet[rng.gen_range(0..alphabet.len())];
                }
                b
            }
        };
        let r = catch_unwind(AssertUnwindSafe(|| {
            if let Ok(doc) = parse_bytes(&bytes) {
                let _ = supersplit::sma::atlas_from_document(&doc);
            }
        }));
        if r.is_err() {
            panics += 1;
        }
    }
    ensure(panics == 0, format!("{panics} parser panics"))?;

    let f = |n: &str| fixtures_dir().join(n).to_string_lossy().into_owned();
    let cases: [(Vec<String>, i32); 5] = [
        (vec!["validate".into(), f("fix_ns2.sma")], 0),
        (vec!["euler-differential".into(), f("fix_ns2.sma")], 1),
        (vec!["obstruction".into(), f("fix_s2.sma")], 0),
        (vec!["validate".into(), f("missing.sma")], 2),
        (
            vec![
                "--window".into(),
                "4".into(),
                "euler-differential".into(),
                f("undecided_p1xc.sma"),
            ],
            3,
        ),
    ];
    for (args, code) in cases {
        let mut argv = vec!["supersplit".to_string()];
        argv.extend(args.iter().cloned());
        let o = supersplit_cli::run_command(argv);
        ensure(
            o.code == code,
            format!("{args:?}: exit {} (want {code})", o.code),
        )?;
    }
    let o = supersplit_cli::run_command(["supersplit", "euler-differential", &f("fix_ns2.sma")]);
    ensure(
        o.stdout.contains("entry = 2*x^-1*t1*t2*d/dx") && o.stdout.contains("NONSPLIT"),
        "euler-differential output",
    )?;
    let o = supersplit_cli::run_command(["supersplit", "atiyah", "--decompose", &f("fix_s2.sma")]);
    ensure(
        o.stdout.contains("PASS") && o.stdout.contains("class: ZERO"),
        "atiyah --decompose output",
    )?;
    Ok(format!(
        "{goldens} goldens; 10000 fuzz inputs; exit codes 0-3"
    ))
}

fn main() {
    let criteria: Vec<(&str, u64, fn() -> Check)> = vec![
        ("algebra laws", 5, algebra_laws),
        ("Euler vector field properties", 1, euler_properties),
        ("splitting detection", 5, splitting_detection),
        ("primary obstruction golden", 5, obstruction_golden),
        ("Koszul engine", 10, koszul_engine),
        ("splitting-operator cross-checks", 5, splitting_operators),
        ("exp/log and filtrations", 5, exp_log),
        ("line bundle cohomology on P1", 5, cohomology),
        ("Atiyah classes", 10, atiyah_suite),
        ("Atiyah class decomposition", 60, decomposition),
        ("cotangent supermanifolds over P2", 60, cotangent_appendix),
        (
            "Euler cocycle vs primary obstruction",
            30,
            euler_vs_obstruction,
        ),
        ("SMA format and CLI", 30, cli_and_format),
    ];
    std::panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (i, (name, limit, f)) in criteria.into_iter().enumerate() {
        let t0 = Instant::now();
        let r = catch_unwind(f).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            Err(format!("panicked: {msg}"))
        });
        let dt = t0.elapsed();
        let over = dt > Duration::from_secs(limit);
        let (tag, detail) = match (&r, over) {
            (Ok(d), false) => ("PASS", d.clone()),
            (Ok(d), true) => ("FAIL", format!("{d}; over the time limit")),
            (Err(e), _) => ("FAIL", e.clone()),
        };
        if tag == "FAIL" {
            failed += 1;
        }
        println!(
            "{tag} [{:>2}] {name} ({:.2} s, limit {limit} s): {}",
            i + 1,
            dt.as_secs_f64(),
            detail.lines().next().unwrap_or("")
        );
        if tag == "FAIL" {
            for l in detail.lines().skip(1) {
                println!("        {l}");
            }
        }
    }
    let _ = std::panic::take_hook();
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
    println!("all 13 criteria passed");
}
