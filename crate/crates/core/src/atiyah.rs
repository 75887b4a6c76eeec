//! Atiyah cocycles: `g⁻¹dg` for bundles on the reduced space, the affine
//! cocycle of a supermanifold from chart-flat connections, and its block
//! decomposition after restriction to the reduced space.

use std::collections::BTreeMap;
use std::fmt;

use crate::atlas::{reduced_data, split_model_of, Atlas};
use crate::cech::{
    class_equal, solve_coboundary, ClassDecision, Cochain1, EndFormSheaf, Solve, TensorSheaf,
    ValueSheaf, VectorBundle,
};
use crate::coeffring::{LaurentPoly, Rational};
use crate::connection::{transform, ChristoffelData, Tensor21};
use crate::error::{Error, Result};
use crate::grassmann::SuperElement;
use crate::obstruction::{
    obstruction_class, primary_obstruction, ClassVerdict, ObstructionCocycle,
};
use crate::svector::VectorField;

/// Constant relating the (odd, odd → even) block to the primary obstruction.
pub const OBSTRUCTION_BLOCK_CONSTANT: i64 = -1;

/// `g_αβ⁻¹ dg_αβ` on every overlap.
pub fn bundle_atiyah(bundle: &VectorBundle) -> Result<Cochain1> {
    EndFormSheaf::new(bundle).cochain(&bundle.atiyah_entries()?)
}

/// Whether a bundle admits a global connection, read off its Atiyah class.
pub fn bundle_atiyah_class(bundle: &VectorBundle, window: i32) -> Result<(Cochain1, Solve)> {
    let c = bundle_atiyah(bundle)?;
    let s = solve_coboundary(&EndFormSheaf::new(bundle), &c, window)?;
    Ok((c, s))
}

/// The tangent bundle of a purely even atlas: `g = ∂y/∂x`.
pub fn tangent_bundle(reduced: &Atlas) -> Result<VectorBundle> {
    let mut maps = BTreeMap::new();
    for t in reduced.declared() {
        maps.insert((t.source(), t.target()), t.body_jacobian());
    }
    VectorBundle::new("T", reduced, reduced.p(), maps)
}

/// The bundle `T_{X,−}` read off the odd linear parts `η = Gθ`.
pub fn odd_tangent_bundle(a: &Atlas) -> Result<VectorBundle> {
    let rd = reduced_data(a)?;
    VectorBundle::new("T-", &rd.atlas, a.q(), rd.odd_cotangent)
}

/// `O(n)` on P¹, with frame rule `s_1 = x^(-n) s_0`.
pub fn p1_line_bundle(reduced: &Atlas, n: i32) -> Result<VectorBundle> {
    let ctx = reduced.transition(0, 1)?.source_sig().ctx().clone();
    let mut maps = BTreeMap::new();
    maps.insert(
        (0, 1),
        vec![vec![LaurentPoly::monomial(
            &ctx,
            vec![-n],
            Rational::one(),
        )?]],
    );
    VectorBundle::new(format!("O({n})"), reduced, 1, maps)
}

/// Christoffel symbols of chart β's flat connection written in chart α.
pub fn affine_atiyah(a: &Atlas) -> Result<BTreeMap<(usize, usize), Tensor21>> {
    let mut out = BTreeMap::new();
    for (alpha, beta) in a.overlaps() {
        let g = transform(&ChristoffelData::flat(a.chart(beta)), a, alpha)?;
        out.insert((alpha, beta), g.gamma().clone());
    }
    Ok(out)
}

/// Filtration degree of a tensor term: `|I| + odd(A) + odd(B) − odd(C)`.
pub fn tensor_graded_part(t: &Tensor21, m: i32) -> Result<Tensor21> {
    let n = t.dim();
    let p = t.sig().p();
    let odd = |k: usize| (k >= p) as i32;
    let mut comps = Vec::with_capacity(n * n * n);
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                let td = m - odd(a) - odd(b) + odd(c);
                let v = t.get(a, b, c);
                comps.push(if td < 0 {
                    SuperElement::zero(v.sig())
                } else {
                    v.graded_part(td as usize)
                });
            }
        }
    }
    Tensor21::from_components(t.sig(), comps)
}

/// The affine cocycles of `a` and of its split model agree in degree 0, and
/// the split one has nothing else.
pub fn initial_form_relation(a: &Atlas) -> Result<bool> {
    let full = affine_atiyah(a)?;
    let split = affine_atiyah(&split_model_of(a)?)?;
    for (k, t) in &full {
        let s = &split[k];
        if tensor_graded_part(s, 0)? != *s {
            return Ok(false);
        }
        if tensor_graded_part(t, 0)? != *s {
            return Ok(false);
        }
    }
    Ok(true)
}

/// The three blocks of the restricted affine cocycle.
#[derive(Clone, Debug)]
pub struct AtiyahBlocks {
    pub tangent: VectorBundle,
    pub odd: VectorBundle,
    /// `A_μ[C][B] = Γ_{μB}^C` on the reduced space.
    pub evev: Cochain1,
    /// `A_μ[j][i] = Γ_{μθ_i}^{θ_j}` on the reduced space.
    pub mixed: Cochain1,
    /// `Σ_{i<j} Γ_{θ_iθ_j}^{x_μ} θ_iθ_j ∂/∂x_μ`.
    pub obstruction: ObstructionCocycle,
}

pub fn affine_atiyah_restricted(a: &Atlas) -> Result<AtiyahBlocks> {
    a.ensure_valid()?;
    let rd = reduced_data(a)?;
    let tangent = tangent_bundle(&rd.atlas)?;
    let odd = VectorBundle::new("T-", &rd.atlas, a.q(), rd.odd_cotangent.clone())?;
    let split = split_model_of(a)?;
    let p = a.p();
    let q = a.q();
    let full = affine_atiyah(a)?;
    let mut evev = BTreeMap::new();
    let mut mixed = BTreeMap::new();
    let mut obs = BTreeMap::new();
    for (&(alpha, beta), t) in &full {
        let body = |x: usize, y: usize, z: usize| t.get(x, y, z).body();
        evev.insert(
            (alpha, beta),
            (0..p)
                .map(|mu| {
                    (0..p)
                        .map(|c| (0..p).map(|b| body(mu, b, c)).collect())
                        .collect()
                })
                .collect::<Vec<Vec<Vec<LaurentPoly>>>>(),
        );
        mixed.insert(
            (alpha, beta),
            (0..p)
                .map(|mu| {
                    (0..q)
                        .map(|j| (0..q).map(|i| body(mu, p + i, p + j)).collect())
                        .collect()
                })
                .collect::<Vec<Vec<Vec<LaurentPoly>>>>(),
        );
        let ring = split.transition(alpha, beta)?.source_sig().clone();
        let mut comps = vec![SuperElement::zero(&ring); p + q];
        for (mu, comp) in comps.iter_mut().enumerate().take(p) {
            let mut acc = SuperElement::zero(&ring);
            for i in 0..q {
                for j in i + 1..q {
                    let f = body(p + i, p + j, mu).with_ctx(ring.ctx())?;
                    acc =
                        acc.checked_add(&SuperElement::from_poly(&ring, (1 << i) | (1 << j), f))?;
                }
            }
            *comp = acc;
        }
        obs.insert((alpha, beta), VectorField::new(&ring, comps)?);
    }
    Ok(AtiyahBlocks {
        evev: EndFormSheaf::new(&tangent).cochain(&evev)?,
        mixed: EndFormSheaf::new(&odd).cochain(&mixed)?,
        obstruction: ObstructionCocycle {
            split,
            entries: obs,
        },
        tangent,
        odd,
    })
}

/// Outcome of comparing the three blocks with independent computations.
#[derive(Clone, Debug)]
pub struct DecompositionReport {
    pub blocks: AtiyahBlocks,
    pub evev: ClassDecision,
    pub mixed: ClassDecision,
    /// The mixed block against `−transpose` of the dual bundle's cocycle.
    pub mixed_dual: ClassDecision,
    pub obstruction: ClassDecision,
    pub obstruction_class: ClassVerdict,
    pub pass: bool,
}

impl fmt::Display for DecompositionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let show = |d: &ClassDecision| match (d.equal, d.definitive) {
            (true, _) => "equal",
            (false, true) => "different",
            (false, false) => "undecided",
        };
        writeln!(f, "even block vs at T_X: {}", show(&self.evev))?;
        writeln!(f, "mixed block vs at T_X-: {}", show(&self.mixed))?;
        writeln!(
            f,
            "mixed block vs -transpose at T*_X-: {}",
            show(&self.mixed_dual)
        )?;
        writeln!(
            f,
            "obstruction block vs {} * eta: {}",
            OBSTRUCTION_BLOCK_CONSTANT,
            show(&self.obstruction)
        )?;
        writeln!(f, "obstruction block class: {}", self.obstruction_class)?;
        write!(
            f,
            "decomposition: {}",
            if self.pass { "PASS" } else { "FAIL" }
        )
    }
}

fn neg_transpose(sheaf: &EndFormSheaf, c: &Cochain1) -> Cochain1 {
    let n = sheaf.bundle().rank();
    let p = sheaf.base().p();
    let mut out = c.clone();
    for (k, sec) in &c.entries {
        let dst = out.entries.get_mut(k).expect("same keys");
        for mu in 0..p {
            for r in 0..n {
                for s in 0..n {
                    dst[sheaf.slot(mu, r, s)] = sec[sheaf.slot(mu, s, r)].neg();
                }
            }
        }
    }
    out
}

pub fn dw_verify(a: &Atlas, window: i32) -> Result<DecompositionReport> {
    let blocks = affine_atiyah_restricted(a)?;
    let tsheaf = EndFormSheaf::new(&blocks.tangent);
    let osheaf = EndFormSheaf::new(&blocks.odd);
    let evev = class_equal(
        &tsheaf,
        &blocks.evev,
        &bundle_atiyah(&blocks.tangent)?,
        window,
    )?;
    let mixed = class_equal(&osheaf, &blocks.mixed, &bundle_atiyah(&blocks.odd)?, window)?;
    let dual = blocks.odd.dual()?;
    let dual_at = neg_transpose(&osheaf, &bundle_atiyah(&dual)?);
    let mixed_dual = class_equal(&osheaf, &blocks.mixed, &dual_at, window)?;
    let eta = primary_obstruction(a)?;
    let osh = eta.sheaf();
    let target = eta.scale(&Rational::from(OBSTRUCTION_BLOCK_CONSTANT));
    let obstruction = class_equal(
        &osh,
        &blocks.obstruction.cochain(),
        &target.cochain(),
        window,
    )?;
    let obstruction_class = obstruction_class(&blocks.obstruction, window)?;
    let pass = evev.equal && mixed.equal && mixed_dual.equal && obstruction.equal;
    Ok(DecompositionReport {
        blocks,
        evev,
        mixed,
        mixed_dual,
        obstruction,
        obstruction_class,
        pass,
    })
}

/// Graded-symmetric part `(T_AB + (−1)^{|A||B|} T_BA)/2`.
pub fn symmetrize(t: &Tensor21) -> Result<Tensor21> {
    let n = t.dim();
    let p = t.sig().p();
    let half = Rational::new(1, 2);
    let mut comps = Vec::with_capacity(n * n * n);
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                let swapped = if a >= p && b >= p {
                    t.get(b, a, c).neg()
                } else {
                    t.get(b, a, c).clone()
                };
                comps.push(t.get(a, b, c).checked_add(&swapped)?.scale(&half));
            }
        }
    }
    Tensor21::from_components(t.sig(), comps)
}

/// Verdict on the affine class, with the constructed global connection
/// when it vanishes.
#[derive(Clone, Debug)]
pub struct AffineClass {
    pub verdict: ClassVerdict,
    pub connection: Option<BTreeMap<usize, ChristoffelData>>,
    pub window: i32,
}

pub fn affine_atiyah_class(a: &Atlas, window: i32) -> Result<AffineClass> {
    let sheaf = TensorSheaf::new(a);
    let mut c1 = Cochain1::default();
    for (k, t) in affine_atiyah(a)? {
        c1.entries.insert(k, t.components().to_vec());
    }
    let zero = c1.entries.values().all(|v| v.iter().all(|f| f.is_zero()));
    let s = solve_coboundary(&sheaf, &c1, window)?;
    let Some(c0) = s.cochain else {
        let verdict = if s.definitive {
            ClassVerdict::Nontrivial
        } else {
            ClassVerdict::Undecided
        };
        return Ok(AffineClass {
            verdict,
            connection: None,
            window,
        });
    };
    let mut out = BTreeMap::new();
    for (i, sec) in c0.entries {
        let t = symmetrize(&sheaf.to_tensor(i, &sec)?)?;
        let g = ChristoffelData::new(Tensor21::zero(a.chart(i)).checked_sub(&t)?)
            .map_err(|e| Error::Assertion(format!("constructed connection invalid: {e}")))?;
        out.insert(i, g);
    }
    Ok(AffineClass {
        verdict: if zero {
            ClassVerdict::Zero
        } else {
            ClassVerdict::Trivial
        },
        connection: Some(out),
        window,
    })
}

/// When the affine class vanishes, chart connections `flat_α − s_α` with
/// `δs` equal to the affine cocycle; these agree on overlaps.
pub fn global_connection(
    a: &Atlas,
    window: i32,
) -> Result<Option<BTreeMap<usize, ChristoffelData>>> {
    Ok(affine_atiyah_class(a, window)?.connection)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builders;
    use crate::connection::check_global;

    #[test]
    fn tangent_bundle_of_p1() {
        let r = builders::p1_reduced().unwrap();
        let t = tangent_bundle(&r).unwrap();
        let (c, s) = bundle_atiyah_class(&t, 12).unwrap();
        let sh = EndFormSheaf::new(&t);
        assert_eq!(sh.render(0, &c.entries[&(0, 1)]), "-2*x^-1*dx*E11");
        assert!(!s.solved() && s.definitive);
    }

    #[test]
    fn line_bundles() {
        let r = builders::p1_reduced().unwrap();
        for n in -3..=3 {
            let (c, s) = bundle_atiyah_class(&p1_line_bundle(&r, n).unwrap(), 12).unwrap();
            assert_eq!(s.solved(), n == 0, "n = {n}");
            if n != 0 {
                assert_eq!(c.entries[&(0, 1)][0].to_string(), format!("{}*x^-1", -n));
            }
        }
    }

    #[test]
    fn decomposition_on_p1_fixtures() {
        let s2 = dw_verify(&builders::fix_s2().unwrap(), 12).unwrap();
        assert!(s2.pass, "{s2}");
        assert_eq!(s2.obstruction_class, ClassVerdict::Zero);
        let ns2 = dw_verify(&builders::fix_ns2().unwrap(), 12).unwrap();
        assert!(ns2.pass, "{ns2}");
        assert_eq!(ns2.obstruction_class, ClassVerdict::Nontrivial);
        assert!(initial_form_relation(&builders::fix_ns2().unwrap()).unwrap());
    }

    #[test]
    fn twisted_affine_gluing_has_global_connection() {
        let a = builders::aff2_twisted().unwrap();
        let conns = global_connection(&a, 12).unwrap().expect("class vanishes");
        assert!(check_global(&conns, &a).passed());
        let plain = builders::aff2().unwrap();
        assert!(affine_atiyah(&plain).unwrap().values().all(|t| t.is_zero()));
    }

    #[test]
    fn single_chart_has_no_blocks() {
        let b = affine_atiyah_restricted(&builders::c12().unwrap()).unwrap();
        assert!(b.evev.is_zero() && b.mixed.is_zero() && b.obstruction.is_zero());
    }
}
