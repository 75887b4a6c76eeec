//! Unipotent chart automorphisms, the finite exp/log correspondence with
//! vector fields of positive filtration degree, and the primary obstruction.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::atlas::{split_model_of, Atlas};
use crate::cech::{
    class_equal, proportionality, solve_coboundary, Cochain1, FieldSheaf, ValueSheaf,
};
use crate::coeffring::Rational;
use crate::error::{Error, Result};
use crate::grassmann::{ChartSignature, SuperElement};
use crate::koszul::{euler_family, lift_defect};
use crate::linalg;
use crate::svector::VectorField;

/// An even algebra automorphism of a chart ring, given by the images of the
/// coordinates. Acts on functions by substitution.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChartAutomorphism {
    sig: Arc<ChartSignature>,
    images: Vec<SuperElement>,
}

fn join_all(sig: &Arc<ChartSignature>, items: &[SuperElement]) -> Result<Arc<ChartSignature>> {
    let mut ring = sig.clone();
    for x in items {
        ring = ChartSignature::join(&ring, x.sig())?;
    }
    Ok(ring)
}

impl ChartAutomorphism {
    pub fn identity(sig: &Arc<ChartSignature>) -> ChartAutomorphism {
        ChartAutomorphism {
            sig: sig.clone(),
            images: SuperElement::coordinates(sig),
        }
    }

    pub fn new(sig: &Arc<ChartSignature>, images: Vec<SuperElement>) -> Result<ChartAutomorphism> {
        if images.len() != sig.dim() {
            return Err(Error::InvalidArgument(format!(
                "automorphism needs {} images, got {}",
                sig.dim(),
                images.len()
            )));
        }
        let ring = join_all(sig, &images)?;
        let images: Vec<SuperElement> = images
            .iter()
            .map(|x| x.with_sig(&ring))
            .collect::<Result<_>>()?;
        for (k, im) in images.iter().enumerate() {
            let ok = if k < ring.p() {
                im.is_even()
            } else {
                im.is_odd()
            };
            if !ok {
                return Err(Error::Parity(format!(
                    "image of `{}` has the wrong parity",
                    ring.coord_name(k)
                )));
            }
        }
        Ok(ChartAutomorphism { sig: ring, images })
    }

    pub fn sig(&self) -> &Arc<ChartSignature> {
        &self.sig
    }

    pub fn images(&self) -> &[SuperElement] {
        &self.images
    }

    pub fn apply(&self, f: &SuperElement) -> Result<SuperElement> {
        let ring = ChartSignature::join(&self.sig, f.sig())?;
        f.substitute_into(&self.images, &ring)
    }

    /// The automorphism `f ↦ self(other(f))`.
    pub fn compose(&self, other: &ChartAutomorphism) -> Result<ChartAutomorphism> {
        let images = other
            .images
            .iter()
            .map(|im| self.apply(im))
            .collect::<Result<Vec<_>>>()?;
        ChartAutomorphism::new(&self.sig, images)
    }

    /// Membership in `G^(m)`: `g(x) − x ∈ J^m` and `g(θ) − θ ∈ J^(m+1)`.
    pub fn in_group(&self, m: usize) -> bool {
        let p = self.sig.p();
        SuperElement::coordinates(&self.sig)
            .iter()
            .enumerate()
            .all(|(k, z)| {
                let need = if k < p { m } else { m + 1 };
                match self.images[k].checked_sub(z) {
                    Ok(d) => d
                        .terms()
                        .keys()
                        .all(|mask| mask.count_ones() as usize >= need),
                    Err(_) => false,
                }
            })
    }

    /// Largest `m ≤ q + 1` with membership in `G^(m)`, if any.
    pub fn level(&self) -> Option<usize> {
        (0..=self.sig.q() + 1).rev().find(|&m| self.in_group(m))
    }

    pub fn is_identity(&self) -> bool {
        self.images == SuperElement::coordinates(&self.sig)
    }
}

impl fmt::Display for ChartAutomorphism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, im) in self.images.iter().enumerate() {
            if k > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{} -> {}", self.sig.coord_name(k), im)?;
        }
        Ok(())
    }
}

/// `exp(v) = Σ vⁿ/n!` for an even field of filtration degree at least 1.
pub fn exp_derivation(v: &VectorField) -> Result<ChartAutomorphism> {
    if !v.in_filtration(1) {
        return Err(Error::InvalidArgument(
            "exponential needs a field of filtration degree at least 1".into(),
        ));
    }
    if !v.is_zero() && !v.parity().is_some_and(|p| !p.is_odd()) {
        return Err(Error::Parity("exponential needs an even field".into()));
    }
    let sig = v.sig().clone();
    let limit = 2 * sig.q() + 3;
    let mut images = Vec::with_capacity(sig.dim());
    for z in SuperElement::coordinates(&sig) {
        let mut acc = z.clone();
        let mut cur = z;
        let mut n = 1;
        loop {
            cur = v.apply(&cur)?.scale(&Rational::new(1, n));
            if cur.is_zero() {
                break;
            }
            acc = acc.checked_add(&cur)?;
            n += 1;
            if n as usize > limit {
                return Err(Error::Assertion(
                    "exponential series did not terminate".into(),
                ));
            }
        }
        images.push(acc);
    }
    ChartAutomorphism::new(&sig, images)
}

/// `log g = Σ (−1)^(k+1) (g − 1)^k / k` for `g ∈ G^(1)`.
pub fn log_automorphism(g: &ChartAutomorphism) -> Result<VectorField> {
    if !g.in_group(1) {
        return Err(Error::InvalidArgument(
            "logarithm needs an automorphism in G^(1)".into(),
        ));
    }
    let sig = g.sig().clone();
    let limit = 2 * sig.q() + 3;
    let mut comps = Vec::with_capacity(sig.dim());
    for z in SuperElement::coordinates(&sig) {
        let mut acc = SuperElement::zero(&sig);
        let mut cur = z;
        let mut k: i64 = 1;
        loop {
            cur = g.apply(&cur)?.checked_sub(&cur)?;
            if cur.is_zero() {
                break;
            }
            let c = Rational::new(if k % 2 == 1 { 1 } else { -1 }, k);
            acc = acc.checked_add(&cur.scale(&c))?;
            k += 1;
            if k as usize > limit {
                return Err(Error::Assertion(
                    "logarithm series did not terminate".into(),
                ));
            }
        }
        comps.push(acc);
    }
    let ring = join_all(&sig, &comps)?;
    let comps = comps
        .iter()
        .map(|c| c.with_sig(&ring))
        .collect::<Result<Vec<_>>>()?;
    VectorField::new(&ring, comps)
}

/// Degree-2 cocycle of fields `Σ f θ_iθ_j ∂/∂x`, one per declared overlap,
/// with values on the split model.
#[derive(Clone, Debug)]
pub struct ObstructionCocycle {
    pub split: Atlas,
    pub entries: BTreeMap<(usize, usize), VectorField>,
}

impl ObstructionCocycle {
    pub fn sheaf(&self) -> FieldSheaf {
        FieldSheaf::graded_even_block(&self.split, 2)
    }

    pub fn cochain(&self) -> Cochain1 {
        Cochain1::from_fields(self.entries.clone())
    }

    pub fn is_zero(&self) -> bool {
        self.entries.values().all(|v| v.is_zero())
    }

    pub fn scale(&self, c: &Rational) -> ObstructionCocycle {
        ObstructionCocycle {
            split: self.split.clone(),
            entries: self.entries.iter().map(|(k, v)| (*k, v.scale(c))).collect(),
        }
    }
}

impl fmt::Display for ObstructionCocycle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for ((a, b), v) in &self.entries {
            writeln!(f, "({a},{b}): {v}")?;
        }
        Ok(())
    }
}

/// Comparison automorphism `c_αβ = φ̂_αβ^(-1) ∘ φ_αβ`, on the lower chart.
pub fn comparison_automorphism(
    a: &Atlas,
    split: &Atlas,
    alpha: usize,
    beta: usize,
) -> Result<ChartAutomorphism> {
    let t = a.transition(alpha, beta)?;
    let psi_hat = split.transition(beta, alpha)?;
    let images = psi_hat
        .images()
        .iter()
        .map(|f| t.pull(f))
        .collect::<Result<Vec<_>>>()?;
    ChartAutomorphism::new(t.source_sig(), images)
}

/// `η_αβ`: the degree-2 part of `log c_αβ`, projected to the ∂x block.
pub fn primary_obstruction(a: &Atlas) -> Result<ObstructionCocycle> {
    let split = split_model_of(a)?;
    let mut entries = BTreeMap::new();
    for (alpha, beta) in a.overlaps() {
        let c = comparison_automorphism(a, &split, alpha, beta)?;
        if !c.in_group(2) {
            return Err(Error::InvalidAtlas(format!(
                "overlap ({alpha},{beta}) is not framing-adapted"
            )));
        }
        let eta = log_automorphism(&c)?.graded_part(2).even_block();
        entries.insert((alpha, beta), eta);
    }
    let out = ObstructionCocycle { split, entries };
    let sheaf = out.sheaf();
    if !crate::cech::cocycle_check(&sheaf, &out.cochain())? {
        return Err(Error::Assertion(
            "primary obstruction fails the cocycle condition".into(),
        ));
    }
    Ok(out)
}

/// The same cocycle read off the transitions: `η^μ = Σ_K (∂x_μ/∂y_K) φ_K^(2)`.
pub fn obstruction_from_jacobian(a: &Atlas) -> Result<ObstructionCocycle> {
    let split = split_model_of(a)?;
    let p = a.p();
    let mut entries = BTreeMap::new();
    for (alpha, beta) in a.overlaps() {
        let t = a.transition(alpha, beta)?;
        let jinv = linalg::laurent_inverse(&t.body_jacobian())?;
        let ring = t.source_sig().clone();
        let mut comps = vec![SuperElement::zero(&ring); p + a.q()];
        for (mu, comp) in comps.iter_mut().enumerate().take(p) {
            let mut acc = SuperElement::zero(&ring);
            for k in 0..p {
                let phi2 = t.image(k).graded_part(2);
                let term = phi2.mul_poly(&jinv[mu][k].with_ctx(ring.ctx())?)?;
                acc = acc.checked_add(&term)?;
            }
            *comp = acc;
        }
        entries.insert((alpha, beta), VectorField::new(&ring, comps)?);
    }
    Ok(ObstructionCocycle { split, entries })
}

/// Class verdict for a cocycle of the obstruction sheaf.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ClassVerdict {
    Zero,
    Trivial,
    Nontrivial,
    Undecided,
}

impl fmt::Display for ClassVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ClassVerdict::Zero => "ZERO",
            ClassVerdict::Trivial => "TRIVIAL",
            ClassVerdict::Nontrivial => "NONTRIVIAL",
            ClassVerdict::Undecided => "UNDECIDED",
        })
    }
}

pub fn obstruction_class(eta: &ObstructionCocycle, window: i32) -> Result<ClassVerdict> {
    if eta.is_zero() {
        return Ok(ClassVerdict::Zero);
    }
    let s = solve_coboundary(&eta.sheaf(), &eta.cochain(), window)?;
    Ok(if s.solved() {
        ClassVerdict::Trivial
    } else if s.definitive {
        ClassVerdict::Nontrivial
    } else {
        ClassVerdict::Undecided
    })
}

/// Comparison of the degree-2 Euler cocycle with the primary obstruction.
#[derive(Clone, Debug)]
pub struct EulerObstructionReport {
    pub euler_block: ObstructionCocycle,
    pub eta: ObstructionCocycle,
    /// `λ` with `[euler] = λ [η]`, when `[η] ≠ 0`.
    pub constant: Option<Rational>,
    pub pass: bool,
    pub definitive: bool,
}

pub const EULER_OBSTRUCTION_CONSTANT: i64 = -2;

pub fn euler_obstruction_compare(a: &Atlas, window: i32) -> Result<EulerObstructionReport> {
    let eta = primary_obstruction(a)?;
    let defect = lift_defect(a, &euler_family(a)?)?;
    let euler_block = ObstructionCocycle {
        split: eta.split.clone(),
        entries: defect
            .into_iter()
            .map(|(k, v)| (k, v.graded_part(2).even_block()))
            .collect(),
    };
    let sheaf = eta.sheaf();
    let target = eta.scale(&Rational::from(EULER_OBSTRUCTION_CONSTANT));
    let decision = class_equal(&sheaf, &euler_block.cochain(), &target.cochain(), window)?;
    let constant = proportionality(&sheaf, &euler_block.cochain(), &eta.cochain(), window)?;
    Ok(EulerObstructionReport {
        pass: decision.equal,
        definitive: decision.definitive && sheaf.grading().definitive,
        constant,
        euler_block,
        eta,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builders;

    fn sig() -> Arc<ChartSignature> {
        ChartSignature::new(0, &["x"], &["t1", "t2"], &[]).unwrap()
    }

    #[test]
    fn exp_and_log_of_a_shear() {
        let s = sig();
        let f = SuperElement::monomial(&s, 3, vec![0], Rational::one()).unwrap();
        let v = VectorField::single(&s, 0, f).unwrap();
        let g = exp_derivation(&v).unwrap();
        assert_eq!(g.images()[0].to_string(), "1*x + 1*t1*t2");
        assert_eq!(g.images()[1].to_string(), "1*t1");
        assert_eq!(log_automorphism(&g).unwrap(), v);
        assert!(g.in_group(2) && !g.in_group(3));
    }

    #[test]
    fn degree_zero_rejected() {
        let s = sig();
        let eps = crate::svector::canonical_field(&s, crate::svector::FieldKind::Euler).unwrap();
        assert!(exp_derivation(&eps).is_err());
    }

    #[test]
    fn ns2_obstruction_golden() {
        let a = builders::fix_ns2().unwrap();
        let split = split_model_of(&a).unwrap();
        let c = comparison_automorphism(&a, &split, 0, 1).unwrap();
        assert_eq!(c.images()[0].to_string(), "1*x - 1*x^-1*t1*t2");
        let eta = primary_obstruction(&a).unwrap();
        assert_eq!(eta.entries[&(0, 1)].to_string(), "-1*x^-1*t1*t2*d/dx");
        assert_eq!(obstruction_from_jacobian(&a).unwrap().entries, eta.entries);
        assert_eq!(
            obstruction_class(&eta, 12).unwrap(),
            ClassVerdict::Nontrivial
        );
        let s2 = primary_obstruction(&builders::fix_s2().unwrap()).unwrap();
        assert_eq!(obstruction_class(&s2, 12).unwrap(), ClassVerdict::Zero);
    }

    #[test]
    fn euler_compare_on_ns2() {
        let r = euler_obstruction_compare(&builders::fix_ns2().unwrap(), 12).unwrap();
        assert!(r.pass && r.definitive);
        assert_eq!(r.constant, Some(Rational::from(-2)));
        assert_eq!(
            r.euler_block.entries[&(0, 1)].to_string(),
            "2*x^-1*t1*t2*d/dx"
        );
    }
}
