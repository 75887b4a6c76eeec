use std::sync::Arc;

use proptest::prelude::*;
use supersplit::{ChartSignature, Parity, Rational, SuperElement};

fn sig(q: usize) -> Arc<ChartSignature> {
    let odd: Vec<String> = (1..=q).map(|i| format!("t{i}")).collect();
    ChartSignature::from_names(0, vec!["x".into(), "z".into()], odd, &["x"]).unwrap()
}

/// Random element from `(mask, ex, ez, c)` terms; `x` may carry negative powers.
fn element(s: &Arc<ChartSignature>, terms: &[(u32, i32, i32, i64)]) -> SuperElement {
    let mut acc = SuperElement::zero(s);
    for &(mask, ex, ez, c) in terms {
        let m = mask & ((1 << s.q()) - 1);
        let t = SuperElement::monomial(s, m, vec![ex, ez], Rational::from(c)).unwrap();
        acc = acc.checked_add(&t).unwrap();
    }
    acc
}

fn terms() -> impl Strategy<Value = Vec<(u32, i32, i32, i64)>> {
    prop::collection::vec((0u32..16, -2i32..3, 0i32..3, -4i64..5), 0..4)
}

fn homogeneous(f: &SuperElement, p: Parity) -> SuperElement {
    f.parity_part(p)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn ring_axioms(q in 0usize..4, a in terms(), b in terms(), c in terms()) {
        let s = sig(q);
        let (f, g, h) = (element(&s, &a), element(&s, &b), element(&s, &c));
        let fg = f.super_mul(&g).unwrap();
        prop_assert_eq!(fg.super_mul(&h).unwrap(), f.super_mul(&g.super_mul(&h).unwrap()).unwrap());
        prop_assert_eq!(
            f.super_mul(&g.checked_add(&h).unwrap()).unwrap(),
            fg.checked_add(&f.super_mul(&h).unwrap()).unwrap()
        );
        prop_assert_eq!(f.super_mul(&SuperElement::one(&s)).unwrap(), f.clone());
        prop_assert!(f.checked_sub(&f).unwrap().is_zero());
    }

    #[test]
    fn supercommutativity(q in 0usize..4, a in terms(), b in terms(), pa: bool, pb: bool) {
        let s = sig(q);
        let f = homogeneous(&element(&s, &a), Parity::of_bit(pa));
        let g = homogeneous(&element(&s, &b), Parity::of_bit(pb));
        let fg = f.super_mul(&g).unwrap();
        let gf = g.super_mul(&f).unwrap();
        if pa && pb {
            prop_assert_eq!(fg, gf.neg());
        } else {
            prop_assert_eq!(fg, gf);
        }
    }

    #[test]
    fn graded_leibniz(q in 1usize..4, a in terms(), b in terms(), pa: bool, k in 0usize..5) {
        let s = sig(q);
        let k = k % s.dim();
        let f = homogeneous(&element(&s, &a), Parity::of_bit(pa));
        let g = element(&s, &b);
        let lhs = f.super_mul(&g).unwrap().d_coord(k);
        let mut second = f.super_mul(&g.d_coord(k)).unwrap();
        if pa && k >= s.p() {
            second = second.neg();
        }
        let rhs = f.d_coord(k).super_mul(&g).unwrap().checked_add(&second).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn odd_derivatives_anticommute(q in 2usize..4, a in terms()) {
        let s = sig(q);
        let f = element(&s, &a);
        let (i, j) = (s.p(), s.p() + 1);
        prop_assert_eq!(f.d_coord(i).d_coord(j), f.d_coord(j).d_coord(i).neg());
        prop_assert!(f.d_coord(i).d_coord(i).is_zero());
    }

    #[test]
    fn nilpotency_of_j(q in 1usize..4, ts in prop::collection::vec(terms(), 4)) {
        let s = sig(q);
        let mut prod = SuperElement::one(&s);
        for t in ts.iter().take(q + 1) {
            let j = element(&s, t);
            let j = j.checked_sub(&j.graded_part(0)).unwrap();
            prod = prod.super_mul(&j).unwrap();
        }
        prop_assert!(prod.is_zero());
    }

    #[test]
    fn substitution_is_a_functorial_homomorphism(
        q in 0usize..4,
        a in terms(),
        b in terms(),
        shift in -2i64..3,
        scale in prop::sample::select(vec![1i64, 2, -1, -3]),
        nil in terms(),
    ) {
        let s = sig(q);
        let (f, g) = (element(&s, &a), element(&s, &b));
        let x = SuperElement::coordinate(&s, 0);
        let z = SuperElement::coordinate(&s, 1);
        let n = element(&s, &nil).parity_part(Parity::Even);
        let n = n.checked_sub(&n.graded_part(0)).unwrap();
        let mut phi = vec![x.scale(&Rational::from(scale)).checked_add(&n).unwrap(), z.checked_add(&SuperElement::constant(&s, Rational::from(shift))).unwrap()];
        let mut psi = vec![x.checked_add(&n).unwrap(), z.scale(&Rational::from(scale))];
        for k in 0..q {
            let t = SuperElement::coordinate(&s, s.p() + k);
            let odd = n.super_mul(&t).unwrap();
            phi.push(t.checked_add(&odd).unwrap());
            psi.push(t.scale(&Rational::from(scale)));
        }
        let fg = f.super_mul(&g).unwrap();
        prop_assert_eq!(
            fg.substitute(&phi).unwrap(),
            f.substitute(&phi).unwrap().super_mul(&g.substitute(&phi).unwrap()).unwrap()
        );
        let composed: Vec<SuperElement> = phi.iter().map(|e| e.substitute(&psi).unwrap()).collect();
        prop_assert_eq!(
            f.substitute(&phi).unwrap().substitute(&psi).unwrap(),
            f.substitute(&composed).unwrap()
        );
    }

    #[test]
    fn units_invert(q in 0usize..4, a in terms(), c in 1i64..5, e in -3i32..4) {
        let s = sig(q);
        let j = element(&s, &a).parity_part(Parity::Even);
        let j = j.checked_sub(&j.graded_part(0)).unwrap();
        let u = SuperElement::monomial(&s, 0, vec![e, 0], Rational::from(c)).unwrap().checked_add(&j).unwrap();
        let inv = u.invert().unwrap();
        prop_assert_eq!(u.super_mul(&inv).unwrap(), SuperElement::one(&s));
        prop_assert_eq!(u.pow(-2).unwrap(), inv.super_mul(&inv).unwrap());
    }
}

#[test]
fn rationals_parse_and_reduce() {
    let r: Rational = "6/-4".parse().unwrap();
    assert_eq!(r, Rational::new(-3, 2));
    assert!("1/0".parse::<Rational>().is_err());
    assert_eq!(Rational::factorial(4), Rational::from(24));
}
