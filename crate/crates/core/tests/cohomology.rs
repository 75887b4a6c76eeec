use supersplit::atiyah::{bundle_atiyah_class, global_connection, p1_line_bundle, tangent_bundle};
use supersplit::builders::{aff2_twisted, fix_ns2, fix_s2, p1_reduced};
use supersplit::cech::{h1_dimension, p1_line_bundle_h1, EndFormSheaf, SectionSheaf, ValueSheaf};
use supersplit::connection::check_global;
use supersplit::koszul::{euler_differential, Verdict};

#[test]
fn line_bundles_on_p1() {
    let p1 = p1_reduced().unwrap();
    for n in -5..=3 {
        let h = h1_dimension(&SectionSheaf::new(&p1_line_bundle(&p1, n).unwrap()), 12).unwrap();
        assert!(h.definitive);
        assert_eq!(h.dim, p1_line_bundle_h1(n), "O({n})");
    }
}

#[test]
fn tangent_bundle_of_p1_has_no_connection() {
    let t = tangent_bundle(&p1_reduced().unwrap()).unwrap();
    let (c, s) = bundle_atiyah_class(&t, 12).unwrap();
    assert!(!s.solved() && s.definitive);
    assert_eq!(
        EndFormSheaf::new(&t).render(0, &c.entries[&(0, 1)]),
        "-2*x^-1*dx*E11"
    );
}

#[test]
fn twisted_affine_superspace_has_a_global_connection() {
    let a = aff2_twisted().unwrap();
    let conns = global_connection(&a, 12).unwrap().expect("connection");
    assert!(check_global(&conns, &a).passed());
}

#[test]
fn window_does_not_change_definitive_verdicts() {
    for w in [2, 5, 12] {
        assert_eq!(
            euler_differential(&fix_ns2().unwrap(), w).unwrap().verdict,
            Verdict::NonSplit
        );
        assert_eq!(
            euler_differential(&fix_s2().unwrap(), w).unwrap().verdict,
            Verdict::Split
        );
    }
}
