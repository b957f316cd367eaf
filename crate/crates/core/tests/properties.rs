use std::sync::OnceLock;

use proptest::prelude::*;
use rug::{Float, Integer};

use pisot_spectra::pisot::{build_pisot, FieldElement, PisotNumber, RingElement};
use pisot_spectra::real::pow2_f64;
use pisot_spectra::{spectrum, transform};

const SUITE: [&[i64]; 3] = [&[1, 1], &[1, 1, 1], &[1, 0, 0, 1]];

fn suite() -> &'static [PisotNumber] {
    static CELL: OnceLock<Vec<PisotNumber>> = OnceLock::new();
    CELL.get_or_init(|| SUITE.iter().map(|d| build_pisot(d, 256).unwrap()).collect())
}

fn ring(p: &PisotNumber, c: &[i64]) -> RingElement {
    RingElement::from_i64s(&c[..p.degree()], p.degree()).unwrap()
}

fn coeffs(bound: i64) -> impl Strategy<Value = Vec<i64>> {
    proptest::collection::vec(-bound..=bound, 4)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn ring_mul_matches_embeddings(which in 0usize..3, a in coeffs(100), b in coeffs(100)) {
        let p = &suite()[which];
        let (a, b) = (ring(p, &a), ring(p, &b));
        let ab = p.ring_mul(&a, &b);
        let tol = pow2_f64(-(p.precision_bits() as i32 - 24));
        for i in 1..=p.degree() {
            let lhs = p.embed(&ab, i).unwrap();
            let rhs = p.embed(&a, i).unwrap().mul(&p.embed(&b, i).unwrap());
            prop_assert!(lhs.sub(&rhs).abs().to_f64() <= tol);
        }
    }

    #[test]
    fn trace_route_agrees_with_direct_embedding(which in 0usize..3, z in coeffs(20), j in 0u64..=60) {
        let p = &suite()[which];
        let z = ring(p, &z);
        let tr = p.nearest_int_trace(&z, j).unwrap();
        let direct = p.nearest_int_direct(&z, j);
        prop_assert_eq!(&tr.k, &direct.k);
        let diff = Float::with_val(256, &tr.delta - &direct.delta).abs();
        prop_assert!(diff.to_f64() <= pow2_f64(-(p.precision_bits() as i32 / 2)));
        let checked = p.nearest_int_data(&z, j).unwrap();
        prop_assert_eq!(checked.k, tr.k);
    }

    #[test]
    fn ring_mul_commutes_and_distributes(which in 0usize..3, a in coeffs(50), b in coeffs(50), c in coeffs(50)) {
        let p = &suite()[which];
        let (a, b, c) = (ring(p, &a), ring(p, &b), ring(p, &c));
        prop_assert_eq!(p.ring_mul(&a, &b), p.ring_mul(&b, &a));
        prop_assert_eq!(
            p.ring_mul(&a, &p.ring_add(&b, &c)),
            p.ring_add(&p.ring_mul(&a, &b), &p.ring_mul(&a, &c))
        );
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn decay_bound_has_no_violations(which in 0usize..3, z in coeffs(10)) {
        let p = &suite()[which];
        let d = p.dist_decay(&ring(p, &z), 60).unwrap();
        prop_assert!(d.violations().is_empty());
    }

    #[test]
    fn field_invert_is_exact(which in 0usize..3, num in coeffs(30), den in 1i64..20) {
        let p = &suite()[which];
        let r = ring(p, &num);
        prop_assume!(!r.is_zero());
        let q = r.to_field().scale(&rug::Rational::from((1, den)));
        let inv = p.field_invert(&q).unwrap();
        prop_assert!(p.field_mul(&q, &inv).is_one());
    }

    #[test]
    fn recurrence_holds_on_digit_traces(which in 0usize..3, u in 0.0f64..1.0) {
        let p = &suite()[which];
        let theta = p.theta();
        let y = Float::with_val(256, 1 + Float::with_val(256, theta - 1u32) * u);
        prop_assume!(y < *theta);
        let trace = transform::digit_trace(p, &y, 60, None).unwrap();
        let delta = p.delta_max().to_f64() * 0.999;
        prop_assert!(transform::check_recurrence(&trace, p, delta).unwrap().is_empty());
    }

    #[test]
    fn mu_hat_is_even(t in -1e4f64..1e4) {
        let theta = suite()[0].theta();
        let t = Float::with_val(256, t);
        let a = transform::mu_hat(theta, &t, 1e-20).unwrap();
        let b = transform::mu_hat(theta, &Float::with_val(256, -&t), 1e-20).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn mu_hat_scale_identity(which in 0usize..3, t in 0.01f64..1e3) {
        let theta = suite()[which].theta();
        let t = Float::with_val(256, t);
        let tt = Float::with_val(256, &t * theta);
        let lhs = transform::mu_hat(theta, &tt, 1e-20).unwrap();
        let m = transform::mu_hat(theta, &t, 1e-20).unwrap();
        let c = pisot_spectra::real::cos_two_pi(&tt);
        let rhs = Float::with_val(256, &c * &m.value);
        let diff = Float::with_val(256, &lhs.value - &rhs).abs().to_f64();
        prop_assert!(diff <= lhs.error_bound + m.error_bound + 1e-60);
    }

    #[test]
    fn tail_identity(which in 0usize..3, x in 1e-6f64..10.0) {
        let p = &suite()[which];
        let x = Float::with_val(256, x);
        let (t, te) = spectrum::tail(p, &x, 1e-20).unwrap();
        let m = transform::mu_hat(p.theta(), &x, 1e-20).unwrap();
        let diff = Float::with_val(256, &t - m.abs_value()).abs().to_f64();
        prop_assert!(diff <= te + m.error_bound);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn phi_is_shift_and_sign_invariant(which in 0usize..3, z in coeffs(5)) {
        let p = &suite()[which];
        let z = ring(p, &z);
        let a = spectrum::phi_biinfinite(p, &z, 1e-20).unwrap();
        let b = spectrum::phi_biinfinite(p, &p.mul_theta_pow(&z, 1), 1e-20).unwrap();
        let c = spectrum::phi_biinfinite(p, &-&z, 1e-20).unwrap();
        for other in [&b, &c] {
            let diff = Float::with_val(256, &a.value - &other.value).abs().to_f64();
            prop_assert!(diff <= a.error_bound + other.error_bound + 1e-60);
        }
    }

    #[test]
    fn phi_lambda_is_phi_of_twice_the_product(which in 0usize..3, l in coeffs(3), q in coeffs(3)) {
        let p = &suite()[which];
        let (l, q) = (ring(p, &l), ring(p, &q));
        let a = spectrum::phi_lambda(p, &l, &q, 1e-20).unwrap();
        let two = RingElement::integer(2, p.degree());
        let b = spectrum::phi_biinfinite(p, &p.ring_mul(&two, &p.ring_mul(&l, &q)), 1e-20).unwrap();
        let diff = Float::with_val(256, &a.value - &b.value).abs().to_f64();
        prop_assert!(diff <= a.error_bound + b.error_bound + 1e-60);
    }

    #[test]
    fn synthesized_terms_match_field_rounding(k in 2u64..40, a in -3i64..=3) {
        let p = &suite()[0];
        let half = FieldElement::rational((1, 2), 2);
        let z = vec![p.one().to_field()];
        let n = spectrum::synthesize_sequence(p, &z, a, &half, k).unwrap();
        // (2r)^-1 = 1, so n_k is the Lucas number <theta^k> plus A
        let lucas = p.trace(&p.theta_pow(k));
        prop_assert_eq!(n, lucas + Integer::from(a));
    }
}

#[test]
fn enumeration_is_sorted_and_separated() {
    let p = &suite()[0];
    let tol = 1e-20;
    let out = spectrum::enumerate_spectrum(
        p,
        &FieldElement::rational((1, 2), 2),
        &spectrum::Window::new(1, 1, 1),
        tol,
        1e-7,
    )
    .unwrap();
    assert!(!out.is_empty());
    for w in out.windows(2) {
        let gap = Float::with_val(256, &w[0].predicted - &w[1].predicted).to_f64();
        assert!(gap > 2.0 * tol);
    }
}
