//! Property tests for the structural invariants: reflection is an
//! involution, the reflected kernel is dominated below the plane, region
//! labels agree with the membership predicates, difference quotients stay
//! within the Lipschitz band, and the numeric format round-trips.

use loglap_core::geometry::{classify, kernel_distance_pair, reflect, Epigraph, RegionLabel, UniformGrid};
use loglap_core::numfmt::format_sig10;
use loglap_core::problems::{default_quotient_eps, lipschitz_quotient, NonlinearityF};
use loglap_core::special::digamma;
use proptest::prelude::*;

fn ulp_distance(a: f64, b: f64) -> u64 {
    let (ia, ib) = (a.to_bits() as i64, b.to_bits() as i64);
    ia.abs_diff(ib)
}

proptest! {
    #[test]
    fn reflect_is_an_involution(
        x in -50.0f64..50.0,
        y in -50.0f64..50.0,
        lambda in -10.0f64..10.0,
    ) {
        let p = [x, y];
        let mid = reflect(&p, lambda);
        let back = reflect(&mid, lambda);
        prop_assert_eq!(back[0], x);
        // one rounding per application: the error is at most an ulp at the
        // scale of the largest intermediate value
        let scale = y.abs().max(mid[1].abs()).max(2.0 * lambda.abs());
        prop_assert!(
            (back[1] - y).abs() <= f64::EPSILON * scale,
            "y {} vs {} (scale {})", back[1], y, scale
        );
        // on lattice-symmetric data the roundtrip is bitwise exact
        if y == 2.0 * lambda - y {
            prop_assert!(ulp_distance(back[1], y) == 0);
        }
    }

    #[test]
    fn reflected_kernel_is_smaller_below_the_plane(
        x0 in -5.0f64..5.0, x1 in -5.0f64..5.0,
        y0 in -5.0f64..5.0, y1 in -5.0f64..5.0,
        lambda in -2.0f64..2.0,
        gap in 1e-6f64..3.0,
        gap2 in 1e-6f64..3.0,
    ) {
        // place both points strictly below T_λ
        let x = [x0, lambda - gap];
        let y = [y0 + (x1 - x1), lambda - gap2];
        let (d, d_ref) = kernel_distance_pair(&x, &[y0, y[1]], lambda);
        prop_assume!(d > 1e-12);
        prop_assert!(d_ref > d);
        prop_assert!(1.0 / d_ref.powi(2) - 1.0 / d.powi(2) < 0.0);
        let _ = y1;
    }

    #[test]
    fn classification_matches_membership(
        xp in -4.0f64..4.0,
        xn in -4.0f64..4.0,
        lambda in 0.05f64..3.0,
        alpha in 0.2f64..3.0,
    ) {
        let e = Epigraph::paraboloid(alpha).unwrap();
        let x = [xp, xn];
        let label = classify(&e, lambda, &x).unwrap();
        let in_omega = e.contains(&x);
        let in_reflected = xn < 2.0 * lambda - e.phi(&[xp]);
        match label {
            RegionLabel::H => prop_assert!(in_omega && xn < lambda),
            RegionLabel::A => prop_assert!(!in_omega && in_reflected && xn < lambda),
            RegionLabel::D => prop_assert!(!in_omega && !in_reflected && xn < lambda),
            RegionLabel::Above => prop_assert!(xn >= lambda),
        }
    }

    #[test]
    fn digamma_recurrence(x in 0.5f64..10.0) {
        let lhs = digamma(x + 1.0).unwrap() - digamma(x).unwrap();
        prop_assert!((lhs - 1.0 / x).abs() < 1e-11);
    }

    #[test]
    fn quotient_within_lipschitz_band(
        u in 0.05f64..5.0,
        ul in 0.05f64..5.0,
        p in 1.0f64..4.0,
    ) {
        let f = NonlinearityF::power(p).unwrap();
        let q = lipschitz_quotient(&f, u, ul, default_quotient_eps(u)).unwrap();
        prop_assert!(q >= 0.0);
        let hi = u.max(ul);
        prop_assert!(q <= f.deriv(hi) * (1.0 + 1e-12));
    }

    #[test]
    fn sig10_format_parses_back_to_itself(x in -1e12f64..1e12) {
        let s = format_sig10(x);
        let y: f64 = s.parse().unwrap();
        prop_assert_eq!(s.clone(), format_sig10(y), "unstable for {}", x);
        // 10 significant digits keep 1e-9 relative accuracy
        if x != 0.0 {
            prop_assert!((y - x).abs() <= 1e-9 * x.abs());
        }
    }

    #[test]
    fn grid_indexing_is_a_bijection(
        d0 in 1usize..12,
        d1 in 1usize..12,
        d2 in 1usize..6,
    ) {
        let g = UniformGrid::new(vec![0.4, -1.0, 2.0], 0.25, vec![d0, d1, d2]).unwrap();
        for flat in 0..g.len() {
            let m = g.multi(flat);
            prop_assert_eq!(g.flat(&m), flat);
            let x = g.coord(flat);
            prop_assert_eq!(g.position_of(&x), Some(m));
        }
    }
}
