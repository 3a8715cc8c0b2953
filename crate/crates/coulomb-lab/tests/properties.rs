use coulomb_lab::deviations::linear_statistic;
use coulomb_lab::geometry::{antipode, chordal_distance_sq, from_sphere, green_g0, pt, to_sphere};
use coulomb_lab::potentials::{Potential, TestFunction};
use coulomb_lab::sampling::{read_cgcf, write_cgcf, Configuration};
use proptest::prelude::*;

fn point() -> impl Strategy<Value = (f64, f64)> {
    (-50.0..50.0f64, -50.0..50.0f64)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn green_is_symmetric_and_nonnegative((a, b) in point(), (c, d) in point()) {
        let (z, w) = (pt(a, b), pt(c, d));
        prop_assume!((z - w).norm() > 1e-9);
        let g = green_g0(z, w).unwrap();
        prop_assert!(g >= -1e-12);
        prop_assert!((g - green_g0(w, z).unwrap()).abs() <= 1e-12 * (1.0 + g.abs()));
    }

    #[test]
    fn antipode_is_an_involution_at_chordal_distance_two((a, b) in point()) {
        let z = pt(a, b);
        prop_assume!(z.norm() > 1e-3);
        let back = antipode(antipode(z));
        prop_assert!((back - z).norm() <= 1e-10 * (1.0 + z.norm()));
        prop_assert!((chordal_distance_sq(z, antipode(z)) - 4.0).abs() < 1e-9);
    }

    #[test]
    fn stereographic_round_trip((a, b) in point()) {
        let z = pt(a, b);
        let s = to_sphere(z);
        prop_assert!((s[0] * s[0] + s[1] * s[1] + s[2] * s[2] - 1.0).abs() < 1e-12);
        prop_assert!((from_sphere(s) - z).norm() <= 1e-9 * (1.0 + z.norm_sqr()));
    }

    #[test]
    fn linear_statistic_is_linear(xs in prop::collection::vec(point(), 1..20), a in -3.0..3.0f64, b in -3.0..3.0f64) {
        let c = Configuration::new(xs.iter().map(|&(x, y)| pt(x, y)).collect());
        let z = TestFunction::zonal();
        let r = TestFunction::real_part();
        let lhs = linear_statistic(&c, &z.scaled(a).plus(&r.scaled(b)));
        let rhs = a * linear_statistic(&c, &z) + b * linear_statistic(&c, &r);
        prop_assert!((lhs - rhs).abs() <= 1e-10 * (1.0 + rhs.abs()));
    }

    #[test]
    fn quad_potential_scales(lambda in 0.1..5.0f64, (a, b) in point()) {
        let z = pt(a, b);
        let v = Potential::quad(lambda).eval(z);
        prop_assert!((v - lambda * z.norm_sqr()).abs() <= 1e-12 * (1.0 + v));
    }

    #[test]
    fn cgcf_round_trip(xs in prop::collection::vec(point(), 1..40)) {
        let c = Configuration::new(xs.iter().map(|&(x, y)| pt(x, y)).collect());
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.cgcf");
        write_cgcf(&c, &path).unwrap();
        prop_assert_eq!(read_cgcf(&path).unwrap(), c);
    }
}
