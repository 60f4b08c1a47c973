use num_complex::Complex;
use phidiss::forms::{dissipativity_form, substitution_gradient, xy_from_sample, ConstantLame, FieldSample, TestField};
use phidiss::lambda::LambdaProfile;
use phidiss::operator::{bmo_seminorm, Grid2, ScalarGrid};
use phidiss::orlicz::{luxemburg_norm, orlicz_norm, Samples, YoungFunction};
use phidiss::phi::PhiSpec;
use phidiss::young::young_pair;
use proptest::prelude::*;

fn vec2() -> impl Strategy<Value = [f64; 2]> {
    [-3.0..3.0f64, -3.0..3.0f64]
}

fn mat2() -> impl Strategy<Value = [[f64; 2]; 2]> {
    [vec2(), vec2()]
}

fn young() -> impl Strategy<Value = YoungFunction<f64>> {
    prop_oneof![
        (1.2..6.0f64).prop_map(|p| YoungFunction::monomial(p).unwrap()),
        Just(YoungFunction::Exp),
        (2.1..3.0f64).prop_map(|p| YoungFunction::exp_power(p).unwrap()),
        (1.5..4.0f64).prop_map(|p| YoungFunction::monomial(p).unwrap().conjugate()),
    ]
}

fn samples(n: usize) -> impl Strategy<Value = Samples<f64>> {
    (prop::collection::vec(-4.0..4.0f64, n), prop::collection::vec(0.1..2.0f64, n))
        .prop_map(|(v, w)| Samples::new(v, w).unwrap())
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn xy_identities(v in vec2(), g in mat2()) {
        prop_assume!(v[0].hypot(v[1]) > 1e-3);
        let s = FieldSample::real(v, g);
        let [x1, x2, y1, y2] = xy_from_sample(&s, 0.0);
        let grad_sq: f64 = g.iter().flatten().map(|x| x * x).sum();
        let div = g[0][0] + g[1][1];
        let sigma = g[0][0] * g[0][0] + g[1][1] * g[1][1] + 2.0 * g[0][1] * g[1][0];
        let n = v[0].hypot(v[1]);
        let dn = [(v[0] * g[0][0] + v[1] * g[1][0]) / n, (v[0] * g[0][1] + v[1] * g[1][1]) / n];
        prop_assert!(close(grad_sq, x1 * x1 + x2 * x2 + y1 * y1 + y2 * y2, 1e-12));
        prop_assert!(close(div * div, (x1 + y1).powi(2), 1e-12));
        prop_assert!(close(sigma, (x1 + y1).powi(2) - 2.0 * (x1 * y1 + x2 * y2), 1e-12));
        prop_assert!(close(dn[0] * dn[0] + dn[1] * dn[1], x1 * x1 + x2 * x2, 1e-12));
    }

    #[test]
    fn substitution_bounds(u in vec2(), g in mat2(), p in 1.2..12.0f64) {
        prop_assume!(u[0].hypot(u[1]) > 1e-6);
        let phi = PhiSpec::power(p).unwrap();
        let (gv2, pg2) = substitution_gradient(&phi, u, g);
        let k = (p - 2.0).abs();
        prop_assert!(gv2 >= pg2 / 4.0 * (1.0 - 1e-12));
        prop_assert!(gv2 <= (k * k / 4.0 + k + 1.0) * pg2 * (1.0 + 1e-12));
    }

    #[test]
    fn substitution_bounds_truncated(u in vec2(), g in mat2(), p in 2.0..8.0f64, k in 1.2..4.0f64) {
        prop_assume!(u[0].hypot(u[1]) > 1e-6);
        let phi = PhiSpec::truncated_power(p, k).unwrap();
        let (gv2, pg2) = substitution_gradient(&phi, u, g);
        let kk = p - 2.0;
        prop_assert!(gv2 >= pg2 / 4.0 * (1.0 - 1e-12));
        prop_assert!(gv2 <= (kk * kk / 4.0 + kk + 1.0) * pg2 * (1.0 + 1e-12));
    }

    #[test]
    fn luxemburg_scaling_and_monotonicity(f in samples(12), m in young(), c in 0.05..20.0f64, shrink in 0.0..1.0f64) {
        let n = luxemburg_norm(&f, &m).unwrap();
        let scaled = luxemburg_norm(&f.map(|x| c * x), &m).unwrap();
        prop_assert!(close(scaled, c * n, 1e-9));
        let smaller = luxemburg_norm(&f.map(|x| shrink * x), &m).unwrap();
        prop_assert!(smaller <= n * (1.0 + 1e-10));
    }

    #[test]
    fn norm_sandwich(f in samples(10), m in young()) {
        let lux = luxemburg_norm(&f, &m).unwrap();
        let orl = orlicz_norm(&f, &m).unwrap();
        prop_assert!(lux <= orl * (1.0 + 1e-8), "{} > {}", lux, orl);
        prop_assert!(orl <= 2.0 * lux * (1.0 + 1e-8), "{} > 2*{}", orl, lux);
    }

    #[test]
    fn bmo_shift_and_scale(vals in prop::collection::vec(-5.0..5.0f64, 81), c in -10.0..10.0f64, a in -4.0..4.0f64) {
        let grid = Grid2::unit(9, 9);
        let f = ScalarGrid::new(grid.clone(), vals.clone()).unwrap();
        let b = bmo_seminorm(&f);
        let shifted = ScalarGrid::new(grid.clone(), vals.iter().map(|x| x + c).collect()).unwrap();
        let scaled = ScalarGrid::new(grid, vals.iter().map(|x| a * x).collect()).unwrap();
        prop_assert!((bmo_seminorm(&shifted) - b).abs() <= 1e-12 * (1.0 + c.abs()));
        prop_assert!(close(bmo_seminorm(&scaled), a.abs() * b, 1e-12));
    }

    #[test]
    fn young_inequality(p in 1.3..8.0f64, s in 0.01..5.0f64, t in 0.01..5.0f64) {
        let pair = young_pair(&PhiSpec::power(p).unwrap());
        prop_assert!(pair.young_gap(s, t).unwrap() >= -1e-10);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn power_form_is_quadratic(p in 1.5..6.0f64, c in 0.2..5.0f64, a in -1.0..1.0f64, b in -1.0..1.0f64) {
        let prof = LambdaProfile::new(PhiSpec::power(p).unwrap());
        let lame = ConstantLame { lambda: 1.0, mu: 1.0 };
        let z = Complex::new(0.0, 0.0);
        let r = |x: f64| Complex::new(x, 0.0);
        let v = TestField::PolyBump { center: [0.5, 0.5], radius: 0.3, coef: [[r(a), r(1.0), z], [r(b), z, r(1.0)]] };
        let f1 = dissipativity_form(&lame, &prof, &v).unwrap();
        let fc = dissipativity_form(&lame, &prof, &v.scaled(c)).unwrap();
        prop_assert!(close(fc, c * c * f1, 1e-9), "{} vs {}", fc, c * c * f1);
    }
}
