use phidiss::identities::identity_residuals;
use phidiss::lambda::LambdaProfile;
use phidiss::phi::{dual_phi, PhiSpec};
use phidiss::scalar::log_space;

fn families() -> Vec<PhiSpec<f64>> {
    vec![
        PhiSpec::power(2.0).unwrap(),
        PhiSpec::power(3.0).unwrap(),
        PhiSpec::power(4.0).unwrap(),
        PhiSpec::power(16.0).unwrap(),
        PhiSpec::truncated_power(4.0, 3.0).unwrap(),
        PhiSpec::truncated_power(6.0, 2.0).unwrap(),
        PhiSpec::exp_square(),
    ]
}

#[test]
fn identities_hold_on_a_log_grid() {
    let ts = log_space(1e-4, 1e4, 200);
    for spec in families() {
        let name = spec.name();
        let r = identity_residuals(&LambdaProfile::new(spec), &ts).unwrap();
        assert!(r.h2psi <= 1e-8, "{name}: {r:?}");
        assert!(r.th_prime <= 1e-6, "{name}: {r:?}");
        assert!(r.phipsi <= 1e-8, "{name}: {r:?}");
        assert!(r.theta_dual <= 1e-8, "{name}: {r:?}");
        assert!(r.lambda_dual <= 1e-8, "{name}: {r:?}");
    }
}

#[test]
fn double_dual_recovers_phi() {
    for spec in families() {
        let back = dual_phi(&dual_phi(&spec));
        for s in log_space(1e-1, 1e1, 50) {
            let (a, b) = (spec.phi(s), back.phi(s));
            assert!((a - b).abs() <= 1e-6 * a.abs().max(1.0), "{}: s={s}: {a} vs {b}", spec.name());
        }
    }
}

#[test]
fn dual_of_power_is_conjugate_power() {
    for p in [1.5f64, 3.0, 4.0] {
        let q = p / (p - 1.0);
        let d = dual_phi(&PhiSpec::power(p).unwrap());
        for t in log_space(1e-3f64, 1e3, 30) {
            let want = t.powf(q - 2.0);
            assert!((d.phi(t) - want).abs() <= 1e-12 * want, "p={p} t={t}");
        }
    }
}
