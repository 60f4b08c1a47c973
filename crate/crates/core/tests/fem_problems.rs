use std::sync::Arc;
use std::time::Instant;

use phidiss::criteria::perturbation_budget;
use phidiss::fem::{
    assemble_and_solve, holder_split_check, manufactured, regularity_ratio, weighted_energy, BoxMesh, FemCoefficients,
    FemProblem, RhsField,
};
use phidiss::lambda::LambdaProfile;
use phidiss::phi::PhiSpec;

fn smooth_rhs() -> RhsField<f64> {
    RhsField::Function(Arc::new(|x: [f64; 3]| {
        let mut f = [[0.0; 3]; 3];
        for (i, row) in f.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = (std::f64::consts::PI * (x[i] + 2.0 * x[j])).cos() + 0.5 * x[0] * x[1];
            }
        }
        f
    }))
}

#[test]
fn fiber_problem_matches_two_point_solution() {
    let (l, m) = (1.5f64, 0.8f64);
    let mesh = BoxMesh::new(2, [0.0; 3], [1.0, 10.0, 1.0], [16, 160, 1]).unwrap();
    let mut prob = FemProblem::new(mesh, FemCoefficients::Constant { lambda: l, mu: m }, manufactured::fiber_rhs(), 2.0);
    prob.cg_tol = 1e-12;
    let sol = assemble_and_solve(&prob).unwrap();
    let mut worst: f64 = 0.0;
    for i in 0..=16 {
        let node = mesh.node_index([i, 80, 0]);
        let x = mesh.node_coords(node);
        let exact = manufactured::fiber_solution(l, m, x[0]);
        for c in 0..2 {
            worst = worst.max((sol.nodal(node)[c] - exact[c]).abs());
        }
    }
    assert!(worst < 1e-6, "{worst}");
}

#[test]
fn galerkin_energy_identity() {
    let mesh = BoxMesh::unit_cube(8).unwrap();
    let prob = FemProblem::new(mesh, FemCoefficients::Constant { lambda: 1.0, mu: 1.0 }, smooth_rhs(), 4.0);
    let sol = assemble_and_solve(&prob).unwrap();
    assert!(sol.cg.relative_residual <= 1e-10);
    assert!((2.0 * sol.energy - sol.load_work).abs() <= 1e-8 * sol.load_work.abs());
}

#[test]
fn three_dimensional_ratio_scaling_and_refinement() {
    let t = Instant::now();
    let mut ratios = Vec::new();
    for n in [8, 16] {
        let mesh = BoxMesh::unit_cube(n).unwrap();
        let prob = FemProblem::new(mesh, FemCoefficients::Constant { lambda: 1.0, mu: 1.0 }, smooth_rhs(), 4.0);
        let base = regularity_ratio(&assemble_and_solve(&prob).unwrap(), &prob).unwrap();
        for c in [0.5, 2.0] {
            let scaled = prob.scaled(c);
            let r = regularity_ratio(&assemble_and_solve(&scaled).unwrap(), &scaled).unwrap();
            assert!((r.ratio / base.ratio - 1.0).abs() < 1e-6, "c={c}");
            assert!((r.lhs / base.lhs / c.powi(4) - 1.0).abs() < 1e-6);
        }
        ratios.push(base.ratio);
    }
    assert!(ratios[0] / ratios[1] < 2.0 && ratios[1] / ratios[0] < 2.0);
    eprintln!("3-D study took {:?}", t.elapsed());
}

#[test]
fn holder_split_in_three_dimensions() {
    let mesh = BoxMesh::unit_cube(8).unwrap();
    let prob = FemProblem::new(mesh, FemCoefficients::Constant { lambda: 1.0, mu: 1.0 }, smooth_rhs(), 4.0).scaled(40.0);
    let sol = assemble_and_solve(&prob).unwrap();
    let k = 1.0 + 0.5 * sol.max_abs_u();
    let h = holder_split_check(&sol, &prob, k).unwrap();
    assert!(h.pointwise_slack >= -1e-12);
    assert!(h.below_band_gap < 1e-12);
    assert!(h.slack >= 0.0);
    assert!((1.0 / h.alpha + 1.0 / h.alpha_prime - 1.0).abs() < 1e-14);
    let p2 = FemProblem { p: 2.0, ..prob.clone() };
    let h2 = holder_split_check(&sol, &p2, k).unwrap();
    assert!(h2.pointwise_slack.abs() < 1e-14 && h2.below_band_gap < 1e-14);
}

#[test]
fn weighted_energy_is_stable_under_budgeted_perturbation() {
    // engineering sanity bound, not a sharp estimate
    let profile = LambdaProfile::new(PhiSpec::power(4.0).unwrap());
    let kappa0 = 0.5;
    let budget = perturbation_budget(&profile, 2, kappa0).unwrap().budget;
    let mesh = BoxMesh::<f64>::unit_square(16).unwrap();
    let base = FemProblem::new(mesh, FemCoefficients::Constant { lambda: 1.0, mu: 1.0 }, manufactured::rhs(1.0, 1.0, 1.0), 4.0);
    let e0 = weighted_energy(&assemble_and_solve(&base).unwrap(), 4.0, &[]).unwrap().untruncated;
    for (a, b) in [(1.0, 0.0), (0.0, 1.0), (0.5, -0.5), (-0.5, 0.5)] {
        let (de, ds) = (a * budget, b * budget);
        let coeffs = FemCoefficients::Function(Arc::new(move |x: [f64; 3]| {
            let w = (std::f64::consts::PI * x[0]).sin() * (std::f64::consts::PI * x[1]).cos();
            (1.0 + de * w, 1.0 + ds * w)
        }));
        let prob = FemProblem { coeffs, ..base.clone() };
        let e = weighted_energy(&assemble_and_solve(&prob).unwrap(), 4.0, &[]).unwrap().untruncated;
        assert!((0.5..=2.0).contains(&(e / e0)), "{}", e / e0);
    }
}

#[test]
fn two_dimensional_orlicz_ratio_scaling() {
    let mesh = BoxMesh::<f64>::unit_square(16).unwrap();
    let prob = FemProblem::new(mesh, FemCoefficients::Constant { lambda: 1.0, mu: 1.0 }, manufactured::rhs(1.0, 1.0, 1.0), 4.0);
    let base = regularity_ratio(&assemble_and_solve(&prob).unwrap(), &prob).unwrap();
    for c in [0.5, 2.0, 4.0] {
        let s = prob.scaled(c);
        let r = regularity_ratio(&assemble_and_solve(&s).unwrap(), &s).unwrap();
        assert!((r.ratio / base.ratio - 1.0).abs() < 1e-6);
    }
}
