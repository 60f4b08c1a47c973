//! The five commands. Each produces report records, optional CSV plot data
//! and the names of records whose check failed.

use std::sync::Arc;

use anyhow::{bail, Context};
use serde::Serialize;
use serde_json::{json, Value};

use phidiss::criteria::{
    algebraic_margin, lame2d_verdict, lame_nd_sufficient, perturbation_budget, power_flip, AlgebraicSearch, Verdict,
    VerdictOptions, VerdictStatus,
};
use phidiss::fem::{
    assemble_and_solve, manufactured, regularity_ratio, weighted_energy, BoxMesh, FemCoefficients, FemProblem,
    FemSolution, RhsField,
};
use phidiss::forms::{oscillatory_counterexample, standard_ensemble, strict_margin, CounterexampleOptions, EnsembleSpec};
use phidiss::identities::identity_residuals;
use phidiss::lambda::{LambdaOptions, LambdaProfile};
use phidiss::operator::{CoefficientField, GeneralSystem, Grid2};
use phidiss::phi::PhiSpec;
use phidiss::scalar::log_space;
use phidiss::young::young_pair;
use phidiss::Error;

use crate::config::{CoefficientSource, Command, PhiFamilyName, RhsPreset, RunConfig};

/// Tolerances of the identity checks in the `report` command.
const H2PSI_TOL: f64 = 1e-8;
const THPRIME_TOL: f64 = 1e-6;
const PHIPSI_TOL: f64 = 1e-8;
const DUAL_TOL: f64 = 1e-8;

#[derive(Debug, Default)]
pub struct Outcome {
    pub records: Vec<Value>,
    /// `(file name, CSV text)`
    pub plots: Vec<(String, String)>,
    /// Records whose check failed or whose verdict is negative.
    pub failures: Vec<String>,
}

impl Outcome {
    fn push(&mut self, kind: &str, body: impl Serialize) -> anyhow::Result<()> {
        let mut rec = serde_json::Map::new();
        rec.insert("record".into(), Value::String(kind.into()));
        match serde_json::to_value(body)? {
            Value::Object(m) => rec.extend(m),
            other => {
                rec.insert("value".into(), other);
            }
        }
        self.records.push(Value::Object(rec));
        Ok(())
    }

    fn fail(&mut self, kind: &str) {
        self.failures.push(kind.to_string());
    }

    fn plot(&mut self, name: &str, header: &str, rows: impl IntoIterator<Item = String>) {
        let mut text = String::from(header);
        text.push('\n');
        for r in rows {
            text.push_str(&r);
            text.push('\n');
        }
        self.plots.push((name.to_string(), text));
    }
}

pub fn run(cfg: &RunConfig) -> anyhow::Result<Outcome> {
    let mut out = Outcome::default();
    out.push("config", cfg)?;
    match cfg.command {
        Command::Check => check(cfg, &mut out)?,
        Command::VerifyForms => verify_forms(cfg, &mut out)?,
        Command::Solve => solve(cfg, &mut out)?,
        Command::Regularity => regularity(cfg, &mut out)?,
        Command::Report => report(cfg, &mut out)?,
    }
    Ok(out)
}

pub fn build_phi(cfg: &RunConfig) -> anyhow::Result<PhiSpec<f64>> {
    let p = &cfg.phi;
    Ok(match p.family {
        PhiFamilyName::Power => PhiSpec::power(p.p)?,
        PhiFamilyName::ExpSquare => PhiSpec::exp_square(),
        PhiFamilyName::TruncatedPower => PhiSpec::truncated_power(p.p, p.k)?,
    })
}

fn lambda_options(cfg: &RunConfig) -> LambdaOptions<f64> {
    LambdaOptions { horizon: cfg.phi.horizon, nodes_per_decade: cfg.phi.nodes_per_decade, ..LambdaOptions::default() }
}

pub fn build_profile(cfg: &RunConfig) -> anyhow::Result<LambdaProfile<f64>> {
    Ok(LambdaProfile::with_options(build_phi(cfg)?, lambda_options(cfg)))
}

pub fn build_field(cfg: &RunConfig) -> anyhow::Result<CoefficientField<f64>> {
    let g = &cfg.grid;
    let grid = Grid2::new(g.domain[0], g.domain[1], g.domain[2], g.domain[3], g.nx, g.ny)?;
    Ok(match &cfg.coefficients {
        CoefficientSource::Constant { lambda, mu } => CoefficientField::constant(grid, *lambda, *mu)?,
        CoefficientSource::Ramp { lambda_left, lambda_right, mu } => {
            CoefficientField::ramp(grid, *lambda_left, *lambda_right, *mu)?
        }
        CoefficientSource::Checkerboard { block, a, b } => {
            CoefficientField::checkerboard(grid, *block, (a[0], a[1]), (b[0], b[1]))?
        }
        CoefficientSource::Radial { base, bump, width } => {
            CoefficientField::radial(grid, (base[0], base[1]), (bump[0], bump[1]), *width)?
        }
        CoefficientSource::File { path } => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            CoefficientField::from_grid_text(&text)?
        }
    })
}

fn constant_pair(cfg: &RunConfig) -> Option<(f64, f64)> {
    match cfg.coefficients {
        CoefficientSource::Constant { lambda, mu } => Some((lambda, mu)),
        _ => None,
    }
}

fn verdict_options(cfg: &RunConfig) -> VerdictOptions<f64> {
    VerdictOptions { c0: cfg.criteria.c0, kappa_hint: cfg.criteria.kappa, boundary_rtol: cfg.criteria.boundary_rtol }
}

fn lambda_profile_plot(cfg: &RunConfig, profile: &LambdaProfile<f64>, out: &mut Outcome) -> anyhow::Result<()> {
    let lo = profile.options().t_min;
    let ts = log_space(lo, cfg.phi.horizon, cfg.phi.profile_nodes);
    let mut rows = Vec::with_capacity(ts.len());
    for t in ts {
        let l = profile.lambda(t)?;
        rows.push(format!("{t:e},{l:e},{:e}", l * l));
    }
    out.plot("lambda_profile.csv", "t,lambda,lambda_sq", rows);
    Ok(())
}

fn verdict_record(name: &str, v: &Verdict<f64>, out: &mut Outcome) -> anyhow::Result<()> {
    out.push(name, v)?;
    if v.status == VerdictStatus::NotDissipative {
        out.fail(name);
    }
    Ok(())
}

fn check(cfg: &RunConfig, out: &mut Outcome) -> anyhow::Result<()> {
    let profile = build_profile(cfg)?;
    out.push("phi_validation", profile.phi().validate()?)?;
    out.push("lambda_summary", profile.lambda_infinity()?)?;
    let field = build_field(cfg)?;
    let opts = verdict_options(cfg);
    let verdict = lame2d_verdict(&profile, &field, &opts)?;
    verdict_record("verdict", &verdict, out)?;
    if let Some((l, m)) = constant_pair(cfg) {
        out.push("verdict_nd", lame_nd_sufficient(&profile, l, m)?)?;
    }
    if let Some(k) = verdict.kappa.filter(|_| verdict.status == VerdictStatus::StrictDissipative) {
        out.push("perturbation_budget", perturbation_budget(&profile, 2, k)?)?;
    }
    lambda_profile_plot(cfg, &profile, out)?;
    if let Some(s) = &cfg.sweep {
        let mut rows = Vec::with_capacity(s.steps);
        let mut statuses = Vec::with_capacity(s.steps);
        let ps: Vec<f64> =
            (0..s.steps).map(|i| s.p_min + (s.p_max - s.p_min) * i as f64 / (s.steps - 1) as f64).collect();
        for &p in &ps {
            let prof = LambdaProfile::with_options(PhiSpec::power(p)?, lambda_options(cfg));
            let v = lame2d_verdict(&prof, &field, &opts)?;
            rows.push(format!("{p:e},{:e},{:e},{:e},{:?}", v.lambda_inf_sq, v.rhs, v.margin, v.status));
            statuses.push(v.status == VerdictStatus::StrictDissipative);
        }
        out.plot("p_sweep.csv", "p,lambda_inf_sq,rhs,margin,status", rows);
        let mut flips = Vec::new();
        for i in 1..ps.len() {
            if statuses[i - 1] != statuses[i] {
                let (lo, hi) = if statuses[i - 1] { (ps[i - 1], ps[i]) } else { (ps[i], ps[i - 1]) };
                let (a, b) = power_flip(&field, &opts, lo, hi, s.p_tol)?;
                flips.push(json!({ "strict_side": a, "other_side": b }));
            }
        }
        out.push("p_sweep", json!({ "p_min": s.p_min, "p_max": s.p_max, "steps": s.steps, "flips": flips }))?;
    }
    Ok(())
}

fn verify_forms(cfg: &RunConfig, out: &mut Outcome) -> anyhow::Result<()> {
    let profile = build_profile(cfg)?;
    let summary = profile.lambda_infinity()?;
    out.push("lambda_summary", summary)?;
    let field = build_field(cfg)?;
    let verdict = lame2d_verdict(&profile, &field, &verdict_options(cfg))?;
    verdict_record("verdict", &verdict, out)?;
    let coeffs = field.perturbed();
    let domain = cfg.grid.domain;

    // the algebraic condition and, when it fails, a real minimiser for the counterexample
    let mut probe = None;
    let mut algebraic_negative = false;
    if let Some((l, m)) = constant_pair(cfg) {
        if summary.lambda_inf.abs() < 1.0 - 1e-9 {
            let sys = GeneralSystem::lame(2, l, m);
            let search = AlgebraicSearch { seed: cfg.seed, ..AlgebraicSearch::default() };
            let am = algebraic_margin(&sys, summary.lambda_inf, &search)?;
            algebraic_negative = am.min_value < 0.0;
            out.push("algebraic_margin", &am)?;
            if algebraic_negative {
                out.fail("algebraic_margin");
                let real = AlgebraicSearch { random_probes: 0, real_only: true, ..search };
                probe = Some(algebraic_margin(&sys, summary.lambda_inf, &real)?.argmin);
            }
        } else {
            out.push("algebraic_margin", json!({ "skipped": "Lambda_inf^2 = 1; the algebraic search needs |Lambda_inf| < 1" }))?;
        }
    }

    let kappa = cfg.ensemble.kappa.or(verdict.kappa).unwrap_or(0.0);
    let spec = EnsembleSpec {
        poly: cfg.ensemble.poly,
        affine: cfg.ensemble.affine,
        oscillatory: cfg.ensemble.oscillatory,
        seed: cfg.seed,
    };
    let ensemble = standard_ensemble(domain, &spec, probe.as_ref());
    let sm = strict_margin(&coeffs, &profile, &ensemble, kappa)?;
    let worst = &sm.fields[sm.argmin];
    out.push(
        "strict_margin",
        json!({
            "kappa": sm.kappa,
            "fields": sm.fields.len(),
            "min_residual": sm.min_residual,
            "argmin": sm.argmin,
            "argmin_family": worst.family,
            "min_shifted_form": sm.min_shifted_form(),
            "nonnegative": sm.min_residual >= 0.0,
            "note": "finite ensembles can refute strict dissipativity but not prove it",
        }),
    )?;
    if sm.min_residual < 0.0 {
        out.fail("strict_margin");
    }
    out.plot("ensemble.csv", phidiss::forms::StrictMarginReport::<f64>::CSV_HEADER, sm.csv_rows());

    if let Some(p) = &probe {
        let mut opts = CounterexampleOptions::centered(domain);
        opts.max_octave = cfg.ensemble.max_octave;
        opts.amplitude = cfg.ensemble.amplitude;
        let rep = oscillatory_counterexample(&coeffs, &profile, p, kappa, &opts)?;
        out.plot(
            "counterexample.csv",
            "rho,form,grad_sq,residual",
            rep.rows.iter().map(|r| format!("{:e},{:e},{:e},{:e}", r.rho, r.form, r.grad_sq, r.residual)),
        );
        if rep.first_negative.is_some() {
            out.fail("counterexample");
        }
        out.push("counterexample", json!({ "probe": p, "options": opts, "report": rep }))?;
    } else if !algebraic_negative && verdict.status == VerdictStatus::NotDissipative && constant_pair(cfg).is_some() {
        out.push("counterexample", json!({ "skipped": "no algebraic minimiser available" }))?;
    }
    Ok(())
}

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

pub fn build_problem(cfg: &RunConfig, cells: usize) -> anyhow::Result<FemProblem<f64>> {
    let f = &cfg.fem;
    let mesh = if f.dim == 2 { BoxMesh::unit_square(cells)? } else { BoxMesh::unit_cube(cells)? };
    let coeffs = match (constant_pair(cfg), f.dim) {
        (Some((lambda, mu)), _) => FemCoefficients::Constant { lambda, mu },
        (None, 2) => FemCoefficients::Field(build_field(cfg)?),
        (None, _) => bail!("three-dimensional problems need constant coefficients"),
    };
    let rhs = match f.rhs {
        RhsPreset::Zero => RhsField::Zero,
        RhsPreset::Smooth => smooth_rhs(),
        RhsPreset::Manufactured => match (constant_pair(cfg), f.dim) {
            (Some((l, m)), 2) => manufactured::rhs(l, m, 1.0),
            _ => bail!("the manufactured load needs constant coefficients in two dimensions"),
        },
    };
    let p = match cfg.phi.family {
        PhiFamilyName::ExpSquare => bail!("the FEM commands use the power weight; set phi.family to power"),
        _ => cfg.phi.p,
    };
    let mut prob = FemProblem::new(mesh, coeffs, rhs, p);
    prob.cg_tol = f.cg_tol;
    prob.check_admissibility = f.check_admissibility;
    Ok(prob)
}

/// Solves, turning an inadmissible problem into a failed record.
fn solve_checked(prob: &FemProblem<f64>, out: &mut Outcome) -> anyhow::Result<Option<FemSolution<f64>>> {
    match assemble_and_solve(prob) {
        Ok(s) => Ok(Some(s)),
        Err(e @ Error::Inadmissible { .. }) => {
            out.push("admissibility", json!({ "admissible": false, "reason": e.to_string() }))?;
            out.fail("admissibility");
            Ok(None)
        }
        Err(e) => Err(e.into()),
    }
}

fn l2_norm(sol: &FemSolution<f64>) -> f64 {
    let mut acc = 0.0;
    sol.for_each_point(4, |pv| acc += pv.weight * pv.u.iter().map(|x| x * x).sum::<f64>());
    acc.sqrt()
}

fn solve(cfg: &RunConfig, out: &mut Outcome) -> anyhow::Result<()> {
    let prob = build_problem(cfg, cfg.fem.cells)?;
    let Some(sol) = solve_checked(&prob, out)? else { return Ok(()) };
    let mut rec = json!({
        "dim": cfg.fem.dim,
        "cells": cfg.fem.cells,
        "dofs": sol.u.len(),
        "cg": sol.cg,
        "energy": sol.energy,
        "load_work": sol.load_work,
        "max_abs_u": sol.max_abs_u(),
        "l2_norm": l2_norm(&sol),
        "admissibility": sol.admissibility,
    });
    if cfg.fem.rhs == RhsPreset::Manufactured {
        rec["l2_error"] = json!(sol.l2_error(manufactured::solution(1.0)));
    }
    out.push("fem_solution", rec)?;
    let ks = [2.0, 4.0, 8.0, 16.0];
    out.push("weighted_energy", weighted_energy(&sol, prob.p, &ks)?)?;
    Ok(())
}

fn regularity(cfg: &RunConfig, out: &mut Outcome) -> anyhow::Result<()> {
    let f = &cfg.fem;
    let mut rows = Vec::new();
    let mut base_ratios = Vec::new();
    let mut worst_spread: f64 = 0.0;
    for &n in &f.refinements {
        let prob = build_problem(cfg, n)?;
        let mut ratios = Vec::with_capacity(f.scales.len());
        for &c in &f.scales {
            let scaled = prob.scaled(c);
            let Some(sol) = solve_checked(&scaled, out)? else { return Ok(()) };
            let r = regularity_ratio(&sol, &scaled)?;
            rows.push(format!("{n},{c:e},{:e},{:e},{:e}", r.lhs, r.rhs, r.ratio));
            ratios.push(r.ratio);
        }
        let reference = ratios[f.scales.iter().position(|c| *c == 1.0).unwrap_or(0)];
        let spread = ratios.iter().map(|r| ((r - reference) / reference).abs()).fold(0.0, f64::max);
        worst_spread = worst_spread.max(if reference == 0.0 { 0.0 } else { spread });
        base_ratios.push(reference);
    }
    out.plot("regularity.csv", "cells,scale,lhs,rhs,ratio", rows);
    let max = base_ratios.iter().cloned().fold(f64::MIN, f64::max);
    let min = base_ratios.iter().cloned().fold(f64::MAX, f64::min);
    let factor = if min > 0.0 { max / min } else { f64::INFINITY };
    let scale_ok = worst_spread <= f.scale_rtol;
    let refine_ok = factor <= f.refinement_factor;
    out.push(
        "regularity",
        json!({
            "dim": f.dim,
            "p": cfg.phi.p,
            "norm": if f.dim == 2 { "Luxemburg norm of |F|^2 for the log-type Young function, to the power p/2" } else { "L^{Np/(N+p-2)} norm of F, to the power p" },
            "refinements": f.refinements,
            "scales": f.scales,
            "ratios": base_ratios,
            "scale_spread": worst_spread,
            "refinement_factor": factor,
            "scale_invariant": scale_ok,
            "bounded": refine_ok,
        }),
    )?;
    if !(scale_ok && refine_ok) {
        out.fail("regularity");
    }
    Ok(())
}

fn report(cfg: &RunConfig, out: &mut Outcome) -> anyhow::Result<()> {
    let profile = build_profile(cfg)?;
    let validation = profile.phi().validate()?;
    let valid = validation.all_required_hold();
    out.push("phi_validation", &validation)?;
    if !valid {
        out.fail("phi_validation");
    }
    out.push("lambda_summary", profile.lambda_infinity()?)?;
    let r = identity_residuals(&profile, &log_space(1e-4, 1e4, 200))?;
    let ok = r.h2psi <= H2PSI_TOL
        && r.th_prime <= THPRIME_TOL
        && r.phipsi <= PHIPSI_TOL
        && r.theta_dual <= DUAL_TOL
        && r.lambda_dual <= DUAL_TOL;
    out.push(
        "identities",
        json!({
            "residuals": r,
            "tolerances": { "h2psi": H2PSI_TOL, "th_prime": THPRIME_TOL, "phipsi": PHIPSI_TOL, "dual": DUAL_TOL },
            "pass": ok,
        }),
    )?;
    if !ok {
        out.fail("identities");
    }
    let pair = young_pair(profile.phi());
    let grid: Vec<f64> = (1..=20).map(|i| 0.1 * i as f64).collect();
    let mut min_gap = f64::INFINITY;
    for &s in &grid {
        for &t in &grid {
            min_gap = min_gap.min(pair.young_gap(s, t)?);
        }
    }
    let shape = pair.check_shape(&grid)?;
    let young_ok = min_gap >= -1e-10 && shape >= 0.0;
    out.push(
        "young_pair",
        json!({
            "big_phi_1": pair.big_phi(1.0)?,
            "big_psi_1": pair.big_psi(1.0)?,
            "min_young_gap": min_gap,
            "worst_shape_margin": shape,
            "pass": young_ok,
        }),
    )?;
    if !young_ok {
        out.fail("young_pair");
    }
    lambda_profile_plot(cfg, &profile, out)?;
    Ok(())
}
