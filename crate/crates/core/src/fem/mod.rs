//! Q1 finite elements for the Dirichlet problem `Eu = Div F` on boxes, and the
//! weighted-energy checks built on the discrete solution.

mod mesh;
mod sparse;

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

pub use mesh::{BoxMesh, ShapeTable};
pub use sparse::{pcg, CgStats, Csr};

use crate::criteria::{lame2d_verdict, lame_nd_sufficient, Verdict, VerdictOptions, VerdictStatus};
use crate::error::{Error, Result};
use crate::lambda::LambdaProfile;
use crate::operator::{CoefficientField, Grid2};
use crate::orlicz::{log_young, luxemburg_norm, Samples};
use crate::phi::PhiSpec;
use crate::scalar::Real;

pub type PointFn<T, R> = Arc<dyn Fn([T; 3]) -> R + Send + Sync>;

/// Lamé coefficients of a problem.
#[derive(Clone)]
pub enum FemCoefficients<T> {
    Constant { lambda: T, mu: T },
    /// Gridded 2-D field; perturbations `ε`, `σ` are added.
    Field(CoefficientField<T>),
    /// `x ↦ (λ, μ)`.
    Function(PointFn<T, (T, T)>),
}

impl<T: fmt::Debug> fmt::Debug for FemCoefficients<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FemCoefficients::Constant { lambda, mu } => write!(f, "Constant {{ lambda: {lambda:?}, mu: {mu:?} }}"),
            FemCoefficients::Field(c) => write!(f, "Field({}x{})", c.grid.nx, c.grid.ny),
            FemCoefficients::Function(_) => f.write_str("Function"),
        }
    }
}

impl<T: Real> FemCoefficients<T> {
    fn at(&self, x: [T; 3]) -> (T, T) {
        match self {
            FemCoefficients::Constant { lambda, mu } => (*lambda, *mu),
            FemCoefficients::Field(c) => c.at([x[0], x[1]]),
            FemCoefficients::Function(f) => f(x),
        }
    }
}

/// The matrix field `F` with `(Div F)_j = ∂_i F_ij`.
#[derive(Clone)]
pub enum RhsField<T> {
    Zero,
    Function(PointFn<T, [[T; 3]; 3]>),
    /// Nodal values, interpolated with the Q1 basis.
    Nodal(Vec<[[T; 3]; 3]>),
}

impl<T> fmt::Debug for RhsField<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RhsField::Zero => f.write_str("Zero"),
            RhsField::Function(_) => f.write_str("Function"),
            RhsField::Nodal(v) => write!(f, "Nodal({})", v.len()),
        }
    }
}

#[derive(Debug, Clone)]
pub struct FemProblem<T> {
    pub mesh: BoxMesh<T>,
    pub coeffs: FemCoefficients<T>,
    pub rhs: RhsField<T>,
    /// Multiplies `F`.
    pub rhs_scale: T,
    pub p: T,
    pub check_admissibility: bool,
    pub cg_tol: T,
}

impl<T: Real> FemProblem<T> {
    pub fn new(mesh: BoxMesh<T>, coeffs: FemCoefficients<T>, rhs: RhsField<T>, p: T) -> Self {
        FemProblem { mesh, coeffs, rhs, rhs_scale: T::one(), p, check_admissibility: true, cg_tol: T::lit(1e-10) }
    }

    pub fn scaled(&self, c: T) -> Self {
        let mut out = self.clone();
        out.rhs_scale = self.rhs_scale * c;
        out
    }

    fn validate(&self) -> Result<()> {
        let m = &self.mesh;
        if (0..m.dim).any(|d| m.cells[d] < 8) {
            return Err(Error::InvalidParameter("the mesh needs at least 8 cells per side".into()));
        }
        if !(self.p >= T::lit(2.0)) {
            return Err(Error::InvalidParameter(format!("p must be at least 2, got {}", self.p)));
        }
        if let RhsField::Nodal(v) = &self.rhs {
            if v.len() != m.node_count() {
                return Err(Error::Shape(format!("{} nodal F values for {} nodes", v.len(), m.node_count())));
            }
            if v.iter().flatten().flatten().any(|x| !x.is_finite()) {
                return Err(Error::InvalidParameter("F has non-finite values".into()));
            }
        }
        if let FemCoefficients::Field(_) = &self.coeffs {
            if m.dim != 2 {
                return Err(Error::InvalidParameter("gridded coefficient fields are two-dimensional".into()));
            }
        }
        Ok(())
    }

    fn rhs_at(&self, e_nodes: &[usize; 8], vals: &[T; 8], x: [T; 3]) -> [[T; 3]; 3] {
        let c = self.rhs_scale;
        let mut f = match &self.rhs {
            RhsField::Zero => return [[T::zero(); 3]; 3],
            RhsField::Function(g) => g(x),
            RhsField::Nodal(v) => {
                let mut acc = [[T::zero(); 3]; 3];
                for a in 0..self.mesh.local_nodes() {
                    for (ra, rv) in acc.iter_mut().zip(&v[e_nodes[a]]) {
                        for (x, y) in ra.iter_mut().zip(rv) {
                            *x += vals[a] * *y;
                        }
                    }
                }
                acc
            }
        };
        f.iter_mut().flatten().for_each(|x| *x *= c);
        f
    }

    fn is_zero_rhs(&self) -> bool {
        matches!(self.rhs, RhsField::Zero) || self.rhs_scale == T::zero()
    }
}

/// Checks that the coefficients are strictly `L^p`-dissipative: the planar
/// criterion for `N = 2`, the constant-coefficient condition pointwise for `N = 3`.
pub fn admissibility<T: Real>(prob: &FemProblem<T>) -> Result<Verdict<T>> {
    let profile = LambdaProfile::new(PhiSpec::power(prob.p)?);
    let m = &prob.mesh;
    let verdict = if m.dim == 2 {
        let field = match &prob.coeffs {
            FemCoefficients::Constant { lambda, mu } => {
                CoefficientField::constant(Grid2::new(m.lo[0], m.hi[0], m.lo[1], m.hi[1], 2, 2)?, *lambda, *mu)?
            }
            FemCoefficients::Field(c) => c.perturbed(),
            FemCoefficients::Function(f) => {
                let g = Grid2::new(m.lo[0], m.hi[0], m.lo[1], m.hi[1], m.cells[0] + 1, m.cells[1] + 1)?;
                CoefficientField::from_fn(g, |x| f([x[0], x[1], T::zero()]))?
            }
        };
        let v = lame2d_verdict(&profile, &field, &VerdictOptions::default())?;
        if !(v.margin > T::zero()) {
            return Err(Error::Inadmissible {
                p: prob.p.as_f64(),
                reason: format!("planar condition fails with margin {}", v.margin),
            });
        }
        v
    } else {
        let samples: Vec<(T, T)> = match &prob.coeffs {
            FemCoefficients::Constant { lambda, mu } => vec![(*lambda, *mu)],
            _ => (0..m.element_count())
                .map(|e| {
                    let o = m.element_origin(e);
                    let half = T::lit(0.5);
                    prob.coeffs.at([o[0] + half * m.h(0), o[1] + half * m.h(1), o[2] + half * m.h(2)])
                })
                .collect(),
        };
        let mut worst: Option<Verdict<T>> = None;
        for (l, mu) in samples {
            let v = lame_nd_sufficient(&profile, l, mu)?;
            if worst.as_ref().map_or(true, |w| v.margin < w.margin) {
                worst = Some(v);
            }
        }
        let v = worst.expect("at least one sample");
        if v.status != VerdictStatus::StrictDissipative {
            return Err(Error::Inadmissible {
                p: prob.p.as_f64(),
                reason: format!("constant-coefficient condition fails with margin {}", v.margin),
            });
        }
        v
    };
    Ok(verdict)
}

#[derive(Debug, Clone, Serialize)]
pub struct FemSolution<T> {
    pub mesh: BoxMesh<T>,
    /// Nodal displacement, `u[node · N + component]`, zero on the boundary.
    pub u: Vec<T>,
    pub cg: CgStats,
    /// `½ a(u, u)`.
    pub energy: T,
    /// `∫ F_ij ∂_i u_j`.
    pub load_work: T,
    pub admissibility: Option<Verdict<T>>,
}

struct System<T> {
    matrix: Csr<T>,
    rhs: Vec<T>,
    /// Reduced index of each full DOF, `usize::MAX` on the boundary.
    map: Vec<usize>,
}

fn build_pattern<T: Real>(mesh: &BoxMesh<T>, map: &[usize], nfree: usize) -> Csr<T> {
    let dim = mesh.dim;
    let npa = mesh.nodes_per_axis();
    let mut rows = vec![Vec::new(); nfree];
    for node in 0..mesh.node_count() {
        if mesh.is_boundary(node) {
            continue;
        }
        let ijk = mesh.node_ijk(node);
        let mut cols = Vec::with_capacity(27 * dim);
        let range = |d: usize| {
            if d < dim {
                ijk[d].saturating_sub(1)..(ijk[d] + 2).min(npa[d])
            } else {
                0..1
            }
        };
        for k in range(2) {
            for j in range(1) {
                for i in range(0) {
                    let nb = mesh.node_index([i, j, k]);
                    for c in 0..dim {
                        let r = map[nb * dim + c];
                        if r != usize::MAX {
                            cols.push(r);
                        }
                    }
                }
            }
        }
        for c in 0..dim {
            rows[map[node * dim + c]] = cols.clone();
        }
    }
    Csr::from_pattern(rows)
}

fn local_stiffness<T: Real>(
    mesh: &BoxMesh<T>,
    table: &ShapeTable<T>,
    coef: impl Fn(usize) -> (T, T),
    symmetric_form: bool,
) -> Vec<T> {
    let dim = mesh.dim;
    let nl = mesh.local_nodes();
    let size = nl * dim;
    let mut k = vec![T::zero(); size * size];
    for q in 0..table.weights.len() {
        let (l, m) = coef(q);
        let w = table.weights[q];
        let g = &table.grads[q];
        for a in 0..nl {
            for b in 0..nl {
                let gg: T = (0..dim).map(|d| g[a][d] * g[b][d]).sum();
                for i in 0..dim {
                    for j in 0..dim {
                        let mut v = if i == j { m * gg } else { T::zero() };
                        if symmetric_form {
                            v += m * g[b][i] * g[a][j] + l * g[a][i] * g[b][j];
                        } else {
                            v += (l + m) * g[a][i] * g[b][j];
                        }
                        k[(a * dim + i) * size + b * dim + j] += w * v;
                    }
                }
            }
        }
    }
    k
}

fn assemble<T: Real>(prob: &FemProblem<T>) -> Result<System<T>> {
    let mesh = &prob.mesh;
    let dim = mesh.dim;
    let mut map = vec![usize::MAX; mesh.node_count() * dim];
    let mut nfree = 0;
    for node in 0..mesh.node_count() {
        if !mesh.is_boundary(node) {
            for c in 0..dim {
                map[node * dim + c] = nfree;
                nfree += 1;
            }
        }
    }
    let mut matrix = build_pattern(mesh, &map, nfree);
    let mut rhs = vec![T::zero(); nfree];
    let stiff_table = ShapeTable::new(mesh, 2);
    let load_table = ShapeTable::new(mesh, 3);
    let nl = mesh.local_nodes();
    let size = nl * dim;
    let constant = match &prob.coeffs {
        FemCoefficients::Constant { lambda, mu } => {
            if !(*mu > T::zero() && *lambda + T::lit(2.0) * *mu > T::zero()) {
                return Err(Error::EllipticityViolation {
                    inf_mu: mu.as_f64(),
                    inf_lam2mu: (*lambda + T::lit(2.0) * *mu).as_f64(),
                });
            }
            Some(local_stiffness(mesh, &stiff_table, |_| (*lambda, *mu), false))
        }
        _ => None,
    };
    let field = match &prob.coeffs {
        FemCoefficients::Field(c) => Some(FemCoefficients::Field(c.perturbed())),
        _ => None,
    };
    let coeffs = field.as_ref().unwrap_or(&prob.coeffs);
    for e in 0..mesh.element_count() {
        let nodes = mesh.element_nodes(e);
        let origin = mesh.element_origin(e);
        let at = |off: [T; 3]| [origin[0] + off[0], origin[1] + off[1], origin[2] + off[2]];
        let owned;
        let ke: &[T] = match &constant {
            Some(k) => k,
            None => {
                owned = local_stiffness(
                    mesh,
                    &stiff_table,
                    |q| {
                        let (l, m) = coeffs.at(at(stiff_table.offsets[q]));
                        if !(m > T::zero() && l + T::lit(2.0) * m > T::zero()) {
                            // reported after assembly
                            return (T::nan(), T::nan());
                        }
                        (l, m)
                    },
                    true,
                );
                if owned.iter().any(|v| v.is_nan()) {
                    let (l, m) = coeffs.at(at(stiff_table.offsets[0]));
                    return Err(Error::EllipticityViolation {
                        inf_mu: m.as_f64(),
                        inf_lam2mu: (l + T::lit(2.0) * m).as_f64(),
                    });
                }
                &owned
            }
        };
        for r in 0..size {
            let gr = map[nodes[r / dim] * dim + r % dim];
            if gr == usize::MAX {
                continue;
            }
            for c in 0..size {
                let gc = map[nodes[c / dim] * dim + c % dim];
                if gc != usize::MAX {
                    matrix.add(gr, gc, ke[r * size + c]);
                }
            }
        }
        if !prob.is_zero_rhs() {
            for q in 0..load_table.weights.len() {
                let f = prob.rhs_at(&nodes, &load_table.values[q], at(load_table.offsets[q]));
                let w = load_table.weights[q];
                let g = &load_table.grads[q];
                for a in 0..nl {
                    for j in 0..dim {
                        let gr = map[nodes[a] * dim + j];
                        if gr == usize::MAX {
                            continue;
                        }
                        let mut s = T::zero();
                        for i in 0..dim {
                            s += f[i][j] * g[a][i];
                        }
                        rhs[gr] += w * s;
                    }
                }
            }
        }
    }
    Ok(System { matrix, rhs, map })
}

/// Assembles the Q1 system and solves it with preconditioned conjugate gradients.
pub fn assemble_and_solve<T: Real>(prob: &FemProblem<T>) -> Result<FemSolution<T>> {
    prob.validate()?;
    let admissibility = if prob.check_admissibility { Some(admissibility(prob)?) } else { None };
    let sys = assemble(prob)?;
    let max_iter = 20 * sys.rhs.len().max(10);
    let (x, cg) = pcg(&sys.matrix, &sys.rhs, prob.cg_tol, max_iter)?;
    let mut ax = vec![T::zero(); x.len()];
    sys.matrix.matvec(&x, &mut ax);
    let dot = |a: &[T], b: &[T]| a.iter().zip(b).map(|(p, q)| *p * *q).sum::<T>();
    let energy = T::lit(0.5) * dot(&x, &ax);
    let load_work = dot(&x, &sys.rhs);
    let mut u = vec![T::zero(); sys.map.len()];
    for (full, &r) in sys.map.iter().enumerate() {
        if r != usize::MAX {
            u[full] = x[r];
        }
    }
    Ok(FemSolution { mesh: prob.mesh, u, cg, energy, load_work, admissibility })
}

/// Value and Jacobian (`grad[j][i] = ∂_i u_j`) of the solution at quadrature points.
pub struct PointValues<T> {
    pub x: [T; 3],
    pub weight: T,
    pub u: [T; 3],
    pub grad: [[T; 3]; 3],
    pub element: usize,
    pub local: [T; 8],
}

impl<T: Real> FemSolution<T> {
    pub fn dim(&self) -> usize {
        self.mesh.dim
    }

    pub fn max_abs_u(&self) -> T {
        let d = self.dim();
        self.u.chunks(d).map(|c| c.iter().map(|x| *x * *x).sum::<T>().sqrt()).fold(T::zero(), T::max)
    }

    /// Visits all order-`order` Gauss points of all cells.
    pub fn for_each_point(&self, order: usize, mut f: impl FnMut(&PointValues<T>)) {
        let m = &self.mesh;
        let dim = m.dim;
        let table = ShapeTable::new(m, order);
        for e in 0..m.element_count() {
            let nodes = m.element_nodes(e);
            let o = m.element_origin(e);
            for q in 0..table.weights.len() {
                let mut pv = PointValues {
                    x: [o[0] + table.offsets[q][0], o[1] + table.offsets[q][1], o[2] + table.offsets[q][2]],
                    weight: table.weights[q],
                    u: [T::zero(); 3],
                    grad: [[T::zero(); 3]; 3],
                    element: e,
                    local: table.values[q],
                };
                for a in 0..m.local_nodes() {
                    let na = table.values[q][a];
                    let ga = table.grads[q][a];
                    for j in 0..dim {
                        let ua = self.u[nodes[a] * dim + j];
                        pv.u[j] += na * ua;
                        for i in 0..dim {
                            pv.grad[j][i] += ga[i] * ua;
                        }
                    }
                }
                f(&pv);
            }
        }
    }

    /// `‖u_h − u*‖_{L²}` with order-4 Gauss per cell.
    pub fn l2_error(&self, exact: impl Fn([T; 3]) -> [T; 3]) -> T {
        let mut acc = T::zero();
        self.for_each_point(4, |p| {
            let ex = exact(p.x);
            let d: T = (0..self.dim()).map(|j| (p.u[j] - ex[j]).powi(2)).sum();
            acc += p.weight * d;
        });
        acc.sqrt()
    }

    /// Nodal values at node index `n`.
    pub fn nodal(&self, n: usize) -> &[T] {
        let d = self.dim();
        &self.u[n * d..(n + 1) * d]
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct WeightedEnergy<T> {
    pub p: T,
    pub max_abs_u: T,
    /// `(k, ∫|∇u|² φ_k(|u|))`.
    pub by_k: Vec<(T, T)>,
    /// `∫|∇u|² |u|^{p−2}`, the limit of the truncated values.
    pub untruncated: T,
}

/// `∫ |∇u|² φ_k(|u|)` with the truncated power weights, order-4 Gauss per cell.
pub fn weighted_energy<T: Real>(sol: &FemSolution<T>, p: T, ks: &[T]) -> Result<WeightedEnergy<T>> {
    let phis = ks.iter().map(|&k| PhiSpec::truncated_power(p, k)).collect::<Result<Vec<_>>>()?;
    let full = PhiSpec::power(p)?;
    let mut acc = vec![T::zero(); ks.len()];
    let mut untruncated = T::zero();
    sol.for_each_point(4, |pv| {
        let g2: T = pv.grad.iter().flatten().map(|x| *x * *x).sum();
        let n = pv.u.iter().map(|x| *x * *x).sum::<T>().sqrt();
        for (a, phi) in acc.iter_mut().zip(&phis) {
            *a += pv.weight * g2 * phi.phi(n);
        }
        untruncated += pv.weight * g2 * full.phi(n);
    });
    Ok(WeightedEnergy { p, max_abs_u: sol.max_abs_u(), by_k: ks.iter().copied().zip(acc).collect(), untruncated })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegularityRatio<T> {
    /// `∫ |∇u|² |u|^{p−2}`
    pub lhs: T,
    /// `(∫|F|^{Np/(N+p−2)})^{(N+p−2)/N}` for `N ≥ 3`, `⦀|F|²⦀_Ñ^{p/2}` for `N = 2`.
    pub rhs: T,
    pub ratio: T,
}

/// Ratio of the weighted energy to the norm of the data.
pub fn regularity_ratio<T: Real>(sol: &FemSolution<T>, prob: &FemProblem<T>) -> Result<RegularityRatio<T>> {
    let p = prob.p;
    let lhs = weighted_energy(sol, p, &[])?.untruncated;
    let dim = prob.mesh.dim;
    let nf = T::from_usize_lossy(dim);
    let mut f2 = Vec::new();
    let mut w = Vec::new();
    sol.for_each_point(4, |pv| {
        let nodes = prob.mesh.element_nodes(pv.element);
        let f = prob.rhs_at(&nodes, &pv.local, pv.x);
        let s: T = (0..dim).flat_map(|i| (0..dim).map(move |j| (i, j))).map(|(i, j)| f[i][j] * f[i][j]).sum();
        f2.push(s);
        w.push(pv.weight);
    });
    let rhs = if dim == 2 {
        let samples = Samples::new(f2, w)?;
        luxemburg_norm(&samples, &log_young(p.max(T::lit(2.0) + T::lit(1e-12)))?)?.powf(p / T::lit(2.0))
    } else {
        let q = nf * p / (nf + p - T::lit(2.0));
        let integral: T = f2.iter().zip(&w).map(|(s, wt)| *wt * s.sqrt().powf(q)).sum();
        integral.powf((nf + p - T::lit(2.0)) / nf)
    };
    let ratio = if rhs == T::zero() { T::zero() } else { lhs / rhs };
    Ok(RegularityRatio { lhs, rhs, ratio })
}

/// Hölder exponents `α = Np/((N−2)(p−2))` and `α′ = Np/(2(N+p)−4)`.
pub fn holder_exponents<T: Real>(n: usize, p: T) -> (T, T) {
    let nf = T::from_usize_lossy(n);
    let two = T::lit(2.0);
    (nf * p / ((nf - two) * (p - two)), nf * p / (two * (nf + p) - T::lit(4.0)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HolderSplit<T> {
    pub alpha: T,
    pub alpha_prime: T,
    pub k: T,
    /// `min over points of |v_k|^{2(p−2)/p} − φ_k(|u|)`.
    pub pointwise_slack: T,
    /// Largest `|φ_k(|u|) − |v_k|^{2(p−2)/p}|` over points with `|u| ≤ k − 1`.
    pub below_band_gap: T,
    /// `∫ |F|² φ_k(|u|)`
    pub lhs: T,
    /// `(∫ φ_k^α)^{1/α} (∫ |F|^{2α′})^{1/α′}`
    pub rhs: T,
    pub slack: T,
}

/// Checks `φ_k(|u|) ≤ |v_k|^{2(p−2)/p}` at quadrature points and the Hölder split
/// of `∫ |F|² φ_k(|u|)`.
pub fn holder_split_check<T: Real>(sol: &FemSolution<T>, prob: &FemProblem<T>, k: T) -> Result<HolderSplit<T>> {
    let dim = prob.mesh.dim;
    if dim < 3 {
        return Err(Error::InvalidParameter("the Hölder split needs N ≥ 3".into()));
    }
    let p = prob.p;
    let two = T::lit(2.0);
    let (alpha, alpha_p) = holder_exponents(dim, p);
    let phi = PhiSpec::truncated_power(p, k)?;
    let e = two * (p - two) / p;
    let mut slack = T::infinity();
    let mut gap = T::zero();
    let (mut lhs, mut ia, mut ib) = (T::zero(), T::zero(), T::zero());
    sol.for_each_point(4, |pv| {
        let n = pv.u.iter().map(|x| *x * *x).sum::<T>().sqrt();
        let w = phi.phi(n);
        let vk = w.sqrt() * n;
        let bound = if e == T::zero() { T::one() } else { vk.powf(e) };
        slack = slack.min(bound - w);
        if n <= k - T::one() {
            gap = gap.max((bound - w).abs());
        }
        let nodes = prob.mesh.element_nodes(pv.element);
        let f = prob.rhs_at(&nodes, &pv.local, pv.x);
        let f2: T = f.iter().flatten().map(|x| *x * *x).sum();
        lhs += pv.weight * f2 * w;
        ia += pv.weight * w.powf(alpha);
        ib += pv.weight * f2.powf(alpha_p);
    });
    let rhs = if p == two {
        // α = ∞: the first factor is sup φ_k = 1
        ib.powf(T::one() / alpha_p)
    } else {
        ia.powf(T::one() / alpha) * ib.powf(T::one() / alpha_p)
    };
    Ok(HolderSplit { alpha, alpha_prime: alpha_p, k, pointwise_slack: slack, below_band_gap: gap, lhs, rhs, slack: rhs - lhs })
}

/// Smooth data with a known solution on the unit square.
pub mod manufactured {
    use super::*;

    /// `u* = c (sin πx sin πy, sin πx sin πy)`.
    pub fn solution<T: Real>(c: T) -> impl Fn([T; 3]) -> [T; 3] {
        move |x| {
            let s = (T::PI() * x[0]).sin() * (T::PI() * x[1]).sin() * c;
            [s, s, T::zero()]
        }
    }

    /// `F_ij = μ ∂_i u*_j + (λ+μ) div u* δ_ij`, so that `Div F = E u*`.
    pub fn rhs<T: Real>(lambda: T, mu: T, c: T) -> RhsField<T> {
        RhsField::Function(Arc::new(move |x: [T; 3]| {
            let pi = T::PI();
            let (sx, cx) = ((pi * x[0]).sin(), (pi * x[0]).cos());
            let (sy, cy) = ((pi * x[1]).sin(), (pi * x[1]).cos());
            let d = [c * pi * cx * sy, c * pi * sx * cy];
            let div = d[0] + d[1];
            let mut f = [[T::zero(); 3]; 3];
            for i in 0..2 {
                for j in 0..2 {
                    f[i][j] = mu * d[i];
                }
                f[i][i] += (lambda + mu) * div;
            }
            f
        }))
    }

    /// `F₁₁ = x₁`, `F₁₂ = sin πx₁`: a load varying along `x₁` only.
    pub fn fiber_rhs<T: Real>() -> RhsField<T> {
        RhsField::Function(Arc::new(|x: [T; 3]| {
            let mut f = [[T::zero(); 3]; 3];
            f[0][0] = x[0];
            f[0][1] = (T::PI() * x[0]).sin();
            f
        }))
    }

    /// Solution of the two-point problems for [`fiber_rhs`] on `0 ≤ x₁ ≤ 1`.
    pub fn fiber_solution<T: Real>(lambda: T, mu: T, x1: T) -> [T; 2] {
        let two = T::lit(2.0);
        let pi = T::PI();
        [
            (x1 * x1 - x1) / (two * (lambda + two * mu)),
            (T::one() - (pi * x1).cos() - two * x1) / (pi * mu),
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square_problem(n: usize, rhs: RhsField<f64>) -> FemProblem<f64> {
        FemProblem::new(BoxMesh::unit_square(n).unwrap(), FemCoefficients::Constant { lambda: 1.0, mu: 1.0 }, rhs, 4.0)
    }

    #[test]
    fn zero_load_gives_zero_solution() {
        let sol = assemble_and_solve(&square_problem(8, RhsField::Zero)).unwrap();
        assert!(sol.u.iter().all(|x| *x == 0.0));
        let we = weighted_energy(&sol, 4.0, &[2.0, 5.0]).unwrap();
        assert!(we.by_k.iter().all(|(_, v)| *v == 0.0));
        let r = regularity_ratio(&sol, &square_problem(8, RhsField::Zero)).unwrap();
        assert_eq!(r.ratio, 0.0);
    }

    #[test]
    fn manufactured_solution_converges() {
        let mut errs = Vec::new();
        for n in [8, 16, 32] {
            let prob = square_problem(n, manufactured::rhs(1.0, 1.0, 1.0));
            let sol = assemble_and_solve(&prob).unwrap();
            errs.push(sol.l2_error(manufactured::solution(1.0)));
            assert!((2.0 * sol.energy - sol.load_work).abs() < 1e-8 * sol.load_work);
        }
        for w in errs.windows(2) {
            let order = (w[0] / w[1]).log2();
            assert!((1.8..=2.2).contains(&order), "order {order}");
        }
    }

    #[test]
    fn variable_form_matches_constant_form() {
        let a = square_problem(8, manufactured::rhs(1.0, 1.0, 1.0));
        let mut b = a.clone();
        b.coeffs = FemCoefficients::Function(Arc::new(|_| (1.0, 1.0)));
        let (sa, sb) = (assemble_and_solve(&a).unwrap(), assemble_and_solve(&b).unwrap());
        for (x, y) in sa.u.iter().zip(&sb.u) {
            assert!((x - y).abs() < 1e-9);
        }
    }

    #[test]
    fn inadmissible_exponent_is_rejected() {
        let mut prob = square_problem(8, RhsField::Zero);
        prob.p = 40.0;
        assert!(matches!(assemble_and_solve(&prob), Err(Error::Inadmissible { .. })));
        prob.coeffs = FemCoefficients::Constant { lambda: 1.0, mu: -1.0 };
        prob.p = 2.0;
        assert!(assemble_and_solve(&prob).is_err());
    }

    #[test]
    fn weighted_energy_limits() {
        let prob = square_problem(8, manufactured::rhs(1.0, 1.0, 1.0));
        let sol = assemble_and_solve(&prob).unwrap();
        let m = sol.max_abs_u();
        let we = weighted_energy(&sol, 4.0, &[1.2, 1.5, m + 1.0, m + 3.0]).unwrap();
        for w in we.by_k.windows(2) {
            assert!(w[1].1 >= w[0].1);
        }
        assert_eq!(we.by_k[2].1, we.untruncated);
        let plain = weighted_energy(&sol, 2.0, &[1.5, 4.0]).unwrap();
        let mut dir = 0.0;
        sol.for_each_point(4, |p| dir += p.weight * p.grad.iter().flatten().map(|x| x * x).sum::<f64>());
        for (_, v) in plain.by_k {
            assert!((v - dir).abs() < 1e-12 * dir);
        }
    }

    #[test]
    fn holder_exponents_are_conjugate() {
        for n in [3usize, 4, 5] {
            for p in [2.5, 3.0, 4.0, 7.0] {
                let (a, b): (f64, f64) = holder_exponents(n, p);
                assert!((1.0 / a + 1.0 / b - 1.0).abs() < 1e-14);
            }
        }
    }
}
