use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Node grid on the rectangle `[x0, x1] × [y0, y1]` with `nx × ny` nodes.
/// Node `(i, j)` is stored at `j * nx + i`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Grid2<T> {
    pub x0: T,
    pub x1: T,
    pub y0: T,
    pub y1: T,
    pub nx: usize,
    pub ny: usize,
}

impl<T: Real> Grid2<T> {
    pub fn new(x0: T, x1: T, y0: T, y1: T, nx: usize, ny: usize) -> Result<Self> {
        if !(x1 > x0 && y1 > y0) || nx < 2 || ny < 2 {
            return Err(Error::Shape(format!("bad grid [{x0},{x1}]x[{y0},{y1}] with {nx}x{ny} nodes")));
        }
        Ok(Grid2 { x0, x1, y0, y1, nx, ny })
    }

    pub fn unit(nx: usize, ny: usize) -> Self {
        Grid2::new(T::zero(), T::one(), T::zero(), T::one(), nx, ny).expect("unit grid")
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dx(&self) -> T {
        (self.x1 - self.x0) / T::from_usize_lossy(self.nx - 1)
    }

    pub fn dy(&self) -> T {
        (self.y1 - self.y0) / T::from_usize_lossy(self.ny - 1)
    }

    pub fn node(&self, i: usize, j: usize) -> [T; 2] {
        [
            self.x0 + self.dx() * T::from_usize_lossy(i),
            self.y0 + self.dy() * T::from_usize_lossy(j),
        ]
    }

    pub fn nodes(&self) -> impl Iterator<Item = [T; 2]> + '_ {
        (0..self.ny).flat_map(move |j| (0..self.nx).map(move |i| self.node(i, j)))
    }

    pub fn contains(&self, x: [T; 2]) -> bool {
        x[0] >= self.x0 && x[0] <= self.x1 && x[1] >= self.y0 && x[1] <= self.y1
    }

    /// Bilinear interpolation of node values, clamped to the rectangle.
    pub fn interpolate(&self, vals: &[T], x: [T; 2]) -> T {
        let fx = ((x[0] - self.x0) / self.dx()).max(T::zero());
        let fy = ((x[1] - self.y0) / self.dy()).max(T::zero());
        let i = fx.floor().to_usize().unwrap_or(0).min(self.nx - 2);
        let j = fy.floor().to_usize().unwrap_or(0).min(self.ny - 2);
        let tx = (fx - T::from_usize_lossy(i)).min(T::one());
        let ty = (fy - T::from_usize_lossy(j)).min(T::one());
        let v = |a: usize, b: usize| vals[(j + b) * self.nx + i + a];
        let one = T::one();
        (one - tx) * (one - ty) * v(0, 0) + tx * (one - ty) * v(1, 0) + (one - tx) * ty * v(0, 1) + tx * ty * v(1, 1)
    }
}

/// Scalar node values on a [`Grid2`].
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarGrid<T> {
    pub grid: Grid2<T>,
    pub values: Vec<T>,
}

impl<T: Real> ScalarGrid<T> {
    pub fn new(grid: Grid2<T>, values: Vec<T>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Shape(format!("{} values for {} nodes", values.len(), grid.len())));
        }
        Ok(ScalarGrid { grid, values })
    }

    pub fn from_fn(grid: Grid2<T>, f: impl Fn([T; 2]) -> T) -> Self {
        let values = grid.nodes().map(f).collect();
        ScalarGrid { grid, values }
    }

    pub fn at(&self, x: [T; 2]) -> T {
        self.grid.interpolate(&self.values, x)
    }
}

/// Node-sampled Lamé parameters, optionally with perturbations ε (of λ) and σ (of μ).
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientField<T> {
    pub grid: Grid2<T>,
    pub lambda: Vec<T>,
    pub mu: Vec<T>,
    pub eps: Option<Vec<T>>,
    pub sigma: Option<Vec<T>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EssBounds<T> {
    pub inf_mu: T,
    pub inf_lam2mu: T,
    /// `max ((λ+μ)/(λ+3μ))²`
    pub sup_ratio: T,
}

impl<T: Real> CoefficientField<T> {
    pub fn new(grid: Grid2<T>, lambda: Vec<T>, mu: Vec<T>) -> Result<Self> {
        if lambda.len() != grid.len() || mu.len() != grid.len() {
            return Err(Error::Shape(format!(
                "lambda/mu have {}/{} values, grid has {} nodes",
                lambda.len(),
                mu.len(),
                grid.len()
            )));
        }
        if lambda.iter().chain(&mu).any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("non-finite coefficient value".into()));
        }
        Ok(CoefficientField { grid, lambda, mu, eps: None, sigma: None })
    }

    pub fn from_fn(grid: Grid2<T>, f: impl Fn([T; 2]) -> (T, T)) -> Result<Self> {
        let (lambda, mu) = grid.nodes().map(f).unzip();
        Self::new(grid, lambda, mu)
    }

    pub fn constant(grid: Grid2<T>, lambda: T, mu: T) -> Result<Self> {
        Self::from_fn(grid, |_| (lambda, mu))
    }

    /// λ varies linearly in x from `lam_left` to `lam_right`; μ constant.
    pub fn ramp(grid: Grid2<T>, lam_left: T, lam_right: T, mu: T) -> Result<Self> {
        let (x0, w) = (grid.x0, grid.x1 - grid.x0);
        Self::from_fn(grid, |x| (lam_left + (lam_right - lam_left) * (x[0] - x0) / w, mu))
    }

    /// Alternating `(lambda_a, mu_a)` / `(lambda_b, mu_b)` on blocks of `block` nodes.
    pub fn checkerboard(grid: Grid2<T>, block: usize, a: (T, T), b: (T, T)) -> Result<Self> {
        let block = block.max(1);
        let (lambda, mu) = (0..grid.ny)
            .flat_map(|j| (0..grid.nx).map(move |i| if (i / block + j / block) % 2 == 0 { a } else { b }))
            .unzip();
        Self::new(grid, lambda, mu)
    }

    /// Gaussian bump of `(d_lambda, d_mu)` of width `width` centred in the rectangle.
    pub fn radial(grid: Grid2<T>, base: (T, T), bump: (T, T), width: T) -> Result<Self> {
        let two = T::lit(2.0);
        let c = [(grid.x0 + grid.x1) / two, (grid.y0 + grid.y1) / two];
        Self::from_fn(grid, |x| {
            let r2 = (x[0] - c[0]).powi(2) + (x[1] - c[1]).powi(2);
            let g = (-r2 / (width * width)).exp();
            (base.0 + bump.0 * g, base.1 + bump.1 * g)
        })
    }

    pub fn with_perturbation(mut self, eps: Vec<T>, sigma: Vec<T>) -> Result<Self> {
        if eps.len() != self.grid.len() || sigma.len() != self.grid.len() {
            return Err(Error::Shape("perturbation arrays do not match the grid".into()));
        }
        self.eps = Some(eps);
        self.sigma = Some(sigma);
        Ok(self)
    }

    /// λ + ε and μ + σ as a plain field.
    pub fn perturbed(&self) -> Self {
        let add = |base: &[T], d: &Option<Vec<T>>| match d {
            Some(d) => base.iter().zip(d).map(|(a, b)| *a + *b).collect(),
            None => base.to_vec(),
        };
        CoefficientField {
            grid: self.grid,
            lambda: add(&self.lambda, &self.eps),
            mu: add(&self.mu, &self.sigma),
            eps: None,
            sigma: None,
        }
    }

    pub fn is_constant(&self) -> bool {
        let same = |v: &[T]| v.iter().all(|x| *x == v[0]);
        same(&self.lambda) && same(&self.mu)
    }

    /// Bilinearly interpolated `(λ, μ)` at `x`.
    pub fn at(&self, x: [T; 2]) -> (T, T) {
        (self.grid.interpolate(&self.lambda, x), self.grid.interpolate(&self.mu, x))
    }

    fn node_map(&self, f: impl Fn(T, T) -> T) -> ScalarGrid<T> {
        let values = self.lambda.iter().zip(&self.mu).map(|(&l, &m)| f(l, m)).collect();
        ScalarGrid { grid: self.grid, values }
    }

    /// μ²/(λ+3μ), the function whose BMO seminorm enters the sufficiency test.
    pub fn commutator_weight(&self) -> ScalarGrid<T> {
        self.node_map(|l, m| m * m / (l + T::lit(3.0) * m))
    }

    /// Reads the text grid format:
    ///
    /// ```text
    /// x0,x1,y0,y1,nx,ny
    /// @lambda
    /// <ny rows of nx comma-separated values, x fastest>
    /// @mu
    /// ...
    /// ```
    ///
    /// Optional `@eps` and `@sigma` sections follow. Lines starting with `#` are ignored.
    pub fn from_grid_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#'));
        let header = lines.next().ok_or_else(|| Error::Parse("empty grid file".into()))?;
        let h: Vec<&str> = header.split(',').map(str::trim).collect();
        if h.len() != 6 {
            return Err(Error::Parse(format!("header needs x0,x1,y0,y1,nx,ny, got `{header}`")));
        }
        let num = |s: &str| s.parse::<f64>().map_err(|e| Error::Parse(format!("`{s}`: {e}")));
        let int = |s: &str| s.parse::<usize>().map_err(|e| Error::Parse(format!("`{s}`: {e}")));
        let grid = Grid2::new(
            T::lit(num(h[0])?),
            T::lit(num(h[1])?),
            T::lit(num(h[2])?),
            T::lit(num(h[3])?),
            int(h[4])?,
            int(h[5])?,
        )?;
        let mut sections: Vec<(String, Vec<T>)> = Vec::new();
        for line in lines {
            if let Some(name) = line.strip_prefix('@') {
                sections.push((name.trim().to_string(), Vec::new()));
                continue;
            }
            let (_, vals) = sections
                .last_mut()
                .ok_or_else(|| Error::Parse("values before the first @section".into()))?;
            for v in line.split(',').map(str::trim).filter(|v| !v.is_empty()) {
                vals.push(T::lit(num(v)?));
            }
        }
        let mut take = |name: &str| sections.iter().position(|s| s.0 == name).map(|i| sections.swap_remove(i).1);
        let lambda = take("lambda").ok_or_else(|| Error::Parse("missing @lambda".into()))?;
        let mu = take("mu").ok_or_else(|| Error::Parse("missing @mu".into()))?;
        let eps = take("eps");
        let sigma = take("sigma");
        let field = Self::new(grid, lambda, mu)?;
        match (eps, sigma) {
            (None, None) => Ok(field),
            (e, s) => {
                let n = grid.len();
                field.with_perturbation(e.unwrap_or_else(|| vec![T::zero(); n]), s.unwrap_or_else(|| vec![T::zero(); n]))
            }
        }
    }

    pub fn to_grid_text(&self) -> String {
        let g = &self.grid;
        let mut out = format!("{},{},{},{},{},{}\n", g.x0, g.x1, g.y0, g.y1, g.nx, g.ny);
        let mut section = |name: &str, vals: &[T]| {
            let _ = writeln!(out, "@{name}");
            for row in vals.chunks(g.nx) {
                let row: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
                let _ = writeln!(out, "{}", row.join(","));
            }
        };
        section("lambda", &self.lambda);
        section("mu", &self.mu);
        if let (Some(e), Some(s)) = (&self.eps, &self.sigma) {
            section("eps", e);
            section("sigma", s);
        }
        out
    }
}

/// Node-wise `min μ`, `min (λ+2μ)` and `max ((λ+μ)/(λ+3μ))²`.
pub fn ess_bounds<T: Real>(field: &CoefficientField<T>) -> Result<EssBounds<T>> {
    let two = T::lit(2.0);
    let three = T::lit(3.0);
    let mut inf_mu = T::infinity();
    let mut inf_lam2mu = T::infinity();
    let mut sup_ratio = T::zero();
    for (&l, &m) in field.lambda.iter().zip(&field.mu) {
        inf_mu = inf_mu.min(m);
        inf_lam2mu = inf_lam2mu.min(l + two * m);
    }
    if !(inf_mu > T::zero() && inf_lam2mu > T::zero()) {
        return Err(Error::EllipticityViolation { inf_mu: inf_mu.as_f64(), inf_lam2mu: inf_lam2mu.as_f64() });
    }
    for (&l, &m) in field.lambda.iter().zip(&field.mu) {
        let d = l + three * m;
        debug_assert!(d > T::zero());
        sup_ratio = sup_ratio.max(((l + m) / d).powi(2));
    }
    Ok(EssBounds { inf_mu, inf_lam2mu, sup_ratio })
}

/// γ = μ(λ+μ)/(λ+3μ) at the nodes, paired with γ − μ = −2μ²/(λ+3μ).
pub fn gamma_field<T: Real>(field: &CoefficientField<T>) -> Result<(ScalarGrid<T>, ScalarGrid<T>)> {
    ess_bounds(field)?;
    let three = T::lit(3.0);
    let gamma = field.node_map(|l, m| m * (l + m) / (l + three * m));
    let shift = field.node_map(|l, m| -T::lit(2.0) * m * m / (l + three * m));
    Ok((gamma, shift))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(n: usize) -> Grid2<f64> {
        Grid2::unit(n, n)
    }

    #[test]
    fn ess_bounds_examples() {
        let f = CoefficientField::constant(g(5), 1.0, 1.0).unwrap();
        assert_eq!(ess_bounds(&f).unwrap().sup_ratio, 0.25);
        let f = CoefficientField::constant(g(5), -1.0, 1.0).unwrap();
        assert_eq!(ess_bounds(&f).unwrap().sup_ratio, 0.0);
        let f = CoefficientField::ramp(g(11), 0.0, 1.0, 1.0).unwrap();
        let b = ess_bounds(&f).unwrap();
        assert_eq!(b.sup_ratio, 0.25);
        assert_eq!(b.inf_lam2mu, 2.0);
        let bad = CoefficientField::constant(g(3), -3.0, 1.0).unwrap();
        assert!(matches!(ess_bounds(&bad), Err(Error::EllipticityViolation { .. })));
    }

    #[test]
    fn gamma_examples() {
        for (l, m, want) in [(1.0, 1.0, 0.5), (-1.0, 1.0, 0.0), (0.0, 1.0, 1.0 / 3.0)] {
            let f = CoefficientField::constant(g(3), l, m).unwrap();
            let (gm, shift) = gamma_field(&f).unwrap();
            assert!((gm.values[0] - want).abs() < 1e-15);
            assert!((gm.values[0] - m - shift.values[0]).abs() < 1e-15);
        }
    }

    #[test]
    fn grid_text_roundtrip() {
        let f = CoefficientField::radial(Grid2::new(0.0, 2.0, -1.0, 1.0, 4, 3).unwrap(), (1.0, 1.0), (0.5, 0.25), 0.3)
            .unwrap()
            .with_perturbation(vec![0.01; 12], vec![-0.02; 12])
            .unwrap();
        let back = CoefficientField::<f64>::from_grid_text(&f.to_grid_text()).unwrap();
        assert_eq!(back, f);
        assert!(CoefficientField::<f64>::from_grid_text("0,1,0,1,2,2\n@lambda\n1,1\n1,1\n").is_err());
    }

    #[test]
    fn interpolation_reproduces_bilinear() {
        let f = ScalarGrid::from_fn(Grid2::<f64>::new(0.0, 2.0, 0.0, 1.0, 5, 4).unwrap(), |x| 1.0 + 2.0 * x[0] - x[1] + x[0] * x[1]);
        for x in [[0.3, 0.7], [1.9, 0.05], [2.0, 1.0]] {
            assert!((f.at(x) - (1.0 + 2.0 * x[0] - x[1] + x[0] * x[1])).abs() < 1e-13);
        }
    }
}
