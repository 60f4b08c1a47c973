use crate::operator::field::ScalarGrid;
use crate::scalar::Real;

/// Piecewise-constant cell values, cell `(i, j)` at `j * ncx + i`.
#[derive(Debug, Clone, PartialEq)]
pub struct CellField<T> {
    pub ncx: usize,
    pub ncy: usize,
    pub values: Vec<T>,
}

impl<T: Real> CellField<T> {
    /// Each cell takes the mean of its four corner nodes.
    pub fn from_nodes(f: &ScalarGrid<T>) -> Self {
        let (nx, ny) = (f.grid.nx, f.grid.ny);
        let quarter = T::lit(0.25);
        let mut values = Vec::with_capacity((nx - 1) * (ny - 1));
        for j in 0..ny - 1 {
            for i in 0..nx - 1 {
                let v = |a: usize, b: usize| f.values[(j + b) * nx + i + a];
                values.push(quarter * (v(0, 0) + v(1, 0) + v(0, 1) + v(1, 1)));
            }
        }
        CellField { ncx: nx - 1, ncy: ny - 1, values }
    }
}

/// Dyadic squares in index space: level `l` splits `[0, n)` at `floor(i n / 2^l)`.
/// Levels stop once a piece would hold fewer than two cells along either axis.
pub(crate) fn dyadic_boxes(ncx: usize, ncy: usize) -> Vec<(usize, usize, usize, usize)> {
    let mut out = Vec::new();
    let mut parts = 1usize;
    while ncx / parts >= 2 && ncy / parts >= 2 {
        for by in 0..parts {
            let (y0, y1) = (by * ncy / parts, (by + 1) * ncy / parts);
            for bx in 0..parts {
                let (x0, x1) = (bx * ncx / parts, (bx + 1) * ncx / parts);
                out.push((x0, x1, y0, y1));
            }
        }
        parts *= 2;
    }
    out
}

/// Largest mean oscillation `|Q|⁻¹ ∫_Q |f − f_Q|` over dyadic squares.
/// A lower estimate of the BMO seminorm.
pub fn bmo_seminorm_cells<T: Real>(f: &CellField<T>) -> T {
    let (nx, ny) = (f.ncx, f.ncy);
    if nx == 0 || ny == 0 {
        return T::zero();
    }
    // Summed-area table for the box means.
    let w = nx + 1;
    let mut sat = vec![T::zero(); w * (ny + 1)];
    for j in 0..ny {
        let mut row = T::zero();
        for i in 0..nx {
            row += f.values[j * nx + i];
            sat[(j + 1) * w + i + 1] = sat[j * w + i + 1] + row;
        }
    }
    let mut best = T::zero();
    for (x0, x1, y0, y1) in dyadic_boxes(nx, ny) {
        let count = T::from_usize_lossy((x1 - x0) * (y1 - y0));
        let sum = sat[y1 * w + x1] - sat[y0 * w + x1] - sat[y1 * w + x0] + sat[y0 * w + x0];
        let mean = sum / count;
        let first = f.values[y0 * nx + x0];
        let mut osc = T::zero();
        let mut flat = true;
        for j in y0..y1 {
            for v in &f.values[j * nx + x0..j * nx + x1] {
                osc += (*v - mean).abs();
                flat &= *v == first;
            }
        }
        // A rounded mean must not turn a flat box into a nonzero oscillation.
        if !flat {
            best = best.max(osc / count);
        }
    }
    best
}

/// [`bmo_seminorm_cells`] after averaging node values to cells.
pub fn bmo_seminorm<T: Real>(f: &ScalarGrid<T>) -> T {
    bmo_seminorm_cells(&CellField::from_nodes(f))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::Grid2;

    #[test]
    fn constant_is_exactly_zero() {
        let f = ScalarGrid::from_fn(Grid2::<f64>::unit(9, 9), |_| 0.37);
        assert_eq!(bmo_seminorm(&f), 0.0);
    }

    #[test]
    fn checkerboard_blocks_give_one() {
        let n = 16;
        let values = (0..n * n).map(|k| if ((k % n) / 2 + (k / n) / 2) % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let f = CellField { ncx: n, ncy: n, values };
        assert_eq!(bmo_seminorm_cells(&f), 1.0);
    }

    #[test]
    fn ramp_gives_one_quarter() {
        let n = 32;
        let values = (0..n * n).map(|k| ((k % n) as f64 + 0.5) / n as f64).collect();
        let f = CellField { ncx: n, ncy: n, values };
        assert!((bmo_seminorm_cells(&f) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn boxes_cover_levels() {
        let b = dyadic_boxes(8, 8);
        assert_eq!(b.len(), 1 + 4 + 16);
        assert!(b.iter().all(|q| q.1 - q.0 >= 2 && q.3 - q.2 >= 2));
    }
}
