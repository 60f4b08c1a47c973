use serde::Serialize;

use crate::error::{Error, Result};
use crate::quad::GaussLegendre;
use crate::scalar::Real;

/// Uniform box mesh of multilinear cells in two or three dimensions.
/// Unused trailing axes have one cell of unit width.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoxMesh<T> {
    pub dim: usize,
    pub lo: [T; 3],
    pub hi: [T; 3],
    pub cells: [usize; 3],
}

impl<T: Real> BoxMesh<T> {
    pub fn new(dim: usize, lo: [T; 3], hi: [T; 3], cells: [usize; 3]) -> Result<Self> {
        if dim != 2 && dim != 3 {
            return Err(Error::InvalidParameter(format!("dimension must be 2 or 3, got {dim}")));
        }
        let mut cells = cells;
        let (mut lo, mut hi) = (lo, hi);
        for d in 0..3 {
            if d >= dim {
                cells[d] = 1;
                lo[d] = T::zero();
                hi[d] = T::one();
            }
            if cells[d] == 0 || !(hi[d] > lo[d]) {
                return Err(Error::InvalidParameter(format!("axis {d} is empty")));
            }
        }
        Ok(BoxMesh { dim, lo, hi, cells })
    }

    pub fn unit_square(n: usize) -> Result<Self> {
        Self::new(2, [T::zero(); 3], [T::one(); 3], [n, n, 1])
    }

    pub fn unit_cube(n: usize) -> Result<Self> {
        Self::new(3, [T::zero(); 3], [T::one(); 3], [n, n, n])
    }

    pub fn h(&self, d: usize) -> T {
        (self.hi[d] - self.lo[d]) / T::from_usize_lossy(self.cells[d])
    }

    /// Nodes per axis.
    pub fn nodes_per_axis(&self) -> [usize; 3] {
        let mut n = [1; 3];
        for d in 0..self.dim {
            n[d] = self.cells[d] + 1;
        }
        n
    }

    pub fn node_count(&self) -> usize {
        self.nodes_per_axis().iter().product()
    }

    pub fn element_count(&self) -> usize {
        self.cells[..self.dim].iter().product()
    }

    pub fn node_index(&self, ijk: [usize; 3]) -> usize {
        let n = self.nodes_per_axis();
        ijk[0] + n[0] * (ijk[1] + n[1] * ijk[2])
    }

    pub fn node_ijk(&self, idx: usize) -> [usize; 3] {
        let n = self.nodes_per_axis();
        [idx % n[0], (idx / n[0]) % n[1], idx / (n[0] * n[1])]
    }

    pub fn node_coords(&self, idx: usize) -> [T; 3] {
        let ijk = self.node_ijk(idx);
        let mut x = [T::zero(); 3];
        for d in 0..self.dim {
            x[d] = self.lo[d] + self.h(d) * T::from_usize_lossy(ijk[d]);
        }
        x
    }

    pub fn is_boundary(&self, idx: usize) -> bool {
        let ijk = self.node_ijk(idx);
        (0..self.dim).any(|d| ijk[d] == 0 || ijk[d] == self.cells[d])
    }

    pub fn local_nodes(&self) -> usize {
        1 << self.dim
    }

    pub fn element_ijk(&self, e: usize) -> [usize; 3] {
        let c = self.cells;
        let mut ijk = [e % c[0], (e / c[0]) % c[1], 0];
        if self.dim == 3 {
            ijk[2] = e / (c[0] * c[1]);
        }
        ijk
    }

    /// Global node numbers of element `e`; local node `a` has offset bit `d` along axis `d`.
    pub fn element_nodes(&self, e: usize) -> [usize; 8] {
        let base = self.element_ijk(e);
        let mut out = [0; 8];
        for (a, o) in out.iter_mut().enumerate().take(self.local_nodes()) {
            let mut ijk = base;
            for (d, v) in ijk.iter_mut().enumerate().take(self.dim) {
                *v += (a >> d) & 1;
            }
            *o = self.node_index(ijk);
        }
        out
    }

    pub fn element_origin(&self, e: usize) -> [T; 3] {
        let ijk = self.element_ijk(e);
        let mut x = [T::zero(); 3];
        for d in 0..self.dim {
            x[d] = self.lo[d] + self.h(d) * T::from_usize_lossy(ijk[d]);
        }
        x
    }
}

/// Shape values, physical gradients and weights at the tensor Gauss points
/// of a reference cell; identical for every cell of a uniform mesh.
#[derive(Debug, Clone)]
pub struct ShapeTable<T> {
    /// Offset of each point from the cell origin.
    pub offsets: Vec<[T; 3]>,
    pub weights: Vec<T>,
    pub values: Vec<[T; 8]>,
    pub grads: Vec<[[T; 3]; 8]>,
}

impl<T: Real> ShapeTable<T> {
    pub fn new(mesh: &BoxMesh<T>, order: usize) -> Self {
        let rule = GaussLegendre::<T>::new(order);
        let pts: Vec<(T, T)> = rule.on(T::zero(), T::one()).collect();
        let h = [mesh.h(0), mesh.h(1), mesh.h(2)];
        let dim = mesh.dim;
        let n = pts.len();
        let total = n.pow(dim as u32);
        let mut t = ShapeTable {
            offsets: Vec::with_capacity(total),
            weights: Vec::with_capacity(total),
            values: Vec::with_capacity(total),
            grads: Vec::with_capacity(total),
        };
        for q in 0..total {
            let mut s = [T::zero(); 3];
            let mut w = T::one();
            let mut idx = q;
            for d in 0..dim {
                let (x, wx) = pts[idx % n];
                idx /= n;
                s[d] = x;
                w *= wx * h[d];
            }
            let mut vals = [T::zero(); 8];
            let mut grads = [[T::zero(); 3]; 8];
            for a in 0..mesh.local_nodes() {
                let f = |d: usize, x: T| if (a >> d) & 1 == 1 { x } else { T::one() - x };
                let df = |d: usize| if (a >> d) & 1 == 1 { T::one() } else { -T::one() };
                let mut v = T::one();
                for d in 0..dim {
                    v *= f(d, s[d]);
                }
                vals[a] = v;
                for d in 0..dim {
                    let mut g = df(d) / h[d];
                    for e in 0..dim {
                        if e != d {
                            g *= f(e, s[e]);
                        }
                    }
                    grads[a][d] = g;
                }
            }
            let mut off = [T::zero(); 3];
            for d in 0..dim {
                off[d] = s[d] * h[d];
            }
            t.offsets.push(off);
            t.weights.push(w);
            t.values.push(vals);
            t.grads.push(grads);
        }
        t
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shape_functions_partition_unity() {
        for mesh in [BoxMesh::<f64>::unit_square(4).unwrap(), BoxMesh::unit_cube(3).unwrap()] {
            let t = ShapeTable::new(&mesh, 3);
            let vol: f64 = t.weights.iter().sum();
            let cell: f64 = (0..mesh.dim).map(|d| mesh.h(d)).product();
            assert!((vol - cell).abs() < 1e-15);
            for (v, g) in t.values.iter().zip(&t.grads) {
                let s: f64 = v[..mesh.local_nodes()].iter().sum();
                assert!((s - 1.0).abs() < 1e-14);
                for d in 0..mesh.dim {
                    let gs: f64 = g[..mesh.local_nodes()].iter().map(|x| x[d]).sum();
                    assert!(gs.abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn indexing_roundtrip() {
        let m = BoxMesh::<f64>::new(3, [0.0; 3], [1.0, 2.0, 3.0], [2, 3, 4]).unwrap();
        for i in 0..m.node_count() {
            assert_eq!(m.node_index(m.node_ijk(i)), i);
        }
        assert_eq!(m.element_count(), 24);
        let nodes = m.element_nodes(m.element_count() - 1);
        assert_eq!(nodes[7], m.node_count() - 1);
        assert!(m.is_boundary(0) && !m.is_boundary(m.node_index([1, 1, 1])));
    }
}
