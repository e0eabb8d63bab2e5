//! Discrete weighted de Rham complex.
//!
//! Cochains live on vertices, edges and (for surfaces) faces. Exterior
//! derivatives are signed incidence matrices; inner products are diagonal
//! lumped Hodge stars with the weight `e^{-f}` folded in. The codifferential
//! is realized weakly as `δ′_p = M_{p-1}^{-1} d_{p-1}ᵀ M_p`, which makes it the
//! exact adjoint of `d` in the weighted inner products.

pub mod exterior;

use std::collections::BTreeMap;
use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::manifold::cells::{circumcenter, circumcentric_dual_areas, cot_at, polygon_dual_lengths, polygon_edge_lengths, polygon_edge_point};
use crate::manifold::mesh::triangle_area;
use crate::manifold::{CellStructure, GeometryBackend};
use crate::sparse::CsrMatrix;

pub use exterior::{contraction_bound_check, contraction_pairing, wedge_contract, PointwiseForm};

/// Weight `e^{-f}` used in the inner products.
#[derive(Clone, Debug, PartialEq)]
pub enum WeightField {
    /// `f = |x|²/2`.
    Gaussian,
    /// `f = 0`.
    Unweighted,
    /// Arbitrary positive weight per vertex; edges and faces use the
    /// average over their vertices.
    Nodal(Vec<f64>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum WeightTag {
    /// `f = |x|²/2`
    HalfSquaredNorm,
    Unweighted,
    Nodal,
}

/// Stiffness and mass of the weak Hodge Laplacian in one degree.
#[derive(Clone, Debug)]
pub struct HodgePair {
    pub degree: usize,
    pub stiffness: CsrMatrix<f64>,
    pub mass: CsrMatrix<f64>,
}

#[derive(Clone, Debug)]
pub struct WeightedComplex {
    dim: usize,
    d: Vec<CsrMatrix<i64>>,
    mass: Vec<Vec<f64>>,
    cell_xsq: Vec<Vec<f64>>,
    vertex_positions: Vec<Vec<f64>>,
    weight: WeightTag,
}

/// Complex with the Gaussian weight `e^{-|x|²/2}`.
pub fn build_complex(backend: &GeometryBackend) -> Result<WeightedComplex> {
    build_complex_weighted(backend, &WeightField::Gaussian)
}

pub fn build_complex_weighted(backend: &GeometryBackend, weight: &WeightField) -> Result<WeightedComplex> {
    let cells = backend.cells().ok_or_else(|| {
        Error::Capability(format!(
            "{:?} backend of dimension {} has no cell complex; use the analytic spectrum",
            backend.kind(),
            backend.intrinsic_dim()
        ))
    })?;
    if let WeightField::Nodal(w) = weight {
        if w.len() != cells.vertex_count() {
            return Err(Error::Shape(format!(
                "nodal weight has {} entries for {} vertices",
                w.len(),
                cells.vertex_count()
            )));
        }
        if w.iter().any(|x| !(*x > 0.0)) {
            return Err(Error::Input("nodal weights must be positive".into()));
        }
    }
    let eval = |xsq: f64, verts: &[usize]| -> f64 {
        match weight {
            WeightField::Gaussian => (-xsq / 2.0).exp(),
            WeightField::Unweighted => 1.0,
            WeightField::Nodal(w) => verts.iter().map(|&v| w[v]).sum::<f64>() / verts.len() as f64,
        }
    };
    let tag = match weight {
        WeightField::Gaussian => WeightTag::HalfSquaredNorm,
        WeightField::Unweighted => WeightTag::Unweighted,
        WeightField::Nodal(_) => WeightTag::Nodal,
    };

    match cells {
        CellStructure::Polygon { vertices, metric } => {
            let n = vertices.len();
            let lengths = polygon_edge_lengths(vertices, *metric);
            let dual = polygon_dual_lengths(vertices, *metric);
            let mut triplets = Vec::with_capacity(2 * n);
            for j in 0..n {
                triplets.push((j, j, -1i64));
                triplets.push((j, (j + 1) % n, 1i64));
            }
            let d0 = CsrMatrix::from_triplets(n, n, triplets);
            let xsq0: Vec<f64> = vertices.iter().map(|v| backend.cell_xsq(v)).collect();
            let xsq1: Vec<f64> = (0..n).map(|j| backend.cell_xsq(&polygon_edge_point(vertices, j))).collect();
            let m0: Vec<f64> = (0..n).map(|j| dual[j] * eval(xsq0[j], &[j])).collect();
            let m1: Vec<f64> = (0..n).map(|j| eval(xsq1[j], &[j, (j + 1) % n]) / lengths[j]).collect();
            let out = WeightedComplex {
                dim: 1,
                d: vec![d0],
                mass: vec![m0, m1],
                cell_xsq: vec![xsq0, xsq1],
                vertex_positions: vertices.iter().map(|v| v.to_vec()).collect(),
                weight: tag,
            };
            out.check_masses()?;
            Ok(out)
        }
        CellStructure::Triangles {
            vertices,
            triangles,
        } => {
            let nv = vertices.len();
            // edge -> vertices opposite to it
            let mut edge_map: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
            for t in triangles {
                for c in 0..3 {
                    let a = t[c];
                    let b = t[(c + 1) % 3];
                    edge_map.entry((a.min(b), a.max(b))).or_default().push(t[(c + 2) % 3]);
                }
            }
            let edges: Vec<(usize, usize)> = edge_map.keys().copied().collect();
            let edge_index: BTreeMap<(usize, usize), usize> =
                edges.iter().enumerate().map(|(i, &e)| (e, i)).collect();

            let mut t0 = Vec::with_capacity(2 * edges.len());
            for (i, &(a, b)) in edges.iter().enumerate() {
                t0.push((i, a, -1i64));
                t0.push((i, b, 1i64));
            }
            let d0 = CsrMatrix::from_triplets(edges.len(), nv, t0);
            let mut t1 = Vec::with_capacity(3 * triangles.len());
            for (f, t) in triangles.iter().enumerate() {
                for c in 0..3 {
                    let a = t[c];
                    let b = t[(c + 1) % 3];
                    let sign = if a < b { 1 } else { -1 };
                    t1.push((f, edge_index[&(a.min(b), a.max(b))], sign));
                }
            }
            let d1 = CsrMatrix::from_triplets(triangles.len(), edges.len(), t1);

            let dual = circumcentric_dual_areas(vertices, triangles);
            let xsq0: Vec<f64> = vertices.iter().map(|v| backend.cell_xsq(v)).collect();
            let m0: Vec<f64> = (0..nv).map(|v| dual[v] * eval(xsq0[v], &[v])).collect();

            let mut xsq1 = Vec::with_capacity(edges.len());
            let mut m1 = Vec::with_capacity(edges.len());
            for (&(a, b), opposite) in &edge_map {
                let (pa, pb) = (&vertices[a], &vertices[b]);
                let cot: f64 = opposite.iter().map(|&o| cot_at(&vertices[o], pa, pb)).sum();
                let mid = [(pa[0] + pb[0]) / 2.0, (pa[1] + pb[1]) / 2.0, (pa[2] + pb[2]) / 2.0];
                let xsq = backend.cell_xsq(&mid);
                xsq1.push(xsq);
                m1.push(cot / 2.0 * eval(xsq, &[a, b]));
            }

            let mut xsq2 = Vec::with_capacity(triangles.len());
            let mut m2 = Vec::with_capacity(triangles.len());
            for t in triangles {
                let (a, b, c) = (&vertices[t[0]], &vertices[t[1]], &vertices[t[2]]);
                let xsq = backend.cell_xsq(&circumcenter(a, b, c));
                xsq2.push(xsq);
                m2.push(eval(xsq, t) / triangle_area(a, b, c));
            }

            let out = WeightedComplex {
                dim: 2,
                d: vec![d0, d1],
                mass: vec![m0, m1, m2],
                cell_xsq: vec![xsq0, xsq1, xsq2],
                vertex_positions: vertices.iter().map(|v| v.to_vec()).collect(),
                weight: tag,
            };
            out.check_masses()?;
            Ok(out)
        }
    }
}

impl WeightedComplex {
    fn check_masses(&self) -> Result<()> {
        for (p, m) in self.mass.iter().enumerate() {
            if let Some(i) = m.iter().position(|x| !(*x > 0.0) || !x.is_finite()) {
                return Err(Error::Geometry(format!(
                    "lumped mass for {p}-cell {i} is {:.3e}; the mesh must be Delaunay",
                    m[i]
                )));
            }
        }
        Ok(())
    }

    fn check_degree(&self, p: usize) -> Result<()> {
        if p > self.dim {
            Err(Error::Degree {
                degree: p,
                max: self.dim,
            })
        } else {
            Ok(())
        }
    }

    pub fn degrees(&self) -> usize {
        self.dim
    }

    pub fn weight(&self) -> WeightTag {
        self.weight
    }

    pub fn cell_count(&self, p: usize) -> Result<usize> {
        self.check_degree(p)?;
        Ok(self.mass[p].len())
    }

    /// Exterior derivative `d_p` from `p`-cochains to `(p+1)`-cochains.
    pub fn d(&self, p: usize) -> Result<&CsrMatrix<i64>> {
        self.d.get(p).ok_or(Error::Degree {
            degree: p,
            max: self.dim.saturating_sub(1),
        })
    }

    /// Diagonal of the lumped mass `M_p`.
    pub fn mass_diagonal(&self, p: usize) -> Result<&[f64]> {
        self.check_degree(p)?;
        Ok(&self.mass[p])
    }

    pub fn mass_matrix(&self, p: usize) -> Result<CsrMatrix<f64>> {
        Ok(CsrMatrix::from_diagonal(self.mass_diagonal(p)?))
    }

    /// `|x|²` at the point where the weight of each `p`-cell was sampled.
    pub fn cell_xsq(&self, p: usize) -> Result<&[f64]> {
        self.check_degree(p)?;
        Ok(&self.cell_xsq[p])
    }

    /// `K_p = d_pᵀ M_{p+1} d_p + M_p d_{p-1} M_{p-1}^{-1} d_{p-1}ᵀ M_p`, with
    /// the absent term dropped in the extreme degrees.
    pub fn hodge_laplacian(&self, p: usize) -> Result<HodgePair> {
        self.check_degree(p)?;
        let n = self.mass[p].len();
        let mut k = CsrMatrix::from_triplets(n, n, Vec::new());
        if p < self.dim {
            let d = self.d[p].to_f64();
            let upper = d.transpose().matmul(&d.scale(Some(&self.mass[p + 1]), None))?;
            k = k.add(&upper)?;
        }
        if p > 0 {
            let d = self.d[p - 1].to_f64();
            let inv: Vec<f64> = self.mass[p - 1].iter().map(|x| 1.0 / x).collect();
            let left = d.scale(Some(&self.mass[p]), None);
            let right = d.transpose().scale(Some(&inv), Some(&self.mass[p]));
            k = k.add(&left.matmul(&right)?)?;
        }
        Ok(HodgePair {
            degree: p,
            stiffness: k,
            mass: self.mass_matrix(p)?,
        })
    }

    /// `d_p a`.
    pub fn apply_d(&self, p: usize, a: &[f64]) -> Result<Vec<f64>> {
        let d = self.d(p)?;
        self.check_len(p, a)?;
        Ok(d.to_f64().mul_vec(a))
    }

    /// Weak codifferential `δ′_p b = M_{p-1}^{-1} d_{p-1}ᵀ M_p b`.
    pub fn codifferential(&self, p: usize, b: &[f64]) -> Result<Vec<f64>> {
        if p == 0 {
            return Err(Error::Degree { degree: 0, max: self.dim });
        }
        self.check_degree(p)?;
        self.check_len(p, b)?;
        let mb: Vec<f64> = b.iter().zip(&self.mass[p]).map(|(x, m)| x * m).collect();
        let dt = self.d[p - 1].transpose().to_f64().mul_vec(&mb);
        Ok(dt.iter().zip(&self.mass[p - 1]).map(|(x, m)| x / m).collect())
    }

    /// `⟨a, b⟩_{M_p}`.
    pub fn inner(&self, p: usize, a: &[f64], b: &[f64]) -> Result<f64> {
        self.check_degree(p)?;
        self.check_len(p, a)?;
        self.check_len(p, b)?;
        Ok(a.iter().zip(b).zip(&self.mass[p]).map(|((x, y), m)| x * y * m).sum())
    }

    /// Drift operator `𝔏u = M_0^{-1} K_0 u`, positive semidefinite.
    pub fn drift_apply(&self, u: &[f64]) -> Result<Vec<f64>> {
        self.check_len(0, u)?;
        if self.dim == 0 {
            return Ok(vec![0.0; u.len()]);
        }
        // applied factor by factor so that closed cochains map to exact zeros
        let du = self.d[0].to_f64().mul_vec(u);
        let weighted: Vec<f64> = du.iter().zip(&self.mass[1]).map(|(x, m)| x * m).collect();
        let back = self.d[0].transpose().to_f64().mul_vec(&weighted);
        Ok(back.iter().zip(&self.mass[0]).map(|(x, m)| x / m).collect())
    }

    /// Ambient coordinate `x^A` sampled at the vertices.
    pub fn coordinate_function(&self, a: usize) -> Result<Vec<f64>> {
        let n = self.vertex_positions.first().map_or(0, Vec::len);
        if a >= n {
            return Err(Error::Dimension(format!("coordinate {a} out of range for R^{n}")));
        }
        Ok(self.vertex_positions.iter().map(|v| v[a]).collect())
    }

    pub fn ambient_dim(&self) -> usize {
        self.vertex_positions.first().map_or(0, Vec::len)
    }

    /// Write `d_p` as MatrixMarket coordinate text.
    pub fn write_d_market<W: Write>(&self, p: usize, out: W) -> Result<()> {
        self.d(p)?.write_matrix_market(out)
    }

    /// Write `M_p` as MatrixMarket coordinate text.
    pub fn write_mass_market<W: Write>(&self, p: usize, out: W) -> Result<()> {
        self.mass_matrix(p)?.write_matrix_market(out)
    }

    fn check_len(&self, p: usize, v: &[f64]) -> Result<()> {
        let n = self.mass[p].len();
        if v.len() != n {
            Err(Error::Shape(format!(
                "{p}-cochain has {} entries, expected {n}",
                v.len()
            )))
        } else {
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifold::{mesh_backend, sphere_backend, EmbeddedMesh};

    #[test]
    fn polygon_incidence_structure() {
        let c = build_complex(&sphere_backend(1, 2, 64).unwrap()).unwrap();
        let d0 = c.d(0).unwrap();
        for r in 0..d0.nrows() {
            assert_eq!(d0.row(r).count(), 2);
        }
        assert!(d0.mul_vec(&vec![1i64; 64]).iter().all(|&x| x == 0));
    }

    #[test]
    fn surface_dd_is_zero() {
        let c = build_complex(&mesh_backend(&EmbeddedMesh::icosphere(2, 1.0)).unwrap()).unwrap();
        let dd = c.d(1).unwrap().matmul(c.d(0).unwrap()).unwrap();
        assert!(dd.is_zero());
    }

    #[test]
    fn sphere_mass_trace_is_weighted_area() {
        let c = build_complex(&sphere_backend(2, 3, 4).unwrap()).unwrap();
        let trace: f64 = c.mass_diagonal(0).unwrap().iter().sum();
        let exact = (-1f64).exp() * 8.0 * std::f64::consts::PI;
        assert!((trace - exact).abs() < 5e-3 * exact);
    }

    #[test]
    fn constants_are_harmonic() {
        let c = build_complex(&mesh_backend(&EmbeddedMesh::icosphere(2, 1.4)).unwrap()).unwrap();
        let lu = c.drift_apply(&vec![1.0; c.cell_count(0).unwrap()]).unwrap();
        assert!(lu.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn weak_adjointness() {
        let c = build_complex(&mesh_backend(&EmbeddedMesh::icosphere(1, 1.2)).unwrap()).unwrap();
        for p in 0..2 {
            let a: Vec<f64> = (0..c.cell_count(p).unwrap()).map(|i| (i as f64 * 0.7).sin()).collect();
            let b: Vec<f64> = (0..c.cell_count(p + 1).unwrap()).map(|i| (i as f64 * 1.3).cos()).collect();
            let lhs = c.inner(p + 1, &c.apply_d(p, &a).unwrap(), &b).unwrap();
            let rhs = c.inner(p, &a, &c.codifferential(p + 1, &b).unwrap()).unwrap();
            assert!((lhs - rhs).abs() <= 1e-10 * lhs.abs().max(rhs.abs()));
        }
    }

    #[test]
    fn degree_out_of_range() {
        let c = build_complex(&sphere_backend(1, 2, 8).unwrap()).unwrap();
        assert!(matches!(c.hodge_laplacian(2), Err(Error::Degree { .. })));
    }

    #[test]
    fn higher_spheres_have_no_complex() {
        let b = sphere_backend(3, 4, 3).unwrap();
        assert!(matches!(build_complex(&b), Err(Error::Capability(_))));
    }

    #[test]
    fn market_export_header() {
        let c = build_complex(&sphere_backend(1, 2, 4).unwrap()).unwrap();
        let mut buf = Vec::new();
        c.write_d_market(0, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("%%MatrixMarket matrix coordinate integer general"));
        assert!(text.lines().nth(1).unwrap().starts_with("4 4 8"));
    }
}
